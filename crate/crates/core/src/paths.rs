//! Lengths of curves in the quotient, speeds along them, and polyline
//! estimates of the intrinsic metric.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::speed::limit_estimate;
use crate::geometry::{AmbientPoint, EstimateMethod, NormEstimate, Sides, StepLadder};
use crate::group::{AlgebraVector, GroupElement, GroupModel};
use crate::hausdorff::{hausdorff_points, induced_metric, translate_sample, HausdorffMethod, QuotientPoint};
use crate::scenario::Scenario;

/// Piecewise one-parameter path through quotient knots: between knots it
/// follows `g_i exp(s log(g_i^{-1} g_{i+1}))`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientPath {
    pub knots: Vec<QuotientPoint>,
    pub params: Vec<f64>,
}

impl QuotientPath {
    pub fn new(knots: Vec<QuotientPoint>, params: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::Domain(format!("a path needs at least 2 knots, got {}", knots.len())));
        }
        if knots.len() != params.len() {
            return Err(Error::DimensionMismatch {
                expected: knots.len(),
                got: params.len(),
            });
        }
        if params.windows(2).any(|w| !(w[1] > w[0])) || params.iter().any(|t| !t.is_finite()) {
            return Err(Error::Domain("path parameters must be finite and strictly increasing".into()));
        }
        Ok(Self { knots, params })
    }

    /// `t ↦ exp(t v)` on `[a, b]` with `segments` equal pieces.
    pub fn orbit(group: &GroupModel, v: &AlgebraVector, a: f64, b: f64, segments: usize) -> Result<Self> {
        if !(b > a) || segments == 0 {
            return Err(Error::Domain(format!("orbit needs b > a and segments > 0 (a={a}, b={b})")));
        }
        let params: Vec<f64> = (0..=segments)
            .map(|i| a + (b - a) * i as f64 / segments as f64)
            .collect();
        let knots = params
            .iter()
            .map(|&t| group.exp_map(v, t).map(QuotientPoint::new))
            .collect::<Result<_>>()?;
        Self::new(knots, params)
    }

    pub fn validate(&self, group: &GroupModel) -> Result<()> {
        self.knots.iter().try_for_each(|k| group.validate(&k.rep))
    }

    pub fn eval(&self, group: &GroupModel, t: f64) -> Result<QuotientPoint> {
        let (first, last) = (self.params[0], self.params[self.params.len() - 1]);
        if !(t >= first && t <= last) {
            return Err(Error::Domain(format!("parameter {t} outside [{first}, {last}]")));
        }
        let i = self
            .params
            .partition_point(|&p| p <= t)
            .saturating_sub(1)
            .min(self.params.len() - 2);
        let (p0, p1) = (self.params[i], self.params[i + 1]);
        let s = (t - p0) / (p1 - p0);
        if s == 0.0 {
            return Ok(self.knots[i].clone());
        }
        let g = &self.knots[i].rep;
        let step = group.log(&group.compose(&group.inverse(g)?, &self.knots[i + 1].rep)?)?;
        Ok(QuotientPoint::new(group.compose(g, &group.exp_map(&step, s)?)?))
    }

    /// The same curve with `2^k` times as many knots.
    pub fn refined(&self, group: &GroupModel, k: u32) -> Result<Self> {
        let per = 1usize << k;
        let mut params = Vec::with_capacity((self.params.len() - 1) * per + 1);
        for w in self.params.windows(2) {
            params.extend((0..per).map(|j| w[0] + (w[1] - w[0]) * j as f64 / per as f64));
        }
        params.push(self.params[self.params.len() - 1]);
        let knots = params
            .par_iter()
            .map(|&t| self.eval(group, t))
            .collect::<Result<_>>()?;
        Self::new(knots, params)
    }
}

/// Polygonal sum `Σ d_X(k_i, k_{i+1})` over the knots.
fn polygonal_sum(s: &Scenario, knots: &[QuotientPoint]) -> Result<f64> {
    let images: Vec<Vec<AmbientPoint>> = knots
        .par_iter()
        .map(|k| translate_sample(s, &k.rep))
        .collect::<Result<_>>()?;
    let pieces: Vec<f64> = images
        .par_windows(2)
        .map(|w| hausdorff_points(&s.manifold, &w[0], &w[1], HausdorffMethod::Auto))
        .collect::<Result<_>>()?;
    // Summed in order so the result does not depend on scheduling.
    Ok(pieces.iter().sum())
}

/// Polygonal sums over nested refinements of a path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLength {
    /// `Σ(P_k)` for `k = 0..=refinements`.
    pub sums: Vec<f64>,
    pub value: f64,
    /// Gap between the last two sums.
    pub error_estimate: f64,
}

pub fn path_length(s: &Scenario, path: &QuotientPath, refinements: u32) -> Result<PathLength> {
    path.validate(&s.group)?;
    let sums = (0..=refinements)
        .map(|k| polygonal_sum(s, &path.refined(&s.group, k)?.knots))
        .collect::<Result<Vec<_>>>()?;
    let value = sums[sums.len() - 1];
    let error_estimate = match sums.len() {
        1 => 0.0,
        n => (sums[n - 1] - sums[n - 2]).abs(),
    };
    Ok(PathLength {
        sums,
        value,
        error_estimate,
    })
}

/// `|ℓ(η|[a,b]) - (b - a) ℓ(η|[0,1])|` for `η(t) = exp(t v)`.
///
/// Both lengths use the same segment size: `[0,1]` is cut into `2^depth`
/// pieces and `[a,b]` into `round((b - a) 2^depth)`.
pub fn orbit_length_homogeneity(s: &Scenario, v: &AlgebraVector, a: f64, b: f64, depth: u32) -> Result<f64> {
    if !(b > a) {
        return Err(Error::Domain(format!("need b > a, got a={a}, b={b}")));
    }
    let unit_segments = 1usize << depth;
    let segments = ((b - a) * unit_segments as f64).round().max(1.0) as usize;
    let unit = polygonal_sum(s, &QuotientPath::orbit(&s.group, v, 0.0, 1.0, unit_segments)?.knots)?;
    let long = polygonal_sum(s, &QuotientPath::orbit(&s.group, v, a, b, segments)?.knots)?;
    Ok((long - (b - a) * unit).abs())
}

/// Two-sided speed `lim d_X(c(t0 + h), c(t0)) / |h|` of a quotient curve.
pub fn quotient_speed<C>(s: &Scenario, curve: C, t0: f64, ladder: &StepLadder) -> Result<NormEstimate>
where
    C: Fn(f64) -> Result<QuotientPoint> + Sync,
{
    let base = curve(t0)?;
    let here = translate_sample(s, &base.rep)?;
    limit_estimate(ladder, Sides::Both, EstimateMethod::LimitLadder, |h| {
        let there = translate_sample(s, &curve(t0 + h)?.rep)?;
        Ok(hausdorff_points(&s.manifold, &there, &here, HausdorffMethod::Auto)? / h.abs())
    })
}

/// Polyline estimate of the intrinsic distance.
#[derive(Debug, Clone, PartialEq)]
pub struct IntrinsicEstimate {
    /// Shortest polyline length found over all restarts.
    pub value: f64,
    /// `d_X(g1, g2)`, a lower bound for the intrinsic distance.
    pub direct: f64,
    /// Best length per restart, in restart order.
    pub restarts: Vec<f64>,
    pub evaluations: usize,
}

const RESTARTS: u64 = 3;
const MIN_STEP: f64 = 1e-6;

struct Polyline<'a> {
    s: &'a Scenario,
    g1: GroupElement,
    g2: GroupElement,
    bases: Vec<GroupElement>,
}

impl Polyline<'_> {
    fn knot(&self, i: usize, xi: &[f64]) -> Result<GroupElement> {
        let v = AlgebraVector::new(xi.to_vec());
        self.s.group.compose(&self.bases[i], &self.s.group.exp_map(&v, 1.0)?)
    }

    fn metric(&self, a: &GroupElement, b: &GroupElement) -> Result<f64> {
        induced_metric(self.s, &QuotientPoint::new(a.clone()), &QuotientPoint::new(b.clone()))
    }

    /// Lengths of the segments ending at each knot, then the final one.
    fn segments(&self, knots: &[GroupElement]) -> Result<Vec<f64>> {
        let all: Vec<&GroupElement> = std::iter::once(&self.g1).chain(knots).chain([&self.g2]).collect();
        all.windows(2).map(|w| self.metric(w[0], w[1])).collect()
    }
}

/// Pattern search over interior knots `base_i exp(ξ_i)`, starting on the
/// one-parameter segment from `g1` to `g2`.
///
/// `max_evals` bounds metric evaluations per restart; running out returns
/// [`Error::IterationBudgetExceeded`] with the best length seen.
pub fn intrinsic_distance(
    s: &Scenario,
    g1: &QuotientPoint,
    g2: &QuotientPoint,
    knots: usize,
    max_evals: usize,
) -> Result<IntrinsicEstimate> {
    let group = &s.group;
    group.validate(&g1.rep)?;
    group.validate(&g2.rep)?;
    let direct = induced_metric(s, g1, g2)?;
    let chord = group.log(&group.compose(&group.inverse(&g1.rep)?, &g2.rep)?)?;
    let span = chord.norm();
    if direct == 0.0 && span == 0.0 {
        return Ok(IntrinsicEstimate {
            value: 0.0,
            direct,
            restarts: vec![0.0; RESTARTS as usize],
            evaluations: 0,
        });
    }
    let bases = (1..=knots)
        .map(|i| group.compose(&g1.rep, &group.exp_map(&chord, i as f64 / (knots + 1) as f64)?))
        .collect::<Result<Vec<_>>>()?;
    let line = Polyline {
        s,
        g1: g1.rep.clone(),
        g2: g2.rep.clone(),
        bases,
    };
    let dim = s.algebra_dim();
    let results: Vec<Result<(f64, usize)>> = (0..RESTARTS)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(r);
            let jitter = if r == 0 { 0.0 } else { 0.05 * span };
            let xi: Vec<Vec<f64>> = (0..knots)
                .map(|_| (0..dim).map(|_| jitter * rng.gen_range(-1.0..1.0)).collect())
                .collect();
            pattern_search(&line, xi, 0.1 * span, max_evals)
        })
        .collect();
    let mut restarts = Vec::with_capacity(results.len());
    let mut evaluations = 0;
    let mut exhausted: Option<f64> = None;
    for r in results {
        match r {
            Ok((len, evals)) => {
                restarts.push(len);
                evaluations += evals;
            }
            Err(Error::IterationBudgetExceeded { best }) => {
                exhausted = Some(exhausted.map_or(best, |b: f64| b.min(best)));
                restarts.push(best);
            }
            Err(e) => return Err(e),
        }
    }
    let value = restarts.iter().copied().fold(f64::INFINITY, f64::min);
    if exhausted.is_some() {
        return Err(Error::IterationBudgetExceeded { best: value });
    }
    Ok(IntrinsicEstimate {
        value,
        direct,
        restarts,
        evaluations,
    })
}

fn pattern_search(line: &Polyline, mut xi: Vec<Vec<f64>>, mut step: f64, max_evals: usize) -> Result<(f64, usize)> {
    let mut knots = xi
        .iter()
        .enumerate()
        .map(|(i, x)| line.knot(i, x))
        .collect::<Result<Vec<_>>>()?;
    let mut seg = line.segments(&knots)?;
    let mut evals = seg.len();
    let total = |seg: &[f64]| seg.iter().sum::<f64>();
    while step >= MIN_STEP {
        let mut improved = false;
        for i in 0..knots.len() {
            for c in 0..xi[i].len() {
                for sign in [1.0, -1.0] {
                    if evals + 2 > max_evals {
                        return Err(Error::IterationBudgetExceeded { best: total(&seg) });
                    }
                    let mut trial = xi[i].clone();
                    trial[c] += sign * step;
                    let k = line.knot(i, &trial)?;
                    let prev = if i == 0 { &line.g1 } else { &knots[i - 1] };
                    let next = if i + 1 == knots.len() { &line.g2 } else { &knots[i + 1] };
                    let (left, right) = (line.metric(prev, &k)?, line.metric(&k, next)?);
                    evals += 2;
                    if left + right < seg[i] + seg[i + 1] - 1e-15 {
                        xi[i] = trial;
                        knots[i] = k;
                        seg[i] = left;
                        seg[i + 1] = right;
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok((total(&seg), evals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_hyperbolic_two_points, build_irrational_flow, build_rn_translation, build_torus_minus_square};

    fn rn2() -> Scenario {
        build_rn_translation(2, &[vec![0.0, 0.0]]).unwrap()
    }

    fn q(v: &[f64]) -> QuotientPoint {
        QuotientPoint::new(GroupElement::new(v.to_vec()))
    }

    #[test]
    fn path_invariants() {
        let g = GroupModel::TranslationRn(2);
        assert!(QuotientPath::new(vec![q(&[0.0, 0.0])], vec![0.0]).is_err());
        assert!(QuotientPath::new(vec![q(&[0.0, 0.0]), q(&[1.0, 0.0])], vec![1.0, 1.0]).is_err());
        let p = QuotientPath::new(vec![q(&[0.0, 0.0]), q(&[2.0, 0.0])], vec![0.0, 1.0]).unwrap();
        assert_eq!(p.eval(&g, 0.25).unwrap(), q(&[0.5, 0.0]));
        assert!(p.eval(&g, 1.5).is_err());
        assert_eq!(p.refined(&g, 3).unwrap().knots.len(), 9);
    }

    #[test]
    fn constant_path_has_zero_length() {
        let s = rn2();
        let p = QuotientPath::new(vec![q(&[1.0, 1.0]), q(&[1.0, 1.0])], vec![0.0, 1.0]).unwrap();
        let len = path_length(&s, &p, 4).unwrap();
        assert!(len.sums.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn horizontal_orbit_has_unit_length() {
        let s = rn2();
        let p = QuotientPath::orbit(&s.group, &AlgebraVector::from([1.0, 0.0]), 0.0, 1.0, 1).unwrap();
        let len = path_length(&s, &p, 5).unwrap();
        for x in &len.sums {
            assert!((x - 1.0).abs() < 1e-12, "{len:?}");
        }
    }

    #[test]
    fn hyperbolic_vertical_orbit_has_length_sqrt2() {
        // length = ∫ F(v) dt with F(v_{π/2}) = sqrt(a² + b²) at a = b = 1
        let s = build_hyperbolic_two_points(1.0, 1.0).unwrap();
        let p = QuotientPath::orbit(&s.group, &AlgebraVector::from([0.0, 1.0]), 0.0, 1.0, 1).unwrap();
        let len = path_length(&s, &p, 10).unwrap();
        assert!((len.value - 2f64.sqrt()).abs() < 1e-5, "{len:?}");
        for w in len.sums.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "not monotone: {:?}", len.sums);
        }
    }

    #[test]
    fn refinement_sums_are_monotone_on_a_bent_path() {
        let s = build_hyperbolic_two_points(1.0, 1.0).unwrap();
        let p = QuotientPath::new(vec![q(&[0.0, 1.0]), q(&[1.0, 2.0]), q(&[-0.5, 0.5])], vec![0.0, 0.3, 1.0]).unwrap();
        let len = path_length(&s, &p, 6).unwrap();
        for w in len.sums.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "not monotone: {:?}", len.sums);
        }
    }

    #[test]
    fn homogeneity_trivial_interval_is_zero() {
        let s = build_hyperbolic_two_points(1.0, 1.0).unwrap();
        let r = orbit_length_homogeneity(&s, &AlgebraVector::from([1.0, 0.0]), 0.0, 1.0, 6).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn homogeneity_on_hyperbolic_orbit() {
        let s = build_hyperbolic_two_points(1.0, 1.0).unwrap();
        let r = orbit_length_homogeneity(&s, &AlgebraVector::from([1.0, 0.0]), 0.0, 2.0, 8).unwrap();
        assert!(r <= 1e-3, "{r}");
    }

    #[test]
    fn intrinsic_equal_endpoints_is_zero() {
        let s = rn2();
        let r = intrinsic_distance(&s, &q(&[1.0, 2.0]), &q(&[1.0, 2.0]), 3, 10_000).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn straight_segment_is_optimal_in_rn() {
        let s = rn2();
        let r = intrinsic_distance(&s, &q(&[0.0, 0.0]), &q(&[3.0, 4.0]), 3, 100_000).unwrap();
        assert!((r.value - 5.0).abs() < 1e-9, "{r:?}");
        assert!(r.value >= r.direct - 1e-9);
    }

    #[test]
    fn torus_intrinsic_matches_max_norm() {
        let s = build_torus_minus_square(64).unwrap();
        let r = intrinsic_distance(&s, &q(&[0.0, 0.0]), &q(&[0.06, 0.03]), 1, 100_000).unwrap();
        assert!((r.value - 0.06).abs() <= 2.0 * s.sample.fill_radius + 1e-3, "{r:?}");
        assert!(r.value >= r.direct - 1e-9);
    }

    #[test]
    fn budget_exhaustion_reports_best() {
        let s = build_hyperbolic_two_points(1.0, 1.0).unwrap();
        match intrinsic_distance(&s, &q(&[0.0, 1.0]), &q(&[2.0, 3.0]), 3, 10) {
            Err(Error::IterationBudgetExceeded { best }) => assert!(best.is_finite() && best > 0.0),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn optimized_subpolylines_dominate_direct_lengths() {
        let s = build_hyperbolic_two_points(1.0, 1.0).unwrap();
        let knots = [q(&[0.0, 1.0]), q(&[0.7, 1.4]), q(&[-0.3, 2.0])];
        let mut hat = 0.0;
        let mut direct = 0.0;
        for w in knots.windows(2) {
            let r = intrinsic_distance(&s, &w[0], &w[1], 2, 100_000).unwrap();
            hat += r.value;
            direct += induced_metric(&s, &w[0], &w[1]).unwrap();
        }
        assert!(hat >= direct - 1e-9, "{hat} < {direct}");
    }

    #[test]
    fn speeds_along_orbits() {
        let ladder = StepLadder::default();
        let s = build_hyperbolic_two_points(1.0, 1.0).unwrap();
        let e = quotient_speed(&s, |t| Ok(q(&[t, 1.0])), 0.0, &ladder).unwrap();
        assert!((e.value - 1.0).abs() < 1e-6, "{e:?}");

        let rn = rn2();
        let e = quotient_speed(&rn, |t| Ok(q(&[t, t])), 0.0, &ladder).unwrap();
        assert!((e.value - 2f64.sqrt()).abs() < 1e-9, "{e:?}");
        let e = quotient_speed(&rn, |_| Ok(q(&[1.0, 1.0])), 0.0, &ladder).unwrap();
        assert_eq!(e.value, 0.0);

        let flow = build_irrational_flow().unwrap();
        let e = quotient_speed(&flow, |t| Ok(q(&[t])), 0.0, &ladder).unwrap();
        assert!((e.value - 3f64.sqrt()).abs() < 1e-3, "{e:?}");
    }

    #[test]
    fn speed_does_not_depend_on_the_curve() {
        // exp(t v) and exp((t + t²) v) share position and velocity at 0
        let s = build_hyperbolic_two_points(1.0, 1.0).unwrap();
        let v = AlgebraVector::from([0.6, 0.8]);
        let ladder = StepLadder::default();
        let a = quotient_speed(&s, |t| Ok(QuotientPoint::new(s.group.exp_map(&v, t)?)), 0.0, &ladder).unwrap();
        let b = quotient_speed(&s, |t| Ok(QuotientPoint::new(s.group.exp_map(&v, t + t * t)?)), 0.0, &ladder).unwrap();
        let bound = 10.0 * (a.error_estimate + b.error_estimate).max(1e-9);
        assert!((a.value - b.value).abs() <= bound, "{a:?} vs {b:?}");
    }
}
