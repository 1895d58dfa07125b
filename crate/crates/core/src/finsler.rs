//! Three independent estimators of the Finsler norm on `T_{H_X}(G/H_X)` and
//! the checks that tie them to the norm axioms.
//!
//! * [`finsler_limit`]: `lim d_X(exp(tv) H_X, H_X) / |t|` on the sampled set.
//! * [`finsler_sup_killing`]: `max_x ‖K_v(x)^N‖`, the normal part of the
//!   Killing field over the sample (the full field for finite sets).
//! * [`finsler_sup_continuous`]: `lim sup_x d(X, exp(tv) x) / |t|` with the
//!   exact point-to-set distance when the set's shape is known.
//!
//! None of them reuses another's intermediate values, so agreement between
//! them is a real cross-check.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::speed::limit_estimate;
use crate::geometry::{EstimateMethod, NormEstimate, Sides, StepLadder};
use crate::group::{AlgebraVector, GroupElement, GroupModel};
use crate::hausdorff::{hausdorff_points, translate_sample, HausdorffMethod};
use crate::scenario::Scenario;

const TIE_TOL: f64 = 1e-12;
const DEGENERACY_TOL: f64 = 1e-10;

fn check_direction(s: &Scenario, v: &AlgebraVector) -> Result<()> {
    if v.components.len() != s.algebra_dim() {
        return Err(Error::DimensionMismatch {
            expected: s.algebra_dim(),
            got: v.components.len(),
        });
    }
    if v.components.iter().any(|c| !c.is_finite()) {
        return Err(Error::Domain(format!("non-finite direction {:?}", v.components)));
    }
    Ok(())
}

/// Ladder whose steps move `exp(tv)` by the ladder's own scale regardless of
/// `|v|`.
fn direction_ladder(ladder: &StepLadder, v: &AlgebraVector) -> StepLadder {
    ladder.scaled(v.norm())
}

/// Limit of `d_X(exp(tv) H_X, H_X) / |t|`, two-sided.
pub fn finsler_limit(s: &Scenario, v: &AlgebraVector, ladder: &StepLadder) -> Result<NormEstimate> {
    finsler_limit_at(s, &s.group.identity(), v, ladder)
}

/// Limit of `d_X(g exp(tv) H_X, g H_X) / |t|`: the norm at `g H_X` of the
/// left-translated direction.
pub fn finsler_limit_at(
    s: &Scenario,
    base: &GroupElement,
    v: &AlgebraVector,
    ladder: &StepLadder,
) -> Result<NormEstimate> {
    check_direction(s, v)?;
    s.group.validate(base)?;
    if v.is_zero() {
        return Ok(NormEstimate::exact(0.0, EstimateMethod::LimitLadder));
    }
    let here = translate_sample(s, base)?;
    limit_estimate(&direction_ladder(ladder, v), Sides::Both, EstimateMethod::LimitLadder, |t| {
        let moved = s.group.compose_unchecked(base, &s.group.exp_map(v, t)?);
        let there = translate_sample(s, &moved)?;
        Ok(hausdorff_points(&s.manifold, &there, &here, HausdorffMethod::Auto)? / t.abs())
    })
}

/// Maximum over the sample of the Riemannian norm of the Killing field,
/// projected onto the normal space when tangent bases are present.
pub fn finsler_sup_killing(s: &Scenario, v: &AlgebraVector) -> Result<NormEstimate> {
    check_direction(s, v)?;
    let m = &s.manifold;
    let norms: Vec<f64> = s
        .sample
        .points
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let k = s.group.killing_field(v, x)?;
            let mut comps = k.components;
            if let Some(bases) = &s.sample.tangent_basis {
                // Gram–Schmidt the provided basis, then remove its span.
                let mut ortho: Vec<Vec<f64>> = Vec::new();
                for u in &bases[i] {
                    let mut w = u.components.clone();
                    for e in &ortho {
                        let c = m.inner(x, &w, e);
                        w.iter_mut().zip(e).for_each(|(a, b)| *a -= c * b);
                    }
                    let n = m.inner(x, &w, &w).sqrt();
                    if n > DEGENERACY_TOL {
                        ortho.push(w.into_iter().map(|a| a / n).collect());
                    }
                }
                for e in &ortho {
                    let c = m.inner(x, &comps, e);
                    comps.iter_mut().zip(e).for_each(|(a, b)| *a -= c * b);
                }
            }
            Ok(m.norm_at(x, &comps))
        })
        .collect::<Result<_>>()?;
    let value = norms.iter().copied().fold(0.0, f64::max);
    let maximizers = norms
        .iter()
        .enumerate()
        .filter(|(_, n)| value - **n <= TIE_TOL)
        .map(|(i, _)| i)
        .collect();
    Ok(NormEstimate {
        maximizers,
        ..NormEstimate::exact(value, EstimateMethod::SupKilling)
    })
}

/// Limit of `max(sup_x d(X, exp(tv)x), sup_x d(X, exp(-tv)x)) / |t|`.
pub fn finsler_sup_continuous(
    s: &Scenario,
    v: &AlgebraVector,
    ladder: &StepLadder,
) -> Result<NormEstimate> {
    check_direction(s, v)?;
    if v.is_zero() {
        return Ok(NormEstimate::exact(0.0, EstimateMethod::SupContinuous));
    }
    let sup_at = |t: f64| -> Result<f64> {
        let g = s.group.exp_map(v, t)?;
        s.sample
            .points
            .par_iter()
            .map(|x| Ok(s.sample.distance_to_set(&s.manifold, &s.group.act(&g, x)?)))
            .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
    };
    limit_estimate(
        &direction_ladder(ladder, v),
        Sides::Forward,
        EstimateMethod::SupContinuous,
        |t| Ok(sup_at(t)?.max(sup_at(-t)?) / t),
    )
}

pub fn finsler_closed_form(s: &Scenario, v: &AlgebraVector) -> Result<Option<NormEstimate>> {
    check_direction(s, v)?;
    Ok(s.closed_form
        .as_ref()
        .map(|f| NormEstimate::exact(f.eval(v), EstimateMethod::ClosedForm)))
}

/// Which estimator feeds a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    Limit,
    SupKilling,
    SupContinuous,
    ClosedForm,
}

impl Estimator {
    pub fn evaluate(&self, s: &Scenario, v: &AlgebraVector, ladder: &StepLadder) -> Result<NormEstimate> {
        match self {
            Estimator::Limit => finsler_limit(s, v, ladder),
            Estimator::SupKilling => finsler_sup_killing(s, v),
            Estimator::SupContinuous => finsler_sup_continuous(s, v, ladder),
            Estimator::ClosedForm => finsler_closed_form(s, v)?
                .ok_or_else(|| Error::Config(format!("scenario {} has no closed form", s.name))),
        }
    }
}

/// Worst residuals of the norm axioms over random directions.
#[derive(Debug, Clone, PartialEq)]
pub struct NormAxiomReport {
    pub estimator: Estimator,
    pub trials: usize,
    pub zero_value: f64,
    pub symmetry: f64,
    pub homogeneity: f64,
    /// Largest `F(v + w) - F(v) - F(w)`, clamped at zero.
    pub triangle: f64,
    /// `(v, w, a)` at the worst triangle residual.
    pub worst_triangle: Option<(AlgebraVector, AlgebraVector)>,
    pub worst_homogeneity: Option<(AlgebraVector, f64)>,
}

impl NormAxiomReport {
    pub fn max_residual(&self) -> f64 {
        self.zero_value
            .max(self.symmetry)
            .max(self.homogeneity)
            .max(self.triangle)
    }
}

/// Homogeneity, symmetry, and triangle residuals of `F` over `trials` random
/// direction pairs drawn from the complement of `h_X`.
pub fn norm_axiom_check<R: Rng>(
    s: &Scenario,
    trials: usize,
    estimator: Estimator,
    ladder: &StepLadder,
    rng: &mut R,
) -> Result<NormAxiomReport> {
    let f = |v: &AlgebraVector| estimator.evaluate(s, v, ladder).map(|e| e.value);
    let zero = AlgebraVector::new(vec![0.0; s.algebra_dim()]);
    let mut report = NormAxiomReport {
        estimator,
        trials,
        zero_value: f(&zero)?.abs(),
        symmetry: 0.0,
        homogeneity: 0.0,
        triangle: 0.0,
        worst_triangle: None,
        worst_homogeneity: None,
    };
    let cases: Vec<(AlgebraVector, AlgebraVector, f64)> = (0..trials)
        .map(|_| {
            let v = s.random_direction(rng).scale(rng.gen_range(0.2..1.5));
            let w = s.random_direction(rng).scale(rng.gen_range(0.2..1.5));
            (v, w, rng.gen_range(-2.0..2.0))
        })
        .collect();
    for (v, w, a) in cases {
        let (fv, fw, fvw) = (f(&v)?, f(&w)?, f(&v.add(&w))?);
        let symmetry = (f(&v.scale(-1.0))? - fv).abs();
        let homogeneity = (f(&v.scale(a))? - a.abs() * fv).abs();
        let triangle = (fvw - fv - fw).max(0.0);
        report.symmetry = report.symmetry.max(symmetry);
        if homogeneity > report.homogeneity {
            report.homogeneity = homogeneity;
            report.worst_homogeneity = Some((v.clone(), a));
        }
        if triangle > report.triangle {
            report.triangle = triangle;
            report.worst_triangle = Some((v, w));
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantNormReport {
    pub trials: usize,
    /// Largest `|F_{gH_X}(dL_g v) - F_{H_X}(v)|` seen.
    pub max_residual: f64,
}

/// Compare the limit norm at random base points `g H_X` with the one at
/// `H_X`; `G`-invariance of `d_X` makes them equal.
pub fn invariant_norm_check<R: Rng>(
    s: &Scenario,
    trials: usize,
    ladder: &StepLadder,
    rng: &mut R,
) -> Result<InvariantNormReport> {
    let mut max_residual: f64 = 0.0;
    for _ in 0..trials {
        let g = s.random_element(rng);
        let v = s.random_direction(rng);
        let at_g = finsler_limit_at(s, &g, &v, ladder)?.value;
        let at_e = finsler_limit(s, &v, ladder)?.value;
        max_residual = max_residual.max((at_g - at_e).abs());
    }
    Ok(InvariantNormReport {
        trials,
        max_residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiinvariantReport {
    pub finsler: f64,
    /// `‖K_v‖`, constant over the group for a bi-invariant metric.
    pub killing_norm: f64,
    pub equality: bool,
    /// A sample point where `K_v` is normal to `X` within 1e-6 rad.
    pub normal_witness: Option<usize>,
    /// `F ≤ ‖v‖`, with equality exactly when a normal witness exists.
    pub consistent: bool,
}

/// For a group acting on itself with a bi-invariant metric: `F(v) ≤ ‖v‖`,
/// with equality iff `K_v(x)` is normal to `X` at some sample point.
pub fn biinvariant_bound_check(s: &Scenario, v: &AlgebraVector) -> Result<BiinvariantReport> {
    if !matches!(s.group, GroupModel::TranslationRn(_)) {
        return Err(Error::Incompatible {
            group: s.group.to_string(),
            manifold: "itself with a bi-invariant metric".into(),
        });
    }
    let m = &s.manifold;
    let killing_norms: Vec<f64> = s
        .sample
        .points
        .iter()
        .map(|x| Ok(m.norm_at(x, &s.group.killing_field(v, x)?.components)))
        .collect::<Result<_>>()?;
    let killing_norm = killing_norms[0];
    let finsler = finsler_sup_killing(s, v)?.value;

    let angle_tol: f64 = 1e-6;
    let normal_witness = s.sample.points.iter().enumerate().find_map(|(i, x)| {
        let k = s.group.killing_field(v, x).ok()?.components;
        let kn = m.norm_at(x, &k);
        let tangential = match &s.sample.tangent_basis {
            Some(b) => b[i]
                .iter()
                .map(|u| m.inner(x, &k, &u.components).powi(2))
                .sum::<f64>()
                .sqrt(),
            None => 0.0,
        };
        (kn > 0.0 && tangential <= angle_tol.sin() * kn).then_some(i)
    });
    let equality = (finsler - killing_norm).abs() <= 1e-9;
    let consistent = finsler <= killing_norm + 1e-9 && equality == normal_witness.is_some();
    Ok(BiinvariantReport {
        finsler,
        killing_norm,
        equality,
        normal_witness,
        consistent,
    })
}

/// All estimators at one direction, with the gap bound used for agreement.
#[derive(Debug, Clone, PartialEq)]
pub struct Agreement {
    pub direction: AlgebraVector,
    pub limit: NormEstimate,
    pub sup_killing: NormEstimate,
    pub sup_continuous: NormEstimate,
    pub closed_form: Option<f64>,
    /// Largest pairwise gap between the three estimators.
    pub estimator_gap: f64,
    /// Same, including the closed form when present.
    pub max_pairwise_gap: f64,
    /// `max(1e-3, 3 × summed error estimates)`.
    pub bound: f64,
}

impl Agreement {
    pub fn passed(&self) -> bool {
        self.estimator_gap <= self.bound && self.max_pairwise_gap <= self.bound
    }
}

fn max_gap(values: &[f64]) -> f64 {
    let mut gap: f64 = 0.0;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            gap = gap.max((a - b).abs());
        }
    }
    gap
}

pub fn estimator_agreement(s: &Scenario, v: &AlgebraVector, ladder: &StepLadder) -> Result<Agreement> {
    let limit = finsler_limit(s, v, ladder)?;
    let sup_killing = finsler_sup_killing(s, v)?;
    let sup_continuous = finsler_sup_continuous(s, v, ladder)?;
    let closed_form = finsler_closed_form(s, v)?.map(|e| e.value);
    let three = [limit.value, sup_killing.value, sup_continuous.value];
    let estimator_gap = max_gap(&three);
    let mut all = three.to_vec();
    all.extend(closed_form);
    let combined = limit.error_estimate + sup_killing.error_estimate + sup_continuous.error_estimate;
    Ok(Agreement {
        direction: v.clone(),
        estimator_gap,
        max_pairwise_gap: max_gap(&all),
        bound: (3.0 * combined).max(1e-3),
        limit,
        sup_killing,
        sup_continuous,
        closed_form,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_hyperbolic_two_points, build_rn_translation, build_torus_minus_square};
    use crate::geometry::{AmbientPoint, ModelManifold, TangentVector};
    use crate::hausdorff::CompactSample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn v(c: &[f64]) -> AlgebraVector {
        AlgebraVector::new(c.to_vec())
    }

    #[test]
    fn rn_norm_is_euclidean() {
        let s = build_rn_translation(2, &[vec![0.0, 0.0], vec![1.0, 3.0]]).unwrap();
        let lim = finsler_limit(&s, &v(&[3.0, 4.0]), &s.ladder).unwrap();
        assert!((lim.value - 5.0).abs() < 1e-9, "{lim:?}");
        assert!((finsler_sup_killing(&s, &v(&[3.0, 4.0])).unwrap().value - 5.0).abs() < 1e-12);
        let cont = finsler_sup_continuous(&s, &v(&[3.0, 4.0]), &s.ladder).unwrap();
        assert!((cont.value - 5.0).abs() < 1e-9, "{cont:?}");
    }

    #[test]
    fn zero_direction_is_zero_everywhere() {
        let s = build_hyperbolic_two_points(1.0, 1.0).unwrap();
        let z = v(&[0.0, 0.0]);
        assert_eq!(finsler_limit(&s, &z, &s.ladder).unwrap().value, 0.0);
        assert_eq!(finsler_sup_killing(&s, &z).unwrap().value, 0.0);
        assert_eq!(finsler_sup_continuous(&s, &z, &s.ladder).unwrap().value, 0.0);
    }

    #[test]
    fn hyperbolic_vertical_direction() {
        let s = build_hyperbolic_two_points(1.0, 1.0).unwrap();
        let d = v(&[FRAC_PI_2.cos(), FRAC_PI_2.sin()]);
        let lim = finsler_limit(&s, &d, &s.ladder).unwrap();
        assert!((lim.value - 2f64.sqrt()).abs() < 1e-3 * 2f64.sqrt(), "{lim:?}");
        let k = finsler_sup_killing(&s, &d).unwrap();
        assert!((k.value - 2f64.sqrt()).abs() < 1e-12);
        // both points move equally fast: a tie
        assert_eq!(k.maximizers, vec![0, 1]);
    }

    #[test]
    fn killing_sup_matches_closed_form_sweep() {
        for (a, b) in [(1.0, 1.0), (1.0, 2.0), (0.3, 1.7)] {
            let s = build_hyperbolic_two_points(a, b).unwrap();
            for i in 0..64 {
                let th = 2.0 * PI * i as f64 / 64.0;
                let d = v(&[th.cos(), th.sin()]);
                let k = finsler_sup_killing(&s, &d).unwrap().value;
                let f = s.closed_form.as_ref().unwrap().eval(&d);
                assert!((k - f).abs() <= 1e-12 * f, "a={a} b={b} θ={th}: {k} vs {f}");
            }
        }
    }

    #[test]
    fn torus_boundary_normal_projection() {
        let s = build_torus_minus_square(32).unwrap();
        let k = finsler_sup_killing(&s, &v(&[1.0, 0.0])).unwrap();
        assert!((k.value - 1.0).abs() < 1e-12);
        // attained on the vertical edges only
        for &i in &k.maximizers {
            let x = s.sample.points[i].coords[0];
            assert!(x == 0.25 || x == 0.75, "{:?}", s.sample.points[i]);
        }
        let k = finsler_sup_killing(&s, &v(&[1.0, 1.0])).unwrap();
        assert!((k.value - 1.0).abs() < 1e-12);
        let c = finsler_sup_continuous(&s, &v(&[1.0, 1.0]), &s.ladder).unwrap();
        assert!((c.value - 1.0).abs() < 1e-2, "{c:?}");
    }

    #[test]
    fn limit_at_identity_base_matches_plain_limit() {
        let s = build_hyperbolic_two_points(1.0, 1.0).unwrap();
        let d = v(&[0.3, -0.4]);
        let a = finsler_limit(&s, &d, &s.ladder).unwrap();
        let b = finsler_limit_at(&s, &s.group.identity(), &d, &s.ladder).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invariant_norm_on_hyperbolic_and_torus() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = build_hyperbolic_two_points(1.0, 1.0).unwrap();
        let r = invariant_norm_check(&s, 20, &s.ladder, &mut rng).unwrap();
        assert!(r.max_residual <= 1e-8, "{r:?}");
        let s = build_torus_minus_square(32).unwrap();
        let r = invariant_norm_check(&s, 5, &s.ladder, &mut rng).unwrap();
        assert!(r.max_residual <= 1e-8, "{r:?}");
    }

    #[test]
    fn norm_axioms_of_killing_sup() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = build_hyperbolic_two_points(1.0, 1.0).unwrap();
        let r = norm_axiom_check(&s, 200, Estimator::SupKilling, &s.ladder, &mut rng).unwrap();
        assert_eq!(r.zero_value, 0.0);
        assert!(r.max_residual() <= 1e-9, "{r:?}");
    }

    fn plane_sample(points: Vec<[f64; 2]>, tangents: Vec<[f64; 2]>) -> Scenario {
        let m = ModelManifold::Euclidean(2);
        let pts: Vec<AmbientPoint> = points.into_iter().map(AmbientPoint::from).collect();
        let bases = pts
            .iter()
            .zip(tangents)
            .map(|(p, t)| vec![TangentVector::new(p.clone(), t.to_vec())])
            .collect();
        let sample = CompactSample::finite(pts).unwrap().with_tangent_basis(&m, bases).unwrap();
        Scenario::new("plane", m, GroupModel::TranslationRn(2), sample).unwrap()
    }

    #[test]
    fn biinvariant_segment() {
        let pts = (0..=10).map(|i| [i as f64 / 10.0, 0.0]).collect();
        let s = plane_sample(pts, vec![[1.0, 0.0]; 11]);
        let normal = biinvariant_bound_check(&s, &v(&[0.0, 1.0])).unwrap();
        assert!(normal.equality && normal.consistent && normal.normal_witness.is_some());
        assert_eq!(normal.finsler, 1.0);
        let along = biinvariant_bound_check(&s, &v(&[1.0, 0.0])).unwrap();
        assert!(!along.equality && along.consistent && along.normal_witness.is_none());
        assert_eq!(along.finsler, 0.0);
    }

    #[test]
    fn biinvariant_circle() {
        let n = 360;
        let angles: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
        let pts = angles.iter().map(|a| [a.cos(), a.sin()]).collect();
        let tans = angles.iter().map(|a| [-a.sin(), a.cos()]).collect();
        let s = plane_sample(pts, tans);
        let r = biinvariant_bound_check(&s, &v(&[1.0, 0.0])).unwrap();
        // max |<e1, radial>| over the circle is 1, at (±1, 0)
        assert!(r.equality && r.consistent, "{r:?}");
        let x = s.sample.points[r.normal_witness.unwrap()].coords[0];
        assert!((x.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn biinvariant_rejects_non_translation_groups() {
        let s = build_hyperbolic_two_points(1.0, 1.0).unwrap();
        assert!(biinvariant_bound_check(&s, &v(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn direction_dimension_is_checked() {
        let s = build_hyperbolic_two_points(1.0, 1.0).unwrap();
        assert!(matches!(
            finsler_sup_killing(&s, &v(&[1.0])),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }
}
