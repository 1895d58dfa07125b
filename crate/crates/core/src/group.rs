//! Concrete Lie groups in global coordinates and their isometric actions on
//! the model manifolds.

use std::fmt;

use nalgebra::{Matrix3, Rotation3, Vector3};

use crate::error::{Error, Result};
use crate::geometry::manifold::sphere_embed;
use crate::geometry::{extrapolate, wrap_centered, wrap_unit, AmbientPoint, ModelManifold, StepLadder, TangentVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroupModel {
    /// `(R^n, +)` acting on Euclidean space by translation.
    TranslationRn(usize),
    /// Translations of the flat torus; elements are kept modulo 1.
    TranslationTorus2,
    /// `R ⋊ R^+` with product `(g1,g2)(h1,h2) = (g2 h1 + g1, g2 h2)`, acting on
    /// the half-plane by `(x,y) ↦ g2 (x,y) + (g1,0)`.
    HyperbolicAffine,
    /// `SO(3)` acting on the sphere; elements are row-major 3x3 matrices.
    Rotation3,
    /// `(R, +)` acting on the flat torus by the linear flow of the given slope.
    LineFlow { slope: f64 },
}

impl fmt::Display for GroupModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupModel::TranslationRn(n) => write!(f, "translation-r{n}"),
            GroupModel::TranslationTorus2 => write!(f, "translation-torus"),
            GroupModel::HyperbolicAffine => write!(f, "hyperbolic-affine"),
            GroupModel::Rotation3 => write!(f, "rotation3"),
            GroupModel::LineFlow { slope } => write!(f, "line-flow(slope={slope})"),
        }
    }
}

/// Group element in global coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub params: Vec<f64>,
}

impl GroupElement {
    pub fn new(params: impl Into<Vec<f64>>) -> Self {
        Self {
            params: params.into(),
        }
    }

    fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_row_slice(&self.params)
    }

    fn from_matrix(m: &Matrix3<f64>) -> Self {
        // nalgebra is column-major; the transpose's column-major storage is
        // the row-major storage of `m`.
        Self::new(m.transpose().as_slice().to_vec())
    }
}

/// Lie algebra vector in the coordinate basis at the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraVector {
    pub components: Vec<f64>,
}

impl AlgebraVector {
    pub fn new(components: impl Into<Vec<f64>>) -> Self {
        Self {
            components: components.into(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.components.iter().map(|c| c * s).collect::<Vec<_>>())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect::<Vec<_>>(),
        )
    }

    pub fn norm(&self) -> f64 {
        self.components.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| *c == 0.0)
    }
}

impl<const N: usize> From<[f64; N]> for AlgebraVector {
    fn from(c: [f64; N]) -> Self {
        Self::new(c.to_vec())
    }
}

const ROTATION_TOL: f64 = 1e-10;

/// Rotation vector of `m`, accurate near the identity where the arccos of
/// the trace loses half the digits.
fn rotation_log(m: &Matrix3<f64>) -> Vector3<f64> {
    let w = Vector3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)]) * 0.5;
    let sin = w.norm();
    let cos = 0.5 * (m.trace() - 1.0);
    if cos < -0.9 {
        // near a half turn the skew part vanishes; fall back to nalgebra
        return Rotation3::from_matrix_unchecked(*m).scaled_axis();
    }
    let angle = sin.atan2(cos);
    if sin < 1e-12 {
        w * (1.0 + angle * angle / 6.0)
    } else {
        w * (angle / sin)
    }
}

impl GroupModel {
    pub fn algebra_dim(&self) -> usize {
        match self {
            GroupModel::TranslationRn(n) => *n,
            GroupModel::TranslationTorus2 | GroupModel::HyperbolicAffine => 2,
            GroupModel::Rotation3 => 3,
            GroupModel::LineFlow { .. } => 1,
        }
    }

    pub fn param_dim(&self) -> usize {
        match self {
            GroupModel::Rotation3 => 9,
            other => other.algebra_dim(),
        }
    }

    pub fn acts_on(&self, m: &ModelManifold) -> bool {
        matches!(
            (self, m),
            (GroupModel::TranslationRn(a), ModelManifold::Euclidean(b)) if a == b
        ) || matches!(
            (self, m),
            (GroupModel::TranslationTorus2, ModelManifold::FlatTorus2)
                | (GroupModel::LineFlow { .. }, ModelManifold::FlatTorus2)
                | (GroupModel::HyperbolicAffine, ModelManifold::HyperbolicHalfPlane)
                | (GroupModel::Rotation3, ModelManifold::Sphere2 { .. })
        )
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            GroupModel::HyperbolicAffine => GroupElement::new(vec![0.0, 1.0]),
            GroupModel::Rotation3 => GroupElement::from_matrix(&Matrix3::identity()),
            other => GroupElement::new(vec![0.0; other.param_dim()]),
        }
    }

    /// Build a validated element; torus translations are reduced modulo 1.
    pub fn element(&self, params: impl Into<Vec<f64>>) -> Result<GroupElement> {
        let mut g = GroupElement::new(params);
        if matches!(self, GroupModel::TranslationTorus2) {
            g.params.iter_mut().for_each(|c| *c = wrap_unit(*c));
        }
        self.validate(&g)?;
        Ok(g)
    }

    pub fn validate(&self, g: &GroupElement) -> Result<()> {
        if g.params.len() != self.param_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.param_dim(),
                got: g.params.len(),
            });
        }
        if g.params.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidElement(format!("non-finite parameters {:?}", g.params)));
        }
        match self {
            GroupModel::HyperbolicAffine if g.params[1] <= 0.0 => Err(Error::InvalidElement(
                format!("affine element {:?} needs a positive dilation", g.params),
            )),
            GroupModel::TranslationTorus2 if g.params.iter().any(|c| !(0.0..1.0).contains(c)) => {
                Err(Error::InvalidElement(format!("torus translation {:?} not reduced", g.params)))
            }
            GroupModel::Rotation3 => {
                let m = g.matrix();
                let ortho = (m.transpose() * m - Matrix3::identity()).abs().max();
                let det = m.determinant();
                if ortho > ROTATION_TOL || (det - 1.0).abs() > ROTATION_TOL {
                    Err(Error::InvalidElement(format!(
                        "not a rotation (orthogonality defect {ortho:e}, det {det})"
                    )))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    fn check_algebra(&self, v: &AlgebraVector) -> Result<()> {
        if v.components.len() != self.algebra_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.algebra_dim(),
                got: v.components.len(),
            });
        }
        Ok(())
    }

    pub fn compose(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        self.validate(g)?;
        self.validate(h)?;
        Ok(self.compose_unchecked(g, h))
    }

    pub(crate) fn compose_unchecked(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        let (a, b) = (&g.params, &h.params);
        match self {
            GroupModel::TranslationRn(_) | GroupModel::LineFlow { .. } => {
                GroupElement::new(a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<_>>())
            }
            GroupModel::TranslationTorus2 => GroupElement::new(
                a.iter().zip(b).map(|(x, y)| wrap_unit(x + y)).collect::<Vec<_>>(),
            ),
            GroupModel::HyperbolicAffine => GroupElement::new(vec![a[1] * b[0] + a[0], a[1] * b[1]]),
            GroupModel::Rotation3 => GroupElement::from_matrix(&(g.matrix() * h.matrix())),
        }
    }

    pub fn inverse(&self, g: &GroupElement) -> Result<GroupElement> {
        self.validate(g)?;
        Ok(self.inverse_unchecked(g))
    }

    pub(crate) fn inverse_unchecked(&self, g: &GroupElement) -> GroupElement {
        let a = &g.params;
        match self {
            GroupModel::TranslationRn(_) | GroupModel::LineFlow { .. } => {
                GroupElement::new(a.iter().map(|x| -x).collect::<Vec<_>>())
            }
            GroupModel::TranslationTorus2 => {
                GroupElement::new(a.iter().map(|x| wrap_unit(-x)).collect::<Vec<_>>())
            }
            GroupModel::HyperbolicAffine => GroupElement::new(vec![-a[0] / a[1], 1.0 / a[1]]),
            GroupModel::Rotation3 => GroupElement::from_matrix(&g.matrix().transpose()),
        }
    }

    /// `exp(t v)` in group coordinates.
    pub fn exp_map(&self, v: &AlgebraVector, t: f64) -> Result<GroupElement> {
        self.check_algebra(v)?;
        let c = &v.components;
        Ok(match self {
            GroupModel::TranslationRn(_) | GroupModel::LineFlow { .. } => {
                GroupElement::new(c.iter().map(|x| t * x).collect::<Vec<_>>())
            }
            GroupModel::TranslationTorus2 => {
                GroupElement::new(c.iter().map(|x| wrap_unit(t * x)).collect::<Vec<_>>())
            }
            GroupModel::HyperbolicAffine => {
                let (alpha, beta) = (c[0], c[1]);
                let x = t * beta;
                // (alpha/beta)(e^{t beta} - 1) = alpha t (e^x - 1)/x
                let translation = if x.abs() < 1e-6 {
                    alpha * t * (1.0 + x / 2.0 + x * x / 6.0)
                } else {
                    alpha / beta * x.exp_m1()
                };
                GroupElement::new(vec![translation, x.exp()])
            }
            GroupModel::Rotation3 => {
                let axis = Vector3::new(c[0], c[1], c[2]) * t;
                GroupElement::from_matrix(Rotation3::new(axis).matrix())
            }
        })
    }

    /// Principal logarithm: the algebra vector `v` with `exp(v) = g`.
    /// Torus translations use the representative in `[-1/2, 1/2)^2`.
    pub fn log(&self, g: &GroupElement) -> Result<AlgebraVector> {
        self.validate(g)?;
        let a = &g.params;
        Ok(match self {
            GroupModel::TranslationRn(_) | GroupModel::LineFlow { .. } => AlgebraVector::new(a.clone()),
            GroupModel::TranslationTorus2 => {
                AlgebraVector::new(a.iter().map(|x| wrap_centered(*x)).collect::<Vec<_>>())
            }
            GroupModel::HyperbolicAffine => {
                let beta = a[1].ln();
                let alpha = if beta.abs() < 1e-6 {
                    a[0] / (1.0 + beta / 2.0 + beta * beta / 6.0)
                } else {
                    a[0] * beta / beta.exp_m1()
                };
                AlgebraVector::new(vec![alpha, beta])
            }
            GroupModel::Rotation3 => AlgebraVector::new(rotation_log(&g.matrix()).as_slice().to_vec()),
        })
    }

    /// Point `g · p`.
    pub fn act(&self, g: &GroupElement, p: &AmbientPoint) -> Result<AmbientPoint> {
        let a = &g.params;
        let x = &p.coords;
        Ok(match self {
            GroupModel::TranslationRn(_) => {
                AmbientPoint::new(x.iter().zip(a).map(|(p, g)| p + g).collect::<Vec<_>>())
            }
            GroupModel::TranslationTorus2 => AmbientPoint::new(vec![
                wrap_unit(x[0] + a[0]),
                wrap_unit(x[1] + a[1]),
            ]),
            GroupModel::LineFlow { slope } => AmbientPoint::new(vec![
                wrap_unit(x[0] + a[0]),
                wrap_unit(x[1] + slope * a[0]),
            ]),
            GroupModel::HyperbolicAffine => {
                AmbientPoint::new(vec![a[1] * x[0] + a[0], a[1] * x[1]])
            }
            GroupModel::Rotation3 if *g == self.identity() => p.clone(),
            GroupModel::Rotation3 => {
                let n = g.matrix() * sphere_embed(x);
                // radius does not enter the chart map
                ModelManifold::Sphere2 { radius: 1.0 }.sphere_point(&n)?
            }
        })
    }

    /// Analytic Killing field `d/dt|₀ exp(t v) · p` in the chart frame.
    pub fn killing_field(&self, v: &AlgebraVector, p: &AmbientPoint) -> Result<TangentVector> {
        self.check_algebra(v)?;
        let c = &v.components;
        let x = &p.coords;
        let comps = match self {
            GroupModel::TranslationRn(_) | GroupModel::TranslationTorus2 => c.clone(),
            GroupModel::LineFlow { slope } => vec![c[0], slope * c[0]],
            GroupModel::HyperbolicAffine => vec![c[1] * x[0] + c[0], c[1] * x[1]],
            GroupModel::Rotation3 => {
                let n = sphere_embed(x);
                let w = Vector3::new(c[0], c[1], c[2]).cross(&n);
                ModelManifold::sphere_chart_push(&n, &w)
            }
        };
        Ok(TangentVector::new(p.clone(), comps))
    }

    /// Killing field by central differences `(exp(hv)p - exp(-hv)p) / 2h`,
    /// extrapolated over the default ladder. Needs only [`GroupModel::act`].
    pub fn killing_field_fd(
        &self,
        m: &ModelManifold,
        v: &AlgebraVector,
        p: &AmbientPoint,
    ) -> Result<TangentVector> {
        self.check_algebra(v)?;
        let ladder = StepLadder::default();
        let diffs = ladder
            .steps()
            .into_iter()
            .map(|h| {
                let plus = self.act(&self.exp_map(v, h)?, p)?;
                let minus = self.act(&self.exp_map(v, -h)?, p)?;
                let d = m.chart_difference(&minus, &plus);
                Ok(d.into_iter().map(|c| c / (2.0 * h)).collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>>>()?;
        let comps = (0..m.chart_dim())
            .map(|i| {
                let column: Vec<f64> = diffs.iter().map(|d| d[i]).collect();
                extrapolate(&ladder, &column, 2).map(|e| e.value)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TangentVector::new(p.clone(), comps))
    }

    /// Differential of `p ↦ g · p` applied to a chart vector, by central
    /// differences in the chart.
    pub fn pushforward_fd(
        &self,
        m: &ModelManifold,
        g: &GroupElement,
        v: &TangentVector,
    ) -> Result<TangentVector> {
        let image = self.act(g, &v.base)?;
        let ladder = StepLadder::default();
        let diffs = ladder
            .steps()
            .into_iter()
            .map(|h| {
                let plus = self.act(g, &m.chart_offset(&v.base, &v.components, h))?;
                let minus = self.act(g, &m.chart_offset(&v.base, &v.components, -h))?;
                let d = m.chart_difference(&minus, &plus);
                Ok(d.into_iter().map(|c| c / (2.0 * h)).collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>>>()?;
        let comps = (0..m.chart_dim())
            .map(|i| {
                let column: Vec<f64> = diffs.iter().map(|d| d[i]).collect();
                extrapolate(&ladder, &column, 2).map(|e| e.value)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TangentVector::new(image, comps))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{E, FRAC_PI_2};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    fn random_element(g: &GroupModel, rng: &mut ChaCha8Rng) -> GroupElement {
        match g {
            GroupModel::TranslationRn(n) => {
                GroupElement::new((0..*n).map(|_| rng.gen_range(-2.0..2.0)).collect::<Vec<_>>())
            }
            GroupModel::TranslationTorus2 => GroupElement::new(vec![rng.gen(), rng.gen()]),
            GroupModel::HyperbolicAffine => {
                GroupElement::new(vec![rng.gen_range(-2.0..2.0), rng.gen_range(-1.0f64..1.0).exp()])
            }
            GroupModel::Rotation3 => {
                let v = AlgebraVector::new(vec![
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                ]);
                g.exp_map(&v, 1.0).unwrap()
            }
            GroupModel::LineFlow { .. } => GroupElement::new(vec![rng.gen_range(-5.0..5.0)]),
        }
    }

    fn random_point(m: &ModelManifold, rng: &mut ChaCha8Rng) -> AmbientPoint {
        match m {
            ModelManifold::Euclidean(n) => {
                AmbientPoint::new((0..*n).map(|_| rng.gen_range(-3.0..3.0)).collect::<Vec<_>>())
            }
            ModelManifold::FlatTorus2 => AmbientPoint::new(vec![rng.gen(), rng.gen()]),
            ModelManifold::HyperbolicHalfPlane => {
                AmbientPoint::new(vec![rng.gen_range(-2.0..2.0), rng.gen_range(0.2..3.0)])
            }
            ModelManifold::Sphere2 { .. } => {
                AmbientPoint::new(vec![rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)])
            }
        }
    }

    fn cases() -> Vec<(GroupModel, ModelManifold)> {
        vec![
            (GroupModel::TranslationRn(2), ModelManifold::Euclidean(2)),
            (GroupModel::TranslationRn(3), ModelManifold::Euclidean(3)),
            (GroupModel::TranslationTorus2, ModelManifold::FlatTorus2),
            (GroupModel::HyperbolicAffine, ModelManifold::HyperbolicHalfPlane),
            (GroupModel::Rotation3, ModelManifold::Sphere2 { radius: 1.0 }),
            (GroupModel::LineFlow { slope: 2f64.sqrt() }, ModelManifold::FlatTorus2),
        ]
    }

    #[test]
    fn affine_product_and_inverse() {
        let g = GroupModel::HyperbolicAffine;
        let p = g.compose(&GroupElement::new(vec![1.0, 2.0]), &GroupElement::new(vec![3.0, 4.0])).unwrap();
        assert_eq!(p.params, vec![7.0, 8.0]);
        let inv = g.inverse(&GroupElement::new(vec![1.0, 2.0])).unwrap();
        assert_eq!(inv.params, vec![-0.5, 0.5]);
        assert!(g.validate(&GroupElement::new(vec![1.0, 0.0])).is_err());
    }

    #[test]
    fn translation_products() {
        let g = GroupModel::TranslationRn(2);
        let p = g.compose(&GroupElement::new(vec![1.0, 1.0]), &GroupElement::new(vec![2.0, 3.0])).unwrap();
        assert_eq!(p.params, vec![3.0, 4.0]);

        let t = GroupModel::TranslationTorus2;
        let inv = t.inverse(&t.element(vec![0.3, 0.4]).unwrap()).unwrap();
        assert!(close(&inv.params, &[0.7, 0.6], 1e-15));

        let f = GroupModel::LineFlow { slope: 2f64.sqrt() };
        assert_eq!(f.inverse(&GroupElement::new(vec![5.0])).unwrap().params, vec![-5.0]);
    }

    #[test]
    fn rotation_times_inverse_is_identity() {
        let g = GroupModel::Rotation3;
        let r = g.exp_map(&AlgebraVector::new(vec![0.3, -1.1, 0.7]), 1.0).unwrap();
        let id = g.compose(&r, &g.inverse(&r).unwrap()).unwrap();
        assert!(close(&id.params, &g.identity().params, 1e-12));
        let mut bad = r.clone();
        bad.params[0] += 1e-3;
        assert!(g.validate(&bad).is_err());
    }

    #[test]
    fn exponential_examples() {
        let g = GroupModel::TranslationRn(3);
        let e = g.exp_map(&AlgebraVector::new(vec![1.0, 0.0, 2.0]), 2.0).unwrap();
        assert_eq!(e.params, vec![2.0, 0.0, 4.0]);

        let h = GroupModel::HyperbolicAffine;
        let e = h.exp_map(&AlgebraVector::new(vec![1.0, 0.0]), 3.0).unwrap();
        assert_eq!(e.params, vec![3.0, 1.0]);
        let e = h.exp_map(&AlgebraVector::new(vec![0.0, 1.0]), 1.0).unwrap();
        assert!(close(&e.params, &[0.0, E], 1e-15));
    }

    /// Truncated power series of the 2x2 affine representation
    /// `[[β, α], [0, 0]]`, whose exponential is `[[g2, g1], [0, 1]]`.
    fn affine_series_exp(alpha: f64, beta: f64, t: f64) -> (f64, f64) {
        let a = [[t * beta, t * alpha], [0.0, 0.0]];
        let mut term = [[1.0, 0.0], [0.0, 1.0]];
        let mut sum = term;
        for k in 1..60 {
            let mut next = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    next[i][j] = (0..2).map(|l| term[i][l] * a[l][j]).sum::<f64>() / k as f64;
                }
            }
            term = next;
            for i in 0..2 {
                for j in 0..2 {
                    sum[i][j] += term[i][j];
                }
            }
        }
        (sum[0][1], sum[0][0])
    }

    #[test]
    fn affine_exponential_matches_matrix_series() {
        let h = GroupModel::HyperbolicAffine;
        for &(alpha, beta, t) in &[(0.0, 1.0, 1.0), (1.0, 2.0, 0.7), (-0.4, 1e-9, 2.0), (2.0, -0.5, 1.5), (1.0, 1e-7, 3.0)] {
            let (g1, g2) = affine_series_exp(alpha, beta, t);
            let e = h.exp_map(&AlgebraVector::new(vec![alpha, beta]), t).unwrap();
            assert!(close(&e.params, &[g1, g2], 1e-12), "{:?} vs {:?}", e.params, (g1, g2));
        }
    }

    #[test]
    fn logarithm_inverts_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (g, _) in cases() {
            for _ in 0..50 {
                let v = AlgebraVector::new(
                    (0..g.algebra_dim()).map(|_| rng.gen_range(-0.45..0.45)).collect::<Vec<_>>(),
                );
                let back = g.log(&g.exp_map(&v, 1.0).unwrap()).unwrap();
                assert!(close(&back.components, &v.components, 1e-12), "{g}");
            }
        }
    }

    #[test]
    fn actions_match_their_formulas() {
        let h = GroupModel::HyperbolicAffine;
        let p = h.act(&GroupElement::new(vec![1.0, 2.0]), &[3.0, 4.0].into()).unwrap();
        assert_eq!(p.coords, vec![7.0, 8.0]);

        let t = GroupModel::TranslationTorus2;
        let p = t.act(&t.element(vec![0.5, 0.5]).unwrap(), &[0.7, 0.9].into()).unwrap();
        assert!(close(&p.coords, &[0.2, 0.4], 1e-15));
    }

    #[test]
    fn quarter_turn_about_z_on_the_sphere() {
        let m = ModelManifold::Sphere2 { radius: 1.0 };
        let g = GroupModel::Rotation3;
        let r = g.exp_map(&AlgebraVector::new(vec![0.0, 0.0, 1.0]), FRAC_PI_2).unwrap();
        let p = m.sphere_point(&Vector3::new(1.0, 0.0, 0.0)).unwrap();
        let got = g.act(&r, &p).unwrap();
        // oracle: rotate in R^3, then project
        let expected = m.sphere_point(&Vector3::new(0.0, 1.0, 0.0)).unwrap();
        assert!(close(&got.coords, &expected.coords, 1e-14));
    }

    #[test]
    fn identity_acts_trivially_and_actions_compose() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (g, m) in cases() {
            for _ in 0..100 {
                let p = random_point(&m, &mut rng);
                assert_eq!(g.act(&g.identity(), &p).unwrap(), p, "{g}");
                let a = random_element(&g, &mut rng);
                let b = random_element(&g, &mut rng);
                let lhs = g.act(&g.compose(&a, &b).unwrap(), &p).unwrap();
                let rhs = g.act(&a, &g.act(&b, &p).unwrap()).unwrap();
                assert!(m.dist(&lhs, &rhs) <= 1e-10, "{g}");
                let id = g.compose(&a, &g.inverse(&a).unwrap()).unwrap();
                let diff = g.log(&id).unwrap().norm();
                assert!(diff <= 1e-12, "{g}: {diff}");
            }
        }
    }

    #[test]
    fn actions_are_isometries() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (g, m) in cases() {
            for _ in 0..200 {
                let a = random_element(&g, &mut rng);
                let p = random_point(&m, &mut rng);
                let q = random_point(&m, &mut rng);
                let before = m.dist(&p, &q);
                let after = m.dist(&g.act(&a, &p).unwrap(), &g.act(&a, &q).unwrap());
                assert!((before - after).abs() <= 1e-10, "{g}: {before} vs {after}");
            }
        }
    }

    #[test]
    fn one_parameter_subgroup_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (g, _) in cases() {
            for _ in 0..50 {
                let v = AlgebraVector::new(
                    (0..g.algebra_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>(),
                );
                let (s, t) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                let lhs = g.exp_map(&v, s + t).unwrap();
                let rhs = g.compose(&g.exp_map(&v, s).unwrap(), &g.exp_map(&v, t).unwrap()).unwrap();
                let gap = g.log(&g.compose(&g.inverse(&lhs).unwrap(), &rhs).unwrap()).unwrap().norm();
                assert!(gap <= 1e-10, "{g}: {gap}");
            }
        }
    }

    #[test]
    fn killing_field_examples() {
        let t = GroupModel::TranslationRn(2);
        let k = t.killing_field(&[1.0, 2.0].into(), &[5.0, -3.0].into()).unwrap();
        assert_eq!(k.components, vec![1.0, 2.0]);

        let h = GroupModel::HyperbolicAffine;
        for theta in [0.0, 0.4, 2.0, 4.5] {
            let (x, y) = (0.7, 1.3);
            let v = AlgebraVector::new(vec![f64::cos(theta), f64::sin(theta)]);
            let k = h.killing_field(&v, &[x, y].into()).unwrap();
            let expected = [x * theta.sin() + theta.cos(), y * theta.sin()];
            assert!(close(&k.components, &expected, 1e-15));
        }

        let f = GroupModel::LineFlow { slope: 2f64.sqrt() };
        let k = f.killing_field(&[1.0].into(), &[0.3, 0.9].into()).unwrap();
        assert_eq!(k.components, vec![1.0, 2f64.sqrt()]);
    }

    #[test]
    fn analytic_killing_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for (g, m) in cases() {
            for _ in 0..50 {
                let v = AlgebraVector::new(
                    (0..g.algebra_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>(),
                );
                let p = random_point(&m, &mut rng);
                let exact = g.killing_field(&v, &p).unwrap();
                let fd = g.killing_field_fd(&m, &v, &p).unwrap();
                assert!(close(&exact.components, &fd.components, 1e-6), "{g}: {exact:?} vs {fd:?}");
            }
        }
    }

    #[test]
    fn differential_preserves_norms() {
        // pointwise isometry agrees with distance-preserving isometry
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for (g, m) in cases() {
            for _ in 0..100 {
                let a = random_element(&g, &mut rng);
                let p = random_point(&m, &mut rng);
                let comps: Vec<f64> = (0..m.chart_dim()).map(|_| rng.gen_range(-0.1..0.1)).collect();
                let v = TangentVector::new(p, comps);
                let pushed = g.pushforward_fd(&m, &a, &v).unwrap();
                let before = m.riemannian_norm(&v).unwrap();
                let after = m.riemannian_norm(&pushed).unwrap();
                assert!((before - after).abs() <= 1e-6, "{g}: {before} vs {after}");
            }
        }
    }

    #[test]
    fn compatibility_table() {
        assert!(GroupModel::TranslationRn(2).acts_on(&ModelManifold::Euclidean(2)));
        assert!(!GroupModel::TranslationRn(2).acts_on(&ModelManifold::Euclidean(3)));
        assert!(!GroupModel::HyperbolicAffine.acts_on(&ModelManifold::FlatTorus2));
        assert!(GroupModel::Rotation3.acts_on(&ModelManifold::Sphere2 { radius: 2.0 }));
    }
}
