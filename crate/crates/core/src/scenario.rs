//! The bundle `(G, M, d, X, φ)` every estimator works on.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{EstimateMethod, ModelManifold, StepLadder};
use crate::group::{AlgebraVector, GroupElement, GroupModel};
use crate::hausdorff::CompactSample;

/// Analytic Finsler norm `F(v + h_X)` known for a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedForm {
    EuclideanNorm,
    MaxNorm,
    /// Two points `(±a, b)` in the half-plane under the affine group.
    HyperbolicTwoPoints { a: f64, b: f64 },
    /// Geodesic cap centred at the unit direction `center` on a sphere of
    /// radius `radius`: `F(ω) = radius · |ω × center|`.
    SphereCap { center: [f64; 3], radius: f64 },
    /// Single point under the linear flow of the given slope.
    LineFlow { slope: f64 },
}

impl ClosedForm {
    pub fn eval(&self, v: &AlgebraVector) -> f64 {
        let c = &v.components;
        match self {
            ClosedForm::EuclideanNorm => v.norm(),
            ClosedForm::MaxNorm => c.iter().fold(0.0, |m, x| m.max(x.abs())),
            ClosedForm::HyperbolicTwoPoints { a, b } => {
                // |v|^2 (±a sin 2θ + cos²θ + (a²+b²) sin²θ) with v = |v|(cos θ, sin θ);
                // the sign follows sin 2θ.
                let (alpha, beta) = (c[0], c[1]);
                let sin2 = 2.0 * alpha * beta;
                let cross = if sin2 > 0.0 { a * sin2 } else { -a * sin2 };
                (cross + alpha * alpha + (a * a + b * b) * beta * beta).sqrt() / b
            }
            ClosedForm::SphereCap { center, radius } => {
                let w = [
                    c[1] * center[2] - c[2] * center[1],
                    c[2] * center[0] - c[0] * center[2],
                    c[0] * center[1] - c[1] * center[0],
                ];
                radius * (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt()
            }
            ClosedForm::LineFlow { slope } => c[0].abs() * (1.0 + slope * slope).sqrt(),
        }
    }
}

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Stated in the worked example the scenario reproduces.
    WorkedExample,
    /// Computed by an independent oracle.
    Derived,
    /// Immediate from the definitions.
    Trivial,
}

/// What an expected-table row measures.
#[derive(Debug, Clone, PartialEq)]
pub enum ExpectedCheck {
    InducedMetric { from: GroupElement, to: GroupElement },
    Finsler { v: AlgebraVector, method: EstimateMethod },
    /// 1 if some `t` on the grid `start, start+step, ..` below `end` has
    /// `d_X(t, 0) < radius`, else 0.
    ReturnWithin { start: f64, end: f64, step: f64, radius: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedRow {
    pub label: String,
    pub check: ExpectedCheck,
    pub value: f64,
    pub tolerance: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub manifold: ModelManifold,
    pub group: GroupModel,
    pub sample: CompactSample,
    pub closed_form: Option<ClosedForm>,
    /// Ladder suited to the scale on which the sampled metric is accurate.
    pub ladder: StepLadder,
    /// Basis of the isotropy algebra `h_X` (empty when trivial).
    pub isotropy: Vec<AlgebraVector>,
    pub expected: Vec<ExpectedRow>,
}

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        manifold: ModelManifold,
        group: GroupModel,
        sample: CompactSample,
    ) -> Result<Self> {
        if !group.acts_on(&manifold) {
            return Err(Error::Incompatible {
                group: group.to_string(),
                manifold: manifold.to_string(),
            });
        }
        sample.validate_on(&manifold)?;
        Ok(Self {
            name: name.into(),
            manifold,
            group,
            sample,
            closed_form: None,
            ladder: StepLadder::default(),
            isotropy: Vec::new(),
            expected: Vec::new(),
        })
    }

    pub fn with_closed_form(mut self, f: ClosedForm) -> Self {
        self.closed_form = Some(f);
        self
    }

    pub fn with_ladder(mut self, ladder: StepLadder) -> Self {
        self.ladder = ladder;
        self
    }

    pub fn with_isotropy(mut self, basis: Vec<AlgebraVector>) -> Self {
        self.isotropy = basis;
        self
    }

    pub fn algebra_dim(&self) -> usize {
        self.group.algebra_dim()
    }

    /// Orthonormal basis (coordinate inner product) of a complement of `h_X`.
    pub fn complement_basis(&self) -> Vec<AlgebraVector> {
        let n = self.algebra_dim();
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let mut iso: Vec<Vec<f64>> = Vec::new();
        for h in &self.isotropy {
            if let Some(u) = orthonormalize(&h.components, &iso) {
                iso.push(u);
            }
        }
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            let against: Vec<Vec<f64>> = iso.iter().chain(&basis).cloned().collect();
            if let Some(u) = orthonormalize(&e, &against) {
                basis.push(u);
            }
        }
        basis.into_iter().map(AlgebraVector::new).collect()
    }

    /// Uniformly random unit direction in the complement of `h_X`.
    pub fn random_direction<R: Rng>(&self, rng: &mut R) -> AlgebraVector {
        let basis = self.complement_basis();
        if basis.len() == 1 {
            let s = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            return basis[0].scale(s);
        }
        loop {
            let coeffs: Vec<f64> = basis.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
            if r > 1e-3 && r <= 1.0 {
                let mut v = AlgebraVector::new(vec![0.0; self.algebra_dim()]);
                for (c, b) in coeffs.iter().zip(&basis) {
                    v = v.add(&b.scale(c / r));
                }
                return v;
            }
        }
    }

    /// Direction at angle `theta` in the plane of the first two complement
    /// basis vectors (`cos θ` times the only one for one-dimensional algebras).
    pub fn sweep_direction(&self, theta: f64) -> AlgebraVector {
        let basis = self.complement_basis();
        match basis.len() {
            0 => AlgebraVector::new(vec![0.0; self.algebra_dim()]),
            1 => basis[0].scale(theta.cos()),
            _ => basis[0].scale(theta.cos()).add(&basis[1].scale(theta.sin())),
        }
    }

    /// Random group element with a spread suited to metric-axiom checks.
    pub fn random_element<R: Rng>(&self, rng: &mut R) -> GroupElement {
        match self.group {
            GroupModel::TranslationRn(n) => {
                GroupElement::new((0..n).map(|_| rng.gen_range(-2.0..2.0)).collect::<Vec<_>>())
            }
            GroupModel::TranslationTorus2 => GroupElement::new(vec![rng.gen(), rng.gen()]),
            GroupModel::HyperbolicAffine => {
                GroupElement::new(vec![rng.gen_range(-2.0..2.0), rng.gen_range(-1.0f64..1.0).exp()])
            }
            GroupModel::Rotation3 => {
                let v = AlgebraVector::new(
                    (0..3).map(|_| rng.gen_range(-1.2..1.2)).collect::<Vec<_>>(),
                );
                self.group.exp_map(&v, 1.0).expect("valid algebra vector")
            }
            GroupModel::LineFlow { .. } => GroupElement::new(vec![rng.gen_range(-5.0..5.0)]),
        }
    }
}

fn orthonormalize(v: &[f64], against: &[Vec<f64>]) -> Option<Vec<f64>> {
    let mut u = v.to_vec();
    for b in against {
        let d: f64 = u.iter().zip(b).map(|(x, y)| x * y).sum();
        u.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
    }
    let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > 1e-10).then(|| u.into_iter().map(|x| x / n).collect())
}
