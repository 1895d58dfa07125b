//! Hausdorff distance between finite samples and the induced metric on
//! quotient representatives.

mod grid;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{AmbientPoint, ModelManifold, TangentVector};
use crate::group::GroupElement;
use crate::scenario::Scenario;

use grid::BucketIndex;
use std::sync::atomic::{AtomicU64, Ordering};

/// Exact description of the compact set when one is available, used for
/// point-to-set distances that must not see the sampling.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactSet {
    /// Only the sample is known; point-to-set distance scans the sample.
    Sampled,
    /// Flat torus minus the open square `(lo, hi)^2`.
    TorusMinusSquare { lo: f64, hi: f64 },
    /// Closed geodesic ball.
    GeodesicBall { center: AmbientPoint, radius: f64 },
}

/// Finite sample of a compact set `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactSample {
    pub points: Vec<AmbientPoint>,
    /// Largest distance from a point of the true set to its nearest sample.
    pub fill_radius: f64,
    /// Orthonormal bases of `T_x X` per sample point, when `X` has tangent data.
    pub tangent_basis: Option<Vec<Vec<TangentVector>>>,
    pub exact: ExactSet,
}

impl CompactSample {
    pub fn new(points: Vec<AmbientPoint>, fill_radius: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySample);
        }
        if !(fill_radius >= 0.0) {
            return Err(Error::Domain(format!("fill radius {fill_radius} must be nonnegative")));
        }
        Ok(Self {
            points,
            fill_radius,
            tangent_basis: None,
            exact: ExactSet::Sampled,
        })
    }

    /// Finite set: the sample is the set, so the fill radius is zero.
    pub fn finite(points: Vec<AmbientPoint>) -> Result<Self> {
        Self::new(points, 0.0)
    }

    pub fn with_exact(mut self, exact: ExactSet) -> Self {
        self.exact = exact;
        self
    }

    /// Attach tangent bases, checking orthonormality in the Riemannian metric.
    pub fn with_tangent_basis(
        mut self,
        m: &ModelManifold,
        bases: Vec<Vec<TangentVector>>,
    ) -> Result<Self> {
        if bases.len() != self.points.len() {
            return Err(Error::DimensionMismatch {
                expected: self.points.len(),
                got: bases.len(),
            });
        }
        for (p, basis) in self.points.iter().zip(&bases) {
            for (i, u) in basis.iter().enumerate() {
                m.validate_tangent(u)?;
                if u.base != *p {
                    return Err(Error::Domain("tangent vector based away from its sample point".into()));
                }
                for (j, w) in basis.iter().enumerate().skip(i) {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    let ip = m.inner(p, &u.components, &w.components);
                    if (ip - expected).abs() > 1e-8 {
                        return Err(Error::Domain(format!(
                            "tangent basis at {:?} is not orthonormal (inner product {ip})",
                            p.coords
                        )));
                    }
                }
            }
        }
        self.tangent_basis = Some(bases);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn validate_on(&self, m: &ModelManifold) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::EmptySample);
        }
        self.points.iter().try_for_each(|p| m.validate(p))
    }

    /// Distance from `y` to the set: exact when the set's shape is known,
    /// otherwise the distance to the nearest sample point.
    pub fn distance_to_set(&self, m: &ModelManifold, y: &AmbientPoint) -> f64 {
        match &self.exact {
            ExactSet::Sampled => self
                .points
                .iter()
                .map(|p| m.dist(p, y))
                .fold(f64::INFINITY, f64::min),
            ExactSet::TorusMinusSquare { lo, hi } => {
                let (x, z) = (y.coords[0], y.coords[1]);
                if x > *lo && x < *hi && z > *lo && z < *hi {
                    (x - lo).min(hi - x).min(z - lo).min(hi - z)
                } else {
                    0.0
                }
            }
            ExactSet::GeodesicBall { center, radius } => (m.dist(center, y) - radius).max(0.0),
        }
    }
}

/// Strategy for the nearest-point scans behind a Hausdorff distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HausdorffMethod {
    /// Exhaustive O(|A|·|B|) scan; the reference path.
    BruteForce,
    /// Uniform bucket grid on Euclidean (dim ≤ 3), torus, and sphere charts.
    Bucketed,
    /// Bucketed when supported and the scan is large, brute force otherwise.
    Auto,
}

const AUTO_THRESHOLD: usize = 4096;

/// `max_{a ∈ from} min_{b ∈ to} d(a, b)`.
pub fn directed_hausdorff(
    m: &ModelManifold,
    from: &[AmbientPoint],
    to: &[AmbientPoint],
    method: HausdorffMethod,
) -> Result<f64> {
    if from.is_empty() || to.is_empty() {
        return Err(Error::EmptySample);
    }
    let bucketed = match method {
        HausdorffMethod::BruteForce => false,
        HausdorffMethod::Bucketed => {
            if !grid::supports(m) {
                return Err(Error::Domain(format!("no bucket index for {m}")));
            }
            true
        }
        HausdorffMethod::Auto => grid::supports(m) && from.len() * to.len() > AUTO_THRESHOLD,
    };
    let worst = if bucketed {
        let index = BucketIndex::build(m, to);
        let worst = AtomicU64::new(0f64.to_bits());
        from.par_iter().for_each(|a| {
            let q = grid::embed(m, a);
            let bound = f64::from_bits(worst.load(Ordering::Relaxed));
            // a point this close cannot raise the maximum; the margin keeps
            // rounding from pruning the maximizer
            if index.any_within(&q, grid::embedded_radius(m, bound) * (1.0 - 1e-9)) {
                return;
            }
            let d = m.dist(a, &to[index.nearest(&q)]) + 0.0;
            // bit order matches numeric order for non-negative floats
            worst.fetch_max(d.to_bits(), Ordering::Relaxed);
        });
        f64::from_bits(worst.into_inner())
    } else {
        from.par_iter()
            .map(|a| to.iter().map(|b| m.dist(a, b)).fold(f64::INFINITY, f64::min))
            .reduce(|| 0.0, f64::max)
    };
    Ok(worst)
}

/// Hausdorff distance between two point lists.
pub fn hausdorff_points(
    m: &ModelManifold,
    a: &[AmbientPoint],
    b: &[AmbientPoint],
    method: HausdorffMethod,
) -> Result<f64> {
    a.iter().chain(b).try_for_each(|p| m.validate(p))?;
    let ab = directed_hausdorff(m, a, b, method)?;
    let ba = directed_hausdorff(m, b, a, method)?;
    Ok(ab.max(ba))
}

/// Hausdorff distance between two samples.
pub fn hausdorff_distance(m: &ModelManifold, a: &CompactSample, b: &CompactSample) -> Result<f64> {
    hausdorff_points(m, &a.points, &b.points, HausdorffMethod::Auto)
}

/// A coset `g H_X`, handled through one representative.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientPoint {
    pub rep: GroupElement,
}

impl QuotientPoint {
    pub fn new(rep: GroupElement) -> Self {
        Self { rep }
    }
}

impl From<GroupElement> for QuotientPoint {
    fn from(rep: GroupElement) -> Self {
        Self { rep }
    }
}

/// Image `g · X` of the scenario's sample.
pub fn translate_sample(s: &Scenario, g: &GroupElement) -> Result<Vec<AmbientPoint>> {
    s.group.validate(g)?;
    s.sample
        .points
        .par_iter()
        .map(|p| s.group.act(g, p))
        .collect()
}

/// Induced Hausdorff metric `d_X(g1 H_X, g2 H_X) = d_H(g1 X, g2 X)`.
pub fn induced_metric(s: &Scenario, g1: &QuotientPoint, g2: &QuotientPoint) -> Result<f64> {
    induced_metric_with(s, g1, g2, HausdorffMethod::Auto)
}

pub fn induced_metric_with(
    s: &Scenario,
    g1: &QuotientPoint,
    g2: &QuotientPoint,
    method: HausdorffMethod,
) -> Result<f64> {
    let a = translate_sample(s, &g1.rep)?;
    let b = translate_sample(s, &g2.rep)?;
    hausdorff_points(&s.manifold, &a, &b, method)
}

/// `|d_X(a g, a h) - d_X(g, h)|`.
pub fn invariance_check(
    s: &Scenario,
    a: &QuotientPoint,
    g: &QuotientPoint,
    h: &QuotientPoint,
) -> Result<f64> {
    let ag = QuotientPoint::new(s.group.compose(&a.rep, &g.rep)?);
    let ah = QuotientPoint::new(s.group.compose(&a.rep, &h.rep)?);
    Ok((induced_metric(s, &ag, &ah)? - induced_metric(s, g, h)?).abs())
}
