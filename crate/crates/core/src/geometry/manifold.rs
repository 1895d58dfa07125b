//! Model spaces with closed-form geodesic distances.
//!
//! Every model here is conformally flat in its chart, so the Riemannian
//! metric at a point is `scale(p)^2` times the Euclidean inner product of
//! chart components. That keeps tangent computations uniform across models.

use std::fmt;

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// A point given by chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientPoint {
    pub coords: Vec<f64>,
}

impl AmbientPoint {
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        Self {
            coords: coords.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl From<Vec<f64>> for AmbientPoint {
    fn from(coords: Vec<f64>) -> Self {
        Self { coords }
    }
}

impl<const N: usize> From<[f64; N]> for AmbientPoint {
    fn from(coords: [f64; N]) -> Self {
        Self {
            coords: coords.to_vec(),
        }
    }
}

/// A tangent vector expressed in the chart frame at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: AmbientPoint,
    pub components: Vec<f64>,
}

impl TangentVector {
    pub fn new(base: AmbientPoint, components: impl Into<Vec<f64>>) -> Self {
        Self {
            base,
            components: components.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelManifold {
    Euclidean(usize),
    /// The unit flat torus `R^2 / Z^2`, chart coordinates in `[0, 1)^2`.
    FlatTorus2,
    /// Poincaré upper half-plane, `y > 0`.
    HyperbolicHalfPlane,
    /// Round sphere of the given radius, charted by stereographic projection
    /// from the south pole onto the plane tangent at the north pole.
    Sphere2 { radius: f64 },
}

impl fmt::Display for ModelManifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelManifold::Euclidean(n) => write!(f, "euclidean({n})"),
            ModelManifold::FlatTorus2 => write!(f, "flat-torus"),
            ModelManifold::HyperbolicHalfPlane => write!(f, "hyperbolic-half-plane"),
            ModelManifold::Sphere2 { radius } => write!(f, "sphere(radius={radius})"),
        }
    }
}

/// Reduce a real to `[0, 1)`.
pub fn wrap_unit(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Reduce a torus coordinate difference to `[-1/2, 1/2)`.
pub fn wrap_centered(x: f64) -> f64 {
    let r = wrap_unit(x + 0.5) - 0.5;
    if r < -0.5 {
        r + 1.0
    } else {
        r
    }
}

impl ModelManifold {
    pub fn chart_dim(&self) -> usize {
        match self {
            ModelManifold::Euclidean(n) => *n,
            _ => 2,
        }
    }

    /// Build a point, normalizing torus coordinates into `[0, 1)`.
    pub fn point(&self, coords: impl Into<Vec<f64>>) -> Result<AmbientPoint> {
        let mut p = AmbientPoint::new(coords);
        if matches!(self, ModelManifold::FlatTorus2) {
            for c in p.coords.iter_mut() {
                *c = wrap_unit(*c);
            }
        }
        self.validate(&p)?;
        Ok(p)
    }

    pub fn validate(&self, p: &AmbientPoint) -> Result<()> {
        if p.dim() != self.chart_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.chart_dim(),
                got: p.dim(),
            });
        }
        if p.coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("non-finite coordinates {:?}", p.coords)));
        }
        match self {
            ModelManifold::HyperbolicHalfPlane if p.coords[1] <= 0.0 => Err(Error::Domain(
                format!("half-plane point {:?} has y <= 0", p.coords),
            )),
            ModelManifold::FlatTorus2 if p.coords.iter().any(|c| !(0.0..1.0).contains(c)) => Err(
                Error::Domain(format!("torus point {:?} outside [0,1)^2", p.coords)),
            ),
            ModelManifold::Sphere2 { radius } if !(*radius > 0.0) => {
                Err(Error::Domain(format!("sphere radius {radius} must be positive")))
            }
            _ => Ok(()),
        }
    }

    pub fn validate_tangent(&self, v: &TangentVector) -> Result<()> {
        self.validate(&v.base)?;
        if v.components.len() != self.chart_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.chart_dim(),
                got: v.components.len(),
            });
        }
        Ok(())
    }

    /// Geodesic distance, with input validation.
    pub fn distance(&self, p: &AmbientPoint, q: &AmbientPoint) -> Result<f64> {
        self.validate(p)?;
        self.validate(q)?;
        Ok(self.dist(p, q))
    }

    /// Geodesic distance without validation. Callers guarantee valid points.
    pub fn dist(&self, p: &AmbientPoint, q: &AmbientPoint) -> f64 {
        let (a, b) = (&p.coords, &q.coords);
        match self {
            ModelManifold::Euclidean(_) => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            ModelManifold::FlatTorus2 => {
                // Equivalent to the minimum over the 3x3 integer shifts when
                // both points lie in [0,1)^2.
                let dx = (a[0] - b[0]).abs();
                let dy = (a[1] - b[1]).abs();
                dx.min(1.0 - dx).hypot(dy.min(1.0 - dy))
            }
            ModelManifold::HyperbolicHalfPlane => {
                // arcosh(1 + r^2 / (2 y1 y2)) rewritten as 2 asinh(r / (2 sqrt(y1 y2)))
                // to keep small distances accurate.
                let r = (a[0] - b[0]).hypot(a[1] - b[1]);
                2.0 * (r / (2.0 * (a[1] * b[1]).sqrt())).asinh()
            }
            ModelManifold::Sphere2 { radius } => {
                let u = sphere_embed(a);
                let w = sphere_embed(b);
                radius * u.cross(&w).norm().atan2(u.dot(&w))
            }
        }
    }

    /// Conformal factor: the Riemannian norm of a chart vector `v` at `p` is
    /// `scale(p) * |v|`.
    pub fn scale(&self, p: &AmbientPoint) -> f64 {
        match self {
            ModelManifold::Euclidean(_) | ModelManifold::FlatTorus2 => 1.0,
            ModelManifold::HyperbolicHalfPlane => 1.0 / p.coords[1],
            ModelManifold::Sphere2 { radius } => {
                let s = p.coords[0] * p.coords[0] + p.coords[1] * p.coords[1];
                radius * 4.0 / (4.0 + s)
            }
        }
    }

    /// Riemannian inner product of two chart vectors at `p`.
    pub fn inner(&self, p: &AmbientPoint, v: &[f64], w: &[f64]) -> f64 {
        let s = self.scale(p);
        s * s * v.iter().zip(w).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn riemannian_norm(&self, v: &TangentVector) -> Result<f64> {
        self.validate_tangent(v)?;
        Ok(self.norm_at(&v.base, &v.components))
    }

    pub(crate) fn norm_at(&self, p: &AmbientPoint, v: &[f64]) -> f64 {
        self.scale(p) * v.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Chart displacement from `p` to `q`; torus differences take the
    /// shortest representative.
    pub fn chart_difference(&self, p: &AmbientPoint, q: &AmbientPoint) -> Vec<f64> {
        let raw = q.coords.iter().zip(&p.coords).map(|(b, a)| b - a);
        match self {
            ModelManifold::FlatTorus2 => raw.map(wrap_centered).collect(),
            _ => raw.collect(),
        }
    }

    /// Move `p` by `t * v` in chart coordinates (wrapping on the torus).
    pub fn chart_offset(&self, p: &AmbientPoint, v: &[f64], t: f64) -> AmbientPoint {
        let coords: Vec<f64> = p.coords.iter().zip(v).map(|(a, b)| a + t * b).collect();
        match self {
            ModelManifold::FlatTorus2 => AmbientPoint::new(coords.into_iter().map(wrap_unit).collect::<Vec<_>>()),
            _ => AmbientPoint::new(coords),
        }
    }

    /// Unit direction in R^3 of a sphere chart point. Panics for other models.
    pub fn sphere_direction(&self, p: &AmbientPoint) -> Vector3<f64> {
        assert!(matches!(self, ModelManifold::Sphere2 { .. }));
        sphere_embed(&p.coords)
    }

    /// Chart point for a (not necessarily unit) direction in R^3.
    pub fn sphere_point(&self, dir: &Vector3<f64>) -> Result<AmbientPoint> {
        assert!(matches!(self, ModelManifold::Sphere2 { .. }));
        let n = dir.normalize();
        let denom = 1.0 + n.z;
        if !(denom > 1e-12) || !n.iter().all(|c| c.is_finite()) {
            return Err(Error::Domain(format!(
                "direction {:?} is at or near the chart's excluded pole",
                dir.as_slice()
            )));
        }
        Ok(AmbientPoint::new(vec![2.0 * n.x / denom, 2.0 * n.y / denom]))
    }

    /// Differential of the sphere chart at unit direction `n`, applied to an
    /// R^3 velocity `w` tangent to the unit sphere.
    pub(crate) fn sphere_chart_push(n: &Vector3<f64>, w: &Vector3<f64>) -> Vec<f64> {
        let denom = 1.0 + n.z;
        let d2 = denom * denom;
        vec![
            2.0 * w.x / denom - 2.0 * n.x * w.z / d2,
            2.0 * w.y / denom - 2.0 * n.y * w.z / d2,
        ]
    }
}

/// Inverse stereographic map of the chart to the unit sphere.
pub(crate) fn sphere_embed(u: &[f64]) -> Vector3<f64> {
    let s = u[0] * u[0] + u[1] * u[1];
    let d = 4.0 + s;
    Vector3::new(4.0 * u[0] / d, 4.0 * u[1] / d, (4.0 - s) / d)
}
