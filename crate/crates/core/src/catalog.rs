//! Shipped scenarios, their expected tables, and the registry the CLI uses.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::finsler::{finsler_limit, finsler_sup_continuous, finsler_sup_killing};
use crate::geometry::{AmbientPoint, EstimateMethod, ModelManifold, StepLadder, TangentVector};
use crate::group::{AlgebraVector, GroupElement, GroupModel};
use crate::hausdorff::{induced_metric, CompactSample, ExactSet, QuotientPoint};
use crate::scenario::{ClosedForm, ExpectedCheck, ExpectedRow, Provenance, Scenario};

/// Stable scenario identifiers.
pub const SCENARIO_NAMES: [&str; 5] = [
    "rn-translation",
    "torus-minus-square",
    "hyperbolic-two-points",
    "sphere-cap",
    "irrational-flow",
];

pub const DEFAULT_TORUS_GRID: usize = 128;
pub const DEFAULT_SPHERE_RINGS: usize = 32;
pub const DEFAULT_CAP_RADIUS: f64 = 0.5;

/// Builder parameters shared by the registry. Fields a scenario does not use
/// are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub a: f64,
    pub b: f64,
    /// Torus grid side or number of sphere-cap rings.
    pub grid_n: Option<usize>,
    pub cap_radius: f64,
    pub rn_points: Vec<Vec<f64>>,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 1.0,
            grid_n: None,
            cap_radius: DEFAULT_CAP_RADIUS,
            rn_points: vec![vec![0.0, 0.0], vec![1.0, 3.0]],
        }
    }
}

pub fn build(name: &str, params: &ScenarioParams) -> Result<Scenario> {
    match name {
        "rn-translation" => {
            let n = params.rn_points.first().map_or(0, Vec::len);
            build_rn_translation(n, &params.rn_points)
        }
        "torus-minus-square" => build_torus_minus_square(params.grid_n.unwrap_or(DEFAULT_TORUS_GRID)),
        "hyperbolic-two-points" => build_hyperbolic_two_points(params.a, params.b),
        "sphere-cap" => build_sphere_cap(params.cap_radius, params.grid_n.unwrap_or(DEFAULT_SPHERE_RINGS)),
        "irrational-flow" => build_irrational_flow(),
        other => Err(Error::UnknownScenario(other.to_string())),
    }
}

fn row(label: &str, check: ExpectedCheck, value: f64, tolerance: f64, provenance: Provenance) -> ExpectedRow {
    ExpectedRow {
        label: label.to_string(),
        check,
        value,
        tolerance,
        provenance,
    }
}

fn metric_row(label: &str, from: &[f64], to: &[f64], value: f64, tol: f64, p: Provenance) -> ExpectedRow {
    let check = ExpectedCheck::InducedMetric {
        from: GroupElement::new(from.to_vec()),
        to: GroupElement::new(to.to_vec()),
    };
    row(label, check, value, tol, p)
}

fn finsler_row(label: &str, v: &[f64], method: EstimateMethod, value: f64, tol: f64, p: Provenance) -> ExpectedRow {
    let check = ExpectedCheck::Finsler {
        v: AlgebraVector::new(v.to_vec()),
        method,
    };
    row(label, check, value, tol, p)
}

/// Translations of `R^n` acting on a finite set.
pub fn build_rn_translation(n: usize, points: &[Vec<f64>]) -> Result<Scenario> {
    if n == 0 {
        return Err(Error::Config("rn-translation needs n >= 1".into()));
    }
    if let Some(p) = points.iter().find(|p| p.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: p.len(),
        });
    }
    let m = ModelManifold::Euclidean(n);
    let sample = CompactSample::finite(points.iter().cloned().map(AmbientPoint::new).collect())?;
    let mut s = Scenario::new("rn-translation", m, GroupModel::TranslationRn(n), sample)?
        .with_closed_form(ClosedForm::EuclideanNorm);

    let origin = vec![0.0; n];
    let mut target = vec![0.0; n];
    target[0] = 3.0;
    if n > 1 {
        target[1] = 4.0;
    }
    let expected_len = if n > 1 { 5.0 } else { 3.0 };
    s.expected = vec![
        metric_row("d_X(0, (3,4))", &origin, &target, expected_len, 1e-12, Provenance::WorkedExample),
        metric_row("d_X(x, x)", &target, &target, 0.0, 0.0, Provenance::Trivial),
        finsler_row("F((3,4)) limit", &target, EstimateMethod::LimitLadder, expected_len, 1e-6, Provenance::WorkedExample),
        finsler_row("F((3,4)) killing", &target, EstimateMethod::SupKilling, expected_len, 1e-12, Provenance::Trivial),
    ];
    Ok(s)
}

/// Flat torus minus the open square `(1/4, 3/4)^2`, sampled on the grid
/// points of the closed complement.
pub fn build_torus_minus_square(grid_n: usize) -> Result<Scenario> {
    if grid_n < 32 || !grid_n.is_multiple_of(4) {
        return Err(Error::Config(format!(
            "torus grid must be a multiple of 4 and at least 32, got {grid_n}"
        )));
    }
    let (lo, hi) = (grid_n / 4, 3 * grid_n / 4);
    let inside = |k: usize| k > lo && k < hi;
    let on_edge = |k: usize| k == lo || k == hi;
    let h = 1.0 / grid_n as f64;

    let mut points = Vec::new();
    let mut bases = Vec::new();
    for i in 0..grid_n {
        for j in 0..grid_n {
            if inside(i) && inside(j) {
                continue;
            }
            let p = AmbientPoint::new(vec![i as f64 * h, j as f64 * h]);
            let vertical = on_edge(i) && inside(j);
            let horizontal = on_edge(j) && inside(i);
            // Corners and points away from the square keep the full plane.
            let basis = if vertical {
                vec![vec![0.0, 1.0]]
            } else if horizontal {
                vec![vec![1.0, 0.0]]
            } else {
                vec![vec![1.0, 0.0], vec![0.0, 1.0]]
            };
            bases.push(basis.into_iter().map(|c| TangentVector::new(p.clone(), c)).collect());
            points.push(p);
        }
    }
    let m = ModelManifold::FlatTorus2;
    let fill = SQRT_2 / (2.0 * grid_n as f64);
    let sample = CompactSample::new(points, fill)?
        .with_exact(ExactSet::TorusMinusSquare { lo: 0.25, hi: 0.75 })
        .with_tangent_basis(&m, bases)?;
    // d_X is exactly the max norm while |g_i| < 1/4, so the ladder may use
    // steps far above the grid spacing.
    let ladder = StepLadder {
        t0: 0.24,
        ratio: 0.9,
        depth: 4,
        ..StepLadder::default()
    };
    let mut s = Scenario::new("torus-minus-square", m, GroupModel::TranslationTorus2, sample)?
        .with_closed_form(ClosedForm::MaxNorm)
        .with_ladder(ladder);
    s.expected = vec![
        metric_row("d_X((0.05,0.02), e)", &[0.05, 0.02], &[0.0, 0.0], 0.05, 2.0 * fill, Provenance::WorkedExample),
        metric_row("d_X(e, e)", &[0.0, 0.0], &[0.0, 0.0], 0.0, 0.0, Provenance::Trivial),
        finsler_row("F((1,1)) continuous", &[1.0, 1.0], EstimateMethod::SupContinuous, 1.0, 1e-2, Provenance::WorkedExample),
        finsler_row("F((1,1)) limit", &[1.0, 1.0], EstimateMethod::LimitLadder, 1.0, 1e-2, Provenance::WorkedExample),
        finsler_row("F((1,0)) killing", &[1.0, 0.0], EstimateMethod::SupKilling, 1.0, 1e-12, Provenance::Derived),
    ];
    Ok(s)
}

/// Two points `(±a, b)` of the half-plane under the affine group.
pub fn build_hyperbolic_two_points(a: f64, b: f64) -> Result<Scenario> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::Config(format!("hyperbolic scenario needs a, b > 0, got a={a}, b={b}")));
    }
    let sample = CompactSample::finite(vec![AmbientPoint::new(vec![-a, b]), AmbientPoint::new(vec![a, b])])?;
    let closed = ClosedForm::HyperbolicTwoPoints { a, b };
    let mut s = Scenario::new("hyperbolic-two-points", ModelManifold::HyperbolicHalfPlane, GroupModel::HyperbolicAffine, sample)?
        .with_closed_form(closed.clone());
    let v0 = [1.0, 0.0];
    let v90 = [FRAC_PI_2.cos(), FRAC_PI_2.sin()];
    let v45 = [FRAC_PI_4.cos(), FRAC_PI_4.sin()];
    let f = |v: &[f64; 2]| closed.eval(&AlgebraVector::from(*v));
    let unit = a == 1.0 && b == 1.0;
    let p = if unit { Provenance::WorkedExample } else { Provenance::Derived };
    s.expected = vec![
        finsler_row("F(v_0) limit", &v0, EstimateMethod::LimitLadder, f(&v0), 1e-3 * f(&v0), p),
        finsler_row("F(v_0) killing", &v0, EstimateMethod::SupKilling, f(&v0), 1e-9 * f(&v0), p),
        finsler_row("F(v_pi/2) limit", &v90, EstimateMethod::LimitLadder, f(&v90), 1e-3 * f(&v90), p),
        finsler_row("F(v_pi/2) killing", &v90, EstimateMethod::SupKilling, f(&v90), 1e-9 * f(&v90), p),
        finsler_row("F(v_pi/4) killing", &v45, EstimateMethod::SupKilling, f(&v45), 1e-9 * f(&v45), Provenance::Derived),
        metric_row("d_X(e, e)", &[0.0, 1.0], &[0.0, 1.0], 0.0, 0.0, Provenance::Trivial),
    ];
    Ok(s)
}

/// Closed geodesic cap of radius `cap_radius` around the north pole of the
/// unit sphere, sampled on `rings` concentric geodesic circles.
pub fn build_sphere_cap(cap_radius: f64, rings: usize) -> Result<Scenario> {
    if !(cap_radius > 0.0 && cap_radius < FRAC_PI_4) {
        return Err(Error::Config(format!("cap radius must lie in (0, pi/4), got {cap_radius}")));
    }
    if rings < 2 {
        return Err(Error::Config(format!("sphere cap needs at least 2 rings, got {rings}")));
    }
    let m = ModelManifold::Sphere2 { radius: 1.0 };
    let dr = cap_radius / rings as f64;
    let center = AmbientPoint::new(vec![0.0, 0.0]);
    let lambda0 = m.scale(&center);
    let mut points = vec![center.clone()];
    let mut bases = vec![vec![
        TangentVector::new(center.clone(), vec![1.0 / lambda0, 0.0]),
        TangentVector::new(center.clone(), vec![0.0, 1.0 / lambda0]),
    ]];
    let mut max_arc: f64 = 0.0;
    for k in 1..=rings {
        let r = k as f64 * dr;
        let circumference = 2.0 * PI * r.sin();
        let boundary = k == rings;
        // The boundary ring carries the Hausdorff distance of small motions,
        // so it is sampled far more densely than the interior.
        let count = if boundary {
            ((circumference / dr).ceil() as usize).max(64 * rings)
        } else {
            ((circumference / dr).ceil() as usize).max(6)
        };
        max_arc = max_arc.max(circumference / count as f64);
        for j in 0..count {
            let phi = 2.0 * PI * j as f64 / count as f64;
            let dir = Vector3::new(r.sin() * phi.cos(), r.sin() * phi.sin(), r.cos());
            let p = m.sphere_point(&dir)?;
            let lambda = m.scale(&p);
            let basis = if boundary {
                vec![TangentVector::new(p.clone(), vec![-phi.sin() / lambda, phi.cos() / lambda])]
            } else {
                vec![
                    TangentVector::new(p.clone(), vec![1.0 / lambda, 0.0]),
                    TangentVector::new(p.clone(), vec![0.0, 1.0 / lambda]),
                ]
            };
            points.push(p);
            bases.push(basis);
        }
    }
    let fill = dr / 2.0 + max_arc / 2.0;
    let sample = CompactSample::new(points, fill)?
        .with_exact(ExactSet::GeodesicBall {
            center,
            radius: cap_radius,
        })
        .with_tangent_basis(&m, bases)?;
    // Steps stay below cap_radius / 2, the neighbourhood on which
    // d_X(g, e) = d(p, gp) is asserted.
    let ladder = StepLadder {
        t0: 0.4 * cap_radius,
        ratio: 0.75,
        depth: 4,
        ..StepLadder::default()
    };
    let mut s = Scenario::new("sphere-cap", m, GroupModel::Rotation3, sample)?
        .with_closed_form(ClosedForm::SphereCap {
            center: [0.0, 0.0, 1.0],
            radius: 1.0,
        })
        .with_ladder(ladder)
        .with_isotropy(vec![AlgebraVector::new(vec![0.0, 0.0, 1.0])]);
    let group = GroupModel::Rotation3;
    let tilt = group.exp_map(&AlgebraVector::new(vec![0.1, 0.0, 0.0]), 1.0)?;
    let spin = group.exp_map(&AlgebraVector::new(vec![0.0, 0.0, 0.2]), 1.0)?;
    let e = group.identity();
    s.expected = vec![
        metric_row("d_X(e, e)", &e.params, &e.params, 0.0, 0.0, Provenance::Trivial),
        metric_row("d_X(tilt 0.1, e)", &tilt.params, &e.params, 0.1, 2.0 * fill, Provenance::WorkedExample),
        metric_row("d_X(spin about p, e)", &spin.params, &e.params, 0.0, 2.0 * fill, Provenance::Trivial),
        finsler_row("F(e_x) killing", &[1.0, 0.0, 0.0], EstimateMethod::SupKilling, 1.0, 1e-3, Provenance::Derived),
    ];
    Ok(s)
}

/// The line of slope `sqrt 2` acting on the flat torus, orbiting one point.
pub fn build_irrational_flow() -> Result<Scenario> {
    let slope = SQRT_2;
    let sample = CompactSample::finite(vec![AmbientPoint::new(vec![0.0, 0.0])])?;
    let mut s = Scenario::new("irrational-flow", ModelManifold::FlatTorus2, GroupModel::LineFlow { slope }, sample)?
        .with_closed_form(ClosedForm::LineFlow { slope });
    s.expected = vec![
        metric_row("d_X(0.01, 0)", &[0.01], &[0.0], 0.01 * 3f64.sqrt(), 1e-4, Provenance::Derived),
        row(
            "return within 0.05 for t in (100, 200)",
            ExpectedCheck::ReturnWithin {
                start: 100.0,
                end: 200.0,
                step: 1e-3,
                radius: 0.05,
            },
            1.0,
            0.0,
            Provenance::WorkedExample,
        ),
        metric_row("d_X(0, 0)", &[0.0], &[0.0], 0.0, 0.0, Provenance::Trivial),
    ];
    Ok(s)
}

/// First grid time in `(start, end)` at which the orbit returns within
/// `radius` of its start.
pub fn find_return(s: &Scenario, start: f64, end: f64, step: f64, radius: f64) -> Result<Option<f64>> {
    let origin = QuotientPoint::new(s.group.identity());
    let count = ((end - start) / step).floor() as usize;
    for k in 1..count {
        let t = start + k as f64 * step;
        let g = QuotientPoint::new(s.group.element(vec![t])?);
        if induced_metric(s, &g, &origin)? < radius {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// One replayed row of a scenario's expected table.
#[derive(Debug, Clone, PartialEq)]
pub struct Replay {
    pub row: ExpectedRow,
    pub observed: f64,
    pub passed: bool,
}

pub fn replay_row(s: &Scenario, row: &ExpectedRow) -> Result<Replay> {
    let observed = match &row.check {
        ExpectedCheck::InducedMetric { from, to } => induced_metric(
            s,
            &QuotientPoint::new(s.group.element(from.params.clone())?),
            &QuotientPoint::new(s.group.element(to.params.clone())?),
        )?,
        ExpectedCheck::Finsler { v, method } => match method {
            EstimateMethod::LimitLadder => finsler_limit(s, v, &s.ladder)?.value,
            EstimateMethod::SupKilling => finsler_sup_killing(s, v)?.value,
            EstimateMethod::SupContinuous => finsler_sup_continuous(s, v, &s.ladder)?.value,
            EstimateMethod::ClosedForm => s
                .closed_form
                .as_ref()
                .map(|f| f.eval(v))
                .ok_or_else(|| Error::Config(format!("{} has no closed form", s.name)))?,
        },
        ExpectedCheck::ReturnWithin {
            start,
            end,
            step,
            radius,
        } => {
            if find_return(s, *start, *end, *step, *radius)?.is_some() {
                1.0
            } else {
                0.0
            }
        }
    };
    Ok(Replay {
        passed: (observed - row.value).abs() <= row.tolerance,
        observed,
        row: row.clone(),
    })
}

pub fn replay_expected(s: &Scenario) -> Result<Vec<Replay>> {
    s.expected.iter().map(|r| replay_row(s, r)).collect()
}
