use rayon::prelude::*;

use super::estimate::{EstimateMethod, NormEstimate};
use super::ladder::{extrapolate, StepLadder};
use super::manifold::{AmbientPoint, ModelManifold};
use crate::error::{Error, Result};

/// Which one-sided limits to take around the base parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sides {
    Both,
    Forward,
    Backward,
}

/// Extrapolate `quotient(±t_k)` over the ladder and combine the sides.
///
/// `quotient` receives the signed step. Two-sided results report the larger
/// side; their disagreement is folded into the error estimate.
pub(crate) fn limit_estimate<F>(
    ladder: &StepLadder,
    sides: Sides,
    method: EstimateMethod,
    quotient: F,
) -> Result<NormEstimate>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    ladder.validate()?;
    let steps = ladder.steps();
    let side = |sign: f64| -> Result<Vec<f64>> {
        steps.par_iter().map(|t| quotient(sign * t)).collect()
    };
    let forward = match sides {
        Sides::Both | Sides::Forward => Some(side(1.0)?),
        Sides::Backward => None,
    };
    let backward = match sides {
        Sides::Both | Sides::Backward => Some(side(-1.0)?),
        Sides::Forward => None,
    };
    let ladder_values: Vec<f64> = forward
        .iter()
        .chain(backward.iter())
        .flatten()
        .copied()
        .collect();
    let settle = |vals: &Vec<f64>| {
        extrapolate(ladder, vals, 1).map_err(|_| Error::NonConvergent {
            raw: ladder_values.clone(),
        })
    };

    let (value, error_estimate, pair) = match (&forward, &backward) {
        (Some(f), Some(b)) => {
            let (f, b) = (settle(f)?, settle(b)?);
            let gap = (f.value - b.value).abs();
            (
                f.value.max(b.value),
                f.error.max(b.error).max(gap),
                Some((f.value, b.value)),
            )
        }
        (Some(one), None) | (None, Some(one)) => {
            let e = settle(one)?;
            (e.value, e.error, None)
        }
        (None, None) => unreachable!(),
    };
    Ok(NormEstimate {
        value,
        method,
        ladder_values,
        error_estimate,
        sides: pair,
        maximizers: Vec::new(),
    })
}

/// Metric speed `lim d(γ(t), γ(t0)) / |t - t0|` of a curve in a model space.
pub fn speed_estimate<C>(
    m: &ModelManifold,
    curve: C,
    t0: f64,
    ladder: &StepLadder,
    sides: Sides,
) -> Result<NormEstimate>
where
    C: Fn(f64) -> AmbientPoint + Sync,
{
    let base = curve(t0);
    m.validate(&base)?;
    limit_estimate(ladder, sides, EstimateMethod::LimitLadder, |dt| {
        let p = curve(t0 + dt);
        m.validate(&p)?;
        Ok(m.dist(&p, &base) / dt.abs())
    })
}
