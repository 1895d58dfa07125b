use crate::error::{Error, Result};

/// Geometric sequence of step sizes `t0 * ratio^k`, `k = 0..depth`, used to
/// discretize one-sided limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLadder {
    pub t0: f64,
    pub ratio: f64,
    pub depth: usize,
    /// Largest accepted error estimate, relative to `max(1, |value|)`.
    pub tolerance: f64,
}

impl Default for StepLadder {
    fn default() -> Self {
        Self {
            t0: 1e-2,
            ratio: 0.5,
            depth: 11,
            tolerance: 1e-2,
        }
    }
}

impl StepLadder {
    pub fn new(t0: f64, ratio: f64, depth: usize) -> Result<Self> {
        let ladder = Self {
            t0,
            ratio,
            depth,
            ..Self::default()
        };
        ladder.validate()?;
        Ok(ladder)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::Config(format!("ladder t0 must be positive, got {}", self.t0)));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::Config(format!("ladder ratio must lie in (0,1), got {}", self.ratio)));
        }
        if self.depth < 3 {
            return Err(Error::Config(format!("ladder depth must be >= 3, got {}", self.depth)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("ladder tolerance must be positive".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> Vec<f64> {
        (0..self.depth)
            .map(|k| self.t0 * self.ratio.powi(k as i32))
            .collect()
    }

    /// Same ladder with every step divided by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            t0: self.t0 / s,
            ..*self
        }
    }
}

/// Result of extrapolating a ladder of samples towards step zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolated {
    pub value: f64,
    pub error: f64,
    pub raw: Vec<f64>,
}

/// Extrapolate `values[k] ≈ L + c * step_k^order` to `L`.
///
/// Candidates are the raw values and one-step Richardson values. Each run of
/// three consecutive candidates is scored by its larger successive
/// difference; the best run wins (raw values on ties), its last value is the
/// estimate, and its score is the error estimate. Constant quotients come
/// back untouched, and noisy ones are not amplified by the Richardson step.
pub fn extrapolate(ladder: &StepLadder, values: &[f64], order: i32) -> Result<Extrapolated> {
    let raw = values.to_vec();
    if values.len() < 3 || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonConvergent { raw });
    }
    let factor = ladder.ratio.powi(order);
    let richardson: Vec<f64> = values
        .windows(2)
        .map(|w| (w[1] - factor * w[0]) / (1.0 - factor))
        .collect();

    let mut best: Option<(f64, f64)> = None;
    for seq in [values, &richardson[..]] {
        for w in seq.windows(3) {
            let err = (w[1] - w[0]).abs().max((w[2] - w[1]).abs());
            if best.is_none_or(|(_, e)| err < e) {
                best = Some((w[2], err));
            }
        }
    }
    let (value, error) = best.expect("at least three ladder values");
    if error > ladder.tolerance * value.abs().max(1.0) {
        return Err(Error::NonConvergent { raw });
    }
    Ok(Extrapolated { value, error, raw })
}
