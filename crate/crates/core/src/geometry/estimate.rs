use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMethod {
    /// Extrapolated limit of a distance quotient over a step ladder.
    LimitLadder,
    /// Maximum of (normal components of) Killing field norms over the sample.
    SupKilling,
    /// Extrapolated limit of the supremum of point-to-set distance quotients.
    SupContinuous,
    ClosedForm,
}

impl fmt::Display for EstimateMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EstimateMethod::LimitLadder => "limit-ladder",
            EstimateMethod::SupKilling => "sup-killing",
            EstimateMethod::SupContinuous => "sup-continuous",
            EstimateMethod::ClosedForm => "closed-form",
        };
        f.write_str(s)
    }
}

/// A norm (or speed) value together with how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub method: EstimateMethod,
    /// Raw ladder quotients (forward side first for two-sided limits).
    pub ladder_values: Vec<f64>,
    pub error_estimate: f64,
    /// Forward and backward one-sided limits, when both were taken.
    pub sides: Option<(f64, f64)>,
    /// Sample indices attaining the maximum within 1e-12 (Killing estimator).
    pub maximizers: Vec<usize>,
}

impl NormEstimate {
    pub fn exact(value: f64, method: EstimateMethod) -> Self {
        Self {
            value,
            method,
            ladder_values: Vec::new(),
            error_estimate: 0.0,
            sides: None,
            maximizers: Vec::new(),
        }
    }
}
