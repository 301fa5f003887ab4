//! The published closed-form monotonicity score in `|c0|`:
//!
//! ```text
//! p_hat = 0.9720 + 0.0331 / (1.5541 - |c0|)
//! ```
//!
//! evaluated literally: undefined at the pole, and positive again for
//! `|c0|` far above the pole, which the caller is expected to surface
//! rather than clamp away.

pub const FORMULA_INTERCEPT: f64 = 0.9720;
pub const FORMULA_NUMERATOR: f64 = 0.0331;
pub const FORMULA_POLE: f64 = 1.5541;

/// Verdict of the closed-form score.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FormulaVerdict {
    /// `None` at the pole.
    pub p_hat: Option<f64>,
    /// `p_hat > 0`; `false` at the pole.
    pub monotone: bool,
    /// True when `|c0|` lies beyond the pole, where a positive score no
    /// longer means what it does on the near side.
    pub beyond_pole: bool,
}

/// Evaluate the score at `|c0|`.
pub fn symbolic_formula(c0_abs: f64) -> FormulaVerdict {
    debug_assert!(c0_abs >= 0.0);
    let denom = FORMULA_POLE - c0_abs;
    if denom.abs() <= 1e-12 {
        return FormulaVerdict {
            p_hat: None,
            monotone: false,
            beyond_pole: false,
        };
    }
    let p_hat = FORMULA_INTERCEPT + FORMULA_NUMERATOR / denom;
    FormulaVerdict {
        p_hat: Some(p_hat),
        monotone: p_hat > 0.0,
        beyond_pole: denom < 0.0,
    }
}
