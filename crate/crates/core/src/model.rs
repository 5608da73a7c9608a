//! Model parameters `(Σ, μ, R)` of a reflected Brownian motion in the quadrant.
//!
//! Validation checks non-singularity of the covariance and the five
//! ergodicity inequalities. A non-identity reflection matrix is accepted but
//! flagged: the explicit transform pipeline needs orthogonal reflections, the
//! kernel and simulation code does not.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One of the five ergodicity inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErgodicityCondition {
    /// `r11 > 0`
    R11Positive,
    /// `r22 > 0`
    R22Positive,
    /// `r11 r22 - r12 r21 > 0`
    DetRPositive,
    /// `r22 μ1 - r12 μ2 < 0`
    FirstDriftCondition,
    /// `r11 μ2 - r21 μ1 < 0`
    SecondDriftCondition,
}

impl fmt::Display for ErgodicityCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::R11Positive => "r11 > 0",
            Self::R22Positive => "r22 > 0",
            Self::DetRPositive => "r11*r22 - r12*r21 > 0",
            Self::FirstDriftCondition => "r22*mu1 - r12*mu2 < 0",
            Self::SecondDriftCondition => "r11*mu2 - r21*mu1 < 0",
        };
        f.write_str(s)
    }
}

/// A single reason for rejecting a parameter triple.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NonFinite,
    NonSymmetricCovariance { s12: f64, s21: f64 },
    SingularCovariance { s11: f64, s22: f64, det: f64 },
    NotErgodic { failed: Vec<ErgodicityCondition> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite => write!(f, "non-finite entry in sigma, mu or r"),
            Violation::NonSymmetricCovariance { s12, s21 } => {
                write!(f, "covariance is not symmetric (s12 = {s12}, s21 = {s21})")
            }
            Violation::SingularCovariance { s11, s22, det } => write!(
                f,
                "covariance is not positive definite (s11 = {s11}, s22 = {s22}, det = {det})"
            ),
            Violation::NotErgodic { failed } => {
                write!(f, "not ergodic, failed:")?;
                for (i, c) in failed.iter().enumerate() {
                    write!(f, "{}{c}", if i == 0 { " " } else { ", " })?;
                }
                Ok(())
            }
        }
    }
}

/// Rejection listing every violated condition.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ModelError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid model parameters: ")?;
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl ModelError {
    pub fn has(&self, pred: impl Fn(&Violation) -> bool) -> bool {
        self.violations.iter().any(pred)
    }
}

/// Validated triple `(Σ, μ, R)`. Immutable after construction.
///
/// The columns of `r` are the reflection directions on the two axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    sigma: [[f64; 2]; 2],
    mu: [f64; 2],
    r: [[f64; 2]; 2],
}

/// Scalars derived from the covariance and drift: the angle `β` and the
/// branch points of the two algebraic functions defined by the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedScalars {
    pub beta: f64,
    pub theta1_minus: f64,
    pub theta1_plus: f64,
    pub theta2_minus: f64,
    pub theta2_plus: f64,
}

impl DerivedScalars {
    /// The exponent `π/β` of the generalized Chebyshev polynomial.
    pub fn chebyshev_exponent(&self) -> f64 {
        PI / self.beta
    }
}

pub const IDENTITY: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];

/// Validates `(Σ, μ, R)`. Every violated condition is reported, not just the first.
///
/// Inequalities are tested against zero exactly.
pub fn validate_parameters(
    sigma: [[f64; 2]; 2],
    mu: [f64; 2],
    r: [[f64; 2]; 2],
) -> Result<ModelParams, ModelError> {
    let mut violations = Vec::new();
    let finite = sigma.iter().flatten().chain(mu.iter()).chain(r.iter().flatten()).all(|v| v.is_finite());
    if !finite {
        return Err(ModelError { violations: vec![Violation::NonFinite] });
    }

    let (s11, s12, s21, s22) = (sigma[0][0], sigma[0][1], sigma[1][0], sigma[1][1]);
    if s12 != s21 {
        violations.push(Violation::NonSymmetricCovariance { s12, s21 });
    }
    let det = s11 * s22 - s12 * s21;
    if !(s11 > 0.0 && s22 > 0.0 && det > 0.0) {
        violations.push(Violation::SingularCovariance { s11, s22, det });
    }

    let (r11, r12, r21, r22) = (r[0][0], r[0][1], r[1][0], r[1][1]);
    let (m1, m2) = (mu[0], mu[1]);
    let mut failed = Vec::new();
    if !(r11 > 0.0) {
        failed.push(ErgodicityCondition::R11Positive);
    }
    if !(r22 > 0.0) {
        failed.push(ErgodicityCondition::R22Positive);
    }
    if !(r11 * r22 - r12 * r21 > 0.0) {
        failed.push(ErgodicityCondition::DetRPositive);
    }
    if !(r22 * m1 - r12 * m2 < 0.0) {
        failed.push(ErgodicityCondition::FirstDriftCondition);
    }
    if !(r11 * m2 - r21 * m1 < 0.0) {
        failed.push(ErgodicityCondition::SecondDriftCondition);
    }
    if !failed.is_empty() {
        violations.push(Violation::NotErgodic { failed });
    }

    if violations.is_empty() {
        Ok(ModelParams { sigma, mu, r })
    } else {
        Err(ModelError { violations })
    }
}

impl ModelParams {
    /// Validates with orthogonal reflections (`R = I`).
    pub fn orthogonal(sigma: [[f64; 2]; 2], mu: [f64; 2]) -> Result<Self, ModelError> {
        validate_parameters(sigma, mu, IDENTITY)
    }

    pub fn sigma(&self) -> [[f64; 2]; 2] {
        self.sigma
    }

    pub fn mu(&self) -> [f64; 2] {
        self.mu
    }

    pub fn r(&self) -> [[f64; 2]; 2] {
        self.r
    }

    pub fn s11(&self) -> f64 {
        self.sigma[0][0]
    }

    pub fn s12(&self) -> f64 {
        self.sigma[0][1]
    }

    pub fn s22(&self) -> f64 {
        self.sigma[1][1]
    }

    pub fn mu1(&self) -> f64 {
        self.mu[0]
    }

    pub fn mu2(&self) -> f64 {
        self.mu[1]
    }

    pub fn det_sigma(&self) -> f64 {
        self.s11() * self.s22() - self.s12() * self.s12()
    }

    /// `false` means the explicit transform pipeline is unavailable for this model.
    pub fn has_identity_reflection(&self) -> bool {
        self.r == IDENTITY
    }

    /// Parameters with the roles of the two coordinates exchanged.
    pub fn swapped(&self) -> ModelParams {
        let s = self.sigma;
        let r = self.r;
        ModelParams {
            sigma: [[s[1][1], s[1][0]], [s[0][1], s[0][0]]],
            mu: [self.mu[1], self.mu[0]],
            r: [[r[1][1], r[1][0]], [r[0][1], r[0][0]]],
        }
    }

    /// Largest absolute entry of `Σ` and `μ`, used to scale kernel tolerances.
    pub fn scale(&self) -> f64 {
        self.sigma
            .iter()
            .flatten()
            .chain(self.mu.iter())
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn derived(&self) -> DerivedScalars {
        derived_scalars(self)
    }
}

/// Roots of `-det·t² + 2 m t + c² = 0`, returned as `(minus, plus)`.
///
/// The product of the roots is `-c²/det`; the root not suffering cancellation
/// is computed first and its partner recovered from the product.
fn discriminant_roots(m: f64, c: f64, det: f64) -> (f64, f64) {
    let root = (m * m + c * c * det).sqrt();
    if c == 0.0 {
        let other = 2.0 * m / det;
        return if other >= 0.0 { (0.0, other) } else { (other, 0.0) };
    }
    if m >= 0.0 {
        let plus = (m + root) / det;
        (-c * c / (m + root), plus)
    } else {
        let minus = (m - root) / det;
        (minus, c * c / (root - m))
    }
}

/// `β` and the four branch points `θ1±`, `θ2±`.
pub fn derived_scalars(p: &ModelParams) -> DerivedScalars {
    let (s11, s12, s22) = (p.s11(), p.s12(), p.s22());
    let (m1, m2) = (p.mu1(), p.mu2());
    let det = p.det_sigma();
    let beta = (-s12 / (s11 * s22).sqrt()).acos();
    let (theta2_minus, theta2_plus) = discriminant_roots(m1 * s12 - m2 * s11, m1, det);
    let (theta1_minus, theta1_plus) = discriminant_roots(m2 * s12 - m1 * s22, m2, det);
    DerivedScalars { beta, theta1_minus, theta1_plus, theta2_minus, theta2_plus }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    const I: [[f64; 2]; 2] = IDENTITY;

    #[test]
    fn standard_model_is_valid() {
        let p = validate_parameters(I, [-1.0, -1.0], I).unwrap();
        assert!(p.has_identity_reflection());
    }

    #[test]
    fn positive_drift_is_not_ergodic() {
        let err = validate_parameters(I, [1.0, -1.0], I).unwrap_err();
        assert_eq!(
            err.violations,
            vec![Violation::NotErgodic { failed: vec![ErgodicityCondition::FirstDriftCondition] }]
        );
    }

    #[test]
    fn indefinite_covariance_is_singular() {
        let err = validate_parameters([[1.0, 2.0], [2.0, 1.0]], [-1.0, -1.0], I).unwrap_err();
        assert!(err.has(|v| matches!(v, Violation::SingularCovariance { det, .. } if *det == -3.0)));
    }

    #[test]
    fn every_violation_is_reported() {
        let err = validate_parameters([[1.0, 0.5], [0.4, -1.0]], [1.0, 1.0], I).unwrap_err();
        assert_eq!(err.violations.len(), 3);
        assert!(err.has(|v| matches!(v, Violation::NonSymmetricCovariance { .. })));
        assert!(err.has(|v| matches!(v, Violation::NotErgodic { failed } if failed.len() == 2)));
    }

    #[test]
    fn non_identity_reflection_is_a_flag() {
        let p = validate_parameters(I, [-1.0, -1.0], [[1.0, 0.3], [0.2, 1.0]]).unwrap();
        assert!(!p.has_identity_reflection());
    }

    #[test]
    fn non_finite_rejected() {
        let err = validate_parameters(I, [f64::NAN, -1.0], I).unwrap_err();
        assert_eq!(err.violations, vec![Violation::NonFinite]);
    }

    #[test]
    fn derived_scalars_standard_model() {
        let d = ModelParams::orthogonal(I, [-1.0, -1.0]).unwrap().derived();
        assert_eq!(d.beta, FRAC_PI_2);
        assert!((d.theta2_plus - (1.0 + SQRT_2)).abs() < 1e-15);
        assert!((d.theta2_minus - (1.0 - SQRT_2)).abs() < 1e-15);
        assert!((d.theta1_plus - (1.0 + SQRT_2)).abs() < 1e-15);
        assert!((d.theta1_minus - (1.0 - SQRT_2)).abs() < 1e-15);
        // roots of -t^2 + 2t + 1
        for t in [d.theta2_minus, d.theta2_plus] {
            assert!((-t * t + 2.0 * t + 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn beta_for_negative_correlation() {
        let d = ModelParams::orthogonal([[1.0, -0.5], [-0.5, 1.0]], [-1.0, -1.0]).unwrap().derived();
        assert!((d.beta - PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn swapping_twice_is_identity() {
        let p = validate_parameters([[2.0, 0.3], [0.3, 1.0]], [-1.0, -0.5], [[1.0, 0.2], [0.1, 1.5]]).unwrap();
        assert_eq!(p.swapped().swapped(), p);
    }
}
