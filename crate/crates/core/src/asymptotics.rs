//! Regime classification and leading-order tail asymptotics of the boundary
//! density `ν1`.
//!
//! With `Θ1(θ2⁺)` the kernel partner of the branch point:
//!
//! - `Θ1(θ2⁺) < 0`: `ν1(x) ~ -C1/(2√π) x^{-3/2} e^{-θ2⁺ x}`
//! - `Θ1(θ2⁺) = 0`: `ν1(x) ~ C2/√π x^{-1/2} e^{-θ2⁺ x}`
//! - `Θ1(θ2⁺) > 0`: `ν1(x) ~ A e^{-p x}` with the simple pole `p = -2μ2/σ22`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::kernel;
use crate::transform::{TransformBundle, TransformError};

type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Branch point dominates with an `x^{-3/2}` correction.
    SaddleNeg,
    /// Pole and branch point collide, `x^{-1/2}` correction.
    BoundaryZero,
    /// A simple pole closer than the branch point dominates.
    PoleDominant,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::SaddleNeg => "saddle_neg",
            Regime::BoundaryZero => "boundary_zero",
            Regime::PoleDominant => "pole_dominant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsymptoticsError {
    #[error("exponent pi/beta = {order} is an integer; the {regime:?} constants are not available")]
    IntegerExponent { order: f64, regime: Regime },
    #[error("constant {requested} does not apply in regime {regime:?}")]
    WrongRegime { requested: &'static str, regime: Regime },
    #[error("x must be positive, got {0}")]
    NonPositiveArgument(f64),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// Leading-order behaviour `constant · x^power · e^{-decay_rate · x}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticReport {
    pub regime: Regime,
    pub decay_rate: f64,
    pub power: f64,
    pub constant: f64,
    pub pole_location: Option<f64>,
    /// `Θ1(θ2⁺)`, the quantity whose sign selects the regime.
    pub theta1_at_branch: f64,
}

impl AsymptoticReport {
    /// Leading-order tail at `x > 0`.
    pub fn tail(&self, x: f64) -> Result<f64, AsymptoticsError> {
        if !(x > 0.0) {
            return Err(AsymptoticsError::NonPositiveArgument(x));
        }
        Ok(self.constant * x.powf(self.power) * (-self.decay_rate * x).exp())
    }
}

/// The two branch-point constants. Exactly one is applicable, or neither in
/// the pole-dominant regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchConstants {
    pub c1: f64,
    pub c2: f64,
    pub applicable: Option<&'static str>,
}

/// Classification tolerance for `Θ1(θ2⁺) = 0`.
pub fn regime_tolerance(b: &TransformBundle) -> f64 {
    let p = b.params();
    1e-10 * (1.0 + p.mu1().abs() / p.s11())
}

pub fn regime_of(b: &TransformBundle) -> (Regime, f64) {
    let t = kernel::theta1_at_branch_point(b.params());
    let regime = if t.abs() < regime_tolerance(b) {
        if t != 0.0 {
            log::warn!("Theta1(theta2+) = {t:e} treated as zero");
        }
        Regime::BoundaryZero
    } else if t < 0.0 {
        Regime::SaddleNeg
    } else {
        Regime::PoleDominant
    };
    (regime, t)
}

/// Location `-2μ2/σ22` of the pole of `φ1` closest to the origin.
pub fn pole_location(b: &TransformBundle) -> f64 {
    -2.0 * b.params().mu2() / b.params().s22()
}

/// Residue-type constant `A` with `φ1(θ2) ~ A/(p - θ2)` at the pole `p`.
///
/// Equals `2μ1μ2/σ22` when `σ12 = 0`; the extra term accounts for correlation.
pub fn pole_constant(b: &TransformBundle) -> f64 {
    let p = b.params();
    let (m1, m2, s12, s22) = (p.mu1(), p.mu2(), p.s12(), p.s22());
    2.0 * m1 * m2 / s22 - 4.0 * s12 * m2 * m2 / (s22 * s22)
}

/// `C1` and `C2` from the square-root expansion of `w` at `θ2⁺`.
pub fn constants_c1_c2(b: &TransformBundle) -> Result<BranchConstants, AsymptoticsError> {
    let (regime, _) = regime_of(b);
    let g = b.phi1_transform().gluing();
    let order = g.order();
    if order.is_integer() {
        return Err(AsymptoticsError::IntegerExponent { order: order.value(), regime });
    }
    let a = order.value();
    let d = b.scalars();
    let width = d.theta2_plus - d.theta2_minus;
    assert!(width > 0.0, "branch points must be ordered");
    let sw = width.sqrt();
    let sin_term = 2.0 * a * (a * PI).sin();
    let mu1 = b.params().mu1();
    let c2 = -mu1 * g.w_prime0() * d.theta2_plus * sw / sin_term;
    let c1 = match regime {
        Regime::BoundaryZero => f64::NAN,
        _ => {
            let tp = C64::new(d.theta2_plus, 0.0);
            let dw = g.eval(tp)?.re - g.w0();
            let phi_plus = -mu1 * g.w_prime0() * d.theta2_plus / dw;
            -phi_plus * sin_term / (dw * sw)
        }
    };
    let applicable = match regime {
        Regime::SaddleNeg => Some("c1"),
        Regime::BoundaryZero => Some("c2"),
        Regime::PoleDominant => None,
    };
    Ok(BranchConstants { c1, c2, applicable })
}

pub fn classify_regime(b: &TransformBundle) -> Result<AsymptoticReport, AsymptoticsError> {
    let (regime, t) = regime_of(b);
    let theta_plus = b.scalars().theta2_plus;
    let report = match regime {
        Regime::PoleDominant => AsymptoticReport {
            regime,
            decay_rate: pole_location(b),
            power: 0.0,
            constant: pole_constant(b),
            pole_location: Some(pole_location(b)),
            theta1_at_branch: t,
        },
        Regime::SaddleNeg => {
            let c = constants_c1_c2(b)?;
            AsymptoticReport {
                regime,
                decay_rate: theta_plus,
                power: -1.5,
                constant: -c.c1 / (2.0 * PI.sqrt()),
                pole_location: None,
                theta1_at_branch: t,
            }
        }
        Regime::BoundaryZero => {
            let c = constants_c1_c2(b)?;
            AsymptoticReport {
                regime,
                decay_rate: theta_plus,
                power: -0.5,
                constant: c.c2 / PI.sqrt(),
                pole_location: Some(pole_location(b)),
                theta1_at_branch: t,
            }
        }
    };
    Ok(report)
}

/// Leading-order tail of `ν1` at `x > 0`.
pub fn nu1_tail(b: &TransformBundle, x: f64) -> Result<f64, AsymptoticsError> {
    classify_regime(b)?.tail(x)
}

/// Leading-order tail of `ν2`, from the exchanged model.
pub fn nu2_tail(b: &TransformBundle, x: f64) -> Result<f64, AsymptoticsError> {
    classify_regime(&b.swapped())?.tail(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelParams, IDENTITY};

    fn bundle(sigma: [[f64; 2]; 2], mu: [f64; 2]) -> TransformBundle {
        TransformBundle::new(&ModelParams::orthogonal(sigma, mu).unwrap()).unwrap()
    }

    #[test]
    fn standard_model_is_pole_dominant() {
        let b = bundle(IDENTITY, [-1.0, -1.0]);
        let r = classify_regime(&b).unwrap();
        assert_eq!(r.regime, Regime::PoleDominant);
        assert_eq!(r.decay_rate, 2.0);
        assert_eq!(r.constant, 2.0);
        assert!((nu1_tail(&b, 1.0).unwrap() - 2.0 * (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn diagonal_models_are_pole_dominant() {
        for (s11, s22, m1, m2) in [(0.5, 2.0, -0.3, -1.7), (3.0, 0.2, -2.0, -0.1)] {
            let b = bundle([[s11, 0.0], [0.0, s22]], [m1, m2]);
            let r = classify_regime(&b).unwrap();
            assert_eq!(r.regime, Regime::PoleDominant);
            assert_eq!(r.constant, 2.0 * m1 * m2 / s22);
        }
    }

    #[test]
    fn strongly_correlated_model_is_saddle() {
        let b = bundle([[1.0, 0.8], [0.8, 1.0]], [-0.1, -2.0]);
        let r = classify_regime(&b).unwrap();
        assert_eq!(r.regime, Regime::SaddleNeg);
        assert_eq!(r.power, -1.5);
        assert_eq!(r.decay_rate, b.scalars().theta2_plus);
        assert!(r.constant > 0.0);
        let x = 3.0;
        let comp = nu1_tail(&b, x).unwrap() * x.powf(1.5) * (r.decay_rate * x).exp();
        assert!((comp - r.constant).abs() < 1e-12 * r.constant);
    }

    #[test]
    fn engineered_boundary_model() {
        let b = bundle([[1.0, 0.5], [0.5, 1.0]], [-1.0, -1.0]);
        let r = classify_regime(&b).unwrap();
        assert_eq!(r.regime, Regime::BoundaryZero);
        assert!(r.constant > 0.0);
        // pole and branch point collide
        assert!((pole_location(&b) - b.scalars().theta2_plus).abs() < 1e-12);
        let g = b.phi1_transform().gluing();
        let wp = g.eval(C64::new(b.scalars().theta2_plus, 0.0)).unwrap().re;
        assert!((wp - g.w0()).abs() < 1e-12);
    }

    #[test]
    fn pole_constant_matches_residue() {
        for (sigma, mu) in [
            ([[1.0, -0.3], [-0.3, 1.5]], [-1.0, -0.8]),
            ([[2.0, 0.2], [0.2, 1.0]], [-1.5, -0.4]),
            (IDENTITY, [-1.0, -1.0]),
        ] {
            let b = bundle(sigma, mu);
            assert_eq!(classify_regime(&b).unwrap().regime, Regime::PoleDominant);
            let p = pole_location(&b);
            let eps = 1e-6;
            let v = b.phi1_eval(C64::new(p - eps, 0.0)).unwrap().re * eps;
            let a = pole_constant(&b);
            assert!((v - a).abs() < 1e-4 * a.abs(), "{v} vs {a}");
        }
    }

    #[test]
    fn local_expansion_recovers_c1() {
        let b = bundle([[1.0, 0.8], [0.8, 1.0]], [-0.1, -2.0]);
        let c = constants_c1_c2(&b).unwrap();
        assert_eq!(c.applicable, Some("c1"));
        let tp = b.scalars().theta2_plus;
        let f0 = b.phi1_eval(C64::new(tp, 0.0)).unwrap().re;
        let eps = 1e-10;
        let f = b.phi1_eval(C64::new(tp - eps, 0.0)).unwrap().re;
        let slope = (f0 - f) / eps.sqrt();
        assert!((slope + c.c1).abs() < 1e-3 * c.c1.abs(), "{slope} vs {}", -c.c1);
    }

    #[test]
    fn integer_exponent_withheld_in_branch_regimes() {
        // β = π/3: a = 3, Θ1(θ2⁺) < 0 for strongly negative correlation and skewed drift
        let b = bundle([[1.0, -0.5], [-0.5, 1.0]], [-0.05, -2.0]);
        let (regime, _) = regime_of(&b);
        if regime != Regime::PoleDominant {
            assert!(matches!(classify_regime(&b), Err(AsymptoticsError::IntegerExponent { .. })));
        }
        assert!(matches!(constants_c1_c2(&b), Err(AsymptoticsError::IntegerExponent { .. })));
    }
}
