//! Rational parametrization of the kernel zero set by the Riemann sphere.
//!
//! ```text
//! θ1(s) = (θ1⁺ + θ1⁻)/2 + (θ1⁺ - θ1⁻)/4 · (s + 1/s)
//! θ2(s) = (θ2⁺ + θ2⁻)/2 + (θ2⁺ - θ2⁻)/4 · (s e^{-iβ} + e^{iβ}/s)
//! ```
//!
//! The covering automorphisms `ζ(s) = 1/s` and `η(s) = e^{2iβ}/s` fix `θ1`
//! and `θ2` respectively; `ζη` is the rotation by `-2β`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::chebyshev::{ChebyshevOrder, Nature};
use crate::model::ModelParams;

type C64 = Complex64;

pub const DEFAULT_QMAX: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UniformizationError {
    #[error("s = {0} maps to the point at infinity of the kernel surface")]
    AtZeroOrInfinity(C64),
    #[error("s = {0} lies on the cut [0, inf) of the lifted gluing function")]
    OnLogCut(C64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Uniformization {
    beta: f64,
    order: f64,
    c1: f64,
    r1: f64,
    c2: f64,
    r2: f64,
    rot: C64,
}

impl Uniformization {
    pub fn new(p: &ModelParams) -> Self {
        let d = p.derived();
        Self {
            beta: d.beta,
            order: d.chebyshev_exponent(),
            c1: 0.5 * (d.theta1_plus + d.theta1_minus),
            r1: 0.25 * (d.theta1_plus - d.theta1_minus),
            c2: 0.5 * (d.theta2_plus + d.theta2_minus),
            r2: 0.25 * (d.theta2_plus - d.theta2_minus),
            rot: C64::from_polar(1.0, d.beta),
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn theta1(&self, s: C64) -> Result<C64, UniformizationError> {
        check_finite(s)?;
        Ok(self.c1 + (s + s.inv()) * self.r1)
    }

    pub fn theta2(&self, s: C64) -> Result<C64, UniformizationError> {
        check_finite(s)?;
        Ok(self.c2 + (s / self.rot + self.rot / s) * self.r2)
    }

    pub fn theta_of_s(&self, s: C64) -> Result<(C64, C64), UniformizationError> {
        Ok((self.theta1(s)?, self.theta2(s)?))
    }

    /// The unit-circle point mapped to the origin `(0, 0)`.
    pub fn s0(&self) -> C64 {
        // s + 1/s = 2cos φ = -c1/r1; choose the sign of φ that also zeroes θ2
        let cos_phi = (-self.c1 / (2.0 * self.r1)).clamp(-1.0, 1.0);
        let phi = cos_phi.acos();
        let a = C64::from_polar(1.0, phi);
        let b = C64::from_polar(1.0, -phi);
        let ta = self.theta2(a).map(|t| t.norm()).unwrap_or(f64::INFINITY);
        let tb = self.theta2(b).map(|t| t.norm()).unwrap_or(f64::INFINITY);
        if ta < tb {
            a
        } else {
            b
        }
    }

    /// Lifted gluing function `W(s) = -cosh(π/β · Log(-s))`.
    pub fn w_of_s(&self, s: C64) -> Result<C64, UniformizationError> {
        if s.im == 0.0 && s.re >= 0.0 {
            return Err(UniformizationError::OnLogCut(s));
        }
        Ok(-((-s).ln() * self.order).cosh())
    }

    pub fn zeta(&self, s: C64) -> Result<C64, UniformizationError> {
        check_finite(s)?;
        Ok(s.inv())
    }

    pub fn eta(&self, s: C64) -> Result<C64, UniformizationError> {
        check_finite(s)?;
        Ok(self.rot * self.rot / s)
    }

    /// Image of the domain `G_R`: the open cone between the rays `(0, -∞)`
    /// and `(0, -e^{iβ}∞)`.
    pub fn in_lifted_cone(&self, s: C64) -> bool {
        if s.norm() == 0.0 || !s.is_finite() {
            return false;
        }
        let arg = (-s).arg();
        arg > 0.0 && arg < self.beta
    }

    /// Largest deviation of `θ1∘ζ = θ1` and `θ2∘η = θ2` at `s`.
    pub fn invariance_defect(&self, s: C64) -> Result<f64, UniformizationError> {
        let d1 = (self.theta1(self.zeta(s)?)? - self.theta1(s)?).norm();
        let d2 = (self.theta2(self.eta(s)?)? - self.theta2(s)?).norm();
        Ok(d1.max(d2))
    }
}

fn check_finite(s: C64) -> Result<(), UniformizationError> {
    if s.norm() == 0.0 || !s.is_finite() {
        Err(UniformizationError::AtZeroOrInfinity(s))
    } else {
        Ok(())
    }
}

/// Best rational approximation `p/q` of `x` within the denominator bound,
/// accepted when `|x - p/q| < 1e-12/q²`.
pub fn detect_rational(x: f64, qmax: u64) -> Option<(u64, u64, f64)> {
    if !(x.is_finite() && x > 0.0) {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a > 1e15 {
            break;
        }
        let a = a as u128;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > qmax as u128 {
            break;
        }
        let residual = (x - p2 as f64 / q2 as f64).abs();
        if residual < 1e-12 / (q2 as f64 * q2 as f64) {
            return Some((p2 as u64, q2 as u64, residual));
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = r - a as f64;
        if frac == 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupReport {
    /// True when `π/β` was recognised as rational within the bound.
    pub finite: bool,
    /// Order of the dihedral group `<ζ, η>`.
    pub order: Option<u64>,
    /// Order of the rotation `ζη`.
    pub rotation_order: Option<u64>,
    pub ratio: Option<(u64, u64)>,
    pub residual: Option<f64>,
    pub exponent: f64,
    pub qmax: u64,
}

/// Decides finiteness of `<ζ, η>` through rationality of `π/β`.
pub fn group_order(p: &ModelParams, qmax: u64) -> GroupReport {
    let exponent = PI / p.derived().beta;
    match detect_rational(exponent, qmax) {
        Some((num, den, residual)) => {
            // ζη rotates by -2β = -2πq/p; its order is the least n with n·q/p ∈ ℤ
            let n = num / gcd(num, den);
            GroupReport {
                finite: true,
                order: Some(2 * n),
                rotation_order: Some(n),
                ratio: Some((num, den)),
                residual: Some(residual),
                exponent,
                qmax,
            }
        }
        None => GroupReport {
            finite: false,
            order: None,
            rotation_order: None,
            ratio: None,
            residual: None,
            exponent,
            qmax,
        },
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Finite group ⟺ algebraic `φ1`; integer `π/β` ⟹ rational `φ1`.
pub fn classify_solution_nature(report: &GroupReport) -> Nature {
    ChebyshevOrder::with_certificate(report.exponent, report.ratio)
        .map(|o| o.classify_nature())
        .unwrap_or(Nature::TranscendentalDFinite)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel;
    use crate::model::IDENTITY;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn standard() -> (ModelParams, Uniformization) {
        let p = ModelParams::orthogonal(IDENTITY, [-1.0, -1.0]).unwrap();
        (p, Uniformization::new(&p))
    }

    #[test]
    fn branch_points_at_unit_and_rotation() {
        let p = ModelParams::orthogonal([[1.0, 0.3], [0.3, 2.0]], [-0.5, -1.1]).unwrap();
        let u = Uniformization::new(&p);
        let d = p.derived();
        assert!((u.theta1(c(1.0, 0.0)).unwrap().re - d.theta1_plus).abs() < 1e-14);
        assert!((u.theta1(c(-1.0, 0.0)).unwrap().re - d.theta1_minus).abs() < 1e-14);
        let e = C64::from_polar(1.0, d.beta);
        assert!((u.theta2(e).unwrap() - d.theta2_plus).norm() < 1e-13);
        assert!((u.theta2(-e).unwrap() - d.theta2_minus).norm() < 1e-13);
    }

    #[test]
    fn standard_origin_point() {
        let (p, u) = standard();
        let s0 = u.s0();
        assert!((s0 - C64::from_polar(1.0, -0.75 * PI)).norm() < 1e-14);
        let (t1, t2) = u.theta_of_s(s0).unwrap();
        assert!(t1.norm() + t2.norm() < 1e-14);
        let t2p = u.theta2(s0.inv()).unwrap();
        assert!((t2p - c(-2.0 * p.mu2() / p.s22(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn parametrization_lies_on_kernel() {
        let p = ModelParams::orthogonal([[1.2, -0.4], [-0.4, 0.7]], [-0.3, -0.9]).unwrap();
        let u = Uniformization::new(&p);
        for k in 0..50 {
            let s = C64::from_polar(0.2 + 0.1 * k as f64, 0.37 * k as f64);
            let (t1, t2) = u.theta_of_s(s).unwrap();
            let g = kernel::gamma(&p, t1, t2).norm();
            assert!(g < 1e-12 * (1.0 + t1.norm_sqr() + t2.norm_sqr()), "{g}");
        }
    }

    #[test]
    fn lifted_gluing_values() {
        let (_, u) = standard();
        assert!((u.w_of_s(c(-1.0, 0.0)).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
        assert!(matches!(u.w_of_s(c(2.0, 0.0)), Err(UniformizationError::OnLogCut(_))));
        assert!(matches!(u.theta1(c(0.0, 0.0)), Err(UniformizationError::AtZeroOrInfinity(_))));
    }

    #[test]
    fn rational_detection() {
        assert_eq!(detect_rational(2.0, DEFAULT_QMAX).map(|r| (r.0, r.1)), Some((2, 1)));
        assert_eq!(detect_rational(1.5, DEFAULT_QMAX).map(|r| (r.0, r.1)), Some((3, 2)));
        assert_eq!(detect_rational(PI / 0.9, DEFAULT_QMAX), None);
    }

    #[test]
    fn group_orders() {
        let (p, _) = standard();
        let g = group_order(&p, DEFAULT_QMAX);
        assert!(g.finite);
        assert_eq!(g.order, Some(4));
        assert_eq!(classify_solution_nature(&g), Nature::RationalPolynomial);

        let p3 = ModelParams::orthogonal([[1.0, -0.5], [-0.5, 1.0]], [-1.0, -1.0]).unwrap();
        let g3 = group_order(&p3, DEFAULT_QMAX);
        assert_eq!(g3.order, Some(6));

        // β = 2π/3: π/β = 3/2, rotation by -4π/3 has order 3
        let p32 = ModelParams::orthogonal([[1.0, 0.5], [0.5, 1.0]], [-1.0, -1.0]).unwrap();
        let g32 = group_order(&p32, DEFAULT_QMAX);
        assert_eq!(g32.ratio, Some((3, 2)));
        assert_eq!(g32.order, Some(6));
        assert_eq!(classify_solution_nature(&g32), Nature::AlgebraicNonpolynomial);

        let pg = ModelParams::orthogonal([[1.0, 0.3], [0.3, 2.0]], [-1.0, -1.0]).unwrap();
        let gg = group_order(&pg, DEFAULT_QMAX);
        assert!(!gg.finite);
        assert_eq!(classify_solution_nature(&gg), Nature::TranscendentalDFinite);
    }

    #[test]
    fn rotation_power_is_identity() {
        let p = ModelParams::orthogonal([[1.0, 0.5], [0.5, 1.0]], [-1.0, -1.0]).unwrap();
        let u = Uniformization::new(&p);
        let n = group_order(&p, DEFAULT_QMAX).rotation_order.unwrap();
        let s0 = c(0.3, -1.7);
        let mut s = s0;
        for _ in 0..n {
            s = u.zeta(u.eta(s).unwrap()).unwrap();
        }
        assert!((s - s0).norm() < 1e-13);
    }
}
