//! Exact stationary quantities for diagonal covariance and orthogonal reflections.
//!
//! With `λi = -2μi/σii` the stationary density is the product
//! `π(x) = λ1 λ2 e^{-λ1 x1 - λ2 x2}`, and the boundary densities are
//! `ν1(x2) = -μ1 λ2 e^{-λ2 x2}`, `ν2(x1) = -μ2 λ1 e^{-λ1 x1}`.

use num_complex::Complex64;
use thiserror::Error;

use crate::model::ModelParams;

type C64 = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClosedFormError {
    #[error("closed forms need a diagonal covariance (sigma12 = {0})")]
    NotDiagonal(f64),
    #[error("closed forms need orthogonal reflections")]
    NonIdentityReflection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalClosedForms {
    mu: [f64; 2],
    /// Exponential rates `-2μi/σii`.
    lambda: [f64; 2],
}

/// One-dimensional reflected Brownian motion: `E[e^{θZ}] = (2μ/σ)/(θ + 2μ/σ)`.
pub fn one_dimensional_transform(mu: f64, sigma: f64, theta: C64) -> C64 {
    let k = 2.0 * mu / sigma;
    C64::new(k, 0.0) / (theta + k)
}

impl DiagonalClosedForms {
    pub fn new(p: &ModelParams) -> Result<Self, ClosedFormError> {
        if p.s12() != 0.0 {
            return Err(ClosedFormError::NotDiagonal(p.s12()));
        }
        if !p.has_identity_reflection() {
            return Err(ClosedFormError::NonIdentityReflection);
        }
        Ok(Self {
            mu: p.mu(),
            lambda: [-2.0 * p.mu1() / p.s11(), -2.0 * p.mu2() / p.s22()],
        })
    }

    pub fn rates(&self) -> [f64; 2] {
        self.lambda
    }

    pub fn pi(&self, x1: f64, x2: f64) -> f64 {
        let [l1, l2] = self.lambda;
        l1 * l2 * (-l1 * x1 - l2 * x2).exp()
    }

    pub fn nu1(&self, x2: f64) -> f64 {
        let l2 = self.lambda[1];
        -self.mu[0] * l2 * (-l2 * x2).exp()
    }

    pub fn nu2(&self, x1: f64) -> f64 {
        let l1 = self.lambda[0];
        -self.mu[1] * l1 * (-l1 * x1).exp()
    }

    pub fn phi1(&self, theta2: C64) -> C64 {
        let l2 = self.lambda[1];
        C64::new(-self.mu[0] * l2, 0.0) / (C64::new(l2, 0.0) - theta2)
    }

    pub fn phi2(&self, theta1: C64) -> C64 {
        let l1 = self.lambda[0];
        C64::new(-self.mu[1] * l1, 0.0) / (C64::new(l1, 0.0) - theta1)
    }

    pub fn phi(&self, theta1: C64, theta2: C64) -> C64 {
        let [l1, l2] = self.lambda;
        C64::new(l1 * l2, 0.0) / ((C64::new(l1, 0.0) - theta1) * (C64::new(l2, 0.0) - theta2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::IDENTITY;

    #[test]
    fn standard_values() {
        let p = ModelParams::orthogonal(IDENTITY, [-1.0, -1.0]).unwrap();
        let f = DiagonalClosedForms::new(&p).unwrap();
        assert_eq!(f.pi(0.0, 0.0), 4.0);
        assert_eq!(f.nu1(0.0), 2.0);
        let v = f.phi(C64::new(-2.0, 0.0), C64::new(-2.0, 0.0));
        assert!((v.re - 0.25).abs() < 1e-16);
    }

    #[test]
    fn density_normalized_and_factorized() {
        let p = ModelParams::orthogonal([[0.7, 0.0], [0.0, 1.9]], [-0.4, -1.3]).unwrap();
        let f = DiagonalClosedForms::new(&p).unwrap();
        // midpoint rule on [0, 40]², fine enough for these rates
        let n = 2000;
        let h = 40.0 / n as f64;
        let mut mass = 0.0;
        let mut m1 = 0.0;
        for i in 0..n {
            let xi = (i as f64 + 0.5) * h;
            m1 += f.nu1(xi) * h;
            for j in 0..n {
                mass += f.pi(xi, (j as f64 + 0.5) * h) * h * h;
            }
        }
        assert!((mass - 1.0).abs() < 1e-3, "{mass}");
        assert!((m1 + p.mu1()).abs() < 1e-3, "{m1}");
        let (x1, x2) = (0.3, 1.1);
        let prod = f.nu2(x1) / f.nu2(0.0) * f.nu1(x2) / f.nu1(0.0) * f.pi(0.0, 0.0);
        assert!((prod - f.pi(x1, x2)).abs() < 1e-14);
        let one_d = one_dimensional_transform(p.mu1(), p.s11(), C64::new(-0.5, 0.0))
            * one_dimensional_transform(p.mu2(), p.s22(), C64::new(-0.2, 0.0));
        assert!((one_d - f.phi(C64::new(-0.5, 0.0), C64::new(-0.2, 0.0))).norm() < 1e-15);
    }

    #[test]
    fn correlated_model_refused() {
        let p = ModelParams::orthogonal([[1.0, 0.2], [0.2, 1.0]], [-1.0, -1.0]).unwrap();
        assert!(matches!(DiagonalClosedForms::new(&p), Err(ClosedFormError::NotDiagonal(_))));
    }
}
