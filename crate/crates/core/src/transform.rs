//! Explicit Laplace transforms for orthogonal reflections.
//!
//! The boundary transform is
//!
//! ```text
//! φ1(θ2) = -μ1 w'(0) θ2 / (w(θ2) - w(0)),
//! w(θ2)  = T_{π/β}( -(2θ2 - (θ2⁺ + θ2⁻)) / (θ2⁺ - θ2⁻) ),
//! ```
//!
//! `φ2` is the same construction with the coordinates exchanged, and the
//! bivariate transform follows from the kernel equation
//! `-γ(θ) φ(θ) = θ1 φ1(θ2) + θ2 φ2(θ1)`.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::chebyshev::{ChebyshevError, ChebyshevOrder};
use crate::kernel::{self, Branch};
use crate::model::{DerivedScalars, ModelParams};

type C64 = Complex64;

/// Below this modulus `φ1(θ2)` returns its limit at the origin.
pub const REMOVABLE_RADIUS: f64 = 1e-8;
/// Pole test: `|w(θ2) - w(0)| < POLE_TOL · |w'(0) θ2|`.
pub const POLE_TOL: f64 = 1e-12;
/// Smallest `|θ2|` at which a pole can be reported.
pub const POLE_MIN_RADIUS: f64 = 1e-6;
/// `|d̃(θ2)|` below which the continuation check refuses to pick a branch.
pub const BRANCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("explicit transforms need orthogonal reflections (R = I)")]
    NonIdentityReflection,
    #[error("argument {re} lies on the cut ({cut_start}, inf)")]
    OnCut { re: f64, cut_start: f64 },
    #[error("pole of order {order} at {location}")]
    AtPole { location: C64, order: u32 },
    #[error("psi has its pole at the origin")]
    AtZero,
    #[error("({theta1}, {theta2}) lies on the kernel curve; use the directional limit")]
    OnKernelCurve { theta1: C64, theta2: C64 },
    #[error("directional derivative of the kernel vanishes along the given direction")]
    DegenerateDirection,
    #[error("{theta2} is outside the continuation domain")]
    OutsideDomain { theta2: C64 },
    #[error("{theta2} is too close to a branch point of Theta1")]
    BranchAmbiguity { theta2: C64 },
    #[error("w'(0) vanishes; the gluing function is degenerate")]
    DegenerateGluing,
    #[error(transparent)]
    Chebyshev(#[from] ChebyshevError),
}

/// Conformal gluing function `w` for one boundary transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GluingFunction {
    order: ChebyshevOrder,
    theta_plus: f64,
    theta_minus: f64,
    /// `x(0) ∈ (-1, 1)`
    x0: f64,
    w0: f64,
    w_prime0: f64,
}

impl GluingFunction {
    /// Gluing function on the `θ2` side for the given scalars.
    pub fn new(scalars: &DerivedScalars) -> Result<Self, TransformError> {
        let order = ChebyshevOrder::new(scalars.chebyshev_exponent())?;
        Self::with_order(order, scalars.theta2_minus, scalars.theta2_plus)
    }

    pub fn with_order(
        order: ChebyshevOrder,
        theta_minus: f64,
        theta_plus: f64,
    ) -> Result<Self, TransformError> {
        let width = theta_plus - theta_minus;
        let x0 = (theta_plus + theta_minus) / width;
        let w0 = order.t(C64::new(x0, 0.0))?.re;
        let w_prime0 = -2.0 / width * order.t_prime(C64::new(x0, 0.0))?.re;
        if w_prime0 == 0.0 || !w_prime0.is_finite() {
            return Err(TransformError::DegenerateGluing);
        }
        Ok(Self { order, theta_plus, theta_minus, x0, w0, w_prime0 })
    }

    pub fn order(&self) -> &ChebyshevOrder {
        &self.order
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    pub fn w_prime0(&self) -> f64 {
        self.w_prime0
    }

    /// Affine map sending `θ⁻ ↦ 1` and `θ⁺ ↦ -1`.
    pub fn arg(&self, theta: C64) -> C64 {
        // exact at both branch points
        ((self.theta_plus - theta) + (self.theta_minus - theta)) / (self.theta_plus - self.theta_minus)
    }

    fn on_cut(&self, theta: C64) -> TransformError {
        TransformError::OnCut { re: theta.re, cut_start: self.theta_plus }
    }

    fn map_cheb(&self, theta: C64, e: ChebyshevError) -> TransformError {
        match e {
            ChebyshevError::OnCut { .. } => self.on_cut(theta),
            other => other.into(),
        }
    }

    pub fn eval(&self, theta: C64) -> Result<C64, TransformError> {
        self.order.t(self.arg(theta)).map_err(|e| self.map_cheb(theta, e))
    }

    pub fn deriv(&self, theta: C64) -> Result<C64, TransformError> {
        let dx = -2.0 / (self.theta_plus - self.theta_minus);
        Ok(self.order.t_prime(self.arg(theta)).map_err(|e| self.map_cheb(theta, e))? * dx)
    }

    /// `w(θ) - w(0)` without cancellation for small `θ`.
    pub fn diff_from_origin(&self, theta: C64) -> Result<C64, TransformError> {
        let dx = theta * (-2.0 / (self.theta_plus - self.theta_minus));
        if dx.norm() >= 0.5 * (1.0 - self.x0.abs()) {
            return Ok(self.eval(theta)? - self.w0);
        }
        self.order.diff_from_interior(self.x0, dx).map_err(|e| self.map_cheb(theta, e))
    }
}

/// One boundary transform `φ(θ) = mass · w'(0) θ / (w(θ) - w(0))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryTransform {
    mass: f64,
    gluing: GluingFunction,
}

impl BoundaryTransform {
    pub fn new(p: &ModelParams) -> Result<Self, TransformError> {
        Ok(Self { mass: -p.mu1(), gluing: GluingFunction::new(&p.derived())? })
    }

    pub fn gluing(&self) -> &GluingFunction {
        &self.gluing
    }

    /// Total mass of the boundary measure, the value at the origin.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn eval(&self, theta: C64) -> Result<C64, TransformError> {
        if theta.norm() < REMOVABLE_RADIUS {
            return Ok(C64::new(self.mass, 0.0));
        }
        let denom = self.gluing.diff_from_origin(theta)?;
        let scale = (theta * self.gluing.w_prime0).norm();
        if theta.norm() > POLE_MIN_RADIUS && denom.norm() < POLE_TOL * scale {
            return Err(TransformError::AtPole { location: theta, order: 1 });
        }
        if denom.norm() == 0.0 {
            return Err(TransformError::AtPole { location: theta, order: 1 });
        }
        Ok(theta * (self.mass * self.gluing.w_prime0) / denom)
    }

    /// Derivative, analytic away from the origin and by central difference next to it.
    pub fn deriv(&self, theta: C64) -> Result<C64, TransformError> {
        if theta.norm() < 1e-5 {
            let h = 1e-4;
            let fp = self.eval(theta + h)?;
            let fm = self.eval(theta - h)?;
            return Ok((fp - fm) / (2.0 * h));
        }
        let denom = self.gluing.diff_from_origin(theta)?;
        let wp = self.gluing.deriv(theta)?;
        let k = self.mass * self.gluing.w_prime0;
        Ok((denom - theta * wp) * k / (denom * denom))
    }
}

/// Evaluators for `w`, `φ1`, `φ2`, `φ`, `ψ1`, `ψ2` of a model with `R = I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformBundle {
    params: ModelParams,
    scalars: DerivedScalars,
    /// `θ2`-side transform `φ1`.
    side1: BoundaryTransform,
    /// `θ1`-side transform `φ2`, built from the exchanged model.
    side2: BoundaryTransform,
}

/// Outcome of the continuation cross-check at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuationResidual {
    pub theta2: C64,
    pub theta1: C64,
    pub direct: C64,
    pub continued: C64,
    pub abs: f64,
    pub rel: f64,
}

impl TransformBundle {
    pub fn new(params: &ModelParams) -> Result<Self, TransformError> {
        if !params.has_identity_reflection() {
            return Err(TransformError::NonIdentityReflection);
        }
        Ok(Self {
            params: *params,
            scalars: params.derived(),
            side1: BoundaryTransform::new(params)?,
            side2: BoundaryTransform::new(&params.swapped())?,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn scalars(&self) -> &DerivedScalars {
        &self.scalars
    }

    /// Bundle of the model with the two coordinates exchanged.
    pub fn swapped(&self) -> TransformBundle {
        TransformBundle {
            params: self.params.swapped(),
            scalars: self.params.swapped().derived(),
            side1: self.side2,
            side2: self.side1,
        }
    }

    pub fn phi1_transform(&self) -> &BoundaryTransform {
        &self.side1
    }

    pub fn phi2_transform(&self) -> &BoundaryTransform {
        &self.side2
    }

    pub fn w1_prime0(&self) -> f64 {
        self.side1.gluing.w_prime0
    }

    pub fn w2_prime0(&self) -> f64 {
        self.side2.gluing.w_prime0
    }

    pub fn phi1_at_0(&self) -> f64 {
        self.side1.mass
    }

    pub fn phi2_at_0(&self) -> f64 {
        self.side2.mass
    }

    /// `w(θ2)`.
    pub fn w_eval(&self, theta2: C64) -> Result<C64, TransformError> {
        self.side1.gluing.eval(theta2)
    }

    /// Gluing function of the `θ1` side.
    pub fn w2_eval(&self, theta1: C64) -> Result<C64, TransformError> {
        self.side2.gluing.eval(theta1)
    }

    pub fn phi1_eval(&self, theta2: C64) -> Result<C64, TransformError> {
        self.side1.eval(theta2)
    }

    pub fn phi2_eval(&self, theta1: C64) -> Result<C64, TransformError> {
        self.side2.eval(theta1)
    }

    pub fn psi1_eval(&self, theta2: C64) -> Result<C64, TransformError> {
        if theta2.norm() == 0.0 {
            return Err(TransformError::AtZero);
        }
        Ok(self.phi1_eval(theta2)? / theta2)
    }

    pub fn psi2_eval(&self, theta1: C64) -> Result<C64, TransformError> {
        if theta1.norm() == 0.0 {
            return Err(TransformError::AtZero);
        }
        Ok(self.phi2_eval(theta1)? / theta1)
    }

    fn on_kernel(&self, t1: C64, t2: C64) -> bool {
        let g = kernel::gamma(&self.params, t1, t2).norm();
        g <= 1e-14 * (1.0 + t1.norm_sqr() + t2.norm_sqr()) * self.params.scale()
    }

    /// Bivariate transform `φ(θ1, θ2)`. Refused on the kernel curve except at
    /// the origin, where the value is the total mass 1.
    pub fn phi_eval(&self, theta1: C64, theta2: C64) -> Result<C64, TransformError> {
        if theta1.norm() == 0.0 && theta2.norm() == 0.0 {
            return Ok(C64::new(1.0, 0.0));
        }
        if self.on_kernel(theta1, theta2) {
            return Err(TransformError::OnKernelCurve { theta1, theta2 });
        }
        let num = theta1 * self.phi1_eval(theta2)? + theta2 * self.phi2_eval(theta1)?;
        Ok(-num / kernel::gamma(&self.params, theta1, theta2))
    }

    /// Limit of `φ` at a kernel point approached along `direction`.
    pub fn phi_limit(
        &self,
        theta1: C64,
        theta2: C64,
        direction: (C64, C64),
    ) -> Result<C64, TransformError> {
        let (v1, v2) = direction;
        let (g1, g2) = kernel::gamma_gradient(&self.params, theta1, theta2);
        let dgamma = g1 * v1 + g2 * v2;
        if dgamma.norm() <= 1e-14 * (v1.norm() + v2.norm()) * self.params.scale() {
            return Err(TransformError::DegenerateDirection);
        }
        let phi1 = self.phi1_eval(theta2)?;
        let phi2 = self.phi2_eval(theta1)?;
        let mut dnum = v1 * phi1 + v2 * phi2;
        if theta1.norm() > 0.0 {
            dnum += theta1 * self.side1.deriv(theta2)? * v2;
        }
        if theta2.norm() > 0.0 {
            dnum += theta2 * self.side2.deriv(theta1)? * v1;
        }
        Ok(-dnum / dgamma)
    }

    /// Compares `φ1(θ2)` with its continuation `-(θ2/Θ1⁻(θ2)) φ2(Θ1⁻(θ2))`
    /// obtained from the kernel equation at `(Θ1⁻(θ2), θ2)`.
    pub fn continuation_check(&self, theta2: C64) -> Result<ContinuationResidual, TransformError> {
        if theta2.norm() < REMOVABLE_RADIUS {
            let v = C64::new(self.phi1_at_0(), 0.0);
            return Ok(ContinuationResidual {
                theta2,
                theta1: C64::new(0.0, 0.0),
                direct: v,
                continued: v,
                abs: 0.0,
                rel: 0.0,
            });
        }
        let disc = kernel::discriminant_d_tilde(&self.params, theta2);
        if disc.norm() < BRANCH_TOL {
            return Err(TransformError::BranchAmbiguity { theta2 });
        }
        let theta1 = kernel::theta1_branch(&self.params, theta2, Branch::Minus);
        if !(theta2.re <= 0.0 || theta1.re < 0.0) {
            return Err(TransformError::OutsideDomain { theta2 });
        }
        if theta1.norm() == 0.0 {
            return Err(TransformError::AtPole { location: theta2, order: 1 });
        }
        let direct = self.phi1_eval(theta2)?;
        let continued = -(theta2 / theta1) * self.phi2_eval(theta1)?;
        let abs = (direct - continued).norm();
        let rel = abs / direct.norm().max(continued.norm()).max(f64::MIN_POSITIVE);
        Ok(ContinuationResidual { theta2, theta1, direct, continued, abs, rel })
    }
}
