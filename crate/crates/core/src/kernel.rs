//! Algebra of the kernel `γ(θ1, θ2) = ½⟨θ, Σθ⟩ + ⟨θ, μ⟩`.
//!
//! The zero set of the kernel defines two two-valued algebraic functions
//! `Θ2±(θ1)` and `Θ1±(θ2)`. Their branch points are the roots of the
//! discriminants `d` and `d̃`. For real `θ1 < θ1⁻` the two values `Θ2±(θ1)` are
//! complex conjugate and trace a branch of a hyperbola `R`; the open domain
//! bounded by `R` and containing the origin is `G_R`.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::model::ModelParams;

pub type C64 = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("point {re} + {im}i is not on the curve R (residual {residual:e})")]
    NotOnCurve { re: f64, im: f64, residual: f64 },
    #[error("vanishing denominator in the boundary ratio ({which})")]
    ZeroDenominator { which: &'static str },
}

/// Label of a root of the kernel quadratic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
    Unspecified,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Minus => -1.0,
            _ => 1.0,
        }
    }
}

/// A zero `(θ1, θ2)` of the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelPoint {
    pub theta1: C64,
    pub theta2: C64,
    pub branch: Branch,
}

impl KernelPoint {
    /// `|γ(θ1, θ2)|` relative to `(1 + |θ1|² + |θ2|²) · scale`.
    pub fn residual(&self, p: &ModelParams) -> f64 {
        let g = gamma(p, self.theta1, self.theta2).norm();
        g / ((1.0 + self.theta1.norm_sqr() + self.theta2.norm_sqr()) * p.scale())
    }
}

/// Coefficients of `γ` seen as a quadratic in `θ2` (`a, b, c`) or in `θ1`
/// (`ã, b̃, c̃`).
#[derive(Debug, Clone, Copy)]
pub struct KernelCoeffs<'a> {
    p: &'a ModelParams,
}

impl<'a> KernelCoeffs<'a> {
    pub fn new(p: &'a ModelParams) -> Self {
        Self { p }
    }

    pub fn a(&self) -> f64 {
        0.5 * self.p.s22()
    }

    pub fn b(&self, t1: C64) -> C64 {
        t1 * self.p.s12() + self.p.mu2()
    }

    pub fn c(&self, t1: C64) -> C64 {
        t1 * t1 * (0.5 * self.p.s11()) + t1 * self.p.mu1()
    }

    pub fn a_tilde(&self) -> f64 {
        0.5 * self.p.s11()
    }

    pub fn b_tilde(&self, t2: C64) -> C64 {
        t2 * self.p.s12() + self.p.mu1()
    }

    pub fn c_tilde(&self, t2: C64) -> C64 {
        t2 * t2 * (0.5 * self.p.s22()) + t2 * self.p.mu2()
    }
}

pub fn gamma(p: &ModelParams, t1: C64, t2: C64) -> C64 {
    (t1 * t1 * p.s11() + t2 * t2 * p.s22() + t1 * t2 * (2.0 * p.s12())) * 0.5
        + t1 * p.mu1()
        + t2 * p.mu2()
}

/// `⟨R¹, θ⟩`
pub fn gamma1(p: &ModelParams, t1: C64, t2: C64) -> C64 {
    let r = p.r();
    t1 * r[0][0] + t2 * r[1][0]
}

/// `⟨R², θ⟩`
pub fn gamma2(p: &ModelParams, t1: C64, t2: C64) -> C64 {
    let r = p.r();
    t1 * r[0][1] + t2 * r[1][1]
}

/// Gradient of `γ` at `(θ1, θ2)`.
pub fn gamma_gradient(p: &ModelParams, t1: C64, t2: C64) -> (C64, C64) {
    (
        t1 * p.s11() + t2 * p.s12() + p.mu1(),
        t1 * p.s12() + t2 * p.s22() + p.mu2(),
    )
}

/// `d(θ1)`, the discriminant of `γ(θ1, ·)`.
pub fn discriminant_d(p: &ModelParams, t1: C64) -> C64 {
    let det = p.det_sigma();
    -t1 * t1 * det + t1 * (2.0 * (p.mu2() * p.s12() - p.mu1() * p.s22())) + p.mu2() * p.mu2()
}

/// `d̃(θ2)`, the discriminant of `γ(·, θ2)`.
pub fn discriminant_d_tilde(p: &ModelParams, t2: C64) -> C64 {
    let det = p.det_sigma();
    -t2 * t2 * det + t2 * (2.0 * (p.mu1() * p.s12() - p.mu2() * p.s11())) + p.mu1() * p.mu1()
}

/// Both discriminants: `(d(θ1), d̃(θ2))`.
pub fn discriminants(p: &ModelParams, t1: C64, t2: C64) -> (C64, C64) {
    (discriminant_d(p, t1), discriminant_d_tilde(p, t2))
}

/// `Θ2±(θ1) = (-b(θ1) ± √d(θ1)) / 2a`, principal square root.
pub fn theta2_branch(p: &ModelParams, t1: C64, branch: Branch) -> C64 {
    let k = KernelCoeffs::new(p);
    (-k.b(t1) + discriminant_d(p, t1).sqrt() * branch.sign()) / (2.0 * k.a())
}

/// `Θ1±(θ2) = (-b̃(θ2) ± √d̃(θ2)) / 2ã`, principal square root.
pub fn theta1_branch(p: &ModelParams, t2: C64, branch: Branch) -> C64 {
    let k = KernelCoeffs::new(p);
    (-k.b_tilde(t2) + discriminant_d_tilde(p, t2).sqrt() * branch.sign()) / (2.0 * k.a_tilde())
}

/// Follows one root `Θ2(θ1)` continuously along `path`, starting from the
/// principal-labelled `start` branch at `path[0]`.
///
/// At each step the root closest to the previous value is kept, so the result
/// is the analytic continuation along the path as long as the path steps are
/// small compared to the distance to the branch points.
pub fn track_theta2(p: &ModelParams, path: &[C64], start: Branch) -> Vec<C64> {
    let mut out = Vec::with_capacity(path.len());
    let Some(&first) = path.first() else { return out };
    let mut prev = theta2_branch(p, first, start);
    out.push(prev);
    for &t1 in &path[1..] {
        let plus = theta2_branch(p, t1, Branch::Plus);
        let minus = theta2_branch(p, t1, Branch::Minus);
        prev = if (plus - prev).norm() <= (minus - prev).norm() { plus } else { minus };
        out.push(prev);
    }
    out
}

/// Same as [`track_theta2`] for `Θ1(θ2)`.
pub fn track_theta1(p: &ModelParams, path: &[C64], start: Branch) -> Vec<C64> {
    let swapped = p.swapped();
    track_theta2(&swapped, path, start)
}

/// `Θ1(θ2⁺) = -(σ12 θ2⁺ + μ1)/σ11`, the double root above the branch point `θ2⁺`.
///
/// Its sign decides which singularity of `φ1` is closest to the origin.
pub fn theta1_at_branch_point(p: &ModelParams) -> f64 {
    let t2p = p.derived().theta2_plus;
    -(p.s12() * t2p + p.mu1()) / p.s11()
}

/// The branch `R = Θ2±((-∞, θ1⁻))` of the hyperbola
/// `A x² + B y² + D x = E` in `θ2 = x + iy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HyperbolaR {
    pub coeff_x2: f64,
    pub coeff_y2: f64,
    pub coeff_x: f64,
    pub rhs: f64,
    pub theta1_minus: f64,
    /// Real point of `R`, `Θ2(θ1⁻)`.
    pub apex: f64,
    /// `σ12 = 0`: `R` is the vertical line `Re θ2 = apex`.
    pub degenerate: bool,
    s11: f64,
    s12: f64,
    s22: f64,
    mu1: f64,
    mu2: f64,
    det: f64,
}

pub fn hyperbola(p: &ModelParams) -> HyperbolaR {
    let (s11, s12, s22) = (p.s11(), p.s12(), p.s22());
    let (m1, m2) = (p.mu1(), p.mu2());
    let t1m = p.derived().theta1_minus;
    HyperbolaR {
        coeff_x2: s22 * (s12 * s12 - s11 * s22),
        coeff_y2: s12 * s12 * s22,
        coeff_x: -2.0 * s22 * (s11 * m2 - s12 * m1),
        rhs: m2 * (s11 * m2 - 2.0 * s12 * m1),
        theta1_minus: t1m,
        apex: -(s12 * t1m + m2) / s22,
        degenerate: s12 == 0.0,
        s11,
        s12,
        s22,
        mu1: m1,
        mu2: m2,
        det: p.det_sigma(),
    }
}

impl HyperbolaR {
    /// Residual of the quadratic at `θ2`, normalized by the magnitude of its terms.
    pub fn residual(&self, t2: C64) -> f64 {
        let (x, y) = (t2.re, t2.im);
        let terms = [self.coeff_x2 * x * x, self.coeff_y2 * y * y, self.coeff_x * x, -self.rhs];
        let scale = terms.iter().fold(1e-300_f64, |m, t| m.max(t.abs()));
        terms.iter().sum::<f64>().abs() / scale
    }

    /// Point `Θ2⁺(θ1)` of the curve for `θ1 < θ1⁻` (upper half plane).
    pub fn point(&self, t1: f64) -> C64 {
        let x = -(self.s12 * t1 + self.mu2) / self.s22;
        let d = -t1 * t1 * self.det + 2.0 * t1 * (self.mu2 * self.s12 - self.mu1 * self.s22)
            + self.mu2 * self.mu2;
        C64::new(x, (-d).max(0.0).sqrt() / self.s22)
    }

    /// Half-height `|Im θ2|` of the curve above `Re θ2 = x`, when `x` is in its range.
    fn half_height(&self, x: f64) -> Option<f64> {
        if self.degenerate {
            return None;
        }
        let t1 = -(self.s22 * x + self.mu2) / self.s12;
        if t1 > self.theta1_minus {
            return None;
        }
        let d = -t1 * t1 * self.det + 2.0 * t1 * (self.mu2 * self.s12 - self.mu1 * self.s22)
            + self.mu2 * self.mu2;
        Some((-d).max(0.0).sqrt() / self.s22)
    }

    /// Signed "inside" margin: positive inside `G_R`, negative outside, zero on `R`.
    fn margin(&self, t2: C64) -> f64 {
        let (x, y) = (t2.re, t2.im.abs());
        if self.degenerate {
            return self.apex - x;
        }
        // σ12 > 0: arms open to the right of the apex, G_R surrounds them.
        // σ12 < 0: arms open to the left, G_R lies between them.
        let opens_right = self.s12 > 0.0;
        let beyond = if opens_right { x >= self.apex } else { x <= self.apex };
        match (beyond, self.half_height(x)) {
            (true, Some(h)) => {
                if opens_right {
                    y - h
                } else {
                    h - y
                }
            }
            (true, None) => 0.0,
            (false, _) => {
                if opens_right {
                    self.apex - x
                } else {
                    x - self.apex
                }
            }
        }
    }

    /// Membership of the open domain bounded by `R` and containing the origin.
    /// Points within `tol · (1 + |θ2|)` of the curve count as boundary.
    pub fn contains(&self, t2: C64, tol: f64) -> bool {
        self.margin(t2) > tol * (1.0 + t2.norm())
    }
}

/// Boundary membership tolerance used by [`contains_g_r`].
pub const CURVE_TOL: f64 = 1e-8;

/// `θ2 ∈ G_R`.
pub fn contains_g_r(p: &ModelParams, t2: C64) -> bool {
    hyperbola(p).contains(t2, 1e-12)
}

/// The two factors of the boundary ratio `G` on `R` and their product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GRatio {
    /// `(γ1/γ2)(Θ1⁻(θ2), θ2)`
    pub first: C64,
    /// `(γ2/γ1)(Θ1⁻(θ2), conj θ2)`
    pub second: C64,
    pub value: C64,
    /// The real kernel partner `Θ1⁻(θ2) < θ1⁻` of `θ2`.
    pub theta1: C64,
}

/// Boundary ratio `G(θ2)` for `θ2 ∈ R`, with general reflection matrix.
///
/// On `R`, `Θ1⁻(θ2)` is the real root of `γ(·, θ2)` in `(-∞, θ1⁻)`, i.e. the
/// parameter value from which the point was produced.
pub fn g_ratio(p: &ModelParams, t2: C64) -> Result<GRatio, KernelError> {
    g_ratio_with_reflection(p, p.r(), t2)
}

/// [`g_ratio`] with an explicit reflection matrix in place of the model's own.
///
/// The curve `R` depends only on `(Σ, μ)`; this lets non-ergodic reflection
/// matrices (for instance parallel reflections) be examined.
pub fn g_ratio_with_reflection(
    p: &ModelParams,
    r: [[f64; 2]; 2],
    t2: C64,
) -> Result<GRatio, KernelError> {
    let h = hyperbola(p);
    let scale = 1.0 + t2.norm();
    // Distance test against the parametrization, valid also in the degenerate case.
    let t1 = real_kernel_partner(p, t2);
    let on_curve_dist = match t1 {
        Some(t1) if t1 <= h.theta1_minus + CURVE_TOL * (1.0 + t1.abs()) => {
            let q = h.point(t1.min(h.theta1_minus));
            (q - C64::new(t2.re, t2.im.abs())).norm()
        }
        _ => f64::INFINITY,
    };
    if on_curve_dist > CURVE_TOL * scale {
        return Err(KernelError::NotOnCurve { re: t2.re, im: t2.im, residual: h.residual(t2) });
    }
    let t1 = C64::new(t1.unwrap(), 0.0);
    let g1 = |a: C64, b: C64| a * r[0][0] + b * r[1][0];
    let g2 = |a: C64, b: C64| a * r[0][1] + b * r[1][1];
    let g1a = g1(t1, t2);
    let g2a = g2(t1, t2);
    let g1b = g1(t1, t2.conj());
    let g2b = g2(t1, t2.conj());
    let eps = 1e-300;
    if g2a.norm() <= eps {
        return Err(KernelError::ZeroDenominator { which: "gamma2 at theta2" });
    }
    if g1b.norm() <= eps {
        return Err(KernelError::ZeroDenominator { which: "gamma1 at conj(theta2)" });
    }
    let first = g1a / g2a;
    let second = g2b / g1b;
    Ok(GRatio { first, second, value: first * second, theta1: t1 })
}

/// Real `θ1` with `γ(θ1, θ2) = 0`, for `θ2` on (or within tolerance of) `R`.
fn real_kernel_partner(p: &ModelParams, t2: C64) -> Option<f64> {
    // Re Θ2±(θ1) = -(σ12 θ1 + μ2)/σ22 is affine in θ1 off the degenerate case.
    if p.s12() != 0.0 {
        return Some(-(p.s22() * t2.re + p.mu2()) / p.s12());
    }
    // Degenerate line: solve |Im θ2| = √(-d(θ1))/σ22 for θ1 < θ1⁻.
    let d_target = -(t2.im * p.s22()).powi(2);
    let det = p.det_sigma();
    let lin = 2.0 * (p.mu2() * p.s12() - p.mu1() * p.s22());
    let c0 = p.mu2() * p.mu2() - d_target;
    let disc = lin * lin + 4.0 * det * c0;
    if disc < 0.0 {
        return None;
    }
    // smaller root of -det t² + lin t + c0 = 0
    Some((lin - disc.sqrt()) / (2.0 * det))
}
