//! Generalized Chebyshev polynomials `T_a(x) = cos(a·arccos x)`.
//!
//! For non-integer `a ≥ 0` the function continues analytically to the cut
//! plane `ℂ \ (-∞, -1)`. Off `[-1, 1]` it is evaluated as `cosh(a·L)` with
//! `L = log(x + √(x²-1))`, the square root chosen so that
//! `|x + √(x²-1)| ≥ 1` (the large characteristic root). Integer orders are
//! classical polynomials and are evaluated by the three-term recurrence on
//! all of `ℂ`.

use std::f64::consts::{PI, SQRT_2};

use log::info;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

type C64 = Complex64;

/// Distance to the nearest integer below which a floating order is treated as an integer.
pub const INTEGER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChebyshevError {
    #[error("T_{order} is not defined on the cut (-inf, -1); got x = {x}")]
    OnCut { order: f64, x: f64 },
    #[error("T_{order} is not differentiable at the branch point x = {x}")]
    AtBranchPoint { order: f64, x: f64 },
    #[error("order {order} is an integer; the expansion at -1 degenerates")]
    IntegerOrder { order: f64 },
    #[error("order must be finite and non-negative, got {0}")]
    InvalidOrder(f64),
}

/// Side from which a point of the cut `(-∞, -1)` is approached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutSide {
    Upper,
    Lower,
}

/// Algebraic nature of `T_a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Nature {
    RationalPolynomial,
    AlgebraicNonpolynomial,
    TranscendentalDFinite,
}

/// Order `a` of a generalized Chebyshev polynomial, with an optional exact
/// rational certificate `a = p/q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChebyshevOrder {
    value: f64,
    ratio: Option<(u64, u64)>,
    integer: Option<u64>,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl ChebyshevOrder {
    /// A floating order. Values within [`INTEGER_TOL`] of an integer use the
    /// polynomial path; the snap is logged. No rationality is assumed.
    pub fn new(a: f64) -> Result<Self, ChebyshevError> {
        if !a.is_finite() || a < 0.0 {
            return Err(ChebyshevError::InvalidOrder(a));
        }
        let rounded = a.round();
        let integer = if (a - rounded).abs() < INTEGER_TOL {
            if a != rounded {
                info!("order {a:e} treated as the integer {rounded}");
            }
            Some(rounded as u64)
        } else {
            None
        };
        Ok(Self { value: a, ratio: integer.map(|n| (n, 1)), integer })
    }

    /// An exact rational order `p/q`.
    pub fn rational(p: u64, q: u64) -> Result<Self, ChebyshevError> {
        if q == 0 {
            return Err(ChebyshevError::InvalidOrder(f64::INFINITY));
        }
        let g = gcd(p, q).max(1);
        let (p, q) = (p / g, q / g);
        Ok(Self {
            value: p as f64 / q as f64,
            ratio: Some((p, q)),
            integer: (q == 1).then_some(p),
        })
    }

    /// A floating order together with a rationality certificate (for instance
    /// from continued-fraction detection). `None` means "irrational within tolerance".
    pub fn with_certificate(a: f64, ratio: Option<(u64, u64)>) -> Result<Self, ChebyshevError> {
        match ratio {
            Some((p, q)) => {
                let mut o = Self::rational(p, q)?;
                o.value = a;
                Ok(o)
            }
            None => {
                let mut o = Self::new(a)?;
                o.ratio = None;
                o.integer = None;
                Ok(o)
            }
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn integer(&self) -> Option<u64> {
        self.integer
    }

    pub fn is_integer(&self) -> bool {
        self.integer.is_some()
    }

    pub fn ratio(&self) -> Option<(u64, u64)> {
        self.ratio
    }

    /// Integer: polynomial; rational: algebraic; otherwise transcendental but D-finite.
    pub fn classify_nature(&self) -> Nature {
        match (self.integer, self.ratio) {
            (Some(_), _) => Nature::RationalPolynomial,
            (None, Some(_)) => Nature::AlgebraicNonpolynomial,
            (None, None) => Nature::TranscendentalDFinite,
        }
    }

    /// `T_a(x)` on the cut plane.
    pub fn t(&self, x: C64) -> Result<C64, ChebyshevError> {
        if let Some(n) = self.integer {
            return Ok(chebyshev_poly(n, x).0);
        }
        if x.im == 0.0 {
            if (-1.0..=1.0).contains(&x.re) {
                return Ok(C64::new((self.value * x.re.acos()).cos(), 0.0));
            }
            if x.re < -1.0 {
                return Err(ChebyshevError::OnCut { order: self.value, x: x.re });
            }
        }
        Ok((large_root_log(x) * self.value).cosh())
    }

    /// Boundary value of `T_a` on the cut, `T_a(x ± i0)` for real `x < -1`.
    pub fn t_on_cut(&self, x: f64, side: CutSide) -> C64 {
        if let Some(n) = self.integer {
            return chebyshev_poly(n, C64::new(x, 0.0)).0;
        }
        let s = (x * x - 1.0).sqrt();
        // large root is x - √(x²-1) < -1; its log on the upper side is ln|.| + iπ
        let modulus = (-(x - s)).ln();
        let arg = match side {
            CutSide::Upper => PI,
            CutSide::Lower => -PI,
        };
        (C64::new(modulus, arg) * self.value).cosh()
    }

    /// `T_a'(x)`.
    pub fn t_prime(&self, x: C64) -> Result<C64, ChebyshevError> {
        if let Some(n) = self.integer {
            return Ok(chebyshev_poly(n, x).1);
        }
        if x.im == 0.0 {
            if x.re == 1.0 || x.re == -1.0 {
                return Err(ChebyshevError::AtBranchPoint { order: self.value, x: x.re });
            }
            if x.re > -1.0 && x.re < 1.0 {
                let t = x.re.acos();
                return Ok(C64::new(self.value * (self.value * t).sin() / t.sin(), 0.0));
            }
            if x.re < -1.0 {
                return Err(ChebyshevError::OnCut { order: self.value, x: x.re });
            }
        }
        let root = sqrt_x2m1(x);
        Ok((large_root_log(x) * self.value).sinh() * self.value / root)
    }

    /// `(c0, c1)` in `T_a(x) = c0 + c1·√(x+1) + O(x+1)` near `x = -1`.
    pub fn expansion_at_minus_one(&self) -> Result<(f64, f64), ChebyshevError> {
        if self.is_integer() {
            return Err(ChebyshevError::IntegerOrder { order: self.value });
        }
        let a = self.value;
        Ok(((a * PI).cos(), a * SQRT_2 * (a * PI).sin()))
    }

    /// `T_a(x0 + dx) - T_a(x0)` for real `x0 ∈ (-1, 1)`, accurate when `dx` is small.
    ///
    /// Uses `cosh(aL) - cosh(aL0) = 2 sinh(a(L+L0)/2) sinh(a(L-L0)/2)` with the
    /// log difference formed from `(u - u0)/u0` directly, which removes the
    /// cancellation of the naive difference. Falls back to the naive difference
    /// when `x` is not in the neighbourhood where the interior branch is analytic.
    pub fn diff_from_interior(&self, x0: f64, dx: C64) -> Result<C64, ChebyshevError> {
        debug_assert!(x0 > -1.0 && x0 < 1.0);
        let x = dx + x0;
        let radius = 0.5 * (1.0 - x0).min(1.0 + x0);
        if dx.norm() >= radius {
            return Ok(self.t(x)? - C64::new(self.t(C64::new(x0, 0.0))?.re, 0.0));
        }
        if dx.norm() == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        // interior branch u = x + i√(1-x²), analytic on the disc around x0
        let s0 = (1.0 - x0 * x0).sqrt();
        let s = (C64::new(1.0, 0.0) - x * x).sqrt();
        let u0 = C64::new(x0, s0);
        // s - s0 = (s² - s0²)/(s + s0) = -(x - x0)(x + x0)/(s + s0)
        let ds = -dx * (x + x0) / (s + s0);
        let du = dx + C64::i() * ds;
        let delta = ln_1p(du / u0);
        let l0 = C64::new(0.0, x0.acos());
        let a = self.value;
        Ok(((l0 * 2.0 + delta) * (a / 2.0)).sinh() * (delta * (a / 2.0)).sinh() * 2.0)
    }

    /// `T_a(x)` through `₂F₁(-a, a; 1/2; (1-x)/2)`, valid for `|1 - x| < 2`.
    ///
    /// Independent of the closed-form evaluation; used as a cross-check.
    pub fn t_hypergeometric(&self, x: C64) -> Option<C64> {
        let z = (C64::new(1.0, 0.0) - x) / 2.0;
        if z.norm() >= 0.95 {
            return None;
        }
        Some(hyp2f1_series(-self.value, self.value, 0.5, z))
    }
}

/// `(T_n(x), T_n'(x))` by the three-term recurrences for `T` and `U`.
fn chebyshev_poly(n: u64, x: C64) -> (C64, C64) {
    let one = C64::new(1.0, 0.0);
    match n {
        0 => return (one, C64::new(0.0, 0.0)),
        1 => return (x, one),
        _ => {}
    }
    // T_k and U_{k-1}; T_n' = n U_{n-1}
    let (mut t_prev, mut t) = (one, x);
    let (mut u_prev, mut u) = (one, x * 2.0);
    for _ in 2..n {
        (t_prev, t) = (t, x * t * 2.0 - t_prev);
        (u_prev, u) = (u, x * u * 2.0 - u_prev);
    }
    let t_next = x * t * 2.0 - t_prev;
    (t_next, u * n as f64)
}

/// `√(x-1)·√(x+1)`, the branch of `√(x²-1)` that behaves like `x` at infinity.
fn sqrt_x2m1(x: C64) -> C64 {
    (x - 1.0).sqrt() * (x + 1.0).sqrt()
}

/// Principal log of the large root `x + √(x²-1)`.
fn large_root_log(x: C64) -> C64 {
    (x + sqrt_x2m1(x)).ln()
}

fn ln_1p(z: C64) -> C64 {
    if z.norm() > 1e-3 {
        return (z + 1.0).ln();
    }
    // alternating series, 10 terms is below 1e-30 for |z| ≤ 1e-3
    let mut term = z;
    let mut sum = C64::new(0.0, 0.0);
    for k in 1..=10 {
        sum += term / k as f64 * if k % 2 == 1 { 1.0 } else { -1.0 };
        term *= z;
    }
    sum
}

fn hyp2f1_series(a: f64, b: f64, c: f64, z: C64) -> C64 {
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    for k in 0..5000u32 {
        let k = k as f64;
        term *= z * ((a + k) * (b + k) / ((c + k) * (k + 1.0)));
        sum += term;
        if term.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}
