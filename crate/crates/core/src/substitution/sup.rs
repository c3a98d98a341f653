//! The one-variable supremum behind the exponential substitution:
//! sup_{x∈(0,1)} e^{1−1/x^κ} x^{−(κ+1)n} = e (p/e)^p, p = (κ+1)n/κ,
//! attained at x* = p^{−1/κ} when p ≥ 1.

use serde::{Deserialize, Serialize};

use super::c_inner;
use crate::error::{Error, Result};
use crate::mildness::{ln_factorial, CERTIFICATE_TOLERANCE};

/// Golden-section search for the maximum of a unimodal `f` on [lo, hi].
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) / 2.0;
    (x, f(x))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SupReport {
    pub kappa: f64,
    pub n: u32,
    pub argmax: f64,
    /// Numerically maximised left side.
    pub lhs_sup: f64,
    /// e (p/e)^p with 0^0 = 1.
    pub rhs: f64,
    /// e ((κ+1)/κ)^p n!^{1+1/κ}, the factorial form used to assemble A.
    pub factorial_bound: f64,
    /// |lhs/rhs − 1|; zero up to rounding whenever p ≥ 1.
    pub rel_gap: f64,
    pub pass: bool,
}

/// Maximises the left side on (0,1) and compares it with the closed form
/// and with its factorial relaxation.
pub fn sup_inequality(kappa: f64, n: u32) -> Result<SupReport> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
    }
    let nf = n as f64;
    let p = (kappa + 1.0) * nf / kappa;
    let ln_lhs = |x: f64| 1.0 - x.powf(-kappa) - (kappa + 1.0) * nf * x.ln();
    // Search in t = ln x, where the log-target is concave; the peak sits at
    // t* = −ln(p)/κ.
    let t_peak = if p > 0.0 { -p.ln() / kappa } else { 0.0 };
    let lo = (2.0 * t_peak - 1.0).min(-40.0);
    let (t, ln_sup) = golden_section_max(|t| ln_lhs(t.exp()), lo, 0.0, 1e-10);
    let ln_rhs = if p > 0.0 { 1.0 + p * (p.ln() - 1.0) } else { 1.0 };
    let ln_fact = 1.0 + p * ((kappa + 1.0) / kappa).ln() + (1.0 + 1.0 / kappa) * ln_factorial(n);
    let tol = (1.0 + CERTIFICATE_TOLERANCE).ln();
    Ok(SupReport {
        kappa,
        n,
        argmax: t.exp(),
        lhs_sup: ln_sup.exp(),
        rhs: ln_rhs.exp(),
        factorial_bound: ln_fact.exp(),
        rel_gap: ((ln_sup - ln_rhs).exp() - 1.0).abs(),
        pass: ln_sup <= ln_rhs + tol && ln_rhs <= ln_fact + tol,
    })
}

/// x^{−(κ+1)n} e^{1−1/x^κ} (2c)^n n!: the bound on the n-th derivative of
/// the flat kernel times the stage weight.
pub fn exp_kernel_bound(kappa: f64, n: u32, x: f64) -> f64 {
    let ln = -(kappa + 1.0) * n as f64 * x.ln() + 1.0 - x.powf(-kappa)
        + n as f64 * (2.0 * c_inner(kappa)).ln()
        + ln_factorial(n);
    ln.exp()
}
