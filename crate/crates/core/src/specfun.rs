//! Integer-order incomplete gamma functions, Erlang distribution functions and
//! the exponentially weighted power integral ∫₀ˣ t^{s−1} e^{a t} dt.
//!
//! Everything here works with positive integer orders only, which lets the
//! upper tail be written as a finite Poisson sum with no cancellation.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest n for which n! is finite in f64.
pub const MAX_FACTORIAL: u32 = 170;

const SERIES_EPS: f64 = 1e-16;
const MAX_SERIES_TERMS: usize = 100_000;

fn factorial_table() -> &'static [f64; MAX_FACTORIAL as usize + 1] {
    static TABLE: OnceLock<[f64; MAX_FACTORIAL as usize + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0; MAX_FACTORIAL as usize + 1];
        for i in 1..t.len() {
            t[i] = t[i - 1] * i as f64;
        }
        t
    })
}

/// n! for n <= 170, `None` beyond.
pub fn factorial(n: u32) -> Option<f64> {
    factorial_table().get(n as usize).copied()
}

/// ln(n!), exact table below 171 and a Stirling series above.
pub fn ln_factorial(n: u32) -> f64 {
    match factorial(n) {
        Some(f) => f.ln(),
        None => {
            let n = n as f64;
            let inv = 1.0 / n;
            let inv2 = inv * inv;
            n * n.ln() - n + 0.5 * (2.0 * std::f64::consts::PI * n).ln()
                + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
        }
    }
}

/// ln Γ(s) = ln((s−1)!) for integer s >= 1.
pub fn ln_gamma_int(s: u32) -> f64 {
    assert!(s >= 1, "gamma order must be >= 1");
    ln_factorial(s - 1)
}

fn check_args(s: u32, x: f64) {
    assert!(s >= 1, "gamma order must be >= 1, got {s}");
    assert!(x >= 0.0, "gamma argument must be >= 0, got {x}");
}

/// Σ_{n≥0} x^n / ((s+1)(s+2)…(s+n)), the series factor of P(s, x).
fn lower_series(s: u32, x: f64) -> f64 {
    let s = s as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 1..MAX_SERIES_TERMS {
        term *= x / (s + n as f64);
        sum += term;
        if term < SERIES_EPS * sum {
            break;
        }
    }
    sum
}

/// Q(s, x) = e^{−x} Σ_{i<s} x^i/i!, summed downward from the largest term.
/// Only used for x >= s - 1 where the i = s−1 term dominates.
fn upper_poisson_sum(s: u32, x: f64) -> f64 {
    let top = s - 1;
    let mut term = (-x + top as f64 * x.ln() - ln_factorial(top)).exp();
    let mut sum = term;
    for i in (1..=top).rev() {
        term *= i as f64 / x;
        sum += term;
        if term < SERIES_EPS * sum {
            break;
        }
    }
    sum
}

/// Both regularized incomplete gammas (P, Q), each computed without
/// cancellation on its small side.
pub fn regularized_gamma_pq(s: u32, x: f64) -> (f64, f64) {
    check_args(s, x);
    if x == 0.0 {
        return (0.0, 1.0);
    }
    if x.is_infinite() {
        return (1.0, 0.0);
    }
    if x < s as f64 {
        let prefactor = (-x + s as f64 * x.ln() - ln_factorial(s)).exp();
        let p = prefactor * lower_series(s, x);
        (p, 1.0 - p)
    } else {
        let q = upper_poisson_sum(s, x);
        (1.0 - q, q)
    }
}

/// P(s, x) = γ(s, x)/Γ(s), the Erlang(s, 1) CDF at x.
pub fn regularized_gamma_p(s: u32, x: f64) -> f64 {
    regularized_gamma_pq(s, x).0
}

/// Q(s, x) = 1 − P(s, x).
pub fn regularized_gamma_q(s: u32, x: f64) -> f64 {
    regularized_gamma_pq(s, x).1
}

/// γ(s, x) = ∫₀ˣ t^{s−1} e^{−t} dt = (s−1)!·P(s, x).
///
/// Fails with [`Error::Overflow`] when (s−1)! is not representable.
pub fn lower_incomplete_gamma_int(s: u32, x: f64) -> Result<f64> {
    check_args(s, x);
    let scale = factorial(s - 1).ok_or(Error::Overflow { s })?;
    Ok(scale * regularized_gamma_p(s, x))
}

/// CDF of the Erlang(shape, rate) distribution.
pub fn erlang_cdf(shape: u32, rate: f64, x: f64) -> f64 {
    regularized_gamma_p(shape, rate * x)
}

/// Survival function of the Erlang(shape, rate) distribution.
pub fn erlang_sf(shape: u32, rate: f64, x: f64) -> f64 {
    regularized_gamma_q(shape, rate * x)
}

/// Σ_{m≥0} (a x)^m / (m!·(s+m)) for a > 0, so that
/// ∫₀ˣ t^{s−1}e^{at} dt = x^s · (this sum). All terms are positive.
pub(crate) fn exp_weighted_power_series(s: u32, a: f64, x: f64) -> f64 {
    let z = a * x;
    let s = s as f64;
    let mut pow = 1.0;
    let mut sum = 1.0 / s;
    for m in 1..MAX_SERIES_TERMS {
        pow *= z / m as f64;
        let term = pow / (s + m as f64);
        sum += term;
        if (m as f64) > z && term < SERIES_EPS * sum {
            break;
        }
    }
    sum
}

/// ∫₀ˣ t^{s−1} e^{a t} dt for any finite `a`.
///
/// a > 0 uses the positive-term power series, a < 0 reduces to
/// γ(s, |a|x)/|a|^s and a = 0 gives x^s/s.
pub fn exp_weighted_power_integral(s: u32, a: f64, x: f64) -> f64 {
    check_args(s, x);
    assert!(a.is_finite(), "exponent rate must be finite, got {a}");
    if x == 0.0 {
        return 0.0;
    }
    if a == 0.0 {
        x.powi(s as i32) / s as f64
    } else if a > 0.0 {
        (s as f64 * x.ln()).exp() * exp_weighted_power_series(s, a, x)
    } else {
        let b = -a;
        let p = regularized_gamma_p(s, b * x);
        if p == 0.0 {
            return 0.0;
        }
        (ln_gamma_int(s) - s as f64 * b.ln()).exp() * p
    }
}

/// ln ∫₀ˣ t^{s−1} e^{a t} dt, finite whenever the integral is positive.
///
/// Stays accurate when a → 0⁻ with large s, where the γ(s, |a|x)/|a|^s route
/// would underflow P before rescaling by |a|^{−s}.
pub fn ln_exp_weighted_power_integral(s: u32, a: f64, x: f64) -> f64 {
    check_args(s, x);
    assert!(a.is_finite(), "exponent rate must be finite, got {a}");
    if x == 0.0 {
        return f64::NEG_INFINITY;
    }
    let sf = s as f64;
    if a >= 0.0 {
        return sf * x.ln() + exp_weighted_power_series(s, a, x).ln();
    }
    let bx = -a * x;
    if bx < sf {
        // x^s e^{−bx}/s · Σ (bx)^n/((s+1)…(s+n))
        sf * x.ln() - bx - sf.ln() + lower_series(s, bx).ln()
    } else {
        ln_gamma_int(s) - sf * (-a).ln() + regularized_gamma_p(s, bx).ln()
    }
}
