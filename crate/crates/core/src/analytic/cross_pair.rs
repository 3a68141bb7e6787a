//! Joint tails P(O¹_{n,n+j} > x, O²_{m,m+k} > y) for the nine index orderings.

use serde::{Deserialize, Serialize};

use super::{debug_check_probability, LedgerFlag, Variant};
use crate::error::{Error, Result};
use crate::model::{check_threshold, classify, CaseId, CaseOrdering, PairGeometry, RateParams, Regime};
use crate::specfun::{ln_exp_weighted_power_integral, ln_gamma_int, regularized_gamma_pq};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CrossPairOptions {
    pub variant: Variant,
    /// Refuse to evaluate orderings whose published formula is disputed.
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossPairValue {
    pub probability: f64,
    pub case: CaseId,
    pub flags: Vec<LedgerFlag>,
}

/// Joint tail with default options (consistent variant, non-strict).
pub fn cross_pair_tail(p: &RateParams, g: &PairGeometry, x: f64, y: f64) -> Result<CrossPairValue> {
    cross_pair_tail_with(p, g, x, y, CrossPairOptions::default())
}

pub fn cross_pair_tail_with(
    p: &RateParams,
    g: &PairGeometry,
    x: f64,
    y: f64,
    opts: CrossPairOptions,
) -> Result<CrossPairValue> {
    check_threshold("x", x)?;
    check_threshold("y", y)?;
    let case = classify(g, p)?;
    let ord = case.ordering;
    if opts.strict && matches!(ord, CaseOrdering::InterleavedNFirst | CaseOrdering::NestedMkInsideNj) {
        return Err(Error::FormulaUnderReview(ord));
    }

    let mut flags = Vec::new();
    match (ord, opts.variant) {
        (CaseOrdering::SameStartJLessK, Variant::Consistent) => flags.push(LedgerFlag::Case2DisplayReplaced),
        (CaseOrdering::InterleavedNFirst, _) => flags.push(LedgerFlag::Case3PrintedForm),
        (CaseOrdering::NestedMkInsideNj, _) => flags.push(LedgerFlag::Case5TableMismatch),
        _ => {}
    }

    let probability = if x.is_infinite() || y.is_infinite() {
        0.0
    } else {
        evaluate(p, g, ord, case.regime, x, y, opts.variant)
    };
    let probability = match opts.variant {
        Variant::Consistent => debug_check_probability(probability),
        Variant::AsPrinted => probability,
    };
    Ok(CrossPairValue { probability, case, flags })
}

fn evaluate(
    p: &RateParams,
    g: &PairGeometry,
    ord: CaseOrdering,
    regime: Regime,
    x: f64,
    y: f64,
    variant: Variant,
) -> f64 {
    let (lam, mu) = (p.lambda(), p.mu());
    let a = p.alpha();
    let b = p.beta();
    let (j, k, d) = (g.j() as i64, g.k() as i64, g.delta());
    let decay = (-2.0 * mu * (x + y)).exp();
    let pw = |base: f64, e: i64| base.powi(e as i32);
    // 1/(λ+μ) and 1/(2μ+λ): mean sojourn weights of the two race types.
    let r1 = 1.0 / (lam + mu);
    let r2 = 1.0 / (lam + 2.0 * mu);

    match ord {
        CaseOrdering::SamePairSameGap => 0.25 * decay * pw(a, k) * 2.0,
        CaseOrdering::SameStartJLessK => {
            let (e2, e2c) = case2_parts(p, regime, g.j(), g.k(), x, y, variant);
            e2 + e2c
        }
        CaseOrdering::InterleavedNFirst => {
            let (shared, tail) = ((j - d) as f64, (d + k - j) as f64);
            let geo = pw(b, j - d) * pw(a, 2 * d + k - j);
            match variant {
                Variant::Consistent => 0.25 * decay * geo * (2.0 + 2.0 * mu * (shared * r2 + tail * r1)),
                Variant::AsPrinted => {
                    0.5 * mu * decay * geo * (1.0 + shared * r2 + tail * r1 + 1.0 / (2.0 * mu))
                }
            }
        }
        CaseOrdering::DisjointNFirst | CaseOrdering::DisjointMFirst => {
            0.25 * decay * pw(a, j + k) * (2.0 + 2.0 * mu * k as f64 * r1)
        }
        CaseOrdering::NestedMkInsideNj => {
            0.25 * decay * pw(b, k) * pw(a, j - k) * (2.0 + 2.0 * mu * k as f64 * r2)
        }
        CaseOrdering::SameStartJGreaterK => {
            0.25 * (-mu * (3.0 * x + 2.0 * y)).exp()
                * pw(b, j - k)
                * pw(a, k)
                * (2.0 * mu * x + 2.0 + 2.0 * mu * (j - k) as f64 * r2)
        }
        CaseOrdering::InterleavedMFirst => {
            let (lead, shared) = ((-d) as f64, (d + k) as f64);
            0.25 * decay * pw(a, -2 * d + j - k) * pw(b, d + k) * (2.0 + 2.0 * mu * (lead * r1 + shared * r2))
        }
        CaseOrdering::NestedNjInsideMk => {
            0.25 * decay * pw(a, k - j) * pw(b, j) * (2.0 + 2.0 * mu * ((k - j) as f64 * r1 + j as f64 * r2))
        }
    }
}

/// E[e^{μZ}; Z < x] and E[Z e^{μZ}; Z < x] for Z ~ Erlang(s, λ).
fn erlang_tilted_kernel(lam: f64, mu: f64, regime: Regime, s: u32, x: f64) -> (f64, f64) {
    let rate = match regime {
        Regime::LambdaEqual => 0.0,
        _ => mu - lam,
    };
    let ln_lam = lam.ln();
    let k0 = (s as f64 * ln_lam - ln_gamma_int(s) + ln_exp_weighted_power_integral(s, rate, x)).exp();
    let k1 = (s as f64 * ln_lam - ln_gamma_int(s) + ln_exp_weighted_power_integral(s + 1, rate, x)).exp();
    (k0, k1)
}

/// Contributions of {customer n leaves station 1 first} and its complement to
/// the n = m, j < k joint tail.
///
/// With s = k − j and Z ~ Erlang(s, λ) the gap between customers n+j and n+k,
/// the joint tail is e^{−2μ(x+y)} α^j E[½(1+μ|x−Z|) e^{−μ|x−Z|}].
pub fn case2_components(p: &RateParams, j: u32, k: u32, x: f64, y: f64) -> Result<(f64, f64)> {
    check_threshold("x", x)?;
    check_threshold("y", y)?;
    if j == 0 || k <= j {
        return Err(Error::InvalidGeometry(format!("need 1 <= j < k, got j={j}, k={k}")));
    }
    if x.is_infinite() || y.is_infinite() {
        return Ok((0.0, 0.0));
    }
    Ok(case2_parts(p, p.regime(), j, k, x, y, Variant::Consistent))
}

fn case2_parts(p: &RateParams, regime: Regime, j: u32, k: u32, x: f64, y: f64, variant: Variant) -> (f64, f64) {
    let (lam, mu) = (p.lambda(), p.mu());
    let a = p.alpha();
    let s = k - j;
    let sf = s as f64;
    let rate_sum = lam + mu;
    let (k0, k1) = erlang_tilted_kernel(lam, mu, regime, s, x);
    let (p0, q0) = regularized_gamma_pq(s, rate_sum * x);
    let (p1, q1) = regularized_gamma_pq(s + 1, rate_sum * x);
    let far = (-mu * (3.0 * x + 2.0 * y)).exp();
    let near = (-mu * (x + 2.0 * y)).exp();
    let aj = a.powi(j as i32);
    let ak = a.powi(k as i32);
    let mean_gap = sf / rate_sum;

    match variant {
        Variant::Consistent => {
            let e2 = far * aj * 0.25 * k0
                + near * ak * (0.25 * q0 + 0.5 * mu * (mean_gap * q1 - x * q0));
            let e2c = far * aj * ((0.25 + 0.5 * mu * x) * k0 - 0.5 * mu * k1) + near * ak * 0.25 * q0;
            (e2, e2c)
        }
        Variant::AsPrinted => {
            let jr = j as f64 / rate_sum;
            let terms = [
                0.25 * far * aj * k0,
                0.25 * near * ak * q0,
                0.5 * mu * near * ak * (mean_gap - x),
                -0.5 * mu * near * ak * (mean_gap * p1 - x * p0),
                0.25 * far * aj * k0 * (2.0 * mu * x + 1.0 - 2.0 * mu * jr),
                0.25 * near * ak * q0 * (1.0 + 2.0 * mu * jr),
                0.25 * near * ak * mean_gap * (1.0 - sf * p1),
                -0.5 * mu * far * aj * jr * k0,
                -0.5 * mu * near * ak * jr * q0,
                -0.5 * mu * far * aj * k1,
                -0.5 * mu * near * ak * mean_gap * q1,
            ];
            (terms[..4].iter().sum(), terms[4..].iter().sum())
        }
    }
}
