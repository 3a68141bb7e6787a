//! Closed-form tails, rectangle probabilities and moments of the overlap
//! times of a customer pair in the identical-station (M/M/∞)² tandem queue.
//!
//! Every function here is a pure function of its arguments.

mod cross_pair;

pub use cross_pair::{
    case2_components, cross_pair_tail, cross_pair_tail_with, CrossPairOptions, CrossPairValue,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::RateParams;

/// Slack allowed on a probability before it counts as out of range.
pub const PROBABILITY_SLACK: f64 = 1e-9;

/// Which form of a disputed formula to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Exactly as originally published.
    #[serde(rename = "printed")]
    AsPrinted,
    /// The corrected form, consistent with the tables and with simulation.
    #[default]
    Consistent,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::AsPrinted => "printed",
            Variant::Consistent => "consistent",
        }
    }
}

/// Known disagreements between a published formula or table entry and the
/// values this crate ships.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LedgerFlag {
    /// The printed sum-tail counts the both-positive mass twice.
    SumTailPrintedDoubleCount,
    /// The printed n = m, j < k display disagrees with the tables; the value
    /// comes from the event integrals instead.
    Case2DisplayReplaced,
    /// The printed n < m < n+j < m+k form disagrees with the tables.
    Case3PrintedForm,
    /// The published table row for n < m < m+k < n+j disagrees with the
    /// printed formula.
    Case5TableMismatch,
    /// The same-pair theoretical entry of the λ > μ table differs from the
    /// closed form in the fourth decimal.
    Table1Case1Entry,
}

impl LedgerFlag {
    pub fn code(self) -> &'static str {
        match self {
            LedgerFlag::SumTailPrintedDoubleCount => "ledger:sum-tail-printed",
            LedgerFlag::Case2DisplayReplaced => "ledger:case2-display",
            LedgerFlag::Case3PrintedForm => "ledger:case3-printed",
            LedgerFlag::Case5TableMismatch => "ledger:case5-table",
            LedgerFlag::Table1Case1Entry => "ledger:table1-case1-entry",
        }
    }
}

/// Means, variances, covariance and cross moment of (O¹, O²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub e1: f64,
    pub e2: f64,
    pub var1: f64,
    pub var2: f64,
    pub cov: f64,
    pub e12: f64,
}

/// The four quadrant probabilities {O¹ vs x} × {O² vs y}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectangleProbs {
    pub gt_gt: f64,
    pub le_gt: f64,
    pub gt_le: f64,
    pub le_le: f64,
}

impl RectangleProbs {
    pub fn total(&self) -> f64 {
        self.gt_gt + self.le_gt + self.gt_le + self.le_le
    }
}

pub(crate) fn debug_check_probability(p: f64) -> f64 {
    debug_assert!(
        (-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p),
        "probability {p} out of range"
    );
    p
}

/// Clamp into [0, 1] for reporting only; computations never clamp.
pub fn clamp_for_report(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

/// P(O¹ > x, O² > y) for the same pair (n, n+k) in both stations:
/// e^{−2μ(x+y)} α^k / 2.
pub fn joint_same_pair_tail(p: &RateParams, k: u32, x: f64, y: f64) -> f64 {
    let mu = p.mu();
    debug_check_probability(0.5 * (-2.0 * mu * (x + y)).exp() * p.alpha().powi(k as i32))
}

/// P(O¹ > x) = e^{−2μx} α^k.
pub fn marginal_station1_tail(p: &RateParams, k: u32, x: f64) -> f64 {
    debug_check_probability((-2.0 * p.mu() * x).exp() * p.alpha().powi(k as i32))
}

/// P(O² > y) = (e^{−2μy}/2) α^k (1 + (1−α)k).
///
/// The (1−α)k term is the mass where the pair never overlaps in station 1
/// but the order of departures flips before station 2.
pub fn marginal_station2_tail(p: &RateParams, k: u32, y: f64) -> f64 {
    let a = p.alpha();
    let v = 0.5 * (-2.0 * p.mu() * y).exp() * a.powi(k as i32) * (1.0 + (1.0 - a) * k as f64);
    debug_check_probability(v)
}

/// The four quadrant probabilities, assembled from the joint tail and the two
/// marginals by inclusion–exclusion.
pub fn rectangle_probabilities(p: &RateParams, k: u32, x: f64, y: f64) -> Result<RectangleProbs> {
    let gt_gt = joint_same_pair_tail(p, k, x, y);
    let m1 = marginal_station1_tail(p, k, x);
    let m2 = marginal_station2_tail(p, k, y);
    let r = RectangleProbs {
        gt_gt,
        le_gt: m2 - gt_gt,
        gt_le: m1 - gt_gt,
        le_le: 1.0 - m1 - m2 + gt_gt,
    };
    let tol = 1e-12;
    for (name, value) in [
        ("gt_gt", r.gt_gt),
        ("le_gt", r.le_gt),
        ("gt_le", r.gt_le),
        ("le_le", r.le_le),
    ] {
        if !(-tol..=1.0 + tol).contains(&value) {
            return Err(Error::InternalInconsistency { name, value });
        }
    }
    Ok(r)
}

/// P(O¹ + O² > ℓ) for the same pair.
///
/// `Consistent` is (α^k/2) e^{−2μℓ} (2 + 2μℓ + (1−α)k). `AsPrinted` keeps the
/// published first term α^k(1+2μℓ)e^{−2μℓ}, which is twice the both-positive
/// contribution and can exceed 1.
pub fn sum_tail(p: &RateParams, k: u32, ell: f64, variant: Variant) -> f64 {
    let a = p.alpha();
    let ak = a.powi(k as i32);
    let mu_ell = p.mu() * ell;
    let decay = (-2.0 * mu_ell).exp();
    let flip = (1.0 - a) * k as f64;
    match variant {
        Variant::Consistent => debug_check_probability(0.5 * ak * decay * (2.0 + 2.0 * mu_ell + flip)),
        Variant::AsPrinted => {
            ak * (1.0 + 2.0 * mu_ell) * decay + decay * 0.5 * ak * flip + decay * 0.5 * ak
        }
    }
}

/// Means, variances and covariance of the two overlap times of (n, n+k).
pub fn moments(p: &RateParams, k: u32) -> MomentSet {
    let mu = p.mu();
    let a = p.alpha();
    let ak = a.powi(k as i32);
    let boost = 1.0 + (1.0 - a) * k as f64;
    let e1 = ak / (2.0 * mu);
    let e2 = ak * boost / (4.0 * mu);
    let second1 = ak / (2.0 * mu * mu);
    let second2 = ak * boost / (4.0 * mu * mu);
    let e12 = ak / (8.0 * mu * mu);
    MomentSet {
        e1,
        e2,
        var1: second1 - e1 * e1,
        var2: second2 - e2 * e2,
        cov: e12 - e1 * e2,
        e12,
    }
}

/// Conjectured N-station joint tail e^{−2μ Σxᵢ} α^k / 2^{N−1}, with N =
/// `xs.len()`.
pub fn conjecture_joint_tail(p: &RateParams, k: u32, xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::Precondition("need at least one station threshold".into()));
    }
    for &x in xs {
        crate::model::check_threshold("x_i", x)?;
    }
    let total: f64 = xs.iter().sum();
    let n = xs.len() as i32;
    Ok((-2.0 * p.mu() * total).exp() * p.alpha().powi(k as i32) / 2f64.powi(n - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_params;
    use proptest::prelude::*;

    fn params(l: f64, m: f64) -> RateParams {
        validate_params(l, m).unwrap()
    }

    // Reference values below were computed at 30 digits from the closed forms.

    #[test]
    fn joint_tail_table_values() {
        let v = joint_same_pair_tail(&params(7.0, 7.0), 2, 0.04, 0.06);
        assert!((v - 0.030_824_620_492_700_81).abs() < 1e-15);
        let v = joint_same_pair_tail(&params(4.0, 5.0), 2, 0.004, 0.006);
        assert!((v - 0.089_366_658_571_452_8).abs() < 1e-15);
        let p = params(3.0, 1.5);
        assert!((joint_same_pair_tail(&p, 1, 0.0, 0.0) - p.alpha() / 2.0).abs() < 1e-16);
    }

    #[test]
    fn marginal_values() {
        let p = params(10.0, 2.0);
        assert!((marginal_station1_tail(&p, 2, 0.004) - 0.683_421_750_038_392_4).abs() < 1e-14);
        assert!((marginal_station2_tail(&p, 2, 0.006) - 0.451_984_124_887_921).abs() < 1e-14);
        assert!((marginal_station1_tail(&p, 3, 0.0) - p.alpha().powi(3)).abs() < 1e-16);
        let a = p.alpha();
        let want = a / 2.0 * (1.0 + 2.0 / 12.0);
        assert!((marginal_station2_tail(&p, 1, 0.0) - want).abs() < 1e-15);
        assert!((marginal_station2_tail(&params(7.0, 7.0), 2, 0.0) - 0.25).abs() < 1e-16);
        assert!(marginal_station1_tail(&p, 400, 0.0) < 1e-30);
    }

    #[test]
    fn rectangle_values_and_limits() {
        let p = params(10.0, 2.0);
        let r = rectangle_probabilities(&p, 2, 0.004, 0.006).unwrap();
        assert!((r.gt_gt - 0.333_607_444_150_112_2).abs() < 1e-14);
        assert!((r.gt_le - (0.683_421_750_038_392_4 - 0.333_607_444_150_112_2)).abs() < 1e-14);
        assert!((r.gt_le - 0.349814).abs() < 1e-6);

        let r0 = rectangle_probabilities(&p, 2, 0.0, 0.0).unwrap();
        let ak = p.alpha().powi(2);
        let want = 1.0 - ak - ak / 2.0 * (1.0 + (1.0 - p.alpha()) * 2.0) + ak / 2.0;
        assert!((r0.le_le - want).abs() < 1e-15);

        let inf = rectangle_probabilities(&p, 2, f64::INFINITY, 0.006).unwrap();
        assert_eq!(inf.gt_gt, 0.0);
        assert_eq!(inf.gt_le, 0.0);
        assert_eq!(inf.le_gt, marginal_station2_tail(&p, 2, 0.006));
    }

    #[test]
    fn sum_tail_values() {
        let p = params(10.0, 2.0);
        let v = sum_tail(&p, 2, 0.01, Variant::Consistent);
        assert!((v - 0.791_761_667_449_599_7).abs() < 1e-14);
        let printed = sum_tail(&p, 2, 0.01, Variant::AsPrinted);
        assert!((printed - 1.138_713_409_365_716).abs() < 1e-13);

        let big = params(100.0, 1.0);
        let printed0 = sum_tail(&big, 1, 0.0, Variant::AsPrinted);
        assert!((printed0 - 1.490_049_995_098_52).abs() < 1e-13);
        assert!(printed0 > 1.0);
        assert!(sum_tail(&big, 1, 0.0, Variant::Consistent) <= 1.0);
        assert!(sum_tail(&p, 2, 1e3, Variant::Consistent) < 1e-300);
    }

    #[test]
    fn moment_values() {
        let m = moments(&params(10.0, 2.0), 2);
        assert!((m.e1 - 0.173_611_111_111_111_1).abs() < 1e-15);
        assert!((m.e2 - 0.115_740_740_740_740_7).abs() < 1e-15);
        assert!((m.cov - 0.001_607_510_288_065_844).abs() < 1e-15);
        assert!((m.e12 - 0.021_701_388_888_888_89).abs() < 1e-15);
        let tiny = moments(&params(10.0, 1e6), 2);
        assert!(tiny.e1 < 1e-10 && tiny.e12.abs() < 1e-10 && tiny.var2 < 1e-10);
    }

    #[test]
    fn conjecture_reductions() {
        let p = params(10.0, 2.0);
        let one = conjecture_joint_tail(&p, 2, &[0.004]).unwrap();
        assert!((one - marginal_station1_tail(&p, 2, 0.004)).abs() < 1e-16);
        let two = conjecture_joint_tail(&p, 2, &[0.004, 0.006]).unwrap();
        assert!((two - joint_same_pair_tail(&p, 2, 0.004, 0.006)).abs() < 1e-16);
        let three = conjecture_joint_tail(&p, 2, &[0.004, 0.006, 0.005]).unwrap();
        assert!((three - 0.163_500_787_080_598_7).abs() < 1e-15);
        assert!(conjecture_joint_tail(&p, 2, &[]).is_err());
        assert!(conjecture_joint_tail(&p, 2, &[0.1, -1.0]).is_err());
    }

    fn arb_params() -> impl Strategy<Value = RateParams> {
        (0.05f64..50.0, 0.05f64..50.0).prop_map(|(l, m)| params(l, m))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn quadrants_close(p in arb_params(), k in 1u32..30, x in 0.0f64..2.0, y in 0.0f64..2.0) {
            let r = rectangle_probabilities(&p, k, x, y).unwrap();
            prop_assert!((r.total() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn sum_tail_at_zero_is_inclusion_exclusion(p in arb_params(), k in 1u32..30) {
            let union = marginal_station1_tail(&p, k, 0.0) + marginal_station2_tail(&p, k, 0.0)
                - joint_same_pair_tail(&p, k, 0.0, 0.0);
            prop_assert!((sum_tail(&p, k, 0.0, Variant::Consistent) - union).abs() < 1e-12);
        }

        #[test]
        fn dominance(p in arb_params(), k in 1u32..30, x in 0.0f64..2.0, y in 0.0f64..2.0) {
            let j = joint_same_pair_tail(&p, k, x, y);
            prop_assert!(j <= marginal_station1_tail(&p, k, x));
            prop_assert!(j <= marginal_station2_tail(&p, k, y));
        }

        #[test]
        fn monotone(p in arb_params(), k in 1u32..30, x in 0.0f64..2.0, y in 0.0f64..2.0,
                    dx in 0.0f64..0.5, dy in 0.0f64..0.5) {
            prop_assert!(joint_same_pair_tail(&p, k, x + dx, y + dy) <= joint_same_pair_tail(&p, k, x, y));
            prop_assert!(joint_same_pair_tail(&p, k + 1, x, y) <= joint_same_pair_tail(&p, k, x, y));
            prop_assert!(marginal_station1_tail(&p, k, x + dx) <= marginal_station1_tail(&p, k, x));
            prop_assert!(marginal_station1_tail(&p, k + 1, x) <= marginal_station1_tail(&p, k, x));
            prop_assert!(marginal_station2_tail(&p, k, y + dy) <= marginal_station2_tail(&p, k, y));
            prop_assert!(marginal_station2_tail(&p, k + 1, y) <= marginal_station2_tail(&p, k, y));
            prop_assert!(sum_tail(&p, k, x + dx, Variant::Consistent) <= sum_tail(&p, k, x, Variant::Consistent));
            prop_assert!(sum_tail(&p, k + 1, x, Variant::Consistent) <= sum_tail(&p, k, x, Variant::Consistent));
        }

        #[test]
        fn moment_set_invariants(p in arb_params(), k in 1u32..30) {
            let m = moments(&p, k);
            prop_assert!(m.var1 >= 0.0 && m.var2 >= 0.0);
            prop_assert!(m.cov.abs() <= (m.var1 * m.var2).sqrt() * (1.0 + 1e-12));
            prop_assert!((m.e12 - (m.cov + m.e1 * m.e2)).abs() <= 1e-12 * m.e12.abs());
        }
    }
}
