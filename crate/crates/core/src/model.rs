//! Rate parameters, customer-pair geometry, thresholds and the nine-way case
//! classifier shared by every other module.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative band around λ = μ that is routed to the equal-rate formulas.
pub const EQUAL_RATE_REL_TOL: f64 = 1e-9;

/// Arrival rate λ and per-station service rate μ of the tandem queue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    lambda: f64,
    mu: f64,
    alpha: f64,
}

impl RateParams {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        validate_params(lambda, mu)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// α = λ/(λ+μ): probability an exponential(μ) service outlasts an
    /// exponential(λ) inter-arrival gap.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// λ/(λ+2μ), the per-customer factor when two services must both
    /// outlast the same gap.
    pub fn beta(&self) -> f64 {
        self.lambda / (self.lambda + 2.0 * self.mu)
    }

    pub fn regime(&self) -> Regime {
        Regime::of(self.lambda, self.mu)
    }
}

/// Checks λ, μ and derives α.
pub fn validate_params(lambda: f64, mu: f64) -> Result<RateParams> {
    for (name, value) in [("lambda", lambda), ("mu", mu)] {
        if !value.is_finite() {
            return Err(Error::NonFinite { name, value });
        }
        if value <= 0.0 {
            return Err(Error::NonPositiveRate { name, value });
        }
    }
    Ok(RateParams {
        lambda,
        mu,
        alpha: lambda / (lambda + mu),
    })
}

/// Sign of λ − μ, with a relative tolerance band mapped to `LambdaEqual`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    LambdaGreater,
    LambdaEqual,
    LambdaLess,
}

impl Regime {
    pub fn of(lambda: f64, mu: f64) -> Self {
        if lambda == mu || (lambda - mu).abs() <= EQUAL_RATE_REL_TOL * lambda.max(mu) {
            Regime::LambdaEqual
        } else if lambda > mu {
            Regime::LambdaGreater
        } else {
            Regime::LambdaLess
        }
    }
}

/// Which customers are observed: the pair (n, n+j) in station 1 and the pair
/// (m, m+k) in station 2, with m = n + delta.
///
/// Only `j`, `k` and `delta` enter the closed forms; `n` is kept for
/// trajectory-mode simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairGeometry {
    n: u64,
    j: u32,
    delta: i64,
    k: u32,
}

impl PairGeometry {
    /// Geometry from gaps and offset, anchored at the smallest n with m >= 0.
    pub fn new(j: u32, k: u32, delta: i64) -> Result<Self> {
        let n = if delta < 0 { delta.unsigned_abs() } else { 0 };
        Self::with_start(n, j, delta, k)
    }

    pub fn with_start(n: u64, j: u32, delta: i64, k: u32) -> Result<Self> {
        if j == 0 || k == 0 {
            return Err(Error::InvalidGeometry(format!(
                "gaps must be >= 1, got j = {j}, k = {k}"
            )));
        }
        if (n as i128) + (delta as i128) < 0 {
            return Err(Error::InvalidGeometry(format!(
                "m = n + delta = {} + {} is negative",
                n, delta
            )));
        }
        Ok(Self { n, j, delta, k })
    }

    /// The same customer pair (n, n+k) observed in both stations.
    pub fn same_pair(k: u32) -> Result<Self> {
        Self::new(k, k, 0)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> u64 {
        (self.n as i64 + self.delta) as u64
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn delta(&self) -> i64 {
        self.delta
    }

    /// Indices relative to n: (0, j) for station 1 and (delta, delta+k) for
    /// station 2.
    pub fn relative_indices(&self) -> [i64; 4] {
        [0, self.j as i64, self.delta, self.delta + self.k as i64]
    }
}

/// Station-1 threshold `x`, station-2 threshold `y` and sum threshold `ell`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub x: f64,
    pub y: f64,
    pub ell: f64,
}

impl Threshold {
    pub fn new(x: f64, y: f64, ell: f64) -> Result<Self> {
        for (name, value) in [("x", x), ("y", y), ("ell", ell)] {
            check_threshold(name, value)?;
        }
        Ok(Self { x, y, ell })
    }

    pub fn xy(x: f64, y: f64) -> Result<Self> {
        Self::new(x, y, 0.0)
    }
}

/// Thresholds may be +inf (impossible event) but not negative or NaN.
pub(crate) fn check_threshold(name: &'static str, value: f64) -> Result<()> {
    if value.is_nan() || value < 0.0 {
        return Err(Error::InvalidThreshold { name, value });
    }
    Ok(())
}

/// The nine mutually exclusive orderings of the observed indices.
///
/// Variant names describe the true index ordering. For cases 7 to 9 the
/// published row labels swap the roles of `j` and `k`; see
/// [`CaseOrdering::table_label`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseOrdering {
    /// n = m, j = k
    SamePairSameGap,
    /// n = m, j < k
    SameStartJLessK,
    /// n < m < n+j < m+k
    InterleavedNFirst,
    /// n < n+j < m < m+k
    DisjointNFirst,
    /// n < m < m+k < n+j
    NestedMkInsideNj,
    /// n = m, j > k
    SameStartJGreaterK,
    /// m < n < m+k < n+j
    InterleavedMFirst,
    /// m < m+k < n < n+j
    DisjointMFirst,
    /// m < n < n+j < m+k
    NestedNjInsideMk,
}

impl CaseOrdering {
    pub const ALL: [CaseOrdering; 9] = [
        CaseOrdering::SamePairSameGap,
        CaseOrdering::SameStartJLessK,
        CaseOrdering::InterleavedNFirst,
        CaseOrdering::DisjointNFirst,
        CaseOrdering::NestedMkInsideNj,
        CaseOrdering::SameStartJGreaterK,
        CaseOrdering::InterleavedMFirst,
        CaseOrdering::DisjointMFirst,
        CaseOrdering::NestedNjInsideMk,
    ];

    /// Case number 1..=9 in the published numbering.
    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    /// The index ordering this case actually covers.
    pub fn ordering(self) -> &'static str {
        match self {
            CaseOrdering::SamePairSameGap => "n = m, j = k",
            CaseOrdering::SameStartJLessK => "n = m, j < k",
            CaseOrdering::InterleavedNFirst => "n < m < n+j < m+k",
            CaseOrdering::DisjointNFirst => "n < n+j < m < m+k",
            CaseOrdering::NestedMkInsideNj => "n < m < m+k < n+j",
            CaseOrdering::SameStartJGreaterK => "n = m, j > k",
            CaseOrdering::InterleavedMFirst => "m < n < m+k < n+j",
            CaseOrdering::DisjointMFirst => "m < m+k < n < n+j",
            CaseOrdering::NestedNjInsideMk => "m < n < n+j < m+k",
        }
    }

    /// Row label as printed in the published tables.
    pub fn table_label(self) -> &'static str {
        match self {
            CaseOrdering::InterleavedMFirst => "m < n < m+j < n+k",
            CaseOrdering::DisjointMFirst => "m < m+j < n < n+k",
            CaseOrdering::NestedNjInsideMk => "m < n < n+k < m+j",
            other => other.ordering(),
        }
    }
}

impl fmt::Display for CaseOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "case {} ({})", self.number(), self.ordering())
    }
}

/// Ordering plus the λ-regime; the regime only changes the formula for
/// [`CaseOrdering::SameStartJLessK`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CaseId {
    pub ordering: CaseOrdering,
    pub regime: Regime,
}

/// Classifies the geometry into one of the nine orderings.
///
/// Coinciding endpoints with n != m (n+j = m, m+k = n, n+j = m+k) are
/// rejected: every published case uses strict inequalities.
pub fn classify_case(g: &PairGeometry) -> Result<CaseOrdering> {
    use std::cmp::Ordering::*;

    let (j, k, d) = (g.j as i64, g.k as i64, g.delta);
    let unclassifiable = Err(Error::UnclassifiableGeometry {
        j: g.j,
        k: g.k,
        delta: g.delta,
    });
    let ordering = match d.cmp(&0) {
        Equal => match j.cmp(&k) {
            Equal => CaseOrdering::SamePairSameGap,
            Less => CaseOrdering::SameStartJLessK,
            Greater => CaseOrdering::SameStartJGreaterK,
        },
        Greater => match (j.cmp(&d), j.cmp(&(d + k))) {
            (Less, _) => CaseOrdering::DisjointNFirst,
            (Equal, _) | (_, Equal) => return unclassifiable,
            (Greater, Less) => CaseOrdering::InterleavedNFirst,
            (Greater, Greater) => CaseOrdering::NestedMkInsideNj,
        },
        Less => {
            // m + k relative to n
            let end2 = d + k;
            match (end2.cmp(&0), end2.cmp(&j)) {
                (Less, _) => CaseOrdering::DisjointMFirst,
                (Equal, _) | (_, Equal) => return unclassifiable,
                (Greater, Less) => CaseOrdering::InterleavedMFirst,
                (Greater, Greater) => CaseOrdering::NestedNjInsideMk,
            }
        }
    };
    Ok(ordering)
}

/// Classifies and attaches the regime of `p`.
pub fn classify(g: &PairGeometry, p: &RateParams) -> Result<CaseId> {
    Ok(CaseId {
        ordering: classify_case(g)?,
        regime: p.regime(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_is_ratio() {
        let p = validate_params(10.0, 2.0).unwrap();
        assert!((p.alpha() - 10.0 / 12.0).abs() < 1e-15);
        assert_eq!(validate_params(7.0, 7.0).unwrap().alpha(), 0.5);
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(matches!(
            validate_params(4.0, -1.0),
            Err(Error::NonPositiveRate { name: "mu", .. })
        ));
        assert!(matches!(
            validate_params(0.0, 1.0),
            Err(Error::NonPositiveRate { name: "lambda", .. })
        ));
        assert!(matches!(
            validate_params(f64::NAN, 1.0),
            Err(Error::NonFinite { .. })
        ));
        assert!(matches!(
            validate_params(1.0, f64::INFINITY),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn regime_band() {
        assert_eq!(Regime::of(7.0, 7.0), Regime::LambdaEqual);
        assert_eq!(Regime::of(7.0 * (1.0 + 1e-12), 7.0), Regime::LambdaEqual);
        assert_eq!(Regime::of(7.0 * (1.0 + 1e-6), 7.0), Regime::LambdaGreater);
        assert_eq!(Regime::of(4.0, 5.0), Regime::LambdaLess);
    }

    #[test]
    fn table_rows_classify() {
        let c = |j, k, d| classify_case(&PairGeometry::new(j, k, d).unwrap()).unwrap();
        assert_eq!(c(2, 2, 0), CaseOrdering::SamePairSameGap);
        assert_eq!(c(2, 6, 0), CaseOrdering::SameStartJLessK);
        assert_eq!(c(3, 5, 1), CaseOrdering::InterleavedNFirst);
        assert_eq!(c(2, 5, 3), CaseOrdering::DisjointNFirst);
        assert_eq!(c(6, 2, 1), CaseOrdering::NestedMkInsideNj);
        assert_eq!(c(6, 2, 0), CaseOrdering::SameStartJGreaterK);
        assert_eq!(c(5, 3, -1), CaseOrdering::InterleavedMFirst);
        assert_eq!(c(3, 2, -3), CaseOrdering::DisjointMFirst);
        assert_eq!(c(2, 6, -1), CaseOrdering::NestedNjInsideMk);
    }

    #[test]
    fn boundary_coincidences_rejected() {
        for (j, k, d) in [(2, 3, 2), (3, 2, -2), (4, 2, 2), (1, 4, -3)] {
            let g = PairGeometry::new(j, k, d).unwrap();
            assert!(
                matches!(classify_case(&g), Err(Error::UnclassifiableGeometry { .. })),
                "{j} {k} {d}"
            );
        }
    }

    /// Brute-force ordering of the four concrete indices.
    fn brute(j: i64, k: i64, d: i64) -> Option<CaseOrdering> {
        let (n, nj, m, mk) = (0, j, d, d + k);
        use CaseOrdering::*;
        if n == m {
            return Some(match j.cmp(&k) {
                std::cmp::Ordering::Equal => SamePairSameGap,
                std::cmp::Ordering::Less => SameStartJLessK,
                std::cmp::Ordering::Greater => SameStartJGreaterK,
            });
        }
        let chain = |v: [i64; 4]| v.windows(2).all(|w| w[0] < w[1]);
        let hits: Vec<_> = [
            (chain([n, m, nj, mk]), InterleavedNFirst),
            (chain([n, nj, m, mk]), DisjointNFirst),
            (chain([n, m, mk, nj]), NestedMkInsideNj),
            (chain([m, n, mk, nj]), InterleavedMFirst),
            (chain([m, mk, n, nj]), DisjointMFirst),
            (chain([m, n, nj, mk]), NestedNjInsideMk),
        ]
        .into_iter()
        .filter_map(|(hit, c)| hit.then_some(c))
        .collect();
        assert!(hits.len() <= 1, "predicates overlap at {j} {k} {d}");
        hits.first().copied()
    }

    #[test]
    fn exhaustive_classification_matches_brute_force() {
        for d in -10..=10 {
            for j in 1..=8u32 {
                for k in 1..=8u32 {
                    let g = PairGeometry::new(j, k, d).unwrap();
                    let got = classify_case(&g).ok();
                    assert_eq!(got, brute(j as i64, k as i64, d), "j={j} k={k} d={d}");
                }
            }
        }
    }

    #[test]
    fn alpha_monotone() {
        let a = |l, m| validate_params(l, m).unwrap().alpha();
        assert!(a(3.0, 2.0) < a(3.5, 2.0));
        assert!(a(3.0, 2.0) > a(3.0, 2.5));
    }

    #[test]
    fn geometry_rejects_zero_gap_and_negative_m() {
        assert!(PairGeometry::new(0, 2, 0).is_err());
        assert!(PairGeometry::with_start(1, 2, -2, 3).is_err());
        let g = PairGeometry::new(2, 6, -1).unwrap();
        assert_eq!((g.n(), g.m()), (1, 0));
    }
}
