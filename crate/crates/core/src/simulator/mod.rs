//! Monte Carlo estimators for the overlap-time probabilities.
//!
//! Replication mode draws, for every sample, only the variables one pair
//! query needs: Erlang gaps between the distinct customer indices involved and
//! the service times of those customers. Trajectory mode scans one long sample
//! path and exists to check that only gaps matter.

mod trajectory;

pub use trajectory::{extract_overlap, simulate_tandem, Trajectory};

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{conjecture_joint_tail, MomentSet};
use crate::error::{Error, Result};
use crate::model::{check_threshold, classify_case, PairGeometry, RateParams};
use crate::sampling::{count_hits, erlang, exponential, run_chunks};
use trajectory::overlap;

/// Number of batches used for batch-means standard errors.
pub const BATCHES: usize = 100;

/// Sample size, seed and parallelism of one estimator run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_samples: u64,
    pub seed: u64,
    pub workers: usize,
}

impl SimConfig {
    pub fn new(n_samples: u64, seed: u64, workers: usize) -> Self {
        SimConfig { n_samples, seed, workers }
    }
}

/// A Monte Carlo probability estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub p_hat: f64,
    pub n: u64,
    pub successes: u64,
    pub stderr: f64,
    pub seed: u64,
}

impl TailEstimate {
    /// Binomial estimate from a hit count.
    pub fn from_counts(successes: u64, n: u64, seed: u64) -> Self {
        let p_hat = successes as f64 / n as f64;
        TailEstimate { p_hat, n, successes, stderr: (p_hat * (1.0 - p_hat) / n as f64).sqrt(), seed }
    }

    /// (p̂ − reference)/stderr. A zero standard error gives 0 on exact
    /// agreement and ±∞ otherwise.
    pub fn z_score(&self, reference: f64) -> f64 {
        z_ratio(self.p_hat - reference, self.stderr)
    }

    /// z-score of the difference of two independent estimates.
    pub fn combined_z(&self, other: &TailEstimate) -> f64 {
        z_ratio(self.p_hat - other.p_hat, self.stderr.hypot(other.stderr))
    }
}

pub(crate) fn z_ratio(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// Where the customers of a pair query sit among the distinct indices.
struct Layout {
    /// Gaps between consecutive distinct indices, in customers.
    gaps: Vec<u64>,
    /// Positions of n, n+j, m, m+k among the distinct indices.
    pos: [usize; 4],
}

impl Layout {
    fn new(g: &PairGeometry) -> Self {
        let rel = g.relative_indices();
        let mut distinct = rel.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let gaps = distinct.windows(2).map(|w| (w[1] - w[0]) as u64).collect();
        let pos = rel.map(|r| distinct.binary_search(&r).unwrap());
        Layout { gaps, pos }
    }

    fn len(&self) -> usize {
        self.gaps.len() + 1
    }

    /// (O¹_{n,n+j}, O²_{m,m+k}) for one fresh replication.
    fn sample(&self, rng: &mut ChaCha8Rng, lam: f64, mu: f64) -> (f64, f64) {
        let mut arr = [0.0; 4];
        for (i, &gap) in self.gaps.iter().enumerate() {
            arr[i + 1] = arr[i] + erlang(rng, gap, lam);
        }
        let mut dep1 = [0.0; 4];
        for i in 0..self.len() {
            dep1[i] = arr[i] + exponential(rng, mu);
        }
        let [a, b, c, d] = self.pos;
        let o1 = overlap(arr[a], arr[b], dep1[a], dep1[b]);
        let out_c = dep1[c] + exponential(rng, mu);
        let out_d = dep1[d] + exponential(rng, mu);
        let o2 = overlap(dep1[c], dep1[d], out_c, out_d);
        (o1, o2)
    }
}

/// Overlaps of the pair (0, k) at each of `N` stations, written into `out`.
#[inline]
fn same_pair_overlaps(rng: &mut ChaCha8Rng, lam: f64, mu: f64, k: u64, out: &mut [f64]) {
    let mut first = 0.0;
    let mut second = erlang(rng, k, lam);
    for o in out.iter_mut() {
        let f = first + exponential(rng, mu);
        let s = second + exponential(rng, mu);
        *o = overlap(first, second, f, s);
        first = f;
        second = s;
    }
}

/// P(O¹_{n,n+j} > x, O²_{m,m+k} > y) by replication.
pub fn estimate_cross_pair_tail(
    p: &RateParams,
    g: &PairGeometry,
    x: f64,
    y: f64,
    cfg: SimConfig,
) -> Result<TailEstimate> {
    classify_case(g)?;
    check_threshold("x", x)?;
    check_threshold("y", y)?;
    let layout = Layout::new(g);
    let (lam, mu) = (p.lambda(), p.mu());
    let hits = count_hits(cfg.n_samples, cfg.seed, cfg.workers, |rng| {
        let (o1, o2) = layout.sample(rng, lam, mu);
        o1 > x && o2 > y
    })?;
    Ok(TailEstimate::from_counts(hits, cfg.n_samples, cfg.seed))
}

/// P(O¹ + O² > ℓ) for the same pair (n, n+k) in both stations.
pub fn estimate_sum_tail(p: &RateParams, k: u32, ell: f64, cfg: SimConfig) -> Result<TailEstimate> {
    check_gap(k)?;
    check_threshold("ell", ell)?;
    let (lam, mu) = (p.lambda(), p.mu());
    let hits = count_hits(cfg.n_samples, cfg.seed, cfg.workers, |rng| {
        let mut o = [0.0; 2];
        same_pair_overlaps(rng, lam, mu, k as u64, &mut o);
        o[0] + o[1] > ell
    })?;
    Ok(TailEstimate::from_counts(hits, cfg.n_samples, cfg.seed))
}

fn check_gap(k: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidGeometry("gap k must be >= 1".into()));
    }
    Ok(())
}

/// Sample moments of (O¹, O²) with batch-means standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub estimate: MomentSet,
    pub stderr: MomentSet,
    pub n: u64,
    pub batches: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    n: u64,
    s1: f64,
    s2: f64,
    s11: f64,
    s22: f64,
    s12: f64,
}

impl Sums {
    fn push(&mut self, a: f64, b: f64) {
        self.n += 1;
        self.s1 += a;
        self.s2 += b;
        self.s11 += a * a;
        self.s22 += b * b;
        self.s12 += a * b;
    }

    fn merge(&mut self, o: &Sums) {
        self.n += o.n;
        self.s1 += o.s1;
        self.s2 += o.s2;
        self.s11 += o.s11;
        self.s22 += o.s22;
        self.s12 += o.s12;
    }

    fn moments(&self) -> MomentSet {
        let n = self.n as f64;
        let (e1, e2) = (self.s1 / n, self.s2 / n);
        let e12 = self.s12 / n;
        MomentSet {
            e1,
            e2,
            var1: self.s11 / n - e1 * e1,
            var2: self.s22 / n - e2 * e2,
            cov: e12 - e1 * e2,
            e12,
        }
    }
}

fn batch_of(i: u64, n: u64) -> usize {
    ((i as u128 * BATCHES as u128) / n as u128) as usize
}

/// Means, variances and covariance of the same-pair overlaps with standard
/// errors from [`BATCHES`] contiguous batches.
pub fn estimate_moments(p: &RateParams, k: u32, cfg: SimConfig) -> Result<MomentEstimate> {
    check_gap(k)?;
    if cfg.n_samples < BATCHES as u64 {
        return Err(Error::Precondition(format!("need at least {BATCHES} samples for batch means")));
    }
    let (lam, mu) = (p.lambda(), p.mu());
    let n = cfg.n_samples;
    let per_chunk = run_chunks(n, cfg.seed, cfg.workers, |chunk, rng| {
        let mut out: Vec<(usize, Sums)> = Vec::new();
        for i in chunk.start..chunk.start + chunk.len {
            let b = batch_of(i, n);
            if out.last().is_none_or(|(last, _)| *last != b) {
                out.push((b, Sums::default()));
            }
            let mut o = [0.0; 2];
            same_pair_overlaps(rng, lam, mu, k as u64, &mut o);
            out.last_mut().unwrap().1.push(o[0], o[1]);
        }
        out
    })?;

    let mut batches = vec![Sums::default(); BATCHES];
    for (b, s) in per_chunk.iter().flatten() {
        batches[*b].merge(s);
    }
    let mut total = Sums::default();
    for b in &batches {
        total.merge(b);
    }
    let per_batch: Vec<MomentSet> = batches.iter().map(Sums::moments).collect();
    let se = |f: fn(&MomentSet) -> f64| {
        let vals: Vec<f64> = per_batch.iter().map(f).collect();
        let m = vals.iter().sum::<f64>() / BATCHES as f64;
        let var = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
        (var / BATCHES as f64).sqrt()
    };
    Ok(MomentEstimate {
        estimate: total.moments(),
        stderr: MomentSet {
            e1: se(|m| m.e1),
            e2: se(|m| m.e2),
            var1: se(|m| m.var1),
            var2: se(|m| m.var2),
            cov: se(|m| m.cov),
            e12: se(|m| m.e12),
        },
        n,
        batches: BATCHES,
        seed: cfg.seed,
    })
}

/// Simulated N-station same-pair tail against the conjectured closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjectureReport {
    pub estimate: TailEstimate,
    pub conjectured: f64,
    pub z: f64,
}

/// Compare P(all N overlaps of (n, n+k) exceed their thresholds) with
/// e^{−2μΣxᵢ}α^k/2^{N−1}, for N = `xs.len()` >= 3.
pub fn conjecture_check(p: &RateParams, k: u32, xs: &[f64], cfg: SimConfig) -> Result<ConjectureReport> {
    check_gap(k)?;
    if xs.len() < 3 {
        return Err(Error::Precondition(format!(
            "conjecture check needs N >= 3 stations, got {}; N <= 2 is covered by the closed forms",
            xs.len()
        )));
    }
    let conjectured = conjecture_joint_tail(p, k, xs)?;
    let (lam, mu) = (p.lambda(), p.mu());
    let hits = count_hits(cfg.n_samples, cfg.seed, cfg.workers, |rng| {
        let mut o = vec![0.0; xs.len()];
        same_pair_overlaps(rng, lam, mu, k as u64, &mut o);
        o.iter().zip(xs).all(|(o, x)| o > x)
    })?;
    let estimate = TailEstimate::from_counts(hits, cfg.n_samples, cfg.seed);
    Ok(ConjectureReport { estimate, conjectured, z: estimate.z_score(conjectured) })
}

/// Estimate the cross-pair tail from one long trajectory, using every
/// customer position as a pair start. Pairs overlap in time, so the standard
/// error comes from [`BATCHES`] contiguous batches.
pub fn estimate_cross_pair_tail_trajectory(
    p: &RateParams,
    g: &PairGeometry,
    x: f64,
    y: f64,
    n_customers: usize,
    seed: u64,
) -> Result<TailEstimate> {
    classify_case(g)?;
    check_threshold("x", x)?;
    check_threshold("y", y)?;
    let rel = g.relative_indices();
    let lo = *rel.iter().min().unwrap();
    let hi = *rel.iter().max().unwrap();
    let span = (hi - lo) as usize;
    if n_customers < span + BATCHES {
        return Err(Error::Precondition(format!(
            "trajectory of {n_customers} customers too short for span {span}"
        )));
    }
    let t = simulate_tandem(p, n_customers, 2, seed)?;
    let a = t.arrivals();
    let d1 = t.departures(1)?;
    let d2 = t.departures(2)?;
    let n_pairs = n_customers - span;
    let mut batch_hits = vec![0u64; BATCHES];
    let mut batch_n = vec![0u64; BATCHES];
    for start in 0..n_pairs {
        let at = |r: i64| (start as i64 + r - lo) as usize;
        let (n1, n2, m1, m2) = (at(rel[0]), at(rel[1]), at(rel[2]), at(rel[3]));
        let o1 = overlap(a[n1], a[n2], d1[n1], d1[n2]);
        let o2 = overlap(d1[m1], d1[m2], d2[m1], d2[m2]);
        let b = batch_of(start as u64, n_pairs as u64);
        batch_n[b] += 1;
        if o1 > x && o2 > y {
            batch_hits[b] += 1;
        }
    }
    let successes: u64 = batch_hits.iter().sum();
    let p_hat = successes as f64 / n_pairs as f64;
    let means: Vec<f64> = batch_hits.iter().zip(&batch_n).map(|(&h, &n)| h as f64 / n as f64).collect();
    let m = means.iter().sum::<f64>() / BATCHES as f64;
    let var = means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
    Ok(TailEstimate {
        p_hat,
        n: n_pairs as u64,
        successes,
        stderr: (var / BATCHES as f64).sqrt(),
        seed,
    })
}
