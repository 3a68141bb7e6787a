use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::RateParams;
use crate::sampling::exponential;

/// One sample path of an N-station tandem of infinite-server stations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    arrivals: Vec<f64>,
    /// `services[i][n]` is customer n's service time at station i+1.
    services: Vec<Vec<f64>>,
    /// `departures[i][n]` is customer n's departure time from station i+1.
    departures: Vec<Vec<f64>>,
}

impl Trajectory {
    /// Build from arrival times and per-station service times.
    pub fn from_parts(arrivals: Vec<f64>, services: Vec<Vec<f64>>) -> Result<Self> {
        if services.is_empty() {
            return Err(Error::Precondition("need at least one station".into()));
        }
        if arrivals.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Precondition("arrival times must be nondecreasing".into()));
        }
        let mut departures = Vec::with_capacity(services.len());
        let mut prev = &arrivals;
        for st in &services {
            if st.len() != arrivals.len() {
                return Err(Error::Precondition("one service time per customer per station".into()));
            }
            if st.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
                return Err(Error::Precondition("service times must be positive and finite".into()));
            }
            departures.push(prev.iter().zip(st).map(|(d, s)| d + s).collect());
            prev = departures.last().unwrap();
        }
        Ok(Trajectory { arrivals, services, departures })
    }

    pub fn n_customers(&self) -> usize {
        self.arrivals.len()
    }

    pub fn n_stations(&self) -> usize {
        self.services.len()
    }

    pub fn arrivals(&self) -> &[f64] {
        &self.arrivals
    }

    /// Service times at `station` (1-based).
    pub fn services(&self, station: usize) -> Result<&[f64]> {
        self.check_station(station)?;
        Ok(&self.services[station - 1])
    }

    /// Departure times from `station`; station 0 is the arrival stream.
    pub fn departures(&self, station: usize) -> Result<&[f64]> {
        if station == 0 {
            return Ok(&self.arrivals);
        }
        self.check_station(station)?;
        Ok(&self.departures[station - 1])
    }

    fn check_station(&self, station: usize) -> Result<()> {
        if station == 0 || station > self.n_stations() {
            return Err(Error::IndexOutOfRange { index: station, len: self.n_stations() });
        }
        Ok(())
    }
}

/// Poisson(λ) arrivals from time 0 and exponential(μ) services at every
/// station, drawn from a single stream seeded by `seed`.
pub fn simulate_tandem(p: &RateParams, n_customers: usize, n_stations: usize, seed: u64) -> Result<Trajectory> {
    if n_customers < 2 {
        return Err(Error::Precondition("need at least two customers".into()));
    }
    if n_stations < 1 {
        return Err(Error::Precondition("need at least one station".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arrivals = Vec::with_capacity(n_customers);
    let mut t = 0.0;
    arrivals.push(t);
    for _ in 1..n_customers {
        t += exponential(&mut rng, p.lambda());
        arrivals.push(t);
    }
    let services = (0..n_stations)
        .map(|_| (0..n_customers).map(|_| exponential(&mut rng, p.mu())).collect())
        .collect();
    Trajectory::from_parts(arrivals, services)
}

/// Time customers n and n+gap are both present at `station`:
/// (min D^{(i)} − max D^{(i−1)})⁺.
pub fn extract_overlap(t: &Trajectory, station: usize, n: usize, gap: usize) -> Result<f64> {
    let len = t.n_customers();
    let last = n.checked_add(gap).filter(|&l| l < len).ok_or(Error::IndexOutOfRange {
        index: n.saturating_add(gap),
        len,
    })?;
    if station == 0 {
        return Err(Error::IndexOutOfRange { index: 0, len: t.n_stations() });
    }
    let before = t.departures(station - 1)?;
    let after = t.departures(station)?;
    Ok(overlap(before[n], before[last], after[n], after[last]))
}

/// (min(out_a, out_b) − max(in_a, in_b))⁺.
#[inline]
pub(crate) fn overlap(in_a: f64, in_b: f64, out_a: f64, out_b: f64) -> f64 {
    (out_a.min(out_b) - in_a.max(in_b)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_params;
    use proptest::prelude::*;

    #[test]
    fn hand_example() {
        let t = Trajectory::from_parts(vec![0.0, 1.0], vec![vec![5.0, 1.0], vec![5.0, 10.0]]).unwrap();
        assert_eq!(extract_overlap(&t, 1, 0, 1).unwrap(), 1.0);
        assert_eq!(extract_overlap(&t, 2, 0, 1).unwrap(), 5.0);
    }

    #[test]
    fn disjoint_sojourns_give_zero() {
        let t = Trajectory::from_parts(vec![0.0, 3.0], vec![vec![1.0, 1.0]]).unwrap();
        assert_eq!(extract_overlap(&t, 1, 0, 1).unwrap(), 0.0);
    }

    #[test]
    fn departure_recursion_exact() {
        let p = validate_params(10.0, 2.0).unwrap();
        let t = simulate_tandem(&p, 2, 2, 11).unwrap();
        let s1 = t.services(1).unwrap();
        assert_eq!(t.departures(1).unwrap()[1], t.arrivals()[1] + s1[1]);
        assert_eq!(t.departures(2).unwrap()[0], t.departures(1).unwrap()[0] + t.services(2).unwrap()[0]);
    }

    #[test]
    fn seeded_runs_are_identical() {
        let p = validate_params(10.0, 2.0).unwrap();
        assert_eq!(simulate_tandem(&p, 100, 3, 42).unwrap(), simulate_tandem(&p, 100, 3, 42).unwrap());
        assert_ne!(simulate_tandem(&p, 100, 3, 42).unwrap(), simulate_tandem(&p, 100, 3, 43).unwrap());
    }

    #[test]
    fn mean_interarrival() {
        let p = validate_params(10.0, 2.0).unwrap();
        let n = 1_000_000;
        let t = simulate_tandem(&p, n + 1, 1, 7).unwrap();
        let mean = t.arrivals()[n] / n as f64;
        assert!((mean - 0.1).abs() < 3.0 * 0.1 / 1000.0, "{mean}");
    }

    #[test]
    fn bad_indices() {
        let p = validate_params(1.0, 1.0).unwrap();
        let t = simulate_tandem(&p, 5, 2, 1).unwrap();
        assert!(matches!(extract_overlap(&t, 1, 3, 2), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(extract_overlap(&t, 3, 0, 1), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(extract_overlap(&t, 0, 0, 1), Err(Error::IndexOutOfRange { .. })));
        assert!(simulate_tandem(&p, 1, 2, 1).is_err());
        assert!(simulate_tandem(&p, 4, 0, 1).is_err());
    }

    proptest! {
        #[test]
        fn station1_matches_single_station_form(seed in any::<u64>(), n in 0usize..40, k in 1usize..10) {
            let p = validate_params(3.0, 2.0).unwrap();
            let t = simulate_tandem(&p, 50, 2, seed).unwrap();
            let a = t.arrivals();
            let s = t.services(1).unwrap();
            let single = (s[n] - (a[n + k] - a[n])).max(0.0).min(s[n + k]);
            // Same quantity up to the rounding of A + S.
            prop_assert!((extract_overlap(&t, 1, n, k).unwrap() - single).abs() <= 1e-12 * (1.0 + a[n + k]));
        }

        #[test]
        fn overlap_bounded_by_service(seed in any::<u64>(), n in 0usize..40, k in 1usize..10, st in 1usize..=3) {
            let p = validate_params(5.0, 1.0).unwrap();
            let t = simulate_tandem(&p, 50, 3, seed).unwrap();
            let o = extract_overlap(&t, st, n, k).unwrap();
            let s = t.services(st).unwrap();
            let slack = 1e-12 * (1.0 + t.departures(st).unwrap()[n + k]);
            prop_assert!(o >= 0.0 && o <= s[n] + slack && o <= s[n + k] + slack);
        }
    }
}
