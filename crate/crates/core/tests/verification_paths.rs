//! Cross-checks between the closed forms, the pair simulator, the event
//! oracle and the full-trajectory simulator through the public API.

use overlapq::analytic::case2_components;
use overlapq::simulator::estimate_cross_pair_tail_trajectory;
use overlapq::tables::TableId;
use overlapq::{
    classify, cross_pair_tail, estimate_cross_pair_tail, extract_overlap, mc_event_probability,
    simulate_tandem, validate_params, Error, EventSpec, PairGeometry, Side, SimConfig, Threshold,
};

#[test]
fn three_paths_agree_on_table_two() {
    let (lambda, mu, x, y) = TableId::T2.parameters();
    let p = validate_params(lambda, mu).unwrap();
    for (i, row) in TableId::T2.rows().iter().enumerate() {
        let g = row.geometry().unwrap();
        let analytic = cross_pair_tail(&p, &g, x, y).unwrap().probability;
        let spec = EventSpec { case: classify(&g, &p).unwrap(), side: Side::Both, thresholds: Threshold::xy(x, y).unwrap() };
        let oracle = mc_event_probability(&spec, &p, &g, SimConfig::new(200_000, 40 + i as u64, 1)).unwrap();
        let sim = estimate_cross_pair_tail(&p, &g, x, y, SimConfig::new(200_000, 80 + i as u64, 1)).unwrap();
        assert!(oracle.z_score(analytic).abs() < 4.5, "{:?}: oracle {} vs {analytic}", row.case, oracle.p_hat);
        assert!(sim.z_score(analytic).abs() < 4.5, "{:?}: sim {} vs {analytic}", row.case, sim.p_hat);
    }
}

#[test]
fn case2_branches_match_oracle_sides() {
    let p = validate_params(7.0, 7.0).unwrap();
    let g = PairGeometry::new(2, 6, 0).unwrap();
    let (x, y) = (0.04, 0.06);
    let (e2, e2c) = case2_components(&p, 2, 6, x, y).unwrap();
    for (side, want, seed) in [(Side::E2, e2, 3), (Side::E2Complement, e2c, 4)] {
        let spec = EventSpec { case: classify(&g, &p).unwrap(), side, thresholds: Threshold::xy(x, y).unwrap() };
        let est = mc_event_probability(&spec, &p, &g, SimConfig::new(400_000, seed, 1)).unwrap();
        assert!(est.z_score(want).abs() < 4.5, "{side:?}: {} vs {want}", est.p_hat);
    }
}

#[test]
fn trajectory_simulator_matches_closed_form() {
    let p = validate_params(10.0, 2.0).unwrap();
    let g = PairGeometry::new(3, 5, 1).unwrap();
    let want = cross_pair_tail(&p, &g, 0.004, 0.006).unwrap().probability;
    let est = estimate_cross_pair_tail_trajectory(&p, &g, 0.004, 0.006, 300_000, 9).unwrap();
    assert!(est.z_score(want).abs() < 4.5, "{} ± {} vs {want}", est.p_hat, est.stderr);
}

#[test]
fn trajectories_expose_overlaps() {
    let p = validate_params(3.0, 1.0).unwrap();
    let t = simulate_tandem(&p, 50, 2, 1).unwrap();
    let o = extract_overlap(&t, 1, 10, 2).unwrap();
    assert!(o >= 0.0);
    assert!(matches!(extract_overlap(&t, 1, 49, 2), Err(Error::IndexOutOfRange { .. })));
    assert!(extract_overlap(&t, 3, 0, 1).is_err());
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(matches!(validate_params(0.0, 1.0), Err(Error::NonPositiveRate { .. })));
    assert!(matches!(validate_params(f64::NAN, 1.0), Err(Error::NonFinite { .. }) | Err(Error::NonPositiveRate { .. })));
    let p = validate_params(1.0, 1.0).unwrap();
    let g = PairGeometry::new(2, 2, 0).unwrap();
    assert!(cross_pair_tail(&p, &g, -0.1, 0.0).is_err());
    assert!(estimate_cross_pair_tail(&p, &g, 0.1, 0.1, SimConfig::new(0, 1, 1)).is_err());
    assert!(estimate_cross_pair_tail(&p, &g, 0.1, 0.1, SimConfig::new(10, 1, 0)).is_err());
}
