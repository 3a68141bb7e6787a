//! Verification paths independent of the closed forms and of the queue
//! recursion: indicator Monte Carlo over linear event systems in the raw gap
//! and service variables, and deterministic quadrature for cross moments.

mod events;
pub mod quadrature;

pub use events::{
    build_event_system, same_pair_literal_system, Constraint, EventSpec, EventSystem, Side, VarKind,
};

use crate::analytic::joint_same_pair_tail;
use crate::error::{Error, Result};
use crate::model::{PairGeometry, RateParams};
use crate::sampling::{count_hits, erlang, exponential};
use crate::simulator::{SimConfig, TailEstimate};

/// Draw every variable of `vars` in order.
fn draw(rng: &mut rand_chacha::ChaCha8Rng, vars: &[VarKind], lam: f64, mu: f64, out: &mut [f64]) {
    for (slot, kind) in out.iter_mut().zip(vars) {
        *slot = match *kind {
            VarKind::Gap { shape } => erlang(rng, shape, lam),
            VarKind::Service => exponential(rng, mu),
        };
    }
}

/// Indicator frequency of the event selected by `spec` on geometry `g`.
///
/// The same-pair case uses the hand-written two-branch decomposition; the
/// other orderings use the system generated from the overlap definition.
pub fn mc_event_probability(spec: &EventSpec, p: &RateParams, g: &PairGeometry, cfg: SimConfig) -> Result<TailEstimate> {
    events::check_spec(spec, g)?;
    let (x, y) = (spec.thresholds.x, spec.thresholds.y);
    let systems = if events::is_same_pair(spec.case.ordering) {
        let k = g.k() as u64;
        match spec.side {
            Side::Both => vec![same_pair_literal_system(k, Side::E2)?, same_pair_literal_system(k, Side::E2Complement)?],
            side => vec![same_pair_literal_system(k, side)?],
        }
    } else {
        vec![build_event_system(g, spec.side)]
    };
    let vars = systems[0].vars.clone();
    let (lam, mu) = (p.lambda(), p.mu());
    let hits = count_hits(cfg.n_samples, cfg.seed, cfg.workers, |rng| {
        let mut v = [0.0; 12];
        draw(rng, &vars, lam, mu, &mut v[..vars.len()]);
        systems.iter().any(|s| s.holds(&v, x, y))
    })?;
    Ok(TailEstimate::from_counts(hits, cfg.n_samples, cfg.seed))
}

/// E[O¹·O²] for the same pair as ∫∫ P(O¹ > x, O² > y) dx dy, with
/// u = e^{−2μx}, v = e^{−2μy} mapping the quadrant onto the unit square.
pub fn quadrature_cross_moment(p: &RateParams, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidGeometry("gap k must be >= 1".into()));
    }
    let two_mu = 2.0 * p.mu();
    let integrand = |u: f64, v: f64| {
        let x = -u.ln() / two_mu;
        let y = -v.ln() / two_mu;
        joint_same_pair_tail(p, k, x, y) / (two_mu * two_mu * u * v)
    };
    let scale = joint_same_pair_tail(p, k, 0.0, 0.0) / (two_mu * two_mu);
    let (val, _) = quadrature::integrate_square(integrand, 0.0, 1.0, 1e-12 * scale)?;
    Ok(val)
}
