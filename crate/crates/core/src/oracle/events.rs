use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{classify_case, CaseId, CaseOrdering, PairGeometry, Threshold};

/// Which branch of the departure order at station 1 of the station-2 pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// The earlier station-2 customer leaves station 1 first.
    E2,
    /// The later station-2 customer leaves station 1 first.
    E2Complement,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    pub case: CaseId,
    pub side: Side,
    pub thresholds: Threshold,
}

/// Kind of a raw variable drawn by the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    /// Erlang(shape, λ) arrival gap.
    Gap { shape: u64 },
    /// Exponential(μ) service time at a station.
    Service,
}

/// Σ coeffs·v  >  x_coef·x + y_coef·y  (or ≥ when `strict` is false).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub x_coef: f64,
    pub y_coef: f64,
    pub strict: bool,
}

impl Constraint {
    fn new(coeffs: &[(usize, f64)], x_coef: f64, y_coef: f64) -> Self {
        Constraint { coeffs: coeffs.to_vec(), x_coef, y_coef, strict: true }
    }

    fn weak(mut self) -> Self {
        self.strict = false;
        self
    }

    #[inline]
    pub fn holds(&self, vars: &[f64], x: f64, y: f64) -> bool {
        let lhs: f64 = self.coeffs.iter().map(|&(i, c)| c * vars[i]).sum();
        let rhs = self.x_coef * x + self.y_coef * y;
        if self.strict {
            lhs > rhs
        } else {
            lhs >= rhs
        }
    }
}

/// A conjunction of linear inequalities over independently drawn variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSystem {
    pub vars: Vec<VarKind>,
    pub constraints: Vec<Constraint>,
}

impl EventSystem {
    pub fn holds(&self, vars: &[f64], x: f64, y: f64) -> bool {
        self.constraints.iter().all(|c| c.holds(vars, x, y))
    }
}

/// Linear form over the oracle variables.
type Form = Vec<(usize, f64)>;

fn combine(a: &Form, sa: f64, b: &Form, sb: f64) -> Form {
    let mut out: Form = Vec::new();
    let terms = a.iter().map(|&(i, c)| (i, c * sa)).chain(b.iter().map(|&(i, c)| (i, c * sb)));
    for (i, c) in terms {
        match out.iter_mut().find(|(j, _)| *j == i) {
            Some(slot) => slot.1 += c,
            None => out.push((i, c)),
        }
    }
    out.retain(|&(_, c)| c != 0.0);
    out.sort_by_key(|&(i, _)| i);
    out
}

/// Event system built from the overlap definition: O > t holds exactly when
/// every exit time of the pair exceeds every entry time by more than t.
pub fn build_event_system(g: &PairGeometry, side: Side) -> EventSystem {
    let rel = g.relative_indices();
    let mut distinct = rel.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let r = distinct.len();

    // Variables: r−1 gaps, then r station-1 services, then r station-2 services.
    let mut vars: Vec<VarKind> =
        distinct.windows(2).map(|w| VarKind::Gap { shape: (w[1] - w[0]) as u64 }).collect();
    vars.extend(std::iter::repeat_n(VarKind::Service, 2 * r));
    let gap0 = 0;
    let s1 = r - 1;
    let s2 = s1 + r;

    let arrival = |p: usize| -> Form { (0..p).map(|i| (gap0 + i, 1.0)).collect() };
    let dep1 = |p: usize| -> Form { combine(&arrival(p), 1.0, &vec![(s1 + p, 1.0)], 1.0) };
    let dep2 = |p: usize| -> Form { combine(&dep1(p), 1.0, &vec![(s2 + p, 1.0)], 1.0) };
    let pos = rel.map(|v| distinct.binary_search(&v).unwrap());
    let [a, b, c, d] = pos;

    let mut constraints = Vec::new();
    for (u, v) in [(a, a), (a, b), (b, a), (b, b)] {
        let diff = combine(&dep1(u), 1.0, &arrival(v), -1.0);
        constraints.push(Constraint::new(&diff, 1.0, 0.0));
    }
    for (u, v) in [(c, c), (c, d), (d, c), (d, d)] {
        let diff = combine(&dep2(u), 1.0, &dep1(v), -1.0);
        constraints.push(Constraint::new(&diff, 0.0, 1.0));
    }
    match side {
        Side::E2 => constraints.push(Constraint::new(&combine(&dep1(d), 1.0, &dep1(c), -1.0), 0.0, 0.0).weak()),
        Side::E2Complement => constraints.push(Constraint::new(&combine(&dep1(c), 1.0, &dep1(d), -1.0), 0.0, 0.0)),
        Side::Both => {}
    }
    EventSystem { vars, constraints }
}

/// The same-pair decomposition written out directly in the variables
/// (𝒜_k, S¹_n, S¹_{n+k}, S²_n, S²_{n+k}).
pub fn same_pair_literal_system(k: u64, side: Side) -> Result<EventSystem> {
    const A: usize = 0;
    const S1N: usize = 1;
    const S1NK: usize = 2;
    const S2N: usize = 3;
    const S2NK: usize = 4;
    let vars = vec![VarKind::Gap { shape: k }, VarKind::Service, VarKind::Service, VarKind::Service, VarKind::Service];
    let c = |coeffs: &[(usize, f64)], x: f64, y: f64| Constraint::new(coeffs, x, y);
    let constraints = match side {
        // {S¹_n − 𝒜 > x, S¹_{n+k} > x, S²_{n+k} > y, S¹_n + S²_n − 𝒜 − S¹_{n+k} > y, 𝒜 + S¹_{n+k} ≥ S¹_n}
        Side::E2 => vec![
            c(&[(S1N, 1.0), (A, -1.0)], 1.0, 0.0),
            c(&[(S1NK, 1.0)], 1.0, 0.0),
            c(&[(S2NK, 1.0)], 0.0, 1.0),
            c(&[(S1N, 1.0), (S2N, 1.0), (A, -1.0), (S1NK, -1.0)], 0.0, 1.0),
            c(&[(A, 1.0), (S1NK, 1.0), (S1N, -1.0)], 0.0, 0.0).weak(),
        ],
        // {S¹_n > 𝒜 + S¹_{n+k}, S¹_{n+k} > x, S²_n > y, 𝒜 + S¹_{n+k} + S²_{n+k} − S¹_n > y}
        Side::E2Complement => vec![
            c(&[(S1N, 1.0), (A, -1.0), (S1NK, -1.0)], 0.0, 0.0),
            c(&[(S1NK, 1.0)], 1.0, 0.0),
            c(&[(S2N, 1.0)], 0.0, 1.0),
            c(&[(A, 1.0), (S1NK, 1.0), (S2NK, 1.0), (S1N, -1.0)], 0.0, 1.0),
        ],
        Side::Both => {
            return Err(Error::UnsupportedEvent(
                "the literal same-pair systems are per side; sum the two sides instead".into(),
            ))
        }
    };
    Ok(EventSystem { vars, constraints })
}

/// Check that an event spec applies to a geometry.
pub(crate) fn check_spec(spec: &EventSpec, g: &PairGeometry) -> Result<()> {
    let ord = classify_case(g)?;
    if ord != spec.case.ordering {
        return Err(Error::UnsupportedEvent(format!(
            "event spec is for case {} but the geometry is case {}",
            spec.case.ordering.number(),
            ord.number()
        )));
    }
    Ok(())
}

pub(crate) fn is_same_pair(ord: CaseOrdering) -> bool {
    ord == CaseOrdering::SamePairSameGap
}
