//! Numerical audits of the structural inequalities satisfied by the optimal
//! value table.
//!
//! Index ranges are inclusive and follow the lower triangle `x0 <= x1`; the
//! upper triangle follows by symmetry. `b·K` is the first packet of the last
//! batch.

use super::{action_values, decision_states, solve_optimal_with_tolerance, ValueTable};
use crate::error::Result;
use crate::mdp::{classify, DecisionClass, State};
use crate::model::SystemConfig;

/// One audited family. `worst_margin` is the smallest slack seen (negative
/// means violated); it is `+inf` when nothing was examined.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditCheck {
    pub name: &'static str,
    pub examined: usize,
    pub violations: usize,
    pub worst_margin: f64,
}

impl AuditCheck {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            examined: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
        }
    }

    fn record(&mut self, margin: f64, ok: bool) {
        self.examined += 1;
        self.worst_margin = self.worst_margin.min(margin);
        if !ok {
            self.violations += 1;
        }
    }

    /// `smaller < larger`, strictly.
    fn strict(&mut self, smaller: f64, larger: f64) {
        let margin = larger - smaller;
        self.record(margin, margin > 0.0);
    }

    fn equal(&mut self, got: f64, expected: f64, tolerance: f64) {
        let margin = tolerance - (got - expected).abs();
        self.record(margin, margin >= 0.0);
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub checks: Vec<AuditCheck>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(AuditCheck::passed)
    }

    pub fn total_violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }

    pub fn check(&self, name: &str) -> Option<&AuditCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Inclusive integer range clipped to `[0, f]`; empty when `lo > hi`.
fn span(lo: i64, hi: i64, f: usize) -> impl Iterator<Item = usize> {
    let lo = lo.max(0);
    let hi = hi.min(f as i64);
    (lo..=hi).map(|x| x as usize)
}

/// Lower-triangle pairs over the given ranges, filtered by `keep(x0, x1)`.
fn pairs(
    (x0_lo, x0_hi): (i64, i64),
    (x1_lo, x1_hi): (i64, i64),
    f: usize,
    keep: impl Fn(usize, usize) -> bool,
) -> Vec<(usize, usize)> {
    span(x0_lo, x0_hi, f)
        .flat_map(|x0| span(x1_lo, x1_hi, f).map(move |x1| (x0, x1)))
        .filter(|&(x0, x1)| keep(x0, x1))
        .collect()
}

/// Runs every audit over the optimal table of `config`.
pub fn audit_inequalities(config: &SystemConfig, tolerance: f64) -> Result<AuditReport> {
    let (v, _) = solve_optimal_with_tolerance(config, tolerance)?;
    Ok(audit_table(config, &v, tolerance))
}

fn audit_table(config: &SystemConfig, v: &ValueTable, tolerance: f64) -> AuditReport {
    let f = config.file_size();
    let fi = f as i64;
    let bk = (config.last_batch() * config.window()) as i64;
    let k = config.window() as i64;
    let p = config.p();
    let q = config.q();
    let val = |x0: usize, x1: usize| v.value(x0, x1);
    let mut checks = Vec::new();

    let mut eq1 = AuditCheck::new("eq1_edge_closed_form");
    for x0 in 0..=f {
        eq1.equal(val(x0, f), (f - x0) as f64 / p, tolerance);
    }
    checks.push(eq1);

    let mut corner = AuditCheck::new("corner_closed_form");
    corner.equal(val(f - 1, f - 1), (1.0 + 2.0 * q) / (1.0 - q * q), tolerance);
    checks.push(corner);

    let mut eq2 = AuditCheck::new("eq2_sandwich");
    if f >= 2 {
        eq2.strict(val(f - 1, f), val(f - 1, f - 1));
        eq2.strict(val(f - 1, f - 1), val(f - 2, f));
    }
    checks.push(eq2);

    // row monotonicity: V(x0, x1) > V(x0 + 1, x1)
    let row = |name, x0_lo: i64| {
        let mut c = AuditCheck::new(name);
        for (x0, x1) in pairs((x0_lo, fi - 1), (bk + 1, fi), f, |a, b| a < b) {
            c.strict(val(x0 + 1, x1), val(x0, x1));
        }
        c
    };
    // column monotonicity: V(x0, x1) < V(x0, x1 - 1)
    let column = |name, x0_lo: i64| {
        let mut c = AuditCheck::new(name);
        for (x0, x1) in pairs((x0_lo, fi - 1), (bk + 1, fi), f, |a, b| a < b) {
            c.strict(val(x0, x1), val(x0, x1 - 1));
        }
        c
    };
    // anti-diagonal: V(x0, x1) < V(x0 - 1, x1 + 1)
    let anti = |name, pts: Vec<(usize, usize)>| {
        let mut c = AuditCheck::new(name);
        for (x0, x1) in pts {
            c.strict(val(x0, x1), val(x0 - 1, x1 + 1));
        }
        c
    };

    checks.push(row("3a_row_last_batch", bk));
    checks.push(column("3b_column_last_batch", bk));
    let mut pts_3c = pairs((bk + 1, fi - 1), (bk + 1, fi - 1), f, |a, b| a < b);
    if bk >= 1 && bk + 1 < fi {
        pts_3c.push((bk as usize, f - 1));
    }
    checks.push(anti("3c_antidiagonal_last_batch", pts_3c));
    checks.push(row("5a_row", 0));
    checks.push(column("5b_column", 0));
    checks.push(anti("5c_antidiagonal", pairs((1, fi - 1), (bk, fi - 1), f, |a, b| a < b)));

    let decision_margin = |x0: usize, x1: usize| {
        action_values(State::new(x0, x1), config, v).map(|(least, most)| most - least)
    };

    let mut c4a = AuditCheck::new("4a_decisions_below_full");
    for x0 in span(0, bk - 1, f) {
        if let Some(m) = decision_margin(x0, f - 1) {
            c4a.record(m, m > 0.0);
        }
    }
    checks.push(c4a);

    // restricted to decision states: the lower end of the stated range shares
    // a batch with bK - 1
    let mut c4b = AuditCheck::new("4b_decisions_last_column");
    if bk >= 1 {
        for x1 in span(bk - k, fi - 2, f) {
            if let Some(m) = decision_margin(bk as usize - 1, x1) {
                c4b.record(m, m > 0.0);
            }
        }
    }
    checks.push(c4b);

    checks.push(equivalence_check(config, v, tolerance));
    checks.push(lemma_check(config, v));

    let mut lr = AuditCheck::new("lr_optimality");
    for s in decision_states(config) {
        let (least, most) = action_values(s, config, v).expect("decision state");
        lr.strict(least, most);
    }
    checks.push(lr);

    AuditReport { checks }
}

fn sign(x: f64, tolerance: f64) -> i8 {
    if x > tolerance {
        1
    } else if x < -tolerance {
        -1
    } else {
        0
    }
}

/// The sign of `V(ServeMost) - V(ServeLeast)` matches the sign of
/// `V(lead advanced) - V(lag advanced)` at every decision state.
fn equivalence_check(config: &SystemConfig, v: &ValueTable, tolerance: f64) -> AuditCheck {
    let mut c = AuditCheck::new("eq_ii_equivalence");
    for s in decision_states(config) {
        let (least, most) = action_values(s, config, v).expect("decision state");
        let lag_first = classify(s, config) == DecisionClass::CaseB;
        let adv0 = v.value(s.x0 + 1, s.x1);
        let adv1 = v.value(s.x0, s.x1 + 1);
        let (lag_adv, lead_adv) = if lag_first { (adv0, adv1) } else { (adv1, adv0) };
        let lhs = most - least;
        let rhs = lead_adv - lag_adv;
        let agree = sign(lhs, tolerance) == sign(rhs, tolerance);
        let margin = if agree {
            lhs.abs().min(rhs.abs())
        } else {
            -lhs.abs().max(rhs.abs())
        };
        c.record(margin, agree);
    }
    c
}

/// Whenever both successors of a lower-triangle decision state prefer
/// `ServeLeast`, so does the state itself.
fn lemma_check(config: &SystemConfig, v: &ValueTable) -> AuditCheck {
    let mut c = AuditCheck::new("lemma1_implication");
    let prefers_least = |s: State| {
        action_values(s, config, v)
            .map(|(least, most)| least < most)
            .unwrap_or(false)
    };
    for s in decision_states(config) {
        if s.x0 >= s.x1 {
            continue;
        }
        let a = State::new(s.x0 + 1, s.x1);
        let b = State::new(s.x0, s.x1 + 1);
        if prefers_least(a) && prefers_least(b) {
            let (least, most) = action_values(s, config, v).expect("decision state");
            c.strict(least, most);
        }
    }
    c
}
