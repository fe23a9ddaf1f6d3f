//! Exact value functions for the two-receiver MDP.
//!
//! Every transition either stays put or increases `x0 + x1`, so sweeping the
//! anti-diagonals from `(F, F)` down to `(0, 0)` solves the undiscounted
//! Bellman equations directly: the self-loop is folded into the
//! `1 / (1 - p_stay)` factor and each state is computed exactly once.

mod audit;
mod oracle;

pub use audit::{audit_inequalities, AuditCheck, AuditReport};
pub use oracle::{enumerate_policies_oracle, enumerate_policies_oracle_with, OracleReport, DEFAULT_ENUMERATION_CAP};

use std::io::Write;

use crate::error::{Error, Result};
use crate::mdp::{classify, is_legal, kernel, reward, Action, DecisionClass, State};
use crate::model::SystemConfig;

/// Default numerical tolerance for ties and equality checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Expected remaining slots `V(x0, x1)` over the full `(F+1) × (F+1)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    file_size: usize,
    values: Vec<f64>,
}

impl ValueTable {
    fn zeros(file_size: usize) -> Self {
        Self {
            file_size,
            values: vec![0.0; (file_size + 1) * (file_size + 1)],
        }
    }

    #[inline]
    fn index(&self, s: State) -> usize {
        s.x0 * (self.file_size + 1) + s.x1
    }

    pub fn file_size(&self) -> usize {
        self.file_size
    }

    /// Undiscounted: future slots count as much as the current one.
    pub fn gamma(&self) -> f64 {
        1.0
    }

    #[inline]
    pub fn get(&self, s: State) -> f64 {
        self.values[self.index(s)]
    }

    #[inline]
    pub fn value(&self, x0: usize, x1: usize) -> f64 {
        self.get(State::new(x0, x1))
    }

    fn set(&mut self, s: State, v: f64) {
        let i = self.index(s);
        self.values[i] = v;
    }

    /// Expected completion time from the empty start state.
    pub fn initial(&self) -> f64 {
        self.value(0, 0)
    }

    /// Largest `|V(x0, x1) - V(x1, x0)|`.
    pub fn max_asymmetry(&self) -> f64 {
        let f = self.file_size;
        let mut worst = 0.0f64;
        for x0 in 0..=f {
            for x1 in x0 + 1..=f {
                worst = worst.max((self.value(x0, x1) - self.value(x1, x0)).abs());
            }
        }
        worst
    }
}

/// One action per state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyTable {
    file_size: usize,
    actions: Vec<Action>,
}

impl PolicyTable {
    /// `NoDecision` everywhere; only legal when no decision states exist.
    pub fn uniform(file_size: usize, action: Action) -> Self {
        Self {
            file_size,
            actions: vec![action; (file_size + 1) * (file_size + 1)],
        }
    }

    pub fn file_size(&self) -> usize {
        self.file_size
    }

    pub fn get(&self, s: State) -> Action {
        self.actions[s.x0 * (self.file_size + 1) + s.x1]
    }

    pub fn set(&mut self, s: State, action: Action) {
        self.actions[s.x0 * (self.file_size + 1) + s.x1] = action;
    }

    /// A table choosing `at_decisions` at every decision state.
    pub fn constant(config: &SystemConfig, at_decisions: Action) -> Self {
        let mut table = Self::uniform(config.file_size(), Action::NoDecision);
        for s in decision_states(config) {
            table.set(s, at_decisions);
        }
        table
    }
}

/// Least-Received as a two-receiver policy table.
pub fn lr_policy_table(config: &SystemConfig) -> PolicyTable {
    PolicyTable::constant(config, Action::ServeLeast)
}

/// Decision states in lexicographic `(x0, x1)` order.
pub fn decision_states(config: &SystemConfig) -> Vec<State> {
    let f = config.file_size();
    (0..=f)
        .flat_map(|x0| (0..=f).map(move |x1| State::new(x0, x1)))
        .filter(|&s| classify(s, config).is_decision())
        .collect()
}

/// States in strictly decreasing `x0 + x1`, starting after the terminal state.
pub(crate) fn backward_order(file_size: usize) -> impl Iterator<Item = State> {
    let f = file_size;
    (0..2 * f).rev().flat_map(move |d| {
        let lo = d.saturating_sub(f);
        let hi = d.min(f);
        (lo..=hi).map(move |x0| State::new(x0, d - x0))
    })
}

fn require_two_receivers(config: &SystemConfig) -> Result<()> {
    if config.receivers() != 2 {
        return Err(Error::RequiresTwoReceivers(config.receivers()));
    }
    Ok(())
}

/// `(R(s) + Σ p·V(s')) / (1 - p_stay)` over the non-self successors.
#[inline]
fn backup(s: State, class: DecisionClass, action: Action, config: &SystemConfig, table: &ValueTable) -> f64 {
    let dist = kernel(s, class, action, config.p(), config.q());
    let mut stay = 0.0;
    let mut acc = reward(s, config);
    for &(next, prob) in dist.entries() {
        if next == s {
            stay += prob;
        } else {
            acc += prob * table.get(next);
        }
    }
    acc / (1.0 - stay)
}

/// `(V(s | ServeLeast), V(s | ServeMost))` at a decision state, from the
/// successor values stored in `table`. `None` elsewhere.
pub fn action_values(s: State, config: &SystemConfig, table: &ValueTable) -> Option<(f64, f64)> {
    let class = classify(s, config);
    if !class.is_decision() {
        return None;
    }
    Some((
        backup(s, class, Action::ServeLeast, config, table),
        backup(s, class, Action::ServeMost, config, table),
    ))
}

/// Optimal values and policy; ties go to `ServeLeast`.
pub fn solve_optimal(config: &SystemConfig) -> Result<(ValueTable, PolicyTable)> {
    solve_optimal_with_tolerance(config, DEFAULT_TOLERANCE)
}

pub fn solve_optimal_with_tolerance(config: &SystemConfig, tolerance: f64) -> Result<(ValueTable, PolicyTable)> {
    require_two_receivers(config)?;
    let f = config.file_size();
    let mut values = ValueTable::zeros(f);
    let mut policy = PolicyTable::uniform(f, Action::NoDecision);
    for s in backward_order(f) {
        let class = classify(s, config);
        if class.is_decision() {
            let least = backup(s, class, Action::ServeLeast, config, &values);
            let most = backup(s, class, Action::ServeMost, config, &values);
            if most < least - tolerance {
                values.set(s, most);
                policy.set(s, Action::ServeMost);
            } else {
                values.set(s, least);
                policy.set(s, Action::ServeLeast);
            }
        } else {
            values.set(s, backup(s, class, Action::NoDecision, config, &values));
        }
    }
    Ok((values, policy))
}

/// Values of a fixed stationary policy.
pub fn evaluate_policy(config: &SystemConfig, policy: &PolicyTable) -> Result<ValueTable> {
    require_two_receivers(config)?;
    let f = config.file_size();
    if policy.file_size() != f {
        return Err(Error::PolicySizeMismatch {
            expected: f,
            got: policy.file_size(),
        });
    }
    let mut values = ValueTable::zeros(f);
    for s in backward_order(f) {
        let class = classify(s, config);
        let action = policy.get(s);
        if !is_legal(s, action, config) {
            return Err(Error::IllegalAction { state: s, action });
        }
        values.set(s, backup(s, class, action, config, &values));
    }
    Ok(values)
}

/// Largest Bellman residual `|V(s) - backup(s, π(s))|` over non-terminal states.
pub fn balance_residual(config: &SystemConfig, values: &ValueTable, policy: &PolicyTable) -> f64 {
    backward_order(config.file_size())
        .map(|s| {
            let class = classify(s, config);
            (values.get(s) - backup(s, class, policy.get(s), config, values)).abs()
        })
        .fold(0.0, f64::max)
}

/// Outcome of checking `V(s | ServeLeast) < V(s | ServeMost)` at every decision state.
#[derive(Debug, Clone, PartialEq)]
pub struct LrCheck {
    pub decision_states: usize,
    pub violations: Vec<State>,
    /// Smallest `V(ServeMost) - V(ServeLeast)`; `+inf` without decision states.
    pub worst_margin: f64,
}

impl LrCheck {
    pub fn optimal(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_lr_optimality(config: &SystemConfig, tolerance: f64) -> Result<LrCheck> {
    let (values, _) = solve_optimal_with_tolerance(config, tolerance)?;
    let mut check = LrCheck {
        decision_states: 0,
        violations: Vec::new(),
        worst_margin: f64::INFINITY,
    };
    for s in decision_states(config) {
        let (least, most) = action_values(s, config, &values).expect("decision state");
        check.decision_states += 1;
        check.worst_margin = check.worst_margin.min(most - least);
        // NaN counts as a violation
        if least.partial_cmp(&(most + tolerance)) != Some(std::cmp::Ordering::Less) {
            check.violations.push(s);
        }
    }
    Ok(check)
}

/// Writes `x0,x1,value,action` rows in lexicographic state order.
pub fn write_csv<W: Write>(values: &ValueTable, policy: &PolicyTable, out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["x0", "x1", "value", "action"])?;
    let f = values.file_size();
    for x0 in 0..=f {
        for x1 in 0..=f {
            let s = State::new(x0, x1);
            writer.write_record([
                x0.to_string(),
                x1.to_string(),
                values.get(s).to_string(),
                policy.get(s).code().to_string(),
            ])?;
        }
    }
    writer.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}
