//! Brute-force certification: evaluate every deterministic stationary policy
//! and confirm that none beats Least-Received from the start state.

use super::{decision_states, evaluate_policy, lr_policy_table, PolicyTable};
use crate::error::{Error, Result};
use crate::mdp::{Action, State};
use crate::model::SystemConfig;
use crate::par::{map_indices, Execution};

/// Largest number of policies enumerated by default.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 20;

const AGREEMENT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    /// Decision states in lexicographic order; bit `j` of a policy mask set
    /// means `ServeMost` at `decision_states[j]`.
    pub decision_states: Vec<State>,
    pub policies: u64,
    pub best_value: f64,
    pub best_mask: u64,
    pub lr_value: f64,
    /// `(mask, V(0,0))` for every policy, ascending by value then mask.
    pub ranked: Vec<(u64, f64)>,
}

impl OracleReport {
    /// LR's start value matches the enumerated minimum within 1e-9.
    pub fn lr_optimal(&self) -> bool {
        self.lr_value <= self.best_value + AGREEMENT_TOLERANCE
    }

    pub fn best_policy(&self, config: &SystemConfig) -> PolicyTable {
        policy_from_mask(config, &self.decision_states, self.best_mask)
    }
}

fn policy_from_mask(config: &SystemConfig, states: &[State], mask: u64) -> PolicyTable {
    let mut table = lr_policy_table(config);
    for (j, &s) in states.iter().enumerate() {
        if mask >> j & 1 == 1 {
            table.set(s, Action::ServeMost);
        }
    }
    table
}

pub fn enumerate_policies_oracle(config: &SystemConfig, cap: u64) -> Result<OracleReport> {
    enumerate_policies_oracle_with(config, cap, Execution::default())
}

pub fn enumerate_policies_oracle_with(config: &SystemConfig, cap: u64, execution: Execution) -> Result<OracleReport> {
    if config.receivers() != 2 {
        return Err(Error::RequiresTwoReceivers(config.receivers()));
    }
    let states = decision_states(config);
    let d = states.len();
    if d >= 64 || (1u64 << d) > cap {
        return Err(Error::EnumerationTooLarge {
            decision_states: d,
            cap,
        });
    }
    let policies = 1u64 << d;
    let values = map_indices(policies, execution, |mask| {
        evaluate_policy(config, &policy_from_mask(config, &states, mask)).map(|v| v.initial())
    });
    let mut ranked = values
        .into_iter()
        .enumerate()
        .map(|(mask, v)| v.map(|v| (mask as u64, v)))
        .collect::<Result<Vec<_>>>()?;
    let lr_value = ranked[0].1;
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let (best_mask, best_value) = ranked[0];
    Ok(OracleReport {
        decision_states: states,
        policies,
        best_value,
        best_mask,
        lr_value,
        ranked,
    })
}
