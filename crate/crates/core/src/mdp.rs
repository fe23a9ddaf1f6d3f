//! The two-receiver scheduling MDP.
//!
//! A state is the pair of received-packet counts `(x0, x1)`. The base station
//! only has a choice when the receivers expect different batches and neither
//! has finished; elsewhere the single action is [`Action::NoDecision`].

use crate::error::{Error, Result};
use crate::model::SystemConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    pub x0: usize,
    pub x1: usize,
}

impl State {
    pub const fn new(x0: usize, x1: usize) -> Self {
        Self { x0, x1 }
    }

    /// The same state with the receivers swapped.
    pub const fn mirrored(self) -> Self {
        Self {
            x0: self.x1,
            x1: self.x0,
        }
    }

    fn check(self, config: &SystemConfig) -> Result<()> {
        let f = config.file_size();
        if self.x0 > f || self.x1 > f {
            return Err(Error::StateOutOfRange {
                state: self,
                file_size: f,
            });
        }
        Ok(())
    }
}

/// Scheduling decision. The numeric codes (1, 0, -1) are used in CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    /// Serve the receiver with fewer packets (`u = 1`).
    ServeLeast,
    /// No choice to make (`u = 0`).
    NoDecision,
    /// Serve the receiver with more packets (`u = -1`).
    ServeMost,
}

impl Action {
    pub fn code(self) -> i8 {
        match self {
            Action::ServeLeast => 1,
            Action::NoDecision => 0,
            Action::ServeMost => -1,
        }
    }

    pub fn from_code(code: i8) -> Option<Self> {
        match code {
            1 => Some(Action::ServeLeast),
            0 => Some(Action::NoDecision),
            -1 => Some(Action::ServeMost),
            _ => None,
        }
    }
}

/// Transition-kernel panel a state belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecisionClass {
    /// Same batch, both incomplete.
    CaseA,
    /// Receiver 0 is in an earlier batch, both incomplete.
    CaseB,
    /// Receiver 1 is in an earlier batch, both incomplete.
    CaseC,
    /// Receiver 1 is done.
    CaseD,
    /// Receiver 0 is done.
    CaseE,
    Terminal,
}

impl DecisionClass {
    pub fn is_decision(self) -> bool {
        matches!(self, DecisionClass::CaseB | DecisionClass::CaseC)
    }
}

pub fn classify(s: State, config: &SystemConfig) -> DecisionClass {
    let f = config.file_size();
    match (s.x0 == f, s.x1 == f) {
        (true, true) => DecisionClass::Terminal,
        (false, true) => DecisionClass::CaseD,
        (true, false) => DecisionClass::CaseE,
        (false, false) => {
            let (h0, h1) = (config.batch_of(s.x0), config.batch_of(s.x1));
            match h0.cmp(&h1) {
                std::cmp::Ordering::Equal => DecisionClass::CaseA,
                std::cmp::Ordering::Less => DecisionClass::CaseB,
                std::cmp::Ordering::Greater => DecisionClass::CaseC,
            }
        }
    }
}

pub fn legal_actions(s: State, config: &SystemConfig) -> &'static [Action] {
    if classify(s, config).is_decision() {
        &[Action::ServeLeast, Action::ServeMost]
    } else {
        &[Action::NoDecision]
    }
}

pub fn is_legal(s: State, action: Action, config: &SystemConfig) -> bool {
    legal_actions(s, config).contains(&action)
}

/// One slot of delay for every state except the absorbing `(F, F)`.
pub fn reward(s: State, config: &SystemConfig) -> f64 {
    let f = config.file_size();
    if s.x0 == f && s.x1 == f {
        0.0
    } else {
        1.0
    }
}

/// Sparse next-state distribution with at most four entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionDistribution {
    entries: [(State, f64); 4],
    len: usize,
}

impl TransitionDistribution {
    fn from_entries(candidates: &[(State, f64)]) -> Self {
        let mut out = Self {
            entries: [(State::new(0, 0), 0.0); 4],
            len: 0,
        };
        for &(s, prob) in candidates {
            if prob > 0.0 {
                out.entries[out.len] = (s, prob);
                out.len += 1;
            }
        }
        out
    }

    pub fn entries(&self) -> &[(State, f64)] {
        &self.entries[..self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn total(&self) -> f64 {
        self.entries().iter().map(|&(_, prob)| prob).sum()
    }

    /// Probability of staying in `from`.
    pub fn self_loop(&self, from: State) -> f64 {
        self.entries()
            .iter()
            .filter(|&&(s, _)| s == from)
            .map(|&(_, prob)| prob)
            .sum()
    }
}

/// Next-state distribution for taking `action` in `s`.
///
/// With both receivers still downloading, connectivity is observed before the
/// transmission: if only one receiver is ON, its batch is sent regardless of
/// the action, and the action matters only when both are ON.
pub fn transitions(s: State, action: Action, config: &SystemConfig) -> Result<TransitionDistribution> {
    s.check(config)?;
    let class = classify(s, config);
    if class == DecisionClass::Terminal {
        return Err(Error::TerminalState);
    }
    if !is_legal(s, action, config) {
        return Err(Error::IllegalAction { state: s, action });
    }
    Ok(kernel(s, class, action, config.p(), config.q()))
}

/// Kernel without legality checks; callers guarantee `action` is legal.
pub(crate) fn kernel(s: State, class: DecisionClass, action: Action, p: f64, q: f64) -> TransitionDistribution {
    let State { x0, x1 } = s;
    let adv0 = State::new(x0 + 1, x1);
    let adv1 = State::new(x0, x1 + 1);
    match class {
        DecisionClass::CaseA => TransitionDistribution::from_entries(&[
            (State::new(x0 + 1, x1 + 1), p * p),
            (adv0, p * q),
            (adv1, q * p),
            (s, q * q),
        ]),
        DecisionClass::CaseB | DecisionClass::CaseC => {
            // the lagging receiver is 0 in CaseB and 1 in CaseC
            let (lag, lead) = if class == DecisionClass::CaseB {
                (adv0, adv1)
            } else {
                (adv1, adv0)
            };
            let (served, other) = match action {
                Action::ServeMost => (lead, lag),
                _ => (lag, lead),
            };
            TransitionDistribution::from_entries(&[(served, p), (other, q * p), (s, q * q)])
        }
        DecisionClass::CaseD => TransitionDistribution::from_entries(&[(adv0, p), (s, q)]),
        DecisionClass::CaseE => TransitionDistribution::from_entries(&[(adv1, p), (s, q)]),
        DecisionClass::Terminal => TransitionDistribution::from_entries(&[]),
    }
}
