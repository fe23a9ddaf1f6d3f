//! Batch-selection policies for N receivers.
//!
//! Policies only matter at conflict slots, where eligible receivers disagree
//! on the batch they expect. Everywhere else all three return the common batch.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;

/// A receiver that is ON this slot and still missing packets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Eligible {
    pub receiver: usize,
    pub batch: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SchedulerInput<'a> {
    pub eligible: &'a [Eligible],
    pub slot: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    LeastReceived,
    RoundRobin,
    RandomSelection,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [
        PolicyKind::LeastReceived,
        PolicyKind::RoundRobin,
        PolicyKind::RandomSelection,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::LeastReceived => "lr",
            PolicyKind::RoundRobin => "rrnc",
            PolicyKind::RandomSelection => "rs",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lr" => Ok(PolicyKind::LeastReceived),
            "rrnc" | "rr" => Ok(PolicyKind::RoundRobin),
            "rs" => Ok(PolicyKind::RandomSelection),
            _ => Err(Error::Unknown {
                kind: "policy",
                value: s.to_string(),
            }),
        }
    }
}

/// At least two distinct batch ids among the eligible receivers.
pub fn is_conflict_slot(input: &SchedulerInput<'_>) -> bool {
    match input.eligible.split_first() {
        Some((first, rest)) => rest.iter().any(|e| e.batch != first.batch),
        None => false,
    }
}

/// Least-Received: the smallest batch id among eligible receivers.
pub fn lr_select(input: &SchedulerInput<'_>) -> Option<usize> {
    input.eligible.iter().map(|e| e.batch).min()
}

/// Per-trial scheduler state.
#[derive(Debug, Clone)]
pub struct Scheduler {
    kind: PolicyKind,
    rr_last: Option<usize>,
    rng: ChaCha8Rng,
}

impl Scheduler {
    /// `rng` is only read by Random Selection, once per conflict slot.
    pub fn new(kind: PolicyKind, rng: ChaCha8Rng) -> Self {
        Self {
            kind,
            rr_last: None,
            rng,
        }
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    /// Receiver served at the most recent round-robin conflict slot.
    pub fn rr_last(&self) -> Option<usize> {
        self.rr_last
    }

    pub fn select(&mut self, input: &SchedulerInput<'_>) -> Option<usize> {
        match self.kind {
            PolicyKind::LeastReceived => lr_select(input),
            PolicyKind::RoundRobin => self.rrnc_select(input),
            PolicyKind::RandomSelection => self.rs_select(input),
        }
    }

    /// Round robin over receiver ids at conflict slots, wrapping to the
    /// smallest eligible id when nobody exceeds the last choice.
    pub fn rrnc_select(&mut self, input: &SchedulerInput<'_>) -> Option<usize> {
        let first = input.eligible.first()?;
        if !is_conflict_slot(input) {
            return Some(first.batch);
        }
        let after_last = |e: &&Eligible| self.rr_last.is_none_or(|last| e.receiver > last);
        let chosen = input
            .eligible
            .iter()
            .filter(after_last)
            .min_by_key(|e| e.receiver)
            .or_else(|| input.eligible.iter().min_by_key(|e| e.receiver))?;
        self.rr_last = Some(chosen.receiver);
        Some(chosen.batch)
    }

    /// Random Selection: batch `i` with probability `N_i / N_c`.
    ///
    /// One uniform integer `u` in `[0, N_c)` is drawn per conflict slot and
    /// mapped through the cumulative counts of batch ids in increasing order.
    pub fn rs_select(&mut self, input: &SchedulerInput<'_>) -> Option<usize> {
        let first = input.eligible.first()?;
        if !is_conflict_slot(input) {
            return Some(first.batch);
        }
        let mut batches: Vec<usize> = input.eligible.iter().map(|e| e.batch).collect();
        batches.sort_unstable();
        let u = self.rng.random_range(0..batches.len());
        // sorted ids: the u-th smallest is exactly the inverse-CDF pick
        Some(batches[u])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{RngSpec, Stream};
    use proptest::prelude::*;

    fn elig(pairs: &[(usize, usize)]) -> Vec<Eligible> {
        pairs
            .iter()
            .map(|&(receiver, batch)| Eligible { receiver, batch })
            .collect()
    }

    fn input(e: &[Eligible]) -> SchedulerInput<'_> {
        SchedulerInput { eligible: e, slot: 0 }
    }

    fn scheduler(kind: PolicyKind, seed: u64) -> Scheduler {
        Scheduler::new(kind, RngSpec::new(seed).stream(0, Stream::Scheduler))
    }

    #[test]
    fn conflict_detection() {
        assert!(!is_conflict_slot(&input(&elig(&[(0, 0), (1, 0), (2, 0)]))));
        assert!(is_conflict_slot(&input(&elig(&[(0, 0), (1, 1)]))));
        assert!(!is_conflict_slot(&input(&[])));
    }

    #[test]
    fn least_received() {
        assert_eq!(lr_select(&input(&elig(&[(0, 2), (1, 0), (2, 1)]))), Some(0));
        assert_eq!(lr_select(&input(&elig(&[(4, 3)]))), Some(3));
        assert_eq!(lr_select(&input(&[])), None);
    }

    #[test]
    fn round_robin() {
        let mut s = scheduler(PolicyKind::RoundRobin, 0);
        // first conflict slot: smallest eligible id
        assert_eq!(s.select(&input(&elig(&[(1, 5), (3, 2)]))), Some(5));
        assert_eq!(s.rr_last(), Some(1));

        let e = elig(&[(0, 7), (2, 8), (3, 9)]);
        assert_eq!(s.select(&input(&e)), Some(8));
        assert_eq!(s.rr_last(), Some(2));

        s.rr_last = Some(3);
        assert_eq!(s.select(&input(&elig(&[(0, 4), (1, 6)]))), Some(4));
        assert_eq!(s.rr_last(), Some(0));

        assert_eq!(s.select(&input(&elig(&[(0, 2), (1, 2), (4, 2)]))), Some(2));
        assert_eq!(s.rr_last(), Some(0));
        assert_eq!(s.select(&input(&[])), None);
    }

    #[test]
    fn random_selection_frequencies() {
        let mut s = scheduler(PolicyKind::RandomSelection, 7);
        let e = elig(&[(0, 0), (1, 0), (2, 1)]);
        let n = 200_000;
        let zeros = (0..n).filter(|_| s.select(&input(&e)) == Some(0)).count();
        let freq = zeros as f64 / n as f64;
        assert!((freq - 2.0 / 3.0).abs() < 0.01, "{freq}");

        let same = elig(&[(0, 2), (1, 2), (2, 2)]);
        assert!((0..100).all(|_| s.select(&input(&same)) == Some(2)));
    }

    #[test]
    fn random_selection_leaves_rng_alone_when_idle() {
        let mut a = scheduler(PolicyKind::RandomSelection, 9);
        let mut b = scheduler(PolicyKind::RandomSelection, 9);
        assert_eq!(a.select(&input(&[])), None);
        assert_eq!(a.select(&input(&elig(&[(0, 1), (1, 1)]))), Some(1));
        let e = elig(&[(0, 0), (1, 1), (2, 2), (3, 3)]);
        let xs: Vec<_> = (0..50).map(|_| a.select(&input(&e))).collect();
        let ys: Vec<_> = (0..50).map(|_| b.select(&input(&e))).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn names_round_trip() {
        for kind in PolicyKind::ALL {
            assert_eq!(kind.name().parse::<PolicyKind>().unwrap(), kind);
        }
        assert!("fifo".parse::<PolicyKind>().is_err());
    }

    fn arb_eligible() -> impl Strategy<Value = Vec<Eligible>> {
        prop::collection::btree_map(0usize..20, 0usize..5, 0..8).prop_map(|m| {
            m.into_iter()
                .map(|(receiver, batch)| Eligible { receiver, batch })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn policies_agree_off_conflict(e in arb_eligible(), seed in any::<u64>()) {
            let inp = input(&e);
            if !is_conflict_slot(&inp) {
                let lr = lr_select(&inp);
                for kind in PolicyKind::ALL {
                    prop_assert_eq!(scheduler(kind, seed).select(&inp), lr);
                }
            }
        }

        #[test]
        fn lr_permutation_invariant(mut e in arb_eligible(), rot in 0usize..8) {
            let before = lr_select(&input(&e));
            if !e.is_empty() {
                let r = rot % e.len();
                e.rotate_left(r);
                e.reverse();
            }
            prop_assert_eq!(lr_select(&input(&e)), before);
        }

        #[test]
        fn selections_name_an_eligible_batch(e in arb_eligible(), seed in any::<u64>()) {
            for kind in PolicyKind::ALL {
                let mut s = scheduler(kind, seed);
                match s.select(&input(&e)) {
                    None => prop_assert!(e.is_empty()),
                    Some(b) => prop_assert!(e.iter().any(|x| x.batch == b)),
                }
            }
        }

        #[test]
        fn rs_reproducible(e in arb_eligible(), seed in any::<u64>()) {
            let mut a = scheduler(PolicyKind::RandomSelection, seed);
            let mut b = scheduler(PolicyKind::RandomSelection, seed);
            for _ in 0..10 {
                prop_assert_eq!(a.select(&input(&e)), b.select(&input(&e)));
            }
        }
    }
}
