//! Monte Carlo check of the linear-independence assumption: how many coded
//! packets beyond `K` a receiver needs, and whether every batch decodes.

use rand::Rng;

use super::codec::{encode, DecoderState};
use crate::par::{map_indices, Execution};
use crate::rng::{RngSpec, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct CodecReport {
    pub window: usize,
    pub payload_len: usize,
    pub batches: u64,
    pub successes: u64,
    /// Mean of `packets received - K` until full rank; 0 for an empty run.
    pub mean_extra_packets: f64,
}

impl CodecReport {
    /// Fraction of batches recovered byte-exactly; 1 for an empty run.
    pub fn success_rate(&self) -> f64 {
        if self.batches == 0 {
            1.0
        } else {
            self.successes as f64 / self.batches as f64
        }
    }
}

/// Expected extra packets with uniform nonzero coefficient vectors.
///
/// At rank `r` a fresh packet lies in the current span with probability
/// `(256^r - 1) / (256^K - 1)`; the wasted draws at each rank are geometric.
pub fn expected_extra_packets(window: usize) -> f64 {
    let total = 256f64.powi(window as i32) - 1.0;
    (0..window)
        .map(|r| {
            let dependent = (256f64.powi(r as i32) - 1.0) / total;
            dependent / (1.0 - dependent)
        })
        .sum()
}

fn one_batch(window: usize, payload_len: usize, spec: RngSpec, index: u64) -> (bool, usize) {
    let mut rng = spec.stream(index, Stream::Coding);
    let sources: Vec<Vec<u8>> = (0..window)
        .map(|_| {
            let mut v = vec![0u8; payload_len];
            rng.fill(v.as_mut_slice());
            v
        })
        .collect();
    let mut decoder = DecoderState::new(0, window, payload_len);
    let mut sent = 0usize;
    while !decoder.is_decodable() {
        let pkt = encode(0, &sources, &mut rng).expect("uniform sources");
        decoder.ingest(&pkt).expect("matching batch");
        sent += 1;
    }
    let ok = decoder.recover().map(|d| d == sources).unwrap_or(false);
    (ok, sent - window)
}

pub fn validate_codec(window: usize, payload_len: usize, batches: u64, seed: u64) -> CodecReport {
    validate_codec_with(window, payload_len, batches, seed, Execution::default())
}

pub fn validate_codec_with(
    window: usize,
    payload_len: usize,
    batches: u64,
    seed: u64,
    execution: Execution,
) -> CodecReport {
    let spec = RngSpec::new(seed);
    let outcomes = map_indices(batches, execution, |i| one_batch(window, payload_len, spec, i));
    let successes = outcomes.iter().filter(|o| o.0).count() as u64;
    let extra: usize = outcomes.iter().map(|o| o.1).sum();
    CodecReport {
        window,
        payload_len,
        batches,
        successes,
        mean_extra_packets: if batches == 0 {
            0.0
        } else {
            extra as f64 / batches as f64
        },
    }
}
