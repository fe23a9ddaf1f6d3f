//! Random linear encoding of one batch and incremental Gauss-Jordan decoding.

use rand::Rng;

use super::gf256::{gf_inv, mul_add_slice, scale_slice, Gf256};
use crate::error::{Error, Result};

/// One encoded packet. Coefficient bytes are GF(256) elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedPacket {
    pub batch: usize,
    pub coefficients: Vec<u8>,
    pub payload: Vec<u8>,
}

fn check_sources<S: AsRef<[u8]>>(sources: &[S]) -> Result<usize> {
    let first = sources.first().ok_or(Error::NonPositive { name: "K", value: 0 })?;
    let len = first.as_ref().len();
    for s in sources {
        if s.as_ref().len() != len {
            return Err(Error::PacketLengthMismatch {
                expected: len,
                got: s.as_ref().len(),
            });
        }
    }
    Ok(len)
}

/// Combines `sources` with the given coefficients.
pub fn encode_with<S: AsRef<[u8]>>(batch: usize, sources: &[S], coefficients: &[u8]) -> Result<CodedPacket> {
    let len = check_sources(sources)?;
    if coefficients.len() != sources.len() {
        return Err(Error::WrongPacketCount {
            expected: sources.len(),
            got: coefficients.len(),
        });
    }
    let mut payload = vec![0u8; len];
    for (src, &c) in sources.iter().zip(coefficients) {
        mul_add_slice(&mut payload, src.as_ref(), Gf256(c));
    }
    Ok(CodedPacket {
        batch,
        coefficients: coefficients.to_vec(),
        payload,
    })
}

/// Draws uniform coefficients (redrawing the all-zero vector) and encodes.
pub fn encode<S: AsRef<[u8]>, R: Rng + ?Sized>(batch: usize, sources: &[S], rng: &mut R) -> Result<CodedPacket> {
    check_sources(sources)?;
    let coefficients = random_coefficients(sources.len(), rng);
    encode_with(batch, sources, &coefficients)
}

pub fn random_coefficients<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<u8> {
    let mut coefficients = vec![0u8; k];
    loop {
        rng.fill(coefficients.as_mut_slice());
        if coefficients.iter().any(|&c| c != 0) {
            return coefficients;
        }
    }
}

#[derive(Debug, Clone)]
struct Row {
    coefficients: Vec<u8>,
    payload: Vec<u8>,
}

/// Decoder for a single batch, kept in reduced row-echelon form.
#[derive(Debug, Clone)]
pub struct DecoderState {
    batch: usize,
    window: usize,
    payload_len: usize,
    rows: Vec<Row>,
    /// Row index holding the pivot of each column.
    pivot_of: Vec<Option<usize>>,
}

impl DecoderState {
    pub fn new(batch: usize, window: usize, payload_len: usize) -> Self {
        Self {
            batch,
            window,
            payload_len,
            rows: Vec::with_capacity(window),
            pivot_of: vec![None; window],
        }
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_decodable(&self) -> bool {
        self.rank() == self.window
    }

    /// Reduces `pkt` against the stored rows; returns whether the rank grew.
    pub fn ingest(&mut self, pkt: &CodedPacket) -> Result<bool> {
        if pkt.batch != self.batch {
            return Err(Error::BatchMismatch {
                expected: self.batch,
                got: pkt.batch,
            });
        }
        if pkt.coefficients.len() != self.window {
            return Err(Error::WrongPacketCount {
                expected: self.window,
                got: pkt.coefficients.len(),
            });
        }
        if pkt.payload.len() != self.payload_len {
            return Err(Error::PacketLengthMismatch {
                expected: self.payload_len,
                got: pkt.payload.len(),
            });
        }
        if self.is_decodable() {
            return Ok(false);
        }

        let mut coefficients = pkt.coefficients.clone();
        let mut payload = pkt.payload.clone();
        for col in 0..self.window {
            let factor = Gf256(coefficients[col]);
            if factor.is_zero() {
                continue;
            }
            if let Some(r) = self.pivot_of[col] {
                let row = &self.rows[r];
                mul_add_slice(&mut coefficients, &row.coefficients, factor);
                mul_add_slice(&mut payload, &row.payload, factor);
            }
        }
        let Some(pivot) = coefficients.iter().position(|&c| c != 0) else {
            return Ok(false);
        };
        let inv = gf_inv(Gf256(coefficients[pivot]))?;
        scale_slice(&mut coefficients, inv);
        scale_slice(&mut payload, inv);

        for row in &mut self.rows {
            let factor = Gf256(row.coefficients[pivot]);
            if !factor.is_zero() {
                mul_add_slice(&mut row.coefficients, &coefficients, factor);
                mul_add_slice(&mut row.payload, &payload, factor);
            }
        }
        self.pivot_of[pivot] = Some(self.rows.len());
        self.rows.push(Row {
            coefficients,
            payload,
        });
        Ok(true)
    }

    /// The source packets, once the rank reaches the window.
    pub fn recover(&self) -> Result<Vec<Vec<u8>>> {
        if !self.is_decodable() {
            return Err(Error::NotDecodable {
                rank: self.rank(),
                window: self.window,
            });
        }
        Ok(self
            .pivot_of
            .iter()
            .map(|r| self.rows[r.expect("full rank")].payload.clone())
            .collect())
    }

    #[cfg(test)]
    fn is_reduced(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, row)| {
            let pivot = row.coefficients.iter().position(|&c| c != 0).unwrap();
            row.coefficients[pivot] == 1
                && self.pivot_of[pivot] == Some(i)
                && self
                    .rows
                    .iter()
                    .enumerate()
                    .all(|(j, other)| j == i || other.coefficients[pivot] == 0)
        })
    }
}
