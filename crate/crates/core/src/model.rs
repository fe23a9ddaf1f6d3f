//! System parameters and batch arithmetic.
//!
//! A file of `F` packets is split into `F / K` consecutive batches of `K`
//! packets each. A receiver that holds `x` packets expects batch `⌊x/K⌋`;
//! `x = F` yields the sentinel `F / K`, meaning the file is complete.

use crate::error::{Error, Result};

/// Validated experiment parameters.
///
/// Immutable once built; `q = 1 - p` and `last_batch = F/K - 1` are derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    file_size: usize,
    window: usize,
    receivers: usize,
    p: f64,
    q: f64,
    last_batch: usize,
}

impl SystemConfig {
    /// Checks the raw parameters and derives `q` and the last batch index.
    pub fn new(file_size: usize, window: usize, receivers: usize, p: f64) -> Result<Self> {
        for (name, value) in [("F", file_size), ("K", window), ("N", receivers)] {
            if value == 0 {
                return Err(Error::NonPositive { name, value });
            }
        }
        if !file_size.is_multiple_of(window) {
            return Err(Error::WindowDoesNotDivide { file_size, window });
        }
        // also rejects NaN
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidProbability(p));
        }
        Ok(Self {
            file_size,
            window,
            receivers,
            p,
            q: 1.0 - p,
            last_batch: file_size / window - 1,
        })
    }

    /// Same parameters with a different coding window.
    pub fn with_window(&self, window: usize) -> Result<Self> {
        Self::new(self.file_size, window, self.receivers, self.p)
    }

    pub fn file_size(&self) -> usize {
        self.file_size
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn receivers(&self) -> usize {
        self.receivers
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Index of the last batch (`b` = number of batches minus one).
    pub fn last_batch(&self) -> usize {
        self.last_batch
    }

    pub fn num_batches(&self) -> usize {
        self.last_batch + 1
    }

    /// Batch expected by a receiver holding `x` packets.
    pub fn batch_id(&self, x: usize) -> Result<usize> {
        if x > self.file_size {
            return Err(Error::PacketOutOfRange {
                x,
                file_size: self.file_size,
            });
        }
        Ok(self.batch_of(x))
    }

    /// Unchecked `⌊x/K⌋` for internal hot loops.
    #[inline]
    pub(crate) fn batch_of(&self, x: usize) -> usize {
        x / self.window
    }

    /// First and last packet index (inclusive) of batch `i`.
    pub fn batch_packet_range(&self, i: usize) -> Result<(usize, usize)> {
        if i > self.last_batch {
            return Err(Error::BatchOutOfRange {
                batch: i,
                last: self.last_batch,
            });
        }
        Ok((i * self.window, (i + 1) * self.window - 1))
    }
}
