//! Shared machinery for the alternating maximizations: options, restart
//! seeding and the order-independent best-of reduction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::derive_seed;

/// Values closer than this count as a tie; the lower restart index wins.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SeesawOptions {
    pub restarts: usize,
    pub max_iters: usize,
    /// Relative objective change over one full sweep below which a run stops.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        Self { restarts: 16, max_iters: 500, tol: 1e-9, seed: 0 }
    }
}

impl SeesawOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(Error::Input("restarts and max_iters must be at least 1".into()));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::Input(format!("tol must be a positive finite number, got {}", self.tol)));
        }
        Ok(())
    }

    /// Seed for restart `k`; restart 0 is the deterministic identity start and never draws.
    pub fn restart_seed(&self, k: usize) -> u64 {
        derive_seed(self.seed, k as u64)
    }
}

pub(crate) fn has_converged(prev: f64, new: f64, tol: f64) -> bool {
    (new - prev).abs() <= tol * new.abs().max(prev.abs())
}

/// Runs `count` independent restarts (possibly in parallel) and keeps the best.
///
/// The reduction walks results in restart order, so the winner does not depend
/// on completion order.
pub(crate) fn best_of<T, F, V>(count: usize, run: F, value: V) -> Result<T>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
    V: Fn(&T) -> f64,
{
    let results: Vec<Result<T>> = (0..count).into_par_iter().map(&run).collect();
    let mut best: Option<(f64, T)> = None;
    for r in results {
        let t = r?;
        let v = value(&t);
        match &best {
            Some((bv, _)) if v <= bv + TIE_TOLERANCE => {}
            _ => best = Some((v, t)),
        }
    }
    best.map(|(_, t)| t).ok_or_else(|| Error::Input("no restarts were run".into()))
}
