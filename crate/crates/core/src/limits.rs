//! Desk-scale resource guard.

use crate::error::{Error, Result};

pub const DIM_CAP_ENV: &str = "PRODNORM_DIM_CAP";
pub const DEFAULT_DIM_CAP: usize = 256;
/// Upper bound on complex entries held by one explicit superoperator (512 MiB).
pub const MAX_STORED_ENTRIES: usize = 1 << 25;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Largest allowed input or output dimension of an explicit superoperator.
    pub dim_cap: usize,
    pub max_entries: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self { dim_cap: DEFAULT_DIM_CAP, max_entries: MAX_STORED_ENTRIES }
    }
}

impl Limits {
    /// Reads `PRODNORM_DIM_CAP`, falling back to the default on absence or garbage.
    pub fn from_env() -> Self {
        let dim_cap = std::env::var(DIM_CAP_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|&c| c > 0)
            .unwrap_or(DEFAULT_DIM_CAP);
        Self { dim_cap, ..Self::default() }
    }

    pub fn check_dim(&self, what: &str, dim: usize) -> Result<()> {
        if dim > self.dim_cap {
            return Err(Error::Resource(format!(
                "{what} dimension {dim} exceeds cap {} (set {DIM_CAP_ENV} to raise it)",
                self.dim_cap
            )));
        }
        Ok(())
    }

    /// Guard for state vectors of the game engine; they may reach `dim_cap^2`.
    pub fn check_state_dim(&self, what: &str, dim: usize) -> Result<()> {
        let cap = self.dim_cap.saturating_mul(self.dim_cap);
        if dim > cap {
            return Err(Error::Resource(format!(
                "{what} dimension {dim} exceeds {cap} = cap^2 (set {DIM_CAP_ENV} to raise it)"
            )));
        }
        Ok(())
    }

    pub fn check_entries(&self, what: &str, entries: u128) -> Result<()> {
        if entries > self.max_entries as u128 {
            return Err(Error::Resource(format!(
                "{what} would store {entries} complex entries, limit is {}",
                self.max_entries
            )));
        }
        Ok(())
    }
}
