//! Numerical tolerances shared by every analysis routine.

use serde::{Deserialize, Serialize};

/// Default identity tolerance; reports call a quantity "zero" below this.
pub const TOL_IDENTITY: f64 = 1e-9;
/// Singular values below `RANK_TOL * sigma_max` count as zero.
pub const RANK_TOL: f64 = 1e-10;
/// Spectral radii within this margin of 1 are treated as non-contractive.
pub const RADIUS_MARGIN: f64 = 1e-8;
/// Eigenvalues closer than `NODE_MERGE * (max - min)` are merged into one node.
pub const NODE_MERGE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub identity: f64,
    pub rank: f64,
    pub radius_margin: f64,
    pub node_merge: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: TOL_IDENTITY,
            rank: RANK_TOL,
            radius_margin: RADIUS_MARGIN,
            node_merge: NODE_MERGE,
        }
    }
}

impl Tolerances {
    pub fn with_identity(mut self, identity: f64) -> Self {
        self.identity = identity;
        self
    }

    pub fn with_rank(mut self, rank: f64) -> Self {
        self.rank = rank;
        self
    }
}
