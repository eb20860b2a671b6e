//! Exact finite-N Hankel determinants with Fisher–Hartwig symbols.

mod direct;
mod identities;
mod measure;
mod recurrence;
mod symbol;

use serde::{Deserialize, Serialize};

pub use direct::{hankel_logdet_direct, logdet_direct_on};
pub use identities::{
    christoffel_darboux_residual, di1_residual, di2_residual, expectation_ratio,
    expectation_ratio_with, DiResidual, ExpectationOptions,
};
pub use measure::{build_nodes, moments, DiscreteMeasure, NodeSet, PANEL_ORDER};
pub use recurrence::{cd_residual_from, orthopoly_recurrence, orthopoly_on, OrthoSystem};
pub use symbol::{symbol_eval, FHSymbol, Singularity};

pub const DEFAULT_PRECISION: u32 = 256;
pub const MAX_PRECISION: u32 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    Recurrence,
}

/// log D_k together with leading coefficients and recurrence data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HankelResult {
    pub method: Method,
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
    pub log_det: f64,
    pub log_chi: Vec<f64>,
    pub chi: Vec<f64>,
    /// (a_j, b_j) with x p_j = b_{j+1} p_{j+1} + a_j p_j + b_j p_{j-1}; empty for the direct method.
    pub recurrence: Vec<(f64, f64)>,
    pub precision_bits: u32,
    pub symbol: FHSymbol,
}

impl HankelResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("HankelResult serialises")
    }
}
