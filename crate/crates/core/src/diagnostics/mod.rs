//! Locality diagnostics: `H_alpha(s, r)` scans, tail extraction, ALP
//! verdicts, Lieb-Robinson commutator checks, lattice sum bounds and the
//! tail formulas for compositions and inverses.
//!
//! Every number carries a tag saying whether it is exact, a certified lower
//! bound, or a certified upper bound. Assertions on certified sides use the
//! absolute tolerance [`CERT_TOL`].

pub mod bounds;
pub mod lr;
pub mod scan;
pub mod verdict;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::sequences::{seq_norm, Seq, SeqNorm};

pub use bounds::{
    composition_tail, eps_inclusion, f_region_const, inverse_tail, sum_bound_check, EpsBracket, InverseTail,
    SumBoundReport, SumBoundRow,
};
pub use lr::{commutator_norm, fit_scale, lr_check, CommutatorKernel, LrPair, LrReport, LrRow};
pub use scan::{cartesian, diag_tail, h_scan, tail_from_scan, with_range_tail, HCell, Method, ScanOptions, ScanPoint, ScanReport};
pub use verdict::{alp_verdict, AlpVerdict, Basis, KVerdict, PointwiseCheck, Trend, Violation};

/// Absolute tolerance on certified inequalities.
pub const CERT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Exact,
    Lower,
    Upper,
    Bracket,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Measured,
    Formula,
}

/// A tail function with its `|||.|||_{k+d-1}` brackets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFunction {
    /// Values used downstream: exact or certified upper where known.
    pub samples: Seq,
    /// Certified lower bounds, when they differ from `samples`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<Vec<f64>>,
    pub provenance: Provenance,
    pub decay_class: BTreeMap<u32, SeqNorm>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl TailFunction {
    pub fn formula(samples: Seq) -> Self {
        TailFunction {
            samples,
            lower: None,
            provenance: Provenance::Formula,
            decay_class: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn measured(samples: Seq, lower: Option<Vec<f64>>) -> Self {
        TailFunction {
            samples,
            lower,
            provenance: Provenance::Measured,
            decay_class: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    /// Fills `decay_class[k] = |||f|||_{k+d-1}` for each k.
    pub fn with_decay(mut self, d: usize, ks: &[u32]) -> Self {
        for &k in ks {
            self.decay_class.insert(k, seq_norm(&self.samples, k + d as u32 - 1));
        }
        self
    }
}
