//! Gradings and truncation orders.
//!
//! Two filtrations coexist: the ν-filtration (`ν ↦ 1`) and the standard one
//! (`ν ↦ 2`, `x ↦ 1`, `∂ ↦ −1`). A third, auxiliary grading counts the formal
//! dual variables used by symbols and star exponentials. Truncation is always
//! an explicit argument.

use std::collections::BTreeMap;

/// Integer weights of the generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradingContext {
    pub nu_weight: i64,
    /// Weight of every chart variable `xⁱ`.
    pub x_weight: i64,
    /// Weight of one derivative `∂ᵢ` (operators only).
    pub d_weight: i64,
    /// Weight of an auxiliary variable not listed in `aux_weights`.
    pub aux_default: i64,
    pub aux_weights: BTreeMap<String, i64>,
}

impl GradingContext {
    /// `ν ↦ 1`, everything else `0`.
    pub fn nu() -> Self {
        GradingContext {
            nu_weight: 1,
            x_weight: 0,
            d_weight: 0,
            aux_default: 0,
            aux_weights: BTreeMap::new(),
        }
    }

    /// `ν ↦ 2`, `x ↦ 1`, `∂ ↦ −1`.
    pub fn standard() -> Self {
        GradingContext {
            nu_weight: 2,
            x_weight: 1,
            d_weight: -1,
            aux_default: 0,
            aux_weights: BTreeMap::new(),
        }
    }

    /// Every auxiliary variable `↦ 1`, everything else `0`.
    pub fn aux() -> Self {
        GradingContext {
            nu_weight: 0,
            x_weight: 0,
            d_weight: 0,
            aux_default: 1,
            aux_weights: BTreeMap::new(),
        }
    }

    pub fn with_aux_weight(mut self, name: &str, w: i64) -> Self {
        self.aux_weights.insert(name.to_string(), w);
        self
    }

    pub fn aux_weight(&self, name: &str) -> i64 {
        self.aux_weights.get(name).copied().unwrap_or(self.aux_default)
    }

    /// Composition in normal order can only lower degrees by
    /// `|σ|·(x_weight + d_weight)`; when that sum is `≤ 0`, the leading degree
    /// of a product term is a lower bound for every term it produces.
    pub(crate) fn reorder_monotone(&self) -> bool {
        self.x_weight + self.d_weight <= 0
    }

    /// Looks up one of the named presets (`nu`, `standard`, `aux`).
    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "nu" => Some(Self::nu()),
            "standard" | "std" => Some(Self::standard()),
            "aux" => Some(Self::aux()),
            _ => None,
        }
    }
}

/// Keep exactly the terms of degree `≤ max_degree` under `grading`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncationSpec {
    pub grading: GradingContext,
    pub max_degree: i64,
}

impl TruncationSpec {
    pub fn new(grading: GradingContext, max_degree: i64) -> Self {
        TruncationSpec { grading, max_degree }
    }

    pub fn nu(max_degree: i64) -> Self {
        Self::new(GradingContext::nu(), max_degree)
    }

    pub fn standard(max_degree: i64) -> Self {
        Self::new(GradingContext::standard(), max_degree)
    }

    pub fn aux(max_degree: i64) -> Self {
        Self::new(GradingContext::aux(), max_degree)
    }

    /// Keeps everything; for exact products of polynomial jets.
    pub fn unbounded() -> Self {
        Self::nu(i64::MAX / 4)
    }

    pub fn keeps(&self, degree: i64) -> bool {
        degree <= self.max_degree
    }
}
