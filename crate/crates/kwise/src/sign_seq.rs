//! Constructed ±1 sequences with provenance metadata.

use crate::seed::Sign;
use serde::Serialize;

/// Which construction produced a [`SignSequence`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConstructionTag {
    Iid,
    Gray,
    M4Block,
    ModmGeneral,
}

/// Construction parameters, populated as applicable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ConstructionParams {
    pub k: Option<u32>,
    pub m: Option<u32>,
    pub epsilon: Option<f64>,
    /// Block / step length L.
    pub block_len: Option<u64>,
}

/// A finite prefix of a constructed ±1 sequence.
///
/// Constructions are deterministic in (seed, params), so a longer prefix
/// generated from the same inputs always extends a shorter one; the
/// prefix-stability property tests in each construction module pin that down.
#[derive(Debug, Clone, PartialEq)]
pub struct SignSequence {
    values: Vec<Sign>,
    tag: ConstructionTag,
    params: ConstructionParams,
}

impl SignSequence {
    /// Wraps construction output, checking every element is ±1.
    pub(crate) fn from_parts(
        values: Vec<Sign>,
        tag: ConstructionTag,
        params: ConstructionParams,
    ) -> Self {
        debug_assert!(values.iter().all(|&v| v == 1 || v == -1));
        SignSequence {
            values,
            tag,
            params,
        }
    }

    pub fn values(&self) -> &[Sign] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn tag(&self) -> ConstructionTag {
        self.tag
    }

    pub fn params(&self) -> &ConstructionParams {
        &self.params
    }
}
