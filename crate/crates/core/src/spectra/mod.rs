//! Difference distribution tables, Walsh spectra, nonlinearity and the
//! permutation / APN / AB classification of functions given as lookup
//! tables over GF(2^n).

mod ddt;
mod walsh;

use std::collections::BTreeMap;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::field::{Elem, FieldSpec};

pub use ddt::{ddt_row, ddt_table, differential_uniformity, for_each_ddt_row, DdtSummary};
pub use walsh::{
    for_each_walsh_row, fwht, nonlinearity, walsh_coefficient_direct, walsh_row, walsh_spectrum, TraceDual,
    WalshSummary,
};

/// Degrees at or above this need `deep` (or sampling) for full sweeps.
pub const DEEP_DEGREE: u32 = 18;

/// Largest degree for which whole tables are materialized in memory.
pub const TABLE_DEGREE_LIMIT: u32 = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpectraError {
    #[error("lookup table has {got} entries, expected {expected}")]
    WrongLength { got: usize, expected: usize },
    #[error("lookup table entry {index:x} = {value:x} is not an element of GF(2^{n})")]
    EntryOutOfRange { index: usize, value: Elem, n: u32 },
    #[error("full sweep at n = {0} refused: set the deep flag or request sampling")]
    NeedsDeep(u32),
    #[error("full tables are only materialized up to n = {TABLE_DEGREE_LIMIT}; got n = {0}")]
    TableTooLarge(u32),
    #[error("failed to start worker pool: {0}")]
    Pool(String),
}

/// A function GF(2^n) -> GF(2^n): `lut[i]` is the image of the element
/// encoded as `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionTable {
    spec: FieldSpec,
    lut: Vec<Elem>,
}

impl FunctionTable {
    pub fn new(spec: FieldSpec, lut: Vec<Elem>) -> Result<Self, SpectraError> {
        if lut.len() != spec.order() {
            return Err(SpectraError::WrongLength { got: lut.len(), expected: spec.order() });
        }
        if let Some((index, &value)) = lut.iter().enumerate().find(|(_, &v)| !spec.contains(v)) {
            return Err(SpectraError::EntryOutOfRange { index, value, n: spec.degree() });
        }
        Ok(FunctionTable { spec, lut })
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn lut(&self) -> &[Elem] {
        &self.lut
    }

    #[inline]
    pub fn eval(&self, x: Elem) -> Elem {
        self.lut[x as usize]
    }

    pub fn into_lut(self) -> Vec<Elem> {
        self.lut
    }

    /// Exact bijectivity of the table.
    pub fn is_permutation(&self) -> bool {
        let mut seen = vec![false; self.lut.len()];
        self.lut.iter().all(|&v| !std::mem::replace(&mut seen[v as usize], true))
    }
}

/// Materializes `x -> x^d`, with `0^0 = 1`.
///
/// Walks the multiplicative group along a generator `g`, so each entry
/// costs two multiplications instead of a full exponentiation.
pub fn build_lut(spec: &FieldSpec, d: u64) -> FunctionTable {
    let order = spec.order();
    let group = (order - 1) as u64;
    let mut lut = vec![0; order];
    lut[0] = if d == 0 { 1 } else { 0 };
    let g = spec.primitive_element();
    let step = spec.pow(g, d % group);
    let (mut x, mut y) = (1, 1);
    for _ in 0..group {
        lut[x as usize] = y;
        x = spec.mul(x, g);
        y = spec.mul(y, step);
    }
    FunctionTable { spec: *spec, lut }
}

/// Uniform random subset of row indices (never 0) for sampled sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Sampling {
    pub count: usize,
    pub seed: u64,
}

/// How a sweep fans out and how much of it runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SweepConfig {
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
    pub deep: bool,
    pub sampling: Option<Sampling>,
}

impl SweepConfig {
    pub fn with_threads(threads: usize) -> Self {
        SweepConfig { threads, ..Default::default() }
    }

    pub(crate) fn pool(&self) -> Result<rayon::ThreadPool, SpectraError> {
        rayon::ThreadPoolBuilder::new().num_threads(self.threads).build().map_err(|e| SpectraError::Pool(e.to_string()))
    }

    /// The nonzero row indices a sweep visits, in increasing order.
    pub(crate) fn rows(&self, spec: &FieldSpec) -> Result<Vec<Elem>, SpectraError> {
        let nonzero = spec.order() - 1;
        match self.sampling {
            Some(s) if s.count < nonzero => {
                let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
                let mut picked: Vec<Elem> =
                    index::sample(&mut rng, nonzero, s.count).into_iter().map(|i| i as Elem + 1).collect();
                picked.sort_unstable();
                Ok(picked)
            }
            _ => {
                if spec.degree() >= DEEP_DEGREE && !self.deep {
                    return Err(SpectraError::NeedsDeep(spec.degree()));
                }
                Ok((1..=nonzero as Elem).collect())
            }
        }
    }
}

/// Whether a power map's AB status is meaningful: only odd degrees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AbStatus {
    Yes,
    No,
    NotApplicable,
}

impl AbStatus {
    pub fn as_option(self) -> Option<bool> {
        match self {
            AbStatus::Yes => Some(true),
            AbStatus::No => Some(false),
            AbStatus::NotApplicable => None,
        }
    }
}

/// Everything the classifier measures about one function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectrumSummary {
    pub n: u32,
    pub delta: u32,
    pub nl: u64,
    pub walsh_max: u32,
    /// Fourier spectrum as value -> multiplicity over all a and all b != 0.
    pub lambda: BTreeMap<i64, u64>,
    pub is_permutation: bool,
    pub is_apn: bool,
    pub is_ab: AbStatus,
    /// Rows were sampled: delta and walsh_max are lower bounds, nl an
    /// upper bound.
    pub sampled: bool,
    pub ddt_rows_well_formed: bool,
    pub parseval_holds: bool,
}

/// Runs the DDT and Walsh sweeps and aggregates them.
pub fn classify(f: &FunctionTable, cfg: &SweepConfig) -> Result<SpectrumSummary, SpectraError> {
    let ddt = differential_uniformity(f, cfg)?;
    let walsh = walsh_spectrum(f, cfg)?;
    Ok(summarize(f, &ddt, &walsh))
}

pub(crate) fn summarize(f: &FunctionTable, ddt: &DdtSummary, walsh: &WalshSummary) -> SpectrumSummary {
    let n = f.spec().degree();
    let is_ab = if n.is_multiple_of(2) {
        AbStatus::NotApplicable
    } else {
        let peak = 1i64 << n.div_ceil(2);
        let ab = walsh.lambda.keys().all(|&v| v == 0 || v.abs() == peak);
        if ab {
            AbStatus::Yes
        } else {
            AbStatus::No
        }
    };
    SpectrumSummary {
        n,
        delta: ddt.delta,
        nl: nl_from_walsh_max(n, walsh.walsh_max),
        walsh_max: walsh.walsh_max,
        lambda: walsh.lambda.clone(),
        is_permutation: f.is_permutation(),
        is_apn: ddt.delta == 2,
        is_ab,
        sampled: ddt.sampled || walsh.sampled,
        ddt_rows_well_formed: ddt.rows_well_formed,
        parseval_holds: walsh.parseval_holds,
    }
}

/// `2^(n-1) - walsh_max / 2`.
pub fn nl_from_walsh_max(n: u32, walsh_max: u32) -> u64 {
    (1u64 << (n - 1)) - (walsh_max as u64) / 2
}
