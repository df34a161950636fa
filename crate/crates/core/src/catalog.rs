//! Known differentially 4-uniform highly nonlinear power permutations of
//! even-degree fields, their side conditions, and the gcd test for when a
//! power map permutes the field.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::field::{gcd, Elem, FieldError, FieldSpec, MAX_DEGREE, MIN_DEGREE};
use crate::spectra::{build_lut, classify, FunctionTable, SpectraError, SpectrumSummary, SweepConfig};

/// Largest degree the catalog sweep accepts.
pub const CATALOG_MAX_DEGREE: u32 = 16;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("invalid parameters for {family}: {reason}")]
    Parameters { family: String, reason: String },
    #[error("catalog sweeps are limited to n <= {CATALOG_MAX_DEGREE}, got {0}")]
    TooLarge(u32),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `x^(2^s + 1)`
    Gold { s: u32 },
    /// `x^(2^(2s) - 2^s + 1)`
    Kasami { s: u32 },
    /// `x^(2^n - 2)`, i.e. `x^-1` with `0 -> 0`
    Inverse,
    /// `x^(2^(2k) + 2^k + 1)` on GF(2^(4k))
    Dobbertin { k: u32 },
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Gold { s } => write!(f, "gold(s={s})"),
            Family::Kasami { s } => write!(f, "kasami(s={s})"),
            Family::Inverse => write!(f, "inverse"),
            Family::Dobbertin { k } => write!(f, "dobbertin(k={k})"),
        }
    }
}

/// A family instantiated at a degree, with its exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FamilySpec {
    pub family: Family,
    pub n: u32,
    pub d: u64,
}

/// `2^(2k) + 2^k + 1`.
pub fn dobbertin_exponent(k: u32) -> u64 {
    (1u64 << (2 * k)) + (1u64 << k) + 1
}

/// Computes the exponent of `family` at degree `n`. Dobbertin maps fix
/// their own degree `4k`; pass `None` or a matching `n`.
pub fn family_exponent(family: Family, n: Option<u32>) -> Result<FamilySpec, CatalogError> {
    let bad = |reason: String| CatalogError::Parameters { family: family.to_string(), reason };
    let n = match (family, n) {
        (Family::Dobbertin { k }, None) => 4 * k,
        (Family::Dobbertin { k }, Some(n)) if n != 4 * k => {
            return Err(bad(format!("field degree {n} is not 4k = {}", 4 * k)));
        }
        (_, Some(n)) => n,
        (_, None) => return Err(bad("field degree required".into())),
    };
    if !(MIN_DEGREE..=MAX_DEGREE).contains(&n) {
        return Err(bad(format!("field degree {n} outside {MIN_DEGREE}..={MAX_DEGREE}")));
    }
    let d = match family {
        Family::Gold { s } | Family::Kasami { s } if s == 0 || s >= n => {
            return Err(bad(format!("s = {s} must lie in 1..{n}")));
        }
        Family::Gold { s } => (1u64 << s) + 1,
        Family::Kasami { s } => (1u64 << (2 * s)) - (1u64 << s) + 1,
        Family::Inverse => (1u64 << n) - 2,
        Family::Dobbertin { k: 0 } => return Err(bad("k must be positive".into())),
        Family::Dobbertin { k } => dobbertin_exponent(k),
    };
    Ok(FamilySpec { family, n, d })
}

impl FamilySpec {
    /// The table's side conditions for delta = 4 and bijectivity.
    pub fn conditions_met(&self) -> bool {
        let n = self.n;
        match self.family {
            Family::Gold { s } | Family::Kasami { s } => {
                n.is_multiple_of(2) && (n / 2) % 2 == 1 && gcd(n as u64, s as u64) == 2
            }
            Family::Inverse => n.is_multiple_of(2),
            Family::Dobbertin { k } => k % 2 == 1,
        }
    }

    pub fn table(&self, spec: &FieldSpec) -> FunctionTable {
        match self.family {
            Family::Inverse => inverse_map(spec),
            _ => build_lut(spec, self.d),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PermutationCheck {
    pub gcd: u64,
    pub is_permutation: bool,
}

/// `x^d` permutes GF(2^n) exactly when `gcd(d, 2^n - 1) = 1`.
pub fn permutation_check(n: u32, d: u64) -> PermutationCheck {
    let g = gcd(d, (1u64 << n) - 1);
    PermutationCheck { gcd: g, is_permutation: g == 1 }
}

/// The inverse map with `0 -> 0`.
pub fn inverse_map(spec: &FieldSpec) -> FunctionTable {
    let lut: Vec<Elem> = spec.elements().map(|x| spec.inv(x).unwrap_or(0)).collect();
    FunctionTable::new(*spec, lut).expect("inverse map stays inside the field")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Prediction {
    pub delta: u32,
    pub is_permutation: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatalogEntry {
    pub family: FamilySpec,
    pub conditions_met: bool,
    /// Only made when the side conditions hold.
    pub expected: Option<Prediction>,
    pub gcd_check: PermutationCheck,
    pub measured: SpectrumSummary,
}

impl CatalogEntry {
    /// `None` when nothing was predicted.
    pub fn matches_prediction(&self) -> Option<bool> {
        self.expected.map(|p| p.delta == self.measured.delta && p.is_permutation == self.measured.is_permutation)
    }
}

/// Every realizable table row at degree <= `max_n`.
///
/// Gold and Kasami appear at n = 6, s = 2 (and n = 10, s = 4 with `deep`);
/// the inverse at even n from 4 to 12; Dobbertin for k = 1, 2, 3 (and 4
/// with `deep`).
pub fn catalog_families(max_n: u32, deep: bool) -> Vec<FamilySpec> {
    let mut rows: Vec<(Family, Option<u32>)> = Vec::new();
    let mut gk = vec![(6, 2)];
    if deep {
        gk.push((10, 4));
    }
    for &(n, s) in &gk {
        rows.push((Family::Gold { s }, Some(n)));
        rows.push((Family::Kasami { s }, Some(n)));
    }
    for n in [4, 6, 8, 10, 12] {
        rows.push((Family::Inverse, Some(n)));
    }
    let max_k = if deep { 4 } else { 3 };
    for k in 1..=max_k {
        rows.push((Family::Dobbertin { k }, None));
    }
    rows.into_iter().filter_map(|(fam, n)| family_exponent(fam, n).ok()).filter(|f| f.n <= max_n).collect()
}

pub fn catalog_table(max_n: u32, cfg: &SweepConfig) -> Result<Vec<CatalogEntry>, CatalogError> {
    if max_n > CATALOG_MAX_DEGREE {
        return Err(CatalogError::TooLarge(max_n));
    }
    catalog_families(max_n, cfg.deep)
        .into_iter()
        .map(|family| {
            let spec = FieldSpec::with_default_poly(family.n)?;
            let measured = classify(&family.table(&spec), cfg)?;
            let conditions_met = family.conditions_met();
            Ok(CatalogEntry {
                family,
                conditions_met,
                expected: conditions_met.then_some(Prediction { delta: 4, is_permutation: true }),
                gcd_check: permutation_check(family.n, family.d),
                measured,
            })
        })
        .collect()
}
