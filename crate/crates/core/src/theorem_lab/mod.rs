//! Mechanical replays of the two arguments about `f(x) = x^(2^(2k)+2^k+1)`
//! on GF(2^(4k)): the reduction showing at most four solutions of
//! `f(x) + f(x + a) = b`, and the Maiorana-McFarland style evaluation of
//! its Walsh coefficients. Every intermediate identity is evaluated at
//! concrete field elements; a failure names the identity that broke.

mod differential;
mod nonlinearity;
mod runner;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::catalog::dobbertin_exponent;
use crate::field::{Elem, FieldError, FieldSpec};
use crate::linearized::subfield_elements;
use crate::spectra::{build_lut, FunctionTable, SpectraError};

pub use differential::{diff_solution_count, theorem1_trace, Branch, SolutionStep, Theorem1Trace};
pub use nonlinearity::{
    m4_sum_check, mm_basis, mm_decomposition_check, mm_walsh_crosscheck, pi_fiber, pi_fibers, qualifying_gammas,
    quartic_roots, M4Report, MmWitness, WalshPoint,
};
pub use runner::{run_verification, CheckOutcome, VerifyConfig, VerifyReport};

/// Largest k the lab handles; k = 4 needs the deep flag in sweeps.
pub const MAX_K: u32 = 4;

/// One identity of either argument, with its formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Step {
    SolutionBound,
    NormalizedEquation,
    TraceInSubfield,
    RelativeTrace,
    FoldedQuadratic,
    HalfTrace,
    SubstitutedQuadratic,
    ConjugateSumOfR,
    ConjugateSumOfX,
    TerminalQuadraticT1,
    YQuadratic,
    PInMiddleField,
    ConjugateSumOfP,
    WQuadratic,
    WRoot,
    TerminalQuadraticsT0,
    TerminalRootBound,
    SolutionCoverage,
    GammaTrace,
    AlphaQuadratic,
    AlphaConjugate,
    AlphaOutsideBase,
    AlphaTrace,
    OmegaQuadratic,
    OmegaConjugate,
    OmegaNorm,
    Decomposition,
    SplitTrace,
    FiberSize,
    FiberDifference,
    FiberPartition,
    QuarticKernel,
    QuarticFiber,
    QuarticProduct,
    WalshFiberSum,
    WalshFiberBound,
    WalshTransformAgreement,
    SteppingStones,
    FourFiberTraceSum,
    FourFiberCoefficient,
}

impl Step {
    pub fn formula(self) -> &'static str {
        use Step::*;
        match self {
            SolutionBound => "|{x : x^d + (x+a)^d = b}| <= 4",
            NormalizedEquation => "x^{2^{2k}+2^k} + x^{2^{2k}+1} + x^{2^k+1} + x^{2^{2k}} + x^{2^k} + x + c = 0",
            TraceInSubfield => "t = Tr_k^{4k}(c), t^{2^k} = t",
            RelativeTrace => "x + x^{2^k} + x^{2^{2k}} + x^{2^{3k}} = t",
            FoldedQuadratic => "(x + x^{2^{2k}})^2 + (t + 1)(x + x^{2^{2k}}) + c^{2^k} + c^{2^{3k}} = 0",
            HalfTrace => "x + x^{2^{2k}} = r, r = c^{2^{k-1}} + c^{2^{3k-1}}",
            SubstitutedQuadratic => "x^2 + r(x + x^{2^k}) + x^{2^k} + r + c = 0",
            ConjugateSumOfR => "r + r^{2^k} = t",
            ConjugateSumOfX => "x + x^{2^k} = s, s = sqrt(r^{2^k+1} + c + c^{2^k} + r^{2^k})",
            TerminalQuadraticT1 => "x^2 + x + rs + s + r + c = 0",
            YQuadratic => "(t + 1)^2(y^2 + y) + c^{2^k} + c^{2^{3k}} = 0, y = z + z^{2^{2k}} in {p, p + 1}",
            PInMiddleField => "p in F_{2^{2k}}",
            ConjugateSumOfP => "p + p^{2^k} = t/(t+1)",
            WQuadratic => "(t+1)^2(w^2 + w) + (t+1)^2 p^{2^k+1} + (t+1)p^{2^k} + c + c^{2^k} = 0",
            WRoot => "w = z + z^{2^k} in {q, q + 1}",
            TerminalQuadraticsT0 => {
                "x^2 + x + (t+1)^2(q^{2^k+1} + q^2) + (t+1)q^{2^k} + c = 0 or \
                 x^2 + x + (t+1)^2(q^{2^k+1} + q^{2^k} + q^2 + q) + (t+1)(q+1)^{2^k} + c = 0"
            }
            TerminalRootBound => "terminal quadratics allow no more than four solutions",
            SolutionCoverage => "every solution of x^d + (x+a)^d = b is a root of a terminal quadratic",
            GammaTrace => "gamma in F_{2^k}, gamma != 0, Tr^k(gamma) = 1",
            AlphaQuadratic => "alpha^2 + gamma alpha + gamma^3 = 0, alpha in F_{2^{2k}}",
            AlphaConjugate => "alpha^{2^k} + alpha = gamma",
            AlphaOutsideBase => "alpha not in F_{2^k}",
            AlphaTrace => "Tr^{2k}(alpha) = 1",
            OmegaQuadratic => "omega^2 + omega + alpha = 0",
            OmegaConjugate => "omega + omega^{2^{2k}} = 1",
            OmegaNorm => "omega^{2^{2k}+2^k+1} + (omega^{2^{2k}+2^k+1})^{2^{2k}} = alpha",
            Decomposition => "every element of F_{2^{4k}} is y + omega a with y, a in F_{2^{2k}}",
            SplitTrace => {
                "Tr(gamma^2 (y + omega a)^d) = Tr^{2k}(y pi(a) + alpha gamma^2 a^{2^k+2}), \
                 pi(a) = gamma a^{2^{k-1}} + gamma^2 a^{2^k+1}"
            }
            FiberSize => "|M| in {0, 1, 2, 4}, M = {a | pi(a) = u}",
            FiberDifference => "a, a + c in M implies c in F_{2^k}",
            FiberPartition => "sum_u |M(u)| = 2^{2k}",
            QuarticKernel => "c^4 + (a_0^{2^k} + a_0)c^2 + gamma^{-1}c = 0 has 1, 2 or 4 roots c in F_{2^k}",
            QuarticFiber => "M = {a_0 + c^2 : c a root}",
            QuarticProduct => "c_0 c_1 (c_0 + c_1) = gamma^{-1}",
            WalshFiberSum => "g^(u + omega v) = 2^{2k} sum_{a, pi(a) = u} mu(alpha gamma^2 a^{2^k+2} + v a)",
            WalshFiberBound => "|g^(u + omega v)| <= 2^{2k} |M|",
            WalshTransformAgreement => "fiber sum equals the fast-transform coefficient",
            SteppingStones => "Tr^{2k}(alpha gamma) = Tr^k(gamma(alpha + alpha^{2^k})) = Tr^k(gamma^2) = 1",
            FourFiberTraceSum => "sum_{a in M} Tr^{2k}(alpha gamma^2 a^{2^k+2} + v a) = 1",
            FourFiberCoefficient => "|M| = 4 implies g^(u + omega v) = +-2^{2k+1}",
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        f.write_str(&name)
    }
}

/// A concrete counterexample to one identity.
#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
#[error("{step} violated [{formula}]: {detail}")]
pub struct VerifyError {
    pub step: Step,
    pub formula: &'static str,
    pub detail: String,
}

#[derive(Debug, Error)]
pub enum LabError {
    #[error("k = {0} outside the supported range 1..={MAX_K}")]
    UnsupportedK(u32),
    #[error("the difference a must be nonzero")]
    ZeroDifference,
    #[error("{0} is not an element of the required subfield")]
    NotInSubfield(Elem),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error(transparent)]
    Verification(#[from] VerifyError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

pub(crate) fn ensure(ok: bool, step: Step, detail: impl FnOnce() -> String) -> Result<(), VerifyError> {
    if ok {
        Ok(())
    } else {
        Err(VerifyError { step, formula: step.formula(), detail: detail() })
    }
}

/// GF(2^(4k)) with the power map materialized and the two intermediate
/// subfields listed. All subfields are fixed fields of Frobenius powers
/// inside the one ambient field.
#[derive(Clone, Debug)]
pub struct DobbertinField {
    k: u32,
    spec: FieldSpec,
    d: u64,
    f: FunctionTable,
    base: Vec<Elem>,
    middle: Vec<Elem>,
}

impl DobbertinField {
    pub fn new(k: u32) -> Result<Self, LabError> {
        if !(1..=MAX_K).contains(&k) {
            return Err(LabError::UnsupportedK(k));
        }
        Self::with_spec(FieldSpec::with_default_poly(4 * k)?)
    }

    pub fn with_spec(spec: FieldSpec) -> Result<Self, LabError> {
        let n = spec.degree();
        let k = n / 4;
        if !n.is_multiple_of(4) || !(1..=MAX_K).contains(&k) {
            return Err(LabError::UnsupportedK(k));
        }
        let d = dobbertin_exponent(k);
        Ok(DobbertinField {
            k,
            spec,
            d,
            f: build_lut(&spec, d),
            base: subfield_elements(&spec, k),
            middle: subfield_elements(&spec, 2 * k),
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn exponent(&self) -> u64 {
        self.d
    }

    pub fn table(&self) -> &FunctionTable {
        &self.f
    }

    /// F_{2^k}, sorted.
    pub fn base_field(&self) -> &[Elem] {
        &self.base
    }

    /// F_{2^{2k}}, sorted.
    pub fn middle_field(&self) -> &[Elem] {
        &self.middle
    }

    /// `x^((2^k)^j)`.
    #[inline]
    pub(crate) fn q_pow(&self, x: Elem, j: u32) -> Elem {
        self.spec.frobenius(x, self.k * j)
    }
}
