//! Replay of the reduction of `x^d + (x + a)^d = b` to at most two
//! quadratics in `x`.
//!
//! Work happens in the normalized coordinate `X = x / a`, where the equation
//! reads `P(X) + c = 0` with `c = b a^-d + 1`. The relative trace
//! `t = Tr_k^{4k}(c)` splits the argument into `t = 1` and `t != 1`.

use serde::Serialize;

use super::{ensure, DobbertinField, LabError, Step, VerifyError};
use crate::field::{Elem, SubfieldTower};
use crate::linearized::solve_artin_schreier;

/// All `x` with `x^d + (x + a)^d = b`, by exhaustive scan.
pub fn diff_solution_count(lab: &DobbertinField, a: Elem, b: Elem) -> Result<Vec<Elem>, LabError> {
    if a == 0 {
        return Err(LabError::ZeroDifference);
    }
    let sols = direct_solutions(lab, a, b);
    ensure(sols.len() <= 4, Step::SolutionBound, || format!("a = {a:x}, b = {b:x} has {} solutions", sols.len()))?;
    Ok(sols)
}

fn direct_solutions(lab: &DobbertinField, a: Elem, b: Elem) -> Vec<Elem> {
    let f = lab.table();
    lab.spec().elements().filter(|&x| f.eval(x) ^ f.eval(x ^ a) == b).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum Branch {
    /// `t = 1`: `r` and `s` pin `x + x^(2^(2k))` and `x + x^(2^k)`.
    TraceOne { r: Elem, s: Elem },
    /// `t != 1`: `p` and `q` are the least roots of the `y` and `w`
    /// quadratics, absent when those have no roots.
    TraceNotOne { p: Option<Elem>, q: Option<Elem> },
}

/// Intermediate values for one solution, normalized coordinates.
///
/// In the `t = 1` branch `y = X + X^(2^(2k))` and `w = X + X^(2^k)`; in the
/// `t != 1` branch the same with `z = X / (t + 1)` in place of `X`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SolutionStep {
    pub x: Elem,
    pub normalized: Elem,
    pub z: Elem,
    pub y: Elem,
    pub w: Elem,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Theorem1Trace {
    pub k: u32,
    pub a: Elem,
    pub b: Elem,
    pub c: Elem,
    pub t: Elem,
    pub branch: Branch,
    /// Original coordinates, sorted.
    pub solutions_direct: Vec<Elem>,
    /// Roots of the terminal quadratics that solve the original equation,
    /// original coordinates, sorted.
    pub solutions_via_quadratics: Vec<Elem>,
    /// All roots of the terminal quadratics, normalized coordinates.
    pub candidates: Vec<Elem>,
    pub steps: Vec<SolutionStep>,
}

struct Replay<'a> {
    lab: &'a DobbertinField,
    a: Elem,
    b: Elem,
    c: Elem,
    t: Elem,
}

impl Replay<'_> {
    fn mul(&self, x: Elem, y: Elem) -> Elem {
        self.lab.spec().mul(x, y)
    }

    fn sq(&self, x: Elem) -> Elem {
        self.lab.spec().square(x)
    }

    fn q(&self, x: Elem, j: u32) -> Elem {
        self.lab.q_pow(x, j)
    }

    fn at(&self) -> String {
        format!("k = {}, a = {:x}, b = {:x}, c = {:x}, t = {:x}", self.lab.k(), self.a, self.b, self.c, self.t)
    }

    /// `P(X)`: the normalized equation without its constant.
    fn normalized_lhs(&self, x: Elem) -> Elem {
        let (x1, x2) = (self.q(x, 1), self.q(x, 2));
        self.mul(x2, x1) ^ self.mul(x2, x) ^ self.mul(x1, x) ^ x2 ^ x1 ^ x
    }

    fn common_steps(&self, x: Elem) -> Result<(), VerifyError> {
        let c = self.c;
        let t = self.t;
        ensure(self.normalized_lhs(x) ^ c == 0, Step::NormalizedEquation, || format!("{}, X = {x:x}", self.at()))?;
        let trace = x ^ self.q(x, 1) ^ self.q(x, 2) ^ self.q(x, 3);
        ensure(trace == t, Step::RelativeTrace, || format!("{}, X = {x:x}, trace = {trace:x}", self.at()))?;
        let e = x ^ self.q(x, 2);
        let folded = self.sq(e) ^ self.mul(t ^ 1, e) ^ self.q(c, 1) ^ self.q(c, 3);
        ensure(folded == 0, Step::FoldedQuadratic, || format!("{}, X = {x:x}", self.at()))
    }

    fn trace_one(&self, normalized: &[Elem]) -> Result<(Branch, Vec<Elem>, Vec<SolutionStep>), VerifyError> {
        let s_ = self.lab.spec();
        let k = self.lab.k();
        let c = self.c;
        let r = s_.frobenius(c, k - 1) ^ s_.frobenius(c, 3 * k - 1);
        let rq = self.q(r, 1);
        ensure(r ^ rq == self.t, Step::ConjugateSumOfR, || format!("{}, r = {r:x}", self.at()))?;
        let s = s_.sqrt(self.mul(rq, r) ^ c ^ self.q(c, 1) ^ rq);
        let constant = self.mul(r, s) ^ s ^ r ^ c;

        let mut steps = Vec::with_capacity(normalized.len());
        for &x in normalized {
            let xq = self.q(x, 1);
            let y = x ^ self.q(x, 2);
            let w = x ^ xq;
            ensure(y == r, Step::HalfTrace, || format!("{}, X = {x:x}, r = {r:x}", self.at()))?;
            let substituted = self.sq(x) ^ self.mul(r, w) ^ xq ^ r ^ c;
            ensure(substituted == 0, Step::SubstitutedQuadratic, || format!("{}, X = {x:x}", self.at()))?;
            ensure(w == s, Step::ConjugateSumOfX, || format!("{}, X = {x:x}, s = {s:x}", self.at()))?;
            let terminal = self.sq(x) ^ x ^ constant;
            ensure(terminal == 0, Step::TerminalQuadraticT1, || format!("{}, X = {x:x}", self.at()))?;
            steps.push(SolutionStep { x: self.mul(x, self.a), normalized: x, z: x, y, w });
        }

        let candidates = solve_artin_schreier(s_, constant);
        ensure(candidates.len() <= 2, Step::TerminalRootBound, || self.at())?;
        Ok((Branch::TraceOne { r, s }, candidates, steps))
    }

    fn trace_not_one(&self, normalized: &[Elem]) -> Result<(Branch, Vec<Elem>, Vec<SolutionStep>), VerifyError> {
        let s_ = self.lab.spec();
        let c = self.c;
        let t1 = self.t ^ 1;
        let t1_inv = s_.inv(t1).expect("t != 1");
        let t1_sq = self.sq(t1);
        let t1_inv_sq = self.sq(t1_inv);
        let ratio = self.mul(self.t, t1_inv);

        let ys = solve_artin_schreier(s_, self.mul(self.q(c, 1) ^ self.q(c, 3), t1_inv_sq));
        let Some(&p) = ys.first() else {
            ensure(normalized.is_empty(), Step::YQuadratic, || {
                format!("{}: no root y but solutions exist", self.at())
            })?;
            return Ok((Branch::TraceNotOne { p: None, q: None }, Vec::new(), Vec::new()));
        };
        ensure(self.q(p, 2) == p, Step::PInMiddleField, || format!("{}, p = {p:x}", self.at()))?;

        let pq = self.q(p, 1);
        let p_norm = self.mul(pq, p);
        let w_const = p_norm ^ self.mul(pq, t1_inv) ^ self.mul(c ^ self.q(c, 1), t1_inv_sq);
        let ws = solve_artin_schreier(s_, w_const);

        let mut steps = Vec::with_capacity(normalized.len());
        for &x in normalized {
            let z = self.mul(x, t1_inv);
            let y = z ^ self.q(z, 2);
            let w = z ^ self.q(z, 1);
            ensure(y == p || y == p ^ 1, Step::YQuadratic, || {
                format!("{}, X = {x:x}, y = {y:x}, p = {p:x}", self.at())
            })?;
            ensure(y ^ self.q(y, 1) == ratio, Step::ConjugateSumOfP, || {
                format!("{}, X = {x:x}, y = {y:x}", self.at())
            })?;
            let eq = self.mul(t1_sq, self.sq(w) ^ w) ^ self.mul(t1_sq, p_norm) ^ self.mul(t1, pq) ^ c ^ self.q(c, 1);
            ensure(eq == 0, Step::WQuadratic, || format!("{}, X = {x:x}, w = {w:x}, p = {p:x}", self.at()))?;
            steps.push(SolutionStep { x: self.mul(x, self.a), normalized: x, z, y, w });
        }

        let Some(&q) = ws.first() else {
            ensure(normalized.is_empty(), Step::WQuadratic, || {
                format!("{}: no root w but solutions exist", self.at())
            })?;
            return Ok((Branch::TraceNotOne { p: Some(p), q: None }, Vec::new(), steps));
        };

        let qq = self.q(q, 1);
        let q_norm = self.mul(qq, q);
        let q_sq = self.sq(q);
        let k1 = self.mul(t1_sq, q_norm ^ q_sq) ^ self.mul(t1, qq) ^ c;
        let k2 = self.mul(t1_sq, q_norm ^ qq ^ q_sq ^ q) ^ self.mul(t1, self.q(q ^ 1, 1)) ^ c;
        for step in &steps {
            let x = step.normalized;
            ensure(step.w == q || step.w == q ^ 1, Step::WRoot, || {
                format!("{}, X = {x:x}, w = {:x}, q = {q:x}", self.at(), step.w)
            })?;
            let base = self.sq(x) ^ x;
            ensure(base == k1 || base == k2, Step::TerminalQuadraticsT0, || format!("{}, X = {x:x}", self.at()))?;
        }

        let mut candidates = solve_artin_schreier(s_, k1);
        candidates.extend(solve_artin_schreier(s_, k2));
        candidates.sort_unstable();
        candidates.dedup();
        ensure(candidates.len() <= 4, Step::TerminalRootBound, || self.at())?;
        Ok((Branch::TraceNotOne { p: Some(p), q: Some(q) }, candidates, steps))
    }
}

/// Replays the whole reduction for one pair `(a, b)`.
pub fn theorem1_trace(lab: &DobbertinField, a: Elem, b: Elem) -> Result<Theorem1Trace, LabError> {
    if a == 0 {
        return Err(LabError::ZeroDifference);
    }
    let s = lab.spec();
    let c = s.mul(b, s.inv(lab.table().eval(a))?) ^ 1;
    let tower = SubfieldTower::new(s, lab.k())?;
    let t = s.relative_trace(tower, c);
    let replay = Replay { lab, a, b, c, t };
    ensure(lab.q_pow(t, 1) == t, Step::TraceInSubfield, || replay.at())?;

    let solutions_direct = direct_solutions(lab, a, b);
    let a_inv = s.inv(a)?;
    let normalized: Vec<Elem> = solutions_direct.iter().map(|&x| s.mul(x, a_inv)).collect();
    for &x in &normalized {
        replay.common_steps(x)?;
    }

    let (branch, candidates, steps) =
        if t == 1 { replay.trace_one(&normalized)? } else { replay.trace_not_one(&normalized)? };

    let mut solutions_via_quadratics: Vec<Elem> =
        candidates.iter().filter(|&&x| replay.normalized_lhs(x) == c).map(|&x| s.mul(x, a)).collect();
    solutions_via_quadratics.sort_unstable();
    ensure(solutions_via_quadratics == solutions_direct, Step::SolutionCoverage, || {
        format!("{}: direct {solutions_direct:x?}, via quadratics {solutions_via_quadratics:x?}", replay.at())
    })?;
    ensure(solutions_direct.len() <= 4, Step::SolutionBound, || {
        format!("{}: {} solutions", replay.at(), solutions_direct.len())
    })?;

    Ok(Theorem1Trace { k: lab.k(), a, b, c, t, branch, solutions_direct, solutions_via_quadratics, candidates, steps })
}
