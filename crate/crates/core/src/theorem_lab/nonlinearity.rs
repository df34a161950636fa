//! The split-coordinate evaluation of `g(x) = Tr(gamma^2 x^d)`.
//!
//! With `gamma` in F_{2^k} of trace 1, `alpha` a root of
//! `X^2 + gamma X + gamma^3` in F_{2^{2k}} and `omega` a root of
//! `X^2 + X + alpha`, every `x` is uniquely `y + omega a` with `y, a` in
//! F_{2^{2k}}, and `g` becomes linear in `y`:
//! `g(y + omega a) = Tr^{2k}(y pi(a) + alpha gamma^2 a^(2^k+2))` where
//! `pi(a) = gamma a^(2^(k-1)) + gamma^2 a^(2^k+1)`. Walsh coefficients then
//! reduce to signed sums over the fibers of `pi`.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{ensure, DobbertinField, LabError, Step, VerifyError};
use crate::field::Elem;
use crate::linearized::{solve_artin_schreier, solve_linearized};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MmWitness {
    pub k: u32,
    pub gamma: Elem,
    pub alpha: Elem,
    pub omega: Elem,
    #[serde(skip)]
    gamma_sq: Elem,
    #[serde(skip)]
    gamma_inv: Elem,
}

impl MmWitness {
    /// `pi(a) = gamma a^(2^(k-1)) + gamma^2 a^(2^k+1)`.
    pub fn pi(&self, lab: &DobbertinField, a: Elem) -> Elem {
        let s = lab.spec();
        s.mul(self.gamma, s.frobenius(a, self.k - 1)) ^ s.mul(self.gamma_sq, s.mul(lab.q_pow(a, 1), a))
    }

    /// `alpha gamma^2 a^(2^k+2)`, the part of `g` not involving `y`.
    pub fn offset(&self, lab: &DobbertinField, a: Elem) -> Elem {
        let s = lab.spec();
        let a_pow = s.mul(lab.q_pow(a, 1), s.square(a));
        s.mul(s.mul(self.alpha, self.gamma_sq), a_pow)
    }

    /// The component `b` whose Walsh row the witness describes.
    pub fn component(&self) -> Elem {
        self.gamma_sq
    }
}

/// Nonzero `gamma` in F_{2^k} with `Tr^k(gamma) = 1`, increasing.
pub fn qualifying_gammas(lab: &DobbertinField) -> Vec<Elem> {
    let s = lab.spec();
    lab.base_field().iter().copied().filter(|&g| g != 0 && s.subfield_trace(g, lab.k()) == 1).collect()
}

/// Builds `gamma`, `alpha`, `omega` and checks every defining identity.
/// `gamma = None` picks the least qualifying element.
pub fn mm_basis(lab: &DobbertinField, gamma: Option<Elem>) -> Result<MmWitness, LabError> {
    let s = lab.spec();
    let k = lab.k();
    let gamma = match gamma {
        Some(g) => g,
        None => *qualifying_gammas(lab)
            .first()
            .ok_or_else(|| LabError::Construction("no gamma with Tr^k(gamma) = 1".into()))?,
    };
    ensure(
        gamma != 0 && lab.base_field().binary_search(&gamma).is_ok() && s.subfield_trace(gamma, k) == 1,
        Step::GammaTrace,
        || format!("gamma = {gamma:x}"),
    )?;

    let gamma_sq = s.square(gamma);
    let gamma_cube = s.mul(gamma_sq, gamma);
    let alpha = solve_linearized(s, &[(1, 1), (gamma, 0)], gamma_cube)
        .into_iter()
        .find(|&x| lab.middle_field().binary_search(&x).is_ok())
        .ok_or_else(|| LabError::Construction(format!("no alpha in F_(2^{}) for gamma = {gamma:x}", 2 * k)))?;
    let omega = *solve_artin_schreier(s, alpha)
        .first()
        .ok_or_else(|| LabError::Construction(format!("x^2 + x + alpha has no root for alpha = {alpha:x}")))?;

    let w = MmWitness { k, gamma, alpha, omega, gamma_sq, gamma_inv: s.inv(gamma)? };
    check_witness(lab, &w)?;
    Ok(w)
}

fn check_witness(lab: &DobbertinField, w: &MmWitness) -> Result<(), VerifyError> {
    let s = lab.spec();
    let k = lab.k();
    let (gamma, alpha, omega) = (w.gamma, w.alpha, w.omega);
    let at = || format!("k = {k}, gamma = {gamma:x}, alpha = {alpha:x}, omega = {omega:x}");

    let quad = s.square(alpha) ^ s.mul(gamma, alpha) ^ s.mul(w.gamma_sq, gamma);
    ensure(quad == 0 && lab.q_pow(alpha, 2) == alpha, Step::AlphaQuadratic, at)?;
    ensure(lab.q_pow(alpha, 1) ^ alpha == gamma, Step::AlphaConjugate, at)?;
    ensure(lab.q_pow(alpha, 1) != alpha, Step::AlphaOutsideBase, at)?;
    ensure(s.subfield_trace(alpha, 2 * k) == 1, Step::AlphaTrace, at)?;
    ensure(s.square(omega) ^ omega ^ alpha == 0, Step::OmegaQuadratic, at)?;
    ensure(omega ^ lab.q_pow(omega, 2) == 1, Step::OmegaConjugate, at)?;
    let norm = lab.table().eval(omega);
    ensure(norm ^ lab.q_pow(norm, 2) == alpha, Step::OmegaNorm, at)?;

    let mut seen = vec![false; s.order()];
    for &y in lab.middle_field() {
        for &a in lab.middle_field() {
            let x = y ^ s.mul(omega, a);
            ensure(!std::mem::replace(&mut seen[x as usize], true), Step::Decomposition, || {
                format!("{}: y + omega a repeats at y = {y:x}, a = {a:x}", at())
            })?;
        }
    }
    Ok(())
}

/// Checks `Tr(gamma^2 (y + omega a)^d) = Tr^{2k}(y pi(a) + alpha gamma^2
/// a^(2^k+2))` for every `(y, a)`; returns the number of pairs.
pub fn mm_decomposition_check(lab: &DobbertinField, w: &MmWitness) -> Result<u64, VerifyError> {
    let s = lab.spec();
    let mut count = 0;
    for &a in lab.middle_field() {
        let pi = w.pi(lab, a);
        let off = w.offset(lab, a);
        for &y in lab.middle_field() {
            let x = y ^ s.mul(w.omega, a);
            let direct = s.trace(s.mul(w.gamma_sq, lab.table().eval(x)));
            let split = s.subfield_trace(s.mul(y, pi) ^ off, 2 * lab.k());
            ensure(split <= 1 && direct == split, Step::SplitTrace, || {
                format!("k = {}, gamma = {:x}, y = {y:x}, a = {a:x}: {direct} vs {split:x}", lab.k(), w.gamma)
            })?;
            count += 1;
        }
    }
    Ok(count)
}

/// `M = {a in F_{2^{2k}} | pi(a) = u}`, sorted, with its size and
/// difference structure checked.
pub fn pi_fiber(lab: &DobbertinField, w: &MmWitness, u: Elem) -> Result<Vec<Elem>, LabError> {
    if lab.middle_field().binary_search(&u).is_err() {
        return Err(LabError::NotInSubfield(u));
    }
    let fiber: Vec<Elem> = lab.middle_field().iter().copied().filter(|&a| w.pi(lab, a) == u).collect();
    check_fiber(lab, w, u, &fiber)?;
    Ok(fiber)
}

fn check_fiber(lab: &DobbertinField, w: &MmWitness, u: Elem, fiber: &[Elem]) -> Result<(), VerifyError> {
    ensure(matches!(fiber.len(), 0 | 1 | 2 | 4), Step::FiberSize, || {
        format!("k = {}, gamma = {:x}, u = {u:x}: |M| = {}", lab.k(), w.gamma, fiber.len())
    })?;
    for (i, &a) in fiber.iter().enumerate() {
        for &b in &fiber[i + 1..] {
            let c = a ^ b;
            ensure(lab.q_pow(c, 1) == c, Step::FiberDifference, || {
                format!("k = {}, gamma = {:x}, u = {u:x}: {a:x} + {b:x}", lab.k(), w.gamma)
            })?;
        }
    }
    Ok(())
}

/// Every fiber of `pi`, keyed by `u` over all of F_{2^{2k}}.
pub fn pi_fibers(lab: &DobbertinField, w: &MmWitness) -> Result<BTreeMap<Elem, Vec<Elem>>, VerifyError> {
    let mut fibers: BTreeMap<Elem, Vec<Elem>> = lab.middle_field().iter().map(|&u| (u, Vec::new())).collect();
    for &a in lab.middle_field() {
        let u = w.pi(lab, a);
        ensure(fibers.contains_key(&u), Step::FiberPartition, || format!("pi({a:x}) = {u:x} leaves F_(2^2k)"))?;
        fibers.entry(u).or_default().push(a);
    }
    let total: usize = fibers.values().map(Vec::len).sum();
    ensure(total == lab.middle_field().len(), Step::FiberPartition, || format!("fiber sizes sum to {total}"))?;
    for (&u, fiber) in &fibers {
        check_fiber(lab, w, u, fiber)?;
    }
    Ok(fibers)
}

/// Roots `c` in F_{2^k} of `c^4 + (a0^(2^k) + a0) c^2 + gamma^-1 c = 0`,
/// sorted, checked against the fiber through `a0`.
pub fn quartic_roots(lab: &DobbertinField, w: &MmWitness, a0: Elem) -> Result<Vec<Elem>, LabError> {
    let s = lab.spec();
    if lab.middle_field().binary_search(&a0).is_err() {
        return Err(LabError::NotInSubfield(a0));
    }
    let beta = lab.q_pow(a0, 1) ^ a0;
    let roots: Vec<Elem> = solve_linearized(s, &[(1, 2), (beta, 1), (w.gamma_inv, 0)], 0)
        .into_iter()
        .filter(|&c| lab.q_pow(c, 1) == c)
        .collect();
    let at = || format!("k = {}, gamma = {:x}, a0 = {a0:x}", lab.k(), w.gamma);
    ensure(matches!(roots.len(), 1 | 2 | 4) && roots[0] == 0, Step::QuarticKernel, || {
        format!("{}: roots {roots:x?}", at())
    })?;

    let mut shifted: Vec<Elem> = roots.iter().map(|&c| a0 ^ s.square(c)).collect();
    shifted.sort_unstable();
    let fiber = pi_fiber(lab, w, w.pi(lab, a0))?;
    ensure(shifted == fiber, Step::QuarticFiber, || format!("{}: {shifted:x?} vs fiber {fiber:x?}", at()))?;

    if roots.len() == 4 {
        let (c0, c1) = (roots[1], roots[2]);
        let product = s.mul(s.mul(c0, c1), c0 ^ c1);
        ensure(product == w.gamma_inv, Step::QuarticProduct, || format!("{}: c0 = {c0:x}, c1 = {c1:x}", at()))?;
    }
    Ok(roots)
}

/// One Walsh coefficient of `g = Tr(gamma^2 f)` at the point whose linear
/// form is `Tr^{2k}(u y + v a)` in split coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WalshPoint {
    pub u: Elem,
    pub v: Elem,
    /// The field element `lambda` with `Tr(lambda x)` equal to that form.
    pub lambda: Elem,
    pub fiber_size: usize,
    pub fiber_sum: i64,
    pub direct: i64,
}

/// Solves `Tr_{2k}^{4k}(lambda) = u`, `Tr_{2k}^{4k}(lambda omega) = v`.
///
/// Writing `T(z) = z + z^(2^(2k))`, the target `u + omega v` is the
/// linearized expression `(1 + omega^2) lambda + (1 + omega^(1 + 2^(2k)))
/// lambda^(2^(2k))`, which is bijective because `(u, v) -> u + omega v` is.
pub fn walsh_point_lambda(lab: &DobbertinField, w: &MmWitness, u: Elem, v: Elem) -> Result<Elem, LabError> {
    let s = lab.spec();
    let k = lab.k();
    let om = w.omega;
    let c0 = 1 ^ s.square(om);
    let c1 = 1 ^ s.mul(om, lab.q_pow(om, 2));
    let sols = solve_linearized(s, &[(c0, 0), (c1, 2 * k)], u ^ s.mul(om, v));
    match sols.as_slice() {
        [lambda] => Ok(*lambda),
        _ => Err(LabError::Construction(format!("{} preimages for (u, v) = ({u:x}, {v:x})", sols.len()))),
    }
}

fn fiber_sum(lab: &DobbertinField, w: &MmWitness, fiber: &[Elem], v: Elem) -> i64 {
    let s = lab.spec();
    let signs: i64 = fiber
        .iter()
        .map(|&a| if s.subfield_trace(w.offset(lab, a) ^ s.mul(v, a), 2 * lab.k()) == 0 { 1 } else { -1 })
        .sum();
    signs << (2 * lab.k())
}

fn direct_coefficient(lab: &DobbertinField, w: &MmWitness, lambda: Elem) -> i64 {
    let s = lab.spec();
    s.elements()
        .map(|x| {
            let e = s.trace(s.mul(lambda, x)) ^ s.trace(s.mul(w.gamma_sq, lab.table().eval(x)));
            1 - 2 * e as i64
        })
        .sum()
}

/// Evaluates the coefficient both from the fiber sum and from the
/// definition, and checks they agree and respect `2^{2k} |M|`.
pub fn mm_walsh_crosscheck(lab: &DobbertinField, w: &MmWitness, u: Elem, v: Elem) -> Result<WalshPoint, LabError> {
    for e in [u, v] {
        if lab.middle_field().binary_search(&e).is_err() {
            return Err(LabError::NotInSubfield(e));
        }
    }
    let lambda = walsh_point_lambda(lab, w, u, v)?;
    let fiber = pi_fiber(lab, w, u)?;
    let point = WalshPoint {
        u,
        v,
        lambda,
        fiber_size: fiber.len(),
        fiber_sum: fiber_sum(lab, w, &fiber, v),
        direct: direct_coefficient(lab, w, lambda),
    };
    check_walsh_point(lab, w, &point)?;
    Ok(point)
}

pub(crate) fn check_walsh_point(lab: &DobbertinField, w: &MmWitness, p: &WalshPoint) -> Result<(), VerifyError> {
    let at = || format!("k = {}, gamma = {:x}, u = {:x}, v = {:x}", lab.k(), w.gamma, p.u, p.v);
    ensure(p.fiber_sum == p.direct, Step::WalshFiberSum, || {
        format!("{}: fiber sum {} vs definition {}", at(), p.fiber_sum, p.direct)
    })?;
    ensure(p.fiber_sum.unsigned_abs() <= (p.fiber_size as u64) << (2 * lab.k()), Step::WalshFiberBound, || {
        format!("{}: {} with |M| = {}", at(), p.fiber_sum, p.fiber_size)
    })
}

/// Same as [`mm_walsh_crosscheck`] but takes the definition-side value
/// from elsewhere (e.g. a fast-transform row).
pub(crate) fn walsh_point_from(
    lab: &DobbertinField,
    w: &MmWitness,
    u: Elem,
    v: Elem,
    fiber: &[Elem],
    direct: impl FnOnce(Elem) -> i64,
) -> Result<WalshPoint, LabError> {
    let lambda = walsh_point_lambda(lab, w, u, v)?;
    Ok(WalshPoint {
        u,
        v,
        lambda,
        fiber_size: fiber.len(),
        fiber_sum: fiber_sum(lab, w, fiber, v),
        direct: direct(lambda),
    })
}

pub(crate) fn direct_walsh(lab: &DobbertinField, w: &MmWitness, lambda: Elem) -> i64 {
    direct_coefficient(lab, w, lambda)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct M4Report {
    pub four_fibers: usize,
    /// `(u, v)` pairs checked.
    pub instances: u64,
}

/// For every fiber of size four and every `v`, the four traces sum to 1,
/// so the coefficient is `+-2^(2k+1)`. Also checks the chain
/// `Tr^{2k}(alpha gamma) = Tr^k(gamma (alpha + alpha^(2^k))) = Tr^k(gamma^2) = 1`.
pub fn m4_sum_check(
    lab: &DobbertinField,
    w: &MmWitness,
    fibers: &BTreeMap<Elem, Vec<Elem>>,
) -> Result<M4Report, VerifyError> {
    let s = lab.spec();
    let k = lab.k();
    let first = s.subfield_trace(s.mul(w.alpha, w.gamma), 2 * k);
    let second = s.subfield_trace(s.mul(w.gamma, w.alpha ^ lab.q_pow(w.alpha, 1)), k);
    let third = s.subfield_trace(w.gamma_sq, k);
    ensure(first == 1 && second == 1 && third == 1, Step::SteppingStones, || {
        format!("k = {k}, gamma = {:x}: {first:x}, {second:x}, {third:x}", w.gamma)
    })?;

    let peak = 1i64 << (2 * k + 1);
    let mut report = M4Report { four_fibers: 0, instances: 0 };
    for (&u, fiber) in fibers.iter().filter(|(_, m)| m.len() == 4) {
        report.four_fibers += 1;
        for &v in lab.middle_field() {
            let sum = fiber.iter().fold(0, |acc, &a| acc ^ s.subfield_trace(w.offset(lab, a) ^ s.mul(v, a), 2 * k));
            let at = || format!("k = {k}, gamma = {:x}, u = {u:x}, v = {v:x}", w.gamma);
            ensure(sum == 1, Step::FourFiberTraceSum, || format!("{}: sum = {sum:x}", at()))?;
            let coeff = fiber_sum(lab, w, fiber, v);
            ensure(coeff.abs() == peak, Step::FourFiberCoefficient, || format!("{}: {coeff}", at()))?;
            report.instances += 1;
        }
    }
    Ok(report)
}
