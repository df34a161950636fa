//! Linearized polynomials `L(x) = sum_j c_j x^(2^(e_j))` and their affine
//! solution spaces.
//!
//! `L` is GF(2)-linear on GF(2^n), so `L(x) = rhs` is an affine system over
//! GF(2) in the polynomial-basis coordinates of `x`. We build the n x n
//! matrix column by column from `L(x^j)` and eliminate.

use crate::field::{Elem, FieldSpec};

/// One monomial `coeff * x^(2^frobenius)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LinearizedTerm {
    pub coeff: Elem,
    pub frobenius: u32,
}

impl LinearizedTerm {
    pub fn new(coeff: Elem, frobenius: u32) -> Self {
        LinearizedTerm { coeff, frobenius }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearizedPoly {
    terms: Vec<LinearizedTerm>,
}

impl LinearizedPoly {
    pub fn new(terms: impl IntoIterator<Item = LinearizedTerm>) -> Self {
        LinearizedPoly { terms: terms.into_iter().collect() }
    }

    /// From `(coefficient, frobenius power)` pairs.
    pub fn from_pairs(pairs: &[(Elem, u32)]) -> Self {
        Self::new(pairs.iter().map(|&(c, e)| LinearizedTerm::new(c, e)))
    }

    pub fn terms(&self) -> &[LinearizedTerm] {
        &self.terms
    }

    pub fn eval(&self, s: &FieldSpec, x: Elem) -> Elem {
        self.terms.iter().fold(0, |acc, t| acc ^ s.mul(t.coeff, s.frobenius(x, t.frobenius)))
    }

    /// Solution set of `L(x) = rhs` as an affine subspace.
    pub fn solve(&self, s: &FieldSpec, rhs: Elem) -> Option<AffineSpace> {
        let n = s.degree() as usize;
        let columns: Vec<Elem> = (0..n).map(|j| self.eval(s, 1 << j)).collect();
        solve_gf2(&columns, rhs, n)
    }
}

/// `offset + span(basis)`, with the basis in reduced echelon form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSpace {
    pub offset: Elem,
    pub basis: Vec<Elem>,
}

impl AffineSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn len(&self) -> usize {
        1 << self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Every member, sorted by encoding.
    pub fn elements(&self) -> Vec<Elem> {
        let mut out = Vec::with_capacity(self.len());
        out.push(self.offset);
        for &v in &self.basis {
            let extra: Vec<Elem> = out.iter().map(|&e| e ^ v).collect();
            out.extend(extra);
        }
        out.sort_unstable();
        out
    }

    /// The least member by encoding.
    pub fn min(&self) -> Elem {
        // Rebuild the span with distinct leading bits, then clear leading
        // bits of the offset from the top down.
        let mut echelon: Vec<Elem> = Vec::new();
        for &v in &self.basis {
            let x = echelon.iter().fold(v, |x, &e| x.min(x ^ e));
            if x != 0 {
                echelon.push(x);
                echelon.sort_unstable_by(|a, b| b.cmp(a));
            }
        }
        echelon.iter().fold(self.offset, |m, &e| m.min(m ^ e))
    }
}

/// Solves `sum_j x_j columns[j] = rhs` over GF(2) for an n-bit unknown.
fn solve_gf2(columns: &[Elem], rhs: Elem, n: usize) -> Option<AffineSpace> {
    // Row i: bit j is bit i of columns[j]; bit n carries the right-hand side.
    let mut rows: Vec<u64> = (0..n)
        .map(|i| {
            let coeffs =
                columns.iter().enumerate().filter(|(_, &c)| (c >> i) & 1 == 1).fold(0u64, |r, (j, _)| r | (1 << j));
            coeffs | (((rhs as u64 >> i) & 1) << n)
        })
        .collect();

    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, column)
    let mut next_row = 0;
    for col in 0..n {
        let Some(found) = (next_row..n).find(|&r| (rows[r] >> col) & 1 == 1) else {
            continue;
        };
        rows.swap(next_row, found);
        let pivot_row = rows[next_row];
        for (r, row) in rows.iter_mut().enumerate() {
            if r != next_row && (*row >> col) & 1 == 1 {
                *row ^= pivot_row;
            }
        }
        pivots.push((next_row, col));
        next_row += 1;
    }

    let coeff_mask = (1u64 << n) - 1;
    if rows[next_row..].iter().any(|&r| r & coeff_mask == 0 && (r >> n) & 1 == 1) {
        return None;
    }

    let mut offset: Elem = 0;
    for &(r, c) in &pivots {
        if (rows[r] >> n) & 1 == 1 {
            offset |= 1 << c;
        }
    }

    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let basis = (0..n)
        .filter(|c| !pivot_cols.contains(c))
        .map(|free| {
            let mut v: Elem = 1 << free;
            for &(r, c) in &pivots {
                if (rows[r] >> free) & 1 == 1 {
                    v |= 1 << c;
                }
            }
            v
        })
        .collect();

    Some(AffineSpace { offset, basis })
}

/// The exact, sorted solution set of `sum_j c_j x^(2^(e_j)) = rhs`.
pub fn solve_linearized(s: &FieldSpec, coeffs: &[(Elem, u32)], rhs: Elem) -> Vec<Elem> {
    LinearizedPoly::from_pairs(coeffs).solve(s, rhs).map(|space| space.elements()).unwrap_or_default()
}

/// Roots of `x^2 + x = rhs`; empty exactly when Tr(rhs) = 1.
pub fn solve_artin_schreier(s: &FieldSpec, rhs: Elem) -> Vec<Elem> {
    solve_linearized(s, &[(1, 1), (1, 0)], rhs)
}

/// The subfield GF(2^m) inside `s`, sorted, as the kernel of `x^(2^m) + x`.
pub fn subfield_elements(s: &FieldSpec, m: u32) -> Vec<Elem> {
    solve_linearized(s, &[(1, m), (1, 0)], 0)
}
