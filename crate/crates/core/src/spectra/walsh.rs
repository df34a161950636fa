//! Walsh/Fourier coefficients `f^(a, b) = sum_x (-1)^Tr(a x + b f(x))`.
//!
//! `Tr(b y)` is a linear form in the bits of `y`: it equals the parity of
//! `y & dual(b)` where bit i of `dual(b)` is `Tr(b x^i)`. So one row
//! `b` is a sign table over x followed by a standard fast Walsh-Hadamard
//! transform, and `f^(a, b)` sits at index `dual(a)` of the result.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{nl_from_walsh_max, FunctionTable, SpectraError, SweepConfig};
use crate::field::{Elem, FieldSpec};

/// Dense counters are used up to this degree, sorted runs above it.
const DENSE_COUNT_DEGREE: u32 = 20;

/// The map `b -> dual(b)` identifying GF(2^n) with its dual under Tr(xy).
#[derive(Clone, Debug)]
pub struct TraceDual {
    basis: Vec<Elem>,
}

impl TraceDual {
    pub fn new(spec: &FieldSpec) -> Self {
        let n = spec.degree();
        // Tr(x^e) for e = 0 .. 2n - 2
        let mut powers = Vec::with_capacity(2 * n as usize);
        let mut p = 1;
        for _ in 0..(2 * n - 1) {
            powers.push(spec.trace(p));
            p = spec.mul(p, 2);
        }
        let basis = (0..n as usize).map(|j| (0..n as usize).fold(0, |m, i| m | (powers[i + j] << i))).collect();
        TraceDual { basis }
    }

    pub fn dual(&self, b: Elem) -> Elem {
        self.basis.iter().enumerate().filter(|(j, _)| (b >> j) & 1 == 1).fold(0, |m, (_, &v)| m ^ v)
    }

    /// `dual(a)` for every `a`, indexed by `a`.
    pub fn table(&self) -> Vec<Elem> {
        let size = 1usize << self.basis.len();
        let mut out = vec![0; size];
        for a in 1..size {
            let low = a.trailing_zeros() as usize;
            out[a] = out[a & (a - 1)] ^ self.basis[low];
        }
        out
    }
}

/// In-place unnormalized Walsh-Hadamard transform; length must be a
/// power of two.
pub fn fwht(data: &mut [i32]) {
    let len = data.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        for block in data.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*x, *y);
                *x = u + v;
                *y = u - v;
            }
        }
        h *= 2;
    }
}

/// Transform of row `b`, indexed by `dual(a)`.
fn transformed_row(f: &FunctionTable, dual_b: Elem, out: &mut [i32]) {
    for (slot, &fx) in out.iter_mut().zip(f.lut()) {
        *slot = 1 - 2 * ((fx & dual_b).count_ones() & 1) as i32;
    }
    fwht(out);
}

/// `f^(a, b)` for every `a`, indexed by `a`.
pub fn walsh_row(f: &FunctionTable, b: Elem) -> Vec<i32> {
    let dual = TraceDual::new(f.spec());
    let mut w = vec![0; f.lut().len()];
    transformed_row(f, dual.dual(b), &mut w);
    dual.table().iter().map(|&m| w[m as usize]).collect()
}

/// The definition summed term by term, for cross-checking.
pub fn walsh_coefficient_direct(f: &FunctionTable, a: Elem, b: Elem) -> i64 {
    let s = f.spec();
    s.elements()
        .map(|x| {
            let e = s.trace(s.mul(a, x)) ^ s.trace(s.mul(b, f.eval(x)));
            if e == 0 {
                1
            } else {
                -1
            }
        })
        .sum()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalshSummary {
    pub walsh_max: u32,
    pub lambda: BTreeMap<i64, u64>,
    pub rows_examined: u64,
    /// `sum_a f^(a, b)^2 = 2^(2n)` held on every row.
    pub parseval_holds: bool,
    /// `f^(0, b) = 0` on every row examined.
    pub origin_zero: bool,
    pub sampled: bool,
}

struct Partial {
    walsh_max: u32,
    lambda: BTreeMap<i64, u64>,
    rows: u64,
    parseval: bool,
    origin_zero: bool,
}

impl Partial {
    fn empty() -> Self {
        Partial { walsh_max: 0, lambda: BTreeMap::new(), rows: 0, parseval: true, origin_zero: true }
    }

    fn merge(mut self, other: Partial) -> Partial {
        for (v, c) in other.lambda {
            *self.lambda.entry(v).or_default() += c;
        }
        Partial {
            walsh_max: self.walsh_max.max(other.walsh_max),
            lambda: self.lambda,
            rows: self.rows + other.rows,
            parseval: self.parseval && other.parseval,
            origin_zero: self.origin_zero && other.origin_zero,
        }
    }
}

enum Counter {
    /// Index `(v + 2^n) / 2`; every coefficient is even for n >= 1.
    Dense {
        offset: i64,
        counts: Vec<u64>,
    },
    Sparse(BTreeMap<i64, u64>),
}

impl Counter {
    fn new(n: u32) -> Self {
        if n <= DENSE_COUNT_DEGREE {
            Counter::Dense { offset: 1 << n, counts: vec![0; (1 << n) + 1] }
        } else {
            Counter::Sparse(BTreeMap::new())
        }
    }

    fn add_row(&mut self, row: &[i32]) {
        match self {
            Counter::Dense { offset, counts } => {
                for &v in row {
                    counts[((v as i64 + *offset) / 2) as usize] += 1;
                }
            }
            Counter::Sparse(map) => {
                let mut sorted = row.to_vec();
                sorted.sort_unstable();
                for run in sorted.chunk_by(|x, y| x == y) {
                    *map.entry(run[0] as i64).or_default() += run.len() as u64;
                }
            }
        }
    }

    fn into_map(self) -> BTreeMap<i64, u64> {
        match self {
            Counter::Dense { offset, counts } => counts
                .into_iter()
                .enumerate()
                .filter(|&(_, c)| c > 0)
                .map(|(i, c)| (2 * i as i64 - offset, c))
                .collect(),
            Counter::Sparse(map) => map,
        }
    }
}

/// Walks the rows `b` of the spectrum, aggregating the value multiset,
/// the maximum magnitude and the Parseval / balancedness checks.
pub fn walsh_spectrum(f: &FunctionTable, cfg: &SweepConfig) -> Result<WalshSummary, SpectraError> {
    let spec = f.spec();
    let n = spec.degree();
    let rows = cfg.rows(spec)?;
    let dual = TraceDual::new(spec);
    let pool = cfg.pool()?;
    let chunk = (rows.len() / (pool.current_num_threads().max(1) * 16)).clamp(1, 256);
    let energy = 1u64 << (2 * n);

    let total = pool.install(|| {
        rows.par_chunks(chunk)
            .map(|batch| {
                let mut w = vec![0i32; f.lut().len()];
                let mut counter = Counter::new(n);
                let mut part = Partial::empty();
                for &b in batch {
                    transformed_row(f, dual.dual(b), &mut w);
                    counter.add_row(&w);
                    let peak = w.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
                    let sum_sq: u64 = w.iter().map(|&v| (v as i64 * v as i64) as u64).sum();
                    part.walsh_max = part.walsh_max.max(peak);
                    part.parseval &= sum_sq == energy;
                    part.origin_zero &= w[0] == 0;
                    part.rows += 1;
                }
                part.lambda = counter.into_map();
                part
            })
            .reduce(Partial::empty, Partial::merge)
    });

    Ok(WalshSummary {
        walsh_max: total.walsh_max,
        lambda: total.lambda,
        rows_examined: total.rows,
        parseval_holds: total.parseval,
        origin_zero: total.origin_zero,
        sampled: rows.len() + 1 < f.lut().len(),
    })
}

/// Streams rows `b` (increasing) as field-indexed coefficient vectors.
pub fn for_each_walsh_row<E>(
    f: &FunctionTable,
    cfg: &SweepConfig,
    mut visit: impl FnMut(Elem, &[i32]) -> Result<(), E>,
) -> Result<Result<(), E>, SpectraError> {
    let rows = cfg.rows(f.spec())?;
    let dual = TraceDual::new(f.spec());
    let dual_table = dual.table();
    let pool = cfg.pool()?;
    let batch = pool.current_num_threads().max(1) * 4;
    for group in rows.chunks(batch) {
        let computed: Vec<Vec<i32>> = pool.install(|| {
            group
                .par_iter()
                .map(|&b| {
                    let mut w = vec![0; f.lut().len()];
                    transformed_row(f, dual.dual(b), &mut w);
                    dual_table.iter().map(|&m| w[m as usize]).collect()
                })
                .collect()
        });
        for (&b, row) in group.iter().zip(&computed) {
            if let Err(e) = visit(b, row) {
                return Ok(Err(e));
            }
        }
    }
    Ok(Ok(()))
}

/// Exact nonlinearity `2^(n-1) - max |f^| / 2`.
pub fn nonlinearity(f: &FunctionTable, cfg: &SweepConfig) -> Result<u64, SpectraError> {
    let w = walsh_spectrum(f, cfg)?;
    Ok(nl_from_walsh_max(f.spec().degree(), w.walsh_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::inverse_map;
    use crate::spectra::build_lut;

    /// Definition with the trace computed as a Frobenius sum.
    fn oracle(f: &FunctionTable, a: Elem, b: Elem) -> i64 {
        let s = f.spec();
        let tr = |v| s.subfield_trace(v, s.degree());
        s.elements().map(|x| if tr(s.mul(a, x) ^ s.mul(b, f.eval(x))) == 0 { 1 } else { -1 }).sum()
    }

    #[test]
    fn fwht_matches_naive_sum() {
        let input = [3, -1, 4, 1, -5, 9, 2, -6, 5, 3, -5, 8, 9, -7, 9, 3];
        let mut v = input;
        fwht(&mut v);
        for (u, &got) in v.iter().enumerate() {
            let naive: i32 =
                input.iter().enumerate().map(|(x, &val)| if (u & x).count_ones() % 2 == 0 { val } else { -val }).sum();
            assert_eq!(got, naive);
        }
    }

    #[test]
    fn dual_matches_trace() {
        let s = FieldSpec::with_default_poly(7).unwrap();
        let dual = TraceDual::new(&s);
        let table = dual.table();
        for b in s.elements() {
            assert_eq!(table[b as usize], dual.dual(b));
            for y in s.elements().step_by(5) {
                assert_eq!((y & dual.dual(b)).count_ones() & 1, s.trace(s.mul(b, y)));
            }
        }
    }

    #[test]
    fn identity_rows() {
        let s = FieldSpec::with_default_poly(5).unwrap();
        let id = build_lut(&s, 1);
        for b in 1..32 {
            let row = walsh_row(&id, b);
            for a in s.elements() {
                assert_eq!(row[a as usize], if a == b { 32 } else { 0 });
            }
        }
    }

    #[test]
    fn rows_match_oracle() {
        let s = FieldSpec::new(4, Some(0x13)).unwrap();
        for d in [3u64, 7, 14] {
            let f = build_lut(&s, d);
            for b in 1..16 {
                let row = walsh_row(&f, b);
                for a in s.elements() {
                    assert_eq!(row[a as usize] as i64, oracle(&f, a, b));
                    assert_eq!(walsh_coefficient_direct(&f, a, b), oracle(&f, a, b));
                }
            }
        }
    }

    #[test]
    fn known_spectra() {
        let cfg = SweepConfig::default();
        let s5 = FieldSpec::with_default_poly(5).unwrap();
        let x3 = walsh_spectrum(&build_lut(&s5, 3), &cfg).unwrap();
        assert_eq!(x3.lambda.keys().copied().collect::<Vec<_>>(), vec![-8, 0, 8]);

        let f16 = FieldSpec::new(4, Some(0x13)).unwrap();
        assert_eq!(walsh_spectrum(&build_lut(&f16, 7), &cfg).unwrap().walsh_max, 8);

        let s8 = FieldSpec::with_default_poly(8).unwrap();
        assert_eq!(nonlinearity(&inverse_map(&s8), &cfg).unwrap(), 112);
        assert_eq!(nonlinearity(&build_lut(&s8, 21), &cfg).unwrap(), 112);
    }

    #[test]
    fn affine_maps_have_zero_nonlinearity() {
        let s = FieldSpec::with_default_poly(6).unwrap();
        for d in [1u64, 2, 8, 32] {
            let lin = build_lut(&s, d);
            let affine = FunctionTable::new(s, lin.lut().iter().map(|&v| v ^ 0x15).collect()).unwrap();
            assert_eq!(nonlinearity(&affine, &SweepConfig::default()).unwrap(), 0);
        }
    }

    #[test]
    fn sparse_and_dense_counters_agree() {
        let row = [4, -4, 0, 0, 8, 0, -4, 4];
        let mut dense = Counter::Dense { offset: 8, counts: vec![0; 9] };
        let mut sparse = Counter::Sparse(BTreeMap::new());
        dense.add_row(&row);
        sparse.add_row(&row);
        assert_eq!(dense.into_map(), sparse.into_map());
    }

    #[test]
    fn streamed_rows_match_walsh_row() {
        let s = FieldSpec::with_default_poly(6).unwrap();
        let f = build_lut(&s, 5);
        let mut count = 0;
        for_each_walsh_row(&f, &SweepConfig::with_threads(2), |b, row| {
            assert_eq!(row, walsh_row(&f, b).as_slice());
            count += 1;
            Ok::<(), ()>(())
        })
        .unwrap()
        .unwrap();
        assert_eq!(count, 63);
    }
}
