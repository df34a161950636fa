use rayon::prelude::*;

use super::{FunctionTable, SpectraError, SweepConfig, TABLE_DEGREE_LIMIT};
use crate::field::Elem;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DdtSummary {
    pub delta: u32,
    /// Least `a` whose row attains `delta`.
    pub argmax_a: Elem,
    pub rows_examined: u64,
    /// Every row examined had even counts summing to 2^n.
    pub rows_well_formed: bool,
    pub sampled: bool,
}

/// Counts of `f(x + a) + f(x) = b`, indexed by `b`.
pub fn ddt_row(f: &FunctionTable, a: Elem) -> Vec<u32> {
    let mut counts = vec![0; f.lut().len()];
    fill_row(f, a, &mut counts);
    counts
}

fn fill_row(f: &FunctionTable, a: Elem, counts: &mut [u32]) {
    counts.iter_mut().for_each(|c| *c = 0);
    let lut = f.lut();
    for (x, &fx) in lut.iter().enumerate() {
        counts[(fx ^ lut[x ^ a as usize]) as usize] += 1;
    }
}

fn row_well_formed(counts: &[u32]) -> bool {
    counts.iter().all(|c| c % 2 == 0) && counts.iter().map(|&c| c as u64).sum::<u64>() == counts.len() as u64
}

#[derive(Clone, Copy)]
struct RowStats {
    delta: u32,
    argmax_a: Elem,
    rows: u64,
    well_formed: bool,
}

impl RowStats {
    fn empty() -> Self {
        RowStats { delta: 0, argmax_a: 0, rows: 0, well_formed: true }
    }

    fn merge(self, other: RowStats) -> RowStats {
        let (delta, argmax_a) =
            if (other.delta, std::cmp::Reverse(other.argmax_a)) > (self.delta, std::cmp::Reverse(self.argmax_a)) {
                (other.delta, other.argmax_a)
            } else {
                (self.delta, self.argmax_a)
            };
        RowStats { delta, argmax_a, rows: self.rows + other.rows, well_formed: self.well_formed && other.well_formed }
    }
}

fn chunk_len(rows: usize, threads: usize) -> usize {
    (rows / (threads.max(1) * 16)).clamp(1, 256)
}

/// Differential uniformity: the largest DDT entry over `a != 0`.
pub fn differential_uniformity(f: &FunctionTable, cfg: &SweepConfig) -> Result<DdtSummary, SpectraError> {
    let rows = cfg.rows(f.spec())?;
    let pool = cfg.pool()?;
    let chunk = chunk_len(rows.len(), pool.current_num_threads());
    let stats = pool.install(|| {
        rows.par_chunks(chunk)
            .map(|batch| {
                let mut counts = vec![0u32; f.lut().len()];
                batch.iter().fold(RowStats::empty(), |acc, &a| {
                    fill_row(f, a, &mut counts);
                    let delta = counts.iter().copied().max().unwrap_or(0);
                    acc.merge(RowStats { delta, argmax_a: a, rows: 1, well_formed: row_well_formed(&counts) })
                })
            })
            .reduce(RowStats::empty, RowStats::merge)
    });
    Ok(DdtSummary {
        delta: stats.delta,
        argmax_a: stats.argmax_a,
        rows_examined: stats.rows,
        rows_well_formed: stats.well_formed,
        sampled: rows.len() + 1 < f.lut().len(),
    })
}

/// Streams DDT rows in increasing `a` (sampled rows only, if sampling).
///
/// Rows are computed in parallel batches and handed to `visit` in order.
pub fn for_each_ddt_row<E>(
    f: &FunctionTable,
    cfg: &SweepConfig,
    mut visit: impl FnMut(Elem, &[u32]) -> Result<(), E>,
) -> Result<Result<(), E>, SpectraError> {
    let rows = cfg.rows(f.spec())?;
    let pool = cfg.pool()?;
    let batch = pool.current_num_threads().max(1) * 8;
    for group in rows.chunks(batch) {
        let computed: Vec<Vec<u32>> = pool.install(|| group.par_iter().map(|&a| ddt_row(f, a)).collect());
        for (&a, row) in group.iter().zip(&computed) {
            if let Err(e) = visit(a, row) {
                return Ok(Err(e));
            }
        }
    }
    Ok(Ok(()))
}

/// The full table, rows `a = 1 .. 2^n - 1`; only for n <= 12.
pub fn ddt_table(f: &FunctionTable) -> Result<Vec<Vec<u32>>, SpectraError> {
    let n = f.spec().degree();
    if n > TABLE_DEGREE_LIMIT {
        return Err(SpectraError::TableTooLarge(n));
    }
    Ok((1..f.lut().len() as Elem).map(|a| ddt_row(f, a)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::spectra::build_lut;

    /// `|{x : f(x + a) + f(x) = b}|` straight from the definition.
    fn count_pair(f: &FunctionTable, a: Elem, b: Elem) -> u32 {
        f.spec().elements().filter(|&x| f.eval(x ^ a) ^ f.eval(x) == b).count() as u32
    }

    fn max_by_definition(f: &FunctionTable) -> u32 {
        let s = f.spec();
        s.elements()
            .skip(1)
            .flat_map(|a| s.elements().map(move |b| (a, b)))
            .map(|(a, b)| count_pair(f, a, b))
            .max()
            .unwrap()
    }

    #[test]
    fn linear_map_has_full_uniformity() {
        let s = FieldSpec::with_default_poly(6).unwrap();
        for d in [1u64, 2, 4, 8] {
            let f = build_lut(&s, d);
            assert_eq!(differential_uniformity(&f, &SweepConfig::default()).unwrap().delta, 64);
        }
    }

    #[test]
    fn known_uniformities_by_definition() {
        let f16 = FieldSpec::new(4, Some(0x13)).unwrap();
        let x7 = build_lut(&f16, 7);
        assert_eq!(max_by_definition(&x7), 4);
        assert_eq!(differential_uniformity(&x7, &SweepConfig::default()).unwrap().delta, 4);

        let f32 = FieldSpec::with_default_poly(5).unwrap();
        let x3 = build_lut(&f32, 3);
        assert_eq!(max_by_definition(&x3), 2);
        assert_eq!(differential_uniformity(&x3, &SweepConfig::default()).unwrap().delta, 2);
    }

    #[test]
    fn rows_match_definition() {
        let s = FieldSpec::with_default_poly(6).unwrap();
        let f = build_lut(&s, 13);
        let table = ddt_table(&f).unwrap();
        for (i, row) in table.iter().enumerate() {
            let a = i as Elem + 1;
            assert!(row_well_formed(row));
            for b in s.elements() {
                assert_eq!(row[b as usize], count_pair(&f, a, b));
            }
        }
    }

    #[test]
    fn streaming_visits_rows_in_order() {
        let s = FieldSpec::with_default_poly(5).unwrap();
        let f = build_lut(&s, 7);
        let mut seen = Vec::new();
        for_each_ddt_row(&f, &SweepConfig::with_threads(3), |a, row| {
            assert_eq!(row, ddt_row(&f, a).as_slice());
            seen.push(a);
            Ok::<(), ()>(())
        })
        .unwrap()
        .unwrap();
        assert_eq!(seen, (1..32).collect::<Vec<_>>());
    }

    #[test]
    fn argmax_is_thread_independent() {
        let s = FieldSpec::with_default_poly(8).unwrap();
        let f = build_lut(&s, 21);
        let one = differential_uniformity(&f, &SweepConfig::with_threads(1)).unwrap();
        let four = differential_uniformity(&f, &SweepConfig::with_threads(4)).unwrap();
        assert_eq!(one, four);
        assert_eq!(one.argmax_a, 1);
    }
}
