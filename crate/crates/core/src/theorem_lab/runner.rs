//! Batch replays over many inputs, with deterministic failure reporting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::nonlinearity::{check_walsh_point, direct_walsh, walsh_point_from};
use super::{
    ensure, m4_sum_check, mm_basis, mm_decomposition_check, pi_fibers, qualifying_gammas, quartic_roots,
    theorem1_trace, DobbertinField, LabError, MmWitness, Step, VerifyError, MAX_K,
};
use crate::field::Elem;
use crate::spectra::{walsh_row, SpectraError, SweepConfig};

/// Exhaustive sweeps run up to this k; larger k is sampled.
pub const EXHAUSTIVE_K: u32 = 2;
pub const DEFAULT_SAMPLES: usize = 1000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    pub ks: Vec<u32>,
    /// Sample count for sampled sweeps; `None` means exhaustive for
    /// k <= 2 and [`DEFAULT_SAMPLES`] otherwise.
    pub samples: Option<usize>,
    /// Run the Walsh argument for every qualifying gamma, not only the least.
    pub all_gamma: bool,
    pub threads: usize,
    pub seed: u64,
    /// Required for k = 4.
    pub deep: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { ks: vec![1, 2, 3], samples: None, all_gamma: false, threads: 0, seed: 0, deep: false }
    }
}

impl VerifyConfig {
    fn sample_count(&self, k: u32) -> Option<usize> {
        match self.samples {
            Some(n) => Some(n),
            None if k <= EXHAUSTIVE_K => None,
            None => Some(DEFAULT_SAMPLES),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub k: u32,
    pub check: &'static str,
    pub gamma: Option<Elem>,
    pub instances: u64,
    pub failures: u64,
    /// The failure with the smallest instance index.
    pub first_counterexample: Option<VerifyError>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn single(k: u32, check: &'static str, gamma: Option<Elem>, instances: u64, r: Result<(), VerifyError>) -> Self {
        let first_counterexample = r.err();
        let failures = first_counterexample.is_some() as u64;
        CheckOutcome { k, check, gamma, instances, failures, first_counterexample }
    }

    fn from_results(k: u32, check: &'static str, gamma: Option<Elem>, results: Vec<Result<(), VerifyError>>) -> Self {
        let instances = results.len() as u64;
        let mut failures = 0;
        let mut first = None;
        for e in results.into_iter().filter_map(Result::err) {
            failures += 1;
            first.get_or_insert(e);
        }
        CheckOutcome { k, check, gamma, instances, failures, first_counterexample: first }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
    pub all_passed: bool,
}

fn flatten(r: Result<(), LabError>) -> Result<Result<(), VerifyError>, LabError> {
    match r {
        Ok(()) => Ok(Ok(())),
        Err(LabError::Verification(e)) => Ok(Err(e)),
        Err(e) => Err(e),
    }
}

/// Replays both arguments for every k in `cfg.ks`.
pub fn run_verification(cfg: &VerifyConfig) -> Result<VerifyReport, LabError> {
    let pool = SweepConfig::with_threads(cfg.threads).pool()?;
    let mut checks = Vec::new();
    for &k in &cfg.ks {
        if !(1..=MAX_K).contains(&k) {
            return Err(LabError::UnsupportedK(k));
        }
        if k == MAX_K && !cfg.deep {
            return Err(SpectraError::NeedsDeep(4 * k).into());
        }
        let lab = DobbertinField::new(k)?;
        pool.install(|| verify_k(&lab, cfg, &mut checks))?;
    }
    let all_passed = checks.iter().all(CheckOutcome::passed);
    Ok(VerifyReport { checks, all_passed })
}

fn differential_inputs(lab: &DobbertinField, cfg: &VerifyConfig) -> Vec<(Elem, Elem)> {
    let s = lab.spec();
    match cfg.sample_count(lab.k()) {
        None => s.elements().skip(1).flat_map(|a| s.elements().map(move |b| (a, b))).collect(),
        Some(count) => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ u64::from(lab.k()));
            let top = s.order() as Elem;
            (0..count).map(|_| (rng.random_range(1..top), rng.random_range(0..top))).collect()
        }
    }
}

fn verify_k(lab: &DobbertinField, cfg: &VerifyConfig, out: &mut Vec<CheckOutcome>) -> Result<(), LabError> {
    let k = lab.k();
    let results = differential_inputs(lab, cfg)
        .into_par_iter()
        .map(|(a, b)| flatten(theorem1_trace(lab, a, b).map(drop)))
        .collect::<Result<Vec<_>, _>>()?;
    out.push(CheckOutcome::from_results(k, "differential-bound", None, results));

    let gammas =
        if cfg.all_gamma { qualifying_gammas(lab) } else { qualifying_gammas(lab).into_iter().take(1).collect() };
    for gamma in gammas {
        let w = match mm_basis(lab, Some(gamma)) {
            Ok(w) => w,
            Err(LabError::Verification(e)) => {
                out.push(CheckOutcome::single(k, "walsh-basis", Some(gamma), 1, Err(e)));
                continue;
            }
            Err(e) => return Err(e),
        };
        out.push(CheckOutcome::single(k, "walsh-basis", Some(gamma), 1, Ok(())));
        verify_walsh(lab, &w, cfg, out)?;
    }
    Ok(())
}

fn verify_walsh(
    lab: &DobbertinField,
    w: &MmWitness,
    cfg: &VerifyConfig,
    out: &mut Vec<CheckOutcome>,
) -> Result<(), LabError> {
    let k = lab.k();
    let g = Some(w.gamma);
    let pairs = 1u64 << (4 * k);

    let r = mm_decomposition_check(lab, w).map(drop);
    out.push(CheckOutcome::single(k, "split-trace", g, pairs, r));

    let fibers = match pi_fibers(lab, w) {
        Ok(f) => f,
        Err(e) => {
            out.push(CheckOutcome::single(k, "fibers", g, 1, Err(e)));
            return Ok(());
        }
    };
    let results = lab
        .middle_field()
        .par_iter()
        .map(|&a0| flatten(quartic_roots(lab, w, a0).map(drop)))
        .collect::<Result<Vec<_>, _>>()?;
    out.push(CheckOutcome::from_results(k, "fibers", g, results));

    let row = walsh_row(lab.table(), w.component());
    let points: Vec<(Elem, Elem)> =
        lab.middle_field().iter().flat_map(|&u| lab.middle_field().iter().map(move |&v| (u, v))).collect();
    let direct_every = cfg.sample_count(k).is_none();
    let results = points
        .par_iter()
        .map(|&(u, v)| {
            let fiber = &fibers[&u];
            let p = walsh_point_from(lab, w, u, v, fiber, |lambda| i64::from(row[lambda as usize]))?;
            let agreement = ensure(
                !direct_every || direct_walsh(lab, w, p.lambda) == p.direct,
                Step::WalshTransformAgreement,
                || format!("k = {k}, gamma = {:x}, lambda = {:x}", w.gamma, p.lambda),
            );
            flatten(agreement.and_then(|()| check_walsh_point(lab, w, &p)).map_err(LabError::from))
        })
        .collect::<Result<Vec<_>, _>>()?;
    out.push(CheckOutcome::from_results(k, "walsh-fiber-sum", g, results));

    let r = m4_sum_check(lab, w, &fibers).map(drop);
    out.push(CheckOutcome::single(k, "four-fiber-peak", g, 1, r));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_k_passes_exhaustively() {
        let cfg = VerifyConfig { ks: vec![1, 2], all_gamma: true, ..Default::default() };
        let report = run_verification(&cfg).unwrap();
        assert!(report.all_passed, "{:#?}", report.checks.iter().filter(|c| !c.passed()).collect::<Vec<_>>());
        let diff: Vec<u64> =
            report.checks.iter().filter(|c| c.check == "differential-bound").map(|c| c.instances).collect();
        assert_eq!(diff, [15 * 16, 255 * 256]);
    }

    #[test]
    fn k4_needs_deep() {
        let cfg = VerifyConfig { ks: vec![4], ..Default::default() };
        assert!(matches!(run_verification(&cfg), Err(LabError::Spectra(SpectraError::NeedsDeep(16)))));
        let cfg = VerifyConfig { ks: vec![5], ..Default::default() };
        assert!(matches!(run_verification(&cfg), Err(LabError::UnsupportedK(5))));
    }

    #[test]
    fn sampled_runs_are_deterministic() {
        let base = VerifyConfig { ks: vec![3], samples: Some(50), seed: 7, ..Default::default() };
        let one = run_verification(&VerifyConfig { threads: 1, ..base.clone() }).unwrap();
        let four = run_verification(&VerifyConfig { threads: 4, ..base }).unwrap();
        assert_eq!(one, four);
        assert!(one.all_passed);
    }
}
