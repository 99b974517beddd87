//! Worst-case PEP sweeps comparing MMD and QN link ranking.
//!
//! Slot `k` of SNR index `s` draws its channels from the same seed for every
//! relay count, and links are keyed by relay index, so the `N = 3` links of a
//! slot are a subset of its `N = 10` links.

use serde::{Deserialize, Serialize};

use super::{CsiSetting, Z_95};
use crate::analysis::{mmd_vs_qn_pep, PepComparison};
use crate::channel::{draw_slot_channels, CsiMode};
use crate::constellation::{build_constellation, ConstellationKind};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rng::StreamSeed;
use crate::selection::{Criterion, SelectionKernel};

const PEP_TAG: u64 = 0x9E9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PepSweepConfig {
    pub n_values: Vec<usize>,
    pub m: usize,
    pub constellation: ConstellationKind,
    pub snr_db: Vec<f64>,
    /// Independent channel draws per `(N, SNR)` point.
    pub slots: u64,
    #[serde(default)]
    pub csi: CsiSetting,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_n0")]
    pub n0: f64,
}

fn default_n0() -> f64 {
    1.0
}

impl PepSweepConfig {
    pub fn csi_mode(&self) -> Result<CsiMode> {
        match self.csi {
            CsiSetting::Perfect => Ok(CsiMode::Perfect),
            CsiSetting::Imperfect => {
                let beta = self.beta.ok_or_else(|| Error::config("imperfect CSI requires beta"))?;
                let alpha = self.alpha.ok_or_else(|| Error::config("imperfect CSI requires alpha"))?;
                let mode = CsiMode::Imperfect { beta, alpha };
                mode.validate()?;
                Ok(mode)
            }
        }
    }

    pub fn es(&self, snr_db: f64) -> f64 {
        self.n0 * 10f64.powf(snr_db / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return Err(Error::config("relay counts must be non-empty and at least 1"));
        }
        if self.m == 0 {
            return Err(Error::config("m must be at least 1"));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::config("snr_db grid must be non-empty and finite"));
        }
        if self.slots < 2 {
            return Err(Error::config("at least two slots are needed for an interval"));
        }
        if !(self.n0.is_finite() && self.n0 > 0.0) {
            return Err(Error::config("n0 must be positive"));
        }
        self.csi_mode().map(|_| ())
    }
}

/// Mean worst-case PEP of one `(criterion, N, SNR)` point with a normal
/// 95% interval clamped to `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PepRecord {
    pub criterion: Criterion,
    pub snr_db: f64,
    pub n: usize,
    pub mean_pep: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub slots: u64,
}

impl PepRecord {
    pub fn from_samples(criterion: Criterion, snr_db: f64, n: usize, samples: &[f64]) -> Self {
        let k = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / k;
        let var = samples.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
        let half = Z_95 * (var / k).sqrt();
        PepRecord {
            criterion,
            snr_db,
            n,
            mean_pep: mean,
            ci_lo: (mean - half).max(0.0),
            ci_hi: (mean + half).min(1.0),
            slots: samples.len() as u64,
        }
    }

    pub fn overlaps(&self, other: &PepRecord) -> bool {
        self.ci_lo <= other.ci_hi && other.ci_lo <= self.ci_hi
    }
}

/// Per-slot MMD/QN comparison for `n` relays at `snr_db[snr_index]`.
pub fn pep_samples(cfg: &PepSweepConfig, n: usize, snr_index: usize, exec: Execution) -> Result<Vec<PepComparison>> {
    cfg.validate()?;
    let snr_db = *cfg
        .snr_db
        .get(snr_index)
        .ok_or_else(|| Error::usage(format!("SNR index {snr_index} out of range")))?;
    let es = cfg.es(snr_db);
    let csi = cfg.csi_mode()?;
    let kernel = SelectionKernel::new(&build_constellation(cfg.constellation), cfg.m, es);
    let cell = StreamSeed::new(cfg.seed).derive(PEP_TAG).derive(snr_index as u64);
    exec.map_range(cfg.slots as usize, |slot| {
        let channels = draw_slot_channels(cell.derive(slot as u64), n, cfg.m, csi, es)?;
        Ok(mmd_vs_qn_pep(&channels, &kernel, cfg.n0))
    })
    .into_iter()
    .collect()
}

/// Every `(criterion, N, SNR)` point, ordered criterion, then N, then SNR.
pub fn run_pep_sweep(cfg: &PepSweepConfig, exec: Execution) -> Result<Vec<PepRecord>> {
    cfg.validate()?;
    let mut mmd = Vec::new();
    let mut qn = Vec::new();
    for &n in &cfg.n_values {
        for (s, &snr_db) in cfg.snr_db.iter().enumerate() {
            let samples = pep_samples(cfg, n, s, exec)?;
            let pick = |f: fn(&PepComparison) -> f64| samples.iter().map(f).collect::<Vec<_>>();
            mmd.push(PepRecord::from_samples(Criterion::Mmd, snr_db, n, &pick(|c| c.pep_mmd)));
            qn.push(PepRecord::from_samples(Criterion::Qn, snr_db, n, &pick(|c| c.pep_qn)));
        }
    }
    mmd.extend(qn);
    Ok(mmd)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PepSweepConfig {
        PepSweepConfig {
            n_values: vec![3, 5],
            m: 2,
            constellation: ConstellationKind::Bpsk,
            snr_db: vec![0.0, 12.0],
            slots: 200,
            csi: CsiSetting::Perfect,
            beta: None,
            alpha: None,
            seed: 7,
            n0: 1.0,
        }
    }

    #[test]
    fn record_interval() {
        let r = PepRecord::from_samples(Criterion::Mmd, 0.0, 3, &[0.1, 0.3]);
        assert!((r.mean_pep - 0.2).abs() < 1e-15);
        let half = Z_95 * (0.02f64 / 2.0).sqrt();
        assert!((r.ci_hi - (0.2 + half)).abs() < 1e-12);
        assert!((r.ci_lo - (0.2 - half)).abs() < 1e-12);
        let r = PepRecord::from_samples(Criterion::Qn, 0.0, 3, &[0.0, 0.0, 0.9]);
        assert_eq!(r.ci_lo, 0.0);
    }

    #[test]
    fn sweep_order_and_shape() {
        let records = run_pep_sweep(&cfg(), Execution::Sequential).unwrap();
        assert_eq!(records.len(), 8);
        let keys: Vec<_> = records.iter().map(|r| (r.criterion, r.n, r.snr_db)).collect();
        assert_eq!(keys[0], (Criterion::Mmd, 3, 0.0));
        assert_eq!(keys[1], (Criterion::Mmd, 3, 12.0));
        assert_eq!(keys[2], (Criterion::Mmd, 5, 0.0));
        assert_eq!(keys[4], (Criterion::Qn, 3, 0.0));
        for pair in records.chunks(2).take(2) {
            assert!(pair[1].mean_pep < pair[0].mean_pep);
        }
    }

    #[test]
    fn mmd_never_worse_per_slot() {
        for c in pep_samples(&cfg(), 5, 1, Execution::Sequential).unwrap() {
            assert!(c.d_prime_mmd >= c.d_prime_qn);
            assert!(c.pep_mmd <= c.pep_qn);
        }
    }

    #[test]
    fn strategy_independent() {
        let a = pep_samples(&cfg(), 3, 0, Execution::Sequential).unwrap();
        let b = pep_samples(&cfg(), 3, 0, Execution::with_threads(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_sweep() {
        let mut c = cfg();
        c.n_values = vec![];
        assert!(run_pep_sweep(&c, Execution::Sequential).is_err());
        let mut c = cfg();
        c.csi = CsiSetting::Imperfect;
        assert!(run_pep_sweep(&c, Execution::Sequential).is_err());
    }
}
