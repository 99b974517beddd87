//! Monte Carlo campaigns: SNR sweeps over protocol variants.
//!
//! A campaign is a grid of independent cells, one per `(variant, SNR)` pair.
//! Each cell runs a fresh network (initialization phase, then slots until the
//! packet budget is spent) on its own seed subtree. Cell seeds depend on the
//! SNR index only, so every variant at a given SNR sees the same channel,
//! bit and noise streams slot for slot.

mod config;
mod csv_io;
mod pep;

pub use config::{CsiSetting, ExperimentConfig};
pub use csv_io::{
    emit_csv, emit_pep_csv, format_sig6, read_ber_csv, read_pep_csv, write_ber_csv, write_ber_plot_data,
    write_pep_csv, write_pep_plot_data,
};
pub use pep::{pep_samples, run_pep_sweep, PepRecord, PepSweepConfig};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exec::Execution;
use crate::protocol::{Network, NetworkParams};
use crate::rng::StreamSeed;
use crate::selection::{Mode, Variant};

const CAMPAIGN_TAG: u64 = 0xCE11;

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // Rounding can leave the bounds a hair inside p at k = 0 or k = n.
    ((centre - half).clamp(0.0, p), (centre + half).clamp(p, 1.0))
}

/// BER of one campaign cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerRecord {
    pub variant: Variant,
    pub snr_db: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub slots: u64,
    pub n_direct: u64,
    pub n_rx: u64,
    pub n_tx: u64,
}

impl BerRecord {
    pub fn from_counts(variant: Variant, snr_db: f64, bits: u64, errors: u64, slots: u64, modes: [u64; 3]) -> Self {
        let ber = if bits == 0 { 0.0 } else { errors as f64 / bits as f64 };
        let (ci_lo, ci_hi) = wilson_interval(errors, bits, Z_95);
        BerRecord {
            variant,
            snr_db,
            bits,
            errors,
            ber,
            ci_lo,
            ci_hi,
            slots,
            n_direct: modes[0],
            n_rx: modes[1],
            n_tx: modes[2],
        }
    }

    /// Whether the two 95% intervals intersect.
    pub fn overlaps(&self, other: &BerRecord) -> bool {
        self.ci_lo <= other.ci_hi && other.ci_lo <= self.ci_hi
    }
}

/// Bookkeeping of one cell that does not enter the BER.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellDiagnostics {
    pub variant: Variant,
    pub snr_index: usize,
    pub init_slots: u64,
    pub packets_created: u64,
    pub packets_delivered: u64,
    /// Packets still in relay buffers when the budget ran out; dropped from
    /// the statistics.
    pub packets_undelivered: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Campaign {
    pub records: Vec<BerRecord>,
    pub diagnostics: Vec<CellDiagnostics>,
}

impl Campaign {
    /// Records of one variant, in SNR-grid order.
    pub fn curve(&self, variant: Variant) -> Vec<&BerRecord> {
        self.records.iter().filter(|r| r.variant == variant).collect()
    }

    pub fn point(&self, variant: Variant, snr_db: f64) -> Option<&BerRecord> {
        self.records
            .iter()
            .find(|r| r.variant == variant && (r.snr_db - snr_db).abs() < 1e-9)
    }
}

/// Runs one `(variant, SNR)` cell.
pub fn run_cell(config: &ExperimentConfig, variant: Variant, snr_index: usize) -> Result<(BerRecord, CellDiagnostics)> {
    let snr_db = config.snr_db[snr_index];
    let params = NetworkParams {
        relays: config.n,
        antennas: config.m,
        buffer_size: config.j,
        constellation: config.constellation,
        symbols_per_packet: config.symbols_per_packet,
        csi: config.csi_mode()?,
        variant,
        es: config.es(snr_db),
        n0: config.n0,
    };
    let seed = StreamSeed::new(config.seed).derive(CAMPAIGN_TAG).derive(snr_index as u64);
    let mut net = Network::new(params, seed)?;
    let init_slots = net.initialize_buffers()?;
    let created_at_start = net.ledger().created;

    let (mut bits, mut errors) = (0u64, 0u64);
    let mut modes = [0u64; 3];
    while net.ledger().created - created_at_start < config.packets {
        let outcome = net.run_slot()?;
        bits += outcome.bits_delivered;
        errors += outcome.bit_errors;
        modes[match outcome.decision.mode {
            Mode::Direct => 0,
            Mode::Reception(_) => 1,
            Mode::Transmission(_) => 2,
        }] += 1;
    }
    let ledger = net.ledger();
    let record = BerRecord::from_counts(variant, snr_db, bits, errors, net.slots_run(), modes);
    let diagnostics = CellDiagnostics {
        variant,
        snr_index,
        init_slots,
        packets_created: ledger.created,
        packets_delivered: ledger.delivered,
        packets_undelivered: net.buffered(),
    };
    Ok((record, diagnostics))
}

/// Runs every `(variant, SNR)` cell of `config`, variant-major.
pub fn run_campaign(config: &ExperimentConfig, exec: Execution) -> Result<Campaign> {
    config.validate()?;
    let cells: Vec<(Variant, usize)> = config
        .variants
        .iter()
        .flat_map(|&v| (0..config.snr_db.len()).map(move |i| (v, i)))
        .collect();
    let results = exec.map(&cells, |&(variant, i)| {
        run_cell(config, variant, i)
            .map_err(|e| e.in_cell(format!("{variant} at {} dB", config.snr_db[i])))
    });
    let mut records = Vec::with_capacity(cells.len());
    let mut diagnostics = Vec::with_capacity(cells.len());
    for result in results {
        let (r, d) = result?;
        records.push(r);
        diagnostics.push(d);
    }
    Ok(Campaign { records, diagnostics })
}
