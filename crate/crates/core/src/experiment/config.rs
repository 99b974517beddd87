//! Campaign configuration files.
//!
//! Flat TOML, one key per field:
//!
//! ```toml
//! n = 10
//! m = 2
//! j = 4
//! constellation = "bpsk"
//! snr_db = [0, 2, 4, 6, 8, 10, 12]
//! packets = 20000
//! symbols_per_packet = 100
//! csi = "imperfect"      # or "perfect"
//! beta = 1.0
//! alpha = 0.5
//! variants = ["mmd-switched", "mmd-maxlink", "qn-maxlink", "mimo-direct"]
//! seed = 1
//! n0 = 1.0
//! ```
//!
//! Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::CsiMode;
use crate::constellation::ConstellationKind;
use crate::error::{Error, Result};
use crate::selection::Variant;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsiSetting {
    #[default]
    Perfect,
    Imperfect,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Relay count.
    pub n: usize,
    /// Antennas per node.
    pub m: usize,
    /// Relay buffer size in packets.
    pub j: usize,
    pub constellation: ConstellationKind,
    /// Transmit SNR `E/N_0` grid in dB.
    pub snr_db: Vec<f64>,
    /// Source packets per cell, excluding the initialization phase.
    pub packets: u64,
    #[serde(default = "default_symbols_per_packet")]
    pub symbols_per_packet: usize,
    #[serde(default)]
    pub csi: CsiSetting,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub variants: Vec<Variant>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_n0")]
    pub n0: f64,
}

fn default_symbols_per_packet() -> usize {
    100
}

fn default_n0() -> f64 {
    1.0
}

impl ExperimentConfig {
    /// Full-length runs: N = 10, M = 2, J = 4, BPSK, 0–12 dB, 20000 packets
    /// of 100 symbols, all four variants.
    pub fn full_preset() -> Self {
        ExperimentConfig {
            n: 10,
            m: 2,
            j: 4,
            constellation: ConstellationKind::Bpsk,
            snr_db: (0..=6).map(|i| 2.0 * i as f64).collect(),
            packets: 20_000,
            symbols_per_packet: 100,
            csi: CsiSetting::Perfect,
            beta: None,
            alpha: None,
            variants: Variant::ALL.to_vec(),
            seed: 1,
            n0: 1.0,
        }
    }

    /// Same as [`ExperimentConfig::full_preset`] with a 2000-packet budget.
    pub fn desk_preset() -> Self {
        ExperimentConfig {
            packets: 2_000,
            ..Self::full_preset()
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

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

    /// `E_s = N_0 · 10^(SNR/10)`.
    pub fn es(&self, snr_db: f64) -> f64 {
        self.n0 * 10f64.powf(snr_db / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("n must be at least 1"));
        }
        if self.m == 0 {
            return Err(Error::config("m must be at least 1"));
        }
        if self.j < 2 * self.m {
            return Err(Error::config(format!("j = {} must be at least 2m = {}", self.j, 2 * self.m)));
        }
        if self.snr_db.is_empty() {
            return Err(Error::config("snr_db grid is empty"));
        }
        if let Some(bad) = self.snr_db.iter().find(|s| !s.is_finite()) {
            return Err(Error::config(format!("non-finite SNR {bad}")));
        }
        if self.packets == 0 {
            return Err(Error::config("packets must be at least 1"));
        }
        if self.symbols_per_packet == 0 {
            return Err(Error::config("symbols_per_packet must be at least 1"));
        }
        if self.variants.is_empty() {
            return Err(Error::config("no variants selected"));
        }
        if !(self.n0.is_finite() && self.n0 > 0.0) {
            return Err(Error::config(format!("n0 must be positive, got {}", self.n0)));
        }
        self.csi_mode().map(|_| ())
    }
}
