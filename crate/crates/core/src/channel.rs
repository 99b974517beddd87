//! Rayleigh block-fading channels, AWGN and imperfect channel estimates.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::StreamSeed;

/// Circularly-symmetric complex Gaussian sample with total variance `variance`
/// (half in each of the real and imaginary parts).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Square `M × M` complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ChannelMatrix {
    pub fn zeros(dim: usize) -> Self {
        ChannelMatrix {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut h = Self::zeros(dim);
        for i in 0..dim {
            h.entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        h
    }

    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::usage(format!(
                "{dim}x{dim} matrix needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(ChannelMatrix { dim, entries })
    }

    /// I.i.d. `CN(0, variance)` entries.
    pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, dim: usize, variance: f64) -> Self {
        let entries = (0..dim * dim).map(|_| complex_gaussian(rng, variance)).collect();
        ChannelMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        ChannelMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &ChannelMatrix) -> Self {
        assert_eq!(self.dim, other.dim);
        ChannelMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        }
    }

    /// `out = H · x`.
    pub fn mul_vec_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        for (row, o) in self.entries.chunks_exact(self.dim).zip(out.iter_mut()) {
            *o = row.iter().zip(x).map(|(h, v)| h * v).sum();
        }
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        self.mul_vec_into(x, &mut out);
        out
    }

    /// `‖H‖_F² = Σ |h_mn|²`.
    pub fn frobenius_sq(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Which hop a channel matrix belongs to. Relay indices are zero-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinkKind {
    SourceRelay(usize),
    RelayDest(usize),
    SourceDest,
}

impl LinkKind {
    /// Stable substream index: SD is 0, relay `i` owns `2i + 1` (SR) and
    /// `2i + 2` (RD). Independent of the relay count, so a network with more
    /// relays sees the same matrices on its first links.
    pub fn stream_index(self) -> u64 {
        match self {
            LinkKind::SourceDest => 0,
            LinkKind::SourceRelay(i) => 2 * i as u64 + 1,
            LinkKind::RelayDest(i) => 2 * i as u64 + 2,
        }
    }

    pub fn is_direct(self) -> bool {
        matches!(self, LinkKind::SourceDest)
    }
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinkKind::SourceRelay(i) => write!(f, "SR{}", i + 1),
            LinkKind::RelayDest(i) => write!(f, "R{}D", i + 1),
            LinkKind::SourceDest => f.write_str("SD"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CsiMode {
    Perfect,
    /// Estimation error variance `β · E^(−α)` with `E = E_s` on relay hops
    /// and `E = 2E_s` on the direct link.
    Imperfect { beta: f64, alpha: f64 },
}

impl CsiMode {
    pub fn validate(self) -> Result<()> {
        match self {
            CsiMode::Perfect => Ok(()),
            CsiMode::Imperfect { beta, alpha } => {
                if !(beta.is_finite() && beta >= 0.0) {
                    return Err(Error::config(format!("beta must be >= 0, got {beta}")));
                }
                if !(0.0..=1.0).contains(&alpha) {
                    return Err(Error::config(format!("alpha must be in [0, 1], got {alpha}")));
                }
                Ok(())
            }
        }
    }

    pub fn error_variance(self, link: LinkKind, es: f64) -> f64 {
        match self {
            CsiMode::Perfect => 0.0,
            CsiMode::Imperfect { beta, alpha } => {
                let energy = if link.is_direct() { 2.0 * es } else { es };
                beta * energy.powf(-alpha)
            }
        }
    }
}

/// True channel of a link and the estimate every receiver and the selection
/// logic work with.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkEstimate {
    pub link: LinkKind,
    pub true_h: ChannelMatrix,
    pub estimated_h: ChannelMatrix,
    pub sigma_e_sq: f64,
}

impl LinkEstimate {
    fn draw(seed: StreamSeed, link: LinkKind, m: usize, csi: CsiMode, es: f64) -> Self {
        let mut rng = seed.derive(link.stream_index()).rng();
        let true_h = ChannelMatrix::gaussian(&mut rng, m, 1.0);
        let sigma_e_sq = csi.error_variance(link, es);
        let estimated_h = if sigma_e_sq > 0.0 {
            true_h.add(&ChannelMatrix::gaussian(&mut rng, m, sigma_e_sq))
        } else {
            true_h.clone()
        };
        LinkEstimate {
            link,
            true_h,
            estimated_h,
            sigma_e_sq,
        }
    }

    pub fn perfect(link: LinkKind, h: ChannelMatrix) -> Self {
        LinkEstimate {
            link,
            estimated_h: h.clone(),
            true_h: h,
            sigma_e_sq: 0.0,
        }
    }
}

/// All `2N + 1` link matrices of one time slot.
#[derive(Clone, Debug, PartialEq)]
pub struct SlotChannels {
    pub sr: Vec<LinkEstimate>,
    pub rd: Vec<LinkEstimate>,
    pub sd: LinkEstimate,
}

impl SlotChannels {
    pub fn relays(&self) -> usize {
        self.sr.len()
    }

    pub fn link(&self, link: LinkKind) -> &LinkEstimate {
        match link {
            LinkKind::SourceRelay(i) => &self.sr[i],
            LinkKind::RelayDest(i) => &self.rd[i],
            LinkKind::SourceDest => &self.sd,
        }
    }
}

/// Draws every link of a slot. Each link reads its own substream of `seed`,
/// keyed by [`LinkKind::stream_index`].
pub fn draw_slot_channels(
    seed: StreamSeed,
    n: usize,
    m: usize,
    csi: CsiMode,
    es: f64,
) -> Result<SlotChannels> {
    if n == 0 || m == 0 {
        return Err(Error::usage("relay and antenna counts must be at least 1"));
    }
    if !(es.is_finite() && es > 0.0) {
        return Err(Error::usage(format!("symbol energy must be positive, got {es}")));
    }
    csi.validate()?;
    let sr = (0..n)
        .map(|i| LinkEstimate::draw(seed, LinkKind::SourceRelay(i), m, csi, es))
        .collect();
    let rd = (0..n)
        .map(|i| LinkEstimate::draw(seed, LinkKind::RelayDest(i), m, csi, es))
        .collect();
    let sd = LinkEstimate::draw(seed, LinkKind::SourceDest, m, csi, es);
    Ok(SlotChannels { sr, rd, sd })
}

/// `M` i.i.d. `CN(0, N_0)` noise samples.
pub fn draw_noise<R: Rng + ?Sized>(rng: &mut R, m: usize, n0: f64) -> Vec<Complex64> {
    debug_assert!(n0 > 0.0);
    (0..m).map(|_| complex_gaussian(rng, n0)).collect()
}
