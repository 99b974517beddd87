//! Relay-selection metrics and the per-slot transmission decision.
//!
//! Two criteria rank links:
//!
//! - **MMD**: the minimum, over all pairs of distinct candidate vectors, of
//!   `‖g·Ĥ·(x_l − x_n)‖²`. Larger is better; it is the argument of the
//!   worst-case pairwise error probability.
//! - **QN**: the squared Frobenius norm `‖Ĥ‖²`, weighted by `g²` so that the
//!   direct link's doubled per-antenna energy is accounted for when it is
//!   compared with relay links.
//!
//! Relay `i` may be selected for reception only if it has room for `M`
//! packets and for transmission only if it holds at least `M`. Among equally
//! good links the lowest relay index wins, and SR precedes RD.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::channel::{ChannelMatrix, LinkEstimate, LinkKind, SlotChannels};
use crate::constellation::{difference_set, CandidateSet, Constellation, DifferenceVectors};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Criterion {
    Mmd,
    Qn,
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Criterion::Mmd => "mmd",
            Criterion::Qn => "qn",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "mmd" => Ok(Criterion::Mmd),
            "qn" => Ok(Criterion::Qn),
            other => Err(Error::config(format!("unknown criterion {other:?} (expected mmd or qn)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProtocolKind {
    /// Per-slot switch between direct transmission and Max-Link.
    SwitchedMaxLink,
    /// Relay links only.
    MaxLinkOnly,
    /// Conventional point-to-point MIMO.
    DirectOnly,
}

/// The protocol/criterion pairs exposed in configs and on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    MmdSwitched,
    MmdMaxLink,
    QnMaxLink,
    MimoDirect,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::MmdSwitched,
        Variant::MmdMaxLink,
        Variant::QnMaxLink,
        Variant::MimoDirect,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::MmdSwitched => "mmd-switched",
            Variant::MmdMaxLink => "mmd-maxlink",
            Variant::QnMaxLink => "qn-maxlink",
            Variant::MimoDirect => "mimo-direct",
        }
    }

    pub fn criterion(self) -> Criterion {
        match self {
            Variant::QnMaxLink => Criterion::Qn,
            _ => Criterion::Mmd,
        }
    }

    pub fn protocol(self) -> ProtocolKind {
        match self {
            Variant::MmdSwitched => ProtocolKind::SwitchedMaxLink,
            Variant::MmdMaxLink | Variant::QnMaxLink => ProtocolKind::MaxLinkOnly,
            Variant::MimoDirect => ProtocolKind::DirectOnly,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s.trim())
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown variant {s:?} (expected one of mmd-switched, mmd-maxlink, qn-maxlink, mimo-direct)"
                ))
            })
    }
}

impl serde::Serialize for Variant {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> serde::Deserialize<'de> for Variant {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `g² · ‖H·e‖²` for a difference vector `e`.
pub fn difference_distance(h: &ChannelMatrix, e: &[Complex64], gain: f64) -> f64 {
    let v = h.mul_vec(e);
    gain * gain * v.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// `‖g·H·x_l − g·H·x_n‖²`, evaluated as `g²·‖H·(x_l − x_n)‖²`.
pub fn pairwise_distance(h: &ChannelMatrix, x_l: &[Complex64], x_n: &[Complex64], gain: f64) -> f64 {
    let e: Vec<Complex64> = x_l.iter().zip(x_n).map(|(a, b)| a - b).collect();
    difference_distance(h, &e, gain)
}

/// Minimum pairwise distance by brute force over all `C(N_s^M, 2)` pairs.
pub fn d_min(h: &ChannelMatrix, candidates: &CandidateSet, gain: f64) -> f64 {
    let mut best = f64::INFINITY;
    for l in 0..candidates.len() {
        for n in l + 1..candidates.len() {
            best = best.min(pairwise_distance(h, candidates.vector(l), candidates.vector(n), gain));
        }
    }
    best
}

/// Minimum pairwise distance over the distinct difference vectors, returning
/// the number of metric evaluations performed alongside the value.
pub fn d_min_counted(h: &ChannelMatrix, diffs: &DifferenceVectors, gain: f64) -> (f64, usize) {
    let mut best = f64::INFINITY;
    let mut evaluations = 0;
    for e in diffs.iter() {
        best = best.min(difference_distance(h, e, gain));
        evaluations += 1;
    }
    (best, evaluations)
}

/// Minimum pairwise distance over the distinct difference vectors. Bitwise
/// equal to [`d_min`].
pub fn d_min_fast(h: &ChannelMatrix, diffs: &DifferenceVectors, gain: f64) -> f64 {
    d_min_counted(h, diffs, gain).0
}

/// Squared Frobenius norm.
pub fn qn_metric(h: &ChannelMatrix) -> f64 {
    h.frobenius_sq()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkMetric {
    pub link: LinkKind,
    pub gain: f64,
    pub d_min: f64,
    pub qn: f64,
}

impl LinkMetric {
    /// Value maximized by `criterion`.
    pub fn score(&self, criterion: Criterion) -> f64 {
        match criterion {
            Criterion::Mmd => self.d_min,
            Criterion::Qn => self.gain * self.gain * self.qn,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Direct,
    Reception(usize),
    Transmission(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlotDecision {
    pub mode: Mode,
    pub winning_metric: f64,
    /// Every evaluated link; empty for [`ProtocolKind::DirectOnly`].
    pub all_metrics: Vec<LinkMetric>,
}

/// Buffer-derived permissions of one relay.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RelayEligibility {
    pub can_receive: bool,
    pub can_transmit: bool,
}

impl RelayEligibility {
    pub fn from_occupancy(occupancy: usize, capacity: usize, m: usize) -> Self {
        RelayEligibility {
            can_receive: capacity.saturating_sub(occupancy) >= m,
            can_transmit: occupancy >= m,
        }
    }
}

/// No relay link was eligible and the protocol has no direct fallback.
#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("no eligible relay link")]
pub struct NoEligibleLink;

/// Precomputed state for evaluating selection metrics at one energy level.
#[derive(Clone, Debug)]
pub struct SelectionKernel {
    m: usize,
    es: f64,
    coop_gain: f64,
    direct_gain: f64,
    diffs: DifferenceVectors,
}

impl SelectionKernel {
    pub fn new(constellation: &Constellation, m: usize, es: f64) -> Self {
        SelectionKernel {
            m,
            es,
            coop_gain: (es / m as f64).sqrt(),
            direct_gain: (2.0 * es / m as f64).sqrt(),
            diffs: DifferenceVectors::new(&difference_set(constellation), m),
        }
    }

    pub fn antennas(&self) -> usize {
        self.m
    }

    pub fn es(&self) -> f64 {
        self.es
    }

    /// `√(E_s/M)`.
    pub fn coop_gain(&self) -> f64 {
        self.coop_gain
    }

    /// `√(2E_s/M)`.
    pub fn direct_gain(&self) -> f64 {
        self.direct_gain
    }

    pub fn gain_for(&self, link: LinkKind) -> f64 {
        if link.is_direct() {
            self.direct_gain
        } else {
            self.coop_gain
        }
    }

    pub fn difference_vectors(&self) -> &DifferenceVectors {
        &self.diffs
    }

    pub fn link_metric(&self, estimate: &LinkEstimate) -> LinkMetric {
        let gain = self.gain_for(estimate.link);
        LinkMetric {
            link: estimate.link,
            gain,
            d_min: d_min_fast(&estimate.estimated_h, &self.diffs, gain),
            qn: qn_metric(&estimate.estimated_h),
        }
    }

    /// Metrics for SR(0), RD(0), SR(1), RD(1), ..., in tie-break order.
    pub fn relay_metrics(&self, channels: &SlotChannels) -> Vec<LinkMetric> {
        channels
            .sr
            .iter()
            .zip(&channels.rd)
            .flat_map(|(sr, rd)| [self.link_metric(sr), self.link_metric(rd)])
            .collect()
    }

    /// Best relay among those allowed to receive, by SR metric.
    pub fn select_reception(
        &self,
        channels: &SlotChannels,
        allowed: &[bool],
        criterion: Criterion,
    ) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, sr) in channels.sr.iter().enumerate() {
            if !allowed[i] {
                continue;
            }
            let score = self.link_metric(sr).score(criterion);
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((i, score));
            }
        }
        best
    }

    /// Table-driven slot decision: best eligible relay link, optionally
    /// compared against the direct link (`SD ≥ best relay link` selects
    /// direct).
    pub fn decide_slot(
        &self,
        channels: &SlotChannels,
        eligibility: &[RelayEligibility],
        criterion: Criterion,
        protocol: ProtocolKind,
    ) -> std::result::Result<SlotDecision, NoEligibleLink> {
        assert_eq!(eligibility.len(), channels.relays());
        if protocol == ProtocolKind::DirectOnly {
            return Ok(SlotDecision {
                mode: Mode::Direct,
                winning_metric: f64::NAN,
                all_metrics: Vec::new(),
            });
        }

        let mut all_metrics = self.relay_metrics(channels);
        let mut best: Option<(Mode, f64)> = None;
        for (i, pair) in all_metrics.chunks_exact(2).enumerate() {
            let candidates = [
                (eligibility[i].can_receive, Mode::Reception(i), &pair[0]),
                (eligibility[i].can_transmit, Mode::Transmission(i), &pair[1]),
            ];
            for (eligible, mode, metric) in candidates {
                if !eligible {
                    continue;
                }
                let score = metric.score(criterion);
                if best.is_none_or(|(_, b)| score > b) {
                    best = Some((mode, score));
                }
            }
        }

        let sd = self.link_metric(&channels.sd);
        all_metrics.push(sd);
        let (mode, winning_metric) = match (protocol, best) {
            (ProtocolKind::SwitchedMaxLink, Some((_, relay_best)))
                if sd.score(criterion) >= relay_best =>
            {
                (Mode::Direct, sd.score(criterion))
            }
            (ProtocolKind::SwitchedMaxLink, None) => (Mode::Direct, sd.score(criterion)),
            (_, Some(choice)) => choice,
            (_, None) => return Err(NoEligibleLink),
        };
        Ok(SlotDecision {
            mode,
            winning_metric,
            all_metrics,
        })
    }
}
