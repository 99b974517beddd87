//! Buffer-aided relaying: per-slot state machine with decode-and-forward
//! relays.
//!
//! A slot is one packet duration under a single channel draw. `M` packets move
//! per slot, one per antenna; channel use `t` carries symbol `t` of each.

use std::collections::VecDeque;

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{draw_noise, draw_slot_channels, CsiMode, LinkEstimate, SlotChannels};
use crate::constellation::{build_constellation, enumerate_candidates, CandidateSet, Constellation, ConstellationKind};
use crate::detection::MlDetector;
use crate::error::{Error, Result};
use crate::rng::{SimRng, StreamSeed};
use crate::selection::{
    Criterion, Mode, NoEligibleLink, ProtocolKind, RelayEligibility, SelectionKernel, SlotDecision, Variant,
};

const PHASE_INIT: u64 = 1;
const PHASE_RUN: u64 = 2;
const STREAM_CHANNELS: u64 = 1;
const STREAM_BITS: u64 = 2;
const STREAM_NOISE: u64 = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Packet {
    pub id: u64,
    pub source_bits: Vec<u8>,
    /// What the relay decoded; `None` until the packet has been received by
    /// a relay.
    pub relay_bits: Option<Vec<u8>>,
    pub origin_slot: u64,
}

/// FIFO packet buffer of one relay.
#[derive(Clone, Debug, PartialEq)]
pub struct RelayState {
    buffer: VecDeque<Packet>,
    capacity: usize,
}

impl RelayState {
    pub fn new(capacity: usize) -> Self {
        RelayState {
            buffer: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn occupancy(&self) -> usize {
        self.buffer.len()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn packets(&self) -> impl Iterator<Item = &Packet> {
        self.buffer.iter()
    }

    /// Mutable access to stored packets, for fault injection in tests.
    pub fn packets_mut(&mut self) -> impl Iterator<Item = &mut Packet> {
        self.buffer.iter_mut()
    }

    pub fn eligibility(&self, m: usize) -> RelayEligibility {
        RelayEligibility::from_occupancy(self.occupancy(), self.capacity, m)
    }

    fn push(&mut self, packet: Packet) {
        assert!(self.buffer.len() < self.capacity, "relay buffer overflow");
        self.buffer.push_back(packet);
    }

    fn pop(&mut self) -> Packet {
        self.buffer.pop_front().expect("relay buffer underflow")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeliveredPacket {
    pub id: u64,
    /// Relay that forwarded the packet, `None` for direct delivery.
    pub via_relay: Option<usize>,
    pub decoded_bits: Vec<u8>,
    pub bit_errors: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlotOutcome {
    pub decision: SlotDecision,
    /// Packets created at the source this slot.
    pub created: Vec<u64>,
    pub delivered: Vec<DeliveredPacket>,
    pub bit_errors: u64,
    pub bits_delivered: u64,
}

/// Static parameters of one simulated link set at one SNR.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParams {
    pub relays: usize,
    pub antennas: usize,
    pub buffer_size: usize,
    pub constellation: ConstellationKind,
    pub symbols_per_packet: usize,
    pub csi: CsiMode,
    pub variant: Variant,
    pub es: f64,
    pub n0: f64,
}

impl NetworkParams {
    pub fn validate(&self) -> Result<()> {
        if self.relays == 0 {
            return Err(Error::config("at least one relay is required"));
        }
        if self.antennas == 0 {
            return Err(Error::config("at least one antenna is required"));
        }
        if self.buffer_size < 2 * self.antennas {
            return Err(Error::config(format!(
                "buffer size J = {} must be at least 2M = {}",
                self.buffer_size,
                2 * self.antennas
            )));
        }
        if self.symbols_per_packet == 0 {
            return Err(Error::config("symbols_per_packet must be at least 1"));
        }
        if !(self.es.is_finite() && self.es > 0.0) {
            return Err(Error::config(format!("symbol energy must be positive, got {}", self.es)));
        }
        if !(self.n0.is_finite() && self.n0 > 0.0) {
            return Err(Error::config(format!("N0 must be positive, got {}", self.n0)));
        }
        self.csi.validate()
    }

    /// Per-relay occupancy reached by the initialization phase: half the
    /// buffer, rounded down to whole `M`-packet batches.
    pub fn init_target(&self) -> usize {
        (self.buffer_size / 2) / self.antennas * self.antennas
    }
}

/// Running packet accounting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PacketLedger {
    pub created: u64,
    pub created_during_init: u64,
    pub delivered: u64,
    /// Packets generated but not yet transmitted. Packets are generated in
    /// the slot that sends them, so this stays zero.
    pub pending_at_source: u64,
}

/// Relay network state for one simulation run.
#[derive(Clone, Debug)]
pub struct Network {
    params: NetworkParams,
    constellation: Constellation,
    candidates: CandidateSet,
    kernel: SelectionKernel,
    relays: Vec<RelayState>,
    seed: StreamSeed,
    slot: u64,
    init_slots: u64,
    ledger: PacketLedger,
}

impl Network {
    /// Builds a network with empty buffers. All randomness is derived from
    /// `seed`; slot `k` of the run phase uses the same channel substream for
    /// every variant.
    pub fn new(params: NetworkParams, seed: StreamSeed) -> Result<Self> {
        params.validate()?;
        let constellation = build_constellation(params.constellation);
        let candidates = enumerate_candidates(&constellation, params.antennas);
        let kernel = SelectionKernel::new(&constellation, params.antennas, params.es);
        let relays = (0..params.relays).map(|_| RelayState::new(params.buffer_size)).collect();
        Ok(Network {
            params,
            constellation,
            candidates,
            kernel,
            relays,
            seed,
            slot: 0,
            init_slots: 0,
            ledger: PacketLedger::default(),
        })
    }

    pub fn params(&self) -> &NetworkParams {
        &self.params
    }

    pub fn relays(&self) -> &[RelayState] {
        &self.relays
    }

    pub fn relay_mut(&mut self, index: usize) -> &mut RelayState {
        &mut self.relays[index]
    }

    pub fn ledger(&self) -> PacketLedger {
        self.ledger
    }

    pub fn buffered(&self) -> u64 {
        self.relays.iter().map(|r| r.occupancy() as u64).sum()
    }

    /// Slots run after initialization.
    pub fn slots_run(&self) -> u64 {
        self.slot
    }

    pub fn init_slots(&self) -> u64 {
        self.init_slots
    }

    fn eligibility(&self) -> Vec<RelayEligibility> {
        self.relays.iter().map(|r| r.eligibility(self.params.antennas)).collect()
    }

    fn slot_seed(&self, phase: u64, slot: u64) -> StreamSeed {
        self.seed.derive(phase).derive(slot)
    }

    fn draw_channels(&self, slot_seed: StreamSeed) -> Result<SlotChannels> {
        let p = &self.params;
        draw_slot_channels(slot_seed.derive(STREAM_CHANNELS), p.relays, p.antennas, p.csi, p.es)
    }

    fn new_packets(&mut self, rng: &mut SimRng, origin_slot: u64) -> Vec<Packet> {
        let bits_per_packet = self.params.symbols_per_packet * self.constellation.bits_per_symbol();
        (0..self.params.antennas)
            .map(|_| {
                let id = self.ledger.created;
                self.ledger.created += 1;
                Packet {
                    id,
                    source_bits: (0..bits_per_packet).map(|_| rng.random::<bool>() as u8).collect(),
                    relay_bits: None,
                    origin_slot,
                }
            })
            .collect()
    }

    /// Sends one block of `M` packets over `link` and returns what the
    /// receiver decoded for each. The signal goes through the true channel;
    /// the detector only knows the estimate.
    fn transmit(&self, payloads: &[&[u8]], link: &LinkEstimate, noise_rng: &mut SimRng) -> Vec<Vec<u8>> {
        let m = self.params.antennas;
        let bps = self.constellation.bits_per_symbol();
        let gain = self.kernel.gain_for(link.link);
        let detector = MlDetector::new(&link.estimated_h, gain, &self.candidates);
        let mut decoded: Vec<Vec<u8>> = payloads.iter().map(|p| Vec::with_capacity(p.len())).collect();
        let mut label = vec![0u8; m * bps];
        let mut y = vec![Complex64::new(0.0, 0.0); m];
        for t in 0..self.params.symbols_per_packet {
            for (a, payload) in payloads.iter().enumerate() {
                label[a * bps..(a + 1) * bps].copy_from_slice(&payload[t * bps..(t + 1) * bps]);
            }
            let x = self.candidates.vector(self.candidates.index_of_label(&label));
            link.true_h.mul_vec_into(x, &mut y);
            let noise = draw_noise(noise_rng, m, self.params.n0);
            for (yi, ni) in y.iter_mut().zip(noise) {
                *yi = *yi * gain + ni;
            }
            let detected = self.candidates.label(detector.detect(&y));
            for (a, out) in decoded.iter_mut().enumerate() {
                out.extend_from_slice(&detected[a * bps..(a + 1) * bps]);
            }
        }
        decoded
    }

    fn receive_at_relay(&mut self, relay: usize, channels: &SlotChannels, slot_seed: StreamSeed, origin_slot: u64) -> Vec<u64> {
        let mut packets = self.new_packets(&mut slot_seed.derive(STREAM_BITS).rng(), origin_slot);
        let payloads: Vec<&[u8]> = packets.iter().map(|p| p.source_bits.as_slice()).collect();
        let decoded = self.transmit(&payloads, &channels.sr[relay], &mut slot_seed.derive(STREAM_NOISE).rng());
        let ids = packets.iter().map(|p| p.id).collect();
        for (packet, bits) in packets.iter_mut().zip(decoded) {
            packet.relay_bits = Some(bits);
        }
        for packet in packets {
            self.relays[relay].push(packet);
        }
        ids
    }

    /// Fills every relay to [`NetworkParams::init_target`] with reception-only
    /// slots, each sending `M` packets to the eligible relay with the best SR
    /// link under the variant's criterion. Returns the number of slots used.
    /// Direct-only networks skip this phase.
    pub fn initialize_buffers(&mut self) -> Result<u64> {
        if self.params.variant.protocol() == ProtocolKind::DirectOnly {
            return Ok(0);
        }
        if self.relays.iter().any(|r| r.occupancy() != 0) {
            return Err(Error::usage("buffers must be empty before initialization"));
        }
        let target = self.params.init_target();
        let m = self.params.antennas;
        let criterion: Criterion = self.params.variant.criterion();
        let mut slots = 0u64;
        loop {
            let allowed: Vec<bool> = self.relays.iter().map(|r| r.occupancy() + m <= target).collect();
            if !allowed.iter().any(|&a| a) {
                break;
            }
            let slot_seed = self.slot_seed(PHASE_INIT, slots);
            let channels = self.draw_channels(slot_seed)?;
            let (relay, _) = self
                .kernel
                .select_reception(&channels, &allowed, criterion)
                .expect("an allowed relay exists");
            let created_before = self.ledger.created;
            self.receive_at_relay(relay, &channels, slot_seed, 0);
            self.ledger.created_during_init += self.ledger.created - created_before;
            slots += 1;
        }
        self.init_slots = slots;
        Ok(slots)
    }

    /// Runs one protocol slot.
    pub fn run_slot(&mut self) -> Result<SlotOutcome> {
        let slot = self.slot;
        let slot_seed = self.slot_seed(PHASE_RUN, slot);
        let channels = self.draw_channels(slot_seed)?;
        let eligibility = self.eligibility();
        let variant = self.params.variant;
        let decision = self
            .kernel
            .decide_slot(&channels, &eligibility, variant.criterion(), variant.protocol())
            .map_err(|NoEligibleLink| Error::Stall { slot })?;

        let mut outcome = SlotOutcome {
            decision,
            created: Vec::new(),
            delivered: Vec::new(),
            bit_errors: 0,
            bits_delivered: 0,
        };
        let noise_seed = slot_seed.derive(STREAM_NOISE);
        match outcome.decision.mode {
            Mode::Direct => {
                let packets = self.new_packets(&mut slot_seed.derive(STREAM_BITS).rng(), slot);
                let payloads: Vec<&[u8]> = packets.iter().map(|p| p.source_bits.as_slice()).collect();
                let decoded = self.transmit(&payloads, &channels.sd, &mut noise_seed.rng());
                outcome.created = packets.iter().map(|p| p.id).collect();
                for (packet, bits) in packets.iter().zip(decoded) {
                    outcome.delivered.push(deliver(packet, None, bits));
                }
            }
            Mode::Reception(relay) => {
                outcome.created = self.receive_at_relay(relay, &channels, slot_seed, slot);
            }
            Mode::Transmission(relay) => {
                let packets: Vec<Packet> = (0..self.params.antennas).map(|_| self.relays[relay].pop()).collect();
                let payloads: Vec<&[u8]> = packets
                    .iter()
                    .map(|p| p.relay_bits.as_deref().expect("buffered packets carry relay decisions"))
                    .collect();
                let decoded = self.transmit(&payloads, &channels.rd[relay], &mut noise_seed.rng());
                for (packet, bits) in packets.iter().zip(decoded) {
                    outcome.delivered.push(deliver(packet, Some(relay), bits));
                }
            }
        }
        for d in &outcome.delivered {
            outcome.bit_errors += d.bit_errors;
            outcome.bits_delivered += d.decoded_bits.len() as u64;
        }
        self.ledger.delivered += outcome.delivered.len() as u64;
        self.slot += 1;
        Ok(outcome)
    }
}

/// Destination-side error count is always against the source's bits, so relay
/// decoding errors propagate.
fn deliver(packet: &Packet, via_relay: Option<usize>, decoded_bits: Vec<u8>) -> DeliveredPacket {
    let bit_errors = packet
        .source_bits
        .iter()
        .zip(&decoded_bits)
        .filter(|(a, b)| a != b)
        .count() as u64;
    DeliveredPacket {
        id: packet.id,
        via_relay,
        decoded_bits,
        bit_errors,
    }
}
