//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if any
//! criterion fails.
//!
//! ```text
//! cargo test -p relaysim-core --test acceptance -- --nocapture
//! ```
//!
//! Desk scale: N = 3 unless stated, M = 2, J = 4, BPSK, 2000 packets per SNR
//! point, fixed seeds.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use relaysim_core::analysis::{mmd_op_count, qn_op_count, ComplexityModel};
use relaysim_core::channel::{ChannelMatrix, CsiMode};
use relaysim_core::constellation::{
    build_constellation, difference_set, enumerate_candidates, ConstellationKind, DifferenceVectors,
};
use relaysim_core::detection::{ml_detect, DetectionProblem};
use relaysim_core::exec::Execution;
use relaysim_core::experiment::{
    pep_samples, run_campaign, write_ber_csv, BerRecord, Campaign, CsiSetting, ExperimentConfig, PepRecord,
    PepSweepConfig,
};
use relaysim_core::protocol::{Network, NetworkParams};
use relaysim_core::rng::StreamSeed;
use relaysim_core::selection::{d_min, d_min_counted, d_min_fast, Criterion, Mode, Variant};

const SEED: u64 = 20_240_601;
const DESK_PACKETS: u64 = 2_000;
const PEP_SLOTS: u64 = 10_000;
const ORACLE_TRIALS: usize = 1_000;
const PROTOCOL_SLOTS: u64 = 100_000;
/// Largest allowed ratio between QN's N = 3 and N = 10 mean PEP.
const QN_FLAT_RATIO: f64 = 2.0;
/// Points per curve allowed to violate an ordering with overlapping intervals.
const OVERLAP_ALLOWANCE: usize = 1;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(checks: Vec<(bool, String)>) -> Self {
        let pass = checks.iter().all(|(ok, _)| *ok);
        let detail = checks
            .into_iter()
            .map(|(ok, msg)| format!("{}{msg}", if ok { "" } else { "!! " }))
            .collect::<Vec<_>>()
            .join("; ");
        Verdict { pass, detail }
    }
}

fn desk(n: usize, constellation: ConstellationKind) -> ExperimentConfig {
    ExperimentConfig {
        n,
        m: 2,
        j: 4,
        constellation,
        packets: DESK_PACKETS,
        seed: SEED,
        ..ExperimentConfig::desk_preset()
    }
}

fn campaign(config: &ExperimentConfig) -> Campaign {
    run_campaign(config, Execution::Parallel).expect("campaign runs")
}

fn point(c: &Campaign, v: Variant, snr: f64) -> &BerRecord {
    c.point(v, snr).unwrap_or_else(|| panic!("missing {v} at {snr} dB"))
}

fn pep_config(n_values: Vec<usize>, snr_db: Vec<f64>) -> PepSweepConfig {
    PepSweepConfig {
        n_values,
        m: 2,
        constellation: ConstellationKind::Bpsk,
        snr_db,
        slots: PEP_SLOTS,
        csi: CsiSetting::Perfect,
        beta: None,
        alpha: None,
        seed: SEED,
        n0: 1.0,
    }
}

/// `a ≤ b` per grid point, except at most `OVERLAP_ALLOWANCE` points where
/// `a > b` but the Wilson intervals overlap.
fn dominated(c: &Campaign, a: Variant, b: Variant) -> (bool, String) {
    let mut soft = Vec::new();
    let mut hard = Vec::new();
    for ra in c.curve(a) {
        let rb = point(c, b, ra.snr_db);
        if ra.ber > rb.ber {
            if ra.overlaps(rb) {
                soft.push(ra.snr_db);
            } else {
                hard.push(ra.snr_db);
            }
        }
    }
    let ok = hard.is_empty() && soft.len() <= OVERLAP_ALLOWANCE;
    (ok, format!("{a} <= {b}: hard violations {hard:?}, overlapping {soft:?}"))
}

fn criterion_1() -> Verdict {
    let snrs = vec![0.0, 6.0, 12.0];
    let cfg = pep_config(vec![3], snrs.clone());
    let mut checks = Vec::new();
    for (i, snr) in snrs.iter().enumerate() {
        let samples = pep_samples(&cfg, 3, i, Execution::Parallel).unwrap();
        let dominated = samples.iter().filter(|s| s.d_prime_mmd >= s.d_prime_qn).count();
        let k = samples.len() as f64;
        let mmd = samples.iter().map(|s| s.pep_mmd).sum::<f64>() / k;
        let qn = samples.iter().map(|s| s.pep_qn).sum::<f64>() / k;
        checks.push((
            dominated == samples.len() && mmd <= qn,
            format!("{snr} dB: D'(MMD) >= D'(QN) in {dominated}/{}, PEP {mmd:.3e} vs {qn:.3e}", samples.len()),
        ));
    }
    Verdict::new(checks)
}

fn criterion_2() -> Verdict {
    let cfg = pep_config(vec![3, 5, 10], vec![12.0]);
    let mut mmd = Vec::new();
    let mut qn = Vec::new();
    for &n in &cfg.n_values {
        let samples = pep_samples(&cfg, n, 0, Execution::Parallel).unwrap();
        let pick = |f: fn(&relaysim_core::analysis::PepComparison) -> f64| samples.iter().map(f).collect::<Vec<_>>();
        mmd.push(PepRecord::from_samples(Criterion::Mmd, 12.0, n, &pick(|s| s.pep_mmd)));
        qn.push(PepRecord::from_samples(Criterion::Qn, 12.0, n, &pick(|s| s.pep_qn)));
    }
    let mut checks = Vec::new();
    for w in mmd.windows(2) {
        checks.push((
            w[1].mean_pep < w[0].mean_pep && w[1].ci_hi < w[0].ci_lo,
            format!(
                "MMD N={}: {:.3e} [{:.3e}, {:.3e}] -> N={}: {:.3e} [{:.3e}, {:.3e}]",
                w[0].n, w[0].mean_pep, w[0].ci_lo, w[0].ci_hi, w[1].n, w[1].mean_pep, w[1].ci_lo, w[1].ci_hi
            ),
        ));
    }
    let ratio = qn[0].mean_pep / qn[2].mean_pep;
    checks.push((
        (1.0 / QN_FLAT_RATIO..=QN_FLAT_RATIO).contains(&ratio),
        format!("QN N=3 {:.3e} / N=10 {:.3e} = {ratio:.3}", qn[0].mean_pep, qn[2].mean_pep),
    ));
    Verdict::new(checks)
}

fn criterion_3(c: &Campaign) -> Verdict {
    let mut checks = Vec::new();
    for r in c.curve(Variant::MmdMaxLink).into_iter().filter(|r| r.snr_db >= 4.0) {
        let q = point(c, Variant::QnMaxLink, r.snr_db);
        checks.push((
            r.ber < q.ber,
            format!("(a) {} dB MMD {:.3e} < QN {:.3e}", r.snr_db, r.ber, q.ber),
        ));
    }
    let (ok, msg) = dominated(c, Variant::MmdSwitched, Variant::MmdMaxLink);
    checks.push((ok, format!("(b) {msg}")));
    for r in c.curve(Variant::MmdMaxLink) {
        let mimo = point(c, Variant::MimoDirect, r.snr_db);
        if r.snr_db == 0.0 {
            checks.push((r.ber > mimo.ber, format!("(c) 0 dB MMD {:.3e} > MIMO {:.3e}", r.ber, mimo.ber)));
        } else if r.snr_db >= 4.0 {
            checks.push((
                r.ber < mimo.ber,
                format!("(c) {} dB MMD {:.3e} < MIMO {:.3e}", r.snr_db, r.ber, mimo.ber),
            ));
        }
    }
    Verdict::new(checks)
}

fn criterion_4(c: &Campaign) -> Verdict {
    let mut checks = vec![dominated(c, Variant::MmdSwitched, Variant::MmdMaxLink)];
    let (mmd4, mimo4) = (point(c, Variant::MmdMaxLink, 4.0), point(c, Variant::MimoDirect, 4.0));
    checks.push((mimo4.ber < mmd4.ber, format!("4 dB MIMO {:.3e} < MMD {:.3e}", mimo4.ber, mmd4.ber)));
    let (mmd10, mimo10) = (point(c, Variant::MmdMaxLink, 10.0), point(c, Variant::MimoDirect, 10.0));
    checks.push((mimo10.ber > mmd10.ber, format!("10 dB MIMO {:.3e} > MMD {:.3e}", mimo10.ber, mmd10.ber)));
    Verdict::new(checks)
}

fn criterion_5() -> Verdict {
    let base = ExperimentConfig {
        variants: vec![Variant::MmdSwitched, Variant::MimoDirect],
        ..desk(10, ConstellationKind::Bpsk)
    };
    let imperfect = |alpha: f64| ExperimentConfig {
        csi: CsiSetting::Imperfect,
        beta: Some(1.0),
        alpha: Some(alpha),
        ..base.clone()
    };
    let c05 = campaign(&imperfect(0.5));
    let c08 = campaign(&imperfect(0.8));
    let perfect = campaign(&ExperimentConfig {
        variants: vec![Variant::MmdSwitched],
        ..base.clone()
    });
    let at8 = |c: &Campaign| point(c, Variant::MmdSwitched, 8.0).clone();
    let (a, b, p) = (at8(&c05), at8(&c08), at8(&perfect));
    let mut checks = vec![
        (
            a.ber > b.ber && !a.overlaps(&b),
            format!("8 dB alpha=0.5 {:.3e} [{:.2e}, {:.2e}] > alpha=0.8 {:.3e} [{:.2e}, {:.2e}]", a.ber, a.ci_lo, a.ci_hi, b.ber, b.ci_lo, b.ci_hi),
        ),
        (
            b.ber > p.ber && !b.overlaps(&p),
            format!("alpha=0.8 > perfect {:.3e} [{:.2e}, {:.2e}]", p.ber, p.ci_lo, p.ci_hi),
        ),
    ];
    for (alpha, c) in [(0.5, &c05), (0.8, &c08)] {
        let bad: Vec<f64> = c
            .curve(Variant::MmdSwitched)
            .into_iter()
            .filter(|r| r.ber > point(c, Variant::MimoDirect, r.snr_db).ber)
            .map(|r| r.snr_db)
            .collect();
        checks.push((bad.is_empty(), format!("alpha={alpha}: Switched > MIMO at {bad:?}")));
    }
    Verdict::new(checks)
}

fn criterion_6() -> Verdict {
    let mut checks = Vec::new();
    let x = mmd_op_count(ComplexityModel { n: 3, m: 2, w: 1 });
    checks.push((x.evaluations == 4, format!("X(2,1) = {}", x.evaluations)));
    checks.push((
        (x.additions, x.multiplications) == (36, 48),
        format!("MMD ops {} add / {} mul", x.additions, x.multiplications),
    ));
    let q = qn_op_count(3, 2);
    checks.push((
        (q.additions, q.multiplications) == (18, 24),
        format!("QN ops {} add / {} mul", q.additions, q.multiplications),
    ));
    let bpsk = build_constellation(ConstellationKind::Bpsk);
    let mut rng = StreamSeed::new(SEED).derive(6).rng();
    for m in [1usize, 2] {
        let diffs = DifferenceVectors::new(&difference_set(&bpsk), m);
        let h = ChannelMatrix::gaussian(&mut rng, m, 1.0);
        let (_, evaluations) = d_min_counted(&h, &diffs, 1.0);
        let expected = mmd_op_count(ComplexityModel { n: 1, m: m as u64, w: 1 }).evaluations as usize;
        checks.push((evaluations == expected, format!("BPSK M={m}: {evaluations} evaluations, X = {expected}")));
    }
    Verdict::new(checks)
}

fn criterion_7() -> Verdict {
    let mut rng = StreamSeed::new(SEED).derive(7).rng();
    let mut checks = Vec::new();
    for kind in [ConstellationKind::Bpsk, ConstellationKind::Qpsk] {
        let c = build_constellation(kind);
        for m in [1usize, 2] {
            let cands = enumerate_candidates(&c, m);
            let diffs = DifferenceVectors::new(&difference_set(&c), m);
            // Independent brute force: every unordered pair, distance spelled out.
            let brute = |h: &ChannelMatrix, g: f64| {
                let mut best = f64::INFINITY;
                for l in 0..cands.len() {
                    for n in l + 1..cands.len() {
                        let mut s = 0.0;
                        for row in 0..m {
                            let mut acc = Complex64::new(0.0, 0.0);
                            for col in 0..m {
                                acc += h.get(row, col) * (cands.vector(l)[col] - cands.vector(n)[col]);
                            }
                            s += (acc * g).norm_sqr();
                        }
                        best = best.min(s);
                    }
                }
                best
            };
            let (mut exact, mut close) = (0, 0);
            for _ in 0..ORACLE_TRIALS {
                let h = ChannelMatrix::gaussian(&mut rng, m, 1.0);
                let g = rng.random_range(0.1..3.0);
                let fast = d_min_fast(&h, &diffs, g);
                exact += (fast == d_min(&h, &cands, g)) as usize;
                close += ((fast - brute(&h, g)).abs() <= 1e-12 * fast.max(1e-300)) as usize;
            }
            checks.push((
                exact == ORACLE_TRIALS && close == ORACLE_TRIALS,
                format!("{kind} M={m}: d_min exact {exact}/{ORACLE_TRIALS}, vs independent {close}/{ORACLE_TRIALS}"),
            ));
        }
    }
    for kind in [ConstellationKind::Bpsk, ConstellationKind::Qpsk] {
        let c = build_constellation(kind);
        let m = 2;
        let cands = enumerate_candidates(&c, m);
        let mut agree = 0;
        for _ in 0..ORACLE_TRIALS {
            let h = ChannelMatrix::gaussian(&mut rng, m, 1.0);
            let g = 1.0;
            let sent = rng.random_range(0..cands.len());
            let y: Vec<Complex64> = h
                .mul_vec(cands.vector(sent))
                .into_iter()
                .map(|z| {
                    let (re, im): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
                    z * g + Complex64::new(re, im) * 0.7
                })
                .collect();
            let oracle = (0..cands.len())
                .map(|k| {
                    let hx = h.mul_vec(cands.vector(k));
                    let d: f64 = y.iter().zip(&hx).map(|(a, b)| (a - b * g).norm_sqr()).sum();
                    (k, d)
                })
                .fold((0, f64::INFINITY), |best, (k, d)| if d < best.1 { (k, d) } else { best });
            let found = ml_detect(&DetectionProblem {
                received: &y,
                estimated_h: &h,
                gain: g,
                candidates: &cands,
            });
            agree += (found.index == oracle.0) as usize;
        }
        checks.push((
            agree == ORACLE_TRIALS,
            format!("{kind} ML argmin {agree}/{ORACLE_TRIALS}"),
        ));
    }
    Verdict::new(checks)
}

fn criterion_8() -> Verdict {
    let mut checks = Vec::new();
    for variant in [Variant::MmdSwitched, Variant::MmdMaxLink, Variant::QnMaxLink] {
        let params = NetworkParams {
            relays: 3,
            antennas: 2,
            buffer_size: 4,
            constellation: ConstellationKind::Bpsk,
            symbols_per_packet: 1,
            csi: CsiMode::Perfect,
            variant,
            es: 10f64.powf(0.6),
            n0: 1.0,
        };
        let mut net = Network::new(params, StreamSeed::new(SEED).derive(8)).unwrap();
        net.initialize_buffers().unwrap();
        let mut violations = Vec::new();
        let mut last_delivered: HashMap<usize, u64> = HashMap::new();
        let mut seen = std::collections::HashSet::new();
        for _ in 0..PROTOCOL_SLOTS {
            let out = net.run_slot().unwrap();
            let ledger = net.ledger();
            if ledger.created != ledger.delivered + net.buffered() + ledger.pending_at_source {
                violations.push("conservation");
            }
            for r in net.relays() {
                if r.occupancy() > r.capacity() {
                    violations.push("occupancy");
                }
                let ids: Vec<u64> = r.packets().map(|p| p.id).collect();
                if ids.windows(2).any(|w| w[0] >= w[1]) {
                    violations.push("buffer order");
                }
            }
            for d in &out.delivered {
                if !seen.insert(d.id) {
                    violations.push("duplicate delivery");
                }
                if let Some(relay) = d.via_relay {
                    if last_delivered.get(&relay).is_some_and(|&prev| prev >= d.id) {
                        violations.push("FIFO");
                    }
                    last_delivered.insert(relay, d.id);
                }
            }
            if matches!(out.decision.mode, Mode::Transmission(_) | Mode::Reception(_)) && out.delivered.len() + out.created.len() != 2 {
                violations.push("batch size");
            }
        }
        violations.dedup();
        checks.push((
            violations.is_empty(),
            format!("{variant}: {PROTOCOL_SLOTS} slots, violations {violations:?}"),
        ));
    }

    let config = ExperimentConfig {
        packets: 200,
        snr_db: vec![0.0, 6.0, 12.0],
        ..desk(3, ConstellationKind::Bpsk)
    };
    let bytes = |exec: Execution| {
        let c = run_campaign(&config, exec).unwrap();
        let mut buf = Vec::new();
        write_ber_csv(&c.records, &mut buf).unwrap();
        buf
    };
    let reference = bytes(Execution::Sequential);
    for threads in [2usize, 4, 8] {
        let same = bytes(Execution::with_threads(threads)) == reference;
        checks.push((same, format!("CSV identical with {threads} workers")));
    }
    Verdict::new(checks)
}

#[test]
fn acceptance_criteria() {
    let bpsk10 = campaign(&desk(10, ConstellationKind::Bpsk));
    let qpsk10 = campaign(&ExperimentConfig {
        variants: vec![Variant::MmdSwitched, Variant::MmdMaxLink, Variant::MimoDirect],
        ..desk(10, ConstellationKind::Qpsk)
    });
    let verdicts = [
        (1, "MMD dominates QN per slot", criterion_1()),
        (2, "PEP vs N at 12 dB", criterion_2()),
        (3, "BPSK BER orderings, N = 10", criterion_3(&bpsk10)),
        (4, "QPSK BER orderings, N = 10", criterion_4(&qpsk10)),
        (5, "imperfect CSI, beta = 1", criterion_5()),
        (6, "operation counts", criterion_6()),
        (7, "exhaustive-search oracles", criterion_7()),
        (8, "protocol invariants and determinism", criterion_8()),
    ];
    let mut failed = Vec::new();
    for (id, title, v) in &verdicts {
        println!("criterion {id} [{}] {title}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed.push(*id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
