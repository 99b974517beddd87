//! `relaysim`: run BER campaigns, PEP sweeps and operation-count tables.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use relaysim_core::analysis::{mmd_op_count, qn_op_count, ComplexityModel};
use relaysim_core::constellation::ConstellationKind;
use relaysim_core::exec::Execution;
use relaysim_core::experiment::{
    emit_csv, emit_pep_csv, run_campaign, run_pep_sweep, write_ber_plot_data, write_pep_csv, write_pep_plot_data,
    CsiSetting, ExperimentConfig, PepSweepConfig,
};

#[derive(Parser)]
#[command(name = "relaysim", version, about = "Buffer-aided multi-antenna relay selection simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a BER campaign described by a TOML config.
    Run(RunArgs),
    /// Mean worst-case PEP of MMD vs QN link selection.
    Pep(PepArgs),
    /// Operation counts of the MMD and QN selection metrics.
    Complexity(ComplexityArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum CsiArg {
    Perfect,
    Imperfect,
}

impl From<CsiArg> for CsiSetting {
    fn from(c: CsiArg) -> Self {
        match c {
            CsiArg::Perfect => CsiSetting::Perfect,
            CsiArg::Imperfect => CsiSetting::Imperfect,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Master seed; overrides the config file.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    csi: Option<CsiArg>,
    /// Channel-estimation error scale.
    #[arg(long)]
    beta: Option<f64>,
    /// Channel-estimation error exponent, in [0, 1].
    #[arg(long)]
    alpha: Option<f64>,
    /// Worker threads; 1 runs sequentially. Defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Also write one whitespace-separated file per curve, into DIR or next
    /// to the CSV.
    #[arg(long, value_name = "DIR", num_args = 0..=1)]
    plot_data: Option<Option<PathBuf>>,
}

impl CommonArgs {
    fn execution(&self) -> Execution {
        match self.threads {
            Some(t) => Execution::with_threads(t),
            None => Execution::Parallel,
        }
    }

    fn plot_dir(&self, out: Option<&Path>) -> Option<PathBuf> {
        self.plot_data.as_ref().map(|dir| match (dir, out) {
            (Some(d), _) => d.clone(),
            (None, Some(out)) => out.parent().map(Path::to_path_buf).unwrap_or_default(),
            (None, None) => PathBuf::from("."),
        })
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct PepArgs {
    /// Relay counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "3,5,10")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value = "bpsk")]
    constellation: ConstellationKind,
    /// SNR grid in dB: `start:stop:step` or a comma-separated list.
    #[arg(long, default_value = "0:12:2")]
    snr: String,
    /// Channel draws per point.
    #[arg(long, default_value_t = 10_000)]
    slots: u64,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ComplexityArgs {
    /// Antenna counts: `a..b` (inclusive) or a comma-separated list.
    #[arg(long, default_value = "1..4")]
    m: String,
    #[arg(long, default_value_t = 3)]
    n: u64,
    /// Distinct symbol distances (1 for BPSK, 3 for QPSK).
    #[arg(long, default_value_t = 1)]
    w: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => run(args),
        Command::Pep(args) => pep(args),
        Command::Complexity(args) => complexity(args),
    }
}

fn run(args: RunArgs) -> Result<()> {
    let mut config = ExperimentConfig::from_path(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let c = &args.common;
    if let Some(seed) = c.seed {
        config.seed = seed;
    }
    if let Some(csi) = c.csi {
        config.csi = csi.into();
    }
    config.beta = c.beta.or(config.beta);
    config.alpha = c.alpha.or(config.alpha);
    config.validate()?;

    let campaign = run_campaign(&config, c.execution())?;
    emit_csv(&campaign.records, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    for d in campaign.diagnostics.iter().filter(|d| d.packets_undelivered > 0) {
        eprintln!(
            "{} at {} dB: {} init slots, {} of {} packets still buffered at the end (dropped)",
            d.variant, config.snr_db[d.snr_index], d.init_slots, d.packets_undelivered, d.packets_created
        );
    }
    if let Some(dir) = c.plot_dir(Some(&args.out)) {
        write_ber_plot_data(&campaign.records, &dir)?;
    }
    Ok(())
}

fn pep(args: PepArgs) -> Result<()> {
    let c = &args.common;
    let config = PepSweepConfig {
        n_values: args.n.clone(),
        m: args.m,
        constellation: args.constellation,
        snr_db: parse_snr(&args.snr)?,
        slots: args.slots,
        csi: c.csi.map(CsiSetting::from).unwrap_or_default(),
        beta: c.beta,
        alpha: c.alpha,
        seed: c.seed.unwrap_or(0),
        n0: 1.0,
    };
    config.validate()?;
    let records = run_pep_sweep(&config, c.execution())?;
    match &args.out {
        Some(path) => emit_pep_csv(&records, path).with_context(|| format!("writing {}", path.display()))?,
        None => write_pep_csv(&records, io::stdout().lock())?,
    }
    if let Some(dir) = c.plot_dir(args.out.as_deref()) {
        write_pep_plot_data(&records, &dir)?;
    }
    Ok(())
}

fn complexity(args: ComplexityArgs) -> Result<()> {
    let ms = parse_m_range(&args.m)?;
    if args.w == 0 {
        bail!("--w must be at least 1");
    }
    let mut out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    writeln!(out, "m,n,w,x,mmd_additions,mmd_multiplications,qn_additions,qn_multiplications")?;
    for m in ms {
        let mmd = mmd_op_count(ComplexityModel { n: args.n, m, w: args.w });
        let qn = qn_op_count(args.n, m);
        writeln!(
            out,
            "{m},{},{},{},{},{},{},{}",
            args.n, args.w, mmd.evaluations, mmd.additions, mmd.multiplications, qn.additions, qn.multiplications
        )?;
    }
    out.flush()?;
    Ok(())
}

/// `start:stop:step` (inclusive of `stop`) or `a,b,c`.
fn parse_snr(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step): (f64, f64, f64) = (start.trim().parse()?, stop.trim().parse()?, step.trim().parse()?);
            if step.is_nan() || step <= 0.0 || stop < start {
                bail!("SNR range {spec:?} needs start <= stop and a positive step");
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| start + i as f64 * step).collect())
        }
        [_] => spec
            .split(',')
            .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad SNR value {s:?}")))
            .collect(),
        _ => bail!("SNR grid must be start:stop:step or a comma-separated list, got {spec:?}"),
    }
}

/// `a..b` or `a..=b` (both inclusive) or `a,b,c`.
fn parse_m_range(spec: &str) -> Result<Vec<u64>> {
    let values: Vec<u64> = if let Some((a, b)) = spec.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().trim_start_matches('=').parse()?);
        (a..=b).collect()
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<u64>().with_context(|| format!("bad antenna count {s:?}")))
            .collect::<Result<_>>()?
    };
    if values.is_empty() || values.contains(&0) {
        bail!("antenna counts must be non-empty and at least 1, got {spec:?}");
    }
    // 2^(M-1)·W^M overflows u64 well before M = 40.
    if values.iter().any(|&m| m > 16) {
        bail!("antenna counts above 16 are not supported");
    }
    Ok(values)
}
