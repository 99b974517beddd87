//! CSV output and plot-data files.
//!
//! BER columns: `variant,snr_db,bits,errors,ber,ci_lo,ci_hi,slots,n_direct,n_rx,n_tx`.
//! PEP columns: `criterion,snr_db,n,mean_pep,ci_lo,ci_hi,slots`.
//! Floats carry six significant digits.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::{BerRecord, PepRecord};
use crate::error::{Error, Result};
use crate::selection::{Criterion, Variant};

const BER_HEADER: [&str; 11] = [
    "variant", "snr_db", "bits", "errors", "ber", "ci_lo", "ci_hi", "slots", "n_direct", "n_rx", "n_tx",
];
const PEP_HEADER: [&str; 7] = ["criterion", "snr_db", "n", "mean_pep", "ci_lo", "ci_hi", "slots"];

/// Six significant digits, fixed notation for moderate magnitudes and
/// scientific otherwise, trailing zeros trimmed.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    } else {
        let s = format!("{x:.5e}");
        let (mantissa, exponent) = s.split_once('e').expect("scientific format has an exponent");
        format!("{}e{exponent}", trim_fraction(mantissa))
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_ber_csv<W: Write>(records: &[BerRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BER_HEADER)?;
    for r in records {
        w.write_record([
            r.variant.name().to_string(),
            format_sig6(r.snr_db),
            r.bits.to_string(),
            r.errors.to_string(),
            format_sig6(r.ber),
            format_sig6(r.ci_lo),
            format_sig6(r.ci_hi),
            r.slots.to_string(),
            r.n_direct.to_string(),
            r.n_rx.to_string(),
            r.n_tx.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes BER records to `path`. An empty record list is a usage error.
pub fn emit_csv(records: &[BerRecord], path: impl AsRef<Path>) -> Result<()> {
    if records.is_empty() {
        return Err(Error::usage("no records to write"));
    }
    write_ber_csv(records, BufWriter::new(File::create(path)?))
}

pub fn read_ber_csv<R: Read>(input: R) -> Result<Vec<BerRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    check_header(reader.headers()?, &BER_HEADER)?;
    reader
        .deserialize::<BerRecord>()
        .map(|row| row.map_err(Error::from))
        .collect()
}

pub fn write_pep_csv<W: Write>(records: &[PepRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PEP_HEADER)?;
    for r in records {
        w.write_record([
            r.criterion.name().to_string(),
            format_sig6(r.snr_db),
            r.n.to_string(),
            format_sig6(r.mean_pep),
            format_sig6(r.ci_lo),
            format_sig6(r.ci_hi),
            r.slots.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_pep_csv(records: &[PepRecord], path: impl AsRef<Path>) -> Result<()> {
    if records.is_empty() {
        return Err(Error::usage("no records to write"));
    }
    write_pep_csv(records, BufWriter::new(File::create(path)?))
}

pub fn read_pep_csv<R: Read>(input: R) -> Result<Vec<PepRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    check_header(reader.headers()?, &PEP_HEADER)?;
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        let field = |i: usize| row.get(i).unwrap_or_default();
        let num = |i: usize| -> Result<f64> {
            field(i)
                .parse()
                .map_err(|_| Error::usage(format!("bad number {:?} in column {}", field(i), PEP_HEADER[i])))
        };
        records.push(PepRecord {
            criterion: field(0).parse::<Criterion>()?,
            snr_db: num(1)?,
            n: num(2)? as usize,
            mean_pep: num(3)?,
            ci_lo: num(4)?,
            ci_hi: num(5)?,
            slots: num(6)? as u64,
        });
    }
    Ok(records)
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    if found.iter().ne(expected.iter().copied()) {
        return Err(Error::usage(format!(
            "unexpected CSV header {:?}, expected {}",
            found.iter().collect::<Vec<_>>(),
            expected.join(",")
        )));
    }
    Ok(())
}

/// One whitespace-separated `snr_db ber ci_lo ci_hi` file per variant,
/// `ber_<variant>.dat`, in `dir`. Returns the written paths.
pub fn write_ber_plot_data(records: &[BerRecord], dir: impl AsRef<Path>) -> Result<Vec<std::path::PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut variants: Vec<Variant> = records.iter().map(|r| r.variant).collect();
    variants.sort();
    variants.dedup();
    let mut paths = Vec::new();
    for variant in variants {
        let path = dir.join(format!("ber_{variant}.dat"));
        let mut f = BufWriter::new(File::create(&path)?);
        writeln!(f, "# {variant}: snr_db ber ci_lo ci_hi (log-y)")?;
        for r in records.iter().filter(|r| r.variant == variant) {
            writeln!(
                f,
                "{} {} {} {}",
                format_sig6(r.snr_db),
                format_sig6(r.ber),
                format_sig6(r.ci_lo),
                format_sig6(r.ci_hi)
            )?;
        }
        f.flush()?;
        paths.push(path);
    }
    Ok(paths)
}

/// One `snr_db mean_pep ci_lo ci_hi` file per `(criterion, N)` curve,
/// `pep_<criterion>_n<N>.dat`, in `dir`.
pub fn write_pep_plot_data(records: &[PepRecord], dir: impl AsRef<Path>) -> Result<Vec<std::path::PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut curves: Vec<(Criterion, usize)> = Vec::new();
    for r in records {
        if !curves.contains(&(r.criterion, r.n)) {
            curves.push((r.criterion, r.n));
        }
    }
    let mut paths = Vec::new();
    for (criterion, n) in curves {
        let path = dir.join(format!("pep_{criterion}_n{n}.dat"));
        let mut f = BufWriter::new(File::create(&path)?);
        writeln!(f, "# {criterion} N={n}: snr_db mean_pep ci_lo ci_hi (log-y)")?;
        for r in records.iter().filter(|r| r.criterion == criterion && r.n == n) {
            writeln!(
                f,
                "{} {} {} {}",
                format_sig6(r.snr_db),
                format_sig6(r.mean_pep),
                format_sig6(r.ci_lo),
                format_sig6(r.ci_hi)
            )?;
        }
        f.flush()?;
        paths.push(path);
    }
    Ok(paths)
}
