//! Command-line front end.
//!
//! Exit codes: 0 ok, 1 parse or data error, 2 hypothesis failure,
//! 3 verification failure, 4 non-power-log data.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::asymptotics::{fit_growth_with, flatness_exponent_with, read_samples, AsymptoticProfile, FitConfig};
use crate::error::{Error, Result};
use crate::format::read_sum_file;
use crate::options::Options;
use crate::oracle::{brute_sup, brute_sup_unbounded, OracleResult};
use crate::supremum::{evaluation_witnesses, witness_set, WitnessCertificate};
use crate::termalg::PreparedSum;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;
pub const EXIT_NON_POWER_LOG: i32 = 4;

/// Points in the `--emit-plot` curve.
pub const PLOT_POINTS: usize = 1024;

#[derive(Debug, Parser)]
#[command(
    name = "supcert",
    version,
    about = "Certified approximate suprema of prepared power-log sums"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Args)]
struct CertFlags {
    /// Grid size for brute-force searches.
    #[arg(long, default_value_t = 4096)]
    budget: usize,
    /// Candidate point sets tried by sampling searches.
    #[arg(long, default_value_t = 64)]
    trials: usize,
    /// RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Print JSON instead of the text report.
    #[arg(long)]
    json: bool,
    /// Write (y, |h(y)|) samples and witness markers as CSV.
    #[arg(long, value_name = "PATH")]
    emit_plot: Option<PathBuf>,
}

impl CertFlags {
    fn options(&self) -> Options {
        let mut o = self.seed.map(Options::with_seed).unwrap_or_default();
        o.budget = self.budget;
        o.trials = self.trials;
        o
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Dir {
    X,
    Eps,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Certified approximate supremum with witnesses.
    Sup {
        file: PathBuf,
        #[command(flatten)]
        flags: CertFlags,
    },
    /// Compare the certificate against a brute-force oracle.
    Verify {
        file: PathBuf,
        #[command(flatten)]
        flags: CertFlags,
    },
    /// Fit a growth profile c x^r (log x)^l to two-column samples.
    Asymptote {
        csv: PathBuf,
        #[arg(long, value_enum, default_value = "x")]
        direction: Dir,
        #[arg(long, default_value_t = 8)]
        max_l: u32,
        #[arg(long)]
        json: bool,
    },
    /// Evaluation witnesses (real exponents only).
    Witnesses {
        file: PathBuf,
        #[command(flatten)]
        flags: CertFlags,
    },
}

fn exit_code(e: &Error) -> i32 {
    if e.is_hypothesis_failure() {
        EXIT_HYPOTHESIS
    } else {
        EXIT_DATA
    }
}

/// Runs the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_DATA
                }
            };
        }
    };
    let res = match &cli.cmd {
        Command::Sup { file, flags } => cmd_sup(file, flags, out),
        Command::Verify { file, flags } => cmd_verify(file, flags, out),
        Command::Asymptote {
            csv,
            direction,
            max_l,
            json,
        } => cmd_asymptote(csv, *direction, *max_l, *json, out, err),
        Command::Witnesses { file, flags } => cmd_witnesses(file, flags, out),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            let kind = if e.is_hypothesis_failure() {
                "hypothesis failure"
            } else {
                "error"
            };
            let _ = writeln!(err, "{kind}: {e}");
            exit_code(&e)
        }
    }
}

fn load(file: &Path) -> Result<PreparedSum> {
    read_sum_file(file)?.to_prepared()
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn write_json<T: Serialize>(out: &mut dyn Write, v: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Error::Data(e.to_string()))?;
    writeln!(out, "{s}").map_err(io)
}

fn fmt_upper(v: f64) -> String {
    if v.is_finite() {
        format!("{v:e}")
    } else {
        "inf".into()
    }
}

fn write_certificate(out: &mut dyn Write, cert: &WitnessCertificate) -> Result<()> {
    let w = |out: &mut dyn Write, s: String| writeln!(out, "{s}").map_err(io);
    w(out, format!("score       {:.12e}", cert.score))?;
    w(out, format!("c_total     {:.6e}", cert.c_total))?;
    w(out, format!("c_lower     {:.6e}", cert.c_lower))?;
    w(out, format!("c_upper     {:.6e}", cert.c_upper))?;
    w(out, format!("confidence  {}", name(cert.confidence)))?;
    w(
        out,
        format!("range       ({:e}, {})", cert.range.0, fmt_upper(cert.range.1)),
    )?;
    if let Some(d) = cert.dominant {
        w(out, format!("dominant    {}", name(d)))?;
    }
    if let Some(o) = &cert.osc_component {
        w(
            out,
            format!(
                "osc         form={} x={:.6e} weight={:.6e} lambda={:.6e} p={:.6e}",
                name(o.form),
                o.x,
                o.weight,
                o.lambda,
                o.p_window
            ),
        )?;
    }
    w(out, format!("witnesses   {}", cert.witnesses.len()))?;
    w(
        out,
        format!("  {:>22}  {:>8}  {:>22}  {:>22}", "y", "regime", "|part|", "|h|"),
    )?;
    for x in &cert.witnesses {
        w(
            out,
            format!(
                "  {:>22.15e}  {:>8}  {:>22.15e}  {:>22.15e}",
                x.y,
                name(x.regime),
                x.value,
                x.h_abs
            ),
        )?;
    }
    for c in &cert.checks {
        w(out, format!("check       {}: {:.6e} <= {:.6e}", c.name, c.lhs, c.rhs))?;
    }
    Ok(())
}

/// Serialized name of a unit enum variant.
fn name<T: Serialize>(v: T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

/// Range searched by the oracle and by `--emit-plot`.
fn search_range(h: &PreparedSum, cert: &WitnessCertificate) -> (f64, f64) {
    let d = h.domain();
    if d.balanced() {
        return (d.lower(), d.upper());
    }
    let (lo, hi) = cert.range;
    if hi.is_finite() {
        return (lo, hi);
    }
    let wmax = cert.witnesses.iter().map(|w| w.y).fold(lo, f64::max);
    (lo, (1e3 * lo).max(1e7).max(1e3 * wmax))
}

fn emit_plot(path: &Path, h: &PreparedSum, cert: &WitnessCertificate) -> Result<()> {
    let (lo, hi) = search_range(h, cert);
    let mut wtr = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    wtr.write_record(["y", "abs_h", "witness"]).map_err(csv_err)?;
    let (t0, t1) = ((lo * (1.0 + 1e-9)).ln(), (hi * (1.0 - 1e-9)).ln());
    for i in 0..PLOT_POINTS {
        let t = t0 + (t1 - t0) * i as f64 / (PLOT_POINTS - 1) as f64;
        let v = h.eval_ln(t).norm();
        wtr.write_record([t.exp().to_string(), v.to_string(), "0".into()])
            .map_err(csv_err)?;
    }
    for x in &cert.witnesses {
        wtr.write_record([x.y.to_string(), x.h_abs.to_string(), "1".into()])
            .map_err(csv_err)?;
    }
    wtr.flush().map_err(io)
}

fn cmd_sup(file: &Path, flags: &CertFlags, out: &mut dyn Write) -> Result<i32> {
    let h = load(file)?;
    let cert = witness_set(&h, &flags.options())?;
    if let Some(p) = &flags.emit_plot {
        emit_plot(p, &h, &cert)?;
    }
    if flags.json {
        write_json(out, &cert)?;
    } else {
        write_certificate(out, &cert)?;
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub oracle: OracleResult,
    pub score: f64,
    /// `sup_oracle / score`, with `0/0 = 1`.
    pub ratio: f64,
    pub c_total: f64,
    pub pass: bool,
    pub certificate: WitnessCertificate,
}

/// Brute-force sup over the certified range.
pub fn oracle_for(h: &PreparedSum, cert: &WitnessCertificate, budget: usize) -> Result<OracleResult> {
    let (lo, hi) = search_range(h, cert);
    let budget = budget.max(64);
    if !cert.range.1.is_finite() && h.terms().iter().all(|t| t.exp.beta_f64() < 0.0) {
        return brute_sup_unbounded(h, lo, hi, budget);
    }
    brute_sup(h, lo, hi, budget)
}

/// `sup / score` with the `0/0 = 1` convention.
pub fn ratio(sup: f64, score: f64) -> f64 {
    if score == 0.0 {
        if sup == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        sup / score
    }
}

fn cmd_verify(file: &Path, flags: &CertFlags, out: &mut dyn Write) -> Result<i32> {
    let h = load(file)?;
    let opts = flags.options();
    let cert = witness_set(&h, &opts)?;
    if let Some(p) = &flags.emit_plot {
        emit_plot(p, &h, &cert)?;
    }
    let oracle = oracle_for(&h, &cert, opts.budget)?;
    let r = ratio(oracle.sup_estimate, cert.score);
    let pass = r >= 1.0 / cert.c_total && r <= cert.c_total;
    let report = VerifyReport {
        oracle,
        score: cert.score,
        ratio: r,
        c_total: cert.c_total,
        pass,
        certificate: cert,
    };
    if flags.json {
        write_json(out, &report)?;
    } else {
        let w = |out: &mut dyn Write, s: String| writeln!(out, "{s}").map_err(io);
        w(
            out,
            format!(
                "oracle sup  {:.12e} at y = {:.12e}",
                report.oracle.sup_estimate, report.oracle.argmax
            ),
        )?;
        w(out, format!("score       {:.12e}", report.score))?;
        w(out, format!("ratio       {:.6e}", report.ratio))?;
        w(out, format!("c_total     {:.6e}", report.c_total))?;
        w(out, format!("result      {}", if pass { "pass" } else { "FAIL" }))?;
    }
    Ok(if pass { EXIT_OK } else { EXIT_VERIFY })
}

fn profile_line(p: &AsymptoticProfile) -> String {
    let r = match p.r_exact {
        Some(q) if *q.denom() == 1 => q.numer().to_string(),
        Some(q) => format!("{}/{}", q.numer(), q.denom()),
        None => format!("{} (unsnapped)", p.r),
    };
    format!("r={r} l={}", p.l)
}

fn cmd_asymptote(
    csv: &Path,
    dir: Dir,
    max_l: u32,
    json: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let samples = read_samples(csv)?;
    let cfg = FitConfig {
        max_l,
        ..FitConfig::default()
    };
    let p = match dir {
        Dir::X => fit_growth_with(&samples, &cfg)?,
        Dir::Eps => flatness_exponent_with(&samples, &cfg)?,
    };
    if json {
        write_json(out, &p)?;
    } else {
        let w = |out: &mut dyn Write, s: String| writeln!(out, "{s}").map_err(io);
        w(out, profile_line(&p))?;
        w(out, format!("c_band [{:.6e}, {:.6e}]", p.c_band.0, p.c_band.1))?;
        if let Some(f) = &p.fit {
            w(
                out,
                format!("residual {:.3e} curvature_t {:.3}", f.residual, f.curvature_t),
            )?;
            if let Some(c) = f.correction {
                w(out, format!("correction {c:.6e}"))?;
            }
        }
    }
    if p.non_power_log() {
        let _ = writeln!(err, "non-power-log: no c x^r (log x)^l model fits these samples");
        return Ok(EXIT_NON_POWER_LOG);
    }
    Ok(EXIT_OK)
}

fn cmd_witnesses(file: &Path, flags: &CertFlags, out: &mut dyn Write) -> Result<i32> {
    let h = load(file)?;
    let cert = evaluation_witnesses(&h, &flags.options())?;
    if let Some(p) = &flags.emit_plot {
        emit_plot(p, &h, &cert)?;
    }
    if flags.json {
        write_json(out, &cert.witnesses)?;
    } else {
        for x in &cert.witnesses {
            writeln!(out, "{:.15e}\t{:.15e}", x.y, x.h_abs).map_err(io)?;
        }
    }
    Ok(EXIT_OK)
}
