//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use crate::channels;
use crate::compression::{build_scheme_capped, converse_scheme_fidelity, scheme_fidelity};
use crate::error::{Error, Result};
use crate::io;
use crate::selftest;
use crate::states;
use crate::typicality::{SpectralSource, DEFAULT_DENSE_CAP};

/// Dense and spectral fidelities must agree this closely for a row to be
/// marked as checked.
pub const DENSE_AGREEMENT: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(
    name = "fermicode",
    version,
    about = "Fermionic source compression under parity superselection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entropy and parity-labelled spectrum of a state file.
    Entropy(EntropyArgs),
    /// Rate and fidelity of the typical-subspace scheme over a grid of block lengths.
    Compress(CompressArgs),
    /// Best fidelity reachable at a rate below the entropy.
    Converse(ConverseArgs),
    /// Parity channel versus the identity.
    ParityDemo(OutArgs),
    /// Run the built-in invariant suites.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[arg(long)]
    pub state: PathBuf,
    /// Also write a JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompressArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    /// Block lengths: `a,b,c` or `start:end:step` (inclusive).
    #[arg(long = "n")]
    pub n: NGrid,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest `N·L` for which the channels are built as matrices.
    #[arg(long = "dense-cap", default_value_t = DEFAULT_DENSE_CAP)]
    pub dense_cap: usize,
}

#[derive(Debug, Args)]
pub struct ConverseArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long)]
    pub rate: f64,
    #[arg(long = "n")]
    pub n: NGrid,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long = "dense-cap", default_value_t = DEFAULT_DENSE_CAP)]
    pub dense_cap: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Validate this state file as an extra suite.
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Ascending, deduplicated list of block lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGrid(pub Vec<usize>);

impl FromStr for NGrid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| format!("invalid block length {t:?}: {e}"))
        };
        let mut values: Vec<usize> = if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let [a, b, step] = parts.as_slice() else {
                return Err(format!("range must be start:end:step, got {s:?}"));
            };
            let (a, b, step) = (parse(a)?, parse(b)?, parse(step)?);
            if step == 0 || a > b {
                return Err(format!("empty range {s:?}"));
            }
            (a..=b).step_by(step).collect()
        } else {
            s.split(',')
                .map(parse)
                .collect::<std::result::Result<_, _>>()?
        };
        values.sort_unstable();
        values.dedup();
        if values.is_empty() || values[0] == 0 {
            return Err("block lengths must be positive and the grid nonempty".into());
        }
        Ok(NGrid(values))
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )))
    }
}

pub fn entropy_report(args: &EntropyArgs) -> Result<(String, serde_json::Value)> {
    let loaded = io::load_state(&args.state)?;
    let rho = &loaded.state;
    let s = states::entropy(rho)?;
    let spectrum = rho.spectrum()?;
    let mut text = String::new();
    writeln!(text, "S = {s:.6} bits").unwrap();
    writeln!(text, "modes = {}", rho.modes()).unwrap();
    writeln!(
        text,
        "parity residual = {:.3e}",
        loaded.diagnostics.parity_residual
    )
    .unwrap();
    writeln!(
        text,
        "min eigenvalue = {:.6}",
        loaded.diagnostics.min_eigenvalue
    )
    .unwrap();
    writeln!(text, "spectrum:").unwrap();
    let mut entries = Vec::new();
    for (value, parity) in spectrum.eigen.eigenvalues.iter().zip(&spectrum.parities) {
        writeln!(text, "  {value:.6} {parity}").unwrap();
        entries.push(json!({"eigenvalue": value, "parity": parity.to_string()}));
    }
    let report = json!({
        "entropy_bits": s,
        "modes": rho.modes(),
        "parity_residual": loaded.diagnostics.parity_residual,
        "min_eigenvalue": loaded.diagnostics.min_eigenvalue,
        "spectrum": entries,
    });
    Ok((text, report))
}

pub fn compress_csv(args: &CompressArgs) -> Result<String> {
    check_epsilon(args.epsilon)?;
    let rho = io::load_state(&args.state)?.state;
    let rows = args
        .n
        .0
        .par_iter()
        .map(|&n| {
            let scheme = build_scheme_capped(&rho, n, args.epsilon, args.dense_cap)?;
            let f = scheme_fidelity(&scheme)?;
            let checked = f.dense.is_some() && f.discrepancy() <= DENSE_AGREEMENT;
            Ok(format!(
                "{},{:.6},{},{:.6},{:.6},{:.6},{:.6},{}",
                n,
                args.epsilon,
                scheme.target_modes,
                scheme.rate,
                scheme.typical_mass,
                f.spectral,
                1.0 - f.spectral,
                checked
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = format!(
        "# fermicode compress seed={} epsilon={:.6}\n",
        args.seed, args.epsilon
    );
    out.push_str("N,epsilon,M,rate,typical_mass,fidelity,delta,dense_checked\n");
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

pub fn converse_csv(args: &ConverseArgs) -> Result<String> {
    let rho = io::load_state(&args.state)?.state;
    let source = SpectralSource::from_state(&rho)?;
    let rows = args
        .n
        .0
        .par_iter()
        .map(|&n| {
            let r = converse_scheme_fidelity(&source, n, args.rate)?;
            Ok(format!(
                "{},{:.6},{:.6},{:.6}",
                n, args.rate, r.best_mass, r.fidelity
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = format!(
        "# fermicode converse seed={} rate={:.6}\n",
        args.seed, args.rate
    );
    out.push_str("N,R,best_mass,fidelity_bound\n");
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

pub fn parity_demo_report() -> Result<String> {
    let r = channels::parity_counterexample(21)?;
    let mut text = String::new();
    writeln!(text, "parity channel versus identity, one mode").unwrap();
    writeln!(
        text,
        "local action residual ({} states) = {:.6}",
        r.grid_points, r.local_residual
    )
    .unwrap();
    writeln!(text, "extended trace norm = {:.6}", r.extended_trace_norm).unwrap();
    writeln!(
        text,
        "extended trace distance = {:.6}",
        r.extended_trace_distance
    )
    .unwrap();
    writeln!(
        text,
        "entanglement fidelity = {:.6}",
        r.entanglement_fidelity
    )
    .unwrap();
    let verdict = if r.local_residual <= 1e-12 && r.extended_trace_distance > 0.25 {
        "verdict: input/output fidelity alone would mislabel the parity channel as ideal"
    } else {
        "verdict: unexpected values"
    };
    writeln!(text, "{verdict}").unwrap();
    Ok(text)
}

/// Returns the report and whether every suite passed.
pub fn selftest_report(args: &SelftestArgs) -> (String, bool) {
    let mut text = format!(
        "# fermicode selftest seed={} dense_cap={}\n",
        args.seed, args.dense_cap
    );
    let mut failures = 0;
    if let Some(path) = &args.state {
        match io::load_state(path) {
            Ok(loaded) => writeln!(
                text,
                "PASS state-file: parity residual {:.3e}, min eigenvalue {:.3e}",
                loaded.diagnostics.parity_residual, loaded.diagnostics.min_eigenvalue
            )
            .unwrap(),
            Err(e) => {
                failures += 1;
                writeln!(text, "FAIL state-file: {}: {e}", e.kind()).unwrap();
            }
        }
    }
    for r in selftest::run_all(args.dense_cap, args.seed) {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        if !r.passed {
            failures += 1;
        }
        writeln!(text, "{tag} {}: {}", r.name, r.detail).unwrap();
    }
    if failures == 0 {
        writeln!(text, "all suites passed").unwrap();
    } else {
        writeln!(text, "{failures} suite(s) failed").unwrap();
    }
    (text, failures == 0)
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Exit code 0 on success, 1 when a selftest suite fails, 2 on usage or
/// input errors.
pub fn run(cli: Cli) -> i32 {
    let outcome: Result<i32> = (|| match &cli.command {
        Command::Entropy(args) => {
            let (text, report) = entropy_report(args)?;
            print!("{text}");
            if let Some(path) = &args.out {
                std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
            }
            Ok(0)
        }
        Command::Compress(args) => {
            emit(&compress_csv(args)?, args.out.as_ref())?;
            Ok(0)
        }
        Command::Converse(args) => {
            emit(&converse_csv(args)?, args.out.as_ref())?;
            Ok(0)
        }
        Command::ParityDemo(args) => {
            emit(&parity_demo_report()?, args.out.as_ref())?;
            Ok(0)
        }
        Command::Selftest(args) => {
            let (text, passed) = selftest_report(args);
            emit(&text, args.out.as_ref())?;
            Ok(if passed { 0 } else { 1 })
        }
    })();
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.kind());
            2
        }
    }
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    }
}
