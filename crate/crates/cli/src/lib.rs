//! Command-line front-end: regularize loop files, run the verification
//! suites, and write the worked-example gallery.
//!
//! Exit codes: 0 success, 1 verification failure, 2 I/O, parse or usage
//! error, 3 domain guard.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use loopreg::gallery::write_gallery;
use loopreg::io::{loop_to_json, read_loop, reports_to_json, write_reports_csv};
use loopreg::sc_verify::{run_suite, Suite, SuiteConfig};
use loopreg::{regularize_with_diagnostics, Config, Error};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

pub const REPORTS_JSON: &str = "reports.json";
pub const REPORTS_CSV: &str = "reports.csv";

#[derive(Debug, Parser)]
#[command(
    name = "loopreg",
    version,
    about = "Rescale-square regularization of discretized loops"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Grid size for generated loops (power of two, at least 8).
    #[arg(long, global = true, default_value_t = 64)]
    pub n: usize,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Minimum admissible modulus of a loop.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub eps_collision: f64,
    /// Minimum admissible slope of a diffeomorphism.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub delta_mono: f64,
    /// Highest Sobolev level reported in diagnostics.
    #[arg(long, global = true, default_value_t = 4)]
    pub k_max: u32,
    /// Tolerance override, e.g. `--tol fd_rel_tol=1e-7`. Repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE", value_parser = parse_tolerance)]
    pub tolerances: Vec<(String, f64)>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply R to a loop file; also writes `<stem>.diagnostics.json` next to the output.
    Regularize {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a verification suite: fd, sc1 or all.
    Verify {
        suite: Suite,
        /// Levels m for the sc1 suite.
        #[arg(long, value_delimiter = ',', default_value = "0,1")]
        k: Vec<u32>,
        /// Corrupt every differential by 1%; passes only if every case is caught.
        #[arg(long)]
        inject_corruption: bool,
        /// Directory for reports.json and reports.csv.
        #[arg(long, default_value = "reports")]
        out: PathBuf,
    },
    /// Write the worked examples, their expected outputs and a manifest.
    Gallery {
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_tolerance(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let value = value
        .trim()
        .parse::<f64>()
        .map_err(|e| format!("bad value in `{s}`: {e}"))?;
    Ok((name.trim().to_string(), value))
}

impl GlobalArgs {
    pub fn config(&self) -> loopreg::Result<Config> {
        let cfg = Config {
            n: self.n,
            eps_collision: self.eps_collision,
            delta_mono: self.delta_mono,
            seed: self.seed,
            k_max: self.k_max,
            tolerances: self.tolerances.iter().cloned().collect::<BTreeMap<_, _>>(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Collision { .. }
        | Error::NotDiffeomorphism { .. }
        | Error::Resolution { .. }
        | Error::NoConvergence { .. } => EXIT_GUARD,
        Error::GridSize(_)
        | Error::NonFinite
        | Error::Format(_)
        | Error::Config(_)
        | Error::Io(_)
        | Error::Json(_)
        | Error::Csv(_) => EXIT_IO,
    }
}

/// `out.json` -> `out.diagnostics.json`, in the same directory.
pub fn diagnostics_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.diagnostics.json"))
}

pub fn run(cli: Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: Cli) -> loopreg::Result<i32> {
    let cfg = cli.global.config()?;
    match cli.command {
        Command::Regularize { input, out } => regularize_file(&cfg, &input, &out),
        Command::Verify {
            suite,
            k,
            inject_corruption,
            out,
        } => verify(&cfg, suite, k, inject_corruption, &out),
        Command::Gallery { out } => {
            let manifest = write_gallery(&out, &cfg)?;
            println!(
                "wrote {} examples to {}",
                manifest.entries.len(),
                out.display()
            );
            Ok(EXIT_OK)
        }
    }
}

fn regularize_file(cfg: &Config, input: &Path, out: &Path) -> loopreg::Result<i32> {
    let z = read_loop(input)?;
    let (r, diagnostics) = regularize_with_diagnostics(&z, &cfg.guards(), cfg.k_max)?;
    fs::write(out, loop_to_json(&r))?;
    let sidecar = diagnostics_path(out);
    fs::write(&sidecar, serde_json::to_string_pretty(&diagnostics)?)?;
    println!(
        "n {} -> {}, winding {} -> {}, clock residual {:e}",
        diagnostics.n_input,
        diagnostics.n_output,
        diagnostics.winding_input,
        diagnostics.winding_output,
        diagnostics.clock_residual
    );
    Ok(EXIT_OK)
}

fn verify(
    cfg: &Config,
    suite: Suite,
    levels: Vec<u32>,
    inject_corruption: bool,
    out: &Path,
) -> loopreg::Result<i32> {
    let suite_cfg = SuiteConfig {
        levels,
        inject_corruption,
        ..SuiteConfig::from_config(cfg)?
    };
    let reports = run_suite(suite, &suite_cfg)?;
    fs::create_dir_all(out)?;
    fs::write(out.join(REPORTS_JSON), reports_to_json(&reports))?;
    write_reports_csv(out.join(REPORTS_CSV), &reports)?;

    let unexpected: Vec<_> = reports.iter().filter(|r| !r.as_expected()).collect();
    let controls = reports.iter().filter(|r| r.negative_control).count();
    println!(
        "{} cases ({} negative controls), {} unexpected; reports in {}",
        reports.len(),
        controls,
        unexpected.len(),
        out.display()
    );
    for r in &unexpected {
        let expected = if r.negative_control { "fail" } else { "pass" };
        let slope = r
            .fitted_slope
            .map_or_else(|| "none".to_string(), |s| format!("{s:.3}"));
        eprintln!(
            "unexpected: {} {} [{:?}] expected {expected}, slope {slope}, best error {:e}{}",
            r.map_name,
            r.base_descriptor,
            r.kind,
            r.best_error,
            r.note
                .as_deref()
                .map(|n| format!(", {n}"))
                .unwrap_or_default()
        );
    }
    Ok(if unexpected.is_empty() {
        EXIT_OK
    } else {
        EXIT_VERIFY
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_flags_parse() {
        assert_eq!(
            parse_tolerance("fd_rel_tol=1e-7").unwrap(),
            ("fd_rel_tol".to_string(), 1e-7)
        );
        assert!(parse_tolerance("fd_rel_tol").is_err());
        assert!(parse_tolerance("fd_rel_tol=abc").is_err());
    }

    #[test]
    fn sidecar_sits_next_to_output() {
        assert_eq!(
            diagnostics_path(Path::new("a/b/r.json")),
            PathBuf::from("a/b/r.diagnostics.json")
        );
        assert_eq!(
            diagnostics_path(Path::new("r")),
            PathBuf::from("r.diagnostics.json")
        );
    }

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(
            exit_code(&Error::Collision {
                min_modulus: 0.0,
                eps: 1e-8
            }),
            EXIT_GUARD
        );
        assert_eq!(exit_code(&Error::Format("x".into())), EXIT_IO);
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_IO);
    }

    #[test]
    fn bad_config_is_rejected() {
        let cli = Cli::try_parse_from(["loopreg", "--n", "12", "gallery", "--out", "x"]).unwrap();
        assert!(matches!(cli.global.config(), Err(Error::Config(_))));
        let cli = Cli::try_parse_from(["loopreg", "--tol", "bogus=1", "verify", "fd"]).unwrap();
        assert!(matches!(cli.global.config(), Err(Error::Config(_))));
        let cli = Cli::try_parse_from([
            "loopreg",
            "verify",
            "sc1",
            "--k",
            "0,1,2",
            "--tol",
            "sc1_margin=0.6",
        ])
        .unwrap();
        assert_eq!(
            cli.global
                .config()
                .unwrap()
                .thresholds()
                .unwrap()
                .sc1_margin,
            0.6
        );
        assert!(matches!(cli.command, Command::Verify { ref k, .. } if k == &[0, 1, 2]));
    }
}
