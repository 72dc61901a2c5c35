//! Command-line front end: run verification suites, inspect spectral
//! densities, simulate Doppler and conformal transfer scenarios, and export
//! CSV/report files.
//!
//! Exit codes: 0 success (and a passing suite for `verify`), 1 failed suite,
//! 2 invalid flags or configuration, 3 I/O failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::error::{LabError, Result};
use crate::flows::{transfer_scenario, TransferResult};
use crate::fock::FockSpace;
use crate::grid::FrequencyGrid;
use crate::observables::{spectrum_rows, GeneratorSet};
use crate::spectral::GeneratorKind;
use crate::states::{build_state, StateSpec};
use crate::verify::{run_check, run_suite, CheckCase, RepFilter, VerifyConfig};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_SUITE_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Parser)]
#[command(
    name = "conflab",
    version,
    about = "Numerical laboratory for the conformal algebra of a 1-D massless scalar field"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Frequency-window and Fock-space flags shared by every state-based command.
#[derive(Args)]
struct GridArgs {
    /// Lower edge of the frequency window
    #[arg(long, default_value_t = 1.0)]
    omega_min: f64,
    /// Upper edge of the frequency window
    #[arg(long, default_value_t = 9.0)]
    omega_max: f64,
    /// Number of grid modes
    #[arg(long, default_value_t = 64)]
    modes: usize,
    /// Largest photon sector
    #[arg(long, default_value_t = 3)]
    n_max: usize,
    /// Reduced Planck constant
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
}

impl GridArgs {
    /// Validate flags and build the grid context before any sector matrix
    /// is allocated.
    fn build(&self) -> Result<(Arc<FrequencyGrid>, Arc<FockSpace>, GeneratorSet)> {
        let grid = Arc::new(FrequencyGrid::build_with_hbar(
            self.omega_min,
            self.omega_max,
            self.modes,
            self.hbar,
        )?);
        let space = FockSpace::build(self.modes, self.n_max)?;
        let gens = GeneratorSet::build(grid.as_ref(), &space)?;
        Ok((grid, space, gens))
    }
}

fn parse_rep(s: &str) -> std::result::Result<RepFilter, String> {
    RepFilter::from_str(s).map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suite (or one named check) and report pass/fail
    Verify {
        #[command(flatten)]
        grid: GridArgs,
        /// Realization(s) to exercise: grid, ladder or both
        #[arg(long, default_value = "both", value_parser = parse_rep)]
        rep: RepFilter,
        /// Seed for the deterministic probe families
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Levels of the discrete-series ladder realization
        #[arg(long, default_value_t = 40)]
        ladder_levels: usize,
        /// Top ladder levels excluded from probe support
        #[arg(long, default_value_t = 12)]
        ladder_margin: usize,
        /// Run a single registered check instead of the full registry
        #[arg(long)]
        check: Option<String>,
        /// Write the JSON report to this path
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Write the per-mode energy/dilatation spectral densities of a state
    Spectrum {
        #[command(flatten)]
        grid: GridArgs,
        /// State specification, e.g. "single:omega0=5,sigma=0.4,u0=0"
        #[arg(long)]
        state: String,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Dilatation (Doppler) transfer scenario: track U/Ω along the flow
    Doppler {
        #[command(flatten)]
        grid: GridArgs,
        /// State specification, e.g. "single:omega0=5,sigma=0.4,u0=0"
        #[arg(long)]
        state: String,
        /// Total rapidity of the dilatation flow
        #[arg(long, default_value_t = 0.3)]
        theta: f64,
        /// Number of flow increments sampled in the trajectory
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Conformal (accelerated-frame) transfer scenario
    Transfer {
        #[command(flatten)]
        grid: GridArgs,
        /// State specification, e.g. "single:omega0=5,sigma=0.4,u0=0.5"
        #[arg(long)]
        state: String,
        /// Total parameter of the conformal flow
        #[arg(long, default_value_t = 0.1)]
        s: f64,
        /// Number of flow increments sampled in the trajectory
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print sector dimensions and dense-block memory estimates
    SectorInfo {
        /// Number of modes
        #[arg(long, default_value_t = 64)]
        modes: usize,
        /// Largest photon sector to enumerate
        #[arg(long, default_value_t = 3)]
        photons: usize,
    },
}

/// Entry point used by the binary; parses `argv` and maps every outcome to
/// the documented exit codes.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                LabError::Io { .. } => EXIT_IO,
                _ => EXIT_USAGE,
            }
        }
    }
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Verify {
            grid,
            rep,
            seed,
            ladder_levels,
            ladder_margin,
            check,
            json,
        } => {
            let cfg = VerifyConfig {
                omega_min: grid.omega_min,
                omega_max: grid.omega_max,
                modes: grid.modes,
                n_max: grid.n_max,
                hbar: grid.hbar,
                seed,
                rep,
                ladder_levels,
                ladder_margin,
            };
            match check {
                Some(id) => {
                    let cases = run_check(&id, &cfg)?;
                    let pass = cases.iter().all(|c| c.pass);
                    print_cases(&cases);
                    if let Some(path) = json {
                        write_file(&path, &serde_json::to_string_pretty(&cases).unwrap())?;
                    }
                    Ok(if pass { EXIT_PASS } else { EXIT_SUITE_FAILED })
                }
                None => {
                    let report = run_suite(&cfg)?;
                    print_cases(&report.cases);
                    println!(
                        "suite {}: {} cases, {}",
                        report.suite,
                        report.cases.len(),
                        if report.pass { "PASS" } else { "FAIL" }
                    );
                    if let Some(path) = json {
                        write_file(&path, &serde_json::to_string_pretty(&report).unwrap())?;
                    }
                    Ok(if report.pass { EXIT_PASS } else { EXIT_SUITE_FAILED })
                }
            }
        }
        Command::Spectrum {
            grid,
            state,
            output,
        } => {
            let (g, space, gens) = grid.build()?;
            let spec = StateSpec::from_str(&state)?;
            let st = build_state(&spec, &g, &space)?;
            let rows = spectrum_rows(&gens, &st)?;
            let mut csv = String::from("omega,weight,rho0_mean,rho1_mean\n");
            for r in rows {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    r.omega, r.weight, r.rho0_mean, r.rho1_mean
                ));
            }
            emit(output.as_deref(), &csv)?;
            Ok(EXIT_PASS)
        }
        Command::Doppler {
            grid,
            state,
            theta,
            steps,
            output,
        } => scenario(&grid, &state, GeneratorKind::Dilatation, theta, steps, output),
        Command::Transfer {
            grid,
            state,
            s,
            steps,
            output,
        } => scenario(&grid, &state, GeneratorKind::Conformal, s, steps, output),
        Command::SectorInfo { modes, photons } => {
            let space = FockSpace::build(modes, photons)?;
            for n in 0..=photons {
                let dim = space.sector(n).dimension();
                let dense_mib = (dim as f64) * (dim as f64) * 16.0 / (1024.0 * 1024.0);
                println!(
                    "sector {n}: dimension {dim} (dense block ~{dense_mib:.1} MiB)"
                );
            }
            Ok(EXIT_PASS)
        }
    }
}

fn scenario(
    grid: &GridArgs,
    state: &str,
    kind: GeneratorKind,
    s_total: f64,
    steps: usize,
    output: Option<PathBuf>,
) -> Result<i32> {
    let (g, space, gens) = grid.build()?;
    let spec = StateSpec::from_str(state)?;
    let st = build_state(&spec, &g, &space)?;
    let result = transfer_scenario(&gens, &st, kind, s_total, steps)?;
    emit(output.as_deref(), &trajectory_csv(&result))?;
    Ok(EXIT_PASS)
}

fn trajectory_csv(result: &TransferResult) -> String {
    let mut csv = String::from(
        "s,mean_U,mean_Omega,var_U,var_Omega,classical_u,classical_omega,vacuum_weight\n",
    );
    for r in &result.rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.s,
            r.mean_u,
            r.mean_omega,
            r.var_u,
            r.var_omega,
            r.classical_u,
            r.classical_omega,
            r.vacuum_weight
        ));
    }
    csv
}

fn print_cases(cases: &[CheckCase]) {
    for c in cases {
        let order = c
            .order
            .map(|o| format!(" order {o:.2}"))
            .unwrap_or_default();
        println!(
            "{} {:40} residual {:.3e}  tol {:.3e}{}  {}ms  {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.check_id,
            c.residual,
            c.tolerance,
            order,
            c.runtime_ms,
            c.params
        );
    }
}

fn emit(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => write_file(p, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|source| LabError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn help_exits_zero_and_bad_flag_exits_two() {
        assert_eq!(run_cli(["conflab", "--help"]), EXIT_PASS);
        assert_eq!(run_cli(["conflab", "verify", "--no-such-flag"]), EXIT_USAGE);
        assert_eq!(run_cli(["conflab", "nonsense"]), EXIT_USAGE);
    }

    #[test]
    fn sector_info_reports_dimensions() {
        assert_eq!(
            run_cli(["conflab", "sector-info", "--modes", "5", "--photons", "3"]),
            EXIT_PASS
        );
    }

    #[test]
    fn bad_state_spec_exits_two() {
        assert_eq!(
            run_cli([
                "conflab", "spectrum", "--modes", "8", "--n-max", "1", "--state", "bogus:x=1"
            ]),
            EXIT_USAGE
        );
    }

    #[test]
    fn unwritable_output_exits_three() {
        assert_eq!(
            run_cli([
                "conflab",
                "spectrum",
                "--modes",
                "8",
                "--n-max",
                "1",
                "--state",
                "single:omega0=5,sigma=0.4,u0=0",
                "--output",
                "/no/such/dir/out.csv"
            ]),
            EXIT_IO
        );
    }
}
