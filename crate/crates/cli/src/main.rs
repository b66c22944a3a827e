//! `qsat`: random 3-SAT instances, adiabatic spectra and Brody statistics.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;

use qsat::aqc::build_system;
use qsat::experiment::{self, run_classical_baseline, run_experiment, ComplexityCurve, ExperimentConfig};
use qsat::gp::{calibration_report, CalibrationParams};
use qsat::plot::{emit_plots, spectrum_svg};
use qsat::sat::{dpll_solve, emit_dimacs, generate_instance, parse_dimacs};
use qsat::spectrum::{spectrum_at, sweep, SweepResult};
use qsat::stats::{histogram, max_brody, unfold, FitParams, UnfoldParams};
use qsat::Error;

#[derive(Parser)]
#[command(name = "qsat", version, about = "Classical and spectral complexity of random 3-SAT")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct StatsArgs {
    /// Degree of the staircase polynomial used for unfolding.
    #[arg(long, default_value_t = 6)]
    degree: usize,
    /// Fraction of levels trimmed from each spectrum edge.
    #[arg(long, default_value_t = 0.05)]
    trim: f64,
    /// Fits on fewer spacings are flagged invalid.
    #[arg(long, default_value_t = qsat::stats::DEFAULT_MIN_SAMPLE)]
    min_sample: usize,
    /// Upper bound of the Brody search interval.
    #[arg(long, default_value_t = qsat::stats::Q_SEARCH_MAX)]
    q_upper: f64,
    /// Let invalid fits compete for the per-instance maximum.
    #[arg(long)]
    include_invalid: bool,
}

impl StatsArgs {
    fn unfold(&self) -> UnfoldParams {
        UnfoldParams {
            poly_degree: self.degree,
            edge_trim_fraction: self.trim,
        }
    }

    fn fit(&self) -> FitParams {
        FitParams {
            min_sample: self.min_sample,
            q_upper: self.q_upper,
            include_invalid: self.include_invalid,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random 3-SAT instance in DIMACS format.
    Gen {
        #[arg(long)]
        vars: u32,
        #[arg(long)]
        clauses: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a DIMACS file with counting DPLL.
    Solve {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Eigenvalues of H(s) for one instance.
    Spectrum {
        file: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        s: f64,
        /// Also report the unfolded spacings.
        #[arg(long)]
        unfold: bool,
        #[command(flatten)]
        stats: StatsArgs,
    },
    /// Spectra of H(s) on an evenly spaced grid, written as JSON.
    Sweep {
        file: PathBuf,
        #[arg(long, default_value_t = 100)]
        points: usize,
        /// Seed recorded in the output metadata.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Render unfolded levels against s as SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Level index window for the SVG, e.g. `40 60`.
        #[arg(long, num_args = 2, default_values_t = [40usize, 60])]
        window: Vec<usize>,
        #[command(flatten)]
        stats: StatsArgs,
    },
    /// Unfold and fit every spectrum of a sweep file.
    Fit {
        sweep: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a spacing histogram for this grid index as CSV.
        #[arg(long, requires = "hist_csv")]
        hist_index: Option<usize>,
        #[arg(long)]
        hist_csv: Option<PathBuf>,
        #[arg(long, default_value_t = 30)]
        bins: usize,
        #[command(flatten)]
        stats: StatsArgs,
    },
    /// Classical DPLL cost and satisfiable fraction against f.
    Baseline {
        #[arg(long = "n", default_values_t = [20u32])]
        n: Vec<u32>,
        #[arg(long, default_value_t = 1.0)]
        f_min: f64,
        #[arg(long, default_value_t = 8.0)]
        f_max: f64,
        #[arg(long, default_value_t = 0.25)]
        f_step: f64,
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random-matrix calibration of the statistics pipeline.
    GpValidate {
        #[arg(long, default_value_t = 256)]
        dim: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 10_000)]
        families: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a curve CSV as SVG.
    Plot {
        curve: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Add a panel with median DPLL cost.
        #[arg(long)]
        cost_panel: bool,
    },
    /// Run the maximal-Brody-parameter experiment end to end.
    #[command(name = "reproduce-fig2")]
    ReproduceFig2 {
        /// 20 instances per ratio and 25 interpolation points.
        #[arg(long)]
        quick: bool,
        /// JSON configuration; command-line flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, default_value = "fig2-out")]
        out: PathBuf,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) => 4,
        e if e.is_numeric() => 3,
        _ => 2,
    }
}

fn read(path: &Path) -> qsat::Result<String> {
    Ok(fs::read_to_string(path)?)
}

fn emit(text: &str, out: Option<&Path>) -> qsat::Result<()> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            fs::write(path, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> qsat::Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn load_cnf(path: &Path) -> qsat::Result<qsat::CnfFormula> {
    let formula = parse_dimacs(&read(path)?)?;
    if formula.has_duplicates() {
        log::warn!("{} contains duplicate clauses", path.display());
    }
    Ok(formula)
}

#[derive(Serialize)]
struct SolveReport {
    satisfiable: bool,
    dpll_decisions: u64,
    dpll_propagations: u64,
}

#[derive(Serialize)]
struct FitReport {
    q_max: f64,
    s_at_max: f64,
    has_valid_fit: bool,
    fits: Vec<qsat::BrodyFit>,
}

fn f_range(lo: f64, hi: f64, step: f64) -> qsat::Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 || hi < lo {
        return Err(Error::InvalidParameter("f range needs step > 0 and f_max >= f_min".into()));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|k| lo + k as f64 * step).collect())
}

fn run(cli: Cli) -> qsat::Result<()> {
    match cli.command {
        Command::Gen { vars, clauses, seed, out } => {
            let formula = generate_instance(vars, clauses, seed)?;
            emit(&emit_dimacs(&formula), out.as_deref())
        }
        Command::Solve { file, json } => {
            let r = dpll_solve(&load_cnf(&file)?);
            if json {
                emit(
                    &to_json(&SolveReport {
                        satisfiable: r.satisfiable,
                        dpll_decisions: r.dpll_decisions,
                        dpll_propagations: r.dpll_propagations,
                    })?,
                    None,
                )
            } else {
                println!("{}", if r.satisfiable { "SATISFIABLE" } else { "UNSATISFIABLE" });
                println!("decisions {} propagations {}", r.dpll_decisions, r.dpll_propagations);
                Ok(())
            }
        }
        Command::Spectrum { file, s, unfold: with_unfold, stats } => {
            let system = build_system(&load_cnf(&file)?)?;
            let spectrum = spectrum_at(&system, s)?;
            let mut report = serde_json::json!({ "s": s, "eigenvalues": spectrum.eigenvalues });
            if with_unfold {
                let u = unfold(&spectrum.eigenvalues, &stats.unfold())?;
                report["spacings"] = serde_json::json!(u.spacings());
                report["degenerate_fraction"] = serde_json::json!(u.degenerate_fraction);
            }
            emit(&to_json(&report)?, None)
        }
        Command::Sweep { file, points, seed, out, svg, window, stats } => {
            let system = build_system(&load_cnf(&file)?)?;
            let result = sweep(&system, points, seed)?;
            if let Some(path) = svg {
                emit(&spectrum_svg(&result, &stats.unfold(), (window[0], window[1]))?, Some(&path))?;
            }
            emit(&(result.to_json()? + "\n"), out.as_deref())
        }
        Command::Fit { sweep: path, out, hist_index, hist_csv, bins, stats } => {
            let data = SweepResult::from_json(&read(&path)?)?;
            let best = max_brody(&data, &stats.unfold(), &stats.fit())?;
            if let (Some(k), Some(csv_path)) = (hist_index, hist_csv) {
                let spectrum = data
                    .spectra
                    .get(k)
                    .ok_or_else(|| Error::InvalidParameter(format!("grid index {k} out of range")))?;
                let sample = unfold(&spectrum.eigenvalues, &stats.unfold())?.spacing_sample(Some(spectrum.s));
                let mut csv = String::from("bin_left,bin_right,count,brody_density_at_fit\n");
                for b in histogram(&sample, &best.fits[k], bins, 4.0)? {
                    csv.push_str(&format!("{},{},{},{}\n", b.bin_left, b.bin_right, b.count, b.brody_density_at_fit));
                }
                emit(&csv, Some(&csv_path))?;
            }
            emit(
                &to_json(&FitReport {
                    q_max: best.q_max,
                    s_at_max: best.s_at_max,
                    has_valid_fit: best.has_valid_fit,
                    fits: best.fits,
                })?,
                out.as_deref(),
            )
        }
        Command::Baseline { n, f_min, f_max, f_step, instances, seed, out } => {
            let records = run_classical_baseline(&n, &f_range(f_min, f_max, f_step)?, instances, seed)?;
            emit(&experiment::baseline_csv(&records), out.as_deref())
        }
        Command::GpValidate { dim, samples, families, seed, out } => {
            let params = CalibrationParams {
                dim,
                samples,
                covariance_families: families,
                seed,
                ..CalibrationParams::default()
            };
            emit(&to_json(&calibration_report(&params)?)?, out.as_deref())
        }
        Command::Plot { curve, out, cost_panel } => {
            let parsed = ComplexityCurve::from_csv(&read(&curve)?)?;
            let svg = qsat::plot::curve_svg(&parsed, cost_panel)?;
            emit(&svg, Some(&out))
        }
        Command::ReproduceFig2 { quick, config, seed, instances, points, jobs, out } => {
            let mut cfg = match config {
                Some(path) => ExperimentConfig::from_json(&read(&path)?)?,
                None if quick => ExperimentConfig::quick(),
                None => ExperimentConfig::default(),
            };
            if quick {
                let q = ExperimentConfig::quick();
                cfg.instances_per_f = q.instances_per_f;
                cfg.interpolation_points = q.interpolation_points;
            }
            if let Some(v) = seed {
                cfg.seed = v;
            }
            if let Some(v) = instances {
                cfg.instances_per_f = v;
            }
            if let Some(v) = points {
                cfg.interpolation_points = v;
            }
            if let Some(v) = jobs {
                cfg.jobs = v;
            }
            cfg.validate()?;
            let output = run_experiment(&cfg)?;
            experiment::write_outputs(&output, &out)?;
            emit_plots(&output.curve, &out, true)?;
            fs::write(out.join("config.json"), to_json(&cfg)?)?;
            info!("wrote results to {}", out.display());
            if !output.failures.is_empty() {
                eprintln!("{} instances failed; see failures.json", output.failures.len());
            }
            print!("{}", output.curve.to_csv());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
