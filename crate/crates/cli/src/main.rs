//! `dirac-amalgam` command-line driver.
//!
//! Exit codes: 0 when every verdict passes, 2 when a verdict fails, 1 on
//! usage, configuration or runtime errors.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use dirac_amalgam::amalgam::{amalgam_norm, sequence_lp_norm, AmalgamSpec, Window};
use dirac_amalgam::config::{RunConfig, OUTPUT_DIR_ENV};
use dirac_amalgam::experiments::{
    check_classical_admissible, check_theorem1_admissible, decay_experiment, default_polarization,
    gaussian_packet, strichartz_sweep, sweep_family, windowed_time_experiment, write_decay_csv,
    write_sweep_csv, write_windowed_csv, DecayRegime, DecaySettings, ExperimentReport, ExponentTuple,
    KernelNormSettings, SweepSettings, Verdict, WindowedTimeSettings,
};
use dirac_amalgam::fourier::{pde_residual, propagate_dirac, read_field, write_field, Precision, SpinorField};
use dirac_amalgam::kernel::{kernel_value, radial_nodes, KernelParams, RadialKernelProfile};
use dirac_amalgam::stats::log_space;

#[derive(Parser)]
#[command(name = "dirac-amalgam", version, about = "Free Dirac flow and Wiener amalgam norm experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set grid.n=32`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory; takes precedence over the environment and the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check an exponent tuple against the admissible ranges.
    CheckRange {
        #[arg(long, value_parser = parse_exponent)]
        qt: Option<f64>,
        #[arg(long, value_parser = parse_exponent)]
        q: f64,
        #[arg(long, value_parser = parse_exponent)]
        rt: Option<f64>,
        #[arg(long, value_parser = parse_exponent)]
        r: f64,
        #[arg(long, allow_negative_numbers = true)]
        sigma: f64,
        /// Check the classical range (q, r, σ) instead.
        #[arg(long)]
        classical: bool,
    },
    /// Evaluate K_γ(x, t); with `--profile` write the radial profile to kernel.csv.
    Kernel {
        #[arg(long)]
        gamma: f64,
        /// |x|.
        #[arg(long, default_value_t = 0.0)]
        x: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t: f64,
        /// Largest radius of the profile.
        #[arg(long, value_name = "R_MAX")]
        profile: Option<f64>,
        #[arg(long, default_value_t = 1.0 / 16.0)]
        spacing: f64,
    },
    /// Time decay of ‖K_γ(·,t)‖_{W(r̃/2, r/2)}.
    Decay {
        #[arg(long)]
        gamma: f64,
        #[arg(long, value_parser = parse_exponent)]
        rt: f64,
        #[arg(long, value_parser = parse_exponent)]
        r: f64,
        #[arg(long)]
        tmin: f64,
        #[arg(long)]
        tmax: f64,
        #[arg(long, default_value_t = 12)]
        points: usize,
    },
    /// Windowed time bounds of h(t) = ‖K_{2σ}(·,t)‖_{W(r̃/2, r/2)}.
    WindowedTime {
        #[arg(long, value_parser = parse_exponent)]
        qt: f64,
        #[arg(long, value_parser = parse_exponent)]
        q: f64,
        #[arg(long, value_parser = parse_exponent)]
        rt: f64,
        #[arg(long, value_parser = parse_exponent)]
        r: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 32)]
        kmax: i64,
    },
    /// Strichartz ratio sweep over the initial-data family.
    Sweep {
        /// Exponent tuple `qt,q,rt,r,sigma`. Repeatable; defaults to three admissible tuples.
        #[arg(long = "tuple", value_parser = parse_tuple)]
        tuples: Vec<ExponentTuple>,
        /// Dilation scales are 2^j for j in [-jmax, jmax].
        #[arg(long, default_value_t = 3)]
        jmax: i32,
    },
    /// Propagate a Gaussian (or a stored field) with the Dirac flow.
    Propagate {
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        /// Width of the Gaussian datum.
        #[arg(long, default_value_t = 1.0)]
        width: f64,
        /// Read the initial datum from a binary field file instead.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Write u(t) to this binary field file.
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Store complex64 instead of complex128 in the dump.
        #[arg(long)]
        single: bool,
    },
    /// Grid amalgam norm ‖f‖_{W(p,q)} of a stored field.
    Norm {
        #[arg(long, value_parser = parse_exponent)]
        p: f64,
        #[arg(long, value_parser = parse_exponent)]
        q: f64,
        #[arg(long)]
        input: PathBuf,
        /// Window radius; defaults to `window.space_radius`.
        #[arg(long)]
        radius: Option<f64>,
    },
}

fn parse_exponent(s: &str) -> std::result::Result<f64, String> {
    let v = match s.trim() {
        "inf" | "infinity" | "∞" => f64::INFINITY,
        other => other.parse::<f64>().map_err(|e| format!("{other:?}: {e}"))?,
    };
    if v.is_nan() || v <= 0.0 {
        return Err(format!("exponent must be positive, got {s}"));
    }
    Ok(v)
}

fn parse_tuple(s: &str) -> std::result::Result<ExponentTuple, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 5 {
        return Err(format!("expected qt,q,rt,r,sigma, got {s:?}"));
    }
    let v: Vec<f64> = parts.iter().map(|p| parse_exponent(p)).collect::<std::result::Result<_, _>>()?;
    Ok(ExponentTuple::new(v[0], v[1], v[2], v[3], v[4]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    fn from(passed: bool) -> Self {
        if passed {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &common.config {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        cfg.apply_text(&text)?;
    }
    if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
        if !dir.is_empty() {
            cfg.output_dir = PathBuf::from(dir);
        }
    }
    for kv in &common.overrides {
        let (k, v) = kv
            .split_once('=')
            .with_context(|| format!("--set expects KEY=VALUE, got {kv:?}"))?;
        cfg.set(k, v)?;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Writes `<name>.csv` through `write_csv` and `<name>.manifest` next to it.
fn emit<F>(cfg: &RunConfig, name: &str, report: &ExperimentReport, write_csv: F) -> Result<PathBuf>
where
    F: FnOnce(BufWriter<fs::File>) -> dirac_amalgam::Result<()>,
{
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let csv_path = dir.join(format!("{name}.csv"));
    let file = fs::File::create(&csv_path).with_context(|| format!("creating {}", csv_path.display()))?;
    write_csv(BufWriter::new(file))?;
    write_manifest(cfg, &dir.join(format!("{name}.manifest")), &csv_path, report)?;
    Ok(csv_path)
}

fn write_manifest(cfg: &RunConfig, path: &Path, csv: &Path, report: &ExperimentReport) -> Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let mut text = format!(
        "# dirac-amalgam {}\n# command: {}\n# csv: {}\n",
        env!("CARGO_PKG_VERSION"),
        args.join(" "),
        csv.display()
    );
    text += &cfg.to_text();
    for line in report.to_text().lines() {
        text += &format!("# {line}\n");
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn print_report(report: &ExperimentReport) {
    for v in &report.verdicts {
        println!("{v}");
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    let cfg = load_config(&cli.common)?;
    match cli.command {
        Command::CheckRange { qt, q, rt, r, sigma, classical } => {
            if classical {
                let a = check_classical_admissible(q, r, sigma);
                if a.admissible {
                    println!("admissible (classical)");
                } else {
                    println!("rejected: {}", a.reasons.join("; "));
                }
            } else {
                let (Some(qt), Some(rt)) = (qt, rt) else {
                    bail!("--qt and --rt are required unless --classical is given");
                };
                let a = check_theorem1_admissible(&ExponentTuple::new(qt, q, rt, r, sigma));
                if a.admissible {
                    println!("admissible (Theorem 1)");
                } else {
                    println!("rejected: {}", a.reasons.join("; "));
                }
            }
            Ok(Outcome::Pass)
        }
        Command::Kernel { gamma, x, t, profile, spacing } => {
            let s = kernel_value(x, t, gamma)?;
            let k = s.value();
            println!("{:.15} {:+.15}i", k.re, k.im);
            println!("|K| = {:.15e}, quadrature error estimate {:.1e}", s.abs(), s.abs_err);
            let params = KernelParams::new(gamma, t)?;
            let radii = match profile {
                Some(r_max) => radial_nodes(r_max, spacing, spacing / 64.0, spacing),
                None => vec![x],
            };
            let prof = RadialKernelProfile::compute(params, radii)?;
            let report = ExperimentReport::new("kernel")
                .param("gamma", gamma)
                .param("t", t)
                .param("x", x);
            let path = emit(&cfg, "kernel", &report, |w| prof.write_csv(w))?;
            println!("wrote {}", path.display());
            Ok(Outcome::Pass)
        }
        Command::Decay { gamma, rt, r, tmin, tmax, points } => {
            let regime = if tmin >= 1.0 {
                DecayRegime::Large
            } else if tmax <= 1.0 {
                DecayRegime::Small
            } else {
                bail!("t range [{tmin}, {tmax}] straddles t = 1; run the two regimes separately");
            };
            if !(tmin > 0.0 && tmax > tmin) {
                bail!("need 0 < tmin < tmax");
            }
            let settings = DecaySettings {
                norm: KernelNormSettings {
                    window_radius: cfg.kernel_window_radius,
                    ..KernelNormSettings::default()
                },
                exponent_slack: cfg.tolerances.exponent_slack,
                constant_slack: cfg.tolerances.constant_slack,
            };
            let start = Instant::now();
            let fit = decay_experiment(gamma, rt, r, &log_space(tmin, tmax, points), regime, &settings)?;
            let report = fit.report(start.elapsed().as_secs_f64());
            println!(
                "slope {:.4}, predicted exponent {:.4}, constant {:.4e}",
                fit.slope, fit.predicted_exponent, fit.constant
            );
            print_report(&report);
            let path = emit(&cfg, "decay", &report, |w| write_decay_csv(std::slice::from_ref(&fit), w))?;
            println!("wrote {}", path.display());
            Ok(Outcome::from(report.passed()))
        }
        Command::WindowedTime { qt, q, rt, r, sigma, kmax } => {
            let tuple = ExponentTuple::new(qt, q, rt, r, sigma);
            let settings = WindowedTimeSettings {
                norm: KernelNormSettings {
                    window_radius: cfg.kernel_window_radius,
                    ..KernelNormSettings::default()
                },
                time_window_radius: cfg.time_window_radius,
                exponent_slack: cfg.tolerances.exponent_slack,
                ..WindowedTimeSettings::default()
            };
            let start = Instant::now();
            let rep = windowed_time_experiment(2.0 * sigma, &tuple, kmax, &settings)?;
            let report = rep.report(start.elapsed().as_secs_f64());
            println!(
                "fitted exponent {:.4}, predicted {:.4}; a_16/a_8 = {:.4} (power law {:.4})",
                rep.fitted_exponent, rep.predicted_exponent, rep.ratio_16_over_8, rep.predicted_ratio_16_over_8
            );
            print_report(&report);
            let path = emit(&cfg, "windowed", &report, |w| write_windowed_csv(&rep, w))?;
            println!("wrote {}", path.display());
            Ok(Outcome::from(report.passed()))
        }
        Command::Sweep { tuples, jmax } => {
            let tuples = if tuples.is_empty() {
                vec![
                    ExponentTuple::new(2.0, 4.0, 16.0, 12.0, 1.1),
                    ExponentTuple::new(4.0, 3.0, 24.0, 18.0, 1.2),
                    ExponentTuple::new(f64::INFINITY, 6.0, 9.0, 9.0, 1.5),
                ]
            } else {
                tuples
            };
            let grid = cfg.grid()?;
            let scales: Vec<f64> = (-jmax..=jmax).map(|j| 2f64.powi(j)).collect();
            let data = sweep_family(grid, &scales, cfg.seed);
            let start = Instant::now();
            let rep = strichartz_sweep(&data, &tuples, grid, &SweepSettings::from_config(&cfg))?;
            let report = rep.report(start.elapsed().as_secs_f64());
            print_report(&report);
            let path = emit(&cfg, "sweep", &report, |w| write_sweep_csv(&rep, w))?;
            println!("wrote {}", path.display());
            Ok(Outcome::from(report.passed()))
        }
        Command::Propagate { t, width, input, dump, single } => {
            let f = match &input {
                Some(path) => {
                    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
                    read_field(std::io::BufReader::new(file))?
                }
                None => gaussian_packet(cfg.grid()?, width, [0.0; 3], [0.0; 3], default_polarization()),
            };
            let start = Instant::now();
            let u = propagate_dirac(&f, t).to_position();
            let n0 = f.l2_norm();
            let n1 = u.l2_norm();
            let tol = cfg.tolerances;
            let residual = pde_residual(&f, t, tol.residual_dt)?;
            println!("L2 norm {n0:.12e} -> {n1:.12e}; relative residual {residual:.3e} at dt = {}", tol.residual_dt);
            if let Some(path) = &dump {
                let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
                let precision = if single { Precision::Complex64 } else { Precision::Complex128 };
                write_field(&u, precision, BufWriter::new(file))?;
                println!("wrote {}", path.display());
            }
            let mut report = ExperimentReport::new("propagate").param("t", t).param("width", width);
            report.grid = Some(*f.grid());
            report.measurements.push(("pde_residual".into(), residual));
            report.verdicts.push(Verdict::new(
                "pde residual",
                residual <= tol.residual_max,
                residual,
                tol.residual_max,
                format!("residual <= {}", tol.residual_max),
            ));
            report.runtime_seconds = start.elapsed().as_secs_f64();
            print_report(&report);
            emit(&cfg, "propagate", &report, |w| {
                let mut w = csv_writer(w);
                w.write_record(["t", "l2_initial", "l2_final", "pde_residual"])?;
                w.write_record(&[t.to_string(), format!("{n0:.12e}"), format!("{n1:.12e}"), format!("{residual:.6e}")])?;
                w.flush()?;
                Ok(())
            })?;
            Ok(Outcome::from(report.passed()))
        }
        Command::Norm { p, q, input, radius } => {
            let file = fs::File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            let f: SpinorField = read_field(std::io::BufReader::new(file))?;
            let radius = radius.unwrap_or(cfg.space_window_radius);
            let spec = AmalgamSpec::new(p, q, Window::space(radius)?)?;
            let est = amalgam_norm(&f, &spec)?;
            println!("W({p},{q}) norm {:.12e} (± {:.1e})", est.value, est.abs_err);
            if p == q && p.is_finite() {
                let grid = *f.grid();
                let lattice = sequence_lp_norm(&f.to_position().modulus(), p) * grid.cell_volume().powf(1.0 / p);
                println!("‖φ‖_p·‖f‖_p = {:.12e}", spec.window.lp_norm(p) * lattice);
            }
            let report = ExperimentReport::new("norm")
                .param("p", p)
                .param("q", q)
                .param("radius", radius)
                .param("input", input.display());
            emit(&cfg, "norm", &report, |w| {
                let mut w = csv_writer(w);
                w.write_record(["p", "q", "radius", "value", "abs_err"])?;
                w.write_record(&[p.to_string(), q.to_string(), radius.to_string(), format!("{:.12e}", est.value), format!("{:.3e}", est.abs_err)])?;
                w.flush()?;
                Ok(())
            })?;
            Ok(Outcome::Pass)
        }
    }
}

fn csv_writer<W: std::io::Write>(w: W) -> csv::Writer<W> {
    csv::Writer::from_writer(w)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
