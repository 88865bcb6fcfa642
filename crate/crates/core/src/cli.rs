//! Command-line entry point.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::dynamics::{EvolveOptions, DEFAULT_MAX_STEPS, DEFAULT_SAMPLES};
use crate::experiments::{
    optimize_drive, reproduce, run_fidelity_trace, sweep_deviation, sweep_drive, sweep_tau,
    DeviationChannel, ExperimentError, FigureId, PeakSearch, ReproduceOptions, DEFAULT_BRACKET, DEFAULT_GRID_POINTS,
    HORIZON_CONSTANT,
};
use crate::io::{parse_document, ConfigDocument, IoError, OutputDir, RunManifest};
use crate::model::{validate_config, Frame, RateConvention};
use crate::spectral::{spectrum, target_dark_state};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "reservoir-w", version, about = "Dissipative W-state preparation: simulation, sweeps and figure runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Samples per trajectory.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Fock truncation per resonator.
    #[arg(long, global = true)]
    nmax: Option<usize>,
    #[arg(long, global = true, value_enum)]
    frame: Option<FrameArg>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Integrator step budget per run.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FrameArg {
    Lab,
    Rotating,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ConventionArg {
    Coefficient,
    DecayRate,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Driven trajectory from the ground state against the target dark state.
    Simulate { config: PathBuf },
    /// Dark/bright decomposition and target state.
    Spectrum { config: PathBuf },
    /// First-peak fidelity for each value in `run.rabi_values`.
    SweepDrive { config: PathBuf },
    /// Drive strength maximizing the first-peak fidelity.
    Optimize { config: PathBuf },
    /// Optimum fidelity for each value in `run.tau_values`.
    SweepTau { config: PathBuf },
    /// Optimum fidelity against the ideal target while one coupling deviates.
    SweepDeviation {
        config: PathBuf,
        /// Overrides `run.deviation`.
        #[arg(long, value_enum)]
        channel: Option<ChannelArg>,
    },
    /// Regenerate the data behind one figure.
    Reproduce {
        figure: String,
        #[arg(long, value_enum, default_value = "decay-rate")]
        convention: ConventionArg,
        /// Skip the n_max convergence guard.
        #[arg(long)]
        no_convergence_check: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ChannelArg {
    Qubit,
    Resonator,
    Magnon,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Numerical(String),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl From<crate::spectral::SpectralError> for Failure {
    fn from(e: crate::spectral::SpectralError) -> Self {
        ExperimentError::from(e).into()
    }
}

/// Runs the tool on `argv` (program name first), returning the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(stderr, "{text}") } else { write!(stdout, "{text}") };
            return code;
        }
    };
    if let Some(n) = cli.common.jobs {
        // Fails only if a pool already exists, in which case that pool is used.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match dispatch(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(Failure::Config(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            EXIT_CONFIG
        }
        Err(Failure::Numerical(m)) => {
            let _ = writeln!(stderr, "numerical error: {m}");
            EXIT_NUMERICAL
        }
    }
}

fn load(path: &Path, common: &Common) -> Result<ConfigDocument, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut doc = parse_document(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    if let Some(n) = common.nmax {
        doc.system.n_max = n;
    }
    if let Some(s) = common.samples {
        doc.run.samples = Some(s);
    }
    if let Some(f) = common.frame {
        doc.run.frame = Some(match f {
            FrameArg::Lab => Frame::Lab,
            FrameArg::Rotating => Frame::RotatingAtDrive,
        });
    }
    doc.system.validate().map_err(|e| Failure::Config(e.to_string()))?;
    Ok(doc)
}

fn evolve_opts(doc: &ConfigDocument, common: &Common) -> EvolveOptions {
    EvolveOptions {
        frame: doc.run.frame.unwrap_or_default(),
        dephasing_reservoir: doc.run.dephasing_reservoir,
        control: None,
        max_steps: common.max_steps,
    }
}

fn manifest(command: &str, doc: &ConfigDocument, source: &Path) -> RunManifest {
    let mut m = RunManifest::new(command, &doc.system);
    m.param("config_file", source.display().to_string());
    m.param("frame", doc.run.frame.unwrap_or_default().as_str());
    m.param("dephasing_reservoir", doc.run.dephasing_reservoir);
    m
}

fn warn(out: &mut dyn Write, doc: &ConfigDocument) {
    for w in validate_config(&doc.system) {
        let _ = writeln!(out, "warning: {w}");
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<(), Failure> {
    let common = &cli.common;
    let search = PeakSearch::default();
    match &cli.command {
        Command::Simulate { config } => {
            let doc = load(config, common)?;
            warn(out, &doc);
            let cfg = &doc.system;
            let horizon = doc.run.horizon.unwrap_or_else(|| default_horizon(cfg));
            let samples = doc.run.samples.unwrap_or(DEFAULT_SAMPLES);
            let target = target_dark_state(cfg)?.state;
            let tr = run_fidelity_trace(cfg, &target, horizon, samples, &evolve_opts(&doc, common))?;
            let mut dir = OutputDir::create(&common.out)?;
            dir.write_trajectory("trajectory.csv", &tr)?;
            let mut m = manifest("simulate", &doc, config);
            m.param("horizon", horizon);
            m.param("samples", samples);
            m.param("target", target.to_string());
            let (i, f) = tr.fidelity.iter().enumerate().fold((0, f64::MIN), |b, (i, &f)| if f > b.1 { (i, f) } else { b });
            m.param("max_fidelity", f);
            m.param("t_at_max_fidelity", tr.times[i]);
            dir.finish(m)?;
            let _ = writeln!(out, "target {target}");
            let _ = writeln!(out, "max fidelity {f:.6} at t = {:.6}; final {:.6}", tr.times[i], tr.final_fidelity().unwrap_or(0.0));
        }
        Command::Spectrum { config } => {
            let doc = load(config, common)?;
            warn(out, &doc);
            let dec = spectrum(&doc.system)?;
            let _ = writeln!(out, "route: {}", dec.route.as_str());
            let _ = writeln!(out, "E_D = {}", dec.e_d);
            let _ = writeln!(out, "E_B = {}", dec.e_b);
            let _ = writeln!(out, "D1 = {}", dec.d1);
            let _ = writeln!(out, "D2 = {}", dec.d2);
            let _ = writeln!(out, "B  = {}", dec.bright);
            match target_dark_state(&doc.system) {
                Ok(t) => {
                    let _ = writeln!(out, "target D = {}", t.state);
                    let _ = writeln!(out, "c = [{}, {}, {}]", t.c[0], t.c[1], t.c[2]);
                }
                Err(e) => {
                    let _ = writeln!(out, "no target dark state: {e}");
                }
            }
        }
        Command::SweepDrive { config } => {
            let doc = load(config, common)?;
            warn(out, &doc);
            let cfg = &doc.system;
            let rabis = if doc.run.rabi_values.is_empty() {
                (0..=20).map(|k| cfg.tau * 0.001 * 100f64.powf(k as f64 / 20.0)).collect()
            } else {
                doc.run.rabi_values.clone()
            };
            let target = target_dark_state(cfg)?.state;
            let rows = sweep_drive(cfg, &target, &rabis, &evolve_opts(&doc, common), &search)?;
            let mut dir = OutputDir::create(&common.out)?;
            let tau = cfg.tau;
            dir.write_table("sweep_drive.csv", &["rabi", "rabi_over_tau", "f_max", "t_max"], rows.iter().map(|(r, p)| vec![*r, r / tau, p.f_max, p.t_max]))?;
            let mut m = manifest("sweep-drive", &doc, config);
            m.param("rabi_values", rabis);
            dir.finish(m)?;
            for (r, p) in &rows {
                let _ = writeln!(out, "rabi/tau {:.6}  f_max {:.6}  t_max {:.6}", r / tau, p.f_max, p.t_max);
            }
        }
        Command::Optimize { config } => {
            let doc = load(config, common)?;
            warn(out, &doc);
            let cfg = &doc.system;
            let bracket = doc.run.bracket.unwrap_or(DEFAULT_BRACKET);
            let target = target_dark_state(cfg)?.state;
            let r = optimize_drive(cfg, &target, bracket, DEFAULT_GRID_POINTS, &evolve_opts(&doc, common), &search)?;
            let mut dir = OutputDir::create(&common.out)?;
            let tau = cfg.tau;
            dir.write_table("optimize_grid.csv", &["rabi_over_tau", "f_max", "t_max"], r.grid.iter().map(|(x, p)| vec![x / tau, p.f_max, p.t_max]))?;
            let mut m = manifest("optimize", &doc, config);
            m.param("bracket_over_tau", vec![bracket.0, bracket.1]);
            m.param("result", json!({"rabi_opt_over_tau": r.rabi_opt / tau, "f_opt": r.f_opt, "t_opt": r.t_opt, "evaluations": r.evaluations}));
            dir.finish(m)?;
            let _ = writeln!(out, "rabi_opt/tau {:.6}  f_opt {:.6}  t_opt {:.6}  ({} evaluations)", r.rabi_opt / tau, r.f_opt, r.t_opt, r.evaluations);
        }
        Command::SweepTau { config } => {
            let doc = load(config, common)?;
            warn(out, &doc);
            if doc.run.tau_values.is_empty() {
                return Err(Failure::Config("sweep-tau needs run.tau_values".into()));
            }
            let cfg = &doc.system;
            let bracket = doc.run.bracket.unwrap_or(DEFAULT_BRACKET);
            let target = target_dark_state(cfg)?.state;
            let rows = sweep_tau(cfg, &target, &doc.run.tau_values, bracket, &evolve_opts(&doc, common), &search)?;
            let mut dir = OutputDir::create(&common.out)?;
            dir.write_table("sweep_tau.csv", &["tau", "rabi_opt_over_tau", "f_opt", "t_opt"], rows.iter().map(|(t, r)| vec![*t, r.rabi_opt / t, r.f_opt, r.t_opt]))?;
            let mut m = manifest("sweep-tau", &doc, config);
            m.param("tau_values", doc.run.tau_values.clone());
            dir.finish(m)?;
            for (t, r) in &rows {
                let _ = writeln!(out, "tau {t:.6}  f_opt {:.6}  t_opt {:.6}", r.f_opt, r.t_opt);
            }
        }
        Command::SweepDeviation { config, channel } => {
            let doc = load(config, common)?;
            warn(out, &doc);
            let which = match channel {
                Some(ChannelArg::Qubit) => DeviationChannel::Qubit,
                Some(ChannelArg::Resonator) => DeviationChannel::Resonator,
                Some(ChannelArg::Magnon) => DeviationChannel::Magnon,
                None => doc.run.deviation.ok_or_else(|| Failure::Config("sweep-deviation needs run.deviation or --channel".into()))?,
            };
            let deltas =
                if doc.run.deltas.is_empty() { (-6..=6).map(|k| 0.05 * k as f64).collect() } else { doc.run.deltas.clone() };
            let cfg = &doc.system;
            let bracket = doc.run.bracket.unwrap_or(DEFAULT_BRACKET);
            let target = target_dark_state(cfg)?.state;
            let rows = sweep_deviation(cfg, &target, which, &deltas, bracket, &evolve_opts(&doc, common), &search)?;
            let mut dir = OutputDir::create(&common.out)?;
            let tau = cfg.tau;
            dir.write_table("sweep_deviation.csv", &["delta", "rabi_opt_over_tau", "f_opt", "t_opt"], rows.iter().map(|(d, r)| vec![*d, r.rabi_opt / tau, r.f_opt, r.t_opt]))?;
            let mut m = manifest("sweep-deviation", &doc, config);
            m.param("channel", which.as_str());
            m.param("deltas", deltas);
            dir.finish(m)?;
            for (d, r) in &rows {
                let _ = writeln!(out, "delta {d:+.3}  f_opt {:.6}", r.f_opt);
            }
        }
        Command::Reproduce { figure, convention, no_convergence_check } => {
            let figure = FigureId::parse(figure)?;
            let mut opts = ReproduceOptions {
                convention: match convention {
                    ConventionArg::Coefficient => RateConvention::Coefficient,
                    ConventionArg::DecayRate => RateConvention::DecayRate,
                },
                check_convergence: !no_convergence_check,
                ..ReproduceOptions::default()
            };
            if let Some(s) = common.samples {
                opts.samples = s;
            }
            if let Some(n) = common.nmax {
                opts.n_max = n;
            }
            if let Some(f) = common.frame {
                opts.frame = match f {
                    FrameArg::Lab => Frame::Lab,
                    FrameArg::Rotating => Frame::RotatingAtDrive,
                };
            }
            let res = reproduce(figure, &common.out, &opts)?;
            for s in &res.series {
                let _ = writeln!(out, "{}: {}", s.name, s.file.display());
            }
            let _ = writeln!(out, "manifest: {}", res.manifest_path.display());
        }
    }
    Ok(())
}

/// Twice the heuristic peak time for a continuous drive, the pulse plus two
/// peak times otherwise, and 10/τ without a drive.
fn default_horizon(cfg: &crate::model::SystemConfig) -> f64 {
    if cfg.drive.rabi <= 0.0 {
        return 10.0 / cfg.tau;
    }
    let peak = HORIZON_CONSTANT / cfg.drive.rabi;
    if cfg.drive.t0.is_finite() {
        cfg.drive.t0 + 2.0 * peak
    } else {
        2.0 * peak
    }
}
