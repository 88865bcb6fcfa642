//! Figure runners: each writes one CSV per curve plus a manifest.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::dynamics::{EvolveOptions, DEFAULT_SAMPLES};
use crate::io::{render_config, OutputDir, RunManifest, SeriesRecord};
use crate::model::{Frame, RateConvention, SystemConfig};
use crate::spectral::{catalog_w_states, target_dark_state, CatalogEntry, StateVector};

use super::convergence::{converge_n_max, Convergence};
use super::optimize::{optimize_drive, sweep_deviation, sweep_drive, sweep_tau, DeviationChannel, DEFAULT_BRACKET};
use super::peak::{measure_peak, PeakSearch};
use super::presets::{ideal, HybridParams, PROTOTYPE_ETA, SYMMETRIC_ETA};
use super::{run_fidelity_trace, run_stability, ExperimentError, StabilityInitial};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FigureId {
    Fig2,
    Fig3a,
    Fig3b,
    Fig3c,
    Fig3d,
    Fig4ab,
    Fig4c,
    Fig4d,
    Fig5a,
    Fig5b,
}

impl FigureId {
    pub const ALL: [FigureId; 10] = [
        FigureId::Fig2,
        FigureId::Fig3a,
        FigureId::Fig3b,
        FigureId::Fig3c,
        FigureId::Fig3d,
        FigureId::Fig4ab,
        FigureId::Fig4c,
        FigureId::Fig4d,
        FigureId::Fig5a,
        FigureId::Fig5b,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3a => "fig3a",
            FigureId::Fig3b => "fig3b",
            FigureId::Fig3c => "fig3c",
            FigureId::Fig3d => "fig3d",
            FigureId::Fig4ab => "fig4ab",
            FigureId::Fig4c => "fig4c",
            FigureId::Fig4d => "fig4d",
            FigureId::Fig5a => "fig5a",
            FigureId::Fig5b => "fig5b",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ExperimentError> {
        Self::ALL.into_iter().find(|f| f.as_str() == s).ok_or_else(|| ExperimentError::UnknownFigure(s.to_string()))
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReproduceOptions {
    pub convention: RateConvention,
    pub samples: usize,
    pub frame: Frame,
    /// Starting truncation; raised automatically when results are not converged.
    pub n_max: usize,
    /// Run the `n_max` convergence guard on every series.
    pub check_convergence: bool,
    pub search: PeakSearch,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        Self {
            convention: RateConvention::DecayRate,
            samples: DEFAULT_SAMPLES,
            frame: Frame::RotatingAtDrive,
            n_max: 2,
            check_convergence: true,
            search: PeakSearch::default(),
        }
    }
}

/// A written curve and the scalar used to check its truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub file: PathBuf,
    pub convergence: Option<Convergence>,
}

#[derive(Clone, Debug)]
pub struct ReproduceOutput {
    pub figure: FigureId,
    pub series: Vec<Series>,
    pub manifest_path: PathBuf,
    pub manifest: RunManifest,
}

struct Run<'a> {
    opts: &'a ReproduceOptions,
    evolve: EvolveOptions,
    out: OutputDir,
    manifest: RunManifest,
    series: Vec<Series>,
}

type Params = BTreeMap<String, serde_json::Value>;

fn params(pairs: &[(&str, serde_json::Value)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

impl Run<'_> {
    fn record(&mut self, name: &str, file: PathBuf, cfg: &SystemConfig, parameters: Params, conv: Option<Convergence>) {
        let mut parameters = parameters;
        if let Some(c) = conv {
            parameters.insert("n_max_converged".into(), json!(c.n_max));
            parameters.insert("n_max_shift".into(), json!(c.shift));
        }
        self.manifest.note_config(cfg);
        self.manifest.series.push(SeriesRecord {
            name: name.to_string(),
            file: file.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
            config: render_config(cfg),
            parameters,
        });
        self.series.push(Series { name: name.to_string(), file, convergence: conv });
    }

    /// Raises `cfg.n_max` until `eval` is stable, when enabled.
    fn converge<F>(&self, cfg: &mut SystemConfig, eval: F) -> Result<Option<Convergence>, ExperimentError>
    where
        F: FnMut(&SystemConfig) -> Result<f64, ExperimentError>,
    {
        if !self.opts.check_convergence {
            return Ok(None);
        }
        let c = converge_n_max(cfg, eval)?;
        cfg.n_max = c.n_max;
        Ok(Some(c))
    }

    /// Driven trace from `|g00⟩` against the dark state set by `cfg`'s couplings.
    fn trace(&mut self, name: &str, mut cfg: SystemConfig, horizon: f64, extra: Params) -> Result<(), ExperimentError> {
        let evolve = self.evolve;
        let conv = self.converge(&mut cfg, |c| {
            let target = target_dark_state(c)?.state;
            let tr = run_fidelity_trace(c, &target, horizon, 2, &evolve)?;
            Ok(tr.final_fidelity().unwrap_or(0.0))
        })?;
        let target = target_dark_state(&cfg)?.state;
        let tr = run_fidelity_trace(&cfg, &target, horizon, self.opts.samples, &evolve)?;
        let file = self.out.write_trajectory(&format!("{name}.csv"), &tr)?;
        let mut p = extra;
        p.insert("horizon".into(), json!(horizon));
        p.insert("samples".into(), json!(self.opts.samples));
        self.record(name, file, &cfg, p, conv);
        Ok(())
    }

    fn peak_convergence(&self, cfg: &mut SystemConfig, target: &StateVector) -> Result<Option<Convergence>, ExperimentError> {
        let (evolve, search) = (self.evolve, self.opts.search);
        self.converge(cfg, |c| {
            let t = target.reembed(c.layout())?;
            Ok(measure_peak(c, &t, &evolve, &search)?.f_max)
        })
    }
}

fn catalog_rows(names: &[&str]) -> Result<Vec<CatalogEntry>, ExperimentError> {
    let all = catalog_w_states()?;
    Ok(names.iter().map(|n| all.iter().find(|e| e.name.starts_with(n)).expect("catalog row").clone()).collect())
}

fn slug(name: &str) -> String {
    name.split_whitespace().next().unwrap_or(name).to_string()
}

/// Writes the CSVs and manifest for `figure` under `out_dir`.
pub fn reproduce(figure: FigureId, out_dir: &Path, opts: &ReproduceOptions) -> Result<ReproduceOutput, ExperimentError> {
    let hybrid = HybridParams::default();
    let base = match figure {
        FigureId::Fig2 => ideal(SYMMETRIC_ETA, 0.0, f64::INFINITY, opts.convention),
        FigureId::Fig3a | FigureId::Fig3b | FigureId::Fig3c | FigureId::Fig3d => {
            ideal(PROTOTYPE_ETA, 0.0, f64::INFINITY, opts.convention)
        }
        _ => hybrid.config(PROTOTYPE_ETA, opts.convention),
    };
    let mut base = base;
    base.n_max = opts.n_max;
    base.validate()?;

    let mut manifest = RunManifest::new(figure.as_str(), &base);
    manifest.param("rate_convention", opts.convention.as_str());
    manifest.param("frame", opts.frame.as_str());
    manifest.param("samples", opts.samples);
    manifest.param("check_convergence", opts.check_convergence);
    let mut run = Run {
        opts,
        evolve: EvolveOptions::with_frame(opts.frame),
        out: OutputDir::create(out_dir)?,
        manifest,
        series: Vec::new(),
    };

    match figure {
        FigureId::Fig2 => {
            for init in StabilityInitial::ALL {
                let tr = run_stability(&base, init, 5.0, opts.samples, &run.evolve)?;
                let name = format!("fig2_{}", init.as_str());
                let file = run.out.write_trajectory(&format!("{name}.csv"), &tr)?;
                run.record(&name, file, &base, params(&[("initial", json!(init.as_str())), ("horizon", json!(5.0))]), None);
            }
        }
        FigureId::Fig3a => {
            let mut cfg = base.clone();
            cfg.drive.rabi = 0.01;
            let target = target_dark_state(&cfg)?.state;
            let peak = measure_peak(&cfg, &target, &run.evolve, &opts.search)?;
            run.trace("fig3a", cfg, 600.0, params(&[
                ("rabi_over_tau", json!(0.01)),
                ("t0", json!("inf")),
                ("t_max", json!(peak.t_max)),
                ("f_max", json!(peak.f_max)),
            ]))
            ?;
        }
        FigureId::Fig3b => {
            let mut cfg = base.clone();
            let target = target_dark_state(&cfg)?.state;
            let rabis: Vec<f64> = (0..=20).map(|k| 0.001 * 100f64.powf(k as f64 / 20.0)).collect();
            cfg.drive.rabi = 0.01;
            let conv = run.peak_convergence(&mut cfg, &target)?;
            let target = target.reembed(cfg.layout())?;
            let rows = sweep_drive(&cfg, &target, &rabis, &run.evolve, &opts.search)?;
            let file = run
                .out
                .write_table("fig3b.csv", &["rabi_over_tau", "f_max", "t_max"], rows.iter().map(|(r, p)| vec![*r, p.f_max, p.t_max]))
                ?;
            run.record("fig3b", file, &cfg, params(&[("rabi_over_tau", json!(rabis))]), conv);
        }
        FigureId::Fig3c => {
            for (rabi, t0) in [(0.01, 273.0), (0.05, 54.1), (0.1, 26.9)] {
                let mut cfg = base.clone();
                cfg.drive.rabi = rabi;
                cfg.drive.t0 = t0;
                let name = format!("fig3c_rabi{rabi}");
                run.trace(&name, cfg, 600.0, params(&[("rabi_over_tau", json!(rabi)), ("t0", json!(t0))]))
                    ?;
            }
        }
        FigureId::Fig3d => {
            let pulses = [(0.001, 2211.1), (0.001, 1934.7), (0.001, 2211.1)];
            for (entry, (rabi, t0)) in catalog_rows(&["W3_2", "W3_3", "W3_4"])?.into_iter().zip(pulses) {
                let mut cfg = base.clone();
                cfg.set_eta(entry.eta);
                cfg.drive.rabi = rabi;
                cfg.drive.t0 = t0;
                let name = format!("fig3d_{}", slug(entry.name));
                run.trace(&name, cfg, 4000.0, params(&[
                    ("state", json!(entry.name)),
                    ("rabi_over_tau", json!(rabi)),
                    ("t0", json!(t0)),
                ]))
                ?;
            }
        }
        FigureId::Fig4ab => {
            let mut cfg = base.clone();
            let target = target_dark_state(&cfg)?.state;
            let (lo, hi) = DEFAULT_BRACKET;
            let rabis: Vec<f64> = (0..=24).map(|k| cfg.tau * lo * (hi / lo).powf(k as f64 / 24.0)).collect();
            cfg.drive.rabi = 0.0221 * cfg.tau;
            let conv = run.peak_convergence(&mut cfg, &target)?;
            let target = target.reembed(cfg.layout())?;
            let rows = sweep_drive(&cfg, &target, &rabis, &run.evolve, &opts.search)?;
            let opt = optimize_drive(&cfg, &target, DEFAULT_BRACKET, super::DEFAULT_GRID_POINTS, &run.evolve, &opts.search)?;
            let tau = cfg.tau;
            let file = run
                .out
                .write_table("fig4ab.csv", &["rabi_over_tau", "f_max", "t_max"], rows.iter().map(|(r, p)| vec![r / tau, p.f_max, p.t_max]))
                ?;
            run.record("fig4ab", file, &cfg, params(&[
                ("rabi_opt_over_tau", json!(opt.rabi_opt / tau)),
                ("f_opt", json!(opt.f_opt)),
                ("t_opt", json!(opt.t_opt)),
                ("evaluations", json!(opt.evaluations)),
            ]), conv);
        }
        FigureId::Fig4c => {
            for (gb_inv, rabi, t0) in [(1.0, 0.0452, 0.478), (5.0, 0.0221, 0.976), (20.0, 0.0137, 1.572)] {
                let cfg = hybrid.with_gamma_b_inv(gb_inv).pulsed(PROTOTYPE_ETA, rabi, t0, opts.convention);
                let mut cfg = cfg;
                cfg.n_max = opts.n_max;
                let name = format!("fig4c_gb{gb_inv}us");
                run.trace(&name, cfg, 3.0, params(&[
                    ("gamma_b_inv_us", json!(gb_inv)),
                    ("rabi_over_tau", json!(rabi)),
                    ("t0", json!(t0)),
                ]))
                ?;
            }
        }
        FigureId::Fig4d => {
            let pulses = [(0.0221, 0.795), (0.0281, 0.547), (0.0221, 0.795)];
            for (entry, (rabi, t0)) in catalog_rows(&["W3_2", "W3_3", "W3_4"])?.into_iter().zip(pulses) {
                let mut cfg = base.clone();
                cfg.set_eta(entry.eta);
                cfg.drive.rabi = rabi * cfg.tau;
                cfg.drive.t0 = t0;
                let name = format!("fig4d_{}", slug(entry.name));
                run.trace(&name, cfg, 3.0, params(&[
                    ("state", json!(entry.name)),
                    ("rabi_over_tau", json!(rabi)),
                    ("t0", json!(t0)),
                ]))
                ?;
            }
        }
        FigureId::Fig5a => {
            let mhz: Vec<f64> = (0..=8).map(|k| 10.0 + 5.0 * k as f64).collect();
            let mut rows = Vec::new();
            let mut per_series = Vec::new();
            for gb_inv in [1.0, 5.0, 20.0] {
                let mut cfg = hybrid.with_gamma_b_inv(gb_inv).config(PROTOTYPE_ETA, opts.convention);
                cfg.n_max = opts.n_max;
                let target = target_dark_state(&cfg)?.state;
                let taus: Vec<f64> = mhz.iter().map(|m| hybrid.with_tau_mhz(*m).tau()).collect();
                let res = sweep_tau(&cfg, &target, &taus, DEFAULT_BRACKET, &run.evolve, &opts.search)?;
                // Truncation check at the weakest-coupling point's optimum.
                let mut probe = cfg.clone();
                probe.tau = taus[0];
                probe.drive.rabi = res[0].1.rabi_opt;
                let conv = run.peak_convergence(&mut probe, &target)?;
                for (m, (tau, r)) in mhz.iter().zip(&res) {
                    rows.push(vec![*m, gb_inv, r.rabi_opt / tau, r.f_opt, r.t_opt]);
                }
                per_series.push((gb_inv, cfg, conv));
            }
            let file = run
                .out
                .write_table("fig5a.csv", &["tau_over_2pi_mhz", "gamma_b_inv_us", "rabi_opt_over_tau", "f_opt", "t_opt"], rows)
                ?;
            for (gb_inv, cfg, conv) in per_series {
                run.record(&format!("fig5a_gb{gb_inv}us"), file.clone(), &cfg, params(&[
                    ("gamma_b_inv_us", json!(gb_inv)),
                    ("tau_over_2pi_mhz", json!(mhz)),
                ]), conv);
            }
        }
        FigureId::Fig5b => {
            let deltas: Vec<f64> = (-6..=6).map(|k| 0.05 * k as f64).collect();
            let target = target_dark_state(&base)?.state;
            for ch in DeviationChannel::ALL {
                let res = sweep_deviation(&base, &target, ch, &deltas, DEFAULT_BRACKET, &run.evolve, &opts.search)?;
                let mut probe = base.clone();
                probe.drive.rabi = res[deltas.len() / 2].1.rabi_opt;
                let conv = run.peak_convergence(&mut probe, &target)?;
                let tau = base.tau;
                let name = format!("fig5b_{}", ch.as_str());
                let file = run
                    .out
                    .write_table(
                        &format!("{name}.csv"),
                        &["delta", "rabi_opt_over_tau", "f_opt", "t_opt"],
                        res.iter().map(|(d, r)| vec![*d, r.rabi_opt / tau, r.f_opt, r.t_opt]),
                    )
                    ?;
                run.record(&name, file, &base, params(&[("channel", json!(ch.as_str())), ("deltas", json!(deltas))]), conv);
            }
        }
    }

    let Run { out, manifest, series, .. } = run;
    let mut written = out.written().to_vec();
    written.push(crate::io::MANIFEST_NAME.to_string());
    let manifest_path = out.finish(manifest.clone())?;
    let manifest = RunManifest { outputs: written, ..manifest };
    Ok(ReproduceOutput { figure, series, manifest_path, manifest })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_ids() {
        for f in FigureId::ALL {
            assert_eq!(FigureId::parse(f.as_str()).unwrap(), f);
        }
        assert!(matches!(FigureId::parse("fig9"), Err(ExperimentError::UnknownFigure(_))));
    }

    #[test]
    fn fig2_writes_three_curves() {
        let dir = tempfile::tempdir().unwrap();
        let opts = ReproduceOptions { samples: 51, ..Default::default() };
        let out = reproduce(FigureId::Fig2, dir.path(), &opts).unwrap();
        assert_eq!(out.series.len(), 3);
        assert_eq!(out.manifest.outputs.len(), 4);
        for f in &out.manifest.outputs {
            assert!(dir.path().join(f).exists());
        }
    }
}
