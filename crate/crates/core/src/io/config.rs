//! TOML run configuration.
//!
//! Bare numbers are in the internal units of the chosen `unit_mode`: units of
//! τ for `dimensionless`, rad/μs, 1/μs and μs for `physical`. Physical configs
//! may instead write `"20 MHz"` (ordinary frequency, converted with 2π),
//! `"60 us"` for a rate (read as a lifetime) or `"0.976 us"` for a time.
//! Frequencies also accept `"0.0221 tau"` in either mode.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::ops::Range;

use serde::Deserialize;
use toml::Spanned;

use crate::experiments::DeviationChannel;
use crate::model::{Frame, PulseSpec, RateConvention, SystemConfig, UnitMode};
use crate::qlinalg::C64;

use super::IoError;

/// Run settings carried alongside the system in one config file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunSpec {
    pub horizon: Option<f64>,
    pub samples: Option<usize>,
    pub frame: Option<Frame>,
    pub dephasing_reservoir: bool,
    /// Drive strengths for `sweep-drive`, in the system's units.
    pub rabi_values: Vec<f64>,
    pub tau_values: Vec<f64>,
    pub deltas: Vec<f64>,
    pub deviation: Option<DeviationChannel>,
    /// Optimization bracket in units of τ.
    pub bracket: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigDocument {
    pub system: SystemConfig,
    pub run: RunSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    unit_mode: Option<Spanned<String>>,
    rate_convention: Option<Spanned<String>>,
    tau: Option<Spanned<Quantity>>,
    omega_sigma: Option<Spanned<Quantity>>,
    omega_a: Option<Spanned<Quantity>>,
    omega_b: Option<Spanned<Quantity>>,
    eta: Option<Spanned<Vec<Coupling>>>,
    gamma_sigma: Option<Spanned<Quantity>>,
    gamma_a: Option<Spanned<Quantity>>,
    gamma_b: Option<Spanned<Quantity>>,
    gamma_phi: Option<Spanned<Quantity>>,
    n_max: Option<usize>,
    rtol: Option<f64>,
    atol: Option<f64>,
    drive: Option<RawDrive>,
    run: Option<RawRun>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDrive {
    omega_d: Option<Spanned<Quantity>>,
    rabi: Option<Spanned<Quantity>>,
    t0: Option<Spanned<Quantity>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    horizon: Option<Spanned<Quantity>>,
    samples: Option<usize>,
    frame: Option<Spanned<String>>,
    dephasing_reservoir: Option<bool>,
    rabi_values: Option<Vec<Spanned<Quantity>>>,
    tau_values: Option<Vec<Spanned<Quantity>>>,
    deltas: Option<Vec<f64>>,
    deviation: Option<Spanned<String>>,
    bracket: Option<[f64; 2]>,
}

#[derive(Deserialize, Clone)]
#[serde(untagged)]
enum Quantity {
    Number(f64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Coupling {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Frequency,
    Rate,
    Time,
}

struct Ctx<'a> {
    text: &'a str,
    mode: UnitMode,
    tau: f64,
}

impl Ctx<'_> {
    fn err(&self, span: Range<usize>, key: &str, reason: impl Into<String>) -> IoError {
        IoError::Value { line: Some(line_of(self.text, span.start)), key: key.to_string(), reason: reason.into() }
    }

    fn quantity(&self, q: &Spanned<Quantity>, key: &str, kind: Kind) -> Result<f64, IoError> {
        let text = match q.get_ref() {
            Quantity::Number(x) => return Ok(*x),
            Quantity::Text(s) => s.trim(),
        };
        let mut parts = text.split_whitespace();
        let (Some(num), Some(unit), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(self.err(q.span(), key, format!("expected a number or \"<value> <unit>\", got \"{text}\"")));
        };
        let x: f64 = num.parse().map_err(|_| self.err(q.span(), key, format!("'{num}' is not a number")))?;
        let physical_only = |v: f64| {
            if self.mode == UnitMode::Physical {
                Ok(v)
            } else {
                Err(self.err(
                    q.span(),
                    key,
                    format!("unit '{unit}' in a dimensionless config; set unit_mode = \"physical\" or drop the unit"),
                ))
            }
        };
        let time_us = |x: f64| match unit {
            "us" | "μs" => Some(x),
            "ns" => Some(x * 1e-3),
            "ms" => Some(x * 1e3),
            _ => None,
        };
        let bad_unit = || self.err(q.span(), key, format!("unit '{unit}' does not fit this field"));
        match kind {
            Kind::Frequency => match unit {
                "tau" => Ok(x * self.tau),
                "kHz" => physical_only(TAU * x * 1e-3),
                "MHz" => physical_only(TAU * x),
                "GHz" => physical_only(TAU * x * 1e3),
                _ => Err(bad_unit()),
            },
            Kind::Rate => match time_us(x) {
                Some(t) if t > 0.0 => physical_only(1.0 / t),
                Some(_) => Err(self.err(q.span(), key, "lifetime must be > 0")),
                None => Err(bad_unit()),
            },
            Kind::Time => time_us(x).map_or_else(|| Err(bad_unit()), physical_only),
        }
    }

    fn opt(&self, q: &Option<Spanned<Quantity>>, key: &str, kind: Kind, default: f64) -> Result<f64, IoError> {
        q.as_ref().map_or(Ok(default), |q| self.quantity(q, key, kind))
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

fn enum_value<T>(
    text: &str,
    v: &Spanned<String>,
    key: &str,
    parse: impl Fn(&str) -> Option<T>,
    allowed: &str,
) -> Result<T, IoError> {
    parse(v.get_ref()).ok_or_else(|| IoError::Value {
        line: Some(line_of(text, v.span().start)),
        key: key.to_string(),
        reason: format!("'{}' is not one of {allowed}", v.get_ref()),
    })
}

fn parse_unit_mode(s: &str) -> Option<UnitMode> {
    [UnitMode::Dimensionless, UnitMode::Physical].into_iter().find(|m| m.as_str() == s)
}

fn parse_convention(s: &str) -> Option<RateConvention> {
    [RateConvention::Coefficient, RateConvention::DecayRate].into_iter().find(|m| m.as_str() == s)
}

fn parse_frame(s: &str) -> Option<Frame> {
    [Frame::Lab, Frame::RotatingAtDrive].into_iter().find(|m| m.as_str() == s)
}

/// System part of a config file.
pub fn parse_config(text: &str) -> Result<SystemConfig, IoError> {
    parse_document(text).map(|d| d.system)
}

pub fn parse_document(text: &str) -> Result<ConfigDocument, IoError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| IoError::Syntax {
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().trim().to_string(),
    })?;

    let mode = match &raw.unit_mode {
        Some(v) => enum_value(text, v, "unit_mode", parse_unit_mode, "dimensionless, physical")?,
        None => UnitMode::Dimensionless,
    };
    let rate_convention = match &raw.rate_convention {
        Some(v) => enum_value(text, v, "rate_convention", parse_convention, "coefficient, decay_rate")?,
        None => RateConvention::Coefficient,
    };
    let mut ctx = Ctx { text, mode, tau: 1.0 };
    ctx.tau = match (&raw.tau, mode) {
        (Some(q), _) => ctx.quantity(q, "tau", Kind::Frequency)?,
        (None, UnitMode::Dimensionless) => 1.0,
        (None, UnitMode::Physical) => {
            return Err(IoError::Value { line: None, key: "tau".into(), reason: "physical configs must set tau".into() })
        }
    };
    let tau = ctx.tau;

    let eta = match &raw.eta {
        None => {
            return Err(IoError::Value { line: None, key: "eta".into(), reason: "missing coupling vector".into() })
        }
        Some(v) if v.get_ref().len() != 3 => {
            return Err(ctx.err(v.span(), "eta", format!("expected 3 entries, got {}", v.get_ref().len())))
        }
        Some(v) => {
            let z = |c: &Coupling| match *c {
                Coupling::Real(x) => C64::new(x, 0.0),
                Coupling::Complex([re, im]) => C64::new(re, im),
            };
            let e = v.get_ref();
            [z(&e[0]), z(&e[1]), z(&e[2])]
        }
    };

    let omega_default = 500.0 * tau;
    let omega_sigma = ctx.opt(&raw.omega_sigma, "omega_sigma", Kind::Frequency, omega_default)?;
    let drive = raw.drive.as_ref();
    let system = SystemConfig {
        omega_sigma,
        omega_a: ctx.opt(&raw.omega_a, "omega_a", Kind::Frequency, omega_default)?,
        omega_b: ctx.opt(&raw.omega_b, "omega_b", Kind::Frequency, omega_default)?,
        tau,
        eta_sigma: eta[0],
        eta_a: eta[1],
        eta_b: eta[2],
        drive: PulseSpec {
            omega_d: ctx.opt(&drive.and_then(|d| d.omega_d.clone()), "drive.omega_d", Kind::Frequency, omega_sigma)?,
            rabi: ctx.opt(&drive.and_then(|d| d.rabi.clone()), "drive.rabi", Kind::Frequency, 0.0)?,
            t0: ctx.opt(&drive.and_then(|d| d.t0.clone()), "drive.t0", Kind::Time, f64::INFINITY)?,
        },
        gamma_sigma: ctx.opt(&raw.gamma_sigma, "gamma_sigma", Kind::Rate, 0.0)?,
        gamma_a: ctx.opt(&raw.gamma_a, "gamma_a", Kind::Rate, 0.0)?,
        gamma_b: ctx.opt(&raw.gamma_b, "gamma_b", Kind::Rate, 0.0)?,
        gamma_phi: ctx.opt(&raw.gamma_phi, "gamma_phi", Kind::Rate, 0.0)?,
        n_max: raw.n_max.unwrap_or(2),
        unit_mode: mode,
        rate_convention,
        rtol: raw.rtol.unwrap_or(SystemConfig::DEFAULT_RTOL),
        atol: raw.atol.unwrap_or(SystemConfig::DEFAULT_ATOL),
    };
    system.validate()?;

    let mut run = RunSpec::default();
    if let Some(r) = &raw.run {
        if let Some(h) = &r.horizon {
            let v = ctx.quantity(h, "run.horizon", Kind::Time)?;
            if !(v.is_finite() && v > 0.0) {
                return Err(ctx.err(h.span(), "run.horizon", "must be finite and > 0"));
            }
            run.horizon = Some(v);
        }
        run.samples = r.samples;
        if let Some(f) = &r.frame {
            run.frame = Some(enum_value(text, f, "run.frame", parse_frame, "lab, rotating")?);
        }
        run.dephasing_reservoir = r.dephasing_reservoir.unwrap_or(false);
        let list = |v: &Option<Vec<Spanned<Quantity>>>, key: &str| -> Result<Vec<f64>, IoError> {
            v.iter().flatten().map(|q| ctx.quantity(q, key, Kind::Frequency)).collect()
        };
        run.rabi_values = list(&r.rabi_values, "run.rabi_values")?;
        run.tau_values = list(&r.tau_values, "run.tau_values")?;
        run.deltas = r.deltas.clone().unwrap_or_default();
        if let Some(d) = &r.deviation {
            run.deviation = Some(enum_value(text, d, "run.deviation", DeviationChannel::parse, "qubit, resonator, magnon")?);
        }
        run.bracket = r.bracket.map(|[a, b]| (a, b));
    }
    Ok(ConfigDocument { system, run })
}

fn num(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else {
        format!("{x:?}")
    }
}

fn nums(xs: &[f64]) -> String {
    let inner: Vec<String> = xs.iter().map(|&x| num(x)).collect();
    format!("[{}]", inner.join(", "))
}

/// Renders in internal units so that `parse_config(render_config(c)) == c`.
pub fn render_config(cfg: &SystemConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "unit_mode = \"{}\"", cfg.unit_mode.as_str());
    let _ = writeln!(s, "rate_convention = \"{}\"", cfg.rate_convention.as_str());
    let _ = writeln!(s, "tau = {}", num(cfg.tau));
    let _ = writeln!(s, "omega_sigma = {}", num(cfg.omega_sigma));
    let _ = writeln!(s, "omega_a = {}", num(cfg.omega_a));
    let _ = writeln!(s, "omega_b = {}", num(cfg.omega_b));
    let eta: Vec<String> = cfg.eta().iter().map(|z| format!("[{}, {}]", num(z.re), num(z.im))).collect();
    let _ = writeln!(s, "eta = [{}]", eta.join(", "));
    let _ = writeln!(s, "gamma_sigma = {}", num(cfg.gamma_sigma));
    let _ = writeln!(s, "gamma_a = {}", num(cfg.gamma_a));
    let _ = writeln!(s, "gamma_b = {}", num(cfg.gamma_b));
    let _ = writeln!(s, "gamma_phi = {}", num(cfg.gamma_phi));
    let _ = writeln!(s, "n_max = {}", cfg.n_max);
    let _ = writeln!(s, "rtol = {}", num(cfg.rtol));
    let _ = writeln!(s, "atol = {}", num(cfg.atol));
    let _ = writeln!(s, "\n[drive]");
    let _ = writeln!(s, "omega_d = {}", num(cfg.drive.omega_d));
    let _ = writeln!(s, "rabi = {}", num(cfg.drive.rabi));
    let _ = writeln!(s, "t0 = {}", num(cfg.drive.t0));
    s
}

pub fn render_document(doc: &ConfigDocument) -> String {
    let mut s = render_config(&doc.system);
    let r = &doc.run;
    if *r == RunSpec::default() {
        return s;
    }
    let _ = writeln!(s, "\n[run]");
    if let Some(h) = r.horizon {
        let _ = writeln!(s, "horizon = {}", num(h));
    }
    if let Some(n) = r.samples {
        let _ = writeln!(s, "samples = {n}");
    }
    if let Some(f) = r.frame {
        let _ = writeln!(s, "frame = \"{}\"", f.as_str());
    }
    if r.dephasing_reservoir {
        let _ = writeln!(s, "dephasing_reservoir = true");
    }
    for (key, v) in [("rabi_values", &r.rabi_values), ("tau_values", &r.tau_values), ("deltas", &r.deltas)] {
        if !v.is_empty() {
            let _ = writeln!(s, "{key} = {}", nums(v));
        }
    }
    if let Some(d) = r.deviation {
        let _ = writeln!(s, "deviation = \"{}\"", d.as_str());
    }
    if let Some((a, b)) = r.bracket {
        let _ = writeln!(s, "bracket = {}", nums(&[a, b]));
    }
    s
}
