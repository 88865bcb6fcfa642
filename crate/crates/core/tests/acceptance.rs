//! Acceptance checks, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`) so the report always prints.
//! Checks listed in `EXPECTED_FAIL` are computed with their full tolerances;
//! they are reported as FAIL and do not fail the run. Any other FAIL does,
//! and so does an expected failure that starts passing.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::prelude::Rng;
use proptest::test_runner::{RngAlgorithm, TestRng};
use reservoir_w::dynamics::{
    evolve_with, oracle_states_at, states_at, uniform_grid, DensityMatrix, EvolveOptions, Trajectory,
};
use reservoir_w::experiments::presets::{ideal, HybridParams, PROTOTYPE_ETA, SYMMETRIC_ETA};
use reservoir_w::experiments::{
    measure_peak, optimize_drive, reproduce, run_fidelity_trace, run_stability, sweep_deviation, sweep_tau,
    DeviationChannel, FigureId, PeakSearch, ReproduceOptions, StabilityInitial, DEFAULT_BRACKET, DEFAULT_GRID_POINTS,
};
use reservoir_w::io::read_trajectory_csv;
use reservoir_w::model::{Frame, PulseSpec, RateConvention, SystemConfig};
use reservoir_w::qlinalg::C64;
use reservoir_w::spectral::{catalog_w_states, target_dark_state};

const EXPECTED_FAIL: &[(&str, &str)] = &[
    ("A05", "two-excitation population left at switch-off keeps relaxing into the dark state; drift ~1e-4"),
    ("A07", "t_opt for the 20 us magnon lifetime comes out near 1.34 us; the fidelity itself matches"),
    ("A12", "the number-operator reservoir has a dark manifold overlapping the W state; F reaches ~0.17"),
];

struct Outcome {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn check(id: &'static str, title: &'static str, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (pass, detail) = f();
    Outcome { id, title, pass, detail, elapsed: start.elapsed() }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn rel_within(x: f64, target: f64, rel: f64) -> bool {
    (x - target).abs() <= rel * target.abs()
}

fn prototype(rabi: f64, t0: f64) -> SystemConfig {
    ideal(PROTOTYPE_ETA, rabi, t0, RateConvention::DecayRate)
}

fn hybrid(gamma_b_inv: f64, convention: RateConvention) -> SystemConfig {
    HybridParams::default().with_gamma_b_inv(gamma_b_inv).config(PROTOTYPE_ETA, convention)
}

fn a01() -> (bool, String) {
    let cfg = ideal(SYMMETRIC_ETA, 0.0, f64::INFINITY, RateConvention::Coefficient);
    let opts = EvolveOptions::default();
    let mut worst_dark: f64 = 0.0;
    for init in [StabilityInitial::D1, StabilityInitial::D2] {
        let tr = run_stability(&cfg, init, 5.0, 501, &opts).expect("stability run");
        worst_dark = tr.fidelity.iter().fold(worst_dark, |m, f| m.max((f - 1.0).abs()));
    }
    let tr = run_stability(&cfg, StabilityInitial::Bright, 5.0, 501, &opts).expect("bright run");
    let worst_bright =
        tr.times.iter().zip(&tr.fidelity).fold(0.0f64, |m, (t, f)| m.max((f - (-6.0 * t).exp()).abs()));
    (worst_dark <= 1e-6 && worst_bright <= 1e-5, format!("max |F_D - 1| = {worst_dark:.1e}, max |F_B - e^-6t| = {worst_bright:.1e}"))
}

fn a02() -> (bool, String) {
    let mut worst: f64 = 1.0;
    for entry in catalog_w_states().expect("catalog") {
        let mut cfg = SystemConfig::dimensionless(entry.eta);
        cfg.n_max = 2;
        let d = target_dark_state(&cfg).expect("target").state;
        worst = worst.min(d.overlap_fidelity(&entry.state));
    }
    (worst >= 1.0 - 1e-10, format!("min overlap fidelity 1 - {:.1e}", 1.0 - worst))
}

fn first_peak(rabi: f64) -> (f64, f64) {
    let cfg = prototype(rabi, f64::INFINITY);
    let target = target_dark_state(&cfg).expect("target").state;
    let p = measure_peak(&cfg, &target, &EvolveOptions::default(), &PeakSearch::default()).expect("peak");
    (p.t_max, p.f_max)
}

fn a03() -> (bool, String) {
    let start = Instant::now();
    let (t, f) = first_peak(0.01);
    let secs = start.elapsed().as_secs_f64();
    (within(t, 273.0, 3.0) && within(f, 0.985, 0.003) && secs < 10.0, format!("tau t_max = {t:.2}, F_max = {f:.5}, {secs:.2} s"))
}

fn a04() -> (bool, String) {
    let start = Instant::now();
    let (t, f) = first_peak(0.001);
    let secs = start.elapsed().as_secs_f64();
    (within(t, 2720.7, 30.0) && within(f, 0.998, 0.002) && secs < 60.0, format!("tau t_max = {t:.2}, F_max = {f:.5}, {secs:.2} s"))
}

fn a05() -> (bool, String) {
    let start = Instant::now();
    let (t_max, _) = first_peak(0.01);
    let cfg = prototype(0.01, t_max);
    let target = target_dark_state(&cfg).expect("target").state;
    let rho0 = DensityMatrix::vacuum(cfg.layout());
    let mut grid = vec![0.0];
    grid.extend((0..=2000).map(|k| t_max + 10.0 * t_max * k as f64 / 2000.0));
    let tr = evolve_with(&rho0, &cfg, &target, &grid, &EvolveOptions::default()).expect("pulsed run");
    let f0 = tr.fidelity[1];
    let drift = tr.fidelity[1..].iter().fold(0.0f64, |m, f| m.max((f - f0).abs()));
    let secs = start.elapsed().as_secs_f64();
    (drift < 1e-6 && secs < 30.0, format!("t0 = {t_max:.2}, F(t0) = {f0:.6}, max drift = {drift:.2e}, {secs:.2} s"))
}

fn optimum(cfg: &SystemConfig) -> (f64, f64, f64) {
    let target = target_dark_state(cfg).expect("target").state;
    let r = optimize_drive(cfg, &target, DEFAULT_BRACKET, DEFAULT_GRID_POINTS, &EvolveOptions::default(), &PeakSearch::default())
        .expect("optimization");
    (r.rabi_opt / cfg.tau, r.f_opt, r.t_opt)
}

fn a06() -> (bool, String) {
    let start = Instant::now();
    let mut detail = Vec::new();
    let mut any = false;
    for conv in [RateConvention::DecayRate, RateConvention::Coefficient] {
        let (r, f, t) = optimum(&hybrid(5.0, conv));
        let ok = rel_within(r, 0.0221, 0.15) && within(f, 0.936, 0.01) && rel_within(t, 0.976, 0.10);
        any |= ok;
        detail.push(format!("{}: rabi/tau = {r:.4}, F = {f:.4}, t = {t:.3} us ({})", conv.as_str(), if ok { "ok" } else { "out" }));
    }
    let secs = start.elapsed().as_secs_f64();
    (any && secs < 300.0, format!("{}; {secs:.1} s", detail.join("; ")))
}

fn a07() -> (bool, String) {
    let mut pass = true;
    let mut detail = Vec::new();
    for (gb, f_ref, t_ref) in [(1.0, 0.882, 0.478), (20.0, 0.955, 1.572)] {
        let (r, f, t) = optimum(&hybrid(gb, RateConvention::DecayRate));
        pass &= within(f, f_ref, 0.01) && rel_within(t, t_ref, 0.10);
        detail.push(format!("{gb} us: rabi/tau = {r:.4}, F = {f:.4} (ref {f_ref}), t = {t:.3} us (ref {t_ref})"));
    }
    (pass, detail.join("; "))
}

fn a08() -> (bool, String) {
    let mut pass = true;
    let mut detail = Vec::new();
    for (gb, lo_ref, hi_ref) in [(1.0, 0.84, 0.922), (5.0, 0.911, 0.959), (20.0, 0.937, 0.971)] {
        let h = HybridParams::default().with_gamma_b_inv(gb);
        let cfg = h.config(PROTOTYPE_ETA, RateConvention::DecayRate);
        let target = target_dark_state(&cfg).expect("target").state;
        let taus = [h.with_tau_mhz(10.0).tau(), h.with_tau_mhz(50.0).tau()];
        let r = sweep_tau(&cfg, &target, &taus, DEFAULT_BRACKET, &EvolveOptions::default(), &PeakSearch::default())
            .expect("tau sweep");
        let (lo, hi) = (r[0].1.f_opt, r[1].1.f_opt);
        pass &= within(lo, lo_ref, 0.012) && within(hi, hi_ref, 0.012);
        detail.push(format!("{gb} us: {lo:.4} -> {hi:.4}"));
    }
    (pass, detail.join("; "))
}

fn a09() -> (bool, String) {
    let cfg = hybrid(5.0, RateConvention::DecayRate);
    let target = target_dark_state(&cfg).expect("target").state;
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for ch in DeviationChannel::ALL {
        let r = sweep_deviation(&cfg, &target, ch, &[-0.05, 0.0, 0.05], DEFAULT_BRACKET, &EvolveOptions::default(), &PeakSearch::default())
            .expect("deviation sweep");
        let base = r[1].1.f_opt;
        let dev = (r[0].1.f_opt - base).abs().max((r[2].1.f_opt - base).abs());
        worst = worst.max(dev);
        detail.push(format!("{} {dev:.4}", ch.as_str()));
    }
    (worst <= 0.02, format!("max |F(+-0.05) - F(0)|: {}", detail.join(", ")))
}

fn random_config(rng: &mut TestRng) -> SystemConfig {
    let u = |rng: &mut TestRng, lo: f64, hi: f64| lo + (hi - lo) * (rng.next_u64() as f64 / u64::MAX as f64);
    let eta = [
        C64::new(u(rng, 0.5, 2.0), u(rng, -0.5, 0.5)),
        C64::new(u(rng, -1.5, -0.3), u(rng, -0.5, 0.5)),
        C64::new(u(rng, -1.5, 1.5), u(rng, -0.5, 0.5)),
    ];
    let mut cfg = SystemConfig::dimensionless(eta);
    cfg.omega_a += u(rng, -2.0, 2.0);
    cfg.omega_b += u(rng, -2.0, 2.0);
    cfg.drive = PulseSpec { omega_d: 500.0 + u(rng, -1.0, 1.0), rabi: u(rng, 0.01, 0.15), t0: u(rng, 2.0, 15.0) };
    cfg.gamma_sigma = u(rng, 0.0, 0.05);
    cfg.gamma_a = u(rng, 0.0, 0.05);
    cfg.gamma_b = u(rng, 0.0, 0.1);
    cfg.gamma_phi = u(rng, 0.0, 0.05);
    cfg.rtol = 1e-10;
    cfg.atol = 1e-12;
    cfg
}

fn a10() -> (bool, String) {
    let start = Instant::now();
    let mut rng = TestRng::deterministic_rng(RngAlgorithm::ChaCha);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let cfg = random_config(&mut rng);
        let rho0 = DensityMatrix::vacuum(cfg.layout());
        let times = uniform_grid(20.0, 11);
        let states = states_at(&rho0, &cfg, &times, &EvolveOptions::default()).expect("integrator");
        let oracle = oracle_states_at(&rho0, &cfg, &times, false).expect("oracle");
        for (o, s) in oracle.iter().zip(&states).skip(1) {
            worst = worst.max((o.matrix() - s.matrix()).frobenius_norm());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    (worst <= 1e-8 && secs < 30.0, format!("max Frobenius distance {worst:.2e} over 5 configs x 10 checkpoints, {secs:.2} s"))
}

fn a11() -> (bool, String) {
    let mut notes = Vec::new();
    let mut pass = true;

    // Stored diagnostics and truncation guard across figure reproductions.
    let dir = tempfile::tempdir().expect("tempdir");
    let opts = ReproduceOptions::default();
    let (mut trace, mut min_eig, mut max_nmax, mut worst_shift) = (0.0f64, f64::INFINITY, 0, 0.0f64);
    for fig in [FigureId::Fig2, FigureId::Fig3a, FigureId::Fig3c, FigureId::Fig4c, FigureId::Fig4d] {
        let out = match reproduce(fig, &dir.path().join(fig.as_str()), &opts) {
            Ok(o) => o,
            Err(e) => return (false, format!("{fig}: {e}")),
        };
        for s in &out.series {
            let tr: Trajectory = read_trajectory_csv(std::fs::File::open(&s.file).expect("csv")).expect("parse csv");
            trace = trace.max(tr.max_trace_error());
            min_eig = min_eig.min(tr.min_min_eigenvalue());
            if let Some(c) = s.convergence {
                max_nmax = max_nmax.max(c.n_max);
                worst_shift = worst_shift.max(c.shift);
            }
        }
    }
    pass &= trace <= 1e-8 && min_eig >= -1e-7 && worst_shift < 1e-6;
    notes.push(format!("trace err {trace:.1e}, min eig {min_eig:.1e}, n_max shift {worst_shift:.1e} (n_max <= {max_nmax})"));

    // Hermiticity, frame equivalence and undriven excitation decay on pulsed runs.
    let mut lab_cfgs = vec![(prototype(0.1, 26.9), 60.0)];
    let mut h = HybridParams::default().pulsed(PROTOTYPE_ETA, 0.0221, 0.976, RateConvention::DecayRate);
    h.n_max = 2;
    lab_cfgs.push((h, 1.5));
    let (mut herm, mut frame_gap, mut rise) = (0.0f64, 0.0f64, f64::NEG_INFINITY);
    for (mut cfg, horizon) in lab_cfgs {
        cfg.rtol = 1e-11;
        cfg.atol = 1e-13;
        let target = target_dark_state(&cfg).expect("target").state;
        let rot = run_fidelity_trace(&cfg, &target, horizon, 301, &EvolveOptions::with_frame(Frame::RotatingAtDrive)).expect("rotating");
        let lab = run_fidelity_trace(&cfg, &target, horizon, 301, &EvolveOptions::with_frame(Frame::Lab)).expect("lab");
        herm = herm.max(rot.hermiticity_error.iter().chain(&lab.hermiticity_error).fold(0.0, |m, &x| m.max(x)));
        frame_gap = frame_gap.max(rot.fidelity.iter().zip(&lab.fidelity).fold(0.0, |m, (a, b)| m.max((a - b).abs())));
        let after: Vec<f64> = uniform_grid(horizon, 301).into_iter().filter(|&t| t == 0.0 || t > cfg.drive.t0).collect();
        let states = states_at(&DensityMatrix::vacuum(cfg.layout()), &cfg, &after, &EvolveOptions::default()).expect("states");
        let n: Vec<f64> = states[1..].iter().map(DensityMatrix::mean_excitation).collect();
        rise = n.windows(2).fold(rise, |m, w| m.max(w[1] - w[0]));
    }
    pass &= herm <= 1e-10 && frame_gap <= 1e-7 && rise <= 1e-12;
    notes.push(format!("hermiticity {herm:.1e}, lab vs rotating {frame_gap:.1e}, max excitation rise after t0 {rise:.1e}"));
    (pass, notes.join("; "))
}

fn a12() -> (bool, String) {
    let cfg = prototype(0.01, f64::INFINITY);
    let target = target_dark_state(&cfg).expect("target").state;
    let opts = EvolveOptions { dephasing_reservoir: true, ..EvolveOptions::default() };
    // Long enough to reach the asymptote (~1/6); the 600 window of the drive runs is still on the rise.
    let tr = run_fidelity_trace(&cfg, &target, 20000.0, 4001, &opts).expect("control run");
    let (i, f) = tr.fidelity.iter().enumerate().fold((0, 0.0), |b, (i, &f)| if f > b.1 { (i, f) } else { b });
    let cross = tr.times.iter().zip(&tr.fidelity).find(|(_, &f)| f >= 0.05).map(|(t, _)| *t);
    let cross = cross.map_or_else(|| "never".to_string(), |t| format!("{t:.1}"));
    (f < 0.05, format!("max F = {f:.4} at tau t = {:.1}; first F >= 0.05 at tau t = {cross}", tr.times[i]))
}

fn main() -> ExitCode {
    let outcomes = [
        check("A01", "dark states stable, bright state decays as e^-6t", a01),
        check("A02", "W-state catalog reproduced by the target dark state", a02),
        check("A03", "fig3a first peak", a03),
        check("A04", "weak-drive first peak", a04),
        check("A05", "fig3c fidelity flat after switch-off", a05),
        check("A06", "fig4 optimum, 5 us magnon lifetime", a06),
        check("A07", "fig4c optima, 1 us and 20 us magnon lifetimes", a07),
        check("A08", "fig5a sweep endpoints", a08),
        check("A09", "fig5b robustness at delta = +-0.05", a09),
        check("A10", "integrator agrees with supermatrix exponential", a10),
        check("A11", "invariants across figure runs", a11),
        check("A12", "dephasing reservoir does not prepare the W state", a12),
    ];

    let mut unexpected = Vec::new();
    for o in &outcomes {
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("{status} {} {} :: {} [{:.2} s]", o.id, o.title, o.detail, o.elapsed.as_secs_f64());
        match (o.pass, EXPECTED_FAIL.iter().find(|(id, _)| *id == o.id)) {
            (false, Some((_, why))) => println!("     expected: {why}"),
            (false, None) => unexpected.push(format!("{} failed", o.id)),
            (true, Some(_)) => unexpected.push(format!("{} passed but is listed as an expected failure", o.id)),
            (true, None) => {}
        }
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("{passed}/{} passed, {} expected failures", outcomes.len(), EXPECTED_FAIL.len());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        for u in &unexpected {
            println!("unexpected: {u}");
        }
        ExitCode::FAILURE
    }
}
