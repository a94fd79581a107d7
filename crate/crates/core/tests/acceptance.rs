//! Acceptance suite. Each test prints one `PASS`/`FAIL` line with the observed
//! values before asserting.

mod common;

use std::io::Write;
use std::time::{Duration, Instant};

use common::{grid_threshold, oracle_feasibility, ORACLE_SAMPLES};
use cvqkd::angle::{circular_std, wrap, wrapped_differences};
use cvqkd::evm::{min_eigenvalue, partial_transpose, EvmInstance};
use cvqkd::feasibility::{separability_feasible, DEFAULT_TOL};
use cvqkd::fock::{pure_loss_evm, verify_stokes_identity, FockOracle};
use cvqkd::io::{save_pulses, Preset, RunConfig};
use cvqkd::model::{ChannelModel, ProtocolParams};
use cvqkd::pipeline::{analyze, run_simulate, run_witness};
use cvqkd::receiver::{calibrate, estimate_channel, process, remap_frames};
use cvqkd::simulator::FrameSimulator;
use cvqkd::stokes::StokesMoments;
use cvqkd::witness::{
    symmetric_noise_instance, symmetric_noise_moments, tolerable_variance_threshold,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N_LO: f64 = 1e8;

fn report(id: &str, ok: bool, elapsed: Duration, budget: Duration, detail: String) {
    let within = elapsed <= budget;
    // written past the test harness capture so the line shows up in plain runs
    let _ = writeln!(
        std::io::stdout().lock(),
        "criterion {id}: {} ({detail}; {:.2?} of {:.0?})",
        if ok && within { "PASS" } else { "FAIL" },
        elapsed,
        budget
    );
    assert!(ok, "criterion {id} failed: {detail}");
    assert!(within, "criterion {id} exceeded its runtime budget");
}

#[test]
fn criterion_1_operator_identity() {
    let t = Instant::now();
    let oracle = FockOracle::new(16, 16).unwrap();
    let cases = [
        (0.0, 0.0),
        (2.0, 0.0),
        (0.0, 2.0),
        (2.0, 1.5),
        (3.0, 1.0),
        (1.0, 3.0),
    ];
    let worst = cases
        .iter()
        .map(|&(lo, sig)| verify_stokes_identity(&oracle, lo, sig).unwrap())
        .fold(0.0, f64::max);
    report(
        "1",
        worst < 1e-10,
        t.elapsed(),
        Duration::from_secs(1),
        format!("max residual {worst:.2e} < 1e-10 at 16x16"),
    );
}

#[test]
fn criterion_2_calibration_contract() {
    let t = Instant::now();
    let p = ProtocolParams::default();
    let ch = ChannelModel::back_to_back();
    let fit = FrameSimulator::new(p, ch, 21)
        .unwrap()
        .blocked(1_000_000)
        .unwrap();
    let cal = calibrate(&fit).unwrap();
    // gains applied to an independent blocked run
    let check = FrameSimulator::new(p, ch, 22)
        .unwrap()
        .blocked(1_000_000)
        .unwrap();
    let var = |f: &dyn Fn(&cvqkd::PulseRecord) -> f64| {
        let n = check.len() as f64;
        let m = check.iter().map(f).sum::<f64>() / n;
        check.iter().map(|r| (f(r) - m).powi(2)).sum::<f64>() / (n - 1.0)
    };
    let v2 = var(&|r| cal.apply(r.s2_meas, r.s3_meas).0);
    let v3 = var(&|r| cal.apply(r.s2_meas, r.s3_meas).1);
    let long = FrameSimulator::new(p, ch, 23)
        .unwrap()
        .blocked(5_000_000)
        .unwrap();
    let worst = calibrate(&long).unwrap().snl_reduction_worst;
    let ok = (v2 - 1.0).abs() <= 0.005 && (v3 - 1.0).abs() <= 0.005 && worst < 1e-3;
    report(
        "2",
        ok,
        t.elapsed(),
        Duration::from_secs(30),
        format!("calibrated variances {v2:.4}, {v3:.4} (1.000 +- 0.005); worst reduction term {worst:.2e} < 1e-3"),
    );
}

#[test]
fn criterion_3_mean_and_variance() {
    let t = Instant::now();
    let p = ProtocolParams::with_alpha(0.5);
    let ch = ChannelModel::fiber_2km();
    let sim = FrameSimulator::new(p, ch, 31).unwrap();
    // 156 250 frames x 32 slots = 5e6 pulses
    let records = sim.frames(156_250).unwrap();
    let cal = calibrate(&sim.blocked(2_000_000).unwrap()).unwrap();
    let (m, _) = process(&records, &cal, &p).unwrap();
    let mean = 0.5 * (m.states[0].mean_s2 - m.states[1].mean_s2);
    let var = m.average_intrinsic_variance();
    let eta = estimate_channel(&m, 0.5).unwrap().eta_hat;
    let expected_mean = 2.0 * 0.448f64.sqrt() * 0.5;
    let ok = (mean - expected_mean).abs() <= 0.005
        && (var - 1.0).abs() <= 0.01
        && (eta - 0.448).abs() <= 0.01;
    report(
        "3",
        ok,
        t.elapsed(),
        Duration::from_secs(120),
        format!(
            "intrinsic mean {mean:.4} (0.6693 +- 0.005), variance {var:.4} (1.00 +- 0.01), eta_hat {eta:.4} (0.448 +- 0.01)"
        ),
    );
}

#[test]
fn criterion_4_phase_tracking() {
    let t = Instant::now();
    let n_frames = 20_000;
    let run = |alpha_cal: f64, seed: u64| {
        let p = ProtocolParams {
            alpha_cal,
            ..ProtocolParams::default()
        };
        let sim = FrameSimulator::new(p, ChannelModel::back_to_back(), seed).unwrap();
        let truth = sim.frame_phases(n_frames);
        let frames = remap_frames(&sim.frames(n_frames).unwrap(), &p).unwrap();
        let est: Vec<f64> = frames.iter().map(|f| f.phi_hat).collect();
        // the estimator reports the apparent rotation, i.e. minus the drift
        let errors: Vec<f64> = est.iter().zip(&truth).map(|(e, p)| wrap(e + p)).collect();
        let drift = circular_std(&wrapped_differences(&est)).to_degrees();
        (drift, circular_std(&errors))
    };
    let (drift, _) = run(100.0, 41);
    let grid = [2.0, 5.0, 10.0, 20.0, 50.0];
    let errs: Vec<f64> = grid.iter().map(|&a| run(a, 42).1).collect();
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    report(
        "4",
        (drift - 4.0).abs() <= 0.2 && decreasing,
        t.elapsed(),
        Duration::from_secs(60),
        format!(
            "recovered drift {drift:.3} deg (4 +- 0.2); estimator std over alpha_cal {grid:?}: {:?} deg",
            errs.iter().map(|e| (e.to_degrees() * 1e3).round() / 1e3).collect::<Vec<_>>()
        ),
    );
}

fn random_instance(rng: &mut ChaCha8Rng) -> EvmInstance {
    let alpha = rng.random_range(0.05..0.9);
    let eta: f64 = rng.random_range(0.3..1.0);
    let mu = 2.0 * eta.sqrt() * alpha;
    let mut state = |sign: f64| {
        StokesMoments::from_centered(
            sign * mu * rng.random_range(0.95..1.05),
            rng.random_range(-0.05..0.05),
            rng.random_range(1.0..1.8),
            rng.random_range(1.0..1.8),
            rng.random_range(-0.1..0.1),
            N_LO,
        )
        .unwrap()
    };
    let states = [state(1.0), state(-1.0)];
    EvmInstance::from_moments(&states, alpha, N_LO).unwrap()
}

#[test]
fn criterion_5_witness_correctness() {
    let t = Instant::now();
    let mut notes = Vec::new();

    // (a) identical states
    let vac = EvmInstance::from_moments(
        &symmetric_noise_moments(0.0, 1.0, 1.0, N_LO).unwrap(),
        0.0,
        N_LO,
    )
    .unwrap();
    let a = separability_feasible(&vac, DEFAULT_TOL).feasible;
    notes.push(format!("(a) alpha=0 feasible: {a}"));

    // (b) exact pure-loss states, analytic moments and brute-force Fock matrix
    let oracle = FockOracle::new(14, 170).unwrap();
    let mut b = true;
    let mut worst_entry = 0.0f64;
    let mut worst_margin = f64::NEG_INFINITY;
    for eta in [1.0, 0.7, 0.448] {
        for k in 1..=8 {
            let alpha = 0.1 * k as f64;
            let inst = symmetric_noise_instance(alpha, eta, 1.0, N_LO).unwrap();
            let r = separability_feasible(&inst, DEFAULT_TOL);
            let o = oracle_feasibility(&inst, 2_000, k as u64);
            worst_margin = worst_margin.max(r.upper_bound.unwrap_or(f64::INFINITY));
            // exact state at n_lo = 100: its own matrix is a completion whose
            // partial transpose is not PSD, and the fixed entries match
            let exact = pure_loss_evm(&oracle, alpha, eta, 10.0).unwrap();
            let pt_min = min_eigenvalue(&partial_transpose(&exact.chi).unwrap());
            if k == 3 {
                // strong-LO moments against the finite-LO state; the gap is
                // eta alpha^2 / (2 n_lo)
                let inst100 = symmetric_noise_instance(alpha, eta, 1.0, 100.0).unwrap();
                for r_ in 0..6 {
                    for c in 0..6 {
                        let fixed = (r_ / 3 == c / 3) || (r_ % 3 == 0 && c % 3 == 0);
                        if fixed {
                            worst_entry = worst_entry
                                .max((exact.chi[(r_, c)] - inst100.fixed[(r_, c)]).norm());
                        }
                    }
                }
            }
            let from_fock = EvmInstance::from_moments(&exact.moments, alpha, 100.0).unwrap();
            let fock_verdict = separability_feasible(&from_fock, DEFAULT_TOL).feasible;
            b &= !r.feasible && !o.feasible && pt_min < 0.0 && !fock_verdict;
        }
    }
    b &= worst_entry < 1e-3;
    notes.push(format!(
        "(b) 24 pure-state instances infeasible: {b} (max dual bound {worst_margin:.2e}, Fock entry mismatch at alpha 0.3 {worst_entry:.1e})"
    ));

    // (c) separable model: no coherence between the branches
    let sep = symmetric_noise_instance(0.4, 0.7, 1.0, N_LO)
        .unwrap()
        .with_overlap_entry(0.0);
    let c = separability_feasible(&sep, DEFAULT_TOL).feasible;
    notes.push(format!("(c) separable completion feasible: {c}"));

    // (d) randomized agreement with the independent oracle
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let (mut agree, mut feasible_count, mut resampled) = (0, 0, 0);
    let mut checked = 0;
    while checked < 100 {
        let inst = random_instance(&mut rng);
        let o = oracle_feasibility(&inst, ORACLE_SAMPLES, rng.random());
        if o.ambiguous {
            resampled += 1;
            continue;
        }
        checked += 1;
        let r = separability_feasible(&inst, DEFAULT_TOL);
        if r.feasible == o.feasible {
            agree += 1;
        } else {
            println!(
                "  disagreement: solver {} oracle {:?}",
                r.best_min_eigenvalue, o
            );
        }
        feasible_count += usize::from(o.feasible);
    }
    let d = agree == 100 && feasible_count > 0 && feasible_count < 100;
    notes.push(format!(
        "(d) {agree}/100 agree ({feasible_count} feasible, {resampled} ambiguous draws resampled)"
    ));

    report(
        "5",
        a && b && c && d,
        t.elapsed(),
        Duration::from_secs(300),
        notes.join("; "),
    );
}

#[test]
fn criterion_6_threshold_curves() {
    let t = Instant::now();
    let alphas = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
    let etas = [0.3, 0.448, 0.55, 0.7, 0.85, 1.0];
    let th = |a: f64, e: f64| tolerable_variance_threshold(a, e, N_LO, DEFAULT_TOL).unwrap();
    let mut ok = true;
    let mut notes = Vec::new();
    for eta in [1.0, 0.7, 0.448] {
        let row: Vec<f64> = alphas.iter().map(|&a| th(a, eta).variance).collect();
        ok &= row.windows(2).all(|w| w[1] <= w[0]);
        notes.push(format!("eta {eta}: {row:.4?}"));
    }
    for alpha in [0.2, 0.5] {
        let col: Vec<f64> = etas.iter().map(|&e| th(alpha, e).variance).collect();
        ok &= col.windows(2).all(|w| w[1] >= w[0]);
        notes.push(format!("alpha {alpha}: {col:.4?}"));
    }
    let mut worst_gap = 0.0f64;
    let mut bracketed = 0;
    for &(a, e) in &[
        (0.1, 1.0),
        (0.3, 1.0),
        (0.6, 1.0),
        (0.3, 0.448),
        (0.5, 0.7),
        (0.8, 0.448),
    ] {
        let b = th(a, e);
        ok &= b.certifiable && b.feasible_above - b.variance < 1e-4;
        let g = grid_threshold(a, e, N_LO).unwrap();
        worst_gap = worst_gap.max((g - b.variance).abs());
        // the independent oracle brackets the threshold
        let below = oracle_feasibility(
            &symmetric_noise_instance(a, e, b.variance - 0.01, N_LO).unwrap(),
            5_000,
            1,
        );
        let above = oracle_feasibility(
            &symmetric_noise_instance(a, e, b.variance + 0.01, N_LO).unwrap(),
            5_000,
            2,
        );
        // near-flat curves (small alpha) leave the oracle undecided; only a
        // contradicting decisive verdict counts against the solver
        let contradicts = below.feasible || (!above.feasible && !above.ambiguous);
        if contradicts {
            ok = false;
            notes.push(format!(
                "oracle contradicts bisection at ({a}, {e}): {below:?} / {above:?}"
            ));
        }
        bracketed += usize::from(!below.ambiguous && above.feasible);
    }
    ok &= bracketed >= 4;
    notes.push(format!(
        "oracle brackets {bracketed}/6 thresholds to +-0.01"
    ));
    ok &= worst_gap <= 2e-4;
    let v03 = th(0.3, 1.0).variance;
    ok &= (v03 - 1.49825).abs() <= 2e-4;
    notes.push(format!(
        "bisection vs grid scan max gap {worst_gap:.1e} (<= 2e-4); threshold(0.3, 1.0) = {v03:.5}"
    ));
    report(
        "6",
        ok,
        t.elapsed(),
        Duration::from_secs(600),
        notes.join("; "),
    );
}

/// Largest grid amplitude below which every grid point certifies.
fn cutoff(excess: f64, grid: &[f64]) -> f64 {
    let mut last = 0.0;
    for &alpha in grid {
        let cfg = RunConfig {
            preset: Preset::Fiber2km,
            params: ProtocolParams::with_alpha(alpha),
            channel: cvqkd::io::ChannelOverrides {
                excess_noise: Some(excess),
                ..Default::default()
            },
            n_frames: 30_000,
            seed: 70 + (alpha * 100.0) as u64,
            snl_pulses: 200_000,
            ..RunConfig::default()
        };
        if run_witness(&cfg).unwrap().verdict.entangled {
            last = alpha;
        } else {
            break;
        }
    }
    last
}

#[test]
fn criterion_7_end_to_end() {
    let t = Instant::now();
    let mut ok = true;
    let mut b2b = Vec::new();
    for alpha in [0.2, 0.3, 0.4, 0.5] {
        let cfg = RunConfig {
            params: ProtocolParams::with_alpha(alpha),
            n_frames: 50_000,
            seed: 7,
            snl_pulses: 500_000,
            ..RunConfig::default()
        };
        let v = run_witness(&cfg).unwrap().verdict;
        ok &= v.entangled;
        b2b.push(format!(
            "{alpha}: {:.4} < {:.4}",
            v.intrinsic_variance,
            v.bound_variance - v.margin_3sigma - v.snl_shift
        ));
    }
    let fiber = RunConfig {
        preset: Preset::Fiber2km,
        params: ProtocolParams::with_alpha(0.4),
        n_frames: 50_000,
        snl_pulses: 500_000,
        ..RunConfig::default()
    };
    let at04 = run_witness(&fiber).unwrap().verdict.entangled;
    ok &= at04;
    let grid: Vec<f64> = (4..=24).map(|k| f64::from(k) / 20.0).collect();
    let cuts: Vec<(f64, f64)> = [0.0, 0.06, 0.12]
        .iter()
        .map(|&e| (e, cutoff(e, &grid)))
        .collect();
    ok &= cuts.windows(2).all(|w| w[1].1 < w[0].1);
    report(
        "7",
        ok,
        t.elapsed(),
        Duration::from_secs(600),
        format!("back-to-back {b2b:?}; 2 km alpha 0.4 entangled: {at04}; cutoffs (excess, alpha) {cuts:?}"),
    );
}

#[test]
fn criterion_8_determinism() {
    let t = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let mut cfg = RunConfig {
            n_frames: 5_000,
            snl_pulses: 20_000,
            seed: 8,
            ..RunConfig::default()
        };
        cfg.output.dataset = dir.path().join(format!("{name}.csv"));
        run_simulate(&cfg).unwrap();
        let data = std::fs::read(&cfg.output.dataset).unwrap();
        let snl = std::fs::read(cfg.output.snl_path()).unwrap();
        let records = cvqkd::io::load_pulses(&cfg.output.dataset).unwrap();
        let snl_records = cvqkd::io::load_pulses(&cfg.output.snl_path()).unwrap();
        let report = analyze(&records, Some(&snl_records), &cfg.params).unwrap();
        (data, snl, serde_json::to_string(&report).unwrap())
    };
    let (d1, s1, r1) = run("a");
    let (d2, s2, r2) = run("b");
    // re-serializing parsed data reproduces the file
    let reparsed = dir.path().join("c.csv");
    save_pulses(
        &reparsed,
        &cvqkd::io::load_pulses(&dir.path().join("a.csv")).unwrap(),
    )
    .unwrap();
    let round_trip = std::fs::read(&reparsed).unwrap() == d1;
    let signal_rows = d1
        .split(|&b| b == b'\n')
        .filter(|l| l.windows(5).any(|w| w == b",sig,"))
        .count();
    let ok = d1 == d2 && s1 == s2 && r1 == r2 && round_trip && signal_rows == 5_000 * 28;
    report(
        "8",
        ok,
        t.elapsed(),
        Duration::from_secs(60),
        format!(
            "datasets identical: {}, verdicts identical: {}, round trip: {round_trip}",
            d1 == d2 && s1 == s2,
            r1 == r2
        ),
    );
}
