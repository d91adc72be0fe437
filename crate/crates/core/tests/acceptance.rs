//! Acceptance run: one PASS/FAIL line per criterion, with the individual
//! checks indented below it. Checks listed in `KNOWN_UNATTAINABLE` are
//! expected to fail; the run exits non-zero on any other failure and on
//! any expected failure that starts passing.

use std::f64::consts::PI;
use std::time::Instant;

use tlsgate::calibration::{
    calibrate_hadamard, calibrate_two_qubit, calibrate_x, cirac_zoller_plan, decoherence_estimate,
    residual_dephasing_rate,
};
use tlsgate::circuit::{
    max_drive_amplitude, phase_flux, phase_shift_residual, resonator_frequency, solve_phase_shift,
    CircuitParams,
};
use tlsgate::dispersive::{dressed_energy, effective_detuning, rabi_frequency};
use tlsgate::experiments::{
    preset, preset_fig3_swap, run_experiment, ExperimentName, ExperimentResult,
};
use tlsgate::fidelity::{nielsen_fidelity_in_basis, plan_fidelity, OperatorBasis};
use tlsgate::hamiltonian::{build_hamiltonian, collapse_operators, Frame, SystemConfig, Tls};
use tlsgate::lindblad::{
    dispersive_oracle_deviation, evolve, simulate_gate_channel, ChannelOptions, EvolveOptions,
    Generator,
};
use tlsgate::operator::{c, expm_hermitian, max_abs, number, DensityMatrix, C64};
use tlsgate::units::rad_per_s_to_mhz;

const KNOWN_UNATTAINABLE: &[&str] = &["6c"];

type Criterion = fn() -> Vec<Check>;

struct Check {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn check(id: &'static str, pass: bool, detail: String) -> Check {
    Check { id, pass, detail }
}

fn within(x: f64, target: f64, rel: f64) -> bool {
    (x - target).abs() <= rel * target.abs()
}

fn single_config() -> SystemConfig {
    SystemConfig::new(
        vec![Tls {
            delta: 40.0,
            g: 40.0,
        }],
        120.0,
        0.0,
    )
}

fn pair_config() -> SystemConfig {
    SystemConfig::new(
        vec![
            Tls {
                delta: 0.0,
                g: 40.0,
            },
            Tls {
                delta: -60.0,
                g: 30.0,
            },
        ],
        300.0,
        0.0,
    )
}

fn criterion_1() -> Vec<Check> {
    let t0 = Instant::now();
    let cfg = single_config();
    let x = calibrate_x(&cfg, 0).unwrap();
    let x_omega = rabi_frequency(&cfg.with_epsilon(x.epsilon()), 0)
        .unwrap()
        .abs();
    let hcfg = cfg.with_delta_c(160.0);
    let h = calibrate_hadamard(&hcfg, 0).unwrap();
    let h_omega = rabi_frequency(&hcfg.with_epsilon(h.epsilon()), 0)
        .unwrap()
        .abs();
    let elapsed = t0.elapsed().as_secs_f64();
    vec![
        check(
            "1a",
            within(x.epsilon(), -60.0, 5e-3),
            format!("X epsilon {:.4} MHz (target -60)", x.epsilon()),
        ),
        check(
            "1b",
            within(x_omega, 60.0, 5e-3),
            format!("X Omega {x_omega:.4} MHz (target 60)"),
        ),
        check(
            "1c",
            (x.duration() - 8.3).abs() <= 0.1,
            format!("X tau {:.4} ns (target 8.3)", x.duration()),
        ),
        check(
            "1d",
            within(h.epsilon(), -32.0, 5e-3),
            format!("H epsilon {:.4} MHz (target -32)", h.epsilon()),
        ),
        check(
            "1e",
            within(h_omega, 21.3, 5e-3),
            format!("H Omega {h_omega:.4} MHz (target 21.3)"),
        ),
        check(
            "1f",
            (h.duration() - 16.6).abs() <= 0.1,
            format!("H tau {:.4} ns (target 16.6)", h.duration()),
        ),
        check(
            "1g",
            elapsed < 1.0,
            format!("closed-form time {elapsed:.4} s"),
        ),
    ]
}

fn criterion_2() -> Vec<Check> {
    let t0 = Instant::now();
    let plan = calibrate_two_qubit(&pair_config(), (0, 1)).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    let co = plan.coefficients.unwrap();
    vec![
        check(
            "2a",
            within(plan.epsilon(), 277.2, 5e-3),
            format!("epsilon* {:.4} MHz (target 277.2)", plan.epsilon()),
        ),
        check(
            "2b",
            within(co.e1, 74.0, 5e-3) && within(co.e2, 74.0, 5e-3),
            format!("E1 {:.4}, E2 {:.4} MHz (target 74.0)", co.e1, co.e2),
        ),
        check(
            "2c",
            within(co.beta_2_prime, -1.8, 0.1),
            format!("beta2' {:.4} MHz (target -1.8)", co.beta_2_prime),
        ),
        check(
            "2d",
            within(plan.duration(), 137.9, 0.04),
            format!("SWAP tau {:.3} ns (target 137.9)", plan.duration()),
        ),
        check(
            "2e",
            elapsed < 1.0,
            format!("root-find time {elapsed:.4} s"),
        ),
    ]
}

fn criterion_3() -> Vec<Check> {
    let pair = pair_config().with_kappa(4.0);
    let swap = calibrate_two_qubit(&pair, (0, 1)).unwrap();
    let two = decoherence_estimate(&swap, &pair).unwrap();
    let cz = cirac_zoller_plan(&pair, (0, 1), 120.0).unwrap();
    let cz_est = decoherence_estimate(&cz, &pair).unwrap();
    let seg = cz_est.segments[0].ratio;
    let single = single_config().with_kappa(4.0);
    let x = decoherence_estimate(&calibrate_x(&single, 0).unwrap(), &single).unwrap();
    let hcfg = single.with_delta_c(160.0);
    let h = decoherence_estimate(&calibrate_hadamard(&hcfg, 0).unwrap(), &hcfg).unwrap();
    let decade = |r: f64| (1e-4..=1e-2).contains(&r);
    vec![
        check(
            "3a",
            within(two.ratio, 0.01, 0.5),
            format!("two-qubit tau_g/tau_d {:.5} (target 0.01)", two.ratio),
        ),
        check(
            "3b",
            within(seg, 0.02, 0.5),
            format!("CZ swap segment ratio {seg:.5} (target 0.02)"),
        ),
        check(
            "3c",
            decade(x.ratio) && decade(h.ratio),
            format!(
                "single-qubit ratios X {:.2e}, H {:.2e} (within a decade of 1e-3)",
                x.ratio, h.ratio
            ),
        ),
        check(
            "3d",
            two.fidelity_estimate >= 0.98,
            format!("two-qubit exp(-ratio) {:.5}", two.fidelity_estimate),
        ),
    ]
}

fn fidelity_column(res: &ExperimentResult) -> Vec<(f64, f64)> {
    res.rows
        .iter()
        .filter(|r| r.quantity == "compensated_fidelity")
        .map(|r| {
            let kappa: f64 = r
                .param
                .split(';')
                .find_map(|kv| kv.strip_prefix("kappa="))
                .unwrap()
                .parse()
                .unwrap();
            (kappa, r.value)
        })
        .collect()
}

fn sweep_checks(ids: [&'static str; 3], label: &str, col: &[(f64, f64)]) -> Vec<Check> {
    let low: Vec<_> = col.iter().filter(|(k, _)| *k <= 5.0).collect();
    let min_low = low.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let worst_rise = col
        .windows(2)
        .map(|w| w[1].1 - w[0].1)
        .fold(f64::NEG_INFINITY, f64::max);
    let listing: Vec<String> = col.iter().map(|(k, f)| format!("{k}:{f:.5}")).collect();
    vec![
        check(
            ids[0],
            col.len() == 11,
            format!(
                "{label}: {} sweep points [{}]",
                col.len(),
                listing.join(" ")
            ),
        ),
        check(
            ids[1],
            min_low >= 0.99,
            format!("{label}: min F for kappa <= 5 is {min_low:.5}"),
        ),
        check(
            ids[2],
            worst_rise <= 0.0,
            format!("{label}: largest increase between neighbours {worst_rise:.2e}"),
        ),
    ]
}

fn criterion_4() -> Vec<Check> {
    let t0 = Instant::now();
    let mut had = preset(ExperimentName::Fig3Sweep);
    had.numerics.check_cutoff = true;
    let had_res = run_experiment(&had).unwrap();
    let swap_res = run_experiment(&preset_fig3_swap()).unwrap();
    let mut out = sweep_checks(["4a", "4b", "4c"], "Hadamard", &fidelity_column(&had_res));
    out.extend(sweep_checks(
        ["4d", "4e", "4f"],
        "SWAP",
        &fidelity_column(&swap_res),
    ));
    let frames_ok = had_res
        .provenance
        .simulations
        .iter()
        .chain(&swap_res.provenance.simulations)
        .all(|s| s.frame == Frame::Transformed && s.fock_cutoff == 10);
    out.push(check(
        "4g",
        frames_ok,
        "all runs in the transformed frame with N_F = 10".into(),
    ));
    let worst_cut = had_res
        .provenance
        .simulations
        .iter()
        .filter_map(|s| s.cutoff_delta)
        .fold(0.0, f64::max);
    // One SWAP point at the largest decay rate with N_F + 4.
    let cfg = preset_fig3_swap().system.unwrap().with_kappa(10.0);
    let plan = calibrate_two_qubit(&cfg, (0, 1)).unwrap();
    let f = |c: &SystemConfig| {
        let run = simulate_gate_channel(&plan, c, &ChannelOptions::default()).unwrap();
        plan_fidelity(&plan, &run.channel)
            .unwrap()
            .compensated_fidelity
    };
    let swap_cut = (f(&cfg.with_fock_cutoff(14)) - f(&cfg)).abs();
    out.push(check(
        "4h",
        worst_cut < 1e-4 && swap_cut < 1e-4,
        format!("N_F 10 -> 14 changes F by at most {worst_cut:.1e} (Hadamard), {swap_cut:.1e} (SWAP, kappa 10)"),
    ));
    out.push(check(
        "4i",
        true,
        format!("wall time {:.1} s", t0.elapsed().as_secs_f64()),
    ));
    out
}

fn criterion_5() -> Vec<Check> {
    let cfg = pair_config().with_kappa(4.0);
    let plan = calibrate_two_qubit(&cfg, (0, 1)).unwrap();
    let hz = residual_dephasing_rate(&cfg.with_epsilon(plan.epsilon()), 0).unwrap() * 1e6;
    vec![check(
        "5a",
        (1000.0 / 3.0..=3000.0).contains(&hz),
        format!("dephasing rate {hz:.1} Hz (target ~1 kHz)"),
    )]
}

fn criterion_6() -> Vec<Check> {
    let mut out = Vec::new();

    // Trace and positivity over representative gate simulations.
    let single = single_config().with_kappa(4.0);
    let x = calibrate_x(&single, 0).unwrap();
    let hcfg = SystemConfig::new(
        vec![
            Tls {
                delta: 40.0,
                g: 40.0,
            },
            Tls {
                delta: -80.0,
                g: 30.0,
            },
        ],
        160.0,
        0.0,
    )
    .with_kappa(10.0);
    let h = calibrate_hadamard(&hcfg, 0).unwrap();
    let pair = pair_config().with_kappa(4.0).with_fock_cutoff(6);
    let cz = cirac_zoller_plan(&pair, (0, 1), 120.0).unwrap();
    let runs = [
        (
            "X",
            simulate_gate_channel(&x, &single, &ChannelOptions::default()).unwrap(),
        ),
        (
            "Hadamard",
            simulate_gate_channel(&h, &hcfg, &ChannelOptions::default()).unwrap(),
        ),
        (
            "CZ lab frame",
            simulate_gate_channel(&cz, &pair, &ChannelOptions::default()).unwrap(),
        ),
    ];
    let drift = runs
        .iter()
        .map(|r| r.1.max_trace_deviation.max(r.1.channel.trace_deviation()))
        .fold(0.0, f64::max);
    let min_ev = runs
        .iter()
        .map(|r| r.1.min_eigenvalue)
        .fold(f64::INFINITY, f64::min);
    out.push(check(
        "6a",
        drift < 1e-7 && min_ev >= -1e-6,
        format!("trace drift {drift:.1e}, min eigenvalue {min_ev:.1e}"),
    ));

    // Closed evolution against the exact propagator.
    let cfg = pair_config().with_epsilon(50.0).with_fock_cutoff(4);
    let space = cfg.space().unwrap();
    let hm = build_hamiltonian(&cfg, &space, Frame::Lab).unwrap();
    let gen = Generator::new(&hm, &[]).unwrap();
    let psi: Vec<C64> = (0..space.dim())
        .map(|k| C64::new((k as f64 * 0.7).sin(), (k as f64 * 1.3).cos()))
        .collect();
    let rho = DensityMatrix::pure(&psi).unwrap();
    let t = 10.0;
    let tr = evolve(
        &gen,
        &rho,
        t,
        &EvolveOptions {
            step: Some(5e-4),
            ..Default::default()
        },
    )
    .unwrap();
    let u = expm_hermitian(&hm, t).unwrap();
    let err =
        max_abs(&(tr.final_state().matrix() - u.matrix() * rho.matrix() * u.matrix().adjoint()));
    out.push(check(
        "6b",
        err < 1e-8,
        format!("RK4 vs expm max deviation {err:.1e}"),
    ));

    // Dispersive frame against the full model at g/|Delta_nc| = 0.05.
    let disp = SystemConfig::new(
        vec![Tls {
            delta: 0.0,
            g: 10.0,
        }],
        200.0,
        0.0,
    );
    let xp = calibrate_x(&disp, 0).unwrap();
    let dev =
        dispersive_oracle_deviation(&disp.with_epsilon(xp.epsilon()).with_fock_cutoff(12), 400)
            .unwrap();
    let bound = 5.0 * 0.05f64.powi(3);
    out.push(check(
        "6c",
        dev <= bound,
        format!(
            "max |<sz> lab - <sz> transformed| {dev:.2e} over one Rabi period, bound {bound:.2e}"
        ),
    ));

    // Fidelity basis independence on a simulated non-unitary channel.
    let ch = &runs[1].1.channel;
    let fm = nielsen_fidelity_in_basis(ch, &h.target, OperatorBasis::MatrixUnits).unwrap();
    let fp = nielsen_fidelity_in_basis(ch, &h.target, OperatorBasis::Pauli).unwrap();
    let fw = nielsen_fidelity_in_basis(ch, &h.target, OperatorBasis::Weyl).unwrap();
    let spread = (fm - fp).abs().max((fm - fw).abs());
    out.push(check(
        "6d",
        spread < 1e-10,
        format!("basis spread {spread:.1e} (F = {fm:.6})"),
    ));

    // Calibration closure.
    let r_x = effective_detuning(&single.with_epsilon(x.epsilon()), 0)
        .unwrap()
        .abs();
    let hc = single.with_delta_c(160.0);
    let hp = calibrate_hadamard(&hc, 0).unwrap();
    let at = hc.with_epsilon(hp.epsilon());
    let r_h = (effective_detuning(&at, 0).unwrap() - rabi_frequency(&at, 0).unwrap()).abs();
    let sw = calibrate_two_qubit(&pair_config(), (0, 1)).unwrap();
    let at = pair_config().with_epsilon(sw.epsilon());
    let r_s =
        (dressed_energy(&at, 0).unwrap().energy - dressed_energy(&at, 1).unwrap().energy).abs();
    let worst = r_x.max(r_h).max(r_s);
    out.push(check(
        "6e",
        worst < 1e-9,
        format!("closure residuals X {r_x:.1e}, H {r_h:.1e}, SWAP {r_s:.1e} MHz"),
    ));

    // Photon decay.
    let kappa = 5.0;
    let cav = SystemConfig {
        fock_cutoff: 3,
        ..SystemConfig::new(
            vec![Tls {
                delta: 10.0,
                g: 0.0,
            }],
            50.0,
            0.0,
        )
        .with_kappa(kappa)
    };
    let space = cav.space().unwrap();
    let gen = Generator::new(
        &build_hamiltonian(&cav, &space, Frame::Lab).unwrap(),
        &collapse_operators(&cav, &space).unwrap(),
    )
    .unwrap();
    let mut psi = vec![c(0.0); space.dim()];
    psi[space.index(1, 1)] = c(1.0);
    let tr = evolve(
        &gen,
        &DensityMatrix::pure(&psi).unwrap(),
        200.0,
        &EvolveOptions {
            record_every: 20,
            ..Default::default()
        },
    )
    .unwrap();
    let n = number(&space);
    let decay_err = tr
        .times
        .iter()
        .zip(&tr.states)
        .map(|(t, s)| (s.expectation(&n).re - (-kappa * 1e-3 * t).exp()).abs())
        .fold(0.0, f64::max);
    out.push(check(
        "6f",
        decay_err < 1e-6,
        format!(
            "photon decay max error {decay_err:.1e} over {} samples",
            tr.times.len()
        ),
    ));

    // Fourth-order convergence.
    let cfg = SystemConfig {
        fock_cutoff: 4,
        ..SystemConfig::new(
            vec![Tls {
                delta: 30.0,
                g: 10.0,
            }],
            150.0,
            20.0,
        )
        .with_kappa(4.0)
    };
    let space = cfg.space().unwrap();
    let gen = Generator::new(
        &build_hamiltonian(&cfg, &space, Frame::Lab).unwrap(),
        &collapse_operators(&cfg, &space).unwrap(),
    )
    .unwrap();
    let mut psi = vec![c(0.0); space.dim()];
    psi[space.index(0, 0)] = c(1.0);
    psi[space.index(1, 2)] = c(1.0);
    let rho = DensityMatrix::pure(&psi).unwrap();
    let run = |dt: f64| {
        evolve(
            &gen,
            &rho,
            5.0,
            &EvolveOptions {
                step: Some(dt),
                ..Default::default()
            },
        )
        .unwrap()
        .final_state()
        .matrix()
        .clone()
    };
    let (a, b, r) = (run(0.02), run(0.01), run(0.005));
    let ratio = (&a - &b).norm() / (&b - &r).norm();
    out.push(check(
        "6g",
        (12.0..=20.0).contains(&ratio),
        format!("successive-halving change ratio {ratio:.2}"),
    ));
    out
}

fn criterion_7() -> Vec<Check> {
    let e_j = 2.0 * PI * 100e9;
    let p = CircuitParams {
        e_j,
        c0: 1e-12,
        l: CircuitParams::matched_inductance(e_j) * 0.5,
        phi_ex: phase_flux(0.8),
        delta_ic: 0.0,
        j_x: vec![0.01],
    };
    let phi = solve_phase_shift(&p).unwrap();
    let residual = phase_shift_residual(&p, phi).abs();
    let zero = solve_phase_shift(&CircuitParams {
        phi_ex: 0.0,
        ..p.clone()
    })
    .unwrap();
    let bound_params = CircuitParams {
        l: CircuitParams::matched_inductance(e_j),
        ..p
    };
    let w = resonator_frequency(&bound_params, phase_flux(PI / 2.0)).unwrap();
    let eps_max = rad_per_s_to_mhz(max_drive_amplitude(&bound_params, w).unwrap());
    vec![
        check(
            "7a",
            residual < 1e-12,
            format!("phase-shift residual {residual:.1e}"),
        ),
        check(
            "7b",
            zero == 0.0,
            format!("Phi_ex = 0 gives Phi_s = {zero}"),
        ),
        check(
            "7c",
            (500.0..=2000.0).contains(&eps_max),
            format!("drive bound {eps_max:.1} MHz at 2e Phi_s/hbar = pi/2 (target ~1000)"),
        ),
    ]
}

fn main() {
    let criteria: [(&str, Criterion); 7] = [
        ("single-qubit operating points", criterion_1),
        ("two-qubit operating point", criterion_2),
        ("decoherence ratios", criterion_3),
        ("fidelity versus decay rate", criterion_4),
        ("residual dephasing", criterion_5),
        ("property suite", criterion_6),
        ("circuit layer", criterion_7),
    ];
    let mut unexpected = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let checks = run();
        let pass = checks.iter().all(|c| c.pass);
        println!(
            "criterion {} ({name}): {}",
            k + 1,
            if pass { "PASS" } else { "FAIL" }
        );
        for c in &checks {
            let known = KNOWN_UNATTAINABLE.contains(&c.id);
            let tag = match (c.pass, known) {
                (true, false) => "pass",
                (false, true) => "FAIL (known unattainable)",
                (false, false) => "FAIL",
                (true, true) => "XPASS (listed as unattainable)",
            };
            println!("    {} {tag}: {}", c.id, c.detail);
            if c.pass == known {
                unexpected.push(c.id);
            }
        }
    }
    if !unexpected.is_empty() {
        println!("unexpected outcomes: {}", unexpected.join(", "));
        std::process::exit(1);
    }
}
