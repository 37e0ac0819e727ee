// Copyright 2026 Spinforge Contributors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance gate. One PASS/FAIL line per criterion; nonzero exit on any FAIL.

use std::f64::consts::PI;
use std::process::ExitCode;

use spinforge::dynamics::{
    analytic_rotating, check_m_constancy, cross_validate, integrate_lab, integrate_lab_detailed, IntegrationSettings,
};
use spinforge::gates::{
    audit_components, build_gate, cnot_2q, ideal_component, not_gate_1q, pulse_component, toffoli, u_phi, x_power,
    GateKind, GateSpec,
};
use spinforge::hamiltonian::{lab_hamiltonian, rotating_hamiltonian};
use spinforge::matrix::{phase_fidelity, ComplexMatrix, StateVector, C64};
use spinforge::schedule::{gate_timing_table, ratio_to_f64, ScheduleOptions, TimingConstraint};
use spinforge::spin::{pauli, PauliAxis, SystemSize};
use spinforge::PhysicalConfig;

const EXACT: f64 = 1e-12;
const FLAG: f64 = 1e-9;
const RESIDUAL: f64 = 1e-9;
const ORACLE: f64 = 1e-6;
const LATTICE_BOUND: i64 = 50;
/// Accepted window for the error ratio under dt halving (fourth order gives 16).
const ORDER4_RATIO: (f64, f64) = (14.0, 18.0);

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn size(n: usize) -> SystemSize {
    SystemSize::new(n).expect("size")
}

fn natural() -> PhysicalConfig {
    PhysicalConfig::natural_units()
}

fn opts() -> ScheduleOptions {
    ScheduleOptions::default()
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn within(what: &str, value: f64, tol: f64) -> Outcome {
    if value <= tol {
        Ok(format!("{what} = {value:.3e} <= {tol:.0e}"))
    } else {
        Err(format!("{what} = {value:.3e} > {tol:.0e}"))
    }
}

fn all_ok(parts: Vec<Outcome>) -> Outcome {
    let mut good = Vec::new();
    let mut bad = Vec::new();
    for p in parts {
        match p {
            Ok(s) => good.push(s),
            Err(s) => bad.push(s),
        }
    }
    if bad.is_empty() {
        Ok(good.join("; "))
    } else {
        Err(bad.join("; "))
    }
}

fn criterion_1() -> Outcome {
    let table = gate_timing_table(&GateSpec::cz(), &natural(), &opts()).map_err(err)?;
    let t1 = table.timing("t1").ok_or("no t1")?;
    let u = u_phi(size(2), &t1.solution, &t1.config).map_err(err)?;
    let want = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)]).map_err(err)?;
    within("max |U_phi - diag(1,1,1,-1)|", u.max_abs_diff(&want).map_err(err)?, EXACT)
}

fn criterion_2() -> Outcome {
    let table = gate_timing_table(&GateSpec::cnot(), &natural(), &opts()).map_err(err)?;
    let u = cnot_2q(&table).map_err(err)?;
    let want = ComplexMatrix::permutation(&[0, 1, 3, 2]).map_err(err)?;
    within("max |H' U_phi H'^dagger - CNOT|", u.max_abs_diff(&want).map_err(err)?, EXACT)
}

fn criterion_3() -> Outcome {
    let table = gate_timing_table(&GateSpec::not(), &natural(), &opts()).map_err(err)?;
    let u = not_gate_1q(&table).map_err(err)?;
    let x = pauli(PauliAxis::X);
    let exact = u.max_abs_diff(&x.scale(c(0.0, -1.0))).map_err(err)?;
    let r = phase_fidelity(&u, &x).map_err(err)?;
    all_ok(vec![
        within("max |U - (-i sigma_x)|", exact, EXACT),
        within("|1 - F|", (1.0 - r.fidelity).abs(), EXACT),
        within("|phase + pi/2|", (r.global_phase_rad + PI / 2.0).abs(), EXACT),
    ])
}

fn ideal_identity(spec: GateSpec, n: usize) -> Outcome {
    let circuit = spec.circuit().map_err(err)?;
    let u = circuit.ideal_unitary().map_err(err)?;
    within(
        &format!("{}-gate product vs {}x{} Toffoli", circuit.gates.len(), u.dim(), u.dim()),
        u.max_abs_diff(&toffoli(size(n))).map_err(err)?,
        EXACT,
    )
}

fn criterion_6() -> Outcome {
    let mut parts = Vec::new();
    let mut flagged = Vec::new();
    let mut count = 0;
    for (units, cfg) in [("natural", natural()), ("SI", PhysicalConfig::default())] {
        let audits = audit_components(&cfg, &opts()).map_err(err)?;
        count = audits.len();
        for a in &audits {
            println!(
                "    [{units}] {} / {}: F = {:.15}, phase = {:+.12} rad, max dev = {:.3e}",
                a.circuit, a.component, a.report.fidelity, a.report.global_phase_rad, a.report.max_abs_dev
            );
            parts.push(within(
                &format!("{} unitarity", a.component),
                a.unitarity_deviation,
                EXACT,
            ));
            if a.report.fidelity < 1.0 - FLAG {
                flagged.push(format!("{} [{}]", a.component, a.factors.join(", ")));
            }
        }
    }
    // component counts: 4 distinct in CCNOT, 8 in CCCNOT
    if count != 12 {
        parts.push(Err(format!("{count} reports, expected 12")));
    }
    if !flagged.is_empty() {
        println!("    flagged: {}", flagged.join("; "));
    }
    all_ok(parts).map(|_| format!("{count} reports per unit system, all unitary to {EXACT:.0e}, {} flagged", flagged.len()))
}

/// Smallest positive `t` on any constraint's lattice (witness <= bound)
/// that every other constraint also admits.
fn lattice_minimum(constraints: &[TimingConstraint], cfg: &PhysicalConfig, bound: i64) -> Option<f64> {
    let mut best: Option<f64> = None;
    for con in constraints {
        for k in con.min_witness..=bound {
            let t = (2.0 * k as f64 + ratio_to_f64(con.residue.0)) * PI / con.coefficient(cfg);
            if t <= 0.0 {
                continue;
            }
            let fits = constraints.iter().all(|o| {
                let x = (o.coefficient(cfg) * t / PI - ratio_to_f64(o.residue.0)) / 2.0;
                let w = x.round();
                (x - w).abs() < 1e-9 && w as i64 >= o.min_witness && w as i64 <= bound
            });
            if fits && best.is_none_or(|b| t < b) {
                best = Some(t);
            }
        }
    }
    best
}

fn criterion_7() -> Outcome {
    let mut parts = Vec::new();
    let mut worst: f64 = 0.0;
    let mut slots = 0;
    for spec in [GateSpec::not(), GateSpec::cz(), GateSpec::cnot(), GateSpec::ccnot(), GateSpec::cccnot()] {
        let table = gate_timing_table(&spec, &natural(), &opts()).map_err(err)?;
        for t in &table.timings {
            slots += 1;
            worst = worst.max(t.solution.residual_under(&t.config));
            let constraints: Vec<TimingConstraint> =
                t.solution.witnesses.iter().map(|w| w.constraint.clone()).collect();
            match lattice_minimum(&constraints, &t.config, LATTICE_BOUND) {
                Some(m) if (m - t.solution.duration).abs() <= 1e-9 * m.max(1.0) => {}
                Some(m) => parts.push(Err(format!(
                    "{} {}: lattice minimum {m} != {}",
                    spec.label(),
                    t.solution.label,
                    t.solution.duration
                ))),
                None => parts.push(Err(format!("{} {}: no lattice point", spec.label(), t.solution.label))),
            }
        }
    }
    parts.push(within(&format!("max residual over {slots} slots"), worst, RESIDUAL));
    let cz = gate_timing_table(&GateSpec::cz(), &natural(), &opts()).map_err(err)?;
    let t1 = cz.timing("t1").ok_or("no t1")?;
    let worked = (t1.solution.duration - 2.5 * PI).abs().max((t1.config.j_coupling - 0.4).abs()).max(
        (t1.config.b_prime - 0.1).abs(),
    );
    parts.push(within("CZ worked example |t1 - 5pi/2|, |J - 2/5|, |B' - 1/10|", worked, 1e-15));
    all_ok(parts).map(|s| format!("{s}; lattice scan (witness <= {LATTICE_BOUND}) agrees on every slot"))
}

fn rabi_cfg() -> PhysicalConfig {
    PhysicalConfig { b1: 0.1, ..natural() }
}

fn up() -> StateVector {
    StateVector::basis(2, 0).expect("basis")
}

/// Errors against the closed form at dt, dt/2, dt/4, with no renormalisation.
fn convergence_errors(cfg: &PhysicalConfig, t_final: f64, dt: f64) -> Result<Vec<f64>, String> {
    let exact = analytic_rotating(cfg, size(1), &up(), t_final).map_err(err)?;
    (0..3)
        .map(|k| {
            let s = IntegrationSettings {
                dt: dt / f64::from(1 << k),
                renormalize_every: usize::MAX,
            };
            let got = integrate_lab(cfg, size(1), &up(), t_final, &s).map_err(err)?;
            got.max_abs_diff(&exact).map_err(err)
        })
        .collect()
}

fn criterion_8() -> Outcome {
    let cfg = rabi_cfg();
    let times: Vec<f64> = {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
        (0..100).map(|_| rng.gen_range(0.0..100.0)).collect()
    };
    let m = check_m_constancy(&cfg, &times).map_err(err)?;
    let period = 2.0 * PI / (cfg.gamma * cfg.b1);
    let cv = cross_validate(&cfg, size(1), &up(), period, &IntegrationSettings::new(period / 1e4)).map_err(err)?;
    let e = convergence_errors(&cfg, period, period / 500.0)?;
    let ratios = [e[0] / e[1], e[1] / e[2]];
    let order = if ratios.iter().all(|r| (ORDER4_RATIO.0..=ORDER4_RATIO.1).contains(r)) {
        Ok(format!(
            "error ratios under halving {:.2}, {:.2} in [{}, {}]",
            ratios[0], ratios[1], ORDER4_RATIO.0, ORDER4_RATIO.1
        ))
    } else {
        Err(format!("error ratios {:.2}, {:.2} outside [{}, {}]", ratios[0], ratios[1], ORDER4_RATIO.0, ORDER4_RATIO.1))
    };
    all_ok(vec![
        within("max |M(t) - Sx| over 100 times", m, EXACT),
        within("Rabi period |lab - analytic| at dt = period/1e4", cv.max_amplitude_dev, ORACLE),
        order,
    ])
}

fn criterion_9() -> Outcome {
    let cfg = rabi_cfg();
    let t = PI / (cfg.gamma * cfg.b1);
    let psi = integrate_lab(&cfg, size(1), &up(), t, &IntegrationSettings::new(t / 2e4)).map_err(err)?;
    within("|a|^2 after pi/(gamma b1)", psi.populations()[0], ORACLE)
}

fn criterion_10() -> Outcome {
    let mut parts = Vec::new();
    let cfg = natural();
    let mut worst_unitary: f64 = 0.0;
    let mut built = 0;
    let mut specs = vec![GateSpec::hadamard_like()];
    for host in [GateSpec::ccnot(), GateSpec::cccnot()] {
        specs.extend(host.circuit().map_err(err)?.distinct());
    }
    for spec in [GateSpec::not(), GateSpec::cz(), GateSpec::cnot(), GateSpec::ccnot(), GateSpec::cccnot()] {
        let b = build_gate(&spec, &cfg, &opts()).map_err(err)?;
        worst_unitary = worst_unitary.max(b.unitarity_deviation);
        for step in &b.program.steps {
            worst_unitary = worst_unitary.max(step.unitary(b.unitary.dim()).map_err(err)?.unitarity_deviation());
            built += 1;
        }
        built += 1;
    }
    for spec in &specs {
        let table = gate_timing_table(spec, &cfg, &opts()).map_err(err)?;
        worst_unitary = worst_unitary.max(pulse_component(spec, &table).map_err(err)?.unitarity_deviation());
        worst_unitary = worst_unitary.max(ideal_component(spec).map_err(err)?.unitarity_deviation());
        built += 2;
    }
    parts.push(within(&format!("unitarity over {built} operators"), worst_unitary, EXACT));

    let mut herm: f64 = 0.0;
    let drive = PhysicalConfig { b1: 0.3, j_coupling: 0.7, b_prime: 0.2, ..cfg };
    for n in 1..=4 {
        for k in 0..50 {
            let t = 0.37 * k as f64;
            herm = herm.max(lab_hamiltonian(&drive, size(n), t).hermiticity_deviation());
        }
        herm = herm.max(rotating_hamiltonian(&drive, size(n), true).hermiticity_deviation());
    }
    parts.push(within("Hermiticity over n = 1..4, 50 times", herm, EXACT));

    let rabi = rabi_cfg();
    let psi0 = StateVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).map_err(err)?;
    let lab = integrate_lab_detailed(
        &rabi,
        size(1),
        &psi0,
        60.0,
        &IntegrationSettings { dt: 0.01, renormalize_every: usize::MAX },
        None,
    )
    .map_err(err)?;
    parts.push(within("RK4 norm drift over 6000 steps", lab.max_norm_drift, 1e-9));
    let closed = analytic_rotating(&rabi, size(1), &psi0, 60.0).map_err(err)?;
    parts.push(within("closed-form norm drift", (closed.norm_sqr() - 1.0).abs(), EXACT));

    let x = pauli(PauliAxis::X);
    let h = x_power(0.5);
    let q = x_power(0.25);
    parts.push(within("|(X^1/2)^2 - X|", (&h * &h).max_abs_diff(&x).map_err(err)?, EXACT));
    let q2 = &q * &q;
    parts.push(within("|(X^1/4)^4 - X|", (&q2 * &q2).max_abs_diff(&x).map_err(err)?, EXACT));

    let mut adj: f64 = 0.0;
    for (kind, ctl, tgt, n) in [
        (GateKind::CxHalf, 2, 3, 3),
        (GateKind::CxHalf, 1, 3, 3),
        (GateKind::CxQuarter, 2, 4, 4),
        (GateKind::CxQuarter, 3, 4, 4),
    ] {
        let spec = GateSpec::controlled(kind, ctl, tgt, n).map_err(err)?;
        let neg = spec.adjoint().ok_or("no adjoint")?;
        let table = gate_timing_table(&spec, &cfg, &opts()).map_err(err)?;
        let a = pulse_component(&spec, &table).map_err(err)?;
        let b = pulse_component(&neg, &table).map_err(err)?;
        adj = adj.max(b.max_abs_diff(&a.adjoint()).map_err(err)?);
        adj = adj.max(ideal_component(&neg).map_err(err)?.max_abs_diff(&ideal_component(&spec).map_err(err)?.adjoint()).map_err(err)?);
    }
    parts.push(within("|U(-a) - U(a)^dagger|", adj, EXACT));
    all_ok(parts)
}

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("controlled-Z evolution", criterion_1),
        ("CNOT sandwich", criterion_2),
        ("NOT composition", criterion_3),
        ("ideal CCNOT identity", || ideal_identity(GateSpec::ccnot(), 3)),
        ("ideal CCCNOT identity", || ideal_identity(GateSpec::cccnot(), 4)),
        ("pulse-layer audit", criterion_6),
        ("timing solver soundness", criterion_7),
        ("rotating-frame oracle", criterion_8),
        ("Rabi pi-pulse", criterion_9),
        ("property suite", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
