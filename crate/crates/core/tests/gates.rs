// Copyright 2026 Spinforge Contributors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use spinforge::gates::{
    audit_components, build_gate, cnot_2q, compose_cccnot, compose_ccnot, ideal_component, not_gate_1q,
    pulse_component, toffoli, u_phi, GateKind, GateSpec,
};
use spinforge::matrix::{phase_fidelity, ComplexMatrix, C64};
use spinforge::schedule::{gate_timing_table, ScheduleMode, ScheduleOptions};
use spinforge::spin::{pauli, PauliAxis, SystemSize};
use spinforge::{PhysicalConfig, SpinError};

const TOL: f64 = 1e-12;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn natural() -> PhysicalConfig {
    PhysicalConfig::natural_units()
}

fn derive() -> ScheduleOptions {
    ScheduleOptions::default()
}

#[test]
fn not_gate_is_minus_i_sigma_x() {
    let table = gate_timing_table(&GateSpec::not(), &natural(), &derive()).unwrap();
    let t1 = table.timing("t1").unwrap();
    assert!((t1.solution.duration - 5.0 * PI).abs() < TOL);
    assert!((table.timing("t2").unwrap().solution.duration - PI / 2.0).abs() < TOL);
    let u = not_gate_1q(&table).unwrap();
    let want = pauli(PauliAxis::X).scale(c(0.0, -1.0));
    assert!(u.max_abs_diff(&want).unwrap() < TOL);
    let r = phase_fidelity(&u, &pauli(PauliAxis::X)).unwrap();
    assert!((r.fidelity - 1.0).abs() < TOL);
    assert!((r.global_phase_rad + PI / 2.0).abs() < TOL);
}

#[test]
fn controlled_z_constants_are_derived() {
    let table = gate_timing_table(&GateSpec::cz(), &natural(), &derive()).unwrap();
    let t1 = table.timing("t1").unwrap();
    assert!((t1.solution.duration - 2.5 * PI).abs() < TOL);
    assert!((t1.config.j_coupling - 0.4).abs() < 1e-15);
    assert!((t1.config.b_prime - 0.1).abs() < 1e-15);
    assert!((t1.config.b1 - 0.8).abs() < 1e-15);
    let u = pulse_component(&GateSpec::cz(), &table).unwrap();
    let cz = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
    assert!(u.max_abs_diff(&cz).unwrap() < TOL, "{u:?}");
}

#[test]
fn cnot_sandwich_is_the_permutation() {
    let table = gate_timing_table(&GateSpec::cnot(), &natural(), &derive()).unwrap();
    let u = cnot_2q(&table).unwrap();
    let want = ComplexMatrix::permutation(&[0, 1, 3, 2]).unwrap();
    assert!(u.max_abs_diff(&want).unwrap() < TOL, "{u:?}");
    assert!((table.total.duration - (2.5 * PI + PI)).abs() < TOL);
}

#[test]
fn every_component_matches_ideal() {
    for cfg in [natural(), PhysicalConfig::default()] {
        let audits = audit_components(&cfg, &derive()).unwrap();
        assert_eq!(audits.len(), 12);
        for a in &audits {
            assert!(!a.flagged, "{} {}: {:?}", a.circuit, a.component, a.factors);
            assert!(a.report.fidelity > 1.0 - 1e-12, "{} F = {}", a.component, a.report.fidelity);
            assert!(a.unitarity_deviation < TOL);
        }
    }
}

#[test]
fn toffoli_circuits_from_pulses() {
    let cfg = natural();
    let t3 = gate_timing_table(&GateSpec::ccnot(), &cfg, &derive()).unwrap();
    let u = compose_ccnot(&t3).unwrap();
    let r = phase_fidelity(&u, &toffoli(SystemSize::new(3).unwrap())).unwrap();
    assert!(r.fidelity > 1.0 - 1e-12, "{r:?}");
    let formula = t3.total.formula();
    assert_eq!(formula, "2T1 + 2T2 + T3");
    assert_eq!(t3.aggregate("T1").unwrap().formula(), "t1 + 2t2 + 3t3");
    assert_eq!(t3.aggregate("T2").unwrap().formula(), "t4 + 5t5");
    assert_eq!(t3.aggregate("T3").unwrap().formula(), "t6 + 2t7 + 3t8");

    let t4 = gate_timing_table(&GateSpec::cccnot(), &cfg, &derive()).unwrap();
    let u = compose_cccnot(&t4).unwrap();
    let r = phase_fidelity(&u, &toffoli(SystemSize::new(4).unwrap())).unwrap();
    assert!(r.fidelity > 1.0 - 1e-12, "{r:?}");
    assert_eq!(t4.total.formula(), "T1 + 2T2 + 2T3 + 2T4 + 4T5 + 2T6");
    for (k, f) in [
        ("T1", "t1 + 2t2 + 7t3"),
        ("T2", "t4 + 9t5"),
        ("T3", "t6 + 2t7 + 7t8"),
        ("T4", "t9 + 9t10"),
        ("T5", "t11 + 2t12 + 7t13"),
        ("T6", "t14 + 9t15"),
    ] {
        assert_eq!(t4.aggregate(k).unwrap().formula(), f);
    }
}

#[test]
fn adjoint_components_are_daggers() {
    let cfg = natural();
    for (fwd, n) in [((GateKind::CxHalf, 2, 3), 3), ((GateKind::CxQuarter, 3, 4), 4)] {
        let spec = GateSpec::controlled(fwd.0, fwd.1, fwd.2, n).unwrap();
        let adj = spec.adjoint().unwrap();
        let table = gate_timing_table(&spec, &cfg, &derive()).unwrap();
        let a = pulse_component(&spec, &table).unwrap();
        let b = pulse_component(&adj, &table).unwrap();
        assert!(b.max_abs_diff(&a.adjoint()).unwrap() < TOL);
        let ia = ideal_component(&spec).unwrap();
        let ib = ideal_component(&adj).unwrap();
        assert!(ib.max_abs_diff(&ia.adjoint()).unwrap() < TOL);
    }
}

#[test]
fn shared_mode_needs_compatible_constants() {
    let cfg = natural();
    let opts = ScheduleOptions {
        mode: ScheduleMode::SharedConstants,
        ..ScheduleOptions::default()
    };
    // zero coupling cannot meet any Ising congruence
    assert!(matches!(
        gate_timing_table(&GateSpec::cz(), &cfg, &opts),
        Err(SpinError::Infeasible(_))
    ));
    let tuned = PhysicalConfig {
        j_coupling: 0.4,
        b_prime: 0.1,
        b1: 0.8,
        ..cfg
    };
    let table = gate_timing_table(&GateSpec::cz(), &tuned, &opts).unwrap();
    assert!((table.timing("t1").unwrap().solution.duration - 2.5 * PI).abs() < TOL);
    let b = build_gate(&GateSpec::cz(), &tuned, &opts).unwrap();
    assert!(b.report.fidelity > 1.0 - TOL);
}

#[test]
fn derive_mode_finds_distinct_couplings_per_component() {
    let table = gate_timing_table(&GateSpec::ccnot(), &natural(), &derive()).unwrap();
    assert!(!table.shared_constants.feasible);
    let t1 = table.timing("t1").unwrap();
    // the first clock witness would need b1 > b0
    assert!((t1.solution.duration - 31.0 * PI / 4.0).abs() < TOL);
    assert!((t1.config.b1 - 16.0 / 31.0).abs() < 1e-14);
    assert!((t1.config.j_coupling - 30.0 / 31.0).abs() < 1e-14);
    assert!((t1.config.b_prime - 15.0 / 62.0).abs() < 1e-14);
}

#[test]
fn u_phi_rejects_violations() {
    let table = gate_timing_table(&GateSpec::cz(), &natural(), &derive()).unwrap();
    let t1 = table.timing("t1").unwrap();
    let n2 = SystemSize::new(2).unwrap();
    assert!(u_phi(n2, &t1.solution, &t1.config).is_ok());
    let off = PhysicalConfig {
        j_coupling: 0.41,
        ..t1.config
    };
    assert!(matches!(u_phi(n2, &t1.solution, &off), Err(SpinError::TimingViolation(_))));
    let detuned = PhysicalConfig {
        b0: 1.01,
        ..t1.config
    };
    assert!(u_phi(n2, &t1.solution, &detuned).is_err());
}
