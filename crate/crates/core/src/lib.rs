// Copyright 2026 Spinforge Contributors
// SPDX-License-Identifier: Apache-2.0

//! Pulse-level synthesis of spin-qubit gates under resonance driving.
//!
//! The crate builds unitaries for NOT, controlled-Z, CNOT and the
//! three- and four-spin Toffoli gates from timed pulse sequences, solves
//! the timing congruences those sequences rely on, and checks the result
//! against ideal gates and against direct integration of the lab-frame
//! Schrodinger equation.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod gates;
pub mod hamiltonian;
pub mod matrix;
pub mod schedule;
pub mod spin;
pub mod verify;

pub use error::{Result, SpinError};
pub use gates::{build_gate, ideal_component, pulse_component, GateKind, GateSpec};
pub use hamiltonian::PhysicalConfig;
pub use matrix::{phase_fidelity, ComplexMatrix, FidelityReport, StateVector};
pub use schedule::{gate_timing_table, solve_timing, ScheduleMode, ScheduleOptions, TimingTable};
pub use spin::SystemSize;
