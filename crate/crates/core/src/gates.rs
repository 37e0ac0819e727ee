// Copyright 2026 Spinforge Contributors
// SPDX-License-Identifier: Apache-2.0

//! Ideal gate matrices and their pulse-level realisations.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpinError};
use crate::hamiltonian::PhysicalConfig;
use crate::matrix::{c, phase_fidelity, product, ComplexMatrix, FidelityReport, C64};
use crate::schedule::{
    component_slots, evolution_factors, gate_timing_table, ProgramTemplate, PulseFactor,
    PulseProgram, ScheduleOptions, StepTemplate, TimingSolution, TimingTable,
};
use crate::spin::{PauliAxis, PauliString, SiteIndex, SystemSize};

/// Audit threshold: components with lower fidelity are flagged.
pub const AUDIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    Not,
    Cz,
    Cnot,
    CxHalf,
    CxNegHalf,
    CxQuarter,
    CxNegQuarter,
    Ccnot,
    Cccnot,
    HadamardLike,
}

impl GateKind {
    fn name(self) -> &'static str {
        match self {
            GateKind::Not => "not",
            GateKind::Cz => "cz",
            GateKind::Cnot => "cnot",
            GateKind::CxHalf => "cx_half",
            GateKind::CxNegHalf => "cx_neg_half",
            GateKind::CxQuarter => "cx_quarter",
            GateKind::CxNegQuarter => "cx_neg_quarter",
            GateKind::Ccnot => "ccnot",
            GateKind::Cccnot => "cccnot",
            GateKind::HadamardLike => "hadamard",
        }
    }

    fn is_controlled_x(self) -> bool {
        matches!(
            self,
            GateKind::Cnot | GateKind::CxHalf | GateKind::CxNegHalf | GateKind::CxQuarter | GateKind::CxNegQuarter
        )
    }
}

/// A gate together with the sites it acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GateSpec {
    pub kind: GateKind,
    pub control: Option<usize>,
    pub target: Option<usize>,
    pub n: SystemSize,
}

impl GateSpec {
    pub fn new(kind: GateKind, control: Option<usize>, target: Option<usize>, n: usize) -> Result<Self> {
        let size = SystemSize::new(n)?;
        let bad = |msg: String| Err(SpinError::InvalidGate(msg));
        let check_site = |s: usize| SiteIndex::new(s, n).map(|_| ());
        match kind {
            GateKind::Not => {
                if n != 1 {
                    return bad(format!("not acts on a single spin, got n = {n}"));
                }
                Ok(Self { kind, control: None, target: Some(1), n: size })
            }
            GateKind::HadamardLike => {
                let t = target.unwrap_or(n);
                check_site(t)?;
                if control.is_some() {
                    return bad("hadamard takes no control".into());
                }
                Ok(Self { kind, control: None, target: Some(t), n: size })
            }
            GateKind::Ccnot | GateKind::Cccnot => {
                let want = if kind == GateKind::Ccnot { 3 } else { 4 };
                if n != want || control.is_some() || target.is_some_and(|t| t != want) {
                    return bad(format!("{} is defined on {want} spins with the last as target", kind.name()));
                }
                Ok(Self { kind, control: None, target: Some(want), n: size })
            }
            GateKind::Cz | GateKind::Cnot | GateKind::CxHalf | GateKind::CxNegHalf
            | GateKind::CxQuarter | GateKind::CxNegQuarter => {
                if n < 2 {
                    return bad(format!("{} needs at least two spins", kind.name()));
                }
                let ctl = control.unwrap_or(1);
                let tgt = target.unwrap_or(if kind == GateKind::Cz || kind == GateKind::Cnot { 2 } else { n });
                check_site(ctl)?;
                check_site(tgt)?;
                if ctl == tgt {
                    return Err(SpinError::CoincidentSites(ctl));
                }
                if kind == GateKind::Cz && n != 2 {
                    return bad("cz is scheduled on two spins only".into());
                }
                Ok(Self { kind, control: Some(ctl), target: Some(tgt), n: size })
            }
        }
    }

    pub fn controlled(kind: GateKind, control: usize, target: usize, n: usize) -> Result<Self> {
        Self::new(kind, Some(control), Some(target), n)
    }

    pub fn not() -> Self {
        Self::new(GateKind::Not, None, None, 1).expect("valid")
    }

    pub fn cz() -> Self {
        Self::new(GateKind::Cz, None, None, 2).expect("valid")
    }

    pub fn cnot() -> Self {
        Self::new(GateKind::Cnot, None, None, 2).expect("valid")
    }

    pub fn hadamard_like() -> Self {
        Self::new(GateKind::HadamardLike, None, Some(1), 1).expect("valid")
    }

    pub fn ccnot() -> Self {
        Self::new(GateKind::Ccnot, None, None, 3).expect("valid")
    }

    pub fn cccnot() -> Self {
        Self::new(GateKind::Cccnot, None, None, 4).expect("valid")
    }

    pub fn is_adjoint(&self) -> bool {
        matches!(self.kind, GateKind::CxNegHalf | GateKind::CxNegQuarter)
    }

    /// The forward gate whose dagger this is; itself for forward gates.
    pub fn base(&self) -> Self {
        let kind = match self.kind {
            GateKind::CxNegHalf => GateKind::CxHalf,
            GateKind::CxNegQuarter => GateKind::CxQuarter,
            k => k,
        };
        Self { kind, ..*self }
    }

    /// The gate implementing the inverse, when it is in the library.
    pub fn adjoint(&self) -> Option<Self> {
        let kind = match self.kind {
            GateKind::CxHalf => GateKind::CxNegHalf,
            GateKind::CxNegHalf => GateKind::CxHalf,
            GateKind::CxQuarter => GateKind::CxNegQuarter,
            GateKind::CxNegQuarter => GateKind::CxQuarter,
            GateKind::HadamardLike => return None,
            k => k,
        };
        Some(Self { kind, ..*self })
    }

    /// Exponent `a` of a controlled `X^a`.
    pub fn power(&self) -> Option<Rational64> {
        match self.kind {
            GateKind::Cnot => Some(Rational64::from_integer(1)),
            GateKind::CxHalf => Some(Rational64::new(1, 2)),
            GateKind::CxNegHalf => Some(Rational64::new(-1, 2)),
            GateKind::CxQuarter => Some(Rational64::new(1, 4)),
            GateKind::CxNegQuarter => Some(Rational64::new(-1, 4)),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        self.to_string()
    }

    /// Component sequence of a multi-controlled gate.
    pub fn circuit(&self) -> Result<Circuit> {
        match self.kind {
            GateKind::Ccnot => Ok(Circuit::ccnot()),
            GateKind::Cccnot => Ok(Circuit::cccnot()),
            _ => Err(SpinError::InvalidGate(format!("{self} is a single component"))),
        }
    }
}

impl fmt::Display for GateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.n.get();
        match self.kind {
            GateKind::Not | GateKind::Ccnot | GateKind::Cccnot => f.write_str(self.kind.name()),
            GateKind::HadamardLike if n == 1 => f.write_str("hadamard"),
            GateKind::HadamardLike => write!(f, "hadamard:{}@{n}", self.target.unwrap_or(n)),
            GateKind::Cz | GateKind::Cnot
                if n == 2 && self.control == Some(1) && self.target == Some(2) =>
            {
                f.write_str(self.kind.name())
            }
            k => write!(
                f,
                "{}:{},{}@{n}",
                k.name(),
                self.control.unwrap_or(0),
                self.target.unwrap_or(0)
            ),
        }
    }
}

impl FromStr for GateSpec {
    type Err = SpinError;

    /// Accepts `not`, `cz`, `cnot`, `hadamard`, `ccnot`, `cccnot`, and
    /// site-qualified forms such as `cx_half:2,3`, `cnot:1,3@4` or `hadamard:2@2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (head, n) = match s.split_once('@') {
            Some((h, n)) => (
                h.to_string(),
                Some(n.parse::<usize>().map_err(|_| SpinError::Parse(format!("bad size in `{s}`")))?),
            ),
            None => (s.clone(), None),
        };
        let (name, sites) = match head.split_once(':') {
            Some((name, sites)) => {
                let parsed = sites
                    .split(',')
                    .map(|x| x.trim().parse::<usize>().map_err(|_| SpinError::Parse(format!("bad site in `{s}`"))))
                    .collect::<Result<Vec<_>>>()?;
                (name.to_string(), Some(parsed))
            }
            None => (head, None),
        };
        let kind = match name.as_str() {
            "not" | "x" => GateKind::Not,
            "cz" => GateKind::Cz,
            "cnot" | "cx" => GateKind::Cnot,
            "cx_half" | "sx" => GateKind::CxHalf,
            "cx_neg_half" | "sx_dagger" => GateKind::CxNegHalf,
            "cx_quarter" | "ssx" => GateKind::CxQuarter,
            "cx_neg_quarter" | "ssx_dagger" => GateKind::CxNegQuarter,
            "ccnot" | "toffoli" => GateKind::Ccnot,
            "cccnot" => GateKind::Cccnot,
            "hadamard" | "hadamard_like" | "h" => GateKind::HadamardLike,
            _ => return Err(SpinError::UnknownGate(s)),
        };
        let default_n = |max_site: usize| -> usize {
            let natural = match kind {
                GateKind::Not | GateKind::HadamardLike => 1,
                GateKind::Cz | GateKind::Cnot => 2,
                GateKind::CxHalf | GateKind::CxNegHalf | GateKind::Ccnot => 3,
                GateKind::CxQuarter | GateKind::CxNegQuarter | GateKind::Cccnot => 4,
            };
            natural.max(max_site)
        };
        match (kind, sites.as_deref()) {
            (GateKind::HadamardLike, Some([t])) => Self::new(kind, None, Some(*t), n.unwrap_or(default_n(*t))),
            (_, Some([ctl, tgt])) if kind.is_controlled_x() || kind == GateKind::Cz => {
                Self::new(kind, Some(*ctl), Some(*tgt), n.unwrap_or(default_n((*ctl).max(*tgt))))
            }
            (_, None) => Self::new(kind, None, None, n.unwrap_or(default_n(0))),
            _ => Err(SpinError::Parse(format!("wrong number of sites in `{s}`"))),
        }
    }
}

/// Components listed in time order (the first acts first).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    pub label: String,
    pub n: SystemSize,
    pub gates: Vec<GateSpec>,
}

impl Circuit {
    fn build(label: &str, n: usize, parts: &[(GateKind, usize, usize)]) -> Self {
        Self {
            label: label.to_string(),
            n: SystemSize::new(n).expect("valid size"),
            gates: parts
                .iter()
                .map(|&(k, c, t)| GateSpec::controlled(k, c, t, n).expect("valid component"))
                .collect(),
        }
    }

    pub fn ccnot() -> Self {
        use GateKind::*;
        Self::build(
            "ccnot",
            3,
            &[(CxHalf, 2, 3), (Cnot, 1, 2), (CxNegHalf, 2, 3), (Cnot, 1, 2), (CxHalf, 1, 3)],
        )
    }

    pub fn cccnot() -> Self {
        use GateKind::*;
        Self::build(
            "cccnot",
            4,
            &[
                (CxQuarter, 1, 4),
                (Cnot, 1, 2),
                (CxNegQuarter, 2, 4),
                (Cnot, 1, 2),
                (CxQuarter, 2, 4),
                (Cnot, 2, 3),
                (CxNegQuarter, 3, 4),
                (Cnot, 1, 3),
                (CxQuarter, 3, 4),
                (Cnot, 2, 3),
                (CxNegQuarter, 3, 4),
                (Cnot, 1, 3),
                (CxQuarter, 3, 4),
            ],
        )
    }

    pub fn ideal_unitary(&self) -> Result<ComplexMatrix> {
        let mats = self.gates.iter().rev().map(ideal_component).collect::<Result<Vec<_>>>()?;
        product(self.n.dim(), &mats)
    }

    pub fn pulse_program(&self, table: &TimingTable) -> Result<PulseProgram> {
        let parts = self
            .gates
            .iter()
            .map(|g| pulse_program(g, table))
            .collect::<Result<Vec<_>>>()?;
        Ok(PulseProgram::sequence(&self.label, self.n, &parts))
    }

    pub fn pulse_unitary(&self, table: &TimingTable) -> Result<ComplexMatrix> {
        self.pulse_program(table)?.unitary()
    }

    /// Distinct components in order of first use.
    pub fn distinct(&self) -> Vec<GateSpec> {
        let mut out: Vec<GateSpec> = Vec::new();
        for g in &self.gates {
            if !out.contains(g) {
                out.push(*g);
            }
        }
        out
    }
}

/// `H' = exp(-i pi/4 sigma_y) = [[1, -1], [1, 1]] / sqrt 2`.
pub fn hadamard_like() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_real_rows([[s, -s], [s, s]]).expect("2x2 literal")
}

/// Multi-controlled NOT on `n` spins: identity with the last two basis states swapped.
pub fn toffoli(n: SystemSize) -> ComplexMatrix {
    let dim = n.dim();
    let mut perm: Vec<usize> = (0..dim).collect();
    perm.swap(dim - 2, dim - 1);
    ComplexMatrix::permutation(&perm).expect("valid permutation")
}

fn single_site(n: SystemSize, site: usize, op: &ComplexMatrix) -> Result<ComplexMatrix> {
    let bit = n.get() - site;
    ComplexMatrix::from_fn(n.dim(), |r, col| {
        let rest = !(1 << bit);
        if r & rest != col & rest {
            return c(0.0, 0.0);
        }
        op.get((r >> bit) & 1, (col >> bit) & 1)
    })
}

/// `X^a = P+ + e^{i pi a} P-`, with `P+-` the projectors onto the X eigenstates.
pub fn x_power(a: f64) -> ComplexMatrix {
    let e = C64::from_polar(1.0, PI * a);
    let p = (c(1.0, 0.0) + e) / 2.0;
    let m = (c(1.0, 0.0) - e) / 2.0;
    ComplexMatrix::from_rows(&[vec![p, m], vec![m, p]]).expect("2x2")
}

fn controlled(n: SystemSize, control: usize, target: usize, op: &ComplexMatrix) -> Result<ComplexMatrix> {
    let cbit = n.get() - control;
    let tbit = n.get() - target;
    ComplexMatrix::from_fn(n.dim(), |r, col| {
        let rest = !(1 << tbit);
        if r & rest != col & rest {
            return c(0.0, 0.0);
        }
        if (col >> cbit) & 1 == 0 {
            return if r == col { c(1.0, 0.0) } else { c(0.0, 0.0) };
        }
        op.get((r >> tbit) & 1, (col >> tbit) & 1)
    })
}

/// The exact target matrix of a gate.
pub fn ideal_component(spec: &GateSpec) -> Result<ComplexMatrix> {
    let n = spec.n;
    match spec.kind {
        GateKind::Not => Ok(crate::spin::pauli(PauliAxis::X)),
        GateKind::HadamardLike => single_site(n, spec.target.expect("target"), &hadamard_like()),
        GateKind::Cz => controlled(n, spec.control.expect("control"), spec.target.expect("target"), &crate::spin::pauli(PauliAxis::Z)),
        GateKind::Ccnot | GateKind::Cccnot => Ok(toffoli(n)),
        GateKind::Cnot => controlled(
            n,
            spec.control.expect("control"),
            spec.target.expect("target"),
            &crate::spin::pauli(PauliAxis::X),
        ),
        _ => {
            let a = spec.power().expect("controlled power");
            controlled(
                n,
                spec.control.expect("control"),
                spec.target.expect("target"),
                &x_power(*a.numer() as f64 / *a.denom() as f64),
            )
        }
    }
}

/// The rotating-frame propagator at resonance, checked against `timing`.
///
/// Fails when `timing` does not hold under `cfg`, when `cfg` is off
/// resonance, or when the drive is not a whole number of turns for n >= 2.
pub fn u_phi(n: SystemSize, timing: &TimingSolution, cfg: &PhysicalConfig) -> Result<ComplexMatrix> {
    timing.check(cfg)?;
    let factors = evolution_factors(n, cfg, timing.duration)?;
    let mats = factors.iter().map(PulseFactor::matrix).collect::<Result<Vec<_>>>()?;
    product(n.dim(), &mats)
}

/// Pulse sequence of a forward (non-adjoint, non-composite) component.
pub fn pulse_template(spec: &GateSpec) -> Result<ProgramTemplate> {
    let base = spec.base();
    let slots = component_slots(&base)?;
    let n = base.n;
    let site = |s: usize| SiteIndex::new(s, n.get());
    let mut steps = Vec::new();
    match base.kind {
        GateKind::Not => {
            steps.push(StepTemplate::rotation(
                slots.z_pulse.as_deref().expect("slot"),
                PauliString::single(PauliAxis::Z, site(1)?),
                1,
                1,
            ));
            steps.push(StepTemplate::evolution(slots.evolution.as_deref().expect("slot")));
        }
        GateKind::Cz => steps.push(StepTemplate::evolution(slots.evolution.as_deref().expect("slot"))),
        GateKind::HadamardLike => steps.push(StepTemplate::rotation(
            slots.y_pulse.as_deref().expect("slot"),
            PauliString::single(PauliAxis::Y, site(base.target.expect("target"))?),
            -1,
            2,
        )),
        GateKind::Cnot if n.get() == 2 => {
            let y = slots.y_pulse.as_deref().expect("slot");
            let gy = PauliString::single(PauliAxis::Y, site(base.target.expect("target"))?);
            steps.push(StepTemplate::rotation(y, gy.clone(), -1, 2));
            steps.push(StepTemplate::evolution(slots.evolution.as_deref().expect("slot")));
            steps.push(StepTemplate::rotation(y, gy, 1, 2));
        }
        GateKind::Cnot | GateKind::CxHalf | GateKind::CxQuarter => {
            let (ctl, tgt) = (base.control.expect("control"), base.target.expect("target"));
            let y = slots.y_pulse.as_deref().expect("slot");
            let z = slots.z_pulse.as_deref().expect("slot");
            let gy = PauliString::single(PauliAxis::Y, site(tgt)?);
            steps.push(StepTemplate::rotation(y, gy.clone(), -1, 2));
            steps.push(StepTemplate::evolution(slots.evolution.as_deref().expect("slot")));
            let (lo, hi) = (ctl.min(tgt), ctl.max(tgt));
            for (i, j) in n.pairs() {
                if (i.site(), j.site()) != (lo, hi) {
                    steps.push(StepTemplate::rotation(z, PauliString::zz(i, j)?, 1, 2));
                }
            }
            for s in n.sites() {
                if s.site() != ctl && s.site() != tgt {
                    steps.push(StepTemplate::rotation(z, PauliString::single(PauliAxis::Z, s), -1, 2));
                }
            }
            steps.push(StepTemplate::rotation(y, gy, 1, 2));
        }
        _ => {
            return Err(SpinError::InvalidGate(format!("{} has no single pulse sequence", spec.label())));
        }
    }
    Ok(ProgramTemplate {
        gate_label: base.label(),
        n,
        steps,
    })
}

/// Concrete pulse program of any gate; adjoint kinds are the dagger of their base.
pub fn pulse_program(spec: &GateSpec, table: &TimingTable) -> Result<PulseProgram> {
    match spec.kind {
        GateKind::Ccnot | GateKind::Cccnot => spec.circuit()?.pulse_program(table),
        _ if spec.is_adjoint() => {
            let mut p = pulse_template(&spec.base())?.instantiate(table)?.adjoint();
            p.gate_label = spec.label();
            Ok(p)
        }
        _ => pulse_template(spec)?.instantiate(table),
    }
}

pub fn pulse_component(spec: &GateSpec, table: &TimingTable) -> Result<ComplexMatrix> {
    pulse_program(spec, table)?.unitary()
}

pub fn not_gate_1q(table: &TimingTable) -> Result<ComplexMatrix> {
    pulse_component(&GateSpec::not(), table)
}

pub fn cnot_2q(table: &TimingTable) -> Result<ComplexMatrix> {
    pulse_component(&GateSpec::cnot(), table)
}

pub fn compose_ccnot(table: &TimingTable) -> Result<ComplexMatrix> {
    Circuit::ccnot().pulse_unitary(table)
}

pub fn compose_cccnot(table: &TimingTable) -> Result<ComplexMatrix> {
    Circuit::cccnot().pulse_unitary(table)
}

/// Everything produced when a gate is synthesised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateBuild {
    pub spec: GateSpec,
    pub table: TimingTable,
    pub program: PulseProgram,
    pub unitary: ComplexMatrix,
    pub ideal: ComplexMatrix,
    pub report: FidelityReport,
    pub unitarity_deviation: f64,
}

pub fn build_gate(spec: &GateSpec, cfg: &PhysicalConfig, opts: &ScheduleOptions) -> Result<GateBuild> {
    let table = gate_timing_table(spec, cfg, opts)?;
    let program = pulse_program(spec, &table)?;
    let unitary = program.unitary()?;
    let ideal = ideal_component(spec)?;
    let report = phase_fidelity(&unitary, &ideal)?.with_label(spec.label());
    Ok(GateBuild {
        spec: *spec,
        unitarity_deviation: unitary.unitarity_deviation(),
        table,
        program,
        unitary,
        ideal,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentAudit {
    pub circuit: String,
    pub component: String,
    pub report: FidelityReport,
    pub unitarity_deviation: f64,
    pub flagged: bool,
    /// Pulse factors, listed only for flagged components.
    pub factors: Vec<String>,
}

/// Compares every distinct component of both Toffoli circuits with its ideal matrix.
pub fn audit_components(cfg: &PhysicalConfig, opts: &ScheduleOptions) -> Result<Vec<ComponentAudit>> {
    let mut out = Vec::new();
    for host in [GateSpec::ccnot(), GateSpec::cccnot()] {
        let table = gate_timing_table(&host, cfg, opts)?;
        for comp in host.circuit()?.distinct() {
            let program = pulse_program(&comp, &table)?;
            let built = program.unitary()?;
            let report = phase_fidelity(&built, &ideal_component(&comp)?)?.with_label(comp.label());
            let flagged = report.fidelity < 1.0 - AUDIT_TOL;
            out.push(ComponentAudit {
                circuit: host.label(),
                component: comp.label(),
                unitarity_deviation: built.unitarity_deviation(),
                factors: if flagged { program.factor_listing() } else { Vec::new() },
                flagged,
                report,
            });
        }
    }
    Ok(out)
}
