// Copyright 2026 Spinforge Contributors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use super::program::slot_number;
use super::{
    invert_for_constants, apply_assignments, ratio_to_f64, solve_timing, PiMultiple, Rate,
    TimingConstraint, TimingSolution, Witness,
};
use crate::error::{Result, SpinError};
use crate::gates::{pulse_template, GateKind, GateSpec};
use crate::hamiltonian::PhysicalConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleMode {
    /// Pick each evolution duration from the clock congruence, then derive
    /// the coupling constants it needs.
    #[default]
    DeriveConstants,
    /// Keep the configured constants and solve every congruence together.
    SharedConstants,
}

impl std::fmt::Display for ScheduleMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::DeriveConstants => "derive-constants",
            Self::SharedConstants => "shared-constants",
        })
    }
}

impl std::str::FromStr for ScheduleMode {
    type Err = SpinError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "derive-constants" | "derive" => Ok(Self::DeriveConstants),
            "shared-constants" | "shared" => Ok(Self::SharedConstants),
            other => Err(SpinError::InvalidArgument(format!("unknown schedule mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleOptions {
    pub mode: ScheduleMode,
    /// Largest witness tried for any congruence.
    pub search_bound: i64,
    /// Require clock witness >= ratio * drive witness.
    pub min_witness_ratio: Option<f64>,
}

impl Default for ScheduleOptions {
    fn default() -> Self {
        Self {
            mode: ScheduleMode::DeriveConstants,
            search_bound: 1000,
            min_witness_ratio: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotRole {
    Evolution,
    Pulse,
}

/// Slot names a component owns inside its host circuit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentSlots {
    pub evolution: Option<String>,
    /// Slot of the target-axis basis-change pulses.
    pub y_pulse: Option<String>,
    /// Slot of the Ising and single-site correction pulses.
    pub z_pulse: Option<String>,
    pub aggregate: String,
}

fn slots(e: Option<u32>, y: Option<u32>, z: Option<u32>, agg: u32) -> ComponentSlots {
    ComponentSlots {
        evolution: e.map(|k| format!("t{k}")),
        y_pulse: y.map(|k| format!("t{k}")),
        z_pulse: z.map(|k| format!("t{k}")),
        aggregate: format!("T{agg}"),
    }
}

/// Slot assignment of a (non-composite) component, numbered as in the
/// host Toffoli circuits so that shared components share durations.
pub fn component_slots(spec: &GateSpec) -> Result<ComponentSlots> {
    let base = spec.base();
    let n = base.n.get();
    let ct = (base.control.unwrap_or(0), base.target.unwrap_or(0));
    let out = match base.kind {
        GateKind::Not => slots(Some(1), None, Some(2), 1),
        GateKind::Cz => slots(Some(1), None, None, 1),
        GateKind::HadamardLike => slots(None, Some(2), None, 1),
        GateKind::Cnot if n == 2 => slots(Some(1), Some(2), None, 1),
        GateKind::CxHalf if n == 3 => match ct {
            (2, 3) => slots(Some(1), Some(2), Some(3), 1),
            (1, 3) => slots(Some(6), Some(7), Some(8), 3),
            _ => slots(Some(1), Some(2), Some(3), 1),
        },
        GateKind::CxQuarter if n == 4 => match ct {
            (1, 4) => slots(Some(1), Some(2), Some(3), 1),
            (2, 4) => slots(Some(6), Some(7), Some(8), 3),
            (3, 4) => slots(Some(11), Some(12), Some(13), 5),
            _ => slots(Some(1), Some(2), Some(3), 1),
        },
        GateKind::Cnot if n == 3 => match ct {
            (1, 2) => slots(Some(4), Some(5), Some(5), 2),
            _ => slots(Some(1), Some(2), Some(2), 1),
        },
        GateKind::Cnot if n == 4 => match ct {
            (1, 2) => slots(Some(4), Some(5), Some(5), 2),
            (2, 3) => slots(Some(9), Some(10), Some(10), 4),
            (1, 3) => slots(Some(14), Some(15), Some(15), 6),
            _ => slots(Some(1), Some(2), Some(2), 1),
        },
        GateKind::CxHalf | GateKind::CxQuarter => slots(Some(1), Some(2), Some(3), 1),
        GateKind::Cnot => slots(Some(1), Some(2), Some(2), 1),
        GateKind::Ccnot | GateKind::Cccnot => {
            return Err(SpinError::InvalidGate(format!(
                "{} is a circuit, not a single component",
                spec.label()
            )))
        }
        GateKind::CxNegHalf | GateKind::CxNegQuarter => unreachable!("base() strips the adjoint"),
    };
    Ok(out)
}

fn tc(rate: Rate, factor: (i64, i64), residue: (i64, i64), min_witness: i64) -> TimingConstraint {
    TimingConstraint::new(
        rate,
        Rational64::new(factor.0, factor.1),
        PiMultiple::new(residue.0, residue.1),
        min_witness,
    )
}

/// The congruences each slot of a component must satisfy. The first
/// constraint of an evolution slot is its clock.
pub fn slot_constraints(spec: &GateSpec) -> Result<Vec<(String, SlotRole, Vec<TimingConstraint>)>> {
    let base = spec.base();
    let s = component_slots(&base)?;
    let n = base.n.get();
    let mut out = Vec::new();
    match base.kind {
        GateKind::Not => {
            out.push((
                s.evolution.clone().expect("slot"),
                SlotRole::Evolution,
                vec![
                    tc(Rate::GammaB0, (1, 2), (1, 2), 1),
                    tc(Rate::GammaB1, (1, 2), (1, 2), 0),
                ],
            ));
            out.push((
                s.z_pulse.clone().expect("slot"),
                SlotRole::Pulse,
                vec![tc(Rate::Omega, (1, 1), (1, 2), 0)],
            ));
        }
        GateKind::Cz | GateKind::Cnot if n == 2 => {
            out.push((
                s.evolution.clone().expect("slot"),
                SlotRole::Evolution,
                vec![
                    tc(Rate::Omega, (1, 1), (1, 2), 1),
                    tc(Rate::GammaB1, (1, 1), (0, 1), 1),
                    tc(Rate::J, (1, 1), (1, 1), 0),
                    tc(Rate::BPrime, (1, 1), (1, 4), 0),
                ],
            ));
            if let Some(y) = &s.y_pulse {
                out.push((y.clone(), SlotRole::Pulse, vec![tc(Rate::Omega, (1, 1), (1, 2), 0)]));
            }
        }
        GateKind::HadamardLike => {
            out.push((
                s.y_pulse.clone().expect("slot"),
                SlotRole::Pulse,
                vec![tc(Rate::Omega, (1, 1), (1, 2), 0)],
            ));
        }
        GateKind::CxHalf | GateKind::CxQuarter | GateKind::Cnot => {
            // residue of the controlled phase, units of pi
            let r = match base.kind {
                GateKind::CxHalf => (-1, 8),
                GateKind::CxQuarter => (-1, 16),
                _ => (1, 4),
            };
            let drive = if n == 3 { (1, 2) } else { (1, 1) };
            out.push((
                s.evolution.clone().expect("slot"),
                SlotRole::Evolution,
                vec![
                    tc(Rate::Omega, (1, 2), r, 1),
                    tc(Rate::GammaB1, drive, (0, 1), 1),
                    tc(Rate::J, (1, 4), r, 1),
                    tc(Rate::BPrime, (1, 1), r, 1),
                ],
            ));
            let y = s.y_pulse.clone().expect("slot");
            out.push((y.clone(), SlotRole::Pulse, vec![tc(Rate::Omega, (1, 2), (1, 4), 1)]));
            let z = s.z_pulse.clone().expect("slot");
            if z != y {
                out.push((z, SlotRole::Pulse, vec![tc(Rate::Omega, (1, 2), r, 1)]));
            }
        }
        _ => {
            return Err(SpinError::InvalidGate(format!(
                "no pulse schedule for {}",
                base.label()
            )))
        }
    }
    Ok(out)
}

/// A solved slot with the constants it runs under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduledTiming {
    pub component: String,
    pub role: SlotRole,
    pub solution: TimingSolution,
    pub config: PhysicalConfig,
}

/// `duration = sum count * slot`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub label: String,
    pub component: String,
    pub terms: Vec<(u32, String)>,
    pub duration: f64,
}

impl Aggregate {
    pub fn formula(&self) -> String {
        self.terms
            .iter()
            .map(|(k, s)| if *k == 1 { s.clone() } else { format!("{k}{s}") })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotConstants {
    pub slot: String,
    pub j: f64,
    pub b_prime: f64,
    pub b1: f64,
}

/// Whether one set of constants could serve every evolution slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharedConstantsCheck {
    pub feasible: bool,
    pub slots: Vec<SlotConstants>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingTable {
    pub gate: String,
    pub mode: ScheduleMode,
    pub timings: Vec<ScheduledTiming>,
    pub aggregates: Vec<Aggregate>,
    pub total: Aggregate,
    pub shared_constants: SharedConstantsCheck,
    pub warnings: Vec<String>,
}

impl TimingTable {
    pub fn timing(&self, slot: &str) -> Option<&ScheduledTiming> {
        self.timings.iter().find(|t| t.solution.label == slot)
    }

    pub fn aggregate(&self, label: &str) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.label == label)
    }

    /// One row per congruence witness, then one per aggregate and the total.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| SpinError::InvalidArgument(format!("csv: {e}"));
        w.write_record(["gate", "segment", "coefficient", "residue", "witness", "duration_seconds"])
            .map_err(io)?;
        for t in &self.timings {
            for wit in &t.solution.witnesses {
                let c = &wit.constraint;
                w.write_record([
                    t.component.as_str(),
                    t.solution.label.as_str(),
                    &super::coefficient_label(c.factor, c.rate),
                    &c.residue.to_string(),
                    &wit.witness.to_string(),
                    &format!("{:e}", t.solution.duration),
                ])
                .map_err(io)?;
            }
        }
        for a in self.aggregates.iter().chain(std::iter::once(&self.total)) {
            w.write_record([
                a.component.as_str(),
                a.label.as_str(),
                &a.formula(),
                "",
                "",
                &format!("{:e}", a.duration),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| SpinError::InvalidArgument(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| SpinError::InvalidArgument(format!("csv: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }
}

fn solve_slot(
    component: &str,
    slot: &str,
    role: SlotRole,
    constraints: &[TimingConstraint],
    cfg: &PhysicalConfig,
    opts: &ScheduleOptions,
) -> Result<ScheduledTiming> {
    let ratio_ok = |s: &TimingSolution| match (opts.min_witness_ratio, s.witness_for(Rate::GammaB1)) {
        (Some(ratio), Some(drive)) => {
            let clock = s.witnesses[0].witness as f64;
            clock >= ratio * drive.witness as f64
        }
        _ => true,
    };
    if role == SlotRole::Pulse || opts.mode == ScheduleMode::SharedConstants {
        let solution = solve_timing(constraints, cfg, opts.search_bound)?.with_label(slot);
        if !ratio_ok(&solution) {
            return Err(SpinError::Infeasible(format!(
                "{slot}: clock witness below the requested multiple of the drive witness"
            )));
        }
        return Ok(ScheduledTiming {
            component: component.to_string(),
            role,
            solution,
            config: *cfg,
        });
    }

    let clock = &constraints[0];
    let rest = &constraints[1..];
    let coefficient = clock.coefficient(cfg);
    if coefficient.is_nan() || coefficient <= 0.0 {
        return Err(SpinError::Infeasible(format!(
            "{slot}: clock `{}` has coefficient {coefficient}",
            clock.description
        )));
    }
    let mut last_err = None;
    for k in clock.min_witness.max(0)..=opts.search_bound {
        let phase = clock.target_phase(k);
        let t = ratio_to_f64(phase) * PI / coefficient;
        if t <= 0.0 {
            continue;
        }
        let witnesses: Vec<i64> = rest.iter().map(|c| c.min_witness).collect();
        let derived = apply_assignments(cfg, &invert_for_constants(t, rest, &witnesses)?);
        let mut solution = TimingSolution {
            label: slot.to_string(),
            duration: t,
            witnesses: std::iter::once(Witness {
                constraint: clock.clone(),
                witness: k,
            })
            .chain(rest.iter().zip(&witnesses).map(|(c, &w)| Witness {
                constraint: c.clone(),
                witness: w,
            }))
            .collect(),
            residual: 0.0,
        };
        solution.residual = solution.residual_under(&derived);
        match derived.validate() {
            Ok(_) if ratio_ok(&solution) => {
                return Ok(ScheduledTiming {
                    component: component.to_string(),
                    role,
                    solution,
                    config: derived,
                })
            }
            Ok(_) => {}
            Err(e) => last_err = Some(e),
        }
    }
    Err(SpinError::Infeasible(format!(
        "{slot}: no clock witness <= {} yields admissible constants ({})",
        opts.search_bound,
        last_err.map_or_else(|| "witness ratio".to_string(), |e| e.to_string())
    )))
}

fn shared_check(timings: &[ScheduledTiming]) -> SharedConstantsCheck {
    let slots: Vec<SlotConstants> = timings
        .iter()
        .filter(|t| t.role == SlotRole::Evolution)
        .map(|t| SlotConstants {
            slot: t.solution.label.clone(),
            j: t.config.j_coupling,
            b_prime: t.config.b_prime,
            b1: t.config.b1,
        })
        .collect();
    let same = |f: fn(&SlotConstants) -> f64| {
        slots.windows(2).all(|w| {
            let (a, b) = (f(&w[0]), f(&w[1]));
            (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
        })
    };
    let feasible = same(|s| s.j) && same(|s| s.b_prime) && same(|s| s.b1);
    let note = if feasible {
        "one set of constants serves every evolution slot".to_string()
    } else {
        "evolution slots need different constants; J, B' and B1 must be retuned between components"
            .to_string()
    };
    SharedConstantsCheck { feasible, slots, note }
}

/// Solves every slot a gate needs and aggregates the durations.
pub fn gate_timing_table(
    spec: &GateSpec,
    cfg: &PhysicalConfig,
    opts: &ScheduleOptions,
) -> Result<TimingTable> {
    let warnings = cfg.validate()?;
    cfg.require_resonance()?;
    let components: Vec<GateSpec> = match spec.kind {
        GateKind::Ccnot | GateKind::Cccnot => spec.circuit()?.gates,
        _ => vec![*spec],
    };
    let mut bases: Vec<GateSpec> = Vec::new();
    for c in &components {
        let b = c.base();
        if !bases.contains(&b) {
            bases.push(b);
        }
    }
    bases.sort_by_key(|b| component_slots(b).map(|s| slot_number(&s.aggregate)).unwrap_or(u32::MAX));

    let mut timings: Vec<ScheduledTiming> = Vec::new();
    let mut aggregates = Vec::new();
    for base in &bases {
        let label = base.label();
        for (slot, role, constraints) in slot_constraints(base)? {
            if timings.iter().any(|t| t.solution.label == slot) {
                continue;
            }
            timings.push(solve_slot(&label, &slot, role, &constraints, cfg, opts)?);
        }
        let terms: Vec<(u32, String)> = pulse_template(base)?
            .slot_counts()
            .into_iter()
            .map(|(s, k)| (k, s))
            .collect();
        let duration = terms
            .iter()
            .map(|(k, s)| {
                let t = timings.iter().find(|t| &t.solution.label == s).expect("slot solved");
                *k as f64 * t.solution.duration
            })
            .sum();
        aggregates.push(Aggregate {
            label: component_slots(base)?.aggregate,
            component: label,
            terms,
            duration,
        });
    }

    let mut total_terms: Vec<(u32, String)> = Vec::new();
    for c in &components {
        let agg = component_slots(c)?.aggregate;
        match total_terms.iter_mut().find(|(_, s)| *s == agg) {
            Some((k, _)) => *k += 1,
            None => total_terms.push((1, agg)),
        }
    }
    total_terms.sort_by_key(|(_, s)| slot_number(s));
    let total_duration = total_terms
        .iter()
        .map(|(k, s)| *k as f64 * aggregates.iter().find(|a| &a.label == s).expect("aggregate").duration)
        .sum();
    let total = Aggregate {
        label: "T".to_string(),
        component: spec.label(),
        terms: total_terms,
        duration: total_duration,
    };
    let shared_constants = shared_check(&timings);
    Ok(TimingTable {
        gate: spec.label(),
        mode: opts.mode,
        timings,
        aggregates,
        total,
        shared_constants,
        warnings,
    })
}
