// Copyright 2026 Spinforge Contributors
// SPDX-License-Identifier: Apache-2.0

//! Pulse-timing congruences and their solver.
//!
//! A [`TimingConstraint`] asks that `factor * rate * t = 2 k pi + r pi` for
//! an integer witness `k >= min_witness`, with the residue `r` an exact
//! rational. Coefficient ratios are recovered as small rationals, so the
//! simultaneous system is solved on integers; floating point only appears
//! when the duration is finally reported.

mod program;
mod table;

use std::f64::consts::PI;
use std::fmt;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpinError};
use crate::hamiltonian::PhysicalConfig;

pub use program::{evolution_factors, ProgramTemplate, PulseFactor, PulseProgram, PulseStep, StepKind, StepTemplate};
pub use table::{
    component_slots, gate_timing_table, slot_constraints, Aggregate, ComponentSlots, ScheduleMode,
    ScheduleOptions, ScheduledTiming, SharedConstantsCheck, SlotRole, TimingTable,
};

/// Largest residual accepted for a solved congruence, in radians.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Coefficient ratios are recognised as rationals with at most this denominator.
pub const MAX_RATIO_DENOMINATOR: i64 = 10_000;

/// Relative tolerance when matching a float ratio to a rational.
pub const RATIO_TOL: f64 = 1e-12;

/// Physical rate a constraint multiplies the duration by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rate {
    Omega,
    GammaB0,
    GammaB1,
    J,
    BPrime,
}

impl Rate {
    pub fn value(self, cfg: &PhysicalConfig) -> f64 {
        match self {
            Rate::Omega => cfg.omega,
            Rate::GammaB0 => cfg.gamma * cfg.b0,
            Rate::GammaB1 => cfg.gamma * cfg.b1,
            Rate::J => cfg.j_coupling,
            Rate::BPrime => cfg.b_prime,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rate::Omega => "omega",
            Rate::GammaB0 => "gamma*b0",
            Rate::GammaB1 => "gamma*b1",
            Rate::J => "J",
            Rate::BPrime => "B'",
        }
    }

    /// Writes `value` (in rad/s) back into the field this rate is made of.
    pub fn assign(self, cfg: &mut PhysicalConfig, value: f64) {
        match self {
            Rate::Omega => cfg.omega = value,
            Rate::GammaB0 => cfg.b0 = value / cfg.gamma,
            Rate::GammaB1 => cfg.b1 = value / cfg.gamma,
            Rate::J => cfg.j_coupling = value,
            Rate::BPrime => cfg.b_prime = value,
        }
    }
}

/// Exact rational multiple of pi, serialized as `"p/q"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PiMultiple(pub Rational64);

impl PiMultiple {
    pub fn new(numer: i64, denom: i64) -> Self {
        Self(Rational64::new(numer, denom))
    }

    pub fn radians(self) -> f64 {
        ratio_to_f64(self.0) * PI
    }
}

impl fmt::Display for PiMultiple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.0;
        if r.is_zero() {
            f.write_str("0")
        } else if r.is_one() {
            f.write_str("pi")
        } else if (-r).is_one() {
            f.write_str("-pi")
        } else {
            write!(f, "{r}*pi")
        }
    }
}

/// `factor*rate`, dropping a unit factor.
pub fn coefficient_label(factor: Rational64, rate: Rate) -> String {
    if factor.is_one() {
        rate.symbol().to_string()
    } else {
        format!("{factor}*{}", rate.symbol())
    }
}

impl TryFrom<String> for PiMultiple {
    type Error = SpinError;

    fn try_from(s: String) -> Result<Self> {
        match s.trim() {
            "pi" => Ok(Self::new(1, 1)),
            "-pi" => Ok(Self::new(-1, 1)),
            t => parse_ratio(t.trim_end_matches("*pi")).map(Self),
        }
    }
}

impl From<PiMultiple> for String {
    fn from(p: PiMultiple) -> String {
        p.0.to_string()
    }
}

fn parse_ratio(s: &str) -> Result<Rational64> {
    s.trim()
        .parse::<Rational64>()
        .map_err(|e| SpinError::Parse(format!("`{s}` is not a rational: {e}")))
}

mod ratio_string {
    use num_rational::Rational64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational64, D::Error> {
        let text = String::deserialize(d)?;
        super::parse_ratio(&text).map_err(serde::de::Error::custom)
    }
}

pub fn ratio_to_f64(r: Rational64) -> f64 {
    r.numer().to_f64().expect("i64 fits f64") / r.denom().to_f64().expect("i64 fits f64")
}

/// One congruence `factor * rate * t = 2 k pi + residue`, `k >= min_witness`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingConstraint {
    pub rate: Rate,
    #[serde(with = "ratio_string")]
    pub factor: Rational64,
    pub residue: PiMultiple,
    pub min_witness: i64,
    pub description: String,
}

impl TimingConstraint {
    pub fn new(rate: Rate, factor: Rational64, residue: PiMultiple, min_witness: i64) -> Self {
        let description = format!(
            "{} t = 2k pi {}, k >= {min_witness}",
            coefficient_label(factor, rate),
            signed_residue(residue)
        );
        Self {
            rate,
            factor,
            residue,
            min_witness,
            description,
        }
    }

    /// The coefficient multiplying `t`, in rad/s.
    pub fn coefficient(&self, cfg: &PhysicalConfig) -> f64 {
        ratio_to_f64(self.factor) * self.rate.value(cfg)
    }

    /// `2k + r`: the required phase in units of pi.
    pub fn target_phase(&self, witness: i64) -> Rational64 {
        Rational64::from_integer(2 * witness) + self.residue.0
    }

    /// `|coefficient * t - (2k + r) pi|` in radians.
    pub fn violation(&self, cfg: &PhysicalConfig, duration: f64, witness: i64) -> f64 {
        (self.coefficient(cfg) * duration - ratio_to_f64(self.target_phase(witness)) * PI).abs()
    }
}

fn signed_residue(r: PiMultiple) -> String {
    if r.0.is_negative() {
        format!("- {}", PiMultiple(-r.0))
    } else {
        format!("+ {r}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub constraint: TimingConstraint,
    pub witness: i64,
}

/// A duration together with the integers that satisfy each congruence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingSolution {
    pub label: String,
    pub duration: f64,
    pub witnesses: Vec<Witness>,
    /// Largest congruence violation, radians.
    pub residual: f64,
}

impl TimingSolution {
    pub fn residual_under(&self, cfg: &PhysicalConfig) -> f64 {
        self.witnesses
            .iter()
            .map(|w| w.constraint.violation(cfg, self.duration, w.witness))
            .fold(0.0, f64::max)
    }

    /// Fails with [`SpinError::TimingViolation`] unless every congruence holds under `cfg`.
    pub fn check(&self, cfg: &PhysicalConfig) -> Result<()> {
        let residual = self.residual_under(cfg);
        if residual <= RESIDUAL_TOL {
            return Ok(());
        }
        let worst = self
            .witnesses
            .iter()
            .max_by(|a, b| {
                let va = a.constraint.violation(cfg, self.duration, a.witness);
                let vb = b.constraint.violation(cfg, self.duration, b.witness);
                va.total_cmp(&vb)
            })
            .expect("non-empty witnesses");
        Err(SpinError::TimingViolation(format!(
            "{}: `{}` misses by {residual:e} rad",
            self.label, worst.constraint.description
        )))
    }

    pub fn witness_for(&self, rate: Rate) -> Option<&Witness> {
        self.witnesses.iter().find(|w| w.constraint.rate == rate)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

/// Smallest-denominator rational within [`RATIO_TOL`] of `x`, if one exists
/// with denominator at most [`MAX_RATIO_DENOMINATOR`].
pub fn rational_ratio(x: f64) -> Option<Rational64> {
    if !x.is_finite() || x <= 0.0 {
        return None;
    }
    let tol = RATIO_TOL * x.max(1.0);
    // continued-fraction convergents h/k
    let (mut h_prev, mut h) = (1i64, x.floor() as i64);
    let (mut k_prev, mut k) = (0i64, 1i64);
    let mut rem = x - x.floor();
    loop {
        if (x - h as f64 / k as f64).abs() <= tol {
            return Some(Rational64::new(h, k));
        }
        if rem.abs() < f64::EPSILON {
            return None;
        }
        let inv = 1.0 / rem;
        let a = inv.floor();
        if a > MAX_RATIO_DENOMINATOR as f64 {
            return None;
        }
        let a = a as i64;
        rem = inv - a as f64;
        let h_next = a.checked_mul(h)?.checked_add(h_prev)?;
        let k_next = a.checked_mul(k)?.checked_add(k_prev)?;
        if k_next > MAX_RATIO_DENOMINATOR {
            return None;
        }
        (h_prev, h, k_prev, k) = (h, h_next, k, k_next);
    }
}

/// Solves the constraints simultaneously; see [`solve_timing_with`].
pub fn solve_timing(
    constraints: &[TimingConstraint],
    cfg: &PhysicalConfig,
    search_bound: i64,
) -> Result<TimingSolution> {
    solve_timing_with(constraints, cfg, search_bound, &|| false)
}

/// Finds the shortest duration at which every constraint holds with all
/// witnesses in `min_witness..=search_bound`.
///
/// The witness of the smallest-coefficient constraint is scanned upward;
/// every other witness then follows exactly from the rational coefficient
/// ratio. `cancel` is polled periodically.
pub fn solve_timing_with(
    constraints: &[TimingConstraint],
    cfg: &PhysicalConfig,
    search_bound: i64,
    cancel: &dyn Fn() -> bool,
) -> Result<TimingSolution> {
    if constraints.is_empty() {
        return Err(SpinError::EmptyConstraints);
    }
    if search_bound < 1 {
        return Err(SpinError::InvalidArgument(format!("search bound {search_bound} < 1")));
    }
    let coefficients: Vec<f64> = constraints.iter().map(|c| c.coefficient(cfg)).collect();
    if let Some((i, value)) = coefficients
        .iter()
        .enumerate()
        .find(|(_, v)| !v.is_finite() || **v <= 0.0)
    {
        return Err(SpinError::Infeasible(format!(
            "`{}` has coefficient {value}; it must be positive",
            constraints[i].description
        )));
    }
    let base = coefficients
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty");
    let ratios = coefficients
        .iter()
        .zip(constraints)
        .map(|(value, constraint)| {
            rational_ratio(value / coefficients[base]).ok_or_else(|| {
                SpinError::Incommensurate(format!(
                    "`{}` has an irrational coefficient ratio {} to `{}`",
                    constraint.description,
                    value / coefficients[base],
                    constraints[base].description
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut first_blocker: Option<usize> = None;
    let start = constraints[base].min_witness.max(0);
    for (step, k) in (start..=search_bound).enumerate() {
        if step % 1024 == 0 && cancel() {
            return Err(SpinError::Cancelled);
        }
        let phase = constraints[base].target_phase(k);
        if !phase.is_positive() {
            continue;
        }
        let mut witnesses = Vec::with_capacity(constraints.len());
        let mut blocked = None;
        for (i, constraint) in constraints.iter().enumerate() {
            let twice = ratios[i] * phase - constraint.residue.0;
            let w = if twice.is_integer() && twice.to_integer().is_even() {
                twice.to_integer() / 2
            } else {
                blocked = Some(i);
                break;
            };
            if w < constraint.min_witness || w > search_bound {
                blocked = Some(i);
                break;
            }
            witnesses.push(Witness {
                constraint: constraint.clone(),
                witness: w,
            });
        }
        match blocked {
            Some(i) => {
                first_blocker.get_or_insert(i);
            }
            None => {
                let duration = ratio_to_f64(phase) * PI / coefficients[base];
                let mut solution = TimingSolution {
                    label: String::new(),
                    duration,
                    witnesses,
                    residual: 0.0,
                };
                solution.residual = solution.residual_under(cfg);
                return Ok(solution);
            }
        }
    }
    let blocker = first_blocker.unwrap_or(base);
    Err(SpinError::Incommensurate(format!(
        "no duration satisfies `{}` together with `{}` for witnesses <= {search_bound}",
        constraints[blocker].description, constraints[base].description
    )))
}

/// A rate value derived from a chosen duration and witness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantAssignment {
    pub rate: Rate,
    /// rad/s
    pub value: f64,
}

/// Given a duration and one witness per constraint, returns the rate
/// values that satisfy every congruence exactly. Two constraints that pin
/// the same rate to different values are infeasible.
pub fn invert_for_constants(
    duration: f64,
    constraints: &[TimingConstraint],
    witnesses: &[i64],
) -> Result<Vec<ConstantAssignment>> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(SpinError::InvalidArgument(format!("duration {duration} must be positive")));
    }
    if constraints.len() != witnesses.len() {
        return Err(SpinError::InvalidArgument(format!(
            "{} constraints but {} witnesses",
            constraints.len(),
            witnesses.len()
        )));
    }
    let mut out: Vec<ConstantAssignment> = Vec::new();
    for (constraint, &k) in constraints.iter().zip(witnesses) {
        let phase = ratio_to_f64(constraint.target_phase(k)) * PI;
        let value = phase / (ratio_to_f64(constraint.factor) * duration);
        if let Some(existing) = out.iter().find(|a| a.rate == constraint.rate) {
            let scale = existing.value.abs().max(value.abs()).max(f64::MIN_POSITIVE);
            if (existing.value - value).abs() > RATIO_TOL * scale {
                return Err(SpinError::Infeasible(format!(
                    "`{}` needs {} = {value:e} but an earlier congruence needs {:e}",
                    constraint.description,
                    constraint.rate.symbol(),
                    existing.value
                )));
            }
            continue;
        }
        out.push(ConstantAssignment {
            rate: constraint.rate,
            value,
        });
    }
    Ok(out)
}

/// Applies derived rates to a copy of `cfg`.
pub fn apply_assignments(cfg: &PhysicalConfig, assignments: &[ConstantAssignment]) -> PhysicalConfig {
    let mut out = *cfg;
    for a in assignments {
        a.rate.assign(&mut out, a.value);
    }
    out
}
