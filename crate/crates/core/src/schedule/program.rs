// Copyright 2026 Spinforge Contributors
// SPDX-License-Identifier: Apache-2.0

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use super::{ratio_to_f64, TimingTable};
use crate::error::{Result, SpinError};
use crate::hamiltonian::PhysicalConfig;
use crate::matrix::{expm_pauli, product, ComplexMatrix};
use crate::spin::{PauliAxis, PauliString, SystemSize};

/// What a step of a program does during its slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepKind {
    /// Free evolution under the rotating-frame propagator.
    Evolution,
    /// `exp(i * scale * omega * t * P)` for a Pauli string `P`.
    Rotation {
        generator: PauliString,
        #[serde(with = "super::ratio_string")]
        scale: Rational64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepTemplate {
    pub slot: String,
    #[serde(flatten)]
    pub kind: StepKind,
}

impl StepTemplate {
    pub fn evolution(slot: &str) -> Self {
        Self {
            slot: slot.to_string(),
            kind: StepKind::Evolution,
        }
    }

    pub fn rotation(slot: &str, generator: PauliString, numer: i64, denom: i64) -> Self {
        Self {
            slot: slot.to_string(),
            kind: StepKind::Rotation {
                generator,
                scale: Rational64::new(numer, denom),
            },
        }
    }
}

/// Ordered pulse steps, written as an operator product: the first entry is
/// the leftmost factor and acts last.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramTemplate {
    pub gate_label: String,
    pub n: SystemSize,
    pub steps: Vec<StepTemplate>,
}

impl ProgramTemplate {
    /// How many times each slot's duration is spent, sorted by slot number.
    pub fn slot_counts(&self) -> Vec<(String, u32)> {
        let mut counts: Vec<(String, u32)> = Vec::new();
        for step in &self.steps {
            match counts.iter_mut().find(|(s, _)| *s == step.slot) {
                Some((_, k)) => *k += 1,
                None => counts.push((step.slot.clone(), 1)),
            }
        }
        counts.sort_by_key(|(s, _)| slot_number(s));
        counts
    }

    /// Exchanges two sites in every generator.
    pub fn relabel(&self, a: usize, b: usize) -> Self {
        let steps = self
            .steps
            .iter()
            .map(|step| match &step.kind {
                StepKind::Evolution => step.clone(),
                StepKind::Rotation { generator, scale } => StepTemplate {
                    slot: step.slot.clone(),
                    kind: StepKind::Rotation {
                        generator: generator.swap_sites(a, b),
                        scale: *scale,
                    },
                },
            })
            .collect();
        Self {
            gate_label: self.gate_label.clone(),
            n: self.n,
            steps,
        }
    }

    /// Fills in durations and angles from a timing table.
    pub fn instantiate(&self, table: &TimingTable) -> Result<PulseProgram> {
        let mut steps = Vec::with_capacity(self.steps.len());
        for step in &self.steps {
            let timing = table.timing(&step.slot).ok_or_else(|| {
                SpinError::TimingViolation(format!("no duration scheduled for slot {}", step.slot))
            })?;
            timing.solution.check(&timing.config)?;
            let t = timing.solution.duration;
            let factors = match &step.kind {
                StepKind::Evolution => evolution_factors(self.n, &timing.config, t)?,
                StepKind::Rotation { generator, scale } => vec![PulseFactor {
                    generator: generator.clone(),
                    angle: ratio_to_f64(*scale) * timing.config.omega * t,
                }],
            };
            steps.push(PulseStep {
                slot: step.slot.clone(),
                duration: t,
                evolution: matches!(step.kind, StepKind::Evolution),
                factors,
            });
        }
        Ok(PulseProgram {
            gate_label: self.gate_label.clone(),
            n: self.n,
            steps,
        })
    }
}

pub(crate) fn slot_number(slot: &str) -> u32 {
    slot.trim_start_matches(|ch: char| !ch.is_ascii_digit())
        .parse()
        .unwrap_or(u32::MAX)
}

/// Factors of the rotating-frame propagator at resonance, as
/// `e^{i w t sum Sz} e^{i g B1 t sum Sx} e^{-i J t sum SzSz} e^{-i B' t}`.
pub fn evolution_factors(
    n: SystemSize,
    cfg: &PhysicalConfig,
    t: f64,
) -> Result<Vec<PulseFactor>> {
    cfg.require_resonance()?;
    let drive = cfg.gamma * cfg.b1 * t;
    if n.get() >= 2 {
        let turns = drive / (2.0 * std::f64::consts::PI);
        if (turns - turns.round()).abs() * 2.0 * std::f64::consts::PI > super::RESIDUAL_TOL {
            return Err(SpinError::DriveNotEliminated { angle: drive });
        }
    }
    let mut factors = Vec::new();
    for site in n.sites() {
        factors.push(PulseFactor {
            generator: PauliString::single(PauliAxis::Z, site),
            angle: cfg.omega * t / 2.0,
        });
    }
    for site in n.sites() {
        factors.push(PulseFactor {
            generator: PauliString::single(PauliAxis::X, site),
            angle: drive / 2.0,
        });
    }
    for (i, j) in n.pairs() {
        factors.push(PulseFactor {
            generator: PauliString::zz(i, j)?,
            angle: -cfg.j_coupling * t / 4.0,
        });
    }
    factors.push(PulseFactor {
        generator: PauliString::identity(n),
        angle: -cfg.b_prime * t,
    });
    Ok(factors)
}

/// `exp(i * angle * generator)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseFactor {
    pub generator: PauliString,
    pub angle: f64,
}

impl PulseFactor {
    pub fn matrix(&self) -> Result<ComplexMatrix> {
        expm_pauli(&self.generator.to_matrix(), self.angle)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseStep {
    pub slot: String,
    pub duration: f64,
    pub evolution: bool,
    pub factors: Vec<PulseFactor>,
}

impl PulseStep {
    pub fn unitary(&self, dim: usize) -> Result<ComplexMatrix> {
        let mats = self.factors.iter().map(PulseFactor::matrix).collect::<Result<Vec<_>>>()?;
        product(dim, &mats)
    }
}

/// A concrete pulse sequence in operator order (first step acts last).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseProgram {
    pub gate_label: String,
    pub n: SystemSize,
    pub steps: Vec<PulseStep>,
}

impl PulseProgram {
    pub fn unitary(&self) -> Result<ComplexMatrix> {
        let dim = self.n.dim();
        let mats = self.steps.iter().map(|s| s.unitary(dim)).collect::<Result<Vec<_>>>()?;
        product(dim, &mats)
    }

    /// Reverses the sequence and negates every angle.
    pub fn adjoint(&self) -> Self {
        let steps = self
            .steps
            .iter()
            .rev()
            .map(|s| PulseStep {
                slot: s.slot.clone(),
                duration: s.duration,
                evolution: s.evolution,
                factors: s
                    .factors
                    .iter()
                    .rev()
                    .map(|f| PulseFactor {
                        generator: f.generator.clone(),
                        angle: -f.angle,
                    })
                    .collect(),
            })
            .collect();
        Self {
            gate_label: format!("{}^dagger", self.gate_label),
            n: self.n,
            steps,
        }
    }

    pub fn total_time(&self) -> f64 {
        self.steps.iter().map(|s| s.duration).sum()
    }

    /// Concatenates programs listed in time order into one operator product.
    pub fn sequence(label: &str, n: SystemSize, time_ordered: &[PulseProgram]) -> Self {
        let steps = time_ordered
            .iter()
            .rev()
            .flat_map(|p| p.steps.iter().cloned())
            .collect();
        Self {
            gate_label: label.to_string(),
            n,
            steps,
        }
    }

    /// One line per factor, e.g. `t1: exp(i*0.392699*IIZ)`.
    pub fn factor_listing(&self) -> Vec<String> {
        self.steps
            .iter()
            .flat_map(|s| {
                s.factors
                    .iter()
                    .map(move |f| format!("{}: exp(i*{:.6}*{})", s.slot, f.angle, f.generator))
            })
            .collect()
    }
}
