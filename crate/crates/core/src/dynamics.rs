// Copyright 2026 Spinforge Contributors
// SPDX-License-Identifier: Apache-2.0

//! Direct integration of the lab-frame Schrodinger equation and the
//! closed-form rotating-frame solution it is checked against.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpinError};
use crate::hamiltonian::{rotating_hamiltonian, LabHamiltonian, PhysicalConfig};
use crate::matrix::{c, exp_i_hermitian, expm_pauli, ComplexMatrix, StateVector, C64};
use crate::schedule::TimingSolution;
use crate::spin::{spin, total_spin, PauliAxis, SystemSize};

/// Largest accepted `dt * |H|`.
pub const MAX_STEP_PHASE: f64 = 0.1;

/// Largest accepted `| |psi|^2 - 1 |` before a renormalisation.
pub const MAX_NORM_DRIFT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationSettings {
    /// Step, seconds.
    pub dt: f64,
    pub renormalize_every: usize,
}

impl IntegrationSettings {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            renormalize_every: 64,
        }
    }

    /// Step giving `dt * |H| <= 0.01`, rounded so that it divides `t_final`.
    pub fn auto(cfg: &PhysicalConfig, n: SystemSize, t_final: f64) -> Self {
        let bound = LabHamiltonian::new(cfg, n).norm_bound().max(f64::MIN_POSITIVE);
        let steps = (t_final * bound / 0.01).ceil().max(1.0);
        Self::new(if t_final > 0.0 { t_final / steps } else { 0.01 / bound })
    }

    fn validate(&self, h: &LabHamiltonian) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(SpinError::InvalidArgument(format!("dt = {} must be positive", self.dt)));
        }
        if self.renormalize_every == 0 {
            return Err(SpinError::InvalidArgument("renormalize_every must be at least 1".into()));
        }
        let phase = self.dt * h.norm_bound();
        if phase > MAX_STEP_PHASE {
            return Err(SpinError::Unstable(format!(
                "dt * |H| = {phase:.3e} exceeds {MAX_STEP_PHASE}; reduce dt below {:.3e}",
                MAX_STEP_PHASE / h.norm_bound()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub amplitudes: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Integration {
    pub state: StateVector,
    pub steps: usize,
    /// Largest pre-renormalisation norm drift seen.
    pub max_norm_drift: f64,
    pub trajectory: Vec<TrajectorySample>,
}

/// `-i H(t) v`
fn derivative(h: &LabHamiltonian, t: f64, v: &[C64]) -> Vec<C64> {
    h.apply(t, v).into_iter().map(|z| C64::new(z.im, -z.re)).collect()
}

fn axpy(v: &[C64], k: &[C64], a: f64) -> Vec<C64> {
    v.iter().zip(k).map(|(x, y)| x + y * a).collect()
}

fn rk4_step(h: &LabHamiltonian, t: f64, dt: f64, v: &[C64]) -> Vec<C64> {
    let k1 = derivative(h, t, v);
    let k2 = derivative(h, t + dt / 2.0, &axpy(v, &k1, dt / 2.0));
    let k3 = derivative(h, t + dt / 2.0, &axpy(v, &k2, dt / 2.0));
    let k4 = derivative(h, t + dt, &axpy(v, &k3, dt));
    (0..v.len())
        .map(|i| v[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0))
        .collect()
}

fn check_input(n: SystemSize, psi0: &StateVector, t_final: f64) -> Result<()> {
    if psi0.dim() != n.dim() {
        return Err(SpinError::DimensionMismatch {
            left: psi0.dim(),
            right: n.dim(),
        });
    }
    if !psi0.is_normalized(1e-12) {
        return Err(SpinError::InvalidArgument(format!(
            "initial state has |psi|^2 = {}",
            psi0.norm_sqr()
        )));
    }
    if !(t_final.is_finite() && t_final >= 0.0) {
        return Err(SpinError::InvalidArgument(format!("t_final = {t_final} must be >= 0")));
    }
    Ok(())
}

/// Fixed-step RK4 on the lab Hamiltonian. The last step is shortened to
/// land on `t_final`; `sample_every` records every k-th step (plus both ends).
pub fn integrate_lab_detailed(
    cfg: &PhysicalConfig,
    n: SystemSize,
    psi0: &StateVector,
    t_final: f64,
    settings: &IntegrationSettings,
    sample_every: Option<usize>,
) -> Result<Integration> {
    check_input(n, psi0, t_final)?;
    let h = LabHamiltonian::new(cfg, n);
    settings.validate(&h)?;
    let mut v = psi0.amplitudes().to_vec();
    let mut trajectory = Vec::new();
    let record = |t: f64, v: &[C64], out: &mut Vec<TrajectorySample>| {
        out.push(TrajectorySample {
            t,
            amplitudes: v.to_vec(),
        })
    };
    if sample_every.is_some() {
        record(0.0, &v, &mut trajectory);
    }
    let full = (t_final / settings.dt).floor() as usize;
    let rest = t_final - full as f64 * settings.dt;
    let steps = if rest > settings.dt * 1e-9 { full + 1 } else { full };
    let mut max_drift: f64 = 0.0;
    let mut t = 0.0;
    for k in 0..steps {
        let dt = if k == full { rest } else { settings.dt };
        v = rk4_step(&h, t, dt, &v);
        t = if k + 1 == steps { t_final } else { (k + 1) as f64 * settings.dt };
        if (k + 1) % settings.renormalize_every == 0 || k + 1 == steps {
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            let drift = (norm - 1.0).abs();
            max_drift = max_drift.max(drift);
            if drift > MAX_NORM_DRIFT {
                return Err(SpinError::Unstable(format!(
                    "norm drifted by {drift:.3e} after {} steps of dt = {:.3e}",
                    k + 1,
                    settings.dt
                )));
            }
            let scale = norm.sqrt();
            v.iter_mut().for_each(|z| *z /= scale);
        }
        if let Some(every) = sample_every {
            if (k + 1) % every.max(1) == 0 || k + 1 == steps {
                record(t, &v, &mut trajectory);
            }
        }
    }
    Ok(Integration {
        state: StateVector::new(v)?,
        steps,
        max_norm_drift: max_drift,
        trajectory,
    })
}

pub fn integrate_lab(
    cfg: &PhysicalConfig,
    n: SystemSize,
    psi0: &StateVector,
    t_final: f64,
    settings: &IntegrationSettings,
) -> Result<StateVector> {
    integrate_lab_detailed(cfg, n, psi0, t_final, settings, None).map(|i| i.state)
}

/// Writes `t, re_0, im_0, re_1, ...` rows.
pub fn write_trajectory_csv<W: Write>(samples: &[TrajectorySample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| SpinError::InvalidArgument(format!("trajectory csv: {e}"));
    let dim = samples.first().map_or(0, |s| s.amplitudes.len());
    let mut header = vec!["t".to_string()];
    for i in 0..dim {
        header.push(format!("re_{i}"));
        header.push(format!("im_{i}"));
    }
    w.write_record(&header).map_err(err)?;
    for s in samples {
        let mut row = vec![format!("{:e}", s.t)];
        for a in &s.amplitudes {
            row.push(format!("{:e}", a.re));
            row.push(format!("{:e}", a.im));
        }
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| SpinError::InvalidArgument(format!("trajectory csv: {e}")))
}

/// `e^{i w t sum Sz} e^{-i H_R t}`, optionally with the reference offset in `H_R`.
pub fn analytic_propagator(cfg: &PhysicalConfig, n: SystemSize, t: f64, with_offset: bool) -> Result<ComplexMatrix> {
    let outer = expm_pauli(&total_spin(PauliAxis::Z, n), cfg.omega * t)?;
    let inner = exp_i_hermitian(&rotating_hamiltonian(cfg, n, with_offset), -t)?;
    outer.matmul(&inner)
}

/// Closed-form state in the lab frame, with no time discretisation.
pub fn analytic_rotating(cfg: &PhysicalConfig, n: SystemSize, psi0: &StateVector, t: f64) -> Result<StateVector> {
    analytic_propagator(cfg, n, t, false)?.apply(psi0)
}

/// `max_t |M(t) - S_x|` with `M(t) = e^{-i w t Sz} (Sx cos wt - Sy sin wt) e^{i w t Sz}`.
pub fn check_m_constancy(cfg: &PhysicalConfig, sample_times: &[f64]) -> Result<f64> {
    if sample_times.is_empty() {
        return Err(SpinError::InvalidArgument("no sample times".into()));
    }
    let (sx, sy, sz) = (spin(PauliAxis::X), spin(PauliAxis::Y), spin(PauliAxis::Z));
    let mut worst: f64 = 0.0;
    for &t in sample_times {
        let (s, co) = (cfg.omega * t).sin_cos();
        let inner = &sx.scale(c(co, 0.0)) - &sy.scale(c(s, 0.0));
        let left = expm_pauli(&sz, -cfg.omega * t)?;
        let right = expm_pauli(&sz, cfg.omega * t)?;
        let m = left.matmul(&inner)?.matmul(&right)?;
        worst = worst.max(m.max_abs_diff(&sx)?);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub max_amplitude_dev: f64,
    pub lab: StateVector,
    pub analytic: StateVector,
    pub steps: usize,
    pub max_norm_drift: f64,
}

pub fn cross_validate(
    cfg: &PhysicalConfig,
    n: SystemSize,
    psi0: &StateVector,
    t_final: f64,
    settings: &IntegrationSettings,
) -> Result<CrossValidation> {
    let lab = integrate_lab_detailed(cfg, n, psi0, t_final, settings, None)?;
    let analytic = analytic_rotating(cfg, n, psi0, t_final)?;
    Ok(CrossValidation {
        max_amplitude_dev: lab.state.max_abs_diff(&analytic)?,
        lab: lab.state,
        analytic,
        steps: lab.steps,
        max_norm_drift: lab.max_norm_drift,
    })
}

/// Full propagator by integrating every basis state (in parallel).
pub fn lab_propagator(
    cfg: &PhysicalConfig,
    n: SystemSize,
    t_final: f64,
    settings: &IntegrationSettings,
) -> Result<ComplexMatrix> {
    let columns = (0..n.dim())
        .into_par_iter()
        .map(|k| integrate_lab(cfg, n, &StateVector::basis(n.dim(), k)?, t_final, settings))
        .collect::<Result<Vec<_>>>()?;
    ComplexMatrix::from_columns(&columns)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionCheck {
    pub duration: f64,
    /// `max |e^{-i B' t} U_lab - U_phi|`
    pub max_abs_dev: f64,
    pub lab: ComplexMatrix,
}

/// Integrates the lab equation over a scheduled evolution slot and compares
/// with the factorised propagator after restoring the reference phase.
pub fn check_evolution(
    cfg: &PhysicalConfig,
    n: SystemSize,
    timing: &TimingSolution,
    settings: &IntegrationSettings,
) -> Result<EvolutionCheck> {
    let t = timing.duration;
    let lab = lab_propagator(cfg, n, t, settings)?.scale(C64::from_polar(1.0, -cfg.b_prime * t));
    let ideal = crate::gates::u_phi(n, timing, cfg)?;
    Ok(EvolutionCheck {
        duration: t,
        max_abs_dev: lab.max_abs_diff(&ideal)?,
        lab,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn n1() -> SystemSize {
        SystemSize::new(1).unwrap()
    }

    fn up() -> StateVector {
        StateVector::basis(2, 0).unwrap()
    }

    #[test]
    fn zero_duration_is_identity() {
        let cfg = PhysicalConfig { b1: 0.1, ..PhysicalConfig::natural_units() };
        let psi = StateVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let out = integrate_lab(&cfg, n1(), &psi, 0.0, &IntegrationSettings::new(0.01)).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn zeeman_eigenstate_only_gains_phase() {
        let cfg = PhysicalConfig::natural_units();
        let t = 3.0;
        let out = integrate_lab(&cfg, n1(), &up(), t, &IntegrationSettings::new(1e-3)).unwrap();
        let want = C64::from_polar(1.0, cfg.gamma * cfg.b0 * t / 2.0);
        assert!((out.amplitudes()[0] - want).norm() < 1e-10);
        assert!(out.amplitudes()[1].norm() < 1e-15);
    }

    #[test]
    fn resonance_solution_matches_factorised_form() {
        let cfg = PhysicalConfig { b1: 0.2, ..PhysicalConfig::natural_units() };
        let t = 1.7;
        let psi = analytic_rotating(&cfg, n1(), &up(), t).unwrap();
        let outer = expm_pauli(&spin(PauliAxis::Z), cfg.gamma * cfg.b0 * t).unwrap();
        let inner = expm_pauli(&spin(PauliAxis::X), cfg.gamma * cfg.b1 * t).unwrap();
        let want = outer.matmul(&inner).unwrap().apply(&up()).unwrap();
        assert!(psi.max_abs_diff(&want).unwrap() < 1e-14);
    }

    #[test]
    fn m_is_constant() {
        let cfg = PhysicalConfig { omega: 1.3, ..PhysicalConfig::natural_units() };
        assert_eq!(check_m_constancy(&cfg, &[0.0]).unwrap(), 0.0);
        let times: Vec<f64> = (0..50).map(|k| k as f64 * 0.2).collect();
        assert!(check_m_constancy(&cfg, &times).unwrap() <= 1e-12);
        let still = PhysicalConfig { omega: 0.0, ..cfg };
        assert_eq!(check_m_constancy(&still, &[1.0, 2.0]).unwrap(), 0.0);
        assert!(check_m_constancy(&cfg, &[]).is_err());
    }

    #[test]
    fn large_steps_are_rejected() {
        let cfg = PhysicalConfig::natural_units();
        let err = integrate_lab(&cfg, n1(), &up(), 1.0, &IntegrationSettings::new(0.5)).unwrap_err();
        assert!(matches!(err, SpinError::Unstable(_)));
    }

    #[test]
    fn rabi_flip() {
        let cfg = PhysicalConfig { b1: 0.05, ..PhysicalConfig::natural_units() };
        let t = PI / (cfg.gamma * cfg.b1);
        let out = integrate_lab(&cfg, n1(), &up(), t, &IntegrationSettings::new(1e-3)).unwrap();
        assert!(out.populations()[0] <= 1e-6);
    }
}
