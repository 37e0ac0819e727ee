// Copyright 2026 Spinforge Contributors
// SPDX-License-Identifier: Apache-2.0

//! Lab-frame and rotating-frame spin Hamiltonians (hbar = 1).
//!
//! Exchange is the Ising truncation `J sum_{i<j} S_zi S_zj` with one shared
//! `J` for every pair. The `b_prime` constant only enters the rotating-frame
//! operator, where it shifts the reference energy.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpinError};
use crate::matrix::{c, ComplexMatrix, C64};
use crate::spin::{ising_sum, total_spin, PauliAxis, SystemSize};

/// Free-electron gyromagnetic ratio in rad s^-1 T^-1.
pub const ELECTRON_GAMMA: f64 = 1.76085963e11;

/// Relative tolerance of the resonance predicate.
pub const RESONANCE_TOL: f64 = 1e-9;

/// Above this `b1 / b0` ratio the drive is no longer weak compared to the Zeeman field.
pub const WEAK_DRIVE_RATIO: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConfig {
    /// rad s^-1 T^-1
    pub gamma: f64,
    /// Static Zeeman field, tesla.
    pub b0: f64,
    /// Rotating drive amplitude, tesla.
    pub b1: f64,
    /// Drive angular frequency, rad s^-1.
    pub omega: f64,
    /// Ising exchange, rad s^-1.
    #[serde(rename = "j")]
    pub j_coupling: f64,
    /// Reference-energy offset, rad s^-1.
    pub b_prime: f64,
}

impl Default for PhysicalConfig {
    fn default() -> Self {
        Self {
            gamma: ELECTRON_GAMMA,
            b0: 1.0,
            b1: 0.0,
            omega: ELECTRON_GAMMA,
            j_coupling: 0.0,
            b_prime: 0.0,
        }
    }
}

impl PhysicalConfig {
    /// `gamma = omega = b0 = 1`, every other constant zero.
    pub fn natural_units() -> Self {
        Self {
            gamma: 1.0,
            b0: 1.0,
            b1: 0.0,
            omega: 1.0,
            j_coupling: 0.0,
            b_prime: 0.0,
        }
    }

    pub fn at_resonance(&self) -> bool {
        (self.omega - self.gamma * self.b0).abs() <= RESONANCE_TOL * self.omega.abs()
    }

    /// Detuning `gamma b0 - omega`.
    pub fn detuning(&self) -> f64 {
        self.gamma * self.b0 - self.omega
    }

    pub fn require_resonance(&self) -> Result<()> {
        if self.at_resonance() {
            Ok(())
        } else {
            Err(SpinError::OffResonance {
                omega: self.omega,
                larmor: self.gamma * self.b0,
            })
        }
    }

    /// Checks the hard invariants and returns soft warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let fields = [
            ("gamma", self.gamma),
            ("b0", self.b0),
            ("b1", self.b1),
            ("omega", self.omega),
            ("j", self.j_coupling),
            ("b_prime", self.b_prime),
        ];
        for (name, value) in fields {
            if !value.is_finite() || value < 0.0 {
                return Err(SpinError::InvalidConfig(format!("{name} = {value} must be finite and >= 0")));
            }
        }
        if self.b1 > self.b0 {
            return Err(SpinError::InvalidConfig(format!(
                "drive amplitude b1 = {} exceeds the static field b0 = {}",
                self.b1, self.b0
            )));
        }
        let mut warnings = Vec::new();
        if self.b1 > WEAK_DRIVE_RATIO * self.b0 {
            warnings.push(format!(
                "b1/b0 = {:.3} is not small; the drive is not weak compared to the Zeeman field",
                self.b1 / self.b0
            ));
        }
        if !self.at_resonance() {
            warnings.push(format!("off resonance by {:e} rad/s", self.detuning()));
        }
        Ok(warnings)
    }
}

/// Field that puts the spins on resonance with a drive at `omega`.
pub fn resonance_field(omega: f64, gamma: f64) -> Result<f64> {
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(SpinError::InvalidConfig(format!("gamma = {gamma} must be positive")));
    }
    Ok(omega / gamma)
}

/// Lab-frame Hamiltonian with its time-independent and drive parts split out.
#[derive(Debug, Clone)]
pub struct LabHamiltonian {
    omega: f64,
    static_part: ComplexMatrix,
    drive_cos: ComplexMatrix,
    drive_sin: ComplexMatrix,
}

impl LabHamiltonian {
    pub fn new(cfg: &PhysicalConfig, n: SystemSize) -> Self {
        let sz = total_spin(PauliAxis::Z, n);
        let sx = total_spin(PauliAxis::X, n);
        let sy = total_spin(PauliAxis::Y, n);
        let zeeman = sz.scale(c(-cfg.gamma * cfg.b0, 0.0));
        let exchange = ising_sum(n).scale(c(cfg.j_coupling, 0.0));
        Self {
            omega: cfg.omega,
            static_part: &zeeman + &exchange,
            drive_cos: sx.scale(c(-cfg.gamma * cfg.b1, 0.0)),
            drive_sin: sy.scale(c(cfg.gamma * cfg.b1, 0.0)),
        }
    }

    pub fn at(&self, t: f64) -> ComplexMatrix {
        let (s, co) = (self.omega * t).sin_cos();
        &(&self.static_part + &self.drive_cos.scale(c(co, 0.0))) + &self.drive_sin.scale(c(s, 0.0))
    }

    /// `H(t) v` without forming `H(t)`.
    pub fn apply(&self, t: f64, v: &[C64]) -> Vec<C64> {
        let (s, co) = (self.omega * t).sin_cos();
        self.static_part
            .rows()
            .zip(self.drive_cos.rows())
            .zip(self.drive_sin.rows())
            .map(|((a, b), d)| {
                let mut acc = [C64::new(0.0, 0.0); 3];
                for (k, x) in v.iter().enumerate() {
                    acc[0] += a[k] * x;
                    acc[1] += b[k] * x;
                    acc[2] += d[k] * x;
                }
                acc[0] + acc[1] * co + acc[2] * s
            })
            .collect()
    }

    /// Drive contribution `-gamma b1 (cos(wt) sum S_x - sin(wt) sum S_y)` alone.
    pub fn drive_at(&self, t: f64) -> ComplexMatrix {
        let (s, co) = (self.omega * t).sin_cos();
        &self.drive_cos.scale(c(co, 0.0)) + &self.drive_sin.scale(c(s, 0.0))
    }

    /// Upper bound on the spectral radius of `H(t)` over all `t`.
    pub fn norm_bound(&self) -> f64 {
        let row_sum = |m: &ComplexMatrix| {
            m.rows()
                .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
                .fold(0.0, f64::max)
        };
        row_sum(&self.static_part) + row_sum(&self.drive_cos) + row_sum(&self.drive_sin)
    }
}

/// `-gamma [b0 sum S_z + b1 (cos(wt) sum S_x - sin(wt) sum S_y)] + J sum S_z S_z`.
pub fn lab_hamiltonian(cfg: &PhysicalConfig, n: SystemSize, t: f64) -> ComplexMatrix {
    LabHamiltonian::new(cfg, n).at(t)
}

/// Rotating-frame Hamiltonian
/// `-(gamma b0 - omega) sum S_z - gamma b1 sum S_x + J sum S_z S_z (+ b' I)`.
pub fn rotating_hamiltonian(cfg: &PhysicalConfig, n: SystemSize, with_offset: bool) -> ComplexMatrix {
    let detuning = if cfg.at_resonance() { 0.0 } else { cfg.detuning() };
    let sz = total_spin(PauliAxis::Z, n).scale(c(-detuning, 0.0));
    let sx = total_spin(PauliAxis::X, n).scale(c(-cfg.gamma * cfg.b1, 0.0));
    let exchange = ising_sum(n).scale(c(cfg.j_coupling, 0.0));
    let mut h = &(&sz + &sx) + &exchange;
    if with_offset {
        let offset = ComplexMatrix::identity(n.dim())
            .expect("valid dim")
            .scale(c(cfg.b_prime, 0.0));
        h = &h + &offset;
    }
    h
}

/// One layer of configuration values; unset keys fall through to the layer below.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub gamma: Option<f64>,
    pub b0: Option<f64>,
    pub b1: Option<f64>,
    pub omega: Option<f64>,
    pub j: Option<f64>,
    pub b_prime: Option<f64>,
}

impl ConfigLayer {
    /// Parses a flat `key = value` file (TOML syntax, `#` comments).
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| SpinError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SpinError::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Values in `self` win over values in `lower`.
    pub fn over(self, lower: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            gamma: self.gamma.or(lower.gamma),
            b0: self.b0.or(lower.b0),
            b1: self.b1.or(lower.b1),
            omega: self.omega.or(lower.omega),
            j: self.j.or(lower.j),
            b_prime: self.b_prime.or(lower.b_prime),
        }
    }

    /// Fills unset keys from `defaults`. When exactly one of `b0` and `omega`
    /// is given, the other is set to satisfy the resonance condition.
    pub fn resolve(self, defaults: PhysicalConfig) -> Result<PhysicalConfig> {
        let gamma = self.gamma.unwrap_or(defaults.gamma);
        let (b0, omega) = match (self.b0, self.omega) {
            (Some(b0), Some(omega)) => (b0, omega),
            (Some(b0), None) => (b0, gamma * b0),
            (None, Some(omega)) => (resonance_field(omega, gamma)?, omega),
            (None, None) if self.gamma.is_some() => (defaults.b0, gamma * defaults.b0),
            (None, None) => (defaults.b0, defaults.omega),
        };
        let cfg = PhysicalConfig {
            gamma,
            b0,
            b1: self.b1.unwrap_or(defaults.b1),
            omega,
            j_coupling: self.j.unwrap_or(defaults.j_coupling),
            b_prime: self.b_prime.unwrap_or(defaults.b_prime),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{expm_pauli, EXACT_TOL};
    use crate::spin::{embed_pair_zz, embed_single, SiteIndex};

    fn size(n: usize) -> SystemSize {
        SystemSize::new(n).unwrap()
    }

    #[test]
    fn resonance_field_examples() {
        assert_eq!(resonance_field(ELECTRON_GAMMA, ELECTRON_GAMMA).unwrap(), 1.0);
        assert_eq!(resonance_field(2.0 * 3.5, 3.5).unwrap(), 2.0);
        assert_eq!(resonance_field(0.0, 3.5).unwrap(), 0.0);
        assert!(resonance_field(1.0, 0.0).is_err());
    }

    #[test]
    fn zeeman_only_single_spin() {
        let cfg = PhysicalConfig {
            b0: 0.3,
            ..PhysicalConfig::natural_units()
        };
        let h = lab_hamiltonian(&cfg, size(1), 1.234);
        let expected = ComplexMatrix::diagonal(&[c(-0.15, 0.0), c(0.15, 0.0)]).unwrap();
        assert!(h.max_abs_diff(&expected).unwrap() < EXACT_TOL);
    }

    #[test]
    fn lab_hamiltonian_at_time_zero() {
        let cfg = PhysicalConfig {
            gamma: 2.0,
            b0: 1.5,
            b1: 0.25,
            omega: 3.0,
            ..PhysicalConfig::natural_units()
        };
        let s1 = SiteIndex::new(1, 1).unwrap();
        let expected = (&embed_single(PauliAxis::Z, s1).scale(c(1.5, 0.0))
            + &embed_single(PauliAxis::X, s1).scale(c(0.25, 0.0)))
            .scale(c(-2.0, 0.0));
        let h = lab_hamiltonian(&cfg, size(1), 0.0);
        assert!(h.max_abs_diff(&expected).unwrap() < EXACT_TOL);
    }

    #[test]
    fn pure_ising_pair() {
        let cfg = PhysicalConfig {
            b0: 0.0,
            omega: 0.0,
            j_coupling: 1.0,
            ..PhysicalConfig::natural_units()
        };
        let expected = ComplexMatrix::diagonal(&[c(0.25, 0.0), c(-0.25, 0.0), c(-0.25, 0.0), c(0.25, 0.0)]).unwrap();
        assert_eq!(lab_hamiltonian(&cfg, size(2), 0.7), expected);
    }

    #[test]
    fn rotating_frame_examples() {
        let cfg = PhysicalConfig {
            j_coupling: 0.8,
            ..PhysicalConfig::natural_units()
        };
        let h = rotating_hamiltonian(&cfg, size(2), false);
        let expected = embed_pair_zz(SiteIndex::new(1, 2).unwrap(), SiteIndex::new(2, 2).unwrap())
            .unwrap()
            .scale(c(0.8, 0.0));
        assert!(h.max_abs_diff(&expected).unwrap() < EXACT_TOL);

        let detuned = PhysicalConfig {
            b0: 1.2,
            b1: 0.1,
            ..PhysicalConfig::natural_units()
        };
        let delta = detuned.detuning();
        let s1 = SiteIndex::new(1, 1).unwrap();
        let expected = &embed_single(PauliAxis::Z, s1).scale(c(-delta, 0.0))
            + &embed_single(PauliAxis::X, s1).scale(c(-0.1, 0.0));
        let h = rotating_hamiltonian(&detuned, size(1), false);
        assert!(h.max_abs_diff(&expected).unwrap() < EXACT_TOL);
    }

    #[test]
    fn four_spin_offset_diagonal_by_brute_force() {
        let cfg = PhysicalConfig {
            j_coupling: 1.0,
            b_prime: 1.0,
            ..PhysicalConfig::natural_units()
        };
        let h = rotating_hamiltonian(&cfg, size(4), true);
        for b in 0..16usize {
            let spins: Vec<f64> = (0..4).map(|k| if b >> (3 - k) & 1 == 0 { 0.5 } else { -0.5 }).collect();
            let mut expected = 1.0;
            for i in 0..4 {
                for j in i + 1..4 {
                    expected += spins[i] * spins[j];
                }
            }
            assert!((h.get(b, b) - c(expected, 0.0)).norm() < EXACT_TOL);
        }
        assert!((h.get(0, 0).re - (6.0 * 0.25 + 1.0)).abs() < EXACT_TOL);
        assert!(h.is_diagonal(0.0));
    }

    #[test]
    fn lab_hamiltonian_is_hermitian_on_grid() {
        let cfg = PhysicalConfig {
            b1: 0.3,
            j_coupling: 0.4,
            ..PhysicalConfig::natural_units()
        };
        for n in 1..=4 {
            let lab = LabHamiltonian::new(&cfg, size(n));
            for k in 0..40 {
                assert!(lab.at(0.37 * k as f64).is_hermitian(1e-15));
            }
        }
    }

    #[test]
    fn drive_is_static_in_rotating_frame() {
        let cfg = PhysicalConfig {
            b1: 0.3,
            omega: 1.7,
            b0: 1.7,
            ..PhysicalConfig::natural_units()
        };
        for n in 1..=3 {
            let sz = total_spin(PauliAxis::Z, size(n));
            let lab = LabHamiltonian::new(&cfg, size(n));
            let reference = lab.drive_at(0.0);
            for k in 0..25 {
                let t = 0.41 * k as f64;
                let left = expm_pauli(&sz, -cfg.omega * t).unwrap();
                let right = expm_pauli(&sz, cfg.omega * t).unwrap();
                let rotated = &(&left * &lab.drive_at(t)) * &right;
                assert!(rotated.max_abs_diff(&reference).unwrap() < EXACT_TOL);
            }
        }
    }

    #[test]
    fn drive_breaks_total_sz_symmetry() {
        let mut cfg = PhysicalConfig {
            j_coupling: 0.5,
            ..PhysicalConfig::natural_units()
        };
        let sz = total_spin(PauliAxis::Z, size(3));
        let zero = ComplexMatrix::zeros(8).unwrap();
        let h = rotating_hamiltonian(&cfg, size(3), true);
        assert!(h.commutator(&sz).unwrap().max_abs_diff(&zero).unwrap() < EXACT_TOL);
        cfg.b1 = 0.2;
        let h = rotating_hamiltonian(&cfg, size(3), true);
        assert!(h.commutator(&sz).unwrap().max_abs_diff(&zero).unwrap() > 0.01);
    }

    #[test]
    fn validation() {
        assert!(PhysicalConfig::natural_units().validate().unwrap().is_empty());
        let strong = PhysicalConfig {
            b1: 1.5,
            ..PhysicalConfig::natural_units()
        };
        assert!(matches!(strong.validate(), Err(SpinError::InvalidConfig(_))));
        let moderate = PhysicalConfig {
            b1: 0.5,
            ..PhysicalConfig::natural_units()
        };
        assert_eq!(moderate.validate().unwrap().len(), 1);
        let negative = PhysicalConfig {
            j_coupling: -1.0,
            ..PhysicalConfig::natural_units()
        };
        assert!(negative.validate().is_err());
    }

    #[test]
    fn layered_config_resolution() {
        let file = ConfigLayer::parse("# bench\nomega = 2.0\nj = 0.4\nb_prime = 0.1\n").unwrap();
        let flags = ConfigLayer {
            j: Some(0.5),
            ..Default::default()
        };
        let cfg = flags.over(file).resolve(PhysicalConfig::natural_units()).unwrap();
        assert_eq!(cfg.j_coupling, 0.5);
        assert_eq!(cfg.b_prime, 0.1);
        assert_eq!(cfg.omega, 2.0);
        assert_eq!(cfg.b0, 2.0);
        assert!(cfg.at_resonance());
        assert!(ConfigLayer::parse("jay = 1.0").is_err());
    }
}
