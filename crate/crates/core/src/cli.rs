// Copyright 2026 Spinforge Contributors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: `build`, `schedule`, `verify` and `simulate`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dynamics::{analytic_rotating, integrate_lab_detailed, write_trajectory_csv, IntegrationSettings};
use crate::error::{Result, SpinError};
use crate::gates::{build_gate, GateSpec};
use crate::hamiltonian::{ConfigLayer, PhysicalConfig};
use crate::matrix::{StateVector, C64};
use crate::schedule::{gate_timing_table, ScheduleMode, ScheduleOptions};
use crate::spin::SystemSize;
use crate::verify::{all_gates, verify, FIDELITY_TOL};

pub const CONFIG_ENV: &str = "SPINFORGE_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "spinforge", version, about = "Pulse-level synthesis and verification of spin-qubit gates")]
pub struct Cli {
    #[command(flatten)]
    pub config: ConfigArgs,

    /// Print the full machine-readable result.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Flat TOML file with gamma, b0, b1, omega, j, b_prime.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Use gamma = omega = b0 = 1 as defaults.
    #[arg(long, global = true)]
    pub natural_units: bool,
    /// Gyromagnetic ratio, rad s^-1 T^-1.
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Static field, T.
    #[arg(long, global = true)]
    pub b0: Option<f64>,
    /// Drive amplitude, T.
    #[arg(long, global = true)]
    pub b1: Option<f64>,
    /// Drive frequency, rad s^-1.
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    /// Ising exchange, rad s^-1.
    #[arg(long, global = true)]
    pub j: Option<f64>,
    /// Reference energy offset, rad s^-1.
    #[arg(long = "b-prime", global = true)]
    pub b_prime: Option<f64>,
}

impl ConfigArgs {
    /// Flags over the config file over the defaults.
    pub fn resolve(&self) -> Result<PhysicalConfig> {
        let flags = ConfigLayer {
            gamma: self.gamma,
            b0: self.b0,
            b1: self.b1,
            omega: self.omega,
            j: self.j,
            b_prime: self.b_prime,
        };
        let file = match &self.config {
            Some(path) => ConfigLayer::load(path)?,
            None => ConfigLayer::default(),
        };
        let defaults = if self.natural_units {
            PhysicalConfig::natural_units()
        } else {
            PhysicalConfig::default()
        };
        flags.over(file).resolve(defaults)
    }
}

#[derive(Debug, Clone, Args)]
pub struct ScheduleArgs {
    /// derive-constants or shared-constants.
    #[arg(long, default_value = "derive-constants")]
    pub mode: ScheduleMode,
    /// Largest congruence witness searched.
    #[arg(long, default_value_t = 1000)]
    pub search_bound: i64,
    /// Require clock witness >= ratio * drive witness.
    #[arg(long)]
    pub min_witness_ratio: Option<f64>,
}

impl ScheduleArgs {
    fn options(&self) -> ScheduleOptions {
        ScheduleOptions {
            mode: self.mode,
            search_bound: self.search_bound,
            min_witness_ratio: self.min_witness_ratio,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesise a gate and compare it with its ideal matrix.
    Build {
        gate: String,
        #[command(flatten)]
        schedule: ScheduleArgs,
    },
    /// Print the timing table of a gate.
    Schedule {
        gate: String,
        #[command(flatten)]
        schedule: ScheduleArgs,
        /// Print the table as CSV.
        #[arg(long)]
        csv: bool,
    },
    /// Run the verification checks for a gate or for everything.
    Verify {
        #[arg(default_value = "all")]
        scope: String,
        #[command(flatten)]
        schedule: ScheduleArgs,
        /// Also integrate the lab-frame equation over every evolution slot.
        #[arg(long)]
        oracle: bool,
    },
    /// Integrate the lab-frame Schrodinger equation.
    Simulate {
        /// Number of spins; inferred from --psi0 when omitted.
        #[arg(long)]
        n: Option<usize>,
        /// Bitstring such as `01` (0 = spin up) or an inline state JSON.
        #[arg(long, default_value = "0")]
        psi0: String,
        /// Final time, s.
        #[arg(long = "t-final")]
        t_final: f64,
        /// Step; chosen from the Hamiltonian norm when omitted.
        #[arg(long)]
        dt: Option<f64>,
        /// Write the trajectory as CSV to this path.
        #[arg(long)]
        trajectory: Option<PathBuf>,
        /// Record every k-th step in the trajectory.
        #[arg(long, default_value_t = 1)]
        sample_every: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Infeasible,
    VerificationFailed,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::VerificationFailed => 1,
            Status::Infeasible => 2,
            Status::Error => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandResult {
    pub status: Status,
    pub command: String,
    pub payload: Value,
    pub human_summary: String,
}

impl CommandResult {
    fn from_error(command: &str, err: SpinError) -> Self {
        let status = match err {
            SpinError::Incommensurate(_) | SpinError::Infeasible(_) | SpinError::EmptyConstraints => Status::Infeasible,
            _ => Status::Error,
        };
        Self {
            status,
            command: command.to_string(),
            payload: json!({ "error": err.to_string() }),
            human_summary: format!("{command}: {err}"),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }
}

/// What a command produced: the structured result and the text for stdout.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub result: CommandResult,
    pub stdout: String,
}

pub fn execute(cli: &Cli) -> Outcome {
    let name = match &cli.command {
        Command::Build { .. } => "build",
        Command::Schedule { .. } => "schedule",
        Command::Verify { .. } => "verify",
        Command::Simulate { .. } => "simulate",
    };
    let (result, text) = match run(cli, name) {
        Ok((r, text)) => (r, text),
        Err(e) => (CommandResult::from_error(name, e), None),
    };
    let stdout = if cli.json {
        serde_json::to_string_pretty(&result).expect("result serializes")
    } else {
        text.unwrap_or_else(|| result.human_summary.clone())
    };
    Outcome { result, stdout }
}

fn ok(command: &str, payload: Value, summary: String) -> CommandResult {
    CommandResult {
        status: Status::Ok,
        command: command.to_string(),
        payload,
        human_summary: summary,
    }
}

fn run(cli: &Cli, name: &str) -> Result<(CommandResult, Option<String>)> {
    let cfg = cli.config.resolve()?;
    match &cli.command {
        Command::Build { gate, schedule } => {
            let spec: GateSpec = gate.parse()?;
            let b = build_gate(&spec, &cfg, &schedule.options())?;
            let equivalent = b.report.is_equivalent(FIDELITY_TOL) && b.unitarity_deviation <= crate::matrix::EXACT_TOL;
            let summary = format!(
                "{}: F = {:.15}, global phase = {:.12} rad, max dev = {:.3e}, T = {:e} s",
                spec, b.report.fidelity, b.report.global_phase_rad, b.report.max_abs_dev, b.table.total.duration
            );
            let payload = json!({
                "gate": spec.label(),
                "pulse": value(&b.unitary),
                "ideal": value(&b.ideal),
                "report": value(&b.report),
                "unitarity_deviation": b.unitarity_deviation,
                "total_duration": b.table.total.duration,
                "program": value(&b.program),
            });
            let mut r = ok(name, payload, summary);
            if !equivalent {
                r.status = Status::VerificationFailed;
            }
            Ok((r, None))
        }
        Command::Schedule { gate, schedule, csv } => {
            let spec: GateSpec = gate.parse()?;
            let table = gate_timing_table(&spec, &cfg, &schedule.options())?;
            let mut lines = vec![format!("{} ({})", table.gate, table.mode)];
            for t in &table.timings {
                lines.push(format!("  {:<4} {:>22e} s  {}", t.solution.label, t.solution.duration, t.component));
            }
            for a in table.aggregates.iter().chain(std::iter::once(&table.total)) {
                lines.push(format!("  {:<4} {:>22e} s  = {}", a.label, a.duration, a.formula()));
            }
            if !table.shared_constants.feasible {
                lines.push(format!("  note: {}", table.shared_constants.note));
            }
            for w in &table.warnings {
                lines.push(format!("  warning: {w}"));
            }
            let text = if *csv { Some(table.to_csv()?) } else { None };
            Ok((ok(name, value(&table), lines.join("\n")), text))
        }
        Command::Verify { scope, schedule, oracle } => {
            let (gates, dynamics) = if scope == "all" {
                (all_gates(), true)
            } else {
                (vec![scope.parse::<GateSpec>()?], false)
            };
            let report = verify(&gates, &cfg, &schedule.options(), *oracle, dynamics)?;
            let failed = report.checks.iter().filter(|c| !c.passed).count();
            let mut lines: Vec<String> = report
                .checks
                .iter()
                .map(|c| {
                    let tag = if c.finding { "NOTE" } else if c.passed { "PASS" } else { "FAIL" };
                    match c.value {
                        Some(v) => format!("{tag} {}: {v:.3e} ({})", c.name, c.detail),
                        None => format!("{tag} {}: {}", c.name, c.detail),
                    }
                })
                .collect();
            lines.push(format!("{} checks, {} failed", report.checks.len(), failed));
            let mut r = ok(name, value(&report), lines.join("\n"));
            if !report.passed {
                r.status = Status::VerificationFailed;
            }
            Ok((r, None))
        }
        Command::Simulate { n, psi0, t_final, dt, trajectory, sample_every } => {
            let psi0 = parse_state(psi0)?;
            let size = match n {
                Some(n) => SystemSize::new(*n)?,
                None => SystemSize::new(psi0.dim().trailing_zeros() as usize)?,
            };
            let settings = match dt {
                Some(dt) => IntegrationSettings::new(*dt),
                None => IntegrationSettings::auto(&cfg, size, *t_final),
            };
            let sample = trajectory.as_ref().map(|_| *sample_every);
            let run = integrate_lab_detailed(&cfg, size, &psi0, *t_final, &settings, sample)?;
            if let Some(path) = trajectory {
                let file = std::fs::File::create(path)
                    .map_err(|e| SpinError::InvalidArgument(format!("{}: {e}", path.display())))?;
                write_trajectory_csv(&run.trajectory, file)?;
            }
            let analytic = analytic_rotating(&cfg, size, &psi0, *t_final)?;
            let dev = run.state.max_abs_diff(&analytic)?;
            let populations = run.state.populations();
            let summary = format!(
                "t = {:e} s, {} steps of {:e} s; populations {:?}; |lab - closed form| = {dev:.3e}",
                t_final, run.steps, settings.dt, populations
            );
            let payload = json!({
                "final_state": value(&run.state),
                "populations": populations,
                "steps": run.steps,
                "dt": settings.dt,
                "max_norm_drift": run.max_norm_drift,
                "analytic_state": value(&analytic),
                "analytic_max_dev": dev,
            });
            Ok((ok(name, payload, summary), None))
        }
    }
}

/// Bitstring (`"01"`) or inline JSON `{"dim": 2, "amplitudes": [[re, im], ...]}`.
pub fn parse_state(text: &str) -> Result<StateVector> {
    let text = text.trim();
    if text.starts_with('{') {
        let state: StateVector = serde_json::from_str(text).map_err(|e| SpinError::Parse(e.to_string()))?;
        if !state.is_normalized(1e-12) {
            return Err(SpinError::InvalidArgument("initial state is not normalised".into()));
        }
        return Ok(state);
    }
    if let Some(list) = text.strip_prefix('[') {
        let amps: Vec<[f64; 2]> = serde_json::from_str(&format!("[{list}"))
            .map_err(|e| SpinError::Parse(e.to_string()))?;
        return StateVector::new(amps.iter().map(|[re, im]| C64::new(*re, *im)).collect());
    }
    StateVector::from_bits(text)
}

fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("value serializes")
}
