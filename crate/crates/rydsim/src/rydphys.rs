//! Closed-form calculator for experimentally realistic numbers: gate
//! duration, blockade radius, toolbox energy scales, and the sweep-time
//! estimate behind the stroboscopic schedule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Physical parameter set. All frequencies are angular (rad/s); C6 is
/// a required input in rad/s·m^6 — there is no built-in atomic
/// database.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RydbergParams {
    /// Raman pulse Rabi frequency Omega_p (rad/s).
    pub omega_p: f64,
    /// Dressing Rabi frequency Omega_c (rad/s).
    pub omega_c: f64,
    /// Detuning Delta (rad/s).
    pub delta: f64,
    /// Van der Waals coefficient (rad/s · m^6).
    pub c6: f64,
    /// Step time tau (s).
    pub tau: f64,
    /// Number of sublattices executed sequentially per sweep.
    pub z: usize,
    /// Many-body gates per term per sublattice pass.
    pub gates_per_term: usize,
}

fn positive(value: f64, name: &str) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {value}")))
    }
}

/// Duration of the many-body gate, limited by the Raman pulse:
/// T_gate = 16 pi Delta / (3 Omega_p^2).
pub fn gate_time(delta: f64, omega_p: f64) -> Result<f64> {
    if delta < 0.0 || !delta.is_finite() {
        return Err(Error::Domain(format!("delta must be nonnegative, got {delta}")));
    }
    positive(omega_p, "omega_p")?;
    Ok(16.0 * std::f64::consts::PI * delta / (3.0 * omega_p * omega_p))
}

/// Radius where the dimensionless interaction V = 4 Delta C6 /
/// (Omega_c^2 r^6) equals one: r = (4 Delta C6 / Omega_c^2)^(1/6).
pub fn blockade_radius(delta: f64, omega_c: f64, c6: f64) -> Result<f64> {
    positive(delta, "delta")?;
    positive(omega_c, "omega_c")?;
    positive(c6, "c6")?;
    Ok((4.0 * delta * c6 / (omega_c * omega_c)).powf(1.0 / 6.0))
}

/// Inverse of `blockade_radius`: the C6 that yields a given radius.
pub fn c6_for_radius(delta: f64, omega_c: f64, radius: f64) -> Result<f64> {
    positive(delta, "delta")?;
    positive(omega_c, "omega_c")?;
    positive(radius, "radius")?;
    Ok(radius.powi(6) * omega_c * omega_c / (4.0 * delta))
}

/// Coupling energy E = hbar phi / tau (J) and damping rate
/// kappa = theta^2 / tau (1/s) of a toolbox step.
pub fn energy_scales(phi: f64, theta: f64, tau: f64) -> Result<(f64, f64)> {
    positive(tau, "tau")?;
    Ok((HBAR * phi / tau, theta * theta / tau))
}

/// Sweep-time estimate tau = overhead · z · gates · T_gate; ancillary
/// single-qubit pulses are folded into the overhead factor
/// (default 1.2 via `sweep_time`).
pub fn sweep_time_with_overhead(
    z: usize,
    gates_per_term: usize,
    t_gate: f64,
    overhead: f64,
) -> Result<f64> {
    if z == 0 || gates_per_term == 0 {
        return Err(Error::Domain("z and gate count must be positive".into()));
    }
    positive(t_gate, "t_gate")?;
    positive(overhead, "overhead")?;
    Ok(overhead * z as f64 * gates_per_term as f64 * t_gate)
}

pub fn sweep_time(z: usize, gates_per_term: usize, t_gate: f64) -> Result<f64> {
    sweep_time_with_overhead(z, gates_per_term, t_gate, 1.2)
}

/// Full parameter report for the CLI, with unit annotations in the
/// field names.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamReport {
    pub gate_time_s: f64,
    pub blockade_radius_m: f64,
    pub sweep_time_s: f64,
    pub coupling_energy_j_per_unit_phase: f64,
    pub damping_rate_per_s_per_unit_theta_sq: f64,
}

pub fn report(p: &RydbergParams) -> Result<ParamReport> {
    let t_gate = gate_time(p.delta, p.omega_p)?;
    let (e, k) = energy_scales(1.0, 1.0, p.tau)?;
    Ok(ParamReport {
        gate_time_s: t_gate,
        blockade_radius_m: blockade_radius(p.delta, p.omega_c, p.c6)?,
        sweep_time_s: sweep_time(p.z, p.gates_per_term, t_gate)?,
        coupling_energy_j_per_unit_phase: e,
        damping_rate_per_s_per_unit_theta_sq: k,
    })
}
