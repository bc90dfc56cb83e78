//! Experimentally realistic numbers for the gate-based implementation:
//! gate duration, sweep time, toolbox energy scales, and (given a C6
//! coefficient) the blockade radius.
//!
//! Run with: cargo run --release --example rydberg_params

use std::f64::consts::TAU;

use rydsim::rydphys::{
    blockade_radius, c6_for_radius, energy_scales, gate_time, sweep_time, HBAR,
};

fn main() {
    let delta = TAU * 1.2e9; // detuning, rad/s
    let omega_p = TAU * 100e6; // Raman Rabi frequency, rad/s
    let omega_c = TAU * 30e6; // dressing Rabi frequency, rad/s

    let t_gate = gate_time(delta, omega_p).unwrap();
    println!("gate time: {:.1} ns", t_gate * 1e9);

    let tau = sweep_time(4, 2, t_gate).unwrap();
    println!("sweep time (z = 4 sublattices, 2 gates/term): {:.2} us", tau * 1e6);

    let (e, kappa) = energy_scales(1.0, 1.0, tau).unwrap();
    println!(
        "per-unit-phase coupling energy: E/hbar = {:.3e} rad/s ({:.0} kHz)",
        e / HBAR,
        e / HBAR / TAU / 1e3
    );
    println!("per-unit-theta^2 damping rate: {kappa:.3e} 1/s");

    // no built-in atomic database: C6 must come from the user. Here it
    // is chosen to place the blockade radius at 1.4 um and inverted
    // back as a consistency check.
    let c6 = c6_for_radius(delta, omega_c, 1.4e-6).unwrap();
    let r = blockade_radius(delta, omega_c, c6).unwrap();
    println!("C6 = {c6:.3e} rad/s m^6  ->  blockade radius {:.2} um", r * 1e6);
}
