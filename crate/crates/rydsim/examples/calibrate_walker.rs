//! Calibrates the walker engine's heating probability against the
//! dense engine's gate-error plateau.
//!
//! The dense engine models gate errors microscopically (an extra
//! controlled phase e^{i phi Q} on the faulty branch); the walker
//! engine represents the same physics as a per-cell anyon-pair
//! creation probability per sweep. This example measures the dense
//! plateau density at |Q| = 0.1 on an L=2 lattice, then scans the
//! walker's p_heat for the value whose plateau matches. The matched
//! value is frozen as `toric::P_HEAT_Q01`.
//!
//! Run with: cargo run --release --example calibrate_walker

use rydsim::gates::ErrorModel;
use rydsim::lattice::build_toric;
use rydsim::toric::{cool_toric, Engine, ToricModel, P_HEAT_Q01};

fn plateau(model: &ToricModel, engine: Engine, sweeps: usize, traj: usize, seed: u64) -> f64 {
    let run = cool_toric(model, sweeps, traj, engine, seed).unwrap();
    let tail = &run.series.mean[sweeps / 2..];
    tail.iter().sum::<f64>() / tail.len() as f64
}

fn main() {
    let sweeps = 40;
    let traj = 400;

    let mut dense_model = ToricModel::new(build_toric(2).unwrap());
    dense_model.error = ErrorModel::scaled_z(0.1);
    let dense_plateau = plateau(&dense_model, Engine::Dense, sweeps, traj, 11);
    println!("dense plateau (|Q| = 0.1): {dense_plateau:.5}");

    println!("walker p_heat scan:");
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=20 {
        let p = 0.01 + 0.01 * i as f64;
        let mut walker_model = ToricModel::new(build_toric(2).unwrap());
        walker_model.p_heat = p;
        let w = plateau(&walker_model, Engine::Walker, sweeps, traj, 12);
        let miss = (w - dense_plateau).abs();
        if miss < best.0 {
            best = (miss, p);
        }
        println!("  p_heat = {p:.4} -> plateau {w:.5}");
    }
    println!("best match: p_heat = {:.4} (|mismatch| = {:.5})", best.1, best.0);
    println!("frozen constant P_HEAT_Q01 = {P_HEAT_Q01}");
}
