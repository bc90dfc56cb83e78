//! Dissipative cooling of the toric code: anyon density per sweep for
//! perfect gates and for imperfect gates (|Q| = 0.1), plus a walker
//! run at a lattice size far beyond dense reach.
//!
//! With perfect gates the density decays to zero (dark state = ground
//! state); gate errors heat the system to a stationary plateau with a
//! finite effective temperature.
//!
//! Run with: cargo run --release --example toric_cooling

use rydsim::gates::ErrorModel;
use rydsim::lattice::build_toric;
use rydsim::toric::{
    cool_toric, effective_temperature, Engine, ToricModel, P_HEAT_Q01,
};

fn main() {
    let sweeps = 30;
    let trajectories = 300;

    let perfect = ToricModel::new(build_toric(2).unwrap());
    let run_p = cool_toric(&perfect, sweeps, trajectories, Engine::Dense, 3).unwrap();

    let mut faulty = ToricModel::new(build_toric(2).unwrap());
    faulty.error = ErrorModel::scaled_z(0.1);
    let run_f = cool_toric(&faulty, sweeps, trajectories, Engine::Dense, 3).unwrap();

    println!("L=2 dense, {trajectories} trajectories");
    println!("sweep   perfect    |Q|=0.1");
    for s in (0..sweeps).step_by(3) {
        println!(
            "{s:>5}   {:.5}    {:.5}",
            run_p.series.mean[s], run_f.series.mean[s]
        );
    }
    let tail = &run_f.series.mean[3 * sweeps / 4..];
    let plateau = tail.iter().sum::<f64>() / tail.len() as f64;
    match effective_temperature(plateau, faulty.e0) {
        Ok(t) => println!("plateau density {plateau:.4} -> T_eff = {t:.4} E0/k_B"),
        Err(_) => println!("no finite plateau"),
    }

    // stochastic walker engine at L = 16 (512 spins): same dynamics,
    // classical anyon configurations instead of amplitudes
    let mut big = ToricModel::new(build_toric(16).unwrap());
    big.p_heat = P_HEAT_Q01;
    let run_w = cool_toric(&big, 40, 200, Engine::Walker, 4).unwrap();
    println!(
        "\nL=16 walker with heating p={P_HEAT_Q01}: initial {:.4}, final {:.4} \
         (plaquette {:.4}, vertex {:.4})",
        run_w.series.mean[0],
        run_w.series.mean.last().unwrap(),
        run_w.series.mean_plaquette.last().unwrap(),
        run_w.series.mean_vertex.last().unwrap()
    );
}
