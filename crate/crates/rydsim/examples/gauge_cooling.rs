//! Dissipative ground-state cooling of the U(1) lattice gauge theory
//! at the Rokhsar-Kivelson point on a 2x2x1 lattice (12 spins).
//!
//! Stage one pumps electric charges off the octahedra (all-down start,
//! charge density -> 0). The inset-style run starts from a single
//! dimer covering and condenses into the equal superposition of the
//! coverings reachable by plaquette flips (fidelity -> 1).
//!
//! Run with: cargo run --release --example gauge_cooling

use rydsim::gauge::{
    cool_gauge, enumerate_dimer_coverings, flip_plaquette, reference_flippable_covering,
    GaugeModel, GaugeStart,
};
use rydsim::lattice::build_cubic;

fn main() {
    let lattice = build_cubic(2, 2, 1).unwrap();
    let coverings = enumerate_dimer_coverings(&lattice).unwrap();
    let frozen = coverings
        .iter()
        .filter(|&&c| lattice.plaquettes.iter().all(|p| flip_plaquette(c, p).is_none()))
        .count();
    println!(
        "2x2x1 lattice: {} links, {} dimer coverings ({} frozen, {} flippable)",
        lattice.link_count,
        coverings.len(),
        frozen,
        coverings.len() - frozen
    );

    // charge cooling from the fully polarized state
    let mut model = GaugeModel::rk_point(build_cubic(2, 2, 1).unwrap());
    model.constraint_warmup = usize::MAX; // constraint stage only
    let run = cool_gauge(&model, GaugeStart::AllDown, 60, 100, 5).unwrap();
    println!("\ncharge cooling (all-down start, 100 trajectories):");
    for s in (0..60).step_by(6) {
        println!(
            "  sweep {s:>3}: charge density {:.5}",
            run.series.charge_mean[s]
        );
    }

    // RK condensation from a flippable covering
    let model = GaugeModel::rk_point(build_cubic(2, 2, 1).unwrap());
    let start = reference_flippable_covering(&model.lattice).unwrap();
    let run = cool_gauge(&model, GaugeStart::Covering(start), 8, 100, 6).unwrap();
    println!("\nRK condensation (covering start {start:#014b}):");
    for s in 0..8 {
        println!(
            "  sweep {s}: charge {:.1e}, attractor fidelity {:.5}",
            run.series.charge_mean[s], run.series.attractor_fidelity_mean[s]
        );
    }
}
