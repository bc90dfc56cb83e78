//! The elementary toolbox: mapping a many-body eigenvalue onto a
//! control qubit, writing a phase, and undoing the mapping.
//!
//! Demonstrates that the sequence G, exp(i phi sigma_c^z), G acts on
//! the system as exp(i phi A_p) with A_p = XXXX, leaving the control
//! in |0>, and prints the serialized gate sequence.
//!
//! Run with: cargo run --release --example gate_toolbox

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rydsim::gates::{coherent_step, mapping_g, ErrorModel};
use rydsim::pauli::{Pauli, PauliString};
use rydsim::statevec::StateVector;

fn main() {
    let n = 4; // four system spins, control at index 4
    let region = PauliString::from_sites(
        n + 1,
        &[(0, Pauli::X), (1, Pauli::X), (2, Pauli::X), (3, Pauli::X)],
    );
    println!("mapping sequence for A_p = {region}:");
    println!("{}", mapping_g(n, &region).unwrap().serialize());

    // |0000> is an equal mix of the +1/-1 eigenspaces of XXXX, so the
    // step must imprint cos(phi) +/- i sin(phi) phases per branch
    let phi = 0.3;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut state = StateVector::basis(n + 1, 0);
    coherent_step(&mut state, n, &region, phi, &ErrorModel::disabled(), &mut rng).unwrap();

    // reference: exp(i phi XXXX)|0000> = cos(phi)|0000> + i sin(phi)|1111>
    let a0 = state.amplitudes()[0];
    let a15 = state.amplitudes()[0b1111];
    println!("after exp(i phi A_p) with phi = {phi}:");
    println!("  <0000|psi> = {a0:.6}   (expected {:.6})", phi.cos());
    println!(
        "  <1111|psi> = {a15:.6}   (expected {:.6})",
        Complex64::new(0.0, phi.sin())
    );
    let control_weight: f64 = state
        .amplitudes()
        .iter()
        .skip(1 << n)
        .map(|a| a.norm_sqr())
        .sum();
    println!("  control |1> weight after the step: {control_weight:.2e}");
}
