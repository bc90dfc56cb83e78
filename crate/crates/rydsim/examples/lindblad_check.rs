//! Small-parameter reduction of the dissipative step: the exact gate
//! channel approaches the Lindblad generator with defect o(theta^3).
//!
//! For each theta the defect || channel(rho) - rho - tau L(rho) || is
//! measured on a random density matrix; the fitted log-log slope
//! should exceed 3 (the theta^2-scaled generator leaves a better-than-
//! cubic remainder).
//!
//! Run with: cargo run --release --example lindblad_check

use rydsim::channels::{verify_small_parameter_reduction, JumpOperatorSpec};
use rydsim::pauli::Pauli;

fn main() {
    let spec =
        JumpOperatorSpec::standard(4, 4, vec![0, 1, 2, 3], Pauli::X, Pauli::Z, 0.2).unwrap();
    let thetas = [0.2, 0.1, 0.05, 0.025];
    let report = verify_small_parameter_reduction(&spec, &thetas, 7).unwrap();
    println!("theta      defect");
    for (theta, defect) in report.thetas.iter().zip(&report.defects) {
        println!("{theta:<10} {defect:.3e}");
    }
    println!("fitted scaling exponent: {:.3} (expect > 3)", report.exponent);
}
