//! Small dense-matrix helpers shared by the oracle layer.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub fn identity(dim: usize) -> CMatrix {
    DMatrix::identity(dim, dim)
}

/// Kronecker product with the site-0-least-significant convention:
/// `kron(high, low)` places `high` on the more significant qubits.
pub fn kron(high: &CMatrix, low: &CMatrix) -> CMatrix {
    high.kronecker(low)
}

/// Embeds a 2x2 single-site operator at `site` within `n` qubits.
pub fn embed_single(n: usize, site: usize, op: &CMatrix) -> CMatrix {
    let mut m = identity(1);
    for q in 0..n {
        let factor = if q == site { op.clone() } else { identity(2) };
        m = kron(&factor, &m);
    }
    m
}

/// Matrix exponential by scaling-and-squaring with a Taylor series.
/// Adequate for the <= 2^8-dimensional oracle matrices used here.
pub fn expm(a: &CMatrix) -> CMatrix {
    let norm = a.norm();
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.scale(1.0 / f64::powi(2.0, s as i32));
    let dim = a.nrows();
    let mut result = identity(dim);
    let mut term = identity(dim);
    for k in 1..=20 {
        term = (&term * &scaled).scale(1.0 / k as f64);
        result += &term;
        if term.norm() < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

pub fn dagger(a: &CMatrix) -> CMatrix {
    a.adjoint()
}

/// Frobenius distance up to a global phase: minimizes
/// `|| a - e^{i t} b ||` over the phase using the trace inner product.
pub fn phase_aligned_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let overlap = (b.adjoint() * a).trace();
    let phase = if overlap.norm() > 1e-300 {
        overlap / overlap.norm()
    } else {
        Complex64::ONE
    };
    (a - b.map(|v| v * phase)).norm()
}
