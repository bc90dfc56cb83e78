//! Dense state-vector engine over system spins plus designated control
//! qubits, with the measurement/pump primitive used by dissipative
//! steps, and a small density-matrix type used only as an oracle.
//!
//! Convention: site index 0 is the least significant bit of the basis
//! label; bit 0 means "spin up" (sigma^z = +1, internal state |A>).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use std::io::{Read, Write};

use crate::dense::CMatrix;
use crate::error::{Error, Result};
use crate::pauli::{OperatorSum, PauliString};

const UNITARY_TOL: f64 = 1e-10;
const MAGIC: &[u8; 8] = b"RYDSVEC1";

#[derive(Debug, Clone)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state |bits>, bit j of `bits` on qubit j.
    pub fn basis(n: usize, bits: u64) -> Self {
        let mut amps = vec![Complex64::ZERO; 1 << n];
        amps[bits as usize] = Complex64::ONE;
        Self { n, amps }
    }

    pub fn zero(n: usize) -> Self {
        Self::basis(n, 0)
    }

    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << n {
            return Err(Error::Domain(format!(
                "expected {} amplitudes, got {}",
                1usize << n,
                amps.len()
            )));
        }
        Ok(Self { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            let inv = 1.0 / n;
            for a in &mut self.amps {
                *a *= inv;
            }
        }
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            Err(Error::QubitOutOfRange {
                index: q,
                n: self.n,
            })
        } else {
            Ok(())
        }
    }

    /// Applies a 2x2 unitary to qubit `q`; non-unitary input is rejected.
    pub fn apply_single_qubit(&mut self, q: usize, u: &[[Complex64; 2]; 2]) -> Result<()> {
        self.check_qubit(q)?;
        let dev = unitary_deviation_2x2(u);
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation: dev });
        }
        let bit = 1usize << q;
        for base in 0..self.amps.len() {
            if base & bit != 0 {
                continue;
            }
            let a0 = self.amps[base];
            let a1 = self.amps[base | bit];
            self.amps[base] = u[0][0] * a0 + u[0][1] * a1;
            self.amps[base | bit] = u[1][0] * a0 + u[1][1] * a1;
        }
        Ok(())
    }

    /// Applies a signed Pauli string exactly.
    pub fn apply_pauli_string(&mut self, ps: &PauliString) -> Result<()> {
        self.apply_pauli_masked(ps, None)
    }

    /// Applies a Pauli string only on the subspace where `control` is |1>.
    pub fn apply_controlled_pauli(&mut self, control: usize, ps: &PauliString) -> Result<()> {
        self.check_qubit(control)?;
        if ps.letter(control) != crate::pauli::Pauli::I {
            return Err(Error::ControlInRegion(control));
        }
        self.apply_pauli_masked(ps, Some(control))
    }

    fn apply_pauli_masked(&mut self, ps: &PauliString, control: Option<usize>) -> Result<()> {
        if ps.num_sites() != self.n {
            return Err(Error::SiteUniverseMismatch(ps.num_sites(), self.n));
        }
        let (x, z, c) = ps.masks();
        let cbit = control.map(|q| 1u64 << q).unwrap_or(0);
        let sign = |b: u64| -> Complex64 {
            if (z & b).count_ones() % 2 == 0 {
                c
            } else {
                -c
            }
        };
        if x == 0 {
            for b in 0..self.amps.len() as u64 {
                if cbit != 0 && b & cbit == 0 {
                    continue;
                }
                self.amps[b as usize] *= sign(b);
            }
        } else {
            for b in 0..self.amps.len() as u64 {
                let partner = b ^ x;
                if b >= partner {
                    continue;
                }
                if cbit != 0 && b & cbit == 0 {
                    continue;
                }
                let ab = self.amps[b as usize];
                let ap = self.amps[partner as usize];
                self.amps[b as usize] = sign(partner) * ap;
                self.amps[partner as usize] = sign(b) * ab;
            }
        }
        Ok(())
    }

    /// exp(i theta sigma^z) on the listed target qubits (repeats allowed,
    /// each occurrence contributing its own rotation), applied only where
    /// `control` is |1>.
    pub fn apply_controlled_zrot_product(
        &mut self,
        control: usize,
        targets: &[usize],
        theta: f64,
    ) -> Result<()> {
        self.check_qubit(control)?;
        for &t in targets {
            self.check_qubit(t)?;
            if t == control {
                return Err(Error::ControlInRegion(control));
            }
        }
        let cbit = 1u64 << control;
        for b in 0..self.amps.len() as u64 {
            if b & cbit == 0 {
                continue;
            }
            let mut m = 0i64;
            for &t in targets {
                m += if b & (1 << t) == 0 { 1 } else { -1 };
            }
            self.amps[b as usize] *= Complex64::from_polar(1.0, theta * m as f64);
        }
        Ok(())
    }

    /// Applies a dense unitary on a subset of qubits; if `control` is
    /// given, only on the subspace where that qubit equals the stated
    /// value.
    pub fn apply_subset_unitary(
        &mut self,
        targets: &[usize],
        u: &CMatrix,
        control: Option<(usize, bool)>,
    ) -> Result<()> {
        let k = targets.len();
        if u.nrows() != 1 << k || u.ncols() != 1 << k {
            return Err(Error::Domain(format!(
                "unitary dimension {} does not match {k} targets",
                u.nrows()
            )));
        }
        let dev = (u.adjoint() * u - DMatrix::identity(1 << k, 1 << k)).norm();
        if dev > UNITARY_TOL * (1 << k) as f64 {
            return Err(Error::NotUnitary { deviation: dev });
        }
        let mut seen = std::collections::HashSet::new();
        for &t in targets {
            self.check_qubit(t)?;
            if !seen.insert(t) {
                return Err(Error::DuplicateTarget(t));
            }
        }
        if let Some((c, _)) = control {
            self.check_qubit(c)?;
            if targets.contains(&c) {
                return Err(Error::ControlInRegion(c));
            }
        }
        let target_mask: u64 = targets.iter().map(|&t| 1u64 << t).sum();
        let dim = 1usize << k;
        let mut gathered = vec![Complex64::ZERO; dim];
        let mut indices = vec![0u64; dim];
        for base in 0..self.amps.len() as u64 {
            if base & target_mask != 0 {
                continue;
            }
            if let Some((c, v)) = control {
                let bit = base & (1 << c) != 0;
                if bit != v {
                    continue;
                }
            }
            for sub in 0..dim {
                let mut idx = base;
                for (j, &t) in targets.iter().enumerate() {
                    if sub & (1 << j) != 0 {
                        idx |= 1 << t;
                    }
                }
                indices[sub] = idx;
                gathered[sub] = self.amps[idx as usize];
            }
            for row in 0..dim {
                let mut acc = Complex64::ZERO;
                for col in 0..dim {
                    acc += u[(row, col)] * gathered[col];
                }
                self.amps[indices[row] as usize] = acc;
            }
        }
        Ok(())
    }

    pub fn prob_one(&self, q: usize) -> Result<f64> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Born-samples qubit `q`, then incoherently resets it to |0>
    /// (optical pumping); the post-state is renormalized.
    pub fn measure_and_reset<R: Rng>(&mut self, q: usize, rng: &mut R) -> Result<u8> {
        self.check_qubit(q)?;
        let p1 = self.prob_one(q)?;
        let outcome = if rng.random::<f64>() < p1 { 1u8 } else { 0u8 };
        let bit = 1usize << q;
        let keep_one = outcome == 1;
        for i in 0..self.amps.len() {
            let is_one = i & bit != 0;
            if is_one != keep_one {
                self.amps[i] = Complex64::ZERO;
            }
        }
        if keep_one {
            // pump |1> back to |0>
            for i in 0..self.amps.len() {
                if i & bit != 0 {
                    self.amps[i ^ bit] = self.amps[i];
                    self.amps[i] = Complex64::ZERO;
                }
            }
        }
        let norm = self.norm();
        if norm < 1e-300 {
            return Err(Error::Domain(
                "measurement selected a zero-norm branch".into(),
            ));
        }
        self.normalize();
        Ok(outcome)
    }

    /// Expectation value of a Hermitian Pauli string.
    pub fn expectation(&self, ps: &PauliString) -> Result<f64> {
        if !ps.is_hermitian() {
            return Err(Error::NotHermitian);
        }
        if ps.num_sites() != self.n {
            return Err(Error::SiteUniverseMismatch(ps.num_sites(), self.n));
        }
        let (x, z, c) = ps.masks();
        let mut acc = Complex64::ZERO;
        for b in 0..self.amps.len() as u64 {
            let sign = if (z & b).count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            acc += self.amps[(b ^ x) as usize].conj() * self.amps[b as usize] * c * sign;
        }
        Ok(acc.re)
    }

    pub fn expectation_sum(&self, op: &OperatorSum) -> Result<f64> {
        let mut acc = 0.0;
        for (coeff, term) in op.terms() {
            acc += coeff * self.expectation(term)?;
        }
        Ok(acc)
    }

    /// |<a|b>|^2.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        let overlap: Complex64 = self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum();
        overlap.norm_sqr()
    }

    /// Born-samples the +-1 eigenvalue of a Hermitian Pauli string and
    /// collapses the state onto the sampled eigenspace.
    pub fn sample_eigenvalue<R: Rng>(&mut self, ps: &PauliString, rng: &mut R) -> Result<i8> {
        if !ps.is_hermitian() {
            return Err(Error::NotHermitian);
        }
        let expect = self.expectation(ps)?;
        let p_plus = ((1.0 + expect) / 2.0).clamp(0.0, 1.0);
        let outcome: i8 = if rng.random::<f64>() < p_plus { 1 } else { -1 };
        // project onto (1 + outcome * P)/2
        let mut projected = self.clone();
        projected.apply_pauli_string(ps)?;
        for (a, p) in self.amps.iter_mut().zip(projected.amps) {
            *a = (*a + (outcome as f64) * p) * 0.5;
        }
        self.normalize();
        Ok(outcome)
    }

    /// Debug dump: magic, qubit count, amplitude count, then
    /// little-endian (re, im) f64 pairs.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&(self.amps.len() as u64).to_le_bytes())?;
        for a in &self.amps {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Parse("bad state-vector magic".into()));
        }
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf)?;
        let n = u64::from_le_bytes(buf) as usize;
        r.read_exact(&mut buf)?;
        let count = u64::from_le_bytes(buf) as usize;
        if count != 1 << n {
            return Err(Error::Parse("amplitude count mismatch".into()));
        }
        let mut amps = Vec::with_capacity(count);
        for _ in 0..count {
            r.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf);
            r.read_exact(&mut buf)?;
            let im = f64::from_le_bytes(buf);
            amps.push(Complex64::new(re, im));
        }
        Self::from_amplitudes(n, amps)
    }
}

fn unitary_deviation_2x2(u: &[[Complex64; 2]; 2]) -> f64 {
    let mut dev: f64 = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            let mut acc = Complex64::ZERO;
            for k in 0..2 {
                acc += u[k][r].conj() * u[k][c];
            }
            let expect = if r == c {
                Complex64::ONE
            } else {
                Complex64::ZERO
            };
            dev = dev.max((acc - expect).norm());
        }
    }
    dev
}

/// Small-system density matrix; oracle use only.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    n: usize,
    pub mat: CMatrix,
}

impl DensityMatrix {
    pub fn from_pure(state: &StateVector) -> Self {
        let v = nalgebra::DVector::from_column_slice(&state.amps);
        DensityMatrix {
            n: state.n,
            mat: &v * v.adjoint(),
        }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1usize << n;
        DensityMatrix {
            n,
            mat: DMatrix::identity(dim, dim).scale(1.0 / dim as f64),
        }
    }

    pub fn from_matrix(n: usize, mat: CMatrix) -> Self {
        assert_eq!(mat.nrows(), 1 << n);
        DensityMatrix { n, mat }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.mat - self.mat.adjoint()).norm()
    }

    /// rho -> sum_k K rho K^dagger.
    pub fn apply_kraus(&mut self, kraus: &[CMatrix]) {
        let mut out = CMatrix::zeros(self.mat.nrows(), self.mat.ncols());
        for k in kraus {
            out += k * &self.mat * k.adjoint();
        }
        self.mat = out;
    }

    pub fn expectation(&self, op: &CMatrix) -> f64 {
        (op * &self.mat).trace().re
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::u_c_half_pi;
    use crate::pauli::Pauli;
    use crate::testutil::{random_state, random_string};
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        crate::testutil::rng(7)
    }

    #[test]
    fn identity_leaves_state() {
        let mut s = StateVector::basis(2, 0b10);
        let id = [
            [Complex64::ONE, Complex64::ZERO],
            [Complex64::ZERO, Complex64::ONE],
        ];
        s.apply_single_qubit(0, &id).unwrap();
        assert_eq!(s.amplitudes()[0b10], Complex64::ONE);
    }

    #[test]
    fn rejects_non_unitary() {
        let mut s = StateVector::zero(1);
        let bad = [
            [Complex64::new(2.0, 0.0), Complex64::ZERO],
            [Complex64::ZERO, Complex64::ONE],
        ];
        assert!(matches!(
            s.apply_single_qubit(0, &bad),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn pi_half_rotation_makes_plus_state() {
        // U_c(pi/2) = exp(-i pi sigma_y / 4) maps |0> to (|0> + |1>)/sqrt(2)
        let mut s = StateVector::zero(1);
        s.apply_single_qubit(0, &u_c_half_pi()).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert!((s.amplitudes()[0].re - r).abs() < 1e-12);
        assert!((s.amplitudes()[1].re - r).abs() < 1e-12);
    }

    #[test]
    fn x_flips_basis_state() {
        let mut s = StateVector::zero(1);
        s.apply_pauli_string(&PauliString::single(1, 0, Pauli::X))
            .unwrap();
        assert_eq!(s.amplitudes()[1], Complex64::ONE);
    }

    #[test]
    fn pauli_application_matches_matrix_oracle() {
        let mut rng = rng();
        for _ in 0..20 {
            let n = 4;
            let ps = random_string(n, &mut rng);
            let mut s = random_state(n, &mut rng);
            let dense = ps.to_matrix().unwrap();
            let v = nalgebra::DVector::from_column_slice(s.amplitudes());
            let expect = &dense * v;
            s.apply_pauli_string(&ps).unwrap();
            let got = nalgebra::DVector::from_column_slice(s.amplitudes());
            assert!((got - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn controlled_pauli_matches_dense_five_qubit_oracle() {
        let mut rng = rng();
        let n = 5;
        let control = 4;
        let ps = PauliString::uniform(n, &[0, 1, 2, 3], Pauli::X);
        let dense_ps = PauliString::uniform(4, &[0, 1, 2, 3], Pauli::X)
            .to_matrix()
            .unwrap();
        // |0><0| (x) 1 + |1><1| (x) X-string, control most significant
        let dim = 32;
        let mut dense = CMatrix::zeros(dim, dim);
        for r in 0..16 {
            dense[(r, r)] = Complex64::ONE;
            for c in 0..16 {
                dense[(16 + r, 16 + c)] = dense_ps[(r, c)];
            }
        }
        let mut s = random_state(n, &mut rng);
        let v = nalgebra::DVector::from_column_slice(s.amplitudes());
        let expect = &dense * v;
        s.apply_controlled_pauli(control, &ps).unwrap();
        let got = nalgebra::DVector::from_column_slice(s.amplitudes());
        assert!((got - expect).norm() < 1e-12);
    }

    #[test]
    fn control_zero_leaves_targets() {
        let mut s = StateVector::basis(5, 0b00110);
        let before = s.amplitudes().to_vec();
        s.apply_controlled_pauli(4, &PauliString::uniform(5, &[0, 1, 2, 3], Pauli::X))
            .unwrap();
        assert_eq!(s.amplitudes(), &before[..]);
    }

    #[test]
    fn control_one_flips_targets() {
        let mut s = StateVector::basis(5, 0b10000);
        s.apply_controlled_pauli(4, &PauliString::uniform(5, &[0, 1, 2, 3], Pauli::X))
            .unwrap();
        assert_eq!(s.amplitudes()[0b11111], Complex64::ONE);
    }

    #[test]
    fn control_overlap_rejected() {
        let mut s = StateVector::zero(4);
        assert!(matches!(
            s.apply_controlled_pauli(0, &PauliString::uniform(4, &[0, 1], Pauli::X)),
            Err(Error::ControlInRegion(0))
        ));
    }

    #[test]
    fn measurement_on_definite_states() {
        let mut r = rng();
        let mut s = StateVector::zero(2);
        assert_eq!(s.measure_and_reset(0, &mut r).unwrap(), 0);
        let mut s = StateVector::basis(2, 0b01);
        assert_eq!(s.measure_and_reset(0, &mut r).unwrap(), 1);
        // reset leaves qubit in |0>
        assert_eq!(s.amplitudes()[0], Complex64::ONE);
    }

    #[test]
    fn measurement_statistics_on_plus_state() {
        let mut r = rng();
        let mut ones = 0;
        let trials = 10_000;
        for _ in 0..trials {
            let mut s = StateVector::zero(1);
            s.apply_single_qubit(0, &u_c_half_pi()).unwrap();
            ones += s.measure_and_reset(0, &mut r).unwrap() as u32;
        }
        // 3 sigma band around 50%
        let sigma = (trials as f64 * 0.25).sqrt();
        assert!((ones as f64 - trials as f64 / 2.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn expectations() {
        let s = StateVector::zero(1);
        assert!((s.expectation(&PauliString::single(1, 0, Pauli::Z)).unwrap() - 1.0).abs() < 1e-12);
        // all |+x| product state has <A_p> = +1
        let mut s = StateVector::zero(4);
        for q in 0..4 {
            s.apply_single_qubit(q, &u_c_half_pi()).unwrap();
        }
        let ap = PauliString::uniform(4, &[0, 1, 2, 3], Pauli::X);
        assert!((s.expectation(&ap).unwrap() - 1.0).abs() < 1e-12);
        // all-spins-down basis state: X-string flips it, expectation 0
        let s = StateVector::basis(4, 0b1111);
        assert!(s.expectation(&ap).unwrap().abs() < 1e-12);
    }

    #[test]
    fn non_hermitian_expectation_rejected() {
        let s = StateVector::zero(2);
        let xy = PauliString::single(2, 0, Pauli::X)
            .multiply(&PauliString::single(2, 0, Pauli::Y))
            .unwrap();
        assert!(matches!(s.expectation(&xy), Err(Error::NotHermitian)));
    }

    #[test]
    fn fidelity_cases() {
        let a = StateVector::zero(1);
        let b = StateVector::basis(1, 1);
        assert!((a.fidelity(&a) - 1.0).abs() < 1e-12);
        assert!(a.fidelity(&b) < 1e-12);
        let mut plus = StateVector::zero(1);
        plus.apply_single_qubit(0, &u_c_half_pi()).unwrap();
        assert!((plus.fidelity(&a) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn binary_round_trip() {
        let mut r = rng();
        let s = random_state(3, &mut r);
        let mut buf = Vec::new();
        s.write_binary(&mut buf).unwrap();
        let back = StateVector::read_binary(&buf[..]).unwrap();
        assert!((s.fidelity(&back) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn norm_preserved_over_many_gates() {
        let mut r = rng();
        let mut s = random_state(4, &mut r);
        for _ in 0..10_000 {
            let ps = random_string(4, &mut r);
            s.apply_pauli_string(&ps).unwrap();
        }
        assert!((s.norm() - 1.0).abs() < 1e-9);
    }
}
