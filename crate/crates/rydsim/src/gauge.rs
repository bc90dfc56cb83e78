//! U(1) lattice gauge theory on the cubic lattice: constraint and
//! ring-exchange Hamiltonian with its Rokhsar-Kivelson term, the
//! dimer-covering machinery, dissipative cooling at the RK point, and a
//! Trotterized adiabatic ramp checked against exact diagonalization in
//! the constrained sector.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::channels::{
    dissipative_step, trajectory_rng, JumpOperatorSpec, TrajectoryRecord,
};
use crate::error::{Error, Result};
use crate::gates::{coherent_step, ring_exchange_patterns, rk_patterns, ErrorModel};
use crate::lattice::CubicLattice;
use crate::pauli::{OperatorSum, Pauli, PauliString};
use crate::statevec::StateVector;

/// Cap on brute-force covering enumeration.
const COVERING_CAP: usize = 24;

#[derive(Debug, Clone)]
pub struct GaugeModel {
    pub lattice: CubicLattice,
    /// Constraint coupling U of U sum_o (S_o^z)^2.
    pub u: f64,
    /// Ring-exchange coupling J.
    pub j: f64,
    /// Rokhsar-Kivelson coupling V (V = J at the RK point).
    pub v: f64,
    /// Dissipative phase per jump step.
    pub theta: f64,
    /// Sweeps of pure constraint cooling before the RK jumps join in.
    pub constraint_warmup: usize,
}

impl GaugeModel {
    pub fn rk_point(lattice: CubicLattice) -> Self {
        Self {
            lattice,
            u: 1.0,
            j: 1.0,
            v: 1.0,
            theta: std::f64::consts::FRAC_PI_2,
            constraint_warmup: 0,
        }
    }

    pub fn control(&self) -> usize {
        self.lattice.link_count
    }

    pub fn total_qubits(&self) -> usize {
        self.lattice.link_count + 1
    }
}

/// (sum_l m_l sigma_l^z)^2 over the six octahedron slots as an Ising
/// sum plus its constant: a doubled link (short periodic direction)
/// carries multiplicity two.
pub fn constraint_terms(n: usize, slots: &[usize; 6]) -> OperatorSum {
    let mut mult: Vec<(usize, f64)> = Vec::new();
    for &l in slots {
        match mult.iter_mut().find(|(link, _)| *link == l) {
            Some((_, m)) => *m += 1.0,
            None => mult.push((l, 1.0)),
        }
    }
    let mut sum = OperatorSum::new(n);
    let constant: f64 = mult.iter().map(|(_, m)| m * m).sum();
    sum.push(constant, PauliString::identity(n));
    for (i, &(la, ma)) in mult.iter().enumerate() {
        for &(lb, mb) in mult.iter().skip(i + 1) {
            sum.push(
                2.0 * ma * mb,
                PauliString::from_sites(n, &[(la, Pauli::Z), (lb, Pauli::Z)]),
            );
        }
    }
    sum
}

/// Ring exchange B_p = S1+ S2- S3+ S4- + h.c. as its eight-string form.
pub fn ring_exchange_terms(n: usize, plaquette: &[usize; 4]) -> OperatorSum {
    let mut sum = OperatorSum::new(n);
    for (sign, letters) in ring_exchange_patterns() {
        let sites: Vec<(usize, Pauli)> = plaquette
            .iter()
            .zip(letters)
            .map(|(&s, p)| (s, p))
            .collect();
        sum.push(sign / 8.0, PauliString::from_sites(n, &sites));
    }
    sum
}

/// Rokhsar-Kivelson term B_p^2 as its eight-string form.
pub fn rk_terms(n: usize, plaquette: &[usize; 4]) -> OperatorSum {
    let mut sum = OperatorSum::new(n);
    for (sign, letters) in rk_patterns() {
        let sites: Vec<(usize, Pauli)> = plaquette
            .iter()
            .zip(letters)
            .map(|(&s, p)| (s, p))
            .collect();
        sum.push(sign / 8.0, PauliString::from_sites(n, &sites));
    }
    sum
}

/// Full Hamiltonian U sum (S_o^z)^2 - J sum B_p + v_rk sum B_p^2 on the
/// link universe.
pub fn hamiltonian(model: &GaugeModel, v_rk: f64) -> OperatorSum {
    let n = model.lattice.link_count;
    let mut h = OperatorSum::new(n);
    for o in &model.lattice.octahedra {
        for (c, t) in constraint_terms(n, o).terms() {
            h.push(model.u * c, t.clone());
        }
    }
    for p in &model.lattice.plaquettes {
        for (c, t) in ring_exchange_terms(n, p).terms() {
            h.push(-model.j * c, t.clone());
        }
        for (c, t) in rk_terms(n, p).terms() {
            h.push(v_rk * c, t.clone());
        }
    }
    h
}

/// True when the basis label (bit set = spin down) puts three dimers on
/// every octahedron, counting doubled slots twice.
pub fn is_covering(lattice: &CubicLattice, bits: u64) -> bool {
    lattice.octahedra.iter().all(|o| {
        o.iter()
            .map(|&l| if bits >> l & 1 == 0 { 1i64 } else { -1 })
            .sum::<i64>()
            == 0
    })
}

/// Exhaustive sorted list of dimer coverings.
pub fn enumerate_dimer_coverings(lattice: &CubicLattice) -> Result<Vec<u64>> {
    if lattice.link_count > COVERING_CAP {
        return Err(Error::OracleCapExceeded {
            qubits: lattice.link_count,
            cap: COVERING_CAP,
        });
    }
    Ok((0..1u64 << lattice.link_count)
        .filter(|&b| is_covering(lattice, b))
        .collect())
}

/// Flips a flippable plaquette (alternating up/down around the cycle)
/// of a basis label; None when the plaquette is not flippable.
pub fn flip_plaquette(bits: u64, plaquette: &[usize; 4]) -> Option<u64> {
    let b: Vec<u64> = plaquette.iter().map(|&l| bits >> l & 1).collect();
    if b[0] == b[2] && b[1] == b[3] && b[0] != b[1] {
        let mask = plaquette.iter().fold(0u64, |m, &l| m | 1 << l);
        Some(bits ^ mask)
    } else {
        None
    }
}

/// Equal-weight superposition of all dimer coverings on the link
/// universe (no control qubit).
pub fn rk_state(lattice: &CubicLattice) -> Result<StateVector> {
    let coverings = enumerate_dimer_coverings(lattice)?;
    uniform_over(lattice.link_count, &coverings)
}

/// Equal-weight superposition over the plaquette-flip-connected
/// component of a start covering: the attractor of the RK jump
/// operators from that covering. On lattices with frozen coverings the
/// RK ground space is degenerate per component.
pub fn rk_attractor(lattice: &CubicLattice, start: u64) -> Result<StateVector> {
    if !is_covering(lattice, start) {
        return Err(Error::Domain("start state is not a dimer covering".into()));
    }
    let mut component = vec![start];
    let mut queue = vec![start];
    while let Some(c) = queue.pop() {
        for p in &lattice.plaquettes {
            if let Some(c2) = flip_plaquette(c, p) {
                if !component.contains(&c2) {
                    component.push(c2);
                    queue.push(c2);
                }
            }
        }
    }
    component.sort_unstable();
    uniform_over(lattice.link_count, &component)
}

/// First covering (in basis order) with at least one flippable
/// plaquette: the deterministic reference start for attractor-based
/// observables and the ramp.
pub fn reference_flippable_covering(lattice: &CubicLattice) -> Result<u64> {
    enumerate_dimer_coverings(lattice)?
        .into_iter()
        .find(|&c| lattice.plaquettes.iter().any(|p| flip_plaquette(c, p).is_some()))
        .ok_or_else(|| Error::Domain("no flippable covering".into()))
}

fn uniform_over(n: usize, states: &[u64]) -> Result<StateVector> {
    if states.is_empty() {
        return Err(Error::Domain("no dimer coverings on this lattice".into()));
    }
    let mut amps = vec![Complex64::ZERO; 1usize << n];
    let w = Complex64::new(1.0 / (states.len() as f64).sqrt(), 0.0);
    for &s in states {
        amps[s as usize] = w;
    }
    StateVector::from_amplitudes(n, amps)
}

/// Embeds a system-only state with a fresh control qubit in |0>.
pub fn with_control(sys: &StateVector) -> StateVector {
    let mut amps = vec![Complex64::ZERO; 2 << sys.num_qubits()];
    amps[..sys.amplitudes().len()].copy_from_slice(sys.amplitudes());
    StateVector::from_amplitudes(sys.num_qubits() + 1, amps).unwrap()
}

pub fn constraint_jump_specs(model: &GaugeModel) -> Result<Vec<JumpOperatorSpec>> {
    let n = model.lattice.link_count;
    model
        .lattice
        .octahedra
        .iter()
        .map(|o| JumpOperatorSpec::octahedron(n, model.control(), *o, model.theta))
        .collect()
}

pub fn rk_jump_specs(model: &GaugeModel) -> Result<Vec<JumpOperatorSpec>> {
    let n = model.lattice.link_count;
    model
        .lattice
        .plaquettes
        .iter()
        .map(|p| JumpOperatorSpec::rk(n, model.control(), *p, model.theta))
        .collect()
}

/// One constraint-cooling jump step on a single octahedron.
pub fn constraint_jump_step<R: Rng>(
    state: &mut StateVector,
    control: usize,
    n: usize,
    octahedron: &[usize; 6],
    theta: f64,
    flip_site: usize,
    rng: &mut R,
) -> Result<bool> {
    let spec = JumpOperatorSpec::octahedron(n, control, *octahedron, theta)?;
    dissipative_step(state, &spec, flip_site, &ErrorModel::disabled(), rng)
}

/// One RK-condensation jump step on a single plaquette.
pub fn rk_jump_step<R: Rng>(
    state: &mut StateVector,
    control: usize,
    n: usize,
    plaquette: &[usize; 4],
    theta: f64,
    flip_site: usize,
    rng: &mut R,
) -> Result<bool> {
    let spec = JumpOperatorSpec::rk(n, control, *plaquette, theta)?;
    dissipative_step(state, &spec, flip_site, &ErrorModel::disabled(), rng)
}

/// Mean octahedron charge <(S_o^z)^2> normalized by its all-down value
/// (sum of slot multiplicities squared): 1 for all spins down, 0 in the
/// dimer sector.
pub fn charge_density(state: &StateVector, lattice: &CubicLattice) -> Result<f64> {
    let n_total = state.num_qubits();
    let mut total = 0.0;
    for o in &lattice.octahedra {
        let terms = constraint_terms(lattice.link_count, o);
        let padded = pad_sum(&terms, n_total);
        total += state.expectation_sum(&padded)? / 36.0;
    }
    Ok(total / lattice.octahedra.len() as f64)
}

fn pad_sum(sum: &OperatorSum, n_total: usize) -> OperatorSum {
    let mut out = OperatorSum::new(n_total);
    for (c, t) in sum.terms() {
        out.push(*c, pad(t, n_total));
    }
    out
}

fn pad(ps: &PauliString, n_total: usize) -> PauliString {
    let sites: Vec<(usize, Pauli)> = ps.support().iter().map(|&s| (s, ps.letter(s))).collect();
    let mut out = PauliString::from_sites(n_total, &sites);
    if ps.phase().re < 0.0 {
        out = out.negate();
    }
    out
}

/// Applies an operator sum to a state: sum_k c_k P_k |psi>. Used as a
/// matrix-free oracle for commutators, dark states and eigen-residuals.
pub fn apply_opsum(op: &OperatorSum, state: &StateVector) -> Result<StateVector> {
    let mut acc = vec![Complex64::ZERO; state.amplitudes().len()];
    for (c, t) in op.terms() {
        let mut copy = state.clone();
        copy.apply_pauli_string(t)?;
        for (a, b) in acc.iter_mut().zip(copy.amplitudes()) {
            *a += b * c;
        }
    }
    StateVector::from_amplitudes(state.num_qubits(), acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeStart {
    AllDown,
    /// A specific dimer covering (basis label).
    Covering(u64),
}

#[derive(Debug, Clone)]
pub struct GaugeSeries {
    pub sweeps: usize,
    pub trajectories: usize,
    pub charge_mean: Vec<f64>,
    pub charge_stderr: Vec<f64>,
    /// Fidelity to the equal superposition of all coverings.
    pub rk_fidelity_mean: Vec<f64>,
    /// Fidelity to the flip-connected attractor of the reference start
    /// covering (equals rk_fidelity on ergodic lattices).
    pub attractor_fidelity_mean: Vec<f64>,
}

pub struct GaugeRun {
    pub series: GaugeSeries,
    pub records: Vec<TrajectoryRecord>,
}

/// Two-stage dissipative cooling at the RK point: `constraint_warmup`
/// sweeps of octahedron pumping alone, then octahedron and RK jumps
/// interleaved. Records charge density and RK fidelities per sweep.
pub fn cool_gauge(
    model: &GaugeModel,
    start: GaugeStart,
    sweeps: usize,
    trajectories: usize,
    master_seed: u64,
) -> Result<GaugeRun> {
    let constraint_specs = constraint_jump_specs(model)?;
    let rk_specs = rk_jump_specs(model)?;
    let rk_target = with_control(&rk_state(&model.lattice)?);
    let attractor_start = match start {
        GaugeStart::Covering(c) => c,
        GaugeStart::AllDown => reference_flippable_covering(&model.lattice)?,
    };
    let attractor = with_control(&rk_attractor(&model.lattice, attractor_start)?);
    let records: Vec<TrajectoryRecord> = (0..trajectories as u64)
        .into_par_iter()
        .map(|id| -> Result<TrajectoryRecord> {
            let mut rng = trajectory_rng(master_seed, id);
            let mut record = TrajectoryRecord::new(master_seed ^ id);
            let mut state = match start {
                GaugeStart::AllDown => StateVector::basis(
                    model.total_qubits(),
                    (1u64 << model.lattice.link_count) - 1,
                ),
                GaugeStart::Covering(c) => {
                    if !is_covering(&model.lattice, c) {
                        return Err(Error::Domain(format!(
                            "start label {c:#x} is not a dimer covering"
                        )));
                    }
                    StateVector::basis(model.total_qubits(), c)
                }
            };
            for sweep in 0..sweeps {
                for spec in &constraint_specs {
                    let site = spec.flip_site(sweep, &mut rng);
                    dissipative_step(&mut state, spec, site, &ErrorModel::disabled(), &mut rng)?;
                }
                if sweep >= model.constraint_warmup {
                    for spec in &rk_specs {
                        let site = spec.flip_site(sweep, &mut rng);
                        dissipative_step(
                            &mut state,
                            spec,
                            site,
                            &ErrorModel::disabled(),
                            &mut rng,
                        )?;
                    }
                }
                let t = (sweep + 1) as f64;
                record.push_row(t, "charge_density", charge_density(&state, &model.lattice)?);
                record.push_row(t, "rk_fidelity", state.fidelity(&rk_target));
                record.push_row(t, "attractor_fidelity", state.fidelity(&attractor));
            }
            Ok(record)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut charge_mean = vec![0.0; sweeps];
    let mut charge_sq = vec![0.0; sweeps];
    let mut rk_mean = vec![0.0; sweeps];
    let mut at_mean = vec![0.0; sweeps];
    for record in &records {
        let mut idx = 0usize;
        for (_, name, value) in &record.rows {
            match name.as_str() {
                "charge_density" => {
                    charge_mean[idx] += value;
                    charge_sq[idx] += value * value;
                }
                "rk_fidelity" => rk_mean[idx] += value,
                "attractor_fidelity" => {
                    at_mean[idx] += value;
                    idx += 1;
                }
                _ => {}
            }
        }
    }
    let m = trajectories as f64;
    let mut charge_stderr = vec![0.0; sweeps];
    for i in 0..sweeps {
        charge_mean[i] /= m;
        rk_mean[i] /= m;
        at_mean[i] /= m;
        let var = (charge_sq[i] / m - charge_mean[i] * charge_mean[i]).max(0.0);
        charge_stderr[i] = (var / m).sqrt();
    }
    Ok(GaugeRun {
        series: GaugeSeries {
            sweeps,
            trajectories,
            charge_mean,
            charge_stderr,
            rk_fidelity_mean: rk_mean,
            attractor_fidelity_mean: at_mean,
        },
        records,
    })
}

/// Lowest eigenpair of H restricted to the dimer-covering sector
/// (where the constraint term vanishes): H_sector = -J F + v_rk D with
/// F the flip adjacency and D the flippable-plaquette count.
pub fn exact_ground_state(model: &GaugeModel, v_rk: f64) -> Result<(f64, StateVector)> {
    let coverings = enumerate_dimer_coverings(&model.lattice)?;
    let dim = coverings.len();
    let index = |c: u64| coverings.binary_search(&c).unwrap();
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for (i, &c) in coverings.iter().enumerate() {
        let mut flippable = 0.0;
        for p in &model.lattice.plaquettes {
            if let Some(c2) = flip_plaquette(c, p) {
                flippable += 1.0;
                h[(i, index(c2))] -= model.j;
            }
        }
        h[(i, i)] += v_rk * flippable;
    }
    let eig = nalgebra::SymmetricEigen::new(h);
    let (best, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| {
            if v < bv {
                (i, v)
            } else {
                (bi, bv)
            }
        });
    let energy = eig.eigenvalues[best];
    let mut amps = vec![Complex64::ZERO; 1usize << model.lattice.link_count];
    for (i, &c) in coverings.iter().enumerate() {
        amps[c as usize] = Complex64::new(eig.eigenvectors[(i, best)], 0.0);
    }
    let mut state = StateVector::from_amplitudes(model.lattice.link_count, amps)?;
    state.normalize();
    Ok((energy, state))
}

#[derive(Debug, Clone)]
pub struct RampRow {
    pub step: usize,
    /// Time in units of hbar/J.
    pub time: f64,
    pub v_over_j: f64,
    pub energy: f64,
    pub exact_energy: f64,
}

#[derive(Debug, Clone)]
pub struct RampTrace {
    pub phi_scale: f64,
    pub rows: Vec<RampRow>,
}

/// Trotterized linear ramp V(t) = J (1 - t J / 10) from the RK point,
/// starting in the dissipatively cooled RK ground state (the flip
/// attractor of the reference covering, which is the exact ground
/// state for all 0 <= V < J). `phi_scale` bounds the largest coherent
/// phase per substep; halving it halves the Trotter step. Records the
/// digital energy against exact diagonalization at each of `steps`
/// grid points.
pub fn adiabatic_ramp(model: &GaugeModel, phi_scale: f64, steps: usize) -> Result<RampTrace> {
    if model.j <= 0.0 || phi_scale <= 0.0 || steps == 0 {
        return Err(Error::Domain("ramp needs positive J, phi_scale, steps".into()));
    }
    let total_time = 10.0 / model.j;
    let dt_record = total_time / steps as f64;
    // hold the largest per-substep phase near phi_scale: coefficients
    // are O(J), so tau = phi_scale / J
    let substeps = (dt_record * model.j / phi_scale).ceil().max(1.0) as usize;
    let tau = dt_record / substeps as f64;
    let n_total = model.total_qubits();
    let control = model.control();
    let start = reference_flippable_covering(&model.lattice)?;
    let mut state = with_control(&rk_attractor(&model.lattice, start)?);
    let error = ErrorModel::disabled();
    let mut rng = trajectory_rng(0, 0); // never consulted: perfect gates, no measurement
    let mut rows = Vec::with_capacity(steps + 1);
    let record = |state: &StateVector, step: usize, t: f64, rows: &mut Vec<RampRow>| -> Result<()> {
        let v_rk = model.j * (1.0 - t * model.j / 10.0);
        let h = pad_sum(&hamiltonian(model, v_rk), n_total);
        let energy = state.expectation_sum(&h)?;
        let (exact, _) = exact_ground_state(model, v_rk)?;
        rows.push(RampRow {
            step,
            time: t,
            v_over_j: v_rk / model.j,
            energy,
            exact_energy: exact,
        });
        Ok(())
    };
    record(&state, 0, 0.0, &mut rows)?;
    for step in 0..steps {
        for sub in 0..substeps {
            let t_mid = step as f64 * dt_record + (sub as f64 + 0.5) * tau;
            let v_rk = model.j * (1.0 - t_mid * model.j / 10.0);
            for (c, term) in hamiltonian(model, v_rk).terms() {
                if term.is_identity() {
                    continue;
                }
                let phi = -c * tau;
                coherent_step(&mut state, control, &pad(term, n_total), phi, &error, &mut rng)?;
            }
        }
        record(&state, step + 1, (step + 1) as f64 * dt_record, &mut rows)?;
    }
    Ok(RampTrace { phi_scale, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::CMatrix;
    use crate::lattice::build_cubic;
    use crate::testutil::{random_state, rng};

    fn lat221() -> CubicLattice {
        build_cubic(2, 2, 1).unwrap()
    }

    #[test]
    fn constraint_terms_match_squared_sum() {
        // distinct slots on 6 sites
        let sum = constraint_terms(6, &[0, 1, 2, 3, 4, 5]);
        let dense = sum.to_matrix().unwrap();
        let mut direct = CMatrix::zeros(64, 64);
        for b in 0..64usize {
            let s: i64 = (0..6).map(|l| if b >> l & 1 == 0 { 1 } else { -1 }).sum();
            direct[(b, b)] = Complex64::new((s * s) as f64, 0.0);
        }
        assert!((dense - direct).norm() < 1e-12);
        // doubled slot (multiplicity 2 on link 4)
        let sum = constraint_terms(5, &[0, 1, 2, 3, 4, 4]);
        let dense = sum.to_matrix().unwrap();
        let mut direct = CMatrix::zeros(32, 32);
        for b in 0..32usize {
            let mut s: i64 = (0..4).map(|l| if b >> l & 1 == 0 { 1 } else { -1 }).sum();
            s += if b >> 4 & 1 == 0 { 2 } else { -2 };
            direct[(b, b)] = Complex64::new((s * s) as f64, 0.0);
        }
        assert!((dense - direct).norm() < 1e-12);
        // eigen-examples: 3 up / 3 down -> 0; all up -> 36
        let sum = constraint_terms(6, &[0, 1, 2, 3, 4, 5]).to_matrix().unwrap();
        assert!(sum[(0b111000, 0b111000)].re.abs() < 1e-12);
        assert!((sum[(0, 0)].re - 36.0).abs() < 1e-12);
    }

    fn ring_dense_direct() -> CMatrix {
        // S1+ S2- S3+ S4- + h.c. assembled from raising/lowering masks:
        // spin up = bit 0, so S+ maps bit 1 -> 0
        let mut m = CMatrix::zeros(16, 16);
        for b in 0..16u32 {
            // S+ on 0, S- on 1, S+ on 2, S- on 3: need b = (down, up, down, up) bits 1,0,1,0
            if b & 0b0001 != 0 && b & 0b0010 == 0 && b & 0b0100 != 0 && b & 0b1000 == 0 {
                m[((b ^ 0b1111) as usize, b as usize)] += Complex64::ONE;
            }
            // h.c.
            if b & 0b0001 == 0 && b & 0b0010 != 0 && b & 0b0100 == 0 && b & 0b1000 != 0 {
                m[((b ^ 0b1111) as usize, b as usize)] += Complex64::ONE;
            }
        }
        m
    }

    #[test]
    fn ring_exchange_matches_ladder_form() {
        let sum = ring_exchange_terms(4, &[0, 1, 2, 3]);
        let dense = sum.to_matrix().unwrap();
        let direct = ring_dense_direct();
        assert!((&dense - &direct).norm() < 1e-12);
        // |udud> -> |dudu>: sites 1,3 down is bits 0b1010
        let col = 0b1010usize;
        assert!((dense[(0b0101, col)] - Complex64::ONE).norm() < 1e-12);
        // |uuuu> -> 0
        assert!(dense.column(0).norm() < 1e-12);
        // pairwise commuting strings
        let terms = sum.terms();
        for (_, a) in terms {
            for (_, b) in terms {
                assert!(a.commutes(b).unwrap());
            }
        }
    }

    #[test]
    fn rk_terms_match_ring_squared() {
        let b = ring_exchange_terms(4, &[0, 1, 2, 3]).to_matrix().unwrap();
        let n = rk_terms(4, &[0, 1, 2, 3]).to_matrix().unwrap();
        assert!((&b * &b - &n).norm() < 1e-12);
        // flippable eigenvalue 1, |uuuu> -> 0
        assert!((n[(0b0101, 0b0101)] - Complex64::ONE).norm() < 1e-12);
        assert!(n.column(0).norm() < 1e-12);
    }

    #[test]
    fn half_projector_identity() {
        // 1/2 (1 - B) B = 1/16 [sum B^(j) - sum N^(j)]
        let b = ring_exchange_terms(4, &[0, 1, 2, 3]).to_matrix().unwrap();
        let lhs = (&b - &b * &b).scale(0.5);
        let rhs = (ring_exchange_terms(4, &[0, 1, 2, 3]).to_matrix().unwrap()
            - rk_terms(4, &[0, 1, 2, 3]).to_matrix().unwrap())
        .scale(0.5);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn ring_commutes_with_constraints_but_not_neighbors() {
        let lat = lat221();
        let n = lat.link_count;
        let mut r = rng(40);
        let psi = random_state(n, &mut r);
        let ring0 = ring_exchange_terms(n, &lat.plaquettes[0]);
        for o in &lat.octahedra {
            let cons = constraint_terms(n, o);
            let ab = apply_opsum(&cons, &apply_opsum(&ring0, &psi).unwrap()).unwrap();
            let ba = apply_opsum(&ring0, &apply_opsum(&cons, &psi).unwrap()).unwrap();
            let diff: f64 = ab
                .amplitudes()
                .iter()
                .zip(ba.amplitudes())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(diff < 1e-10);
        }
        // neighboring plaquettes share links and do not commute
        let ring1 = ring_exchange_terms(n, &lat.plaquettes[1]);
        let ab = apply_opsum(&ring1, &apply_opsum(&ring0, &psi).unwrap()).unwrap();
        let ba = apply_opsum(&ring0, &apply_opsum(&ring1, &psi).unwrap()).unwrap();
        let diff: f64 = ab
            .amplitudes()
            .iter()
            .zip(ba.amplitudes())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff > 1e-6);
    }

    #[test]
    fn covering_enumeration_structure() {
        let lat = lat221();
        let cov = enumerate_dimer_coverings(&lat).unwrap();
        // brute-force count, pinned
        assert_eq!(cov.len(), 32);
        for &c in &cov {
            assert!(is_covering(&lat, c));
            for p in &lat.plaquettes {
                if let Some(c2) = flip_plaquette(c, p) {
                    assert!(cov.binary_search(&c2).is_ok(), "flip left the sector");
                }
            }
        }
        // flip-graph components: two 4-cycles, 24 frozen coverings
        let mut frozen = 0;
        let mut flippable = 0;
        for &c in &cov {
            let f = lat
                .plaquettes
                .iter()
                .filter(|p| flip_plaquette(c, p).is_some())
                .count();
            if f == 0 {
                frozen += 1;
            } else {
                flippable += 1;
            }
        }
        assert_eq!((frozen, flippable), (24, 8));
    }

    #[test]
    fn rk_state_is_dark_and_constrained() {
        let lat = lat221();
        let n = lat.link_count;
        let psi = rk_state(&lat).unwrap();
        for o in &lat.octahedra {
            let cons = pad_sum(&constraint_terms(n, o), n);
            assert!(psi.expectation_sum(&cons).unwrap().abs() < 1e-10);
        }
        // every rk jump operator annihilates it: c = 1/2 sigma_z (B - B^2)
        for p in &lat.plaquettes {
            let mut op = OperatorSum::new(n);
            for (c, t) in ring_exchange_terms(n, p).terms() {
                op.push(*c, t.clone());
            }
            for (c, t) in rk_terms(n, p).terms() {
                op.push(-c, t.clone());
            }
            let mut hit = apply_opsum(&op, &psi).unwrap();
            hit.apply_pauli_string(&PauliString::single(n, p[0], Pauli::Z)).unwrap();
            assert!(hit.norm() < 1e-10);
        }
    }

    #[test]
    fn exact_ground_state_at_rk_point() {
        let model = GaugeModel::rk_point(lat221());
        let (energy, psi) = exact_ground_state(&model, model.j).unwrap();
        // RK point: Laplacian ground energy is zero and the uniform
        // covering superposition is a ground state (degenerate)
        assert!(energy.abs() < 1e-10);
        let h = hamiltonian(&model, model.j);
        let hpsi = apply_opsum(&h, &psi).unwrap();
        let res: f64 = hpsi
            .amplitudes()
            .iter()
            .zip(psi.amplitudes())
            .map(|(a, b)| (a - b * energy).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(res < 1e-8);
        // variational: energy <= <H> of any single covering
        for &c in enumerate_dimer_coverings(&model.lattice).unwrap().iter().take(5) {
            let s = StateVector::basis(model.lattice.link_count, c);
            assert!(energy <= s.expectation_sum(&h).unwrap() + 1e-10);
        }
        // the rk state has the ground energy too
        let rk = rk_state(&model.lattice).unwrap();
        assert!(rk.expectation_sum(&h).unwrap().abs() < 1e-10);
    }

    #[test]
    fn constraint_step_dark_and_pumping() {
        let lat = lat221();
        let n = lat.link_count;
        let mut r = rng(41);
        let o = lat.octahedra[0];
        // covering basis state: dark
        let cov = enumerate_dimer_coverings(&lat).unwrap();
        let mut s = StateVector::basis(n + 1, cov[0]);
        for _ in 0..5 {
            let jumped = constraint_jump_step(
                &mut s,
                n,
                n,
                &o,
                std::f64::consts::FRAC_PI_2,
                o[0],
                &mut r,
            )
            .unwrap();
            assert!(!jumped);
        }
        assert!((s.amplitudes()[cov[0] as usize].norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cool_gauge_from_covering_keeps_charge_zero() {
        let lat = lat221();
        let cov = enumerate_dimer_coverings(&lat).unwrap();
        let flippable = cov
            .iter()
            .copied()
            .find(|&c| lat.plaquettes.iter().any(|p| flip_plaquette(c, p).is_some()))
            .unwrap();
        let model = GaugeModel::rk_point(lat);
        let run = cool_gauge(&model, GaugeStart::Covering(flippable), 6, 10, 3).unwrap();
        for (i, &c) in run.series.charge_mean.iter().enumerate() {
            assert!(c.abs() < 1e-9, "sweep {i}: charge {c}");
        }
        // attractor fidelity approaches 1
        let last = *run.series.attractor_fidelity_mean.last().unwrap();
        assert!(last > 0.95, "attractor fidelity {last}");
    }

    #[test]
    fn cool_gauge_all_down_charge_decays() {
        let mut model = GaugeModel::rk_point(lat221());
        // constraint-only stage: the charge pump works on its own
        model.constraint_warmup = usize::MAX;
        let run = cool_gauge(&model, GaugeStart::AllDown, 30, 16, 4).unwrap();
        let first = run.series.charge_mean[0];
        let last = *run.series.charge_mean.last().unwrap();
        assert!(last < first / 3.0, "first {first}, last {last}");
        assert!(last < 0.06, "late charge {last}");
    }

    #[test]
    fn ramp_starts_exact_and_runs() {
        let model = GaugeModel::rk_point(lat221());
        let trace = adiabatic_ramp(&model, 0.25, 4).unwrap();
        let first = &trace.rows[0];
        assert!((first.energy - first.exact_energy).abs() < 1e-9);
        assert!((first.v_over_j - 1.0).abs() < 1e-12);
        let last = trace.rows.last().unwrap();
        assert!((last.v_over_j).abs() < 1e-12);
        // exact ground at V=0 on this lattice: -2J (flip attractor)
        assert!((last.exact_energy + 2.0).abs() < 1e-10);
        // digital energy tracks it up to Trotter error
        assert!(
            (last.energy - last.exact_energy).abs() < 0.3,
            "final error {}",
            (last.energy - last.exact_energy).abs()
        );
    }
}
