//! Toric-code cooling: jump-spec assembly, anyon observables, the
//! effective temperature of a heating plateau, and two trajectory
//! engines — a dense state-vector engine for small lattices and a
//! classical anyon random-walk engine for large ones, cross-validated
//! against each other.

use rand::Rng;
use rayon::prelude::*;

use crate::channels::{
    dissipative_step, sample_observables, trajectory_rng, JumpOperatorSpec, TrajectoryRecord,
};
use crate::error::{Error, Result};
use crate::gates::ErrorModel;
use crate::lattice::ToricLattice;
use crate::pauli::{Pauli, PauliString, ORACLE_CAP};
use crate::statevec::StateVector;

/// Walker heating probability reproducing the dense engine's plateau
/// with gate error |Q| = 0.1 on L = 2 (see `examples/calibrate_walker.rs`
/// for the fit procedure: dense plateau 0.114, walker match at 0.10
/// within one standard error).
pub const P_HEAT_Q01: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Dense,
    Walker,
}

#[derive(Debug, Clone)]
pub struct ToricModel {
    pub lattice: ToricLattice,
    /// Energy unit E0 of H = -E0 (sum A_p + sum B_s).
    pub e0: f64,
    /// Dissipative phase per jump step.
    pub theta: f64,
    pub error: ErrorModel,
    /// Heating probability per cell and sweep for the walker engine.
    pub p_heat: f64,
}

impl ToricModel {
    pub fn new(lattice: ToricLattice) -> Self {
        Self {
            lattice,
            e0: 1.0,
            theta: std::f64::consts::FRAC_PI_2,
            error: ErrorModel::disabled(),
            p_heat: 0.0,
        }
    }

    /// Dense-engine qubit count: one shared control after the links.
    pub fn total_qubits(&self) -> usize {
        self.lattice.link_count + 1
    }

    pub fn control(&self) -> usize {
        self.lattice.link_count
    }
}

/// One pump per plaquette (c_p = sigma^z_i (1 - A_p)/2) and one per
/// vertex (c_s = sigma^x_j (1 - B_s)/2).
pub fn toric_jump_specs(model: &ToricModel) -> Result<Vec<JumpOperatorSpec>> {
    let n = model.lattice.link_count;
    let control = model.control();
    let mut specs = Vec::new();
    for p in &model.lattice.plaquettes {
        specs.push(JumpOperatorSpec::standard(
            n,
            control,
            p.to_vec(),
            Pauli::X,
            Pauli::Z,
            model.theta,
        )?);
    }
    for v in &model.lattice.vertices {
        specs.push(JumpOperatorSpec::standard(
            n,
            control,
            v.to_vec(),
            Pauli::Z,
            Pauli::X,
            model.theta,
        )?);
    }
    Ok(specs)
}

/// Classical anyon configuration: one occupation flag per plaquette
/// (magnetic sector) and per vertex (electric sector).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnyonConfig {
    pub plaquettes: Vec<bool>,
    pub vertices: Vec<bool>,
    /// Sweeps applied so far; drives the round-robin link schedule.
    pub sweep: usize,
}

impl AnyonConfig {
    pub fn empty(lattice: &ToricLattice) -> Self {
        Self {
            plaquettes: vec![false; lattice.plaquettes.len()],
            vertices: vec![false; lattice.vertices.len()],
            sweep: 0,
        }
    }

    pub fn anyon_count(&self) -> usize {
        self.plaquettes.iter().filter(|&&b| b).count()
            + self.vertices.iter().filter(|&&b| b).count()
    }

    pub fn even_parity(&self) -> bool {
        self.plaquettes.iter().filter(|&&b| b).count() % 2 == 0
            && self.vertices.iter().filter(|&&b| b).count() % 2 == 0
    }
}

/// Fraction of stabilizers with a negative expectation value.
pub fn anyon_density(state: &StateVector, lattice: &ToricLattice) -> Result<f64> {
    let n_total = state.num_qubits();
    let mut occupied = 0usize;
    let total = lattice.plaquettes.len() + lattice.vertices.len();
    for p in 0..lattice.plaquettes.len() {
        let ps = pad(&lattice.plaquette_stabilizer(p), n_total);
        if state.expectation(&ps)? < 0.0 {
            occupied += 1;
        }
    }
    for v in 0..lattice.vertices.len() {
        let ps = pad(&lattice.vertex_stabilizer(v), n_total);
        if state.expectation(&ps)? < 0.0 {
            occupied += 1;
        }
    }
    Ok(occupied as f64 / total as f64)
}

pub fn config_density(config: &AnyonConfig) -> f64 {
    config.anyon_count() as f64 / (config.plaquettes.len() + config.vertices.len()) as f64
}

fn pad(ps: &PauliString, n_total: usize) -> PauliString {
    let sites: Vec<(usize, Pauli)> = ps.support().iter().map(|&s| (s, ps.letter(s))).collect();
    PauliString::from_sites(n_total, &sites)
}

/// T_eff = -E0 / (k_B ln n) assigned to a stationary anyon density,
/// in units of E0/k_B.
pub fn effective_temperature(n: f64, e0: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&n) || n == 0.0 {
        return Err(Error::Domain(format!(
            "anyon density {n} outside (0, 1) has no effective temperature"
        )));
    }
    Ok(-e0 / n.ln())
}

/// Fully polarized all-spins-down start: every link bit set, control
/// |0>. All B_s = +1, every A_p has zero expectation.
pub fn init_all_down(lattice: &ToricLattice) -> StateVector {
    let bits = (1u64 << lattice.link_count) - 1;
    StateVector::basis(lattice.link_count + 1, bits)
}

/// Classical counterpart of the all-down start: vertices clean, each
/// plaquette occupied with probability 1/2 conditioned on even parity.
pub fn sample_initial_anyons<R: Rng>(lattice: &ToricLattice, rng: &mut R) -> AnyonConfig {
    let mut config = AnyonConfig::empty(lattice);
    let count = config.plaquettes.len();
    let mut parity = false;
    for i in 0..count - 1 {
        let occ = rng.random::<bool>();
        config.plaquettes[i] = occ;
        parity ^= occ;
    }
    // parity fix on the last plaquette keeps its marginal at 1/2
    config.plaquettes[count - 1] = parity;
    config
}

/// One walker sweep, mirroring the dense engine's schedule: every
/// plaquette then every vertex, in index order, each moving its anyon
/// (if present) across the round-robin link of the sweep; meeting
/// anyons annihilate. Afterwards each plaquette pair-toggles across its
/// lowest link with probability `p_heat` (heating surrogate for the
/// sigma^z gate error).
pub fn walker_sweep<R: Rng>(
    config: &mut AnyonConfig,
    lattice: &ToricLattice,
    rng: &mut R,
    p_heat: f64,
) {
    let s = config.sweep;
    for p in 0..lattice.plaquettes.len() {
        if config.plaquettes[p] {
            let link = lattice.plaquettes[p][s % 4];
            let [a, b] = lattice.plaquettes_of_link(link);
            let other = if a == p { b } else { a };
            config.plaquettes[p] = false;
            config.plaquettes[other] = !config.plaquettes[other];
        }
    }
    for v in 0..lattice.vertices.len() {
        if config.vertices[v] {
            let link = lattice.vertices[v][s % 4];
            let [a, b] = lattice.vertices_of_link(link);
            let other = if a == v { b } else { a };
            config.vertices[v] = false;
            config.vertices[other] = !config.vertices[other];
        }
    }
    if p_heat > 0.0 {
        for p in 0..lattice.plaquettes.len() {
            if rng.random::<f64>() < p_heat {
                let link = *lattice.plaquettes[p].iter().min().unwrap();
                for q in lattice.plaquettes_of_link(link) {
                    config.plaquettes[q] = !config.plaquettes[q];
                }
            }
        }
    }
    config.sweep += 1;
}

/// Aggregated cooling time series.
#[derive(Debug, Clone)]
pub struct CoolingSeries {
    pub sweeps: usize,
    pub trajectories: usize,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub mean_plaquette: Vec<f64>,
    pub mean_vertex: Vec<f64>,
}

pub struct CoolingRun {
    pub series: CoolingSeries,
    pub records: Vec<TrajectoryRecord>,
}

/// Runs `trajectories` independent cooling trajectories and aggregates
/// the per-sweep anyon density. Trajectory RNG streams depend only on
/// the master seed and the trajectory id, so results are independent of
/// the worker count.
pub fn cool_toric(
    model: &ToricModel,
    sweeps: usize,
    trajectories: usize,
    engine: Engine,
    master_seed: u64,
) -> Result<CoolingRun> {
    if engine == Engine::Dense && model.total_qubits() > ORACLE_CAP + 6 {
        return Err(Error::OracleCapExceeded {
            qubits: model.total_qubits(),
            cap: ORACLE_CAP + 6,
        });
    }
    let specs = toric_jump_specs(model)?;
    let records: Vec<TrajectoryRecord> = (0..trajectories as u64)
        .into_par_iter()
        .map(|id| -> Result<TrajectoryRecord> {
            let mut rng = trajectory_rng(master_seed, id);
            let mut record = TrajectoryRecord::new(master_seed ^ id);
            match engine {
                Engine::Dense => {
                    let mut state = init_all_down(&model.lattice);
                    for sweep in 0..sweeps {
                        let mut fired = 0usize;
                        for spec in &specs {
                            let site = spec.flip_site(sweep, &mut rng);
                            if dissipative_step(&mut state, spec, site, &model.error, &mut rng)? {
                                fired += 1;
                            }
                        }
                        let (np, nv) = sampled_densities(&mut state, &model.lattice, &mut rng)?;
                        let t = (sweep + 1) as f64;
                        record.push_row(t, "anyon_density", (np + nv) / 2.0);
                        record.push_row(t, "density_plaquette", np);
                        record.push_row(t, "density_vertex", nv);
                        record.push_row(t, "jumps", fired as f64);
                    }
                }
                Engine::Walker => {
                    let mut config = sample_initial_anyons(&model.lattice, &mut rng);
                    for sweep in 0..sweeps {
                        walker_sweep(&mut config, &model.lattice, &mut rng, model.p_heat);
                        let np = config.plaquettes.iter().filter(|&&b| b).count() as f64
                            / config.plaquettes.len() as f64;
                        let nv = config.vertices.iter().filter(|&&b| b).count() as f64
                            / config.vertices.len() as f64;
                        let t = (sweep + 1) as f64;
                        record.push_row(t, "anyon_density", (np + nv) / 2.0);
                        record.push_row(t, "density_plaquette", np);
                        record.push_row(t, "density_vertex", nv);
                    }
                }
            }
            Ok(record)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CoolingRun {
        series: aggregate(&records, sweeps, trajectories),
        records,
    })
}

/// Born-samples every stabilizer (collapsing the state) and returns the
/// (plaquette, vertex) anyon densities of the outcome.
fn sampled_densities<R: Rng>(
    state: &mut StateVector,
    lattice: &ToricLattice,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let mut regions = Vec::new();
    for p in 0..lattice.plaquettes.len() {
        regions.push(lattice.plaquette_stabilizer(p));
    }
    for v in 0..lattice.vertices.len() {
        regions.push(lattice.vertex_stabilizer(v));
    }
    let samples = sample_observables(state, &regions, rng)?;
    let np = samples[..lattice.plaquettes.len()]
        .iter()
        .filter(|&&s| s < 0)
        .count() as f64
        / lattice.plaquettes.len() as f64;
    let nv = samples[lattice.plaquettes.len()..]
        .iter()
        .filter(|&&s| s < 0)
        .count() as f64
        / lattice.vertices.len() as f64;
    Ok((np, nv))
}

fn aggregate(records: &[TrajectoryRecord], sweeps: usize, trajectories: usize) -> CoolingSeries {
    let mut mean = vec![0.0; sweeps];
    let mut sq = vec![0.0; sweeps];
    let mut mp = vec![0.0; sweeps];
    let mut mv = vec![0.0; sweeps];
    for record in records {
        let mut sweep_idx = 0usize;
        for (_, name, value) in &record.rows {
            match name.as_str() {
                "anyon_density" => {
                    mean[sweep_idx] += value;
                    sq[sweep_idx] += value * value;
                }
                "density_plaquette" => mp[sweep_idx] += value,
                "density_vertex" => {
                    mv[sweep_idx] += value;
                    sweep_idx += 1;
                }
                _ => {}
            }
        }
    }
    let m = trajectories as f64;
    let mut stderr = vec![0.0; sweeps];
    for i in 0..sweeps {
        mean[i] /= m;
        mp[i] /= m;
        mv[i] /= m;
        let var = (sq[i] / m - mean[i] * mean[i]).max(0.0);
        stderr[i] = (var / m).sqrt();
    }
    CoolingSeries {
        sweeps,
        trajectories,
        mean,
        stderr,
        mean_plaquette: mp,
        mean_vertex: mv,
    }
}

/// Welch two-sample t-test p-value that the last two quarters of a
/// series share a mean; used for the plateau-stationarity check.
pub fn stationarity_pvalue(series: &[f64]) -> Result<f64> {
    let n = series.len();
    if n < 8 {
        return Err(Error::Domain("series too short for a plateau test".into()));
    }
    let a = &series[n / 2..3 * n / 4];
    let b = &series[3 * n / 4..];
    let stats = |s: &[f64]| {
        let m = s.iter().sum::<f64>() / s.len() as f64;
        let v = s.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (s.len() as f64 - 1.0);
        (m, v, s.len() as f64)
    };
    let (ma, va, na) = stats(a);
    let (mb, vb, nb) = stats(b);
    let se2 = va / na + vb / nb;
    if se2 <= 0.0 {
        // identical constant quarters: perfectly stationary
        return Ok(1.0);
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    let dist = statrs::distribution::StudentsT::new(0.0, 1.0, df)
        .map_err(|e| Error::Domain(e.to_string()))?;
    use statrs::distribution::ContinuousCDF;
    Ok(2.0 * (1.0 - dist.cdf(t.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_toric;
    use crate::testutil::rng;

    #[test]
    fn jump_specs_shapes() {
        let model = ToricModel::new(build_toric(2).unwrap());
        let specs = toric_jump_specs(&model).unwrap();
        assert_eq!(specs.len(), 8);
        for (i, spec) in specs.iter().enumerate() {
            assert_eq!(spec.region.len(), 4);
            if i < 4 {
                assert_eq!((spec.w, spec.flip), (Pauli::X, Pauli::Z));
            } else {
                assert_eq!((spec.w, spec.flip), (Pauli::Z, Pauli::X));
            }
        }
    }

    #[test]
    fn all_down_expectations() {
        let lat = build_toric(2).unwrap();
        let s = init_all_down(&lat);
        for v in 0..lat.vertices.len() {
            let b = pad(&lat.vertex_stabilizer(v), s.num_qubits());
            assert!((s.expectation(&b).unwrap() - 1.0).abs() < 1e-12);
        }
        for p in 0..lat.plaquettes.len() {
            let a = pad(&lat.plaquette_stabilizer(p), s.num_qubits());
            assert!(s.expectation(&a).unwrap().abs() < 1e-12);
        }
        assert!(anyon_density(&s, &lat).unwrap() < 1e-12);
    }

    #[test]
    fn single_pair_density_counts() {
        let lat = build_toric(2).unwrap();
        let mut s = init_all_down(&lat);
        // sigma^z on one link creates a plaquette anyon pair; on L=2 a
        // sigma^x on one link creates a vertex pair
        s.apply_pauli_string(&PauliString::single(9, 0, Pauli::Z)).unwrap();
        s.apply_pauli_string(&PauliString::single(9, 0, Pauli::X)).unwrap();
        // expectation-thresholded density: A_p expectations are still 0
        // (all-down backbone), B_s pair shows up
        let n = anyon_density(&s, &lat).unwrap();
        assert!((n - 2.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn effective_temperature_cases() {
        let t = effective_temperature(1.0 / std::f64::consts::E, 1.0).unwrap();
        assert!((t - 1.0).abs() < 1e-12);
        let t = effective_temperature(0.1, 1.0).unwrap();
        assert!((t - 1.0 / 10f64.ln()).abs() < 1e-12);
        assert!(effective_temperature(1e-12, 1.0).unwrap() > 0.0);
        assert!(effective_temperature(0.0, 1.0).is_err());
        assert!(effective_temperature(1.0, 1.0).is_err());
    }

    #[test]
    fn initial_anyons_even_parity_and_half_marginal() {
        let lat = build_toric(3).unwrap();
        let mut r = rng(30);
        let draws = 10_000;
        let mut occ = vec![0usize; lat.plaquettes.len()];
        for _ in 0..draws {
            let c = sample_initial_anyons(&lat, &mut r);
            assert!(c.even_parity());
            assert!(c.vertices.iter().all(|&v| !v));
            for (i, &b) in c.plaquettes.iter().enumerate() {
                if b {
                    occ[i] += 1;
                }
            }
        }
        let sigma = (0.25f64 / draws as f64).sqrt();
        for (i, &count) in occ.iter().enumerate() {
            let p = count as f64 / draws as f64;
            assert!((p - 0.5).abs() < 4.0 * sigma, "plaquette {i}: {p}");
        }
    }

    #[test]
    fn walker_annihilation_and_absorbing_empty() {
        let lat = build_toric(2).unwrap();
        let mut r = rng(31);
        // two anyons on the plaquettes sharing the sweep-0 link of
        // plaquette 0 annihilate
        let mut c = AnyonConfig::empty(&lat);
        let link = lat.plaquettes[0][0];
        let [a, b] = lat.plaquettes_of_link(link);
        c.plaquettes[a] = true;
        c.plaquettes[b] = true;
        walker_sweep(&mut c, &lat, &mut r, 0.0);
        assert_eq!(c.anyon_count(), 0);
        // empty stays empty without heating
        for _ in 0..50 {
            walker_sweep(&mut c, &lat, &mut r, 0.0);
            assert_eq!(c.anyon_count(), 0);
        }
    }

    #[test]
    fn walker_preserves_parity_and_monotone_without_heating() {
        let lat = build_toric(3).unwrap();
        let mut r = rng(32);
        for _ in 0..50 {
            let mut c = sample_initial_anyons(&lat, &mut r);
            let mut count = c.anyon_count();
            for _ in 0..30 {
                walker_sweep(&mut c, &lat, &mut r, 0.0);
                assert!(c.even_parity());
                assert!(c.anyon_count() <= count);
                count = c.anyon_count();
            }
        }
        // heating keeps parity even
        let mut c = sample_initial_anyons(&lat, &mut r);
        for _ in 0..30 {
            walker_sweep(&mut c, &lat, &mut r, 0.3);
            assert!(c.even_parity());
        }
    }

    #[test]
    fn dense_cooling_reaches_ground_state_l2() {
        let model = ToricModel::new(build_toric(2).unwrap());
        let run = cool_toric(&model, 12, 60, Engine::Dense, 99).unwrap();
        let last = *run.series.mean.last().unwrap();
        assert!(last < 0.02, "final density {last}");
        // non-increasing trend within noise
        assert!(run.series.mean[0] > last);
    }

    #[test]
    fn walker_dense_equivalence_l2() {
        let model = ToricModel::new(build_toric(2).unwrap());
        let sweeps = 8;
        let shots = 400;
        let dense = cool_toric(&model, sweeps, shots, Engine::Dense, 5).unwrap();
        let walker = cool_toric(&model, sweeps, shots, Engine::Walker, 6).unwrap();
        for i in 0..sweeps {
            let d = dense.series.mean[i];
            let w = walker.series.mean[i];
            let s = (dense.series.stderr[i].powi(2) + walker.series.stderr[i].powi(2))
                .sqrt()
                .max(1e-4);
            assert!((d - w).abs() < 3.5 * s, "sweep {i}: dense={d} walker={w}");
        }
    }

    #[test]
    fn determinism_of_cooling_run() {
        let model = ToricModel::new(build_toric(2).unwrap());
        let a = cool_toric(&model, 4, 20, Engine::Dense, 17).unwrap();
        let b = cool_toric(&model, 4, 20, Engine::Dense, 17).unwrap();
        assert_eq!(a.series.mean, b.series.mean);
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert_eq!(ra.rows, rb.rows);
        }
    }

    #[test]
    fn stationarity_test_behaviour() {
        let flat: Vec<f64> = (0..40).map(|i| 0.1 + 0.001 * ((i * 7 % 5) as f64)).collect();
        assert!(stationarity_pvalue(&flat).unwrap() > 0.01);
        let trend: Vec<f64> = (0..40).map(|i| 0.5 - 0.01 * i as f64).collect();
        assert!(stationarity_pvalue(&trend).unwrap() < 0.01);
    }
}
