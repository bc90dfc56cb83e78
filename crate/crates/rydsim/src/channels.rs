//! Dissipative steps as trajectory operations, dense Kraus/Lindblad
//! oracles, the Trotter sweep scheduler, and observable sampling.
//!
//! A dissipative step interrogates a many-body operator with the
//! control qubit, applies a controlled spin flip, undoes the
//! interrogation and pumps the control. Averaged over measurement
//! outcomes this realizes the channel rho -> A rho A^dag + B rho B^dag
//! with, for a unitary interrogation operator V and flip rotation
//! Theta = exp(i theta sigma_i),
//!
//!   A = 1/4 [ (1 + V^dag)(1 + V) + (1 - V^dag) Theta (1 - V) ]
//!   B = -1/4 [ (1 - V^dag)(1 + V) + (1 + V^dag) Theta (1 - V) ]
//!
//! which for small theta reduces to a Lindblad term with jump operator
//! c ~ sigma_i (1 - V)/2 and rate theta^2 / tau.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dense::{dagger, identity, CMatrix};
use crate::error::{Error, Result};
use crate::gates::{
    coherent_step, mapping_g, mapping_g_imperfect, single_site_rotation, ub_factors, ErrorModel,
    GateOp, GateSequence,
};
use crate::pauli::{OperatorSum, Pauli, PauliString, ORACLE_CAP};
use crate::statevec::StateVector;

const RESET_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpVariant {
    /// c = 1/2 sigma_i (1 - prod_j W_j): toric-code pump.
    Standard,
    /// Interrogation by prod_j exp(i pi/6 sigma_j^z) over six octahedron
    /// slots: dark states have three up and three down spins.
    OctahedronConstraint,
    /// Interrogation by exp(i pi/2 (1 - B_p) B_p) through the
    /// sixteen-factor sequence: pumps the -1 eigenspace of the ring
    /// exchange.
    RkProjector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlipSchedule {
    /// Flip target advances one region spin per sweep.
    RoundRobin,
    /// Flip target drawn uniformly each step.
    Randomized,
}

#[derive(Debug, Clone)]
pub struct JumpOperatorSpec {
    /// System site universe (dense oracles act on 2^n).
    pub n: usize,
    pub control: usize,
    /// Region sites in gate order; octahedron slots may repeat when a
    /// short periodic direction doubles a link.
    pub region: Vec<usize>,
    /// Interrogation letter for the standard variant.
    pub w: Pauli,
    /// Flip operator letter.
    pub flip: Pauli,
    pub theta: f64,
    pub variant: JumpVariant,
    /// Swaps (1 - prod W) for (1 + prod W): pumps into the -1 eigenspace.
    pub sign_flip: bool,
    pub schedule: FlipSchedule,
}

impl JumpOperatorSpec {
    pub fn standard(
        n: usize,
        control: usize,
        sites: Vec<usize>,
        w: Pauli,
        flip: Pauli,
        theta: f64,
    ) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::Domain("empty jump region".into()));
        }
        if sites.contains(&control) {
            return Err(Error::ControlInRegion(control));
        }
        if w == flip || w == Pauli::I || flip == Pauli::I {
            return Err(Error::Domain(
                "flip letter must differ from the interrogation letter".into(),
            ));
        }
        Ok(Self {
            n,
            control,
            region: sites,
            w,
            flip,
            theta,
            variant: JumpVariant::Standard,
            sign_flip: false,
            schedule: FlipSchedule::RoundRobin,
        })
    }

    pub fn octahedron(n: usize, control: usize, slots: [usize; 6], theta: f64) -> Result<Self> {
        if slots.contains(&control) {
            return Err(Error::ControlInRegion(control));
        }
        Ok(Self {
            n,
            control,
            region: slots.to_vec(),
            w: Pauli::Z,
            flip: Pauli::X,
            theta,
            variant: JumpVariant::OctahedronConstraint,
            sign_flip: false,
            schedule: FlipSchedule::RoundRobin,
        })
    }

    pub fn rk(n: usize, control: usize, plaquette: [usize; 4], theta: f64) -> Result<Self> {
        let mut sorted = plaquette;
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateTarget(w[0]));
        }
        if plaquette.contains(&control) {
            return Err(Error::ControlInRegion(control));
        }
        Ok(Self {
            n,
            control,
            region: plaquette.to_vec(),
            w: Pauli::X,
            flip: Pauli::Z,
            theta,
            variant: JumpVariant::RkProjector,
            sign_flip: false,
            schedule: FlipSchedule::RoundRobin,
        })
    }

    /// Distinct flip candidates in region order.
    pub fn flip_candidates(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for &s in &self.region {
            if !out.contains(&s) {
                out.push(s);
            }
        }
        out
    }

    pub fn flip_site<R: Rng>(&self, sweep: usize, rng: &mut R) -> usize {
        let cand = self.flip_candidates();
        match self.schedule {
            FlipSchedule::RoundRobin => cand[sweep % cand.len()],
            FlipSchedule::Randomized => cand[rng.random_range(0..cand.len())],
        }
    }

    fn plaquette_array(&self) -> [usize; 4] {
        [self.region[0], self.region[1], self.region[2], self.region[3]]
    }

    /// Gate sequence of one dissipative step, minus the final pump.
    /// Strings are sized to `n_total` qubits (system plus controls).
    pub fn step_sequence(
        &self,
        n_total: usize,
        flip_site: usize,
        error: &ErrorModel,
    ) -> Result<GateSequence> {
        if !self.flip_candidates().contains(&flip_site) {
            return Err(Error::Domain(format!(
                "flip site {flip_site} outside the jump region"
            )));
        }
        let mut seq = self.interrogation(n_total, false, error)?;
        seq.push(GateOp::ControlledDense {
            control: self.control,
            value: true,
            targets: vec![flip_site],
            u: single_site_rotation(self.flip, self.theta),
        });
        seq.extend(self.interrogation(n_total, true, error)?);
        Ok(seq)
    }

    /// Forward or inverse interrogation mapping. The gate error, when
    /// enabled, enters through the imperfect many-body gate of the
    /// standard variant; the expansion phase of the error term is theta.
    fn interrogation(
        &self,
        n_total: usize,
        inverse: bool,
        error: &ErrorModel,
    ) -> Result<GateSequence> {
        match self.variant {
            JumpVariant::Standard => {
                let mut ps = PauliString::uniform(n_total, &self.region, self.w);
                if self.sign_flip {
                    ps = ps.negate();
                }
                // Hermitian interrogation: the mapping is self-inverse
                // and the imperfect gate is replayed as-is.
                if error.enabled && error.magnitude() != 0.0 {
                    mapping_g_imperfect(self.control, &ps, self.theta, error)
                } else {
                    mapping_g(self.control, &ps)
                }
            }
            JumpVariant::OctahedronConstraint => {
                let sign = if inverse { -1.0 } else { 1.0 };
                let mut seq = GateSequence::new();
                seq.push(GateOp::ControlRotate {
                    q: self.control,
                    inverse: false,
                });
                seq.push(GateOp::ControlledZRotProduct {
                    control: self.control,
                    targets: self.region.clone(),
                    theta: sign * std::f64::consts::FRAC_PI_6,
                });
                seq.push(GateOp::ControlRotate {
                    q: self.control,
                    inverse: true,
                });
                Ok(seq)
            }
            JumpVariant::RkProjector => {
                let sign = if inverse { -1.0 } else { 1.0 };
                let per_factor = sign * std::f64::consts::PI / 32.0;
                let mut seq = GateSequence::new();
                seq.push(GateOp::ControlRotate {
                    q: self.control,
                    inverse: false,
                });
                for factor in ub_factors(n_total, &self.plaquette_array()) {
                    let g = mapping_g(self.control, &factor)?;
                    seq.extend(g.clone());
                    seq.push(GateOp::PhaseZ {
                        q: self.control,
                        phi: per_factor,
                    });
                    seq.extend(g);
                }
                seq.push(GateOp::ControlRotate {
                    q: self.control,
                    inverse: true,
                });
                Ok(seq)
            }
        }
    }

    /// Dense interrogation operator V on the 2^n system space.
    pub fn v_matrix(&self) -> Result<CMatrix> {
        if self.n > ORACLE_CAP {
            return Err(Error::OracleCapExceeded {
                qubits: self.n,
                cap: ORACLE_CAP,
            });
        }
        match self.variant {
            JumpVariant::Standard => {
                let mut ps = PauliString::uniform(self.n, &self.region, self.w);
                if self.sign_flip {
                    ps = ps.negate();
                }
                ps.to_matrix()
            }
            JumpVariant::OctahedronConstraint => {
                let dim = 1usize << self.n;
                let mut v = CMatrix::zeros(dim, dim);
                for b in 0..dim {
                    let mut m = 0i64;
                    for &slot in &self.region {
                        m += if b & (1 << slot) == 0 { 1 } else { -1 };
                    }
                    v[(b, b)] =
                        Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_6 * m as f64);
                }
                Ok(v)
            }
            JumpVariant::RkProjector => {
                let b = self.ring_exchange_matrix()?;
                // exp(i pi/2 (1-B)B) = 1 - 2 P_{-1}: B has spectrum {0, +-1}
                let dim = 1usize << self.n;
                let p_minus = (&b * &b - &b).scale(0.5);
                Ok(identity(dim) - p_minus.scale(2.0))
            }
        }
    }

    fn ring_exchange_matrix(&self) -> Result<CMatrix> {
        let dim = 1usize << self.n;
        let mut b = CMatrix::zeros(dim, dim);
        for (sign, letters) in crate::gates::ring_exchange_patterns() {
            let sites: Vec<(usize, Pauli)> = self
                .region
                .iter()
                .zip(letters)
                .map(|(&s, p)| (s, p))
                .collect();
            b += PauliString::from_sites(self.n, &sites)
                .to_matrix()?
                .scale(sign / 8.0);
        }
        Ok(b)
    }

    /// Dense Kraus pair (A, B) of one step with the given flip target;
    /// independent of the gate-sequence path.
    pub fn kraus_pair(&self, flip_site: usize) -> Result<(CMatrix, CMatrix)> {
        if !self.flip_candidates().contains(&flip_site) {
            return Err(Error::Domain(format!(
                "flip site {flip_site} outside the jump region"
            )));
        }
        let dim = 1usize << self.n;
        let v = self.v_matrix()?;
        let vd = dagger(&v);
        let one = identity(dim);
        let theta_rot = {
            let rot = single_site_rotation(self.flip, self.theta);
            let mut full = identity(dim);
            for b in 0..dim {
                for b2 in 0..dim {
                    // embed the single-site rotation on flip_site
                    let (rb, cb) = (b >> flip_site & 1, b2 >> flip_site & 1);
                    if b & !(1 << flip_site) == b2 & !(1 << flip_site) {
                        full[(b, b2)] = rot[(rb, cb)];
                    } else {
                        full[(b, b2)] = Complex64::ZERO;
                    }
                }
            }
            full
        };
        let plus = &one + &v;
        let minus = &one - &v;
        let plus_d = &one + &vd;
        let minus_d = &one - &vd;
        let a = (&plus_d * &plus + &minus_d * &theta_rot * &minus).scale(0.25);
        let b = (&minus_d * &plus + &plus_d * &theta_rot * &minus).scale(-0.25);
        Ok((a, b))
    }

    /// Lindblad jump operator c on the 2^n system space, normalized so
    /// the damping rate is theta^2 / tau.
    pub fn jump_operator_dense(&self, flip_site: usize) -> Result<CMatrix> {
        let dim = 1usize << self.n;
        let sigma = crate::dense::embed_single(self.n, flip_site, &self.flip.matrix());
        let one = identity(dim);
        match self.variant {
            JumpVariant::Standard => {
                let v = self.v_matrix()?;
                Ok((sigma * (one - v)).scale(0.5))
            }
            JumpVariant::OctahedronConstraint => {
                let v = self.v_matrix()?;
                let vd = dagger(&v);
                Ok(((&one + &vd) * sigma * (&one - &v)).scale(0.25))
            }
            JumpVariant::RkProjector => {
                let b = self.ring_exchange_matrix()?;
                Ok((sigma * (&b - &b * &b)).scale(0.5))
            }
        }
    }
}

/// One dissipative step on a trajectory state. Returns true when the
/// control measured |1> (a quantum jump).
pub fn dissipative_step<R: Rng>(
    state: &mut StateVector,
    spec: &JumpOperatorSpec,
    flip_site: usize,
    error: &ErrorModel,
    rng: &mut R,
) -> Result<bool> {
    if state.prob_one(spec.control)? > RESET_TOL {
        return Err(Error::ControlNotReset(spec.control));
    }
    let seq = spec.step_sequence(state.num_qubits(), flip_site, error)?;
    seq.apply(state, rng)?;
    Ok(state.measure_and_reset(spec.control, rng)? == 1)
}

/// Coherent Hamiltonian term: exp(i phase * op) per sweep. The coupling
/// energy is phase / tau (hbar = 1).
#[derive(Debug, Clone)]
pub struct HamTerm {
    /// Hermitian string on the system universe.
    pub op: PauliString,
    pub phase: f64,
}

/// Full stroboscopic model: coherent terms and jump specs with a common
/// step time tau and a sublattice-color schedule. Coupling energies
/// E = phase/tau and rates kappa = theta^2/tau are derived, never
/// stored, so the bookkeeping identities hold by construction.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    /// System qubits; the shared control is qubit `n`.
    pub n: usize,
    pub tau: f64,
    pub ham: Vec<HamTerm>,
    pub jumps: Vec<JumpOperatorSpec>,
    pub error: ErrorModel,
    /// Groups of `ham` indices, executed group by group.
    pub ham_schedule: Vec<Vec<usize>>,
    /// Groups of `jumps` indices.
    pub jump_schedule: Vec<Vec<usize>>,
}

impl ModelSpec {
    pub fn new(n: usize, tau: f64) -> Result<Self> {
        if tau <= 0.0 {
            return Err(Error::Domain("step time must be positive".into()));
        }
        Ok(Self {
            n,
            tau,
            ham: Vec::new(),
            jumps: Vec::new(),
            error: ErrorModel::disabled(),
            ham_schedule: Vec::new(),
            jump_schedule: Vec::new(),
        })
    }

    pub fn control(&self) -> usize {
        self.n
    }

    pub fn coupling_energy(&self, term: usize) -> f64 {
        self.ham[term].phase / self.tau
    }

    pub fn damping_rate(&self, jump: usize) -> f64 {
        let th = self.jumps[jump].theta;
        th * th / self.tau
    }

    /// Trivial schedule: every term in its own singleton group, in
    /// listed order.
    pub fn sequential_schedule(&mut self) {
        self.ham_schedule = (0..self.ham.len()).map(|i| vec![i]).collect();
        self.jump_schedule = (0..self.jumps.len()).map(|i| vec![i]).collect();
    }

    fn check_schedule(&self) -> Result<()> {
        for (schedule, count, what) in [
            (&self.ham_schedule, self.ham.len(), "hamiltonian"),
            (&self.jump_schedule, self.jumps.len(), "jump"),
        ] {
            let mut seen: Vec<usize> = schedule.iter().flatten().copied().collect();
            seen.sort_unstable();
            if seen != (0..count).collect::<Vec<_>>() {
                return Err(Error::ScheduleMismatch(format!(
                    "{what} schedule must cover each of {count} terms exactly once"
                )));
            }
        }
        Ok(())
    }
}

fn pad_string(ps: &PauliString, n_total: usize) -> PauliString {
    let sites: Vec<(usize, Pauli)> = ps.support().iter().map(|&s| (s, ps.letter(s))).collect();
    let mut out = PauliString::from_sites(n_total, &sites);
    if ps.phase().re < 0.0 {
        out = out.negate();
    }
    out
}

/// Record of a single trajectory: observable samples and jump events
/// with monotone time stamps.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub rows: Vec<(f64, String, f64)>,
    pub jump_log: Vec<(f64, usize)>,
    last_time: f64,
}

impl TrajectoryRecord {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rows: Vec::new(),
            jump_log: Vec::new(),
            last_time: f64::NEG_INFINITY,
        }
    }

    pub fn push_row(&mut self, time: f64, name: &str, value: f64) {
        assert!(time >= self.last_time, "time stamps must be monotone");
        self.last_time = time;
        self.rows.push((time, name.to_string(), value));
    }

    pub fn log_jump(&mut self, time: f64, jump_index: usize) {
        assert!(time >= self.last_time, "time stamps must be monotone");
        self.jump_log.push((time, jump_index));
    }
}

/// One Trotter sweep: every coherent step, then every dissipative step,
/// each exactly once in schedule order. Returns the indices of jumps
/// that fired. Wall-clock time advances by `model.tau` per sweep.
pub fn trotter_sweep<R: Rng>(
    state: &mut StateVector,
    model: &ModelSpec,
    sweep: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    model.check_schedule()?;
    let n_total = state.num_qubits();
    let control = model.control();
    for group in &model.ham_schedule {
        for &idx in group {
            let term = &model.ham[idx];
            let op = pad_string(&term.op, n_total);
            coherent_step(state, control, &op, term.phase, &model.error, rng)?;
        }
    }
    let mut fired = Vec::new();
    for group in &model.jump_schedule {
        for &idx in group {
            let spec = &model.jumps[idx];
            let site = spec.flip_site(sweep, rng);
            if dissipative_step(state, spec, site, &model.error, rng)? {
                fired.push(idx);
            }
        }
    }
    Ok(fired)
}

/// Evaluates the Lindblad generator of the model on a density matrix
/// over the 2^n system space:
/// L(rho) = -i[H, rho] + sum_b kappa_b (c rho c^dag - {c^dag c, rho}/2).
/// Flip targets follow the same per-sweep schedule as the sweeps.
pub fn lindblad_apply(model: &ModelSpec, rho: &CMatrix, sweep: usize) -> Result<CMatrix> {
    if model.n > ORACLE_CAP {
        return Err(Error::OracleCapExceeded {
            qubits: model.n,
            cap: ORACLE_CAP,
        });
    }
    let dim = 1usize << model.n;
    let mut out = CMatrix::zeros(dim, dim);
    if !model.ham.is_empty() {
        let mut h = OperatorSum::new(model.n);
        for (i, term) in model.ham.iter().enumerate() {
            h.push(model.coupling_energy(i), term.op.clone());
        }
        let h = h.to_matrix()?;
        let comm = &h * rho - rho * &h;
        out += comm.map(|v| v * Complex64::new(0.0, -1.0));
    }
    // round-robin targets are deterministic, so a plain RNG stand-in is
    // never consulted for the default schedule
    let mut rng = ChaCha8Rng::seed_from_u64(sweep as u64);
    for (i, spec) in model.jumps.iter().enumerate() {
        let c = spec.jump_operator_dense(spec.flip_site(sweep, &mut rng))?;
        let cd = dagger(&c);
        let cdc = &cd * &c;
        let gain = &c * rho * cd;
        let loss = (&cdc * rho + rho * &cdc).scale(0.5);
        out += (gain - loss).scale(model.damping_rate(i));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ScalingReport {
    pub thetas: Vec<f64>,
    pub defects: Vec<f64>,
    /// Least-squares slope of log defect against log theta.
    pub exponent: f64,
}

/// Measures how fast one dissipative step approaches its Lindblad
/// limit: defect(theta) = || channel(rho) - rho - tau L(rho) || on a
/// fixed random density matrix, fitted on a log-log scale.
pub fn verify_small_parameter_reduction(
    spec: &JumpOperatorSpec,
    thetas: &[f64],
    seed: u64,
) -> Result<ScalingReport> {
    if thetas.len() < 2 || thetas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain(
            "need at least two strictly decreasing theta values".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho = random_density(spec.n, &mut rng);
    let flip = spec.flip_candidates()[0];
    let mut defects = Vec::new();
    for &theta in thetas {
        let mut s = spec.clone();
        s.theta = theta;
        let (a, b) = s.kraus_pair(flip)?;
        let channel = &a * &rho * dagger(&a) + &b * &rho * dagger(&b);
        // tau L(rho) with kappa = theta^2/tau: tau cancels
        let c = s.jump_operator_dense(flip)?;
        let cd = dagger(&c);
        let cdc = &cd * &c;
        let lind = ((&c * &rho * cd) - (&cdc * &rho + &rho * &cdc).scale(0.5))
            .scale(theta * theta);
        defects.push((channel - &rho - lind).norm());
    }
    let xs: Vec<f64> = thetas.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = defects.iter().map(|d| d.max(1e-300).ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(ScalingReport {
        thetas: thetas.to_vec(),
        defects,
        exponent: num / den,
    })
}

fn random_density<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let dim = 1usize << n;
    let mut rho = CMatrix::zeros(dim, dim);
    let weights = [0.5, 0.3, 0.2];
    for w in weights {
        let amps: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let v = nalgebra::DVector::from_vec(amps);
        let v = v.scale(1.0 / v.norm());
        rho += (&v * v.adjoint()).scale(w);
    }
    rho
}

/// Per-trajectory RNG stream: a fixed function of the master seed and
/// the trajectory id, independent of worker scheduling.
pub fn trajectory_rng(master_seed: u64, trajectory_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trajectory_id.wrapping_add(1));
    rng
}

/// Samples the +-1 eigenvalues of pairwise commuting Hermitian regions,
/// collapsing the state per the Born rule; the physical realization is
/// the mapping G followed by a control measurement.
pub fn sample_observables<R: Rng>(
    state: &mut StateVector,
    regions: &[PauliString],
    rng: &mut R,
) -> Result<Vec<i8>> {
    for (i, a) in regions.iter().enumerate() {
        for b in regions.iter().skip(i + 1) {
            if !a.commutes(b)? {
                return Err(Error::NonCommutingRegions);
            }
        }
    }
    let n_total = state.num_qubits();
    regions
        .iter()
        .map(|r| state.sample_eigenvalue(&pad_string(r, n_total), rng))
        .collect()
}
