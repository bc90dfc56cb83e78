//! Self-verification suite: every oracle-backed identity the engine
//! relies on, run as named checks with tolerances and measured values.
//! The CLI `verify` subcommand renders the report; a mutation hook
//! allows demonstrating that the checks actually bite.

use num_complex::Complex64;
use rand::Rng;

use crate::channels::{verify_small_parameter_reduction, JumpOperatorSpec};
use crate::dense::{embed_single, expm, identity, CMatrix};
use crate::error::Result;
use crate::gates::{mapping_g, mapping_g_imperfect, ub_sequence, ErrorModel, GateOp, GateSequence};
use crate::gauge::{constraint_terms, ring_exchange_terms, rk_terms};
use crate::lattice::build_toric;
use crate::pauli::{OperatorSum, Pauli, PauliString};
use crate::testutil::{matrix_of, rng};
use crate::toric::{cool_toric, Engine, ToricModel};

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    /// Threshold the measured value is compared against; the direction
    /// is part of the check (deviations must stay below, exponents and
    /// ratios must reach it).
    pub tolerance: f64,
    pub measured: f64,
    pub pass: bool,
}

impl CheckResult {
    fn below(name: &str, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            tolerance,
            measured,
            pass: measured < tolerance,
        }
    }

    fn at_least(name: &str, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            tolerance,
            measured,
            pass: measured >= tolerance,
        }
    }

    fn within_rel(name: &str, measured: f64, target: f64, rel: f64) -> Self {
        Self {
            name: name.into(),
            tolerance: target,
            measured,
            pass: (measured - target).abs() <= rel * target,
        }
    }
}

/// Optional fault injection for demonstrating check sensitivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mutation {
    #[default]
    None,
    /// Flip the sign of one coefficient in the ring-exchange
    /// decomposition before comparing.
    RingSignFlip(usize),
}

fn xxxx(n: usize) -> PauliString {
    PauliString::from_sites(
        n,
        &[(0, Pauli::X), (1, Pauli::X), (2, Pauli::X), (3, Pauli::X)],
    )
}

fn block(u: &CMatrix, row1: bool, dim: usize) -> CMatrix {
    let r0 = if row1 { dim } else { 0 };
    let mut out = CMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            out[(r, c)] = u[(r0 + r, c)];
        }
    }
    out
}

fn sequence_matrix(n: usize, seq: &GateSequence) -> CMatrix {
    let mut r = rng(0); // sequences here contain no measurements
    matrix_of(n, |s| {
        seq.apply(s, &mut r).unwrap();
    })
}

/// Mapping identity (perfect gates): G e^{i phi sigma_c^z} G acts as
/// exp(i phi A_p) on the control-|0> block, and the control returns to
/// |0> exactly. Returns the worst deviation over `samples` random
/// phases.
pub fn check_gate_identity(samples: usize, seed: u64) -> Result<CheckResult> {
    let region = xxxx(5);
    let a = xxxx(4).to_matrix()?;
    let g = mapping_g(4, &region)?;
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let phi = r.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let mut seq = GateSequence::new();
        seq.extend(g.clone());
        seq.push(GateOp::PhaseZ { q: 4, phi });
        seq.extend(g.clone());
        let u = sequence_matrix(5, &seq);
        let reference = expm(&a.map(|v| v * Complex64::new(0.0, phi)));
        worst = worst
            .max((block(&u, false, 16) - reference).norm())
            .max(block(&u, true, 16).norm());
    }
    Ok(CheckResult::below("gate_identity", worst, 1e-10))
}

/// Kraus pairs of all three dissipative variants are trace preserving:
/// A^dag A + B^dag B = 1.
pub fn check_kraus_cptp() -> Result<CheckResult> {
    let theta = 0.7;
    let specs = [
        JumpOperatorSpec::standard(4, 4, vec![0, 1, 2, 3], Pauli::X, Pauli::Z, theta)?,
        JumpOperatorSpec::octahedron(6, 6, [0, 1, 2, 3, 4, 5], theta)?,
        JumpOperatorSpec::rk(4, 4, [0, 1, 2, 3], theta)?,
    ];
    let mut worst: f64 = 0.0;
    for spec in &specs {
        let site = spec.region[0];
        let (a, b) = spec.kraus_pair(site)?;
        let dim = a.nrows();
        let defect = (crate::dense::dagger(&a) * &a + crate::dense::dagger(&b) * &b
            - identity(dim))
        .norm();
        worst = worst.max(defect);
    }
    Ok(CheckResult::below("kraus_cptp", worst, 1e-12))
}

/// Channel-minus-Lindblad defect scales better than theta^(2.7) per
/// theta^2 step (the o(theta^3) reduction, exponent on the defect of
/// the theta^2-scaled generator).
pub fn check_theta_scaling(seed: u64) -> Result<CheckResult> {
    let spec = JumpOperatorSpec::standard(4, 4, vec![0, 1, 2, 3], Pauli::X, Pauli::Z, 0.2)?;
    let report = verify_small_parameter_reduction(&spec, &[0.2, 0.1, 0.05], seed)?;
    Ok(CheckResult::at_least(
        "theta_scaling_exponent",
        report.exponent,
        2.7,
    ))
}

/// Kraus blocks of one imperfect coherent step (error Q = |Q| sigma^z
/// on the first spin, |Q| = 0.1) at a given phi.
pub fn imperfect_step_blocks(phi: f64) -> Result<(CMatrix, CMatrix)> {
    let region = xxxx(5);
    let error = ErrorModel::scaled_z(0.1);
    let g = mapping_g_imperfect(4, &region, phi, &error)?;
    let mut seq = GateSequence::new();
    seq.extend(g.clone());
    seq.push(GateOp::PhaseZ { q: 4, phi });
    seq.extend(g);
    let u = sequence_matrix(5, &seq);
    Ok((block(&u, false, 16), block(&u, true, 16)))
}

/// Third-order expansion checks for the imperfect coherent step: the
/// residuals of C against exp[i phi (A_p + Q)] - phi^2 Q^2 / 2 and of
/// D against -i phi Q + phi^2 (Q^2 - [A_p, Q]/2) both drop by a factor
/// of 8 (within 20%) when phi halves from 0.2 to 0.1. The bare
/// leading-order D ~ -i phi Q is reported as a separate smallness
/// check (its residual is second order, so it cannot drop by 8).
pub fn check_appendix_expansion() -> Result<Vec<CheckResult>> {
    let a = xxxx(4).to_matrix()?;
    let q = embed_single(4, 0, &Pauli::Z.matrix()).map(|v| v * 0.1);
    let residuals = |phi: f64| -> Result<(f64, f64, f64)> {
        let (c, d) = imperfect_step_blocks(phi)?;
        let iphi = Complex64::new(0.0, phi);
        let c_ref = expm(&((&a + &q).map(|v| v * iphi)))
            - (&q * &q).map(|v| v * (phi * phi / 2.0));
        let comm = &a * &q - &q * &a;
        let d_ref = q.map(|v| -v * iphi)
            + (&q * &q - comm.map(|v| v * 0.5)).map(|v| v * (phi * phi));
        let d_bare = (&d + &q.map(|v| v * iphi)).norm();
        Ok(((c - c_ref).norm(), (d - d_ref).norm(), d_bare))
    };
    let (c1, d1, bare1) = residuals(0.2)?;
    let (c2, d2, _) = residuals(0.1)?;
    Ok(vec![
        CheckResult::within_rel("appendix_a_c_ratio", c1 / c2, 8.0, 0.2),
        CheckResult::within_rel("appendix_a_d_ratio", d1 / d2, 8.0, 0.2),
        CheckResult::below("appendix_a_d_leading_order", bare1, 0.05),
    ])
}

/// Dense oracles for the operator decompositions: the constraint Ising
/// form, the eight-string ring-exchange and RK forms, the
/// half-projector identity, and the sixteen-factor U_B sequence.
pub fn check_decompositions(mutation: Mutation) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();

    // (S_o^z)^2 Ising form on the 64-dim octahedron space
    let sum = constraint_terms(6, &[0, 1, 2, 3, 4, 5]).to_matrix()?;
    let mut direct = CMatrix::zeros(64, 64);
    for b in 0..64usize {
        let s: i64 = (0..6).map(|l| if b >> l & 1 == 0 { 1 } else { -1 }).sum();
        direct[(b, b)] = Complex64::new((s * s) as f64, 0.0);
    }
    out.push(CheckResult::below(
        "constraint_ising_form",
        (sum - direct).norm(),
        1e-12,
    ));

    // B_p eight-string form against the raising/lowering ladder form
    let mut ring = ring_exchange_terms(4, &[0, 1, 2, 3]);
    if let Mutation::RingSignFlip(k) = mutation {
        let terms: Vec<(f64, PauliString)> = ring
            .terms()
            .iter()
            .enumerate()
            .map(|(i, (c, t))| (if i == k { -c } else { *c }, t.clone()))
            .collect();
        let mut mutated = OperatorSum::new(4);
        for (c, t) in terms {
            mutated.push(c, t);
        }
        ring = mutated;
    }
    let ring_dense = ring.to_matrix()?;
    let mut ladder = CMatrix::zeros(16, 16);
    for b in 0..16u32 {
        let alternating = |up_odd: bool| {
            (0..4).all(|i| (b >> i & 1 == 1) == (i % 2 == if up_odd { 0 } else { 1 }))
        };
        if alternating(true) || alternating(false) {
            ladder[((b ^ 0b1111) as usize, b as usize)] = Complex64::ONE;
        }
    }
    out.push(CheckResult::below(
        "ring_exchange_8term",
        (&ring_dense - &ladder).norm(),
        1e-12,
    ));

    // B_p^2 eight-string form
    let rk_dense = rk_terms(4, &[0, 1, 2, 3]).to_matrix()?;
    out.push(CheckResult::below(
        "rk_8term",
        (&ladder * &ladder - &rk_dense).norm(),
        1e-12,
    ));

    // 1/2 (1 - B) B = (1/16) [sum B^(j) - sum N^(j)]
    let lhs = (&ladder - &ladder * &ladder).map(|v| v * 0.5);
    let rhs = (&ring_dense - &rk_dense).map(|v| v * 0.5);
    out.push(CheckResult::below(
        "half_projector_identity",
        (lhs - rhs).norm(),
        1e-12,
    ));

    // U_B sixteen-factor sequence: control-|0> block equals
    // exp[i pi/2 (1 - B) B]
    let seq = ub_sequence(5, 4, &[0, 1, 2, 3], std::f64::consts::PI / 16.0)?;
    let u = sequence_matrix(5, &seq);
    let gen = (&ladder - &ladder * &ladder)
        .map(|v| v * Complex64::new(0.0, std::f64::consts::FRAC_PI_2));
    let reference = expm(&gen);
    let dev = (block(&u, false, 16) - reference)
        .norm()
        .max(block(&u, true, 16).norm());
    out.push(CheckResult::below("ub_sequence", dev, 1e-9));

    Ok(out)
}

/// Walker and dense toric engines agree on the final mean anyon
/// density within 3 combined standard errors at L=2.
pub fn check_engine_equivalence(seed: u64) -> Result<CheckResult> {
    let model = ToricModel::new(build_toric(2)?);
    let sweeps = 5;
    let trajectories = 300;
    let dense = cool_toric(&model, sweeps, trajectories, Engine::Dense, seed)?;
    let walker = cool_toric(&model, sweeps, trajectories, Engine::Walker, seed + 1)?;
    let md = *dense.series.mean.last().unwrap();
    let mw = *walker.series.mean.last().unwrap();
    let sd = *dense.series.stderr.last().unwrap();
    let sw = *walker.series.stderr.last().unwrap();
    let z = (md - mw).abs() / (sd * sd + sw * sw).sqrt().max(1e-12);
    Ok(CheckResult::below("engine_equivalence_z", z, 3.0))
}

/// Runs every check with a common seed.
pub fn run_all(seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = vec![
        check_gate_identity(20, seed)?,
        check_kraus_cptp()?,
        check_theta_scaling(seed)?,
    ];
    out.extend(check_appendix_expansion()?);
    out.extend(check_decompositions(Mutation::None)?);
    out.push(check_engine_equivalence(seed)?);
    Ok(out)
}

pub fn all_pass(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.pass)
}

/// One line per check: name, tolerance, measured value, PASS/FAIL.
pub fn format_report(results: &[CheckResult]) -> String {
    let mut s = String::new();
    for r in results {
        s.push_str(&format!(
            "{:<28} tol {:>10.3e}  measured {:>12.5e}  {}\n",
            r.name,
            r.tolerance,
            r.measured,
            if r.pass { "PASS" } else { "FAIL" }
        ));
    }
    s
}
