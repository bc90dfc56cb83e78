//! Signed multi-site Pauli operators and small operator sums.
//!
//! `PauliString` is the common currency for stabilizers, Hamiltonian
//! terms and jump-operator building blocks. Strings carry an exact
//! phase from {+1, +i, -1, -i} and a fixed site universe, so products
//! and commutation checks are exact. `to_matrix` provides the dense
//! realization used by the small-system oracles.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense matrices above this qubit count are refused.
pub const ORACLE_CAP: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// Single-site product `self * other` as (i-power, result letter).
    fn mul(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (X, X) | (Y, Y) | (Z, Z) => (0, I),
            (X, Y) => (1, Z),
            (Y, X) => (3, Z),
            (Y, Z) => (1, X),
            (Z, Y) => (3, X),
            (Z, X) => (1, Y),
            (X, Z) => (3, Y),
        }
    }

    pub fn matrix(self) -> DMatrix<Complex64> {
        let z = Complex64::ZERO;
        let one = Complex64::ONE;
        let i = Complex64::I;
        let e = match self {
            Pauli::I => [one, z, z, one],
            Pauli::X => [z, one, one, z],
            Pauli::Y => [z, -i, i, z],
            Pauli::Z => [one, z, z, -one],
        };
        DMatrix::from_row_slice(2, 2, &e)
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Signed Pauli product over a fixed number of sites.
///
/// Site index 0 is the least significant bit of a basis-state label;
/// bit 0 encodes "spin up" (sigma^z = +1).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    /// Phase exponent k, the overall factor being i^k.
    phase_pow: u8,
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self {
            phase_pow: 0,
            letters: vec![Pauli::I; n],
        }
    }

    pub fn single(n: usize, site: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.letters[site] = p;
        s
    }

    pub fn from_sites(n: usize, sites: &[(usize, Pauli)]) -> Self {
        let mut s = Self::identity(n);
        for &(site, p) in sites {
            let (k, r) = s.letters[site].mul(p);
            s.phase_pow = (s.phase_pow + k) % 4;
            s.letters[site] = r;
        }
        s
    }

    /// Uniform letter on every listed site, e.g. the X-string of a plaquette.
    pub fn uniform(n: usize, sites: &[usize], p: Pauli) -> Self {
        Self::from_sites(n, &sites.iter().map(|&s| (s, p)).collect::<Vec<_>>())
    }

    pub fn num_sites(&self) -> usize {
        self.letters.len()
    }

    pub fn letter(&self, site: usize) -> Pauli {
        self.letters[site]
    }

    pub fn phase(&self) -> Complex64 {
        match self.phase_pow {
            0 => Complex64::ONE,
            1 => Complex64::I,
            2 => -Complex64::ONE,
            _ => -Complex64::I,
        }
    }

    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    /// Hermitian iff the phase is real.
    pub fn is_hermitian(&self) -> bool {
        self.phase_pow % 2 == 0
    }

    pub fn negate(&self) -> Self {
        let mut s = self.clone();
        s.phase_pow = (s.phase_pow + 2) % 4;
        s
    }

    /// Exact group product with phase tracking.
    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        if self.num_sites() != other.num_sites() {
            return Err(Error::SiteUniverseMismatch(
                self.num_sites(),
                other.num_sites(),
            ));
        }
        let mut phase = (self.phase_pow + other.phase_pow) % 4;
        let mut letters = Vec::with_capacity(self.letters.len());
        for (&a, &b) in self.letters.iter().zip(&other.letters) {
            let (k, r) = a.mul(b);
            phase = (phase + k) % 4;
            letters.push(r);
        }
        Ok(PauliString {
            phase_pow: phase,
            letters,
        })
    }

    /// Symplectic commutation test: strings commute iff the number of
    /// sites with distinct non-identity letters is even.
    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        if self.num_sites() != other.num_sites() {
            return Err(Error::SiteUniverseMismatch(
                self.num_sites(),
                other.num_sites(),
            ));
        }
        let odd = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        Ok(odd % 2 == 0)
    }

    /// Bit-mask form: `P = c * prod_j X_j^{x_j} Z_j^{z_j}` with
    /// `c = phase * i^{#Y}`; the action on a basis state |b> is
    /// `c * (-1)^{popcount(z & b)} |b ^ x>`.
    pub fn masks(&self) -> (u64, u64, Complex64) {
        assert!(self.num_sites() <= 64, "mask form limited to 64 sites");
        let mut x = 0u64;
        let mut z = 0u64;
        let mut ypow = 0u8;
        for (j, &p) in self.letters.iter().enumerate() {
            match p {
                Pauli::I => {}
                Pauli::X => x |= 1 << j,
                Pauli::Z => z |= 1 << j,
                Pauli::Y => {
                    x |= 1 << j;
                    z |= 1 << j;
                    ypow = (ypow + 1) % 4;
                }
            }
        }
        let c = self.phase()
            * match ypow {
                0 => Complex64::ONE,
                1 => Complex64::I,
                2 => -Complex64::ONE,
                _ => -Complex64::I,
            };
        (x, z, c)
    }

    /// Dense 2^n x 2^n matrix under the fixed qubit-ordering convention.
    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        let n = self.num_sites();
        if n > ORACLE_CAP {
            return Err(Error::OracleCapExceeded {
                qubits: n,
                cap: ORACLE_CAP,
            });
        }
        let dim = 1usize << n;
        let (x, z, c) = self.masks();
        let mut m = DMatrix::zeros(dim, dim);
        for b in 0..dim as u64 {
            let sign = if ((z & b).count_ones() % 2) == 0 {
                1.0
            } else {
                -1.0
            };
            m[((b ^ x) as usize, b as usize)] = c * sign;
        }
        Ok(m)
    }
}

impl fmt::Display for PauliString {
    /// Canonical text form, e.g. `+1 X3 X7 X12 X14` or `-i Z0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let phase = match self.phase_pow {
            0 => "+1",
            1 => "+i",
            2 => "-1",
            _ => "-i",
        };
        write!(f, "{phase}")?;
        let mut any = false;
        for (site, &p) in self.letters.iter().enumerate() {
            if p != Pauli::I {
                write!(f, " {}{}", p.letter(), site)?;
                any = true;
            }
        }
        if !any {
            write!(f, " I")?;
        }
        Ok(())
    }
}

/// Parses the canonical text form; the site universe is inferred from
/// the largest site index unless the string is pure identity.
impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut tokens = s.split_whitespace();
        let phase_pow = match tokens.next() {
            Some("+1") => 0,
            Some("+i") => 1,
            Some("-1") => 2,
            Some("-i") => 3,
            other => return Err(Error::Parse(format!("bad phase token {other:?}"))),
        };
        let mut sites = Vec::new();
        let mut max_site = 0usize;
        for tok in tokens {
            if tok == "I" {
                continue;
            }
            let (letter, idx) = tok.split_at(1);
            let p = match letter {
                "X" => Pauli::X,
                "Y" => Pauli::Y,
                "Z" => Pauli::Z,
                _ => return Err(Error::Parse(format!("bad letter token {tok:?}"))),
            };
            let site: usize = idx
                .parse()
                .map_err(|_| Error::Parse(format!("bad site index {tok:?}")))?;
            max_site = max_site.max(site);
            sites.push((site, p));
        }
        let n = if sites.is_empty() { 1 } else { max_site + 1 };
        let mut ps = PauliString::from_sites(n, &sites);
        ps.phase_pow = (ps.phase_pow + phase_pow) % 4;
        Ok(ps)
    }
}

/// Real-weighted sum of Pauli strings, e.g. the Ising decomposition of
/// an octahedron constraint or the eight-term form of a ring exchange.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSum {
    n: usize,
    terms: Vec<(f64, PauliString)>,
}

impl OperatorSum {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            terms: Vec::new(),
        }
    }

    pub fn from_terms(n: usize, terms: Vec<(f64, PauliString)>) -> Self {
        for (c, t) in &terms {
            assert_eq!(t.num_sites(), n);
            assert!(c.is_finite());
        }
        Self { n, terms }
    }

    pub fn push(&mut self, coeff: f64, ps: PauliString) {
        assert_eq!(ps.num_sites(), self.n);
        assert!(coeff.is_finite());
        self.terms.push((coeff, ps));
    }

    pub fn num_sites(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn is_hermitian(&self) -> bool {
        self.terms.iter().all(|(_, t)| t.is_hermitian())
    }

    /// Largest absolute coefficient; the |Q| of an error operator.
    pub fn magnitude(&self) -> f64 {
        self.terms
            .iter()
            .map(|(c, _)| c.abs())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(c, t)| (c * factor, t.clone()))
                .collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        if self.n > ORACLE_CAP {
            return Err(Error::OracleCapExceeded {
                qubits: self.n,
                cap: ORACLE_CAP,
            });
        }
        let dim = 1usize << self.n;
        let mut m = DMatrix::zeros(dim, dim);
        for (c, t) in &self.terms {
            m += t.to_matrix()?.scale(*c);
        }
        Ok(m)
    }
}
