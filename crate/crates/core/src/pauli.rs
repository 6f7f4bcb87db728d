//! Weighted Pauli strings, Hamiltonians and their positivity shifts.
//!
//! A string over `N` sites is stored as an X-mask and a Z-mask: site `i`
//! maps to bit `i`, and the operator is `i^{|x & z|} X^x Z^z` so that a
//! site with both bits set is exactly `Y`. Site `i` is qubit `i` of any
//! statevector built from the string (little-endian, bit `i` of the
//! amplitude index).

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod dense;

/// Largest system (or register) size handled anywhere in the crate.
pub const MAX_SITES: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

impl TryFrom<char> for Pauli {
    type Error = Error;

    fn try_from(c: char) -> Result<Self> {
        match c {
            'I' | 'i' | '0' => Ok(Pauli::I),
            'X' | 'x' | '1' => Ok(Pauli::X),
            'Y' | 'y' | '2' => Ok(Pauli::Y),
            'Z' | 'z' | '3' => Ok(Pauli::Z),
            other => Err(Error::InvalidPauli(other)),
        }
    }
}

/// A power of `i`: one of `+1, +i, -1, -i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(e: u32) -> Self {
        Phase((e % 4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    len: usize,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(len: usize) -> Result<Self> {
        check_size(len)?;
        Ok(PauliString { len, x: 0, z: 0 })
    }

    pub fn from_ops(ops: &[Pauli]) -> Result<Self> {
        let mut s = Self::identity(ops.len())?;
        for (i, op) in ops.iter().enumerate() {
            s.set(i, *op);
        }
        Ok(s)
    }

    /// Builds a string with `op` on each listed site and identity elsewhere.
    pub fn with_ops_on(len: usize, sites: &[usize], op: Pauli) -> Result<Self> {
        let mut s = Self::identity(len)?;
        for &site in sites {
            if site >= len {
                return Err(Error::IndexOutOfRange {
                    index: site,
                    bound: len,
                });
            }
            s.set(site, op);
        }
        Ok(s)
    }

    pub fn from_masks(len: usize, x: u64, z: u64) -> Result<Self> {
        check_size(len)?;
        let m = mask(len);
        Ok(PauliString {
            len,
            x: x & m,
            z: z & m,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn op(&self, site: usize) -> Pauli {
        Pauli::from_bits(self.x >> site & 1 == 1, self.z >> site & 1 == 1)
    }

    pub fn set(&mut self, site: usize, op: Pauli) {
        let (x, z) = op.bits();
        let bit = 1u64 << site;
        self.x = if x { self.x | bit } else { self.x & !bit };
        self.z = if z { self.z | bit } else { self.z & !bit };
    }

    pub fn ops(&self) -> Vec<Pauli> {
        (0..self.len).map(|i| self.op(i)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Number of `Y` factors.
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// True when every factor is `I` or `Z`.
    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    /// Product `self * rhs = phase * result`, as matrices.
    pub fn multiply(&self, rhs: &PauliString) -> Result<(Phase, PauliString)> {
        check_len(self.len, rhs.len)?;
        let x = self.x ^ rhs.x;
        let z = self.z ^ rhs.z;
        // i^{y1} X^{x1} Z^{z1} i^{y2} X^{x2} Z^{z2}
        //   = i^{y1 + y2} (-1)^{|z1 & x2|} X^{x} Z^{z}, and X^x Z^z = i^{-y} P
        let e = self.y_count() + rhs.y_count() + 2 * (self.z & rhs.x).count_ones() + 4
            - (x & z).count_ones() % 4;
        Ok((
            Phase::from_exponent(e),
            PauliString {
                len: self.len,
                x,
                z,
            },
        ))
    }

    /// Strings commute iff they anticommute on an even number of sites.
    pub fn commutes_with(&self, rhs: &PauliString) -> Result<bool> {
        check_len(self.len, rhs.len)?;
        let anti = (self.x & rhs.z).count_ones() + (self.z & rhs.x).count_ones();
        Ok(anti.is_multiple_of(2))
    }

    /// Action on a computational basis state: `P|k> = phase |k ^ x>`.
    #[inline]
    pub fn apply_to_basis(&self, k: usize) -> (Complex64, usize) {
        let sign_flips = (self.z & k as u64).count_ones();
        let phase = Phase::from_exponent(self.y_count() + 2 * sign_flips);
        (phase.to_complex(), k ^ self.x as usize)
    }

    /// Conjugates the string into a rotated local basis, returning the sign
    /// picked up: `R^dag P R = sign * P'` with `R` the per-site rotation.
    pub fn rotated(&self, basis: &[LocalBasis]) -> Result<(f64, PauliString)> {
        check_len(self.len, basis.len())?;
        let mut out = *self;
        let mut sign = 1.0;
        for (site, b) in basis.iter().enumerate() {
            let (s, op) = b.conjugate(self.op(site));
            sign *= s;
            out.set(site, op);
        }
        Ok((sign, out))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", self.op(i).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ops = s
            .trim()
            .chars()
            .map(Pauli::try_from)
            .collect::<Result<Vec<_>>>()?;
        Self::from_ops(&ops)
    }
}

/// Free-function form of [`PauliString::multiply`].
pub fn multiply_strings(a: &PauliString, b: &PauliString) -> Result<(Phase, PauliString)> {
    a.multiply(b)
}

/// Single-site basis used to label chain basis states. `X` means the
/// product basis `|+>, |->`; `Y` means `|+i>, |-i>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocalBasis {
    #[default]
    Z,
    X,
    Y,
}

impl LocalBasis {
    /// `R^dag op R` where `R` maps `|0>, |1>` onto this basis
    /// (`R = 1`, `H`, `S H` respectively).
    pub fn conjugate(self, op: Pauli) -> (f64, Pauli) {
        match (self, op) {
            (_, Pauli::I) => (1.0, Pauli::I),
            (LocalBasis::Z, p) => (1.0, p),
            (LocalBasis::X, Pauli::X) => (1.0, Pauli::Z),
            (LocalBasis::X, Pauli::Z) => (1.0, Pauli::X),
            (LocalBasis::X, Pauli::Y) => (-1.0, Pauli::Y),
            (LocalBasis::Y, Pauli::X) => (1.0, Pauli::Y),
            (LocalBasis::Y, Pauli::Y) => (1.0, Pauli::Z),
            (LocalBasis::Y, Pauli::Z) => (1.0, Pauli::X),
        }
    }

    /// Single-qubit rotation `R` as a row-major 2x2 matrix.
    pub fn rotation(self) -> [[Complex64; 2]; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re: f64, im: f64| Complex64::new(re, im);
        match self {
            LocalBasis::Z => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]],
            LocalBasis::X => [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
            LocalBasis::Y => [[c(h, 0.0), c(h, 0.0)], [c(0.0, h), c(0.0, -h)]],
        }
    }
}

/// One term `h_b P_b` of the decomposition `H = sum_b h_b P_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTerm {
    coeff: f64,
    string: PauliString,
}

impl PauliTerm {
    pub fn new(coeff: f64, string: PauliString) -> Result<Self> {
        if !coeff.is_finite() || coeff == 0.0 {
            return Err(Error::InvalidCoefficient(coeff));
        }
        Ok(PauliTerm { coeff, string })
    }

    pub fn parse(coeff: f64, string: &str) -> Result<Self> {
        Self::new(coeff, string.parse()?)
    }

    pub fn coeff(&self) -> f64 {
        self.coeff
    }

    pub fn magnitude(&self) -> f64 {
        self.coeff.abs()
    }

    pub fn sign(&self) -> f64 {
        self.coeff.signum()
    }

    pub fn string(&self) -> &PauliString {
        &self.string
    }

    pub fn len(&self) -> usize {
        self.string.len()
    }

    pub fn is_empty(&self) -> bool {
        self.string.is_empty()
    }
}

/// Free-function form of the commutation test on two terms.
pub fn terms_commute(a: &PauliTerm, b: &PauliTerm) -> Result<bool> {
    a.string.commutes_with(&b.string)
}

/// How each term is shifted to make the SSE weights nonnegative.
///
/// `Commuting` adds `|h_b|` to each term, valid only when all strings
/// commute. `General` adds `factor * |h_b|` with `factor = 2M` by default,
/// where `M` is the expansion cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShiftMode {
    Commuting,
    General { cutoff: usize, factor: f64 },
}

impl ShiftMode {
    pub fn general(cutoff: usize) -> Self {
        ShiftMode::General {
            cutoff,
            factor: 2.0 * cutoff as f64,
        }
    }

    /// General shift with a user-chosen factor in place of `2M`.
    pub fn general_with_factor(cutoff: usize, factor: f64) -> Self {
        ShiftMode::General { cutoff, factor }
    }

    /// Multiple of `|h_b|` added to each term.
    pub fn factor(&self) -> f64 {
        match self {
            ShiftMode::Commuting => 1.0,
            ShiftMode::General { factor, .. } => *factor,
        }
    }

    pub fn is_general(&self) -> bool {
        matches!(self, ShiftMode::General { .. })
    }

    /// True when the factor is the `2M` value the positivity bound needs.
    pub fn is_proven_positive(&self) -> bool {
        match self {
            ShiftMode::Commuting => true,
            ShiftMode::General { cutoff, factor } => *factor >= 2.0 * *cutoff as f64,
        }
    }
}

/// The positive SSE Hamiltonian `H = -H' = sum_b h_b P_b` together with
/// its shift. Terms are indexed by `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    n_sites: usize,
    terms: Vec<PauliTerm>,
    shift_mode: ShiftMode,
}

impl Hamiltonian {
    pub fn new(n_sites: usize, terms: Vec<PauliTerm>, shift_mode: ShiftMode) -> Result<Self> {
        check_size(n_sites)?;
        for t in &terms {
            check_len(n_sites, t.len())?;
        }
        if let ShiftMode::General { cutoff, factor } = shift_mode {
            if cutoff == 0 || !factor.is_finite() || factor <= 0.0 {
                return Err(Error::InvalidModel(format!(
                    "general shift needs cutoff >= 1 and a positive factor (got {cutoff}, {factor})"
                )));
            }
        }
        let h = Hamiltonian {
            n_sites,
            terms,
            shift_mode,
        };
        if shift_mode == ShiftMode::Commuting {
            if let Some((a, b)) = h.first_noncommuting_pair() {
                return Err(Error::NonCommutingTerms(a, b));
            }
        }
        Ok(h)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn term(&self, b: usize) -> &PauliTerm {
        &self.terms[b]
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn shift_mode(&self) -> ShiftMode {
        self.shift_mode
    }

    pub fn shift_factor(&self) -> f64 {
        self.shift_mode.factor()
    }

    /// Total constant `k` added to the Hamiltonian by the shift.
    pub fn shift_constant(&self) -> f64 {
        self.shift_factor() * self.terms.iter().map(PauliTerm::magnitude).sum::<f64>()
    }

    pub fn all_commute(&self) -> bool {
        self.first_noncommuting_pair().is_none()
    }

    fn first_noncommuting_pair(&self) -> Option<(usize, usize)> {
        for (i, a) in self.terms.iter().enumerate() {
            for (j, b) in self.terms.iter().enumerate().skip(i + 1) {
                if !a.string.commutes_with(&b.string).unwrap_or(false) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Same terms under a different shift.
    pub fn with_shift_mode(&self, shift_mode: ShiftMode) -> Result<Self> {
        Self::new(self.n_sites, self.terms.clone(), shift_mode)
    }

    /// The Hamiltonian expressed in a rotated product basis: basis state
    /// `|alpha>` of the result corresponds to `R|alpha>` of `self`.
    pub fn in_basis(&self, basis: &[LocalBasis]) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let (sign, s) = t.string.rotated(basis)?;
                PauliTerm::new(sign * t.coeff, s)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.n_sites, terms, self.shift_mode)
    }

    pub fn to_document(&self) -> String {
        HamiltonianDoc::from(self).to_toml()
    }

    pub fn from_document(text: &str) -> Result<Self> {
        let doc: HamiltonianDoc = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        doc.try_into()
    }
}

/// Antiferromagnetic XX chain `H' = J sum_<jk> X_j X_k` in SSE form: one
/// term per bond with `h_b = -J`, so each shifted term is `J (1 - X X)`.
pub fn decompose_xx_chain(n_sites: usize, coupling: f64, periodic: bool) -> Result<Hamiltonian> {
    if n_sites < 2 {
        return Err(Error::InvalidModel(format!(
            "xx chain needs n_sites >= 2, got {n_sites}"
        )));
    }
    if !(coupling.is_finite() && coupling > 0.0) {
        return Err(Error::InvalidModel(format!(
            "xx chain needs J > 0, got {coupling}"
        )));
    }
    let mut bonds: Vec<(usize, usize)> = (0..n_sites - 1).map(|i| (i, i + 1)).collect();
    if periodic && n_sites > 2 {
        bonds.push((n_sites - 1, 0));
    }
    let terms = bonds
        .into_iter()
        .map(|(a, b)| {
            PauliTerm::new(
                -coupling,
                PauliString::with_ops_on(n_sites, &[a, b], Pauli::X)?,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Hamiltonian::new(n_sites, terms, ShiftMode::Commuting)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TermDoc {
    coeff: f64,
    string: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct HamiltonianDoc {
    n_sites: usize,
    shift_mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cutoff: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shift_factor: Option<f64>,
    #[serde(default, rename = "term")]
    terms: Vec<TermDoc>,
}

impl HamiltonianDoc {
    fn to_toml(&self) -> String {
        toml::to_string(self).expect("hamiltonian document serializes")
    }
}

impl From<&Hamiltonian> for HamiltonianDoc {
    fn from(h: &Hamiltonian) -> Self {
        let (shift_mode, cutoff, shift_factor) = match h.shift_mode {
            ShiftMode::Commuting => ("commuting".to_string(), None, None),
            ShiftMode::General { cutoff, factor } => {
                ("general".to_string(), Some(cutoff), Some(factor))
            }
        };
        HamiltonianDoc {
            n_sites: h.n_sites,
            shift_mode,
            cutoff,
            shift_factor,
            terms: h
                .terms
                .iter()
                .map(|t| TermDoc {
                    coeff: t.coeff,
                    string: t.string.to_string(),
                })
                .collect(),
        }
    }
}

impl TryFrom<HamiltonianDoc> for Hamiltonian {
    type Error = Error;

    fn try_from(doc: HamiltonianDoc) -> Result<Self> {
        let mode = match doc.shift_mode.as_str() {
            "commuting" => ShiftMode::Commuting,
            "general" => {
                let cutoff = doc.cutoff.ok_or_else(|| {
                    Error::Config("field `cutoff` is required for general shift".into())
                })?;
                match doc.shift_factor {
                    Some(f) => ShiftMode::general_with_factor(cutoff, f),
                    None => ShiftMode::general(cutoff),
                }
            }
            other => {
                return Err(Error::Config(format!(
                    "field `shift_mode`: expected \"commuting\" or \"general\", got {other:?}"
                )))
            }
        };
        let terms = doc
            .terms
            .iter()
            .map(|t| PauliTerm::parse(t.coeff, &t.string))
            .collect::<Result<Vec<_>>>()?;
        Hamiltonian::new(doc.n_sites, terms, mode)
    }
}

fn mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

fn check_size(len: usize) -> Result<()> {
    if len == 0 || len > MAX_SITES {
        Err(Error::UnsupportedSize(len))
    } else {
        Ok(())
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        Err(Error::LengthMismatch { expected, got })
    } else {
        Ok(())
    }
}
