//! Dense matrices for Pauli strings, terms and Hamiltonians.
//!
//! These are built from explicit 2x2 Kronecker products and never touch the
//! bitmask kernels, so they serve as the independent oracle for everything
//! else in the crate.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Hamiltonian, Pauli, PauliString, PauliTerm};
use crate::error::{Error, Result};

/// Largest site count the dense oracle accepts.
pub const DENSE_MAX_SITES: usize = 12;

pub type CMatrix = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn single_site(op: Pauli) -> CMatrix {
    let o = c(0.0, 0.0);
    let l = c(1.0, 0.0);
    let data = match op {
        Pauli::I => [l, o, o, l],
        Pauli::X => [o, l, l, o],
        Pauli::Y => [o, c(0.0, -1.0), c(0.0, 1.0), o],
        Pauli::Z => [l, o, o, -l],
    };
    DMatrix::from_row_slice(2, 2, &data)
}

fn check_budget(n: usize) -> Result<()> {
    if n > DENSE_MAX_SITES {
        Err(Error::DenseBudget {
            max: DENSE_MAX_SITES,
            got: n,
        })
    } else {
        Ok(())
    }
}

/// `op_{N-1} (x) ... (x) op_0`, so site `i` acts on bit `i` of the index.
pub fn string_matrix(s: &PauliString) -> Result<CMatrix> {
    check_budget(s.len())?;
    let mut m = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for site in (0..s.len()).rev() {
        m = m.kronecker(&single_site(s.op(site)));
    }
    Ok(m)
}

/// `h P + shift * |h| * 1` when `shifted`, else `h P`.
pub fn term_matrix(t: &PauliTerm, shift_factor: f64, shifted: bool) -> Result<CMatrix> {
    let mut m = string_matrix(t.string())? * c(t.coeff(), 0.0);
    if shifted {
        let dim = m.nrows();
        m += CMatrix::identity(dim, dim) * c(shift_factor * t.magnitude(), 0.0);
    }
    Ok(m)
}

/// Things that can be turned into a dense matrix.
pub trait DenseOperator {
    fn dense_matrix(&self, shifted: bool) -> Result<CMatrix>;
}

impl DenseOperator for PauliTerm {
    /// A lone term uses the commuting shift `|h_b|`.
    fn dense_matrix(&self, shifted: bool) -> Result<CMatrix> {
        term_matrix(self, 1.0, shifted)
    }
}

impl DenseOperator for Hamiltonian {
    fn dense_matrix(&self, shifted: bool) -> Result<CMatrix> {
        check_budget(self.n_sites())?;
        let dim = 1usize << self.n_sites();
        let mut m = CMatrix::zeros(dim, dim);
        for t in self.terms() {
            m += term_matrix(t, self.shift_factor(), shifted)?;
        }
        Ok(m)
    }
}

impl Hamiltonian {
    /// Dense matrix of the single term `H_b` under this Hamiltonian's shift.
    pub fn dense_term(&self, b: usize, shifted: bool) -> Result<CMatrix> {
        term_matrix(self.term(b), self.shift_factor(), shifted)
    }
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// `<alpha| H_{b_n} ... H_{b_1} |alpha>` by dense matrix products, with
/// `string[0]` = `b_1` acting first.
pub fn string_expectation(h: &Hamiltonian, string: &[usize], alpha: usize) -> Result<Complex64> {
    check_budget(h.n_sites())?;
    let dim = 1usize << h.n_sites();
    let mut v = nalgebra::DVector::<Complex64>::zeros(dim);
    v[alpha] = c(1.0, 0.0);
    for &b in string {
        v = h.dense_term(b, true)? * v;
    }
    Ok(v[alpha])
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
