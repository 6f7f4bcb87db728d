//! Estimates from chain traces, plus dense and enumerated references.

use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::circuit::{BasisState, StateVector};
use crate::engine::ChainTrace;
use crate::error::{Error, Result};
use crate::pauli::dense::{term_matrix, CMatrix, DENSE_MAX_SITES};
use crate::pauli::{Hamiltonian, LocalBasis, PauliString};

pub const BATCHES: usize = 100;

/// Largest `2^N * sum_{n<=M} K^n` the enumeration will walk.
pub const ENUMERATION_BUDGET: u128 = 50_000_000;

/// Largest site count for the thermal oracle.
pub const ORACLE_MAX_SITES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorResult {
    pub name: String,
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

impl fmt::Display for EstimatorResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} = {} +/- {} ({} samples)",
            self.name, self.mean, self.std_error, self.n_samples
        )
    }
}

/// Mean and batch-means standard error. Uses up to [`BATCHES`] batches of
/// equal size; trailing samples that do not fill a batch still count toward
/// the mean.
pub fn batch_means(samples: &[f64]) -> (f64, f64) {
    let len = samples.len();
    if len == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / len as f64;
    let batches = BATCHES.min(len);
    if batches < 2 {
        return (mean, 0.0);
    }
    let size = len / batches;
    let means: Vec<f64> = samples
        .chunks_exact(size)
        .take(batches)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let bm = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - bm).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (mean, (var / batches as f64).sqrt())
}

fn window(trace: &ChainTrace) -> Result<&[crate::engine::TraceRecord]> {
    let w = trace.post_burn_in();
    if w.is_empty() {
        Err(Error::EmptyWindow)
    } else {
        Ok(w)
    }
}

/// `E = k - <n>/beta` over the post-burn-in window, with `k` the shift
/// constant (`N J` for the XX chain).
pub fn energy_estimate(
    trace: &ChainTrace,
    beta: f64,
    shift_constant: f64,
) -> Result<EstimatorResult> {
    let ns: Vec<f64> = window(trace)?.iter().map(|r| r.n as f64).collect();
    let (mean_n, se_n) = batch_means(&ns);
    Ok(EstimatorResult {
        name: "energy".into(),
        mean: shift_constant - mean_n / beta,
        std_error: se_n / beta,
        n_samples: ns.len(),
    })
}

/// Average expansion order over the post-burn-in window.
pub fn order_estimate(trace: &ChainTrace) -> Result<EstimatorResult> {
    let ns: Vec<f64> = window(trace)?.iter().map(|r| r.n as f64).collect();
    let (mean, std_error) = batch_means(&ns);
    Ok(EstimatorResult {
        name: "mean_order".into(),
        mean,
        std_error,
        n_samples: ns.len(),
    })
}

/// An observable diagonal in the chain basis, stored as `<alpha|O|alpha>`
/// for every bit pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalObservable {
    name: String,
    n_sites: usize,
    values: Vec<f64>,
}

impl DiagonalObservable {
    pub fn from_fn(name: &str, n_sites: usize, f: impl Fn(BasisState) -> f64) -> Result<Self> {
        if n_sites > crate::pauli::MAX_SITES {
            return Err(Error::UnsupportedSize(n_sites));
        }
        let values: Vec<f64> = BasisState::all(n_sites).map(f).collect();
        if let Some(&v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidCoefficient(v));
        }
        Ok(DiagonalObservable {
            name: name.into(),
            n_sites,
            values,
        })
    }

    pub fn identity(n_sites: usize) -> Result<Self> {
        Self::from_fn("identity", n_sites, |_| 1.0)
    }

    /// `Z` on one site; `|0>` has eigenvalue `+1`.
    pub fn pauli_z(n_sites: usize, site: usize) -> Result<Self> {
        if site >= n_sites {
            return Err(Error::IndexOutOfRange {
                index: site,
                bound: n_sites,
            });
        }
        Self::from_fn(&format!("z{site}"), n_sites, |a| {
            if a.bit(site) {
                -1.0
            } else {
                1.0
            }
        })
    }

    pub fn projector(state: BasisState) -> Result<Self> {
        Self::from_fn(&format!("proj_{state}"), state.len(), |a| {
            if a == state {
                1.0
            } else {
                0.0
            }
        })
    }

    /// A Pauli string made only of `I` and `Z`.
    pub fn from_pauli(string: &PauliString) -> Result<Self> {
        if !string.is_diagonal() {
            return Err(Error::InvalidModel(format!("{string} is not diagonal")));
        }
        Self::from_fn(&string.to_string(), string.len(), |a| {
            string.apply_to_basis(a.index()).0.re
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn value(&self, alpha: BasisState) -> f64 {
        self.values[alpha.index()]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_matrix(&self) -> CMatrix {
        CMatrix::from_diagonal(&DVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&v| Complex64::new(v, 0.0)),
        ))
    }
}

/// Mean of `<alpha|O|alpha>` over the visited post-burn-in `alpha`.
pub fn diagonal_estimate(trace: &ChainTrace, obs: &DiagonalObservable) -> Result<EstimatorResult> {
    let w = window(trace)?;
    if let Some(r) = w.first() {
        if r.alpha.len() != obs.n_sites {
            return Err(Error::LengthMismatch {
                expected: obs.n_sites,
                got: r.alpha.len(),
            });
        }
    }
    let xs: Vec<f64> = w.iter().map(|r| obs.value(r.alpha)).collect();
    let (mean, std_error) = batch_means(&xs);
    Ok(EstimatorResult {
        name: obs.name.clone(),
        mean,
        std_error,
        n_samples: xs.len(),
    })
}

/// `|phi><phi|` as a diagonal observable, for `phi` a basis state of the
/// chain basis. `basis` gives the per-site frame the chain runs in (the one
/// passed to [`Hamiltonian::in_basis`]); `phi` is given in the computational
/// frame and rotated into it.
pub fn overlap_observable(phi: &StateVector, basis: &[LocalBasis]) -> Result<DiagonalObservable> {
    if phi.n_ancilla() != 0 {
        return Err(Error::NotABasisState);
    }
    let n = phi.n_system();
    if basis.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: basis.len(),
        });
    }
    let mut psi = phi.clone();
    for (q, b) in basis.iter().enumerate() {
        let u = b.rotation();
        let dagger = [
            [u[0][0].conj(), u[1][0].conj()],
            [u[0][1].conj(), u[1][1].conj()],
        ];
        psi.apply_single(q, dagger)?;
    }
    let norm = psi.norm_sqr();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotABasisState);
    }
    let (idx, amp) = psi
        .amplitudes()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm_sqr().partial_cmp(&b.1.norm_sqr()).unwrap())
        .ok_or(Error::NotABasisState)?;
    if (amp.norm_sqr() - 1.0).abs() > 1e-9 {
        return Err(Error::NotABasisState);
    }
    let label = BasisState::new(n, idx as u64)?;
    let mut obs = DiagonalObservable::projector(label)?;
    obs.name = format!("overlap_{label}");
    Ok(obs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalValue {
    pub expectation: f64,
    pub partition: f64,
}

/// The physical Hamiltonian `H' = -sum_b h_b P_b` as a dense matrix.
pub fn physical_matrix(h: &Hamiltonian) -> Result<CMatrix> {
    if h.n_sites() > ORACLE_MAX_SITES.max(DENSE_MAX_SITES) {
        return Err(Error::DenseBudget {
            max: ORACLE_MAX_SITES,
            got: h.n_sites(),
        });
    }
    let dim = 1usize << h.n_sites();
    let mut m = CMatrix::zeros(dim, dim);
    for t in h.terms() {
        m -= term_matrix(t, 0.0, false)?;
    }
    Ok(m)
}

/// `Tr(O e^{-beta H'}) / Z` and `Z` by dense eigendecomposition.
pub fn exact_thermal_oracle(h: &Hamiltonian, beta: f64, obs: &CMatrix) -> Result<ThermalValue> {
    if h.n_sites() > ORACLE_MAX_SITES {
        return Err(Error::DenseBudget {
            max: ORACLE_MAX_SITES,
            got: h.n_sites(),
        });
    }
    let dim = 1usize << h.n_sites();
    if obs.shape() != (dim, dim) {
        return Err(Error::ShapeMismatch(dim, dim, obs.nrows(), obs.ncols()));
    }
    let eig = physical_matrix(h)?.symmetric_eigen();
    let mut num = 0.0;
    let mut z = 0.0;
    for (k, &e) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let w = (-beta * e).exp();
        num += w * (v.adjoint() * obs * v)[(0, 0)].re;
        z += w;
    }
    Ok(ThermalValue {
        expectation: num / z,
        partition: z,
    })
}

/// Thermal energy `Tr(H' e^{-beta H'}) / Z`.
pub fn exact_thermal_energy(h: &Hamiltonian, beta: f64) -> Result<f64> {
    let m = physical_matrix(h)?;
    Ok(exact_thermal_oracle(h, beta, &m)?.expectation)
}

/// Ground-state energy of `H'`.
pub fn ground_energy(h: &Hamiltonian) -> Result<f64> {
    let m = physical_matrix(h)?;
    Ok(crate::pauli::dense::hermitian_eigenvalues(&m)[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignCorrected {
    /// `sum_C f(O,C) p_C / sum_C p_C`.
    pub expectation: f64,
    /// `sum_C p_C / sum_C |p_C|`.
    pub s_corr: f64,
    /// Number of configurations with `p_C < 0`.
    pub negative: usize,
    pub configurations: usize,
}

fn enumeration_size(n_sites: usize, n_terms: usize, cutoff: usize) -> u128 {
    let mut total: u128 = 0;
    let mut pow: u128 = 1;
    for _ in 0..=cutoff {
        total = total.saturating_add(pow);
        pow = pow.saturating_mul(n_terms as u128);
    }
    total.saturating_mul(1u128 << n_sites)
}

/// Walks every configuration `(alpha, b_1..b_n)` with `n <= cutoff` for the
/// terms `H_b = h_b P_b + shift |h_b|` and weights
/// `p_C = beta^n / n! <alpha|H_{b_n}...H_{b_1}|alpha>`, which may be
/// negative when `shift` is too small for the chosen basis.
pub fn sign_corrected_reference(
    h: &Hamiltonian,
    shift: f64,
    beta: f64,
    obs: &DiagonalObservable,
    cutoff: usize,
) -> Result<SignCorrected> {
    if obs.n_sites != h.n_sites() {
        return Err(Error::LengthMismatch {
            expected: h.n_sites(),
            got: obs.n_sites,
        });
    }
    let size = enumeration_size(h.n_sites(), h.n_terms(), cutoff);
    if size > ENUMERATION_BUDGET {
        return Err(Error::EnumerationBudget(size));
    }
    let dim = 1usize << h.n_sites();
    let mut num = 0.0;
    let mut den = 0.0;
    let mut abs = 0.0;
    let mut negative = 0;
    let mut configurations = 0;
    for alpha in 0..dim {
        let f = obs.values[alpha];
        // depth-first over strings, carrying the sparse state H_{b_k}..H_{b_1}|alpha>
        let mut start = vec![Complex64::new(0.0, 0.0); dim];
        start[alpha] = Complex64::new(1.0, 0.0);
        let mut stack = vec![(start, 0usize, 1.0f64)];
        while let Some((v, n, prefactor)) = stack.pop() {
            let p = prefactor * v[alpha].re;
            configurations += 1;
            num += f * p;
            den += p;
            abs += p.abs();
            if p < 0.0 && p.abs() > 1e-300 {
                negative += 1;
            }
            if n == cutoff {
                continue;
            }
            let next = prefactor * beta / (n + 1) as f64;
            for t in h.terms() {
                let mut w = vec![Complex64::new(0.0, 0.0); dim];
                for (k, &a) in v.iter().enumerate() {
                    if a == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let (ph, k2) = t.string().apply_to_basis(k);
                    w[k2] += a * ph * t.coeff();
                    w[k] += a * shift * t.magnitude();
                }
                stack.push((w, n + 1, next));
            }
        }
    }
    Ok(SignCorrected {
        expectation: num / den,
        s_corr: if abs > 0.0 { den / abs } else { 1.0 },
        negative,
        configurations,
    })
}

/// `sum_{n<=M} beta^n/n! Tr(O H_s^n) / sum_{n<=M} beta^n/n! Tr(H_s^n)` with
/// `H_s = sum_b (h_b P_b + shift |h_b|)`, by dense matrix powers.
pub fn truncated_series_reference(
    h: &Hamiltonian,
    shift: f64,
    beta: f64,
    obs: &DiagonalObservable,
    cutoff: usize,
) -> Result<f64> {
    if h.n_sites() > DENSE_MAX_SITES {
        return Err(Error::DenseBudget {
            max: DENSE_MAX_SITES,
            got: h.n_sites(),
        });
    }
    let dim = 1usize << h.n_sites();
    let mut hs = CMatrix::zeros(dim, dim);
    for t in h.terms() {
        hs += term_matrix(t, shift, true)?;
    }
    let o = obs.to_matrix();
    let mut power = CMatrix::identity(dim, dim);
    let mut coef = 1.0;
    let mut num = 0.0;
    let mut den = 0.0;
    for n in 0..=cutoff {
        if n > 0 {
            power = &power * &hs;
            coef *= beta / n as f64;
        }
        num += coef * (&o * &power).trace().re;
        den += coef * power.trace().re;
    }
    Ok(num / den)
}

/// Uniform bound `beta^{M+1} ||H||^{M+1} / (M+1)!` on the series tail, with
/// `||H|| <= sum_b (1 + shift)|h_b|`.
pub fn truncation_bound(h: &Hamiltonian, shift: f64, beta: f64, cutoff: usize) -> f64 {
    let norm: f64 = h
        .terms()
        .iter()
        .map(|t| (1.0 + shift) * t.magnitude())
        .sum();
    let m = cutoff + 1;
    let log = m as f64 * (beta * norm).ln() - (1..=m).map(|k| (k as f64).ln()).sum::<f64>();
    log.exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Direction;
    use crate::engine::{ChainStats, TraceRecord};
    use crate::pauli::{decompose_xx_chain, PauliTerm, ShiftMode};

    fn trace_from(ns: &[usize], alphas: &[&str], burn_in: usize) -> ChainTrace {
        let records = ns
            .iter()
            .zip(alphas)
            .enumerate()
            .map(|(i, (&n, a))| TraceRecord {
                iter: i,
                n,
                alpha: a.parse().unwrap(),
                direction: Direction::Inc,
                accepted: [false; 3],
                running_n_mean: 0.0,
                running_energy: 0.0,
            })
            .collect();
        ChainTrace {
            records,
            burn_in,
            beta: 5.0,
            shift_constant: 3.0,
            final_cutoff: 8,
            stats: ChainStats::default(),
        }
    }

    #[test]
    fn energy_of_empty_strings() {
        let t = trace_from(&[0, 0, 0, 0], &["000"; 4], 1);
        let e = energy_estimate(&t, 5.0, 3.0).unwrap();
        assert_eq!(e.mean, 3.0);
        assert_eq!(e.std_error, 0.0);
        assert_eq!(e.n_samples, 3);
    }

    #[test]
    fn energy_uses_window_only() {
        let t = trace_from(&[100, 100, 10, 20], &["000"; 4], 2);
        let e = energy_estimate(&t, 5.0, 3.0).unwrap();
        assert!((e.mean - (3.0 - 15.0 / 5.0)).abs() < 1e-15);
    }

    #[test]
    fn empty_window_is_error() {
        let t = trace_from(&[1, 2], &["000"; 2], 2);
        assert_eq!(
            energy_estimate(&t, 5.0, 3.0).unwrap_err(),
            Error::EmptyWindow
        );
        let id = DiagonalObservable::identity(3).unwrap();
        assert_eq!(diagonal_estimate(&t, &id).unwrap_err(), Error::EmptyWindow);
    }

    #[test]
    fn identity_is_exact() {
        let t = trace_from(&[1, 2, 3], &["000", "101", "111"], 0);
        let r = diagonal_estimate(&t, &DiagonalObservable::identity(3).unwrap()).unwrap();
        assert_eq!(r.mean, 1.0);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn batch_means_constant_and_iid() {
        assert_eq!(batch_means(&[2.0; 1000]), (2.0, 0.0));
        let xs: Vec<f64> = (0..10_000).map(|i| (i % 2) as f64).collect();
        let (m, se) = batch_means(&xs);
        assert_eq!(m, 0.5);
        assert!(se < 1e-12);
    }

    #[test]
    fn diagonal_values() {
        let z1 = DiagonalObservable::pauli_z(3, 1).unwrap();
        assert_eq!(z1.value("010".parse().unwrap()), -1.0);
        assert_eq!(z1.value("101".parse().unwrap()), 1.0);
        let zz: PauliString = "ZZI".parse().unwrap();
        let o = DiagonalObservable::from_pauli(&zz).unwrap();
        assert_eq!(o.value("100".parse().unwrap()), -1.0);
        assert_eq!(o.value("110".parse().unwrap()), 1.0);
        assert!(DiagonalObservable::from_pauli(&"XII".parse().unwrap()).is_err());
    }

    #[test]
    fn oracle_infinite_temperature() {
        let h = decompose_xx_chain(3, 1.0, true).unwrap();
        let z = DiagonalObservable::pauli_z(3, 0).unwrap().to_matrix();
        let v = exact_thermal_oracle(&h, 0.0, &z).unwrap();
        assert!(v.expectation.abs() < 1e-14);
        assert!((v.partition - 8.0).abs() < 1e-12);
        let p = DiagonalObservable::projector("000".parse().unwrap())
            .unwrap()
            .to_matrix();
        assert!((exact_thermal_oracle(&h, 0.0, &p).unwrap().expectation - 0.125).abs() < 1e-14);
    }

    #[test]
    fn xx_ground_energies() {
        for (n, e0) in [(3, -1.0), (4, -4.0), (5, -3.0)] {
            let h = decompose_xx_chain(n, 1.0, true).unwrap();
            assert!((ground_energy(&h).unwrap() - e0).abs() < 1e-10, "N={n}");
        }
    }

    #[test]
    fn overlap_of_basis_states() {
        let phi = StateVector::prepare("01".parse().unwrap(), &[]).unwrap();
        let o = overlap_observable(&phi, &[LocalBasis::Z; 2]).unwrap();
        assert_eq!(o.value("01".parse().unwrap()), 1.0);
        assert_eq!(o.values().iter().sum::<f64>(), 1.0);
        // |+>|0> is the basis state "00" of the X-Z frame
        let s = 0.5f64.sqrt();
        let c = |x: f64| Complex64::new(x, 0.0);
        let plus0 = StateVector::from_amplitudes(2, 0, vec![c(s), c(s), c(0.0), c(0.0)]).unwrap();
        let o = overlap_observable(&plus0, &[LocalBasis::X, LocalBasis::Z]).unwrap();
        assert_eq!(o.value("00".parse().unwrap()), 1.0);
        assert!(matches!(
            overlap_observable(&plus0, &[LocalBasis::Z; 2]),
            Err(Error::NotABasisState)
        ));
    }

    #[test]
    fn sign_free_enumeration() {
        let h = decompose_xx_chain(3, 1.0, true).unwrap();
        let obs = DiagonalObservable::projector("000".parse().unwrap()).unwrap();
        let r = sign_corrected_reference(&h, 1.0, 0.7, &obs, 4).unwrap();
        assert_eq!(r.negative, 0);
        assert!((r.s_corr - 1.0).abs() < 1e-15);
        let t = truncated_series_reference(&h, 1.0, 0.7, &obs, 4).unwrap();
        assert!((r.expectation - t).abs() < 1e-12);
    }

    #[test]
    fn sign_carrying_split_of_xx() {
        // -XX written as -1.5 XX + 0.5 XX, unshifted
        let terms = vec![
            PauliTerm::parse(-1.5, "XX").unwrap(),
            PauliTerm::parse(0.5, "XX").unwrap(),
        ];
        let h = Hamiltonian::new(2, terms, ShiftMode::Commuting).unwrap();
        let obs = DiagonalObservable::projector("00".parse().unwrap()).unwrap();
        let r = sign_corrected_reference(&h, 0.0, 1.0, &obs, 4).unwrap();
        assert!(r.negative > 0);
        assert!(r.s_corr < 1.0);
        let t = truncated_series_reference(&h, 0.0, 1.0, &obs, 4).unwrap();
        assert!((r.expectation - t).abs() < 1e-10);
    }

    #[test]
    fn enumeration_budget() {
        let h = decompose_xx_chain(3, 1.0, true).unwrap();
        let obs = DiagonalObservable::identity(3).unwrap();
        assert!(matches!(
            sign_corrected_reference(&h, 1.0, 1.0, &obs, 30),
            Err(Error::EnumerationBudget(_))
        ));
    }
}
