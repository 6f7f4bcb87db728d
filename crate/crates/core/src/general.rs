//! Weights for Hamiltonians whose terms need not commute.
//!
//! Each term is shifted by `2M |h_b|` (or a user factor `s |h_b|`), each
//! ancilla starts in `|phi> = sqrt(s/(s+1))|0> + sqrt(1/(s+1))|1>`, and a
//! final control qubit `C` in `|+>` selects the order of the controlled
//! terms. The amplitude `<in|V|in>` is then the real part of the string
//! expectation divided by `(s+1)^n |h...|`.

use rand::Rng;
use serde::Serialize;

use crate::circuit::{AncillaState, StateVector};
use crate::engine::SseConfiguration;
use crate::error::{Error, Result};
use crate::pauli::{Hamiltonian, ShiftMode};
use crate::weight::{contracted_amplitude, WeightEstimate, WeightMethod};

fn general_cutoff(h: &Hamiltonian) -> Result<(usize, f64)> {
    match h.shift_mode() {
        ShiftMode::General { cutoff, factor } => Ok((cutoff, factor)),
        ShiftMode::Commuting => Err(Error::WrongShiftMode("general")),
    }
}

/// `(V|in>, |in>)` on the register `A, B_1..B_n, C`.
pub fn general_circuit(
    config: &SseConfiguration,
    h: &Hamiltonian,
) -> Result<(StateVector, StateVector)> {
    let (cutoff, factor) = general_cutoff(h)?;
    let n = config.n();
    if n > cutoff {
        return Err(Error::OrderAboveCutoff { n, cutoff });
    }
    let mut ancillas = vec![AncillaState::Phi(factor); n];
    ancillas.push(AncillaState::Plus);
    let input = StateVector::prepare(config.alpha(), &ancillas)?;

    let n_sys = h.n_sites();
    let c_bit = 1usize << (n_sys + n);
    let mut psi = input.clone();
    let mut apply = |i: usize, c_value: usize| -> Result<()> {
        let b = config.string()[i];
        let term = h.terms().get(b).ok_or(Error::IndexOutOfRange {
            index: b,
            bound: h.n_terms(),
        })?;
        let b_bit = 1usize << (n_sys + i);
        psi.apply_controlled_string(b_bit | c_bit, b_bit | c_value, term.sign(), term.string())
    };
    // C = 0: U_1 ... U_n, so U_n acts first
    for i in (0..n).rev() {
        apply(i, 0)?;
    }
    // C = 1: U_n ... U_1, so U_1 acts first
    for i in 0..n {
        apply(i, c_bit)?;
    }
    Ok((psi, input))
}

/// `<in|V|in> = Re<alpha|H_{b_n}...H_{b_1}|alpha> / ((s+1)^n |h_{b_n}...h_{b_1}|)`.
pub fn general_amplitude(config: &SseConfiguration, h: &Hamiltonian) -> Result<f64> {
    let (out, input) = general_circuit(config, h)?;
    Ok(input.inner(&out)?.re)
}

pub fn general_weight(config: &SseConfiguration, h: &Hamiltonian) -> Result<WeightEstimate> {
    let amplitude = general_amplitude(config, h)?;
    Ok(WeightEstimate {
        q: (amplitude * amplitude).min(1.0),
        amplitude,
        method: WeightMethod::Exact,
        std_error: 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositivityReport {
    pub trials: usize,
    /// Smallest `Re<alpha|H_{b_n}...H_{b_1}|alpha> / |h_{b_n}...h_{b_1}|` seen.
    pub min_real_weight: f64,
    pub violations: usize,
}

impl PositivityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

pub const POSITIVITY_TOLERANCE: f64 = 1e-12;

/// Samples random strings of length `0..=n_max` and basis states and
/// records the smallest normalized real weight.
pub fn verify_general_positivity<R: Rng + ?Sized>(
    h: &Hamiltonian,
    n_max: usize,
    trials: usize,
    rng: &mut R,
) -> Result<PositivityReport> {
    let (cutoff, factor) = general_cutoff(h)?;
    if n_max > cutoff {
        return Err(Error::OrderAboveCutoff { n: n_max, cutoff });
    }
    if h.n_terms() == 0 {
        return Ok(PositivityReport {
            trials,
            min_real_weight: 1.0,
            violations: 0,
        });
    }
    let dim = 1usize << h.n_sites();
    let mut report = PositivityReport {
        trials,
        min_real_weight: f64::INFINITY,
        violations: 0,
    };
    for _ in 0..trials {
        let n = rng.random_range(0..=n_max);
        let string: Vec<usize> = (0..n).map(|_| rng.random_range(0..h.n_terms())).collect();
        let alpha = rng.random_range(0..dim);
        let value = real_weight(h, factor, alpha, &string)?;
        report.min_real_weight = report.min_real_weight.min(value);
        if value < -POSITIVITY_TOLERANCE {
            report.violations += 1;
        }
    }
    Ok(report)
}

/// `Re<alpha|H_{b_n}...H_{b_1}|alpha> / |h...|` via the contracted kernel.
pub fn real_weight(h: &Hamiltonian, factor: f64, alpha: usize, string: &[usize]) -> Result<f64> {
    Ok(contracted_amplitude(h, alpha, string)? * (factor + 1.0).powi(string.len() as i32))
}
