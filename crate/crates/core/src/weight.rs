//! Configuration weights `q(n, b, alpha)`: exact, shot-sampled, or by
//! amplitude estimation.
//!
//! The exact path contracts each `|+>` (or `|phi>`) ancilla against its
//! controlled term analytically, `<+|U_{A,B}|+> = (1 + sgn P)/2`, so a
//! weight costs `n` sweeps over the `2^N` system register instead of one
//! over `2^(N+n)`. [`crate::circuit::weight_circuit`] is the full-register
//! version of the same quantity and the two are cross-checked in tests.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;

use crate::circuit::{weight_circuit, SignConvention, StateVector, MAX_QUBITS};
use crate::engine::SseConfiguration;
use crate::error::{Error, Result};
use crate::general::general_circuit;
use crate::pauli::{Hamiltonian, ShiftMode};

/// Shot and repetition budget for the sampling estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorBudget {
    t: usize,
    m: usize,
    delta: f64,
}

impl EstimatorBudget {
    pub fn new(t: usize, m: usize, delta: f64) -> Result<Self> {
        if t == 0 {
            return Err(Error::InvalidBudget("t must be at least 1".into()));
        }
        if m.is_multiple_of(2) {
            return Err(Error::InvalidBudget(format!("m must be odd, got {m}")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidBudget(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        Ok(EstimatorBudget { t, m, delta })
    }

    /// Picks `m = 2 ceil(6 ln(1/delta)) + 1` median repetitions.
    pub fn with_delta(t: usize, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidBudget(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        Self::new(t, median_repetitions(delta), delta)
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Qubits in the phase register, `ceil(log2 t)`.
    pub fn phase_qubits(&self) -> usize {
        self.t.next_power_of_two().trailing_zeros() as usize
    }

    /// Number of phase outcomes, `2^phase_qubits`.
    pub fn register_size(&self) -> usize {
        self.t.next_power_of_two()
    }
}

pub fn median_repetitions(delta: f64) -> usize {
    2 * (6.0 * (1.0 / delta).ln()).ceil() as usize + 1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightMethod {
    Exact,
    Bernoulli { shots: usize },
    AmplitudeEstimation(EstimatorBudget),
}

impl WeightMethod {
    pub fn label(&self) -> &'static str {
        match self {
            WeightMethod::Exact => "exact",
            WeightMethod::Bernoulli { .. } => "bernoulli",
            WeightMethod::AmplitudeEstimation(_) => "ae",
        }
    }
}

impl fmt::Display for WeightMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightMethod::Exact => write!(f, "exact"),
            WeightMethod::Bernoulli { shots } => write!(f, "bernoulli(t={shots})"),
            WeightMethod::AmplitudeEstimation(b) => {
                write!(f, "ae(t={}, m={}, delta={})", b.t, b.m, b.delta)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightEstimate {
    /// Probability of the all-zero outcome, in `[0, 1]`.
    pub q: f64,
    /// Signed real amplitude for exact estimates, `sqrt(q)` otherwise.
    pub amplitude: f64,
    pub method: WeightMethod,
    pub std_error: f64,
}

impl WeightEstimate {
    fn exact(amplitude: f64) -> Self {
        WeightEstimate {
            q: (amplitude * amplitude).min(1.0),
            amplitude,
            method: WeightMethod::Exact,
            std_error: 0.0,
        }
    }
}

/// `Re <alpha| prod_i (s + sgn(h_i) P_i) / (s + 1) |alpha>`, the contracted
/// circuit amplitude, with `string[0]` applied first and `s` the shift
/// factor of `h`.
pub fn contracted_amplitude(h: &Hamiltonian, alpha: usize, string: &[usize]) -> Result<f64> {
    let dim = 1usize << h.n_sites();
    if alpha >= dim {
        return Err(Error::IndexOutOfRange {
            index: alpha,
            bound: dim,
        });
    }
    let s = h.shift_factor();
    let norm = 1.0 / (s + 1.0);
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    let mut w = v.clone();
    v[alpha] = Complex64::new(1.0, 0.0);
    for &b in string {
        let term = h.terms().get(b).ok_or(Error::IndexOutOfRange {
            index: b,
            bound: h.n_terms(),
        })?;
        let sign = term.sign();
        let p = term.string();
        for (k, wk) in w.iter_mut().enumerate() {
            *wk = v[k] * (s * norm);
        }
        for (k, vk) in v.iter().enumerate() {
            if vk.re == 0.0 && vk.im == 0.0 {
                continue;
            }
            let (ph, j) = p.apply_to_basis(k);
            w[j] += vk * ph * (sign * norm);
        }
        std::mem::swap(&mut v, &mut w);
    }
    Ok(v[alpha].re)
}

fn check_order(config: &SseConfiguration) -> Result<()> {
    if config.n() > config.cutoff() {
        return Err(Error::OrderAboveCutoff {
            n: config.n(),
            cutoff: config.cutoff(),
        });
    }
    Ok(())
}

fn check_commuting(h: &Hamiltonian) -> Result<()> {
    match h.shift_mode() {
        ShiftMode::Commuting => Ok(()),
        ShiftMode::General { .. } => Err(Error::WrongShiftMode("commuting")),
    }
}

/// Exact `q(n, b, alpha)` for the commuting construction.
pub fn weight_exact(config: &SseConfiguration, h: &Hamiltonian) -> Result<WeightEstimate> {
    check_commuting(h)?;
    check_order(config)?;
    exact_any_shift(config, h)
}

pub(crate) fn exact_any_shift(
    config: &SseConfiguration,
    h: &Hamiltonian,
) -> Result<WeightEstimate> {
    let amp = contracted_amplitude(h, config.alpha().index(), config.string())?;
    Ok(WeightEstimate::exact(amp))
}

/// `t` measurement shots of the weight circuit; the all-zero count is
/// binomial with success probability `q`.
pub fn weight_bernoulli(
    config: &SseConfiguration,
    h: &Hamiltonian,
    shots: usize,
    seed: u64,
) -> Result<WeightEstimate> {
    if shots == 0 {
        return Err(Error::InvalidBudget(
            "shot count t must be at least 1".into(),
        ));
    }
    check_order(config)?;
    let q = exact_any_shift(config, h)?.q.clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = Binomial::new(shots as u64, q)
        .expect("q lies in [0, 1]")
        .sample(&mut rng);
    Ok(bernoulli_estimate(hits, shots))
}

fn bernoulli_estimate(hits: u64, shots: usize) -> WeightEstimate {
    let t = shots as f64;
    let q = hits as f64 / t;
    let std_error = if hits == 0 {
        1.0 / t
    } else {
        (q * (1.0 - q) / t).sqrt()
    };
    WeightEstimate {
        q,
        amplitude: q.sqrt(),
        method: WeightMethod::Bernoulli { shots },
        std_error,
    }
}

/// Amplitude estimation of `q`.
///
/// The Grover iterate only mixes the circuit input with the part of the
/// output orthogonal to it, so the phase register sees the same outcome
/// distribution as for the two-level state `sqrt(q)|0> + sqrt(1-q)|1>`
/// against `|0>`. That instance is built from the exact `q` of the
/// contracted kernel; [`weight_amplitude_estimation_full`] runs the full
/// register instead and tests check the two distributions agree.
pub fn weight_amplitude_estimation<R: Rng + ?Sized>(
    config: &SseConfiguration,
    h: &Hamiltonian,
    budget: &EstimatorBudget,
    rng: &mut R,
) -> Result<WeightEstimate> {
    check_order(config)?;
    let q = exact_any_shift(config, h)?.q.clamp(0.0, 1.0);
    let (psi, reference) = two_level_instance(q)?;
    let dist = phase_distribution(
        psi.amplitudes(),
        reference.amplitudes(),
        budget.register_size(),
    );
    Ok(sample_estimate(&dist, budget, rng))
}

/// `sqrt(p)|0> + sqrt(1-p)|1>` and `|0>`.
pub fn two_level_instance(p: f64) -> Result<(StateVector, StateVector)> {
    let c = |x: f64| Complex64::new(x, 0.0);
    let psi = StateVector::from_amplitudes(1, 0, vec![c(p.sqrt()), c((1.0 - p).sqrt())])?;
    let reference = StateVector::from_amplitudes(1, 0, vec![c(1.0), c(0.0)])?;
    Ok((psi, reference))
}

/// Amplitude estimation of `q` with `psi` the full circuit output and the
/// projector onto the circuit input (system plus ancillas), so
/// `p = |<in|out>|^2 = q`.
pub fn weight_amplitude_estimation_full<R: Rng + ?Sized>(
    config: &SseConfiguration,
    h: &Hamiltonian,
    budget: &EstimatorBudget,
    rng: &mut R,
) -> Result<WeightEstimate> {
    check_order(config)?;
    let extra = if h.shift_mode().is_general() { 1 } else { 0 };
    let total = h.n_sites() + config.n() + extra + budget.phase_qubits();
    if total > MAX_QUBITS {
        return Err(Error::QubitCap {
            max: MAX_QUBITS,
            got: total,
        });
    }
    let (out, reference) = full_register(config, h)?;
    let dist = phase_distribution(
        out.amplitudes(),
        reference.amplitudes(),
        budget.register_size(),
    );
    Ok(sample_estimate(&dist, budget, rng))
}

fn full_register(config: &SseConfiguration, h: &Hamiltonian) -> Result<(StateVector, StateVector)> {
    match h.shift_mode() {
        ShiftMode::Commuting => weight_circuit(
            h,
            config.alpha(),
            config.string(),
            SignConvention::PlusAncilla,
        ),
        ShiftMode::General { .. } => general_circuit(config, h),
    }
}

/// Phase-register outcome distribution for a configuration, on the full
/// register and on the two-level instance.
pub fn weight_phase_distributions(
    config: &SseConfiguration,
    h: &Hamiltonian,
    size: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (out, reference) = full_register(config, h)?;
    let full = phase_distribution(out.amplitudes(), reference.amplitudes(), size);
    let q = exact_any_shift(config, h)?.q.clamp(0.0, 1.0);
    let (psi, r) = two_level_instance(q)?;
    Ok((
        full,
        phase_distribution(psi.amplitudes(), r.amplitudes(), size),
    ))
}

/// Probability estimate from `m` independent phase-estimation runs on
/// `psi` with projector `|reference><reference|`.
pub fn amplitude_estimation<R: Rng + ?Sized>(
    psi: &StateVector,
    reference: &StateVector,
    budget: &EstimatorBudget,
    rng: &mut R,
) -> Result<WeightEstimate> {
    if psi.n_qubits() != reference.n_qubits() {
        return Err(Error::ShapeMismatch(
            psi.n_system(),
            psi.n_ancilla(),
            reference.n_system(),
            reference.n_ancilla(),
        ));
    }
    let total = psi.n_qubits() + budget.phase_qubits();
    if total > MAX_QUBITS {
        return Err(Error::QubitCap {
            max: MAX_QUBITS,
            got: total,
        });
    }
    let dist = phase_distribution(
        psi.amplitudes(),
        reference.amplitudes(),
        budget.register_size(),
    );
    Ok(sample_estimate(&dist, budget, rng))
}

fn sample_estimate<R: Rng + ?Sized>(
    dist: &[f64],
    budget: &EstimatorBudget,
    rng: &mut R,
) -> WeightEstimate {
    let size = dist.len();
    let sampler = WeightedIndex::new(dist).expect("phase distribution is normalized");
    let mut estimates: Vec<f64> = (0..budget.m)
        .map(|_| {
            let y = sampler.sample(rng);
            (PI * y as f64 / size as f64).sin().powi(2)
        })
        .collect();
    estimates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = estimates[budget.m / 2].clamp(0.0, 1.0);
    WeightEstimate {
        q,
        amplitude: q.sqrt(),
        method: WeightMethod::AmplitudeEstimation(*budget),
        std_error: error_bound(q, size),
    }
}

/// Outcome distribution of the phase register after canonical amplitude
/// estimation with `size` outcomes.
///
/// The Grover iterate is `Q = U V` with `U = 2|psi><psi| - 1` and
/// `V = 1 - 2|ref><ref|`. The register starts uniform, controls `Q^y`, and
/// is read after an inverse Fourier transform: outcome `k` has amplitude
/// `(1/size) sum_y e^{-2 pi i y k / size} Q^y |psi>`.
pub fn phase_distribution(psi: &[Complex64], reference: &[Complex64], size: usize) -> Vec<f64> {
    let dim = psi.len();
    let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    };
    let mut powers: Vec<Vec<Complex64>> = Vec::with_capacity(size);
    let mut cur = psi.to_vec();
    for _ in 0..size {
        powers.push(cur.clone());
        // V: reflect away from the reference
        let r = dot(reference, &cur);
        for (c, rf) in cur.iter_mut().zip(reference) {
            *c -= rf * (2.0 * r);
        }
        // U: reflect about psi
        let p = dot(psi, &cur);
        for (c, ps) in cur.iter_mut().zip(psi) {
            *c = ps * (2.0 * p) - *c;
        }
    }
    let twiddle: Vec<Complex64> = (0..size)
        .map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / size as f64))
        .collect();
    let inv = 1.0 / size as f64;
    let mut probs: Vec<f64> = (0..size)
        .map(|k| {
            let mut acc = vec![Complex64::new(0.0, 0.0); dim];
            for (y, v) in powers.iter().enumerate() {
                let w = twiddle[(y * k) % size] * inv;
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += w * x;
                }
            }
            acc.iter().map(Complex64::norm_sqr).sum()
        })
        .collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    probs
}

/// `2 pi sqrt(p(1-p))/t + pi^2/t^2`.
pub fn error_bound(p: f64, t: usize) -> f64 {
    let t = t as f64;
    2.0 * PI * (p * (1.0 - p)).max(0.0).sqrt() / t + PI * PI / (t * t)
}

/// True iff `|p_hat - p|` and `|sqrt(p_hat) - sqrt(p)|^2` both lie within
/// the amplitude-estimation error bound for `t`.
pub fn amplitude_error_bound(p_hat: f64, p: f64, t: usize) -> bool {
    let bound = error_bound(p, t) + 1e-12;
    let amp = (p_hat.sqrt() - p.sqrt()).powi(2);
    (p_hat - p).abs() <= bound && amp <= bound
}

/// One estimate per the selected method, drawing any sampling seed from `rng`.
pub fn estimate<R: Rng + ?Sized>(
    config: &SseConfiguration,
    h: &Hamiltonian,
    method: &WeightMethod,
    rng: &mut R,
) -> Result<WeightEstimate> {
    match method {
        WeightMethod::Exact => {
            check_order(config)?;
            exact_any_shift(config, h)
        }
        WeightMethod::Bernoulli { shots } => weight_bernoulli(config, h, *shots, rng.next_u64()),
        WeightMethod::AmplitudeEstimation(budget) => {
            weight_amplitude_estimation(config, h, budget, rng)
        }
    }
}
