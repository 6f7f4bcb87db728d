//! Property checks against the dense and enumerated references.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::circuit::{weight_circuit_amplitude, BasisState, SignConvention};
use crate::engine::{
    balance_violation, compose, enumerate_configurations, exact_weights, stationarity_violation,
    transition_matrix, Chain, ChainParams, MoveKind, SseConfiguration,
};
use crate::error::Result;
use crate::general::{general_amplitude, verify_general_positivity, POSITIVITY_TOLERANCE};
use crate::observables::{
    sign_corrected_reference, truncated_series_reference, DiagonalObservable,
};
use crate::pauli::dense::string_expectation;
use crate::pauli::{decompose_xx_chain, Hamiltonian, Pauli, PauliString, PauliTerm, ShiftMode};
use crate::weight::{
    amplitude_error_bound, amplitude_estimation, two_level_instance, EstimatorBudget,
};

use super::scaling::{is_affine, scaling_probe};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Property {
    pub name: String,
    pub passed: bool,
    pub observed: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Property {
    fn at_most(name: &str, observed: f64, threshold: f64, detail: String) -> Self {
        Property {
            name: name.into(),
            passed: observed <= threshold,
            observed,
            threshold,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub properties: Vec<Property>,
}

fn random_string<R: Rng + ?Sized>(n_sites: usize, rng: &mut R) -> PauliString {
    loop {
        let ops: Vec<Pauli> = (0..n_sites)
            .map(|_| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..4)])
            .collect();
        let s = PauliString::from_ops(&ops).expect("length within limits");
        if !s.is_identity() {
            return s;
        }
    }
}

fn random_coeff<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let mag = rng.random_range(0.2..1.5);
    if rng.random_bool(0.5) {
        mag
    } else {
        -mag
    }
}

/// A random Hamiltonian of pairwise-commuting Pauli terms.
pub fn random_commuting_model<R: Rng + ?Sized>(
    n_sites: usize,
    max_terms: usize,
    rng: &mut R,
) -> Hamiltonian {
    let mut terms: Vec<PauliTerm> = Vec::new();
    for _ in 0..50 {
        if terms.len() == max_terms {
            break;
        }
        let s = random_string(n_sites, rng);
        if terms
            .iter()
            .all(|t| t.string().commutes_with(&s).unwrap_or(false))
        {
            terms.push(PauliTerm::new(random_coeff(rng), s).expect("nonzero coefficient"));
        }
    }
    Hamiltonian::new(n_sites, terms, ShiftMode::Commuting).expect("terms commute by construction")
}

/// A random Pauli Hamiltonian with at least one `Y` or `Z` factor.
pub fn random_general_model<R: Rng + ?Sized>(
    n_sites: usize,
    n_terms: usize,
    cutoff: usize,
    rng: &mut R,
) -> Hamiltonian {
    loop {
        let terms: Vec<PauliTerm> = (0..n_terms)
            .map(|_| {
                PauliTerm::new(random_coeff(rng), random_string(n_sites, rng)).expect("nonzero")
            })
            .collect();
        let has_yz = terms.iter().any(|t| {
            t.string()
                .ops()
                .iter()
                .any(|&p| p == Pauli::Y || p == Pauli::Z)
        });
        if has_yz {
            return Hamiltonian::new(n_sites, terms, ShiftMode::general(cutoff))
                .expect("valid model");
        }
    }
}

/// Largest `|circuit amplitude - dense product / (2^n |h...|)|` over random
/// commuting configurations with `N <= 4`, `n <= 5`.
pub fn check_amplitude_oracle(seed: u64, trials: usize) -> Result<Property> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..trials {
        let n_sites = rng.random_range(1..=4);
        let h = random_commuting_model(n_sites, 4, &mut rng);
        let n = rng.random_range(0..=5);
        let string: Vec<usize> = (0..n).map(|_| rng.random_range(0..h.n_terms())).collect();
        let alpha = BasisState::new(n_sites, rng.random_range(0..1u64 << n_sites))?;
        let convention = if i % 2 == 0 {
            SignConvention::PlusAncilla
        } else {
            SignConvention::MinusAncilla
        };
        let amp = weight_circuit_amplitude(&h, alpha, &string, convention)?;
        let mag: f64 = string.iter().map(|&b| h.term(b).magnitude()).product();
        let dense = string_expectation(&h, &string, alpha.index())? / (2f64.powi(n) * mag);
        worst = worst.max((amp - dense).norm());
    }
    Ok(Property::at_most(
        "amplitude_oracle_max_deviation",
        worst,
        1e-10,
        format!("{trials} commuting configurations, N <= 4, n <= 5"),
    ))
}

/// General-construction amplitude against the dense real part, and the
/// smallest real weight, over random models with `M = cutoff`, `n <= cutoff`.
pub fn check_general_construction(
    seed: u64,
    models: usize,
    cutoff: usize,
) -> Result<[Property; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut min_weight = f64::INFINITY;
    let s = 2.0 * cutoff as f64;
    for _ in 0..models {
        let n_sites = rng.random_range(1..=3);
        let n_terms = rng.random_range(1..=4);
        let h = random_general_model(n_sites, n_terms, cutoff, &mut rng);
        let n = rng.random_range(0..=cutoff);
        let string: Vec<usize> = (0..n).map(|_| rng.random_range(0..h.n_terms())).collect();
        let alpha = BasisState::new(n_sites, rng.random_range(0..1u64 << n_sites))?;
        let config = SseConfiguration::new(alpha, string.clone(), cutoff);
        let amp = general_amplitude(&config, &h)?;
        let mag: f64 = string.iter().map(|&b| h.term(b).magnitude()).product();
        let dense =
            string_expectation(&h, &string, alpha.index())?.re / ((s + 1.0).powi(n as i32) * mag);
        worst = worst.max((amp - dense).abs());
        let report = verify_general_positivity(&h, cutoff, 20, &mut rng)?;
        min_weight = min_weight
            .min(report.min_real_weight)
            .min(dense * (s + 1.0).powi(n as i32));
    }
    Ok([
        Property::at_most(
            "general_amplitude_max_deviation",
            worst,
            1e-10,
            format!("{models} random Pauli models, M = {cutoff}"),
        ),
        Property {
            name: "general_min_real_weight".into(),
            passed: min_weight >= -POSITIVITY_TOLERANCE,
            observed: min_weight,
            threshold: -POSITIVITY_TOLERANCE,
            detail: "smallest Re<alpha|H...H|alpha>/|h...| seen; must stay above threshold".into(),
        },
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceCheck {
    pub states: usize,
    /// Worst pairwise balance violation over the three move kernels.
    pub kernel_balance: f64,
    /// Worst `|(pi T)_j - pi_j|` for the full sweep.
    pub sweep_stationarity: f64,
    pub total_variation: f64,
    pub steps: usize,
}

/// Balance of each move kernel and stationarity of the sweep on the
/// single-bond `N = 2` space with `M = 3`, plus the total-variation distance
/// between a `steps`-sweep histogram and the exact weights.
pub fn check_detailed_balance(seed: u64, beta: f64, steps: usize) -> Result<BalanceCheck> {
    let h = decompose_xx_chain(2, 1.0, false)?;
    let cutoff = 3;
    let states = enumerate_configurations(2, h.n_terms(), cutoff)?;
    let w = exact_weights(&states, &h, beta)?;
    let total: f64 = w.iter().sum();
    let pi: Vec<f64> = w.iter().map(|x| x / total).collect();
    let mut kernel_balance: f64 = 0.0;
    let mut sweep: Option<Vec<Vec<f64>>> = None;
    for kind in MoveKind::SWEEP {
        let t = transition_matrix(&states, &w, &h, kind)?;
        kernel_balance = kernel_balance.max(balance_violation(&pi, &t));
        sweep = Some(match sweep {
            None => t,
            Some(s) => compose(&s, &t),
        });
    }
    let sweep_stationarity = stationarity_violation(&pi, &sweep.expect("three kernels"));

    let mut params = ChainParams::new(beta, steps.max(1), 0, seed);
    params.cutoff = cutoff;
    params.adaptive_cutoff = false;
    let mut chain = Chain::new(&h, params)?;
    let index: HashMap<&SseConfiguration, usize> =
        states.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let mut counts = vec![0usize; states.len()];
    for _ in 0..steps {
        chain.sweep()?;
        counts[index[chain.config()]] += 1;
    }
    let total_variation = 0.5
        * counts
            .iter()
            .zip(&pi)
            .map(|(&c, &p)| (c as f64 / steps.max(1) as f64 - p).abs())
            .sum::<f64>();
    Ok(BalanceCheck {
        states: states.len(),
        kernel_balance,
        sweep_stationarity,
        total_variation,
        steps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AeBoundRow {
    pub p: f64,
    pub t: usize,
    pub violation_fraction: f64,
}

/// Fraction of `trials` amplitude-estimation runs outside the error bound
/// for each `(p, t)`.
pub fn check_ae_bound(
    seed: u64,
    ps: &[f64],
    ts: &[usize],
    delta: f64,
    trials: usize,
) -> Result<Vec<AeBoundRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for &p in ps {
        let (psi, reference) = two_level_instance(p)?;
        for &t in ts {
            let budget = EstimatorBudget::with_delta(t, delta)?;
            let mut bad = 0;
            for _ in 0..trials {
                let est = amplitude_estimation(&psi, &reference, &budget, &mut rng)?;
                if !amplitude_error_bound(est.q, p, t) {
                    bad += 1;
                }
            }
            rows.push(AeBoundRow {
                p,
                t,
                violation_fraction: bad as f64 / trials as f64,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorScaling {
    pub ts: Vec<usize>,
    pub ae_error: Vec<f64>,
    pub bernoulli_error: Vec<f64>,
    pub ae_slope: f64,
    pub bernoulli_slope: f64,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Mean absolute error of amplitude estimation and of the Bernoulli
/// estimator with the same `t`, averaged over a grid of `p` values (a single
/// `p` makes the amplitude-estimation error jump with the discretization).
pub fn check_error_scaling(
    seed: u64,
    ts: &[usize],
    grid: usize,
    trials: usize,
    delta: f64,
) -> Result<ErrorScaling> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ps: Vec<f64> = (0..grid).map(|k| (k as f64 + 0.5) / grid as f64).collect();
    let mut ae_error = Vec::new();
    let mut bernoulli_error = Vec::new();
    for &t in ts {
        let budget = EstimatorBudget::with_delta(t, delta)?;
        let mut ae = 0.0;
        let mut be = 0.0;
        for &p in &ps {
            let (psi, reference) = two_level_instance(p)?;
            let binom = Binomial::new(t as u64, p).expect("p in (0, 1)");
            for _ in 0..trials {
                ae += (amplitude_estimation(&psi, &reference, &budget, &mut rng)?.q - p).abs();
                be += (binom.sample(&mut rng) as f64 / t as f64 - p).abs();
            }
        }
        let count = (ps.len() * trials) as f64;
        ae_error.push(ae / count);
        bernoulli_error.push(be / count);
    }
    let xs: Vec<f64> = ts.iter().map(|&t| t as f64).collect();
    Ok(ErrorScaling {
        ts: ts.to_vec(),
        ae_slope: log_log_slope(&xs, &ae_error),
        bernoulli_slope: log_log_slope(&xs, &bernoulli_error),
        ae_error,
        bernoulli_error,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignCheck {
    pub instances: usize,
    pub max_deviation: f64,
    /// Largest `|S_corr - 1|` among sign-free instances.
    pub sign_free_s_corr_deviation: f64,
    pub sign_carrying: usize,
}

/// Small models for the enumeration (`N <= 3`, at most three terms).
pub fn sign_instances(seed: u64) -> Result<Vec<Hamiltonian>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![
        decompose_xx_chain(2, 1.0, false)?,
        decompose_xx_chain(3, 1.0, true)?,
        Hamiltonian::new(
            2,
            vec![PauliTerm::parse(-1.5, "XX")?, PauliTerm::parse(0.5, "XX")?],
            ShiftMode::Commuting,
        )?,
        Hamiltonian::new(
            2,
            vec![PauliTerm::parse(-1.0, "XX")?, PauliTerm::parse(0.5, "ZZ")?],
            ShiftMode::Commuting,
        )?,
    ];
    for _ in 0..4 {
        let n_sites = rng.random_range(1..=3);
        let n_terms = rng.random_range(1..=3);
        out.push(random_general_model(n_sites, n_terms, 5, &mut rng));
    }
    Ok(out)
}

/// Enumerated sign-corrected estimate against the dense truncated series on
/// every instance, cutoff `0..=5` and shift in `{0, 0.5, 1}`.
pub fn check_sign_reference(seed: u64, beta: f64) -> Result<SignCheck> {
    let mut check = SignCheck {
        instances: 0,
        max_deviation: 0.0,
        sign_free_s_corr_deviation: 0.0,
        sign_carrying: 0,
    };
    for h in sign_instances(seed)? {
        let n = h.n_sites();
        let observables = [
            DiagonalObservable::identity(n)?,
            DiagonalObservable::pauli_z(n, 0)?,
            DiagonalObservable::projector(BasisState::zeros(n)?)?,
        ];
        for cutoff in [1, 3, 5] {
            for shift in [0.0, 0.5, 1.0] {
                for obs in &observables {
                    let r = sign_corrected_reference(&h, shift, beta, obs, cutoff)?;
                    let t = truncated_series_reference(&h, shift, beta, obs, cutoff)?;
                    check.instances += 1;
                    check.max_deviation = check.max_deviation.max((r.expectation - t).abs());
                    if r.negative == 0 {
                        check.sign_free_s_corr_deviation =
                            check.sign_free_s_corr_deviation.max((r.s_corr - 1.0).abs());
                    } else {
                        check.sign_carrying += 1;
                    }
                }
            }
        }
    }
    Ok(check)
}

/// Runs every check and collects pass/fail entries.
pub fn verify_suite(seed: u64) -> Result<VerifyReport> {
    let mut properties = vec![check_amplitude_oracle(seed, 200)?];
    properties.extend(check_general_construction(seed ^ 1, 200, 8)?);

    let b = check_detailed_balance(seed ^ 2, 1.0, 1_000_000)?;
    properties.push(Property::at_most(
        "kernel_detailed_balance",
        b.kernel_balance,
        1e-12,
        format!("{} states, N = 2, one bond, M = 3", b.states),
    ));
    properties.push(Property::at_most(
        "sweep_stationarity",
        b.sweep_stationarity,
        1e-12,
        "pi T = pi".into(),
    ));
    properties.push(Property::at_most(
        "chain_total_variation",
        b.total_variation,
        0.01,
        format!("{} sweeps", b.steps),
    ));

    let delta = 0.1;
    let rows = check_ae_bound(
        seed ^ 3,
        &[0.0, 0.1, 0.25, 0.5, 1.0],
        &[8, 16, 32],
        delta,
        200,
    )?;
    let worst = rows
        .iter()
        .map(|r| r.violation_fraction)
        .fold(0.0, f64::max);
    properties.push(Property::at_most(
        "ae_bound_violation_fraction",
        worst,
        delta,
        "p in {0, .1, .25, .5, 1}, t in {8, 16, 32}, 200 trials each".into(),
    ));
    let s = check_error_scaling(seed ^ 4, &[8, 16, 32, 64, 128], 20, 20, delta)?;
    properties.push(Property {
        name: "ae_error_slope".into(),
        passed: (s.ae_slope + 1.0).abs() <= 0.2,
        observed: s.ae_slope,
        threshold: -1.0,
        detail: "log-log slope of mean |p_hat - p| vs t, tolerance 0.2".into(),
    });
    properties.push(Property {
        name: "bernoulli_error_slope".into(),
        passed: (s.bernoulli_slope + 0.5).abs() <= 0.2,
        observed: s.bernoulli_slope,
        threshold: -0.5,
        detail: "log-log slope of mean |q_hat - p| vs t, tolerance 0.2".into(),
    });

    let sc = check_sign_reference(seed ^ 5, 1.0)?;
    properties.push(Property::at_most(
        "sign_reference_max_deviation",
        sc.max_deviation,
        1e-10,
        format!(
            "{} instances, {} with negative weights",
            sc.instances, sc.sign_carrying
        ),
    ));
    properties.push(Property::at_most(
        "sign_free_s_corr_deviation",
        sc.sign_free_s_corr_deviation,
        1e-12,
        "|S_corr - 1| where no weight is negative".into(),
    ));

    let rows = scaling_probe(&[3, 4, 5, 6], &[0, 1, 2, 3, 4, 5, 6, 7, 8])?;
    properties.push(Property {
        name: "gate_count_affine".into(),
        passed: is_affine(&rows),
        observed: if is_affine(&rows) { 0.0 } else { 1.0 },
        threshold: 0.0,
        detail: "second differences of gate_count in n".into(),
    });

    Ok(VerifyReport {
        passed: properties.iter().all(|p| p.passed),
        properties,
    })
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report holds plain values")
    }
}
