//! Metropolis chain over SSE configurations `(n, b, alpha)`.
//!
//! Each iteration is one sweep of three moves in fixed order: a single-site
//! flip of `alpha`, a replacement of one operator-string entry, and an
//! `n -> n +/- 1` move that appends or removes the last entry. Weights are
//!
//! ```text
//! W(C) = beta^n / n! * prod_i (s + 1)|h_{b_i}| * amplitude(C)
//! ```
//!
//! with `s` the shift factor (`1` for the commuting shift, `2M` for the
//! general one), so `amplitude` is the circuit overlap and every ratio the
//! chain forms is free of the `(s+1)^n` normalization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::BasisState;
use crate::error::{Error, Result};
use crate::pauli::{Hamiltonian, ShiftMode};
use crate::weight::{estimate, WeightEstimate, WeightMethod};

/// Exact-mode amplitudes at or below `sqrt(1e-14)` count as zero weight.
pub const ZERO_Q_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SseConfiguration {
    alpha: BasisState,
    string: Vec<usize>,
    cutoff: usize,
}

impl SseConfiguration {
    /// Builds a configuration without validating it; see [`Self::validate`].
    pub fn new(alpha: BasisState, string: Vec<usize>, cutoff: usize) -> Self {
        SseConfiguration {
            alpha,
            string,
            cutoff,
        }
    }

    /// The `n = 0` configuration.
    pub fn empty(alpha: BasisState, cutoff: usize) -> Self {
        Self::new(alpha, Vec::new(), cutoff)
    }

    pub fn validate(&self, h: &Hamiltonian) -> Result<()> {
        if self.alpha.len() != h.n_sites() {
            return Err(Error::LengthMismatch {
                expected: h.n_sites(),
                got: self.alpha.len(),
            });
        }
        if self.n() > self.cutoff {
            return Err(Error::OrderAboveCutoff {
                n: self.n(),
                cutoff: self.cutoff,
            });
        }
        if let Some(&b) = self.string.iter().find(|&&b| b >= h.n_terms()) {
            return Err(Error::IndexOutOfRange {
                index: b,
                bound: h.n_terms(),
            });
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.string.len()
    }

    /// Operator string `b_1 .. b_n`; `string()[0]` acts first.
    pub fn string(&self) -> &[usize] {
        &self.string
    }

    pub fn alpha(&self) -> BasisState {
        self.alpha
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = cutoff;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveKind {
    Alpha,
    String,
    Order,
}

impl MoveKind {
    pub const SWEEP: [MoveKind; 3] = [MoveKind::Alpha, MoveKind::String, MoveKind::Order];

    /// Every proposal this move can make from `config`, with its selection
    /// probability and Hastings factor. `None` is a proposal rejected
    /// outright (the chain stays put).
    pub fn proposals(
        self,
        config: &SseConfiguration,
        n_terms: usize,
    ) -> Vec<(Option<SseConfiguration>, f64, f64)> {
        match self {
            MoveKind::Alpha => {
                let n_sites = config.alpha.len();
                (0..n_sites)
                    .map(|site| {
                        let mut c = config.clone();
                        c.alpha = c.alpha.flipped(site);
                        (Some(c), 1.0 / n_sites as f64, 1.0)
                    })
                    .collect()
            }
            MoveKind::String => {
                let n = config.n();
                if n == 0 || n_terms == 0 {
                    return vec![(None, 1.0, 1.0)];
                }
                let p = 1.0 / (n * n_terms) as f64;
                let mut out = Vec::with_capacity(n * n_terms);
                for pos in 0..n {
                    for b in 0..n_terms {
                        let mut c = config.clone();
                        c.string[pos] = b;
                        out.push((Some(c), p, 1.0));
                    }
                }
                out
            }
            MoveKind::Order => {
                let mut out = Vec::new();
                if config.n() >= config.cutoff || n_terms == 0 {
                    out.push((None, 0.5, 1.0));
                } else {
                    for b in 0..n_terms {
                        let mut c = config.clone();
                        c.string.push(b);
                        out.push((Some(c), 0.5 / n_terms as f64, n_terms as f64));
                    }
                }
                if config.n() == 0 {
                    out.push((None, 0.5, 1.0));
                } else {
                    let mut c = config.clone();
                    c.string.pop();
                    out.push((Some(c), 0.5, 1.0 / n_terms as f64));
                }
                out
            }
        }
    }
}

/// Flips one uniformly chosen site of `alpha`.
pub fn propose_alpha_update<R: Rng + ?Sized>(
    config: &SseConfiguration,
    rng: &mut R,
) -> SseConfiguration {
    let site = rng.random_range(0..config.alpha.len());
    let mut c = config.clone();
    c.alpha = c.alpha.flipped(site);
    c
}

/// Replaces one uniformly chosen entry of the string with a uniformly chosen
/// term. `None` when the string is empty.
pub fn propose_string_update<R: Rng + ?Sized>(
    config: &SseConfiguration,
    n_terms: usize,
    rng: &mut R,
) -> Option<SseConfiguration> {
    if config.n() == 0 || n_terms == 0 {
        return None;
    }
    let pos = rng.random_range(0..config.n());
    let b = rng.random_range(0..n_terms);
    let mut c = config.clone();
    c.string[pos] = b;
    Some(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Inc,
    Dec,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Direction::Inc => "inc",
            Direction::Dec => "dec",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderProposal {
    pub direction: Direction,
    /// `None` when the move would leave `0..=M`.
    pub candidate: Option<SseConfiguration>,
    /// Ratio of reverse to forward selection probability.
    pub hastings: f64,
}

/// With probability 1/2 appends a uniformly chosen term, otherwise drops the
/// last one. Appending picks one of `K` terms while removal is forced, so
/// the Hastings factor is `K` up and `1/K` down.
pub fn propose_n_change<R: Rng + ?Sized>(
    config: &SseConfiguration,
    n_terms: usize,
    rng: &mut R,
) -> OrderProposal {
    if rng.random_bool(0.5) {
        let candidate = (config.n() < config.cutoff && n_terms > 0).then(|| {
            let mut c = config.clone();
            c.string.push(rng.random_range(0..n_terms));
            c
        });
        OrderProposal {
            direction: Direction::Inc,
            candidate,
            hastings: n_terms as f64,
        }
    } else {
        let candidate = (config.n() > 0).then(|| {
            let mut c = config.clone();
            c.string.pop();
            c
        });
        OrderProposal {
            direction: Direction::Dec,
            candidate,
            hastings: 1.0 / n_terms.max(1) as f64,
        }
    }
}

/// `ln W(C)` for a configuration with circuit amplitude `amplitude`;
/// `-inf` when the amplitude is not positive.
pub fn log_weight(config: &SseConfiguration, amplitude: f64, h: &Hamiltonian, beta: f64) -> f64 {
    if amplitude <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let s = h.shift_factor();
    let n = config.n();
    let log_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    let terms: f64 = config
        .string
        .iter()
        .map(|&b| ((s + 1.0) * h.term(b).magnitude()).ln())
        .sum();
    n as f64 * beta.ln() - log_fact + terms + amplitude.ln()
}

/// `W(C') / W(C)`.
pub fn weight_ratio(
    current: (&SseConfiguration, f64),
    candidate: (&SseConfiguration, f64),
    h: &Hamiltonian,
    beta: f64,
) -> f64 {
    let lc = log_weight(current.0, current.1, h, beta);
    let ln = log_weight(candidate.0, candidate.1, h, beta);
    if ln == f64::NEG_INFINITY {
        0.0
    } else {
        (ln - lc).exp()
    }
}

/// Metropolis acceptance probability `min(ratio, 1)`.
pub fn acceptance_probability(ratio: f64) -> f64 {
    if ratio.is_nan() || ratio <= 0.0 {
        0.0
    } else {
        ratio.min(1.0)
    }
}

/// Metropolis decision for a (Hastings-corrected) weight ratio.
pub fn accept<R: Rng + ?Sized>(ratio: f64, rng: &mut R) -> bool {
    let p = acceptance_probability(ratio);
    if p >= 1.0 {
        return true;
    }
    if p <= 0.0 {
        return false;
    }
    rng.random::<f64>() < p
}

/// Grows `M` to `ceil(1.25 M)` when the largest order seen during burn-in
/// exceeds `0.8 M`. Frozen afterwards.
pub fn cutoff_policy(max_n: usize, cutoff: usize, in_burn_in: bool) -> usize {
    if in_burn_in && (max_n as f64) > 0.8 * cutoff as f64 {
        (1.25 * cutoff as f64).ceil() as usize
    } else {
        cutoff
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainParams {
    pub beta: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub weight_method: WeightMethod,
    /// Initial expansion cutoff `M`.
    pub cutoff: usize,
    /// Let [`cutoff_policy`] grow `M` during burn-in.
    pub adaptive_cutoff: bool,
}

impl ChainParams {
    pub fn new(beta: f64, iterations: usize, burn_in: usize, seed: u64) -> Self {
        ChainParams {
            beta,
            iterations,
            burn_in,
            seed,
            weight_method: WeightMethod::Exact,
            cutoff: 64,
            adaptive_cutoff: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::InvalidChainParams(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if self.iterations > 0 && self.burn_in >= self.iterations {
            return Err(Error::InvalidChainParams(format!(
                "burn_in ({}) must be smaller than iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if self.cutoff == 0 {
            return Err(Error::InvalidChainParams(
                "cutoff must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub n: usize,
    #[serde(skip)]
    pub alpha: BasisState,
    /// Direction of this sweep's order move.
    pub direction: Direction,
    /// Acceptance of the alpha, string and order moves.
    pub accepted: [bool; 3],
    /// Mean of `n` over burn-in sweeps so far, then over post-burn-in sweeps.
    pub running_n_mean: f64,
    pub running_energy: f64,
}

impl TraceRecord {
    pub fn accepted_label(&self) -> String {
        self.accepted
            .iter()
            .map(|&a| if a { '1' } else { '0' })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ChainStats {
    pub proposed: [usize; 3],
    pub accepted: [usize; 3],
    /// Candidates rejected because their weight estimate was zero.
    pub zero_weight: usize,
    /// Smallest exact amplitude seen over all evaluated candidates.
    pub min_amplitude: f64,
    /// Evaluated candidates with a negative exact amplitude.
    pub positivity_violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace {
    pub records: Vec<TraceRecord>,
    pub burn_in: usize,
    pub beta: f64,
    /// Shift constant `k` in force after burn-in.
    pub shift_constant: f64,
    pub final_cutoff: usize,
    pub stats: ChainStats,
}

impl ChainTrace {
    pub fn post_burn_in(&self) -> &[TraceRecord] {
        &self.records[self.burn_in.min(self.records.len())..]
    }
}

/// A running chain. One instance is strictly sequential.
pub struct Chain {
    h: Hamiltonian,
    params: ChainParams,
    rng: ChaCha8Rng,
    config: SseConfiguration,
    amplitude: f64,
    iteration: usize,
    max_n: usize,
    n_sum: f64,
    n_count: usize,
    stats: ChainStats,
}

impl Chain {
    pub fn new(h: &Hamiltonian, params: ChainParams) -> Result<Self> {
        params.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let h = match h.shift_mode() {
            ShiftMode::General { factor, cutoff } if factor == 2.0 * cutoff as f64 => {
                h.with_shift_mode(ShiftMode::general(params.cutoff))?
            }
            ShiftMode::General { factor, .. } => {
                h.with_shift_mode(ShiftMode::general_with_factor(params.cutoff, factor))?
            }
            ShiftMode::Commuting => h.clone(),
        };
        let alpha = BasisState::new(h.n_sites(), rng.random_range(0..1u64 << h.n_sites()))?;
        let config = SseConfiguration::empty(alpha, params.cutoff);
        let w = estimate(&config, &h, &params.weight_method, &mut rng)?;
        let amplitude = effective_amplitude(&w);
        Ok(Chain {
            h,
            params,
            rng,
            config,
            amplitude,
            iteration: 0,
            max_n: 0,
            n_sum: 0.0,
            n_count: 0,
            stats: ChainStats {
                min_amplitude: f64::INFINITY,
                ..Default::default()
            },
        })
    }

    pub fn config(&self) -> &SseConfiguration {
        &self.config
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.h
    }

    pub fn stats(&self) -> &ChainStats {
        &self.stats
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    fn try_move(
        &mut self,
        candidate: Option<SseConfiguration>,
        hastings: f64,
        slot: usize,
    ) -> Result<bool> {
        self.stats.proposed[slot] += 1;
        let Some(candidate) = candidate else {
            return Ok(false);
        };
        let w = estimate(
            &candidate,
            &self.h,
            &self.params.weight_method,
            &mut self.rng,
        )?;
        if w.method == WeightMethod::Exact {
            self.stats.min_amplitude = self.stats.min_amplitude.min(w.amplitude);
            if w.amplitude < -crate::general::POSITIVITY_TOLERANCE {
                self.stats.positivity_violations += 1;
            }
        }
        let amp = effective_amplitude(&w);
        if amp <= 0.0 {
            self.stats.zero_weight += 1;
            return Ok(false);
        }
        let ratio = hastings
            * weight_ratio(
                (&self.config, self.amplitude),
                (&candidate, amp),
                &self.h,
                self.params.beta,
            );
        if accept(ratio, &mut self.rng) {
            self.config = candidate;
            self.amplitude = amp;
            self.stats.accepted[slot] += 1;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    /// One round-robin sweep.
    pub fn sweep(&mut self) -> Result<TraceRecord> {
        let n_terms = self.h.n_terms();
        let mut accepted = [false; 3];

        let c = propose_alpha_update(&self.config, &mut self.rng);
        accepted[0] = self.try_move(Some(c), 1.0, 0)?;

        let c = propose_string_update(&self.config, n_terms, &mut self.rng);
        accepted[1] = self.try_move(c, 1.0, 1)?;

        let order = propose_n_change(&self.config, n_terms, &mut self.rng);
        accepted[2] = self.try_move(order.candidate, order.hastings, 2)?;

        let in_burn_in = self.iteration < self.params.burn_in;
        let n = self.config.n();
        self.max_n = self.max_n.max(n);
        if in_burn_in && self.params.adaptive_cutoff {
            let grown = cutoff_policy(self.max_n, self.config.cutoff, true);
            if grown != self.config.cutoff {
                self.grow_cutoff(grown)?;
            }
        }

        if self.iteration == self.params.burn_in {
            self.n_sum = 0.0;
            self.n_count = 0;
        }
        self.n_sum += n as f64;
        self.n_count += 1;
        let running_n_mean = self.n_sum / self.n_count as f64;
        let record = TraceRecord {
            iter: self.iteration,
            n,
            alpha: self.config.alpha,
            direction: order.direction,
            accepted,
            running_n_mean,
            running_energy: self.h.shift_constant() - running_n_mean / self.params.beta,
        };
        self.iteration += 1;
        Ok(record)
    }

    fn grow_cutoff(&mut self, cutoff: usize) -> Result<()> {
        self.config = self.config.clone().with_cutoff(cutoff);
        if let ShiftMode::General {
            cutoff: old,
            factor,
        } = self.h.shift_mode()
        {
            let mode = if factor == 2.0 * old as f64 {
                ShiftMode::general(cutoff)
            } else {
                ShiftMode::general_with_factor(cutoff, factor)
            };
            self.h = self.h.with_shift_mode(mode)?;
            let w = estimate(
                &self.config,
                &self.h,
                &self.params.weight_method,
                &mut self.rng,
            )?;
            self.amplitude = effective_amplitude(&w);
        }
        Ok(())
    }

    pub fn finish(self, records: Vec<TraceRecord>) -> ChainTrace {
        ChainTrace {
            records,
            burn_in: self.params.burn_in,
            beta: self.params.beta,
            shift_constant: self.h.shift_constant(),
            final_cutoff: self.config.cutoff,
            stats: self.stats,
        }
    }
}

fn effective_amplitude(w: &WeightEstimate) -> f64 {
    match w.method {
        WeightMethod::Exact if w.q < ZERO_Q_THRESHOLD || w.amplitude <= 0.0 => 0.0,
        WeightMethod::Exact => w.amplitude,
        _ if w.q <= 0.0 => 0.0,
        _ => w.q.sqrt(),
    }
}

/// Runs `params.iterations` sweeps from `n = 0` and a random `alpha`.
pub fn run_chain(h: &Hamiltonian, params: &ChainParams) -> Result<ChainTrace> {
    let mut chain = Chain::new(h, params.clone())?;
    let mut records = Vec::with_capacity(params.iterations);
    for _ in 0..params.iterations {
        records.push(chain.sweep()?);
    }
    Ok(chain.finish(records))
}

/// Every configuration with `n <= cutoff` over `n_sites` sites and
/// `n_terms` terms, ordered by `(alpha, n, string)`.
pub fn enumerate_configurations(
    n_sites: usize,
    n_terms: usize,
    cutoff: usize,
) -> Result<Vec<SseConfiguration>> {
    let mut out = Vec::new();
    for alpha in BasisState::all(n_sites) {
        let mut layer = vec![Vec::new()];
        for n in 0..=cutoff {
            for s in &layer {
                out.push(SseConfiguration::new(alpha, s.clone(), cutoff));
            }
            if n == cutoff {
                break;
            }
            layer = layer
                .iter()
                .flat_map(|s| {
                    (0..n_terms).map(move |b| {
                        let mut t: Vec<usize> = s.clone();
                        t.push(b);
                        t
                    })
                })
                .collect();
            if out.len() + layer.len() > 1_000_000 {
                return Err(Error::EnumerationBudget((out.len() + layer.len()) as u128));
            }
        }
    }
    Ok(out)
}

/// Exact weights `W(C)` (zero where the amplitude is not positive).
pub fn exact_weights(states: &[SseConfiguration], h: &Hamiltonian, beta: f64) -> Result<Vec<f64>> {
    states
        .iter()
        .map(|c| {
            let w = crate::weight::exact_any_shift(c, h)?;
            let amp = effective_amplitude(&w);
            Ok(log_weight(c, amp, h, beta).exp())
        })
        .collect()
}

/// Row-stochastic matrix of one move kernel on `states`, built from
/// [`MoveKind::proposals`] and the same acceptance rule the chain uses.
/// Rows of zero-weight states are the identity.
pub fn transition_matrix(
    states: &[SseConfiguration],
    weights: &[f64],
    h: &Hamiltonian,
    kind: MoveKind,
) -> Result<Vec<Vec<f64>>> {
    let index: std::collections::HashMap<&SseConfiguration, usize> =
        states.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let dim = states.len();
    let mut t = vec![vec![0.0; dim]; dim];
    for (i, c) in states.iter().enumerate() {
        if weights[i] <= 0.0 {
            t[i][i] = 1.0;
            continue;
        }
        let mut stay = 1.0;
        for (cand, prob, hastings) in kind.proposals(c, h.n_terms()) {
            let Some(cand) = cand else { continue };
            let &j = index.get(&cand).ok_or(Error::IndexOutOfRange {
                index: cand.n(),
                bound: c.cutoff,
            })?;
            let a = prob * acceptance_probability(hastings * weights[j] / weights[i]);
            t[i][j] += a;
            stay -= a;
        }
        t[i][i] += stay;
    }
    Ok(t)
}

/// Product `a * b` of two square matrices.
pub fn compose(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// `max |pi_i T_ij - pi_j T_ji|` for normalized `pi`.
pub fn balance_violation(pi: &[f64], t: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..pi.len() {
        for j in 0..pi.len() {
            worst = worst.max((pi[i] * t[i][j] - pi[j] * t[j][i]).abs());
        }
    }
    worst
}

/// `max_j |(pi T)_j - pi_j|`.
pub fn stationarity_violation(pi: &[f64], t: &[Vec<f64>]) -> f64 {
    (0..pi.len())
        .map(|j| ((0..pi.len()).map(|i| pi[i] * t[i][j]).sum::<f64>() - pi[j]).abs())
        .fold(0.0, f64::max)
}
