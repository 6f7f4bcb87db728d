use qsse::circuit::{BasisState, StateVector};
use qsse::engine::{enumerate_configurations, exact_weights, run_chain, ChainParams};
use qsse::observables::*;
use qsse::pauli::{decompose_xx_chain, Hamiltonian, LocalBasis, PauliTerm, ShiftMode};

fn within(est: &EstimatorResult, target: f64, sigmas: f64) -> bool {
    (est.mean - target).abs() <= sigmas * est.std_error + 1e-12
}

#[test]
fn site_magnetization_vanishes() {
    let h = decompose_xx_chain(3, 1.0, true).unwrap();
    let trace = run_chain(&h, &ChainParams::new(2.0, 60_000, 5_000, 11)).unwrap();
    let z1 = DiagonalObservable::pauli_z(3, 1).unwrap();
    let est = diagonal_estimate(&trace, &z1).unwrap();
    let exact = exact_thermal_oracle(&h, 2.0, &z1.to_matrix())
        .unwrap()
        .expectation;
    assert!(exact.abs() < 1e-12);
    assert!(within(&est, 0.0, 3.0), "{est}");
}

#[test]
fn projector_matches_oracle() {
    let h = decompose_xx_chain(3, 1.0, true).unwrap();
    let beta = 1.5;
    let trace = run_chain(&h, &ChainParams::new(beta, 80_000, 5_000, 12)).unwrap();
    let proj = DiagonalObservable::projector("000".parse().unwrap()).unwrap();
    let est = diagonal_estimate(&trace, &proj).unwrap();
    let exact = exact_thermal_oracle(&h, beta, &proj.to_matrix())
        .unwrap()
        .expectation;
    assert!(within(&est, exact, 3.0), "{est} vs {exact}");
}

#[test]
fn overlap_two_sites() {
    let h = decompose_xx_chain(2, 1.0, false).unwrap();
    let beta = 1.0;
    let phi = StateVector::prepare(BasisState::zeros(2).unwrap(), &[]).unwrap();
    let obs = overlap_observable(&phi, &[LocalBasis::Z; 2]).unwrap();
    let trace = run_chain(&h, &ChainParams::new(beta, 60_000, 5_000, 13)).unwrap();
    let est = diagonal_estimate(&trace, &obs).unwrap();
    let exact = exact_thermal_oracle(&h, beta, &obs.to_matrix())
        .unwrap()
        .expectation;
    assert!(within(&est, exact, 3.0), "{est} vs {exact}");
}

#[test]
fn overlap_at_infinite_temperature() {
    let h = decompose_xx_chain(3, 1.0, true).unwrap();
    let phi = StateVector::prepare("011".parse().unwrap(), &[]).unwrap();
    let obs = overlap_observable(&phi, &[LocalBasis::Z; 3]).unwrap();
    let v = exact_thermal_oracle(&h, 0.0, &obs.to_matrix()).unwrap();
    assert!((v.expectation - 0.125).abs() < 1e-14);
    let trace = run_chain(&h, &ChainParams::new(1e-6, 40_000, 1_000, 3)).unwrap();
    let est = diagonal_estimate(&trace, &obs).unwrap();
    assert!((est.mean - 0.125).abs() < 0.01, "{est}");
}

#[test]
fn overlap_in_rotated_basis() {
    // chain in the X basis, where -XX is diagonal; |++> is the ground state
    let h = decompose_xx_chain(2, 1.0, false).unwrap();
    let basis = [LocalBasis::X; 2];
    let r = h.in_basis(&basis).unwrap();
    let s = 0.5;
    let c = |x: f64| num_complex::Complex64::new(x, 0.0);
    let plus_plus = StateVector::from_amplitudes(2, 0, vec![c(s); 4]).unwrap();
    let obs = overlap_observable(&plus_plus, &basis).unwrap();
    let beta = 1.0;
    let trace = run_chain(&r, &ChainParams::new(beta, 40_000, 2_000, 5)).unwrap();
    let est = diagonal_estimate(&trace, &obs).unwrap();
    let exact = exact_thermal_oracle(&r, beta, &obs.to_matrix())
        .unwrap()
        .expectation;
    // H' = XX has |++> at energy +1: weight e^{-1} / (2e + 2e^{-1})
    let direct = (-1.0f64).exp() / (2.0 * 1f64.exp() + 2.0 * (-1.0f64).exp());
    assert!((exact - direct).abs() < 1e-12);
    assert!(within(&est, exact, 3.0), "{est} vs {exact}");
}

#[test]
fn identity_estimate_is_exact() {
    let h = decompose_xx_chain(3, 1.0, true).unwrap();
    let trace = run_chain(&h, &ChainParams::new(1.0, 2_000, 100, 1)).unwrap();
    let est = diagonal_estimate(&trace, &DiagonalObservable::identity(3).unwrap()).unwrap();
    assert_eq!(est.mean, 1.0);
    assert_eq!(est.std_error, 0.0);
}

#[test]
fn enumerated_energy_matches_oracle() {
    let h = decompose_xx_chain(2, 1.0, false).unwrap();
    let beta = 1.0;
    let cutoff = 14;
    let states = enumerate_configurations(2, h.n_terms(), cutoff).unwrap();
    let w = exact_weights(&states, &h, beta).unwrap();
    let z: f64 = w.iter().sum();
    let mean_n: f64 = states
        .iter()
        .zip(&w)
        .map(|(c, w)| c.n() as f64 * w)
        .sum::<f64>()
        / z;
    let e_sse = h.shift_constant() - mean_n / beta;
    let e_exact = exact_thermal_energy(&h, beta).unwrap();
    // dropping orders above M moves <n> by at most sum_{n>M} (n + <n>) x^n/n!,
    // which the geometric tail keeps below twice its first term
    let tail = truncation_bound(&h, 1.0, beta, cutoff);
    let bound = 2.0 * (cutoff as f64 + 1.0 + mean_n) * tail / beta;
    assert!(
        (e_sse - e_exact).abs() <= bound,
        "{e_sse} {e_exact} {bound}"
    );
    // and the tail itself is what the partition function misses
    let z_exact = qsse::observables::exact_thermal_oracle(
        &h,
        beta,
        &DiagonalObservable::identity(2).unwrap().to_matrix(),
    )
    .unwrap()
    .partition;
    let z_sse = z * (-beta * h.shift_constant()).exp();
    assert!((z_sse - z_exact).abs() / z_exact <= tail);
}

#[test]
fn s_corr_falls_as_shift_shrinks() {
    let terms = vec![
        PauliTerm::parse(-1.0, "XX").unwrap(),
        PauliTerm::parse(0.5, "ZZ").unwrap(),
    ];
    let h = Hamiltonian::new(2, terms, ShiftMode::Commuting).unwrap();
    let obs = DiagonalObservable::identity(2).unwrap();
    let mut last = f64::INFINITY;
    for shift in [1.0, 0.75, 0.5, 0.25, 0.0] {
        let r = sign_corrected_reference(&h, shift, 1.0, &obs, 5).unwrap();
        assert!(
            r.s_corr <= last + 1e-12,
            "shift {shift}: {} after {last}",
            r.s_corr
        );
        if shift == 1.0 {
            assert_eq!(r.negative, 0);
            assert!((r.s_corr - 1.0).abs() < 1e-14);
        }
        last = r.s_corr;
    }
    assert!(last < 1.0);
}

#[test]
fn sign_reference_on_xx_split() {
    let terms = vec![
        PauliTerm::parse(-1.5, "XX").unwrap(),
        PauliTerm::parse(0.5, "XX").unwrap(),
    ];
    let h = Hamiltonian::new(2, terms, ShiftMode::Commuting).unwrap();
    for obs in [
        DiagonalObservable::identity(2).unwrap(),
        DiagonalObservable::pauli_z(2, 0).unwrap(),
        DiagonalObservable::projector("01".parse().unwrap()).unwrap(),
    ] {
        let r = sign_corrected_reference(&h, 0.0, 1.0, &obs, 4).unwrap();
        let t = truncated_series_reference(&h, 0.0, 1.0, &obs, 4).unwrap();
        assert!((r.expectation - t).abs() < 1e-10);
    }
}

#[test]
fn general_shift_chain_matches_oracle() {
    let terms = vec![
        PauliTerm::parse(0.7, "XY").unwrap(),
        PauliTerm::parse(-1.3, "ZI").unwrap(),
        PauliTerm::parse(-0.9, "IX").unwrap(),
    ];
    let h = Hamiltonian::new(2, terms, ShiftMode::general(48)).unwrap();
    let beta = 0.1;
    let mut params = ChainParams::new(beta, 60_000, 5_000, 21);
    params.cutoff = 48;
    params.adaptive_cutoff = false;
    let trace = run_chain(&h, &params).unwrap();
    assert_eq!(trace.stats.positivity_violations, 0);
    let z0 = DiagonalObservable::pauli_z(2, 0).unwrap();
    let est = diagonal_estimate(&trace, &z0).unwrap();
    let exact = exact_thermal_oracle(&h, beta, &z0.to_matrix())
        .unwrap()
        .expectation;
    assert!(exact.abs() > 0.05);
    assert!(within(&est, exact, 3.0), "{est} vs {exact}");
    let e = energy_estimate(&trace, beta, trace.shift_constant).unwrap();
    assert!(
        within(&e, exact_thermal_energy(&h, beta).unwrap(), 3.0),
        "{e}"
    );
}
