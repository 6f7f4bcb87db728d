//! Gate count and simulator wall time against system size and order.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{
    gate_count, weight_circuit_amplitude, BasisState, SignConvention, MAX_QUBITS,
};
use crate::error::{Error, Result};
use crate::pauli::decompose_xx_chain;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n_sites: usize,
    pub n: usize,
    pub gate_count: usize,
    /// Wall time of one full-register statevector evaluation. This is the
    /// classical simulator's `2^(N+n)` cost, not a hardware runtime.
    pub simulator_seconds: f64,
}

/// One row per `(N, n)` on the XX chain with a random string.
pub fn scaling_probe(n_sites: &[usize], orders: &[usize]) -> Result<Vec<ScalingRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut rows = Vec::new();
    for &ns in n_sites {
        let h = decompose_xx_chain(ns, 1.0, ns > 2)?;
        for &n in orders {
            if ns + n > MAX_QUBITS {
                return Err(Error::QubitCap {
                    max: MAX_QUBITS,
                    got: ns + n,
                });
            }
            let string: Vec<usize> = (0..n).map(|_| rng.random_range(0..h.n_terms())).collect();
            let alpha = BasisState::new(ns, rng.random_range(0..1u64 << ns))?;
            let start = Instant::now();
            weight_circuit_amplitude(&h, alpha, &string, SignConvention::PlusAncilla)?;
            rows.push(ScalingRow {
                n_sites: ns,
                n,
                gate_count: gate_count(ns, n),
                simulator_seconds: start.elapsed().as_secs_f64(),
            });
        }
    }
    Ok(rows)
}

/// True when, for every `N`, the gate counts at consecutive equally spaced
/// orders have zero second difference.
pub fn is_affine(rows: &[ScalingRow]) -> bool {
    let mut by_n: std::collections::BTreeMap<usize, Vec<(usize, usize)>> = Default::default();
    for r in rows {
        by_n.entry(r.n_sites).or_default().push((r.n, r.gate_count));
    }
    by_n.values_mut().all(|pts| {
        pts.sort();
        pts.windows(3).all(|w| {
            let (d1, d2) = (w[1].0 - w[0].0, w[2].0 - w[1].0);
            let g = |i: usize| w[i].1 as i128;
            (g(2) - g(1)) * d1 as i128 == (g(1) - g(0)) * d2 as i128
        })
    })
}

pub fn scaling_table(rows: &[ScalingRow]) -> String {
    let mut out = String::from("n_sites,n,gate_count,simulator_seconds\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.6e}\n",
            r.n_sites, r.n, r.gate_count, r.simulator_seconds
        ));
    }
    out
}
