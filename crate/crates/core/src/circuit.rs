//! Dense statevector simulation of the weight circuits.
//!
//! Qubit `q` is bit `q` of the amplitude index. System qubits come first
//! (`0..N`), ancillas follow (`N..N+a`). All kernels stride over the
//! amplitude array; no gate is ever expanded to a full matrix.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{Hamiltonian, PauliString, PauliTerm, MAX_SITES};

/// Hard cap on `N + a` for a simulated register.
pub const MAX_QUBITS: usize = MAX_SITES;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A computational basis state of the system register, the `alpha` label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    len: usize,
    bits: u64,
}

impl BasisState {
    pub fn new(len: usize, bits: u64) -> Result<Self> {
        if len == 0 || len > MAX_SITES {
            return Err(Error::UnsupportedSize(len));
        }
        if bits >> len != 0 {
            return Err(Error::IndexOutOfRange {
                index: bits as usize,
                bound: 1 << len,
            });
        }
        Ok(BasisState { len, bits })
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(len, 0)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn index(&self) -> usize {
        self.bits as usize
    }

    pub fn bit(&self, site: usize) -> bool {
        self.bits >> site & 1 == 1
    }

    pub fn flipped(&self, site: usize) -> Self {
        BasisState {
            len: self.len,
            bits: self.bits ^ (1 << site),
        }
    }

    /// Every basis state of `len` sites, in index order.
    pub fn all(len: usize) -> impl Iterator<Item = BasisState> {
        (0..1u64 << len).map(move |bits| BasisState { len, bits })
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Parses `"001"` (site 0 first); `u`/`d` and arrows are accepted for up/down.
impl FromStr for BasisState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = 0u64;
        let mut len = 0;
        for ch in s.trim().chars() {
            let b = match ch {
                '0' | 'u' | '↑' => 0,
                '1' | 'd' | '↓' => 1,
                _ => return Err(Error::Config(format!("invalid basis state {s:?}"))),
            };
            bits |= b << len;
            len += 1;
        }
        Self::new(len, bits)
    }
}

/// Single-qubit input states for ancilla registers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AncillaState {
    Zero,
    One,
    Plus,
    Minus,
    /// `sqrt(s/(s+1))|0> + sqrt(1/(s+1))|1>` with shift factor `s` (`2M` by default).
    Phi(f64),
}

impl AncillaState {
    pub fn phi(cutoff: usize) -> Self {
        AncillaState::Phi(2.0 * cutoff as f64)
    }

    pub fn amplitudes(self) -> [Complex64; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            AncillaState::Zero => [ONE, ZERO],
            AncillaState::One => [ZERO, ONE],
            AncillaState::Plus => [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
            AncillaState::Minus => [Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
            AncillaState::Phi(s) => [
                Complex64::new((s / (s + 1.0)).sqrt(), 0.0),
                Complex64::new((1.0 / (s + 1.0)).sqrt(), 0.0),
            ],
        }
    }
}

/// Labels `0`, `1`, `+`, `-`, `phi(M)`.
impl FromStr for AncillaState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t {
            "0" => Ok(AncillaState::Zero),
            "1" => Ok(AncillaState::One),
            "+" => Ok(AncillaState::Plus),
            "-" => Ok(AncillaState::Minus),
            _ => t
                .strip_prefix("phi(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|m| m.trim().parse::<usize>().ok())
                .filter(|&m| m > 0)
                .map(AncillaState::phi)
                .ok_or_else(|| Error::UnknownAncillaState(s.to_string())),
        }
    }
}

/// Where the sign of `h_b` lives in the controlled-term circuit.
///
/// `PlusAncilla`: ancillas start in `|+>` and the gate applies
/// `sgn(h_b) P_b`. `MinusAncilla`: ancillas start in `|->` and the gate
/// applies `-sgn(h_b) P_b`; for the XX chain (`h_b < 0`) this is the bare
/// `X X` gate, `U|a>|-> = (|a>|0> - XX|a>|1>)/sqrt 2`. In both cases the
/// amplitude is read against `|alpha>|+ ... +>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignConvention {
    #[default]
    PlusAncilla,
    MinusAncilla,
}

impl SignConvention {
    pub fn input_ancilla(self) -> AncillaState {
        match self {
            SignConvention::PlusAncilla => AncillaState::Plus,
            SignConvention::MinusAncilla => AncillaState::Minus,
        }
    }

    pub fn gate_sign(self, term: &PauliTerm) -> f64 {
        match self {
            SignConvention::PlusAncilla => term.sign(),
            SignConvention::MinusAncilla => -term.sign(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingleQubitGate {
    Identity,
    Hadamard,
    X,
}

impl SingleQubitGate {
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        match self {
            SingleQubitGate::Identity => [[ONE, ZERO], [ZERO, ONE]],
            SingleQubitGate::Hadamard => [[h, h], [h, -h]],
            SingleQubitGate::X => [[ZERO, ONE], [ONE, ZERO]],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
    n_system: usize,
    n_ancilla: usize,
}

impl StateVector {
    /// Product state `|alpha> (x) |a_1> (x) ... (x) |a_k>`.
    pub fn prepare(alpha: BasisState, ancillas: &[AncillaState]) -> Result<Self> {
        let n_system = alpha.len();
        let n_qubits = n_system + ancillas.len();
        check_qubits(n_qubits)?;
        // Build ancilla amplitudes over the high bits, then place alpha in the low bits.
        let mut anc = vec![ONE];
        for (i, a) in ancillas.iter().enumerate() {
            let [a0, a1] = a.amplitudes();
            let mut next = vec![ZERO; anc.len() * 2];
            for (j, v) in anc.iter().enumerate() {
                next[j] = v * a0;
                next[j | 1 << i] = v * a1;
            }
            anc = next;
        }
        let mut amps = vec![ZERO; 1 << n_qubits];
        for (j, v) in anc.into_iter().enumerate() {
            amps[(j << n_system) | alpha.index()] = v;
        }
        Ok(StateVector {
            amps,
            n_system,
            n_ancilla: ancillas.len(),
        })
    }

    pub fn from_amplitudes(
        n_system: usize,
        n_ancilla: usize,
        amps: Vec<Complex64>,
    ) -> Result<Self> {
        check_qubits(n_system + n_ancilla)?;
        if amps.len() != 1 << (n_system + n_ancilla) {
            return Err(Error::LengthMismatch {
                expected: 1 << (n_system + n_ancilla),
                got: amps.len(),
            });
        }
        Ok(StateVector {
            amps,
            n_system,
            n_ancilla,
        })
    }

    pub fn n_system(&self) -> usize {
        self.n_system
    }

    pub fn n_ancilla(&self) -> usize {
        self.n_ancilla
    }

    pub fn n_qubits(&self) -> usize {
        self.n_system + self.n_ancilla
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn apply_single(&mut self, qubit: usize, gate: [[Complex64; 2]; 2]) -> Result<()> {
        if qubit >= self.n_qubits() {
            return Err(Error::IndexOutOfRange {
                index: qubit,
                bound: self.n_qubits(),
            });
        }
        let stride = 1usize << qubit;
        for block in (0..self.amps.len()).step_by(stride << 1) {
            for k in block..block + stride {
                let a = self.amps[k];
                let b = self.amps[k + stride];
                self.amps[k] = gate[0][0] * a + gate[0][1] * b;
                self.amps[k + stride] = gate[1][0] * a + gate[1][1] * b;
            }
        }
        Ok(())
    }

    /// Applies `sign * P` to the system register on the branch where the
    /// qubits in `control_mask` equal `control_value`.
    pub fn apply_controlled_string(
        &mut self,
        control_mask: usize,
        control_value: usize,
        sign: f64,
        string: &PauliString,
    ) -> Result<()> {
        if string.len() != self.n_system {
            return Err(Error::LengthMismatch {
                expected: self.n_system,
                got: string.len(),
            });
        }
        let s = Complex64::new(sign, 0.0);
        let x = string.x_mask() as usize;
        if x == 0 {
            for (k, amp) in self.amps.iter_mut().enumerate() {
                if k & control_mask == control_value {
                    *amp *= s * string.apply_to_basis(k).0;
                }
            }
            return Ok(());
        }
        let high = 1usize << (usize::BITS - 1 - x.leading_zeros());
        for k in 0..self.amps.len() {
            if k & high != 0 || k & control_mask != control_value {
                continue;
            }
            let j = k ^ x;
            let (pk, _) = string.apply_to_basis(k);
            let (pj, _) = string.apply_to_basis(j);
            let a = self.amps[k];
            let b = self.amps[j];
            self.amps[j] = s * pk * a;
            self.amps[k] = s * pj * b;
        }
        Ok(())
    }

    /// The controlled term unitary `U_{A,B}`: identity when the ancilla is
    /// `|0>`, the signed string (per `convention`) when it is `|1>`.
    pub fn apply_controlled_pauli(
        &mut self,
        term: &PauliTerm,
        control_ancilla: usize,
        convention: SignConvention,
    ) -> Result<()> {
        if control_ancilla >= self.n_ancilla {
            return Err(Error::IndexOutOfRange {
                index: control_ancilla,
                bound: self.n_ancilla,
            });
        }
        let bit = 1usize << (self.n_system + control_ancilla);
        self.apply_controlled_string(bit, bit, convention.gate_sign(term), term.string())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_system != other.n_system || self.n_ancilla != other.n_ancilla {
            return Err(Error::ShapeMismatch(
                self.n_system,
                self.n_ancilla,
                other.n_system,
                other.n_ancilla,
            ));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Applies one gate per qubit and returns `|<0...0|R psi>|^2`.
    pub fn measure_all_zero_probability(&self, rotations: &[SingleQubitGate]) -> Result<f64> {
        if rotations.len() != self.n_qubits() {
            return Err(Error::LengthMismatch {
                expected: self.n_qubits(),
                got: rotations.len(),
            });
        }
        let mut psi = self.clone();
        for (q, g) in rotations.iter().enumerate() {
            if *g != SingleQubitGate::Identity {
                psi.apply_single(q, g.matrix())?;
            }
        }
        Ok(psi.amps[0].norm_sqr().min(1.0))
    }

    /// Writes `index,re,im` rows.
    pub fn dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "index,re,im")?;
        for (k, a) in self.amps.iter().enumerate() {
            writeln!(out, "{k},{:e},{:e}", a.re, a.im)?;
        }
        Ok(())
    }
}

/// Free-function form: `<psi_ref|psi_out>`.
pub fn amplitude_overlap(psi_out: &StateVector, psi_ref: &StateVector) -> Result<Complex64> {
    psi_ref.inner(psi_out)
}

fn check_qubits(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        Err(Error::QubitCap {
            max: MAX_QUBITS,
            got: n,
        })
    } else {
        Ok(())
    }
}

/// Controlled-string applications needed for one weight evaluation.
pub fn gate_count(_n_system: usize, n_expansion: usize) -> usize {
    n_expansion
}

/// Output and reference states of the commuting-case weight circuit for
/// operator string `string` (`string[0]` is `b_1`, applied first, on
/// ancilla 0).
pub fn weight_circuit(
    h: &Hamiltonian,
    alpha: BasisState,
    string: &[usize],
    convention: SignConvention,
) -> Result<(StateVector, StateVector)> {
    let n = string.len();
    let mut psi = StateVector::prepare(alpha, &vec![convention.input_ancilla(); n])?;
    for (i, &b) in string.iter().enumerate() {
        let term = h.terms().get(b).ok_or(Error::IndexOutOfRange {
            index: b,
            bound: h.n_terms(),
        })?;
        psi.apply_controlled_pauli(term, i, convention)?;
    }
    let reference = StateVector::prepare(alpha, &vec![AncillaState::Plus; n])?;
    Ok((psi, reference))
}

/// `<alpha,+..+| U_{b_n} ... U_{b_1} |alpha, in..in>`, equal to
/// `<alpha|H_{b_n}...H_{b_1}|alpha> / (2^n |h_{b_n}...h_{b_1}|)`.
pub fn weight_circuit_amplitude(
    h: &Hamiltonian,
    alpha: BasisState,
    string: &[usize],
    convention: SignConvention,
) -> Result<Complex64> {
    let (out, reference) = weight_circuit(h, alpha, string, convention)?;
    amplitude_overlap(&out, &reference)
}

/// Rotations that map `|alpha>|+..+>` to `|0..0>`: `X` on set system bits,
/// Hadamard on each ancilla.
pub fn reference_rotations(alpha: BasisState, n_ancilla: usize) -> Vec<SingleQubitGate> {
    (0..alpha.len())
        .map(|i| {
            if alpha.bit(i) {
                SingleQubitGate::X
            } else {
                SingleQubitGate::Identity
            }
        })
        .chain(std::iter::repeat_n(SingleQubitGate::Hadamard, n_ancilla))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::decompose_xx_chain;
    use crate::pauli::dense::{string_expectation, string_matrix, CMatrix};

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn prepare_fig1_state() {
        let alpha: BasisState = "001".parse().unwrap();
        assert_eq!(alpha.index(), 4);
        let psi = StateVector::prepare(alpha, &[AncillaState::Minus; 3]).unwrap();
        assert_eq!(psi.amplitudes().len(), 64);
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prepare_without_ancillas() {
        let psi = StateVector::prepare(BasisState::zeros(1).unwrap(), &[]).unwrap();
        assert_eq!(psi.amplitudes(), &[ONE, ZERO]);
    }

    #[test]
    fn prepare_phi_ancilla() {
        let psi = StateVector::prepare(BasisState::zeros(1).unwrap(), &["phi(1)".parse().unwrap()])
            .unwrap();
        let a = psi.amplitudes();
        assert!((a[0].re - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(a[1], ZERO);
        assert!((a[2].re - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(a[3], ZERO);
    }

    #[test]
    fn ancilla_labels() {
        assert_eq!("+".parse::<AncillaState>().unwrap(), AncillaState::Plus);
        assert_eq!(
            "phi(4)".parse::<AncillaState>().unwrap(),
            AncillaState::Phi(8.0)
        );
        assert!(matches!(
            "w".parse::<AncillaState>(),
            Err(Error::UnknownAncillaState(_))
        ));
        assert!("phi(0)".parse::<AncillaState>().is_err());
    }

    #[test]
    fn qubit_cap() {
        let alpha = BasisState::zeros(20).unwrap();
        assert!(matches!(
            StateVector::prepare(alpha, &[AncillaState::Zero; 5]),
            Err(Error::QubitCap { .. })
        ));
    }

    #[test]
    fn control_zero_is_identity() {
        let mut psi = StateVector::prepare("10".parse().unwrap(), &[AncillaState::Zero]).unwrap();
        let before = psi.clone();
        psi.apply_controlled_pauli(
            &PauliTerm::parse(-0.7, "YX").unwrap(),
            0,
            SignConvention::PlusAncilla,
        )
        .unwrap();
        assert_eq!(psi, before);
    }

    #[test]
    fn control_one_flips() {
        let mut psi = StateVector::prepare("0".parse().unwrap(), &[AncillaState::One]).unwrap();
        psi.apply_controlled_pauli(
            &PauliTerm::parse(1.0, "X").unwrap(),
            0,
            SignConvention::PlusAncilla,
        )
        .unwrap();
        // |1>_sys |1>_anc = index 3
        assert!(close(psi.amplitudes()[3], ONE, 1e-15));
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn control_out_of_range() {
        let mut psi = StateVector::prepare("0".parse().unwrap(), &[AncillaState::One]).unwrap();
        assert!(psi
            .apply_controlled_pauli(
                &PauliTerm::parse(1.0, "X").unwrap(),
                1,
                SignConvention::PlusAncilla
            )
            .is_err());
    }

    #[test]
    fn minus_convention_matches_dense_unitary() {
        // U = |0><0| (x) 1 + |1><1| (x) (-sgn h) XX on the ancilla-high ordering
        let term = PauliTerm::parse(-1.0, "XX").unwrap();
        let mut psi = StateVector::prepare("00".parse().unwrap(), &[AncillaState::Minus]).unwrap();
        let input: Vec<Complex64> = psi.amplitudes().to_vec();
        psi.apply_controlled_pauli(&term, 0, SignConvention::MinusAncilla)
            .unwrap();

        let p0 = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
        let p1 = CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, ONE]);
        let xx = string_matrix(term.string()).unwrap();
        let u = p0.kronecker(&CMatrix::identity(4, 4)) + p1.kronecker(&xx);
        let v = u * nalgebra::DVector::from_vec(input);
        for k in 0..8 {
            assert!(close(psi.amplitudes()[k], v[k], 1e-15));
        }
        // (|00>|0> - |11>|1>)/sqrt 2
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(
            psi.amplitudes()[0b000],
            Complex64::new(h, 0.0),
            1e-15
        ));
        assert!(close(
            psi.amplitudes()[0b111],
            Complex64::new(-h, 0.0),
            1e-15
        ));
    }

    #[test]
    fn single_bond_overlap() {
        let h = decompose_xx_chain(2, 1.0, false).unwrap();
        for alpha in BasisState::all(2) {
            let amp =
                weight_circuit_amplitude(&h, alpha, &[0], SignConvention::PlusAncilla).unwrap();
            let dense = string_expectation(&h, &[0], alpha.index()).unwrap();
            assert!(close(amp, dense / 2.0, 1e-14));
        }
    }

    #[test]
    fn overlap_with_self_is_one() {
        let psi = StateVector::prepare("011".parse().unwrap(), &[AncillaState::Plus; 2]).unwrap();
        assert!(close(amplitude_overlap(&psi, &psi).unwrap(), ONE, 1e-14));
        let other = StateVector::prepare("011".parse().unwrap(), &[AncillaState::Plus]).unwrap();
        assert!(matches!(
            amplitude_overlap(&psi, &other),
            Err(Error::ShapeMismatch(..))
        ));
    }

    #[test]
    fn fig1_three_site_circuit() {
        let h = decompose_xx_chain(3, 1.0, true).unwrap();
        let alpha: BasisState = "001".parse().unwrap();
        let string = [0, 1, 2];
        let amp =
            weight_circuit_amplitude(&h, alpha, &string, SignConvention::MinusAncilla).unwrap();
        let dense = string_expectation(&h, &string, alpha.index()).unwrap();
        assert!(close(amp, dense / 8.0, 1e-12));

        let (out, _) = weight_circuit(&h, alpha, &string, SignConvention::MinusAncilla).unwrap();
        let p = out
            .measure_all_zero_probability(&reference_rotations(alpha, 3))
            .unwrap();
        assert!((p - amp.norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn all_zero_probability_examples() {
        let zero = StateVector::prepare("00".parse().unwrap(), &[]).unwrap();
        assert!(
            (zero
                .measure_all_zero_probability(&[SingleQubitGate::Identity; 2])
                .unwrap()
                - 1.0)
                .abs()
                < 1e-15
        );
        let plus = StateVector::prepare("0".parse().unwrap(), &[AncillaState::Plus]).unwrap();
        let p = plus
            .measure_all_zero_probability(&[SingleQubitGate::Identity, SingleQubitGate::Hadamard])
            .unwrap();
        assert!((p - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gate_counts() {
        assert_eq!(gate_count(3, 3), 3);
        assert_eq!(gate_count(7, 0), 0);
        assert_eq!(gate_count(5, 7), 7);
    }

    #[test]
    fn dump_format() {
        let psi = StateVector::prepare("1".parse().unwrap(), &[]).unwrap();
        let mut buf = Vec::new();
        psi.dump(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "index,re,im\n0,0e0,0e0\n1,1e0,0e0\n"
        );
    }
}
