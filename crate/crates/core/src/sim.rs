//! Dense statevector simulation.
//!
//! Gates are applied by strided in-place sweeps over the amplitude vector; no
//! 2^n x 2^n matrices are ever formed. Rotation conventions are the usual
//! `R_P(a) = exp(-i a P / 2)` for `P` in {X, Y, Z}.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::{Error, Result};

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    H,
    Cnot,
    Cz,
}

impl GateKind {
    pub fn is_two_qubit(self) -> bool {
        matches!(self, GateKind::Cnot | GateKind::Cz)
    }
}

/// Where a rotation gate gets its angle from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Binding {
    /// A constant angle in radians.
    Fixed(f64),
    /// `scale * features[index]`.
    Feature { index: usize, scale: f64 },
    /// `params[index]`.
    Param(usize),
}

impl Binding {
    fn resolve(self, features: &[f64], params: &[f64]) -> f64 {
        match self {
            Binding::Fixed(a) => a,
            Binding::Feature { index, scale } => scale * features[index],
            Binding::Param(index) => params[index],
        }
    }
}

/// One gate of a circuit. Only rotations carry a binding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateOp {
    Rotation { axis: Axis, qubit: usize, binding: Binding },
    H { qubit: usize },
    Cnot { control: usize, target: usize },
    Cz { control: usize, target: usize },
}

impl GateOp {
    pub fn rx(qubit: usize, binding: Binding) -> Self {
        GateOp::Rotation {
            axis: Axis::X,
            qubit,
            binding,
        }
    }

    pub fn ry(qubit: usize, binding: Binding) -> Self {
        GateOp::Rotation {
            axis: Axis::Y,
            qubit,
            binding,
        }
    }

    pub fn rz(qubit: usize, binding: Binding) -> Self {
        GateOp::Rotation {
            axis: Axis::Z,
            qubit,
            binding,
        }
    }

    pub fn kind(&self) -> GateKind {
        match self {
            GateOp::Rotation { axis: Axis::X, .. } => GateKind::Rx,
            GateOp::Rotation { axis: Axis::Y, .. } => GateKind::Ry,
            GateOp::Rotation { axis: Axis::Z, .. } => GateKind::Rz,
            GateOp::H { .. } => GateKind::H,
            GateOp::Cnot { .. } => GateKind::Cnot,
            GateOp::Cz { .. } => GateKind::Cz,
        }
    }

    pub fn binding(&self) -> Option<Binding> {
        match *self {
            GateOp::Rotation { binding, .. } => Some(binding),
            _ => None,
        }
    }

    /// The wires the gate touches, control first for two-qubit gates.
    pub fn qubits(&self) -> ([usize; 2], usize) {
        match *self {
            GateOp::Rotation { qubit, .. } | GateOp::H { qubit } => ([qubit, qubit], 1),
            GateOp::Cnot { control, target } | GateOp::Cz { control, target } => ([control, target], 2),
        }
    }

    fn check_wires(&self, n_qubits: usize) -> Result<()> {
        let (wires, count) = self.qubits();
        for &q in &wires[..count] {
            if q >= n_qubits {
                return Err(Error::Argument(format!(
                    "{:?} acts on qubit {q} but the register has {n_qubits} qubits",
                    self.kind()
                )));
            }
        }
        if count == 2 && wires[0] == wires[1] {
            return Err(Error::Argument(format!(
                "{:?} control and target are both qubit {}",
                self.kind(),
                wires[0]
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// `|0...0>` on `n_qubits` wires.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Capacity(format!(
                "{n_qubits} qubits requested, supported range is 1..={MAX_QUBITS}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amplitudes })
    }

    /// Wraps raw amplitudes; the length must be a power of two. The vector is
    /// taken as-is, without renormalisation.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Argument(format!(
                "amplitude vector length {len} is not a power of two >= 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::Capacity(format!("{n_qubits} qubits exceeds {MAX_QUBITS}")));
        }
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Resets to `|0...0>` without reallocating.
    pub fn reset(&mut self) {
        for a in self.amplitudes.iter_mut() {
            *a = Complex64::new(0.0, 0.0);
        }
        self.amplitudes[0] = Complex64::new(1.0, 0.0);
    }

    /// Applies `gate`. Rotations need `angle`; other gates ignore it.
    pub fn apply(&mut self, gate: &GateOp, angle: Option<f64>) -> Result<()> {
        gate.check_wires(self.n_qubits)?;
        match *gate {
            GateOp::Rotation { axis, qubit, .. } => {
                let angle =
                    angle.ok_or_else(|| Error::Binding(format!("{:?} on qubit {qubit} has no angle", gate.kind())))?;
                self.rotate(axis, qubit, angle);
            }
            GateOp::H { qubit } => self.hadamard(qubit),
            GateOp::Cnot { control, target } => self.cnot(control, target),
            GateOp::Cz { control, target } => self.cz(control, target),
        }
        Ok(())
    }

    fn rotate(&mut self, axis: Axis, qubit: usize, angle: f64) {
        let (s, c) = libm::sincos(0.5 * angle);
        match axis {
            // [[c, -is], [-is, c]]
            Axis::X => {
                let mis = Complex64::new(0.0, -s);
                self.sweep_pairs(qubit, |a0, a1| (a0 * c + a1 * mis, a0 * mis + a1 * c));
            }
            // [[c, -s], [s, c]]
            Axis::Y => {
                self.sweep_pairs(qubit, |a0, a1| (a0 * c - a1 * s, a0 * s + a1 * c));
            }
            // diag(e^{-ia/2}, e^{ia/2})
            Axis::Z => {
                let lo = Complex64::new(c, -s);
                let hi = Complex64::new(c, s);
                self.sweep_pairs(qubit, |a0, a1| (a0 * lo, a1 * hi));
            }
        }
    }

    fn hadamard(&mut self, qubit: usize) {
        let r = core::f64::consts::FRAC_1_SQRT_2;
        self.sweep_pairs(qubit, |a0, a1| ((a0 + a1) * r, (a0 - a1) * r));
    }

    fn cnot(&mut self, control: usize, target: usize) {
        let cbit = 1usize << control;
        let tbit = 1usize << target;
        for i in 0..self.amplitudes.len() {
            if i & cbit != 0 && i & tbit == 0 {
                self.amplitudes.swap(i, i | tbit);
            }
        }
    }

    fn cz(&mut self, a: usize, b: usize) {
        let mask = (1usize << a) | (1usize << b);
        for (i, amp) in self.amplitudes.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
    }

    /// Visits every (|..0_q..>, |..1_q..>) amplitude pair once.
    #[inline]
    fn sweep_pairs<F>(&mut self, qubit: usize, f: F)
    where
        F: Fn(Complex64, Complex64) -> (Complex64, Complex64),
    {
        let stride = 1usize << qubit;
        for block in self.amplitudes.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (n0, n1) = f(*a0, *a1);
                *a0 = n0;
                *a1 = n1;
            }
        }
    }

    /// `<psi| Z_{q1} Z_{q2} ... |psi>` over the given wires.
    pub fn expectation_z_string(&self, qubits: &[usize]) -> Result<f64> {
        let mask = self.z_mask(qubits)?;
        Ok(self.expectation_mask(mask))
    }

    pub(crate) fn expectation_mask(&self, mask: usize) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(b, a)| {
                let p = a.norm_sqr();
                if (b & mask).count_ones() & 1 == 0 {
                    p
                } else {
                    -p
                }
            })
            .sum()
    }

    fn z_mask(&self, qubits: &[usize]) -> Result<usize> {
        if qubits.is_empty() {
            return Err(Error::Argument("empty qubit set for Z-string".into()));
        }
        let mut mask = 0usize;
        for &q in qubits {
            if q >= self.n_qubits {
                return Err(Error::Argument(format!(
                    "qubit {q} out of range for {} qubits",
                    self.n_qubits
                )));
            }
            mask |= 1 << q;
        }
        Ok(mask)
    }
}

/// An immutable, validated gate list.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    n_qubits: usize,
    gates: Vec<GateOp>,
    n_params: usize,
    n_features: usize,
}

impl CircuitSpec {
    /// Validates wires and bindings. Every parameter index in `0..n_params`
    /// must be bound by exactly one gate and every feature index in
    /// `0..n_features` by at least one.
    pub fn new(n_qubits: usize, gates: Vec<GateOp>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Capacity(format!(
                "{n_qubits} qubits requested, supported range is 1..={MAX_QUBITS}"
            )));
        }
        let mut param_uses: Vec<usize> = Vec::new();
        let mut feature_uses: Vec<usize> = Vec::new();
        for gate in &gates {
            gate.check_wires(n_qubits)?;
            match gate.binding() {
                Some(Binding::Param(k)) => bump(&mut param_uses, k),
                Some(Binding::Feature { index, .. }) => bump(&mut feature_uses, index),
                Some(Binding::Fixed(a)) if !a.is_finite() => {
                    return Err(Error::Binding(format!("fixed angle {a} is not finite")))
                }
                _ => {}
            }
        }
        if let Some(k) = param_uses.iter().position(|&c| c != 1) {
            return Err(Error::Binding(format!(
                "parameter {k} is bound by {} gates, expected exactly 1",
                param_uses[k]
            )));
        }
        if let Some(k) = feature_uses.iter().position(|&c| c == 0) {
            return Err(Error::Binding(format!("feature {k} is never used")));
        }
        Ok(Self {
            n_qubits,
            n_params: param_uses.len(),
            n_features: feature_uses.len(),
            gates,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn count_kind(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind() == kind).count()
    }

    fn check_inputs(&self, features: &[f64], params: &[f64]) -> Result<()> {
        if features.len() != self.n_features {
            return Err(Error::dimension("features", self.n_features, features.len()));
        }
        if params.len() != self.n_params {
            return Err(Error::dimension("params", self.n_params, params.len()));
        }
        Ok(())
    }

    /// Runs the circuit from `|0...0>`.
    pub fn run(&self, features: &[f64], params: &[f64]) -> Result<Statevector> {
        let mut state = Statevector::zero(self.n_qubits)?;
        self.run_into(&mut state, features, params)?;
        Ok(state)
    }

    /// Resets `state` to `|0...0>` and runs the circuit in place.
    pub fn run_into(&self, state: &mut Statevector, features: &[f64], params: &[f64]) -> Result<()> {
        self.check_inputs(features, params)?;
        if state.n_qubits != self.n_qubits {
            return Err(Error::dimension("statevector qubits", self.n_qubits, state.n_qubits));
        }
        state.reset();
        for gate in &self.gates {
            let angle = gate.binding().map(|b| b.resolve(features, params));
            state.apply(gate, angle)?;
        }
        Ok(())
    }

    /// Z-string expectation of the final state on `qubits`.
    pub fn expectation(&self, qubits: &[usize], features: &[f64], params: &[f64]) -> Result<f64> {
        let state = self.run(features, params)?;
        state.expectation_z_string(qubits)
    }

    /// Exact gradient of [`CircuitSpec::expectation`] w.r.t. `params` via the
    /// +-pi/2 shift rule (valid since every trainable gate is a Pauli rotation).
    pub fn parameter_shift_gradient(&self, qubits: &[usize], features: &[f64], params: &[f64]) -> Result<Vec<f64>> {
        self.check_inputs(features, params)?;
        let mut state = Statevector::zero(self.n_qubits)?;
        let mask = state.z_mask(qubits)?;
        let mut shifted = params.to_vec();
        let mut grad = Vec::with_capacity(params.len());
        for k in 0..params.len() {
            shifted[k] = params[k] + FRAC_PI_2;
            self.run_into(&mut state, features, &shifted)?;
            let plus = state.expectation_mask(mask);
            shifted[k] = params[k] - FRAC_PI_2;
            self.run_into(&mut state, features, &shifted)?;
            let minus = state.expectation_mask(mask);
            shifted[k] = params[k];
            grad.push(0.5 * (plus - minus));
        }
        Ok(grad)
    }
}

fn bump(counts: &mut Vec<usize>, index: usize) {
    if counts.len() <= index {
        counts.resize(index + 1, 0);
    }
    counts[index] += 1;
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    const TOL: f64 = 1e-12;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_state(state: &Statevector, expected: &[Complex64]) {
        assert_eq!(state.amplitudes().len(), expected.len());
        for (a, e) in state.amplitudes().iter().zip(expected) {
            assert!((a - e).norm_sqr() < TOL * TOL, "{a} != {e}");
        }
    }

    #[test]
    fn zero_state_shapes() {
        assert_state(&Statevector::zero(1).unwrap(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        assert_state(
            &Statevector::zero(2).unwrap(),
            &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        );
        let s = Statevector::zero(4).unwrap();
        assert_eq!(s.amplitudes().len(), 16);
        assert_eq!(s.amplitudes()[0], c(1.0, 0.0));
    }

    #[test]
    fn zero_state_capacity() {
        assert!(matches!(Statevector::zero(0), Err(Error::Capacity(_))));
        assert!(matches!(Statevector::zero(25), Err(Error::Capacity(_))));
    }

    #[test]
    fn rx_pi_flips_with_phase() {
        let mut s = Statevector::zero(1).unwrap();
        s.apply(&GateOp::rx(0, Binding::Fixed(PI)), Some(PI)).unwrap();
        assert_state(&s, &[c(0.0, 0.0), c(0.0, -1.0)]);
    }

    #[test]
    fn hadamard_on_zero() {
        let mut s = Statevector::zero(1).unwrap();
        s.apply(&GateOp::H { qubit: 0 }, None).unwrap();
        let r = core::f64::consts::FRAC_1_SQRT_2;
        assert_state(&s, &[c(r, 0.0), c(r, 0.0)]);
    }

    #[test]
    fn cnot_control_set() {
        // |10>: qubit 1 set -> index 2
        let mut amps = vec![c(0.0, 0.0); 4];
        amps[2] = c(1.0, 0.0);
        let mut s = Statevector::from_amplitudes(amps).unwrap();
        s.apply(&GateOp::Cnot { control: 1, target: 0 }, None).unwrap();
        assert_state(&s, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn missing_angle_is_binding_error() {
        let mut s = Statevector::zero(1).unwrap();
        let err = s.apply(&GateOp::ry(0, Binding::Param(0)), None).unwrap_err();
        assert!(matches!(err, Error::Binding(_)));
    }

    #[test]
    fn bad_wires_rejected() {
        let mut s = Statevector::zero(2).unwrap();
        assert!(s.apply(&GateOp::H { qubit: 2 }, None).is_err());
        assert!(s.apply(&GateOp::Cz { control: 1, target: 1 }, None).is_err());
    }

    #[test]
    fn run_single_gate_circuits() {
        let fm = CircuitSpec::new(1, vec![GateOp::rx(0, Binding::Feature { index: 0, scale: 1.0 })]).unwrap();
        assert_state(&fm.run(&[0.0], &[]).unwrap(), &[c(1.0, 0.0), c(0.0, 0.0)]);

        let p = CircuitSpec::new(1, vec![GateOp::rx(0, Binding::Param(0))]).unwrap();
        assert_state(&p.run(&[], &[PI]).unwrap(), &[c(0.0, 0.0), c(0.0, -1.0)]);
    }

    #[test]
    fn run_length_mismatch() {
        let p = CircuitSpec::new(1, vec![GateOp::rx(0, Binding::Param(0))]).unwrap();
        assert!(matches!(p.run(&[], &[]), Err(Error::Dimension { .. })));
        assert!(matches!(p.run(&[1.0], &[0.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn spec_rejects_shared_or_missing_params() {
        let shared = vec![GateOp::rx(0, Binding::Param(0)), GateOp::ry(0, Binding::Param(0))];
        assert!(CircuitSpec::new(1, shared).is_err());
        let gap = vec![GateOp::rx(0, Binding::Param(1))];
        assert!(CircuitSpec::new(1, gap).is_err());
        let unused_feature = vec![GateOp::rx(0, Binding::Feature { index: 1, scale: 1.0 })];
        assert!(CircuitSpec::new(1, unused_feature).is_err());
    }

    #[test]
    fn z_string_values() {
        let zero = Statevector::zero(3).unwrap();
        assert!((zero.expectation_z_string(&[0, 1, 2]).unwrap() - 1.0).abs() < TOL);

        let one = Statevector::from_amplitudes(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((one.expectation_z_string(&[0]).unwrap() + 1.0).abs() < TOL);

        let mut plus = Statevector::zero(1).unwrap();
        plus.apply(&GateOp::H { qubit: 0 }, None).unwrap();
        assert!(plus.expectation_z_string(&[0]).unwrap().abs() < TOL);

        assert!(zero.expectation_z_string(&[]).is_err());
    }

    #[test]
    fn shift_rule_single_ry() {
        let spec = CircuitSpec::new(1, vec![GateOp::ry(0, Binding::Param(0))]).unwrap();
        let g0 = spec.parameter_shift_gradient(&[0], &[], &[0.0]).unwrap();
        assert!(g0[0].abs() < TOL);
        let g1 = spec.parameter_shift_gradient(&[0], &[], &[FRAC_PI_2]).unwrap();
        assert!((g1[0] + 1.0).abs() < TOL);
    }

    #[test]
    fn inverse_pairs_restore_state() {
        let spec = CircuitSpec::new(
            3,
            vec![
                GateOp::H { qubit: 0 },
                GateOp::ry(1, Binding::Fixed(0.7)),
                GateOp::Cnot { control: 0, target: 2 },
                GateOp::rz(2, Binding::Fixed(1.3)),
            ],
        )
        .unwrap();
        let start = spec.run(&[], &[]).unwrap();
        let pairs: [(GateOp, Option<f64>, GateOp, Option<f64>); 6] = [
            (
                GateOp::rx(1, Binding::Fixed(0.0)),
                Some(0.9),
                GateOp::rx(1, Binding::Fixed(0.0)),
                Some(-0.9),
            ),
            (
                GateOp::ry(2, Binding::Fixed(0.0)),
                Some(2.1),
                GateOp::ry(2, Binding::Fixed(0.0)),
                Some(-2.1),
            ),
            (
                GateOp::rz(0, Binding::Fixed(0.0)),
                Some(-0.4),
                GateOp::rz(0, Binding::Fixed(0.0)),
                Some(0.4),
            ),
            (GateOp::H { qubit: 1 }, None, GateOp::H { qubit: 1 }, None),
            (
                GateOp::Cnot { control: 2, target: 1 },
                None,
                GateOp::Cnot { control: 2, target: 1 },
                None,
            ),
            (
                GateOp::Cz { control: 0, target: 1 },
                None,
                GateOp::Cz { control: 0, target: 1 },
                None,
            ),
        ];
        for (g, a, inv, b) in pairs {
            let mut s = start.clone();
            s.apply(&g, a).unwrap();
            s.apply(&inv, b).unwrap();
            assert_state(&s, start.amplitudes());
        }
    }
}
