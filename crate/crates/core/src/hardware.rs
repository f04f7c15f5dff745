//! Survival-rate model for running the layered QNN on noisy hardware.
//!
//! A circuit "survives" if no gate and no readout fails. With per-gate error
//! rates `e1` (single-qubit), `e2` (two-qubit) and `er` (readout), and
//! `s`/`t` single/two-qubit gates per layer over `L` layers with `r`
//! readouts, the survival probability is
//! `(1 - e1)^(s L) * (1 - e2)^(t L) * (1 - er)^r`.
//!
//! For the alternating ansatz on `n` qubits a layer holds on average
//! `4n - 2` single-qubit and `n - 1` two-qubit gates, and every qubit is read
//! out once.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardwareProfile {
    pub label: String,
    pub e_single: f64,
    pub e_two: f64,
    pub e_readout: f64,
}

impl HardwareProfile {
    pub fn new(label: impl Into<String>, e_single: f64, e_two: f64, e_readout: f64) -> Result<Self> {
        let p = Self {
            label: label.into(),
            e_single,
            e_two,
            e_readout,
        };
        p.validate()?;
        Ok(p)
    }

    /// ibmq_belem calibration means: Pauli-X 0.04 %, CNOT 1.08 %, readout 2.17 %.
    pub fn ibmq_belem() -> Self {
        Self {
            label: "ibmq_belem".into(),
            e_single: 0.0004,
            e_two: 0.0108,
            e_readout: 0.0217,
        }
    }

    /// Falcon r5.11 (Pauli-X 0.02 %, CNOT 0.9 %); its readout error is not
    /// published alongside, so the caller supplies it.
    pub fn falcon_r5_11(e_readout: f64) -> Result<Self> {
        Self::new("falcon_r5_11", 0.0002, 0.009, e_readout)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("e_single", self.e_single),
            ("e_two", self.e_two),
            ("e_readout", self.e_readout),
        ] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::Argument(format!(
                    "profile '{}': {name} = {v} is not in [0, 1)",
                    self.label
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateBudget {
    pub singles_per_layer: f64,
    pub twos_per_layer: f64,
    pub readouts: usize,
}

/// Average per-layer gate counts of the alternating circuit.
///
/// Feature map + circuit 11 has `5n - 4` single-qubit gates, feature map +
/// circuit 9 has `3n`; both blocks have `n - 1` entanglers.
pub fn gate_budget(n_qubits: usize) -> Result<GateBudget> {
    if n_qubits < 2 {
        return Err(Error::Argument(format!(
            "gate budget needs n >= 2 qubits, got {n_qubits}"
        )));
    }
    let n = n_qubits as f64;
    Ok(GateBudget {
        singles_per_layer: 0.5 * ((5.0 * n - 4.0) + 3.0 * n),
        twos_per_layer: n - 1.0,
        readouts: n_qubits,
    })
}

fn survival_with(e_single: f64, e_two: f64, e_readout: f64, budget: &GateBudget, n_layers: usize) -> f64 {
    let layers = n_layers as f64;
    libm::pow(1.0 - e_single, budget.singles_per_layer * layers)
        * libm::pow(1.0 - e_two, budget.twos_per_layer * layers)
        * libm::pow(1.0 - e_readout, budget.readouts as f64)
}

pub fn survival_rate(profile: &HardwareProfile, n_qubits: usize, n_layers: usize) -> Result<f64> {
    profile.validate()?;
    if n_layers == 0 {
        return Err(Error::Argument("n_layers must be >= 1".into()));
    }
    let budget = gate_budget(n_qubits)?;
    Ok(survival_with(
        profile.e_single,
        profile.e_two,
        profile.e_readout,
        &budget,
        n_layers,
    ))
}

/// `table[i][j]` is the survival rate for `qubits[i]` and `layers[j]`.
pub fn survival_table(profile: &HardwareProfile, qubits: &[usize], layers: &[usize]) -> Result<Vec<Vec<f64>>> {
    if qubits.is_empty() || layers.is_empty() {
        return Err(Error::Argument("survival table needs qubit and layer lists".into()));
    }
    qubits
        .iter()
        .map(|&n| layers.iter().map(|&l| survival_rate(profile, n, l)).collect())
        .collect()
}

/// Two-qubit error rate at which the circuit's survival equals `target`,
/// holding the single-qubit rate fixed and tying the readout error to
/// `readout_ratio * e_two`. Solved by bisection; survival is strictly
/// decreasing in `e_two`, so the root is unique.
pub fn required_two_qubit_error(
    target_survival: f64,
    n_qubits: usize,
    n_layers: usize,
    e_single: f64,
    readout_ratio: f64,
) -> Result<f64> {
    if !(target_survival > 0.0 && target_survival < 1.0) {
        return Err(Error::Argument(format!(
            "target survival {target_survival} not in (0, 1)"
        )));
    }
    if !(readout_ratio >= 0.0 && readout_ratio.is_finite()) {
        return Err(Error::Argument(format!("readout ratio {readout_ratio} must be >= 0")));
    }
    if !(0.0..1.0).contains(&e_single) {
        return Err(Error::Argument(format!("single-qubit error {e_single} not in [0, 1)")));
    }
    if n_layers == 0 {
        return Err(Error::Argument("n_layers must be >= 1".into()));
    }
    let budget = gate_budget(n_qubits)?;
    let survival = |e2: f64| survival_with(e_single, e2, readout_ratio * e2, &budget, n_layers);

    let upper = if readout_ratio > 0.5 { 0.5 / readout_ratio } else { 1.0 };
    let (mut lo, mut hi) = (0.0_f64, upper);
    if survival(lo) < target_survival {
        return Err(Error::Infeasible(format!(
            "even error-free two-qubit gates give survival {:.6} < target {target_survival}",
            survival(lo)
        )));
    }
    if survival(hi) > target_survival {
        return Err(Error::Infeasible(format!(
            "no two-qubit error below {hi} brings survival down to {target_survival}"
        )));
    }
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if survival(mid) > target_survival {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
