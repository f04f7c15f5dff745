//! The layered QNN circuit.
//!
//! Each layer is an RX angle-encoding feature map (repeated every layer when
//! re-uploading) followed by one trainable block. Two blocks are available:
//!
//! * circuit 11: RY+RZ on every wire, CNOTs `(1->0), (3->2), ...`, RY+RZ on the
//!   interior wires `1..n-2`, CNOTs `(2->1), (4->3), ...`;
//! * circuit 9: H on every wire, a CZ chain from the top pair down to `(1,0)`,
//!   RX on every wire.
//!
//! With `n` wires circuit 11 uses `4n - 4` parameters and circuit 9 uses `n`.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::sim::{Binding, CircuitSpec, GateKind, GateOp};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzSchedule {
    /// Circuit 11 on odd layers (1-based), circuit 9 on even layers.
    Alternating,
    Circuit11Only,
    Circuit9Only,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ansatz {
    Circuit11,
    Circuit9,
}

impl AnsatzSchedule {
    /// Block used by `layer` (1-based).
    pub fn ansatz_for_layer(self, layer: usize) -> Ansatz {
        match self {
            AnsatzSchedule::Circuit11Only => Ansatz::Circuit11,
            AnsatzSchedule::Circuit9Only => Ansatz::Circuit9,
            AnsatzSchedule::Alternating if layer % 2 == 1 => Ansatz::Circuit11,
            AnsatzSchedule::Alternating => Ansatz::Circuit9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QnnArchitecture {
    pub n_features: usize,
    /// Qubits per input feature (parallel encoding).
    pub replication: usize,
    pub n_layers: usize,
    pub schedule: AnsatzSchedule,
    /// Repeat the feature map in every layer.
    pub reupload: bool,
    /// Multiplier applied to the [0, 1]-normalised features before encoding.
    pub feature_scale: f64,
}

impl QnnArchitecture {
    pub fn new(n_features: usize, replication: usize, n_layers: usize, schedule: AnsatzSchedule) -> Self {
        Self {
            n_features,
            replication,
            n_layers,
            schedule,
            reupload: true,
            feature_scale: 1.0,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.replication * self.n_features
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_features == 0 || self.replication == 0 {
            return Err(Error::Architecture(format!(
                "need at least one feature and replication >= 1 (got d={}, r={})",
                self.n_features, self.replication
            )));
        }
        if self.n_qubits() < 2 {
            return Err(Error::Architecture(format!(
                "circuit needs at least 2 qubits, d*r = {}",
                self.n_qubits()
            )));
        }
        if self.n_qubits() > crate::sim::MAX_QUBITS {
            return Err(Error::Capacity(format!(
                "d*r = {} exceeds {} qubits",
                self.n_qubits(),
                crate::sim::MAX_QUBITS
            )));
        }
        if self.n_layers == 0 {
            return Err(Error::Architecture("n_layers must be >= 1".into()));
        }
        if !self.feature_scale.is_finite() || self.feature_scale <= 0.0 {
            return Err(Error::Architecture(format!(
                "feature_scale must be positive and finite, got {}",
                self.feature_scale
            )));
        }
        Ok(())
    }

    /// Closed-form trainable parameter count.
    pub fn n_params(&self) -> usize {
        let n = self.n_qubits();
        (1..=self.n_layers)
            .map(|layer| match self.schedule.ansatz_for_layer(layer) {
                Ansatz::Circuit11 => circuit11_params(n),
                Ansatz::Circuit9 => n,
            })
            .sum()
    }

    /// Number of RX feature-encoding gates in the whole circuit.
    pub fn n_encodings(&self) -> usize {
        let maps = if self.reupload { self.n_layers } else { 1 };
        maps * self.n_qubits()
    }

    /// At least two trainable parameters per feature encoding.
    pub fn meets_minimum_parameter_rule(&self) -> bool {
        self.n_params() >= 2 * self.n_encodings()
    }
}

fn circuit11_params(n: usize) -> usize {
    2 * n + 2 * n.saturating_sub(2)
}

/// One RX per wire; wire `j` encodes feature `j mod n_features`.
pub fn build_feature_map(n_qubits: usize, n_features: usize, feature_scale: f64) -> Result<Vec<GateOp>> {
    if n_features == 0 || n_qubits == 0 || !n_qubits.is_multiple_of(n_features) {
        return Err(Error::Architecture(format!(
            "{n_qubits} qubits cannot carry {n_features} features with integral replication"
        )));
    }
    Ok((0..n_qubits)
        .map(|q| {
            GateOp::rx(
                q,
                Binding::Feature {
                    index: q % n_features,
                    scale: feature_scale,
                },
            )
        })
        .collect())
}

fn require_two_qubits(n_qubits: usize) -> Result<()> {
    if n_qubits < 2 {
        return Err(Error::Architecture(format!(
            "ansatz blocks need at least 2 qubits, got {n_qubits}"
        )));
    }
    Ok(())
}

/// Circuit 11 with parameters `offset..offset + params_used`.
pub fn build_circuit11(n_qubits: usize, param_offset: usize) -> Result<(Vec<GateOp>, usize)> {
    require_two_qubits(n_qubits)?;
    let n = n_qubits;
    let mut gates = Vec::with_capacity(circuit11_params(n) + n - 1);
    let mut next = param_offset;
    let mut param = || {
        let p = Binding::Param(next);
        next += 1;
        p
    };

    for q in 0..n {
        gates.push(GateOp::ry(q, param()));
    }
    for q in 0..n {
        gates.push(GateOp::rz(q, param()));
    }
    for target in (0..n - 1).step_by(2) {
        gates.push(GateOp::Cnot {
            control: target + 1,
            target,
        });
    }
    let interior = 1..n - 1;
    for q in interior.clone() {
        gates.push(GateOp::ry(q, param()));
    }
    for q in interior {
        gates.push(GateOp::rz(q, param()));
    }
    // second CNOT row is shifted by one wire; for odd n it reaches the last wire
    for target in (1..n - 1).step_by(2) {
        gates.push(GateOp::Cnot {
            control: target + 1,
            target,
        });
    }
    Ok((gates, circuit11_params(n)))
}

/// Circuit 9 with parameters `offset..offset + n_qubits`.
pub fn build_circuit9(n_qubits: usize, param_offset: usize) -> Result<(Vec<GateOp>, usize)> {
    require_two_qubits(n_qubits)?;
    let n = n_qubits;
    let mut gates = Vec::with_capacity(3 * n - 1);
    gates.extend((0..n).map(|qubit| GateOp::H { qubit }));
    gates.extend((1..n).rev().map(|q| GateOp::Cz {
        control: q,
        target: q - 1,
    }));
    gates.extend((0..n).map(|q| GateOp::rx(q, Binding::Param(param_offset + q))));
    Ok((gates, n))
}

/// Builds the full layered circuit. Measurement is left to the caller.
pub fn assemble_qnn(arch: &QnnArchitecture) -> Result<CircuitSpec> {
    arch.validate()?;
    let n = arch.n_qubits();
    let feature_map = build_feature_map(n, arch.n_features, arch.feature_scale)?;
    let mut gates = Vec::new();
    let mut offset = 0;
    for layer in 1..=arch.n_layers {
        if layer == 1 || arch.reupload {
            gates.extend_from_slice(&feature_map);
        }
        let (block, used) = match arch.schedule.ansatz_for_layer(layer) {
            Ansatz::Circuit11 => build_circuit11(n, offset)?,
            Ansatz::Circuit9 => build_circuit9(n, offset)?,
        };
        gates.extend(block);
        offset += used;
    }
    let spec = CircuitSpec::new(n, gates)?;
    debug_assert_eq!(spec.n_params(), arch.n_params());
    debug_assert!(
        !(arch.schedule == AnsatzSchedule::Alternating && arch.reupload && n >= 4)
            || arch.meets_minimum_parameter_rule()
    );
    Ok(spec)
}

/// Average single- and two-qubit gate counts per layer of a built circuit
/// (feature maps included).
pub fn average_layer_counts(spec: &CircuitSpec, n_layers: usize) -> (f64, f64) {
    let singles = spec.gates().iter().filter(|g| !g.kind().is_two_qubit()).count();
    let twos = spec.count_kind(GateKind::Cnot) + spec.count_kind(GateKind::Cz);
    (singles as f64 / n_layers as f64, twos as f64 / n_layers as f64)
}
