//! Quantum surrogate model: encode, run the layered circuit, measure, rescale.

use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circuit::{assemble_qnn, QnnArchitecture};
use crate::optimize::{cobyla_minimize, CobylaConfig, OptResult};
use crate::rng::SeededRng;
use crate::scaler::{FeatureScaler, TargetScaler};
use crate::sim::{CircuitSpec, Statevector};
use crate::{Error, Result};

/// How the final state is reduced to one scalar in `[-1, 1]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    /// `<Z x Z x ... x Z>` over all qubits.
    #[default]
    ZString,
    /// Mean of the single-qubit `<Z_i>`.
    MeanZ,
}

impl Readout {
    fn measure(self, state: &Statevector) -> f64 {
        let n = state.n_qubits();
        match self {
            Readout::ZString => state.expectation_mask((1usize << n) - 1),
            Readout::MeanZ => (0..n).map(|q| state.expectation_mask(1 << q)).sum::<f64>() / n as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Raised to `n_params + 2` when smaller, the size of COBYLA's initial simplex.
    pub max_evals: usize,
    pub rhobeg: f64,
    pub rhoend: f64,
    pub init_seed: u64,
    pub init_range: (f64, f64),
    pub readout: Readout,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_evals: 3000,
            rhobeg: 1.0,
            rhoend: 1e-4,
            init_seed: 0,
            init_range: (-PI, PI),
            readout: Readout::ZString,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_evals == 0 {
            return Err(Error::Argument("max_evals must be >= 1".into()));
        }
        let (lo, hi) = self.init_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Argument(alloc::format!("invalid init_range ({lo}, {hi})")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateModel {
    arch: QnnArchitecture,
    spec: CircuitSpec,
    theta: Vec<f64>,
    input_scaler: FeatureScaler,
    output_scaler: TargetScaler,
    readout: Readout,
}

impl SurrogateModel {
    /// Rebuilds the circuit from `arch` and checks every shape.
    pub fn from_parts(
        arch: QnnArchitecture,
        theta: Vec<f64>,
        input_scaler: FeatureScaler,
        output_scaler: TargetScaler,
        readout: Readout,
    ) -> Result<Self> {
        let spec = assemble_qnn(&arch)?;
        if theta.len() != spec.n_params() {
            return Err(Error::dimension("theta", spec.n_params(), theta.len()));
        }
        if input_scaler.dim() != arch.n_features {
            return Err(Error::dimension(
                "input scaler features",
                arch.n_features,
                input_scaler.dim(),
            ));
        }
        Ok(Self {
            arch,
            spec,
            theta,
            input_scaler,
            output_scaler,
            readout,
        })
    }

    pub fn arch(&self) -> &QnnArchitecture {
        &self.arch
    }

    pub fn spec(&self) -> &CircuitSpec {
        &self.spec
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn input_scaler(&self) -> &FeatureScaler {
        &self.input_scaler
    }

    pub fn output_scaler(&self) -> &TargetScaler {
        &self.output_scaler
    }

    pub fn readout(&self) -> Readout {
        self.readout
    }

    /// Circuit output in `[-1, 1]` for already-normalised features.
    pub fn raw_output(&self, features: &[f64]) -> Result<f64> {
        let mut state = Statevector::zero(self.spec.n_qubits())?;
        raw_with(&self.spec, self.readout, &mut state, features, &self.theta)
    }

    /// Prediction in target units plus a flag telling whether `x` had to be
    /// clamped into the training domain.
    pub fn predict_checked(&self, x: &[f64]) -> Result<(f64, bool)> {
        let (u, clamped) = self.input_scaler.encode_clamped(x)?;
        Ok((self.output_scaler.decode(self.raw_output(&u)?), clamped))
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.predict_checked(x).map(|(y, _)| y)
    }

    /// Predictions for many rows, reusing one statevector.
    pub fn predict_many(&self, inputs: &[Vec<f64>]) -> Result<Vec<f64>> {
        let mut state = Statevector::zero(self.spec.n_qubits())?;
        inputs
            .iter()
            .map(|x| {
                let (u, _) = self.input_scaler.encode_clamped(x)?;
                let e = raw_with(&self.spec, self.readout, &mut state, &u, &self.theta)?;
                Ok(self.output_scaler.decode(e))
            })
            .collect()
    }

    /// Mean squared error in the normalised target space `[-1, 1]`.
    pub fn mse_loss(&self, inputs: &[Vec<f64>], targets: &[f64]) -> Result<f64> {
        check_rows(inputs, targets)?;
        let mut state = Statevector::zero(self.spec.n_qubits())?;
        let mut sum = 0.0;
        for (x, &y) in inputs.iter().zip(targets) {
            let (u, _) = self.input_scaler.encode_clamped(x)?;
            let e = raw_with(&self.spec, self.readout, &mut state, &u, &self.theta)?;
            let r = e - self.output_scaler.encode(y);
            sum += r * r;
        }
        Ok(sum / inputs.len() as f64)
    }
}

fn raw_with(
    spec: &CircuitSpec,
    readout: Readout,
    state: &mut Statevector,
    features: &[f64],
    theta: &[f64],
) -> Result<f64> {
    spec.run_into(state, features, theta)?;
    Ok(readout.measure(state))
}

fn check_rows(inputs: &[Vec<f64>], targets: &[f64]) -> Result<()> {
    if inputs.is_empty() {
        return Err(Error::Argument("empty dataset".into()));
    }
    if inputs.len() != targets.len() {
        return Err(Error::dimension("targets", inputs.len(), targets.len()));
    }
    Ok(())
}

/// Trains a QNN surrogate with COBYLA on the normalised MSE.
pub fn fit(
    arch: &QnnArchitecture,
    inputs: &[Vec<f64>],
    targets: &[f64],
    cfg: &TrainConfig,
) -> Result<(SurrogateModel, OptResult)> {
    cfg.validate()?;
    arch.validate()?;
    check_rows(inputs, targets)?;
    if inputs[0].len() != arch.n_features {
        return Err(Error::dimension("input features", arch.n_features, inputs[0].len()));
    }
    let input_scaler = FeatureScaler::fit(inputs)?;
    let output_scaler = TargetScaler::fit(targets)?;
    let spec = assemble_qnn(arch)?;

    let encoded: Vec<Vec<f64>> = inputs.iter().map(|x| input_scaler.encode(x)).collect::<Result<_>>()?;
    let scaled_targets: Vec<f64> = targets.iter().map(|&y| output_scaler.encode(y)).collect();

    let mut rng = SeededRng::new(cfg.init_seed);
    let (lo, hi) = cfg.init_range;
    let theta0: Vec<f64> = (0..spec.n_params()).map(|_| rng.uniform_in(lo, hi)).collect();

    let mut state = Statevector::zero(spec.n_qubits())?;
    let readout = cfg.readout;
    let n_rows = encoded.len() as f64;
    let objective = |theta: &[f64]| {
        let mut sum = 0.0;
        for (u, &t) in encoded.iter().zip(&scaled_targets) {
            // shapes were checked above, so the run cannot fail
            let e = raw_with(&spec, readout, &mut state, u, theta).unwrap_or(f64::NAN);
            let r = e - t;
            sum += r * r;
        }
        sum / n_rows
    };
    let budget = CobylaConfig {
        rhobeg: cfg.rhobeg,
        rhoend: cfg.rhoend,
        max_evals: cfg.max_evals.max(spec.n_params() + 2),
    };
    let result = cobyla_minimize(objective, &theta0, &budget)?;

    let model = SurrogateModel {
        arch: *arch,
        spec,
        theta: result.best_point.clone(),
        input_scaler,
        output_scaler,
        readout,
    };
    Ok((model, result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::AnsatzSchedule;
    use crate::metrics::r2_score;
    use alloc::vec;

    fn line_model(arch: QnnArchitecture, theta: Vec<f64>) -> SurrogateModel {
        SurrogateModel::from_parts(
            arch,
            theta,
            FeatureScaler {
                min: vec![0.0; arch.n_features],
                max: vec![1.0; arch.n_features],
            },
            TargetScaler { min: -3.0, max: 7.0 },
            Readout::ZString,
        )
        .unwrap()
    }

    #[test]
    fn identity_circuit_predicts_target_max() {
        let arch = QnnArchitecture::new(2, 2, 2, AnsatzSchedule::Circuit11Only);
        let model = line_model(arch, vec![0.0; arch.n_params()]);
        assert!((model.raw_output(&[0.0, 0.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((model.predict(&[0.0, 0.0]).unwrap() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn decode_is_affine_in_expectation() {
        let arch = QnnArchitecture::new(2, 1, 3, AnsatzSchedule::Alternating);
        let theta: Vec<f64> = (0..arch.n_params()).map(|k| 0.3 * k as f64 - 1.0).collect();
        let model = line_model(arch, theta);
        let x = [0.25, 0.8];
        let e = model.raw_output(&x).unwrap();
        assert!((-1.0..=1.0).contains(&e));
        let expected = -3.0 + (e + 1.0) / 2.0 * 10.0;
        assert!((model.predict(&x).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn clamping_flag() {
        let arch = QnnArchitecture::new(1, 2, 1, AnsatzSchedule::Alternating);
        let model = line_model(arch, vec![0.1; arch.n_params()]);
        assert!(!model.predict_checked(&[0.5]).unwrap().1);
        let (y, clamped) = model.predict_checked(&[1.5]).unwrap();
        assert!(clamped);
        assert_eq!(y, model.predict(&[1.0]).unwrap());
        assert!(model.predict(&[0.1, 0.2]).is_err());
    }

    #[test]
    fn mean_z_readout_in_range() {
        let arch = QnnArchitecture::new(2, 2, 2, AnsatzSchedule::Alternating);
        let theta: Vec<f64> = (0..arch.n_params()).map(|k| libm::sin(k as f64)).collect();
        let mut model = line_model(arch, theta);
        model.readout = Readout::MeanZ;
        let e = model.raw_output(&[0.3, 0.9]).unwrap();
        assert!((-1.0..=1.0).contains(&e));
    }

    #[test]
    fn mse_matches_direct_loop() {
        let arch = QnnArchitecture::new(2, 1, 2, AnsatzSchedule::Alternating);
        let theta: Vec<f64> = (0..arch.n_params()).map(|k| 0.7 * k as f64).collect();
        let model = line_model(arch, theta);
        let inputs = vec![vec![0.0, 0.5], vec![0.2, 0.1], vec![0.9, 1.0]];
        let targets = vec![1.0, -2.0, 6.5];
        let mut sum = 0.0;
        for (x, y) in inputs.iter().zip(&targets) {
            let p = model.raw_output(x).unwrap();
            let t = 2.0 * (y + 3.0) / 10.0 - 1.0;
            sum += (p - t) * (p - t);
        }
        let loss = model.mse_loss(&inputs, &targets).unwrap();
        assert!((loss - sum / 3.0).abs() < 1e-14);
        assert!(model.mse_loss(&[], &[]).is_err());
    }

    #[test]
    fn from_parts_checks_shapes() {
        let arch = QnnArchitecture::new(2, 1, 2, AnsatzSchedule::Alternating);
        let s = FeatureScaler {
            min: vec![0.0; 2],
            max: vec![1.0; 2],
        };
        let t = TargetScaler { min: 0.0, max: 1.0 };
        assert!(SurrogateModel::from_parts(arch, vec![0.0; 3], s.clone(), t, Readout::ZString).is_err());
        let s1 = FeatureScaler {
            min: vec![0.0],
            max: vec![1.0],
        };
        assert!(SurrogateModel::from_parts(arch, vec![0.0; arch.n_params()], s1, t, Readout::ZString).is_err());
    }

    #[test]
    fn fit_identity_1d() {
        let inputs: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 / 19.0]).collect();
        let targets: Vec<f64> = inputs.iter().map(|x| x[0]).collect();
        let arch = QnnArchitecture::new(1, 2, 6, AnsatzSchedule::Alternating);
        let cfg = TrainConfig {
            max_evals: 1500,
            init_seed: 1,
            ..TrainConfig::default()
        };
        let (model, result) = fit(&arch, &inputs, &targets, &cfg).unwrap();
        let preds = model.predict_many(&inputs).unwrap();
        let r2 = r2_score(&targets, &preds).unwrap();
        assert!(r2 >= 0.95, "r2 {r2}");
        let loss = model.mse_loss(&inputs, &targets).unwrap();
        assert_eq!(loss, result.best_value);
        assert!(result.best_value <= result.history[0].1);

        let (again, _) = fit(&arch, &inputs, &targets, &cfg).unwrap();
        assert_eq!(again.theta(), model.theta());
    }

    #[test]
    fn fit_rejects_constant_target() {
        let inputs: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
        let arch = QnnArchitecture::new(1, 2, 1, AnsatzSchedule::Alternating);
        let err = fit(&arch, &inputs, &[2.0; 5], &TrainConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Scaling { ref column, .. } if column == "y"));
    }
}
