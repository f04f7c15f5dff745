//! Versioned JSON model documents.

use std::path::Path;

use serde::{Deserialize, Serialize};

use qsurrogate_core::ann::{MlpModel, HIDDEN1, HIDDEN2};
use qsurrogate_core::circuit::QnnArchitecture;
use qsurrogate_core::qnn::{Readout, SurrogateModel};
use qsurrogate_core::scaler::{FeatureScaler, TargetScaler};

use crate::csvio::write_file;
use crate::error::{Error, Result};

pub const FORMAT: &str = "qsurrogate-model";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelBody {
    Qnn {
        architecture: QnnArchitecture,
        readout: Readout,
        theta: Vec<f64>,
    },
    Ann {
        layer_dims: Vec<usize>,
        params: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub format: String,
    pub version: u32,
    pub model: ModelBody,
    pub input_scaler: FeatureScaler,
    pub output_scaler: TargetScaler,
}

/// A trained model of either family.
#[derive(Debug, Clone, PartialEq)]
pub enum Surrogate {
    Qnn(SurrogateModel),
    Ann(MlpModel),
}

impl Surrogate {
    pub fn n_inputs(&self) -> usize {
        match self {
            Surrogate::Qnn(m) => m.arch().n_features,
            Surrogate::Ann(m) => m.n_inputs(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Surrogate::Qnn(_) => "qnn",
            Surrogate::Ann(_) => "ann",
        }
    }

    pub fn predict_many(&self, inputs: &[Vec<f64>]) -> Result<Vec<f64>> {
        Ok(match self {
            Surrogate::Qnn(m) => m.predict_many(inputs)?,
            Surrogate::Ann(m) => m.predict_many(inputs)?,
        })
    }

    pub fn to_document(&self) -> ModelDocument {
        let (model, input_scaler, output_scaler) = match self {
            Surrogate::Qnn(m) => (
                ModelBody::Qnn {
                    architecture: *m.arch(),
                    readout: m.readout(),
                    theta: m.theta().to_vec(),
                },
                m.input_scaler().clone(),
                *m.output_scaler(),
            ),
            Surrogate::Ann(m) => (
                ModelBody::Ann {
                    layer_dims: vec![m.n_inputs(), HIDDEN1, HIDDEN2, 1],
                    params: m.params().to_vec(),
                },
                m.input_scaler().clone(),
                *m.output_scaler(),
            ),
        };
        ModelDocument {
            format: FORMAT.into(),
            version: VERSION,
            model,
            input_scaler,
            output_scaler,
        }
    }

    pub fn from_document(doc: ModelDocument) -> std::result::Result<Self, String> {
        if doc.format != FORMAT {
            return Err(format!("format is '{}', expected '{FORMAT}'", doc.format));
        }
        if doc.version != VERSION {
            return Err(format!(
                "unsupported version {} (this build reads {VERSION})",
                doc.version
            ));
        }
        match doc.model {
            ModelBody::Qnn {
                architecture,
                readout,
                theta,
            } => SurrogateModel::from_parts(architecture, theta, doc.input_scaler, doc.output_scaler, readout)
                .map(Surrogate::Qnn),
            ModelBody::Ann { layer_dims, params } => {
                let expected = [doc.input_scaler.dim(), HIDDEN1, HIDDEN2, 1];
                if layer_dims != expected {
                    return Err(format!("layer_dims {layer_dims:?}, expected {expected:?}"));
                }
                MlpModel::from_parts(params, doc.input_scaler, doc.output_scaler).map(Surrogate::Ann)
            }
        }
        .map_err(|e| e.to_string())
    }

    /// Pretty JSON; floats use the shortest round-trip form, so reloading
    /// restores every parameter bit for bit.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.to_document()).expect("model documents always serialise");
        text.push('\n');
        text
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, self.to_json().as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model_err = |message: String| Error::Model {
            path: path.to_path_buf(),
            message,
        };
        let doc: ModelDocument = serde_json::from_str(&text).map_err(|e| model_err(e.to_string()))?;
        Surrogate::from_document(doc).map_err(model_err)
    }
}
