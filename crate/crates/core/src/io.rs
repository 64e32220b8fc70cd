//! JSON wire formats. Complex numbers are `[re, im]` pairs, matrices are
//! row-major, and channel targets are 1-based on the wire.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coherence::CoherenceResult;
use crate::error::{Error, Result};
use crate::lincore::{validate_density, ComplexMatrix, DensityMatrix, Tolerances, C64};
use crate::qsd::QsdEnsemble;
use crate::resource::{validate_channel, KrausElement, PioChannel, TOL_COMPLETENESS};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        MatrixJson {
            rows: m.rows(),
            cols: m.cols(),
            entries: m.entries().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        ComplexMatrix::new(
            j.rows,
            j.cols,
            j.entries.into_iter().map(|[re, im]| C64::new(re, im)).collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityJson {
    pub dim_a: usize,
    pub dim_b: usize,
    #[serde(flatten)]
    pub matrix: MatrixJson,
}

impl From<&DensityMatrix> for DensityJson {
    fn from(d: &DensityMatrix) -> Self {
        DensityJson {
            dim_a: d.dim_a(),
            dim_b: d.dim_b(),
            matrix: d.matrix().into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementJson {
    pub targets: Vec<usize>,
    pub coeffs: Vec<[f64; 2]>,
    pub phase0: Vec<f64>,
    pub deriv: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelJson {
    pub dim_a: usize,
    pub elements: Vec<ElementJson>,
}

impl From<&PioChannel> for ChannelJson {
    fn from(ch: &PioChannel) -> Self {
        ChannelJson {
            dim_a: ch.dim_a(),
            elements: ch
                .elements()
                .iter()
                .map(|el| ElementJson {
                    targets: el.targets.iter().map(|t| t + 1).collect(),
                    coeffs: el.coeffs.iter().map(|z| [z.re, z.im]).collect(),
                    phase0: el.phase0.clone(),
                    deriv: el.deriv.clone(),
                })
                .collect(),
        }
    }
}

impl ChannelJson {
    /// Converts to a channel without validating completeness.
    pub fn into_channel_unchecked(self) -> Result<PioChannel> {
        let mut elements = Vec::with_capacity(self.elements.len());
        for (l, e) in self.elements.into_iter().enumerate() {
            let mut targets = Vec::with_capacity(e.targets.len());
            for t in e.targets {
                if t == 0 || t > self.dim_a {
                    return Err(Error::IndexOutOfRange(format!(
                        "element {}: target {t} outside 1..={}",
                        l + 1,
                        self.dim_a
                    )));
                }
                targets.push(t - 1);
            }
            elements.push(KrausElement::new(
                targets,
                e.coeffs.into_iter().map(|[re, im]| C64::new(re, im)).collect(),
                e.phase0,
                e.deriv,
            ));
        }
        Ok(PioChannel::new_unchecked(self.dim_a, elements))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleJson {
    pub priors: Vec<f64>,
    pub states: Vec<MatrixJson>,
}

impl From<&QsdEnsemble> for EnsembleJson {
    fn from(e: &QsdEnsemble) -> Self {
        EnsembleJson {
            priors: e.priors().to_vec(),
            states: e.states().iter().map(MatrixJson::from).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceResultJson {
    pub value: f64,
    pub mode: String,
    pub certificate: ChannelJson,
}

impl From<&CoherenceResult> for CoherenceResultJson {
    fn from(r: &CoherenceResult) -> Self {
        CoherenceResultJson {
            value: r.value,
            mode: r.mode.as_str().to_string(),
            certificate: (&r.certificate).into(),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn density_from_json(text: &str, tol: &Tolerances) -> Result<DensityMatrix> {
    let j: DensityJson = parse(text)?;
    validate_density(j.matrix.try_into()?, j.dim_a, j.dim_b, tol)
}

pub fn channel_from_json(text: &str, tol: f64) -> Result<PioChannel> {
    let ch = parse::<ChannelJson>(text)?.into_channel_unchecked()?;
    validate_channel(&ch, tol)?;
    Ok(ch)
}

pub fn ensemble_from_json(text: &str) -> Result<QsdEnsemble> {
    let j: EnsembleJson = parse(text)?;
    let states = j
        .states
        .into_iter()
        .map(ComplexMatrix::try_from)
        .collect::<Result<Vec<_>>>()?;
    QsdEnsemble::new(j.priors, states)
}

pub fn read_density(path: &Path, tol: &Tolerances) -> Result<DensityMatrix> {
    density_from_json(&read(path)?, tol)
}

pub fn read_channel(path: &Path) -> Result<PioChannel> {
    channel_from_json(&read(path)?, TOL_COMPLETENESS)
}

pub fn read_ensemble(path: &Path) -> Result<QsdEnsemble> {
    ensemble_from_json(&read(path)?)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("wire types always serialize")
}
