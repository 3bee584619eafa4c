//! Dimensionality-reduction backends behind one out-of-sample interface.
//!
//! The explainer only ever sees a [`Reducer`]: something that maps an
//! N-vector to an N_r-vector. [`FittedDR`] bundles the three concrete
//! backends (PCA, RBF kernel PCA, autoencoder) and their JSON document form.

pub mod autoencoder;
pub mod kpca;
pub mod pca;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_len, Error, Result};
use crate::matrix::{dot, DataMatrix};

pub use autoencoder::{autoencoder_fit, autoencoder_fit_with, AutoencoderConfig, AutoencoderModel};
pub use kpca::{kpca_fit, KpcaModel};
pub use pca::{pca_fit, PcaModel, PcaSpectrum};

/// A black-box reducer with out-of-sample transform.
pub trait Reducer: Sync {
    fn input_dims(&self) -> usize;
    fn reduced_dims(&self) -> usize;
    fn transform(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Row-wise transform of a batch; an empty batch gives an empty
    /// `0 × reduced_dims` matrix.
    fn transform_batch(&self, batch: &DataMatrix) -> Result<DataMatrix> {
        check_len("batch columns", self.input_dims(), batch.cols())?;
        if batch.is_empty() {
            return Ok(DataMatrix::empty(self.reduced_dims()));
        }
        let mut values = Vec::with_capacity(batch.rows() * self.reduced_dims());
        for row in batch.iter_rows() {
            values.extend(self.transform(row)?);
        }
        DataMatrix::new(batch.rows(), self.reduced_dims(), values)
    }
}

/// Exact affine map `x ↦ W·x + b`. Useful as a reducer with a known
/// ground-truth explanation.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineReducer {
    pub weights: DataMatrix,
    pub offset: Vec<f64>,
}

impl AffineReducer {
    pub fn new(weights: DataMatrix, offset: Vec<f64>) -> Result<Self> {
        check_len("affine offset", weights.rows(), offset.len())?;
        check_finite("affine offset", &offset)?;
        Ok(Self { weights, offset })
    }

    pub fn linear(weights: DataMatrix) -> Self {
        let offset = vec![0.0; weights.rows()];
        Self { weights, offset }
    }
}

impl Reducer for AffineReducer {
    fn input_dims(&self) -> usize {
        self.weights.cols()
    }

    fn reduced_dims(&self) -> usize {
        self.weights.rows()
    }

    fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("affine input", self.input_dims(), x.len())?;
        Ok(self
            .weights
            .iter_rows()
            .zip(&self.offset)
            .map(|(w, b)| dot(w, x) + b)
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DrKind {
    #[serde(rename = "pca")]
    Pca,
    #[serde(rename = "kpca-rbf")]
    KpcaRbf,
    #[serde(rename = "autoencoder")]
    Autoencoder,
}

impl DrKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DrKind::Pca => "pca",
            DrKind::KpcaRbf => "kpca-rbf",
            DrKind::Autoencoder => "autoencoder",
        }
    }

    /// Short label used in experiment reports.
    pub fn label(self) -> &'static str {
        match self {
            DrKind::Pca => "PCA",
            DrKind::KpcaRbf => "KPCA",
            DrKind::Autoencoder => "AE",
        }
    }
}

impl fmt::Display for DrKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DrKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pca" => Ok(DrKind::Pca),
            "kpca" | "kpca-rbf" | "kpca_rbf" => Ok(DrKind::KpcaRbf),
            "ae" | "autoencoder" => Ok(DrKind::Autoencoder),
            other => Err(Error::InvalidInput(format!("unknown DR method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DrModel {
    Pca(PcaModel),
    Kpca(KpcaModel),
    Autoencoder(AutoencoderModel),
}

/// A trained reducer plus the seed it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedDR {
    pub model: DrModel,
    pub seed: u64,
}

/// Hyperparameters for [`FittedDR::fit`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitParams {
    pub kind: DrKind,
    pub n_components: usize,
    pub seed: u64,
    /// KPCA width; `None` means `1 / n_features`.
    pub gamma: Option<f64>,
    pub epochs: usize,
}

impl FitParams {
    pub const DEFAULT_EPOCHS: usize = 200;

    pub fn new(kind: DrKind, n_components: usize, seed: u64) -> Self {
        Self {
            kind,
            n_components,
            seed,
            gamma: None,
            epochs: Self::DEFAULT_EPOCHS,
        }
    }
}

impl FittedDR {
    pub fn fit(data: &DataMatrix, params: &FitParams) -> Result<Self> {
        let model = match params.kind {
            DrKind::Pca => DrModel::Pca(pca_fit(data, params.n_components)?),
            DrKind::KpcaRbf => DrModel::Kpca(kpca_fit(data, params.n_components, params.gamma)?),
            DrKind::Autoencoder => DrModel::Autoencoder(autoencoder_fit(
                data,
                params.n_components,
                params.seed,
                params.epochs,
            )?),
        };
        Ok(Self {
            model,
            seed: params.seed,
        })
    }

    pub fn from_pca(model: PcaModel, seed: u64) -> Self {
        Self {
            model: DrModel::Pca(model),
            seed,
        }
    }

    pub fn kind(&self) -> DrKind {
        match self.model {
            DrModel::Pca(_) => DrKind::Pca,
            DrModel::Kpca(_) => DrKind::KpcaRbf,
            DrModel::Autoencoder(_) => DrKind::Autoencoder,
        }
    }

    /// The intrinsic weight matrix, when the reducer has one (PCA).
    pub fn intrinsic_weights(&self) -> Option<&DataMatrix> {
        match &self.model {
            DrModel::Pca(p) => Some(&p.components),
            _ => None,
        }
    }

    pub fn as_pca(&self) -> Option<&PcaModel> {
        match &self.model {
            DrModel::Pca(p) => Some(p),
            _ => None,
        }
    }

    pub fn to_document(&self) -> ModelDocument {
        let body = match &self.model {
            DrModel::Pca(p) => ModelBody::Pca(p.clone()),
            DrModel::Kpca(k) => ModelBody::Kpca(k.clone()),
            DrModel::Autoencoder(a) => ModelBody::Autoencoder(a.clone()),
        };
        ModelDocument {
            format_version: ModelDocument::FORMAT_VERSION,
            input_dims: self.input_dims(),
            reduced_dims: self.reduced_dims(),
            seed: self.seed,
            body,
        }
    }

    pub fn from_document(doc: ModelDocument) -> Result<Self> {
        if doc.format_version != ModelDocument::FORMAT_VERSION {
            return Err(Error::Document(format!(
                "unsupported format_version {} (expected {})",
                doc.format_version,
                ModelDocument::FORMAT_VERSION
            )));
        }
        let model = match doc.body {
            ModelBody::Pca(p) => DrModel::Pca(p),
            ModelBody::Kpca(k) => DrModel::Kpca(k),
            ModelBody::Autoencoder(a) => DrModel::Autoencoder(a),
        };
        let fitted = Self {
            model,
            seed: doc.seed,
        };
        check_len("document input_dims", fitted.input_dims(), doc.input_dims)?;
        check_len(
            "document reduced_dims",
            fitted.reduced_dims(),
            doc.reduced_dims,
        )?;
        Ok(fitted)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("model document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument =
            serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        Self::from_document(doc)
    }

    fn transform_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.model {
            DrModel::Pca(p) => p.transform_unchecked(x, out),
            DrModel::Kpca(k) => k.transform_unchecked(x, out),
            DrModel::Autoencoder(a) => a.transform_unchecked(x, out),
        }
    }
}

impl Reducer for FittedDR {
    fn input_dims(&self) -> usize {
        match &self.model {
            DrModel::Pca(p) => p.input_dims(),
            DrModel::Kpca(k) => k.input_dims(),
            DrModel::Autoencoder(a) => a.input_dims(),
        }
    }

    fn reduced_dims(&self) -> usize {
        match &self.model {
            DrModel::Pca(p) => p.reduced_dims(),
            DrModel::Kpca(k) => k.reduced_dims(),
            DrModel::Autoencoder(a) => a.reduced_dims(),
        }
    }

    fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("reducer input", self.input_dims(), x.len())?;
        check_finite("reducer input", x)?;
        let mut out = vec![0.0; self.reduced_dims()];
        self.transform_into(x, &mut out);
        Ok(out)
    }

    fn transform_batch(&self, batch: &DataMatrix) -> Result<DataMatrix> {
        check_len("batch columns", self.input_dims(), batch.cols())?;
        let mut out = DataMatrix::zeros(batch.rows(), self.reduced_dims());
        for (i, row) in batch.iter_rows().enumerate() {
            self.transform_into(row, out.row_mut(i));
        }
        Ok(out)
    }
}

/// Versioned JSON form of a [`FittedDR`]. Matrices are row-major nested lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: u32,
    pub input_dims: usize,
    pub reduced_dims: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub body: ModelBody,
}

impl ModelDocument {
    pub const FORMAT_VERSION: u32 = 1;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ModelBody {
    #[serde(rename = "pca")]
    Pca(PcaModel),
    #[serde(rename = "kpca-rbf")]
    Kpca(KpcaModel),
    #[serde(rename = "autoencoder")]
    Autoencoder(AutoencoderModel),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> DataMatrix {
        let rows: Vec<Vec<f64>> = (0..25)
            .map(|i| {
                let t = i as f64 * 0.3;
                vec![
                    t.sin(),
                    t.cos() * 2.0,
                    (0.7 * t).sin() + 0.1 * t,
                    0.05 * t * t,
                ]
            })
            .collect();
        DataMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn empty_batch_keeps_reduced_width() {
        let dr = FittedDR::fit(&data(), &FitParams::new(DrKind::Pca, 2, 0)).unwrap();
        let out = dr.transform_batch(&DataMatrix::empty(4)).unwrap();
        assert_eq!((out.rows(), out.cols()), (0, 2));
    }

    #[test]
    fn batch_matches_single_transform() {
        for kind in [DrKind::Pca, DrKind::KpcaRbf, DrKind::Autoencoder] {
            let mut params = FitParams::new(kind, 2, 3);
            params.epochs = 3;
            let dr = FittedDR::fit(&data(), &params).unwrap();
            let single = dr.transform(data().row(4)).unwrap();
            let batch = dr.transform_batch(&data().select_rows(&[4])).unwrap();
            assert_eq!(batch.row(0), single.as_slice(), "{kind}");
        }
    }

    #[test]
    fn batch_shape_mismatch() {
        let dr = FittedDR::fit(&data(), &FitParams::new(DrKind::Pca, 2, 0)).unwrap();
        assert!(matches!(
            dr.transform_batch(&DataMatrix::zeros(2, 3)),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn document_round_trip_is_bit_exact() {
        for kind in [DrKind::Pca, DrKind::KpcaRbf, DrKind::Autoencoder] {
            let mut params = FitParams::new(kind, 3, 9);
            params.epochs = 4;
            let dr = FittedDR::fit(&data(), &params).unwrap();
            let back = FittedDR::from_json(&dr.to_json()).unwrap();
            assert_eq!(back, dr, "{kind}");
        }
    }

    #[test]
    fn document_carries_header_fields() {
        let dr = FittedDR::fit(&data(), &FitParams::new(DrKind::KpcaRbf, 2, 5)).unwrap();
        let value: serde_json::Value = serde_json::from_str(&dr.to_json()).unwrap();
        assert_eq!(value["kind"], "kpca-rbf");
        assert_eq!(value["input_dims"], 4);
        assert_eq!(value["reduced_dims"], 2);
        assert_eq!(value["seed"], 5);
        assert!(value["alphas"].is_array());
    }

    #[test]
    fn document_rejects_inconsistent_dims() {
        let dr = FittedDR::fit(&data(), &FitParams::new(DrKind::Pca, 2, 0)).unwrap();
        let mut doc = dr.to_document();
        doc.reduced_dims = 3;
        assert!(FittedDR::from_document(doc).is_err());
    }

    #[test]
    fn affine_reducer() {
        let w = DataMatrix::from_rows(&[[1.0, 2.0], [0.0, -1.0]]).unwrap();
        let r = AffineReducer::new(w, vec![0.5, 1.0]).unwrap();
        assert_eq!(r.transform(&[1.0, 1.0]).unwrap(), vec![3.5, 0.0]);
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("kpca".parse::<DrKind>().unwrap(), DrKind::KpcaRbf);
        assert_eq!("AE".parse::<DrKind>().unwrap(), DrKind::Autoencoder);
        assert!("tsne".parse::<DrKind>().is_err());
    }
}
