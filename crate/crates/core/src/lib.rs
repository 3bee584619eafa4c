//! Local explanations for black-box dimensionality reduction.
//!
//! Given a fitted reducer `r: R^N -> R^{N_r}` and a query `x`, [`lxdr_explain`]
//! samples a neighborhood of `x`, weights each neighbor by `exp(-2·d)`, and
//! fits one ridge regression per reduced dimension. The resulting
//! `N_r × N` slope matrix says how each original feature drives each reduced
//! dimension near `x`.
//!
//! ```no_run
//! use lxdr_core::{load_bundled, lxdr_explain, BundledDataset, DrKind, FitParams, FittedDR, LxdrConfig, NgConfig};
//!
//! let iris = load_bundled(BundledDataset::Iris)?;
//! let dr = FittedDR::fit(&iris.features, &FitParams::new(DrKind::Pca, 3, 42))?;
//! let config = LxdrConfig::new(NgConfig::knn(50), true);
//! let e = lxdr_explain(&dr, &iris.features, iris.features.row(0), &config)?;
//! println!("{}", e.to_json());
//! # Ok::<(), lxdr_core::Error>(())
//! ```

pub mod attribution;
pub mod data;
pub mod dr;
pub mod error;
pub mod evaluation;
pub mod linalg;
pub mod matrix;
pub mod neighborhood;
pub mod par;
pub mod surrogate;
pub mod usecase;

pub use attribution::{
    local_attribution, propagate_to_original, ridge_predictor_fit, whatif_tweak, LocalAttribution,
    RidgePredictor, WhatIf,
};
pub use data::{load_bundled, load_csv, BundledDataset, Dataset};
pub use dr::{DrKind, FitParams, FittedDR, Reducer};
pub use error::{Error, Result};
pub use matrix::DataMatrix;
pub use neighborhood::{build_neighborhood, Generator, Neighborhood, NgConfig};
pub use par::Execution;
pub use surrogate::{explanation_predict, gxdr_explain, lxdr_explain, Explanation, LxdrConfig};
