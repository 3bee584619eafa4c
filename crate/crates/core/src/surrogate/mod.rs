//! Local linear surrogates of a black-box reducer.
//!
//! [`lxdr_explain`] builds a neighborhood around a query, pushes it through
//! the reducer, and fits one distance-weighted ridge regression per reduced
//! dimension. The stacked slopes form the explanation: row `k` says how each
//! original feature drives reduced dimension `k` near the query.
//! [`gxdr_explain`] is the global, unweighted counterpart fitted on a whole
//! dataset.

mod ridge;

use serde::{Deserialize, Serialize};

use crate::dr::Reducer;
use crate::error::{check_finite, check_len, Error, Result};
use crate::matrix::{dot, DataMatrix};
use crate::neighborhood::{build_neighborhood, NgConfig};

pub use ridge::{weighted_ridge, RidgeFit, RidgeSystem};

/// Candidate regularization strengths tried by auto-alpha.
pub const DEFAULT_ALPHA_GRID: [f64; 7] = [1e-6, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0];

pub const DEFAULT_ALPHA: f64 = 1.0;

/// Slope orientation tag written into serialized explanations.
pub const ORIENTATION: &str = "components_by_features";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    /// N_r × N; row k holds the influence of each original feature on
    /// reduced dimension k.
    pub slopes: DataMatrix,
    pub intercepts: Vec<f64>,
    pub alpha: f64,
    pub orientation: String,
    pub generator: Option<NgConfig>,
    pub query: Option<Vec<f64>>,
    /// Auto-alpha was requested but the neighborhood was too small to split.
    #[serde(default)]
    pub alpha_fallback: bool,
    #[serde(default)]
    pub rank_deficient: bool,
}

impl Explanation {
    pub fn reduced_dims(&self) -> usize {
        self.slopes.rows()
    }

    pub fn input_dims(&self) -> usize {
        self.slopes.cols()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("explanation serializes")
    }
}

/// `slopes · x + intercepts`
pub fn explanation_predict(e: &Explanation, x: &[f64]) -> Result<Vec<f64>> {
    check_len("explanation input", e.input_dims(), x.len())?;
    check_finite("explanation input", x)?;
    Ok(e.slopes
        .iter_rows()
        .zip(&e.intercepts)
        .map(|(s, b)| dot(s, x) + b)
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LxdrConfig {
    pub neighborhood: NgConfig,
    pub auto_alpha: bool,
    pub alpha_default: f64,
    pub alpha_grid: Vec<f64>,
}

impl Default for LxdrConfig {
    fn default() -> Self {
        Self {
            neighborhood: NgConfig::default(),
            auto_alpha: false,
            alpha_default: DEFAULT_ALPHA,
            alpha_grid: DEFAULT_ALPHA_GRID.to_vec(),
        }
    }
}

impl LxdrConfig {
    pub fn new(neighborhood: NgConfig, auto_alpha: bool) -> Self {
        Self {
            neighborhood,
            auto_alpha,
            ..Self::default()
        }
    }
}

/// Outcome of [`auto_alpha_select`].
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaChoice {
    pub alpha: f64,
    /// Held-out error per grid value, in ascending-α order; empty on fallback.
    pub scores: Vec<(f64, f64)>,
    pub fell_back: bool,
}

/// Neighborhood rows held out for alpha scoring: every fifth row, starting at
/// row 4, so the query (row 0) always trains.
fn is_held_out(row: usize) -> bool {
    row % 5 == 4
}

/// Picks the grid α with the smallest weighted held-out squared error summed
/// over all reduced dimensions. Ties go to the larger α. Neighborhoods with
/// fewer than 5 rows fall back to `alpha_default`.
pub fn auto_alpha_select(
    neighborhood: &DataMatrix,
    reduced: &DataMatrix,
    weights: &[f64],
    grid: &[f64],
    alpha_default: f64,
) -> Result<AlphaChoice> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("alpha grid must not be empty".into()));
    }
    check_len(
        "reduced neighborhood rows",
        neighborhood.rows(),
        reduced.rows(),
    )?;
    check_len("neighborhood weights", neighborhood.rows(), weights.len())?;
    let fallback = AlphaChoice {
        alpha: alpha_default,
        scores: Vec::new(),
        fell_back: true,
    };
    if neighborhood.rows() < 5 {
        return Ok(fallback);
    }
    let (train, test): (Vec<usize>, Vec<usize>) =
        (0..neighborhood.rows()).partition(|&i| !is_held_out(i));
    let x_train = neighborhood.select_rows(&train);
    let w_train: Vec<f64> = train.iter().map(|&i| weights[i]).collect();

    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut scores = Vec::with_capacity(sorted.len());
    let mut best: Option<(f64, f64)> = None;
    for &alpha in &sorted {
        let system = RidgeSystem::new(&x_train, &w_train, alpha)?;
        let mut error = 0.0;
        for k in 0..reduced.cols() {
            let t_train: Vec<f64> = train.iter().map(|&i| reduced.get(i, k)).collect();
            let fit = system.fit(&t_train)?;
            for &i in &test {
                let r = fit.predict(neighborhood.row(i)) - reduced.get(i, k);
                error += weights[i] * r * r;
            }
        }
        scores.push((alpha, error));
        // ascending scan with `<=` hands ties to the larger alpha
        if best.is_none_or(|(_, e)| error <= e) {
            best = Some((alpha, error));
        }
    }
    match best {
        Some((alpha, _)) if scores.iter().all(|(_, e)| e.is_finite()) => Ok(AlphaChoice {
            alpha,
            scores,
            fell_back: false,
        }),
        _ => Ok(fallback),
    }
}

fn fit_all_dimensions(
    stacked: &DataMatrix,
    reduced: &DataMatrix,
    weights: &[f64],
    alpha: f64,
) -> Result<(DataMatrix, Vec<f64>, bool)> {
    let system = RidgeSystem::new(stacked, weights, alpha)?;
    let n = stacked.cols();
    let mut slopes = Vec::with_capacity(reduced.cols() * n);
    let mut intercepts = Vec::with_capacity(reduced.cols());
    for k in 0..reduced.cols() {
        let fit = system.fit(&reduced.column(k))?;
        slopes.extend(fit.slope);
        intercepts.push(fit.intercept);
    }
    Ok((
        DataMatrix::new(reduced.cols(), n, slopes)?,
        intercepts,
        system.rank_deficient(),
    ))
}

/// Explains `dr` around `query`.
pub fn lxdr_explain<R: Reducer + ?Sized>(
    dr: &R,
    data: &DataMatrix,
    query: &[f64],
    config: &LxdrConfig,
) -> Result<Explanation> {
    check_len("dataset columns", dr.input_dims(), data.cols())?;
    check_len("query", dr.input_dims(), query.len())?;
    let neighborhood = build_neighborhood(data, query, &config.neighborhood)?;
    let stacked = neighborhood.stacked();
    if stacked.rows() < 2 {
        return Err(Error::InsufficientNeighborhood {
            size: stacked.rows(),
        });
    }
    let reduced = dr.transform_batch(&stacked)?;

    let (alpha, alpha_fallback) = if config.auto_alpha {
        let choice = auto_alpha_select(
            &stacked,
            &reduced,
            &neighborhood.weights,
            &config.alpha_grid,
            config.alpha_default,
        )?;
        (choice.alpha, choice.fell_back)
    } else {
        (config.alpha_default, false)
    };

    let (slopes, intercepts, rank_deficient) =
        fit_all_dimensions(&stacked, &reduced, &neighborhood.weights, alpha)?;
    Ok(Explanation {
        slopes,
        intercepts,
        alpha,
        orientation: ORIENTATION.to_string(),
        generator: Some(config.neighborhood.clone()),
        query: Some(query.to_vec()),
        alpha_fallback,
        rank_deficient,
    })
}

/// Global surrogate: unweighted ridge of each reduced dimension of
/// `dr(data)` against `data`.
pub fn gxdr_explain<R: Reducer + ?Sized>(
    dr: &R,
    data: &DataMatrix,
    alpha: f64,
) -> Result<Explanation> {
    check_len("dataset columns", dr.input_dims(), data.cols())?;
    if data.rows() < 2 {
        return Err(Error::InsufficientNeighborhood { size: data.rows() });
    }
    let reduced = dr.transform_batch(data)?;
    let weights = vec![1.0; data.rows()];
    let (slopes, intercepts, rank_deficient) = fit_all_dimensions(data, &reduced, &weights, alpha)?;
    Ok(Explanation {
        slopes,
        intercepts,
        alpha,
        orientation: ORIENTATION.to_string(),
        generator: None,
        query: None,
        alpha_fallback: false,
        rank_deficient,
    })
}
