//! Local neighborhoods around a query instance and their distance weights.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_len, Error, Result};
use crate::matrix::{squared_distance, DataMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    Knn,
    Perturbation,
}

impl std::str::FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "knn" => Ok(Generator::Knn),
            "perturb" | "perturbation" | "lime" => Ok(Generator::Perturbation),
            other => Err(Error::InvalidInput(format!(
                "unknown neighborhood generator `{other}`"
            ))),
        }
    }
}

/// How to build a neighborhood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NgConfig {
    pub generator: Generator,
    /// Number of neighbors; `None` means 10% of the dataset rows.
    pub k: Option<usize>,
    pub seed: u64,
    /// Multiplier on each feature's sample std (perturbation only).
    pub perturbation_scale: f64,
}

impl Default for NgConfig {
    fn default() -> Self {
        Self {
            generator: Generator::Knn,
            k: None,
            seed: 0,
            perturbation_scale: 1.0,
        }
    }
}

impl NgConfig {
    pub fn knn(k: usize) -> Self {
        Self {
            k: Some(k),
            ..Self::default()
        }
    }

    pub fn perturbation(k: usize, seed: u64, scale: f64) -> Self {
        Self {
            generator: Generator::Perturbation,
            k: Some(k),
            seed,
            perturbation_scale: scale,
        }
    }

    /// The configured K, or 10% of `rows` (at least 1).
    pub fn resolved_k(&self, rows: usize) -> usize {
        self.k
            .unwrap_or_else(|| ((rows as f64) * 0.1).round() as usize)
            .max(1)
    }
}

/// The set `{query, n⁽¹⁾ … n⁽ᴷ⁾}` with one weight per member.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    pub query: Vec<f64>,
    pub neighbors: DataMatrix,
    /// Aligned to `[query; neighbors]`; entry 0 is always 1.
    pub weights: Vec<f64>,
    pub generator: Generator,
    /// Dataset row indices of the neighbors (KNN only).
    pub indices: Option<Vec<usize>>,
}

impl Neighborhood {
    pub fn k(&self) -> usize {
        self.neighbors.rows()
    }

    /// The neighborhood as one matrix with the query as row 0.
    pub fn stacked(&self) -> DataMatrix {
        DataMatrix::prepend_row(&self.query, &self.neighbors).expect("query matches neighbor width")
    }
}

pub fn build_neighborhood(
    data: &DataMatrix,
    query: &[f64],
    config: &NgConfig,
) -> Result<Neighborhood> {
    let k = config.resolved_k(data.rows());
    match config.generator {
        Generator::Knn => knn_neighbors(data, query, k),
        Generator::Perturbation => {
            perturbation_neighbors(data, query, k, config.seed, config.perturbation_scale)
        }
    }
}

/// The `k` dataset rows closest to `query` in Euclidean distance, ascending,
/// ties broken by lower row index.
pub fn knn_neighbors(data: &DataMatrix, query: &[f64], k: usize) -> Result<Neighborhood> {
    check_len("query", data.cols(), query.len())?;
    check_finite("query", query)?;
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    if k > data.rows() {
        return Err(Error::TooManyNeighbors {
            k,
            rows: data.rows(),
        });
    }
    let mut ranked: Vec<(f64, usize)> = data
        .iter_rows()
        .enumerate()
        .map(|(i, row)| (squared_distance(query, row), i))
        .collect();
    let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < ranked.len() {
        ranked.select_nth_unstable_by(k - 1, by_distance);
        ranked.truncate(k);
    }
    ranked.sort_unstable_by(by_distance);
    let indices: Vec<usize> = ranked.iter().map(|&(_, i)| i).collect();
    let neighbors = data.select_rows(&indices);
    let weights = neighbor_weights(query, &neighbors)?;
    Ok(Neighborhood {
        query: query.to_vec(),
        neighbors,
        weights,
        generator: Generator::Knn,
        indices: Some(indices),
    })
}

/// `k` synthetic rows `query + ε` with `ε_f ~ N(0, (scale·σ_f)²)`, where
/// `σ_f` is the sample std of feature `f` in `data`. Zero-variance features
/// are copied from the query unchanged.
pub fn perturbation_neighbors(
    data: &DataMatrix,
    query: &[f64],
    k: usize,
    seed: u64,
    scale: f64,
) -> Result<Neighborhood> {
    check_len("query", data.cols(), query.len())?;
    check_finite("query", query)?;
    if data.rows() < 2 {
        return Err(Error::InvalidInput(
            "perturbation needs at least 2 rows to estimate feature spread".into(),
        ));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidInput(format!(
            "perturbation scale must be positive, got {scale}"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    let spreads: Vec<Option<Normal<f64>>> = data
        .column_sample_std()
        .into_iter()
        .map(|s| (s > 0.0).then(|| Normal::new(0.0, scale * s).expect("positive std")))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(k * query.len());
    for _ in 0..k {
        for (q, spread) in query.iter().zip(&spreads) {
            let eps = spread.as_ref().map_or(0.0, |n| n.sample(&mut rng));
            values.push(q + eps);
        }
    }
    let neighbors = DataMatrix::new(k, query.len(), values)?;
    let weights = neighbor_weights(query, &neighbors)?;
    Ok(Neighborhood {
        query: query.to_vec(),
        neighbors,
        weights,
        generator: Generator::Perturbation,
        indices: None,
    })
}

/// Weight of a neighbor at Euclidean distance `d` from the query.
#[inline]
pub fn distance_weight(d: f64) -> f64 {
    (-2.0 * d).exp()
}

/// `[1, exp(−2·d(q, n⁽¹⁾)), …, exp(−2·d(q, n⁽ᴷ⁾))]`
pub fn neighbor_weights(query: &[f64], neighbors: &DataMatrix) -> Result<Vec<f64>> {
    check_len("query", neighbors.cols(), query.len())?;
    check_finite("query", query)?;
    let mut weights = Vec::with_capacity(neighbors.rows() + 1);
    weights.push(1.0);
    weights.extend(
        neighbors
            .iter_rows()
            .map(|n| distance_weight(squared_distance(query, n).sqrt())),
    );
    Ok(weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn points() -> DataMatrix {
        DataMatrix::from_rows(&[
            [0.0, 0.0],
            [1.0, 0.0],
            [0.0, 2.0],
            [3.0, 3.0],
            [-1.0, 0.0],
            [0.5, 0.5],
            [2.0, -1.0],
            [4.0, 4.0],
        ])
        .unwrap()
    }

    #[test]
    fn weight_formula_values() {
        assert_eq!(distance_weight(0.0), 1.0);
        assert!((distance_weight(0.5) - 0.367_879_441_171_442_3).abs() < 1e-15);
        assert!((distance_weight(1.0) - 0.135_335_283_236_612_7).abs() < 1e-15);
    }

    #[test]
    fn query_row_is_its_own_nearest_neighbor() {
        let data = points();
        let nb = knn_neighbors(&data, data.row(7), 1).unwrap();
        assert_eq!(nb.indices.as_deref(), Some(&[7][..]));
        assert_eq!(nb.weights, vec![1.0, 1.0]);
    }

    #[test]
    fn all_rows_in_ascending_distance() {
        let data = points();
        let nb = knn_neighbors(&data, &[0.0, 0.0], data.rows()).unwrap();
        let d: Vec<f64> = nb
            .neighbors
            .iter_rows()
            .map(|r| squared_distance(r, &[0.0, 0.0]))
            .collect();
        assert!(d.windows(2).all(|w| w[0] <= w[1]));
        // [1,0] and [-1,0] tie at distance 1: lower index first
        let idx = nb.indices.unwrap();
        let p1 = idx.iter().position(|&i| i == 1).unwrap();
        let p4 = idx.iter().position(|&i| i == 4).unwrap();
        assert!(p1 < p4);
    }

    #[test]
    fn k_larger_than_rows() {
        match knn_neighbors(&points(), &[0.0, 0.0], 9) {
            Err(Error::TooManyNeighbors { k: 9, rows: 8 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn weights_aligned_and_bounded() {
        let nb = knn_neighbors(&points(), &[0.2, 0.1], 5).unwrap();
        assert_eq!(nb.weights.len(), 6);
        assert_eq!(nb.weights[0], 1.0);
        assert!(nb.weights.iter().all(|&w| w > 0.0 && w <= 1.0));
        assert!(nb.weights[1..].windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(nb.stacked().row(0), &[0.2, 0.1]);
    }

    #[test]
    fn perturbation_is_seeded() {
        let a = perturbation_neighbors(&points(), &[0.0, 0.0], 20, 5, 1.0).unwrap();
        let b = perturbation_neighbors(&points(), &[0.0, 0.0], 20, 5, 1.0).unwrap();
        assert_eq!(a, b);
        let c = perturbation_neighbors(&points(), &[0.0, 0.0], 20, 6, 1.0).unwrap();
        assert_ne!(a.neighbors, c.neighbors);
    }

    #[test]
    fn tiny_scale_collapses_onto_query() {
        let nb = perturbation_neighbors(&points(), &[1.0, 1.0], 10, 1, 1e-300).unwrap();
        assert!(nb.neighbors.iter_rows().all(|r| r == [1.0, 1.0]));
        assert!(nb.weights.iter().all(|&w| w == 1.0));
    }

    #[test]
    fn constant_feature_is_not_perturbed() {
        let data = DataMatrix::from_rows(&[[1.0, 7.0], [2.0, 7.0], [3.0, 7.0]]).unwrap();
        let nb = perturbation_neighbors(&data, &[2.0, 7.0], 50, 3, 1.0).unwrap();
        assert!(nb.neighbors.iter_rows().all(|r| r[1] == 7.0));
        assert!(nb.neighbors.iter_rows().any(|r| r[0] != 2.0));
    }

    #[test]
    fn perturbation_preconditions() {
        let one = DataMatrix::from_rows(&[[1.0, 2.0]]).unwrap();
        assert!(perturbation_neighbors(&one, &[1.0, 2.0], 3, 0, 1.0).is_err());
        assert!(perturbation_neighbors(&points(), &[1.0, 2.0], 3, 0, 0.0).is_err());
    }

    #[test]
    fn default_k_is_ten_percent() {
        assert_eq!(NgConfig::default().resolved_k(442), 44);
        assert_eq!(NgConfig::default().resolved_k(3), 1);
        assert_eq!(NgConfig::knn(7).resolved_k(442), 7);
    }
}
