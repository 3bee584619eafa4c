//! Independent reference implementations used as test oracles. None of these
//! share code with the library: plain loops over `Vec<Vec<f64>>`.

#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_rows(
    rng: &mut ChaCha8Rng,
    rows: usize,
    cols: usize,
    lo: f64,
    hi: f64,
) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(lo..hi)).collect())
        .collect()
}

pub fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| a.iter().map(|r| r[j]).collect())
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Solves `A x = b` by Gauss-Jordan elimination with partial pivoting.
pub fn gauss_jordan_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col];
        assert!(p.abs() > 1e-300, "singular system");
        for j in 0..n {
            a[col][j] /= p;
        }
        b[col] /= p;
        for i in 0..n {
            if i != col {
                let f = a[i][col];
                if f != 0.0 {
                    for j in 0..n {
                        a[i][j] -= f * a[col][j];
                    }
                    b[i] -= f * b[col];
                }
            }
        }
    }
    b
}

/// Weighted ridge via the augmented normal equations with an explicit
/// intercept column that is left out of the penalty. Returns (slope, intercept).
pub fn ridge_normal_equations(x: &[Vec<f64>], t: &[f64], w: &[f64], alpha: f64) -> (Vec<f64>, f64) {
    let n = x[0].len();
    let dim = n + 1;
    let mut a = vec![vec![0.0; dim]; dim];
    let mut b = vec![0.0; dim];
    for (i, row) in x.iter().enumerate() {
        let mut z = row.clone();
        z.push(1.0);
        for p in 0..dim {
            b[p] += w[i] * z[p] * t[i];
            for q in 0..dim {
                a[p][q] += w[i] * z[p] * z[q];
            }
        }
    }
    for (p, row) in a.iter_mut().enumerate().take(n) {
        row[p] += alpha;
    }
    let sol = gauss_jordan_solve(a, b);
    (sol[..n].to_vec(), sol[n])
}

/// Cyclic Jacobi eigensolver for a symmetric matrix. Eigenvalues descending,
/// eigenvectors as the columns of the returned matrix (row-major).
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j][j].total_cmp(&m[i][i]));
    let values = order.iter().map(|&i| m[i][i]).collect();
    let vectors = (0..n)
        .map(|r| order.iter().map(|&c| v[r][c]).collect())
        .collect();
    (values, vectors)
}

/// Eigen-decomposition of a symmetric 3×3 matrix from the roots of its
/// characteristic polynomial, eigenvectors from cross products of rows of
/// `A − λI`. Descending eigenvalues.
pub fn eig3_analytic(a: [[f64; 3]; 3]) -> Vec<(f64, [f64; 3])> {
    let p1 = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = (a[i][j] - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let phi = (det_b / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
    let l1 = q + 2.0 * p * phi.cos();
    let l3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let l2 = 3.0 * q - l1 - l3;
    let cross = |u: [f64; 3], v: [f64; 3]| {
        [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ]
    };
    [l1, l2, l3]
        .into_iter()
        .map(|l| {
            let m = [
                [a[0][0] - l, a[0][1], a[0][2]],
                [a[1][0], a[1][1] - l, a[1][2]],
                [a[2][0], a[2][1], a[2][2] - l],
            ];
            let best = [cross(m[0], m[1]), cross(m[0], m[2]), cross(m[1], m[2])]
                .into_iter()
                .max_by(|x, y| norm(x).total_cmp(&norm(y)))
                .unwrap();
            let n = norm(&best);
            (l, [best[0] / n, best[1] / n, best[2] / n])
        })
        .collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Flips `v` so its largest-magnitude entry (first on ties) is positive.
pub fn orient(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Covariance matrix with divisor M − 1.
pub fn covariance(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = rows.len() as f64;
    let n = rows[0].len();
    let mean: Vec<f64> = (0..n)
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / m)
        .collect();
    let mut c = vec![vec![0.0; n]; n];
    for r in rows {
        for i in 0..n {
            for j in 0..n {
                c[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]);
            }
        }
    }
    for row in c.iter_mut() {
        for v in row.iter_mut() {
            *v /= m - 1.0;
        }
    }
    c
}

/// In-sample RBF kernel PCA projections: eigenvectors of the double-centered
/// kernel scaled by sqrt(λ), oriented like the library's components.
pub fn kpca_projections(rows: &[Vec<f64>], gamma: f64, n_components: usize) -> Vec<Vec<f64>> {
    let m = rows.len();
    let mut k = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            let d2: f64 = rows[i]
                .iter()
                .zip(&rows[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            k[i][j] = (-gamma * d2).exp();
        }
    }
    let row_mean: Vec<f64> = k.iter().map(|r| r.iter().sum::<f64>() / m as f64).collect();
    let grand = row_mean.iter().sum::<f64>() / m as f64;
    let centered: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| k[i][j] - row_mean[i] - row_mean[j] + grand)
                .collect()
        })
        .collect();
    let (values, vectors) = jacobi_eigen(&centered);
    let mut out = vec![vec![0.0; n_components]; m];
    for c in 0..n_components {
        let mut v: Vec<f64> = vectors.iter().map(|r| r[c]).collect();
        orient(&mut v);
        for i in 0..m {
            out[i][c] = v[i] * values[c].sqrt();
        }
    }
    out
}

/// Indices of the `k` rows nearest to `q`, by full sort on (distance, index).
pub fn brute_force_knn(rows: &[Vec<f64>], q: &[f64], k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            (
                r.iter()
                    .zip(q)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt(),
                i,
            )
        })
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d.into_iter().take(k).map(|(_, i)| i).collect()
}

/// Central finite-difference gradient of `f` at `x`.
pub fn central_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|j| {
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[j] += h;
            down[j] -= h;
            (f(&up) - f(&down)) / (2.0 * h)
        })
        .collect()
}
