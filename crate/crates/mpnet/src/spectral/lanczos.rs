//! Rank-k eigensolver for symmetric operators: Lanczos with full
//! reorthogonalization, a seeded start vector, and breakdown restarts.
//!
//! The solver keeps the whole Krylov basis in memory, reorthogonalizes every
//! new vector against it twice, and periodically diagonalises the projected
//! tridiagonal matrix to test convergence of the k pairs of largest
//! magnitude. Dot products and matrix applications reduce in fixed order, so
//! runs are reproducible across thread counts.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec;
use crate::graph::SimpleGraph;

/// A symmetric linear operator given by its action on a vector.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
}

/// Friendship adjacency operator: `(Ax)[u] = Σ_{v ~ u} x[v]`.
pub struct AdjacencyOperator<'a> {
    graph: &'a SimpleGraph,
}

impl<'a> AdjacencyOperator<'a> {
    pub fn new(graph: &'a SimpleGraph) -> Self {
        AdjacencyOperator { graph }
    }
}

impl SymmetricOperator for AdjacencyOperator<'_> {
    fn dim(&self) -> usize {
        self.graph.node_count()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        exec::map_collect(self.graph.node_count(), |u| {
            self.graph
                .neighbors(u)
                .iter()
                .map(|&v| x[v as usize])
                .sum::<f64>()
        })
    }
}

/// Dense symmetric operator, row-major.
pub struct DenseOperator {
    pub n: usize,
    pub entries: Vec<f64>,
}

impl SymmetricOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        exec::map_collect(self.n, |i| {
            exec::stable_dot(&self.entries[i * self.n..(i + 1) * self.n], x)
        })
    }
}

/// A converged rank-k eigenbasis, ordered by descending eigenvalue magnitude.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub eigenvalues: Vec<f64>,
    /// `vectors[i]` is the unit eigenvector paired with `eigenvalues[i]`.
    pub vectors: Vec<Vec<f64>>,
    pub iterations: usize,
    pub max_residual: f64,
    pub operator_norm_estimate: f64,
}

impl EigenBasis {
    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }
}

/// Eigen-decomposition of a symmetric tridiagonal matrix by the implicit QL
/// method. `off[i]` couples `i` and `i+1`. Returns eigenvalues and, per
/// eigenvalue, its eigenvector of length `diag.len()`.
pub(crate) fn tridiag_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let m = diag.len();
    assert_eq!(off.len() + 1, m, "off-diagonal length must be m - 1");
    let mut d = diag.to_vec();
    let mut e = vec![0.0f64; m];
    e[..m - 1].copy_from_slice(off);
    // z[coord][vec]
    let mut z: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut row = vec![0.0; m];
            row[i] = 1.0;
            row
        })
        .collect();

    for l in 0..m {
        let mut iter = 0usize;
        loop {
            let mut mm = l;
            while mm + 1 < m {
                let dd = d[mm].abs() + d[mm + 1].abs();
                if e[mm].abs() <= f64::EPSILON * dd {
                    break;
                }
                mm += 1;
            }
            if mm == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::NonConvergence {
                    converged: l,
                    requested: m,
                    iterations: iter,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[mm] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0f64;
            let mut c = 1.0f64;
            let mut p = 0.0f64;
            let mut broke_early = false;
            let mut i = mm;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[mm] = 0.0;
                    broke_early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in z.iter_mut() {
                    let f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if broke_early && i > l {
                continue;
            }
            if !broke_early {
                d[l] -= p;
                e[l] = g;
                e[mm] = 0.0;
            }
        }
    }

    let vectors: Vec<Vec<f64>> = (0..m).map(|j| (0..m).map(|i| z[i][j]).collect()).collect();
    Ok((d, vectors))
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen::<f64>() - 0.5).collect()
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = exec::stable_dot(w, b);
            axpy(w, -c, b);
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn try_extract(
    op: &(impl SymmetricOperator + ?Sized),
    basis: &[Vec<f64>],
    alphas: &[f64],
    betas: &[f64],
    beta_out: f64,
    k: usize,
    tol: f64,
) -> Result<Option<EigenBasis>> {
    let m = alphas.len();
    if m < k {
        return Ok(None);
    }
    let (theta, svecs) = tridiag_eigen(alphas, &betas[..m - 1])?;
    let scale = theta.iter().fold(0.0f64, |acc, t| acc.max(t.abs()));
    if scale == 0.0 {
        return Ok(None);
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        theta[b]
            .abs()
            .partial_cmp(&theta[a].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let selected = &order[..k];
    let bound = tol * scale;
    if selected
        .iter()
        .any(|&idx| (beta_out * svecs[idx][m - 1]).abs() > bound)
    {
        return Ok(None);
    }

    // Estimates converged; assemble Ritz vectors and verify true residuals.
    let n = op.dim();
    let vectors: Vec<Vec<f64>> = exec::map_collect(k, |sel| {
        let idx = selected[sel];
        let mut x = vec![0.0f64; n];
        for (j, b) in basis.iter().enumerate().take(m) {
            axpy(&mut x, svecs[idx][j], b);
        }
        let norm = exec::stable_dot(&x, &x).sqrt();
        if norm > 0.0 {
            for xi in &mut x {
                *xi /= norm;
            }
        }
        x
    });
    let mut max_residual = 0.0f64;
    for (sel, &idx) in selected.iter().enumerate() {
        let ax = op.apply(&vectors[sel]);
        let mut res = 0.0f64;
        for (a, x) in ax.iter().zip(&vectors[sel]) {
            let r = a - theta[idx] * x;
            res += r * r;
        }
        max_residual = max_residual.max(res.sqrt());
    }
    if max_residual > bound {
        return Ok(None);
    }
    Ok(Some(EigenBasis {
        eigenvalues: selected.iter().map(|&i| theta[i]).collect(),
        vectors,
        iterations: m,
        max_residual,
        operator_norm_estimate: scale,
    }))
}

/// Top-k eigenpairs by absolute eigenvalue of a symmetric operator.
///
/// `tol` is relative to the operator norm estimate: each returned pair
/// satisfies `‖A·u − λ·u‖ ≤ tol·max|λ|`. `max_iter` caps the Krylov basis
/// size. A zero operator has no usable spectrum and is rejected.
pub fn top_k_eigs(
    op: &(impl SymmetricOperator + ?Sized),
    k: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<EigenBasis> {
    let n = op.dim();
    if n == 0 {
        return Err(Error::EmptyNetwork);
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidConfig(format!(
            "k must satisfy 0 < k < dim ({k} vs {n})"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig("tol must be positive".into()));
    }
    let max_basis = max_iter.max(k + 2).min(n);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = random_direction(&mut rng, n);
    let norm = exec::stable_dot(&v, &v).sqrt();
    for x in &mut v {
        *x /= norm;
    }

    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut op_scale = 0.0f64;
    let mut zero_streak = 0usize;
    let mut last_check = 0usize;
    let mut final_beta = 0.0f64;

    loop {
        let j = alphas.len();
        let mut w = op.apply(&basis[j]);
        let alpha = exec::stable_dot(&w, &basis[j]);
        axpy(&mut w, -alpha, &basis[j]);
        if j > 0 {
            let b_prev = betas[j - 1];
            if b_prev != 0.0 {
                axpy(&mut w, -b_prev, &basis[j - 1]);
            }
        }
        orthogonalize(&mut w, &basis);
        let beta = exec::stable_dot(&w, &w).sqrt();
        alphas.push(alpha);
        op_scale = op_scale.max(alpha.abs() + beta);

        if basis.len() == max_basis {
            final_beta = beta;
            break;
        }

        if beta <= 1e-13 * op_scale.max(1.0) {
            betas.push(0.0);
            if op_scale == 0.0 {
                zero_streak += 1;
                if zero_streak >= 2 {
                    return Err(Error::NoSpectrum);
                }
            }
            let mut t = random_direction(&mut rng, n);
            orthogonalize(&mut t, &basis);
            let tn = exec::stable_dot(&t, &t).sqrt();
            if tn <= 1e-8 {
                // Krylov space plus restarts span everything reachable.
                final_beta = 0.0;
                break;
            }
            for x in &mut t {
                *x /= tn;
            }
            basis.push(t);
        } else {
            betas.push(beta);
            let mut next = w;
            for x in &mut next {
                *x /= beta;
            }
            basis.push(next);
        }

        let m = alphas.len();
        if m >= k && m >= last_check + 25 {
            last_check = m;
            if op_scale == 0.0 {
                continue;
            }
            let beta_out = *betas.last().unwrap();
            if let Some(found) = try_extract(op, &basis, &alphas, &betas, beta_out, k, tol)? {
                return Ok(found);
            }
        }
    }

    if op_scale == 0.0 {
        return Err(Error::NoSpectrum);
    }
    if let Some(found) = try_extract(op, &basis, &alphas, &betas, final_beta, k, tol)? {
        return Ok(found);
    }

    // Count what did converge for the error report.
    let m = alphas.len();
    let (theta, svecs) = tridiag_eigen(&alphas, &betas[..m - 1])?;
    let scale = theta.iter().fold(0.0f64, |acc, t| acc.max(t.abs()));
    let converged = (0..m)
        .filter(|&i| (final_beta * svecs[i][m - 1]).abs() <= tol * scale)
        .count()
        .min(k);
    Err(Error::NonConvergence {
        converged,
        requested: k,
        iterations: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(entries: &[&[f64]]) -> DenseOperator {
        let n = entries.len();
        DenseOperator {
            n,
            entries: entries.iter().flat_map(|r| r.iter().copied()).collect(),
        }
    }

    #[test]
    fn diagonal_operator_top_two() {
        let op = dense(&[&[3.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 1.0]]);
        let basis = top_k_eigs(&op, 2, 1e-10, 50, 7).unwrap();
        assert!((basis.eigenvalues[0] - 3.0).abs() < 1e-9);
        assert!((basis.eigenvalues[1] - 2.0).abs() < 1e-9);
        // Coordinate eigenvectors up to sign.
        assert!((basis.vectors[0][0].abs() - 1.0).abs() < 1e-8);
        assert!((basis.vectors[1][1].abs() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn path_graph_spectrum_has_both_signs() {
        // P3 adjacency: eigenvalues √2, 0, −√2.
        let g = SimpleGraph::from_edges(3, &[(0, 1), (1, 2)]);
        let op = AdjacencyOperator::new(&g);
        let basis = top_k_eigs(&op, 2, 1e-10, 50, 3).unwrap();
        let mut mags: Vec<f64> = basis.eigenvalues.iter().map(|l| l.abs()).collect();
        mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((mags[0] - std::f64::consts::SQRT_2).abs() < 1e-9);
        assert!((mags[1] - std::f64::consts::SQRT_2).abs() < 1e-9);
        assert!(basis.eigenvalues.iter().any(|&l| l > 0.0));
        assert!(basis.eigenvalues.iter().any(|&l| l < 0.0));
    }

    #[test]
    fn zero_operator_has_no_spectrum() {
        let op = DenseOperator {
            n: 6,
            entries: vec![0.0; 36],
        };
        assert!(matches!(
            top_k_eigs(&op, 2, 1e-10, 20, 5),
            Err(Error::NoSpectrum)
        ));
    }

    #[test]
    fn disconnected_graph_needs_restarts() {
        // Two disjoint edges: eigenvalues {1, 1, -1, -1}; a single Krylov
        // space sees one copy of each, restarts recover multiplicity.
        let g = SimpleGraph::from_edges(4, &[(0, 1), (2, 3)]);
        let op = AdjacencyOperator::new(&g);
        let basis = top_k_eigs(&op, 3, 1e-9, 20, 11).unwrap();
        for l in &basis.eigenvalues {
            assert!((l.abs() - 1.0).abs() < 1e-8, "{l}");
        }
    }

    #[test]
    fn basis_is_orthonormal() {
        let g = SimpleGraph::from_edges(8, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (0, 7), (1, 5)]);
        let op = AdjacencyOperator::new(&g);
        let basis = top_k_eigs(&op, 4, 1e-10, 50, 13).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let dot = exec::stable_dot(&basis.vectors[i], &basis.vectors[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-8, "({i},{j}): {dot}");
            }
        }
        assert!(basis.max_residual <= 1e-10 * basis.operator_norm_estimate);
    }

    #[test]
    fn invalid_k_rejected() {
        let g = SimpleGraph::from_edges(3, &[(0, 1)]);
        let op = AdjacencyOperator::new(&g);
        assert!(top_k_eigs(&op, 0, 1e-8, 10, 1).is_err());
        assert!(top_k_eigs(&op, 3, 1e-8, 10, 1).is_err());
    }

    #[test]
    fn tridiag_eigen_small_known() {
        // [[2, 1], [1, 2]] → eigenvalues 1 and 3.
        let (vals, vecs) = tridiag_eigen(&[2.0, 2.0], &[1.0]).unwrap();
        let mut sorted = vals.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((sorted[0] - 1.0).abs() < 1e-12);
        assert!((sorted[1] - 3.0).abs() < 1e-12);
        for v in &vecs {
            let norm: f64 = v.iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }
}
