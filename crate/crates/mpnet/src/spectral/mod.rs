//! Spectral comparison of friendships and family ties.
//!
//! The friendship adjacency operator is decomposed into its rank-k eigenbasis
//! `U`, then the family operator is projected into that basis:
//! `Δ = (RᵀU)ᵀ(RᵀU)`, accumulated per account so the family matrix is never
//! materialised. The diagonality coefficient
//! `δ = Σᵢ Δᵢᵢ² / Σᵢⱼ Δᵢⱼ²` measures how close the two operators are to
//! sharing eigenvectors.

mod lanczos;

pub use lanczos::{
    top_k_eigs, AdjacencyOperator, DenseOperator, EigenBasis, SymmetricOperator,
};

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::graph::MultiProfileNetwork;

/// Accounts per accumulation block; fixed so that partial sums combine in the
/// same order regardless of thread count.
const ACCOUNT_BLOCK: usize = 1024;

#[derive(Debug, Clone)]
pub struct DiagonalityResult {
    pub k: usize,
    /// Row-major k×k projection of the family operator into the eigenbasis.
    pub delta: Vec<f64>,
    pub delta_coefficient: f64,
    /// `(λ_i, Δ_ii)` sorted by descending eigenvalue.
    pub diagonal_pairs: Vec<(f64, f64)>,
    pub zero_diagonal: bool,
}

impl DiagonalityResult {
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.delta[i * self.k + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.k).map(|i| self.entry(i, i)).sum()
    }
}

/// Gram-style accumulation of `Yᵀ Y` where row blocks of `Y` are produced per
/// item: for each item (account or profile) a length-k row is built and its
/// outer product added. Upper triangle only, mirrored at the end.
fn accumulate_gram<F>(k: usize, items: usize, row: F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    let blocks = items.div_ceil(ACCOUNT_BLOCK).max(1);
    let partials: Vec<Vec<f64>> = exec::map_collect(blocks, |b| {
        let lo = b * ACCOUNT_BLOCK;
        let hi = usize::min(lo + ACCOUNT_BLOCK, items);
        let mut upper = vec![0.0f64; k * (k + 1) / 2];
        let mut y = vec![0.0f64; k];
        for item in lo..hi {
            row(item, &mut y);
            let mut idx = 0usize;
            for i in 0..k {
                let yi = y[i];
                if yi == 0.0 {
                    idx += k - i;
                    continue;
                }
                for &yj in y.iter().skip(i) {
                    upper[idx] += yi * yj;
                    idx += 1;
                }
            }
        }
        upper
    });
    let mut upper = vec![0.0f64; k * (k + 1) / 2];
    for partial in &partials {
        for (acc, v) in upper.iter_mut().zip(partial) {
            *acc += v;
        }
    }
    let mut full = vec![0.0f64; k * k];
    let mut idx = 0usize;
    for i in 0..k {
        for j in i..k {
            full[i * k + j] = upper[idx];
            full[j * k + i] = upper[idx];
            idx += 1;
        }
    }
    full
}

fn delta_coefficient(delta: &[f64], k: usize) -> f64 {
    let mut diag_sq = 0.0f64;
    let mut total_sq = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            let v = delta[i * k + j];
            total_sq += v * v;
            if i == j {
                diag_sq += v * v;
            }
        }
    }
    if total_sq == 0.0 {
        return 0.0;
    }
    diag_sq / total_sq
}

/// Project the family operator into `basis` and measure diagonality. The
/// family operator keeps its unit diagonal.
pub fn diagonality_test(
    basis: &EigenBasis,
    net: &MultiProfileNetwork,
) -> Result<DiagonalityResult> {
    diagonality_test_with(basis, net, false)
}

/// As [`diagonality_test`], optionally removing the family operator's unit
/// diagonal (`Δ − UᵀU`) for sensitivity checks.
pub fn diagonality_test_with(
    basis: &EigenBasis,
    net: &MultiProfileNetwork,
    zero_diagonal: bool,
) -> Result<DiagonalityResult> {
    let k = basis.k();
    let n = net.profile_count();
    if basis.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: basis.dim(),
        });
    }

    // Δ = Σ_accounts y_a y_aᵀ with y_a[i] = Σ_{u in household a} U_i[u].
    let mut delta = accumulate_gram(k, net.account_count(), |a, y| {
        let members = net.household_members(crate::graph::AccountId::from_index(a));
        for (i, vec_i) in basis.vectors.iter().enumerate() {
            y[i] = members.iter().map(|&p| vec_i[p as usize]).sum();
        }
    });

    if zero_diagonal {
        // Subtract the Gram matrix UᵀU, i.e. the projection of the identity.
        let gram = accumulate_gram(k, n, |p, y| {
            for (i, vec_i) in basis.vectors.iter().enumerate() {
                y[i] = vec_i[p];
            }
        });
        for (d, g) in delta.iter_mut().zip(&gram) {
            *d -= g;
        }
    }

    let coefficient = delta_coefficient(&delta, k);
    let mut diagonal_pairs: Vec<(f64, f64)> = basis
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &l)| (l, delta[i * k + i]))
        .collect();
    diagonal_pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));

    Ok(DiagonalityResult {
        k,
        delta,
        delta_coefficient: coefficient,
        diagonal_pairs,
        zero_diagonal,
    })
}

#[derive(Debug, Clone)]
pub struct SpectralOptions {
    pub tol: f64,
    /// Cap on the Krylov basis; 0 picks `min(n, 3k + 50)`.
    pub max_iter: usize,
    pub zero_diagonal: bool,
    /// Side length of the heatmap submatrix export.
    pub heatmap_size: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            tol: 1e-8,
            max_iter: 0,
            zero_diagonal: false,
            heatmap_size: 50,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub k_requested: usize,
    pub k_effective: usize,
    pub seed: u64,
    pub tol: f64,
    pub zero_diagonal: bool,
    /// Eigenpairs are selected by largest absolute eigenvalue.
    pub eigenpair_selection: &'static str,
    pub delta_coefficient: f64,
    pub eigenvalues: Vec<f64>,
    pub diagonal_pairs: Vec<(f64, f64)>,
    /// Correlation between Δ_ii at matched eigenvalue magnitudes of opposite
    /// sign; near 1 suggests an even spectral relationship.
    pub even_symmetry_score: Option<f64>,
    pub iterations: usize,
    pub max_residual: f64,
    pub operator_norm_estimate: f64,
    #[serde(skip)]
    pub delta: Vec<f64>,
}

fn even_symmetry_score(pairs: &[(f64, f64)]) -> Option<f64> {
    let mut pos: Vec<(f64, f64)> = pairs.iter().copied().filter(|p| p.0 > 0.0).collect();
    let mut neg: Vec<(f64, f64)> = pairs
        .iter()
        .copied()
        .filter(|p| p.0 < 0.0)
        .map(|(l, d)| (-l, d))
        .collect();
    pos.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    neg.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());

    // Greedy two-pointer match within 5% relative magnitude.
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let (mut i, mut j) = (0usize, 0usize);
    while i < pos.len() && j < neg.len() {
        let (lp, dp) = pos[i];
        let (ln, dn) = neg[j];
        if (lp - ln).abs() <= 0.05 * lp.max(ln) {
            xs.push(dp);
            ys.push(dn);
            i += 1;
            j += 1;
        } else if lp > ln {
            i += 1;
        } else {
            j += 1;
        }
    }
    if xs.len() < 3 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    (vx > 0.0 && vy > 0.0).then(|| cov / (vx * vy).sqrt())
}

/// Run the full spectral pipeline on a network: eigenbasis of the friendship
/// adjacency operator, the diagonality test against the family operator, and
/// the export series.
pub fn spectral_report(
    net: &MultiProfileNetwork,
    k: usize,
    seed: u64,
    opts: &SpectralOptions,
) -> Result<SpectralReport> {
    let n = net.profile_count();
    if n == 0 {
        return Err(Error::EmptyNetwork);
    }
    if net.edge_count() == 0 {
        return Err(Error::NoSpectrum);
    }
    let k_effective = k.min(n.saturating_sub(1)).max(1);
    let max_iter = if opts.max_iter == 0 {
        (3 * k_effective + 50).min(n)
    } else {
        opts.max_iter
    };
    let op = AdjacencyOperator::new(net.graph());
    let basis = top_k_eigs(&op, k_effective, opts.tol, max_iter, seed)?;
    let diag = diagonality_test_with(&basis, net, opts.zero_diagonal)?;
    Ok(SpectralReport {
        k_requested: k,
        k_effective,
        seed,
        tol: opts.tol,
        zero_diagonal: opts.zero_diagonal,
        eigenpair_selection: "largest absolute eigenvalue",
        delta_coefficient: diag.delta_coefficient,
        eigenvalues: basis.eigenvalues.clone(),
        diagonal_pairs: diag.diagonal_pairs.clone(),
        even_symmetry_score: even_symmetry_score(&diag.diagonal_pairs),
        iterations: basis.iterations,
        max_residual: basis.max_residual,
        operator_norm_estimate: basis.operator_norm_estimate,
        delta: diag.delta,
    })
}

impl SpectralReport {
    /// Dense `i j Δ_ij` series over the top heatmap_size×heatmap_size block
    /// (rows/columns ordered by eigenvalue magnitude, as computed).
    pub fn write_heatmap_tsv(&self, path: &Path, heatmap_size: usize) -> Result<()> {
        let k = self.k_effective;
        let side = heatmap_size.min(k);
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "i\tj\tdelta")?;
        for i in 0..side {
            for j in 0..side {
                writeln!(w, "{i}\t{j}\t{}", self.delta[i * k + j])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// `(λ_i, Δ_ii)` scatter series.
    pub fn write_scatter_tsv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "lambda\tdelta_ii")?;
        for (l, d) in &self.diagonal_pairs {
            writeln!(w, "{l}\t{d}")?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{NetworkBuilder, ProfileId, ProfileMeta};

    fn net(accounts: &[u32], edges: &[(u32, u32)]) -> MultiProfileNetwork {
        let mut b = NetworkBuilder::new(true);
        for (i, &a) in accounts.iter().enumerate() {
            b.add_profile(&format!("p{i}"), &format!("a{a}"), ProfileMeta::default());
        }
        for &(u, v) in edges {
            b.add_edge(ProfileId::from_index(u as usize), ProfileId::from_index(v as usize));
        }
        b.finish().unwrap().0
    }

    #[test]
    fn singleton_households_give_identity_delta() {
        // F = I, so Δ = UᵀU = I and δ = 1.
        let ring: Vec<(u32, u32)> = (0..8u32).map(|i| (i, (i + 1) % 8)).collect();
        let accounts: Vec<u32> = (0..8).collect();
        let n = net(&accounts, &ring);
        let op = AdjacencyOperator::new(n.graph());
        let basis = top_k_eigs(&op, 4, 1e-10, 50, 21).unwrap();
        let diag = diagonality_test(&basis, &n).unwrap();
        assert!((diag.delta_coefficient - 1.0).abs() < 1e-10);
        assert!((diag.trace() - 4.0).abs() < 1e-9);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((diag.entry(i, j) - expect).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn delta_is_symmetric_and_bounded() {
        let n = net(&[0, 0, 1, 1, 2, 2, 3], &[(0, 2), (1, 3), (2, 4), (3, 5), (4, 6), (0, 6)]);
        let op = AdjacencyOperator::new(n.graph());
        let basis = top_k_eigs(&op, 3, 1e-10, 50, 2).unwrap();
        let diag = diagonality_test(&basis, &n).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((diag.entry(i, j) - diag.entry(j, i)).abs() < 1e-10);
            }
        }
        assert!(diag.delta_coefficient >= 0.0 && diag.delta_coefficient <= 1.0);
        assert!(diag.trace() >= 0.0);
        // Frobenius bound: ΣΔ² ≤ Σ household sizes squared.
        let frob: f64 = diag.delta.iter().map(|v| v * v).sum();
        let bound: f64 = n.household_sizes().iter().map(|&s| (s * s) as f64).sum();
        assert!(frob <= bound + 1e-9, "{frob} vs {bound}");
    }

    #[test]
    fn delta_invariant_under_eigenvector_sign_flips() {
        let n = net(&[0, 0, 1, 1, 2], &[(0, 2), (1, 3), (2, 4), (0, 4)]);
        let op = AdjacencyOperator::new(n.graph());
        let mut basis = top_k_eigs(&op, 3, 1e-10, 50, 5).unwrap();
        let before = diagonality_test(&basis, &n).unwrap().delta_coefficient;
        for x in basis.vectors[1].iter_mut() {
            *x = -*x;
        }
        let after = diagonality_test(&basis, &n).unwrap().delta_coefficient;
        assert!((before - after).abs() < 1e-12);
    }

    #[test]
    fn no_friendships_is_no_spectrum() {
        let n = net(&[0, 0, 1], &[]);
        assert!(matches!(
            spectral_report(&n, 2, 1, &SpectralOptions::default()),
            Err(Error::NoSpectrum)
        ));
    }

    #[test]
    fn report_reduces_k_for_small_graphs() {
        let ring: Vec<(u32, u32)> = (0..6u32).map(|i| (i, (i + 1) % 6)).collect();
        let accounts = [0, 0, 1, 1, 2, 2];
        let n = net(&accounts, &ring);
        let report = spectral_report(&n, 250, 9, &SpectralOptions::default()).unwrap();
        assert_eq!(report.k_requested, 250);
        assert_eq!(report.k_effective, 5);
        assert!(report.delta_coefficient > 0.0);
        assert_eq!(report.diagonal_pairs.len(), 5);
    }

    #[test]
    fn heatmap_and_scatter_written() {
        let ring: Vec<(u32, u32)> = (0..6u32).map(|i| (i, (i + 1) % 6)).collect();
        let n = net(&[0, 0, 1, 1, 2, 2], &ring);
        let report = spectral_report(&n, 4, 9, &SpectralOptions::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let heatmap = dir.path().join("heatmap.tsv");
        let scatter = dir.path().join("scatter.tsv");
        report.write_heatmap_tsv(&heatmap, 50).unwrap();
        report.write_scatter_tsv(&scatter).unwrap();
        let body = std::fs::read_to_string(&heatmap).unwrap();
        assert_eq!(body.lines().count(), 1 + 16);
        let body = std::fs::read_to_string(&scatter).unwrap();
        assert_eq!(body.lines().count(), 1 + 4);
    }
}
