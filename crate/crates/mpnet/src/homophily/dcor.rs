//! Distance correlation between two coordinate samples, with great-circle
//! distance as the metric on each side.
//!
//! The statistic is quadratic in the sample size; the full pairwise matrices
//! are never materialised for the point estimate. Row sums are computed in a
//! first pass, double-centered products accumulated in a second, with
//! per-row partials combined in row order so the result is thread-count
//! independent.

use crate::error::{Error, Result};
use crate::exec;

/// Mean Earth radius in kilometres.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Great-circle distance between two (lat, lon) points in degrees.
pub fn great_circle_km(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (lat1, lon1) = (a.0.to_radians(), a.1.to_radians());
    let (lat2, lon2) = (b.0.to_radians(), b.1.to_radians());
    let dlat = lat2 - lat1;
    let dlon = lon2 - lon1;
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

fn pairwise(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise(&xs[..mid]) + pairwise(&xs[mid..])
        }
    }
}

/// Distance correlation of two equal-length coordinate samples.
///
/// Returns `(dcor, dvar_x, dvar_y)` where the dvars are the squared distance
/// variances. Degenerate sides (all points identical) are an error.
pub fn distance_correlation(xs: &[(f64, f64)], ys: &[(f64, f64)]) -> Result<f64> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return Err(Error::InsufficientPairs {
            needed: 2,
            available: n,
        });
    }
    let nf = n as f64;

    // Pass 1: row means of both distance matrices (diagonal zeros included).
    let row_means: Vec<(f64, f64)> = exec::map_collect(n, |i| {
        let mut sa = 0.0;
        let mut sb = 0.0;
        for j in 0..n {
            sa += great_circle_km(xs[i], xs[j]);
            sb += great_circle_km(ys[i], ys[j]);
        }
        (sa / nf, sb / nf)
    });
    let grand_a = pairwise(&row_means.iter().map(|r| r.0).collect::<Vec<_>>()) / nf;
    let grand_b = pairwise(&row_means.iter().map(|r| r.1).collect::<Vec<_>>()) / nf;

    // Pass 2: Σ A∘B, Σ A∘A, Σ B∘B over the double-centered matrices.
    let partials: Vec<(f64, f64, f64)> = exec::map_collect(n, |i| {
        let (ra, rb) = row_means[i];
        let mut ab = 0.0;
        let mut aa = 0.0;
        let mut bb = 0.0;
        for j in 0..n {
            let a = great_circle_km(xs[i], xs[j]) - ra - row_means[j].0 + grand_a;
            let b = great_circle_km(ys[i], ys[j]) - rb - row_means[j].1 + grand_b;
            ab += a * b;
            aa += a * a;
            bb += b * b;
        }
        (ab, aa, bb)
    });
    let sum_ab = pairwise(&partials.iter().map(|p| p.0).collect::<Vec<_>>());
    let sum_aa = pairwise(&partials.iter().map(|p| p.1).collect::<Vec<_>>());
    let sum_bb = pairwise(&partials.iter().map(|p| p.2).collect::<Vec<_>>());

    let dvar = sum_aa * sum_bb;
    if dvar <= 0.0 {
        return Err(Error::DegenerateMetric);
    }
    let dcov2 = (sum_ab / (nf * nf)).max(0.0);
    Ok((dcov2 / (sum_aa / (nf * nf) * (sum_bb / (nf * nf))).sqrt()).sqrt())
}

/// Double-centered great-circle distance matrix, row-major, for the
/// permutation test (kept dense so every permutation is a lookup pass).
pub fn centered_distance_matrix(pts: &[(f64, f64)]) -> Vec<f64> {
    let n = pts.len();
    let nf = n as f64;
    let rows: Vec<Vec<f64>> = exec::map_collect(n, |i| {
        (0..n).map(|j| great_circle_km(pts[i], pts[j])).collect()
    });
    let row_means: Vec<f64> = rows.iter().map(|r| pairwise(r) / nf).collect();
    let grand = pairwise(&row_means) / nf;
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = rows[i][j] - row_means[i] - row_means[j] + grand;
        }
    }
    out
}

/// dCor between two pre-centered matrices, optionally permuting the second
/// sample's indices.
pub fn dcor_from_centered(a: &[f64], b: &[f64], n: usize, perm: Option<&[usize]>) -> f64 {
    let mut ab = 0.0;
    let mut aa = 0.0;
    let mut bb = 0.0;
    for i in 0..n {
        for j in 0..n {
            let bv = match perm {
                Some(p) => b[p[i] * n + p[j]],
                None => b[i * n + j],
            };
            let av = a[i * n + j];
            ab += av * bv;
            aa += av * av;
            bb += bv * bv;
        }
    }
    if aa * bb <= 0.0 {
        return 0.0;
    }
    (ab.max(0.0) / (aa * bb).sqrt()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn great_circle_known_distances() {
        // Quarter of the equator.
        let d = great_circle_km((0.0, 0.0), (0.0, 90.0));
        assert!((d - std::f64::consts::FRAC_PI_2 * EARTH_RADIUS_KM).abs() < 1e-9);
        // Pole to pole.
        let d = great_circle_km((90.0, 0.0), (-90.0, 0.0));
        assert!((d - std::f64::consts::PI * EARTH_RADIUS_KM).abs() < 1e-9);
        assert_eq!(great_circle_km((12.5, 7.25), (12.5, 7.25)), 0.0);
    }

    #[test]
    fn identical_samples_have_dcor_one() {
        let xs: Vec<(f64, f64)> = (0..40)
            .map(|i| (i as f64 * 0.7 - 10.0, i as f64 * 1.3 - 20.0))
            .collect();
        let d = distance_correlation(&xs, &xs).unwrap();
        assert!((d - 1.0).abs() < 1e-12, "{d}");
    }

    #[test]
    fn degenerate_when_all_points_equal() {
        let xs = vec![(1.0, 2.0); 20];
        let ys: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, 0.0)).collect();
        assert!(matches!(
            distance_correlation(&xs, &ys),
            Err(Error::DegenerateMetric)
        ));
    }

    #[test]
    fn centered_matrix_agrees_with_streaming_dcor() {
        let xs: Vec<(f64, f64)> = (0..25).map(|i| ((i * 7 % 25) as f64, (i * 3 % 11) as f64)).collect();
        let ys: Vec<(f64, f64)> = (0..25).map(|i| ((i * 5 % 13) as f64, (i * 11 % 17) as f64)).collect();
        let a = centered_distance_matrix(&xs);
        let b = centered_distance_matrix(&ys);
        let via_matrix = dcor_from_centered(&a, &b, 25, None);
        let streaming = distance_correlation(&xs, &ys).unwrap();
        assert!((via_matrix - streaming).abs() < 1e-10);
    }
}
