//! Small dense linear algebra on row-major `Vec<Vec<f64>>` matrices.
//!
//! Two independent routes are provided on purpose: SVD (via nalgebra) for
//! rank, least squares and kernels, and plain Gaussian elimination with
//! partial pivoting. Checks that must agree across routes use one each.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

fn to_matrix(rows: &[Vec<f64>], ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

/// Singular values (descending) and the numerical rank under `tau`
/// relative to the largest one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

pub fn spectrum(rows: &[Vec<f64>], ncols: usize, tau: f64) -> Spectrum {
    if rows.is_empty() || ncols == 0 {
        return Spectrum {
            singular_values: Vec::new(),
            rank: 0,
        };
    }
    let svd = to_matrix(rows, ncols).svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let rank = count_above(&sv, tau);
    Spectrum {
        singular_values: sv,
        rank,
    }
}

/// Singular values above `tau·max(1, σ_max)`: relative for large spectra,
/// absolute when every value is roundoff.
fn count_above(sv: &[f64], tau: f64) -> usize {
    let smax = sv.first().copied().unwrap_or(0.0);
    sv.iter().filter(|s| **s > tau * smax.max(1.0)).count()
}

/// Orthonormal basis of `{x : A x = 0}` from the SVD, each vector put in
/// [`canonical_sign`] form.
pub fn kernel_basis(rows: &[Vec<f64>], ncols: usize, tau: f64) -> Vec<Vec<f64>> {
    if ncols == 0 {
        return Vec::new();
    }
    // Pad to at least square so the SVD yields a full right basis.
    let m = rows.len().max(ncols);
    let a = DMatrix::from_fn(m, ncols, |i, j| rows.get(i).map_or(0.0, |r| r[j]));
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let sv = &svd.singular_values;
    let smax = sv.iter().fold(0.0f64, |x, s| x.max(*s));
    (0..sv.len())
        .filter(|&i| sv[i] <= tau * smax.max(1.0))
        .map(|i| canonical_sign(vt.row(i).iter().copied().collect()))
        .collect()
}

/// Minimum-norm least-squares solution of `A x = b` and its residual
/// `‖A x − b‖∞`.
pub fn min_norm_solve(rows: &[Vec<f64>], ncols: usize, b: &[f64], tau: f64) -> (Vec<f64>, f64) {
    if rows.is_empty() {
        return (vec![0.0; ncols], 0.0);
    }
    let a = to_matrix(rows, ncols);
    let rhs = nalgebra::DVector::from_column_slice(b);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |x, s| x.max(*s));
    let x = svd
        .solve(&rhs, (tau * smax).max(f64::MIN_POSITIVE))
        .expect("both factors computed");
    let r = &a * &x - rhs;
    let residual = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (x.iter().copied().collect(), residual)
}

/// Rank and one kernel vector by Gaussian elimination with partial pivoting.
///
/// A pivot is accepted when it exceeds `tol` times the largest entry of the
/// original matrix. The kernel vector sets the first free variable to 1.
pub fn gauss_kernel(rows: &[Vec<f64>], ncols: usize, tol: f64) -> (usize, Option<Vec<f64>>) {
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let thresh = tol * scale;
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == a.len() {
            break;
        }
        let (best, val) = (r..a.len())
            .map(|i| (i, a[i][c].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if scale == 0.0 || val <= thresh {
            continue;
        }
        a.swap(r, best);
        let p = a[r][c];
        for v in a[r].iter_mut() {
            *v /= p;
        }
        for i in 0..a.len() {
            if i != r && a[i][c] != 0.0 {
                let f = a[i][c];
                for j in 0..ncols {
                    a[i][j] -= f * a[r][j];
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let rank = pivots.len();
    let free = (0..ncols).find(|c| !pivots.contains(c));
    let kernel = free.map(|f| {
        let mut x = vec![0.0; ncols];
        x[f] = 1.0;
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = -a[row][f];
        }
        canonical_sign(x)
    });
    (rank, kernel)
}

/// Scales a vector to max-abs 1 with its first nonzero entry positive, and
/// snaps entries within 1e-12 of an integer.
pub fn canonical_sign(mut v: Vec<f64>) -> Vec<f64> {
    let m = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if m == 0.0 {
        return v;
    }
    let first = v
        .iter()
        .find(|x| x.abs() > 1e-12 * m)
        .copied()
        .unwrap_or(1.0);
    let s = first.signum() / m;
    for x in &mut v {
        *x *= s;
        let r = x.round();
        if (*x - r).abs() < 1e-12 {
            *x = r + 0.0;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_kernel_agree_across_routes() {
        let a = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0],
        ];
        let s = spectrum(&a, 3, 1e-8);
        assert_eq!(s.rank, 2);
        assert_eq!(kernel_basis(&a, 3, 1e-8), vec![vec![0.0, 0.0, 1.0]]);
        let (r, k) = gauss_kernel(&a, 3, 1e-10);
        assert_eq!(r, 2);
        assert_eq!(k, Some(vec![0.0, 0.0, 1.0]));

        let b = vec![vec![1.0, 1.0]];
        assert_eq!(kernel_basis(&b, 2, 1e-8), vec![vec![1.0, -1.0]]);
        assert_eq!(gauss_kernel(&b, 2, 1e-10), (1, Some(vec![1.0, -1.0])));
    }

    #[test]
    fn min_norm() {
        let (x, res) = min_norm_solve(&[vec![1.0, 1.0]], 2, &[2.0], 1e-10);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        assert!(res < 1e-12);
        let (_, res) = min_norm_solve(&[vec![1.0, 0.0], vec![1.0, 0.0]], 2, &[1.0, 2.0], 1e-10);
        assert!((res - 0.5).abs() < 1e-12);
    }

    #[test]
    fn full_rank_has_no_kernel() {
        let a = vec![vec![1.0, 0.0], vec![1.0, 1.0]];
        assert!(kernel_basis(&a, 2, 1e-8).is_empty());
        assert_eq!(gauss_kernel(&a, 2, 1e-10), (2, None));
        assert_eq!(spectrum(&[], 2, 1e-8).rank, 0);
    }
}
