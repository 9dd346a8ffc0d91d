//! Symmetric tridiagonal eigen-decomposition by implicit-shift QL iteration.
//!
//! One deterministic solver serves both the quadrature-rule construction
//! (Jacobi matrices) and the truncated operator spectra.

use crate::error::{Error, Result};

/// Relative off-diagonal threshold below which a coupling is deflated.
/// Machine epsilon keeps eigenvalue noise under the band-leakage budget of
/// the quadrature oracles built on these rules.
const DEFLATION_TOL: f64 = f64::EPSILON;
const MAX_SWEEPS: usize = 50;

/// Eigen-decomposition of a symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct TridiagEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// `vectors[k]` is the orthonormal eigenvector paired with `values[k]`.
    pub vectors: Vec<Vec<f64>>,
}

/// Decomposes the matrix with diagonal `diag` and symmetric off-diagonal
/// `off` (`off[i]` couples rows `i` and `i+1`).
pub fn eigh_tridiagonal(diag: &[f64], off: &[f64]) -> Result<TridiagEigen> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::Usage("eigh_tridiagonal: empty matrix".into()));
    }
    if off.len() + 1 != n {
        return Err(Error::Usage(format!(
            "eigh_tridiagonal: {} off-diagonal entries do not fit dimension {}",
            off.len(),
            n
        )));
    }
    if diag.iter().chain(off.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Domain(
            "eigh_tridiagonal: non-finite matrix entry".into(),
        ));
    }

    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    // Accumulated rotations, row-major: z[row * n + col].
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            // First negligible coupling at or after l.
            let mut m = l;
            while m + 1 < n {
                let scale = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= DEFLATION_TOL * scale {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::Numeric(format!(
                    "eigenvalue {l} failed to converge after {MAX_SWEEPS} QL sweeps"
                )));
            }

            // Wilkinson-style implicit shift from the leading 2x2 block.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0f64;
            let mut c = 1.0f64;
            let mut p = 0.0f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in 0..n {
                    f = z[row * n + i + 1];
                    z[row * n + i + 1] = s * z[row * n + i] + c * f;
                    z[row * n + i] = c * z[row * n + i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values: Vec<f64> = order.iter().map(|&j| d[j]).collect();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&j| (0..n).map(|row| z[row * n + j]).collect())
        .collect();
    Ok(TridiagEigen { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn residual_inf(diag: &[f64], off: &[f64], lambda: f64, v: &[f64]) -> f64 {
        let n = diag.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            let mut r = diag[i] * v[i] - lambda * v[i];
            if i > 0 {
                r += off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                r += off[i] * v[i + 1];
            }
            worst = worst.max(r.abs());
        }
        worst
    }

    #[test]
    fn one_by_one() {
        let e = eigh_tridiagonal(&[4.5], &[]).unwrap();
        assert_eq!(e.values, vec![4.5]);
        assert_eq!(e.vectors, vec![vec![1.0]]);
    }

    #[test]
    fn two_by_two_closed_form() {
        // diag {3, 5}, off -sqrt(3): eigenvalues 4 -+ 2.
        let e = eigh_tridiagonal(&[3.0, 5.0], &[-(3.0f64.sqrt())]).unwrap();
        assert_abs_diff_eq!(e.values[0], 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(e.values[1], 6.0, epsilon = 1e-13);
    }

    #[test]
    fn already_diagonal() {
        let e = eigh_tridiagonal(&[2.0, -1.0, 7.0], &[0.0, 0.0]).unwrap();
        assert_eq!(e.values, vec![-1.0, 2.0, 7.0]);
    }

    #[test]
    fn residuals_and_orthonormality() {
        // Deterministic pseudo-random tridiagonal matrix.
        let n = 60usize;
        let mut state = 0x2545_f491_4f6c_dd1du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let diag: Vec<f64> = (0..n).map(|_| 10.0 * next()).collect();
        let off: Vec<f64> = (0..n - 1).map(|_| 5.0 * next()).collect();
        let e = eigh_tridiagonal(&diag, &off).unwrap();
        let norm = diag
            .iter()
            .map(|v| v.abs())
            .fold(0.0f64, f64::max)
            .max(off.iter().map(|v| v.abs()).fold(0.0f64, f64::max) * 2.0);
        for k in 0..n {
            assert!(residual_inf(&diag, &off, e.values[k], &e.vectors[k]) <= 1e-12 * norm);
        }
        for a in 0..n {
            for b in a..n {
                let dot: f64 = e.vectors[a]
                    .iter()
                    .zip(&e.vectors[b])
                    .map(|(x, y)| x * y)
                    .sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(dot, want, epsilon = 1e-12);
            }
        }
        // Ascending order and trace preservation.
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let trace: f64 = diag.iter().sum();
        let sum: f64 = e.values.iter().sum();
        assert_relative_eq!(trace, sum, max_relative = 1e-12);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(eigh_tridiagonal(&[], &[]).is_err());
        assert!(eigh_tridiagonal(&[1.0, 2.0], &[]).is_err());
        assert!(eigh_tridiagonal(&[1.0, f64::NAN], &[0.0]).is_err());
    }
}
