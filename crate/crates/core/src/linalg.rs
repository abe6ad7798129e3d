//! Dense symmetric linear algebra for the small matrices that appear here:
//! 1x1 and 2x2 shape operators per node and the Rayleigh-Ritz matrices of the
//! stability spectrum.
//!
//! Matrices are row-major `n x n` slices.

use alloc::vec;
use alloc::vec::Vec;

/// Eigenpairs sorted by ascending eigenvalue. `vectors[i * n + k]` is the
/// `i`-th component of the `k`-th eigenvector.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub n: usize,
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
}

impl EigenDecomposition {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.vectors[i * self.n + k]).collect()
    }
}

/// Cyclic Jacobi rotations on a symmetric matrix.
pub fn symmetric_eigen(a: &[f64], n: usize) -> EigenDecomposition {
    let mut m = a.to_vec();
    // symmetrize
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (m[i * n + j] + m[j * n + i]);
            m[i * n + j] = s;
            m[j * n + i] = s;
        }
    }
    let mut v = identity(n);
    let scale: f64 = libm::sqrt(m.iter().map(|x| x * x).sum::<f64>()).max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum::<f64>();
        let off = libm::sqrt(off);
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| m[a * n + a].total_cmp(&m[b * n + b]));
    let values = order.iter().map(|&k| m[k * n + k]).collect();
    let mut vectors = vec![0.0; n * n];
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + dst] = v[i * n + src];
        }
    }
    fix_signs(&mut vectors, n);
    EigenDecomposition { n, values, vectors }
}

/// First nonzero component of every eigenvector is made positive.
fn fix_signs(vectors: &mut [f64], n: usize) {
    for k in 0..n {
        let col_max = (0..n).map(|i| vectors[i * n + k].abs()).fold(0.0, f64::max);
        let lead = (0..n).find(|&i| vectors[i * n + k].abs() > 1e-12 * col_max);
        if let Some(i) = lead {
            if vectors[i * n + k] < 0.0 {
                for r in 0..n {
                    vectors[r * n + k] = -vectors[r * n + k];
                }
            }
        }
    }
}

pub fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

/// Lower-triangular `L` with `a = L Lᵀ`, or `None` if `a` is not numerically
/// positive definite.
pub fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > 0.0) {
            return None;
        }
        let djj = libm::sqrt(d);
        l[j * n + j] = djj;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / djj;
        }
    }
    Some(l)
}

/// Solves `L y = b` in place.
fn forward_substitute(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Solves `Lᵀ x = b` in place.
fn back_substitute_transpose(l: &[f64], n: usize, b: &mut [f64]) {
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GeneralizedEigenError {
    /// The right-hand matrix is not positive definite.
    NotPositiveDefinite,
}

/// Solves `a v = μ b v` for symmetric `a` and symmetric positive definite `b`
/// by reducing to `L⁻¹ a L⁻ᵀ` with `b = L Lᵀ`. Eigenvectors come back
/// `b`-orthonormal.
pub fn generalized_symmetric_eigen(
    a: &[f64],
    b: &[f64],
    n: usize,
) -> Result<EigenDecomposition, GeneralizedEigenError> {
    let l = cholesky(b, n).ok_or(GeneralizedEigenError::NotPositiveDefinite)?;
    // c = L⁻¹ a L⁻ᵀ, built column by column.
    let mut tmp = vec![0.0; n * n]; // L⁻¹ a
    for j in 0..n {
        let mut col: Vec<f64> = (0..n).map(|i| a[i * n + j]).collect();
        forward_substitute(&l, n, &mut col);
        for i in 0..n {
            tmp[i * n + j] = col[i];
        }
    }
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        // row i of tmp times L⁻ᵀ  ==  (L⁻¹ row_iᵀ)ᵀ
        let mut row: Vec<f64> = tmp[i * n..(i + 1) * n].to_vec();
        forward_substitute(&l, n, &mut row);
        c[i * n..(i + 1) * n].copy_from_slice(&row);
    }
    let eig = symmetric_eigen(&c, n);
    let mut vectors = vec![0.0; n * n];
    for k in 0..n {
        let mut w = eig.vector(k);
        back_substitute_transpose(&l, n, &mut w);
        for i in 0..n {
            vectors[i * n + k] = w[i];
        }
    }
    fix_signs(&mut vectors, n);
    Ok(EigenDecomposition {
        n,
        values: eig.values,
        vectors,
    })
}

pub fn mat_vec(a: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum())
        .collect()
}

/// Inverse of a 1x1 or 2x2 matrix stored row-major in a 2x2 array.
pub fn inverse_small(m: usize, a: &[[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    match m {
        1 => {
            if a[0][0] == 0.0 {
                None
            } else {
                Some([[1.0 / a[0][0], 0.0], [0.0, 0.0]])
            }
        }
        _ => {
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            if det == 0.0 {
                return None;
            }
            Some([
                [a[1][1] / det, -a[0][1] / det],
                [-a[1][0] / det, a[0][0] / det],
            ])
        }
    }
}
