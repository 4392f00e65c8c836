//! Dense complex Hermitian matrices with exact stored symmetry.
//!
//! Storage is full row-major; the constructors guarantee
//! `entries[p][q] == conj(entries[q][p])` bit-for-bit and real diagonals, so
//! traces and quadratic forms are exactly real by construction. The
//! eigensolver is a cyclic complex Jacobi iteration — slow asymptotically but
//! unconditionally stable, dependency-free, and deterministic, which is all
//! that matrices of antenna-array size need.

use num_complex::Complex64;

use crate::{Error, Result};

/// Dense complex Hermitian matrix (row-major, exact conjugate symmetry).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    /// Zero matrix of dimension `dim`.
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::ZERO; dim * dim],
        }
    }

    /// `s * I`.
    pub fn scaled_identity(dim: usize, s: f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(s, 0.0);
        }
        m
    }

    /// Identity matrix.
    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    /// Builds from the upper triangle: `f(i, j)` is consulted only for
    /// `i <= j`; the strict lower triangle is the conjugate mirror and the
    /// diagonal keeps only the real part of `f(i, i)`.
    pub fn from_upper(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(f(i, i).re, 0.0);
            for j in (i + 1)..dim {
                let v = f(i, j);
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = v.conj();
            }
        }
        m
    }

    /// Rank-one outer product `scale * v * v^H`.
    pub fn from_outer(v: &[Complex64], scale: f64) -> Self {
        Self::from_upper(v.len(), |i, j| {
            if i == j {
                Complex64::new(scale * v[i].norm_sqr(), 0.0)
            } else {
                scale * v[i] * v[j].conj()
            }
        })
    }

    /// Matrix dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    /// Raw row-major entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    /// Trace (exactly real: diagonals are stored real).
    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).sum()
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `a * self + b * other`, entrywise (real coefficients keep symmetry).
    pub fn linear_comb(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Self {
            dim: self.dim,
            data,
        }
    }

    /// `self + other`.
    pub fn add(&self, other: &Self) -> Self {
        self.linear_comb(1.0, other, 1.0)
    }

    /// `self - other`.
    pub fn sub(&self, other: &Self) -> Self {
        self.linear_comb(1.0, other, -1.0)
    }

    /// `s * self`.
    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| s * z).collect(),
        }
    }

    /// `self + s * I`.
    pub fn add_scaled_identity(&self, s: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.dim {
            m.data[i * self.dim + i] += s;
        }
        m
    }

    /// Matrix-vector product `self * x`.
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim, "dimension mismatch");
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| self.data[i * self.dim + j] * x[j])
                    .sum()
            })
            .collect()
    }

    /// `trace(self * other)` for Hermitian `other` — the Frobenius inner
    /// product `sum_{pq} A_pq * conj(B_pq)`, which is exactly real here.
    pub fn product_trace(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    /// Full eigendecomposition by cyclic complex Jacobi iteration.
    /// Eigenvalues are returned ascending with matching eigenvector columns.
    pub fn eigh(&self) -> Result<Eigh> {
        let n = self.dim;
        if n == 0 {
            return Ok(Eigh {
                dim: 0,
                values: vec![],
                vectors: vec![],
            });
        }
        let mut a = self.data.clone();
        let mut v = vec![Complex64::ZERO; n * n];
        for i in 0..n {
            v[i * n + i] = Complex64::ONE;
        }
        let scale = self.frobenius_norm();
        if scale > 0.0 {
            let tol = 1e-14 * scale;
            let mut converged = false;
            for _sweep in 0..60 {
                let off = off_diagonal_norm(&a, n);
                if off <= tol {
                    converged = true;
                    break;
                }
                for p in 0..n - 1 {
                    for q in (p + 1)..n {
                        jacobi_rotate(&mut a, &mut v, n, p, q);
                    }
                }
            }
            if !converged && off_diagonal_norm(&a, n) > tol {
                return Err(Error::Internal(format!(
                    "Jacobi eigensolver did not converge (off-diagonal {:.3e}, tol {:.3e})",
                    off_diagonal_norm(&a, n),
                    tol
                )));
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            a[i * n + i]
                .re
                .partial_cmp(&a[j * n + j].re)
                .expect("eigenvalues are finite")
        });
        let values: Vec<f64> = order.iter().map(|&i| a[i * n + i].re).collect();
        let mut vectors = vec![Complex64::ZERO; n * n];
        for (col, &src) in order.iter().enumerate() {
            for row in 0..n {
                vectors[row * n + col] = v[row * n + src];
            }
        }
        Ok(Eigh {
            dim: n,
            values,
            vectors,
        })
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigh()?.values.first().copied().unwrap_or(0.0))
    }

    /// Spectral (operator 2-) norm: largest eigenvalue magnitude.
    pub fn spectral_norm(&self) -> Result<f64> {
        let eig = self.eigh()?;
        Ok(eig.values.iter().map(|l| l.abs()).fold(0.0, f64::max))
    }

    /// Replaces eigenvalues in `[-tolerance, 0)` by zero and reconstructs.
    /// Errors with [`Error::NotPsd`] if any eigenvalue is below `-tolerance`.
    pub fn clamp_psd(&self, tolerance: f64) -> Result<HermitianMatrix> {
        let eig = self.eigh()?;
        eig.check_psd(tolerance)?;
        Ok(eig.reconstruct_mapped(|l| l.max(0.0)))
    }

    /// Cholesky factorization `self = L * L^H` (requires positive definite).
    pub fn cholesky(&self) -> Result<CholeskyFactor> {
        let n = self.dim;
        let mut lower = vec![Complex64::ZERO; n * n];
        for j in 0..n {
            let mut d = self.data[j * n + j].re;
            for k in 0..j {
                d -= lower[j * n + k].norm_sqr();
            }
            if !(d > 0.0) {
                return Err(Error::NotPsd {
                    min_eigenvalue: d,
                    tolerance: 0.0,
                });
            }
            let ljj = d.sqrt();
            lower[j * n + j] = Complex64::new(ljj, 0.0);
            for i in (j + 1)..n {
                let mut s = self.data[i * n + j];
                for k in 0..j {
                    s -= lower[i * n + k] * lower[j * n + k].conj();
                }
                lower[i * n + j] = s / ljj;
            }
        }
        Ok(CholeskyFactor { dim: n, lower })
    }
}

/// Eigendecomposition `A = U diag(values) U^H` with ascending `values`.
#[derive(Debug, Clone)]
pub struct Eigh {
    dim: usize,
    values: Vec<f64>,
    /// Row-major; column `j` is the eigenvector for `values[j]`.
    vectors: Vec<Complex64>,
}

impl Eigh {
    /// Ascending eigenvalues.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Row-major eigenvector matrix (columns are eigenvectors).
    pub fn vectors(&self) -> &[Complex64] {
        &self.vectors
    }

    /// Smallest eigenvalue (0 for the empty matrix).
    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Errors if any eigenvalue lies below `-tolerance`.
    pub fn check_psd(&self, tolerance: f64) -> Result<()> {
        let min = self.min_value();
        if min < -tolerance {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
                tolerance,
            });
        }
        Ok(())
    }

    /// Builds `U diag(f(values)) U^H` with exact Hermitian output.
    pub fn reconstruct_mapped(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let n = self.dim;
        let mapped: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        HermitianMatrix::from_upper(n, |i, j| {
            (0..n)
                .map(|k| mapped[k] * self.vectors[i * n + k] * self.vectors[j * n + k].conj())
                .sum()
        })
    }

    /// Square-root factor `S = U diag(sqrt(values))` (row-major), so
    /// `S S^H` reconstructs the matrix. Eigenvalues inside
    /// `[-tolerance, tolerance]` are treated as exact zeros — they are
    /// round-off residue of degenerate directions, and keeping their square
    /// roots (~1e-8 for ~1e-16 round-off) would leak off the true support.
    /// Errors if any eigenvalue is below `-tolerance`.
    pub fn sqrt_factor(&self, tolerance: f64) -> Result<Vec<Complex64>> {
        self.check_psd(tolerance)?;
        let n = self.dim;
        let mut s = vec![Complex64::ZERO; n * n];
        for k in 0..n {
            let r = if self.values[k] <= tolerance {
                0.0
            } else {
                self.values[k].sqrt()
            };
            for i in 0..n {
                s[i * n + k] = r * self.vectors[i * n + k];
            }
        }
        Ok(s)
    }
}

/// Lower-triangular Cholesky factor of a positive definite Hermitian matrix.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    dim: usize,
    /// Row-major lower-triangular `L` with real positive diagonal.
    lower: Vec<Complex64>,
}

impl CholeskyFactor {
    /// Factor dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Solves `(L L^H) x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(b.len(), self.dim, "dimension mismatch");
        let n = self.dim;
        let mut x = b.to_vec();
        // Forward: L y = b.
        for i in 0..n {
            for k in 0..i {
                let lik = self.lower[i * n + k];
                x[i] = x[i] - lik * x[k];
            }
            x[i] /= self.lower[i * n + i].re;
        }
        // Backward: L^H x = y.
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let lki = self.lower[k * n + i];
                x[i] = x[i] - lki.conj() * x[k];
            }
            x[i] /= self.lower[i * n + i].re;
        }
        x
    }

    /// `X = L^{-1} M` by forward substitution on each column of `M`
    /// (row-major output).
    pub fn forward_substitute(&self, m: &HermitianMatrix) -> Vec<Complex64> {
        assert_eq!(m.dim(), self.dim, "dimension mismatch");
        let n = self.dim;
        let mut x = m.entries().to_vec();
        for i in 0..n {
            for k in 0..i {
                let lik = self.lower[i * n + k];
                for c in 0..n {
                    let t = x[k * n + c];
                    x[i * n + c] -= lik * t;
                }
            }
            let d = self.lower[i * n + i].re;
            for c in 0..n {
                x[i * n + c] /= d;
            }
        }
        x
    }

    /// `trace((L L^H)^{-1}) = ||L^{-1}||_F^2`, by forward substitution on
    /// the identity columns. Independent of any eigendecomposition.
    pub fn inverse_trace(&self) -> f64 {
        let n = self.dim;
        let mut total = 0.0;
        let mut col = vec![Complex64::ZERO; n];
        for j in 0..n {
            for z in col.iter_mut() {
                *z = Complex64::ZERO;
            }
            col[j] = Complex64::ONE;
            // L x = e_j; the solution is zero above row j.
            for i in j..n {
                for k in j..i {
                    let lik = self.lower[i * n + k];
                    let t = col[k];
                    col[i] -= lik * t;
                }
                col[i] /= self.lower[i * n + i].re;
                total += col[i].norm_sqr();
            }
        }
        total
    }
}

/// Gram matrix `X^H X` of a row-major complex matrix with `dim` columns
/// (exactly Hermitian PSD by construction).
pub fn gram(x: &[Complex64], dim: usize) -> HermitianMatrix {
    assert!(dim > 0 && x.len().is_multiple_of(dim), "dimension mismatch");
    let rows = x.len() / dim;
    HermitianMatrix::from_upper(dim, |i, j| {
        (0..rows)
            .map(|p| x[p * dim + i].conj() * x[p * dim + j])
            .sum()
    })
}

/// Conjugated dot product `sum_i conj(a_i) * b_i`.
pub fn dot_conj(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Euclidean norm of a complex vector.
pub fn vec_norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn off_diagonal_norm(a: &[Complex64], n: usize) -> f64 {
    let mut s = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                s += a[p * n + q].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One complex Jacobi rotation zeroing `a[p][q]` (and `a[q][p]`), applied
/// two-sidedly to `a` and accumulated into the eigenvector matrix `v`.
fn jacobi_rotate(a: &mut [Complex64], v: &mut [Complex64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = apq / r; // e^{i phi}
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // Unitary J differs from identity only at:
    //   J[p][p] = c, J[p][q] = s, J[q][p] = -s*conj(phase), J[q][q] = c*conj(phase).
    let s_phase_conj = s * phase.conj();
    let c_phase_conj = c * phase.conj();
    // Columns: A <- A J.
    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = c * akp - s_phase_conj * akq;
        a[k * n + q] = s * akp + c_phase_conj * akq;
    }
    // Rows: A <- J^H A.
    let s_phase = s * phase;
    let c_phase = c * phase;
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = c * apk - s_phase * aqk;
        a[q * n + k] = s * apk + c_phase * aqk;
    }
    // Restore exact symmetry at the touched entries.
    a[p * n + q] = Complex64::ZERO;
    a[q * n + p] = Complex64::ZERO;
    a[p * n + p] = Complex64::new(a[p * n + p].re, 0.0);
    a[q * n + q] = Complex64::new(a[q * n + q].re, 0.0);
    // Eigenvectors: V <- V J.
    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = c * vkp - s_phase_conj * vkq;
        v[k * n + q] = s * vkp + c_phase_conj * vkq;
    }
}
