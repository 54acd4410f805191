//! Dense complex-matrix kernels.
//!
//! Everything here works on plain `DMatrix<Complex<f64>>` and knows nothing
//! about modes or parity. The eigen and singular value solvers come from
//! `nalgebra`; this module adds the hermiticity/PSD guards, the
//! deterministic ordering of eigenpairs and the spectral functions built on
//! top of them.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Largest matrix dimension accepted by the dense kernels.
pub const MAX_DENSE_DIM: usize = 1 << 10;
/// Relative trace-norm tolerance on the anti-hermitian part.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Eigenvalues in `[-CLIP_TOL, 0)` are clipped to zero.
pub const CLIP_TOL: f64 = 1e-10;

const TIE_TOL: f64 = 1e-12;
const EIG_MAX_ITER: usize = 1_000_000;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

#[inline]
pub fn real(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

/// Builds a real diagonal matrix.
pub fn diag(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| real(v)),
    ))
}

/// Builds a matrix from real row-major entries.
pub fn from_real_rows(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(rows, cols, data.iter().map(|&v| real(v)))
}

/// `|v⟩⟨v|`
pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().sum()
}

pub fn check_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn check_dense_dim(dim: usize) -> Result<()> {
    if dim > MAX_DENSE_DIM {
        return Err(Error::DenseCapExceeded {
            dim,
            cap: MAX_DENSE_DIM,
        });
    }
    Ok(())
}

fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::dims(
            "square matrix",
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    Ok(m.nrows())
}

fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral decomposition `H = U diag(λ) U†` with eigenvalues in descending
/// order and orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> CVector {
        self.eigenvectors.column(k).into_owned()
    }

    /// `U diag(f(λ)) U†`
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            scaled.column_mut(k).scale_mut(w);
        }
        let mut out = scaled * self.eigenvectors.adjoint();
        hermitize(&mut out);
        out
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.spectral_map(|x| x)
    }
}

/// Replaces `m` by its hermitian part in place.
pub fn hermitize(m: &mut CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

fn raw_eigen(h: CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, EIG_MAX_ITER).ok_or(Error::NoConvergence)?;
    Ok((eig.eigenvalues.iter().copied().collect(), eig.eigenvectors))
}

/// Index of the largest-magnitude component; the smallest index wins ties.
pub(crate) fn dominant_index(v: &[C64]) -> usize {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    v.iter()
        .position(|z| z.norm() >= max - TIE_TOL * max.max(1.0))
        .unwrap_or(0)
}

/// Descending order of eigenpairs. Eigenvalues within a relative `1e-12`
/// form a tie group, ordered by the index of the dominant component.
pub(crate) fn canonical_order(values: &[f64], dominant: &[usize]) -> Vec<usize> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let scale = values.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (values[order[end - 1]] - values[order[end]]).abs() <= TIE_TOL * scale {
            end += 1;
        }
        order[start..end].sort_by_key(|&k| (dominant[k], k));
        start = end;
    }
    order
}

/// Hermitian eigendecomposition with a deterministic eigenpair order.
///
/// Eigenvalues come out descending. Eigenvalues that agree within a relative
/// `1e-12` count as equal, and inside such a group the eigenvectors are
/// ordered by the index of their largest-magnitude component. Every
/// eigenvector is rephased so that this component is real and positive.
pub fn eig_hermitian(h: &CMatrix) -> Result<EigenDecomposition> {
    let n = check_square(h)?;
    check_finite(h)?;
    check_dense_dim(n)?;
    if n == 0 {
        return Ok(EigenDecomposition {
            eigenvalues: Vec::new(),
            eigenvectors: CMatrix::zeros(0, 0),
        });
    }

    let anti = h - h.adjoint();
    let anti_frob = frobenius(&anti);
    let mut herm = h.clone();
    hermitize(&mut herm);
    let (values, vectors) = raw_eigen(herm)?;

    if anti_frob > 0.0 {
        let scale = values.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        // ‖A‖₁ ≤ √n ‖A‖_F, so the exact norm is only needed near the threshold.
        if (n as f64).sqrt() * anti_frob > HERMITIAN_TOL * scale {
            let rotated = anti * c64(0.0, -1.0);
            let (anti_values, _) = raw_eigen(rotated)?;
            let residual: f64 = anti_values.iter().map(|v| v.abs()).sum();
            if residual > HERMITIAN_TOL * scale {
                return Err(Error::NonHermitian { residual });
            }
        }
    }

    let columns: Vec<Vec<C64>> = (0..n)
        .map(|k| vectors.column(k).iter().copied().collect())
        .collect();
    let dominant: Vec<usize> = columns.iter().map(|c| dominant_index(c)).collect();
    let order = canonical_order(&values, &dominant);

    let mut eigenvectors = CMatrix::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let col = &columns[src];
        let pivot = col[dominant_index(col)];
        let phase = if pivot.norm() > 0.0 {
            pivot.conj() / pivot.norm()
        } else {
            real(1.0)
        };
        for (i, z) in col.iter().enumerate() {
            eigenvectors[(i, dst)] = z * phase;
        }
        eigenvalues.push(values[src]);
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigendecomposition of a PSD matrix with the small negative noise clipped.
pub fn eig_psd(a: &CMatrix) -> Result<EigenDecomposition> {
    let mut eig = eig_hermitian(a)?;
    if let Some(&min) = eig.eigenvalues.last() {
        if min < -CLIP_TOL {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
            });
        }
    }
    for v in eig.eigenvalues.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(eig)
}

pub fn matrix_sqrt_psd(a: &CMatrix) -> Result<CMatrix> {
    Ok(eig_psd(a)?.spectral_map(f64::sqrt))
}

/// Base-2 logarithm on the support; the kernel maps to zero.
pub fn matrix_log_psd(a: &CMatrix) -> Result<CMatrix> {
    Ok(eig_psd(a)?.spectral_map(|x| if x > CLIP_TOL { x.log2() } else { 0.0 }))
}

/// Sum of singular values.
pub fn trace_norm(x: &CMatrix) -> Result<f64> {
    let n = check_square(x)?;
    check_finite(x)?;
    if n == 0 {
        return Ok(0.0);
    }
    let anti = frobenius(&(x - x.adjoint()));
    if anti <= 1e-14 * frobenius(x).max(1e-300) {
        let mut herm = x.clone();
        hermitize(&mut herm);
        let (values, _) = raw_eigen(herm)?;
        return Ok(values.iter().map(|v| v.abs()).sum());
    }
    singular_value_sum(x)
}

/// Nuclear norm of an arbitrary (possibly rectangular) matrix.
pub fn singular_value_sum(x: &CMatrix) -> Result<f64> {
    if x.is_empty() {
        return Ok(0.0);
    }
    let svd = SVD::try_new(x.clone(), false, false, f64::EPSILON, EIG_MAX_ITER)
        .ok_or(Error::NoConvergence)?;
    Ok(svd.singular_values.iter().sum())
}

/// `W` with `W W† = A`, restricted to the support of `A`.
fn support_factor(a: &CMatrix) -> Result<CMatrix> {
    let eig = eig_psd(a)?;
    let support: Vec<usize> = (0..eig.dim())
        .filter(|&k| eig.eigenvalues[k] > CLIP_TOL)
        .collect();
    let mut w = eig.eigenvectors.select_columns(&support);
    for (col, &k) in support.iter().enumerate() {
        let s = real(eig.eigenvalues[k].sqrt());
        for z in w.column_mut(col).iter_mut() {
            *z *= s;
        }
    }
    Ok(w)
}

/// Uhlmann fidelity `Tr[(√A B √A)^{1/2}]`.
///
/// With `A = W W†` and `B = V V†` this is the trace norm of `V† W`, taken
/// from singular values so near-null directions do not pass through a
/// square root.
pub fn uhlmann_fidelity_matrices(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::dims(
            format!("{}x{}", a.nrows(), a.ncols()),
            format!("{}x{}", b.nrows(), b.ncols()),
        ));
    }
    let wa = support_factor(a)?;
    let wb = support_factor(b)?;
    if wa.ncols() == 0 || wb.ncols() == 0 {
        return Ok(0.0);
    }
    let overlap = wb.adjoint() * wa;
    Ok(overlap.singular_values().iter().sum())
}
