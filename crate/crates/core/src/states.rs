//! Parity-superselected fermionic states.
//!
//! A [`FermionicState`] stores the Jordan-Wigner representative of a density
//! operator under the canonical mode ordering. Construction checks that the
//! matrix is PSD, has trace at most one and does not couple the even and odd
//! occupation sectors.

use crate::channels::FermionicChannel;
use crate::error::{Error, Result};
use crate::fock::{self, fock_dim, modes_for_dim, ModeOrdering, Parity};
use crate::numerics::{
    self, check_finite, eig_hermitian, real, singular_value_sum, trace, uhlmann_fidelity_matrices,
    CMatrix, CVector, EigenDecomposition, CLIP_TOL,
};

/// Off-sector trace norm tolerated in a state or even operator.
pub const PARITY_TOL: f64 = 1e-10;
/// Slack on `Tr ρ ≤ 1`.
pub const TRACE_TOL: f64 = 1e-10;
/// Distance from unit trace accepted as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Marginal error tolerated by a purification.
pub const MARGINAL_TOL: f64 = 1e-9;

/// `‖P₀ M P₁‖₁ + ‖P₁ M P₀‖₁` for a square operator on `modes` modes.
pub fn parity_residual(m: &CMatrix, modes: usize) -> Result<f64> {
    let dim = fock_dim(modes);
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::dims(
            format!("{dim}x{dim}"),
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    let even = fock::sector_indices(modes, Parity::Even);
    let odd = fock::sector_indices(modes, Parity::Odd);
    let upper = m.select_rows(&even).select_columns(&odd);
    let lower = m.select_rows(&odd).select_columns(&even);
    Ok(block_norm(&upper)? + block_norm(&lower)?)
}

fn block_norm(b: &CMatrix) -> Result<f64> {
    if b.iter().all(|z| z.norm_sqr() == 0.0) {
        Ok(0.0)
    } else {
        singular_value_sum(b)
    }
}

/// Eigendecomposition computed sector by sector, so every eigenvector has a
/// definite parity even inside degenerate eigenspaces.
#[derive(Debug, Clone)]
pub struct ParitySpectrum {
    pub eigen: EigenDecomposition,
    pub parities: Vec<Parity>,
}

impl ParitySpectrum {
    /// Eigenpairs with eigenvalue above the rank threshold.
    pub fn support(&self) -> impl Iterator<Item = (f64, CVector, Parity)> + '_ {
        self.eigen
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > CLIP_TOL)
            .map(|(k, &v)| (v, self.eigen.eigenvector(k), self.parities[k]))
    }

    pub fn rank(&self, parity: Parity) -> usize {
        self.support().filter(|(_, _, p)| *p == parity).count()
    }
}

/// Parity-resolved spectral decomposition of an even hermitian operator.
pub fn parity_eigen(m: &CMatrix, modes: usize) -> Result<ParitySpectrum> {
    let dim = fock_dim(modes);
    let mut pairs: Vec<(f64, CVector, Parity)> = Vec::with_capacity(dim);
    for parity in [Parity::Even, Parity::Odd] {
        let idx = fock::sector_indices(modes, parity);
        let block = m.select_rows(&idx).select_columns(&idx);
        let eig = eig_hermitian(&block)?;
        for (k, &value) in eig.eigenvalues.iter().enumerate() {
            let mut v = CVector::zeros(dim);
            for (r, &i) in idx.iter().enumerate() {
                v[i] = eig.eigenvectors[(r, k)];
            }
            pairs.push((value, v, parity));
        }
    }
    let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let dominant: Vec<usize> = pairs
        .iter()
        .map(|p| numerics::dominant_index(p.1.as_slice()))
        .collect();
    let order = numerics::canonical_order(&values, &dominant);
    let mut slots: Vec<Option<(f64, CVector, Parity)>> = pairs.into_iter().map(Some).collect();
    let pairs: Vec<(f64, CVector, Parity)> = order
        .into_iter()
        .map(|k| slots[k].take().expect("order is a permutation"))
        .collect();
    let mut eigenvectors = CMatrix::zeros(dim, dim);
    let mut eigenvalues = Vec::with_capacity(dim);
    let mut parities = Vec::with_capacity(dim);
    for (k, (value, v, parity)) in pairs.into_iter().enumerate() {
        eigenvectors.set_column(k, &v);
        eigenvalues.push(value);
        parities.push(parity);
    }
    Ok(ParitySpectrum {
        eigen: EigenDecomposition {
            eigenvalues,
            eigenvectors,
        },
        parities,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FermionicState {
    modes: usize,
    matrix: CMatrix,
    parity_residual: f64,
}

/// What the loader reports about a candidate state matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDiagnostics {
    pub trace: f64,
    pub parity_residual: f64,
    pub min_eigenvalue: f64,
}

impl FermionicState {
    /// Validates `matrix` as a state of `modes` modes.
    pub fn new(matrix: CMatrix, modes: usize) -> Result<Self> {
        let dim = fock_dim(modes);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::dims(
                format!("{dim}x{dim}"),
                format!("{}x{}", matrix.nrows(), matrix.ncols()),
            ));
        }
        check_finite(&matrix)?;
        let diagnostics = Self::diagnose(&matrix, modes)?;
        if diagnostics.parity_residual > PARITY_TOL {
            return Err(Error::ParityViolation {
                residual: diagnostics.parity_residual,
            });
        }
        if diagnostics.min_eigenvalue < -CLIP_TOL {
            return Err(Error::NotPsd {
                min_eigenvalue: diagnostics.min_eigenvalue,
            });
        }
        if diagnostics.trace > 1.0 + TRACE_TOL {
            return Err(Error::TraceTooLarge {
                trace: diagnostics.trace,
            });
        }
        Ok(Self {
            modes,
            matrix,
            parity_residual: diagnostics.parity_residual,
        })
    }

    /// Infers the mode count from the matrix dimension.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        let modes = modes_for_dim(matrix.nrows())
            .ok_or_else(|| Error::dims("power-of-two dimension", matrix.nrows()))?;
        Self::new(matrix, modes)
    }

    /// Trace, parity residual and minimum eigenvalue of a square matrix.
    pub fn diagnose(matrix: &CMatrix, modes: usize) -> Result<StateDiagnostics> {
        let parity_residual = parity_residual(matrix, modes)?;
        let eig = eig_hermitian(matrix)?;
        Ok(StateDiagnostics {
            trace: trace(matrix).re,
            parity_residual,
            min_eigenvalue: eig.eigenvalues.last().copied().unwrap_or(0.0),
        })
    }

    /// For matrices that are states by construction (tensor products,
    /// marginals, channel outputs of validated inputs).
    pub(crate) fn trusted(matrix: CMatrix, modes: usize) -> Self {
        let parity_residual = parity_residual(&matrix, modes).unwrap_or(f64::NAN);
        Self {
            modes,
            matrix,
            parity_residual,
        }
    }

    pub fn vacuum(modes: usize) -> Self {
        Self::trusted(fock::vacuum_projector(modes), modes)
    }

    /// Diagonal state in the Fock basis.
    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        Self::from_matrix(numerics::diag(probabilities))
    }

    /// `|ψ⟩⟨ψ|` for a vector of definite parity.
    pub fn pure(vector: &CVector) -> Result<Self> {
        Self::from_matrix(numerics::outer(vector))
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn parity_residual(&self) -> f64 {
        self.parity_residual
    }

    pub fn trace(&self) -> f64 {
        trace(&self.matrix).re
    }

    pub fn is_normalized(&self) -> bool {
        (self.trace() - 1.0).abs() <= NORMALIZATION_TOL
    }

    pub fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized {
                trace: self.trace(),
            })
        }
    }

    pub fn spectrum(&self) -> Result<ParitySpectrum> {
        parity_eigen(&self.matrix, self.modes)
    }

    /// `ρ ⊠ σ`, with this state's modes first. Both factors are even, so the
    /// representative is the plain tensor product.
    pub fn compose(&self, other: &FermionicState) -> FermionicState {
        Self::trusted(
            numerics::kron(&self.matrix, &other.matrix),
            self.modes + other.modes,
        )
    }

    /// `ρ^{⊠n}`
    pub fn tensor_power(&self, n: usize) -> FermionicState {
        let mut out = self.clone();
        for _ in 1..n.max(1) {
            out = out.compose(self);
        }
        out
    }

    /// Representative under another ordering of the same modes.
    pub fn reordered(&self, to: &ModeOrdering) -> Result<CMatrix> {
        fock::reorder_modes(&self.matrix, &ModeOrdering::canonical(self.modes), to)
    }

    /// Fermionic partial trace over the listed modes.
    pub fn partial_trace(&self, traced: &[usize]) -> Result<FermionicState> {
        let kept = self.modes - dedup_count(traced);
        if kept == 0 {
            // Still validate the mode indices.
            ModeOrdering::with_trailing(self.modes, traced)?;
            return Err(Error::EmptyComplement);
        }
        let m = partial_trace_matrix(&self.matrix, self.modes, traced)?;
        Ok(Self::trusted(m, kept))
    }

    /// `Tr^f ρ`, which coincides with the trace of the representative.
    pub fn full_trace(&self) -> f64 {
        self.trace()
    }
}

fn dedup_count(modes: &[usize]) -> usize {
    let mut v = modes.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// Partial trace of an even operator: the traced modes are first moved to
/// the trailing slots with fermionic swaps, then the trailing qubits are
/// summed out.
pub fn partial_trace_matrix(m: &CMatrix, modes: usize, traced: &[usize]) -> Result<CMatrix> {
    let ordering = ModeOrdering::with_trailing(modes, traced)?;
    let moved = if ordering.is_canonical() {
        m.clone()
    } else {
        fock::reorder_modes(m, &ModeOrdering::canonical(modes), &ordering)?
    };
    Ok(trace_trailing(&moved, dedup_count(traced)))
}

/// Matrix partial trace over the last `count` qubit slots.
pub fn trace_trailing(m: &CMatrix, count: usize) -> CMatrix {
    let tail = 1usize << count;
    let head = m.nrows() / tail;
    CMatrix::from_fn(head, head, |a, b| {
        (0..tail).map(|t| m[(a * tail + t, b * tail + t)]).sum()
    })
}

/// `J(ρ)^{1/2}`
pub fn sqrt_state(rho: &FermionicState) -> Result<CMatrix> {
    Ok(rho.spectrum()?.eigen.spectral_map(|x| x.max(0.0).sqrt()))
}

/// `log₂ J(ρ)` on the support.
pub fn log_state(rho: &FermionicState) -> Result<CMatrix> {
    Ok(rho
        .spectrum()?
        .eigen
        .spectral_map(|x| if x > CLIP_TOL { x.log2() } else { 0.0 }))
}

/// Von Neumann entropy in bits.
pub fn entropy(rho: &FermionicState) -> Result<f64> {
    rho.require_normalized()?;
    let spectrum = rho.spectrum()?;
    Ok(shannon_entropy(&spectrum.eigen.eigenvalues))
}

/// `−Σ p log₂ p` with `0 log 0 = 0`.
pub fn shannon_entropy(probabilities: &[f64]) -> f64 {
    probabilities
        .iter()
        .filter(|&&p| p > CLIP_TOL)
        .map(|&p| -p * p.log2())
        .sum()
}

fn same_modes(a: &FermionicState, b: &FermionicState) -> Result<()> {
    if a.modes != b.modes {
        return Err(Error::dims(
            format!("{} modes", a.modes),
            format!("{} modes", b.modes),
        ));
    }
    Ok(())
}

/// `½‖J(ρ) − J(σ)‖₁`
pub fn trace_distance(rho: &FermionicState, sigma: &FermionicState) -> Result<f64> {
    same_modes(rho, sigma)?;
    Ok(0.5 * numerics::trace_norm(&(&rho.matrix - &sigma.matrix))?)
}

/// Uhlmann fidelity of two states.
pub fn fidelity(rho: &FermionicState, sigma: &FermionicState) -> Result<f64> {
    same_modes(rho, sigma)?;
    uhlmann_fidelity_matrices(&rho.matrix, &sigma.matrix)
}

/// A pure state of `system + purifier` modes, system modes first.
#[derive(Debug, Clone)]
pub struct Purification {
    vector: CVector,
    state: FermionicState,
    marginal: FermionicState,
    system_modes: usize,
    purifier_modes: usize,
}

impl Purification {
    /// Wraps a unit vector of definite parity. The marginal is computed.
    pub fn from_vector(
        vector: CVector,
        system_modes: usize,
        purifier_modes: usize,
    ) -> Result<Self> {
        let total = system_modes + purifier_modes;
        if vector.len() != fock_dim(total) {
            return Err(Error::dims(fock_dim(total), vector.len()));
        }
        if (vector.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!(
                "purification vector has norm {}",
                vector.norm()
            )));
        }
        numerics::check_dense_dim(fock_dim(total))?;
        let state = FermionicState::new(numerics::outer(&vector), total)?;
        let traced: Vec<usize> = (system_modes..total).collect();
        let marginal = if purifier_modes == 0 {
            state.clone()
        } else {
            state.partial_trace(&traced)?
        };
        Ok(Self {
            vector,
            state,
            marginal,
            system_modes,
            purifier_modes,
        })
    }

    pub fn vector(&self) -> &CVector {
        &self.vector
    }

    pub fn state(&self) -> &FermionicState {
        &self.state
    }

    pub fn marginal(&self) -> &FermionicState {
        &self.marginal
    }

    pub fn system_modes(&self) -> usize {
        self.system_modes
    }

    pub fn purifier_modes(&self) -> usize {
        self.purifier_modes
    }

    pub fn total_modes(&self) -> usize {
        self.system_modes + self.purifier_modes
    }

    /// Global parity of the pure state.
    pub fn parity(&self) -> Parity {
        let (mut even, mut odd) = (0.0, 0.0);
        for (i, z) in self.vector.iter().enumerate() {
            match Parity::of_index(i) {
                Parity::Even => even += z.norm_sqr(),
                Parity::Odd => odd += z.norm_sqr(),
            }
        }
        if even >= odd {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Same state with `extra` vacuum modes appended to the purifier.
    pub fn padded(&self, extra: usize) -> Result<Self> {
        let tail = fock_dim(extra);
        let mut v = CVector::zeros(self.vector.len() * tail);
        for (i, z) in self.vector.iter().enumerate() {
            v[i * tail] = *z;
        }
        Self::from_vector(v, self.system_modes, self.purifier_modes + extra)
    }

    /// Coefficient matrix `A` with `|Ψ⟩ = Σ A_ij |i⟩|j⟩`, system index first.
    pub fn coefficients(&self) -> CMatrix {
        let cols = fock_dim(self.purifier_modes);
        CMatrix::from_fn(fock_dim(self.system_modes), cols, |i, j| {
            self.vector[i * cols + j]
        })
    }
}

/// Purification on `⌈log₂ 2r⌉` purifier modes, `r` the larger of the even
/// and odd ranks. The k-th even (odd) eigenvector, by descending eigenvalue,
/// is paired with the k-th even (odd) purifier Fock vector, which makes the
/// global state even.
pub fn minimal_purification(rho: &FermionicState) -> Result<Purification> {
    let (vector, purifier) = minimal_purification_vector(rho)?;
    let p = Purification::from_vector(vector, rho.modes(), purifier)?;
    let err = numerics::trace_norm(&(p.marginal().matrix() - rho.matrix()))?;
    if err > MARGINAL_TOL {
        return Err(Error::InvalidState(format!(
            "purification marginal off by {err:.3e}"
        )));
    }
    Ok(p)
}

/// Vector of [`minimal_purification`] and its purifier size, without
/// forming the global density matrix.
pub(crate) fn minimal_purification_vector(rho: &FermionicState) -> Result<(CVector, usize)> {
    rho.require_normalized()?;
    let spectrum = rho.spectrum()?;
    let r = spectrum.rank(Parity::Even).max(spectrum.rank(Parity::Odd));
    if r == 0 {
        return Err(Error::InvalidState("state has empty support".into()));
    }
    let purifier = (2 * r).next_power_of_two().trailing_zeros() as usize;
    let even_slots = fock::sector_indices(purifier, Parity::Even);
    let odd_slots = fock::sector_indices(purifier, Parity::Odd);
    let tail = fock_dim(purifier);

    let mut vector = CVector::zeros(rho.dim() * tail);
    let (mut next_even, mut next_odd) = (0, 0);
    for (value, u, parity) in spectrum.support() {
        let slot = match parity {
            Parity::Even => {
                next_even += 1;
                even_slots[next_even - 1]
            }
            Parity::Odd => {
                next_odd += 1;
                odd_slots[next_odd - 1]
            }
        };
        let amp = value.sqrt();
        for (i, z) in u.iter().enumerate() {
            vector[i * tail + slot] += z * amp;
        }
    }
    let norm = vector.norm();
    vector /= real(norm);
    Ok((vector, purifier))
}

/// Modified Gram-Schmidt; returns the component of `v` orthogonal to `basis`.
fn orthogonalize(v: &CVector, basis: &[CVector]) -> CVector {
    let mut w = v.clone();
    for _ in 0..2 {
        for b in basis {
            let overlap = b.dotc(&w);
            w -= b * overlap;
        }
    }
    w
}

/// Orthonormal completion of `vectors` inside one parity sector.
fn complete_sector(vectors: &[CVector], modes: usize, parity: Parity) -> Vec<CVector> {
    let dim = fock_dim(modes);
    let target = dim / 2;
    let mut basis: Vec<CVector> = vectors.to_vec();
    let mut extra = Vec::new();
    for index in fock::sector_indices(modes, parity) {
        if basis.len() >= target {
            break;
        }
        let mut e = CVector::zeros(dim);
        e[index] = real(1.0);
        let w = orthogonalize(&e, &basis);
        let norm = w.norm();
        if norm > 1e-6 {
            let w = w / real(norm);
            basis.push(w.clone());
            extra.push(w);
        }
    }
    extra
}

/// Schmidt-partner vectors `a_k = (⟨u_k| ⊗ I)|Ψ⟩ / √λ_k`, orthonormalized.
fn schmidt_partners(coeffs: &CMatrix, support: &[(f64, CVector, Parity)]) -> Vec<CVector> {
    let mut out: Vec<CVector> = Vec::with_capacity(support.len());
    for (value, u, _) in support {
        let a = (u.adjoint() * coeffs).transpose() / real(value.sqrt());
        let w = orthogonalize(&a, &out);
        let norm = w.norm();
        out.push(w / real(norm));
    }
    out
}

/// Unitary `U` on the purifier with `(I ⊗ U)|Ψ⟩ = |Φ⟩`, both vectors on the
/// same number of modes. Schmidt partners are split by parity and the
/// complements are matched sector by sector, so `U` has definite parity.
fn connecting_unitary(psi: &Purification, phi: &Purification) -> Result<CMatrix> {
    let modes = psi.purifier_modes();
    let dim = fock_dim(modes);
    let spectrum = psi.marginal().spectrum()?;
    let support: Vec<(f64, CVector, Parity)> = spectrum.support().collect();
    let a = schmidt_partners(&psi.coefficients(), &support);
    let b = schmidt_partners(&phi.coefficients(), &support);
    let shift = psi.parity().combine(phi.parity());

    let mut u = CMatrix::zeros(dim, dim);
    for (ak, bk) in a.iter().zip(&b) {
        u += bk * ak.adjoint();
    }
    for parity in [Parity::Even, Parity::Odd] {
        // Partner of the k-th support vector has parity par(u_k) ⊕ par(Ψ).
        let sector_a: Vec<CVector> = support
            .iter()
            .zip(&a)
            .filter(|((_, _, p), _)| p.combine(psi.parity()) == parity)
            .map(|(_, v)| v.clone())
            .collect();
        let target = parity.combine(shift);
        let sector_b: Vec<CVector> = support
            .iter()
            .zip(&b)
            .filter(|((_, _, p), _)| p.combine(phi.parity()) == target)
            .map(|(_, v)| v.clone())
            .collect();
        let rest_a = complete_sector(&sector_a, modes, parity);
        let rest_b = complete_sector(&sector_b, modes, target);
        for (x, y) in rest_a.iter().zip(&rest_b) {
            u += y * x.adjoint();
        }
    }
    Ok(u)
}

/// Channel `V` on the purifier of `psi` with `(I ⊠ V)(Ψ) = Φ`.
///
/// When the purifiers differ in size the smaller purification is padded with
/// vacuum modes; a smaller target then discards the extra modes after the
/// connecting unitary, a larger one embeds before it.
pub fn connect_purifications(psi: &Purification, phi: &Purification) -> Result<FermionicChannel> {
    if psi.system_modes() != phi.system_modes() {
        return Err(Error::dims(
            format!("{} system modes", psi.system_modes()),
            format!("{} system modes", phi.system_modes()),
        ));
    }
    let distance = numerics::trace_norm(&(psi.marginal().matrix() - phi.marginal().matrix()))?;
    if distance > 1e-8 {
        return Err(Error::MarginalMismatch { distance });
    }
    let m = psi.purifier_modes();
    let k = phi.purifier_modes();
    let width = m.max(k);
    let psi_w = psi.padded(width - m)?;
    let phi_w = phi.padded(width - k)?;
    let u = connecting_unitary(&psi_w, &phi_w)?;

    let kraus = if m < k {
        // Embed |j⟩ ↦ |j⟩|0…0⟩, then rotate.
        let pad = fock_dim(k - m);
        let embed = CMatrix::from_fn(fock_dim(k), fock_dim(m), |r, c| {
            if r == c * pad {
                real(1.0)
            } else {
                real(0.0)
            }
        });
        vec![u * embed]
    } else if m > k {
        // Rotate, then discard the trailing m - k modes.
        let pad = fock_dim(m - k);
        (0..pad)
            .map(|j| {
                let project = CMatrix::from_fn(fock_dim(k), fock_dim(m), |r, c| {
                    if c == r * pad + j {
                        real(1.0)
                    } else {
                        real(0.0)
                    }
                });
                project * &u
            })
            .filter(|kr| kr.iter().any(|z| z.norm() > 1e-14))
            .collect()
    } else {
        vec![u]
    };
    FermionicChannel::new(kraus, true)
}
