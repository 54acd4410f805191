//! Fermionic transformations in Kraus form.
//!
//! Every Kraus operator must have definite parity: even operators are block
//! diagonal with respect to the occupation-parity grading, odd ones block
//! anti-diagonal. Different operators of one channel may have different
//! parities.
//!
//! Kraus matrices are stored compressed to their nonzero rows and columns.
//! The compression channels built from Fock-diagonal sources are extremely
//! sparse, and every kernel here works on the compressed block.

use crate::error::{Error, Result};
use crate::fock::{fock_dim, modes_for_dim, Parity};
use crate::numerics::{self, hermitize, real, singular_value_sum, CMatrix, CVector, C64};
use crate::random::{self, SeededRng};
use crate::states::{
    self, minimal_purification, minimal_purification_vector, FermionicState, Purification,
};

/// Off-parity trace norm tolerated in a Kraus operator or an effect.
pub const KRAUS_PARITY_TOL: f64 = 1e-10;
/// Trace-norm slack on `Σ K†K = I`.
pub const COMPLETENESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct KrausOperator {
    out_dim: usize,
    in_dim: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    block: CMatrix,
    parity: Parity,
}

fn nonzero_support(m: &CMatrix) -> (Vec<usize>, Vec<usize>) {
    let rows = (0..m.nrows())
        .filter(|&r| m.row(r).iter().any(|z| z.norm_sqr() > 0.0))
        .collect();
    let cols = (0..m.ncols())
        .filter(|&c| m.column(c).iter().any(|z| z.norm_sqr() > 0.0))
        .collect();
    (rows, cols)
}

impl KrausOperator {
    /// Classifies the parity of `matrix`; fails when both graded parts are
    /// above tolerance.
    pub fn new(matrix: &CMatrix) -> Result<Self> {
        Self::classified(matrix, 0)
    }

    fn classified(matrix: &CMatrix, index: usize) -> Result<Self> {
        let (out_dim, in_dim) = matrix.shape();
        if modes_for_dim(out_dim).is_none() || modes_for_dim(in_dim).is_none() {
            return Err(Error::dims(
                "power-of-two shape",
                format!("{out_dim}x{in_dim}"),
            ));
        }
        numerics::check_finite(matrix)?;
        let mut op = Self::with_parity(matrix, Parity::Even);
        let (even_norm, odd_norm) = op.graded_norms()?;
        op.parity = match (even_norm > KRAUS_PARITY_TOL, odd_norm > KRAUS_PARITY_TOL) {
            (true, true) => {
                return Err(Error::IndefiniteParityKraus {
                    index,
                    even_norm,
                    odd_norm,
                })
            }
            (false, true) => Parity::Odd,
            _ => Parity::Even,
        };
        Ok(op)
    }

    /// Trusts the caller on the parity.
    pub(crate) fn with_parity(matrix: &CMatrix, parity: Parity) -> Self {
        let (rows, cols) = nonzero_support(matrix);
        let block = matrix.select_rows(&rows).select_columns(&cols);
        Self {
            out_dim: matrix.nrows(),
            in_dim: matrix.ncols(),
            rows,
            cols,
            block,
            parity,
        }
    }

    /// Trace norms of the parity-preserving and parity-flipping parts.
    fn graded_norms(&self) -> Result<(f64, f64)> {
        let mut even = self.block.clone();
        let mut odd = self.block.clone();
        for (a, &r) in self.rows.iter().enumerate() {
            for (b, &c) in self.cols.iter().enumerate() {
                if Parity::of_index(r) == Parity::of_index(c) {
                    odd[(a, b)] = C64::default();
                } else {
                    even[(a, b)] = C64::default();
                }
            }
        }
        let norm = |m: &CMatrix| -> Result<f64> {
            if m.iter().all(|z| z.norm_sqr() == 0.0) {
                Ok(0.0)
            } else {
                singular_value_sum(m)
            }
        };
        Ok((norm(&even)?, norm(&odd)?))
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn in_modes(&self) -> usize {
        modes_for_dim(self.in_dim).unwrap_or(0)
    }

    pub fn out_modes(&self) -> usize {
        modes_for_dim(self.out_dim).unwrap_or(0)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.out_dim, self.in_dim)
    }

    /// Number of stored (nonzero-support) entries.
    pub fn stored_len(&self) -> usize {
        self.block.len()
    }

    pub fn is_zero(&self) -> bool {
        self.block.is_empty()
    }

    /// Full dense matrix.
    pub fn matrix(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.out_dim, self.in_dim);
        for (a, &r) in self.rows.iter().enumerate() {
            for (b, &c) in self.cols.iter().enumerate() {
                m[(r, c)] = self.block[(a, b)];
            }
        }
        m
    }

    /// `Tr[X K]` for a square `X` on the input space (requires a square Kraus).
    fn trace_against(&self, x: &CMatrix) -> C64 {
        let mut acc = C64::default();
        for (a, &r) in self.rows.iter().enumerate() {
            for (b, &c) in self.cols.iter().enumerate() {
                acc += self.block[(a, b)] * x[(c, r)];
            }
        }
        acc
    }

    /// Adds `(K ⊗ I_E) X (K ⊗ I_E)†` to `out`, with `E = 2^extra` trailing.
    fn sandwich_into(&self, x: &CMatrix, extra: usize, out: &mut CMatrix) {
        if self.is_zero() {
            return;
        }
        let e = fock_dim(extra);
        let cols: Vec<usize> = self
            .cols
            .iter()
            .flat_map(|&c| (0..e).map(move |t| c * e + t))
            .collect();
        let rows: Vec<usize> = self
            .rows
            .iter()
            .flat_map(|&r| (0..e).map(move |t| r * e + t))
            .collect();
        let block = if extra == 0 {
            self.block.clone()
        } else {
            numerics::kron(&self.block, &CMatrix::identity(e, e))
        };
        let xs = x.select_rows(&cols).select_columns(&cols);
        let y = &block * xs * block.adjoint();
        for (a, &r) in rows.iter().enumerate() {
            for (b, &s) in rows.iter().enumerate() {
                out[(r, s)] += y[(a, b)];
            }
        }
    }

    /// Adds `K† K` to `out`.
    fn gram_into(&self, out: &mut CMatrix) {
        let g = self.block.adjoint() * &self.block;
        for (a, &r) in self.cols.iter().enumerate() {
            for (b, &s) in self.cols.iter().enumerate() {
                out[(r, s)] += g[(a, b)];
            }
        }
    }
}

/// Side on which extra modes are attached by [`FermionicChannel::extend`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Before,
    After,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FermionicChannel {
    kraus: Vec<KrausOperator>,
    in_modes: usize,
    out_modes: usize,
    deterministic: bool,
}

impl FermionicChannel {
    /// Validates shapes, per-operator parity and completeness.
    pub fn new(kraus: Vec<CMatrix>, deterministic: bool) -> Result<Self> {
        let ops = kraus
            .iter()
            .enumerate()
            .map(|(i, k)| KrausOperator::classified(k, i))
            .collect::<Result<Vec<_>>>()?;
        Self::from_operators(ops, deterministic)
    }

    pub fn from_operators(kraus: Vec<KrausOperator>, deterministic: bool) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| {
            Error::InvalidParameter("channel needs at least one Kraus operator".into())
        })?;
        let shape = first.shape();
        if let Some(bad) = kraus.iter().find(|k| k.shape() != shape) {
            return Err(Error::dims(
                format!("{}x{}", shape.0, shape.1),
                format!("{}x{}", bad.shape().0, bad.shape().1),
            ));
        }
        let channel = Self::assemble(kraus, deterministic);
        let residual = channel.completeness_residual()?;
        if residual > COMPLETENESS_TOL {
            return Err(Error::CompletenessViolation { residual });
        }
        Ok(channel)
    }

    /// Skips the completeness check; for channels that are complete by
    /// construction. Shapes must agree.
    pub(crate) fn assemble(kraus: Vec<KrausOperator>, deterministic: bool) -> Self {
        let (out_dim, in_dim) = kraus[0].shape();
        Self {
            in_modes: modes_for_dim(in_dim).expect("power-of-two input"),
            out_modes: modes_for_dim(out_dim).expect("power-of-two output"),
            kraus,
            deterministic,
        }
    }

    pub fn identity(modes: usize) -> Self {
        let dim = fock_dim(modes);
        Self::assemble(
            vec![KrausOperator::with_parity(
                &CMatrix::identity(dim, dim),
                Parity::Even,
            )],
            true,
        )
    }

    /// `{P₀, P₁}`: projectors on the even and odd occupation sectors.
    pub fn parity(modes: usize) -> Self {
        let dim = fock_dim(modes);
        let projector = |p: Parity| {
            CMatrix::from_fn(dim, dim, |r, c| {
                if r == c && Parity::of_index(r) == p {
                    real(1.0)
                } else {
                    real(0.0)
                }
            })
        };
        Self::assemble(
            vec![
                KrausOperator::with_parity(&projector(Parity::Even), Parity::Even),
                KrausOperator::with_parity(&projector(Parity::Odd), Parity::Even),
            ],
            true,
        )
    }

    pub fn kraus(&self) -> &[KrausOperator] {
        &self.kraus
    }

    pub fn kraus_matrices(&self) -> Vec<CMatrix> {
        self.kraus.iter().map(KrausOperator::matrix).collect()
    }

    pub fn in_modes(&self) -> usize {
        self.in_modes
    }

    pub fn out_modes(&self) -> usize {
        self.out_modes
    }

    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    /// `Σ K†K`
    pub fn gram(&self) -> CMatrix {
        let dim = fock_dim(self.in_modes);
        let mut s = CMatrix::zeros(dim, dim);
        for k in &self.kraus {
            k.gram_into(&mut s);
        }
        hermitize(&mut s);
        s
    }

    /// `‖Σ K†K − I‖₁` for deterministic channels, otherwise how far the
    /// largest eigenvalue of `Σ K†K` exceeds one.
    pub fn completeness_residual(&self) -> Result<f64> {
        let s = self.gram();
        let dim = s.nrows();
        if self.deterministic {
            numerics::trace_norm(&(s - CMatrix::identity(dim, dim)))
        } else {
            let eig = numerics::eig_hermitian(&s)?;
            Ok((eig.eigenvalues.first().copied().unwrap_or(0.0) - 1.0).max(0.0))
        }
    }

    fn check_input(&self, m: &CMatrix, extra: usize) -> Result<()> {
        let dim = fock_dim(self.in_modes + extra);
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::dims(
                format!("{dim}x{dim}"),
                format!("{}x{}", m.nrows(), m.ncols()),
            ));
        }
        Ok(())
    }

    /// `Σ K X K†` without validating the output.
    pub fn apply_matrix(&self, x: &CMatrix) -> Result<CMatrix> {
        self.apply_extended(x, 0)
    }

    /// `(C ⊠ I)(X)` with `extra` idle modes after the acting ones. Odd Kraus
    /// operators need no string there, so each term is `(K ⊗ I) X (K ⊗ I)†`.
    pub fn apply_extended(&self, x: &CMatrix, extra: usize) -> Result<CMatrix> {
        self.check_input(x, extra)?;
        let dim = fock_dim(self.out_modes + extra);
        let mut out = CMatrix::zeros(dim, dim);
        for k in &self.kraus {
            k.sandwich_into(x, extra, &mut out);
        }
        Ok(out)
    }

    /// Applies the channel and revalidates the output as a state.
    pub fn apply(&self, rho: &FermionicState) -> Result<FermionicState> {
        if rho.modes() != self.in_modes {
            return Err(Error::dims(
                format!("{} modes", self.in_modes),
                format!("{} modes", rho.modes()),
            ));
        }
        let mut out = self.apply_matrix(rho.matrix())?;
        hermitize(&mut out);
        FermionicState::new(out, self.out_modes)
    }

    /// `C ⊠ D` with this channel on the leading modes. An odd `Dⱼ` carries
    /// the parity string of the leading input modes: `J(CᵢDⱼ) = (Cᵢ Z^{⊗L}) ⊗ Dⱼ`.
    pub fn parallel(&self, other: &FermionicChannel) -> FermionicChannel {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for c in &self.kraus {
            let plain = c.matrix();
            let mut strung = plain.clone();
            for col in 0..strung.ncols() {
                if Parity::of_index(col).is_odd() {
                    strung.column_mut(col).neg_mut();
                }
            }
            for d in &other.kraus {
                let left = if d.parity().is_odd() { &strung } else { &plain };
                let m = numerics::kron(left, &d.matrix());
                kraus.push(KrausOperator::with_parity(
                    &m,
                    c.parity().combine(d.parity()),
                ));
            }
        }
        Self::assemble(kraus, self.deterministic && other.deterministic)
    }

    /// Extension by idle modes placed before or after the acting modes.
    pub fn extend(&self, extra: usize, side: Side) -> FermionicChannel {
        if extra == 0 {
            return self.clone();
        }
        let idle = Self::identity(extra);
        match side {
            Side::After => self.parallel(&idle),
            Side::Before => idle.parallel(self),
        }
    }

    /// Sequential composition: this channel first, then `next`.
    pub fn then(&self, next: &FermionicChannel) -> Result<FermionicChannel> {
        if next.in_modes != self.out_modes {
            return Err(Error::dims(
                format!("{} modes", self.out_modes),
                format!("{} modes", next.in_modes),
            ));
        }
        let mut kraus = Vec::new();
        for e in &self.kraus {
            let em = e.matrix();
            for d in &next.kraus {
                let m = d.matrix() * &em;
                if m.iter().any(|z| z.norm_sqr() > 0.0) {
                    kraus.push(KrausOperator::with_parity(
                        &m,
                        e.parity().combine(d.parity()),
                    ));
                }
            }
        }
        if kraus.is_empty() {
            let zero = CMatrix::zeros(fock_dim(next.out_modes), fock_dim(self.in_modes));
            kraus.push(KrausOperator::with_parity(&zero, Parity::Even));
        }
        Ok(Self::assemble(
            kraus,
            self.deterministic && next.deterministic,
        ))
    }
}

/// Anything that can act on the leading modes of an operator while other
/// modes idle after it.
pub trait Transformation {
    fn input_modes(&self) -> usize;
    fn output_modes(&self) -> usize;
    fn apply_extended(&self, x: &CMatrix, extra: usize) -> Result<CMatrix>;
}

impl Transformation for FermionicChannel {
    fn input_modes(&self) -> usize {
        self.in_modes
    }

    fn output_modes(&self) -> usize {
        self.out_modes
    }

    fn apply_extended(&self, x: &CMatrix, extra: usize) -> Result<CMatrix> {
        FermionicChannel::apply_extended(self, x, extra)
    }
}

/// Channels applied one after another without forming Kraus products.
#[derive(Debug, Clone, Copy)]
pub struct Sequence<'a> {
    pub first: &'a FermionicChannel,
    pub second: &'a FermionicChannel,
}

impl Transformation for Sequence<'_> {
    fn input_modes(&self) -> usize {
        self.first.in_modes
    }

    fn output_modes(&self) -> usize {
        self.second.out_modes
    }

    fn apply_extended(&self, x: &CMatrix, extra: usize) -> Result<CMatrix> {
        let mid = self.first.apply_extended(x, extra)?;
        self.second.apply_extended(&mid, extra)
    }
}

fn fidelity_preconditions(rho: &FermionicState, c: &FermionicChannel) -> Result<()> {
    if !c.deterministic {
        return Err(Error::NotDeterministic);
    }
    if c.in_modes != rho.modes() || c.out_modes != rho.modes() {
        return Err(Error::dims(
            format!("{} → {} modes", rho.modes(), rho.modes()),
            format!("{} → {} modes", c.in_modes, c.out_modes),
        ));
    }
    rho.require_normalized()
}

/// `Σᵢ |Tr[J(ρ) Cᵢ]|²`
pub fn entanglement_fidelity(rho: &FermionicState, c: &FermionicChannel) -> Result<f64> {
    fidelity_preconditions(rho, c)?;
    Ok(c.kraus
        .iter()
        .map(|k| k.trace_against(rho.matrix()).norm_sqr())
        .sum())
}

/// `F(Φ, (C ⊠ I)(Φ))²` for a purification `Φ` of `ρ`, system modes first.
pub fn entanglement_fidelity_purified(
    rho: &FermionicState,
    c: &FermionicChannel,
    purification: &Purification,
) -> Result<f64> {
    fidelity_preconditions(rho, c)?;
    let distance = numerics::trace_norm(&(purification.marginal().matrix() - rho.matrix()))?;
    if distance > 1e-8 {
        return Err(Error::MarginalMismatch { distance });
    }
    let phi = purification.state().matrix();
    let mut out = c.apply_extended(phi, purification.purifier_modes())?;
    hermitize(&mut out);
    let f = numerics::uhlmann_fidelity_matrices(phi, &out)?;
    Ok(f * f)
}

/// Purification route through the minimal purification.
pub fn entanglement_fidelity_via_purification(
    rho: &FermionicState,
    c: &FermionicChannel,
) -> Result<f64> {
    entanglement_fidelity_purified(rho, c, &minimal_purification(rho)?)
}

/// `Σᵢⱼ |Tr[J(ρ) Dⱼ Eᵢ]|²` for `D ∘ E`, evaluated pairwise from the stored
/// Kraus blocks instead of materializing every product.
pub fn sequential_entanglement_fidelity(
    rho: &FermionicState,
    first: &FermionicChannel,
    second: &FermionicChannel,
) -> Result<f64> {
    if !first.deterministic || !second.deterministic {
        return Err(Error::NotDeterministic);
    }
    if first.in_modes != rho.modes()
        || second.out_modes != rho.modes()
        || first.out_modes != second.in_modes
    {
        return Err(Error::dims(
            format!("{} → {} modes", rho.modes(), rho.modes()),
            format!(
                "{} → {} → {} modes",
                first.in_modes, first.out_modes, second.out_modes
            ),
        ));
    }
    rho.require_normalized()?;
    let r = rho.matrix();
    let mid = fock_dim(first.out_modes);
    let mut total = 0.0;
    let mut position = vec![usize::MAX; mid];
    for d in &second.kraus {
        if d.is_zero() {
            continue;
        }
        // G = ρ D restricted to D's nonzero rows/cols: G[a, y] = Σ_b ρ[a, b] D[b, y].
        let g = r.select_columns(&d.rows) * &d.block;
        for (k, &y) in d.cols.iter().enumerate() {
            position[y] = k;
        }
        for e in &first.kraus {
            let mut acc = C64::default();
            for (a, &y) in e.rows.iter().enumerate() {
                let k = position[y];
                if k == usize::MAX {
                    continue;
                }
                for (b, &x) in e.cols.iter().enumerate() {
                    acc += e.block[(a, b)] * g[(x, k)];
                }
            }
            total += acc.norm_sqr();
        }
        for &y in &d.cols {
            position[y] = usize::MAX;
        }
    }
    Ok(total)
}

/// An even operator `0 ≤ a ≤ I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    matrix: CMatrix,
    modes: usize,
}

impl Effect {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn modes(&self) -> usize {
        self.modes
    }
}

pub fn validate_effect(a: &CMatrix) -> Result<Effect> {
    if a.nrows() != a.ncols() {
        return Err(Error::dims(
            "square matrix",
            format!("{}x{}", a.nrows(), a.ncols()),
        ));
    }
    let modes =
        modes_for_dim(a.nrows()).ok_or_else(|| Error::dims("power-of-two dimension", a.nrows()))?;
    let residual = states::parity_residual(a, modes)?;
    if residual > KRAUS_PARITY_TOL {
        return Err(Error::ParityViolation { residual });
    }
    let eig = numerics::eig_hermitian(a)?;
    let max = eig.eigenvalues.first().copied().unwrap_or(0.0);
    let min = eig.eigenvalues.last().copied().unwrap_or(0.0);
    if min < -numerics::CLIP_TOL || max > 1.0 + numerics::CLIP_TOL {
        return Err(Error::NotAnEffect {
            min_eigenvalue: min,
            max_eigenvalue: max,
        });
    }
    Ok(Effect {
        matrix: a.clone(),
        modes,
    })
}

/// Refinements `Σᵢ` of a dilation of `ρ`: operators on `system + dilation`
/// modes that sum to a state whose marginal on the system is `ρ`.
#[derive(Debug, Clone)]
pub struct RefinementFamily {
    pub system_modes: usize,
    pub dilation_modes: usize,
    pub members: Vec<CMatrix>,
}

impl RefinementFamily {
    pub fn total_modes(&self) -> usize {
        self.system_modes + self.dilation_modes
    }

    /// `Σᵢ Σᵢ`, the dilation itself.
    pub fn dilation(&self) -> CMatrix {
        let dim = fock_dim(self.total_modes());
        self.members
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, m| acc + m)
    }
}

/// `Σᵢ = Tr_N[(I ⊠ bᵢ) Ψ]` for a pure `Ψ` whose last `povm_modes` modes carry
/// the even effects `bᵢ`.
pub fn refinements_from_purification(
    psi: &CVector,
    kept_modes: usize,
    povm_modes: usize,
    effects: &[CMatrix],
) -> Result<Vec<CMatrix>> {
    let total = kept_modes + povm_modes;
    if psi.len() != fock_dim(total) {
        return Err(Error::dims(fock_dim(total), psi.len()));
    }
    let tail = fock_dim(povm_modes);
    let a = CMatrix::from_fn(fock_dim(kept_modes), tail, |i, j| psi[i * tail + j]);
    let a_dag = a.adjoint();
    effects
        .iter()
        .map(|b| {
            let effect = validate_effect(b)?;
            if effect.modes() != povm_modes {
                return Err(Error::dims(
                    format!("{povm_modes} modes"),
                    format!("{} modes", effect.modes()),
                ));
            }
            let mut m = &a * b.transpose() * &a_dag;
            hermitize(&mut m);
            Ok(m)
        })
        .collect()
}

/// Seeded refinement family on one dilation mode.
pub fn sample_refinements(
    rho: &FermionicState,
    count: usize,
    seed: u64,
) -> Result<RefinementFamily> {
    sample_refinements_with(rho, count, 1, seed)
}

/// Seeded refinement family.
///
/// The minimal purification of `ρ` is padded and rotated by a random even
/// unitary on its purifier, which then splits into `dilation_modes` kept
/// modes and the modes carrying a random even POVM with `count` outcomes.
pub fn sample_refinements_with(
    rho: &FermionicState,
    count: usize,
    dilation_modes: usize,
    seed: u64,
) -> Result<RefinementFamily> {
    if count == 0 {
        return Err(Error::InvalidParameter(
            "refinement count must be positive".into(),
        ));
    }
    let mut rng: SeededRng = random::seeded(seed);
    let (phi, minimal) = minimal_purification_vector(rho)?;
    let purifier = minimal.max(dilation_modes + 1);
    let povm_modes = purifier - dilation_modes;
    let (narrow, pad) = (fock_dim(minimal), fock_dim(purifier - minimal));
    let mut padded = CMatrix::zeros(rho.dim(), fock_dim(purifier));
    for i in 0..rho.dim() {
        for j in 0..narrow {
            padded[(i, j * pad)] = phi[i * narrow + j];
        }
    }

    let u = random::even_unitary(&mut rng, purifier);
    let coeffs = padded * u.transpose();
    let cols = coeffs.ncols();
    let psi = CVector::from_iterator(
        coeffs.len(),
        (0..coeffs.nrows())
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| coeffs[(i, j)]),
    );
    let effects = random::random_even_povm(&mut rng, povm_modes, count)?;
    let members =
        refinements_from_purification(&psi, rho.modes() + dilation_modes, povm_modes, &effects)?;
    Ok(RefinementFamily {
        system_modes: rho.modes(),
        dilation_modes,
        members,
    })
}

#[derive(Debug, Clone)]
pub struct ClosenessReport {
    /// `Σᵢ ‖[(C₁ − C₂) ⊠ I](Σᵢ)‖₁`
    pub value: f64,
    pub terms: Vec<f64>,
    /// Success probability bound `½ + ¼·value` for telling the maps apart.
    pub discrimination_bound: f64,
}

pub fn closeness_upon_input<A, B>(
    c1: &A,
    c2: &B,
    family: &RefinementFamily,
) -> Result<ClosenessReport>
where
    A: Transformation + ?Sized,
    B: Transformation + ?Sized,
{
    if c1.input_modes() != c2.input_modes() || c1.output_modes() != c2.output_modes() {
        return Err(Error::dims(
            format!("{} → {} modes", c1.input_modes(), c1.output_modes()),
            format!("{} → {} modes", c2.input_modes(), c2.output_modes()),
        ));
    }
    if c1.input_modes() != family.system_modes {
        return Err(Error::dims(
            format!("{} system modes", c1.input_modes()),
            format!("{} system modes", family.system_modes),
        ));
    }
    let mut terms = Vec::with_capacity(family.members.len());
    for sigma in &family.members {
        let a = c1.apply_extended(sigma, family.dilation_modes)?;
        let b = c2.apply_extended(sigma, family.dilation_modes)?;
        let mut diff = a - b;
        hermitize(&mut diff);
        terms.push(numerics::trace_norm(&diff)?);
    }
    let value: f64 = terms.iter().sum();
    Ok(ClosenessReport {
        value,
        terms,
        discrimination_bound: 0.5 + 0.25 * value,
    })
}

/// The parity channel against the identity on one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParityCounterexample {
    pub grid_points: usize,
    /// Largest `‖P(ρ) − ρ‖₁` over the grid of one-mode states.
    pub local_residual: f64,
    /// `‖(P ⊠ I)(Ψ) − Ψ‖₁` for the maximally entangled even state.
    pub extended_trace_norm: f64,
    pub extended_trace_distance: f64,
    /// `F(diag(½, ½), P)`
    pub entanglement_fidelity: f64,
}

/// One-mode states are diagonal, so `diag(q, 1 − q)` for `q = k/(grid − 1)`
/// covers the whole state space.
pub fn parity_counterexample(grid_points: usize) -> Result<ParityCounterexample> {
    let parity = FermionicChannel::parity(1);
    let mut local_residual: f64 = 0.0;
    for k in 0..grid_points {
        let q = if grid_points > 1 {
            k as f64 / (grid_points - 1) as f64
        } else {
            0.5
        };
        let rho = FermionicState::diagonal(&[q, 1.0 - q])?;
        let out = parity.apply_matrix(rho.matrix())?;
        local_residual = local_residual.max(numerics::trace_norm(&(out - rho.matrix()))?);
    }
    let half = FermionicState::diagonal(&[0.5, 0.5])?;
    let psi = minimal_purification(&half)?;
    let phi = psi.state().matrix();
    let mut out = parity.apply_extended(phi, psi.purifier_modes())?;
    hermitize(&mut out);
    let extended_trace_norm = numerics::trace_norm(&(out - phi))?;
    Ok(ParityCounterexample {
        grid_points,
        local_residual,
        extended_trace_norm,
        extended_trace_distance: 0.5 * extended_trace_norm,
        entanglement_fidelity: entanglement_fidelity(&half, &parity)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{diag, from_real_rows, kron};

    fn sigma_minus() -> CMatrix {
        from_real_rows(2, 2, &[0.0, 1.0, 0.0, 0.0])
    }

    fn bell_state() -> FermionicState {
        FermionicState::diagonal(&[0.5, 0.0, 0.0, 0.5])
            .map(|d| {
                let mut m = d.into_matrix();
                m[(0, 3)] = real(0.5);
                m[(3, 0)] = real(0.5);
                FermionicState::new(m, 2).unwrap()
            })
            .unwrap()
    }

    #[test]
    fn new_channel_examples() {
        let c = FermionicChannel::new(vec![sigma_minus()], false).unwrap();
        assert_eq!(c.kraus()[0].parity(), Parity::Odd);
        assert!(!c.is_deterministic());

        let p = FermionicChannel::new(vec![diag(&[1.0, 0.0]), diag(&[0.0, 1.0])], true).unwrap();
        assert!(p.kraus().iter().all(|k| k.parity() == Parity::Even));

        let h = from_real_rows(2, 2, &[1.0, 1.0, 1.0, -1.0]) * real(0.5f64.sqrt());
        assert!(matches!(
            FermionicChannel::new(vec![h], true),
            Err(Error::IndefiniteParityKraus { index: 0, .. })
        ));
        assert!(matches!(
            FermionicChannel::new(vec![sigma_minus()], true),
            Err(Error::CompletenessViolation { .. })
        ));
    }

    #[test]
    fn apply_examples() {
        let rho = FermionicState::diagonal(&[0.8, 0.2]).unwrap();
        let id = FermionicChannel::identity(1);
        assert_eq!(id.apply(&rho).unwrap().matrix(), rho.matrix());
        let parity = FermionicChannel::parity(1);
        assert_eq!(parity.apply(&rho).unwrap().matrix(), rho.matrix());

        let ext = parity.extend(1, Side::After);
        let out = ext.apply(&bell_state()).unwrap();
        assert!((out.matrix() - diag(&[0.5, 0.0, 0.0, 0.5])).norm() < 1e-15);
    }

    #[test]
    fn extend_examples() {
        let parity = FermionicChannel::parity(1).extend(1, Side::After);
        let i2 = CMatrix::identity(2, 2);
        let m = parity.kraus_matrices();
        assert_eq!(m[0], kron(&diag(&[1.0, 0.0]), &i2));
        assert_eq!(m[1], kron(&diag(&[0.0, 1.0]), &i2));

        let lower = FermionicChannel::new(vec![sigma_minus()], false).unwrap();
        assert_eq!(
            lower.extend(1, Side::After).kraus_matrices()[0],
            kron(&sigma_minus(), &i2)
        );
        assert_eq!(
            lower.extend(1, Side::Before).kraus_matrices()[0],
            kron(&diag(&[1.0, -1.0]), &sigma_minus())
        );
    }

    #[test]
    fn parallel_examples() {
        let lower = FermionicChannel::new(vec![sigma_minus()], false).unwrap();
        let left_idle = FermionicChannel::identity(1).parallel(&lower);
        assert_eq!(
            left_idle.kraus_matrices()[0],
            kron(&diag(&[1.0, -1.0]), &sigma_minus())
        );
        assert_ne!(
            left_idle.kraus_matrices()[0],
            kron(&CMatrix::identity(2, 2), &sigma_minus())
        );

        let pp = FermionicChannel::parity(1).parallel(&FermionicChannel::parity(1));
        assert_eq!(pp.kraus().len(), 4);
        assert!(pp.kraus().iter().all(|k| k.parity() == Parity::Even));

        let both = lower.parallel(&lower);
        let full = FermionicState::diagonal(&[0.0, 0.0, 0.0, 1.0]).unwrap();
        let out = both.apply(&full).unwrap();
        assert!((out.matrix() - diag(&[1.0, 0.0, 0.0, 0.0])).norm() < 1e-15);
        // Amplitude: φ₁φ₂|11⟩ = −|00⟩.
        assert_eq!(both.kraus_matrices()[0][(0, 3)], real(-1.0));
    }

    #[test]
    fn fidelity_examples() {
        let half = FermionicState::diagonal(&[0.5, 0.5]).unwrap();
        let skew = FermionicState::diagonal(&[0.9, 0.1]).unwrap();
        let id = FermionicChannel::identity(1);
        let parity = FermionicChannel::parity(1);
        assert!((entanglement_fidelity(&skew, &id).unwrap() - 1.0).abs() < 1e-15);
        assert!((entanglement_fidelity(&half, &parity).unwrap() - 0.5).abs() < 1e-15);
        assert!((entanglement_fidelity(&skew, &parity).unwrap() - 0.82).abs() < 1e-15);
        let via = entanglement_fidelity_via_purification(&skew, &parity).unwrap();
        assert!((via - 0.82).abs() < 1e-10, "{via}");
        let lossy = FermionicChannel::new(vec![sigma_minus()], false).unwrap();
        assert!(matches!(
            entanglement_fidelity(&skew, &lossy),
            Err(Error::NotDeterministic)
        ));
    }

    #[test]
    fn effect_examples() {
        assert!(validate_effect(&CMatrix::identity(2, 2)).is_ok());
        assert!(validate_effect(&diag(&[0.0, 1.0])).is_ok());
        let x = from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(
            validate_effect(&x),
            Err(Error::ParityViolation { .. })
        ));
        assert!(matches!(
            validate_effect(&diag(&[1.5, 0.0])),
            Err(Error::NotAnEffect { .. })
        ));
    }

    #[test]
    fn closeness_examples() {
        let half = FermionicState::diagonal(&[0.5, 0.5]).unwrap();
        let phi = minimal_purification(&half).unwrap();
        let family = RefinementFamily {
            system_modes: 1,
            dilation_modes: 1,
            members: vec![phi.state().matrix().clone()],
        };
        let parity = FermionicChannel::parity(1);
        let id = FermionicChannel::identity(1);
        let same = closeness_upon_input(&parity, &parity, &family).unwrap();
        assert!(same.value.abs() < 1e-15);
        let r = closeness_upon_input(&parity, &id, &family).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!((r.discrimination_bound - 0.75).abs() < 1e-12);
    }

    #[test]
    fn binary_povm_refinements() {
        let (q0, q1) = (0.7, 0.3);
        let rho = FermionicState::diagonal(&[q0, q1]).unwrap();
        let phi = minimal_purification(&rho).unwrap();
        let effects = vec![diag(&[1.0, 0.0]), diag(&[0.0, 1.0])];
        let parts = refinements_from_purification(phi.vector(), 1, 1, &effects).unwrap();
        assert!((&parts[0] - diag(&[q0, 0.0])).norm() < 1e-14);
        assert!((&parts[1] - diag(&[0.0, q1])).norm() < 1e-14);
    }

    #[test]
    fn single_refinement_is_the_dilation() {
        let rho = FermionicState::diagonal(&[0.6, 0.4]).unwrap();
        let fam = sample_refinements(&rho, 1, 3).unwrap();
        assert_eq!(fam.members.len(), 1);
        let marginal = states::partial_trace_matrix(&fam.members[0], 2, &[1]).unwrap();
        assert!((marginal - rho.matrix()).norm() < 1e-12);
    }

    #[test]
    fn parity_counterexample_values() {
        let r = parity_counterexample(21).unwrap();
        assert!(r.local_residual < 1e-15);
        assert!((r.extended_trace_norm - 1.0).abs() < 1e-12);
        assert!((r.entanglement_fidelity - 0.5).abs() < 1e-15);
    }
}
