//! Typical subspaces of i.i.d. fermionic sources.
//!
//! Probabilities and typicality of an `N`-copy eigen-sequence depend only on
//! how often each symbol occurs, so every large-`N` quantity is a sum over
//! type classes evaluated in log₂ space. Symbols with equal probability and
//! equal parity are merged into one group; a class records counts per group.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::fock::{fock_dim, Parity};
use crate::numerics::{self, CMatrix, CLIP_TOL};
use crate::states::{self, FermionicState};

/// Probabilities must sum to one within this slack.
pub const SUM_TOL: f64 = 1e-9;
/// Relative gap below which two probabilities are merged into one group.
pub const GROUP_TOL: f64 = 1e-12;
/// Slack on the typicality window, absorbing rounding in `−log₂P/N`.
pub const WINDOW_SLACK: f64 = 1e-12;
/// Largest number of type classes enumerated.
pub const MAX_TYPE_CLASSES: u128 = 5_000_000;
/// Default dense cap on `N·L`.
pub const DEFAULT_DENSE_CAP: usize = 10;

/// Symbols sharing probability and parity.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGroup {
    pub probability: f64,
    pub parity: Parity,
    /// First alphabet index of the group; groups are contiguous.
    pub first: usize,
    pub size: usize,
}

/// Nonzero eigenvalues of a state with their parities, sorted descending.
#[derive(Debug, Clone)]
pub struct SpectralSource {
    probabilities: Vec<f64>,
    parities: Vec<Parity>,
    groups: Vec<SymbolGroup>,
    /// Full eigenbasis, alphabet first, then the kernel.
    basis: Option<CMatrix>,
    modes: Option<usize>,
}

impl SpectralSource {
    /// Abstract source without eigenvectors.
    pub fn from_probabilities(probabilities: &[f64], parities: &[Parity]) -> Result<Self> {
        if probabilities.len() != parities.len() {
            return Err(Error::dims(
                format!("{} parities", probabilities.len()),
                parities.len(),
            ));
        }
        let (_, probabilities, parities) = sort_alphabet(probabilities, parities)?;
        Ok(Self::assemble(probabilities, parities, None, None))
    }

    pub fn from_state(rho: &FermionicState) -> Result<Self> {
        rho.require_normalized()?;
        let spectrum = rho.spectrum()?;
        let values = &spectrum.eigen.eigenvalues;
        let (order, probabilities, parities) = sort_alphabet(values, &spectrum.parities)?;
        let dim = rho.dim();
        let mut columns: Vec<usize> = order.clone();
        columns.extend((0..dim).filter(|k| !order.contains(k)));
        let basis = spectrum.eigen.eigenvectors.select_columns(&columns);
        Ok(Self::assemble(
            probabilities,
            parities,
            Some(basis),
            Some(rho.modes()),
        ))
    }

    fn assemble(
        probabilities: Vec<f64>,
        parities: Vec<Parity>,
        basis: Option<CMatrix>,
        modes: Option<usize>,
    ) -> Self {
        let mut groups: Vec<SymbolGroup> = Vec::new();
        for (k, (&p, &parity)) in probabilities.iter().zip(&parities).enumerate() {
            match groups.last_mut() {
                Some(g)
                    if g.parity == parity
                        && (g.probability - p).abs() <= GROUP_TOL * g.probability =>
                {
                    g.size += 1;
                }
                _ => groups.push(SymbolGroup {
                    probability: p,
                    parity,
                    first: k,
                    size: 1,
                }),
            }
        }
        for g in &mut groups {
            let sum: f64 = probabilities[g.first..g.first + g.size].iter().sum();
            g.probability = sum / g.size as f64;
        }
        Self {
            probabilities,
            parities,
            groups,
            basis,
            modes,
        }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn parities(&self) -> &[Parity] {
        &self.parities
    }

    pub fn groups(&self) -> &[SymbolGroup] {
        &self.groups
    }

    pub fn alphabet_size(&self) -> usize {
        self.probabilities.len()
    }

    /// Eigenbasis of the one-copy state, alphabet columns first.
    pub fn basis(&self) -> Option<&CMatrix> {
        self.basis.as_ref()
    }

    pub fn modes(&self) -> Option<usize> {
        self.modes
    }

    pub fn entropy(&self) -> f64 {
        states::shannon_entropy(&self.probabilities)
    }

    /// Parity of an alphabet sequence.
    pub fn sequence_parity(&self, sequence: &[usize]) -> Parity {
        sequence
            .iter()
            .fold(Parity::Even, |acc, &s| acc.combine(self.parities[s]))
    }

    pub fn sequence_log2_probability(&self, sequence: &[usize]) -> f64 {
        sequence.iter().map(|&s| self.probabilities[s].log2()).sum()
    }
}

/// Drops zero eigenvalues and sorts the rest descending, even before odd on
/// ties. Returns the kept indices in their new order.
fn sort_alphabet(
    values: &[f64],
    parities: &[Parity],
) -> Result<(Vec<usize>, Vec<f64>, Vec<Parity>)> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if let Some(&v) = values.iter().find(|&&v| v < -CLIP_TOL) {
        return Err(Error::InvalidParameter(format!("negative probability {v}")));
    }
    let total: f64 = values.iter().sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::NotNormalized { trace: total });
    }
    let mut order: Vec<usize> = (0..values.len())
        .filter(|&k| values[k] > CLIP_TOL)
        .collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len()
            && values[order[end - 1]] - values[order[end]] <= GROUP_TOL * values[order[start]]
        {
            end += 1;
        }
        order[start..end].sort_by_key(|&k| parities[k].is_odd());
        start = end;
    }
    let probabilities = order.iter().map(|&k| values[k]).collect();
    let parities = order.iter().map(|&k| parities[k]).collect();
    Ok((order, probabilities, parities))
}

pub fn spectral_source(rho: &FermionicState) -> Result<SpectralSource> {
    SpectralSource::from_state(rho)
}

/// The set of `N`-sequences sharing group counts.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeClass {
    pub counts: Vec<usize>,
    /// `Σ kᵢ log₂ pᵢ`
    pub log2_prob_per_seq: f64,
    /// log₂ of the number of sequences in the class.
    pub log2_multiplicity: f64,
    pub parity: Parity,
}

impl TypeClass {
    pub fn new(source: &SpectralSource, counts: Vec<usize>) -> Result<Self> {
        let groups = source.groups();
        if counts.len() != groups.len() {
            return Err(Error::dims(
                format!("{} group counts", groups.len()),
                counts.len(),
            ));
        }
        let n: usize = counts.iter().sum();
        let ln2 = std::f64::consts::LN_2;
        let mut ln_mult = ln_gamma(n as f64 + 1.0);
        let mut log2_prob = 0.0;
        let mut parity = Parity::Even;
        for (g, &k) in groups.iter().zip(&counts) {
            ln_mult -= ln_gamma(k as f64 + 1.0);
            if k > 0 {
                ln_mult += k as f64 * (g.size as f64).ln();
                log2_prob += k as f64 * g.probability.log2();
            }
            if g.parity.is_odd() && k % 2 == 1 {
                parity = parity.flip();
            }
        }
        Ok(Self {
            counts,
            log2_prob_per_seq: log2_prob,
            log2_multiplicity: ln_mult / ln2,
            parity,
        })
    }

    pub fn copies(&self) -> usize {
        self.counts.iter().sum()
    }

    /// log₂ of the total probability of the class.
    pub fn log2_mass(&self) -> f64 {
        self.log2_multiplicity + self.log2_prob_per_seq
    }

    /// Exact number of sequences in the class.
    pub fn multiplicity_exact(&self, source: &SpectralSource) -> BigUint {
        let mut remaining = self.copies();
        let mut total = BigUint::one();
        for (g, &k) in source.groups().iter().zip(&self.counts) {
            total *= binomial(remaining, k);
            total *= BigUint::from(g.size).pow(k as u32);
            remaining -= k;
        }
        total
    }

    /// Lexicographically smallest sequence of the class.
    pub fn smallest_sequence(&self, source: &SpectralSource) -> Vec<usize> {
        source
            .groups()
            .iter()
            .zip(&self.counts)
            .flat_map(|(g, &k)| std::iter::repeat_n(g.first, k))
            .collect()
    }
}

/// `C(n, k)` exactly.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `C(n + g − 1, g − 1)`, saturating.
pub fn class_count(n: usize, groups: usize) -> u128 {
    if groups == 0 {
        return if n == 0 { 1 } else { 0 };
    }
    let r = (groups - 1) as u128;
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = match acc.checked_mul(n as u128 + r - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// All type classes of `n` copies, counts in lexicographic order.
pub fn type_classes(source: &SpectralSource, n: usize) -> Result<Vec<TypeClass>> {
    let g = source.groups().len();
    let classes = class_count(n, g);
    if classes > MAX_TYPE_CLASSES {
        return Err(Error::ClassLimitExceeded { classes });
    }
    let mut all: Vec<Vec<usize>> = Vec::with_capacity(classes as usize);
    let mut current = vec![0; g];
    compositions(n, 0, &mut current, &mut all);
    all.into_par_iter()
        .map(|counts| TypeClass::new(source, counts))
        .collect()
}

fn compositions(
    remaining: usize,
    slot: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if slot + 1 == current.len() {
        current[slot] = remaining;
        out.push(current.clone());
        return;
    }
    for k in 0..=remaining {
        current[slot] = k;
        compositions(remaining - k, slot + 1, current, out);
    }
}

/// Copies, window and the entropy it is centred on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypicalSpec {
    pub n: usize,
    pub epsilon: f64,
    pub entropy: f64,
}

impl TypicalSpec {
    pub fn new(source: &SpectralSource, n: usize, epsilon: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "number of copies must be positive".into(),
            ));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(Self {
            n,
            epsilon,
            entropy: source.entropy(),
        })
    }

    /// Typicality of a single sequence given its log₂ probability.
    pub fn admits(&self, log2_probability: f64) -> bool {
        if !log2_probability.is_finite() {
            return false;
        }
        (-log2_probability / self.n as f64 - self.entropy).abs() <= self.epsilon + WINDOW_SLACK
    }
}

pub fn is_typical(t: &TypeClass, spec: &TypicalSpec) -> bool {
    t.copies() == spec.n && spec.admits(t.log2_prob_per_seq)
}

/// `log₂ Σ 2^{xᵢ}`, summed in the given order.
pub fn log2_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let sum: f64 = values.iter().map(|&v| (v - max).exp2()).sum();
    max + sum.log2()
}

fn typical_classes(source: &SpectralSource, spec: &TypicalSpec) -> Result<Vec<TypeClass>> {
    Ok(type_classes(source, spec.n)?
        .into_iter()
        .filter(|t| is_typical(t, spec))
        .collect())
}

/// Probability that an `N`-sequence is typical, `Tr[P J(ρ)^{⊗N}]`.
pub fn typical_mass(source: &SpectralSource, spec: &TypicalSpec) -> Result<f64> {
    let logs: Vec<f64> = typical_classes(source, spec)?
        .iter()
        .map(TypeClass::log2_mass)
        .collect();
    Ok(log2_sum_exp(&logs).exp2().min(1.0))
}

/// Exact size of the typical set, split by parity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypicalCounts {
    pub even: BigUint,
    pub odd: BigUint,
}

impl TypicalCounts {
    pub fn total(&self) -> BigUint {
        &self.even + &self.odd
    }

    pub fn largest_sector(&self) -> &BigUint {
        if self.even >= self.odd {
            &self.even
        } else {
            &self.odd
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypicalDim {
    pub log2: f64,
    pub log2_even: f64,
    pub log2_odd: f64,
    /// Present when `N·m` is at most [`EXACT_COUNT_LIMIT`].
    pub exact: Option<TypicalCounts>,
}

/// `N·m` up to which [`typical_dim`] also returns exact counts.
pub const EXACT_COUNT_LIMIT: usize = 4096;

pub fn typical_counts_exact(source: &SpectralSource, spec: &TypicalSpec) -> Result<TypicalCounts> {
    let classes = typical_classes(source, spec)?;
    let parts: Vec<(Parity, BigUint)> = classes
        .par_iter()
        .map(|t| (t.parity, t.multiplicity_exact(source)))
        .collect();
    let mut counts = TypicalCounts {
        even: BigUint::zero(),
        odd: BigUint::zero(),
    };
    for (parity, m) in parts {
        match parity {
            Parity::Even => counts.even += m,
            Parity::Odd => counts.odd += m,
        }
    }
    Ok(counts)
}

pub fn typical_dim(source: &SpectralSource, spec: &TypicalSpec) -> Result<TypicalDim> {
    let classes = typical_classes(source, spec)?;
    let logs = |filter: Option<Parity>| -> Vec<f64> {
        classes
            .iter()
            .filter(|t| filter.is_none_or(|p| t.parity == p))
            .map(|t| t.log2_multiplicity)
            .collect()
    };
    let exact = if spec.n * source.alphabet_size() <= EXACT_COUNT_LIMIT {
        Some(typical_counts_exact(source, spec)?)
    } else {
        None
    };
    Ok(TypicalDim {
        log2: log2_sum_exp(&logs(None)),
        log2_even: log2_sum_exp(&logs(Some(Parity::Even))),
        log2_odd: log2_sum_exp(&logs(Some(Parity::Odd))),
        exact,
    })
}

/// `(1−δ)·2^{N(S−ε)} ≤ |T| ≤ 2^{N(S+ε)}` in log₂ form, with `δ = 1 − mass`.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionBounds {
    pub log2_dim: f64,
    pub log2_lower: f64,
    pub log2_upper: f64,
    pub mass: f64,
}

impl DimensionBounds {
    pub fn holds(&self, slack: f64) -> bool {
        self.log2_lower <= self.log2_dim + slack && self.log2_dim <= self.log2_upper + slack
    }
}

pub fn dimension_bounds(source: &SpectralSource, spec: &TypicalSpec) -> Result<DimensionBounds> {
    let classes = typical_classes(source, spec)?;
    let dim: Vec<f64> = classes.iter().map(|t| t.log2_multiplicity).collect();
    let mass: Vec<f64> = classes.iter().map(TypeClass::log2_mass).collect();
    let mass = log2_sum_exp(&mass).exp2().min(1.0);
    let n = spec.n as f64;
    Ok(DimensionBounds {
        log2_dim: log2_sum_exp(&dim),
        log2_lower: mass.log2() + n * (spec.entropy - spec.epsilon),
        log2_upper: n * (spec.entropy + spec.epsilon),
        mass,
    })
}

/// Largest probability a projector of rank `2^{log2_rank}` can capture:
/// the sum of that many largest eigenvalues of `J(ρ)^{⊗N}`, the last class
/// taken fractionally.
pub fn best_rank_mass(source: &SpectralSource, n: usize, log2_rank: f64) -> Result<f64> {
    if !(log2_rank >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "log2 rank must be nonnegative, got {log2_rank}"
        )));
    }
    let mut classes = type_classes(source, n)?;
    classes.sort_by(|a, b| b.log2_prob_per_seq.total_cmp(&a.log2_prob_per_seq));
    let mut used = f64::NEG_INFINITY;
    let mut taken: Vec<f64> = Vec::new();
    for t in &classes {
        let next = log2_sum_exp(&[used, t.log2_multiplicity]);
        if next <= log2_rank {
            taken.push(t.log2_mass());
            used = next;
            if next == log2_rank {
                break;
            }
        } else {
            // 2^r − 2^used sequences remain in the budget.
            let rest = log2_rank + (-(used - log2_rank).exp2()).ln_1p() / std::f64::consts::LN_2;
            taken.push(rest + t.log2_prob_per_seq);
            break;
        }
    }
    Ok(log2_sum_exp(&taken).exp2().min(1.0))
}

/// Typical eigen-sequences of a small source, as `N`-copy basis indices in
/// ascending (lexicographic) order.
#[derive(Debug, Clone, PartialEq)]
pub struct TypicalSequences {
    pub even: Vec<usize>,
    pub odd: Vec<usize>,
}

impl TypicalSequences {
    pub fn len(&self) -> usize {
        self.even.len() + self.odd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn all(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.even.iter().chain(&self.odd).copied().collect();
        all.sort_unstable();
        all
    }
}

/// Digits of an `N`-copy basis index in base `2^L`, most significant first.
pub fn sequence_digits(index: usize, n: usize, one_copy_dim: usize) -> Vec<usize> {
    let mut digits = vec![0; n];
    let mut rest = index;
    for slot in (0..n).rev() {
        digits[slot] = rest % one_copy_dim;
        rest /= one_copy_dim;
    }
    digits
}

fn dense_dims(source: &SpectralSource, n: usize, cap: usize) -> Result<(usize, usize)> {
    let modes = source
        .modes()
        .ok_or_else(|| Error::DenseUnavailable("source has no eigenbasis".into()))?;
    if n * modes > cap {
        return Err(Error::DenseCapExceeded {
            dim: fock_dim(n * modes),
            cap: fock_dim(cap),
        });
    }
    numerics::check_dense_dim(fock_dim(n * modes))?;
    Ok((modes, fock_dim(modes)))
}

pub fn typical_sequences(
    source: &SpectralSource,
    spec: &TypicalSpec,
    cap: usize,
) -> Result<TypicalSequences> {
    let (modes, d) = dense_dims(source, spec.n, cap)?;
    let m = source.alphabet_size();
    let mut even = Vec::new();
    let mut odd = Vec::new();
    for index in 0..fock_dim(spec.n * modes) {
        let digits = sequence_digits(index, spec.n, d);
        if digits.iter().any(|&s| s >= m) {
            continue;
        }
        if spec.admits(source.sequence_log2_probability(&digits)) {
            match source.sequence_parity(&digits) {
                Parity::Even => even.push(index),
                Parity::Odd => odd.push(index),
            }
        }
    }
    Ok(TypicalSequences { even, odd })
}

/// `N`-fold Kronecker power of the one-copy eigenbasis.
pub fn n_copy_basis(source: &SpectralSource, n: usize, cap: usize) -> Result<CMatrix> {
    dense_dims(source, n, cap)?;
    let basis = source.basis().expect("checked by dense_dims");
    let mut acc = CMatrix::identity(1, 1);
    for _ in 0..n {
        acc = numerics::kron(&acc, basis);
    }
    Ok(acc)
}

#[derive(Debug, Clone)]
pub struct DenseProjector {
    pub matrix: CMatrix,
    pub rank: usize,
    /// Off-sector trace norm; zero for a legitimate even projector.
    pub parity_residual: f64,
}

/// `P = Σ_{x ∈ T} |x⟩⟨x|` in the `N`-copy eigenbasis.
pub fn typical_projector_dense(
    source: &SpectralSource,
    spec: &TypicalSpec,
    cap: usize,
) -> Result<DenseProjector> {
    let sequences = typical_sequences(source, spec, cap)?;
    let basis = n_copy_basis(source, spec.n, cap)?;
    let columns = sequences.all();
    let w = basis.select_columns(&columns);
    let mut matrix = &w * w.adjoint();
    numerics::hermitize(&mut matrix);
    let modes = spec.n * source.modes().expect("checked by dense_dims");
    let parity_residual = states::parity_residual(&matrix, modes)?;
    Ok(DenseProjector {
        matrix,
        rank: columns.len(),
        parity_residual,
    })
}

/// `J(ρ)^{⊗N}` reconstructed from the source, for cross-checks.
pub fn n_copy_state_matrix(source: &SpectralSource, n: usize, cap: usize) -> Result<CMatrix> {
    let basis = n_copy_basis(source, n, cap)?;
    let d = source.basis().expect("checked").nrows();
    let m = source.alphabet_size();
    let weights: Vec<f64> = (0..basis.ncols())
        .map(|index| {
            let digits = sequence_digits(index, n, d);
            if digits.iter().any(|&s| s >= m) {
                0.0
            } else {
                source.sequence_log2_probability(&digits).exp2()
            }
        })
        .collect();
    let mut scaled = basis.clone();
    for (k, &w) in weights.iter().enumerate() {
        scaled.column_mut(k).scale_mut(w);
    }
    let mut out = scaled * basis.adjoint();
    numerics::hermitize(&mut out);
    Ok(out)
}
