//! Block compression of i.i.d. fermionic sources onto fewer modes.
//!
//! The encoder projects on the typical subspace and embeds it, sector by
//! sector, into the Fock space of `M` modes; atypical inputs are replaced
//! by a fixed typical sequence. The decoder undoes the embedding.

use num_bigint::BigUint;

use crate::channels::{
    self, closeness_upon_input, sample_refinements_with, FermionicChannel, KrausOperator, Sequence,
};
use crate::error::{Error, Result};
use crate::fock::{self, fock_dim, Parity};
use crate::numerics::{CMatrix, CVector};
use crate::states::FermionicState;
use crate::typicality::{
    self, best_rank_mass, typical_counts_exact, typical_mass, SpectralSource, TypeClass,
    TypicalCounts, TypicalSpec, DEFAULT_DENSE_CAP,
};

/// Materialized encoder and decoder.
#[derive(Debug, Clone)]
pub struct DenseScheme {
    pub encoder: FermionicChannel,
    pub decoder: FermionicChannel,
    /// The `N`-copy input state.
    pub input: FermionicState,
    /// `2^M × 2^{NL}` partial isometry onto the target modes.
    pub embedding: CMatrix,
    pub projector: CMatrix,
    /// `N`-copy basis index of the standard sequence.
    pub standard_state_index: usize,
}

#[derive(Debug, Clone)]
pub struct CompressionScheme {
    pub n: usize,
    pub epsilon: f64,
    pub source: SpectralSource,
    pub spec: TypicalSpec,
    pub target_modes: usize,
    /// Target modes per source copy.
    pub rate: f64,
    pub counts: TypicalCounts,
    /// Lexicographically smallest typical sequence, as alphabet indices.
    pub standard_sequence: Vec<usize>,
    pub typical_mass: f64,
    pub dense: Option<DenseScheme>,
}

impl CompressionScheme {
    pub fn standard_parity(&self) -> Parity {
        self.source.sequence_parity(&self.standard_sequence)
    }
}

/// `max(1, ⌈log₂(2c)⌉)` for the larger parity count `c ≥ 1`.
pub fn target_modes_for(largest_sector: &BigUint) -> usize {
    let c = largest_sector - 1u32;
    1 + c.bits() as usize
}

pub fn build_scheme(rho: &FermionicState, n: usize, epsilon: f64) -> Result<CompressionScheme> {
    build_scheme_capped(rho, n, epsilon, DEFAULT_DENSE_CAP)
}

/// Dense channels are materialized when `N·L ≤ dense_cap`.
pub fn build_scheme_capped(
    rho: &FermionicState,
    n: usize,
    epsilon: f64,
    dense_cap: usize,
) -> Result<CompressionScheme> {
    if !rho.is_normalized() {
        return Err(Error::InvalidState(format!(
            "compression needs a normalized state (trace {})",
            rho.trace()
        )));
    }
    let source = SpectralSource::from_state(rho)?;
    let mut scheme = build_from_source(source, n, epsilon)?;
    if n * rho.modes() <= dense_cap {
        scheme.dense = Some(dense_scheme(&scheme, rho, dense_cap)?);
    }
    Ok(scheme)
}

/// Spectral-only scheme.
pub fn build_from_source(
    source: SpectralSource,
    n: usize,
    epsilon: f64,
) -> Result<CompressionScheme> {
    let spec = TypicalSpec::new(&source, n, epsilon)?;
    let classes: Vec<TypeClass> = typicality::type_classes(&source, n)?
        .into_iter()
        .filter(|t| typicality::is_typical(t, &spec))
        .collect();
    // Counts in lexicographic order: the largest count vector gives the
    // smallest sequence.
    let standard = classes
        .iter()
        .max_by(|a, b| a.counts.cmp(&b.counts))
        .ok_or_else(|| {
            Error::InvalidParameter(format!(
                "typical set is empty for N = {n}, epsilon = {epsilon}"
            ))
        })?
        .smallest_sequence(&source);
    let counts = typical_counts_exact(&source, &spec)?;
    let target_modes = target_modes_for(counts.largest_sector());
    let mass = typical_mass(&source, &spec)?;
    Ok(CompressionScheme {
        n,
        epsilon,
        spec,
        target_modes,
        rate: target_modes as f64 / n as f64,
        counts,
        standard_sequence: standard,
        typical_mass: mass,
        dense: None,
        source,
    })
}

fn basis_index(sequence: &[usize], one_copy_dim: usize) -> usize {
    sequence.iter().fold(0, |acc, &s| acc * one_copy_dim + s)
}

fn column(basis: &CMatrix, k: usize) -> CVector {
    basis.column(k).into_owned()
}

fn dense_scheme(
    scheme: &CompressionScheme,
    rho: &FermionicState,
    cap: usize,
) -> Result<DenseScheme> {
    let source = &scheme.source;
    let n = scheme.n;
    let d = rho.dim();
    let sequences = typicality::typical_sequences(source, &scheme.spec, cap)?;
    let basis = typicality::n_copy_basis(source, n, cap)?;
    let big = basis.nrows();
    let m = scheme.target_modes;
    let target_dim = fock_dim(m);

    let mut embedding = CMatrix::zeros(target_dim, big);
    let mut image = vec![false; target_dim];
    for parity in [Parity::Even, Parity::Odd] {
        let list = match parity {
            Parity::Even => &sequences.even,
            Parity::Odd => &sequences.odd,
        };
        let targets = fock::sector_indices(m, parity);
        for (&x, &f) in list.iter().zip(&targets) {
            for r in 0..big {
                embedding[(f, r)] = basis[(r, x)].conj();
            }
            image[f] = true;
        }
    }
    let typical: Vec<usize> = sequences.all();
    let w = basis.select_columns(&typical);
    let projector = &w * w.adjoint();

    let standard_index = basis_index(&scheme.standard_sequence, d);
    let standard = column(&basis, standard_index);
    let standard_parity = scheme.standard_parity();
    let embedded_standard = &embedding * &standard;

    let mut is_typical = vec![false; big];
    for &x in &typical {
        is_typical[x] = true;
    }

    let mut encoder = vec![KrausOperator::with_parity(
        &(&embedding * &projector),
        Parity::Even,
    )];
    for k in (0..big).filter(|&k| !is_typical[k]) {
        let e = column(&basis, k);
        let kraus = &embedded_standard * e.adjoint();
        let parity = standard_parity.combine(Parity::of_index(dominant(&e)));
        encoder.push(KrausOperator::with_parity(&kraus, parity));
    }

    let mut decoder = vec![KrausOperator::with_parity(
        &embedding.adjoint(),
        Parity::Even,
    )];
    for j in (0..target_dim).filter(|&j| !image[j]) {
        let mut kraus = CMatrix::zeros(big, target_dim);
        kraus.set_column(j, &standard);
        decoder.push(KrausOperator::with_parity(
            &kraus,
            standard_parity.combine(Parity::of_index(j)),
        ));
    }

    let input = rho.tensor_power(n);
    Ok(DenseScheme {
        encoder: FermionicChannel::assemble(encoder, true),
        decoder: FermionicChannel::assemble(decoder, true),
        input,
        embedding,
        projector,
        standard_state_index: standard_index,
    })
}

/// Index of a nonzero entry; eigenvectors of definite parity are supported
/// on one sector.
fn dominant(v: &CVector) -> usize {
    crate::numerics::dominant_index(v.as_slice())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeFidelity {
    /// `typical_mass²`
    pub spectral: f64,
    /// Entanglement fidelity of the materialized channels.
    pub dense: Option<f64>,
}

impl SchemeFidelity {
    /// Largest dense/spectral disagreement, zero without a dense value.
    pub fn discrepancy(&self) -> f64 {
        self.dense.map_or(0.0, |d| (d - self.spectral).abs())
    }
}

pub fn scheme_fidelity(s: &CompressionScheme) -> Result<SchemeFidelity> {
    let dense = match &s.dense {
        Some(d) => Some(channels::sequential_entanglement_fidelity(
            &d.input, &d.encoder, &d.decoder,
        )?),
        None => None,
    };
    Ok(SchemeFidelity {
        spectral: s.typical_mass * s.typical_mass,
        dense,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConverseReport {
    pub n: usize,
    pub rate: f64,
    /// Most probability any projector of rank `2^{NR}` captures.
    pub best_mass: f64,
    /// `best_mass²`
    pub fidelity: f64,
}

/// Rank-limited analogue of the scheme below the entropy.
pub fn converse_scheme_fidelity(
    source: &SpectralSource,
    n: usize,
    rate: f64,
) -> Result<ConverseReport> {
    let entropy = source.entropy();
    if rate >= entropy {
        return Err(Error::RateNotBelowEntropy { rate, entropy });
    }
    if !(rate > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rate must be positive, got {rate}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter(
            "number of copies must be positive".into(),
        ));
    }
    let best_mass = best_rank_mass(source, n, n as f64 * rate)?;
    Ok(ConverseReport {
        n,
        rate,
        best_mass,
        fidelity: best_mass * best_mass,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityReport {
    /// `1 − F`
    pub delta: f64,
    /// `2√δ`
    pub bound: f64,
    /// Closeness upon input of decode∘encode versus the identity, per family.
    pub values: Vec<f64>,
}

impl ReliabilityReport {
    pub fn holds(&self, slack: f64) -> bool {
        self.values.iter().all(|&v| v <= self.bound + slack)
    }
}

/// Refinement members per sampled family.
pub const FAMILY_SIZE: usize = 3;

pub fn reliability_report(
    s: &CompressionScheme,
    family_count: usize,
    seed: u64,
) -> Result<ReliabilityReport> {
    let dense = s.dense.as_ref().ok_or_else(|| {
        Error::DenseUnavailable(format!("N·L exceeds the dense cap for N = {}", s.n))
    })?;
    let fidelity = scheme_fidelity(s)?.dense.expect("dense scheme present");
    let delta = (1.0 - fidelity).max(0.0);
    let composed = Sequence {
        first: &dense.encoder,
        second: &dense.decoder,
    };
    let identity = FermionicChannel::identity(dense.input.modes());
    let values = (0..family_count)
        .map(|i| {
            let family =
                sample_refinements_with(&dense.input, FAMILY_SIZE, 1, seed.wrapping_add(i as u64))?;
            Ok(closeness_upon_input(&composed, &identity, &family)?.value)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReliabilityReport {
        delta,
        bound: 2.0 * delta.sqrt(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::diag;

    #[test]
    fn uniform_scheme() {
        let rho = FermionicState::diagonal(&[0.5, 0.5]).unwrap();
        let s = build_scheme(&rho, 2, 0.1).unwrap();
        assert_eq!(s.counts.even, BigUint::from(2u32));
        assert_eq!(s.counts.odd, BigUint::from(2u32));
        assert_eq!(s.target_modes, 2);
        assert_eq!(s.rate, 1.0);
        let f = scheme_fidelity(&s).unwrap();
        assert!((f.spectral - 1.0).abs() < 1e-12);
        assert!((f.dense.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dense_channels_are_complete_isometries() {
        let rho = FermionicState::diagonal(&[0.7, 0.3]).unwrap();
        for n in [3, 5, 8] {
            let s = build_scheme_capped(&rho, n, 0.3, 8).unwrap();
            let d = s.dense.as_ref().unwrap();
            assert!(d.encoder.completeness_residual().unwrap() <= 1e-9, "N={n}");
            assert!(d.decoder.completeness_residual().unwrap() <= 1e-9, "N={n}");
            let vv = d.embedding.adjoint() * &d.embedding;
            assert!((vv - &d.projector).norm() <= 1e-12);
        }
    }

    #[test]
    fn pure_scheme() {
        let rho = FermionicState::diagonal(&[1.0, 0.0]).unwrap();
        for n in 1..=4 {
            let s = build_scheme(&rho, n, 0.1).unwrap();
            assert_eq!(s.counts.total(), BigUint::from(1u32));
            assert_eq!(s.target_modes, 1);
            assert!((s.rate - 1.0 / n as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn small_skewed_scheme() {
        let rho = FermionicState::diagonal(&[0.9, 0.1]).unwrap();
        let s = build_scheme(&rho, 8, 0.2).unwrap();
        assert_eq!(s.counts.total(), BigUint::from(8u32));
        assert_eq!(s.target_modes, 4);
        assert_eq!(s.standard_sequence, vec![0, 0, 0, 0, 0, 0, 0, 1]);
        let dense = s.dense.as_ref().unwrap();
        assert_eq!(dense.standard_state_index, 1);
        let vdv = dense.embedding.adjoint() * &dense.embedding;
        assert!((vdv - &dense.projector).norm() < 1e-12);
        let f = scheme_fidelity(&s).unwrap();
        assert!(f.discrepancy() < 1e-12, "{f:?}");
        let composed = dense.encoder.then(&dense.decoder).unwrap();
        let direct = channels::entanglement_fidelity(&dense.input, &composed).unwrap();
        assert!((direct - f.spectral).abs() < 1e-12);
    }

    #[test]
    fn channels_validate() {
        let rho = FermionicState::diagonal(&[0.7, 0.3]).unwrap();
        let s = build_scheme(&rho, 4, 0.3).unwrap();
        let dense = s.dense.unwrap();
        for c in [&dense.encoder, &dense.decoder] {
            FermionicChannel::new(c.kraus_matrices(), true).unwrap();
        }
    }

    #[test]
    fn empty_typical_set_is_reported() {
        let rho = FermionicState::diagonal(&[0.9, 0.1]).unwrap();
        assert!(matches!(
            build_scheme(&rho, 1, 0.05),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn unnormalized_input_is_rejected() {
        let rho = FermionicState::new(diag(&[0.5, 0.25]), 1).unwrap();
        assert!(matches!(
            build_scheme(&rho, 2, 0.1),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn converse_examples() {
        let skew =
            SpectralSource::from_probabilities(&[0.9, 0.1], &[Parity::Even, Parity::Odd]).unwrap();
        let r = converse_scheme_fidelity(&skew, 2, 0.3).unwrap();
        let expected = 0.81 + (0.6f64.exp2() - 1.0) * 0.09;
        assert!((r.best_mass - expected).abs() < 1e-12);
        assert!((r.fidelity - expected * expected).abs() < 1e-12);
        assert!(matches!(
            converse_scheme_fidelity(&skew, 2, 0.5),
            Err(Error::RateNotBelowEntropy { .. })
        ));

        let half =
            SpectralSource::from_probabilities(&[0.5, 0.5], &[Parity::Even, Parity::Odd]).unwrap();
        let r = converse_scheme_fidelity(&half, 10, 0.5).unwrap();
        assert!((r.best_mass - 2f64.powi(-5)).abs() < 1e-15);
        assert!((r.fidelity - 2f64.powi(-10)).abs() < 1e-15);
    }

    #[test]
    fn reliability_examples() {
        let half = FermionicState::diagonal(&[0.5, 0.5]).unwrap();
        let r = reliability_report(&build_scheme(&half, 2, 0.1).unwrap(), 2, 1).unwrap();
        assert!(r.delta.abs() < 1e-12);
        assert!(r.values.iter().all(|&v| v < 1e-9));

        let pure = FermionicState::diagonal(&[1.0, 0.0]).unwrap();
        let r = reliability_report(&build_scheme(&pure, 3, 0.1).unwrap(), 1, 1).unwrap();
        assert!(r.delta.abs() < 1e-12);

        let skew = FermionicState::diagonal(&[0.9, 0.1]).unwrap();
        let s = build_scheme_capped(&skew, 12, 0.2, 10).unwrap();
        assert!(matches!(
            reliability_report(&s, 1, 1),
            Err(Error::DenseUnavailable(_))
        ));
    }
}
