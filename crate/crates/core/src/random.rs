//! Seeded generators for parity-respecting random objects.
//!
//! Used by the refinement sampler and by the property suites; every
//! generator takes the RNG explicitly so results are reproducible from a
//! seed.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channels::FermionicChannel;
use crate::error::Result;
use crate::fock::{self, fock_dim, Parity};
use crate::numerics::{c64, hermitize, matrix_sqrt_psd, real, trace, CMatrix, CVector, C64};
use crate::states::FermionicState;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    rand::SeedableRng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Gaussian matrix `2^out × 2^in` supported on the entries of the given parity.
pub fn gaussian_graded<R: Rng + ?Sized>(
    rng: &mut R,
    out_modes: usize,
    in_modes: usize,
    parity: Parity,
) -> CMatrix {
    let mut m = CMatrix::zeros(fock_dim(out_modes), fock_dim(in_modes));
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if Parity::of_index(r).combine(Parity::of_index(c)) == parity {
                m[(r, c)] = gaussian(rng);
            }
        }
    }
    m
}

/// Haar-distributed unitary via QR with the phase correction.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let qr = gaussian_matrix(rng, dim, dim).qr();
    let (mut q, r) = qr.unpack();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            real(1.0)
        };
        for i in 0..dim {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// Random unitary on `modes` modes that preserves both parity sectors.
pub fn even_unitary<R: Rng + ?Sized>(rng: &mut R, modes: usize) -> CMatrix {
    let dim = fock_dim(modes);
    let mut u = CMatrix::zeros(dim, dim);
    for parity in [Parity::Even, Parity::Odd] {
        let idx = fock::sector_indices(modes, parity);
        let block = haar_unitary(rng, idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                u[(i, j)] = block[(a, b)];
            }
        }
    }
    u
}

/// Random normalized state of the given rank (clamped to the dimension).
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, modes: usize, rank: usize) -> FermionicState {
    let dim = fock_dim(modes);
    let rank = rank.clamp(1, dim);
    let mut rho = CMatrix::zeros(dim, dim);
    for _ in 0..rank {
        let parity = if rng.random_bool(0.5) {
            Parity::Even
        } else {
            Parity::Odd
        };
        let idx = fock::sector_indices(modes, parity);
        let mut v = CVector::zeros(dim);
        for &i in &idx {
            v[i] = gaussian(rng);
        }
        rho += &v * v.adjoint();
    }
    let t = trace(&rho).re;
    rho /= real(t);
    hermitize(&mut rho);
    FermionicState::new(rho, modes).expect("random state is valid by construction")
}

/// Full-rank random normalized state.
pub fn random_full_rank_state<R: Rng + ?Sized>(rng: &mut R, modes: usize) -> FermionicState {
    random_state(rng, modes, fock_dim(modes) * 2)
}

/// `S^{-1/2}` for a positive definite even operator.
fn inverse_sqrt(s: &CMatrix) -> Result<CMatrix> {
    let root = matrix_sqrt_psd(s)?;
    Ok(root.try_inverse().expect("normalizer is positive definite"))
}

/// Deterministic channel on `modes` modes with `count` Kraus operators of
/// random definite parity.
pub fn random_channel<R: Rng + ?Sized>(
    rng: &mut R,
    modes: usize,
    count: usize,
) -> Result<FermionicChannel> {
    let count = count.max(1);
    let mut raw = Vec::with_capacity(count);
    for k in 0..count {
        // The first operator is even so the normalizer is always invertible.
        let parity = if k == 0 || rng.random_bool(0.5) {
            Parity::Even
        } else {
            Parity::Odd
        };
        raw.push(gaussian_graded(rng, modes, modes, parity));
    }
    let dim = fock_dim(modes);
    let mut s = CMatrix::zeros(dim, dim);
    for g in &raw {
        s += g.adjoint() * g;
    }
    hermitize(&mut s);
    let norm = inverse_sqrt(&s)?;
    FermionicChannel::new(raw.into_iter().map(|g| g * &norm).collect(), true)
}

/// Random even POVM with `count` effects on `modes` modes.
pub fn random_even_povm<R: Rng + ?Sized>(
    rng: &mut R,
    modes: usize,
    count: usize,
) -> Result<Vec<CMatrix>> {
    let dim = fock_dim(modes);
    if count <= 1 {
        return Ok(vec![CMatrix::identity(dim, dim)]);
    }
    let raw: Vec<CMatrix> = (0..count)
        .map(|_| {
            let w = gaussian_graded(rng, modes, modes, Parity::Even);
            &w * w.adjoint()
        })
        .collect();
    let mut s = CMatrix::zeros(dim, dim);
    for g in &raw {
        s += g;
    }
    hermitize(&mut s);
    let norm = inverse_sqrt(&s)?;
    Ok(raw
        .into_iter()
        .map(|g| {
            let mut b = &norm * g * &norm;
            hermitize(&mut b);
            b
        })
        .collect())
}
