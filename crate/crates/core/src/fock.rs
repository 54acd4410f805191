//! Fock-basis bookkeeping and the Jordan-Wigner representation.
//!
//! A system of `L` modes is represented on `L` qubit slots. A [`ModeOrdering`]
//! says which slot each mode occupies; slot 0 is the most significant bit of
//! the Fock index. Under the canonical ordering mode `i` sits in slot `i`, so
//! the Jordan-Wigner string of mode `i` covers modes `0..i`.
//!
//! Modes are indexed from zero throughout the crate.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::numerics::{real, CMatrix, CVector, C64};

/// Largest mode count for which [`validate_car`] builds dense matrices.
pub const MAX_CAR_MODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_count(count: u32) -> Self {
        if count.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Parity of the total occupation of a Fock index.
    pub fn of_index(index: usize) -> Self {
        Self::of_count(index.count_ones())
    }

    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn combine(self, other: Parity) -> Self {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

/// Hilbert-space dimension of `modes` modes.
pub fn fock_dim(modes: usize) -> usize {
    1usize << modes
}

/// Mode count for a dimension, if it is a power of two.
pub fn modes_for_dim(dim: usize) -> Option<usize> {
    dim.is_power_of_two().then(|| dim.trailing_zeros() as usize)
}

/// Fock indices of the given parity sector, ascending.
pub fn sector_indices(modes: usize, parity: Parity) -> Vec<usize> {
    (0..fock_dim(modes))
        .filter(|&b| Parity::of_index(b) == parity)
        .collect()
}

/// Occupation numbers `(n_0, …, n_{L-1})` of a canonical Fock index.
pub fn occupations(index: usize, modes: usize) -> Vec<u8> {
    (0..modes)
        .map(|slot| ((index >> (modes - 1 - slot)) & 1) as u8)
        .collect()
}

#[inline]
fn slot_bit(slot: usize, modes: usize) -> usize {
    1usize << (modes - 1 - slot)
}

/// Assignment of logical modes to qubit slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeOrdering {
    slots: Vec<usize>,
}

impl ModeOrdering {
    pub fn canonical(modes: usize) -> Self {
        Self {
            slots: (0..modes).collect(),
        }
    }

    /// `slots[mode]` is the qubit slot of `mode`.
    pub fn new(slots: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; slots.len()];
        for &s in &slots {
            if s >= slots.len() || std::mem::replace(&mut seen[s], true) {
                return Err(Error::InvalidOrdering(format!(
                    "{slots:?} is not a permutation"
                )));
            }
        }
        Ok(Self { slots })
    }

    /// Ordering that lists `order[0]` first, `order[1]` second, and so on.
    pub fn from_sequence(order: &[usize]) -> Result<Self> {
        let mut slots = vec![usize::MAX; order.len()];
        for (slot, &mode) in order.iter().enumerate() {
            if mode >= order.len() || slots[mode] != usize::MAX {
                return Err(Error::InvalidOrdering(format!(
                    "{order:?} is not a permutation"
                )));
            }
            slots[mode] = slot;
        }
        Ok(Self { slots })
    }

    /// Keeps the untraced modes first (in their relative order) and moves
    /// `traced` to the trailing slots.
    pub fn with_trailing(modes: usize, traced: &[usize]) -> Result<Self> {
        for &m in traced {
            if m >= modes {
                return Err(Error::ModeOutOfRange { mode: m, modes });
            }
        }
        let mut order: Vec<usize> = (0..modes).filter(|m| !traced.contains(m)).collect();
        let mut tail: Vec<usize> = traced.to_vec();
        tail.sort_unstable();
        tail.dedup();
        order.extend(tail);
        Self::from_sequence(&order)
    }

    pub fn modes(&self) -> usize {
        self.slots.len()
    }

    pub fn slot(&self, mode: usize) -> usize {
        self.slots[mode]
    }

    pub fn slots(&self) -> &[usize] {
        &self.slots
    }

    pub fn is_canonical(&self) -> bool {
        self.slots.iter().enumerate().all(|(m, &s)| m == s)
    }

    /// Mode found at each slot.
    pub fn sequence(&self) -> Vec<usize> {
        let mut order = vec![0; self.slots.len()];
        for (mode, &slot) in self.slots.iter().enumerate() {
            order[slot] = mode;
        }
        order
    }
}

/// A creation (`dagger`) or annihilation operator on one mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldOp {
    pub mode: usize,
    pub dagger: bool,
}

impl FieldOp {
    pub fn annihilate(mode: usize) -> Self {
        Self {
            mode,
            dagger: false,
        }
    }

    pub fn create(mode: usize) -> Self {
        Self { mode, dagger: true }
    }
}

/// Action of one field operator on a basis vector: `None` when it vanishes,
/// otherwise the image index and its sign.
pub fn apply_field_to_basis(
    op: FieldOp,
    index: usize,
    ordering: &ModeOrdering,
) -> Option<(usize, f64)> {
    let modes = ordering.modes();
    let slot = ordering.slot(op.mode);
    let bit = slot_bit(slot, modes);
    let occupied = index & bit != 0;
    if occupied == op.dagger {
        return None;
    }
    // Occupied slots strictly before `slot` carry the σz string.
    let higher = !((bit << 1).wrapping_sub(1)) & (fock_dim(modes) - 1);
    let sign = if (index & higher).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    Some((index ^ bit, sign))
}

/// Applies a word of field operators, rightmost first.
pub fn apply_word_to_basis(
    word: &[FieldOp],
    index: usize,
    ordering: &ModeOrdering,
) -> Option<(usize, f64)> {
    let mut current = index;
    let mut sign = 1.0;
    for &op in word.iter().rev() {
        let (next, s) = apply_field_to_basis(op, current, ordering)?;
        current = next;
        sign *= s;
    }
    Some((current, sign))
}

fn check_mode(mode: usize, modes: usize) -> Result<()> {
    if mode >= modes {
        Err(Error::ModeOutOfRange { mode, modes })
    } else {
        Ok(())
    }
}

/// Jordan-Wigner matrix of the annihilation operator of `mode`:
/// `(⊗_{earlier slots} σz) ⊗ σ⁻ ⊗ I…`, with `σ⁻ = |0⟩⟨1|`.
pub fn jw_field(mode: usize, ordering: &ModeOrdering) -> Result<CMatrix> {
    let modes = ordering.modes();
    check_mode(mode, modes)?;
    let dim = fock_dim(modes);
    let mut m = CMatrix::zeros(dim, dim);
    for b in 0..dim {
        if let Some((target, sign)) = apply_field_to_basis(FieldOp::annihilate(mode), b, ordering) {
            m[(target, b)] = real(sign);
        }
    }
    Ok(m)
}

/// Jordan-Wigner matrix under the canonical ordering.
pub fn jw_field_canonical(mode: usize, modes: usize) -> Result<CMatrix> {
    jw_field(mode, &ModeOrdering::canonical(modes))
}

/// Dense matrix of a word of field operators.
pub fn word_matrix(word: &[FieldOp], ordering: &ModeOrdering) -> Result<CMatrix> {
    let dim = fock_dim(ordering.modes());
    let mut m = CMatrix::identity(dim, dim);
    for op in word {
        let field = jw_field(op.mode, ordering)?;
        m *= if op.dagger { field.adjoint() } else { field };
    }
    Ok(m)
}

#[derive(Debug, Clone)]
pub struct CarReport {
    pub modes: usize,
    pub max_deviation: f64,
    pub passed: bool,
}

/// Checks `{φᵢ, φⱼ†} = δᵢⱼ I` and `{φᵢ, φⱼ} = 0` for every pair of modes.
pub fn validate_car(modes: usize) -> Result<CarReport> {
    if modes == 0 || modes > MAX_CAR_MODES {
        return Err(Error::InvalidParameter(format!(
            "CAR check supports 1..={MAX_CAR_MODES} modes, got {modes}"
        )));
    }
    let ordering = ModeOrdering::canonical(modes);
    let dim = fock_dim(modes);
    let fields: Vec<CMatrix> = (0..modes)
        .map(|i| jw_field(i, &ordering))
        .collect::<Result<_>>()?;
    let daggers: Vec<CMatrix> = fields.iter().map(|f| f.adjoint()).collect();
    let identity = CMatrix::identity(dim, dim);
    let max_abs = |m: &CMatrix| m.iter().map(|z| z.norm()).fold(0.0, f64::max);

    let mut max_deviation: f64 = 0.0;
    for i in 0..modes {
        for j in 0..modes {
            let mut mixed = &fields[i] * &daggers[j] + &daggers[j] * &fields[i];
            if i == j {
                mixed -= &identity;
            }
            let pure = &fields[i] * &fields[j] + &fields[j] * &fields[i];
            max_deviation = max_deviation.max(max_abs(&mixed)).max(max_abs(&pure));
        }
    }
    Ok(CarReport {
        modes,
        max_deviation,
        passed: max_deviation <= 1e-12,
    })
}

/// `|0…0⟩⟨0…0|`
pub fn vacuum_projector(modes: usize) -> CMatrix {
    let dim = fock_dim(modes);
    let mut m = CMatrix::zeros(dim, dim);
    m[(0, 0)] = real(1.0);
    m
}

/// A basis permutation with signs: `|b⟩ ↦ sign[b] |target[b]⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedPermutation {
    pub target: Vec<usize>,
    pub sign: Vec<f64>,
}

impl SignedPermutation {
    pub fn identity(dim: usize) -> Self {
        Self {
            target: (0..dim).collect(),
            sign: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.target.len()
    }

    fn then_fswap(&mut self, slot: usize, modes: usize) {
        let hi = slot_bit(slot, modes);
        let lo = slot_bit(slot + 1, modes);
        for (t, s) in self.target.iter_mut().zip(self.sign.iter_mut()) {
            let a = *t & hi != 0;
            let b = *t & lo != 0;
            if a != b {
                *t ^= hi | lo;
            } else if a {
                *s = -*s;
            }
        }
    }

    pub fn to_matrix(&self) -> CMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        for b in 0..n {
            m[(self.target[b], b)] = real(self.sign[b]);
        }
        m
    }

    /// `U M U†`
    pub fn conjugate(&self, m: &CMatrix) -> CMatrix {
        let n = self.dim();
        let mut out = CMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                out[(self.target[a], self.target[b])] = m[(a, b)] * (self.sign[a] * self.sign[b]);
            }
        }
        out
    }

    /// `U v`
    pub fn apply(&self, v: &CVector) -> CVector {
        let mut out = CVector::zeros(v.len());
        for b in 0..v.len() {
            out[self.target[b]] = v[b] * self.sign[b];
        }
        out
    }
}

/// Fermionic swap of the modes in slots `slot` and `slot + 1`:
/// `|00⟩ → |00⟩`, `|01⟩ ↔ |10⟩`, `|11⟩ → −|11⟩`.
pub fn fswap_adjacent(slot: usize, modes: usize) -> Result<CMatrix> {
    if slot + 1 >= modes {
        return Err(Error::ModeOutOfRange {
            mode: slot + 1,
            modes,
        });
    }
    let mut p = SignedPermutation::identity(fock_dim(modes));
    p.then_fswap(slot, modes);
    Ok(p.to_matrix())
}

/// Signed permutation `U` with `J_to(X) = U J_from(X) U†`, built from
/// adjacent fermionic swaps.
pub fn reorder_unitary(from: &ModeOrdering, to: &ModeOrdering) -> Result<SignedPermutation> {
    let modes = from.modes();
    if to.modes() != modes {
        return Err(Error::dims(
            format!("{modes} modes"),
            format!("{} modes", to.modes()),
        ));
    }
    // key[s] = destination slot of the mode currently at slot s.
    let mut key: Vec<usize> = from.sequence().into_iter().map(|m| to.slot(m)).collect();
    let mut perm = SignedPermutation::identity(fock_dim(modes));
    for pass in 0..modes {
        let mut swapped = false;
        for s in 0..modes.saturating_sub(1 + pass) {
            if key[s] > key[s + 1] {
                key.swap(s, s + 1);
                perm.then_fswap(s, modes);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    Ok(perm)
}

/// Re-expresses the Jordan-Wigner representative `m` (under `from`) in the
/// ordering `to`.
pub fn reorder_modes(m: &CMatrix, from: &ModeOrdering, to: &ModeOrdering) -> Result<CMatrix> {
    let dim = fock_dim(from.modes());
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::dims(
            format!("{dim}x{dim}"),
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    Ok(reorder_unitary(from, to)?.conjugate(m))
}

/// `|X⟩⟩ = Σ X_ij |i⟩|j⟩`, i.e. row-major vectorization.
pub fn double_ket(x: &CMatrix) -> CVector {
    let (rows, cols) = x.shape();
    CVector::from_iterator(
        rows * cols,
        (0..rows).flat_map(|i| (0..cols).map(move |j| x[(i, j)])),
    )
}

pub fn double_ket_inv(v: &CVector, rows: usize, cols: usize) -> Result<CMatrix> {
    if v.len() != rows * cols {
        return Err(Error::dims(rows * cols, v.len()));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| v[i * cols + j]))
}

/// `Σ ρ_{st} Π_i φᵢ†^{sᵢ} φᵢ φᵢ† φᵢ^{tᵢ}`, keyed by the canonical Fock
/// indices of `s` and `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPolynomial {
    modes: usize,
    coefficients: BTreeMap<(usize, usize), C64>,
}

impl FieldPolynomial {
    pub fn new(modes: usize) -> Self {
        Self {
            modes,
            coefficients: BTreeMap::new(),
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn insert(&mut self, s: usize, t: usize, value: C64) -> Result<()> {
        let dim = fock_dim(self.modes);
        if s >= dim || t >= dim {
            return Err(Error::dims(format!("index < {dim}"), format!("({s}, {t})")));
        }
        if value == C64::new(0.0, 0.0) {
            self.coefficients.remove(&(s, t));
        } else {
            self.coefficients.insert((s, t), value);
        }
        Ok(())
    }

    pub fn coefficient(&self, s: usize, t: usize) -> C64 {
        self.coefficients.get(&(s, t)).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, usize), &C64)> {
        self.coefficients.iter()
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// True when every monomial has an even number of field operators.
    pub fn is_even(&self) -> bool {
        self.coefficients
            .keys()
            .all(|&(s, t)| (s.count_ones() + t.count_ones()) % 2 == 0)
    }

    /// Field-operator word of the monomial `(s, t)`.
    pub fn monomial_word(modes: usize, s: usize, t: usize) -> Vec<FieldOp> {
        let occ_s = occupations(s, modes);
        let occ_t = occupations(t, modes);
        let mut word = Vec::with_capacity(4 * modes);
        for i in 0..modes {
            if occ_s[i] == 1 {
                word.push(FieldOp::create(i));
            }
            word.push(FieldOp::annihilate(i));
            word.push(FieldOp::create(i));
            if occ_t[i] == 1 {
                word.push(FieldOp::annihilate(i));
            }
        }
        word
    }
}

/// Evaluates each monomial as a product of Jordan-Wigner field matrices.
pub fn poly_to_matrix(p: &FieldPolynomial, ordering: &ModeOrdering) -> Result<CMatrix> {
    if ordering.modes() != p.modes {
        return Err(Error::dims(
            format!("{} modes", p.modes),
            format!("{} modes", ordering.modes()),
        ));
    }
    let dim = fock_dim(p.modes);
    let fields: Vec<CMatrix> = (0..p.modes)
        .map(|i| jw_field(i, ordering))
        .collect::<Result<_>>()?;
    let mut out = CMatrix::zeros(dim, dim);
    for (&(s, t), &c) in &p.coefficients {
        let mut term = CMatrix::identity(dim, dim);
        for op in FieldPolynomial::monomial_word(p.modes, s, t) {
            let f = &fields[op.mode];
            term = if op.dagger {
                term * f.adjoint()
            } else {
                term * f
            };
        }
        out += term * c;
    }
    Ok(out)
}

/// Inverse of [`poly_to_matrix`]. Each monomial is a signed matrix unit, so
/// the coefficient is read off the entry it occupies.
pub fn matrix_to_poly(m: &CMatrix, ordering: &ModeOrdering) -> Result<FieldPolynomial> {
    let modes = ordering.modes();
    let dim = fock_dim(modes);
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::dims(
            format!("{dim}x{dim}"),
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    let mut p = FieldPolynomial::new(modes);
    for s in 0..dim {
        for t in 0..dim {
            let word = FieldPolynomial::monomial_word(modes, s, t);
            let col = canonical_to_slot_index(t, ordering);
            let (row, sign) = apply_word_to_basis(&word, col, ordering)
                .expect("monomial never annihilates its own column");
            p.insert(s, t, m[(row, col)] * sign)?;
        }
    }
    Ok(p)
}

/// Slot-basis index of the Fock vector whose canonical index is `index`.
fn canonical_to_slot_index(index: usize, ordering: &ModeOrdering) -> usize {
    let modes = ordering.modes();
    (0..modes)
        .filter(|&mode| index & slot_bit(mode, modes) != 0)
        .fold(0, |acc, mode| acc | slot_bit(ordering.slot(mode), modes))
}
