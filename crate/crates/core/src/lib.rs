//! Fermionic quantum information under the parity superselection rule.
//!
//! Modes are numbered from 0. Operators are represented in the
//! Jordan-Wigner picture with mode 0 as the most significant bit of the
//! Fock index.

pub mod channels;
pub mod cli;
pub mod compression;
pub mod error;
pub mod fock;
pub mod io;
pub mod numerics;
pub mod random;
pub mod selftest;
pub mod states;
pub mod typicality;

pub use channels::{
    closeness_upon_input, entanglement_fidelity, entanglement_fidelity_purified, FermionicChannel,
    KrausOperator, RefinementFamily, Side,
};
pub use compression::{
    build_scheme, converse_scheme_fidelity, reliability_report, scheme_fidelity, CompressionScheme,
};
pub use error::{Error, Result};
pub use fock::{ModeOrdering, Parity};
pub use numerics::{CMatrix, CVector, C64};
pub use states::{
    connect_purifications, entropy, fidelity, minimal_purification, trace_distance, FermionicState,
    Purification,
};
pub use typicality::{
    best_rank_mass, spectral_source, typical_dim, typical_mass, SpectralSource, TypicalSpec,
};
