//! Built-in invariant suites run by `fermicode selftest`.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::channels::{self, closeness_upon_input, sample_refinements, Side};
use crate::compression::{build_scheme_capped, scheme_fidelity};
use crate::error::Result;
use crate::fock::{self, ModeOrdering, Parity};
use crate::random::{self, SeededRng};
use crate::states::{
    self, connect_purifications, minimal_purification, FermionicState, Purification,
};
use crate::typicality::{self, SpectralSource, TypicalSpec};

/// Slack on every inequality checked here.
pub const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl SuiteResult {
    fn from_check(name: &'static str, outcome: Result<(bool, String)>) -> Self {
        match outcome {
            Ok((passed, detail)) => Self {
                name,
                passed,
                detail,
            },
            Err(e) => Self {
                name,
                passed: false,
                detail: format!("{}: {e}", e.kind()),
            },
        }
    }
}

pub fn run_all(dense_cap: usize, seed: u64) -> Vec<SuiteResult> {
    vec![
        SuiteResult::from_check("car", car()),
        SuiteResult::from_check("parity", parity()),
        SuiteResult::from_check("fuchs-van-de-graaf", fuchs_van_de_graaf(seed)),
        SuiteResult::from_check("reliability-bound", reliability_bound(seed)),
        SuiteResult::from_check("oracle-equivalence", oracle_equivalence(dense_cap)),
        SuiteResult::from_check("typical-bounds", typical_bounds()),
        SuiteResult::from_check("ordering-independence", ordering_independence(seed)),
        SuiteResult::from_check("purification", purification(seed)),
    ]
}

fn car() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for modes in 1..=fock::MAX_CAR_MODES {
        worst = worst.max(fock::validate_car(modes)?.max_deviation);
    }
    Ok((
        worst <= 1e-12,
        format!("max deviation {worst:.3e} for 1..=8 modes"),
    ))
}

fn parity() -> Result<(bool, String)> {
    let r = channels::parity_counterexample(21)?;
    let ok = r.local_residual <= 1e-12
        && (r.extended_trace_norm - 1.0).abs() <= SLACK
        && (r.entanglement_fidelity - 0.5).abs() <= SLACK;
    Ok((
        ok,
        format!(
            "local {:.3e}, extended {:.6}, fidelity {:.6}",
            r.local_residual, r.extended_trace_norm, r.entanglement_fidelity
        ),
    ))
}

fn random_modes(rng: &mut SeededRng, max: usize) -> usize {
    rng.random_range(1..=max)
}

fn fuchs_van_de_graaf(seed: u64) -> Result<(bool, String)> {
    let mut rng = random::seeded(seed);
    let mut violations = 0;
    let cases = 100;
    for _ in 0..cases {
        let modes = random_modes(&mut rng, 3);
        let rank = rng.random_range(1..=fock::fock_dim(modes));
        let rho = random::random_state(&mut rng, modes, rank);
        let sigma = random::random_full_rank_state(&mut rng, modes);
        let f = states::fidelity(&rho, &sigma)?;
        let d = states::trace_distance(&rho, &sigma)?;
        if 1.0 - f > d + SLACK || d > (1.0 - f * f).max(0.0).sqrt() + SLACK {
            violations += 1;
        }
    }
    Ok((
        violations == 0,
        format!("{violations} violations in {cases} pairs"),
    ))
}

fn reliability_bound(seed: u64) -> Result<(bool, String)> {
    let mut rng = random::seeded(seed ^ 0x5eed);
    let mut violations = 0;
    let cases = 40;
    for i in 0..cases {
        let modes = random_modes(&mut rng, 2);
        let rho = random::random_full_rank_state(&mut rng, modes);
        let count = rng.random_range(1..=3);
        let c = random::random_channel(&mut rng, modes, count)?;
        let delta = 1.0 - channels::entanglement_fidelity(&rho, &c)?;
        let family = sample_refinements(&rho, 3, seed.wrapping_add(i))?;
        let identity = channels::FermionicChannel::identity(modes);
        let value = closeness_upon_input(&c, &identity, &family)?.value;
        if value > 2.0 * delta.max(0.0).sqrt() + SLACK {
            violations += 1;
        }
    }
    Ok((
        violations == 0,
        format!("{violations} violations in {cases} channels"),
    ))
}

/// Exhaustive sum over all `2^N` binary sequences.
fn enumerate_binary(p: f64, n: usize, epsilon: f64) -> (f64, f64) {
    let entropy = states::shannon_entropy(&[p, 1.0 - p]);
    let (mut mass, mut count) = (0.0, 0.0);
    for x in 0u64..(1 << n) {
        let ones = x.count_ones() as f64;
        let log2p = (n as f64 - ones) * p.log2() + ones * (1.0 - p).log2();
        if (-log2p / n as f64 - entropy).abs() <= epsilon {
            mass += log2p.exp2();
            count += 1.0;
        }
    }
    (mass, count)
}

fn oracle_equivalence(dense_cap: usize) -> Result<(bool, String)> {
    let (p, q) = (0.9, 0.1);
    let source = SpectralSource::from_probabilities(&[p, q], &[Parity::Even, Parity::Odd])?;
    let mut worst: f64 = 0.0;
    for n in [4, 8, 12, 16] {
        let spec = TypicalSpec::new(&source, n, 0.1)?;
        let (mass, count) = enumerate_binary(p, n, 0.1);
        let dim = typicality::typical_dim(&source, &spec)?;
        worst = worst
            .max((typicality::typical_mass(&source, &spec)? - mass).abs())
            .max((dim.log2.exp2() - count).abs() / count.max(1.0));
    }
    let rho = FermionicState::diagonal(&[p, q])?;
    let mut dense_points = 0;
    for n in 2..=dense_cap.min(typicality::DEFAULT_DENSE_CAP) {
        let scheme = match build_scheme_capped(&rho, n, 0.2, dense_cap) {
            Ok(s) => s,
            Err(crate::error::Error::InvalidParameter(_)) => continue,
            Err(e) => return Err(e),
        };
        let f = scheme_fidelity(&scheme)?;
        if f.dense.is_some() {
            dense_points += 1;
        }
        worst = worst.max(f.discrepancy());
    }
    Ok((
        worst <= 1e-8,
        format!("max discrepancy {worst:.3e}, {dense_points} dense points"),
    ))
}

fn typical_bounds() -> Result<(bool, String)> {
    let source = SpectralSource::from_probabilities(&[0.9, 0.1], &[Parity::Even, Parity::Odd])?;
    let mut violations = 0;
    let mut points = 0;
    for epsilon in [0.05, 0.1] {
        for n in (50..=2000).step_by(50) {
            let spec = TypicalSpec::new(&source, n, epsilon)?;
            if !typicality::dimension_bounds(&source, &spec)?.holds(SLACK) {
                violations += 1;
            }
            points += 1;
        }
    }
    Ok((
        violations == 0,
        format!("{violations} violations on {points} grid points"),
    ))
}

fn ordering_independence(seed: u64) -> Result<(bool, String)> {
    let mut rng = random::seeded(seed ^ 0x04d3);
    let mut worst: f64 = 0.0;
    for modes in 1..=4 {
        let rho = random::random_full_rank_state(&mut rng, modes);
        let sigma = random::random_state(&mut rng, modes, 2);
        let s = states::entropy(&rho)?;
        let f = states::fidelity(&rho, &sigma)?;
        let d = states::trace_distance(&rho, &sigma)?;
        for _ in 0..20 {
            let mut order: Vec<usize> = (0..modes).collect();
            order.shuffle(&mut rng);
            let ordering = ModeOrdering::from_sequence(&order)?;
            let r = FermionicState::new(rho.reordered(&ordering)?, modes)?;
            let t = FermionicState::new(sigma.reordered(&ordering)?, modes)?;
            worst = worst
                .max((states::entropy(&r)? - s).abs())
                .max((states::fidelity(&r, &t)? - f).abs())
                .max((states::trace_distance(&r, &t)? - d).abs());
        }
    }
    Ok((worst <= SLACK, format!("max deviation {worst:.3e}")))
}

/// A second purification of `rho`: the minimal one padded and rotated on
/// the purifier by a random even unitary.
pub fn rotated_purification(
    rng: &mut SeededRng,
    rho: &FermionicState,
    extra: usize,
) -> Result<Purification> {
    let phi = minimal_purification(rho)?.padded(extra)?;
    let k = phi.purifier_modes();
    let u = random::even_unitary(rng, k);
    let rotated =
        channels::FermionicChannel::new(vec![u], true)?.extend(phi.system_modes(), Side::Before);
    let out = rotated.kraus_matrices()[0].clone() * phi.vector();
    Purification::from_vector(out, phi.system_modes(), k)
}

fn purification(seed: u64) -> Result<(bool, String)> {
    let mut rng = random::seeded(seed ^ 0x9a7e);
    let mut marginal: f64 = 0.0;
    let mut connect: f64 = 0.0;
    for case in 0..20 {
        let modes = random_modes(&mut rng, 2);
        let rank = rng.random_range(1..=fock::fock_dim(modes));
        let rho = random::random_state(&mut rng, modes, rank);
        let psi = minimal_purification(&rho)?;
        marginal = marginal.max((psi.marginal().matrix() - rho.matrix()).norm());
        let target = rotated_purification(&mut rng, &rho, case % 2)?;
        let (from, to) = if case % 3 == 0 {
            (&target, &psi)
        } else {
            (&psi, &target)
        };
        let v = connect_purifications(from, to)?;
        let out = v
            .extend(rho.modes(), Side::Before)
            .apply_matrix(from.state().matrix())?;
        connect = connect.max((out - to.state().matrix()).norm());
    }
    Ok((
        marginal <= SLACK && connect <= 1e-7,
        format!("marginal error {marginal:.3e}, connection error {connect:.3e}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_with_small_dense_cap() {
        for r in run_all(8, 7) {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}
