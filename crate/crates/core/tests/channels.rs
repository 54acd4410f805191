use fermicode::channels::{
    self, closeness_upon_input, sample_refinements, sample_refinements_with, FermionicChannel,
    Sequence, Side,
};
use fermicode::fock;
use fermicode::random;
use fermicode::selftest::rotated_purification;
use fermicode::states::FermionicState;
use proptest::prelude::*;
use rand::Rng;

fn random_setup(seed: u64, max_modes: usize) -> (FermionicState, FermionicChannel) {
    let mut rng = random::seeded(seed);
    let modes = rng.random_range(1..=max_modes);
    let rank = rng.random_range(1..=fock::fock_dim(modes));
    let rho = random::random_state(&mut rng, modes, rank);
    let count = rng.random_range(1..=4);
    let c = random::random_channel(&mut rng, modes, count).unwrap();
    (rho, c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_channels_are_complete(seed in any::<u64>()) {
        let (rho, c) = random_setup(seed, 3);
        prop_assert!(c.completeness_residual().unwrap() <= 1e-9);
        let out = c.apply(&rho).unwrap();
        prop_assert!((out.trace() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn fidelity_routes_agree(seed in any::<u64>()) {
        let (rho, c) = random_setup(seed, 2);
        let kraus = channels::entanglement_fidelity(&rho, &c).unwrap();
        let minimal = channels::entanglement_fidelity_via_purification(&rho, &c).unwrap();
        let mut rng = random::seeded(seed ^ 1);
        let other = rotated_purification(&mut rng, &rho, 1).unwrap();
        let rotated = channels::entanglement_fidelity_purified(&rho, &c, &other).unwrap();
        prop_assert!((kraus - minimal).abs() <= 1e-9, "{kraus} vs {minimal}");
        prop_assert!((kraus - rotated).abs() <= 1e-9, "{kraus} vs {rotated}");
    }

    #[test]
    fn sequential_fidelity_matches_composition(seed in any::<u64>()) {
        let (rho, first) = random_setup(seed, 2);
        let mut rng = random::seeded(seed ^ 2);
        let second = random::random_channel(&mut rng, rho.modes(), 2).unwrap();
        let composed = first.then(&second).unwrap();
        let direct = channels::entanglement_fidelity(&rho, &composed).unwrap();
        let pairwise = channels::sequential_entanglement_fidelity(&rho, &first, &second).unwrap();
        prop_assert!((direct - pairwise).abs() <= 1e-12);
    }

    #[test]
    fn closeness_respects_fidelity_bound(seed in any::<u64>()) {
        let (rho, c) = random_setup(seed, 2);
        let rho = FermionicState::new(
            rho.matrix() * fermicode::numerics::real(0.9)
                + random::random_full_rank_state(&mut random::seeded(seed ^ 3), rho.modes()).matrix()
                    * fermicode::numerics::real(0.1),
            rho.modes(),
        )
        .unwrap();
        let delta = 1.0 - channels::entanglement_fidelity(&rho, &c).unwrap();
        let identity = FermionicChannel::identity(rho.modes());
        for family in [
            sample_refinements(&rho, 3, seed).unwrap(),
            sample_refinements_with(&rho, 2, 2, seed).unwrap(),
        ] {
            let value = closeness_upon_input(&c, &identity, &family).unwrap().value;
            prop_assert!(value <= 2.0 * delta.max(0.0).sqrt() + 1e-9);
        }
    }
}

#[test]
fn identity_is_perfect_and_sequence_matches_then() {
    let mut rng = random::seeded(11);
    let rho = random::random_full_rank_state(&mut rng, 2);
    let identity = FermionicChannel::identity(2);
    assert!((channels::entanglement_fidelity(&rho, &identity).unwrap() - 1.0).abs() < 1e-12);

    let a = random::random_channel(&mut rng, 2, 2).unwrap();
    let b = random::random_channel(&mut rng, 2, 3).unwrap();
    let family = sample_refinements(&rho, 3, 5).unwrap();
    let staged = Sequence {
        first: &a,
        second: &b,
    };
    let composed = a.then(&b).unwrap();
    let x = closeness_upon_input(&staged, &identity, &family)
        .unwrap()
        .value;
    let y = closeness_upon_input(&composed, &identity, &family)
        .unwrap()
        .value;
    assert!((x - y).abs() < 1e-12);
}

#[test]
fn extension_sides_agree_on_products() {
    let mut rng = random::seeded(12);
    let c = random::random_channel(&mut rng, 1, 2).unwrap();
    let rho = random::random_full_rank_state(&mut rng, 1);
    let sigma = random::random_full_rank_state(&mut rng, 1);
    let after = c
        .extend(1, Side::After)
        .apply(&rho.compose(&sigma))
        .unwrap();
    let expected = c.apply(&rho).unwrap().compose(&sigma);
    assert!((after.matrix() - expected.matrix()).norm() < 1e-12);
    let before = c
        .extend(1, Side::Before)
        .apply(&sigma.compose(&rho))
        .unwrap();
    let expected = sigma.compose(&c.apply(&rho).unwrap());
    assert!((before.matrix() - expected.matrix()).norm() < 1e-12);
}

#[test]
fn parity_channel_is_locally_invisible() {
    let r = channels::parity_counterexample(41).unwrap();
    assert!(r.local_residual <= 1e-12);
    assert!((r.extended_trace_norm - 1.0).abs() <= 1e-12);
    assert!((r.extended_trace_distance - 0.5).abs() <= 1e-12);
    assert!((r.entanglement_fidelity - 0.5).abs() <= 1e-12);
}

#[test]
fn large_purifications_are_refused_but_refinements_still_sample() {
    let rho = FermionicState::new(fermicode::numerics::diag(&[1.0 / 64.0; 64]), 6).unwrap();
    assert!(matches!(
        fermicode::minimal_purification(&rho),
        Err(fermicode::Error::DenseCapExceeded { .. })
    ));
    let family = sample_refinements(&rho, 2, 3).unwrap();
    let marginal = fermicode::states::partial_trace_matrix(&family.dilation(), 7, &[6]).unwrap();
    assert!((marginal - rho.matrix()).norm() <= 1e-10);
}
