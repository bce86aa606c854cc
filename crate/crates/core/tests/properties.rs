//! Property tests for cross-module invariants: randomized circuits stay
//! valid through the genome operators, the eigensolver matches the harmonic
//! closed form over the whole fabrication range, and the thermal factor
//! obeys detailed balance.

use circuitq::coherence::thermal_factor;
use circuitq::consts::{EC_PREFACTOR_GHZ_FF, EL_PREFACTOR_GHZ_NH, HBAR, K_B};
use circuitq::evolve::{crossover, mutate, random_genome, Bounds};
use circuitq::netlist::{Branch, CircuitNetlist};
use circuitq::quantize::{assemble, QuantizeOptions};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    /// Every genome the generators produce decodes to a valid netlist, for
    /// any RNG stream and after arbitrary mutation pressure.
    #[test]
    fn genome_operators_preserve_validity(seed in 0u64..1_000_000, islands in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bounds = Bounds::default();
        let a = random_genome(islands, &bounds, &mut rng, 128).unwrap();
        let b = random_genome(islands, &bounds, &mut rng, 128).unwrap();
        prop_assert!(a.is_valid() && b.is_valid());
        // identical parents always recombine into themselves
        prop_assert_eq!(&crossover(&a, &a, &mut rng), &a);
        let mut g = a;
        for _ in 0..10 {
            g = mutate(&g, 1.0, &bounds, &mut rng, 128);
            prop_assert!(g.is_valid());
        }
    }

    /// Single LC branch: the quantized 0-1 transition matches the harmonic
    /// closed form sqrt(8 E_C E_L) across the fabrication bounds.
    #[test]
    fn lc_spectrum_matches_closed_form(c_ff in 5.0f64..150.0, l_nh in 10.0f64..500.0) {
        let net = CircuitNetlist {
            n_nodes: 2,
            reference: 0,
            branches: vec![Branch::capacitive(0, 1, c_ff).with_inductor(l_nh)],
            closure: vec![],
        };
        let opts = QuantizeOptions { fock_cutoff: 12, ..Default::default() };
        let sys = assemble(&net, &opts).unwrap();
        let sol = sys.eigens(0.0, 0.0, 2, 1e-12, 7).unwrap();
        let w01 = sol.values[1] - sol.values[0];
        let exact = (8.0 * EC_PREFACTOR_GHZ_FF / c_ff * EL_PREFACTOR_GHZ_NH / l_nh).sqrt();
        prop_assert!((w01 - exact).abs() < 1e-9 * exact.max(1.0),
            "w01 {} vs closed form {}", w01, exact);
    }

    /// Detailed balance: F(w)/F(-w) = exp(hbar w / k T) for any transition
    /// frequency and temperature.
    #[test]
    fn thermal_factor_detailed_balance(w_ghz in 0.1f64..20.0, t_mk in 5.0f64..300.0) {
        let w = 2.0 * std::f64::consts::PI * w_ghz * 1e9;
        let t = t_mk * 1e-3;
        let down = thermal_factor(w, t).unwrap();
        let up = thermal_factor(-w, t).unwrap();
        let boltzmann = (HBAR * w / (K_B * t)).exp();
        prop_assert!((down / up / boltzmann - 1.0).abs() < 1e-9,
            "ratio {} vs exp {}", down / up, boltzmann);
    }
}
