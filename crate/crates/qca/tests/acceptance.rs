//! End-to-end acceptance checks. Each test exercises one published
//! guarantee at its stated tolerance and prints the measured figure,
//! so a run of this suite doubles as a numerical report card.

mod common;

use common::{apply_dense, classical_block_step, kron_embed, random_sites, random_state};
use qca::classical::{eca_run, reversible_block_to_mqca, BitRow, RuleTable};
use qca::cqca::walk_cqca_example;
use qca::ctqca::{flip_flop_example, TrotterOrder};
use qca::linalg::{haar_unitary, max_abs};
use qca::model::{Automaton, ExactStepper};
use qca::mqca::{walk_example, Tiling};
use qca::scalar::C;
use qca::state::fidelity;
use qca::transpile::{
    cqca_to_ctqca, cqca_to_mqca, ctqca_to_cqca_with_order, decompose_block,
    decompose_two_qubit, mqca_to_cqca,
};
use qca::verify::{
    assemble_global, check_causality, check_consistency, check_translation, check_unitarity,
    nested_region_pairs,
};
use qca::{CMatrix64, Lattice, LocalUnitary64, StateVector64};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The block permutation shipped with the classical preset: flip the
/// second site of a block when the first is set.
const PRESET_BLOCK_PERMUTATION: [usize; 4] = [0, 1, 3, 2];

fn staggered_pair(lattice: &Lattice) -> (Tiling, Tiling) {
    (
        Tiling::new(lattice, &[2], &[0]).unwrap(),
        Tiling::new(lattice, &[2], &[1]).unwrap(),
    )
}

fn max_abs_diff_up_to_phase(a: &CMatrix64, b: &CMatrix64) -> f64 {
    let mut idx = (0, 0);
    let mut best = 0.0f64;
    for r in 0..b.nrows() {
        for c in 0..b.ncols() {
            let mag = b[(r, c)].norm();
            if mag > best {
                best = mag;
                idx = (r, c);
            }
        }
    }
    let rel = a[idx] * b[idx].conj();
    let mag = rel.norm();
    if mag == 0.0 {
        return max_abs(&(a - b));
    }
    let phase = rel / C::new(mag, 0.0);
    max_abs(&(b.map(|x| x * phase) - a))
}

#[test]
fn criterion_02_round_trip_preserves_site_probabilities() {
    let source = walk_example::<f64>(8).unwrap();
    let coloured = mqca_to_cqca(&source).unwrap();
    let round_trip = cqca_to_mqca(&coloured.model).unwrap();

    let mut worst = 0.0f64;
    for seed_sites in [vec![0usize], vec![0, 3], vec![1, 4, 6]] {
        let mut a = StateVector64::with_excitations(source.lattice(), &seed_sites).unwrap();
        let mut b = a.clone();
        for _ in 0..10 {
            source.step(&mut a).unwrap();
            round_trip.model.step(&mut b).unwrap();
            for (pa, pb) in a.site_probabilities().iter().zip(b.site_probabilities()) {
                worst = worst.max((pa - pb).abs());
            }
        }
    }
    println!("criterion 2: worst per-site probability drift {worst:.3e} (tol 1e-7)");
    assert!(worst < 1e-7);
}

#[test]
fn criterion_03_schedule_reproduces_each_coloured_step() {
    let source = walk_cqca_example::<f64>(8).unwrap();
    let schedule = cqca_to_ctqca(&source, 1.0).unwrap().model;

    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let lattice = source.lattice().clone();
    let mut worst = 0.0f64;
    for mut stepped in [
        StateVector64::with_excitations(&lattice, &[0]).unwrap(),
        random_state(&lattice, &mut rng),
    ] {
        let mut evolved = stepped.clone();
        for _ in 0..10 {
            source.step(&mut stepped).unwrap();
            schedule.exact_evolve(&mut evolved).unwrap();
            worst = worst.max(1.0 - fidelity(&stepped, &evolved).unwrap());
        }
    }
    println!("criterion 3: worst step infidelity {worst:.3e} (tol 1e-8)");
    assert!(worst < 1e-8);
}

#[test]
fn criterion_04_product_formula_converges_at_declared_order() {
    let source = flip_flop_example::<f64>(6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let initial = random_state(source.lattice(), &mut rng);
    let resolutions = [0.1f64, 0.05, 0.025];

    for (order, exponent, window) in [
        (TrotterOrder::First, 1.0, (1.7, 2.3)),
        (TrotterOrder::Second, 2.0, (3.4, 4.6)),
    ] {
        let mut errors = Vec::new();
        for &dt in &resolutions {
            let compiled = ctqca_to_cqca_with_order(&source, dt, 1.0, order).unwrap();
            let steps = (1.0 / dt).round() as usize;
            let mut approx = initial.clone();
            let mut exact = initial.clone();
            let mut worst = 0.0f64;
            for _ in 0..steps {
                compiled.model.step(&mut approx).unwrap();
                source.exact_evolve(&mut exact, dt).unwrap();
                worst = worst.max(approx.aligned_distance(&exact).unwrap());
            }
            errors.push(worst);
        }

        let ratios = [errors[0] / errors[1], errors[1] / errors[2]];
        let xs: Vec<f64> = resolutions.iter().map(|d| d.ln()).collect();
        let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
        let x_mean = xs.iter().sum::<f64>() / 3.0;
        let y_mean = ys.iter().sum::<f64>() / 3.0;
        let slope = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - x_mean) * (y - y_mean))
            .sum::<f64>()
            / xs.iter().map(|x| (x - x_mean).powi(2)).sum::<f64>();

        println!(
            "criterion 4: {order:?} errors [{:.3e}, {:.3e}, {:.3e}], ratios [{:.3}, {:.3}], slope {slope:.3}",
            errors[0], errors[1], errors[2], ratios[0], ratios[1]
        );
        for r in ratios {
            assert!(
                r >= window.0 && r <= window.1,
                "{order:?} refinement ratio {r:.3} outside [{}, {}]",
                window.0,
                window.1
            );
        }
        assert!(
            (slope - exponent).abs() <= 0.15,
            "{order:?} slope {slope:.3} not within 0.15 of {exponent}"
        );
    }
}

#[test]
fn criterion_05_two_site_exchange_matches_the_closed_form() {
    let model = flip_flop_example::<f64>(2).unwrap();
    let initial = StateVector64::with_excitations(model.lattice(), &[0]).unwrap();

    let mut worst = 0.0f64;
    for t in [0.3f64, 0.7, 1.2] {
        let mut state = initial.clone();
        model.exact_evolve(&mut state, t).unwrap();
        let p = state.site_probabilities();
        worst = worst.max((p[0] - t.cos().powi(2)).abs());
        worst = worst.max((p[1] - t.sin().powi(2)).abs());
    }
    println!("criterion 5: worst deviation from cos²/sin² {worst:.3e} (tol 1e-10)");
    assert!(worst < 1e-10);
}

#[test]
fn criterion_06_presets_pass_the_verifier_with_tight_radii() {
    let walk_blocks = walk_example::<f64>(8).unwrap();
    let walk_coloured = walk_cqca_example::<f64>(8).unwrap();
    let exchange = ExactStepper { model: flip_flop_example::<f64>(6).unwrap(), t_step: 1.0 };
    let lattice6 = Lattice::ring(6).unwrap();
    let (aligned, staggered) = staggered_pair(&lattice6);
    let embedded_rule = reversible_block_to_mqca::<f64>(
        &PRESET_BLOCK_PERMUTATION,
        lattice6,
        aligned,
        staggered,
    )
    .unwrap();

    let presets: [(&str, &dyn Automaton<f64>); 4] = [
        ("walk-mqca", &walk_blocks),
        ("walk-cqca", &walk_coloured),
        ("flipflop-ctqca", &exchange),
        ("rule30-embedding", &embedded_rule),
    ];

    for (name, model) in presets {
        let global = assemble_global(model).unwrap();
        let unitarity = check_unitarity(&global, 1e-10);
        assert!(unitarity.pass, "{name}: {unitarity}");

        let shift: Vec<i64> = model.spatial_period().iter().map(|&p| p as i64).collect();
        let translation = check_translation(model, &shift, 1e-10).unwrap();
        assert!(translation.pass, "{name}: {translation}");

        let radius = model.declared_radius();
        let causality = check_causality(model, radius, 1e-10).unwrap();
        assert!(causality.pass, "{name}: {causality}");
        let slack = check_causality(model, radius - 1, 1e-10).unwrap();
        assert!(
            !slack.pass,
            "{name}: radius {radius} is not tight, {slack}"
        );

        let pairs = nested_region_pairs(model.lattice(), 3);
        let consistency = check_consistency(model, &pairs, 1e-10).unwrap();
        assert!(consistency.pass, "{name}: {consistency}");

        println!(
            "criterion 6: {name} passes all checks, causality tight at radius {radius}"
        );
    }
}

#[test]
fn criterion_07_conserved_quantities_stay_put() {
    let walk = walk_example::<f64>(12).unwrap();
    let mut state = StateVector64::with_excitations(walk.lattice(), &[0]).unwrap();
    let mut norm_drift = 0.0f64;
    for _ in 0..100 {
        walk.step(&mut state).unwrap();
        norm_drift = norm_drift.max((state.norm() - 1.0).abs());
    }
    println!("criterion 7: norm drift over 100 steps on 12 sites {norm_drift:.3e} (tol 1e-10)");
    assert!(norm_drift < 1e-10);

    let walk8 = walk_example::<f64>(8).unwrap();
    let mut state = StateVector64::with_excitations(walk8.lattice(), &[0, 3]).unwrap();
    let mut number_drift = 0.0f64;
    for _ in 0..100 {
        walk8.step(&mut state).unwrap();
        let number: f64 = state.site_probabilities().iter().sum();
        number_drift = number_drift.max((number - 2.0).abs());
    }
    println!("criterion 7: block-walk particle-number drift {number_drift:.3e} (tol 1e-12)");
    assert!(number_drift < 1e-12);

    let exchange = flip_flop_example::<f64>(6).unwrap();
    let mut state = StateVector64::with_excitations(exchange.lattice(), &[0, 2]).unwrap();
    let mut number_drift = 0.0f64;
    for _ in 0..20 {
        exchange.exact_evolve(&mut state, 0.37).unwrap();
        let number: f64 = state.site_probabilities().iter().sum();
        number_drift = number_drift.max((number - 2.0).abs());
    }
    println!("criterion 7: exchange-chain particle-number drift {number_drift:.3e} (tol 1e-12)");
    assert!(number_drift < 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut state = random_state(exchange.lattice(), &mut rng);
    let initial_energy = exchange.energy(&state).unwrap();
    let mut energy_drift = 0.0f64;
    for _ in 0..10 {
        exchange.exact_evolve(&mut state, 0.4).unwrap();
        energy_drift =
            energy_drift.max((exchange.energy(&state).unwrap() - initial_energy).abs());
    }
    println!("criterion 7: energy drift under exact evolution {energy_drift:.3e} (tol 1e-10)");
    assert!(energy_drift < 1e-10);
}

#[test]
fn criterion_08_decompositions_reassemble_their_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(808);

    let mut worst_two = 0.0f64;
    for _ in 0..100 {
        let u = haar_unitary::<f64, _>(4, &mut rng);
        let seq = decompose_two_qubit(&LocalUnitary64::new(u.clone()).unwrap()).unwrap();
        worst_two = worst_two.max(max_abs_diff_up_to_phase(&u, &seq.dense()));
    }
    println!("criterion 8: worst 2-site reassembly error {worst_two:.3e} (tol 1e-8)");
    assert!(worst_two < 1e-8);

    let mut worst_three = 0.0f64;
    for _ in 0..10 {
        let u = haar_unitary::<f64, _>(8, &mut rng);
        let seq = decompose_block(&LocalUnitary64::new(u.clone()).unwrap()).unwrap();
        worst_three = worst_three.max(max_abs_diff_up_to_phase(&u, &seq.dense()));
    }
    println!("criterion 8: worst 3-site reassembly error {worst_three:.3e} (tol 1e-7)");
    assert!(worst_three < 1e-7);
}

#[test]
fn criterion_09_classical_rule_and_its_block_embedding() {
    let rows = eca_run(RuleTable::new(30), &BitRow::single_seed(11).unwrap(), 3);
    let expected = [
        "00000100000",
        "00001110000",
        "00011001000",
        "00110111100",
    ];
    for (row, want) in rows.iter().zip(expected) {
        assert_eq!(row.to_string(), want);
    }
    println!("criterion 9: rule-30 rows match the worked table");

    let lattice = Lattice::ring(6).unwrap();
    let (aligned, staggered) = staggered_pair(&lattice);
    let model = reversible_block_to_mqca::<f64>(
        &PRESET_BLOCK_PERMUTATION,
        lattice.clone(),
        aligned.clone(),
        staggered.clone(),
    )
    .unwrap();
    for basis in 0..64usize {
        let mut state = StateVector64::from_basis_index(&lattice, basis).unwrap();
        model.step(&mut state).unwrap();
        let expected = classical_block_step(
            basis,
            &PRESET_BLOCK_PERMUTATION,
            [aligned.blocks(), staggered.blocks()],
        );
        let reference = StateVector64::from_basis_index(&lattice, expected).unwrap();
        assert!(
            state.max_amp_diff(&reference) == 0.0,
            "basis state {basis} drifted from the classical image {expected}"
        );
    }
    println!("criterion 9: block embedding reproduces the classical map on all 64 basis states");
}

#[test]
fn criterion_10_kernel_agrees_with_the_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.gen_range(2..=8usize);
        let k = rng.gen_range(1..=3.min(n));
        let lattice = Lattice::ring(n).unwrap();
        let sites = random_sites(n, k, &mut rng);
        let u = haar_unitary::<f64, _>(1 << k, &mut rng);
        let state = random_state(&lattice, &mut rng);

        let mut fast = state.clone();
        fast.apply(&LocalUnitary64::new(u.clone()).unwrap(), &sites)
            .unwrap();
        let slow = apply_dense(&kron_embed(&u, &sites, n), &state);
        worst = worst.max(fast.max_amp_diff(&slow));
    }
    println!("criterion 10: worst kernel-vs-oracle deviation {worst:.3e} (tol 1e-12)");
    assert!(worst < 1e-12);
}
