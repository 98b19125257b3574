//! Randomized model-level checks: freshly drawn block and coloured
//! automata must satisfy the verifier's physical invariants, and the
//! classical engine must agree with lookup-table references.

mod common;

use common::{classical_block_step, random_state, reference_eca_step};
use proptest::prelude::*;
use qca::classical::{eca_run, reversible_block_to_mqca, BitRow, RuleTable};
use qca::linalg::haar_unitary;
use qca::model::Automaton;
use qca::mqca::Tiling;
use qca::verify::{assemble_global, check_causality, check_translation, check_unitarity};
use qca::{Lattice, MargolusQCA64, StateVector64};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_block_automaton(seed: u64) -> MargolusQCA64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lattice = Lattice::ring(8).unwrap();
    let aligned = Tiling::new(&lattice, &[2], &[0]).unwrap();
    let staggered = Tiling::new(&lattice, &[2], &[1]).unwrap();
    MargolusQCA64::new(
        lattice,
        aligned,
        staggered,
        haar_unitary::<f64, _>(4, &mut rng),
        haar_unitary::<f64, _>(4, &mut rng),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_block_automata_pass_the_verifier(seed in any::<u64>()) {
        let model = random_block_automaton(seed);
        let global = assemble_global(&model).unwrap();
        prop_assert!(check_unitarity(&global, 1e-10).pass);
        let period = model.spatial_period()[0] as i64;
        prop_assert!(check_translation(&model, &[period], 1e-10).unwrap().pass);
        prop_assert!(check_causality(&model, model.declared_radius(), 1e-10).unwrap().pass);
    }

    #[test]
    fn classical_rows_match_the_lookup_reference(
        rule in any::<u8>(),
        width in 3usize..16,
        steps in 1usize..12,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits: Vec<bool> = (0..width).map(|_| rng.gen()).collect();
        let rows = eca_run(RuleTable::new(rule), &BitRow::new(bits.clone()).unwrap(), steps);
        let mut reference = bits;
        for row in &rows[1..] {
            reference = reference_eca_step(rule, &reference);
            prop_assert_eq!(row.bits(), &reference[..]);
        }
    }
}

#[test]
fn embedded_permutation_blocks_track_the_classical_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(5117);
    let lattice = Lattice::ring(6).unwrap();
    let aligned = Tiling::new(&lattice, &[2], &[0]).unwrap();
    let staggered = Tiling::new(&lattice, &[2], &[1]).unwrap();

    for _ in 0..10 {
        let mut perm: Vec<usize> = (0..4).collect();
        perm.shuffle(&mut rng);
        let model = reversible_block_to_mqca::<f64>(
            &perm,
            lattice.clone(),
            aligned.clone(),
            staggered.clone(),
        )
        .unwrap();

        for basis in 0..64usize {
            let mut state = StateVector64::from_basis_index(&lattice, basis).unwrap();
            model.step(&mut state).unwrap();
            let expected =
                classical_block_step(basis, &perm, [aligned.blocks(), staggered.blocks()]);
            let reference =
                StateVector64::from_basis_index(&lattice, expected).unwrap();
            assert!(
                state.max_amp_diff(&reference) < 1e-12,
                "basis {basis} mapped wrongly under {perm:?}"
            );
        }
    }
}

#[test]
fn coloured_models_preserve_norm_over_long_runs() {
    let mut rng = ChaCha8Rng::seed_from_u64(9406);
    let model = qca::cqca::walk_cqca_example::<f64>(8).unwrap();
    let mut state = random_state(model.lattice(), &mut rng);
    for _ in 0..100 {
        model.step(&mut state).unwrap();
    }
    assert!((state.norm() - 1.0).abs() < 1e-10);
}
