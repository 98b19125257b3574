//! The shipped presets against their generators: every preset must
//! parse, build, and agree with the library example it packages.
//!
//! `regenerate_presets` rewrites the preset files from the generators;
//! run it with `cargo test -p qca-cli -- --ignored regenerate` after
//! changing an example model or the config schema.

use std::path::PathBuf;
use std::process::Command;

use qca::cqca::walk_cqca_example;
use qca::ctqca::flip_flop_example;
use qca::linalg::max_abs;
use qca::model::Automaton;
use qca::mqca::walk_example;
use qca::verify::assemble_global;

use qca_cli::config::{
    blocks_to_config, build_model, coloured_to_config, continuous_to_config, parse_config,
    BuiltModel, InitialStateSection, ModelConfig, RunSection, PRESETS,
};

fn named(name: &str) -> InitialStateSection {
    InitialStateSection { bitstring: None, named: Some(name.to_owned()) }
}

fn bits(text: &str) -> InitialStateSection {
    InitialStateSection { bitstring: Some(text.to_owned()), named: None }
}

fn run(steps: usize, dt: Option<f64>) -> RunSection {
    RunSection { steps: Some(steps), dt, order: None }
}

/// The four shipped documents, rebuilt from the library examples.
fn generated_presets() -> Vec<(&'static str, ModelConfig)> {
    let walk = walk_example::<f64>(8).unwrap();
    let coloured = walk_cqca_example::<f64>(8).unwrap();
    let exchange = flip_flop_example::<f64>(6).unwrap();

    let mut rule30 = config_skeleton_eca();
    rule30.initial_state = Some(named("single-seed"));
    rule30.run = Some(run(3, None));

    vec![
        (
            "walk-mqca",
            blocks_to_config(&walk, Some(bits("00000001")), Some(run(10, None))),
        ),
        (
            "walk-cqca",
            coloured_to_config(&coloured, Some(bits("00000001")), Some(run(10, None))),
        ),
        (
            "flipflop-ctqca",
            continuous_to_config(&exchange, Some(bits("000001")), Some(run(10, Some(1.0)))),
        ),
        ("rule30", rule30),
    ]
}

fn config_skeleton_eca() -> ModelConfig {
    let text = r#"
[lattice]
dimension = 1
extents = [11]

[model]
kind = "eca"
rule = 30

[model.embedding]
extents = [6]
permutation = [0, 1, 3, 2]
block_shape = [2]
offset_a = [0]
offset_b = [1]
"#;
    parse_config(text).unwrap()
}

#[test]
fn presets_parse_build_and_match_their_generators() {
    for (name, expected) in generated_presets() {
        let text = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| *t)
            .unwrap();
        let parsed = parse_config(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let built = build_model(&parsed).unwrap_or_else(|e| panic!("{name}: {e}"));

        let regenerated = toml::to_string_pretty(&expected).unwrap();
        assert_eq!(
            text, regenerated,
            "{name}: shipped preset differs from its generator; rerun regenerate_presets"
        );

        if let BuiltModel::Classical { rule, embedding } = &built {
            assert_eq!(rule.number(), 30, "{name}");
            assert!(embedding.is_some(), "{name}: embedding lost in round trip");
        }
    }
}

#[test]
fn walk_presets_step_like_the_library_examples() {
    let mqca_text = PRESETS.iter().find(|(n, _)| *n == "walk-mqca").unwrap().1;
    let cqca_text = PRESETS.iter().find(|(n, _)| *n == "walk-cqca").unwrap().1;

    let reference_blocks = assemble_global(&walk_example::<f64>(8).unwrap())
        .unwrap()
        .matrix;
    let reference_coloured = assemble_global(&walk_cqca_example::<f64>(8).unwrap())
        .unwrap()
        .matrix;

    let BuiltModel::Blocks(blocks) = build_model(&parse_config(mqca_text).unwrap()).unwrap()
    else {
        panic!("walk-mqca is not a block model");
    };
    let BuiltModel::Coloured(coloured) = build_model(&parse_config(cqca_text).unwrap()).unwrap()
    else {
        panic!("walk-cqca is not a coloured model");
    };

    let blocks_global = assemble_global(&blocks as &dyn Automaton<f64>).unwrap().matrix;
    let coloured_global = assemble_global(&coloured as &dyn Automaton<f64>)
        .unwrap()
        .matrix;
    assert!(max_abs(&(blocks_global - reference_blocks)) < 1e-12);
    assert!(max_abs(&(coloured_global - reference_coloured)) < 1e-12);
    assert_eq!(coloured.declared_radius(), 2);
}

/// Rewrites the preset files from the generators. Ignored by default
/// because it mutates the source tree.
#[test]
#[ignore]
fn regenerate_presets() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("presets");
    for (name, config) in generated_presets() {
        let text = toml::to_string_pretty(&config).unwrap();
        std::fs::write(dir.join(format!("{name}.toml")), text).unwrap();
    }
}

#[test]
fn every_preset_name_resolves_through_the_binary() {
    for (name, _) in PRESETS {
        let output = Command::new(env!("CARGO_BIN_EXE_qca"))
            .args(["run", name, "--steps", "1"])
            .output()
            .unwrap();
        assert!(
            output.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&output.stderr)
        );
    }
}
