//! Command-line front end: run configured models, compare their
//! trajectories, convert between model kinds, verify physical
//! invariants, and print classical rule evolutions.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use qca_cli::config;
use qca_cli::config::{
    blocks_to_config, build_model, build_row, build_state, coloured_to_config, load_config,
    parse_order, schedule_to_config, BuiltModel, CliError, CliResult, Kind, ModelConfig,
    RunSection,
};
use qca::classical::{eca_step, BitRow, RuleTable};
use qca::model::Automaton;
use qca::scalar::C;
use qca::transpile::{cqca_to_ctqca, cqca_to_mqca, ctqca_to_cqca_with_order, mqca_to_cqca};
use qca::verify::{
    assemble_global, check_causality, check_consistency, check_translation, check_unitarity,
    nested_region_pairs, CheckReport,
};
use qca::ctqca::TrotterOrder;
use qca::StateVector64;

#[derive(Parser)]
#[command(
    name = "qca",
    version,
    about = "Simulate, convert, and verify quantum cellular automata",
    after_help = "CONFIG accepts a TOML file path or a preset name \
                  (walk-mqca, walk-cqca, flipflop-ctqca, rule30)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a model and write its site-occupation trajectory as CSV.
    Run {
        /// Config file path or preset name.
        config: String,
        /// Number of steps; overrides run.steps from the config.
        #[arg(long)]
        steps: Option<usize>,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write per-step amplitudes next to the trajectory.
        #[arg(long, requires = "out")]
        dump_amplitudes: bool,
    },
    /// Evolve two models from the first config's initial state and
    /// report the per-step probability deviation.
    Compare {
        config_a: String,
        config_b: String,
        /// Number of steps; overrides run.steps from the first config.
        #[arg(long)]
        steps: Option<usize>,
        /// Largest acceptable per-site probability deviation.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Convert a model to another kind and write the target config.
    Transpile {
        /// Source kind; must match the config.
        #[arg(long)]
        from: Kind,
        /// Target kind.
        #[arg(long)]
        to: Kind,
        /// Config file path or preset name.
        config: String,
        /// Where to write the converted config.
        #[arg(long)]
        out: PathBuf,
        /// Segment or product-formula step duration, where the
        /// direction needs one.
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Check unitarity, translation covariance, causality, and marginal
    /// consistency of a configured model.
    Verify {
        /// Config file path or preset name.
        config: String,
        /// Comma-separated subset of checks to run.
        #[arg(long, value_delimiter = ',')]
        checks: Vec<CheckName>,
        /// Tolerance applied to every check.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Print a classical rule evolution as '.'/'#' rows, optionally
    /// writing the same trajectory as CSV.
    Eca {
        /// Config file path or preset name (kind must be eca).
        config: String,
        /// Number of steps; overrides run.steps from the config.
        #[arg(long)]
        steps: Option<usize>,
        /// Output CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckName {
    Unitarity,
    Translation,
    Causality,
    Consistency,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, steps, out, dump_amplitudes } => {
            cmd_run(&config, steps, out.as_deref(), dump_amplitudes)
        }
        Command::Compare { config_a, config_b, steps, tol } => {
            cmd_compare(&config_a, &config_b, steps, tol)
        }
        Command::Transpile { from, to, config, out, dt } => {
            cmd_transpile(from, to, &config, &out, dt)
        }
        Command::Verify { config, checks, tol } => cmd_verify(&config, &checks, tol),
        Command::Eca { config, steps, out } => cmd_eca(&config, steps, out.as_deref()),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.code());
    }
}

/// One evolving trajectory, quantum or classical, with a uniform
/// occupation-probability view.
enum Evolution {
    Quantum {
        automaton: Box<dyn Automaton<f64>>,
        state: StateVector64,
    },
    Classical {
        rule: RuleTable,
        row: BitRow,
    },
}

impl Evolution {
    fn from_config(config: &ModelConfig) -> CliResult<Self> {
        let model = build_model(config)?;
        let run = config.run.clone().unwrap_or_default();
        match model {
            BuiltModel::Classical { rule, .. } => {
                let width = config.lattice.extents[0];
                let row = build_row(config.initial_state.as_ref(), width)?;
                Ok(Evolution::Classical { rule, row })
            }
            other => {
                let automaton = other.automaton(&run)?;
                let state = build_state(config.initial_state.as_ref(), automaton.lattice())?;
                Ok(Evolution::Quantum { automaton, state })
            }
        }
    }

    fn extents(&self) -> Vec<usize> {
        match self {
            Evolution::Quantum { automaton, .. } => automaton.lattice().extents().to_vec(),
            Evolution::Classical { row, .. } => vec![row.width()],
        }
    }

    fn probabilities(&self) -> Vec<f64> {
        match self {
            Evolution::Quantum { state, .. } => state.site_probabilities(),
            Evolution::Classical { row, .. } => {
                row.bits().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
            }
        }
    }

    fn amplitudes(&self) -> Option<Vec<C<f64>>> {
        match self {
            Evolution::Quantum { state, .. } => Some(state.amplitudes().to_vec()),
            Evolution::Classical { .. } => None,
        }
    }

    fn advance(&mut self) -> CliResult<()> {
        match self {
            Evolution::Quantum { automaton, state } => {
                automaton.step(state)?;
                Ok(())
            }
            Evolution::Classical { rule, row } => {
                *row = eca_step(*rule, row);
                Ok(())
            }
        }
    }
}

fn resolve_steps(flag: Option<usize>, run: &Option<RunSection>) -> CliResult<usize> {
    flag.or_else(|| run.as_ref().and_then(|r| r.steps)).ok_or_else(|| {
        CliError::Validation("step count required: pass --steps or set run.steps".into())
    })
}

fn format_probability_rows(out: &mut String, step: usize, probabilities: &[f64]) {
    use std::fmt::Write as _;
    for (site, p) in probabilities.iter().enumerate() {
        let _ = writeln!(out, "{step},{site},{p:.16e}");
    }
}

fn write_output(path: Option<&Path>, content: &str) -> CliResult<()> {
    match path {
        Some(path) => {
            std::fs::write(path, content)?;
            Ok(())
        }
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
            Ok(())
        }
    }
}

fn cmd_run(
    config_arg: &str,
    steps_flag: Option<usize>,
    out: Option<&Path>,
    dump_amplitudes: bool,
) -> CliResult<()> {
    let config = load_config(config_arg)?;
    let steps = resolve_steps(steps_flag, &config.run)?;
    let mut evolution = Evolution::from_config(&config)?;
    if dump_amplitudes && matches!(evolution, Evolution::Classical { .. }) {
        return Err(CliError::Validation(
            "--dump-amplitudes needs a quantum model".into(),
        ));
    }

    let mut csv = String::from("step,site,p1\n");
    let mut amps = String::from("step,index,re,im\n");
    let mut record = |step: usize, evolution: &Evolution| {
        format_probability_rows(&mut csv, step, &evolution.probabilities());
        if dump_amplitudes {
            if let Some(amplitudes) = evolution.amplitudes() {
                use std::fmt::Write as _;
                for (index, a) in amplitudes.iter().enumerate() {
                    let _ = writeln!(amps, "{step},{index},{:.16e},{:.16e}", a.re, a.im);
                }
            }
        }
    };

    record(0, &evolution);
    for step in 1..=steps {
        evolution.advance()?;
        record(step, &evolution);
    }

    write_output(out, &csv)?;
    if dump_amplitudes {
        let path = out.expect("clap enforces --out with --dump-amplitudes");
        std::fs::write(amplitude_path(path), amps)?;
    }
    Ok(())
}

fn amplitude_path(out: &Path) -> PathBuf {
    out.with_extension("amps.csv")
}

fn cmd_compare(
    config_a: &str,
    config_b: &str,
    steps_flag: Option<usize>,
    tol: f64,
) -> CliResult<()> {
    let doc_a = load_config(config_a)?;
    let mut doc_b = load_config(config_b)?;
    doc_b.initial_state = doc_a.initial_state.clone();
    let steps = resolve_steps(steps_flag, &doc_a.run)?;

    let mut a = Evolution::from_config(&doc_a)?;
    let mut b = Evolution::from_config(&doc_b)?;
    if a.extents() != b.extents() {
        return Err(CliError::Validation(format!(
            "lattice mismatch: {:?} vs {:?}",
            a.extents(),
            b.extents()
        )));
    }

    let mut worst = 0.0f64;
    for step in 1..=steps {
        a.advance()?;
        b.advance()?;
        let dev = a
            .probabilities()
            .iter()
            .zip(b.probabilities())
            .map(|(pa, pb)| (pa - pb).abs())
            .fold(0.0f64, f64::max);
        println!("step {step}: max per-site deviation {dev:.3e}");
        worst = worst.max(dev);
    }
    if worst > tol {
        return Err(CliError::ChecksFailed(format!(
            "max deviation {worst:.3e} exceeds tolerance {tol:.1e}"
        )));
    }
    println!("max deviation {worst:.3e} within tolerance {tol:.1e}");
    Ok(())
}

fn cmd_transpile(
    from: Kind,
    to: Kind,
    config_arg: &str,
    out: &Path,
    dt: Option<f64>,
) -> CliResult<()> {
    let config = load_config(config_arg)?;
    if config.model.kind != from {
        return Err(CliError::Validation(format!(
            "config '{config_arg}' is kind '{}' but --from says '{from}'",
            config.model.kind
        )));
    }
    let model = build_model(&config)?;
    let initial_state = config.initial_state.clone();

    let (target, certification) = match (model, to) {
        (BuiltModel::Blocks(m), Kind::Cqca) => {
            let compiled = mqca_to_cqca(&m)?;
            (
                coloured_to_config(&compiled.model, initial_state, config.run.clone()),
                compiled.certification,
            )
        }
        (BuiltModel::Coloured(m), Kind::Mqca) => {
            let compiled = cqca_to_mqca(&m)?;
            (
                blocks_to_config(&compiled.model, initial_state, config.run.clone()),
                compiled.certification,
            )
        }
        (BuiltModel::Coloured(m), Kind::Ctqca) => {
            let dt = dt.ok_or_else(|| {
                CliError::Parse("--dt is required for cqca -> ctqca (segment duration)".into())
            })?;
            let compiled = cqca_to_ctqca(&m, dt)?;
            let run = RunSection { steps: config.run.as_ref().and_then(|r| r.steps), dt: None, order: None };
            (
                schedule_to_config(&compiled.model, initial_state, Some(run))?,
                compiled.certification,
            )
        }
        (BuiltModel::Continuous(m), Kind::Cqca) => {
            let dt = dt.ok_or_else(|| {
                CliError::Parse(
                    "--dt is required for ctqca -> cqca (product-formula step duration)".into(),
                )
            })?;
            let steps = config.run.as_ref().and_then(|r| r.steps).ok_or_else(|| {
                CliError::Validation(
                    "run.steps is required for ctqca -> cqca (certification horizon)".into(),
                )
            })?;
            let order = match config.run.as_ref().and_then(|r| r.order.as_deref()) {
                None => TrotterOrder::First,
                Some(name) => parse_order(name)?,
            };
            let compiled = ctqca_to_cqca_with_order(&m, dt, dt * steps as f64, order)?;
            (
                coloured_to_config(&compiled.model, initial_state, config.run.clone()),
                compiled.certification,
            )
        }
        (BuiltModel::Continuous(_) | BuiltModel::Schedule(_), Kind::Mqca) => {
            return Err(CliError::Unsupported(
                "no direct ctqca -> mqca conversion; transpile ctqca -> cqca first, then \
                 cqca -> mqca"
                    .into(),
            ));
        }
        (BuiltModel::Blocks(_), Kind::Ctqca) => {
            return Err(CliError::Unsupported(
                "no direct mqca -> ctqca conversion; transpile mqca -> cqca first, then \
                 cqca -> ctqca"
                    .into(),
            ));
        }
        (BuiltModel::Classical { .. }, _) | (_, Kind::Eca) => {
            return Err(CliError::Unsupported(
                "classical rules are not transpiler targets; reversible rules embed through \
                 the [model.embedding] section instead"
                    .into(),
            ));
        }
        (BuiltModel::Schedule(_), Kind::Cqca | Kind::Ctqca) => {
            return Err(CliError::Unsupported(
                "piecewise schedules are conversion outputs only; configure the continuous \
                 model with [model.hamiltonian] to convert it"
                    .into(),
            ));
        }
        (BuiltModel::Blocks(_), Kind::Mqca)
        | (BuiltModel::Coloured(_), Kind::Cqca)
        | (BuiltModel::Continuous(_), Kind::Ctqca) => {
            return Err(CliError::Unsupported(format!(
                "config is already kind '{to}'"
            )));
        }
    };

    config::write_config(&target, out)?;
    println!("{certification}");
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_verify(config_arg: &str, checks: &[CheckName], tol: f64) -> CliResult<()> {
    let config = load_config(config_arg)?;
    let model = build_model(&config)?;
    let run = config.run.clone().unwrap_or_default();
    let automaton = match &model {
        BuiltModel::Classical { embedding, .. } => match embedding {
            Some(m) => Box::new(m.clone()) as Box<dyn Automaton<f64>>,
            None => {
                return Err(CliError::Validation(
                    "verification of a classical rule checks its reversible block witness; \
                     add a [model.embedding] section"
                        .into(),
                ))
            }
        },
        other => other.automaton(&run)?,
    };
    let model = automaton.as_ref();

    let selected = |name: CheckName| checks.is_empty() || checks.contains(&name);
    let mut reports: Vec<CheckReport<f64>> = Vec::new();
    if selected(CheckName::Unitarity) {
        let global = assemble_global(model)?;
        reports.push(check_unitarity(&global, tol));
    }
    if selected(CheckName::Translation) {
        let shift: Vec<i64> = model.spatial_period().iter().map(|&p| p as i64).collect();
        reports.push(check_translation(model, &shift, tol)?);
    }
    if selected(CheckName::Causality) {
        reports.push(check_causality(model, model.declared_radius(), tol)?);
    }
    if selected(CheckName::Consistency) {
        let pairs = nested_region_pairs(model.lattice(), 3);
        reports.push(check_consistency(model, &pairs, tol)?);
    }

    for report in &reports {
        println!("{report}");
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        return Err(CliError::ChecksFailed(format!(
            "{failed} of {} checks failed",
            reports.len()
        )));
    }
    Ok(())
}

fn cmd_eca(config_arg: &str, steps_flag: Option<usize>, out: Option<&Path>) -> CliResult<()> {
    let config = load_config(config_arg)?;
    if config.model.kind != Kind::Eca {
        return Err(CliError::Validation(format!(
            "the eca command needs kind 'eca', got '{}'",
            config.model.kind
        )));
    }
    let steps = resolve_steps(steps_flag, &config.run)?;
    let BuiltModel::Classical { rule, .. } = build_model(&config)? else {
        unreachable!("kind was checked above");
    };
    let width = config.lattice.extents[0];
    let mut row = build_row(config.initial_state.as_ref(), width)?;

    let mut csv = String::from("step,site,p1\n");
    let mut art = String::new();
    for step in 0..=steps {
        if step > 0 {
            row = eca_step(rule, &row);
        }
        art.push_str(&row.art());
        art.push('\n');
        let bits: Vec<f64> = row.bits().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        format_probability_rows(&mut csv, step, &bits);
    }

    print!("{art}");
    if let Some(path) = out {
        std::fs::write(path, csv)?;
    }
    Ok(())
}
