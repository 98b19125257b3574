//! Model configuration documents: a strict TOML schema covering every
//! model kind, loaders that turn documents into runnable models, and
//! writers that turn models back into documents.

use std::collections::BTreeMap;
use std::fmt;

use qca::classical::{BitRow, RuleTable};
use qca::cqca::{ColouredQCA, Colouring, CountPredicate, FieldCondition, FieldControlledUnitary};
use qca::ctqca::{ContinuousQCA, CouplingMap, CtqcaSchedule, CtqcaSegment, TrotterOrder};
use qca::linalg::{hermiticity_deviation, unitarity_deviation};
use qca::model::{Automaton, ExactStepper, ScheduleStepper, TrotterStepper};
use qca::mqca::{MargolusQCA, Tiling};
use qca::scalar::C;
use qca::{
    CMatrix64, ColouredQCA64, ContinuousQCA64, Lattice, LocalUnitary64, MargolusQCA64,
    NeighbourhoodScheme, StateVector64,
};
use serde::{Deserialize, Serialize};

/// Load-time tolerance for unitarity and Hermiticity of configured
/// matrices.
const MATRIX_TOL: f64 = 1e-8;

/// Errors carrying the process exit code they map to.
#[derive(Debug)]
pub enum CliError {
    /// Exit 2: the document or command line could not be parsed.
    Parse(String),
    /// Exit 3: parsed fine but describes an invalid model or request.
    Validation(String),
    /// Exit 4: a size cap or environment limit was hit.
    Resource(String),
    /// Exit 5: the requested operation is not defined for this input.
    Unsupported(String),
    /// Exit 1: the requested checks ran and at least one failed.
    ChecksFailed(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::ChecksFailed(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Resource(_) => 4,
            CliError::Unsupported(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m)
            | CliError::Validation(m)
            | CliError::Resource(m)
            | CliError::Unsupported(m)
            | CliError::ChecksFailed(m) => write!(f, "{m}"),
        }
    }
}

impl From<qca::Error> for CliError {
    fn from(e: qca::Error) -> Self {
        match e {
            qca::Error::Config(_) | qca::Error::Usage(_) => CliError::Validation(e.to_string()),
            qca::Error::Resource(_) => CliError::Resource(e.to_string()),
            qca::Error::Unsupported(_) => CliError::Unsupported(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Resource(format!("i/o failure: {e}"))
    }
}

pub type CliResult<V> = Result<V, CliError>;

/// Complex matrix literal: rows of [re, im] pairs, row-major.
pub type MatrixSpec = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub lattice: LatticeSection,
    pub model: ModelSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<InitialStateSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<RunSection>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub dimension: usize,
    pub extents: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Mqca,
    Cqca,
    Ctqca,
    Eca,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Kind::Mqca => "mqca",
            Kind::Cqca => "cqca",
            Kind::Ctqca => "ctqca",
            Kind::Eca => "eca",
        };
        write!(f, "{name}")
    }
}

/// The model section: `kind` plus exactly the fields that kind needs.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: Kind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<BlocksSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub colour_pattern: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub colour_pattern_shape: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub neighbour_offsets: Option<Vec<Vec<i64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub declared_radius: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub substeps: Option<Vec<SubstepSpec>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<HamiltonianSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segments: Option<Vec<SegmentSpec>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embedding: Option<EmbeddingSpec>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BlocksSpec {
    pub shape: Vec<usize>,
    pub offset_a: Vec<i64>,
    pub offset_b: Vec<i64>,
    pub unitary_a: MatrixSpec,
    pub unitary_b: MatrixSpec,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SubstepSpec {
    pub target_colour: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conditions: Vec<ConditionSpec>,
    pub gate: MatrixSpec,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionSpec {
    pub colour: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpec {
    pub colour_pattern: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub colour_pattern_shape: Option<Vec<usize>>,
    pub neighbour_offsets: Vec<Vec<i64>>,
    pub couplings: Vec<CouplingSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub on_site: Vec<OnSiteSpec>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    pub colours: [usize; 2],
    pub matrix: MatrixSpec,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OnSiteSpec {
    pub colour: usize,
    pub matrix: MatrixSpec,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub duration: f64,
    pub hamiltonian: HamiltonianSpec,
}

/// Quantum witness for a classical rule configuration: a reversible
/// block permutation on its own (small, even) ring.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSpec {
    pub extents: Vec<usize>,
    pub permutation: Vec<usize>,
    pub block_shape: Vec<usize>,
    pub offset_a: Vec<i64>,
    pub offset_b: Vec<i64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStateSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bitstring: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub named: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<String>,
}

/// Built-in configurations, addressable by name wherever a config path
/// is accepted.
pub const PRESETS: [(&str, &str); 4] = [
    ("walk-mqca", include_str!("../presets/walk-mqca.toml")),
    ("walk-cqca", include_str!("../presets/walk-cqca.toml")),
    ("flipflop-ctqca", include_str!("../presets/flipflop-ctqca.toml")),
    ("rule30", include_str!("../presets/rule30.toml")),
];

pub fn preset_names() -> String {
    PRESETS
        .iter()
        .map(|(name, _)| *name)
        .collect::<Vec<_>>()
        .join(", ")
}

/// Resolves a config argument: a preset name first, a file path
/// otherwise.
pub fn load_config(arg: &str) -> CliResult<ModelConfig> {
    let text = match PRESETS.iter().find(|(name, _)| *name == arg) {
        Some((_, text)) => (*text).to_owned(),
        None => std::fs::read_to_string(arg).map_err(|e| {
            CliError::Parse(format!(
                "cannot read config '{arg}': {e} (available presets: {})",
                preset_names()
            ))
        })?,
    };
    parse_config(&text).map_err(|e| CliError::Parse(format!("in '{arg}': {e}")))
}

pub fn parse_config(text: &str) -> Result<ModelConfig, toml::de::Error> {
    toml::from_str(text)
}

pub fn write_config(config: &ModelConfig, path: &std::path::Path) -> CliResult<()> {
    let text = toml::to_string_pretty(config)
        .map_err(|e| CliError::Validation(format!("cannot serialize config: {e}")))?;
    std::fs::write(path, text)?;
    Ok(())
}

/// A fully constructed model, still paired with its document so runner
/// settings and the initial state stay available.
pub enum BuiltModel {
    Blocks(MargolusQCA64),
    Coloured(ColouredQCA64),
    Continuous(ContinuousQCA64),
    Schedule(CtqcaSchedule<f64>),
    Classical {
        rule: RuleTable,
        embedding: Option<MargolusQCA64>,
    },
}

impl BuiltModel {
    /// The stepping automaton this configuration runs: continuous
    /// models become exact or product-formula steppers depending on
    /// `run`, classical rules expose their reversible embedding.
    pub fn automaton(&self, run: &RunSection) -> CliResult<Box<dyn Automaton<f64>>> {
        match self {
            BuiltModel::Blocks(m) => Ok(Box::new(m.clone())),
            BuiltModel::Coloured(m) => Ok(Box::new(m.clone())),
            BuiltModel::Continuous(m) => {
                let dt = run.dt.ok_or_else(|| {
                    CliError::Validation(
                        "continuous models need run.dt (the duration of one step)".into(),
                    )
                })?;
                if dt <= 0.0 {
                    return Err(CliError::Validation("run.dt must be positive".into()));
                }
                match &run.order {
                    None => Ok(Box::new(ExactStepper { model: m.clone(), t_step: dt })),
                    Some(name) => {
                        let order = parse_order(name)?;
                        let params = qca::ctqca::TrotterParams::new(dt, order)?;
                        Ok(Box::new(TrotterStepper { model: m.clone(), params }))
                    }
                }
            }
            BuiltModel::Schedule(s) => {
                let lattice = s
                    .lattice()
                    .ok_or_else(|| CliError::Validation("schedule has no segments".into()))?
                    .clone();
                Ok(Box::new(ScheduleStepper { schedule: s.clone(), lattice }))
            }
            BuiltModel::Classical { embedding, .. } => match embedding {
                Some(m) => Ok(Box::new(m.clone())),
                None => Err(CliError::Validation(
                    "this operation steps a quantum model; add a [model.embedding] section to \
                     give the classical rule its reversible block witness"
                        .into(),
                )),
            },
        }
    }
}

pub fn parse_order(name: &str) -> CliResult<TrotterOrder> {
    match name {
        "first" => Ok(TrotterOrder::First),
        "strang" => Ok(TrotterOrder::Second),
        other => Err(CliError::Validation(format!(
            "run.order must be 'first' or 'strang', got '{other}'"
        ))),
    }
}

pub fn order_name(order: TrotterOrder) -> &'static str {
    match order {
        TrotterOrder::First => "first",
        TrotterOrder::Second => "strang",
    }
}

fn to_matrix(spec: &MatrixSpec, key: &str) -> CliResult<CMatrix64> {
    let n = spec.len();
    if n == 0 {
        return Err(CliError::Validation(format!("{key}: matrix has no rows")));
    }
    for (i, row) in spec.iter().enumerate() {
        if row.len() != n {
            return Err(CliError::Validation(format!(
                "{key}: row {i} has {} entries, expected {n} (square matrix)",
                row.len()
            )));
        }
    }
    Ok(CMatrix64::from_fn(n, n, |r, c| {
        C::new(spec[r][c][0], spec[r][c][1])
    }))
}

fn to_unitary(spec: &MatrixSpec, key: &str) -> CliResult<CMatrix64> {
    let m = to_matrix(spec, key)?;
    let dev = unitarity_deviation(&m);
    if dev > MATRIX_TOL {
        return Err(CliError::Validation(format!(
            "{key}: matrix is not unitary (deviation {dev:.3e}, tolerance {MATRIX_TOL:.0e})"
        )));
    }
    Ok(m)
}

fn to_hermitian(spec: &MatrixSpec, key: &str) -> CliResult<CMatrix64> {
    let m = to_matrix(spec, key)?;
    let dev = hermiticity_deviation(&m);
    if dev > MATRIX_TOL {
        return Err(CliError::Validation(format!(
            "{key}: matrix is not Hermitian (deviation {dev:.3e}, tolerance {MATRIX_TOL:.0e})"
        )));
    }
    Ok(m)
}

fn matrix_spec(m: &CMatrix64) -> MatrixSpec {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

fn build_lattice(section: &LatticeSection) -> CliResult<Lattice> {
    if section.extents.len() != section.dimension {
        return Err(CliError::Validation(format!(
            "lattice.extents has {} entries for dimension {}",
            section.extents.len(),
            section.dimension
        )));
    }
    Ok(Lattice::new(&section.extents)?)
}

fn reject(option_set: bool, key: &str, kind: Kind) -> CliResult<()> {
    if option_set {
        return Err(CliError::Validation(format!(
            "model.{key} is not valid for kind '{kind}'"
        )));
    }
    Ok(())
}

/// Constructs the model a document describes, validating matrices at
/// the load tolerance and rejecting fields that do not belong to the
/// declared kind.
pub fn build_model(config: &ModelConfig) -> CliResult<BuiltModel> {
    let lattice = build_lattice(&config.lattice)?;
    let m = &config.model;
    match m.kind {
        Kind::Mqca => {
            reject(m.colour_pattern.is_some(), "colour_pattern", m.kind)?;
            reject(m.substeps.is_some(), "substeps", m.kind)?;
            reject(m.hamiltonian.is_some(), "hamiltonian", m.kind)?;
            reject(m.segments.is_some(), "segments", m.kind)?;
            reject(m.rule.is_some(), "rule", m.kind)?;
            reject(m.embedding.is_some(), "embedding", m.kind)?;
            let blocks = m.blocks.as_ref().ok_or_else(|| {
                CliError::Validation("kind 'mqca' needs a [model.blocks] section".into())
            })?;
            let tiling_a = Tiling::new(&lattice, &blocks.shape, &blocks.offset_a)?;
            let tiling_b = Tiling::new(&lattice, &blocks.shape, &blocks.offset_b)?;
            let u_a = to_unitary(&blocks.unitary_a, "model.blocks.unitary_a")?;
            let u_b = to_unitary(&blocks.unitary_b, "model.blocks.unitary_b")?;
            Ok(BuiltModel::Blocks(MargolusQCA::new(
                lattice, tiling_a, tiling_b, u_a, u_b,
            )?))
        }
        Kind::Cqca => {
            reject(m.blocks.is_some(), "blocks", m.kind)?;
            reject(m.hamiltonian.is_some(), "hamiltonian", m.kind)?;
            reject(m.segments.is_some(), "segments", m.kind)?;
            reject(m.rule.is_some(), "rule", m.kind)?;
            reject(m.embedding.is_some(), "embedding", m.kind)?;
            let pattern = m.colour_pattern.as_ref().ok_or_else(|| {
                CliError::Validation("kind 'cqca' needs model.colour_pattern".into())
            })?;
            let colouring = build_colouring(pattern, m.colour_pattern_shape.as_deref())?;
            let offsets = m.neighbour_offsets.as_ref().ok_or_else(|| {
                CliError::Validation("kind 'cqca' needs model.neighbour_offsets".into())
            })?;
            let scheme = NeighbourhoodScheme::new(config.lattice.dimension, offsets)?;
            let substeps = m.substeps.as_ref().ok_or_else(|| {
                CliError::Validation("kind 'cqca' needs at least one [[model.substeps]]".into())
            })?;
            let mut schedule = Vec::new();
            for (i, spec) in substeps.iter().enumerate() {
                let gate = to_unitary(&spec.gate, &format!("model.substeps[{i}].gate"))?;
                let gate = LocalUnitary64::new(gate)?;
                let condition = build_condition(&spec.conditions)?;
                schedule.push(FieldControlledUnitary::new(spec.target_colour, condition, gate)?);
            }
            let mut model = ColouredQCA::new(lattice, scheme, colouring, schedule)?;
            if let Some(radius) = m.declared_radius {
                model = model.with_declared_radius(radius);
            }
            Ok(BuiltModel::Coloured(model))
        }
        Kind::Ctqca => {
            reject(m.blocks.is_some(), "blocks", m.kind)?;
            reject(m.colour_pattern.is_some(), "colour_pattern", m.kind)?;
            reject(m.substeps.is_some(), "substeps", m.kind)?;
            reject(m.rule.is_some(), "rule", m.kind)?;
            reject(m.embedding.is_some(), "embedding", m.kind)?;
            reject(m.declared_radius.is_some(), "declared_radius", m.kind)?;
            match (&m.hamiltonian, &m.segments) {
                (Some(h), None) => Ok(BuiltModel::Continuous(build_continuous(
                    &lattice,
                    config.lattice.dimension,
                    h,
                    "model.hamiltonian",
                )?)),
                (None, Some(segs)) => {
                    let mut segments = Vec::new();
                    for (i, seg) in segs.iter().enumerate() {
                        if seg.duration <= 0.0 {
                            return Err(CliError::Validation(format!(
                                "model.segments[{i}].duration must be positive"
                            )));
                        }
                        segments.push(CtqcaSegment {
                            duration: seg.duration,
                            model: build_continuous(
                                &lattice,
                                config.lattice.dimension,
                                &seg.hamiltonian,
                                &format!("model.segments[{i}]"),
                            )?,
                        });
                    }
                    if segments.is_empty() {
                        return Err(CliError::Validation(
                            "model.segments must not be empty".into(),
                        ));
                    }
                    Ok(BuiltModel::Schedule(CtqcaSchedule { segments }))
                }
                (Some(_), Some(_)) => Err(CliError::Validation(
                    "kind 'ctqca' takes either [model.hamiltonian] or [[model.segments]], not both"
                        .into(),
                )),
                (None, None) => Err(CliError::Validation(
                    "kind 'ctqca' needs a [model.hamiltonian] or [[model.segments]] section".into(),
                )),
            }
        }
        Kind::Eca => {
            reject(m.blocks.is_some(), "blocks", m.kind)?;
            reject(m.colour_pattern.is_some(), "colour_pattern", m.kind)?;
            reject(m.neighbour_offsets.is_some(), "neighbour_offsets", m.kind)?;
            reject(m.substeps.is_some(), "substeps", m.kind)?;
            reject(m.hamiltonian.is_some(), "hamiltonian", m.kind)?;
            reject(m.segments.is_some(), "segments", m.kind)?;
            reject(m.declared_radius.is_some(), "declared_radius", m.kind)?;
            if config.lattice.dimension != 1 {
                return Err(CliError::Validation(
                    "kind 'eca' runs on one-dimensional lattices".into(),
                ));
            }
            let rule = m.rule.ok_or_else(|| {
                CliError::Validation("kind 'eca' needs model.rule (0-255)".into())
            })?;
            let embedding = match &m.embedding {
                None => None,
                Some(spec) => Some(build_embedding(spec)?),
            };
            Ok(BuiltModel::Classical { rule: RuleTable::new(rule), embedding })
        }
    }
}

fn build_colouring(pattern: &[usize], shape: Option<&[usize]>) -> CliResult<Colouring> {
    match shape {
        Some(shape) => Ok(Colouring::new(shape, pattern)?),
        None => Ok(Colouring::cycle(pattern)?),
    }
}

fn build_condition(specs: &[ConditionSpec]) -> CliResult<FieldCondition> {
    let mut constraints = Vec::new();
    for spec in specs {
        let predicate = match (&spec.count, &spec.counts) {
            (Some(n), None) => CountPredicate::Equals(*n),
            (None, Some(list)) => CountPredicate::OneOf(list.clone()),
            (None, None) => {
                return Err(CliError::Validation(format!(
                    "condition on colour {} needs 'count' or 'counts'",
                    spec.colour
                )))
            }
            (Some(_), Some(_)) => {
                return Err(CliError::Validation(format!(
                    "condition on colour {} sets both 'count' and 'counts'",
                    spec.colour
                )))
            }
        };
        constraints.push((spec.colour, predicate));
    }
    Ok(FieldCondition::all_of(constraints))
}

fn build_continuous(
    lattice: &Lattice,
    dimension: usize,
    spec: &HamiltonianSpec,
    key: &str,
) -> CliResult<ContinuousQCA64> {
    let colouring = build_colouring(&spec.colour_pattern, spec.colour_pattern_shape.as_deref())?;
    let scheme = NeighbourhoodScheme::new(dimension, &spec.neighbour_offsets)?;
    let mut couplings = Vec::new();
    for (i, c) in spec.couplings.iter().enumerate() {
        let m = to_hermitian(&c.matrix, &format!("{key}.couplings[{i}].matrix"))?;
        couplings.push(((c.colours[0], c.colours[1]), m));
    }
    let mut on_site = Vec::new();
    for (i, o) in spec.on_site.iter().enumerate() {
        let m = to_hermitian(&o.matrix, &format!("{key}.on_site[{i}].matrix"))?;
        on_site.push((o.colour, m));
    }
    let map = CouplingMap::new(colouring, scheme, couplings, on_site)?;
    Ok(ContinuousQCA::new(lattice.clone(), map)?)
}

fn build_embedding(spec: &EmbeddingSpec) -> CliResult<MargolusQCA64> {
    let lattice = Lattice::new(&spec.extents)?;
    let tiling_a = Tiling::new(&lattice, &spec.block_shape, &spec.offset_a)?;
    let tiling_b = Tiling::new(&lattice, &spec.block_shape, &spec.offset_b)?;
    Ok(qca::classical::reversible_block_to_mqca(
        &spec.permutation,
        lattice,
        tiling_a,
        tiling_b,
    )?)
}

/// Resolves the initial-state section against a quantum lattice.
pub fn build_state(
    section: Option<&InitialStateSection>,
    lattice: &Lattice,
) -> CliResult<StateVector64> {
    let section = section.ok_or_else(|| {
        CliError::Validation("an [initial_state] section is required to run this model".into())
    })?;
    match (&section.bitstring, &section.named) {
        (Some(bits), None) => Ok(StateVector64::basis_state(lattice, bits)?),
        (None, Some(name)) => match name.as_str() {
            "vacuum" => Ok(StateVector64::vacuum(lattice)?),
            "single-seed" => {
                let centre = lattice.num_sites() / 2;
                Ok(StateVector64::with_excitations(lattice, &[centre])?)
            }
            other => Err(CliError::Validation(format!(
                "unknown named state '{other}' (expected 'vacuum' or 'single-seed')"
            ))),
        },
        (None, None) => Err(CliError::Validation(
            "initial_state needs 'bitstring' or 'named'".into(),
        )),
        (Some(_), Some(_)) => Err(CliError::Validation(
            "initial_state sets both 'bitstring' and 'named'".into(),
        )),
    }
}

/// Resolves the initial-state section for a classical rule.
pub fn build_row(section: Option<&InitialStateSection>, width: usize) -> CliResult<BitRow> {
    let section = section.ok_or_else(|| {
        CliError::Validation("an [initial_state] section is required to run this model".into())
    })?;
    match (&section.bitstring, &section.named) {
        (Some(bits), None) => {
            let row = BitRow::parse(bits)?;
            if row.width() != width {
                return Err(CliError::Validation(format!(
                    "initial_state.bitstring has {} cells but the lattice has {width}",
                    row.width()
                )));
            }
            Ok(row)
        }
        (None, Some(name)) => match name.as_str() {
            "vacuum" => Ok(BitRow::new(vec![false; width])?),
            "single-seed" => Ok(BitRow::single_seed(width)?),
            other => Err(CliError::Validation(format!(
                "unknown named state '{other}' (expected 'vacuum' or 'single-seed')"
            ))),
        },
        (None, None) => Err(CliError::Validation(
            "initial_state needs 'bitstring' or 'named'".into(),
        )),
        (Some(_), Some(_)) => Err(CliError::Validation(
            "initial_state sets both 'bitstring' and 'named'".into(),
        )),
    }
}

fn lattice_section(lattice: &Lattice) -> LatticeSection {
    LatticeSection {
        dimension: lattice.dimension(),
        extents: lattice.extents().to_vec(),
    }
}

fn empty_model_section(kind: Kind) -> ModelSection {
    ModelSection {
        kind,
        blocks: None,
        colour_pattern: None,
        colour_pattern_shape: None,
        neighbour_offsets: None,
        declared_radius: None,
        substeps: None,
        hamiltonian: None,
        segments: None,
        rule: None,
        embedding: None,
    }
}

fn colouring_fields(c: &Colouring) -> (Vec<usize>, Option<Vec<usize>>) {
    let pattern = c.pattern().to_vec();
    let shape = c.period().to_vec();
    if shape == [pattern.len()] {
        (pattern, None)
    } else {
        (pattern, Some(shape))
    }
}

/// Serializes a block-partitioned model back into a document.
pub fn blocks_to_config(
    m: &MargolusQCA64,
    initial_state: Option<InitialStateSection>,
    run: Option<RunSection>,
) -> ModelConfig {
    let mut section = empty_model_section(Kind::Mqca);
    section.blocks = Some(BlocksSpec {
        shape: m.tiling_a().block_shape().to_vec(),
        offset_a: m.tiling_a().offset().to_vec(),
        offset_b: m.tiling_b().offset().to_vec(),
        unitary_a: matrix_spec(m.unitary_a()),
        unitary_b: matrix_spec(m.unitary_b()),
    });
    ModelConfig {
        lattice: lattice_section(m.lattice()),
        model: section,
        initial_state,
        run,
    }
}

/// Serializes a coloured model back into a document.
pub fn coloured_to_config(
    m: &ColouredQCA64,
    initial_state: Option<InitialStateSection>,
    run: Option<RunSection>,
) -> ModelConfig {
    let mut section = empty_model_section(Kind::Cqca);
    let (pattern, shape) = colouring_fields(m.colouring());
    section.colour_pattern = Some(pattern);
    section.colour_pattern_shape = shape;
    section.neighbour_offsets = Some(m.neighbourhood().offsets().to_vec());
    let default_radius = (m.schedule().len() * m.neighbourhood().radius())
        .min(m.lattice().max_distance());
    if m.declared_radius() != default_radius {
        section.declared_radius = Some(m.declared_radius());
    }
    section.substeps = Some(
        m.schedule()
            .iter()
            .map(|op| SubstepSpec {
                target_colour: op.target_colour,
                conditions: op
                    .condition
                    .constraints()
                    .iter()
                    .map(|(colour, pred)| match pred {
                        CountPredicate::Any => ConditionSpec {
                            colour: *colour,
                            count: None,
                            counts: None,
                        },
                        CountPredicate::Equals(n) => ConditionSpec {
                            colour: *colour,
                            count: Some(*n),
                            counts: None,
                        },
                        CountPredicate::OneOf(list) => ConditionSpec {
                            colour: *colour,
                            count: None,
                            counts: Some(list.clone()),
                        },
                    })
                    .collect(),
                gate: matrix_spec(op.gate.matrix()),
            })
            .collect(),
    );
    ModelConfig {
        lattice: lattice_section(m.lattice()),
        model: section,
        initial_state,
        run,
    }
}

fn hamiltonian_spec(m: &ContinuousQCA64) -> HamiltonianSpec {
    let cm = m.coupling_map();
    let (pattern, shape) = colouring_fields(cm.colouring());
    let couplings: &BTreeMap<(usize, usize), CMatrix64> = cm.couplings();
    HamiltonianSpec {
        colour_pattern: pattern,
        colour_pattern_shape: shape,
        neighbour_offsets: cm.neighbourhood().offsets().to_vec(),
        couplings: couplings
            .iter()
            .map(|(&(a, b), matrix)| CouplingSpec {
                colours: [a, b],
                matrix: matrix_spec(matrix),
            })
            .collect(),
        on_site: cm
            .on_site()
            .iter()
            .map(|(&colour, matrix)| OnSiteSpec {
                colour,
                matrix: matrix_spec(matrix),
            })
            .collect(),
    }
}

/// Serializes a continuous model back into a document.
pub fn continuous_to_config(
    m: &ContinuousQCA64,
    initial_state: Option<InitialStateSection>,
    run: Option<RunSection>,
) -> ModelConfig {
    let mut section = empty_model_section(Kind::Ctqca);
    section.hamiltonian = Some(hamiltonian_spec(m));
    ModelConfig {
        lattice: lattice_section(m.lattice()),
        model: section,
        initial_state,
        run,
    }
}

/// Serializes a piecewise-constant schedule back into a document.
pub fn schedule_to_config(
    s: &CtqcaSchedule<f64>,
    initial_state: Option<InitialStateSection>,
    run: Option<RunSection>,
) -> CliResult<ModelConfig> {
    let lattice = s
        .lattice()
        .ok_or_else(|| CliError::Validation("schedule has no segments".into()))?;
    let mut section = empty_model_section(Kind::Ctqca);
    section.segments = Some(
        s.segments
            .iter()
            .map(|seg| SegmentSpec {
                duration: seg.duration,
                hamiltonian: hamiltonian_spec(&seg.model),
            })
            .collect(),
    );
    Ok(ModelConfig {
        lattice: lattice_section(lattice),
        model: section,
        initial_state,
        run,
    })
}
