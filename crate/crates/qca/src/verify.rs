//! Numerical checks on a model's one-step action: unitarity of the
//! assembled global operator, covariance under lattice translations,
//! information confinement to the declared radius, and agreement of
//! nested-region marginals reduced along two different paths.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::density::reduced_density;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::{eye, haar_state, max_abs, CMatrix};
use crate::model::Automaton;
use crate::scalar::Float;
use crate::state::StateVector;

/// Dense-assembly cap for global one-step operators.
pub const GLOBAL_CAP: usize = 12;

/// Number of random probe states appended to the single-excitation
/// basis probes.
pub const RANDOM_PROBES: usize = 5;

const PROBE_SEED: u64 = 7_040;

/// Dense one-step operator of a model, columns obtained by evolving
/// each basis state once.
#[derive(Debug, Clone)]
pub struct GlobalOperator<T: Float> {
    pub matrix: CMatrix<T>,
    pub source: String,
}

/// Outcome of a single check.
#[derive(Debug, Clone)]
pub struct CheckReport<T: Float> {
    pub name: String,
    pub deviation: T,
    pub tolerance: T,
    pub pass: bool,
}

impl<T: Float> CheckReport<T> {
    fn conclude(name: impl Into<String>, deviation: T, tolerance: T) -> Self {
        CheckReport {
            name: name.into(),
            deviation,
            tolerance,
            pass: deviation <= tolerance,
        }
    }
}

impl<T: Float> std::fmt::Display for CheckReport<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{:<24} deviation {:>12.3e}  tolerance {:>9.1e}  {}",
            self.name,
            num_traits::cast::ToPrimitive::to_f64(&self.deviation).unwrap_or(f64::NAN),
            num_traits::cast::ToPrimitive::to_f64(&self.tolerance).unwrap_or(f64::NAN),
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// The shared probe family: every single-excitation basis state plus
/// [`RANDOM_PROBES`] fixed-seed random states.
pub fn probe_states<T: Float>(lattice: &Lattice) -> Result<Vec<StateVector<T>>> {
    let n = lattice.num_sites();
    let mut probes = Vec::with_capacity(n + RANDOM_PROBES);
    for x in 0..n {
        probes.push(StateVector::with_excitations(lattice, &[x])?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    for _ in 0..RANDOM_PROBES {
        let v = haar_state::<T, _>(1usize << n, &mut rng);
        probes.push(StateVector::from_amplitudes(
            lattice,
            v.iter().copied().collect(),
        )?);
    }
    Ok(probes)
}

/// Assembles the dense one-step operator by evolving each basis state.
pub fn assemble_global<T: Float>(model: &dyn Automaton<T>) -> Result<GlobalOperator<T>> {
    let lattice = model.lattice();
    let n = lattice.num_sites();
    if n > GLOBAL_CAP {
        return Err(Error::resource(format!(
            "global operator needs {n} sites but the cap is {GLOBAL_CAP}"
        )));
    }
    let dim = 1usize << n;
    let mut matrix = CMatrix::<T>::zeros(dim, dim);
    for col in 0..dim {
        let mut s = StateVector::from_basis_index(lattice, col)?;
        model.step(&mut s)?;
        for (row, a) in s.amplitudes().iter().enumerate() {
            matrix[(row, col)] = *a;
        }
    }
    Ok(GlobalOperator { matrix, source: model.describe() })
}

/// Deviation of U†U from the identity.
pub fn check_unitarity<T: Float>(g: &GlobalOperator<T>, tol: T) -> CheckReport<T> {
    let dim = g.matrix.nrows();
    let dev = max_abs(&(g.matrix.adjoint() * &g.matrix - eye::<T>(dim)));
    CheckReport::conclude("unitarity", dev, tol)
}

/// Deviation between step-then-shift and shift-then-step over the
/// probe family. The shift must be a per-axis multiple of the model's
/// spatial period, since covariance only holds on that sublattice.
pub fn check_translation<T: Float>(
    model: &dyn Automaton<T>,
    shift: &[i64],
    tol: T,
) -> Result<CheckReport<T>> {
    let lattice = model.lattice();
    if shift.len() != lattice.dimension() {
        return Err(Error::usage(format!(
            "shift has {} components on a {}-dimensional lattice",
            shift.len(),
            lattice.dimension()
        )));
    }
    let period = model.spatial_period();
    for (axis, (&s, &p)) in shift.iter().zip(&period).enumerate() {
        if p == 0 || s.rem_euclid(p as i64) != 0 {
            return Err(Error::usage(format!(
                "shift component {s} on axis {axis} is not a multiple of the period {p}"
            )));
        }
    }
    let mut dev = T::zero();
    for probe in probe_states::<T>(lattice)? {
        let mut step_then_shift = probe.clone();
        model.step(&mut step_then_shift)?;
        let step_then_shift = step_then_shift.translated(shift);
        let mut shift_then_step = probe.translated(shift);
        model.step(&mut shift_then_step)?;
        dev = dev.max(step_then_shift.l2_diff(&shift_then_step));
    }
    let label = format!("translation[{shift:?}]");
    Ok(CheckReport::conclude(label, dev, tol))
}

/// Perturbs the vacuum at each site in turn and measures, after one
/// step, the largest single-site marginal difference at any site
/// farther than `claimed_radius` from the perturbation.
pub fn check_causality<T: Float>(
    model: &dyn Automaton<T>,
    claimed_radius: usize,
    tol: T,
) -> Result<CheckReport<T>> {
    let lattice = model.lattice();
    let n = lattice.num_sites();
    let mut reference = StateVector::vacuum(lattice)?;
    model.step(&mut reference)?;
    let mut dev = T::zero();
    for x in 0..n {
        let mut perturbed = StateVector::with_excitations(lattice, &[x])?;
        model.step(&mut perturbed)?;
        for y in 0..n {
            if lattice.distance(x, y) <= claimed_radius {
                continue;
            }
            let a = reduced_density(&reference, &[y])?;
            let b = reduced_density(&perturbed, &[y])?;
            dev = dev.max(a.trace_distance(&b)?);
        }
    }
    let label = format!("causality[r={claimed_radius}]");
    Ok(CheckReport::conclude(label, dev, tol))
}

/// For each nested pair A ⊆ B, evolves the probes one step, then
/// compares the A-marginal reduced directly from the state with the
/// A-marginal obtained by tracing B∖A out of the B-marginal.
pub fn check_consistency<T: Float>(
    model: &dyn Automaton<T>,
    regions: &[(Vec<usize>, Vec<usize>)],
    tol: T,
) -> Result<CheckReport<T>> {
    let lattice = model.lattice();
    for (a, b) in regions {
        if a.iter().any(|s| !b.contains(s)) {
            return Err(Error::usage(format!(
                "region {a:?} is not contained in {b:?}"
            )));
        }
        if b.len() > 6 {
            return Err(Error::usage(format!(
                "outer region {b:?} exceeds the 6-site marginal cap"
            )));
        }
    }
    let mut dev = T::zero();
    for probe in probe_states::<T>(lattice)? {
        let mut evolved = probe;
        model.step(&mut evolved)?;
        for (a, b) in regions {
            let direct = reduced_density(&evolved, a)?;
            let via_b = reduced_density(&evolved, b)?.partial_trace(a)?;
            dev = dev.max(direct.trace_distance(&via_b)?);
        }
    }
    Ok(CheckReport::conclude("consistency", dev, tol))
}

/// Every nested pair A ⊂ B of contiguous regions with |B| ≤ `max_b`,
/// a convenient default region family for [`check_consistency`].
pub fn nested_region_pairs(lattice: &Lattice, max_b: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let n = lattice.num_sites();
    let mut pairs = Vec::new();
    for start in 0..n {
        for b_len in 2..=max_b.min(n) {
            let b: Vec<usize> = (0..b_len)
                .map(|k| lattice.shifted(start, &offset_vec(lattice, k as i64)))
                .collect();
            for a_len in 1..b_len {
                let a = b[..a_len].to_vec();
                pairs.push((a, b.clone()));
            }
        }
    }
    pairs
}

fn offset_vec(lattice: &Lattice, amount: i64) -> Vec<i64> {
    let mut v = vec![0i64; lattice.dimension()];
    v[0] = amount;
    v
}
