//! Conversions between the coloured model and continuous-time
//! evolution.
//!
//! Forward, each substep of a coloured automaton becomes one segment of
//! a piecewise-constant Hamiltonian schedule: the substep's coherent
//! site operator is uniform across its colour class, its principal
//! logarithm is a two-body (or on-site) Hermitian coupling, and the
//! supports within one substep are pairwise disjoint, so the segment
//! exponential reproduces the substep exactly. Coupling maps key
//! interactions by unordered colour pairs, which cannot always tell a
//! bond from its mirror image under the source colouring; the segment
//! palette is refined cyclically until the keyed bonds are exactly the
//! intended ones, verified against the dense segment Hamiltonian.
//!
//! Backward, a continuous automaton is Trotterized: its bonds are
//! grouped into slices of disjoint supports keyed by residue and
//! distance, each slice exponential is synthesized into conditioned
//! single-site gates, and the slices are concatenated into one coloured
//! step per time step, first-order or symmetrized. The certificate
//! reports the worst trajectory deviation from exact evolution over the
//! requested horizon, which is the honest Trotter error rather than a
//! round-off figure.

use crate::cqca::{ColouredQCA, Colouring, CountPredicate, FieldCondition, FieldControlledUnitary};
use crate::ctqca::{
    add_embedded, swap_conjugate, ContinuousQCA, CouplingMap, CtqcaSchedule, CtqcaSegment,
    TrotterOrder,
};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, NeighbourhoodScheme};
use crate::linalg::{expm_minus_i_t, log_unitary, max_abs, CMatrix};
use crate::scalar::Float;
use crate::unitary::LocalUnitary;
use crate::verify::{assemble_global, GLOBAL_CAP};

use super::{certify_operators, decompose_two_qubit, Transpiled};

/// Longest certification horizon, in steps.
const MAX_CERTIFY_STEPS: usize = 10_000;

/// Compiles a coloured automaton into a Hamiltonian schedule whose
/// one-pass evolution equals the source step.
///
/// Each substep becomes one segment of duration `dt` generated by the
/// principal logarithm of its site operator, so the compiled dynamics
/// match exactly rather than to a product-formula error. Needs a ring,
/// substeps whose instances are uniform across their colour class with
/// at most one control site, and a lattice small enough for the dense
/// certification.
pub fn cqca_to_ctqca<T: Float>(
    source: &ColouredQCA<T>,
    dt: T,
) -> Result<Transpiled<CtqcaSchedule<T>, T>> {
    let lattice = source.lattice();
    if lattice.dimension() != 1 {
        return Err(Error::unsupported(
            "coloured-to-continuous conversion is implemented for rings only",
        ));
    }
    if dt <= T::zero() {
        return Err(Error::config("segment duration must be positive"));
    }
    let n = lattice.num_sites();
    if n > GLOBAL_CAP {
        return Err(Error::resource(format!(
            "coloured-to-continuous conversion certifies against the dense step operator and needs at most {GLOBAL_CAP} sites, got {n}"
        )));
    }
    let q = source.colouring().period()[0];

    let mut segments = Vec::new();
    for op in source.schedule() {
        let targets = source.colouring().sites_of_colour(lattice, op.target_colour);
        let mut instances = Vec::new();
        for &site in &targets {
            if let Some(inst) = source.site_operator(op, site) {
                instances.push(inst);
            }
        }
        if instances.is_empty() {
            continue;
        }
        if instances.len() != targets.len() {
            return Err(Error::unsupported(
                "substep condition is satisfiable at some sites of its colour only",
            ));
        }
        let gate = instances[0].1.clone();
        for (support, matrix) in &instances {
            if support.len() != instances[0].0.len()
                || max_abs(&(matrix - &gate)) > T::of(1e-12)
            {
                return Err(Error::unsupported(
                    "substep instances differ across their colour class",
                ));
            }
        }
        let h = log_unitary(&gate, dt)?;
        let segment = match instances[0].0.len() {
            1 => {
                let sites: Vec<usize> = instances.iter().map(|(s, _)| s[0]).collect();
                on_site_segment(lattice, q, &sites, &h, dt)?
            }
            2 => {
                let bonds: Vec<(usize, usize)> =
                    instances.iter().map(|(s, _)| (s[0], s[1])).collect();
                let wrap = |d: i64| {
                    let m = d.rem_euclid(n as i64);
                    if m > n as i64 / 2 {
                        m - n as i64
                    } else {
                        m
                    }
                };
                let delta = wrap(bonds[0].0 as i64 - bonds[0].1 as i64);
                for &(c, t) in &bonds {
                    if wrap(c as i64 - t as i64) != delta {
                        return Err(Error::unsupported(
                            "control offsets differ across the colour class",
                        ));
                    }
                }
                bond_segment(lattice, q, &bonds, delta, &h, dt)?
            }
            _ => {
                return Err(Error::unsupported(
                    "substeps with more than one control site have no two-body coupling form",
                ))
            }
        };
        segments.push(segment);
    }

    let schedule = CtqcaSchedule { segments };
    let u_source = assemble_global(source)?.matrix;
    let u_target = schedule.step_operator()?;
    let certification = certify_operators(lattice, &u_source, &u_target, 2)?;
    Ok(Transpiled { model: schedule, certification })
}

/// Cyclic palette sizes worth trying for one segment: multiples of the
/// source period that divide the ring, finest last.
fn palette_candidates(q: usize, n: usize) -> impl Iterator<Item = usize> {
    (1..=n / q).map(move |k| k * q).filter(move |p| n % p == 0)
}

/// Builds a segment holding `h` on each listed site, refining the
/// palette until the keyed sites are exactly the intended ones.
fn on_site_segment<T: Float>(
    lattice: &Lattice,
    q: usize,
    sites: &[usize],
    h: &CMatrix<T>,
    dt: T,
) -> Result<CtqcaSegment<T>> {
    let n = lattice.num_sites();
    let dim = 1usize << n;
    let mut expected = CMatrix::<T>::zeros(dim, dim);
    for &s in sites {
        add_embedded(&mut expected, n, h, &[s]);
    }
    for p in palette_candidates(q, n) {
        let mut residues: Vec<usize> = sites.iter().map(|s| s % p).collect();
        residues.sort_unstable();
        residues.dedup();
        let colouring = Colouring::cycle(&(0..p).collect::<Vec<_>>())?;
        let scheme = NeighbourhoodScheme::new(1, &[])?;
        let on_site = residues.iter().map(|&r| (r, h.clone())).collect();
        let Ok(map) = CouplingMap::new(colouring, scheme, vec![], on_site) else {
            continue;
        };
        let Ok(model) = ContinuousQCA::new(lattice.clone(), map) else {
            continue;
        };
        if max_abs(&(model.build_hamiltonian()? - &expected)) <= T::of(1e-10) {
            return Ok(CtqcaSegment { duration: dt, model });
        }
    }
    Err(Error::unsupported(
        "no cyclic palette isolates the substep's target sites",
    ))
}

/// Builds a segment holding `h` on each (control, target) bond, with
/// the control site as the matrix's leading tensor factor, refining the
/// palette until the keyed bonds are exactly the intended ones.
fn bond_segment<T: Float>(
    lattice: &Lattice,
    q: usize,
    bonds: &[(usize, usize)],
    delta: i64,
    h: &CMatrix<T>,
    dt: T,
) -> Result<CtqcaSegment<T>> {
    let n = lattice.num_sites();
    let dim = 1usize << n;
    let mut expected = CMatrix::<T>::zeros(dim, dim);
    for &(c, t) in bonds {
        add_embedded(&mut expected, n, h, &[c, t]);
    }
    'palette: for p in palette_candidates(q, n) {
        let mut couplings: Vec<((usize, usize), CMatrix<T>)> = Vec::new();
        for &(c, t) in bonds {
            let (rc, rt) = (c % p, t % p);
            if rc == rt {
                continue 'palette;
            }
            let key = (rc.min(rt), rc.max(rt));
            let m = if rc < rt { h.clone() } else { swap_conjugate(h) };
            match couplings.iter().find(|(k, _)| *k == key) {
                Some((_, existing)) => {
                    if max_abs(&(existing - &m)) > T::of(1e-12) {
                        continue 'palette;
                    }
                }
                None => couplings.push((key, m)),
            }
        }
        let colouring = Colouring::cycle(&(0..p).collect::<Vec<_>>())?;
        let scheme = NeighbourhoodScheme::new(1, &[vec![delta], vec![-delta]])?;
        let Ok(map) = CouplingMap::new(colouring, scheme, couplings, vec![]) else {
            continue;
        };
        let Ok(model) = ContinuousQCA::new(lattice.clone(), map) else {
            continue;
        };
        if max_abs(&(model.build_hamiltonian()? - &expected)) <= T::of(1e-10) {
            return Ok(CtqcaSegment { duration: dt, model });
        }
    }
    Err(Error::unsupported(
        "no cyclic palette separates the substep's bonds from their mirror images",
    ))
}

/// First-order Trotterization of a continuous automaton into a coloured
/// automaton; see [`ctqca_to_cqca_with_order`].
pub fn ctqca_to_cqca<T: Float>(
    source: &ContinuousQCA<T>,
    dt: T,
    total_t: T,
) -> Result<Transpiled<ColouredQCA<T>, T>> {
    ctqca_to_cqca_with_order(source, dt, total_t, TrotterOrder::First)
}

/// Trotterizes a continuous automaton into a coloured automaton whose
/// step approximates evolution by `dt`.
///
/// Bonds are grouped by residue and distance into slices of disjoint
/// supports under a cyclic colouring wide enough to give every
/// conditioned gate a unique control site; each slice exponential is
/// synthesized into conditioned single-site gates. The certificate runs
/// the compiled step against exact evolution for `total_t / dt` steps
/// and records the worst trajectory deviation, so it reports the actual
/// product-formula error at the chosen resolution.
pub fn ctqca_to_cqca_with_order<T: Float>(
    source: &ContinuousQCA<T>,
    dt: T,
    total_t: T,
    order: TrotterOrder,
) -> Result<Transpiled<ColouredQCA<T>, T>> {
    let lattice = source.lattice();
    if lattice.dimension() != 1 {
        return Err(Error::unsupported(
            "continuous-to-coloured conversion is implemented for rings only",
        ));
    }
    if dt <= T::zero() {
        return Err(Error::config("step duration must be positive"));
    }
    if total_t < T::zero() {
        return Err(Error::config("certification horizon must be non-negative"));
    }
    let n = lattice.num_sites();
    if n > GLOBAL_CAP {
        return Err(Error::resource(format!(
            "continuous-to-coloured conversion certifies against the dense step operator and needs at most {GLOBAL_CAP} sites, got {n}"
        )));
    }
    let cm = source.coupling_map();
    let q = cm.colouring().period()[0];
    let rho = cm.neighbourhood().radius();

    let mut palette = None;
    let mut k = 1;
    while k * q <= n {
        let p = k * q;
        if p >= 2 * rho + 1 && n % p == 0 {
            palette = Some(p);
            break;
        }
        k += 1;
    }
    let Some(p) = palette else {
        return Err(Error::unsupported(format!(
            "ring of {n} sites admits no colour period that is a multiple of {q}, at least {}, and divides the ring",
            2 * rho + 1
        )));
    };

    let colour_at = |site: usize| cm.colouring().colour_of(lattice, site % n);
    let mut distances: Vec<usize> = cm
        .neighbourhood()
        .nonzero_offsets()
        .filter_map(|o| {
            let m = o[0].rem_euclid(n as i64) as usize;
            let d = m.min(n - m);
            (d > 0).then_some(d)
        })
        .collect();
    distances.sort_unstable();
    distances.dedup();

    #[derive(Clone, Copy)]
    enum Slice {
        Bond { residue: usize, delta: usize },
        Site { residue: usize },
    }

    let mut slices = Vec::new();
    for &delta in &distances {
        for residue in 0..p {
            let (ca, cb) = (colour_at(residue), colour_at(residue + delta));
            if cm.couplings().contains_key(&(ca.min(cb), ca.max(cb))) {
                slices.push(Slice::Bond { residue, delta });
            }
        }
    }
    for residue in 0..p {
        if cm.on_site().contains_key(&colour_at(residue)) {
            slices.push(Slice::Site { residue });
        }
    }

    let emit = |slice: &Slice, tau: T| -> Result<Vec<FieldControlledUnitary<T>>> {
        match *slice {
            Slice::Site { residue } => {
                let h = &cm.on_site()[&colour_at(residue)];
                let u = expm_minus_i_t(h, tau);
                Ok(vec![FieldControlledUnitary::new(
                    residue,
                    FieldCondition::any(),
                    LocalUnitary::new(u)?,
                )?])
            }
            Slice::Bond { residue, delta } => {
                let (ca, cb) = (colour_at(residue), colour_at(residue + delta));
                let h = &cm.couplings()[&(ca.min(cb), ca.max(cb))];
                let partner = (residue + delta) % p;
                let role_residue = if ca <= cb {
                    [residue, partner]
                } else {
                    [partner, residue]
                };
                let u4 = expm_minus_i_t(h, tau);
                let seq = decompose_two_qubit(&LocalUnitary::new(u4)?)?;
                let mut out = Vec::with_capacity(seq.len());
                for op in seq.ops() {
                    let condition = if op.controls.is_empty() {
                        FieldCondition::any()
                    } else {
                        FieldCondition::all_of(
                            op.controls
                                .iter()
                                .map(|&(role, value)| {
                                    (role_residue[role], CountPredicate::Equals(usize::from(value)))
                                })
                                .collect(),
                        )
                    };
                    out.push(FieldControlledUnitary::new(
                        role_residue[op.target],
                        condition,
                        LocalUnitary::new(op.matrix.clone())?,
                    )?);
                }
                Ok(out)
            }
        }
    };

    let mut schedule = Vec::new();
    match order {
        TrotterOrder::First => {
            for slice in &slices {
                schedule.extend(emit(slice, dt)?);
            }
        }
        TrotterOrder::Second => {
            if slices.len() <= 1 {
                for slice in &slices {
                    schedule.extend(emit(slice, dt)?);
                }
            } else {
                let half = dt * T::of(0.5);
                let (head, tail) = slices.split_at(slices.len() - 1);
                for slice in head {
                    schedule.extend(emit(slice, half)?);
                }
                schedule.extend(emit(&tail[0], dt)?);
                for slice in head.iter().rev() {
                    schedule.extend(emit(slice, half)?);
                }
            }
        }
    }

    let colouring = Colouring::cycle(&(0..p).collect::<Vec<_>>())?;
    let scheme = NeighbourhoodScheme::ball(1, rho as i64);
    let model = ColouredQCA::new(lattice.clone(), scheme, colouring, schedule)?
        .with_declared_radius(source.trotter_radius(order));

    let steps = (total_t / dt)
        .to_f64()
        .map(|x| x.round() as usize)
        .unwrap_or(1)
        .max(1);
    if steps > MAX_CERTIFY_STEPS {
        return Err(Error::resource(format!(
            "certification horizon of {steps} steps exceeds the cap of {MAX_CERTIFY_STEPS}"
        )));
    }
    let u_exact = expm_minus_i_t(&source.build_hamiltonian()?, dt);
    let u_model = assemble_global(&model)?.matrix;
    let certification = certify_operators(lattice, &u_exact, &u_model, steps)?;
    Ok(Transpiled { model, certification })
}
