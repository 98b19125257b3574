//! Conversions between the block-partitioned and coloured models.
//!
//! Forward, a block automaton with equal-size one-dimensional blocks
//! becomes a coloured automaton: a colouring of twice the block size
//! separates the two staggered tilings into anchor classes, each block
//! unitary is decomposed into conditioned single-site gates, and every
//! gate is replayed once per anchor class with its roles shifted onto
//! the class colours. Blocks of one tiling are disjoint, so replaying
//! the classes in sequence reproduces the parallel block product
//! exactly.
//!
//! Backward, a coloured automaton is searched for a staggered two-
//! tiling structure: every substep instance must sit inside a block of
//! one candidate tiling, per-block products must be uniform across each
//! tiling, and the assembled block automaton must reproduce the full
//! step operator on a dense comparison. The dense check is what makes
//! the reordering of substeps into tiling order honest, and caps the
//! conversion at the global-operator size limit.

use crate::cqca::{ColouredQCA, Colouring, CountPredicate, FieldCondition, FieldControlledUnitary};
use crate::error::{Error, Result};
use crate::lattice::NeighbourhoodScheme;
use crate::linalg::{eye, max_abs, CMatrix};
use crate::mqca::{MargolusQCA, Tiling};
use crate::scalar::Float;
use crate::unitary::LocalUnitary;
use crate::verify::{assemble_global, GLOBAL_CAP};

use super::{certify, decompose_block, embed_operator, Transpiled};

/// Compiles a block automaton into a coloured automaton with identical
/// step dynamics.
///
/// Needs a one-dimensional lattice, equal block sizes s ≤ 4 in both
/// tilings, and a ring length divisible by 2s. The result uses the
/// 2s-periodic colouring, a neighbourhood ball of radius s−1, and one
/// schedule entry per decomposed gate per anchor class; its declared
/// radius is inherited from the source, which realizes the same global
/// step.
pub fn mqca_to_cqca<T: Float>(
    source: &MargolusQCA<T>,
) -> Result<Transpiled<ColouredQCA<T>, T>> {
    let report = source.validate();
    if !report.all_passed() {
        return Err(Error::usage(
            "conversion needs a model that passes its definition checks",
        ));
    }
    let lattice = source.lattice();
    if lattice.dimension() != 1 {
        return Err(Error::unsupported(
            "block-to-coloured conversion is implemented for rings only",
        ));
    }
    let s = source.tiling_a().block_size();
    if source.tiling_b().block_size() != s {
        return Err(Error::unsupported(
            "block-to-coloured conversion needs equal block sizes in both tilings",
        ));
    }
    let n = lattice.num_sites();
    if n % (2 * s) != 0 {
        return Err(Error::unsupported(format!(
            "ring length {n} is not a multiple of twice the block size {s}"
        )));
    }

    let palette = 2 * s;
    let colours: Vec<usize> = (0..palette).collect();
    let colouring = Colouring::cycle(&colours)?;
    let scheme = NeighbourhoodScheme::ball(1, s as i64 - 1);

    let seq_a = decompose_block(&LocalUnitary::new(source.unitary_a().clone())?)?;
    let seq_b = decompose_block(&LocalUnitary::new(source.unitary_b().clone())?)?;

    let mut schedule = Vec::new();
    for (tiling, seq) in [(source.tiling_a(), &seq_a), (source.tiling_b(), &seq_b)] {
        let mut anchors: Vec<usize> = tiling.blocks().iter().map(|blk| blk[0] % palette).collect();
        anchors.sort_unstable();
        anchors.dedup();
        for &anchor in &anchors {
            for op in seq.ops() {
                let target_colour = (anchor + op.target) % palette;
                let constraints = op
                    .controls
                    .iter()
                    .map(|&(role, value)| {
                        ((anchor + role) % palette, CountPredicate::Equals(usize::from(value)))
                    })
                    .collect();
                schedule.push(FieldControlledUnitary::new(
                    target_colour,
                    FieldCondition::all_of(constraints),
                    LocalUnitary::new(op.matrix.clone())?,
                )?);
            }
        }
    }

    let model = ColouredQCA::new(lattice.clone(), scheme, colouring, schedule)?
        .with_declared_radius(source.declared_radius());
    let certification = certify(source, &model, 3)?;
    Ok(Transpiled { model, certification })
}

/// One applied substep: the sites it acts on (controls first, matching
/// the matrix's bit order) and its dense coherent operator.
struct Instance<T: Float> {
    support: Vec<usize>,
    matrix: CMatrix<T>,
}

/// Length of the shortest contiguous ring window covering `support`.
fn ring_span(support: &[usize], n: usize) -> usize {
    if support.len() <= 1 {
        return support.len();
    }
    let mut pos = support.to_vec();
    pos.sort_unstable();
    let mut max_gap = 0usize;
    for (w, &cur) in pos.iter().enumerate() {
        let next = pos[(w + 1) % pos.len()];
        let gap = (next + n - cur) % n;
        max_gap = max_gap.max(gap);
    }
    n - max_gap + 1
}

/// Recovers a staggered two-tiling block automaton from a coloured
/// automaton, when one exists.
///
/// Tries every block length dividing the ring and every stagger, and
/// cuts the flattened substep sequence at every point that leaves a
/// prefix contained in one tiling and a suffix contained in the other.
/// Each cut accumulates per-block products, which must be uniform
/// across their tiling, and a candidate is accepted only if the
/// assembled block automaton reproduces the source's full step
/// operator entrywise. Sources whose substep supports straddle every
/// candidate partition, or whose substep order admits no such cut,
/// are reported as unsupported.
pub fn cqca_to_mqca<T: Float>(
    source: &ColouredQCA<T>,
) -> Result<Transpiled<MargolusQCA<T>, T>> {
    let lattice = source.lattice();
    if lattice.dimension() != 1 {
        return Err(Error::unsupported(
            "coloured-to-block conversion is implemented for rings only",
        ));
    }
    let n = lattice.num_sites();
    if n > GLOBAL_CAP {
        return Err(Error::resource(format!(
            "coloured-to-block conversion checks the dense step operator and needs at most {GLOBAL_CAP} sites, got {n}"
        )));
    }

    let mut instances: Vec<Instance<T>> = Vec::new();
    for op in source.schedule() {
        for site in source.colouring().sites_of_colour(lattice, op.target_colour) {
            if let Some((support, matrix)) = source.site_operator(op, site) {
                instances.push(Instance { support, matrix });
            }
        }
    }
    let max_span = instances
        .iter()
        .map(|inst| ring_span(&inst.support, n))
        .max()
        .unwrap_or(1);

    let source_global = assemble_global(source)?.matrix;

    for block_len in 2..=n / 2 {
        if n % block_len != 0 || block_len < max_span {
            continue;
        }
        for stagger in 1..block_len {
            if let Some(found) =
                try_candidate(source, &instances, block_len, stagger as i64, &source_global)?
            {
                let certification = certify(source, &found, 3)?;
                return Ok(Transpiled { model: found, certification });
            }
        }
    }
    Err(Error::unsupported(
        "no staggered block partition reproduces the schedule: substep supports straddle every candidate tiling or their order cannot be regrouped into two block passes",
    ))
}

/// Tests one (block length, stagger) candidate in both tiling orders;
/// Ok(None) means the candidate fails benignly.
fn try_candidate<T: Float>(
    source: &ColouredQCA<T>,
    instances: &[Instance<T>],
    block_len: usize,
    stagger: i64,
    source_global: &CMatrix<T>,
) -> Result<Option<MargolusQCA<T>>> {
    let lattice = source.lattice();
    let aligned = Tiling::new(lattice, &[block_len], &[0])?;
    let staggered = Tiling::new(lattice, &[block_len], &[stagger])?;
    for (first, second) in [(&aligned, &staggered), (&staggered, &aligned)] {
        if let Some(model) = try_split(source, instances, first, second, source_global)? {
            return Ok(Some(model));
        }
    }
    Ok(None)
}

/// Searches for a cut of the substep sequence whose prefix lands in
/// `tiling_a` and suffix in `tiling_b`; Ok(None) means no cut works.
fn try_split<T: Float>(
    source: &ColouredQCA<T>,
    instances: &[Instance<T>],
    tiling_a: &Tiling,
    tiling_b: &Tiling,
    source_global: &CMatrix<T>,
) -> Result<Option<MargolusQCA<T>>> {
    let locate = |tiling: &Tiling, support: &[usize]| -> Option<usize> {
        let block = tiling.block_of(support[0]);
        let sites = &tiling.blocks()[block];
        support.iter().all(|s| sites.contains(s)).then_some(block)
    };
    let fit_a: Vec<Option<usize>> = instances
        .iter()
        .map(|inst| locate(tiling_a, &inst.support))
        .collect();
    let fit_b: Vec<Option<usize>> = instances
        .iter()
        .map(|inst| locate(tiling_b, &inst.support))
        .collect();
    if fit_a.iter().zip(&fit_b).any(|(a, b)| a.is_none() && b.is_none()) {
        return Ok(None);
    }

    let block_len = tiling_a.block_size();
    let dim = 1usize << block_len;
    let embed = |tiling: &Tiling, inst: &Instance<T>, block: usize| -> CMatrix<T> {
        let sites = &tiling.blocks()[block];
        let roles: Vec<usize> = inst
            .support
            .iter()
            .map(|s| sites.iter().position(|t| t == s).unwrap())
            .collect();
        embed_operator(&inst.matrix, &roles, block_len)
    };
    let emb_a: Vec<Option<CMatrix<T>>> = instances
        .iter()
        .zip(&fit_a)
        .map(|(inst, fit)| fit.map(|block| embed(tiling_a, inst, block)))
        .collect();
    let emb_b: Vec<Option<CMatrix<T>>> = instances
        .iter()
        .zip(&fit_b)
        .map(|(inst, fit)| fit.map(|block| embed(tiling_b, inst, block)))
        .collect();

    // Valid cuts are exactly those at or after the last instance that
    // only fits the suffix tiling, and at or before the first that
    // only fits the prefix tiling.
    let len = instances.len();
    let latest = fit_a.iter().position(Option::is_none).unwrap_or(len);
    let earliest = fit_b.iter().rposition(Option::is_none).map_or(0, |i| i + 1);

    let uniform = |acc: &[Option<CMatrix<T>>]| -> Option<CMatrix<T>> {
        let first = acc
            .iter()
            .flatten()
            .next()
            .cloned()
            .unwrap_or_else(|| eye::<T>(dim));
        for entry in acc {
            let block = entry.clone().unwrap_or_else(|| eye::<T>(dim));
            if max_abs(&(block - &first)) > T::of(1e-10) {
                return None;
            }
        }
        Some(first)
    };

    for cut in earliest..=latest {
        let mut acc_a: Vec<Option<CMatrix<T>>> = vec![None; tiling_a.blocks().len()];
        let mut acc_b: Vec<Option<CMatrix<T>>> = vec![None; tiling_b.blocks().len()];
        for idx in 0..len {
            let (acc, block, embedded) = if idx < cut {
                (&mut acc_a, fit_a[idx].unwrap(), emb_a[idx].as_ref().unwrap())
            } else {
                (&mut acc_b, fit_b[idx].unwrap(), emb_b[idx].as_ref().unwrap())
            };
            let current = acc[block].take().unwrap_or_else(|| eye::<T>(dim));
            acc[block] = Some(embedded * current);
        }
        let Some(u_a) = uniform(&acc_a) else { continue };
        let Some(u_b) = uniform(&acc_b) else { continue };
        let Ok(model) = MargolusQCA::new(
            source.lattice().clone(),
            tiling_a.clone(),
            tiling_b.clone(),
            u_a,
            u_b,
        ) else {
            continue;
        };
        if !model.validate().all_passed() {
            continue;
        }
        let model_global = assemble_global(&model)?.matrix;
        if max_abs(&(model_global - source_global)) > T::of(1e-9) {
            continue;
        }
        return Ok(Some(model));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;
    use crate::linalg::haar_unitary;
    use crate::mqca::{walk_example, walk_matrix};
    use crate::verify::assemble_global;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn global_agreement<T: Float>(
        a: &dyn crate::model::Automaton<T>,
        b: &dyn crate::model::Automaton<T>,
    ) -> T {
        let ga = assemble_global(a).unwrap().matrix;
        let gb = assemble_global(b).unwrap().matrix;
        max_abs(&(ga - gb))
    }

    #[test]
    fn walk_compiles_to_identical_step_operator() {
        let source = walk_example::<f64>(8).unwrap();
        let out = mqca_to_cqca(&source).unwrap();
        assert!(global_agreement(&source, &out.model) < 1e-9);
        assert!(out.certification.max_deviation < 1e-9);
        assert_eq!(out.model.colouring().palette_size(), 4);
        assert_eq!(out.model.declared_radius(), source.declared_radius());
    }

    #[test]
    fn random_blocks_compile_to_identical_step_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let lattice = Lattice::ring(8).unwrap();
        let ta = Tiling::new(&lattice, &[2], &[0]).unwrap();
        let tb = Tiling::new(&lattice, &[2], &[1]).unwrap();
        let ua = haar_unitary::<f64, _>(4, &mut rng);
        let ub = haar_unitary::<f64, _>(4, &mut rng);
        let source = MargolusQCA::new(lattice, ta, tb, ua, ub).unwrap();
        let out = mqca_to_cqca(&source).unwrap();
        assert!(global_agreement(&source, &out.model) < 1e-9);
        assert!(out.certification.max_deviation < 1e-9);
    }

    #[test]
    fn rejects_ring_not_divisible_by_twice_block_size() {
        let source = walk_example::<f64>(6).unwrap();
        assert!(matches!(mqca_to_cqca(&source), Err(Error::Unsupported(_))));
    }

    #[test]
    fn walk_round_trips_through_the_coloured_model() {
        let source = walk_example::<f64>(8).unwrap();
        let coloured = mqca_to_cqca(&source).unwrap().model;
        let back = cqca_to_mqca(&coloured).unwrap();
        assert_eq!(back.model.tiling_a().block_shape(), &[2]);
        assert!(global_agreement(&coloured, &back.model) < 1e-9);
        assert!(back.certification.max_deviation < 1e-9);
        let direct = global_agreement(&source, &back.model);
        assert!(direct < 1e-9, "round trip drifted by {direct}");
    }

    #[test]
    fn simple_coloured_schedule_becomes_blocks() {
        // One conditioned gate per even site, then per odd site: the
        // walk automaton written out by hand.
        let lattice = Lattice::ring(8).unwrap();
        let source = crate::cqca::walk_cqca_example::<f64>(8).unwrap();
        let out = cqca_to_mqca(&source).unwrap();
        assert_eq!(out.model.lattice(), &lattice);
        assert!(max_abs(&(out.model.unitary_a() - walk_matrix::<f64>())) < 1e-9);
        assert!(out.certification.max_deviation < 1e-9);
    }

    #[test]
    fn short_conditioned_chain_regroups_into_wide_blocks() {
        // Conditioned-X at every third site, three substeps: the chain
        // folds into blocks of three because the stragglers commute.
        let lattice = Lattice::ring(6).unwrap();
        let colouring = Colouring::cycle(&[0, 1, 2]).unwrap();
        let scheme = NeighbourhoodScheme::nearest_neighbour(1);
        let x = crate::linalg::pauli_x::<f64>();
        let schedule = vec![
            FieldControlledUnitary::new(
                1,
                FieldCondition::count_equals(0, 1),
                LocalUnitary::new(x.clone()).unwrap(),
            )
            .unwrap(),
            FieldControlledUnitary::new(
                2,
                FieldCondition::count_equals(1, 1),
                LocalUnitary::new(x.clone()).unwrap(),
            )
            .unwrap(),
            FieldControlledUnitary::new(
                0,
                FieldCondition::count_equals(2, 1),
                LocalUnitary::new(x).unwrap(),
            )
            .unwrap(),
        ];
        let source = ColouredQCA::new(lattice, scheme, colouring, schedule).unwrap();
        let out = cqca_to_mqca(&source).unwrap();
        assert_eq!(out.model.tiling_a().block_shape(), &[3]);
        assert!(global_agreement(&source, &out.model) < 1e-9);
        assert!(out.certification.max_deviation < 1e-9);
    }

    #[test]
    fn full_conditioned_cycle_is_honestly_unsupported() {
        // Conditioned-X all the way around the ring: every substep
        // leans on the previous one's output, so no cut of the
        // sequence separates it into two block passes.
        let lattice = Lattice::ring(6).unwrap();
        let colours: Vec<usize> = (0..6).collect();
        let colouring = Colouring::cycle(&colours).unwrap();
        let scheme = NeighbourhoodScheme::nearest_neighbour(1);
        let x = crate::linalg::pauli_x::<f64>();
        let schedule: Vec<_> = (0..6)
            .map(|site| {
                FieldControlledUnitary::new(
                    (site + 1) % 6,
                    FieldCondition::count_equals(site, 1),
                    LocalUnitary::new(x.clone()).unwrap(),
                )
                .unwrap()
            })
            .collect();
        let source = ColouredQCA::new(lattice, scheme, colouring, schedule).unwrap();
        assert!(matches!(cqca_to_mqca(&source), Err(Error::Unsupported(_))));
    }

    #[test]
    fn dense_check_caps_the_ring_length() {
        let lattice = Lattice::ring(14).unwrap();
        let colouring = Colouring::cycle(&[0, 1]).unwrap();
        let scheme = NeighbourhoodScheme::nearest_neighbour(1);
        let source = ColouredQCA::<f64>::new(lattice, scheme, colouring, vec![]).unwrap();
        assert!(matches!(cqca_to_mqca(&source), Err(Error::Resource(_))));
    }

    #[test]
    fn span_measures_wrapped_windows() {
        assert_eq!(ring_span(&[0, 7], 8), 2);
        assert_eq!(ring_span(&[0, 1, 2], 8), 3);
        assert_eq!(ring_span(&[3], 8), 1);
        assert_eq!(ring_span(&[2, 6], 8), 5);
    }
}
