//! Block-partitioned QCA: two staggered tilings, one block unitary each.
//!
//! A full step applies the first tiling's unitary to every block of the
//! first tiling, then the second tiling's unitary to every block of the
//! second. Block-internal site order is lexicographic by coordinates
//! relative to the block anchor, so a block's first site is the most
//! significant bit of its unitary's index.

use crate::error::{Error, Result};
use crate::lattice::{Lattice, SiteIndex};
use crate::linalg::{from_rows, unitarity_deviation, CMatrix};
use crate::scalar::{c, cone, czero, Float};
use crate::state::StateVector;

/// Partition of the lattice into identical rectangular blocks.
#[derive(Debug, Clone)]
pub struct Tiling {
    block_shape: Vec<usize>,
    offset: Vec<i64>,
    blocks: Vec<Vec<usize>>,
    site_block: Vec<usize>,
}

impl Tiling {
    /// Tiles the lattice with blocks of `block_shape`, anchored at
    /// `offset` and repeating with the block shape as period. Extents
    /// must be divisible by the block extents.
    pub fn new(lattice: &Lattice, block_shape: &[usize], offset: &[i64]) -> Result<Self> {
        let dim = lattice.dimension();
        if block_shape.len() != dim || offset.len() != dim {
            return Err(Error::config(format!(
                "block shape and offset must have {dim} axes"
            )));
        }
        if block_shape.iter().any(|&b| b == 0) {
            return Err(Error::config("block extents must be positive"));
        }
        for (ax, (&bs, &e)) in block_shape.iter().zip(lattice.extents()).enumerate() {
            if e % bs != 0 {
                return Err(Error::config(format!(
                    "lattice extent {e} on axis {ax} is not divisible by block extent {bs}"
                )));
            }
        }

        let deltas = block_deltas(block_shape);
        let counts: Vec<usize> = lattice
            .extents()
            .iter()
            .zip(block_shape)
            .map(|(&e, &b)| e / b)
            .collect();

        let mut blocks = Vec::new();
        let mut site_block = vec![usize::MAX; lattice.num_sites()];
        let mut anchor_idx = vec![0usize; dim];
        loop {
            let anchor: Vec<i64> = anchor_idx
                .iter()
                .zip(block_shape)
                .zip(offset)
                .map(|((&i, &b), &o)| o + (i * b) as i64)
                .collect();
            let block: Vec<usize> = deltas
                .iter()
                .map(|d| {
                    let coords: Vec<i64> =
                        anchor.iter().zip(d).map(|(&a, &dd)| a + dd as i64).collect();
                    lattice.linear(&SiteIndex::new(coords))
                })
                .collect();
            for &s in &block {
                if site_block[s] != usize::MAX {
                    return Err(Error::config(format!(
                        "tiling blocks overlap at site {s}"
                    )));
                }
                site_block[s] = blocks.len();
            }
            blocks.push(block);

            let mut ax = 0;
            loop {
                if ax == dim {
                    break;
                }
                anchor_idx[ax] += 1;
                if anchor_idx[ax] < counts[ax] {
                    break;
                }
                anchor_idx[ax] = 0;
                ax += 1;
            }
            if ax == dim {
                break;
            }
        }
        if site_block.iter().any(|&b| b == usize::MAX) {
            return Err(Error::config("tiling does not cover the lattice"));
        }

        Ok(Tiling {
            block_shape: block_shape.to_vec(),
            offset: offset.to_vec(),
            blocks,
            site_block,
        })
    }

    pub fn block_shape(&self) -> &[usize] {
        &self.block_shape
    }

    pub fn offset(&self) -> &[i64] {
        &self.offset
    }

    /// Ordered site lists, one per block.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Number of sites per block.
    pub fn block_size(&self) -> usize {
        self.block_shape.iter().product()
    }

    /// Index of the block containing a site.
    pub fn block_of(&self, site: usize) -> usize {
        self.site_block[site]
    }

    /// Spatial period of the tiling, per axis.
    pub fn period(&self) -> &[usize] {
        &self.block_shape
    }
}

/// Block-internal coordinate offsets in lexicographic order.
fn block_deltas(block_shape: &[usize]) -> Vec<Vec<usize>> {
    let mut deltas = vec![vec![]];
    for &b in block_shape.iter().rev() {
        let mut next = Vec::new();
        for d in 0..b {
            for tail in &deltas {
                let mut v = vec![d];
                v.extend_from_slice(tail);
                next.push(v);
            }
        }
        deltas = next;
    }
    deltas
}

/// Outcome of one model-definition check.
#[derive(Debug, Clone)]
pub struct ValidationCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Results of all model-definition checks.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &'static str, passed: bool, detail: impl Into<String>) {
        self.checks.push(ValidationCheck { name, passed, detail: detail.into() });
    }
}

/// Two staggered tilings with one block unitary per tiling.
#[derive(Debug, Clone)]
pub struct MargolusQCA<T: Float> {
    lattice: Lattice,
    tiling_a: Tiling,
    tiling_b: Tiling,
    u_a: CMatrix<T>,
    u_b: CMatrix<T>,
}

/// Which half of a full step to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfStep {
    First,
    Second,
}

impl<T: Float> MargolusQCA<T> {
    /// Assembles the model. Only structural impossibilities (matrix side
    /// not matching block size) are rejected here; definition clauses
    /// like staggering and unitarity are reported by [`validate`]
    /// (Self::validate) and gate [`step`](Self::step).
    pub fn new(
        lattice: Lattice,
        tiling_a: Tiling,
        tiling_b: Tiling,
        u_a: CMatrix<T>,
        u_b: CMatrix<T>,
    ) -> Result<Self> {
        for (t, u, which) in [(&tiling_a, &u_a, "first"), (&tiling_b, &u_b, "second")] {
            let dim = 1usize << t.block_size();
            if u.nrows() != dim || u.ncols() != dim {
                return Err(Error::config(format!(
                    "{which} tiling has {}-site blocks but a {}x{} unitary",
                    t.block_size(),
                    u.nrows(),
                    u.ncols()
                )));
            }
        }
        Ok(MargolusQCA { lattice, tiling_a, tiling_b, u_a, u_b })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn tiling_a(&self) -> &Tiling {
        &self.tiling_a
    }

    pub fn tiling_b(&self) -> &Tiling {
        &self.tiling_b
    }

    pub fn unitary_a(&self) -> &CMatrix<T> {
        &self.u_a
    }

    pub fn unitary_b(&self) -> &CMatrix<T> {
        &self.u_b
    }

    /// Checks every model-definition clause and reports each outcome.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport { checks: Vec::new() };

        for (t, which) in [(&self.tiling_a, "first"), (&self.tiling_b, "second")] {
            let n_covered = t.blocks().iter().map(|b| b.len()).sum::<usize>();
            report.push(
                "cover",
                n_covered == self.lattice.num_sites(),
                format!("{which} tiling covers {n_covered} sites"),
            );
            let mut seen = vec![false; self.lattice.num_sites()];
            let mut disjoint = true;
            for b in t.blocks() {
                for &s in b {
                    if seen[s] {
                        disjoint = false;
                    }
                    seen[s] = true;
                }
            }
            report.push("disjoint", disjoint, format!("{which} tiling blocks pairwise disjoint"));
            let uniform = t.blocks().iter().all(|b| b.len() == t.block_size());
            report.push("uniform", uniform, format!("{which} tiling blocks identical in shape"));
        }

        report.push(
            "period",
            self.tiling_a.period() == self.tiling_b.period(),
            "tilings share one spatial period",
        );

        let min_overlap = self.min_cross_overlap();
        report.push(
            "staggered",
            min_overlap >= 2,
            format!("each block overlaps {min_overlap} block(s) of the other tiling"),
        );

        for (u, which) in [(&self.u_a, "first"), (&self.u_b, "second")] {
            let dev = unitarity_deviation(u);
            report.push(
                "unitary",
                dev <= T::of(1e-10),
                format!("{which} block matrix unitarity deviation {dev:?}"),
            );
        }

        report
    }

    /// Smallest number of other-tiling blocks any block overlaps.
    fn min_cross_overlap(&self) -> usize {
        let mut min = usize::MAX;
        for (t, other) in [(&self.tiling_a, &self.tiling_b), (&self.tiling_b, &self.tiling_a)] {
            for b in t.blocks() {
                let mut partners: Vec<usize> = b.iter().map(|&s| other.block_of(s)).collect();
                partners.sort_unstable();
                partners.dedup();
                min = min.min(partners.len());
            }
        }
        min
    }

    fn require_valid(&self) -> Result<()> {
        let report = self.validate();
        if !report.all_passed() {
            let failed: Vec<&str> = report
                .checks
                .iter()
                .filter(|ch| !ch.passed)
                .map(|ch| ch.name)
                .collect();
            return Err(Error::usage(format!(
                "model fails definition checks: {}",
                failed.join(", ")
            )));
        }
        Ok(())
    }

    /// Applies one tiling's unitary to all of its blocks.
    pub fn half_step(&self, state: &mut StateVector<T>, half: HalfStep) -> Result<()> {
        self.require_valid()?;
        self.half_step_unchecked(state, half);
        Ok(())
    }

    fn half_step_unchecked(&self, state: &mut StateVector<T>, half: HalfStep) {
        let (t, u) = match half {
            HalfStep::First => (&self.tiling_a, &self.u_a),
            HalfStep::Second => (&self.tiling_b, &self.u_b),
        };
        for block in t.blocks() {
            state.apply_raw(u, block);
        }
    }

    /// One full step: the first tiling's unitary everywhere, then the
    /// second tiling's.
    pub fn step(&self, state: &mut StateVector<T>) -> Result<()> {
        self.require_valid()?;
        self.half_step_unchecked(state, HalfStep::First);
        self.half_step_unchecked(state, HalfStep::Second);
        Ok(())
    }

    /// Evolves `steps` full steps, recording per-site probabilities
    /// before the first step and after each step.
    pub fn run(&self, state: &mut StateVector<T>, steps: usize) -> Result<Vec<Vec<T>>> {
        self.require_valid()?;
        let mut rows = Vec::with_capacity(steps + 1);
        rows.push(state.site_probabilities());
        for _ in 0..steps {
            self.half_step_unchecked(state, HalfStep::First);
            self.half_step_unchecked(state, HalfStep::Second);
            rows.push(state.site_probabilities());
        }
        Ok(rows)
    }

    /// Spatial period of the full step, per axis.
    pub fn period(&self) -> Vec<usize> {
        self.tiling_a
            .period()
            .iter()
            .zip(self.tiling_b.period())
            .map(|(&a, &b)| lcm(a, b))
            .collect()
    }

    /// Largest per-axis distance one full step can move information:
    /// within-block spread of the first tiling plus that of the second.
    pub fn declared_radius(&self) -> usize {
        let spread = |t: &Tiling| t.block_shape().iter().map(|&b| b - 1).max().unwrap_or(0);
        spread(&self.tiling_a) + spread(&self.tiling_b)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// The two-site interaction of the ring-walk model: identity on |00⟩
/// and |11⟩, a square-root-of-swap rotation on the one-particle block.
pub fn walk_matrix<T: Float>() -> CMatrix<T> {
    from_rows(&[
        vec![cone(), czero(), czero(), czero()],
        vec![czero(), c(0.5, 0.5), c(-0.5, 0.5), czero()],
        vec![czero(), c(-0.5, 0.5), c(0.5, 0.5), czero()],
        vec![czero(), czero(), czero(), cone()],
    ])
}

/// Quantum-walk model on a ring of `n` sites: 2-site blocks at offsets
/// 0 and 1, the same √SWAP-style matrix on both tilings.
pub fn walk_example<T: Float>(n: usize) -> Result<MargolusQCA<T>> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::config(format!(
            "walk model needs an even ring of at least 4 sites, got {n}"
        )));
    }
    let lattice = Lattice::ring(n)?;
    let tiling_a = Tiling::new(&lattice, &[2], &[0])?;
    let tiling_b = Tiling::new(&lattice, &[2], &[1])?;
    let u = walk_matrix();
    MargolusQCA::new(lattice, tiling_a, tiling_b, u.clone(), u)
}

/// SWAP on two sites.
pub fn swap_matrix<T: Float>() -> CMatrix<T> {
    from_rows(&[
        vec![cone(), czero(), czero(), czero()],
        vec![czero(), czero(), cone(), czero()],
        vec![czero(), cone(), czero(), czero()],
        vec![czero(), czero(), czero(), cone()],
    ])
}

/// Partitioned QCA on a ring of `n` sites: cells of two subcells, the
/// given unitary on cells, and a fixed subcell exchange (each cell's
/// right subcell swaps with the right neighbour's left subcell) as the
/// second tiling.
pub fn pqca_from_cell_unitary<T: Float>(n: usize, u: CMatrix<T>) -> Result<MargolusQCA<T>> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::config(format!(
            "partitioned model needs an even ring of at least 4 sites, got {n}"
        )));
    }
    if u.nrows() != 4 || u.ncols() != 4 {
        return Err(Error::config(format!(
            "cell unitary must act on two subcells (4x4), got {}x{}",
            u.nrows(),
            u.ncols()
        )));
    }
    let lattice = Lattice::ring(n)?;
    let tiling_a = Tiling::new(&lattice, &[2], &[0])?;
    let tiling_b = Tiling::new(&lattice, &[2], &[1])?;
    MargolusQCA::new(lattice, tiling_a, tiling_b, u, swap_matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eye, max_abs};
    use crate::scalar::C;

    #[test]
    fn walk_example_validates() {
        let m = walk_example::<f64>(8).unwrap();
        let report = m.validate();
        assert!(report.all_passed(), "{report:?}");
    }

    #[test]
    fn walk_matrix_is_unitary_and_squares_to_swap() {
        let u = walk_matrix::<f64>();
        assert!(unitarity_deviation(&u) < 1e-15);
        let mid = u.view((1, 1), (2, 2)).into_owned();
        let sq = &mid * &mid;
        let swap_mid = from_rows::<f64>(&[vec![czero(), cone()], vec![cone(), czero()]]);
        let t = (sq.adjoint() * &swap_mid).trace();
        let phase = t / C::new(t.norm(), 0.0);
        let aligned = sq.map(|x| x * phase);
        assert!(max_abs(&(&aligned - &swap_mid)) < 1e-15);
    }

    #[test]
    fn unstaggered_tilings_fail_overlap_check() {
        let lattice = Lattice::ring(8).unwrap();
        let ta = Tiling::new(&lattice, &[2], &[0]).unwrap();
        let tb = Tiling::new(&lattice, &[2], &[0]).unwrap();
        let m = MargolusQCA::new(lattice, ta, tb, eye::<f64>(4), eye(4)).unwrap();
        let report = m.validate();
        assert!(!report.all_passed());
        let stag = report.checks.iter().find(|ch| ch.name == "staggered").unwrap();
        assert!(!stag.passed);
    }

    #[test]
    fn non_unitary_matrix_fails_unitarity_check() {
        let lattice = Lattice::ring(8).unwrap();
        let ta = Tiling::new(&lattice, &[2], &[0]).unwrap();
        let tb = Tiling::new(&lattice, &[2], &[1]).unwrap();
        let mut bad = eye::<f64>(4);
        bad[(0, 0)] = c(0.5, 0.0);
        let m = MargolusQCA::new(lattice, ta, tb, bad, eye(4)).unwrap();
        let report = m.validate();
        let uni = report.checks.iter().find(|ch| ch.name == "unitary").unwrap();
        assert!(!uni.passed);
    }

    #[test]
    fn identity_step_is_identity() {
        let lattice = Lattice::ring(6).unwrap();
        let ta = Tiling::new(&lattice, &[2], &[0]).unwrap();
        let tb = Tiling::new(&lattice, &[2], &[1]).unwrap();
        let m = MargolusQCA::new(lattice.clone(), ta, tb, eye::<f64>(4), eye(4)).unwrap();
        let mut s = StateVector::basis_state(&lattice, "010110").unwrap();
        let before = s.clone();
        m.step(&mut s).unwrap();
        assert!(s.max_amp_diff(&before) < 1e-15);
    }

    #[test]
    fn swap_blocks_match_permutation_composition() {
        let n = 6;
        let lattice = Lattice::ring(n).unwrap();
        let ta = Tiling::new(&lattice, &[2], &[0]).unwrap();
        let tb = Tiling::new(&lattice, &[2], &[1]).unwrap();
        let m =
            MargolusQCA::new(lattice.clone(), ta, tb, swap_matrix::<f64>(), swap_matrix()).unwrap();

        let mut dest: Vec<usize> = (0..n).collect();
        for start in [0usize, 1] {
            for d in dest.iter_mut() {
                let rel = (*d + n - start) % n;
                *d = if rel % 2 == 0 { (*d + 1) % n } else { (*d + n - 1) % n };
            }
        }

        for idx in 0..(1usize << n) {
            let sites: Vec<usize> = (0..n).filter(|s| idx & (1 << s) != 0).collect();
            let mapped: Vec<usize> = sites.iter().map(|&s| dest[s]).collect();
            let mut state = StateVector::with_excitations(&lattice, &sites).unwrap();
            m.step(&mut state).unwrap();
            let expect = StateVector::with_excitations(&lattice, &mapped).unwrap();
            assert!(
                state.max_amp_diff(&expect) < 1e-15,
                "basis {idx:b} evolved off the composed permutation"
            );
        }
    }

    #[test]
    fn run_row_shape_and_identity_rows() {
        let lattice = Lattice::ring(4).unwrap();
        let ta = Tiling::new(&lattice, &[2], &[0]).unwrap();
        let tb = Tiling::new(&lattice, &[2], &[1]).unwrap();
        let m = MargolusQCA::new(lattice.clone(), ta, tb, eye::<f64>(4), eye(4)).unwrap();
        let mut s = StateVector::basis_state(&lattice, "0101").unwrap();
        let rows = m.run(&mut s, 3).unwrap();
        assert_eq!(rows.len(), 4);
        for row in &rows {
            assert_eq!(row, &rows[0]);
        }
    }

    #[test]
    fn pqca_identity_cell_conserves_particle_count() {
        let m = pqca_from_cell_unitary::<f64>(6, eye(4)).unwrap();
        assert!(m.validate().all_passed());
        let lattice = Lattice::ring(6).unwrap();
        let mut s = StateVector::basis_state(&lattice, "001011").unwrap();
        let before: f64 = s.site_probabilities().iter().sum();
        for _ in 0..5 {
            m.step(&mut s).unwrap();
        }
        let after: f64 = s.site_probabilities().iter().sum();
        assert!((before - after).abs() < 1e-12);
    }

    #[test]
    fn walk_example_rejects_odd_or_small() {
        assert!(walk_example::<f64>(7).is_err());
        assert!(walk_example::<f64>(2).is_err());
    }

    #[test]
    fn two_dimensional_tiling_covers() {
        let lattice = Lattice::new(&[4, 4]).unwrap();
        let t = Tiling::new(&lattice, &[2, 2], &[0, 0]).unwrap();
        assert_eq!(t.blocks().len(), 4);
        let mut all: Vec<usize> = t.blocks().iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..16).collect::<Vec<_>>());
    }
}
