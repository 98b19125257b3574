//! Continuous-time QCA: colour-pair coupling Hamiltonians on adjacent
//! sites, evolved exactly (eigendecomposition) or by product formulas.
//!
//! Conventions: ħ = 1 and evolution is e^{−iHt}. A bond's 4×4 matrix is
//! written with the lower-colour site as the most significant bit; a
//! same-colour coupling must be symmetric under site exchange, since
//! the bond carries no orientation. Each adjacent pair contributes one
//! term to the global Hamiltonian.

use std::collections::BTreeMap;

use crate::cqca::Colouring;
use crate::error::{Error, Result};
use crate::lattice::{Lattice, NeighbourhoodScheme};
use crate::linalg::{
    expm_minus_i_t, eye, max_abs, require_hermitian, CMatrix,
};
use crate::scalar::{cone, czero, Float};
use crate::state::StateVector;

/// Dense-construction cap for the global Hamiltonian and exact
/// evolution.
pub const EXACT_CAP: usize = 14;

/// Colour-keyed interaction data: per-colour-pair two-site terms and
/// optional per-colour on-site terms.
#[derive(Debug, Clone)]
pub struct CouplingMap<T: Float> {
    colouring: Colouring,
    neighbourhood: NeighbourhoodScheme,
    couplings: BTreeMap<(usize, usize), CMatrix<T>>,
    on_site: BTreeMap<usize, CMatrix<T>>,
}

impl<T: Float> CouplingMap<T> {
    /// Validates and stores the interaction data. Colour pairs are
    /// unordered (keys are normalized); every matrix must be Hermitian
    /// within 1e-10 and same-colour couplings must additionally be
    /// invariant under site exchange.
    ///
    /// The colouring here only keys the couplings; it need not be
    /// proper.
    pub fn new(
        colouring: Colouring,
        neighbourhood: NeighbourhoodScheme,
        couplings: Vec<((usize, usize), CMatrix<T>)>,
        on_site: Vec<(usize, CMatrix<T>)>,
    ) -> Result<Self> {
        let k = colouring.palette_size();
        let mut cmap = BTreeMap::new();
        for ((a, b), m) in couplings {
            if a >= k || b >= k {
                return Err(Error::config(format!(
                    "coupling colour pair ({a},{b}) outside palette of {k}"
                )));
            }
            if m.nrows() != 4 || m.ncols() != 4 {
                return Err(Error::config("pair coupling matrices must be 4x4"));
            }
            require_hermitian(&m, 1e-10, "pair coupling")?;
            let key = (a.min(b), a.max(b));
            if a == b {
                let swapped = swap_conjugate(&m);
                if max_abs(&(&swapped - &m)) > T::of(1e-10) {
                    return Err(Error::config(format!(
                        "same-colour coupling ({a},{a}) must be site-exchange symmetric"
                    )));
                }
            }
            if cmap.insert(key, m).is_some() {
                return Err(Error::config(format!(
                    "duplicate coupling for colour pair ({},{})",
                    key.0, key.1
                )));
            }
        }
        let mut smap = BTreeMap::new();
        for (colour, m) in on_site {
            if colour >= k {
                return Err(Error::config(format!(
                    "on-site colour {colour} outside palette of {k}"
                )));
            }
            if m.nrows() != 2 || m.ncols() != 2 {
                return Err(Error::config("on-site terms must be 2x2"));
            }
            require_hermitian(&m, 1e-10, "on-site term")?;
            if smap.insert(colour, m).is_some() {
                return Err(Error::config(format!(
                    "duplicate on-site term for colour {colour}"
                )));
            }
        }
        Ok(CouplingMap { colouring, neighbourhood, couplings: cmap, on_site: smap })
    }

    pub fn colouring(&self) -> &Colouring {
        &self.colouring
    }

    pub fn neighbourhood(&self) -> &NeighbourhoodScheme {
        &self.neighbourhood
    }

    pub fn couplings(&self) -> &BTreeMap<(usize, usize), CMatrix<T>> {
        &self.couplings
    }

    pub fn on_site(&self) -> &BTreeMap<usize, CMatrix<T>> {
        &self.on_site
    }
}

/// Conjugates a 4×4 matrix by the two-site SWAP.
pub(crate) fn swap_conjugate<T: Float>(m: &CMatrix<T>) -> CMatrix<T> {
    let perm = [0usize, 2, 1, 3];
    CMatrix::from_fn(4, 4, |i, j| m[(perm[i], perm[j])])
}

/// One Hamiltonian term: the ordered support sites and the dense
/// matrix acting on them.
#[derive(Debug, Clone)]
pub struct HamiltonianTerm<T: Float> {
    pub sites: Vec<usize>,
    pub matrix: CMatrix<T>,
}

/// Continuous-time model: a lattice plus colour-keyed couplings.
#[derive(Debug, Clone)]
pub struct ContinuousQCA<T: Float> {
    lattice: Lattice,
    coupling_map: CouplingMap<T>,
}

/// Product-formula parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrotterParams<T: Float> {
    pub dt: T,
    pub order: TrotterOrder,
}

/// Product-formula order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrotterOrder {
    /// Sequential layer exponentials (Lie splitting), first order.
    First,
    /// Symmetrized half-step layers (Strang splitting), second order.
    Second,
}

impl<T: Float> TrotterParams<T> {
    pub fn new(dt: T, order: TrotterOrder) -> Result<Self> {
        if dt <= T::zero() {
            return Err(Error::config("product-formula step dt must be positive"));
        }
        Ok(TrotterParams { dt, order })
    }
}

impl<T: Float> ContinuousQCA<T> {
    pub fn new(lattice: Lattice, coupling_map: CouplingMap<T>) -> Result<Self> {
        if !coupling_map.colouring().fits(&lattice) {
            return Err(Error::config(format!(
                "colour pattern period {:?} does not divide lattice extents {:?}",
                coupling_map.colouring().period(),
                lattice.extents()
            )));
        }
        Ok(ContinuousQCA { lattice, coupling_map })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn coupling_map(&self) -> &CouplingMap<T> {
        &self.coupling_map
    }

    /// All Hamiltonian terms: one per adjacent site pair that has a
    /// coupling for its colour pair (each unordered pair once, the
    /// lower-colour site listed first), plus per-site on-site terms.
    pub fn terms(&self) -> Vec<HamiltonianTerm<T>> {
        let cm = &self.coupling_map;
        let colour = |s: usize| cm.colouring().colour_of(&self.lattice, s);

        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for x in self.lattice.sites() {
            for y in cm.neighbourhood().neighbours(&self.lattice, x) {
                let p = (x.min(y), x.max(y));
                if !pairs.contains(&p) {
                    pairs.push(p);
                }
            }
        }
        pairs.sort_unstable();

        let mut terms = Vec::new();
        for (x, y) in pairs {
            let (cx, cy) = (colour(x), colour(y));
            let key = (cx.min(cy), cx.max(cy));
            if let Some(m) = cm.couplings().get(&key) {
                let sites = if cx <= cy { vec![x, y] } else { vec![y, x] };
                terms.push(HamiltonianTerm { sites, matrix: m.clone() });
            }
        }
        for x in self.lattice.sites() {
            if let Some(m) = cm.on_site().get(&colour(x)) {
                terms.push(HamiltonianTerm { sites: vec![x], matrix: m.clone() });
            }
        }
        terms
    }

    /// Dense global Hamiltonian, capped at 14 sites.
    pub fn build_hamiltonian(&self) -> Result<CMatrix<T>> {
        let n = self.lattice.num_sites();
        if n > EXACT_CAP {
            return Err(Error::resource(format!(
                "dense Hamiltonian needs {n} sites but the cap is {EXACT_CAP}"
            )));
        }
        let dim = 1usize << n;
        let mut h = CMatrix::<T>::zeros(dim, dim);
        for term in self.terms() {
            add_embedded(&mut h, n, &term.matrix, &term.sites);
        }
        Ok(h)
    }

    /// Evolves by e^{−iHt} exactly, via eigendecomposition of the dense
    /// Hamiltonian. Capped at 14 sites.
    pub fn exact_evolve(&self, state: &mut StateVector<T>, t: T) -> Result<()> {
        let h = self.build_hamiltonian()?;
        let u = expm_minus_i_t(&h, t);
        apply_full(state, &u);
        Ok(())
    }

    /// Energy expectation ⟨ψ|H|ψ⟩, computed term by term without a
    /// dense global matrix.
    pub fn energy(&self, state: &StateVector<T>) -> Result<T> {
        let mut acc = vec![czero::<T>(); state.amplitudes().len()];
        for term in self.terms() {
            let mut tmp = state.clone();
            tmp.apply_raw(&term.matrix, &term.sites);
            for (a, v) in acc.iter_mut().zip(tmp.amplitudes()) {
                *a += *v;
            }
        }
        let mut e = czero::<T>();
        for (psi, hpsi) in state.amplitudes().iter().zip(&acc) {
            e += psi.conj() * hpsi;
        }
        Ok(e.re)
    }

    /// Terms grouped into layers of pairwise-disjoint supports, so each
    /// layer's exponential factors exactly. Greedy assignment in
    /// canonical bond order; on a ring with even length this reproduces
    /// the even/odd bond split.
    pub fn commuting_layers(&self) -> Vec<Vec<HamiltonianTerm<T>>> {
        let mut layers: Vec<Vec<HamiltonianTerm<T>>> = Vec::new();
        let mut layer_sites: Vec<Vec<usize>> = Vec::new();
        for term in self.terms() {
            let slot = layer_sites
                .iter()
                .position(|sites| term.sites.iter().all(|s| !sites.contains(s)));
            match slot {
                Some(i) => {
                    layer_sites[i].extend_from_slice(&term.sites);
                    layers[i].push(term);
                }
                None => {
                    layer_sites.push(term.sites.clone());
                    layers.push(vec![term]);
                }
            }
        }
        layers
    }

    /// The gate list realizing one product-formula step of length `dt`.
    fn trotter_step_gates(&self, p: &TrotterParams<T>) -> Vec<(Vec<usize>, CMatrix<T>)> {
        let layers = self.commuting_layers();
        let exp_layer = |tau: T| -> Vec<Vec<(Vec<usize>, CMatrix<T>)>> {
            layers
                .iter()
                .map(|layer| {
                    layer
                        .iter()
                        .map(|term| (term.sites.clone(), expm_minus_i_t(&term.matrix, tau)))
                        .collect()
                })
                .collect()
        };
        match p.order {
            TrotterOrder::First => exp_layer(p.dt).into_iter().flatten().collect(),
            TrotterOrder::Second => {
                let half = exp_layer(p.dt * T::of(0.5));
                let full = exp_layer(p.dt);
                let k = layers.len();
                let mut gates = Vec::new();
                if k == 0 {
                    return gates;
                }
                for l in 0..k - 1 {
                    gates.extend(half[l].iter().cloned());
                }
                gates.extend(full[k - 1].iter().cloned());
                for l in (0..k - 1).rev() {
                    gates.extend(half[l].iter().cloned());
                }
                gates
            }
        }
    }

    /// Product-formula evolution over time `t`, with `t/dt` rounded to
    /// an integer step count.
    pub fn trotter_evolve(
        &self,
        state: &mut StateVector<T>,
        t: T,
        p: &TrotterParams<T>,
    ) -> Result<()> {
        if t < T::zero() {
            return Err(Error::usage("product-formula evolution needs t ≥ 0"));
        }
        let steps_real = t / p.dt;
        let steps = steps_real.round();
        let steps_int: u64 = num_traits::cast::ToPrimitive::to_u64(&steps)
            .ok_or_else(|| Error::usage("step count does not fit an integer"))?;
        let gates = self.trotter_step_gates(p);
        for _ in 0..steps_int {
            for (sites, u) in &gates {
                state.apply_raw(u, sites);
            }
        }
        Ok(())
    }

    /// One product-formula step of length `dt`.
    pub fn trotter_step(&self, state: &mut StateVector<T>, p: &TrotterParams<T>) -> Result<()> {
        for (sites, u) in self.trotter_step_gates(p) {
            state.apply_raw(&u, &sites);
        }
        Ok(())
    }

    /// Causality radius of one product-formula step: gate applications
    /// spread at most the scheme radius per layer pass.
    pub fn trotter_radius(&self, order: TrotterOrder) -> usize {
        let r = self.coupling_map.neighbourhood().radius();
        let k = self.commuting_layers().len();
        let passes = match order {
            TrotterOrder::First => k,
            TrotterOrder::Second => if k == 0 { 0 } else { 2 * k - 1 },
        };
        (passes * r).min(self.lattice.max_distance())
    }

    /// Spatial period, per axis: the colour pattern period.
    pub fn period(&self) -> Vec<usize> {
        self.coupling_map.colouring().period().to_vec()
    }
}

/// Piecewise-constant Hamiltonian schedule: segments evolved in order,
/// each exactly for its duration.
#[derive(Debug, Clone)]
pub struct CtqcaSchedule<T: Float> {
    pub segments: Vec<CtqcaSegment<T>>,
}

/// One piecewise-constant segment.
#[derive(Debug, Clone)]
pub struct CtqcaSegment<T: Float> {
    pub duration: T,
    pub model: ContinuousQCA<T>,
}

impl<T: Float> CtqcaSchedule<T> {
    /// Exact evolution through every segment in order.
    pub fn exact_evolve(&self, state: &mut StateVector<T>) -> Result<()> {
        for seg in &self.segments {
            seg.model.exact_evolve(state, seg.duration)?;
        }
        Ok(())
    }

    pub fn lattice(&self) -> Option<&Lattice> {
        self.segments.first().map(|s| s.model.lattice())
    }

    /// Dense operator for one pass through the schedule: the ordered
    /// product of every segment's exact evolution.
    pub fn step_operator(&self) -> Result<CMatrix<T>> {
        let lattice = self
            .lattice()
            .ok_or_else(|| Error::usage("schedule has no segments"))?;
        let dim = 1usize << lattice.num_sites();
        let mut u = eye::<T>(dim);
        for seg in &self.segments {
            let h = seg.model.build_hamiltonian()?;
            u = expm_minus_i_t(&h, seg.duration) * u;
        }
        Ok(u)
    }
}

/// Adds `m` acting on `sites` into the dense `n`-site operator `h`.
pub(crate) fn add_embedded<T: Float>(
    h: &mut CMatrix<T>,
    n: usize,
    m: &CMatrix<T>,
    sites: &[usize],
) {
    let k = sites.len();
    let dim = 1usize << k;
    let offsets: Vec<usize> = (0..dim)
        .map(|g| {
            let mut o = 0usize;
            for (j, &s) in sites.iter().enumerate() {
                if (g >> (k - 1 - j)) & 1 == 1 {
                    o |= 1 << s;
                }
            }
            o
        })
        .collect();
    let mut positions: Vec<usize> = sites.to_vec();
    positions.sort_unstable();
    for rest in 0..(1usize << (n - k)) {
        let mut base = rest;
        for &p in &positions {
            base = ((base >> p) << (p + 1)) | (base & ((1 << p) - 1));
        }
        for r in 0..dim {
            for c in 0..dim {
                h[(base | offsets[r], base | offsets[c])] += m[(r, c)];
            }
        }
    }
}

/// Multiplies the state by a dense full-register operator.
pub(crate) fn apply_full<T: Float>(state: &mut StateVector<T>, u: &CMatrix<T>) {
    let sites: Vec<usize> = (0..state.num_sites()).rev().collect();
    state.apply_raw(u, &sites);
}

/// The excitation-exchange coupling |01⟩⟨10| + |10⟩⟨01|.
pub fn flip_flop_coupling<T: Float>() -> CMatrix<T> {
    let mut m = CMatrix::<T>::zeros(4, 4);
    m[(1, 2)] = cone();
    m[(2, 1)] = cone();
    m
}

/// The pair-creation coupling |11⟩⟨00| + |00⟩⟨11|, the raising/raising
/// plus lowering/lowering combination.
pub fn pair_creation_coupling<T: Float>() -> CMatrix<T> {
    let mut m = CMatrix::<T>::zeros(4, 4);
    m[(0, 3)] = cone();
    m[(3, 0)] = cone();
    m
}

/// Spin-exchange chain on a ring of `n` sites: one colour, nearest
/// neighbours coupled by [`flip_flop_coupling`].
pub fn flip_flop_example<T: Float>(n: usize) -> Result<ContinuousQCA<T>> {
    if n < 2 {
        return Err(Error::config("exchange chain needs at least 2 sites"));
    }
    let lattice = Lattice::ring(n)?;
    let colouring = Colouring::cycle(&[0])?;
    let scheme = NeighbourhoodScheme::nearest_neighbour(1);
    let cm = CouplingMap::new(colouring, scheme, vec![((0, 0), flip_flop_coupling())], vec![])?;
    ContinuousQCA::new(lattice, cm)
}

/// Variant of [`flip_flop_example`] with the pair-creation coupling
/// instead of excitation exchange.
pub fn pair_creation_example<T: Float>(n: usize) -> Result<ContinuousQCA<T>> {
    if n < 2 {
        return Err(Error::config("pair-creation chain needs at least 2 sites"));
    }
    let lattice = Lattice::ring(n)?;
    let colouring = Colouring::cycle(&[0])?;
    let scheme = NeighbourhoodScheme::nearest_neighbour(1);
    let cm = CouplingMap::new(colouring, scheme, vec![((0, 0), pair_creation_coupling())], vec![])?;
    ContinuousQCA::new(lattice, cm)
}
