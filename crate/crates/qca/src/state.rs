//! State vectors over a qubit lattice and the gate-application kernel.
//!
//! Amplitude layout: the site with canonical linear index `i` occupies
//! bit `i` of the basis-state index, so a basis label reads
//! |b_{N−1} … b_1 b_0⟩ and the bitstring "10" on two sites is index 2.
//! Gate matrices are row-major with the first listed site as the most
//! significant bit of the gate-local index.

use crate::error::{Error, Result};
use crate::lattice::{site_cap, Lattice};
use crate::linalg::CMatrix;
use crate::scalar::{czero, Float, C};
use crate::unitary::LocalUnitary;

/// Applies a dense 2^k × 2^k matrix to the listed sites of an amplitude
/// array, in place. Does not require the matrix to be unitary; callers
/// that need norm preservation validate separately.
pub(crate) fn apply_matrix<T: Float>(
    amps: &mut [C<T>],
    n_sites: usize,
    m: &CMatrix<T>,
    sites: &[usize],
) {
    let k = sites.len();
    let dim_block = 1usize << k;
    debug_assert_eq!(m.nrows(), dim_block);

    let mut positions: Vec<usize> = sites.to_vec();
    positions.sort_unstable();

    let offsets: Vec<usize> = (0..dim_block)
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

    let rest = 1usize << (n_sites - k);
    let mut scratch = vec![czero::<T>(); dim_block];
    for r in 0..rest {
        let mut base = r;
        for &p in &positions {
            base = ((base >> p) << (p + 1)) | (base & ((1 << p) - 1));
        }
        for g in 0..dim_block {
            scratch[g] = amps[base | offsets[g]];
        }
        for (row, &off) in offsets.iter().enumerate() {
            let mut acc = czero::<T>();
            for (col, &s) in scratch.iter().enumerate() {
                acc += m[(row, col)] * s;
            }
            amps[base | off] = acc;
        }
    }
}

/// Normalized pure state of all lattice qubits.
#[derive(Debug, Clone)]
pub struct StateVector<T: Float> {
    lattice: Lattice,
    amps: Vec<C<T>>,
}

impl<T: Float> StateVector<T> {
    /// Computational basis state from an MSB-first bitstring.
    ///
    /// The first character is the bit of the highest-index site, the
    /// last character the bit of site 0.
    pub fn basis_state(lattice: &Lattice, bits: &str) -> Result<Self> {
        let n = lattice.num_sites();
        check_cap(n)?;
        if bits.len() != n {
            return Err(Error::config(format!(
                "bitstring length {} does not match {} lattice sites",
                bits.len(),
                n
            )));
        }
        let mut index = 0usize;
        for (pos, ch) in bits.chars().enumerate() {
            let site = n - 1 - pos;
            match ch {
                '0' => {}
                '1' => index |= 1 << site,
                other => {
                    return Err(Error::config(format!(
                        "bitstring may contain only 0 and 1, found '{other}'"
                    )))
                }
            }
        }
        let mut amps = vec![czero(); 1 << n];
        amps[index] = C::new(T::one(), T::zero());
        Ok(StateVector { lattice: lattice.clone(), amps })
    }

    /// All-zeros basis state.
    pub fn vacuum(lattice: &Lattice) -> Result<Self> {
        let n = lattice.num_sites();
        check_cap(n)?;
        let mut amps = vec![czero(); 1 << n];
        amps[0] = C::new(T::one(), T::zero());
        Ok(StateVector { lattice: lattice.clone(), amps })
    }

    /// Basis state from its amplitude index (bit i = site i).
    pub fn from_basis_index(lattice: &Lattice, index: usize) -> Result<Self> {
        let n = lattice.num_sites();
        check_cap(n)?;
        if index >= 1 << n {
            return Err(Error::usage(format!(
                "basis index {index} outside a {n}-site register"
            )));
        }
        let mut amps = vec![czero(); 1 << n];
        amps[index] = C::new(T::one(), T::zero());
        Ok(StateVector { lattice: lattice.clone(), amps })
    }

    /// Basis state with exactly the listed sites set to 1.
    pub fn with_excitations(lattice: &Lattice, sites: &[usize]) -> Result<Self> {
        let n = lattice.num_sites();
        check_cap(n)?;
        let mut index = 0usize;
        for &s in sites {
            if s >= n {
                return Err(Error::usage(format!("site {s} outside lattice of {n} sites")));
            }
            index |= 1 << s;
        }
        let mut amps = vec![czero(); 1 << n];
        amps[index] = C::new(T::one(), T::zero());
        Ok(StateVector { lattice: lattice.clone(), amps })
    }

    /// Wraps raw amplitudes, requiring unit norm within 1e-10.
    pub fn from_amplitudes(lattice: &Lattice, amps: Vec<C<T>>) -> Result<Self> {
        let n = lattice.num_sites();
        check_cap(n)?;
        if amps.len() != 1 << n {
            return Err(Error::config(format!(
                "amplitude count {} does not match 2^{n}",
                amps.len()
            )));
        }
        let state = StateVector { lattice: lattice.clone(), amps };
        let norm = state.norm();
        if (norm - T::one()).abs() > T::of(1e-10) {
            return Err(Error::config(format!("state norm {norm:?} is not 1")));
        }
        Ok(state)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn num_sites(&self) -> usize {
        self.lattice.num_sites()
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amps
    }

    pub fn norm(&self) -> T {
        let mut s = T::zero();
        for a in &self.amps {
            s += a.norm_sqr();
        }
        s.sqrt()
    }

    /// Applies a local unitary to the listed sites.
    ///
    /// Sites must be distinct and match the gate arity; the first listed
    /// site is the most significant bit of the gate matrix index.
    pub fn apply(&mut self, u: &LocalUnitary<T>, sites: &[usize]) -> Result<()> {
        let n = self.num_sites();
        if sites.len() != u.arity() {
            return Err(Error::usage(format!(
                "gate of arity {} applied to {} sites",
                u.arity(),
                sites.len()
            )));
        }
        for (i, &s) in sites.iter().enumerate() {
            if s >= n {
                return Err(Error::usage(format!("site {s} outside lattice of {n} sites")));
            }
            if sites[..i].contains(&s) {
                return Err(Error::usage(format!("duplicate site {s} in gate target list")));
            }
        }
        apply_matrix(&mut self.amps, n, u.matrix(), sites);
        Ok(())
    }

    /// Applies an arbitrary dense matrix on the listed sites without a
    /// unitarity requirement. The result is generally unnormalized; used
    /// for Hamiltonian terms and projector arithmetic.
    pub(crate) fn apply_raw(&mut self, m: &CMatrix<T>, sites: &[usize]) {
        let n = self.lattice.num_sites();
        apply_matrix(&mut self.amps, n, m, sites);
    }

    /// Probability of measuring |1⟩ at a site.
    pub fn site_probability(&self, site: usize) -> T {
        let mut p = T::zero();
        let mask = 1usize << site;
        for (idx, a) in self.amps.iter().enumerate() {
            if idx & mask != 0 {
                p += a.norm_sqr();
            }
        }
        p
    }

    /// Per-site |1⟩ probabilities in linear site order.
    pub fn site_probabilities(&self) -> Vec<T> {
        let n = self.num_sites();
        let mut probs = vec![T::zero(); n];
        for (idx, a) in self.amps.iter().enumerate() {
            let w = a.norm_sqr();
            if w > T::zero() {
                for (s, p) in probs.iter_mut().enumerate() {
                    if idx & (1 << s) != 0 {
                        *p += w;
                    }
                }
            }
        }
        probs
    }

    /// Inner product ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> Result<C<T>> {
        if self.lattice != other.lattice {
            return Err(Error::usage("inner product between states on different lattices"));
        }
        let mut acc = czero();
        for (a, b) in self.amps.iter().zip(&other.amps) {
            acc += a.conj() * b;
        }
        Ok(acc)
    }

    /// Largest amplitude difference ‖self − other‖∞.
    pub fn max_amp_diff(&self, other: &Self) -> T {
        let mut worst = T::zero();
        for (a, b) in self.amps.iter().zip(&other.amps) {
            let d = (a - b).norm_sqr().sqrt();
            if d > worst {
                worst = d;
            }
        }
        worst
    }

    /// Euclidean distance ‖self − other‖₂.
    pub fn l2_diff(&self, other: &Self) -> T {
        let mut s = T::zero();
        for (a, b) in self.amps.iter().zip(&other.amps) {
            s += (a - b).norm_sqr();
        }
        s.sqrt()
    }

    /// Smallest Euclidean distance min_φ ‖self − e^{iφ} other‖₂, which
    /// ignores a global phase between the two states.
    ///
    /// Computed as the elementwise difference after rotating `other` by
    /// the optimal phase, which stays accurate down to round-off where
    /// the closed-form ‖a‖² + ‖b‖² − 2|⟨a,b⟩| loses half its digits to
    /// cancellation.
    pub fn aligned_distance(&self, other: &Self) -> Result<T> {
        let overlap = self.inner(other)?;
        let mag = overlap.norm_sqr().sqrt();
        let phase = if mag > T::zero() {
            overlap.conj() / C::new(mag, T::zero())
        } else {
            C::new(T::one(), T::zero())
        };
        let mut d2 = T::zero();
        for (a, b) in self.amps.iter().zip(&other.amps) {
            d2 += (a - b * phase).norm_sqr();
        }
        Ok(d2.sqrt())
    }

    /// The state cyclically shifted by `shift`: the content of site x
    /// moves to site x + shift.
    pub fn translated(&self, shift: &[i64]) -> Self {
        let n = self.num_sites();
        let site_map: Vec<usize> =
            (0..n).map(|s| self.lattice.shifted(s, shift)).collect();
        let mut out = vec![czero(); self.amps.len()];
        for (idx, a) in self.amps.iter().enumerate() {
            let mut target = 0usize;
            for (s, &ms) in site_map.iter().enumerate() {
                if idx & (1 << s) != 0 {
                    target |= 1 << ms;
                }
            }
            out[target] = *a;
        }
        StateVector { lattice: self.lattice.clone(), amps: out }
    }
}

/// |⟨a|b⟩|², the squared overlap of two states.
pub fn fidelity<T: Float>(a: &StateVector<T>, b: &StateVector<T>) -> Result<T> {
    Ok(a.inner(b)?.norm_sqr())
}

fn check_cap(n: usize) -> Result<()> {
    let cap = site_cap();
    if n > cap {
        return Err(Error::resource(format!(
            "{n} sites exceeds the {cap}-qubit state cap (override with QCA_MAX_QUBITS)"
        )));
    }
    Ok(())
}
