//! Reduced density matrices and partial traces.
//!
//! Region bit convention matches gates: the first listed site of a
//! region is the most significant bit of the region-local index.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, hermiticity_deviation, trace_norm, CMatrix};
use crate::scalar::{czero, Float, C};
use crate::state::StateVector;

/// Density matrix of an ordered lattice region.
#[derive(Debug, Clone)]
pub struct DensityMatrix<T: Float> {
    region: Vec<usize>,
    matrix: CMatrix<T>,
}

impl<T: Float> DensityMatrix<T> {
    /// Wraps an operator on an ordered region. Only the shape is
    /// validated here; [`check_invariants`](Self::check_invariants)
    /// separately tests the density-matrix axioms, so non-Hermitian
    /// operator carriers (useful in tests and intermediate algebra) are
    /// representable.
    pub fn new(region: &[usize], matrix: CMatrix<T>) -> Result<Self> {
        let dim = 1usize << region.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::usage(format!(
                "matrix of side {} does not cover a {}-site region",
                matrix.nrows(),
                region.len()
            )));
        }
        for (i, s) in region.iter().enumerate() {
            if region[..i].contains(s) {
                return Err(Error::usage(format!("duplicate site {s} in region")));
            }
        }
        Ok(DensityMatrix { region: region.to_vec(), matrix })
    }

    pub fn region(&self) -> &[usize] {
        &self.region
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    /// Verifies Hermiticity and unit trace within `tol`, and positive
    /// semidefiniteness down to −10·tol on the smallest eigenvalue.
    pub fn check_invariants(&self, tol: T) -> Result<()> {
        if hermiticity_deviation(&self.matrix) > tol {
            return Err(Error::usage("density matrix is not Hermitian"));
        }
        let tr = self.matrix.trace();
        if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
            return Err(Error::usage("density matrix trace is not 1"));
        }
        let (vals, _) = hermitian_eig(&self.matrix);
        let min = vals.into_iter().fold(T::one(), |a, b| if b < a { b } else { a });
        if min < -tol * T::of(10.0) {
            return Err(Error::usage("density matrix has a significantly negative eigenvalue"));
        }
        Ok(())
    }

    /// Trace-norm distance to another density matrix on the same region.
    pub fn trace_distance(&self, other: &Self) -> Result<T> {
        if self.region != other.region {
            return Err(Error::usage("trace distance between different regions"));
        }
        Ok(trace_norm(&(&self.matrix - &other.matrix)))
    }

    /// Traces out the region sites not in `keep`.
    ///
    /// `keep` must be a subset of the region; the result's region is
    /// `keep` in the given order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        for s in keep {
            if !self.region.contains(s) {
                return Err(Error::usage(format!(
                    "site {s} not part of the region being traced"
                )));
            }
        }
        let k = self.region.len();
        let m = keep.len();
        let traced: Vec<usize> = self
            .region
            .iter()
            .copied()
            .filter(|s| !keep.contains(s))
            .collect();

        let local_bit = |site: usize| -> usize {
            let j = self.region.iter().position(|&r| r == site).unwrap();
            k - 1 - j
        };
        let keep_offset = |kc: usize| -> usize {
            let mut o = 0usize;
            for (j, &s) in keep.iter().enumerate() {
                if (kc >> (m - 1 - j)) & 1 == 1 {
                    o |= 1 << local_bit(s);
                }
            }
            o
        };
        let traced_offset = |tc: usize| -> usize {
            let mut o = 0usize;
            for (j, &s) in traced.iter().enumerate() {
                if (tc >> j) & 1 == 1 {
                    o |= 1 << local_bit(s);
                }
            }
            o
        };

        let dim = 1usize << m;
        let mut out = CMatrix::<T>::zeros(dim, dim);
        for r in 0..dim {
            let ro = keep_offset(r);
            for c in 0..dim {
                let co = keep_offset(c);
                let mut acc: C<T> = czero();
                for tc in 0..(1usize << traced.len()) {
                    let to = traced_offset(tc);
                    acc += self.matrix[(ro | to, co | to)];
                }
                out[(r, c)] = acc;
            }
        }
        Ok(DensityMatrix { region: keep.to_vec(), matrix: out })
    }
}

/// Partial trace of |ψ⟩⟨ψ| onto an ordered site region.
pub fn reduced_density<T: Float>(
    state: &StateVector<T>,
    region: &[usize],
) -> Result<DensityMatrix<T>> {
    let n = state.num_sites();
    let k = region.len();
    for (i, &s) in region.iter().enumerate() {
        if s >= n {
            return Err(Error::usage(format!("site {s} outside lattice of {n} sites")));
        }
        if region[..i].contains(&s) {
            return Err(Error::usage(format!("duplicate site {s} in region")));
        }
    }

    let offsets: Vec<usize> = (0..(1usize << k))
        .map(|g| {
            let mut o = 0usize;
            for (j, &s) in region.iter().enumerate() {
                if (g >> (k - 1 - j)) & 1 == 1 {
                    o |= 1 << s;
                }
            }
            o
        })
        .collect();
    let mut positions: Vec<usize> = region.to_vec();
    positions.sort_unstable();

    let amps = state.amplitudes();
    let dim = 1usize << k;
    let mut out = CMatrix::<T>::zeros(dim, dim);
    for rest in 0..(1usize << (n - k)) {
        let mut base = rest;
        for &p in &positions {
            base = ((base >> p) << (p + 1)) | (base & ((1 << p) - 1));
        }
        for r in 0..dim {
            let ar = amps[base | offsets[r]];
            for c in 0..dim {
                out[(r, c)] += ar * amps[base | offsets[c]].conj();
            }
        }
    }
    Ok(DensityMatrix { region: region.to_vec(), matrix: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;
    use crate::linalg::max_abs;
    use crate::scalar::{c, cone};

    type S = StateVector<f64>;

    #[test]
    fn product_state_marginal_is_pure() {
        let l = Lattice::ring(2).unwrap();
        let s = S::basis_state(&l, "01").unwrap();
        let rho = reduced_density(&s, &[1]).unwrap();
        assert!((rho.matrix()[(0, 0)] - cone()).norm() < 1e-15);
        assert!(rho.matrix()[(1, 1)].norm() < 1e-15);
        rho.check_invariants(1e-10).unwrap();
    }

    #[test]
    fn bell_state_marginal_is_maximally_mixed() {
        let l = Lattice::ring(2).unwrap();
        let h = 0.5f64.sqrt();
        let amps = vec![c(h, 0.0), czero(), czero(), c(h, 0.0)];
        let s = S::from_amplitudes(&l, amps).unwrap();
        let rho = reduced_density(&s, &[0]).unwrap();
        assert!((rho.matrix()[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((rho.matrix()[(1, 1)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!(rho.matrix()[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn ghz_two_site_marginal() {
        let l = Lattice::ring(3).unwrap();
        let h = 0.5f64.sqrt();
        let mut amps = vec![czero(); 8];
        amps[0] = c(h, 0.0);
        amps[7] = c(h, 0.0);
        let s = S::from_amplitudes(&l, amps).unwrap();
        let rho = reduced_density(&s, &[0, 1]).unwrap();
        let m = rho.matrix();
        assert!((m[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((m[(3, 3)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!(m[(0, 3)].norm() < 1e-15);
        rho.check_invariants(1e-10).unwrap();
    }

    #[test]
    fn partial_trace_identity_when_keeping_all() {
        let l = Lattice::ring(2).unwrap();
        let s = S::basis_state(&l, "10").unwrap();
        let rho = reduced_density(&s, &[0, 1]).unwrap();
        let same = rho.partial_trace(&[0, 1]).unwrap();
        assert!(max_abs(&(rho.matrix() - same.matrix())) < 1e-15);
    }

    #[test]
    fn nested_partial_trace_matches_direct_reduction() {
        let l = Lattice::ring(3).unwrap();
        let h = 0.5f64.sqrt();
        let mut amps = vec![czero(); 8];
        amps[1] = c(h, 0.0);
        amps[6] = c(0.0, h);
        let s = S::from_amplitudes(&l, amps).unwrap();
        let big = reduced_density(&s, &[2, 0]).unwrap();
        let via = big.partial_trace(&[0]).unwrap();
        let direct = reduced_density(&s, &[0]).unwrap();
        assert!(via.trace_distance(&direct).unwrap() < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_foreign_site() {
        let l = Lattice::ring(3).unwrap();
        let s = S::basis_state(&l, "000").unwrap();
        let rho = reduced_density(&s, &[0, 1]).unwrap();
        assert!(rho.partial_trace(&[2]).is_err());
    }
}
