//! Oracles shared by the integration suites, built from first
//! principles (permutation matrices, Kronecker products, lookup
//! tables) rather than the library's simulation kernels.
#![allow(dead_code)]

use qca::scalar::C;
use qca::{CMatrix64, Lattice, StateVector64};
use rand::Rng;

/// Dense operator for `u` acting on `sites` of an `n`-site register:
/// P^T (u ⊗ I) P with an explicit basis permutation that moves the
/// listed sites to the most significant bits in listed order.
pub fn kron_embed(u: &CMatrix64, sites: &[usize], n: usize) -> CMatrix64 {
    let k = sites.len();
    let dim = 1usize << n;
    let rest: Vec<usize> = (0..n).filter(|s| !sites.contains(s)).collect();
    let mut p = CMatrix64::zeros(dim, dim);
    for old in 0..dim {
        let mut high = 0usize;
        for (j, &s) in sites.iter().enumerate() {
            high |= (old >> s & 1) << (k - 1 - j);
        }
        let mut low = 0usize;
        for (j, &s) in rest.iter().enumerate() {
            low |= (old >> s & 1) << j;
        }
        p[((high << (n - k)) | low, old)] = C::new(1.0, 0.0);
    }
    let identity = CMatrix64::identity(1 << (n - k), 1 << (n - k));
    p.transpose() * u.kronecker(&identity) * p
}

/// Applies a dense operator to a state by direct matrix-vector product.
pub fn apply_dense(m: &CMatrix64, state: &StateVector64) -> StateVector64 {
    let amps = state.amplitudes();
    let dim = amps.len();
    let mut out = vec![C::new(0.0, 0.0); dim];
    for (r, slot) in out.iter_mut().enumerate() {
        for (c, a) in amps.iter().enumerate() {
            *slot += m[(r, c)] * a;
        }
    }
    StateVector64::from_amplitudes(state.lattice(), out).unwrap()
}

/// One row update of a three-cell rule, straight from the rule
/// number's bits.
pub fn reference_eca_step(rule: u8, row: &[bool]) -> Vec<bool> {
    let w = row.len();
    (0..w)
        .map(|i| {
            let idx = (u8::from(row[(i + w - 1) % w]) << 2)
                | (u8::from(row[i]) << 1)
                | u8::from(row[(i + 1) % w]);
            rule >> idx & 1 == 1
        })
        .collect()
}

/// Classical evolution of one block-partitioned step: `perm` applied to
/// every block of the first tiling, then every block of the second.
/// Block values read the first listed site as the most significant bit.
pub fn classical_block_step(bits: usize, perm: &[usize], tilings: [&[Vec<usize>]; 2]) -> usize {
    let mut out = bits;
    for blocks in tilings {
        let mut next = out;
        for block in blocks {
            let mut value = 0usize;
            for &s in block {
                value = (value << 1) | (out >> s & 1);
            }
            let image = perm[value];
            for (j, &s) in block.iter().enumerate() {
                let bit = image >> (block.len() - 1 - j) & 1;
                next = (next & !(1 << s)) | (bit << s);
            }
        }
        out = next;
    }
    out
}

/// Random normalized state with the caller's generator.
pub fn random_state<R: Rng>(lattice: &Lattice, rng: &mut R) -> StateVector64 {
    let dim = 1usize << lattice.num_sites();
    let mut amps: Vec<C<f64>> = (0..dim)
        .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    StateVector64::from_amplitudes(lattice, amps).unwrap()
}

/// Distinct sites sampled without replacement, in random order.
pub fn random_sites<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}
