//! Dense complex matrix helpers shared by the models and transpilers.
//!
//! Everything here operates on `nalgebra` dynamic matrices over
//! `Complex<T>`. Sizes stay small (at most 2^14) so dense methods are
//! the workhorse: scaled-and-squared Hermitian exponentials for
//! continuous evolution, eigendecompositions for unitary logarithms
//! and spectra, singular values for trace norms.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{c, ci, cone, czero, Float, C};

/// Dense complex matrix over the crate scalar.
pub type CMatrix<T> = DMatrix<C<T>>;
/// Dense complex vector over the crate scalar.
pub type CVector<T> = DVector<C<T>>;

/// Identity matrix of side `n`.
pub fn eye<T: Float>(n: usize) -> CMatrix<T> {
    CMatrix::identity(n, n)
}

/// Builds a matrix from rows of complex entries.
pub fn from_rows<T: Float>(rows: &[Vec<C<T>>]) -> CMatrix<T> {
    let nr = rows.len();
    let nc = if nr > 0 { rows[0].len() } else { 0 };
    CMatrix::from_fn(nr, nc, |i, j| rows[i][j])
}

/// Pauli X.
pub fn pauli_x<T: Float>() -> CMatrix<T> {
    from_rows(&[vec![czero(), cone()], vec![cone(), czero()]])
}

/// Pauli Y.
pub fn pauli_y<T: Float>() -> CMatrix<T> {
    from_rows(&[vec![czero(), -ci::<T>()], vec![ci(), czero()]])
}

/// Pauli Z.
pub fn pauli_z<T: Float>() -> CMatrix<T> {
    from_rows(&[vec![cone(), czero()], vec![czero(), -cone::<T>()]])
}

/// Largest absolute entry of a matrix.
pub fn max_abs<T: Float>(m: &CMatrix<T>) -> T {
    let mut worst = T::zero();
    for v in m.iter() {
        let a = v.norm_sqr().sqrt();
        if a > worst {
            worst = a;
        }
    }
    worst
}

/// Deviation of `u` from unitarity: max |(U†U − I)_{ab}|.
pub fn unitarity_deviation<T: Float>(u: &CMatrix<T>) -> T {
    let n = u.nrows();
    let d = u.adjoint() * u - eye::<T>(n);
    max_abs(&d)
}

/// Deviation of `h` from Hermiticity: max |(H − H†)_{ab}|.
pub fn hermiticity_deviation<T: Float>(h: &CMatrix<T>) -> T {
    let d = h - h.adjoint();
    max_abs(&d)
}

/// Checks `u` is square and unitary within `tol`.
pub fn require_unitary<T: Float>(u: &CMatrix<T>, tol: f64, what: &str) -> Result<()> {
    if u.nrows() != u.ncols() {
        return Err(Error::config(format!("{what}: matrix must be square")));
    }
    let dev = unitarity_deviation(u);
    if dev > T::of(tol) {
        return Err(Error::config(format!(
            "{what}: matrix is not unitary (deviation {dev:?})"
        )));
    }
    Ok(())
}

/// Checks `h` is square and Hermitian within `tol`.
pub fn require_hermitian<T: Float>(h: &CMatrix<T>, tol: f64, what: &str) -> Result<()> {
    if h.nrows() != h.ncols() {
        return Err(Error::config(format!("{what}: matrix must be square")));
    }
    let dev = hermiticity_deviation(h);
    if dev > T::of(tol) {
        return Err(Error::config(format!(
            "{what}: matrix is not Hermitian (deviation {dev:?})"
        )));
    }
    Ok(())
}

/// Distance between matrices modulo a global phase.
///
/// Aligns `b` to `a` with the phase of tr(a†b) and returns the largest
/// entry of the difference. Zero iff a = e^{iφ} b for some φ (for
/// matrices of non-vanishing overlap).
pub fn phase_distance<T: Float>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    let t = (a.adjoint() * b).trace();
    let phase = if t.norm_sqr() > T::zero() {
        let n = t.norm_sqr().sqrt();
        C::new(t.re / n, t.im / n)
    } else {
        cone()
    };
    let d = b - a.map(|x| x * phase);
    max_abs(&d)
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues (ascending
/// pairing not guaranteed) and a unitary matrix of column eigenvectors.
///
/// The library solver mispairs vectors on heavily degenerate spectra,
/// so its result is checked by reconstruction and replaced by cyclic
/// Jacobi rotations when it fails.
pub fn hermitian_eig<T: Float>(h: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let n = h.nrows();
    let se = nalgebra::SymmetricEigen::new(h.clone());
    let mut d = CMatrix::<T>::zeros(n, n);
    for k in 0..n {
        d[(k, k)] = C::new(se.eigenvalues[k], T::zero());
    }
    let recon = &se.eigenvectors * d * se.eigenvectors.adjoint();
    let scale = if max_abs(h) > T::one() { max_abs(h) } else { T::one() };
    let tol = T::default_epsilon() * T::of(100.0) * T::of(n as f64) * scale;
    if max_abs(&(recon - h)) <= tol {
        let vals = se.eigenvalues.iter().copied().collect();
        return (vals, se.eigenvectors);
    }
    jacobi_hermitian_eig(h)
}

/// Cyclic Jacobi eigendecomposition for Hermitian matrices: each
/// rotation zeroes one off-diagonal pair exactly, so degeneracy costs
/// nothing. Slower than the library solver but unconditionally stable.
fn jacobi_hermitian_eig<T: Float>(h: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let n = h.nrows();
    let mut a = h.clone();
    let mut v = eye::<T>(n);
    let scale = if max_abs(h) > T::one() { max_abs(h) } else { T::one() };
    let skip = T::default_epsilon() * scale * T::of(0.5);
    let two = T::of(2.0);
    for _ in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm_sqr().sqrt();
                if r <= skip {
                    continue;
                }
                rotated = true;
                let phase = apq / C::new(r, T::zero());
                let theta = (a[(q, q)].re - a[(p, p)].re) / (two * r);
                let sign = if theta < T::zero() { -T::one() } else { T::one() };
                let t = sign / (theta.abs() + (T::one() + theta * theta).sqrt());
                let cos = T::one() / (T::one() + t * t).sqrt();
                let sin = t * cos;
                let jp = C::new(cos, T::zero());
                let jq_p = -phase.conj() * C::new(sin, T::zero());
                let jp_q = phase * C::new(sin, T::zero());
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * jp + aiq * jq_p;
                    a[(i, q)] = aip * jp_q + aiq * jp;
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * jp + viq * jq_p;
                    v[(i, q)] = vip * jp_q + viq * jp;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = jp * apj + jq_p.conj() * aqj;
                    a[(q, j)] = jp_q.conj() * apj + jp * aqj;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let vals = (0..n).map(|k| a[(k, k)].re).collect();
    (vals, v)
}

/// e^{−i t H} for Hermitian `h`, by scaling and squaring of the Taylor
/// series. Eigendecomposition-free, so heavy spectral degeneracy costs
/// nothing in accuracy.
pub fn expm_minus_i_t<T: Float>(h: &CMatrix<T>, t: T) -> CMatrix<T> {
    let n = h.nrows();
    let a = h.map(|x| x * C::new(T::zero(), -t));
    let mut norm = T::zero();
    for j in 0..n {
        let mut col = T::zero();
        for i in 0..n {
            col += a[(i, j)].norm_sqr().sqrt();
        }
        if col > norm {
            norm = col;
        }
    }
    let mut squarings = 0u32;
    let mut scale = T::one();
    let half = T::of(0.5);
    while norm * scale > half && squarings < 64 {
        squarings += 1;
        scale *= half;
    }
    let scaled = a.map(|x| x * C::new(scale, T::zero()));
    let mut sum = eye::<T>(n);
    let mut term = eye::<T>(n);
    for k in 1..=28u32 {
        term = (&term * &scaled).map(|x| x * C::new(T::one() / T::of(f64::from(k)), T::zero()));
        sum += &term;
        if max_abs(&term) < T::default_epsilon() * T::of(0.25) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Eigendecomposition of a unitary matrix.
///
/// Returns eigenphases θ_k in (−π, π] and a unitary eigenvector matrix
/// V with U = V diag(e^{iθ}) V†. Works by diagonalizing a random real
/// mix of the commuting Hermitian parts (U+U†)/2 and (U−U†)/2i, which
/// shares U's eigenvectors; retries with fresh mixes until the
/// resulting basis actually diagonalizes U.
pub fn unitary_eig<T: Float>(u: &CMatrix<T>) -> Result<(Vec<T>, CMatrix<T>)> {
    let n = u.nrows();
    let h_re = (u + u.adjoint()).map(|x| x * c::<T>(0.5, 0.0));
    let h_im = (u - u.adjoint()).map(|x| x * c::<T>(0.0, -0.5));
    let mut rng = ChaCha8Rng::seed_from_u64(2023);
    let tol = T::of(1e-9) * T::of(n as f64);
    for _ in 0..24 {
        let a = T::of(rng.gen_range(0.2..1.0));
        let b = T::of(rng.gen_range(0.2..1.0));
        let mix = h_re.map(|x| x * C::new(a, T::zero())) + h_im.map(|x| x * C::new(b, T::zero()));
        let (_, vecs) = hermitian_eig(&mix);
        let d = vecs.adjoint() * u * &vecs;
        let mut off = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let v = d[(i, j)].norm_sqr().sqrt();
                    if v > off {
                        off = v;
                    }
                }
            }
        }
        if off < tol {
            let phases = (0..n).map(|k| d[(k, k)].im.atan2(d[(k, k)].re)).collect();
            return Ok((phases, vecs));
        }
    }
    Err(Error::usage("unitary eigendecomposition did not converge"))
}

/// Hermitian generator of a unitary: H with u = e^{−i H τ}.
///
/// Uses the principal branch (eigenphases in (−π, π]), which keeps ‖H‖
/// minimal; an eigenvalue of exactly −1 maps to phase π.
pub fn log_unitary<T: Float>(u: &CMatrix<T>, tau: T) -> Result<CMatrix<T>> {
    let (phases, vecs) = unitary_eig(u)?;
    let n = u.nrows();
    let mut d = CMatrix::<T>::zeros(n, n);
    for (k, &theta) in phases.iter().enumerate() {
        d[(k, k)] = C::new(-theta / tau, T::zero());
    }
    Ok(&vecs * d * vecs.adjoint())
}

/// Trace norm (sum of singular values).
pub fn trace_norm<T: Float>(m: &CMatrix<T>) -> T {
    let sv = m.clone().singular_values();
    let mut s = T::zero();
    for v in sv.iter() {
        s += *v;
    }
    s
}

/// Standard normal sample by Box–Muller.
pub(crate) fn standard_normal<T: Float, R: Rng>(rng: &mut R) -> T {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    T::of((-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos())
}

/// Haar-random unitary of side `n`: QR of a complex Ginibre matrix with
/// the R-diagonal phases absorbed into Q.
pub fn haar_unitary<T: Float, R: Rng>(n: usize, rng: &mut R) -> CMatrix<T> {
    let g = CMatrix::<T>::from_fn(n, n, |_, _| {
        C::new(standard_normal(rng), standard_normal(rng))
    });
    let qr = g.qr();
    let r = qr.r();
    let q = qr.q();
    let mut fix = CMatrix::<T>::zeros(n, n);
    for i in 0..n {
        let d = r[(i, i)];
        let norm = d.norm_sqr().sqrt();
        fix[(i, i)] = if norm > T::zero() {
            C::new(d.re / norm, d.im / norm)
        } else {
            cone()
        };
    }
    q * fix
}

/// Haar-random normalized state of dimension `dim`.
pub fn haar_state<T: Float, R: Rng>(dim: usize, rng: &mut R) -> CVector<T> {
    let mut v = CVector::<T>::from_fn(dim, |_, _| {
        C::new(standard_normal(rng), standard_normal(rng))
    });
    let n = v.norm();
    v /= C::new(n, T::zero());
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = CMatrix<f64>;

    #[test]
    fn pauli_matrices_are_unitary_and_hermitian() {
        for m in [pauli_x::<f64>(), pauli_y(), pauli_z()] {
            assert!(unitarity_deviation(&m) < 1e-15);
            assert!(hermiticity_deviation(&m) < 1e-15);
        }
    }

    #[test]
    fn phase_distance_ignores_global_phase() {
        let u = pauli_y::<f64>();
        let phase = C::new(0.6, 0.8);
        let v = u.map(|x| x * phase);
        assert!(phase_distance(&u, &v) < 1e-14);
        assert!(phase_distance(&u, &pauli_x()) > 0.5);
    }

    #[test]
    fn hermitian_exponential_matches_hand_result() {
        let x = pauli_x::<f64>();
        let t = 0.7;
        let u = expm_minus_i_t(&x, t);
        let expect = from_rows(&[
            vec![c(t.cos(), 0.0), c(0.0, -t.sin())],
            vec![c(0.0, -t.sin()), c(t.cos(), 0.0)],
        ]);
        assert!(max_abs(&(&u - &expect)) < 1e-13);
    }

    #[test]
    fn unitary_log_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let u: M = haar_unitary(4, &mut rng);
            let h = log_unitary(&u, 1.0).unwrap();
            assert!(hermiticity_deviation(&h) < 1e-9);
            let back = expm_minus_i_t(&h, 1.0);
            assert!(max_abs(&(&back - &u)) < 1e-9);
        }
    }

    #[test]
    fn log_of_pauli_x_is_shifted_projector() {
        let x = pauli_x::<f64>();
        let h = log_unitary(&x, 1.0).unwrap();
        let pi = std::f64::consts::PI;
        let expect = (x - eye::<f64>(2)).map(|v| v * c::<f64>(pi / 2.0, 0.0));
        let diff = phase_distance(
            &expm_minus_i_t(&h, 1.0),
            &expm_minus_i_t(&expect, 1.0),
        );
        assert!(diff < 1e-12);
        let direct = max_abs(&(&h - &expect));
        assert!(direct < 1e-9, "principal branch should give (π/2)(X−I), off by {direct}");
    }

    #[test]
    fn haar_unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 4, 8] {
            let u: M = haar_unitary(n, &mut rng);
            assert!(unitarity_deviation(&u) < 1e-12);
        }
    }

    /// A one-site generator embedded in a larger register: the spectrum
    /// is two eigenvalues of multiplicity 8 each, which defeats the
    /// library eigensolver's vector pairing.
    fn degenerate_embedded() -> M {
        let theta = std::f64::consts::PI / 8.0;
        let h2 = from_rows(&[
            vec![c(0.0, 0.0), c(0.0, theta)],
            vec![c(0.0, -theta), c(0.0, 0.0)],
        ]);
        eye::<f64>(8).kronecker(&h2)
    }

    #[test]
    fn eigendecomposition_survives_heavy_degeneracy() {
        let h = degenerate_embedded();
        let (vals, vecs) = hermitian_eig(&h);
        assert!(unitarity_deviation(&vecs) < 1e-12);
        let mut d = M::zeros(16, 16);
        for (k, &lam) in vals.iter().enumerate() {
            d[(k, k)] = c(lam, 0.0);
        }
        let recon = &vecs * d * vecs.adjoint();
        assert!(max_abs(&(recon - &h)) < 1e-12);
    }

    #[test]
    fn exponential_of_embedded_generator_factorizes() {
        let h = degenerate_embedded();
        let theta = std::f64::consts::PI / 8.0;
        let h2 = from_rows(&[
            vec![c(0.0, 0.0), c(0.0, theta)],
            vec![c(0.0, -theta), c(0.0, 0.0)],
        ]);
        let t = 0.7;
        let whole = expm_minus_i_t(&h, t);
        let factor = eye::<f64>(8).kronecker(&expm_minus_i_t(&h2, t));
        assert!(max_abs(&(whole - factor)) < 1e-13);
    }

    #[test]
    fn exponential_satisfies_the_group_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u: M = haar_unitary(8, &mut rng);
        let mut d = M::zeros(8, 8);
        for k in 0..8 {
            d[(k, k)] = c(rng.gen_range(-3.0..3.0), 0.0);
        }
        let h = &u * d * u.adjoint();
        let (t1, t2) = (0.9, -0.4);
        let combined = expm_minus_i_t(&h, t1 + t2);
        let split = expm_minus_i_t(&h, t1) * expm_minus_i_t(&h, t2);
        assert!(max_abs(&(combined - split)) < 1e-12);
        assert!(unitarity_deviation(&expm_minus_i_t(&h, 17.3)) < 1e-12);
    }

    #[test]
    fn trace_norm_of_projector_difference() {
        let p0 = from_rows::<f64>(&[vec![cone(), czero()], vec![czero(), czero()]]);
        let p1 = from_rows::<f64>(&[vec![czero(), czero()], vec![czero(), cone()]]);
        let d = &p0 - &p1;
        assert!((trace_norm(&d) - 2.0).abs() < 1e-12);
    }
}
