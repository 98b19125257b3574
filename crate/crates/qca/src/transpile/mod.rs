//! Compilers between the automaton models and the gate-level
//! decompositions they are built from.
//!
//! The four model conversions are
//! [`mqca_to_cqca`] (block automaton → coloured automaton),
//! [`cqca_to_mqca`] (coloured automaton → block automaton),
//! [`cqca_to_ctqca`] (coloured automaton → piecewise-constant
//! continuous schedule), and [`ctqca_to_cqca`] (continuous automaton →
//! coloured automaton realizing one product-formula step).
//!
//! Each conversion returns the compiled model together with a
//! [`Certification`]: a numerically measured bound on how far the
//! compiled dynamics drift from the source dynamics on a standard probe
//! set. The gate-level workhorses are [`decompose_two_qubit`] (at most
//! three conditioned-X gates per two-site unitary) and
//! [`decompose_block`] (conditioned single-site gates for blocks of up
//! to four sites).
//!
//! Gate sequences address block-local *roles* rather than lattice
//! sites. Role 0 is the most significant bit of a block's basis index,
//! matching the matrix convention of
//! [`LocalUnitary`](crate::unitary::LocalUnitary).

mod continuous;
mod discrete;
mod kak;
mod two_level;

pub use continuous::{cqca_to_ctqca, ctqca_to_cqca, ctqca_to_cqca_with_order};
pub use discrete::{cqca_to_mqca, mqca_to_cqca};
pub use kak::decompose_two_qubit;
pub use two_level::decompose_block;

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{max_abs, pauli_x, CMatrix};
use crate::model::Automaton;
use crate::scalar::{czero, Float, C};
use crate::verify::probe_states;

/// One conditioned single-site gate inside a [`GateSequence`].
///
/// `target` and the control roles index sites of a block, role 0 being
/// the most significant bit. Each control pins a role to a basis value:
/// `(role, true)` requires |1⟩, `(role, false)` requires |0⟩. The gate
/// applies exactly when every control is satisfied.
#[derive(Debug, Clone)]
pub struct GateOp<T: Float> {
    pub target: usize,
    pub controls: Vec<(usize, bool)>,
    pub matrix: CMatrix<T>,
}

impl<T: Float> GateOp<T> {
    /// Unconditioned gate on one role.
    pub fn single(target: usize, matrix: CMatrix<T>) -> Self {
        GateOp { target, controls: Vec::new(), matrix }
    }

    /// Gate applied when `control` holds |1⟩.
    pub fn controlled(control: usize, target: usize, matrix: CMatrix<T>) -> Self {
        GateOp { target, controls: vec![(control, true)], matrix }
    }

    /// Conditioned X, the controlled-NOT.
    pub fn cx(control: usize, target: usize) -> Self {
        GateOp::controlled(control, target, pauli_x())
    }

    /// True when the op is a conditioned gate (one control or more).
    pub fn is_conditioned(&self) -> bool {
        !self.controls.is_empty()
    }
}

/// Ordered list of conditioned single-site gates on a block of `arity`
/// sites, applied first-to-last.
///
/// The dense product of the ops reproduces the source block unitary;
/// decompositions in this module keep that reproduction exact to well
/// under 1e-8 including the global phase.
#[derive(Debug, Clone)]
pub struct GateSequence<T: Float> {
    arity: usize,
    ops: Vec<GateOp<T>>,
}

impl<T: Float> GateSequence<T> {
    /// Validates role bounds: targets and controls must name distinct
    /// roles below `arity` and every matrix must be 2×2.
    pub fn new(arity: usize, ops: Vec<GateOp<T>>) -> Result<Self> {
        if arity == 0 {
            return Err(Error::usage("gate sequence needs at least one role"));
        }
        for (i, op) in ops.iter().enumerate() {
            if op.matrix.nrows() != 2 || op.matrix.ncols() != 2 {
                return Err(Error::usage(format!(
                    "op {i}: gate matrix must be 2x2, got {}x{}",
                    op.matrix.nrows(),
                    op.matrix.ncols()
                )));
            }
            if op.target >= arity {
                return Err(Error::usage(format!(
                    "op {i}: target role {} outside block of {arity} sites",
                    op.target
                )));
            }
            let mut seen = vec![op.target];
            for &(role, _) in &op.controls {
                if role >= arity {
                    return Err(Error::usage(format!(
                        "op {i}: control role {role} outside block of {arity} sites"
                    )));
                }
                if seen.contains(&role) {
                    return Err(Error::usage(format!(
                        "op {i}: role {role} used twice in one op"
                    )));
                }
                seen.push(role);
            }
        }
        Ok(GateSequence { arity, ops })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn ops(&self) -> &[GateOp<T>] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Number of conditioned gates in the sequence.
    pub fn conditioned_count(&self) -> usize {
        self.ops.iter().filter(|op| op.is_conditioned()).count()
    }

    /// Dense 2^arity × 2^arity product of the ops in application order.
    pub fn dense(&self) -> CMatrix<T> {
        let dim = 1usize << self.arity;
        let mut u = crate::linalg::eye::<T>(dim);
        for op in &self.ops {
            apply_op_dense(op, self.arity, &mut u);
        }
        u
    }
}

/// Left-multiplies the dense matrix `u` by one conditioned gate.
fn apply_op_dense<T: Float>(op: &GateOp<T>, arity: usize, u: &mut CMatrix<T>) {
    let dim = 1usize << arity;
    let tbit = arity - 1 - op.target;
    let mut cmask = 0usize;
    let mut cval = 0usize;
    for &(role, value) in &op.controls {
        let bit = arity - 1 - role;
        cmask |= 1 << bit;
        if value {
            cval |= 1 << bit;
        }
    }
    let m = &op.matrix;
    for col in 0..dim {
        for row0 in 0..dim {
            if row0 & (1 << tbit) != 0 || row0 & cmask != cval {
                continue;
            }
            let row1 = row0 | (1 << tbit);
            let a0 = u[(row0, col)];
            let a1 = u[(row1, col)];
            u[(row0, col)] = m[(0, 0)] * a0 + m[(0, 1)] * a1;
            u[(row1, col)] = m[(1, 0)] * a0 + m[(1, 1)] * a1;
        }
    }
}

/// Embeds a gate on the listed roles into a dense block operator,
/// identity on every other role. The first listed role is the most
/// significant bit of the gate's own index.
pub(crate) fn embed_operator<T: Float>(
    m: &CMatrix<T>,
    roles: &[usize],
    arity: usize,
) -> CMatrix<T> {
    let dim = 1usize << arity;
    let mut out = CMatrix::<T>::zeros(dim, dim);
    let bits: Vec<usize> = roles.iter().map(|&r| arity - 1 - r).collect();
    crate::ctqca::add_embedded(&mut out, arity, m, &bits);
    out
}

/// Measured agreement between a source model and its compiled form.
///
/// Obtained by stepping both models through the standard probe set and
/// recording the largest phase-aligned trajectory distance seen at any
/// step.
#[derive(Debug, Clone, Copy)]
pub struct Certification<T: Float> {
    pub probe_count: usize,
    pub steps: usize,
    pub max_deviation: T,
}

impl<T: Float> fmt::Display for Certification<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dev = self.max_deviation.to_f64().unwrap_or(f64::NAN);
        write!(
            f,
            "certified on {} probes over {} steps: max deviation {:.3e}",
            self.probe_count, self.steps, dev
        )
    }
}

/// A compiled model bundled with its certification.
#[derive(Debug, Clone)]
pub struct Transpiled<M, T: Float> {
    pub model: M,
    pub certification: Certification<T>,
}

/// Runs both models through the probe set for `steps` steps and records
/// the worst phase-aligned trajectory deviation.
pub(crate) fn certify<T: Float>(
    source: &dyn Automaton<T>,
    target: &dyn Automaton<T>,
    steps: usize,
) -> Result<Certification<T>> {
    if source.lattice() != target.lattice() {
        return Err(Error::usage(
            "certification needs source and compiled model on the same lattice",
        ));
    }
    let probes = probe_states::<T>(source.lattice())?;
    let mut worst = T::zero();
    for probe in &probes {
        let mut a = probe.clone();
        let mut b = probe.clone();
        for _ in 0..steps {
            source.step(&mut a)?;
            target.step(&mut b)?;
            let dev = a.aligned_distance(&b)?;
            if dev > worst {
                worst = dev;
            }
        }
    }
    Ok(Certification { probe_count: probes.len(), steps, max_deviation: worst })
}

/// Certification against precomputed dense step operators, for targets
/// whose per-step evolution is expensive to repeat per probe.
pub(crate) fn certify_operators<T: Float>(
    lattice: &crate::lattice::Lattice,
    u_source: &CMatrix<T>,
    u_target: &CMatrix<T>,
    steps: usize,
) -> Result<Certification<T>> {
    let probes = probe_states::<T>(lattice)?;
    let mut worst = T::zero();
    for probe in &probes {
        let mut a: Vec<C<T>> = probe.amplitudes().to_vec();
        let mut b = a.clone();
        for _ in 0..steps {
            a = mat_vec(u_source, &a);
            b = mat_vec(u_target, &b);
            let dev = aligned_vec_distance(&a, &b);
            if dev > worst {
                worst = dev;
            }
        }
    }
    Ok(Certification { probe_count: probes.len(), steps, max_deviation: worst })
}

fn mat_vec<T: Float>(m: &CMatrix<T>, v: &[C<T>]) -> Vec<C<T>> {
    let n = m.nrows();
    let mut out = vec![czero::<T>(); n];
    for (r, o) in out.iter_mut().enumerate() {
        let mut acc = czero::<T>();
        for c in 0..n {
            acc += m[(r, c)] * v[c];
        }
        *o = acc;
    }
    out
}

fn aligned_vec_distance<T: Float>(a: &[C<T>], b: &[C<T>]) -> T {
    let mut overlap = czero::<T>();
    for (x, y) in a.iter().zip(b) {
        overlap += x.conj() * y;
    }
    let mag = overlap.norm_sqr().sqrt();
    let phase = if mag > T::zero() {
        overlap.conj() / C::new(mag, T::zero())
    } else {
        C::new(T::one(), T::zero())
    };
    let mut d2 = T::zero();
    for (x, y) in a.iter().zip(b) {
        d2 += (x - y * phase).norm_sqr();
    }
    d2.sqrt()
}

/// Rotation about X by `theta`: cos(θ/2) I − i sin(θ/2) X.
pub(crate) fn rx<T: Float>(theta: T) -> CMatrix<T> {
    let h = theta * T::of(0.5);
    let c = C::new(h.cos(), T::zero());
    let s = C::new(T::zero(), -h.sin());
    CMatrix::from_row_slice(2, 2, &[c, s, s, c])
}

/// Rotation about Y by `theta`.
pub(crate) fn ry<T: Float>(theta: T) -> CMatrix<T> {
    let h = theta * T::of(0.5);
    let c = C::new(h.cos(), T::zero());
    let s = C::new(h.sin(), T::zero());
    CMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

/// Rotation about Z by `theta`: diag(e^{−iθ/2}, e^{iθ/2}).
pub(crate) fn rz<T: Float>(theta: T) -> CMatrix<T> {
    let h = theta * T::of(0.5);
    let mut m = CMatrix::<T>::zeros(2, 2);
    m[(0, 0)] = C::new(h.cos(), -h.sin());
    m[(1, 1)] = C::new(h.cos(), h.sin());
    m
}

/// e^{iφ} as a complex scalar.
pub(crate) fn cis<T: Float>(phi: T) -> C<T> {
    C::new(phi.cos(), phi.sin())
}

/// Principal square root of a complex number.
pub(crate) fn csqrt<T: Float>(z: C<T>) -> C<T> {
    let r = z.norm_sqr().sqrt().sqrt();
    let th = z.im.atan2(z.re) * T::of(0.5);
    C::new(r * th.cos(), r * th.sin())
}

/// Scales the final unconditioned gate so the dense product matches
/// `target` exactly instead of up to a global phase.
pub(crate) fn fold_global_phase<T: Float>(
    seq: &mut GateSequence<T>,
    target: &CMatrix<T>,
) -> Result<()> {
    if seq.ops.is_empty() {
        return Ok(());
    }
    let dense = seq.dense();
    let t = (dense.adjoint() * target).trace();
    let tn = t.norm_sqr().sqrt();
    if tn <= T::of(1e-12) {
        return Err(Error::usage(
            "gate sequence is numerically orthogonal to its target",
        ));
    }
    let phase = C::new(t.re / tn, t.im / tn);
    let slot = seq
        .ops
        .iter()
        .rposition(|op| op.controls.is_empty())
        .ok_or_else(|| Error::usage("no unconditioned gate to absorb the global phase"))?;
    seq.ops[slot].matrix = seq.ops[slot].matrix.map(|x| x * phase);
    Ok(())
}

/// Checks a finished sequence against its target and fails loudly if
/// the reassembly drifted.
pub(crate) fn require_reassembly<T: Float>(
    seq: &GateSequence<T>,
    target: &CMatrix<T>,
    tol: f64,
    what: &str,
) -> Result<()> {
    let dev = max_abs(&(seq.dense() - target));
    if dev > T::of(tol) {
        return Err(Error::Config(format!(
            "{what}: reassembled gate sequence deviates from its target by {dev:?}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eye, from_rows, haar_unitary, pauli_z};
    use crate::scalar::cone;
    use approx::assert_abs_diff_eq;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cx_dense() -> CMatrix<f64> {
        from_rows(&[
            vec![cone(), czero(), czero(), czero()],
            vec![czero(), cone(), czero(), czero()],
            vec![czero(), czero(), czero(), cone()],
            vec![czero(), czero(), cone(), czero()],
        ])
    }

    #[test]
    fn conditioned_x_matches_dense_cnot() {
        let seq = GateSequence::new(2, vec![GateOp::cx(0, 1)]).unwrap();
        assert_abs_diff_eq!(max_abs(&(seq.dense() - cx_dense())), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn anti_control_triggers_on_zero() {
        let op = GateOp { target: 1, controls: vec![(0, false)], matrix: pauli_x::<f64>() };
        let seq = GateSequence::new(2, vec![op]).unwrap();
        let expect = from_rows(&[
            vec![czero(), cone(), czero(), czero()],
            vec![cone(), czero(), czero(), czero()],
            vec![czero(), czero(), cone(), czero()],
            vec![czero(), czero(), czero(), cone()],
        ]);
        assert_abs_diff_eq!(max_abs(&(seq.dense() - expect)), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn ops_apply_in_list_order() {
        let a = rx::<f64>(0.7);
        let b = pauli_z::<f64>();
        let seq = GateSequence::new(1, vec![GateOp::single(0, a.clone()), GateOp::single(0, b.clone())])
            .unwrap();
        assert_abs_diff_eq!(max_abs(&(seq.dense() - b * a)), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn dense_matches_embedded_kronecker() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = haar_unitary::<f64, _>(2, &mut rng);
        let on_role_1 = embed_operator(&g, &[1], 3);
        let seq = GateSequence::new(3, vec![GateOp::single(1, g.clone())]).unwrap();
        assert_abs_diff_eq!(max_abs(&(seq.dense() - on_role_1)), 0.0, epsilon = 1e-14);
        let full = embed_operator(&g, &[0], 1);
        assert_abs_diff_eq!(max_abs(&(full - g)), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn embed_keeps_role_order() {
        let m = cx_dense();
        let swapped = embed_operator(&m, &[1, 0], 2);
        let expect = from_rows(&[
            vec![cone(), czero(), czero(), czero()],
            vec![czero(), cone(), czero(), czero()],
            vec![czero(), czero(), czero(), cone()],
            vec![czero(), czero(), cone(), czero()],
        ]);
        // Control on role 1 means the *least* significant bit controls.
        let direct = {
            let op = GateOp { target: 0, controls: vec![(1, true)], matrix: pauli_x::<f64>() };
            GateSequence::new(2, vec![op]).unwrap().dense()
        };
        assert_abs_diff_eq!(max_abs(&(swapped - direct)), 0.0, epsilon = 1e-14);
        assert!(max_abs(&(expect - cx_dense())) < 1e-15);
    }

    #[test]
    fn rejects_out_of_range_roles() {
        assert!(GateSequence::new(2, vec![GateOp::single(2, pauli_x::<f64>())]).is_err());
        assert!(GateSequence::new(2, vec![GateOp::<f64>::cx(2, 0)]).is_err());
        assert!(GateSequence::new(2, vec![GateOp::<f64>::cx(1, 1)]).is_err());
        assert!(GateSequence::new(1, vec![GateOp::single(0, eye::<f64>(4))]).is_err());
    }

    #[test]
    fn phase_fold_makes_dense_exact() {
        let phase = cis(0.83);
        let target = rx::<f64>(1.1).map(|x| x * phase);
        let mut seq = GateSequence::new(1, vec![GateOp::single(0, rx::<f64>(1.1))]).unwrap();
        fold_global_phase(&mut seq, &target).unwrap();
        assert!(max_abs(&(seq.dense() - target)) < 1e-13);
    }

    #[test]
    fn rotation_gates_are_unitary_and_special() {
        for m in [rx::<f64>(0.4), ry::<f64>(1.3), rz::<f64>(2.2)] {
            assert!(crate::linalg::unitarity_deviation(&m) < 1e-14);
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            assert_abs_diff_eq!(det.re, 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(det.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn certify_flags_disagreeing_models() {
        use crate::mqca::{walk_example, MargolusQCA};
        let walk = walk_example::<f64>(4).unwrap();
        let same = walk_example::<f64>(4).unwrap();
        let cert = certify(&walk, &same, 3).unwrap();
        assert!(cert.max_deviation < 1e-12);
        assert_eq!(cert.probe_count, 4 + 5);

        let swap: MargolusQCA<f64> =
            crate::mqca::pqca_from_cell_unitary(4, crate::mqca::swap_matrix::<f64>()).unwrap();
        let cert2 = certify(&walk, &swap, 2).unwrap();
        assert!(cert2.max_deviation > 0.1);
    }
}
