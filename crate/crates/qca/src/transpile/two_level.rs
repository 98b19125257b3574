//! Block decomposition into conditioned single-site gates.
//!
//! A block unitary on up to four sites reduces, column by column, to a
//! product of two-level rotations and a diagonal of phases. Each
//! two-level factor mixes one pair of basis states: a Gray-code chain
//! of conditioned-X gates routes the pair into adjacency, one
//! conditioned single-site core applies the 2×2 mixing, and the chain
//! unroutes. Gates with several controls then expand recursively down
//! to single-control form, and every surviving conditioned gate is
//! either a conditioned-X or expands through a ZYZ rotation sandwich.
//!
//! No attempt is made at minimal gate counts; the target is an exact,
//! verifiable reassembly, which the final check enforces.

use crate::error::{Error, Result};
use crate::linalg::{eye, max_abs, pauli_x, unitary_eig, CMatrix};
use crate::scalar::{Float, C};
use crate::unitary::LocalUnitary;

use super::{cis, ry, rz, GateOp, GateSequence};

/// Largest block arity the decomposition accepts.
pub const BLOCK_CAP: usize = 4;

/// Compiles a block unitary on 1–4 sites into conditioned single-site
/// gates.
///
/// Two-site blocks delegate to [`super::decompose_two_qubit`], which
/// produces far shorter sequences. The reassembled product reproduces
/// the input matrix exactly (global phase included) to well under 1e-7.
pub fn decompose_block<T: Float>(gate: &LocalUnitary<T>) -> Result<GateSequence<T>> {
    let k = gate.arity();
    if k == 0 {
        return Err(Error::usage("block decomposition needs at least one site"));
    }
    if k > BLOCK_CAP {
        return Err(Error::resource(format!(
            "block decomposition supports up to {BLOCK_CAP} sites, got {k}"
        )));
    }
    if k == 1 {
        let seq = GateSequence::new(1, vec![GateOp::single(0, gate.matrix().clone())])?;
        return Ok(seq);
    }
    if k == 2 {
        return super::decompose_two_qubit(gate);
    }

    let dim = 1usize << k;
    let mut work = gate.matrix().clone();
    let mut rotations: Vec<(usize, usize, CMatrix<T>)> = Vec::new();
    let skip = T::of(1e-14);

    for col in 0..dim {
        for row in (col + 1)..dim {
            let y = work[(row, col)];
            if y.norm_sqr().sqrt() <= skip {
                continue;
            }
            let x = work[(col, col)];
            let s = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let si = C::new(T::one() / s, T::zero());
            let (exx, exy) = (x.conj() * si, y.conj() * si);
            let (eyx, eyy) = (y * si, -(x * si));
            for j in 0..dim {
                let wc = work[(col, j)];
                let wr = work[(row, j)];
                work[(col, j)] = exx * wc + exy * wr;
                work[(row, j)] = eyx * wc + eyy * wr;
            }
            let g = CMatrix::from_row_slice(2, 2, &[exx, exy, eyx, eyy]);
            rotations.push((col, row, g));
        }
    }

    let mut offdiag = T::zero();
    for r in 0..dim {
        for c in 0..dim {
            if r != c {
                offdiag = offdiag.max(work[(r, c)].norm_sqr().sqrt());
            }
        }
    }
    if offdiag > T::of(1e-9) {
        return Err(Error::config(
            "block decomposition: elimination left a non-diagonal remainder",
        ));
    }

    let mut ops: Vec<GateOp<T>> = Vec::new();
    for x in 0..dim {
        let v = work[(x, x)];
        let phi = v.im.atan2(v.re);
        if phi.abs() < T::of(1e-13) {
            continue;
        }
        ops.extend(expand_controls(phase_op(x, phi, k), k)?);
    }
    for (i, j, g) in rotations.iter().rev() {
        for op in two_level_ops(*i, *j, &g.adjoint(), k) {
            ops.extend(expand_controls(op, k)?);
        }
    }

    let seq = GateSequence::new(k, ops)?;
    super::require_reassembly(&seq, gate.matrix(), 1e-7, "block decomposition")?;
    Ok(seq)
}

/// Phase e^{iφ} on the single basis state `x`: a diagonal gate on the
/// last role, conditioned on every other bit of `x`.
fn phase_op<T: Float>(x: usize, phi: T, k: usize) -> GateOp<T> {
    let mut m = eye::<T>(2);
    let slot = x & 1;
    m[(slot, slot)] = cis(phi);
    let controls = (1..k)
        .map(|bit| (k - 1 - bit, x >> bit & 1 == 1))
        .collect();
    GateOp { target: k - 1, controls, matrix: m }
}

/// Conditioned-X flipping `bit`, with every other bit pinned to the
/// values of `pattern`: exactly the transposition of `pattern` and
/// `pattern ^ (1 << bit)`.
fn transposition_op<T: Float>(bit: usize, pattern: usize, k: usize) -> GateOp<T> {
    let controls = (0..k)
        .filter(|&b| b != bit)
        .map(|b| (k - 1 - b, pattern >> b & 1 == 1))
        .collect();
    GateOp { target: k - 1 - bit, controls, matrix: pauli_x() }
}

/// Realizes a two-level unitary mixing basis states `i` and `j` (the
/// 2×2 `core` is written on the ordered pair (|i⟩, |j⟩)) as a routed,
/// fully conditioned single-site core.
fn two_level_ops<T: Float>(i: usize, j: usize, core: &CMatrix<T>, k: usize) -> Vec<GateOp<T>> {
    let diff = i ^ j;
    debug_assert!(diff != 0);
    let bits: Vec<usize> = (0..k).filter(|b| diff >> b & 1 == 1).collect();

    let mut chain: Vec<GateOp<T>> = Vec::new();
    let mut cur = i;
    for &b in &bits[..bits.len() - 1] {
        chain.push(transposition_op(b, cur, k));
        cur ^= 1 << b;
    }
    let bfin = *bits.last().unwrap();

    let aligned = if cur >> bfin & 1 == 0 {
        core.clone()
    } else {
        CMatrix::from_fn(2, 2, |r, c| core[(1 - r, 1 - c)])
    };
    let controls = (0..k)
        .filter(|&b| b != bfin)
        .map(|b| (k - 1 - b, cur >> b & 1 == 1))
        .collect();
    let core_op = GateOp { target: k - 1 - bfin, controls, matrix: aligned };

    let mut ops = chain.clone();
    ops.push(core_op);
    ops.extend(chain.into_iter().rev());
    ops
}

/// Principal square root of a 2×2 unitary: half of each eigenphase.
fn sqrt_unitary<T: Float>(u: &CMatrix<T>) -> Result<CMatrix<T>> {
    let (phases, vecs) = unitary_eig(u)?;
    let mut d = CMatrix::<T>::zeros(2, 2);
    for (k, &th) in phases.iter().enumerate() {
        d[(k, k)] = cis(th * T::of(0.5));
    }
    Ok(&vecs * d * vecs.adjoint())
}

/// Recursively rewrites a conditioned gate into gates with at most one
/// control, each either a conditioned-X or a ZYZ rotation sandwich.
fn expand_controls<T: Float>(op: GateOp<T>, k: usize) -> Result<Vec<GateOp<T>>> {
    let near = |m: &CMatrix<T>, n: &CMatrix<T>| max_abs(&(m - n)) < T::of(1e-13);
    if near(&op.matrix, &eye::<T>(2)) {
        return Ok(Vec::new());
    }
    match op.controls.len() {
        0 => Ok(vec![op]),
        1 => {
            if near(&op.matrix, &pauli_x::<T>()) {
                return Ok(vec![op]);
            }
            let (control, value) = op.controls[0];
            Ok(rotation_sandwich(control, value, op.target, &op.matrix))
        }
        _ => {
            let v = sqrt_unitary(&op.matrix)?;
            let (last, last_value) = *op.controls.last().unwrap();
            let rest: Vec<(usize, bool)> = op.controls[..op.controls.len() - 1].to_vec();

            let mut out = Vec::new();
            out.extend(expand_controls(
                GateOp { target: op.target, controls: vec![(last, last_value)], matrix: v.clone() },
                k,
            )?);
            let flip = GateOp { target: last, controls: rest.clone(), matrix: pauli_x() };
            out.extend(expand_controls(flip.clone(), k)?);
            out.extend(expand_controls(
                GateOp {
                    target: op.target,
                    controls: vec![(last, last_value)],
                    matrix: v.adjoint(),
                },
                k,
            )?);
            out.extend(expand_controls(flip, k)?);
            out.extend(expand_controls(
                GateOp { target: op.target, controls: rest, matrix: v },
                k,
            )?);
            Ok(out)
        }
    }
}

/// Single-control expansion: u = e^{iα} Rz(β) Ry(γ) Rz(δ) becomes
/// C, X, B, X, A on the target with A·B·C = 1 and A·X·B·X·C = u/e^{iα},
/// plus a phase gate on the control carrying e^{iα}.
fn rotation_sandwich<T: Float>(
    control: usize,
    value: bool,
    target: usize,
    u: &CMatrix<T>,
) -> Vec<GateOp<T>> {
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let alpha = det.im.atan2(det.re) * T::of(0.5);
    let inv = cis(-alpha);
    let su = u.map(|x| x * inv);

    let tiny = T::of(1e-14);
    let n00 = su[(0, 0)].norm_sqr().sqrt();
    let n10 = su[(1, 0)].norm_sqr().sqrt();
    let gamma = T::of(2.0) * n10.atan2(n00);
    let bpd = if n00 > tiny {
        -T::of(2.0) * su[(0, 0)].im.atan2(su[(0, 0)].re)
    } else {
        T::zero()
    };
    let bmd = if n10 > tiny {
        T::of(2.0) * su[(1, 0)].im.atan2(su[(1, 0)].re)
    } else {
        T::zero()
    };
    let beta = (bpd + bmd) * T::of(0.5);
    let delta = (bpd - bmd) * T::of(0.5);

    let a = rz::<T>(beta) * ry::<T>(gamma * T::of(0.5));
    let b = ry::<T>(-gamma * T::of(0.5)) * rz::<T>(-(delta + beta) * T::of(0.5));
    let c = rz::<T>((delta - beta) * T::of(0.5));
    let mut phase = eye::<T>(2);
    let slot = usize::from(value);
    phase[(slot, slot)] = cis(alpha);

    let near_eye = |m: &CMatrix<T>| max_abs(&(m - eye::<T>(2))) < T::of(1e-14);
    let mut out = Vec::new();
    if !near_eye(&c) {
        out.push(GateOp::single(target, c));
    }
    out.push(GateOp { target, controls: vec![(control, value)], matrix: pauli_x() });
    if !near_eye(&b) {
        out.push(GateOp::single(target, b));
    }
    out.push(GateOp { target, controls: vec![(control, value)], matrix: pauli_x() });
    if !near_eye(&a) {
        out.push(GateOp::single(target, a));
    }
    if !near_eye(&phase) {
        out.push(GateOp::single(control, phase));
    }
    out
}
