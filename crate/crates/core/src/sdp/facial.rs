//! Removal of kernel directions shared by every feasible matrix.
//!
//! If `vᴴ S(y) v` vanishes identically on the affine set `E y = f`, then every
//! feasible `S ⪰ 0` satisfies `S v = 0`. Adding those linear equalities and
//! keeping a principal submatrix whose index set is complementary to the span
//! of such vectors gives an equivalent program with a smaller matrix. The
//! reduced program usually has interior points, which the full one lacks.

use std::collections::HashMap;

use super::reduce::reduce_rows;
use super::{RealSdp, ReducedSdp, SparseRow};
use crate::C64;

const FORCED_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;

/// Equivalent program restricted to a principal submatrix, or `None` when no
/// hint is confirmed.
pub(crate) fn facial_reduce(sdp: &RealSdp, red: &ReducedSdp) -> Option<RealSdp> {
    let n = sdp.dim;
    let mut eq_rows = sdp.eq_rows.clone();
    let mut eq_rhs = sdp.eq_rhs.clone();
    let mut pivots: Vec<(usize, Vec<C64>)> = Vec::new();
    let mut confirmed = vec![false; sdp.kernel_hints.len()];
    let mut current: Option<ReducedSdp> = None;
    loop {
        let red = current.as_ref().unwrap_or(red);
        let mut added = 0;
        for (h, v) in sdp.kernel_hints.iter().enumerate() {
            if confirmed[h] || !is_forced(sdp, red, v) {
                continue;
            }
            confirmed[h] = true;
            if !extend_pivots(&mut pivots, n, v) {
                continue;
            }
            added += 1;
            push_annihilation(sdp, v, &mut eq_rows, &mut eq_rhs);
        }
        if added == 0 {
            break;
        }
        current = Some(reduce_rows(sdp.num_vars(), &eq_rows, &eq_rhs, &sdp.objective, sdp.objective_constant));
    }
    if pivots.is_empty() {
        return None;
    }

    let mut dropped = vec![false; n];
    for (p, _) in &pivots {
        dropped[*p] = true;
    }
    let keep: Vec<usize> = (0..n).filter(|&i| !dropped[i]).collect();
    let m = keep.len();
    let mut entry_ptr = vec![0u32];
    let mut entry_var = Vec::new();
    let mut entry_coef = Vec::new();
    for &a in &keep {
        for &b in &keep {
            for (k, h) in sdp.entry_terms(a * n + b) {
                entry_var.push(k as u32);
                entry_coef.push(h);
            }
            entry_ptr.push(entry_var.len() as u32);
        }
    }
    debug_assert_eq!(entry_ptr.len(), m * m + 1);
    Some(RealSdp {
        dim: m,
        vars: sdp.vars.clone(),
        entry_ptr,
        entry_var,
        entry_coef,
        eq_rows,
        eq_rhs,
        objective: sdp.objective.clone(),
        objective_constant: sdp.objective_constant,
        sense: sdp.sense,
        kernel_hints: Vec::new(),
    })
}

/// Whether `vᴴ S(y0 + N t) v` vanishes for every `t`.
fn is_forced(sdp: &RealSdp, red: &ReducedSdp, v: &[(usize, C64)]) -> bool {
    let n = sdp.dim;
    let mut q: HashMap<usize, f64> = HashMap::new();
    for &(a, va) in v {
        for &(b, vb) in v {
            for (k, h) in sdp.entry_terms(a * n + b) {
                *q.entry(k).or_insert(0.0) += (va.conj() * h * vb).re;
            }
        }
    }
    let scale = 1.0 + q.values().map(|x| x.abs()).sum::<f64>();
    let constant: f64 = q.iter().map(|(&k, &c)| c * red.y0[k]).sum();
    if constant.abs() > FORCED_TOL * scale {
        return false;
    }
    let mut lin: HashMap<usize, f64> = HashMap::new();
    for (&k, &c) in &q {
        for &(j, nk) in &red.basis[k].0 {
            *lin.entry(j).or_insert(0.0) += c * nk;
        }
    }
    lin.values().all(|x| x.abs() <= FORCED_TOL * scale)
}

/// Adds `v` to the echelon set; returns false when it is already in the span.
fn extend_pivots(pivots: &mut Vec<(usize, Vec<C64>)>, n: usize, v: &[(usize, C64)]) -> bool {
    let mut dense = vec![C64::new(0.0, 0.0); n];
    for &(i, c) in v {
        dense[i] += c;
    }
    for (p, b) in pivots.iter() {
        let f = dense[*p];
        if f.norm() > 0.0 {
            for (d, bi) in dense.iter_mut().zip(b) {
                *d -= f * bi;
            }
        }
    }
    let max = dense.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max <= PIVOT_TOL {
        return false;
    }
    let p = (0..n).rev().find(|&i| dense[i].norm() >= 0.5 * max).expect("max attained");
    let inv = dense[p].inv();
    dense.iter_mut().for_each(|d| *d *= inv);
    pivots.push((p, dense));
    true
}

/// Appends the real and imaginary parts of `S v = 0`.
fn push_annihilation(sdp: &RealSdp, v: &[(usize, C64)], eq_rows: &mut Vec<SparseRow>, eq_rhs: &mut Vec<f64>) {
    let n = sdp.dim;
    for r in 0..n {
        let mut re: Vec<(usize, f64)> = Vec::new();
        let mut im: Vec<(usize, f64)> = Vec::new();
        for &(b, vb) in v {
            for (k, h) in sdp.entry_terms(r * n + b) {
                let w = h * vb;
                re.push((k, w.re));
                im.push((k, w.im));
            }
        }
        for row in [SparseRow::from_terms(re), SparseRow::from_terms(im)] {
            if !row.is_empty() {
                eq_rows.push(row);
                eq_rhs.push(0.0);
            }
        }
    }
}
