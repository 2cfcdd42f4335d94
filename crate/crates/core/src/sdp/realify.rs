//! Real-variable form of a moment relaxation.
//!
//! Each conjugate pair of equality classes `(c, c̄)` becomes two real unknowns
//! `r, s` with `G[c] = r + i s` and `G[c̄] = r - i s`; a self-conjugate class
//! becomes one real unknown. The moment matrix is then `Σ_k y_k H_k` with
//! Hermitian `H_k`, and the semidefinite constraint is imposed on its real
//! embedding `[[Re H, -Im H], [Im H, Re H]]`. Because supports of different
//! classes are disjoint, the embedding's symmetry (symmetric real block,
//! antisymmetric imaginary block, equal diagonal blocks) holds by construction.

use crate::moment::{RelaxationProblem, Sense};
use crate::C64;

use super::{RealSdp, SparseRow};

/// Which part of a class value a real variable carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarInfo {
    pub class: usize,
    pub part: Part,
}

/// Value of a class as `r + i·sign·s`.
#[derive(Debug, Clone, Copy)]
struct ClassVars {
    re: u32,
    im: Option<u32>,
    sign: f64,
}

pub fn realify(p: &RelaxationProblem) -> RealSdp {
    let classes = p.table.classes();
    let mut vars = Vec::new();
    let mut class_vars: Vec<Option<ClassVars>> = vec![None; classes.len()];
    for (id, c) in classes.iter().enumerate() {
        if c.conj == id {
            vars.push(VarInfo { class: id, part: Part::Re });
            class_vars[id] = Some(ClassVars { re: (vars.len() - 1) as u32, im: None, sign: 1.0 });
        } else if id < c.conj {
            vars.push(VarInfo { class: id, part: Part::Re });
            vars.push(VarInfo { class: id, part: Part::Im });
            let re = (vars.len() - 2) as u32;
            let im = Some((vars.len() - 1) as u32);
            class_vars[id] = Some(ClassVars { re, im, sign: 1.0 });
            class_vars[c.conj] = Some(ClassVars { re, im, sign: -1.0 });
        }
    }
    let cv = |id: usize| class_vars[id].expect("every class has variables");

    let dim = p.dim();
    let mut entry_ptr = Vec::with_capacity(dim * dim + 1);
    let mut entry_var = Vec::new();
    let mut entry_coef = Vec::new();
    entry_ptr.push(0u32);
    for r in 0..dim {
        for c in 0..dim {
            if let Some(id) = p.table.class_at((r, c)) {
                let v = cv(id);
                entry_var.push(v.re);
                entry_coef.push(C64::new(1.0, 0.0));
                if let Some(s) = v.im {
                    entry_var.push(s);
                    entry_coef.push(C64::new(0.0, v.sign));
                }
            }
            entry_ptr.push(entry_var.len() as u32);
        }
    }

    // w · (r + i σ s) = (w.re r - σ w.im s) + i (w.im r + σ w.re s)
    let expand = |terms: &[((usize, usize), C64)]| -> (SparseRow, SparseRow) {
        let mut re_row = Vec::new();
        let mut im_row = Vec::new();
        for &(pos, w) in terms {
            let Some(id) = p.table.class_at(pos) else { continue };
            let v = cv(id);
            re_row.push((v.re as usize, w.re));
            im_row.push((v.re as usize, w.im));
            if let Some(s) = v.im {
                re_row.push((s as usize, -v.sign * w.im));
                im_row.push((s as usize, v.sign * w.re));
            }
        }
        (SparseRow::from_terms(re_row), SparseRow::from_terms(im_row))
    };

    let mut eq_rows = Vec::new();
    let mut eq_rhs = Vec::new();
    for k in &p.constraints {
        let (re_row, im_row) = expand(&k.terms);
        for (row, rhs) in [(re_row, k.rhs.re), (im_row, k.rhs.im)] {
            if row.is_empty() && rhs.abs() <= 1e-14 {
                continue;
            }
            eq_rows.push(row);
            eq_rhs.push(rhs);
        }
    }
    let (objective, _) = expand(&p.objective.terms);
    RealSdp {
        dim,
        vars,
        entry_ptr,
        entry_var,
        entry_coef,
        eq_rows,
        eq_rhs,
        objective,
        objective_constant: p.objective.constant.re,
        sense: p.sense,
        kernel_hints: p.kernel_candidates(),
    }
}

impl RealSdp {
    pub fn is_maximize(&self) -> bool {
        self.sense == Sense::Maximize
    }
}
