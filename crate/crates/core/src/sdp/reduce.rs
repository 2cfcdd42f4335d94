//! Elimination of the equality constraints `E y = f` of a [`RealSdp`].
//!
//! Produces an affine parametrisation `y = y0 + N t` of the solution set by
//! sparse Gauss-Jordan elimination. Pivots are chosen per row among entries
//! within a factor 10 of the row maximum, preferring variables that occur in
//! few rows, which keeps `N` sparse for moment problems where almost every
//! equality is a short completeness relation.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::{RealSdp, SparseRow};

/// Consistency tolerance for rows that become empty during elimination.
const CONSISTENCY_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct ReducedSdp {
    /// Particular solution of `E y = f`.
    pub y0: Vec<f64>,
    /// `basis[k]` lists `(j, N[k][j])`: variable `k` as a combination of free unknowns.
    pub basis: Vec<SparseRow>,
    /// Original variable index of each free unknown.
    pub free: Vec<usize>,
    /// Objective over the free unknowns, and its constant part.
    pub objective: Vec<f64>,
    pub objective_constant: f64,
    /// Largest violation among rows found linearly dependent on earlier rows.
    pub inconsistency: f64,
}

impl ReducedSdp {
    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    pub fn is_consistent(&self) -> bool {
        self.inconsistency <= CONSISTENCY_TOL
    }

    /// Full variable vector `y0 + N t`.
    pub fn lift(&self, t: &[f64]) -> Vec<f64> {
        self.y0.iter().zip(&self.basis).map(|(&c, row)| c + row.dot(t)).collect()
    }
}

pub fn reduce(sdp: &RealSdp) -> ReducedSdp {
    reduce_rows(sdp.num_vars(), &sdp.eq_rows, &sdp.eq_rhs, &sdp.objective, sdp.objective_constant)
}

pub(crate) fn reduce_rows(
    nvars: usize,
    eq_rows: &[SparseRow],
    eq_rhs: &[f64],
    objective: &SparseRow,
    objective_constant: f64,
) -> ReducedSdp {
    let mut occurrences = vec![0usize; nvars];
    for row in eq_rows {
        for &(c, _) in &row.0 {
            occurrences[c] += 1;
        }
    }
    // singletons first so that fixed values are substituted before anything else
    let mut order: Vec<usize> = (0..eq_rows.len()).collect();
    order.sort_by_key(|&i| (eq_rows[i].0.len() > 1, i));

    // pivot var -> (rhs, terms over non-pivot vars)
    let mut pivots: HashMap<usize, (f64, BTreeMap<usize, f64>)> = HashMap::new();
    // non-pivot var -> pivots whose expression mentions it
    let mut users: HashMap<usize, HashSet<usize>> = HashMap::new();
    let mut inconsistency = 0.0f64;

    for i in order {
        let mut rhs = eq_rhs[i];
        let mut row: BTreeMap<usize, f64> = BTreeMap::new();
        for &(c, v) in &eq_rows[i].0 {
            match pivots.get(&c) {
                Some((prhs, terms)) => {
                    rhs -= v * prhs;
                    for (&j, &a) in terms {
                        *row.entry(j).or_insert(0.0) += v * a;
                    }
                }
                None => *row.entry(c).or_insert(0.0) += v,
            }
        }
        let scale = row.values().fold(0.0f64, |m, v| m.max(v.abs()));
        row.retain(|_, v| v.abs() > DROP_TOL * scale.max(1.0));
        if row.is_empty() {
            inconsistency = inconsistency.max(rhs.abs());
            continue;
        }
        let max = row.values().fold(0.0f64, |m, v| m.max(v.abs()));
        let (&p, &a) = row
            .iter()
            .filter(|(_, v)| v.abs() >= 0.1 * max)
            .min_by_key(|(&c, _)| (occurrences[c], std::cmp::Reverse(c)))
            .expect("nonempty row");
        // y_p = rhs/a - Σ_{j≠p} (row_j/a) y_j
        let prhs = rhs / a;
        let terms: BTreeMap<usize, f64> = row.iter().filter(|(&c, _)| c != p).map(|(&c, &v)| (c, -v / a)).collect();
        // substitute y_p into existing pivot expressions
        if let Some(us) = users.remove(&p) {
            for q in us {
                let (qrhs, qterms) = pivots.get_mut(&q).expect("user is a pivot");
                let Some(coef) = qterms.remove(&p) else { continue };
                *qrhs += coef * prhs;
                for (&j, &b) in &terms {
                    let e = qterms.entry(j).or_insert(0.0);
                    *e += coef * b;
                    if e.abs() <= DROP_TOL {
                        qterms.remove(&j);
                        if let Some(set) = users.get_mut(&j) {
                            set.remove(&q);
                        }
                    } else {
                        users.entry(j).or_default().insert(q);
                    }
                }
            }
        }
        for &j in terms.keys() {
            users.entry(j).or_default().insert(p);
        }
        pivots.insert(p, (prhs, terms));
    }

    let free: Vec<usize> = (0..nvars).filter(|k| !pivots.contains_key(k)).collect();
    let mut free_index = vec![usize::MAX; nvars];
    for (j, &k) in free.iter().enumerate() {
        free_index[k] = j;
    }
    let mut y0 = vec![0.0; nvars];
    let mut basis = vec![SparseRow::default(); nvars];
    for k in 0..nvars {
        match pivots.get(&k) {
            Some((prhs, terms)) => {
                y0[k] = *prhs;
                basis[k] = SparseRow::from_terms(terms.iter().map(|(&j, &v)| (free_index[j], v)).collect());
            }
            None => basis[k] = SparseRow(vec![(free_index[k], 1.0)]),
        }
    }
    let mut reduced_objective = vec![0.0; free.len()];
    let mut objective_constant = objective_constant;
    for &(k, c) in &objective.0 {
        objective_constant += c * y0[k];
        for &(j, v) in &basis[k].0 {
            reduced_objective[j] += c * v;
        }
    }
    ReducedSdp { y0, basis, free, objective: reduced_objective, objective_constant, inconsistency }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moment::Sense;
    use crate::sdp::VarInfo;

    fn toy(rows: Vec<Vec<(usize, f64)>>, rhs: Vec<f64>, nvars: usize) -> RealSdp {
        RealSdp {
            dim: 1,
            vars: vec![VarInfo { class: 0, part: crate::sdp::Part::Re }; nvars],
            entry_ptr: vec![0, 0],
            entry_var: vec![],
            entry_coef: vec![],
            eq_rows: rows.into_iter().map(SparseRow::from_terms).collect(),
            eq_rhs: rhs,
            objective: SparseRow::from_terms((0..nvars).map(|k| (k, 1.0)).collect()),
            objective_constant: 0.0,
            sense: Sense::Maximize,
            kernel_hints: vec![],
        }
    }

    #[test]
    fn parametrisation_satisfies_rows() {
        let s = toy(
            vec![
                vec![(0, 1.0)],
                vec![(1, 1.0), (2, 1.0), (0, -1.0)],
                vec![(2, 2.0), (3, 1.0)],
                vec![(1, 1.0), (3, -0.5), (0, -1.0)], // dependent on rows 1,2
            ],
            vec![0.3, 0.0, 1.0, -0.5],
            5,
        );
        let r = reduce(&s);
        assert!(r.is_consistent(), "{}", r.inconsistency);
        assert_eq!(r.num_free(), 2);
        for t in [[0.0, 0.0], [1.0, -2.0], [0.25, 3.0]] {
            let y = r.lift(&t);
            assert!(s.max_equality_residual(&y) < 1e-12);
            let obj: f64 = y.iter().sum();
            let red: f64 = r.objective.iter().zip(&t).map(|(a, b)| a * b).sum::<f64>() + r.objective_constant;
            assert!((obj - red).abs() < 1e-12);
        }
    }

    #[test]
    fn detects_inconsistent_rows() {
        let s = toy(vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 2.0), (1, 2.0)]], vec![1.0, 3.0], 2);
        let r = reduce(&s);
        assert!(!r.is_consistent());
        assert!((r.inconsistency - 1.0).abs() < 1e-12);
    }

    #[test]
    fn free_count_matches_rank_on_dependent_systems() {
        use nalgebra::DMatrix;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let nvars = rng.gen_range(3..12);
            let base: Vec<Vec<(usize, f64)>> = (0..rng.gen_range(1..nvars))
                .map(|_| {
                    (0..rng.gen_range(1..4)).map(|_| (rng.gen_range(0..nvars), rng.gen_range(-2.0..2.0))).collect()
                })
                .collect();
            let y: Vec<f64> = (0..nvars).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut rows = base.clone();
            for _ in 0..3 {
                let (a, b) = (rng.gen_range(0..base.len()), rng.gen_range(0..base.len()));
                let (ca, cb) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let mut r: Vec<(usize, f64)> = base[a].iter().map(|&(c, v)| (c, ca * v)).collect();
                r.extend(base[b].iter().map(|&(c, v)| (c, cb * v)));
                rows.push(r);
            }
            let s = toy(rows, vec![], nvars);
            let rhs: Vec<f64> = s.eq_rows.iter().map(|r| r.dot(&y)).collect();
            let s = RealSdp { eq_rhs: rhs, ..s };
            let dense = DMatrix::from_fn(s.eq_rows.len(), nvars, |i, j| {
                s.eq_rows[i].0.iter().filter(|t| t.0 == j).map(|t| t.1).sum::<f64>()
            });
            let rank = dense.rank(1e-9);
            let r = reduce(&s);
            assert!(r.is_consistent());
            assert_eq!(r.num_free(), nvars - rank);
            let t: Vec<f64> = (0..r.num_free()).map(|i| 0.3 * i as f64 - 0.5).collect();
            assert!(s.max_equality_residual(&r.lift(&t)) < 1e-9);
        }
    }
}
