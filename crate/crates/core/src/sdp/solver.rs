//! Primal-dual interior-point method for the matrix inequality of a [`RealSdp`].
//!
//! The equalities `E y = f` are eliminated first, leaving the inequality form
//! `max cᵀt  s.t.  S(t) = F0 + Σ_j t_j F_j ⪰ 0` over free unknowns `t`. It is
//! solved together with its dual `min ⟨F0, X⟩  s.t.  ⟨F_j, X⟩ = -c_j, X ⪰ 0`
//! by an infeasible-start path-following method with Nesterov-Todd scaling and
//! a Mehrotra predictor-corrector. All matrices are Hermitian and handled in
//! complex arithmetic with the inner product `Re tr(AB)`, which is the real
//! embedding `[[Re, -Im], [Im, Re]]` written compactly.

use std::borrow::Cow;

use nalgebra::{Cholesky, Complex, DMatrix, Dyn, SymmetricEigen};

use super::facial::facial_reduce;
use super::{reduce, RealSdp, ReducedSdp, SolverOptions, SolverResult, Status};
use crate::{Error, Result, C64};

const ZERO: C64 = Complex { re: 0.0, im: 0.0 };
/// Consecutive iterations with negligible steps before giving up.
const STALL_LIMIT: usize = 5;

/// Solves the program, returning the certified bound as [`SolverResult::value`].
pub fn solve(sdp: &RealSdp, opts: &SolverOptions) -> Result<SolverResult> {
    if !(1e-9..=1e-4).contains(&opts.tol) {
        return Err(Error::InvalidParameter(format!("tol {} outside [1e-9, 1e-4]", opts.tol)));
    }
    if sdp.real_dim() > opts.dimension_cap {
        return Err(Error::CapExceeded { rows: sdp.real_dim(), cap: opts.dimension_cap });
    }
    check_hermitian(sdp)?;
    let (inner, red) = presolve(sdp);
    if let Cow::Owned(inner) = &inner {
        if opts.verbose {
            eprintln!("facial reduction: side {} -> {}, free unknowns {}", sdp.dim, inner.dim, red.num_free());
        }
        let mut r = solve_reduced(inner, &red, opts)?;
        r.solution = sdp.matrix(&r.y);
        if r.status != Status::Infeasible {
            let positivity = (-min_eigenvalue(&r.solution)).max(0.0);
            r.residual = sdp.max_equality_residual(&r.y).max(positivity);
        }
        return Ok(r);
    }
    solve_reduced(sdp, &red, opts)
}

/// Equality elimination, preceded by facial reduction when the kernel hints
/// confirm a shared kernel. Returns the program actually solved.
pub(crate) fn presolve(sdp: &RealSdp) -> (Cow<'_, RealSdp>, ReducedSdp) {
    let red = reduce(sdp);
    if red.is_consistent() && !sdp.kernel_hints.is_empty() {
        if let Some(inner) = facial_reduce(sdp, &red) {
            let inner_red = reduce(&inner);
            return (Cow::Owned(inner), inner_red);
        }
    }
    (Cow::Borrowed(sdp), red)
}

fn solve_reduced(sdp: &RealSdp, red: &ReducedSdp, opts: &SolverOptions) -> Result<SolverResult> {
    let sign = if sdp.is_maximize() { 1.0 } else { -1.0 };
    if !red.is_consistent() {
        return Ok(finish(
            sdp,
            red,
            sign,
            Status::Infeasible,
            &vec![0.0; red.num_free()],
            f64::NAN,
            0,
            Some(red.inconsistency),
        ));
    }
    if red.num_free() == 0 {
        return Ok(solve_fixed(sdp, red, sign, opts));
    }
    Ipm::new(sdp, red, sign, opts).run()
}

fn check_hermitian(sdp: &RealSdp) -> Result<()> {
    let n = sdp.dim;
    let mut terms: Vec<(usize, C64)> = Vec::new();
    for a in 0..n {
        for b in a..n {
            terms.clear();
            terms.extend(sdp.entry_terms(a * n + b));
            terms.extend(sdp.entry_terms(b * n + a).map(|(k, h)| (k, -h.conj())));
            terms.sort_by_key(|t| t.0);
            let mut i = 0;
            while i < terms.len() {
                let mut acc = terms[i].1;
                let mut j = i + 1;
                while j < terms.len() && terms[j].0 == terms[i].0 {
                    acc += terms[j].1;
                    j += 1;
                }
                if acc.norm() > 1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "generator of variable {} is not Hermitian at ({a}, {b})",
                        terms[i].0
                    )));
                }
                i = j;
            }
        }
    }
    Ok(())
}

fn min_eigenvalue(m: &DMatrix<C64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(m.clone()).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn solve_fixed(sdp: &RealSdp, red: &ReducedSdp, sign: f64, opts: &SolverOptions) -> SolverResult {
    let s = sdp.matrix(&red.y0);
    let lmin = min_eigenvalue(&s);
    let status = if lmin >= -opts.tol { Status::Optimal } else { Status::Infeasible };
    let cert = (status == Status::Infeasible).then_some(-lmin);
    let mut r = finish(sdp, red, sign, status, &[], red.objective_constant, 0, cert);
    if status == Status::Optimal {
        r.dual_bound = red.objective_constant;
        r.gap = 0.0;
    }
    r
}

/// Assembles the result at free unknowns `t`; `bound` is the maximisation-form
/// dual objective `⟨F0, X⟩` (without constant), NaN when not available.
#[allow(clippy::too_many_arguments)]
fn finish(
    sdp: &RealSdp,
    red: &ReducedSdp,
    sign: f64,
    status: Status,
    t: &[f64],
    bound: f64,
    iterations: usize,
    certificate_norm: Option<f64>,
) -> SolverResult {
    let y = red.lift(t);
    let solution = sdp.matrix(&y);
    let positivity = (-min_eigenvalue(&solution)).max(0.0);
    let residual = sdp.max_equality_residual(&y).max(positivity);
    let infeasible = status == Status::Infeasible;
    let primal_value = if infeasible { f64::NAN } else { sdp.objective_value(&y) };
    let dual_bound = if infeasible { f64::NAN } else { sign * bound + red.objective_constant };
    let dual_bound = if t.is_empty() && !infeasible { red.objective_constant } else { dual_bound };
    let gap = if infeasible {
        f64::NAN
    } else {
        (dual_bound - primal_value).abs() / (1.0 + dual_bound.abs() + primal_value.abs())
    };
    SolverResult { status, primal_value, dual_bound, y, solution, residual, gap, iterations, certificate_norm }
}

fn inner(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

fn hermitize(m: &mut DMatrix<C64>) {
    let n = m.nrows();
    for j in 0..n {
        m[(j, j)].im = 0.0;
        for i in (j + 1)..n {
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest `α` with `M + α D ⪰ 0`, given the Cholesky factor of `M ≻ 0`.
fn max_step(chol: &Cholesky<C64, Dyn>, d: &DMatrix<C64>) -> f64 {
    let l = chol.l();
    let t = l.solve_lower_triangular(d).expect("nonsingular factor");
    let mut t = l.solve_lower_triangular(&t.adjoint()).expect("nonsingular factor");
    hermitize(&mut t);
    let lmin = min_eigenvalue(&t);
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

/// Hermitian generators restricted to the variables that the free unknowns reach.
struct Structure {
    n: usize,
    /// Upper-triangle entries `(c, d, weight)`, weight 2 off the diagonal.
    upper: Vec<(usize, usize, f64)>,
    upper_ptr: Vec<usize>,
    upper_terms: Vec<(usize, C64)>,
    /// Variables with a nonzero row in the parametrisation.
    active: Vec<usize>,
    /// For each variable, every entry `(a, b, h)` of its generator.
    support: Vec<Vec<(usize, usize, C64)>>,
}

impl Structure {
    fn new(sdp: &RealSdp, red: &ReducedSdp) -> Self {
        let n = sdp.dim;
        let is_active: Vec<bool> = red.basis.iter().map(|r| !r.is_empty()).collect();
        let active = (0..sdp.num_vars()).filter(|&k| is_active[k]).collect();
        let mut support = vec![Vec::new(); sdp.num_vars()];
        let mut upper = Vec::new();
        let mut upper_ptr = vec![0];
        let mut upper_terms = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for (k, h) in sdp.entry_terms(a * n + b) {
                    if is_active[k] {
                        support[k].push((a, b, h));
                        if a <= b {
                            upper_terms.push((k, h));
                        }
                    }
                }
                if a <= b && upper_terms.len() > *upper_ptr.last().unwrap() {
                    upper.push((a, b, if a == b { 1.0 } else { 2.0 }));
                    upper_ptr.push(upper_terms.len());
                }
            }
        }
        Self { n, upper, upper_ptr, upper_terms, active, support }
    }

    /// `out[k] += Re tr(H_k Z)` for active `k`, with `z_lower(d, c)` giving `Z[d, c]`, `d >= c`.
    fn eval_with(&self, out: &mut [f64], z_lower: impl Fn(usize, usize) -> C64) {
        for (idx, &(c, d, w)) in self.upper.iter().enumerate() {
            let zv = z_lower(d, c);
            for &(k, h) in &self.upper_terms[self.upper_ptr[idx]..self.upper_ptr[idx + 1]] {
                out[k] += w * (h * zv).re;
            }
        }
    }

    /// `⟨F_j, Z⟩` for every free unknown `j`.
    fn adjoint(&self, red: &ReducedSdp, z: &DMatrix<C64>) -> Vec<f64> {
        let mut g = vec![0.0; red.basis.len()];
        self.eval_with(&mut g, |d, c| z[(d, c)]);
        project(red, &self.active, &g)
    }

    /// Schur complement `M_ij = Re tr(F_i W F_j W)`.
    fn schur(&self, red: &ReducedSdp, w: &DMatrix<C64>) -> DMatrix<f64> {
        let n = self.n;
        let m = red.num_free();
        let wd = w.as_slice();
        let mut out = DMatrix::<f64>::zeros(m, m);
        let mut z = vec![ZERO; n * n];
        let mut row = vec![0.0; red.basis.len()];
        for &k in &self.active {
            z.iter_mut().for_each(|v| *v = ZERO);
            // lower triangle of W H_k W: Z[i, j] += h W[i, a] conj(W[j, b])
            for &(a, b, h) in &self.support[k] {
                let wa = &wd[a * n..(a + 1) * n];
                let wb = &wd[b * n..(b + 1) * n];
                for j in 0..n {
                    let coef = h * wb[j].conj();
                    let col = &mut z[j * n + j..(j + 1) * n];
                    for (zi, wi) in col.iter_mut().zip(&wa[j..]) {
                        *zi += coef * wi;
                    }
                }
            }
            self.eval_with(&mut row, |d, c| z[c * n + d]);
            let u = project(red, &self.active, &row);
            for &l in &self.active {
                row[l] = 0.0;
            }
            for &(i, nk) in &red.basis[k].0 {
                let mut col = out.column_mut(i);
                for (o, &uj) in col.iter_mut().zip(&u) {
                    *o += nk * uj;
                }
            }
        }
        let sym = (&out + out.transpose()) * 0.5;
        sym
    }
}

/// `Nᵀ g` over the active variables.
fn project(red: &ReducedSdp, active: &[usize], g: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; red.num_free()];
    for &k in active {
        let gk = g[k];
        if gk != 0.0 {
            for &(j, v) in &red.basis[k].0 {
                out[j] += v * gk;
            }
        }
    }
    out
}

struct Ipm<'a> {
    sdp: &'a RealSdp,
    red: &'a ReducedSdp,
    st: Structure,
    sign: f64,
    opts: &'a SolverOptions,
    c: Vec<f64>,
    f0: DMatrix<C64>,
}

/// Residuals and objectives at an iterate.
struct Measures {
    rp: Vec<f64>,
    rd: DMatrix<C64>,
    pobj: f64,
    dobj: f64,
    rel_p: f64,
    rel_d: f64,
    rel_gap: f64,
    mu: f64,
}

impl<'a> Ipm<'a> {
    fn new(sdp: &'a RealSdp, red: &'a ReducedSdp, sign: f64, opts: &'a SolverOptions) -> Self {
        let st = Structure::new(sdp, red);
        let c = red.objective.iter().map(|v| sign * v).collect();
        let f0 = sdp.matrix(&red.y0);
        Self { sdp, red, st, sign, opts, c, f0 }
    }

    /// `Σ_j t_j F_j`, the linear part of `S(t)`.
    fn lin(&self, t: &[f64]) -> DMatrix<C64> {
        let v: Vec<f64> = self.red.basis.iter().map(|r| r.dot(t)).collect();
        self.sdp.matrix(&v)
    }

    fn generator_norms(&self) -> Vec<f64> {
        let m = self.red.num_free();
        let mut sq = vec![0.0; m];
        let mut acc: Vec<C64> = vec![ZERO; m];
        let mut touched: Vec<usize> = Vec::new();
        for (idx, &(_, _, w)) in self.st.upper.iter().enumerate() {
            for &(k, h) in &self.st.upper_terms[self.st.upper_ptr[idx]..self.st.upper_ptr[idx + 1]] {
                for &(j, v) in &self.red.basis[k].0 {
                    if acc[j] == ZERO {
                        touched.push(j);
                    }
                    acc[j] += h * v;
                }
            }
            for &j in &touched {
                sq[j] += w * acc[j].norm_sqr();
                acc[j] = ZERO;
            }
            touched.clear();
        }
        sq.into_iter().map(f64::sqrt).collect()
    }

    fn measure(&self, x: &DMatrix<C64>, s: &DMatrix<C64>, t: &[f64], norm_c: f64, norm_f0: f64) -> Measures {
        let ax = self.st.adjoint(self.red, x);
        let rp: Vec<f64> = self.c.iter().zip(&ax).map(|(c, a)| c + a).collect();
        let rd = &self.f0 + self.lin(t) - s;
        let pobj = inner(&self.f0, x);
        let dobj: f64 = self.c.iter().zip(t).map(|(c, t)| c * t).sum();
        let n = x.nrows() as f64;
        Measures {
            rel_p: norm2(&rp) / (1.0 + norm_c),
            rel_d: rd.norm() / (1.0 + norm_f0),
            rel_gap: (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs()),
            mu: inner(x, s) / n,
            rp,
            rd,
            pobj,
            dobj,
        }
    }

    fn run(&self) -> Result<SolverResult> {
        let n = self.st.n;
        let m = self.red.num_free();
        let tol = self.opts.tol;
        let norm_c = norm2(&self.c);
        let norm_f0 = self.f0.norm();
        let gen = self.generator_norms();
        let sqn = (n as f64).sqrt();
        let xi =
            gen.iter().zip(&self.c).map(|(g, c)| n as f64 * (1.0 + c.abs()) / (1.0 + g)).fold(sqn.max(10.0), f64::max);
        let eta = gen.iter().cloned().fold(norm_f0.max(sqn).max(10.0), f64::max);
        let mut x = DMatrix::<C64>::identity(n, n) * C64::from(xi);
        let mut s = DMatrix::<C64>::identity(n, n) * C64::from(eta);
        let mut t = vec![0.0; m];
        let mut stalled = 0;
        let mut last = (f64::NAN, 0);

        for it in 0..self.opts.max_iters {
            let ms = self.measure(&x, &s, &t, norm_c, norm_f0);
            last = (ms.pobj, it);
            if self.opts.verbose {
                eprintln!(
                    "it {it:3} pobj {:+.9e} dobj {:+.9e} rp {:.2e} rd {:.2e} gap {:.2e} mu {:.2e}",
                    ms.pobj, ms.dobj, ms.rel_p, ms.rel_d, ms.rel_gap, ms.mu
                );
            }
            if ms.rel_p <= tol && ms.rel_gap <= tol && ms.rel_d <= tol {
                let positivity = (-min_eigenvalue(&(&self.f0 + self.lin(&t)))).max(0.0);
                if positivity <= tol {
                    return Ok(self.done(Status::Optimal, &t, ms.pobj, it, None));
                }
            }
            if let Some(cert) = self.farkas(&ms, &x, tol) {
                return Ok(self.done(Status::Infeasible, &t, ms.pobj, it, Some(cert)));
            }
            if stalled >= STALL_LIMIT || !ms.mu.is_finite() {
                return Ok(self.done(Status::NumericalFailure, &t, ms.pobj, it, None));
            }

            let (Some(cx), Some(cs)) = (Cholesky::new(x.clone()), Cholesky::new(s.clone())) else {
                self.note("iterate lost definiteness");
                return Ok(self.done(Status::NumericalFailure, &t, ms.pobj, it, None));
            };
            let Some((p, sig)) = nt_scaling(&cx, &cs) else {
                self.note("scaling point failed");
                return Ok(self.done(Status::NumericalFailure, &t, ms.pobj, it, None));
            };
            let w = &p * p.adjoint();
            let schur = self.st.schur(self.red, &w);
            let Some(chol) = factor(schur.clone()) else {
                self.note("Schur complement not positive definite");
                return Ok(self.done(Status::NumericalFailure, &t, ms.pobj, it, None));
            };
            let wrdw = &w * &ms.rd * &w;
            let base: Vec<f64> = {
                let a = self.st.adjoint(self.red, &wrdw);
                ms.rp.iter().zip(&a).map(|(r, a)| r - a).collect()
            };
            let direction = |rc: &DMatrix<C64>| {
                let a = self.st.adjoint(self.red, rc);
                let rhs: Vec<f64> = base.iter().zip(&a).map(|(b, a)| b + a).collect();
                let rhs = nalgebra::DVector::from_vec(rhs);
                let mut dt = chol.solve(&rhs);
                for _ in 0..2 {
                    let r = &rhs - &schur * &dt;
                    dt += chol.solve(&r);
                }
                let dt: Vec<f64> = dt.iter().cloned().collect();
                let ds = &ms.rd + self.lin(&dt);
                let mut dx = rc - &w * &ds * &w;
                hermitize(&mut dx);
                (dx, dt, ds)
            };

            // predictor
            let (dx, _, ds) = direction(&(-&x));
            let ap = max_step(&cx, &dx).min(1.0);
            let ad = max_step(&cs, &ds).min(1.0);
            let mu_aff = inner(&(&x + &dx * C64::from(ap)), &(&s + &ds * C64::from(ad))) / n as f64;
            let sigma = (mu_aff / ms.mu).clamp(0.0, 1.0).powi(3);

            // corrector
            let Some(pinv) = p.clone().try_inverse() else {
                self.note("singular scaling matrix");
                return Ok(self.done(Status::NumericalFailure, &t, ms.pobj, it, None));
            };
            let dxs = &pinv * &dx * pinv.adjoint();
            let dss = p.adjoint() * &ds * &p;
            let cross = &dxs * &dss + &dss * &dxs;
            let mut rhs = -cross;
            for i in 0..n {
                rhs[(i, i)] += C64::from(2.0 * sigma * ms.mu - 2.0 * sig[i] * sig[i]);
            }
            let u = DMatrix::from_fn(n, n, |i, j| rhs[(i, j)] / (sig[i] + sig[j]));
            let mut rc = &p * u * p.adjoint();
            hermitize(&mut rc);
            let (dx, dt, ds) = direction(&rc);
            let ap = max_step(&cx, &dx);
            let ad = max_step(&cs, &ds);
            let gamma = 0.9 + 0.09 * ap.min(ad).min(1.0);
            let ap = (gamma * ap).min(1.0);
            let ad = (gamma * ad).min(1.0);
            if ap.max(ad) < 1e-10 {
                stalled += 1;
            } else {
                stalled = 0;
            }
            x += &dx * C64::from(ap);
            hermitize(&mut x);
            s += &ds * C64::from(ad);
            hermitize(&mut s);
            for (ti, d) in t.iter_mut().zip(&dt) {
                *ti += ad * d;
            }
        }
        Ok(self.done(Status::MaxIterations, &t, last.0, self.opts.max_iters, None))
    }

    /// Normalised Farkas certificate: `X ⪰ 0` with `⟨F_j, X⟩ ≈ 0` and `⟨F0, X⟩ = -1`.
    fn farkas(&self, ms: &Measures, x: &DMatrix<C64>, tol: f64) -> Option<f64> {
        if ms.pobj >= -1.0 {
            return None;
        }
        let scale = -ms.pobj;
        let ax: Vec<f64> = ms.rp.iter().zip(&self.c).map(|(r, c)| (r - c) / scale).collect();
        let viol = ax.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let size = x.trace().re / scale;
        (viol <= tol && size.is_finite()).then_some(viol)
    }

    fn note(&self, msg: &str) {
        if self.opts.verbose {
            eprintln!("{msg}");
        }
    }

    fn done(&self, status: Status, t: &[f64], pobj: f64, it: usize, cert: Option<f64>) -> SolverResult {
        finish(self.sdp, self.red, self.sign, status, t, pobj, it, cert)
    }
}

/// Scaling `P` with `W = P Pᴴ`, `Pᴴ S P = P⁻¹ X P⁻ᴴ = diag(σ)`.
fn nt_scaling(cx: &Cholesky<C64, Dyn>, cs: &Cholesky<C64, Dyn>) -> Option<(DMatrix<C64>, Vec<f64>)> {
    let l = cx.l();
    let r = cs.l();
    let svd = (r.adjoint() * &l).try_svd(false, true, 1e-15, 0)?;
    let v = svd.v_t?.adjoint();
    let sig: Vec<f64> = svd.singular_values.iter().cloned().collect();
    if sig.iter().any(|&s| !(s > 0.0)) {
        return None;
    }
    let mut p = l * v;
    for (j, &sj) in sig.iter().enumerate() {
        let f = C64::from(1.0 / sj.sqrt());
        p.column_mut(j).iter_mut().for_each(|e| *e *= f);
    }
    Some((p, sig))
}

fn factor(mut m: DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    if let Some(c) = Cholesky::new(m.clone()) {
        return Some(c);
    }
    let scale = m.diagonal().iter().cloned().fold(0.0f64, f64::max).max(1e-300);
    for reg in [1e-14, 1e-12, 1e-10] {
        for i in 0..m.nrows() {
            m[(i, i)] += reg * scale;
        }
        if let Some(c) = Cholesky::new(m.clone()) {
            return Some(c);
        }
    }
    None
}
