//! Honest device models used as oracles.
//!
//! [`ExplicitModel`] is a finite-dimensional realisation (states and
//! projectors) from which the exact moment matrix is computed by dense linear
//! algebra. [`ThresholdModel`] describes coherent-state optics with on/off
//! detectors, dark counts and label noise; its matrix elements between code
//! states follow in closed form from the vacuum-projector identity
//! `<β| V_K |γ> = <β|γ> · exp(-Σ_{k∈K} conj(β_k') γ_k')`, where primes denote
//! amplitudes in the detector modes.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::gram::{conjugate_coding_vectors, gram_from_vectors};
use crate::opalg::{Alphabet, MonomialBasis, OpId, Word};
use crate::{Error, GramMatrix, Result, C64};

const MODEL_TOL: f64 = 1e-10;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// States and projective measurements on `⊗_p C^{party_dims[p]}`.
///
/// `projectors[m][o]` is the full-space projector of outcome `o` of
/// `alphabet.measurements()[m]`.
#[derive(Debug, Clone)]
pub struct ExplicitModel {
    pub alphabet: Alphabet,
    pub party_dims: Vec<usize>,
    pub states: Vec<DVector<C64>>,
    pub projectors: Vec<Vec<DMatrix<C64>>>,
}

impl ExplicitModel {
    /// Validates states and projectors: unit norm, Hermitian idempotent
    /// projectors, orthogonal and complete per setting, aliased outcomes equal,
    /// and projectors of different parties commuting.
    pub fn new(
        alphabet: Alphabet,
        party_dims: Vec<usize>,
        states: Vec<DVector<C64>>,
        projectors: Vec<Vec<DMatrix<C64>>>,
    ) -> Result<Self> {
        let model = Self { alphabet, party_dims, states, projectors };
        model.validate()?;
        Ok(model)
    }

    pub fn dim(&self) -> usize {
        self.party_dims.iter().product()
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim();
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        if self.states.is_empty() {
            return bad("no states".into());
        }
        for (z, s) in self.states.iter().enumerate() {
            if s.len() != d {
                return bad(format!("state {z} has length {}, expected {d}", s.len()));
            }
            if (s.norm() - 1.0).abs() > MODEL_TOL {
                return bad(format!("state {z} has norm {}", s.norm()));
            }
        }
        let meas = self.alphabet.measurements();
        if self.projectors.len() != meas.len() {
            return bad(format!("{} measurements, alphabet declares {}", self.projectors.len(), meas.len()));
        }
        let id = DMatrix::<C64>::identity(d, d);
        let mut by_op: Vec<Option<&DMatrix<C64>>> = vec![None; self.alphabet.num_ops()];
        for (mi, (m, ps)) in meas.iter().zip(&self.projectors).enumerate() {
            if ps.len() != m.outcomes.len() {
                return bad(format!("measurement {mi} has {} projectors, expected {}", ps.len(), m.outcomes.len()));
            }
            let mut sum = DMatrix::<C64>::zeros(d, d);
            for (o, p) in ps.iter().enumerate() {
                if p.shape() != (d, d) {
                    return bad(format!("projector ({mi}, {o}) has shape {:?}", p.shape()));
                }
                if (p - p.adjoint()).camax() > MODEL_TOL || (p * p - p).camax() > MODEL_TOL {
                    return bad(format!("({mi}, {o}) is not an orthogonal projector"));
                }
                for (o2, q) in ps.iter().enumerate().skip(o + 1) {
                    if (p * q).camax() > MODEL_TOL {
                        return bad(format!("outcomes {o} and {o2} of measurement {mi} are not orthogonal"));
                    }
                }
                sum += p;
                let op = m.outcomes[o] as usize;
                match by_op[op] {
                    Some(prev) if (prev - p).camax() > MODEL_TOL => {
                        return bad(format!(
                            "aliased operator {} differs between settings",
                            self.alphabet.label(op as OpId)
                        ));
                    }
                    _ => by_op[op] = Some(p),
                }
            }
            if (sum - &id).camax() > MODEL_TOL {
                return bad(format!("outcomes of measurement {mi} do not sum to the identity"));
            }
        }
        for i in 0..meas.len() {
            for j in (i + 1..meas.len()).filter(|&j| meas[j].party != meas[i].party) {
                for p in &self.projectors[i] {
                    for q in &self.projectors[j] {
                        if (p * q - q * p).camax() > MODEL_TOL {
                            return bad(format!("parties {} and {} do not commute", meas[i].party, meas[j].party));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Projector of operator `op`.
    pub fn op_matrix(&self, op: OpId) -> &DMatrix<C64> {
        for (m, ps) in self.alphabet.measurements().iter().zip(&self.projectors) {
            if let Some(o) = m.outcomes.iter().position(|&x| x == op) {
                return &ps[o];
            }
        }
        panic!("operator {op} not in any measurement")
    }

    /// `word |v>`, applying the rightmost operator first.
    pub fn apply(&self, w: &Word, v: &DVector<C64>) -> DVector<C64> {
        match w {
            Word::Zero => DVector::zeros(v.len()),
            Word::Ops(ops) => ops.iter().rev().fold(v.clone(), |acc, &op| self.op_matrix(op) * acc),
        }
    }

    pub fn gram(&self) -> Result<GramMatrix> {
        gram_from_vectors(&self.states)
    }

    /// `<φ_z| Π_k E_k |φ_z>` for operators of distinct parties.
    pub fn probability(&self, z: usize, ops: &[OpId]) -> f64 {
        let v = &self.states[z];
        let w = ops.iter().fold(v.clone(), |acc, &op| self.op_matrix(op) * acc);
        v.dotc(&w).re
    }

    /// Joint outcome probabilities of one or two parties.
    pub fn statistics(&self) -> StatisticsTable {
        let meas = self.alphabet.measurements();
        let parties = self.party_dims.len();
        let mut probs = BTreeMap::new();
        for z in 0..self.states.len() {
            if parties == 1 {
                for m in meas {
                    for (b, &op) in m.outcomes.iter().enumerate() {
                        probs.insert(StatKey { a: 0, b, x: 0, y: m.setting, z }, self.probability(z, &[op]));
                    }
                }
            } else {
                for ma in meas.iter().filter(|m| m.party == 0) {
                    for mb in meas.iter().filter(|m| m.party == 1) {
                        for (a, &oa) in ma.outcomes.iter().enumerate() {
                            for (b, &ob) in mb.outcomes.iter().enumerate() {
                                let key = StatKey { a, b, x: ma.setting, y: mb.setting, z };
                                probs.insert(key, self.probability(z, &[oa, ob]));
                            }
                        }
                    }
                }
            }
        }
        StatisticsTable { probs, p_det: 1.0, eps0: 0.0, eps1: 0.0 }
    }
}

/// Exact moment matrix `G[(z,i),(z',j)] = <φ_z| S_i† S_j |φ_z'>`, flat index `z·m + i`.
pub fn brute_force_moment(model: &ExplicitModel, basis: &MonomialBasis) -> DMatrix<C64> {
    let vecs: Vec<DVector<C64>> =
        model.states.iter().flat_map(|s| basis.words.iter().map(move |w| model.apply(w, s))).collect();
    let v = DMatrix::from_columns(&vecs);
    v.adjoint() * v
}

/// Key of one outcome probability `p(a, b | x, y, z)`; single-receiver tables use `a = x = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StatKey {
    pub a: usize,
    pub b: usize,
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

/// Outcome probabilities with the derived detection and error rates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StatisticsTable {
    pub probs: BTreeMap<StatKey, f64>,
    pub p_det: f64,
    /// Error rate in the key basis.
    pub eps0: f64,
    /// Error rate in the test basis.
    pub eps1: f64,
}

impl StatisticsTable {
    pub fn get(&self, a: usize, b: usize, x: usize, y: usize, z: usize) -> f64 {
        self.probs.get(&StatKey { a, b, x, y, z }).copied().unwrap_or(0.0)
    }

    /// Single-receiver probability `p(b | y, z)`.
    pub fn single(&self, b: usize, y: usize, z: usize) -> f64 {
        self.get(0, b, 0, y, z)
    }

    /// Largest deviation from `Σ_{ab} p(ab|xy,z) = 1` and from `[0, 1]`.
    pub fn normalisation_defect(&self) -> f64 {
        let mut sums: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
        let mut worst = 0.0f64;
        for (k, &p) in &self.probs {
            *sums.entry((k.x, k.y, k.z)).or_insert(0.0) += p;
            worst = worst.max(-p).max(p - 1.0);
        }
        sums.values().fold(worst, |w, s| w.max((s - 1.0).abs()))
    }

    /// `(1/8) Σ_{z,x} p(guess = z_x)` for `party` of a two-bit code, `z = 2 z0 + z1`.
    pub fn guessing_probability(&self, party: usize) -> f64 {
        let mut total = 0.0;
        for z in 0..4 {
            let bits = [z >> 1, z & 1];
            for (x, &bit) in bits.iter().enumerate() {
                // marginalise the other party, whose setting is fixed to 0
                for other in 0..2 {
                    total += if party == 0 { self.get(bit, other, x, 0, z) } else { self.get(other, bit, 0, x, z) };
                }
            }
        }
        total / 8.0
    }
}

fn pauli_measurement(x: usize) -> [DMatrix<C64>; 2] {
    let s = if x == 0 { -1.0 } else { 1.0 };
    let r = std::f64::consts::FRAC_1_SQRT_2;
    // (X + s Y)/√2
    let n = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(r, -s * r), c(r, s * r), c(0.0, 0.0)]);
    let id = DMatrix::<C64>::identity(2, 2);
    [(&id + &n).scale(0.5), (&id - &n).scale(0.5)]
}

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// Two-bit code states sent through the asymmetric cloner
/// `|00> → |00>`, `|10> → √(1-f)|10> + √f|01>`, with the left qubit measured
/// by Alice and the right by Bob in the bases `(X ± Y)/√2`.
///
/// The returned table has `p_det = 1` and `eps0`, `eps1` equal to Alice's and
/// Bob's guessing errors.
pub fn qrac_cloner_model(f: f64) -> Result<(ExplicitModel, StatisticsTable)> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::InvalidParameter(format!("cloner asymmetry {f} outside [0, 1]")));
    }
    let (keep, leak) = ((1.0 - f).sqrt(), f.sqrt());
    let states: Vec<DVector<C64>> = conjugate_coding_vectors()
        .iter()
        .map(|psi| {
            // basis |ab> at index 2a + b
            DVector::from_vec(vec![psi[0], psi[1] * leak, psi[1] * keep, c(0.0, 0.0)])
        })
        .collect();
    let alphabet = Alphabet::uniform(2, 2, 2)?;
    let id = DMatrix::<C64>::identity(2, 2);
    let mut projectors = Vec::new();
    for m in alphabet.measurements() {
        let local = pauli_measurement(m.setting);
        projectors.push(local.iter().map(|p| if m.party == 0 { kron(p, &id) } else { kron(&id, p) }).collect());
    }
    let model = ExplicitModel::new(alphabet, vec![2, 2], states, projectors)?;
    let mut table = model.statistics();
    table.eps0 = 1.0 - table.guessing_probability(0);
    table.eps1 = 1.0 - table.guessing_probability(1);
    Ok((model, table))
}

/// Haar-like random unitary from the QR factorisation of a Gaussian matrix.
fn random_unitary<R: Rng>(d: usize, rng: &mut R) -> DMatrix<C64> {
    let g = DMatrix::from_fn(d, d, |_, _| c(gaussian(rng), gaussian(rng)));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_fn(d, d, |i, j| if i == j { r[(i, i)] / r[(i, i)].norm() } else { c(0.0, 0.0) });
    q * phases
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn column_projector(u: &DMatrix<C64>, cols: &[usize]) -> DMatrix<C64> {
    let d = u.nrows();
    let mut p = DMatrix::<C64>::zeros(d, d);
    for &k in cols {
        let v = u.column(k);
        p += &v * v.adjoint();
    }
    p
}

/// A random model for `alphabet` on `⊗_p C^{party_dims[p]}` with `n_states` random pure states.
///
/// Per party, aliased outcomes get random orthogonal subspaces first; each
/// setting then splits a random basis of the remaining space among its fresh
/// outcomes, so some projectors may be zero.
pub fn random_model<R: Rng>(
    alphabet: &Alphabet,
    party_dims: &[usize],
    n_states: usize,
    rng: &mut R,
) -> Result<ExplicitModel> {
    let meas = alphabet.measurements();
    let parties = meas.iter().map(|m| m.party + 1).max().unwrap_or(0);
    if party_dims.len() != parties {
        return Err(Error::Dimension(format!("{} party dimensions for {parties} parties", party_dims.len())));
    }
    let d: usize = party_dims.iter().product();
    let embed = |party: usize, p: &DMatrix<C64>| -> DMatrix<C64> {
        let left: usize = party_dims[..party].iter().product();
        let right: usize = party_dims[party + 1..].iter().product();
        kron(&kron(&DMatrix::identity(left, left), p), &DMatrix::identity(right, right))
    };
    let mut projectors: Vec<Vec<DMatrix<C64>>> = meas.iter().map(|_| Vec::new()).collect();
    for party in 0..parties {
        let dp = party_dims[party];
        let mine: Vec<usize> = (0..meas.len()).filter(|&i| meas[i].party == party).collect();
        let mut aliased: Vec<OpId> = Vec::new();
        for &i in &mine {
            for &op in &meas[i].outcomes {
                if mine.iter().filter(|&&j| meas[j].outcomes.contains(&op)).count() > 1 && !aliased.contains(&op) {
                    aliased.push(op);
                }
            }
        }
        let u = random_unitary(dp, rng);
        let mut next = 0;
        let mut alias_proj: BTreeMap<OpId, DMatrix<C64>> = BTreeMap::new();
        for &op in &aliased {
            let rank = rng.gen_range(0..=(dp - next).saturating_sub(1));
            alias_proj.insert(op, column_projector(&u, &(next..next + rank).collect::<Vec<_>>()));
            next += rank;
        }
        // random basis of the complement of the aliased subspaces
        let rest: Vec<usize> = (next..dp).collect();
        for &i in &mine {
            let v = random_unitary(rest.len(), rng);
            let basis =
                DMatrix::from_fn(dp, rest.len(), |r, k| (0..rest.len()).map(|j| u[(r, rest[j])] * v[(j, k)]).sum());
            let fresh: Vec<usize> =
                (0..meas[i].outcomes.len()).filter(|o| !aliased.contains(&meas[i].outcomes[*o])).collect();
            let mut groups: Vec<Vec<usize>> = vec![Vec::new(); fresh.len()];
            for k in 0..rest.len() {
                groups[rng.gen_range(0..fresh.len())].push(k);
            }
            let mut ps = Vec::new();
            for (o, &op) in meas[i].outcomes.iter().enumerate() {
                let local = match alias_proj.get(&op) {
                    Some(p) => p.clone(),
                    None => column_projector(&basis, &groups[fresh.iter().position(|&f| f == o).unwrap()]),
                };
                ps.push(embed(party, &local));
            }
            projectors[i] = ps;
        }
    }
    let states = (0..n_states)
        .map(|_| {
            let v = DVector::from_fn(d, |_, _| c(gaussian(rng), gaussian(rng)));
            let n = v.norm();
            v / C64::from(n)
        })
        .collect();
    ExplicitModel::new(alphabet.clone(), party_dims.to_vec(), states, projectors)
}

/// Threshold-detector measurement: two detectors whose modes are the given
/// rows (orthonormal combinations of the input modes).
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorPair {
    pub rows: [Vec<C64>; 2],
}

/// Coherent code states (one amplitude per mode) measured by threshold
/// detectors with dark counts and a label flip.
///
/// Outcome `b ∈ {0, 1}` is reported when only detector `b` clicks, a double
/// click is assigned to either outcome with probability 1/2, and each
/// reported label is flipped with probability `flip`. Outcome 2 is no click.
/// Modes not seen by any detector (e.g. an eavesdropper's share) only enter
/// through the state overlaps.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdModel {
    pub states: Vec<Vec<C64>>,
    pub settings: Vec<DetectorPair>,
    pub p_dc: f64,
    pub flip: f64,
}

impl ThresholdModel {
    fn overlap(&self, z: usize, zp: usize) -> C64 {
        self.states[z].iter().zip(&self.states[zp]).map(|(&a, &b)| crate::gram::coherent_overlap(a, b)).product()
    }

    fn detector_amplitude(&self, y: usize, k: usize, z: usize) -> C64 {
        self.settings[y].rows[k].iter().zip(&self.states[z]).map(|(r, a)| r * a).sum()
    }

    /// `<φ_z| V_K |φ_z'>` for the set `K` of detectors of setting `y` forced dark.
    fn vacuum(&self, y: usize, dark: &[usize], z: usize, zp: usize) -> C64 {
        let e: C64 =
            dark.iter().map(|&k| self.detector_amplitude(y, k, z).conj() * self.detector_amplitude(y, k, zp)).sum();
        self.overlap(z, zp) * (-e).exp()
    }

    /// `<φ_z| M^b_y |φ_z'>` for the POVM element of outcome `b` (2 = no click).
    pub fn element(&self, y: usize, b: usize, z: usize, zp: usize) -> C64 {
        let q = 1.0 - self.p_dc;
        let one = self.overlap(z, zp);
        let v0 = self.vacuum(y, &[0], z, zp) * q;
        let v1 = self.vacuum(y, &[1], z, zp) * q;
        let v01 = self.vacuum(y, &[0, 1], z, zp) * (q * q);
        // only 0 clicks: (1 - qV0) qV1; both: (1 - qV0)(1 - qV1)
        let only = [v1 - v01, v0 - v01];
        let both = one - v0 - v1 + v01;
        let raw = |k: usize| only[k] + both * 0.5;
        match b {
            0 => raw(0) * (1.0 - self.flip) + raw(1) * self.flip,
            1 => raw(1) * (1.0 - self.flip) + raw(0) * self.flip,
            _ => v01,
        }
    }

    /// `p(b | y, z)` for every setting and outcome.
    pub fn statistics(&self) -> StatisticsTable {
        let mut probs = BTreeMap::new();
        for z in 0..self.states.len() {
            for y in 0..self.settings.len() {
                for b in 0..3 {
                    probs.insert(StatKey { a: 0, b, x: 0, y, z }, self.element(y, b, z, z).re);
                }
            }
        }
        StatisticsTable { probs, ..StatisticsTable::default() }
    }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} {v} outside [0, 1]")))
    }
}

/// Detection probability and error rate of the phase-encoding protocol:
/// `p_det = 1 - (1 - p_dc)² exp(-2ημ)`, `ε = (p_dc + (1 - exp(-2ημ)) e_opt) / p_det`.
pub fn phase_qkd_honest_stats(mu: f64, eta: f64, p_dc: f64, e_opt: f64) -> Result<(f64, f64)> {
    if !(mu >= 0.0) {
        return Err(Error::InvalidParameter(format!("mu {mu} is negative")));
    }
    check_unit("transmittance", eta)?;
    check_unit("dark count probability", p_dc)?;
    check_unit("optical error", e_opt)?;
    let signal = 1.0 - (-2.0 * eta * mu).exp();
    let p_det = 1.0 - (1.0 - p_dc).powi(2) * (-2.0 * eta * mu).exp();
    if p_det <= 0.0 {
        return Err(Error::InvalidParameter("detection probability is zero".into()));
    }
    Ok((p_det, (p_dc + signal * e_opt) / p_det))
}

/// Optical model of the phase-encoding protocol.
///
/// Code states `|α_z>` with `α = (√μ, -√μ, i√μ, -i√μ)` pass a channel of
/// transmittance `η` (the lost part is kept by the eavesdropper) together with
/// a phase reference `|√μ>`. Bob interferes signal and reference after a phase
/// shift `e^{iθ_y}`, `θ = (0, π/2)`, on a balanced splitter, so that states 0
/// and 2 light detector 0 and states 1 and 3 light detector 1.
pub fn phase_qkd_model(mu: f64, eta: f64, p_dc: f64, e_opt: f64) -> Result<ThresholdModel> {
    phase_qkd_honest_stats(mu, eta, p_dc, e_opt)?;
    let s = mu.sqrt();
    let amps = [c(s, 0.0), c(-s, 0.0), c(0.0, s), c(0.0, -s)];
    let (t, l) = (eta.sqrt(), (1.0 - eta).sqrt());
    // modes: Bob's signal, Bob's reference, lost signal, lost reference
    let states = amps.iter().map(|&a| vec![a * t, c(s * t, 0.0), a * l, c(s * l, 0.0)]).collect();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let zero = c(0.0, 0.0);
    let setting = |phase: C64| DetectorPair {
        rows: [vec![c(r, 0.0), phase * r, zero, zero], vec![c(r, 0.0), -phase * r, zero, zero]],
    };
    Ok(ThresholdModel { states, settings: vec![setting(c(1.0, 0.0)), setting(c(0.0, 1.0))], p_dc, flip: e_opt })
}

/// Optical model of the time-bin protocol.
///
/// States (early, late) are bit 0 `(√δ α, √(1-δ) α)`, bit 1
/// `(√(1-δ) α, √δ α)` and test `(β, β)`. Setting 0 is the data line whose
/// detector 0 watches the late bin (where bit 0 is bright) and detector 1 the
/// early bin. Setting 1 is the monitoring interferometer with outputs
/// `√t·early + √(1-t)·late` (port 0) and `√(1-t)·early - √t·late` (port 1).
pub fn cow_model(alpha: C64, beta: C64, delta: f64, bs_t: f64, eta: f64, p_dc: f64) -> Result<ThresholdModel> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!("extinction {delta} outside [0, 1)")));
    }
    if !(bs_t > 0.0 && bs_t < 1.0) {
        return Err(Error::InvalidParameter(format!("splitter transmittance {bs_t} outside (0, 1)")));
    }
    check_unit("transmittance", eta)?;
    check_unit("dark count probability", p_dc)?;
    let (off, on) = (alpha * delta.sqrt(), alpha * (1.0 - delta).sqrt());
    let bins = [[off, on], [on, off], [beta, beta]];
    let (t, l) = (eta.sqrt(), (1.0 - eta).sqrt());
    // modes: Bob's early, Bob's late, lost early, lost late
    let states = bins.iter().map(|b| vec![b[0] * t, b[1] * t, b[0] * l, b[1] * l]).collect();
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let (st, sr) = (bs_t.sqrt(), (1.0 - bs_t).sqrt());
    let data = DetectorPair { rows: [vec![zero, one, zero, zero], vec![one, zero, zero, zero]] };
    let monitor =
        DetectorPair { rows: [vec![c(st, 0.0), c(sr, 0.0), zero, zero], vec![c(sr, 0.0), c(-st, 0.0), zero, zero]] };
    Ok(ThresholdModel { states, settings: vec![data, monitor], p_dc, flip: 0.0 })
}

/// Statistics of [`cow_model`]. `p_det` is the mean detection probability of
/// the two bit states, `eps0` their data-line error rate and `eps1` the share
/// of test-state monitoring clicks at port 1.
pub fn cow_honest_stats(alpha: C64, beta: C64, delta: f64, bs_t: f64, eta: f64, p_dc: f64) -> Result<StatisticsTable> {
    let model = cow_model(alpha, beta, delta, bs_t, eta, p_dc)?;
    let mut table = model.statistics();
    let det = |z: usize| 1.0 - table.single(2, 0, z);
    table.p_det = 0.5 * (det(0) + det(1));
    if table.p_det > 0.0 {
        table.eps0 = 0.5 * (table.single(1, 0, 0) + table.single(0, 0, 1)) / table.p_det;
    }
    let test = table.single(0, 1, 2) + table.single(1, 1, 2);
    if test > 0.0 {
        table.eps1 = table.single(1, 1, 2) / test;
    }
    Ok(table)
}
