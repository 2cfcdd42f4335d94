#![allow(dead_code)]

use pmset::moment::{assemble, statistic_functional, Sense, StatTerm};
use pmset::physics::{brute_force_moment, random_model, ExplicitModel, ThresholdModel};
use pmset::{Alphabet, Functional, RelaxationProblem, Result, Word, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Terms for every outcome probability of `model` with the same state on both sides.
pub fn statistic_terms(model: &ExplicitModel) -> Vec<(Vec<StatTerm>, f64)> {
    let alphabet = &model.alphabet;
    let meas = alphabet.measurements();
    let parties = meas.iter().map(|m| m.party + 1).max().unwrap_or(0);
    let mut words: Vec<Word> = vec![Word::identity()];
    for party in 0..parties {
        let mut next = Vec::new();
        for w in &words {
            for m in meas.iter().filter(|m| m.party == party) {
                for &op in &m.outcomes {
                    next.push(alphabet.multiply(w, &Word::Ops(vec![op])));
                }
            }
        }
        words = next;
    }
    let mut out = Vec::new();
    for z in 0..model.states.len() {
        for w in &words {
            let p = model.states[z].dotc(&model.apply(w, &model.states[z])).re;
            out.push((vec![StatTerm::new(z, z, w.clone(), 1.0)], p));
        }
    }
    out
}

/// The relaxation of `model`'s Gram matrix at `level`, with all of its
/// outcome probabilities as constraints.
pub fn model_relaxation(model: &ExplicitModel, level: usize) -> Result<RelaxationProblem> {
    let gram = model.gram()?;
    let alphabet = model.alphabet.clone();
    assemble(
        &gram,
        &alphabet,
        level,
        |table| {
            let mut constraints = Vec::new();
            for (terms, p) in statistic_terms(model) {
                constraints.push(statistic_functional(&alphabet, table, &terms)?.equals(p.into()));
            }
            Ok((constraints, Functional::default()))
        },
        Sense::Maximize,
    )
}

/// One oracle case: a description and the largest constraint residual of the
/// brute-force moment matrix.
pub struct OracleCase {
    pub label: String,
    pub dim: usize,
    pub residual: f64,
    pub min_eigenvalue: f64,
}

/// 20 random explicit models (10 of dimension 2, 10 of dimension 4) checked
/// against the relaxation at levels 1 and 2.
pub fn random_oracle_cases(seed: u64) -> Result<Vec<OracleCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let no_click = Alphabet::single_receiver_with_no_click(2, 2)?;
    let configs: Vec<(&str, Alphabet, Vec<usize>, usize)> = vec![
        ("one receiver, 2 settings x 2 outcomes", Alphabet::uniform(1, 2, 2)?, vec![2], 3),
        ("one receiver, 3 settings x 2 outcomes", Alphabet::uniform(1, 3, 2)?, vec![2], 4),
        ("one receiver with shared no-click", no_click.clone(), vec![2], 4),
        ("one receiver, 2 settings x 3 outcomes", Alphabet::uniform(1, 2, 3)?, vec![2], 3),
        ("one receiver with shared no-click", no_click.clone(), vec![2], 3),
        ("two receivers on qubits", Alphabet::uniform(2, 2, 2)?, vec![2, 2], 4),
        ("one receiver with shared no-click", no_click, vec![4], 4),
        ("one receiver, 2 settings x 3 outcomes", Alphabet::uniform(1, 2, 3)?, vec![4], 3),
        ("two receivers, 3 outcomes", Alphabet::uniform(2, 2, 3)?, vec![2, 2], 2),
        ("one receiver, 2 settings x 2 outcomes", Alphabet::uniform(1, 2, 2)?, vec![4], 5),
    ];
    let mut out = Vec::new();
    for (alphabet, dims, n, label) in configs.iter().map(|(l, a, d, n)| (a, d, *n, *l)).cycle().take(20) {
        let model = random_model(alphabet, dims, n, &mut rng)?;
        for level in 1..=2 {
            let p = model_relaxation(&model, level)?;
            let g = brute_force_moment(&model, &p.basis);
            out.push(OracleCase {
                label: format!("{label}, d={}, n={n}, level {level}", model.dim()),
                dim: model.dim(),
                residual: p.max_residual(&g),
                min_eigenvalue: pmset::gram::min_hermitian_eigenvalue(&g),
            });
        }
    }
    Ok(out)
}

/// Value of a phase-error functional on the optical model.
pub fn honest_value(model: &ThresholdModel, alphabet: &Alphabet, terms: &[StatTerm]) -> f64 {
    let outcomes = &alphabet.measurements()[1].outcomes;
    terms
        .iter()
        .map(|t| {
            let b = outcomes.iter().position(|&o| o == t.word.ops()[0]).unwrap();
            t.weight * model.element(1, b, t.z, t.zp)
        })
        .sum::<C64>()
        .re
}
