//! Question-level cross-validation folds.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dataset::Question;
use crate::error::{Error, Result};

pub const DEFAULT_FOLDS: usize = 5;

/// Fold index of every question.
///
/// Questions are grouped by wave (in order of first appearance), sorted by id
/// within a wave, shuffled with a generator seeded by `seed`, and dealt round
/// robin so every wave spreads evenly. The result depends only on the question
/// ids, their waves and `seed`.
pub fn assign_folds(questions: &[Question], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::ParameterViolation(format!(
            "need at least 2 folds, got {k}"
        )));
    }
    if questions.len() < 2 * k {
        return Err(Error::InsufficientData(format!(
            "{} questions cannot fill {k} folds with 2 questions each",
            questions.len()
        )));
    }
    let mut waves: Vec<&str> = Vec::new();
    for q in questions {
        if !waves.contains(&q.wave.as_str()) {
            waves.push(&q.wave);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0; questions.len()];
    let mut next = 0;
    for wave in waves {
        let mut idx: Vec<usize> = (0..questions.len())
            .filter(|&q| questions[q].wave == wave)
            .collect();
        idx.sort_by(|&a, &b| questions[a].id.cmp(&questions[b].id));
        idx.shuffle(&mut rng);
        for q in idx {
            fold[q] = next % k;
            next += 1;
        }
    }
    Ok(fold)
}

/// `(train, test)` question indices for fold `f`.
pub fn split(fold_of: &[usize], f: usize) -> (Vec<usize>, Vec<usize>) {
    (0..fold_of.len()).partition(|&q| fold_of[q] != f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qs(n: usize) -> Vec<Question> {
        (0..n)
            .map(|i| Question {
                id: format!("q{i}"),
                wave: if i % 3 == 0 { "A".into() } else { "B".into() },
                n_options: 2,
            })
            .collect()
    }

    #[test]
    fn folds_are_balanced_and_seeded() {
        let q = qs(23);
        let f = assign_folds(&q, 5, 7).unwrap();
        for k in 0..5 {
            let c = f.iter().filter(|&&x| x == k).count();
            assert!((4..=5).contains(&c));
        }
        assert_eq!(f, assign_folds(&q, 5, 7).unwrap());
    }

    #[test]
    fn too_few_questions() {
        assert!(matches!(
            assign_folds(&qs(9), 5, 0),
            Err(Error::InsufficientData(_))
        ));
    }
}
