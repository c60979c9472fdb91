//! Seeded synthetic datasets with planted mixture weights.

use rand::Rng;

use super::{OpinionDataset, Question};

#[derive(Clone, Debug)]
pub struct SyntheticSpec {
    pub questions: usize,
    pub max_options: usize,
    pub models: usize,
    pub groups: usize,
    pub waves: usize,
    /// Per-option noise added to each group distribution before renormalizing.
    pub noise: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            questions: 40,
            max_options: 5,
            models: 4,
            groups: 3,
            waves: 2,
            noise: 0.0,
        }
    }
}

fn random_dist<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>().powi(3) + 1e-3).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

/// Models draw peaked random distributions; group `i` answers with the
/// mixture `sum_j w[i][j] q_j` (plus optional noise). Returns the planted `w`.
pub fn synthetic_dataset<R: Rng>(
    rng: &mut R,
    spec: &SyntheticSpec,
) -> (OpinionDataset, Vec<Vec<f64>>) {
    let questions: Vec<Question> = (0..spec.questions)
        .map(|q| Question {
            id: format!("q{q:03}"),
            wave: format!("W{}", q % spec.waves.max(1)),
            n_options: rng.gen_range(2..=spec.max_options.max(2)),
        })
        .collect();
    let models: Vec<Vec<Vec<f64>>> = (0..spec.models)
        .map(|_| {
            questions
                .iter()
                .map(|q| random_dist(rng, q.n_options))
                .collect()
        })
        .collect();
    let planted: Vec<Vec<f64>> = (0..spec.groups)
        .map(|_| {
            let raw: Vec<f64> = (0..spec.models)
                .map(|_| {
                    if rng.gen_bool(0.7) {
                        rng.gen::<f64>()
                    } else {
                        0.0
                    }
                })
                .collect();
            let s: f64 = raw.iter().sum();
            if s == 0.0 {
                let mut w = vec![0.0; spec.models];
                w[0] = 1.0;
                w
            } else {
                raw.into_iter().map(|v| v / s).collect()
            }
        })
        .collect();
    let groups = planted
        .iter()
        .map(|w| {
            questions
                .iter()
                .enumerate()
                .map(|(q, qu)| {
                    let mut p: Vec<f64> = (0..qu.n_options)
                        .map(|a| {
                            let mix: f64 = w.iter().zip(&models).map(|(wj, m)| wj * m[q][a]).sum();
                            (mix + spec.noise * rng.gen::<f64>()).max(0.0)
                        })
                        .collect();
                    let s: f64 = p.iter().sum();
                    p.iter_mut().for_each(|v| *v /= s);
                    p
                })
                .collect()
        })
        .collect();
    let ds = OpinionDataset {
        questions,
        group_labels: (0..spec.groups).map(|i| format!("group{i}")).collect(),
        model_labels: (0..spec.models).map(|j| format!("model{j}")).collect(),
        groups,
        models,
    };
    (ds, planted)
}
