//! Survey answer distributions for demographic groups and model predictions.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `sum_a p(a) = 1` before a distribution is rejected.
pub const SUM_TOL: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub wave: String,
    pub n_options: usize,
}

/// `groups[i][q][a] = p_i(a | q)`, `models[j][q][a] = q_j(a | q)`.
///
/// Questions, groups and models keep the order in which they first appear in
/// the files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpinionDataset {
    pub questions: Vec<Question>,
    pub group_labels: Vec<String>,
    pub model_labels: Vec<String>,
    pub groups: Vec<Vec<Vec<f64>>>,
    pub models: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
struct Row {
    question_id: String,
    wave: String,
    #[serde(alias = "group", alias = "model")]
    label: String,
    option_index: usize,
    probability: f64,
}

/// `(first file line, per-option probability)` keyed by `(label, question)`.
type DistMap = HashMap<(String, String), (u64, Vec<Option<f64>>)>;

/// Per-label answer tables, one `[question][option]` table per label.
type Tables = (Vec<String>, Vec<Vec<Vec<f64>>>);

/// Distributions from one file, keyed by label then question, with the file
/// line of the first row of each.
struct Parsed {
    labels: Vec<String>,
    questions: Vec<(String, String)>,
    dists: DistMap,
}

fn parse<R: Read>(reader: R) -> Result<Parsed> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Parsed {
        labels: Vec::new(),
        questions: Vec::new(),
        dists: HashMap::new(),
    };
    let mut waves: HashMap<String, String> = HashMap::new();
    let headers = rdr.headers()?.clone();
    let mut rec = csv::StringRecord::new();
    loop {
        let more = rdr.read_record(&mut rec).map_err(|e| Error::Schema {
            row: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        if !more {
            break;
        }
        let line = rec.position().map_or(0, |p| p.line());
        let row: Row = rec.deserialize(Some(&headers)).map_err(|e| Error::Schema {
            row: line as usize,
            reason: e.to_string(),
        })?;
        let schema = |reason: String| Error::Schema {
            row: line as usize,
            reason,
        };
        if !row.probability.is_finite() || !(0.0..=1.0 + SUM_TOL).contains(&row.probability) {
            return Err(schema(format!(
                "probability {} outside [0, 1]",
                row.probability
            )));
        }
        match waves.get(&row.question_id) {
            Some(w) if *w != row.wave => {
                return Err(schema(format!(
                    "question {} listed under waves {w} and {}",
                    row.question_id, row.wave
                )));
            }
            Some(_) => {}
            None => {
                waves.insert(row.question_id.clone(), row.wave.clone());
                out.questions
                    .push((row.question_id.clone(), row.wave.clone()));
            }
        }
        if !out.labels.contains(&row.label) {
            out.labels.push(row.label.clone());
        }
        let entry = out
            .dists
            .entry((row.label.clone(), row.question_id.clone()))
            .or_insert((line, Vec::new()));
        if entry.1.len() <= row.option_index {
            entry.1.resize(row.option_index + 1, None);
        }
        if entry.1[row.option_index].replace(row.probability).is_some() {
            return Err(schema(format!(
                "duplicate option {} for {}",
                row.option_index, row.label
            )));
        }
    }
    let mut items: Vec<_> = out.dists.iter().collect();
    items.sort_by_key(|(_, (line, _))| *line);
    for ((label, q), (line, probs)) in items {
        if probs.iter().any(Option::is_none) {
            return Err(Error::Schema {
                row: *line as usize,
                reason: format!("{label} skips an option index on question {q}"),
            });
        }
        let sum: f64 = probs.iter().flatten().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::Schema {
                row: *line as usize,
                reason: format!("{label} on question {q} sums to {sum}"),
            });
        }
    }
    Ok(out)
}

impl OpinionDataset {
    pub fn from_readers<G: Read, M: Read>(groups: G, models: M) -> Result<Self> {
        let g = parse(groups)?;
        let m = parse(models)?;
        let mut questions = Vec::with_capacity(g.questions.len());
        for (id, wave) in &g.questions {
            if let Some((_, mw)) = m.questions.iter().find(|(mid, _)| mid == id) {
                if mw != wave {
                    return Err(Error::Schema {
                        row: 0,
                        reason: format!(
                            "question {id} has wave {wave} for groups and {mw} for models"
                        ),
                    });
                }
            }
            let counts = g.labels.iter().chain(&m.labels).filter_map(|l| {
                g.dists
                    .get(&(l.clone(), id.clone()))
                    .or_else(|| m.dists.get(&(l.clone(), id.clone())))
                    .map(|d| d.1.len())
            });
            let mut n_options = None;
            for c in counts {
                if *n_options.get_or_insert(c) != c {
                    return Err(Error::InconsistentOptions(id.clone()));
                }
            }
            questions.push(Question {
                id: id.clone(),
                wave: wave.clone(),
                n_options: n_options.unwrap_or(0),
            });
        }
        if let Some((id, _)) = m
            .questions
            .iter()
            .find(|(id, _)| !g.questions.iter().any(|(g, _)| g == id))
        {
            return Err(Error::MissingDistribution {
                question: id.clone(),
                label: "every group".into(),
            });
        }
        let collect = |p: &Parsed| -> Result<Vec<Vec<Vec<f64>>>> {
            p.labels
                .iter()
                .map(|l| {
                    questions
                        .iter()
                        .map(|q| {
                            p.dists
                                .get(&(l.clone(), q.id.clone()))
                                .map(|(_, d)| d.iter().flatten().copied().collect())
                                .ok_or_else(|| Error::MissingDistribution {
                                    question: q.id.clone(),
                                    label: l.clone(),
                                })
                        })
                        .collect()
                })
                .collect()
        };
        let ds = Self {
            groups: collect(&g)?,
            models: collect(&m)?,
            group_labels: g.labels,
            model_labels: m.labels,
            questions,
        };
        ds.validate()?;
        Ok(ds)
    }

    /// Reads the group file and the model file.
    pub fn load(group_file: &Path, model_file: &Path) -> Result<Self> {
        Self::from_readers(
            std::fs::File::open(group_file)?,
            std::fs::File::open(model_file)?,
        )
    }

    pub fn write_groups<W: Write>(&self, w: W) -> Result<()> {
        write_table(
            w,
            "group",
            &self.questions,
            &self.group_labels,
            &self.groups,
        )
    }

    pub fn write_models<W: Write>(&self, w: W) -> Result<()> {
        write_table(
            w,
            "model",
            &self.questions,
            &self.model_labels,
            &self.models,
        )
    }

    pub fn save(&self, group_file: &Path, model_file: &Path) -> Result<()> {
        self.write_groups(std::fs::File::create(group_file)?)?;
        self.write_models(std::fs::File::create(model_file)?)
    }

    /// Shape and distribution checks; loading already runs them.
    pub fn validate(&self) -> Result<()> {
        if self.questions.is_empty() {
            return Err(Error::InsufficientData("no questions".into()));
        }
        if self.groups.len() != self.group_labels.len()
            || self.models.len() != self.model_labels.len()
        {
            return Err(Error::DimensionMismatch(
                "labels and distributions differ in length".into(),
            ));
        }
        for (labels, tables) in [
            (&self.group_labels, &self.groups),
            (&self.model_labels, &self.models),
        ] {
            for (label, table) in labels.iter().zip(tables) {
                if table.len() != self.questions.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "{label} does not cover every question"
                    )));
                }
                for (q, dist) in self.questions.iter().zip(table) {
                    if dist.len() != q.n_options {
                        return Err(Error::InconsistentOptions(q.id.clone()));
                    }
                    let sum: f64 = dist.iter().sum();
                    if dist.iter().any(|p| !p.is_finite() || *p < 0.0)
                        || (sum - 1.0).abs() > SUM_TOL
                    {
                        return Err(Error::Schema {
                            row: 0,
                            reason: format!("{label} on question {} is not a distribution", q.id),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n_questions(&self) -> usize {
        self.questions.len()
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn n_models(&self) -> usize {
        self.models.len()
    }

    /// Total number of (question, option) pairs.
    pub fn n_observations(&self) -> usize {
        self.questions.iter().map(|q| q.n_options).sum()
    }

    /// Keeps the listed groups and models, in the given order.
    pub fn select(&self, groups: &[usize], models: &[usize]) -> Result<Self> {
        let pick = |labels: &[String], tables: &[Vec<Vec<f64>>], idx: &[usize]| -> Result<Tables> {
            idx.iter()
                .map(|&k| {
                    labels
                        .get(k)
                        .map(|l| (l.clone(), tables[k].clone()))
                        .ok_or_else(|| Error::DimensionMismatch(format!("index {k} out of range")))
                })
                .collect::<Result<Vec<_>>>()
                .map(|v| v.into_iter().unzip())
        };
        let (group_labels, groups) = pick(&self.group_labels, &self.groups, groups)?;
        let (model_labels, models) = pick(&self.model_labels, &self.models, models)?;
        Ok(Self {
            questions: self.questions.clone(),
            group_labels,
            model_labels,
            groups,
            models,
        })
    }
}

fn write_table<W: Write>(
    w: W,
    kind: &str,
    questions: &[Question],
    labels: &[String],
    tables: &[Vec<Vec<f64>>],
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["question_id", "wave", kind, "option_index", "probability"])?;
    for (label, table) in labels.iter().zip(tables) {
        for (q, dist) in questions.iter().zip(table) {
            for (a, p) in dist.iter().enumerate() {
                wtr.write_record([
                    q.id.as_str(),
                    &q.wave,
                    label,
                    &a.to_string(),
                    &p.to_string(),
                ])?;
            }
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Resolves a comma list of labels or indices against `labels`; `None` keeps all.
pub fn resolve_labels(spec: Option<&str>, labels: &[String]) -> Result<Vec<usize>> {
    let Some(spec) = spec else {
        return Ok((0..labels.len()).collect());
    };
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            labels
                .iter()
                .position(|l| l == s)
                .or_else(|| s.parse::<usize>().ok().filter(|&k| k < labels.len()))
                .ok_or_else(|| Error::ParameterViolation(format!("unknown label {s}")))
        })
        .collect()
}
