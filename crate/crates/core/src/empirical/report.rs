//! Serialized outputs of empirical runs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    BaselineReport, FitOptions, ScoreRule, StrongFit, SubsetPoint, TradeoffPoint, TransferPoint,
    WeakCurvePoint,
};
use crate::error::Result;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Configuration echo stored with every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunEcho {
    pub command: String,
    pub partition: String,
    pub score: ScoreRule,
    pub folds: usize,
    pub seed: u64,
    pub samples: usize,
    pub providers: Vec<String>,
    pub groups: Vec<String>,
    /// `K`, `|T|` or `n` values, depending on the command.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sizes: Vec<usize>,
}

impl RunEcho {
    pub fn options(&self) -> FitOptions {
        FitOptions {
            score: self.score,
            folds: self.folds,
            seed: self.seed,
            samples: self.samples,
        }
    }
}

/// Fit results; only the sections the command produced are present.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub schema_version: u32,
    pub config: RunEcho,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weak: Vec<WeakCurvePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strong: Option<StrongFit>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transfer: Vec<TransferPoint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subsets: Vec<SubsetPoint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tradeoff: Vec<TradeoffPoint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub baselines: Vec<BaselineReport>,
}

impl FitReport {
    pub fn new(config: RunEcho) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            config,
            weak: Vec::new(),
            strong: None,
            transfer: Vec::new(),
            subsets: Vec::new(),
            tradeoff: Vec::new(),
            baselines: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Flat rows for the command's CSV, header first.
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        let f = |x: f64| x.to_string();
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
        let mut rows: Vec<Vec<String>> = Vec::new();
        let mut header = |h: &[&str]| {
            if rows.is_empty() {
                rows.push(h.iter().map(|s| s.to_string()).collect());
            }
        };
        let c = &self.config;
        match c.command.as_str() {
            "fit-weak" => {
                header(&[
                    "k",
                    "group",
                    "in_sample_rmse",
                    "mean_train_rmse",
                    "mean_test_rmse",
                    "se_test_rmse",
                    "intercept",
                ]);
                for p in &self.weak {
                    for w in &p.fits {
                        rows.push(vec![
                            p.k.to_string(),
                            w.group.clone(),
                            f(w.in_sample_rmse),
                            opt(w.cv.map(|c| c.mean_train_rmse)),
                            opt(w.cv.map(|c| c.mean_test_rmse)),
                            opt(w.cv.map(|c| c.se_test_rmse)),
                            f(w.intercept),
                        ]);
                    }
                }
            }
            "fit-strong" => {
                header(&[
                    "model",
                    "in_sample_rmse",
                    "epsilon_proxy_rmse",
                    "se_test_rmse",
                    "intercept",
                ]);
                if let Some(s) = &self.strong {
                    for p in &s.fits {
                        rows.push(vec![
                            p.model.clone(),
                            f(p.in_sample_rmse),
                            opt(p.cv.map(|c| c.mean_test_rmse)),
                            opt(p.cv.map(|c| c.se_test_rmse)),
                            f(p.intercept),
                        ]);
                    }
                }
            }
            "transfer" => {
                header(&["k", "mean_transfer", "worst_transfer", "epsilon_proxy_rmse"]);
                for p in &self.transfer {
                    rows.push(vec![
                        p.k.to_string(),
                        f(p.mean_transfer),
                        f(p.worst_transfer),
                        f(p.epsilon_proxy_rmse),
                    ]);
                }
            }
            "subsets" => {
                header(&["size", "subsets", "best", "mean", "worst"]);
                for p in &self.subsets {
                    rows.push(vec![
                        p.size.to_string(),
                        p.subsets.to_string(),
                        f(p.best),
                        f(p.mean),
                        f(p.worst),
                    ]);
                }
            }
            "tradeoff" => {
                header(&[
                    "n",
                    "epsilon_proxy_rmse",
                    "mean_in_sample_rmse",
                    "mean_transfer",
                    "worst_transfer",
                ]);
                for p in &self.tradeoff {
                    rows.push(vec![
                        p.n.to_string(),
                        f(p.epsilon_proxy_rmse),
                        f(p.mean_in_sample_rmse),
                        f(p.mean_transfer),
                        f(p.worst_transfer),
                    ]);
                }
            }
            "baselines" => {
                header(&[
                    "group",
                    "nnls_rmse",
                    "best_single_rmse",
                    "best_single_model",
                    "equal_weight_rmse",
                ]);
                for b in &self.baselines {
                    rows.push(vec![
                        b.group.clone(),
                        f(b.nnls_rmse),
                        f(b.best_single_rmse),
                        c.providers
                            .iter()
                            .zip(&b.providers)
                            .find(|(_, &j)| j == b.best_single_provider)
                            .map_or_else(|| b.best_single_provider.to_string(), |(l, _)| l.clone()),
                        f(b.equal_weight_rmse),
                    ]);
                }
            }
            _ => {}
        }
        rows
    }

    /// Long-form learned weights: one row per (k or n, group or model, coefficient).
    pub fn weight_rows(&self) -> Vec<Vec<String>> {
        let mut rows = vec![vec![
            "size".into(),
            "fit".into(),
            "term".into(),
            "value".into(),
        ]];
        for p in &self.weak {
            for w in &p.fits {
                for (j, v) in w.providers.iter().zip(&w.weights) {
                    rows.push(vec![
                        p.k.to_string(),
                        w.group.clone(),
                        self.model_label(*j),
                        v.to_string(),
                    ]);
                }
                rows.push(vec![
                    p.k.to_string(),
                    w.group.clone(),
                    "intercept".into(),
                    w.intercept.to_string(),
                ]);
            }
        }
        let strong = self
            .strong
            .iter()
            .map(|s| (s.users.len(), s))
            .chain(self.tradeoff.iter().map(|t| (t.n, &t.fit)));
        for (n, s) in strong {
            for p in &s.fits {
                for (i, v) in p.users.iter().zip(&p.lambdas) {
                    rows.push(vec![
                        n.to_string(),
                        p.model.clone(),
                        self.group_label(*i),
                        v.to_string(),
                    ]);
                }
                rows.push(vec![
                    n.to_string(),
                    p.model.clone(),
                    "intercept".into(),
                    p.intercept.to_string(),
                ]);
            }
        }
        rows
    }

    fn model_label(&self, j: usize) -> String {
        self.strong
            .iter()
            .flat_map(|s| &s.fits)
            .find(|f| f.provider == j)
            .map_or_else(|| format!("model{j}"), |f| f.model.clone())
    }

    fn group_label(&self, i: usize) -> String {
        self.weak
            .iter()
            .flat_map(|p| &p.fits)
            .find(|f| f.user == i)
            .map_or_else(|| format!("group{i}"), |f| f.group.clone())
    }

    /// Writes `<command>_<partition>_<score>.json`, the matching `.csv`, and a
    /// `_weights.csv` when the run learned weights. Returns the paths written.
    pub fn write_all(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let stem = csv_name(
            &self.config.command,
            &self.config.partition,
            self.config.score,
        );
        let stem = stem.trim_end_matches(".csv");
        let json = dir.join(format!("{stem}.json"));
        std::fs::write(&json, self.to_json()? + "\n")?;
        let csv = dir.join(format!("{stem}.csv"));
        write_rows(&csv, &self.csv_rows())?;
        let mut out = vec![json, csv];
        let weights = self.weight_rows();
        if weights.len() > 1 {
            let p = dir.join(format!("{stem}_weights.csv"));
            write_rows(&p, &weights)?;
            out.push(p);
        }
        Ok(out)
    }
}

fn write_rows(path: &Path, rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// `<command>_<partition>_<score>.csv`.
pub fn csv_name(command: &str, partition: &str, score: ScoreRule) -> String {
    format!("{command}_{partition}_{score}.csv")
}
