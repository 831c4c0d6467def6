//! Split, standardize, select, classify, score.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::learn::{knn_scores, lasso_path, LassoFit, LogisticRegression};
use super::metrics::{metrics, positive_label, MetricsReport};
use super::split::{split, ZScore};
use super::FeatureMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Logreg,
    Knn,
}

impl ClassifierKind {
    pub fn short_name(self) -> &'static str {
        match self {
            ClassifierKind::Logreg => "LR",
            ClassifierKind::Knn => "KNN",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    None,
    Lasso,
}

/// L1 strengths tried when no penalty is given.
pub const LAMBDA_GRID: [f64; 5] = [1e-3, 1e-2, 1e-1, 1.0, 10.0];
pub const VALIDATION_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub classifier: ClassifierKind,
    pub selection: Selection,
    pub test_fraction: f64,
    pub seed: u64,
    /// Fixed L1 penalty; `None` picks one from [`LAMBDA_GRID`].
    pub lambda: Option<f64>,
    pub knn_k: usize,
    pub l2: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            classifier: ClassifierKind::Logreg,
            selection: Selection::None,
            test_fraction: 0.2,
            seed: 0,
            lambda: None,
            knn_k: 5,
            l2: LogisticRegression::default().l2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub label: String,
    pub score: f64,
    pub predicted: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub metrics: MetricsReport,
    pub positive_label: String,
    pub n_train: usize,
    pub n_test: usize,
    pub n_features: usize,
    pub selected_features: Vec<String>,
    pub lambda: Option<f64>,
    pub predictions: Vec<Prediction>,
    /// Milliseconds per stage.
    #[serde(skip)]
    pub timings_ms: BTreeMap<String, f64>,
}

/// Scores (probability of the positive class) for `test_x`.
pub fn train_predict(
    kind: ClassifierKind,
    cfg: &ExperimentConfig,
    train_x: &[Vec<f64>],
    train_y: &[bool],
    test_x: &[Vec<f64>],
) -> Result<Vec<f64>> {
    match kind {
        ClassifierKind::Logreg => {
            let model = LogisticRegression {
                l2: cfg.l2,
                ..LogisticRegression::default()
            };
            let fit = model.fit(train_x, train_y)?;
            Ok(LogisticRegression::predict_proba(&fit, test_x))
        }
        ClassifierKind::Knn => knn_scores(train_x, train_y, test_x, cfg.knn_k),
    }
}

fn rows(m: &[Vec<f64>], idx: &[usize]) -> Vec<Vec<f64>> {
    idx.iter().map(|&i| m[i].clone()).collect()
}

fn columns(m: &[Vec<f64>], cols: &[usize]) -> Vec<Vec<f64>> {
    m.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect()
}

fn accuracy(scores: &[f64], truth: &[bool]) -> f64 {
    let hits = scores.iter().zip(truth).filter(|(s, t)| (**s >= 0.5) == **t).count();
    hits as f64 / truth.len().max(1) as f64
}

/// Picks the L1 penalty from [`LAMBDA_GRID`] by accuracy on one stratified
/// validation fold of the (standardized) training rows. Ties go to the
/// larger penalty, except that a penalty selecting nothing only wins when
/// every penalty selects nothing.
pub fn choose_lambda(x: &[Vec<f64>], y: &[bool], labels: &[String], cfg: &ExperimentConfig) -> Result<f64> {
    let (fit_idx, val_idx) = split(labels, VALIDATION_FRACTION, cfg.seed ^ 0x5eed_1a55)?;
    let (fx, fy) = (rows(x, &fit_idx), fit_idx.iter().map(|&i| y[i]).collect::<Vec<_>>());
    let (vx, vy) = (rows(x, &val_idx), val_idx.iter().map(|&i| y[i]).collect::<Vec<_>>());
    // (has support, accuracy, lambda); the grid ascends, so >= favours larger
    let mut best = (false, f64::NEG_INFINITY, LAMBDA_GRID[0]);
    for (&lambda, fit) in LAMBDA_GRID.iter().zip(lasso_path(&fx, &fy, &LAMBDA_GRID)?) {
        let support = fit.support;
        let acc = if support.is_empty() {
            let majority = fy.iter().filter(|&&b| b).count() * 2 >= fy.len();
            vy.iter().filter(|&&t| t == majority).count() as f64 / vy.len() as f64
        } else {
            let scores = train_predict(
                cfg.classifier,
                cfg,
                &columns(&fx, &support),
                &fy,
                &columns(&vx, &support),
            )?;
            accuracy(&scores, &vy)
        };
        log::debug!("lambda {lambda}: {} features, validation accuracy {acc}", support.len());
        let key = (!support.is_empty(), acc);
        if key >= (best.0, best.1) {
            best = (key.0, key.1, lambda);
        }
    }
    Ok(best.2)
}

/// The lasso at `lambda`, reached along the same warm-started path the
/// penalty search uses.
fn lasso_fit(x: &[Vec<f64>], y: &[bool], lambda: f64) -> Result<LassoFit> {
    let mut path: Vec<f64> = LAMBDA_GRID.iter().copied().filter(|&l| l > lambda).collect();
    path.push(lambda);
    Ok(lasso_path(x, y, &path)?.pop().expect("non-empty path"))
}

pub fn run_experiment(matrix: &FeatureMatrix, cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let mut timings = BTreeMap::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, timings: &mut BTreeMap<String, f64>| {
        timings.insert(name.to_string(), clock.elapsed().as_secs_f64() * 1e3);
        clock = Instant::now();
    };

    let distinct: std::collections::BTreeSet<&str> = matrix.labels.iter().map(String::as_str).collect();
    match distinct.len() {
        0 | 1 => return Err(Error::SingleClass),
        2 => {}
        n => return Err(Error::Shape(format!("expected two labels, found {n}"))),
    }
    if matrix.n_cols() == 0 {
        return Err(Error::Shape("feature matrix has no feature columns".into()));
    }
    let positive = positive_label(&matrix.labels).expect("two labels").to_string();
    let negative = distinct
        .iter()
        .find(|l| **l != positive)
        .expect("two labels")
        .to_string();
    let y: Vec<bool> = matrix.labels.iter().map(|l| *l == positive).collect();

    let (train, test) = split(&matrix.labels, cfg.test_fraction, cfg.seed)?;
    lap("split", &mut timings);

    let z = ZScore::fit(&rows(&matrix.rows, &train));
    let train_x = z.apply(&rows(&matrix.rows, &train));
    let test_x = z.apply(&rows(&matrix.rows, &test));
    let train_y: Vec<bool> = train.iter().map(|&i| y[i]).collect();
    let test_y: Vec<bool> = test.iter().map(|&i| y[i]).collect();
    lap("standardize", &mut timings);

    let all: Vec<usize> = (0..matrix.n_cols()).collect();
    let (support, lambda) = match cfg.selection {
        Selection::None => (all.clone(), None),
        Selection::Lasso => {
            let train_labels: Vec<String> = train.iter().map(|&i| matrix.labels[i].clone()).collect();
            let lambda = match cfg.lambda {
                Some(l) => l,
                None => choose_lambda(&train_x, &train_y, &train_labels, cfg).unwrap_or_else(|e| {
                    log::warn!("lambda search failed ({e}); using {}", LAMBDA_GRID[1]);
                    LAMBDA_GRID[1]
                }),
            };
            let support = lasso_fit(&train_x, &train_y, lambda)?.support;
            if support.is_empty() {
                log::warn!("lasso at lambda {lambda} selected nothing; keeping every feature");
                (all.clone(), Some(lambda))
            } else {
                (support, Some(lambda))
            }
        }
    };
    lap("select", &mut timings);

    let scores = train_predict(
        cfg.classifier,
        cfg,
        &columns(&train_x, &support),
        &train_y,
        &columns(&test_x, &support),
    )?;
    lap("classify", &mut timings);

    let predicted: Vec<bool> = scores.iter().map(|&s| s >= 0.5).collect();
    let report = metrics(&scores, &predicted, &test_y)?;
    lap("metrics", &mut timings);

    Ok(ExperimentOutcome {
        metrics: report,
        positive_label: positive.clone(),
        n_train: train.len(),
        n_test: test.len(),
        n_features: matrix.n_cols(),
        selected_features: support.iter().map(|&c| matrix.columns[c].clone()).collect(),
        lambda,
        predictions: test
            .iter()
            .zip(&scores)
            .zip(&predicted)
            .map(|((&i, &score), &p)| Prediction {
                id: matrix.ids[i].clone(),
                label: matrix.labels[i].clone(),
                score,
                predicted: if p { positive.clone() } else { negative.clone() },
            })
            .collect(),
        timings_ms: timings,
    })
}

/// One line of a results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub method: String,
    pub vectorizer: String,
    pub classifier: String,
    pub metrics: MetricsReport,
}

/// Side-by-side results, one row per run, four decimals.
pub fn format_table(rows: &[TableRow]) -> String {
    let mut out = String::from("| Method | Vectorization | Model | Accuracy | AUC | Recall | Prec. | F1 |\n");
    out.push_str("|---|---|---|---|---|---|---|---|\n");
    for r in rows {
        let m = &r.metrics;
        out.push_str(&format!(
            "| {} | {} | {} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} |\n",
            r.method, r.vectorizer, r.classifier, m.accuracy, m.auc, m.recall, m.precision, m.f1
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy(n: usize, informative: bool) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let labels: Vec<String> = (0..n).map(|i| if i % 2 == 0 { "a" } else { "b" }.to_string()).collect();
        let rows = labels
            .iter()
            .map(|l| {
                let shift = if informative && l == "b" { 3.0 } else { 0.0 };
                vec![rng.gen_range(0.0..1.0) + shift, rng.gen_range(0.0..1.0), 7.0]
            })
            .collect();
        FeatureMatrix {
            ids: (0..n).map(|i| format!("s{i}")).collect(),
            labels,
            columns: vec!["f0".into(), "f1".into(), "f2".into()],
            rows,
        }
    }

    #[test]
    fn separable_data_scores_perfectly() {
        for classifier in [ClassifierKind::Logreg, ClassifierKind::Knn] {
            for selection in [Selection::None, Selection::Lasso] {
                let cfg = ExperimentConfig {
                    classifier,
                    selection,
                    ..Default::default()
                };
                let out = run_experiment(&toy(40, true), &cfg).unwrap();
                assert_eq!(out.metrics.accuracy, 1.0, "{classifier:?} {selection:?}");
                assert_eq!(out.metrics.auc, 1.0);
                assert_eq!(out.n_test, 8);
                assert_eq!(out.positive_label, "b");
                if selection == Selection::Lasso {
                    assert!(out.selected_features.contains(&"f0".to_string()));
                }
            }
        }
    }

    #[test]
    fn reproducible() {
        let cfg = ExperimentConfig {
            selection: Selection::Lasso,
            seed: 3,
            ..Default::default()
        };
        let a = run_experiment(&toy(30, false), &cfg).unwrap();
        let b = run_experiment(&toy(30, false), &cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn single_class_is_an_error() {
        let mut m = toy(10, true);
        m.labels = vec!["a".into(); 10];
        assert!(matches!(
            run_experiment(&m, &ExperimentConfig::default()),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn table_layout() {
        let m = MetricsReport {
            accuracy: 0.925,
            auc: 0.9375,
            recall: 0.925,
            precision: 0.92614,
            f1: 0.925,
        };
        let t = format_table(&[TableRow {
            method: "Feature Concat.".into(),
            vectorizer: "Betti Curve".into(),
            classifier: "LR".into(),
            metrics: m,
        }]);
        assert!(t.contains("| Accuracy | AUC | Recall | Prec. | F1 |"));
        assert!(t.contains("| Feature Concat. | Betti Curve | LR | 0.9250 | 0.9375 | 0.9250 | 0.9261 | 0.9250 |"));
    }
}
