use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stratified train/test split over row labels.
///
/// Each class contributes `round(n * test_fraction)` rows to the test set,
/// clamped to `1..=n-1`. Classes are visited in label order and shuffled
/// with one seeded stream. Returned indices are ascending.
pub fn split(labels: &[String], test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_class.entry(l.as_str()).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (label, mut rows) in by_class {
        let n = rows.len();
        if n < 2 {
            return Err(Error::Stratification(format!(
                "class {label:?} has {n} subject(s); at least 2 are needed"
            )));
        }
        rows.shuffle(&mut rng);
        let k = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
        test.extend_from_slice(&rows[..k]);
        train.extend_from_slice(&rows[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Column-wise standardization parameters fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZScore {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl ZScore {
    /// Population statistics; a constant column gets std 1.
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let p = rows.first().map_or(0, Vec::len);
        let n = rows.len().max(1) as f64;
        let mut means = vec![0.0; p];
        for r in rows {
            for (m, x) in means.iter_mut().zip(r) {
                *m += x;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut stds = vec![0.0; p];
        for r in rows {
            for ((s, x), m) in stds.iter_mut().zip(r).zip(&means) {
                *s += (x - m).powi(2);
            }
        }
        for (j, s) in stds.iter_mut().enumerate() {
            *s = (*s / n).sqrt();
            // the rounded mean of equal values need not equal them
            let constant = rows.iter().all(|r| r[j] == rows[0][j]);
            if constant {
                means[j] = rows[0][j];
            }
            if constant || *s == 0.0 || !s.is_finite() {
                *s = 1.0;
            }
        }
        ZScore { means, stds }
    }

    pub fn apply(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter()
            .map(|r| {
                r.iter()
                    .zip(self.means.iter().zip(&self.stds))
                    .map(|(x, (m, s))| (x - m) / s)
                    .collect()
            })
            .collect()
    }
}
