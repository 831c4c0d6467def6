//! Barcode featurizations: Betti curve, persistent statistics, entropy
//! summary, persistence landscapes and tropical coordinates.
//!
//! Curve-valued methods sample on a [`SamplingGrid`] supplied by the caller
//! so vectors from different barcodes line up. Aliveness is half-open,
//! `birth <= t < death`; logarithms are natural.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::barcode::{Barcode, Range};
use crate::error::{Error, Result};

pub const DEFAULT_GAMMA: usize = 100;
pub const DEFAULT_LEVELS: usize = 5;
pub const DEFAULT_TROPICAL_R: u32 = 1;
pub const STATISTICS_LEN: usize = 38;
pub const TROPICAL_LEN: usize = 7;

/// `count` evenly spaced samples from `t_min` to `t_max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingGrid {
    pub range: Range,
    pub count: usize,
}

impl SamplingGrid {
    pub fn new(range: Range, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidArgument(format!(
                "sampling grid needs at least 2 points, got {count}"
            )));
        }
        Ok(SamplingGrid { range, count })
    }

    pub fn samples(&self) -> impl Iterator<Item = f64> + '_ {
        let Range { t_min, t_max } = self.range;
        let step = (t_max - t_min) / (self.count - 1) as f64;
        (0..self.count).map(move |j| {
            if j + 1 == self.count {
                t_max
            } else {
                t_min + step * j as f64
            }
        })
    }
}

/// Values with one stable label each.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub labels: Vec<String>,
}

impl FeatureVector {
    /// Labels `d{dim}_{method}_{index:03}`.
    pub fn labelled(dim: u8, method: Method, values: Vec<f64>) -> Self {
        let labels = (0..values.len()).map(|i| feature_label(dim, method, i)).collect();
        FeatureVector { values, labels }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn extend(&mut self, other: FeatureVector) {
        self.values.extend(other.values);
        self.labels.extend(other.labels);
    }
}

pub fn feature_label(dim: u8, method: Method, index: usize) -> String {
    format!("d{dim}_{}_{index:03}", method.code())
}

/// The five featurizations, by their two-letter label codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bc,
    Ps,
    Es,
    Pl,
    Tc,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Bc, Method::Ps, Method::Es, Method::Pl, Method::Tc];

    pub fn code(self) -> &'static str {
        match self {
            Method::Bc => "bc",
            Method::Ps => "ps",
            Method::Es => "es",
            Method::Pl => "pl",
            Method::Tc => "tc",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Bc => "Betti Curve",
            Method::Ps => "Pers. Statistics",
            Method::Es => "Entropy Summary",
            Method::Pl => "Pers. Landscape",
            Method::Tc => "Pers. Tropical Coord.",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.code() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown vectorizer {s:?}")))
    }
}

/// A method together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VectorizerConfig {
    pub method: Method,
    pub gamma: usize,
    pub levels: usize,
    pub r: u32,
}

impl VectorizerConfig {
    pub fn new(method: Method) -> Self {
        VectorizerConfig {
            method,
            gamma: DEFAULT_GAMMA,
            levels: DEFAULT_LEVELS,
            r: DEFAULT_TROPICAL_R,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma < 2 {
            return Err(Error::InvalidArgument(format!(
                "gamma must be >= 2, got {}",
                self.gamma
            )));
        }
        if self.levels < 1 {
            return Err(Error::InvalidArgument("landscape levels must be >= 1".into()));
        }
        if self.r < 1 {
            return Err(Error::InvalidArgument("tropical r must be >= 1".into()));
        }
        Ok(())
    }

    /// Length of the vector for one barcode.
    pub fn output_len(&self) -> usize {
        match self.method {
            Method::Bc | Method::Es => self.gamma,
            Method::Ps => STATISTICS_LEN,
            Method::Pl => self.levels * self.gamma,
            Method::Tc => TROPICAL_LEN,
        }
    }

    pub fn uses_grid(&self) -> bool {
        matches!(self.method, Method::Bc | Method::Es | Method::Pl)
    }

    /// Vectorizes `barcode`; `range` is ignored by grid-free methods.
    pub fn apply(&self, barcode: &Barcode, range: Range) -> Result<FeatureVector> {
        let grid = || SamplingGrid::new(range, self.gamma);
        Ok(match self.method {
            Method::Bc => betti_curve(barcode, &grid()?),
            Method::Ps => persistent_statistics(barcode),
            Method::Es => entropy_summary(barcode, &grid()?),
            Method::Pl => landscape(
                barcode,
                &LandscapeConfig {
                    levels: self.levels,
                    grid: grid()?,
                },
            ),
            Method::Tc => tropical_coordinates(barcode, TropicalConfig { r: self.r }),
        })
    }
}

/// Number of bars alive at each grid sample.
pub fn betti_curve(b: &Barcode, grid: &SamplingGrid) -> FeatureVector {
    let values = grid.samples().map(|t| b.count_alive(t) as f64).collect();
    FeatureVector::labelled(b.dim(), Method::Bc, values)
}

/// Linear interpolation between closest ranks on sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

fn series_stats(mut xs: Vec<f64>) -> [f64; 9] {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    xs.sort_by(f64::total_cmp);
    let p = |q| percentile(&xs, q);
    [
        mean,
        var.sqrt(),
        p(0.5),
        p(0.75) - p(0.25),
        xs[xs.len() - 1] - xs[0],
        p(0.10),
        p(0.25),
        p(0.75),
        p(0.90),
    ]
}

/// Shannon entropy of normalized lifespans; 0 when the total is 0.
pub fn persistent_entropy(b: &Barcode) -> f64 {
    let total: f64 = b.iter().map(|x| x.lifespan()).sum();
    if total <= 0.0 {
        return 0.0;
    }
    -b.iter()
        .map(|x| x.lifespan() / total)
        .filter(|&p| p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>()
}

/// Nine statistics (mean, population std, median, IQR, range, p10, p25,
/// p75, p90) of births, deaths, midpoints and lifespans, then bar count and
/// persistent entropy: 38 values. Empty barcodes give zeros.
pub fn persistent_statistics(b: &Barcode) -> FeatureVector {
    let mut values = Vec::with_capacity(STATISTICS_LEN);
    if b.is_empty() {
        values.resize(STATISTICS_LEN, 0.0);
    } else {
        let series: [Vec<f64>; 4] = [
            b.iter().map(|x| x.birth).collect(),
            b.iter().map(|x| x.death).collect(),
            b.iter().map(|x| x.midpoint()).collect(),
            b.iter().map(|x| x.lifespan()).collect(),
        ];
        for s in series {
            values.extend(series_stats(s));
        }
        values.push(b.len() as f64);
        values.push(persistent_entropy(b));
    }
    FeatureVector::labelled(b.dim(), Method::Ps, values)
}

/// Entropy summary function sampled on the grid.
pub fn entropy_summary(b: &Barcode, grid: &SamplingGrid) -> FeatureVector {
    let total: f64 = b.iter().map(|x| x.lifespan()).sum();
    let values = grid
        .samples()
        .map(|t| {
            if total <= 0.0 {
                return 0.0;
            }
            -b.iter()
                .filter(|x| x.alive_at(t))
                .map(|x| x.lifespan() / total)
                .filter(|&p| p > 0.0)
                .map(|p| p * p.ln())
                .sum::<f64>()
        })
        .map(|v| if v == 0.0 { 0.0 } else { v })
        .collect();
    FeatureVector::labelled(b.dim(), Method::Es, values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapeConfig {
    pub levels: usize,
    pub grid: SamplingGrid,
}

/// Landscape levels `1..=levels`, level-major. Level `i` at `t` is the
/// `i`-th largest tent value `max(0, min(t - birth, death - t))`.
pub fn landscape(b: &Barcode, cfg: &LandscapeConfig) -> FeatureVector {
    let k = cfg.levels;
    let samples: Vec<f64> = cfg.grid.samples().collect();
    let mut values = vec![0.0; k * samples.len()];
    let mut tents = Vec::with_capacity(b.len());
    for (j, &t) in samples.iter().enumerate() {
        tents.clear();
        tents.extend(b.iter().map(|x| (t - x.birth).min(x.death - t)).filter(|&v| v > 0.0));
        tents.sort_unstable_by(|a, b| b.total_cmp(a));
        for (i, &v) in tents.iter().take(k).enumerate() {
            values[i * samples.len() + j] = v;
        }
    }
    FeatureVector::labelled(b.dim(), Method::Pl, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TropicalConfig {
    pub r: u32,
}

/// The seven tropical coordinates with `λ = death - birth`. F2..F4 take the
/// best available sum when fewer bars exist (missing bars count as 0).
pub fn tropical_coordinates(b: &Barcode, cfg: TropicalConfig) -> FeatureVector {
    let r = f64::from(cfg.r);
    let mut lambdas: Vec<f64> = b.iter().map(|x| x.lifespan()).collect();
    lambdas.sort_unstable_by(|a, b| b.total_cmp(a));
    let top = |k: usize| lambdas.iter().take(k).sum::<f64>();
    let shifted: Vec<f64> = b.iter().map(|x| (r * x.lifespan()).min(x.birth)).collect();
    let f6: f64 = shifted.iter().sum();
    let with_len: Vec<f64> = shifted.iter().zip(b.iter()).map(|(s, x)| s + x.lifespan()).collect();
    let peak = with_len.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let f7: f64 = with_len.iter().map(|v| peak - v).sum();
    let values = vec![
        lambdas.first().copied().unwrap_or(0.0),
        top(2),
        top(3),
        top(4),
        lambdas.iter().sum(),
        f6,
        f7,
    ];
    FeatureVector::labelled(b.dim(), Method::Tc, values)
}
