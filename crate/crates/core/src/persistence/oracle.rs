//! Brute-force references for the persistence engines, plus the
//! randomized equivalence trials behind `phfeat oracle`.
//!
//! Nothing here shares code with the engines: Betti numbers come from
//! Euler characteristics of explicit sublevel complexes, H0 deaths from a
//! relabelling Kruskal, and full barcodes from the textbook column
//! reduction of an explicit boundary matrix.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Diagram, MaxScale};
use crate::barcode::{Bar, Barcode};
use crate::imaging::GrayImage;
use crate::ulbp::PointCloud;

/// `(β0, β1)` of the sublevel cubical complex `{cells with value <= t}`.
pub fn oracle_betti_cubical(img: &GrayImage, t: f64) -> (usize, usize) {
    let (w, h) = (img.width(), img.height());
    let on = |x: usize, y: usize| img.get(x, y) <= t;
    let mut label: Vec<Option<usize>> = vec![None; w * h];
    let mut v = 0i64;
    let mut e = 0i64;
    let mut f = 0i64;
    let mut components = 0usize;
    // flood fill over active vertices along active edges
    for y0 in 0..h {
        for x0 in 0..w {
            if !on(x0, y0) {
                continue;
            }
            v += 1;
            if label[y0 * w + x0].is_some() {
                continue;
            }
            components += 1;
            let mut stack = vec![(x0, y0)];
            label[y0 * w + x0] = Some(components);
            while let Some((x, y)) = stack.pop() {
                let mut nbrs = Vec::with_capacity(4);
                if x > 0 {
                    nbrs.push((x - 1, y));
                }
                if x + 1 < w {
                    nbrs.push((x + 1, y));
                }
                if y > 0 {
                    nbrs.push((x, y - 1));
                }
                if y + 1 < h {
                    nbrs.push((x, y + 1));
                }
                for (nx, ny) in nbrs {
                    if on(nx, ny) && label[ny * w + nx].is_none() {
                        label[ny * w + nx] = Some(components);
                        stack.push((nx, ny));
                    }
                }
            }
        }
    }
    for y in 0..h {
        for x in 0..w {
            if x + 1 < w && on(x, y) && on(x + 1, y) {
                e += 1;
            }
            if y + 1 < h && on(x, y) && on(x, y + 1) {
                e += 1;
            }
            if x + 1 < w && y + 1 < h && on(x, y) && on(x + 1, y) && on(x, y + 1) && on(x + 1, y + 1) {
                f += 1;
            }
        }
    }
    let euler = v - e + f;
    let b1 = components as i64 - euler;
    debug_assert!(b1 >= 0);
    (components, b1 as usize)
}

/// Minimum-spanning-tree edge lengths by Kruskal with component relabelling,
/// ascending. Zero lengths are kept.
pub fn oracle_rips_h0(cloud: &PointCloud) -> Vec<f64> {
    let p = &cloud.points;
    let n = p.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((((p[i].0 - p[j].0).powi(2) + (p[i].1 - p[j].1).powi(2)).sqrt(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut comp: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    for (d, i, j) in pairs {
        let (ci, cj) = (comp[i], comp[j]);
        if ci != cj {
            for c in comp.iter_mut() {
                if *c == cj {
                    *c = ci;
                }
            }
            out.push(d);
        }
    }
    out
}

/// One cell of an explicit filtered complex.
#[derive(Debug, Clone)]
pub struct Cell {
    pub dim: u8,
    pub value: f64,
    /// Indices of codimension-1 faces in the input list.
    pub faces: Vec<usize>,
}

/// Standard left-to-right Z/2 column reduction. Cells are sorted by
/// `(value, dim, input index)`; returns bars for dims 0 and 1 with
/// zero-length pairs dropped and unpaired cells capped at `cap`.
pub fn reduce_complex(cells: &[Cell], cap: f64) -> Diagram {
    let m = cells.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        cells[a]
            .value
            .total_cmp(&cells[b].value)
            .then(cells[a].dim.cmp(&cells[b].dim))
            .then(a.cmp(&b))
    });
    let mut pos = vec![0; m];
    for (p, &c) in order.iter().enumerate() {
        pos[c] = p;
    }
    // columns as dense bit rows, fine at oracle scale
    let mut cols: Vec<Vec<bool>> = order
        .iter()
        .map(|&c| {
            let mut col = vec![false; m];
            for &f in &cells[c].faces {
                col[pos[f]] ^= true;
            }
            col
        })
        .collect();
    let low = |col: &Vec<bool>| col.iter().rposition(|&b| b);
    let mut owner_of_low: Vec<Option<usize>> = vec![None; m];
    let mut paired = vec![false; m];
    let mut out = Diagram::empty();
    for j in 0..m {
        while let Some(l) = low(&cols[j]) {
            match owner_of_low[l] {
                Some(k) => {
                    let other = cols[k].clone();
                    for (a, b) in cols[j].iter_mut().zip(other) {
                        *a ^= b;
                    }
                }
                None => break,
            }
        }
        if let Some(l) = low(&cols[j]) {
            owner_of_low[l] = Some(j);
            paired[l] = true;
            paired[j] = true;
            let birth = &cells[order[l]];
            let death = cells[order[j]].value;
            if death > birth.value && birth.dim <= 1 {
                let bar = Bar {
                    birth: birth.value,
                    death,
                    essential: false,
                };
                push(&mut out, birth.dim, bar);
            }
        }
    }
    for p in 0..m {
        let c = &cells[order[p]];
        if !paired[p] && c.dim <= 1 {
            push(
                &mut out,
                c.dim,
                Bar {
                    birth: c.value,
                    death: cap,
                    essential: true,
                },
            );
        }
    }
    out
}

fn push(d: &mut Diagram, dim: u8, bar: Bar) {
    match dim {
        0 => d.dim0.push(bar),
        _ => d.dim1.push(bar),
    }
}

/// Explicit cubical complex of an image (vertices, edges, squares).
pub fn cubical_cells(img: &GrayImage) -> Vec<Cell> {
    let (w, h) = (img.width(), img.height());
    let mut cells: Vec<Cell> = img
        .pixels()
        .iter()
        .map(|&v| Cell {
            dim: 0,
            value: v,
            faces: vec![],
        })
        .collect();
    let mut hedge = vec![usize::MAX; w * h];
    let mut vedge = vec![usize::MAX; w * h];
    for y in 0..h {
        for x in 0..w {
            let a = y * w + x;
            if x + 1 < w {
                hedge[a] = cells.len();
                cells.push(Cell {
                    dim: 1,
                    value: img.get(x, y).max(img.get(x + 1, y)),
                    faces: vec![a, a + 1],
                });
            }
            if y + 1 < h {
                vedge[a] = cells.len();
                cells.push(Cell {
                    dim: 1,
                    value: img.get(x, y).max(img.get(x, y + 1)),
                    faces: vec![a, a + w],
                });
            }
        }
    }
    for y in 0..h.saturating_sub(1) {
        for x in 0..w.saturating_sub(1) {
            let a = y * w + x;
            let faces = vec![hedge[a], hedge[a + w], vedge[a], vedge[a + 1]];
            let value = faces.iter().map(|&f| cells[f].value).fold(f64::NEG_INFINITY, f64::max);
            cells.push(Cell { dim: 2, value, faces });
        }
    }
    cells
}

/// Full flag complex up to triangles, restricted to `max_scale`.
pub fn rips_cells(cloud: &PointCloud, max_scale: MaxScale) -> (Vec<Cell>, f64) {
    let p = &cloud.points;
    let n = p.len();
    let d = |i: usize, j: usize| (p[i].0 - p[j].0).hypot(p[i].1 - p[j].1);
    let mut all = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            all = all.max(d(i, j));
        }
    }
    let cap = match max_scale {
        MaxScale::Auto => all,
        MaxScale::Fixed(v) => v,
    };
    let mut cells: Vec<Cell> = (0..n)
        .map(|_| Cell {
            dim: 0,
            value: 0.0,
            faces: vec![],
        })
        .collect();
    let mut edge_at = vec![usize::MAX; n * n];
    for i in 0..n {
        for j in i + 1..n {
            if d(i, j) <= cap {
                edge_at[i * n + j] = cells.len();
                cells.push(Cell {
                    dim: 1,
                    value: d(i, j),
                    faces: vec![i, j],
                });
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let es = [edge_at[i * n + j], edge_at[i * n + k], edge_at[j * n + k]];
                if es.iter().all(|&e| e != usize::MAX) {
                    let value = es.iter().map(|&e| cells[e].value).fold(0.0, f64::max);
                    cells.push(Cell {
                        dim: 2,
                        value,
                        faces: es.to_vec(),
                    });
                }
            }
        }
    }
    (cells, cap)
}

pub fn cubical_reference(img: &GrayImage) -> Diagram {
    let (_, hi) = img.min_max();
    reduce_complex(&cubical_cells(img), hi)
}

pub fn rips_reference(cloud: &PointCloud, max_scale: MaxScale) -> Diagram {
    if cloud.is_empty() {
        return Diagram::empty();
    }
    let (cells, cap) = rips_cells(cloud, max_scale);
    reduce_complex(&cells, cap)
}

/// Bars as sortable triples for multiset comparison.
pub fn sorted_bars(b: &Barcode) -> Vec<(f64, f64, bool)> {
    let mut v: Vec<_> = b.iter().map(|b| (b.birth, b.death, b.essential)).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
    v
}

// --- randomized trials ---------------------------------------------------------

/// A failed trial; `seed` regenerates the offending instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub trial: usize,
    pub seed: u64,
    pub detail: String,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "trial {} (instance seed {}): {}", self.trial, self.seed, self.detail)
    }
}

/// Seed of trial `i` in a run started with `seed`.
pub fn trial_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(i as u64)
}

/// Random image of at most 8x8 with integer intensities `0..=7`.
pub fn random_small_image(seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = rng.gen_range(1..=8);
    let h = rng.gen_range(1..=8);
    let px = (0..w * h).map(|_| rng.gen_range(0..=7) as f64).collect();
    GrayImage::new(w, h, px).expect("valid dimensions")
}

/// Random cloud of 2..=8 points in `[0, 10]^2`. Odd seeds snap to the
/// integer lattice so that distance ties occur.
pub fn random_small_cloud(seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=8);
    let lattice = seed % 2 == 1;
    let pts = (0..n)
        .map(|_| {
            if lattice {
                (rng.gen_range(0..=10) as f64, rng.gen_range(0..=10) as f64)
            } else {
                (rng.gen_range(0.0..=10.0), rng.gen_range(0.0..=10.0))
            }
        })
        .collect();
    PointCloud::new(pts)
}

/// Compares engine Betti counts with [`oracle_betti_cubical`] at every
/// threshold `0..=7`. Returns the number of trials run.
pub fn check_cubical<F>(trials: usize, seed: u64, engine: F) -> Result<usize, Mismatch>
where
    F: Fn(&GrayImage) -> Diagram,
{
    for i in 0..trials {
        let s = trial_seed(seed, i);
        let img = random_small_image(s);
        let d = engine(&img);
        for t in 0..=7 {
            let t = t as f64;
            let (b0, b1) = oracle_betti_cubical(&img, t);
            let got = (d.betti_at(0, t), d.betti_at(1, t));
            if got != (b0, b1) {
                return Err(Mismatch {
                    trial: i,
                    seed: s,
                    detail: format!(
                        "{}x{} image {:?} at t={t}: engine betti {got:?}, oracle {:?}",
                        img.width(),
                        img.height(),
                        img.pixels(),
                        (b0, b1)
                    ),
                });
            }
        }
    }
    Ok(trials)
}

/// Compares engine H0 deaths with [`oracle_rips_h0`] (within `1e-9`) and
/// H1 bars with [`rips_reference`] (exactly).
pub fn check_rips<F>(trials: usize, seed: u64, engine: F) -> Result<usize, Mismatch>
where
    F: Fn(&PointCloud, MaxScale) -> Diagram,
{
    for i in 0..trials {
        let s = trial_seed(seed, i);
        let cloud = random_small_cloud(s);
        let d = engine(&cloud, MaxScale::Auto);
        let fail = |detail: String| Mismatch {
            trial: i,
            seed: s,
            detail: format!("cloud {:?}: {detail}", cloud.points),
        };

        let mut got: Vec<f64> = d.dim0.iter().filter(|b| !b.essential).map(|b| b.death).collect();
        got.sort_by(f64::total_cmp);
        let want: Vec<f64> = oracle_rips_h0(&cloud).into_iter().filter(|&x| x > 0.0).collect();
        if got.len() != want.len() || got.iter().zip(&want).any(|(a, b)| (a - b).abs() > 1e-9) {
            return Err(fail(format!("H0 deaths {got:?} vs oracle {want:?}")));
        }
        if d.dim0.iter().filter(|b| b.essential).count() != 1 {
            return Err(fail("expected exactly one essential H0 bar".into()));
        }

        let reference = rips_reference(&cloud, MaxScale::Auto);
        let (a, b) = (sorted_bars(&d.dim1), sorted_bars(&reference.dim1));
        if a != b {
            return Err(fail(format!("H1 {a:?} vs reference {b:?}")));
        }
    }
    Ok(trials)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persistence::{cubical_persistence, rips_persistence};

    fn ring() -> GrayImage {
        GrayImage::new(3, 3, vec![1.0, 1.0, 1.0, 1.0, 9.0, 1.0, 1.0, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn betti_examples() {
        assert_eq!(
            oracle_betti_cubical(&GrayImage::filled(3, 3, 0.0).unwrap(), 0.0),
            (1, 0)
        );
        assert_eq!(oracle_betti_cubical(&ring(), 1.0), (1, 1));
        assert_eq!(oracle_betti_cubical(&ring(), 9.0), (1, 0));
        assert_eq!(oracle_betti_cubical(&ring(), 0.0), (0, 0));
    }

    #[test]
    fn kruskal_examples() {
        let line = PointCloud::new(vec![(0.0, 0.0), (1.0, 0.0), (3.0, 0.0)]);
        assert_eq!(oracle_rips_h0(&line), vec![1.0, 2.0]);
        let sq = PointCloud::new(vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        assert_eq!(oracle_rips_h0(&sq), vec![1.0, 1.0, 1.0]);
        let dup = PointCloud::new(vec![(4.0, 4.0); 5]);
        assert_eq!(oracle_rips_h0(&dup), vec![0.0; 4]);
    }

    #[test]
    fn reference_matches_worked_examples() {
        let d = cubical_reference(&ring());
        assert_eq!(sorted_bars(&d.dim1), vec![(1.0, 9.0, false)]);
        assert_eq!(sorted_bars(&d.dim0), vec![(1.0, 9.0, true)]);
        let sq = PointCloud::new(vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let d = rips_reference(&sq, MaxScale::Auto);
        assert_eq!(sorted_bars(&d.dim1), vec![(1.0, 2f64.sqrt(), false)]);
    }

    #[test]
    fn cubical_engine_matches_full_reduction() {
        for i in 0..300 {
            let img = random_small_image(trial_seed(7, i));
            let (e, r) = (cubical_persistence(&img), cubical_reference(&img));
            assert_eq!(sorted_bars(&e.dim0), sorted_bars(&r.dim0), "{:?}", img);
            assert_eq!(sorted_bars(&e.dim1), sorted_bars(&r.dim1), "{:?}", img);
        }
    }

    #[test]
    fn rips_engine_matches_full_reduction_with_truncation() {
        for i in 0..200 {
            let cloud = random_small_cloud(trial_seed(11, i));
            let scale = MaxScale::Fixed(4.0);
            let (e, r) = (rips_persistence(&cloud, scale), rips_reference(&cloud, scale));
            assert_eq!(sorted_bars(&e.dim0), sorted_bars(&r.dim0), "{:?}", cloud);
            assert_eq!(sorted_bars(&e.dim1), sorted_bars(&r.dim1), "{:?}", cloud);
        }
    }

    #[test]
    fn trials_pass_and_detect_mutations() {
        assert_eq!(check_cubical(50, 1, cubical_persistence), Ok(50));
        assert_eq!(check_rips(50, 1, rips_persistence), Ok(50));

        // every finite death one unit late
        let late = |img: &GrayImage| {
            let mut d = cubical_persistence(img);
            d.dim1 = Barcode::from_bars(
                1,
                d.dim1
                    .iter()
                    .map(|b| Bar {
                        death: b.death + 1.0,
                        ..*b
                    })
                    .collect(),
            );
            d
        };
        assert!(check_cubical(200, 1, late).is_err());
        let dropped = |c: &PointCloud, s: MaxScale| {
            let mut d = rips_persistence(c, s);
            let mut bars = d.dim1.bars().to_vec();
            bars.pop();
            d.dim1 = Barcode::from_bars(1, bars);
            d
        };
        let err = check_rips(100, 1, dropped).unwrap_err();
        assert_eq!(
            random_small_cloud(err.seed),
            random_small_cloud(trial_seed(1, err.trial))
        );
    }
}
