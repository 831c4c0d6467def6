//! Sublevel persistence of a 2D image on its cubical complex.
//!
//! Pixels are vertices; edges join 4-neighbours and squares fill 2x2
//! blocks. Every cell takes the maximum intensity of its vertices, so a
//! cell never enters before its faces. Ties are broken by
//! `(value, dimension, index)`.
//!
//! H0 comes from union-find over edges in ascending order (elder rule).
//! H1 is computed on the dual graph: squares plus one outer cell, joined
//! across each edge, swept in descending order. A dual merge at edge `e`
//! kills the younger dual component, whose oldest square `s` is the square
//! that fills the loop born at `e`, giving the bar `(f(e), f(s))`.

use std::cmp::Ordering;

use super::union_find::UnionFind;
use super::Diagram;
use crate::barcode::{Bar, Barcode};
use crate::imaging::GrayImage;

/// Edge list of the grid: horizontal edges first, then vertical.
pub(crate) struct GridEdges {
    pub ends: Vec<(usize, usize)>,
    pub values: Vec<f64>,
}

pub(crate) fn grid_edges(img: &GrayImage) -> GridEdges {
    let (w, h) = (img.width(), img.height());
    let px = img.pixels();
    let mut ends = Vec::with_capacity(2 * w * h);
    for y in 0..h {
        for x in 0..w.saturating_sub(1) {
            ends.push((y * w + x, y * w + x + 1));
        }
    }
    for y in 0..h.saturating_sub(1) {
        for x in 0..w {
            ends.push((y * w + x, (y + 1) * w + x));
        }
    }
    let values = ends.iter().map(|&(a, b)| px[a].max(px[b])).collect();
    GridEdges { ends, values }
}

pub(crate) fn square_values(img: &GrayImage) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let mut out = Vec::with_capacity(w.saturating_sub(1) * h.saturating_sub(1));
    for y in 0..h.saturating_sub(1) {
        for x in 0..w - 1 {
            let v = img
                .get(x, y)
                .max(img.get(x + 1, y))
                .max(img.get(x, y + 1))
                .max(img.get(x + 1, y + 1));
            out.push(v);
        }
    }
    out
}

#[inline]
fn key_cmp(values: &[f64], a: usize, b: usize) -> Ordering {
    values[a].total_cmp(&values[b]).then(a.cmp(&b))
}

pub fn cubical_persistence(img: &GrayImage) -> Diagram {
    let (lo, hi) = img.min_max();
    let edges = grid_edges(img);
    let mut order: Vec<usize> = (0..edges.ends.len()).collect();
    order.sort_unstable_by(|&a, &b| key_cmp(&edges.values, a, b));

    Diagram {
        dim0: h0(img, &edges, &order, lo, hi),
        dim1: h1(img, &edges, &order),
    }
}

fn h0(img: &GrayImage, edges: &GridEdges, order: &[usize], lo: f64, hi: f64) -> Barcode {
    let px = img.pixels();
    let n = px.len();
    let mut uf = UnionFind::new(n);
    // oldest vertex of each component, stored at its root
    let mut oldest: Vec<usize> = (0..n).collect();
    let mut bars = Barcode::new(0);
    for &e in order {
        let (u, v) = edges.ends[e];
        let (ru, rv) = (uf.find(u), uf.find(v));
        if ru == rv {
            continue;
        }
        let (ou, ov) = (oldest[ru], oldest[rv]);
        let (elder, younger) = if key_cmp(px, ou, ov) == Ordering::Less {
            (ou, ov)
        } else {
            (ov, ou)
        };
        let death = edges.values[e];
        if death > px[younger] {
            bars.push(Bar {
                birth: px[younger],
                death,
                essential: false,
            });
        }
        let root = uf.link(ru, rv);
        oldest[root] = elder;
    }
    // a full grid is connected: exactly one essential class
    bars.push(Bar {
        birth: lo,
        death: hi,
        essential: true,
    });
    bars
}

fn h1(img: &GrayImage, edges: &GridEdges, order: &[usize]) -> Barcode {
    let (w, h) = (img.width(), img.height());
    let mut bars = Barcode::new(1);
    if w < 2 || h < 2 {
        return bars;
    }
    let sq = square_values(img);
    let sw = w - 1;
    let outer = sq.len();
    let n_h = h * (w - 1);
    let dual_ends = |e: usize| -> (usize, usize) {
        if e < n_h {
            let (y, x) = (e / (w - 1), e % (w - 1));
            let above = if y > 0 { (y - 1) * sw + x } else { outer };
            let below = if y + 1 < h { y * sw + x } else { outer };
            (above, below)
        } else {
            let e = e - n_h;
            let (y, x) = (e / w, e % w);
            let left = if x > 0 { y * sw + x - 1 } else { outer };
            let right = if x + 1 < w { y * sw + x } else { outer };
            (left, right)
        }
    };
    // dual age: the outer cell is oldest, then squares by descending key
    let older = |a: usize, b: usize| -> bool {
        if a == outer {
            return true;
        }
        if b == outer {
            return false;
        }
        key_cmp(&sq, a, b) == Ordering::Greater
    };

    let mut uf = UnionFind::new(outer + 1);
    let mut oldest: Vec<usize> = (0..=outer).collect();
    for &e in order.iter().rev() {
        let (a, b) = dual_ends(e);
        let (ra, rb) = (uf.find(a), uf.find(b));
        if ra == rb {
            continue;
        }
        let (oa, ob) = (oldest[ra], oldest[rb]);
        let (elder, younger) = if older(oa, ob) { (oa, ob) } else { (ob, oa) };
        let birth = edges.values[e];
        let death = sq[younger];
        if death > birth {
            bars.push(Bar {
                birth,
                death,
                essential: false,
            });
        }
        let root = uf.link(ra, rb);
        oldest[root] = elder;
    }
    bars
}
