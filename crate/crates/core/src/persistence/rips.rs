//! Vietoris–Rips persistence of a planar point cloud.
//!
//! H0 is Kruskal's algorithm over edges sorted by `(length, i, j)`. H1 is a
//! Z/2 cohomology reduction over edges in descending filtration order with
//! triangle coboundaries enumerated on the fly. Edges that killed an H0
//! class are cleared up front. Reduction columns store only the edges that
//! were added, and coboundaries are regenerated into a heap when needed.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::union_find::UnionFind;
use super::Diagram;
use crate::barcode::{Bar, Barcode};
use crate::ulbp::PointCloud;

/// Upper end of the Rips filtration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaxScale {
    /// The largest pairwise distance; every 1-cycle is then filled.
    Auto,
    Fixed(f64),
}

impl MaxScale {
    pub fn resolve(self, dist: &DistanceMatrix) -> f64 {
        match self {
            MaxScale::Auto => dist.max(),
            MaxScale::Fixed(v) => v.max(0.0),
        }
    }
}

/// Dense symmetric Euclidean distances.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_points(points: &[(f64, f64)]) -> Self {
        let n = points.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let (dx, dy) = (points[i].0 - points[j].0, points[i].1 - points[j].1);
                let v = dx.hypot(dy);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        DistanceMatrix { n, d }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn max(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }
}

/// Triangle ordered by diameter, then vertex triple. Distances are
/// non-negative, so the IEEE bit pattern orders like the value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Triangle {
    diam_bits: u64,
    verts: [u32; 3],
}

impl Triangle {
    fn diameter(&self) -> f64 {
        f64::from_bits(self.diam_bits)
    }
}

struct Edge {
    len: f64,
    i: u32,
    j: u32,
}

pub fn rips_persistence(cloud: &PointCloud, max_scale: MaxScale) -> Diagram {
    let n = cloud.len();
    if n == 0 {
        return Diagram::empty();
    }
    let dist = DistanceMatrix::from_points(&cloud.points);
    let cap = max_scale.resolve(&dist);

    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let len = dist.get(i, j);
            if len <= cap {
                edges.push(Edge {
                    len,
                    i: i as u32,
                    j: j as u32,
                });
            }
        }
    }
    edges.sort_unstable_by(|a, b| a.len.total_cmp(&b.len).then(a.i.cmp(&b.i)).then(a.j.cmp(&b.j)));

    let mut dim0 = Barcode::new(0);
    let mut uf = UnionFind::new(n);
    // all vertices are born at 0; the lower index is the elder
    let mut cleared = vec![false; edges.len()];
    for (rank, e) in edges.iter().enumerate() {
        let (a, b) = (uf.find(e.i as usize), uf.find(e.j as usize));
        if a == b {
            continue;
        }
        uf.link(a, b);
        cleared[rank] = true;
        if e.len > 0.0 {
            dim0.push(Bar {
                birth: 0.0,
                death: e.len,
                essential: false,
            });
        }
    }
    for v in 0..n {
        if uf.find(v) == v {
            dim0.push(Bar {
                birth: 0.0,
                death: cap,
                essential: true,
            });
        }
    }

    let dim1 = h1_cohomology(&dist, &edges, &cleared, cap);
    Diagram { dim0, dim1 }
}

fn h1_cohomology(dist: &DistanceMatrix, edges: &[Edge], cleared: &[bool], cap: f64) -> Barcode {
    let n = dist.len();
    let mut bars = Barcode::new(1);

    let push_coboundary = |heap: &mut BinaryHeap<Reverse<Triangle>>, e: &Edge| {
        let (i, j) = (e.i as usize, e.j as usize);
        for k in 0..n {
            if k == i || k == j {
                continue;
            }
            let (dik, djk) = (dist.get(i, k), dist.get(j, k));
            if dik > cap || djk > cap {
                continue;
            }
            let mut verts = [e.i, e.j, k as u32];
            verts.sort_unstable();
            heap.push(Reverse(Triangle {
                diam_bits: e.len.max(dik).max(djk).to_bits(),
                verts,
            }));
        }
    };

    let mut pivot_owner: HashMap<Triangle, usize> = HashMap::new();
    let mut reduction: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut heap = BinaryHeap::new();

    for col in (0..edges.len()).rev() {
        if cleared[col] {
            continue;
        }
        heap.clear();
        push_coboundary(&mut heap, &edges[col]);
        let mut added: Vec<usize> = vec![col];
        loop {
            match pivot(&mut heap) {
                None => {
                    bars.push(Bar {
                        birth: edges[col].len,
                        death: cap,
                        essential: true,
                    });
                    break;
                }
                Some(t) => match pivot_owner.get(&t) {
                    Some(&other) => {
                        for &f in &reduction[&other] {
                            push_coboundary(&mut heap, &edges[f]);
                            added.push(f);
                        }
                    }
                    None => {
                        pivot_owner.insert(t, col);
                        reduction.insert(col, mod_two(added));
                        let death = t.diameter();
                        if death > edges[col].len {
                            bars.push(Bar {
                                birth: edges[col].len,
                                death,
                                essential: false,
                            });
                        }
                        break;
                    }
                },
            }
        }
    }
    bars
}

/// Smallest entry with odd multiplicity, left on top of the heap.
fn pivot(heap: &mut BinaryHeap<Reverse<Triangle>>) -> Option<Triangle> {
    while let Some(Reverse(t)) = heap.pop() {
        match heap.peek() {
            Some(Reverse(next)) if *next == t => {
                heap.pop();
            }
            _ => {
                heap.push(Reverse(t));
                return Some(t);
            }
        }
    }
    None
}

fn mod_two(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    let mut out = Vec::with_capacity(v.len());
    for x in v {
        if out.last() == Some(&x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}
