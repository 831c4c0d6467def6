//! 3x3 local binary patterns, the uniform-pattern taxonomy (7 geometries x
//! 8 rotations plus the two constant codes), and landmark selection.
//!
//! Neighbour `i` of a centre pixel is visited clockwise from the top-left:
//!
//! ```text
//! 0 1 2
//! 7 c 3
//! 6 5 4
//! ```
//!
//! Neighbour 0 is the most significant bit of the code, so bit position `i`
//! holds `code >> (7 - i) & 1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{zero_pad, GrayImage};

/// `(dx, dy)` offsets in neighbour order.
const NEIGHBOURS: [(i64, i64); 8] = [(-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LbpCode(pub u8);

impl LbpCode {
    /// Bit at neighbour position `i` (0 = top-left).
    #[inline]
    pub fn bit(self, i: usize) -> bool {
        (self.0 >> (7 - (i % 8))) & 1 == 1
    }

    /// Moves every bit one neighbour position clockwise, `k` times.
    pub fn rotate(self, k: u32) -> LbpCode {
        LbpCode(self.0.rotate_right(k % 8))
    }

    /// Number of circular 0/1 changes between consecutive positions.
    pub fn transitions(self) -> u32 {
        (self.0 ^ self.0.rotate_right(1)).count_ones()
    }

    pub fn classify(self) -> PatternClass {
        match self.transitions() {
            0 if self.0 == 0 => PatternClass::AllZeros,
            0 => PatternClass::AllOnes,
            2 => {
                let start = (0..8)
                    .find(|&i| self.bit(i) && !self.bit((i + 7) % 8))
                    .expect("two transitions imply a run start");
                PatternClass::Uniform(Pattern {
                    geometry: self.0.count_ones() as u8,
                    rotation: start as u8 + 1,
                })
            }
            _ => PatternClass::NonUniform,
        }
    }
}

/// A uniform pattern `G{geometry}R{rotation}`: `geometry` one-bits forming a
/// single circular run that starts at neighbour `rotation - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pattern {
    pub geometry: u8,
    pub rotation: u8,
}

impl Pattern {
    pub fn new(geometry: u8, rotation: u8) -> Result<Self> {
        if !(1..=7).contains(&geometry) || !(1..=8).contains(&rotation) {
            return Err(Error::InvalidArgument(format!(
                "pattern G{geometry}R{rotation} outside G1..7 R1..8"
            )));
        }
        Ok(Pattern { geometry, rotation })
    }

    /// The unique code carrying this pattern.
    pub fn code(self) -> LbpCode {
        let run = (0xffu16 << (8 - self.geometry)) as u8;
        LbpCode(run).rotate(u32::from(self.rotation) - 1)
    }

    /// All 56 uniform two-transition patterns in `(geometry, rotation)` order.
    pub fn all() -> impl Iterator<Item = Pattern> {
        (1..=7u8).flat_map(|g| {
            (1..=8u8).map(move |r| Pattern {
                geometry: g,
                rotation: r,
            })
        })
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G{}R{}", self.geometry, self.rotation)
    }
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("pattern {s:?} is not of the form G<1-7>R<1-8>"));
        let rest = s.trim().strip_prefix(['G', 'g']).ok_or_else(bad)?;
        let (g, r) = rest.split_once(['R', 'r']).ok_or_else(bad)?;
        Pattern::new(g.parse().map_err(|_| bad())?, r.parse().map_err(|_| bad())?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatternClass {
    NonUniform,
    AllZeros,
    AllOnes,
    Uniform(Pattern),
}

impl PatternClass {
    pub fn is_uniform(self) -> bool {
        !matches!(self, PatternClass::NonUniform)
    }
}

/// LBP code of the pixel at `(x, y)`; neighbour bits are set when the
/// neighbour is `>=` the centre. The centre must have a full 3x3
/// neighbourhood.
pub fn lbp_code(img: &GrayImage, x: usize, y: usize) -> Result<LbpCode> {
    let (w, h) = (img.width(), img.height());
    if x == 0 || y == 0 || x + 1 >= w || y + 1 >= h {
        return Err(Error::OutOfBounds {
            x: x as i64,
            y: y as i64,
            width: w,
            height: h,
        });
    }
    Ok(code_unchecked(img, x, y))
}

#[inline]
fn code_unchecked(img: &GrayImage, x: usize, y: usize) -> LbpCode {
    let c = img.get(x, y);
    let mut code = 0u8;
    for (dx, dy) in NEIGHBOURS {
        let n = img.get((x as i64 + dx) as usize, (y as i64 + dy) as usize);
        code = (code << 1) | u8::from(n >= c);
    }
    LbpCode(code)
}

pub fn transitions(code: LbpCode) -> u32 {
    code.transitions()
}

pub fn classify(code: LbpCode) -> PatternClass {
    code.classify()
}

/// Codes of every pixel of the unpadded image (zero padding of 1), row-major.
pub fn code_map(img: &GrayImage) -> Vec<LbpCode> {
    let padded = zero_pad(img, 1).expect("margin 1 is positive");
    let mut out = Vec::with_capacity(img.width() * img.height());
    for y in 0..img.height() {
        for x in 0..img.width() {
            out.push(code_unchecked(&padded, x + 1, y + 1));
        }
    }
    out
}

/// Landmark coordinates `(x, y)` in the unpadded frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub points: Vec<(f64, f64)>,
    pub source_id: String,
}

impl PointCloud {
    pub fn new(points: Vec<(f64, f64)>) -> Self {
        PointCloud {
            points,
            source_id: String::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `x,y` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for (x, y) in &self.points {
            out.push_str(&format!("{x},{y}\n"));
        }
        out
    }
}

/// Every pixel whose code is the uniform pattern `G{geometry}R{rotation}`,
/// in row-major order. The image is zero-padded by one pixel first.
pub fn select_landmarks(img: &GrayImage, pattern: Pattern) -> PointCloud {
    let target = pattern.code();
    let w = img.width();
    let points = code_map(img)
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c == target)
        .map(|(i, _)| ((i % w) as f64, (i / w) as f64))
        .collect();
    PointCloud {
        points,
        source_id: img.id.clone(),
    }
}
