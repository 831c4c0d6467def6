//! Barcodes: per-dimension multisets of `(birth, death)` intervals.
//!
//! Multiplicity is represented by repetition and bars keep the order in which
//! they were produced. Filtration values are `f64` throughout.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single persistence interval.
///
/// `essential` marks a class that never dies inside the filtration; its
/// death is the cap value supplied by whoever produced the bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub birth: f64,
    pub death: f64,
    pub essential: bool,
}

impl Bar {
    pub fn new(birth: f64, death: f64) -> Result<Self> {
        Self::checked(birth, death, false)
    }

    /// An essential class born at `birth`, capped at `cap`.
    pub fn essential(birth: f64, cap: f64) -> Result<Self> {
        Self::checked(birth, cap, true)
    }

    fn checked(birth: f64, death: f64, essential: bool) -> Result<Self> {
        if !birth.is_finite() || !death.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bar endpoints must be finite, got ({birth}, {death})"
            )));
        }
        if birth > death {
            return Err(Error::InvalidArgument(format!(
                "bar birth {birth} exceeds death {death}"
            )));
        }
        Ok(Bar {
            birth,
            death,
            essential,
        })
    }

    #[inline]
    pub fn lifespan(&self) -> f64 {
        self.death - self.birth
    }

    #[inline]
    pub fn midpoint(&self) -> f64 {
        (self.birth + self.death) / 2.0
    }

    /// Half-open aliveness `birth <= t < death`.
    #[inline]
    pub fn alive_at(&self, t: f64) -> bool {
        self.birth <= t && t < self.death
    }

    /// Multiply both endpoints by `c`.
    pub fn scaled(&self, c: f64) -> Bar {
        Bar {
            birth: self.birth * c,
            death: self.death * c,
            essential: self.essential,
        }
    }
}

/// Closed sampling domain `[t_min, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub t_min: f64,
    pub t_max: f64,
}

impl Range {
    pub fn new(t_min: f64, t_max: f64) -> Result<Self> {
        if !(t_min.is_finite() && t_max.is_finite()) || t_min > t_max {
            return Err(Error::InvalidArgument(format!("invalid range [{t_min}, {t_max}]")));
        }
        Ok(Range { t_min, t_max })
    }

    /// Smallest range containing both.
    pub fn union(&self, other: &Range) -> Range {
        Range {
            t_min: self.t_min.min(other.t_min),
            t_max: self.t_max.max(other.t_max),
        }
    }
}

/// Bars of one homological dimension, in production order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Barcode {
    dim: u8,
    bars: Vec<Bar>,
}

impl Barcode {
    pub fn new(dim: u8) -> Self {
        Barcode { dim, bars: Vec::new() }
    }

    pub fn from_bars(dim: u8, bars: Vec<Bar>) -> Self {
        Barcode { dim, bars }
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn bars(&self) -> &[Bar] {
        &self.bars
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn push(&mut self, bar: Bar) {
        self.bars.push(bar);
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Bar> {
        self.bars.iter()
    }

    /// `(min birth, max death)`; an empty barcode yields the sentinel `(0, 1)`.
    pub fn bounds(&self) -> Range {
        if self.bars.is_empty() {
            return Range { t_min: 0.0, t_max: 1.0 };
        }
        let (lo, hi) = self
            .bars
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), b| {
                (lo.min(b.birth), hi.max(b.death))
            });
        Range { t_min: lo, t_max: hi }
    }

    /// Number of bars alive at `t` (half-open).
    pub fn count_alive(&self, t: f64) -> usize {
        self.bars.iter().filter(|b| b.alive_at(t)).count()
    }

    /// Every endpoint multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Barcode {
        Barcode {
            dim: self.dim,
            bars: self.bars.iter().map(|b| b.scaled(c)).collect(),
        }
    }
}

impl<'a> IntoIterator for &'a Barcode {
    type Item = &'a Bar;
    type IntoIter = std::slice::Iter<'a, Bar>;

    fn into_iter(self) -> Self::IntoIter {
        self.bars.iter()
    }
}

/// Multiset union of same-dimension barcodes, keeping duplicates and order.
///
/// An empty input list yields an empty dimension-0 barcode.
pub fn aggregate<'a, I>(barcodes: I) -> Result<Barcode>
where
    I: IntoIterator<Item = &'a Barcode>,
{
    let mut iter = barcodes.into_iter();
    let Some(first) = iter.next() else {
        return Ok(Barcode::new(0));
    };
    let mut out = first.clone();
    for b in iter {
        if b.dim != out.dim {
            return Err(Error::DimensionMismatch {
                expected: out.dim,
                found: b.dim,
            });
        }
        out.bars.extend_from_slice(&b.bars);
    }
    Ok(out)
}

/// Free-function form of [`Barcode::bounds`].
pub fn bounds(barcode: &Barcode) -> Range {
    barcode.bounds()
}

#[derive(Debug, Serialize, Deserialize)]
struct BarRow {
    dim: u8,
    birth: f64,
    death: f64,
    essential: bool,
}

/// Writes barcodes as CSV with header `dim,birth,death,essential`.
pub fn write_csv<W: Write>(writer: W, barcodes: &[&Barcode]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for bc in barcodes {
        for bar in bc.iter() {
            w.serialize(BarRow {
                dim: bc.dim,
                birth: bar.birth,
                death: bar.death,
                essential: bar.essential,
            })?;
        }
    }
    if barcodes.iter().all(|b| b.is_empty()) {
        w.write_record(["dim", "birth", "death", "essential"])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the CSV form back, grouping rows by dimension (ascending) while
/// preserving row order within each dimension.
pub fn read_csv<R: Read>(reader: R) -> Result<Vec<Barcode>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out: Vec<Barcode> = Vec::new();
    for (i, row) in rdr.deserialize::<BarRow>().enumerate() {
        let row = row?;
        let bar = Bar::checked(row.birth, row.death, row.essential).map_err(|e| Error::ParseAtRow {
            row: i + 2,
            message: e.to_string(),
        })?;
        match out.iter_mut().find(|b| b.dim == row.dim) {
            Some(bc) => bc.push(bar),
            None => out.push(Barcode::from_bars(row.dim, vec![bar])),
        }
    }
    out.sort_by_key(|b| b.dim);
    Ok(out)
}
