//! Persistent homology in dimensions 0 and 1.
//!
//! Both engines discard zero-length pairs and cap essential classes at the
//! top of the filtration (maximum intensity for images, the maximum scale
//! for point clouds), flagging them `essential`.

pub mod cubical;
pub mod oracle;
pub mod rips;
mod union_find;

pub use cubical::cubical_persistence;
pub use rips::{rips_persistence, MaxScale};

use crate::barcode::Barcode;

/// Dimension-0 and dimension-1 barcodes of one filtration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagram {
    pub dim0: Barcode,
    pub dim1: Barcode,
}

impl Diagram {
    pub fn empty() -> Self {
        Diagram {
            dim0: Barcode::new(0),
            dim1: Barcode::new(1),
        }
    }

    pub fn get(&self, dim: u8) -> &Barcode {
        match dim {
            0 => &self.dim0,
            _ => &self.dim1,
        }
    }

    /// Bars alive at `t`; essential bars count from birth onward.
    pub fn betti_at(&self, dim: u8, t: f64) -> usize {
        self.get(dim)
            .iter()
            .filter(|b| b.birth <= t && (b.essential || t < b.death))
            .count()
    }
}
