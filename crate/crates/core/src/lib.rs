//! Persistent-homology features from grayscale images.
//!
//! Images enter through [`imaging`], are turned into dimension-0/1
//! barcodes by the cubical or landmark Vietoris–Rips engines in
//! [`persistence`] (landmarks come from uniform local binary patterns in
//! [`ulbp`]), are featurized by [`vectorize`], and are combined per subject
//! and classified in [`pipeline`]. The `phfeat` binary wires these into
//! reproducible experiments; see [`cli`].

pub mod barcode;
pub mod cli;
pub mod error;
pub mod imaging;
pub mod persistence;
pub mod pipeline;
pub mod ulbp;
pub mod vectorize;

pub use barcode::{aggregate, Bar, Barcode, Range};
pub use error::{Error, Result};
pub use imaging::GrayImage;
pub use persistence::Diagram;
pub use vectorize::FeatureVector;
