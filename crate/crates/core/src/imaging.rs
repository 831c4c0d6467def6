//! Image ingestion (PGM, CSV matrix), padding and cropping, dataset
//! manifests, and the synthetic two-class texture generator.

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major scalar grid. Intensities may be negative (e.g. CT units).
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
    pub id: String,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "{} pixels supplied for a {width}x{height} image",
                pixels.len()
            )));
        }
        if let Some(i) = pixels.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite intensity at index {i}")));
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
            id: String::new(),
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    fn set(&mut self, x: usize, y: usize, v: f64) {
        self.pixels[y * self.width + x] = v;
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.pixels
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Applies `f` to every intensity.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&v| f(v)).collect(),
            id: self.id.clone(),
        }
    }
}

/// Surrounds the image with `margin` rows/columns of zeros.
pub fn zero_pad(img: &GrayImage, margin: usize) -> Result<GrayImage> {
    if margin == 0 {
        return Err(Error::InvalidArgument("padding margin must be positive".into()));
    }
    let w = img.width + 2 * margin;
    let h = img.height + 2 * margin;
    let mut out = GrayImage {
        width: w,
        height: h,
        pixels: vec![0.0; w * h],
        id: img.id.clone(),
    };
    for y in 0..img.height {
        let src = &img.pixels[y * img.width..(y + 1) * img.width];
        let start = (y + margin) * w + margin;
        out.pixels[start..start + img.width].copy_from_slice(src);
    }
    Ok(out)
}

/// Copies the `width`x`height` window whose top-left corner is `(x, y)`.
pub fn crop(img: &GrayImage, x: usize, y: usize, width: usize, height: usize) -> Result<GrayImage> {
    if width == 0 || height == 0 || x + width > img.width || y + height > img.height {
        return Err(Error::InvalidArgument(format!(
            "window {width}x{height} at ({x}, {y}) exceeds {}x{} image",
            img.width, img.height
        )));
    }
    let mut pixels = Vec::with_capacity(width * height);
    for row in y..y + height {
        let start = row * img.width + x;
        pixels.extend_from_slice(&img.pixels[start..start + width]);
    }
    Ok(GrayImage {
        width,
        height,
        pixels,
        id: img.id.clone(),
    })
}

// --- PGM -------------------------------------------------------------------

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn next_uint(&mut self, what: &str) -> Result<u64> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::ParseAtOffset {
                offset: start,
                message: format!("expected {what}"),
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::ParseAtOffset {
                offset: start,
                message: format!("{what} out of range"),
            })
    }
}

/// Parses a PGM image in plain (`P2`) or raw (`P5`) form. Intensities are
/// returned as stored, without rescaling by maxval.
pub fn load_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let binary = match bytes.get(..2) {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => {
            return Err(Error::ParseAtOffset {
                offset: 0,
                message: "missing P2/P5 magic number".into(),
            })
        }
    };
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.next_uint("width")? as usize;
    let height = cur.next_uint("height")? as usize;
    let maxval_at = cur.pos;
    let maxval = cur.next_uint("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::ParseAtOffset {
            offset: 2,
            message: "zero image dimension".into(),
        });
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::ParseAtOffset {
            offset: maxval_at,
            message: format!("maxval {maxval} outside 1..=65535"),
        });
    }
    let n = width * height;
    let mut pixels = Vec::with_capacity(n);
    if binary {
        // exactly one whitespace byte separates the header from the raster
        match bytes.get(cur.pos) {
            Some(c) if c.is_ascii_whitespace() => cur.pos += 1,
            _ => {
                return Err(Error::ParseAtOffset {
                    offset: cur.pos,
                    message: "expected whitespace before raster".into(),
                })
            }
        }
        let sample = if maxval < 256 { 1 } else { 2 };
        let body = &bytes[cur.pos..];
        if body.len() < n * sample {
            return Err(Error::ParseAtOffset {
                offset: bytes.len(),
                message: format!("truncated raster: need {} bytes, found {}", n * sample, body.len()),
            });
        }
        for i in 0..n {
            let v = if sample == 1 {
                body[i] as u64
            } else {
                u16::from_be_bytes([body[2 * i], body[2 * i + 1]]) as u64
            };
            if v > maxval {
                return Err(Error::ParseAtOffset {
                    offset: cur.pos + i * sample,
                    message: format!("sample {v} exceeds maxval {maxval}"),
                });
            }
            pixels.push(v as f64);
        }
    } else {
        for _ in 0..n {
            let at = cur.pos;
            let v = cur.next_uint("pixel value").map_err(|_| Error::ParseAtOffset {
                offset: at,
                message: "truncated or malformed raster".into(),
            })?;
            if v > maxval {
                return Err(Error::ParseAtOffset {
                    offset: at,
                    message: format!("sample {v} exceeds maxval {maxval}"),
                });
            }
            pixels.push(v as f64);
        }
    }
    GrayImage::new(width, height, pixels)
}

fn pgm_samples(img: &GrayImage) -> Result<(Vec<u16>, u16)> {
    let mut max = 0u16;
    let mut out = Vec::with_capacity(img.pixels.len());
    for (i, &v) in img.pixels.iter().enumerate() {
        if v.fract() != 0.0 || !(0.0..=65535.0).contains(&v) {
            return Err(Error::InvalidArgument(format!(
                "pixel {i} = {v} is not representable in PGM"
            )));
        }
        let s = v as u16;
        max = max.max(s);
        out.push(s);
    }
    Ok((out, max.max(1)))
}

/// Encodes as raw `P5`. Pixels must be integers in `0..=65535`; maxval is
/// 255 when every sample fits a byte, else 65535.
pub fn save_pgm(img: &GrayImage) -> Result<Vec<u8>> {
    let (samples, max) = pgm_samples(img)?;
    let maxval: u16 = if max < 256 { 255 } else { 65535 };
    let mut out = format!("P5\n{} {}\n{}\n", img.width, img.height, maxval).into_bytes();
    for s in samples {
        if maxval == 255 {
            out.push(s as u8);
        } else {
            out.extend_from_slice(&s.to_be_bytes());
        }
    }
    Ok(out)
}

/// Encodes as plain `P2`.
pub fn save_pgm_ascii(img: &GrayImage) -> Result<Vec<u8>> {
    let (samples, max) = pgm_samples(img)?;
    let maxval: u16 = if max < 256 { 255 } else { 65535 };
    let mut out = format!("P2\n{} {}\n{}\n", img.width, img.height, maxval);
    for row in samples.chunks(img.width) {
        let line: Vec<String> = row.iter().map(|s| s.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    Ok(out.into_bytes())
}

// --- CSV matrix --------------------------------------------------------------

/// Parses a rectangular comma-separated numeric grid. Rows are numbered
/// from 1 in error messages.
pub fn load_csv_matrix(text: &str) -> Result<GrayImage> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut width = None;
    let mut height = 0;
    let mut pixels = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::ParseAtRow {
            row,
            message: e.to_string(),
        })?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        match width {
            None => width = Some(rec.len()),
            Some(w) if w != rec.len() => {
                return Err(Error::ParseAtRow {
                    row,
                    message: format!("expected {w} columns, found {}", rec.len()),
                })
            }
            _ => {}
        }
        for (col, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::ParseAtRow {
                row,
                message: format!("column {}: {field:?} is not a number", col + 1),
            })?;
            if !v.is_finite() {
                return Err(Error::ParseAtRow {
                    row,
                    message: format!("column {}: non-finite value", col + 1),
                });
            }
            pixels.push(v);
        }
        height += 1;
    }
    let width = width.ok_or_else(|| Error::ParseAtRow {
        row: 1,
        message: "empty matrix".into(),
    })?;
    debug_assert_eq!(pixels.len(), width * height);
    GrayImage::new(width, height, pixels)
}

/// Shortest round-trip formatting, so `load_csv_matrix` restores every bit.
pub fn save_csv_matrix(img: &GrayImage) -> String {
    let mut out = String::new();
    for row in img.pixels.chunks(img.width) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Loads `.pgm` or `.csv` by extension; the image id is the file stem.
pub fn load_image(path: &Path) -> Result<GrayImage> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    let img = match ext.as_deref() {
        Some("pgm") => load_pgm(&fs::read(path).map_err(|e| Error::file(path, e))?)?,
        Some("csv") => load_csv_matrix(&fs::read_to_string(path).map_err(|e| Error::file(path, e))?)?,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "{}: unsupported image format (expected .pgm or .csv)",
                path.display()
            )))
        }
    };
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(img.with_id(id))
}

// --- Manifest ----------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRecord {
    pub id: String,
    pub label: String,
    pub images: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitTag>,
}

/// One record per subject; image paths are relative to `base_dir` unless
/// absolute.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub records: Vec<ManifestRecord>,
    pub base_dir: PathBuf,
}

impl DatasetManifest {
    pub fn new(records: Vec<ManifestRecord>, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let m = DatasetManifest {
            records,
            base_dir: base_dir.into(),
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        for (i, r) in self.records.iter().enumerate() {
            if !ids.insert(r.id.as_str()) {
                return Err(Error::ParseAtRow {
                    row: i + 1,
                    message: format!("duplicate id {:?}", r.id),
                });
            }
            if r.images.is_empty() {
                return Err(Error::ParseAtRow {
                    row: i + 1,
                    message: format!("record {:?} lists no images", r.id),
                });
            }
        }
        let labels = self.labels();
        if labels.len() != 2 {
            return Err(Error::Shape(format!(
                "manifest must contain exactly two labels, found {labels:?}"
            )));
        }
        Ok(())
    }

    /// Distinct labels in lexicographic order.
    pub fn labels(&self) -> Vec<String> {
        self.records
            .iter()
            .map(|r| r.label.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn parse_jsonl(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: ManifestRecord = serde_json::from_str(line).map_err(|e| Error::ParseAtRow {
                row: i + 1,
                message: e.to_string(),
            })?;
            records.push(rec);
        }
        Self::new(records, base_dir)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(|e| Error::file(path, e))?;
        let mut text = String::new();
        for line in std::io::BufReader::new(file).lines() {
            text.push_str(&line.map_err(|e| Error::file(path, e))?);
            text.push('\n');
        }
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse_jsonl(&text, base)
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn resolve(&self, image: &Path) -> PathBuf {
        if image.is_absolute() {
            image.to_path_buf()
        } else {
            self.base_dir.join(image)
        }
    }

    /// Loads every slice of one record, in listed order.
    pub fn load_record(&self, record: &ManifestRecord) -> Result<Vec<GrayImage>> {
        record.images.iter().map(|p| load_image(&self.resolve(p))).collect()
    }
}

// --- Synthetic data ------------------------------------------------------------

/// The two synthetic classes; they differ only in the number of annuli.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthClass {
    Holes1,
    Holes2,
}

impl SynthClass {
    pub fn name(self) -> &'static str {
        match self {
            SynthClass::Holes1 => "holes1",
            SynthClass::Holes2 => "holes2",
        }
    }

    pub fn annuli(self) -> usize {
        match self {
            SynthClass::Holes1 => 1,
            SynthClass::Holes2 => 2,
        }
    }
}

impl std::str::FromStr for SynthClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "holes1" => Ok(SynthClass::Holes1),
            "holes2" => Ok(SynthClass::Holes2),
            other => Err(Error::InvalidArgument(format!("unknown class {other:?}"))),
        }
    }
}

const BACKGROUND: (f64, f64) = (10.0, 30.0);
const INTERIOR: (f64, f64) = (60.0, 75.0);
const RIM: (f64, f64) = (200.0, 230.0);

struct Annulus {
    cx: f64,
    cy: f64,
    inner: f64,
    outer: f64,
}

/// Dark noisy background with one (`holes1`) or two (`holes2`) bright
/// annuli whose interiors are darker than the rim. Integer intensities in
/// `0..=255`; a pure function of its arguments.
pub fn synth_texture(class: SynthClass, size: usize, seed: u64) -> Result<GrayImage> {
    if size < 32 {
        return Err(Error::InvalidArgument(format!(
            "synthetic images need size >= 32, got {size}"
        )));
    }
    let stream = match class {
        SynthClass::Holes1 => 0x9e37_79b9_7f4a_7c15,
        SynthClass::Holes2 => 0xc2b2_ae3d_27d4_eb4f,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stream ^ (size as u64).rotate_left(32));
    let s = size as f64;
    let annuli = match class {
        SynthClass::Holes1 => {
            let outer = rng.gen_range(0.20 * s..0.30 * s);
            let slack = s / 2.0 - outer - 3.0;
            vec![Annulus {
                cx: s / 2.0 + rng.gen_range(-slack..slack) * 0.5,
                cy: s / 2.0 + rng.gen_range(-slack..slack) * 0.5,
                inner: outer - rng.gen_range(0.06 * s..0.10 * s).max(2.5),
                outer,
            }]
        }
        SynthClass::Holes2 => {
            // one annulus per half, left/right or top/bottom
            let vertical = rng.gen_bool(0.5);
            (0..2)
                .map(|k| {
                    let outer = rng.gen_range(0.13 * s..0.19 * s);
                    let along = s * (0.25 + 0.5 * k as f64) + rng.gen_range(-0.03 * s..0.03 * s);
                    let slack = s / 2.0 - outer - 3.0;
                    let across = s / 2.0 + rng.gen_range(-slack..slack) * 0.5;
                    let (cx, cy) = if vertical { (across, along) } else { (along, across) };
                    Annulus {
                        cx,
                        cy,
                        inner: outer - rng.gen_range(0.05 * s..0.08 * s).max(2.5),
                        outer,
                    }
                })
                .collect()
        }
    };

    let mut img = GrayImage {
        width: size,
        height: size,
        pixels: vec![0.0; size * size],
        id: format!("{}_{size}_{seed}", class.name()),
    };
    for y in 0..size {
        for x in 0..size {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            let band = annuli.iter().find_map(|a| {
                let d = ((px - a.cx).powi(2) + (py - a.cy).powi(2)).sqrt();
                if d < a.inner {
                    Some(INTERIOR)
                } else if d <= a.outer {
                    Some(RIM)
                } else {
                    None
                }
            });
            let (lo, hi) = band.unwrap_or(BACKGROUND);
            let v = rng.gen_range(lo..=hi).round();
            img.set(x, y, v);
        }
    }
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pgm_ascii_example() {
        let img = load_pgm(b"P2 2 2 255 0 1 2 3").unwrap();
        assert_eq!((img.width(), img.height()), (2, 2));
        assert_eq!(img.pixels(), &[0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn pgm_binary_matches_ascii() {
        let mut raw = b"P5 2 2 255\n".to_vec();
        raw.extend_from_slice(&[0, 1, 2, 3]);
        assert_eq!(load_pgm(&raw).unwrap(), load_pgm(b"P2 2 2 255 0 1 2 3").unwrap());
    }

    #[test]
    fn pgm_sixteen_bit() {
        let mut raw = b"P5\n# comment\n2 1\n65535\n".to_vec();
        raw.extend_from_slice(&[0x01, 0x00, 0xff, 0xff]);
        assert_eq!(load_pgm(&raw).unwrap().pixels(), &[256.0, 65535.0]);
    }

    #[test]
    fn pgm_truncated_body_reports_offset() {
        let mut raw = b"P5 2 2 255\n".to_vec();
        raw.extend_from_slice(&[0, 1, 2]);
        match load_pgm(&raw).unwrap_err() {
            Error::ParseAtOffset { offset, .. } => assert_eq!(offset, raw.len()),
            e => panic!("unexpected {e:?}"),
        }
        assert!(matches!(
            load_pgm(b"P2 2 2 255 0 1 2").unwrap_err(),
            Error::ParseAtOffset { .. }
        ));
        assert!(load_pgm(b"P6 1 1 255 0").is_err());
        assert!(load_pgm(b"P2 1 1 70000 0").is_err());
    }

    #[test]
    fn csv_examples() {
        let img = load_csv_matrix("0,1\n2,3").unwrap();
        assert_eq!((img.width(), img.height()), (2, 2));
        assert_eq!(img.pixels(), &[0.0, 1.0, 2.0, 3.0]);
        let img = load_csv_matrix("-100,50").unwrap();
        assert_eq!((img.width(), img.height()), (2, 1));
        assert_eq!(img.pixels(), &[-100.0, 50.0]);
        match load_csv_matrix("1,2\n3").unwrap_err() {
            Error::ParseAtRow { row, .. } => assert_eq!(row, 2),
            e => panic!("unexpected {e:?}"),
        }
        assert!(load_csv_matrix("1,x").is_err());
        assert!(load_csv_matrix("").is_err());
    }

    #[test]
    fn zero_pad_examples() {
        let one = GrayImage::new(1, 1, vec![7.0]).unwrap();
        let p = zero_pad(&one, 1).unwrap();
        assert_eq!((p.width(), p.height()), (3, 3));
        assert_eq!(p.pixels(), &[0.0, 0.0, 0.0, 0.0, 7.0, 0.0, 0.0, 0.0, 0.0]);
        let two = GrayImage::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let p = zero_pad(&two, 1).unwrap();
        assert_eq!((p.width(), p.height()), (4, 4));
        assert_eq!(crop(&p, 1, 1, 2, 2).unwrap(), two);
        assert!(zero_pad(&two, 0).is_err());
    }

    #[test]
    fn manifest_validation() {
        let good = r#"{"id":"a","label":"x","images":["a.pgm"]}
{"id":"b","label":"y","images":["b.pgm"],"split":"test"}
"#;
        let m = DatasetManifest::parse_jsonl(good, "/data").unwrap();
        assert_eq!(m.labels(), vec!["x".to_string(), "y".to_string()]);
        assert_eq!(m.records[1].split, Some(SplitTag::Test));
        assert_eq!(m.resolve(Path::new("a.pgm")), PathBuf::from("/data/a.pgm"));

        let dup = r#"{"id":"a","label":"x","images":["a.pgm"]}
{"id":"a","label":"y","images":["b.pgm"]}"#;
        assert!(DatasetManifest::parse_jsonl(dup, "").is_err());
        let one_label = r#"{"id":"a","label":"x","images":["a.pgm"]}
{"id":"b","label":"x","images":["b.pgm"]}"#;
        assert!(DatasetManifest::parse_jsonl(one_label, "").is_err());
        let no_images = r#"{"id":"a","label":"x","images":[]}
{"id":"b","label":"y","images":["b.pgm"]}"#;
        assert!(DatasetManifest::parse_jsonl(no_images, "").is_err());
        let extra = r#"{"id":"a","label":"x","images":["a"],"bogus":1}"#;
        assert!(DatasetManifest::parse_jsonl(extra, "").is_err());
    }

    #[test]
    fn synth_is_deterministic_and_in_range() {
        let a = synth_texture(SynthClass::Holes1, 64, 0).unwrap();
        let b = synth_texture(SynthClass::Holes1, 64, 0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, synth_texture(SynthClass::Holes1, 64, 1).unwrap());
        assert_ne!(a, synth_texture(SynthClass::Holes2, 64, 0).unwrap());
        assert!(a
            .pixels()
            .iter()
            .all(|&v| (0.0..=255.0).contains(&v) && v.fract() == 0.0));
        assert!(synth_texture(SynthClass::Holes2, 31, 0).is_err());
    }

    fn arb_int_image() -> impl Strategy<Value = GrayImage> {
        (1usize..9, 1usize..9).prop_flat_map(|(w, h)| {
            prop::collection::vec(0u16..=65535, w * h)
                .prop_map(move |px| GrayImage::new(w, h, px.into_iter().map(f64::from).collect()).unwrap())
        })
    }

    fn arb_real_image() -> impl Strategy<Value = GrayImage> {
        (1usize..9, 1usize..9).prop_flat_map(|(w, h)| {
            prop::collection::vec(-1e6f64..1e6, w * h).prop_map(move |px| GrayImage::new(w, h, px).unwrap())
        })
    }

    proptest! {
        #[test]
        fn pgm_round_trips(img in arb_int_image()) {
            prop_assert_eq!(&load_pgm(&save_pgm(&img).unwrap()).unwrap(), &img);
            prop_assert_eq!(&load_pgm(&save_pgm_ascii(&img).unwrap()).unwrap(), &img);
        }

        #[test]
        fn csv_round_trips_bitwise(img in arb_real_image()) {
            let back = load_csv_matrix(&save_csv_matrix(&img)).unwrap();
            for (a, b) in back.pixels().iter().zip(img.pixels()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }

        #[test]
        fn zero_pad_adds_only_zeros(img in arb_real_image(), m in 1usize..4) {
            let p = zero_pad(&img, m).unwrap();
            for y in 0..p.height() {
                for x in 0..p.width() {
                    let inside = x >= m && y >= m && x < m + img.width() && y < m + img.height();
                    if inside {
                        prop_assert_eq!(p.get(x, y), img.get(x - m, y - m));
                    } else {
                        prop_assert_eq!(p.get(x, y), 0.0);
                    }
                }
            }
        }
    }
}
