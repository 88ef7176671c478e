//! Spectrum data model, CSV ingestion, normalization and resampling.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of intensity readings in a principal-dataset spectrum.
pub const PRINCIPAL_GRID_LEN: usize = 2473;
/// Input width of every network model; ten receptive fields of 247.
pub const MODEL_WIDTH: usize = 2470;

const NORMALIZE_TOL: f64 = 1e-9;

/// Strictly increasing wavenumber axis (cm⁻¹).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavenumberGrid {
    values: Vec<f64>,
}

impl WavenumberGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Format(format!(
                "grid needs at least 2 points, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Format(format!("grid value {i} is not finite")));
        }
        if let Some(i) = values.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Format(format!(
                "grid not strictly increasing at column {} ({} -> {})",
                i + 1,
                values[i],
                values[i + 1]
            )));
        }
        Ok(Self { values })
    }

    /// `n` evenly spaced points from `start` to `end` inclusive.
    pub fn linspace(start: f64, end: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Self::new(vec![start]);
        }
        let step = (end - start) / (n - 1) as f64;
        Self::new((0..n).map(|i| start + step * i as f64).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn prefix(&self, width: usize) -> Result<Self> {
        Self::new(self.values[..width.min(self.values.len())].to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Positive,
    Negative,
    Unlabeled,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Positive => "pos",
            Label::Negative => "neg",
            Label::Unlabeled => "unk",
        }
    }

    /// Network training target: 1 for positive, 0 otherwise.
    pub fn target(self) -> f64 {
        if self == Label::Positive {
            1.0
        } else {
            0.0
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "pos" => Ok(Label::Positive),
            "neg" => Ok(Label::Negative),
            "unk" => Ok(Label::Unlabeled),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Real,
    Blended,
    VaeGenerated,
    OutlierCorpus,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Real => "real",
            Source::Blended => "blended",
            Source::VaeGenerated => "vae",
            Source::OutlierCorpus => "outlier",
        }
    }
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "real" => Ok(Source::Real),
            "blended" => Ok(Source::Blended),
            "vae" => Ok(Source::VaeGenerated),
            "outlier" => Ok(Source::OutlierCorpus),
            other => Err(format!("unknown source {other:?}")),
        }
    }
}

/// One sample's intensities on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Arc<WavenumberGrid>,
    intensities: Vec<f64>,
    pub label: Label,
    pub source: Source,
}

impl Spectrum {
    pub fn new(
        grid: Arc<WavenumberGrid>,
        intensities: Vec<f64>,
        label: Label,
        source: Source,
    ) -> Result<Self> {
        if intensities.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} intensities on a grid of {}",
                intensities.len(),
                grid.len()
            )));
        }
        if let Some(i) = intensities.iter().position(|v| !v.is_finite()) {
            return Err(Error::Format(format!("intensity {i} is not finite")));
        }
        Ok(Self {
            grid,
            intensities,
            label,
            source,
        })
    }

    pub fn grid(&self) -> &Arc<WavenumberGrid> {
        &self.grid
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn len(&self) -> usize {
        self.intensities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intensities.is_empty()
    }

    pub fn into_intensities(self) -> Vec<f64> {
        self.intensities
    }

    /// Same grid, label and source with new intensities.
    pub fn with_intensities(&self, intensities: Vec<f64>) -> Result<Self> {
        Spectrum::new(self.grid.clone(), intensities, self.label, self.source)
    }

    pub fn is_normalized(&self) -> bool {
        let (lo, hi) = min_max(&self.intensities);
        lo.abs() <= NORMALIZE_TOL && (hi - 1.0).abs() <= NORMALIZE_TOL
    }
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

/// Affine map of the intensities onto [0, 1].
pub fn min_max_normalize(s: &Spectrum) -> Result<Spectrum> {
    let (lo, hi) = min_max(&s.intensities);
    if !(hi > lo) {
        return Err(Error::Degenerate(format!(
            "constant spectrum (all intensities {lo}) cannot be normalized"
        )));
    }
    let range = hi - lo;
    let out = s
        .intensities
        .iter()
        .map(|&v| if v == hi { 1.0 } else { (v - lo) / range })
        .collect();
    s.with_intensities(out)
}

/// Linear interpolation onto `target`. Points outside the source support
/// are rejected rather than extrapolated.
pub fn resample_to_grid(s: &Spectrum, target: &Arc<WavenumberGrid>) -> Result<Spectrum> {
    let src = s.grid.values();
    let ys = &s.intensities;
    let (lo, hi) = (s.grid.min(), s.grid.max());
    let mut out = Vec::with_capacity(target.len());
    for &w in target.values() {
        if w < lo || w > hi {
            return Err(Error::OutOfRange(format!(
                "wavenumber {w} outside source support [{lo}, {hi}]"
            )));
        }
        let j = src.partition_point(|&x| x < w);
        let v = if src[j] == w {
            ys[j]
        } else {
            let (x0, x1) = (src[j - 1], src[j]);
            let t = (w - x0) / (x1 - x0);
            ys[j - 1] + t * (ys[j] - ys[j - 1])
        };
        out.push(v);
    }
    Spectrum::new(target.clone(), out, s.label, s.source)
}

/// Keeps the first `width` readings so the locally-connected fields tile
/// the input exactly.
pub fn truncate_to(s: &Spectrum, width: usize) -> Result<Spectrum> {
    if s.len() < width {
        return Err(Error::Shape(format!(
            "spectrum of length {} shorter than model width {width}",
            s.len()
        )));
    }
    if s.len() == width {
        return Ok(s.clone());
    }
    let grid = Arc::new(s.grid.prefix(width)?);
    Spectrum::new(grid, s.intensities[..width].to_vec(), s.label, s.source)
}

/// [`truncate_to`] at the default model width of 2,470.
pub fn truncate_for_model(s: &Spectrum) -> Result<Spectrum> {
    truncate_to(s, MODEL_WIDTH)
}

/// Labeled collection of spectra on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectraSet {
    grid: Arc<WavenumberGrid>,
    spectra: Vec<Spectrum>,
}

impl SpectraSet {
    pub fn new(grid: Arc<WavenumberGrid>, spectra: Vec<Spectrum>) -> Result<Self> {
        for (i, s) in spectra.iter().enumerate() {
            if !Arc::ptr_eq(&s.grid, &grid) && *s.grid != *grid {
                return Err(Error::Shape(format!("spectrum {i} is on a different grid")));
            }
        }
        // Share one allocation for the grid.
        let spectra = spectra
            .into_iter()
            .map(|mut s| {
                s.grid = grid.clone();
                s
            })
            .collect();
        Ok(Self { grid, spectra })
    }

    pub fn empty(grid: Arc<WavenumberGrid>) -> Self {
        Self {
            grid,
            spectra: Vec::new(),
        }
    }

    pub fn grid(&self) -> &Arc<WavenumberGrid> {
        &self.grid
    }

    pub fn spectra(&self) -> &[Spectrum] {
        &self.spectra
    }

    pub fn len(&self) -> usize {
        self.spectra.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spectra.is_empty()
    }

    pub fn width(&self) -> usize {
        self.grid.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Spectrum> {
        self.spectra.iter()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.spectra.iter().map(|s| s.label).collect()
    }

    pub fn features(&self) -> Vec<&[f64]> {
        self.spectra.iter().map(|s| s.intensities()).collect()
    }

    pub fn count(&self, label: Label) -> usize {
        self.spectra.iter().filter(|s| s.label == label).count()
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let spectra = indices
            .iter()
            .map(|&i| {
                self.spectra
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::OutOfRange(format!("index {i} of {}", self.len())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: self.grid.clone(),
            spectra,
        })
    }

    pub fn with_label(&self, label: Label) -> Self {
        Self {
            grid: self.grid.clone(),
            spectra: self
                .spectra
                .iter()
                .filter(|s| s.label == label)
                .cloned()
                .collect(),
        }
    }

    pub fn push(&mut self, s: Spectrum) -> Result<()> {
        if *s.grid != *self.grid {
            return Err(Error::Shape("spectrum is on a different grid".into()));
        }
        self.spectra.push(Spectrum {
            grid: self.grid.clone(),
            ..s
        });
        Ok(())
    }

    pub fn extend(&mut self, other: &SpectraSet) -> Result<()> {
        if *other.grid != *self.grid {
            return Err(Error::Shape("cannot merge sets on different grids".into()));
        }
        for s in &other.spectra {
            self.spectra.push(Spectrum {
                grid: self.grid.clone(),
                ..s.clone()
            });
        }
        Ok(())
    }

    pub fn concat(&self, other: &SpectraSet) -> Result<Self> {
        let mut out = self.clone();
        out.extend(other)?;
        Ok(out)
    }

    pub fn map<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&Spectrum) -> Result<Spectrum>,
    {
        let spectra = self.spectra.iter().map(f).collect::<Result<Vec<_>>>()?;
        let grid = spectra
            .first()
            .map(|s| s.grid.clone())
            .unwrap_or_else(|| self.grid.clone());
        SpectraSet::new(grid, spectra)
    }

    pub fn normalized(&self) -> Result<Self> {
        self.map(min_max_normalize)
    }

    pub fn truncated(&self, width: usize) -> Result<Self> {
        if width == self.width() {
            return Ok(self.clone());
        }
        if width > self.width() {
            return Err(Error::Shape(format!(
                "set of width {} shorter than model width {width}",
                self.width()
            )));
        }
        let grid = Arc::new(self.grid.prefix(width)?);
        let spectra = self
            .spectra
            .iter()
            .map(|s| Spectrum::new(grid.clone(), s.intensities[..width].to_vec(), s.label, s.source))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid, spectra })
    }

    pub fn resampled(&self, target: &Arc<WavenumberGrid>) -> Result<Self> {
        let spectra = self
            .spectra
            .iter()
            .map(|s| resample_to_grid(s, target))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: target.clone(),
            spectra,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadOptions {
    /// Apply min-max normalization to each row after parsing.
    pub normalize: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self { normalize: true }
    }
}

/// Reads a spectra CSV: header `label[,source],<w1>,<w2>,...` followed by
/// one `<pos|neg|unk>[,source],<v1>,...` row per spectrum.
pub fn read_spectra<R: Read>(reader: R, opts: LoadOptions) -> Result<SpectraSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| Error::Format("empty file".into()))??;
    if header.get(0) != Some("label") {
        return Err(Error::Format("first header column must be `label`".into()));
    }
    let has_source = header.get(1) == Some("source");
    let skip = if has_source { 2 } else { 1 };
    let wavenumbers = header
        .iter()
        .skip(skip)
        .enumerate()
        .map(|(i, h)| {
            h.parse::<f64>().map_err(|_| Error::Parse {
                row: 0,
                message: format!("header column {} ({h:?}) is not a wavenumber", i + skip),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let grid = Arc::new(WavenumberGrid::new(wavenumbers)?);

    let mut spectra = Vec::new();
    for (i, rec) in records.enumerate() {
        let row = i + 1;
        let rec = rec?;
        if rec.len() == 1 && rec.get(0).is_some_and(str::is_empty) {
            continue;
        }
        if rec.len() != grid.len() + skip {
            return Err(Error::Parse {
                row,
                message: format!(
                    "expected {} intensity values, found {}",
                    grid.len(),
                    rec.len().saturating_sub(skip)
                ),
            });
        }
        let label: Label = rec[0]
            .parse()
            .map_err(|message| Error::Parse { row, message })?;
        let source = if has_source {
            rec[1].parse().map_err(|message| Error::Parse { row, message })?
        } else {
            Source::Real
        };
        let values = rec
            .iter()
            .skip(skip)
            .enumerate()
            .map(|(col, v)| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::Parse {
                        row,
                        message: format!("non-numeric intensity {v:?} in column {}", col + skip),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut s = Spectrum::new(grid.clone(), values, label, source)?;
        if opts.normalize {
            s = min_max_normalize(&s).map_err(|e| Error::Parse {
                row,
                message: e.to_string(),
            })?;
        }
        spectra.push(s);
    }
    Ok(SpectraSet { grid, spectra })
}

pub fn load_spectra(path: impl AsRef<Path>, opts: LoadOptions) -> Result<SpectraSet> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| Error::from(e).context(format!("opening {}", path.display())))?;
    read_spectra(std::io::BufReader::new(file), opts)
        .map_err(|e| e.context(format!("reading {}", path.display())))
}

/// Loads the outlier corpus; every row must be labeled `neg` and is tagged
/// as coming from the corpus.
pub fn load_outlier_corpus(path: impl AsRef<Path>, opts: LoadOptions) -> Result<SpectraSet> {
    let set = load_spectra(path, opts)?;
    mark_outliers(set)
}

pub fn mark_outliers(set: SpectraSet) -> Result<SpectraSet> {
    let mut spectra = set.spectra;
    for (i, s) in spectra.iter_mut().enumerate() {
        if s.label != Label::Negative {
            return Err(Error::Parse {
                row: i + 1,
                message: format!("outlier corpus rows must be `neg`, found `{}`", s.label),
            });
        }
        s.source = Source::OutlierCorpus;
    }
    Ok(SpectraSet {
        grid: set.grid,
        spectra,
    })
}

/// Writes the CSV format read by [`read_spectra`]. The `source` column is
/// emitted only when some row is not `real` or `with_source` is set.
pub fn write_spectra<W: Write>(writer: W, set: &SpectraSet, with_source: bool) -> Result<()> {
    let with_source = with_source || set.iter().any(|s| s.source != Source::Real);
    let mut w = csv::WriterBuilder::new().from_writer(writer);
    let mut header = vec!["label".to_string()];
    if with_source {
        header.push("source".into());
    }
    header.extend(set.grid.values().iter().map(|v| v.to_string()));
    w.write_record(&header)?;
    for s in set.iter() {
        let mut row = vec![s.label.as_str().to_string()];
        if with_source {
            row.push(s.source.as_str().into());
        }
        row.extend(s.intensities.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_spectra(path: impl AsRef<Path>, set: &SpectraSet, with_source: bool) -> Result<()> {
    let file = std::fs::File::create(path.as_ref())?;
    write_spectra(std::io::BufWriter::new(file), set, with_source)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(grid: &[f64], v: &[f64]) -> Spectrum {
        let g = Arc::new(WavenumberGrid::new(grid.to_vec()).unwrap());
        Spectrum::new(g, v.to_vec(), Label::Positive, Source::Real).unwrap()
    }

    #[test]
    fn normalize_affine() {
        let s = spec(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]);
        assert_eq!(min_max_normalize(&s).unwrap().intensities(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn normalize_identity_on_normalized() {
        let s = spec(&[1.0, 2.0, 3.0], &[0.0, 0.3, 1.0]);
        assert_eq!(min_max_normalize(&s).unwrap().intensities(), &[0.0, 0.3, 1.0]);
    }

    #[test]
    fn normalize_constant_is_degenerate() {
        let s = spec(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]);
        assert!(matches!(min_max_normalize(&s), Err(Error::Degenerate(_))));
    }

    #[test]
    fn grid_must_increase() {
        assert!(WavenumberGrid::new(vec![1.0, 1.0]).is_err());
        assert!(WavenumberGrid::new(vec![1.0]).is_err());
        assert!(WavenumberGrid::new(vec![1.0, 0.5]).is_err());
    }

    #[test]
    fn resample_midpoint() {
        let s = spec(&[0.0, 2.0], &[0.0, 2.0]);
        let target = Arc::new(WavenumberGrid::new(vec![1.0, 1.5]).unwrap());
        let out = resample_to_grid(&s, &target).unwrap();
        assert_eq!(out.intensities(), &[1.0, 1.5]);
    }

    #[test]
    fn resample_identity() {
        let s = spec(&[0.0, 1.0, 5.0, 7.0], &[0.3, 0.1, 0.9, 0.5]);
        let out = resample_to_grid(&s, s.grid()).unwrap();
        assert_eq!(out.intensities(), s.intensities());
    }

    #[test]
    fn resample_rejects_extrapolation() {
        let s = spec(&[0.0, 2.0], &[0.0, 2.0]);
        let target = Arc::new(WavenumberGrid::new(vec![1.0, 2.5]).unwrap());
        assert!(matches!(resample_to_grid(&s, &target), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn resample_outlier_grid_to_principal() {
        let fine = Arc::new(WavenumberGrid::linspace(0.0, 3600.0, 3601).unwrap());
        let values = fine.values().iter().map(|w| (w / 300.0).sin()).collect();
        let s = Spectrum::new(fine, values, Label::Negative, Source::OutlierCorpus).unwrap();
        let principal = Arc::new(WavenumberGrid::linspace(150.0, 3400.0, PRINCIPAL_GRID_LEN).unwrap());
        let out = resample_to_grid(&s, &principal).unwrap();
        assert_eq!(out.len(), 2473);
        for (w, v) in principal.values().iter().zip(out.intensities()) {
            assert!((v - (w / 300.0).sin()).abs() < 1e-4);
        }
    }

    #[test]
    fn truncation() {
        let g: Vec<f64> = (0..2473).map(f64::from).collect();
        let s = spec(&g, &g);
        let t = truncate_for_model(&s).unwrap();
        assert_eq!(t.len(), 2470);
        assert_eq!(t.intensities(), &s.intensities()[..2470]);
        assert_eq!(truncate_for_model(&t).unwrap(), t);
        let small: Vec<f64> = (0..100).map(f64::from).collect();
        let s = spec(&small, &small);
        assert_eq!(truncate_to(&s, 100).unwrap(), s);
        assert!(matches!(truncate_for_model(&s), Err(Error::Shape(_))));
    }

    #[test]
    fn read_small_file() {
        let text = "label,100,200,300,400,500\n\
                    pos,1,2,3,4,5\n\
                    neg,5,4,3,2,1\n\
                    unk,0,1,0,1,0\n";
        let set = read_spectra(text.as_bytes(), LoadOptions::default()).unwrap();
        assert_eq!(set.len(), 3);
        assert_eq!(set.width(), 5);
        assert_eq!(set.labels(), vec![Label::Positive, Label::Negative, Label::Unlabeled]);
        assert_eq!(set.spectra()[0].intensities(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(set.iter().all(Spectrum::is_normalized));
    }

    #[test]
    fn ragged_row_reports_row() {
        let text = "label,1,2,3,4,5\npos,1,2,3,4,5\nneg,1,2,3,4\n";
        match read_spectra(text.as_bytes(), LoadOptions::default()) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_numeric_intensity() {
        let text = "label,1,2\npos,1,abc\n";
        assert!(matches!(
            read_spectra(text.as_bytes(), LoadOptions::default()),
            Err(Error::Parse { row: 1, .. })
        ));
    }

    #[test]
    fn non_monotone_header() {
        let text = "label,1,3,2\npos,1,2,3\n";
        assert!(matches!(
            read_spectra(text.as_bytes(), LoadOptions::default()),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn principal_shaped_file() {
        let grid: Vec<f64> = (0..PRINCIPAL_GRID_LEN).map(|i| 150.0 + i as f64).collect();
        let mut text = String::from("label");
        for w in &grid {
            text.push_str(&format!(",{w}"));
        }
        text.push('\n');
        for r in 0..230 {
            text.push_str(if r < 154 { "pos" } else { "neg" });
            for c in 0..grid.len() {
                text.push_str(&format!(",{}", ((r * 31 + c * 7) % 101) as f64));
            }
            text.push('\n');
        }
        let set = read_spectra(text.as_bytes(), LoadOptions::default()).unwrap();
        assert_eq!(set.len(), 230);
        assert_eq!(set.width(), 2473);
        assert_eq!(set.count(Label::Positive), 154);
    }

    #[test]
    fn roundtrip_with_source_and_outlier_marking() {
        let text = "label,1,2,3\nneg,1,2,3\nneg,3,1,2\n";
        let set = read_spectra(text.as_bytes(), LoadOptions::default()).unwrap();
        let corpus = mark_outliers(set).unwrap();
        assert!(corpus.iter().all(|s| s.source == Source::OutlierCorpus && s.label == Label::Negative));
        let mut buf = Vec::new();
        write_spectra(&mut buf, &corpus, false).unwrap();
        let back = read_spectra(buf.as_slice(), LoadOptions { normalize: false }).unwrap();
        assert_eq!(back, corpus);

        let bad = read_spectra("label,1,2\npos,0,1\n".as_bytes(), LoadOptions::default()).unwrap();
        assert!(mark_outliers(bad).is_err());
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(v in prop::collection::vec(-1e3f64..1e3, 2..40)) {
            let grid: Vec<f64> = (0..v.len()).map(|i| i as f64).collect();
            let s = spec(&grid, &v);
            prop_assume!(v.iter().any(|&x| x != v[0]));
            let once = min_max_normalize(&s).unwrap();
            prop_assert!(once.is_normalized());
            let twice = min_max_normalize(&once).unwrap();
            for (a, b) in once.intensities().iter().zip(twice.intensities()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn resample_recovers_nodes_of_piecewise_linear(
            steps in prop::collection::vec(0.1f64..5.0, 2..20),
            ys in prop::collection::vec(-10f64..10.0, 21),
            mids in prop::collection::vec(0.01f64..0.99, 20),
        ) {
            let mut nodes = vec![0.0];
            for s in &steps {
                nodes.push(nodes.last().unwrap() + s);
            }
            let vals = &ys[..nodes.len()];
            let s = spec(&nodes, vals);
            // Dense grid containing every original node plus interior points.
            let mut dense = Vec::new();
            for i in 0..nodes.len() - 1 {
                dense.push(nodes[i]);
                dense.push(nodes[i] + mids[i] * (nodes[i + 1] - nodes[i]));
            }
            dense.push(*nodes.last().unwrap());
            let dense = Arc::new(WavenumberGrid::new(dense).unwrap());
            let up = resample_to_grid(&s, &dense).unwrap();
            let back = resample_to_grid(&up, s.grid()).unwrap();
            for (a, b) in back.intensities().iter().zip(vals) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
