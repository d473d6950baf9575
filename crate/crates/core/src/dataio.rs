//! Datasets: MNIST IDX files, labeled CSV and synthetic Gaussian blobs.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::seed;

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Feature rows with integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// One row per sample.
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    pub class_count: usize,
}

impl Dataset {
    pub fn new(features: Array2<f64>, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::Format(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if let Some(l) = labels.iter().find(|&&l| l >= class_count) {
            return Err(Error::Format(format!("label {l} outside 0..{class_count}")));
        }
        Ok(Self {
            features,
            labels,
            class_count,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_count: self.class_count,
        }
    }

    /// Seeded shuffle, then the first `ceil(len * (1 - test_fraction))`
    /// samples train and the rest test.
    pub fn split(&self, test_fraction: f64, seed_value: u64) -> Result<(Dataset, Dataset)> {
        if !(0.0..1.0).contains(&test_fraction) {
            return Err(Error::InvalidParameter(format!(
                "test_fraction must be in [0, 1), got {test_fraction}"
            )));
        }
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.shuffle(&mut seed::rng(seed::derive(
            seed_value,
            seed::TAG_SPLIT,
            0,
            0,
        )));
        let n_test = (self.len() as f64 * test_fraction).floor() as usize;
        let (train, test) = idx.split_at(self.len() - n_test);
        Ok((self.subset(train), self.subset(test)))
    }

    /// First `limit` samples (all if fewer).
    pub fn truncate(&self, limit: usize) -> Dataset {
        let idx: Vec<usize> = (0..self.len().min(limit)).collect();
        self.subset(&idx)
    }
}

fn read_u32(bytes: &[u8], offset: usize, what: &str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Format(format!("{what}: truncated header")))
}

/// Decodes an IDX image/label pair held in memory.
pub fn parse_idx(images: &[u8], labels: &[u8]) -> Result<Dataset> {
    let magic = read_u32(images, 0, "images")?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::Format(format!(
            "images: bad magic {magic:#010x}, expected {IDX_IMAGES_MAGIC:#010x}"
        )));
    }
    let count = read_u32(images, 4, "images")? as usize;
    let rows = read_u32(images, 8, "images")? as usize;
    let cols = read_u32(images, 12, "images")? as usize;
    let magic = read_u32(labels, 0, "labels")?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::Format(format!(
            "labels: bad magic {magic:#010x}, expected {IDX_LABELS_MAGIC:#010x}"
        )));
    }
    let label_count = read_u32(labels, 4, "labels")? as usize;
    if label_count != count {
        return Err(Error::Format(format!(
            "{count} images but {label_count} labels"
        )));
    }
    let dim = rows * cols;
    let pixels = images.get(16..16 + count * dim).ok_or_else(|| {
        Error::Format(format!(
            "images: truncated, expected {count} x {dim} pixel bytes"
        ))
    })?;
    let label_bytes = labels
        .get(8..8 + count)
        .ok_or_else(|| Error::Format(format!("labels: truncated, expected {count} label bytes")))?;
    let features = Array2::from_shape_vec(
        (count, dim),
        pixels.iter().map(|&p| p as f64 / 255.0).collect(),
    )
    .expect("shape matches length");
    let labels: Vec<usize> = label_bytes.iter().map(|&l| l as usize).collect();
    let class_count = labels.iter().max().map_or(0, |m| m + 1);
    Dataset::new(features, labels, class_count)
}

pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let images = fs::read(images_path)?;
    let labels = fs::read(labels_path)?;
    parse_idx(&images, &labels)
}

/// Encodes a dataset as an IDX pair; features are scaled by 255 and rounded
/// to bytes, images written as `rows x cols`.
pub fn encode_idx(data: &Dataset, rows: usize, cols: usize) -> Result<(Vec<u8>, Vec<u8>)> {
    if rows * cols != data.dim() {
        return Err(Error::InvalidParameter(format!(
            "{rows}x{cols} images do not match feature dimension {}",
            data.dim()
        )));
    }
    if let Some(l) = data.labels.iter().find(|&&l| l > 255) {
        return Err(Error::InvalidParameter(format!(
            "label {l} does not fit in a byte"
        )));
    }
    let count = data.len() as u32;
    let mut images = Vec::with_capacity(16 + data.len() * data.dim());
    for word in [IDX_IMAGES_MAGIC, count, rows as u32, cols as u32] {
        images.extend_from_slice(&word.to_be_bytes());
    }
    images.extend(
        data.features
            .iter()
            .map(|&x| (x * 255.0).round().clamp(0.0, 255.0) as u8),
    );
    let mut labels = Vec::with_capacity(8 + data.len());
    labels.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    labels.extend_from_slice(&count.to_be_bytes());
    labels.extend(data.labels.iter().map(|&l| l as u8));
    Ok((images, labels))
}

pub fn write_idx(
    data: &Dataset,
    rows: usize,
    cols: usize,
    images_path: &Path,
    labels_path: &Path,
) -> Result<()> {
    let (images, labels) = encode_idx(data, rows, cols)?;
    fs::File::create(images_path)?.write_all(&images)?;
    fs::File::create(labels_path)?.write_all(&labels)?;
    Ok(())
}

/// Reads `label,px0,px1,...` rows (header required); pixels are scaled by 1/255.
pub fn load_csv(path: &Path) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?
        .clone();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(Error::Format(format!("{}: empty file", path.display())));
    }
    let width = headers.len();
    if width < 2 {
        return Err(Error::Format(
            "csv needs a label column and at least one pixel column".into(),
        ));
    }
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        // Row 1 is the header.
        let row = i + 2;
        let record = record.map_err(|e| Error::Format(format!("row {row}: {e}")))?;
        if record.len() != width {
            return Err(Error::Format(format!(
                "row {row}: expected {width} columns, found {}",
                record.len()
            )));
        }
        let label: usize = record[0].trim().parse().map_err(|_| {
            Error::Format(format!(
                "row {row}: label `{}` is not a non-negative integer",
                &record[0]
            ))
        })?;
        labels.push(label);
        for (c, cell) in record.iter().enumerate().skip(1) {
            let v: f64 = cell.trim().parse().map_err(|_| {
                Error::Format(format!(
                    "row {row}, column {}: `{cell}` is not numeric",
                    c + 1
                ))
            })?;
            values.push(v / 255.0);
        }
    }
    if labels.is_empty() {
        return Err(Error::Format(format!("{}: no data rows", path.display())));
    }
    let features = Array2::from_shape_vec((labels.len(), width - 1), values).expect("rows checked");
    let class_count = labels.iter().max().map_or(0, |m| m + 1);
    Dataset::new(features, labels, class_count)
}

/// Gaussian blobs: class c is centered at a random direction scaled to
/// length 3, and each sample adds `spread` times standard normal noise.
pub fn synth_blobs(
    d: usize,
    classes: usize,
    per_class: usize,
    spread: f64,
    seed_value: u64,
) -> Result<Dataset> {
    if d == 0 || classes < 2 {
        return Err(Error::InvalidParameter(format!(
            "synthetic blobs need d >= 1 and classes >= 2, got d={d}, classes={classes}"
        )));
    }
    let mut rng = seed::rng(seed_value);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let centers: Vec<Vec<f64>> = (0..classes)
        .map(|_| {
            let v: Vec<f64> = (0..d).map(|_| normal()).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            v.iter().map(|x| 3.0 * x / norm).collect()
        })
        .collect();
    let total = classes * per_class;
    let mut values = Vec::with_capacity(total * d);
    let mut labels = Vec::with_capacity(total);
    for i in 0..total {
        let c = i % classes;
        labels.push(c);
        for x in &centers[c] {
            values.push(x + spread * normal());
        }
    }
    let features = Array2::from_shape_vec((total, d), values).expect("sized above");
    Dataset::new(features, labels, classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn fixture_bytes(count: usize) -> (Vec<u8>, Vec<u8>) {
        let mut images = Vec::new();
        for w in [0x803u32, count as u32, 28, 28] {
            images.extend_from_slice(&w.to_be_bytes());
        }
        for i in 0..count * 784 {
            images.push((i % 256) as u8);
        }
        let mut labels = Vec::new();
        for w in [0x801u32, count as u32] {
            labels.extend_from_slice(&w.to_be_bytes());
        }
        labels.extend((0..count).map(|i| (i % 10) as u8));
        (images, labels)
    }

    #[test]
    fn idx_two_image_fixture() {
        let (images, labels) = fixture_bytes(2);
        assert_eq!(images.len(), 16 + 2 * 784);
        let d = parse_idx(&images, &labels).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.dim(), 784);
        assert_eq!(d.labels, vec![0, 1]);
        assert_eq!(d.features[[0, 255]], 1.0);
        assert_eq!(d.features[[0, 0]], 0.0);
        assert!(d.features.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn idx_errors() {
        let (mut images, labels) = fixture_bytes(2);
        images[3] = 0x02;
        assert!(
            matches!(parse_idx(&images, &labels), Err(Error::Format(m)) if m.contains("magic"))
        );

        let (images, mut labels) = fixture_bytes(2);
        labels[7] = 3;
        assert!(
            matches!(parse_idx(&images, &labels), Err(Error::Format(m)) if m.contains("labels"))
        );

        let (images, labels) = fixture_bytes(2);
        assert!(
            matches!(parse_idx(&images[..100], &labels), Err(Error::Format(m)) if m.contains("truncated"))
        );
        assert!(parse_idx(&images, &labels[..9]).is_err());
    }

    #[test]
    fn idx_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let (images, labels) = fixture_bytes(3);
        let d = parse_idx(&images, &labels).unwrap();
        let (ip, lp) = (dir.path().join("i"), dir.path().join("l"));
        write_idx(&d, 28, 28, &ip, &lp).unwrap();
        assert_eq!(fs::read(&ip).unwrap(), images);
        assert_eq!(load_idx(&ip, &lp).unwrap(), d);
    }

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn csv_examples() {
        let f = write_tmp("label,px0,px1\n3,0,255\n");
        let d = load_csv(f.path()).unwrap();
        assert_eq!(d.labels, vec![3]);
        assert_eq!(d.features.row(0).to_vec(), vec![0.0, 1.0]);

        let f = write_tmp("");
        assert!(load_csv(f.path()).is_err());

        let f = write_tmp("label,px0,px1\n1,0,0\n2,0\n");
        let err = load_csv(f.path()).unwrap_err().to_string();
        assert!(err.contains("row 3"), "{err}");

        let f = write_tmp("label,px0\n1,abc\n");
        let err = load_csv(f.path()).unwrap_err().to_string();
        assert!(err.contains("row 2"), "{err}");
    }

    #[test]
    fn blobs() {
        let d = synth_blobs(2, 2, 50, 0.5, 1).unwrap();
        assert_eq!(d.len(), 100);
        assert_eq!(d.labels.iter().filter(|&&l| l == 0).count(), 50);
        assert_eq!(d, synth_blobs(2, 2, 50, 0.5, 1).unwrap());

        let d = synth_blobs(3, 4, 5, 0.0, 2).unwrap();
        for c in 0..4 {
            let rows: Vec<_> = (0..d.len())
                .filter(|&i| d.labels[i] == c)
                .map(|i| d.features.row(i).to_vec())
                .collect();
            assert!(rows.windows(2).all(|w| w[0] == w[1]));
        }
        assert!(synth_blobs(2, 1, 5, 0.1, 0).is_err());
    }

    #[test]
    fn split_is_a_partition() {
        let d = synth_blobs(2, 2, 50, 0.5, 1).unwrap();
        let (train, test) = d.split(0.2, 9).unwrap();
        assert_eq!((train.len(), test.len()), (80, 20));
        assert!(d.split(1.0, 9).is_err());
    }
}
