//! MNIST IDX files and the relabeling pipeline built on them.
//!
//! Layout: a 4-byte big-endian magic (`0x00000801` for labels, `0x00000803`
//! for images), big-endian `u32` dimension sizes, then the raw bytes.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::campaign::{run_campaign, summarize, CampaignResult};
use crate::error::{Error, Result};
use crate::oracle::UniformNoiseOracle;
use crate::policy::Policy;
use crate::types::{Example, LabelId};

pub const LABEL_MAGIC: u32 = 0x0000_0801;
pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const CLASSES: usize = 10;
pub const ROWS: u32 = 28;
pub const COLS: u32 = 28;

pub const LABELS_FILE: &str = "labels-idx1-ubyte";
pub const PROVENANCE_FILE: &str = "provenance.csv";
pub const SUMMARY_FILE: &str = "summary.txt";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdxLabels {
    labels: Vec<u8>,
}

impl IdxLabels {
    pub fn new(labels: Vec<u8>) -> Result<Self> {
        if let Some(pos) = labels.iter().position(|&l| usize::from(l) >= CLASSES) {
            return Err(Error::Idx(format!("label {} at item {pos} is not a digit", labels[pos])));
        }
        Ok(Self { labels })
    }

    pub fn count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.expect_magic(LABEL_MAGIC)?;
        let count = r.u32("item count")? as usize;
        let labels = r.take(count, "labels")?.to_vec();
        r.finish()?;
        Self::new(labels)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.labels.len());
        out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
        out.extend_from_slice(&(self.labels.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.labels);
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdxImages {
    count: usize,
    rows: u32,
    cols: u32,
    pixels: Vec<u8>,
}

impl IdxImages {
    pub fn new(count: usize, pixels: Vec<u8>) -> Result<Self> {
        let expected = count * (ROWS * COLS) as usize;
        if pixels.len() != expected {
            return Err(Error::Idx(format!("{count} images need {expected} pixel bytes, got {}", pixels.len())));
        }
        Ok(Self { count, rows: ROWS, cols: COLS, pixels })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn rows(&self) -> u32 {
        self.rows
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn image(&self, index: usize) -> &[u8] {
        let size = (self.rows * self.cols) as usize;
        &self.pixels[index * size..(index + 1) * size]
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.expect_magic(IMAGE_MAGIC)?;
        let count = r.u32("item count")? as usize;
        let rows = r.u32("row count")?;
        let cols = r.u32("column count")?;
        if (rows, cols) != (ROWS, COLS) {
            return Err(Error::Idx(format!("images must be {ROWS}x{COLS}, header says {rows}x{cols}")));
        }
        let pixels = r.take(count * (rows * cols) as usize, "pixels")?.to_vec();
        r.finish()?;
        Self::new(count, pixels)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.pixels.len());
        for word in [IMAGE_MAGIC, self.count as u32, self.rows, self.cols] {
            out.extend_from_slice(&word.to_be_bytes());
        }
        out.extend_from_slice(&self.pixels);
        out
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::Idx(format!("truncated file: {what} need {n} bytes, {} left", self.bytes.len() - self.pos))
        })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        let b = self.take(4, what)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn expect_magic(&mut self, expected: u32) -> Result<()> {
        let magic = self.u32("magic")?;
        if magic != expected {
            return Err(Error::Idx(format!("wrong magic {magic:#010x}, expected {expected:#010x}")));
        }
        Ok(())
    }

    fn finish(self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::Idx(format!("{} trailing bytes after payload", self.bytes.len() - self.pos)));
        }
        Ok(())
    }
}

pub fn read_idx_labels(path: impl AsRef<Path>) -> Result<IdxLabels> {
    IdxLabels::from_bytes(&fs::read(path)?)
}

pub fn read_idx_images(path: impl AsRef<Path>) -> Result<IdxImages> {
    IdxImages::from_bytes(&fs::read(path)?)
}

pub fn write_idx_labels(path: impl AsRef<Path>, labels: &IdxLabels) -> Result<()> {
    Ok(fs::write(path, labels.to_bytes())?)
}

pub fn write_idx_images(path: impl AsRef<Path>, images: &IdxImages) -> Result<()> {
    Ok(fs::write(path, images.to_bytes())?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelabelOutputs {
    pub labels: PathBuf,
    pub provenance: PathBuf,
    pub summary: PathBuf,
}

/// Relabels a ground-truth label file through a uniform-noise oracle. Item
/// `i` becomes example `i`; output labels keep input order and omit the items
/// the budget did not reach.
pub fn relabel_campaign(
    labels: &IdxLabels,
    noise: f64,
    policy: &Policy,
    s_max: u64,
    master_seed: u64,
) -> Result<CampaignResult> {
    let oracle = UniformNoiseOracle::new(CLASSES, noise)?;
    let examples: Vec<Example> =
        labels.labels().iter().enumerate().map(|(i, &l)| Example::new(i as u64, LabelId(usize::from(l)))).collect();
    run_campaign(&oracle, policy, s_max, &examples, master_seed)
}

/// The assigned labels in example order.
pub fn assigned_labels(result: &CampaignResult) -> IdxLabels {
    let mut rows: Vec<_> = result.labeled.iter().map(|l| (l.example_id, l.assigned_label.index() as u8)).collect();
    rows.sort_by_key(|&(id, _)| id);
    IdxLabels { labels: rows.into_iter().map(|(_, l)| l).collect() }
}

/// Writes the relabeled IDX file, the provenance CSV and the summary into `out_dir`.
pub fn write_relabel_outputs(result: &CampaignResult, out_dir: impl AsRef<Path>) -> Result<RelabelOutputs> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir)?;
    let outputs = RelabelOutputs {
        labels: dir.join(LABELS_FILE),
        provenance: dir.join(PROVENANCE_FILE),
        summary: dir.join(SUMMARY_FILE),
    };
    write_idx_labels(&outputs.labels, &assigned_labels(result))?;
    result.write_csv(BufWriter::new(File::create(&outputs.provenance)?))?;
    let mut summary = File::create(&outputs.summary)?;
    write!(summary, "{}", summarize(result))?;
    Ok(outputs)
}
