//! FRSK1 ground-truth datasets: batch safety solves over the randomized
//! drift family, written in a self-describing binary container.
//!
//! File layout:
//!
//! ```text
//! "FRSK1\n"
//! <manifest JSON, one line>\n
//! <sample records>
//! ```
//!
//! Each successful sample record is one JSON line holding its [`DriftCoeffs`]
//! followed immediately by the field payload: little-endian f32 values in
//! row-major `[T][x1][x2]` order over the full grid (last coordinate fastest,
//! matching [`Grid::flat`]), cells outside the solved region carrying the
//! exterior value. Failed samples occupy no bytes; the manifest records their
//! diagnostics. All manifest offsets are relative to the end of the manifest
//! line, so the header can be rewritten without touching the records, and
//! `payload_sha256` is the SHA-256 of exactly that trailing region.
//!
//! Generation is deterministic in (seed, n_samples): sample i draws its
//! coefficients from the run stream's `"coeffs"` child at index i, solves
//! concurrently, and a single writer emits records in index order, so output
//! bytes do not depend on worker count.

use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{FriskError, Result};
use crate::family::{sample_drift, DriftCoeffs, FamilyParams};
use crate::grid::Grid;
use crate::rng::RngStream;
use crate::solver::{solve_safety, RiskField, RiskKind};
use crate::stable::{SpectralAtom, StableParams, SubordinatorParams};
use crate::system::{Barrier, DriftSpec, SafeSet, SigmaSpec, SystemSpec};

pub const FRSK1_MAGIC: &[u8; 6] = b"FRSK1\n";
pub const FORMAT_VERSION: u32 = 1;

/// Samples solved per parallel batch; bounds writer memory.
const BATCH: u64 = 32;

/// Everything needed to generate one dataset.
#[derive(Debug, Clone)]
pub struct DatasetSpec {
    pub family: FamilyParams,
    pub n_samples: u64,
    pub grid: Grid,
    /// Horizons of the stored time slices; must be positive, strictly
    /// ascending, and aligned to the `dt` lattice.
    pub t_grid: Vec<f64>,
    pub dt: f64,
    pub stable: StableParams,
    pub sub: SubordinatorParams,
    pub sigma: f64,
    pub safe: SafeSet,
    pub seed: u64,
    /// Fraction of samples assigned to the training split.
    pub train_fraction: f64,
}

impl DatasetSpec {
    /// The paper's generation setup on `[0, 1]^2`: alpha = 1.5, beta = 0.7,
    /// symmetric axis atoms, safe set {x1 < 1, x2 < 1}, 33 cells and 33
    /// stored horizons per axis of the space-time cube.
    pub fn section_vb_default(n_samples: u64, seed: u64) -> DatasetSpec {
        let n = 33;
        let dt = 1.0 / n as f64;
        DatasetSpec {
            family: FamilyParams::default(),
            n_samples,
            grid: Grid::new_2d(
                crate::grid::GridDim::new(0.0, 1.0, n).unwrap(),
                crate::grid::GridDim::new(0.0, 1.0, n).unwrap(),
            )
            .unwrap(),
            t_grid: (1..=n).map(|k| k as f64 * dt).collect(),
            dt,
            stable: StableParams::new(
                1.5,
                vec![
                    SpectralAtom::new(vec![1.0, 0.0], 0.25),
                    SpectralAtom::new(vec![-1.0, 0.0], 0.25),
                    SpectralAtom::new(vec![0.0, 1.0], 0.25),
                    SpectralAtom::new(vec![0.0, -1.0], 0.25),
                ],
            )
            .unwrap(),
            sub: SubordinatorParams::new(0.7).unwrap(),
            sigma: 0.2,
            safe: SafeSet::new(Barrier::BelowAll { hi: vec![1.0, 1.0] }).unwrap(),
            seed,
            train_fraction: 0.8,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(FriskError::Config("n_samples must be >= 1".into()));
        }
        if self.t_grid.is_empty() {
            return Err(FriskError::Config("t_grid must be nonempty".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(FriskError::Config(format!(
                "train fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if self.grid.dim() != 2 || self.stable.dim() != 2 {
            return Err(FriskError::Config(
                "dataset generation is defined for 2D systems".into(),
            ));
        }
        Ok(())
    }
}

/// Location of one sample inside the record region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEntry {
    pub index: u64,
    /// Byte offset of the record, relative to the end of the manifest line.
    pub offset: u64,
    /// Record length (coefficient line + payload); 0 iff the sample failed.
    pub len: u64,
    /// Solver diagnostics when generation of this sample failed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Self-describing header of an FRSK1 file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub kind: RiskKind,
    pub n_samples: u64,
    pub grid: Grid,
    pub t_grid: Vec<f64>,
    pub dt: f64,
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub atoms: Vec<SpectralAtom>,
    pub barrier: Barrier,
    pub family: FamilyParams,
    pub seed: u64,
    /// Sample indices of the training split, ascending. Failed samples keep
    /// their split assignment; readers should intersect with the successes.
    pub train: Vec<u64>,
    /// Sample indices of the test split, ascending.
    pub test: Vec<u64>,
    pub samples: Vec<SampleEntry>,
    /// SHA-256 (hex) of every byte after the manifest line.
    pub payload_sha256: String,
}

impl DatasetManifest {
    pub fn n_failed(&self) -> usize {
        self.samples.iter().filter(|s| s.error.is_some()).count()
    }
}

/// One sample read back from an FRSK1 file, exactly as stored.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredSample {
    pub index: u64,
    pub coeffs: DriftCoeffs,
    /// values[ti][flat grid cell], in file precision.
    pub values: Vec<Vec<f32>>,
}

/// Flattens a solved field onto the full grid, exterior value outside the
/// region, slices ordered as in the file payload.
fn densify(field: &RiskField, grid: &Grid) -> Vec<Vec<f64>> {
    let n = grid.num_cells();
    (0..field.t_grid().len())
        .map(|ti| (0..n).map(|flat| field.at_cell(flat, ti)).collect())
        .collect()
}

/// Deterministic shuffle-based split of 0..n into (train, test), both sorted.
fn split_indices(n: u64, train_fraction: f64, stream: &RngStream) -> (Vec<u64>, Vec<u64>) {
    use rand::seq::SliceRandom;
    let mut idx: Vec<u64> = (0..n).collect();
    idx.shuffle(&mut stream.rng());
    let n_train = ((n as f64 * train_fraction).round() as usize).clamp(1, idx.len());
    let mut train = idx[..n_train.min(idx.len())].to_vec();
    let mut test = idx[n_train.min(idx.len())..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

fn encode_record(coeffs: &DriftCoeffs, values: &[Vec<f64>]) -> Result<Vec<u8>> {
    let mut block = serde_json::to_vec(coeffs)
        .map_err(|e| FriskError::DatasetIo(format!("coefficient encoding failed: {e}")))?;
    block.push(b'\n');
    for slice in values {
        for &v in slice {
            block.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    Ok(block)
}

/// Solves the safety field for one sampled drift and densifies it.
fn solve_sample(spec: &DatasetSpec, coeffs: &DriftCoeffs) -> Result<Vec<Vec<f64>>> {
    let sys = SystemSpec::new(
        DriftSpec::Coeffs(coeffs.clone()),
        SigmaSpec::Constant(spec.sigma),
        spec.stable.clone(),
        spec.sub,
    )?;
    let field = solve_safety(&sys, &spec.grid, &spec.safe, &spec.t_grid, spec.dt)?;
    Ok(densify(&field, &spec.grid))
}

/// Generates the dataset at `out_path` and returns its manifest.
pub fn generate_dataset(spec: &DatasetSpec, out_path: &Path) -> Result<DatasetManifest> {
    generate_with(spec, out_path, |_, coeffs| solve_sample(spec, coeffs))
}

/// Generation skeleton with an injectable per-sample solver; the production
/// path and the failure-handling tests share it.
fn generate_with<F>(spec: &DatasetSpec, out_path: &Path, solve: F) -> Result<DatasetManifest>
where
    F: Fn(u64, &DriftCoeffs) -> Result<Vec<Vec<f64>>> + Sync,
{
    spec.validate()?;
    let run = RngStream::new(spec.seed);
    let coeff_stream = run.named("coeffs");
    let (train, test) = split_indices(spec.n_samples, spec.train_fraction, &run.named("split"));

    let tmp_path = out_path.with_extension("frsk1.tmp");
    let tmp = fs::OpenOptions::new()
        .read(true)
        .write(true)
        .create(true)
        .truncate(true)
        .open(&tmp_path)?;
    let mut writer = BufWriter::new(tmp);
    let mut hasher = Sha256::new();
    let mut offset = 0u64;
    let mut entries = Vec::with_capacity(spec.n_samples as usize);

    let mut batch_start = 0u64;
    while batch_start < spec.n_samples {
        let batch_end = (batch_start + BATCH).min(spec.n_samples);
        let blocks: Vec<(DriftCoeffs, Result<Vec<u8>>)> = (batch_start..batch_end)
            .into_par_iter()
            .map(|i| {
                let mut rng = coeff_stream.child(i).rng();
                let coeffs = match sample_drift(&spec.family, &mut rng) {
                    Ok(c) => c,
                    Err(e) => return (DriftCoeffs::Ood, Err(e)),
                };
                let block = solve(i, &coeffs).and_then(|values| encode_record(&coeffs, &values));
                (coeffs, block)
            })
            .collect();
        for (i, (_, block)) in (batch_start..batch_end).zip(blocks) {
            match block {
                Ok(bytes) => {
                    writer.write_all(&bytes)?;
                    hasher.update(&bytes);
                    entries.push(SampleEntry {
                        index: i,
                        offset,
                        len: bytes.len() as u64,
                        error: None,
                    });
                    offset += bytes.len() as u64;
                }
                Err(e) => {
                    entries.push(SampleEntry {
                        index: i,
                        offset,
                        len: 0,
                        error: Some(e.to_string()),
                    });
                }
            }
        }
        batch_start = batch_end;
    }
    writer.flush()?;
    let mut tmp = writer
        .into_inner()
        .map_err(|e| FriskError::DatasetIo(format!("payload flush failed: {e}")))?;

    let manifest = DatasetManifest {
        format_version: FORMAT_VERSION,
        kind: RiskKind::Safety,
        n_samples: spec.n_samples,
        grid: spec.grid.clone(),
        t_grid: spec.t_grid.clone(),
        dt: spec.dt,
        alpha: spec.stable.alpha(),
        beta: spec.sub.beta(),
        sigma: spec.sigma,
        atoms: spec.stable.atoms().to_vec(),
        barrier: spec.safe.barrier().clone(),
        family: spec.family.clone(),
        seed: spec.seed,
        train,
        test,
        samples: entries,
        payload_sha256: hex::encode(hasher.finalize()),
    };

    let out = File::create(out_path)?;
    let mut out = BufWriter::new(out);
    out.write_all(FRSK1_MAGIC)?;
    serde_json::to_writer(&mut out, &manifest)
        .map_err(|e| FriskError::DatasetIo(format!("manifest encoding failed: {e}")))?;
    out.write_all(b"\n")?;
    tmp.seek(SeekFrom::Start(0))?;
    io::copy(&mut tmp, &mut out)?;
    out.flush()?;
    drop(tmp);
    fs::remove_file(&tmp_path)?;
    Ok(manifest)
}

/// Slack for invariants re-checked on stored f32 values: rounding each f64
/// to f32 can perturb a slice value by about 6e-8, so exact-solve margins
/// below that are not distinguishable after a round trip.
const F32_SLACK: f64 = 1e-6;

fn validate_stored(kind: RiskKind, index: u64, values: &[Vec<f32>]) -> Result<()> {
    for (ti, slice) in values.iter().enumerate() {
        for (cell, &v) in slice.iter().enumerate() {
            let v = v as f64;
            if !v.is_finite() || v < -F32_SLACK || v > 1.0 + F32_SLACK {
                return Err(FriskError::InvariantViolation(format!(
                    "sample {index}: value {v} at slice {ti}, cell {cell} is out of [0, 1]"
                )));
            }
        }
    }
    for ti in 1..values.len() {
        for cell in 0..values[ti].len() {
            let prev = values[ti - 1][cell] as f64;
            let cur = values[ti][cell] as f64;
            let bad = match kind {
                RiskKind::Safety => cur > prev + F32_SLACK,
                RiskKind::Recovery => cur < prev - F32_SLACK,
            };
            if bad {
                return Err(FriskError::InvariantViolation(format!(
                    "sample {index}: {kind:?} field not monotone at slice {ti}, cell {cell}: {prev} -> {cur}"
                )));
            }
        }
    }
    Ok(())
}

/// Reads an FRSK1 file, verifying the digest, record geometry, and the field
/// invariants of every stored sample. Failed samples are skipped (their
/// diagnostics stay in the manifest).
pub fn read_dataset(path: &Path) -> Result<(DatasetManifest, Vec<StoredSample>)> {
    let mut file = File::open(path)?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes)?;
    if bytes.len() < FRSK1_MAGIC.len() || &bytes[..FRSK1_MAGIC.len()] != FRSK1_MAGIC {
        return Err(FriskError::DatasetIo("not an FRSK1 file".into()));
    }
    let rest = &bytes[FRSK1_MAGIC.len()..];
    let header_end = rest
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| FriskError::DatasetIo("missing manifest line".into()))?;
    let manifest: DatasetManifest = serde_json::from_slice(&rest[..header_end])
        .map_err(|e| FriskError::DatasetIo(format!("manifest parse failed: {e}")))?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(FriskError::DatasetIo(format!(
            "unsupported format version {}",
            manifest.format_version
        )));
    }
    let payload = &rest[header_end + 1..];
    let digest = hex::encode(Sha256::digest(payload));
    if digest != manifest.payload_sha256 {
        return Err(FriskError::DatasetIo(format!(
            "payload digest mismatch: manifest {}, file {digest}",
            manifest.payload_sha256
        )));
    }

    let n_t = manifest.t_grid.len();
    let n_cells = manifest.grid.num_cells();
    let mut samples = Vec::new();
    for entry in &manifest.samples {
        if entry.error.is_some() {
            continue;
        }
        let start = entry.offset as usize;
        let end = start + entry.len as usize;
        if end > payload.len() {
            return Err(FriskError::DatasetIo(format!(
                "sample {} record overruns the payload",
                entry.index
            )));
        }
        let record = &payload[start..end];
        let coeff_end = record
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| {
                FriskError::DatasetIo(format!("sample {}: missing coefficient line", entry.index))
            })?;
        let coeffs: DriftCoeffs = serde_json::from_slice(&record[..coeff_end])
            .map_err(|e| {
                FriskError::DatasetIo(format!("sample {}: coefficient parse failed: {e}", entry.index))
            })?;
        let floats = &record[coeff_end + 1..];
        if floats.len() != n_t * n_cells * 4 {
            return Err(FriskError::DatasetIo(format!(
                "sample {}: payload holds {} bytes, expected {}",
                entry.index,
                floats.len(),
                n_t * n_cells * 4
            )));
        }
        let values: Vec<Vec<f32>> = (0..n_t)
            .map(|ti| {
                let base = ti * n_cells * 4;
                (0..n_cells)
                    .map(|c| {
                        let o = base + c * 4;
                        f32::from_le_bytes([floats[o], floats[o + 1], floats[o + 2], floats[o + 3]])
                    })
                    .collect()
            })
            .collect();
        validate_stored(manifest.kind, entry.index, &values)?;
        samples.push(StoredSample {
            index: entry.index,
            coeffs,
            values,
        });
    }
    Ok((manifest, samples))
}
