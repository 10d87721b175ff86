//! Dataset ingestion, sampling, exact ground truth, and recall.
//!
//! Supported on-disk vector formats:
//! - `fvecs`: per record, a little-endian u32 dimension followed by that many f32s.
//! - `bvecs`: per record, a little-endian u32 dimension followed by that many u8s.
//! - `raw_bin`: a 13-byte little-endian header (count u64, dims u32, scalar u8)
//!   followed by row-major data.
//!
//! Ground truth files store `k: u32` then, per query, `k` u32 ids followed by
//! `k` f32 distances, all little-endian.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::{cmp_dist_id, normalize_f32, Metric};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scalar {
    U8,
    F32,
}

impl Scalar {
    pub fn size(self) -> usize {
        match self {
            Scalar::U8 => 1,
            Scalar::F32 => 4,
        }
    }

    pub fn to_u8(self) -> u8 {
        match self {
            Scalar::U8 => 0,
            Scalar::F32 => 1,
        }
    }

    pub fn from_u8(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Scalar::U8),
            1 => Ok(Scalar::F32),
            _ => Err(Error::malformed(format!("unknown scalar code {v}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FileFormat {
    Fvecs,
    Bvecs,
    RawBin,
}

impl FileFormat {
    /// Guess the format from a file extension; `.bin` means `raw_bin`.
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("fvecs") => Ok(FileFormat::Fvecs),
            Some("bvecs") => Ok(FileFormat::Bvecs),
            Some("bin") => Ok(FileFormat::RawBin),
            other => Err(Error::invalid(format!(
                "cannot infer dataset format from extension {other:?}; pass it explicitly"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
enum VectorData {
    U8(Vec<u8>),
    F32(Vec<f32>),
}

/// Dense fixed-dimension vectors with a metric. Immutable after load; cosine
/// datasets are stored L2-normalized so cosine reduces to inner product.
#[derive(Debug, Clone)]
pub struct VectorDataset {
    dims: usize,
    metric: Metric,
    data: VectorData,
}

impl VectorDataset {
    pub fn from_f32(dims: usize, metric: Metric, mut data: Vec<f32>) -> Result<Self> {
        if dims == 0 || data.is_empty() || data.len() % dims != 0 {
            return Err(Error::malformed("vector data length is not a multiple of dims"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::malformed("dataset contains non-finite values"));
        }
        if metric == Metric::Cosine {
            for row in data.chunks_mut(dims) {
                normalize_f32(row)?;
            }
        }
        Ok(VectorDataset { dims, metric, data: VectorData::F32(data) })
    }

    pub fn from_u8(dims: usize, metric: Metric, data: Vec<u8>) -> Result<Self> {
        if dims == 0 || data.is_empty() || data.len() % dims != 0 {
            return Err(Error::malformed("vector data length is not a multiple of dims"));
        }
        if metric == Metric::Cosine {
            // Normalization forces f32 storage.
            let as_f32: Vec<f32> = data.iter().map(|&v| v as f32).collect();
            return VectorDataset::from_f32(dims, metric, as_f32);
        }
        Ok(VectorDataset { dims, metric, data: VectorData::U8(data) })
    }

    pub fn count(&self) -> usize {
        match &self.data {
            VectorData::U8(v) => v.len() / self.dims,
            VectorData::F32(v) => v.len() / self.dims,
        }
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn scalar(&self) -> Scalar {
        match &self.data {
            VectorData::U8(_) => Scalar::U8,
            VectorData::F32(_) => Scalar::F32,
        }
    }

    /// Bytes per stored vector.
    pub fn vector_size(&self) -> usize {
        self.dims * self.scalar().size()
    }

    pub fn row_f32(&self, id: u32) -> Vec<f32> {
        let mut out = vec![0.0; self.dims];
        self.row_f32_into(id, &mut out);
        out
    }

    pub fn row_f32_into(&self, id: u32, out: &mut [f32]) {
        let s = id as usize * self.dims;
        match &self.data {
            VectorData::U8(v) => {
                for (o, &b) in out.iter_mut().zip(&v[s..s + self.dims]) {
                    *o = b as f32;
                }
            }
            VectorData::F32(v) => out.copy_from_slice(&v[s..s + self.dims]),
        }
    }

    /// Serialize row `id` into `out` as little-endian scalar bytes.
    pub fn write_row_le(&self, id: u32, out: &mut [u8]) {
        let s = id as usize * self.dims;
        match &self.data {
            VectorData::U8(v) => out[..self.dims].copy_from_slice(&v[s..s + self.dims]),
            VectorData::F32(v) => {
                for (chunk, val) in out.chunks_exact_mut(4).zip(&v[s..s + self.dims]) {
                    chunk.copy_from_slice(&val.to_le_bytes());
                }
            }
        }
    }

    /// Decode a row previously serialized with [`write_row_le`](Self::write_row_le).
    pub fn decode_row_le(scalar: Scalar, dims: usize, bytes: &[u8]) -> Vec<f32> {
        match scalar {
            Scalar::U8 => bytes[..dims].iter().map(|&b| b as f32).collect(),
            Scalar::F32 => bytes[..dims * 4]
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect(),
        }
    }

    /// Distance from an f32 query to row `id` under the dataset metric.
    #[inline]
    pub fn dist_to(&self, query: &[f32], id: u32) -> f32 {
        let s = id as usize * self.dims;
        match &self.data {
            VectorData::U8(v) => self.metric.dist_f32_u8(query, &v[s..s + self.dims]),
            VectorData::F32(v) => self.metric.dist_f32(query, &v[s..s + self.dims]),
        }
    }

    /// Distance between two stored rows.
    #[inline]
    pub fn dist_between(&self, a: u32, b: u32) -> f32 {
        match &self.data {
            VectorData::U8(v) => {
                let ra = &v[a as usize * self.dims..(a as usize + 1) * self.dims];
                // Promote one side; u8 values are exact in f32.
                let qa: Vec<f32> = ra.iter().map(|&x| x as f32).collect();
                self.dist_to(&qa, b)
            }
            VectorData::F32(v) => {
                let ra = &v[a as usize * self.dims..(a as usize + 1) * self.dims];
                self.dist_to(ra, b)
            }
        }
    }

    /// Coordinate-wise mean, accumulated in f64.
    pub fn mean(&self) -> Vec<f32> {
        let mut acc = vec![0.0f64; self.dims];
        let n = self.count();
        for id in 0..n as u32 {
            let s = id as usize * self.dims;
            match &self.data {
                VectorData::U8(v) => {
                    for (a, &b) in acc.iter_mut().zip(&v[s..s + self.dims]) {
                        *a += b as f64;
                    }
                }
                VectorData::F32(v) => {
                    for (a, &b) in acc.iter_mut().zip(&v[s..s + self.dims]) {
                        *a += b as f64;
                    }
                }
            }
        }
        acc.into_iter().map(|a| (a / n as f64) as f32).collect()
    }

    /// All rows as f32, one `Vec` per row. Intended for small query sets.
    pub fn rows_f32(&self) -> Vec<Vec<f32>> {
        (0..self.count() as u32).map(|i| self.row_f32(i)).collect()
    }
}

pub fn load_dataset(path: &Path, format: FileFormat, metric: Metric) -> Result<VectorDataset> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.is_empty() {
        return Err(Error::malformed(format!("{}: zero-length file", path.display())));
    }
    match format {
        FileFormat::Fvecs => {
            let (dims, count, payload) = parse_vecs(&bytes, 4, path)?;
            let mut data = Vec::with_capacity(count * dims);
            for rec in 0..count {
                let base = rec * (4 + dims * 4) + 4;
                for d in 0..dims {
                    let off = base + d * 4;
                    data.push(f32::from_le_bytes([
                        payload[off],
                        payload[off + 1],
                        payload[off + 2],
                        payload[off + 3],
                    ]));
                }
            }
            VectorDataset::from_f32(dims, metric, data)
        }
        FileFormat::Bvecs => {
            let (dims, count, payload) = parse_vecs(&bytes, 1, path)?;
            let mut data = Vec::with_capacity(count * dims);
            for rec in 0..count {
                let base = rec * (4 + dims) + 4;
                data.extend_from_slice(&payload[base..base + dims]);
            }
            VectorDataset::from_u8(dims, metric, data)
        }
        FileFormat::RawBin => {
            if bytes.len() < 13 {
                return Err(Error::malformed("raw_bin file shorter than its header"));
            }
            let count = u64::from_le_bytes(bytes[0..8].try_into().unwrap()) as usize;
            let dims = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
            let scalar = Scalar::from_u8(bytes[12])?;
            if count == 0 || dims == 0 {
                return Err(Error::malformed("raw_bin header declares an empty dataset"));
            }
            let expect = 13 + count * dims * scalar.size();
            if bytes.len() != expect {
                return Err(Error::malformed(format!(
                    "raw_bin size mismatch: header implies {expect} bytes, file has {}",
                    bytes.len()
                )));
            }
            let payload = &bytes[13..];
            match scalar {
                Scalar::U8 => VectorDataset::from_u8(dims, metric, payload.to_vec()),
                Scalar::F32 => {
                    let data = payload
                        .chunks_exact(4)
                        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                        .collect();
                    VectorDataset::from_f32(dims, metric, data)
                }
            }
        }
    }
}

/// Validate an fvecs/bvecs byte stream: consistent per-record dims, whole records.
fn parse_vecs<'a>(bytes: &'a [u8], elem: usize, path: &Path) -> Result<(usize, usize, &'a [u8])> {
    if bytes.len() < 4 {
        return Err(Error::malformed(format!("{}: truncated record header", path.display())));
    }
    let dims = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    if dims == 0 || dims > 1 << 20 {
        return Err(Error::malformed(format!("{}: implausible dimension {dims}", path.display())));
    }
    let rec = 4 + dims * elem;
    if bytes.len() % rec != 0 {
        return Err(Error::malformed(format!(
            "{}: file length {} is not a multiple of record size {rec}",
            path.display(),
            bytes.len()
        )));
    }
    let count = bytes.len() / rec;
    for r in 0..count {
        let d = u32::from_le_bytes(bytes[r * rec..r * rec + 4].try_into().unwrap()) as usize;
        if d != dims {
            return Err(Error::malformed(format!(
                "{}: record {r} declares dim {d}, expected {dims}",
                path.display()
            )));
        }
    }
    Ok((dims, count, bytes))
}

pub fn write_raw_bin(ds: &VectorDataset, path: &Path) -> Result<()> {
    let mut out = Vec::with_capacity(13 + ds.count() * ds.vector_size());
    out.extend_from_slice(&(ds.count() as u64).to_le_bytes());
    out.extend_from_slice(&(ds.dims() as u32).to_le_bytes());
    out.push(ds.scalar().to_u8());
    let mut row = vec![0u8; ds.vector_size()];
    for id in 0..ds.count() as u32 {
        ds.write_row_le(id, &mut row);
        out.extend_from_slice(&row);
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn write_fvecs(ds: &VectorDataset, path: &Path) -> Result<()> {
    let mut out = Vec::new();
    for id in 0..ds.count() as u32 {
        out.extend_from_slice(&(ds.dims() as u32).to_le_bytes());
        for v in ds.row_f32(id) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Uniform sample without replacement. Returns the sampled dataset and the
/// (ascending, injective) map from sampled index to original id.
pub fn sample_dataset(
    ds: &VectorDataset,
    fraction: f64,
    seed: u64,
) -> Result<(VectorDataset, Vec<u32>)> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid(format!("sample fraction {fraction} not in (0, 1]")));
    }
    let count = ds.count();
    let n = ((fraction * count as f64).round() as usize).clamp(1, count);
    let mut ids: Vec<u32> = (0..count as u32).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Partial Fisher-Yates: only the first n slots need shuffling.
    for i in 0..n {
        let j = rng.gen_range(i..count);
        ids.swap(i, j);
    }
    let mut picked: Vec<u32> = ids[..n].to_vec();
    picked.sort_unstable();

    let dims = ds.dims();
    let sampled = match &ds.data {
        VectorData::U8(v) => {
            let mut data = Vec::with_capacity(n * dims);
            for &id in &picked {
                data.extend_from_slice(&v[id as usize * dims..(id as usize + 1) * dims]);
            }
            VectorDataset { dims, metric: ds.metric, data: VectorData::U8(data) }
        }
        VectorData::F32(v) => {
            let mut data = Vec::with_capacity(n * dims);
            for &id in &picked {
                data.extend_from_slice(&v[id as usize * dims..(id as usize + 1) * dims]);
            }
            VectorDataset { dims, metric: ds.metric, data: VectorData::F32(data) }
        }
    };
    Ok((sampled, picked))
}

/// Exact top-k by linear scan; the oracle every index is checked against.
/// Ties break toward the smaller id.
pub fn brute_force_topk(ds: &VectorDataset, query: &[f32], k: usize) -> Result<Vec<(u32, f32)>> {
    if query.len() != ds.dims() {
        return Err(Error::invalid(format!(
            "query dims {} != dataset dims {}",
            query.len(),
            ds.dims()
        )));
    }
    if k == 0 || k > ds.count() {
        return Err(Error::invalid(format!("k={k} out of range for count {}", ds.count())));
    }
    // Bounded insertion into a sorted buffer; k is small in practice.
    let mut best: Vec<(u32, f32)> = Vec::with_capacity(k + 1);
    for id in 0..ds.count() as u32 {
        let d = ds.dist_to(query, id);
        if best.len() == k {
            let (wid, wd) = best[k - 1];
            if cmp_dist_id(d, id, wd, wid).is_ge() {
                continue;
            }
        }
        let pos = best
            .binary_search_by(|&(pid, pd)| cmp_dist_id(pd, pid, d, id))
            .unwrap_or_else(|p| p);
        best.insert(pos, (id, d));
        best.truncate(k);
    }
    Ok(best)
}

/// Exact top-k ground truth for a set of queries.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub k: usize,
    pub lists: Vec<Vec<(u32, f32)>>,
}

impl GroundTruth {
    /// Brute-force ground truth, parallel over queries.
    pub fn compute(ds: &VectorDataset, queries: &[Vec<f32>], k: usize) -> Result<Self> {
        let lists: Result<Vec<_>> =
            queries.par_iter().map(|q| brute_force_topk(ds, q, k)).collect();
        Ok(GroundTruth { k, lists: lists? })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = Vec::with_capacity(4 + self.lists.len() * self.k * 8);
        out.extend_from_slice(&(self.k as u32).to_le_bytes());
        for list in &self.lists {
            if list.len() != self.k {
                return Err(Error::inconsistent("ground truth list length != k"));
            }
            for &(id, _) in list {
                out.extend_from_slice(&id.to_le_bytes());
            }
            for &(_, d) in list {
                out.extend_from_slice(&d.to_le_bytes());
            }
        }
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&out).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.len() < 4 {
            return Err(Error::malformed("ground truth file shorter than its header"));
        }
        let k = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
        if k == 0 {
            return Err(Error::malformed("ground truth k = 0"));
        }
        let per_query = k * 8;
        if (bytes.len() - 4) % per_query != 0 {
            return Err(Error::malformed("ground truth size is not a whole number of queries"));
        }
        let n = (bytes.len() - 4) / per_query;
        let mut lists = Vec::with_capacity(n);
        for q in 0..n {
            let base = 4 + q * per_query;
            let mut list = Vec::with_capacity(k);
            for i in 0..k {
                let off = base + i * 4;
                let id = u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
                let doff = base + k * 4 + i * 4;
                let d = f32::from_le_bytes(bytes[doff..doff + 4].try_into().unwrap());
                list.push((id, d));
            }
            lists.push(list);
        }
        Ok(GroundTruth { k, lists })
    }
}

/// recall@k: |results ∩ exact top-k| / k, scoring only the first
/// min(|results|, k) returned ids. Empty results score 0.
pub fn compute_recall(results: &[u32], gt_list: &[(u32, f32)], k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let truth: std::collections::HashSet<u32> =
        gt_list.iter().take(k).map(|&(id, _)| id).collect();
    let hits = results.iter().take(k).filter(|id| truth.contains(id)).count();
    hits as f64 / k as f64
}

/// Seeded mixture-of-Gaussians dataset for tests and desk-scale benchmarks.
/// `centers_seed` fixes the cluster centers so query sets can share them.
pub fn synthetic_clustered(
    count: usize,
    dims: usize,
    n_clusters: usize,
    cluster_std: f32,
    centers_seed: u64,
    points_seed: u64,
    metric: Metric,
) -> VectorDataset {
    let mut crng = ChaCha8Rng::seed_from_u64(centers_seed);
    let centers: Vec<f32> =
        (0..n_clusters * dims).map(|_| crng.gen_range(-1.0f32..1.0)).collect();
    let mut prng = ChaCha8Rng::seed_from_u64(points_seed);
    let mut data = Vec::with_capacity(count * dims);
    for _ in 0..count {
        let c = prng.gen_range(0..n_clusters);
        for d in 0..dims {
            let noise: f32 = prng.sample(StandardNormal);
            data.push(centers[c * dims + d] + noise * cluster_std);
        }
    }
    VectorDataset::from_f32(dims, metric, data).expect("synthetic data is well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use tempfile::tempdir;

    fn tiny(values: &[f32], dims: usize, metric: Metric) -> VectorDataset {
        VectorDataset::from_f32(dims, metric, values.to_vec()).unwrap()
    }

    fn fvecs_bytes(records: &[&[f32]]) -> Vec<u8> {
        let mut out = Vec::new();
        for r in records {
            out.extend_from_slice(&(r.len() as u32).to_le_bytes());
            for v in *r {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    #[test]
    fn loads_fvecs() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("two.fvecs");
        fs::write(&path, fvecs_bytes(&[&[1.0, 2.0, 3.0, 4.0], &[5.0, 6.0, 7.0, 8.0]])).unwrap();
        let ds = load_dataset(&path, FileFormat::Fvecs, Metric::L2).unwrap();
        assert_eq!(ds.count(), 2);
        assert_eq!(ds.dims(), 4);
        assert_eq!(ds.scalar(), Scalar::F32);
        assert_eq!(ds.row_f32(1), vec![5.0, 6.0, 7.0, 8.0]);
    }

    #[test]
    fn rejects_malformed_bvecs() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.bvecs");
        let mut bytes = 128u32.to_le_bytes().to_vec();
        bytes.extend_from_slice(&[0u8; 100]);
        fs::write(&path, bytes).unwrap();
        assert!(load_dataset(&path, FileFormat::Bvecs, Metric::L2).is_err());
    }

    #[test]
    fn rejects_mismatched_record_dims() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.fvecs");
        let mut bytes = fvecs_bytes(&[&[1.0, 2.0]]);
        bytes.extend_from_slice(&3u32.to_le_bytes());
        bytes.extend_from_slice(&[0u8; 4]);
        fs::write(&path, bytes).unwrap();
        assert!(load_dataset(&path, FileFormat::Fvecs, Metric::L2).is_err());
    }

    #[test]
    fn rejects_empty_file() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("empty.fvecs");
        fs::write(&path, []).unwrap();
        assert!(load_dataset(&path, FileFormat::Fvecs, Metric::L2).is_err());
    }

    #[test]
    fn cosine_ingest_normalizes() {
        let ds = tiny(&[3.0, 4.0], 2, Metric::Cosine);
        let row = ds.row_f32(0);
        assert!((row[0] - 0.6).abs() < 1e-6 && (row[1] - 0.8).abs() < 1e-6);
    }

    #[test]
    fn raw_bin_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("ds.bin");
        let ds = tiny(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 3, Metric::L2);
        write_raw_bin(&ds, &path).unwrap();
        let back = load_dataset(&path, FileFormat::RawBin, Metric::L2).unwrap();
        assert_eq!(back.count(), 2);
        assert_eq!(back.row_f32(1), ds.row_f32(1));
    }

    #[test]
    fn sample_full_fraction_is_identity() {
        let ds = tiny(&[0.0, 1.0, 2.0, 3.0], 1, Metric::L2);
        let (s, map) = sample_dataset(&ds, 1.0, 7).unwrap();
        assert_eq!(map, vec![0, 1, 2, 3]);
        assert_eq!(s.row_f32(2), vec![2.0]);
    }

    #[test]
    fn sample_is_deterministic_and_sized() {
        let data: Vec<f32> = (0..1000).map(|i| i as f32).collect();
        let ds = tiny(&data, 1, Metric::L2);
        let (a, ma) = sample_dataset(&ds, 0.005, 42).unwrap();
        let (_, mb) = sample_dataset(&ds, 0.005, 42).unwrap();
        assert_eq!(a.count(), 5);
        assert_eq!(ma, mb);
        let (_, mc) = sample_dataset(&ds, 0.005, 43).unwrap();
        assert_ne!(ma, mc);
    }

    #[test]
    fn sample_rejects_bad_fraction() {
        let ds = tiny(&[0.0, 1.0], 1, Metric::L2);
        assert!(sample_dataset(&ds, 0.0, 1).is_err());
        assert!(sample_dataset(&ds, 1.5, 1).is_err());
    }

    #[test]
    fn brute_force_exact_match() {
        let ds = tiny(&[1.0, 0.0, 0.5, 0.25], 2, Metric::L2);
        let hit = brute_force_topk(&ds, &[0.5, 0.25], 1).unwrap();
        assert_eq!(hit, vec![(1, 0.0)]);
    }

    // 1-D {0, 1, 5}, query 0.6: squared distances are 0.36, 0.16, 19.36.
    #[test]
    fn brute_force_hand_example() {
        let ds = tiny(&[0.0, 1.0, 5.0], 1, Metric::L2);
        let got = brute_force_topk(&ds, &[0.6], 2).unwrap();
        let ids: Vec<u32> = got.iter().map(|&(id, _)| id).collect();
        assert_eq!(ids, vec![1, 0]);
    }

    #[test]
    fn brute_force_tie_breaks_to_smaller_id() {
        let mut data = vec![9.0, 9.0; 8];
        data[3 * 2] = 1.0;
        data[3 * 2 + 1] = 1.0;
        data[7 * 2 - 2] = 1.0;
        data[7 * 2 - 1] = 1.0;
        // ids 3 and 6 are duplicates closest to the query
        let ds = tiny(&data, 2, Metric::L2);
        let got = brute_force_topk(&ds, &[1.0, 1.0], 1).unwrap();
        assert_eq!(got[0].0, 3);
    }

    #[test]
    fn brute_force_rejects_large_k() {
        let ds = tiny(&[0.0, 1.0], 1, Metric::L2);
        assert!(brute_force_topk(&ds, &[0.0], 3).is_err());
    }

    #[test]
    fn recall_basics() {
        let gt: Vec<(u32, f32)> = (0..10).map(|i| (i, i as f32)).collect();
        let full: Vec<u32> = (0..10).collect();
        assert_eq!(compute_recall(&full, &gt, 10), 1.0);
        let mut nine = full.clone();
        nine[9] = 99;
        assert_eq!(compute_recall(&nine, &gt, 10), 0.9);
        assert_eq!(compute_recall(&[], &gt, 10), 0.0);
    }

    #[test]
    fn gt_file_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("gt.bin");
        let gt = GroundTruth {
            k: 2,
            lists: vec![vec![(1, 0.5), (0, 1.0)], vec![(2, 0.0), (1, 2.0)]],
        };
        gt.write(&path).unwrap();
        let back = GroundTruth::read(&path).unwrap();
        assert_eq!(back, gt);
    }

    #[test]
    fn cosine_equals_ip_on_normalized() {
        let raw: Vec<f32> = (0..40).map(|i| (i as f32 * 0.7).sin() + 1.5).collect();
        let cos = VectorDataset::from_f32(4, Metric::Cosine, raw.clone()).unwrap();
        let mut normed = raw.clone();
        for row in normed.chunks_mut(4) {
            normalize_f32(row).unwrap();
        }
        let ip = VectorDataset::from_f32(4, Metric::Ip, normed).unwrap();
        let mut q = vec![0.3f32, -0.2, 0.9, 0.1];
        normalize_f32(&mut q).unwrap();
        let a: Vec<u32> =
            brute_force_topk(&cos, &q, 5).unwrap().iter().map(|&(id, _)| id).collect();
        let b: Vec<u32> =
            brute_force_topk(&ip, &q, 5).unwrap().iter().map(|&(id, _)| id).collect();
        assert_eq!(a, b);
    }

    proptest! {
        // Permuting rows only relabels the ids in the result.
        #[test]
        fn brute_force_permutation_invariant(values in proptest::collection::vec(-100.0f32..100.0, 12..60)) {
            let n = values.len() / 3;
            let data = &values[..n * 3];
            let ds = tiny(data, 3, Metric::L2);
            let perm: Vec<usize> = (0..n).rev().collect();
            let mut permuted = vec![0.0; n * 3];
            for (new, &old) in perm.iter().enumerate() {
                permuted[new * 3..new * 3 + 3].copy_from_slice(&data[old * 3..old * 3 + 3]);
            }
            let ds2 = tiny(&permuted, 3, Metric::L2);
            let q = [0.5f32, -1.0, 2.0];
            let a = brute_force_topk(&ds, &q, n.min(4)).unwrap();
            let b = brute_force_topk(&ds2, &q, n.min(4)).unwrap();
            let da: Vec<f32> = a.iter().map(|&(_, d)| d).collect();
            let db: Vec<f32> = b.iter().map(|&(_, d)| d).collect();
            prop_assert_eq!(da, db);
        }

        #[test]
        fn recall_of_self_is_one(k in 1usize..20) {
            let gt: Vec<(u32, f32)> = (0..k as u32).map(|i| (i * 3, i as f32)).collect();
            let ids: Vec<u32> = gt.iter().map(|&(id, _)| id).collect();
            prop_assert_eq!(compute_recall(&ids, &gt, k), 1.0);
        }
    }
}
