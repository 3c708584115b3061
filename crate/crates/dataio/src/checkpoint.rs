use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{DataError, Result};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"MAADCKPT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format_version: u32,
    pub architecture: String,
    pub objective: String,
    pub dims: BTreeMap<String, usize>,
    pub norm_stats: BTreeMap<String, f64>,
    #[serde(default)]
    pub extra: serde_json::Value,
}

impl CheckpointHeader {
    pub fn new(architecture: &str, objective: &str) -> Self {
        CheckpointHeader {
            format_version: FORMAT_VERSION,
            architecture: architecture.to_string(),
            objective: objective.to_string(),
            dims: BTreeMap::new(),
            norm_stats: BTreeMap::new(),
            extra: serde_json::Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub params: Vec<f64>,
}

impl Checkpoint {
    pub fn expect_architecture(&self, expected: &str) -> Result<()> {
        if self.header.architecture != expected {
            return Err(DataError::ArchitectureMismatch { expected: expected.to_string(), found: self.header.architecture.clone() });
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = serde_json::to_vec(&self.header).expect("header serializes");
        let mut out = Vec::with_capacity(24 + header.len() + 8 * self.params.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(&header);
        out.extend_from_slice(&(self.params.len() as u64).to_le_bytes());
        for v in &self.params {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let truncated = |what: &str| DataError::Parse { path: path.to_path_buf(), row: 0, msg: format!("truncated checkpoint ({what})") };
        if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
            return Err(DataError::VersionMismatch { found: "not a checkpoint".into(), expected: FORMAT_VERSION });
        }
        let mut pos = MAGIC.len();
        let mut take = |n: usize, what: &str| -> Result<&[u8]> {
            let end = pos.checked_add(n).filter(|&e| e <= bytes.len()).ok_or_else(|| truncated(what))?;
            let s = &bytes[pos..end];
            pos = end;
            Ok(s)
        };
        let hlen = u64::from_le_bytes(take(8, "header length")?.try_into().unwrap()) as usize;
        let raw_header = take(hlen, "header")?;
        let value: serde_json::Value = serde_json::from_slice(raw_header).map_err(|e| DataError::json(path, e))?;
        match value.get("format_version").and_then(|v| v.as_u64()) {
            Some(v) if v == FORMAT_VERSION as u64 => {}
            other => {
                let found = other.map_or_else(|| "missing".to_string(), |v| v.to_string());
                return Err(DataError::VersionMismatch { found, expected: FORMAT_VERSION });
            }
        }
        let header: CheckpointHeader = serde_json::from_value(value).map_err(|e| DataError::json(path, e))?;
        let count = u64::from_le_bytes(take(8, "parameter count")?.try_into().unwrap()) as usize;
        let body = take(count.checked_mul(8).ok_or_else(|| truncated("parameter count"))?, "parameters")?;
        let params = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        if pos != bytes.len() {
            return Err(DataError::Parse { path: path.to_path_buf(), row: 0, msg: "trailing bytes after parameters".into() });
        }
        Ok(Checkpoint { header, params })
    }
}

pub fn save_checkpoint(checkpoint: &Checkpoint, path: &Path) -> Result<()> {
    fs::write(path, checkpoint.to_bytes()).map_err(|e| DataError::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bytes = fs::read(path).map_err(|e| DataError::io(path, e))?;
    Checkpoint::from_bytes(&bytes, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        let mut header = CheckpointHeader::new("stgae", "reconstruction");
        header.dims.insert("hidden".into(), 16);
        header.norm_stats.insert("position_scale".into(), 7.25);
        header.extra = serde_json::json!({"best_epoch": 12});
        let params = (0..500).map(|i| (i as f64 * 0.37).sin() * 1e-3 + f64::EPSILON * i as f64).collect();
        Checkpoint { header, params }
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.ckpt");
        let ck = sample();
        save_checkpoint(&ck, &p).unwrap();
        let back = load_checkpoint(&p).unwrap();
        let max_diff = ck.params.iter().zip(&back.params).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert_eq!(max_diff, 0.0);
        assert_eq!(back, ck);
    }

    #[test]
    fn truncated_file_is_rejected() {
        let bytes = sample().to_bytes();
        let p = Path::new("m.ckpt");
        for cut in [0, 4, 12, 40, bytes.len() - 3] {
            let err = Checkpoint::from_bytes(&bytes[..cut], p).unwrap_err();
            assert!(
                matches!(err, DataError::VersionMismatch { .. } | DataError::Parse { .. } | DataError::Json { .. }),
                "cut {cut}: {err}"
            );
        }
    }

    #[test]
    fn unknown_version_is_rejected() {
        let mut ck = sample();
        ck.header.format_version = 99;
        let err = Checkpoint::from_bytes(&ck.to_bytes(), Path::new("m")).unwrap_err();
        assert!(matches!(err, DataError::VersionMismatch { ref found, .. } if found == "99"));
    }

    #[test]
    fn architecture_mismatch() {
        let err = sample().expect_architecture("seq2seq").unwrap_err();
        assert!(matches!(err, DataError::ArchitectureMismatch { .. }));
        sample().expect_architecture("stgae").unwrap();
    }
}
