use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::generator::{generate_blackoil_like_sequence, GeneratorParams};
use crate::error::{Result, SolverError};
use crate::sparse::io::{read_block_matrix_market, read_vector, write_block_matrix_market, write_vector};
use crate::sparse::{BlockCsrMatrix, BlockSparse};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    Synthetic(GeneratorParams),
    Manifest { path: PathBuf, systems: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub matrix: PathBuf,
    /// Defaults to a vector of ones when absent.
    #[serde(default)]
    pub rhs: Option<PathBuf>,
}

/// On-disk list of systems; relative paths resolve against the manifest's
/// directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default)]
    pub block_size: Option<usize>,
    pub systems: Vec<ManifestEntry>,
}

/// An ordered list of linear systems sharing one block size.
#[derive(Debug, Clone)]
pub struct ProblemSequence {
    pub systems: Vec<(Arc<BlockCsrMatrix<f64>>, Vec<f64>)>,
    pub provenance: Provenance,
}

fn parse_config<D: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<D> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        serde_json::from_str(text).map_err(|e| SolverError::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    } else {
        toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].lines().count().max(1))
                .unwrap_or(0);
            SolverError::Parse {
                line,
                message: e.message().to_string(),
            }
        })
    }
}

pub(crate) fn read_config<D: serde::de::DeserializeOwned>(path: &Path) -> Result<D> {
    let text = fs::read_to_string(path)?;
    parse_config(path, &text)
}

impl ProblemSequence {
    pub fn synthetic(params: &GeneratorParams) -> Result<Self> {
        let systems = generate_blackoil_like_sequence(params)?
            .into_iter()
            .map(|s| (s.matrix, s.rhs))
            .collect();
        Ok(Self {
            systems,
            provenance: Provenance::Synthetic(params.clone()),
        })
    }

    /// Loads a TOML or JSON manifest of MatrixMarket files.
    pub fn from_manifest(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let manifest: Manifest = read_config(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut systems = Vec::with_capacity(manifest.systems.len());
        for entry in &manifest.systems {
            let mut a = read_block_matrix_market::<f64>(base.join(&entry.matrix))?;
            if let Some(b) = manifest.block_size {
                if a.block_size() != b {
                    a = BlockCsrMatrix::from_scalar(&a.to_scalar(), b)?;
                }
            }
            let rhs = match &entry.rhs {
                Some(r) => read_vector(base.join(r))?,
                None => vec![1.0; a.dim()],
            };
            if rhs.len() != a.dim() {
                return Err(SolverError::DimensionMismatch {
                    context: "manifest rhs",
                    expected: a.dim(),
                    found: rhs.len(),
                });
            }
            systems.push((Arc::new(a), rhs));
        }
        let seq = Self {
            provenance: Provenance::Manifest {
                path: path.to_path_buf(),
                systems: systems.len(),
            },
            systems,
        };
        seq.validate()?;
        Ok(seq)
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .systems
            .first()
            .ok_or_else(|| SolverError::InvalidParameter("problem sequence is empty".into()))?;
        let b = first.0.block_size();
        let dim = first.0.dim();
        for (a, _) in &self.systems {
            if a.block_size() != b {
                return Err(SolverError::InvalidMatrix("systems differ in block size".into()));
            }
            if matches!(self.provenance, Provenance::Synthetic(_)) && a.dim() != dim {
                return Err(SolverError::InvalidMatrix("synthetic systems differ in size".into()));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.systems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.systems.is_empty()
    }

    pub fn block_size(&self) -> usize {
        self.systems.first().map_or(1, |s| s.0.block_size())
    }

    /// Writes `system_NNN.mtx`, `rhs_NNN.mtx` and `manifest.toml` into `dir`.
    pub fn write_to_dir(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let mut entries = Vec::with_capacity(self.len());
        for (k, (a, b)) in self.systems.iter().enumerate() {
            let m = PathBuf::from(format!("system_{:03}.mtx", k + 1));
            let r = PathBuf::from(format!("rhs_{:03}.mtx", k + 1));
            write_block_matrix_market(a, dir.join(&m))?;
            write_vector(b, dir.join(&r))?;
            entries.push(ManifestEntry { matrix: m, rhs: Some(r) });
        }
        let manifest = Manifest {
            block_size: Some(self.block_size()),
            systems: entries,
        };
        let path = dir.join("manifest.toml");
        let text = toml::to_string(&manifest).map_err(|e| SolverError::InvalidParameter(e.to_string()))?;
        fs::write(&path, text)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> GeneratorParams {
        GeneratorParams {
            nx: 3,
            ny: 2,
            nz: 2,
            nsteps: 3,
            drift: 0.02,
            ..GeneratorParams::default()
        }
    }

    #[test]
    fn manifest_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let seq = ProblemSequence::synthetic(&tiny()).unwrap();
        let path = seq.write_to_dir(dir.path()).unwrap();
        let back = ProblemSequence::from_manifest(&path).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back.block_size(), 3);
        for ((a, b), (c, d)) in seq.systems.iter().zip(&back.systems) {
            assert_eq!(a, c);
            assert_eq!(b, d);
        }
    }

    #[test]
    fn manifest_without_rhs_uses_ones() {
        let dir = tempfile::tempdir().unwrap();
        let seq = ProblemSequence::synthetic(&tiny()).unwrap();
        seq.write_to_dir(dir.path()).unwrap();
        let json = dir.path().join("m.json");
        fs::write(&json, r#"{"systems": [{"matrix": "system_001.mtx"}]}"#).unwrap();
        let back = ProblemSequence::from_manifest(&json).unwrap();
        assert_eq!(back.systems[0].1, vec![1.0; 36]);
    }

    #[test]
    fn bad_toml_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.toml");
        fs::write(&p, "block_size = 3\nsystems = [\n  { matrix = 5 }\n]\n").unwrap();
        match ProblemSequence::from_manifest(&p) {
            Err(SolverError::Parse { line, .. }) => assert!(line >= 1),
            other => panic!("{other:?}"),
        }
    }
}
