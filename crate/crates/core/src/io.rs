//! JSON file formats for spaces, subsets, relations and disks.
//!
//! Files reference each other by path; relative references resolve against the
//! directory of the referencing file. Every reader validates what it loads.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{ClosedSubset, FiniteMetricSpace};
use crate::obstruction::TriangulatedDisk;
use crate::relation::SetValuedMap;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceFile {
    pub labels: Vec<String>,
    pub dist: Vec<Vec<f64>>,
}

impl From<&FiniteMetricSpace> for SpaceFile {
    fn from(space: &FiniteMetricSpace) -> Self {
        SpaceFile { labels: space.labels().to_vec(), dist: space.rows() }
    }
}

impl SpaceFile {
    pub fn into_space(self) -> Result<FiniteMetricSpace> {
        FiniteMetricSpace::new(self.labels, self.dist)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetFile {
    pub space: String,
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationFile {
    pub domain: String,
    pub codomain: String,
    /// Points on which the map is defined; the whole domain when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<usize>>,
    pub pairs: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiskFile {
    pub vertices: usize,
    pub edges: Vec<[usize; 2]>,
    pub boundary: Vec<usize>,
}

impl DiskFile {
    pub fn into_disk(self) -> Result<TriangulatedDisk> {
        TriangulatedDisk::new(self.vertices, self.edges.into_iter().map(|[i, j]| (i, j)).collect(), self.boundary)
    }
}

impl From<&TriangulatedDisk> for DiskFile {
    fn from(disk: &TriangulatedDisk) -> Self {
        DiskFile {
            vertices: disk.vertices(),
            edges: disk.edges().iter().map(|&(i, j)| [i, j]).collect(),
            boundary: disk.boundary().to_vec(),
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_path_buf(), source })
}

/// Pretty-printed JSON with a trailing newline. Floats use the shortest representation
/// that parses back to the same bits.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    text
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_json_string(value))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Resolves `reference` against the directory holding `from`.
pub fn resolve(from: &Path, reference: &str) -> PathBuf {
    let r = Path::new(reference);
    if r.is_absolute() {
        return r.to_path_buf();
    }
    from.parent().map_or_else(|| r.to_path_buf(), |dir| dir.join(r))
}

/// Loads spaces, sharing one `Arc` per path so maps over the same file compare cheaply.
#[derive(Default)]
pub struct Loader {
    spaces: HashMap<PathBuf, Arc<FiniteMetricSpace>>,
}

impl Loader {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn space(&mut self, path: &Path) -> Result<Arc<FiniteMetricSpace>> {
        let key = fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf());
        if let Some(space) = self.spaces.get(&key) {
            return Ok(space.clone());
        }
        let space = Arc::new(read_json::<SpaceFile>(path)?.into_space()?);
        self.spaces.insert(key, space.clone());
        Ok(space)
    }

    pub fn subset(&mut self, path: &Path) -> Result<(Arc<FiniteMetricSpace>, ClosedSubset)> {
        let file: SubsetFile = read_json(path)?;
        let space = self.space(&resolve(path, &file.space))?;
        let subset = ClosedSubset::new(&space, file.members)?;
        Ok((space, subset))
    }

    /// Loads a relation. Its support is the file's `support` field, else `fallback`,
    /// else the whole domain.
    pub fn relation(&mut self, path: &Path, fallback: Option<&ClosedSubset>) -> Result<SetValuedMap> {
        let file: RelationFile = read_json(path)?;
        let domain = self.space(&resolve(path, &file.domain))?;
        let codomain = self.space(&resolve(path, &file.codomain))?;
        let support = match (file.support, fallback) {
            (Some(members), _) => ClosedSubset::new(&domain, members)?,
            (None, Some(a)) => a.clone(),
            (None, None) => ClosedSubset::whole(&domain),
        };
        SetValuedMap::on(domain, &support, codomain, file.pairs.into_iter().map(|[x, y]| (x, y)))
    }
}

pub fn relation_file(map: &SetValuedMap, domain_ref: &str, codomain_ref: &str) -> RelationFile {
    RelationFile {
        domain: domain_ref.to_string(),
        codomain: codomain_ref.to_string(),
        support: (!map.is_total()).then(|| map.support().to_vec()),
        pairs: map.pairs().into_iter().map(|(x, y)| [x, y]).collect(),
    }
}

pub fn load_disk(path: &Path) -> Result<TriangulatedDisk> {
    read_json::<DiskFile>(path)?.into_disk()
}
