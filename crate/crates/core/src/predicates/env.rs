//! Schema lookup and caching during expansion.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::schema::{binarize, parse_dtd_file, parse_internal, BinaryTreeType, SchemaError, TreeType};

use super::PredicateError;

/// A schema loaded for one root element.
#[derive(Debug, Clone)]
pub struct Schema {
    pub path: PathBuf,
    pub root: String,
    pub tree_type: TreeType,
    pub binary: BinaryTreeType,
    /// Element names reachable from the root.
    pub element_names: BTreeSet<String>,
    pub attribute_names: BTreeSet<String>,
}

/// State shared by the expansion of one problem.
#[derive(Debug, Default)]
pub struct Environment {
    /// Compile attribute constraints of schemas.
    pub attributes: bool,
    search_dirs: Vec<PathBuf>,
    schemas: HashMap<(PathBuf, String), Arc<Schema>>,
    /// Cache keys in load order.
    order: Vec<(PathBuf, String)>,
}

impl Environment {
    pub fn new(attributes: bool) -> Self {
        Environment { attributes, ..Default::default() }
    }

    /// Adds a directory where schema files are looked up, after the ones
    /// already added.
    pub fn with_search_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.search_dirs.push(dir.into());
        self
    }

    fn locate(&self, file: &str) -> Option<PathBuf> {
        let given = Path::new(file);
        if given.is_absolute() {
            return given.is_file().then(|| given.to_path_buf());
        }
        self.search_dirs
            .iter()
            .map(|d| d.join(given))
            .chain(std::iter::once(given.to_path_buf()))
            .find(|p| p.is_file())
    }

    /// Loads `file` for root element `root`, parsing it at most once per
    /// run. DTD files are recognized by their extension; other files hold
    /// a tree type in the internal syntax and ignore `root`.
    pub fn schema(&mut self, file: &str, root: &str) -> Result<Arc<Schema>, PredicateError> {
        let path = self.locate(file).ok_or_else(|| PredicateError::UnknownSchemaFile(file.to_string()))?;
        let path = path.canonicalize().unwrap_or(path);
        let key = (path.clone(), root.to_string());
        if let Some(s) = self.schemas.get(&key) {
            return Ok(s.clone());
        }
        log::debug!("loading schema {} with root {root}", path.display());
        let is_dtd = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("dtd"));
        let tree_type = if is_dtd {
            let dtd = parse_dtd_file(&path)?;
            dtd.tree_type(root).map_err(|e| match e {
                SchemaError::UnknownRoot(r) => {
                    PredicateError::RootNotFound { root: r, path: path.display().to_string() }
                }
                e => e.into(),
            })?
        } else {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| SchemaError::Io { path: path.display().to_string(), message: e.to_string() })?;
            parse_internal(&text)?
        };
        let binary = binarize(&tree_type);
        let schema = Arc::new(Schema {
            path: path.clone(),
            root: root.to_string(),
            element_names: tree_type.element_names(),
            attribute_names: tree_type.attribute_names(),
            tree_type,
            binary,
        });
        self.schemas.insert(key.clone(), schema.clone());
        self.order.push(key);
        Ok(schema)
    }

    /// Schemas loaded so far, in load order.
    pub fn schemas(&self) -> Vec<Arc<Schema>> {
        self.order.iter().map(|k| self.schemas[k].clone()).collect()
    }
}
