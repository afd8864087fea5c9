//! Versioned figure library file.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tangram_core::figures::default_figures;
use tangram_core::geometry::{validate_figure, FigureSpec};

use crate::error::{SimError, SimResult};
use crate::fsio;

pub const FIGURES_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureLibrary {
    pub schema_version: u32,
    pub figures: Vec<FigureSpec>,
}

impl FigureLibrary {
    pub fn canonical() -> Self {
        FigureLibrary { schema_version: FIGURES_SCHEMA_VERSION, figures: default_figures() }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("figure library serializes");
        s.push('\n');
        s
    }

    /// Parse and validate: known schema, ids `0..n` in order, every figure valid.
    pub fn from_json(text: &str, origin: &Path) -> SimResult<Self> {
        let lib: FigureLibrary = serde_json::from_str(text).map_err(|e| SimError::format(origin, e))?;
        if lib.schema_version != FIGURES_SCHEMA_VERSION {
            return Err(SimError::format(origin, format!("unsupported schema_version {}", lib.schema_version)));
        }
        if lib.figures.is_empty() {
            return Err(SimError::format(origin, "no figures"));
        }
        for (i, f) in lib.figures.iter().enumerate() {
            if f.id as usize != i {
                return Err(SimError::format(origin, format!("figure {} has id {}, expected {i}", f.name, f.id)));
            }
            let report = validate_figure(f);
            if !report.is_ok() {
                return Err(SimError::format(origin, format!("figure {}: {report}", f.name)));
            }
        }
        Ok(lib)
    }

    pub fn load(path: &Path) -> SimResult<Self> {
        Self::from_json(&fsio::read_string(path)?, path)
    }

    pub fn save(&self, path: &Path) -> SimResult<()> {
        fsio::write_atomic(path, self.to_json().as_bytes())
    }

    pub fn names(&self) -> Vec<String> {
        self.figures.iter().map(|f| f.name.clone()).collect()
    }
}
