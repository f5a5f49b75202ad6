//! Output plumbing: the run directory, the resolved-config echo, unit
//! handling, and CSV writing.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::schema::CurvePoint;

/// Unit for entropies, exponents, and log-moments in emitted documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Nats,
    Bits,
}

impl Unit {
    pub fn from_flag(bits: bool) -> Self {
        if bits {
            Unit::Bits
        } else {
            Unit::Nats
        }
    }

    /// Scale a value measured in nats into this unit.
    pub fn scale(&self, nats: f64) -> f64 {
        match self {
            Unit::Nats => nats,
            Unit::Bits => nats / std::f64::consts::LN_2,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Unit::Nats => "nats",
            Unit::Bits => "bits",
        }
    }
}

/// The run's output directory; every command writes its documents and the
/// resolved-config echo through this.
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(root)
            .map_err(|e| CliError::input(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, doc: &T) -> CliResult<PathBuf> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(doc)
            .map_err(|e| CliError::compute(format!("serialization failed: {e}")))?;
        text.push('\n');
        std::fs::write(&path, text)
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }

    /// RFC-4180 CSV with one header row.
    pub fn write_csv<T: Serialize>(&self, name: &str, rows: &[T]) -> CliResult<PathBuf> {
        let path = self.path(name);
        let mut writer = csv::Writer::from_path(&path)
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
        for row in rows {
            writer
                .serialize(row)
                .map_err(|e| CliError::compute(format!("CSV row failed: {e}")))?;
        }
        writer
            .flush()
            .map_err(|e| CliError::input(format!("cannot flush {}: {e}", path.display())))?;
        Ok(path)
    }

    pub fn write_curves(&self, name: &str, points: &[CurvePoint]) -> CliResult<PathBuf> {
        self.write_csv(name, points)
    }

    /// Echo of the fully resolved run parameters, for reproducibility.
    pub fn write_resolved_config<T: Serialize>(&self, echo: &T) -> CliResult<()> {
        self.write_json("resolved_config.json", echo)?;
        Ok(())
    }
}
