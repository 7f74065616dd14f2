//! File formats and run orchestration: SPNF field files, the diagnostics CSV,
//! legacy VTK export and `key = value` run configuration.

pub mod config;
pub mod csv;
pub mod run;
pub mod spnf;
pub mod vtk;

pub use config::{InitialCondition, RunConfig, OUT_DIR_ENV};
pub use csv::{emit_csv, read_csv};
pub use run::{analyze, run_evolve, spin_report, AnalyzeOutput, RunOutput, SpinReport};
pub use spnf::{read_field, write_field, FieldData, FieldFile, Layout};
pub use vtk::export_vtk;

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub(crate) fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}
