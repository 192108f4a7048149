use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::error::CliResult;

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed command leaves no partial file behind.
pub fn write_atomic(
    path: &Path,
    fill: impl FnOnce(&mut dyn Write) -> CliResult<()>,
) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(tactile_core::Error::from)?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(tactile_core::Error::from)?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        fill(&mut buf)?;
        buf.flush().map_err(tactile_core::Error::from)?;
    }
    tmp.persist(path)
        .map_err(|e| tactile_core::Error::from(e.error))?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    write_atomic(path, |w| {
        w.write_all(text.as_bytes())
            .map_err(tactile_core::Error::from)?;
        Ok(())
    })
}

/// `data/single.csv` → `data/single.meta.toml`.
pub fn sidecar(csv: &Path) -> PathBuf {
    csv.with_extension("meta.toml")
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| {
        tactile_core::Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
        .into()
    })
}
