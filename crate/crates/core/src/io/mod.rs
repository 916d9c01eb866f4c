//! Text formats for bundles, profiles, sector weights and reports, plus
//! SVG figure output.

mod bundle;
mod svg;
mod tables;

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub use bundle::{bundle_from_str, bundle_to_string, load_bundle, save_bundle, FORMAT_TAG, FORMAT_VERSION};
pub use svg::{comparison_bars_svg, sector_bars_svg, staircase_svg};
pub use tables::{
    export_profile, export_report, export_sectors, parse_profile, parse_report, profile_to_csv, read_profile,
    read_report, report_to_string, sectors_to_csv,
};

/// Write via a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
