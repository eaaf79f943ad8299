//! File formats and on-disk datasets.

mod dataset;
mod media;
mod records;

use std::fs;
use std::io::Write;
use std::path::Path;

pub use dataset::{write_dataset, Dataset, AUDIO_FILE, FRAMES_DIR, SCENARIO_FILE, TRUTH_FILE};
pub use media::{decode_pgm, decode_wav, encode_depth_text, encode_pgm, encode_wav, parse_depth_text, MAX_IMAGE_SIDE};
pub use records::{
    encode_annotations, encode_decisions, encode_features, encode_predictions, encode_truth, parse_annotations,
    parse_decisions, parse_features, parse_predictions, parse_truth, FeatureRow, ANNOTATION_HEADER, DECISION_HEADER,
    FEATURE_HEADER_PREFIX, PREDICTION_HEADER, TRUTH_HEADER,
};

use crate::error::{Error, Result};

/// Writes through a sibling temporary file and renames it into place, so
/// readers see either the old file or the complete new one.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::Invalid(format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}
