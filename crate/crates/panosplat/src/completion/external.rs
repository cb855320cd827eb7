//! External completion operator: the file protocol a plug-in model speaks.
//!
//! The masked canvas is written as `input.ppm` and the hole mask as
//! `mask.pgm` into a fresh working directory; the user command runs with
//! that directory as its working directory and must leave `output.ppm`
//! behind. A nonzero exit, unreadable output, or a size mismatch fails.

use std::process::Command;

use super::{CompletionError, CompletionInput};
use crate::grid::{Grid2, Rgb};
use crate::io;

pub(crate) fn run(command: &str, input: &CompletionInput) -> Result<Grid2<Rgb>, CompletionError> {
    let dir = tempfile::tempdir()
        .map_err(|e| CompletionError::ExternalFailed(format!("cannot create workdir: {e}")))?;
    io::write_image(&dir.path().join("input.ppm"), input.masked_canvas())
        .map_err(|e| CompletionError::ExternalFailed(format!("cannot write input.ppm: {e}")))?;
    io::write_mask(&dir.path().join("mask.pgm"), input.mask())
        .map_err(|e| CompletionError::ExternalFailed(format!("cannot write mask.pgm: {e}")))?;

    let output = Command::new("sh")
        .arg("-c")
        .arg(command)
        .current_dir(dir.path())
        .output()
        .map_err(|e| CompletionError::ExternalFailed(format!("cannot spawn {command:?}: {e}")))?;
    if !output.status.success() {
        let stderr = String::from_utf8_lossy(&output.stderr);
        return Err(CompletionError::ExternalFailed(format!(
            "command {command:?} exited with {}: {}",
            output.status,
            stderr.lines().next().unwrap_or("")
        )));
    }

    let predicted = io::read_image(&dir.path().join("output.ppm"))
        .map_err(|e| CompletionError::ExternalFailed(format!("cannot read output.ppm: {e}")))?;
    if !predicted.same_size(input.mask()) {
        return Err(CompletionError::ExternalFailed(format!(
            "output.ppm is {}x{}, expected {}x{}",
            predicted.width(),
            predicted.height(),
            input.mask().width(),
            input.mask().height()
        )));
    }
    Ok(predicted)
}
