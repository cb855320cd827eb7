//! File formats: lifted point maps (LPM), PPM/PGM/PFM rasters, pose text
//! files, and the JSON scene manifest.
//!
//! Readers reject non-finite payloads, so downstream code may assume
//! finiteness. write-then-read and read-then-write are bitwise identities on
//! files in the canonical layouts produced by the writers here.

mod lpm;
mod manifest;
mod pfm;
mod pnm;
mod pose;

pub use lpm::{read_lpm, write_lpm};
pub use manifest::{
    CanvasSize, FillMethod, PipelineParams, RhoKind, SceneManifest, SigmaParam, ViewPaths,
};
pub use pfm::{read_pfm, write_pfm};
pub use pnm::{read_image, read_mask, write_image, write_mask};
pub use pose::{read_pose, write_pose};

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::geom::{RigidTransform, Vec3};
use crate::grid::{Grid2, Rgb};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad magic in {path}: expected {expected:?}, found {found:?}")]
    BadMagic {
        path: PathBuf,
        expected: &'static str,
        found: String,
    },
    #[error("truncated file: {0}")]
    TruncatedFile(PathBuf),
    #[error("non-finite value in {0}")]
    NonFiniteValue(PathBuf),
    #[error("confidence {value} outside [0, 1] in {path}")]
    ConfidenceOutOfRange { path: PathBuf, value: f64 },
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("parse error in {path}: {reason}")]
    ParseError { path: PathBuf, reason: String },
    #[error("pose in {path} is not a rotation (orthonormality defect {defect:.3e})")]
    NotARotation { path: PathBuf, defect: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid manifest: {0}")]
    InvalidManifest(String),
}

/// One input view: color image, camera-frame point map with per-pixel
/// confidence, and the camera-to-unified-frame pose.
#[derive(Debug, Clone)]
pub struct LiftedView {
    pub image: Grid2<Rgb>,
    pub points: Grid2<Vec3>,
    pub confidence: Grid2<f64>,
    pub pose: RigidTransform,
}

impl LiftedView {
    /// Checks that the three grids share one size; confidence range and
    /// finiteness are the readers' job.
    pub fn new(
        image: Grid2<Rgb>,
        points: Grid2<Vec3>,
        confidence: Grid2<f64>,
        pose: RigidTransform,
    ) -> Result<Self, IoError> {
        if !image.same_size(&points) || !image.same_size(&confidence) {
            return Err(IoError::DimensionMismatch(format!(
                "view grids disagree: image {}x{}, points {}x{}, confidence {}x{}",
                image.width(),
                image.height(),
                points.width(),
                points.height(),
                confidence.width(),
                confidence.height()
            )));
        }
        Ok(LiftedView {
            image,
            points,
            confidence,
            pose,
        })
    }

    pub fn width(&self) -> usize {
        self.image.width()
    }

    pub fn height(&self) -> usize {
        self.image.height()
    }
}

/// A manifest plus its fully loaded and validated views.
#[derive(Debug)]
pub struct LoadedScene {
    pub manifest: SceneManifest,
    pub views: Vec<LiftedView>,
}

/// Loads and validates a scene: parses the manifest, loads every view
/// (in parallel, preserving manifest order), and cross-checks grid sizes.
/// Relative paths resolve against the manifest's directory.
pub fn load_scene(manifest_path: &Path) -> Result<LoadedScene, IoError> {
    let manifest = SceneManifest::read(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));

    let views: Vec<LiftedView> = manifest
        .views
        .par_iter()
        .map(|paths| {
            let image = read_image(&base.join(&paths.image_path))?;
            let (points, confidence) = read_lpm(&base.join(&paths.points_path))?;
            let pose = read_pose(&base.join(&paths.pose_path))?;
            LiftedView::new(image, points, confidence, pose)
        })
        .collect::<Result<_, _>>()?;

    Ok(LoadedScene { manifest, views })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Mat3;

    #[test]
    fn lifted_view_rejects_mismatched_grids() {
        let image = Grid2::new(2, 2, Rgb::BLACK);
        let points = Grid2::new(3, 2, Vec3::ZERO);
        let conf = Grid2::new(2, 2, 1.0);
        let pose = RigidTransform::new(Mat3::IDENTITY, Vec3::ZERO).unwrap();
        assert!(matches!(
            LiftedView::new(image, points, conf, pose),
            Err(IoError::DimensionMismatch(_))
        ));
    }
}
