//! Panorama stitching from dense per-view 3D point maps.
//!
//! The pipeline fuses per-view camera-frame point maps into a weighted
//! colored point set, projects it through a unified center with an
//! equidistant cylindrical projection, splats it onto a panoramic canvas
//! with a hole mask, and fills holes with pluggable completion operators.
//! Alongside the pipeline live a closed-form homography distortion analyzer
//! and overlap-region quality metrics.

pub mod completion;
pub mod distortion;
pub mod fusion;
pub mod geom;
pub mod grid;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod projection;
pub mod splat;
pub mod synthetic;

pub use geom::{Mat3, RigidTransform, Vec3};
pub use grid::{Grid2, Rgb};
