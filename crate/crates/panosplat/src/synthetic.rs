//! Synthetic scene generator: a procedurally textured cylindrical room
//! rendered analytically into views with exact geometry, plus the matching
//! ground-truth panorama.
//!
//! Cameras sit on a small circle near the room axis, looking outward at
//! equal azimuth spacing. Each view gets an exact camera-frame point map,
//! confidence 1 everywhere, and an exact pose, so the stitched result can be
//! compared against the analytic panorama rendered from the same projection
//! center.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::geom::{Mat3, RigidTransform, Vec3};
use crate::grid::{Grid2, Rgb};
use crate::io::{self, CanvasSize, IoError, PipelineParams, SceneManifest, ViewPaths};
use crate::projection;

/// Radius of the textured room wall, in scene units.
pub const ROOM_RADIUS: f64 = 5.0;
/// Radius of the camera circle around the room axis.
pub const CAMERA_RADIUS: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub n_views: usize,
    pub image_size: usize,
    /// Horizontal field of view in degrees.
    pub fov_deg: f64,
    pub canvas: CanvasSize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 0,
            n_views: 8,
            image_size: 512,
            fov_deg: 90.0,
            canvas: CanvasSize {
                width: 2048,
                height: 1024,
            },
        }
    }
}

/// Smooth band-limited wall texture: per channel a base level plus three
/// harmonics in azimuth (integer frequencies, so the texture closes around
/// the loop) mixed with slow vertical phase drift.
#[derive(Debug, Clone)]
pub struct WallTexture {
    // [channel][harmonic] -> (amplitude, azimuthal frequency, vertical
    // frequency, phase)
    coeffs: [[(f64, f64, f64, f64); 3]; 3],
}

impl WallTexture {
    pub fn from_seed(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coeffs = [[(0.0, 0.0, 0.0, 0.0); 3]; 3];
        for channel in &mut coeffs {
            for harmonic in channel.iter_mut() {
                *harmonic = (
                    rng.gen_range(0.06..0.13),
                    rng.gen_range(1..=6) as f64,
                    rng.gen_range(0.4..2.0),
                    rng.gen_range(0.0..TAU),
                );
            }
        }
        WallTexture { coeffs }
    }

    /// Color of the wall at azimuth `theta` and height `h`.
    pub fn sample(&self, theta: f64, h: f64) -> Rgb {
        let eval = |ch: &[(f64, f64, f64, f64); 3]| -> f64 {
            let mut v = 0.5;
            for &(amp, m, p, phase) in ch {
                v += amp * (m * theta + p * h + phase).sin();
            }
            v
        };
        Rgb::new(
            eval(&self.coeffs[0]),
            eval(&self.coeffs[1]),
            eval(&self.coeffs[2]),
        )
    }
}

/// Pose of camera `i` of `n`: on the camera circle at equal azimuth spacing,
/// optical axis pointing outward, image up aligned with world +z.
pub fn camera_pose(i: usize, n: usize) -> RigidTransform {
    let psi = TAU * i as f64 / n as f64;
    let (s, c) = psi.sin_cos();
    // Columns: x_cam (image right), y_cam (image down), z_cam (view direction).
    let rotation = Mat3::new([[s, 0.0, c], [-c, 0.0, s], [0.0, -1.0, 0.0]]);
    let translation = Vec3::new(CAMERA_RADIUS * c, CAMERA_RADIUS * s, 0.0);
    RigidTransform::new(rotation, translation).expect("constructed rotation is orthonormal")
}

/// First positive parameter t with |origin + t*dir| hitting the wall
/// cylinder; `None` for rays parallel to the axis.
fn ray_wall_intersection(origin: Vec3, dir: Vec3) -> Option<f64> {
    let a = dir.x * dir.x + dir.y * dir.y;
    if a < 1e-300 {
        return None;
    }
    let b = 2.0 * (origin.x * dir.x + origin.y * dir.y);
    let q = origin.x * origin.x + origin.y * origin.y - ROOM_RADIUS * ROOM_RADIUS;
    let disc = b * b - 4.0 * a * q;
    if disc < 0.0 {
        return None;
    }
    let t = (-b + disc.sqrt()) / (2.0 * a);
    (t > 0.0).then_some(t)
}

/// One rendered view with exact geometry.
pub struct RenderedView {
    pub image: Grid2<Rgb>,
    pub points: Grid2<Vec3>,
    pub confidence: Grid2<f64>,
    pub pose: RigidTransform,
}

pub fn render_view(
    texture: &WallTexture,
    pose: &RigidTransform,
    image_size: usize,
    fov_deg: f64,
) -> RenderedView {
    let n = image_size;
    let focal = (n as f64 / 2.0) / (fov_deg.to_radians() / 2.0).tan();
    let center = n as f64 / 2.0;
    let origin = pose.translation();
    let rotation = pose.rotation();

    let rows: Vec<Vec<(Rgb, Vec3)>> = (0..n)
        .into_par_iter()
        .map(|v| {
            (0..n)
                .map(|u| {
                    let dir_cam = Vec3::new(
                        (u as f64 + 0.5 - center) / focal,
                        (v as f64 + 0.5 - center) / focal,
                        1.0,
                    );
                    let dir_world = rotation.mul_vec(dir_cam);
                    let t = ray_wall_intersection(origin, dir_world)
                        .expect("outward-looking rays hit the wall");
                    let hit = origin + dir_world * t;
                    let color = texture.sample(hit.y.atan2(hit.x), hit.z);
                    // Camera-frame point is exactly t * dir_cam.
                    (color, dir_cam * t)
                })
                .collect()
        })
        .collect();

    let mut image = Vec::with_capacity(n * n);
    let mut points = Vec::with_capacity(n * n);
    for row in rows {
        for (color, point) in row {
            image.push(color);
            points.push(point);
        }
    }
    RenderedView {
        image: Grid2::from_raw(n, n, image),
        points: Grid2::from_raw(n, n, points),
        confidence: Grid2::new(n, n, 1.0),
        pose: *pose,
    }
}

/// Analytic panorama from the unified projection center. Rays parallel to
/// the room axis (the top row at exactly phi = pi/2) see no wall and render
/// black.
pub fn ground_truth_panorama(
    texture: &WallTexture,
    center: Vec3,
    canvas: CanvasSize,
) -> Grid2<Rgb> {
    let (w, h) = (canvas.width, canvas.height);
    let rows: Vec<Vec<Rgb>> = (0..h)
        .into_par_iter()
        .map(|j| {
            let phi = PI / 2.0 - PI * j as f64 / h as f64;
            (0..w)
                .map(|i| {
                    let theta = TAU * i as f64 / w as f64 - PI;
                    let dir =
                        Vec3::new(phi.cos() * theta.cos(), phi.cos() * theta.sin(), phi.sin());
                    match ray_wall_intersection(center, dir) {
                        Some(t) => {
                            let hit = center + dir * t;
                            texture.sample(hit.y.atan2(hit.x), hit.z)
                        }
                        None => Rgb::BLACK,
                    }
                })
                .collect()
        })
        .collect();
    Grid2::from_raw(w, h, rows.into_iter().flatten().collect())
}

/// Writes the full scene to `dir`: per-view PPM/LPM/pose files, the scene
/// manifest (`scene.json`), and the analytic `ground_truth.ppm`.
pub fn generate_scene(dir: &Path, config: &SyntheticConfig) -> Result<SceneManifest, IoError> {
    assert!(config.n_views >= 1, "need at least one view");
    assert!(config.image_size >= 2, "image size must be at least 2");
    std::fs::create_dir_all(dir)?;

    let texture = WallTexture::from_seed(config.seed);
    let mut views = Vec::with_capacity(config.n_views);
    let mut centers = Vec::with_capacity(config.n_views);
    for i in 0..config.n_views {
        let pose = camera_pose(i, config.n_views);
        let rendered = render_view(&texture, &pose, config.image_size, config.fov_deg);
        let image_path = format!("view_{i:03}.ppm");
        let points_path = format!("view_{i:03}.lpm");
        let pose_path = format!("view_{i:03}.pose");
        io::write_image(&dir.join(&image_path), &rendered.image)?;
        io::write_lpm(
            &dir.join(&points_path),
            &rendered.points,
            &rendered.confidence,
        )?;
        io::write_pose(&dir.join(&pose_path), &rendered.pose)?;
        centers.push(pose.translation());
        views.push(ViewPaths {
            image_path,
            points_path,
            pose_path,
        });
    }

    let center = projection::projection_center(&centers)
        .expect("at least one view")
        .origin;
    let gt = ground_truth_panorama(&texture, center, config.canvas);
    io::write_image(&dir.join("ground_truth.ppm"), &gt)?;

    let manifest = SceneManifest {
        views,
        canvas: config.canvas,
        params: PipelineParams::default(),
    };
    manifest.write(&dir.join("scene.json"))?;
    Ok(manifest)
}
