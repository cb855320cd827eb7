//! End-to-end pipeline tests on generated scenes: load, stitch, compare
//! against the analytic panorama, and check the determinism contract.

use panosplat::io::{self, CanvasSize, FillMethod};
use panosplat::metrics::{self, OverlapPair};
use panosplat::pipeline;
use panosplat::synthetic::{generate_scene, SyntheticConfig};

fn scene_dir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("panosplat-pipe-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn small_config(seed: u64) -> SyntheticConfig {
    SyntheticConfig {
        seed,
        n_views: 4,
        image_size: 96,
        fov_deg: 100.0,
        canvas: CanvasSize {
            width: 384,
            height: 192,
        },
    }
}

#[test]
fn stitched_scene_matches_ground_truth_in_observed_region() {
    let dir = scene_dir("fidelity");
    generate_scene(&dir, &small_config(5)).unwrap();
    let scene = io::load_scene(&dir.join("scene.json")).unwrap();
    assert_eq!(scene.views.len(), 4);

    let result = pipeline::stitch(
        &scene.views,
        scene.manifest.canvas,
        &scene.manifest.params,
        None,
    )
    .unwrap();
    assert_eq!(result.stats.points_skipped, 0);
    assert!(result.stats.hole_fraction_before < 1.0);
    assert!(result.stats.hole_fraction_after <= result.stats.hole_fraction_before);

    let gt = io::read_image(&dir.join("ground_truth.ppm")).unwrap();
    let observed = result.raw.mask.map(|&hole| !hole);
    let pair = OverlapPair::new(result.raw.color.clone(), gt, observed).unwrap();
    let db = metrics::psnr(&pair).unwrap();
    assert!(db >= 30.0, "observed-region PSNR {db:.2} dB below 30 dB");
}

#[test]
fn fill_none_returns_raw_canvas_bitwise() {
    let dir = scene_dir("fillnone");
    generate_scene(&dir, &small_config(6)).unwrap();
    let scene = io::load_scene(&dir.join("scene.json")).unwrap();
    let mut params = scene.manifest.params.clone();
    params.fill_method = FillMethod::None;
    let result = pipeline::stitch(&scene.views, scene.manifest.canvas, &params, None).unwrap();
    assert_eq!(result.pano, result.raw.color);
    assert_eq!(
        result.stats.hole_fraction_after,
        result.stats.hole_fraction_before
    );
}

#[test]
fn diffusion_fill_removes_holes_and_preserves_observed() {
    let dir = scene_dir("fill");
    generate_scene(&dir, &small_config(7)).unwrap();
    let scene = io::load_scene(&dir.join("scene.json")).unwrap();
    let result = pipeline::stitch(
        &scene.views,
        scene.manifest.canvas,
        &scene.manifest.params,
        None,
    )
    .unwrap();
    assert!(result.stats.hole_fraction_before > 0.0);
    assert_eq!(result.stats.hole_fraction_after, 0.0);
    for ((&raw, &pano), &hole) in result
        .raw
        .color
        .data()
        .iter()
        .zip(result.pano.data())
        .zip(result.raw.mask.data())
    {
        if !hole {
            assert_eq!(raw, pano, "observed pixel altered by fill");
        }
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = scene_dir("threads");
    generate_scene(&dir, &small_config(8)).unwrap();
    let scene = io::load_scene(&dir.join("scene.json")).unwrap();
    let one = pipeline::stitch(
        &scene.views,
        scene.manifest.canvas,
        &scene.manifest.params,
        Some(1),
    )
    .unwrap();
    let eight = pipeline::stitch(
        &scene.views,
        scene.manifest.canvas,
        &scene.manifest.params,
        Some(8),
    )
    .unwrap();
    for (a, b) in one.pano.data().iter().zip(eight.pano.data()) {
        assert_eq!(a.r.to_bits(), b.r.to_bits());
        assert_eq!(a.g.to_bits(), b.g.to_bits());
        assert_eq!(a.b.to_bits(), b.b.to_bits());
    }
    for (a, b) in one.raw.support.data().iter().zip(eight.raw.support.data()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn single_view_covers_its_field_of_view() {
    let dir = scene_dir("singleview");
    let config = SyntheticConfig {
        seed: 2,
        n_views: 1,
        image_size: 128,
        fov_deg: 60.0,
        canvas: CanvasSize {
            width: 360,
            height: 180,
        },
    };
    generate_scene(&dir, &config).unwrap();
    let scene = io::load_scene(&dir.join("scene.json")).unwrap();
    let result = pipeline::stitch(
        &scene.views,
        scene.manifest.canvas,
        &scene.manifest.params,
        None,
    )
    .unwrap();

    // Columns with any observed pixel should span about 60 degrees of the
    // 360-degree canvas.
    let observed_cols: Vec<usize> = (0..360)
        .filter(|&u| (0..180).any(|v| !*result.raw.mask.get(u, v)))
        .collect();
    let span = observed_cols.len();
    assert!(
        (55..=70).contains(&span),
        "observed azimuth span {span} degrees, expected about 60"
    );
}
