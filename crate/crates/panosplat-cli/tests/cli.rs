//! Binary-level behavior: exit codes, stderr diagnostics, flags, outputs.

use std::path::Path;
use std::process::{Command, Output};

use panosplat::geom::{RigidTransform, Vec3};
use panosplat::grid::{Grid2, Rgb};
use panosplat::io;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_panosplat")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn missing_manifest_exits_2_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["stitch", "nope.json"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.starts_with("error: io:"), "unexpected stderr: {err}");
    assert_eq!(
        err.trim_end().lines().count(),
        1,
        "diagnostic must be single-line"
    );
}

#[test]
fn invalid_manifest_exits_2_as_validation() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.json"),
        r#"{"views": [{"image_path": "a", "points_path": "b", "pose_path": "c"}],
            "canvas": {"width": 64, "height": 32}, "params": {"tau_c": 1.2}}"#,
    )
    .unwrap();
    let out = run_in(dir.path(), &["stitch", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error: validation:"));
}

/// One-view scene whose confidence is uniformly low, for exercising the
/// empty-result path.
fn write_low_confidence_scene(dir: &Path) {
    let n = 8usize;
    let image = Grid2::new(n, n, Rgb::splat(0.5));
    let points = Grid2::from_raw(
        n,
        n,
        (0..n * n)
            .map(|i| Vec3::new((i % n) as f64 + 1.0, (i / n) as f64 + 1.0, 2.0))
            .collect(),
    );
    let confidence = Grid2::new(n, n, 0.2);
    io::write_image(&dir.join("v.ppm"), &image).unwrap();
    io::write_lpm(&dir.join("v.lpm"), &points, &confidence).unwrap();
    io::write_pose(&dir.join("v.pose"), &RigidTransform::IDENTITY).unwrap();
    std::fs::write(
        dir.join("scene.json"),
        r#"{"views": [{"image_path": "v.ppm", "points_path": "v.lpm", "pose_path": "v.pose"}],
            "canvas": {"width": 64, "height": 32}}"#,
    )
    .unwrap();
}

#[test]
fn empty_result_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    write_low_confidence_scene(dir.path());
    let out = run_in(dir.path(), &["stitch", "scene.json", "--tau-c", "0.9"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).starts_with("error: empty-result:"));
}

#[test]
fn low_threshold_stitches_the_same_scene() {
    let dir = tempfile::tempdir().unwrap();
    write_low_confidence_scene(dir.path());
    let out = run_in(dir.path(), &["stitch", "scene.json", "--tau-c", "0.1"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(dir.path().join("out_pano.ppm").exists());
    assert!(dir.path().join("out_report.json").exists());
}

fn gen_small_scene(dir: &Path) {
    let out = run_in(
        dir,
        &[
            "gen-synthetic",
            "scene",
            "--seed",
            "5",
            "--n-views",
            "3",
            "--image-size",
            "64",
            "--fov-deg",
            "130",
            "--width",
            "256",
            "--height",
            "128",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
}

#[test]
fn fill_none_makes_pano_equal_raw() {
    let dir = tempfile::tempdir().unwrap();
    gen_small_scene(dir.path());
    let out = run_in(
        dir.path(),
        &[
            "stitch",
            "scene/scene.json",
            "--fill",
            "none",
            "--out-prefix",
            "nf",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let pano = std::fs::read(dir.path().join("nf_pano.ppm")).unwrap();
    let raw = std::fs::read(dir.path().join("nf_raw.ppm")).unwrap();
    assert_eq!(pano, raw);
}

#[test]
fn fill_reduces_hole_fraction_and_report_is_versioned() {
    let dir = tempfile::tempdir().unwrap();
    gen_small_scene(dir.path());
    let out = run_in(
        dir.path(),
        &["stitch", "scene/scene.json", "--out-prefix", "df"],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("df_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["schema"], 1);
    let before = report["hole_fraction_before"].as_f64().unwrap();
    let after = report["hole_fraction_after"].as_f64().unwrap();
    assert!(
        after < before,
        "fill did not reduce holes: {after} vs {before}"
    );
}

#[test]
fn external_fill_runs_the_command() {
    let dir = tempfile::tempdir().unwrap();
    gen_small_scene(dir.path());
    let out = run_in(
        dir.path(),
        &[
            "stitch",
            "scene/scene.json",
            "--fill",
            "external:cp input.ppm output.ppm",
            "--out-prefix",
            "ext",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    // The copy-through prediction leaves holes black; observed pixels must
    // still match the raw canvas bitwise.
    let pano = io::read_image(&dir.path().join("ext_pano.ppm")).unwrap();
    let raw = io::read_image(&dir.path().join("ext_raw.ppm")).unwrap();
    let mask = io::read_mask(&dir.path().join("ext_mask.pgm")).unwrap();
    for ((p, r), &hole) in pano.data().iter().zip(raw.data()).zip(mask.data()) {
        if !hole {
            assert_eq!(p, r);
        } else {
            assert_eq!(*p, Rgb::BLACK);
        }
    }
}

#[test]
fn failing_external_fill_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    gen_small_scene(dir.path());
    let out = run_in(
        dir.path(),
        &[
            "stitch",
            "scene/scene.json",
            "--fill",
            "external:exit 7",
            "--out-prefix",
            "bad",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error: completion:"));
}

#[test]
fn evaluate_identical_images() {
    let dir = tempfile::tempdir().unwrap();
    let img = Grid2::new(16, 16, Rgb::new(0.2, 0.5, 0.8));
    io::write_image(&dir.path().join("a.ppm"), &img).unwrap();
    let mask = Grid2::new(16, 16, false);
    io::write_mask(&dir.path().join("m.pgm"), &mask).unwrap();
    let out = run_in(
        dir.path(),
        &["evaluate", "a.ppm", "a.ppm", "m.pgm", "m.pgm"],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("overlap_pixels: 256"), "{text}");
    assert!(text.contains("psnr_db: inf"), "{text}");
    assert!(text.contains("ssim: 1.000000"), "{text}");
}

#[test]
fn evaluate_empty_overlap_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let img = Grid2::new(8, 8, Rgb::splat(0.5));
    io::write_image(&dir.path().join("a.ppm"), &img).unwrap();
    io::write_mask(&dir.path().join("hole.pgm"), &Grid2::new(8, 8, true)).unwrap();
    let out = run_in(
        dir.path(),
        &["evaluate", "a.ppm", "a.ppm", "hole.pgm", "hole.pgm"],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).starts_with("error: empty-overlap:"));
}

#[test]
fn evaluate_reports_overlap_conjunction_count() {
    let dir = tempfile::tempdir().unwrap();
    let img = Grid2::new(4, 4, Rgb::splat(0.5));
    io::write_image(&dir.path().join("a.ppm"), &img).unwrap();
    // Mask A holes the top half, mask B holes the left half: overlap is the
    // bottom-right quadrant, 4 pixels.
    let ma = Grid2::from_raw(4, 4, (0..16).map(|i| i / 4 < 2).collect());
    let mb = Grid2::from_raw(4, 4, (0..16).map(|i| i % 4 < 2).collect());
    io::write_mask(&dir.path().join("ma.pgm"), &ma).unwrap();
    io::write_mask(&dir.path().join("mb.pgm"), &mb).unwrap();
    let out = run_in(
        dir.path(),
        &["evaluate", "a.ppm", "a.ppm", "ma.pgm", "mb.pgm"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(
        stdout(&out).contains("overlap_pixels: 4"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn analyze_identity_homography() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "analyze-homography",
            "--",
            "1",
            "0",
            "0",
            "0",
            "1",
            "0",
            "0",
            "0",
            "1",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("c: 0"), "{text}");
    assert!(text.contains("s_A: 1"), "{text}");
    // Constant field for an affine map.
    let field = io::read_pfm(&dir.path().join("homography_detj.pfm")).unwrap();
    assert!(field.data().iter().all(|&d| d == 1.0));
}

#[test]
fn analyze_singular_homography_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "analyze-homography",
            "--",
            "1",
            "2",
            "3",
            "2",
            "4",
            "6",
            "0",
            "0",
            "1",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error: singular-homography:"));
}

#[test]
fn analyze_projective_field_grows_toward_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "analyze-homography",
            "--width",
            "128",
            "--height",
            "8",
            "--",
            "1",
            "0",
            "0",
            "0",
            "1",
            "0",
            "-0.002",
            "0",
            "1",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let field = io::read_pfm(&dir.path().join("homography_detj.pfm")).unwrap();
    // 1/(1-cu)^3 grows with u for c > 0.
    for u in 1..128 {
        assert!(field.get(u, 4) > field.get(u - 1, 4));
    }
}

#[test]
fn gen_synthetic_rejects_bad_args() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["gen-synthetic", "s", "--n-views", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error: validation:"));
}

#[test]
fn gen_synthetic_confidence_is_one_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "gen-synthetic",
            "scene",
            "--seed",
            "1",
            "--n-views",
            "1",
            "--image-size",
            "32",
            "--width",
            "128",
            "--height",
            "64",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let (_, confidence) = io::read_lpm(&dir.path().join("scene/view_000.lpm")).unwrap();
    assert!(confidence.data().iter().all(|&c| c == 1.0));
}
