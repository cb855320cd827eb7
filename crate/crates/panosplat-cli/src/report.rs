//! Versioned JSON report written next to the stitch outputs.

use serde::{Deserialize, Serialize};

use panosplat::pipeline::StitchStats;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct StitchReport {
    pub schema: u32,
    pub views_loaded: usize,
    pub points_emitted: usize,
    pub points_skipped: usize,
    pub hole_fraction_before: f64,
    pub hole_fraction_after: f64,
    pub fill_degenerate: bool,
    pub wall_time_s: WallTimes,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct WallTimes {
    pub load: f64,
    pub fusion: f64,
    pub splat: f64,
    pub completion: f64,
    pub write: f64,
}

impl StitchReport {
    pub fn new(stats: &StitchStats, load_s: f64, write_s: f64) -> Self {
        StitchReport {
            schema: SCHEMA_VERSION,
            views_loaded: stats.views,
            points_emitted: stats.points_emitted,
            points_skipped: stats.points_skipped,
            hole_fraction_before: stats.hole_fraction_before,
            hole_fraction_after: stats.hole_fraction_after,
            fill_degenerate: stats.fill_degenerate,
            wall_time_s: WallTimes {
                load: load_s,
                fusion: stats.timings.fusion_s,
                splat: stats.timings.splat_s,
                completion: stats.timings.completion_s,
                write: write_s,
            },
        }
    }
}
