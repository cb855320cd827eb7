//! End-to-end stitch: fuse views, splat onto the canvas, fill holes, fuse
//! observed and completed regions.

use std::time::Instant;

use thiserror::Error;

use crate::completion::{self, CompletionError, CompletionOperator};
use crate::fusion::{self, FusionError, RobustSpec, SigmaSpec};
use crate::grid::{Grid2, Rgb};
use crate::io::{CanvasSize, FillMethod, LiftedView, PipelineParams, RhoKind, SigmaParam};
use crate::projection::{self, CanvasSpec, ProjectionError};
use crate::splat::{self, PanoCanvas, SplatKernel};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("no views to stitch")]
    NoViews,
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Completion(#[from] CompletionError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StageTimings {
    pub fusion_s: f64,
    pub splat_s: f64,
    pub completion_s: f64,
}

#[derive(Debug, Clone)]
pub struct StitchStats {
    pub views: usize,
    pub points_emitted: usize,
    pub points_skipped: usize,
    pub hole_fraction_before: f64,
    pub hole_fraction_after: f64,
    /// True when the canvas had no observed pixels and the fill fell back
    /// to mid-gray.
    pub fill_degenerate: bool,
    pub timings: StageTimings,
}

#[derive(Debug)]
pub struct StitchResult {
    /// Splatted canvas: color Y, support Z, mask M.
    pub raw: PanoCanvas,
    /// Final panorama Y* (equals `raw.color` when fill is disabled).
    pub pano: Grid2<Rgb>,
    pub stats: StitchStats,
}

fn robust_spec(params: &PipelineParams) -> RobustSpec {
    match params.rho_kind {
        RhoKind::Reciprocal => RobustSpec::Reciprocal,
        RhoKind::Exp => RobustSpec::Exp(match params.rho_sigma {
            SigmaParam::Auto => SigmaSpec::Auto,
            SigmaParam::Fixed(v) => SigmaSpec::Fixed(v),
        }),
    }
}

/// Runs the full pipeline. `threads` pins the worker count (output is
/// bitwise identical for any value); `None` uses the global pool.
pub fn stitch(
    views: &[LiftedView],
    canvas: CanvasSize,
    params: &PipelineParams,
    threads: Option<usize>,
) -> Result<StitchResult, PipelineError> {
    if views.is_empty() {
        return Err(PipelineError::NoViews);
    }
    match threads {
        None => stitch_inner(views, canvas, params),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| PipelineError::ThreadPool(e.to_string()))?;
            pool.install(|| stitch_inner(views, canvas, params))
        }
    }
}

fn stitch_inner(
    views: &[LiftedView],
    canvas: CanvasSize,
    params: &PipelineParams,
) -> Result<StitchResult, PipelineError> {
    let mut timings = StageTimings::default();

    let t0 = Instant::now();
    let point_set = fusion::build_point_set(views, params.tau_c, robust_spec(params))?;
    timings.fusion_s = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let center = projection::projection_center(&point_set.source_centers)?;
    let spec = CanvasSpec::new(canvas.width, canvas.height);
    let kernel = SplatKernel::gaussian(params.kernel_sigma, params.kernel_radius);
    let outcome = splat::splat(
        &point_set,
        center,
        spec,
        &kernel,
        params.epsilon,
        params.tau,
    );
    timings.splat_s = t0.elapsed().as_secs_f64();

    let raw = outcome.canvas;
    let hole_fraction_before = raw.hole_fraction();

    let t0 = Instant::now();
    let operator = match &params.fill_method {
        FillMethod::None => None,
        FillMethod::Diffusion => Some(CompletionOperator::diffusion_default()),
        FillMethod::PullPush => Some(CompletionOperator::PullPush),
        FillMethod::External(command) => Some(CompletionOperator::External {
            command: command.clone(),
        }),
    };
    let (pano, fill_degenerate, hole_fraction_after) = match operator {
        None => (raw.color.clone(), false, hole_fraction_before),
        Some(op) => {
            let input = completion::make_input(&raw.color, &raw.mask)?;
            let completed = completion::complete(&op, &input)?;
            let fused = completion::fuse(&raw.color, &completed.canvas, &raw.mask)?;
            let after = if completed.no_observed {
                hole_fraction_before
            } else {
                0.0
            };
            (fused, completed.no_observed, after)
        }
    };
    timings.completion_s = t0.elapsed().as_secs_f64();

    Ok(StitchResult {
        stats: StitchStats {
            views: views.len(),
            points_emitted: point_set.points.len(),
            points_skipped: outcome.skipped_points,
            hole_fraction_before,
            hole_fraction_after,
            fill_degenerate,
            timings,
        },
        raw,
        pano,
    })
}
