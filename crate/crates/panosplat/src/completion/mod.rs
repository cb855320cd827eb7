//! Canvas-domain hole completion: masked input construction, pluggable
//! completion operators, observed/hole fusion, joint-mask self-supervision
//! machinery, and the training losses as computable evaluators.

mod diffusion;
mod external;
mod occlusion;
mod pullpush;

pub use occlusion::{sample_occlusion, OcclusionSampler, OcclusionShape};

use thiserror::Error;

use crate::grid::{Grid2, Rgb};

/// Default trade-off between reconstruction and observation consistency in
/// [`loss_total`].
pub const DEFAULT_LAMBDA: f64 = 1.0;

#[derive(Debug, Error)]
pub enum CompletionError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("external completion failed: {0}")]
    ExternalFailed(String),
    #[error("mask has no observed pixels")]
    NoObservedPixels,
    #[error("coverage must be in (0, 1), got {0}")]
    InvalidCoverage(f64),
}

/// The operator input: the canvas with hole pixels zeroed, plus the mask.
#[derive(Debug, Clone)]
pub struct CompletionInput {
    masked_canvas: Grid2<Rgb>,
    mask: Grid2<bool>,
}

impl CompletionInput {
    /// Zeroed wherever `mask` is true.
    pub fn masked_canvas(&self) -> &Grid2<Rgb> {
        &self.masked_canvas
    }

    pub fn mask(&self) -> &Grid2<bool> {
        &self.mask
    }
}

/// Hole completion backends behind one input/output contract.
#[derive(Debug, Clone, PartialEq)]
pub enum CompletionOperator {
    Diffusion {
        max_iters: usize,
        tol: f64,
    },
    PullPush,
    /// Shell command following the `input.ppm`/`mask.pgm` -> `output.ppm`
    /// working-directory protocol.
    External {
        command: String,
    },
}

impl CompletionOperator {
    pub fn diffusion_default() -> Self {
        CompletionOperator::Diffusion {
            max_iters: 5000,
            tol: 1e-5,
        }
    }
}

/// A predicted canvas plus a degenerate-input flag.
#[derive(Debug, Clone)]
pub struct Completed {
    pub canvas: Grid2<Rgb>,
    /// True when the mask had no observed pixels: the canvas is mid-gray
    /// fallback rather than a real prediction.
    pub no_observed: bool,
}

fn check_same_size<A, B>(a: &Grid2<A>, b: &Grid2<B>, what: &str) -> Result<(), CompletionError> {
    if !a.same_size(b) {
        return Err(CompletionError::DimensionMismatch(format!(
            "{what}: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// Y_in = (1 - M) * Y: observed pixels kept bitwise, holes zeroed.
pub fn make_input(
    canvas: &Grid2<Rgb>,
    mask: &Grid2<bool>,
) -> Result<CompletionInput, CompletionError> {
    check_same_size(canvas, mask, "canvas vs mask")?;
    let mut masked_canvas = canvas.clone();
    for (px, &hole) in masked_canvas.data_mut().iter_mut().zip(mask.data()) {
        if hole {
            *px = Rgb::BLACK;
        }
    }
    Ok(CompletionInput {
        masked_canvas,
        mask: mask.clone(),
    })
}

/// Runs the operator on the masked input, producing a finite prediction for
/// every pixel. A fully-hole mask yields a mid-gray canvas with the
/// `no_observed` flag set (for Diffusion and PullPush) so pipelines
/// terminate instead of erroring.
pub fn complete(
    op: &CompletionOperator,
    input: &CompletionInput,
) -> Result<Completed, CompletionError> {
    let filled = match op {
        CompletionOperator::Diffusion { max_iters, tol } => {
            diffusion::fill(&input.masked_canvas, &input.mask, *max_iters, *tol)
        }
        CompletionOperator::PullPush => pullpush::fill(&input.masked_canvas, &input.mask),
        CompletionOperator::External { command } => {
            return Ok(Completed {
                canvas: external::run(command, input)?,
                no_observed: false,
            });
        }
    };
    Ok(match filled {
        Some(canvas) => Completed {
            canvas,
            no_observed: false,
        },
        None => Completed {
            canvas: Grid2::new(input.mask.width(), input.mask.height(), Rgb::splat(0.5)),
            no_observed: true,
        },
    })
}

/// Y* = (1 - M) * Y + M * Y_hat, selecting per pixel so observed pixels are
/// bitwise identical to Y.
pub fn fuse(
    canvas: &Grid2<Rgb>,
    predicted: &Grid2<Rgb>,
    mask: &Grid2<bool>,
) -> Result<Grid2<Rgb>, CompletionError> {
    check_same_size(canvas, predicted, "canvas vs prediction")?;
    check_same_size(canvas, mask, "canvas vs mask")?;
    let data = canvas
        .data()
        .iter()
        .zip(predicted.data())
        .zip(mask.data())
        .map(|((&y, &yhat), &hole)| if hole { yhat } else { y })
        .collect();
    Ok(Grid2::from_raw(canvas.width(), canvas.height(), data))
}

/// M' = M or R.
pub fn joint_mask(
    mask: &Grid2<bool>,
    occlusion: &Grid2<bool>,
) -> Result<Grid2<bool>, CompletionError> {
    check_same_size(mask, occlusion, "mask vs occlusion")?;
    let data = mask
        .data()
        .iter()
        .zip(occlusion.data())
        .map(|(&m, &r)| m || r)
        .collect();
    Ok(Grid2::from_raw(mask.width(), mask.height(), data))
}

/// Reconstruction loss: L1 over the artificially occluded pixels.
pub fn loss_rec(
    predicted: &Grid2<Rgb>,
    canvas: &Grid2<Rgb>,
    occlusion: &Grid2<bool>,
) -> Result<f64, CompletionError> {
    check_same_size(predicted, canvas, "prediction vs canvas")?;
    check_same_size(predicted, occlusion, "prediction vs occlusion")?;
    Ok(masked_l1(predicted, canvas, occlusion, true))
}

/// Observation consistency loss: L1 over the observed region (complement of M).
pub fn loss_obs(
    predicted: &Grid2<Rgb>,
    canvas: &Grid2<Rgb>,
    mask: &Grid2<bool>,
) -> Result<f64, CompletionError> {
    check_same_size(predicted, canvas, "prediction vs canvas")?;
    check_same_size(predicted, mask, "prediction vs mask")?;
    Ok(masked_l1(predicted, canvas, mask, false))
}

/// L = L_rec + lambda * L_obs.
pub fn loss_total(l_rec: f64, l_obs: f64, lambda: f64) -> f64 {
    assert!(lambda >= 0.0, "lambda must be non-negative");
    l_rec + lambda * l_obs
}

fn masked_l1(a: &Grid2<Rgb>, b: &Grid2<Rgb>, sel: &Grid2<bool>, keep: bool) -> f64 {
    let mut sum = 0.0;
    for ((&pa, &pb), &s) in a.data().iter().zip(b.data()).zip(sel.data()) {
        if s == keep {
            let d = pa - pb;
            sum += d.r.abs() + d.g.abs() + d.b.abs();
        }
    }
    sum
}
