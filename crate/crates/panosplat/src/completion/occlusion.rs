//! Random occlusion masks for self-supervised masked reconstruction.
//!
//! Rectangles only ever cover observed pixels (R is a subset of the
//! complement of M) and the achieved coverage of the observed region tracks
//! the target. Side lengths are drawn uniformly from [4, W/4] and shrunk to
//! the remaining budget so the target is never overshot by more than one
//! rectangle row.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::CompletionError;
use crate::grid::Grid2;

/// Deterministic rectangle-based occlusion sampler.
#[derive(Debug, Clone)]
pub struct OcclusionSampler {
    pub seed: u64,
    /// Target fraction of the observed region to occlude, in (0, 1).
    pub coverage: f64,
    pub shape: OcclusionShape,
}

#[derive(Debug, Clone)]
pub enum OcclusionShape {
    Rectangles { min_count: usize, max_count: usize },
}

impl OcclusionSampler {
    pub fn new(seed: u64, coverage: f64) -> Self {
        OcclusionSampler {
            seed,
            coverage,
            shape: OcclusionShape::Rectangles {
                min_count: 1,
                max_count: 4096,
            },
        }
    }
}

/// Samples R with R ⊆ observed(M); deterministic for a fixed seed.
pub fn sample_occlusion(
    sampler: &OcclusionSampler,
    mask: &Grid2<bool>,
) -> Result<Grid2<bool>, CompletionError> {
    if !(sampler.coverage > 0.0 && sampler.coverage < 1.0) {
        return Err(CompletionError::InvalidCoverage(sampler.coverage));
    }
    let observed: usize = mask.data().iter().filter(|&&h| !h).count();
    if observed == 0 {
        return Err(CompletionError::NoObservedPixels);
    }
    let OcclusionShape::Rectangles {
        min_count,
        max_count,
    } = sampler.shape;
    assert!(min_count <= max_count && max_count >= 1);

    let (w, h) = (mask.width(), mask.height());
    let target = (sampler.coverage * observed as f64).round().max(1.0) as usize;
    let side_lo = 4.min(w / 4).max(1);
    let side_hi = (w / 4).max(side_lo);

    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
    let mut occluded = Grid2::new(w, h, false);
    let mut covered = 0usize;
    let mut placed = 0usize;
    let max_attempts = max_count * 4;

    for _ in 0..max_attempts {
        if placed >= max_count || (covered >= target && placed >= min_count) {
            break;
        }
        let mut rw = rng.gen_range(side_lo..=side_hi).min(w);
        let mut rh = rng.gen_range(side_lo..=side_hi).min(h);
        // Shrink toward the remaining budget so we do not blow past the target.
        let remaining = target.saturating_sub(covered).max(1);
        if rw * rh > remaining {
            rh = (remaining.div_ceil(rw)).clamp(1, rh);
            if rw * rh > remaining {
                rw = remaining.clamp(1, rw);
                rh = 1;
            }
        }
        let x0 = rng.gen_range(0..=w - rw);
        let y0 = rng.gen_range(0..=h - rh);
        placed += 1;
        for v in y0..y0 + rh {
            for u in x0..x0 + rw {
                // Clip to the observed region: R never covers real holes.
                if !*mask.get(u, v) && !*occluded.get(u, v) {
                    *occluded.get_mut(u, v) = true;
                    covered += 1;
                }
            }
        }
    }

    Ok(occluded)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_seed_is_deterministic() {
        let mask = Grid2::new(128, 64, false);
        let sampler = OcclusionSampler::new(42, 0.15);
        let a = sample_occlusion(&sampler, &mask).unwrap();
        let b = sample_occlusion(&sampler, &mask).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn coverage_tracks_target_on_fully_observed_canvas() {
        let mask = Grid2::new(256, 256, false);
        let sampler = OcclusionSampler::new(7, 0.2);
        let r = sample_occlusion(&sampler, &mask).unwrap();
        let frac = r.data().iter().filter(|&&o| o).count() as f64 / (256.0 * 256.0);
        assert!(
            (0.16..=0.24).contains(&frac),
            "coverage {frac} outside +/-20%"
        );
    }

    #[test]
    fn never_occludes_holes() {
        let mut mask = Grid2::new(64, 64, false);
        for v in 0..64 {
            for u in 0..32 {
                *mask.get_mut(u, v) = true;
            }
        }
        let r = sample_occlusion(&OcclusionSampler::new(3, 0.3), &mask).unwrap();
        for (u, v, &occ) in r.iter_pixels() {
            if occ {
                assert!(!*mask.get(u, v), "occluded a hole at ({u},{v})");
            }
        }
    }

    #[test]
    fn zero_coverage_rejected() {
        let mask = Grid2::new(16, 16, false);
        assert!(matches!(
            sample_occlusion(&OcclusionSampler::new(1, 0.0), &mask),
            Err(CompletionError::InvalidCoverage(_))
        ));
    }

    #[test]
    fn all_hole_mask_rejected() {
        let mask = Grid2::new(16, 16, true);
        assert!(matches!(
            sample_occlusion(&OcclusionSampler::new(1, 0.5), &mask),
            Err(CompletionError::NoObservedPixels)
        ));
    }

    #[test]
    fn different_seeds_differ() {
        let mask = Grid2::new(128, 128, false);
        let a = sample_occlusion(&OcclusionSampler::new(1, 0.2), &mask).unwrap();
        let b = sample_occlusion(&OcclusionSampler::new(2, 0.2), &mask).unwrap();
        assert_ne!(a, b);
    }
}
