//! Quality metrics over overlap regions: PSNR and SSIM restricted to pixels
//! both inputs observed.

use rayon::prelude::*;
use thiserror::Error;

use crate::grid::{Grid2, Rgb};

/// SSIM window side; windows must lie fully inside the overlap.
pub const SSIM_WINDOW: usize = 8;
const C1: f64 = 0.01 * 0.01;
const C2: f64 = 0.03 * 0.03;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("overlap region is empty")]
    EmptyOverlap,
    #[error("overlap admits no full {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window")]
    NoValidWindows,
}

/// Two images with the mask of pixels observed in both.
#[derive(Debug, Clone)]
pub struct OverlapPair {
    pub a: Grid2<Rgb>,
    pub b: Grid2<Rgb>,
    pub overlap: Grid2<bool>,
}

impl OverlapPair {
    pub fn new(a: Grid2<Rgb>, b: Grid2<Rgb>, overlap: Grid2<bool>) -> Result<Self, MetricsError> {
        if !a.same_size(&b) || !a.same_size(&overlap) {
            return Err(MetricsError::DimensionMismatch(format!(
                "a {}x{}, b {}x{}, overlap {}x{}",
                a.width(),
                a.height(),
                b.width(),
                b.height(),
                overlap.width(),
                overlap.height()
            )));
        }
        Ok(OverlapPair { a, b, overlap })
    }

    pub fn overlap_count(&self) -> usize {
        self.overlap.data().iter().filter(|&&o| o).count()
    }
}

/// True where both hole masks are clear.
pub fn overlap_mask(ma: &Grid2<bool>, mb: &Grid2<bool>) -> Result<Grid2<bool>, MetricsError> {
    if !ma.same_size(mb) {
        return Err(MetricsError::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            ma.width(),
            ma.height(),
            mb.width(),
            mb.height()
        )));
    }
    let data = ma
        .data()
        .iter()
        .zip(mb.data())
        .map(|(&a_hole, &b_hole)| !a_hole && !b_hole)
        .collect();
    Ok(Grid2::from_raw(ma.width(), ma.height(), data))
}

/// 10 log10(1 / MSE) with unit peak, MSE averaged over overlap pixels and
/// the three channels. Identical inputs give +inf.
pub fn psnr(pair: &OverlapPair) -> Result<f64, MetricsError> {
    let mut sum = 0.0f64;
    let mut count = 0usize;
    for ((&pa, &pb), &inside) in pair
        .a
        .data()
        .iter()
        .zip(pair.b.data())
        .zip(pair.overlap.data())
    {
        if inside {
            let d = pa - pb;
            sum += d.r * d.r + d.g * d.g + d.b * d.b;
            count += 1;
        }
    }
    if count == 0 {
        return Err(MetricsError::EmptyOverlap);
    }
    let mse = sum / (3.0 * count as f64);
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-10.0 * mse.log10())
}

/// Mean local SSIM on luma over 8x8 windows fully inside the overlap,
/// uniform window weights, C1 = 0.01^2 and C2 = 0.03^2 on unit range.
pub fn ssim(pair: &OverlapPair) -> Result<f64, MetricsError> {
    if pair.overlap_count() == 0 {
        return Err(MetricsError::EmptyOverlap);
    }
    let (w, h) = (pair.a.width(), pair.a.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(MetricsError::NoValidWindows);
    }
    let la = pair.a.map(|c| c.luma());
    let lb = pair.b.map(|c| c.luma());

    // Per window-row partial sums, folded in row order for determinism.
    let partials: Vec<(f64, usize)> = (0..=h - SSIM_WINDOW)
        .into_par_iter()
        .map(|y0| {
            let mut sum = 0.0f64;
            let mut count = 0usize;
            'window: for x0 in 0..=w - SSIM_WINDOW {
                for dy in 0..SSIM_WINDOW {
                    for dx in 0..SSIM_WINDOW {
                        if !*pair.overlap.get(x0 + dx, y0 + dy) {
                            continue 'window;
                        }
                    }
                }
                sum += window_ssim(&la, &lb, x0, y0);
                count += 1;
            }
            (sum, count)
        })
        .collect();

    let (total, windows) = partials
        .into_iter()
        .fold((0.0f64, 0usize), |(s, c), (ps, pc)| (s + ps, c + pc));
    if windows == 0 {
        return Err(MetricsError::NoValidWindows);
    }
    Ok(total / windows as f64)
}

fn window_ssim(la: &Grid2<f64>, lb: &Grid2<f64>, x0: usize, y0: usize) -> f64 {
    let n = (SSIM_WINDOW * SSIM_WINDOW) as f64;
    let mut sa = 0.0;
    let mut sb = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    let mut sab = 0.0;
    for dy in 0..SSIM_WINDOW {
        for dx in 0..SSIM_WINDOW {
            let a = *la.get(x0 + dx, y0 + dy);
            let b = *lb.get(x0 + dx, y0 + dy);
            sa += a;
            sb += b;
            saa += a * a;
            sbb += b * b;
            sab += a * b;
        }
    }
    let mu_a = sa / n;
    let mu_b = sb / n;
    let var_a = saa / n - mu_a * mu_a;
    let var_b = sbb / n - mu_b * mu_b;
    let cov = sab / n - mu_a * mu_b;
    ((2.0 * mu_a * mu_b + C1) * (2.0 * cov + C2))
        / ((mu_a * mu_a + mu_b * mu_b + C1) * (var_a + var_b + C2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn full_pair(a: Grid2<Rgb>, b: Grid2<Rgb>) -> OverlapPair {
        let overlap = Grid2::new(a.width(), a.height(), true);
        OverlapPair::new(a, b, overlap).unwrap()
    }

    fn noise_image(w: usize, h: usize, seed: u64) -> Grid2<Rgb> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let data = (0..w * h)
            .map(|_| {
                Rgb::new(
                    rng.gen_range(0.0..1.0),
                    rng.gen_range(0.0..1.0),
                    rng.gen_range(0.0..1.0),
                )
            })
            .collect();
        Grid2::from_raw(w, h, data)
    }

    #[test]
    fn overlap_mask_truth_table() {
        let ma = Grid2::from_raw(2, 2, vec![false, false, true, true]);
        let mb = Grid2::from_raw(2, 2, vec![false, true, false, true]);
        assert_eq!(
            overlap_mask(&ma, &mb).unwrap().data(),
            &[true, false, false, false]
        );
        let all_hole = Grid2::new(2, 2, true);
        let overlap = overlap_mask(&all_hole, &all_hole).unwrap();
        assert!(overlap.data().iter().all(|&o| !o));
    }

    #[test]
    fn identical_images_have_infinite_psnr() {
        let a = noise_image(16, 16, 1);
        assert_eq!(psnr(&full_pair(a.clone(), a)).unwrap(), f64::INFINITY);
    }

    #[test]
    fn uniform_half_error_is_six_db() {
        let a = Grid2::new(16, 16, Rgb::splat(0.25));
        let b = Grid2::new(16, 16, Rgb::splat(0.75));
        let db = psnr(&full_pair(a, b)).unwrap();
        // MSE = 0.25, so 10 log10(1/0.25) = 6.0206.
        assert!((db - 6.0206).abs() < 1e-3);
    }

    #[test]
    fn psnr_of_constant_error_ignores_overlap_size() {
        let a = Grid2::new(16, 16, Rgb::splat(0.2));
        let b = Grid2::new(16, 16, Rgb::splat(0.4));
        let full = psnr(&full_pair(a.clone(), b.clone())).unwrap();
        let mut overlap = Grid2::new(16, 16, false);
        for v in 0..8 {
            for u in 0..16 {
                *overlap.get_mut(u, v) = true;
            }
        }
        let half = psnr(&OverlapPair::new(a, b, overlap).unwrap()).unwrap();
        assert!((full - half).abs() < 1e-9);
    }

    #[test]
    fn empty_overlap_is_error() {
        let a = Grid2::new(4, 4, Rgb::splat(0.5));
        let pair = OverlapPair::new(a.clone(), a, Grid2::new(4, 4, false)).unwrap();
        assert!(matches!(psnr(&pair), Err(MetricsError::EmptyOverlap)));
        assert!(matches!(ssim(&pair), Err(MetricsError::EmptyOverlap)));
    }

    #[test]
    fn ssim_of_identical_images_is_exactly_one() {
        let a = noise_image(24, 16, 2);
        assert_eq!(ssim(&full_pair(a.clone(), a)).unwrap(), 1.0);
    }

    #[test]
    fn ssim_of_matching_constants_is_one() {
        let a = Grid2::new(16, 16, Rgb::splat(0.3));
        assert_eq!(ssim(&full_pair(a.clone(), a)).unwrap(), 1.0);
    }

    #[test]
    fn thin_overlap_has_no_valid_windows() {
        let a = noise_image(32, 32, 3);
        let mut overlap = Grid2::new(32, 32, false);
        for u in 0..32 {
            for v in 0..4 {
                *overlap.get_mut(u, v) = true;
            }
        }
        let pair = OverlapPair::new(a.clone(), a, overlap).unwrap();
        assert!(matches!(ssim(&pair), Err(MetricsError::NoValidWindows)));
    }

    /// Independent sliding-window implementation used as the oracle for the
    /// inverted-image case.
    fn ssim_oracle(a: &Grid2<Rgb>, b: &Grid2<Rgb>) -> f64 {
        let (w, h) = (a.width(), a.height());
        let mut total = 0.0;
        let mut count = 0;
        for y0 in 0..=h - 8 {
            for x0 in 0..=w - 8 {
                let mut xs = Vec::with_capacity(64);
                let mut ys = Vec::with_capacity(64);
                for dy in 0..8 {
                    for dx in 0..8 {
                        xs.push(a.get(x0 + dx, y0 + dy).luma());
                        ys.push(b.get(x0 + dx, y0 + dy).luma());
                    }
                }
                let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
                let (ma, mb) = (mean(&xs), mean(&ys));
                let va = mean(&xs.iter().map(|x| x * x).collect::<Vec<_>>()) - ma * ma;
                let vb = mean(&ys.iter().map(|y| y * y).collect::<Vec<_>>()) - mb * mb;
                let cov = xs.iter().zip(&ys).map(|(x, y)| x * y).sum::<f64>() / 64.0 - ma * mb;
                total += ((2.0 * ma * mb + 1e-4) * (2.0 * cov + 9e-4))
                    / ((ma * ma + mb * mb + 1e-4) * (va + vb + 9e-4));
                count += 1;
            }
        }
        total / count as f64
    }

    #[test]
    fn inverted_high_variance_image_scores_low() {
        let a = noise_image(32, 32, 4);
        let b = a.map(|c| Rgb::new(1.0 - c.r, 1.0 - c.g, 1.0 - c.b));
        let got = ssim(&full_pair(a.clone(), b.clone())).unwrap();
        let expect = ssim_oracle(&a, &b);
        assert!((got - expect).abs() < 1e-9, "lib {got} vs oracle {expect}");
        assert!(
            got < 0.5,
            "inverted image should score below 0.5, got {got}"
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn metrics_are_symmetric(sa in 0u64..1000, sb in 1000u64..2000) {
            let a = noise_image(16, 16, sa);
            let b = noise_image(16, 16, sb);
            let p_ab = psnr(&full_pair(a.clone(), b.clone())).unwrap();
            let p_ba = psnr(&full_pair(b.clone(), a.clone())).unwrap();
            prop_assert_eq!(p_ab.to_bits(), p_ba.to_bits());
            let s_ab = ssim(&full_pair(a.clone(), b.clone())).unwrap();
            let s_ba = ssim(&full_pair(b, a)).unwrap();
            prop_assert_eq!(s_ab.to_bits(), s_ba.to_bits());
        }

        #[test]
        fn psnr_decreases_with_error(d1 in 1e-3f64..0.5, d2 in 1e-3f64..0.5) {
            prop_assume!(d1 < d2);
            let a = Grid2::new(8, 8, Rgb::splat(0.2));
            let b1 = Grid2::new(8, 8, Rgb::splat(0.2 + d1));
            let b2 = Grid2::new(8, 8, Rgb::splat(0.2 + d2));
            let p1 = psnr(&full_pair(a.clone(), b1)).unwrap();
            let p2 = psnr(&full_pair(a, b2)).unwrap();
            prop_assert!(p1 > p2);
        }
    }
}
