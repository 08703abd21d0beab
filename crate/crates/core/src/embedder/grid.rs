use image::RgbImage;

use super::EmbeddingBackend;
use crate::error::{Error, Result};

pub const GRID_SIDE: u32 = 16;

/// Dependency-free backend: the frame's grayscale intensity averaged over a
/// 16x16 grid of cells, scaled to `[0, 1]`.
///
/// Gray is the plain mean of the three channels. Cell `i` along an axis of
/// length `n` spans pixels `[i*n/16, (i+1)*n/16)`, widened to one pixel when
/// the image is narrower than the grid.
#[derive(Debug, Clone, Default)]
pub struct GridBackend;

pub fn test_backend() -> GridBackend {
    GridBackend
}

fn cell_span(i: u32, n: u32) -> (u32, u32) {
    let start = (u64::from(i) * u64::from(n) / u64::from(GRID_SIDE)) as u32;
    let end = (u64::from(i + 1) * u64::from(n) / u64::from(GRID_SIDE)) as u32;
    let start = start.min(n - 1);
    (start, end.max(start + 1))
}

impl EmbeddingBackend for GridBackend {
    fn name(&self) -> &str {
        "grid16"
    }

    fn dimension(&self) -> usize {
        (GRID_SIDE * GRID_SIDE) as usize
    }

    fn embed(&self, image: &RgbImage) -> Result<Vec<f32>> {
        let (w, h) = image.dimensions();
        if w == 0 || h == 0 {
            return Err(Error::backend(self.name(), "empty image"));
        }
        let mut out = Vec::with_capacity(self.dimension());
        for gy in 0..GRID_SIDE {
            let (y0, y1) = cell_span(gy, h);
            for gx in 0..GRID_SIDE {
                let (x0, x1) = cell_span(gx, w);
                let mut sum = 0u64;
                for y in y0..y1 {
                    for x in x0..x1 {
                        let p = image.get_pixel(x, y);
                        sum += u64::from(p[0]) + u64::from(p[1]) + u64::from(p[2]);
                    }
                }
                let count = u64::from(x1 - x0) * u64::from(y1 - y0);
                out.push((sum as f64 / (3.0 * 255.0 * count as f64)) as f32);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;

    #[test]
    fn dimension_is_256() {
        assert_eq!(test_backend().dimension(), 256);
    }

    #[test]
    fn uniform_gray_gives_equal_components() {
        let img = RgbImage::from_pixel(50, 37, Rgb([128, 128, 128]));
        let v = test_backend().embed(&img).unwrap();
        assert!(v.iter().all(|&x| x == v[0]));
        assert_eq!(v[0], (128.0f64 / 255.0) as f32);
    }

    #[test]
    fn inversion_complements_components() {
        let img = RgbImage::from_fn(61, 45, |x, y| {
            Rgb([(x * 4) as u8, (y * 5) as u8, ((x * 7 + y * 3) % 256) as u8])
        });
        let mut inverted = img.clone();
        image::imageops::invert(&mut inverted);
        let a = test_backend().embed(&img).unwrap();
        let b = test_backend().embed(&inverted).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((f64::from(*y) - (1.0 - f64::from(*x))).abs() < 1e-6);
        }
    }

    #[test]
    fn tiny_images_still_cover_every_cell() {
        let img = RgbImage::from_fn(3, 2, |x, _| Rgb([(x * 100) as u8; 3]));
        let v = test_backend().embed(&img).unwrap();
        assert_eq!(v.len(), 256);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[15], (200.0f64 / 255.0) as f32);
    }

    #[test]
    fn cell_spans_partition_the_axis() {
        for n in [16u32, 17, 100, 1080] {
            let mut next = 0;
            for i in 0..GRID_SIDE {
                let (a, b) = cell_span(i, n);
                assert_eq!(a, next);
                next = b;
            }
            assert_eq!(next, n);
        }
    }
}
