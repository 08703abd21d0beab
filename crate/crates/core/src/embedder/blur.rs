//! Separable discrete Gaussian blur with edge-clamp padding.

use image::RgbImage;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BoundingBox;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BlurSpec {
    /// Odd number of taps.
    pub kernel_size: usize,
    pub sigma: f64,
}

impl Default for BlurSpec {
    fn default() -> Self {
        Self {
            kernel_size: 201,
            sigma: 38.0,
        }
    }
}

impl BlurSpec {
    pub fn validate(&self) -> Result<()> {
        if self.kernel_size.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "blur kernel size {} must be odd",
                self.kernel_size
            )));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::Config(format!("blur sigma {} must be positive", self.sigma)));
        }
        Ok(())
    }

    /// Normalized sampled Gaussian taps.
    pub fn kernel(&self) -> Vec<f32> {
        let radius = (self.kernel_size / 2) as f64;
        let denom = 2.0 * self.sigma * self.sigma;
        let raw: Vec<f64> = (0..self.kernel_size)
            .map(|i| {
                let d = i as f64 - radius;
                (-d * d / denom).exp()
            })
            .collect();
        let sum: f64 = raw.iter().sum();
        raw.iter().map(|w| (w / sum) as f32).collect()
    }
}

const CHANNELS: usize = 3;

/// Blurs the whole image.
pub fn gaussian_blur(image: &RgbImage, spec: &BlurSpec) -> Result<RgbImage> {
    spec.validate()?;
    let (w, h) = (image.width() as usize, image.height() as usize);
    if w == 0 || h == 0 {
        return Ok(image.clone());
    }
    let kernel = spec.kernel();
    let radius = kernel.len() / 2;
    let src: Vec<f32> = image.as_raw().iter().map(|&v| f32::from(v)).collect();
    let stride = w * CHANNELS;

    // Horizontal pass over clamp-padded rows.
    let mut horizontal = vec![0f32; src.len()];
    horizontal
        .par_chunks_mut(stride)
        .zip(src.par_chunks(stride))
        .for_each_init(
            || vec![0f32; (w + 2 * radius) * CHANNELS],
            |padded, (out_row, in_row)| {
                for px in 0..w + 2 * radius {
                    let x = px.saturating_sub(radius).min(w - 1);
                    padded[px * CHANNELS..(px + 1) * CHANNELS]
                        .copy_from_slice(&in_row[x * CHANNELS..(x + 1) * CHANNELS]);
                }
                for x in 0..w {
                    let mut acc = [0f32; CHANNELS];
                    for (k, &weight) in kernel.iter().enumerate() {
                        let base = (x + k) * CHANNELS;
                        for c in 0..CHANNELS {
                            acc[c] += weight * padded[base + c];
                        }
                    }
                    out_row[x * CHANNELS..(x + 1) * CHANNELS].copy_from_slice(&acc);
                }
            },
        );

    // Vertical pass: each output row is a weighted sum of clamped input rows.
    let mut out = vec![0u8; src.len()];
    out.par_chunks_mut(stride).enumerate().for_each_init(
        || vec![0f32; stride],
        |acc, (y, out_row)| {
            acc.iter_mut().for_each(|v| *v = 0.0);
            for (k, &weight) in kernel.iter().enumerate() {
                let sy = (y + k).saturating_sub(radius).min(h - 1);
                let row = &horizontal[sy * stride..(sy + 1) * stride];
                for (a, v) in acc.iter_mut().zip(row) {
                    *a += weight * v;
                }
            }
            for (o, v) in out_row.iter_mut().zip(acc.iter()) {
                *o = (v + 0.5).clamp(0.0, 255.0) as u8;
            }
        },
    );
    Ok(RgbImage::from_raw(w as u32, h as u32, out).expect("buffer sized from the input image"))
}

/// Pixel rectangle `[x0, x1) x [y0, y1)` covered by `bbox`, clipped to the image.
pub fn pixel_region(bbox: &BoundingBox, width: u32, height: u32) -> Option<(u32, u32, u32, u32)> {
    let clip = |v: f64, max: u32| v.clamp(0.0, f64::from(max)) as u32;
    let x0 = clip(bbox.left.floor(), width);
    let y0 = clip(bbox.top.floor(), height);
    let x1 = clip(bbox.right().ceil(), width);
    let y1 = clip(bbox.bottom().ceil(), height);
    (x1 > x0 && y1 > y0).then_some((x0, y0, x1, y1))
}

/// A frame paired with its blurred copy, so several objects of the same frame
/// can be put in focus without blurring again.
pub struct FocusFrame<'a> {
    original: &'a RgbImage,
    blurred: RgbImage,
}

impl<'a> FocusFrame<'a> {
    pub fn new(original: &'a RgbImage, spec: &BlurSpec) -> Result<Self> {
        Ok(Self {
            original,
            blurred: gaussian_blur(original, spec)?,
        })
    }

    pub fn blurred(&self) -> &RgbImage {
        &self.blurred
    }

    /// The blurred frame with the pixels of `bbox` restored from the original.
    pub fn focus(&self, bbox: &BoundingBox) -> Result<RgbImage> {
        let (w, h) = self.original.dimensions();
        let (x0, y0, x1, y1) =
            pixel_region(bbox, w, h).ok_or(Error::BoxOutsideImage { width: w, height: h })?;
        let mut out = self.blurred.clone();
        let stride = w as usize * CHANNELS;
        let (a, b) = (x0 as usize * CHANNELS, x1 as usize * CHANNELS);
        let src = self.original.as_raw();
        let dst: &mut [u8] = &mut out;
        for y in y0 as usize..y1 as usize {
            let row = y * stride;
            dst[row + a..row + b].copy_from_slice(&src[row + a..row + b]);
        }
        Ok(out)
    }
}

/// Gaussian-blurs the frame everywhere except inside `bbox`.
pub fn blur_except_box(frame: &RgbImage, bbox: &BoundingBox, spec: &BlurSpec) -> Result<RgbImage> {
    let (w, h) = frame.dimensions();
    if pixel_region(bbox, w, h).is_none() {
        return Err(Error::BoxOutsideImage { width: w, height: h });
    }
    FocusFrame::new(frame, spec)?.focus(bbox)
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;

    fn checkerboard(size: u32, cell: u32) -> RgbImage {
        RgbImage::from_fn(size, size, |x, y| {
            if (x / cell + y / cell).is_multiple_of(2) {
                Rgb([255, 255, 255])
            } else {
                Rgb([0, 0, 0])
            }
        })
    }

    fn variance(values: &[f64]) -> f64 {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64
    }

    #[test]
    fn kernel_is_normalized_and_symmetric() {
        let k = BlurSpec::default().kernel();
        assert_eq!(k.len(), 201);
        let sum: f64 = k.iter().map(|&v| f64::from(v)).sum();
        assert!((sum - 1.0).abs() < 1e-5);
        assert_eq!(k[0], k[200]);
        assert!(k[100] > k[99]);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(BlurSpec { kernel_size: 4, sigma: 1.0 }.validate().is_err());
        assert!(BlurSpec { kernel_size: 5, sigma: 0.0 }.validate().is_err());
    }

    #[test]
    fn constant_image_unchanged() {
        let img = RgbImage::from_pixel(40, 30, Rgb([17, 128, 250]));
        assert_eq!(gaussian_blur(&img, &BlurSpec::default()).unwrap(), img);
        let bbox = BoundingBox::new(5.0, 5.0, 3.0, 3.0);
        assert_eq!(blur_except_box(&img, &bbox, &BlurSpec::default()).unwrap(), img);
    }

    #[test]
    fn full_frame_box_returns_input() {
        let img = checkerboard(32, 4);
        let bbox = BoundingBox::new(-3.0, -3.0, 100.0, 100.0);
        assert_eq!(blur_except_box(&img, &bbox, &BlurSpec::default()).unwrap(), img);
    }

    #[test]
    fn box_pixels_kept_and_background_smoothed() {
        let img = checkerboard(256, 8);
        let bbox = BoundingBox::new(100.0, 60.0, 24.0, 40.0);
        let out = blur_except_box(&img, &bbox, &BlurSpec::default()).unwrap();
        assert_eq!(out.dimensions(), img.dimensions());
        let (mut before, mut after) = (Vec::new(), Vec::new());
        for (x, y, px) in img.enumerate_pixels() {
            let inside = (100..124).contains(&x) && (60..100).contains(&y);
            if inside {
                assert_eq!(out.get_pixel(x, y), px);
            } else {
                before.push(f64::from(px[0]));
                after.push(f64::from(out.get_pixel(x, y)[0]));
            }
        }
        assert!(variance(&after) < variance(&before));
    }

    #[test]
    fn box_outside_is_error() {
        let img = checkerboard(16, 2);
        let bbox = BoundingBox::new(20.0, 0.0, 5.0, 5.0);
        assert!(matches!(
            blur_except_box(&img, &bbox, &BlurSpec::default()),
            Err(Error::BoxOutsideImage { .. })
        ));
    }

    #[test]
    fn partial_box_is_clipped() {
        let img = checkerboard(16, 2);
        assert_eq!(
            pixel_region(&BoundingBox::new(-4.5, 10.2, 8.0, 20.0), 16, 16),
            Some((0, 10, 4, 16))
        );
        let spec = BlurSpec { kernel_size: 5, sigma: 1.0 };
        let out = blur_except_box(&img, &BoundingBox::new(-4.5, 10.2, 8.0, 20.0), &spec).unwrap();
        assert_eq!(out.get_pixel(0, 15), img.get_pixel(0, 15));
    }

    #[test]
    fn small_kernel_matches_direct_2d_convolution() {
        let img = RgbImage::from_fn(9, 7, |x, y| Rgb([(x * 25) as u8, (y * 30) as u8, ((x * y) % 255) as u8]));
        let spec = BlurSpec { kernel_size: 5, sigma: 1.3 };
        let k = spec.kernel();
        let out = gaussian_blur(&img, &spec).unwrap();
        for y in 0..7i64 {
            for x in 0..9i64 {
                for c in 0..3 {
                    let mut acc = 0f64;
                    for (j, wy) in k.iter().enumerate() {
                        for (i, wx) in k.iter().enumerate() {
                            let sx = (x + i as i64 - 2).clamp(0, 8) as u32;
                            let sy = (y + j as i64 - 2).clamp(0, 6) as u32;
                            acc += f64::from(*wx) * f64::from(*wy) * f64::from(img.get_pixel(sx, sy)[c]);
                        }
                    }
                    let got = f64::from(out.get_pixel(x as u32, y as u32)[c]);
                    assert!((got - acc).abs() <= 1.0, "({x},{y},{c}): {got} vs {acc}");
                }
            }
        }
    }
}
