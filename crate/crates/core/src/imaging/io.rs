//! Image and kernel files.
//!
//! 8-bit inputs map to `sample / 255`, 16-bit to `sample / 65535`. Images with
//! color become 3-channel rasters, everything else 1-channel. PNG output is
//! 8-bit with samples clamped to `[0, 1]` and rounded.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, ImageReader, RgbImage};

use super::{ImagingError, MotionPsf, RasterImage};
use crate::seqcore::{parse_sequence_text, ExposureSequence};

fn codec_err(path: &Path) -> impl FnOnce(image::ImageError) -> ImagingError + '_ {
    move |source| ImagingError::Codec {
        path: path.display().to_string(),
        source,
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ImagingError + '_ {
    move |source| ImagingError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn load_image(path: &Path) -> Result<RasterImage, ImagingError> {
    let img = ImageReader::open(path)
        .map_err(io_err(path))?
        .with_guessed_format()
        .map_err(io_err(path))?
        .decode()
        .map_err(codec_err(path))?;
    from_dynamic(&img)
}

pub fn decode_image(bytes: &[u8]) -> Result<RasterImage, ImagingError> {
    let img = image::load_from_memory(bytes).map_err(codec_err(Path::new("<memory>")))?;
    from_dynamic(&img)
}

fn from_dynamic(img: &DynamicImage) -> Result<RasterImage, ImagingError> {
    let color = img.color();
    let wide = color.bytes_per_pixel() / color.channel_count() > 1;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let channels = if color.has_color() { 3 } else { 1 };
    let interleaved: Vec<f64> = match (channels, wide) {
        (1, false) => img
            .to_luma8()
            .into_raw()
            .into_iter()
            .map(|v| f64::from(v) / 255.0)
            .collect(),
        (1, true) => img
            .to_luma16()
            .into_raw()
            .into_iter()
            .map(|v| f64::from(v) / 65535.0)
            .collect(),
        (_, false) => img
            .to_rgb8()
            .into_raw()
            .into_iter()
            .map(|v| f64::from(v) / 255.0)
            .collect(),
        (_, true) => img
            .to_rgb16()
            .into_raw()
            .into_iter()
            .map(|v| f64::from(v) / 65535.0)
            .collect(),
    };
    RasterImage::from_fn(w, h, channels, |x, y, c| {
        interleaved[(y * w + x) * channels + c]
    })
}

pub fn to_8bit(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn to_dynamic(img: &RasterImage) -> DynamicImage {
    let (w, h) = (img.width(), img.height());
    let mut raw = Vec::with_capacity(w * h * img.channels());
    for y in 0..h {
        for x in 0..w {
            for c in 0..img.channels() {
                raw.push(to_8bit(img.get(x, y, c)));
            }
        }
    }
    if img.channels() == 1 {
        DynamicImage::ImageLuma8(GrayImage::from_raw(w as u32, h as u32, raw).expect("buffer size"))
    } else {
        DynamicImage::ImageRgb8(RgbImage::from_raw(w as u32, h as u32, raw).expect("buffer size"))
    }
}

pub fn encode_png(img: &RasterImage) -> Result<Vec<u8>, ImagingError> {
    let mut out = Cursor::new(Vec::new());
    to_dynamic(img)
        .write_to(&mut out, ImageFormat::Png)
        .map_err(codec_err(Path::new("<memory>")))?;
    Ok(out.into_inner())
}

pub fn save_png(img: &RasterImage, path: &Path) -> Result<(), ImagingError> {
    fs::write(path, encode_png(img)?).map_err(io_err(path))
}

/// Reads a kernel from a single-row (or single-column) image, or from a
/// sequence text file for any other extension.
pub fn load_psf(path: &Path) -> Result<MotionPsf, ImagingError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    if matches!(ext.as_str(), "pgm" | "pnm" | "png") {
        let img = load_image(path)?;
        if img.height() != 1 && img.width() != 1 {
            return Err(ImagingError::InvalidPsf(format!(
                "{}: kernel image must be a single row, got {}x{}",
                path.display(),
                img.width(),
                img.height()
            )));
        }
        let luma: Vec<f64> = if img.channels() == 1 {
            img.samples().to_vec()
        } else {
            let n = img.width() * img.height();
            (0..n)
                .map(|i| (img.samples()[i] + img.samples()[n + i] + img.samples()[2 * n + i]) / 3.0)
                .collect()
        };
        MotionPsf::from_taps(luma)
    } else {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        MotionPsf::from_sequence(&parse_sequence_text(&text)?)
    }
}

pub fn write_kernel_pgm(
    seq: &ExposureSequence,
    path: &Path,
    ascii: bool,
) -> Result<(), ImagingError> {
    fs::write(path, seq.to_kernel_pgm(ascii)).map_err(io_err(path))
}
