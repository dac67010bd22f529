//! Binary PGM (P5) and PPM (P6) image files, maxval 255. Dependency-free
//! and bit-exact at 8-bit depth.

use std::io::{Read, Write};
use std::path::Path;

use super::image::RasterImage;
use super::{PipelineError, Result};

fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Writes P5 for single-channel images, P6 for RGB.
pub fn write_image(path: &Path, img: &RasterImage) -> Result<()> {
    let magic = if img.channels == 1 { "P5" } else { "P6" };
    let mut out = Vec::with_capacity(img.pixels.len() + 32);
    out.extend_from_slice(format!("{magic}\n{} {}\n255\n", img.width, img.height).as_bytes());
    out.extend(img.pixels.iter().map(|&v| to_byte(v)));
    let mut file = std::fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

fn skip_whitespace_and_comments(data: &[u8], mut pos: usize) -> usize {
    loop {
        while pos < data.len() && data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < data.len() && data[pos] == b'#' {
            while pos < data.len() && data[pos] != b'\n' {
                pos += 1;
            }
        } else {
            return pos;
        }
    }
}

fn read_token(data: &[u8], pos: usize) -> Result<(usize, usize)> {
    let start = skip_whitespace_and_comments(data, pos);
    let mut end = start;
    while end < data.len() && !data[end].is_ascii_whitespace() {
        end += 1;
    }
    if start == end {
        return Err(PipelineError::InvalidImage("truncated header".into()));
    }
    Ok((start, end))
}

fn parse_number(data: &[u8], pos: usize) -> Result<(usize, usize)> {
    let (start, end) = read_token(data, pos)?;
    let text = std::str::from_utf8(&data[start..end])
        .map_err(|_| PipelineError::InvalidImage("non-ascii header".into()))?;
    let value: usize = text
        .parse()
        .map_err(|_| PipelineError::InvalidImage(format!("bad header number {text:?}")))?;
    Ok((value, end))
}

/// Reads P5 or P6 with maxval 255.
pub fn read_image(path: &Path) -> Result<RasterImage> {
    let mut data = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut data)?;
    if data.len() < 2 {
        return Err(PipelineError::InvalidImage("file too short".into()));
    }
    let channels = match &data[..2] {
        b"P5" => 1,
        b"P6" => 3,
        other => {
            return Err(PipelineError::InvalidImage(format!(
                "unsupported magic {:?}",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let (width, pos) = parse_number(&data, 2)?;
    let (height, pos) = parse_number(&data, pos)?;
    let (maxval, pos) = parse_number(&data, pos)?;
    if maxval != 255 {
        return Err(PipelineError::InvalidImage(format!(
            "only maxval 255 supported, got {maxval}"
        )));
    }
    // exactly one whitespace byte separates header and raster
    let raster_start = pos + 1;
    let expected = width * height * channels;
    if data.len() < raster_start + expected {
        return Err(PipelineError::InvalidImage(format!(
            "raster truncated: need {expected} bytes"
        )));
    }
    let pixels = data[raster_start..raster_start + expected]
        .iter()
        .map(|&b| b as f64 / 255.0)
        .collect();
    RasterImage::new(width, height, channels, pixels)
}
