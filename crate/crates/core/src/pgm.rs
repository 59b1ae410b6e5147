//! 8-bit binary PGM (`P5`) images.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::{Error, Result};

/// An 8-bit grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

/// Next header token, skipping whitespace and `#` comments.
fn token<'a>(data: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        while *pos < data.len() && data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < data.len() && data[*pos] == b'#' {
            while *pos < data.len() && data[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < data.len() && !data[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Pgm("truncated header".into()));
    }
    Ok(&data[start..*pos])
}

fn number(data: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let t = token(data, pos)?;
    std::str::from_utf8(t)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Pgm(format!("bad {what}: {:?}", String::from_utf8_lossy(t))))
}

pub fn decode(data: &[u8]) -> Result<GrayImage> {
    let mut pos = 0;
    if token(data, &mut pos)? != b"P5" {
        return Err(Error::Pgm("not a binary PGM (P5)".into()));
    }
    let width = number(data, &mut pos, "width")?;
    let height = number(data, &mut pos, "height")?;
    let maxval = number(data, &mut pos, "maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Pgm("zero dimension".into()));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::Pgm(format!("only 8-bit images are supported (maxval {maxval})")));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let n = width * height;
    let raster = data.get(pos..pos + n).ok_or_else(|| Error::Pgm("truncated raster".into()))?;
    Ok(GrayImage { width, height, pixels: raster.to_vec() })
}

pub fn encode(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

pub fn read(path: impl AsRef<Path>) -> Result<GrayImage> {
    decode(&fs::read(path)?)
}

pub fn write(path: impl AsRef<Path>, img: &GrayImage) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode(img))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let img = GrayImage { width: 3, height: 2, pixels: vec![0, 10, 255, 32, 9, 13] };
        assert_eq!(decode(&encode(&img)).unwrap(), img);
    }

    #[test]
    fn comments_and_errors() {
        let data = b"P5 # c\n2 # w\n1\n255\n\x01\x02";
        assert_eq!(decode(data).unwrap().pixels, vec![1, 2]);
        assert!(decode(b"P2\n1 1\n255\n0").is_err());
        assert!(decode(b"P5\n2 2\n255\n\x00").is_err());
        assert!(decode(b"P5\n1 1\n65535\n\x00\x00").is_err());
    }
}
