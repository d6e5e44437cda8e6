//! 8-bit raster images and their on-disk formats: binary PGM (P5), binary
//! PPM (P6) and a headerless raw layout of three little-endian `u32`s
//! (width, height, channels) followed by the samples.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major, channel-interleaved 8-bit image with 1 or 3 channels.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Image {
    width: u32,
    height: u32,
    channels: u8,
    pixels: Vec<u8>,
}

impl std::fmt::Debug for Image {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Image")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("channels", &self.channels)
            .field("len", &self.pixels.len())
            .finish()
    }
}

impl Image {
    pub fn new(width: u32, height: u32, channels: u8, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Image(format!("empty image {width}x{height}")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::Image(format!("unsupported channel count {channels}")));
        }
        let want = width as usize * height as usize * channels as usize;
        if pixels.len() != want {
            return Err(Error::Image(format!(
                "buffer holds {} samples, {width}x{height}x{channels} needs {want}",
                pixels.len()
            )));
        }
        Ok(Self { width, height, channels, pixels })
    }

    pub fn filled(width: u32, height: u32, channels: u8, value: u8) -> Result<Self> {
        Self::new(
            width,
            height,
            channels,
            vec![value; width as usize * height as usize * channels as usize],
        )
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * self.channels as usize
    }

    pub fn pixel(&self, x: u32, y: u32) -> &[u8] {
        let o = self.offset(x, y);
        &self.pixels[o..o + self.channels as usize]
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    /// Copy of the `w x h` region whose top-left pixel is `(x, y)`.
    pub fn crop(&self, x: u32, y: u32, w: u32, h: u32) -> Result<Image> {
        if x + w > self.width || y + h > self.height {
            return Err(Error::Image(format!(
                "crop {w}x{h}+{x}+{y} outside {}x{}",
                self.width, self.height
            )));
        }
        let c = self.channels as usize;
        let mut out = Vec::with_capacity(w as usize * h as usize * c);
        for row in y..y + h {
            let o = self.offset(x, row);
            out.extend_from_slice(&self.pixels[o..o + w as usize * c]);
        }
        Image::new(w, h, self.channels, out)
    }

    /// Decodes PGM/PPM by magic number, anything else as raw.
    pub fn decode(bytes: &[u8]) -> Result<Image> {
        match bytes.get(..2) {
            Some(b"P5") | Some(b"P6") => decode_pnm(bytes),
            _ => decode_raw(bytes),
        }
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Image> {
        let path = path.as_ref();
        let bytes = fs::read(path)?;
        Image::decode(&bytes).map_err(|e| Error::Image(format!("{}: {e}", path.display())))
    }

    /// Writes PNM for `.pgm`/`.ppm`/`.pnm` extensions and raw otherwise.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        let bytes = if matches!(ext, "pgm" | "ppm" | "pnm") {
            self.encode_pnm()
        } else {
            self.encode_raw()
        };
        fs::write(path, bytes)?;
        Ok(())
    }

    /// P5 for one channel, P6 for three; maxval 255.
    pub fn encode_pnm(&self) -> Vec<u8> {
        let magic = if self.channels == 1 { "P5" } else { "P6" };
        let mut out = format!("{magic}\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn encode_raw(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + self.pixels.len());
        out.extend_from_slice(&self.width.to_le_bytes());
        out.extend_from_slice(&self.height.to_le_bytes());
        out.extend_from_slice(&u32::from(self.channels).to_le_bytes());
        out.extend_from_slice(&self.pixels);
        out
    }
}

fn decode_raw(bytes: &[u8]) -> Result<Image> {
    if bytes.len() < 12 {
        return Err(Error::Image("raw image shorter than its header".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let (w, h, c) = (word(0), word(4), word(8));
    let c = u8::try_from(c).map_err(|_| Error::Image(format!("bad channel count {c}")))?;
    Image::new(w, h, c, bytes[12..].to_vec())
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&b) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Image(format!("bad PNM header number at byte {start}")))
    }
}

fn decode_pnm(bytes: &[u8]) -> Result<Image> {
    let channels = if &bytes[..2] == b"P5" { 1 } else { 3 };
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.number()?;
    let height = cur.number()?;
    let maxval = cur.number()?;
    if maxval != 255 {
        return Err(Error::Image(format!("only maxval 255 is supported, got {maxval}")));
    }
    // exactly one whitespace byte separates the header from the samples
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(Error::Image("PNM header not terminated".into())),
    }
    Image::new(width, height, channels, bytes[cur.pos..].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient(w: u32, h: u32, c: u8) -> Image {
        let n = w as usize * h as usize * c as usize;
        Image::new(w, h, c, (0..n).map(|i| (i * 7 % 256) as u8).collect()).unwrap()
    }

    #[test]
    fn rejects_bad_buffers() {
        assert!(Image::new(2, 2, 1, vec![0; 3]).is_err());
        assert!(Image::new(2, 2, 2, vec![0; 8]).is_err());
        assert!(Image::new(0, 2, 1, vec![]).is_err());
    }

    #[test]
    fn pnm_round_trip() {
        for c in [1, 3] {
            let img = gradient(5, 3, c);
            let bytes = img.encode_pnm();
            assert_eq!(&bytes[..2], if c == 1 { b"P5" } else { b"P6" });
            assert_eq!(Image::decode(&bytes).unwrap(), img);
        }
    }

    #[test]
    fn raw_round_trip() {
        let img = gradient(4, 6, 3);
        let bytes = img.encode_raw();
        assert_eq!(&bytes[..12], &[4, 0, 0, 0, 6, 0, 0, 0, 3, 0, 0, 0]);
        assert_eq!(Image::decode(&bytes).unwrap(), img);
    }

    #[test]
    fn pnm_header_comments() {
        let mut bytes = b"P5\n# made by hand\n2 1\n# depth\n255\n".to_vec();
        bytes.extend_from_slice(&[10, 20]);
        let img = Image::decode(&bytes).unwrap();
        assert_eq!(img.pixels(), &[10, 20]);
    }

    #[test]
    fn pnm_rejects_16_bit_and_truncation() {
        assert!(Image::decode(b"P5 1 1 65535\n\0\0").is_err());
        assert!(Image::decode(b"P6 2 2 255\n\0\0\0").is_err());
    }

    #[test]
    fn sample_whitespace_after_maxval_is_data() {
        // a sample value of 10 ('\n') right after the separator must survive
        let img = Image::new(2, 1, 1, vec![b'\n', b' ']).unwrap();
        assert_eq!(Image::decode(&img.encode_pnm()).unwrap(), img);
    }

    #[test]
    fn crop_region() {
        let img = gradient(4, 4, 1);
        let c = img.crop(1, 2, 2, 2).unwrap();
        assert_eq!(c.pixels(), &[img.pixel(1, 2)[0], img.pixel(2, 2)[0], img.pixel(1, 3)[0], img.pixel(2, 3)[0]]);
        assert!(img.crop(3, 3, 2, 1).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let img = gradient(7, 5, 3);
        for name in ["a.ppm", "b.raw"] {
            let p = dir.path().join(name);
            img.write(&p).unwrap();
            assert_eq!(Image::read(&p).unwrap(), img);
        }
    }
}
