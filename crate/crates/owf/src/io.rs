//! Grayscale image files: binary PGM (`P5`, maxval 255) and 8-bit grayscale PNG.
//!
//! Reading widens bytes to `f64`. Writing always produces `P5`; values are
//! clamped to `[0, 255]` and rounded half away from zero.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::grid::GrayImage;

#[derive(Debug, Error)]
pub enum ImageIoError {
    #[error("{}: no such file", .0.display())]
    NotFound(PathBuf),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("pixel data truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("png: {0}")]
    Png(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

/// Reads a `P5` PGM or a grayscale PNG, chosen by the file's magic bytes.
pub fn read_image(path: impl AsRef<Path>) -> Result<GrayImage, ImageIoError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => ImageIoError::NotFound(path.to_path_buf()),
        _ => ImageIoError::Io(e),
    })?;
    let mut reader = BufReader::new(file);
    let head = reader.fill_buf()?;
    if head.starts_with(&PNG_SIGNATURE) {
        read_png(reader)
    } else if head.starts_with(b"P") {
        read_pgm(reader)
    } else {
        Err(ImageIoError::UnsupportedFormat(format!("{}: not a PGM or PNG file", path.display())))
    }
}

/// Reads a binary `P5` PGM with maxval 255.
pub fn read_pgm<R: BufRead>(mut reader: R) -> Result<GrayImage, ImageIoError> {
    let mut magic = [0u8; 2];
    reader
        .read_exact(&mut magic)
        .map_err(|_| ImageIoError::MalformedHeader("missing magic number".into()))?;
    match &magic {
        b"P5" => {}
        b"P1" | b"P2" | b"P3" | b"P4" | b"P6" | b"P7" => {
            return Err(ImageIoError::UnsupportedFormat(format!(
                "{} (only binary grayscale P5 is supported)",
                String::from_utf8_lossy(&magic)
            )))
        }
        _ => return Err(ImageIoError::MalformedHeader("bad magic number".into())),
    }
    let width = header_number(&mut reader, "width")?;
    let height = header_number(&mut reader, "height")?;
    let maxval = header_number(&mut reader, "maxval")?;
    if width == 0 || height == 0 {
        return Err(ImageIoError::MalformedHeader(format!("empty image {width}x{height}")));
    }
    if maxval != 255 {
        return Err(ImageIoError::UnsupportedFormat(format!("maxval {maxval}, only 255 is supported")));
    }
    let expected = width * height;
    let mut bytes = Vec::with_capacity(expected);
    reader.take(expected as u64).read_to_end(&mut bytes)?;
    if bytes.len() != expected {
        return Err(ImageIoError::Truncated { expected, found: bytes.len() });
    }
    Ok(GrayImage::new(width, height, bytes.into_iter().map(f64::from).collect())
        .expect("byte values fill the image"))
}

/// Parses one whitespace-delimited decimal header field, skipping `#` comments.
/// Consumes the single whitespace byte that terminates the field.
fn header_number<R: BufRead>(reader: &mut R, what: &str) -> Result<usize, ImageIoError> {
    let mut byte = [0u8; 1];
    let mut digits = String::new();
    loop {
        if reader.read(&mut byte)? == 0 {
            return Err(ImageIoError::MalformedHeader(format!("unexpected end of header reading {what}")));
        }
        let b = byte[0];
        if b == b'#' && digits.is_empty() {
            let mut comment = Vec::new();
            reader.read_until(b'\n', &mut comment)?;
        } else if b.is_ascii_whitespace() {
            if !digits.is_empty() {
                break;
            }
        } else if b.is_ascii_digit() {
            digits.push(b as char);
        } else {
            return Err(ImageIoError::MalformedHeader(format!(
                "unexpected byte {:?} in {what}",
                b as char
            )));
        }
    }
    digits
        .parse()
        .map_err(|_| ImageIoError::MalformedHeader(format!("{what} {digits:?} out of range")))
}

fn read_png<R: BufRead + io::Seek>(reader: R) -> Result<GrayImage, ImageIoError> {
    let png_err = |e: png::DecodingError| ImageIoError::Png(e.to_string());
    let decoder = png::Decoder::new(reader);
    let mut reader = decoder.read_info().map_err(png_err)?;
    let (color, depth) = reader.output_color_type();
    if color != png::ColorType::Grayscale || depth != png::BitDepth::Eight {
        return Err(ImageIoError::UnsupportedFormat(format!(
            "png with {color:?} at {depth:?} bits (only 8-bit grayscale is supported)"
        )));
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| ImageIoError::Png("image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(png_err)?;
    let (w, h) = (info.width as usize, info.height as usize);
    let mut values = Vec::with_capacity(w * h);
    for row in buf[..info.buffer_size()].chunks(info.line_size) {
        values.extend(row[..w].iter().map(|&b| f64::from(b)));
    }
    GrayImage::new(w, h, values).map_err(|e| ImageIoError::Png(e.to_string()))
}

/// Clamps to `[0, 255]` and rounds half away from zero.
pub fn quantize(v: f64) -> u8 {
    v.clamp(0.0, 255.0).round() as u8
}

pub fn write_pgm<W: Write>(img: &GrayImage, mut w: W) -> io::Result<()> {
    write!(w, "P5\n{} {}\n255\n", img.width(), img.height())?;
    let bytes: Vec<u8> = img.values().iter().map(|&v| quantize(v)).collect();
    w.write_all(&bytes)?;
    w.flush()
}

/// Writes `img` as a `P5` PGM.
pub fn write_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<(), ImageIoError> {
    let file = File::create(path.as_ref())?;
    write_pgm(img, BufWriter::new(file))?;
    Ok(())
}
