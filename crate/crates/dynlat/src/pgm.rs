//! 16-bit binary PGM ("P5") image encoding for intensity frames.
//!
//! Frames are written with `maxval = 65535` and big-endian sample bytes,
//! the portable-graymap convention, so any PGM-aware viewer or toolkit can
//! open them. Physical intensity is mapped linearly onto the sample range
//! by an explicit full-scale value, which the caller records alongside the
//! image (see the frame manifest in the CLI) so the mapping stays
//! invertible.

use crate::interference::{GridSpec, IntensityFrame};

pub const PGM_MAXVAL: u16 = u16::MAX;

/// Errors from PGM encoding and decoding.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PgmError {
    #[error("not a binary PGM: expected magic 'P5', found {found:?}")]
    BadMagic { found: String },
    #[error("malformed PGM header: {reason}")]
    BadHeader { reason: String },
    #[error("unsupported maxval {maxval}: only 16-bit (65535) images are handled")]
    UnsupportedMaxval { maxval: u64 },
    #[error("PGM data truncated: expected {expected} bytes, found {got}")]
    Truncated { expected: usize, got: usize },
    #[error("image is {width}x{height}, but frames must be square")]
    NotSquare { width: usize, height: usize },
    #[error("{name} must be {requirement} (got {value:.6e})")]
    OutOfRange {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
}

impl PgmError {
    /// Stable machine-readable code for CLI output.
    pub fn code(&self) -> &'static str {
        match self {
            PgmError::BadMagic { .. } => "MAGIC",
            PgmError::BadHeader { .. } => "HEADER",
            PgmError::UnsupportedMaxval { .. } => "MAXVAL",
            PgmError::Truncated { .. } => "TRUNCATED",
            PgmError::NotSquare { .. } => "SHAPE",
            PgmError::OutOfRange { .. } => "RANGE",
        }
    }
}

/// Encodes raw 16-bit samples as a binary PGM (big-endian, row-major).
pub fn encode_pgm16(width: usize, height: usize, samples: &[u16]) -> Result<Vec<u8>, PgmError> {
    if samples.len() != width * height {
        return Err(PgmError::OutOfRange {
            name: "samples.len()",
            requirement: "width * height",
            value: samples.len() as f64,
        });
    }
    let header = format!("P5\n{width} {height}\n{PGM_MAXVAL}\n");
    let mut out = Vec::with_capacity(header.len() + samples.len() * 2);
    out.extend_from_slice(header.as_bytes());
    for &s in samples {
        out.extend_from_slice(&s.to_be_bytes());
    }
    Ok(out)
}

/// Reads one whitespace-delimited header token, skipping `#` comments.
fn next_token(bytes: &[u8], pos: &mut usize) -> Result<String, PgmError> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(PgmError::BadHeader {
            reason: "unexpected end of header".into(),
        });
    }
    String::from_utf8(bytes[start..*pos].to_vec()).map_err(|_| PgmError::BadHeader {
        reason: "header is not ASCII".into(),
    })
}

/// Decodes a 16-bit binary PGM into `(width, height, samples)`.
pub fn decode_pgm16(bytes: &[u8]) -> Result<(usize, usize, Vec<u16>), PgmError> {
    let mut pos = 0usize;
    let magic = next_token(bytes, &mut pos)?;
    if magic != "P5" {
        return Err(PgmError::BadMagic { found: magic });
    }
    let mut dim = |name: &str| -> Result<u64, PgmError> {
        next_token(bytes, &mut pos)?
            .parse::<u64>()
            .map_err(|e| PgmError::BadHeader {
                reason: format!("bad {name}: {e}"),
            })
    };
    let width = dim("width")? as usize;
    let height = dim("height")? as usize;
    let maxval = dim("maxval")?;
    if maxval != PGM_MAXVAL as u64 {
        return Err(PgmError::UnsupportedMaxval { maxval });
    }
    if width == 0 || height == 0 {
        return Err(PgmError::BadHeader {
            reason: "zero image dimension".into(),
        });
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(PgmError::BadHeader {
            reason: "missing separator before raster data".into(),
        });
    }
    pos += 1;
    let expected = width * height * 2;
    let raster = &bytes[pos..];
    if raster.len() < expected {
        return Err(PgmError::Truncated {
            expected,
            got: raster.len(),
        });
    }
    let samples = raster[..expected]
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]))
        .collect();
    Ok((width, height, samples))
}

/// Quantizes a frame to 16 bits: intensity `full_scale` maps to 65535 and
/// values are clamped into range, so headroom choices are explicit.
pub fn frame_to_pgm(frame: &IntensityFrame, full_scale: f64) -> Result<Vec<u8>, PgmError> {
    if !(full_scale.is_finite() && full_scale > 0.0) {
        return Err(PgmError::OutOfRange {
            name: "full_scale",
            requirement: "finite and > 0",
            value: full_scale,
        });
    }
    let samples: Vec<u16> = frame
        .values
        .iter()
        .map(|&v| {
            let u = (v / full_scale).clamp(0.0, 1.0);
            (u * PGM_MAXVAL as f64).round() as u16
        })
        .collect();
    encode_pgm16(frame.grid.n, frame.grid.n, &samples)
}

/// Decodes a square 16-bit PGM back into an intensity frame. `pixel_size`
/// gives each pixel's physical side length; `full_scale` restores the
/// intensity scale used at encode time (1.0 leaves values normalized);
/// `time` stamps the frame.
pub fn frame_from_pgm(
    bytes: &[u8],
    pixel_size: f64,
    full_scale: f64,
    time: f64,
) -> Result<IntensityFrame, PgmError> {
    if !(pixel_size.is_finite() && pixel_size > 0.0) {
        return Err(PgmError::OutOfRange {
            name: "pixel_size",
            requirement: "finite and > 0",
            value: pixel_size,
        });
    }
    if !(full_scale.is_finite() && full_scale > 0.0) {
        return Err(PgmError::OutOfRange {
            name: "full_scale",
            requirement: "finite and > 0",
            value: full_scale,
        });
    }
    let (width, height, samples) = decode_pgm16(bytes)?;
    if width != height {
        return Err(PgmError::NotSquare { width, height });
    }
    let grid = GridSpec {
        n: width,
        extent: pixel_size * width as f64,
    };
    let values = samples
        .iter()
        .map(|&s| s as f64 / PGM_MAXVAL as f64 * full_scale)
        .collect();
    Ok(IntensityFrame { grid, values, time })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient_frame(n: usize) -> IntensityFrame {
        let grid = GridSpec::new(n, 1e-3).unwrap();
        let values = (0..n * n).map(|i| i as f64 / (n * n) as f64 * 4.0).collect();
        IntensityFrame {
            grid,
            values,
            time: 0.25,
        }
    }

    #[test]
    fn header_and_byte_order_follow_the_format() {
        let bytes = encode_pgm16(2, 2, &[0x0102, 0, 0xFFFF, 7]).unwrap();
        assert!(bytes.starts_with(b"P5\n2 2\n65535\n"));
        let raster = &bytes[b"P5\n2 2\n65535\n".len()..];
        // Big-endian: most significant byte first.
        assert_eq!(raster, &[0x01, 0x02, 0x00, 0x00, 0xFF, 0xFF, 0x00, 0x07]);
    }

    #[test]
    fn frames_round_trip_within_one_quantization_step() {
        let frame = gradient_frame(32);
        let full_scale = 4.0;
        let bytes = frame_to_pgm(&frame, full_scale).unwrap();
        let back = frame_from_pgm(&bytes, frame.grid.pitch(), full_scale, frame.time).unwrap();
        assert_eq!(back.grid.n, 32);
        assert!((back.grid.extent - 1e-3).abs() < 1e-15);
        let step = full_scale / PGM_MAXVAL as f64;
        for (a, b) in frame.values.iter().zip(&back.values) {
            assert!((a - b).abs() <= 0.5 * step + 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn out_of_scale_values_clamp_to_the_sample_range() {
        let grid = GridSpec::new(2, 1.0).unwrap();
        let frame = IntensityFrame {
            grid,
            values: vec![-1.0, 0.0, 5.0, 2.0],
            time: 0.0,
        };
        let bytes = frame_to_pgm(&frame, 4.0).unwrap();
        let (_, _, samples) = decode_pgm16(&bytes).unwrap();
        assert_eq!(samples[0], 0);
        assert_eq!(samples[2], 65535); // 5.0 clamps to full scale
        assert_eq!(samples[3], (0.5f64 * 65535.0).round() as u16);
    }

    #[test]
    fn comments_in_the_header_are_skipped() {
        let mut bytes = b"P5\n# synthesized frame\n2 1\n# another note\n65535\n".to_vec();
        bytes.extend_from_slice(&[0x00, 0x01, 0x00, 0x02]);
        let (w, h, samples) = decode_pgm16(&bytes).unwrap();
        assert_eq!((w, h), (2, 1));
        assert_eq!(samples, vec![1, 2]);
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(matches!(
            decode_pgm16(b"P2\n2 2\n65535\n"),
            Err(PgmError::BadMagic { .. })
        ));
        assert!(matches!(
            decode_pgm16(b"P5\n2 2\n255\n\x00\x01\x02\x03"),
            Err(PgmError::UnsupportedMaxval { maxval: 255 })
        ));
        let mut short = b"P5\n4 4\n65535\n".to_vec();
        short.extend_from_slice(&[0u8; 10]);
        assert!(matches!(
            decode_pgm16(&short),
            Err(PgmError::Truncated { expected: 32, got: 10 })
        ));
        let mut rect = b"P5\n4 2\n65535\n".to_vec();
        rect.extend_from_slice(&[0u8; 16]);
        assert!(matches!(
            frame_from_pgm(&rect, 1e-6, 1.0, 0.0),
            Err(PgmError::NotSquare { width: 4, height: 2 })
        ));
    }
}
