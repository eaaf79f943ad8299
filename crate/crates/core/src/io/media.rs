//! WAV audio, 8-bit graymaps and depth text matrices.

use std::fmt::Write as _;
use std::io::Cursor;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, GrayImage, ImageEncoder, ImageFormat, ImageReader, Limits};

use crate::audio_ssl::MultichannelAudioFrame;
use crate::error::{Error, Result};
use crate::vision::{is_valid_depth, DepthFrame, VideoFrame};

/// Largest accepted image side when decoding.
pub const MAX_IMAGE_SIDE: u32 = 8192;

/// 16-bit PCM, one channel per microphone.
pub fn encode_wav(audio: &MultichannelAudioFrame) -> Result<Vec<u8>> {
    let channels = u16::try_from(audio.channel_count())
        .ok()
        .filter(|c| *c > 0)
        .ok_or_else(|| Error::Invalid("WAV needs 1..=65535 channels".into()))?;
    let spec = hound::WavSpec { channels, sample_rate: audio.sample_rate, bits_per_sample: 16, sample_format: hound::SampleFormat::Int };
    let mut buf = Cursor::new(Vec::new());
    let mut w = hound::WavWriter::new(&mut buf, spec).map_err(|e| Error::Invalid(e.to_string()))?;
    for i in 0..audio.len() {
        for ch in &audio.channels {
            let s = (ch[i] * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
            w.write_sample(s).map_err(|e| Error::Invalid(e.to_string()))?;
        }
    }
    w.finalize().map_err(|e| Error::Invalid(e.to_string()))?;
    Ok(buf.into_inner())
}

/// Reads 16-bit integer or 32-bit float WAV data, scaled to [-1, 1].
pub fn decode_wav(bytes: &[u8]) -> Result<MultichannelAudioFrame> {
    let bad = |e: hound::Error| Error::parse(format!("wav: {e}"));
    let mut r = hound::WavReader::new(Cursor::new(bytes)).map_err(bad)?;
    let spec = r.spec();
    let n = spec.channels as usize;
    if n == 0 || spec.sample_rate == 0 {
        return Err(Error::parse("wav: no channels or zero sample rate"));
    }
    let samples: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => {
            r.samples::<i16>().map(|s| s.map(|v| v as f64 / 32768.0)).collect::<Result<_, _>>().map_err(bad)?
        }
        (hound::SampleFormat::Float, 32) => {
            r.samples::<f32>().map(|s| s.map(|v| v as f64)).collect::<Result<_, _>>().map_err(bad)?
        }
        (f, b) => return Err(Error::parse(format!("wav: unsupported {b}-bit {f:?} samples"))),
    };
    if samples.len() % n != 0 {
        return Err(Error::parse("wav: truncated sample frame"));
    }
    let mut channels = vec![Vec::with_capacity(samples.len() / n); n];
    for (i, s) in samples.into_iter().enumerate() {
        channels[i % n].push(if s.is_finite() { s } else { 0.0 });
    }
    MultichannelAudioFrame::new(channels, spec.sample_rate, 0.0)
}

/// Binary 8-bit graymap.
pub fn encode_pgm(frame: &VideoFrame) -> Result<Vec<u8>> {
    let px: Vec<u8> = frame.pixels.iter().map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8).collect();
    let img = GrayImage::from_raw(frame.width as u32, frame.height as u32, px)
        .ok_or_else(|| Error::DimensionMismatch("pixel buffer does not match frame size".into()))?;
    let mut buf = Vec::new();
    PnmEncoder::new(&mut buf)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(img.as_raw(), img.width(), img.height(), ExtendedColorType::L8)
        .map_err(|e| Error::Invalid(e.to_string()))?;
    Ok(buf)
}

pub fn decode_pgm(bytes: &[u8], timestamp: f64) -> Result<VideoFrame> {
    let mut reader = ImageReader::with_format(Cursor::new(bytes), ImageFormat::Pnm);
    let mut limits = Limits::default();
    limits.max_image_width = Some(MAX_IMAGE_SIDE);
    limits.max_image_height = Some(MAX_IMAGE_SIDE);
    limits.max_alloc = Some(256 << 20);
    reader.limits(limits);
    let img = reader.decode().map_err(|e| Error::parse(format!("pgm: {e}")))?.to_luma8();
    let (w, h) = img.dimensions();
    let pixels = img.into_raw().into_iter().map(|v| v as f64 / 255.0).collect();
    VideoFrame::new(w as usize, h as usize, pixels, timestamp)
}

/// One text row per image row, millimetre-rounded metres, `nan` for holes.
pub fn encode_depth_text(frame: &DepthFrame) -> String {
    let mut s = String::with_capacity(frame.depths.len() * 6);
    for row in frame.depths.chunks(frame.width) {
        for (i, d) in row.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            if is_valid_depth(*d) {
                let _ = write!(s, "{d:.3}");
            } else {
                s.push_str("nan");
            }
        }
        s.push('\n');
    }
    s
}

pub fn parse_depth_text(text: &str, timestamp: f64) -> Result<DepthFrame> {
    let mut width = None;
    let mut depths = Vec::new();
    let mut height = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let before = depths.len();
        for tok in line.split_whitespace() {
            let d = if tok.eq_ignore_ascii_case("nan") {
                f64::NAN
            } else {
                let v: f64 = tok.parse().map_err(|_| Error::parse_at(i + 1, format!("bad depth `{tok}`")))?;
                if !is_valid_depth(v) {
                    return Err(Error::parse_at(i + 1, format!("depth {v} outside the working range")));
                }
                v
            };
            depths.push(d);
        }
        let w = depths.len() - before;
        match width {
            None => width = Some(w),
            Some(prev) if prev != w => return Err(Error::parse_at(i + 1, format!("row has {w} values, expected {prev}"))),
            _ => {}
        }
        height += 1;
    }
    let width = width.ok_or_else(|| Error::parse("empty depth matrix"))?;
    DepthFrame::new(width, height, depths, timestamp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wav_round_trip_within_quantization() {
        let ch: Vec<Vec<f64>> = (0..4).map(|c| (0..100).map(|i| ((i * (c + 1)) as f64 * 0.1).sin() * 0.5).collect()).collect();
        let a = MultichannelAudioFrame::new(ch, 16_000, 0.0).unwrap();
        let b = decode_wav(&encode_wav(&a).unwrap()).unwrap();
        assert_eq!(b.channel_count(), 4);
        assert_eq!(b.sample_rate, 16_000);
        for (x, y) in a.channels.iter().flatten().zip(b.channels.iter().flatten()) {
            assert!((x - y).abs() <= 1.0 / 32768.0);
        }
    }

    #[test]
    fn pgm_round_trip_is_exact_on_the_8_bit_grid() {
        let px: Vec<f64> = (0..12).map(|i| (i * 20) as f64 / 255.0).collect();
        let f = VideoFrame::new(4, 3, px, 0.0).unwrap();
        let bytes = encode_pgm(&f).unwrap();
        assert!(bytes.starts_with(b"P5"));
        assert_eq!(decode_pgm(&bytes, 0.0).unwrap(), f);
    }

    #[test]
    fn depth_text_round_trip() {
        let f = DepthFrame::new(3, 2, vec![1.0, f64::NAN, 2.5, 10.0, 0.5, f64::NAN], 0.0).unwrap();
        let g = parse_depth_text(&encode_depth_text(&f), 0.0).unwrap();
        assert_eq!(encode_depth_text(&g), encode_depth_text(&f));
        assert!(parse_depth_text("1 2\n3\n", 0.0).is_err());
        assert!(parse_depth_text("1 20\n", 0.0).is_err());
        assert!(parse_depth_text("", 0.0).is_err());
    }
}
