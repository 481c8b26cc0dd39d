//! Minimal RIFF/WAVE reader and writer for mono 16-bit PCM and 32-bit float.
//!
//! Only what the toolkit needs: single-channel, format tags 1 (PCM) and
//! 3 (IEEE float). Unknown chunks are skipped on read.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectral::Signal;

/// Sample encoding for [`write_wav`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavFormat {
    /// 16-bit signed integer PCM; samples are clamped to [-1, 1].
    Pcm16,
    /// 32-bit IEEE float.
    Float32,
}

pub fn write_wav(sig: &Signal, format: WavFormat, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    write_wav_to(sig, format, &mut file)
}

pub fn write_wav_to<W: Write>(sig: &Signal, format: WavFormat, w: &mut W) -> Result<()> {
    let n = sig.len() as u32;
    let rate = sig.sample_rate().round() as u32;
    let (tag, bits): (u16, u16) = match format {
        WavFormat::Pcm16 => (1, 16),
        WavFormat::Float32 => (3, 32),
    };
    let bytes_per_sample = u32::from(bits) / 8;
    let data_len = n * bytes_per_sample;
    let byte_rate = rate * bytes_per_sample;

    w.write_all(b"RIFF")?;
    w.write_all(&(36 + data_len).to_le_bytes())?;
    w.write_all(b"WAVE")?;
    w.write_all(b"fmt ")?;
    w.write_all(&16u32.to_le_bytes())?;
    w.write_all(&tag.to_le_bytes())?;
    w.write_all(&1u16.to_le_bytes())?; // mono
    w.write_all(&rate.to_le_bytes())?;
    w.write_all(&byte_rate.to_le_bytes())?;
    w.write_all(&(bytes_per_sample as u16).to_le_bytes())?; // block align
    w.write_all(&bits.to_le_bytes())?;
    w.write_all(b"data")?;
    w.write_all(&data_len.to_le_bytes())?;
    match format {
        WavFormat::Pcm16 => {
            for &s in sig.samples() {
                let clamped = s.clamp(-1.0, 1.0);
                let q = (clamped * 32767.0).round() as i16;
                w.write_all(&q.to_le_bytes())?;
            }
        }
        WavFormat::Float32 => {
            for &s in sig.samples() {
                w.write_all(&(s as f32).to_le_bytes())?;
            }
        }
    }
    Ok(())
}

pub fn read_wav(path: &Path) -> Result<Signal> {
    let mut file = std::fs::File::open(path)?;
    read_wav_from(&mut file)
}

pub fn read_wav_from<R: Read>(r: &mut R) -> Result<Signal> {
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    if data.len() < 12 || &data[0..4] != b"RIFF" || &data[8..12] != b"WAVE" {
        return Err(Error::Input("not a RIFF/WAVE file".into()));
    }
    let mut pos = 12;
    let mut fmt: Option<(u16, u16, u32, u16)> = None; // tag, channels, rate, bits
    let mut samples: Option<Vec<f64>> = None;
    while pos + 8 <= data.len() {
        let id = &data[pos..pos + 4];
        let size = u32::from_le_bytes(data[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body = pos + 8;
        if body + size > data.len() {
            return Err(Error::Input(format!(
                "chunk {:?} overruns file",
                String::from_utf8_lossy(id)
            )));
        }
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(Error::Input("fmt chunk too short".into()));
                }
                let tag = u16::from_le_bytes(data[body..body + 2].try_into().unwrap());
                let channels = u16::from_le_bytes(data[body + 2..body + 4].try_into().unwrap());
                let rate = u32::from_le_bytes(data[body + 4..body + 8].try_into().unwrap());
                let bits = u16::from_le_bytes(data[body + 14..body + 16].try_into().unwrap());
                fmt = Some((tag, channels, rate, bits));
            }
            b"data" => {
                let (tag, channels, _, bits) =
                    fmt.ok_or_else(|| Error::Input("data chunk before fmt chunk".into()))?;
                if channels != 1 {
                    return Err(Error::Input(format!("{channels} channels; only mono supported")));
                }
                let raw = &data[body..body + size];
                let s = match (tag, bits) {
                    (1, 16) => raw
                        .chunks_exact(2)
                        .map(|c| i16::from_le_bytes([c[0], c[1]]) as f64 / 32767.0)
                        .collect(),
                    (3, 32) => raw
                        .chunks_exact(4)
                        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
                        .collect(),
                    _ => {
                        return Err(Error::Input(format!(
                            "unsupported format: tag {tag}, {bits}-bit"
                        )))
                    }
                };
                samples = Some(s);
            }
            _ => {} // skip unknown chunks
        }
        pos = body + size + (size & 1); // chunks are word-aligned
    }
    let (_, _, rate, _) = fmt.ok_or_else(|| Error::Input("missing fmt chunk".into()))?;
    let samples = samples.ok_or_else(|| Error::Input("missing data chunk".into()))?;
    Signal::new(f64::from(rate), samples).map_err(|e| Error::Input(e.to_string()))
}
