use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::{AudioError, Waveform};

fn map_hound(path: &Path, err: hound::Error) -> AudioError {
    match err {
        hound::Error::IoError(source) => AudioError::Io {
            path: path.to_path_buf(),
            source,
        },
        hound::Error::FormatError(msg) => AudioError::MalformedHeader(msg.to_string()),
        hound::Error::Unsupported => {
            AudioError::UnsupportedEncoding("non-PCM or unsupported WAV format".into())
        }
        other => AudioError::MalformedHeader(other.to_string()),
    }
}

/// Decodes a linear-PCM or IEEE-float WAV file into a mono waveform.
///
/// Integer samples are scaled by `2^(bits-1)`, so 16-bit full scale maps
/// to `32767 / 32768`. Stereo frames are averaged.
pub fn load_wav(path: impl AsRef<Path>) -> Result<Waveform, AudioError> {
    let path = path.as_ref();
    let reader = WavReader::open(path).map_err(|e| map_hound(path, e))?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 || channels > 2 {
        return Err(AudioError::UnsupportedEncoding(format!(
            "{channels} channels"
        )));
    }
    let interleaved: Vec<f64> = match spec.sample_format {
        SampleFormat::Int => {
            if !matches!(spec.bits_per_sample, 8 | 16 | 24) {
                return Err(AudioError::UnsupportedEncoding(format!(
                    "{}-bit integer PCM",
                    spec.bits_per_sample
                )));
            }
            let scale = (1u32 << (spec.bits_per_sample - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<Result<_, _>>()
                .map_err(|e| map_hound(path, e))?
        }
        SampleFormat::Float => {
            if spec.bits_per_sample != 32 {
                return Err(AudioError::UnsupportedEncoding(format!(
                    "{}-bit float",
                    spec.bits_per_sample
                )));
            }
            reader
                .into_samples::<f32>()
                .map(|s| s.map(|v| v as f64))
                .collect::<Result<_, _>>()
                .map_err(|e| map_hound(path, e))?
        }
    };
    if interleaved.len() < channels {
        return Err(AudioError::EmptyAudio);
    }
    let samples = if channels == 1 {
        interleaved
    } else {
        interleaved
            .chunks_exact(2)
            .map(|f| 0.5 * (f[0] + f[1]))
            .collect()
    };
    Ok(Waveform::new(samples, spec.sample_rate))
}

/// Writes a mono 16-bit PCM WAV. Amplitudes are clamped to the representable range.
pub fn write_wav_pcm16(path: impl AsRef<Path>, w: &Waveform) -> Result<(), AudioError> {
    let path = path.as_ref();
    let spec = WavSpec {
        channels: 1,
        sample_rate: w.sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::create(path, spec).map_err(|e| map_hound(path, e))?;
    for &s in &w.samples {
        let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(v).map_err(|e| map_hound(path, e))?;
    }
    writer.finalize().map_err(|e| map_hound(path, e))
}
