use super::{AudioError, Waveform};

/// Lowest accepted target rate; anything below cuts into the speech band.
pub const MIN_TARGET_RATE: u32 = 2_000;

/// Kernel length of the windowed-sinc interpolator, in input samples.
pub const RESAMPLER_TAPS: usize = 64;

const HALF: i64 = (RESAMPLER_TAPS / 2) as i64;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn blackman(d: f64) -> f64 {
    let x = std::f64::consts::PI * d / HALF as f64;
    0.42 + 0.5 * x.cos() + 0.08 * (2.0 * x).cos()
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// One row of taps per output phase, each normalized to unit DC gain.
fn polyphase_table(up: u64, cutoff: f64) -> Vec<[f64; RESAMPLER_TAPS]> {
    (0..up)
        .map(|p| {
            let frac = p as f64 / up as f64;
            let mut taps = [0.0; RESAMPLER_TAPS];
            for (j, t) in taps.iter_mut().enumerate() {
                let d = (j as i64 - HALF + 1) as f64 - frac;
                *t = cutoff * sinc(cutoff * d) * blackman(d);
            }
            let sum: f64 = taps.iter().sum();
            taps.iter_mut().for_each(|t| *t /= sum);
            taps
        })
        .collect()
}

/// Band-limited sample-rate conversion with a polyphase windowed-sinc kernel.
///
/// The output has `round(len * target / source)` samples. Equal rates return
/// an unchanged copy of the input.
pub fn resample(w: &Waveform, target_rate: u32) -> Result<Waveform, AudioError> {
    if target_rate < MIN_TARGET_RATE {
        return Err(AudioError::RateTooLow(target_rate));
    }
    if w.is_empty() {
        return Err(AudioError::EmptyAudio);
    }
    if w.sample_rate == target_rate {
        return Ok(w.clone());
    }
    let src = w.sample_rate as u64;
    let dst = target_rate as u64;
    let g = gcd(src, dst);
    let (up, down) = (dst / g, src / g);
    let cutoff = (dst as f64 / src as f64).min(1.0);
    let table = polyphase_table(up, cutoff);

    let n_in = w.len() as i64;
    let n_out = ((w.len() as u64 * dst) as f64 / src as f64).round() as usize;
    let x = &w.samples;
    let out = (0..n_out as u64)
        .map(|n| {
            let pos = n * down;
            let base = (pos / up) as i64;
            let taps = &table[(pos % up) as usize];
            let first = base - HALF + 1;
            if first >= 0 && first + RESAMPLER_TAPS as i64 <= n_in {
                let s = &x[first as usize..first as usize + RESAMPLER_TAPS];
                s.iter().zip(taps).map(|(a, b)| a * b).sum()
            } else {
                taps.iter()
                    .enumerate()
                    .filter_map(|(j, t)| {
                        let i = first + j as i64;
                        (0..n_in).contains(&i).then(|| x[i as usize] * t)
                    })
                    .sum()
            }
        })
        .collect();
    Ok(Waveform::new(out, target_rate))
}
