//! Fundamental frequency and voicing probability from the normalized
//! autocorrelation of a single frame.

pub const F0_MIN_HZ: f64 = 50.0;
pub const F0_MAX_HZ: f64 = 500.0;

/// Peaks within this fraction of the tallest one are treated as equally good;
/// the shortest such lag wins, which suppresses octave-down errors.
const OCTAVE_TOLERANCE: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pitch {
    /// Hz; zero when the frame is unvoiced.
    pub f0: f64,
    /// Height of the tallest autocorrelation peak in the search band, in [0, 1].
    pub vp: f64,
}

/// Normalized cross-correlation of the frame with itself shifted by `lag`.
fn ncc(x: &[f64], lag: usize) -> f64 {
    let n = x.len() - lag;
    let (a, b) = (&x[..n], &x[lag..]);
    let mut num = 0.0;
    let mut ea = 0.0;
    let mut eb = 0.0;
    for (u, v) in a.iter().zip(b) {
        num += u * v;
        ea += u * u;
        eb += v * v;
    }
    let den = (ea * eb).sqrt();
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Autocorrelation pitch estimate over the 50–500 Hz band.
///
/// `vp` is the tallest normalized-autocorrelation peak. When `vp` reaches
/// `threshold`, `f0` is the rate divided by the parabolically refined peak lag;
/// otherwise `f0` is zero.
pub fn f0_and_voicing(frame: &[f64], rate: u32, threshold: f64) -> Pitch {
    let unvoiced = Pitch { f0: 0.0, vp: 0.0 };
    let min_lag = ((rate as f64 / F0_MAX_HZ).floor() as usize).max(2);
    let max_lag = (rate as f64 / F0_MIN_HZ).ceil() as usize;
    if frame.len() < max_lag + 2 {
        return unvoiced;
    }
    let mean = frame.iter().sum::<f64>() / frame.len() as f64;
    let x: Vec<f64> = frame.iter().map(|v| v - mean).collect();
    if x.iter().all(|&v| v == 0.0) {
        return unvoiced;
    }

    // r[i] holds the correlation at lag min_lag - 1 + i.
    let r: Vec<f64> = (min_lag - 1..=max_lag + 1).map(|lag| ncc(&x, lag)).collect();
    let peaks: Vec<usize> = (1..r.len() - 1)
        .filter(|&i| r[i] > r[i - 1] && r[i] >= r[i + 1])
        .collect();
    let Some(best) = peaks.iter().map(|&i| r[i]).max_by(f64::total_cmp) else {
        return unvoiced;
    };
    let vp = best.clamp(0.0, 1.0);
    if vp < threshold {
        return Pitch { f0: 0.0, vp };
    }
    let i = peaks
        .into_iter()
        .find(|&i| r[i] >= OCTAVE_TOLERANCE * best)
        .expect("the tallest peak qualifies");

    let (a, b, c) = (r[i - 1], r[i], r[i + 1]);
    let curvature = a - 2.0 * b + c;
    let shift = if curvature < 0.0 {
        (0.5 * (a - c) / curvature).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    let lag = (min_lag - 1 + i) as f64 + shift;
    let f0 = (rate as f64 / lag).clamp(F0_MIN_HZ, F0_MAX_HZ);
    Pitch { f0, vp }
}
