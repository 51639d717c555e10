//! Stability of the correlation structure over time: the mean Spearman
//! correlation between consecutive flattened matrices of a recording, and
//! group comparisons of that score across window lengths.

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::audio_io::Label;
use crate::corr_repr::{corr_flats, CorrError, CorrFlat, CorrSequence};
use crate::eval_harness::Dataset;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MarkerError {
    #[error("vectors of length {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 values, got {0}")]
    TooShort(usize),
    #[error("need at least 2 matrices, got {0}")]
    TooFewMatrices(usize),
    #[error("group {label} at L = {l} has fewer than 2 recordings")]
    EmptyGroup { label: Label, l: usize },
    #[error(transparent)]
    Corr(#[from] CorrError),
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && v[idx[j]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j + 1) as f64 / 2.0;
        for &k in &idx[i..j] {
            out[k] = avg;
        }
        i = j;
    }
    out
}

/// Pearson correlation, 0 when either side has no variance.
fn pearson(u: &[f64], v: &[f64]) -> f64 {
    let n = u.len() as f64;
    let mu = u.iter().sum::<f64>() / n;
    let mv = v.iter().sum::<f64>() / n;
    let (mut suv, mut suu, mut svv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        let (da, db) = (a - mu, b - mv);
        suv += da * db;
        suu += da * da;
        svv += db * db;
    }
    if suu == 0.0 || svv == 0.0 {
        0.0
    } else {
        (suv / (suu * svv).sqrt()).clamp(-1.0, 1.0)
    }
}

/// Spearman rank correlation with average-rank ties; 0 if either input is constant.
pub fn spearman(u: &[f64], v: &[f64]) -> Result<f64, MarkerError> {
    if u.len() != v.len() {
        return Err(MarkerError::LengthMismatch(u.len(), v.len()));
    }
    if u.len() < 2 {
        return Err(MarkerError::TooShort(u.len()));
    }
    Ok(pearson(&ranks(u), &ranks(v)))
}

/// Mean Spearman correlation between each flattened matrix and the next.
pub fn consecutive_stability(flats: &[CorrFlat]) -> Result<f64, MarkerError> {
    if flats.len() < 2 {
        return Err(MarkerError::TooFewMatrices(flats.len()));
    }
    let ranked: Vec<Vec<f64>> = flats.iter().map(|f| ranks(f)).collect();
    let mut total = 0.0;
    for w in ranked.windows(2) {
        if w[0].len() != w[1].len() {
            return Err(MarkerError::LengthMismatch(w[0].len(), w[1].len()));
        }
        if w[0].len() < 2 {
            return Err(MarkerError::TooShort(w[0].len()));
        }
        total += pearson(&w[0], &w[1]);
    }
    Ok(total / (flats.len() - 1) as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityScore {
    pub recording_id: String,
    pub label: Label,
    pub l: usize,
    pub mean_rho: f64,
    /// Number of consecutive pairs averaged.
    pub pairs: usize,
}

pub fn stability_score(cs: &CorrSequence, recording_id: &str, label: Label) -> Result<StabilityScore, MarkerError> {
    let flats = cs.flats();
    Ok(StabilityScore {
        recording_id: recording_id.to_string(),
        label,
        l: cs.l,
        mean_rho: consecutive_stability(&flats)?,
        pairs: flats.len().saturating_sub(1),
    })
}

/// Scores of every recording at every window length. Recordings with fewer
/// than two windows at some L are left out of that L with a warning.
pub fn stability_scores(data: &Dataset, grid: &[usize]) -> Result<Vec<StabilityScore>, MarkerError> {
    let jobs: Vec<(usize, usize)> = grid.iter().flat_map(|&l| (0..data.len()).map(move |i| (l, i))).collect();
    let scored = jobs
        .into_par_iter()
        .map(|(l, i)| {
            let entry = &data.manifest.entries[i];
            let flats = match corr_flats(&data.features[i], l) {
                Ok(f) => f,
                Err(CorrError::SequenceTooShort { .. }) => Vec::new(),
                Err(e) => return Err(e.into()),
            };
            if flats.len() < 2 {
                log::warn!("recording {} has {} windows at L = {l}; excluded", entry.id, flats.len());
                return Ok(None);
            }
            Ok(Some(StabilityScore {
                recording_id: entry.id.clone(),
                label: entry.label,
                l,
                mean_rho: consecutive_stability(&flats)?,
                pairs: flats.len() - 1,
            }))
        })
        .collect::<Result<Vec<_>, MarkerError>>()?;
    Ok(scored.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchTest {
    pub t: f64,
    pub df: f64,
    /// Two-tailed.
    pub p: f64,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v)
}

/// Unequal-variance two-sample t-test of `a` against `b`.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchTest, MarkerError> {
    for x in [a, b] {
        if x.len() < 2 {
            return Err(MarkerError::TooShort(x.len()));
        }
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (sa, sb) = (va / a.len() as f64, vb / b.len() as f64);
    let se2 = sa + sb;
    if se2 == 0.0 {
        let (t, p) = if ma == mb { (0.0, 1.0) } else { ((ma - mb).signum() * f64::INFINITY, 0.0) };
        return Ok(WelchTest {
            t,
            df: (a.len() + b.len() - 2) as f64,
            p,
        });
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (a.len() as f64 - 1.0) + sb * sb / (b.len() as f64 - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    let p = (2.0 * dist.cdf(-t.abs())).clamp(0.0, 1.0);
    Ok(WelchTest { t, df, p })
}

/// Benjamini–Hochberg adjusted p-values, in input order.
pub fn benjamini_hochberg(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    let mut out = vec![0.0; m];
    let mut running = 1.0f64;
    for (rank, &i) in idx.iter().enumerate().rev() {
        running = running.min(p[i] * (m as f64 / (rank + 1) as f64));
        out[i] = running.min(1.0);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupComparison {
    pub l: usize,
    pub control_mean: f64,
    pub depressed_mean: f64,
    pub n_control: usize,
    pub n_depressed: usize,
    /// Positive when the control group is more stable.
    pub t_statistic: f64,
    pub p_value: f64,
    /// Benjamini–Hochberg over the window lengths compared together.
    pub p_adjusted: f64,
}

/// Welch test of control against depressed stability at each L, with FDR
/// adjustment across the grid.
pub fn group_compare(scores: &[StabilityScore], grid: &[usize]) -> Result<Vec<GroupComparison>, MarkerError> {
    let mut rows = Vec::with_capacity(grid.len());
    for &l in grid {
        let group = |label: Label| -> Vec<f64> {
            scores
                .iter()
                .filter(|s| s.l == l && s.label == label)
                .map(|s| s.mean_rho)
                .collect()
        };
        let (c, d) = (group(Label::Control), group(Label::Depressed));
        for (label, g) in [(Label::Control, &c), (Label::Depressed, &d)] {
            if g.len() < 2 {
                return Err(MarkerError::EmptyGroup { label, l });
            }
        }
        let test = welch_t_test(&c, &d)?;
        let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
        rows.push(GroupComparison {
            l,
            control_mean: mean(&c),
            depressed_mean: mean(&d),
            n_control: c.len(),
            n_depressed: d.len(),
            t_statistic: test.t,
            p_value: test.p,
            p_adjusted: 0.0,
        });
    }
    let raw: Vec<f64> = rows.iter().map(|r| r.p_value).collect();
    for (r, adj) in rows.iter_mut().zip(benjamini_hochberg(&raw)) {
        r.p_adjusted = adj;
    }
    Ok(rows)
}

pub fn scores_tsv(scores: &[StabilityScore]) -> String {
    let mut out = String::from("recording_id\tL\tmean_rho\tlabel\n");
    for s in scores {
        out.push_str(&format!("{}\t{}\t{:.6}\t{}\n", s.recording_id, s.l, s.mean_rho, s.label));
    }
    out
}

pub fn summary_tsv(rows: &[GroupComparison]) -> String {
    let mut out = String::from("L\tcontrol_mean\tdepressed_mean\tt\tp\tp_adj\n");
    for r in rows {
        out.push_str(&format!(
            "{}\t{:.6}\t{:.6}\t{:.4}\t{:.3e}\t{:.3e}\n",
            r.l, r.control_mean, r.depressed_mean, r.t_statistic, r.p_value, r.p_adjusted
        ));
    }
    out
}

/// Per-recording bars for one L, highest stability first.
pub fn bar_data_tsv(scores: &[StabilityScore], l: usize) -> String {
    let mut bars: Vec<&StabilityScore> = scores.iter().filter(|s| s.l == l).collect();
    bars.sort_by(|a, b| b.mean_rho.total_cmp(&a.mean_rho).then_with(|| a.recording_id.cmp(&b.recording_id)));
    let mut out = String::from("rank\trecording_id\tmean_rho\tlabel\n");
    for (i, s) in bars.iter().enumerate() {
        out.push_str(&format!("{}\t{}\t{:.6}\t{}\n", i + 1, s.recording_id, s.mean_rho, s.label));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    /// Spearman for distinct values via `1 - 6Σd² / (n(n²-1))`.
    fn spearman_distinct(u: &[f64], v: &[f64]) -> f64 {
        let rank = |x: &[f64]| -> Vec<f64> { x.iter().map(|a| 1.0 + x.iter().filter(|b| *b < a).count() as f64).collect() };
        let (ru, rv) = (rank(u), rank(v));
        let n = u.len() as f64;
        let d2: f64 = ru.iter().zip(&rv).map(|(a, b)| (a - b).powi(2)).sum();
        1.0 - 6.0 * d2 / (n * (n * n - 1.0))
    }

    #[test]
    fn spearman_examples() {
        let u = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(spearman(&u, &u).unwrap(), 1.0);
        assert_eq!(spearman(&u, &[4.0, 3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert!((spearman(&u, &[1.0, 3.0, 2.0, 4.0]).unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(spearman(&u, &[2.0; 4]).unwrap(), 0.0);
        assert_eq!(spearman(&u, &[1.0]), Err(MarkerError::LengthMismatch(4, 1)));
        assert_eq!(spearman(&[1.0], &[1.0]), Err(MarkerError::TooShort(1)));
    }

    #[test]
    fn tied_ranks_are_averaged() {
        assert_eq!(ranks(&[10.0, 20.0, 10.0, 5.0]), vec![2.5, 4.0, 2.5, 1.0]);
    }

    #[test]
    fn matches_distinct_value_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let u: Vec<f64> = (0..30).map(|_| rng.random()).collect();
            let v: Vec<f64> = (0..30).map(|_| rng.random()).collect();
            assert!((spearman(&u, &v).unwrap() - spearman_distinct(&u, &v)).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn monotone_maps_leave_spearman_unchanged(
            u in prop::collection::vec(-5.0f64..5.0, 3..40),
            seed in any::<u64>(),
            scale in 0.1f64..4.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v: Vec<f64> = u.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
            let fu: Vec<f64> = u.iter().map(|x| (scale * x).exp()).collect();
            let gv: Vec<f64> = v.iter().map(|x| x.powi(3) + 2.0 * x).collect();
            let a = spearman(&u, &v).unwrap();
            let b = spearman(&fu, &gv).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn bh_is_monotone_and_dominates(p in prop::collection::vec(0.0f64..1.0, 1..30)) {
            let adj = benjamini_hochberg(&p);
            let mut idx: Vec<usize> = (0..p.len()).collect();
            idx.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
            for w in idx.windows(2) {
                prop_assert!(adj[w[0]] <= adj[w[1]]);
            }
            for (a, r) in adj.iter().zip(&p) {
                prop_assert!(a >= r && *a <= 1.0);
            }
        }
    }

    #[test]
    fn stability_extremes() {
        let m = vec![0.3, -0.2, 0.9, 0.1];
        assert_eq!(consecutive_stability(&[m.clone(), m.clone(), m.clone()]).unwrap(), 1.0);
        let rev: Vec<f64> = m.iter().map(|x| -x).collect();
        assert_eq!(consecutive_stability(&[m.clone(), rev]).unwrap(), -1.0);
        assert_eq!(consecutive_stability(&[m]), Err(MarkerError::TooFewMatrices(1)));
    }

    #[test]
    fn stability_matches_pairwise_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let flats: Vec<Vec<f64>> = (0..7).map(|_| (0..496).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let mut naive = 0.0;
        for k in 0..6 {
            naive += spearman_distinct(&flats[k], &flats[k + 1]);
        }
        naive /= 6.0;
        assert!((consecutive_stability(&flats).unwrap() - naive).abs() < 1e-12);
    }

    #[test]
    fn welch_reference_value() {
        let a = [0.71, 0.74, 0.69, 0.77, 0.73, 0.75];
        let b = [0.70, 0.66, 0.68, 0.71, 0.64];
        let r = welch_t_test(&a, &b).unwrap();
        // Reference values from an independent statistics package.
        assert!((r.t - 3.097_872_817_608_273_7).abs() < 1e-10);
        assert!((r.p - 0.013_410_193_034_480_987).abs() < 1e-8);
        let same = welch_t_test(&a, &a).unwrap();
        assert_eq!(same.t, 0.0);
        assert!((same.p - 1.0).abs() < 1e-12);
    }

    fn jittered(label: Label, mean: f64, l: usize, rng: &mut ChaCha8Rng) -> Vec<StabilityScore> {
        let n = Normal::new(0.0, 0.01).unwrap();
        (0..50)
            .map(|i| StabilityScore {
                recording_id: format!("{label}{i}"),
                label,
                l,
                mean_rho: mean + n.sample(rng),
                pairs: 10,
            })
            .collect()
    }

    #[test]
    fn separated_groups_are_significant() {
        let mut rng = ChaCha8Rng::seed_from_u64(75);
        let mut scores = jittered(Label::Control, 0.75, 100, &mut rng);
        scores.extend(jittered(Label::Depressed, 0.71, 100, &mut rng));
        let rows = group_compare(&scores, &[100]).unwrap();
        let r = &rows[0];
        assert!(r.control_mean > r.depressed_mean);
        assert!(r.p_value < 1e-3);
        assert_eq!(r.p_adjusted, r.p_value);
        assert!(matches!(group_compare(&scores, &[200]), Err(MarkerError::EmptyGroup { .. })));
    }

    #[test]
    fn bh_by_hand() {
        let adj = benjamini_hochberg(&[0.01, 0.04, 0.03, 0.20]);
        // Sorted p·m/rank: 0.04, 0.06, 0.0533, 0.20; the step-up minimum
        // lowers 0.06 to 0.0533.
        assert!((adj[0] - 0.04).abs() < 1e-12);
        assert!((adj[1] - 0.16 / 3.0).abs() < 1e-12);
        assert!((adj[2] - 0.16 / 3.0).abs() < 1e-12);
        assert!((adj[3] - 0.20).abs() < 1e-12);
    }

    #[test]
    fn bar_data_is_sorted_descending() {
        let s = |id: &str, rho| StabilityScore {
            recording_id: id.into(),
            label: Label::Control,
            l: 100,
            mean_rho: rho,
            pairs: 3,
        };
        let t = bar_data_tsv(&[s("a", 0.2), s("b", 0.9), s("c", 0.5)], 100);
        let ids: Vec<&str> = t.lines().skip(1).map(|l| l.split('\t').nth(1).unwrap()).collect();
        assert_eq!(ids, ["b", "c", "a"]);
    }
}
