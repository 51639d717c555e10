use super::{EvalError, ProtocolConfig};
use crate::corr_repr::DEFAULT_GRID;
use crate::dsp_features::{FeatureConfig, DEFAULT_VOICING_THRESHOLD};
use crate::models::{SvmConfig, TrainConfig};

/// Flat `key = value` run configuration. Every key is optional.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub c: f64,
    pub voicing_threshold: f64,
    pub grid: Vec<usize>,
    pub reps: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            seed: 0,
            epochs: t.epochs,
            lr: t.learning_rate,
            batch_size: t.batch_size,
            c: SvmConfig::default().c,
            voicing_threshold: DEFAULT_VOICING_THRESHOLD,
            grid: DEFAULT_GRID.to_vec(),
            reps: 10,
        }
    }
}

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T, EvalError> {
    v.parse().map_err(|_| EvalError::Config {
        line,
        message: format!("bad value {v:?} for {key}"),
    })
}

pub fn parse_grid(v: &str) -> Result<Vec<usize>, String> {
    let grid = v
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| format!("bad grid entry {s:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    if grid.is_empty() || grid.iter().any(|&l| l < 2 || l % 2 != 0) {
        return Err(format!("grid {v:?} must list even lengths"));
    }
    Ok(grid)
}

impl RunConfig {
    /// Applies the assignments in `text` on top of `self`. `#` starts a comment.
    pub fn merge(&mut self, text: &str) -> Result<(), EvalError> {
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or(EvalError::Config {
                line,
                message: format!("expected key = value, got {content:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "seed" => self.seed = parse_value(line, key, value)?,
                "epochs" => self.epochs = parse_value(line, key, value)?,
                "lr" => self.lr = parse_value(line, key, value)?,
                "batch_size" => self.batch_size = parse_value(line, key, value)?,
                "C" => self.c = parse_value(line, key, value)?,
                "voicing_threshold" => self.voicing_threshold = parse_value(line, key, value)?,
                "reps" => self.reps = parse_value(line, key, value)?,
                "grid" => self.grid = parse_grid(value).map_err(|message| EvalError::Config { line, message })?,
                other => {
                    return Err(EvalError::Config {
                        line,
                        message: format!("unknown key {other:?}"),
                    })
                }
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, EvalError> {
        let mut c = Self::default();
        c.merge(text)?;
        Ok(c)
    }

    pub fn train(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            learning_rate: self.lr,
            batch_size: self.batch_size,
            seed: self.seed,
            ..TrainConfig::default()
        }
    }

    pub fn protocol(&self) -> ProtocolConfig {
        ProtocolConfig {
            reps: self.reps,
            seed_base: self.seed,
            train: self.train(),
            svm: SvmConfig {
                c: self.c,
                ..SvmConfig::default()
            },
            ..ProtocolConfig::default()
        }
    }

    pub fn features(&self) -> FeatureConfig {
        FeatureConfig {
            voicing_threshold: self.voicing_threshold,
            ..FeatureConfig::default()
        }
    }

    /// Canonical text form; parsing it yields `self` again.
    pub fn to_text(&self) -> String {
        let grid: Vec<String> = self.grid.iter().map(|l| l.to_string()).collect();
        format!(
            "seed = {}\nepochs = {}\nlr = {:?}\nbatch_size = {}\nC = {:?}\nvoicing_threshold = {:?}\ngrid = {}\nreps = {}\n",
            self.seed,
            self.epochs,
            self.lr,
            self.batch_size,
            self.c,
            self.voicing_threshold,
            grid.join(","),
            self.reps
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let c = RunConfig::parse("# comment\n\nseed = 7\nlr=0.001  # trailing\ngrid = 100, 300,500\nC = 0.5\n").unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.lr, 0.001);
        assert_eq!(c.grid, vec![100, 300, 500]);
        assert_eq!(c.c, 0.5);
        assert_eq!(c.epochs, 100);
        assert_eq!(c.protocol().train.learning_rate, 0.001);
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn errors_name_the_line() {
        assert!(matches!(RunConfig::parse("seed = 1\nfoo = 2"), Err(EvalError::Config { line: 2, .. })));
        assert!(matches!(RunConfig::parse("epochs = many"), Err(EvalError::Config { line: 1, .. })));
        assert!(matches!(RunConfig::parse("grid = 100,101"), Err(EvalError::Config { .. })));
        assert!(matches!(RunConfig::parse("just words"), Err(EvalError::Config { .. })));
    }

    #[test]
    fn text_round_trip() {
        let c = RunConfig {
            seed: 3,
            lr: 0.1 + 0.2,
            grid: vec![200],
            ..RunConfig::default()
        };
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
    }
}
