use std::fmt;
use std::process::ExitCode;

use corrdep::audio_io::AudioError;
use corrdep::eval_harness::EvalError;
use corrdep::marker_analysis::MarkerError;
use corrdep::models::ModelError;
use corrdep::synth_corpus::SynthError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Usage,
    Data,
    Numerical,
}

impl Category {
    pub fn exit_code(self) -> ExitCode {
        ExitCode::from(match self {
            Self::Usage => 2,
            Self::Data => 3,
            Self::Numerical => 4,
        })
    }

    fn as_str(self) -> &'static str {
        match self {
            Self::Usage => "usage",
            Self::Data => "data",
            Self::Numerical => "numerical",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub category: Category,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { category: Category::Usage, message: message.into() }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self { category: Category::Data, message: message.into() }
    }
}

/// Single line, `error[<category>]: <message>`.
impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = self.message.replace('\n', " ");
        write!(f, "error[{}]: {msg}", self.category.as_str())
    }
}

fn model_category(e: &ModelError) -> Category {
    match e {
        ModelError::DivergenceDetected { .. } => Category::Numerical,
        ModelError::InvalidConfig(_) => Category::Usage,
        _ => Category::Data,
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        let category = match &e {
            EvalError::Model(m) => model_category(m),
            EvalError::InvalidPriors { .. } | EvalError::InvalidAccuracy(_) | EvalError::PerfectBaseline => Category::Numerical,
            EvalError::InvalidL(_) | EvalError::Config { .. } => Category::Usage,
            _ => Category::Data,
        };
        Self { category, message: e.to_string() }
    }
}

impl From<AudioError> for CliError {
    fn from(e: AudioError) -> Self {
        Self::data(e.to_string())
    }
}

impl From<MarkerError> for CliError {
    fn from(e: MarkerError) -> Self {
        Self::data(e.to_string())
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        let category = match e {
            SynthError::InvalidParams(_) => Category::Usage,
            _ => Category::Data,
        };
        Self { category, message: e.to_string() }
    }
}
