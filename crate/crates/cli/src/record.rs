//! Flat `key=value` record written next to every command's outputs.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use corrdep::eval_harness::{hardware_descriptor, RunConfig};

use crate::error::CliError;

pub struct RunRecord {
    command_line: String,
    config: Option<RunConfig>,
    seed: u64,
    inputs: Vec<(PathBuf, String)>,
    outputs: Vec<PathBuf>,
    started: SystemTime,
    clock: Instant,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let mut f = fs::File::open(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

impl RunRecord {
    pub fn start(argv: &[String], seed: u64) -> Self {
        Self {
            command_line: argv.join(" "),
            config: None,
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            started: SystemTime::now(),
            clock: Instant::now(),
        }
    }

    pub fn config(&mut self, c: &RunConfig) {
        self.config = Some(c.clone());
    }

    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        let digest = sha256_file(path)?;
        self.inputs.push((path.to_path_buf(), digest));
        Ok(())
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn render(&self) -> String {
        let mut out = format!("command={}\nseed={}\n", self.command_line, self.seed);
        if let Some(c) = &self.config {
            for line in c.to_text().lines() {
                if let Some((k, v)) = line.split_once(" = ") {
                    out.push_str(&format!("config.{k}={v}\n"));
                }
            }
        }
        for (i, (p, h)) in self.inputs.iter().enumerate() {
            out.push_str(&format!("input.{i}={}\ninput.{i}.sha256={h}\n", p.display()));
        }
        for (i, p) in self.outputs.iter().enumerate() {
            out.push_str(&format!("output.{i}={}\n", p.display()));
        }
        let started = self.started.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        out.push_str(&format!(
            "hardware={}\nstarted_unix={started}\nwall_clock_s={:.3}\n",
            hardware_descriptor(),
            self.clock.elapsed().as_secs_f64()
        ));
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.render()).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_known_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("abc");
        fs::write(&p, b"abc").unwrap();
        assert_eq!(
            sha256_file(&p).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn render_is_key_value() {
        let mut r = RunRecord::start(&["corrdep".into(), "baseline".into()], 4);
        r.config(&RunConfig::default());
        r.output(Path::new("out.tsv"));
        let text = r.render();
        assert!(text.lines().all(|l| l.contains('=')));
        assert!(text.contains("seed=4\n"));
        assert!(text.contains("config.epochs=100\n"));
        assert!(text.contains("output.0=out.tsv\n"));
    }
}
