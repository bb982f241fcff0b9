use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use gully_core::check::{all_pass, Check};
use gully_core::model::{AnalysisParams, Numerics, Scenario};
use gully_core::Result;
use serde::Serialize;

pub const MANIFEST: &str = "manifest.json";

/// Manifest of one command: what ran, on which scenario, what was written and what passed.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub scenario: String,
    pub digest: String,
    pub elapsed_seconds: f64,
    pub outputs: Vec<String>,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub numerics: Numerics,
    pub n_s: Vec<usize>,
    pub analysis: AnalysisParams,
    #[serde(skip)]
    dir: PathBuf,
    #[serde(skip)]
    clock: Option<Instant>,
}

impl RunReport {
    pub fn start(command: &str, path: &Path, scenario: &Scenario, dir: &Path) -> Self {
        Self {
            command: command.to_string(),
            scenario: path.display().to_string(),
            digest: scenario.digest(),
            elapsed_seconds: 0.0,
            outputs: Vec::new(),
            checks: Vec::new(),
            pass: true,
            numerics: scenario.numerics,
            n_s: scenario.n_s.clone(),
            analysis: scenario.analysis,
            dir: dir.to_path_buf(),
            clock: Some(Instant::now()),
        }
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<fs::File>> {
        fs::create_dir_all(&self.dir)?;
        let path = self.dir.join(name);
        let file = fs::File::create(&path)?;
        self.outputs.push(path.display().to_string());
        Ok(BufWriter::new(file))
    }

    /// Writes a CSV with the given header; every row has the header's width.
    pub fn write_csv<'a>(&mut self, name: &str, header: &str, rows: impl Iterator<Item = Vec<f64>> + 'a) -> Result<()> {
        let mut w = self.create(name)?;
        writeln!(w, "{header}")?;
        for row in rows {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value).map_err(std::io::Error::other)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        self.checks.extend(checks);
    }

    pub fn finish(&mut self) -> Result<()> {
        self.pass = all_pass(&self.checks);
        if let Some(clock) = self.clock.take() {
            self.elapsed_seconds = clock.elapsed().as_secs_f64();
        }
        fs::create_dir_all(&self.dir)?;
        let path = self.dir.join(MANIFEST);
        self.outputs.push(path.display().to_string());
        let text = serde_json::to_string_pretty(&*self).map_err(std::io::Error::other)?;
        fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn print_summary(&self) {
        for c in &self.checks {
            let tag = if c.pass { "PASS" } else { "FAIL" };
            println!("{tag}  {}  measured {:.6e}  tolerance {:.6e}", c.name, c.measured, c.tolerance);
        }
        let verdict = if self.pass { "pass" } else { "fail" };
        println!(
            "{}: {verdict} ({} checks, {} files, {:.2} s)",
            self.command,
            self.checks.len(),
            self.outputs.len(),
            self.elapsed_seconds
        );
    }
}
