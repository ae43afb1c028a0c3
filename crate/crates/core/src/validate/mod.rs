//! Acceptance checks. Each check reports measured against expected values
//! and passes only if every measurement is within tolerance.

mod checks;

use std::fmt::Write as _;
use std::time::Instant;

pub use checks::*;

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub label: String,
    pub measured: String,
    pub expected: String,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub id: u32,
    pub name: String,
    pub measurements: Vec<Measurement>,
    pub error: Option<String>,
    pub elapsed_s: f64,
    started: Instant,
}

impl Check {
    pub fn new(id: u32, name: &str) -> Self {
        Check {
            id,
            name: name.to_string(),
            measurements: Vec::new(),
            error: None,
            elapsed_s: 0.0,
            started: Instant::now(),
        }
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && !self.measurements.is_empty() && self.measurements.iter().all(|m| m.ok)
    }

    pub fn measure(&mut self, label: &str, measured: impl Into<String>, expected: impl Into<String>, ok: bool) -> bool {
        self.measurements.push(Measurement {
            label: label.to_string(),
            measured: measured.into(),
            expected: expected.into(),
            ok,
        });
        ok
    }

    pub fn runtime_limit(&mut self, limit_s: f64) {
        let t = self.started.elapsed().as_secs_f64();
        self.measure("runtime", format!("{t:.2} s"), format!("< {limit_s} s"), t < limit_s);
    }

    /// One line: `[PASS] 3 plate RCS oracle (0.01 s)`.
    pub fn summary_line(&self) -> String {
        format!(
            "[{}] {} {} ({:.2} s)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed_s
        )
    }
}

/// Runs `f` on a fresh check, recording wall time and turning an `Err`
/// into a failed check.
pub(crate) fn timed(id: u32, name: &str, f: impl FnOnce(&mut Check) -> Result<(), String>) -> Check {
    let mut c = Check::new(id, name);
    let r = f(&mut c);
    c.elapsed_s = c.started.elapsed().as_secs_f64();
    if let Err(e) = r {
        c.error = Some(e);
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ValidateOptions {
    /// Relative cross-range scale error injected into keystone resampling.
    pub perturbation: f64,
    /// Skip the dataset determinism check.
    pub skip_dataset: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed()).count()
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            writeln!(s, "{}", c.summary_line()).unwrap();
            for m in &c.measurements {
                writeln!(
                    s,
                    "    {} {:<44} measured {:<28} expected {}",
                    if m.ok { " " } else { "x" },
                    m.label,
                    m.measured,
                    m.expected
                )
                .unwrap();
            }
            if let Some(e) = &c.error {
                writeln!(s, "    x error: {e}").unwrap();
            }
        }
        writeln!(
            s,
            "{} of {} checks passed",
            self.checks.len() - self.failures(),
            self.checks.len()
        )
        .unwrap();
        s
    }
}

pub fn run_all(opts: &ValidateOptions) -> Report {
    let mut checks = vec![
        prism_three_peaks(),
        shadow_map(),
        plate_oracle(),
        default_parameters(),
        point_scatterers(opts.perturbation),
        bistatic_degradation(),
        clip_accounting(),
        invariance_suite(opts.perturbation),
    ];
    if !opts.skip_dataset {
        checks.push(dataset_determinism());
    }
    Report { checks }
}
