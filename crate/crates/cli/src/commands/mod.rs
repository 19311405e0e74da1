//! Subcommand implementations. Each command is a library function that
//! returns [`crate::Failure`] on error so exit codes and messages can be
//! tested without spawning the binary.

pub mod construct;
pub mod search;
pub mod show;
pub mod verify;

/// One verification check: a stable name, a verdict, and a detail string
/// (deviation and threshold, or the violated invariant).
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of verifying one artifact; printable as line-oriented
/// structured text (`check <name> <pass|FAIL> [detail]`).
#[derive(Debug, Default)]
pub struct Report {
    pub checks: Vec<Check>,
    pub infos: Vec<(String, String)>,
}

impl Report {
    pub fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail,
        });
    }

    /// Pass iff |deviation| <= tol; the detail always shows both.
    pub fn check_tol(&mut self, name: &str, deviation: f64, tol: f64) {
        self.check(
            name,
            deviation.abs() <= tol,
            format!("deviation {:.3e} (tol {:.1e})", deviation.abs(), tol),
        );
    }

    /// Records a pass, or the error's message (the violated invariant).
    pub fn check_result<T>(&mut self, name: &str, result: bellactiv_core::Result<T>) -> Option<T> {
        match result {
            Ok(v) => {
                self.check(name, true, String::new());
                Some(v)
            }
            Err(e) => {
                self.check(name, false, e.to_string());
                None
            }
        }
    }

    pub fn info(&mut self, name: &str, value: String) {
        self.infos.push((name.into(), value));
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn print(&self) {
        let width = self
            .checks
            .iter()
            .map(|c| c.name.len())
            .chain(self.infos.iter().map(|(n, _)| n.len()))
            .max()
            .unwrap_or(0);
        for (name, value) in &self.infos {
            println!("info  {name:<width$}  {value}");
        }
        for c in &self.checks {
            let verdict = if c.passed { "pass" } else { "FAIL" };
            if c.detail.is_empty() {
                println!("check {:<width$}  {verdict}", c.name);
            } else {
                println!("check {:<width$}  {verdict}  {}", c.name, c.detail);
            }
        }
        println!("verdict {}", if self.pass() { "pass" } else { "FAIL" });
    }
}
