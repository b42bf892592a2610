//! Adapter for third-party solvers driven over standard input and output.

use std::io::{Read, Write};
use std::os::unix::process::CommandExt;
use std::process::{Child, Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use cagasp_core::incremental::{Engine, EngineRun, Status};
use cagasp_core::lang::{parse_atoms, render_program, Program};
use cagasp_core::solve::AnswerSet;

use crate::BenchError;

const POLL: Duration = Duration::from_millis(2);
const STDERR_EXCERPT: usize = 400;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExternalRun {
    pub status: Status,
    pub model: Option<AnswerSet>,
    pub elapsed: Duration,
}

/// Run `cmd` through `sh -c`, feeding it `program` and reading one model.
///
/// Exit codes 10 and 30 mean satisfiable, 20 unsatisfiable. On exit code 0
/// the output decides: `UNSATISFIABLE` on a line of its own, or else a model
/// line. The model line is the line after `Answer:` when present, otherwise
/// the first non-empty line that is not a status word. Other exit codes are
/// failures. The whole process group is killed when `timeout` runs out.
pub fn run_external_engine(program: &str, cmd: &str, timeout: Duration) -> Result<ExternalRun, BenchError> {
    let start = Instant::now();
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(cmd)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .process_group(0)
        .spawn()
        .map_err(|e| BenchError::Spawn {
            cmd: cmd.to_string(),
            source: e,
        })?;

    let mut stdin = child.stdin.take().expect("piped stdin");
    let input = program.to_string();
    // a child that never reads its input must not block us
    thread::spawn(move || {
        let _ = stdin.write_all(input.as_bytes());
    });
    let stdout = drain(child.stdout.take().expect("piped stdout"));
    let stderr = drain(child.stderr.take().expect("piped stderr"));

    let code = loop {
        if let Some(status) = child.try_wait().map_err(BenchError::Io)? {
            break status.code();
        }
        if start.elapsed() >= timeout {
            kill_group(&mut child);
            return Ok(ExternalRun {
                status: Status::Timeout,
                model: None,
                elapsed: start.elapsed(),
            });
        }
        thread::sleep(POLL);
    };
    let out = stdout.join().unwrap_or_default();
    let err = stderr.join().unwrap_or_default();
    let elapsed = start.elapsed();

    let unsat_text = out.lines().any(|l| l.trim() == "UNSATISFIABLE");
    let status = match code {
        Some(10 | 30) => Status::Sat,
        Some(20) => Status::Unsat,
        Some(0) if unsat_text => Status::Unsat,
        Some(0) => Status::Sat,
        other => {
            return Err(BenchError::ExternalEngine {
                code: other,
                stderr: excerpt(&err),
            })
        }
    };
    let model = match status {
        Status::Sat => Some(parse_model(&out)?),
        _ => None,
    };
    Ok(ExternalRun { status, model, elapsed })
}

fn drain(mut r: impl Read + Send + 'static) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = r.read_to_end(&mut buf);
        String::from_utf8_lossy(&buf).into_owned()
    })
}

fn kill_group(child: &mut Child) {
    if let Ok(pid) = i32::try_from(child.id()) {
        // SAFETY: signalling a process group we created; no memory is touched.
        unsafe {
            libc::kill(-pid, libc::SIGKILL);
        }
    }
    let _ = child.kill();
    let _ = child.wait();
}

fn excerpt(s: &str) -> String {
    let s = s.trim();
    match s.char_indices().nth(STDERR_EXCERPT) {
        Some((i, _)) => format!("{}...", &s[..i]),
        None => s.to_string(),
    }
}

const STATUS_WORDS: [&str; 4] = ["SATISFIABLE", "UNSATISFIABLE", "UNKNOWN", "OPTIMUM FOUND"];

fn model_line(out: &str) -> Option<&str> {
    let mut lines = out.lines();
    if out.lines().any(|l| l.starts_with("Answer:")) {
        lines.find(|l| l.starts_with("Answer:"));
        return lines.next();
    }
    lines.find(|l| {
        let t = l.trim();
        !t.is_empty() && !STATUS_WORDS.contains(&t)
    })
}

/// The first model printed in `out`; no model line means the empty model.
pub fn parse_model(out: &str) -> Result<AnswerSet, BenchError> {
    let Some(line) = model_line(out) else {
        return Ok(AnswerSet::default());
    };
    parse_atoms(line)
        .map(AnswerSet::new)
        .map_err(|_| BenchError::ModelLine { line: line.to_string() })
}

/// An [`Engine`] that hands the whole program to an external command.
#[derive(Clone, Debug)]
pub struct ExternalEngine {
    pub cmd: String,
    pub deadline: Option<Instant>,
}

impl Engine for ExternalEngine {
    fn first_model(&self, p: &Program) -> cagasp_core::Result<EngineRun> {
        let budget = self
            .deadline
            .map_or(Duration::MAX, |d| d.saturating_duration_since(Instant::now()));
        let run = run_external_engine(&render_program(p), &self.cmd, budget)
            .map_err(|e| cagasp_core::Error::Engine(e.to_string()))?;
        Ok(EngineRun {
            status: run.status,
            model: run.model,
            stats: None,
            ground_time: Duration::ZERO,
            solve_time: run.elapsed,
        })
    }
}
