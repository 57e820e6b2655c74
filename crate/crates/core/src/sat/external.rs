use std::io::{ErrorKind, Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use super::{OracleError, SatResult};
use crate::frontend::Cnf;

pub(super) fn solve(program: &str, args: &[String], cnf: &Cnf, deadline: Option<Instant>) -> Result<SatResult, OracleError> {
    let mut file = tempfile::Builder::new().suffix(".cnf").tempfile()?;
    file.write_all(cnf.to_dimacs().as_bytes())?;
    file.flush()?;
    let mut child = Command::new(program)
        .args(args)
        .arg(file.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| match e.kind() {
            ErrorKind::NotFound | ErrorKind::PermissionDenied => OracleError::MissingExecutable(program.to_owned()),
            _ => OracleError::Io(e),
        })?;
    let mut stdout = child.stdout.take().expect("stdout is piped");
    let reader = thread::spawn(move || {
        let mut s = String::new();
        stdout.read_to_string(&mut s).map(|_| s)
    });
    loop {
        if child.try_wait()?.is_some() {
            break;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            let _ = child.kill();
            let _ = child.wait();
            return Err(OracleError::Timeout);
        }
        thread::sleep(Duration::from_millis(2));
    }
    let out = reader
        .join()
        .map_err(|_| OracleError::Protocol("output reader panicked".into()))??;
    parse_competition_output(&out, cnf.num_vars)
}

/// Parses SAT-competition solver output (`s` status line, `v` value lines).
/// Variables without a `v` entry are completed with 0.
pub fn parse_competition_output(out: &str, num_vars: u32) -> Result<SatResult, OracleError> {
    let mut status = None;
    let mut model = vec![false; num_vars as usize + 1];
    let mut ended = false;
    for line in out.lines() {
        let line = line.trim();
        if let Some(s) = line.strip_prefix("s ") {
            status = Some(match s.trim() {
                "SATISFIABLE" => true,
                "UNSATISFIABLE" => false,
                other => return Err(OracleError::Protocol(format!("unexpected status `{}`", other))),
            });
        } else if let Some(vals) = line.strip_prefix("v ").or(if line == "v" { Some("") } else { None }) {
            for tok in vals.split_whitespace() {
                let l: i64 = tok
                    .parse()
                    .map_err(|_| OracleError::Protocol(format!("bad value literal `{}`", tok)))?;
                if l == 0 {
                    ended = true;
                    continue;
                }
                let v = l.unsigned_abs() as usize;
                if v > num_vars as usize {
                    return Err(OracleError::Protocol(format!("value for unknown variable {}", v)));
                }
                model[v] = l > 0;
            }
        }
    }
    match status {
        Some(true) if ended => Ok(SatResult::Sat(model)),
        Some(true) => Err(OracleError::Protocol("model not terminated by `v ... 0`".into())),
        Some(false) => Ok(SatResult::Unsat),
        None => Err(OracleError::Protocol("no `s` status line".into())),
    }
}
