//! Shell command execution with a wall-clock limit.

use std::io::{Read, Seek, SeekFrom};
use std::os::unix::process::CommandExt;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use wait_timeout::ChildExt;

use crate::error::{IoContext, Result};

const OUTPUT_CAP: usize = 1 << 20;

#[derive(Debug, Clone)]
pub struct CommandRun {
    pub exit_code: Option<i32>,
    pub stdout: String,
    pub stderr: String,
    pub timed_out: bool,
    pub wall_time: Duration,
}

impl CommandRun {
    pub fn success(&self) -> bool {
        !self.timed_out && self.exit_code == Some(0)
    }
}

fn read_capped(mut file: std::fs::File) -> String {
    let mut buf = Vec::new();
    let _ = file.seek(SeekFrom::Start(0));
    let _ = file.take(OUTPUT_CAP as u64).read_to_end(&mut buf);
    String::from_utf8_lossy(&buf).into_owned()
}

/// Runs `command` under `sh -c` in `cwd`. On timeout the whole process group
/// is killed.
pub fn run_shell(command: &str, cwd: &Path, timeout: Duration) -> Result<CommandRun> {
    let out = tempfile::tempfile().at(cwd)?;
    let err = tempfile::tempfile().at(cwd)?;
    let start = Instant::now();
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(command)
        .current_dir(cwd)
        .stdin(Stdio::null())
        .stdout(out.try_clone().at(cwd)?)
        .stderr(err.try_clone().at(cwd)?)
        .process_group(0)
        .spawn()
        .at(cwd)?;
    let status = child.wait_timeout(timeout).at(cwd)?;
    let (exit_code, timed_out) = match status {
        Some(status) => (status.code(), false),
        None => {
            let pgid = child.id() as libc::pid_t;
            // SAFETY: signalling a process group we created; no memory is touched.
            unsafe {
                libc::kill(-pgid, libc::SIGKILL);
            }
            let _ = child.wait();
            (None, true)
        }
    };
    Ok(CommandRun {
        exit_code,
        stdout: read_capped(out),
        stderr: read_capped(err),
        timed_out,
        wall_time: start.elapsed(),
    })
}

/// Single-quotes `s` for POSIX sh.
pub fn shell_quote(s: &str) -> String {
    if !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || b"-_./=:+,".contains(&b)) {
        return s.to_string();
    }
    format!("'{}'", s.replace('\'', r"'\''"))
}

/// Substitutes `{key}` placeholders; values are inserted as-is.
pub fn expand(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (k, v) in vars {
        out = out.replace(&format!("{{{k}}}"), v);
    }
    out
}

/// Resolves the program a command line would execute, if it exists.
pub fn resolve_program(command: &str) -> Option<PathBuf> {
    let first = command.split_whitespace().find(|w| !w.contains('=') || w.starts_with('/'))?;
    let first = first.trim_matches(|c| c == '\'' || c == '"');
    if first.contains('/') {
        let p = PathBuf::from(first);
        return p.exists().then_some(p);
    }
    std::env::var_os("PATH")?
        .to_str()?
        .split(':')
        .map(|dir| Path::new(dir).join(first))
        .find(|p| p.is_file())
}
