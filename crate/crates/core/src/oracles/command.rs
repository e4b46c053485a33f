use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::sync::{mpsc, Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{OracleError, OracleVerdict, Sut};

pub const DEFAULT_TIMEOUT_MS: u64 = 5_000;
const STDERR_EXCERPT: usize = 512;
const STDERR_GRACE: Duration = Duration::from_millis(200);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandSpec {
    pub path: String,
    #[serde(default)]
    pub args: Vec<String>,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_parallel")]
    pub max_parallel_processes: usize,
}

fn default_timeout_ms() -> u64 {
    DEFAULT_TIMEOUT_MS
}

fn default_parallel() -> usize {
    1
}

impl CommandSpec {
    pub fn new(path: impl Into<String>, args: &[&str]) -> Self {
        CommandSpec {
            path: path.into(),
            args: args.iter().map(|s| s.to_string()).collect(),
            timeout_ms: DEFAULT_TIMEOUT_MS,
            max_parallel_processes: 1,
        }
    }
}

/// Runs an external program with the input on stdin. Exit status 0 means
/// valid; a nonzero status, a signal or a timeout means invalid.
#[derive(Debug)]
pub struct CommandOracle {
    spec: CommandSpec,
    running: Mutex<usize>,
    slot_freed: Condvar,
}

impl CommandOracle {
    pub fn new(spec: CommandSpec) -> Self {
        CommandOracle {
            spec,
            running: Mutex::new(0),
            slot_freed: Condvar::new(),
        }
    }

    fn acquire(&self) {
        let limit = self.spec.max_parallel_processes.max(1);
        let mut running = self.running.lock().unwrap();
        while *running >= limit {
            running = self.slot_freed.wait(running).unwrap();
        }
        *running += 1;
    }

    fn release(&self) {
        *self.running.lock().unwrap() -= 1;
        self.slot_freed.notify_one();
    }

    fn run(&self, input: &str) -> Result<OracleVerdict, OracleError> {
        let io_err = |source| OracleError::Io {
            command: self.spec.path.clone(),
            source,
        };
        let mut child = Command::new(&self.spec.path)
            .args(&self.spec.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::null())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|source| OracleError::Launch {
                command: self.spec.path.clone(),
                source,
            })?;

        let mut stdin = child.stdin.take().expect("stdin is piped");
        let payload = input.as_bytes().to_vec();
        // The child may exit without reading; a broken pipe is not an error.
        let writer = thread::spawn(move || {
            let _ = stdin.write_all(&payload);
        });
        let mut stderr = child.stderr.take().expect("stderr is piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            let mut buf = Vec::new();
            let _ = stderr.read_to_end(&mut buf);
            let _ = tx.send(buf);
        });

        let deadline = Instant::now() + Duration::from_millis(self.spec.timeout_ms);
        let mut pause = Duration::from_micros(200);
        let status = loop {
            if let Some(status) = child.try_wait().map_err(io_err)? {
                break Some(status);
            }
            if Instant::now() >= deadline {
                let _ = child.kill();
                let _ = child.wait();
                break None;
            }
            thread::sleep(pause);
            pause = (pause * 2).min(Duration::from_millis(20));
        };
        // Descendants of the child may keep the pipes open; never wait on
        // them for long.
        drop(writer);
        let stderr = rx.recv_timeout(STDERR_GRACE).unwrap_or_default();

        Ok(match status {
            None => OracleVerdict::invalid("timeout"),
            Some(s) if s.success() => OracleVerdict::valid(),
            Some(s) => {
                let excerpt = String::from_utf8_lossy(&stderr[..stderr.len().min(STDERR_EXCERPT)]);
                let excerpt = excerpt.trim();
                match s.code() {
                    Some(code) if excerpt.is_empty() => {
                        OracleVerdict::invalid(format!("exit status {code}"))
                    }
                    Some(code) => OracleVerdict::invalid(format!("exit status {code}: {excerpt}")),
                    None => OracleVerdict::invalid(format!("terminated by signal: {excerpt}")),
                }
            }
        })
    }
}

impl Sut for CommandOracle {
    fn check(&self, input: &str) -> Result<OracleVerdict, OracleError> {
        self.acquire();
        let result = self.run(input);
        self.release();
        result
    }
}
