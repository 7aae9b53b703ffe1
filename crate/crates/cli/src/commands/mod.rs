//! Subcommand implementations. Each returns [`CmdError::Input`] for usage
//! and data problems (exit code 2) or [`CmdError::Check`] when a verified
//! check fails (exit code 1).

use anyhow::Error;

pub mod bench;
pub mod eval;
pub mod gradcheck;
pub mod hpp;
pub mod loss;
pub mod regions;
pub mod synth;

#[derive(Debug)]
pub enum CmdError {
    /// Bad flags, malformed files, missing inputs. Exit code 2.
    Input(Error),
    /// A check the command ran did not hold. Exit code 1.
    Check(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Input(_) => 2,
            CmdError::Check(_) => 1,
        }
    }
}

impl std::fmt::Display for CmdError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CmdError::Input(e) => write!(f, "{e:#}"),
            CmdError::Check(msg) => write!(f, "check failed: {msg}"),
        }
    }
}

impl<E: Into<Error>> From<E> for CmdError {
    fn from(err: E) -> Self {
        CmdError::Input(err.into())
    }
}

pub type CmdResult = Result<(), CmdError>;

/// Worker pool sized by `--threads`, the `HOTKIT_THREADS` variable, or
/// rayon's default (flag value 0). Thread count never changes output bytes;
/// per-image results are merged in input order.
pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool, CmdError> {
    let count = match threads {
        Some(n) => n,
        None => std::env::var("HOTKIT_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .unwrap_or(0),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(count)
        .build()
        .map_err(|e| CmdError::Input(e.into()))
}

/// Parse an `HxW` size argument.
pub fn parse_size(value: &str) -> Result<(usize, usize), String> {
    let (h, w) = value
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected HxW, got `{value}`"))?;
    let h: usize = h.trim().parse().map_err(|_| format!("bad height in `{value}`"))?;
    let w: usize = w.trim().parse().map_err(|_| format!("bad width in `{value}`"))?;
    Ok((h, w))
}
