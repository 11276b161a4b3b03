//! Batch front end: read a system spec, run one analysis, print a report.

pub mod commands;
pub mod spec;

use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

pub use commands::{run, Cli};
pub use spec::SystemSpec;

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] geodecomp::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("usage: {0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use geodecomp::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                E::SingularGram(_) => 3,
                E::NonFiniteValue(_) => 4,
                E::Parse(_)
                | E::InvalidConfig(_)
                | E::InvalidDimension(_)
                | E::DimensionMismatch { .. }
                | E::OddSymplecticDimension(_)
                | E::NotRational
                | E::NonzeroConstantTerm
                | E::DegreeOverflow(_) => 2,
                _ => 1,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Reads a file, or standard input when `path` is `-`.
pub fn read_input(path: &str) -> CliResult<String> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        Ok(std::fs::read_to_string(path)?)
    }
}

pub fn load_spec(path: &str) -> CliResult<spec::System> {
    Ok(SystemSpec::from_json(&read_input(path)?)?.load()?)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

/// Parses `"1,2.5,-3"`.
pub fn parse_point(text: &str, n: usize) -> CliResult<nalgebra::DVector<f64>> {
    let values = text
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("not a number: {v:?}")))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    if values.len() != n {
        return Err(geodecomp::Error::DimensionMismatch {
            expected: n,
            found: values.len(),
        }
        .into());
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Usage(format!("point has non-finite entries: {text:?}")));
    }
    Ok(nalgebra::DVector::from_vec(values))
}

/// Caps the rayon pool from `GEODECOMP_THREADS`.
pub fn configure_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("GEODECOMP_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("GEODECOMP_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(CliError::Usage("GEODECOMP_THREADS must be positive".into()));
        }
        // a second call in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(geodecomp::Error::Parse("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(geodecomp::Error::SingularGram("x".into())).exit_code(), 3);
        assert_eq!(CliError::from(geodecomp::Error::NonFiniteValue("x".into())).exit_code(), 4);
        assert_eq!(CliError::from(geodecomp::Error::MaxStepsExceeded(3)).exit_code(), 1);
    }

    #[test]
    fn points() {
        assert_eq!(parse_point("1, 2.5,-3", 3).unwrap().as_slice(), &[1.0, 2.5, -3.0]);
        assert_eq!(parse_point("1,2", 3).unwrap_err().exit_code(), 2);
        assert_eq!(parse_point("1,x", 2).unwrap_err().exit_code(), 2);
        assert_eq!(parse_point("1,inf", 2).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn atomic_write() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.json");
        write_atomic(&p, b"first").unwrap();
        write_atomic(&p, b"second").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "second");
    }
}
