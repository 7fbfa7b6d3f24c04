//! Right-hand side construction.

use std::path::PathBuf;
use std::str::FromStr;

use crate::CliError;

/// 64-bit linear congruential generator.
///
/// `next` advances `state = state * 6364136223846793005 + 1442695040888963407`
/// (wrapping) and maps the top 53 bits of the new state to `[0, 1)`.
#[derive(Debug, Clone)]
pub struct Lcg {
    state: u64,
}

impl Lcg {
    pub const MULTIPLIER: u64 = 6364136223846793005;
    pub const INCREMENT: u64 = 1442695040888963407;

    pub fn new(seed: u64) -> Self {
        Lcg { state: seed }
    }

    pub fn next_f64(&mut self) -> f64 {
        self.state = self
            .state
            .wrapping_mul(Self::MULTIPLIER)
            .wrapping_add(Self::INCREMENT);
        (self.state >> 11) as f64 / (1u64 << 53) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RhsSpec {
    Ones,
    Random(u64),
    File(PathBuf),
}

impl FromStr for RhsSpec {
    type Err = CliError;

    /// `"ones"`, `"random(SEED)"`, or anything else as a file path.
    fn from_str(s: &str) -> Result<Self, CliError> {
        if s == "ones" {
            return Ok(RhsSpec::Ones);
        }
        if let Some(seed) = s.strip_prefix("random(").and_then(|r| r.strip_suffix(')')) {
            return seed
                .trim()
                .parse()
                .map(RhsSpec::Random)
                .map_err(|_| CliError::Config(format!("bad random seed {seed:?}")));
        }
        Ok(RhsSpec::File(PathBuf::from(s)))
    }
}

impl RhsSpec {
    pub fn generate(&self, n: usize) -> Result<Vec<f64>, CliError> {
        match self {
            RhsSpec::Ones => Ok(vec![1.0; n]),
            RhsSpec::Random(seed) => {
                let mut lcg = Lcg::new(*seed);
                Ok((0..n).map(|_| lcg.next_f64()).collect())
            }
            RhsSpec::File(path) => {
                let label = path.display().to_string();
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: label.clone(),
                    source,
                })?;
                let mut values = Vec::with_capacity(n);
                for (i, line) in text.lines().enumerate() {
                    for token in line.split_whitespace() {
                        values.push(token.parse().map_err(|_| CliError::Parse {
                            path: label.clone(),
                            line: i + 1,
                            message: format!("bad number {token:?}"),
                        })?);
                    }
                }
                if values.len() != n {
                    return Err(CliError::Config(format!(
                        "{label}: expected {n} values, found {}",
                        values.len()
                    )));
                }
                Ok(values)
            }
        }
    }
}

impl std::fmt::Display for RhsSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RhsSpec::Ones => f.write_str("ones"),
            RhsSpec::Random(seed) => write!(f, "random({seed})"),
            RhsSpec::File(p) => write!(f, "{}", p.display()),
        }
    }
}
