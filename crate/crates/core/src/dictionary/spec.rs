use std::fmt;
use std::str::FromStr;

use super::{build_constant, build_daubechies, build_fourier, build_haar, build_histogram, concat};
use super::{DesignGrid, Dictionary};
use crate::error::{Error, Result};

/// One system in a dictionary specification string.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemSpec {
    Haar { max_level: u32 },
    Daubechies { moments: usize, max_level: u32 },
    Fourier { n_atoms: usize },
    Histogram { delta: f64 },
    Constant,
}

/// Comma-separated system codes, e.g.
/// `haar:J=10,fourier:m=1023,db4:J=10,hist:delta=0.0078125,const`.
#[derive(Debug, Clone, PartialEq)]
pub struct DictionarySpec {
    pub systems: Vec<SystemSpec>,
}

impl DictionarySpec {
    pub fn build(&self, grid: &DesignGrid) -> Result<Dictionary> {
        let dicts = self
            .systems
            .iter()
            .map(|s| match s {
                SystemSpec::Haar { max_level } => build_haar(grid, *max_level),
                SystemSpec::Daubechies { moments, max_level } => {
                    build_daubechies(grid, *moments, *max_level)
                }
                SystemSpec::Fourier { n_atoms } => build_fourier(grid, *n_atoms),
                SystemSpec::Histogram { delta } => build_histogram(grid, *delta),
                SystemSpec::Constant => Ok(build_constant()),
            })
            .collect::<Result<Vec<_>>>()?;
        concat(dicts)
    }
}

fn param<T: FromStr>(code: &str, rest: Option<&str>, key: &str) -> Result<T> {
    let bad = || Error::Config(format!("system `{code}` expects `{code}:{key}=<value>`"));
    let (k, v) = rest.and_then(|r| r.split_once('=')).ok_or_else(bad)?;
    if k.trim() != key {
        return Err(bad());
    }
    v.trim().parse().map_err(|_| bad())
}

impl FromStr for SystemSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (code, rest) = match s.split_once(':') {
            Some((c, r)) => (c.trim(), Some(r)),
            None => (s, None),
        };
        match code {
            "haar" => Ok(Self::Haar {
                max_level: param(code, rest, "J")?,
            }),
            "fourier" => Ok(Self::Fourier {
                n_atoms: param(code, rest, "m")?,
            }),
            "hist" => Ok(Self::Histogram {
                delta: param(code, rest, "delta")?,
            }),
            "const" => Ok(Self::Constant),
            _ => match code.strip_prefix("db").and_then(|m| m.parse().ok()) {
                Some(moments) => Ok(Self::Daubechies {
                    moments,
                    max_level: param(code, rest, "J")?,
                }),
                None => Err(Error::Config(format!("unknown dictionary system `{code}`"))),
            },
        }
    }
}

impl FromStr for DictionarySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let systems = s
            .split(',')
            .filter(|part| !part.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        if systems.is_empty() {
            return Err(Error::Config("empty dictionary specification".into()));
        }
        Ok(Self { systems })
    }
}

impl fmt::Display for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Haar { max_level } => write!(f, "haar:J={max_level}"),
            Self::Daubechies { moments, max_level } => write!(f, "db{moments}:J={max_level}"),
            Self::Fourier { n_atoms } => write!(f, "fourier:m={n_atoms}"),
            Self::Histogram { delta } => write!(f, "hist:delta={delta}"),
            Self::Constant => write!(f, "const"),
        }
    }
}

impl fmt::Display for DictionarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.systems.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_example() {
        let spec: DictionarySpec = "haar:J=10,fourier:m=1023,db4:J=10,hist:delta=0.0078125"
            .parse()
            .unwrap();
        assert_eq!(
            spec.systems,
            vec![
                SystemSpec::Haar { max_level: 10 },
                SystemSpec::Fourier { n_atoms: 1023 },
                SystemSpec::Daubechies {
                    moments: 4,
                    max_level: 10
                },
                SystemSpec::Histogram { delta: 0.0078125 },
            ]
        );
        assert_eq!(
            spec.to_string(),
            "haar:J=10,fourier:m=1023,db4:J=10,hist:delta=0.0078125"
        );
    }

    #[test]
    fn rejects_malformed_systems() {
        for bad in ["", "wav:J=3", "haar", "haar:K=3", "haar:J=x", "dbx:J=2"] {
            assert!(bad.parse::<DictionarySpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn builds_three_systems() {
        let grid = DesignGrid::midpoints(1024).unwrap();
        let spec: DictionarySpec = "db4:J=10,fourier:m=1023,const,haar:J=10".parse().unwrap();
        assert_eq!(spec.build(&grid).unwrap().len(), 3 * 1024);
    }
}
