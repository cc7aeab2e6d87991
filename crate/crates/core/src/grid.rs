use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// Frequency sweep description. Default point count is 2001.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub start: f64,
    pub stop: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

fn default_points() -> usize {
    FrequencyGrid::DEFAULT_POINTS
}

impl FrequencyGrid {
    pub const DEFAULT_POINTS: usize = 2001;

    pub fn linear(start: f64, stop: f64, points: usize) -> Result<Self> {
        let g = FrequencyGrid {
            start,
            stop,
            points,
            spacing: Spacing::Linear,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn log(start: f64, stop: f64, points: usize) -> Result<Self> {
        let g = FrequencyGrid {
            start,
            stop,
            points,
            spacing: Spacing::Log,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start > 0.0 && self.start < self.stop && self.stop.is_finite()) {
            return Err(Error::Invalid(format!(
                "grid needs 0 < start < stop (got {} .. {})",
                self.start, self.stop
            )));
        }
        if self.points < 2 {
            return Err(Error::Invalid(format!(
                "grid needs at least 2 points (got {})",
                self.points
            )));
        }
        Ok(())
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.points;
        let last = (n - 1) as f64;
        let mut out: Vec<f64> = match self.spacing {
            Spacing::Linear => (0..n)
                .map(|i| self.start + (self.stop - self.start) * (i as f64 / last))
                .collect(),
            Spacing::Log => {
                let ratio = (self.stop / self.start).ln();
                (0..n).map(|i| self.start * (ratio * i as f64 / last).exp()).collect()
            }
        };
        out[0] = self.start;
        out[n - 1] = self.stop;
        out
    }
}

/// Parses `START,STOP,POINTS[,lin|log]` with frequencies in Hz.
impl FromStr for FrequencyGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(Error::Usage(format!("grid '{s}' must be START,STOP,POINTS[,lin|log]")));
        }
        let num = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| Error::Usage(format!("grid value '{t}' is not a number")))
        };
        let points = parts[2]
            .parse::<usize>()
            .map_err(|_| Error::Usage(format!("grid point count '{}' is not an integer", parts[2])))?;
        let spacing = match parts.get(3).copied() {
            None | Some("lin") | Some("linear") => Spacing::Linear,
            Some("log") => Spacing::Log,
            Some(other) => return Err(Error::Usage(format!("unknown grid spacing '{other}'"))),
        };
        let g = FrequencyGrid {
            start: num(parts[0])?,
            stop: num(parts[1])?,
            points,
            spacing,
        };
        g.validate()?;
        Ok(g)
    }
}

impl fmt::Display for FrequencyGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sp = match self.spacing {
            Spacing::Linear => "lin",
            Spacing::Log => "log",
        };
        write!(f, "{},{},{},{}", self.start, self.stop, self.points, sp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_are_exact() {
        for g in [
            FrequencyGrid::linear(1.3e9, 1.7e9, 2001).unwrap(),
            FrequencyGrid::log(1e6, 6e9, 333).unwrap(),
        ] {
            let f = g.frequencies();
            assert_eq!(f.len(), g.points);
            assert_eq!(f[0], g.start);
            assert_eq!(*f.last().unwrap(), g.stop);
            assert!(f.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn parses_cli_form() {
        let g: FrequencyGrid = "1e9,2e9,11,log".parse().unwrap();
        assert_eq!(g.spacing, Spacing::Log);
        assert_eq!(g.points, 11);
        assert!("2e9,1e9,11".parse::<FrequencyGrid>().is_err());
        assert!("1e9,2e9,1".parse::<FrequencyGrid>().is_err());
        assert!("1e9,2e9".parse::<FrequencyGrid>().is_err());
    }
}
