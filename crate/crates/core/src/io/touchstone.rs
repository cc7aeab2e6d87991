//! Touchstone v1 (`.s1p`, `.s2p`).

use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::network::SParameterSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TouchstoneFormat {
    #[default]
    Ri,
    Ma,
    Db,
}

impl FromStr for TouchstoneFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "RI" => Ok(TouchstoneFormat::Ri),
            "MA" => Ok(TouchstoneFormat::Ma),
            "DB" => Ok(TouchstoneFormat::Db),
            _ => Err(Error::Usage(format!(
                "unknown Touchstone format '{s}' (expected RI, MA or DB)"
            ))),
        }
    }
}

impl TouchstoneFormat {
    fn as_str(self) -> &'static str {
        match self {
            TouchstoneFormat::Ri => "RI",
            TouchstoneFormat::Ma => "MA",
            TouchstoneFormat::Db => "DB",
        }
    }

    fn decode(self, a: f64, b: f64) -> Complex64 {
        match self {
            TouchstoneFormat::Ri => Complex64::new(a, b),
            TouchstoneFormat::Ma => Complex64::from_polar(a, b.to_radians()),
            TouchstoneFormat::Db => Complex64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
        }
    }

    fn encode(self, z: Complex64) -> (f64, f64) {
        match self {
            TouchstoneFormat::Ri => (z.re, z.im),
            TouchstoneFormat::Ma => (z.norm(), z.arg().to_degrees()),
            TouchstoneFormat::Db => (20.0 * z.norm().log10(), z.arg().to_degrees()),
        }
    }
}

struct OptionLine {
    scale: f64,
    format: TouchstoneFormat,
    z0: f64,
}

fn parse_option_line(line: &str, lineno: usize) -> Result<OptionLine> {
    let mut opt = OptionLine {
        scale: 1e9,
        format: TouchstoneFormat::Ma,
        z0: 50.0,
    };
    let mut tokens = line.trim_start_matches('#').split_whitespace();
    while let Some(tok) = tokens.next() {
        match tok.to_ascii_uppercase().as_str() {
            "HZ" => opt.scale = 1.0,
            "KHZ" => opt.scale = 1e3,
            "MHZ" => opt.scale = 1e6,
            "GHZ" => opt.scale = 1e9,
            "S" => {}
            "Y" | "Z" | "H" | "G" => {
                return Err(Error::parse(
                    lineno,
                    format!("parameter type {tok} is not supported, only S"),
                ));
            }
            "RI" => opt.format = TouchstoneFormat::Ri,
            "MA" => opt.format = TouchstoneFormat::Ma,
            "DB" => opt.format = TouchstoneFormat::Db,
            "R" => {
                let v = tokens
                    .next()
                    .ok_or_else(|| Error::parse(lineno, "R without a reference resistance"))?;
                opt.z0 = v
                    .parse::<f64>()
                    .ok()
                    .filter(|z| *z > 0.0 && z.is_finite())
                    .ok_or_else(|| Error::parse(lineno, format!("bad reference resistance '{v}'")))?;
            }
            _ => return Err(Error::parse(lineno, format!("unrecognized option '{tok}'"))),
        }
    }
    Ok(opt)
}

/// Parses a Touchstone v1 document. The port count follows from the row
/// arity: 3 columns for one port, 9 for two (`S11 S21 S12 S22`).
pub fn read_touchstone(bytes: &[u8]) -> Result<SParameterSet> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::parse(0, format!("not UTF-8: {e}")))?;
    let mut option: Option<OptionLine> = None;
    let mut ports = None;
    let mut grid = Vec::new();
    let mut data = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('!').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            // only the first option line counts
            if option.is_none() {
                option = Some(parse_option_line(line, lineno)?);
            }
            continue;
        }
        let opt = option.get_or_insert(OptionLine {
            scale: 1e9,
            format: TouchstoneFormat::Ma,
            z0: 50.0,
        });
        let values = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(lineno, format!("bad number '{t}'")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let n = match (ports, values.len()) {
            (None, 3) | (Some(1), 3) => 1,
            (None, 9) | (Some(2), 9) => 2,
            (Some(p), k) => {
                let expect = 1 + 2 * p * p;
                return Err(Error::parse(lineno, format!("expected {expect} columns, found {k}")));
            }
            (None, k) => return Err(Error::parse(lineno, format!("expected 3 or 9 columns, found {k}"))),
        };
        ports = Some(n);
        let f = values[0] * opt.scale;
        if !(f > 0.0) {
            return Err(Error::parse(lineno, format!("frequency must be positive (got {f})")));
        }
        if grid.last().is_some_and(|&prev| f <= prev) {
            return Err(Error::parse(lineno, "frequencies must be strictly increasing"));
        }
        grid.push(f);
        let s: Vec<Complex64> = values[1..].chunks(2).map(|p| opt.format.decode(p[0], p[1])).collect();
        if n == 1 {
            data.push(s[0]);
        } else {
            // file order S11 S21 S12 S22, storage row-major
            data.extend([s[0], s[2], s[1], s[3]]);
        }
    }
    let ports = ports.ok_or_else(|| Error::parse(0, "no data rows"))?;
    let z0 = option.map_or(50.0, |o| o.z0);
    SParameterSet::new(grid, ports, data, z0).map_err(|e| Error::parse(0, e.to_string()))
}

fn push_num(out: &mut String, v: f64) {
    // 17 significant digits; normalize -0 so output is byte-stable
    let v = if v == 0.0 { 0.0 } else { v };
    write!(out, " {v:.16e}").unwrap();
}

/// Renders `set` with frequencies in Hz.
pub fn write_touchstone(set: &SParameterSet, format: TouchstoneFormat) -> String {
    let mut out = String::new();
    writeln!(out, "! {}-port S-parameters", set.ports()).unwrap();
    writeln!(out, "# Hz S {} R {}", format.as_str(), set.reference_impedance()).unwrap();
    for (i, &f) in set.grid().iter().enumerate() {
        let mut line = String::new();
        write!(line, "{f:.16e}").unwrap();
        let m = set.matrix(i);
        let order: &[usize] = if set.ports() == 1 { &[0] } else { &[0, 2, 1, 3] };
        for &k in order {
            let (a, b) = format.encode(m[k]);
            push_num(&mut line, a);
            push_num(&mut line, b);
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}
