//! Comma-separated tables with `#` comment lines.
//!
//! Comments are kept: in dispersion tables they carry provenance, and a
//! comment of the form `# mode = SH0` names the acoustic mode.

use crate::dispersion::{AcousticMode, DispersionSample, DispersionTable};
use crate::error::{Error, Result};
use crate::extraction::DelayLineDataset;

pub const DISPERSION_HEADER: [&str; 3] = ["h_over_lambda", "vp_mps", "k2"];
pub const DELAY_LINE_HEADER: [&str; 2] = ["gap_wavelengths", "s21_mag"];

struct Parsed {
    comments: Vec<String>,
    rows: Vec<(usize, Vec<f64>)>,
}

fn parse(text: &str, header: &[&str]) -> Result<Parsed> {
    let mut comments = Vec::new();
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            comments.push(c.trim().to_string());
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !seen_header {
            if fields != header {
                return Err(Error::parse(
                    line_no,
                    format!("expected header '{}', found '{line}'", header.join(",")),
                ));
            }
            seen_header = true;
            continue;
        }
        if fields.len() != header.len() {
            return Err(Error::parse(
                line_no,
                format!("expected {} columns, found {}", header.len(), fields.len()),
            ));
        }
        let values = fields
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::parse(line_no, format!("'{f}' is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((line_no, values));
    }
    if !seen_header {
        return Err(Error::parse(0, format!("missing header '{}'", header.join(","))));
    }
    Ok(Parsed { comments, rows })
}

fn key_value<'a>(comment: &'a str, key: &str) -> Option<&'a str> {
    let (k, v) = comment.split_once('=')?;
    (k.trim() == key).then(|| v.trim())
}

/// Parses a dispersion table. `mode` overrides any `# mode = ...` comment;
/// one of the two must be present.
pub fn parse_dispersion_csv(text: &str, mode: Option<AcousticMode>) -> Result<DispersionTable> {
    let parsed = parse(text, &DISPERSION_HEADER)?;
    let declared = parsed
        .comments
        .iter()
        .find_map(|c| key_value(c, "mode"))
        .map(str::parse::<AcousticMode>)
        .transpose()?;
    let mode = mode
        .or(declared)
        .ok_or_else(|| Error::parse(0, "acoustic mode not given; add a '# mode = SH0' or '# mode = S0' line"))?;
    let samples = parsed
        .rows
        .iter()
        .map(|(_, v)| DispersionSample {
            h_over_lambda: v[0],
            vp: v[1],
            k2: v[2],
        })
        .collect();
    let provenance = parsed
        .comments
        .iter()
        .filter(|c| key_value(c, "mode").is_none())
        .cloned()
        .collect::<Vec<_>>()
        .join("\n");
    DispersionTable::new(mode, samples, provenance)
}

pub fn write_dispersion_csv(table: &DispersionTable) -> String {
    let mut out = format!("# mode = {}\n", table.mode());
    for line in table.provenance().lines() {
        out.push_str(&format!("# {line}\n"));
    }
    out.push_str(&DISPERSION_HEADER.join(","));
    out.push('\n');
    for s in table.samples() {
        out.push_str(&format!("{},{},{}\n", s.h_over_lambda, s.vp, s.k2));
    }
    out
}

/// Parses a delay-line dataset. A `# damping = 0.002` comment sets the
/// informational damping input.
pub fn parse_delay_line_csv(text: &str) -> Result<DelayLineDataset> {
    let parsed = parse(text, &DELAY_LINE_HEADER)?;
    let damping = parsed
        .comments
        .iter()
        .find_map(|c| key_value(c, "damping"))
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| Error::parse(0, format!("damping '{v}' is not a number")))
        })
        .transpose()?;
    let runs = parsed.rows.iter().map(|(_, v)| (v[0], v[1])).collect();
    DelayLineDataset::new(runs, damping)
}

pub fn write_delay_line_csv(data: &DelayLineDataset) -> String {
    let mut out = String::new();
    if let Some(d) = data.damping_input {
        out.push_str(&format!("# damping = {d}\n"));
    }
    out.push_str(&DELAY_LINE_HEADER.join(","));
    out.push('\n');
    for (g, m) in &data.runs {
        out.push_str(&format!("{g},{m}\n"));
    }
    out
}
