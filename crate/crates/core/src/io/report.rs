//! `key = value` reports with stable key names.

use std::fmt::{self, Display};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Display) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// Reads back text produced by `Display`; blank and `#` lines are skipped.
    pub fn parse(text: &str) -> Report {
        let entries = text
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .filter_map(|l| l.split_once(" = "))
            .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
            .collect();
        Report { entries }
    }
}

impl Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let mut r = Report::new();
        r.push("fr_hz", 1.0e9 / 3.0).push("mode", "SH0").push("converged", true);
        let text = r.to_string();
        assert_eq!(Report::parse(&text), r);
        let fr: f64 = Report::parse(&text).get("fr_hz").unwrap().parse().unwrap();
        assert_eq!(fr, 1.0e9 / 3.0);
    }
}
