//! TOML documents: topologies, design specs, geometries, spur environments
//! and run configurations. Every document carries `spec_version`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dispersion::PlatformConstants;
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::network::LadderTopology;
use crate::synth::SpurEnvironment;

pub const SPEC_VERSION: u32 = 1;

fn default_version() -> u32 {
    SPEC_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyDocument {
    #[serde(default = "default_version")]
    pub spec_version: u32,
    #[serde(flatten)]
    pub topology: LadderTopology,
}

impl From<LadderTopology> for TopologyDocument {
    fn from(topology: LadderTopology) -> Self {
        TopologyDocument {
            spec_version: SPEC_VERSION,
            topology,
        }
    }
}

/// Defaults shared by CLI subcommands. Relative paths resolve against the
/// config file's directory.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    #[serde(default = "default_version")]
    pub spec_version: u32,
    pub dispersion_tables: Vec<PathBuf>,
    pub constants: Option<PlatformConstants>,
    pub spurs: Option<SpurEnvironment>,
    pub specs: Vec<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub grid: Option<FrequencyGrid>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: RunConfig = load_toml(path)?;
        if let Some(g) = &cfg.grid {
            g.validate()?;
        }
        if let Some(c) = &cfg.constants {
            c.validate()?;
        }
        if let Some(s) = &cfg.spurs {
            s.validate()?;
        }
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.dispersion_tables.iter_mut().for_each(resolve);
        cfg.specs.iter_mut().for_each(resolve);
        if let Some(out) = cfg.output_dir.as_mut() {
            resolve(out);
        }
        Ok(cfg)
    }
}

#[derive(Deserialize)]
struct VersionProbe {
    spec_version: Option<u32>,
}

pub fn parse_toml<T: DeserializeOwned>(text: &str) -> Result<T> {
    let probe: VersionProbe = toml::from_str(text).map_err(|e| toml_error(text, e))?;
    if let Some(v) = probe.spec_version.filter(|v| *v != SPEC_VERSION) {
        return Err(Error::parse(
            0,
            format!("unsupported spec_version {v} (expected {SPEC_VERSION})"),
        ));
    }
    toml::from_str(text).map_err(|e| toml_error(text, e))
}

fn toml_error(text: &str, e: toml::de::Error) -> Error {
    let line = e
        .span()
        .map_or(0, |s| text[..s.start.min(text.len())].lines().count().max(1));
    Error::parse(line, e.message().to_string())
}

pub fn load_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_toml(&text)
}

pub fn to_toml<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string(value).map_err(|e| Error::Invalid(format!("cannot serialize: {e}")))
}

pub fn save_toml<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, to_toml(value)?.as_bytes())
}

/// Writes through a sibling temporary file so readers never see a partial
/// file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::LadderStage;
    use crate::resonator::{BranchKind, MotionalBranch, ResonatorModel};
    use crate::synth::{band_presets, DesignSpec};

    fn topology() -> LadderTopology {
        let main = MotionalBranch::new(0.25, 100e-9, 0.12e-12, BranchKind::Main).unwrap();
        let spur = MotionalBranch::new(3.0, 90e-9, 0.01e-12, BranchKind::Transverse { order: 3 }).unwrap();
        let r = ResonatorModel::new(1e-12, 0.3, 0.7, main, vec![spur]).unwrap();
        let p = ResonatorModel::bvd(1.3e-12, 107e-9, 0.15e-12, 0.31).unwrap();
        LadderTopology::new(vec![LadderStage::series(r), LadderStage::shunt(p)], 50.0).unwrap()
    }

    #[test]
    fn topology_round_trips() {
        let doc = TopologyDocument::from(topology());
        let text = to_toml(&doc).unwrap();
        assert!(text.contains("spec_version = 1"));
        let back: TopologyDocument = parse_toml(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(to_toml(&back).unwrap(), text);
    }

    #[test]
    fn spec_round_trips() {
        for spec in band_presets() {
            let text = to_toml(&spec).unwrap();
            let back: DesignSpec = parse_toml(&text).unwrap();
            assert_eq!(back, spec);
        }
    }

    #[test]
    fn rejects_other_versions_and_reports_lines() {
        let err = parse_toml::<DesignSpec>("spec_version = 2\n").unwrap_err();
        assert_eq!(err.category().as_str(), "parse");
        let err = parse_toml::<DesignSpec>("spec_version = 1\nfc_target = \"x\"\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_model_values_are_rejected() {
        let text = "[[stages]]\nplacement = \"series\"\n[stages.resonator]\nc0 = -1e-12\n\
                    [stages.resonator.main]\nrm = 1.0\nlm = 1e-7\ncm = 1e-13\nlabel = { kind = \"main\" }\n";
        assert!(parse_toml::<TopologyDocument>(text).is_err());
    }

    #[test]
    fn run_config_resolves_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(
            &path,
            "spec_version = 1\ndispersion_tables = [\"t.csv\"]\noutput_dir = \"out\"\n\
             [grid]\nstart = 1e9\nstop = 2e9\n",
        )
        .unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.dispersion_tables[0], dir.path().join("t.csv"));
        assert_eq!(cfg.output_dir.unwrap(), dir.path().join("out"));
        assert_eq!(cfg.grid.unwrap().points, 2001);
    }

    #[test]
    fn atomic_write_creates_dirs() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a/b/c.txt");
        write_atomic(&path, b"hi").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"hi");
        assert!(!dir.path().join("a/b/c.txt.tmp").exists());
    }
}
