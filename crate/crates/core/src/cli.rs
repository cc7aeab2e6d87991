//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dispersion::select_mode;
use crate::dispersion::{classify_regime, AcousticMode, DispersionTable, PlatformConstants};
use crate::error::{Error, Result};
use crate::extraction::{
    bode_q_with, extract_fr_fa, figure_of_merit, fit_delay_line_loss, fit_mbvd, BodeQOptions, FitOptions,
};
use crate::grid::FrequencyGrid;
use crate::io::csv::{parse_delay_line_csv, parse_dispersion_csv};
use crate::io::files::{load_toml, save_toml, RunConfig, TopologyDocument};
use crate::io::touchstone::{read_touchstone, write_touchstone, TouchstoneFormat};
use crate::io::{write_atomic, Report};
use crate::network::{filter_metrics, one_port_sweep, LadderTopology, SParameterSet};
use crate::resonator::{QualityFactor, ResonatorModel};
use crate::synth::{
    band_presets, derive_resonator, ladder_synthesize, DesignSpec, GeometrySpec, SpurEnvironment, SynthOptions,
};

#[derive(Debug, Parser)]
#[command(name = "acfilter", version, about = "Acoustic resonator and ladder filter toolkit")]
struct Cli {
    /// Run configuration supplying default tables, constants, spurs, grid and output directory.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Frequency sweep: START,STOP,POINTS[,lin|log] in Hz.
    #[arg(long, value_name = "SPEC")]
    grid: Option<FrequencyGrid>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Platform constants file (TOML).
    #[arg(long, value_name = "FILE")]
    constants: Option<PathBuf>,
    /// Touchstone number format for written files.
    #[arg(long, default_value = "RI")]
    format: TouchstoneFormat,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Frequency, phase velocity, coupling and regime for a wavelength.
    Dispersion {
        /// Built-in table (SH0, S0) or a dispersion CSV.
        #[arg(long)]
        table: String,
        /// Wavelength in meters.
        #[arg(long)]
        lambda: f64,
        #[arg(long, value_name = "FILE")]
        constants: Option<PathBuf>,
    },
    /// One-port response of a resonator built from geometry.
    Resonator {
        #[arg(long)]
        table: String,
        #[arg(long, value_name = "FILE")]
        geom: PathBuf,
        #[arg(long, value_name = "FILE")]
        spurs: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Two-port response and metrics of a ladder topology.
    Filter {
        #[arg(long, value_name = "FILE")]
        topology: PathBuf,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        band: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Optimize a ladder filter against a design spec.
    Synth {
        #[arg(
            long,
            value_name = "FILE",
            conflicts_with = "preset",
            required_unless_present = "preset"
        )]
        spec: Option<PathBuf>,
        /// Built-in band preset name (F1..F8).
        #[arg(long)]
        preset: Option<String>,
        /// Built-in table (SH0, S0) or a dispersion CSV; chosen from fc when omitted.
        #[arg(long)]
        table: Option<String>,
        #[arg(long, value_name = "FILE")]
        spurs: Option<PathBuf>,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Write the built-in band presets as spec files.
    Presets {
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Bode-Q curve of a one-port file or metrics of a two-port file.
    Analyze {
        #[arg(long = "snp", alias = "sNp", value_name = "FILE")]
        snp: PathBuf,
        #[arg(long, conflicts_with = "two_port")]
        one_port: bool,
        #[arg(long)]
        two_port: bool,
        /// Restrict the analysis to this band (Hz).
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        band: Option<Vec<f64>>,
        /// Moving-average window (points) for the group delay.
        #[arg(long)]
        smooth: Option<usize>,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Fit an mBVD model to a one-port file.
    Fit {
        #[arg(long = "snp", alias = "sNp", value_name = "FILE")]
        snp: PathBuf,
        #[arg(long, default_value_t = 500)]
        max_iterations: usize,
    },
    /// Propagation loss from delay-line transmissions.
    Fitloss {
        #[arg(long, value_name = "FILE")]
        csv: PathBuf,
    },
}

/// Parses `args` (including the program name) and runs the command,
/// writing reports to `stdout`. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{}", e.render());
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            let _ = writeln!(stderr, "{}", format_error(&Error::Usage(first.to_string())));
            return 2;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{}", format_error(&e));
            if matches!(e, Error::Usage(_)) {
                2
            } else {
                1
            }
        }
    }
}

/// Single-line `category: detail` rendering.
pub fn format_error(e: &Error) -> String {
    let detail = e.to_string().replace('\n', " ");
    format!("{}: {detail}", e.category().as_str())
}

struct Context {
    config: RunConfig,
}

impl Context {
    fn constants(&self, path: Option<&Path>) -> Result<PlatformConstants> {
        let c = match path {
            Some(p) => load_toml(p)?,
            None => self.config.constants.unwrap_or_default(),
        };
        c.validate()?;
        Ok(c)
    }

    fn table(&self, name: &str, consts: &PlatformConstants) -> Result<DispersionTable> {
        let table = match name.parse::<AcousticMode>() {
            Ok(mode) => DispersionTable::builtin(mode),
            Err(_) => {
                let path = Path::new(name);
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                parse_dispersion_csv(&text, None)?
            }
        };
        table.check_against(consts)?;
        Ok(table)
    }

    /// Table for `mode` from the config's table list, falling back to the built-in one.
    fn table_for_mode(&self, mode: AcousticMode, consts: &PlatformConstants) -> Result<DispersionTable> {
        for path in &self.config.dispersion_tables {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let table = parse_dispersion_csv(&text, None)?;
            if table.mode() == mode {
                table.check_against(consts)?;
                return Ok(table);
            }
        }
        self.table(&mode.to_string(), consts)
    }

    fn spurs(&self, path: Option<&Path>) -> Result<SpurEnvironment> {
        let s = match path {
            Some(p) => load_toml(p)?,
            None => self.config.spurs.clone().unwrap_or_default(),
        };
        s.validate()?;
        Ok(s)
    }

    fn out_dir(&self, out: Option<PathBuf>) -> PathBuf {
        out.or_else(|| self.config.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("."))
    }

    fn grid(&self, grid: Option<FrequencyGrid>, fallback: impl FnOnce() -> Result<FrequencyGrid>) -> Result<Vec<f64>> {
        let g = match grid.or(self.config.grid) {
            Some(g) => g,
            None => fallback()?,
        };
        g.validate()?;
        Ok(g.frequencies())
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let ctx = Context { config };
    let report = match cli.command {
        Command::Dispersion {
            table,
            lambda,
            constants,
        } => cmd_dispersion(&ctx, &table, lambda, constants.as_deref())?,
        Command::Resonator {
            table,
            geom,
            spurs,
            common,
        } => cmd_resonator(&ctx, &table, &geom, spurs.as_deref(), common)?,
        Command::Filter { topology, band, common } => cmd_filter(&ctx, &topology, band, common)?,
        Command::Synth {
            spec,
            preset,
            table,
            spurs,
            seed,
            common,
        } => cmd_synth(
            &ctx,
            spec.as_deref(),
            preset.as_deref(),
            table.as_deref(),
            spurs.as_deref(),
            seed,
            common,
        )?,
        Command::Presets { out } => cmd_presets(&ctx, out)?,
        Command::Analyze {
            snp,
            one_port,
            two_port,
            band,
            smooth,
            out,
        } => cmd_analyze(&ctx, &snp, one_port, two_port, band, smooth, out)?,
        Command::Fit { snp, max_iterations } => cmd_fit(&snp, max_iterations)?,
        Command::Fitloss { csv } => cmd_fitloss(&csv)?,
    };
    write!(stdout, "{report}").map_err(|e| Error::io("<stdout>", e))
}

fn band_of(band: Option<Vec<f64>>) -> Result<Option<(f64, f64)>> {
    match band.as_deref() {
        None => Ok(None),
        Some(&[lo, hi]) if lo > 0.0 && lo < hi => Ok(Some((lo, hi))),
        Some(b) => Err(Error::Usage(format!("--band needs 0 < LO < HI (got {b:?})"))),
    }
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map_or_else(String::new, |s| s.to_string_lossy().into_owned())
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "out".to_string(), |s| s.to_string_lossy().into_owned())
}

fn cmd_dispersion(ctx: &Context, table: &str, lambda: f64, constants: Option<&Path>) -> Result<Report> {
    let consts = ctx.constants(constants)?;
    let table = ctx.table(table, &consts)?;
    let f = table.frequency_for(&consts, lambda)?;
    let (vp, k2) = table.interpolate(consts.h_over_lambda(lambda))?;
    let mut r = Report::new();
    r.push("mode", table.mode())
        .push("lambda_m", lambda)
        .push("h_over_lambda", consts.h_over_lambda(lambda))
        .push("frequency_hz", f)
        .push("vp_mps", vp)
        .push("k2", k2)
        .push("regime", classify_regime(&consts, lambda));
    Ok(r)
}

fn resonator_report(r: &mut Report, model: &ResonatorModel) {
    let res = model.resonance_frequencies();
    r.push("fr_hz", res.fr)
        .push("fa_hz", res.fa)
        .push("k2", model.coupling());
    match model.quality_factor() {
        QualityFactor::Finite(q) => r.push("q_analytic", q),
        QualityFactor::Unbounded => r.push("q_analytic", "inf"),
    };
}

fn default_resonator_grid(model: &ResonatorModel) -> Result<FrequencyGrid> {
    let res = model.resonance_frequencies();
    FrequencyGrid::linear(res.fr * 0.95, res.fa * 1.05, FrequencyGrid::DEFAULT_POINTS)
}

fn cmd_resonator(ctx: &Context, table: &str, geom: &Path, spurs: Option<&Path>, common: Common) -> Result<Report> {
    let consts = ctx.constants(common.constants.as_deref())?;
    let table = ctx.table(table, &consts)?;
    let geometry: GeometrySpec = load_toml(geom)?;
    let model = derive_resonator(&table, &consts, &geometry, &ctx.spurs(spurs)?)?;
    let grid = ctx.grid(common.grid, || default_resonator_grid(&model))?;
    let set = one_port_sweep(&model, &grid, 50.0)?;
    let out = ctx.out_dir(common.out);
    let name = stem(geom);
    let s1p = out.join(format!("{name}.s1p"));
    write_atomic(&s1p, write_touchstone(&set, common.format).as_bytes())?;
    let mut r = Report::new();
    r.push("mode", table.mode());
    resonator_report(&mut r, &model);
    r.push("c0_f", model.c0())
        .push("lm_h", model.main().lm())
        .push("cm_f", model.main().cm())
        .push("rm_ohm", model.main().rm())
        .push("spur_branches", model.spurs().len())
        .push("s1p", file_name(&s1p));
    write_atomic(&out.join(format!("{name}.report.txt")), r.to_string().as_bytes())?;
    Ok(r)
}

fn default_filter_grid(top: &LadderTopology) -> Result<FrequencyGrid> {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for stage in top.stages() {
        let res = stage.resonator.resonance_frequencies();
        lo = lo.min(res.fr);
        hi = hi.max(res.fa);
    }
    let pad = 0.5 * (hi - lo);
    FrequencyGrid::linear(lo - pad, hi + pad, FrequencyGrid::DEFAULT_POINTS)
}

fn metrics_report(r: &mut Report, set: &SParameterSet, hint: Option<(f64, f64)>) -> Result<()> {
    let m = filter_metrics(set, hint)?;
    r.push("fc_hz", m.fc)
        .push("il_db", m.il_db)
        .push("bw3db_hz", m.bw3db)
        .push("fbw", m.fbw);
    let worst = (0..set.len())
        .map(|i| set.passivity_margin(i))
        .fold(f64::INFINITY, f64::min);
    r.push("passivity_margin", worst);
    Ok(())
}

fn cmd_filter(ctx: &Context, topology: &Path, band: Option<Vec<f64>>, common: Common) -> Result<Report> {
    let doc: TopologyDocument = load_toml(topology)?;
    let grid = ctx.grid(common.grid, || default_filter_grid(&doc.topology))?;
    let set = doc.topology.cascade_sweep(&grid)?;
    let out = ctx.out_dir(common.out);
    let name = stem(topology);
    let s2p = out.join(format!("{name}.s2p"));
    write_atomic(&s2p, write_touchstone(&set, common.format).as_bytes())?;
    let mut r = Report::new();
    r.push("stages", doc.topology.stages().len());
    metrics_report(&mut r, &set, band_of(band)?)?;
    r.push("s2p", file_name(&s2p));
    write_atomic(&out.join(format!("{name}.report.txt")), r.to_string().as_bytes())?;
    Ok(r)
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth(
    ctx: &Context,
    spec: Option<&Path>,
    preset: Option<&str>,
    table: Option<&str>,
    spurs: Option<&Path>,
    seed: u64,
    common: Common,
) -> Result<Report> {
    let spec: DesignSpec = match (spec, preset) {
        (Some(p), _) => load_toml(p)?,
        (None, Some(name)) => band_presets()
            .into_iter()
            .find(|s| s.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Usage(format!("unknown preset '{name}' (expected F1..F8)")))?,
        (None, None) => return Err(Error::Usage("synth needs --spec or --preset".into())),
    };
    spec.validate()?;
    let consts = ctx.constants(common.constants.as_deref())?;
    let opts = SynthOptions {
        seed,
        spurs: ctx.spurs(spurs)?,
        ..SynthOptions::default()
    };
    let table = match table {
        Some(t) => ctx.table(t, &consts)?,
        None => ctx.table_for_mode(select_mode(spec.fc_target, opts.mode_threshold), &consts)?,
    };
    let result = ladder_synthesize(&spec, &table, &consts, &opts)?;

    let out = ctx.out_dir(common.out);
    let name = if spec.name.is_empty() {
        "synth".to_string()
    } else {
        spec.name.clone()
    };
    let topo_path = out.join(format!("{name}.topology.toml"));
    save_toml(&topo_path, &TopologyDocument::from(result.topology.clone()))?;
    let half = 1.5 * spec.fbw_target * spec.fc_target;
    let grid = ctx.grid(common.grid, || {
        FrequencyGrid::linear(
            spec.fc_target - half,
            spec.fc_target + half,
            FrequencyGrid::DEFAULT_POINTS,
        )
    })?;
    let set = result.topology.cascade_sweep(&grid)?;
    let s2p = out.join(format!("{name}.s2p"));
    write_atomic(&s2p, write_touchstone(&set, common.format).as_bytes())?;

    let m = result.metrics;
    let v = result.variables;
    let mut r = Report::new();
    r.push("mode", result.mode)
        .push("fc_target_hz", spec.fc_target)
        .push("fc_hz", m.fc)
        .push("fc_error", (m.fc - spec.fc_target) / spec.fc_target)
        .push("fbw_target", spec.fbw_target)
        .push("fbw", m.fbw)
        .push("fbw_error", (m.fbw - spec.fbw_target) / spec.fbw_target)
        .push("bw3db_hz", m.bw3db)
        .push("il_max_db", spec.il_max_db)
        .push("il_db", m.il_db)
        .push("lambda_series_m", v.lambda_series)
        .push("lambda_shunt_m", v.lambda_shunt)
        .push("c0_series_f", v.c0_series)
        .push("c0_shunt_f", v.c0_shunt)
        .push("cost", result.cost)
        .push("converged", result.converged)
        .push("evaluations", result.evaluations)
        .push("restarts", result.restarts_used)
        .push("topology", file_name(&topo_path))
        .push("s2p", file_name(&s2p));
    write_atomic(&out.join(format!("{name}.report.txt")), r.to_string().as_bytes())?;
    Ok(r)
}

fn cmd_presets(ctx: &Context, out: Option<PathBuf>) -> Result<Report> {
    let out = ctx.out_dir(out);
    let mut r = Report::new();
    for spec in band_presets() {
        let path = out.join(format!("{}.toml", spec.name));
        save_toml(&path, &spec)?;
        r.push(spec.name.clone(), file_name(&path));
    }
    Ok(r)
}

fn read_snp(path: &Path) -> Result<SParameterSet> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_touchstone(&bytes)
}

fn restrict(set: &SParameterSet, band: Option<(f64, f64)>) -> Result<SParameterSet> {
    let Some((lo, hi)) = band else {
        return Ok(set.clone());
    };
    let keep: Vec<usize> = (0..set.len())
        .filter(|&i| set.grid()[i] >= lo && set.grid()[i] <= hi)
        .collect();
    if keep.len() < 3 {
        return Err(Error::Extraction(format!("fewer than 3 points inside {lo}..{hi} Hz")));
    }
    let grid = keep.iter().map(|&i| set.grid()[i]).collect();
    let data = keep.iter().flat_map(|&i| set.matrix(i).to_vec()).collect();
    SParameterSet::new(grid, set.ports(), data, set.reference_impedance())
}

fn cmd_analyze(
    ctx: &Context,
    snp: &Path,
    one_port: bool,
    two_port: bool,
    band: Option<Vec<f64>>,
    smooth: Option<usize>,
    out: Option<PathBuf>,
) -> Result<Report> {
    let set = read_snp(snp)?;
    let band = band_of(band)?;
    let ports = if one_port {
        1
    } else if two_port {
        2
    } else {
        set.ports()
    };
    set.require_ports(ports)?;
    let mut r = Report::new();
    if ports == 2 {
        metrics_report(&mut r, &set, band)?;
        return Ok(r);
    }

    let sub = restrict(&set, band)?;
    let opts = BodeQOptions {
        smoothing_window: smooth,
        ..BodeQOptions::default()
    };
    let curve = bode_q_with(&sub, &opts)?;
    let out = ctx.out_dir(out);
    let csv_path = out.join(format!("{}.bodeq.csv", stem(snp)));
    let mut csv = String::from("frequency_hz,bode_q\n");
    for (f, q) in curve.grid.iter().zip(&curve.q) {
        match q {
            Some(q) => writeln!(csv, "{f},{q}").unwrap(),
            None => writeln!(csv, "{f},inf").unwrap(),
        }
    }
    write_atomic(&csv_path, csv.as_bytes())?;
    r.push("qmax", curve.qmax).push("f_at_qmax_hz", curve.f_at_qmax);
    if let Ok(res) = extract_fr_fa(set.grid(), &set.admittance()?) {
        r.push("fr_hz", res.fr).push("fa_hz", res.fa);
        if let Ok(k2) = res.coupling() {
            r.push("k2", k2).push("fom", figure_of_merit(k2, curve.qmax));
        }
    }
    r.push("bode_q_csv", file_name(&csv_path));
    Ok(r)
}

fn cmd_fit(snp: &Path, max_iterations: usize) -> Result<Report> {
    let set = read_snp(snp)?;
    let opts = FitOptions {
        max_iterations,
        ..FitOptions::default()
    };
    let fit = fit_mbvd(&set, &opts)?;
    let m = &fit.model;
    let mut r = Report::new();
    r.push("c0_f", m.c0())
        .push("r0_ohm", m.r0())
        .push("rs_ohm", m.rs())
        .push("rm_ohm", m.main().rm())
        .push("lm_h", m.main().lm())
        .push("cm_f", m.main().cm());
    resonator_report(&mut r, m);
    r.push("residual", fit.residual)
        .push("iterations", fit.iterations)
        .push("converged", fit.converged);
    Ok(r)
}

fn cmd_fitloss(csv: &Path) -> Result<Report> {
    let text = std::fs::read_to_string(csv).map_err(|e| Error::io(csv, e))?;
    let data = parse_delay_line_csv(&text)?;
    let fit = fit_delay_line_loss(&data)?;
    let mut r = Report::new();
    r.push("delta", fit.delta)
        .push("a0", fit.a0)
        .push("runs", data.runs.len());
    if let Some(d) = data.damping_input {
        r.push("damping_input", d);
    }
    Ok(r)
}
