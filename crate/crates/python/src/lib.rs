//! Python bindings.

use acfilter::dispersion::{AcousticMode, DispersionTable, PlatformConstants};
use acfilter::extraction::{self, DelayLineDataset, FitOptions};
use acfilter::io::files::{parse_toml, to_toml, TopologyDocument};
use acfilter::network::{self, LadderTopology, SParameterSet};
use acfilter::resonator::{self, BranchKind, MotionalBranch, QualityFactor, ResonatorModel};
use acfilter::synth::{self, DesignSpec, SynthOptions};
use acfilter::Error;
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    PyValueError::new_err(format!("{}: {e}", e.category().as_str()))
}

fn one_port(freqs: Vec<f64>, s11: Vec<Complex64>) -> PyResult<SParameterSet> {
    SParameterSet::new(freqs, 1, s11, 50.0).map_err(py_err)
}

/// mBVD resonator model.
#[pyclass(name = "Resonator", frozen, from_py_object)]
#[derive(Clone)]
struct PyResonator {
    inner: ResonatorModel,
}

#[pymethods]
impl PyResonator {
    #[new]
    #[pyo3(signature = (c0, lm, cm, rm, r0 = 0.0, rs = 0.0))]
    fn new(c0: f64, lm: f64, cm: f64, rm: f64, r0: f64, rs: f64) -> PyResult<Self> {
        let main = MotionalBranch::new(rm, lm, cm, BranchKind::Main).map_err(py_err)?;
        let inner = ResonatorModel::new(c0, r0, rs, main, Vec::new()).map_err(py_err)?;
        Ok(PyResonator { inner })
    }

    #[getter]
    fn c0(&self) -> f64 {
        self.inner.c0()
    }

    #[getter]
    fn r0(&self) -> f64 {
        self.inner.r0()
    }

    #[getter]
    fn rs(&self) -> f64 {
        self.inner.rs()
    }

    #[getter]
    fn lm(&self) -> f64 {
        self.inner.main().lm()
    }

    #[getter]
    fn cm(&self) -> f64 {
        self.inner.main().cm()
    }

    #[getter]
    fn rm(&self) -> f64 {
        self.inner.main().rm()
    }

    #[getter]
    fn spur_count(&self) -> usize {
        self.inner.spurs().len()
    }

    fn admittance(&self, f: f64) -> PyResult<Complex64> {
        self.inner.admittance(f).map_err(py_err)
    }

    fn impedance(&self, f: f64) -> PyResult<Complex64> {
        self.inner.impedance(f).map_err(py_err)
    }

    /// `(fr, fa)` in Hz.
    fn resonance_frequencies(&self) -> (f64, f64) {
        let r = self.inner.resonance_frequencies();
        (r.fr, r.fa)
    }

    /// Motional Q, or `None` for a lossless branch.
    fn quality_factor(&self) -> Option<f64> {
        match self.inner.quality_factor() {
            QualityFactor::Finite(q) => Some(q),
            QualityFactor::Unbounded => None,
        }
    }

    fn coupling(&self) -> f64 {
        self.inner.coupling()
    }

    /// Reflection coefficient over `freqs` against `z0`.
    #[pyo3(signature = (freqs, z0 = 50.0))]
    fn sweep(&self, freqs: Vec<f64>, z0: f64) -> PyResult<Vec<Complex64>> {
        Ok(network::one_port_sweep(&self.inner, &freqs, z0).map_err(py_err)?.s11())
    }

    fn __repr__(&self) -> String {
        let r = self.inner.resonance_frequencies();
        format!("Resonator(fr={:.6e}, fa={:.6e}, c0={:e})", r.fr, r.fa, self.inner.c0())
    }
}

/// Dispersion table for one acoustic mode.
#[pyclass(name = "DispersionTable", frozen)]
struct PyTable {
    inner: DispersionTable,
    consts: PlatformConstants,
}

#[pymethods]
impl PyTable {
    /// Built-in table for `"SH0"` or `"S0"`.
    #[staticmethod]
    #[pyo3(signature = (mode, film_thickness = 450e-9))]
    fn builtin(mode: &str, film_thickness: f64) -> PyResult<Self> {
        let mode: AcousticMode = mode.parse().map_err(py_err)?;
        let consts = PlatformConstants {
            film_thickness,
            ..PlatformConstants::default()
        };
        consts.validate().map_err(py_err)?;
        Ok(PyTable {
            inner: DispersionTable::builtin(mode),
            consts,
        })
    }

    #[getter]
    fn mode(&self) -> String {
        self.inner.mode().to_string()
    }

    fn frequency_for(&self, wavelength: f64) -> PyResult<f64> {
        self.inner.frequency_for(&self.consts, wavelength).map_err(py_err)
    }

    fn coupling_for(&self, wavelength: f64) -> PyResult<f64> {
        self.inner.coupling_for(&self.consts, wavelength).map_err(py_err)
    }

    fn wavelength_for_frequency(&self, f: f64) -> PyResult<f64> {
        self.inner.wavelength_for_frequency(&self.consts, f).map_err(py_err)
    }

    /// Resonator for an IDT geometry, without spurious branches.
    fn derive_resonator(
        &self,
        wavelength: f64,
        pairs_n: u32,
        aperture_w: f64,
        eps_eff: f64,
        q_assumed: f64,
    ) -> PyResult<PyResonator> {
        let geom = synth::GeometrySpec {
            lambda: wavelength,
            pairs_n,
            aperture_w,
            eps_eff,
            q_assumed,
        };
        let inner = synth::derive_resonator(&self.inner, &self.consts, &geom, &Default::default()).map_err(py_err)?;
        Ok(PyResonator { inner })
    }
}

/// Ladder filter topology.
#[pyclass(name = "Ladder", frozen)]
struct PyLadder {
    inner: LadderTopology,
}

#[pymethods]
impl PyLadder {
    /// Builds an alternating series/shunt ladder starting with a series stage.
    #[new]
    #[pyo3(signature = (resonators, z0 = 50.0))]
    fn new(resonators: Vec<PyResonator>, z0: f64) -> PyResult<Self> {
        let stages = resonators
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                if i % 2 == 0 {
                    network::LadderStage::series(r.inner)
                } else {
                    network::LadderStage::shunt(r.inner)
                }
            })
            .collect();
        Ok(PyLadder {
            inner: LadderTopology::new(stages, z0).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let doc: TopologyDocument = parse_toml(text).map_err(py_err)?;
        Ok(PyLadder { inner: doc.topology })
    }

    fn to_toml(&self) -> PyResult<String> {
        to_toml(&TopologyDocument::from(self.inner.clone())).map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.inner.stages().len()
    }

    /// `S21` over `freqs`.
    fn s21(&self, freqs: Vec<f64>) -> PyResult<Vec<Complex64>> {
        self.inner.cascade_sweep(&freqs).and_then(|s| s.s21()).map_err(py_err)
    }

    /// Passband metrics as a dict with `fc`, `il_db`, `bw3db`, `fbw`.
    #[pyo3(signature = (freqs, band = None))]
    fn metrics<'py>(&self, py: Python<'py>, freqs: Vec<f64>, band: Option<(f64, f64)>) -> PyResult<Bound<'py, PyDict>> {
        let set = self.inner.cascade_sweep(&freqs).map_err(py_err)?;
        metrics_dict(py, network::filter_metrics(&set, band).map_err(py_err)?)
    }
}

fn metrics_dict<'py>(py: Python<'py>, m: network::FilterMetrics) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("fc", m.fc)?;
    d.set_item("il_db", m.il_db)?;
    d.set_item("bw3db", m.bw3db)?;
    d.set_item("fbw", m.fbw)?;
    Ok(d)
}

#[pyfunction]
fn coupling_from_frequencies(fr: f64, fa: f64) -> PyResult<f64> {
    resonator::coupling_from_frequencies(fr, fa).map_err(py_err)
}

#[pyfunction]
fn figure_of_merit(k2: f64, qmax: f64) -> f64 {
    extraction::figure_of_merit(k2, qmax)
}

/// `(qmax, f_at_qmax)` from a one-port reflection sweep.
#[pyfunction]
fn bode_q(freqs: Vec<f64>, s11: Vec<Complex64>) -> PyResult<(f64, f64)> {
    let curve = extraction::bode_q(&one_port(freqs, s11)?).map_err(py_err)?;
    Ok((curve.qmax, curve.f_at_qmax))
}

/// `(fr, fa)` from an admittance sweep.
#[pyfunction]
fn extract_fr_fa(freqs: Vec<f64>, y: Vec<Complex64>) -> PyResult<(f64, f64)> {
    if freqs.len() != y.len() {
        return Err(PyValueError::new_err("invalid: freqs and y differ in length"));
    }
    let r = extraction::extract_fr_fa(&freqs, &y).map_err(py_err)?;
    Ok((r.fr, r.fa))
}

/// Fits an mBVD model to a one-port reflection sweep.
#[pyfunction]
#[pyo3(signature = (freqs, s11, max_iterations = 500))]
fn fit_mbvd<'py>(
    py: Python<'py>,
    freqs: Vec<f64>,
    s11: Vec<Complex64>,
    max_iterations: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = FitOptions {
        max_iterations,
        ..FitOptions::default()
    };
    let fit = extraction::fit_mbvd(&one_port(freqs, s11)?, &opts).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("model", PyResonator { inner: fit.model })?;
    d.set_item("residual", fit.residual)?;
    d.set_item("iterations", fit.iterations)?;
    d.set_item("converged", fit.converged)?;
    Ok(d)
}

/// `(delta, a0)` from delay-line gaps (wavelengths) and `|S21|`.
#[pyfunction]
fn fit_delay_line_loss(gaps: Vec<f64>, mags: Vec<f64>) -> PyResult<(f64, f64)> {
    if gaps.len() != mags.len() {
        return Err(PyValueError::new_err("invalid: gaps and mags differ in length"));
    }
    let data = DelayLineDataset::new(gaps.into_iter().zip(mags).collect(), None).map_err(py_err)?;
    let fit = extraction::fit_delay_line_loss(&data).map_err(py_err)?;
    Ok((fit.delta, fit.a0))
}

fn spec_dict<'py>(py: Python<'py>, s: &DesignSpec) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("name", &s.name)?;
    d.set_item("fc_target", s.fc_target)?;
    d.set_item("fbw_target", s.fbw_target)?;
    d.set_item("il_max_db", s.il_max_db)?;
    d.set_item("stage_count", s.stage_count)?;
    d.set_item("q_assumed", s.q_assumed)?;
    d.set_item("bw3db", s.bw3db)?;
    d.set_item("placeholder", s.source == synth::SpecSource::Placeholder)?;
    Ok(d)
}

#[pyfunction]
fn band_presets<'py>(py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    synth::band_presets().iter().map(|s| spec_dict(py, s)).collect()
}

/// Optimizes a ladder for the target band on the built-in table suited to `fc`.
#[pyfunction]
#[pyo3(signature = (fc, fbw, stage_count = 4, q_assumed = 1500.0, il_max_db = 3.0, seed = 0x5eed))]
fn synthesize<'py>(
    py: Python<'py>,
    fc: f64,
    fbw: f64,
    stage_count: usize,
    q_assumed: f64,
    il_max_db: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = DesignSpec {
        il_max_db,
        ..DesignSpec::new(fc, fbw, stage_count, q_assumed)
    };
    let opts = SynthOptions {
        seed,
        ..SynthOptions::default()
    };
    let r = synth::synthesize_auto(&spec, &PlatformConstants::default(), &opts).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("mode", r.mode.to_string())?;
    d.set_item("metrics", metrics_dict(py, r.metrics)?)?;
    d.set_item("converged", r.converged)?;
    d.set_item("cost", r.cost)?;
    d.set_item("ladder", PyLadder { inner: r.topology })?;
    Ok(d)
}

#[pymodule]
fn acfilter_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyResonator>()?;
    m.add_class::<PyTable>()?;
    m.add_class::<PyLadder>()?;
    m.add_function(wrap_pyfunction!(coupling_from_frequencies, m)?)?;
    m.add_function(wrap_pyfunction!(figure_of_merit, m)?)?;
    m.add_function(wrap_pyfunction!(bode_q, m)?)?;
    m.add_function(wrap_pyfunction!(extract_fr_fa, m)?)?;
    m.add_function(wrap_pyfunction!(fit_mbvd, m)?)?;
    m.add_function(wrap_pyfunction!(fit_delay_line_loss, m)?)?;
    m.add_function(wrap_pyfunction!(band_presets, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    Ok(())
}
