use acfilter::dispersion::{AcousticMode, DispersionTable, PlatformConstants};
use acfilter::extraction::{bode_q, extract_fr_fa, fit_mbvd, fit_mbvd_admittance, FitOptions};
use acfilter::network::{filter_metrics, one_port_sweep};
use acfilter::resonator::{BranchKind, MotionalBranch, QualityFactor, ResonatorModel};
use acfilter::synth::{band_presets, derive_resonator, synthesize_auto, GeometrySpec, SpurEnvironment, SynthOptions};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn lossy_model() -> ResonatorModel {
    let main = MotionalBranch::new(0.5, 100e-9, 0.12e-12, BranchKind::Main).unwrap();
    ResonatorModel::new(1.0e-12, 1.2, 0.6, main, vec![]).unwrap()
}

#[test]
fn noiseless_fit_has_tiny_residual() {
    let truth = lossy_model();
    let r = truth.resonance_frequencies();
    let grid = linspace(r.fr - 2.0 * (r.fa - r.fr), r.fa + 2.0 * (r.fa - r.fr), 2001);
    let fit = fit_mbvd(&one_port_sweep(&truth, &grid, 50.0).unwrap(), &FitOptions::default()).unwrap();
    assert!(fit.converged);
    assert!(fit.residual < 1e-8, "{}", fit.residual);
}

// Noise model: each admittance sample is multiplied by (1 + n_re + j·n_im)
// with n_re, n_im independent N(0, σ²), σ = 1e-3, fixed seed.
#[test]
fn noisy_fit_recovers_resonances_and_q() {
    let truth = lossy_model();
    let r = truth.resonance_frequencies();
    let grid = linspace(r.fr - 2.0 * (r.fa - r.fr), r.fa + 2.0 * (r.fa - r.fr), 4001);
    let normal = Normal::new(0.0, 1e-3).unwrap();
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<Complex64> = grid
            .iter()
            .map(|&f| {
                truth.admittance(f).unwrap() * Complex64::new(1.0 + normal.sample(&mut rng), normal.sample(&mut rng))
            })
            .collect();
        let fit = fit_mbvd_admittance(&grid, &y, &FitOptions::default()).unwrap();
        let got = fit.model.resonance_frequencies();
        assert!((got.fr - r.fr).abs() / r.fr < 1e-4, "seed {seed}: fr {}", got.fr);
        assert!((got.fa - r.fa).abs() / r.fa < 1e-4, "seed {seed}: fa {}", got.fa);
        let (QualityFactor::Finite(q), QualityFactor::Finite(q_true)) =
            (fit.model.quality_factor(), truth.quality_factor())
        else {
            panic!("unbounded Q");
        };
        assert!((q - q_true).abs() / q_true < 0.05, "seed {seed}: Q {q} vs {q_true}");
    }
}

#[test]
fn derived_resonator_round_trips_through_extraction() {
    let consts = PlatformConstants::default();
    let table = DispersionTable::builtin(AcousticMode::Sh0);
    let geom = GeometrySpec {
        lambda: 4.5e-6,
        pairs_n: 100,
        aperture_w: 20e-6,
        eps_eff: 5e-10,
        q_assumed: 3000.0,
    };
    let m = derive_resonator(&table, &consts, &geom, &SpurEnvironment::default()).unwrap();
    let r = m.resonance_frequencies();
    let grid = linspace(r.fr - 0.3 * (r.fa - r.fr), r.fa + 0.3 * (r.fa - r.fr), 8001);
    let set = one_port_sweep(&m, &grid, 50.0).unwrap();
    let got = extract_fr_fa(&grid, &set.admittance().unwrap()).unwrap();
    assert!((got.fr - r.fr).abs() / r.fr < 1e-6);
    assert!((got.fa - r.fa).abs() / r.fa < 1e-6);

    let window = linspace(r.fr - 0.3 * (r.fa - r.fr), r.fr + 0.3 * (r.fa - r.fr), 4001);
    let q = bode_q(&one_port_sweep(&m, &window, 50.0).unwrap()).unwrap().qmax;
    assert!((q - 3000.0).abs() / 3000.0 < 0.02, "{q}");
}

#[test]
fn spurs_show_up_in_the_admittance() {
    let consts = PlatformConstants::default();
    let table = DispersionTable::builtin(AcousticMode::Sh0);
    let geom = GeometrySpec {
        lambda: 4.5e-6,
        pairs_n: 100,
        aperture_w: 20e-6,
        eps_eff: 5e-10,
        q_assumed: 1000.0,
    };
    let clean = derive_resonator(&table, &consts, &geom, &SpurEnvironment::default()).unwrap();
    let mut env = SpurEnvironment::unmitigated();
    let spurious = derive_resonator(&table, &consts, &geom, &env).unwrap();
    env.transverse.piston = true;
    let piston = derive_resonator(&table, &consts, &geom, &env).unwrap();
    let t3 = spurious
        .spurs()
        .iter()
        .find(|b| b.label() == BranchKind::Transverse { order: 3 })
        .unwrap()
        .resonance();
    let g = |m: &ResonatorModel| m.admittance(t3).unwrap().re - clean.admittance(t3).unwrap().re;
    assert!(g(&spurious) > 0.0);
    assert!(g(&piston) < g(&spurious) / 10.0);
}

#[test]
fn every_preset_synthesizes_a_passive_filter() {
    let consts = PlatformConstants::default();
    for spec in band_presets() {
        let result = synthesize_auto(&spec, &consts, &SynthOptions::default()).unwrap();
        let m = result.metrics;
        assert!(
            (m.fc - spec.fc_target).abs() / spec.fc_target < 0.01,
            "{}: {m:?}",
            spec.name
        );
        assert!(
            (m.fbw - spec.fbw_target).abs() / spec.fbw_target < 0.10,
            "{}: {m:?}",
            spec.name
        );
        let grid = linspace(spec.fc_target * 0.8, spec.fc_target * 1.2, 401);
        let set = result.topology.cascade_sweep(&grid).unwrap();
        for i in 0..set.len() {
            assert!(set.passivity_margin(i) >= -1e-9);
        }
        let again = filter_metrics(&set, Some((m.fc - m.bw3db / 2.0, m.fc + m.bw3db / 2.0))).unwrap();
        assert!(
            (again.fc - m.fc).abs() / m.fc < 2e-3,
            "{}: {again:?} vs {m:?}",
            spec.name
        );
    }
}
