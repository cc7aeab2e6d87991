use super::ladder::{DesignSpec, SpecSource};

const STAGES: usize = 4;
const Q_ASSUMED: f64 = 1500.0;
const IL_MAX_DB: f64 = 2.10;

/// Eight band targets F1..F8 spanning 1.4 to 6.0 GHz.
///
/// F1 (narrowest published FBW at the lowest centre) and F8 (widest published
/// 3 dB bandwidth at the highest centre) are published targets. F2..F7 sit at
/// evenly spaced centres with made-up bandwidths and are marked
/// [`SpecSource::Placeholder`].
pub fn band_presets() -> Vec<DesignSpec> {
    const FBW_MID: [f64; 6] = [0.040, 0.050, 0.060, 0.070, 0.075, 0.080];
    let (f_lo, f_hi) = (1.4e9, 6.0e9);
    (0..8)
        .map(|i| {
            let fc = f_lo + (f_hi - f_lo) * i as f64 / 7.0;
            let (fbw, bw3db, source) = match i {
                0 => (0.033, None, SpecSource::Measured),
                7 => (488e6 / fc, Some(488e6), SpecSource::Measured),
                _ => (FBW_MID[i - 1], None, SpecSource::Placeholder),
            };
            DesignSpec {
                name: format!("F{}", i + 1),
                il_max_db: IL_MAX_DB,
                bw3db,
                source,
                ..DesignSpec::new(fc, fbw, STAGES, Q_ASSUMED)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eight_presets_span_the_band() {
        let p = band_presets();
        assert_eq!(p.len(), 8);
        assert_eq!(p[0].fc_target, 1.4e9);
        assert!((p[7].fc_target - 6.0e9).abs() < 1.0);
        assert!(p.iter().any(|s| s.bw3db == Some(488e6)));
        for s in &p[1..7] {
            assert_eq!(s.source, SpecSource::Placeholder);
        }
        for s in &p {
            s.validate().unwrap();
        }
        assert!(p.windows(2).all(|w| w[1].fc_target > w[0].fc_target));
    }
}
