use crate::error::{Error, Result};
use crate::simulator::PulseRecord;

/// Maximum-likelihood phase of one frame from its calibration pulses.
///
/// `signs` holds the known preparation sign of each pulse. Returns the apparent
/// rotation `atan2(sum sign*s3, sum sign*s2)` of the calibration vector in the
/// measured plane, in `(-pi, pi]`.
pub fn estimate_phase(cal_pulses: &[PulseRecord], signs: &[f64], alpha_cal: f64) -> Result<f64> {
    if cal_pulses.is_empty() || cal_pulses.len() != signs.len() {
        return Err(Error::Precondition(format!(
            "{} calibration pulses for {} signs",
            cal_pulses.len(),
            signs.len()
        )));
    }
    if !(alpha_cal > 0.0) {
        return Err(Error::PhaseUnresolvable);
    }
    let (x, y) = cal_pulses
        .iter()
        .zip(signs)
        .fold((0.0, 0.0), |(x, y), (r, s)| {
            (x + s * r.s2_meas, y + s * r.s3_meas)
        });
    if x == 0.0 && y == 0.0 {
        return Err(Error::PhaseUnresolvable);
    }
    Ok(crate::angle::wrap(y.atan2(x)))
}

/// Rotates a pair of outcomes by `-phi_hat`.
#[inline]
pub fn rotate_back(s2: f64, s3: f64, phi_hat: f64) -> (f64, f64) {
    let (sin, cos) = phi_hat.sin_cos();
    (cos * s2 + sin * s3, -sin * s2 + cos * s3)
}

/// Maps a measured frame back onto the preparation axes.
pub fn remap(records: &[PulseRecord], phi_hat: f64) -> Vec<PulseRecord> {
    records
        .iter()
        .map(|r| {
            let (s2, s3) = rotate_back(r.s2_meas, r.s3_meas, phi_hat);
            PulseRecord {
                s2_meas: s2,
                s3_meas: s3,
                ..*r
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{calibration_sign, PulseKind};
    use std::f64::consts::FRAC_PI_2;

    fn rec(s2: f64, s3: f64) -> PulseRecord {
        PulseRecord {
            frame_index: 0,
            slot: 0,
            kind: PulseKind::Calibration,
            bit: 0,
            s2_meas: s2,
            s3_meas: s3,
            lo_monitor: 1e8,
        }
    }

    #[test]
    fn noiseless_inversion() {
        let phi: f64 = 0.3;
        let signs: Vec<f64> = (0..4).map(calibration_sign).collect();
        let pulses: Vec<_> = signs
            .iter()
            .map(|s| rec(s * 10.0 * phi.cos(), s * 10.0 * phi.sin()))
            .collect();
        let est = estimate_phase(&pulses, &signs, 10.0).unwrap();
        assert!((est - phi).abs() < 1e-15);
    }

    #[test]
    fn dc_offset_cancels() {
        let signs: Vec<f64> = (0..4).map(calibration_sign).collect();
        let pulses: Vec<_> = signs.iter().map(|s| rec(5.0 + s, 5.0)).collect();
        let est = estimate_phase(&pulses, &signs, 1.0).unwrap();
        assert!(est.abs() < 1e-15);
    }

    #[test]
    fn zero_amplitude_is_unresolvable() {
        let signs = [1.0, -1.0, 1.0, -1.0];
        let pulses = vec![rec(0.0, 0.0); 4];
        assert!(matches!(
            estimate_phase(&pulses, &signs, 1.0),
            Err(Error::PhaseUnresolvable)
        ));
        let pulses = vec![rec(1.0, 0.0); 4];
        assert!(matches!(
            estimate_phase(&pulses, &signs, 0.0),
            Err(Error::PhaseUnresolvable)
        ));
    }

    #[test]
    fn quarter_rotation_and_identity() {
        let (a, b) = rotate_back(0.0, 1.0, FRAC_PI_2);
        assert!((a - 1.0).abs() < 1e-15 && b.abs() < 1e-15);
        assert_eq!(rotate_back(0.7, -0.2, 0.0), (0.7, -0.2));
    }

    #[test]
    fn remap_inverse() {
        let frame = vec![rec(0.4, -1.3), rec(2.0, 0.5)];
        let back = remap(&remap(&frame, 0.8), -0.8);
        for (a, b) in frame.iter().zip(&back) {
            assert!((a.s2_meas - b.s2_meas).abs() < 1e-12);
            assert!((a.s3_meas - b.s3_meas).abs() < 1e-12);
        }
    }
}
