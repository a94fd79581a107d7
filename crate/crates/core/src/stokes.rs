//! Stokes-operator moment bookkeeping, the `<S1>` lower bound and the
//! conversion between double-homodyne outcomes and intrinsic moments.
//!
//! Downstream numerics work with normalized operators `s_i = S_i / sqrt(n_lo)`.
//! In the strong-LO limit `s2` and `s3` act as conjugate quadratures with
//! `[s2, s3] = 2i <S1>/n_lo ~ 2i`, and a coherent state has variance 1 in each.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lowest measured variance compatible with the vacuum penalty of the
/// double-homodyne receiver.
pub const MEASURED_VARIANCE_FLOOR: f64 = 0.5;

const FLOOR_SLACK: f64 = 1e-12;

/// Conditional first and second Stokes moments of one signal state, normalized
/// by the LO photon number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StokesMoments {
    /// `<S2>/sqrt(n_lo)`
    pub mean_s2: f64,
    /// `<S3>/sqrt(n_lo)`
    pub mean_s3: f64,
    /// `<S2^2>/n_lo`
    pub second_s2: f64,
    /// `<S3^2>/n_lo`
    pub second_s3: f64,
    /// `<{S2,S3}>/(2 n_lo)`
    pub cross_sym: f64,
    /// Lower bound on `<S1>/n_lo`.
    pub s1_lower_norm: f64,
}

impl StokesMoments {
    /// Builds moments from centered statistics; `s1_lower_norm` is derived from
    /// the second moments via [`s1_lower_bound`].
    pub fn from_centered(
        mean_s2: f64,
        mean_s3: f64,
        var_s2: f64,
        var_s3: f64,
        cov: f64,
        n_lo: f64,
    ) -> Result<Self> {
        let second_s2 = var_s2 + mean_s2 * mean_s2;
        let second_s3 = var_s3 + mean_s3 * mean_s3;
        let s1 = s1_lower_bound(n_lo, n_lo * (second_s2 + second_s3))? / n_lo;
        let m = Self {
            mean_s2,
            mean_s3,
            second_s2,
            second_s3,
            cross_sym: cov + mean_s2 * mean_s3,
            s1_lower_norm: s1,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn var_s2(&self) -> f64 {
        self.second_s2 - self.mean_s2 * self.mean_s2
    }

    pub fn var_s3(&self) -> f64 {
        self.second_s3 - self.mean_s3 * self.mean_s3
    }

    pub fn covariance(&self) -> f64 {
        self.cross_sym - self.mean_s2 * self.mean_s3
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.mean_s2,
            self.mean_s3,
            self.second_s2,
            self.second_s3,
            self.cross_sym,
            self.s1_lower_norm,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMoments("non-finite moment".into()));
        }
        let (v2, v3) = (self.var_s2(), self.var_s3());
        let slack = 1e-12 * (1.0 + self.second_s2.abs() + self.second_s3.abs());
        if v2 < -slack || v3 < -slack {
            return Err(Error::InvalidMoments(format!(
                "negative variance (var_s2 = {v2}, var_s3 = {v3})"
            )));
        }
        let cs = (v2.max(0.0) * v3.max(0.0)).sqrt() + (self.mean_s2 * self.mean_s3).abs();
        if self.cross_sym.abs() > cs + slack {
            return Err(Error::InvalidMoments(format!(
                "cross moment {} violates Cauchy-Schwarz bound {cs}",
                self.cross_sym
            )));
        }
        Ok(())
    }
}

/// Lower bound on `<S1>` from the LO photon number and `<S2^2 + S3^2>`
/// (both unnormalized):
/// `<S1> >= 1 + <n_LO> - <S2^2 + S3^2> / (2 <n_LO>)`.
pub fn s1_lower_bound(n_lo: f64, sum_second_raw: f64) -> Result<f64> {
    if !(n_lo > 0.0) || !n_lo.is_finite() {
        return Err(Error::Domain(format!("n_lo must be > 0, got {n_lo}")));
    }
    if !(sum_second_raw >= 0.0) {
        return Err(Error::Domain(format!(
            "<S2^2 + S3^2> must be >= 0, got {sum_second_raw}"
        )));
    }
    Ok(1.0 + n_lo - sum_second_raw / (2.0 * n_lo))
}

/// Removes the vacuum penalty of the double-homodyne receiver from one
/// measured component: returns `(sqrt(2) mean, 2 var - 1)`.
pub fn heterodyne_to_intrinsic(meas_mean: f64, meas_var: f64) -> Result<(f64, f64)> {
    if !(meas_var >= MEASURED_VARIANCE_FLOOR - FLOOR_SLACK) {
        return Err(Error::UnphysicalData(format!(
            "measured variance {meas_var} is below the vacuum floor {MEASURED_VARIANCE_FLOOR}; \
             check the shot-noise calibration"
        )));
    }
    Ok((std::f64::consts::SQRT_2 * meas_mean, 2.0 * meas_var - 1.0))
}

/// Inverse of [`heterodyne_to_intrinsic`].
pub fn intrinsic_to_heterodyne(intrinsic_mean: f64, intrinsic_var: f64) -> (f64, f64) {
    (
        intrinsic_mean / std::f64::consts::SQRT_2,
        0.5 * (intrinsic_var + 1.0),
    )
}
