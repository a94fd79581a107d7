//! Angle helpers: wrapping and circular statistics.

use std::f64::consts::{PI, TAU};

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap(x: f64) -> f64 {
    if x > -PI && x <= PI {
        return x;
    }
    let mut y = x.rem_euclid(TAU);
    if y > PI {
        y -= TAU;
    }
    y
}

/// Nearest-branch continuation: adds the multiple of 2 pi that keeps each step
/// below pi in magnitude.
pub fn unwrap(phases: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phases.len());
    let mut prev: Option<f64> = None;
    for &p in phases {
        let next = match prev {
            None => p,
            Some(q) => q + wrap(p - q),
        };
        out.push(next);
        prev = Some(next);
    }
    out
}

/// Mean resultant length `R` of a set of angles.
pub fn resultant_length(angles: &[f64]) -> f64 {
    if angles.is_empty() {
        return 0.0;
    }
    let (s, c) = angles
        .iter()
        .fold((0.0, 0.0), |(s, c), a| (s + a.sin(), c + a.cos()));
    (s * s + c * c).sqrt() / angles.len() as f64
}

pub fn circular_mean(angles: &[f64]) -> f64 {
    let (s, c) = angles
        .iter()
        .fold((0.0, 0.0), |(s, c), a| (s + a.sin(), c + a.cos()));
    s.atan2(c)
}

/// Circular standard deviation `sqrt(-2 ln R)`.
pub fn circular_std(angles: &[f64]) -> f64 {
    let r = resultant_length(angles);
    if r <= 0.0 {
        return f64::INFINITY;
    }
    (-2.0 * r.ln()).max(0.0).sqrt()
}

/// Wrapped successive differences `wrap(x[k+1] - x[k])`.
pub fn wrapped_differences(phases: &[f64]) -> Vec<f64> {
    phases.windows(2).map(|w| wrap(w[1] - w[0])).collect()
}
