//! Slice-versus-asymptotics metrics: envelope of the extrema, spacing of the
//! maxima, and plateau and vanishing-window levels.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::extrema::{extract_extrema, ExtremumKind};
use super::solver::FieldSlice;
use crate::error::{Error, Result};
use crate::wavefield::{elliptic_edges, Wavefield};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareConfig {
    /// Comparisons use the middle `safe_fraction` of the slice: `|x − x₀| ≤
    /// safe_fraction·L` for a slice of half-extent `L` centred at `x₀`.
    pub safe_fraction: f64,
    pub noise_floor: f64,
    pub envelope_median: f64,
    pub envelope_max: f64,
    pub wavelength_median: f64,
    pub plateau_tol: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            safe_fraction: 0.6,
            noise_floor: 1e-6,
            envelope_median: 0.10,
            envelope_max: 0.25,
            wavelength_median: 0.15,
            plateau_tol: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremumError {
    pub x: f64,
    pub q: f64,
    pub kind: ExtremumKind,
    pub predicted: f64,
    /// `|q − predicted| / c`.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub t: f64,
    pub window: (f64, f64),
    pub entries: Vec<ExtremumError>,
    pub median: Option<f64>,
    pub max: Option<f64>,
    /// No extrema fell inside the window.
    pub empty: bool,
    /// `t < 20/c³`, where the transient may still dominate.
    pub early: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacingError {
    pub x_mid: f64,
    pub spacing: f64,
    pub predicted: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavelengthReport {
    pub t: f64,
    pub window: (f64, f64),
    pub entries: Vec<SpacingError>,
    pub median: Option<f64>,
    pub max: Option<f64>,
    /// Fewer than three maxima were found.
    pub insufficient: bool,
}

fn stats(errors: impl Iterator<Item = f64>) -> (Option<f64>, Option<f64>) {
    let mut v: Vec<f64> = errors.collect();
    if v.is_empty() {
        return (None, None);
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
    (Some(median), Some(v[n - 1]))
}

fn safe_range(slice: &FieldSlice, cfg: &CompareConfig) -> (f64, f64) {
    match (slice.x.first(), slice.x.last()) {
        (Some(&a), Some(&b)) => {
            let b = b + slice.dx();
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            (mid - cfg.safe_fraction * half, mid + cfg.safe_fraction * half)
        }
        _ => (0.0, 0.0),
    }
}

/// `x`-window of the elliptic region minus the edge bands, intersected with
/// the safe part of the slice.
pub fn elliptic_window(slice: &FieldSlice, field: &Wavefield, cfg: &CompareConfig) -> Option<(f64, f64)> {
    let c = field.params().c;
    let (lo, hi) = elliptic_edges(c);
    let band = field.config().edge_width * c * c;
    let scale = 12.0 * slice.t;
    let (left, right) = safe_range(slice, cfg);
    let a = (scale * (lo + band)).max(left);
    let b = (scale * (hi - band)).min(right);
    (b > a).then_some((a, b))
}

fn check_time(slice: &FieldSlice) -> Result<()> {
    slice.validate()?;
    if !(slice.t > 0.0) {
        return Err(Error::domain(format!("comparison needs t > 0, got {}", slice.t)));
    }
    Ok(())
}

pub fn compare_envelope(slice: &FieldSlice, field: &Wavefield, cfg: &CompareConfig) -> Result<EnvelopeReport> {
    check_time(slice)?;
    let c = field.params().c;
    let early = slice.t < 20.0 / (c * c * c);
    let Some(window) = elliptic_window(slice, field, cfg) else {
        return Ok(EnvelopeReport { t: slice.t, window: (0.0, 0.0), entries: vec![], median: None, max: None, empty: true, early });
    };
    let list = extract_extrema(slice, window, cfg.noise_floor * c)?;
    let entries: Vec<ExtremumError> = list
        .entries
        .par_iter()
        .map(|e| {
            let (lo, hi) = field.envelope(e.x / (12.0 * slice.t))?;
            let predicted = if e.kind == ExtremumKind::Max { hi } else { lo };
            Ok(ExtremumError { x: e.x, q: e.q, kind: e.kind, predicted, error: (e.q - predicted).abs() / c })
        })
        .collect::<Result<_>>()?;
    let (median, max) = stats(entries.iter().map(|e| e.error));
    Ok(EnvelopeReport { t: slice.t, window, empty: entries.is_empty(), entries, median, max, early })
}

pub fn compare_wavelength(slice: &FieldSlice, field: &Wavefield, cfg: &CompareConfig) -> Result<WavelengthReport> {
    check_time(slice)?;
    let c = field.params().c;
    let empty = |window| WavelengthReport { t: slice.t, window, entries: vec![], median: None, max: None, insufficient: true };
    let Some(window) = elliptic_window(slice, field, cfg) else {
        return Ok(empty((0.0, 0.0)));
    };
    let list = extract_extrema(slice, window, cfg.noise_floor * c)?;
    let maxima: Vec<f64> = list.maxima().map(|e| e.x).collect();
    if maxima.len() < 3 {
        return Ok(empty(window));
    }
    let entries: Vec<SpacingError> = maxima
        .par_windows(2)
        .map(|w| {
            let x_mid = 0.5 * (w[0] + w[1]);
            let spacing = w[1] - w[0];
            let predicted = field.local_wavenumber(x_mid / (12.0 * slice.t), slice.t)?.wavelength;
            Ok(SpacingError { x_mid, spacing, predicted, error: (spacing - predicted).abs() / predicted })
        })
        .collect::<Result<_>>()?;
    let (median, max) = stats(entries.iter().map(|e| e.error));
    Ok(WavelengthReport { t: slice.t, window, entries, median, max, insufficient: false })
}

fn window_values(slice: &FieldSlice, window: (f64, f64)) -> Result<&[f64]> {
    slice.validate()?;
    let first = slice.x.partition_point(|&x| x < window.0);
    let last = slice.x.partition_point(|&x| x <= window.1);
    if last <= first {
        return Err(Error::domain(format!("window ({}, {}) holds no samples", window.0, window.1)));
    }
    Ok(&slice.q[first..last])
}

/// Mean of `q` over the samples in `window`.
pub fn plateau_mean(slice: &FieldSlice, window: (f64, f64)) -> Result<f64> {
    let v = window_values(slice, window)?;
    Ok(v.iter().sum::<f64>() / v.len() as f64)
}

/// `max |q|` over the samples in `window`.
pub fn vanishing_peak(slice: &FieldSlice, window: (f64, f64)) -> Result<f64> {
    Ok(window_values(slice, window)?.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
}

/// Asymptotic profile sampled on `x`, for closed-loop checks.
pub fn synthetic_slice(field: &Wavefield, t: f64, x: Vec<f64>) -> Result<FieldSlice> {
    let q = x.par_iter().map(|&x| field.sample(x, t).map(|s| s.q)).collect::<Result<Vec<f64>>>()?;
    Ok(FieldSlice { t, x, q })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceReport {
    pub t: f64,
    pub envelope: EnvelopeReport,
    pub wavelength: WavelengthReport,
    /// Mean over the plateau part of the safe window, when it has one.
    pub plateau_mean: Option<f64>,
    pub pass: bool,
    pub failures: Vec<String>,
}

/// Envelope, wavelength and plateau checks of one slice against the
/// thresholds in `cfg`.
pub fn compare_slice(slice: &FieldSlice, field: &Wavefield, cfg: &CompareConfig) -> Result<SliceReport> {
    let c = field.params().c;
    let envelope = compare_envelope(slice, field, cfg)?;
    let wavelength = compare_wavelength(slice, field, cfg)?;
    let (lo, _) = elliptic_edges(c);
    let band = field.config().edge_width * c * c;
    let (left, right) = safe_range(slice, cfg);
    let plateau_end = (12.0 * slice.t * (lo - band)).min(right);
    let plateau = if plateau_end > left { plateau_mean(slice, (left, plateau_end)).ok() } else { None };

    let mut failures = Vec::new();
    if let Some(m) = plateau {
        if (m - c).abs() > cfg.plateau_tol * c {
            failures.push(format!("plateau mean {m:.6} differs from c = {c} by more than {}", cfg.plateau_tol * c));
        }
    }
    if let (Some(med), Some(max)) = (envelope.median, envelope.max) {
        if med > cfg.envelope_median {
            failures.push(format!("envelope median error {med:.4} > {}", cfg.envelope_median));
        }
        if max > cfg.envelope_max {
            failures.push(format!("envelope max error {max:.4} > {}", cfg.envelope_max));
        }
    }
    if let Some(med) = wavelength.median {
        if med > cfg.wavelength_median {
            failures.push(format!("wavelength median error {med:.4} > {}", cfg.wavelength_median));
        }
    }
    Ok(SliceReport { t: slice.t, envelope, wavelength, plateau_mean: plateau, pass: failures.is_empty(), failures })
}
