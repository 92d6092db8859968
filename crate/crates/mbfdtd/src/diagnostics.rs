//! Source injection, field probes, discrete Fourier analysis and automated
//! measurement of scattering coefficients, angles and frequencies from
//! simulation output.
//!
//! Probes always record physical fields (the stored E slot is physical
//! everywhere, see `conventional`). Peak positions are refined with 3-point
//! quadratic interpolation; envelopes come from the magnitude of the
//! analytic signal; spectra are zero-padded at least 4x.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::array::Grid2;
use crate::conventional::FieldState;
use crate::error::SimError;
use crate::grid::{GridSpec, MaterialMap, TransitionRegion};

/// Field excitation.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    /// Additive (soft) source on Dx along the z-plane `k`, active over the
    /// whole y extent: `e0 exp(-((t - t0)/tau)^2) cos(omega (t - t0))`.
    /// `omega = 0` gives the baseband Gaussian pulse.
    LineTimePulse { k: usize, e0: f64, omega: f64, t0: f64, tau: f64 },
    /// One-way modulated Gaussian pulse stamped into the initial state,
    /// propagating toward +z at angle `theta` from the z axis (toward +y).
    SpatialInitialPulse {
        e0: f64,
        omega: f64,
        theta: f64,
        z_c: f64,
        y_c: f64,
        sigma_z: f64,
        sigma_y: f64,
    },
}

impl SourceSpec {
    /// Peak injection amplitude, for placement checks.
    pub fn e0(&self) -> f64 {
        match self {
            SourceSpec::LineTimePulse { e0, .. } => *e0,
            SourceSpec::SpatialInitialPulse { e0, .. } => *e0,
        }
    }
}

/// What a probe records.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbeKind {
    /// Ex time series at one node.
    Point { k: usize, i: usize },
    /// Ex along z at row `i`, every `every` steps.
    ZLine { i: usize, every: usize },
    /// Full Ex snapshot every `every` steps.
    Full { every: usize },
    /// Total discrete field energy each step.
    Energy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSpec {
    pub name: String,
    pub kind: ProbeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProbeData {
    Point { series: Vec<f64> },
    ZLine { frames: Vec<(usize, Vec<f64>)> },
    Full { frames: Vec<(usize, Grid2)> },
    Energy { series: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRecord {
    pub spec: ProbeSpec,
    pub data: ProbeData,
}

impl ProbeRecord {
    pub fn new(spec: ProbeSpec) -> Self {
        let data = match spec.kind {
            ProbeKind::Point { .. } => ProbeData::Point { series: Vec::new() },
            ProbeKind::ZLine { .. } => ProbeData::ZLine { frames: Vec::new() },
            ProbeKind::Full { .. } => ProbeData::Full { frames: Vec::new() },
            ProbeKind::Energy => ProbeData::Energy { series: Vec::new() },
        };
        Self { spec, data }
    }

    pub fn record(&mut self, state: &FieldState, spec: &GridSpec, step: usize) {
        match (&self.spec.kind, &mut self.data) {
            (ProbeKind::Point { k, i }, ProbeData::Point { series }) => {
                series.push(state.ex.at(*k, *i));
            }
            (ProbeKind::ZLine { i, every }, ProbeData::ZLine { frames }) => {
                if step % every.max(1) == 0 {
                    frames.push((step, state.ex.row(*i).to_vec()));
                }
            }
            (ProbeKind::Full { every }, ProbeData::Full { frames }) => {
                if step % every.max(1) == 0 {
                    frames.push((step, state.ex.clone()));
                }
            }
            (ProbeKind::Energy, ProbeData::Energy { series }) => {
                series.push(state.energy(spec));
            }
            _ => unreachable!("probe data kind matches spec kind by construction"),
        }
    }

    pub fn point_series(&self) -> Option<&[f64]> {
        match &self.data {
            ProbeData::Point { series } => Some(series),
            _ => None,
        }
    }

    pub fn energy_series(&self) -> Option<&[f64]> {
        match &self.data {
            ProbeData::Energy { series } => Some(series),
            _ => None,
        }
    }
}

/// Stamp a spatial initial pulse into the state: Ex at t = dt/2, B at t = 0,
/// D = eps E, with B matched for one-way propagation in the launch medium.
pub fn apply_initial_pulse(
    state: &mut FieldState,
    src: &SourceSpec,
    map: &MaterialMap,
    spec: &GridSpec,
) {
    let SourceSpec::SpatialInitialPulse { e0, omega, theta, z_c, y_c, sigma_z, sigma_y } = src
    else {
        return;
    };
    let n1 = map.medium_at(*z_c, *y_c, 0.0).refractive_index();
    let k_mag = n1 * omega;
    let (sin_t, cos_t) = theta.sin_cos();
    let (ky, kz) = (k_mag * sin_t, k_mag * cos_t);
    // Envelope rides along the ray at the medium phase speed.
    let (sy, sz) = (sin_t / n1, cos_t / n1);
    let pattern = |z: f64, y: f64, t: f64| -> f64 {
        let phase = ky * (y - y_c) + kz * (z - z_c) - omega * t;
        let gz = (z - z_c - sz * t) / sigma_z;
        let gy = if spec.ny > 1 { (y - y_c - sy * t) / sigma_y } else { 0.0 };
        e0 * phase.cos() * (-gz * gz - gy * gy).exp()
    };

    let t_e = 0.5 * spec.dt;
    for i in 0..spec.ny {
        let y = spec.y_at(i);
        for k in 0..spec.nz {
            let z = spec.z_at(k);
            let e = pattern(z, y, t_e);
            state.ex.set(k, i, state.ex.at(k, i) + e);
            let eps = map.eval_epsilon(spec, k, i, 0);
            state.dx.set(k, i, state.ex.at(k, i) * eps);
        }
    }
    for i in 0..crate::conventional::b_rows(spec) {
        let y = (i as f64 + 0.5) * spec.dy;
        for k in 0..spec.nz - 1 {
            let z = (k as f64 + 0.5) * spec.dz;
            let p = pattern(z, y, 0.0);
            state.by.set(k, i, state.by.at(k, i) + n1 * cos_t * p);
            if spec.ny > 1 {
                state.bz.set(k, i, state.bz.at(k, i) - n1 * sin_t * p);
            }
        }
    }
}

/// Add the active time sources of step n to the D field. Injecting inside a
/// transition region is an error while the source is live.
pub fn inject_sources(
    next: &mut FieldState,
    sources: &[SourceSpec],
    region: &TransitionRegion,
    spec: &GridSpec,
    n: usize,
) -> Result<(), SimError> {
    let t = spec.t_at(n);
    for src in sources {
        if let SourceSpec::LineTimePulse { k, e0, omega, t0, tau } = src {
            let arg = (t - t0) / tau;
            let amp = e0 * (-arg * arg).exp() * (omega * (t - t0)).cos();
            if amp.abs() <= e0.abs() * 1e-12 {
                continue;
            }
            for i in 0..spec.ny {
                if region.is_hybrid(*k, i) {
                    return Err(SimError::SourceInTransitionRegion { k: *k, i, step: n });
                }
                next.dx.set(*k, i, next.dx.at(*k, i) + amp);
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// analysis helpers
// ---------------------------------------------------------------------------

fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

/// Magnitude of the analytic signal (Hilbert envelope).
pub fn envelope(series: &[f64]) -> Vec<f64> {
    let n = series.len();
    if n < 4 {
        return series.iter().map(|x| x.abs()).collect();
    }
    let m = next_pow2(n);
    let mut buf: Vec<Complex64> =
        series.iter().map(|&x| Complex64::new(x, 0.0)).chain(std::iter::repeat(Complex64::new(0.0, 0.0))).take(m).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);
    // analytic signal: keep DC and Nyquist, double positives, zero negatives
    for x in buf.iter_mut().take(m / 2).skip(1) {
        *x *= 2.0;
    }
    for x in buf.iter_mut().skip(m / 2 + 1) {
        *x = Complex64::new(0.0, 0.0);
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    buf.iter().take(n).map(|c| c.norm() / m as f64).collect()
}

/// 3-point quadratic refinement around index `idx`; returns (position, value)
/// in fractional samples.
pub fn quadratic_peak(y: &[f64], idx: usize) -> (f64, f64) {
    if idx == 0 || idx + 1 >= y.len() {
        return (idx as f64, y[idx]);
    }
    let (a, b, c) = (y[idx - 1], y[idx], y[idx + 1]);
    let denom = a - 2.0 * b + c;
    if denom.abs() < 1e-300 {
        return (idx as f64, b);
    }
    let delta = 0.5 * (a - c) / denom;
    let val = b - 0.25 * (a - c) * delta;
    (idx as f64 + delta, val)
}

fn argmax(y: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in y.iter().enumerate() {
        if v > y[best] {
            best = j;
        }
    }
    let _ = y;
    best
}

/// One detected pulse in a time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub start: usize,
    pub end: usize,
    /// Envelope peak, sub-sample.
    pub peak_pos: f64,
    pub peak_env: f64,
    /// Signed extremum of the raw series within the pulse.
    pub signed_peak: f64,
}

/// Segment a series into pulses by thresholding its envelope at
/// `thresh_rel` of the global envelope maximum; segments separated by less
/// than `min_gap` samples are merged.
pub fn find_pulses(series: &[f64], thresh_rel: f64, min_gap: usize) -> Vec<Pulse> {
    let env = envelope(series);
    let global = env.iter().cloned().fold(0.0_f64, f64::max);
    if global == 0.0 {
        return Vec::new();
    }
    let thr = thresh_rel * global;
    let mut raw: Vec<(usize, usize)> = Vec::new();
    let mut cur: Option<(usize, usize)> = None;
    for (j, &e) in env.iter().enumerate() {
        if e >= thr {
            cur = Some(match cur {
                None => (j, j),
                Some((s, _)) => (s, j),
            });
        } else if let Some(seg) = cur.take() {
            raw.push(seg);
        }
    }
    if let Some(seg) = cur {
        raw.push(seg);
    }
    // merge segments separated by small gaps
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for seg in raw {
        match merged.last_mut() {
            Some(last) if seg.0 <= last.1 + min_gap => last.1 = seg.1,
            _ => merged.push(seg),
        }
    }
    merged
        .into_iter()
        .map(|(s, e)| {
            let w = &env[s..=e];
            let j = argmax(w) + s;
            let (pos, val) = quadratic_peak(&env, j);
            let mut signed = 0.0_f64;
            for &x in &series[s..=e] {
                if x.abs() > signed.abs() {
                    signed = x;
                }
            }
            Pulse { start: s, end: e, peak_pos: pos, peak_env: val, signed_peak: signed }
        })
        .collect()
}

/// Measure reflection and transmission coefficients from probe series.
///
/// The reflection probe must see the incident pulse first and the reflected
/// pulse after a quiet gap; the transmission probe sees the transmitted
/// pulse. Amplitudes are signed extrema (peak reading), normalized by the
/// incident extremum.
pub fn measure_coefficients(refl: &[f64], trans: &[f64]) -> Result<(f64, f64), SimError> {
    let pulses = find_pulses(refl, 5e-3, 24);
    if pulses.is_empty() {
        return Err(SimError::PulseOverlap {
            probe: "reflection".into(),
            what: "no pulse found".into(),
        });
    }
    let incident = pulses[0];
    if incident.signed_peak == 0.0 {
        return Err(SimError::PulseOverlap {
            probe: "reflection".into(),
            what: "incident pulse has zero amplitude".into(),
        });
    }
    let gamma = match pulses.get(1) {
        Some(r) => r.signed_peak / incident.signed_peak,
        None => {
            // no separable reflected pulse: report the residual level after
            // the incident has passed
            let tail_start = (incident.end + 1).min(refl.len());
            let mut signed = 0.0_f64;
            for &x in &refl[tail_start..] {
                if x.abs() > signed.abs() {
                    signed = x;
                }
            }
            signed / incident.signed_peak
        }
    };
    let tp = find_pulses(trans, 5e-3, 24);
    let t_coeff = match tp.first() {
        Some(p) => p.signed_peak / incident.signed_peak,
        None => 0.0,
    };
    Ok((gamma, t_coeff))
}

/// Discrete Fourier magnitude with zero padding (factor >= 4) and the
/// frequency grid in angular units (rad per unit of `d_sample`).
pub fn spectrum(series: &[f64], d_sample: f64, pad_factor: usize) -> (Vec<f64>, Vec<f64>) {
    let n = series.len();
    let m = next_pow2(n * pad_factor.max(4));
    let mut buf: Vec<Complex64> =
        series.iter().map(|&x| Complex64::new(x, 0.0)).chain(std::iter::repeat(Complex64::new(0.0, 0.0))).take(m).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let d_omega = 2.0 * std::f64::consts::PI / (m as f64 * d_sample);
    let half = m / 2;
    let freqs = (0..half).map(|j| j as f64 * d_omega).collect();
    let mags = buf.iter().take(half).map(|c| c.norm()).collect();
    (freqs, mags)
}

/// Frequency of the dominant spectral peak (quadratically interpolated),
/// ignoring bins below `omega_min`.
pub fn peak_frequency(series: &[f64], d_sample: f64, omega_min: f64) -> f64 {
    let (freqs, mags) = spectrum(series, d_sample, 8);
    let d_omega = freqs[1] - freqs[0];
    let j0 = (omega_min / d_omega).ceil() as usize;
    if j0 + 1 >= mags.len() {
        return 0.0;
    }
    let j = argmax(&mags[j0..]) + j0;
    let (pos, _) = quadratic_peak(&mags, j);
    pos * d_omega
}

/// Which k_z half-plane a scattered pulse lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralBranch {
    /// k_z > 0.
    Forward,
    /// k_z < 0.
    Backward,
}

/// Direction of a pulse from the 2D spatial spectrum of a snapshot window.
///
/// Returns `(theta, k_y_peak, |k_z|_peak)`: the peak of |FFT2(Ex window)|
/// restricted to k_y >= 0 and the requested k_z half-plane, both components
/// quadratically interpolated; `theta = atan2(k_y, |k_z|)`.
pub fn measure_angle(
    frame: &Grid2,
    spec: &GridSpec,
    k_range: (usize, usize),
    i_range: (usize, usize),
    branch: SpectralBranch,
) -> Result<(f64, f64, f64), SimError> {
    let (k0, k1) = k_range;
    let (i0, i1) = i_range;
    assert!(k1 > k0 && i1 > i0);
    let nz_w = k1 - k0;
    let ny_w = i1 - i0;
    let mz = next_pow2(nz_w * 4);
    let my = next_pow2(ny_w * 4);

    // windowed copy, zero padded
    let mut data = vec![Complex64::new(0.0, 0.0); mz * my];
    for i in 0..ny_w {
        for k in 0..nz_w {
            data[i * mz + k] = Complex64::new(frame.at(k0 + k, i0 + i), 0.0);
        }
    }
    let mut planner = FftPlanner::new();
    let fft_z = planner.plan_fft_forward(mz);
    for i in 0..my {
        fft_z.process(&mut data[i * mz..(i + 1) * mz]);
    }
    let fft_y = planner.plan_fft_forward(my);
    let mut col = vec![Complex64::new(0.0, 0.0); my];
    let mut mag = vec![0.0_f64; mz * my];
    for k in 0..mz {
        for i in 0..my {
            col[i] = data[i * mz + k];
        }
        fft_y.process(&mut col);
        for i in 0..my {
            mag[i * mz + k] = col[i].norm();
        }
    }

    let dkz = 2.0 * std::f64::consts::PI / (mz as f64 * spec.dz);
    let dky = 2.0 * std::f64::consts::PI / (my as f64 * spec.dy);

    // peak over k_y in [0, Nyquist), k_z in the requested half-plane
    let mut best = (0usize, 0usize, -1.0_f64);
    for iy in 0..my / 2 {
        for iz in 1..mz / 2 {
            let kz_idx = match branch {
                SpectralBranch::Forward => iz,
                SpectralBranch::Backward => mz - iz,
            };
            let v = mag[iy * mz + kz_idx];
            if v > best.2 {
                best = (iy, kz_idx, v);
            }
        }
    }
    if best.2 <= 0.0 {
        return Err(SimError::PulseOverlap {
            probe: "snapshot window".into(),
            what: "empty spectrum".into(),
        });
    }
    let (iy, iz, _) = best;

    // interpolate along z at fixed iy
    let row: Vec<f64> = (0..mz).map(|k| mag[iy * mz + k]).collect();
    let (pz, _) = quadratic_peak(&row, iz);
    let kz_mag = match branch {
        SpectralBranch::Forward => pz * dkz,
        SpectralBranch::Backward => (mz as f64 - pz) * dkz,
    };
    // interpolate along y at fixed iz
    let colm: Vec<f64> = (0..my).map(|i| mag[i * mz + iz]).collect();
    let (py, _) = quadratic_peak(&colm, iy);
    let ky = if py <= my as f64 / 2.0 { py * dky } else { (py - my as f64) * dky };

    Ok((ky.atan2(kz_mag), ky, kz_mag))
}

/// Best normalized cross-correlation between two equal-length series over
/// lags in [-max_lag, max_lag]; returns (coefficient, lag).
pub fn xcorr_normalized(a: &[f64], b: &[f64], max_lag: usize) -> (f64, isize) {
    assert_eq!(a.len(), b.len());
    let n = a.len() as isize;
    let mut best = (f64::NEG_INFINITY, 0isize);
    for lag in -(max_lag as isize)..=(max_lag as isize) {
        let mut sab = 0.0;
        let mut saa = 0.0;
        let mut sbb = 0.0;
        for j in 0..n {
            let jb = j + lag;
            if jb < 0 || jb >= n {
                continue;
            }
            let (x, y) = (a[j as usize], b[jb as usize]);
            sab += x * y;
            saa += x * x;
            sbb += y * y;
        }
        if saa > 0.0 && sbb > 0.0 {
            let c = sab / (saa * sbb).sqrt();
            if c > best.0 {
                best = (c, lag);
            }
        }
    }
    best
}

/// Interpolated zero-crossing times (in samples) of a series; spacing of
/// successive crossings tracks the instantaneous half-period.
pub fn zero_crossings(series: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for j in 1..series.len() {
        let (a, b) = (series[j - 1], series[j]);
        if a == 0.0 {
            out.push((j - 1) as f64);
        } else if a.signum() != b.signum() && b != 0.0 {
            out.push((j - 1) as f64 + a / (a - b));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_of_modulated_gaussian_tracks_its_envelope() {
        let n = 1024;
        let series: Vec<f64> = (0..n)
            .map(|j| {
                let t = j as f64 - 512.0;
                (0.3 * t).cos() * (-(t / 120.0) * (t / 120.0)).exp()
            })
            .collect();
        let env = envelope(&series);
        for j in (300..700).step_by(17) {
            let t = j as f64 - 512.0;
            let expected = (-(t / 120.0) * (t / 120.0)).exp();
            assert!((env[j] - expected).abs() < 0.02, "j={j}: {} vs {expected}", env[j]);
        }
    }

    #[test]
    fn pure_sinusoid_peak_frequency_within_two_permille() {
        let omega0 = 0.37;
        let dt = 0.25;
        // >= 64 periods
        let n = (64.0 * 2.0 * std::f64::consts::PI / omega0 / dt).ceil() as usize;
        let series: Vec<f64> = (0..n).map(|j| (omega0 * dt * j as f64).sin()).collect();
        let peak = peak_frequency(&series, dt, 0.05);
        assert!((peak - omega0).abs() / omega0 < 2e-3, "peak {peak}");
    }

    #[test]
    fn dc_record_peaks_at_zero() {
        let series = vec![1.0; 256];
        let (freqs, mags) = spectrum(&series, 1.0, 4);
        let j = super::argmax(&mags);
        assert_eq!(freqs[j], 0.0);
    }

    #[test]
    fn pulse_segmentation_separates_two_pulses() {
        let n = 2000;
        let mut series = vec![0.0; n];
        for j in 0..n {
            let t1 = (j as f64 - 400.0) / 40.0;
            let t2 = (j as f64 - 1400.0) / 40.0;
            series[j] = (-t1 * t1).exp() - 0.33 * (-t2 * t2).exp();
        }
        let pulses = find_pulses(&series, 5e-3, 24);
        assert_eq!(pulses.len(), 2);
        assert!((pulses[0].signed_peak - 1.0).abs() < 1e-6);
        assert!((pulses[1].signed_peak + 0.33).abs() < 1e-6);
        let (g, _t) = measure_coefficients(&series, &series).unwrap();
        assert!((g + 0.33).abs() < 1e-6);
    }

    #[test]
    fn quadratic_peak_recovers_subsample_position() {
        // samples of a parabola peaking at 10.3
        let y: Vec<f64> = (0..21).map(|j| 5.0 - (j as f64 - 10.3) * (j as f64 - 10.3)).collect();
        let (pos, val) = quadratic_peak(&y, 10);
        assert!((pos - 10.3).abs() < 1e-12);
        assert!((val - 5.0).abs() < 1e-12);
    }

    #[test]
    fn zero_crossings_of_chirp_shrink() {
        let n = 4000;
        let series: Vec<f64> =
            (0..n).map(|j| (0.01 * j as f64 + 1e-6 * (j as f64).powi(2)).sin()).collect();
        let zc = zero_crossings(&series);
        let intervals: Vec<f64> = zc.windows(2).map(|w| w[1] - w[0]).collect();
        for w in intervals.windows(2) {
            assert!(w[1] < w[0] + 1e-9);
        }
    }

    #[test]
    fn xcorr_identical_series_is_unity() {
        let a: Vec<f64> = (0..500).map(|j| (0.1 * j as f64).sin() * (-(j as f64 - 250.0).powi(2) / 1e4).exp()).collect();
        let (c, lag) = xcorr_normalized(&a, &a, 5);
        assert!((c - 1.0).abs() < 1e-12);
        assert_eq!(lag, 0);
    }
}
