//! Directional 2D continuous wavelet transform with the wave packet as mother
//! wavelet, and admissibility coefficients in any dimension.
//!
//! The family member with scale `a`, rotation `α` and translation `b` is
//! `ψ^{a,α,b}(r) = ψ(M_α⁻¹(r − b)/a) / a`, whose spectrum is
//! `a ψ̂(a M_αᵀ k) e^{−ik·b}`. Dilations and rotations are therefore applied by
//! evaluating the closed-form spectrum at transformed frequencies, never by
//! resampling an image.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{GwpError, Result};
use crate::fft;
use crate::grid::{ComplexField, Domain, GridSpec};
use crate::packet::PacketParams;
use crate::quad::{adaptive, adaptive_semi_infinite, Estimate};
use crate::special::bessel_k_scaled;

/// Amplitude, relative to its peak, below which the spectrum counts as
/// negligible when checking a grid against the Nyquist limit.
pub const ESSENTIAL_AMPLITUDE: f64 = 1e-4;

/// Scale, rotation angle and translation of one family member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyIndex {
    pub a: f64,
    pub alpha: f64,
    pub b: [f64; 2],
}

/// `ψ^{a,α,b}(r) = ψ(M_α⁻¹(r − b)/a) / a` for a 2D packet.
pub fn family_member(
    idx: &FamilyIndex,
    r: &[f64; 2],
    t: f64,
    params: &PacketParams,
) -> Result<Complex64> {
    check_2d(params)?;
    if !(idx.a > 0.0 && idx.a.is_finite()) {
        return Err(GwpError::Precondition(format!(
            "scale must be positive, got {}",
            idx.a
        )));
    }
    let (s, c) = idx.alpha.sin_cos();
    let dx = r[0] - idx.b[0];
    let dy = r[1] - idx.b[1];
    let u = [(c * dx + s * dy) / idx.a, (-s * dx + c * dy) / idx.a];
    Ok(params.evaluate(&u, t) / idx.a)
}

/// `e^p a ψ̂(a M_αᵀ k)`, the spectrum of the family member at `b = 0`, scaled by `e^p`.
fn member_spectrum_scaled(
    a: f64,
    (s, c): (f64, f64),
    k: [f64; 2],
    t: f64,
    params: &PacketParams,
) -> Complex64 {
    let rotated = [a * (c * k[0] + s * k[1]), a * (-s * k[0] + c * k[1])];
    params.fourier_scaled(&rotated, t) * a
}

fn check_2d(params: &PacketParams) -> Result<()> {
    if params.dim() == 2 {
        Ok(())
    } else {
        Err(GwpError::Precondition(format!(
            "the directional transform is two-dimensional, packet has dim {}",
            params.dim()
        )))
    }
}

/// Largest `|k|` at which `|ψ̂|` still exceeds `rel_amplitude` times its
/// peak, found by scanning rays in the upper half plane.
pub fn essential_radius(params: &PacketParams, rel_amplitude: f64) -> f64 {
    let kappa = params.kappa();
    let n = params.dim();
    let rays = 90;
    let samples = 1200;
    let (lo, hi) = ((1e-4f64).ln(), (1e4f64).ln());
    let mut peak = 0.0f64;
    let mut profile = Vec::with_capacity(rays * samples);
    for i in 0..rays {
        let phi = PI * i as f64 / (rays - 1) as f64;
        for j in 0..samples {
            let k = kappa * (lo + (hi - lo) * j as f64 / (samples - 1) as f64).exp();
            let mut kv = vec![0.0; n];
            kv[0] = k * phi.cos();
            kv[1] = k * phi.sin();
            let d = params.spectral_density_scaled(&kv);
            peak = peak.max(d);
            profile.push((k, d));
        }
    }
    let threshold = peak * rel_amplitude * rel_amplitude;
    profile
        .iter()
        .filter(|(_, d)| *d >= threshold)
        .map(|(k, _)| *k)
        .fold(0.0, f64::max)
}

/// `n` scales spaced geometrically from `a_min` to `a_max`.
pub fn log_spaced_scales(a_min: f64, a_max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a_min];
    }
    let (l0, l1) = (a_min.ln(), a_max.ln());
    (0..n)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Default scale ladder: ratio `2^{1/4}` from `a_min` up to at least `a_max`.
pub fn default_scales(a_min: f64, a_max: f64) -> Vec<f64> {
    let ratio = 2f64.powf(0.25);
    let mut out = vec![a_min];
    while *out.last().expect("non-empty") < a_max {
        let next = out.last().expect("non-empty") * ratio;
        out.push(next);
    }
    out
}

/// `n` angles uniformly covering `[0, 2π)`.
pub fn uniform_angles(n: usize) -> Vec<f64> {
    (0..n).map(|i| TAU * i as f64 / n as f64).collect()
}

/// Angle count matching an angular resolving power: `⌈2π / ARP⌉`.
pub fn default_angle_count(arp: f64) -> usize {
    if arp > 0.0 && arp.is_finite() {
        (TAU / arp).ceil().max(1.0) as usize
    } else {
        1
    }
}

/// Smallest and largest scales a grid supports: the smallest keeps the
/// essential spectrum below Nyquist, the largest puts the peak frequency
/// `κ/a` at two fundamental grid frequencies.
pub fn scale_range_for_grid(params: &PacketParams, grid: &GridSpec) -> Result<(f64, f64)> {
    check_2d(params)?;
    let nyquist = grid.nyquist().into_iter().fold(f64::INFINITY, f64::min);
    let a_min = essential_radius(params, ESSENTIAL_AMPLITUDE) / nyquist * (1.0 + 1e-9);
    let fundamental = grid
        .shape()
        .iter()
        .zip(grid.spacing())
        .map(|(&n, h)| TAU / (n as f64 * h))
        .fold(0.0, f64::max);
    let a_max = params.kappa() / (2.0 * fundamental);
    if a_max <= a_min {
        return Err(GwpError::ScaleCoverage(format!(
            "grid too small for this wavelet: smallest usable scale {a_min} exceeds largest {a_max}"
        )));
    }
    Ok((a_min, a_max))
}

/// Coefficients `W(a, α, b)` on a (scale × angle × translation) lattice,
/// stored scale-major with the translation grid innermost.
#[derive(Debug, Clone)]
pub struct TransformCoefficients {
    pub scales: Vec<f64>,
    pub angles: Vec<f64>,
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
    pub params: PacketParams,
    pub t: f64,
}

impl TransformCoefficients {
    /// Translation-grid slice for one `(scale, angle)` pair.
    pub fn slice(&self, scale: usize, angle: usize) -> &[Complex64] {
        let n = self.grid.len();
        let start = (scale * self.angles.len() + angle) * n;
        &self.values[start..start + n]
    }

    pub fn slice_mut(&mut self, scale: usize, angle: usize) -> &mut [Complex64] {
        let n = self.grid.len();
        let start = (scale * self.angles.len() + angle) * n;
        &mut self.values[start..start + n]
    }
}

fn dft_frequencies(grid: &GridSpec) -> Vec<[f64; 2]> {
    let mut buf = [0.0; 2];
    (0..grid.len())
        .map(|i| {
            grid.dft_frequencies_into(i, &mut buf);
            buf
        })
        .collect()
}

fn check_scales_and_angles(scales: &[f64], angles: &[f64]) -> Result<()> {
    if scales.is_empty() {
        return Err(GwpError::EmptyAxis("scale"));
    }
    if angles.is_empty() {
        return Err(GwpError::EmptyAxis("angle"));
    }
    if let Some(a) = scales.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(GwpError::Precondition(format!(
            "scales must be positive, got {a}"
        )));
    }
    if scales.windows(2).any(|w| w[1] <= w[0]) {
        return Err(GwpError::Precondition(
            "scales must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Forward transform `W(a,α,b) = ∫ f(r) conj(ψ^{a,α,b}(r)) d²r`, evaluated for
/// every translation on the grid of `f` as `IFFT[f̂ · conj(a ψ̂(a M_αᵀ k))]`.
pub fn forward_cwt(
    f: &ComplexField,
    scales: &[f64],
    angles: &[f64],
    params: &PacketParams,
    t: f64,
) -> Result<TransformCoefficients> {
    check_2d(params)?;
    check_scales_and_angles(scales, angles)?;
    if f.domain != Domain::Position || f.grid.dim() != 2 {
        return Err(GwpError::InvalidGrid(
            "forward transform needs a 2D position-space field".into(),
        ));
    }
    let grid = f.grid.clone();
    let nyquist = grid.nyquist().into_iter().fold(f64::INFINITY, f64::min);
    let k_max = essential_radius(params, ESSENTIAL_AMPLITUDE) / scales[0];
    if k_max >= nyquist {
        return Err(GwpError::Nyquist { k_max, nyquist });
    }

    let mut spectrum = f.values.clone();
    fft::forward(&mut spectrum, grid.shape());
    let freqs = dft_frequencies(&grid);
    let n = grid.len();
    let shape = grid.shape().to_vec();
    let decay = (-params.p()).exp();
    let mut values = vec![Complex64::new(0.0, 0.0); n * scales.len() * angles.len()];
    values
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(slot, out)| {
            let a = scales[slot / angles.len()];
            let rot = angles[slot % angles.len()].sin_cos();
            for ((o, s), k) in out.iter_mut().zip(&spectrum).zip(&freqs) {
                *o = s * member_spectrum_scaled(a, rot, *k, t, params).conj() * decay;
            }
            fft::inverse(out, &shape);
        });
    Ok(TransformCoefficients {
        scales: scales.to_vec(),
        angles: angles.to_vec(),
        grid,
        values,
        params: params.clone(),
        t,
    })
}

/// Midpoint weights in `ln a`: each scale owns the cell halfway to its
/// neighbours, and the end cells mirror their inner half.
fn log_scale_weights(scales: &[f64]) -> Result<Vec<f64>> {
    if scales.len() < 2 {
        return Err(GwpError::ScaleCoverage(
            "reconstruction needs at least two scales to discretize da/a".into(),
        ));
    }
    let logs: Vec<f64> = scales.iter().map(|a| a.ln()).collect();
    let m = logs.len();
    Ok((0..m)
        .map(|i| {
            let left = if i == 0 {
                logs[1] - logs[0]
            } else {
                logs[i] - logs[i - 1]
            };
            let right = if i == m - 1 {
                logs[m - 1] - logs[m - 2]
            } else {
                logs[i + 1] - logs[i]
            };
            0.5 * (left + right)
        })
        .collect())
}

/// Angle step for a uniform cover of the full circle.
fn angle_step(angles: &[f64]) -> Result<f64> {
    let step = TAU / angles.len() as f64;
    for (i, a) in angles.iter().enumerate() {
        let expected = angles[0] + step * i as f64;
        if (a - expected).abs() > 1e-9 * TAU {
            return Err(GwpError::ScaleCoverage(
                "reconstruction needs angles uniformly covering the full circle".into(),
            ));
        }
    }
    Ok(step)
}

const SYNTHESIS_GROUPS: usize = 8;

/// Reconstruction
/// `f(r) ≈ (1/C) ∫ da/a³ ∫ dα ∫ d²b W(a,α,b) ψ^{a,α,b}(r)`, with a midpoint
/// rule in `ln a` (`da/a³ = d(ln a)/a²`), a uniform rule in `α`, and the
/// translation integral done by FFT. The result lives on the coefficient grid.
pub fn inverse_cwt(w: &TransformCoefficients, c: &AdmissibilityResult) -> Result<ComplexField> {
    check_2d(&w.params)?;
    check_scales_and_angles(&w.scales, &w.angles)?;
    let scale_weights = log_scale_weights(&w.scales)?;
    let d_alpha = angle_step(&w.angles)?;
    let p = w.params.p();
    // C carries e^{−2p}; fold it into the scaled spectra instead.
    let c_scaled = (c.log_value + 2.0 * p).exp();
    if !(c_scaled > 0.0 && c_scaled.is_finite()) {
        return Err(GwpError::Precondition(format!(
            "admissibility constant must be positive, got {}",
            c.value
        )));
    }
    let grid = &w.grid;
    let n = grid.len();
    let shape = grid.shape().to_vec();
    let freqs = dft_frequencies(grid);
    let n_angles = w.angles.len();
    let growth = p.exp();

    let accumulate = |acc: &mut Vec<Complex64>, slot: usize| {
        let (si, ai) = (slot / n_angles, slot % n_angles);
        let a = w.scales[si];
        let rot = w.angles[ai].sin_cos();
        let mut buf: Vec<Complex64> = w.slice(si, ai).iter().map(|v| v * growth).collect();
        fft::forward(&mut buf, &shape);
        let weight = scale_weights[si] * d_alpha / (a * a * c_scaled);
        for ((acc, b), k) in acc.iter_mut().zip(&buf).zip(&freqs) {
            *acc += b * member_spectrum_scaled(a, rot, *k, w.t, &w.params) * weight;
        }
    };
    // A fixed number of contiguous slot groups, summed in order, keeps the
    // result independent of the thread count.
    let slots = w.scales.len() * n_angles;
    let group = slots.div_ceil(SYNTHESIS_GROUPS);
    let partial: Vec<Vec<Complex64>> = (0..slots.div_ceil(group))
        .into_par_iter()
        .map(|g| {
            let mut acc = vec![Complex64::new(0.0, 0.0); n];
            for slot in g * group..((g + 1) * group).min(slots) {
                accumulate(&mut acc, slot);
            }
            acc
        })
        .collect();
    let mut partial = partial.into_iter();
    let mut total = partial.next().expect("at least one slot");
    for part in partial {
        total.iter_mut().zip(&part).for_each(|(a, b)| *a += b);
    }
    fft::inverse(&mut total, &shape);
    ComplexField::new(grid.clone(), total, Domain::Position)
}

/// Discrete reconstruction gain at every DFT frequency of `grid`:
/// `(1/C) Σ Δln a Δα |ψ̂(a M_αᵀ k)|²`. A value of 1 means the frequency is
/// reproduced exactly; use it to check that the scales cover a signal band.
pub fn coverage_gain(
    scales: &[f64],
    angles: &[f64],
    params: &PacketParams,
    t: f64,
    grid: &GridSpec,
    c: &AdmissibilityResult,
) -> Result<Vec<f64>> {
    check_2d(params)?;
    check_scales_and_angles(scales, angles)?;
    let weights = log_scale_weights(scales)?;
    let d_alpha = angle_step(angles)?;
    let c_scaled = (c.log_value + 2.0 * params.p()).exp();
    let freqs = dft_frequencies(grid);
    Ok(freqs
        .par_iter()
        .map(|k| {
            let mut g = 0.0;
            for (a, wa) in scales.iter().zip(&weights) {
                for alpha in angles {
                    let v = member_spectrum_scaled(*a, alpha.sin_cos(), *k, t, params) / *a;
                    g += wa * d_alpha * v.norm_sqr();
                }
            }
            g / c_scaled
        })
        .collect())
}

/// How an admissibility coefficient was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdmissibilityMethod {
    ClosedForm3d,
    ReductionIntegral,
    DirectQuadrature,
}

/// Normalization of an admissibility coefficient: with or without the
/// `(2π)^{−n}` prefactor in front of `∫ |ψ̂|²/kⁿ dⁿk`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    With2PiPower,
    Without2PiPower,
}

/// An admissibility coefficient together with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityResult {
    pub value: f64,
    /// `ln value`, available even when `value` underflows at large `p`.
    pub log_value: f64,
    pub method: AdmissibilityMethod,
    pub convention: Convention,
    /// Absolute error estimate of `value`.
    pub est_error: f64,
    pub dim: usize,
}

impl AdmissibilityResult {
    fn from_scaled(
        scaled: Estimate<f64>,
        p: f64,
        dim: usize,
        method: AdmissibilityMethod,
        convention: Convention,
    ) -> Result<Self> {
        if !(scaled.value > 0.0 && scaled.value.is_finite()) {
            return Err(GwpError::NonConvergence {
                what: "admissibility coefficient".into(),
                last_change: f64::NAN,
            });
        }
        let decay = (-2.0 * p).exp();
        Ok(Self {
            value: scaled.value * decay,
            log_value: scaled.value.ln() - 2.0 * p,
            method,
            convention,
            est_error: scaled.error * decay,
            dim,
        })
    }

    /// Same coefficient expressed in `convention`.
    pub fn in_convention(&self, convention: Convention) -> Self {
        if convention == self.convention {
            return self.clone();
        }
        let log_factor = self.dim as f64 * TAU.ln();
        let sign = match convention {
            Convention::With2PiPower => -1.0,
            Convention::Without2PiPower => 1.0,
        };
        let factor = (sign * log_factor).exp();
        Self {
            value: self.value * factor,
            log_value: self.log_value + sign * log_factor,
            est_error: self.est_error * factor,
            convention,
            ..self.clone()
        }
    }

    /// Relative error estimate.
    pub fn rel_error(&self) -> f64 {
        self.est_error / self.value
    }
}

const RADIAL_TOL: f64 = 1e-11;
const ANGULAR_TOL: f64 = 1e-9;
const MAX_INTERVALS: usize = 4000;

/// Log-radius window `(u₀, L)` outside which `kᵐ |ψ̂(k d)|²` is negligible
/// along the unit direction `d` (`u = ln k ∈ [u₀ − L, u₀ + L]`, `m` =
/// `extra_power`). `None` on the backward ray, where the spectrum vanishes.
pub(crate) fn ray_log_window(
    params: &PacketParams,
    dir: &[f64],
    extra_power: f64,
) -> Option<(f64, f64)> {
    let n = params.dim();
    let cos_theta = dir[0];
    let sin_sq: f64 = dir[1..].iter().map(|v| v * v).sum();
    // 1 + cos θ without cancellation near the backward direction.
    let one_plus = if cos_theta >= 0.0 {
        1.0 + cos_theta
    } else {
        sin_sq / (1.0 - cos_theta)
    };
    if one_plus <= 0.0 {
        return None;
    }
    let weighted_sin_sq: f64 = dir[1..]
        .iter()
        .zip(params.epsilons())
        .map(|(d, e)| d * d * e)
        .sum();
    let gamma = params.gamma();
    let p = params.p();
    // |ψ̂|² ∝ exp(−A k − B/k) along the ray.
    let a_coef = gamma * one_plus + weighted_sin_sq / one_plus;
    let b_coef = p * p / (gamma * one_plus);
    let k_star = (b_coef / a_coef).sqrt();
    let m = (a_coef * b_coef).sqrt();
    let power = (2.0 * params.nu() + n as f64 + 1.0).abs() + 1.0 + extra_power.abs();
    // Widen [k*/x, k* x] until the exponential has dropped by ~60 e-folds
    // more than the power law can compensate.
    let mut log_x: f64 = 0.5;
    while m * (log_x.exp() + (-log_x).exp() - 2.0) - power * log_x < 60.0 {
        log_x += 0.5;
        if log_x > 200.0 {
            break;
        }
    }
    Some((k_star.ln(), log_x))
}

/// `∫₀^∞ e^{2p} |ψ̂(k d)|² dk/k` along the unit direction `d`.
fn radial_integral_scaled(params: &PacketParams, dir: &[f64], t: f64) -> Result<Estimate<f64>> {
    let n = params.dim();
    let Some((u0, log_x)) = ray_log_window(params, dir, 0.0) else {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    };
    let mut kv = vec![0.0; n];
    let integrand = |u: f64, kv: &mut Vec<f64>| {
        let k = u.exp();
        for (o, d) in kv.iter_mut().zip(dir) {
            *o = k * d;
        }
        params.fourier_scaled(kv, t).norm_sqr()
    };
    // Split at the peak so that narrow peaks are never straddled blindly.
    let left = adaptive(
        |u| integrand(u, &mut kv),
        u0 - log_x,
        u0,
        0.0,
        RADIAL_TOL,
        MAX_INTERVALS,
    )?;
    let mut kv = vec![0.0; n];
    let right = adaptive(
        |u| integrand(u, &mut kv),
        u0,
        u0 + log_x,
        0.0,
        RADIAL_TOL,
        MAX_INTERVALS,
    )?;
    Ok(Estimate {
        value: left.value + right.value,
        error: left.error + right.error,
    })
}

/// Angular breakpoints `0, θ₀, 2θ₀, 4θ₀, …, π` around the forward peak.
pub(crate) fn polar_breakpoints(params: &PacketParams) -> Vec<f64> {
    let eps_max = params.epsilons().iter().cloned().fold(0.0, f64::max);
    let spread = 1.0 / (params.kappa() * eps_max).sqrt();
    let mut points = vec![0.0];
    let mut theta = 0.25 * spread;
    while theta < PI {
        points.push(theta);
        theta *= 2.0;
    }
    points.push(PI);
    points
}

fn integrate_polar(
    params: &PacketParams,
    mut g: impl FnMut(f64) -> Result<Estimate<f64>>,
) -> Result<Estimate<f64>> {
    let points = polar_breakpoints(params);
    let mut value = 0.0;
    let mut error = 0.0;
    let mut failure = None;
    for w in points.windows(2) {
        let est = adaptive(
            |theta| match g(theta) {
                Ok(e) => e.value,
                Err(err) => {
                    failure.get_or_insert(err);
                    0.0
                }
            },
            w[0],
            w[1],
            0.0,
            ANGULAR_TOL,
            MAX_INTERVALS,
        )?;
        value += est.value;
        error += est.error;
    }
    if let Some(err) = failure {
        return Err(err);
    }
    // The inner radial tolerance bounds its contribution relative to the total.
    error += RADIAL_TOL * value.abs();
    Ok(Estimate { value, error })
}

/// `C = ∫ |ψ̂(k)|² / |k|² d²k` in polar coordinates. Only the phase of `ψ̂`
/// depends on `t`, so the value does not.
pub fn admissibility_2d(params: &PacketParams, t: f64) -> Result<AdmissibilityResult> {
    check_2d(params)?;
    let est = integrate_polar(params, |theta| {
        radial_integral_scaled(params, &[theta.cos(), theta.sin()], t)
    })?;
    // |ψ̂|² is even in k₂, so the lower half plane doubles the integral.
    let scaled = Estimate {
        value: 2.0 * est.value,
        error: 2.0 * est.error,
    };
    AdmissibilityResult::from_scaled(
        scaled,
        params.p(),
        2,
        AdmissibilityMethod::DirectQuadrature,
        Convention::Without2PiPower,
    )
}

/// Area of the unit sphere `S^{d}` in `ℝ^{d+1}`.
fn sphere_area(d: usize) -> f64 {
    let half = (d as f64 + 1.0) / 2.0;
    2.0 * PI.powf(half) / gamma_fn(half)
}

/// Γ(x) for the half-integers and integers used by [`sphere_area`].
fn gamma_fn(x: f64) -> f64 {
    let twice = (2.0 * x).round() as i64;
    debug_assert!((2.0 * x - twice as f64).abs() < 1e-12 && twice > 0);
    if twice % 2 == 0 {
        (1..twice / 2).map(|k| k as f64).product()
    } else {
        let mut g = PI.sqrt();
        let mut y = 0.5;
        while y < x - 0.25 {
            g *= y;
            y += 1.0;
        }
        g
    }
}

/// `∫ |ψ̂(k)|² / kⁿ dⁿk` by direct quadrature in hyperspherical coordinates,
/// returned without the `(2π)^{−n}` prefactor. Supported for `n = 2`, for any
/// `n` when all transverse lengths are equal, and for general `n = 3`.
pub fn admissibility_nd(params: &PacketParams) -> Result<AdmissibilityResult> {
    let n = params.dim();
    if n == 2 {
        return admissibility_2d(params, 0.0);
    }
    let eps = params.epsilons();
    let symmetric = eps.iter().all(|e| (e - eps[0]).abs() <= 1e-14 * eps[0]);
    let est = if symmetric {
        let mut dir = vec![0.0; n];
        let est = integrate_polar(params, |theta| {
            dir[0] = theta.cos();
            dir[1] = theta.sin();
            let r = radial_integral_scaled(params, &dir, 0.0)?;
            let w = theta.sin().powi(n as i32 - 2);
            Ok(Estimate {
                value: r.value * w,
                error: r.error * w,
            })
        })?;
        let area = sphere_area(n - 2);
        Estimate {
            value: est.value * area,
            error: est.error * area,
        }
    } else if n == 3 {
        let est = integrate_polar(params, |theta| {
            let (st, ct) = theta.sin_cos();
            let mut failure = None;
            let inner = adaptive(
                |phi: f64| match radial_integral_scaled(
                    params,
                    &[ct, st * phi.cos(), st * phi.sin()],
                    0.0,
                ) {
                    Ok(r) => r.value,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                },
                0.0,
                PI / 2.0,
                0.0,
                ANGULAR_TOL,
                MAX_INTERVALS,
            )?;
            if let Some(e) = failure {
                return Err(e);
            }
            // Evenness in k₂ and k₃ covers the other three quadrants.
            Ok(Estimate {
                value: 4.0 * st * inner.value,
                error: 4.0 * st * inner.error,
            })
        })?;
        est
    } else {
        return Err(GwpError::Precondition(format!(
            "direct quadrature supports unequal transverse lengths only for n = 3, got n = {n}"
        )));
    };
    AdmissibilityResult::from_scaled(
        est,
        params.p(),
        n,
        AdmissibilityMethod::DirectQuadrature,
        Convention::Without2PiPower,
    )
}

/// `(2π)^{−n} ∫ |ψ̂|²/kⁿ dⁿk` from a one-dimensional integral of the packet
/// with doubled lengths along imaginary time:
///
/// ```text
/// C = (2π)^{n/2} γ^{(n−1)/2} p^{1−n} 2^{−ν₂} (c^{n+1}/n!) ∫₀^∞ τⁿ ψ₂(0, −iτ) e^{−iπ(n−1)/4} dτ
/// ```
///
/// where `ψ₂` has parameters `(2p, 2ν + (n−1)/2, 2γ, 2εⱼ)` and `ν₂` is its
/// order. With `u = √(1 + cτ/(2γ))` the integrand is real and decays like
/// `e^{−2pu}`.
pub fn admissibility_reduction(params: &PacketParams) -> Result<AdmissibilityResult> {
    let n = params.dim();
    let nf = n as f64;
    let doubled = params.doubled()?;
    let (p, gamma) = (params.p(), params.gamma());
    let p2 = doubled.p();
    let nu2 = doubled.nu();
    let eps2: Vec<f64> = doubled.epsilons().to_vec();
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    let log_prefactor = 0.5 * nf * TAU.ln() + 0.5 * (nf - 1.0) * gamma.ln()
        - (nf - 1.0) * p.ln()
        - nu2 * 2f64.ln()
        - factorial.ln()
        + 0.5 * (2.0 / PI).ln();
    let mut failure = None;
    let integrand = |u: f64| -> f64 {
        // cτ = 2γ(u² − 1), c dτ = 4γu du, so c^{n+1} τⁿ dτ = (cτ)ⁿ 4γu du.
        let ctau = 2.0 * gamma * (u * u - 1.0);
        if ctau <= 0.0 {
            return 0.0;
        }
        let z = p2 * u;
        let k = match bessel_k_scaled(nu2, Complex64::new(z, 0.0)) {
            Ok(k) => k.re,
            Err(e) => {
                failure.get_or_insert(e);
                return 0.0;
            }
        };
        let denom: f64 = eps2.iter().map(|e| (ctau + e).sqrt()).product();
        // e^{2p} K(2pu) = e^{−2p(u−1)} · e^{z} K(z)
        let log_rest =
            log_prefactor + nf * ctau.ln() + (4.0 * gamma * u).ln() + nu2 * z.ln() - p2 * (u - 1.0);
        log_rest.exp() * k / denom
    };
    let scale = (1.0 / p).clamp(1e-3, 1.0);
    let est = adaptive_semi_infinite(integrand, 1.0, scale, 0.0, 1e-11, MAX_INTERVALS)?;
    if let Some(e) = failure {
        return Err(e);
    }
    AdmissibilityResult::from_scaled(
        est,
        p,
        n,
        AdmissibilityMethod::ReductionIntegral,
        Convention::With2PiPower,
    )
}

/// Closed form of `∫ |ψ̂|²/k³ d³k` for `ε₂ = ε₃ = γ` and integer
/// `2ν ≥ 0`:
///
/// ```text
/// C = (2π)⁴ (p/γ)^{4ν} Σ_{m=0}^{2ν} (2ν)!/m! · 2^{m−4ν−1} κ^{m−4ν−5} γ^{m−1} K_{m+3}(4κγ)
/// ```
pub fn admissibility_closed_form_3d(params: &PacketParams) -> Result<AdmissibilityResult> {
    if params.dim() != 3 {
        return Err(GwpError::Precondition(format!(
            "closed form needs n = 3, got {}",
            params.dim()
        )));
    }
    let gamma = params.gamma();
    if params
        .epsilons()
        .iter()
        .any(|e| (e - gamma).abs() > 1e-12 * gamma)
    {
        return Err(GwpError::Precondition(
            "closed form needs every epsilon equal to gamma".into(),
        ));
    }
    let two_nu = 2.0 * params.nu();
    if two_nu < 0.0 || (two_nu - two_nu.round()).abs() > 1e-12 {
        return Err(GwpError::Precondition(format!(
            "closed form needs 2ν to be a non-negative integer, got {two_nu}"
        )));
    }
    let order = two_nu.round() as usize;
    let nu = params.nu();
    let p = params.p();
    let kappa = params.kappa();
    let z = 4.0 * kappa * gamma;
    let ln2 = 2f64.ln();
    let log_front = 4.0 * TAU.ln() + 4.0 * nu * (p / gamma).ln();
    let order_factorial: f64 = (1..=order).map(|k| k as f64).product();
    let mut sum = 0.0;
    let mut m_factorial = 1.0;
    for m in 0..=order {
        if m > 0 {
            m_factorial *= m as f64;
        }
        let mf = m as f64;
        let k = bessel_k_scaled(mf + 3.0, Complex64::new(z, 0.0))?.re;
        let log_term = (order_factorial / m_factorial).ln()
            + (mf - 4.0 * nu - 1.0) * ln2
            + (mf - 4.0 * nu - 5.0) * kappa.ln()
            + (mf - 1.0) * gamma.ln();
        sum += log_term.exp() * k;
    }
    // K(z) = e^{−z} · scaled, and z = 2p.
    let scaled = Estimate {
        value: log_front.exp() * sum,
        error: 1e-14 * log_front.exp() * sum,
    };
    AdmissibilityResult::from_scaled(
        scaled,
        p,
        3,
        AdmissibilityMethod::ClosedForm3d,
        Convention::Without2PiPower,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::special::bessel_k;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn family_member_identities() {
        let pp = PacketParams::new_2d(3.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        let r = [0.4, -0.3];
        let id = FamilyIndex {
            a: 1.0,
            alpha: 0.0,
            b: [0.0, 0.0],
        };
        assert_eq!(
            family_member(&id, &r, 0.0, &pp).unwrap(),
            pp.evaluate(&r, 0.0)
        );
        let flip = FamilyIndex {
            a: 1.0,
            alpha: PI,
            b: [0.0, 0.0],
        };
        let v = family_member(&flip, &r, 0.0, &pp).unwrap();
        assert!((v - pp.evaluate(&[-0.4, 0.3], 0.0)).norm() < 1e-14);
        assert!(family_member(&FamilyIndex { a: 0.0, ..id }, &r, 0.0, &pp).is_err());
    }

    #[test]
    fn family_member_norm_is_invariant() {
        let pp = PacketParams::new_2d(9.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        let h = 0.05;
        let norm = |idx: &FamilyIndex| {
            let mut acc = 0.0;
            for i in -200..200 {
                for j in -200..200 {
                    let r = [idx.b[0] + i as f64 * h, idx.b[1] + j as f64 * h];
                    acc += family_member(idx, &r, 0.0, &pp).unwrap().norm_sqr();
                }
            }
            acc * h * h
        };
        let n0 = norm(&FamilyIndex {
            a: 1.0,
            alpha: 0.0,
            b: [0.0, 0.0],
        });
        let n1 = norm(&FamilyIndex {
            a: 2.0,
            alpha: PI / 3.0,
            b: [1.0, -1.0],
        });
        assert!(rel(n1, n0) < 1e-6, "{n0} {n1}");
    }

    fn test_grid(n: usize, h: f64) -> GridSpec {
        let half = h * (n as f64) / 2.0;
        GridSpec::centered(&[0.0, 0.0], &[half, half], &[n, n]).unwrap()
    }

    #[test]
    fn self_transform_is_the_squared_norm() {
        let pp = PacketParams::new_2d(16.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        let grid = test_grid(128, 0.1);
        let f = ComplexField::from_fn(grid.clone(), Domain::Position, |x| pp.evaluate(x, 0.0));
        let w = forward_cwt(&f, &[1.0], &[0.0], &pp, 0.0).unwrap();
        // b = 0 is the grid point with index (64, 64).
        let center = w.slice(0, 0)[64 * 128 + 64];
        let norm_sq = f.l2_norm_sq();
        assert!(
            (center - norm_sq).norm() < 1e-8 * norm_sq,
            "{center} vs {norm_sq}"
        );
    }

    #[test]
    fn matches_direct_quadrature_oracle() {
        let pp = PacketParams::new_2d(16.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        let grid = test_grid(128, 0.1);
        // A signal built from shifted, stretched packets plus a Gaussian bump.
        let signal = |x: &[f64]| {
            pp.evaluate(&[x[0] - 0.5, x[1] + 0.3], 0.0)
                + pp.evaluate(&[(x[0] + 1.0) / 1.5, x[1] / 1.5], 0.0) * 0.7
                + Complex64::new((-(x[0] * x[0] + x[1] * x[1]) / 0.5).exp(), 0.0) * 0.01
        };
        let f = ComplexField::from_fn(grid.clone(), Domain::Position, signal);
        let scales = [1.0, 1.3, 1.9];
        let angles = [0.0, 0.7, 2.1, 4.0];
        let w = forward_cwt(&f, &scales, &angles, &pp, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..8 {
            let si = rng.random_range(0..scales.len());
            let ai = rng.random_range(0..angles.len());
            let bi = rng.random_range(44..84);
            let bj = rng.random_range(44..84);
            let b = grid.coords(bi * 128 + bj);
            let idx = FamilyIndex {
                a: scales[si],
                alpha: angles[ai],
                b: [b[0], b[1]],
            };
            let mut direct = Complex64::new(0.0, 0.0);
            for (i, v) in f.values.iter().enumerate() {
                let r = grid.coords(i);
                direct += v * family_member(&idx, &[r[0], r[1]], 0.0, &pp).unwrap().conj();
            }
            direct *= grid.cell_volume();
            let fast = w.slice(si, ai)[bi * 128 + bj];
            let scale = f.l2_norm_sq();
            assert!(
                (fast - direct).norm() < 1e-4 * direct.norm().max(1e-3 * scale),
                "{fast} vs {direct}"
            );
        }
    }

    #[test]
    fn translation_covariance() {
        let pp = PacketParams::new_2d(16.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        let grid = test_grid(64, 0.1);
        let g = |x: &[f64]| pp.evaluate(x, 0.0);
        let f = ComplexField::from_fn(grid.clone(), Domain::Position, g);
        // Shift by (5, −3) grid steps, periodically.
        let mut rolled = vec![Complex64::new(0.0, 0.0); 64 * 64];
        for i in 0..64 {
            for j in 0..64 {
                rolled[((i + 5) % 64) * 64 + (j + 61) % 64] = f.values[i * 64 + j];
            }
        }
        let shifted = ComplexField::new(grid.clone(), rolled, Domain::Position).unwrap();
        let w0 = forward_cwt(&f, &[1.0, 1.4], &[0.0, 1.0], &pp, 0.0).unwrap();
        let w1 = forward_cwt(&shifted, &[1.0, 1.4], &[0.0, 1.0], &pp, 0.0).unwrap();
        let peak = w0.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for s in 0..2 {
            for a in 0..2 {
                let (x0, x1) = (w0.slice(s, a), w1.slice(s, a));
                for i in 0..64 {
                    for j in 0..64 {
                        let moved = x1[((i + 5) % 64) * 64 + (j + 61) % 64];
                        let d = (moved - x0[i * 64 + j]).norm();
                        assert!(d < 1e-9 * peak, "{d} {peak}");
                    }
                }
            }
        }
    }

    #[test]
    fn linear_in_signal() {
        let pp = PacketParams::new_2d(16.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        let grid = test_grid(32, 0.15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut field = || {
            let vals: Vec<Complex64> = (0..grid.len())
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            ComplexField::new(grid.clone(), vals, Domain::Position).unwrap()
        };
        let (f1, f2) = (field(), field());
        let z = Complex64::new(0.3, -1.2);
        let combo = ComplexField::new(
            grid.clone(),
            f1.values
                .iter()
                .zip(&f2.values)
                .map(|(a, b)| a * z + b)
                .collect(),
            Domain::Position,
        )
        .unwrap();
        let scales = [1.0, 2.0];
        let angles = uniform_angles(4);
        let w1 = forward_cwt(&f1, &scales, &angles, &pp, 0.3).unwrap();
        let w2 = forward_cwt(&f2, &scales, &angles, &pp, 0.3).unwrap();
        let w = forward_cwt(&combo, &scales, &angles, &pp, 0.3).unwrap();
        for ((a, b), c) in w1.values.iter().zip(&w2.values).zip(&w.values) {
            assert!((a * z + b - c).norm() < 1e-12 * (1.0 + c.norm()));
        }
        // Reconstruction is linear in the coefficients.
        let cc = admissibility_2d(&pp, 0.0).unwrap();
        let r1 = inverse_cwt(&w1, &cc).unwrap();
        let r2 = inverse_cwt(&w2, &cc).unwrap();
        let mut sum = w1.clone();
        sum.values
            .iter_mut()
            .zip(&w2.values)
            .for_each(|(a, b)| *a += b);
        let r = inverse_cwt(&sum, &cc).unwrap();
        let peak = r.max_abs();
        for ((a, b), c) in r1.values.iter().zip(&r2.values).zip(&r.values) {
            assert!((a + b - c).norm() <= 1e-12 * peak);
        }
    }

    #[test]
    fn constants_are_invisible() {
        let pp = PacketParams::new_2d(16.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        let grid = test_grid(32, 0.15);
        let f = ComplexField::new(
            grid.clone(),
            vec![Complex64::new(2.5, 0.0); grid.len()],
            Domain::Position,
        )
        .unwrap();
        let w = forward_cwt(&f, &[1.0, 2.0], &uniform_angles(4), &pp, 0.0).unwrap();
        assert!(w.values.iter().all(|v| v.norm() < 1e-300));
        let r = inverse_cwt(&w, &admissibility_2d(&pp, 0.0).unwrap()).unwrap();
        assert!(r.values.iter().all(|v| v.norm() < 1e-300));
    }

    #[test]
    fn rejects_bad_inputs() {
        let pp = PacketParams::new_2d(16.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        let grid = test_grid(32, 0.15);
        let f = ComplexField::new(
            grid.clone(),
            vec![Complex64::new(1.0, 0.0); grid.len()],
            Domain::Position,
        )
        .unwrap();
        assert_eq!(
            forward_cwt(&f, &[], &[0.0], &pp, 0.0).unwrap_err(),
            GwpError::EmptyAxis("scale")
        );
        assert_eq!(
            forward_cwt(&f, &[1.0], &[], &pp, 0.0).unwrap_err(),
            GwpError::EmptyAxis("angle")
        );
        assert!(matches!(
            forward_cwt(&f, &[0.05], &[0.0], &pp, 0.0),
            Err(GwpError::Nyquist { .. })
        ));
        let w = forward_cwt(&f, &[1.0], &[0.0], &pp, 0.0).unwrap();
        let c = admissibility_2d(&pp, 0.0).unwrap();
        assert!(matches!(
            inverse_cwt(&w, &c),
            Err(GwpError::ScaleCoverage(_))
        ));
        let w = forward_cwt(&f, &[1.0, 2.0], &[0.0, 1.0, 2.0], &pp, 0.0).unwrap();
        assert!(matches!(
            inverse_cwt(&w, &c),
            Err(GwpError::ScaleCoverage(_))
        ));
    }

    #[test]
    fn rotation_by_quarter_turn_permutes_angles() {
        let pp = PacketParams::new_2d(16.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        // An odd, centered grid is mapped onto itself by a 90° rotation.
        let n = 63;
        let h = 0.1;
        let grid = GridSpec::new(vec![-31.0 * h, -31.0 * h], vec![h, h], vec![n, n]).unwrap();
        let g = |x: &[f64]| {
            pp.evaluate(&[x[0] - 0.4, x[1] - 0.2], 0.0)
                + pp.evaluate(&[x[1] * 0.8, -x[0] * 0.8 + 0.5], 0.0)
        };
        let f = ComplexField::from_fn(grid.clone(), Domain::Position, g);
        // f_rot(r) = f(M_β⁻¹ r) with β = 90°: M⁻¹(x, y) = (y, −x).
        let rotated = ComplexField::from_fn(grid.clone(), Domain::Position, |x| g(&[x[1], -x[0]]));
        let angles = uniform_angles(8);
        let w = forward_cwt(&f, &[1.0, 1.5], &angles, &pp, 0.0).unwrap();
        let wr = forward_cwt(&rotated, &[1.0, 1.5], &angles, &pp, 0.0).unwrap();
        let peak = w.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for s in 0..2 {
            for a in 0..8 {
                let original = w.slice(s, a);
                let turned = wr.slice(s, (a + 2) % 8);
                for i in 0..n {
                    for j in 0..n {
                        // b = (x_i, y_j) maps to M b = (−y_j, x_i).
                        let (ri, rj) = (n - 1 - j, i);
                        let d = (turned[ri * n + rj] - original[i * n + j]).norm();
                        assert!(d < 1e-10 * peak);
                    }
                }
            }
        }
    }

    #[test]
    fn parseval() {
        let pp = PacketParams::new_2d(6.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        // (2π)^{-2} ∫|ψ̂|² d²k in polar coordinates.
        let spectral = integrate_polar(&pp, |theta| {
            let dir = [theta.cos(), theta.sin()];
            let mut kv = [0.0; 2];
            adaptive(
                |u: f64| {
                    let k = u.exp();
                    kv[0] = k * dir[0];
                    kv[1] = k * dir[1];
                    pp.spectral_density_scaled(&kv) * k * k
                },
                -12.0,
                6.0,
                0.0,
                1e-12,
                2000,
            )
        })
        .unwrap()
        .value
            * 2.0
            / (TAU * TAU);
        // ∫|ψ|² d²x with graded Gauss-Legendre panels.
        let gl = crate::quad::GaussLegendre::new(24);
        let edges: Vec<f64> = (-60..=60).map(|i| (i as f64 / 6.0).powi(3)).collect();
        let mut position = 0.0;
        for wx in edges.windows(2) {
            for (x, ax) in gl.mapped(wx[0], wx[1]) {
                for wy in edges.windows(2) {
                    for (y, ay) in gl.mapped(wy[0], wy[1]) {
                        position += ax * ay * pp.evaluate_scaled(&[x, y], 0.0).norm_sqr();
                    }
                }
            }
        }
        assert!(rel(position, spectral) < 1e-6, "{position} vs {spectral}");
    }

    #[test]
    fn admissibility_is_time_independent() {
        let pp = PacketParams::new_2d(0.5, 0.5, 0.25, 1.0, 1.0).unwrap();
        let c0 = admissibility_2d(&pp, 0.0).unwrap();
        let c3 = admissibility_2d(&pp, 3.0).unwrap();
        assert!(rel(c3.value, c0.value) < 1e-10);
        let fig2 = PacketParams::new_2d(1.0, 0.5, 0.5, 16.0, 1.0).unwrap();
        let c = admissibility_2d(&fig2, 0.0).unwrap();
        assert!(c.value > 0.0 && c.value.is_finite());
    }

    #[test]
    fn admissibility_matches_monte_carlo() {
        for pp in [
            PacketParams::new_2d(4.0, 0.5, 1.0, 1.0, 1.0).unwrap(),
            PacketParams::new_2d(2.0, 1.5, 0.5, 2.0, 1.0).unwrap(),
        ] {
            let c = admissibility_2d(&pp, 0.0).unwrap();
            // Importance sampling: logistic in ln k, uniform in φ.
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            let k0 = pp.kappa();
            let s_u = 0.6;
            let samples = 400_000;
            let mut acc = 0.0;
            for _ in 0..samples {
                let v: f64 = rng.random_range(1e-12..1.0 - 1e-12);
                let u = k0.ln() + s_u * (v / (1.0 - v)).ln();
                let pdf_u = v * (1.0 - v) / s_u;
                let phi: f64 = rng.random_range(-PI..PI);
                let pdf_phi = 1.0 / TAU;
                let k = u.exp();
                let kv = [k * phi.cos(), k * phi.sin()];
                // dk₁dk₂/|k|² = du dφ
                acc += pp.spectral_density_scaled(&kv) / (pdf_u * pdf_phi);
            }
            let mc = acc / samples as f64 * (-2.0 * pp.p()).exp();
            assert!(rel(mc, c.value) < 0.01, "mc {mc} vs quad {}", c.value);
        }
    }

    /// Radial integral in closed form: along a ray at polar angle θ,
    /// `∫ |ψ̂|²/k dk = P² (1+cosθ)^{1−2ν−n} · 2 (A/B)^{s/2} K_s(2√(AB))`,
    /// `s = 2ν + n + 1`.
    fn closed_radial(pp: &PacketParams, theta: f64) -> f64 {
        let n = pp.dim() as f64;
        let (nu, gamma, p) = (pp.nu(), pp.gamma(), pp.p());
        let eps = pp.epsilons()[0];
        let one_plus = 1.0 + theta.cos();
        let a = gamma * one_plus + eps * (1.0 - theta.cos());
        let b = p * p / (gamma * one_plus);
        let s = 2.0 * nu + n + 1.0;
        let p2 = TAU.powf(n) * p.powf(4.0 * nu) * gamma.powf(-2.0 * nu);
        let k = bessel_k(s, Complex64::new(2.0 * (a * b).sqrt(), 0.0))
            .unwrap()
            .re;
        p2 * one_plus.powf(1.0 - 2.0 * nu - n) * 2.0 * (a / b).powf(s / 2.0) * k
    }

    #[test]
    fn radial_quadrature_matches_closed_form() {
        for pp in [
            PacketParams::new_2d(3.0, 0.5, 1.0, 1.0, 1.0).unwrap(),
            PacketParams::axisymmetric(3, 2.0, 1.2, 0.7, 1.5, 1.0).unwrap(),
        ] {
            for &theta in &[0.0, 0.3, 1.2, 2.5, 3.0] {
                let mut dir = vec![0.0; pp.dim()];
                dir[0] = f64::cos(theta);
                dir[1] = f64::sin(theta);
                let got =
                    radial_integral_scaled(&pp, &dir, 0.0).unwrap().value * (-2.0 * pp.p()).exp();
                let expected = closed_radial(&pp, theta);
                assert!(rel(got, expected) < 1e-9, "θ={theta}: {got} vs {expected}");
            }
        }
    }

    #[test]
    fn nd_direct_agrees_with_2d() {
        let pp = PacketParams::new_2d(2.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        let a = admissibility_nd(&pp).unwrap();
        let b = admissibility_2d(&pp, 0.0).unwrap();
        assert!(rel(a.value, b.value) < 1e-12);
        let with = a.in_convention(Convention::With2PiPower);
        assert!(rel(with.value * TAU * TAU, a.value) < 1e-14);
        assert!(
            rel(
                with.in_convention(Convention::Without2PiPower).value,
                a.value
            ) < 1e-14
        );
    }

    #[test]
    fn closed_form_3d_matches_quadrature() {
        for kg in [1.0, 2.0] {
            let gamma = 1.0;
            let p = 2.0 * kg;
            let pp = PacketParams::axisymmetric(3, p, 0.5, gamma, gamma, 1.0).unwrap();
            let closed = admissibility_closed_form_3d(&pp).unwrap();
            let direct = admissibility_nd(&pp).unwrap();
            let reduced = admissibility_reduction(&pp)
                .unwrap()
                .in_convention(Convention::Without2PiPower);
            assert!(
                rel(closed.value, direct.value) < 1e-3,
                "κγ={kg}: {} vs {}",
                closed.value,
                direct.value
            );
            assert!(
                rel(reduced.value, direct.value) < 1e-3,
                "κγ={kg}: {} vs {}",
                reduced.value,
                direct.value
            );
        }
    }

    #[test]
    fn closed_form_single_term_and_positivity() {
        let pp = PacketParams::axisymmetric(3, 3.0, 0.0, 1.5, 1.5, 1.0).unwrap();
        let kappa = pp.kappa();
        let z = 4.0 * kappa * 1.5;
        let expected = TAU.powi(4) * 0.5 * kappa.powi(-5) / 1.5
            * bessel_k(3.0, Complex64::new(z, 0.0)).unwrap().re;
        assert!(rel(admissibility_closed_form_3d(&pp).unwrap().value, expected) < 1e-12);
        for kg in [0.5, 1.0, 2.0, 4.0] {
            let pp = PacketParams::axisymmetric(3, 2.0 * kg, 1.5, 1.0, 1.0, 1.0).unwrap();
            assert!(admissibility_closed_form_3d(&pp).unwrap().value > 0.0);
        }
        let bad = PacketParams::axisymmetric(3, 2.0, 0.3, 1.0, 1.0, 1.0).unwrap();
        assert!(admissibility_closed_form_3d(&bad).is_err());
        let bad = PacketParams::axisymmetric(3, 2.0, 0.5, 1.0, 2.0, 1.0).unwrap();
        assert!(admissibility_closed_form_3d(&bad).is_err());
    }

    #[test]
    fn reduction_matches_direct_beyond_the_closed_form() {
        for pp in [
            PacketParams::axisymmetric(3, 3.0, 1.2, 0.8, 1.7, 1.0).unwrap(),
            PacketParams::new(2.5, 0.5, 1.0, vec![0.6, 1.4], 2.0).unwrap(),
            PacketParams::new_2d(4.0, 0.8, 1.0, 0.5, 1.0).unwrap(),
        ] {
            let direct = admissibility_nd(&pp)
                .unwrap()
                .in_convention(Convention::With2PiPower);
            let reduced = admissibility_reduction(&pp).unwrap();
            assert!(
                rel(reduced.value, direct.value) < 1e-6,
                "{} vs {}",
                reduced.value,
                direct.value
            );
        }
    }

    #[test]
    fn scaling_law() {
        let pp = PacketParams::axisymmetric(3, 2.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        let c1 = admissibility_nd(&pp).unwrap();
        let c2 = admissibility_nd(&pp.rescaled(2.0).unwrap()).unwrap();
        assert!(rel(c2.value / c1.value, 16.0) < 1e-6);
    }

    #[test]
    fn large_p_does_not_underflow() {
        let pp = PacketParams::new_2d(1024.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        let c = admissibility_2d(&pp, 0.0).unwrap();
        assert!(c.log_value.is_finite());
        let r = admissibility_reduction(&pp)
            .unwrap()
            .in_convention(Convention::Without2PiPower);
        assert!(
            (r.log_value - c.log_value).abs() < 1e-6,
            "{} vs {}",
            r.log_value,
            c.log_value
        );
    }
}
