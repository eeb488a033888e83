//! Uniform sampling grids and dense complex fields.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{GwpError, Result};
use crate::fft;
use crate::packet::PacketParams;

/// Which space a field's coordinates live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Position,
    Frequency,
}

/// Axis-aligned uniform grid. Axis 0 is the packet's propagation axis; values
/// are stored row-major with the last axis varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    origin: Vec<f64>,
    spacing: Vec<f64>,
    shape: Vec<usize>,
}

impl GridSpec {
    pub fn new(origin: Vec<f64>, spacing: Vec<f64>, shape: Vec<usize>) -> Result<Self> {
        if origin.is_empty() || origin.len() != spacing.len() || origin.len() != shape.len() {
            return Err(GwpError::InvalidGrid(format!(
                "origin/spacing/shape lengths differ or are empty: {}/{}/{}",
                origin.len(),
                spacing.len(),
                shape.len()
            )));
        }
        if let Some(h) = spacing.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
            return Err(GwpError::InvalidGrid(format!(
                "spacing must be positive, got {h}"
            )));
        }
        if shape.contains(&0) {
            return Err(GwpError::InvalidGrid(
                "every axis needs at least one point".into(),
            ));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(GwpError::InvalidGrid("origin must be finite".into()));
        }
        Ok(Self {
            origin,
            spacing,
            shape,
        })
    }

    /// Periodic grid of `shape[a]` points per axis covering
    /// `[center − half, center + half)`.
    pub fn centered(center: &[f64], half_extent: &[f64], shape: &[usize]) -> Result<Self> {
        if center.len() != half_extent.len() || center.len() != shape.len() {
            return Err(GwpError::InvalidGrid(
                "center/extent/shape lengths differ".into(),
            ));
        }
        if let Some(h) = half_extent.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
            return Err(GwpError::InvalidGrid(format!(
                "extent must be positive, got {h}"
            )));
        }
        let spacing: Vec<f64> = half_extent
            .iter()
            .zip(shape)
            .map(|(h, &n)| 2.0 * h / n.max(1) as f64)
            .collect();
        let origin = center.iter().zip(half_extent).map(|(c, h)| c - h).collect();
        Self::new(origin, spacing, shape.to_vec())
    }

    /// Default position grid: ±6 asymptotic widths per axis around `(ct, 0, …)`.
    pub fn default_position(params: &PacketParams, t: f64, points_per_axis: usize) -> Result<Self> {
        let mut center = vec![0.0; params.dim()];
        center[0] = params.c() * t;
        let half: Vec<f64> = params.sigmas().iter().map(|s| 6.0 * s).collect();
        Self::centered(&center, &half, &vec![points_per_axis; params.dim()])
    }

    /// Default frequency grid: ±6 inverse widths per axis around `(κ, 0, …)`.
    pub fn default_frequency(params: &PacketParams, points_per_axis: usize) -> Result<Self> {
        let mut center = vec![0.0; params.dim()];
        center[0] = params.kappa();
        let half: Vec<f64> = params.sigmas().iter().map(|s| 6.0 / s).collect();
        Self::centered(&center, &half, &vec![points_per_axis; params.dim()])
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }
    pub fn origin(&self) -> &[f64] {
        &self.origin
    }
    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn axis_coord(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + i as f64 * self.spacing[axis]
    }

    /// Multi-index of a flat row-major index.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.shape[a];
            flat /= self.shape[a];
        }
        idx
    }

    pub fn coords_into(&self, flat: usize, out: &mut [f64]) {
        let mut rem = flat;
        for a in (0..self.dim()).rev() {
            let i = rem % self.shape[a];
            rem /= self.shape[a];
            out[a] = self.axis_coord(a, i);
        }
    }

    pub fn coords(&self, flat: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.coords_into(flat, &mut out);
        out
    }

    /// Angular frequency of DFT bin `m` along `axis`, `2π m̃ / (N h)` with the
    /// signed index `m̃`.
    pub fn dft_frequency(&self, axis: usize, m: usize) -> f64 {
        let n = self.shape[axis];
        2.0 * PI * fft::signed_index(m, n) as f64 / (n as f64 * self.spacing[axis])
    }

    /// Frequency vector of flat DFT bin `flat`.
    pub fn dft_frequencies_into(&self, flat: usize, out: &mut [f64]) {
        let mut rem = flat;
        for a in (0..self.dim()).rev() {
            let m = rem % self.shape[a];
            rem /= self.shape[a];
            out[a] = self.dft_frequency(a, m);
        }
    }

    /// Largest representable angular frequency per axis, `π / h`.
    pub fn nyquist(&self) -> Vec<f64> {
        self.spacing.iter().map(|h| PI / h).collect()
    }
}

/// A complex function sampled on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
    pub domain: Domain,
}

impl ComplexField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>, domain: Domain) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(GwpError::InvalidGrid(format!(
                "grid has {} points but {} values were given",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            domain,
        })
    }

    /// Evaluate `f` at every grid point (in parallel).
    pub fn from_fn<F>(grid: GridSpec, domain: Domain, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let dim = grid.dim();
        let values = (0..grid.len())
            .into_par_iter()
            .map_init(
                || vec![0.0; dim],
                |buf, i| {
                    grid.coords_into(i, buf);
                    f(buf)
                },
            )
            .collect();
        Self {
            grid,
            values,
            domain,
        }
    }

    /// `Σ |f|² · cell volume`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Which closed form to sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldKind {
    /// `ψ(x, t)`.
    Position,
    /// `ψ̂(k, t)`.
    Frequency,
    /// Gaussian beam with spatial frequency `q`.
    Beam { q: f64 },
    /// Large-p Gaussian-envelope limit.
    MorletLimit,
}

/// Sample a closed form on `grid`. With `scaled`, values carry the factor
/// `e^p` used by the `_scaled` evaluators.
pub fn sample_field(
    kind: FieldKind,
    grid: &GridSpec,
    params: &PacketParams,
    t: f64,
    scaled: bool,
) -> Result<ComplexField> {
    if grid.dim() != params.dim() {
        return Err(GwpError::InvalidGrid(format!(
            "grid is {}-dimensional but the packet is {}-dimensional",
            grid.dim(),
            params.dim()
        )));
    }
    let factor = if scaled { 1.0 } else { (-params.p()).exp() };
    let grid = grid.clone();
    let field = match kind {
        FieldKind::Position => ComplexField::from_fn(grid, Domain::Position, |x| {
            params.evaluate_scaled(x, t) * factor
        }),
        FieldKind::Frequency => ComplexField::from_fn(grid, Domain::Frequency, |k| {
            params.fourier_scaled(k, t) * factor
        }),
        FieldKind::Beam { q } => {
            if q.is_nan() || q <= 0.0 {
                return Err(GwpError::Precondition(format!(
                    "beam frequency q must be positive, got {q}"
                )));
            }
            ComplexField::from_fn(grid, Domain::Position, |x| params.beam(q, x, t))
        }
        FieldKind::MorletLimit => ComplexField::from_fn(grid, Domain::Position, |x| {
            params.morlet_limit_scaled(x, t) * factor
        }),
    };
    Ok(field)
}

/// Continuous Fourier transform of a position field approximated on its own
/// DFT frequency grid: `ψ̂(k_m) ≈ h^n e^{−ik_m·x₀} Σ_j ψ_j e^{−2πi m·j/N}`.
///
/// Returns the spectrum in DFT bin order together with the frequencies.
pub fn dft_spectrum(field: &ComplexField) -> Vec<Complex64> {
    let grid = &field.grid;
    let mut spec = field.values.clone();
    fft::forward(&mut spec, grid.shape());
    let volume = grid.cell_volume();
    let dim = grid.dim();
    spec.par_iter_mut().enumerate().for_each_init(
        || vec![0.0; dim],
        |k, (i, v)| {
            grid.dft_frequencies_into(i, k);
            let phase: f64 = k.iter().zip(grid.origin()).map(|(ki, xi)| -ki * xi).sum();
            *v *= Complex64::from_polar(volume, phase);
        },
    );
    spec
}
