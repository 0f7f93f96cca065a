//! Coincidence signals for the three measurement strategies.
//!
//! With `A(s) = Σ_μ θ_μ f_μ(s)` and disjoint pixel indicators `f_μ`, every
//! signal separates into amplitude polynomials times geometry kernels:
//!
//! * `G^(n)`:      `S(r) = (Σ_μ θ_μⁿ c_μ(r))²`, `c_μ(r) = ∫ f_μ hⁿ(s + r) ds`
//! * `G^(n−1)`:    `S(r) = Σ_μ θ_μ^{2(n−1)} b_μ(r)`, `b_μ(r) = ∫ f_μ h^{2(n−1)}(s + r) ds`
//! * `G^(n−1,1)`:  `S(r) = Σ_{μν} θ_μⁿ θ_νⁿ M_{μν}(r)` with
//!   `M_{μν}(r) = ∫∫ f_μ(s) f_ν(s') h^{n−1}(s + r) h^{n−1}(s' + r) g(s − s') ds ds'`
//!
//! [`SignalKernels`] holds the kernels for one geometry so that signals and
//! Jacobians can be re-evaluated for any amplitudes on the same pixels.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::object::SlitObject;
use crate::optics::{bucket_kernel_unchecked, DetectionRegion, OpticalSystem};
use crate::quadrature::GaussLegendre;

const PANEL_ORDER: usize = 16;
const MAX_REFINEMENTS: u32 = 8;
/// Norm-wise change tolerated between successive refinements of `c_μ`, `b_μ`.
pub const COEFF_TOLERANCE: f64 = 1e-8;
/// Norm-wise change tolerated between successive refinements of `M_{μν}`.
pub const HYBRID_TOLERANCE: f64 = 1e-6;
/// Signal values below this fraction of the maximum are set to zero.
pub const CLIP_FLOOR: f64 = 1e-14;
/// Negative values below `−NEGATIVE_LIMIT · max` indicate an integration failure.
pub const NEGATIVE_LIMIT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    /// All `n` photons detected in coincidence at `r`.
    Gn,
    /// `n − 1` photons detected at `r`, the last one ignored.
    GnMinus1,
    /// `n − 1` photons at `r`, the last one in a bucket detector outside the aperture.
    Hybrid,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Gn, Strategy::GnMinus1, Strategy::Hybrid];

    pub fn label(self) -> &'static str {
        match self {
            Strategy::Gn => "gn",
            Strategy::GnMinus1 => "gn1",
            Strategy::Hybrid => "hybrid",
        }
    }

    /// Whether the strategy images the object coherently (the PSF acts on a
    /// field amplitude, the signal being its squared modulus).
    pub fn is_coherent(self) -> bool {
        !matches!(self, Strategy::GnMinus1)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gn" | "Gn" => Ok(Strategy::Gn),
            "gn1" | "gn-1" | "Gn_minus_1" => Ok(Strategy::GnMinus1),
            "hybrid" | "Hybrid" => Ok(Strategy::Hybrid),
            other => Err(Error::domain(format!("unknown strategy '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementPlan {
    strategy: Strategy,
    n: u32,
    grid: Vec<f64>,
    region: Option<DetectionRegion>,
}

impl MeasurementPlan {
    pub fn new(
        strategy: Strategy,
        n: u32,
        grid: Vec<f64>,
        region: Option<DetectionRegion>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!(
                "photon number must be >= 2, got {n}"
            )));
        }
        if grid.is_empty() {
            return Err(Error::domain("sampling grid is empty"));
        }
        if grid.iter().any(|r| !r.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain(
                "sampling grid must be finite and strictly increasing",
            ));
        }
        let region = match (strategy, region) {
            (Strategy::Hybrid, None) => {
                return Err(Error::domain("hybrid strategy requires a detection region"))
            }
            (Strategy::Hybrid, r) => r,
            _ => None,
        };
        Ok(Self {
            strategy,
            n,
            grid,
            region,
        })
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn region(&self) -> Option<&DetectionRegion> {
        self.region.as_ref()
    }
}

/// Detector points with step `d/2` covering the image of the object support,
/// widened by `margin` (a length) on each side and centred on the image of the
/// object centre.
pub fn sampling_grid(obj: &SlitObject, margin: f64) -> Result<Vec<f64>> {
    if !(margin.is_finite() && margin >= 0.0) {
        return Err(Error::domain(format!(
            "grid margin must be >= 0, got {margin}"
        )));
    }
    let step = 0.5 * obj.slit_width();
    let (lo, hi) = obj.support();
    // h depends on s + r, so object point s images to r = −s.
    let centre = -0.5 * (lo + hi);
    let reach = 0.5 * (hi - lo) + margin;
    let half = ((reach / step) - 1e-9).ceil().max(0.0) as i64;
    Ok((-half..=half).map(|k| centre + k as f64 * step).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalVector {
    values: Vec<f64>,
    plan: MeasurementPlan,
}

impl SignalVector {
    /// Signal values for `plan`, one per grid point.
    pub fn from_values(values: Vec<f64>, plan: MeasurementPlan) -> Result<Self> {
        if values.len() != plan.grid.len() {
            return Err(Error::domain(format!(
                "{} values for {} grid points",
                values.len(),
                plan.grid.len()
            )));
        }
        Ok(Self { values, plan })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn plan(&self) -> &MeasurementPlan {
        &self.plan
    }

    pub fn scaled(&self, c: f64) -> SignalVector {
        SignalVector {
            values: self.values.iter().map(|v| v * c).collect(),
            plan: self.plan.clone(),
        }
    }

    /// Profile on which the strategy's effective PSF acts linearly: `√S` for
    /// coherent strategies, `S` itself for `G^(n−1)`.
    pub fn linear_response(&self) -> Vec<f64> {
        if self.plan.strategy.is_coherent() {
            self.values.iter().map(|v| v.sqrt()).collect()
        } else {
            self.values.clone()
        }
    }
}

/// `∂S(r_i)/∂θ_μ`, grid points by pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalJacobian {
    entries: DMatrix<f64>,
}

impl SignalJacobian {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn scaled(&self, c: f64) -> SignalJacobian {
        SignalJacobian {
            entries: &self.entries * c,
        }
    }

    pub fn from_entries(entries: DMatrix<f64>) -> Self {
        Self { entries }
    }
}

/// Composite Gauss-Legendre nodes on each pixel (pixel-local, left to right).
#[derive(Debug, Clone)]
struct PixelNodes {
    /// Node offsets from the pixel's left edge; identical for every pixel.
    offsets: Vec<f64>,
    weights: Vec<f64>,
}

impl PixelNodes {
    fn new(rule: &GaussLegendre, width: f64, panels: usize) -> Self {
        let (offsets, weights) = rule.composite(0.0, width, panels);
        Self { offsets, weights }
    }

    fn len(&self) -> usize {
        self.offsets.len()
    }
}

fn base_panels(width: f64, system: &OpticalSystem) -> usize {
    // One 16-point panel per ~2/k_max resolves the PSF oscillation comfortably.
    ((width * system.k_max() / 2.0).ceil() as usize).max(1)
}

/// Pixel integrals `∫ f_μ(s) h^m(s + r) ds` for every pixel of `obj`.
pub fn pixel_coeff(obj: &SlitObject, system: &OpticalSystem, r: f64, m: u32) -> Result<Vec<f64>> {
    if m < 1 {
        return Err(Error::domain("PSF power must be >= 1"));
    }
    if !r.is_finite() {
        return Err(Error::domain("detector coordinate must be finite"));
    }
    let pixels: Vec<usize> = (0..obj.pixel_count()).collect();
    let table = coefficient_table(obj, system, &[r], &pixels, m)?;
    Ok(table.into_iter().next().unwrap_or_default())
}

fn coefficients_at(
    obj: &SlitObject,
    system: &OpticalSystem,
    nodes: &PixelNodes,
    grid: &[f64],
    pixels: &[usize],
    m: u32,
) -> Vec<Vec<f64>> {
    grid.par_iter()
        .map(|&r| {
            pixels
                .iter()
                .map(|&mu| {
                    let left = obj.pixel_bounds(mu).0;
                    nodes
                        .offsets
                        .iter()
                        .zip(&nodes.weights)
                        .map(|(&x, &w)| w * system.psf_unchecked(left + x + r).powi(m as i32))
                        .sum()
                })
                .collect()
        })
        .collect()
}

fn max_abs_change(a: &[Vec<f64>], b: &[Vec<f64>]) -> (f64, f64) {
    let mut delta: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (ra, rb) in a.iter().zip(b) {
        for (&x, &y) in ra.iter().zip(rb) {
            delta = delta.max((x - y).abs());
            scale = scale.max(y.abs());
        }
    }
    (delta, scale)
}

fn coefficient_table(
    obj: &SlitObject,
    system: &OpticalSystem,
    grid: &[f64],
    pixels: &[usize],
    m: u32,
) -> Result<Vec<Vec<f64>>> {
    let rule = GaussLegendre::new(PANEL_ORDER)?;
    let panels = base_panels(obj.slit_width(), system);
    let mut prev = coefficients_at(
        obj,
        system,
        &PixelNodes::new(&rule, obj.slit_width(), panels),
        grid,
        pixels,
        m,
    );
    let mut last = (f64::NAN, f64::NAN);
    for level in 1..=MAX_REFINEMENTS {
        let nodes = PixelNodes::new(&rule, obj.slit_width(), panels << level);
        let next = coefficients_at(obj, system, &nodes, grid, pixels, m);
        let (delta, scale) = max_abs_change(&prev, &next);
        if delta <= COEFF_TOLERANCE * scale || scale == 0.0 {
            return Ok(next);
        }
        last = (delta, scale);
        prev = next;
    }
    Err(Error::numeric(
        "pixel_coeff",
        format!(
            "no convergence after {MAX_REFINEMENTS} refinements (m = {m}, last change {:.3e} of scale {:.3e})",
            last.0, last.1
        ),
    ))
}

/// Hybrid kernel `M(r)` for the active pixels, as a flattened symmetric matrix.
fn hybrid_kernel_at(
    obj: &SlitObject,
    system: &OpticalSystem,
    region: &DetectionRegion,
    nodes: &PixelNodes,
    grid: &[f64],
    pixels: &[usize],
    power: u32,
) -> Vec<Vec<f64>> {
    let q = nodes.len();
    let d = obj.slit_width();
    // g(s − s') depends on the pixel offset and the node pair only.
    let mut blocks: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for &mu in pixels {
        for &nu in pixels {
            let delta = mu as i64 - nu as i64;
            blocks.entry(delta).or_insert_with(|| {
                let shift = delta as f64 * d;
                let mut block = vec![0.0; q * q];
                for (a, &xa) in nodes.offsets.iter().enumerate() {
                    for (b, &xb) in nodes.offsets.iter().enumerate() {
                        block[a * q + b] = bucket_kernel_unchecked(shift + xa - xb, region);
                    }
                }
                block
            });
        }
    }
    let k = pixels.len();
    grid.par_iter()
        .map(|&r| {
            let weighted: Vec<Vec<f64>> = pixels
                .iter()
                .map(|&mu| {
                    let left = obj.pixel_bounds(mu).0;
                    nodes
                        .offsets
                        .iter()
                        .zip(&nodes.weights)
                        .map(|(&x, &w)| w * system.psf_unchecked(left + x + r).powi(power as i32))
                        .collect()
                })
                .collect();
            let mut m = vec![0.0; k * k];
            for i in 0..k {
                for j in i..k {
                    let block = &blocks[&(pixels[i] as i64 - pixels[j] as i64)];
                    let (wa, wb) = (&weighted[i], &weighted[j]);
                    let mut total = 0.0;
                    for a in 0..q {
                        let row = &block[a * q..(a + 1) * q];
                        let inner: f64 = row.iter().zip(wb).map(|(g, y)| g * y).sum();
                        total += wa[a] * inner;
                    }
                    m[i * k + j] = total;
                    m[j * k + i] = total;
                }
            }
            m
        })
        .collect()
}

fn hybrid_table(
    obj: &SlitObject,
    system: &OpticalSystem,
    region: &DetectionRegion,
    grid: &[f64],
    pixels: &[usize],
    n: u32,
) -> Result<Vec<Vec<f64>>> {
    let rule = GaussLegendre::new(PANEL_ORDER)?;
    // 32 nodes per pixel per axis at minimum.
    let panels = base_panels(obj.slit_width(), system).max(2);
    let build = |level: u32| {
        let nodes = PixelNodes::new(&rule, obj.slit_width(), panels << level);
        hybrid_kernel_at(obj, system, region, &nodes, grid, pixels, n - 1)
    };
    let mut prev = build(0);
    let mut last = (f64::NAN, f64::NAN);
    for level in 1..=MAX_REFINEMENTS {
        let next = build(level);
        let (delta, scale) = max_abs_change(&prev, &next);
        if delta <= HYBRID_TOLERANCE * scale || scale == 0.0 {
            return Ok(next);
        }
        last = (delta, scale);
        prev = next;
    }
    Err(Error::numeric(
        "signal_hybrid",
        format!(
            "nested quadrature did not converge (last change {:.3e} of scale {:.3e})",
            last.0, last.1
        ),
    ))
}

#[derive(Debug, Clone)]
enum KernelData {
    /// `c_μ(r)` for `G^(n)` or `b_μ(r)` for `G^(n−1)`, indexed `[r][active pixel]`.
    Coefficients(Vec<Vec<f64>>),
    /// `M_{μν}(r)`, indexed `[r][i * k + j]` over active pixels.
    Hybrid(Vec<Vec<f64>>),
}

/// Geometry kernels of one measurement plan on one pixel layout.
///
/// Pixels that are opaque in the object used to build the kernels contribute
/// neither to the signal nor to its gradient (every gradient carries a factor
/// `θ_μ^{n−1}`), so they are skipped; amplitudes passed later must keep them at zero.
#[derive(Debug, Clone)]
pub struct SignalKernels {
    plan: MeasurementPlan,
    pixel_count: usize,
    active: Vec<usize>,
    data: KernelData,
}

impl SignalKernels {
    pub fn build(obj: &SlitObject, system: &OpticalSystem, plan: &MeasurementPlan) -> Result<Self> {
        let active: Vec<usize> = obj
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != 0.0)
            .map(|(mu, _)| mu)
            .collect();
        let n = plan.n;
        let data = match plan.strategy {
            Strategy::Gn => {
                KernelData::Coefficients(coefficient_table(obj, system, &plan.grid, &active, n)?)
            }
            Strategy::GnMinus1 => KernelData::Coefficients(coefficient_table(
                obj,
                system,
                &plan.grid,
                &active,
                2 * (n - 1),
            )?),
            Strategy::Hybrid => {
                let region = plan
                    .region
                    .as_ref()
                    .ok_or_else(|| Error::domain("hybrid strategy requires a detection region"))?;
                KernelData::Hybrid(hybrid_table(obj, system, region, &plan.grid, &active, n)?)
            }
        };
        Ok(Self {
            plan: plan.clone(),
            pixel_count: obj.pixel_count(),
            active,
            data,
        })
    }

    pub fn plan(&self) -> &MeasurementPlan {
        &self.plan
    }

    fn active_amplitudes(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if theta.len() != self.pixel_count {
            return Err(Error::domain(format!(
                "expected {} amplitudes, got {}",
                self.pixel_count,
                theta.len()
            )));
        }
        let mut is_active = vec![false; self.pixel_count];
        for &mu in &self.active {
            is_active[mu] = true;
        }
        if let Some(mu) = (0..self.pixel_count).find(|&mu| !is_active[mu] && theta[mu] != 0.0) {
            return Err(Error::domain(format!(
                "pixel {mu} was opaque when the kernels were built"
            )));
        }
        Ok(self.active.iter().map(|&mu| theta[mu]).collect())
    }

    /// Unclipped signal values.
    fn raw_signal(&self, active_theta: &[f64]) -> Vec<f64> {
        let n = self.plan.n as i32;
        match &self.data {
            KernelData::Coefficients(table) => {
                let (power, square) = match self.plan.strategy {
                    Strategy::Gn => (n, true),
                    _ => (2 * (n - 1), false),
                };
                let weights: Vec<f64> = active_theta.iter().map(|t| t.powi(power)).collect();
                table
                    .iter()
                    .map(|row| {
                        let s: f64 = row.iter().zip(&weights).map(|(c, w)| c * w).sum();
                        if square {
                            s * s
                        } else {
                            s
                        }
                    })
                    .collect()
            }
            KernelData::Hybrid(table) => {
                let k = active_theta.len();
                let tn: Vec<f64> = active_theta.iter().map(|t| t.powi(n)).collect();
                table
                    .iter()
                    .map(|m| {
                        let mut s = 0.0;
                        for i in 0..k {
                            let row: f64 = (0..k).map(|j| m[i * k + j] * tn[j]).sum();
                            s += tn[i] * row;
                        }
                        s
                    })
                    .collect()
            }
        }
    }

    pub fn signal(&self, theta: &[f64]) -> Result<SignalVector> {
        let active_theta = self.active_amplitudes(theta)?;
        let mut values = self.raw_signal(&active_theta);
        let max = values.iter().cloned().fold(0.0, f64::max);
        if let Some((i, &v)) = values
            .iter()
            .enumerate()
            .find(|(_, &v)| v < -NEGATIVE_LIMIT * max)
        {
            return Err(Error::numeric(
                "signal",
                format!(
                    "value {v:.3e} at grid point {i} is negative beyond roundoff (max {max:.3e})"
                ),
            ));
        }
        for v in values.iter_mut() {
            if *v < CLIP_FLOOR * max {
                *v = 0.0;
            }
        }
        Ok(SignalVector {
            values,
            plan: self.plan.clone(),
        })
    }

    /// Closed-form `∂S/∂θ_μ`.
    pub fn jacobian(&self, theta: &[f64]) -> Result<SignalJacobian> {
        let active_theta = self.active_amplitudes(theta)?;
        let n = self.plan.n as i32;
        let rows = self.plan.grid.len();
        let mut entries = DMatrix::zeros(rows, self.pixel_count);
        match &self.data {
            KernelData::Coefficients(table) => match self.plan.strategy {
                Strategy::Gn => {
                    let tn: Vec<f64> = active_theta.iter().map(|t| t.powi(n)).collect();
                    for (i, row) in table.iter().enumerate() {
                        let amp: f64 = row.iter().zip(&tn).map(|(c, w)| c * w).sum();
                        for (a, &mu) in self.active.iter().enumerate() {
                            entries[(i, mu)] =
                                2.0 * n as f64 * active_theta[a].powi(n - 1) * row[a] * amp;
                        }
                    }
                }
                _ => {
                    for (i, row) in table.iter().enumerate() {
                        for (a, &mu) in self.active.iter().enumerate() {
                            entries[(i, mu)] =
                                2.0 * (n - 1) as f64 * active_theta[a].powi(2 * n - 3) * row[a];
                        }
                    }
                }
            },
            KernelData::Hybrid(table) => {
                let k = active_theta.len();
                let tn: Vec<f64> = active_theta.iter().map(|t| t.powi(n)).collect();
                for (i, m) in table.iter().enumerate() {
                    for (a, &mu) in self.active.iter().enumerate() {
                        let row: f64 = (0..k).map(|j| m[a * k + j] * tn[j]).sum();
                        entries[(i, mu)] = 2.0 * n as f64 * active_theta[a].powi(n - 1) * row;
                    }
                }
            }
        }
        Ok(SignalJacobian { entries })
    }
}

fn evaluate(
    obj: &SlitObject,
    system: &OpticalSystem,
    strategy: Strategy,
    n: u32,
    region: Option<DetectionRegion>,
    grid: &[f64],
) -> Result<SignalVector> {
    let plan = MeasurementPlan::new(strategy, n, grid.to_vec(), region)?;
    SignalKernels::build(obj, system, &plan)?.signal(obj.amplitudes())
}

/// `G^(n)(r)` on `grid`.
pub fn signal_gn(
    obj: &SlitObject,
    system: &OpticalSystem,
    n: u32,
    grid: &[f64],
) -> Result<SignalVector> {
    evaluate(obj, system, Strategy::Gn, n, None, grid)
}

/// `G^(n−1)(r)` on `grid`.
pub fn signal_gn_minus_1(
    obj: &SlitObject,
    system: &OpticalSystem,
    n: u32,
    grid: &[f64],
) -> Result<SignalVector> {
    evaluate(obj, system, Strategy::GnMinus1, n, None, grid)
}

/// `G^(n−1,1)(r, Ω)` on `grid`.
pub fn signal_hybrid(
    obj: &SlitObject,
    system: &OpticalSystem,
    n: u32,
    region: &DetectionRegion,
    grid: &[f64],
) -> Result<SignalVector> {
    evaluate(obj, system, Strategy::Hybrid, n, Some(*region), grid)
}

pub fn signal_for_plan(
    obj: &SlitObject,
    system: &OpticalSystem,
    plan: &MeasurementPlan,
) -> Result<SignalVector> {
    SignalKernels::build(obj, system, plan)?.signal(obj.amplitudes())
}

pub fn signal_jacobian(
    obj: &SlitObject,
    system: &OpticalSystem,
    plan: &MeasurementPlan,
) -> Result<SignalJacobian> {
    SignalKernels::build(obj, system, plan)?.jacobian(obj.amplitudes())
}

/// Overall detection probability `p = Σ_i S(r_i)`.
pub fn detection_probability(sig: &SignalVector) -> f64 {
    sig.values.iter().sum()
}

/// Full width at half maximum of a sampled single-peaked profile, with linear
/// interpolation of the half-maximum crossings on either side of the peak.
pub fn fwhm(grid: &[f64], profile: &[f64]) -> Result<f64> {
    if grid.len() != profile.len() || grid.len() < 3 {
        return Err(Error::Shape(
            "fwhm needs matching grid and profile of length >= 3".into(),
        ));
    }
    let (peak_idx, &peak) = profile
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::Shape("empty profile".into()))?;
    if peak <= 0.0 {
        return Err(Error::Shape("profile has no positive peak".into()));
    }
    let half = 0.5 * peak;
    let crossing = |i: usize, j: usize| {
        let t = (profile[i] - half) / (profile[i] - profile[j]);
        grid[i] + t * (grid[j] - grid[i])
    };
    let right = (peak_idx + 1..profile.len())
        .find(|&j| profile[j] < half)
        .map(|j| crossing(j - 1, j))
        .ok_or_else(|| Error::Shape("profile does not fall to half maximum on the right".into()))?;
    let left = (0..peak_idx)
        .rev()
        .find(|&j| profile[j] < half)
        .map(|j| crossing(j + 1, j))
        .ok_or_else(|| Error::Shape("profile does not fall to half maximum on the left".into()))?;
    Ok(right - left)
}
