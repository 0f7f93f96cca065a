//! Aperture-limited optical system: sombrero PSF and bucket-detector kernel.
//!
//! Object and detector coordinates are scalars along the axis across the slits;
//! the radial profiles of the 2D disk and annulus integrals are applied to the
//! 1D separation.

use std::f64::consts::PI;

use crate::error::{ensure_finite, Error, Result};
use crate::special::{somb_unchecked, J1_FIRST_ZERO};

/// Overall constant multiplying `somb(k_max |u|)` in the PSF.
///
/// The disk integral `∫_{|k|≤k_max} d²k e^{ik·u}` equals `π k_max² somb(k_max |u|)`.
/// `Doubled` uses twice that constant. Fisher information is insensitive to
/// the choice; detection-rate ratios between strategies with different PSF
/// powers are not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PsfNormalization {
    #[default]
    Exact,
    Doubled,
}

impl PsfNormalization {
    fn factor(self) -> f64 {
        match self {
            PsfNormalization::Exact => PI,
            PsfNormalization::Doubled => 2.0 * PI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalSystem {
    k_max: f64,
    normalization: PsfNormalization,
}

impl OpticalSystem {
    pub fn new(k_max: f64) -> Result<Self> {
        Self::with_normalization(k_max, PsfNormalization::Exact)
    }

    pub fn with_normalization(k_max: f64, normalization: PsfNormalization) -> Result<Self> {
        if !(k_max.is_finite() && k_max > 0.0) {
            return Err(Error::domain(format!(
                "k_max must be positive, got {k_max}"
            )));
        }
        Ok(Self {
            k_max,
            normalization,
        })
    }

    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    pub fn normalization(&self) -> PsfNormalization {
        self.normalization
    }

    /// Rayleigh length: the first zero of the PSF.
    pub fn rayleigh_length(&self) -> f64 {
        J1_FIRST_ZERO / self.k_max
    }

    /// Value of the PSF at zero separation.
    pub fn psf_peak(&self) -> f64 {
        self.normalization.factor() * self.k_max * self.k_max
    }

    /// PSF `h(s, r)` as a function of `u = s + r`.
    pub fn psf(&self, u: f64) -> Result<f64> {
        ensure_finite(u, "psf argument")?;
        Ok(self.psf_unchecked(u))
    }

    #[inline]
    pub(crate) fn psf_unchecked(&self, u: f64) -> f64 {
        self.psf_peak() * somb_unchecked(self.k_max * u)
    }
}

/// Centred annulus `k_lo ≤ |k| ≤ k_hi` in transverse-momentum space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionRegion {
    k_lo: f64,
    k_hi: f64,
}

impl DetectionRegion {
    pub fn new(k_lo: f64, k_hi: f64) -> Result<Self> {
        if !(k_lo.is_finite() && k_hi.is_finite() && k_lo >= 0.0 && k_hi > k_lo) {
            return Err(Error::domain(format!(
                "detection region needs 0 <= k_lo < k_hi, got [{k_lo}, {k_hi}]"
            )));
        }
        Ok(Self { k_lo, k_hi })
    }

    /// Annulus `[lo·k_max, hi·k_max]`.
    pub fn in_units_of(system: &OpticalSystem, lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo * system.k_max(), hi * system.k_max())
    }

    pub fn k_lo(&self) -> f64 {
        self.k_lo
    }

    pub fn k_hi(&self) -> f64 {
        self.k_hi
    }

    pub fn area(&self) -> f64 {
        PI * (self.k_hi * self.k_hi - self.k_lo * self.k_lo)
    }
}

/// Bucket-detection kernel `g(Δ) = ∫_Ω d²k e^{ik·Δ}` for the annulus `Ω`.
pub fn bucket_kernel(delta: f64, region: &DetectionRegion) -> Result<f64> {
    ensure_finite(delta, "bucket_kernel argument")?;
    Ok(bucket_kernel_unchecked(delta, region))
}

#[inline]
pub(crate) fn bucket_kernel_unchecked(delta: f64, region: &DetectionRegion) -> f64 {
    // Difference of two disk integrals; each is π k² somb(k|Δ|).
    let (lo, hi) = (region.k_lo, region.k_hi);
    let outer = PI * hi * hi * somb_unchecked(hi * delta);
    if lo == 0.0 {
        outer
    } else {
        outer - PI * lo * lo * somb_unchecked(lo * delta)
    }
}
