//! Pixelized transmission objects.

use crate::error::{ensure_finite, Error, Result};

/// Row of contiguous equal-width slits with real transmission amplitudes.
///
/// Pixel `μ` covers `[origin + μ·d, origin + (μ+1)·d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlitObject {
    slit_width: f64,
    amplitudes: Vec<f64>,
    origin: f64,
}

impl SlitObject {
    pub fn new(slit_width: f64, amplitudes: Vec<f64>, origin: f64) -> Result<Self> {
        if !(slit_width.is_finite() && slit_width > 0.0) {
            return Err(Error::domain(format!(
                "slit width must be positive, got {slit_width}"
            )));
        }
        ensure_finite(origin, "object origin")?;
        if amplitudes.is_empty() {
            return Err(Error::domain("object needs at least one slit"));
        }
        check_amplitudes(&amplitudes)?;
        Ok(Self {
            slit_width,
            amplitudes,
            origin,
        })
    }

    /// Object centred on the optical axis.
    pub fn centered(slit_width: f64, amplitudes: Vec<f64>) -> Result<Self> {
        let origin = -0.5 * slit_width * amplitudes.len() as f64;
        Self::new(slit_width, amplitudes, origin)
    }

    pub fn slit_width(&self) -> f64 {
        self.slit_width
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn pixel_count(&self) -> usize {
        self.amplitudes.len()
    }

    /// `[left, right)` edges of pixel `mu`.
    pub fn pixel_bounds(&self, mu: usize) -> (f64, f64) {
        let left = self.origin + mu as f64 * self.slit_width;
        (left, left + self.slit_width)
    }

    /// `[left, right)` extent of the whole object.
    pub fn support(&self) -> (f64, f64) {
        let left = self.origin;
        (left, left + self.pixel_count() as f64 * self.slit_width)
    }

    /// Index of the pixel containing `s`, if any.
    pub fn pixel_index(&self, s: f64) -> Option<usize> {
        let t = (s - self.origin) / self.slit_width;
        if t < 0.0 {
            return None;
        }
        let mu = t.floor() as usize;
        if mu >= self.pixel_count() {
            return None;
        }
        // Guard the right-open convention against rounding in the division.
        let (left, right) = self.pixel_bounds(mu);
        if s < left {
            mu.checked_sub(1)
        } else if s >= right {
            (mu + 1 < self.pixel_count()).then_some(mu + 1)
        } else {
            Some(mu)
        }
    }

    /// Transmission amplitude `A(s)`.
    pub fn amplitude_at(&self, s: f64) -> Result<f64> {
        ensure_finite(s, "object coordinate")?;
        Ok(self.pixel_index(s).map_or(0.0, |mu| self.amplitudes[mu]))
    }

    /// Same geometry with different amplitudes.
    pub fn with_amplitudes(&self, amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != self.pixel_count() {
            return Err(Error::domain(format!(
                "expected {} amplitudes, got {}",
                self.pixel_count(),
                amplitudes.len()
            )));
        }
        check_amplitudes(&amplitudes)?;
        Ok(Self {
            amplitudes,
            ..self.clone()
        })
    }

    /// Same amplitudes, different slit width, still centred where it was.
    pub fn rescaled(&self, slit_width: f64) -> Result<Self> {
        let centre = 0.5 * (self.support().0 + self.support().1);
        let origin = centre - 0.5 * slit_width * self.pixel_count() as f64;
        Self::new(slit_width, self.amplitudes.clone(), origin)
    }
}

fn check_amplitudes(amplitudes: &[f64]) -> Result<()> {
    match amplitudes
        .iter()
        .position(|a| !(a.is_finite() && (0.0..=1.0).contains(a)))
    {
        Some(i) => Err(Error::domain(format!(
            "amplitude {i} = {} outside [0, 1]",
            amplitudes[i]
        ))),
        None => Ok(()),
    }
}

/// Two point-like pinholes at `+d` and `−d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinholePair {
    half_separation: f64,
}

impl PinholePair {
    pub fn new(half_separation: f64) -> Result<Self> {
        if !(half_separation.is_finite() && half_separation > 0.0) {
            return Err(Error::domain(format!(
                "pinhole half-separation must be positive, got {half_separation}"
            )));
        }
        Ok(Self { half_separation })
    }

    pub fn half_separation(&self) -> f64 {
        self.half_separation
    }

    /// Two narrow slits of width `width` centred on the pinholes, unit amplitude.
    pub fn as_slits(&self, width: f64) -> Result<SlitObject> {
        let d = self.half_separation;
        if width >= d {
            return Err(Error::domain(
                "pinhole width must be below the half-separation",
            ));
        }
        // Contiguous pixels are required, so fill the gap with an opaque pixel
        // of the same width when it tiles exactly; otherwise use three pixels.
        let gap = 2.0 * d - width;
        let pixels = (gap / width).round() as usize;
        if pixels >= 1 && ((pixels as f64) * width - gap).abs() < 1e-9 * gap {
            let mut amps = vec![0.0; pixels + 2];
            amps[0] = 1.0;
            amps[pixels + 1] = 1.0;
            SlitObject::new(width, amps, -d - 0.5 * width)
        } else {
            Err(Error::domain(
                "pinhole width must tile the gap between the pinholes",
            ))
        }
    }
}

/// Benchmark slit objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectTag {
    /// Amplitudes spanning 0.5–1.
    A,
    /// Amplitudes spanning 0.9–1.
    C,
}

const PATTERN_A: [f64; 5] = [1.0, 0.5, 0.8, 0.6, 0.9];
const PATTERN_C: [f64; 5] = [1.0, 0.9, 0.95, 0.92, 0.97];

/// Slit count of the benchmark objects.
pub const DEFAULT_SLIT_COUNT: usize = 9;

impl ObjectTag {
    /// Benchmark amplitudes: the five-value pattern repeated up to `DEFAULT_SLIT_COUNT`.
    pub fn amplitudes(self) -> Vec<f64> {
        let pattern = match self {
            ObjectTag::A => &PATTERN_A,
            ObjectTag::C => &PATTERN_C,
        };
        pattern
            .iter()
            .copied()
            .cycle()
            .take(DEFAULT_SLIT_COUNT)
            .collect()
    }
}

/// Benchmark object of slit width `d`, centred on the axis.
pub fn default_object(tag: ObjectTag, d: f64) -> Result<SlitObject> {
    SlitObject::centered(d, tag.amplitudes())
}
