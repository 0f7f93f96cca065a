//! Per-event Fisher information, Cramér-Rao bound and resolution thresholds.
//!
//! For a signal sampled at `r_i`, the Fisher matrix per detection event is
//!
//! ```text
//! F_μν = Σ_i (∂_μ S(r_i) ∂_ν S(r_i) / S(r_i)) / Σ_i S(r_i)
//! ```
//!
//! and `Tr F⁻¹ / N` bounds the summed variance of the amplitude estimates after
//! `N` events. The resolution at an event budget `N_max` is the smallest slit
//! width `d` for which `Tr F⁻¹ ≤ N_max`.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::object::SlitObject;
use crate::optics::{DetectionRegion, OpticalSystem};
use crate::signal::{
    sampling_grid, MeasurementPlan, SignalJacobian, SignalKernels, SignalVector, Strategy,
};

/// Grid points with `S < FISHER_FLOOR · max S` are left out of the Fisher sum.
pub const FISHER_FLOOR: f64 = 1e-12;
/// Fisher matrices with a larger condition number are treated as singular.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Bisection stops once the bracket is narrower than this fraction of `d_R`.
pub const THRESHOLD_RESOLUTION: f64 = 1e-3;

/// `Tr F⁻¹`, or `+∞` with `singular` set when `F` is too ill-conditioned to invert.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrbTrace {
    pub value: f64,
    pub condition: f64,
    pub singular: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FisherReport {
    pub matrix: DMatrix<f64>,
    pub trace_inv: CrbTrace,
    /// Overall detection probability over all grid points.
    pub p: f64,
    pub plan: MeasurementPlan,
    pub excluded_points: Vec<usize>,
}

pub fn fisher_matrix(sig: &SignalVector, jac: &SignalJacobian) -> Result<FisherReport> {
    let values = sig.values();
    let entries = jac.entries();
    if entries.nrows() != values.len() {
        return Err(Error::domain(format!(
            "Jacobian has {} rows for {} grid points",
            entries.nrows(),
            values.len()
        )));
    }
    let params = entries.ncols();
    let max = values.iter().cloned().fold(0.0, f64::max);
    let floor = FISHER_FLOOR * max;
    let mut matrix = DMatrix::<f64>::zeros(params, params);
    let mut excluded = Vec::new();
    for (i, &s) in values.iter().enumerate() {
        if max <= 0.0 || s < floor || s <= 0.0 {
            excluded.push(i);
            continue;
        }
        let row = entries.row(i);
        for mu in 0..params {
            let a = row[mu] / s;
            if a == 0.0 {
                continue;
            }
            for nu in mu..params {
                matrix[(mu, nu)] += a * row[nu];
            }
        }
    }
    if excluded.len() == values.len() {
        return Err(Error::DegenerateSignal {
            points: values.len(),
        });
    }
    let p: f64 = values.iter().sum();
    for mu in 0..params {
        for nu in mu..params {
            let v = matrix[(mu, nu)] / p;
            matrix[(mu, nu)] = v;
            matrix[(nu, mu)] = v;
        }
    }
    let trace_inv = crb_trace(&matrix)?;
    Ok(FisherReport {
        matrix,
        trace_inv,
        p,
        plan: sig.plan().clone(),
        excluded_points: excluded,
    })
}

/// `Tr F⁻¹` through a Cholesky factorisation, guarded by the eigenvalue
/// condition number.
pub fn crb_trace(f: &DMatrix<f64>) -> Result<CrbTrace> {
    if !f.is_square() || f.nrows() == 0 {
        return Err(Error::domain("Fisher matrix must be square and non-empty"));
    }
    let scale = f.amax();
    if !scale.is_finite() {
        return Err(Error::domain("Fisher matrix has non-finite entries"));
    }
    let m = f.nrows();
    for i in 0..m {
        for j in (i + 1)..m {
            if (f[(i, j)] - f[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::domain(format!(
                    "Fisher matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    let singular = |condition| CrbTrace {
        value: f64::INFINITY,
        condition,
        singular: true,
    };
    if scale == 0.0 {
        return Ok(singular(f64::INFINITY));
    }
    let sym = (f + f.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym.clone()).eigenvalues;
    let lmax = eig.max();
    let lmin = eig.min();
    let condition = if lmin > 0.0 {
        lmax / lmin
    } else {
        f64::INFINITY
    };
    if condition > CONDITION_LIMIT {
        return Ok(singular(condition));
    }
    let Some(chol) = Cholesky::new(sym) else {
        return Ok(singular(condition));
    };
    // Tr F⁻¹ = ‖L⁻¹‖_F² for F = L Lᵀ.
    let l_inv = chol
        .l()
        .solve_lower_triangular(&DMatrix::identity(m, m))
        .ok_or_else(|| Error::numeric("crb_trace", "triangular solve failed"))?;
    Ok(CrbTrace {
        value: l_inv.norm_squared(),
        condition,
        singular: false,
    })
}

/// Everything needed to evaluate `Tr F⁻¹` for the benchmark object at any slit width.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanSetup {
    strategy: Strategy,
    amplitudes: Vec<f64>,
    system: OpticalSystem,
    n: u32,
    region: Option<DetectionRegion>,
    grid_margin: f64,
}

impl ScanSetup {
    /// `grid_margin` is a length added to each side of the sampled image.
    pub fn new(
        strategy: Strategy,
        amplitudes: Vec<f64>,
        system: OpticalSystem,
        n: u32,
        region: Option<DetectionRegion>,
        grid_margin: f64,
    ) -> Result<Self> {
        // Validate through the constructors that will be used per point.
        SlitObject::centered(1.0, amplitudes.clone())?;
        MeasurementPlan::new(strategy, n, vec![0.0], region)?;
        if !(grid_margin.is_finite() && grid_margin >= 0.0) {
            return Err(Error::domain(format!(
                "grid margin must be >= 0, got {grid_margin}"
            )));
        }
        Ok(Self {
            strategy,
            amplitudes,
            system,
            n,
            region: if strategy == Strategy::Hybrid {
                region
            } else {
                None
            },
            grid_margin,
        })
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn system(&self) -> &OpticalSystem {
        &self.system
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    /// Same object and optics measured with another strategy.
    pub fn with_strategy(
        &self,
        strategy: Strategy,
        region: Option<DetectionRegion>,
    ) -> Result<Self> {
        Self::new(
            strategy,
            self.amplitudes.clone(),
            self.system,
            self.n,
            region,
            self.grid_margin,
        )
    }

    pub fn object_at(&self, d: f64) -> Result<SlitObject> {
        SlitObject::centered(d, self.amplitudes.clone())
    }

    pub fn plan_at(&self, d: f64) -> Result<MeasurementPlan> {
        let obj = self.object_at(d)?;
        MeasurementPlan::new(
            self.strategy,
            self.n,
            sampling_grid(&obj, self.grid_margin)?,
            self.region,
        )
    }

    /// Signal, Jacobian and Fisher report at slit width `d`.
    pub fn evaluate(&self, d: f64) -> Result<FisherReport> {
        let obj = self.object_at(d)?;
        let plan = self.plan_at(d)?;
        let kernels = SignalKernels::build(&obj, &self.system, &plan)?;
        let sig = kernels.signal(obj.amplitudes())?;
        let jac = kernels.jacobian(obj.amplitudes())?;
        fisher_matrix(&sig, &jac)
    }

    /// Like [`ScanSetup::evaluate`], but failures become divergent points.
    pub fn point(&self, d: f64) -> ScanPoint {
        match self.evaluate(d) {
            Ok(report) => ScanPoint {
                d,
                trace_inv: report.trace_inv.value,
                p: Some(report.p),
                status: if report.trace_inv.singular {
                    PointStatus::Singular
                } else {
                    PointStatus::Regular
                },
            },
            Err(Error::DegenerateSignal { .. }) => ScanPoint {
                d,
                trace_inv: f64::INFINITY,
                p: Some(0.0),
                status: PointStatus::Degenerate,
            },
            Err(e) => ScanPoint {
                d,
                trace_inv: f64::INFINITY,
                p: None,
                status: PointStatus::Failed(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointStatus {
    Regular,
    /// Fisher matrix beyond the condition limit.
    Singular,
    /// Signal entirely below the detection floor.
    Degenerate,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub d: f64,
    /// `Tr F⁻¹`; `+∞` unless `status` is `Regular`.
    pub trace_inv: f64,
    pub p: Option<f64>,
    pub status: PointStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionScan {
    pub setup: ScanSetup,
    pub points: Vec<ScanPoint>,
}

impl ResolutionScan {
    pub fn d_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.d).collect()
    }
}

/// `Tr F⁻¹` and `p` over increasing slit widths. Points are independent and
/// evaluated in parallel; per-point failures are recorded, not propagated.
pub fn resolution_scan(setup: &ScanSetup, d_values: &[f64]) -> Result<ResolutionScan> {
    if d_values.is_empty() {
        return Err(Error::domain("no slit widths to scan"));
    }
    if d_values.iter().any(|&d| !(d.is_finite() && d > 0.0))
        || d_values.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::domain(
            "slit widths must be positive and strictly increasing",
        ));
    }
    let points = d_values.par_iter().map(|&d| setup.point(d)).collect();
    Ok(ResolutionScan {
        setup: setup.clone(),
        points,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionResult {
    pub d_min: f64,
    pub n_max: f64,
    pub strategy: Strategy,
    pub rate_adjusted: bool,
    /// `(d, Tr F⁻¹)` for every evaluated width, scan and bisection, sorted by `d`.
    pub trace: Vec<(f64, f64)>,
}

struct Criterion<'a> {
    setup: &'a ScanSetup,
    reference: Option<&'a ScanSetup>,
    n_max: f64,
}

impl Criterion<'_> {
    fn budget(&self, p: Option<f64>, p_ref: Option<f64>) -> Option<f64> {
        match self.reference {
            None => Some(self.n_max),
            Some(_) => match (p, p_ref) {
                (Some(p), Some(q)) if q > 0.0 => Some(self.n_max * p / q),
                _ => None,
            },
        }
    }

    fn holds(&self, point: &ScanPoint, reference: Option<&ScanPoint>) -> bool {
        point.status == PointStatus::Regular
            && self
                .budget(point.p, reference.and_then(|r| r.p))
                .is_some_and(|b| point.trace_inv <= b)
    }

    fn evaluate(&self, d: f64) -> (ScanPoint, bool) {
        let point = self.setup.point(d);
        let reference = self.reference.map(|r| r.point(d));
        let ok = self.holds(&point, reference.as_ref());
        (point, ok)
    }
}

/// Smallest slit width with `Tr F⁻¹ ≤ N_max`, bracketed on the scan and refined
/// by bisection. With `rate_reference` the budget becomes
/// `N_max · p(d) / p_ref(d)`, i.e. the events collected in the time the
/// reference strategy needs for `N_max`.
pub fn resolution_threshold(
    scan: &ResolutionScan,
    n_max: f64,
    rate_reference: Option<&ResolutionScan>,
) -> Result<ResolutionResult> {
    if !(n_max.is_finite() && n_max > 0.0) {
        return Err(Error::domain(format!(
            "event budget must be positive, got {n_max}"
        )));
    }
    if let Some(reference) = rate_reference {
        if reference.d_values() != scan.d_values() {
            return Err(Error::domain(
                "rate reference scan must share the slit widths",
            ));
        }
    }
    let criterion = Criterion {
        setup: &scan.setup,
        reference: rate_reference.map(|r| &r.setup),
        n_max,
    };
    let flags: Vec<bool> = scan
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| criterion.holds(p, rate_reference.map(|r| &r.points[i])))
        .collect();
    let (d_lo, d_hi) = (scan.points[0].d, scan.points[scan.points.len() - 1].d);
    let first = flags.iter().position(|&ok| ok).ok_or(Error::Bracket {
        which: "never satisfied",
        d_lo,
        d_hi,
    })?;
    if first == 0 {
        return Err(Error::Bracket {
            which: "already satisfied at the smallest width",
            d_lo,
            d_hi,
        });
    }
    let mut trace: Vec<(f64, f64)> = scan.points.iter().map(|p| (p.d, p.trace_inv)).collect();
    let mut lo = scan.points[first - 1].d;
    let mut hi = scan.points[first].d;
    let tolerance = THRESHOLD_RESOLUTION * scan.setup.system.rayleigh_length();
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        let (point, ok) = criterion.evaluate(mid);
        trace.push((mid, point.trace_inv));
        if ok {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    trace.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(ResolutionResult {
        d_min: hi,
        n_max,
        strategy: scan.setup.strategy,
        rate_adjusted: rate_reference.is_some(),
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub d: f64,
    /// `p_hybrid / p_gn`; `None` where the reference probability vanishes.
    pub ratio: Option<f64>,
}

/// Elementwise ratio of overall detection probabilities of two scans.
pub fn rate_ratio(
    numerator: &ResolutionScan,
    reference: &ResolutionScan,
) -> Result<Vec<RatePoint>> {
    if numerator.d_values() != reference.d_values() {
        return Err(Error::domain("scans must share the slit widths"));
    }
    Ok(numerator
        .points
        .iter()
        .zip(&reference.points)
        .map(|(a, b)| RatePoint {
            d: a.d,
            ratio: match (a.p, b.p) {
                (Some(pa), Some(pb)) if pb > 0.0 => Some(pa / pb),
                _ => None,
            },
        })
        .collect())
}
