//! Resolution limits of quantum imaging with pixelized slit objects.
//!
//! The crate models an aperture-limited imaging system illuminated by `n`-photon
//! states and compares three measurement strategies: the full `n`-photon
//! correlation `G^(n)`, the `(n−1)`-photon correlation `G^(n−1)`, and a hybrid
//! that conditions `G^(n−1)` on a bucket detection in momentum space. Each
//! strategy's signal feeds a Fisher-information analysis that yields the
//! smallest resolvable slit width for a given number of detection events.

pub mod error;
pub mod inference;
pub mod noon;
pub mod object;
pub mod optics;
pub mod quadrature;
pub mod signal;
pub mod special;

pub use error::{Error, Result};
pub use inference::{
    crb_trace, fisher_matrix, rate_ratio, resolution_scan, resolution_threshold, CrbTrace,
    FisherReport, PointStatus, RatePoint, ResolutionResult, ResolutionScan, ScanPoint, ScanSetup,
};
pub use noon::{noon_conditioned, noon_gn, noon_gn_minus_1, visibility, NoonScenario, PeakLocator};
pub use object::{default_object, ObjectTag, PinholePair, SlitObject, DEFAULT_SLIT_COUNT};
pub use optics::{bucket_kernel, DetectionRegion, OpticalSystem, PsfNormalization};
pub use signal::{
    detection_probability, fwhm, sampling_grid, signal_for_plan, signal_gn, signal_gn_minus_1,
    signal_hybrid, signal_jacobian, MeasurementPlan, SignalJacobian, SignalKernels, SignalVector,
    Strategy,
};
