//! Turns a validated config into core calls and a table plus plot.

use std::f64::consts::FRAC_PI_2;

use qsuperres_core::{
    noon_conditioned, noon_gn, noon_gn_minus_1, rate_ratio, resolution_scan, resolution_threshold,
    sampling_grid, DetectionRegion, MeasurementPlan, NoonScenario, ObjectTag, OpticalSystem,
    PointStatus, PsfNormalization, ResolutionScan, ScanSetup, SignalKernels, SlitObject, Strategy,
};

use crate::config::{PsfNorm, ScenarioConfig, ScenarioKind, StrategyName, Tag};
use crate::emit::{Axes, Curve};
use crate::error::CliError;

/// Tabulated result of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub curves: Vec<Curve>,
    pub axes: Axes,
    /// Human-readable summary lines.
    pub notes: Vec<String>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

fn strategy(name: StrategyName) -> Strategy {
    match name {
        StrategyName::Gn => Strategy::Gn,
        StrategyName::GnMinus1 => Strategy::GnMinus1,
        StrategyName::Hybrid => Strategy::Hybrid,
    }
}

/// Config values converted to physical units and checked.
struct Resolved {
    system: OpticalSystem,
    dr: f64,
    amplitudes: Vec<f64>,
    region: DetectionRegion,
    strategies: Vec<Strategy>,
}

fn resolve(cfg: &ScenarioConfig) -> Result<Resolved, CliError> {
    let norm = match cfg.system.psf_norm {
        PsfNorm::Exact => PsfNormalization::Exact,
        PsfNorm::Doubled => PsfNormalization::Doubled,
    };
    let system = OpticalSystem::with_normalization(cfg.system.k_max, norm)
        .map_err(|e| invalid(format!("system: {e}")))?;
    let amplitudes = match (&cfg.object.tag, &cfg.object.amplitudes) {
        (Some(_), Some(_)) => return Err(invalid("object: give either tag or amplitudes")),
        (_, Some(a)) => a.clone(),
        (Some(Tag::C), None) => ObjectTag::C.amplitudes(),
        (Some(Tag::A), None) | (None, None) => ObjectTag::A.amplitudes(),
    };
    SlitObject::centered(1.0, amplitudes.clone()).map_err(|e| invalid(format!("object: {e}")))?;
    if cfg.plan.n < 2 {
        return Err(invalid(format!("plan: n must be >= 2, got {}", cfg.plan.n)));
    }
    let region = DetectionRegion::in_units_of(&system, cfg.plan.k_lo, cfg.plan.k_hi)
        .map_err(|e| invalid(format!("plan: {e}")))?;
    if !(cfg.plan.grid_margin.is_finite() && cfg.plan.grid_margin >= 0.0) {
        return Err(invalid("plan: grid_margin must be >= 0"));
    }
    if cfg.plan.strategies.is_empty() {
        return Err(invalid("plan: strategies must not be empty"));
    }
    let mut strategies: Vec<Strategy> = Vec::new();
    for s in cfg.plan.strategies.iter().map(|&s| strategy(s)) {
        if strategies.contains(&s) {
            return Err(invalid(format!("plan: strategy {s} listed twice")));
        }
        strategies.push(s);
    }
    if !(cfg.output.n_max.is_finite() && cfg.output.n_max > 0.0) {
        return Err(invalid("output: n_max must be positive"));
    }
    Ok(Resolved {
        dr: system.rayleigh_length(),
        system,
        amplitudes,
        region,
        strategies,
    })
}

fn scan_widths(cfg: &ScenarioConfig, dr: f64) -> Result<Vec<f64>, CliError> {
    let scan = cfg
        .scan
        .as_ref()
        .ok_or_else(|| invalid("a [scan] block is required"))?;
    if !(scan.d_min > 0.0 && scan.d_max > scan.d_min && scan.d_max.is_finite()) {
        return Err(invalid("scan: need 0 < d_min < d_max"));
    }
    if scan.points < 2 {
        return Err(invalid("scan: points must be >= 2"));
    }
    let step = (scan.d_max - scan.d_min) / (scan.points - 1) as f64;
    Ok((0..scan.points)
        .map(|i| (scan.d_min + i as f64 * step) * dr)
        .collect())
}

/// Checks the config for `kind` without running anything.
pub fn validate(cfg: &ScenarioConfig, kind: ScenarioKind) -> Result<(), CliError> {
    if let Some(declared) = cfg.scenario {
        if declared != kind {
            return Err(invalid(format!(
                "config is for '{}', not '{}'",
                declared.name(),
                kind.name()
            )));
        }
    }
    let r = resolve(cfg)?;
    match kind {
        ScenarioKind::Signal => {
            let width = cfg
                .object
                .slit_width
                .ok_or_else(|| invalid("object: slit_width is required for signal"))?;
            object_for_signal(cfg, &r, width).map(|_| ())
        }
        ScenarioKind::FisherScan | ScenarioKind::RateRatio => scan_widths(cfg, r.dr).map(|_| ()),
        ScenarioKind::NoonDemo => noon_grid(cfg, &r).map(|_| ()),
    }
}

pub fn run(cfg: &ScenarioConfig, kind: ScenarioKind) -> Result<Artifact, CliError> {
    validate(cfg, kind)?;
    let r = resolve(cfg)?;
    match kind {
        ScenarioKind::Signal => run_signal(cfg, &r),
        ScenarioKind::FisherScan => run_fisher_scan(cfg, &r),
        ScenarioKind::RateRatio => run_rate_ratio(cfg, &r),
        ScenarioKind::NoonDemo => run_noon_demo(cfg, &r),
    }
}

fn object_for_signal(
    cfg: &ScenarioConfig,
    r: &Resolved,
    width: f64,
) -> Result<SlitObject, CliError> {
    let obj = match cfg.object.origin {
        Some(origin) => SlitObject::new(width * r.dr, r.amplitudes.clone(), origin * r.dr),
        None => SlitObject::centered(width * r.dr, r.amplitudes.clone()),
    };
    obj.map_err(|e| invalid(format!("object: {e}")))
}

fn run_signal(cfg: &ScenarioConfig, r: &Resolved) -> Result<Artifact, CliError> {
    let width = cfg.object.slit_width.expect("validated");
    let obj = object_for_signal(cfg, r, width)?;
    let grid = sampling_grid(&obj, cfg.plan.grid_margin * r.dr)?;
    let mut columns = Vec::new();
    for &s in &r.strategies {
        let plan = MeasurementPlan::new(s, cfg.plan.n, grid.clone(), Some(r.region))?;
        let sig = SignalKernels::build(&obj, &r.system, &plan)?.signal(obj.amplitudes())?;
        columns.push(sig.values().to_vec());
    }
    let xs: Vec<f64> = grid.iter().map(|g| g / r.dr).collect();
    let mut header = vec!["r/d_R".to_string()];
    header.extend(r.strategies.iter().map(|s| format!("S_{}", s.label())));
    let rows = table(&xs, &columns);
    let curves = r
        .strategies
        .iter()
        .zip(&columns)
        .map(|(s, col)| curve(s.label(), &xs, col))
        .collect();
    Ok(Artifact {
        header,
        rows,
        curves,
        axes: Axes {
            x_label: "r / d_R".into(),
            y_label: "signal".into(),
            log_y: cfg.output.log_y.unwrap_or(false),
        },
        notes: vec![format!(
            "signal: {} grid points, n = {}, slit width {width} d_R",
            grid.len(),
            cfg.plan.n
        )],
    })
}

fn scans(
    cfg: &ScenarioConfig,
    r: &Resolved,
    strategies: &[Strategy],
) -> Result<Vec<ResolutionScan>, CliError> {
    let widths = scan_widths(cfg, r.dr)?;
    strategies
        .iter()
        .map(|&s| {
            let setup = ScanSetup::new(
                s,
                r.amplitudes.clone(),
                r.system,
                cfg.plan.n,
                Some(r.region),
                cfg.plan.grid_margin * r.dr,
            )?;
            Ok(resolution_scan(&setup, &widths)?)
        })
        .collect()
}

fn failure_notes(scan: &ResolutionScan, dr: f64) -> Vec<String> {
    scan.points
        .iter()
        .filter_map(|p| match &p.status {
            PointStatus::Failed(msg) => Some(format!(
                "warning: {} at d = {} d_R: {msg}",
                scan.setup.strategy(),
                p.d / dr
            )),
            _ => None,
        })
        .collect()
}

fn threshold_note(
    label: &str,
    scan: &ResolutionScan,
    n_max: f64,
    reference: Option<&ResolutionScan>,
    dr: f64,
) -> String {
    match resolution_threshold(scan, n_max, reference) {
        Ok(res) => format!(
            "threshold {label}: d_min = {:.4} d_R (N_max = {n_max:e})",
            res.d_min / dr
        ),
        Err(e) => format!("threshold {label}: {e}"),
    }
}

fn run_fisher_scan(cfg: &ScenarioConfig, r: &Resolved) -> Result<Artifact, CliError> {
    let scans = scans(cfg, r, &r.strategies)?;
    let xs: Vec<f64> = scans[0].points.iter().map(|p| p.d / r.dr).collect();
    let columns: Vec<Vec<f64>> = scans
        .iter()
        .map(|s| s.points.iter().map(|p| p.trace_inv).collect())
        .collect();
    let n_max = cfg.output.n_max;
    let mut notes = Vec::new();
    for scan in &scans {
        notes.extend(failure_notes(scan, r.dr));
        notes.push(threshold_note(
            scan.setup.strategy().label(),
            scan,
            n_max,
            None,
            r.dr,
        ));
    }
    let find = |s: Strategy| scans.iter().find(|x| x.setup.strategy() == s);
    if let (Some(hybrid), Some(gn)) = (find(Strategy::Hybrid), find(Strategy::Gn)) {
        notes.push(threshold_note(
            "hybrid rate-adjusted",
            hybrid,
            n_max,
            Some(gn),
            r.dr,
        ));
    }
    let mut header = vec!["d/d_R".to_string()];
    header.extend(r.strategies.iter().map(|s| format!("TrFinv_{}", s.label())));
    Ok(Artifact {
        header,
        rows: table(&xs, &columns),
        curves: r
            .strategies
            .iter()
            .zip(&columns)
            .map(|(s, col)| curve(s.label(), &xs, col))
            .collect(),
        axes: Axes {
            x_label: "d / d_R".into(),
            y_label: "Tr F^-1".into(),
            log_y: cfg.output.log_y.unwrap_or(true),
        },
        notes,
    })
}

fn run_rate_ratio(cfg: &ScenarioConfig, r: &Resolved) -> Result<Artifact, CliError> {
    let scans = scans(cfg, r, &[Strategy::Gn, Strategy::Hybrid])?;
    let (gn, hybrid) = (&scans[0], &scans[1]);
    let ratio = rate_ratio(hybrid, gn)?;
    let xs: Vec<f64> = gn.points.iter().map(|p| p.d / r.dr).collect();
    let p = |s: &ResolutionScan| -> Vec<f64> {
        s.points.iter().map(|x| x.p.unwrap_or(f64::NAN)).collect()
    };
    let ratios: Vec<f64> = ratio.iter().map(|x| x.ratio.unwrap_or(f64::NAN)).collect();
    let mut notes = failure_notes(gn, r.dr);
    notes.extend(failure_notes(hybrid, r.dr));
    let finite: Vec<f64> = ratios.iter().copied().filter(|x| x.is_finite()).collect();
    if !finite.is_empty() {
        let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        notes.push(format!("p_hybrid/p_gn between {lo} and {hi}"));
    }
    Ok(Artifact {
        header: ["d/d_R", "p_gn", "p_hybrid", "ratio"]
            .map(String::from)
            .to_vec(),
        rows: table(&xs, &[p(gn), p(hybrid), ratios.clone()]),
        curves: vec![curve("p_hybrid / p_gn", &xs, &ratios)],
        axes: Axes {
            x_label: "d / d_R".into(),
            y_label: "p_hybrid / p_gn".into(),
            log_y: cfg.output.log_y.unwrap_or(true),
        },
        notes,
    })
}

fn noon_grid(cfg: &ScenarioConfig, r: &Resolved) -> Result<(NoonScenario, Vec<f64>), CliError> {
    let block = cfg
        .noon
        .as_ref()
        .ok_or_else(|| invalid("a [noon] block is required"))?;
    if block.r_max.partial_cmp(&block.r_min) != Some(std::cmp::Ordering::Greater)
        || block.points < 2
    {
        return Err(invalid("noon: need r_min < r_max and points >= 2"));
    }
    let sc = NoonScenario::new(cfg.plan.n, block.half_separation * r.dr, r.system)
        .map_err(|e| invalid(format!("noon: {e}")))?;
    let step = (block.r_max - block.r_min) / (block.points - 1) as f64;
    let xs = (0..block.points)
        .map(|i| block.r_min + i as f64 * step)
        .collect();
    Ok((sc, xs))
}

fn run_noon_demo(cfg: &ScenarioConfig, r: &Resolved) -> Result<Artifact, CliError> {
    let (sc, xs) = noon_grid(cfg, r)?;
    // Destructive case: relative phase k·d = π/2.
    let k = FRAC_PI_2 / sc.half_separation();
    let at = |f: &dyn Fn(f64) -> f64| -> Vec<f64> { xs.iter().map(|&x| f(x * r.dr)).collect() };
    let columns = vec![
        at(&|x| noon_gn(&sc, x)),
        at(&|x| noon_gn_minus_1(&sc, x)),
        at(&|x| noon_conditioned(&sc, x, k)),
    ];
    let names = ["constructive", "incoherent", "destructive"];
    let mut header = vec!["r/d_R".to_string()];
    header.extend(names.iter().map(|s| s.to_string()));
    Ok(Artifact {
        header,
        rows: table(&xs, &columns),
        curves: names
            .iter()
            .zip(&columns)
            .map(|(n, c)| curve(n, &xs, c))
            .collect(),
        axes: Axes {
            x_label: "r / d_R".into(),
            y_label: "coincidence rate".into(),
            log_y: cfg.output.log_y.unwrap_or(false),
        },
        notes: vec![format!(
            "noon-demo: n = {}, half-separation {} d_R",
            sc.n(),
            sc.half_separation() / r.dr
        )],
    })
}

fn table(xs: &[f64], columns: &[Vec<f64>]) -> Vec<Vec<f64>> {
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            std::iter::once(x)
                .chain(columns.iter().map(|c| c[i]))
                .collect()
        })
        .collect()
}

fn curve(label: &str, xs: &[f64], ys: &[f64]) -> Curve {
    Curve {
        label: label.to_string(),
        points: xs.iter().copied().zip(ys.iter().copied()).collect(),
    }
}
