//! Critical and boundary strength ratios.
//!
//! Closed forms cover the single-infeed case. For any case the numeric
//! searches scale every network reactance by `s` and bisect on `s` until the
//! maximum available power sits at the rated point (critical) or the overlap
//! angle at MAP reaches 30° (boundary).

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::converter::{k_of_c, ratio_for_overlap, state_at_ratio, ConverterError, LccParams};
use crate::gscr::{case_gscr, GscrError};
use crate::netmodel::{scale_impedance, CaseError, CaseFile, EmfMode};
use crate::powerflow::{ContinuationOptions, ContinuationResult, PowerFlowError, PowerFlowModel};

#[derive(Debug, thiserror::Error)]
pub enum BoundaryError {
    #[error(transparent)]
    Converter(#[from] ConverterError),
    #[error(transparent)]
    PowerFlow(#[from] PowerFlowError),
    #[error(transparent)]
    Gscr(#[from] GscrError),
    #[error(transparent)]
    Case(#[from] CaseError),
    #[error("no sign change of the defining condition for scale in [{lo}, {hi}]")]
    BracketNotFound { lo: f64, hi: f64 },
    #[error("boundary equations did not converge (residuals {0:e}, {1:e})")]
    NoConvergence(f64, f64),
    #[error("condition residual {residual:e} exceeds tolerance {tol:e}")]
    Tolerance { residual: f64, tol: f64 },
    #[error("sweep needs exactly two converters, case has {0}")]
    NotDualInfeed(usize),
}

/// `(T + √(T² + 4))/2`, the positive root of `T + 1/S − S = 0`.
pub fn cscr_closed_form(t_n: f64) -> f64 {
    (t_n + (t_n * t_n + 4.0).sqrt()) / 2.0
}

/// `T` at the rated point.
pub fn rated_t(params: &LccParams) -> Result<f64, ConverterError> {
    let s = params.rated_state()?;
    Ok(crate::converter::sensitivity_t(&s, params)?.t)
}

/// Single-infeed boundary point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BscrSolution {
    pub scr: f64,
    /// Bus voltage at the boundary point (pu).
    pub u: f64,
    pub rho: f64,
    pub t: f64,
    /// `Q/(P_dN·U²)` at the boundary point.
    pub sigma: f64,
    pub residual_singularity: f64,
    pub residual_network: f64,
    /// Root of `ρT + ρ²/S − S = 0`, which drops the reactive terms of the
    /// network Jacobian.
    pub scr_reactive_free: f64,
}

/// Boundary SCR of a single converter with the emf calibrated to 1 pu at the
/// rated point.
///
/// Unknowns `(S, U)` with `c` held at the 30° overlap value:
///
/// ```text
/// ρT − σ + ρ²/(S − σ) − S = 0
/// U²·[(ρ/S)² + (1 − σ/S)²] = E²,   E² = (1/S)² + (1 − σ_N/S)²
/// ```
pub fn bscr_solve(params: &LccParams) -> Result<BscrSolution, BoundaryError> {
    let params = params.validate()?;
    let c_b = ratio_for_overlap(params.gamma, 30f64.to_radians());
    k_of_c(c_b, params.gamma)?;
    let at_b = state_at_ratio(&params, 1.0, c_b)?;
    let rho = at_b.rho;
    let sigma = at_b.q / params.p_dn;
    let t = crate::converter::sensitivity_t(&at_b, &params)?.t;
    let rated = params.rated_state()?;
    let sigma_n = rated.q / params.p_dn;

    let residual = |x: &DVector<f64>| {
        let (s, u) = (x[0], x[1]);
        let e2 = (1.0 / s).powi(2) + (1.0 - sigma_n / s).powi(2);
        DVector::from_vec(vec![
            rho * t - sigma + rho * rho / (s - sigma) - s,
            u * u * ((rho / s).powi(2) + (1.0 - sigma / s).powi(2)) - e2,
        ])
    };
    let mut x = DVector::from_vec(vec![3.0, 1.0]);
    let mut r = residual(&x);
    for _ in 0..100 {
        if r.amax() <= 1e-12 {
            break;
        }
        let h = 1e-7;
        let mut jac = DMatrix::zeros(2, 2);
        for k in 0..2 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            jac.set_column(k, &((residual(&xp) - residual(&xm)) / (2.0 * h)));
        }
        let step = match jac.lu().solve(&(-&r)) {
            Some(s) => s,
            None => break,
        };
        let mut alpha = 1.0;
        loop {
            let cand = &x + &step * alpha;
            let ok = cand[0] > sigma.max(0.0) && cand[1] > 0.0;
            if ok {
                let rc = residual(&cand);
                if rc.norm() < r.norm() || alpha < 1e-6 {
                    x = cand;
                    r = rc;
                    break;
                }
            }
            alpha *= 0.5;
            if alpha < 1e-9 {
                return Err(BoundaryError::NoConvergence(r[0].abs(), r[1].abs()));
            }
        }
    }
    if !(r[0].abs() <= 1e-9 && r[1].abs() <= 1e-9) {
        return Err(BoundaryError::NoConvergence(r[0].abs(), r[1].abs()));
    }
    let scr_reactive_free = (rho * t + (rho * rho * t * t + 4.0 * rho * rho).sqrt()) / 2.0;
    Ok(BscrSolution {
        scr: x[0],
        u: x[1],
        rho,
        t,
        sigma,
        residual_singularity: r[0].abs(),
        residual_network: r[1].abs(),
        scr_reactive_free,
    })
}

/// How per-converter overlap angles combine into the one angle compared with
/// 30°.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Rating-weighted mean.
    #[default]
    Mean,
    Max,
    /// First converter in bus order.
    First,
}

impl Aggregation {
    pub fn apply(&self, mu: &[f64], weights: &[f64]) -> f64 {
        match self {
            Aggregation::Mean => {
                let w: f64 = weights.iter().sum();
                mu.iter().zip(weights).map(|(m, w)| m * w).sum::<f64>() / w
            }
            Aggregation::Max => mu.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Aggregation::First => mu[0],
        }
    }
}

impl FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mean" => Ok(Aggregation::Mean),
            "max" => Ok(Aggregation::Max),
            "first" => Ok(Aggregation::First),
            other => Err(format!("unknown aggregation `{other}` (expected mean, max or first)")),
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::Mean => "mean",
            Aggregation::Max => "max",
            Aggregation::First => "first",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundaryKind {
    #[serde(rename = "CSCR")]
    Cscr,
    #[serde(rename = "BSCR")]
    Bscr,
    #[serde(rename = "CgSCR")]
    CgScr,
    #[serde(rename = "BgSCR")]
    BgScr,
}

impl fmt::Display for BoundaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryKind::Cscr => "CSCR",
            BoundaryKind::Bscr => "BSCR",
            BoundaryKind::CgScr => "CgSCR",
            BoundaryKind::BgScr => "BgSCR",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryResult {
    pub kind: BoundaryKind,
    pub value: f64,
    /// Reactance multiplier applied to the input case.
    pub scale_star: f64,
    /// `|λ_max − 1|` for critical searches, `|μ_agg − 30°|` in degrees for
    /// boundary searches.
    pub condition_residual: f64,
    pub lambda_max: f64,
    pub map_power_mw: Vec<f64>,
    pub per_converter_mu_deg: Vec<f64>,
    pub aggregation: Option<Aggregation>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub s_min: f64,
    pub s_max: f64,
    pub continuation: ContinuationOptions,
    /// Bound on `|λ_max − 1|`.
    pub critical_tol: f64,
    /// Bound on `|μ − 30°|`, degrees.
    pub angle_tol_deg: f64,
    /// λ bracket width used for the MAP traces of a boundary search.
    pub boundary_lambda_tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            s_min: 0.05,
            s_max: 20.0,
            continuation: ContinuationOptions::default(),
            critical_tol: 1e-3,
            angle_tol_deg: 0.05,
            boundary_lambda_tol: 1e-7,
        }
    }
}

/// Candidate scales from the case's own scale outward, ascending on each side.
fn probe_scales(lo: f64, hi: f64) -> Vec<f64> {
    let mut s = vec![lo];
    let mut x = lo;
    while x * 1.5 < hi {
        x *= 1.5;
        s.push(x);
    }
    s.push(hi);
    s
}

/// Find adjacent probes where `side` switches from `true` to `false`, then
/// bisect geometrically until `done` accepts the interval.
fn bisect_scale(
    opts: &SearchOptions,
    mut side: impl FnMut(f64) -> Result<bool, BoundaryError>,
    mut done: impl FnMut(f64, f64) -> bool,
) -> Result<(f64, f64), BoundaryError> {
    let probes = probe_scales(opts.s_min, opts.s_max);
    let mut prev = None;
    let mut bracket = None;
    for &s in &probes {
        let here = side(s)?;
        if let Some((sp, true)) = prev {
            if !here {
                bracket = Some((sp, s));
                break;
            }
        }
        prev = Some((s, here));
    }
    let (mut lo, mut hi) = bracket.ok_or(BoundaryError::BracketNotFound {
        lo: opts.s_min,
        hi: opts.s_max,
    })?;
    for _ in 0..200 {
        if done(lo, hi) {
            break;
        }
        let mid = (lo * hi).sqrt();
        if side(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Determinant sign of the full Jacobian at the calibrated rated point, or
/// `None` when the rated point cannot be realised at all.
fn rated_point_det(case: &CaseFile) -> Result<Option<f64>, BoundaryError> {
    let model = match PowerFlowModel::from_case(case) {
        Ok(m) => m,
        Err(PowerFlowError::Calibration(_)) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let n = model.order();
    let delta = model.rated_delta().cloned().unwrap_or_else(|| DVector::zeros(n));
    let state = model.state_at(delta, DVector::from_element(n, 1.0), &model.rated_orders)?;
    Ok(Some(model.assemble_jacobian(&state)?.full().determinant()))
}

fn lambda_max_or_cap(case: &CaseFile, opts: &ContinuationOptions) -> Result<f64, BoundaryError> {
    match PowerFlowModel::from_case(case)?.trace_map(opts) {
        Ok(r) => Ok(r.lambda_max),
        Err(PowerFlowError::NoMap(cap)) => Ok(cap),
        Err(PowerFlowError::BaseInfeasible { .. }) => Ok(0.0),
        Err(e) => Err(e.into()),
    }
}

/// Critical gSCR: the scale at which the MAP coincides with the rated point.
pub fn find_critical_numeric(
    case: &CaseFile,
    opts: &SearchOptions,
) -> Result<BoundaryResult, BoundaryError> {
    let scaled = |s: f64| scale_impedance(case, s);
    let (lo, hi) = if case.emf_mode == EmfMode::RatedVoltage {
        // With calibrated emfs the rated point is always a solution; it turns
        // singular, and the determinant changes sign, at the critical scale.
        let reference = rated_point_det(&scaled(opts.s_min)?)?
            .ok_or(BoundaryError::BracketNotFound {
                lo: opts.s_min,
                hi: opts.s_max,
            })?
            .signum();
        bisect_scale(
            opts,
            |s| Ok(rated_point_det(&scaled(s)?)?.is_some_and(|d| d.signum() == reference)),
            |lo, hi| hi / lo - 1.0 <= 1e-9,
        )?
    } else {
        let cont = ContinuationOptions {
            lambda_tol: opts.critical_tol * 0.1,
            ..opts.continuation
        };
        bisect_scale(
            opts,
            |s| Ok(lambda_max_or_cap(&scaled(s)?, &cont)? >= 1.0),
            |lo, hi| hi / lo - 1.0 <= 1e-6,
        )?
    };
    let s_star = 0.5 * (lo + hi);
    let case_star = scaled(s_star)?;
    let cont = ContinuationOptions {
        lambda_tol: opts.critical_tol * 0.1,
        ..opts.continuation
    };
    let model = PowerFlowModel::from_case(&case_star)?;
    let map = model.trace_map(&cont)?;
    let residual = (map.lambda_max - 1.0).abs();
    if residual > opts.critical_tol {
        return Err(BoundaryError::Tolerance {
            residual,
            tol: opts.critical_tol,
        });
    }
    Ok(result(
        BoundaryKind::CgScr,
        case_gscr(&case_star)?,
        s_star,
        residual,
        &map,
        model.system_base_mva,
        None,
    ))
}

fn result(
    kind: BoundaryKind,
    value: f64,
    scale_star: f64,
    condition_residual: f64,
    map: &ContinuationResult,
    base: f64,
    aggregation: Option<Aggregation>,
) -> BoundaryResult {
    BoundaryResult {
        kind,
        value,
        scale_star,
        condition_residual,
        lambda_max: map.lambda_max,
        map_power_mw: map.p_map_mw(base),
        per_converter_mu_deg: map.mu_at_map.iter().map(|m| m.to_degrees()).collect(),
        aggregation,
    }
}

/// Boundary gSCR: the scale at which the aggregated overlap angle at MAP is 30°.
pub fn find_boundary_numeric(
    case: &CaseFile,
    aggregation: Aggregation,
    opts: &SearchOptions,
) -> Result<BoundaryResult, BoundaryError> {
    let weights: Vec<f64> = case.rated_powers().iter().copied().collect();
    let cont = ContinuationOptions {
        lambda_tol: opts.boundary_lambda_tol,
        ..opts.continuation
    };
    // Stronger networks (small s) carry the MAP to higher current and angle.
    let mut best: Option<(f64, f64, ContinuationResult, f64)> = None;
    let side = |s: f64, best: &mut Option<(f64, f64, ContinuationResult, f64)>| {
        let model = PowerFlowModel::from_case(&scale_impedance(case, s)?)?;
        match model.trace_map(&cont) {
            Ok(map) => {
                let mu: Vec<f64> = map.mu_at_map.iter().map(|m| m.to_degrees()).collect();
                let g = aggregation.apply(&mu, &weights) - 30.0;
                if best.as_ref().is_none_or(|b| g.abs() < b.1.abs()) {
                    *best = Some((s, g, map, model.system_base_mva));
                }
                Ok(g > 0.0)
            }
            Err(PowerFlowError::NoMap(_)) => Ok(true),
            Err(PowerFlowError::BaseInfeasible { .. }) => Ok(false),
            Err(e) => Err(BoundaryError::from(e)),
        }
    };
    bisect_scale(opts, |s| side(s, &mut best), |lo, hi| hi / lo - 1.0 <= 1e-8)?;
    let tol = opts.angle_tol_deg;
    let (s_star, g, map, base) = best.ok_or(BoundaryError::BracketNotFound {
        lo: opts.s_min,
        hi: opts.s_max,
    })?;
    if g.abs() > tol {
        return Err(BoundaryError::Tolerance {
            residual: g.abs(),
            tol,
        });
    }
    let value = case_gscr(&scale_impedance(case, s_star)?)?;
    Ok(result(
        BoundaryKind::BgScr,
        value,
        s_star,
        g.abs(),
        &map,
        base,
        Some(aggregation),
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub ratio: f64,
    pub cgscr: f64,
    pub bgscr: f64,
}

/// Copy of a two-converter case with converter 2 rated at `ratio` times
/// converter 1 (own base scaled alike, so its per-unit constants carry over).
pub fn with_rating_ratio(case: &CaseFile, ratio: f64) -> Result<CaseFile, BoundaryError> {
    let buses = case.converter_buses();
    if buses.len() != 2 {
        return Err(BoundaryError::NotDualInfeed(buses.len()));
    }
    let first = case
        .converter_at(buses[0])
        .ok_or(ConverterError::MissingConverter(buses[0]))?
        .clone();
    let mut out = case.clone();
    let second = out
        .converters
        .iter_mut()
        .find(|c| c.bus == buses[1])
        .ok_or(ConverterError::MissingConverter(buses[1]))?;
    second.p_dn_mw = ratio * first.p_dn_mw;
    second.base_mva = Some(ratio * first.own_base_mva());
    out.validate().map_err(CaseError::Invalid)?;
    Ok(out)
}

/// Critical and boundary gSCR over converter-2 rating ratios; rows keep the
/// order of `ratios`.
pub fn sweep_dual_infeed(
    case: &CaseFile,
    ratios: &[f64],
    aggregation: Aggregation,
    opts: &SearchOptions,
) -> Result<Vec<SweepRow>, BoundaryError> {
    ratios
        .par_iter()
        .map(|&ratio| {
            let c = with_rating_ratio(case, ratio)?;
            let (cg, bg) = rayon::join(
                || find_critical_numeric(&c, opts),
                || find_boundary_numeric(&c, aggregation, opts),
            );
            Ok(SweepRow {
                ratio,
                cgscr: cg?.value,
                bgscr: bg?.value,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::converter::tests::cigre_like;

    #[test]
    fn closed_form_examples() {
        assert_eq!(cscr_closed_form(1.5), 2.0);
        assert_eq!(cscr_closed_form(0.0), 1.0);
    }

    #[test]
    fn closed_form_root_satisfies_equation() {
        for t in [0.2, 0.9, 1.7, 3.0] {
            let s = cscr_closed_form(t);
            assert!((t + 1.0 / s - s).abs() < 1e-14);
        }
    }

    #[test]
    fn bscr_residuals_meet_tolerance() {
        let b = bscr_solve(&cigre_like()).unwrap();
        assert!(b.residual_singularity <= 1e-9);
        assert!(b.residual_network <= 1e-9);
        assert!(b.scr > b.scr_reactive_free);
    }

    #[test]
    fn aggregation_rules() {
        let mu = [31.0, 29.0];
        assert_eq!(Aggregation::Mean.apply(&mu, &[1.0, 1.0]), 30.0);
        assert_eq!(Aggregation::Mean.apply(&mu, &[3.0, 1.0]), 30.5);
        assert_eq!(Aggregation::Max.apply(&mu, &[1.0, 1.0]), 31.0);
        assert_eq!(Aggregation::First.apply(&mu, &[1.0, 1.0]), 31.0);
        assert_eq!("MAX".parse::<Aggregation>().unwrap(), Aggregation::Max);
        assert!("median".parse::<Aggregation>().is_err());
    }

    #[test]
    fn probes_cover_range() {
        let p = probe_scales(0.05, 20.0);
        assert_eq!(p[0], 0.05);
        assert_eq!(*p.last().unwrap(), 20.0);
        assert!(p.windows(2).all(|w| w[1] > w[0] && w[1] / w[0] <= 1.5 + 1e-12));
    }
}
