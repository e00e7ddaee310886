//! LCC inverter steady state under constant-power / constant-extinction-angle
//! (CP-CEA) control, and the voltage sensitivities that enter the
//! characteristic equation.
//!
//! With `a = 3√2·N·K/π` and `b = 3·N·X/π` the inverter obeys
//!
//! ```text
//! U_dI   = a·U·cos γ − b·I_d
//! P_I    = P_order − I_d²·R = U_dI·I_d
//! cos φ  = cos γ − c,          c = X·I_d / (√2·K·U) = b·I_d / (a·U)
//! Q      = −P_I·tan φ + ω·B_c·U²
//! μ      = arccos(cos γ − 2c) − γ
//! ```
//!
//! All angles are radians here; conversion to degrees happens at the edges.

use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

/// Converter constants on the system base.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LccParams {
    /// Rated inverter-side power `P_dN` (pu).
    pub p_dn: f64,
    /// Extinction angle γ (rad).
    pub gamma: f64,
    /// Number of cascaded bridges `N`.
    pub n_bridges: u32,
    /// Converter transformer ratio `K_I`.
    pub k_ratio: f64,
    /// Commutation reactance `X_I` (pu).
    pub x_c: f64,
    /// DC line resistance `R` (pu).
    pub r_dc: f64,
    /// Shunt compensation susceptance `B_c` (pu).
    pub b_c: f64,
    /// Angular frequency ω (pu).
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConverterError {
    #[error("invalid converter constants: {0}")]
    InvalidParams(String),
    #[error("invalid operating input: {0}")]
    InvalidInput(String),
    #[error("no real DC current delivers {p_order} pu at U = {u} pu (needs U ≥ {u_min} pu)")]
    NoRealRoot { u: f64, p_order: f64, u_min: f64 },
    #[error("overlap angle infeasible: cos γ − 2c = {0} is outside (−1, 1]")]
    OverlapInfeasible(f64),
    #[error("K(c) undefined: cos γ − c = {0} is outside (0, 1)")]
    Domain(f64),
    #[error("sensitivity needs positive injected power, got {0}")]
    NonPositivePower(f64),
    #[error("no converter at bus {0}")]
    MissingConverter(u32),
    #[error("no default extinction angle for {0} Hz; set gamma_deg")]
    NoDefaultGamma(f64),
}

impl LccParams {
    pub fn validate(&self) -> Result<Self, ConverterError> {
        let bad = |m: &str| Err(ConverterError::InvalidParams(m.to_string()));
        if !(self.gamma > 0.0 && self.gamma < FRAC_PI_2) {
            return bad("extinction angle must lie in (0°, 90°)");
        }
        if self.n_bridges < 1 {
            return bad("at least one bridge required");
        }
        if !(self.x_c > 0.0 && self.x_c.is_finite()) {
            return bad("commutation reactance must be positive");
        }
        if !(self.r_dc >= 0.0 && self.r_dc.is_finite()) {
            return bad("DC resistance must be nonnegative");
        }
        if !(self.b_c >= 0.0 && self.b_c.is_finite()) {
            return bad("compensation susceptance must be nonnegative");
        }
        if !(self.p_dn > 0.0 && self.p_dn.is_finite()) {
            return bad("rated power must be positive");
        }
        if !(self.k_ratio > 0.0 && self.k_ratio.is_finite()) {
            return bad("transformer ratio must be positive");
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return bad("angular frequency must be positive");
        }
        if self.r_dc >= self.b() {
            return bad("DC resistance must be below 3·N·X/π");
        }
        Ok(*self)
    }

    /// `3√2·N·K/π`
    pub fn a(&self) -> f64 {
        3.0 * SQRT_2 * f64::from(self.n_bridges) * self.k_ratio / PI
    }

    /// `3·N·X/π`
    pub fn b(&self) -> f64 {
        3.0 * f64::from(self.n_bridges) * self.x_c / PI
    }

    /// DC power order that makes the inverter inject exactly `p_dn` at 1 pu.
    pub fn rated_order(&self) -> Result<f64, ConverterError> {
        let (a, b) = (self.a(), self.b());
        let acg = a * self.gamma.cos();
        let disc = acg * acg - 4.0 * b * self.p_dn;
        if disc < 0.0 {
            return Err(ConverterError::NoRealRoot {
                u: 1.0,
                p_order: self.p_dn,
                u_min: 2.0 * (b * self.p_dn).sqrt() / acg,
            });
        }
        let i_d = 2.0 * self.p_dn / (acg + disc.sqrt());
        Ok(self.p_dn + i_d * i_d * self.r_dc)
    }

    pub fn rated_state(&self) -> Result<ConverterState, ConverterError> {
        solve_state(self, 1.0, self.rated_order()?)
    }
}

/// Solved inverter operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConverterState {
    /// AC bus voltage magnitude (pu).
    pub u: f64,
    pub p_order: f64,
    pub i_d: f64,
    /// Active power injected into the AC bus, `P_I`.
    pub p: f64,
    /// Reactive power injected into the AC bus.
    pub q: f64,
    pub phi: f64,
    pub mu: f64,
    pub c: f64,
    /// `P / (P_dN·U²)`
    pub rho: f64,
    pub u_di: f64,
}

/// Solve the inverter at voltage `u` for DC power order `p_order`, taking the
/// low-current root of `(b − R)·I_d² − a·U·cos γ·I_d + P_order = 0`.
pub fn solve_state(
    params: &LccParams,
    u: f64,
    p_order: f64,
) -> Result<ConverterState, ConverterError> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(ConverterError::InvalidInput(format!("voltage {u} pu")));
    }
    if !(p_order >= 0.0 && p_order.is_finite()) {
        return Err(ConverterError::InvalidInput(format!("power order {p_order} pu")));
    }
    let (a, b, r) = (params.a(), params.b(), params.r_dc);
    let cg = params.gamma.cos();
    let acg = a * u * cg;
    let disc = acg * acg - 4.0 * (b - r) * p_order;
    if disc < 0.0 {
        return Err(ConverterError::NoRealRoot {
            u,
            p_order,
            u_min: 2.0 * ((b - r) * p_order).sqrt() / (a * cg),
        });
    }
    // Rationalized small root: no cancellation, exactly 0 at zero order.
    let i_d = 2.0 * p_order / (acg + disc.sqrt());
    state_from_current(params, u, p_order, i_d)
}

/// Operating point at voltage `u` with commutation ratio `c` held fixed.
pub fn state_at_ratio(params: &LccParams, u: f64, c: f64) -> Result<ConverterState, ConverterError> {
    if !(u > 0.0 && c >= 0.0) {
        return Err(ConverterError::InvalidInput(format!("u = {u}, c = {c}")));
    }
    let (a, b) = (params.a(), params.b());
    let i_d = c * a * u / b;
    let u_di = a * u * params.gamma.cos() - b * i_d;
    let p_order = u_di * i_d + i_d * i_d * params.r_dc;
    state_from_current(params, u, p_order, i_d)
}

fn state_from_current(
    params: &LccParams,
    u: f64,
    p_order: f64,
    i_d: f64,
) -> Result<ConverterState, ConverterError> {
    let (a, b) = (params.a(), params.b());
    let cg = params.gamma.cos();
    let c = b * i_d / (a * u);
    let mu_arg = cg - 2.0 * c;
    if !(mu_arg > -1.0 && mu_arg <= 1.0) {
        return Err(ConverterError::OverlapInfeasible(mu_arg));
    }
    let cos_phi = cg - c;
    let phi = cos_phi.acos();
    let p = p_order - i_d * i_d * params.r_dc;
    let q = -p * phi.tan() + params.omega * params.b_c * u * u;
    Ok(ConverterState {
        u,
        p_order,
        i_d,
        p,
        q,
        phi,
        mu: (mu_arg.acos() - params.gamma).max(0.0),
        c,
        rho: p / (params.p_dn * u * u),
        u_di: a * u * cg - b * i_d,
    })
}

/// Commutation overlap angle `arccos(cos γ − 2c) − γ`.
pub fn overlap_angle(state: &ConverterState, params: &LccParams) -> f64 {
    (params.gamma.cos() - 2.0 * state.c).acos() - params.gamma
}

/// The commutation ratio at which the overlap angle equals `mu`.
pub fn ratio_for_overlap(gamma: f64, mu: f64) -> f64 {
    (gamma.cos() - (gamma + mu).cos()) / 2.0
}

/// `K(c) = 1 / [(cos γ − c)²·√(1 − (cos γ − c)²)]`, i.e. `d tan φ / dc`.
pub fn k_of_c(c: f64, gamma: f64) -> Result<f64, ConverterError> {
    let x = gamma.cos() - c;
    if !(x > 0.0 && x < 1.0) {
        return Err(ConverterError::Domain(x));
    }
    Ok(1.0 / (x * x * (1.0 - x * x).sqrt()))
}

/// Exact voltage derivatives along the CP-CEA trajectory (fixed power order).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateDerivatives {
    pub di_du: f64,
    pub dc_du: f64,
    /// `∂P_I/∂U`, nonzero only through the DC line loss.
    pub dp_du: f64,
    pub dtanphi_du: f64,
    pub dq_du: f64,
}

pub fn state_derivatives(
    state: &ConverterState,
    params: &LccParams,
) -> Result<StateDerivatives, ConverterError> {
    let (a, b, r) = (params.a(), params.b(), params.r_dc);
    let cg = params.gamma.cos();
    let (u, i) = (state.u, state.i_d);
    // Differentiate (b − R)·I² − a·U·cos γ·I + P_order = 0 at fixed order.
    let di_du = a * cg * i / (2.0 * (b - r) * i - a * u * cg);
    let dc_du = (b / a) * (di_du / u - i / (u * u));
    let dp_du = -2.0 * r * i * di_du;
    let dtanphi_du = k_of_c(state.c, params.gamma)? * dc_du;
    let dq_du = -dp_du * state.phi.tan() - state.p * dtanphi_du
        + 2.0 * params.omega * params.b_c * u;
    Ok(StateDerivatives {
        di_du,
        dc_du,
        dp_du,
        dtanphi_du,
        dq_du,
    })
}

/// `K(c)`, `T(U, ξ)` and both forms of `∂ tan φ / ∂U`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensitivityBundle {
    pub k_c: f64,
    pub t: f64,
    pub dphi_du_exact: f64,
    /// `−2c·K(c)/U`, from `∂c/∂U ≈ −2c/U`.
    pub dphi_du_approx: f64,
}

/// `T = 2c·K(c) + 2ω·B_c·U²/P`.
pub fn sensitivity_t(
    state: &ConverterState,
    params: &LccParams,
) -> Result<SensitivityBundle, ConverterError> {
    if !(state.p > 0.0) {
        return Err(ConverterError::NonPositivePower(state.p));
    }
    let k_c = k_of_c(state.c, params.gamma)?;
    let u = state.u;
    let t = 2.0 * state.c * k_c + 2.0 * params.omega * params.b_c * u * u / state.p;
    let exact = state_derivatives(state, params)?;
    Ok(SensitivityBundle {
        k_c,
        t,
        dphi_du_exact: exact.dtanphi_du,
        dphi_du_approx: -2.0 * state.c * k_c / u,
    })
}
