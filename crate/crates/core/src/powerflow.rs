//! AC/DC steady state on the reduced network and loading continuation to the
//! maximum available power (MAP).
//!
//! Unknowns are the converter-bus angles δ and magnitudes U; every Thévenin
//! emf sits at angle 0. With `g = C·E` the network delivers
//!
//! ```text
//! P_net,i = Σ_{j≠i} U_i U_j B_ij sin θ_ij + U_i g_i sin δ_i
//! Q_net,i = −U_i² B_ii − Σ_{j≠i} U_i U_j B_ij cos θ_ij − U_i g_i cos δ_i
//! ```
//!
//! and the mismatch is `F = S_conv(U) − S_net(δ, U)`. Jacobian blocks are the
//! derivatives of `F` with row `i` divided by `U_i`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::converter::{
    sensitivity_t, solve_state, state_derivatives, ConverterError, ConverterState, LccParams,
};
use crate::netmodel::{CaseFile, EmfMode, NetworkError, ReducedNetwork};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PowerFlowError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Converter(#[from] ConverterError),
    #[error("power flow diverged: {reason} (mismatch trace {trace:?})")]
    Diverged { reason: String, trace: Vec<f64> },
    #[error("rated-voltage emf calibration failed: {0}")]
    Calibration(String),
    #[error("base case infeasible at λ = {lambda}: {source}")]
    BaseInfeasible {
        lambda: f64,
        #[source]
        source: Box<PowerFlowError>,
    },
    #[error("no divergence found up to λ = {0}")]
    NoMap(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Convergence bound on `‖F‖∞` (pu).
    pub tol: f64,
    pub u_min: f64,
    pub u_max: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iter: 50,
            tol: 1e-8,
            u_min: 0.2,
            u_max: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationOptions {
    pub start: f64,
    pub step: f64,
    /// Final width of the bracket around the MAP multiplier.
    pub lambda_tol: f64,
    pub lambda_cap: f64,
    pub newton: NewtonOptions,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            start: 0.1,
            step: 0.02,
            lambda_tol: 1e-4,
            lambda_cap: 20.0,
            newton: NewtonOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridState {
    pub delta: DVector<f64>,
    pub u: DVector<f64>,
    pub converter_states: Vec<ConverterState>,
}

impl GridState {
    pub fn flat(n: usize) -> Self {
        Self {
            delta: DVector::zeros(n),
            u: DVector::from_element(n, 1.0),
            converter_states: Vec::new(),
        }
    }

    pub fn mu(&self) -> Vec<f64> {
        self.converter_states.iter().map(|s| s.mu).collect()
    }

    pub fn p(&self) -> Vec<f64> {
        self.converter_states.iter().map(|s| s.p).collect()
    }

    pub fn q(&self) -> Vec<f64> {
        self.converter_states.iter().map(|s| s.q).collect()
    }
}

/// Blocks of the row-scaled Jacobian.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianBlocks {
    pub j_pdelta: DMatrix<f64>,
    pub j_pv: DMatrix<f64>,
    pub j_qdelta: DMatrix<f64>,
    pub j_qv: DMatrix<f64>,
    /// `P_Ni·ρ_i·T_i`, the approximate converter term of the QV block.
    pub dc_diag: DVector<f64>,
    /// `(∂P_conv,i/∂U_i)/U_i`, nonzero only with DC line loss.
    pub dc_p_exact: DVector<f64>,
    /// `(∂Q_conv,i/∂U_i)/U_i`.
    pub dc_q_exact: DVector<f64>,
}

impl JacobianBlocks {
    /// `[J_pδ J_pv; J_qδ J_qv]`, exact converter terms included.
    pub fn full(&self) -> DMatrix<f64> {
        let n = self.j_pdelta.nrows();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.j_pdelta);
        m.view_mut((0, n), (n, n)).copy_from(&self.j_pv);
        m.view_mut((n, 0), (n, n)).copy_from(&self.j_qdelta);
        m.view_mut((n, n), (n, n)).copy_from(&self.j_qv);
        m
    }

    /// `J_qv − J_qδ·J_pδ⁻¹·J_pv`
    pub fn schur_qv(&self) -> Option<DMatrix<f64>> {
        let x = self.j_pdelta.clone().lu().solve(&self.j_pv)?;
        Some(&self.j_qv - &self.j_qdelta * x)
    }

    pub fn min_singular_value(&self) -> f64 {
        self.full()
            .singular_values()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Reduced network, converter constants and emf injections ready to solve.
#[derive(Debug, Clone)]
pub struct PowerFlowModel {
    pub network: ReducedNetwork,
    pub params: Vec<LccParams>,
    /// Power orders that put every converter at rated injection at 1 pu.
    pub rated_orders: DVector<f64>,
    pub buses: Vec<u32>,
    pub system_base_mva: f64,
    g: DVector<f64>,
    rated_delta: Option<DVector<f64>>,
}

impl PowerFlowModel {
    pub fn from_case(case: &CaseFile) -> Result<Self, PowerFlowError> {
        let network = ReducedNetwork::from_case(case)?;
        let params = case
            .lcc_params()?
            .into_iter()
            .map(|p| p.validate())
            .collect::<Result<Vec<_>, _>>()?;
        let rated_orders = params
            .iter()
            .map(|p| p.rated_order())
            .collect::<Result<Vec<_>, _>>()?;
        let g = network.emf_injection();
        let mut model = Self {
            buses: network.b.buses().to_vec(),
            network,
            params,
            rated_orders: DVector::from_vec(rated_orders),
            system_base_mva: case.system_base_mva,
            g,
            rated_delta: None,
        };
        if case.emf_mode == EmfMode::RatedVoltage {
            model.calibrate_rated_voltage()?;
        }
        Ok(model)
    }

    pub fn order(&self) -> usize {
        self.params.len()
    }

    /// `g = C·E`
    pub fn emf_injection(&self) -> &DVector<f64> {
        &self.g
    }

    /// Angles of the calibrated rated point, when the emfs were calibrated.
    pub fn rated_delta(&self) -> Option<&DVector<f64>> {
        self.rated_delta.as_ref()
    }

    /// Converter injections at λ = 1 and U = 1 (the rated point).
    pub fn rated_states(&self) -> Result<Vec<ConverterState>, PowerFlowError> {
        Ok(self
            .params
            .iter()
            .map(|p| p.rated_state())
            .collect::<Result<Vec<_>, _>>()?)
    }

    /// Pick `g` (and hence real emfs) so that U = 1 on every converter bus
    /// solves the flow at rated orders. Solves for `(δ, g)` by Newton.
    fn calibrate_rated_voltage(&mut self) -> Result<(), PowerFlowError> {
        let n = self.order();
        let rated = self.rated_states()?;
        let b = self.network.b.entries().clone();
        let (p, q): (Vec<f64>, Vec<f64>) = rated.iter().map(|s| (s.p, s.q)).unzip();
        let residual = |d: &DVector<f64>, g: &DVector<f64>| {
            let mut r = DVector::zeros(2 * n);
            for i in 0..n {
                let (mut s, mut c) = (0.0, 0.0);
                for j in (0..n).filter(|j| *j != i) {
                    let t = d[i] - d[j];
                    s += b[(i, j)] * t.sin();
                    c += b[(i, j)] * t.cos();
                }
                r[i] = g[i] * d[i].sin() + s - p[i];
                r[n + i] = g[i] * d[i].cos() + b[(i, i)] + c + q[i];
            }
            r
        };
        let mut d = DVector::zeros(n);
        let mut g = DVector::from_fn(n, |i, _| {
            -b[(i, i)] - (0..n).filter(|j| *j != i).map(|j| b[(i, j)]).sum::<f64>() - q[i]
        });
        let mut r = residual(&d, &g);
        for _ in 0..100 {
            if r.amax() <= 1e-13 {
                break;
            }
            let mut jac = DMatrix::zeros(2 * n, 2 * n);
            for i in 0..n {
                let (mut sc, mut ss) = (0.0, 0.0);
                for j in (0..n).filter(|j| *j != i) {
                    let t = d[i] - d[j];
                    sc += b[(i, j)] * t.cos();
                    ss += b[(i, j)] * t.sin();
                    jac[(i, j)] = -b[(i, j)] * t.cos();
                    jac[(n + i, j)] = b[(i, j)] * t.sin();
                }
                jac[(i, i)] = g[i] * d[i].cos() + sc;
                jac[(n + i, i)] = -g[i] * d[i].sin() - ss;
                jac[(i, n + i)] = d[i].sin();
                jac[(n + i, n + i)] = d[i].cos();
            }
            let step = jac
                .lu()
                .solve(&(-&r))
                .ok_or_else(|| PowerFlowError::Calibration("singular calibration Jacobian".into()))?;
            let mut alpha = 1.0;
            loop {
                let d_new = &d + step.rows(0, n) * alpha;
                let g_new = &g + step.rows(n, n) * alpha;
                let r_new = residual(&d_new, &g_new);
                if r_new.amax() < r.amax() || alpha < 1e-4 {
                    d = d_new;
                    g = g_new;
                    r = r_new;
                    break;
                }
                alpha *= 0.5;
            }
        }
        if !(r.amax() <= 1e-11) {
            return Err(PowerFlowError::Calibration(format!(
                "residual {:e} after 100 iterations",
                r.amax()
            )));
        }
        if g.iter().any(|x| !(*x > 0.0)) || d.iter().any(|x| x.abs() >= std::f64::consts::FRAC_PI_2) {
            return Err(PowerFlowError::Calibration(
                "rated point lies beyond the transfer limit".into(),
            ));
        }
        self.network.set_emf_injection(&g)?;
        self.g = g;
        self.rated_delta = Some(d);
        Ok(())
    }

    fn converter_states(
        &self,
        u: &DVector<f64>,
        orders: &DVector<f64>,
    ) -> Result<Vec<ConverterState>, ConverterError> {
        self.params
            .iter()
            .enumerate()
            .map(|(i, p)| solve_state(p, u[i], orders[i]))
            .collect()
    }

    /// Network injections `(P_net, Q_net)` at `(δ, U)`.
    pub fn network_injection(
        &self,
        delta: &DVector<f64>,
        u: &DVector<f64>,
    ) -> (DVector<f64>, DVector<f64>) {
        let n = self.order();
        let b = self.network.b.entries();
        let mut p = DVector::zeros(n);
        let mut q = DVector::zeros(n);
        for i in 0..n {
            q[i] = -u[i] * u[i] * b[(i, i)];
            for j in (0..n).filter(|j| *j != i) {
                let t = delta[i] - delta[j];
                p[i] += u[i] * u[j] * b[(i, j)] * t.sin();
                q[i] -= u[i] * u[j] * b[(i, j)] * t.cos();
            }
            p[i] += u[i] * self.g[i] * delta[i].sin();
            q[i] -= u[i] * self.g[i] * delta[i].cos();
        }
        (p, q)
    }

    /// `F = S_conv − S_net` stacked as `[ΔP; ΔQ]`.
    pub fn mismatch(&self, state: &GridState) -> DVector<f64> {
        let n = self.order();
        let (p, q) = self.network_injection(&state.delta, &state.u);
        let mut f = DVector::zeros(2 * n);
        for (i, s) in state.converter_states.iter().enumerate() {
            f[i] = s.p - p[i];
            f[n + i] = s.q - q[i];
        }
        f
    }

    /// State at `(δ, U)` with converters solved for `orders`.
    pub fn state_at(
        &self,
        delta: DVector<f64>,
        u: DVector<f64>,
        orders: &DVector<f64>,
    ) -> Result<GridState, ConverterError> {
        let converter_states = self.converter_states(&u, orders)?;
        Ok(GridState {
            delta,
            u,
            converter_states,
        })
    }

    pub fn assemble_jacobian(&self, state: &GridState) -> Result<JacobianBlocks, PowerFlowError> {
        let n = self.order();
        if state.converter_states.len() != n {
            return Err(PowerFlowError::Dimension {
                expected: n,
                got: state.converter_states.len(),
            });
        }
        let b = self.network.b.entries();
        let (d, u) = (&state.delta, &state.u);
        let mut jpd = DMatrix::zeros(n, n);
        let mut jpv = DMatrix::zeros(n, n);
        let mut jqd = DMatrix::zeros(n, n);
        let mut jqv = DMatrix::zeros(n, n);
        let mut dc_diag = DVector::zeros(n);
        let mut dc_p = DVector::zeros(n);
        let mut dc_q = DVector::zeros(n);
        for i in 0..n {
            let gi = self.g[i];
            // Derivatives of S_net, row i, before scaling.
            let mut dp_ddi = u[i] * gi * d[i].cos();
            let mut dq_ddi = u[i] * gi * d[i].sin();
            let mut dp_dui = gi * d[i].sin();
            let mut dq_dui = -2.0 * u[i] * b[(i, i)] - gi * d[i].cos();
            for j in (0..n).filter(|j| *j != i) {
                let t = d[i] - d[j];
                let (s, c) = t.sin_cos();
                dp_ddi += u[i] * u[j] * b[(i, j)] * c;
                dq_ddi += u[i] * u[j] * b[(i, j)] * s;
                dp_dui += u[j] * b[(i, j)] * s;
                dq_dui -= u[j] * b[(i, j)] * c;
                jpd[(i, j)] = u[i] * u[j] * b[(i, j)] * c / u[i];
                jqd[(i, j)] = u[i] * u[j] * b[(i, j)] * s / u[i];
                jpv[(i, j)] = -u[i] * b[(i, j)] * s / u[i];
                jqv[(i, j)] = u[i] * b[(i, j)] * c / u[i];
            }
            let cs = &state.converter_states[i];
            let der = state_derivatives(cs, &self.params[i])?;
            dc_p[i] = der.dp_du / u[i];
            dc_q[i] = der.dq_du / u[i];
            dc_diag[i] = if cs.p > 0.0 {
                cs.p / (u[i] * u[i]) * sensitivity_t(cs, &self.params[i])?.t
            } else {
                2.0 * self.params[i].omega * self.params[i].b_c
            };
            jpd[(i, i)] = -dp_ddi / u[i];
            jqd[(i, i)] = -dq_ddi / u[i];
            jpv[(i, i)] = dc_p[i] - dp_dui / u[i];
            jqv[(i, i)] = dc_q[i] - dq_dui / u[i];
        }
        Ok(JacobianBlocks {
            j_pdelta: jpd,
            j_pv: jpv,
            j_qdelta: jqd,
            j_qv: jqv,
            dc_diag,
            dc_p_exact: dc_p,
            dc_q_exact: dc_q,
        })
    }

    /// Newton iterations on `F = 0` for fixed power orders.
    pub fn solve(
        &self,
        orders: &DVector<f64>,
        warm: Option<&GridState>,
        opts: &NewtonOptions,
    ) -> Result<GridState, PowerFlowError> {
        let n = self.order();
        if orders.len() != n {
            return Err(PowerFlowError::Dimension {
                expected: n,
                got: orders.len(),
            });
        }
        if let Some(bad) = orders.iter().find(|o| !(**o >= 0.0)) {
            return Err(ConverterError::InvalidInput(format!("power order {bad} pu")).into());
        }
        let (d0, u0) = match warm {
            Some(w) => (w.delta.clone(), w.u.clone()),
            None => (DVector::zeros(n), DVector::from_element(n, 1.0)),
        };
        let diverged = |reason: &str, trace: &[f64]| PowerFlowError::Diverged {
            reason: reason.to_string(),
            trace: trace.to_vec(),
        };
        let mut trace = Vec::new();
        let mut state = match self.state_at(d0, u0, orders) {
            Ok(s) => s,
            Err(e) => return Err(diverged(&format!("initial guess infeasible: {e}"), &trace)),
        };
        let mut f = self.mismatch(&state);
        for _ in 0..=opts.max_iter {
            let norm = f.amax();
            trace.push(norm);
            if !norm.is_finite() {
                return Err(diverged("non-finite mismatch", &trace));
            }
            if norm <= opts.tol {
                return Ok(state);
            }
            if trace.len() > opts.max_iter {
                break;
            }
            let jac = self.assemble_jacobian(&state)?.full();
            // Blocks carry a 1/U row scaling; undo it on the right-hand side.
            let rhs = DVector::from_fn(2 * n, |k, _| -f[k] / state.u[k % n]);
            let step = match jac.lu().solve(&rhs) {
                Some(s) if s.iter().all(|x| x.is_finite()) => s,
                _ => return Err(diverged("singular Jacobian", &trace)),
            };
            let mut alpha = 1.0;
            let mut accepted = None;
            while alpha >= 1.0 / 1024.0 {
                let d = &state.delta + step.rows(0, n) * alpha;
                let u = &state.u + step.rows(n, n) * alpha;
                if u.iter().all(|x| *x > opts.u_min && *x < opts.u_max) {
                    if let Ok(s) = self.state_at(d, u, orders) {
                        let f_new = self.mismatch(&s);
                        if f_new.amax() < (1.0 - 1e-4 * alpha) * norm {
                            accepted = Some((s, f_new));
                            break;
                        }
                    }
                }
                alpha *= 0.5;
            }
            match accepted {
                Some((s, f_new)) => {
                    state = s;
                    f = f_new;
                }
                None => return Err(diverged("no acceptable step (stagnation or voltage band)", &trace)),
            }
        }
        Err(diverged("iteration limit", &trace))
    }

    /// Increase `λ` along `λ·rated_orders` until the flow stops converging.
    pub fn trace_map(&self, opts: &ContinuationOptions) -> Result<ContinuationResult, PowerFlowError> {
        let orders = |l: f64| &self.rated_orders * l;
        let base = self
            .solve(&orders(opts.start), None, &opts.newton)
            .map_err(|e| PowerFlowError::BaseInfeasible {
                lambda: opts.start,
                source: Box::new(e),
            })?;
        let mut steps = vec![self.step_record(opts.start, &base)?];
        let (mut lo, mut last) = (opts.start, base);
        let mut hi = None;
        while hi.is_none() {
            let next = lo + opts.step;
            if next > opts.lambda_cap {
                return Err(PowerFlowError::NoMap(opts.lambda_cap));
            }
            match self.solve(&orders(next), Some(&last), &opts.newton) {
                Ok(s) => {
                    steps.push(self.step_record(next, &s)?);
                    lo = next;
                    last = s;
                }
                Err(PowerFlowError::Diverged { .. }) => hi = Some(next),
                Err(e) => return Err(e),
            }
        }
        let mut hi = hi.unwrap_or(lo);
        while hi - lo > opts.lambda_tol {
            let mid = 0.5 * (lo + hi);
            match self.solve(&orders(mid), Some(&last), &opts.newton) {
                Ok(s) => {
                    steps.push(self.step_record(mid, &s)?);
                    lo = mid;
                    last = s;
                }
                Err(PowerFlowError::Diverged { .. }) => hi = mid,
                Err(e) => return Err(e),
            }
        }
        Ok(ContinuationResult {
            lambda_max: lo,
            mu_at_map: last.mu(),
            state_at_map: last,
            diverged_at: hi,
            steps,
        })
    }

    fn step_record(&self, lambda: f64, s: &GridState) -> Result<ContinuationStep, PowerFlowError> {
        Ok(ContinuationStep {
            lambda,
            u: s.u.iter().copied().collect(),
            p: s.p(),
            q: s.q(),
            mu: s.mu(),
            min_singular_value: self.assemble_jacobian(s)?.min_singular_value(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuationStep {
    pub lambda: f64,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// Overlap angles (rad).
    pub mu: Vec<f64>,
    pub min_singular_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuationResult {
    pub lambda_max: f64,
    pub state_at_map: GridState,
    /// Overlap angles at MAP (rad).
    pub mu_at_map: Vec<f64>,
    pub diverged_at: f64,
    /// Accepted points in the order they were solved.
    pub steps: Vec<ContinuationStep>,
}

impl ContinuationResult {
    /// Converter injections at MAP in MW.
    pub fn p_map_mw(&self, system_base_mva: f64) -> Vec<f64> {
        self.state_at_map
            .p()
            .iter()
            .map(|p| p * system_base_mva)
            .collect()
    }

    /// Accepted points sorted by λ.
    pub fn sorted_steps(&self) -> Vec<ContinuationStep> {
        let mut s = self.steps.clone();
        s.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        s
    }
}

/// Solve a case for explicit power orders.
pub fn newton_solve(
    case: &CaseFile,
    orders: &DVector<f64>,
    warm: Option<&GridState>,
) -> Result<GridState, PowerFlowError> {
    PowerFlowModel::from_case(case)?.solve(orders, warm, &NewtonOptions::default())
}

/// Continuation of a case along its rated orders.
pub fn trace_map(case: &CaseFile) -> Result<ContinuationResult, PowerFlowError> {
    PowerFlowModel::from_case(case)?.trace_map(&ContinuationOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::CaseFile;

    fn single(x: f64, b_c: f64) -> CaseFile {
        let text = format!(
            r#"{{
  "system_base_mva": 100,
  "frequency_hz": 60,
  "buses": [{{"id": 1, "kind": "converter"}}],
  "branches": [],
  "thevenin_links": [{{"bus": 1, "x_pu": {x}}}],
  "converters": [{{"bus": 1, "p_dn_mw": 100, "n_bridges": 2, "k_ratio": 0.418,
    "x_commutation_pu": 0.0527, "b_c_pu": {b_c}}}]
}}"#
        );
        CaseFile::from_json_str(&text, "inline").unwrap()
    }

    #[test]
    fn zero_orders_give_open_circuit_voltage() {
        let m = PowerFlowModel::from_case(&single(0.5, 0.0)).unwrap();
        let s = m.solve(&DVector::zeros(1), None, &NewtonOptions::default()).unwrap();
        assert!((s.u[0] - 1.0).abs() < 1e-12);
        assert!(s.delta[0].abs() < 1e-12);
        let m = PowerFlowModel::from_case(&single(0.5, 0.4)).unwrap();
        let s = m.solve(&DVector::zeros(1), None, &NewtonOptions::default()).unwrap();
        assert!((s.u[0] - 1.0 / (1.0 - 0.5 * 0.4)).abs() < 1e-9);
    }

    #[test]
    fn far_above_map_diverges() {
        let m = PowerFlowModel::from_case(&single(0.5, 0.5)).unwrap();
        let r = m.solve(&DVector::from_element(1, 10.0), None, &NewtonOptions::default());
        assert!(matches!(r, Err(PowerFlowError::Diverged { .. })));
    }

    #[test]
    fn converged_state_meets_tolerance() {
        let m = PowerFlowModel::from_case(&single(0.25, 0.55)).unwrap();
        let s = m
            .solve(&DVector::from_element(1, 1.0), None, &NewtonOptions::default())
            .unwrap();
        assert!(m.mismatch(&s).amax() <= 1e-8);
    }

    #[test]
    fn map_bracket_is_tight() {
        let m = PowerFlowModel::from_case(&single(0.25, 0.55)).unwrap();
        let r = m.trace_map(&ContinuationOptions::default()).unwrap();
        assert!(r.lambda_max < r.diverged_at);
        assert!(r.diverged_at - r.lambda_max <= 1e-4);
        assert!(r.lambda_max > 1.0);
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let m = PowerFlowModel::from_case(&single(1.0 / 3.0, 0.5)).unwrap();
        let o = DVector::from_element(1, 0.5);
        let s = m
            .state_at(DVector::from_element(1, 0.3), DVector::from_element(1, 0.95), &o)
            .unwrap();
        let j = m.assemble_jacobian(&s).unwrap().full();
        let h = 1e-6;
        for k in 0..2 {
            let (mut dp, mut up) = (s.delta.clone(), s.u.clone());
            let (mut dm, mut um) = (s.delta.clone(), s.u.clone());
            if k == 0 {
                dp[0] += h;
                dm[0] -= h;
            } else {
                up[0] += h;
                um[0] -= h;
            }
            let fp = m.mismatch(&m.state_at(dp, up, &o).unwrap());
            let fm = m.mismatch(&m.state_at(dm, um, &o).unwrap());
            let col = (fp - fm) / (2.0 * h * s.u[0]);
            for r in 0..2 {
                assert!((col[r] - j[(r, k)]).abs() <= 1e-6 * j[(r, k)].abs().max(1.0));
            }
        }
    }
}
