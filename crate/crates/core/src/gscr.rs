//! Extended Jacobian `J_eq = −D·B` with `D = diag(1/P_Ni)`, its spectrum, the
//! generalized short circuit ratio and strength classification.
//!
//! `J_eq` is not symmetric, but it is diagonally similar to
//! `S = D^½·(−B)·D^½`, which is. All eigen-solves go through `S`: the spectrum
//! is real, the basis orthogonal, and an eigenvector `v` of `S` maps to the
//! eigenvector `D^½·v` of `J_eq`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::netmodel::{build_susceptance, kron_reduce, CaseFile, NetworkError, SusceptanceMatrix};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GscrError {
    #[error("dimension mismatch: matrix order {matrix}, {vector} ratings")]
    DimensionMismatch { matrix: usize, vector: usize },
    #[error("rating {index} is not positive: {value}")]
    NonPositiveRating { index: usize, value: f64 },
    #[error("eigensolver failure: {0}")]
    EigenFailure(String),
    #[error("extended Jacobian is singular")]
    Singular,
    #[error("thresholds must satisfy 0 < cg < bg, got cg = {cg}, bg = {bg}")]
    InvalidThresholds { cg: f64, bg: f64 },
    #[error("eigenvalue argument must be positive, got {0}")]
    NonPositiveEigenvalue(f64),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// `J_eq = −diag(1/P_N)·B_red`, kept together with the symmetric pieces it was
/// built from.
#[derive(Debug, Clone)]
pub struct ExtendedJacobian {
    matrix: DMatrix<f64>,
    p_n: DVector<f64>,
    neg_b: DMatrix<f64>,
    buses: Vec<u32>,
}

impl ExtendedJacobian {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn ratings(&self) -> &DVector<f64> {
        &self.p_n
    }

    pub fn buses(&self) -> &[u32] {
        &self.buses
    }

    pub fn order(&self) -> usize {
        self.p_n.len()
    }

    /// `D^½·(−B)·D^½`
    pub fn symmetrized(&self) -> DMatrix<f64> {
        let inv_sqrt = self.p_n.map(|p| 1.0 / p.sqrt());
        let n = self.order();
        DMatrix::from_fn(n, n, |i, j| inv_sqrt[i] * self.neg_b[(i, j)] * inv_sqrt[j])
    }
}

pub fn extended_jacobian(
    b_red: &SusceptanceMatrix,
    p_n: &DVector<f64>,
) -> Result<ExtendedJacobian, GscrError> {
    let n = b_red.order();
    if p_n.len() != n {
        return Err(GscrError::DimensionMismatch {
            matrix: n,
            vector: p_n.len(),
        });
    }
    if let Some((index, value)) = p_n.iter().enumerate().find(|(_, p)| !(**p > 0.0)) {
        return Err(GscrError::NonPositiveRating {
            index,
            value: *value,
        });
    }
    let neg_b = -b_red.entries();
    let matrix = DMatrix::from_fn(n, n, |i, j| neg_b[(i, j)] / p_n[i]);
    Ok(ExtendedJacobian {
        matrix,
        p_n: p_n.clone(),
        neg_b,
        buses: b_red.buses().to_vec(),
    })
}

/// Spectrum of `J_eq` in ascending order.
#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    pub lambdas: Vec<f64>,
    /// Eigenvector of λ₁, all components of one sign, normalized to unit sum.
    pub perron_vector: Vec<f64>,
    /// Columns are eigenvectors of `J_eq` (`W⁻¹·J_eq·W = diag(λ)`).
    #[serde(skip)]
    pub transform: DMatrix<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GscrResult {
    pub gscr: f64,
    pub eigen: EigenResult,
}

pub fn compute_gscr(j: &ExtendedJacobian) -> Result<GscrResult, GscrError> {
    let n = j.order();
    let s = j.symmetrized();
    let eig = SymmetricEigen::try_new(s, 1e-15, 10_000)
        .ok_or_else(|| GscrError::EigenFailure("symmetric QR iteration did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
    let lambdas: Vec<f64> = order.iter().map(|k| eig.eigenvalues[*k]).collect();
    if lambdas.iter().any(|l| !l.is_finite()) {
        return Err(GscrError::EigenFailure("non-finite eigenvalue".into()));
    }
    let inv_sqrt = j.p_n.map(|p| 1.0 / p.sqrt());
    let transform = DMatrix::from_fn(n, n, |i, k| inv_sqrt[i] * eig.eigenvectors[(i, order[k])]);

    let mut w: DVector<f64> = transform.column(0).into_owned();
    let pivot = w.iamax();
    if w[pivot] < 0.0 {
        w = -w;
    }
    let sum = w.sum();
    if sum.abs() > 0.0 {
        w /= sum;
    }
    let residual = (j.matrix() * &w - &w * lambdas[0]).norm();
    let scale = j.matrix().norm() * w.norm();
    if !(residual <= 1e-10 * scale) {
        return Err(GscrError::EigenFailure(format!(
            "eigenpair residual {residual:e} exceeds 1e-10·‖J‖"
        )));
    }
    Ok(GscrResult {
        gscr: lambdas[0],
        eigen: EigenResult {
            lambdas,
            perron_vector: w.iter().copied().collect(),
            transform,
        },
    })
}

/// Relative gap below which λ₁ is reported as numerically degenerate.
pub const SIMPLICITY_GAP: f64 = 1e-9;

/// Margins for the three spectral properties of `J_eq`: positive spectrum,
/// simple minimum eigenvalue, positive eigenvector.
#[derive(Debug, Clone, Serialize)]
pub struct Lemma2Report {
    pub lambda_min: f64,
    pub positive: bool,
    /// `λ₂ − λ₁`, absent for a single bus.
    pub gap: Option<f64>,
    /// `(λ₂ − λ₁)/λ_n`
    pub relative_gap: Option<f64>,
    pub simple: bool,
    pub min_perron_component: f64,
    pub perron_positive: bool,
    pub numerically_degenerate: bool,
}

impl Lemma2Report {
    pub fn holds(&self) -> bool {
        self.positive && self.simple && self.perron_positive
    }
}

pub fn lemma2_check(j: &ExtendedJacobian) -> Result<Lemma2Report, GscrError> {
    let res = compute_gscr(j)?;
    let l = &res.eigen.lambdas;
    let n = l.len();
    let (gap, relative_gap) = if n > 1 {
        let gap = l[1] - l[0];
        (Some(gap), Some(gap / l[n - 1].abs()))
    } else {
        (None, None)
    };
    let simple = relative_gap.is_none_or(|g| g > SIMPLICITY_GAP);
    let min_perron = res
        .eigen
        .perron_vector
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(Lemma2Report {
        lambda_min: l[0],
        positive: l[0] > 0.0,
        gap,
        relative_gap,
        simple,
        min_perron_component: min_perron,
        perron_positive: min_perron > 0.0,
        numerically_degenerate: !simple,
    })
}

/// `Δ = ρ·T + ρ²/λ − λ`
pub fn characteristic_delta(rho: f64, t: f64, lam: f64) -> Result<f64, GscrError> {
    if !(lam > 0.0) {
        return Err(GscrError::NonPositiveEigenvalue(lam));
    }
    Ok(rho * t + rho * rho / lam - lam)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FactorizationCheck {
    /// `det(ρT·I + ρ²·J⁻¹ − J)`
    pub determinant: f64,
    /// `Π_i (ρT + ρ²/λ_i − λ_i)`
    pub product: f64,
    pub residual: f64,
}

/// Compare the matrix determinant with the product of decoupled factors.
pub fn factorization_check(
    j: &ExtendedJacobian,
    rho: f64,
    t: f64,
) -> Result<FactorizationCheck, GscrError> {
    let n = j.order();
    let inv = j.matrix().clone().try_inverse().ok_or(GscrError::Singular)?;
    let m = DMatrix::identity(n, n) * (rho * t) + inv * (rho * rho) - j.matrix();
    let determinant = m.lu().determinant();
    let lambdas = compute_gscr(j)?.eigen.lambdas;
    if lambdas.contains(&0.0) {
        return Err(GscrError::Singular);
    }
    let product = lambdas
        .iter()
        .map(|l| rho * t + rho * rho / l - l)
        .product::<f64>();
    let scale = determinant.abs().max(product.abs());
    let residual = if scale == 0.0 {
        0.0
    } else {
        (determinant - product).abs() / scale
    };
    Ok(FactorizationCheck {
        determinant,
        product,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Strength {
    VeryWeak,
    Weak,
    Strong,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub cg: f64,
    pub bg: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { cg: 2.0, bg: 3.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrengthClass {
    pub strength: Strength,
    pub thresholds: Thresholds,
}

/// Very weak below `cg`, strong above `bg`, weak in between (inclusive).
pub fn classify(gscr: f64, cg: f64, bg: f64) -> Result<StrengthClass, GscrError> {
    if !(cg > 0.0 && cg < bg && bg.is_finite()) {
        return Err(GscrError::InvalidThresholds { cg, bg });
    }
    let strength = if gscr < cg {
        Strength::VeryWeak
    } else if gscr > bg {
        Strength::Strong
    } else {
        Strength::Weak
    };
    Ok(StrengthClass {
        strength,
        thresholds: Thresholds { cg, bg },
    })
}

/// Extended Jacobian of a validated case.
pub fn case_jacobian(case: &CaseFile) -> Result<ExtendedJacobian, GscrError> {
    let b = build_susceptance(case);
    let b_red = kron_reduce(&b, &case.converter_buses())?;
    extended_jacobian(&b_red, &case.rated_powers())
}

/// gSCR of a validated case.
pub fn case_gscr(case: &CaseFile) -> Result<f64, GscrError> {
    Ok(compute_gscr(&case_jacobian(case)?)?.gscr)
}

/// Everything the `gscr` report shows for one case.
#[derive(Debug, Clone, Serialize)]
pub struct GscrReport {
    pub case: String,
    pub buses: Vec<u32>,
    pub rated_power_mw: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub gscr: f64,
    pub perron_vector: Vec<f64>,
    pub class: Strength,
    pub thresholds: Thresholds,
    pub lemma2: Lemma2Report,
}

pub fn analyze_case(case: &CaseFile, thresholds: Thresholds) -> Result<GscrReport, GscrError> {
    let j = case_jacobian(case)?;
    let res = compute_gscr(&j)?;
    let class = classify(res.gscr, thresholds.cg, thresholds.bg)?;
    Ok(GscrReport {
        case: case.label().to_string(),
        buses: j.buses().to_vec(),
        rated_power_mw: j.ratings().iter().map(|p| p * case.system_base_mva).collect(),
        eigenvalues: res.eigen.lambdas.clone(),
        gscr: res.gscr,
        perron_vector: res.eigen.perron_vector.clone(),
        class: class.strength,
        thresholds,
        lemma2: lemma2_check(&j)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jac(b: &[&[f64]], p: &[f64]) -> ExtendedJacobian {
        let n = b.len();
        let m = DMatrix::from_fn(n, n, |i, j| b[i][j]);
        let buses = (1..=n as u32).collect();
        extended_jacobian(&SusceptanceMatrix::new(m, buses), &DVector::from_column_slice(p)).unwrap()
    }

    #[test]
    fn single_infeed_reduces_to_scr() {
        let j = jac(&[&[-2.0]], &[1.0]);
        assert_eq!(j.matrix()[(0, 0)], 2.0);
        assert_eq!(compute_gscr(&j).unwrap().gscr, 2.0);
    }

    #[test]
    fn two_by_two_hand_diagonalization() {
        let j = jac(&[&[-2.0, 1.0], &[1.0, -2.0]], &[1.0, 1.0]);
        assert_eq!(j.matrix(), &DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]));
        let r = compute_gscr(&j).unwrap();
        assert!((r.gscr - 1.0).abs() < 1e-14);
        assert!((r.eigen.lambdas[1] - 3.0).abs() < 1e-14);
        for w in &r.eigen.perron_vector {
            assert!((w - 0.5).abs() < 1e-14);
        }
        let l2 = lemma2_check(&j).unwrap();
        assert!(l2.holds());
        assert!((l2.gap.unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn unequal_ratings_hand_computation() {
        let j = jac(&[&[-2.0, 1.0], &[1.0, -2.0]], &[2.0, 1.0]);
        assert_eq!(j.matrix(), &DMatrix::from_row_slice(2, 2, &[1.0, -0.5, -1.0, 2.0]));
    }

    #[test]
    fn bad_inputs() {
        let b = SusceptanceMatrix::new(DMatrix::from_element(1, 1, -2.0), vec![1]);
        assert!(matches!(
            extended_jacobian(&b, &DVector::from_column_slice(&[1.0, 1.0])),
            Err(GscrError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            extended_jacobian(&b, &DVector::from_column_slice(&[0.0])),
            Err(GscrError::NonPositiveRating { .. })
        ));
    }

    #[test]
    fn uncoupled_identical_converters_flag_degeneracy() {
        let j = jac(&[&[-2.0, 0.0], &[0.0, -2.0]], &[1.0, 1.0]);
        let l2 = lemma2_check(&j).unwrap();
        assert!(l2.positive);
        assert!(!l2.simple);
        assert!(l2.numerically_degenerate);
        assert!(!l2.holds());
    }

    #[test]
    fn delta_examples() {
        assert!(characteristic_delta(1.0, 1.5, 2.0).unwrap().abs() < 1e-15);
        assert_eq!(characteristic_delta(1.0, 0.0, 1.0).unwrap(), 0.0);
        assert!(characteristic_delta(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn delta_decreases_in_lambda() {
        for &(rho, t) in &[(0.5, 0.3), (1.0, 1.5), (1.4, 2.0)] {
            let mut prev = f64::INFINITY;
            for k in 1..400 {
                let d = characteristic_delta(rho, t, k as f64 * 0.01).unwrap();
                assert!(d < prev);
                prev = d;
            }
        }
    }

    #[test]
    fn factorization_two_by_two() {
        let j = jac(&[&[-2.0, 1.0], &[1.0, -2.0]], &[1.0, 1.0]);
        let f = factorization_check(&j, 1.0, 1.0).unwrap();
        assert!((f.product + 5.0 / 3.0).abs() < 1e-14);
        assert!((f.determinant + 5.0 / 3.0).abs() < 1e-14);
        assert!(f.residual <= 1e-12);
        let one = jac(&[&[-2.5]], &[1.0]);
        assert!(factorization_check(&one, 0.9, 1.3).unwrap().residual <= 1e-15);
    }

    #[test]
    fn classification_boundaries() {
        assert_eq!(classify(1.5, 2.0, 3.0).unwrap().strength, Strength::VeryWeak);
        assert_eq!(classify(2.5, 2.0, 3.0).unwrap().strength, Strength::Weak);
        assert_eq!(classify(3.0, 2.0, 3.0).unwrap().strength, Strength::Weak);
        assert_eq!(classify(2.0, 2.0, 3.0).unwrap().strength, Strength::Weak);
        assert_eq!(classify(3.01, 2.0, 3.0).unwrap().strength, Strength::Strong);
        assert!(classify(2.5, 3.0, 2.0).is_err());
        assert!(classify(2.5, 0.0, 2.0).is_err());
    }
}
