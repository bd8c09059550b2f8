//! Guaranteed and asymptotic eigenvalue bounds built from the estimator.
//!
//! With `α = λ^L / (λ^L − λ̂)`, where `λ^L` is a lower bound of the next
//! eigenvalue:
//!
//! * eigenfunction error: `‖u − û‖_a ≤ α η`;
//! * eigenvalue: `λ̂ − α · λ^L / (λ^L − α² η²) · η² ≤ λ`;
//! * asymptotic: `λ_h − κ η²` for any `κ > 1`.

use std::fmt;
use std::sync::Arc;

use crate::error::{BoundError, Error, Result};
use crate::fem::{assemble_primal, make_space, Family};
use crate::mesh::Mesh;
use crate::solvers::{eig_smallest, EigenPair};

/// Constant of the Crouzeix–Raviart interpolation estimate on triangles.
pub const CR_CONSTANT: f64 = 0.1893;

pub const DEFAULT_KAPPA: f64 = 2.0;

/// Where the lower bound of the next eigenvalue came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    CrComputed,
    UserSupplied,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::CrComputed => "cr_computed",
            Provenance::UserSupplied => "user_supplied",
        })
    }
}

/// `1 + μ / (1 + C_h² μ)` with `C_h = 0.1893 h_max`.
pub fn cr_lower_from_laplace(mu: f64, h_max: f64) -> f64 {
    let ch = CR_CONSTANT * h_max;
    1.0 + mu / (1.0 + ch * ch * mu)
}

/// Lower bounds of the first `k` eigenvalues from the Crouzeix–Raviart
/// eigenvalues of the Laplacian on `mesh`.
pub fn cr_lambda_lowers(mesh: &Arc<Mesh>, k: usize, tol: f64) -> Result<Vec<f64>> {
    let space = make_space(mesh.clone(), Family::CrouzeixRaviart, 1)?;
    if k == 0 || k > space.n_free() {
        return Err(Error::Argument(format!(
            "requested Crouzeix-Raviart eigenvalue {k}, space has {} free DOFs",
            space.n_free()
        )));
    }
    let (a, b) = assemble_primal(&space)?;
    let pairs = eig_smallest(&a, &b, k, tol)?;
    let h = mesh.h_max();
    // A = K + M, so the Laplace eigenvalue is λ − 1
    Ok(pairs
        .iter()
        .map(|p| cr_lower_from_laplace(p.value - 1.0, h))
        .collect())
}

/// Lower bound `λ_k^L` of the `k`-th eigenvalue (1-based).
pub fn cr_lambda_lower(mesh: &Arc<Mesh>, k: usize) -> Result<f64> {
    Ok(*cr_lambda_lowers(mesh, k, crate::solvers::DEFAULT_EIG_TOL)?
        .last()
        .expect("k >= 1"))
}

fn check_eta(eta: f64) -> Result<(), BoundError> {
    if eta >= 0.0 {
        Ok(())
    } else {
        Err(BoundError::NegativeEta(eta))
    }
}

/// `α = λ^L / (λ^L − λ̂)`; requires `λ̂ < λ^L`.
pub fn alpha(lambda_hat: f64, lambda_next_lower: f64) -> Result<f64, BoundError> {
    if lambda_hat < lambda_next_lower {
        Ok(lambda_next_lower / (lambda_next_lower - lambda_hat))
    } else {
        Err(BoundError::Separation {
            lambda_hat,
            lambda_next_lower,
        })
    }
}

/// Guaranteed upper bound of the eigenfunction error in the energy norm.
pub fn fun_error_upper_bound(
    lambda_hat1: f64,
    eta: f64,
    lambda2_lower: f64,
) -> Result<f64, BoundError> {
    check_eta(eta)?;
    Ok(alpha(lambda_hat1, lambda2_lower)? * eta)
}

/// Guaranteed lower bound of the first eigenvalue.
pub fn lambda1_lower_guaranteed(
    lambda_hat1: f64,
    eta: f64,
    lambda2_lower: f64,
) -> Result<f64, BoundError> {
    check_eta(eta)?;
    let a = alpha(lambda_hat1, lambda2_lower)?;
    let eta_sq = eta * eta;
    let denominator = lambda2_lower - a * a * eta_sq;
    if denominator <= 0.0 {
        return Err(BoundError::Denominator { denominator });
    }
    Ok(lambda_hat1 - a * (lambda2_lower / denominator) * eta_sq)
}

/// Asymptotic lower bound `λ_h − κ η²`.
pub fn lambda_lower_asymptotic(lambda_ih: f64, eta: f64, kappa: f64) -> Result<f64, BoundError> {
    if !(kappa > 1.0) {
        return Err(BoundError::Kappa(kappa));
    }
    check_eta(eta)?;
    Ok(lambda_ih - kappa * eta * eta)
}

/// Guaranteed lower bounds of the first `m = pairs.len()` eigenvalues given a
/// lower bound of eigenvalue `m + 1`. If `λ_{m,h} ≥ λ_{m+1}^L` every index is
/// inapplicable.
pub fn first_m_lower_bounds(
    pairs: &[EigenPair],
    lambda_next_lower: f64,
    etas: &[f64],
) -> Result<Vec<Result<f64, BoundError>>> {
    if pairs.len() != etas.len() {
        return Err(Error::Argument(format!(
            "{} eigenpairs but {} estimator values",
            pairs.len(),
            etas.len()
        )));
    }
    let values: Vec<f64> = pairs.iter().map(|p| p.value).collect();
    Ok(first_m_from_values(&values, lambda_next_lower, etas))
}

pub(crate) fn first_m_from_values(
    values: &[f64],
    lambda_next_lower: f64,
    etas: &[f64],
) -> Vec<Result<f64, BoundError>> {
    let Some(&last) = values.last() else {
        return Vec::new();
    };
    if last >= lambda_next_lower {
        let err = BoundError::Separation {
            lambda_hat: last,
            lambda_next_lower,
        };
        return vec![Err(err); values.len()];
    }
    values
        .iter()
        .zip(etas)
        .map(|(&l, &e)| lambda1_lower_guaranteed(l, e, lambda_next_lower))
        .collect()
}

/// All bounds for one computed eigenpair.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    /// 1-based eigenvalue index
    pub index: usize,
    pub lambda_h: f64,
    pub eta: f64,
    pub eta_sq: f64,
    pub lambda_next_lower: f64,
    pub provenance: Provenance,
    pub alpha: Option<f64>,
    pub fun_error_upper: Option<f64>,
    pub lambda_lower_guaranteed: Option<f64>,
    pub lambda_lower_asymptotic: f64,
    pub kappa: f64,
}

impl BoundsReport {
    /// Builds the report; guaranteed bounds are computed only when
    /// `guaranteed` is set (the index is within the first `m`) and their
    /// preconditions hold.
    pub fn new(
        index: usize,
        lambda_h: f64,
        eta: f64,
        lambda_next_lower: f64,
        provenance: Provenance,
        kappa: f64,
        guaranteed: bool,
    ) -> Result<Self> {
        let lambda_lower_asymptotic = lambda_lower_asymptotic(lambda_h, eta, kappa)?;
        let (alpha, fun_error_upper, lambda_lower_guaranteed) = if guaranteed {
            (
                alpha(lambda_h, lambda_next_lower).ok(),
                fun_error_upper_bound(lambda_h, eta, lambda_next_lower).ok(),
                lambda1_lower_guaranteed(lambda_h, eta, lambda_next_lower).ok(),
            )
        } else {
            (None, None, None)
        };
        Ok(BoundsReport {
            index,
            lambda_h,
            eta,
            eta_sq: eta * eta,
            lambda_next_lower,
            provenance,
            alpha,
            fun_error_upper,
            lambda_lower_guaranteed,
            lambda_lower_asymptotic,
            kappa,
        })
    }
}
