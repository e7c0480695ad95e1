//! The ambient space: flat `R^n` with the Euclidean metric and a constant
//! almost product structure `F`.
//!
//! Because `F` is constant its covariant derivative vanishes, so any `F`
//! accepted here makes `R^n` a locally product Riemannian manifold.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::tol;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum StructureError {
    #[error("signature must contain at least one +1 and one -1 (F = ±I is excluded)")]
    TrivialSignature,
    #[error("signature entries must be +1 or -1, found {0}")]
    BadSign(f64),
    #[error("structure matrix must be square, got {rows}×{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("F is not an involution: max |F² - I| = {0:e}")]
    NotInvolutive(f64),
    #[error("F does not preserve the metric: max |FᵀF - I| = {0:e}")]
    NotIsometric(f64),
    #[error("F = {0} is excluded")]
    Trivial(&'static str),
    #[error("dimension mismatch: structure acts on R^{expected}, vector has {found} entries")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Residuals of the structure axioms for a candidate matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureReport {
    pub dim: usize,
    /// max |(F²)_ij - δ_ij|
    pub involution_residual: f64,
    /// max |(FᵀF)_ij - δ_ij|
    pub isometry_residual: f64,
    /// "identity" / "minus identity" when F = ±I.
    pub trivial: Option<&'static str>,
    pub valid: bool,
}

pub fn validate_structure(f: &DMatrix<f64>) -> Result<StructureReport, StructureError> {
    if !f.is_square() {
        return Err(StructureError::NotSquare {
            rows: f.nrows(),
            cols: f.ncols(),
        });
    }
    let n = f.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let max_abs = |m: DMatrix<f64>| m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let involution_residual = max_abs(f * f - &id);
    let isometry_residual = max_abs(f.transpose() * f - &id);
    let trivial = if f == &id {
        Some("identity")
    } else if f == &(-&id) {
        Some("minus identity")
    } else {
        None
    };
    let valid = trivial.is_none()
        && involution_residual <= tol::STRUCTURE
        && isometry_residual <= tol::STRUCTURE;
    Ok(StructureReport {
        dim: n,
        involution_residual,
        isometry_residual,
        trivial,
        valid,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductStructure {
    matrix: DMatrix<f64>,
    signature: Option<Vec<i8>>,
}

impl ProductStructure {
    /// Diagonal `F` with the given signs.
    pub fn from_signature(signs: &[i8]) -> Result<Self, StructureError> {
        if let Some(&bad) = signs.iter().find(|s| **s != 1 && **s != -1) {
            return Err(StructureError::BadSign(bad as f64));
        }
        if !(signs.contains(&1) && signs.contains(&-1)) {
            return Err(StructureError::TrivialSignature);
        }
        let diag = DVector::from_iterator(signs.len(), signs.iter().map(|&s| s as f64));
        Ok(Self {
            matrix: DMatrix::from_diagonal(&diag),
            signature: Some(signs.to_vec()),
        })
    }

    /// General constant involutive isometry, validated with tolerance 1e-12.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self, StructureError> {
        let report = validate_structure(&matrix)?;
        if let Some(which) = report.trivial {
            return Err(StructureError::Trivial(which));
        }
        if report.involution_residual > tol::STRUCTURE {
            return Err(StructureError::NotInvolutive(report.involution_residual));
        }
        if report.isometry_residual > tol::STRUCTURE {
            return Err(StructureError::NotIsometric(report.isometry_residual));
        }
        Ok(Self {
            matrix,
            signature: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn signature(&self) -> Option<&[i8]> {
        self.signature.as_deref()
    }

    pub fn report(&self) -> StructureReport {
        validate_structure(&self.matrix).expect("square by construction")
    }

    pub fn apply(&self, v: &DVector<f64>) -> Result<DVector<f64>, StructureError> {
        if v.len() != self.dim() {
            return Err(StructureError::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        Ok(&self.matrix * v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_dimensional_signature() {
        let f = ProductStructure::from_signature(&[1, 1, -1, -1]).unwrap();
        let r = f.report();
        assert!(r.valid);
        assert_eq!(r.involution_residual, 0.0);
        assert_eq!(r.isometry_residual, 0.0);
    }

    #[test]
    fn six_dimensional_signature() {
        let f = ProductStructure::from_signature(&[-1, -1, -1, 1, 1, 1]).unwrap();
        assert_eq!(f.report().involution_residual, 0.0);
        assert_eq!(f.dim(), 6);
    }

    #[test]
    fn identity_signature_rejected() {
        assert_eq!(
            ProductStructure::from_signature(&[1, 1, 1, 1]),
            Err(StructureError::TrivialSignature)
        );
        assert!(ProductStructure::from_signature(&[1, 0, -1]).is_err());
    }

    #[test]
    fn identity_matrix_flagged_trivial() {
        let r = validate_structure(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(r.trivial, Some("identity"));
        assert!(!r.valid);
        assert!(ProductStructure::from_matrix(DMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn swap_reflection_is_valid() {
        // [[0,1],[1,0]]^2 = I and its transpose is itself
        let swap = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let r = validate_structure(&swap).unwrap();
        assert!(r.valid);
        assert_eq!(r.involution_residual, 0.0);
        assert!(ProductStructure::from_matrix(swap).is_ok());
    }

    #[test]
    fn non_involution_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(matches!(
            ProductStructure::from_matrix(m),
            Err(StructureError::NotInvolutive(_))
        ));
        let shear = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, -1.0]);
        assert!(matches!(
            ProductStructure::from_matrix(shear),
            Err(StructureError::NotIsometric(_))
        ));
    }

    #[test]
    fn apply_signature() {
        let f = ProductStructure::from_signature(&[1, 1, -1, -1]).unwrap();
        let v = DVector::from_vec(vec![1.0, 0.0, 1.0, 0.0]);
        assert_eq!(f.apply(&v).unwrap().as_slice(), &[1.0, 0.0, -1.0, 0.0]);
        let zero = DVector::zeros(4);
        assert_eq!(f.apply(&zero).unwrap(), zero);
        assert!(f.apply(&DVector::zeros(3)).is_err());
    }

    #[test]
    fn apply_to_tangent_vector_of_six_dimensional_example() {
        // first tangent vector of the R^6 example at (u, v, w) = (0, 1, 2):
        // (-v sin u, v cos u, 0, -w sin u, w cos u, 0) = (0, 1, 0, 0, 2, 0)
        let f = ProductStructure::from_signature(&[-1, -1, -1, 1, 1, 1]).unwrap();
        let v1 = DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0, 2.0, 0.0]);
        assert_eq!(
            f.apply(&v1).unwrap().as_slice(),
            &[0.0, -1.0, 0.0, 0.0, 2.0, 0.0]
        );
    }
}
