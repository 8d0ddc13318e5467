//! Oriented planes given by ordered orthonormal bases.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exterior::Vector;
use crate::linalg;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct OrientedPlane<S> {
    basis: Vec<Vector<S>>,
}

impl<S: Scalar> OrientedPlane<S> {
    /// Rows must be orthonormal: exactly on the rational backend, within
    /// `tol` (max entry of `GGᵀ − I`) on floats.
    pub fn new(basis: Vec<Vector<S>>, tol: f64) -> Result<Self> {
        let n = basis.first().map_or(0, Vector::dim);
        if basis.is_empty() || basis.len() > n {
            return Err(Error::DegeneratePlane { rank: basis.len(), expected: n.max(1) });
        }
        if let Some(v) = basis.iter().find(|v| v.dim() != n) {
            return Err(Error::DimensionMismatch { left: n, right: v.dim() });
        }
        let residual = orthonormality_residual(&basis);
        if !residual.is_negligible(tol) {
            return Err(Error::NonOrthonormal { residual: residual.to_f64() });
        }
        Ok(Self { basis })
    }

    /// `span{e_i : i ∈ indices}` in the given order.
    pub fn coordinate(ambient: usize, indices: &[usize]) -> Result<Self> {
        if let Some(&i) = indices.iter().find(|&&i| i == 0 || i > ambient) {
            return Err(Error::IndexOutOfRange { index: i, dim: ambient });
        }
        Self::new(indices.iter().map(|&i| Vector::basis(ambient, i)).collect(), 0.0)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis[0].dim()
    }

    pub fn basis(&self) -> &[Vector<S>] {
        &self.basis
    }

    pub fn to_f64(&self) -> OrientedPlane<f64> {
        OrientedPlane { basis: self.basis.iter().map(Vector::to_f64).collect() }
    }

    /// `2p × 2m` matrix with the basis as rows.
    pub fn rows(&self) -> Vec<Vec<S>> {
        self.basis.iter().map(|v| v.comps().to_vec()).collect()
    }
}

impl OrientedPlane<f64> {
    /// Orthonormalize arbitrary spanning rows, keeping their orientation.
    pub fn orthonormalize(rows: Vec<Vector<f64>>, tol: f64) -> Result<Self> {
        let k = rows.len();
        let (basis, rank) = linalg::gram_schmidt(&rows, tol);
        if rank < k {
            return Err(Error::DegeneratePlane { rank, expected: k });
        }
        OrientedPlane::new(basis, 1e-10)
    }

    /// Columns form an orthonormal basis of the plane.
    pub fn frame_matrix(&self) -> DMatrix<f64> {
        linalg::columns(&self.basis)
    }

    /// Orthogonal projector onto the plane.
    pub fn projector(&self) -> DMatrix<f64> {
        let f = self.frame_matrix();
        &f * f.transpose()
    }
}

pub fn orthonormality_residual<S: Scalar>(basis: &[Vector<S>]) -> S {
    let mut worst = S::zero();
    for (a, u) in basis.iter().enumerate() {
        for (b, v) in basis.iter().enumerate() {
            let target = if a == b { S::one() } else { S::zero() };
            let r = (u.dot(v) - target).abs();
            if r > worst {
                worst = r;
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn rejects_non_orthonormal() {
        let rows = vec![Vector::<Rational>::from_i64(&[1, 1, 0]), Vector::from_i64(&[0, 1, 0])];
        assert!(matches!(OrientedPlane::new(rows, 0.0), Err(Error::NonOrthonormal { .. })));
        let ok = OrientedPlane::<Rational>::coordinate(8, &[1, 3, 5, 7]).unwrap();
        assert_eq!(ok.dim(), 4);
        assert_eq!(ok.ambient_dim(), 8);
    }

    #[test]
    fn orthonormalize_detects_degenerate() {
        let rows = vec![Vector::new(vec![1.0, 2.0, 0.0]), Vector::new(vec![2.0, 4.0, 0.0])];
        assert!(matches!(
            OrientedPlane::orthonormalize(rows, 1e-10),
            Err(Error::DegeneratePlane { rank: 1, expected: 2 })
        ));
        let rows = vec![Vector::new(vec![1.0, 2.0, 0.0]), Vector::new(vec![0.0, 1.0, 1.0])];
        let p = OrientedPlane::orthonormalize(rows, 1e-10).unwrap();
        assert!(orthonormality_residual(p.basis()) < 1e-14);
    }
}
