//! Linear-subspace geometry: orthonormal bases, projections, angles and the
//! intersection-angle inequality.
//!
//! The angle between subspaces is the one-sided quantity
//! `sup { d(u, F) : u in E, |u| <= 1 }`, computed from projector algebra and
//! singular values rather than by sampling; sampling is reserved for test
//! oracles. A symmetric gap metric is intentionally not provided.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tol::Tolerances;

/// A linear subspace of R^n held as an orthonormal basis (n x k matrix of
/// columns). The zero subspace has an empty basis.
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient_dim: usize,
    basis: DMatrix<f64>,
}

impl Subspace {
    /// The zero subspace of R^n.
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: DMatrix::zeros(ambient_dim, 0),
        }
    }

    /// Span of the given vectors. Dependent vectors are dropped (residual
    /// norm below `rank_drop`), so rank-deficient input is not an error.
    pub fn orthonormalize(vectors: &[DVector<f64>]) -> Result<Self> {
        let ambient_dim = match vectors.first() {
            Some(v) => v.len(),
            None => {
                return Err(Error::Schema(
                    "orthonormalize requires at least one vector; use Subspace::zero".into(),
                ))
            }
        };
        Self::span(ambient_dim, vectors)
    }

    /// Span of the given vectors inside R^`ambient_dim`.
    pub fn span(ambient_dim: usize, vectors: &[DVector<f64>]) -> Result<Self> {
        let tol = crate::tol::DEFAULT;
        let mut basis: Vec<DVector<f64>> = Vec::new();
        for v in vectors {
            if v.len() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    got: v.len(),
                });
            }
            let mut w = v.clone();
            // two Gram-Schmidt passes for numerical orthogonality
            for _ in 0..2 {
                for b in &basis {
                    let c = b.dot(&w);
                    w -= b * c;
                }
            }
            let norm = w.norm();
            if norm >= tol.rank_drop {
                basis.push(w / norm);
            }
        }
        let basis = if basis.is_empty() {
            DMatrix::zeros(ambient_dim, 0)
        } else {
            DMatrix::from_columns(&basis)
        };
        Ok(Self { ambient_dim, basis })
    }

    /// Wrap columns that are already orthonormal; validated against the
    /// Kronecker-delta invariant.
    pub fn from_orthonormal(basis: DMatrix<f64>, tol: &Tolerances) -> Result<Self> {
        let gram = basis.transpose() * &basis;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let expect = if i == j { 1.0 } else { 0.0 };
                if (gram[(i, j)] - expect).abs() > tol.orthonormality {
                    return Err(Error::Schema(format!(
                        "basis not orthonormal: gram[{i},{j}] = {}",
                        gram[(i, j)]
                    )));
                }
            }
        }
        Ok(Self {
            ambient_dim: basis.nrows(),
            basis,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Orthogonal projection of `v` onto the subspace.
    pub fn project(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        if v.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                got: v.len(),
            });
        }
        if self.dim() == 0 {
            return Ok(DVector::zeros(self.ambient_dim));
        }
        let coords = self.basis.transpose() * v;
        Ok(&self.basis * coords)
    }

    /// The n x n projector matrix B Bᵀ.
    pub fn projector(&self) -> DMatrix<f64> {
        if self.dim() == 0 {
            return DMatrix::zeros(self.ambient_dim, self.ambient_dim);
        }
        &self.basis * self.basis.transpose()
    }

    pub fn contains(&self, v: &DVector<f64>, tol: f64) -> bool {
        match self.project(v) {
            Ok(p) => (v - p).norm() <= tol,
            Err(_) => false,
        }
    }

    /// Orthogonal complement.
    pub fn complement(&self) -> Self {
        let n = self.ambient_dim;
        if self.dim() == 0 {
            return Self {
                ambient_dim: n,
                basis: DMatrix::identity(n, n),
            };
        }
        if self.dim() == n {
            return Self::zero(n);
        }
        // columns of I - P with Gram-Schmidt give the complement
        let p = self.projector();
        let candidates: Vec<DVector<f64>> = (0..n)
            .map(|j| {
                let mut e = DVector::zeros(n);
                e[j] = 1.0;
                &e - &p * &e
            })
            .collect();
        Self::span(n, &candidates).expect("complement construction cannot fail")
    }

    /// One-sided angle `sup_{u in E, |u|<=1} d(u, F)`: the largest singular
    /// value of (I - P_F) restricted to E. Zero subspace E gives 0 by the
    /// empty-supremum convention.
    pub fn angle(&self, other: &Subspace) -> Result<f64> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                got: other.ambient_dim,
            });
        }
        if self.dim() == 0 {
            return Ok(0.0);
        }
        let residual = if other.dim() == 0 {
            self.basis.clone()
        } else {
            let coords = other.basis.transpose() * &self.basis;
            &self.basis - &other.basis * coords
        };
        let sigma = residual.svd(false, false).singular_values;
        let max = sigma.iter().cloned().fold(0.0, f64::max);
        Ok(max.clamp(0.0, 1.0))
    }

    /// Intersection `self ∩ T^⊥`, computed as the kernel of `P_T` restricted
    /// to this subspace.
    pub fn intersect_complement(&self, t: &Subspace, tol: &Tolerances) -> Result<Self> {
        if self.ambient_dim != t.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                got: t.ambient_dim,
            });
        }
        let k = self.dim();
        if k == 0 {
            return Ok(Self::zero(self.ambient_dim));
        }
        if t.dim() == 0 {
            return Ok(self.clone());
        }
        // rows: P_T B_E; null coordinates a with P_T B_E a = 0 span E ∩ T^⊥
        let m = &t.basis * (t.basis.transpose() * &self.basis);
        let svd = m.svd(false, true);
        let v_t = svd.v_t.expect("svd requested v_t");
        let mut null_vectors: Vec<DVector<f64>> = Vec::new();
        for (i, &s) in svd.singular_values.iter().enumerate() {
            if s < tol.rank_drop {
                null_vectors.push(v_t.row(i).transpose());
            }
        }
        // rows of v_t beyond the singular-value count are exact null directions
        for i in svd.singular_values.len()..v_t.nrows() {
            null_vectors.push(v_t.row(i).transpose());
        }
        if null_vectors.is_empty() {
            return Ok(Self::zero(self.ambient_dim));
        }
        let members: Vec<DVector<f64>> = null_vectors.iter().map(|a| &self.basis * a).collect();
        Self::span(self.ambient_dim, &members)
    }
}

/// Result of the intersection-angle inequality check
/// `∠(E∩T⊥, F∩T⊥) <= 2 ∠(E,F) / inf_{v in T, |v|=1} d(v, F⊥)`.
#[derive(Debug, Clone, Copy)]
pub struct AngleCapCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `inf_{v in T, |v|=1} d(v, F⊥)`, the denominator of the bound.
    pub infimum: f64,
    pub holds: bool,
}

/// Check the intersection-angle inequality for an admissible triple.
///
/// The hypothesis `T ∩ F⊥ = {0}` is quantified as
/// `inf_{v in T, |v|=1} d(v, F⊥) > tol.angle_hypothesis`; triples violating
/// it are rejected. A zero-dimensional T gives an infinite infimum (empty
/// set convention) and a vanishing right-hand side.
pub fn check_angle_cap(
    e: &Subspace,
    f: &Subspace,
    t: &Subspace,
    tol: &Tolerances,
) -> Result<AngleCapCheck> {
    if e.ambient_dim() != f.ambient_dim() || f.ambient_dim() != t.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: e.ambient_dim(),
            got: f.ambient_dim().max(t.ambient_dim()),
        });
    }
    let infimum = if t.dim() == 0 {
        f64::INFINITY
    } else if f.dim() == 0 {
        // d(v, F⊥) = |P_F v| = 0 for every v
        0.0
    } else {
        // d(v, F⊥) = |P_F v|; the infimum over unit v in T is the smallest
        // singular value of P_F B_T
        let m = &f.basis * (f.basis.transpose() * &t.basis);
        let sigma = m.svd(false, false).singular_values;
        let mut min = f64::INFINITY;
        for i in 0..t.dim() {
            let s = if i < sigma.len() { sigma[i] } else { 0.0 };
            min = min.min(s);
        }
        min
    };
    if infimum <= tol.angle_hypothesis {
        return Err(Error::AngleHypothesis {
            infimum,
            threshold: tol.angle_hypothesis,
        });
    }
    let e_cap = e.intersect_complement(t, tol)?;
    let f_cap = f.intersect_complement(t, tol)?;
    let lhs = e_cap.angle(&f_cap)?;
    let rhs = if infimum.is_infinite() {
        0.0
    } else {
        2.0 * e.angle(f)? / infimum
    };
    Ok(AngleCapCheck {
        lhs,
        rhs,
        infimum,
        holds: lhs <= rhs + tol.inequality_slack,
    })
}
