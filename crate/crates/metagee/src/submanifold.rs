//! Immersed submanifolds: parameter grids, per-point frames, and the
//! tangential/normal decomposition of the structure tensor.
//!
//! For an immersion i: U ⊂ ℝᵏ → ℝⁿ the frame at a parameter point u holds the
//! Jacobian columns e_a = ∂i/∂u_a, the ambient-valued Hessian, the induced
//! metric G = EᵀE, and orthonormal tangent/normal bases. On top of a frame,
//! [`decompose`] splits J into
//!
//! ```text
//! J e_a = T e_a + N e_a          (tangent argument)
//! J ν_α = t ν_α + n ν_α          (normal argument)
//! ```
//!
//! with T kept in the coordinate frame (so its matrix identities read exactly
//! as operator identities with G-weighted adjoints explicit) and the normal
//! maps expressed over the orthonormal normal basis.

use crate::ambient::{AmbientError, AmbientStructure};
use crate::exprlang::{EvalError, EvalPoint, Expr};
use crate::linalg::{self, Cholesky, Mat};
use crate::quadring::MetallicParams;
use crate::tol;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("degenerate immersion at u={0:?}: smallest Jacobian singular value {1:.3e}")]
    DegenerateImmersion(Vec<f64>, f64),
    #[error("non-finite derivatives at u={0:?}")]
    NonFinite(Vec<f64>),
    #[error("degenerate subspace basis")]
    DegenerateSubspace,
    #[error("singular induced metric")]
    SingularMetric,
    #[error("field leaves normal bundle (tangential norm {0:.3e})")]
    FieldNotNormal(f64),
    #[error("point too close to the parameter boundary for finite differences")]
    BoundaryTooClose,
    #[error("identity not applicable: {0}")]
    NotApplicable(String),
    #[error("undeclared distribution `{0}`")]
    UnknownDistribution(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Ambient(#[from] AmbientError),
}

/// A named parameter with its closed range.
#[derive(Debug, Clone)]
pub struct ParamRange {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

/// A named distribution: a list of tangent vectors given by coefficient
/// expressions over the coordinate frame ∂/∂u_a.
#[derive(Debug, Clone)]
pub struct Distribution {
    pub name: String,
    pub vectors: Vec<Vec<Expr>>,
}

/// Warped product declaration: parameter names split into base and fiber,
/// plus a warping function over the base parameters.
#[derive(Debug, Clone)]
pub struct WarpedDecl {
    pub base: Vec<String>,
    pub fiber: Vec<String>,
    pub warping: Expr,
}

/// A parsed, compiled immersion with its ambient structure and declarations.
#[derive(Debug, Clone)]
pub struct ImmersionSpec {
    pub name: String,
    pub ambient: AmbientStructure,
    pub parameters: Vec<ParamRange>,
    pub constants: BTreeMap<String, f64>,
    pub immersion: Vec<Expr>,
    pub distributions: Vec<Distribution>,
    pub warped: Option<WarpedDecl>,
    pub grid: usize,
    coord_names: Vec<String>,
}

impl ImmersionSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: String,
        ambient: AmbientStructure,
        parameters: Vec<ParamRange>,
        constants: BTreeMap<String, f64>,
        immersion: Vec<Expr>,
        distributions: Vec<Distribution>,
        warped: Option<WarpedDecl>,
        grid: usize,
    ) -> Self {
        let coord_names = parameters.iter().map(|p| p.name.clone()).collect();
        ImmersionSpec {
            name,
            ambient,
            parameters,
            constants,
            immersion,
            distributions,
            warped,
            grid,
            coord_names,
        }
    }

    pub fn params(&self) -> MetallicParams {
        self.ambient.params()
    }

    /// Parameter count k.
    pub fn k(&self) -> usize {
        self.parameters.len()
    }

    /// Ambient dimension n.
    pub fn n(&self) -> usize {
        self.ambient.dim()
    }

    pub fn coord_names(&self) -> &[String] {
        &self.coord_names
    }

    pub fn eval_point<'a>(&'a self, u: &'a [f64]) -> EvalPoint<'a> {
        EvalPoint::new(&self.coord_names, u, &self.constants, self.params())
    }

    /// Index of a named parameter.
    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.coord_names.iter().position(|n| n == name)
    }

    /// Uniform interior grid: per parameter the fractions (i+½)/N of the
    /// declared range, cartesian product ordered row-major by point index.
    pub fn grid_points(&self) -> Vec<Vec<f64>> {
        let n = self.grid.max(1);
        let axes: Vec<Vec<f64>> = self
            .parameters
            .iter()
            .map(|p| {
                (0..n)
                    .map(|i| p.lo + (p.hi - p.lo) * (i as f64 + 0.5) / n as f64)
                    .collect()
            })
            .collect();
        let mut points = vec![Vec::new()];
        for axis in &axes {
            let mut next = Vec::with_capacity(points.len() * axis.len());
            for base in &points {
                for &v in axis {
                    let mut p = base.clone();
                    p.push(v);
                    next.push(p);
                }
            }
            points = next;
        }
        points
    }

    /// Evaluate a distribution's coefficient vectors at u, as a k×m matrix of
    /// coordinate-frame columns.
    pub fn distribution_basis(&self, dist: &Distribution, u: &[f64]) -> Result<Mat, GeomError> {
        let at = self.eval_point(u);
        let k = self.k();
        let mut cols = Vec::with_capacity(dist.vectors.len());
        for vec in &dist.vectors {
            let mut col = Vec::with_capacity(k);
            for coeff in vec {
                col.push(coeff.eval_jet2(&at)?.value);
            }
            cols.push(col);
        }
        Ok(Mat::from_cols(&cols))
    }

    pub fn distribution(&self, name: &str) -> Result<&Distribution, GeomError> {
        self.distributions
            .iter()
            .find(|d| d.name == name)
            .ok_or_else(|| GeomError::UnknownDistribution(name.to_string()))
    }
}

/// Per-point geometric state of the immersion.
#[derive(Debug, Clone)]
pub struct PointFrame {
    /// Parameter point.
    pub u: Vec<f64>,
    /// n×k Jacobian; column a is e_a = ∂i/∂u_a.
    pub e: Mat,
    /// Ambient-valued Hessian: hess\[a\]\[b\] is ∂²i/∂u_a∂u_b ∈ ℝⁿ.
    pub hess: Vec<Vec<Vec<f64>>>,
    /// Induced metric G = EᵀE.
    pub g: Mat,
    /// Orthonormal tangent basis (n×k).
    pub q_tan: Mat,
    /// Orthonormal normal basis (n×(n−k)).
    pub q_nor: Mat,
    g_chol: Cholesky,
}

impl PointFrame {
    /// Codimension n−k.
    pub fn codim(&self) -> usize {
        self.q_nor.cols
    }

    /// Coordinates of an ambient vector's tangential part: solve G x = Eᵀv.
    pub fn tangent_coords(&self, v: &[f64]) -> Vec<f64> {
        self.g_chol.solve_vec(&self.e.transpose().matvec(v))
    }

    /// Solve G X = B for a matrix right-hand side.
    pub fn metric_solve(&self, b: &Mat) -> Mat {
        self.g_chol.solve_mat(b)
    }

    /// Orthogonal projection of an ambient vector onto the tangent space.
    pub fn project_tangent(&self, v: &[f64]) -> Vec<f64> {
        let c = self.q_tan.transpose().matvec(v);
        self.q_tan.matvec(&c)
    }

    /// Orthogonal projection of an ambient vector onto the normal space.
    pub fn project_normal(&self, v: &[f64]) -> Vec<f64> {
        let c = self.q_nor.transpose().matvec(v);
        self.q_nor.matvec(&c)
    }

    /// Coordinates of an ambient vector over the orthonormal normal basis.
    pub fn normal_coords(&self, v: &[f64]) -> Vec<f64> {
        self.q_nor.transpose().matvec(v)
    }
}

/// Build the frame at a parameter point: Jacobian and Hessian from forward
/// jets, Q_tan by modified Gram-Schmidt on the Jacobian columns, Q_nor by
/// completing with canonical axes in index order.
pub fn frame_at(spec: &ImmersionSpec, u: &[f64]) -> Result<PointFrame, GeomError> {
    let k = spec.k();
    let n = spec.n();
    let at = spec.eval_point(u);
    let mut e = Mat::zeros(n, k);
    let mut hess = vec![vec![vec![0.0; n]; k]; k];
    for (i, comp) in spec.immersion.iter().enumerate() {
        let jet = comp.eval_jet2(&at)?;
        if !jet.value.is_finite()
            || jet.grad.iter().any(|x| !x.is_finite())
            || (0..k).any(|a| (0..k).any(|b| !jet.hess[(a, b)].is_finite()))
        {
            return Err(GeomError::NonFinite(u.to_vec()));
        }
        for a in 0..k {
            e[(i, a)] = jet.grad[a];
            for b in 0..k {
                hess[a][b][i] = jet.hess[(a, b)];
            }
        }
    }
    let g = e.transpose().matmul(&e);
    let smin = linalg::sym_eig_min(&g).max(0.0).sqrt();
    if smin <= tol::RANK_MIN {
        return Err(GeomError::DegenerateImmersion(u.to_vec(), smin));
    }
    let q_tan = linalg::gram_schmidt(&e, tol::RANK_MIN).ok_or(GeomError::DegenerateSubspace)?;
    let q_nor = linalg::complete_basis(&q_tan, tol::RANK_MIN);
    let g_chol = Cholesky::new(&g).ok_or(GeomError::SingularMetric)?;
    Ok(PointFrame { u: u.to_vec(), e, hess, g, q_tan, q_nor, g_chol })
}

/// The four components of J at a point, in the frame conventions of the
/// module header.
#[derive(Debug, Clone)]
pub struct Decomposition {
    /// T in the coordinate frame (k×k): J e_a = Σ_b T\[b,a\] e_b + N e_a.
    pub t_tan: Mat,
    /// Ambient normal parts N e_a as columns (n×k).
    pub n_tan: Mat,
    /// t over the normal basis, in tangent coordinates (k×(n−k)):
    /// t ν_α = Σ_a t_nor\[a,α\] e_a.
    pub t_nor: Mat,
    /// n over the normal basis ((n−k)×(n−k)): entries ⟨ν_β, J ν_α⟩.
    pub n_nor: Mat,
}

/// Split J over the frame: T solves G·T = EᵀJE, N is the ambient remainder,
/// and t, n come from projecting J of the normal basis.
pub fn decompose(spec: &ImmersionSpec, f: &PointFrame) -> Decomposition {
    let je = spec.ambient.apply_j_mat(&f.e);
    let t_tan = f.metric_solve(&f.e.transpose().matmul(&je));
    let n_tan = je.sub(&f.e.matmul(&t_tan));
    let jq = spec.ambient.apply_j_mat(&f.q_nor);
    let t_nor = f.metric_solve(&f.e.transpose().matmul(&jq));
    let n_nor = f.q_nor.transpose().matmul(&jq);
    Decomposition { t_tan, n_tan, t_nor, n_nor }
}

/// Orthogonal projection of an ambient vector onto span(E·D), where D holds
/// subspace basis vectors in coordinate-frame columns.
pub fn project_subspace(f: &PointFrame, d: &Mat, v: &[f64]) -> Result<Vec<f64>, GeomError> {
    let w = f.e.matmul(d);
    let gram = w.transpose().matmul(&w);
    let ch = Cholesky::new(&gram).ok_or(GeomError::DegenerateSubspace)?;
    let x = ch.solve_vec(&w.transpose().matvec(v));
    Ok(w.matvec(&x))
}

// ---------------------------------------------------------------------------
// Pointwise residuals of the component-map identities. All are plain matrix
// statements in the chosen bases; classes are algebraic or linear-solve.
// ---------------------------------------------------------------------------

/// g-symmetry of T: the matrix G·T is symmetric.
pub fn e7i_residual(f: &PointFrame, d: &Decomposition) -> f64 {
    f.g.matmul(&d.t_tan).asymmetry()
}

/// Symmetry of n over the orthonormal normal basis.
pub fn e7ii_residual(_f: &PointFrame, d: &Decomposition) -> f64 {
    if d.n_nor.rows == 0 {
        return 0.0;
    }
    d.n_nor.asymmetry()
}

/// Adjointness of N and t: (Q_norᵀ N)ᵀ = G·t.
pub fn e8_residual(f: &PointFrame, d: &Decomposition) -> f64 {
    let lhs = f.q_nor.transpose().matmul(&d.n_tan).transpose();
    let rhs = f.g.matmul(&d.t_nor);
    lhs.sub(&rhs).max_abs()
}

/// T² = pT + qI − t∘(normal coordinates of N), as k×k matrices.
pub fn e9i_residual(spec: &ImmersionSpec, f: &PointFrame, d: &Decomposition) -> f64 {
    let p = spec.params().p() as f64;
    let q = spec.params().q() as f64;
    let k = f.e.cols;
    let t2 = d.t_tan.matmul(&d.t_tan);
    let tn = d.t_nor.matmul(&f.q_nor.transpose().matmul(&d.n_tan));
    let expected = d.t_tan.scale(p).add(&Mat::identity(k).scale(q)).sub(&tn);
    t2.sub(&expected).max_abs()
}

/// pN = N∘T + n∘N on tangent arguments, in ambient columns.
pub fn e9ii_residual(spec: &ImmersionSpec, f: &PointFrame, d: &Decomposition) -> f64 {
    let p = spec.params().p() as f64;
    let nt = d.n_tan.matmul(&d.t_tan);
    let jn = spec.ambient.apply_j_mat(&d.n_tan);
    let n_of_n = Mat::from_cols(
        &(0..d.n_tan.cols)
            .map(|a| f.project_normal(&jn.col(a)))
            .collect::<Vec<_>>(),
    );
    d.n_tan.scale(p).sub(&nt.add(&n_of_n)).max_abs()
}

/// n² = pn + qI − N∘t on normal arguments, in ambient columns over Q_nor.
pub fn e10i_residual(spec: &ImmersionSpec, f: &PointFrame, d: &Decomposition) -> f64 {
    let p = spec.params().p() as f64;
    let q = spec.params().q() as f64;
    let mut worst = 0.0f64;
    for beta in 0..f.codim() {
        let nu = f.q_nor.col(beta);
        let n_nu = f.project_normal(&spec.ambient.apply_j(&nu).unwrap());
        let n2_nu = f.project_normal(&spec.ambient.apply_j(&n_nu).unwrap());
        let n_t_nu = d.n_tan.matvec(&d.t_nor.col(beta));
        let resid: Vec<f64> = (0..f.e.rows)
            .map(|i| n2_nu[i] - p * n_nu[i] - q * nu[i] + n_t_nu[i])
            .collect();
        worst = worst.max(linalg::norm_inf(&resid));
    }
    worst
}

/// pt = T∘t + t∘n on normal arguments, in tangent coordinates.
pub fn e10ii_residual(spec: &ImmersionSpec, _f: &PointFrame, d: &Decomposition) -> f64 {
    let p = spec.params().p() as f64;
    if d.t_nor.cols == 0 {
        return 0.0;
    }
    let tt = d.t_tan.matmul(&d.t_nor);
    let tn = d.t_nor.matmul(&d.n_nor);
    d.t_nor.scale(p).sub(&tt.add(&tn)).max_abs()
}
