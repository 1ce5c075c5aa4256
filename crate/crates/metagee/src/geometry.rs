//! Connection data and covariant derivatives on the submanifold.
//!
//! The ambient is flat, so ∇̄_{e_a} e_b is the ambient Hessian column
//! H\[a,b\] and the Gauss formula splits it exactly:
//!
//! ```text
//! H[a,b] = E·Γ[a,b]  +  Q_nor·hten[a,b]
//! ```
//!
//! with Christoffel coordinates Γ solving G·Γ\[a,b\] = Eᵀ·H\[a,b\], and the
//! second fundamental form h expressed over the orthonormal normal basis.
//! The shape operator A_V is the metric dual of h, and the normal connection
//! ∇⊥ is the normal projection of ambient derivatives of normal fields.
//!
//! Derivatives of the component maps T, N, t, n are taken in ambient
//! coordinates by central differences of smooth ambient-valued fields
//! (columns of E·T, N·e_b, projected axis fields). Per-point orthonormal
//! bases are never differenced, only the basis-independent projectors, so no
//! frame-gauge error enters. Every finite-difference residual is re-run at
//! half step as a convergence guard.
//!
//! The structure tensor itself is parallel by construction: J is a constant
//! diagonal matrix and the ambient connection is flat, so ∇̄J = 0 holds
//! identically and carries no check of its own.

use crate::linalg::{self, Mat};
use crate::submanifold::{self, Decomposition, GeomError, ImmersionSpec, PointFrame};

/// Christoffel symbols and second fundamental form at a point.
#[derive(Debug, Clone)]
pub struct ConnectionData {
    /// gamma\[a\]\[b\] = coordinates of ∇_{e_a} e_b, symmetric in (a, b).
    pub gamma: Vec<Vec<Vec<f64>>>,
    /// hten\[a\]\[b\] = h(e_a, e_b) over the orthonormal normal basis.
    pub hten: Vec<Vec<Vec<f64>>>,
    /// h_amb\[a\]\[b\] = h(e_a, e_b) as an ambient vector.
    pub h_amb: Vec<Vec<Vec<f64>>>,
}

/// Split the ambient Hessian into Christoffel and second-fundamental parts.
pub fn connection_at(f: &PointFrame) -> ConnectionData {
    let k = f.e.cols;
    let mut gamma = vec![vec![Vec::new(); k]; k];
    let mut hten = vec![vec![Vec::new(); k]; k];
    let mut h_amb = vec![vec![Vec::new(); k]; k];
    for a in 0..k {
        for b in 0..k {
            let h = &f.hess[a][b];
            let g = f.tangent_coords(h);
            let tangential = f.e.matvec(&g);
            h_amb[a][b] = linalg::vsub(h, &tangential);
            hten[a][b] = f.normal_coords(h);
            gamma[a][b] = g;
        }
    }
    ConnectionData { gamma, hten, h_amb }
}

/// Shape operator A_V in the coordinate frame, for V given over the
/// orthonormal normal basis: solves G·A_V = \[ḡ(h(e_a,e_b), V)\]_ab.
pub fn shape_operator(f: &PointFrame, conn: &ConnectionData, v_nor: &[f64]) -> Mat {
    let k = f.e.cols;
    let m = Mat::from_fn(k, k, |a, b| linalg::dot(&conn.hten[a][b], v_nor));
    f.metric_solve(&m)
}

/// Shape operator for an ambient normal vector.
pub fn shape_operator_ambient(f: &PointFrame, conn: &ConnectionData, v: &[f64]) -> Mat {
    shape_operator(f, conn, &f.normal_coords(v))
}

/// Frame, decomposition and connection at one point.
#[derive(Debug, Clone)]
pub struct PointData {
    pub frame: PointFrame,
    pub decomp: Decomposition,
    pub conn: ConnectionData,
}

pub fn point_data(spec: &ImmersionSpec, u: &[f64]) -> Result<PointData, GeomError> {
    let frame = submanifold::frame_at(spec, u)?;
    let decomp = submanifold::decompose(spec, &frame);
    let conn = connection_at(&frame);
    Ok(PointData { frame, decomp, conn })
}

impl PointData {
    /// Tangential part of J applied to an ambient vector.
    pub fn t_of(&self, spec: &ImmersionSpec, v: &[f64]) -> Vec<f64> {
        self.frame.project_tangent(&spec.ambient.apply_j(v).unwrap())
    }

    /// Normal part of J applied to an ambient vector.
    pub fn n_of(&self, spec: &ImmersionSpec, v: &[f64]) -> Vec<f64> {
        self.frame.project_normal(&spec.ambient.apply_j(v).unwrap())
    }

    /// Ambient field T e_y = E · T\[:,y\].
    pub fn te_field(&self, y: usize) -> Vec<f64> {
        self.frame.e.matvec(&self.decomp.t_tan.col(y))
    }
}

/// Which finite-difference step to use; `Half` re-runs the same residual at
/// h/2 for the convergence guard.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Full,
    Half,
}

/// Central-difference stencil around a grid point: shifted point data in
/// every parameter direction at ±h and ±h/2.
pub struct Stencil {
    pub center: PointData,
    pub h: f64,
    dirs: Vec<DirStencil>,
}

struct DirStencil {
    plus: PointData,
    minus: PointData,
    plus_half: PointData,
    minus_half: PointData,
}

pub fn stencil_at(spec: &ImmersionSpec, u: &[f64], h: f64) -> Result<Stencil, GeomError> {
    for (i, p) in spec.parameters.iter().enumerate() {
        if u[i] - 2.0 * h < p.lo - 1e-12 || u[i] + 2.0 * h > p.hi + 1e-12 {
            return Err(GeomError::BoundaryTooClose);
        }
    }
    let center = point_data(spec, u)?;
    let mut dirs = Vec::with_capacity(spec.k());
    for a in 0..spec.k() {
        let shifted = |delta: f64| -> Result<PointData, GeomError> {
            let mut v = u.to_vec();
            v[a] += delta;
            point_data(spec, &v)
        };
        dirs.push(DirStencil {
            plus: shifted(h)?,
            minus: shifted(-h)?,
            plus_half: shifted(h / 2.0)?,
            minus_half: shifted(-h / 2.0)?,
        });
    }
    Ok(Stencil { center, h, dirs })
}

impl Stencil {
    /// Central difference along direction `a` of any vector-valued field of
    /// the point data.
    pub fn fd(&self, a: usize, step: Step, field: impl Fn(&PointData) -> Vec<f64>) -> Vec<f64> {
        let d = &self.dirs[a];
        let (plus, minus, h) = match step {
            Step::Full => (&d.plus, &d.minus, self.h),
            Step::Half => (&d.plus_half, &d.minus_half, self.h / 2.0),
        };
        let fp = field(plus);
        let fm = field(minus);
        fp.iter().zip(&fm).map(|(p, m)| (p - m) / (2.0 * h)).collect()
    }
}

/// Smooth normal fields used as arguments for the t/n derivative identities:
/// either the normal projection of a fixed canonical axis, or a column of
/// the ambient normal part N e_b. Both are basis independent, hence smooth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VField {
    ProjAxis(usize),
    NTangent(usize),
}

impl VField {
    pub fn eval(&self, pd: &PointData) -> Vec<f64> {
        match *self {
            VField::ProjAxis(i) => {
                let n = pd.frame.e.rows;
                let mut axis = vec![0.0; n];
                axis[i] = 1.0;
                pd.frame.project_normal(&axis)
            }
            VField::NTangent(b) => pd.decomp.n_tan.col(b),
        }
    }
}

/// Pick the normal fields worth testing at a point: every nonvanishing
/// N e_b column plus up to two well-conditioned projected axes.
pub fn vfields_for(center: &PointData) -> Vec<VField> {
    let mut out = Vec::new();
    let k = center.frame.e.cols;
    for b in 0..k {
        if linalg::norm(&center.decomp.n_tan.col(b)) > 1e-8 {
            out.push(VField::NTangent(b));
        }
    }
    let n = center.frame.e.rows;
    let mut axes = 0;
    for i in 0..n {
        if axes >= 2 {
            break;
        }
        let mut axis = vec![0.0; n];
        axis[i] = 1.0;
        if linalg::norm(&center.frame.project_normal(&axis)) > 0.5 {
            out.push(VField::ProjAxis(i));
            axes += 1;
        }
    }
    out
}

/// Normal connection ∇⊥_{e_a} V by central differences of a caller-supplied
/// normal field, with a normality check at the evaluation point.
pub fn normal_connection<F>(
    spec: &ImmersionSpec,
    u: &[f64],
    field: F,
    a: usize,
    h: f64,
) -> Result<Vec<f64>, GeomError>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, GeomError>,
{
    let center = point_data(spec, u)?;
    let v0 = field(u)?;
    let tangential = linalg::norm(&center.frame.project_tangent(&v0));
    if tangential > 1e-8 * (1.0 + linalg::norm(&v0)) {
        return Err(GeomError::FieldNotNormal(tangential));
    }
    let mut up = u.to_vec();
    up[a] += h;
    let mut um = u.to_vec();
    um[a] -= h;
    let vp = field(&up)?;
    let vm = field(&um)?;
    let dv: Vec<f64> = vp.iter().zip(&vm).map(|(p, m)| (p - m) / (2.0 * h)).collect();
    Ok(center.frame.project_normal(&dv))
}

/// Covariant derivatives of the tangential and normal component maps along
/// a coordinate direction: ((∇_{e_a} T) e_y, (∇̄_{e_a} N) e_y), both as
/// ambient vectors. The point must sit at least 2h inside the ranges.
pub fn covder_t(
    spec: &ImmersionSpec,
    u: &[f64],
    a: usize,
    y: usize,
    h: f64,
) -> Result<(Vec<f64>, Vec<f64>), GeomError> {
    let st = stencil_at(spec, u, h)?;
    Ok((
        covder_t_tensor(&st, Step::Full, a, y),
        covder_n(&st, Step::Full, a, y),
    ))
}

/// (∇_{e_a} T) e_y as an ambient tangent vector, by the tensor-component
/// route: central difference of the T matrix field plus Christoffel terms.
pub fn covder_t_tensor(st: &Stencil, step: Step, a: usize, y: usize) -> Vec<f64> {
    let c = &st.center;
    let k = c.frame.e.cols;
    let dt = st.fd(a, step, |pd| pd.decomp.t_tan.col(y));
    let mut coords = dt;
    for cidx in 0..k {
        let mut s = coords[cidx];
        for d in 0..k {
            s += c.conn.gamma[a][d][cidx] * c.decomp.t_tan[(d, y)];
            s -= c.conn.gamma[a][y][d] * c.decomp.t_tan[(cidx, d)];
        }
        coords[cidx] = s;
    }
    c.frame.e.matvec(&coords)
}

/// (∇_{e_a} T) e_y by the Leibniz route: tangential derivative of the
/// ambient field T e_y minus T applied to ∇_{e_a} e_y.
pub fn covder_t_leibniz(st: &Stencil, step: Step, a: usize, y: usize) -> Vec<f64> {
    let c = &st.center;
    let dte = st.fd(a, step, |pd| pd.te_field(y));
    let nabla_te = c.frame.project_tangent(&dte);
    let t_nabla = c.frame.e.matvec(&c.decomp.t_tan.matvec(&c.conn.gamma[a][y]));
    linalg::vsub(&nabla_te, &t_nabla)
}

/// (∇̄_{e_a} N) e_y as an ambient normal vector: normal derivative of the
/// field N e_y minus N applied to ∇_{e_a} e_y.
pub fn covder_n(st: &Stencil, step: Step, a: usize, y: usize) -> Vec<f64> {
    let c = &st.center;
    let dne = st.fd(a, step, |pd| pd.decomp.n_tan.col(y));
    let nabla_perp = c.frame.project_normal(&dne);
    let n_nabla = c.decomp.n_tan.matvec(&c.conn.gamma[a][y]);
    linalg::vsub(&nabla_perp, &n_nabla)
}

/// (∇_{e_a} t) V for a normal field: tangential derivative of the field tV
/// minus t of ∇⊥_{e_a} V.
pub fn covder_t_normal(
    spec: &ImmersionSpec,
    st: &Stencil,
    step: Step,
    a: usize,
    vf: VField,
) -> Vec<f64> {
    let c = &st.center;
    let d_tv = st.fd(a, step, |pd| {
        let v = vf.eval(pd);
        pd.frame.project_tangent(&spec.ambient.apply_j(&v).unwrap())
    });
    let nabla_tv = c.frame.project_tangent(&d_tv);
    let dv = st.fd(a, step, |pd| vf.eval(pd));
    let nabla_perp_v = c.frame.project_normal(&dv);
    let t_nabla_perp = c.t_of(spec, &nabla_perp_v);
    linalg::vsub(&nabla_tv, &t_nabla_perp)
}

/// (∇̄_{e_a} n) V for a normal field: normal derivative of the field nV
/// minus n of ∇⊥_{e_a} V.
pub fn covder_n_normal(
    spec: &ImmersionSpec,
    st: &Stencil,
    step: Step,
    a: usize,
    vf: VField,
) -> Vec<f64> {
    let c = &st.center;
    let d_nv = st.fd(a, step, |pd| {
        let v = vf.eval(pd);
        pd.frame.project_normal(&spec.ambient.apply_j(&v).unwrap())
    });
    let nabla_perp_nv = c.frame.project_normal(&d_nv);
    let dv = st.fd(a, step, |pd| vf.eval(pd));
    let nabla_perp_v = c.frame.project_normal(&dv);
    let n_nabla_perp = c.n_of(spec, &nabla_perp_v);
    linalg::vsub(&nabla_perp_nv, &n_nabla_perp)
}

// ---------------------------------------------------------------------------
// Per-point identity residuals. Each returns the maximum ambient-norm
// residual over the admissible argument combinations at the stencil's
// center point.
// ---------------------------------------------------------------------------

/// Tensor route and Leibniz route for (∇T) must agree.
pub fn e13i_residual(st: &Stencil, step: Step) -> f64 {
    let k = st.center.frame.e.cols;
    let mut worst = 0.0f64;
    for a in 0..k {
        for y in 0..k {
            let ta = covder_t_tensor(st, step, a, y);
            let tb = covder_t_leibniz(st, step, a, y);
            worst = worst.max(linalg::norm_inf(&linalg::vsub(&ta, &tb)));
        }
    }
    worst
}

/// Weingarten split: the tangential derivative of the normal field N e_y
/// is −A_{N e_y} e_a.
pub fn e13ii_residual(st: &Stencil, step: Step) -> f64 {
    let c = &st.center;
    let k = c.frame.e.cols;
    let mut worst = 0.0f64;
    for y in 0..k {
        let a_v = shape_operator_ambient(&c.frame, &c.conn, &c.decomp.n_tan.col(y));
        for a in 0..k {
            let dne = st.fd(a, step, |pd| pd.decomp.n_tan.col(y));
            let tangential = c.frame.project_tangent(&dne);
            let expected: Vec<f64> =
                c.frame.e.matvec(&a_v.col(a)).iter().map(|x| -x).collect();
            worst = worst.max(linalg::norm_inf(&linalg::vsub(&tangential, &expected)));
        }
    }
    worst
}

/// Two derivative routes for (∇t): differentiating the projected field
/// tV = P_tan J V directly, or via J dV minus the derivative of nV.
pub fn e14i_residual(spec: &ImmersionSpec, st: &Stencil, step: Step, fields: &[VField]) -> f64 {
    let c = &st.center;
    let k = c.frame.e.cols;
    let mut worst = 0.0f64;
    for &vf in fields {
        for a in 0..k {
            let route1 = covder_t_normal(spec, st, step, a, vf);
            // J is constant, so d(tV) = J dV − d(nV)
            let dv = st.fd(a, step, |pd| vf.eval(pd));
            let d_nv = st.fd(a, step, |pd| {
                let v = vf.eval(pd);
                pd.frame.project_normal(&spec.ambient.apply_j(&v).unwrap())
            });
            let jdv = spec.ambient.apply_j(&dv).unwrap();
            let d_tv = linalg::vsub(&jdv, &d_nv);
            let nabla_tv = c.frame.project_tangent(&d_tv);
            let nabla_perp_v = c.frame.project_normal(&dv);
            let route2 = linalg::vsub(&nabla_tv, &c.t_of(spec, &nabla_perp_v));
            worst = worst.max(linalg::norm_inf(&linalg::vsub(&route1, &route2)));
        }
    }
    worst
}

/// Two derivative routes for (∇̄n), mirroring [`e14i_residual`].
pub fn e14ii_residual(spec: &ImmersionSpec, st: &Stencil, step: Step, fields: &[VField]) -> f64 {
    let c = &st.center;
    let k = c.frame.e.cols;
    let mut worst = 0.0f64;
    for &vf in fields {
        for a in 0..k {
            let route1 = covder_n_normal(spec, st, step, a, vf);
            let dv = st.fd(a, step, |pd| vf.eval(pd));
            let d_tv = st.fd(a, step, |pd| {
                let v = vf.eval(pd);
                pd.frame.project_tangent(&spec.ambient.apply_j(&v).unwrap())
            });
            let jdv = spec.ambient.apply_j(&dv).unwrap();
            let d_nv = linalg::vsub(&jdv, &d_tv);
            let nabla_perp_nv = c.frame.project_normal(&d_nv);
            let nabla_perp_v = c.frame.project_normal(&dv);
            let route2 = linalg::vsub(&nabla_perp_nv, &c.n_of(spec, &nabla_perp_v));
            worst = worst.max(linalg::norm_inf(&linalg::vsub(&route1, &route2)));
        }
    }
    worst
}

/// ḡ((∇_X T)Y, Z) = ḡ(Y, (∇_X T)Z).
pub fn e16_residual(st: &Stencil, step: Step) -> f64 {
    let c = &st.center;
    let k = c.frame.e.cols;
    let mut worst = 0.0f64;
    for a in 0..k {
        let cov: Vec<Vec<f64>> = (0..k).map(|y| covder_t_leibniz(st, step, a, y)).collect();
        for y in 0..k {
            for z in 0..k {
                let lhs = linalg::dot(&cov[y], &c.frame.e.col(z));
                let rhs = linalg::dot(&c.frame.e.col(y), &cov[z]);
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    worst
}

/// (∇_X T)Y = A_{NY} X + t h(X, Y).
pub fn e17i_residual(spec: &ImmersionSpec, st: &Stencil, step: Step) -> f64 {
    let c = &st.center;
    let k = c.frame.e.cols;
    let mut worst = 0.0f64;
    for y in 0..k {
        let a_ny = shape_operator_ambient(&c.frame, &c.conn, &c.decomp.n_tan.col(y));
        for a in 0..k {
            let lhs = covder_t_leibniz(st, step, a, y);
            let first = c.frame.e.matvec(&a_ny.col(a));
            let th = c.t_of(spec, &c.conn.h_amb[a][y]);
            let rhs = linalg::vadd(&first, &th);
            worst = worst.max(linalg::norm_inf(&linalg::vsub(&lhs, &rhs)));
        }
    }
    worst
}

/// (∇̄_X N)Y = n h(X, Y) − h(X, TY).
pub fn e17ii_residual(spec: &ImmersionSpec, st: &Stencil, step: Step) -> f64 {
    let c = &st.center;
    let k = c.frame.e.cols;
    let mut worst = 0.0f64;
    for y in 0..k {
        for a in 0..k {
            let lhs = covder_n(st, step, a, y);
            let nh = c.n_of(spec, &c.conn.h_amb[a][y]);
            // h(X, TY) = Σ_c T[c,y] h(e_a, e_c)
            let mut h_xty = vec![0.0; c.frame.e.rows];
            for cc in 0..k {
                linalg::axpy(c.decomp.t_tan[(cc, y)], &c.conn.h_amb[a][cc], &mut h_xty);
            }
            let rhs = linalg::vsub(&nh, &h_xty);
            worst = worst.max(linalg::norm_inf(&linalg::vsub(&lhs, &rhs)));
        }
    }
    worst
}

/// (∇_X t)V = A_{nV} X − T A_V X.
pub fn e18i_residual(spec: &ImmersionSpec, st: &Stencil, step: Step, fields: &[VField]) -> f64 {
    let c = &st.center;
    let k = c.frame.e.cols;
    let mut worst = 0.0f64;
    for &vf in fields {
        let v = vf.eval(c);
        let nv = c.n_of(spec, &v);
        let a_nv = shape_operator_ambient(&c.frame, &c.conn, &nv);
        let a_v = shape_operator_ambient(&c.frame, &c.conn, &v);
        for a in 0..k {
            let lhs = covder_t_normal(spec, st, step, a, vf);
            let first = c.frame.e.matvec(&a_nv.col(a));
            let second = c.frame.e.matvec(&c.decomp.t_tan.matvec(&a_v.col(a)));
            let rhs = linalg::vsub(&first, &second);
            worst = worst.max(linalg::norm_inf(&linalg::vsub(&lhs, &rhs)));
        }
    }
    worst
}

/// (∇̄_X n)V = −h(X, tV) − N A_V X.
pub fn e18ii_residual(spec: &ImmersionSpec, st: &Stencil, step: Step, fields: &[VField]) -> f64 {
    let c = &st.center;
    let k = c.frame.e.cols;
    let mut worst = 0.0f64;
    for &vf in fields {
        let v = vf.eval(c);
        let tv_coords = c.frame.tangent_coords(&spec.ambient.apply_j(&v).unwrap());
        let a_v = shape_operator_ambient(&c.frame, &c.conn, &v);
        for a in 0..k {
            let lhs = covder_n_normal(spec, st, step, a, vf);
            let mut h_x_tv = vec![0.0; c.frame.e.rows];
            for cc in 0..k {
                linalg::axpy(tv_coords[cc], &c.conn.h_amb[a][cc], &mut h_x_tv);
            }
            let n_av = c.decomp.n_tan.matvec(&a_v.col(a));
            let rhs: Vec<f64> = h_x_tv.iter().zip(&n_av).map(|(x, y)| -x - y).collect();
            worst = worst.max(linalg::norm_inf(&linalg::vsub(&lhs, &rhs)));
        }
    }
    worst
}

/// ḡ((∇̄_X N)Y, V) = ḡ((∇_X t)V, Y).
pub fn e19_residual(spec: &ImmersionSpec, st: &Stencil, step: Step, fields: &[VField]) -> f64 {
    let c = &st.center;
    let k = c.frame.e.cols;
    let mut worst = 0.0f64;
    for &vf in fields {
        let v = vf.eval(c);
        for a in 0..k {
            let cov_t = covder_t_normal(spec, st, step, a, vf);
            for y in 0..k {
                let cov_n = covder_n(st, step, a, y);
                let lhs = linalg::dot(&cov_n, &v);
                let rhs = linalg::dot(&cov_t, &c.frame.e.col(y));
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    worst
}

/// Combine full-step and half-step residuals with the convergence guard:
/// the half-step run may not exceed four times the full-step run (plus a
/// roundoff floor). A diverging pair signals roundoff or a genuine failure
/// and is reported as the larger residual.
pub fn guarded(res_h: f64, res_half: f64) -> f64 {
    if res_half <= (4.0 * res_h).max(1e-12) {
        res_h
    } else {
        res_half
    }
}
