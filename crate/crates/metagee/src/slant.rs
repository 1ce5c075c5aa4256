//! Slant angles and submanifold classification.
//!
//! The angle of a tangent vector X against a distribution D is the angle
//! between J(E·X) and the subspace E·D, i.e. cos θ = ‖proj_D J X‖ / ‖J X‖,
//! clamped to [0, 1] before the arccos. A distribution is slant when that
//! angle is constant over points and over directions inside the distribution;
//! invariant and anti-invariant are the θ = 0 and θ = π/2 degenerate cases,
//! decided with explicit residual thresholds so the open-ended definitions
//! become decidable:
//!
//! - invariant: θ ≤ angle_tol and the J-image stays inside the distribution
//!   (relative projection residual ≤ linear-solve tolerance),
//! - anti-invariant: the tangential part of the J-image is ≤ linear-solve
//!   tolerance relative to its norm,
//! - proper slant: constant verdict with θ strictly between the degenerate
//!   bands; ties resolve to the degenerate label.
//!
//! Two-distribution splittings are classified from the pair of per-
//! distribution kinds once orthogonality, spanning, and the cross condition
//! J D₁ ⊥ D₂ hold.

use crate::geometry::PointData;
use crate::linalg::{self, Mat};
use crate::submanifold::{frame_at, project_subspace, GeomError, ImmersionSpec, PointFrame};
use crate::tol;
use serde::Serialize;

/// Deterministic pseudo-random stream (splitmix64), used for probe
/// directions so reports reproduce bit for bit under a fixed seed.
#[derive(Debug, Clone)]
pub struct ProbeRng {
    state: u64,
}

impl ProbeRng {
    pub fn new(seed: u64) -> Self {
        ProbeRng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [−1, 1].
    pub fn next_signed(&mut self) -> f64 {
        (self.next_u64() as f64 / u64::MAX as f64) * 2.0 - 1.0
    }
}

/// FNV-1a hash of a name, the default sampling seed.
pub fn name_seed(name: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in name.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// One angle probe: the angle itself plus the raw cosine argument.
struct AngleProbe {
    /// atan2 of the out-of-subspace and in-subspace norms; well conditioned
    /// at both ends of [0, π/2], unlike arccos of the cosine.
    angle: f64,
    /// ‖proj‖/‖v‖ before clamping; sound numerics keep it ≤ 1 + 1e-12.
    cosine_arg: f64,
}

fn slant_probe(
    spec: &ImmersionSpec,
    frame: &PointFrame,
    x: &[f64],
    d: Option<&Mat>,
) -> Result<AngleProbe, GeomError> {
    let ex = frame.e.matvec(x);
    if linalg::norm(&ex) == 0.0 {
        return Err(GeomError::DegenerateSubspace);
    }
    let v = spec.ambient.apply_j(&ex)?;
    let nv = linalg::norm(&v);
    let proj = match d {
        Some(basis) => project_subspace(frame, basis, &v)?,
        None => frame.project_tangent(&v),
    };
    let inside = linalg::norm(&proj);
    let outside = linalg::norm(&linalg::vsub(&v, &proj));
    Ok(AngleProbe {
        angle: outside.atan2(inside),
        cosine_arg: inside / nv,
    })
}

/// Angle between J(E·X) and either the tangent space (D absent) or the
/// subspace E·D, in [0, π/2].
pub fn slant_angle_vector(
    spec: &ImmersionSpec,
    frame: &PointFrame,
    x: &[f64],
    d: Option<&Mat>,
) -> Result<f64, GeomError> {
    Ok(slant_probe(spec, frame, x, d)?.angle)
}

/// Constancy verdict of an angle sample set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Constancy {
    Constant,
    NonConstant,
}

/// Per-distribution slant angle samples over the grid.
#[derive(Debug, Clone, Serialize)]
pub struct AngleReport {
    pub distribution: String,
    /// One angle per (grid point, probe direction), radians, in grid order.
    pub samples: Vec<f64>,
    pub mean_rad: f64,
    pub max_dev: f64,
    pub verdict: Constancy,
    /// Largest cosine argument seen before clamping; sound samples stay
    /// below 1 + 1e-12.
    pub max_cosine_arg: f64,
}

/// Sample a distribution's slant angle over the grid: its basis vectors plus
/// eight seeded pseudo-random unit combinations per point.
pub fn angle_report(
    spec: &ImmersionSpec,
    dist_name: &str,
    seed: u64,
) -> Result<AngleReport, GeomError> {
    let dist = spec.distribution(dist_name)?;
    let basis_at = |u: &[f64]| spec.distribution_basis(dist, u);
    angle_report_with(spec, dist_name, &basis_at, seed)
}

/// Angle report over an arbitrary basis field (used for declared
/// distributions and for base/fiber coordinate spans alike).
pub fn angle_report_with(
    spec: &ImmersionSpec,
    label: &str,
    basis_at: &dyn Fn(&[f64]) -> Result<Mat, GeomError>,
    seed: u64,
) -> Result<AngleReport, GeomError> {
    let mut rng = ProbeRng::new(seed ^ name_seed(label));
    let mut samples = Vec::new();
    let mut max_arg = 0.0f64;
    for u in spec.grid_points() {
        let frame = frame_at(spec, &u)?;
        let basis = basis_at(&u)?;
        let m = basis.cols;
        let mut probes: Vec<Vec<f64>> = (0..m).map(|j| basis.col(j)).collect();
        for _ in 0..8 {
            loop {
                let coeffs: Vec<f64> = (0..m).map(|_| rng.next_signed()).collect();
                if linalg::norm(&coeffs) > 0.1 {
                    probes.push(basis.matvec(&coeffs));
                    break;
                }
            }
        }
        for x in probes {
            let probe = slant_probe(spec, &frame, &x, Some(&basis))?;
            max_arg = max_arg.max(probe.cosine_arg);
            samples.push(probe.angle);
        }
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let max_dev = samples.iter().fold(0.0f64, |m, s| m.max((s - mean).abs()));
    let verdict = if max_dev <= tol::ANGLE_TOL {
        Constancy::Constant
    } else {
        Constancy::NonConstant
    };
    Ok(AngleReport {
        distribution: label.to_string(),
        samples,
        mean_rad: mean,
        max_dev,
        verdict,
        max_cosine_arg: max_arg,
    })
}

/// What a single distribution turned out to be.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum DistKind {
    Invariant,
    AntiInvariant,
    ProperSlant,
    NonSlant,
}

/// Assessment of one distribution: its kind plus the residuals the decision
/// was based on.
#[derive(Debug, Clone, Serialize)]
pub struct DistAssessment {
    pub name: String,
    pub kind: DistKind,
    pub report: AngleReport,
    /// Relative residual of J-image staying inside the distribution.
    pub j_stay_residual: f64,
    /// Relative tangential norm of the J-image (anti-invariance witness).
    pub anti_residual: f64,
}

/// Assess a basis field over the grid: angle constancy plus the invariance
/// and anti-invariance residuals.
pub fn assess_with(
    spec: &ImmersionSpec,
    label: &str,
    basis_at: &dyn Fn(&[f64]) -> Result<Mat, GeomError>,
    seed: u64,
) -> Result<DistAssessment, GeomError> {
    let report = angle_report_with(spec, label, basis_at, seed)?;
    let mut j_stay = 0.0f64;
    let mut anti = 0.0f64;
    for u in spec.grid_points() {
        let frame = frame_at(spec, &u)?;
        let basis = basis_at(&u)?;
        for j in 0..basis.cols {
            let ex = frame.e.matvec(&basis.col(j));
            let jex = spec.ambient.apply_j(&ex)?;
            let njex = linalg::norm(&jex).max(1e-300);
            let inside = project_subspace(&frame, &basis, &jex)?;
            j_stay = j_stay.max(linalg::norm(&linalg::vsub(&jex, &inside)) / njex);
            anti = anti.max(linalg::norm(&frame.project_tangent(&jex)) / njex);
        }
    }
    let theta = report.mean_rad;
    let kind = if report.verdict == Constancy::NonConstant {
        DistKind::NonSlant
    } else if anti <= tol::LINEAR_SOLVE {
        DistKind::AntiInvariant
    } else if theta <= tol::ANGLE_TOL && j_stay <= tol::LINEAR_SOLVE {
        DistKind::Invariant
    } else if theta >= std::f64::consts::FRAC_PI_2 - tol::ANGLE_TOL {
        // tie: resolve to the degenerate label
        DistKind::AntiInvariant
    } else if theta <= tol::ANGLE_TOL {
        DistKind::Invariant
    } else {
        DistKind::ProperSlant
    };
    Ok(DistAssessment {
        name: label.to_string(),
        kind,
        report,
        j_stay_residual: j_stay,
        anti_residual: anti,
    })
}

pub fn assess_distribution(
    spec: &ImmersionSpec,
    dist_name: &str,
    seed: u64,
) -> Result<DistAssessment, GeomError> {
    let dist = spec.distribution(dist_name)?.clone();
    let basis_at = move |u: &[f64]| spec.distribution_basis(&dist, u);
    assess_with(spec, dist_name, &basis_at, seed)
}

/// Assess the span of a fixed set of coordinate directions (used for warped
/// base/fiber splits).
pub fn assess_coordinate_span(
    spec: &ImmersionSpec,
    label: &str,
    indices: &[usize],
    seed: u64,
) -> Result<DistAssessment, GeomError> {
    let k = spec.k();
    let basis = Mat::from_fn(k, indices.len(), |i, j| if i == indices[j] { 1.0 } else { 0.0 });
    let basis_at = move |_: &[f64]| Ok(basis.clone());
    assess_with(spec, label, &basis_at, seed)
}

/// Overall label of the submanifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Label {
    Invariant,
    AntiInvariant,
    ProperSlant,
    SemiInvariant,
    SemiSlant,
    HemiSlant,
    BiSlant,
    Unclassified,
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Label::Invariant => "INVARIANT",
            Label::AntiInvariant => "ANTI-INVARIANT",
            Label::ProperSlant => "PROPER-SLANT",
            Label::SemiInvariant => "SEMI-INVARIANT",
            Label::SemiSlant => "SEMI-SLANT",
            Label::HemiSlant => "HEMI-SLANT",
            Label::BiSlant => "BI-SLANT",
            Label::Unclassified => "UNCLASSIFIED",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub label: Label,
    pub distributions: Vec<DistAssessment>,
    /// Max relative |g(EX, EY)| across the two distributions.
    pub ortho_residual: f64,
    /// Max relative |g(J EX, EY)| across the two distributions.
    pub cross_residual: f64,
    pub spans_tangent: bool,
    pub diagnostics: Vec<String>,
}

/// Classify the submanifold from its declared distributions.
pub fn classify(spec: &ImmersionSpec, seed: u64) -> Result<Classification, GeomError> {
    let mut diagnostics = Vec::new();
    if spec.distributions.is_empty() || spec.distributions.len() > 2 {
        return Ok(Classification {
            label: Label::Unclassified,
            distributions: vec![],
            ortho_residual: f64::NAN,
            cross_residual: f64::NAN,
            spans_tangent: false,
            diagnostics: vec![format!(
                "expected one or two distributions, found {}",
                spec.distributions.len()
            )],
        });
    }

    let mut assessments = Vec::new();
    for d in &spec.distributions {
        assessments.push(assess_distribution(spec, &d.name, seed)?);
    }

    // spanning: the stacked coefficient vectors must have rank k everywhere
    let k = spec.k();
    let mut spans = true;
    let mut ortho = 0.0f64;
    let mut cross = 0.0f64;
    for u in spec.grid_points() {
        let frame = frame_at(spec, &u)?;
        let bases: Vec<Mat> = spec
            .distributions
            .iter()
            .map(|d| spec.distribution_basis(d, &u))
            .collect::<Result<_, _>>()?;
        let total: usize = bases.iter().map(|b| b.cols).sum();
        if total != k {
            spans = false;
            diagnostics.push(format!(
                "distribution dimensions sum to {total} but the tangent space has dimension {k}"
            ));
            break;
        }
        let stacked = Mat::from_fn(k, total, |i, j| {
            let mut jj = j;
            for b in &bases {
                if jj < b.cols {
                    return b[(i, jj)];
                }
                jj -= b.cols;
            }
            unreachable!()
        });
        let smin = linalg::sym_eig_min(&stacked.matmul(&stacked.transpose())).max(0.0).sqrt();
        if smin <= tol::LINEAR_SOLVE {
            spans = false;
            diagnostics.push(format!("combined distributions are rank deficient at {u:?}"));
            break;
        }
        if bases.len() == 2 {
            for i in 0..bases[0].cols {
                let x = frame.e.matvec(&bases[0].col(i));
                let jx = spec.ambient.apply_j(&x)?;
                for j in 0..bases[1].cols {
                    let y = frame.e.matvec(&bases[1].col(j));
                    let jy = spec.ambient.apply_j(&y)?;
                    let nx = linalg::norm(&x).max(1e-300);
                    let ny = linalg::norm(&y).max(1e-300);
                    ortho = ortho.max(linalg::dot(&x, &y).abs() / (nx * ny));
                    cross = cross
                        .max(linalg::dot(&jx, &y).abs() / (linalg::norm(&jx).max(1e-300) * ny))
                        .max(linalg::dot(&jy, &x).abs() / (linalg::norm(&jy).max(1e-300) * nx));
                }
            }
        }
    }

    let geometry_ok = spans
        && (assessments.len() == 1 || (ortho <= tol::LINEAR_SOLVE && cross <= tol::LINEAR_SOLVE));
    if !geometry_ok {
        if ortho > tol::LINEAR_SOLVE {
            diagnostics.push(format!("distributions not orthogonal: residual {ortho:.3e}"));
        }
        if cross > tol::LINEAR_SOLVE {
            diagnostics.push(format!("J D1 not orthogonal to D2: residual {cross:.3e}"));
        }
        return Ok(Classification {
            label: Label::Unclassified,
            distributions: assessments,
            ortho_residual: ortho,
            cross_residual: cross,
            spans_tangent: spans,
            diagnostics,
        });
    }

    let label = match assessments.as_slice() {
        [one] => match one.kind {
            DistKind::Invariant => Label::Invariant,
            DistKind::AntiInvariant => Label::AntiInvariant,
            DistKind::ProperSlant => Label::ProperSlant,
            DistKind::NonSlant => {
                diagnostics.push(format!(
                    "distribution {} has non-constant angle (spread {:.3e})",
                    one.name, one.report.max_dev
                ));
                Label::Unclassified
            }
        },
        [d1, d2] => {
            use DistKind::*;
            match (d1.kind, d2.kind) {
                (NonSlant, _) | (_, NonSlant) => {
                    diagnostics.push("a distribution has non-constant angle".to_string());
                    Label::Unclassified
                }
                (Invariant, Invariant) => Label::Invariant,
                (AntiInvariant, AntiInvariant) => Label::AntiInvariant,
                (Invariant, AntiInvariant) | (AntiInvariant, Invariant) => Label::SemiInvariant,
                (Invariant, ProperSlant) | (ProperSlant, Invariant) => Label::SemiSlant,
                (AntiInvariant, ProperSlant) | (ProperSlant, AntiInvariant) => Label::HemiSlant,
                (ProperSlant, ProperSlant) => {
                    // equal angles with vanishing cross terms merge into one
                    // slant submanifold
                    if (d1.report.mean_rad - d2.report.mean_rad).abs() <= tol::ANGLE_TOL {
                        Label::ProperSlant
                    } else {
                        Label::BiSlant
                    }
                }
            }
        }
        _ => unreachable!(),
    };

    Ok(Classification {
        label,
        distributions: assessments,
        ortho_residual: ortho,
        cross_residual: cross,
        spans_tangent: spans,
        diagnostics,
    })
}

// ---------------------------------------------------------------------------
// Slant identity residuals.
// ---------------------------------------------------------------------------

/// g(TX,TY) − cos²θ [p g(X,TY) + q g(X,Y)] over basis pairs of a slant
/// distribution.
pub fn e21_residual(spec: &ImmersionSpec, pd: &PointData, basis: &Mat, theta: f64) -> f64 {
    slant_len_residual(spec, pd, basis, theta, true)
}

/// g(NX,NY) − sin²θ [p g(X,TY) + q g(X,Y)] over basis pairs of a slant
/// distribution.
pub fn e22_residual(spec: &ImmersionSpec, pd: &PointData, basis: &Mat, theta: f64) -> f64 {
    slant_len_residual(spec, pd, basis, theta, false)
}

fn slant_len_residual(
    spec: &ImmersionSpec,
    pd: &PointData,
    basis: &Mat,
    theta: f64,
    tangential: bool,
) -> f64 {
    let p = spec.params().p() as f64;
    let q = spec.params().q() as f64;
    let f = &pd.frame;
    let m = basis.cols;
    let mut worst = 0.0f64;
    let ex: Vec<Vec<f64>> = (0..m).map(|j| f.e.matvec(&basis.col(j))).collect();
    let tx: Vec<Vec<f64>> = ex.iter().map(|x| pd.t_of(spec, x)).collect();
    let nx: Vec<Vec<f64>> = ex.iter().map(|x| pd.n_of(spec, x)).collect();
    for i in 0..m {
        for j in 0..m {
            let bracket = p * linalg::dot(&ex[i], &tx[j]) + q * linalg::dot(&ex[i], &ex[j]);
            let resid = if tangential {
                linalg::dot(&tx[i], &tx[j]) - theta.cos().powi(2) * bracket
            } else {
                linalg::dot(&nx[i], &nx[j]) - theta.sin().powi(2) * bracket
            };
            worst = worst.max(resid.abs());
        }
    }
    worst
}

/// T²X − cos²θ (pTX + qX) over a slant distribution's basis.
pub fn e23i_residual(spec: &ImmersionSpec, pd: &PointData, basis: &Mat, theta: f64) -> f64 {
    let p = spec.params().p() as f64;
    let q = spec.params().q() as f64;
    let c2 = theta.cos().powi(2);
    let mut worst = 0.0f64;
    for j in 0..basis.cols {
        let x = pd.frame.e.matvec(&basis.col(j));
        let tx = pd.t_of(spec, &x);
        let t2x = pd.t_of(spec, &tx);
        let resid: Vec<f64> = (0..x.len())
            .map(|i| t2x[i] - c2 * (p * tx[i] + q * x[i]))
            .collect();
        worst = worst.max(linalg::norm_inf(&resid));
    }
    worst
}

/// Covariant-derivative form of the squared component map on a globally
/// slant submanifold: (∇_X T²)Y = p cos²θ (∇_X T)Y, both sides by the
/// Leibniz route.
pub fn e23ii_residual(
    spec: &ImmersionSpec,
    st: &crate::geometry::Stencil,
    step: crate::geometry::Step,
    theta: f64,
) -> f64 {
    let c = &st.center;
    let k = c.frame.e.cols;
    let p = spec.params().p() as f64;
    let scale = p * theta.cos().powi(2);
    let t2_center = c.decomp.t_tan.matmul(&c.decomp.t_tan);
    let mut worst = 0.0f64;
    for a in 0..k {
        for y in 0..k {
            let d = st.fd(a, step, |pd| {
                let t2 = pd.decomp.t_tan.matmul(&pd.decomp.t_tan);
                pd.frame.e.matvec(&t2.col(y))
            });
            let nabla_t2y = c.frame.project_tangent(&d);
            let t2_nabla = c.frame.e.matvec(&t2_center.matvec(&c.conn.gamma[a][y]));
            let lhs = linalg::vsub(&nabla_t2y, &t2_nabla);
            let rhs = linalg::vscale(
                scale,
                &crate::geometry::covder_t_leibniz(st, step, a, y),
            );
            worst = worst.max(linalg::norm_inf(&linalg::vsub(&lhs, &rhs)));
        }
    }
    worst
}

/// Metric projector onto span(D) in coordinates: P = D (DᵀGD)⁻¹ Dᵀ G.
pub fn coordinate_projector(f: &PointFrame, d: &Mat) -> Result<Mat, GeomError> {
    let dg = d.transpose().matmul(&f.g);
    let gram = dg.matmul(d);
    let ch = crate::linalg::Cholesky::new(&gram).ok_or(GeomError::DegenerateSubspace)?;
    Ok(d.matmul(&ch.solve_mat(&dg)))
}

/// g(TP₂X, TP₂Y) − cos²θ [p g(TP₂X, P₂Y) + q g(P₂X, P₂Y)] over the full
/// coordinate basis.
pub fn e24_residual(
    spec: &ImmersionSpec,
    pd: &PointData,
    p2: &Mat,
    theta: f64,
) -> f64 {
    let p = spec.params().p() as f64;
    let q = spec.params().q() as f64;
    let f = &pd.frame;
    let k = f.e.cols;
    let c2 = theta.cos().powi(2);
    let mut worst = 0.0f64;
    let p2e: Vec<Vec<f64>> = (0..k).map(|a| f.e.matvec(&p2.col(a))).collect();
    let tp2: Vec<Vec<f64>> = p2e.iter().map(|x| pd.t_of(spec, x)).collect();
    for a in 0..k {
        for b in 0..k {
            let lhs = linalg::dot(&tp2[a], &tp2[b]);
            let rhs = c2 * (p * linalg::dot(&tp2[a], &p2e[b]) + q * linalg::dot(&p2e[a], &p2e[b]));
            worst = worst.max((lhs - rhs).abs());
        }
    }
    worst
}

/// g(NX,NY) − sin²θ [p g(TP₂X,P₂Y) + q g(P₂X,P₂Y)], plus q g(P₁X,P₁Y) when
/// the complementary distribution is anti-invariant (its normal part
/// contributes exactly that much).
pub fn e25_residual(
    spec: &ImmersionSpec,
    pd: &PointData,
    p1: &Mat,
    p2: &Mat,
    theta: f64,
    p1_anti: bool,
) -> f64 {
    let p = spec.params().p() as f64;
    let q = spec.params().q() as f64;
    let f = &pd.frame;
    let k = f.e.cols;
    let s2 = theta.sin().powi(2);
    let mut worst = 0.0f64;
    let e: Vec<Vec<f64>> = (0..k).map(|a| f.e.col(a)).collect();
    let nx: Vec<Vec<f64>> = e.iter().map(|x| pd.n_of(spec, x)).collect();
    let p1e: Vec<Vec<f64>> = (0..k).map(|a| f.e.matvec(&p1.col(a))).collect();
    let p2e: Vec<Vec<f64>> = (0..k).map(|a| f.e.matvec(&p2.col(a))).collect();
    let tp2: Vec<Vec<f64>> = p2e.iter().map(|x| pd.t_of(spec, x)).collect();
    for a in 0..k {
        for b in 0..k {
            let lhs = linalg::dot(&nx[a], &nx[b]);
            let mut rhs =
                s2 * (p * linalg::dot(&tp2[a], &p2e[b]) + q * linalg::dot(&p2e[a], &p2e[b]));
            if p1_anti {
                rhs += q * linalg::dot(&p1e[a], &p1e[b]);
            }
            worst = worst.max((lhs - rhs).abs());
        }
    }
    worst
}
