//! Spec-file ingestion, builtin fixtures, the verification pipeline, and
//! report emission.
//!
//! A spec file is JSON:
//!
//! ```json
//! {
//!   "name": "golden_r4_bislant",
//!   "p": 1, "q": 1,
//!   "ambient_dim": 4,
//!   "structure": ["sigma", "sigbar", "sigma", "sigbar"],
//!   "parameters": [{"name": "f1", "range": [0.5, 1.5]},
//!                  {"name": "f2", "range": [0.5, 1.5]}],
//!   "constants": {"t": 0.7},
//!   "immersion": ["f1*cos(t)", "(sigma/sqrt(q))*f1*sin(t)", "f2", "f2"],
//!   "distributions": {"D1": [["1", "0"]], "D2": [["0", "1"]]},
//!   "warped": {"base": ["f1"], "fiber": ["f2"], "warping": "1"},
//!   "grid": {"points_per_param": 5}
//! }
//! ```
//!
//! `constants`, `distributions`, `warped` and `grid` are optional. Loading
//! compiles every expression, checks arities, and walks the whole grid once
//! to reject rank-deficient Jacobians up front.
//!
//! Reports are deterministic: probe directions derive from a seed that is
//! the FNV-1a hash of the fixture name unless `METAGEE_SEED` overrides it,
//! and repeated runs emit byte-identical output.

pub mod fixtures;

use crate::ambient::{AmbientStructure, AxisSign};
use crate::exprlang::{parse, Expr};
use crate::geometry::{self, stencil_at, Step};
use crate::identity::{IdentityResult, IdentityTag};
use crate::quadring::MetallicParams;
use crate::slant::{self, Classification, Constancy, DistKind, Label};
use crate::submanifold::{
    frame_at, Distribution, GeomError, ImmersionSpec, ParamRange, WarpedDecl,
};
use crate::tol;
use crate::warped::{
    self, ObstructionReport, WarpedAssessment, WarpedContext, WarpedMetricReport,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema error at /{path}: {detail}")]
    Schema { path: String, detail: String },
    #[error("invalid spec at {location}: {detail}")]
    Invalid { location: String, detail: String },
    #[error("expression error at {location}: {source}")]
    Expr {
        location: String,
        #[source]
        source: crate::exprlang::ParseError,
    },
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// The JSON schema of a spec file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub name: String,
    pub p: u32,
    pub q: u32,
    pub ambient_dim: usize,
    pub structure: Vec<AxisSign>,
    pub parameters: Vec<ParamDef>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub constants: BTreeMap<String, f64>,
    pub immersion: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub distributions: BTreeMap<String, Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warped: Option<WarpedDef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridDef>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamDef {
    pub name: String,
    pub range: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WarpedDef {
    pub base: Vec<String>,
    pub fiber: Vec<String>,
    pub warping: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridDef {
    pub points_per_param: usize,
}

pub const DEFAULT_GRID: usize = 5;
const MAX_AMBIENT_DIM: usize = 16;
const MAX_PARAMS: usize = 6;
const MAX_GRID: usize = 32;

/// Parse spec JSON, reporting the JSON-pointer-style path of schema errors.
pub fn parse_spec_json(text: &str) -> Result<SpecFile, SpecError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| SpecError::Schema {
        path: e.path().to_string().replace('.', "/"),
        detail: e.inner().to_string(),
    })
}

fn parse_expr_at(src: &str, location: &str) -> Result<Expr, SpecError> {
    parse(src).map_err(|e| SpecError::Expr { location: location.to_string(), source: e })
}

/// Compile a parsed spec file into a validated [`ImmersionSpec`].
pub fn compile(file: &SpecFile) -> Result<ImmersionSpec, SpecError> {
    let invalid = |location: &str, detail: String| SpecError::Invalid {
        location: location.to_string(),
        detail,
    };
    let mp = MetallicParams::new(file.p, file.q)
        .map_err(|e| invalid("/p", e.to_string()))?;
    if file.ambient_dim == 0 || file.ambient_dim > MAX_AMBIENT_DIM {
        return Err(invalid(
            "/ambient_dim",
            format!("must be in 1..={MAX_AMBIENT_DIM}"),
        ));
    }
    if file.structure.len() != file.ambient_dim {
        return Err(invalid(
            "/structure",
            format!("expected {} signs, got {}", file.ambient_dim, file.structure.len()),
        ));
    }
    let ambient = AmbientStructure::new(file.structure.clone(), mp)
        .map_err(|e| invalid("/structure", e.to_string()))?;

    if file.parameters.is_empty() || file.parameters.len() > MAX_PARAMS {
        return Err(invalid("/parameters", format!("must be in 1..={MAX_PARAMS}")));
    }
    let reserved = ["pi", "sigma", "sigbar", "p", "q"];
    let mut parameters = Vec::new();
    let mut names = Vec::new();
    for (i, pdef) in file.parameters.iter().enumerate() {
        let loc = format!("/parameters/{i}");
        if reserved.contains(&pdef.name.as_str()) {
            return Err(invalid(&loc, format!("`{}` is a reserved name", pdef.name)));
        }
        if names.contains(&pdef.name) {
            return Err(invalid(&loc, format!("duplicate parameter `{}`", pdef.name)));
        }
        let [lo, hi] = pdef.range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid(&loc, format!("range [{lo}, {hi}] is not a proper interval")));
        }
        names.push(pdef.name.clone());
        parameters.push(ParamRange { name: pdef.name.clone(), lo, hi });
    }
    for cname in file.constants.keys() {
        if reserved.contains(&cname.as_str()) || names.contains(cname) {
            return Err(invalid(
                "/constants",
                format!("constant `{cname}` collides with a parameter or reserved name"),
            ));
        }
    }

    if file.immersion.len() != file.ambient_dim {
        return Err(invalid(
            "/immersion",
            format!("expected {} components, got {}", file.ambient_dim, file.immersion.len()),
        ));
    }
    let known = |fv: &std::collections::BTreeSet<String>| {
        fv.iter()
            .find(|v| !names.contains(v) && !file.constants.contains_key(*v))
            .cloned()
    };
    let mut immersion = Vec::new();
    for (i, src) in file.immersion.iter().enumerate() {
        let loc = format!("/immersion/{i}");
        let e = parse_expr_at(src, &loc)?;
        if let Some(bad) = known(&e.free_vars()) {
            return Err(invalid(&loc, format!("unknown name `{bad}`")));
        }
        immersion.push(e);
    }

    let k = parameters.len();
    let mut distributions = Vec::new();
    for (dname, vectors) in &file.distributions {
        if vectors.is_empty() {
            return Err(invalid(
                &format!("/distributions/{dname}"),
                "needs at least one vector".into(),
            ));
        }
        let mut compiled = Vec::new();
        for (vi, vector) in vectors.iter().enumerate() {
            let loc = format!("/distributions/{dname}/{vi}");
            if vector.len() != k {
                return Err(invalid(
                    &loc,
                    format!("expected {k} coefficients, got {}", vector.len()),
                ));
            }
            let mut coeffs = Vec::new();
            for (ci, src) in vector.iter().enumerate() {
                let e = parse_expr_at(src, &format!("{loc}/{ci}"))?;
                if let Some(bad) = known(&e.free_vars()) {
                    return Err(invalid(&loc, format!("unknown name `{bad}`")));
                }
                coeffs.push(e);
            }
            compiled.push(coeffs);
        }
        distributions.push(Distribution { name: dname.clone(), vectors: compiled });
    }

    let warped = match &file.warped {
        None => None,
        Some(w) => {
            let mut seen: Vec<&String> = w.base.iter().chain(&w.fiber).collect();
            seen.sort();
            seen.dedup();
            if seen.len() != k
                || w.base.len() + w.fiber.len() != k
                || w.base.is_empty()
                || w.fiber.is_empty()
                || seen.iter().any(|n| !names.contains(n))
            {
                return Err(invalid(
                    "/warped",
                    "base and fiber must partition the parameters, both nonempty".into(),
                ));
            }
            let warping = parse_expr_at(&w.warping, "/warped/warping")?;
            if let Some(bad) = warping
                .free_vars()
                .iter()
                .find(|v| !w.base.contains(v) && !file.constants.contains_key(*v))
            {
                return Err(invalid(
                    "/warped/warping",
                    format!("warping may only depend on base parameters, found `{bad}`"),
                ));
            }
            Some(WarpedDecl {
                base: w.base.clone(),
                fiber: w.fiber.clone(),
                warping,
            })
        }
    };

    let grid = match &file.grid {
        Some(g) if g.points_per_param >= 1 && g.points_per_param <= MAX_GRID => {
            g.points_per_param
        }
        Some(g) => {
            return Err(invalid(
                "/grid/points_per_param",
                format!("{} not in 1..={MAX_GRID}", g.points_per_param),
            ))
        }
        None => DEFAULT_GRID,
    };

    let spec = ImmersionSpec::new(
        file.name.clone(),
        ambient,
        parameters,
        file.constants.clone(),
        immersion,
        distributions,
        warped,
        grid,
    );

    // walk the grid once: full Jacobian rank and domain safety everywhere
    for u in spec.grid_points() {
        frame_at(&spec, &u)?;
    }
    if let Some(wd) = &spec.warped {
        // probe the grid plus the finite-difference stencil band around it,
        // so derivative checks can never leave the warping's domain
        for u in spec.grid_points() {
            let mut probes = vec![u.clone()];
            for a in 0..spec.k() {
                for delta in [-2.0 * crate::tol::FD_STEP, 2.0 * crate::tol::FD_STEP] {
                    let mut v = u.clone();
                    v[a] += delta;
                    probes.push(v);
                }
            }
            for v in probes {
                let jet = wd.warping.eval_jet2(&spec.eval_point(&v)).map_err(GeomError::from)?;
                if jet.value <= 0.0 || !jet.value.is_finite() {
                    return Err(invalid(
                        "/warped/warping",
                        format!("not strictly positive near grid point {u:?}"),
                    ));
                }
            }
        }
    }
    Ok(spec)
}

/// Load and compile a spec file from disk.
pub fn load_spec(path: impl AsRef<Path>) -> Result<ImmersionSpec, SpecError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| SpecError::Io {
        path: path.display().to_string(),
        source,
    })?;
    compile(&parse_spec_json(&text)?)
}

/// Sampling seed: FNV-1a of the fixture name unless METAGEE_SEED is set.
pub fn sampling_seed(name: &str) -> u64 {
    match std::env::var("METAGEE_SEED") {
        Ok(v) => v.parse().unwrap_or_else(|_| slant::name_seed(&v)),
        Err(_) => slant::name_seed(name),
    }
}

/// One skipped catalog entry and why it did not apply.
#[derive(Debug, Clone, Serialize)]
pub struct SkippedIdentity {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AngleSummary {
    pub dist: String,
    pub mean_rad: f64,
    pub max_dev: f64,
    pub verdict: Constancy,
}

#[derive(Debug, Clone, Serialize)]
pub struct WarpedSection {
    pub metric: WarpedMetricReport,
    pub base_kind: DistKind,
    pub fiber_kind: DistKind,
    pub obstruction: ObstructionReport,
}

/// Full verification outcome for one fixture.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub name: String,
    pub p: u32,
    pub q: u32,
    pub tool_version: String,
    pub grid: String,
    pub classification: Classification,
    pub angles: Vec<AngleSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warped: Option<WarpedSection>,
    pub identities: Vec<IdentityResult>,
    pub skipped: Vec<SkippedIdentity>,
    pub overall: bool,
}

/// Scale applied to every identity tolerance (CLI --tol-scale).
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub tol_scale: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { tol_scale: 1.0 }
    }
}

struct RunCtx<'a> {
    spec: &'a ImmersionSpec,
    classification: Classification,
    warped: Option<(WarpedContext, WarpedAssessment)>,
}

impl<'a> RunCtx<'a> {
    fn new(spec: &'a ImmersionSpec, seed: u64) -> Result<Self, GeomError> {
        let classification = slant::classify(spec, seed)?;
        let warped = warped_ctx_and_kinds(spec, seed)?;
        Ok(RunCtx { spec, classification, warped })
    }

    fn base_kind(&self) -> Option<DistKind> {
        self.warped.as_ref().map(|(_, a)| a.base.kind)
    }

    fn fiber_kind(&self) -> Option<DistKind> {
        self.warped.as_ref().map(|(_, a)| a.fiber.kind)
    }

    /// The slant side for the P₂-projected identities, with its complement.
    fn slant_split(&self) -> Option<(usize, usize, f64)> {
        let dists = &self.classification.distributions;
        if dists.len() != 2 {
            return None;
        }
        let slant_pos = dists.iter().position(|d| d.kind == DistKind::ProperSlant);
        let pos = match self.classification.label {
            Label::SemiSlant | Label::HemiSlant => slant_pos?,
            Label::SemiInvariant => {
                dists.iter().position(|d| d.kind == DistKind::AntiInvariant)?
            }
            _ => return None,
        };
        let other = 1 - pos;
        Some((other, pos, dists[pos].report.mean_rad))
    }
}

fn warped_ctx_and_kinds(
    spec: &ImmersionSpec,
    seed: u64,
) -> Result<Option<(WarpedContext, WarpedAssessment)>, GeomError> {
    if spec.warped.is_none() {
        return Ok(None);
    }
    let wc = warped::warped_context(spec)?;
    let assessment = warped::assess_warped(spec, &wc, seed)?;
    Ok(Some((wc, assessment)))
}

/// Why a tag does not apply to this fixture, or `None` when it does.
fn skip_reason(tag: IdentityTag, ctx: &RunCtx) -> Option<String> {
    use IdentityTag::*;
    let needs_warped = || {
        if ctx.warped.is_none() {
            Some("no warped declaration".to_string())
        } else {
            None
        }
    };
    match tag {
        E7i | E7ii | E8 | E9i | E9ii | E10i | E10ii => None,
        E13i | E13ii | E14i | E14ii | E16 | E17i | E17ii | E18i | E18ii | E19 => None,
        E21 | E22 | E23i => {
            let any = ctx
                .classification
                .distributions
                .iter()
                .any(|d| d.kind != DistKind::NonSlant);
            if any {
                None
            } else {
                Some("no slant distribution".to_string())
            }
        }
        E23ii => match ctx.classification.label {
            Label::Invariant | Label::AntiInvariant | Label::ProperSlant => None,
            other => Some(format!("whole tangent space is not slant (label {other})")),
        },
        E24 | E25 => {
            if ctx.slant_split().is_some() {
                None
            } else {
                Some("needs a semi-slant, hemi-slant, or semi-invariant splitting".to_string())
            }
        }
        Wpm | L1a | L1b | L1c | W1a | W1b | W3 => needs_warped(),
        E32 => needs_warped().or_else(|| {
            match (ctx.base_kind(), ctx.fiber_kind()) {
                (Some(DistKind::Invariant), _) | (_, Some(DistKind::Invariant)) => None,
                _ => Some("needs an invariant base or fiber".to_string()),
            }
        }),
        P1 => needs_warped().or_else(|| {
            match (ctx.base_kind(), ctx.fiber_kind()) {
                (Some(DistKind::Invariant), Some(DistKind::AntiInvariant)) => None,
                _ => Some("needs an invariant base and an anti-invariant fiber".to_string()),
            }
        }),
        P2 => needs_warped().or_else(|| {
            match (ctx.base_kind(), ctx.fiber_kind()) {
                (Some(DistKind::AntiInvariant), Some(DistKind::Invariant)) => None,
                _ => Some("needs an anti-invariant base and an invariant fiber".to_string()),
            }
        }),
        P3 => needs_warped().or_else(|| {
            match (ctx.base_kind(), ctx.fiber_kind()) {
                (Some(DistKind::Invariant), Some(DistKind::Invariant)) => None,
                _ => Some("needs invariant base and fiber".to_string()),
            }
        }),
        P4 => needs_warped().or_else(|| {
            match (ctx.base_kind(), ctx.fiber_kind()) {
                (Some(DistKind::AntiInvariant), Some(DistKind::AntiInvariant)) => None,
                _ => Some("needs anti-invariant base and fiber".to_string()),
            }
        }),
        Hs => needs_warped().or_else(|| {
            match (ctx.base_kind(), ctx.fiber_kind()) {
                (Some(DistKind::AntiInvariant), Some(DistKind::ProperSlant))
                | (Some(DistKind::ProperSlant), Some(DistKind::AntiInvariant)) => None,
                _ => Some("needs an anti-invariant side paired with a proper slant side".to_string()),
            }
        }),
    }
}

fn is_fd_tag(tag: IdentityTag) -> bool {
    use IdentityTag::*;
    matches!(
        tag,
        E13i | E13ii | E14i | E14ii | E16 | E17i | E17ii | E18i | E18ii | E19 | E23ii | L1c
            | P2
            | P4
    )
}

/// Evaluate a set of applicable tags over the whole grid, building one
/// stencil per point and sharing it across all of them. Returns the guarded
/// maximum residual per tag, in input order.
fn eval_tags_over_grid(ctx: &RunCtx, tags: &[IdentityTag]) -> Result<Vec<f64>, GeomError> {
    let spec = ctx.spec;
    let any_fd = tags.iter().any(|&t| is_fd_tag(t));
    let mut worst = vec![(0.0f64, 0.0f64); tags.len()];
    for u in spec.grid_points() {
        if any_fd {
            let st = stencil_at(spec, &u, tol::FD_STEP)?;
            let fields = geometry::vfields_for(&st.center);
            for (slot, &tag) in worst.iter_mut().zip(tags) {
                if is_fd_tag(tag) {
                    let (rh, rhalf) = eval_fd_tag(tag, ctx, &st, &fields)?;
                    slot.0 = slot.0.max(rh);
                    slot.1 = slot.1.max(rhalf);
                } else {
                    let r = eval_pointwise_tag(tag, ctx, &st.center)?;
                    slot.0 = slot.0.max(r);
                    slot.1 = slot.1.max(r);
                }
            }
        } else {
            let pd = geometry::point_data(spec, &u)?;
            for (slot, &tag) in worst.iter_mut().zip(tags) {
                let r = eval_pointwise_tag(tag, ctx, &pd)?;
                slot.0 = slot.0.max(r);
                slot.1 = slot.1.max(r);
            }
        }
    }
    Ok(worst
        .into_iter()
        .map(|(rh, rhalf)| geometry::guarded(rh, rhalf))
        .collect())
}

fn eval_fd_tag(
    tag: IdentityTag,
    ctx: &RunCtx,
    st: &geometry::Stencil,
    fields: &[geometry::VField],
) -> Result<(f64, f64), GeomError> {
    use IdentityTag::*;
    let spec = ctx.spec;
    let both = |f: &dyn Fn(Step) -> f64| (f(Step::Full), f(Step::Half));
    Ok(match tag {
        E13i => both(&|s| geometry::e13i_residual(st, s)),
        E13ii => both(&|s| geometry::e13ii_residual(st, s)),
        E14i => both(&|s| geometry::e14i_residual(spec, st, s, fields)),
        E14ii => both(&|s| geometry::e14ii_residual(spec, st, s, fields)),
        E16 => both(&|s| geometry::e16_residual(st, s)),
        E17i => both(&|s| geometry::e17i_residual(spec, st, s)),
        E17ii => both(&|s| geometry::e17ii_residual(spec, st, s)),
        E18i => both(&|s| geometry::e18i_residual(spec, st, s, fields)),
        E18ii => both(&|s| geometry::e18ii_residual(spec, st, s, fields)),
        E19 => both(&|s| geometry::e19_residual(spec, st, s, fields)),
        E23ii => {
            let theta = ctx.classification.distributions[0].report.mean_rad;
            both(&|s| slant::e23ii_residual(spec, st, s, theta))
        }
        L1c => {
            let (wc, _) = ctx.warped.as_ref().unwrap();
            (
                warped::l1c_residual(spec, wc, st, Step::Full)?,
                warped::l1c_residual(spec, wc, st, Step::Half)?,
            )
        }
        P2 => {
            let (wc, _) = ctx.warped.as_ref().unwrap();
            (
                warped::p2_residual(spec, wc, st, Step::Full)?,
                warped::p2_residual(spec, wc, st, Step::Half)?,
            )
        }
        P4 => {
            let (wc, _) = ctx.warped.as_ref().unwrap();
            (
                warped::p4_residual(spec, wc, st, Step::Full)?,
                warped::p4_residual(spec, wc, st, Step::Half)?,
            )
        }
        _ => unreachable!("not a finite-difference tag"),
    })
}

fn eval_pointwise_tag(
    tag: IdentityTag,
    ctx: &RunCtx,
    pd: &geometry::PointData,
) -> Result<f64, GeomError> {
    use IdentityTag::*;
    let spec = ctx.spec;
    let f = &pd.frame;
    let d = &pd.decomp;
    Ok(match tag {
        E7i => crate::submanifold::e7i_residual(f, d),
        E7ii => crate::submanifold::e7ii_residual(f, d),
        E8 => crate::submanifold::e8_residual(f, d),
        E9i => crate::submanifold::e9i_residual(spec, f, d),
        E9ii => crate::submanifold::e9ii_residual(spec, f, d),
        E10i => crate::submanifold::e10i_residual(spec, f, d),
        E10ii => crate::submanifold::e10ii_residual(spec, f, d),
        E21 | E22 | E23i => {
            let mut worst = 0.0f64;
            for da in &ctx.classification.distributions {
                if da.kind == DistKind::NonSlant {
                    continue;
                }
                let dist = spec.distribution(&da.name)?;
                let basis = spec.distribution_basis(dist, &f.u)?;
                let theta = da.report.mean_rad;
                let r = match tag {
                    E21 => slant::e21_residual(spec, pd, &basis, theta),
                    E22 => slant::e22_residual(spec, pd, &basis, theta),
                    _ => slant::e23i_residual(spec, pd, &basis, theta),
                };
                worst = worst.max(r);
            }
            worst
        }
        E24 | E25 => {
            let (p1_pos, p2_pos, theta) = ctx.slant_split().unwrap();
            let dists = &ctx.classification.distributions;
            let d1 = spec.distribution(&dists[p1_pos].name)?;
            let d2 = spec.distribution(&dists[p2_pos].name)?;
            let b1 = spec.distribution_basis(d1, &f.u)?;
            let b2 = spec.distribution_basis(d2, &f.u)?;
            let p1 = slant::coordinate_projector(f, &b1)?;
            let p2 = slant::coordinate_projector(f, &b2)?;
            if tag == E24 {
                slant::e24_residual(spec, pd, &p2, theta)
            } else {
                let p1_anti = dists[p1_pos].kind == DistKind::AntiInvariant;
                slant::e25_residual(spec, pd, &p1, &p2, theta, p1_anti)
            }
        }
        L1a => {
            let (wc, _) = ctx.warped.as_ref().unwrap();
            warped::l1a_residual(spec, wc, pd)
        }
        L1b => {
            let (wc, _) = ctx.warped.as_ref().unwrap();
            warped::l1b_residual(spec, wc, pd)?
        }
        W1a => {
            let (wc, _) = ctx.warped.as_ref().unwrap();
            warped::w1a_residual(wc, pd)
        }
        W1b => {
            let (wc, _) = ctx.warped.as_ref().unwrap();
            warped::w1b_residual(wc, pd)
        }
        W3 => {
            let (wc, _) = ctx.warped.as_ref().unwrap();
            warped::w3_residual(spec, wc, pd)?
        }
        E32 => {
            let (wc, assessment) = ctx.warped.as_ref().unwrap();
            let invariant_base = assessment.base.kind == DistKind::Invariant;
            warped::e32_residual(spec, wc, pd, invariant_base)?
        }
        P1 => {
            let (wc, _) = ctx.warped.as_ref().unwrap();
            warped::p1_residual(spec, wc, pd)?
        }
        P3 => {
            let (wc, _) = ctx.warped.as_ref().unwrap();
            warped::p3_residual(spec, wc, pd, 1e-3)?
        }
        Hs => {
            let (wc, assessment) = ctx.warped.as_ref().unwrap();
            let anti_base = assessment.base.kind == DistKind::AntiInvariant;
            warped::hs_residual(spec, wc, pd, anti_base)?
        }
        _ => unreachable!("not a pointwise tag"),
    })
}

/// Run a single catalog identity over a fixture's grid.
pub fn check_identity(
    spec: &ImmersionSpec,
    tag: IdentityTag,
    opts: RunOptions,
) -> Result<IdentityResult, GeomError> {
    let seed = sampling_seed(&spec.name);
    let ctx = RunCtx::new(spec, seed)?;
    if let Some(reason) = skip_reason(tag, &ctx) {
        return Err(GeomError::NotApplicable(reason));
    }
    if tag == IdentityTag::Wpm {
        let (result, _) = warped::verify_warped_metric(spec)?;
        return Ok(scale_result(result, opts.tol_scale));
    }
    let residual = eval_tags_over_grid(&ctx, &[tag])?[0];
    Ok(scale_result(IdentityResult::new(tag, residual), opts.tol_scale))
}

fn scale_result(mut r: IdentityResult, scale: f64) -> IdentityResult {
    if scale != 1.0 {
        r.tol *= scale;
        r.pass = r.residual <= r.tol;
    }
    r
}

/// Run the full pipeline: classification, angle reports, warped checks, and
/// every applicable catalog identity, in catalog order.
pub fn run_all(spec: &ImmersionSpec, opts: RunOptions) -> Result<VerificationReport, GeomError> {
    let seed = sampling_seed(&spec.name);
    let ctx = RunCtx::new(spec, seed)?;

    let angles = ctx
        .classification
        .distributions
        .iter()
        .map(|d| AngleSummary {
            dist: d.name.clone(),
            mean_rad: d.report.mean_rad,
            max_dev: d.report.max_dev,
            verdict: d.report.verdict,
        })
        .collect();

    let mut applicable = Vec::new();
    let mut skipped = Vec::new();
    for &tag in IdentityTag::ALL {
        match skip_reason(tag, &ctx) {
            Some(reason) => {
                skipped.push(SkippedIdentity { id: tag.name().to_string(), reason });
            }
            None => applicable.push(tag),
        }
    }
    let grid_tags: Vec<IdentityTag> = applicable
        .iter()
        .copied()
        .filter(|&t| t != IdentityTag::Wpm)
        .collect();
    let residuals = eval_tags_over_grid(&ctx, &grid_tags)?;
    let mut identities = Vec::new();
    let mut residual_iter = residuals.into_iter();
    for &tag in &applicable {
        if tag == IdentityTag::Wpm {
            let (result, _) = warped::verify_warped_metric(spec)?;
            identities.push(scale_result(result, opts.tol_scale));
        } else {
            let residual = residual_iter.next().unwrap();
            identities.push(scale_result(IdentityResult::new(tag, residual), opts.tol_scale));
        }
    }

    let warped_section = match &ctx.warped {
        None => None,
        Some((wc, assessment)) => {
            let (_, metric) = warped::verify_warped_metric(spec)?;
            let obstruction = warped::obstruction_report(spec, wc, assessment)?;
            Some(WarpedSection {
                metric,
                base_kind: assessment.base.kind,
                fiber_kind: assessment.fiber.kind,
                obstruction,
            })
        }
    };

    let overall = ctx.classification.label != Label::Unclassified
        && identities.iter().all(|i| i.pass)
        && warped_section
            .as_ref()
            .is_none_or(|w| w.metric.pass && w.obstruction.consistent);

    let k = spec.k();
    Ok(VerificationReport {
        name: spec.name.clone(),
        p: spec.params().p(),
        q: spec.params().q(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        grid: format!(
            "{} points/param over {} params ({} points)",
            spec.grid,
            k,
            spec.grid_points().len()
        ),
        classification: ctx.classification,
        angles,
        warped: warped_section,
        identities,
        skipped,
        overall,
    })
}

/// Human-readable report text.
pub fn render_text(r: &VerificationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "fixture: {}   (p, q) = ({}, {})", r.name, r.p, r.q);
    let _ = writeln!(out, "grid: {}", r.grid);
    let _ = writeln!(out, "classification: {}", r.classification.label);
    for d in &r.classification.distributions {
        let _ = writeln!(
            out,
            "  {}: {:?}  theta = {:.9} rad  (max dev {:.2e})",
            d.name, d.kind, d.report.mean_rad, d.report.max_dev
        );
    }
    for diag in &r.classification.diagnostics {
        let _ = writeln!(out, "  note: {diag}");
    }
    if let Some(w) = &r.warped {
        let _ = writeln!(
            out,
            "warped: base {:?} x_f fiber {:?}, metric split {}",
            w.base_kind,
            w.fiber_kind,
            if w.metric.pass { "PASS" } else { "FAIL" }
        );
        let _ = writeln!(
            out,
            "  obstruction: {:?} (max |X(ln f)| = {:.3e})",
            w.obstruction.verdict, w.obstruction.max_x_ln_f
        );
    }
    let _ = writeln!(out, "identities:");
    for i in &r.identities {
        let _ = writeln!(
            out,
            "  {:<9} {}  residual {:.3e} <= {:.1e}  [{}]  {}",
            i.id,
            if i.pass { "PASS" } else { "FAIL" },
            i.residual,
            i.tol,
            match i.class {
                crate::identity::NumericClass::Exact => "exact",
                crate::identity::NumericClass::Algebraic => "algebraic",
                crate::identity::NumericClass::LinearSolve => "linear-solve",
                crate::identity::NumericClass::FiniteDiff => "finite-diff",
            },
            i.anchor
        );
    }
    for s in &r.skipped {
        let _ = writeln!(out, "  {:<9} SKIP  {}", s.id, s.reason);
    }
    let _ = writeln!(out, "overall: {}", if r.overall { "PASS" } else { "FAIL" });
    out
}

/// Angle table as CSV: point index, parameter values, then the per-point
/// mean angle of each distribution.
pub fn render_angles_csv(
    spec: &ImmersionSpec,
    reports: &[slant::AngleReport],
) -> Result<String, GeomError> {
    let points = spec.grid_points();
    let mut out = String::from("point_index");
    for p in &spec.parameters {
        let _ = write!(out, ",{}", p.name);
    }
    for rep in reports {
        let _ = write!(out, ",{}", rep.distribution);
    }
    out.push('\n');
    for (i, u) in points.iter().enumerate() {
        let _ = write!(out, "{i}");
        for v in u {
            let _ = write!(out, ",{v:.17}");
        }
        for rep in reports {
            let per_point = rep.samples.len() / points.len();
            let chunk = &rep.samples[i * per_point..(i + 1) * per_point];
            let mean = chunk.iter().sum::<f64>() / per_point as f64;
            let _ = write!(out, ",{mean:.17}");
        }
        out.push('\n');
    }
    Ok(out)
}
