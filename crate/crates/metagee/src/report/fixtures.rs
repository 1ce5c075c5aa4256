//! Builtin fixtures: the six reference immersions in metallic-general and
//! Golden variants, plus constructed fixtures that exercise configurations
//! the reference set does not cover (invariant and anti-invariant pairs, a
//! deliberately inconsistent warped declaration, a trivial product, a proper
//! slant curve, and a non-slant patch).
//!
//! Fixtures are built as [`SpecFile`] values and go through the same compile
//! and validation path as files loaded from disk.

use super::{GridDef, ParamDef, SpecFile, WarpedDef};
use crate::submanifold::ImmersionSpec;
use std::collections::BTreeMap;

fn params(defs: &[(&str, f64, f64)]) -> Vec<ParamDef> {
    defs.iter()
        .map(|(n, lo, hi)| ParamDef { name: n.to_string(), range: [*lo, *hi] })
        .collect()
}

fn dists(defs: &[(&str, &[&[&str]])]) -> BTreeMap<String, Vec<Vec<String>>> {
    defs.iter()
        .map(|(name, vectors)| {
            (
                name.to_string(),
                vectors
                    .iter()
                    .map(|v| v.iter().map(|s| s.to_string()).collect())
                    .collect(),
            )
        })
        .collect()
}

fn strs(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn variant_name(p: u32, q: u32, base: &str) -> String {
    if (p, q) == (1, 1) {
        format!("golden_{base}")
    } else {
        format!("metallic_{base}")
    }
}

/// Bi-slant surface in ℝ⁴: radial direction tilted by the fixed angle t
/// inside a mixed eigenplane, crossed with the diagonal (1,1) direction in
/// the other mixed plane. D1's angle varies with t; D2's is arccos of
/// (σ+σ̄)/√(2(σ²+σ̄²)).
pub fn r4_bislant_file(p: u32, q: u32, t: f64) -> SpecFile {
    SpecFile {
        name: variant_name(p, q, "r4_bislant"),
        p,
        q,
        ambient_dim: 4,
        structure: sigs("+-+-"),
        parameters: params(&[("f1", 0.5, 1.5), ("f2", 0.5, 1.5)]),
        constants: BTreeMap::from([("t".to_string(), t)]),
        immersion: strs(&["f1*cos(t)", "(sigma/sqrt(q))*f1*sin(t)", "f2", "f2"]),
        distributions: dists(&[("D1", &[&["1", "0"]]), ("D2", &[&["0", "1"]])]),
        warped: None,
        grid: None,
    }
}

/// Warped product in ℝ⁵ with an anti-invariant radial base and an invariant
/// two-torus fiber, warping f.
pub fn r5_semiinvariant_file(p: u32, q: u32) -> SpecFile {
    SpecFile {
        name: variant_name(p, q, "r5_semiinvariant"),
        p,
        q,
        ambient_dim: 5,
        structure: sigs("++---"),
        parameters: params(&[("f", 1.0, 2.0), ("alpha", 0.3, 1.2), ("beta", 0.3, 1.2)]),
        constants: BTreeMap::new(),
        immersion: strs(&[
            "f*sin(alpha)",
            "f*cos(alpha)",
            "f*sin(beta)",
            "f*cos(beta)",
            "sqrt(p*sigma/q)*f",
        ]),
        distributions: dists(&[
            ("D1", &[&["1", "0", "0"]]),
            ("D2", &[&["0", "1", "0"], &["0", "0", "1"]]),
        ]),
        warped: Some(WarpedDef {
            base: strs(&["f"]),
            fiber: strs(&["alpha", "beta"]),
            warping: "f".into(),
        }),
        grid: None,
    }
}

/// Warped product in ℝ⁴ with a proper slant radial base and an invariant
/// two-torus fiber, warping f.
pub fn r4_semislant_file(p: u32, q: u32) -> SpecFile {
    SpecFile {
        name: variant_name(p, q, "r4_semislant"),
        p,
        q,
        ambient_dim: 4,
        structure: sigs("++--"),
        parameters: params(&[("f", 1.0, 2.0), ("alpha", 0.3, 1.2), ("beta", 0.3, 1.2)]),
        constants: BTreeMap::new(),
        immersion: strs(&["f*sin(alpha)", "f*cos(alpha)", "f*sin(beta)", "f*cos(beta)"]),
        distributions: dists(&[
            ("D1", &[&["1", "0", "0"]]),
            ("D2", &[&["0", "1", "0"], &["0", "0", "1"]]),
        ]),
        warped: Some(WarpedDef {
            base: strs(&["f"]),
            fiber: strs(&["alpha", "beta"]),
            warping: "f".into(),
        }),
        grid: None,
    }
}

/// Warped product in ℝ⁸: a two-dimensional proper slant base (f1, f2)
/// crossed with an invariant (α, β) fiber, warping √(f1²+f2²).
pub fn r8_semislant_file(p: u32, q: u32) -> SpecFile {
    SpecFile {
        name: variant_name(p, q, "r8_semislant"),
        p,
        q,
        ambient_dim: 8,
        structure: sigs("++--++--"),
        parameters: params(&[
            ("f1", 0.5, 1.5),
            ("f2", 0.5, 1.5),
            ("alpha", 0.3, 1.2),
            ("beta", 0.3, 1.2),
        ]),
        constants: BTreeMap::new(),
        immersion: strs(&[
            "f1*cos(alpha)",
            "f2*cos(alpha)",
            "f1*cos(beta)",
            "f2*cos(beta)",
            "f1*sin(alpha)",
            "f2*sin(alpha)",
            "f1*sin(beta)",
            "f2*sin(beta)",
        ]),
        distributions: dists(&[
            ("D1", &[&["1", "0", "0", "0"], &["0", "1", "0", "0"]]),
            ("D2", &[&["0", "0", "1", "0"], &["0", "0", "0", "1"]]),
        ]),
        warped: Some(WarpedDef {
            base: strs(&["f1", "f2"]),
            fiber: strs(&["alpha", "beta"]),
            warping: "sqrt(f1^2+f2^2)".into(),
        }),
        grid: Some(GridDef { points_per_param: 3 }),
    }
}

/// Warped product in ℝ⁵ with an anti-invariant radial base and a proper
/// slant circle fiber, warping √2·f.
pub fn r5_hemislant_file(p: u32, q: u32) -> SpecFile {
    SpecFile {
        name: variant_name(p, q, "r5_hemislant"),
        p,
        q,
        ambient_dim: 5,
        structure: sigs("++---"),
        parameters: params(&[("f", 1.0, 2.0), ("alpha", 0.3, 1.2)]),
        constants: BTreeMap::new(),
        immersion: strs(&[
            "f*sin(alpha)",
            "f*cos(alpha)",
            "f*sin(alpha)",
            "f*cos(alpha)",
            "sqrt(p*sigma/q)*f",
        ]),
        distributions: dists(&[("D1", &[&["1", "0"]]), ("D2", &[&["0", "1"]])]),
        warped: Some(WarpedDef {
            base: strs(&["f"]),
            fiber: strs(&["alpha"]),
            warping: "sqrt(2)*f".into(),
        }),
        grid: None,
    }
}

/// Warped product in ℝ⁷ with a proper slant radial base and an
/// anti-invariant circle fiber, warping √(σ²/q+1)·f.
pub fn r7_hemislant_file(p: u32, q: u32) -> SpecFile {
    SpecFile {
        name: variant_name(p, q, "r7_hemislant"),
        p,
        q,
        ambient_dim: 7,
        structure: sigs("++--++-"),
        parameters: params(&[("f", 1.0, 2.0), ("alpha", 0.3, 1.2)]),
        constants: BTreeMap::new(),
        immersion: strs(&[
            "f*sin(alpha)",
            "f*cos(alpha)",
            "(sigma/sqrt(q))*f*sin(alpha)",
            "(sigma/sqrt(q))*f*cos(alpha)",
            "(1/sqrt(2))*f",
            "(1/sqrt(2))*f",
            "-f",
        ]),
        distributions: dists(&[("D1", &[&["1", "0"]]), ("D2", &[&["0", "1"]])]),
        warped: Some(WarpedDef {
            base: strs(&["f"]),
            fiber: strs(&["alpha"]),
            warping: "sqrt(sigma^2/q+1)*f".into(),
        }),
        grid: None,
    }
}

/// Constructed: both base and fiber spans invariant (all touched axes share
/// the σ eigenvalue), warped by the base coordinate. Exercises the
/// eigenvalue form of the warping derivative ratio.
pub fn invariant_pair_file(p: u32, q: u32) -> SpecFile {
    SpecFile {
        name: variant_name(p, q, "invariant_pair"),
        p,
        q,
        ambient_dim: 5,
        structure: sigs("+++--"),
        parameters: params(&[("u", 1.0, 2.0), ("v", 0.3, 1.2)]),
        constants: BTreeMap::new(),
        immersion: strs(&["u", "u*cos(v)", "u*sin(v)", "0", "0"]),
        distributions: dists(&[("D1", &[&["1", "0"]]), ("D2", &[&["0", "1"]])]),
        warped: Some(WarpedDef {
            base: strs(&["u"]),
            fiber: strs(&["v"]),
            warping: "u".into(),
        }),
        grid: None,
    }
}

/// Constructed: both spans anti-invariant (a flat plane spanned by two
/// mixed-eigenplane directions, in polar coordinates).
pub fn anti_pair_file(p: u32, q: u32) -> SpecFile {
    SpecFile {
        name: variant_name(p, q, "anti_pair"),
        p,
        q,
        ambient_dim: 4,
        structure: sigs("+-+-"),
        parameters: params(&[("u", 1.0, 2.0), ("s", 0.3, 1.2)]),
        constants: BTreeMap::new(),
        immersion: strs(&[
            "u*cos(s)",
            "(sigma/sqrt(q))*u*cos(s)",
            "u*sin(s)",
            "(sigma/sqrt(q))*u*sin(s)",
        ]),
        distributions: dists(&[("D1", &[&["1", "0"]]), ("D2", &[&["0", "1"]])]),
        warped: Some(WarpedDef {
            base: strs(&["u"]),
            fiber: strs(&["s"]),
            warping: "u".into(),
        }),
        grid: None,
    }
}

/// Constructed counter-fixture: an invariant base declared over an
/// anti-invariant fiber with a non-constant warping. The configuration is
/// impossible as a proper warped product, so verification must flag it.
pub fn counter_invariant_base_file(p: u32, q: u32) -> SpecFile {
    SpecFile {
        name: variant_name(p, q, "counter_invariant_base"),
        p,
        q,
        ambient_dim: 3,
        structure: sigs("++-"),
        parameters: params(&[("alpha", 0.3, 1.2), ("f", 1.0, 2.0)]),
        constants: BTreeMap::new(),
        immersion: strs(&["f*cos(alpha)", "f*sin(alpha)", "(sigma/sqrt(q))*f"]),
        distributions: dists(&[("D1", &[&["1", "0"]]), ("D2", &[&["0", "1"]])]),
        warped: Some(WarpedDef {
            base: strs(&["alpha"]),
            fiber: strs(&["f"]),
            warping: "1+alpha/2".into(),
        }),
        grid: None,
    }
}

/// Constructed: an invariant circle base times an anti-invariant line
/// fiber with warping 1, i.e. the trivial product the forced-constancy
/// configuration does admit.
pub fn trivial_product_file(p: u32, q: u32) -> SpecFile {
    SpecFile {
        name: variant_name(p, q, "trivial_product"),
        p,
        q,
        ambient_dim: 5,
        structure: sigs("++-+-"),
        parameters: params(&[("alpha", 0.3, 1.2), ("s", 0.2, 1.0)]),
        constants: BTreeMap::new(),
        immersion: strs(&["cos(alpha)", "sin(alpha)", "s", "(sqrt(q)/sigma)*s", "0"]),
        distributions: dists(&[("D1", &[&["1", "0"]]), ("D2", &[&["0", "1"]])]),
        warped: Some(WarpedDef {
            base: strs(&["alpha"]),
            fiber: strs(&["s"]),
            warping: "1".into(),
        }),
        grid: None,
    }
}

/// Constructed: a closed curve whose tangent mixes the two eigenplanes
/// evenly, a proper slant submanifold with constant angle.
pub fn slant_curve_file(p: u32, q: u32) -> SpecFile {
    SpecFile {
        name: variant_name(p, q, "slant_curve"),
        p,
        q,
        ambient_dim: 4,
        structure: sigs("++--"),
        parameters: params(&[("a", 0.2, 1.3)]),
        constants: BTreeMap::new(),
        immersion: strs(&["cos(a)", "sin(a)", "cos(a)", "sin(a)"]),
        distributions: dists(&[("D1", &[&["1"]])]),
        warped: None,
        grid: None,
    }
}

/// Constructed: a generically curved patch with no constant angle, which
/// classification must refuse.
pub fn nonslant_patch_file(p: u32, q: u32) -> SpecFile {
    SpecFile {
        name: variant_name(p, q, "nonslant_patch"),
        p,
        q,
        ambient_dim: 4,
        structure: sigs("+-+-"),
        parameters: params(&[("u", 0.2, 1.0), ("v", 0.2, 1.0)]),
        constants: BTreeMap::new(),
        immersion: strs(&["u", "v", "u*v", "0"]),
        distributions: dists(&[("D1", &[&["1", "0"], &["0", "1"]])]),
        warped: None,
        grid: None,
    }
}

fn sigs(pattern: &str) -> Vec<crate::ambient::AxisSign> {
    pattern
        .chars()
        .map(|c| match c {
            '+' => crate::ambient::AxisSign::Sigma,
            '-' => crate::ambient::AxisSign::Sigbar,
            _ => panic!("sign pattern must be + or -"),
        })
        .collect()
}

/// Compile a fixture file, panicking on error: builtin fixtures are
/// validated by construction and covered by tests.
pub fn compile_fixture(file: &SpecFile) -> ImmersionSpec {
    super::compile(file).unwrap_or_else(|e| panic!("builtin fixture {}: {e}", file.name))
}

/// Default fixed angle for the bi-slant fixture: a proper bi-slant regime
/// away from the degenerate values 0 and π/4.
pub const BISLANT_DEFAULT_T: f64 = 0.7;

/// The builtin reference set: six immersions, each in a Golden (p=q=1) and
/// a metallic (p=2, q=1) variant.
pub fn builtin_files() -> Vec<SpecFile> {
    let mut out = Vec::new();
    for (p, q) in [(1u32, 1u32), (2, 1)] {
        out.push(r4_bislant_file(p, q, BISLANT_DEFAULT_T));
        out.push(r5_semiinvariant_file(p, q));
        out.push(r4_semislant_file(p, q));
        out.push(r8_semislant_file(p, q));
        out.push(r5_hemislant_file(p, q));
        out.push(r7_hemislant_file(p, q));
    }
    out
}

/// The builtin reference set, compiled.
pub fn builtin_examples() -> Vec<ImmersionSpec> {
    builtin_files().iter().map(compile_fixture).collect()
}

/// Constructed fixtures that complete the configuration coverage.
pub fn constructed_files() -> Vec<SpecFile> {
    vec![
        invariant_pair_file(1, 1),
        invariant_pair_file(2, 1),
        anti_pair_file(1, 2),
        counter_invariant_base_file(1, 1),
        trivial_product_file(1, 1),
        slant_curve_file(1, 1),
        nonslant_patch_file(1, 1),
    ]
}

/// Every named fixture file (builtin reference set plus constructed).
pub fn all_files() -> Vec<SpecFile> {
    let mut out = builtin_files();
    out.extend(constructed_files());
    out
}

/// Look a fixture up by name.
pub fn fixture_file(name: &str) -> Option<SpecFile> {
    all_files().into_iter().find(|f| f.name == name)
}
