//! Cross-module checks on the builtin fixtures at the decomposition level:
//! the pointwise facts that make each fixture what it is.

use metagee::geometry::point_data;
use metagee::linalg::{self, Mat};
use metagee::report::fixtures;
use metagee::submanifold::project_subspace;

#[test]
fn semiinvariant_radial_direction_is_anti_invariant() {
    // J of the radial direction has no tangential part, so its T column
    // vanishes; the angular directions are invariant, so their N columns do
    let spec = fixtures::compile_fixture(&fixtures::r5_semiinvariant_file(2, 1));
    for u in spec.grid_points() {
        let pd = point_data(&spec, &u).unwrap();
        let t_radial = pd.decomp.t_tan.col(0);
        assert!(linalg::norm_inf(&t_radial) <= 1e-10, "T column {t_radial:?}");
        for fiber in [1, 2] {
            let n_col = pd.decomp.n_tan.col(fiber);
            assert!(linalg::norm(&n_col) <= 1e-10);
        }
    }
}

#[test]
fn invariant_pair_t_matrix_is_sigma_times_identity() {
    let spec = fixtures::compile_fixture(&fixtures::invariant_pair_file(2, 1));
    let sigma = spec.params().sigma_float();
    for u in spec.grid_points() {
        let pd = point_data(&spec, &u).unwrap();
        let expected = Mat::identity(2).scale(sigma);
        assert!(pd.decomp.t_tan.sub(&expected).max_abs() <= 1e-10);
        assert!(pd.decomp.n_tan.max_abs() <= 1e-10);
    }
}

#[test]
fn bislant_j_images_respect_the_cross_condition() {
    // J D1 lands orthogonal to D2 (and vice versa) at every grid point
    let spec = fixtures::compile_fixture(&fixtures::r4_bislant_file(3, 2, 0.8));
    for u in spec.grid_points() {
        let pd = point_data(&spec, &u).unwrap();
        let d2 = Mat::from_cols(&[vec![0.0, 1.0]]);
        let jd1 = spec
            .ambient
            .apply_j(&pd.frame.e.col(0))
            .unwrap();
        let onto_d2 = project_subspace(&pd.frame, &d2, &jd1).unwrap();
        assert!(linalg::norm(&onto_d2) <= 1e-10 * linalg::norm(&jd1));
    }
}

#[test]
fn hemislant_anti_side_j_image_leaves_the_tangent_space() {
    let spec = fixtures::compile_fixture(&fixtures::r7_hemislant_file(1, 1));
    for u in spec.grid_points() {
        let pd = point_data(&spec, &u).unwrap();
        // fiber direction alpha is the anti-invariant side
        let j_fiber = spec.ambient.apply_j(&pd.frame.e.col(1)).unwrap();
        let tangential = pd.frame.project_tangent(&j_fiber);
        assert!(linalg::norm(&tangential) <= 1e-10 * linalg::norm(&j_fiber));
    }
}

#[test]
fn warped_fixture_metrics_match_their_closed_forms() {
    // r5 semi-invariant: G = diag(1 + sigma^2/q, f^2, f^2)
    let spec = fixtures::compile_fixture(&fixtures::r5_semiinvariant_file(1, 1));
    let mp = spec.params();
    let sigma2_q = mp.sigma_float().powi(2) / mp.q() as f64;
    for u in spec.grid_points() {
        let pd = point_data(&spec, &u).unwrap();
        let g = &pd.frame.g;
        assert!((g[(0, 0)] - (1.0 + sigma2_q)).abs() < 1e-12);
        assert!((g[(1, 1)] - u[0] * u[0]).abs() < 1e-12);
        assert!((g[(2, 2)] - u[0] * u[0]).abs() < 1e-12);
        assert!(g[(0, 1)].abs() < 1e-12 && g[(0, 2)].abs() < 1e-12 && g[(1, 2)].abs() < 1e-12);
    }
    // r7 hemi-slant: G = diag(sigma^2/q + 3, f^2 (sigma^2/q + 1))
    let spec = fixtures::compile_fixture(&fixtures::r7_hemislant_file(2, 1));
    let mp = spec.params();
    let sigma2_q = mp.sigma_float().powi(2) / mp.q() as f64;
    for u in spec.grid_points() {
        let pd = point_data(&spec, &u).unwrap();
        let g = &pd.frame.g;
        assert!((g[(0, 0)] - (sigma2_q + 3.0)).abs() < 1e-12);
        assert!((g[(1, 1)] - u[0] * u[0] * (sigma2_q + 1.0)).abs() < 1e-12);
        assert!(g[(0, 1)].abs() < 1e-12);
    }
}
