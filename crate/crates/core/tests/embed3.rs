use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use qle_core::bondigeom::*;
use qle_core::embed3::*;
use qle_core::s2spectral::tensor::{self, TensorField};
use qle_core::s2spectral::{eigen_projections, eigenfunctions, harmonic};
use qle_core::{Field, Grid};

fn grid() -> Arc<Grid> {
    Grid::new(24).unwrap()
}

fn sample_data(g: &Arc<Grid>, seed: [f64; 6]) -> BondiData {
    let h = |l, m| harmonic(g, l, m);
    let m = &Field::constant(g, 1.0) + &(&h(1, 0).scale(seed[0]) + &h(2, 1).scale(seed[1]));
    let (x, y) = shear_from_potentials(&h(2, 0).scale(seed[2]), &h(3, -2).scale(seed[3]));
    let wt = shift_from_potentials(&h(2, 2).scale(seed[4]), &h(2, -1).scale(seed[5]));
    BondiData::new(m, x, y, wt, 0.0).unwrap()
}

fn normal(g: &Arc<Grid>) -> [Field; 3] {
    std::array::from_fn(|c| Field::from_cartesian(g, move |x, y, z| [x, y, z][c]))
}

fn tensor_diff(a: &TensorField<f64>, b: &TensorField<f64>) -> f64 {
    let d: TensorField<f64> = std::array::from_fn(|i| std::array::from_fn(|j| &a[i][j] - &b[i][j]));
    tensor::tensor_max_abs(&d)
}

#[test]
fn conformal_rhs_gives_radial_displacement() {
    let g = grid();
    let cos = Field::from_fn(&g, |t, _| t.cos());
    let p = tensor::projector(&g);
    let h: TensorField<f64> = std::array::from_fn(|i| std::array::from_fn(|j| (&p[i][j] * &cos).scale(2.0)));
    let (y, res) = solve_linearized(&h).unwrap();
    assert!(res < 1e-12);
    let n = normal(&g);
    for c in 0..3 {
        assert!((&y[c] - &(&cos * &n[c])).max_abs() < 1e-12);
    }
}

#[test]
fn zero_rhs_gives_zero() {
    let g = grid();
    let (y, res) = solve_linearized(&tensor::tensor_zeros(&g)).unwrap();
    assert_eq!(res, 0.0);
    assert!(y.iter().all(|f| f.max_abs() == 0.0));
}

#[test]
fn standard_embedding_is_leading_term() {
    let g = grid();
    let met = induced_metric(&sample_data(&g, [0.1, 0.2, 0.3, 0.1, 0.2, 0.1]), 5);
    let s = embed(&met, &[], 3).unwrap();
    let eig = eigenfunctions(&g);
    assert_eq!(s.comps[0].coeff_or_zero(1).max_abs(), 0.0);
    for i in 0..3 {
        assert_eq!(s.comps[i + 1].top_power(), Some(1));
        assert!((&s.comps[i + 1].coeff_or_zero(1) - &eig[i]).max_abs() == 0.0);
    }
}

#[test]
fn order_steps_must_be_consecutive() {
    let g = grid();
    let met = induced_metric(&BondiData::schwarzschild(&g, 1.0), 4);
    let s = EmbeddingSeries::standard(&g, &[], 4);
    assert!(matches!(embed_order_step(&s, &met, 2), Err(qle_core::error::Error::InconsistentEmbedding { .. })));
}

#[test]
fn round_metric_has_round_mean_curvature() {
    let g = grid();
    let met = induced_metric(&BondiData::schwarzschild(&g, 2.0), 6);
    let s = embed(&met, &[], 4).unwrap();
    let h = h0_norm(&s, &met).unwrap();
    let dev = (&h.coeff_or_zero(-1) - &Field::constant(&g, 2.0)).max_abs();
    assert!(dev < 1e-11, "{dev:e}");
    for k in h.powers().into_iter().filter(|k| *k != -1) {
        assert!(h.coeff_or_zero(k).max_abs() < 1e-11, "power {k}");
    }
}

#[test]
fn total_mean_curvature_expansion() {
    let g = grid();
    let met = induced_metric(&sample_data(&g, [0.3, 0.2, 0.4, 0.3, 0.2, 0.1]), 6);
    let s = embed(&met, &[harmonic(&g, 2, 1).scale(0.3)], 4).unwrap();
    let h = h0_norm(&s, &met).unwrap();
    // dΣ_r = r² dS², Area(Σ_r) = 4πr²
    assert!((h.coeff_or_zero(-1).integrate() - 8.0 * PI).abs() < 1e-11);
    assert!(h.coeff_or_zero(-2).integrate().abs() < 1e-10);
}

#[test]
fn mean_curvature_second_order_ignores_time_function() {
    let g = grid();
    let met = induced_metric(&sample_data(&g, [0.1, 0.3, 0.2, 0.4, 0.1, 0.2]), 6);
    let base = h0_norm(&embed(&met, &[], 3).unwrap(), &met).unwrap();
    let taus = [harmonic(&g, 2, -1).scale(0.4), harmonic(&g, 3, 2).scale(0.2), harmonic(&g, 4, 0).scale(0.1)];
    let moved = h0_norm(&embed(&met, &taus, 3).unwrap(), &met).unwrap();
    assert!((&base.coeff_or_zero(-2) - &moved.coeff_or_zero(-2)).max_abs() < 1e-11);
    assert!((&base.coeff_or_zero(-3) - &moved.coeff_or_zero(-3)).max_abs() > 1e-4);
}

#[test]
fn reference_connection_leading_term_quadrupole() {
    let g = grid();
    let met = induced_metric(&BondiData::schwarzschild(&g, 1.0), 6);
    let y = harmonic(&g, 2, 1).scale(0.7);
    let s = embed(&met, std::slice::from_ref(&y), 4).unwrap();
    let dv = ref_connection_div(&s, &met).unwrap();
    assert!(dv.top_power().unwrap() <= -3);
    assert!((&dv.coeff_or_zero(-3) - &y.scale(12.0)).max_abs() < 1e-9);
}

#[test]
fn reference_connection_annihilates_dipole() {
    let g = grid();
    let met = induced_metric(&sample_data(&g, [0.2, 0.1, 0.3, 0.2, 0.1, 0.3]), 6);
    let cos = Field::from_fn(&g, |t, _| t.cos());
    let s = embed(&met, &[cos], 4).unwrap();
    let dv = ref_connection_div(&s, &met).unwrap();
    assert!(dv.coeff_or_zero(-3).max_abs() < 1e-10);
}

#[test]
fn finite_radius_oracle() {
    let g = grid();
    let met = induced_metric(&sample_data(&g, [0.2, 0.3, 0.2, 0.1, 0.3, 0.2]), 8);
    let taus = [harmonic(&g, 2, 0).scale(0.3), harmonic(&g, 3, 1).scale(0.2)];
    let s = embed(&met, &taus, 6).unwrap();
    let rc = reference_connection(&s, &met).unwrap();
    for r in [1e2, 1e3] {
        let direct = direct_geometry(&s.eval(r)).unwrap();
        let h = rc.curvature.h0_norm.eval(r);
        let dv = rc.div_v0.eval(r);
        assert!((&direct.h0_norm - &h).max_abs() / h.max_abs() < 1e-5, "r = {r}");
        assert!((&direct.div_v0 - &dv).max_abs() / dv.max_abs() < 1e-5, "r = {r}");
        assert!((&direct.area_density - &Field::constant(&g, r * r)).max_abs() / (r * r) < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn linearized_solve_recovers_range(a in prop::array::uniform3(-1.0f64..1.0), b in prop::array::uniform3(-1.0f64..1.0), c in -1.0f64..1.0) {
        let g = grid();
        let n = normal(&g);
        let y: [Field; 3] = std::array::from_fn(|k| {
            &(&harmonic(&g, 2 + k, k as i64 - 1).scale(a[k]) + &harmonic(&g, 3, 2 - k as i64).scale(b[k])) + &n[k].scale(0.1)
        });
        let p = tensor::projector(&g);
        let conf = harmonic(&g, 4, -3).scale(c);
        let lin = linearized_metric(&y);
        let h: TensorField<f64> = std::array::from_fn(|i| std::array::from_fn(|j| &lin[i][j] + &(&p[i][j] * &conf)));
        let (sol, res) = solve_linearized(&h).unwrap();
        prop_assert!(res < 1e-8);
        prop_assert!(tensor_diff(&linearized_metric(&sol), &h) < 1e-9 * tensor::tensor_max_abs(&h).max(1.0));
    }

    #[test]
    fn embedding_reproduces_metric(seed in prop::array::uniform6(-0.4f64..0.4), t in prop::array::uniform2(-0.5f64..0.5)) {
        let g = grid();
        let met = induced_metric(&sample_data(&g, seed), 6);
        let taus = [harmonic(&g, 2, 2).scale(t[0]), harmonic(&g, 3, -1).scale(t[1])];
        let s = embed(&met, &taus, 4).unwrap();
        prop_assert!(s.residuals.iter().all(|r| *r < 1e-8));
        prop_assert!(metric_residual(&s, &met) < 1e-8);
    }

    #[test]
    fn leading_reference_connection_is_stability_image(seed in prop::array::uniform6(-0.4f64..0.4), t in prop::array::uniform3(-0.5f64..0.5)) {
        let g = grid();
        let met = induced_metric(&sample_data(&g, seed), 6);
        let tau = &(&harmonic(&g, 1, 1).scale(t[0]) + &harmonic(&g, 2, -2).scale(t[1])) + &harmonic(&g, 3, 0).scale(t[2]);
        let s = embed(&met, &[tau], 4).unwrap();
        let lead = ref_connection_div(&s, &met).unwrap().coeff_or_zero(-3);
        let spec = lead.analyze();
        prop_assert!(spec.degree_norm(0) < 1e-10 && spec.degree_norm(1) < 1e-10);
        for p in eigen_projections(&lead) {
            prop_assert!(p.abs() < 1e-10);
        }
        let want = &harmonic(&g, 2, -2).scale(12.0 * t[1]) + &harmonic(&g, 3, 0).scale(60.0 * t[2]);
        prop_assert!((&lead - &want).max_abs() < 1e-9);
    }
}
