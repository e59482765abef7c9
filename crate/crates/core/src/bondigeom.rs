//! Geometry of the `r = const` spheres of a Bondi–Sachs null cone.
//!
//! The leading shear enters the induced metric through the traceless tensor
//! `S = 2X(ê_θ⊗ê_θ − ê_φ⊗ê_φ) − 2Y(ê_θ⊗ê_φ + ê_φ⊗ê_θ)`. The metric is completed as
//! `σ = r² exp(S/r)`, which agrees with the Bondi block through `r⁰` and keeps
//! `det σ_ab = r⁴ sin²θ` exact at every order. Since `S² = λ² P` with `λ² = 4(X² + Y²)`,
//! `exp(±S/r) = P cosh(λ/r) ± (S/λ) sinh(λ/r)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rseries::{RadialSeries, TensorSeries, VectorSeries};
use crate::s2spectral::tensor::{self, TensorField};

use crate::{Field, Grid, Series, Tangent, TenSeries, VecSeries};

/// Default truncation order of physical series.
pub const DEFAULT_TRUNC: i32 = 10;

#[derive(Debug, Clone)]
pub struct BondiData {
    pub m: Field,
    pub x: Field,
    pub y: Field,
    /// Leading covariant part `W̃_a` of the shift one-form.
    pub wt: Tangent,
    pub retarded_time: f64,
}

impl BondiData {
    pub fn new(m: Field, x: Field, y: Field, wt: Tangent, retarded_time: f64) -> Result<Self> {
        let g = m.grid();
        if !(x.same_grid(&m) && y.same_grid(&m) && Arc::ptr_eq(wt.grid(), g)) {
            return Err(Error::IncompatibleGrids);
        }
        for (name, f) in [("m", &m), ("X", &x), ("Y", &y)] {
            if !f.is_finite() {
                return Err(Error::Invalid(format!("field {name} is not finite")));
            }
        }
        if !wt.max_abs().is_finite() {
            return Err(Error::Invalid("field W is not finite".into()));
        }
        Ok(Self { m, x, y, wt, retarded_time })
    }

    /// Mass aspect only; no shear, no shift.
    pub fn from_mass_aspect(m: Field) -> Self {
        let g = m.grid().clone();
        Self { x: Field::zeros(&g), y: Field::zeros(&g), wt: Tangent::zeros(&g), m, retarded_time: 0.0 }
    }

    pub fn schwarzschild(grid: &Arc<Grid>, mass: f64) -> Self {
        Self::from_mass_aspect(Field::constant(grid, mass))
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.m.grid()
    }

    /// `max(|m|, |X|, |Y|, |W̃|)`.
    pub fn scale(&self) -> f64 {
        self.m.max_abs().max(self.x.max_abs()).max(self.y.max_abs()).max(self.wt.max_abs())
    }

    pub fn shear_tensor(&self) -> TensorField<f64> {
        let two_x = self.x.scale(2.0);
        tensor::from_frame_components(&two_x, &self.y.scale(-2.0), &two_x.scale(-1.0))
    }

    /// `λ² = 4(X² + Y²)`.
    pub fn shear_norm_sq(&self) -> Field {
        (&(&self.x * &self.x) + &(&self.y * &self.y)).scale(4.0)
    }

    /// `δ̃^a W̃_a`.
    pub fn shift_divergence(&self) -> Field {
        self.wt.divergence()
    }
}

/// Shear functions `(X, Y)` generated by electric and magnetic potentials:
/// `S = 2(∇̃∇̃ψ_E)^TF + 2 n×(∇̃∇̃ψ_B)^TF`, read off in the `(ê_θ, ê_φ)` frame.
///
/// Any smooth traceless shear arises this way; `X` and `Y` are then smooth spin-2
/// components, which plain scalar fields generally are not.
pub fn shear_from_potentials(psi_e: &Field, psi_b: &Field) -> (Field, Field) {
    let he = tensor::trace_free(&tensor::hessian(psi_e));
    let hb = tensor::trace_free(&tensor::hessian(psi_b));
    let [e_tt, e_tp, _] = tensor::frame_components(&he);
    let [b_tt, b_tp, _] = tensor::frame_components(&hb);
    // rotating a traceless tensor by a quarter turn maps (tt, tp) to (−tp, tt)
    let x = &e_tt - &b_tp;
    let y = -&(&e_tp + &b_tt);
    (x, y)
}

/// Shift `W̃ = ∇̃ψ_E + n × ∇̃ψ_B`.
pub fn shift_from_potentials(psi_e: &Field, psi_b: &Field) -> Tangent {
    psi_e.gradient().add(&psi_b.gradient().rotate())
}

/// `exp(sign · S / r)` through `r^{-trunc}`.
pub fn exp_shear(data: &BondiData, sign: f64, trunc: i32) -> TenSeries {
    let g = data.grid();
    let p = tensor::projector(g);
    let s = tensor::tensor_scale(&data.shear_tensor(), sign);
    let lam2 = data.shear_norm_sq();
    let mut out = TensorSeries::zero(g, trunc);
    let mut lam_pow = Field::constant(g, 1.0);
    let mut fact = 1.0;
    for k in 0..=trunc {
        if k > 0 {
            fact *= k as f64;
        }
        let base = if k % 2 == 0 { &p } else { &s };
        let coeff: TensorField<f64> = std::array::from_fn(|i| std::array::from_fn(|j| (&base[i][j] * &lam_pow).scale(1.0 / fact)));
        out = out.add(&TensorSeries::monomial(&coeff, -k, trunc));
        if k % 2 == 1 {
            lam_pow = &lam_pow * &lam2;
        }
    }
    out
}

/// Pointwise `exp(sign · S / r)` at a finite radius.
pub fn exp_shear_at(data: &BondiData, sign: f64, r: f64) -> TensorField<f64> {
    let g = data.grid();
    let p = tensor::projector(g);
    let s = data.shear_tensor();
    let lam: Vec<f64> = data.shear_norm_sq().values().iter().map(|v| v.sqrt()).collect();
    let ch = Field::raw(g, lam.iter().map(|l| (l / r).cosh()).collect());
    // sinh(λ/r)/λ, smooth through λ = 0
    let sh = Field::raw(g, lam.iter().map(|l| if *l < 1e-8 { 1.0 / r } else { (l / r).sinh() / l }).collect());
    std::array::from_fn(|i| std::array::from_fn(|j| &(&p[i][j] * &ch) + &(&s[i][j] * &sh).scale(sign)))
}

/// Induced metric `σ = r² E` and its tangential inverse `r⁻² E⁻¹` with `E = exp(S/r)`.
#[derive(Debug, Clone)]
pub struct InducedMetric {
    pub sigma: TenSeries,
    pub einv: TenSeries,
}

pub fn induced_metric(data: &BondiData, trunc: i32) -> InducedMetric {
    InducedMetric { sigma: exp_shear(data, 1.0, trunc + 2).shift(2), einv: exp_shear(data, -1.0, trunc) }
}

impl InducedMetric {
    pub fn grid(&self) -> &Arc<Grid> {
        self.einv.grid()
    }

    /// Coordinate components `(σ_θθ, σ_θφ, σ_φφ)` as series.
    pub fn coordinate_components(&self) -> [Series; 3] {
        let g = self.grid().clone();
        let trunc = self.sigma.trunc_order();
        let mut out = std::array::from_fn(|_| RadialSeries::zero(&g, trunc));
        let powers: std::collections::BTreeSet<i32> = self.sigma.comps.iter().flatten().flat_map(|c| c.powers()).collect();
        let sin = Field::raw(&g, (0..g.len()).map(|q| g.sin_theta_at(q)).collect());
        for k in powers {
            let [tt, tp, pp] = tensor::frame_components(&self.sigma.coeff(k));
            out[0].set_coeff(k, tt);
            out[1].set_coeff(k, &tp * &sin);
            out[2].set_coeff(k, &(&pp * &sin) * &sin);
        }
        out
    }

    /// Largest deviation of `det σ_ab` from `r⁴ sin²θ` over all trusted coefficients.
    pub fn det_residual(&self) -> f64 {
        let [a, b, c] = self.coordinate_components();
        let det = a.mul(&c).sub(&b.mul(&b));
        let g = self.grid();
        let sin2 = Field::raw(g, (0..g.len()).map(|q| g.sin_theta_at(q).powi(2)).collect());
        det.sub(&RadialSeries::monomial(sin2, 4, det.trunc_order())).max_abs_coeff()
    }

    /// `σ^{ab} w_b` for a covector given in Cartesian tangent form: `r⁻² E⁻¹ w`.
    pub fn raise(&self, w: &VecSeries) -> VecSeries {
        self.einv.apply(w).shift(-2)
    }

    /// `div_σ` of a covector.
    pub fn div_covector(&self, w: &VecSeries) -> Series {
        self.raise(w).divergence()
    }

    /// `Δ_σ g = r⁻² d̃iv(E⁻¹ ∇̃g)`.
    pub fn laplacian(&self, g: &Series) -> Series {
        self.div_covector(&VectorSeries::gradient(g))
    }

    /// `σ^{ab} u_a w_b`.
    pub fn inner_covectors(&self, u: &VecSeries, w: &VecSeries) -> Series {
        u.dot(&self.raise(w))
    }
}

/// Physical-side expansions on `Σ_r`.
#[derive(Debug, Clone)]
pub struct SurfaceGeometry {
    pub metric: InducedMetric,
    pub h_norm: Series,
    /// Connection one-form in mean curvature gauge, Cartesian covector form.
    pub connection: VecSeries,
    pub div_v: Series,
    /// Area `4π r²` (exact with the determinant-preserving metric).
    pub area: Series,
}

struct Parts {
    metric: InducedMetric,
    q: Series,
    one_plus_q: Series,
    u: Series,
}

fn parts(data: &BondiData, trunc: i32) -> Parts {
    let g = data.grid();
    let metric = induced_metric(data, trunc + 2);
    let exact = trunc + 8;
    let wt = VectorSeries::from_tangent(&data.wt, 0, exact);
    let shift_div = metric.einv.apply(&wt).divergence().shift(-1);
    let q = RadialSeries::monomial(data.m.scale(-2.0), -1, exact).add(&shift_div);
    let one_plus_q = RadialSeries::constant(Field::constant(g, 1.0), exact).add(&q);
    let u = RadialSeries::from_terms(g, [(0, Field::constant(g, 1.0)), (-2, data.shear_norm_sq().scale(-0.125))], exact).unwrap();
    Parts { metric, q, one_plus_q, u }
}

fn h_norm_from(p: &Parts) -> Result<Series> {
    let ratio = p.u.recip()?.mul(&p.one_plus_q);
    Ok(ratio.sqrt()?.scale(2.0).shift(-1))
}

/// `|H| = 2r⁻¹ √(U⁻¹(1 + q))` with `q = −2m/r + r⁻¹ d̃iv(E⁻¹W̃)`.
pub fn mean_curvature_norm(data: &BondiData, trunc: i32) -> Result<Series> {
    h_norm_from(&parts(data, trunc)).map(|h| h.truncate(trunc))
}

fn connection_from(data: &BondiData, p: &Parts, trunc: i32) -> Result<VecSeries> {
    let exact = trunc + 8;
    let grad_q = VectorSeries::gradient(&p.q);
    let first = grad_q.scale_by(&p.one_plus_q.recip()?).scale(0.5);
    let wt = VectorSeries::from_tangent(&data.wt, 0, exact);
    let s = TensorSeries::monomial(&data.shear_tensor(), 0, exact);
    let bracket = wt.shift(-1).scale(2.0).sub(&s.apply(&wt).shift(-2));
    let second = bracket.scale_by(&p.u.recip()?).scale(0.5);
    Ok(first.add(&second).truncate(trunc + 1))
}

/// `div_{Σ_r} V` of the connection one-form in mean curvature gauge.
pub fn connection_div(data: &BondiData, trunc: i32) -> Result<Series> {
    let p = parts(data, trunc);
    let v = connection_from(data, &p, trunc)?;
    Ok(p.metric.div_covector(&v).truncate(trunc))
}

pub fn surface_geometry(data: &BondiData, trunc: i32) -> Result<SurfaceGeometry> {
    let p = parts(data, trunc);
    let h_norm = h_norm_from(&p)?.truncate(trunc);
    let connection = connection_from(data, &p, trunc)?;
    let div_v = p.metric.div_covector(&connection).truncate(trunc);
    let g = data.grid();
    let area = RadialSeries::monomial(Field::constant(g, 4.0 * std::f64::consts::PI), 2, trunc);
    Ok(SurfaceGeometry { metric: p.metric, h_norm, connection, div_v, area })
}

/// `h^{(-2)} = −2m + δ̃W̃`.
pub fn h2_closed_form(data: &BondiData) -> Field {
    &data.shift_divergence() - &data.m.scale(2.0)
}

/// `v^{(-3)} = ½(Δ̃ + 2)(δ̃W̃ − 2m) + 2m`.
pub fn v3_closed_form(data: &BondiData) -> Field {
    let a = h2_closed_form(data);
    let lhs = (&a.laplacian() + &a.scale(2.0)).scale(0.5);
    &lhs + &data.m.scale(2.0)
}

/// Pointwise geometry at a finite radius, evaluated from closed forms (no series).
#[derive(Debug, Clone)]
pub struct FiniteGeometry {
    pub r: f64,
    pub h_norm: Field,
    pub connection: Tangent,
    pub div_v: Field,
    /// `E⁻¹` at this radius.
    pub einv: TensorField<f64>,
}

pub fn geometry_at(data: &BondiData, r: f64) -> Result<FiniteGeometry> {
    let g = data.grid();
    let einv = exp_shear_at(data, -1.0, r);
    let q = &data.m.scale(-2.0 / r) + &tensor::tensor_apply(&einv, &data.wt).divergence().scale(1.0 / r);
    let one_plus_q = q.map(|v| 1.0 + v);
    let u = data.shear_norm_sq().map(|l2| 1.0 - l2 / (8.0 * r * r));
    let ratio = one_plus_q.zip_map(&u, |a, b| a / b);
    if let Some(node) = ratio.values().iter().position(|v| !(*v > 0.0)) {
        return Err(Error::DegenerateLeading { op: "mean_curvature_norm", node, value: ratio.values()[node] });
    }
    let h_norm = ratio.map(|v| 2.0 * v.sqrt() / r);
    let inv_opq = one_plus_q.map(|v| 0.5 / v);
    let first = q.gradient().scale_by(&inv_opq);
    let s = data.shear_tensor();
    let sw = tensor::tensor_apply(&s, &data.wt);
    let bracket = data.wt.scale(2.0 / r).sub(&sw.scale(1.0 / (r * r)));
    let second = bracket.scale_by(&u.map(|v| 0.5 / v));
    let connection = first.add(&second);
    let div_v = tensor::tensor_apply(&einv, &connection).divergence().scale(1.0 / (r * r));
    let _ = g;
    Ok(FiniteGeometry { r, h_norm, connection, div_v, einv })
}

/// Coordinate components `(σ_θθ, σ_θφ, σ_φφ)` at a finite radius.
pub fn metric_components_at(data: &BondiData, r: f64) -> [Field; 3] {
    let e = exp_shear_at(data, 1.0, r);
    let g = data.grid();
    let [tt, tp, pp] = tensor::frame_components(&e);
    let sin = Field::raw(g, (0..g.len()).map(|q| g.sin_theta_at(q)).collect());
    [tt.scale(r * r), (&tp * &sin).scale(r * r), (&(&pp * &sin) * &sin).scale(r * r)]
}

