//! Perturbative isometric embedding of `(S², σ_r)` into Minkowski space as a graph over
//! the round sphere, and the reference geometry (`|H₀|`, `div V₀`) of its image.
//!
//! Components are ordered `(X̂_0, X̂_1, X̂_2, X̂_3)` with `X̂_0 = τ̂` and spatial axes
//! following the eigenfunctions `X̃_i` (see [`EIGEN_AXIS`]).

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::Matrix3;

use crate::bondigeom::InducedMetric;
use crate::error::{Error, Result};
use crate::lorentz::Mat4;
use crate::rseries::{tensor_divergence, RadialSeries, VectorSeries};
use crate::s2spectral::tensor::{self, TensorField};
use crate::s2spectral::{eigenfunctions, solve_stability_with_tol, EIGEN_AXIS};
use crate::{Field, Grid, Series, Tangent, VecSeries};

/// Relative residual accepted for each linearized embedding solve.
pub const EMBED_TOL: f64 = 1e-8;

/// Harmonic coefficients of a solved displacement below this fraction of its largest one are
/// zeroed, which keeps roundoff from being amplified by later orders.
pub const CHOP_REL: f64 = 1e-13;

const ETA: [f64; 4] = [-1.0, 1.0, 1.0, 1.0];

#[derive(Debug, Clone)]
pub struct EmbeddingSeries {
    pub comps: [Series; 4],
    /// `τ̂^{(0)}, τ̂^{(-1)}, …` as supplied.
    pub tau_coeffs: Vec<Field>,
    /// Spatial coefficients are solved for powers `r^1 … r^{-solved_order}`.
    pub solved_order: i32,
    /// Relative residual of the induced-metric equation at each solved order.
    pub residuals: Vec<f64>,
}

impl EmbeddingSeries {
    /// `X̂ = r (0, X̃)` with the given time coefficients, nothing solved yet.
    pub fn standard(grid: &Arc<Grid>, taus: &[Field], trunc: i32) -> Self {
        let eig = eigenfunctions(grid);
        let mut time = RadialSeries::zero(grid, trunc);
        for (k, t) in taus.iter().enumerate() {
            if (k as i32) <= trunc {
                time.set_coeff(-(k as i32), t.clone());
            }
        }
        let [e1, e2, e3] = eig;
        let comps = [
            time,
            RadialSeries::monomial(e1, 1, trunc),
            RadialSeries::monomial(e2, 1, trunc),
            RadialSeries::monomial(e3, 1, trunc),
        ];
        Self { comps, tau_coeffs: taus.to_vec(), solved_order: -2, residuals: Vec::new() }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.comps[0].grid()
    }

    pub fn time(&self) -> &Series {
        &self.comps[0]
    }

    /// Samples `X̂_μ(r)`.
    pub fn eval(&self, r: f64) -> [Field; 4] {
        std::array::from_fn(|mu| self.comps[mu].eval(r))
    }

    /// Image `L X̂` of the embedding under a Lorentz matrix acting on components.
    pub fn transformed(&self, l: &Mat4) -> Self {
        let mut out = self.clone();
        out.comps = std::array::from_fn(|mu| {
            let mut acc = self.comps[0].scale(l[(mu, 0)]);
            for nu in 1..4 {
                acc = acc.add(&self.comps[nu].scale(l[(mu, nu)]));
            }
            acc
        });
        out
    }

    pub fn tau_hat(&self, k: usize) -> Field {
        self.tau_coeffs.get(k).cloned().unwrap_or_else(|| Field::zeros(self.grid()))
    }
}

/// Linearized embedding operator `L(Y) = P D + (P D)ᵀ`, `D_ib = ∂̃_b Y_i`, i.e. the change of
/// `Σ_i dX̃_i dX̃_i` under `X̃ → X̃ + εY`, to first order and doubled.
pub fn linearized_metric(y: &[Field; 3]) -> TensorField<f64> {
    let g = y[0].grid();
    let d = tensor::jacobian(y);
    let p = tensor::projector(g);
    let pd: TensorField<f64> = std::array::from_fn(|a| {
        std::array::from_fn(|b| &(&(&p[a][0] * &d[0][b]) + &(&p[a][1] * &d[1][b])) + &(&p[a][2] * &d[2][b]))
    });
    std::array::from_fn(|a| std::array::from_fn(|b| &pd[a][b] + &pd[b][a]))
}

/// Solves `L(Y) = h` for `Y = ∇̃α + n×∇̃β + φ n` with `α, β` free of degrees ≤ 1, which
/// removes the rigid motions. Returns `Y` in Cartesian components and the relative residual.
pub fn solve_linearized(h: &TensorField<f64>) -> Result<([Field; 3], f64)> {
    let g = h[0][0].grid().clone();
    let h = tensor::symmetrize(h);
    let tf = tensor::trace_free(&h);
    let div = tensor_divergence(&tf);
    let alpha = invert_stability(&div.divergence())?;
    let beta = invert_stability(&-&div.curl())?;
    let phi = (&tensor::trace(&h) - &alpha.laplacian().scale(2.0)).scale(0.25);
    let tangential = alpha.gradient().add(&beta.gradient().rotate());
    let y: [Field; 3] = std::array::from_fn(|c| {
        let n = Field::from_cartesian(&g, move |x, y, z| [x, y, z][c]);
        &tangential.component(c) + &(&phi * &n)
    });
    let check = linearized_metric(&y);
    let diff: TensorField<f64> = std::array::from_fn(|i| std::array::from_fn(|j| &check[i][j] - &h[i][j]));
    let scale = tensor::tensor_max_abs(&h);
    let res = tensor::tensor_max_abs(&diff);
    let rel = if scale > 0.0 { res / scale } else { res };
    Ok((y, rel))
}

// Sources built from trace-free tensors are orthogonal to degrees ≤ 1 identically.
fn invert_stability(f: &Field) -> Result<Field> {
    solve_stability_with_tol(f, f64::INFINITY)
}

fn chop_spectrum(f: &Field, rel: f64) -> Field {
    let spec = f.analyze();
    let top = spec.coeffs().iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let coeffs = spec.coeffs().iter().map(|c| if c.abs() < rel * top { 0.0 } else { *c }).collect();
    let spec = crate::Spectrum::from_coeffs(f.grid().l_max(), coeffs).expect("same length");
    Field::synthesize(f.grid(), &spec).expect("grid band limit")
}

fn coeff_gradients(s: &Series) -> BTreeMap<i32, Tangent> {
    s.terms().map(|(k, f)| (k, f.gradient())).collect()
}

/// Coefficient of `r^power` in `Σ_μ η_μμ ∇̃X̂_μ ⊗ ∇̃X̂_μ`.
fn induced_coeff(grads: &[BTreeMap<i32, Tangent>; 4], grid: &Arc<Grid>, power: i32) -> TensorField<f64> {
    let mut out = tensor::tensor_zeros(grid);
    for (mu, gm) in grads.iter().enumerate() {
        for (a, ga) in gm {
            if let Some(gb) = gm.get(&(power - a)) {
                let o = tensor::outer(ga, gb);
                for i in 0..3 {
                    for j in 0..3 {
                        out[i][j].axpy(ETA[mu], &o[i][j]);
                    }
                }
            }
        }
    }
    out
}

/// One order of the embedding: solves the spatial coefficient of `r^{-k}` from the metric
/// coefficient of `r^{1-k}`.
pub fn embed_order_step(series: &EmbeddingSeries, metric: &InducedMetric, k: i32) -> Result<EmbeddingSeries> {
    if k != series.solved_order + 1 && !(k == 0 && series.solved_order < 0) {
        return Err(Error::InconsistentEmbedding { reason: format!("order {k} requested after order {}", series.solved_order) });
    }
    let g = series.grid().clone();
    let power = 1 - k;
    let sigma = metric.sigma.comps.iter().flatten().map(|c| c.trusted_coeff(power)).collect::<Result<Vec<_>>>()?;
    let grads: [BTreeMap<i32, Tangent>; 4] = std::array::from_fn(|mu| coeff_gradients(&series.comps[mu]));
    let known = induced_coeff(&grads, &g, power);
    let h: TensorField<f64> = std::array::from_fn(|i| std::array::from_fn(|j| &sigma[3 * i + j] - &known[i][j]));
    let (y, rel) = solve_linearized(&h)?;
    if rel > EMBED_TOL && tensor::tensor_max_abs(&h) > 1e-13 {
        return Err(Error::NotEmbeddable { residual: rel });
    }
    let mut out = series.clone();
    for i in 0..3 {
        out.comps[i + 1].set_coeff(-k, chop_spectrum(&y[EIGEN_AXIS[i]], CHOP_REL));
    }
    out.solved_order = k;
    out.residuals.push(rel);
    Ok(out)
}

/// Embedding solved through the spatial coefficient of `r^{-order}`.
pub fn embed(metric: &InducedMetric, taus: &[Field], order: i32) -> Result<EmbeddingSeries> {
    let g = metric.grid().clone();
    let mut s = EmbeddingSeries::standard(&g, taus, order);
    for k in 0..=order {
        s = embed_order_step(&s, metric, k)?;
    }
    Ok(s)
}

/// Largest relative deviation of the induced metric from `σ` over the solved powers.
pub fn metric_residual(series: &EmbeddingSeries, metric: &InducedMetric) -> f64 {
    let g = series.grid().clone();
    let grads: [BTreeMap<i32, Tangent>; 4] = std::array::from_fn(|mu| coeff_gradients(&series.comps[mu]));
    let mut worst: f64 = 0.0;
    for power in (1 - series.solved_order)..=2 {
        let got = induced_coeff(&grads, &g, power);
        let want = metric.sigma.coeff(power);
        let scale = tensor::tensor_max_abs(&want).max(1.0);
        let diff: TensorField<f64> = std::array::from_fn(|i| std::array::from_fn(|j| &got[i][j] - &want[i][j]));
        worst = worst.max(tensor::tensor_max_abs(&diff) / scale);
    }
    worst
}

/// Mean curvature vector `H₀ = Δ_σ X̂` and its norm.
#[derive(Debug, Clone)]
pub struct ReferenceCurvature {
    pub h0: [Series; 4],
    pub h0_norm: Series,
}

pub fn mean_curvature(series: &EmbeddingSeries, metric: &InducedMetric) -> Result<ReferenceCurvature> {
    let h0: [Series; 4] = std::array::from_fn(|mu| metric.laplacian(&series.comps[mu]));
    let mut sq = h0[0].mul(&h0[0]).scale(-1.0);
    for h in &h0[1..] {
        sq = sq.add(&h.mul(h));
    }
    let lead = sq.coeff_or_zero(-2);
    let dev = lead.values().iter().map(|v| (v - 4.0).abs()).fold(0.0, f64::max);
    if dev > 1e-8 {
        return Err(Error::InconsistentEmbedding { reason: format!("|H₀|² leading coefficient deviates from 4 by {dev:e}") });
    }
    Ok(ReferenceCurvature { h0_norm: sq.sqrt()?, h0 })
}

/// `|H₀|` series.
pub fn h0_norm(series: &EmbeddingSeries, metric: &InducedMetric) -> Result<Series> {
    Ok(mean_curvature(series, metric)?.h0_norm)
}

/// Normal frame data of the reference surface in mean curvature gauge.
#[derive(Debug, Clone)]
pub struct ReferenceConnection {
    pub curvature: ReferenceCurvature,
    /// Normal `I ⊥ H₀` with `I → (1, 0, 0, 0)`; `J₀/|H₀| = I/|I|`.
    pub i_vec: [Series; 4],
    /// `|I| = √(−⟨I, I⟩)`.
    pub i_norm: Series,
    /// `V₀` as a Cartesian covector series.
    pub v0: VecSeries,
    pub div_v0: Series,
}

pub fn reference_connection(series: &EmbeddingSeries, metric: &InducedMetric) -> Result<ReferenceConnection> {
    let g = series.grid().clone();
    let curvature = mean_curvature(series, metric)?;
    let trunc = series.solved_order + 2;
    let grads: Vec<VecSeries> = series.comps.iter().map(VectorSeries::gradient).collect();
    let dtau = &grads[0];
    let lap_tau = &curvature.h0[0];
    let h0_sq = curvature.h0_norm.mul(&curvature.h0_norm);
    let coef = lap_tau.mul(&h0_sq.recip()?);
    let i_vec: [Series; 4] = std::array::from_fn(|mu| {
        let tangential = metric.inner_covectors(&grads[mu], dtau);
        let mut s = tangential.add(&coef.mul(&curvature.h0[mu]));
        if mu == 0 {
            s = s.add(&RadialSeries::constant(Field::constant(&g, 1.0), trunc + 4));
        }
        s
    });
    let mut ii = i_vec[0].mul(&i_vec[0]);
    for v in &i_vec[1..] {
        ii = ii.sub(&v.mul(v));
    }
    let i_norm = ii.sqrt()?;
    let denom = i_norm.mul(&curvature.h0_norm).recip()?;
    let mut acc: Option<VecSeries> = None;
    for mu in 0..4 {
        let term = VectorSeries::gradient(&i_vec[mu]).scale_by(&curvature.h0[mu]).scale(ETA[mu]);
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term),
        });
    }
    let v0 = acc.unwrap().scale_by(&denom);
    let div_v0 = metric.div_covector(&v0);
    Ok(ReferenceConnection { curvature, i_vec, i_norm, v0, div_v0 })
}

/// `div V₀` series.
pub fn ref_connection_div(series: &EmbeddingSeries, metric: &InducedMetric) -> Result<Series> {
    Ok(reference_connection(series, metric)?.div_v0)
}

/// Reference geometry computed directly from sampled embedding functions at one radius,
/// with the induced metric obtained by differentiating the samples.
#[derive(Debug, Clone)]
pub struct DirectGeometry {
    pub h0: [Field; 4],
    pub h0_norm: Field,
    pub i_vec: [Field; 4],
    pub i_norm: Field,
    pub v0: Tangent,
    pub div_v0: Field,
    /// Area element relative to the round one.
    pub area_density: Field,
}

struct DirectMetric {
    ginv: Vec<Matrix3<f64>>,
    rho: Field,
}

impl DirectMetric {
    fn new(grads: &[Tangent]) -> Result<Self> {
        let grid = grads[0].grid().clone();
        let mut ginv = Vec::with_capacity(grid.len());
        let mut rho = Vec::with_capacity(grid.len());
        for q in 0..grid.len() {
            let n = nalgebra::Vector3::from(grid.normal(q));
            let mut gm = n * n.transpose();
            for (mu, gr) in grads.iter().enumerate() {
                let v = nalgebra::Vector3::from(gr.at(q));
                gm += v * v.transpose() * ETA[mu];
            }
            let det = gm.determinant();
            let inv = gm.try_inverse().ok_or(Error::Singular { what: "induced metric" })?;
            if !(det > 0.0) {
                return Err(Error::Singular { what: "induced metric" });
            }
            ginv.push(inv - n * n.transpose());
            rho.push(det.sqrt());
        }
        Ok(Self { ginv, rho: Field::raw(&grid, rho) })
    }

    fn raise(&self, w: &Tangent) -> Tangent {
        let g = w.grid();
        let mut out = [vec![0.0; g.len()], vec![0.0; g.len()], vec![0.0; g.len()]];
        for q in 0..g.len() {
            let v = self.ginv[q] * nalgebra::Vector3::from(w.at(q));
            for c in 0..3 {
                out[c][q] = v[c];
            }
        }
        Tangent::from_cartesian_unchecked(g, out)
    }

    fn div_covector(&self, w: &Tangent) -> Field {
        let flux = self.raise(w).scale_by(&self.rho);
        flux.divergence().zip_map(&self.rho, |a, b| a / b)
    }

    fn laplacian(&self, f: &Field) -> Field {
        self.div_covector(&f.gradient())
    }
}

pub fn direct_geometry(x: &[Field; 4]) -> Result<DirectGeometry> {
    let grads: Vec<Tangent> = x.iter().map(|f| f.gradient()).collect();
    let m = DirectMetric::new(&grads)?;
    let h0: [Field; 4] = std::array::from_fn(|mu| m.laplacian(&x[mu]));
    let mut sq = (&h0[0] * &h0[0]).scale(-1.0);
    for h in &h0[1..] {
        sq = &sq + &(h * h);
    }
    if sq.values().iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InconsistentEmbedding { reason: "mean curvature vector not spacelike".into() });
    }
    let h0_norm = sq.map(f64::sqrt);
    let coef = h0[0].zip_map(&sq, |a, b| a / b);
    let dtau_up = m.raise(&grads[0]);
    let i_vec: [Field; 4] = std::array::from_fn(|mu| {
        let s = &grads[mu].dot(&dtau_up) + &(&coef * &h0[mu]);
        if mu == 0 {
            s.map(|v| v + 1.0)
        } else {
            s
        }
    });
    let mut ii = &i_vec[0] * &i_vec[0];
    for v in &i_vec[1..] {
        ii = &ii - &(v * v);
    }
    let i_norm = ii.map(f64::sqrt);
    let denom = (&i_norm * &h0_norm).map(|v| 1.0 / v);
    let mut v0 = Tangent::zeros(x[0].grid());
    for mu in 0..4 {
        v0 = v0.add(&i_vec[mu].gradient().scale_by(&h0[mu]).scale(ETA[mu]));
    }
    let v0 = v0.scale_by(&denom);
    let div_v0 = m.div_covector(&v0);
    Ok(DirectGeometry { h0, h0_norm, i_vec, i_norm, v0, div_v0, area_density: m.rho.clone() })
}
