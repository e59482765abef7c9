//! Quasilocal energy limit, the Bondi energy-momentum 4-vector, and Lorentz equivariance.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::bondigeom::{self, induced_metric, BondiData, InducedMetric};
use crate::embed3::{self, EmbeddingSeries};
use crate::error::{Error, Result};
use crate::lorentz::{check_lorentz, eta, Mat4, Vec4};
use crate::s2spectral::{eigen_projections, eigenfunctions};
use crate::{Field, Series};

const ETA: [f64; 4] = [-1.0, 1.0, 1.0, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyMomentum {
    pub e: f64,
    pub p: [f64; 3],
}

impl EnergyMomentum {
    pub fn new(e: f64, p: [f64; 3]) -> Self {
        Self { e, p }
    }

    pub fn to_vec4(&self) -> Vec4 {
        Vec4::new(self.e, self.p[0], self.p[1], self.p[2])
    }

    pub fn from_vec4(v: &Vec4) -> Self {
        Self { e: v[0], p: [v[1], v[2], v[3]] }
    }

    pub fn p_norm(&self) -> f64 {
        Vector3::from(self.p).norm()
    }

    pub fn is_timelike(&self) -> bool {
        self.e > self.p_norm()
    }

    /// Largest component difference relative to `max(1, |self|_∞)`.
    pub fn rel_diff(&self, other: &Self) -> f64 {
        let a = self.to_vec4();
        let scale = a.amax().max(1.0);
        (a - other.to_vec4()).amax() / scale
    }
}

/// Observer `T₀ = (√(1+|a|²), a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observer {
    pub a: [f64; 3],
}

impl Observer {
    pub fn new(a: [f64; 3]) -> Self {
        Self { a }
    }

    pub fn rest() -> Self {
        Self { a: [0.0; 3] }
    }

    pub fn t0(&self) -> Vec4 {
        let a = Vector3::from(self.a);
        Vec4::new((1.0 + a.norm_squared()).sqrt(), a[0], a[1], a[2])
    }
}

/// Tolerances, ladder and embedding depth shared by the limit computations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QleConfig {
    pub ladder: Vec<f64>,
    pub exponent_tol: f64,
    pub embed_order: i32,
    pub route_tol: f64,
    pub limit_tol: f64,
}

impl Default for QleConfig {
    fn default() -> Self {
        Self {
            ladder: (0..5).map(|j| 100.0 * f64::powi(2.0, j)).collect(),
            exponent_tol: 0.15,
            embed_order: 5,
            route_tol: 1e-8,
            limit_tol: 1e-6,
        }
    }
}

/// Both evaluations of the energy-momentum 4-vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumRoutes {
    /// From integrals of the mass aspect.
    pub mass_aspect: EnergyMomentum,
    /// From the `r^{-2}` mean curvature and `r^{-3}` connection coefficients.
    pub geometric: EnergyMomentum,
}

impl MomentumRoutes {
    pub fn disagreement(&self) -> f64 {
        self.mass_aspect.rel_diff(&self.geometric)
    }
}

fn mass_aspect_route(data: &BondiData) -> EnergyMomentum {
    let m2 = data.m.scale(2.0);
    let pr = eigen_projections(&m2);
    EnergyMomentum::new(m2.integrate() / (8.0 * PI), pr.map(|v| v / (8.0 * PI)))
}

/// Embedding of the induced metric with time coefficients `taus`.
pub fn reference_embedding(data: &BondiData, taus: &[Field], order: i32) -> Result<(EmbeddingSeries, InducedMetric)> {
    let metric = induced_metric(data, order + 2);
    let emb = embed3::embed(&metric, taus, order)?;
    Ok((emb, metric))
}

pub fn momentum_routes(data: &BondiData) -> Result<MomentumRoutes> {
    let order = 3;
    let geom = bondigeom::surface_geometry(data, order + 2)?;
    let (emb, metric) = reference_embedding(data, &[], order)?;
    let rc = embed3::reference_connection(&emb, &metric)?;
    let h = geom.h_norm.trusted_coeff(-2)?;
    let h0 = rc.curvature.h0_norm.trusted_coeff(-2)?;
    let v = geom.div_v.trusted_coeff(-3)?;
    let v0 = rc.div_v0.trusted_coeff(-3)?;
    let e = (&h0 - &h).integrate() / (8.0 * PI);
    let p = eigen_projections(&(&v0 - &v)).map(|x| -x / (8.0 * PI));
    Ok(MomentumRoutes { mass_aspect: mass_aspect_route(data), geometric: EnergyMomentum::new(e, p) })
}

/// Energy-momentum 4-vector, checked by two independent routes.
pub fn bondi_four_momentum(data: &BondiData) -> Result<EnergyMomentum> {
    bondi_four_momentum_with(data, QleConfig::default().route_tol)
}

pub fn bondi_four_momentum_with(data: &BondiData, tol: f64) -> Result<EnergyMomentum> {
    let routes = momentum_routes(data)?;
    let scale = data.scale().max(1.0);
    for k in 0..4 {
        let (a, b) = (routes.mass_aspect.to_vec4()[k], routes.geometric.to_vec4()[k]);
        if (a - b).abs() > tol * scale {
            return Err(Error::RouteDisagreement { what: ["e", "p1", "p2", "p3"][k], a, b });
        }
    }
    Ok(routes.mass_aspect)
}

/// `(1/8π)∫ 2m (T₀⁰ + a^i X̃_i) dS²`.
pub fn closed_form_limit(data: &BondiData, obs: &Observer) -> f64 {
    let t = obs.t0();
    let g = data.grid();
    let eig = eigenfunctions(g);
    let mut w = Field::constant(g, t[0]);
    for i in 0..3 {
        w.axpy(t[i + 1], &eig[i]);
    }
    (&data.m.scale(2.0) * &w).integrate() / (8.0 * PI)
}

/// Series ingredients of the energy surface integral against a fixed reference embedding.
#[derive(Debug, Clone)]
pub struct EnergyDensity {
    pub x: [Series; 4],
    /// `I/|I|`, the unit future normal dual to `H₀`.
    pub i_unit: [Series; 4],
    /// `|H₀| − |H|`.
    pub dh: Series,
    /// `div V₀ − div V`.
    pub dv: Series,
}

pub fn energy_density(data: &BondiData, reference: &EmbeddingSeries, metric: &InducedMetric) -> Result<EnergyDensity> {
    let trunc = reference.solved_order + 1;
    let geom = bondigeom::surface_geometry(data, trunc + 2)?;
    let rc = embed3::reference_connection(reference, metric)?;
    let inv = rc.i_norm.recip()?;
    let i_unit = std::array::from_fn(|mu| rc.i_vec[mu].mul(&inv));
    let dh = rc.curvature.h0_norm.sub(&geom.h_norm);
    let dv = rc.div_v0.sub(&geom.div_v);
    Ok(EnergyDensity { x: reference.comps.clone(), i_unit, dh, dv })
}

fn covector_pairing(t0: &Vec4, v: &[Series; 4]) -> Series {
    let mut acc = v[0].scale(-ETA[0] * t0[0]);
    for mu in 1..4 {
        acc = acc.add(&v[mu].scale(-ETA[mu] * t0[mu]));
    }
    acc
}

impl EnergyDensity {
    /// `r²[−⟨T₀, I/|I|⟩(|H₀| − |H|) + τ (div V₀ − div V)]` with `τ = −⟨T₀, X⟩`.
    pub fn integrand(&self, t0: &Vec4) -> Series {
        let fac = covector_pairing(t0, &self.i_unit);
        let tau = covector_pairing(t0, &self.x);
        fac.mul(&self.dh).add(&tau.mul(&self.dv)).shift(2)
    }

    /// The `r⁰` coefficient of the surface integral divided by `8π`.
    pub fn limit(&self, t0: &Vec4) -> Result<f64> {
        let s = self.integrand(t0);
        if let Some(top) = s.top_power() {
            if top > 0 && s.coeff_or_zero(top).max_abs() > 1e-9 * self.dh.max_abs_coeff().max(1e-300) {
                return Err(Error::LadderNonConvergence { reason: format!("energy integrand grows like r^{top}") });
            }
        }
        Ok(s.trusted_coeff(0)?.integrate() / (8.0 * PI))
    }

    pub fn four_vector(&self) -> Result<EnergyMomentum> {
        let e = self.limit(&Vec4::new(1.0, 0.0, 0.0, 0.0))?;
        let mut p = [0.0; 3];
        for i in 0..3 {
            let mut t = Vec4::new(2f64.sqrt(), 0.0, 0.0, 0.0);
            t[i + 1] = 1.0;
            p[i] = self.limit(&t)? - 2f64.sqrt() * e;
        }
        Ok(EnergyMomentum::new(e, p))
    }
}

/// Energy surface integral at a finite radius: physical geometry from closed forms, reference
/// geometry from the sampled embedding by direct grid differentiation.
pub fn energy_at_radius(data: &BondiData, reference: &EmbeddingSeries, t0: &Vec4, r: f64) -> Result<f64> {
    let phys = bondigeom::geometry_at(data, r)?;
    let x = reference.eval(r);
    let dg = embed3::direct_geometry(&x)?;
    let pair = |v: &[Field; 4]| {
        let mut acc = v[0].scale(-ETA[0] * t0[0]);
        for mu in 1..4 {
            acc.axpy(-ETA[mu] * t0[mu], &v[mu]);
        }
        acc
    };
    let fac = pair(&dg.i_vec).zip_map(&dg.i_norm, |a, b| a / b);
    let tau = pair(&x);
    let dh = &dg.h0_norm - &phys.h_norm;
    let dv = &dg.div_v0 - &phys.div_v;
    let integrand = &(&fac * &dh) + &(&tau * &dv);
    Ok(integrand.integrate() * r * r / (8.0 * PI))
}

/// Finite-radius samples and their extrapolated limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// Fitted decay exponent of `value(r) − limit`; `None` when the samples agree to roundoff.
    pub exponent: Option<f64>,
    pub limit: f64,
}

/// Fits `v(r) = L + A r^{-q} + …` on a geometric ladder and extrapolates with integer powers
/// `q, q+1, …`. Fails unless the fitted `q` is within `tol` of an integer ≥ 1.
pub fn richardson(radii: &[f64], values: &[f64], tol: f64) -> Result<Ladder> {
    if radii.len() != values.len() || radii.len() < 3 {
        return Err(Error::LadderNonConvergence { reason: "need at least three samples".into() });
    }
    let ratio = radii[1] / radii[0];
    if radii.windows(2).any(|w| ((w[1] / w[0]) - ratio).abs() > 1e-12 * ratio) || ratio <= 1.0 {
        return Err(Error::LadderNonConvergence { reason: "radii must form an increasing geometric ladder".into() });
    }
    let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let floor = 1e-12 * scale;
    let diffs: Vec<f64> = values.windows(2).map(|w| w[0] - w[1]).collect();
    let mut ladder = Ladder { radii: radii.to_vec(), values: values.to_vec(), exponent: None, limit: *values.last().unwrap() };
    let Some(j) = (0..diffs.len() - 1).rev().find(|&j| diffs[j].abs() > floor && diffs[j + 1].abs() > floor) else {
        return Ok(ladder);
    };
    if diffs[j] * diffs[j + 1] <= 0.0 {
        return Err(Error::LadderNonConvergence { reason: format!("non-monotone differences {:e}, {:e}", diffs[j], diffs[j + 1]) });
    }
    let q = (diffs[j] / diffs[j + 1]).ln() / ratio.ln();
    let qi = q.round();
    if (q - qi).abs() > tol || qi < 1.0 {
        return Err(Error::LadderNonConvergence { reason: format!("fitted exponent {q:.3} is not within {tol} of a positive integer") });
    }
    let mut t = values.to_vec();
    let mut k = qi;
    while t.len() > 1 {
        let f = ratio.powf(k);
        t = t.windows(2).map(|w| (f * w[1] - w[0]) / (f - 1.0)).collect();
        k += 1.0;
    }
    ladder.exponent = Some(q);
    ladder.limit = t[0];
    Ok(ladder)
}

/// Energy ladder for an observer against a reference embedding.
pub fn energy_ladder(data: &BondiData, reference: &EmbeddingSeries, obs: &Observer, cfg: &QleConfig) -> Result<Ladder> {
    let t0 = obs.t0();
    let values = cfg.ladder.iter().map(|&r| energy_at_radius(data, reference, &t0, r)).collect::<Result<Vec<_>>>()?;
    richardson(&cfg.ladder, &values, cfg.exponent_tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QleLimit {
    pub closed_form: f64,
    pub series: f64,
    pub ladder: Ladder,
}

fn check_limit(closed: f64, got: f64, what: &str, data: &BondiData, cfg: &QleConfig) -> Result<()> {
    let scale = closed.abs().max(data.scale()).max(1e-300);
    if (got - closed).abs() > cfg.limit_tol * scale {
        return Err(Error::LadderNonConvergence { reason: format!("{what} limit {got} differs from closed form {closed}") });
    }
    Ok(())
}

fn limit_against(data: &BondiData, obs: &Observer, taus: &[Field], cfg: &QleConfig) -> Result<QleLimit> {
    let (emb, metric) = reference_embedding(data, taus, cfg.embed_order)?;
    let closed_form = closed_form_limit(data, obs);
    let series = energy_density(data, &emb, &metric)?.limit(&obs.t0())?;
    let ladder = energy_ladder(data, &emb, obs, cfg)?;
    check_limit(closed_form, series, "series", data, cfg)?;
    check_limit(closed_form, ladder.limit, "ladder", data, cfg)?;
    Ok(QleLimit { closed_form, series, ladder })
}

/// Limit of the quasilocal energy for the observer `T₀`, with series and finite-radius checks.
pub fn qle_limit(data: &BondiData, obs: &Observer, cfg: &QleConfig) -> Result<QleLimit> {
    limit_against(data, obs, &[], cfg)
}

/// The limit recomputed against a reference embedding whose `r⁰` time coefficient is `tau0`.
pub fn perturbation_invariance(data: &BondiData, tau0: &Field, obs: &Observer, cfg: &QleConfig) -> Result<QleLimit> {
    limit_against(data, obs, std::slice::from_ref(tau0), cfg)
}

pub fn lorentz_apply(l: &Mat4, v: &EnergyMomentum) -> Result<EnergyMomentum> {
    check_lorentz(l)?;
    Ok(EnergyMomentum::from_vec4(&(l * v.to_vec4())))
}

/// Least-squares `(e, p)` with `E(T₀) = T₀⁰ e + a·p`, and the largest fit residual.
pub fn fit_four_vector(samples: &[(Observer, f64)]) -> Result<(EnergyMomentum, f64)> {
    if samples.len() < 4 {
        return Err(Error::Invalid("at least four observers are needed".into()));
    }
    let a = DMatrix::from_fn(samples.len(), 4, |i, j| samples[i].0.t0()[j]);
    let b = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.1));
    let x = a.clone().svd(true, true).solve(&b, 1e-14).map_err(|e| Error::Invalid(e.to_string()))?;
    let residual = (&a * &x - &b).amax();
    Ok((EnergyMomentum::new(x[0], [x[1], x[2], x[3]]), residual))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivarianceReport {
    pub original: EnergyMomentum,
    pub expected: EnergyMomentum,
    pub recomputed: EnergyMomentum,
    pub residual: f64,
}

/// Recomputes the 4-vector against the reference embedding transformed by `η L η` and compares
/// it with `L` applied to the original 4-vector.
pub fn equivariance_check(data: &BondiData, l: &Mat4, cfg: &QleConfig) -> Result<EquivarianceReport> {
    check_lorentz(l)?;
    let (emb, metric) = reference_embedding(data, &[], cfg.embed_order)?;
    let original = energy_density(data, &emb, &metric)?.four_vector()?;
    let boosted = emb.transformed(&(eta() * l * eta()));
    let recomputed = energy_density(data, &boosted, &metric)?.four_vector()?;
    let expected = lorentz_apply(l, &original)?;
    let residual = expected.rel_diff(&recomputed);
    Ok(EquivarianceReport { original, expected, recomputed, residual })
}
