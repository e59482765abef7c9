//! Optimal isometric embedding: the boost chain and time coefficients that solve the
//! optimal embedding equation order by order in `1/r`.

use std::sync::Arc;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::bondigeom::{self, exp_shear_at, induced_metric, BondiData, InducedMetric};
use crate::embed3::{self, EmbeddingSeries};
use crate::error::{Error, Result};
use crate::lorentz::{self, boost_generator, expm, Mat4};
use crate::qle::{bondi_four_momentum, EnergyMomentum};
use crate::rseries::VectorSeries;
use crate::s2spectral::tensor::tensor_apply;
use crate::s2spectral::{apply_stability, eigen_projections, eigenfunctions, kernel_content, project_out_kernel, solve_stability_with_tol};
use crate::{Field, Grid, Series, Spectrum};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptConfig {
    /// Orders solved by [`solve`] after the leading one.
    pub depth: usize,
    pub embed_order: i32,
    /// Relative `ℓ ≤ 1` content tolerated in a stability source.
    pub solv_tol: f64,
    /// Relative size of a residual coefficient accepted as solved.
    pub solve_tol: f64,
    pub ladder: Vec<f64>,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self { depth: 2, embed_order: 8, solv_tol: 1e-8, solve_tol: 1e-10, ladder: vec![100.0, 200.0, 400.0, 800.0] }
    }
}

/// `b^{(0)}, b^{(-1)}, …` with `B_k = e^{r^{-k} b^{(-k)}} ⋯ e^{b^{(0)}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostChain {
    pub generators: Vec<[[f64; 4]; 4]>,
}

fn to_rows(m: &Mat4) -> [[f64; 4]; 4] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

fn from_rows(a: &[[f64; 4]; 4]) -> Mat4 {
    Mat4::from_fn(|i, j| a[i][j])
}

impl BoostChain {
    pub fn from_generators(gens: &[Mat4]) -> Self {
        Self { generators: gens.iter().map(to_rows).collect() }
    }

    pub fn generator(&self, k: usize) -> Mat4 {
        from_rows(&self.generators[k])
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn push(&mut self, b: &Mat4) {
        self.generators.push(to_rows(b));
    }

    /// `B = e^{b^{(0)}}`.
    pub fn leading(&self) -> Mat4 {
        expm(&self.generator(0))
    }

    /// `B_k` at a finite radius.
    pub fn at_radius(&self, r: f64) -> Mat4 {
        (0..self.len()).fold(Mat4::identity(), |acc, k| expm(&(self.generator(k) / r.powi(k as i32))) * acc)
    }

    /// Coefficients `M_j` of `B_k(r) = Σ_j r^{-j} M_j`, for `j < terms`.
    pub fn expansion(&self, terms: usize) -> Vec<Mat4> {
        let mut acc = vec![Mat4::zeros(); terms];
        acc[0] = self.leading();
        for k in 1..self.len() {
            let b = self.generator(k);
            let mut factor = vec![Mat4::zeros(); terms];
            let mut pow = Mat4::identity();
            let mut fact = 1.0;
            let mut n = 0;
            while n * k < terms {
                factor[n * k] = pow / fact;
                n += 1;
                pow *= b;
                fact *= n as f64;
            }
            let mut next = vec![Mat4::zeros(); terms];
            for (i, fi) in factor.iter().enumerate() {
                for (j, aj) in acc.iter().enumerate().take(terms - i) {
                    next[i + j] += fi * aj;
                }
            }
            acc = next;
        }
        acc
    }

    pub fn algebra_defect(&self) -> f64 {
        (0..self.len()).map(|k| lorentz::algebra_defect(&self.generator(k))).fold(0.0, f64::max)
    }

    /// Largest rotation-block entry of the generators beyond the leading one.
    pub fn rotation_content(&self) -> f64 {
        (1..self.len())
            .flat_map(|k| {
                let b = self.generator(k);
                (1..4).flat_map(move |i| (1..4).map(move |j| b[(i, j)].abs()))
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalSolution {
    pub n_theta: usize,
    pub energy_momentum: EnergyMomentum,
    pub chain: BoostChain,
    /// Harmonic coefficients of `τ̂^{(0)}, τ̂^{(-1)}, …`.
    pub tau_spectra: Vec<Vec<f64>>,
    pub c: [f64; 3],
    pub d_history: Vec<[f64; 3]>,
}

impl OptimalSolution {
    /// Highest solved order `l` (`τ̂^{(-l)}` is the last time coefficient).
    pub fn order(&self) -> usize {
        self.tau_spectra.len() - 1
    }

    pub fn tau_hats(&self, grid: &Arc<Grid>) -> Result<Vec<Field>> {
        if grid.n_theta() != self.n_theta {
            return Err(Error::IncompatibleGrids);
        }
        self.tau_spectra
            .iter()
            .map(|s| Field::synthesize(grid, &Spectrum::from_coeffs(grid.l_max(), s.clone())?))
            .collect()
    }

    fn set_tau(&mut self, k: usize, f: &Field) {
        let spec = f.analyze().coeffs().to_vec();
        if k < self.tau_spectra.len() {
            self.tau_spectra[k] = spec;
        } else {
            self.tau_spectra.push(spec);
        }
    }
}

/// `f = (|H|² − |H₀|²) / (√(|H|²(1+|∇τ|²) + (Δτ)²) + √(|H₀|²(1+|∇τ|²) + (Δτ)²))`.
pub fn f_series(h: &Series, h0: &Series, tau: &Series, metric: &InducedMetric) -> Result<Series> {
    let grad = VectorSeries::gradient(tau);
    let a = metric.inner_covectors(&grad, &grad).add(&Series::constant(Field::constant(h.grid(), 1.0), h.trunc_order() + 4));
    let lap = metric.laplacian(tau);
    let d2 = lap.mul(&lap);
    let h2 = h.mul(h);
    let h02 = h0.mul(h0);
    let den = h2.mul(&a).add(&d2).sqrt()?.add(&h02.mul(&a).add(&d2).sqrt()?);
    Ok(h2.sub(&h02).mul(&den.recip()?))
}

/// Reference-side series for a given list of time coefficients.
#[derive(Debug, Clone)]
pub struct Reference {
    pub embedding: EmbeddingSeries,
    pub h0: Series,
    pub div_v0: Series,
}

/// Terms of the optimal embedding equation as series.
#[derive(Debug, Clone)]
pub struct ResidualTerms {
    pub f: Series,
    /// `div(f∇τ)`.
    pub flux: Series,
    /// `Δ arcsinh(Δτ f / (|H||H₀|))`.
    pub curvature: Series,
    /// `div V − div V₀`.
    pub connection: Series,
    pub total: Series,
}

/// Physical data with its geometry series, shared by all solver steps.
#[derive(Debug, Clone)]
pub struct OptimalProblem {
    pub data: BondiData,
    pub cfg: OptConfig,
    pub metric: InducedMetric,
    pub h: Series,
    pub div_v: Series,
}

impl OptimalProblem {
    pub fn new(data: &BondiData, cfg: &OptConfig) -> Result<Self> {
        let trunc = cfg.embed_order + 2;
        let metric = induced_metric(data, trunc);
        let geom = bondigeom::surface_geometry(data, trunc)?;
        Ok(Self { data: data.clone(), cfg: cfg.clone(), metric, h: geom.h_norm, div_v: geom.div_v })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.data.grid()
    }

    pub fn reference(&self, sol: &OptimalSolution) -> Result<Reference> {
        let taus = sol.tau_hats(self.grid())?;
        let embedding = embed3::embed(&self.metric, &taus, self.cfg.embed_order)?;
        let rc = embed3::reference_connection(&embedding, &self.metric)?;
        Ok(Reference { embedding, h0: rc.curvature.h0_norm, div_v0: rc.div_v0 })
    }

    /// `τ = Σ_α (B_k)_{0α} X̂_α` as a series.
    pub fn tau_series(&self, chain: &BoostChain, emb: &EmbeddingSeries) -> Series {
        let trunc = emb.comps[0].trunc_order();
        let mats = chain.expansion((trunc + 2) as usize);
        let mut tau = Series::zero(self.grid(), trunc);
        for (j, m) in mats.iter().enumerate() {
            for alpha in 0..4 {
                if m[(0, alpha)] != 0.0 {
                    tau = tau.add(&emb.comps[alpha].scale(m[(0, alpha)]).shift(-(j as i32)));
                }
            }
        }
        tau
    }

    pub fn residual_terms(&self, sol: &OptimalSolution, reference: &Reference) -> Result<ResidualTerms> {
        let tau = self.tau_series(&sol.chain, &reference.embedding);
        let f = f_series(&self.h, &reference.h0, &tau, &self.metric)?;
        let grad = VectorSeries::gradient(&tau);
        let flux = self.metric.div_covector(&grad.scale_by(&f));
        let arg = self.metric.laplacian(&tau).mul(&f).mul(&self.h.mul(&reference.h0).recip()?);
        let arg = arg.drop_above(-1, 1e-10 * arg.max_abs_coeff())?;
        let curvature = self.metric.laplacian(&arg.asinh()?);
        let connection = self.div_v.sub(&reference.div_v0);
        let total = flux.sub(&curvature).sub(&connection);
        Ok(ResidualTerms { f, flux, curvature, connection, total })
    }

    pub fn residual_series(&self, sol: &OptimalSolution) -> Result<Series> {
        Ok(self.residual_terms(sol, &self.reference(sol)?)?.total)
    }

    /// The residual field at a finite radius: series inputs evaluated at `r`, derivatives taken
    /// on the grid with the exact metric at `r`.
    pub fn residual_at_radius(&self, sol: &OptimalSolution, reference: &Reference, r: f64) -> Result<Field> {
        let einv = exp_shear_at(&self.data, -1.0, r);
        let raise = |w: &crate::Tangent| tensor_apply(&einv, w).scale(1.0 / (r * r));
        let x = reference.embedding.eval(r);
        let b = sol.chain.at_radius(r);
        let mut tau = Field::zeros(self.grid());
        for (alpha, xa) in x.iter().enumerate() {
            tau.axpy(b[(0, alpha)], xa);
        }
        let h = self.h.eval(r);
        let h0 = reference.h0.eval(r);
        let grad = tau.gradient();
        let up = raise(&grad);
        let grad_sq = grad.dot(&up);
        let lap = up.divergence();
        let a = grad_sq.map(|v| 1.0 + v);
        let d2 = &lap * &lap;
        let root = |hh: &Field| (&(&(hh * hh) * &a) + &d2).map(f64::sqrt);
        let f = (&(&h * &h) - &(&h0 * &h0)).zip_map(&(&root(&h) + &root(&h0)), |n, d| n / d);
        let flux = up.scale_by(&f).divergence();
        let arg = (&lap * &f).zip_map(&(&h * &h0), |n, d| (n / d).asinh());
        let curvature = raise(&arg.gradient()).divergence();
        let connection = &self.div_v.eval(r) - &reference.div_v0.eval(r);
        Ok(&(&flux - &curvature) - &connection)
    }

    pub fn decay(&self, sol: &OptimalSolution) -> Result<DecayFit> {
        let reference = self.reference(sol)?;
        let norms = self
            .cfg
            .ladder
            .iter()
            .map(|&r| self.residual_at_radius(sol, &reference, r).map(|f| f.max_abs()))
            .collect::<Result<Vec<_>>>()?;
        Ok(DecayFit::fit(&self.cfg.ladder, &norms))
    }

    fn empty_solution(&self, em: EnergyMomentum, c: Vector3<f64>) -> OptimalSolution {
        let b0 = boost_generator(&lorentz::rapidity_of_row(&c));
        OptimalSolution {
            n_theta: self.grid().n_theta(),
            energy_momentum: em,
            chain: BoostChain::from_generators(&[b0]),
            tau_spectra: vec![vec![0.0; self.grid().spectrum_len()]],
            c: c.into(),
            d_history: Vec::new(),
        }
    }

    /// Inverts the stability operator after checking the `ℓ ≤ 1` content against `scale`.
    fn stability_solve(&self, source: &Field, scale: f64) -> Result<Field> {
        let (l0, l1) = kernel_content(&source.analyze());
        if l0 > self.cfg.solv_tol * scale || l1 > self.cfg.solv_tol * scale {
            return Err(Error::Solvability { l0, l1, norm: scale });
        }
        solve_stability_with_tol(&project_out_kernel(source), f64::INFINITY)
    }

    /// Iterates `τ̂^{(-k)} ← τ̂^{(-k)} + Δ̃(Δ̃+2)^{-1}(−2 R^{(p)})` until the coefficient vanishes.
    fn settle_tau(&self, sol: &mut OptimalSolution, k: usize, power: i32, mut reference: Reference) -> Result<(Reference, Field)> {
        let mut tau = sol.tau_hats(self.grid())?[k].clone();
        let mut coeff = self.residual_terms(sol, &reference)?.total.trusted_coeff(power)?;
        let scale = self.residual_scale(&reference, power)?;
        for _ in 0..6 {
            if coeff.max_abs() <= self.cfg.solve_tol * scale {
                break;
            }
            let mut trial = sol.clone();
            trial.set_tau(k, &(&tau + &self.stability_solve(&coeff.scale(-2.0), scale)?));
            let trial_ref = self.reference(&trial)?;
            let trial_coeff = self.residual_terms(&trial, &trial_ref)?.total.trusted_coeff(power)?;
            if trial_coeff.max_abs() >= 0.5 * coeff.max_abs() {
                if trial_coeff.max_abs() < coeff.max_abs() {
                    *sol = trial;
                    return Ok((trial_ref, trial_coeff));
                }
                break;
            }
            *sol = trial;
            tau = sol.tau_hats(self.grid())?[k].clone();
            reference = trial_ref;
            coeff = trial_coeff;
        }
        Ok((reference, coeff))
    }

    fn residual_scale(&self, reference: &Reference, power: i32) -> Result<f64> {
        let v = self.div_v.trusted_coeff(power)?.max_abs();
        let v0 = reference.div_v0.trusted_coeff(power)?.max_abs();
        Ok(v.max(v0).max(self.data.scale()).max(1e-300))
    }

    /// Leading order: boost from the energy-momentum vector, then `τ̂^{(0)}` from the `r^{-3}` residual.
    pub fn solve_leading(&self) -> Result<(OptimalSolution, LeadingReport)> {
        let em = bondi_four_momentum(&self.data)?;
        if !em.is_timelike() {
            return Err(Error::NotTimelike { e: em.e, p_norm: em.p_norm() });
        }
        let p = Vector3::from(em.p);
        let c = p / (em.e * em.e - p.norm_squared()).sqrt();
        let mut sol = self.empty_solution(em, c);
        let reference = self.reference(&sol)?;
        let terms = self.residual_terms(&sol, &reference)?;
        let r0 = terms.total.trusted_coeff(-3)?;
        let f2 = terms.f.trusted_coeff(-2)?;
        let v3 = terms.connection.trusted_coeff(-3)?;
        let proj = eigen_projections(&v3);
        let f2_int = f2.integrate();
        let solvability: [f64; 3] = std::array::from_fn(|i| c[i] * f2_int + proj[i]);
        let (l0, l1) = kernel_content(&r0.analyze());
        let norm = self.residual_scale(&reference, -3)?;
        if l0 > self.cfg.solv_tol * norm || l1 > self.cfg.solv_tol * norm {
            return Err(Error::Solvability { l0, l1, norm });
        }
        let (_, after) = self.settle_tau(&mut sol, 0, -3, reference)?;
        let report = LeadingReport { solvability, f2_integral: f2_int, final_coeff: after.max_abs() };
        Ok((sol, report))
    }

    /// `ℓ = 1` projections of the residual coefficient at `power` for the given `d`.
    fn d_projection(&self, sol: &OptimalSolution, reference: &Reference, d: &Vector3<f64>, power: i32) -> Result<(Vector3<f64>, Field)> {
        let mut trial = sol.clone();
        let k = trial.chain.len() - 1;
        trial.chain.generators[k] = to_rows(&boost_from_d(&sol.chain.leading(), d)?);
        let coeff = self.residual_terms(&trial, reference)?.total.trusted_coeff(power)?;
        Ok((Vector3::from(eigen_projections(&coeff)), coeff))
    }

    /// One induction step: `b^{(-l-1)}` (through `d`) and `τ̂^{(-l-1)}` from the `r^{-l-4}` residual.
    pub fn solve_next_order(&self, sol: &OptimalSolution) -> Result<(OptimalSolution, StepReport)> {
        let l = sol.order();
        let power = -(l as i32) - 4;
        let mut next = sol.clone();
        next.chain.push(&Mat4::zeros());
        next.tau_spectra.push(vec![0.0; self.grid().spectrum_len()]);
        let mut reference = self.reference(&next)?;
        let (p0, _) = self.d_projection(&next, &reference, &Vector3::zeros(), power)?;
        let mut response = Matrix3::zeros();
        for j in 0..3 {
            let (pj, _) = self.d_projection(&next, &reference, &Vector3::ith(j, 1.0), power)?;
            response.set_column(j, &(pj - p0));
        }
        let c = Vector3::from(sol.c);
        let f2_int = self.residual_terms(&next, &reference)?.f.trusted_coeff(-2)?.integrate();
        let system = system_matrix(&c);
        let min_eig = SymmetricEigen::new(system).eigenvalues.min();
        if !(min_eig > 0.0) {
            return Err(Error::Singular { what: "d-system" });
        }
        let inv = response.try_inverse().ok_or(Error::Singular { what: "d-response" })?;
        let mut d = Vector3::zeros();
        for _ in 0..6 {
            let (pr, _) = self.d_projection(&next, &reference, &d, power)?;
            if pr.amax() <= self.cfg.solve_tol * self.residual_scale(&reference, power)? {
                break;
            }
            d -= inv * pr;
            let k = next.chain.len() - 1;
            next.chain.generators[k] = to_rows(&boost_from_d(&sol.chain.leading(), &d)?);
            let k = next.order();
            let (r, _) = self.settle_tau(&mut next, k, power, reference)?;
            reference = r;
        }
        let k = next.order();
        let (_, after) = self.settle_tau(&mut next, k, power, reference)?;
        next.d_history.push(d.into());
        let predicted = system * -f2_int;
        let report = StepReport { order: l + 1, d: d.into(), response: to_rows3(&response), predicted: to_rows3(&predicted), min_eigenvalue: min_eig, final_coeff: after.max_abs() };
        Ok((next, report))
    }

    /// Leading solve followed by `cfg.depth` induction steps.
    pub fn solve(&self) -> Result<OptimalSolution> {
        let (mut sol, _) = self.solve_leading()?;
        for _ in 0..self.cfg.depth {
            sol = self.solve_next_order(&sol)?.0;
        }
        Ok(sol)
    }
}

/// `δ_ij − c_i c_j / (1 + |c|²)`.
pub fn system_matrix(c: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::identity() - c * c.transpose() / (1.0 + c.norm_squared())
}

/// Pure boost generator with `Σ_α B_{αi} b_{0α} = d_i`.
pub fn boost_from_d(b: &Mat4, d: &Vector3<f64>) -> Result<Mat4> {
    let spatial: Matrix3<f64> = b.fixed_view::<3, 3>(1, 1).into();
    let v = spatial.transpose().try_inverse().ok_or(Error::Singular { what: "spatial block of B" })? * d;
    Ok(boost_generator(&v))
}

fn to_rows3(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadingReport {
    /// `c_i ∫f^{(-2)} + ∫(div V − div V₀)^{(-3)} X̃_i`.
    pub solvability: [f64; 3],
    pub f2_integral: f64,
    /// Sup norm of the `r^{-3}` residual coefficient after the solve.
    pub final_coeff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub order: usize,
    pub d: [f64; 3],
    /// Numerical response of the `ℓ = 1` projections to `d`.
    pub response: [[f64; 3]; 3],
    /// `−(∫f^{(-2)})(δ_ij − c_i c_j/(1+|c|²))`.
    pub predicted: [[f64; 3]; 3],
    pub min_eigenvalue: f64,
    pub final_coeff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub radii: Vec<f64>,
    pub norms: Vec<f64>,
    /// Least-squares slope of `−log‖R‖` against `log r`.
    pub exponent: f64,
}

impl DecayFit {
    pub fn fit(radii: &[f64], norms: &[f64]) -> Self {
        let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        let ys: Vec<f64> = norms.iter().map(|n| n.max(1e-300).ln()).collect();
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        Self { radii: radii.to_vec(), norms: norms.to_vec(), exponent: -sxy / sxx }
    }
}

/// Both second-variation quadratic forms on given perturbations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondVariation {
    pub tau_form: f64,
    pub b_form: f64,
    /// `(8πe/√(1+|c|²)) Σ_i (Σ_α δb_{0α} B_{αi})²`.
    pub b_form_closed: f64,
    /// Largest deviation of `|∇̃δg|² + δg²` from its constant value.
    pub constancy: f64,
}

/// Data of a solution that the second-variation forms depend on.
#[derive(Debug, Clone)]
pub struct SecondVariationForms {
    pub b: Mat4,
    pub f2: Field,
    pub energy: f64,
    pub c: Vector3<f64>,
}

impl SecondVariationForms {
    pub fn new(problem: &OptimalProblem, sol: &OptimalSolution) -> Result<Self> {
        let reference = problem.reference(sol)?;
        let f2 = problem.residual_terms(sol, &reference)?.f.trusted_coeff(-2)?;
        Ok(Self { b: sol.chain.leading(), f2, energy: sol.energy_momentum.e, c: Vector3::from(sol.c) })
    }

    /// `(B₀₀/2)∫Δ̃(Δ̃+2)δτ̂·δτ̂ dS²`.
    pub fn tau_form(&self, delta_tau: &Field) -> f64 {
        0.5 * self.b[(0, 0)] * (&apply_stability(delta_tau) * delta_tau).integrate()
    }

    /// `−∫f^{(-2)}(|∇̃δg|² + δg²) dS²` with `δg = Σ_i(Σ_α δb_{0α}B_{αi})X̃_i`.
    pub fn evaluate(&self, delta_tau: &Field, delta_b: &[f64; 4]) -> SecondVariation {
        let g = self.f2.grid();
        let w: [f64; 3] = std::array::from_fn(|i| (0..4).map(|a| delta_b[a] * self.b[(a, i + 1)]).sum());
        let eig = eigenfunctions(g);
        let mut dg = Field::zeros(g);
        for i in 0..3 {
            dg.axpy(w[i], &eig[i]);
        }
        let grad = dg.gradient();
        let q = &grad.dot(&grad) + &(&dg * &dg);
        let wsq: f64 = w.iter().map(|x| x * x).sum();
        let constancy = q.values().iter().map(|v| (v - wsq).abs()).fold(0.0, f64::max);
        let b_form = -(&self.f2 * &q).integrate();
        let b_form_closed = 8.0 * std::f64::consts::PI * self.energy / (1.0 + self.c.norm_squared()).sqrt() * wsq;
        SecondVariation { tau_form: self.tau_form(delta_tau), b_form, b_form_closed, constancy }
    }
}

pub fn second_variation_check(problem: &OptimalProblem, sol: &OptimalSolution, delta_tau: &Field, delta_b: &[f64; 4]) -> Result<SecondVariation> {
    Ok(SecondVariationForms::new(problem, sol)?.evaluate(delta_tau, delta_b))
}
