//! The four subcommands. Each returns a report whose checks decide the exit status.

use std::sync::Arc;

use nalgebra::Vector3;
use qle_core::bondigeom::{self, BondiData};
use qle_core::lorentz::boost;
use qle_core::optembed::{DecayFit, OptConfig, OptimalProblem, OptimalSolution, SecondVariationForms};
use qle_core::qle::{self, Observer};
use qle_core::s2spectral::{harmonic, kernel_content};
use qle_core::{embed3, Field, Grid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Config;
use crate::error::{CliResult, OpContext};
use crate::report::{Check, DecayRow, ObserverEnergy, OptimalReport, ReportDocument};

const PERTURBATION_SEED: u64 = 0x5eed;

/// Everything a command needs: the data on its grid, the resolved configuration and the input hash.
pub struct Context {
    pub data: BondiData,
    pub config: Config,
    pub input_sha256: String,
    pub observers: Vec<Observer>,
}

impl Context {
    fn grid(&self) -> &Arc<Grid> {
        self.data.grid()
    }

    fn report(&self, command: &str) -> ReportDocument {
        ReportDocument::new(command, &self.input_sha256, self.grid(), &self.config)
    }

    fn scale(&self) -> f64 {
        self.data.scale().max(1.0)
    }
}

/// Runs `f`, turning a pipeline error into a failed row named `name`.
fn guarded(checks: &mut Vec<Check>, name: &str, f: impl FnOnce() -> CliResult<Vec<Check>>) {
    match f() {
        Ok(rows) => checks.extend(rows),
        Err(e) => checks.push(Check::failed(name, e.to_string())),
    }
}

fn route_check(ctx: &Context, routes: &qle::MomentumRoutes) -> Check {
    let diff = (routes.mass_aspect.to_vec4() - routes.geometric.to_vec4()).amax();
    let tol = ctx.config.energy.route_tol * ctx.scale();
    Check::at_most("qle.momentum_route_agreement", diff, tol, "mass-aspect vs geometric 4-vector, max component difference")
}

pub fn momentum(ctx: &Context) -> CliResult<ReportDocument> {
    let mut report = ctx.report("momentum");
    let routes = qle::momentum_routes(&ctx.data).op("bondi_four_momentum")?;
    report.energy_momentum = Some(routes.mass_aspect);
    report.routes = Some(routes);
    report.checks.push(route_check(ctx, &routes));
    Ok(report)
}

fn limit_checks(ctx: &Context, obs: &Observer, e: &ObserverEnergy) -> Vec<Check> {
    let l = &e.limit;
    let scale = l.closed_form.abs().max(ctx.scale());
    let tag = format!("a = ({}, {}, {})", obs.a[0], obs.a[1], obs.a[2]);
    vec![
        Check::at_most("qle.limit_closed_form", (l.series - l.closed_form).abs() / scale, ctx.config.verify.closed_form_tol, format!("{tag}: series limit vs mass-aspect integral")),
        Check::at_most("qle.ladder_convergence", (l.ladder.limit - l.closed_form).abs() / scale, ctx.config.energy.limit_tol, format!("{tag}: extrapolated finite-radius ladder")),
    ]
}

fn observer_energy(ctx: &Context, obs: &Observer) -> CliResult<ObserverEnergy> {
    let limit = qle::qle_limit(&ctx.data, obs, &ctx.config.energy).op("qle_limit")?;
    let t = obs.t0();
    Ok(ObserverEnergy { observer: obs.a, t0: [t[0], t[1], t[2], t[3]], limit })
}

pub fn energy(ctx: &Context) -> CliResult<ReportDocument> {
    let mut report = ctx.report("energy");
    for obs in &ctx.observers {
        let e = observer_energy(ctx, obs)?;
        report.checks.extend(limit_checks(ctx, obs, &e));
        report.energies.push(e);
    }
    Ok(report)
}

struct OptimalRun {
    problem: OptimalProblem,
    report: OptimalReport,
    checks: Vec<Check>,
}

fn solvability_check(ctx: &Context, lead: &qle_core::optembed::LeadingReport, c: &Vector3<f64>) -> Check {
    let worst = lead.solvability.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let norm = lead.f2_integral.abs() * c.norm().max(1.0);
    Check::at_most("optembed.solvability", worst / norm.max(1e-300), ctx.config.optimal.solv_tol, "X̃_i projections of the leading source relative to c·∫f")
}

fn decay_row(ctx: &Context, problem: &OptimalProblem, sol: &OptimalSolution) -> CliResult<(DecayRow, Check)> {
    let order = sol.order();
    let fit = problem.decay(sol).op("residual_at_radius")?;
    let required = 4.0 + order as f64 - ctx.config.verify.decay_slack;
    let floor = ctx.config.verify.decay_floor * ctx.scale();
    let (radii, norms): (Vec<f64>, Vec<f64>) = fit.radii.iter().zip(&fit.norms).filter(|(_, &n)| n > floor).map(|(&r, &n)| (r, n)).unzip();
    let above = (radii.len() >= 2).then(|| DecayFit::fit(&radii, &norms).exponent);
    let name = format!("optembed.residual_decay[{order}]");
    let check = match above {
        Some(q) => Check::at_least(name, q, required, format!("decay exponent of sup|R| over r = {radii:?}")),
        None if radii.len() == 1 => {
            let next = fit.radii.iter().copied().find(|&r| r > radii[0]).unwrap_or(radii[0] * 2.0);
            let bound = (norms[0] / floor).ln() / (next / radii[0]).ln();
            Check::at_least(name, bound, required, "lower bound on the exponent: one ladder point above the roundoff floor")
        }
        None => {
            let peak = fit.norms.iter().fold(0.0f64, |a, &n| a.max(n));
            Check::at_most(name, peak, floor, "residual at the roundoff floor on the whole ladder")
        }
    };
    Ok((DecayRow { order, required_exponent: required, fit, floor, exponent_above_floor: above }, check))
}

fn run_optimal(ctx: &Context, depth: usize) -> CliResult<OptimalRun> {
    let cfg = OptConfig { depth, ..ctx.config.optimal.clone() };
    let problem = OptimalProblem::new(&ctx.data, &cfg).op("optimal_problem")?;
    let em = qle::momentum_routes(&ctx.data).op("bondi_four_momentum")?;
    let mut checks = vec![Check::positive("optembed.timelike", em.mass_aspect.e - em.mass_aspect.p_norm(), "e − |p|")];
    let (mut sol, leading) = problem.solve_leading().op("solve_leading")?;
    let c = Vector3::from(sol.c);
    checks.push(solvability_check(ctx, &leading, &c));
    let g = em.geometric;
    let c_geo = Vector3::from(g.p) / (g.e * g.e - g.p_norm().powi(2)).sqrt();
    checks.push(Check::at_most(
        "optembed.leading_boost",
        (c - c_geo).amax() / c_geo.norm().max(1.0),
        ctx.config.energy.route_tol,
        "c against p/√(e²−|p|²) from the geometric route",
    ));
    let mut decay = Vec::new();
    let (row, check) = decay_row(ctx, &problem, &sol)?;
    decay.push(row);
    checks.push(check);
    let mut steps = Vec::new();
    for _ in 0..depth {
        let (next, step) = problem.solve_next_order(&sol).op("solve_next_order")?;
        sol = next;
        let k = step.order;
        checks.push(Check::positive(format!("optembed.system_positive_definite[{k}]"), step.min_eigenvalue, "smallest eigenvalue of δ − cc/(1+|c|²)"));
        let (mut diff, mut size) = (0.0f64, 0.0f64);
        for i in 0..3 {
            for j in 0..3 {
                diff = diff.max((step.response[i][j] - step.predicted[i][j]).abs());
                size = size.max(step.predicted[i][j].abs());
            }
        }
        checks.push(Check::at_most(format!("optembed.d_response[{k}]"), diff / size.max(1e-300), ctx.config.verify.response_tol, "numerical response vs −(∫f)(δ − cc/(1+|c|²))"));
        let (row, check) = decay_row(ctx, &problem, &sol)?;
        decay.push(row);
        checks.push(check);
        steps.push(step);
    }
    Ok(OptimalRun { problem, report: OptimalReport { solution: sol, leading, steps, decay }, checks })
}

pub fn optimal(ctx: &Context, depth: usize) -> CliResult<ReportDocument> {
    let mut report = ctx.report("optimal");
    let run = run_optimal(ctx, depth)?;
    report.energy_momentum = Some(run.report.solution.energy_momentum);
    report.checks = run.checks;
    report.optimal = Some(run.report);
    Ok(report)
}

fn default_observers() -> Vec<Observer> {
    let mut obs = vec![Observer::rest()];
    for i in 0..3 {
        let mut a = [0.0; 3];
        a[i] = 0.5;
        obs.push(Observer::new(a));
    }
    obs.extend([Observer::new([0.3, -0.4, 0.2]), Observer::new([-0.7, 0.1, 0.6]), Observer::new([0.2, 0.9, -0.5])]);
    obs
}

fn random_field(g: &Arc<Grid>, rng: &mut ChaCha8Rng, degrees: std::ops::RangeInclusive<usize>, amp: f64) -> Field {
    let mut f = Field::zeros(g);
    for l in degrees {
        for m in -(l as i64)..=(l as i64) {
            f.axpy(amp * rng.gen_range(-1.0..1.0), &harmonic(g, l, m));
        }
    }
    f
}

fn geometry_checks(ctx: &Context) -> CliResult<Vec<Check>> {
    let d = &ctx.data;
    let v = &ctx.config.verify;
    let det = bondigeom::induced_metric(d, bondigeom::DEFAULT_TRUNC).det_residual();
    let geo = bondigeom::surface_geometry(d, 6).op("surface_geometry")?;
    let h2 = geo.h_norm.trusted_coeff(-2).op("mean_curvature_norm")?;
    let h_err = (&h2 - &bondigeom::h2_closed_form(d)).max_abs();
    let v3 = geo.div_v.trusted_coeff(-3).op("connection_div")?;
    Ok(vec![
        Check::at_most("bondigeom.det_invariant", det, v.det_tol, "max |det σ / (r⁴ sin²θ) − 1| over nodes and powers"),
        Check::at_most("bondigeom.mean_curvature_r-2", h_err / ctx.scale(), v.closed_form_tol, "|H| r⁻² coefficient vs −2m + δ̃W̃"),
        Check::at_most("bondigeom.connection_mean_zero", v3.integrate().abs() / ctx.scale(), v.closed_form_tol, "∫ div V r⁻³ coefficient"),
    ])
}

fn observer_checks(ctx: &Context, routes: &qle::MomentumRoutes) -> CliResult<Vec<Check>> {
    let mut rows = Vec::new();
    let mut samples = Vec::new();
    for obs in &default_observers() {
        let e = observer_energy(ctx, obs)?;
        samples.push((*obs, e.limit.series));
        if obs.a == [0.0; 3] {
            rows.extend(limit_checks(ctx, obs, &e));
        }
    }
    let (fit, residual) = qle::fit_four_vector(&samples).op("fit_four_vector")?;
    let tol = ctx.config.verify.linearity_tol;
    rows.push(Check::at_most("qle.observer_linearity", residual / ctx.scale(), tol, format!("4-vector fit over {} observers", samples.len())));
    rows.push(Check::at_most("qle.fit_matches_momentum", fit.rel_diff(&routes.mass_aspect), tol, "fitted 4-vector vs Bondi 4-momentum"));
    Ok(rows)
}

fn invariance_checks(ctx: &Context, rng: &mut ChaCha8Rng) -> CliResult<Vec<Check>> {
    let g = ctx.grid();
    let obs = Observer::new([0.3, -0.2, 0.4]);
    let base = qle::qle_limit(&ctx.data, &obs, &ctx.config.energy).op("qle_limit")?.ladder.limit;
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let tau0 = random_field(g, rng, 1..=4, 0.3);
        let lim = qle::perturbation_invariance(&ctx.data, &tau0, &obs, &ctx.config.energy).op("perturbation_invariance")?.ladder.limit;
        worst = worst.max((lim - base).abs() / base.abs().max(ctx.scale()));
    }
    let mut eq = 0.0f64;
    for (dir, chi) in [([1.0, 2.0, -1.0], 0.6), ([0.0, 0.0, 1.0], -0.9), ([-0.4, 0.3, 0.8], 1.0)] {
        let l = boost(&Vector3::from(dir), chi);
        eq = eq.max(qle::equivariance_check(&ctx.data, &l, &ctx.config.energy).op("equivariance_check")?.residual);
    }
    Ok(vec![
        Check::at_most("qle.perturbation_invariance", worst, ctx.config.verify.invariance_tol, "limit under random r⁰ reference time perturbations"),
        Check::at_most("qle.lorentz_equivariance", eq, ctx.config.verify.equivariance_tol, "4-vector of the boosted reference vs boosted 4-vector"),
    ])
}

fn embedding_checks(ctx: &Context) -> CliResult<Vec<Check>> {
    let g = ctx.grid();
    let v = &ctx.config.verify;
    let metric = bondigeom::induced_metric(&ctx.data, 10);
    let taus = [harmonic(g, 2, 0).scale(0.3), harmonic(g, 3, 1).scale(0.2)];
    let emb = embed3::embed(&metric, &taus, 8).op("embed_order_step")?;
    let worst = emb.residuals.iter().copied().fold(embed3::metric_residual(&emb, &metric), f64::max);
    let r = 1e3;
    let series = embed3::h0_norm(&emb, &metric).op("h0_norm")?.eval(r);
    let direct = embed3::direct_geometry(&emb.eval(r)).op("direct_geometry")?.h0_norm;
    let rel = (&direct - &series).max_abs() / series.max_abs();
    let tau0 = &harmonic(g, 2, 1).scale(0.4) + &harmonic(g, 2, -2).scale(-0.25);
    let metric4 = bondigeom::induced_metric(&ctx.data, 6);
    let emb4 = embed3::embed(&metric4, std::slice::from_ref(&tau0), 4).op("embed_order_step")?;
    let lead = embed3::ref_connection_div(&emb4, &metric4).op("ref_connection_div")?.trusted_coeff(-3).op("ref_connection_div")?;
    let want = tau0.scale(12.0);
    let formula = (&lead - &want).max_abs() / want.max_abs();
    let (l0, l1) = kernel_content(&lead.analyze());
    Ok(vec![
        Check::at_most("embed3.metric_residual", worst, v.embedding_tol, format!("relative induced-metric residual over {} orders", emb.residuals.len())),
        Check::at_most("embed3.h0_finite_radius", rel, v.finite_radius_tol, "|H₀| from the sampled embedding at r = 1e3 vs series"),
        Check::at_most("embed3.div_v0_leading", formula, v.connection_tol, "leading div V₀ vs ½Δ̃(Δ̃+2)τ̂"),
        Check::at_most("embed3.div_v0_high_degree", l0.max(l1) / want.max_abs(), v.connection_tol, "ℓ ≤ 1 content of leading div V₀"),
    ])
}

fn second_variation_checks(ctx: &Context, run: &OptimalRun, rng: &mut ChaCha8Rng) -> CliResult<Vec<Check>> {
    let g = ctx.grid();
    let v = &ctx.config.verify;
    let lead_only = OptimalSolution {
        chain: qle_core::optembed::BoostChain::from_generators(&[run.report.solution.chain.generator(0)]),
        tau_spectra: run.report.solution.tau_spectra[..1].to_vec(),
        d_history: Vec::new(),
        ..run.report.solution.clone()
    };
    let forms = SecondVariationForms::new(&run.problem, &lead_only).op("second_variation_check")?;
    let (mut min_form, mut worst_rel, mut worst_const) = (f64::INFINITY, 0.0f64, 0.0f64);
    for _ in 0..v.perturbations {
        let dt = random_field(g, rng, 2..=5, 1.0);
        let db: [f64; 4] = [0.0, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let s = forms.evaluate(&dt, &db);
        min_form = min_form.min(s.tau_form).min(s.b_form);
        worst_rel = worst_rel.max((s.b_form - s.b_form_closed).abs() / s.b_form_closed.abs());
        let wsq = s.b_form_closed / (8.0 * std::f64::consts::PI * forms.energy) * (1.0 + forms.c.norm_squared()).sqrt();
        worst_const = worst_const.max(s.constancy / wsq);
    }
    Ok(vec![
        Check::positive("optembed.second_variation_positive", min_form, format!("smallest τ- or b-form over {} perturbations", v.perturbations)),
        Check::at_most("optembed.b_form_identity", worst_rel, v.identity_tol, "b-form vs 8πe/√(1+|c|²)·Σ(δb B)²"),
        Check::at_most("optembed.eigenfunction_gradient_identity", worst_const, v.identity_tol, "|∇̃δg|² + δg² constant on span{X̃_i}"),
    ])
}

fn roundtrip_check(ctx: &Context, run: &OptimalRun) -> CliResult<Vec<Check>> {
    let sol = &run.report.solution;
    let text = serde_json::to_string(sol).expect("solution serializes");
    let back: OptimalSolution = serde_json::from_str(&text).map_err(|e| crate::error::CliError::input(e.to_string()))?;
    let r = ctx.config.optimal.ladder[0];
    let a = run.problem.residual_at_radius(sol, &run.problem.reference(sol).op("reference")?, r).op("residual_at_radius")?;
    let b = run.problem.residual_at_radius(&back, &run.problem.reference(&back).op("reference")?, r).op("residual_at_radius")?;
    let rel = (&a - &b).max_abs() / a.max_abs().max(1e-300);
    Ok(vec![Check::at_most("cli.solution_roundtrip", rel, ctx.config.verify.roundtrip_tol, format!("residual at r = {r} after a JSON round trip"))])
}

pub fn verify(ctx: &Context) -> CliResult<ReportDocument> {
    let mut report = ctx.report("verify");
    let mut rng = ChaCha8Rng::seed_from_u64(PERTURBATION_SEED);
    let checks = &mut report.checks;
    guarded(checks, "bondigeom", || geometry_checks(ctx));
    let routes = qle::momentum_routes(&ctx.data).op("bondi_four_momentum");
    match &routes {
        Ok(r) => {
            checks.push(route_check(ctx, r));
            guarded(checks, "qle.observer_linearity", || observer_checks(ctx, r));
        }
        Err(e) => checks.push(Check::failed("qle.momentum_route_agreement", e.to_string())),
    }
    guarded(checks, "qle.invariance", || invariance_checks(ctx, &mut rng));
    guarded(checks, "embed3", || embedding_checks(ctx));
    match run_optimal(ctx, ctx.config.optimal.depth) {
        Ok(run) => {
            checks.extend(run.checks.iter().cloned());
            guarded(checks, "optembed.second_variation", || second_variation_checks(ctx, &run, &mut rng));
            guarded(checks, "cli.solution_roundtrip", || roundtrip_check(ctx, &run));
            report.optimal = Some(run.report);
        }
        Err(e) => checks.push(Check::failed("optembed.solve", e.to_string())),
    }
    if let Ok(r) = routes {
        report.energy_momentum = Some(r.mass_aspect);
        report.routes = Some(r);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_observers_span_four_vectors() {
        let obs = default_observers();
        assert!(obs.len() >= 4);
        assert_eq!(obs[0].a, [0.0; 3]);
    }
}
