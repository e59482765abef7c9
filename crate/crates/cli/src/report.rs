//! Report documents and their text rendering.

use std::fmt::Write;

use qle_core::optembed::{DecayFit, LeadingReport, OptimalSolution, StepReport};
use qle_core::qle::{EnergyMomentum, MomentumRoutes, QleLimit};
use qle_core::Grid;
use serde::{Deserialize, Serialize};

use crate::config::Config;

pub const REPORT_FORMAT: &str = "qle-report";
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub format: String,
    pub version: u32,
    pub command: String,
    pub input_sha256: String,
    pub grid: GridEcho,
    pub config: Config,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_momentum: Option<EnergyMomentum>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub routes: Option<MomentumRoutes>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub energies: Vec<ObserverEnergy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimal: Option<OptimalReport>,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridEcho {
    pub n_theta: usize,
    pub n_phi: usize,
    pub l_max: usize,
}

impl GridEcho {
    pub fn of(g: &Grid) -> Self {
        Self { n_theta: g.n_theta(), n_phi: g.n_phi(), l_max: g.l_max() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObserverEnergy {
    pub observer: [f64; 3],
    pub t0: [f64; 4],
    pub limit: QleLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalReport {
    pub solution: OptimalSolution,
    pub leading: LeadingReport,
    pub steps: Vec<StepReport>,
    pub decay: Vec<DecayRow>,
}

/// Residual decay of the solution truncated after `order` induction steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub order: usize,
    pub required_exponent: f64,
    /// Fit over the whole ladder.
    pub fit: DecayFit,
    /// Absolute roundoff floor of the residual sup norm.
    pub floor: f64,
    /// Fit over the ladder points above `floor`, when at least two remain.
    pub exponent_above_floor: Option<f64>,
}

/// One row of the invariant table. `measured` is absent when the computation itself failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    /// Passes when `measured <= tolerance`.
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), measured: Some(measured), tolerance, pass: measured <= tolerance, detail: detail.into() }
    }

    /// Passes when `measured >= tolerance`.
    pub fn at_least(name: impl Into<String>, measured: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), measured: Some(measured), tolerance, pass: measured >= tolerance, detail: detail.into() }
    }

    /// Passes when `measured > 0`.
    pub fn positive(name: impl Into<String>, measured: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), measured: Some(measured), tolerance: 0.0, pass: measured > 0.0, detail: detail.into() }
    }

    pub fn failed(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self { name: name.into(), measured: None, tolerance: f64::NAN, pass: false, detail: detail.into() }
    }
}

impl ReportDocument {
    pub fn new(command: &str, input_sha256: &str, grid: &Grid, config: &Config) -> Self {
        Self {
            format: REPORT_FORMAT.into(),
            version: REPORT_VERSION,
            command: command.into(),
            input_sha256: input_sha256.into(),
            grid: GridEcho::of(grid),
            config: config.clone(),
            energy_momentum: None,
            routes: None,
            energies: Vec::new(),
            optimal: None,
            checks: Vec::new(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let w = &mut out;
        let _ = writeln!(w, "qle {}  input sha256 {}", self.command, self.input_sha256);
        let _ = writeln!(w, "grid  n_theta {}  n_phi {}  L_max {}", self.grid.n_theta, self.grid.n_phi, self.grid.l_max);
        if let Some(em) = &self.energy_momentum {
            let _ = writeln!(w, "energy-momentum  e = {:.12}  p = {}", em.e, vec3(&em.p));
        }
        if let Some(r) = &self.routes {
            let _ = writeln!(w, "  mass-aspect route  e = {:.12}  p = {}", r.mass_aspect.e, vec3(&r.mass_aspect.p));
            let _ = writeln!(w, "  geometric route    e = {:.12}  p = {}", r.geometric.e, vec3(&r.geometric.p));
        }
        for o in &self.energies {
            let l = &o.limit;
            let _ = writeln!(w, "observer a = {}", vec3(&o.observer));
            let _ = writeln!(w, "  limit  closed form {:.12}  series {:.12}  ladder {:.12}", l.closed_form, l.series, l.ladder.limit);
            match l.ladder.exponent {
                Some(q) => {
                    let _ = writeln!(w, "  ladder leading decay exponent {q:.3}");
                }
                None => {
                    let _ = writeln!(w, "  ladder constant to roundoff");
                }
            }
            for (r, v) in l.ladder.radii.iter().zip(&l.ladder.values) {
                let _ = writeln!(w, "    r = {r:<8} E = {v:.12}");
            }
        }
        if let Some(opt) = &self.optimal {
            let s = &opt.solution;
            let _ = writeln!(w, "optimal embedding  order {}  c = {}", s.order(), vec3(&s.c));
            for (k, b) in s.chain.generators.iter().enumerate() {
                let _ = writeln!(w, "  b^(-{k}) boost part {}", vec3(&[b[0][1], b[0][2], b[0][3]]));
            }
            for (k, spec) in s.tau_spectra.iter().enumerate() {
                let norm = spec.iter().map(|x| x * x).sum::<f64>().sqrt();
                let _ = writeln!(w, "  tau^(-{k}) coefficient norm {norm:.6e}");
            }
            for row in &opt.decay {
                let above = row.exponent_above_floor.map_or_else(|| "-".to_string(), |q| format!("{q:.3}"));
                let _ = writeln!(
                    w,
                    "  decay order {}  exponent {:.3}  above floor {}  (required >= {:.2})",
                    row.order, row.fit.exponent, above, row.required_exponent
                );
                for (r, n) in row.fit.radii.iter().zip(&row.fit.norms) {
                    let _ = writeln!(w, "    r = {r:<8} |R| = {n:.6e}");
                }
            }
        }
        if !self.checks.is_empty() {
            let _ = writeln!(w, "checks");
            for c in &self.checks {
                let measured = c.measured.map_or_else(|| "-".to_string(), |m| format!("{m:.3e}"));
                let _ = writeln!(
                    w,
                    "  [{}] {}  measured {}  tol {:.1e}  {}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    measured,
                    c.tolerance,
                    c.detail
                );
            }
            let passed = self.checks.iter().filter(|c| c.pass).count();
            let _ = writeln!(w, "summary: {passed} of {} checks passed", self.checks.len());
        }
        out
    }
}

fn vec3(v: &[f64; 3]) -> String {
    format!("({:.12}, {:.12}, {:.12})", v[0], v[1], v[2])
}
