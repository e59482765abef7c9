use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid with n_theta = {n_theta} cannot represent degree {requested} (max {max})")]
    GridTooSmall { n_theta: usize, requested: usize, max: usize },

    #[error("operands live on different grids")]
    IncompatibleGrids,

    #[error("source is not in the range of the stability operator: l=0 projection {l0:.3e}, l=1 projection {l1:.3e} (relative to norm {norm:.3e})")]
    Solvability { l0: f64, l1: f64, norm: f64 },

    #[error("{op}: leading coefficient vanishes or has the wrong sign at node {node} (value {value:.3e})")]
    DegenerateLeading { op: &'static str, node: usize, value: f64 },

    #[error("{op}: leading power {power} not admissible")]
    BadLeadingPower { op: &'static str, power: i32 },

    #[error("{op}: requested coefficient r^{power} lies beyond the trusted order r^{trusted}")]
    Untrusted { op: &'static str, power: i32, trusted: i32 },

    #[error("energy-momentum ({e:.6}, |p| = {p_norm:.6}) is not timelike")]
    NotTimelike { e: f64, p_norm: f64 },

    #[error("matrix is not a Lorentz transformation (|L^T eta L - eta| = {residual:.3e})")]
    NotLorentz { residual: f64 },

    #[error("{what}: independent routes disagree ({a:.12e} vs {b:.12e})")]
    RouteDisagreement { what: &'static str, a: f64, b: f64 },

    #[error("finite-radius ladder did not converge: {reason}")]
    LadderNonConvergence { reason: String },

    #[error("linearized embedding equation has no solution at this band limit (residual {residual:.3e})")]
    NotEmbeddable { residual: f64 },

    #[error("embedding is inconsistent: {reason}")]
    InconsistentEmbedding { reason: String },

    #[error("singular linear system in {what}")]
    Singular { what: &'static str },

    #[error("invalid input: {0}")]
    Invalid(String),
}
