//! Input documents: TOML with a `version` key, a grid block and the asymptotic fields.
//!
//! Each field is given by exactly one of `constant`, `samples` (node values, θ-major,
//! `n_theta × n_phi`) or `harmonics` (`[l, m, value]` triples in the real orthonormal basis).

use std::path::Path;
use std::sync::Arc;

use qle_core::bondigeom::{self, BondiData};
use qle_core::{Field, Grid, Spectrum, Tangent};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const INPUT_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDocument {
    pub version: u32,
    #[serde(default)]
    pub retarded_time: f64,
    pub grid: Option<GridSpec>,
    pub fields: Fields,
    /// Spatial part `a` of the observer `T₀ = (√(1+|a|²), a)`.
    pub observer: Option<[f64; 3]>,
    pub config: Option<toml::Table>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_theta: usize,
    pub n_phi: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fields {
    pub m: FieldSpec,
    #[serde(rename = "X")]
    pub x: Option<FieldSpec>,
    #[serde(rename = "Y")]
    pub y: Option<FieldSpec>,
    /// Electric and magnetic potentials of the shear, alternative to `X`, `Y`.
    pub shear: Option<Potentials>,
    /// Covariant coordinate components of `W̃`.
    #[serde(rename = "W_theta")]
    pub w_theta: Option<FieldSpec>,
    #[serde(rename = "W_phi")]
    pub w_phi: Option<FieldSpec>,
    /// Potentials of `W̃`, alternative to `W_theta`, `W_phi`.
    pub shift: Option<Potentials>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Potentials {
    pub electric: Option<FieldSpec>,
    pub magnetic: Option<FieldSpec>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub constant: Option<f64>,
    pub samples: Option<Vec<f64>>,
    pub harmonics: Option<Vec<(usize, i64, f64)>>,
}

/// A parsed document together with the SHA-256 of its bytes.
#[derive(Debug, Clone)]
pub struct LoadedInput {
    pub doc: InputDocument,
    pub sha256: String,
}

pub fn load(path: &Path) -> CliResult<LoadedInput> {
    let bytes = std::fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let sha256 = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
    let text = std::str::from_utf8(&bytes).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let doc = parse_str(text).map_err(|e| match e {
        CliError::Input(msg) => CliError::input(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    Ok(LoadedInput { doc, sha256 })
}

pub fn parse_str(text: &str) -> CliResult<InputDocument> {
    let doc: InputDocument = toml::from_str(text).map_err(|e| CliError::input(e.to_string().trim_end().to_string()))?;
    if doc.version != INPUT_VERSION {
        return Err(CliError::input(format!("version: unsupported version {} (expected {INPUT_VERSION})", doc.version)));
    }
    doc.check_exclusive()?;
    Ok(doc)
}

impl FieldSpec {
    fn build(&self, name: &str, grid: &Arc<Grid>) -> CliResult<Field> {
        let given = [self.constant.is_some(), self.samples.is_some(), self.harmonics.is_some()];
        match given.iter().filter(|&&b| b).count() {
            0 => return Err(CliError::input(format!("{name}: no representation given (constant, samples or harmonics)"))),
            1 => {}
            _ => return Err(CliError::input(format!("{name}: more than one representation given; use exactly one of constant, samples, harmonics"))),
        }
        let field = if let Some(c) = self.constant {
            Field::constant(grid, c)
        } else if let Some(values) = &self.samples {
            if values.len() != grid.len() {
                return Err(CliError::input(format!(
                    "{name}.samples: expected {} values (n_theta {} × n_phi {}), found {}",
                    grid.len(),
                    grid.n_theta(),
                    grid.n_phi(),
                    values.len()
                )));
            }
            Field::from_values(grid, values.clone()).map_err(|e| CliError::input(format!("{name}.samples: {e}")))?
        } else {
            let triples = self.harmonics.as_deref().unwrap_or_default();
            let mut spec = Spectrum::zeros(grid.l_max());
            let mut seen = std::collections::BTreeSet::new();
            for (i, &(l, m, v)) in triples.iter().enumerate() {
                if m.unsigned_abs() as usize > l {
                    return Err(CliError::input(format!("{name}.harmonics[{i}]: order m = {m} exceeds degree l = {l}")));
                }
                if l > grid.l_max() {
                    return Err(CliError::input(format!(
                        "{name}.harmonics[{i}]: degree l = {l} exceeds the band limit L_max = {} of n_theta = {}",
                        grid.l_max(),
                        grid.n_theta()
                    )));
                }
                if !seen.insert((l, m)) {
                    return Err(CliError::input(format!("{name}.harmonics[{i}]: duplicate coefficient (l, m) = ({l}, {m})")));
                }
                spec.set(l, m, v);
            }
            Field::synthesize(grid, &spec).map_err(|e| CliError::input(format!("{name}.harmonics: {e}")))?
        };
        if !field.is_finite() {
            return Err(CliError::input(format!("{name}: non-finite value")));
        }
        Ok(field)
    }
}

fn optional(spec: &Option<FieldSpec>, name: &str, grid: &Arc<Grid>) -> CliResult<Field> {
    spec.as_ref().map_or_else(|| Ok(Field::zeros(grid)), |s| s.build(name, grid))
}

impl Potentials {
    fn build(&self, name: &str, grid: &Arc<Grid>) -> CliResult<(Field, Field)> {
        Ok((optional(&self.electric, &format!("{name}.electric"), grid)?, optional(&self.magnetic, &format!("{name}.magnetic"), grid)?))
    }
}

impl InputDocument {
    fn check_exclusive(&self) -> CliResult<()> {
        let f = &self.fields;
        if f.shear.is_some() && (f.x.is_some() || f.y.is_some()) {
            return Err(CliError::input("fields: shear potentials and X/Y components are mutually exclusive"));
        }
        if f.shift.is_some() && (f.w_theta.is_some() || f.w_phi.is_some()) {
            return Err(CliError::input("fields: shift potentials and W_theta/W_phi components are mutually exclusive"));
        }
        Ok(())
    }

    /// Grid from `n_theta` (flag or config) falling back to the document's grid block.
    pub fn grid(&self, n_theta_override: Option<usize>, default_n_theta: usize) -> CliResult<Arc<Grid>> {
        let (n_theta, n_phi) = match (n_theta_override, &self.grid) {
            (Some(n), _) => (n, 2 * n),
            (None, Some(g)) => (g.n_theta, g.n_phi.unwrap_or(2 * g.n_theta)),
            (None, None) => (default_n_theta, 2 * default_n_theta),
        };
        Grid::with_n_phi(n_theta, n_phi).map_err(|e| CliError::input(format!("grid: {e}")))
    }

    /// Synthesizes all fields on `grid` and checks the determinant condition of the induced metric.
    pub fn bondi_data(&self, grid: &Arc<Grid>, det_tol: f64) -> CliResult<BondiData> {
        let f = &self.fields;
        let m = f.m.build("fields.m", grid)?;
        let (x, y) = match &f.shear {
            Some(p) => {
                let (e, b) = p.build("fields.shear", grid)?;
                bondigeom::shear_from_potentials(&e, &b)
            }
            None => (optional(&f.x, "fields.X", grid)?, optional(&f.y, "fields.Y", grid)?),
        };
        let wt = match &f.shift {
            Some(p) => {
                let (e, b) = p.build("fields.shift", grid)?;
                bondigeom::shift_from_potentials(&e, &b)
            }
            None if f.w_theta.is_none() && f.w_phi.is_none() => Tangent::zeros(grid),
            None => {
                let wt = optional(&f.w_theta, "fields.W_theta", grid)?;
                let wp = optional(&f.w_phi, "fields.W_phi", grid)?;
                Tangent::from_covariant(&wt, &wp).map_err(|e| CliError::input(format!("fields.W: {e}")))?
            }
        };
        if !self.retarded_time.is_finite() {
            return Err(CliError::input("retarded_time: non-finite value"));
        }
        let data = BondiData::new(m, x, y, wt, self.retarded_time).map_err(|e| CliError::input(format!("fields: {e}")))?;
        let det = bondigeom::induced_metric(&data, bondigeom::DEFAULT_TRUNC).det_residual();
        if det.is_nan() || det > det_tol {
            return Err(CliError::input(format!("fields: induced metric violates det σ = r⁴ sin²θ by {det:.3e} (tol {det_tol:.1e})")));
        }
        Ok(data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qle_core::s2spectral::harmonic;

    fn grid() -> Arc<Grid> {
        Grid::new(8).unwrap()
    }

    #[test]
    fn minimal_document_is_schwarzschild() {
        let doc = parse_str("version = 1\n[fields.m]\nconstant = 2.0\n").unwrap();
        let g = grid();
        let data = doc.bondi_data(&g, 1e-12).unwrap();
        assert_eq!(data.m, Field::constant(&g, 2.0));
        assert_eq!(data.x.max_abs(), 0.0);
        assert_eq!(data.wt.max_abs(), 0.0);
    }

    #[test]
    fn harmonics_synthesized() {
        let doc = parse_str("version = 1\n[fields.m]\nharmonics = [[0, 0, 1.5], [2, -1, 0.25]]\n").unwrap();
        let g = grid();
        let data = doc.bondi_data(&g, 1e-12).unwrap();
        let want = &harmonic(&g, 0, 0).scale(1.5) + &harmonic(&g, 2, -1).scale(0.25);
        assert!((&data.m - &want).max_abs() < 1e-15);
    }

    #[test]
    fn two_representations_rejected() {
        let doc = parse_str("version = 1\n[fields.m]\nconstant = 1.0\nharmonics = [[0, 0, 1.0]]\n").unwrap();
        let err = doc.bondi_data(&grid(), 1e-12).unwrap_err();
        assert!(err.to_string().contains("fields.m"), "{err}");
    }

    #[test]
    fn band_limit_overflow_rejected() {
        let doc = parse_str("version = 1\n[fields.m]\nharmonics = [[8, 0, 1.0]]\n").unwrap();
        let err = doc.bondi_data(&grid(), 1e-12).unwrap_err();
        assert!(err.to_string().contains("band limit"), "{err}");
    }

    #[test]
    fn bad_order_and_duplicates_rejected() {
        let g = grid();
        let doc = parse_str("version = 1\n[fields.m]\nharmonics = [[1, 2, 1.0]]\n").unwrap();
        assert!(doc.bondi_data(&g, 1e-12).is_err());
        let doc = parse_str("version = 1\n[fields.m]\nharmonics = [[1, 0, 1.0], [1, 0, 2.0]]\n").unwrap();
        assert!(doc.bondi_data(&g, 1e-12).unwrap_err().to_string().contains("duplicate"));
    }

    #[test]
    fn sample_count_checked() {
        let doc = parse_str("version = 1\n[fields.m]\nsamples = [1.0, 2.0]\n").unwrap();
        assert!(doc.bondi_data(&grid(), 1e-12).unwrap_err().to_string().contains("expected 128"));
    }

    #[test]
    fn unknown_keys_and_versions_rejected() {
        assert!(parse_str("version = 1\n[fields.m]\nconstant = 1.0\n[fields.Z]\nconstant = 1.0\n").is_err());
        assert!(parse_str("version = 2\n[fields.m]\nconstant = 1.0\n").is_err());
        assert!(parse_str("[fields.m]\nconstant = 1.0\n").is_err());
    }

    #[test]
    fn shear_forms_exclusive() {
        let text = "version = 1\n[fields.m]\nconstant = 1.0\n[fields.X]\nconstant = 0.0\n[fields.shear.electric]\nharmonics = [[2, 0, 0.1]]\n";
        assert!(parse_str(text).is_err());
    }

    #[test]
    fn potentials_match_library() {
        let text = "version = 1\n[fields.m]\nconstant = 1.0\n[fields.shear.electric]\nharmonics = [[2, 1, 0.15]]\n[fields.shift.magnetic]\nharmonics = [[3, 1, 0.05]]\n";
        let g = grid();
        let data = parse_str(text).unwrap().bondi_data(&g, 1e-12).unwrap();
        let (x, _) = bondigeom::shear_from_potentials(&harmonic(&g, 2, 1).scale(0.15), &Field::zeros(&g));
        assert!((&data.x - &x).max_abs() < 1e-14);
        let wt = bondigeom::shift_from_potentials(&Field::zeros(&g), &harmonic(&g, 3, 1).scale(0.05));
        assert!(data.wt.sub(&wt).max_abs() < 1e-14);
    }

    #[test]
    fn grid_precedence() {
        let doc = parse_str("version = 1\n[grid]\nn_theta = 12\n[fields.m]\nconstant = 1.0\n").unwrap();
        assert_eq!(doc.grid(None, 32).unwrap().n_theta(), 12);
        assert_eq!(doc.grid(Some(16), 32).unwrap().n_theta(), 16);
        let bare = parse_str("version = 1\n[fields.m]\nconstant = 1.0\n").unwrap();
        assert_eq!(bare.grid(None, 20).unwrap().n_phi(), 40);
    }
}
