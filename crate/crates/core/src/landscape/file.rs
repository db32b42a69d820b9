//! JSON landscape files (`fvland/1`), so experiments can replay a landscape
//! without re-running the synthesis.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::spline::TensorSpline;
use super::synth::{NominalMinimum, Plateau, SynthesisParams};
use super::{GridSpec, Landscape, LandscapeError};

pub const LANDSCAPE_FORMAT: &str = "fvland/1";

#[derive(Debug, Error)]
pub enum LandscapeFileError {
    #[error("landscape file i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("landscape file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported landscape format {found:?} (expected {LANDSCAPE_FORMAT:?})")]
    Version { found: String },
    #[error("landscape file is inconsistent: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Landscape(#[from] LandscapeError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalMin {
    pub pos: [f64; 2],
    pub val: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapeFile {
    pub format: String,
    pub grid: GridSpec,
    pub params: SynthesisParams,
    /// Row-major spline coefficients, `(m + 2)²` entries.
    pub coeffs: Vec<f64>,
    pub plateaus: Vec<Plateau>,
    pub global_min: GlobalMin,
    pub nominal_min: NominalMinimum,
    pub effective_seed: u64,
}

impl From<&Landscape> for LandscapeFile {
    fn from(l: &Landscape) -> Self {
        Self {
            format: LANDSCAPE_FORMAT.to_string(),
            grid: *l.grid(),
            params: *l.params(),
            coeffs: l.spline().coeffs().to_vec(),
            plateaus: l.plateaus().to_vec(),
            global_min: GlobalMin {
                pos: l.global_min_pos(),
                val: l.global_min_val(),
            },
            nominal_min: *l.nominal_minimum(),
            effective_seed: l.effective_seed(),
        }
    }
}

impl LandscapeFile {
    pub fn into_landscape(self) -> Result<Landscape, LandscapeFileError> {
        if self.format != LANDSCAPE_FORMAT {
            return Err(LandscapeFileError::Version { found: self.format });
        }
        let m = self.grid.points_per_dim;
        for p in &self.plateaus {
            if p.i0 + p.width > m || p.j0 + p.width > m {
                return Err(LandscapeFileError::Inconsistent(format!(
                    "plateau at ({}, {}) of width {} exceeds the {m}-point grid",
                    p.i0, p.j0, p.width
                )));
            }
        }
        let spline = TensorSpline::new(self.grid, self.coeffs)?;
        let l = Landscape::from_parts(self.params, spline, self.plateaus, self.nominal_min, self.effective_seed);
        if l.global_min_pos() != self.global_min.pos || l.global_min_val() != self.global_min.val {
            return Err(LandscapeFileError::Inconsistent(
                "recorded global minimum does not match the coefficients".into(),
            ));
        }
        Ok(l)
    }
}

pub fn write_landscape(path: &Path, landscape: &Landscape) -> Result<(), LandscapeFileError> {
    let text = serde_json::to_string_pretty(&LandscapeFile::from(landscape))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

pub fn read_landscape(path: &Path) -> Result<Landscape, LandscapeFileError> {
    let file: LandscapeFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    file.into_landscape()
}
