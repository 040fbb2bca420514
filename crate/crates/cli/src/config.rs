//! TOML run configuration: parsing, strict validation, and conversion into
//! the solver types.
//!
//! Unknown keys are rejected rather than ignored; a typo in a physics config
//! must never silently fall back to a default.

use std::path::PathBuf;

use ndarray::Array2;
use serde::Deserialize;

use fluorspec::dynamics::DriveParameters;
use fluorspec::geometry::EmitterLayout;
use fluorspec::spectrum::SpectrumMethod;
use fluorspec::{Drive64, Layout64};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    layout: LayoutSection,
    drive: DriveSection,
    #[serde(default)]
    spectrum: SpectrumSection,
    #[serde(default)]
    peaks: PeaksSection,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayoutSection {
    mode: Mode,
    positions: Option<Vec<[f64; 3]>>,
    dipole_direction: Option<[f64; 3]>,
    pair_kr: Option<Vec<Vec<f64>>>,
    pair_cos_theta: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Geometric,
    Pairwise,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DriveSection {
    rabi: f64,
    #[serde(default)]
    detuning: f64,
    #[serde(default = "default_k_direction")]
    wave_vector_direction: [f64; 3],
}

fn default_k_direction() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SpectrumSection {
    tau_spacing: f64,
    tau_length: f64,
    omega_window: f64,
    omega_spacing: f64,
    method: MethodChoice,
    observation_direction: Option<[f64; 3]>,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self {
            tau_spacing: 2.5e-4,
            tau_length: 40.0,
            omega_window: 500.0,
            omega_spacing: 0.05,
            method: MethodChoice::Fourier,
            observation_direction: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum MethodChoice {
    Fourier,
    Eigen,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct PeaksSection {
    min_prominence: f64,
    min_separation: f64,
    assignment_tolerance: f64,
}

impl Default for PeaksSection {
    fn default() -> Self {
        Self {
            min_prominence: 1.0,
            min_separation: 2.0,
            assignment_tolerance: 1.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OutputSection {
    directory: PathBuf,
    formats: Vec<CurveFormat>,
    plot: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![CurveFormat::Csv],
            plot: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum CurveFormat {
    Csv,
    Json,
}

/// Fully validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub layout: Layout64,
    pub drive: Drive64,
    pub tau_spacing: f64,
    pub tau_length: f64,
    pub omega_window: f64,
    pub omega_spacing: f64,
    pub method: SpectrumMethod,
    pub observation_direction: [f64; 3],
    pub min_prominence: f64,
    pub min_separation: f64,
    pub assignment_tolerance: f64,
    pub out_dir: PathBuf,
    pub formats: Vec<CurveFormat>,
    pub plot: bool,
}

/// A configuration problem: either the document does not parse or a value
/// violates a solver precondition. Distinguished from numerical failures for
/// the exit-code contract.
#[derive(Debug)]
pub struct ValidationError(pub String);

impl std::fmt::Display for ValidationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid configuration: {}", self.0)
    }
}

impl std::error::Error for ValidationError {}

fn square_matrix(name: &str, rows: &[Vec<f64>]) -> Result<Array2<f64>, ValidationError> {
    let n = rows.len();
    let mut m = Array2::zeros((n, n));
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(ValidationError(format!(
                "layout.{name}: row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        for (j, &v) in row.iter().enumerate() {
            m[[i, j]] = v;
        }
    }
    Ok(m)
}

fn normalize(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if n <= 0.0 || !n.is_finite() {
        return None;
    }
    Some([v[0] / n, v[1] / n, v[2] / n])
}

/// A unit vector orthogonal to `d`.
fn orthogonal_direction(d: [f64; 3]) -> [f64; 3] {
    // start from the coordinate axis least aligned with d
    let axes = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut best = axes[0];
    let mut best_dot = f64::INFINITY;
    for a in axes {
        let dot = (a[0] * d[0] + a[1] * d[1] + a[2] * d[2]).abs();
        if dot < best_dot {
            best_dot = dot;
            best = a;
        }
    }
    let dot = best[0] * d[0] + best[1] * d[1] + best[2] * d[2];
    normalize([
        best[0] - dot * d[0],
        best[1] - dot * d[1],
        best[2] - dot * d[2],
    ])
    .expect("axis least aligned with a unit vector cannot be parallel to it")
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ValidationError> {
    let file: ConfigFile =
        toml::from_str(text).map_err(|e| ValidationError(e.to_string()))?;

    let layout = match file.layout.mode {
        Mode::Geometric => {
            let positions = file.layout.positions.ok_or_else(|| {
                ValidationError("layout.positions is required in geometric mode".into())
            })?;
            let dipole = file.layout.dipole_direction.ok_or_else(|| {
                ValidationError("layout.dipole_direction is required in geometric mode".into())
            })?;
            if file.layout.pair_kr.is_some() || file.layout.pair_cos_theta.is_some() {
                return Err(ValidationError(
                    "layout.pair_* keys are not allowed in geometric mode".into(),
                ));
            }
            EmitterLayout::geometric(positions, dipole)
                .map_err(|e| ValidationError(e.to_string()))?
        }
        Mode::Pairwise => {
            let kr = file.layout.pair_kr.ok_or_else(|| {
                ValidationError("layout.pair_kr is required in pairwise mode".into())
            })?;
            let cos = file.layout.pair_cos_theta.ok_or_else(|| {
                ValidationError("layout.pair_cos_theta is required in pairwise mode".into())
            })?;
            if file.layout.positions.is_some() || file.layout.dipole_direction.is_some() {
                return Err(ValidationError(
                    "layout.positions/dipole_direction are not allowed in pairwise mode".into(),
                ));
            }
            let kr = square_matrix("pair_kr", &kr)?;
            let cos = square_matrix("pair_cos_theta", &cos)?;
            EmitterLayout::pairwise(kr, cos).map_err(|e| ValidationError(e.to_string()))?
        }
    };

    let drive = DriveParameters::new(
        file.drive.rabi,
        file.drive.detuning,
        normalize(file.drive.wave_vector_direction).ok_or_else(|| {
            ValidationError("drive.wave_vector_direction must be a nonzero vector".into())
        })?,
    )
    .map_err(|e| ValidationError(format!("drive: {e}")))?;

    let s = file.spectrum;
    if !(s.tau_spacing > 0.0) {
        return Err(ValidationError("spectrum.tau_spacing must be positive".into()));
    }
    if !(s.tau_length > s.tau_spacing) {
        return Err(ValidationError(
            "spectrum.tau_length must exceed tau_spacing".into(),
        ));
    }
    if !(s.omega_window > 0.0) {
        return Err(ValidationError("spectrum.omega_window must be positive".into()));
    }
    if !(s.omega_spacing > 0.0) {
        return Err(ValidationError("spectrum.omega_spacing must be positive".into()));
    }
    let observation_direction = match s.observation_direction {
        Some(v) => normalize(v).ok_or_else(|| {
            ValidationError("spectrum.observation_direction must be a nonzero vector".into())
        })?,
        None => match &layout {
            // orthogonal to the dipole axis; in pairwise mode the spectrum
            // is direction-independent (all emitters at the origin)
            EmitterLayout::Geometric {
                dipole_direction, ..
            } => orthogonal_direction(*dipole_direction),
            EmitterLayout::Pairwise { .. } => [0.0, 0.0, 1.0],
        },
    };

    let p = file.peaks;
    if !(p.min_prominence > 0.0) {
        return Err(ValidationError("peaks.min_prominence must be positive".into()));
    }
    if !(p.min_separation >= 0.0) {
        return Err(ValidationError("peaks.min_separation must be >= 0".into()));
    }
    if !(p.assignment_tolerance > 0.0) {
        return Err(ValidationError(
            "peaks.assignment_tolerance must be positive".into(),
        ));
    }

    let o = file.output;
    if o.formats.is_empty() {
        return Err(ValidationError("output.formats must not be empty".into()));
    }

    Ok(RunConfig {
        layout,
        drive,
        tau_spacing: s.tau_spacing,
        tau_length: s.tau_length,
        omega_window: s.omega_window,
        omega_spacing: s.omega_spacing,
        method: match s.method {
            MethodChoice::Fourier => SpectrumMethod::WindowedFourier,
            MethodChoice::Eigen => SpectrumMethod::EigenDecomposition,
        },
        observation_direction,
        min_prominence: p.min_prominence,
        min_separation: p.min_separation,
        assignment_tolerance: p.assignment_tolerance,
        out_dir: o.directory,
        formats: o.formats,
        plot: o.plot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unknown_keys_with_location() {
        let text = r#"
[layout]
mode = "geometric"
positions = [[0.0, 0.0, 0.0]]
dipole_direction = [0.0, 0.0, 1.0]
rabbit = 3

[drive]
rabi = 1.0
"#;
        let err = parse_config(text).unwrap_err();
        assert!(err.0.contains("rabbit"), "{}", err.0);
        assert!(err.0.contains("line"), "expected location info: {}", err.0);
    }

    #[test]
    fn rejects_negative_rabi() {
        let text = r#"
[layout]
mode = "geometric"
positions = [[0.0, 0.0, 0.0]]
dipole_direction = [0.0, 0.0, 1.0]

[drive]
rabi = -1.0
"#;
        let err = parse_config(text).unwrap_err();
        assert!(err.0.contains("rabi"), "{}", err.0);
    }

    #[test]
    fn rejects_asymmetric_pair_matrix() {
        let text = r#"
[layout]
mode = "pairwise"
pair_kr = [[0.0, 0.01], [0.02, 0.0]]
pair_cos_theta = [[0.0, 0.5], [0.5, 0.0]]

[drive]
rabi = 1.0
"#;
        let err = parse_config(text).unwrap_err();
        assert!(err.0.contains("symmetric"), "{}", err.0);
    }

    #[test]
    fn default_observation_direction_is_dipole_orthogonal() {
        let text = r#"
[layout]
mode = "geometric"
positions = [[0.0, 0.0, 0.0], [0.5, 0.0, 0.0]]
dipole_direction = [0.0, 0.6, 0.8]

[drive]
rabi = 2.0
"#;
        let cfg = parse_config(text).unwrap();
        let d = [0.0, 0.6, 0.8];
        let n = cfg.observation_direction;
        let dot = d[0] * n[0] + d[1] * n[1] + d[2] * n[2];
        assert!(dot.abs() < 1e-12);
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}
