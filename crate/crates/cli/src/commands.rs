//! Command implementations: the spectrum pipeline, the dressed-level
//! report, and parameter scans.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;

use fluorspec::dressed::{
    assign_peaks, collective_basis_lab, coupling_blocks, dressed_levels, manifold_report,
};
use fluorspec::dynamics::{
    build_hamiltonian_lab, build_hamiltonian_rotating, build_liouvillian, steady_state,
};
use fluorspec::geometry::{build_couplings, validate_strong_regime, EmitterLayout};
use fluorspec::spectrum::{
    detect_peaks, field_operator, g1_correlation, spectrum_eigen, spectrum_fourier,
    SpectrumMethod,
};
use fluorspec::{Drive64, Error as CoreError, Layout64, Spectrum64};

use crate::config::{CurveFormat, RunConfig, ValidationError};
use crate::output::{self, ScanPointRecord, ScanSummaryRecord};
use crate::plot;

/// Reference free energy used for the lab-frame collective basis; the
/// reported interaction energies are independent of this choice.
const OMEGA_A_REFERENCE: f64 = 1000.0;

pub struct SpectrumOutcome {
    pub peak_centers: Vec<f64>,
    pub sideband_centers: Vec<f64>,
}

fn symmetric_grid(window: f64, spacing: f64) -> Vec<f64> {
    let n = (window / spacing).floor() as i64;
    (-n..=n).map(|k| k as f64 * spacing).collect()
}

/// Full one-photon-spectrum pipeline for one configuration, writing every
/// artifact into `dir`.
pub fn run_spectrum_to_dir(cfg: &RunConfig, dir: &Path, plot_enabled: bool) -> Result<SpectrumOutcome> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;

    let couplings = build_couplings(&cfg.layout)?;
    let regime = validate_strong_regime(&couplings, cfg.drive.rabi);
    output::write_strong_regime(&dir.join("strong_regime.json"), &regime)?;

    let liouvillian = build_liouvillian(&cfg.layout, &couplings, &cfg.drive)?;
    let steady = steady_state(&liouvillian)?;
    let field = field_operator(&cfg.layout, cfg.observation_direction)?;

    let spectrum: Spectrum64 = match cfg.method {
        SpectrumMethod::WindowedFourier => {
            let trace = g1_correlation(
                &liouvillian,
                &steady,
                &field,
                cfg.tau_spacing,
                cfg.tau_length,
            )?;
            spectrum_fourier(&trace, cfg.omega_window)?
        }
        SpectrumMethod::EigenDecomposition => {
            let grid = symmetric_grid(cfg.omega_window, cfg.omega_spacing);
            match spectrum_eigen(&liouvillian, &steady, &field, &grid) {
                Ok(s) => s,
                Err(CoreError::IllConditionedEigenbasis { cond }) => {
                    eprintln!(
                        "warning: Liouvillian eigenbasis ill-conditioned (cond ~ {cond:.2e}); \
                         falling back to the windowed Fourier method"
                    );
                    let trace = g1_correlation(
                        &liouvillian,
                        &steady,
                        &field,
                        cfg.tau_spacing,
                        cfg.tau_length,
                    )?;
                    spectrum_fourier(&trace, cfg.omega_window)?
                }
                Err(e) => return Err(e.into()),
            }
        }
    };

    for format in &cfg.formats {
        match format {
            CurveFormat::Csv => {
                output::write_atomic(
                    &dir.join("spectrum.csv"),
                    output::spectrum_csv(&spectrum).as_bytes(),
                )?;
            }
            CurveFormat::Json => {
                output::write_spectrum_json(&dir.join("spectrum.json"), &spectrum)?;
            }
        }
    }

    let peaks = detect_peaks(&spectrum, cfg.min_prominence, cfg.min_separation);
    let record = output::peak_set_record(&peaks, cfg.min_prominence, cfg.min_separation);
    output::write_peaks(&dir.join("peaks.json"), &record)?;

    let h = build_hamiltonian_rotating(&cfg.layout, &couplings, &cfg.drive)?;
    let levels = dressed_levels(&h)?;
    let table = fluorspec::dressed::transition_table(&levels, &field)?;
    let assignment = assign_peaks(&peaks, &table, cfg.assignment_tolerance);
    output::write_assignment(&dir.join("assignment.json"), &assignment)?;

    if plot_enabled {
        output::write_atomic(
            &dir.join("spectrum.svg"),
            plot::spectrum_svg(&spectrum, &peaks).as_bytes(),
        )?;
    }

    let peak_centers = peaks.centers();
    let sideband_centers = peak_centers
        .iter()
        .copied()
        .filter(|c| c.abs() > cfg.min_separation.max(1.0))
        .collect();
    Ok(SpectrumOutcome {
        peak_centers,
        sideband_centers,
    })
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<()> {
    let outcome = run_spectrum_to_dir(cfg, &cfg.out_dir, cfg.plot)?;
    println!(
        "{} emitters, {} peaks ({} sidebands) -> {}",
        cfg.layout.n_emitters(),
        outcome.peak_centers.len(),
        outcome.sideband_centers.len(),
        cfg.out_dir.display()
    );
    Ok(())
}

pub fn cmd_dressed(cfg: &RunConfig) -> Result<()> {
    let dir = &cfg.out_dir;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;

    let couplings = build_couplings(&cfg.layout)?;
    let h = build_hamiltonian_rotating(&cfg.layout, &couplings, &cfg.drive)?;
    let levels = dressed_levels(&h)?;
    let field = field_operator(&cfg.layout, cfg.observation_direction)?;
    let table = fluorspec::dressed::transition_table(&levels, &field)?;
    let blocks = coupling_blocks(&table, None);

    let h_lab = build_hamiltonian_lab(&couplings, OMEGA_A_REFERENCE)?;
    let basis = collective_basis_lab(&h_lab)?;
    let manifold = manifold_report(&basis, &cfg.drive);

    output::write_dressed_levels(&dir.join("dressed_levels.json"), &levels)?;
    output::write_transition_table(&dir.join("transition_table.json"), &table)?;
    output::write_coupling_blocks(&dir.join("coupling_blocks.json"), &blocks)?;
    output::write_level_diagram(
        &dir.join("level_diagram.json"),
        &levels,
        &table,
        &blocks,
        &basis,
        &manifold,
        OMEGA_A_REFERENCE,
    )?;
    if cfg.plot {
        output::write_atomic(
            &dir.join("levels.svg"),
            plot::levels_svg(&levels, &table, &blocks).as_bytes(),
        )?;
    }

    println!(
        "{} dressed levels in {} coupling blocks -> {}",
        levels.dim(),
        blocks.blocks.len(),
        dir.display()
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ScanAxis {
    Rabi,
    Detuning,
    KrScale,
    Theta,
}

impl ScanAxis {
    fn name(self) -> &'static str {
        match self {
            Self::Rabi => "rabi",
            Self::Detuning => "detuning",
            Self::KrScale => "kr_scale",
            Self::Theta => "theta",
        }
    }
}

fn scaled_layout(layout: &Layout64, factor: f64) -> Result<Layout64> {
    if !(factor > 0.0) {
        return Err(ValidationError(format!("kr_scale must be positive, got {factor}")).into());
    }
    let out = match layout {
        EmitterLayout::Geometric {
            positions,
            dipole_direction,
        } => EmitterLayout::geometric(
            positions
                .iter()
                .map(|p| [p[0] * factor, p[1] * factor, p[2] * factor])
                .collect(),
            *dipole_direction,
        )?,
        EmitterLayout::Pairwise {
            pair_kr,
            pair_cos_theta,
        } => EmitterLayout::pairwise(pair_kr * factor, pair_cos_theta.clone())?,
    };
    Ok(out)
}

fn layout_with_theta(layout: &Layout64, theta: f64) -> Result<Layout64> {
    match layout {
        EmitterLayout::Geometric { .. } => Err(ValidationError(
            "theta scan requires a pairwise layout (geometric angles follow from the dipole)"
                .into(),
        )
        .into()),
        EmitterLayout::Pairwise { pair_kr, .. } => {
            let n = pair_kr.nrows();
            let mut cos = ndarray::Array2::zeros((n, n));
            let c = theta.cos();
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        cos[[i, j]] = c;
                    }
                }
            }
            Ok(EmitterLayout::pairwise(pair_kr.clone(), cos)?)
        }
    }
}

fn point_config(cfg: &RunConfig, axis: ScanAxis, value: f64) -> Result<RunConfig> {
    let mut out = cfg.clone();
    match axis {
        ScanAxis::Rabi => {
            out.drive = Drive64::new(value, cfg.drive.detuning, cfg.drive.wave_vector_direction)
                .map_err(|e| ValidationError(e.to_string()))?;
        }
        ScanAxis::Detuning => {
            out.drive = Drive64::new(cfg.drive.rabi, value, cfg.drive.wave_vector_direction)
                .map_err(|e| ValidationError(e.to_string()))?;
        }
        ScanAxis::KrScale => out.layout = scaled_layout(&cfg.layout, value)?,
        ScanAxis::Theta => out.layout = layout_with_theta(&cfg.layout, value)?,
    }
    Ok(out)
}

/// Run one spectrum per axis value; per-point failures are recorded in the
/// summary and do not stop the scan. Points execute concurrently.
pub fn cmd_scan(cfg: &RunConfig, axis: ScanAxis, values: &[f64]) -> Result<()> {
    let scan_dir = cfg.out_dir.join(format!("scan_{}", axis.name()));
    fs::create_dir_all(&scan_dir)
        .with_context(|| format!("creating {}", scan_dir.display()))?;

    let points: Vec<ScanPointRecord> = values
        .par_iter()
        .enumerate()
        .map(|(idx, &value)| {
            let dir: PathBuf = scan_dir.join(format!("point_{idx:03}_{value}"));
            let run = point_config(cfg, axis, value)
                .and_then(|point_cfg| run_spectrum_to_dir(&point_cfg, &dir, false));
            match run {
                Ok(outcome) => ScanPointRecord {
                    value,
                    status: "ok",
                    error: None,
                    sideband_centers: outcome.sideband_centers,
                },
                Err(e) => ScanPointRecord {
                    value,
                    status: "error",
                    error: Some(format!("{e:#}")),
                    sideband_centers: Vec::new(),
                },
            }
        })
        .collect();

    let summary = ScanSummaryRecord {
        schema_version: output::SCHEMA_VERSION,
        axis: axis.name().to_string(),
        points,
    };
    output::write_scan_summary(&scan_dir.join("summary.json"), &summary)?;
    output::write_atomic(
        &scan_dir.join("summary.csv"),
        output::scan_summary_csv(&summary).as_bytes(),
    )?;

    let failed = summary
        .points
        .iter()
        .filter(|p| p.status == "error")
        .count();
    println!(
        "scan over {} ({} points, {} failed) -> {}",
        axis.name(),
        summary.points.len(),
        failed,
        scan_dir.display()
    );
    Ok(())
}
