//! Serialization of run artifacts. All files are written atomically
//! (temp file + rename) and deterministically: identical inputs produce
//! byte-identical outputs.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use fluorspec::dressed::{CollectiveBasis, ExchangeParity, ManifoldReport};
use fluorspec::geometry::StrongRegimeReport;
use fluorspec::spectrum::{Peak, PeakSet, SpectrumMethod};
use fluorspec::{
    CouplingBlocks64, DressedLevels64, PeakAssignment64, PeakSet64, Spectrum64,
    TransitionTable64,
};

pub const SCHEMA_VERSION: u32 = 1;

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    {
        let mut f = fs::File::create(&tmp)
            .with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// `omega,S` rows with 12 significant digits.
pub fn spectrum_csv(spectrum: &Spectrum64) -> String {
    let mut out = String::from("omega,S\n");
    for (om, v) in spectrum.omega.iter().zip(spectrum.values.iter()) {
        out.push_str(&format!("{om:.11e},{v:.11e}\n"));
    }
    out
}

pub fn method_name(method: SpectrumMethod) -> &'static str {
    match method {
        SpectrumMethod::WindowedFourier => "windowed_fourier",
        SpectrumMethod::EigenDecomposition => "eigen_decomposition",
    }
}

#[derive(Serialize)]
pub struct SpectrumRecord<'a> {
    pub schema_version: u32,
    pub method: &'static str,
    pub coherent_weight: f64,
    pub omega: &'a [f64],
    pub values: &'a [f64],
}

pub fn write_spectrum_json(path: &Path, spectrum: &Spectrum64) -> Result<()> {
    write_json(
        path,
        &SpectrumRecord {
            schema_version: SCHEMA_VERSION,
            method: method_name(spectrum.method),
            coherent_weight: spectrum.coherent_weight,
            omega: &spectrum.omega,
            values: &spectrum.values,
        },
    )
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
pub struct PeakRecord {
    pub center: f64,
    pub height: f64,
    pub half_width: f64,
    pub prominence: f64,
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
pub struct PeakSetRecord {
    pub schema_version: u32,
    pub min_prominence: f64,
    pub min_separation: f64,
    pub peaks: Vec<PeakRecord>,
}

pub fn peak_set_record(
    peaks: &PeakSet64,
    min_prominence: f64,
    min_separation: f64,
) -> PeakSetRecord {
    PeakSetRecord {
        schema_version: SCHEMA_VERSION,
        min_prominence,
        min_separation,
        peaks: peaks
            .peaks
            .iter()
            .map(|p| PeakRecord {
                center: p.center,
                height: p.height,
                half_width: p.half_width,
                prominence: p.prominence,
            })
            .collect(),
    }
}

impl PeakSetRecord {
    /// Reconstruct the solver-side peak set from a report read back from
    /// disk. Used by downstream tooling and the round-trip test.
    #[allow(dead_code)]
    pub fn to_peak_set(&self) -> PeakSet<f64> {
        PeakSet {
            peaks: self
                .peaks
                .iter()
                .map(|p| Peak {
                    center: p.center,
                    height: p.height,
                    half_width: p.half_width,
                    prominence: p.prominence,
                })
                .collect(),
        }
    }
}

pub fn write_peaks(path: &Path, record: &PeakSetRecord) -> Result<()> {
    write_json(path, record)
}

#[derive(Serialize)]
struct MatchRecord {
    peak_index: usize,
    center: f64,
    transitions: Vec<[usize; 2]>,
}

#[derive(Serialize)]
struct AssignmentRecord {
    schema_version: u32,
    tolerance: f64,
    amplitude_floor: f64,
    matches: Vec<MatchRecord>,
    unmatched_peak_indices: Vec<usize>,
    unrealized_transitions: Vec<[usize; 2]>,
}

pub fn write_assignment(path: &Path, assignment: &PeakAssignment64) -> Result<()> {
    write_json(
        path,
        &AssignmentRecord {
            schema_version: SCHEMA_VERSION,
            tolerance: assignment.tolerance,
            amplitude_floor: assignment.amplitude_floor,
            matches: assignment
                .matches
                .iter()
                .map(|m| MatchRecord {
                    peak_index: m.peak_index,
                    center: m.center,
                    transitions: m.transitions.iter().map(|&(i, j)| [i, j]).collect(),
                })
                .collect(),
            unmatched_peak_indices: assignment.unmatched_peaks.clone(),
            unrealized_transitions: assignment
                .unrealized_transitions
                .iter()
                .map(|&(i, j)| [i, j])
                .collect(),
        },
    )
}

#[derive(Serialize)]
struct PairRegimeRecord {
    i: usize,
    j: usize,
    abs_omega: f64,
    gamma: f64,
    interaction_strong: bool,
    gamma_near_unity: bool,
    drive_ratio: f64,
    drive_strong: bool,
}

#[derive(Serialize)]
struct StrongRegimeRecord {
    schema_version: u32,
    rabi: f64,
    all_strong: bool,
    pairs: Vec<PairRegimeRecord>,
}

pub fn write_strong_regime(path: &Path, report: &StrongRegimeReport<f64>) -> Result<()> {
    write_json(
        path,
        &StrongRegimeRecord {
            schema_version: SCHEMA_VERSION,
            rabi: report.rabi,
            all_strong: report.all_strong(),
            pairs: report
                .pairs
                .iter()
                .map(|p| PairRegimeRecord {
                    i: p.i,
                    j: p.j,
                    abs_omega: p.abs_omega,
                    gamma: p.gamma,
                    interaction_strong: p.interaction_strong,
                    gamma_near_unity: p.gamma_near_unity,
                    drive_ratio: p.drive_ratio,
                    drive_strong: p.drive_strong,
                })
                .collect(),
        },
    )
}

#[derive(Serialize)]
struct DressedLevelsRecord {
    schema_version: u32,
    energies: Vec<f64>,
    /// Eigenvectors as columns; each amplitude is `[re, im]`.
    eigenvectors: Vec<Vec<[f64; 2]>>,
}

pub fn write_dressed_levels(path: &Path, levels: &DressedLevels64) -> Result<()> {
    let eigenvectors = (0..levels.dim())
        .map(|k| levels.vector(k).iter().map(|z| [z.re, z.im]).collect())
        .collect();
    write_json(
        path,
        &DressedLevelsRecord {
            schema_version: SCHEMA_VERSION,
            energies: levels.energies.clone(),
            eigenvectors,
        },
    )
}

#[derive(Serialize)]
struct TransitionTableRecord {
    schema_version: u32,
    delta: Vec<Vec<f64>>,
    amplitude_abs: Vec<Vec<f64>>,
    amplitude: Vec<Vec<[f64; 2]>>,
}

pub fn write_transition_table(path: &Path, table: &TransitionTable64) -> Result<()> {
    let d = table.dim();
    let delta = (0..d)
        .map(|i| (0..d).map(|j| table.delta[[i, j]]).collect())
        .collect();
    let amplitude_abs = (0..d)
        .map(|i| (0..d).map(|j| table.amplitude[[i, j]].norm()).collect())
        .collect();
    let amplitude = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let z = table.amplitude[[i, j]];
                    [z.re, z.im]
                })
                .collect()
        })
        .collect();
    write_json(
        path,
        &TransitionTableRecord {
            schema_version: SCHEMA_VERSION,
            delta,
            amplitude_abs,
            amplitude,
        },
    )
}

#[derive(Serialize)]
struct BlocksRecord {
    schema_version: u32,
    threshold: f64,
    blocks: Vec<Vec<usize>>,
}

pub fn write_coupling_blocks(path: &Path, blocks: &CouplingBlocks64) -> Result<()> {
    write_json(
        path,
        &BlocksRecord {
            schema_version: SCHEMA_VERSION,
            threshold: blocks.threshold,
            blocks: blocks.blocks.clone(),
        },
    )
}

fn parity_name(p: ExchangeParity) -> &'static str {
    match p {
        ExchangeParity::Symmetric => "symmetric",
        ExchangeParity::Antisymmetric => "antisymmetric",
        ExchangeParity::Mixed => "mixed",
    }
}

#[derive(Serialize)]
struct CollectiveStateRecord {
    excitation: usize,
    /// Interaction part of the lab-frame energy (free part subtracted).
    interaction_energy: f64,
    amplitudes: Vec<[f64; 2]>,
    exchange: Vec<ExchangeRecord>,
}

#[derive(Serialize)]
struct ExchangeRecord {
    sites: [usize; 2],
    parity: &'static str,
}

#[derive(Serialize)]
struct TransitionArrowRecord {
    from: usize,
    to: usize,
    delta: f64,
    amplitude_abs: f64,
}

#[derive(Serialize)]
struct ManifoldEntryRecord {
    state_index: usize,
    excitation: usize,
    photon_offset: usize,
}

/// Everything a level-diagram rendering needs: dressed energies, the
/// allowed transitions between two adjacent manifolds, the collective-basis
/// labels, and the photon bookkeeping.
#[derive(Serialize)]
struct LevelDiagramRecord {
    schema_version: u32,
    manifold_spacing: &'static str,
    rabi: f64,
    detuning: f64,
    omega_a_reference: f64,
    energies: Vec<f64>,
    transitions: Vec<TransitionArrowRecord>,
    collective_basis: Vec<CollectiveStateRecord>,
    manifold: Vec<ManifoldEntryRecord>,
}

#[allow(clippy::too_many_arguments)]
pub fn write_level_diagram(
    path: &Path,
    levels: &DressedLevels64,
    table: &TransitionTable64,
    blocks: &CouplingBlocks64,
    basis: &CollectiveBasis<f64>,
    manifold: &ManifoldReport<f64>,
    omega_a_reference: f64,
) -> Result<()> {
    let d = table.dim();
    let mut transitions = Vec::new();
    for i in 0..d {
        for j in 0..d {
            if i != j && table.amplitude[[i, j]].norm() >= blocks.threshold {
                transitions.push(TransitionArrowRecord {
                    from: i,
                    to: j,
                    delta: table.delta[[i, j]],
                    amplitude_abs: table.amplitude[[i, j]].norm(),
                });
            }
        }
    }
    let collective_basis = basis
        .states
        .iter()
        .map(|s| CollectiveStateRecord {
            excitation: s.excitation,
            interaction_energy: s.energy - omega_a_reference * s.excitation as f64,
            amplitudes: s.amplitudes.iter().map(|z| [z.re, z.im]).collect(),
            exchange: s
                .exchange
                .iter()
                .map(|&(a, b, p)| ExchangeRecord {
                    sites: [a, b],
                    parity: parity_name(p),
                })
                .collect(),
        })
        .collect();
    write_json(
        path,
        &LevelDiagramRecord {
            schema_version: SCHEMA_VERSION,
            manifold_spacing: "omega_L",
            rabi: manifold.rabi,
            detuning: manifold.detuning,
            omega_a_reference,
            energies: levels.energies.clone(),
            transitions,
            collective_basis,
            manifold: manifold
                .entries
                .iter()
                .map(|e| ManifoldEntryRecord {
                    state_index: e.state_index,
                    excitation: e.excitation,
                    photon_offset: e.photon_offset,
                })
                .collect(),
        },
    )
}

/// One scan point in the summary table.
#[derive(Serialize)]
pub struct ScanPointRecord {
    pub value: f64,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub sideband_centers: Vec<f64>,
}

#[derive(Serialize)]
pub struct ScanSummaryRecord {
    pub schema_version: u32,
    pub axis: String,
    pub points: Vec<ScanPointRecord>,
}

pub fn write_scan_summary(path: &Path, summary: &ScanSummaryRecord) -> Result<()> {
    write_json(path, summary)
}

pub fn scan_summary_csv(summary: &ScanSummaryRecord) -> String {
    let mut out = String::from("value,center\n");
    for p in &summary.points {
        for c in &p.sideband_centers {
            out.push_str(&format!("{:.11e},{:.11e}\n", p.value, c));
        }
    }
    out
}
