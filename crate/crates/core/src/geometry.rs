//! Emitter configuration and the light-mediated coupling kernels.
//!
//! Distances are dimensionless (`k r`), energies are in units of the
//! single-emitter decay rate, which is 1 throughout the crate.

use ndarray::Array2;
use ndarray_linalg::{Eigh, UPLO};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub(crate) fn dot3<T: Real>(a: &[T; 3], b: &[T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm3<T: Real>(a: &[T; 3]) -> T {
    dot3(a, a).sqrt()
}

fn is_unit<T: Real>(v: &[T; 3]) -> bool {
    (norm3(v) - T::one()).abs() <= T::tolerance(1e-12)
}

/// Emitter ensemble, either as an embedded 3D arrangement or as explicit
/// per-pair `(k r_ij, cos theta_ij)` parameters.
///
/// Pairwise mode exists because the reference configurations fix `kr` and
/// `theta` per pair directly without a demonstrated 3D embedding; in that
/// mode all emitters sit at the origin for drive/field phase purposes.
#[derive(Debug, Clone)]
pub enum EmitterLayout<T: Real> {
    Geometric {
        /// Positions in units of 1/k.
        positions: Vec<[T; 3]>,
        /// Common dipole orientation, unit norm.
        dipole_direction: [T; 3],
    },
    Pairwise {
        /// Symmetric matrix of dimensionless distances, zero diagonal.
        pair_kr: Array2<T>,
        /// Symmetric matrix of cos theta_ij in [-1, 1].
        pair_cos_theta: Array2<T>,
    },
}

impl<T: Real> EmitterLayout<T> {
    pub fn geometric(positions: Vec<[T; 3]>, dipole_direction: [T; 3]) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidLayout("need at least one emitter".into()));
        }
        if positions.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidLayout("positions must be finite".into()));
        }
        if !is_unit(&dipole_direction) {
            return Err(Error::InvalidLayout(
                "dipole_direction must have unit norm (within 1e-12)".into(),
            ));
        }
        Ok(Self::Geometric {
            positions,
            dipole_direction,
        })
    }

    pub fn pairwise(pair_kr: Array2<T>, pair_cos_theta: Array2<T>) -> Result<Self> {
        let n = pair_kr.nrows();
        if n == 0 {
            return Err(Error::InvalidLayout("need at least one emitter".into()));
        }
        if pair_kr.ncols() != n || pair_cos_theta.nrows() != n || pair_cos_theta.ncols() != n {
            return Err(Error::InvalidLayout(
                "pair matrices must be square and of equal size".into(),
            ));
        }
        for i in 0..n {
            if pair_kr[[i, i]] != T::zero() || pair_cos_theta[[i, i]] != T::zero() {
                return Err(Error::InvalidLayout(
                    "pair matrices must have zero diagonal".into(),
                ));
            }
            for j in 0..n {
                if pair_kr[[i, j]] != pair_kr[[j, i]] || pair_cos_theta[[i, j]] != pair_cos_theta[[j, i]]
                {
                    return Err(Error::InvalidLayout("pair matrices must be symmetric".into()));
                }
                if i != j && !(pair_kr[[i, j]] > T::zero()) {
                    return Err(Error::InvalidLayout(format!(
                        "pair_kr[{i}][{j}] must be positive"
                    )));
                }
                if pair_cos_theta[[i, j]].abs() > T::one() {
                    return Err(Error::InvalidLayout(format!(
                        "pair_cos_theta[{i}][{j}] must lie in [-1, 1]"
                    )));
                }
            }
        }
        Ok(Self::Pairwise {
            pair_kr,
            pair_cos_theta,
        })
    }

    pub fn n_emitters(&self) -> usize {
        match self {
            Self::Geometric { positions, .. } => positions.len(),
            Self::Pairwise { pair_kr, .. } => pair_kr.nrows(),
        }
    }

    /// Position of emitter `i` in units of 1/k. Pairwise layouts carry no
    /// embedding, so every emitter sits at the origin and all drive/field
    /// phases are 1.
    pub fn position(&self, i: usize) -> [T; 3] {
        match self {
            Self::Geometric { positions, .. } => positions[i],
            Self::Pairwise { .. } => [T::zero(); 3],
        }
    }
}

/// Per-pair distances and dipole angles of a layout.
///
/// In Geometric mode `kr[i][j] = k |r_i - r_j|` and `cos theta` is taken
/// against the vector joining `i` to `j` (from the lower to the higher
/// index; only cos^2 enters the kernels). Pairwise layouts pass their stored
/// matrices through unchanged.
pub fn derive_pair_geometry<T: Real>(
    layout: &EmitterLayout<T>,
) -> Result<(Array2<T>, Array2<T>)> {
    match layout {
        EmitterLayout::Pairwise {
            pair_kr,
            pair_cos_theta,
        } => Ok((pair_kr.clone(), pair_cos_theta.clone())),
        EmitterLayout::Geometric {
            positions,
            dipole_direction,
        } => {
            let n = positions.len();
            let mut kr = Array2::zeros((n, n));
            let mut cos = Array2::zeros((n, n));
            for i in 0..n {
                for j in (i + 1)..n {
                    let sep = [
                        positions[j][0] - positions[i][0],
                        positions[j][1] - positions[i][1],
                        positions[j][2] - positions[i][2],
                    ];
                    let r = norm3(&sep);
                    if !(r > T::zero()) {
                        return Err(Error::DegenerateGeometry { i, j });
                    }
                    let c = dot3(dipole_direction, &sep) / r;
                    kr[[i, j]] = r;
                    kr[[j, i]] = r;
                    cos[[i, j]] = c;
                    cos[[j, i]] = c;
                }
            }
            Ok((kr, cos))
        }
    }
}

fn check_kernel_args<T: Real>(kr: T, cos_theta: T) -> Result<()> {
    if !(kr > T::zero()) || !kr.is_finite() {
        return Err(Error::Domain(format!("kr must be positive and finite, got {kr}")));
    }
    if cos_theta.abs() > T::one() {
        return Err(Error::Domain(format!(
            "cos_theta must lie in [-1, 1], got {cos_theta}"
        )));
    }
    Ok(())
}

/// Collective decay kernel
/// `3/2 (1 - cos^2) sin(kr)/kr + 3/2 (1 - 3 cos^2) (cos(kr)/kr^2 - sin(kr)/kr^3)`.
///
/// Tends to 1 as `kr -> 0` for every angle. The anisotropy factor is
/// evaluated as `1 - 3*(c*c)` so that it vanishes exactly in floating point
/// at the magic angle `cos theta = sqrt(1/3)`.
pub fn coupling_gamma<T: Real>(kr: T, cos_theta: T) -> Result<T> {
    check_kernel_args(kr, cos_theta)?;
    let csq = cos_theta * cos_theta;
    let perp = T::one() - csq;
    let aniso = T::one() - T::of(3.0) * csq;
    let (s, c) = kr.sin_cos();
    let kr2 = kr * kr;
    let kr3 = kr2 * kr;
    // cos(x)/x^2 - sin(x)/x^3 cancels catastrophically for small x; switch
    // to its series -1/3 + x^2/30 - x^4/840 + x^6/45360 (error < 3e-15 at
    // the crossover)
    let combo = if kr < T::of(0.1) {
        -T::of(1.0 / 3.0)
            + kr2
                * (T::of(1.0 / 30.0)
                    + kr2 * (-T::of(1.0 / 840.0) + kr2 * T::of(1.0 / 45360.0)))
    } else {
        c / kr2 - s / kr3
    };
    Ok(T::of(1.5) * perp * s / kr + T::of(1.5) * aniso * combo)
}

/// Coherent dipole-dipole shift kernel
/// `-3/4 (1 - cos^2) cos(kr)/kr + 3/4 (1 - 3 cos^2) (sin(kr)/kr^2 + cos(kr)/kr^3)`.
///
/// Diverges as `kr^-3` at short distance away from the magic angle.
pub fn coupling_omega<T: Real>(kr: T, cos_theta: T) -> Result<T> {
    check_kernel_args(kr, cos_theta)?;
    let csq = cos_theta * cos_theta;
    let perp = T::one() - csq;
    let aniso = T::one() - T::of(3.0) * csq;
    let (s, c) = kr.sin_cos();
    let kr2 = kr * kr;
    let kr3 = kr2 * kr;
    Ok(-T::of(0.75) * perp * c / kr + T::of(0.75) * aniso * (s / kr2 + c / kr3))
}

/// Pairwise coupling matrices in units of the single-emitter decay rate:
/// `gamma` has unit diagonal, `omega` zero diagonal, both exactly symmetric.
#[derive(Debug, Clone)]
pub struct PairCouplings<T: Real> {
    gamma: Array2<T>,
    omega: Array2<T>,
}

impl<T: Real> PairCouplings<T> {
    pub fn new(gamma: Array2<T>, omega: Array2<T>) -> Result<Self> {
        let n = gamma.nrows();
        if gamma.ncols() != n || omega.nrows() != n || omega.ncols() != n {
            return Err(Error::DimensionMismatch(
                "gamma and omega must be square matrices of equal size".into(),
            ));
        }
        for i in 0..n {
            if gamma[[i, i]] != T::one() {
                return Err(Error::Domain("gamma must have unit diagonal".into()));
            }
            if omega[[i, i]] != T::zero() {
                return Err(Error::Domain("omega must have zero diagonal".into()));
            }
            for j in 0..n {
                if gamma[[i, j]] != gamma[[j, i]] || omega[[i, j]] != omega[[j, i]] {
                    return Err(Error::Domain("coupling matrices must be symmetric".into()));
                }
                if gamma[[i, j]].abs() > T::one() + T::tolerance(1e-12) {
                    return Err(Error::Domain(format!(
                        "gamma[{i}][{j}] outside [-1, 1]"
                    )));
                }
            }
        }
        Ok(Self { gamma, omega })
    }

    pub fn n_emitters(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn gamma(&self) -> &Array2<T> {
        &self.gamma
    }

    pub fn omega(&self) -> &Array2<T> {
        &self.omega
    }

    /// Smallest eigenvalue of the gamma matrix; non-negative (up to solver
    /// noise) for physical collective decay.
    pub fn min_gamma_eigenvalue(&self) -> Result<T> {
        let n = self.n_emitters();
        let mut m = Array2::<T::Cplx>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                m[[i, j]] = T::from_re(self.gamma[[i, j]]);
            }
        }
        let (vals, _) = m.eigh(UPLO::Lower)?;
        Ok(vals[0])
    }
}

/// Evaluate both kernels pairwise over a layout.
pub fn build_couplings<T: Real>(layout: &EmitterLayout<T>) -> Result<PairCouplings<T>> {
    let (kr, cos) = derive_pair_geometry(layout)?;
    let n = kr.nrows();
    let mut gamma = Array2::zeros((n, n));
    let mut omega = Array2::zeros((n, n));
    for i in 0..n {
        gamma[[i, i]] = T::one();
        for j in (i + 1)..n {
            let g = coupling_gamma(kr[[i, j]], cos[[i, j]])?;
            let o = coupling_omega(kr[[i, j]], cos[[i, j]])?;
            gamma[[i, j]] = g;
            gamma[[j, i]] = g;
            omega[[i, j]] = o;
            omega[[j, i]] = o;
        }
    }
    PairCouplings::new(gamma, omega)
}

/// Strong-regime flags for one emitter pair. `drive_ratio` is the raw value
/// of `rabi^2 / (1 + 4 omega_ij^2)`; the boolean flags apply the artifact's
/// cutoffs (factor 10 for "much greater", 1% window for `gamma ~ 1`).
#[derive(Debug, Clone)]
pub struct PairRegime<T: Real> {
    pub i: usize,
    pub j: usize,
    pub abs_omega: T,
    pub gamma: T,
    /// |omega_ij| >= 10
    pub interaction_strong: bool,
    /// |1 - gamma_ij| < 0.01
    pub gamma_near_unity: bool,
    /// rabi^2 / (1 + 4 omega_ij^2)
    pub drive_ratio: T,
    /// drive_ratio > 10
    pub drive_strong: bool,
}

/// Pair-by-pair report on the strong-interaction / strong-driving regime.
/// Annotation only: no configuration is rejected here.
#[derive(Debug, Clone)]
pub struct StrongRegimeReport<T: Real> {
    pub rabi: T,
    pub pairs: Vec<PairRegime<T>>,
}

impl<T: Real> StrongRegimeReport<T> {
    pub fn all_strong(&self) -> bool {
        self.pairs
            .iter()
            .all(|p| p.interaction_strong && p.gamma_near_unity && p.drive_strong)
    }
}

pub fn validate_strong_regime<T: Real>(
    couplings: &PairCouplings<T>,
    rabi: T,
) -> StrongRegimeReport<T> {
    let n = couplings.n_emitters();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let o = couplings.omega()[[i, j]];
            let g = couplings.gamma()[[i, j]];
            let ratio = rabi * rabi / (T::one() + T::of(4.0) * o * o);
            pairs.push(PairRegime {
                i,
                j,
                abs_omega: o.abs(),
                gamma: g,
                interaction_strong: o.abs() >= T::of(10.0),
                gamma_near_unity: (T::one() - g).abs() < T::of(0.01),
                drive_ratio: ratio,
                drive_strong: ratio > T::of(10.0),
            });
        }
    }
    StrongRegimeReport { rabi, pairs }
}
