//! Operators on the 2^N-dimensional N-emitter Hilbert space.
//!
//! Basis convention, shared by every module: computational-basis index `b`
//! encodes the ket `|s_{N-1} ... s_1 s_0>` with bit `i` of `b` holding the
//! state of site `i` (0 = down, 1 = up). Site 0 is the least significant
//! bit, so for a single site the basis order is (down, up).

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use ndarray_linalg::Scalar as _;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Real;

fn check_pow2(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::DimensionMismatch(format!(
            "operator dimension {dim} is not a power of two"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Dense operator on the N-emitter space.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumOperator<T: Real> {
    matrix: Array2<T::Cplx>,
}

impl<T: Real> QuantumOperator<T> {
    pub fn new(matrix: Array2<T::Cplx>) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(Error::DimensionMismatch("operator must be square".into()));
        }
        check_pow2(dim)?;
        if matrix.iter().any(|z| !z.re().is_finite() || !z.im().is_finite()) {
            return Err(Error::Domain("operator entries must be finite".into()));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: Array2<T::Cplx>) -> Self {
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_sites(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &Array2<T::Cplx> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<T::Cplx> {
        self.matrix
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut out = Array2::zeros(self.matrix.raw_dim());
        for ((i, j), z) in self.matrix.indexed_iter() {
            out[[j, i]] = z.conj();
        }
        Self { matrix: out }
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_deviation(&self) -> T {
        let mut dev = T::zero();
        for ((i, j), z) in self.matrix.indexed_iter() {
            dev = dev.max((*z - self.matrix[[j, i]].conj()).abs());
        }
        dev
    }
}

/// Lowering operator of site `i`: the 2x2 block `[[0,1],[0,0]]` (mapping up
/// to down) placed at tensor slot `i`, identity elsewhere.
pub fn site_lowering<T: Real>(site: usize, n_sites: usize) -> Result<QuantumOperator<T>> {
    if site >= n_sites {
        return Err(Error::SiteIndexOutOfRange {
            index: site,
            n_sites,
        });
    }
    let dim = 1usize << n_sites;
    let mut m = Array2::zeros((dim, dim));
    let bit = 1usize << site;
    for b in 0..dim {
        if b & bit != 0 {
            m[[b & !bit, b]] = T::from_re(T::one());
        }
    }
    Ok(QuantumOperator::from_matrix_unchecked(m))
}

/// Raising operator of site `i`; conjugate transpose of [`site_lowering`].
pub fn site_raising<T: Real>(site: usize, n_sites: usize) -> Result<QuantumOperator<T>> {
    Ok(site_lowering(site, n_sites)?.dagger())
}

/// Occupation projector of site `i`, the diagonal operator with entry 1 on
/// basis states where site `i` is excited.
pub fn site_number<T: Real>(site: usize, n_sites: usize) -> Result<QuantumOperator<T>> {
    if site >= n_sites {
        return Err(Error::SiteIndexOutOfRange {
            index: site,
            n_sites,
        });
    }
    let dim = 1usize << n_sites;
    let mut m = Array2::zeros((dim, dim));
    let bit = 1usize << site;
    for b in 0..dim {
        if b & bit != 0 {
            m[[b, b]] = T::from_re(T::one());
        }
    }
    Ok(QuantumOperator::from_matrix_unchecked(m))
}

pub fn identity<T: Real>(n_sites: usize) -> QuantumOperator<T> {
    let dim = 1usize << n_sites;
    QuantumOperator::from_matrix_unchecked(Array2::from_diag(&Array1::from_elem(
        dim,
        T::from_re(T::one()),
    )))
}

/// State of the N-emitter system: Hermitian, unit trace, positive
/// semidefinite (all within documented tolerances).
#[derive(Debug, Clone)]
pub struct DensityMatrix<T: Real> {
    matrix: Array2<T::Cplx>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(matrix: Array2<T::Cplx>) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(Error::DimensionMismatch("density matrix must be square".into()));
        }
        check_pow2(dim)?;
        let mut herm_dev = T::zero();
        for ((i, j), z) in matrix.indexed_iter() {
            herm_dev = herm_dev.max((*z - matrix[[j, i]].conj()).abs());
        }
        if herm_dev > T::tolerance(1e-10) {
            return Err(Error::NotHermitian {
                deviation: herm_dev.to_f64().unwrap_or(f64::NAN),
            });
        }
        let trace = matrix.diag().sum();
        if (trace - T::from_re(T::one())).abs() > T::tolerance(1e-10) {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace must be 1, got {trace}"
            )));
        }
        let (vals, _) = matrix.eigh(UPLO::Lower)?;
        if vals[0] < -T::tolerance(1e-10) {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {}",
                vals[0]
            )));
        }
        Ok(Self { matrix })
    }

    /// Pure state `|psi><psi|` from a (not necessarily normalized) amplitude
    /// vector.
    pub fn pure(amplitudes: &Array1<T::Cplx>) -> Result<Self> {
        let dim = amplitudes.len();
        check_pow2(dim)?;
        let norm_sq: T = amplitudes.iter().map(|z| z.abs() * z.abs()).fold(T::zero(), |a, b| a + b);
        if norm_sq <= T::zero() {
            return Err(Error::Domain("zero state vector".into()));
        }
        let mut m = Array2::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                m[[i, j]] = amplitudes[i] * amplitudes[j].conj() / T::from_re(norm_sq);
            }
        }
        Ok(Self { matrix: m })
    }

    /// The computational basis state with index `b` (bit i = state of site i).
    pub fn basis_state(b: usize, n_sites: usize) -> Result<Self> {
        let dim = 1usize << n_sites;
        if b >= dim {
            return Err(Error::Domain(format!("basis index {b} out of range")));
        }
        let mut amp = Array1::zeros(dim);
        amp[b] = T::from_re(T::one());
        Self::pure(&amp)
    }

    /// All emitters down.
    pub fn ground(n_sites: usize) -> Self {
        Self::basis_state(0, n_sites).expect("ground state is always valid")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_sites(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &Array2<T::Cplx> {
        &self.matrix
    }

    pub fn trace(&self) -> T::Cplx {
        self.matrix.diag().sum()
    }

    /// Smallest eigenvalue; slightly negative values (within solver noise)
    /// can occur on propagated states.
    pub fn min_eigenvalue(&self) -> Result<T> {
        let (vals, _) = self.matrix.eigh(UPLO::Lower)?;
        Ok(vals[0])
    }
}

/// `Tr(op rho)`; real to solver precision when `op` is Hermitian.
pub fn expectation<T: Real>(
    op: &QuantumOperator<T>,
    rho: &DensityMatrix<T>,
) -> Result<T::Cplx> {
    if op.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator dim {} vs state dim {}",
            op.dim(),
            rho.dim()
        )));
    }
    let mut acc = T::Cplx::zero();
    for i in 0..op.dim() {
        for k in 0..op.dim() {
            acc += op.matrix()[[i, k]] * rho.matrix()[[k, i]];
        }
    }
    Ok(acc)
}
