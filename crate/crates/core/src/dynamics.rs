//! Rotating- and lab-frame Hamiltonians, the Lindblad generator, steady
//! state, and time evolution.
//!
//! The generator convention is `d rho/dt = L[rho] = i[rho, H] + D[rho]`.
//! Superoperators act on column-stacked density matrices: `vec(X)[i + d*j]
//! = X[i][j]`, so `vec(A X B) = (B^T (x) A) vec(X)`.

use ndarray::{Array1, Array2};
use ndarray_linalg::Scalar as _;
use ndarray_linalg::{Eig, Factorize, Solve};
use ndarray::linalg::kron;


use crate::error::{Error, Result};
use crate::geometry::{dot3, norm3, EmitterLayout, PairCouplings};
use crate::qops::{site_lowering, site_number, DensityMatrix, QuantumOperator};
use crate::scalar::Real;

/// Classical drive: Rabi frequency and detuning in decay-rate units, and the
/// propagation direction of the laser (|k| is absorbed into the position
/// units).
#[derive(Debug, Clone)]
pub struct DriveParameters<T: Real> {
    pub rabi: T,
    pub detuning: T,
    pub wave_vector_direction: [T; 3],
}

impl<T: Real> DriveParameters<T> {
    pub fn new(rabi: T, detuning: T, wave_vector_direction: [T; 3]) -> Result<Self> {
        if !(rabi >= T::zero()) || !rabi.is_finite() {
            return Err(Error::Domain(format!("rabi must be >= 0, got {rabi}")));
        }
        if !detuning.is_finite() {
            return Err(Error::Domain("detuning must be finite".into()));
        }
        if (norm3(&wave_vector_direction) - T::one()).abs() > T::tolerance(1e-12) {
            return Err(Error::Domain(
                "wave_vector_direction must have unit norm".into(),
            ));
        }
        Ok(Self {
            rabi,
            detuning,
            wave_vector_direction,
        })
    }
}

fn check_n<T: Real>(layout: &EmitterLayout<T>, couplings: &PairCouplings<T>) -> Result<usize> {
    let n = layout.n_emitters();
    if couplings.n_emitters() != n {
        return Err(Error::DimensionMismatch(format!(
            "layout has {n} emitters, couplings have {}",
            couplings.n_emitters()
        )));
    }
    Ok(n)
}

/// Rotating-frame Hamiltonian
/// `H = rabi/2 sum_i (e^{-i k.r_i} s_i^- + h.c.) + detuning sum_i n_i
///     + sum_{i!=j} omega_ij s_i^+ s_j^-`.
pub fn build_hamiltonian_rotating<T: Real>(
    layout: &EmitterLayout<T>,
    couplings: &PairCouplings<T>,
    drive: &DriveParameters<T>,
) -> Result<QuantumOperator<T>> {
    let n = check_n(layout, couplings)?;
    let dim = 1usize << n;
    let mut h = Array2::<T::Cplx>::zeros((dim, dim));
    let half_rabi = T::of(0.5) * drive.rabi;
    for i in 0..n {
        let sm = site_lowering::<T>(i, n)?;
        let theta = dot3(&drive.wave_vector_direction, &layout.position(i));
        // e^{-i k.r_i}
        let phase = T::complex(theta.cos(), -theta.sin()).mul_real(half_rabi);
        h = h + &(sm.matrix() * phase) + &(sm.dagger().matrix() * phase.conj());
        let num = site_number::<T>(i, n)?;
        h += &(num.matrix() * T::from_re(drive.detuning));
    }
    for i in 0..n {
        let sp = site_lowering::<T>(i, n)?.dagger();
        for j in 0..n {
            if i == j {
                continue;
            }
            let sm = site_lowering::<T>(j, n)?;
            let hop = sp.matrix().dot(sm.matrix());
            h += &(&hop * T::from_re(couplings.omega()[[i, j]]));
        }
    }
    QuantumOperator::new(h)
}

/// Lab-frame Hamiltonian `H = omega_a sum_i n_i + sum_{i!=j} omega_ij
/// s_i^+ s_j^-` (number-operator convention for the free energy; the
/// eigenvectors used downstream are independent of that choice).
/// Block-diagonal in total excitation number.
pub fn build_hamiltonian_lab<T: Real>(
    couplings: &PairCouplings<T>,
    omega_a: T,
) -> Result<QuantumOperator<T>> {
    if !(omega_a > T::zero()) {
        return Err(Error::Domain(format!("omega_a must be positive, got {omega_a}")));
    }
    let n = couplings.n_emitters();
    let dim = 1usize << n;
    let mut h = Array2::<T::Cplx>::zeros((dim, dim));
    for i in 0..n {
        let num = site_number::<T>(i, n)?;
        h += &(num.matrix() * T::from_re(omega_a));
        let sp = site_lowering::<T>(i, n)?.dagger();
        for j in 0..n {
            if i == j {
                continue;
            }
            let sm = site_lowering::<T>(j, n)?;
            let hop = sp.matrix().dot(sm.matrix());
            h += &(&hop * T::from_re(couplings.omega()[[i, j]]));
        }
    }
    QuantumOperator::new(h)
}

/// Column-stack a matrix: `vec(X)[i + d*j] = X[i][j]`.
pub(crate) fn vectorize<T: Real>(m: &Array2<T::Cplx>) -> Array1<T::Cplx> {
    let d = m.nrows();
    let mut v = Array1::zeros(d * d);
    for j in 0..d {
        for i in 0..d {
            v[i + d * j] = m[[i, j]];
        }
    }
    v
}

pub(crate) fn unvectorize<T: Real>(v: &Array1<T::Cplx>, dim: usize) -> Array2<T::Cplx> {
    let mut m = Array2::zeros((dim, dim));
    for j in 0..dim {
        for i in 0..dim {
            m[[i, j]] = v[i + dim * j];
        }
    }
    m
}

/// `vec(A X) = (I (x) A) vec(X)`
fn left_mul_superop<T: Real>(a: &Array2<T::Cplx>) -> Array2<T::Cplx> {
    let eye = Array2::from_diag(&Array1::from_elem(a.nrows(), T::from_re(T::one())));
    kron(&eye, a)
}

/// `vec(X B) = (B^T (x) I) vec(X)`
fn right_mul_superop<T: Real>(b: &Array2<T::Cplx>) -> Array2<T::Cplx> {
    let eye = Array2::from_diag(&Array1::from_elem(b.nrows(), T::from_re(T::one())));
    kron(&b.t().to_owned(), &eye)
}

pub(crate) fn frobenius<T: Real>(m: &Array2<T::Cplx>) -> T {
    m.iter()
        .map(|z| {
            let a = z.abs();
            a * a
        })
        .fold(T::zero(), |acc, x| acc + x)
        .sqrt()
}

/// The full Lindblad generator as a dense `4^N x 4^N` matrix acting on
/// column-stacked density matrices.
#[derive(Debug, Clone)]
pub struct Liouvillian<T: Real> {
    matrix: Array2<T::Cplx>,
    hilbert_dim: usize,
}

impl<T: Real> Liouvillian<T> {
    pub(crate) fn from_matrix(matrix: Array2<T::Cplx>, hilbert_dim: usize) -> Self {
        Self {
            matrix,
            hilbert_dim,
        }
    }

    /// Superoperator dimension, `4^N`.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Hilbert-space dimension, `2^N`.
    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    pub fn matrix(&self) -> &Array2<T::Cplx> {
        &self.matrix
    }

    /// Apply the generator to an operator: `L[X]`.
    pub fn apply(&self, x: &Array2<T::Cplx>) -> Array2<T::Cplx> {
        let v = self.matrix.dot(&vectorize::<T>(x));
        unvectorize::<T>(&v, self.hilbert_dim)
    }
}

/// Assemble `L[rho] = i[rho, H] + 1/2 sum_{ij} gamma_ij (2 s_j^- rho s_i^+
/// - s_i^+ s_j^- rho - rho s_i^+ s_j^-)` with `gamma_ii = 1`.
pub fn build_liouvillian<T: Real>(
    layout: &EmitterLayout<T>,
    couplings: &PairCouplings<T>,
    drive: &DriveParameters<T>,
) -> Result<Liouvillian<T>> {
    let n = check_n(layout, couplings)?;
    let dim = 1usize << n;
    let h = build_hamiltonian_rotating(layout, couplings, drive)?;

    // i[rho, H] = i (rho H - H rho)
    let mut l = (right_mul_superop::<T>(h.matrix()) - left_mul_superop::<T>(h.matrix()))
        .mapv(|z| z * T::i());

    let half = T::of(0.5);
    for i in 0..n {
        let sp_i = site_lowering::<T>(i, n)?.dagger();
        for j in 0..n {
            let g = couplings.gamma()[[i, j]];
            let sm_j = site_lowering::<T>(j, n)?;
            let pp = sp_i.matrix().dot(sm_j.matrix()); // s_i^+ s_j^-
            let jump = kron(&sp_i.matrix().t().to_owned(), sm_j.matrix());
            let term = jump.mapv(|z| z.mul_real(T::of(2.0)))
                - left_mul_superop::<T>(&pp)
                - right_mul_superop::<T>(&pp);
            l += &term.mapv(|z| z.mul_real(half * g));
        }
    }
    Ok(Liouvillian::from_matrix(l, dim))
}

/// Unique stationary state of a Liouvillian, with its certification data.
#[derive(Debug, Clone)]
pub struct SteadyState<T: Real> {
    pub rho: DensityMatrix<T>,
    /// Frobenius norm of `L[rho]`.
    pub residual: T,
    /// Negated real part of the slowest nonzero Liouvillian eigenvalue.
    pub spectral_gap: T,
}

/// Solve `L[rho] = 0` by null-space extraction: take the eigenvector of the
/// smallest-magnitude eigenvalue, Hermitize, and normalize the trace.
///
/// Errors if the null space is not one-dimensional (second eigenvalue below
/// `1e-10 ||L||_F`), if the spectrum leaks into the right half-plane, or if
/// the final residual exceeds 1e-9.
pub fn steady_state<T: Real>(liouvillian: &Liouvillian<T>) -> Result<SteadyState<T>> {
    let dim = liouvillian.hilbert_dim();
    let (vals, vecs) = liouvillian.matrix().eig()?;

    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| {
        vals[a]
            .abs()
            .partial_cmp(&vals[b].abs())
            .expect("eigenvalues are finite")
    });
    let null_idx = order[0];

    let norm_l = frobenius::<T>(liouvillian.matrix());
    let threshold = T::tolerance(1e-10) * norm_l;
    if vals.len() > 1 {
        let second = vals[order[1]].abs();
        if second < threshold {
            return Err(Error::NonUniqueSteadyState {
                second: second.to_f64().unwrap_or(f64::NAN),
                threshold: threshold.to_f64().unwrap_or(f64::NAN),
            });
        }
    }

    let max_re = order
        .iter()
        .map(|&k| vals[k].re())
        .fold(T::neg_infinity(), T::max);
    if max_re > T::tolerance(1e-8) {
        return Err(Error::Domain(format!(
            "Liouvillian spectrum has eigenvalue with positive real part {max_re}"
        )));
    }

    let v = vecs.column(null_idx).to_owned();
    let mut rho = unvectorize::<T>(&v, dim);
    // Hermitize and fix the trace
    let rho_dag = rho.t().mapv(|z| z.conj());
    rho = (rho + rho_dag).mapv(|z| z.mul_real(T::of(0.5)));
    let trace: T::Cplx = rho.diag().sum();
    if trace.abs() < T::tolerance(1e-12) {
        return Err(Error::Domain(
            "null vector of the Liouvillian is traceless; no stationary density matrix".into(),
        ));
    }
    rho = rho.mapv(|z| z / trace);

    let residual = frobenius::<T>(&liouvillian.apply(&rho));
    let tol = T::tolerance(1e-9);
    if residual > tol {
        return Err(Error::ResidualTooLarge {
            residual: residual.to_f64().unwrap_or(f64::NAN),
            tolerance: tol.to_f64().unwrap_or(f64::NAN),
        });
    }

    let slowest = order[1..]
        .iter()
        .map(|&k| vals[k].re())
        .fold(T::neg_infinity(), T::max);
    let rho = DensityMatrix::new(rho)?;
    Ok(SteadyState {
        rho,
        residual,
        spectral_gap: -slowest,
    })
}

fn one_norm<T: Real>(m: &Array2<T::Cplx>) -> T {
    let mut best = T::zero();
    for j in 0..m.ncols() {
        let s = m
            .column(j)
            .iter()
            .map(|z| z.abs())
            .fold(T::zero(), |a, b| a + b);
        best = best.max(s);
    }
    best
}

/// Dense matrix exponential by scaling and squaring with a degree-13 Pade
/// approximant.
pub(crate) fn expm<T: Real>(a: &Array2<T::Cplx>) -> Result<Array2<T::Cplx>> {
    const PADE13: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371920351148152;

    let n = a.nrows();
    let norm = one_norm::<T>(a);
    let mut s: i32 = 0;
    if norm.to_f64().unwrap_or(f64::INFINITY) > THETA13 {
        s = (norm.to_f64().unwrap() / THETA13).log2().ceil() as i32;
    }
    let scale = T::of(0.5).powi(s);
    let a = a.mapv(|z| z.mul_real(scale));

    let eye: Array2<T::Cplx> =
        Array2::from_diag(&Array1::from_elem(n, T::from_re(T::one())));
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);

    let b = |k: usize| T::from_re(T::of(PADE13[k]));
    let u_inner = a6.dot(&(&a6 * b(13) + &a4 * b(11) + &a2 * b(9)));
    let u_poly = u_inner + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &eye * b(1);
    let u = a.dot(&u_poly);
    let v_inner = a6.dot(&(&a6 * b(12) + &a4 * b(10) + &a2 * b(8)));
    let v = v_inner + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &eye * b(0);

    let lhs = &v - &u;
    let rhs = &v + &u;
    let f = lhs.factorize()?;
    let mut r = Array2::zeros((n, n));
    for j in 0..n {
        let col = f.solve(&rhs.column(j).to_owned())?;
        for i in 0..n {
            r[[i, j]] = col[i];
        }
    }
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

/// Evolve a state for time `t >= 0`: `e^{L t}[rho0]`.
pub fn propagate<T: Real>(
    liouvillian: &Liouvillian<T>,
    rho0: &DensityMatrix<T>,
    t: T,
) -> Result<DensityMatrix<T>> {
    if !(t >= T::zero()) {
        return Err(Error::Domain(format!("propagation time must be >= 0, got {t}")));
    }
    if rho0.dim() != liouvillian.hilbert_dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dim {} vs Liouvillian Hilbert dim {}",
            rho0.dim(),
            liouvillian.hilbert_dim()
        )));
    }
    let generator = liouvillian.matrix().mapv(|z| z.mul_real(t));
    let propagator = expm::<T>(&generator)?;
    let v = propagator.dot(&vectorize::<T>(rho0.matrix()));
    DensityMatrix::new(unvectorize::<T>(&v, rho0.dim()))
}
