//! Floating-point abstraction for the numerical core.
//!
//! Everything downstream is generic over [`Real`], which bundles the
//! num-traits float surface with the LAPACK ([`Lapack`]) and FFT bounds the
//! solvers need. `f64` is the precision the crate's documented tolerances
//! assume; `f32` works but validation thresholds are scaled up via
//! [`Real::tolerance`].

use std::fmt::{Debug, Display};

use ndarray::ScalarOperand;
use ndarray_linalg::{Lapack, Scalar};
use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rustfft::{FftNum, FftPlanner};

/// Scalar type of the simulation: `f32` or `f64`.
///
/// The associated [`Real::Cplx`] type is the matching complex scalar,
/// carrying the `Lapack` bound so dense eigensolves and LU solves are available
/// on `Array2<T::Cplx>`.
pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ScalarOperand
    + FftNum
    + Display
    + Debug
    + Send
    + Sync
    + 'static
{
    type Cplx: Scalar<Real = Self, Complex = Self::Cplx>
        + Lapack
        + ScalarOperand
        + Send
        + Sync;

    /// Lossy conversion from an `f64` literal.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal must convert")
    }

    /// A validation threshold: `base` (stated for f64) widened so that it
    /// stays meaningful at lower precision.
    fn tolerance(base: f64) -> Self {
        let widened = Self::epsilon() * Self::of(1e3);
        Self::of(base).max(widened)
    }

    fn complex(re: Self, im: Self) -> Self::Cplx {
        <Self::Cplx as Scalar>::complex(re, im)
    }

    fn from_re(re: Self) -> Self::Cplx {
        <Self::Cplx as Scalar>::from_real(re)
    }

    fn i() -> Self::Cplx {
        Self::complex(Self::zero(), Self::one())
    }

    /// In-place forward FFT, `buf[k] <- sum_j buf[j] e^{-2 pi i j k / n}`.
    fn fft_forward(buf: &mut [Self::Cplx]);
}

impl Real for f64 {
    type Cplx = Complex<f64>;

    fn fft_forward(buf: &mut [Self::Cplx]) {
        let fft = FftPlanner::<f64>::new().plan_fft_forward(buf.len());
        fft.process(buf);
    }
}

impl Real for f32 {
    type Cplx = Complex<f32>;

    fn fft_forward(buf: &mut [Self::Cplx]) {
        let fft = FftPlanner::<f32>::new().plan_fft_forward(buf.len());
        fft.process(buf);
    }
}
