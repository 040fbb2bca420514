//! First-order field correlation via the quantum regression theorem, the
//! one-photon spectrum, and sideband detection.
//!
//! Frequencies are in decay-rate units measured from the laser frequency.

use ndarray::{linalg::general_mat_vec_mul, Array1, Array2};
use ndarray_linalg::Scalar as _;
use ndarray_linalg::{Eig, Factorize, Inverse, Solve};

use crate::dynamics::{expm, frobenius, vectorize, Liouvillian, SteadyState};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::geometry::{dot3, norm3, EmitterLayout};
use crate::qops::{site_lowering, DensityMatrix, QuantumOperator};
use crate::scalar::Real;

/// Far-field emission operator `E^dag(n) = sum_j s_j^- e^{-i n.r_j}` for a
/// detection direction `n`.
#[derive(Debug, Clone)]
pub struct FieldOperator<T: Real> {
    pub direction: [T; 3],
    pub operator: QuantumOperator<T>,
}

pub fn field_operator<T: Real>(
    layout: &EmitterLayout<T>,
    direction: [T; 3],
) -> Result<FieldOperator<T>> {
    if (norm3(&direction) - T::one()).abs() > T::tolerance(1e-12) {
        return Err(Error::Domain("detection direction must have unit norm".into()));
    }
    let n = layout.n_emitters();
    let dim = 1usize << n;
    let mut m = Array2::<T::Cplx>::zeros((dim, dim));
    for j in 0..n {
        let theta = dot3(&direction, &layout.position(j));
        let phase = T::complex(theta.cos(), -theta.sin());
        let sm = site_lowering::<T>(j, n)?;
        m += &(sm.matrix() * phase);
    }
    Ok(FieldOperator {
        direction,
        operator: QuantumOperator::new(m)?,
    })
}

/// Normalized first-order correlation `g(tau)` on a uniform grid, together
/// with its exact `tau -> infinity` plateau and the steady state it was
/// evaluated in.
#[derive(Debug, Clone)]
pub struct CorrelationTrace<T: Real> {
    pub tau_spacing: T,
    pub values: Vec<T::Cplx>,
    /// Exact coherent plateau `<E><E^dag>/<E E^dag>`.
    pub plateau: T::Cplx,
    /// The steady state the correlation was taken in.
    pub steady_rho: DensityMatrix<T>,
}

impl<T: Real> CorrelationTrace<T> {
    pub fn duration(&self) -> T {
        self.tau_spacing * T::of((self.values.len().saturating_sub(1)) as f64)
    }
}

/// Weight vector `w` with `w . vec(M) = Tr(E^dag M)`.
fn trace_weights<T: Real>(e_dag: &QuantumOperator<T>) -> Array1<T::Cplx> {
    // Tr(E^dag M) = vec(E)^dag vec(M), so w = conj(vec(E))
    let e = e_dag.dagger();
    vectorize::<T>(e.matrix()).mapv(|z| z.conj())
}

fn correlation_denominator<T: Real>(
    weights: &Array1<T::Cplx>,
    x0: &Array1<T::Cplx>,
) -> Result<T> {
    let denom = weights.dot(x0);
    if denom.re() <= T::tolerance(1e-14) {
        return Err(Error::ZeroEmission);
    }
    Ok(denom.re())
}

/// `g(tau) = <E(t) E^dag(t+tau)> / <E E^dag>` at `t -> infinity`, computed
/// as `Tr[E^dag e^{L tau}(rho_ss E)]` with one matrix exponential per grid
/// spacing.
pub fn g1_correlation<T: Real>(
    liouvillian: &Liouvillian<T>,
    steady: &SteadyState<T>,
    field: &FieldOperator<T>,
    tau_spacing: T,
    tau_duration: T,
) -> Result<CorrelationTrace<T>> {
    let dim = liouvillian.hilbert_dim();
    if field.operator.dim() != dim || steady.rho.dim() != dim {
        return Err(Error::DimensionMismatch(
            "field/steady-state dimensions do not match the Liouvillian".into(),
        ));
    }
    if !(tau_spacing > T::zero()) || !(tau_duration >= T::zero()) {
        return Err(Error::Domain("tau grid must have positive spacing".into()));
    }
    let steps = (tau_duration / tau_spacing)
        .round()
        .to_usize()
        .ok_or_else(|| Error::Domain("tau grid too long".into()))?;

    let e_dag = &field.operator;
    let e = e_dag.dagger();
    let x0_mat = steady.rho.matrix().dot(e.matrix());
    let weights = trace_weights::<T>(e_dag);
    let mut x = vectorize::<T>(&x0_mat);
    let denom = correlation_denominator::<T>(&weights, &x)?;

    // exact plateau from the factorized steady-state expectations
    let mut tr_e = T::Cplx::zero();
    for i in 0..dim {
        tr_e += x0_mat[[i, i]];
    }
    let edag_rho = e_dag.matrix().dot(steady.rho.matrix());
    let mut tr_edag = T::Cplx::zero();
    for i in 0..dim {
        tr_edag += edag_rho[[i, i]];
    }
    let plateau = tr_e * tr_edag / T::from_re(denom);

    let propagator = expm::<T>(&liouvillian.matrix().mapv(|z| z.mul_real(tau_spacing)))?;
    let mut values = Vec::with_capacity(steps + 1);
    let mut next = Array1::<T::Cplx>::zeros(x.len());
    for _ in 0..=steps {
        values.push(weights.dot(&x) / T::from_re(denom));
        general_mat_vec_mul(
            T::from_re(T::one()),
            &propagator,
            &x,
            T::Cplx::zero(),
            &mut next,
        );
        std::mem::swap(&mut x, &mut next);
    }

    Ok(CorrelationTrace {
        tau_spacing,
        values,
        plateau,
        steady_rho: steady.rho.clone(),
    })
}

/// How the spectrum was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMethod {
    WindowedFourier,
    EigenDecomposition,
}

/// Incoherent one-photon spectrum on a symmetric frequency grid. The elastic
/// component is split off into `coherent_weight` instead of appearing as a
/// grid-limited spike at zero.
#[derive(Debug, Clone)]
pub struct Spectrum<T: Real> {
    pub omega: Vec<T>,
    pub values: Vec<T>,
    pub coherent_weight: T,
    pub method: SpectrumMethod,
}

impl<T: Real> Spectrum<T> {
    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::zero(), T::max)
    }
}

/// Fraction of the trace tail that is cosine-tapered before transforming.
/// Suppresses ringing from subradiant modes that have not decayed inside the
/// window; resolved linewidths (>> 1/T) are unaffected.
const TAPER_FRACTION: f64 = 0.1;

/// Plateau deviation above which the trace is rejected as too short.
const PLATEAU_TOL: f64 = 1e-4;

/// Windowed Fourier transform of the plateau-subtracted correlation,
/// extended to negative delays by Hermitian symmetry (hence real output):
/// `S(w) = 2 Re int_0^T (g(tau) - g_inf) e^{-i w tau} dtau`.
///
/// The returned grid is the FFT grid of the zero-padded window, restricted
/// to `|omega| <= max_omega`.
pub fn spectrum_fourier<T: Real>(
    trace: &CorrelationTrace<T>,
    max_omega: T,
) -> Result<Spectrum<T>> {
    if !(max_omega > T::zero()) {
        return Err(Error::Domain("max_omega must be positive".into()));
    }
    let n = trace.values.len();
    if n < 4 {
        return Err(Error::Domain("correlation trace has too few samples".into()));
    }
    let duration = trace.duration();
    let deviation = (trace.values[n - 1] - trace.plateau).abs();
    let tol = T::of(PLATEAU_TOL);
    if deviation > tol {
        // crude decay-rate estimate from the second half of the trace
        let mid = (trace.values[n / 2] - trace.plateau).abs();
        let rate = if mid > deviation && deviation > T::zero() {
            (mid / deviation).ln() / (duration - duration * T::of(0.5))
        } else {
            T::zero()
        };
        let required = if rate > T::of(1e-12) {
            duration + (deviation / tol).ln() / rate
        } else {
            duration * T::of(10.0)
        };
        return Err(Error::TraceTooShort {
            duration: duration.to_f64().unwrap_or(f64::NAN),
            deviation: deviation.to_f64().unwrap_or(f64::NAN),
            required: required.to_f64().unwrap_or(f64::NAN),
        });
    }

    let nfft = (2 * n - 1).next_power_of_two();
    let mut buf: Vec<T::Cplx> = vec![T::Cplx::zero(); nfft];
    let n_taper = ((n - 1) as f64 * TAPER_FRACTION).round() as usize;
    for (k, g) in trace.values.iter().enumerate() {
        let mut x = *g - trace.plateau;
        if n_taper > 0 && k + n_taper >= n {
            let u = (k + n_taper + 1 - n) as f64 / n_taper as f64;
            let w = (T::of(u) * T::FRAC_PI_2()).cos();
            x = x.mul_real(w * w);
        }
        let trapz = if k == 0 || k == n - 1 {
            T::of(0.5)
        } else {
            T::one()
        };
        buf[k] = x.mul_real(trapz * trace.tau_spacing);
    }
    T::fft_forward(&mut buf);

    let dw = T::of(2.0) * T::PI() / (T::of(nfft as f64) * trace.tau_spacing);
    let half = nfft / 2;
    let mut pairs: Vec<(T, T)> = Vec::new();
    for j in 0..nfft {
        let freq_index = if j <= half {
            j as isize
        } else {
            j as isize - nfft as isize
        };
        let omega = dw * T::of(freq_index as f64);
        if omega.abs() <= max_omega {
            pairs.push((omega, T::of(2.0) * buf[j].re()));
        }
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite frequencies"));
    Ok(Spectrum {
        omega: pairs.iter().map(|p| p.0).collect(),
        values: pairs.iter().map(|p| p.1).collect(),
        coherent_weight: trace.plateau.abs(),
        method: SpectrumMethod::WindowedFourier,
    })
}

/// Closed-form spectrum from the Liouvillian eigenmode expansion:
/// `S(w) = 2 Re sum_k w_k / (i w - lambda_k)` over nonzero modes, an exact
/// Lorentzian sum with no windowing artifacts. Modes at `lambda = 0` carry
/// the coherent weight.
pub fn spectrum_eigen<T: Real>(
    liouvillian: &Liouvillian<T>,
    steady: &SteadyState<T>,
    field: &FieldOperator<T>,
    omega_grid: &[T],
) -> Result<Spectrum<T>> {
    let dim = liouvillian.hilbert_dim();
    if field.operator.dim() != dim || steady.rho.dim() != dim {
        return Err(Error::DimensionMismatch(
            "field/steady-state dimensions do not match the Liouvillian".into(),
        ));
    }
    let (vals, vecs) = liouvillian.matrix().eig()?;

    // eigenvector condition estimate; a defective Liouvillian makes the
    // mode expansion meaningless
    let cond = {
        let inv = vecs.inv()?;
        let n1 = |m: &Array2<T::Cplx>| {
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
        };
        n1(&vecs) * n1(&inv)
    };
    if cond > T::of(1e8) {
        return Err(Error::IllConditionedEigenbasis {
            cond: cond.to_f64().unwrap_or(f64::NAN),
        });
    }

    let e_dag = &field.operator;
    let e = e_dag.dagger();
    let x0 = vectorize::<T>(&steady.rho.matrix().dot(e.matrix()));
    let weights = trace_weights::<T>(e_dag);
    let denom = correlation_denominator::<T>(&weights, &x0)?;

    let f = vecs.factorize()?;
    let coeffs = f.solve(&x0)?;
    let overlaps = weights.dot(&vecs);

    let zero_tol = T::tolerance(1e-12) * frobenius::<T>(liouvillian.matrix());
    let mut mode_weights: Vec<(T::Cplx, T::Cplx)> = Vec::new();
    let mut coherent = T::Cplx::zero();
    for k in 0..vals.len() {
        let w = coeffs[k] * overlaps[k] / T::from_re(denom);
        if vals[k].abs() < zero_tol {
            coherent += w;
        } else {
            mode_weights.push((vals[k], w));
        }
    }

    let values: Vec<T> = omega_grid
        .iter()
        .map(|&om| {
            let i_om = T::complex(T::zero(), om);
            let mut s = T::zero();
            for (lam, w) in &mode_weights {
                s += T::of(2.0) * (*w / (i_om - *lam)).re();
            }
            s
        })
        .collect();

    Ok(Spectrum {
        omega: omega_grid.to_vec(),
        values,
        coherent_weight: coherent.abs(),
        method: SpectrumMethod::EigenDecomposition,
    })
}

/// A detected spectral line. `height` is the linear spectrum value at the
/// peak, `prominence` is in log10 decades, and `half_width` is measured at
/// the linear half-prominence crossing (the half width at half maximum for
/// an isolated line).
#[derive(Debug, Clone, PartialEq)]
pub struct Peak<T: Real> {
    pub center: T,
    pub height: T,
    pub half_width: T,
    pub prominence: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakSet<T: Real> {
    pub peaks: Vec<Peak<T>>,
}

impl<T: Real> PeakSet<T> {
    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    pub fn centers(&self) -> Vec<T> {
        self.peaks.iter().map(|p| p.center).collect()
    }
}

/// Local maxima of `log10 S` with prominence at least `min_prominence`
/// decades, thinned so that kept peaks are at least `min_separation` apart
/// (taller peaks win). Centers are refined by parabolic interpolation.
pub fn detect_peaks<T: Real>(
    spectrum: &Spectrum<T>,
    min_prominence: T,
    min_separation: T,
) -> PeakSet<T> {
    let s = &spectrum.values;
    let om = &spectrum.omega;
    let n = s.len();
    if n < 3 {
        return PeakSet { peaks: Vec::new() };
    }
    let floor = T::min_positive_value();
    let y: Vec<T> = s.iter().map(|&v| v.max(floor).log10()).collect();

    struct Candidate<T> {
        index: usize,
        prominence: T,
    }
    let mut candidates: Vec<Candidate<T>> = Vec::new();
    for i in 1..n - 1 {
        if !(y[i] > y[i - 1] && y[i] > y[i + 1]) {
            continue;
        }
        let pv = y[i];
        let mut lmin = pv;
        let mut k = i;
        while k > 0 {
            k -= 1;
            if y[k] > pv {
                break;
            }
            lmin = lmin.min(y[k]);
        }
        let mut rmin = pv;
        let mut k = i;
        while k + 1 < n {
            k += 1;
            if y[k] > pv {
                break;
            }
            rmin = rmin.min(y[k]);
        }
        let prominence = pv - lmin.max(rmin);
        if prominence >= min_prominence {
            candidates.push(Candidate {
                index: i,
                prominence,
            });
        }
    }

    // taller peaks claim their separation window first
    candidates.sort_by(|a, b| {
        s[b.index]
            .partial_cmp(&s[a.index])
            .expect("finite spectrum values")
    });
    let mut kept: Vec<Candidate<T>> = Vec::new();
    for c in candidates {
        if kept
            .iter()
            .all(|k| (om[c.index] - om[k.index]).abs() >= min_separation)
        {
            kept.push(c);
        }
    }

    let mut peaks: Vec<Peak<T>> = kept
        .into_iter()
        .map(|c| {
            let i = c.index;
            // parabolic center refinement on the log-scale curve
            let denom = y[i - 1] - T::of(2.0) * y[i] + y[i + 1];
            let center = if denom < T::zero() {
                let d = T::of(0.5) * (y[i - 1] - y[i + 1]) / denom;
                let d = d.max(-T::of(0.5)).min(T::of(0.5));
                om[i] + d * (om[i + 1] - om[i])
            } else {
                om[i]
            };
            Peak {
                center,
                height: s[i],
                half_width: half_width_at(s, om, i),
                prominence: c.prominence,
            }
        })
        .collect();
    peaks.sort_by(|a, b| a.center.partial_cmp(&b.center).expect("finite centers"));
    PeakSet { peaks }
}

/// Half the distance between the linear half-prominence crossings around a
/// local maximum, with linear interpolation between grid points.
fn half_width_at<T: Real>(s: &[T], om: &[T], i: usize) -> T {
    let n = s.len();
    let pv = s[i];
    let mut lmin = pv;
    let mut k = i;
    while k > 0 && s[k - 1] <= pv {
        k -= 1;
        lmin = lmin.min(s[k]);
    }
    let mut rmin = pv;
    let mut k = i;
    while k + 1 < n && s[k + 1] <= pv {
        k += 1;
        rmin = rmin.min(s[k]);
    }
    let level = pv - (pv - lmin.max(rmin)) * T::of(0.5);

    let mut k = i;
    while k > 0 && s[k] > level {
        k -= 1;
    }
    let left = if s[k] > level {
        om[k]
    } else {
        interp(s[k], s[k + 1], om[k], om[k + 1], level)
    };
    let mut k = i;
    while k + 1 < n && s[k] > level {
        k += 1;
    }
    let right = if s[k] > level {
        om[k]
    } else {
        interp(s[k - 1], s[k], om[k - 1], om[k], level)
    };
    (right - left) * T::of(0.5)
}

fn interp<T: Real>(s0: T, s1: T, x0: T, x1: T, level: T) -> T {
    if s1 == s0 {
        return (x0 + x1) * T::of(0.5);
    }
    x0 + (level - s0) / (s1 - s0) * (x1 - x0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{build_liouvillian, steady_state, DriveParameters};
    use crate::geometry::build_couplings;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64 as C64;

    fn single_atom() -> EmitterLayout<f64> {
        EmitterLayout::geometric(vec![[0.0, 0.0, 0.0]], [0.0, 0.0, 1.0]).unwrap()
    }

    fn drive(rabi: f64, det: f64) -> DriveParameters<f64> {
        DriveParameters::new(rabi, det, [1.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn field_operator_at_origin_is_total_lowering() {
        let layout = single_atom();
        let f = field_operator(&layout, [0.0, 0.0, 1.0]).unwrap();
        let sm = site_lowering::<f64>(0, 1).unwrap();
        assert_eq!(f.operator.matrix(), sm.matrix());
    }

    #[test]
    fn field_operator_half_wavelength_phase() {
        // second atom at distance pi along the detection axis picks up
        // e^{-i pi} = -1
        let layout = EmitterLayout::geometric(
            vec![[0.0, 0.0, 0.0], [0.0, 0.0, std::f64::consts::PI]],
            [1.0, 0.0, 0.0],
        )
        .unwrap();
        let f = field_operator(&layout, [0.0, 0.0, 1.0]).unwrap();
        let s0 = site_lowering::<f64>(0, 2).unwrap();
        let s1 = site_lowering::<f64>(1, 2).unwrap();
        let expect = s0.matrix() - s1.matrix();
        for (a, b) in f.operator.matrix().iter().zip(expect.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn g1_is_one_at_zero_delay() {
        let layout = single_atom();
        let couplings = build_couplings(&layout).unwrap();
        let l = build_liouvillian(&layout, &couplings, &drive(3.0, 0.0)).unwrap();
        let ss = steady_state(&l).unwrap();
        let f = field_operator(&layout, [0.0, 0.0, 1.0]).unwrap();
        let trace = g1_correlation(&l, &ss, &f, 0.01, 1.0).unwrap();
        assert!((trace.values[0] - C64::new(1.0, 0.0)).norm() < 1e-9);
        assert!(trace
            .values
            .iter()
            .all(|g| g.norm() <= 1.0 + 1e-6));
    }

    #[test]
    fn g1_dark_system_raises_zero_emission() {
        let layout = single_atom();
        let couplings = build_couplings(&layout).unwrap();
        let l = build_liouvillian(&layout, &couplings, &drive(0.0, 0.0)).unwrap();
        let ss = steady_state(&l).unwrap();
        let f = field_operator(&layout, [0.0, 0.0, 1.0]).unwrap();
        match g1_correlation(&l, &ss, &f, 0.01, 1.0) {
            Err(Error::ZeroEmission) => {}
            other => panic!("expected zero-emission error, got {other:?}"),
        }
    }

    #[test]
    fn g1_matches_independent_rk4_integration() {
        // independent oracle: integrate d x/dtau = L x with classic RK4
        // instead of the matrix exponential
        let layout = single_atom();
        let couplings = build_couplings(&layout).unwrap();
        let l = build_liouvillian(&layout, &couplings, &drive(200.0, 0.0)).unwrap();
        let ss = steady_state(&l).unwrap();
        let f = field_operator(&layout, [0.0, 0.0, 1.0]).unwrap();
        let spacing = 0.01;
        let trace = g1_correlation(&l, &ss, &f, spacing, 2.0).unwrap();

        let e_dag = &f.operator;
        let e = e_dag.dagger();
        let x0 = vectorize::<f64>(&ss.rho.matrix().dot(e.matrix()));
        let w = trace_weights::<f64>(e_dag);
        let denom = w.dot(&x0).re;
        let lm = l.matrix();
        let h = 5.0e-5;
        let sub = (spacing / h).round() as usize;
        let mut x = x0;
        let mut oracle = vec![w.dot(&x) / denom];
        for _ in 0..trace.values.len() - 1 {
            for _ in 0..sub {
                let k1 = lm.dot(&x);
                let k2 = lm.dot(&(&x + &(&k1 * C64::new(h / 2.0, 0.0))));
                let k3 = lm.dot(&(&x + &(&k2 * C64::new(h / 2.0, 0.0))));
                let k4 = lm.dot(&(&x + &(&k3 * C64::new(h, 0.0))));
                x = &x
                    + &((&k1 + &(&k2 * C64::new(2.0, 0.0)) + &(&k3 * C64::new(2.0, 0.0)) + &k4)
                        * C64::new(h / 6.0, 0.0));
            }
            oracle.push(w.dot(&x) / denom);
        }
        for (a, b) in trace.values.iter().zip(oracle.iter()) {
            assert!((a - b).norm() < 1e-6, "{a} vs {b}");
        }
    }

    fn synthetic_trace(rate: f64, spacing: f64, duration: f64) -> CorrelationTrace<f64> {
        let n = (duration / spacing).round() as usize + 1;
        let values = (0..n)
            .map(|k| C64::new((-rate * spacing * k as f64).exp(), 0.0))
            .collect();
        CorrelationTrace {
            tau_spacing: spacing,
            values,
            plateau: C64::new(0.0, 0.0),
            steady_rho: DensityMatrix::ground(1),
        }
    }

    #[test]
    fn fourier_of_exponential_is_lorentzian() {
        let trace = synthetic_trace(0.5, 2.5e-4, 40.0);
        let spec = spectrum_fourier(&trace, 50.0).unwrap();
        let peaks = detect_peaks(&spec, 1.0, 0.5);
        assert_eq!(peaks.len(), 1);
        let p = &peaks.peaks[0];
        assert_abs_diff_eq!(p.center, 0.0, epsilon = 1e-6);
        // S(w) = 2 * 0.5 / (0.25 + w^2): height 4, half width 1/2
        assert_abs_diff_eq!(p.height, 4.0, epsilon = 1e-2);
        assert_abs_diff_eq!(p.half_width, 0.5, epsilon = 0.01);
    }

    #[test]
    fn fourier_matches_two_sided_dft_oracle() {
        // Hermitian extension makes the one-sided 2*Re transform equal the
        // full two-sided transform of g(-tau) = conj(g(tau)).
        let trace = synthetic_trace(0.5, 0.01, 60.0);
        let spec = spectrum_fourier(&trace, 20.0).unwrap();
        let n = trace.values.len();
        for probe in [0usize, spec.omega.len() / 3, spec.omega.len() - 1] {
            let om = spec.omega[probe];
            let mut acc = C64::new(0.0, 0.0);
            for k in -(n as isize - 1)..n as isize {
                let g = if k >= 0 {
                    trace.values[k as usize]
                } else {
                    trace.values[(-k) as usize].conj()
                };
                let tau = trace.tau_spacing * k as f64;
                let w = if k == -(n as isize - 1) || k == n as isize - 1 {
                    0.5
                } else {
                    1.0
                };
                acc += g * C64::new(0.0, -om * tau).exp() * w * trace.tau_spacing;
            }
            // taper affects only the last 10%, where the signal is ~e^{-27}
            assert_abs_diff_eq!(spec.values[probe], acc.re, epsilon = 1e-8);
            assert!(acc.im.abs() < 1e-10);
        }
    }

    #[test]
    fn fourier_rejects_short_trace() {
        let layout = single_atom();
        let couplings = build_couplings(&layout).unwrap();
        let l = build_liouvillian(&layout, &couplings, &drive(200.0, 0.0)).unwrap();
        let ss = steady_state(&l).unwrap();
        let f = field_operator(&layout, [0.0, 0.0, 1.0]).unwrap();
        let trace = g1_correlation(&l, &ss, &f, 2.5e-4, 3.0).unwrap();
        match spectrum_fourier(&trace, 300.0) {
            Err(Error::TraceTooShort { required, .. }) => {
                assert!(required > 3.0, "estimate {required} should exceed the window");
            }
            other => panic!("expected trace-too-short, got {other:?}"),
        }
    }

    #[test]
    fn eigen_spectrum_weak_drive_single_lorentzian() {
        let layout = single_atom();
        let couplings = build_couplings(&layout).unwrap();
        let l = build_liouvillian(&layout, &couplings, &drive(0.1, 0.0)).unwrap();
        let ss = steady_state(&l).unwrap();
        let f = field_operator(&layout, [0.0, 0.0, 1.0]).unwrap();
        let grid: Vec<f64> = (-400..=400).map(|k| k as f64 * 0.05).collect();
        let spec = spectrum_eigen(&l, &ss, &f, &grid).unwrap();
        let peaks = detect_peaks(&spec, 1.0, 0.5);
        assert_eq!(peaks.len(), 1);
        assert!(peaks.peaks[0].center.abs() < 0.1);
    }

    #[test]
    fn cross_method_agreement_single_atom() {
        let layout = single_atom();
        let couplings = build_couplings(&layout).unwrap();
        let l = build_liouvillian(&layout, &couplings, &drive(200.0, 0.0)).unwrap();
        let ss = steady_state(&l).unwrap();
        let f = field_operator(&layout, [0.0, 0.0, 1.0]).unwrap();
        let trace = g1_correlation(&l, &ss, &f, 2.5e-4, 40.0).unwrap();
        let four = spectrum_fourier(&trace, 500.0).unwrap();
        let eig = spectrum_eigen(&l, &ss, &f, &four.omega).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 0..four.omega.len() {
            if four.omega[k].abs() <= 1.0 {
                continue;
            }
            num += (four.values[k] - eig.values[k]).powi(2);
            den += eig.values[k].powi(2);
        }
        let rel = (num / den).sqrt();
        assert!(rel < 1e-3, "relative L2 difference {rel}");
    }

    #[test]
    fn eigen_spectrum_sum_rule() {
        // integral of S / 2pi plus the coherent weight recovers g(0) = 1
        let layout = single_atom();
        let couplings = build_couplings(&layout).unwrap();
        let l = build_liouvillian(&layout, &couplings, &drive(200.0, 0.0)).unwrap();
        let ss = steady_state(&l).unwrap();
        let f = field_operator(&layout, [0.0, 0.0, 1.0]).unwrap();
        let grid: Vec<f64> = {
            let mut g = Vec::new();
            let mut w = -2000.0;
            while w <= 2000.0 {
                g.push(w);
                w += 0.02;
            }
            g
        };
        let spec = spectrum_eigen(&l, &ss, &f, &grid).unwrap();
        let mut integral = 0.0;
        for k in 1..grid.len() {
            integral += 0.5 * (spec.values[k] + spec.values[k - 1]) * (grid[k] - grid[k - 1]);
        }
        let total = integral / (2.0 * std::f64::consts::PI) + spec.coherent_weight;
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn spectra_are_nonnegative_up_to_tolerance() {
        let layout = single_atom();
        let couplings = build_couplings(&layout).unwrap();
        let l = build_liouvillian(&layout, &couplings, &drive(200.0, 0.0)).unwrap();
        let ss = steady_state(&l).unwrap();
        let f = field_operator(&layout, [0.0, 0.0, 1.0]).unwrap();
        let trace = g1_correlation(&l, &ss, &f, 2.5e-4, 40.0).unwrap();
        let four = spectrum_fourier(&trace, 500.0).unwrap();
        let floor = -1e-6 * four.max_value();
        assert!(four.values.iter().all(|&v| v >= floor));
        let eig = spectrum_eigen(&l, &ss, &f, &four.omega).unwrap();
        let floor = -1e-6 * eig.max_value();
        assert!(eig.values.iter().all(|&v| v >= floor));
        // the frequency grid is symmetric about zero
        let n = four.omega.len();
        for k in 0..n {
            assert!((four.omega[k] + four.omega[n - 1 - k]).abs() < 1e-9);
        }
    }

    #[test]
    fn detect_peaks_on_synthetic_lorentzians() {
        // oracle: construct five known lines and recover them
        let centers = [-300.0, -120.0, 0.0, 55.0, 310.0];
        let heights = [1.0, 0.01, 2.0, 0.5, 0.1];
        let widths = [1.0, 0.5, 0.7, 2.0, 1.0];
        let mut omega = Vec::new();
        let mut values = Vec::new();
        let mut w = -400.0;
        while w <= 400.0 {
            let mut s = 1e-12;
            for k in 0..5 {
                let d: f64 = w - centers[k];
                s += heights[k] * widths[k] * widths[k] / (widths[k] * widths[k] + d * d);
            }
            omega.push(w);
            values.push(s);
            w += 0.05;
        }
        let spec = Spectrum {
            omega,
            values,
            coherent_weight: 0.0,
            method: SpectrumMethod::EigenDecomposition,
        };
        let peaks = detect_peaks(&spec, 1.0, 2.0);
        assert_eq!(peaks.len(), 5);
        for (p, c) in peaks.peaks.iter().zip(centers.iter()) {
            assert!((p.center - c).abs() <= 0.05, "{} vs {}", p.center, c);
        }
        // sorted by center, positive heights
        for pair in peaks.peaks.windows(2) {
            assert!(pair[0].center < pair[1].center);
        }
        assert!(peaks.peaks.iter().all(|p| p.height > 0.0));
        // half widths at half maximum recover the Lorentzian widths
        for (p, wth) in peaks.peaks.iter().zip(widths.iter()) {
            assert_abs_diff_eq!(p.half_width, *wth, epsilon = 0.1 * wth);
        }
    }

    #[test]
    fn detect_peaks_flat_spectrum_is_empty() {
        let spec = Spectrum {
            omega: (0..200).map(|k| k as f64 * 0.1 - 10.0).collect(),
            values: vec![1.0; 200],
            coherent_weight: 0.0,
            method: SpectrumMethod::WindowedFourier,
        };
        assert!(detect_peaks(&spec, 1.0, 2.0).is_empty());
    }

    #[test]
    fn detect_peaks_min_separation_keeps_taller() {
        let mut omega = Vec::new();
        let mut values = Vec::new();
        let mut w = -20.0;
        while w <= 20.0 {
            let d1: f64 = w - 0.0;
            let d2: f64 = w - 1.0;
            let s = 2.0 * 0.04 / (0.04 + d1 * d1) + 1.0 * 0.04 / (0.04 + d2 * d2) + 1e-12;
            omega.push(w);
            values.push(s);
            w += 0.02;
        }
        let spec = Spectrum {
            omega,
            values,
            coherent_weight: 0.0,
            method: SpectrumMethod::EigenDecomposition,
        };
        let merged = detect_peaks(&spec, 0.2, 2.0);
        assert_eq!(merged.len(), 1);
        assert!(merged.peaks[0].center.abs() < 0.05);
        let split = detect_peaks(&spec, 0.2, 0.5);
        assert_eq!(split.len(), 2);
    }
}
