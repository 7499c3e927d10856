//! Spectral representation of periodic metric data on a torus grid.
//!
//! Metric components are sampled on a power-of-two lattice over the unit
//! cell of C^n / Λ (one real coordinate pair per complex dimension) and held
//! as Fourier coefficients. Wirtinger partials of any order are exact
//! multiplications in frequency space, so grid points get machine-precision
//! jets rather than finite-difference stencils.

use ndarray::{ArrayD, Axis, Dimension, IxDyn};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{HcfError, Result};
use crate::jets::ComplexJet;

/// In-place multidimensional FFT. `inverse = false` maps samples to
/// (normalized) Fourier coefficients.
pub fn fft_nd(data: &mut ArrayD<Complex64>, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let ndim = data.ndim();
    for ax in 0..ndim {
        let len = data.shape()[ax];
        let fft = if inverse {
            planner.plan_fft_inverse(len)
        } else {
            planner.plan_fft_forward(len)
        };
        let mut scratch = vec![Complex64::ZERO; len];
        for mut lane in data.lanes_mut(Axis(ax)) {
            for (s, v) in scratch.iter_mut().zip(lane.iter()) {
                *s = *v;
            }
            fft.process(&mut scratch);
            for (v, s) in lane.iter_mut().zip(&scratch) {
                *v = *s;
            }
        }
    }
    if !inverse {
        let norm = 1.0 / data.len() as f64;
        data.mapv_inplace(|c| c * norm);
    }
}

fn signed_freq(t: usize, d: usize) -> i64 {
    if t < d / 2 {
        t as i64
    } else {
        t as i64 - d as i64
    }
}

/// Periodic metric samples in frequency space.
#[derive(Clone)]
pub struct GridMetric {
    pub n: usize,
    /// Real-coordinate grid dims, length 2n: (x_1, y_1, x_2, y_2, ...).
    pub dims: Vec<usize>,
    /// Fourier coefficients of g_{i \bar j}, row-major over (i, j).
    pub coeffs: Vec<ArrayD<Complex64>>,
}

impl GridMetric {
    /// Build from position-space samples of each component.
    pub fn from_samples(n: usize, dims: Vec<usize>, mut samples: Vec<ArrayD<Complex64>>) -> Result<Self> {
        if dims.len() != 2 * n || samples.len() != n * n {
            return Err(HcfError::Structural("grid metric shape mismatch".into()));
        }
        for &d in &dims {
            if !d.is_power_of_two() {
                return Err(HcfError::BadParams(format!("grid dim {d} is not a power of two")));
            }
        }
        for s in &mut samples {
            fft_nd(s, false);
        }
        Ok(GridMetric { n, dims, coeffs: samples })
    }

    pub fn grid_len(&self) -> usize {
        self.dims.iter().product()
    }

    /// Real coordinates of grid node `idx`, as complex chart coordinates.
    pub fn node_point(&self, idx: &[usize]) -> Vec<Complex64> {
        (0..self.n)
            .map(|j| {
                Complex64::new(
                    idx[2 * j] as f64 / self.dims[2 * j] as f64,
                    idx[2 * j + 1] as f64 / self.dims[2 * j + 1] as f64,
                )
            })
            .collect()
    }

    /// Position-space samples of one component (inverse transform).
    pub fn component_samples(&self, i: usize, j: usize) -> ArrayD<Complex64> {
        let mut c = self.coeffs[i * self.n + j].clone();
        fft_nd(&mut c, true);
        c
    }

    /// Wirtinger derivative multiplier for one frequency vector.
    fn deriv_factor(&self, freq: &[i64], holo: &[u8], anti: &[u8]) -> Complex64 {
        let mut f = Complex64::ONE;
        for j in 0..self.n {
            let kx = freq[2 * j] as f64;
            let ky = freq[2 * j + 1] as f64;
            let pi = std::f64::consts::PI;
            // d/dz_j multiplies by pi*(i kx + ky); d/dzbar_j by pi*(i kx - ky)
            let dz = Complex64::new(pi * ky, pi * kx);
            let dzb = Complex64::new(-pi * ky, pi * kx);
            for _ in 0..holo[j] {
                f *= dz;
            }
            for _ in 0..anti[j] {
                f *= dzb;
            }
        }
        f
    }

    /// Jets of all components at an arbitrary chart point, by direct Fourier
    /// summation. Exact for the band-limited interpolant.
    pub fn eval_jets(&self, z: &[Complex64], order: usize) -> Result<Vec<ComplexJet>> {
        let n = self.n;
        let x: Vec<f64> = (0..2 * n)
            .map(|v| if v % 2 == 0 { z[v / 2].re } else { z[v / 2].im })
            .collect();
        // enumerate derivative combos up to `order`
        let combos = derivative_combos(n, order);
        let mut out = Vec::with_capacity(n * n);
        for comp in &self.coeffs {
            let mut jet = ComplexJet::zero(z, order);
            let mut partials: Vec<Complex64> = vec![Complex64::ZERO; combos.len()];
            for (idx, &c) in comp.indexed_iter() {
                if c.norm() == 0.0 {
                    continue;
                }
                let freq: Vec<i64> = idx
                    .slice()
                    .iter()
                    .enumerate()
                    .map(|(ax, &t)| signed_freq(t, self.dims[ax]))
                    .collect();
                let mut phase = 0.0;
                for v in 0..2 * n {
                    phase += freq[v] as f64 * x[v];
                }
                let e = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * phase) * c;
                for (ci, (holo, anti)) in combos.iter().enumerate() {
                    partials[ci] += e * self.deriv_factor(&freq, holo, anti);
                }
            }
            for (ci, (holo, anti)) in combos.iter().enumerate() {
                set_jet_partial(&mut jet, holo, anti, partials[ci]);
            }
            out.push(jet);
        }
        Ok(out)
    }

    /// Jets of every component at every grid node at once, via |combos|
    /// inverse FFTs per component. Returns, per component, an array over the
    /// grid whose entries are jets of the requested order.
    pub fn grid_jets(&self, order: usize) -> Vec<ArrayD<ComplexJet>> {
        let n = self.n;
        let combos = derivative_combos(n, order);
        let mut out = Vec::with_capacity(n * n);
        for comp in &self.coeffs {
            // derivative value arrays for each combo
            let mut derivs: Vec<ArrayD<Complex64>> = Vec::with_capacity(combos.len());
            for (holo, anti) in &combos {
                let mut d = comp.clone();
                for (idx, v) in d.indexed_iter_mut() {
                    let freq: Vec<i64> = idx
                        .slice()
                        .iter()
                        .enumerate()
                        .map(|(ax, &t)| signed_freq(t, self.dims[ax]))
                        .collect();
                    *v *= self.deriv_factor(&freq, holo, anti);
                }
                fft_nd(&mut d, true);
                derivs.push(d);
            }
            let proto_center = vec![Complex64::ZERO; n];
            let mut jets = ArrayD::from_elem(
                IxDyn(&self.dims),
                ComplexJet::zero(&proto_center, order),
            );
            for (idx, jet) in jets.indexed_iter_mut() {
                let pt = self.node_point(idx.slice());
                let mut j = ComplexJet::zero(&pt, order);
                for (ci, (holo, anti)) in combos.iter().enumerate() {
                    set_jet_partial(&mut j, holo, anti, derivs[ci][idx.clone()]);
                }
                *jet = j;
            }
            out.push(jets);
        }
        out
    }
}

/// All (alpha, beta) derivative combos with |alpha| + |beta| <= order.
pub fn derivative_combos(n: usize, order: usize) -> Vec<(Vec<u8>, Vec<u8>)> {
    let space = crate::jets::JetSpace::get(n, order);
    (0..space.len())
        .map(|s| {
            let m = space.mono(s);
            (m.holo, m.anti)
        })
        .collect()
}

fn set_jet_partial(jet: &mut ComplexJet, holo: &[u8], anti: &[u8], partial: Complex64) {
    let fact = |e: &[u8]| -> f64 {
        e.iter().map(|&k| (1..=k as u64).product::<u64>() as f64).product()
    };
    jet.set_coeff(holo, anti, partial / (fact(holo) * fact(anti)));
}
