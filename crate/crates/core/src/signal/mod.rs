//! Sampled complex signals on regular grids, with L² quadrature, FFT
//! convolution and sub-sampling.
//!
//! All L² quantities use the Riemann weight Δ^d. Convolution is circular
//! (periodic boundary); signals used in experiments are kept inside the
//! central half of the domain so wrap-around stays below discretization
//! error.
//!
//! DFT convention: `f̂_k = Σ_j f_j e^{-2πi jk/N}` (unnormalized), hence
//! `‖f‖₂² = Δ^d/N · Σ_k |f̂_k|²`.

mod fft;
mod grid;
pub mod io;

use std::sync::OnceLock;

pub use grid::{japanese_bracket, Grid};
pub use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    grid: Grid,
    samples: Vec<Complex64>,
}

impl Signal {
    pub fn new(grid: Grid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {}",
                samples.len(),
                grid.len()
            )));
        }
        Ok(Signal { grid, samples })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Signal {
            samples: vec![Complex64::default(); grid.len()],
            grid: grid.clone(),
        }
    }

    /// Samples `f` at every grid point. The closure receives the first
    /// `d` coordinates.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let d = grid.dim();
        let samples = grid.points().map(|p| f(&p[..d])).collect();
        Signal {
            grid: grid.clone(),
            samples,
        }
    }

    pub fn from_real_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        Signal::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn from_real(grid: &Grid, values: &[f64]) -> Result<Self> {
        Signal::new(
            grid.clone(),
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    /// Discrete delta of mass Δ^{-d} at the origin; the convolution identity.
    pub fn delta(grid: &Grid) -> Self {
        let mut s = Signal::zeros(grid);
        s.samples[center_index(grid)] = Complex64::new(1.0 / grid.cell_volume(), 0.0);
        s
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    #[inline]
    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    /// `‖f‖₂² = Δ^d Σ|f_i|²`, summed in storage order.
    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.cell_volume() * self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.grid.cell_volume() * self.samples.iter().map(|z| z.norm()).sum::<f64>()
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `‖self − other‖₂²`.
    pub fn distance_sq(&self, other: &Signal) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        let s: f64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok(self.grid.cell_volume() * s)
    }

    pub fn distance(&self, other: &Signal) -> Result<f64> {
        Ok(self.distance_sq(other)?.sqrt())
    }

    pub fn sub(&self, other: &Signal) -> Result<Signal> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Signal) -> Result<Signal> {
        self.zip_with(other, |a, b| a + b)
    }

    fn zip_with(
        &self,
        other: &Signal,
        op: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Signal> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Signal {
            grid: self.grid.clone(),
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        })
    }

    pub fn scaled(&self, c: f64) -> Signal {
        self.map(|z| z * c)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Signal {
        Signal {
            grid: self.grid.clone(),
            samples: self.samples.iter().map(|&z| f(z)).collect(),
        }
    }

    /// Unnormalized DFT of the samples.
    pub fn dft(&self) -> Vec<Complex64> {
        let mut hat = self.samples.clone();
        fft::forward(self.grid.extents(), &mut hat);
        hat
    }

    /// Circular shift by `shift[axis]` samples: `out[i] = f[i − shift]`.
    pub fn circular_shift(&self, shift: &[isize]) -> Signal {
        let g = &self.grid;
        let ext = g.extents();
        let mut out = Signal::zeros(g);
        for flat in 0..g.len() {
            let idx = g.unravel(flat);
            let mut src = [0usize; 2];
            for a in 0..g.dim() {
                let n = ext[a] as isize;
                src[a] = (idx[a] as isize - shift[a]).rem_euclid(n) as usize;
            }
            out.samples[flat] = self.samples[g.ravel(src)];
        }
        out
    }
}

/// Flat index of the sample whose coordinate is `offset·Δ` from the origin,
/// wrapped periodically.
fn centered_index(grid: &Grid, offset: [isize; 2]) -> usize {
    let mut idx = [0usize; 2];
    for (a, &n) in grid.extents().iter().enumerate() {
        let n = n as isize;
        idx[a] = (offset[a] + n / 2).rem_euclid(n) as usize;
    }
    grid.ravel(idx)
}

/// A convolution operator `f ↦ f ∗ g` with `g` fixed.
///
/// The transfer function `T_k = Δ^d · DFT(g rolled so the origin sample
/// sits at index 0)_k` approximates the continuous Fourier transform ĝ at
/// the DFT frequencies; `f ∗ g = IDFT(f̂ · T) / N`. A kernel with a single
/// non-zero sample is applied as an exact scaled circular shift instead.
#[derive(Clone, Debug)]
pub struct Kernel {
    grid: Grid,
    transfer: Vec<Complex64>,
    impulse: Option<Impulse>,
}

#[derive(Clone, Copy, Debug)]
struct Impulse {
    shift: [isize; 2],
    weight: Complex64,
}

impl Kernel {
    pub fn new(g: &Signal) -> Kernel {
        let grid = g.grid.clone();
        let mut rolled = vec![Complex64::default(); grid.len()];
        let ext = grid.extents();
        let mut nonzero = Vec::new();
        for (flat, &v) in g.samples.iter().enumerate() {
            let idx = grid.unravel(flat);
            let mut offset = [0isize; 2];
            for a in 0..grid.dim() {
                offset[a] = idx[a] as isize - (ext[a] / 2) as isize;
            }
            // offset o lands at rolled index o mod n
            let mut ridx = [0usize; 2];
            for a in 0..grid.dim() {
                ridx[a] = offset[a].rem_euclid(ext[a] as isize) as usize;
            }
            rolled[grid.ravel(ridx)] = v;
            if v != Complex64::default() {
                nonzero.push((offset, v));
            }
        }
        let w = grid.cell_volume();
        fft::forward(ext, &mut rolled);
        for t in rolled.iter_mut() {
            *t *= w;
        }
        let impulse = match nonzero.as_slice() {
            [(shift, v)] => Some(Impulse {
                shift: *shift,
                weight: v * w,
            }),
            _ => None,
        };
        Kernel {
            grid,
            transfer: rolled,
            impulse,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Transfer function values at the DFT bins (storage order).
    pub fn transfer(&self) -> &[Complex64] {
        &self.transfer
    }

    pub fn scaled(&self, c: f64) -> Kernel {
        Kernel {
            grid: self.grid.clone(),
            transfer: self.transfer.iter().map(|t| t * c).collect(),
            impulse: self.impulse.map(|i| Impulse {
                shift: i.shift,
                weight: i.weight * c,
            }),
        }
    }

    pub fn apply(&self, f: &Signal) -> Result<Signal> {
        self.apply_to(&SpectralInput::new(f))
    }

    /// Convolves a signal whose DFT may be shared between several kernels.
    pub fn apply_to(&self, input: &SpectralInput<'_>) -> Result<Signal> {
        let f = input.signal;
        self.grid.ensure_same(&f.grid)?;
        if let Some(imp) = self.impulse {
            let shifted = f.circular_shift(&imp.shift);
            return Ok(if imp.weight == Complex64::new(1.0, 0.0) {
                shifted
            } else {
                shifted.map(|z| z * imp.weight)
            });
        }
        let hat = input.dft();
        let n = self.grid.len() as f64;
        let mut out: Vec<Complex64> = hat.iter().zip(&self.transfer).map(|(a, t)| a * t).collect();
        fft::inverse(self.grid.extents(), &mut out);
        for z in out.iter_mut() {
            *z /= n;
        }
        Ok(Signal {
            grid: self.grid.clone(),
            samples: out,
        })
    }
}

/// A signal with a lazily computed, thread-safe cached DFT.
pub struct SpectralInput<'a> {
    signal: &'a Signal,
    hat: OnceLock<Vec<Complex64>>,
}

impl<'a> SpectralInput<'a> {
    pub fn new(signal: &'a Signal) -> Self {
        SpectralInput {
            signal,
            hat: OnceLock::new(),
        }
    }

    pub fn signal(&self) -> &Signal {
        self.signal
    }

    pub fn dft(&self) -> &[Complex64] {
        self.hat.get_or_init(|| self.signal.dft())
    }
}

/// Continuous-convolution approximation `(f ∗ g)(x) ≈ Δ^d Σ_y f(y) g(x − y)`
/// with periodic wrap-around.
pub fn fft_convolve(f: &Signal, g: &Signal) -> Result<Signal> {
    f.grid.ensure_same(&g.grid)?;
    Kernel::new(g).apply(f)
}

/// Dilation `x ↦ R^{d/2} f(R·x)` realized by keeping every `R`-th sample.
///
/// The output grid keeps the spacing and has `extent/R` samples per axis,
/// i.e. it covers the dilated (shrunk) domain, which makes the operation an
/// exact isometry on signals that are constant on `R`-blocks.
pub fn subsample(f: &Signal, factor: usize) -> Result<Signal> {
    let out_grid = f.grid.dilated(factor)?;
    if factor == 1 {
        return Ok(f.clone());
    }
    let scale = (factor as f64).powf(f.grid.dim() as f64 / 2.0);
    let samples = (0..out_grid.len())
        .map(|flat| {
            let idx = out_grid.unravel(flat);
            let src = f.grid.ravel([idx[0] * factor, idx[1] * factor]);
            f.samples[src] * scale
        })
        .collect();
    Ok(Signal {
        grid: out_grid,
        samples,
    })
}

pub(crate) fn center_index(grid: &Grid) -> usize {
    centered_index(grid, [0, 0])
}
