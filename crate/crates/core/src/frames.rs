//! Filter banks `Ψ = {g_λ} ∪ {χ}`: construction, DFT-domain Bessel bounds,
//! and normalization to weak admissibility.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{Complex64, Grid, Kernel, Signal};

/// One convolution atom with its precomputed transfer function.
#[derive(Clone, Debug)]
pub struct Atom {
    name: String,
    signal: Signal,
    kernel: Kernel,
}

impl Atom {
    pub fn new(name: impl Into<String>, signal: Signal) -> Result<Atom> {
        let name = name.into();
        if signal
            .samples()
            .iter()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::DegenerateParameters(format!(
                "atom {name} has non-finite samples"
            )));
        }
        let kernel = Kernel::new(&signal);
        Ok(Atom {
            name,
            signal,
            kernel,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn signal(&self) -> &Signal {
        &self.signal
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    fn scaled(&self, c: f64) -> Atom {
        Atom {
            name: self.name.clone(),
            signal: self.signal.scaled(c),
            kernel: self.kernel.scaled(c),
        }
    }
}

/// Propagation atoms (labelled `0..len`) plus the output-generating atom χ.
#[derive(Clone, Debug)]
pub struct FilterBank {
    grid: Grid,
    output: Atom,
    atoms: Vec<Atom>,
}

impl FilterBank {
    pub fn new(output: Atom, atoms: Vec<Atom>) -> Result<FilterBank> {
        let grid = output.signal.grid().clone();
        for a in &atoms {
            grid.ensure_same(a.signal.grid())?;
        }
        Ok(FilterBank {
            grid,
            output,
            atoms,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn output_atom(&self) -> &Atom {
        &self.output
    }

    /// Propagation atoms; the label of an atom is its index here.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, label: usize) -> Result<&Atom> {
        self.atoms.get(label).ok_or(Error::UnknownLabel {
            label,
            count: self.atoms.len(),
        })
    }

    fn all_atoms(&self) -> impl Iterator<Item = &Atom> {
        std::iter::once(&self.output).chain(&self.atoms)
    }

    /// Littlewood–Paley sum `Σ_λ |ĝ_λ(ω_k)|²` (χ included) at every DFT bin.
    pub fn littlewood_paley(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.grid.len()];
        for atom in self.all_atoms() {
            for (a, t) in acc.iter_mut().zip(atom.kernel.transfer()) {
                *a += t.norm_sqr();
            }
        }
        acc
    }

    /// Scales every atom (χ included) by `c`.
    pub fn scaled(&self, c: f64) -> FilterBank {
        FilterBank {
            grid: self.grid.clone(),
            output: self.output.scaled(c),
            atoms: self.atoms.iter().map(|a| a.scaled(c)).collect(),
        }
    }
}

/// Optimal Bessel bound of the bank on its grid: `max_k Σ_λ |ĝ_λ(ω_k)|²`.
///
/// On a periodic grid this is exact: `Σ_λ ‖f ∗ g_λ‖₂² ≤ B‖f‖₂²` for every
/// signal, with equality approached by a signal concentrated at the arg-max
/// bin.
pub fn bessel_bound(bank: &FilterBank) -> f64 {
    bank.littlewood_paley().into_iter().fold(0.0, f64::max)
}

/// A bank rescaled to weak admissibility together with the applied factor.
#[derive(Clone, Debug)]
pub struct Normalized {
    pub bank: FilterBank,
    pub scale: f64,
}

/// Rescales atoms by `c = min(1, (B·max(1, L²))^{-1/2})` so that
/// `max{B, B·L²} ≤ 1` for the result.
///
/// The factor is nudged down by a few ulps when rounding would leave the
/// recomputed product above one, so a normalized bank always passes and a
/// second normalization is the identity.
pub fn normalize_bank(bank: &FilterBank, lipschitz: f64) -> Normalized {
    let m = lipschitz.powi(2).max(1.0);
    let b = bessel_bound(bank);
    if b * m <= 1.0 {
        return Normalized {
            bank: bank.clone(),
            scale: 1.0,
        };
    }
    let mut c = 1.0 / (b * m).sqrt();
    loop {
        let scaled = bank.scaled(c);
        if bessel_bound(&scaled) * m <= 1.0 {
            return Normalized {
                bank: scaled,
                scale: c,
            };
        }
        c *= 1.0 - 4.0 * f64::EPSILON;
    }
}

/// Unit-mass Gaussian `(2πσ²)^{-d/2} e^{-|x|²/(2σ²)}`, whose Fourier
/// transform is `e^{-2π²σ²|ω|²}`.
pub(crate) fn gaussian(grid: &Grid, sigma: f64) -> Signal {
    let d = grid.dim() as f64;
    let norm = (2.0 * PI * sigma * sigma).powf(-d / 2.0);
    Signal::from_real_fn(grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        norm * (-r2 / (2.0 * sigma * sigma)).exp()
    })
}

fn ensure_fits(grid: &Grid, sigma: f64, what: &str) -> Result<()> {
    let half = (0..grid.dim())
        .map(|a| grid.side(a))
        .fold(f64::INFINITY, f64::min)
        / 2.0;
    if sigma > half {
        return Err(Error::DegenerateParameters(format!(
            "{what} width {sigma} too large for a domain of half-width {half}"
        )));
    }
    Ok(())
}

/// Weyl–Heisenberg bank: a Gaussian window of standard deviation `width`
/// as χ, and its modulations `e^{2πi⟨ξ, x⟩}` for every non-zero center
/// frequency ξ (cycles per unit length) as propagation atoms.
pub fn make_gabor_bank(
    grid: &Grid,
    center_frequencies: &[Vec<f64>],
    width: f64,
) -> Result<FilterBank> {
    if !(width > 0.0) {
        return Err(Error::DegenerateParameters(
            "gabor width must be positive".into(),
        ));
    }
    if center_frequencies.is_empty() {
        return Err(Error::DegenerateParameters("no center frequencies".into()));
    }
    ensure_fits(grid, width, "gabor window")?;
    let d = grid.dim();
    let window = gaussian(grid, width);
    let mut atoms = Vec::with_capacity(center_frequencies.len());
    for (i, xi) in center_frequencies.iter().enumerate() {
        if xi.len() != d {
            return Err(Error::DegenerateParameters(format!(
                "center frequency {xi:?} has {} components, grid is {d}-D",
                xi.len()
            )));
        }
        if xi.iter().all(|&v| v == 0.0) {
            return Err(Error::DegenerateParameters(
                "zero center frequency duplicates the output atom".into(),
            ));
        }
        if xi.iter().any(|v| v.abs() >= grid.nyquist()) {
            return Err(Error::DegenerateParameters(format!(
                "center frequency {xi:?} at or above Nyquist {}",
                grid.nyquist()
            )));
        }
        let mut s = window.clone();
        for (flat, z) in s.samples_mut().iter_mut().enumerate() {
            let p = grid.point(flat);
            let phase: f64 = (0..d).map(|a| p[a] * xi[a]).sum();
            *z *= Complex64::from_polar(1.0, 2.0 * PI * phase);
        }
        atoms.push(Atom::new(format!("gabor{i}"), s)?);
    }
    FilterBank::new(Atom::new("chi", window)?, atoms)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveletMother {
    /// Gaussian window times a plane wave along axis 0, made zero-mean.
    Morlet,
    /// Difference of unit-mass Gaussians at consecutive dyadic scales.
    DifferenceOfGaussians,
}

/// Morlet carrier in radians per standard deviation.
const MORLET_CARRIER: f64 = 3.0;

/// Dyadic wavelet bank with scales `σ_j = base·2^j`, `j < num_scales`, and
/// the Gaussian at `base·2^{num_scales}` as χ. The finest scale defaults to
/// two grid cells.
pub fn make_wavelet_bank(
    grid: &Grid,
    num_scales: usize,
    mother: WaveletMother,
) -> Result<FilterBank> {
    make_wavelet_bank_with_base(grid, num_scales, mother, 2.0 * grid.spacing())
}

pub fn make_wavelet_bank_with_base(
    grid: &Grid,
    num_scales: usize,
    mother: WaveletMother,
    base_scale: f64,
) -> Result<FilterBank> {
    if num_scales == 0 {
        return Err(Error::DegenerateParameters("zero wavelet scales".into()));
    }
    if !(base_scale > 0.0) {
        return Err(Error::DegenerateParameters(
            "base scale must be positive".into(),
        ));
    }
    let sigma = |j: usize| base_scale * (1u64 << j) as f64;
    ensure_fits(grid, sigma(num_scales), "coarsest wavelet scale")?;
    let mut atoms = Vec::with_capacity(num_scales);
    for j in 0..num_scales {
        let s = match mother {
            WaveletMother::DifferenceOfGaussians => {
                gaussian(grid, sigma(j)).sub(&gaussian(grid, sigma(j + 1)))?
            }
            WaveletMother::Morlet => {
                let xi = MORLET_CARRIER / sigma(j);
                let kappa = (-MORLET_CARRIER * MORLET_CARRIER / 2.0).exp();
                let mut g = gaussian(grid, sigma(j));
                for (flat, z) in g.samples_mut().iter_mut().enumerate() {
                    let x0 = grid.point(flat)[0];
                    *z *= Complex64::from_polar(1.0, xi * x0) - kappa;
                }
                g
            }
        };
        atoms.push(Atom::new(format!("psi{j}"), s)?);
    }
    FilterBank::new(Atom::new("chi", gaussian(grid, sigma(num_scales)))?, atoms)
}

/// Physical frequency magnitude of every DFT bin.
fn bin_frequencies(grid: &Grid) -> Vec<f64> {
    let ext = grid.extents();
    (0..grid.len())
        .map(|flat| {
            let idx = grid.unravel(flat);
            let mut r2 = 0.0;
            for (a, &n) in ext.iter().enumerate() {
                let k = if idx[a] < n / 2 {
                    idx[a] as f64
                } else {
                    idx[a] as f64 - n as f64
                };
                r2 += (k / grid.side(a)).powi(2);
            }
            r2.sqrt()
        })
        .collect()
}

/// Random unstructured bank: `count` atoms of white Gaussian noise smoothed
/// at correlation length `smoothness` and windowed by a Gaussian envelope of
/// width `4·smoothness`, each normalized to unit L² norm. The atom with the
/// lowest spectral centroid becomes χ. Deterministic in `seed`.
pub fn make_random_bank(
    grid: &Grid,
    count: usize,
    seed: u64,
    smoothness: f64,
) -> Result<FilterBank> {
    if count == 0 {
        return Err(Error::DegenerateParameters("zero random atoms".into()));
    }
    if !(smoothness > 0.0) {
        return Err(Error::DegenerateParameters(
            "smoothness must be positive".into(),
        ));
    }
    let envelope = 4.0 * smoothness;
    ensure_fits(grid, envelope, "random atom envelope")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let smoother = Kernel::new(&gaussian(grid, smoothness));
    let freqs = bin_frequencies(grid);
    let mut generated = Vec::with_capacity(count);
    for _ in 0..count {
        let noise: Vec<f64> = (0..grid.len())
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let mut s = smoother.apply(&Signal::from_real(grid, &noise)?)?;
        for (flat, z) in s.samples_mut().iter_mut().enumerate() {
            let r2: f64 = grid.point(flat).iter().map(|v| v * v).sum();
            *z *= (-r2 / (2.0 * envelope * envelope)).exp();
        }
        let n = s.l2_norm();
        let s = s.scaled(1.0 / n);
        let k = Kernel::new(&s);
        let (num, den) = k
            .transfer()
            .iter()
            .zip(&freqs)
            .fold((0.0, 0.0), |(num, den), (t, w)| {
                (num + t.norm_sqr() * w, den + t.norm_sqr())
            });
        generated.push((num / den, s));
    }
    let lowest = generated
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .map(|(i, _)| i)
        .unwrap();
    let (_, chi) = generated.remove(lowest);
    let atoms = generated
        .into_iter()
        .enumerate()
        .map(|(i, (_, s))| Atom::new(format!("rand{i}"), s))
        .collect::<Result<Vec<_>>>()?;
    FilterBank::new(Atom::new("chi", chi)?, atoms)
}

/// Bank whose only atom is χ = δ; yields the identity feature extractor.
pub fn delta_bank(grid: &Grid) -> Result<FilterBank> {
    FilterBank::new(Atom::new("delta", Signal::delta(grid))?, Vec::new())
}
