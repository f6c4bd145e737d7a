//! Displacement fields τ, the warp `(F_τ f)(x) = f(x − τ(x))`, field norms,
//! the indicator difference set S and the constant D of the smooth-part bound.

use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cartoon::{CartoonSpec, DomainB, SmoothPart, DENSE_OVERSAMPLING};
use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;
use crate::signal::{Complex64, Grid, Signal};

/// Warps require `‖τ‖_∞` strictly below this unless explicitly overridden.
pub const MAX_WARP_SUP: f64 = 0.5;

/// Norm applied to the Jacobian `Dτ(x)` before taking the supremum over x.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixNorm {
    #[default]
    MaxEntry,
    Spectral,
}

impl MatrixNorm {
    pub fn apply(self, m: &[[f64; 2]; 2], dim: usize) -> f64 {
        if dim == 1 {
            return m[0][0].abs();
        }
        match self {
            MatrixNorm::MaxEntry => m.iter().flatten().fold(0.0, |a: f64, v| a.max(v.abs())),
            MatrixNorm::Spectral => {
                // largest singular value of a 2×2 matrix
                let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
                let s = a * a + b * b + c * c + d * d;
                let det = a * d - b * c;
                (0.5 * (s + (s * s - 4.0 * det * det).max(0.0).sqrt())).sqrt()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    Nearest,
    #[default]
    Linear,
    /// Keys cubic convolution (a = −1/2), tensor product in 2-D.
    Cubic,
}

fn default_direction() -> Vec<f64> {
    vec![1.0]
}

fn default_width() -> f64 {
    1.0
}

fn default_modes() -> usize {
    8
}

fn default_max_frequency() -> f64 {
    0.5
}

fn default_envelope() -> f64 {
    1.0
}

/// Config-level description of a field family; the amplitude comes from
/// the ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    /// `τ ≡ a·u`.
    ConstantTranslation {
        #[serde(default = "default_direction")]
        direction: Vec<f64>,
    },
    /// `τ(x) = a·e^{−|x|²/w²}·u`.
    GaussianBump {
        #[serde(default = "default_direction")]
        direction: Vec<f64>,
        #[serde(default = "default_width")]
        width: f64,
    },
    /// `τ(x) = a·e^{−|x|²/(2e²)} Σ_m c_m sin(2π⟨k_m, x⟩ + φ_m)` with random
    /// Gaussian coefficient vectors and frequencies below `max_frequency`,
    /// rescaled so that `‖τ‖_∞ = a` on the dense lattice of the grid.
    SmoothRandom {
        seed: u64,
        #[serde(default = "default_modes")]
        modes: usize,
        #[serde(default = "default_max_frequency")]
        max_frequency: f64,
        #[serde(default = "default_envelope")]
        envelope: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
struct Mode {
    coeff: [f64; 2],
    freq: [f64; 2],
    phase: f64,
}

#[derive(Clone, Debug, PartialEq)]
enum Shape {
    Translation { u: [f64; 2] },
    Bump { u: [f64; 2], width: f64 },
    Random { modes: Vec<Mode>, envelope: f64 },
}

/// A displacement field `τ = amplitude · τ₀` on d-dimensional space.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformationField {
    dim: usize,
    amplitude: f64,
    shape: Shape,
}

fn unit_direction(direction: &[f64], dim: usize) -> Result<[f64; 2]> {
    if direction.len() != dim {
        return Err(Error::DegenerateParameters(format!(
            "direction {direction:?} is not {dim}-dimensional"
        )));
    }
    let n = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::DegenerateParameters(
            "direction must be non-zero".into(),
        ));
    }
    let mut u = [0.0; 2];
    for (o, v) in u.iter_mut().zip(direction) {
        *o = v / n;
    }
    Ok(u)
}

impl DeformationField {
    pub fn zero(dim: usize) -> DeformationField {
        DeformationField {
            dim,
            amplitude: 0.0,
            shape: Shape::Translation { u: [0.0; 2] },
        }
    }

    pub fn translation(shift: &[f64]) -> DeformationField {
        let amplitude = shift.iter().map(|v| v * v).sum::<f64>().sqrt();
        match unit_direction(shift, shift.len()) {
            Ok(u) => DeformationField {
                dim: shift.len(),
                amplitude,
                shape: Shape::Translation { u },
            },
            Err(_) => DeformationField::zero(shift.len()),
        }
    }

    /// Builds the family member with the given amplitude. Random fields are
    /// normalized on the dense lattice of `grid`.
    pub fn from_spec(spec: &FieldSpec, grid: &Grid, amplitude: f64) -> Result<DeformationField> {
        let dim = grid.dim();
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::DegenerateParameters(format!(
                "amplitude {amplitude} must be finite and >= 0"
            )));
        }
        let shape = match spec {
            FieldSpec::ConstantTranslation { direction } => Shape::Translation {
                u: unit_direction(direction, dim)?,
            },
            FieldSpec::GaussianBump { direction, width } => {
                if !(*width > 0.0) {
                    return Err(Error::DegenerateParameters(
                        "bump width must be positive".into(),
                    ));
                }
                Shape::Bump {
                    u: unit_direction(direction, dim)?,
                    width: *width,
                }
            }
            FieldSpec::SmoothRandom {
                seed,
                modes,
                max_frequency,
                envelope,
            } => {
                if *modes == 0 || !(*max_frequency > 0.0) || !(*envelope > 0.0) {
                    return Err(Error::DegenerateParameters(
                        "smooth-random fields need modes > 0, max_frequency > 0 and envelope > 0"
                            .into(),
                    ));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let modes = (0..*modes)
                    .map(|_| {
                        let mut coeff = [0.0; 2];
                        let mut freq = [0.0; 2];
                        for a in 0..dim {
                            coeff[a] = rng.sample(StandardNormal);
                            freq[a] = rng.random_range(-max_frequency..=*max_frequency);
                        }
                        Mode {
                            coeff,
                            freq,
                            phase: rng.random_range(0.0..2.0 * PI),
                        }
                    })
                    .collect();
                let base = DeformationField {
                    dim,
                    amplitude: 1.0,
                    shape: Shape::Random {
                        modes,
                        envelope: *envelope,
                    },
                };
                let sup = base.sup_norm(grid);
                if !(sup > 0.0) {
                    return Err(Error::DegenerateParameters(
                        "random field vanishes on the grid".into(),
                    ));
                }
                return Ok(base.scaled(amplitude / sup));
            }
        };
        Ok(DeformationField {
            dim,
            amplitude,
            shape,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }

    pub fn scaled(&self, c: f64) -> DeformationField {
        DeformationField {
            amplitude: self.amplitude * c,
            ..self.clone()
        }
    }

    /// Integer grid shift when τ is a constant translation by whole cells.
    fn aligned_shift(&self, grid: &Grid) -> Option<Vec<isize>> {
        let Shape::Translation { u } = &self.shape else {
            return None;
        };
        (0..self.dim)
            .map(|a| {
                let cells = self.amplitude * u[a] / grid.spacing();
                (cells == cells.round() && cells.abs() < 1e15).then_some(cells as isize)
            })
            .collect()
    }

    /// `τ(x)`.
    pub fn displacement(&self, x: &[f64]) -> [f64; 2] {
        let a = self.amplitude;
        match &self.shape {
            Shape::Translation { u } => [a * u[0], a * u[1]],
            Shape::Bump { u, width } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let g = a * (-r2 / (width * width)).exp();
                [g * u[0], g * u[1]]
            }
            Shape::Random { modes, envelope } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let e = a * (-r2 / (2.0 * envelope * envelope)).exp();
                let mut out = [0.0; 2];
                for m in modes {
                    let theta =
                        2.0 * PI * x.iter().zip(&m.freq).map(|(p, k)| p * k).sum::<f64>() + m.phase;
                    let s = theta.sin();
                    out[0] += m.coeff[0] * s;
                    out[1] += m.coeff[1] * s;
                }
                [e * out[0], e * out[1]]
            }
        }
    }

    /// `Dτ(x)`, entry `[i][j] = ∂τ_i/∂x_j`.
    pub fn jacobian(&self, x: &[f64]) -> [[f64; 2]; 2] {
        let a = self.amplitude;
        let mut j = [[0.0; 2]; 2];
        match &self.shape {
            Shape::Translation { .. } => {}
            Shape::Bump { u, width } => {
                let w2 = width * width;
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let g = a * (-r2 / w2).exp();
                for i in 0..self.dim {
                    for (k, xk) in x.iter().enumerate() {
                        j[i][k] = -2.0 * xk / w2 * g * u[i];
                    }
                }
            }
            Shape::Random { modes, envelope } => {
                let e2 = envelope * envelope;
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let e = a * (-r2 / (2.0 * e2)).exp();
                let mut sin_sum = [0.0; 2];
                let mut cos_grad = [[0.0; 2]; 2];
                for m in modes {
                    let theta =
                        2.0 * PI * x.iter().zip(&m.freq).map(|(p, k)| p * k).sum::<f64>() + m.phase;
                    let (s, c) = theta.sin_cos();
                    for i in 0..self.dim {
                        sin_sum[i] += m.coeff[i] * s;
                        for k in 0..self.dim {
                            cos_grad[i][k] += m.coeff[i] * c * 2.0 * PI * m.freq[k];
                        }
                    }
                }
                for i in 0..self.dim {
                    for (k, xk) in x.iter().enumerate() {
                        j[i][k] = e * (cos_grad[i][k] - xk / e2 * sin_sum[i]);
                    }
                }
            }
        }
        j
    }

    /// `‖τ‖_∞`: exact for translations and bumps (peak at the origin),
    /// otherwise the maximum over the 4× oversampled lattice of `grid`.
    pub fn sup_norm(&self, grid: &Grid) -> f64 {
        match &self.shape {
            Shape::Translation { .. } | Shape::Bump { .. } => self.amplitude.abs(),
            Shape::Random { .. } => {
                let d = self.dim;
                grid.oversampled(DENSE_OVERSAMPLING)
                    .points()
                    .map(|p| {
                        let t = self.displacement(&p[..d]);
                        t[..d].iter().map(|v| v * v).sum::<f64>().sqrt()
                    })
                    .fold(0.0, f64::max)
            }
        }
    }

    /// `‖Dτ‖_∞ = sup_x ‖Dτ(x)‖` for the chosen matrix norm.
    pub fn jacobian_sup(&self, grid: &Grid, norm: MatrixNorm) -> f64 {
        match &self.shape {
            Shape::Translation { .. } => 0.0,
            Shape::Bump { u, width } => {
                // Dτ = a·u ∇gᵀ is rank one; |∂_k g| and |∇g| both peak at
                // √2 e^{−1/2}/w.
                let peak = self.amplitude.abs() * SQRT_2 * (-0.5f64).exp() / width;
                match norm {
                    MatrixNorm::MaxEntry => {
                        peak * u[..self.dim].iter().fold(0.0, |m: f64, v| m.max(v.abs()))
                    }
                    MatrixNorm::Spectral => peak,
                }
            }
            Shape::Random { .. } => {
                let d = self.dim;
                grid.oversampled(DENSE_OVERSAMPLING)
                    .points()
                    .map(|p| norm.apply(&self.jacobian(&p[..d]), d))
                    .fold(0.0, f64::max)
            }
        }
    }

    /// The same field rescaled so that its Jacobian supremum equals `target`.
    pub fn with_jacobian_sup(
        &self,
        grid: &Grid,
        norm: MatrixNorm,
        target: f64,
    ) -> Result<DeformationField> {
        let j = self.jacobian_sup(grid, norm);
        if !(j > 0.0) {
            return Err(Error::DegenerateParameters(
                "field has a vanishing Jacobian".into(),
            ));
        }
        Ok(self.scaled(target / j))
    }
}

/// Which stability hypotheses a field satisfies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Hypotheses {
    /// `‖τ‖_∞ < 1/2`.
    pub small_displacement: bool,
    /// Additionally `‖Dτ‖_∞ ≤ 1/(2d)`.
    pub small_jacobian: bool,
}

impl Hypotheses {
    pub fn classify(tau_sup: f64, jacobian_sup: f64, dim: usize) -> Hypotheses {
        let small_displacement = tau_sup < MAX_WARP_SUP;
        Hypotheses {
            small_displacement,
            small_jacobian: small_displacement && jacobian_sup <= 1.0 / (2.0 * dim as f64),
        }
    }

    pub fn tag(&self) -> &'static str {
        match (self.small_displacement, self.small_jacobian) {
            (true, true) => "tau<1/2;jac<=1/(2d)",
            (true, false) => "tau<1/2",
            _ => "none",
        }
    }
}

fn check_warp(field: &DeformationField, grid: &Grid) -> Result<()> {
    if field.dim != grid.dim() {
        return Err(Error::GridMismatch(format!(
            "{}-D field on a {}-D grid",
            field.dim,
            grid.dim()
        )));
    }
    let sup = field.sup_norm(grid);
    if !(sup < MAX_WARP_SUP) {
        return Err(Error::Hypothesis(format!(
            "|tau|_inf = {sup} is not below {MAX_WARP_SUP}"
        )));
    }
    Ok(())
}

fn keys(t: f64) -> f64 {
    let t = t.abs();
    if t <= 1.0 {
        (1.5 * t - 2.5) * t * t + 1.0
    } else if t < 2.0 {
        ((-0.5 * t + 2.5) * t - 4.0) * t + 2.0
    } else {
        0.0
    }
}

/// Taps `(offset, weight)` of a 1-D interpolation kernel at fractional
/// index position `u`.
fn taps(u: f64, interp: Interpolation) -> ([(isize, f64); 4], usize) {
    let mut out = [(0isize, 0.0); 4];
    match interp {
        Interpolation::Nearest => {
            out[0] = (u.round() as isize, 1.0);
            (out, 1)
        }
        Interpolation::Linear => {
            let i0 = u.floor();
            let t = u - i0;
            out[0] = (i0 as isize, 1.0 - t);
            out[1] = (i0 as isize + 1, t);
            (out, 2)
        }
        Interpolation::Cubic => {
            let i0 = u.floor();
            let t = u - i0;
            for (k, o) in out.iter_mut().enumerate() {
                let off = k as isize - 1;
                *o = (i0 as isize + off, keys(t - off as f64));
            }
            (out, 4)
        }
    }
}

/// `F_τ f` by interpolating the samples of `f` at `x − τ(x)` with periodic
/// extension. Requires `‖τ‖_∞ < 1/2`.
pub fn apply_deformation(
    f: &Signal,
    field: &DeformationField,
    interp: Interpolation,
) -> Result<Signal> {
    check_warp(field, f.grid())?;
    Ok(apply_deformation_unchecked(f, field, interp))
}

/// [`apply_deformation`] without the displacement bound, for counterexample
/// studies.
pub fn apply_deformation_unchecked(
    f: &Signal,
    field: &DeformationField,
    interp: Interpolation,
) -> Signal {
    let grid = f.grid();
    if field.is_zero() {
        return f.clone();
    }
    if let Some(shift) = field.aligned_shift(grid) {
        return f.circular_shift(&shift);
    }
    let d = grid.dim();
    let dx = grid.spacing();
    let ext = grid.extents();
    let wrap = |i: isize, n: usize| i.rem_euclid(n as isize) as usize;
    let samples = f.samples();
    let out = (0..grid.len())
        .map(|flat| {
            let idx = grid.unravel(flat);
            let p = grid.point(flat);
            let t = field.displacement(&p[..d]);
            let u0 = idx[0] as f64 - t[0] / dx;
            let (t0, n0) = taps(u0, interp);
            if d == 1 {
                t0[..n0]
                    .iter()
                    .fold(Complex64::new(0.0, 0.0), |acc, &(i, w)| {
                        acc + samples[wrap(i, ext[0])] * w
                    })
            } else {
                let u1 = idx[1] as f64 - t[1] / dx;
                let (t1, n1) = taps(u1, interp);
                let mut acc = Complex64::new(0.0, 0.0);
                for &(i, wi) in &t0[..n0] {
                    let row = wrap(i, ext[0]) * ext[1];
                    for &(j, wj) in &t1[..n1] {
                        acc += samples[row + wrap(j, ext[1])] * (wi * wj);
                    }
                }
                acc
            }
        })
        .collect();
    Signal::new(grid.clone(), out).expect("same grid")
}

/// Samples `x ↦ g(x − τ(x))` for an analytically known `g`.
pub fn warp_fn(grid: &Grid, field: &DeformationField, g: impl Fn(&[f64]) -> Complex64) -> Signal {
    let d = grid.dim();
    Signal::from_fn(grid, |x| {
        let t = field.displacement(x);
        let mut y = [0.0; 2];
        for a in 0..d {
            y[a] = x[a] - t[a];
        }
        g(&y[..d])
    })
}

/// `F_τ f` for a cartoon, evaluated exactly at the warped points (the
/// indicator uses point membership, so no interpolation smears the jump).
pub fn warp_cartoon(spec: &CartoonSpec, grid: &Grid, field: &DeformationField) -> Result<Signal> {
    spec.check_on(grid)?;
    check_warp(field, grid)?;
    Ok(warp_fn(grid, field, |y| spec.evaluate(y)))
}

/// [`warp_cartoon`] without the displacement bound.
pub fn warp_cartoon_unchecked(spec: &CartoonSpec, grid: &Grid, field: &DeformationField) -> Signal {
    warp_fn(grid, field, |y| spec.evaluate(y))
}

pub fn warp_smooth(part: &SmoothPart, grid: &Grid, field: &DeformationField) -> Signal {
    warp_fn(grid, field, |y| Complex64::new(part.value(y), 0.0))
}

/// `vol^d(S)` for `S = {x : 1_B(x) ≠ 1_B(x − τ(x))}`, counted over the grid
/// points and multiplied by the cell volume. Requires `‖τ‖_∞ ≤ 1`.
pub fn tube_volume(domain: &DomainB, field: &DeformationField, grid: &Grid) -> Result<f64> {
    if domain.dim() != grid.dim() || field.dim != grid.dim() {
        return Err(Error::GridMismatch(
            "domain, field and grid dimensions differ".into(),
        ));
    }
    let sup = field.sup_norm(grid);
    if sup > 1.0 {
        return Err(Error::Hypothesis(format!("|tau|_inf = {sup} exceeds 1")));
    }
    let d = grid.dim();
    let count = grid
        .points()
        .filter(|p| {
            let x = &p[..d];
            let t = field.displacement(x);
            let y = [x[0] - t[0], if d == 2 { x[1] - t[1] } else { 0.0 }];
            domain.contains(x) != domain.contains(&y[..d])
        })
        .count();
    Ok(count as f64 * grid.cell_volume())
}

/// `D = (vol^d(B₁(0)) + 2^d ‖⟨·⟩^{−d}‖₂²)^{1/2}`, the quadrature evaluated
/// radially with `r = t/(1 − t)`.
pub fn lemma1_constant(dim: usize) -> Result<f64> {
    let (ball, sphere) = match dim {
        1 => (2.0, 2.0),
        2 => (PI, 2.0 * PI),
        3 => (4.0 * PI / 3.0, 4.0 * PI),
        _ => return Err(Error::InvalidGrid(format!("dimension {dim} not supported"))),
    };
    let k = dim as i32;
    let integrand = |t: f64| {
        if t >= 1.0 {
            return if dim == 1 { 1.0 } else { 0.0 };
        }
        let r = t / (1.0 - t);
        r.powi(k - 1) * (1.0 + r * r).powi(-k) / ((1.0 - t) * (1.0 - t))
    };
    let radial = adaptive_simpson(&integrand, 0.0, 1.0, 1e-12);
    Ok((ball + 2f64.powi(k) * sphere * radial).sqrt())
}
