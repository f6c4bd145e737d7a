//! Cartoon functions `f = f₁ + 1_B f₂`: smooth parts with closed-form
//! gradients, C² domains, sampling, and the size parameter K that bounds
//! the decay constant, the boundary measure and `‖f₂‖_∞`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;
use crate::signal::{japanese_bracket, Complex64, Grid, Signal};

/// Oversampling factor of the dense lattice used for sup-type checks.
pub const DENSE_OVERSAMPLING: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianBlob {
    pub amplitude: f64,
    pub center: Vec<f64>,
    pub width: f64,
}

impl GaussianBlob {
    fn value(&self, x: &[f64]) -> f64 {
        let r2: f64 = x
            .iter()
            .zip(&self.center)
            .map(|(a, c)| (a - c) * (a - c))
            .sum();
        self.amplitude * (-r2 / (2.0 * self.width * self.width)).exp()
    }

    fn gradient(&self, x: &[f64]) -> [f64; 2] {
        let v = self.value(x);
        let mut g = [0.0; 2];
        for (i, (a, c)) in x.iter().zip(&self.center).enumerate() {
            g[i] = -(a - c) / (self.width * self.width) * v;
        }
        g
    }
}

/// The smooth components `f₁, f₂ ∈ L² ∩ C¹`, real-valued.
///
/// `Constant` is accepted for `f₂` only: `1_B·c` is compactly supported, and
/// on `B` a constant agrees with a C¹ compactly supported function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SmoothPart {
    Constant {
        value: f64,
    },
    Gaussian {
        amplitude: f64,
        center: Vec<f64>,
        width: f64,
    },
    GaussianMixture {
        components: Vec<GaussianBlob>,
    },
    /// `a·(1 − |x − c|²/r²)³` inside the ball of radius r, zero outside; C².
    SmoothedPolynomialBump {
        amplitude: f64,
        center: Vec<f64>,
        radius: f64,
    },
}

impl SmoothPart {
    pub fn zero() -> SmoothPart {
        SmoothPart::Constant { value: 0.0 }
    }

    pub fn gaussian(amplitude: f64, center: &[f64], width: f64) -> SmoothPart {
        SmoothPart::Gaussian {
            amplitude,
            center: center.to_vec(),
            width,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            SmoothPart::Constant { value } => *value == 0.0,
            SmoothPart::Gaussian { amplitude, .. }
            | SmoothPart::SmoothedPolynomialBump { amplitude, .. } => *amplitude == 0.0,
            SmoothPart::GaussianMixture { components } => {
                components.iter().all(|c| c.amplitude == 0.0)
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, SmoothPart::Constant { .. })
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let check = |center: &[f64], width: f64, what: &str| {
            if center.len() != dim {
                return Err(Error::InvalidCartoon(format!(
                    "{what} center has {} components, expected {dim}",
                    center.len()
                )));
            }
            if !(width > 0.0) {
                return Err(Error::InvalidCartoon(format!(
                    "{what} width must be positive"
                )));
            }
            Ok(())
        };
        match self {
            SmoothPart::Constant { .. } => Ok(()),
            SmoothPart::Gaussian { center, width, .. } => check(center, *width, "gaussian"),
            SmoothPart::GaussianMixture { components } => components
                .iter()
                .try_for_each(|c| check(&c.center, c.width, "mixture component")),
            SmoothPart::SmoothedPolynomialBump { center, radius, .. } => {
                check(center, *radius, "bump")
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            SmoothPart::Constant { value } => *value,
            SmoothPart::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                amplitude * (-r2 / (2.0 * width * width)).exp()
            }
            SmoothPart::GaussianMixture { components } => {
                components.iter().map(|c| c.value(x)).sum()
            }
            SmoothPart::SmoothedPolynomialBump {
                amplitude,
                center,
                radius,
            } => {
                let rho2: f64 = x
                    .iter()
                    .zip(center)
                    .map(|(a, c)| (a - c) * (a - c))
                    .sum::<f64>()
                    / (radius * radius);
                if rho2 >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 - rho2).powi(3)
                }
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> [f64; 2] {
        match self {
            SmoothPart::Constant { .. } => [0.0; 2],
            SmoothPart::Gaussian {
                amplitude,
                center,
                width,
            } => GaussianBlob {
                amplitude: *amplitude,
                center: center.clone(),
                width: *width,
            }
            .gradient(x),
            SmoothPart::GaussianMixture { components } => {
                components.iter().fold([0.0; 2], |acc, c| {
                    let g = c.gradient(x);
                    [acc[0] + g[0], acc[1] + g[1]]
                })
            }
            SmoothPart::SmoothedPolynomialBump {
                amplitude,
                center,
                radius,
            } => {
                let r2 = radius * radius;
                let rho2: f64 = x
                    .iter()
                    .zip(center)
                    .map(|(a, c)| (a - c) * (a - c))
                    .sum::<f64>()
                    / r2;
                let mut g = [0.0; 2];
                if rho2 < 1.0 {
                    let s = -6.0 * amplitude * (1.0 - rho2).powi(2) / r2;
                    for (i, (a, c)) in x.iter().zip(center).enumerate() {
                        g[i] = s * (a - c);
                    }
                }
                g
            }
        }
    }

    /// `‖f‖_∞` where it is known in closed form.
    fn analytic_sup(&self) -> Option<f64> {
        match self {
            SmoothPart::Constant { value } => Some(value.abs()),
            SmoothPart::Gaussian { amplitude, .. }
            | SmoothPart::SmoothedPolynomialBump { amplitude, .. } => Some(amplitude.abs()),
            SmoothPart::GaussianMixture { components } if components.len() <= 1 => {
                Some(components.first().map_or(0.0, |c| c.amplitude.abs()))
            }
            SmoothPart::GaussianMixture { .. } => None,
        }
    }

    pub fn sample(&self, grid: &Grid) -> Signal {
        Signal::from_real_fn(grid, |x| self.value(x))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harmonic {
    pub order: u32,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// Compact domains B with C² boundary. All sets are closed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainB {
    /// `[lo, hi]` in one dimension.
    Interval {
        lo: f64,
        hi: f64,
    },
    Disc {
        center: Vec<f64>,
        radius: f64,
    },
    /// Axis-aligned ellipse with semi-axes `radii[0]` (axis 0) and `radii[1]`.
    Ellipse {
        center: Vec<f64>,
        radii: [f64; 2],
    },
    /// `{c + ρ(cos θ, sin θ) : ρ ≤ r(θ)}` with
    /// `r(θ) = base + Σ_k cos_k cos(kθ) + sin_k sin(kθ)`.
    StarShaped {
        center: Vec<f64>,
        base_radius: f64,
        #[serde(default)]
        harmonics: Vec<Harmonic>,
    },
}

impl DomainB {
    pub fn interval(lo: f64, hi: f64) -> DomainB {
        DomainB::Interval { lo, hi }
    }

    pub fn disc(center: &[f64], radius: f64) -> DomainB {
        DomainB::Disc {
            center: center.to_vec(),
            radius,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainB::Interval { .. } => 1,
            _ => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidCartoon(m.to_string()));
        match self {
            DomainB::Interval { lo, hi } => {
                if !(lo < hi) {
                    return bad("interval needs lo < hi");
                }
            }
            DomainB::Disc { center, radius } => {
                if center.len() != 2 || !(*radius > 0.0) {
                    return bad("disc needs a 2-D center and positive radius");
                }
            }
            DomainB::Ellipse { center, radii } => {
                if center.len() != 2 || !(radii[0] > 0.0 && radii[1] > 0.0) {
                    return bad("ellipse needs a 2-D center and positive radii");
                }
            }
            DomainB::StarShaped {
                center,
                base_radius,
                harmonics,
            } => {
                let wobble: f64 = harmonics.iter().map(|h| h.cos.abs() + h.sin.abs()).sum();
                if center.len() != 2 || !(*base_radius > wobble) {
                    return bad("star-shaped domain needs a 2-D center and r(θ) > 0");
                }
                if harmonics.iter().any(|h| h.order == 0) {
                    return bad("harmonic order must be >= 1");
                }
            }
        }
        Ok(())
    }

    fn star_radius(base: f64, harmonics: &[Harmonic], theta: f64) -> (f64, f64) {
        let mut r = base;
        let mut dr = 0.0;
        for h in harmonics {
            let k = h.order as f64;
            let (s, c) = (k * theta).sin_cos();
            r += h.cos * c + h.sin * s;
            dr += k * (h.sin * c - h.cos * s);
        }
        (r, dr)
    }

    /// Indicator `1_B(x)`.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            DomainB::Interval { lo, hi } => *lo <= x[0] && x[0] <= *hi,
            DomainB::Disc { center, radius } => {
                let (dx, dy) = (x[0] - center[0], x[1] - center[1]);
                dx * dx + dy * dy <= radius * radius
            }
            DomainB::Ellipse { center, radii } => {
                let (u, v) = ((x[0] - center[0]) / radii[0], (x[1] - center[1]) / radii[1]);
                u * u + v * v <= 1.0
            }
            DomainB::StarShaped {
                center,
                base_radius,
                harmonics,
            } => {
                let (dx, dy) = (x[0] - center[0], x[1] - center[1]);
                let rho = dx.hypot(dy);
                if rho == 0.0 {
                    return true;
                }
                let (r, _) = DomainB::star_radius(*base_radius, harmonics, dy.atan2(dx));
                rho <= r
            }
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        match self {
            DomainB::Interval { lo, hi } => ([*lo, 0.0], [*hi, 0.0]),
            DomainB::Disc { center, radius } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
            DomainB::Ellipse { center, radii } => (
                [center[0] - radii[0], center[1] - radii[1]],
                [center[0] + radii[0], center[1] + radii[1]],
            ),
            DomainB::StarShaped {
                center,
                base_radius,
                harmonics,
            } => {
                let r = base_radius
                    + harmonics
                        .iter()
                        .map(|h| h.cos.abs() + h.sin.abs())
                        .sum::<f64>();
                (
                    [center[0] - r, center[1] - r],
                    [center[0] + r, center[1] + r],
                )
            }
        }
    }
}

/// Complete elliptic integral of the second kind `E(m)`, `m = k²`, via the
/// arithmetic-geometric mean.
fn elliptic_e(m: f64) -> f64 {
    let (mut a, mut b) = (1.0, (1.0 - m).sqrt());
    let mut pow = 0.5;
    let mut sum = 0.5 * m;
    for _ in 0..64 {
        let c = 0.5 * (a - b);
        if c.abs() < 1e-17 {
            break;
        }
        let (an, bn) = (0.5 * (a + b), (a * b).sqrt());
        pow *= 2.0;
        sum += pow * c * c;
        a = an;
        b = bn;
    }
    PI / (2.0 * a) * (1.0 - sum)
}

/// `vol^{d−1}(∂B)`: two (endpoint count) for intervals, perimeter in 2-D.
pub fn boundary_length(domain: &DomainB) -> f64 {
    match domain {
        DomainB::Interval { .. } => 2.0,
        DomainB::Disc { radius, .. } => 2.0 * PI * radius,
        DomainB::Ellipse { radii, .. } => {
            let (a, b) = if radii[0] >= radii[1] {
                (radii[0], radii[1])
            } else {
                (radii[1], radii[0])
            };
            4.0 * a * elliptic_e(1.0 - (b * b) / (a * a))
        }
        DomainB::StarShaped {
            base_radius,
            harmonics,
            ..
        } => {
            let speed = |t: f64| {
                let (r, dr) = DomainB::star_radius(*base_radius, harmonics, t);
                r.hypot(dr)
            };
            adaptive_simpson(&speed, 0.0, 2.0 * PI, 1e-10 * base_radius)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CartoonSpec {
    pub f1: SmoothPart,
    pub f2: SmoothPart,
    pub domain: DomainB,
    /// Declared size K; estimated from the components when absent.
    #[serde(default)]
    pub size: Option<f64>,
}

impl CartoonSpec {
    pub fn new(f1: SmoothPart, f2: SmoothPart, domain: DomainB) -> CartoonSpec {
        CartoonSpec {
            f1,
            f2,
            domain,
            size: None,
        }
    }

    /// `1_{[lo, hi]}`.
    pub fn indicator_interval(lo: f64, hi: f64) -> CartoonSpec {
        CartoonSpec::new(
            SmoothPart::zero(),
            SmoothPart::Constant { value: 1.0 },
            DomainB::interval(lo, hi),
        )
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    #[inline]
    pub fn evaluate(&self, x: &[f64]) -> Complex64 {
        let inside = if self.domain.contains(x) {
            self.f2.value(x)
        } else {
            0.0
        };
        Complex64::new(self.f1.value(x) + inside, 0.0)
    }

    /// Structural checks plus placement inside the central half of `grid`.
    pub fn check_on(&self, grid: &Grid) -> Result<()> {
        let d = self.dim();
        if grid.dim() != d {
            return Err(Error::InvalidCartoon(format!(
                "{d}-D cartoon on a {}-D grid",
                grid.dim()
            )));
        }
        self.domain.validate()?;
        self.f1.validate(d)?;
        self.f2.validate(d)?;
        if self.f1.is_constant() && !self.f1.is_zero() {
            return Err(Error::InvalidCartoon(
                "a non-zero constant f1 is not square-integrable".into(),
            ));
        }
        let (lo, hi) = self.domain.bounding_box();
        if !grid.central_half_contains(&lo[..d], &hi[..d]) {
            return Err(Error::DomainOutsideSafeRegion(format!(
                "bounding box {:?}..{:?} vs half-width {}",
                &lo[..d],
                &hi[..d],
                grid.side(0) / 4.0
            )));
        }
        Ok(())
    }

    /// Checks the size-K invariants on a dense sample of `grid`: the decay
    /// condition for both parts, `vol^{d−1}(∂B) ≤ K` and `‖f₂‖_∞ ≤ K`.
    pub fn check_size(&self, size: f64, grid: &Grid) -> Result<()> {
        for (name, part) in [("f1", &self.f1), ("f2", &self.f2)] {
            if let DecayCheck::Fail {
                point,
                gradient,
                bound,
            } = verify_decay(part, size, grid)
            {
                return Err(Error::InvalidCartoon(format!(
                    "{name} violates the decay condition at {point:?}: |grad| = {gradient:.6e} > {bound:.6e}"
                )));
            }
        }
        if !self.f2.is_zero() {
            let len = boundary_length(&self.domain);
            if len > size {
                return Err(Error::InvalidCartoon(format!(
                    "boundary measure {len} exceeds K = {size}"
                )));
            }
            let sup = sup_norm(&self.f2, grid);
            if sup > size {
                return Err(Error::InvalidCartoon(format!(
                    "|f2|_inf = {sup} exceeds K = {size}"
                )));
            }
        }
        Ok(())
    }
}

/// Pointwise evaluation `f₁(x) + 1_B(x) f₂(x)` at the grid coordinates,
/// with cell-center membership for the indicator.
pub fn sample_cartoon(spec: &CartoonSpec, grid: &Grid) -> Result<Signal> {
    spec.check_on(grid)?;
    if let Some(k) = spec.size {
        spec.check_size(k, grid)?;
    }
    Ok(Signal::from_fn(grid, |x| spec.evaluate(x)))
}

#[derive(Clone, Debug, PartialEq)]
pub enum DecayCheck {
    Pass,
    Fail {
        point: Vec<f64>,
        gradient: f64,
        bound: f64,
    },
}

impl DecayCheck {
    pub fn passed(&self) -> bool {
        matches!(self, DecayCheck::Pass)
    }
}

/// Checks `|∇f(x)| ≤ K⟨x⟩^{−d}` on the 4× oversampled lattice of `grid`
/// (which contains the grid points); reports the first violation.
pub fn verify_decay(part: &SmoothPart, size: f64, grid: &Grid) -> DecayCheck {
    let d = grid.dim();
    let dense = grid.oversampled(DENSE_OVERSAMPLING);
    for p in dense.points() {
        let x = &p[..d];
        let g = part.gradient(x);
        let grad = g[..d].iter().map(|v| v * v).sum::<f64>().sqrt();
        let bound = size * japanese_bracket(x).powi(-(d as i32));
        if grad > bound {
            return DecayCheck::Fail {
                point: x.to_vec(),
                gradient: grad,
                bound,
            };
        }
    }
    DecayCheck::Pass
}

/// Finite-difference version of [`verify_decay`] for sampled signals.
///
/// Each difference quotient `|f(x + Δe_a) − f(x)|/Δ` equals the directional
/// derivative somewhere on the segment, so it is compared against the bound
/// at the segment point closest to the origin (where the bound is largest).
pub fn verify_decay_sampled(signal: &Signal, size: f64) -> DecayCheck {
    let grid = signal.grid();
    let d = grid.dim();
    let dx = grid.spacing();
    for flat in 0..grid.len() {
        let idx = grid.unravel(flat);
        let p = grid.point(flat);
        for a in 0..d {
            if idx[a] + 1 >= grid.extents()[a] {
                continue;
            }
            let mut nidx = idx;
            nidx[a] += 1;
            let q = (signal.samples()[grid.ravel(nidx)] - signal.samples()[flat]).norm() / dx;
            let mut closest = p;
            closest[a] = 0f64.clamp(p[a], p[a] + dx);
            let bound = size * japanese_bracket(&closest[..d]).powi(-(d as i32));
            if q > bound {
                return DecayCheck::Fail {
                    point: p[..d].to_vec(),
                    gradient: q,
                    bound,
                };
            }
        }
    }
    DecayCheck::Pass
}

/// Smallest C with `|∇f(x)| ≤ C⟨x⟩^{−d}` on the dense lattice.
pub fn decay_constant(part: &SmoothPart, grid: &Grid) -> f64 {
    if part.is_constant() {
        return 0.0;
    }
    let d = grid.dim();
    grid.oversampled(DENSE_OVERSAMPLING)
        .points()
        .map(|p| {
            let x = &p[..d];
            let g = part.gradient(x);
            g[..d].iter().map(|v| v * v).sum::<f64>().sqrt() * japanese_bracket(x).powi(d as i32)
        })
        .fold(0.0, f64::max)
}

/// `‖f‖_∞`, closed form where available, otherwise the dense-lattice max.
pub fn sup_norm(part: &SmoothPart, grid: &Grid) -> f64 {
    if let Some(s) = part.analytic_sup() {
        return s;
    }
    let d = grid.dim();
    grid.oversampled(DENSE_OVERSAMPLING)
        .points()
        .map(|p| part.value(&p[..d]).abs())
        .fold(0.0, f64::max)
}

/// Componentwise maxima making up the size K.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SizeBreakdown {
    pub decay_f1: f64,
    pub decay_f2: f64,
    pub boundary: f64,
    pub f2_sup: f64,
}

impl SizeBreakdown {
    pub fn size(&self) -> f64 {
        self.decay_f1
            .max(self.decay_f2)
            .max(self.boundary)
            .max(self.f2_sup)
    }
}

/// The smallest K for which the spec passes its size invariants (on the
/// dense lattice of `grid`). When `f₂ ≡ 0` the indicator term vanishes and
/// the boundary does not contribute.
pub fn estimate_size(spec: &CartoonSpec, grid: &Grid) -> SizeBreakdown {
    let active = !spec.f2.is_zero();
    SizeBreakdown {
        decay_f1: decay_constant(&spec.f1, grid),
        decay_f2: decay_constant(&spec.f2, grid),
        boundary: if active {
            boundary_length(&spec.domain)
        } else {
            0.0
        },
        f2_sup: if active {
            sup_norm(&spec.f2, grid)
        } else {
            0.0
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn indicator_sampling() {
        let grid = Grid::line(64, 0.125).unwrap();
        let s = sample_cartoon(&CartoonSpec::indicator_interval(-1.0, 1.0), &grid).unwrap();
        for (i, z) in s.samples().iter().enumerate() {
            let x = grid.coord(0, i);
            assert_eq!(z.re, if x.abs() <= 1.0 { 1.0 } else { 0.0 });
        }
        let zero = CartoonSpec::new(
            SmoothPart::zero(),
            SmoothPart::zero(),
            DomainB::interval(-1.0, 1.0),
        );
        assert_eq!(sample_cartoon(&zero, &grid).unwrap().l2_norm(), 0.0);
    }

    #[test]
    fn additive_structure_is_bit_exact() {
        let grid = Grid::square(32, 0.125).unwrap();
        let g = SmoothPart::gaussian(1.5, &[0.2, -0.1], 0.4);
        let spec = CartoonSpec::new(
            g.clone(),
            SmoothPart::zero(),
            DomainB::disc(&[0.0, 0.0], 0.5),
        );
        assert_eq!(sample_cartoon(&spec, &grid).unwrap(), g.sample(&grid));
    }

    #[test]
    fn domain_must_fit_central_half() {
        let grid = Grid::line(64, 0.125).unwrap(); // [-4, 4), central half [-2, 2]
        assert!(sample_cartoon(&CartoonSpec::indicator_interval(-2.0, 2.0), &grid).is_ok());
        assert!(matches!(
            sample_cartoon(&CartoonSpec::indicator_interval(-1.0, 2.5), &grid),
            Err(Error::DomainOutsideSafeRegion(_))
        ));
    }

    #[test]
    fn boundary_lengths() {
        assert_eq!(boundary_length(&DomainB::interval(-1.0, 1.0)), 2.0);
        assert_relative_eq!(
            boundary_length(&DomainB::disc(&[0.0, 0.0], 1.0)),
            2.0 * PI,
            max_relative = 1e-15
        );
        let circle_as_star = DomainB::StarShaped {
            center: vec![0.0, 0.0],
            base_radius: 1.0,
            harmonics: vec![],
        };
        assert_relative_eq!(
            boundary_length(&circle_as_star),
            2.0 * PI,
            max_relative = 1e-9
        );
    }

    /// Oracle: arc length of an inscribed polygon with `n` vertices.
    fn polygon_length(point: impl Fn(f64) -> [f64; 2], n: usize) -> f64 {
        (0..n)
            .map(|i| {
                let (a, b) = (
                    point(2.0 * PI * i as f64 / n as f64),
                    point(2.0 * PI * (i + 1) as f64 / n as f64),
                );
                (a[0] - b[0]).hypot(a[1] - b[1])
            })
            .sum()
    }

    #[test]
    fn ellipse_perimeter_against_polygon() {
        let ellipse = DomainB::Ellipse {
            center: vec![0.0, 0.0],
            radii: [2.0, 1.0],
        };
        let oracle = polygon_length(|t| [2.0 * t.cos(), t.sin()], 200_000);
        assert_relative_eq!(boundary_length(&ellipse), oracle, max_relative = 1e-5);
        // known value 9.688448220547675
        assert_relative_eq!(
            boundary_length(&ellipse),
            9.688448220547675,
            max_relative = 1e-12
        );
    }

    #[test]
    fn star_perimeter_against_polygon() {
        let harmonics = vec![
            Harmonic {
                order: 3,
                cos: 0.1,
                sin: 0.05,
            },
            Harmonic {
                order: 5,
                cos: 0.0,
                sin: 0.04,
            },
        ];
        let star = DomainB::StarShaped {
            center: vec![0.0, 0.0],
            base_radius: 0.8,
            harmonics: harmonics.clone(),
        };
        let oracle = polygon_length(
            |t| {
                let (r, _) = DomainB::star_radius(0.8, &harmonics, t);
                [r * t.cos(), r * t.sin()]
            },
            200_000,
        );
        assert_relative_eq!(boundary_length(&star), oracle, max_relative = 1e-6);
    }

    #[test]
    fn decay_checks() {
        let grid = Grid::line(512, 1.0 / 16.0).unwrap();
        assert!(verify_decay(&SmoothPart::gaussian(1.0, &[0.0], 1.0), 10.0, &grid).passed());
        assert!(verify_decay(&SmoothPart::zero(), 1e-9, &grid).passed());
        // steep bump far from the origin: |grad| ~ 1.7 where ⟨x⟩^{-1} ≈ 0.1
        let far = SmoothPart::SmoothedPolynomialBump {
            amplitude: 1.0,
            center: vec![10.0],
            radius: 1.0,
        };
        match verify_decay(&far, 1.0, &grid) {
            DecayCheck::Fail {
                point,
                gradient,
                bound,
            } => {
                assert!(point[0] > 9.0 && point[0] < 11.0);
                assert!(gradient > bound);
            }
            DecayCheck::Pass => panic!("bump at 10 must fail with K = 1"),
        }
    }

    #[test]
    fn sampled_decay_rejects_jumps() {
        let grid = Grid::line(1024, 1.0 / 64.0).unwrap();
        let ind = sample_cartoon(&CartoonSpec::indicator_interval(-1.0, 1.0), &grid).unwrap();
        assert!(!verify_decay_sampled(&ind, 10.0).passed());
        let smooth = SmoothPart::gaussian(1.0, &[0.0], 1.0).sample(&grid);
        assert!(verify_decay_sampled(&smooth, 1.0).passed());
    }

    #[test]
    fn size_estimates() {
        let grid = Grid::line(1024, 1.0 / 64.0).unwrap();
        let k = estimate_size(&CartoonSpec::indicator_interval(-1.0, 1.0), &grid);
        assert_eq!(k.size(), 2.0);
        let zero = CartoonSpec::new(
            SmoothPart::zero(),
            SmoothPart::zero(),
            DomainB::interval(-1.0, 1.0),
        );
        assert_eq!(estimate_size(&zero, &grid).size(), 0.0);

        let g2 = Grid::square(64, 1.0 / 8.0).unwrap();
        let disc = CartoonSpec::new(
            SmoothPart::zero(),
            SmoothPart::Constant { value: 1.0 },
            DomainB::disc(&[0.0, 0.0], 1.0),
        );
        assert_relative_eq!(
            estimate_size(&disc, &g2).size(),
            2.0 * PI,
            max_relative = 1e-15
        );
    }

    #[test]
    fn estimated_size_passes_invariants() {
        let grid = Grid::square(64, 1.0 / 8.0).unwrap();
        let mut spec = CartoonSpec::new(
            SmoothPart::GaussianMixture {
                components: vec![
                    GaussianBlob {
                        amplitude: 2.0,
                        center: vec![0.3, 0.0],
                        width: 0.5,
                    },
                    GaussianBlob {
                        amplitude: -1.0,
                        center: vec![-0.5, 0.4],
                        width: 0.3,
                    },
                ],
            },
            SmoothPart::gaussian(3.0, &[0.0, 0.2], 0.6),
            DomainB::Ellipse {
                center: vec![0.0, 0.0],
                radii: [1.2, 0.8],
            },
        );
        let k = estimate_size(&spec, &grid).size();
        spec.size = Some(k);
        assert!(spec.check_size(k, &grid).is_ok());
        assert!(spec.check_size(0.99 * k, &grid).is_err());
        assert!(sample_cartoon(&spec, &grid).is_ok());
    }

    #[test]
    fn scaling_f2_scales_its_sup_component() {
        let grid = Grid::square(32, 1.0 / 4.0).unwrap();
        let base = CartoonSpec::new(
            SmoothPart::zero(),
            SmoothPart::gaussian(1.25, &[0.0, 0.0], 0.5),
            DomainB::disc(&[0.0, 0.0], 1.0),
        );
        let s1 = estimate_size(&base, &grid);
        for c in [1.0, 2.0, 7.5] {
            let mut scaled = base.clone();
            scaled.f2 = SmoothPart::gaussian(1.25 * c, &[0.0, 0.0], 0.5);
            let sc = estimate_size(&scaled, &grid);
            assert_eq!(sc.f2_sup, c * s1.f2_sup);
            assert!(sc.size() >= s1.size());
        }
    }

    #[test]
    fn membership_soundness() {
        let grid = Grid::square(128, 1.0 / 16.0).unwrap();
        let f1 = SmoothPart::gaussian(1.0, &[0.1, 0.0], 0.5);
        let f2 = SmoothPart::SmoothedPolynomialBump {
            amplitude: 2.0,
            center: vec![0.0, 0.0],
            radius: 1.5,
        };
        let spec = CartoonSpec::new(f1.clone(), f2.clone(), DomainB::disc(&[0.0, 0.2], 0.9));
        let f = sample_cartoon(&spec, &grid).unwrap();
        assert!(f.l2_norm() <= f1.sample(&grid).l2_norm() + f2.sample(&grid).l2_norm());
    }

    #[test]
    fn rejects_invalid_specs() {
        let grid = Grid::square(64, 1.0 / 8.0).unwrap();
        let bad_f1 = CartoonSpec::new(
            SmoothPart::Constant { value: 1.0 },
            SmoothPart::zero(),
            DomainB::disc(&[0.0, 0.0], 1.0),
        );
        assert!(sample_cartoon(&bad_f1, &grid).is_err());
        let wrong_dim = CartoonSpec::indicator_interval(-1.0, 1.0);
        assert!(sample_cartoon(&wrong_dim, &grid).is_err());
        let mut declared = CartoonSpec::new(
            SmoothPart::zero(),
            SmoothPart::Constant { value: 1.0 },
            DomainB::disc(&[0.0, 0.0], 1.0),
        );
        declared.size = Some(3.0); // perimeter 2π > 3
        assert!(sample_cartoon(&declared, &grid).is_err());
    }

    proptest! {
        #[test]
        fn sampling_is_linear_in_the_smooth_parts(a in -3.0f64..3.0, b in -3.0f64..3.0, w in 0.2f64..0.8) {
            let grid = Grid::square(16, 0.25).unwrap();
            let dom = DomainB::disc(&[0.0, 0.0], 0.7);
            let g = |amp: f64| SmoothPart::gaussian(amp, &[0.1, -0.1], w);
            let base = sample_cartoon(&CartoonSpec::new(g(1.0), g(1.0), dom.clone()), &grid).unwrap();
            let scaled = sample_cartoon(&CartoonSpec::new(g(a), g(b), dom.clone()), &grid).unwrap();
            let only1 = sample_cartoon(&CartoonSpec::new(g(1.0), SmoothPart::zero(), dom.clone()), &grid).unwrap();
            let only2 = base.sub(&only1).unwrap();
            let combo = only1.scaled(a).add(&only2.scaled(b)).unwrap();
            prop_assert!(scaled.distance(&combo).unwrap() <= 1e-12 * (1.0 + scaled.l2_norm()));
        }
    }
}
