use crate::error::{Error, Result};

/// Regular, isotropic, centered sampling grid in one or two dimensions.
///
/// Axis 0 is the slow (row) axis in the row-major sample layout. The grid
/// covers `[-n·Δ/2, n·Δ/2)` along every axis, so the physical coordinate of
/// index `i` is `-n·Δ/2 + i·Δ` and index `n/2` sits exactly at the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    extent: [usize; 2],
    spacing: f64,
}

impl Grid {
    pub fn new(extents: &[usize], spacing: f64) -> Result<Self> {
        let dim = extents.len();
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        for &n in extents {
            if n < 2 || !n.is_power_of_two() {
                return Err(Error::InvalidGrid(format!(
                    "extent {n} is not a power of two >= 2"
                )));
            }
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        let mut extent = [1; 2];
        extent[..dim].copy_from_slice(extents);
        Ok(Grid {
            dim,
            extent,
            spacing,
        })
    }

    pub fn line(n: usize, spacing: f64) -> Result<Self> {
        Grid::new(&[n], spacing)
    }

    pub fn square(n: usize, spacing: f64) -> Result<Self> {
        Grid::new(&[n, n], spacing)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn extents(&self) -> &[usize] {
        &self.extent[..self.dim]
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Total number of samples.
    #[inline]
    pub fn len(&self) -> usize {
        self.extent[0] * self.extent[1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight Δ^d of one cell.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    /// Coordinate of index 0 along `axis`.
    #[inline]
    pub fn origin(&self, axis: usize) -> f64 {
        -(self.extent[axis] as f64) * self.spacing / 2.0
    }

    /// Physical side length `n·Δ` along `axis`.
    pub fn side(&self, axis: usize) -> f64 {
        self.extent[axis] as f64 * self.spacing
    }

    #[inline]
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.origin(axis) + i as f64 * self.spacing
    }

    /// Multi-index of a flat (row-major) sample index.
    #[inline]
    pub fn unravel(&self, flat: usize) -> [usize; 2] {
        if self.dim == 1 {
            [flat, 0]
        } else {
            [flat / self.extent[1], flat % self.extent[1]]
        }
    }

    #[inline]
    pub fn ravel(&self, idx: [usize; 2]) -> usize {
        if self.dim == 1 {
            idx[0]
        } else {
            idx[0] * self.extent[1] + idx[1]
        }
    }

    /// Physical coordinates of a flat sample index. Unused trailing
    /// components are zero.
    #[inline]
    pub fn point(&self, flat: usize) -> [f64; 2] {
        let idx = self.unravel(flat);
        let mut p = [0.0; 2];
        for (axis, c) in p.iter_mut().enumerate().take(self.dim) {
            *c = self.coord(axis, idx[axis]);
        }
        p
    }

    /// Iterator over all sample coordinates in storage order.
    pub fn points(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    /// Same physical domain sampled `factor` times more densely. The
    /// original samples are every `factor`-th point of the result.
    pub fn oversampled(&self, factor: usize) -> Grid {
        let mut g = self.clone();
        for n in g.extent.iter_mut().take(self.dim) {
            *n *= factor;
        }
        g.spacing /= factor as f64;
        g
    }

    /// Grid refined `levels` times by halving the spacing over the same domain.
    pub fn refined(&self, levels: u32) -> Grid {
        self.oversampled(1 << levels)
    }

    /// Output grid of a dilation by `factor`: same spacing, `extent/factor`
    /// samples per axis.
    pub fn dilated(&self, factor: usize) -> Result<Grid> {
        let mut extents = Vec::with_capacity(self.dim);
        for &n in self.extents() {
            if factor == 0 || n % factor != 0 {
                return Err(Error::Divisibility { factor, extent: n });
            }
            extents.push(n / factor);
        }
        Grid::new(&extents, self.spacing)
    }

    /// Whether `[lo, hi]` (per axis) lies inside the central half
    /// `[-n·Δ/4, n·Δ/4]` of the domain.
    pub fn central_half_contains(&self, lo: &[f64], hi: &[f64]) -> bool {
        (0..self.dim).all(|a| {
            let q = self.side(a) / 4.0;
            lo[a] >= -q && hi[a] <= q
        })
    }

    /// Highest representable frequency (cycles per unit length).
    pub fn nyquist(&self) -> f64 {
        0.5 / self.spacing
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{:?}/{} vs {:?}/{}",
                self.extents(),
                self.spacing,
                other.extents(),
                other.spacing
            )))
        }
    }
}

/// `⟨x⟩ = (1 + |x|²)^{1/2}`.
#[inline]
pub fn japanese_bracket(x: &[f64]) -> f64 {
    (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::line(3, 1.0).is_err());
        assert!(Grid::line(1, 1.0).is_err());
        assert!(Grid::line(8, 0.0).is_err());
        assert!(Grid::new(&[4, 4, 4], 1.0).is_err());
        assert!(Grid::new(&[4, 8], 0.5).is_ok());
    }

    #[test]
    fn coordinates_are_centered() {
        let g = Grid::line(8, 0.5).unwrap();
        assert_eq!(g.coord(0, 0), -2.0);
        assert_eq!(g.coord(0, 4), 0.0);
        assert_eq!(g.coord(0, 7), 1.5);
        let g2 = Grid::square(4, 1.0).unwrap();
        assert_eq!(g2.point(g2.ravel([2, 3])), [0.0, 1.0]);
        assert_eq!(g2.unravel(7), [1, 3]);
    }

    #[test]
    fn oversampling_keeps_original_points() {
        let g = Grid::square(8, 0.25).unwrap();
        let o = g.oversampled(4);
        assert_eq!(o.origin(0), g.origin(0));
        for i in 0..8 {
            assert_eq!(o.coord(1, 4 * i), g.coord(1, i));
        }
    }

    #[test]
    fn bracket_values() {
        assert_eq!(japanese_bracket(&[0.0]), 1.0);
        assert_eq!(japanese_bracket(&[1.0, 1.0, 1.0]), 2.0);
    }

    proptest! {
        #[test]
        fn bracket_is_monotone(a in prop::array::uniform2(-50.0f64..50.0),
                               b in prop::array::uniform2(-50.0f64..50.0)) {
            let (na, nb) = (a[0] * a[0] + a[1] * a[1], b[0] * b[0] + b[1] * b[1]);
            let (small, large) = if na <= nb { (a, b) } else { (b, a) };
            prop_assert!(japanese_bracket(&small) <= japanese_bracket(&large));
            prop_assert!(japanese_bracket(&small) >= 1.0);
        }
    }
}
