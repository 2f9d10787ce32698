//! Real-valued genomes with per-dimension box bounds.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("lower and upper bounds differ in length ({lower} vs {upper})")]
    LengthMismatch { lower: usize, upper: usize },
    #[error("bounds must be finite with lower < upper (dimension {dim})")]
    Empty { dim: usize },
    #[error("bounds need at least one dimension")]
    NoDimensions,
}

/// Axis-aligned box `[lower_d, upper_d]` per genome dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, BoundsError> {
        if lower.len() != upper.len() {
            return Err(BoundsError::LengthMismatch {
                lower: lower.len(),
                upper: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(BoundsError::NoDimensions);
        }
        for (dim, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(BoundsError::Empty { dim });
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn unit(dim: usize) -> Self {
        Self::new(vec![0.0; dim], vec![1.0; dim]).expect("unit box is valid")
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn range(&self, d: usize) -> f64 {
        self.upper[d] - self.lower[d]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    pub fn clip(&self, x: &mut [f64]) {
        for (d, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[d], self.upper[d]);
        }
    }

    /// Maps `x` into the unit cube.
    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(d, v)| (v - self.lower[d]) / self.range(d))
            .collect()
    }

    /// Maps a unit-cube point back into the box.
    pub fn denormalize(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .enumerate()
            .map(|(d, v)| self.lower[d] + v * self.range(d))
            .collect()
    }
}

/// True if every coordinate of `a` and `b` differs by at most `tol`.
pub fn same_genome(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_roundtrip() {
        let b = Bounds::new(vec![-1.0, 2.0], vec![1.0, 6.0]).unwrap();
        let u = b.normalize(&[0.0, 3.0]);
        assert_eq!(u, vec![0.5, 0.25]);
        assert_eq!(b.denormalize(&u), vec![0.0, 3.0]);
        let mut x = vec![5.0, -5.0];
        b.clip(&mut x);
        assert_eq!(x, vec![1.0, 2.0]);
    }

    #[test]
    fn rejects_bad_bounds() {
        assert!(Bounds::new(vec![0.0], vec![0.0]).is_err());
        assert!(Bounds::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(Bounds::new(vec![f64::NAN], vec![1.0]).is_err());
        assert!(Bounds::new(vec![], vec![]).is_err());
    }
}
