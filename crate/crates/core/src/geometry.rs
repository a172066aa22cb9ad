//! Planar geometry shared by every module: points, the square search space,
//! and the boundary parameterization used to place agents.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point or displacement in the horizontal plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_squared(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Largest absolute coordinate.
    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs())
    }

    /// Linear interpolation, `t = 0` gives `self`.
    pub fn lerp(self, other: Vec2, t: f64) -> Vec2 {
        self + (other - self) * t
    }

    /// Component access by axis index (0 = x, 1 = y).
    pub fn axis(self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            _ => panic!("axis index {i} out of range"),
        }
    }

    pub fn axis_mut(&mut self, i: usize) -> &mut f64 {
        match i {
            0 => &mut self.x,
            1 => &mut self.y,
            _ => panic!("axis index {i} out of range"),
        }
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Axis-aligned square region `[origin, origin + side_length]²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub side_length: f64,
    pub origin: Vec2,
}

impl SearchSpace {
    pub fn new(side_length: f64, origin: Vec2) -> Result<Self> {
        let space = Self {
            side_length,
            origin,
        };
        space.validate()?;
        Ok(space)
    }

    /// Square of the given side anchored at the origin.
    pub fn square(side_length: f64) -> Result<Self> {
        Self::new(side_length, Vec2::ZERO)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.side_length.is_finite() && self.side_length > 0.0) {
            return Err(Error::invalid(
                "space.side",
                "side length must be finite and > 0",
            ));
        }
        if !self.origin.is_finite() {
            return Err(Error::invalid("space.origin", "origin must be finite"));
        }
        Ok(())
    }

    pub fn center(&self) -> Vec2 {
        self.origin + Vec2::new(self.side_length, self.side_length) * 0.5
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let max = self.origin + Vec2::new(self.side_length, self.side_length);
        p.x >= self.origin.x && p.x <= max.x && p.y >= self.origin.y && p.y <= max.y
    }

    /// Distance from an interior point to the nearest edge (0 on the boundary).
    pub fn distance_to_boundary(&self, p: Vec2) -> f64 {
        let max = self.origin + Vec2::new(self.side_length, self.side_length);
        (p.x - self.origin.x)
            .min(max.x - p.x)
            .min(p.y - self.origin.y)
            .min(max.y - p.y)
            .abs()
    }
}

/// Per-axis clamp of `p` into `space`. Interior points come back unchanged.
pub fn clamp_to_space(p: Vec2, space: &SearchSpace) -> Vec2 {
    let max = space.origin + Vec2::new(space.side_length, space.side_length);
    Vec2::new(
        p.x.clamp(space.origin.x, max.x),
        p.y.clamp(space.origin.y, max.y),
    )
}

/// Maps `u ∈ [0, 1)` onto the square's perimeter by arc length.
///
/// Traversal is counter-clockwise starting at `origin`: bottom edge, right
/// edge, top edge, left edge. `u = 0.25` is the bottom-right corner,
/// `u = 0.5` the top-right corner.
pub fn perimeter_point(space: &SearchSpace, u: f64) -> Result<Vec2> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::OutOfRange {
            what: "perimeter parameter u",
            value: u,
        });
    }
    let s = space.side_length;
    let arc = u * 4.0 * s;
    let edge = ((arc / s) as usize).min(3);
    let along = arc - edge as f64 * s;
    let local = match edge {
        0 => Vec2::new(along, 0.0),
        1 => Vec2::new(s, along),
        2 => Vec2::new(s - along, s),
        _ => Vec2::new(0.0, s - along),
    };
    Ok(space.origin + local)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hundred() -> SearchSpace {
        SearchSpace::square(100.0).unwrap()
    }

    #[test]
    fn clamp_examples() {
        let s = hundred();
        assert_eq!(
            clamp_to_space(Vec2::new(50.0, 50.0), &s),
            Vec2::new(50.0, 50.0)
        );
        assert_eq!(
            clamp_to_space(Vec2::new(-5.0, 50.0), &s),
            Vec2::new(0.0, 50.0)
        );
        assert_eq!(
            clamp_to_space(Vec2::new(120.0, -3.0), &s),
            Vec2::new(100.0, 0.0)
        );
    }

    #[test]
    fn perimeter_corners() {
        let s = hundred();
        assert_eq!(perimeter_point(&s, 0.0).unwrap(), Vec2::new(0.0, 0.0));
        assert_eq!(perimeter_point(&s, 0.25).unwrap(), Vec2::new(100.0, 0.0));
        assert_eq!(perimeter_point(&s, 0.5).unwrap(), Vec2::new(100.0, 100.0));
        assert_eq!(perimeter_point(&s, 0.75).unwrap(), Vec2::new(0.0, 100.0));
        assert_eq!(perimeter_point(&s, 0.125).unwrap(), Vec2::new(50.0, 0.0));
    }

    #[test]
    fn perimeter_rejects_out_of_range() {
        let s = hundred();
        assert!(perimeter_point(&s, 1.0).is_err());
        assert!(perimeter_point(&s, -0.1).is_err());
        assert!(perimeter_point(&s, f64::NAN).is_err());
    }

    #[test]
    fn invalid_space() {
        assert!(SearchSpace::square(0.0).is_err());
        assert!(SearchSpace::square(-1.0).is_err());
        assert!(SearchSpace::square(f64::INFINITY).is_err());
    }

    #[test]
    fn perimeter_injective_on_samples() {
        use rand::{Rng, SeedableRng};
        let s = SearchSpace::new(37.0, Vec2::new(-3.0, 8.0)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut us: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        us.sort_by(f64::total_cmp);
        us.dedup();
        let pts: Vec<Vec2> = us
            .iter()
            .map(|&u| perimeter_point(&s, u).unwrap())
            .collect();
        for p in &pts {
            assert!(s.contains(*p));
            assert!(s.distance_to_boundary(*p) < 1e-12);
        }
        for w in pts.windows(2) {
            assert!(w[0] != w[1]);
        }
    }

    proptest! {
        #[test]
        fn clamp_idempotent(x in -1e4f64..1e4, y in -1e4f64..1e4, side in 0.1f64..500.0) {
            let s = SearchSpace::square(side).unwrap();
            let once = clamp_to_space(Vec2::new(x, y), &s);
            prop_assert_eq!(clamp_to_space(once, &s), once);
            prop_assert!(s.contains(once));
        }
    }
}
