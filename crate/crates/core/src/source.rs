//! The signal source and its optional random motion inside a disc.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Seconds between heading re-draws of a randomly moving source.
pub const HEADING_PERIOD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceMotion {
    Static,
    /// Constant-speed wander inside a disc, reflecting off its rim.
    RestrictedRandom {
        radius: f64,
        speed: f64,
        center: Vec2,
        /// Current heading in radians.
        heading: f64,
        /// Source time left until the next heading draw.
        until_redraw: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceModel {
    pub position: Vec2,
    pub power: f64,
    pub alpha: f64,
    pub motion: SourceMotion,
}

impl SourceModel {
    pub fn fixed(position: Vec2, power: f64, alpha: f64) -> Result<Self> {
        let s = Self {
            position,
            power,
            alpha,
            motion: SourceMotion::Static,
        };
        s.validate()?;
        Ok(s)
    }

    /// A source starting at `center` that wanders within `radius` of it.
    pub fn wandering(
        center: Vec2,
        radius: f64,
        speed: f64,
        power: f64,
        alpha: f64,
    ) -> Result<Self> {
        let s = Self {
            position: center,
            power,
            alpha,
            motion: SourceMotion::RestrictedRandom {
                radius,
                speed,
                center,
                heading: 0.0,
                until_redraw: 0.0,
            },
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.power.is_finite() && self.power > 0.0) {
            return Err(Error::invalid("source.power", "must be finite and > 0"));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::invalid("source.alpha", "must be finite and > 0"));
        }
        if !self.position.is_finite() {
            return Err(Error::invalid("source.position", "must be finite"));
        }
        if let SourceMotion::RestrictedRandom {
            radius,
            speed,
            center,
            ..
        } = self.motion
        {
            if !(radius.is_finite() && radius >= 0.0) {
                return Err(Error::invalid("source.radius", "must be finite and >= 0"));
            }
            if !(speed.is_finite() && speed >= 0.0) {
                return Err(Error::invalid("source.speed", "must be finite and >= 0"));
            }
            if self.position.distance(center) > radius + 1e-9 {
                return Err(Error::invalid(
                    "source.position",
                    "must lie inside the motion disc",
                ));
            }
        }
        Ok(())
    }

    pub fn is_static(&self) -> bool {
        match self.motion {
            SourceMotion::Static => true,
            SourceMotion::RestrictedRandom { speed, radius, .. } => speed == 0.0 || radius == 0.0,
        }
    }
}

/// Advances a moving source by `duration` seconds.
///
/// The heading is redrawn uniformly every [`HEADING_PERIOD`] seconds of
/// source time; hitting the rim reflects the direction about the radial
/// normal. Static sources are returned unchanged and draw nothing.
pub fn move_source<R: Rng + ?Sized>(src: &SourceModel, duration: f64, rng: &mut R) -> SourceModel {
    let SourceMotion::RestrictedRandom {
        radius,
        speed,
        center,
        mut heading,
        mut until_redraw,
    } = src.motion
    else {
        return *src;
    };
    let mut offset = src.position - center;
    let mut remaining = duration.max(0.0);
    while remaining > 0.0 {
        if until_redraw <= 0.0 {
            heading = rng.random::<f64>() * TAU;
            until_redraw = HEADING_PERIOD;
        }
        let dt = remaining.min(until_redraw);
        let (o, h) = travel_in_disc(offset, heading, speed * dt, radius);
        offset = o;
        heading = h;
        remaining -= dt;
        until_redraw -= dt;
        // absorb rounding so a chunk that ends on the period boundary redraws
        if until_redraw < 1e-12 {
            until_redraw = 0.0;
        }
        if remaining < 1e-12 {
            remaining = 0.0;
        }
    }
    SourceModel {
        position: center + offset,
        motion: SourceMotion::RestrictedRandom {
            radius,
            speed,
            center,
            heading,
            until_redraw,
        },
        ..*src
    }
}

/// Moves `offset` (relative to the disc center) a path length `length`
/// along `heading`, reflecting at the rim. Returns the new offset and heading.
fn travel_in_disc(mut offset: Vec2, heading: f64, mut length: f64, radius: f64) -> (Vec2, f64) {
    if radius == 0.0 {
        return (Vec2::ZERO, heading);
    }
    let mut dir = Vec2::new(heading.cos(), heading.sin());
    // a handful of bounces is plenty for the path lengths involved
    for _ in 0..64 {
        if length <= 0.0 {
            break;
        }
        let qd = offset.dot(dir);
        let c = offset.norm_squared() - radius * radius;
        let to_rim = -qd + (qd * qd - c).max(0.0).sqrt();
        if to_rim >= length {
            offset += dir * length;
            break;
        }
        offset += dir * to_rim;
        length -= to_rim;
        let n = offset * (1.0 / offset.norm());
        dir = dir - n * (2.0 * dir.dot(n));
    }
    let r = offset.norm();
    if r > radius {
        offset = offset * (radius / r);
    }
    (offset, dir.y.atan2(dir.x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_speed_stays_put() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = SourceModel::wandering(Vec2::new(100.0, 100.0), 4.0, 0.0, 100.0, 0.001).unwrap();
        let moved = move_source(&s, 37.5, &mut rng);
        assert_eq!(moved.position, s.position);
    }

    #[test]
    fn static_source_is_untouched() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = SourceModel::fixed(Vec2::new(3.0, 4.0), 100.0, 0.001).unwrap();
        assert_eq!(move_source(&s, 10.0, &mut rng), s);
    }

    #[test]
    fn speed_bound_and_disc_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let center = Vec2::new(100.0, 100.0);
        let mut s = SourceModel::wandering(center, 4.0, 0.3, 100.0, 0.001).unwrap();
        let start = s.position;
        let mut path = 0.0;
        for _ in 0..100 {
            let next = move_source(&s, 0.1, &mut rng);
            path += next.position.distance(s.position);
            assert!(next.position.distance(center) <= 4.0 + 1e-12);
            s = next;
        }
        assert!(path <= 3.0 + 1e-9, "path {path}");
        assert!(s.position.distance(start) <= 3.0 + 1e-9);
    }

    #[test]
    fn long_wander_stays_in_disc() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let center = Vec2::new(0.0, 0.0);
        let mut s = SourceModel::wandering(center, 4.0, 3.0, 100.0, 0.001).unwrap();
        for _ in 0..500 {
            s = move_source(&s, 0.73, &mut rng);
            assert!(s.position.distance(center) <= 4.0 + 1e-12);
        }
    }

    #[test]
    fn seeded_replay() {
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = SourceModel::wandering(Vec2::ZERO, 4.0, 0.2, 100.0, 0.001).unwrap();
            (0..50)
                .map(|_| {
                    s = move_source(&s, 0.37, &mut rng);
                    s.position
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(5), run(5));
        assert_ne!(run(5), run(6));
    }

    #[test]
    fn chunking_matches_one_long_move() {
        // heading draws are tied to source time, not to call boundaries
        let s = SourceModel::wandering(Vec2::ZERO, 4.0, 0.3, 100.0, 0.001).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(4);
        let mut b = ChaCha8Rng::seed_from_u64(4);
        let once = move_source(&s, 2.5, &mut a);
        let mut chunked = s;
        for _ in 0..5 {
            chunked = move_source(&chunked, 0.5, &mut b);
        }
        assert!(once.position.distance(chunked.position) < 1e-9);
    }

    #[test]
    fn reflection_keeps_path_length() {
        // heading straight at the rim from the center: 3 m out, 2 m back
        let (o, h) = travel_in_disc(Vec2::ZERO, 0.0, 5.0, 3.0);
        assert!((o.x - 1.0).abs() < 1e-12 && o.y.abs() < 1e-12);
        assert!((h.abs() - std::f64::consts::PI).abs() < 1e-12);
    }
}
