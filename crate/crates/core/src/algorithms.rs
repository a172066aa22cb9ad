//! Waypoint update rules for PSO, SPSO, ARPSO and APSO.
//!
//! Every rule is applied independently to the x and y axes with fresh random
//! gains per axis. The step functions only compute the next unclamped
//! waypoint and the new velocity/acceleration; boundary handling and
//! distance bookkeeping belong to the simulation loop.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::params::AlgorithmParams;

/// Per-agent kinematic and memory state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UavState {
    pub position: Vec2,
    pub velocity: Vec2,
    /// Only evolves under APSO.
    pub acceleration: Vec2,
    pub personal_best_position: Vec2,
    pub personal_best_value: f64,
    pub cumulative_distance: f64,
}

impl UavState {
    /// At rest at `position`, with the reading taken there as personal best.
    pub fn at_rest(position: Vec2, measured: f64) -> Self {
        Self {
            position,
            velocity: Vec2::ZERO,
            acceleration: Vec2::ZERO,
            personal_best_position: position,
            personal_best_value: measured,
            cumulative_distance: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.is_finite() && self.velocity.is_finite() && self.acceleration.is_finite()
    }
}

/// Uniform gains `r1 ∈ [0, c1]`, `r2 ∈ [0, c2]`, `r3 ∈ [0, c3]` for one axis.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RandomGains {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

/// Supplies the per-axis gains of an update rule.
///
/// Any random generator is a gain source; [`FixedGains`] freezes them.
pub trait GainSource {
    fn draw(&mut self, params: &AlgorithmParams) -> RandomGains;
}

impl<R: RngCore + ?Sized> GainSource for R {
    fn draw(&mut self, params: &AlgorithmParams) -> RandomGains {
        use rand::Rng;
        let r1 = self.random::<f64>() * params.c1;
        let r2 = self.random::<f64>() * params.c2;
        // no draw when the attraction term is disabled
        let r3 = if params.c3 > 0.0 {
            self.random::<f64>() * params.c3
        } else {
            0.0
        };
        RandomGains { r1, r2, r3 }
    }
}

/// The same gains on every draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedGains(pub RandomGains);

impl FixedGains {
    pub fn new(r1: f64, r2: f64) -> Self {
        Self(RandomGains { r1, r2, r3: 0.0 })
    }
}

impl GainSource for FixedGains {
    fn draw(&mut self, _params: &AlgorithmParams) -> RandomGains {
        self.0
    }
}

/// Adaptive inertia of one ARPSO agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArpsoInertiaState {
    pub omega_i: f64,
    pub omega_min: f64,
    pub omega_max: f64,
}

impl ArpsoInertiaState {
    pub fn new(params: &AlgorithmParams) -> Self {
        Self {
            omega_i: params.omega_max,
            omega_min: params.omega_min,
            omega_max: params.omega_max,
        }
    }

    /// Fitness-rank inertia: `omega_max` for the swarm's best agent, `omega_min`
    /// for its worst, linear in between. A swarm with no spread gets `omega_max`.
    pub fn adapt(&mut self, f_i: f64, f_best: f64, f_worst: f64) {
        let spread = f_best - f_worst;
        self.omega_i = if spread > 0.0 {
            let frac = ((f_i - f_worst) / spread).clamp(0.0, 1.0);
            self.omega_min + (self.omega_max - self.omega_min) * frac
        } else {
            self.omega_max
        };
    }
}

fn limit(v: f64, params: &AlgorithmParams) -> f64 {
    match params.v_max {
        Some(m) => v.clamp(-m, m),
        None => v,
    }
}

/// Shared velocity-form update `v ← inertia·v + r1(x_ib − x) + r2(x_b − x) [+ r3(x_a − x)]`,
/// `x ← x + vT`.
fn velocity_step<G: GainSource + ?Sized>(
    state: &UavState,
    inertia: f64,
    x_ib: Vec2,
    x_b: Vec2,
    attractor: Option<Vec2>,
    params: &AlgorithmParams,
    gains: &mut G,
) -> UavState {
    let mut next = *state;
    for axis in 0..2 {
        let g = gains.draw(params);
        let x = state.position.axis(axis);
        let mut v = inertia * state.velocity.axis(axis)
            + g.r1 * (x_ib.axis(axis) - x)
            + g.r2 * (x_b.axis(axis) - x);
        if let Some(xa) = attractor {
            v += g.r3 * (xa.axis(axis) - x);
        }
        let v = limit(v, params);
        *next.velocity.axis_mut(axis) = v;
        *next.position.axis_mut(axis) = x + v * params.t;
    }
    next
}

/// Regular PSO: no inertia weight, global best.
pub fn step_pso<G: GainSource + ?Sized>(
    state: &UavState,
    x_ib: Vec2,
    x_gb: Vec2,
    params: &AlgorithmParams,
    gains: &mut G,
) -> UavState {
    velocity_step(state, 1.0, x_ib, x_gb, None, params, gains)
}

/// Standard PSO: constant inertia `omega`, local best.
pub fn step_spso<G: GainSource + ?Sized>(
    state: &UavState,
    x_ib: Vec2,
    x_lb: Vec2,
    params: &AlgorithmParams,
    gains: &mut G,
) -> UavState {
    velocity_step(state, params.omega, x_ib, x_lb, None, params, gains)
}

/// ARPSO with per-agent inertia. The attraction term only acts when an
/// attractor is given and `c3 > 0`.
pub fn step_arpso<G: GainSource + ?Sized>(
    state: &UavState,
    x_ib: Vec2,
    x_gb: Vec2,
    inertia: &ArpsoInertiaState,
    attractor: Option<Vec2>,
    params: &AlgorithmParams,
    gains: &mut G,
) -> UavState {
    velocity_step(state, inertia.omega_i, x_ib, x_gb, attractor, params, gains)
}

/// Acceleration-based PSO. Per axis, in order:
///
/// ```text
/// a ← w1·a + r1(x_ib − x) + r2(x_gb − x)
/// v ← w2·v + a·T
/// x ← x + v·T
/// ```
///
/// each line using the values just computed above it.
pub fn step_apso<G: GainSource + ?Sized>(
    state: &UavState,
    x_ib: Vec2,
    x_gb: Vec2,
    params: &AlgorithmParams,
    gains: &mut G,
) -> UavState {
    let mut next = *state;
    for axis in 0..2 {
        let g = gains.draw(params);
        let x = state.position.axis(axis);
        let a = params.w1 * state.acceleration.axis(axis)
            + g.r1 * (x_ib.axis(axis) - x)
            + g.r2 * (x_gb.axis(axis) - x);
        let v = limit(params.w2 * state.velocity.axis(axis) + a * params.t, params);
        *next.acceleration.axis_mut(axis) = a;
        *next.velocity.axis_mut(axis) = v;
        *next.position.axis_mut(axis) = x + v * params.t;
    }
    next
}

/// Replaces the personal best only on strict improvement.
pub fn update_personal_best(state: &UavState, measured: f64) -> UavState {
    let mut next = *state;
    if measured > state.personal_best_value {
        next.personal_best_value = measured;
        next.personal_best_position = state.position;
    }
    next
}
