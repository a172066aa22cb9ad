//! Algorithm selection and hyperparameters.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stability::{self, StabilityVerdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Pso,
    Spso,
    Arpso,
    Apso,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Pso, Variant::Spso, Variant::Arpso, Variant::Apso];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Pso => "pso",
            Variant::Spso => "spso",
            Variant::Arpso => "arpso",
            Variant::Apso => "apso",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pso" => Ok(Variant::Pso),
            "spso" => Ok(Variant::Spso),
            "arpso" => Ok(Variant::Arpso),
            "apso" => Ok(Variant::Apso),
            other => Err(Error::invalid(
                "algorithm",
                format!("unknown algorithm `{other}`"),
            )),
        }
    }
}

/// Hyperparameters for one algorithm variant.
///
/// Not every field is read by every variant: `w1`/`w2` belong to APSO,
/// `omega` to SPSO, `omega_min`/`omega_max` and `c3` to ARPSO.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmParams {
    pub variant: Variant,
    pub w1: f64,
    pub w2: f64,
    pub omega: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Step scale applied to velocity (and to acceleration for APSO).
    pub t: f64,
    /// Per-axis velocity bound; `None` leaves velocities unbounded.
    pub v_max: Option<f64>,
}

impl AlgorithmParams {
    pub fn defaults(variant: Variant) -> Self {
        Self {
            variant,
            w1: 0.675,
            w2: -0.285,
            omega: 0.721,
            omega_min: 0.4,
            omega_max: 0.9,
            c1: 1.193,
            c2: 1.193,
            c3: 0.0,
            t: 1.0,
            v_max: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("params.w1", self.w1),
            ("params.w2", self.w2),
            ("params.omega", self.omega),
            ("params.omega_min", self.omega_min),
            ("params.omega_max", self.omega_max),
            ("params.c1", self.c1),
            ("params.c2", self.c2),
            ("params.c3", self.c3),
            ("params.t", self.t),
        ];
        for (key, v) in finite {
            if !v.is_finite() {
                return Err(Error::invalid(key, "must be finite"));
            }
        }
        if self.c1 <= 0.0 {
            return Err(Error::invalid("params.c1", "must be > 0"));
        }
        if self.c2 <= 0.0 {
            return Err(Error::invalid("params.c2", "must be > 0"));
        }
        if self.c3 < 0.0 {
            return Err(Error::invalid("params.c3", "must be >= 0"));
        }
        if self.t <= 0.0 {
            return Err(Error::invalid("params.t", "must be > 0"));
        }
        if self.omega_min > self.omega_max {
            return Err(Error::invalid(
                "params.omega_min",
                "must not exceed omega_max",
            ));
        }
        if let Some(v) = self.v_max {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid("params.v_max", "must be finite and > 0"));
            }
        }
        Ok(())
    }

    /// Stability verdict of the APSO recurrence for these parameters.
    ///
    /// The a → v → x cascade applies the step scale twice, so the loop gain
    /// seen by the closed-form conditions is `t²` (identical to `t` at the
    /// default `t = 1`).
    pub fn apso_stability(&self) -> StabilityVerdict {
        stability::jury_check(self.w1, self.w2, self.c1, self.c2, self.t * self.t)
    }

    /// Rejects unstable APSO settings unless `allow_unstable` is set.
    pub fn check_stability(&self, allow_unstable: bool) -> Result<()> {
        if self.variant != Variant::Apso || allow_unstable {
            return Ok(());
        }
        let verdict = self.apso_stability();
        if verdict.stable {
            Ok(())
        } else {
            Err(Error::Unstable {
                failed: verdict.failed_conditions,
            })
        }
    }
}

impl Default for AlgorithmParams {
    fn default() -> Self {
        Self::defaults(Variant::Apso)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stability::Condition;

    #[test]
    fn defaults_validate_and_are_stable() {
        for v in Variant::ALL {
            AlgorithmParams::defaults(v).validate().unwrap();
        }
        AlgorithmParams::defaults(Variant::Apso)
            .check_stability(false)
            .unwrap();
    }

    #[test]
    fn rejects_bad_gains() {
        let mut p = AlgorithmParams::default();
        p.c1 = 0.0;
        assert!(p.validate().is_err());
        let mut p = AlgorithmParams::default();
        p.t = -1.0;
        assert!(p.validate().is_err());
        let mut p = AlgorithmParams::default();
        p.c3 = -0.1;
        assert!(p.validate().is_err());
    }

    #[test]
    fn unstable_apso_is_gated() {
        let mut p = AlgorithmParams::default();
        p.w1 = 1.5;
        p.w2 = 1.5;
        match p.check_stability(false) {
            Err(Error::Unstable { failed }) => assert!(failed.contains(&Condition::C14)),
            other => panic!("expected stability rejection, got {other:?}"),
        }
        p.check_stability(true).unwrap();
        // other variants are never gated
        p.variant = Variant::Spso;
        p.check_stability(false).unwrap();
    }

    #[test]
    fn variant_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.as_str().parse::<Variant>().unwrap(), v);
        }
        assert!("dpso".parse::<Variant>().is_err());
    }
}
