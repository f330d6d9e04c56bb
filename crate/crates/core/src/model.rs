//! Manipulator description: DH parameters, validation, and the purely
//! geometric predicates that depend on the parameters alone.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Geometric/angle tolerance for the parameter-only predicates. Lengths are
/// normalized by `a1` (when `a1 > 0`) before the zero tests, so this is an
/// absolute tolerance on dimensionless quantities.
pub const EPS_GEOM: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("model not scalable: a1 = 0")]
    NotScalable,
}

/// DH parameters of a 3R chain. `d1` is fixed to zero and the joint-angle
/// offsets are zero; the cross-section analysis relies on that frame choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DhParams {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub d2: f64,
    pub d3: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

impl DhParams {
    pub fn new(a1: f64, a2: f64, a3: f64, d2: f64, d3: f64, alpha1: f64, alpha2: f64) -> Self {
        Self { a1, a2, a3, d2, d3, alpha1, alpha2 }
    }

    fn finite(&self) -> bool {
        [self.a1, self.a2, self.a3, self.d2, self.d3, self.alpha1, self.alpha2]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// One joint configuration, each angle normalized to `[-pi, pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointConfig {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
}

/// Wraps an angle into `[-pi, pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if t >= PI {
        t -= 2.0 * PI;
    }
    t
}

impl JointConfig {
    pub fn new(theta1: f64, theta2: f64, theta3: f64) -> Self {
        Self {
            theta1: wrap_angle(theta1),
            theta2: wrap_angle(theta2),
            theta3: wrap_angle(theta3),
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.theta1, self.theta2, self.theta3]
    }

    /// Torus distance: max over joints of the wrapped angular difference.
    pub fn torus_distance(&self, other: &JointConfig) -> f64 {
        let a = self.as_array();
        let b = other.as_array();
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| wrap_angle(x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// Validated manipulator with its derived geometric flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Manipulator {
    pub params: DhParams,
    /// True when both twist angles are right angles (|cos| below tolerance).
    pub orthogonal: bool,
    /// Bit `i-1` set when geometric condition `i` (1..=6) holds.
    pub conditions: u8,
    /// Length of `a1` used for normalization, 1 when `a1 = 0`.
    pub unit_scale: f64,
}

/// The six parameter-only conditions that force a 3R manipulator to be
/// noncuspidal. Returned as a bitmask, bit `i-1` for condition `i`:
/// 1. first two joint axes parallel (`sin(alpha1) = 0`)
/// 2. last two joint axes parallel (`sin(alpha2) = 0`)
/// 3. first two joint axes intersect (`a1 = 0`)
/// 4. last two joint axes intersect (`a2 = 0`)
/// 5. first two axes orthogonal, all offsets zero (`cos(alpha1) = 0, d2 = d3 = 0`)
/// 6. mutually orthogonal axes, first offset zero (`cos(alpha1) = cos(alpha2) = 0, d2 = 0`)
pub fn geometric_class(params: &DhParams) -> u8 {
    // Normalize lengths so the tolerance is scale free.
    let s = if params.a1.abs() > 0.0 {
        params.a1.abs()
    } else {
        let m = params.a2.abs().max(params.a3.abs()).max(params.d2.abs()).max(params.d3.abs());
        if m > 0.0 {
            m
        } else {
            1.0
        }
    };
    let a1 = params.a1 / s;
    let a2 = params.a2 / s;
    let d2 = params.d2 / s;
    let d3 = params.d3 / s;
    let (s1, c1) = params.alpha1.sin_cos();
    let (s2, c2) = params.alpha2.sin_cos();

    let mut mask = 0u8;
    if s1.abs() < EPS_GEOM {
        mask |= 1 << 0;
    }
    if s2.abs() < EPS_GEOM {
        mask |= 1 << 1;
    }
    if a1.abs() < EPS_GEOM {
        mask |= 1 << 2;
    }
    if a2.abs() < EPS_GEOM {
        mask |= 1 << 3;
    }
    if c1.abs() < EPS_GEOM && d2.abs() < EPS_GEOM && d3.abs() < EPS_GEOM {
        mask |= 1 << 4;
    }
    if c1.abs() < EPS_GEOM && c2.abs() < EPS_GEOM && d2.abs() < EPS_GEOM {
        mask |= 1 << 5;
    }
    mask
}

/// Iterator over the condition ids (1..=6) present in a condition bitmask.
pub fn condition_ids(mask: u8) -> impl Iterator<Item = u8> {
    (1..=6u8).filter(move |i| mask & (1 << (i - 1)) != 0)
}

impl Manipulator {
    /// Validates raw parameters and derives the geometric flags.
    pub fn validate(params: DhParams) -> Result<Self, ModelError> {
        if !params.finite() {
            return Err(ModelError::InvalidParams("non-finite parameter".into()));
        }
        if params.a1 < 0.0 || params.a2 < 0.0 || params.a3 < 0.0 {
            return Err(ModelError::InvalidParams("link lengths must be >= 0".into()));
        }
        if params.a1 == 0.0 && params.a2 == 0.0 && params.a3 == 0.0 {
            return Err(ModelError::InvalidParams(
                "degenerate model: all link lengths are zero".into(),
            ));
        }
        if params.alpha1 <= -PI || params.alpha1 > PI || params.alpha2 <= -PI || params.alpha2 > PI
        {
            return Err(ModelError::InvalidParams("twist angles must lie in (-pi, pi]".into()));
        }
        let orthogonal =
            params.alpha1.cos().abs() < EPS_GEOM && params.alpha2.cos().abs() < EPS_GEOM;
        Ok(Self { params, orthogonal, conditions: geometric_class(&params), unit_scale: 1.0 })
    }

    /// Similarity-scales the model so `a1 = 1`; classification outputs are
    /// invariant under this scaling.
    pub fn normalize(&self) -> Result<Self, ModelError> {
        if self.params.a1 <= 0.0 {
            return Err(ModelError::NotScalable);
        }
        let s = self.params.a1;
        let p = DhParams {
            a1: 1.0,
            a2: self.params.a2 / s,
            a3: self.params.a3 / s,
            d2: self.params.d2 / s,
            d3: self.params.d3 / s,
            alpha1: self.params.alpha1,
            alpha2: self.params.alpha2,
        };
        let mut m = Self::validate(p)?;
        m.unit_scale = self.unit_scale * s;
        Ok(m)
    }

    /// Sum of the length parameters; the natural length scale of the model.
    pub fn length_scale(&self) -> f64 {
        let p = &self.params;
        p.a1 + p.a2 + p.a3 + p.d2.abs() + p.d3.abs()
    }

    /// Sign of `sin(alpha1)` (+1.0 or -1.0); only meaningful for orthogonal
    /// models where `sin` is +-1.
    pub fn sigma1(&self) -> f64 {
        if self.params.alpha1.sin() >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Sign of `sin(alpha2)`.
    pub fn sigma2(&self) -> f64 {
        if self.params.alpha2.sin() >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    /// True when the offset along the last joint axis vanishes (within the
    /// scale-free tolerance); the closed-form classification requires it.
    pub fn d3_is_zero(&self) -> bool {
        self.params.d3.abs() < EPS_GEOM * self.length_scale()
    }

    pub fn has_condition(&self, id: u8) -> bool {
        debug_assert!((1..=6).contains(&id));
        self.conditions & (1 << (id - 1)) != 0
    }

    /// Loads a model from the JSON object `{a1,a2,a3,d2,d3,alpha1,alpha2}`.
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let params: DhParams = serde_json::from_str(text)
            .map_err(|e| ModelError::InvalidParams(format!("bad model JSON: {e}")))?;
        Self::validate(params)
    }
}

/// The illustrative orthogonal manipulator used throughout the tests:
/// `a1=1, a2=2, a3=1.5, d2=1, d3=0, alpha1=-pi/2, alpha2=pi/2`.
pub fn illustrative() -> Manipulator {
    Manipulator::validate(DhParams::new(1.0, 2.0, 1.5, 1.0, 0.0, -PI / 2.0, PI / 2.0)).unwrap()
}
