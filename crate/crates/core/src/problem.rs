//! Resin-bonded sand mould model.
//!
//! Four quadratic response surfaces (permeability, compression, tensile and
//! shear strength) over resin %, hardener %, stroke count and curing time,
//! all maximized. The optimizer never sees physical units: it works in the
//! unit hypercube and [`to_physical`] maps a point back onto the box.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DIMENSION: usize = 4;

pub const VARIABLE_NAMES: [&str; DIMENSION] = ["A", "B", "C", "D"];

/// Box constraints `[lower, upper]` for A, B, C, D.
pub const VARIABLE_BOUNDS: [(f64, f64); DIMENSION] = [(1.5, 2.5), (30.0, 50.0), (3.0, 5.0), (60.0, 100.0)];

/// Tolerance used when checking that weights sum to one.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// A full quadratic with pairwise interactions in four variables.
///
/// `interaction` is ordered AB, AC, AD, BC, BD, CD.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResponseSurface {
    pub intercept: f64,
    pub linear: [f64; DIMENSION],
    pub square: [f64; DIMENSION],
    pub interaction: [f64; 6],
}

const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

impl ResponseSurface {
    pub fn eval(&self, x: &[f64; DIMENSION]) -> f64 {
        let mut acc = self.intercept;
        for ((l, q), &xi) in self.linear.iter().zip(&self.square).zip(x) {
            acc += l * xi + q * xi * xi;
        }
        for (coef, &(i, j)) in self.interaction.iter().zip(PAIRS.iter()) {
            acc += coef * x[i] * x[j];
        }
        acc
    }

    /// All 15 coefficients in table order.
    pub fn coefficients(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.intercept)
            .chain(self.linear.iter().copied())
            .chain(self.square.iter().copied())
            .chain(self.interaction.iter().copied())
    }
}

/// Regression coefficients for f1 (permeability), f2 (compression strength),
/// f3 (tensile strength) and f4 (shear strength).
pub const SAND_MOULD_MODEL: [ResponseSurface; 4] = [
    ResponseSurface {
        intercept: -333.77,
        linear: [614.73, -27.435, 630.36, -18.97],
        square: [-168.98, 0.239, -76.08, 0.111],
        interaction: [2.827, 0.575, 0.047, -0.7701, 0.1323, -0.1883],
    },
    ResponseSurface {
        intercept: 2765.36,
        linear: [877.869, -112.778, -731.934, 17.9222],
        square: [-357.829, 0.983456, 52.2310, -0.0276946],
        interaction: [14.6571, 96.8495, -3.74068, 7.62554, -0.096084, -1.27093],
    },
    ResponseSurface {
        intercept: -354.406,
        linear: [211.418, 17.3611, 96.7916, 2.78503],
        square: [-44.7516, -0.173996, -10.6696, -0.026223],
        interaction: [-2.08868, 6.05542, 0.197646, 2.07847, -0.078904, 1.18561],
    },
    ResponseSurface {
        intercept: 318.163,
        linear: [726.696, 33.3432, -721.381, 2.40622],
        square: [-210.057, -0.189623, 80.1788, 0.000987],
        interaction: [-1.89739, 49.8702, -0.32471, -1.70998, -0.07323, 0.306223],
    },
];

/// Process parameters in physical units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionVector {
    /// Resin, percent.
    pub a: f64,
    /// Hardener, percent.
    pub b: f64,
    /// Number of strokes (treated as continuous).
    pub c: f64,
    /// Curing time, minutes.
    pub d: f64,
}

impl DecisionVector {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        DecisionVector { a, b, c, d }
    }

    pub fn from_array(x: [f64; DIMENSION]) -> Self {
        DecisionVector::new(x[0], x[1], x[2], x[3])
    }

    pub fn to_array(self) -> [f64; DIMENSION] {
        [self.a, self.b, self.c, self.d]
    }

    /// Fails with the first variable that leaves its box.
    pub fn check_bounds(&self) -> Result<()> {
        for ((value, &(lower, upper)), variable) in self
            .to_array()
            .into_iter()
            .zip(VARIABLE_BOUNDS.iter())
            .zip(VARIABLE_NAMES)
        {
            if !(lower..=upper).contains(&value) {
                return Err(Error::Infeasible {
                    variable,
                    value,
                    lower,
                    upper,
                });
            }
        }
        Ok(())
    }
}

/// Responses (f1, f2, f3, f4), all to be maximized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector(pub [f64; 4]);

impl ObjectiveVector {
    pub fn values(&self) -> &[f64; 4] {
        &self.0
    }
}

/// Non-negative convex weights over the four objectives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct WeightVector([f64; 4]);

impl WeightVector {
    pub fn new(w: [f64; 4]) -> Result<Self> {
        if let Some(bad) = w.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Weights(format!(
                "component {bad} is not a finite non-negative number"
            )));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::Weights(format!("components sum to {sum}, not 1")));
        }
        Ok(WeightVector(w))
    }

    pub fn values(&self) -> &[f64; 4] {
        &self.0
    }

    /// Parses `w1,w2,w3,w4`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::Weights(format!(
                "expected 4 comma-separated weights, got `{text}`"
            )));
        }
        let mut w = [0.0; 4];
        for (slot, part) in w.iter_mut().zip(parts) {
            *slot = part
                .parse()
                .map_err(|_| Error::Weights(format!("`{part}` is not a number")))?;
        }
        WeightVector::new(w)
    }
}

impl TryFrom<[f64; 4]> for WeightVector {
    type Error = Error;

    fn try_from(w: [f64; 4]) -> Result<Self> {
        WeightVector::new(w)
    }
}

impl From<WeightVector> for [f64; 4] {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

/// A point of the unit hypercube.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedPoint([f64; DIMENSION]);

impl NormalizedPoint {
    /// Accepts only components in `[0, 1]`.
    pub fn new(u: [f64; DIMENSION]) -> Option<Self> {
        u.iter().all(|v| (0.0..=1.0).contains(v)).then_some(NormalizedPoint(u))
    }

    pub fn values(&self) -> &[f64; DIMENSION] {
        &self.0
    }

    pub fn squared_distance(&self, other: &NormalizedPoint) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b) * (a - b)).sum()
    }
}

/// Clips every component to `[0, 1]`. NaN components map to 0.
pub fn clamp_unit(u: [f64; DIMENSION]) -> NormalizedPoint {
    NormalizedPoint(u.map(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) }))
}

pub fn to_physical(u: &NormalizedPoint) -> DecisionVector {
    let mut x = [0.0; DIMENSION];
    for (i, (lower, upper)) in VARIABLE_BOUNDS.iter().enumerate() {
        x[i] = lower + u.0[i] * (upper - lower);
    }
    DecisionVector::from_array(x)
}

/// Inverse of [`to_physical`]; out-of-box inputs are clamped.
pub fn to_normalized(x: &DecisionVector) -> NormalizedPoint {
    let phys = x.to_array();
    let mut u = [0.0; DIMENSION];
    for (i, (lower, upper)) in VARIABLE_BOUNDS.iter().enumerate() {
        u[i] = (phys[i] - lower) / (upper - lower);
    }
    clamp_unit(u)
}

/// Evaluates the four responses at a feasible point.
pub fn evaluate(x: &DecisionVector) -> Result<ObjectiveVector> {
    x.check_bounds()?;
    Ok(evaluate_unchecked(x))
}

fn evaluate_unchecked(x: &DecisionVector) -> ObjectiveVector {
    let v = x.to_array();
    ObjectiveVector(SAND_MOULD_MODEL.map(|surface| surface.eval(&v)))
}

/// Weighted sum `w1 f1 + w2 f2 + w3 f3 + w4 f4`.
pub fn aggregate(f: &ObjectiveVector, w: &WeightVector) -> f64 {
    f.0.iter().zip(w.0.iter()).map(|(fi, wi)| fi * wi).sum()
}

/// A scalar fitness to maximize over the unit hypercube.
pub trait Landscape {
    fn fitness(&self, u: &NormalizedPoint) -> f64;
}

impl<F> Landscape for F
where
    F: Fn(&NormalizedPoint) -> f64,
{
    fn fitness(&self, u: &NormalizedPoint) -> f64 {
        self(u)
    }
}

/// The sand mould model scalarized with a fixed weight vector.
#[derive(Clone, Copy, Debug)]
pub struct WeightedSandMould {
    pub weights: WeightVector,
}

impl WeightedSandMould {
    pub fn new(weights: WeightVector) -> Self {
        WeightedSandMould { weights }
    }

    /// Physical point, objectives and aggregate at a normalized point.
    pub fn solve_point(&self, u: &NormalizedPoint) -> (DecisionVector, ObjectiveVector, f64) {
        let x = to_physical(u);
        let f = evaluate_unchecked(&x);
        let total = aggregate(&f, &self.weights);
        (x, f, total)
    }
}

impl Landscape for WeightedSandMould {
    fn fitness(&self, u: &NormalizedPoint) -> f64 {
        self.solve_point(u).2
    }
}
