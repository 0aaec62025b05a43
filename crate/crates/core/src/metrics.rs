//! Frontier and run quality measures, all in the maximization sense.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default explorative-rate threshold.
pub const DEFAULT_AER_THRESHOLD: f64 = 0.01;

/// Points of a common dimension between 2 and 4, all finite.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl PointSet {
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if !(2..=4).contains(&dim) {
            return Err(Error::PointSet(format!("dimension must be 2, 3 or 4 (got {dim})")));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::PointSet(format!(
                    "point #{i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::PointSet(format!("point #{i} has a non-finite coordinate")));
            }
        }
        Ok(PointSet { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn check_reference(&self, reference: &[f64]) -> Result<()> {
        if reference.len() != self.dim {
            return Err(Error::PointSet(format!(
                "reference point has {} coordinates, expected {}",
                reference.len(),
                self.dim
            )));
        }
        if reference.iter().any(|v| !v.is_finite()) {
            return Err(Error::PointSet("reference point has a non-finite coordinate".into()));
        }
        for (index, p) in self.points.iter().enumerate() {
            if let Some(coordinate) = p.iter().zip(reference).position(|(x, r)| x < r) {
                return Err(Error::Reference { index, coordinate });
            }
        }
        Ok(())
    }
}

/// `a` weakly dominates `b` in every coordinate and strictly in one.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        strict |= x > y;
    }
    strict
}

fn nondominated(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let beaten = points.iter().enumerate().any(|(j, q)| j != i && dominates(q, p));
        if !beaten && !kept.contains(p) {
            kept.push(p.clone());
        }
    }
    kept
}

/// The nondominated subset, first occurrences kept, input order preserved.
pub fn pareto_filter(set: &PointSet) -> PointSet {
    PointSet {
        dim: set.dim,
        points: nondominated(&set.points),
    }
}

/// Exact dominated hypervolume above `reference`.
///
/// Dimension sweep: points are sorted on the last coordinate (descending) and
/// each slab between consecutive levels contributes its thickness times the
/// (d-1)-dimensional volume of the points at or above it.
pub fn hvi_exact(set: &PointSet, reference: &[f64]) -> Result<f64> {
    set.check_reference(reference)?;
    Ok(sweep_volume(nondominated(&set.points), reference))
}

fn sweep_volume(mut points: Vec<Vec<f64>>, reference: &[f64]) -> f64 {
    let d = reference.len();
    if points.is_empty() {
        return 0.0;
    }
    if d == 1 {
        return points.iter().map(|p| p[0] - reference[0]).fold(0.0, f64::max);
    }
    let last = d - 1;
    if d == 2 {
        // Staircase: descending in y, each step adds the x-extent beyond the
        // widest point seen so far.
        points.sort_by(|a, b| b[1].total_cmp(&a[1]));
        let mut reach = reference[0];
        let mut area = 0.0;
        for (i, p) in points.iter().enumerate() {
            reach = reach.max(p[0]);
            let floor = points.get(i + 1).map_or(reference[1], |q| q[1]);
            area += (p[1] - floor) * (reach - reference[0]);
        }
        return area;
    }
    points.sort_by(|a, b| b[last].total_cmp(&a[last]));
    let mut volume = 0.0;
    let mut active: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        active.push(p[..last].to_vec());
        let floor = points.get(i + 1).map_or(reference[last], |q| q[last]);
        let height = p[last] - floor;
        if height > 0.0 {
            let slice = nondominated(&active);
            volume += height * sweep_volume(slice, &reference[..last]);
        }
    }
    volume
}

/// Monte Carlo estimate of the dominated hypervolume.
///
/// Samples are uniform in the box spanned by `reference` and the
/// coordinate-wise maximum of the set.
pub fn hvi_monte_carlo(set: &PointSet, reference: &[f64], samples: usize, seed: u64) -> Result<f64> {
    set.check_reference(reference)?;
    if samples == 0 {
        return Err(Error::PointSet("Monte Carlo sample count must be at least 1".into()));
    }
    if set.is_empty() {
        return Ok(0.0);
    }
    let front = nondominated(&set.points);
    let upper: Vec<f64> = (0..set.dim)
        .map(|k| front.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let box_volume: f64 = upper.iter().zip(reference).map(|(u, r)| u - r).product();
    if box_volume == 0.0 {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = vec![0.0; set.dim];
    let mut hits = 0usize;
    for _ in 0..samples {
        for (k, s) in sample.iter_mut().enumerate() {
            *s = reference[k] + rng.random::<f64>() * (upper[k] - reference[k]);
        }
        if front.iter().any(|p| p.iter().zip(&sample).all(|(x, s)| x >= s)) {
            hits += 1;
        }
    }
    Ok(hits as f64 / samples as f64 * box_volume)
}

/// Average explorative rate of a best-so-far trace.
///
/// With `N = trace.len() - 1` deviations `delta_n = |f[n+1] - f[n]| / |f[n]|`,
/// returns the fraction of `delta_n >= threshold`.
pub fn aer(trace: &[f64], threshold: f64) -> Result<f64> {
    if trace.len() < 2 {
        return Err(Error::ShortTrace(trace.len()));
    }
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(Error::Config(format!(
            "threshold must be finite and non-negative (got {threshold})"
        )));
    }
    let n = trace.len() - 1;
    let mut hits = 0usize;
    for (index, pair) in trace.windows(2).enumerate() {
        let (current, next) = (pair[0], pair[1]);
        if current == 0.0 {
            return Err(Error::DegenerateTrace { index });
        }
        let delta = ((next - current) / current).abs();
        if delta >= threshold {
            hits += 1;
        }
    }
    Ok(hits as f64 / n as f64)
}

/// `100 * (a - b) / b`.
pub fn hvi_percent_gap(a: f64, b: f64) -> Result<f64> {
    if b == 0.0 {
        return Err(Error::Division);
    }
    Ok(100.0 * (a - b) / b)
}
