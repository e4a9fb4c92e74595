//! Norms, diameters, support values and functional widths in l_p spaces.
//!
//! Everything else in the crate measures distances through [`PNorm`]. The
//! exponent is kept exactly as entered: `p = 2.0` dispatches to the
//! Euclidean formula and `p = 1.0` to the sum of absolute values, so the
//! integer-valued identities used by the Hadamard constructions stay exact
//! in floating point whenever the inputs are.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// An exponent in `[1, inf]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    /// `1/p`, with `1/inf = 0`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinite => 0.0,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

/// The l_p norm together with its dual exponent `q`, `1/p + 1/q = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PNorm {
    p: Exponent,
    q: Exponent,
}

impl PNorm {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        if p.is_infinite() {
            return Ok(Self::infinity());
        }
        let q = if p == 1.0 {
            Exponent::Infinite
        } else {
            Exponent::Finite(p / (p - 1.0))
        };
        Ok(Self {
            p: Exponent::Finite(p),
            q,
        })
    }

    pub fn infinity() -> Self {
        Self {
            p: Exponent::Infinite,
            q: Exponent::Finite(1.0),
        }
    }

    pub fn exponent(&self) -> Exponent {
        self.p
    }

    pub fn dual_exponent(&self) -> Exponent {
        self.q
    }

    /// The norm whose unit ball is the polar body of this one.
    pub fn dual(&self) -> PNorm {
        PNorm { p: self.q, q: self.p }
    }

    /// `p` as a float, `f64::INFINITY` for the max-norm.
    pub fn p(&self) -> f64 {
        match self.p {
            Exponent::Finite(p) => p,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    pub fn q(&self) -> f64 {
        self.dual().p()
    }

    pub fn is(&self, p: f64) -> bool {
        self.p() == p
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        match self.p {
            Exponent::Infinite => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            Exponent::Finite(1.0) => x.iter().map(|v| v.abs()).sum(),
            Exponent::Finite(2.0) => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Exponent::Finite(p) => power_norm(x.iter().map(|v| v.abs()), p),
        }
    }

    /// `||a - b||_p` without allocating the difference.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
        match self.p {
            Exponent::Infinite => diffs.fold(0.0, f64::max),
            Exponent::Finite(1.0) => diffs.sum(),
            Exponent::Finite(2.0) => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            Exponent::Finite(p) => power_norm(diffs, p),
        }
    }
}

/// `(sum a_i^p)^(1/p)` for nonnegative `a_i`, rescaled by the largest entry
/// when the direct sum overflows or underflows (large `p`, e.g. duals of `p` near 1).
fn power_norm(abs: impl Iterator<Item = f64> + Clone, p: f64) -> f64 {
    let direct: f64 = abs.clone().map(|a| a.powf(p)).sum();
    if direct.is_normal() {
        return direct.powf(1.0 / p);
    }
    let top = abs.clone().fold(0.0, f64::max);
    if top == 0.0 || !top.is_finite() {
        return top;
    }
    top * abs.map(|a| (a / top).powf(p)).sum::<f64>().powf(1.0 / p)
}

impl fmt::Display for PNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.p.fmt(f)
    }
}

impl FromStr for PNorm {
    type Err = Error;

    /// Accepts a decimal number `>= 1` or exactly `inf`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "inf" {
            return Ok(Self::infinity());
        }
        let p: f64 = s.parse().map_err(|_| Error::ExponentSyntax(s.to_string()))?;
        if !p.is_finite() {
            return Err(Error::ExponentSyntax(s.to_string()));
        }
        Self::new(p)
    }
}

impl Serialize for PNorm {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self.p {
            Exponent::Finite(p) => serializer.serialize_f64(p),
            Exponent::Infinite => serializer.serialize_str("inf"),
        }
    }
}

/// A finite list of points of one common dimension, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

#[derive(Serialize)]
struct PointCloudFile {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl PointCloud {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self {
            dim,
            coords: Vec::new(),
        })
    }

    pub fn from_points(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        let mut cloud = Self::new(dim)?;
        for p in points {
            cloud.push(p)?;
        }
        Ok(cloud)
    }

    /// Builds a cloud from `len = dim * n_points` row-major coordinates.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index: pos / dim });
        }
        Ok(Self { dim, coords })
    }

    pub fn push(&mut self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: point.len(),
            });
        }
        if point.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index: self.len() });
        }
        self.coords.extend_from_slice(point);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }

    /// The sub-cloud made of `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        PointCloud { dim: self.dim, coords }
    }

    /// `scale * x + translation` applied to every point.
    pub fn transformed(&self, scale: f64, translation: &[f64]) -> PointCloud {
        assert_eq!(translation.len(), self.dim);
        let coords = self
            .coords
            .chunks_exact(self.dim)
            .flat_map(|p| p.iter().zip(translation).map(move |(x, t)| scale * x + t))
            .collect();
        PointCloud { dim: self.dim, coords }
    }

    /// Parses `{"dim": int, "points": [[float; dim], ...]}`; errors name the offending field.
    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
        let obj = value
            .as_object()
            .ok_or("expected an object with fields `dim` and `points`")?;
        let dim = obj
            .get("dim")
            .ok_or("missing field `dim`")?
            .as_u64()
            .filter(|&d| d > 0)
            .ok_or("field `dim` must be a positive integer")? as usize;
        let points = obj
            .get("points")
            .ok_or("missing field `points`")?
            .as_array()
            .ok_or("field `points` must be an array of points")?;
        let mut cloud = PointCloud::new(dim).map_err(|e| e.to_string())?;
        let mut point = Vec::with_capacity(dim);
        for (i, p) in points.iter().enumerate() {
            let coords = p
                .as_array()
                .ok_or_else(|| format!("field `points[{i}]` must be an array of numbers"))?;
            if coords.len() != dim {
                return Err(format!(
                    "field `points[{i}]` has {} coordinates, expected `dim` = {dim}",
                    coords.len()
                ));
            }
            point.clear();
            for (j, c) in coords.iter().enumerate() {
                point.push(
                    c.as_f64()
                        .ok_or_else(|| format!("field `points[{i}][{j}]` must be a number"))?,
                );
            }
            cloud
                .push(&point)
                .map_err(|_| format!("field `points[{i}]` has a non-finite coordinate"))?;
        }
        Ok(cloud)
    }

    pub fn to_json(&self) -> String {
        let file = PointCloudFile {
            dim: self.dim,
            points: self.points().map(<[f64]>::to_vec).collect(),
        };
        serde_json::to_string(&file).expect("point clouds always serialize")
    }
}

/// A pair of points attaining the diameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiameterWitness {
    pub value: f64,
    pub index_a: usize,
    pub index_b: usize,
}

impl DiameterWitness {
    fn zero() -> Self {
        Self {
            value: 0.0,
            index_a: 0,
            index_b: 0,
        }
    }

    // larger value wins; on equal values the lexicographically smaller pair
    fn better(self, other: Self) -> Self {
        if other.value > self.value
            || (other.value == self.value && (other.index_a, other.index_b) < (self.index_a, self.index_b))
        {
            other
        } else {
            self
        }
    }
}

/// Exact pairwise diameter. Rows are scanned in parallel and reduced with a
/// deterministic tie-break, so the witness does not depend on thread count.
pub fn diameter(cloud: &PointCloud, nm: &PNorm) -> DiameterWitness {
    let n = cloud.len();
    if n <= 1 {
        return DiameterWitness::zero();
    }
    (0..n - 1)
        .into_par_iter()
        .map(|i| {
            let a = cloud.point(i);
            let mut best = DiameterWitness {
                value: 0.0,
                index_a: i,
                index_b: i,
            };
            for j in i + 1..n {
                let d = nm.distance(a, cloud.point(j));
                if d > best.value {
                    best = DiameterWitness {
                        value: d,
                        index_a: i,
                        index_b: j,
                    };
                }
            }
            best
        })
        .reduce(DiameterWitness::zero, DiameterWitness::better)
}

/// Support function of the unit p-ball at `u`, i.e. `||u||_q`.
pub fn support(u: &[f64], nm: &PNorm) -> f64 {
    nm.dual().norm(u)
}

/// A point of the unit p-ball maximizing `<x, u>`.
///
/// For finite `q` this is `x_i = sign(u_i) |u_i|^(q-1) / ||u||_q^(q-1)`; for
/// `p = 1` all mass goes to the first coordinate of largest magnitude, and
/// for `p = inf` it is the sign vector of `u`.
pub fn support_maximizer(u: &[f64], nm: &PNorm) -> Vec<f64> {
    let mut x = vec![0.0; u.len()];
    let h = support(u, nm);
    if h == 0.0 {
        return x;
    }
    match (nm.exponent(), nm.dual_exponent()) {
        (Exponent::Infinite, _) => {
            for (xi, ui) in x.iter_mut().zip(u) {
                *xi = if *ui < 0.0 { -1.0 } else { 1.0 };
            }
        }
        (_, Exponent::Infinite) => {
            let (k, _) = u.iter().enumerate().fold(
                (0, -1.0),
                |(bk, bv), (k, v)| if v.abs() > bv { (k, v.abs()) } else { (bk, bv) },
            );
            x[k] = u[k].signum();
        }
        (_, Exponent::Finite(q)) => {
            // |u_i| <= h, so the ratio cannot overflow for large q
            for (xi, ui) in x.iter_mut().zip(u) {
                *xi = ui.signum() * (ui.abs() / h).powf(q - 1.0);
            }
        }
    }
    x
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Width {
    pub min: f64,
    pub max: f64,
    pub mid: f64,
}

impl Width {
    pub fn extent(&self) -> f64 {
        self.max - self.min
    }
}

/// Range of the linear functional `<., u>` over the cloud (not normalized by `|u|`).
pub fn width_functional(cloud: &PointCloud, u: &[f64]) -> Result<Width> {
    if u.len() != cloud.dim() {
        return Err(Error::DimensionMismatch {
            expected: cloud.dim(),
            found: u.len(),
        });
    }
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let (min, max) = cloud
        .points()
        .map(|x| dot(x, u))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    Ok(Width {
        min,
        max,
        mid: 0.5 * (min + max),
    })
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A point drawn uniformly from the unit p-ball.
///
/// Finite `p` uses the generalized-Gaussian representation: coordinates with
/// density proportional to `exp(-|t|^p)` divided by `(sum |t_i|^p + E)^(1/p)`
/// with `E ~ Exp(1)`.
pub fn sample_ball<R: Rng + ?Sized>(rng: &mut R, dim: usize, nm: &PNorm) -> Vec<f64> {
    match nm.exponent() {
        Exponent::Infinite => (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect(),
        Exponent::Finite(p) => {
            let gamma = Gamma::new(1.0 / p, 1.0).expect("shape 1/p is positive");
            let mut x: Vec<f64> = (0..dim)
                .map(|_| {
                    let g: f64 = gamma.sample(rng);
                    let t = g.powf(1.0 / p);
                    if rng.random::<bool>() {
                        t
                    } else {
                        -t
                    }
                })
                .collect();
            let e: f64 = Exp1.sample(rng);
            let total: f64 = x.iter().map(|v| v.abs().powf(p)).sum::<f64>() + e;
            let s = total.powf(1.0 / p);
            x.iter_mut().for_each(|v| *v /= s);
            x
        }
    }
}

/// A Gaussian direction rescaled onto the unit p-sphere (not uniform in
/// surface measure).
pub fn sample_sphere<R: Rng + ?Sized>(rng: &mut R, dim: usize, nm: &PNorm) -> Vec<f64> {
    loop {
        let mut x: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let r = nm.norm(&x);
        if r > 1e-12 {
            x.iter_mut().for_each(|v| *v /= r);
            return x;
        }
    }
}

/// Test-only reference implementations kept apart from the production paths.
#[cfg(test)]
pub(crate) mod oracle {
    use super::*;

    /// Every ordered pair, explicit difference vector, textbook formula.
    pub fn brute_force_diameter(cloud: &PointCloud, p: f64) -> f64 {
        let mut best = 0.0f64;
        for a in cloud.points() {
            for b in cloud.points() {
                let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                let d = if p.is_infinite() {
                    diff.iter().map(|v| v.abs()).fold(0.0, f64::max)
                } else {
                    diff.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
                };
                best = best.max(d);
            }
        }
        best
    }
}
