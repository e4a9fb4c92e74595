//! Banach-Mazur sandwich certificates `C_(n,p) ⊆ g C_n ⊆ r C_(n,p)`.
//!
//! The outer radius `r` is the largest p-norm of a vertex `g v`,
//! `v ∈ {-1, 1}^n`, found by exhaustive enumeration. The inner inclusion
//! holds iff every row of `g^-1` has q-norm at most one: a point `x` lies in
//! `g C_n` iff `||g^-1 x||_inf <= 1`, and the largest value of the functional
//! given by a row over the p-ball is that row's q-norm. The row form is
//! what is implemented; for the symmetric scaled-Hadamard maps used here
//! rows and columns of `g^-1` have the same norms, but for a general `g`
//! the column form would be the wrong predicate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hadamard::LinearMap;
use crate::lpcore::{dot, sample_ball, sample_sphere, support_maximizer, Exponent, PNorm};

/// Largest dimension whose `2^n` vertices are enumerated.
pub const MAX_ENUMERATION_DIM: usize = 20;

/// Slack allowed on the dual-feasibility predicate.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Relative gap under which two vertex norms count as tied.
const TIE_TOL: f64 = 1e-12;

/// At most this many tight vertices are listed in a report.
pub const MAX_LISTED_TIGHT: usize = 256;

const CHUNK: u64 = 1 << 12;

#[derive(Clone, Debug)]
pub struct SandwichCertificate {
    pub g: LinearMap,
    pub nm: PNorm,
    /// `max_v ||g v||_p`.
    pub r: f64,
    /// `max_i ||row_i(g^-1)||_q`.
    pub dual_margin: f64,
    /// A sign vector attaining `r`; among ties the lexicographically
    /// smallest with `+1` ordered before `-1`.
    pub argmax_vertex: Vec<i8>,
}

impl SandwichCertificate {
    /// `d_BM(C_n, C_(n,p)) <= r` is certified.
    pub fn is_valid(&self) -> bool {
        self.dual_margin <= 1.0 + FEASIBILITY_TOL
    }
}

fn check_enumerable(g: &LinearMap) -> Result<()> {
    if g.dim() > MAX_ENUMERATION_DIM {
        return Err(Error::SizeGuard {
            what: "dimension",
            value: g.dim(),
            limit: MAX_ENUMERATION_DIM,
        });
    }
    if g.inverse_rows().iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Singular);
    }
    Ok(())
}

// Sign masks: bit c set means coordinate c is -1. Reversing the low n bits
// gives a key whose numeric order is the lexicographic order on vectors.
fn lex_key(mask: u64, n: usize) -> u64 {
    mask.reverse_bits() >> (64 - n)
}

fn vertex(mask: u64, n: usize) -> Vec<i8> {
    (0..n).map(|c| if mask >> c & 1 == 1 { -1 } else { 1 }).collect()
}

#[derive(Clone, Copy)]
struct Best {
    value: f64,
    mask: u64,
}

impl Best {
    fn merge(self, other: Best, n: usize) -> Best {
        let scale = self.value.abs().max(other.value.abs());
        if (other.value - self.value).abs() <= TIE_TOL * scale {
            if lex_key(other.mask, n) < lex_key(self.mask, n) {
                other
            } else {
                self
            }
        } else if other.value > self.value {
            other
        } else {
            self
        }
    }
}

/// Walks the vertices `start..end` of the Gray-code sequence, updating
/// `y = g v` by one column per step, and calls `visit(mask, ||y||_p)`.
fn walk_gray(g: &LinearMap, nm: &PNorm, start: u64, end: u64, mut visit: impl FnMut(u64, f64)) {
    let n = g.dim();
    let columns: Vec<Vec<f64>> = (0..n).map(|c| g.column(c)).collect();
    let mut mask = start ^ (start >> 1);
    let mut y = g.apply(&vertex(mask, n).iter().map(|&s| f64::from(s)).collect::<Vec<_>>());
    visit(mask, nm.norm(&y));
    for i in start + 1..end {
        let c = i.trailing_zeros() as usize;
        // the old sign of coordinate c is +1 iff its bit is clear
        let step = if mask >> c & 1 == 0 { -2.0 } else { 2.0 };
        for (yi, col) in y.iter_mut().zip(&columns[c]) {
            *yi += step * col;
        }
        mask ^= 1 << c;
        visit(mask, nm.norm(&y));
    }
}

fn chunks(n: usize) -> impl ParallelIterator<Item = (u64, u64)> {
    let total = 1u64 << n;
    let count = total.div_ceil(CHUNK);
    (0..count)
        .into_par_iter()
        .map(move |k| (k * CHUNK, ((k + 1) * CHUNK).min(total)))
}

/// Exact outer radius over all `2^n` vertices plus the dual margin.
pub fn bm_upper_certificate(g: &LinearMap, nm: &PNorm) -> Result<SandwichCertificate> {
    check_enumerable(g)?;
    let n = g.dim();
    let best = chunks(n)
        .map(|(start, end)| {
            let mut best: Option<Best> = None;
            walk_gray(g, nm, start, end, |mask, value| {
                let cand = Best { value, mask };
                best = Some(match best {
                    None => cand,
                    Some(b) => b.merge(cand, n),
                });
            });
            best.expect("chunks are nonempty")
        })
        .collect::<Vec<_>>()
        .into_iter()
        .reduce(|a, b| a.merge(b, n))
        .expect("at least one vertex");
    let argmax_vertex = vertex(best.mask, n);
    let v: Vec<f64> = argmax_vertex.iter().map(|&s| f64::from(s)).collect();
    // recompute at the maximizer so incremental drift does not leak into r
    let r = nm.norm(&g.apply(&v));
    Ok(SandwichCertificate {
        g: g.clone(),
        nm: *nm,
        r,
        dual_margin: dual_feasibility(g, nm)?,
        argmax_vertex,
    })
}

/// `max_i ||row_i(g^-1)||_q`; at most one certifies `C_(n,p) ⊆ g C_n`.
pub fn dual_feasibility(g: &LinearMap, nm: &PNorm) -> Result<f64> {
    let dual = nm.dual();
    let rows = g.inverse_rows();
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Singular);
    }
    Ok(rows.iter().map(|r| dual.norm(r)).fold(0.0, f64::max))
}

/// `2^(1/2 - 1/p) sqrt(n)`, a lower bound on `d_BM(C_n, C_(n,p))` for `1 <= p < 2`.
pub fn bm_lower_bound(n: usize, nm: &PNorm) -> Result<f64> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    match nm.exponent() {
        Exponent::Finite(p) if (1.0..2.0).contains(&p) => Ok(2f64.powf(0.5 - 1.0 / p) * (n as f64).sqrt()),
        _ => Err(Error::Regime(format!(
            "the lower bound is stated for 1 <= p < 2, got p = {nm}"
        ))),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    /// `dual_feasibility(g)`: `C_(n,p) ⊆ left_margin * g C_n`.
    pub left_margin: f64,
    /// `g C_n ⊆ r C_(n,p)`.
    pub r: f64,
    /// `left_margin * r`, the distance bound after rescaling `g` to be feasible.
    pub distance_bound: f64,
    pub left_inclusion: bool,
    /// Number of vertices with `||g v||_p` tied with `r`.
    pub tight_count: u64,
    /// The first tight vertices in lexicographic order, at most [`MAX_LISTED_TIGHT`].
    pub tight_directions: Vec<Vec<i8>>,
    pub sampled_points: usize,
    /// `max ||g^-1 x||_inf` over sampled `x` in `C_(n,p)`.
    pub sampled_max: f64,
    pub sampling_agrees: bool,
}

fn tight_vertices(g: &LinearMap, nm: &PNorm, r: f64) -> (u64, Vec<Vec<i8>>) {
    let n = g.dim();
    let mut keys: Vec<u64> = chunks(n)
        .map(|(start, end)| {
            let mut hits = Vec::new();
            walk_gray(g, nm, start, end, |mask, value| {
                if value >= r - TIE_TOL * r.abs() {
                    hits.push(lex_key(mask, n));
                }
            });
            hits
        })
        .flatten()
        .collect();
    keys.sort_unstable();
    let count = keys.len() as u64;
    let listed = keys
        .iter()
        .take(MAX_LISTED_TIGHT)
        .map(|&k| vertex(lex_key(k, n), n))
        .collect();
    (count, listed)
}

/// Left and right margins of the sandwich plus an independent sampled
/// check of the left inclusion.
///
/// The sample set holds the exact maximizers of every row functional of
/// `g^-1` (and their negatives) followed by `samples` random points, half
/// uniform in the ball and half on its boundary.
pub fn check_sandwich(g: &LinearMap, nm: &PNorm, samples: usize, seed: u64) -> Result<SandwichReport> {
    check_sandwich_tol(g, nm, samples, seed, FEASIBILITY_TOL)
}

pub fn check_sandwich_tol(g: &LinearMap, nm: &PNorm, samples: usize, seed: u64, tol: f64) -> Result<SandwichReport> {
    let cert = bm_upper_certificate(g, nm)?;
    let n = g.dim();
    let inverse = g.inverse_rows();
    let inf_image = |x: &[f64]| inverse.iter().map(|r| dot(r, x).abs()).fold(0.0, f64::max);

    let mut sampled_max = 0.0f64;
    let mut sampled_points = 0;
    for row in &inverse {
        let x = support_maximizer(row, nm);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        sampled_max = sampled_max.max(inf_image(&x)).max(inf_image(&neg));
        sampled_points += 2;
    }
    let chunk = 4096usize;
    let random_max = (0..samples.div_ceil(chunk))
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let count = chunk.min(samples - k * chunk);
            (0..count)
                .map(|i| {
                    let x = if i % 2 == 0 {
                        sample_ball(&mut rng, n, nm)
                    } else {
                        sample_sphere(&mut rng, n, nm)
                    };
                    inf_image(&x)
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    sampled_max = sampled_max.max(random_max);
    sampled_points += samples;

    let left_inclusion = cert.dual_margin <= 1.0 + tol;
    let sampling_agrees = left_inclusion == (sampled_max <= 1.0 + tol);
    let (tight_count, tight_directions) = tight_vertices(g, nm, cert.r);
    Ok(SandwichReport {
        left_margin: cert.dual_margin,
        r: cert.r,
        distance_bound: cert.dual_margin * cert.r,
        left_inclusion,
        tight_count,
        tight_directions,
        sampled_points,
        sampled_max,
        sampling_agrees,
    })
}
