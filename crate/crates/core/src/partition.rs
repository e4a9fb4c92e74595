//! Partitions of finite point clouds in four-dimensional l_p space into at
//! most 16 parts of strictly smaller diameter.
//!
//! Three constructions, chosen by `p`:
//!
//! * `p > 2`: centre the bounding box and split by orthant. Each part fits
//!   in a cube of half the box, whose p-diameter is `4^(1/p) tau < 2 tau`.
//! * `1 < p <= 2`: scale to diameter 2, centre the four functionals given
//!   by the columns `u_i` of `4^(-1/p) H_4`, and split the parallelotope they
//!   bound into its 16 half-size cells.
//! * `p = 1`: scale to diameter 2 and centre the odd-parity facet
//!   functionals `u_5..u_8`. The cloud then lies in the cross-polytope
//!   plus four of its eight spikes; cross-polytope points go to the eight
//!   pieces `3/4 C + ±(1/4) e_j`, spike points to their spike.
//!
//! Every result carries per-part diameters, and [`verify_partition`]
//! recomputes them from scratch.

use serde::Serialize;

use crate::covering::axis_centers;
use crate::error::{Error, Result};
use crate::hadamard::fixed_h4;
use crate::lpcore::{diameter, dot, width_functional, DiameterWitness, Exponent, PNorm, PointCloud};

/// Labels available to the four-dimensional constructions.
pub const LABEL_SPACE: usize = 16;

/// A part counts as strictly smaller when its ratio is below `1 - STRICT_TOL`.
pub const STRICT_TOL: f64 = 1e-12;

/// Slack for membership and containment predicates.
pub const GEOM_TOL: f64 = 1e-9;

/// Largest dimension accepted by the orthant split.
pub const MAX_CUBE_DIM: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Cube,
    HadamardCell,
    Crosspolytope,
}

impl Method {
    pub fn for_exponent(nm: &PNorm) -> Method {
        match nm.exponent() {
            Exponent::Finite(1.0) => Method::Crosspolytope,
            Exponent::Finite(p) if p <= 2.0 => Method::HadamardCell,
            _ => Method::Cube,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Cube => "cube",
            Method::HadamardCell => "hadamard_cell",
            Method::Crosspolytope => "crosspolytope",
        }
    }

    /// Upper bound on nonempty parts guaranteed by the construction in 4D.
    pub fn part_limit(&self) -> usize {
        match self {
            Method::Crosspolytope => 12,
            _ => LABEL_SPACE,
        }
    }
}

/// The internal coordinates are `scale * x + translation`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Normalization {
    pub scale: f64,
    pub translation: Vec<f64>,
}

impl Normalization {
    fn identity(dim: usize) -> Self {
        Self {
            scale: 1.0,
            translation: vec![0.0; dim],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartDiameter {
    pub label: usize,
    pub size: usize,
    /// Indices refer to the original cloud.
    #[serde(flatten)]
    pub diameter: DiameterWitness,
}

/// The region bounded by the eight slabs `|<x, u_i>| <= 1` (`i = 5..8`) and
/// `|<x, u_i> - 4 alpha_i| <= 1` (`i = 1..4`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlabRegion {
    pub normals: [[f64; 4]; 8],
    pub alphas: [f64; 4],
}

/// Even-parity normals `u_1..u_4` followed by odd-parity `u_5..u_8`.
pub const SLAB_NORMALS: [[f64; 4]; 8] = [
    [1.0, 1.0, 1.0, 1.0],
    [-1.0, -1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0, 1.0],
    [-1.0, 1.0, -1.0, 1.0],
    [1.0, 1.0, 1.0, -1.0],
    [-1.0, 1.0, 1.0, 1.0],
    [1.0, -1.0, 1.0, 1.0],
    [1.0, 1.0, -1.0, 1.0],
];

impl SlabRegion {
    pub fn new(alphas: [f64; 4]) -> Self {
        Self {
            normals: SLAB_NORMALS,
            alphas,
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        let fixed = self.normals[4..].iter().all(|u| dot(x, u).abs() <= 1.0 + tol);
        let shifted = self.normals[..4]
            .iter()
            .zip(&self.alphas)
            .all(|(u, a)| (dot(x, u) - 4.0 * a).abs() <= 1.0 + tol);
        fixed && shifted
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionResult {
    pub method: Method,
    pub labels: Vec<usize>,
    pub part_diameters: Vec<PartDiameter>,
    pub diameter: DiameterWitness,
    /// Largest part diameter over the cloud diameter; 0 for a zero-diameter cloud.
    pub ratio: f64,
    pub nonempty_parts: usize,
    pub label_space: usize,
    pub normalization: Normalization,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slab_region: Option<SlabRegion>,
    pub warnings: Vec<String>,
}

/// Dispatches on `p`: 1 to the cross-polytope construction, `(1, 2]` to
/// Hadamard cells, anything larger (including inf) to the orthant split.
pub fn partition(cloud: &PointCloud, nm: &PNorm) -> Result<PartitionResult> {
    if cloud.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: cloud.dim(),
        });
    }
    match Method::for_exponent(nm) {
        Method::Cube => partition_cube_case(cloud, nm),
        Method::HadamardCell => partition_hadamard_case(cloud, nm),
        Method::Crosspolytope => partition_crosspolytope_case(cloud, nm),
    }
}

fn group(labels: &[usize], space: usize) -> Vec<Vec<usize>> {
    let mut parts = vec![Vec::new(); space];
    for (i, &l) in labels.iter().enumerate() {
        parts[l].push(i);
    }
    parts
}

fn part_diameters(cloud: &PointCloud, nm: &PNorm, labels: &[usize], space: usize) -> Vec<PartDiameter> {
    group(labels, space)
        .into_iter()
        .enumerate()
        .filter(|(_, idx)| !idx.is_empty())
        .map(|(label, idx)| {
            let w = diameter(&cloud.select(&idx), nm);
            PartDiameter {
                label,
                size: idx.len(),
                diameter: DiameterWitness {
                    value: w.value,
                    index_a: idx[w.index_a],
                    index_b: idx[w.index_b],
                },
            }
        })
        .collect()
}

struct Draft {
    method: Method,
    labels: Vec<usize>,
    label_space: usize,
    normalization: Normalization,
    slab_region: Option<SlabRegion>,
    warnings: Vec<String>,
}

fn finish(cloud: &PointCloud, nm: &PNorm, whole: DiameterWitness, draft: Draft) -> PartitionResult {
    let parts = part_diameters(cloud, nm, &draft.labels, draft.label_space);
    let largest = parts.iter().map(|p| p.diameter.value).fold(0.0, f64::max);
    let ratio = if whole.value > 0.0 { largest / whole.value } else { 0.0 };
    PartitionResult {
        method: draft.method,
        nonempty_parts: parts.len(),
        labels: draft.labels,
        part_diameters: parts,
        diameter: whole,
        ratio,
        label_space: draft.label_space,
        normalization: draft.normalization,
        slab_region: draft.slab_region,
        warnings: draft.warnings,
    }
}

fn trivial(cloud: &PointCloud, nm: &PNorm, method: Method, space: usize, whole: DiameterWitness) -> PartitionResult {
    finish(
        cloud,
        nm,
        whole,
        Draft {
            method,
            labels: vec![0; cloud.len()],
            label_space: space,
            normalization: Normalization::identity(cloud.dim()),
            slab_region: None,
            warnings: Vec::new(),
        },
    )
}

// bit i set iff coordinate i is negative; zero goes to the positive side
fn sign_label(coords: impl Iterator<Item = f64>) -> usize {
    coords
        .enumerate()
        .fold(0, |acc, (i, v)| if v < 0.0 { acc | 1 << i } else { acc })
}

/// Orthant split of the centred bounding box; valid in any dimension
/// `n <= 10` with `p > log2 n`. Each part has diameter at most
/// `n^(1/p) / 2` times the cloud diameter.
pub fn partition_cube_case(cloud: &PointCloud, nm: &PNorm) -> Result<PartitionResult> {
    let n = cloud.dim();
    if n > MAX_CUBE_DIM {
        return Err(Error::SizeGuard {
            what: "dimension",
            value: n,
            limit: MAX_CUBE_DIM,
        });
    }
    if nm.p() <= (n as f64).log2() {
        return Err(Error::Regime(format!(
            "the orthant split needs p > log2 n = {}, got p = {nm}",
            (n as f64).log2()
        )));
    }
    let space = 1usize << n;
    let whole = diameter(cloud, nm);
    if whole.value == 0.0 {
        return Ok(trivial(cloud, nm, Method::Cube, space, whole));
    }
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for x in cloud.points() {
        for i in 0..n {
            lo[i] = lo[i].min(x[i]);
            hi[i] = hi[i].max(x[i]);
        }
    }
    let tau = (0..n).map(|i| 0.5 * (hi[i] - lo[i])).fold(0.0, f64::max);
    let scale = 1.0 / tau;
    let translation: Vec<f64> = (0..n).map(|i| -0.5 * (lo[i] + hi[i]) * scale).collect();
    let labels = cloud
        .points()
        .map(|x| sign_label(x.iter().zip(&translation).map(|(v, t)| scale * v + t)))
        .collect();
    Ok(finish(
        cloud,
        nm,
        whole,
        Draft {
            method: Method::Cube,
            labels,
            label_space: space,
            normalization: Normalization { scale, translation },
            slab_region: None,
            warnings: Vec::new(),
        },
    ))
}

/// Columns of `4^(-1/p) H_4`.
pub fn cell_directions(nm: &PNorm) -> [[f64; 4]; 4] {
    let h = fixed_h4();
    let c = 4f64.powf(-1.0 / nm.p());
    let mut u = [[0.0; 4]; 4];
    for (i, ui) in u.iter_mut().enumerate() {
        for (r, v) in ui.iter_mut().enumerate() {
            *v = c * f64::from(h.get(r, i));
        }
    }
    u
}

fn check_dim4(cloud: &PointCloud) -> Result<()> {
    if cloud.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: cloud.dim(),
        });
    }
    Ok(())
}

/// Splits the centred parallelotope `Q = g C_4`, `g = 4^(-1/p) H_4`, into
/// its 16 half-size cells; requires `1 < p <= 2`.
pub fn partition_hadamard_case(cloud: &PointCloud, nm: &PNorm) -> Result<PartitionResult> {
    check_dim4(cloud)?;
    let p = match nm.exponent() {
        Exponent::Finite(p) if p > 1.0 && p <= 2.0 => p,
        _ => {
            return Err(Error::Regime(format!(
                "the cell construction needs 1 < p <= 2, got p = {nm}"
            )))
        }
    };
    let whole = diameter(cloud, nm);
    if whole.value == 0.0 {
        return Ok(trivial(cloud, nm, Method::HadamardCell, LABEL_SPACE, whole));
    }
    let scale = 2.0 / whole.value;
    let zero = [0.0; 4];
    let scaled = cloud.transformed(scale, &zero);
    let u = cell_directions(nm);
    let mut mids = [0.0; 4];
    for (m, ui) in mids.iter_mut().zip(&u) {
        *m = width_functional(&scaled, ui)?.mid;
    }
    // solve <t, u_i> = -mid_i: t = -4^(1/p - 1) H mid
    let h = fixed_h4();
    let k = 4f64.powf(1.0 / p - 1.0);
    let translation: Vec<f64> = (0..4)
        .map(|r| -k * (0..4).map(|i| f64::from(h.get(r, i)) * mids[i]).sum::<f64>())
        .collect();

    let half_width = 4f64.powf(1.0 - 2.0 / p);
    let cell_scale = 1.0 / half_width;
    let mut worst = 0.0f64;
    let labels = scaled
        .points()
        .map(|y| {
            let z: Vec<f64> = y.iter().zip(&translation).map(|(a, b)| a + b).collect();
            let f: Vec<f64> = u.iter().map(|ui| dot(&z, ui)).collect();
            worst = f.iter().fold(worst, |w, v| w.max(v.abs()));
            sign_label(f.iter().map(|v| v * cell_scale))
        })
        .collect();
    let mut warnings = Vec::new();
    if worst > half_width * (1.0 + GEOM_TOL) {
        warnings.push(format!(
            "normalized cloud leaves the parallelotope: max |<x,u_i>| = {worst}, bound {half_width}"
        ));
    }
    Ok(finish(
        cloud,
        nm,
        whole,
        Draft {
            method: Method::HadamardCell,
            labels,
            label_space: LABEL_SPACE,
            normalization: Normalization { scale, translation },
            slab_region: None,
            warnings,
        },
    ))
}

/// Label of the first spike slot; spike `+i` is `SPIKE_BASE + i - 1`, spike
/// `-i` is `SPIKE_BASE + 4 + i - 1`.
pub const SPIKE_BASE: usize = 8;

/// Cross-polytope pieces and spikes for `p = 1`.
///
/// Labels 0..8 are the pieces `3/4 C_(4,1) + y_j` with `y_j = e_j / 4` then
/// `-e_j / 4`; a point of the unit ball takes the lowest-index piece that
/// contains it. Points outside the ball go to the spike of the even-parity
/// functional with the largest absolute value.
pub fn partition_crosspolytope_case(cloud: &PointCloud, nm: &PNorm) -> Result<PartitionResult> {
    check_dim4(cloud)?;
    if !nm.is(1.0) {
        return Err(Error::Regime(format!(
            "the cross-polytope construction needs p = 1, got p = {nm}"
        )));
    }
    let whole = diameter(cloud, nm);
    if whole.value == 0.0 {
        return Ok(trivial(cloud, nm, Method::Crosspolytope, LABEL_SPACE, whole));
    }
    let scale = 2.0 / whole.value;
    let scaled = cloud.transformed(scale, &[0.0; 4]);
    let mut mids = [0.0; 4];
    for (m, u) in mids.iter_mut().zip(&SLAB_NORMALS[4..]) {
        *m = width_functional(&scaled, u)?.mid;
    }
    // rows u_5..u_8 are orthogonal with squared length 4: t = -U^T mid / 4
    let translation: Vec<f64> = (0..4)
        .map(|r| -0.25 * (0..4).map(|j| SLAB_NORMALS[4 + j][r] * mids[j]).sum::<f64>())
        .collect();
    let normalized = cloud.transformed(scale, &translation);

    let mut warnings = Vec::new();
    let mut alphas = [0.0; 4];
    for (i, a) in alphas.iter_mut().enumerate() {
        let mid = width_functional(&normalized, &SLAB_NORMALS[i])?.mid;
        // the slab Σ_i + α u_i is centred at <x, u_i> = 4 α
        let raw = 0.25 * mid;
        *a = raw.clamp(-0.25, 0.25);
        if *a != raw {
            warnings.push(format!("alpha_{} = {raw} clamped to {}", i + 1, *a));
        }
    }
    let region = SlabRegion::new(alphas);

    let unit = PNorm::new(1.0).expect("p = 1 is valid");
    let centers = axis_centers(4, &unit);
    let mut labels = Vec::with_capacity(cloud.len());
    for (index, z) in normalized.points().enumerate() {
        let piece = if unit.norm(z) <= 1.0 + GEOM_TOL {
            centers.iter().position(|c| unit.distance(z, c) <= 0.75 + GEOM_TOL)
        } else {
            None
        };
        let label =
            match piece {
                Some(j) => j,
                None => {
                    let (best, value) = SLAB_NORMALS[..4].iter().map(|u| dot(z, u)).enumerate().fold(
                        (0, 0.0f64),
                        |(bi, bv), (i, v)| if v.abs() > bv.abs() { (i, v) } else { (bi, bv) },
                    );
                    if value.abs() <= 1.0 {
                        return Err(Error::Unassignable {
                            index,
                            excess: value.abs(),
                        });
                    }
                    SPIKE_BASE + best + if value < 0.0 { 4 } else { 0 }
                }
            };
        labels.push(label);
    }
    for i in 0..4 {
        let plus = labels.contains(&(SPIKE_BASE + i));
        let minus = labels.contains(&(SPIKE_BASE + 4 + i));
        if plus && minus {
            warnings.push(format!("opposite spikes +{0} and -{0} are both occupied", i + 1));
        }
    }
    if let Some(i) = normalized.points().position(|z| !region.contains(z, GEOM_TOL)) {
        warnings.push(format!("normalized point {i} lies outside the slab region"));
    }
    Ok(finish(
        cloud,
        nm,
        whole,
        Draft {
            method: Method::Crosspolytope,
            labels,
            label_space: LABEL_SPACE,
            normalization: Normalization { scale, translation },
            slab_region: Some(region),
            warnings,
        },
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    /// Ratio below `1 - STRICT_TOL`, or a zero-diameter cloud.
    pub valid: bool,
    pub ratio: f64,
    pub original_diameter: f64,
    pub max_part_diameter: f64,
    pub nonempty_parts: usize,
    /// Recomputed part diameters agree bit-for-bit with the result's.
    pub matches_reported: bool,
}

/// Recomputes every part diameter and the cloud diameter from the labels alone.
pub fn verify_partition(cloud: &PointCloud, nm: &PNorm, result: &PartitionResult) -> Result<VerifyReport> {
    if result.labels.len() != cloud.len() {
        return Err(Error::LabelCount {
            labels: result.labels.len(),
            points: cloud.len(),
        });
    }
    let limit = result.label_space;
    if let Some((index, &label)) = result.labels.iter().enumerate().find(|(_, &l)| l >= limit) {
        return Err(Error::LabelOutOfRange { index, label, limit });
    }
    let original = diameter(cloud, nm).value;
    let mut largest = 0.0f64;
    let mut recomputed = Vec::new();
    for (label, idx) in group(&result.labels, limit).into_iter().enumerate() {
        if idx.is_empty() {
            continue;
        }
        let d = diameter(&cloud.select(&idx), nm).value;
        largest = largest.max(d);
        recomputed.push((label, d));
    }
    let ratio = if original > 0.0 { largest / original } else { 0.0 };
    let matches_reported = recomputed.len() == result.part_diameters.len()
        && recomputed
            .iter()
            .zip(&result.part_diameters)
            .all(|((l, d), p)| *l == p.label && d.to_bits() == p.diameter.value.to_bits());
    Ok(VerifyReport {
        valid: original == 0.0 || ratio < 1.0 - STRICT_TOL,
        ratio,
        original_diameter: original,
        max_part_diameter: largest,
        nonempty_parts: recomputed.len(),
        matches_reported,
    })
}
