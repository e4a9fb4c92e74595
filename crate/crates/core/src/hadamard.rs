//! Sylvester Hadamard matrices and the block-diagonal linear maps built from them.

use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lpcore::{Exponent, PNorm};

/// Largest Sylvester exponent accepted; order 2^13 already needs 64 MiB.
pub const MAX_SYLVESTER_EXPONENT: u32 = 13;

/// Largest dimension for which `build_g` is offered.
pub const MAX_G_DIM: usize = 20;

/// Condition number above which a general inverse is flagged.
pub const ILL_CONDITIONED: f64 = 1e12;

/// A square matrix with entries in {-1, +1}.
#[derive(Clone, PartialEq, Eq)]
pub struct SignMatrix {
    order: usize,
    entries: Vec<i8>,
}

impl SignMatrix {
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let order = rows.len();
        if order == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut entries = Vec::with_capacity(order * order);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != order {
                return Err(Error::DimensionMismatch {
                    expected: order,
                    found: row.len(),
                });
            }
            for (c, &v) in row.iter().enumerate() {
                match v {
                    1 => entries.push(1),
                    -1 => entries.push(-1),
                    value => return Err(Error::NotSignEntry { row: r, col: c, value }),
                }
            }
        }
        Ok(Self { order, entries })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.entries[row * self.order + col]
    }

    pub fn row(&self, row: usize) -> &[i8] {
        &self.entries[row * self.order..(row + 1) * self.order]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        (0..self.order)
            .map(|r| self.row(r).iter().map(|&v| i64::from(v)).collect())
            .collect()
    }

    /// `M M^T = order * I`, checked in integer arithmetic.
    pub fn is_hadamard(&self) -> bool {
        let n = self.order as i64;
        (0..self.order).all(|i| {
            (i..self.order).all(|j| {
                let dot: i64 = self
                    .row(i)
                    .iter()
                    .zip(self.row(j))
                    .map(|(&a, &b)| i64::from(a) * i64::from(b))
                    .sum();
                dot == if i == j { n } else { 0 }
            })
        })
    }
}

impl fmt::Debug for SignMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SignMatrix")
            .field("order", &self.order)
            .field("rows", &self.rows())
            .finish()
    }
}

impl Serialize for SignMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

/// Checks raw integer rows: errors on any entry other than +-1.
pub fn is_hadamard(rows: &[Vec<i64>]) -> Result<bool> {
    Ok(SignMatrix::from_rows(rows)?.is_hadamard())
}

/// The Sylvester matrix of order `2^k`.
pub fn sylvester(k: u32) -> Result<SignMatrix> {
    if k > MAX_SYLVESTER_EXPONENT {
        return Err(Error::SizeGuard {
            what: "sylvester exponent",
            value: k as usize,
            limit: MAX_SYLVESTER_EXPONENT as usize,
        });
    }
    let order = 1usize << k;
    // entry (i, j) is (-1)^popcount(i & j)
    let entries = (0..order * order)
        .map(|idx| {
            let (i, j) = (idx / order, idx % order);
            if (i & j).count_ones() % 2 == 0 {
                1
            } else {
                -1
            }
        })
        .collect();
    Ok(SignMatrix { order, entries })
}

/// The 4x4 Hadamard matrix whose scaled columns give the cell directions of
/// the `1 < p <= 2` partition.
pub fn fixed_h4() -> SignMatrix {
    SignMatrix::from_rows(&[
        vec![1, -1, 1, 1],
        vec![1, 1, -1, 1],
        vec![1, 1, 1, -1],
        vec![-1, 1, 1, 1],
    ])
    .expect("constant sign matrix")
}

/// Registry data: an order-12 Hadamard matrix (Paley, q = 11). Not a
/// construction; provided so `build_g_4kj` can be exercised beyond powers of two.
pub fn registry_h12() -> SignMatrix {
    const ROWS: [[i64; 12]; 12] = [
        [1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1],
        [-1, 1, 1, -1, 1, 1, 1, -1, -1, -1, 1, -1],
        [-1, -1, 1, 1, -1, 1, 1, 1, -1, -1, -1, 1],
        [-1, 1, -1, 1, 1, -1, 1, 1, 1, -1, -1, -1],
        [-1, -1, 1, -1, 1, 1, -1, 1, 1, 1, -1, -1],
        [-1, -1, -1, 1, -1, 1, 1, -1, 1, 1, 1, -1],
        [-1, -1, -1, -1, 1, -1, 1, 1, -1, 1, 1, 1],
        [-1, 1, -1, -1, -1, 1, -1, 1, 1, -1, 1, 1],
        [-1, 1, 1, -1, -1, -1, 1, -1, 1, 1, -1, 1],
        [-1, 1, 1, 1, -1, -1, -1, 1, -1, 1, 1, -1],
        [-1, -1, 1, 1, 1, -1, -1, -1, 1, -1, 1, 1],
        [-1, 1, -1, 1, 1, 1, -1, -1, -1, 1, -1, 1],
    ];
    let rows: Vec<Vec<i64>> = ROWS.iter().map(|r| r.to_vec()).collect();
    SignMatrix::from_rows(&rows).expect("registry matrix is a sign matrix")
}

/// A Hadamard matrix of the given order from Sylvester or the registry.
pub fn hadamard_of_order(order: usize) -> Option<SignMatrix> {
    if order.is_power_of_two() {
        sylvester(order.trailing_zeros()).ok()
    } else if order == 12 {
        Some(registry_h12())
    } else {
        None
    }
}

/// One diagonal block of a structured map.
#[derive(Clone, Debug, PartialEq)]
pub enum Block {
    Identity(usize),
    /// `order^(-1/root) * signs`, with `signs` Hadamard.
    ScaledSign {
        signs: SignMatrix,
        root: Exponent,
    },
}

impl Block {
    pub fn len(&self) -> usize {
        match self {
            Block::Identity(n) => *n,
            Block::ScaledSign { signs, .. } => signs.order(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn scale(&self) -> f64 {
        match self {
            Block::Identity(_) => 1.0,
            Block::ScaledSign { signs, root } => (signs.order() as f64).powf(-root.reciprocal()),
        }
    }
}

/// An invertible `n x n` map with its inverse computed once.
#[derive(Clone, Debug)]
pub struct LinearMap {
    dim: usize,
    matrix: Vec<f64>,
    inverse: Vec<f64>,
    blocks: Option<Vec<Block>>,
    condition: f64,
}

impl LinearMap {
    pub fn identity(dim: usize) -> Self {
        Self::from_blocks(vec![Block::Identity(dim)])
    }

    /// Block-diagonal map; scaled Hadamard blocks are inverted in closed
    /// form, `(c H)^-1 = H^T / (c n)`.
    pub fn from_blocks(blocks: Vec<Block>) -> Self {
        let blocks: Vec<Block> = blocks.into_iter().filter(|b| !b.is_empty()).collect();
        let dim = blocks.iter().map(Block::len).sum();
        let mut matrix = vec![0.0; dim * dim];
        let mut inverse = vec![0.0; dim * dim];
        let mut offset = 0;
        for block in &blocks {
            match block {
                Block::Identity(len) => {
                    for i in offset..offset + len {
                        matrix[i * dim + i] = 1.0;
                        inverse[i * dim + i] = 1.0;
                    }
                }
                Block::ScaledSign { signs, .. } => {
                    let n = signs.order();
                    let c = block.scale();
                    let inv = 1.0 / (c * n as f64);
                    for i in 0..n {
                        for j in 0..n {
                            let s = f64::from(signs.get(i, j));
                            matrix[(offset + i) * dim + offset + j] = c * s;
                            inverse[(offset + j) * dim + offset + i] = inv * s;
                        }
                    }
                }
            }
            offset += block.len();
        }
        let mut map = Self {
            dim,
            matrix,
            inverse,
            blocks: Some(blocks),
            condition: 1.0,
        };
        map.condition = map.condition_estimate_l1();
        map
    }

    /// A general map from row-major entries, inverted by LU with partial pivoting.
    pub fn from_row_major(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: 0 });
        }
        let m = DMatrix::from_row_slice(dim, dim, &entries);
        let inv = m.clone().lu().try_inverse().ok_or(Error::Singular)?;
        if inv.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular);
        }
        // DMatrix is column-major; transpose to read rows in order
        let inverse = inv.transpose().as_slice().to_vec();
        let mut map = Self {
            dim,
            matrix: entries,
            inverse,
            blocks: None,
            condition: 1.0,
        };
        map.condition = map.condition_estimate_l1();
        Ok(map)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            entries.extend_from_slice(r);
        }
        Self::from_row_major(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * self.dim + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.matrix[row * self.dim..(row + 1) * self.dim]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.dim).map(|r| self.get(r, col)).collect()
    }

    pub fn inverse_row(&self, row: usize) -> &[f64] {
        &self.inverse[row * self.dim..(row + 1) * self.dim]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.matrix.chunks_exact(self.dim).map(<[f64]>::to_vec).collect()
    }

    pub fn inverse_rows(&self) -> Vec<Vec<f64>> {
        self.inverse.chunks_exact(self.dim).map(<[f64]>::to_vec).collect()
    }

    /// Exact block description, when the map was built from blocks.
    pub fn blocks(&self) -> Option<&[Block]> {
        self.blocks.as_deref()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.matrix
            .chunks_exact(self.dim)
            .map(|r| crate::lpcore::dot(r, v))
            .collect()
    }

    pub fn apply_inverse(&self, x: &[f64]) -> Vec<f64> {
        self.inverse
            .chunks_exact(self.dim)
            .map(|r| crate::lpcore::dot(r, x))
            .collect()
    }

    /// `c * g`; the inverse is rescaled by `1/c` and the block description dropped.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c != 0.0) {
            return Err(Error::Singular);
        }
        Ok(Self {
            dim: self.dim,
            matrix: self.matrix.iter().map(|v| v * c).collect(),
            inverse: self.inverse.iter().map(|v| v / c).collect(),
            blocks: None,
            condition: self.condition,
        })
    }

    /// `||g||_1 ||g^-1||_1`.
    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }

    pub fn is_ill_conditioned(&self) -> bool {
        self.condition > ILL_CONDITIONED
    }

    /// `max |g g^-1 - I|` over all entries.
    pub fn inverse_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let v: f64 = (0..n).map(|k| self.get(i, k) * self.inverse[k * n + j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }

    fn condition_estimate_l1(&self) -> f64 {
        let col_sum = |m: &[f64]| {
            (0..self.dim)
                .map(|j| (0..self.dim).map(|i| m[i * self.dim + j].abs()).sum::<f64>())
                .fold(0.0, f64::max)
        };
        col_sum(&self.matrix) * col_sum(&self.inverse)
    }
}

fn check_regime(nm: &PNorm) -> Result<()> {
    match nm.exponent() {
        Exponent::Finite(p) if (1.0..=2.0).contains(&p) => Ok(()),
        _ => Err(Error::Regime(format!(
            "the Hadamard constructions need 1 <= p <= 2, got p = {nm}"
        ))),
    }
}

/// `n^(-1/p) H_n` for powers of two; otherwise the block-diagonal map
/// `diag(2^(-k/p) H_(2^k), g_t)` with `2^k` the largest power of two `<= n`.
pub fn build_g(n: usize, nm: &PNorm) -> Result<LinearMap> {
    if n == 0 || n > MAX_G_DIM {
        return Err(Error::SizeGuard {
            what: "dimension",
            value: n,
            limit: MAX_G_DIM,
        });
    }
    check_regime(nm)?;
    let mut blocks = Vec::new();
    let mut rest = n;
    while rest > 0 {
        let k = usize::BITS - 1 - rest.leading_zeros();
        let head = 1usize << k;
        blocks.push(if head == 1 {
            Block::Identity(1)
        } else {
            Block::ScaledSign {
                signs: sylvester(k)?,
                root: nm.exponent(),
            }
        });
        rest -= head;
    }
    Ok(LinearMap::from_blocks(blocks))
}

/// `diag(I_j, (4k)^(-1/p) H_4k)` for a supplied Hadamard matrix of order `4k`.
pub fn build_g_4kj(k: usize, j: usize, nm: &PNorm, h: &SignMatrix) -> Result<LinearMap> {
    if k == 0 || j >= 4 {
        return Err(Error::Regime(format!(
            "need k >= 1 and 0 <= j < 4, got k = {k}, j = {j}"
        )));
    }
    if h.order() != 4 * k {
        return Err(Error::DimensionMismatch {
            expected: 4 * k,
            found: h.order(),
        });
    }
    if !h.is_hadamard() {
        return Err(Error::NotHadamard(h.order()));
    }
    check_regime(nm)?;
    Ok(LinearMap::from_blocks(vec![
        Block::Identity(j),
        Block::ScaledSign {
            signs: h.clone(),
            root: nm.exponent(),
        },
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nm(p: f64) -> PNorm {
        PNorm::new(p).unwrap()
    }

    #[test]
    fn sylvester_small_orders() {
        assert_eq!(sylvester(0).unwrap().rows(), vec![vec![1]]);
        assert_eq!(sylvester(1).unwrap().rows(), vec![vec![1, 1], vec![1, -1]]);
        let h4 = sylvester(2).unwrap();
        assert!(h4.is_hadamard());
        // recursive block form
        let h8 = sylvester(3).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let v = h4.get(i, j);
                assert_eq!(h8.get(i, j), v);
                assert_eq!(h8.get(i, j + 4), v);
                assert_eq!(h8.get(i + 4, j), v);
                assert_eq!(h8.get(i + 4, j + 4), -v);
            }
        }
    }

    #[test]
    fn sylvester_orthogonality_up_to_64() {
        for k in 0..=6 {
            assert!(sylvester(k).unwrap().is_hadamard(), "k = {k}");
        }
    }

    #[test]
    fn sylvester_size_guard() {
        assert!(matches!(
            sylvester(MAX_SYLVESTER_EXPONENT + 1),
            Err(Error::SizeGuard { .. })
        ));
    }

    #[test]
    fn is_hadamard_rejects() {
        assert!(!is_hadamard(&[vec![1, 1], vec![1, 1]]).unwrap());
        assert!(matches!(
            is_hadamard(&[vec![1, 0], vec![1, -1]]),
            Err(Error::NotSignEntry {
                row: 0,
                col: 1,
                value: 0
            })
        ));
    }

    #[test]
    fn fixed_h4_rows_and_columns() {
        let h = fixed_h4();
        assert_eq!(h.rows()[0], vec![1, -1, 1, 1]);
        let col0: Vec<i8> = (0..4).map(|r| h.get(r, 0)).collect();
        assert_eq!(col0, vec![1, 1, 1, -1]);
        assert!(h.is_hadamard());
    }

    #[test]
    fn registry_h12_is_hadamard() {
        assert!(registry_h12().is_hadamard());
        assert_eq!(hadamard_of_order(12).unwrap().order(), 12);
        assert!(hadamard_of_order(20).is_none());
    }

    #[test]
    fn build_g_power_of_two() {
        let g = build_g(4, &nm(1.0)).unwrap();
        let h = sylvester(2).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(g.get(i, j), 0.25 * f64::from(h.get(i, j)));
            }
        }
    }

    #[test]
    fn build_g_three_is_block_form() {
        for p in [1.0, 1.5, 2.0] {
            let g = build_g(3, &nm(p)).unwrap();
            let c = 2f64.powf(-1.0 / p);
            let expected = [[c, c, 0.0], [c, -c, 0.0], [0.0, 0.0, 1.0]];
            for (i, row) in expected.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    assert_eq!(g.get(i, j), *v);
                }
            }
        }
        assert_eq!(build_g(1, &nm(1.3)).unwrap().rows(), vec![vec![1.0]]);
    }

    #[test]
    fn build_g_inverse_is_closed_form() {
        for n in 1..=MAX_G_DIM {
            for p in [1.0, 1.25, 1.5, 2.0] {
                let g = build_g(n, &nm(p)).unwrap();
                assert!(g.inverse_residual() < 1e-12, "n = {n}, p = {p}");
            }
        }
        // (n^(-1/p) H)^-1 = n^(1/p - 1) H^T
        let p = 1.5;
        let g = build_g(8, &nm(p)).unwrap();
        let h = sylvester(3).unwrap();
        let c = 8f64.powf(1.0 / p - 1.0);
        for i in 0..8 {
            for j in 0..8 {
                let v = g.inverse_row(i)[j];
                assert!((v - c * f64::from(h.get(j, i))).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn build_g_leading_block_matches() {
        for n in [3, 5, 6, 7, 9, 12, 17] {
            let g = build_g(n, &nm(1.25)).unwrap();
            let head = 1usize << (usize::BITS - 1 - n.leading_zeros());
            let lead = build_g(head, &nm(1.25)).unwrap();
            for i in 0..head {
                for j in 0..head {
                    assert_eq!(g.get(i, j), lead.get(i, j));
                }
            }
            // the tail block is build_g of the remainder
            let tail = build_g(n - head, &nm(1.25)).unwrap();
            for i in 0..n - head {
                for j in 0..n - head {
                    assert_eq!(g.get(head + i, head + j), tail.get(i, j));
                }
            }
        }
    }

    #[test]
    fn build_g_guards() {
        assert!(build_g(0, &nm(1.0)).is_err());
        assert!(build_g(21, &nm(1.0)).is_err());
        assert!(matches!(build_g(4, &nm(2.5)), Err(Error::Regime(_))));
        assert!(matches!(build_g(4, &PNorm::infinity()), Err(Error::Regime(_))));
    }

    #[test]
    fn build_g_4kj_shapes() {
        let h4 = sylvester(2).unwrap();
        let g = build_g_4kj(1, 1, &nm(1.0), &h4).unwrap();
        assert_eq!(g.dim(), 5);
        assert_eq!(g.get(0, 0), 1.0);
        for i in 0..4 {
            assert_eq!(g.get(0, i + 1), 0.0);
            for j in 0..4 {
                assert_eq!(g.get(i + 1, j + 1), 0.25 * f64::from(h4.get(i, j)));
            }
        }
        let degenerate = build_g_4kj(1, 0, &nm(1.5), &h4).unwrap();
        assert_eq!(degenerate.rows(), build_g(4, &nm(1.5)).unwrap().rows());

        let not_h = SignMatrix::from_rows(&[vec![1; 4], vec![1; 4], vec![1; 4], vec![1; 4]]).unwrap();
        assert_eq!(build_g_4kj(1, 0, &nm(1.0), &not_h).unwrap_err(), Error::NotHadamard(4));
        assert!(build_g_4kj(2, 0, &nm(1.0), &h4).is_err());
        assert!(build_g_4kj(1, 4, &nm(1.0), &h4).is_err());
    }

    #[test]
    fn general_inverse_via_lu() {
        let g = LinearMap::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        assert!(g.inverse_residual() < 1e-14);
        assert!(!g.is_ill_conditioned());
        assert_eq!(
            LinearMap::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap_err(),
            Error::Singular
        );
        let nearly = LinearMap::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0 + 1e-14]]).unwrap();
        assert!(nearly.is_ill_conditioned());
    }
}
