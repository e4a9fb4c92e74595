//! Rational evaluation of sandwich certificates for block maps built from
//! scaled Hadamard blocks when `p` is 1, 2 or infinity.
//!
//! For `p in {1, 2}` the block scale `c = n^(-1/p)` satisfies `c^p = 1/n`,
//! so `r^p` and `dual^q` are rationals computed from integer sums alone.

use num_rational::Ratio;

use crate::hadamard::{Block, LinearMap, SignMatrix};
use crate::lpcore::{Exponent, PNorm};

pub type Rational = Ratio<i128>;

/// `r_power = r^k` and `dual_power = dual^m` for the exponents recorded alongside.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactCertificate {
    pub r_power: Rational,
    pub r_exponent: u32,
    pub dual_power: Rational,
    pub dual_exponent: u32,
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    One,
    Two,
    Infinity,
}

fn kind(nm: &PNorm) -> Option<Kind> {
    match nm.exponent() {
        Exponent::Infinite => Some(Kind::Infinity),
        Exponent::Finite(1.0) => Some(Kind::One),
        Exponent::Finite(2.0) => Some(Kind::Two),
        _ => None,
    }
}

/// Max over sign vectors of `sum |Hv|` (One), `sum (Hv)^2` (Two) or `max |Hv|` (Infinity).
fn max_vertex_value(h: &SignMatrix, kind: Kind) -> i128 {
    let n = h.order();
    let mut best = 0i128;
    // v and -v give the same value; fix the last sign to +1
    for mask in 0u64..1u64 << (n - 1) {
        let mut acc = 0i128;
        for r in 0..n {
            let row = h.row(r);
            let mut s = 0i128;
            for (c, &e) in row.iter().enumerate() {
                let v = if c < n - 1 && mask >> c & 1 == 1 { -1 } else { 1 };
                s += i128::from(e) * v;
            }
            acc = match kind {
                Kind::One => acc + s.abs(),
                Kind::Two => acc + s * s,
                Kind::Infinity => acc.max(s.abs()),
            };
        }
        best = best.max(acc);
    }
    best
}

/// Exact certificate of a block-structured map, or `None` when the map has
/// no block description, `p` is not 1, 2 or inf, or a block was scaled for
/// a different `p`.
pub fn exact_certificate(g: &LinearMap, nm: &PNorm) -> Option<ExactCertificate> {
    let kind = kind(nm)?;
    let blocks = g.blocks()?;
    let one = Rational::from_integer(1);
    let mut r = Rational::from_integer(0);
    let mut dual = Rational::from_integer(0);
    for block in blocks {
        let (block_r, block_dual) = match block {
            Block::Identity(len) => {
                let len = *len as i128;
                match kind {
                    Kind::Infinity => (one, Rational::from_integer(1)),
                    _ => (Rational::from_integer(len), one),
                }
            }
            Block::ScaledSign { signs, root } => {
                if *root != nm.exponent() {
                    return None;
                }
                let order = signs.order() as i128;
                let m = max_vertex_value(signs, kind);
                match kind {
                    // c = 1/n; inverse entries 1/(c n)
                    Kind::One => {
                        let c = Rational::new(1, order);
                        (c * m, (c * order).recip())
                    }
                    // c^2 = 1/n; squared row norm of the inverse n / (c^2 n^2)
                    Kind::Two => {
                        let c2 = Rational::new(1, order);
                        (c2 * m, Rational::from_integer(order) / (c2 * order * order))
                    }
                    // c = 1; row 1-norm of the inverse n / n
                    Kind::Infinity => (Rational::from_integer(m), Rational::from_integer(order) / order),
                }
            }
        };
        r = match kind {
            Kind::Infinity => r.max(block_r),
            _ => r + block_r,
        };
        dual = dual.max(block_dual);
    }
    let (r_exponent, dual_exponent) = match kind {
        Kind::One => (1, 1),
        Kind::Two => (2, 2),
        Kind::Infinity => (1, 1),
    };
    Some(ExactCertificate {
        r_power: r,
        r_exponent,
        dual_power: dual,
        dual_exponent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hadamard::{build_g, fixed_h4, sylvester};

    fn nm(p: f64) -> PNorm {
        PNorm::new(p).unwrap()
    }

    #[test]
    fn sqrt_n_bound_is_exact_at_p2() {
        // r^2 = n exactly and the dual margin is exactly 1
        for k in 1..=4 {
            let n = 1usize << k;
            let cert = exact_certificate(&build_g(n, &nm(2.0)).unwrap(), &nm(2.0)).unwrap();
            assert_eq!(cert.r_power, Rational::from_integer(n as i128));
            assert_eq!(cert.dual_power, Rational::from_integer(1));
        }
    }

    #[test]
    fn p1_certificates_respect_sqrt_n() {
        for k in 1..=4 {
            let n = 1i128 << k;
            let cert = exact_certificate(&build_g(n as usize, &nm(1.0)).unwrap(), &nm(1.0)).unwrap();
            // r <= sqrt(n)  <=>  r^2 <= n
            assert!(cert.r_power * cert.r_power <= Rational::from_integer(n));
            assert_eq!(cert.dual_power, Rational::from_integer(1));
        }
        // n = 4: max ||H v||_1 = 8, so r = 2 = sqrt(4)
        let cert = exact_certificate(&build_g(4, &nm(1.0)).unwrap(), &nm(1.0)).unwrap();
        assert_eq!(cert.r_power, Rational::from_integer(2));
    }

    #[test]
    fn mixed_blocks_sum() {
        // n = 3, p = 2: block H_2 / sqrt 2 contributes 4/2, identity contributes 1
        let cert = exact_certificate(&build_g(3, &nm(2.0)).unwrap(), &nm(2.0)).unwrap();
        assert_eq!(cert.r_power, Rational::from_integer(3));
        // n = 3, p = 1: (1/2) * 2 + 1
        let cert = exact_certificate(&build_g(3, &nm(1.0)).unwrap(), &nm(1.0)).unwrap();
        assert_eq!(cert.r_power, Rational::from_integer(2));
    }

    #[test]
    fn fixed_matrix_and_infinity() {
        let g = LinearMap::from_blocks(vec![Block::ScaledSign {
            signs: fixed_h4(),
            root: Exponent::Finite(1.0),
        }]);
        let cert = exact_certificate(&g, &nm(1.0)).unwrap();
        assert_eq!(cert.r_power, Rational::from_integer(2));

        let g = LinearMap::from_blocks(vec![Block::ScaledSign {
            signs: sylvester(3).unwrap(),
            root: Exponent::Infinite,
        }]);
        let cert = exact_certificate(&g, &PNorm::infinity()).unwrap();
        assert_eq!(cert.r_power, Rational::from_integer(8));
        assert_eq!(cert.dual_power, Rational::from_integer(1));
    }

    #[test]
    fn unsupported_inputs() {
        assert!(exact_certificate(&build_g(4, &nm(1.5)).unwrap(), &nm(1.5)).is_none());
        // scaled for p = 1, asked about p = 2
        assert!(exact_certificate(&build_g(4, &nm(1.0)).unwrap(), &nm(2.0)).is_none());
        let general = LinearMap::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(exact_certificate(&general, &nm(1.0)).is_none());
    }
}
