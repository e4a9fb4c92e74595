//! Library results against naive independent computations.

use borsuk::covering::{axis_cover_spec, verify_covering};
use borsuk::hadamard::{build_g, LinearMap};
use borsuk::lpcore::{sample_ball, PNorm, PointCloud};
use borsuk::partition::partition;
use borsuk::sandwich::{bm_upper_certificate, dual_feasibility};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn lp(x: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        x.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else {
        x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

fn naive_vertex_max(rows: &[Vec<f64>], p: f64) -> f64 {
    let n = rows.len();
    (0..1u32 << n)
        .map(|mask| {
            let image: Vec<f64> = rows
                .iter()
                .map(|r| (0..n).map(|j| if mask >> j & 1 == 1 { -r[j] } else { r[j] }).sum())
                .collect();
            lp(&image, p)
        })
        .fold(0.0, f64::max)
}

// Gauss-Jordan with partial pivoting
fn naive_inverse(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut a: Vec<Vec<f64>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
        a.swap(c, piv);
        let d = a[c][c];
        a[c].iter_mut().for_each(|v| *v /= d);
        for r in 0..n {
            if r != c {
                let f = a[r][c];
                let pivot_row = a[c].clone();
                a[r].iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
            }
        }
    }
    a.into_iter().map(|r| r[n..].to_vec()).collect()
}

fn matrix(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-2.0f64..2.0, n), n).prop_filter("well conditioned", |rows| {
        let inv = naive_inverse(rows);
        inv.iter().flatten().all(|v| v.is_finite() && v.abs() < 1e3)
    })
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), 1.0f64..4.0, Just(2.0), Just(f64::INFINITY)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn certificate_matches_naive_enumeration(rows in (1usize..7).prop_flat_map(matrix), p in exponent()) {
        let g = LinearMap::from_rows(&rows).unwrap();
        let nm = PNorm::new(p).unwrap();
        let cert = bm_upper_certificate(&g, &nm).unwrap();
        let naive = naive_vertex_max(&rows, p);
        prop_assert!((cert.r - naive).abs() <= 1e-12 * naive.max(1.0), "{} vs {}", cert.r, naive);
        let v: Vec<f64> = cert.argmax_vertex.iter().map(|&s| f64::from(s)).collect();
        prop_assert!((lp(&g.apply(&v), p) - cert.r).abs() <= 1e-12 * naive.max(1.0));
    }

    #[test]
    fn dual_margin_matches_naive_inverse(rows in (1usize..7).prop_flat_map(matrix), p in exponent()) {
        let g = LinearMap::from_rows(&rows).unwrap();
        let nm = PNorm::new(p).unwrap();
        let q = nm.q();
        let naive = naive_inverse(&rows).iter().map(|r| lp(r, q)).fold(0.0, f64::max);
        let got = dual_feasibility(&g, &nm).unwrap();
        prop_assert!((got - naive).abs() <= 1e-9 * naive.max(1.0), "{} vs {}", got, naive);
    }

    #[test]
    fn covering_holds_pointwise(n in 2usize..6, p in 1.0f64..=2.0, seed in any::<u64>()) {
        let nm = PNorm::new(p).unwrap();
        let spec = axis_cover_spec(n, &nm).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..500 {
            let x = sample_ball(&mut rng, n, &nm);
            let best = spec
                .centers
                .iter()
                .map(|c| lp(&x.iter().zip(c).map(|(a, b)| a - b).collect::<Vec<_>>(), p))
                .fold(f64::INFINITY, f64::min);
            prop_assert!(best <= spec.lambda + 1e-9, "{x:?}: {best} > {}", spec.lambda);
        }
    }

    #[test]
    fn partition_parts_shrink_by_naive_diameter(seed in any::<u64>(), size in 2usize..120,
                                                p in prop_oneof![Just(1.0), 1.01f64..=2.0, 2.01f64..6.0, Just(f64::INFINITY)]) {
        let nm = PNorm::new(p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Vec<f64>> = (0..size).map(|_| sample_ball(&mut rng, 4, &nm)).collect();
        let cloud = PointCloud::from_points(4, &pts).unwrap();
        let result = partition(&cloud, &nm).unwrap();
        let diam = |idx: &[usize]| {
            let mut d = 0.0f64;
            for &a in idx {
                for &b in idx {
                    let diff: Vec<f64> = pts[a].iter().zip(&pts[b]).map(|(x, y)| x - y).collect();
                    d = d.max(lp(&diff, p));
                }
            }
            d
        };
        let whole = diam(&(0..size).collect::<Vec<_>>());
        let mut labels = result.labels.clone();
        labels.sort_unstable();
        labels.dedup();
        prop_assert!(labels.len() <= 16);
        for l in labels {
            let part: Vec<usize> = (0..size).filter(|&i| result.labels[i] == l).collect();
            prop_assert!(diam(&part) < whole * (1.0 - 1e-12), "label {l}");
        }
    }
}

#[test]
fn p2_hadamard_certificate_matches_naive() {
    let nm = PNorm::new(2.0).unwrap();
    for n in [2, 3, 4, 5, 8] {
        let g = build_g(n, &nm).unwrap();
        let cert = bm_upper_certificate(&g, &nm).unwrap();
        assert!((cert.r - naive_vertex_max(&g.rows(), 2.0)).abs() < 1e-12);
    }
}

#[test]
fn covering_verifier_agrees_with_pointwise_failure() {
    let nm = PNorm::new(1.0).unwrap();
    let spec = axis_cover_spec(4, &nm).unwrap();
    let report = verify_covering(&spec.with_lambda(0.74), 10_000, 0);
    assert!(!report.covered);
    let w = &report.witness;
    let best = spec
        .centers
        .iter()
        .map(|c| lp(&w.iter().zip(c).map(|(a, b)| a - b).collect::<Vec<_>>(), 1.0))
        .fold(f64::INFINITY, f64::min);
    assert!((0.74 - best - report.worst_margin).abs() < 1e-12);
    assert!(lp(w, 1.0) <= 1.0 + 1e-12);
}
