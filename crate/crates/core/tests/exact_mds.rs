//! The generator's any-k-rows property checked in exact rational arithmetic.

use hiercode_core::mds_codec::{k_subsets, make_generator, CodeParams};
use num::{BigInt, BigRational, Signed, ToPrimitive, Zero};

fn exact_entry(k: usize, row: usize, col: usize) -> BigRational {
    if row < k {
        return BigRational::from_integer(BigInt::from((row == col) as i64));
    }
    let r = (row - k) as i64;
    let (k, l) = (k as i64, col as i64);
    BigRational::new(BigInt::from(k - l), BigInt::from(k + r - l))
}

fn determinant(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    let mut det = BigRational::from_integer(BigInt::from(1));
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        let pivot = m[c][c].clone();
        det *= &pivot;
        for r in c + 1..n {
            if m[r][c].is_zero() {
                continue;
            }
            let f = &m[r][c] / &pivot;
            for j in c..n {
                let d = &f * &m[c][j];
                m[r][j] -= d;
            }
        }
    }
    det
}

#[test]
fn float_entries_match_exact_values() {
    for (n, k) in [(3, 2), (14, 10), (40, 20)] {
        let g = make_generator(CodeParams::new(n, k).unwrap());
        for row in 0..n {
            for col in 0..k {
                let exact = exact_entry(k, row, col).to_f64().unwrap();
                assert_eq!(g.coefficient(row, col), exact, "({n},{k}) entry ({row},{col})");
            }
        }
    }
}

#[test]
fn every_square_submatrix_is_nonsingular() {
    for (n, k) in [(3, 2), (6, 3), (14, 10)] {
        for ids in k_subsets(n, k) {
            let m = ids.iter().map(|&r| (0..k).map(|c| exact_entry(k, r, c)).collect()).collect();
            assert!(!determinant(m).is_zero(), "({n},{k}) rows {ids:?} singular");
        }
    }
}

#[test]
fn determinant_oracle_sanity() {
    let q = |a: i64| BigRational::from_integer(BigInt::from(a));
    assert_eq!(determinant(vec![vec![q(2), q(1)], vec![q(4), q(2)]]), q(0));
    assert_eq!(determinant(vec![vec![q(0), q(1)], vec![q(1), q(0)]]), q(-1));
    assert!(determinant(vec![vec![q(3)]]).is_positive());
}
