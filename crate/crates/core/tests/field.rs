use cdc_core::gf2::{vandermonde, ExtElement, ExtField};

/// Polynomial product modulo `modulus`, bit by bit.
fn slow_mul(a: u32, b: u32, modulus: u32, degree: u32) -> u32 {
    let mut acc = 0u32;
    let mut a = a;
    for i in 0..degree {
        if (b >> i) & 1 == 1 {
            acc ^= a;
        }
        a <<= 1;
        if (a >> degree) & 1 == 1 {
            a ^= modulus;
        }
    }
    acc
}

#[test]
fn axioms_hold_for_every_triple_up_to_degree_8() {
    for degree in 1..=8 {
        let f = ExtField::new(degree).unwrap();
        let order = f.order() as u32;
        let e = |v: u32| ExtElement(v);
        let mut table = vec![0u32; (order * order) as usize];
        for a in 0..order {
            for b in 0..order {
                let p = f.mul(e(a), e(b)).0;
                assert_eq!(p, slow_mul(a, b, f.modulus(), degree));
                table[(a * order + b) as usize] = p;
            }
        }
        let mul = |a: u32, b: u32| table[(a * order + b) as usize];
        for a in 0..order {
            assert_eq!(mul(a, 1), a);
            assert_eq!(mul(a, 0), 0);
            assert_eq!(f.add(e(a), e(a)), ExtElement::ZERO);
            if a != 0 {
                let inv = f.inverse(e(a)).unwrap().0;
                assert_eq!(mul(a, inv), 1);
            }
            for b in 0..order {
                assert_eq!(mul(a, b), mul(b, a));
                for c in 0..order {
                    assert_eq!(mul(mul(a, b), c), mul(a, mul(b, c)), "degree {degree}");
                    assert_eq!(mul(a, b ^ c), mul(a, b) ^ mul(a, c), "degree {degree}");
                }
            }
        }
        assert_eq!(f.inverse(ExtElement::ZERO), None);
    }
}

#[test]
fn multiplicative_group_is_cyclic_of_order_q_minus_1() {
    for degree in 1..=8 {
        let f = ExtField::new(degree).unwrap();
        let n = f.order() as u64 - 1;
        for a in f.nonzero_elements() {
            assert_eq!(f.pow(a, n), ExtElement::ONE);
        }
    }
}

/// Determinant by summing over permutations; in characteristic 2 the
/// signs vanish.
fn leibniz(f: &ExtField, m: &[Vec<ExtElement>]) -> ExtElement {
    fn go(f: &ExtField, m: &[Vec<ExtElement>], row: usize, used: &mut Vec<bool>, acc: ExtElement) -> ExtElement {
        if row == m.len() {
            return acc;
        }
        let mut sum = ExtElement::ZERO;
        for col in 0..m.len() {
            if !used[col] && !m[row][col].is_zero() {
                used[col] = true;
                sum = f.add(sum, go(f, m, row + 1, used, f.mul(acc, m[row][col])));
                used[col] = false;
            }
        }
        sum
    }
    go(f, m, 0, &mut vec![false; m.len()], ExtElement::ONE)
}

fn column_subsets(m: usize, n: usize) -> Vec<Vec<usize>> {
    (0u32..1 << m)
        .filter(|mask| mask.count_ones() as usize == n)
        .map(|mask| (0..m).filter(|j| mask >> j & 1 == 1).collect())
        .collect()
}

#[test]
fn every_square_vandermonde_submatrix_is_invertible() {
    for m in 1..=8 {
        let f = ExtField::with_distinct_points(m).unwrap();
        assert!(f.order() > m);
        for n in 1..=m {
            let a = vandermonde(&f, m, n).unwrap();
            assert!(a[0].iter().all(|&x| x == ExtElement::ONE));
            for cols in column_subsets(m, n) {
                let sub: Vec<Vec<ExtElement>> = a.iter().map(|row| cols.iter().map(|&j| row[j]).collect()).collect();
                assert!(!leibniz(&f, &sub).is_zero(), "m={m} n={n} cols={cols:?}");
            }
        }
    }
}

#[test]
fn vandermonde_rejects_small_fields_and_tall_shapes() {
    let f = ExtField::new(2).unwrap();
    assert!(vandermonde(&f, 4, 2).is_err());
    assert!(vandermonde(&f, 3, 4).is_err());
    assert!(vandermonde(&f, 3, 3).is_ok());
}
