use mforge_core::lattice::{abs_determinant, kernel_basis, smith_normal_form, sublattice_index, IntMatrix, LatticeIndex};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = IntMatrix> {
    prop::collection::vec(-5i64..=5, rows * cols).prop_map(move |v| {
        let rows_data: Vec<Vec<i64>> = v.chunks(cols).map(<[i64]>::to_vec).collect();
        IntMatrix::from_rows(&rows_data)
    })
}

fn det3(a: &[[i64; 3]; 3]) -> i64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// Adjugate: `adj(A)·A = det(A)·1`.
fn adjugate(a: &[[i64; 3]; 3]) -> [[i64; 3]; 3] {
    let mut adj = [[0; 3]; 3];
    for (i, row) in adj.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            *entry = a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
        }
    }
    adj
}

/// Counts residues `p ∈ [0, D)³` lying in the column lattice of `a`, `D = |det a|`.
fn brute_force_index(a: &[[i64; 3]; 3]) -> i64 {
    let det = det3(a);
    let d = det.abs();
    let adj = adjugate(a);
    let mut inside = 0i64;
    for x in 0..d {
        for y in 0..d {
            for z in 0..d {
                let p = [x, y, z];
                let integral = (0..3).all(|i| (0..3).map(|k| adj[i][k] * p[k]).sum::<i64>() % det == 0);
                inside += i64::from(integral);
            }
        }
    }
    d * d * d / inside
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn smith_form_invariants(rows in 1usize..=4, cols in 1usize..=4, seed in prop::collection::vec(-5i64..=5, 16)) {
        let data: Vec<Vec<i64>> = seed.chunks(4).take(rows).map(|c| c[..cols].to_vec()).collect();
        let a = IntMatrix::from_rows(&data);
        let snf = smith_normal_form(&a);
        prop_assert_eq!(snf.u.mul(&a).unwrap().mul(&snf.v).unwrap(), snf.s.clone());
        prop_assert!(abs_determinant(&snf.u).unwrap().is_one());
        prop_assert!(abs_determinant(&snf.v).unwrap().is_one());
        for i in 0..rows {
            for j in 0..cols {
                if i != j {
                    prop_assert!(snf.s[(i, j)].is_zero());
                }
            }
        }
        let d = snf.invariant_factors();
        for w in d.windows(2) {
            prop_assert!(!w[0].is_negative());
            if w[0].is_zero() {
                prop_assert!(w[1].is_zero());
            } else {
                prop_assert!((&w[1] % &w[0]).is_zero());
            }
        }
    }

    #[test]
    fn kernel_spans_all_integer_solutions(a in matrix(2, 4)) {
        let k = kernel_basis(&a);
        prop_assert!(a.mul(&k).unwrap().is_zero());
        let kf = nalgebra::DMatrix::from_row_slice(k.rows(), k.cols(), &k.to_f64());
        // every solution in a small box is an integer combination of the basis
        for code in 0..7i64.pow(4) {
            let x: Vec<i64> = (0..4).map(|r| (code / 7i64.pow(r)) % 7 - 3).collect();
            let ax = a.mul(&IntMatrix::from_columns(4, &[&x])).unwrap();
            if !ax.is_zero() {
                continue;
            }
            prop_assert!(k.cols() > 0);
            let xs = nalgebra::DVector::from_iterator(4, x.iter().map(|&v| v as f64));
            let c = kf.clone().svd(true, true).solve(&xs, 1e-12).unwrap();
            let rounded: Vec<i64> = c.iter().map(|v| v.round() as i64).collect();
            let back = k.mul(&IntMatrix::from_columns(k.cols(), &[rounded])).unwrap();
            prop_assert_eq!(back, IntMatrix::from_columns(4, &[x]));
        }
    }

    #[test]
    fn index_matches_point_count(v in prop::collection::vec(-5i64..=5, 9)) {
        let a = [[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]];
        let m = IntMatrix::from_rows(&a);
        let det = det3(&a);
        match sublattice_index(&m) {
            LatticeIndex::Infinite => prop_assert_eq!(det, 0),
            LatticeIndex::Finite(index) => {
                prop_assert_eq!(index.to_i64().unwrap(), det.abs());
                prop_assume!(det.abs() <= 40);
                prop_assert_eq!(brute_force_index(&a), det.abs());
            }
        }
    }

    #[test]
    fn index_of_spanning_sets(a in matrix(2, 3)) {
        // the index of n × k generators is the product of invariant factors
        let snf = smith_normal_form(&a);
        let expected: Option<BigInt> = (snf.rank() == 2).then(|| snf.invariant_factors().into_iter().product());
        prop_assert_eq!(sublattice_index(&a).finite().cloned(), expected);
    }
}

#[test]
fn brute_force_oracle_on_known_lattices() {
    assert_eq!(brute_force_index(&[[2, 0, 0], [0, 3, 0], [0, 0, 1]]), 6);
    assert_eq!(brute_force_index(&[[1, 1, 0], [1, -1, 0], [0, 0, 1]]), 2);
}
