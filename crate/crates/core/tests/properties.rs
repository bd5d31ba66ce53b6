use num_bigint::BigInt;
use num_traits::{One, Signed};
use proptest::prelude::*;

use latkit::catalog;
use latkit::isometry::{self, Isometry, IsometrySpec};
use latkit::json::JsonRational;
use latkit::lattice::hermite_inequality;
use latkit::linalg::{det_exact, hermite_normal_form, int_rat, invert, rat, smith_normal_form, RationalMatrix};
use latkit::{pair_sum, Lattice};

fn square(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-4i64..=4, n), n)
}

fn nonsingular(max: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1..=max)
        .prop_flat_map(square)
        .prop_filter("nonsingular", |rows| det_exact(&RationalMatrix::from_i64(rows)).is_ok_and(|d| d != rat(0)))
}

/// Integer unimodular matrix from a word in elementary row operations.
fn unimodular(n: usize, ops: &[(usize, usize, i64)]) -> RationalMatrix {
    let mut m = RationalMatrix::identity(n);
    for &(i, j, q) in ops {
        let (i, j) = (i % n, j % n);
        if i == j {
            continue;
        }
        for c in 0..n {
            let v = m[(i, c)].clone() + rat(q) * m[(j, c)].clone();
            m.set(i, c, v);
        }
    }
    m
}

fn ops() -> impl Strategy<Value = Vec<(usize, usize, i64)>> {
    prop::collection::vec((0usize..8, 0usize..8, -2i64..=2), 0..12)
}

fn catalog_name() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["Z3", "A2", "A3", "D4", "A4", "D5", "A2+A1", "Z2+Z(3)", "A2(x)A2"])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn smith_product_is_abs_det(rows in nonsingular(5)) {
        let a = RationalMatrix::from_i64(&rows);
        let s = smith_normal_form(&a).unwrap();
        let product: BigInt = s.invariants.iter().product();
        prop_assert_eq!(int_rat(&product), det_exact(&a).unwrap().abs());
        prop_assert!(s.invariants.windows(2).all(|w| (&w[1] % &w[0]) == BigInt::from(0)));
        prop_assert_eq!(&(&s.left * &a) * &s.right, s.diagonal_matrix());
        prop_assert!(det_exact(&s.left).unwrap().abs().is_one());
        prop_assert!(det_exact(&s.right).unwrap().abs().is_one());
    }

    #[test]
    fn hnf_is_idempotent_and_basis_invariant(rows in nonsingular(4), word in ops()) {
        let a = RationalMatrix::from_i64(&rows);
        let h = hermite_normal_form(&a);
        prop_assert_eq!(hermite_normal_form(&h), h.clone());
        let u = unimodular(a.rows(), &word);
        prop_assert_eq!(hermite_normal_form(&(&u * &a)), h);
    }

    #[test]
    fn inverse_is_two_sided(rows in nonsingular(5)) {
        let a = RationalMatrix::from_i64(&rows);
        let inv = invert(&a).unwrap();
        let id = RationalMatrix::identity(a.rows());
        prop_assert_eq!(&a * &inv, id.clone());
        prop_assert_eq!(&inv * &a, id);
    }

    #[test]
    fn dual_determinant_is_reciprocal(rows in nonsingular(4)) {
        let l = Lattice::new(RationalMatrix::from_i64(&rows)).unwrap();
        let d = l.dual().unwrap();
        prop_assert_eq!(d.determinant() * l.determinant(), rat(1));
        prop_assert_eq!(l.discriminant_group().unwrap().order(), l.determinant().to_integer());
    }

    #[test]
    fn even_sublattice_has_index_at_most_two(rows in nonsingular(4)) {
        let l = Lattice::new(RationalMatrix::from_i64(&rows)).unwrap();
        let e = l.even_sublattice().unwrap();
        prop_assert!(e.is_even());
        let idx = l.index_of(&e).unwrap();
        prop_assert_eq!(idx.clone(), BigInt::from(if l.is_even() { 1 } else { 2 }));
        prop_assert_eq!(e.determinant(), l.determinant() * int_rat(&(&idx * &idx)));
    }

    #[test]
    fn hermite_bound_holds(rows in nonsingular(4)) {
        let l = Lattice::new(RationalMatrix::from_i64(&rows)).unwrap();
        let mu = l.minimal_vectors().unwrap().norm;
        prop_assert!(hermite_inequality(&mu, &l.determinant(), l.rank()));
        prop_assert!(l.hermite_check().unwrap());
    }

    #[test]
    fn change_of_basis_keeps_invariants(name in catalog_name(), word in ops()) {
        let l = catalog::parse(name).unwrap();
        let u = unimodular(l.rank(), &word);
        let m = l.sublattice(&u).unwrap();
        prop_assert!(m.same_as(&l));
        prop_assert_eq!(m.determinant(), l.determinant());
        let (a, b) = (l.minimal_vectors().unwrap(), m.minimal_vectors().unwrap());
        prop_assert_eq!(a.norm, b.norm);
        prop_assert_eq!(a.vectors.len(), b.vectors.len());
        prop_assert_eq!(
            smith_normal_form(l.gram()).unwrap().invariants,
            smith_normal_form(m.gram()).unwrap().invariants
        );
    }

    #[test]
    fn random_pair_sums_are_even_with_index_identity(name in catalog_name(), steps in 1usize..6, seed in any::<u64>()) {
        use rand::SeedableRng;
        let l = catalog::parse(name).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let h = isometry::random_isometry(&l, steps, &mut rng).unwrap();
        let ps = pair_sum(&l, &h).unwrap();
        prop_assert!(ps.k.rank() >= l.rank() && ps.k.rank() <= 2 * l.rank());
        prop_assert!(ps.k.is_integral());
        if l.is_integral() {
            prop_assert!(ps.k.is_even());
        }
        let sat = ps.ambient.saturation_of(&ps.k).unwrap();
        let idx = int_rat(&ps.index_in_ambient);
        prop_assert_eq!(ps.k.determinant(), &idx * &idx * sat.determinant());
    }

    #[test]
    fn rational_json_round_trips(p in -1000i64..1000, q in 1i64..50) {
        let x = JsonRational(latkit::linalg::ratio(p, q));
        let text = serde_json::to_string(&x).unwrap();
        prop_assert_eq!(serde_json::from_str::<JsonRational>(&text).unwrap(), x);
    }
}

#[test]
fn isometry_spec_round_trips() {
    let specs = [
        IsometrySpec::perm(&[&[1, 2], &[3, 4]]),
        IsometrySpec::signed(&[-2, 1, 3, 4]),
        IsometrySpec::negated(IsometrySpec::perm(&[&[1, 2, 3]])),
        IsometrySpec::RootReflection { root: vec![1, 0, 0, 0] },
    ];
    let d4 = catalog::root_d(4);
    for s in specs {
        let text = serde_json::to_string(&s).unwrap();
        let back: IsometrySpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        Isometry::from_spec(&d4, &back).unwrap();
    }
}

#[test]
fn signed_images_accept_wrapped_form() {
    let a: IsometrySpec = serde_json::from_str(r#"{"kind":"signed","images":[[-2],[1],[3],[4]]}"#).unwrap();
    let b: IsometrySpec = serde_json::from_str(r#"{"kind":"signed","images":[-2,1,3,4]}"#).unwrap();
    assert_eq!(a, b);
}
