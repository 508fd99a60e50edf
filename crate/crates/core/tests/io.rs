mod common;

use common::*;
use geoprec::io::{read_matrix, read_polysys, write_matrix, write_polysys};
use geoprec::matrix::{ComplexMatrix, C64};
use geoprec::polysys::{bw_norm_system, local_condition, NormKind};
use proptest::prelude::*;

#[test]
fn example1_fixture() {
    let a = read_matrix(fixture("example1.mtx")).unwrap();
    assert!(a.is_sparse());
    assert_eq!(a.to_dense(), example1().to_dense());
}

#[test]
fn example2_fixture() {
    let (f, point) = read_polysys(fixture("example2.json")).unwrap();
    assert_eq!(f.max_degree(), 2);
    assert_eq!(point.as_deref(), Some(&[C64::new(0.0, 0.0); 2][..]));
    let want = example2();
    for (p, q) in f.polys().iter().zip(want.polys()) {
        assert_eq!(p.support(), q.support());
        for e in p.support() {
            assert_eq!(p.coeff(&e.0), q.coeff(&e.0));
        }
    }
    let mu = local_condition(&f, &point.unwrap(), NormKind::Operator).unwrap();
    assert!((mu - 3f64.sqrt()).abs() < 1e-12);
}

#[test]
fn polysys_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.json");
    let f = random_system(5, 3, 3, 3);
    let xi = random_nonzero_point(5, 3);
    write_polysys(&path, &f, Some(&xi)).unwrap();
    let (g, p) = read_polysys(&path).unwrap();
    assert_eq!(p.unwrap(), xi);
    assert_eq!(g.degrees(), f.degrees());
    assert_eq!(bw_norm_system(&g), bw_norm_system(&f));
}

#[test]
fn unknown_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.json");
    std::fs::write(&path, r#"{"nvars": 1, "degrees": [1], "polynomials": [[]], "extra": 0}"#).unwrap();
    assert!(read_polysys(&path).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn matrix_file_round_trip(seed in any::<u64>(), m in 1usize..8, n in 1usize..8, sparse in any::<bool>()) {
        let dense = complex_gaussian(seed, m, n);
        let a = if sparse {
            ComplexMatrix::from_dense(dense).to_sparse()
        } else {
            ComplexMatrix::from_dense(dense)
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.mtx");
        write_matrix(&path, &a).unwrap();
        let b = read_matrix(&path).unwrap();
        prop_assert_eq!(b.to_dense(), a.to_dense());
    }
}
