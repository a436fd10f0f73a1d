use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use postlab::expected::{conditions_fat_line, hilbert_poly_pn, length_p3};
use postlab::interp::{
    build_matrix, derivative_rows_oracle, fat_line_rows, realize, residual_zigzag_check,
    verify_maximal_rank, LineFrame, Matrix, MonomialBasis, PrimeField, DEFAULT_PRIME,
    SECOND_PRIME,
};
use postlab::schemes::{canonicalize, SchemeSpec};

fn frame(n: usize, seed: u64) -> LineFrame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    LineFrame::random(PrimeField::default(), n, &mut rng)
}

#[test]
fn row_space_equivalence() {
    let f = PrimeField::default();
    for m in 1..=4u64 {
        for d in m..=10u64 {
            let l = frame(3, m * 31 + d);
            let cols = MonomialBasis::new(4, d).len();
            let a = Matrix::from_rows(f, cols, &fat_line_rows(&l, m, d, 3).unwrap());
            let b = Matrix::from_rows(f, cols, &derivative_rows_oracle(&l, m, d, 3).unwrap());
            let (ra, rb) = (a.rank(), b.rank());
            assert_eq!(ra as u64, conditions_fat_line(3, m, d).unwrap(), "m={m} d={d}");
            assert_eq!(ra, rb, "m={m} d={d}");
            assert_eq!(a.stack(&b).rank(), ra, "m={m} d={d}");
        }
    }
}

#[test]
fn fat_line_alone_is_independent_in_p4() {
    let f = PrimeField::default();
    for (m, d) in [(2, 4), (3, 5)] {
        let l = frame(4, d);
        let rows = fat_line_rows(&l, m, d, 4).unwrap();
        let cols = MonomialBasis::new(5, d).len();
        assert_eq!(Matrix::from_rows(f, cols, &rows).rank(), rows.len());
    }
}

#[test]
fn residual_zigzag_is_reduced_zigzag() {
    for p in [DEFAULT_PRIME, SECOND_PRIME] {
        let f = PrimeField::new(p).unwrap();
        for z in 2..=4u64 {
            for d in z + 2..=8 {
                let rep = residual_zigzag_check(z, d, f, z * 10 + d, 100).unwrap();
                assert_eq!(rep.kernel, rep.h0_reduced, "p={p} {rep:?}");
            }
        }
    }
}

fn arb_scheme() -> impl Strategy<Value = (SchemeSpec, u64)> {
    (0u64..3, 0u64..6, 0u64..3, 0u64..8, 0u64..4, 0u64..4).prop_map(|(m, r, s, q, z, extra)| {
        let z = canonicalize(SchemeSpec::new(m, r, s, q, z));
        (z, z.m.max(1) + extra)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rank_never_drops_when_rows_are_added((z, d) in arb_scheme(), seed in 0u64..1000) {
        let f = PrimeField::default();
        let c = realize(&z, 3, f, seed).unwrap();
        let m = build_matrix(&c, d).unwrap();
        let mut prefix = Matrix::zeros(f, 0, m.cols());
        let mut last = 0;
        for r in 0..m.rows() {
            prefix.push_row(m.row(r));
            let rank = prefix.rank();
            prop_assert!(rank >= last && rank <= last + 1);
            last = rank;
        }
        prop_assert!(last as u64 <= length_p3(d, &z).unwrap().min(hilbert_poly_pn(3, d)));
    }

    #[test]
    fn reports_are_deterministic((z, d) in arb_scheme(), seed in 0u64..1000) {
        let f = PrimeField::default();
        let a = verify_maximal_rank(&z, d, 3, f, seed, 2).unwrap();
        let b = verify_maximal_rank(&z, d, 3, f, seed, 2).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.rank <= a.rows.min(a.cols));
        prop_assert_eq!(a.certified(), a.rank == a.expected_rank);
    }
}
