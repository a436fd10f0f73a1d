use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::field::PrimeField;
use super::matrix::Matrix;
use super::{mix_seed, InterpError};
use crate::expected::{vdim_p1p1, Bidegree};
use crate::schemes::OmegaSpec;

/// Interpolation matrix of bidegree `bd` through random points of the
/// multiplicities in `om`. Points are drawn in the affine chart `(u, v)`
/// with distinct coordinates pairs; columns are `u^i v^j`, `i <= a`,
/// `j <= b`, and a point of multiplicity `mu` contributes the `C(mu+1, 2)`
/// derivative functionals of order `< mu`.
pub fn p1p1_matrix(
    bd: Bidegree,
    om: &OmegaSpec,
    field: PrimeField,
    seed: u64,
) -> Result<Matrix, InterpError> {
    if !bd.is_valid() {
        return Err(InterpError::InvalidBidegree { a: bd.a, b: bd.b });
    }
    om.check().map_err(InterpError::InvalidOmega)?;
    let (a, b) = (bd.a as u64, bd.b as u64);
    if field.p() <= a.max(b) {
        return Err(InterpError::FieldTooSmall { p: field.p(), d: a.max(b) });
    }
    let mults = om.multiplicities();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut pts = Vec::with_capacity(mults.len());
    while pts.len() < mults.len() {
        let pt = (rng.gen_range(0..field.p()), rng.gen_range(0..field.p()));
        if seen.insert(pt) {
            pts.push(pt);
        }
    }
    let cols = ((a + 1) * (b + 1)) as usize;
    let mut m = Matrix::zeros(field, 0, cols);
    let mut row = vec![0u64; cols];
    for (&mu, &(u, v)) in mults.iter().zip(&pts) {
        let upw: Vec<u64> = (0..=a).map(|e| field.pow(u, e)).collect();
        let vpw: Vec<u64> = (0..=b).map(|e| field.pow(v, e)).collect();
        for ord in 0..mu {
            for s in 0..=ord {
                let t = ord - s;
                for i in 0..=a {
                    for j in 0..=b {
                        let c = (i * (b + 1) + j) as usize;
                        row[c] = if i < s || j < t {
                            0
                        } else {
                            let cu = field.mul(field.falling(i, s), upw[(i - s) as usize]);
                            let cv = field.mul(field.falling(j, t), vpw[(j - t) as usize]);
                            field.mul(cu, cv)
                        };
                    }
                }
                m.push_row(&row);
            }
        }
    }
    Ok(m)
}

/// `h^0` of the system: the minimum of `cols - rank` over `retries` random
/// point configurations (random points only over-estimate it).
pub fn p1p1_h0(
    bd: Bidegree,
    om: &OmegaSpec,
    field: PrimeField,
    seed: u64,
    retries: u32,
) -> Result<u64, InterpError> {
    let mut best = u64::MAX;
    for attempt in 0..retries.max(1) {
        let m = p1p1_matrix(bd, om, field, mix_seed(&[seed, attempt as u64]))?;
        let h0 = (m.cols() - m.rank()) as u64;
        best = best.min(h0);
        if best as i64 == vdim_p1p1(bd, om).max(0) {
            break;
        }
    }
    Ok(best)
}

/// Rank-oracle speciality: `h^0` exceeds `max(0, vdim)`.
pub fn p1p1_special(
    bd: Bidegree,
    om: &OmegaSpec,
    field: PrimeField,
    seed: u64,
    retries: u32,
) -> Result<bool, InterpError> {
    let h0 = p1p1_h0(bd, om, field, seed, retries)?;
    Ok(h0 as i64 > vdim_p1p1(bd, om).max(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expected::lenarcik_special;

    fn f() -> PrimeField {
        PrimeField::default()
    }

    #[test]
    fn one_double_point() {
        let m = p1p1_matrix(Bidegree::new(1, 1), &OmegaSpec::new(0, 1, 0, 0), f(), 0).unwrap();
        assert_eq!((m.rows(), m.cols(), m.rank()), (3, 4, 3));
    }

    #[test]
    fn lenarcik_first_case() {
        let bd = Bidegree::new(0, 5);
        let om = OmegaSpec::new(2, 1, 0, 0);
        let m = p1p1_matrix(bd, &om, f(), 0).unwrap();
        assert!(m.rank() <= 4);
        assert!(p1p1_special(bd, &om, f(), 0, 3).unwrap());
        assert!(lenarcik_special(bd, 1, 2));
    }

    #[test]
    fn two_triple_points_full_rank() {
        let bd = Bidegree::new(3, 12);
        let om = OmegaSpec::new(40, 0, 2, 3);
        let m = p1p1_matrix(bd, &om, f(), 0).unwrap();
        assert_eq!((m.rows(), m.cols()), (52, 52));
        assert_eq!(m.rank(), 52);
    }

    #[test]
    fn odd_doubles_on_a2() {
        // (2, 2) with three double points is special
        let bd = Bidegree::new(2, 2);
        let om = OmegaSpec::new(0, 3, 0, 0);
        assert!(p1p1_special(bd, &om, f(), 1, 3).unwrap());
        assert!(lenarcik_special(bd, 3, 0));
    }

    #[test]
    fn bad_inputs() {
        assert!(p1p1_matrix(Bidegree::new(-1, 2), &OmegaSpec::default(), f(), 0).is_err());
    }
}
