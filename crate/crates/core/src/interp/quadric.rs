//! Checks that go through the smooth quadric `Q = x0 x3 - x1 x2`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::field::PrimeField;
use super::geometry::{chain_through, realize, ConcreteScheme, Point};
use super::matrix::Matrix;
use super::monomials::MonomialBasis;
use super::p1p1::p1p1_h0;
use super::rows::{build_matrix, chain_embedded_rows, chain_line_rows};
use super::{mix_seed, InterpError};
use crate::expected::{binomial, hilbert_poly_pn};
use crate::ledger::{residual, trace};
use crate::schemes::{SchemeSpec, SpecMove};

/// Value of `Q` at a point of P^3.
pub fn quadric_value(f: PrimeField, x: &[u64]) -> u64 {
    f.sub(f.mul(x[0], x[3]), f.mul(x[1], x[2]))
}

/// The Segre point `(s0 t0, s0 t1, s1 t0, s1 t1)` of `Q`.
pub fn segre(f: PrimeField, s: (u64, u64), t: (u64, u64)) -> Point {
    vec![f.mul(s.0, t.0), f.mul(s.0, t.1), f.mul(s.1, t.0), f.mul(s.1, t.1)]
}

/// `M . T_Q`: the conditions of `m` (degree `d`) pulled back along
/// multiplication by `Q` from degree `d - 2`.
pub fn compose_with_quadric(m: &Matrix, d: u64) -> Matrix {
    assert!(d >= 2);
    let f = m.field();
    let big = MonomialBasis::new(4, d);
    assert_eq!(big.len(), m.cols());
    let small = MonomialBasis::new(4, d - 2);
    let targets: Vec<(usize, usize)> = small
        .iter()
        .map(|g| {
            let mut p = g.clone();
            p[0] += 1;
            p[3] += 1;
            let mut q = g.clone();
            q[1] += 1;
            q[2] += 1;
            (big.index_of(&p).unwrap(), big.index_of(&q).unwrap())
        })
        .collect();
    let mut out = Matrix::zeros(f, 0, small.len());
    let mut row = vec![0u64; small.len()];
    for r in 0..m.rows() {
        let src = m.row(r);
        for (o, &(p, q)) in row.iter_mut().zip(&targets) {
            *o = f.sub(src[p], src[q]);
        }
        out.push_row(&row);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CastelnuovoReport {
    pub d: u64,
    pub scheme: SchemeSpec,
    #[serde(rename = "move")]
    pub mv: SpecMove,
    pub h0_scheme: u64,
    pub h0_residual: u64,
    pub h0_trace: u64,
    pub holds: bool,
}

/// Computes `h0(d; Z)`, `h0(d-2; Res)` and `h0_Q(d; Tr)` by rank and checks
/// `h0(d; Z) <= h0(d-2; Res) + h0_Q(d; Tr)`.
///
/// `Z` and the residual are realized in general position; the residual's
/// `h0` is read off as the kernel of its degree-`d` conditions composed
/// with multiplication by `Q`. The trace is realized on P^1 x P^1.
pub fn castelnuovo_check(
    z: &SchemeSpec,
    mv: &SpecMove,
    d: u64,
    field: PrimeField,
    seed: u64,
) -> Result<CastelnuovoReport, InterpError> {
    if d < 2 {
        return Err(InterpError::Scheme(format!("degree {d} < 2")));
    }
    let res = residual(z, mv).map_err(|e| InterpError::Scheme(e.to_string()))?;
    let tr = trace(z, mv, d).map_err(|e| InterpError::Scheme(e.to_string()))?;
    if res.m > d - 2 {
        return Err(InterpError::MultiplicityExceedsDegree { m: res.m, d: d - 2 });
    }

    let cz = realize(z, 3, field, mix_seed(&[seed, 1]))?;
    let mz = build_matrix(&cz, d)?;
    let h0_scheme = (mz.cols() - mz.into_rank()) as u64;

    let cr = realize(&res, 3, field, mix_seed(&[seed, 2]))?;
    let mr = compose_with_quadric(&build_matrix(&cr, d)?, d);
    let h0_residual = binomial(d + 1, 3) - mr.into_rank() as u64;

    let h0_trace = if tr.bidegree.is_valid() {
        p1p1_h0(tr.bidegree, &tr.omega, field, mix_seed(&[seed, 3]), 3)?
    } else {
        0
    };
    Ok(CastelnuovoReport {
        d,
        scheme: *z,
        mv: *mv,
        h0_scheme,
        h0_residual,
        h0_trace,
        holds: h0_scheme <= h0_residual + h0_trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualZigzagReport {
    pub z: u64,
    pub d: u64,
    /// `dim {G of degree d-2 : Q G vanishes on the zig-zag}`.
    pub kernel: u64,
    /// `h0(d-2)` of the reduced zig-zag.
    pub h0_reduced: u64,
}

/// Places a zig-zag of length `z` with its singular points on `Q` and no
/// line inside `Q`, and compares the residual kernel with the reduced
/// zig-zag's `h0` in degree `d - 2`.
pub fn residual_zigzag_check(
    z: u64,
    d: u64,
    field: PrimeField,
    seed: u64,
    redraws: u32,
) -> Result<ResidualZigzagReport, InterpError> {
    if z < 2 || d < 2 {
        return Err(InterpError::Scheme(format!("need z >= 2 and d >= 2, got z={z}, d={d}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |rng: &mut ChaCha8Rng| (rng.gen_range(1..field.p()), rng.gen_range(0..field.p()));
    for _ in 0..redraws.max(1) {
        let singular: Vec<Point> = (1..z)
            .map(|_| {
                let s = pick(&mut rng);
                let t = pick(&mut rng);
                segre(field, s, t)
            })
            .collect();
        let chain = chain_through(field, 3, singular, true, &mut rng);
        let off_quadric = chain.lines.iter().all(|l| {
            let mid: Point = l.a().iter().zip(l.b()).map(|(x, y)| field.add(*x, y)).collect();
            quadric_value(field, &mid) != 0
        });
        let mut c = ConcreteScheme::empty(field, 3);
        c.chains.push(chain);
        if !off_quadric || !c.is_generic() {
            continue;
        }
        let chain = &c.chains[0];
        let big = MonomialBasis::new(4, d);
        let mut rows = chain_line_rows(chain, &big);
        rows.extend(chain_embedded_rows(field, chain, &big));
        let m = Matrix::from_rows(field, big.len(), &rows);
        let kernel = hilbert_poly_pn(3, d - 2) - compose_with_quadric(&m, d).into_rank() as u64;

        let small = MonomialBasis::new(4, d - 2);
        let reduced = Matrix::from_rows(field, small.len(), &chain_line_rows(chain, &small));
        let h0_reduced = hilbert_poly_pn(3, d - 2) - reduced.into_rank() as u64;
        return Ok(ResidualZigzagReport { z, d, kernel, h0_reduced });
    }
    Err(InterpError::Degenerate { redraws })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segre_points_lie_on_q() {
        let f = PrimeField::default();
        assert_eq!(quadric_value(f, &segre(f, (3, 5), (7, 11))), 0);
        // ruling line through (1,0,s,0) and (0,1,0,s)
        let s = 9;
        for t in 0..5 {
            let p = vec![1, t, s, f.mul(s, t)];
            assert_eq!(quadric_value(f, &p), 0);
        }
    }

    #[test]
    fn multiplication_by_q_is_injective() {
        // no conditions at all: the composed matrix is empty, kernel is everything
        let f = PrimeField::default();
        let d = 4;
        let mut id = Matrix::zeros(f, 0, hilbert_poly_pn(3, d) as usize);
        let basis = MonomialBasis::new(4, d);
        for i in 0..basis.len() {
            let mut r = vec![0; basis.len()];
            r[i] = 1;
            id.push_row(&r);
        }
        assert_eq!(compose_with_quadric(&id, d).rank() as u64, hilbert_poly_pn(3, d - 2));
    }

    #[test]
    fn residual_zigzag_small() {
        let f = PrimeField::default();
        for z in 2..=3 {
            for d in z + 2..=6 {
                let rep = residual_zigzag_check(z, d, f, 5, 50).unwrap();
                assert_eq!(rep.kernel, rep.h0_reduced, "{rep:?}");
                let len = z * (d - 1) - (z - 1);
                assert_eq!(rep.h0_reduced, hilbert_poly_pn(3, d - 2).saturating_sub(len));
            }
        }
    }

    #[test]
    fn castelnuovo_example() {
        let f = PrimeField::default();
        let z = SchemeSpec::new(2, 9, 0, 2, 0);
        let mv = SpecMove::new(1, 3, 0, 0, 2, 0, 0);
        let rep = castelnuovo_check(&z, &mv, 6, f, 0).unwrap();
        assert_eq!(rep.h0_scheme, 0);
        assert!(rep.holds);
    }
}
