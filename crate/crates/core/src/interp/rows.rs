use rayon::prelude::*;

use super::field::PrimeField;
use super::geometry::{Chain, ConcreteScheme, Cross, LineFrame};
use super::matrix::Matrix;
use super::monomials::MonomialBasis;
use super::InterpError;

pub type Row = Vec<u64>;

fn transverse_degree(y: &[u16]) -> u64 {
    y[2..].iter().map(|&e| e as u64).sum()
}

/// Row labels of [`fat_line_rows`]: monomials `y^alpha` of degree `d` in
/// the frame coordinates with transverse degree (in `y2..yn`) below `m`.
pub fn fat_line_row_labels(n: usize, m: u64, d: u64) -> MonomialBasis {
    MonomialBasis::filtered(n + 1, d, |y| transverse_degree(y) < m)
}

fn check_fat(n: usize, frame: &LineFrame, m: u64, d: u64) -> Result<(), InterpError> {
    if frame.ambient() != n {
        return Err(InterpError::AmbientMismatch { frame: frame.ambient(), n });
    }
    if m > d {
        return Err(InterpError::MultiplicityExceedsDegree { m, d });
    }
    if frame.field().p() <= d {
        return Err(InterpError::FieldTooSmall { p: frame.field().p(), d });
    }
    Ok(())
}

/// Conditions for vanishing to order `m` along the frame's line.
///
/// Substituting `x = span * y` turns a degree-`d` form into a form in `y`;
/// one row per coefficient of a monomial of transverse degree `< m`. The
/// substitution is expanded one degree level at a time, truncating
/// transverse degree `>= m`, so only two levels live in memory.
pub fn fat_line_rows(frame: &LineFrame, m: u64, d: u64, n: usize) -> Result<Vec<Row>, InterpError> {
    check_fat(n, frame, m, d)?;
    if m == 0 {
        return Ok(vec![]);
    }
    let f = frame.field();
    let span = frame.span();
    let nv = n + 1;

    let mut cols_prev = MonomialBasis::new(nv, 0);
    let mut low_prev = fat_line_row_labels(n, m, 0);
    let mut prev: Vec<Vec<u64>> = vec![vec![1]];
    for e in 1..=d {
        let cols = MonomialBasis::new(nv, e);
        let low = fat_line_row_labels(n, m, e);
        let trans: Vec<Vec<Option<usize>>> = low_prev
            .iter()
            .map(|g| {
                (0..nv)
                    .map(|k| {
                        let mut h = g.clone();
                        h[k] += 1;
                        low.index_of(&h)
                    })
                    .collect()
            })
            .collect();
        let cur: Vec<Vec<u64>> = (0..cols.len())
            .into_par_iter()
            .map(|ci| {
                let beta = cols.get(ci);
                let i = beta.iter().position(|&x| x > 0).expect("positive degree");
                let mut parent = beta.to_vec();
                parent[i] -= 1;
                let poly = &prev[cols_prev.index_of(&parent).expect("parent monomial")];
                let mut out = vec![0u64; low.len()];
                for (g, &c) in poly.iter().enumerate() {
                    if c == 0 {
                        continue;
                    }
                    for (k, tgt) in trans[g].iter().enumerate() {
                        if let Some(t) = *tgt {
                            out[t] = f.add(out[t], f.mul(c, span.get(i, k)));
                        }
                    }
                }
                out
            })
            .collect();
        prev = cur;
        cols_prev = cols;
        low_prev = low;
    }
    Ok((0..low_prev.len())
        .map(|a| prev.iter().map(|poly| poly[a]).collect())
        .collect())
}

/// Alternative builder: every partial derivative of order `j < m` vanishes
/// at `d - j + 1` points of the line. Same row space as [`fat_line_rows`].
pub fn derivative_rows_oracle(
    frame: &LineFrame,
    m: u64,
    d: u64,
    n: usize,
) -> Result<Vec<Row>, InterpError> {
    check_fat(n, frame, m, d)?;
    let f = frame.field();
    let basis = MonomialBasis::new(n + 1, d);
    let mut rows = Vec::new();
    for j in 0..m {
        let pts: Vec<_> = (0..=d - j).map(|t| frame.point(t)).collect();
        for gamma in MonomialBasis::new(n + 1, j).iter() {
            for p in &pts {
                rows.push(derivative_row(f, p, gamma, &basis));
            }
        }
    }
    Ok(rows)
}

fn powers(f: PrimeField, p: &[u64], d: u64) -> Vec<Vec<u64>> {
    p.iter()
        .map(|&x| {
            let mut v = Vec::with_capacity(d as usize + 1);
            let mut acc = 1 % f.p();
            for _ in 0..=d {
                v.push(acc);
                acc = f.mul(acc, x);
            }
            v
        })
        .collect()
}

/// The functional `F -> (d^gamma F)(p)` on the given monomial basis.
pub fn derivative_row(f: PrimeField, p: &[u64], gamma: &[u16], basis: &MonomialBasis) -> Row {
    let pw = powers(f, p, basis.degree());
    basis
        .iter()
        .map(|beta| {
            let mut acc = 1 % f.p();
            for (i, (&b, &g)) in beta.iter().zip(gamma).enumerate() {
                if b < g {
                    return 0;
                }
                acc = f.mul(acc, f.falling(b as u64, g as u64));
                acc = f.mul(acc, pw[i][(b - g) as usize]);
            }
            acc
        })
        .collect()
}

/// Degree-`d` monomial evaluation at `p`.
pub fn point_row(f: PrimeField, p: &[u64], basis: &MonomialBasis) -> Row {
    derivative_row(f, p, &vec![0; p.len()], basis)
}

/// `F -> (sum_i v_i dF/dx_i)(p)`.
pub fn embedded_point_row(f: PrimeField, p: &[u64], v: &[u64], basis: &MonomialBasis) -> Row {
    let mut out = vec![0u64; basis.len()];
    for (i, &vi) in v.iter().enumerate() {
        if vi == 0 {
            continue;
        }
        let mut e = vec![0u16; p.len()];
        e[i] = 1;
        for (o, x) in out.iter_mut().zip(derivative_row(f, p, &e, basis)) {
            *o = f.add(*o, f.mul(vi, x));
        }
    }
    out
}

/// Evaluation at the `d + 1` sample points of a line, optionally leaving out
/// the frame's `b` point when another line already carries it.
pub fn line_rows(frame: &LineFrame, basis: &MonomialBasis, skip_b: bool) -> Vec<Row> {
    let f = frame.field();
    let mut pts = frame.sample_points(basis.degree());
    if skip_b {
        pts.pop();
    }
    pts.iter().map(|p| point_row(f, p, basis)).collect()
}

pub fn cross_rows(c: &Cross, basis: &MonomialBasis) -> Vec<Row> {
    let mut rows = line_rows(&c.first, basis, false);
    rows.extend(line_rows(&c.second, basis, true));
    rows
}

/// Rows of a chain's lines; shared singular points are evaluated once.
pub fn chain_line_rows(ch: &Chain, basis: &MonomialBasis) -> Vec<Row> {
    let mut rows = Vec::new();
    for (i, l) in ch.lines.iter().enumerate() {
        rows.extend(line_rows(l, basis, i > 0));
    }
    rows
}

/// One directional-derivative row per singular point of an embedded chain.
pub fn chain_embedded_rows(f: PrimeField, ch: &Chain, basis: &MonomialBasis) -> Vec<Row> {
    if !ch.embedded {
        return vec![];
    }
    ch.singular
        .iter()
        .zip(&ch.transverse)
        .map(|(s, v)| embedded_point_row(f, s, v, basis))
        .collect()
}

/// All condition rows of `c` in degree `d`, stacked in the order: fat line,
/// simple lines, crosses, chain lines, embedded rows, points.
pub fn build_matrix(c: &ConcreteScheme, d: u64) -> Result<Matrix, InterpError> {
    let f = c.field;
    if f.p() <= d {
        return Err(InterpError::FieldTooSmall { p: f.p(), d });
    }
    let basis = MonomialBasis::new(c.n + 1, d);
    let mut rows: Vec<Row> = Vec::new();
    if let Some((fr, m)) = &c.fat {
        rows.extend(fat_line_rows(fr, *m, d, c.n)?);
    }
    for l in &c.lines {
        rows.extend(line_rows(l, &basis, false));
    }
    for x in &c.crosses {
        rows.extend(cross_rows(x, &basis));
    }
    for ch in &c.chains {
        rows.extend(chain_line_rows(ch, &basis));
    }
    for ch in &c.chains {
        rows.extend(chain_embedded_rows(f, ch, &basis));
    }
    for p in &c.points {
        rows.push(point_row(f, p, &basis));
    }
    Ok(Matrix::from_rows(f, basis.len(), &rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expected::{conditions_fat_line, conditions_fat_line_p3};
    use crate::interp::geometry::{random_chain, random_cross, realize};
    use crate::schemes::SchemeSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn frame(n: usize, seed: u64) -> LineFrame {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        LineFrame::random(PrimeField::default(), n, &mut rng)
    }

    fn mat(rows: &[Row], cols: usize) -> Matrix {
        Matrix::from_rows(PrimeField::default(), cols, rows)
    }

    #[test]
    fn fat_row_counts() {
        let l = frame(3, 1);
        assert_eq!(fat_line_rows(&l, 1, 5, 3).unwrap().len(), 6);
        let rows = fat_line_rows(&l, 2, 6, 3).unwrap();
        assert_eq!(rows.len(), 19);
        assert_eq!(conditions_fat_line_p3(2, 6).unwrap(), 19);
        assert_eq!(mat(&rows, 84).rank(), 19);
        assert!(fat_line_rows(&l, 4, 3, 3).is_err());
    }

    #[test]
    fn fat_rows_vanish_on_fat_line() {
        // x-forms built from the cut coordinates: y2^2 lies in I_L^2
        let l = frame(3, 9);
        let f = PrimeField::default();
        let basis = MonomialBasis::new(4, 2);
        let y2: Vec<u64> = (0..4).map(|i| l.cut().get(2, i)).collect();
        let coeffs: Vec<u64> = basis
            .iter()
            .map(|e| {
                // coefficient of x^e in (sum_i y2_i x_i)^2
                let nz: Vec<usize> = (0..4).filter(|&i| e[i] > 0).collect();
                match nz[..] {
                    [i] => f.mul(y2[i], y2[i]),
                    [i, j] => f.mul(2, f.mul(y2[i], y2[j])),
                    _ => unreachable!(),
                }
            })
            .collect();
        for row in fat_line_rows(&l, 2, 2, 3).unwrap() {
            let v = row.iter().zip(&coeffs).fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)));
            assert_eq!(v, 0);
        }
    }

    #[test]
    fn row_count_identity_small() {
        for n in 3..=4 {
            for m in 1..=3 {
                for d in m..=5 {
                    let rows = fat_line_rows(&frame(n, d), m, d, n).unwrap();
                    assert_eq!(rows.len() as u64, conditions_fat_line(n as u64, m, d).unwrap());
                }
            }
        }
    }

    #[test]
    fn oracle_row_space_matches() {
        for (m, d) in [(1, 3), (2, 6), (3, 5)] {
            let l = frame(3, 7 + d);
            let cols = MonomialBasis::new(4, d).len();
            let a = mat(&fat_line_rows(&l, m, d, 3).unwrap(), cols);
            let b = mat(&derivative_rows_oracle(&l, m, d, 3).unwrap(), cols);
            let ra = a.rank();
            assert_eq!(ra as u64, conditions_fat_line_p3(m, d).unwrap());
            assert_eq!(b.rank(), ra);
            assert_eq!(a.stack(&b).rank(), ra);
        }
        assert_eq!(derivative_rows_oracle(&frame(3, 2), 1, 3, 3).unwrap().len(), 4);
    }

    #[test]
    fn point_row_examples() {
        let f = PrimeField::default();
        let b2 = MonomialBasis::new(4, 2);
        let r = point_row(f, &[1, 0, 0, 0], &b2);
        assert_eq!(r[0], 1);
        assert!(r[1..].iter().all(|&x| x == 0));
        assert_eq!(point_row(f, &[3, 4, 5, 6], &MonomialBasis::new(4, 0)), vec![1]);
    }

    #[test]
    fn embedded_row_example() {
        let f = PrimeField::default();
        let b1 = MonomialBasis::new(4, 1);
        let r = embedded_point_row(f, &[1, 1, 0, 0], &[0, 0, 1, 0], &b1);
        let x2 = b1.index_of(&[0, 0, 1, 0]).unwrap();
        assert_eq!(r[x2], 1);
        assert_eq!(r.iter().sum::<u64>(), 1);
    }

    #[test]
    fn generic_points_independent() {
        let f = PrimeField::default();
        let z = SchemeSpec::new(0, 0, 0, 12, 0);
        let c = realize(&z, 3, f, 4).unwrap();
        assert_eq!(build_matrix(&c, 2).unwrap().rank(), 10);
        assert_eq!(build_matrix(&c, 3).unwrap().rank(), 12);
    }

    #[test]
    fn cross_and_sundial() {
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in 1..5u64 {
            let basis = MonomialBasis::new(4, d);
            let c = random_cross(f, 3, &mut rng);
            let rows = cross_rows(&c, &basis);
            assert_eq!(mat(&rows, basis.len()).rank() as u64, 2 * d + 1);
            let sd = random_chain(f, 3, 2, true, &mut rng);
            let mut rows = chain_line_rows(&sd, &basis);
            rows.extend(chain_embedded_rows(f, &sd, &basis));
            assert_eq!(mat(&rows, basis.len()).rank() as u64, 2 * (d + 1));
        }
    }

    #[test]
    fn build_matrix_shapes() {
        let f = PrimeField::default();
        let m = build_matrix(&realize(&SchemeSpec::new(0, 0, 0, 1, 0), 3, f, 0).unwrap(), 2).unwrap();
        assert_eq!((m.rows(), m.cols()), (1, 10));
        let m = build_matrix(&realize(&SchemeSpec::new(1, 2, 0, 3, 0), 3, f, 0).unwrap(), 4).unwrap();
        assert_eq!((m.rows(), m.cols()), (18, 35));
        let m = build_matrix(&realize(&SchemeSpec::new(2, 9, 0, 2, 0), 3, f, 0).unwrap(), 6).unwrap();
        assert_eq!((m.rows(), m.cols()), (84, 84));
        assert_eq!(m.rank(), 84);
    }
}
