use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::field::PrimeField;
use super::matrix::Matrix;
use super::InterpError;
use crate::schemes::SchemeSpec;

/// Default bound on rejection-sampling redraws.
pub const DEFAULT_REDRAWS: u32 = 100;

pub type Point = Vec<u64>;

/// Coordinates adapted to a line. `cut` is invertible and its last `n-1`
/// rows cut the line; `span = cut^-1`, whose first two columns span it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineFrame {
    cut: Matrix,
    span: Matrix,
}

impl LineFrame {
    /// A frame whose line passes through `a` and `b`. The remaining columns
    /// of the span matrix are random. When `a` and `b` are proportional `b`
    /// is replaced by a random point; genericity checks then reject the
    /// configuration.
    pub fn through(field: PrimeField, a: &[u64], b: &[u64], rng: &mut ChaCha8Rng) -> Self {
        let dim = a.len();
        let mut b = b.to_vec();
        while span_rank(field, &[a, &b]) < 2 {
            b = random_point(field, dim - 1, rng);
        }
        loop {
            let mut span = Matrix::zeros(field, dim, dim);
            for i in 0..dim {
                span.set(i, 0, a[i]);
                span.set(i, 1, b[i]);
                for j in 2..dim {
                    span.set(i, j, rng.gen_range(0..field.p()));
                }
            }
            if let Some(cut) = span.inverse() {
                return Self { cut, span };
            }
        }
    }

    pub fn random(field: PrimeField, n: usize, rng: &mut ChaCha8Rng) -> Self {
        let a = random_point(field, n, rng);
        let b = random_point(field, n, rng);
        Self::through(field, &a, &b, rng)
    }

    pub fn field(&self) -> PrimeField {
        self.span.field()
    }

    /// Ambient dimension `n` of P^n.
    pub fn ambient(&self) -> usize {
        self.span.rows() - 1
    }

    pub fn cut(&self) -> &Matrix {
        &self.cut
    }

    pub fn span(&self) -> &Matrix {
        &self.span
    }

    /// First spanning point.
    pub fn a(&self) -> Point {
        (0..self.span.rows()).map(|i| self.span.get(i, 0)).collect()
    }

    /// Second spanning point.
    pub fn b(&self) -> Point {
        (0..self.span.rows()).map(|i| self.span.get(i, 1)).collect()
    }

    /// `a + t b`.
    pub fn point(&self, t: u64) -> Point {
        let f = self.field();
        (0..self.span.rows())
            .map(|i| f.add(self.span.get(i, 0), f.mul(t % f.p(), self.span.get(i, 1))))
            .collect()
    }

    /// `d + 1` distinct points: `a + t b` for `t < d`, then `b`.
    pub fn sample_points(&self, d: u64) -> Vec<Point> {
        let mut pts: Vec<Point> = (0..d).map(|t| self.point(t)).collect();
        pts.push(self.b());
        pts
    }
}

pub fn random_point(field: PrimeField, n: usize, rng: &mut ChaCha8Rng) -> Point {
    loop {
        let p: Point = (0..=n).map(|_| rng.gen_range(0..field.p())).collect();
        if p.iter().any(|&x| x != 0) {
            return p;
        }
    }
}

/// Rank of the span of a list of vectors.
pub fn span_rank(field: PrimeField, pts: &[&[u64]]) -> usize {
    if pts.is_empty() {
        return 0;
    }
    let rows: Vec<Vec<u64>> = pts.iter().map(|p| p.to_vec()).collect();
    Matrix::from_rows(field, rows[0].len(), &rows).rank()
}

/// Two lines through a common point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cross {
    pub first: LineFrame,
    pub second: LineFrame,
    pub point: Point,
}

/// Ordered lines, consecutive ones meeting at `singular[i]`, with a
/// transverse direction at each singular point. With `embedded` set the
/// chain carries the length-2 structure at its singular points (a zig-zag
/// in the flat-limit sense); otherwise it is the reduced union.
///
/// Each line's frame has `b` equal to the previous singular point and `a`
/// equal to the next one (or a free point at the ends).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub lines: Vec<LineFrame>,
    pub singular: Vec<Point>,
    pub transverse: Vec<Point>,
    pub embedded: bool,
}

/// A random realization of a scheme spec over F_p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteScheme {
    pub n: usize,
    pub field: PrimeField,
    pub fat: Option<(LineFrame, u64)>,
    pub lines: Vec<LineFrame>,
    pub crosses: Vec<Cross>,
    pub chains: Vec<Chain>,
    pub points: Vec<Point>,
}

/// Component counts, for structure checks and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Shape {
    pub fat_multiplicity: u64,
    pub lines: usize,
    pub crosses: usize,
    pub chain_lines: usize,
    pub singular_points: usize,
    pub points: usize,
}

impl ConcreteScheme {
    pub fn empty(field: PrimeField, n: usize) -> Self {
        Self {
            n,
            field,
            fat: None,
            lines: vec![],
            crosses: vec![],
            chains: vec![],
            points: vec![],
        }
    }

    pub fn shape(&self) -> Shape {
        Shape {
            fat_multiplicity: self.fat.as_ref().map_or(0, |(_, m)| *m),
            lines: self.lines.len(),
            crosses: self.crosses.len(),
            chain_lines: self.chains.iter().map(|c| c.lines.len()).sum(),
            singular_points: self.chains.iter().map(|c| c.singular.len()).sum(),
            points: self.points.len(),
        }
    }

    /// Checks the position constraints: lines of different components are
    /// disjoint, chain lines meet exactly when consecutive, crosses meet in
    /// their recorded point, transverse directions leave the local plane,
    /// and no point lies on a line.
    pub fn is_generic(&self) -> bool {
        let f = self.field;
        // (component id, position in component, frame)
        let mut all: Vec<(usize, usize, &LineFrame)> = Vec::new();
        let mut comp = 0;
        if let Some((fr, _)) = &self.fat {
            all.push((comp, 0, fr));
            comp += 1;
        }
        for l in &self.lines {
            all.push((comp, 0, l));
            comp += 1;
        }
        let first_cross = comp;
        for c in &self.crosses {
            all.push((comp, 0, &c.first));
            all.push((comp, 1, &c.second));
            comp += 1;
        }
        let first_chain = comp;
        for ch in &self.chains {
            for (i, l) in ch.lines.iter().enumerate() {
                all.push((comp, i, l));
            }
            comp += 1;
        }
        let ends: Vec<(Point, Point)> = all.iter().map(|(_, _, l)| (l.a(), l.b())).collect();
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                let (ci, pi, _) = all[i];
                let (cj, pj, _) = all[j];
                let meet = ci == cj
                    && ((ci >= first_cross && ci < first_chain)
                        || (ci >= first_chain && pj == pi + 1));
                let want = if meet { 3 } else { 4 };
                let r = span_rank(f, &[&ends[i].0, &ends[i].1, &ends[j].0, &ends[j].1]);
                if r != want {
                    return false;
                }
            }
        }
        for c in &self.crosses {
            let on = |l: &LineFrame| span_rank(f, &[&l.a(), &l.b(), &c.point]) == 2;
            if !on(&c.first) || !on(&c.second) {
                return false;
            }
        }
        for ch in &self.chains {
            for (i, v) in ch.transverse.iter().enumerate() {
                let (l1, l2) = (&ch.lines[i], &ch.lines[i + 1]);
                if span_rank(f, &[&l1.a(), &l1.b(), &l2.a(), v]) != 4 {
                    return false;
                }
            }
        }
        for p in &self.points {
            if p.iter().all(|&x| x == 0) {
                return false;
            }
            for e in &ends {
                if span_rank(f, &[&e.0, &e.1, p]) < 3 {
                    return false;
                }
            }
        }
        true
    }
}

/// A chain of `z` lines with `z - 1` singular points and transverse
/// directions.
pub fn random_chain(
    field: PrimeField,
    n: usize,
    z: usize,
    embedded: bool,
    rng: &mut ChaCha8Rng,
) -> Chain {
    let singular: Vec<Point> = (1..z).map(|_| random_point(field, n, rng)).collect();
    chain_through(field, n, singular, embedded, rng)
}

/// A chain whose singular points are the given ones; the free end points and
/// transverse directions are random.
pub fn chain_through(
    field: PrimeField,
    n: usize,
    singular: Vec<Point>,
    embedded: bool,
    rng: &mut ChaCha8Rng,
) -> Chain {
    let z = singular.len() + 1;
    let mut lines = Vec::with_capacity(z);
    for i in 0..z {
        let b = if i == 0 { random_point(field, n, rng) } else { singular[i - 1].clone() };
        let a = if i + 1 < z { singular[i].clone() } else { random_point(field, n, rng) };
        lines.push(LineFrame::through(field, &a, &b, rng));
    }
    let transverse = (1..z).map(|_| random_point(field, n, rng)).collect();
    Chain { lines, singular, transverse, embedded }
}

/// A cross: two lines with `b` equal to the common point.
pub fn random_cross(field: PrimeField, n: usize, rng: &mut ChaCha8Rng) -> Cross {
    let point = random_point(field, n, rng);
    let u = random_point(field, n, rng);
    let v = random_point(field, n, rng);
    Cross {
        first: LineFrame::through(field, &u, &point, rng),
        second: LineFrame::through(field, &v, &point, rng),
        point,
    }
}

/// Draws until `make` yields a generic configuration, at most `redraws`
/// times.
pub fn draw_generic(
    seed: u64,
    redraws: u32,
    mut make: impl FnMut(&mut ChaCha8Rng) -> ConcreteScheme,
) -> Result<ConcreteScheme, InterpError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..redraws.max(1) {
        let c = make(&mut rng);
        if c.is_generic() {
            return Ok(c);
        }
    }
    Err(InterpError::Degenerate { redraws })
}

/// Random realization of `z` in P^n; deterministic in `(z, n, p, seed)`.
pub fn realize(
    z: &SchemeSpec,
    n: usize,
    field: PrimeField,
    seed: u64,
) -> Result<ConcreteScheme, InterpError> {
    realize_with(z, n, field, seed, DEFAULT_REDRAWS)
}

pub fn realize_with(
    z: &SchemeSpec,
    n: usize,
    field: PrimeField,
    seed: u64,
    redraws: u32,
) -> Result<ConcreteScheme, InterpError> {
    if n < 3 {
        return Err(InterpError::AmbientTooSmall { n });
    }
    if !z.is_canonical() {
        return Err(InterpError::NonCanonical);
    }
    draw_generic(seed, redraws, |rng| {
        let mut c = ConcreteScheme::empty(field, n);
        if z.m > 0 {
            c.fat = Some((LineFrame::random(field, n, rng), z.m));
        }
        c.lines = (0..z.r).map(|_| LineFrame::random(field, n, rng)).collect();
        c.crosses = (0..z.s).map(|_| random_cross(field, n, rng)).collect();
        if z.z >= 2 {
            c.chains.push(random_chain(field, n, z.z as usize, false, rng));
        }
        c.points = (0..z.q).map(|_| random_point(field, n, rng)).collect();
        c
    })
}
