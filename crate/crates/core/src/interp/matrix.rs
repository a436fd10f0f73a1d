use std::io::{self, BufRead, Write};

use rayon::prelude::*;

use super::field::PrimeField;

/// Dense row-major matrix over a prime field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

// Below this many entries the elimination stays on one thread.
const PARALLEL_THRESHOLD: usize = 1 << 16;

impl Matrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self { field, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from rows of equal length. Entries are reduced.
    pub fn from_rows(field: PrimeField, cols: usize, rows: &[Vec<u64>]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged row");
            data.extend(r.iter().map(|&x| field.reduce(x)));
        }
        Self { field, rows: rows.len(), cols, data }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = self.field.reduce(v);
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn push_row(&mut self, row: &[u64]) {
        assert_eq!(row.len(), self.cols, "row length");
        self.data.extend(row.iter().map(|&x| self.field.reduce(x)));
        self.rows += 1;
    }

    /// Stacks `other` below `self`.
    pub fn stack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols);
        assert_eq!(self.field, other.field);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix { field: self.field, rows: self.rows + other.rows, cols: self.cols, data }
    }

    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows);
        let f = self.field;
        let mut out = Matrix::zeros(f, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    let idx = i * rhs.cols + j;
                    out.data[idx] = f.add(out.data[idx], f.mul(a, rhs.get(k, j)));
                }
            }
        }
        out
    }

    /// Matrix-vector product `self * v`.
    pub fn apply(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.cols);
        let f = self.field;
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
            })
            .collect()
    }

    /// Exact rank by Gaussian elimination. The receiver is left untouched.
    pub fn rank(&self) -> usize {
        self.clone().into_rank()
    }

    /// Rank by in-place elimination.
    pub fn into_rank(mut self) -> usize {
        let f = self.field;
        let p = f.p();
        let small = f.is_small();
        let cols = self.cols;
        let mut rank = 0;
        let parallel = self.rows * cols >= PARALLEL_THRESHOLD;
        for c in 0..cols {
            if rank == self.rows {
                break;
            }
            // rows below `rank` may hold unreduced sums when p is small
            let pivot = (rank..self.rows).find(|&r| self.data[r * cols + c] % p != 0);
            let Some(pr) = pivot else { continue };
            if pr != rank {
                let (a, b) = self.data.split_at_mut(pr * cols);
                a[rank * cols..(rank + 1) * cols].swap_with_slice(&mut b[..cols]);
            }
            let (head, tail) = self.data.split_at_mut((rank + 1) * cols);
            let prow = &mut head[rank * cols..];
            for x in prow[c..].iter_mut() {
                *x %= p;
            }
            let inv = f.inv(prow[c]);
            for x in prow[c..].iter_mut() {
                *x = f.mul(*x, inv);
            }
            let prow: &[u64] = prow;
            let eliminate = |row: &mut [u64]| {
                let lead = row[c] % p;
                if lead == 0 {
                    return;
                }
                let g = p - lead;
                if small {
                    // entries stay below 2^63: each update adds < 2^32
                    for (x, &y) in row[c..].iter_mut().zip(&prow[c..]) {
                        *x += g * y;
                    }
                } else {
                    for (x, &y) in row[c..].iter_mut().zip(&prow[c..]) {
                        *x = (*x + g * y) % p;
                    }
                }
            };
            if parallel {
                tail.par_chunks_mut(cols).for_each(eliminate);
            } else {
                tail.chunks_mut(cols).for_each(eliminate);
            }
            rank += 1;
        }
        rank
    }

    /// Inverse of a square matrix, or `None` when singular.
    pub fn inverse(&self) -> Option<Matrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let f = self.field;
        let mut a = self.clone();
        let mut inv = Matrix::identity(f, n);
        for c in 0..n {
            let pr = (c..n).find(|&r| a.get(r, c) != 0)?;
            if pr != c {
                for j in 0..n {
                    a.data.swap(pr * n + j, c * n + j);
                    inv.data.swap(pr * n + j, c * n + j);
                }
            }
            let s = f.inv(a.get(c, c));
            for j in 0..n {
                a.data[c * n + j] = f.mul(a.data[c * n + j], s);
                inv.data[c * n + j] = f.mul(inv.data[c * n + j], s);
            }
            for r in 0..n {
                if r == c {
                    continue;
                }
                let g = a.get(r, c);
                if g == 0 {
                    continue;
                }
                for j in 0..n {
                    a.data[r * n + j] = f.sub(a.data[r * n + j], f.mul(g, a.data[c * n + j]));
                    inv.data[r * n + j] = f.sub(inv.data[r * n + j], f.mul(g, inv.data[c * n + j]));
                }
            }
        }
        Some(inv)
    }

    /// Writes the dump format: a `rows cols p` header line, then one line of
    /// space-separated entries per row.
    pub fn write_dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{} {} {}", self.rows, self.cols, self.field.p())?;
        for r in 0..self.rows {
            let line: Vec<String> = self.row(r).iter().map(u64::to_string).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read_dump<R: BufRead>(r: R) -> io::Result<Matrix> {
        let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| bad("missing header"))??;
        let nums: Vec<u64> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("bad header")))
            .collect::<io::Result<_>>()?;
        let [rows, cols, p] = nums[..] else {
            return Err(bad("header must be `rows cols p`"));
        };
        let field = PrimeField::new(p).map_err(|e| bad(&e.to_string()))?;
        let mut data = Vec::with_capacity((rows * cols) as usize);
        for line in lines.take(rows as usize) {
            let line = line?;
            let before = data.len();
            for t in line.split_whitespace() {
                data.push(t.parse::<u64>().map_err(|_| bad("bad entry"))?);
            }
            if data.len() - before != cols as usize {
                return Err(bad("row length mismatch"));
            }
        }
        if data.len() != (rows * cols) as usize {
            return Err(bad("truncated matrix"));
        }
        Ok(Matrix { field, rows: rows as usize, cols: cols as usize, data })
    }
}
