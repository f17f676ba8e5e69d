//! Dense linear algebra over F_p.
//!
//! Operator matrices act on column vectors of coordinates: column `j` of the
//! matrix of `T` holds the coordinates of `T(f_j)`. Row reduction always picks
//! the first nonzero entry of a column as pivot, so results are reproducible.

use std::fmt;

use crate::fieldseries::FieldContext;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    ctx: FieldContext,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over {}", self.rows, self.cols, self.ctx)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(ctx: FieldContext, rows: usize, cols: usize) -> Self {
        Matrix { ctx, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(ctx: FieldContext, n: usize) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from rows; entries are reduced mod p.
    pub fn from_rows(ctx: FieldContext, cols: usize, rows: &[Vec<u64>]) -> Self {
        let mut m = Self::zeros(ctx, rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged row");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v % ctx.p());
            }
        }
        m
    }

    pub fn from_columns(ctx: FieldContext, rows: usize, cols: &[Vec<u64>]) -> Self {
        if cols.is_empty() {
            return Self::zeros(ctx, rows, 0);
        }
        Self::from_rows(ctx, rows, cols).transpose()
    }

    pub fn ctx(&self) -> FieldContext {
        self.ctx
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<u64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.ctx, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let ctx = self.ctx;
        let p = ctx.p();
        let limit = u64::MAX - p * p;
        let mut out = Self::zeros(ctx, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = 0u64;
                for k in 0..self.cols {
                    acc += self.get(i, k) * other.get(k, j);
                    if acc >= limit {
                        acc %= p;
                    }
                }
                out.set(i, j, acc % p);
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(self.cols, v.len());
        let ctx = self.ctx;
        (0..self.rows)
            .map(|i| {
                self.row(i).iter().zip(v).fold(0, |acc, (&a, &b)| ctx.add(acc, ctx.mul(a, b)))
            })
            .collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let ctx = self.ctx;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| ctx.add(a, b)).collect();
        Matrix { ctx, rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let ctx = self.ctx;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| ctx.sub(a, b)).collect();
        Matrix { ctx, rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: u64) -> Matrix {
        let ctx = self.ctx;
        let data = self.data.iter().map(|&a| ctx.mul(a, s % ctx.p())).collect();
        Matrix { ctx, rows: self.rows, cols: self.cols, data }
    }

    /// `self - lambda * I`.
    pub fn shift(&self, lambda: u64) -> Matrix {
        assert!(self.is_square());
        let mut m = self.clone();
        for i in 0..self.rows {
            m.set(i, i, self.ctx.sub(m.get(i, i), lambda % self.ctx.p()));
        }
        m
    }

    pub fn pow(&self, mut e: u64) -> Matrix {
        assert!(self.is_square());
        let mut acc = Self::identity(self.ctx, self.rows);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Flattened entries in row-major order.
    pub fn entries(&self) -> &[u64] {
        &self.data
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place(None);
        (m, pivots)
    }

    /// In-place RREF. When `track` is given, the same row operations are applied to it.
    fn rref_in_place(&mut self, mut track: Option<&mut Matrix>) -> Vec<usize> {
        let ctx = self.ctx;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                continue;
            };
            self.swap_rows(r, pr);
            if let Some(t) = track.as_deref_mut() {
                t.swap_rows(r, pr);
            }
            let inv = ctx.inv(self.get(r, c)).expect("nonzero pivot");
            self.scale_row(r, inv);
            if let Some(t) = track.as_deref_mut() {
                t.scale_row(r, inv);
            }
            for i in 0..self.rows {
                if i != r {
                    let f = self.get(i, c);
                    if f != 0 {
                        self.axpy_row(i, r, ctx.neg(f));
                        if let Some(t) = track.as_deref_mut() {
                            t.axpy_row(i, r, ctx.neg(f));
                        }
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn scale_row(&mut self, r: usize, s: u64) {
        let ctx = self.ctx;
        for v in &mut self.data[r * self.cols..(r + 1) * self.cols] {
            *v = ctx.mul(*v, s);
        }
    }

    /// row[dst] += s * row[src]
    fn axpy_row(&mut self, dst: usize, src: usize, s: u64) {
        let ctx = self.ctx;
        let cols = self.cols;
        for c in 0..cols {
            let v = self.data[src * cols + c];
            if v != 0 {
                let d = &mut self.data[dst * cols + c];
                *d = ctx.add(*d, ctx.mul(s, v));
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{ v : self * v = 0 }`, one vector per free column, in column order.
    pub fn kernel(&self) -> Vec<Vec<u64>> {
        let ctx = self.ctx;
        let (r, pivots) = self.rref();
        let mut out = Vec::new();
        for free in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![0; self.cols];
            v[free] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = ctx.neg(r.get(i, free));
            }
            out.push(v);
        }
        out
    }

    /// Basis of the column space (as a subspace of F_p^rows).
    pub fn column_space(&self) -> Subspace {
        Subspace::from_vectors(self.ctx, self.rows, &(0..self.cols).map(|c| self.column(c)).collect::<Vec<_>>())
    }

    /// Characteristic polynomial `det(x I - self)`, coefficients low to high (monic).
    pub fn charpoly(&self) -> Vec<u64> {
        assert!(self.is_square());
        let ctx = self.ctx;
        let n = self.rows;
        let h = self.hessenberg();
        // polys[m] = charpoly of the leading m x m block
        let mut polys: Vec<Vec<u64>> = vec![vec![1]];
        for m in 1..=n {
            let i = m - 1;
            // x * P_{m-1} - h[i][i] * P_{m-1}
            let prev = &polys[m - 1];
            let mut next = vec![0u64; m + 1];
            for (d, &c) in prev.iter().enumerate() {
                next[d + 1] = ctx.add(next[d + 1], c);
                next[d] = ctx.sub(next[d], ctx.mul(h.get(i, i), c));
            }
            let mut prod = 1u64;
            for j in (0..i).rev() {
                prod = ctx.mul(prod, h.get(j + 1, j));
                if prod == 0 {
                    break;
                }
                let coef = ctx.mul(prod, h.get(j, i));
                for (d, &c) in polys[j].iter().enumerate() {
                    next[d] = ctx.sub(next[d], ctx.mul(coef, c));
                }
            }
            polys.push(next);
        }
        polys.pop().unwrap()
    }

    /// Similar upper Hessenberg matrix.
    fn hessenberg(&self) -> Matrix {
        let ctx = self.ctx;
        let n = self.rows;
        let mut h = self.clone();
        for col in 0..n.saturating_sub(2) {
            let Some(piv) = (col + 1..n).find(|&i| h.get(i, col) != 0) else {
                continue;
            };
            if piv != col + 1 {
                h.swap_rows(piv, col + 1);
                for r in 0..n {
                    h.data.swap(r * n + piv, r * n + col + 1);
                }
            }
            let inv = ctx.inv(h.get(col + 1, col)).unwrap();
            for i in col + 2..n {
                let f = ctx.mul(h.get(i, col), inv);
                if f == 0 {
                    continue;
                }
                // row_i -= f * row_{col+1}; then col_{col+1} += f * col_i
                h.axpy_row(i, col + 1, ctx.neg(f));
                for r in 0..n {
                    let v = ctx.add(h.get(r, col + 1), ctx.mul(f, h.get(r, i)));
                    h.set(r, col + 1, v);
                }
            }
        }
        h
    }
}

/// Solves `x * B = v` for a fixed list of row vectors `B`, reusing one reduction.
#[derive(Clone, Debug)]
pub struct SpanSolver {
    reduced: Matrix,
    transform: Matrix,
    pivots: Vec<usize>,
    independent: bool,
}

impl SpanSolver {
    pub fn new(ctx: FieldContext, len: usize, rows: &[Vec<u64>]) -> Self {
        let mut reduced = Matrix::from_rows(ctx, len, rows);
        let mut transform = Matrix::identity(ctx, rows.len());
        let pivots = reduced.rref_in_place(Some(&mut transform));
        let independent = pivots.len() == rows.len();
        SpanSolver { reduced, transform, pivots, independent }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_independent(&self) -> bool {
        self.independent
    }

    /// Coordinates `x` with `x * B = v`, or `None` when `v` is outside the span.
    /// If the rows are dependent, the solution with zero weight on redundant rows is returned.
    pub fn solve(&self, v: &[u64]) -> Option<Vec<u64>> {
        let ctx = self.reduced.ctx;
        assert_eq!(v.len(), self.reduced.cols, "vector length mismatch");
        let mut residual: Vec<u64> = v.iter().map(|&x| x % ctx.p()).collect();
        let mut coeffs = vec![0u64; self.pivots.len()];
        for (i, &pc) in self.pivots.iter().enumerate() {
            let c = residual[pc];
            if c == 0 {
                continue;
            }
            coeffs[i] = c;
            for (j, slot) in residual.iter_mut().enumerate() {
                let r = self.reduced.get(i, j);
                if r != 0 {
                    *slot = ctx.sub(*slot, ctx.mul(c, r));
                }
            }
        }
        if residual.iter().any(|&x| x != 0) {
            return None;
        }
        let n = self.transform.cols;
        let mut x = vec![0u64; n];
        for (i, &c) in coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (j, slot) in x.iter_mut().enumerate() {
                *slot = ctx.add(*slot, ctx.mul(c, self.transform.get(i, j)));
            }
        }
        Some(x)
    }
}

/// A subspace of F_p^n stored as the rows of its reduced echelon basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    ctx: FieldContext,
    ambient: usize,
    basis: Vec<Vec<u64>>,
}

impl Subspace {
    pub fn zero(ctx: FieldContext, ambient: usize) -> Self {
        Subspace { ctx, ambient, basis: Vec::new() }
    }

    pub fn full(ctx: FieldContext, ambient: usize) -> Self {
        Self::from_vectors(ctx, ambient, &Matrix::identity(ctx, ambient).to_rows())
    }

    pub fn from_vectors(ctx: FieldContext, ambient: usize, vectors: &[Vec<u64>]) -> Self {
        if vectors.is_empty() {
            return Self::zero(ctx, ambient);
        }
        let (r, pivots) = Matrix::from_rows(ctx, ambient, vectors).rref();
        let basis = (0..pivots.len()).map(|i| r.row(i).to_vec()).collect();
        Subspace { ctx, ambient, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    /// Echelon basis rows.
    pub fn basis(&self) -> &[Vec<u64>] {
        &self.basis
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        Matrix::from_rows(self.ctx, self.ambient, &rows).rank() == self.dim()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis.iter().all(|v| self.contains(v))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut rows = self.basis.clone();
        rows.extend(other.basis.iter().cloned());
        Self::from_vectors(self.ctx, self.ambient, &rows)
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        if self.dim() == 0 || other.dim() == 0 {
            return Self::zero(self.ctx, self.ambient);
        }
        let ctx = self.ctx;
        // columns: basis of self, then negated basis of other; kernel gives the relations
        let mut cols: Vec<Vec<u64>> = self.basis.clone();
        cols.extend(other.basis.iter().map(|v| v.iter().map(|&x| ctx.neg(x)).collect()));
        let m = Matrix::from_columns(ctx, self.ambient, &cols);
        let vectors: Vec<Vec<u64>> = m
            .kernel()
            .into_iter()
            .map(|k| {
                let mut v = vec![0u64; self.ambient];
                for (i, b) in self.basis.iter().enumerate() {
                    for (slot, &x) in v.iter_mut().zip(b) {
                        *slot = ctx.add(*slot, ctx.mul(k[i], x));
                    }
                }
                v
            })
            .collect();
        Self::from_vectors(ctx, self.ambient, &vectors)
    }

    /// Image under a linear map given by a matrix acting on column vectors.
    pub fn image_under(&self, m: &Matrix) -> Subspace {
        assert_eq!(m.cols(), self.ambient);
        let vecs: Vec<Vec<u64>> = self.basis.iter().map(|v| m.mul_vec(v)).collect();
        Self::from_vectors(self.ctx, m.rows(), &vecs)
    }
}

/// Polynomial helpers on coefficient vectors (low to high) over F_p.
pub mod poly {
    use crate::fieldseries::FieldContext;

    pub fn trim(mut c: Vec<u64>) -> Vec<u64> {
        while c.len() > 1 && *c.last().unwrap() == 0 {
            c.pop();
        }
        c
    }

    pub fn mul(ctx: FieldContext, a: &[u64], b: &[u64]) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return vec![0];
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = ctx.add(out[i + j], ctx.mul(x, y));
            }
        }
        trim(out)
    }

    /// `l^deg * c(x / l)` for a polynomial `c` of degree `deg`.
    pub fn rescale_root(ctx: FieldContext, c: &[u64], l: u64) -> Vec<u64> {
        let deg = c.len() - 1;
        c.iter()
            .enumerate()
            .map(|(i, &ci)| ctx.mul(ci, ctx.pow(l, (deg - i) as u64)))
            .collect()
    }

    /// Remainder of `a` modulo the nonzero polynomial `b`.
    pub fn rem(ctx: FieldContext, a: &[u64], b: &[u64]) -> Vec<u64> {
        let b = trim(b.to_vec());
        let lead_inv = ctx.inv(*b.last().unwrap()).expect("nonzero divisor");
        let mut r = a.to_vec();
        while r.len() >= b.len() {
            let shift = r.len() - b.len();
            let f = ctx.mul(*r.last().unwrap(), lead_inv);
            for (i, &bi) in b.iter().enumerate() {
                r[shift + i] = ctx.sub(r[shift + i], ctx.mul(f, bi));
            }
            r.pop();
        }
        if r.is_empty() {
            vec![0]
        } else {
            trim(r)
        }
    }

    pub fn divides(ctx: FieldContext, a: &[u64], b: &[u64]) -> bool {
        let r = rem(ctx, b, a);
        r.iter().all(|&x| x == 0)
    }
}
