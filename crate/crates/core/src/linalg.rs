//! Small dense linear algebra: matrices, Cholesky, symmetric eigensolver,
//! Lanczos and preconditioned conjugate gradients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols, "matvec dimension");
        self.data
            .par_chunks(self.cols.max(1))
            .map(|row| dot(row, x))
            .collect()
    }

    pub fn transpose_matvec(&self, y: &[T]) -> Vec<T> {
        assert_eq!(y.len(), self.rows, "transpose matvec dimension");
        let mut out = vec![T::zero(); self.cols];
        for (i, yi) in y.iter().enumerate() {
            if *yi == T::zero() {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o = *o + *a * *yi;
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension");
        let n = other.cols;
        let mut out = Self::zeros(self.rows, n);
        out.data
            .par_chunks_mut(n.max(1))
            .enumerate()
            .for_each(|(i, row)| {
                for (k, a) in self.row(i).iter().enumerate() {
                    if *a == T::zero() {
                        continue;
                    }
                    for (o, b) in row.iter_mut().zip(other.row(k)) {
                        *o = *o + *a * *b;
                    }
                }
            });
        out
    }

    /// `Bᵀ diag(w) B` for a tall matrix `B = self`.
    pub fn weighted_gram(&self, weights: &[T]) -> Self {
        assert_eq!(weights.len(), self.rows, "gram weights");
        let n = self.cols;
        let mut out = Self::zeros(n, n);
        out.data
            .par_chunks_mut(n.max(1))
            .enumerate()
            .for_each(|(i, row)| {
                for k in 0..self.rows {
                    let w = weights[k];
                    if w == T::zero() {
                        continue;
                    }
                    let bk = self.row(k);
                    let a = bk[i] * w;
                    if a == T::zero() {
                        continue;
                    }
                    for (o, b) in row.iter_mut().zip(bk) {
                        *o = *o + a * *b;
                    }
                }
            });
        out
    }

    pub fn symmetrize(&mut self) {
        let n = self.rows;
        for i in 0..n {
            for j in i + 1..n {
                let v = (self[(i, j)] + self[(j, i)]) * T::lit(0.5);
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }

    /// Largest absolute entry of `self − selfᵀ`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|v| *v * *v).sum::<T>().sqrt()
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// `xᵀ self y`.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        dot(x, &self.matvec(y))
    }
}

impl<T> std::ops::Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * *xi;
    }
}

/// Lower Cholesky factor `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    l: DenseMatrix<T>,
}

impl<T: Real> Cholesky<T> {
    pub fn new(a: &DenseMatrix<T>) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::Shape("Cholesky needs a square matrix".into()));
        }
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let lj = &l.data[j * n..j * n + j];
            let mut d = a[(j, j)] - dot(lj, lj);
            if !(d > T::zero()) {
                return Err(Error::NotPositiveDefinite);
            }
            d = d.sqrt();
            l[(j, j)] = d;
            // rows below j depend only on rows < j and row j
            let (head, tail) = l.data.split_at_mut((j + 1) * n);
            let lj = &head[j * n..j * n + j];
            tail.par_chunks_mut(n).enumerate().for_each(|(k, row)| {
                let i = j + 1 + k;
                let s = a[(i, j)] - dot(&row[..j], lj);
                row[j] = s / d;
            });
        }
        Ok(Self { l })
    }

    pub fn factor(&self) -> &DenseMatrix<T> {
        &self.l
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.l.rows();
        let mut y = b.to_vec();
        for i in 0..n {
            let s = dot(&self.l.data[i * n..i * n + i], &y[..i]);
            y[i] = (y[i] - s) / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s = s - self.l[(k, i)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }
}

/// Eigenvalues in increasing order with matching unit eigenvectors.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: DenseMatrix<T>,
}

/// Householder tridiagonalization followed by implicit QL.
pub fn symmetric_eigen<T: Real>(a: &DenseMatrix<T>) -> Result<SymmetricEigen<T>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::Shape("eigensolver needs a square matrix".into()));
    }
    if n == 0 {
        return Ok(SymmetricEigen {
            values: vec![],
            vectors: DenseMatrix::zeros(0, 0),
        });
    }
    // column-major working copy: v[c * n + r] holds V[r][c]
    let mut v: Vec<T> = vec![T::zero(); n * n];
    for r in 0..n {
        for c in 0..n {
            v[c * n + r] = (a[(r, c)] + a[(c, r)]) * T::lit(0.5);
        }
    }
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(n, &mut v, &mut d, &mut e);
    tql2(n, &mut v, &mut d, &mut e)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |r, c| v[order[c] * n + r]);
    Ok(SymmetricEigen { values, vectors })
}

#[allow(clippy::needless_range_loop)]
fn tred2<T: Real>(n: usize, v: &mut [T], d: &mut [T], e: &mut [T]) {
    let at = |r: usize, c: usize| c * n + r;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for k in 0..i {
            scale = scale + d[k].abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = T::zero();
                v[at(j, i)] = T::zero();
            }
        } else {
            for k in 0..i {
                d[k] = d[k] / scale;
                h = h + d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h = h - f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in j + 1..i {
                    g = g + v[at(k, j)] * d[k];
                    e[k] = e[k] + v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] = e[j] / h;
                f = f + e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] = e[j] - hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] = v[at(k, j)] - (f * e[k] + g * d[k]);
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = T::zero();
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g = g + v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] = v[at(k, j)] - g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = T::zero();
    }
    v[at(n - 1, n - 1)] = T::one();
    e[0] = T::zero();
}

fn tql2<T: Real>(n: usize, v: &mut [T], d: &mut [T], e: &mut [T]) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 100 {
                    return Err(Error::NoConvergence {
                        what: "tridiagonal QL",
                        iterations: iter,
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (T::lit(2.0) * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di = *di - h;
                }
                f = f + h;
                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (left, right) = v.split_at_mut((i + 1) * n);
                    let col_i = &mut left[i * n..];
                    let col_i1 = &mut right[..n];
                    for (a, b) in col_i.iter_mut().zip(col_i1.iter_mut()) {
                        let hb = *b;
                        *b = s * *a + c * hb;
                        *a = c * *a - s * hb;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = T::zero();
    }
    Ok(())
}

/// Generalized problem `A x = λ B x` for symmetric `A` and SPD `B`, via `B = L Lᵀ`.
pub fn generalized_eigen<T: Real>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<SymmetricEigen<T>> {
    let n = a.rows();
    let chol = Cholesky::new(b)?;
    let l = chol.factor();
    // C = L⁻¹ A L⁻ᵀ
    let mut y = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let col = lower_solve(l, &a.column(j));
        for i in 0..n {
            y[(i, j)] = col[i];
        }
    }
    let mut c = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let row = lower_solve(l, y.row(i));
        for j in 0..n {
            c[(i, j)] = row[j];
        }
    }
    let eig = symmetric_eigen(&c)?;
    let mut vectors = DenseMatrix::zeros(n, n);
    for k in 0..n {
        let x = upper_solve_transpose(l, &eig.vectors.column(k));
        for i in 0..n {
            vectors[(i, k)] = x[i];
        }
    }
    Ok(SymmetricEigen {
        values: eig.values,
        vectors,
    })
}

fn lower_solve<T: Real>(l: &DenseMatrix<T>, b: &[T]) -> Vec<T> {
    let n = l.rows();
    let mut y = b.to_vec();
    for i in 0..n {
        let s = dot(&l.row(i)[..i], &y[..i]);
        y[i] = (y[i] - s) / l[(i, i)];
    }
    y
}

fn upper_solve_transpose<T: Real>(l: &DenseMatrix<T>, b: &[T]) -> Vec<T> {
    let n = l.rows();
    let mut y = b.to_vec();
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s = s - l[(k, i)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    y
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone)]
pub struct IterativeSolution<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    pub relative_residual: T,
}

/// Conjugate gradients with diagonal (Jacobi) scaling.
pub fn pcg<T: Real, F: Fn(&[T]) -> Vec<T>>(
    apply: F,
    diag: &[T],
    b: &[T],
    rel_tol: T,
    max_iter: usize,
) -> Result<IterativeSolution<T>> {
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == T::zero() {
        return Ok(IterativeSolution {
            x: vec![T::zero(); n],
            iterations: 0,
            relative_residual: T::zero(),
        });
    }
    let mut x = vec![T::zero(); n];
    let mut r = b.to_vec();
    let precond = |r: &[T]| -> Vec<T> { r.iter().zip(diag).map(|(a, d)| *a / *d).collect() };
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(Error::NotPositiveDefinite);
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let res = norm2(&r) / bnorm;
        if res <= rel_tol {
            // recompute the true residual to guard against drift
            let ax = apply(&x);
            let true_res = norm2(&b.iter().zip(&ax).map(|(a, c)| *a - *c).collect::<Vec<_>>()) / bnorm;
            if true_res <= rel_tol * T::lit(10.0) {
                return Ok(IterativeSolution {
                    x,
                    iterations: it,
                    relative_residual: true_res,
                });
            }
            r = b.iter().zip(&ax).map(|(a, c)| *a - *c).collect();
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = *zi + beta * *pi;
        }
    }
    Err(Error::NoConvergence {
        what: "conjugate gradients",
        iterations: max_iter,
    })
}

/// Largest `count` eigenpairs of a symmetric positive operator by Lanczos with
/// full reorthogonalization.
pub fn lanczos_largest<T: Real, F: Fn(&[T]) -> Vec<T>>(
    apply: F,
    n: usize,
    count: usize,
    rel_tol: T,
    max_dim: usize,
    seed: u64,
) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    if count > n {
        return Err(Error::TooManyEigenpairs {
            requested: count,
            available: n,
        });
    }
    let max_dim = max_dim.min(n).max(count);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<T> = (0..n).map(|_| T::lit(rng.random::<f64>() - 0.5)).collect();
    let nq = norm2(&q);
    q.iter_mut().for_each(|v| *v = *v / nq);
    let mut basis: Vec<Vec<T>> = vec![q];
    let mut alpha: Vec<T> = Vec::new();
    let mut beta: Vec<T> = Vec::new();
    loop {
        let k = basis.len();
        let mut w = apply(&basis[k - 1]);
        let a = dot(&w, &basis[k - 1]);
        alpha.push(a);
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                axpy(-c, b, &mut w);
            }
        }
        let bnext = norm2(&w);
        let tri = DenseMatrix::from_fn(k, k, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                T::zero()
            }
        });
        let eig = symmetric_eigen(&tri)?;
        let done_dim = k >= max_dim || bnext <= T::epsilon() * a.abs().max(T::one());
        if k >= count {
            let converged = (0..count).all(|i| {
                let idx = k - 1 - i;
                let theta = eig.values[idx];
                let s_last = eig.vectors[(k - 1, idx)];
                (bnext * s_last).abs() <= rel_tol * theta.abs()
            });
            if converged || done_dim {
                if !converged && k < n {
                    return Err(Error::NoConvergence {
                        what: "Lanczos",
                        iterations: k,
                    });
                }
                let mut values = Vec::with_capacity(count);
                let mut vectors = Vec::with_capacity(count);
                for i in 0..count {
                    let idx = k - 1 - i;
                    values.push(eig.values[idx]);
                    let mut x = vec![T::zero(); n];
                    for (j, b) in basis.iter().enumerate() {
                        axpy(eig.vectors[(j, idx)], b, &mut x);
                    }
                    let nx = norm2(&x);
                    x.iter_mut().for_each(|v| *v = *v / nx);
                    vectors.push(x);
                }
                return Ok((values, vectors));
            }
        } else if done_dim {
            return Err(Error::NoConvergence {
                what: "Lanczos",
                iterations: k,
            });
        }
        beta.push(bnext);
        w.iter_mut().for_each(|v| *v = *v / bnext);
        basis.push(w);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> DenseMatrix<f64> {
        DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                2.0
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else {
                0.0
            }
        })
    }

    #[test]
    fn eigen_of_second_difference() {
        let n = 40;
        let eig = symmetric_eigen(&laplacian(n)).unwrap();
        for k in 0..n {
            let exact = 4.0 * (std::f64::consts::PI * (k + 1) as f64 / (2.0 * (n + 1) as f64)).sin().powi(2);
            assert!((eig.values[k] - exact).abs() < 1e-12, "{k}");
        }
        let a = laplacian(n);
        for k in [0, 7, 39] {
            let x = eig.vectors.column(k);
            let ax = a.matvec(&x);
            for i in 0..n {
                assert!((ax[i] - eig.values[k] * x[i]).abs() < 1e-12);
            }
            assert!((norm2(&x) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eigen_handles_diagonal_and_tiny() {
        let d = DenseMatrix::from_fn(3, 3, |i, j| if i == j { [3.0, -1.0, 2.0][i] } else { 0.0 });
        let eig = symmetric_eigen(&d).unwrap();
        assert_eq!(eig.values, vec![-1.0, 2.0, 3.0]);
        let one = symmetric_eigen(&DenseMatrix::from_fn(1, 1, |_, _| 5.0f64)).unwrap();
        assert_eq!(one.values, vec![5.0]);
    }

    #[test]
    fn cholesky_solves() {
        let a = laplacian(30);
        let chol = Cholesky::new(&a).unwrap();
        let x: Vec<f64> = (0..30).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.matvec(&x);
        let y = chol.solve(&b);
        for i in 0..30 {
            assert!((x[i] - y[i]).abs() < 1e-11);
        }
        let mut bad = a.clone();
        bad[(3, 3)] = -1.0;
        assert_eq!(Cholesky::new(&bad).unwrap_err(), Error::NotPositiveDefinite);
    }

    #[test]
    fn pcg_matches_direct() {
        let a = laplacian(50);
        let b: Vec<f64> = (0..50).map(|i| 1.0 + i as f64 * 0.01).collect();
        let sol = pcg(|x| a.matvec(x), &a.diagonal(), &b, 1e-12, 500).unwrap();
        let direct = Cholesky::new(&a).unwrap().solve(&b);
        for i in 0..50 {
            assert!((sol.x[i] - direct[i]).abs() < 1e-8 * direct[i].abs().max(1.0));
        }
    }

    #[test]
    fn generalized_matches_scaled() {
        let a = laplacian(10);
        let b = DenseMatrix::from_fn(10, 10, |i, j| if i == j { 0.5 } else { 0.0 });
        let g = generalized_eigen(&a, &b).unwrap();
        let s = symmetric_eigen(&a).unwrap();
        for k in 0..10 {
            assert!((g.values[k] - 2.0 * s.values[k]).abs() < 1e-12);
            let x = g.vectors.column(k);
            // B-orthonormal
            assert!((0.5 * dot(&x, &x) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lanczos_finds_top_of_spectrum() {
        let a = laplacian(200);
        let (vals, vecs) = lanczos_largest(|x| a.matvec(x), 200, 3, 1e-10, 200, 7).unwrap();
        let exact = symmetric_eigen(&a).unwrap();
        for i in 0..3 {
            assert!((vals[i] - exact.values[199 - i]).abs() < 1e-8);
            let ax = a.matvec(&vecs[i]);
            let res: f64 = ax.iter().zip(&vecs[i]).map(|(p, q)| (p - vals[i] * q).powi(2)).sum::<f64>().sqrt();
            assert!(res < 1e-4);
        }
    }
}
