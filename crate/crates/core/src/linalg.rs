//! Small linear-algebra kernels: dense pivoted solve, banded Cholesky for SPD
//! stencil matrices, CSR storage with conjugate gradients, and a tridiagonal solver.

use crate::error::{Error, Result};
use crate::scalar::{dot, to_f64, Real};

/// Solves `a x = b` in place (row-major `n × n`) by Gaussian elimination with
/// partial pivoting. Returns `x`.
pub fn solve_dense<T: Real>(a: &mut [T], b: &mut [T], n: usize) -> Result<Vec<T>> {
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| {
                a[i * n + col]
                    .abs()
                    .partial_cmp(&a[j * n + col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if a[piv * n + col] == T::zero() {
            return Err(Error::InvalidInput("singular dense system".into()));
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / d;
            if f != T::zero() {
                for k in col..n {
                    let v = a[col * n + k];
                    a[row * n + k] = a[row * n + k] - f * v;
                }
                b[row] = b[row] - f * b[col];
            }
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s = s - a[row * n + k] * x[k];
        }
        x[row] = s / a[row * n + row];
    }
    Ok(x)
}

/// Symmetric matrix with lower bandwidth `bw`, lower triangle stored row by row.
#[derive(Clone, Debug)]
pub struct BandMatrix<T> {
    n: usize,
    bw: usize,
    data: Vec<T>,
}

impl<T: Real> BandMatrix<T> {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![T::zero(); n * (bw + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        i * (self.bw + 1) + (j + self.bw - i)
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> T {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            T::zero()
        } else {
            self.data[self.slot(i, j)]
        }
    }

    /// Adds `v` to the symmetric pair `(i, j)`, `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        assert!(i - j <= self.bw, "entry ({i}, {j}) outside band {}", self.bw);
        let s = self.slot(i, j);
        self.data[s] = self.data[s] + v;
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..i {
                let a = self.data[self.slot(i, j)];
                y[i] = y[i] + a * x[j];
                y[j] = y[j] + a * x[i];
            }
            y[i] = y[i] + self.data[self.slot(i, i)] * x[i];
        }
        y
    }

    /// Cholesky factor `L Lᵀ`; fails if the matrix is not positive definite.
    pub fn cholesky(&self) -> Result<BandCholesky<T>> {
        let mut l = self.data.clone();
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let jlo = j.saturating_sub(bw).max(lo);
                let mut s = l[i * w + (j + bw - i)];
                for k in jlo..j {
                    s = s - l[i * w + (k + bw - i)] * l[j * w + (k + bw - j)];
                }
                if i == j {
                    if s <= T::zero() {
                        return Err(Error::InvalidInput(format!(
                            "band matrix not positive definite at row {i} (pivot {:e})",
                            to_f64(s)
                        )));
                    }
                    l[i * w + bw] = s.sqrt();
                } else {
                    l[i * w + (j + bw - i)] = s / l[j * w + bw];
                }
            }
        }
        Ok(BandCholesky { n, bw, l })
    }
}

/// Banded Cholesky factor.
#[derive(Clone, Debug)]
pub struct BandCholesky<T> {
    n: usize,
    bw: usize,
    l: Vec<T>,
}

impl<T: Real> BandCholesky<T> {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [T]) {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut s = b[i];
            for k in lo..i {
                s = s - self.l[i * w + (k + bw - i)] * b[k];
            }
            b[i] = s / self.l[i * w + bw];
        }
        for i in (0..n).rev() {
            let hi = (i + bw).min(n - 1);
            let mut s = b[i];
            for k in i + 1..=hi {
                s = s - self.l[k * w + (i + bw - k)] * b[k];
            }
            b[i] = s / self.l[i * w + bw];
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Square matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut trip: Vec<(usize, usize, T)>) -> Self {
        trip.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(trip.len());
        let mut vals: Vec<T> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trip {
            if last == Some((r, c)) {
                let k = vals.len() - 1;
                vals[k] = vals[k] + v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| self.row(i).fold(T::zero(), |acc, (j, a)| acc + a * x[j]))
            .collect()
    }

    /// Largest offset `|i - j|` among stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.n)
            .flat_map(|i| self.row(i).map(move |(j, _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    pub fn to_band(&self) -> BandMatrix<T> {
        let mut band = BandMatrix::zeros(self.n, self.bandwidth());
        for i in 0..self.n {
            for (j, a) in self.row(i) {
                if j <= i {
                    band.add(i, j, a);
                }
            }
        }
        band
    }
}

/// Outcome of a conjugate-gradient solve.
#[derive(Clone, Debug)]
pub struct CgOutput<T> {
    pub solution: Vec<T>,
    pub iterations: usize,
    pub relative_residual: T,
}

/// Unpreconditioned conjugate gradients for SPD `a`, stopping at
/// `‖b − a x‖ ≤ tol ‖b‖`.
pub fn conjugate_gradient<T: Real>(
    a: &CsrMatrix<T>,
    b: &[T],
    tol: T,
    max_iter: usize,
) -> Result<CgOutput<T>> {
    let n = a.dim();
    let bnorm = dot(b, b).sqrt();
    let mut x = vec![T::zero(); n];
    if bnorm == T::zero() {
        return Ok(CgOutput {
            solution: x,
            iterations: 0,
            relative_residual: T::zero(),
        });
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut trace = Vec::new();
    for it in 0..max_iter {
        let rel = rr.sqrt() / bnorm;
        if rel <= tol {
            return Ok(CgOutput {
                solution: x,
                iterations: it,
                relative_residual: rel,
            });
        }
        if it % 64 == 0 {
            trace.push(to_f64(rel));
        }
        let ap = a.matvec(&p);
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] = x[i] + alpha * p[i];
            r[i] = r[i] - alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    // recompute the true residual for the report
    let ax = a.matvec(&x);
    let res: T = ax
        .iter()
        .zip(b)
        .map(|(&u, &v)| (u - v) * (u - v))
        .sum::<T>()
        .sqrt()
        / bnorm;
    if res <= tol {
        return Ok(CgOutput {
            solution: x,
            iterations: max_iter,
            relative_residual: res,
        });
    }
    trace.push(to_f64(res));
    Err(Error::NotConverged {
        iterations: max_iter,
        residual: to_f64(res),
        trace,
    })
}

/// Solves a tridiagonal system (Thomas algorithm). `lower[0]` and `upper[n-1]` are ignored.
pub fn solve_tridiagonal<T: Real>(lower: &[T], diag: &[T], upper: &[T], rhs: &[T]) -> Vec<T> {
    let n = diag.len();
    let mut c = vec![T::zero(); n];
    let mut d = vec![T::zero(); n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / m } else { T::zero() };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    let mut x = vec![T::zero(); n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Relative residual `‖a x − b‖ / ‖b‖` for a band matrix.
pub fn band_residual<T: Real>(a: &BandMatrix<T>, x: &[T], b: &[T]) -> T {
    let ax = a.matvec(x);
    let num: T = ax.iter().zip(b).map(|(&u, &v)| (u - v) * (u - v)).sum();
    let den = dot(b, b);
    if den == T::zero() {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}
