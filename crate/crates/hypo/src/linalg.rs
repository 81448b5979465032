//! Sparse and banded complex linear algebra, plus thin wrappers over LAPACK for small dense work.

use std::collections::BTreeMap;
use std::io::Write;

use ndarray as nd;
use ndarray_linalg::{Eig, Eigh, Inverse, Solve, SVD, UPLO};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub type Vector = nd::Array1<C64>;
pub type Dense = nd::Array2<C64>;

/// Compressed sparse row matrix with complex entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<C64>,
}

impl Csr {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Csr { nrows, ncols, indptr: vec![0; nrows + 1], indices: vec![], data: vec![] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![ONE; n])
    }

    pub fn diag(d: &[C64]) -> Self {
        Self::from_triplets(d.len(), d.len(), d.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    pub fn diag_real(d: &[f64]) -> Self {
        Self::from_triplets(d.len(), d.len(), d.iter().enumerate().map(|(i, &v)| (i, i, C64::from(v))))
    }

    /// Duplicates are summed; exact zeros are dropped.
    pub fn from_triplets<T>(nrows: usize, ncols: usize, trip: T) -> Self
    where
        T: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut rows: Vec<BTreeMap<usize, C64>> = vec![BTreeMap::new(); nrows];
        for (i, j, v) in trip {
            assert!(i < nrows && j < ncols, "triplet ({i},{j}) out of {nrows}x{ncols}");
            *rows[i].entry(j).or_insert(ZERO) += v;
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = vec![];
        let mut data = vec![];
        indptr.push(0);
        for r in rows {
            for (j, v) in r {
                if v != ZERO {
                    indices.push(j);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Csr { nrows, ncols, indptr, indices, data }
    }

    pub fn from_dense(a: &Dense) -> Self {
        let (r, c) = a.dim();
        Self::from_triplets(
            r,
            c,
            a.indexed_iter().filter(|(_, v)| **v != ZERO).map(|((i, j), v)| (i, j, *v)),
        )
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            (self.indptr[i]..self.indptr[i + 1]).map(move |p| (i, self.indices[p], self.data[p]))
        })
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.indptr[i]..self.indptr[i + 1]).map(move |p| (self.indices[p], self.data[p]))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let lo = self.indptr[i];
        let hi = self.indptr[i + 1];
        match self.indices[lo..hi].binary_search(&j) {
            Ok(p) => self.data[lo + p],
            Err(_) => ZERO,
        }
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        assert_eq!(x.len(), self.ncols);
        let mut y = Vector::zeros(self.nrows);
        for i in 0..self.nrows {
            let mut s = ZERO;
            for p in self.indptr[i]..self.indptr[i + 1] {
                s += self.data[p] * x[self.indices[p]];
            }
            y[i] = s;
        }
        y
    }

    pub fn apply_mat(&self, x: &Dense) -> Dense {
        assert_eq!(x.nrows(), self.ncols);
        let k = x.ncols();
        let mut y = Dense::zeros((self.nrows, k));
        for i in 0..self.nrows {
            let mut yi = y.row_mut(i);
            for p in self.indptr[i]..self.indptr[i + 1] {
                let v = self.data[p];
                let xr = x.row(self.indices[p]);
                yi.zip_mut_with(&xr, |a, b| *a += v * b);
            }
        }
        y
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.ncols, self.nrows, self.triplets().map(|(i, j, v)| (j, i, v)))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.ncols, self.nrows, self.triplets().map(|(i, j, v)| (j, i, v.conj())))
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `a·self + b·other`
    pub fn lincomb(&self, a: C64, other: &Csr, b: C64) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        Self::from_triplets(
            self.nrows,
            self.ncols,
            self.triplets()
                .map(|(i, j, v)| (i, j, a * v))
                .chain(other.triplets().map(|(i, j, v)| (i, j, b * v))),
        )
    }

    pub fn add(&self, other: &Csr) -> Self {
        self.lincomb(ONE, other, ONE)
    }

    pub fn sub(&self, other: &Csr) -> Self {
        self.lincomb(ONE, other, -ONE)
    }

    pub fn matmul(&self, other: &Csr) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let mut indptr = vec![0];
        let mut indices = vec![];
        let mut data = vec![];
        let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
        for i in 0..self.nrows {
            acc.clear();
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    *acc.entry(j).or_insert(ZERO) += a * b;
                }
            }
            for (&j, &v) in acc.iter() {
                if v != ZERO {
                    indices.push(j);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Csr { nrows: self.nrows, ncols: other.ncols, indptr, indices, data }
    }

    /// Kronecker product; index `(i1, i2)` maps to `i1 * other.nrows + i2`.
    pub fn kron(&self, other: &Csr) -> Self {
        let nr = self.nrows * other.nrows;
        let nc = self.ncols * other.ncols;
        let mut trip = Vec::with_capacity(self.nnz() * other.nnz());
        for (i1, j1, a) in self.triplets() {
            for (i2, j2, b) in other.triplets() {
                trip.push((i1 * other.nrows + i2, j1 * other.ncols + j2, a * b));
            }
        }
        Self::from_triplets(nr, nc, trip)
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut cmap = vec![usize::MAX; self.ncols];
        for (jj, &j) in cols.iter().enumerate() {
            cmap[j] = jj;
        }
        let mut trip = vec![];
        for (ii, &i) in rows.iter().enumerate() {
            for (j, v) in self.row(i) {
                if cmap[j] != usize::MAX {
                    trip.push((ii, cmap[j], v));
                }
            }
        }
        Self::from_triplets(rows.len(), cols.len(), trip)
    }

    /// Embeds `self` (acting on the index subset) back into an `n x n` matrix.
    pub fn embed(&self, n: usize, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_triplets(n, n, self.triplets().map(|(i, j, v)| (rows[i], cols[j], v)))
    }

    pub fn to_dense(&self) -> Dense {
        let mut a = Dense::zeros((self.nrows, self.ncols));
        for (i, j, v) in self.triplets() {
            a[(i, j)] += v;
        }
        a
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Lower and upper bandwidths.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for (i, j, _) in self.triplets() {
            if i > j {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
        (kl, ku)
    }

    /// Writes the matrix in Matrix Market coordinate format (1-based).
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate complex general")?;
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (i, j, v) in self.triplets() {
            writeln!(w, "{} {} {:.17e} {:.17e}", i + 1, j + 1, v.re, v.im)?;
        }
        Ok(())
    }

    pub fn read_matrix_market(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Dimension(format!("matrix market: {m}"));
        let mut lines = text.lines().filter(|l| !l.starts_with('%') && !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("empty"))?;
        let dims: Vec<usize> = header.split_whitespace().map(|t| t.parse().map_err(|_| bad(t))).collect::<Result<_>>()?;
        if dims.len() != 3 {
            return Err(bad("size line"));
        }
        let mut trip = Vec::with_capacity(dims[2]);
        for l in lines {
            let t: Vec<&str> = l.split_whitespace().collect();
            if t.len() < 4 {
                return Err(bad(l));
            }
            let i: usize = t[0].parse().map_err(|_| bad(l))?;
            let j: usize = t[1].parse().map_err(|_| bad(l))?;
            let re: f64 = t[2].parse().map_err(|_| bad(l))?;
            let im: f64 = t[3].parse().map_err(|_| bad(l))?;
            trip.push((i - 1, j - 1, C64::new(re, im)));
        }
        Ok(Self::from_triplets(dims[0], dims[1], trip))
    }
}

/// LU factorization with partial pivoting of a banded matrix, rows stored contiguously.
///
/// Row `i` holds columns `i - kl ..= i + ku + kl`; the extra `kl` upper diagonals take
/// the fill produced by row interchanges.
#[derive(Clone, Debug)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    w: usize,
    a: Vec<C64>,
    ipiv: Vec<usize>,
    norm1: f64,
}

impl BandLu {
    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        i * self.w + (j + self.kl - i)
    }

    pub fn factor(m: &Csr) -> Result<Self> {
        if m.nrows != m.ncols {
            return Err(Error::Dimension(format!("{}x{} not square", m.nrows, m.ncols)));
        }
        let (kl, ku) = m.bandwidths();
        Self::factor_with(m, kl, ku)
    }

    pub fn factor_with(m: &Csr, kl: usize, ku: usize) -> Result<Self> {
        let n = m.nrows;
        let w = 2 * kl + ku + 1;
        let mut lu = BandLu { n, kl, ku, w, a: vec![ZERO; n * w], ipiv: vec![0; n], norm1: 0.0 };
        let mut colsum = vec![0.0; n];
        for (i, j, v) in m.triplets() {
            let k = lu.at(i, j);
            lu.a[k] = v;
            colsum[j] += v.norm();
        }
        lu.norm1 = colsum.into_iter().fold(0.0, f64::max);
        let ut = kl + ku;
        for j in 0..n {
            let last = (j + kl).min(n - 1);
            let mut p = j;
            let mut best = lu.a[lu.at(j, j)].norm();
            for i in j + 1..=last {
                let v = lu.a[lu.at(i, j)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(Error::FactorizationSingular(j));
            }
            lu.ipiv[j] = p;
            let cend = (j + ut).min(n - 1);
            if p != j {
                for c in j..=cend {
                    let a = lu.at(j, c);
                    let b = lu.at(p, c);
                    lu.a.swap(a, b);
                }
            }
            let piv = lu.a[lu.at(j, j)];
            let rj = lu.at(j, j);
            for i in j + 1..=last {
                let ij = lu.at(i, j);
                let l = lu.a[ij] / piv;
                lu.a[ij] = l;
                if l == ZERO {
                    continue;
                }
                let ri = lu.at(i, j);
                let len = cend - j;
                let (lo, hi) = if ri > rj { lu.a.split_at_mut(ri) } else { unreachable!() };
                let src = &lo[rj + 1..rj + 1 + len];
                let dst = &mut hi[1..1 + len];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= l * s;
                }
            }
        }
        Ok(lu)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    pub fn solve_in_place(&self, b: &mut [C64]) {
        let n = self.n;
        let ut = self.kl + self.ku;
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let bj = b[j];
            if bj != ZERO {
                for i in j + 1..=(j + self.kl).min(n - 1) {
                    b[i] -= self.a[self.at(i, j)] * bj;
                }
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            let r = self.at(i, i);
            for c in i + 1..=(i + ut).min(n - 1) {
                s -= self.a[r + (c - i)] * b[c];
            }
            b[i] = s / self.a[r];
        }
    }

    /// Solves `A^H x = b`.
    pub fn solve_adjoint_in_place(&self, b: &mut [C64]) {
        let n = self.n;
        let ut = self.kl + self.ku;
        for c in 0..n {
            let r = self.at(c, c);
            let yc = b[c] / self.a[r].conj();
            b[c] = yc;
            if yc != ZERO {
                for i in c + 1..=(c + ut).min(n - 1) {
                    b[i] -= self.a[r + (i - c)].conj() * yc;
                }
            }
        }
        for j in (0..n).rev() {
            let mut s = ZERO;
            for i in j + 1..=(j + self.kl).min(n - 1) {
                s += self.a[self.at(i, j)].conj() * b[i];
            }
            b[j] -= s;
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
        }
    }

    pub fn solve(&self, b: &Vector) -> Vector {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        Vector::from(x)
    }

    pub fn solve_adjoint(&self, b: &Vector) -> Vector {
        let mut x = b.to_vec();
        self.solve_adjoint_in_place(&mut x);
        Vector::from(x)
    }

    pub fn solve_mat(&self, b: &Dense) -> Dense {
        let mut out = Dense::zeros(b.dim());
        let mut col = vec![ZERO; self.n];
        for k in 0..b.ncols() {
            col.iter_mut().zip(b.column(k)).for_each(|(d, s)| *d = *s);
            self.solve_in_place(&mut col);
            out.column_mut(k).iter_mut().zip(&col).for_each(|(d, s)| *d = *s);
        }
        out
    }

    pub fn solve_adjoint_mat(&self, b: &Dense) -> Dense {
        let mut out = Dense::zeros(b.dim());
        let mut col = vec![ZERO; self.n];
        for k in 0..b.ncols() {
            col.iter_mut().zip(b.column(k)).for_each(|(d, s)| *d = *s);
            self.solve_adjoint_in_place(&mut col);
            out.column_mut(k).iter_mut().zip(&col).for_each(|(d, s)| *d = *s);
        }
        out
    }

    pub fn norm1(&self) -> f64 {
        self.norm1
    }

    /// Estimate of `‖A⁻¹‖₁`.
    pub fn inv_norm1_estimate(&self) -> f64 {
        self.cond1_estimate() / self.norm1
    }

    /// 1-norm condition estimate `‖A‖₁·‖A⁻¹‖₁` (Hager's method, a few sweeps).
    pub fn cond1_estimate(&self) -> f64 {
        let n = self.n;
        let mut x = vec![C64::from(1.0 / n as f64); n];
        let mut est = 0.0;
        for _ in 0..5 {
            let mut y = x.clone();
            self.solve_in_place(&mut y);
            let ny: f64 = y.iter().map(|v| v.norm()).sum();
            if ny <= est {
                break;
            }
            est = ny;
            let mut s: Vec<C64> = y.iter().map(|v| if v.norm() > 0.0 { v / v.norm() } else { ONE }).collect();
            self.solve_adjoint_in_place(&mut s);
            let (jmax, _) = s.iter().enumerate().fold((0, -1.0), |acc, (j, v)| if v.norm() > acc.1 { (j, v.norm()) } else { acc });
            x = vec![ZERO; n];
            x[jmax] = ONE;
        }
        est * self.norm1
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector<R: Rng>(rng: &mut R, n: usize) -> Vector {
    Vector::from_shape_fn(n, |_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn random_dense<R: Rng>(rng: &mut R, n: usize, k: usize) -> Dense {
    Dense::from_shape_fn((n, k), |_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn norm(x: &Vector) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn dot(x: &Vector, y: &Vector) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn adjoint(a: &Dense) -> Dense {
    a.t().mapv(|v| v.conj())
}

pub fn frob(a: &Dense) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn eye(n: usize) -> Dense {
    Dense::eye(n)
}

/// Eigenvalues and right eigenvectors of a general complex matrix.
pub fn eig(a: &Dense) -> Result<(nd::Array1<C64>, Dense)> {
    Ok(a.eig()?)
}

pub fn eigvals(a: &Dense) -> Result<nd::Array1<C64>> {
    use ndarray_linalg::EigVals;
    Ok(a.eigvals()?)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(a: &Dense) -> Result<(nd::Array1<f64>, Dense)> {
    let h = (a + &adjoint(a)).mapv(|v| v * 0.5);
    Ok(h.eigh(UPLO::Lower)?)
}

pub fn eigh_real(a: &nd::Array2<f64>) -> Result<(nd::Array1<f64>, nd::Array2<f64>)> {
    Ok(a.eigh(UPLO::Lower)?)
}

/// Singular values, descending.
pub fn singular_values(a: &Dense) -> Result<nd::Array1<f64>> {
    let (_, s, _) = a.svd(false, false)?;
    Ok(s)
}

pub fn svd(a: &Dense) -> Result<(Dense, nd::Array1<f64>, Dense)> {
    let (u, s, vt) = a.svd(true, true)?;
    Ok((u.unwrap(), s, vt.unwrap()))
}

pub fn solve(a: &Dense, b: &Vector) -> Result<Vector> {
    Ok(a.solve(b)?)
}

pub fn solve_mat(a: &Dense, b: &Dense) -> Result<Dense> {
    use ndarray_linalg::Factorize;
    let f = a.factorize()?;
    let mut out = Dense::zeros(b.dim());
    for k in 0..b.ncols() {
        let x = f.solve(&b.column(k).to_owned())?;
        out.column_mut(k).assign(&x);
    }
    Ok(out)
}

pub fn inv(a: &Dense) -> Result<Dense> {
    Ok(a.inv()?)
}

pub fn spectral_norm(a: &Dense) -> Result<f64> {
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(singular_values(a)?[0])
}

fn onenorm(a: &Dense) -> f64 {
    (0..a.ncols()).map(|j| a.column(j).iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Matrix exponential by Padé-13 scaling and squaring.
pub fn expm(a: &Dense) -> Result<Dense> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let n = a.nrows();
    let theta13 = 5.371920351148152;
    let nrm = onenorm(a);
    let s = if nrm > theta13 { (nrm / theta13).log2().ceil() as i32 } else { 0 };
    let a = a.mapv(|v| v * 2f64.powi(-s));
    let id = eye(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let c = |k: usize| C64::from(B[k]);
    let u_inner = &a6 * c(13) + &a4 * c(11) + &a2 * c(9);
    let u = a.dot(&(a6.dot(&u_inner) + &a6 * c(7) + &a4 * c(5) + &a2 * c(3) + &id * c(1)));
    let v_inner = &a6 * c(12) + &a4 * c(10) + &a2 * c(8);
    let v = a6.dot(&v_inner) + &a6 * c(6) + &a4 * c(4) + &a2 * c(2) + &id * c(0);
    let mut r = solve_mat(&(&v - &u), &(&v + &u))?;
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

/// Operator 2-norm estimate of an implicitly given map by power iteration on `A^H A`.
pub fn power_norm<F, G>(n: usize, apply: F, apply_adj: G, steps: usize, restarts: usize, tol: f64, seed: u64) -> f64
where
    F: Fn(&Vector) -> Vector,
    G: Fn(&Vector) -> Vector,
{
    let mut rng = rng(seed);
    let mut best = 0.0f64;
    for _ in 0..restarts.max(1) {
        let mut x = random_vector(&mut rng, n);
        let nx = norm(&x);
        x.mapv_inplace(|v| v / nx);
        let mut est = 0.0;
        for _ in 0..steps {
            let y = apply(&x);
            let ny = norm(&y);
            let z = apply_adj(&y);
            let nz = norm(&z);
            if nz == 0.0 {
                break;
            }
            let prev = est;
            est = ny;
            x = z.mapv(|v| v / nz);
            if (est - prev).abs() <= tol * est {
                break;
            }
        }
        best = best.max(est);
    }
    best
}

/// Gauss–Legendre nodes and weights on [-1, 1] (Golub–Welsch).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = nd::Array2::<f64>::zeros((n, n));
    for k in 1..n {
        let kf = k as f64;
        let b = kf / (4.0 * kf * kf - 1.0).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let (x, v) = j.eigh(UPLO::Lower).expect("tridiagonal eigh");
    let w: Vec<f64> = (0..n).map(|k| 2.0 * v[(0, k)] * v[(0, k)]).collect();
    (x.to_vec(), w)
}

/// Modified Gram–Schmidt with reorthogonalization; returns an orthonormal basis of the
/// column span, dropping columns whose residual falls below `tol` relative to input.
pub fn orthonormalize(a: &Dense, against: Option<&Dense>, tol: f64) -> Dense {
    let mut cols: Vec<Vector> = vec![];
    for k in 0..a.ncols() {
        let mut v = a.column(k).to_owned();
        let n0 = norm(&v);
        if n0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            if let Some(q) = against {
                for j in 0..q.ncols() {
                    let qj = q.column(j);
                    let c: C64 = qj.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                    v.zip_mut_with(&qj, |x, y| *x -= c * y);
                }
            }
            for q in &cols {
                let c = dot(q, &v);
                v.zip_mut_with(q, |x, y| *x -= c * y);
            }
        }
        let nv = norm(&v);
        if nv > tol * n0 {
            cols.push(v.mapv(|x| x / nv));
        }
    }
    let mut out = Dense::zeros((a.nrows(), cols.len()));
    for (k, c) in cols.iter().enumerate() {
        out.column_mut(k).assign(c);
    }
    out
}

/// Symmetric Hausdorff distance between two finite point sets in the complex plane.
pub fn hausdorff(a: &[C64], b: &[C64]) -> f64 {
    let one = |x: &[C64], y: &[C64]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    one(a, b).max(one(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_band(n: usize, kl: usize, ku: usize, seed: u64) -> Csr {
        let mut r = rng(seed);
        let mut t = vec![];
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                t.push((i, j, C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))));
            }
        }
        Csr::from_triplets(n, n, t)
    }

    #[test]
    fn band_lu_matches_dense_solve() {
        let a = random_band(60, 3, 5, 1);
        let lu = BandLu::factor(&a).unwrap();
        let b = random_vector(&mut rng(2), 60);
        let x = lu.solve(&b);
        let r = a.apply(&x) - &b;
        assert!(norm(&r) < 1e-10 * norm(&b));
        let y = lu.solve_adjoint(&b);
        let r = a.adjoint().apply(&y) - &b;
        assert!(norm(&r) < 1e-10 * norm(&b));
    }

    #[test]
    fn band_lu_needs_pivoting() {
        let a = Csr::from_triplets(3, 3, vec![(0, 1, ONE), (1, 0, ONE), (1, 2, ONE), (2, 1, ONE), (2, 2, ONE)]);
        let lu = BandLu::factor(&a).unwrap();
        let b = Vector::from(vec![ONE, C64::from(2.0), C64::from(3.0)]);
        let x = lu.solve(&b);
        assert!(norm(&(a.apply(&x) - &b)) < 1e-14);
        let y = lu.solve_adjoint(&b);
        assert!(norm(&(a.adjoint().apply(&y) - &b)) < 1e-14);
    }

    #[test]
    fn kron_index_convention() {
        let a = Csr::diag_real(&[1.0, 2.0]);
        let b = Csr::from_triplets(2, 2, vec![(0, 1, ONE)]);
        let k = a.kron(&b);
        assert_eq!(k.get(2, 3), C64::from(2.0));
        assert_eq!(k.get(0, 1), ONE);
    }

    #[test]
    fn expm_of_diagonal_and_nilpotent() {
        let mut a = Dense::zeros((3, 3));
        a[(0, 0)] = C64::from(-30.0);
        a[(1, 2)] = C64::from(2.0);
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)].re - (-30f64).exp()).abs() < 1e-25);
        assert!((e[(1, 2)] - C64::from(2.0)).norm() < 1e-13);
        assert!((e[(2, 2)] - ONE).norm() < 1e-14);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn matrix_market_round_trip() {
        let a = random_band(7, 1, 2, 5);
        let mut buf = vec![];
        a.write_matrix_market(&mut buf).unwrap();
        let b = Csr::read_matrix_market(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
