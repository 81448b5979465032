//! Fourier ⊗ Hermite ⊗ fiber-form basis on S¹ × ℝ.
//!
//! Flat index of `(c, k, n)` is `((n·(2K+1) + k + K)·4 + c)`: Hermite level outermost, fiber
//! component innermost. The scalar index drops the fiber factor. With this order every
//! operator assembled here is banded with bandwidth about `4·(2K+1+deg V)`.

use ndarray as nd;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Csr, Vector, I, ONE, ZERO};
use crate::potential::Potential;

/// Total degree of fiber components `1, dq, dp, dq∧dp`.
pub const DEGREE: [usize; 4] = [0, 1, 1, 2];
/// Vertical degree of the same components.
pub const VERTICAL: [usize; 4] = [0, 0, 1, 1];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    #[serde(rename = "K")]
    pub k_max: usize,
    #[serde(rename = "M")]
    pub m_max: usize,
    pub circumference: f64,
    #[serde(default = "default_cg", rename = "C_g")]
    pub c_g: f64,
}

fn default_cg() -> f64 {
    1.0
}

impl Discretization {
    pub fn new(k_max: usize, m_max: usize, circumference: f64) -> Self {
        Discretization { k_max, m_max, circumference, c_g: 1.0 }
    }

    pub fn nk(&self) -> usize {
        2 * self.k_max + 1
    }

    pub fn nh(&self) -> usize {
        self.m_max + 1
    }

    pub fn scalar_dim(&self) -> usize {
        self.nk() * self.nh()
    }

    pub fn dim(&self) -> usize {
        4 * self.scalar_dim()
    }

    pub fn omega(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.circumference
    }

    pub fn scalar_index(&self, k: i64, n: usize) -> usize {
        debug_assert!(k.unsigned_abs() as usize <= self.k_max && n <= self.m_max);
        n * self.nk() + (k + self.k_max as i64) as usize
    }

    pub fn index(&self, c: usize, k: i64, n: usize) -> usize {
        self.scalar_index(k, n) * 4 + c
    }

    /// Inverse of [`index`](Self::index): `(c, k, n)`.
    pub fn unindex(&self, flat: usize) -> (usize, i64, usize) {
        let c = flat % 4;
        let s = flat / 4;
        let n = s / self.nk();
        let k = (s % self.nk()) as i64 - self.k_max as i64;
        (c, k, n)
    }

    pub fn modes(&self) -> impl Iterator<Item = i64> {
        let k = self.k_max as i64;
        -k..=k
    }

    /// Flat indices of total degree `p`, increasing.
    pub fn degree_indices(&self, p: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&i| DEGREE[i % 4] == p).collect()
    }

    /// Flat indices with `n <= n_max` and `|k| <= k_max`.
    pub fn interior(&self, n_max: usize, k_max: usize) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| {
                let (_, k, n) = self.unindex(i);
                n <= n_max && k.unsigned_abs() as usize <= k_max
            })
            .collect()
    }

    pub fn check(&self) -> Result<()> {
        if self.k_max < 1 || self.m_max < 2 {
            return Err(Error::CutoffTooSmall(format!("need K >= 1 and M >= 2, got K={} M={}", self.k_max, self.m_max)));
        }
        if !(self.circumference > 0.0) || self.c_g < 1.0 {
            return Err(Error::Dimension("circumference must be positive and C_g >= 1".into()));
        }
        Ok(())
    }
}

/// 4×4 real matrices acting on `Λ(dq, dp)` in the order `1, dq, dp, dq∧dp`.
#[derive(Clone, Debug)]
pub struct FiberAlgebra {
    pub dq_wedge: nd::Array2<f64>,
    pub dp_wedge: nd::Array2<f64>,
    pub i_dq: nd::Array2<f64>,
    pub i_dp: nd::Array2<f64>,
    pub mu0: nd::Array2<f64>,
    pub lambda0: nd::Array2<f64>,
    pub n_v: nd::Array2<f64>,
    pub r_sign: nd::Array2<f64>,
}

fn m4(entries: &[(usize, usize, f64)]) -> nd::Array2<f64> {
    let mut a = nd::Array2::zeros((4, 4));
    for &(i, j, v) in entries {
        a[(i, j)] = v;
    }
    a
}

impl Default for FiberAlgebra {
    fn default() -> Self {
        Self::new()
    }
}

impl FiberAlgebra {
    pub fn new() -> Self {
        let dq_wedge = m4(&[(1, 0, 1.0), (3, 2, 1.0)]);
        // dp ∧ dq = -dq ∧ dp
        let dp_wedge = m4(&[(2, 0, 1.0), (3, 1, -1.0)]);
        let mu0 = m4(&[(2, 1, 1.0)]);
        FiberAlgebra {
            i_dq: dq_wedge.t().to_owned(),
            i_dp: dp_wedge.t().to_owned(),
            lambda0: mu0.t().to_owned(),
            dq_wedge,
            dp_wedge,
            mu0,
            n_v: m4(&[(2, 2, 1.0), (3, 3, 1.0)]),
            r_sign: m4(&[(0, 0, 1.0), (1, 1, 1.0), (2, 2, -1.0), (3, 3, -1.0)]),
        }
    }

    /// `(dq∧ − dp∧)(i_∂q + i_∂p)`: kills `1` and `dq∧dp`, sends `dq` and `dp` to `dq − dp`.
    pub fn hessian_fiber(&self) -> nd::Array2<f64> {
        (&self.dq_wedge - &self.dp_wedge).dot(&(&self.i_dq + &self.i_dp))
    }

    pub fn to_csr(a: &nd::Array2<f64>) -> Csr {
        Csr::from_triplets(
            a.nrows(),
            a.ncols(),
            a.indexed_iter().filter(|(_, v)| **v != 0.0).map(|((i, j), v)| (i, j, C64::from(*v))),
        )
    }
}

/// Scalar operators on the `(2K+1)(M+1)`-dimensional space.
#[derive(Clone, Debug)]
pub struct ScalarGenerators {
    pub dq: Csr,
    pub mult_p: Csr,
    pub dp: Csr,
    pub osc: Csr,
    pub parity: Csr,
    pub lower: Csr,
    pub raise: Csr,
}

/// Hermite lowering operator `a h_n = √n h_{n-1}` on levels `0..=M`.
pub fn hermite_lower(nh: usize) -> Csr {
    Csr::from_triplets(nh, nh, (1..nh).map(|n| (n - 1, n, C64::from((n as f64).sqrt()))))
}

pub fn hermite_raise(nh: usize) -> Csr {
    hermite_lower(nh).transpose()
}

/// `diag(i ω k)` over `|k| <= K`.
pub fn fourier_derivative(d: &Discretization) -> Csr {
    let w = d.omega();
    Csr::diag(&d.modes().map(|k| I * (w * k as f64)).collect::<Vec<_>>())
}

/// Galerkin (Toeplitz) matrix of multiplication by a trigonometric polynomial with centered
/// coefficients `c[j]`, `j = k + deg`.
pub fn toeplitz(coeffs: &[C64], k_max: usize) -> Csr {
    let deg = (coeffs.len() - 1) / 2;
    let nk = 2 * k_max + 1;
    let mut t = vec![];
    for i in 0..nk {
        for j in 0..nk {
            let d = i as i64 - j as i64;
            if d.unsigned_abs() as usize <= deg {
                let c = coeffs[(d + deg as i64) as usize];
                if c != ZERO {
                    t.push((i, j, c));
                }
            }
        }
    }
    Csr::from_triplets(nk, nk, t)
}

/// Centered coefficients of a product of two trigonometric polynomials.
pub fn convolve(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn build_scalar_generators(d: &Discretization) -> Result<ScalarGenerators> {
    d.check()?;
    let nh = d.nh();
    let ik = Csr::identity(d.nk());
    let ih = Csr::identity(nh);
    let a = hermite_lower(nh);
    let ad = hermite_raise(nh);
    let s = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    let p = a.lincomb(s, &ad, s);
    let dp = a.lincomb(s, &ad, -s);
    let osc = Csr::diag_real(&(0..nh).map(|n| n as f64 + 0.5).collect::<Vec<_>>());
    let par = Csr::diag_real(&(0..nh).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect::<Vec<_>>());
    Ok(ScalarGenerators {
        dq: ih.kron(&fourier_derivative(d)),
        mult_p: p.kron(&ik),
        dp: dp.kron(&ik),
        osc: osc.kron(&ik),
        parity: par.kron(&ik),
        lower: a.kron(&ik),
        raise: ad.kron(&ik),
    })
}

/// Fourier-only Toeplitz matrix of `V^{(order)}`.
pub fn fourier_multiplier(k_max: usize, v: &Potential, order: u8) -> Result<Csr> {
    let deg = v.degree();
    if 2 * deg > 2 * k_max + 1 {
        return Err(Error::CutoffTooSmall(format!("potential degree {deg} aliases at K={k_max}")));
    }
    Ok(toeplitz(&v.exp_coeffs(order), k_max))
}

/// Multiplication by `V^{(order)}` on the scalar space (identity in Hermite).
pub fn build_multiplier(d: &Discretization, v: &Potential, order: u8) -> Result<Csr> {
    Ok(Csr::identity(d.nh()).kron(&fourier_multiplier(d.k_max, v, order)?))
}

/// Lifts a scalar operator to the full space as `scalar ⊗ fiber`.
pub fn lift(scalar: &Csr, fiber: &nd::Array2<f64>) -> Csr {
    scalar.kron(&FiberAlgebra::to_csr(fiber))
}

pub fn lift_identity(scalar: &Csr) -> Csr {
    scalar.kron(&Csr::identity(4))
}

fn w2_entry(d: &Discretization, k: i64, n: usize, h: f64) -> f64 {
    let xi = h * d.omega() * k as f64;
    let o = n as f64 + 0.5;
    d.c_g + xi * xi + d.c_g * o * o
}

/// Diagonal of `(W²)^{s/2}` over the full space; `h` rescales the horizontal frequency.
pub fn w2_diag(d: &Discretization, s: f64, h: f64) -> Vec<f64> {
    (0..d.dim())
        .map(|i| {
            let (_, k, n) = d.unindex(i);
            w2_entry(d, k, n, h).powf(s / 2.0)
        })
        .collect()
}

pub fn build_w2(d: &Discretization, s: f64) -> Result<Csr> {
    if d.c_g < 1.0 {
        return Err(Error::Dimension("C_g must be >= 1".into()));
    }
    Ok(Csr::diag_real(&w2_diag(d, s, 1.0)))
}

/// Diagonal of `𝒪^{s₁/2}(W²)^{s₂/2}`.
pub fn sobolev_weights(d: &Discretization, s1: f64, s2: f64, h: f64) -> Vec<f64> {
    (0..d.dim())
        .map(|i| {
            let (_, k, n) = d.unindex(i);
            (n as f64 + 0.5).powf(s1 / 2.0) * w2_entry(d, k, n, h).powf(s2 / 2.0)
        })
        .collect()
}

/// `‖𝒪^{s₁/2}(W²)^{s₂/2}u‖`; pass `h = 1` for the plain norm.
pub fn sobolev_norm(u: &Vector, d: &Discretization, s1: f64, s2: f64, h: f64) -> Result<f64> {
    if u.len() != d.dim() {
        return Err(Error::Dimension(format!("vector of length {} for dimension {}", u.len(), d.dim())));
    }
    let w = sobolev_weights(d, s1, s2, h);
    Ok(u.iter().zip(&w).map(|(x, w)| (x * w).norm_sqr()).sum::<f64>().sqrt())
}

/// L²-normalized Hermite functions `h_0..=h_m` at `p`, by the stable three-term recurrence.
pub fn hermite_functions(m: usize, p: f64) -> Vec<f64> {
    let mut h = vec![0.0; m + 1];
    h[0] = std::f64::consts::PI.powf(-0.25) * (-p * p / 2.0).exp();
    if m >= 1 {
        h[1] = std::f64::consts::SQRT_2 * p * h[0];
    }
    for n in 2..=m {
        let nf = n as f64;
        h[n] = (2.0 / nf).sqrt() * p * h[n - 1] - ((nf - 1.0) / nf).sqrt() * h[n - 2];
    }
    h
}

/// Gauss–Hermite nodes and weights for `∫ f(p) e^{-p²} dp`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = nd::Array2::<f64>::zeros((n, n));
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let (x, v) = crate::linalg::eigh_real(&j).expect("tridiagonal eigh");
    let mu0 = std::f64::consts::PI.sqrt();
    let w = (0..n).map(|k| mu0 * v[(0, k)] * v[(0, k)]).collect();
    (x.to_vec(), w)
}

/// Fiber component vector for a single basis form.
pub fn fiber_unit(c: usize) -> nd::Array1<f64> {
    let mut e = nd::Array1::zeros(4);
    e[c] = 1.0;
    e
}

pub fn unit_vector(d: &Discretization, c: usize, k: i64, n: usize) -> Vector {
    let mut u = Vector::zeros(d.dim());
    u[d.index(c, k, n)] = ONE;
    u
}
