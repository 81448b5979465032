//! Semiclassical Witten Laplacian on the circle in the Fourier basis.

use ndarray as nd;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::basis::{fourier_derivative, fourier_multiplier, toeplitz, Discretization};
use crate::error::{Error, Result};
use crate::linalg::{adjoint, svd, Dense, ZERO};
use crate::potential::{Barcode, Potential};

/// Required ratio between the first non-cluster eigenvalue and the cluster top.
pub const GAP_RATIO: f64 = 16.0;

#[derive(Clone, Debug)]
pub struct WittenAssembly {
    pub h: f64,
    pub k_max: usize,
    pub circumference: f64,
    pub potential: Potential,
    /// `h∂ + V′` on modes `|k| <= K` (square truncation).
    pub d: Dense,
    /// `h∂ + V′` from modes `|k| <= K` into `|k| <= K + deg V`.
    pub d_pad: Dense,
    /// `−h∂ + V′` from `|k| <= K` into `|k| <= K + deg V`.
    pub d_star_pad: Dense,
    /// Galerkin matrices of `−h²∂² + V′² ∓ hV″`.
    pub galerkin: [Dense; 2],
    /// Square-factored Laplacians `d†d` and `dd†`.
    pub delta: [Dense; 2],
    svd_u: Dense,
    svd_s: nd::Array1<f64>,
    svd_v: Dense,
}

fn padded(d: &Discretization, v: &Potential, h: f64, sign: f64) -> Result<Dense> {
    let deg = v.degree();
    let big = d.k_max + deg;
    let nk = d.nk();
    let nb = 2 * big + 1;
    let coeffs = v.exp_coeffs(1);
    let w = d.omega();
    let mut out = Dense::zeros((nb, nk));
    for j in 0..nk {
        let kj = j as i64 - d.k_max as i64;
        out[(j + deg, j)] += C64::new(0.0, sign * h * w * kj as f64);
        for (m, c) in coeffs.iter().enumerate() {
            let i = j + m;
            out[(i, j)] += c;
        }
    }
    Ok(out)
}

impl WittenAssembly {
    pub fn new(d: &Discretization, v: &Potential, h: f64) -> Result<Self> {
        if !(h > 0.0 && h <= 1.0) {
            return Err(Error::Dimension(format!("h = {h} outside (0, 1]")));
        }
        if (v.circumference - d.circumference).abs() > 1e-12 * d.circumference {
            return Err(Error::Dimension("potential and discretization circumferences differ".into()));
        }
        if 2 * v.degree() > d.k_max {
            return Err(Error::CutoffTooSmall(format!("deg V = {} needs K >= {}", v.degree(), 2 * v.degree())));
        }
        let dq = fourier_derivative(d).to_dense();
        let vp = fourier_multiplier(d.k_max, v, 1)?.to_dense();
        let dmat = dq.mapv(|x| x * h) + &vp;
        let d_pad = padded(d, v, h, 1.0)?;
        let d_star_pad = padded(d, v, h, -1.0)?;

        let vp_c = v.exp_coeffs(1);
        let vp2 = toeplitz(&crate::basis::convolve(&vp_c, &vp_c), d.k_max).to_dense();
        let vpp = fourier_multiplier(d.k_max, v, 2)?.to_dense();
        let lap = dq.dot(&dq).mapv(|x| -x * h * h);
        let g0 = &lap + &vp2 - &vpp.mapv(|x| x * h);
        let g1 = &lap + &vp2 + &vpp.mapv(|x| x * h);

        let (u, s, vt) = svd(&dmat)?;
        let svd_v = adjoint(&vt);
        let delta = [adjoint(&dmat).dot(&dmat), dmat.dot(&adjoint(&dmat))];
        Ok(WittenAssembly {
            h,
            k_max: d.k_max,
            circumference: d.circumference,
            potential: v.clone(),
            d: dmat,
            d_pad,
            d_star_pad,
            galerkin: [g0, g1],
            delta,
            svd_u: u,
            svd_s: s,
            svd_v,
        })
    }

    pub fn nk(&self) -> usize {
        2 * self.k_max + 1
    }

    /// Eigenvalues of `Δ^{(p)}` (square-factored), ascending, with eigenvectors as columns.
    ///
    /// Obtained from the SVD of `d`, so small eigenvalues carry absolute error
    /// `O((ε‖d‖)²)` instead of `O(ε‖Δ‖)`.
    pub fn eigen(&self, p: usize) -> (Vec<f64>, Dense) {
        let n = self.svd_s.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|a, b| self.svd_s[*a].partial_cmp(&self.svd_s[*b]).unwrap());
        let src = if p == 0 { &self.svd_v } else { &self.svd_u };
        let mut vecs = Dense::zeros((n, n));
        let mut vals = Vec::with_capacity(n);
        for (j, &o) in order.iter().enumerate() {
            vals.push(self.svd_s[o] * self.svd_s[o]);
            vecs.column_mut(j).assign(&src.column(o));
        }
        (vals, vecs)
    }

    pub fn eigenvalues(&self, p: usize) -> Vec<f64> {
        self.eigen(p).0
    }

    /// Singular values of `d` in increasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s = self.svd_s.to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s
    }

    pub fn galerkin_eigenvalues(&self, p: usize) -> Result<Vec<f64>> {
        Ok(crate::linalg::eigh(&self.galerkin[p])?.0.to_vec())
    }

    /// `max |Δ_galerkin − Δ_factored|` on modes `|k| <= K − band`, relative to `‖Δ‖`.
    pub fn factorization_residual(&self, p: usize, band: usize) -> f64 {
        let k = self.k_max as i64;
        let band = band as i64;
        let idx: Vec<usize> = (0..self.nk()).filter(|&i| (i as i64 - k).abs() <= k - band).collect();
        let diff = &self.galerkin[p] - &self.delta[p];
        let scale = self.delta[p].iter().map(|x| x.norm()).fold(0.0, f64::max);
        let mut m: f64 = 0.0;
        for &i in &idx {
            for &j in &idx {
                m = m.max(diff[(i, j)].norm());
            }
        }
        m / scale
    }

    /// `max |Δ_galerkin − d_pad†d_pad|` (resp. `d*_pad†d*_pad`) over the whole matrix.
    pub fn padded_residual(&self, p: usize) -> f64 {
        let f = if p == 0 { &self.d_pad } else { &self.d_star_pad };
        let diff = &self.galerkin[p] - &adjoint(f).dot(f);
        let scale = self.galerkin[p].iter().map(|x| x.norm()).fold(0.0, f64::max);
        diff.iter().map(|x| x.norm()).fold(0.0, f64::max) / scale
    }

    /// Fourier coefficients of `e^{−V/h}` (normalized), by FFT-free quadrature on a fine grid.
    pub fn ground_state(&self) -> nd::Array1<C64> {
        let n = 8 * self.nk() + 64;
        let l = self.circumference;
        let w = 2.0 * std::f64::consts::PI / l;
        let vals: Vec<f64> = (0..n).map(|j| -self.potential.eval(l * j as f64 / n as f64, 0) / self.h).collect();
        let vmax = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let k = self.k_max as i64;
        let mut out = nd::Array1::from_elem(self.nk(), ZERO);
        for (idx, kk) in (-k..=k).enumerate() {
            let mut s = ZERO;
            for (j, v) in vals.iter().enumerate() {
                let q = l * j as f64 / n as f64;
                s += C64::from_polar((v - vmax).exp(), -w * kk as f64 * q);
            }
            out[idx] = s;
        }
        let nrm = crate::linalg::norm(&out);
        out.mapv(|x| x / nrm)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapCertificate {
    pub h: f64,
    pub rho: f64,
    /// Cluster eigenvalues of `½Δ^{(0)}` and `½Δ^{(1)}`.
    pub cluster: [Vec<f64>; 2],
    pub counts: [usize; 2],
    pub next: f64,
    pub ratio: f64,
    pub inclusions_hold: bool,
}

/// Picks `ϱ_h` as a quarter of the first eigenvalue of `½Δ` outside the expected cluster.
pub fn gap_certificate(w: &WittenAssembly, bc: &Barcode) -> Result<GapCertificate> {
    // on a circle #maxima = #minima = number of degree-0 bars
    let n_min = bc.bars.iter().filter(|b| b.degree == 0).count();
    let expected = [n_min, n_min];
    gap_certificate_with_counts(w, expected)
}

pub fn gap_certificate_with_counts(w: &WittenAssembly, expected: [usize; 2]) -> Result<GapCertificate> {
    let mut cluster = [vec![], vec![]];
    let mut next = f64::INFINITY;
    let mut top: f64 = 0.0;
    for p in 0..2 {
        let ev: Vec<f64> = w.eigenvalues(p).iter().map(|x| 0.5 * x).collect();
        if ev.len() <= expected[p] {
            return Err(Error::CutoffTooSmall("Fourier space smaller than the expected cluster".into()));
        }
        cluster[p] = ev[..expected[p]].to_vec();
        top = top.max(ev[expected[p] - 1]);
        next = next.min(ev[expected[p]]);
    }
    let ratio = if top > 0.0 { next / top } else { f64::INFINITY };
    if ratio < GAP_RATIO {
        return Err(Error::NoGap { ratio, required: GAP_RATIO });
    }
    let rho = next / 4.0;
    let mut ok = true;
    for p in 0..2 {
        for x in w.eigenvalues(p).iter().map(|x| 0.5 * x) {
            let inside = x <= rho;
            ok &= if inside { x <= rho / 2.0 } else { x >= 4.0 * rho * (1.0 - 1e-12) };
        }
    }
    let counts = [0, 1].map(|p| w.eigenvalues(p).iter().filter(|x| 0.5 * **x <= rho).count());
    Ok(GapCertificate { h: w.h, rho, cluster, counts, next, ratio, inclusions_hold: ok })
}

/// Smooth cutoff equal to 1 on `[−1, 1]` and supported in `[−2, 2]`.
pub fn chi(t: f64) -> f64 {
    let f = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let a = t.abs();
    if a <= 1.0 {
        return 1.0;
    }
    if a >= 2.0 {
        return 0.0;
    }
    let u = f(2.0 - a);
    u / (u + f(a - 1.0))
}

/// `Q̃ = A²χ((C_d + Δ^{(p)})/(LA)²)` for `p = 0, 1`, by functional calculus. `Δ_{V,h}` on `ℓ` is
/// unitarily `Δ_{V(h·),1}` on `ℓ/h`, so this is the rescaled-picture truncation.
pub fn spectral_truncation(w: &WittenAssembly, a: f64, l: f64, c_d: f64, profile: &dyn Fn(f64) -> f64) -> [Dense; 2] {
    [0, 1].map(|p| {
        let (vals, vecs) = w.eigen(p);
        let scale = (l * a).powi(2);
        let f: Vec<f64> = vals.iter().map(|x| a * a * profile((c_d + x) / scale)).collect();
        let mut scaled = vecs.clone();
        for (j, fj) in f.iter().enumerate() {
            scaled.column_mut(j).mapv_inplace(|x| x * *fj);
        }
        scaled.dot(&adjoint(&vecs))
    })
}

/// Default `C_d = 2.5·C_g`.
pub fn default_cd(c_g: f64) -> f64 {
    2.5 * c_g
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArrheniusFit {
    pub intercept: f64,
    pub slope: f64,
    pub points: Vec<(f64, f64)>,
}

/// Least-squares line through `(h, −h log λ)`; the intercept is the `h → 0` rate.
pub fn arrhenius_fit(pairs: &[(f64, f64)]) -> ArrheniusFit {
    let pts: Vec<(f64, f64)> = pairs.iter().map(|(h, l)| (*h, -h * l.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    ArrheniusFit { intercept: my - slope * mx, slope, points: pts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn free_laplacian() {
        let d = Discretization::new(6, 2, 2.0 * PI);
        let w = WittenAssembly::new(&d, &Potential::zero(2.0 * PI), 1.0).unwrap();
        let ev = w.eigenvalues(0);
        let mut expect: Vec<f64> = (-6i64..=6).map(|k| (k * k) as f64).collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in ev.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn padded_factorization_is_exact() {
        let d = Discretization::new(12, 2, 2.0 * PI);
        let w = WittenAssembly::new(&d, &Potential::double_well(), 0.3).unwrap();
        assert!(w.padded_residual(0) < 1e-14);
        assert!(w.padded_residual(1) < 1e-14);
        assert!(w.factorization_residual(0, 2) < 1e-14);
        assert!(w.factorization_residual(1, 2) < 1e-14);
    }

    #[test]
    fn kernel_is_boltzmann() {
        let d = Discretization::new(24, 2, 2.0 * PI);
        let w = WittenAssembly::new(&d, &Potential::single_well(), 0.5).unwrap();
        let g = w.ground_state();
        let r = crate::linalg::norm(&w.galerkin[0].dot(&g));
        let scale = crate::linalg::spectral_norm(&w.galerkin[0]).unwrap();
        assert!(r < 1e-10 * scale, "{r}");
    }

    #[test]
    fn chi_profile() {
        assert_eq!(chi(0.3), 1.0);
        assert_eq!(chi(-1.0), 1.0);
        assert_eq!(chi(2.0), 0.0);
        assert!((chi(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..100 {
            let c = chi(1.0 + i as f64 / 100.0);
            assert!(c <= prev);
            prev = c;
        }
    }

    #[test]
    fn double_well_counts() {
        let d = Discretization::new(24, 2, 2.0 * PI);
        let v = Potential::double_well();
        let w = WittenAssembly::new(&d, &v, 0.15).unwrap();
        let cert = gap_certificate(&w, &v.barcode(4096).unwrap()).unwrap();
        assert_eq!(cert.counts, [2, 2]);
        assert!(cert.inclusions_hold);
    }

    #[test]
    fn arrhenius_exact_line() {
        let pts: Vec<(f64, f64)> = [0.3f64, 0.2, 0.1].iter().map(|&h| (h, (-(3.0 + 0.5 * h) / h).exp())).collect();
        let f = arrhenius_fit(&pts);
        assert!((f.intercept - 3.0).abs() < 1e-10);
        assert!((f.slope - 0.5).abs() < 1e-10);
    }
}
