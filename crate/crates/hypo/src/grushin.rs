//! Grushin problem for `B + Q − z` relative to `Ran π₀`, its explicit inverse and resolvent
//! comparisons with the Witten Laplacian.

use ndarray as nd;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{self, DEGREE};
use crate::bismut::{BismutAssembly, GroundProjector, Sign};
use crate::error::{Error, Result};
use crate::linalg::{self, BandLu, Csr, Dense, Vector, ZERO};
use crate::witten::WittenAssembly;

/// Condition estimate above which the `π⊥` solve is rejected.
pub const PERP_COND_MAX: f64 = 1e12;

/// `(op − z)` restricted to a coordinate subset, factored per total degree.
#[derive(Clone, Debug)]
pub struct GradedSolver {
    pub n: usize,
    pub z: C64,
    parts: Vec<(Vec<usize>, BandLu)>,
}

impl GradedSolver {
    /// Factors `op[S_p, S_p] − z` for each degree `p`, where `S` is `subset` (all coordinates if `None`).
    pub fn new(op: &Csr, subset: Option<&[usize]>, z: C64) -> Result<Self> {
        Self::with_degrees(op, subset, z, &[0, 1, 2])
    }

    /// As [`new`](Self::new) but only for the listed degrees; other coordinates solve to zero.
    pub fn with_degrees(op: &Csr, subset: Option<&[usize]>, z: C64, degrees: &[usize]) -> Result<Self> {
        let n = op.nrows;
        let keep: Vec<bool> = match subset {
            Some(s) => {
                let mut k = vec![false; n];
                s.iter().for_each(|&i| k[i] = true);
                k
            }
            None => vec![true; n],
        };
        let groups: Vec<Vec<usize>> = degrees.iter().map(|&p| (0..n).filter(|&i| keep[i] && DEGREE[i % 4] == p).collect()).collect();
        let parts = groups
            .into_par_iter()
            .filter(|idx| !idx.is_empty())
            .map(|idx| {
                let m = op.submatrix(&idx, &idx).sub(&Csr::identity(idx.len()).scale(z));
                BandLu::factor(&m).map(|lu| (idx, lu))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GradedSolver { n, z, parts })
    }

    pub fn cond_estimate(&self) -> f64 {
        self.parts.iter().map(|(_, lu)| lu.cond1_estimate()).fold(0.0, f64::max)
    }

    fn run(&self, f: &Vector, adjoint: bool) -> Vector {
        let mut out = Vector::from_elem(self.n, ZERO);
        for (idx, lu) in &self.parts {
            let mut b: Vec<C64> = idx.iter().map(|&i| f[i]).collect();
            if adjoint {
                lu.solve_adjoint_in_place(&mut b);
            } else {
                lu.solve_in_place(&mut b);
            }
            for (j, &i) in idx.iter().enumerate() {
                out[i] = b[j];
            }
        }
        out
    }

    pub fn solve(&self, f: &Vector) -> Vector {
        self.run(f, false)
    }

    pub fn solve_adjoint(&self, f: &Vector) -> Vector {
        self.run(f, true)
    }

    pub fn solve_mat(&self, f: &Dense) -> Dense {
        let cols: Vec<Vector> = (0..f.ncols()).into_par_iter().map(|j| self.solve(&f.column(j).to_owned())).collect();
        let mut out = Dense::zeros(f.dim());
        for (j, c) in cols.into_iter().enumerate() {
            out.column_mut(j).assign(&c);
        }
        out
    }
}

/// Base degree carried by Bismut degree `p` on `ker α`.
pub fn base_degree(sign: Sign, p: usize) -> Option<usize> {
    match (sign, p) {
        (Sign::Plus, 0) | (Sign::Minus, 1) => Some(0),
        (Sign::Plus, 1) | (Sign::Minus, 2) => Some(1),
        _ => None,
    }
}

/// The four blocks of the inverse of `[[B + Q − z, U], [U⁻¹π₀, 0]]`.
#[derive(Clone, Debug)]
pub struct GrushinBlocks {
    pub z: C64,
    pub q_tilde: Option<[Dense; 2]>,
    pub perp: GradedSolver,
    /// `E(BU)`, a `4D × 2(2K+1)` matrix.
    pub ebu: Dense,
    /// `E₋₊`.
    pub e_mp: Dense,
    pub cond: f64,
    op: Csr,
    q: Option<Csr>,
    u: Csr,
    pi_perp: Vec<usize>,
}

fn dense_of(m: &Csr) -> Dense {
    m.to_dense()
}

impl GrushinBlocks {
    pub fn new(asm: &BismutAssembly, gp: &GroundProjector, q_tilde: Option<&[Dense; 2]>, z: C64) -> Result<Self> {
        let perp = GradedSolver::new(&asm.op, Some(&gp.perp), z)?;
        let cond = perp.cond_estimate();
        if !(cond < PERP_COND_MAX) {
            return Err(Error::PerpSolveIllConditioned(cond));
        }
        let bu = dense_of(&asm.op.matmul(&gp.u));
        let ebu = perp.solve_mat(&bu);
        let ut = gp.u_inv();
        let utbu = dense_of(&ut.matmul(&asm.op).matmul(&gp.u));
        let utb = ut.matmul(&asm.op);
        let nb = gp.base_dim();
        let mut e_mp = linalg::eye(nb).mapv(|x| x * z) - &utbu + &utb.apply_mat(&ebu);
        if let Some(q) = q_tilde {
            let nk = gp.nk();
            e_mp.slice_mut(nd::s![..nk, ..nk]).zip_mut_with(&q[0], |a, b| *a -= b);
            e_mp.slice_mut(nd::s![nk.., nk..]).zip_mut_with(&q[1], |a, b| *a -= b);
        }
        Ok(GrushinBlocks {
            z,
            q_tilde: q_tilde.cloned(),
            perp,
            ebu,
            e_mp,
            cond,
            op: asm.op.clone(),
            q: q_tilde.map(|q| gp.lift(q)),
            u: gp.u.clone(),
            pi_perp: gp.perp.clone(),
        })
    }

    fn project_perp(&self, f: &Vector) -> Vector {
        let mut g = Vector::from_elem(f.len(), ZERO);
        for &i in &self.pi_perp {
            g[i] = f[i];
        }
        g
    }

    /// `E f = (π⊥(B − z)π⊥)⁻¹π⊥f`.
    pub fn e(&self, f: &Vector) -> Vector {
        self.perp.solve(&self.project_perp(f))
    }

    /// `E₊v = Uv − E(β/b + γ)Uv`.
    pub fn e_plus(&self, v: &Vector) -> Vector {
        self.u.apply(v) - self.ebu.dot(v)
    }

    /// `E₋f = U⁻¹π₀f − U⁻¹π₀(β/b + γ)Ef`.
    pub fn e_minus(&self, f: &Vector) -> Vector {
        let ut = self.u.adjoint();
        ut.apply(f) - ut.apply(&self.op.apply(&self.e(f)))
    }

    pub fn e_minus_plus(&self) -> &Dense {
        &self.e_mp
    }

    /// `(B + Q − z)u`.
    pub fn apply_shifted(&self, u: &Vector) -> Vector {
        let mut r = self.op.apply(u) - u.mapv(|x| x * self.z);
        if let Some(q) = &self.q {
            r = r + q.apply(u);
        }
        r
    }

    /// `max ‖𝒢𝒫(u, u₋) − (u, u₋)‖ / ‖(u, u₋)‖` over random pairs.
    pub fn left_inverse_residual(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = linalg::rng(seed);
        let n = self.op.nrows;
        let nb = self.u.ncols;
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let u = linalg::random_vector(&mut rng, n);
            let um = linalg::random_vector(&mut rng, nb);
            let v = self.apply_shifted(&u) + self.u.apply(&um);
            let vm = self.u.adjoint().apply(&u);
            let ru = self.e(&v) + self.e_plus(&vm);
            let rm = self.e_minus(&v) + self.e_mp.dot(&vm);
            let err = (linalg::norm(&(&ru - &u)).powi(2) + linalg::norm(&(&rm - &um)).powi(2)).sqrt();
            let scale = (linalg::norm(&u).powi(2) + linalg::norm(&um).powi(2)).sqrt();
            worst = worst.max(err / scale);
        }
        worst
    }

    /// `(E − E₊E₋₊⁻¹E₋)f`.
    pub fn schur_apply(&self, f: &Vector) -> Result<Vector> {
        let em = self.e_minus(f);
        let x = linalg::solve(&self.e_mp, &em)?;
        Ok(self.e(f) - self.e_plus(&x))
    }

    /// `max ‖(B+Q−z)⁻¹f − (E − E₊E₋₊⁻¹E₋)f‖ / ‖(B+Q−z)⁻¹f‖` over random `f`, against a direct solve.
    pub fn schur_residual(&self, samples: usize, seed: u64) -> Result<f64> {
        let full = match &self.q {
            Some(q) => self.op.add(q),
            None => self.op.clone(),
        };
        let direct = GradedSolver::new(&full, None, self.z)?;
        let mut rng = linalg::rng(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let f = linalg::random_vector(&mut rng, self.op.nrows);
            let a = direct.solve(&f);
            let b = self.schur_apply(&f)?;
            worst = worst.max(linalg::norm(&(&a - &b)) / linalg::norm(&a));
        }
        Ok(worst)
    }

    /// Base block of `E₋₊` for base degree `p`.
    pub fn e_mp_block(&self, p: usize) -> Dense {
        let nk = self.u.ncols / 2;
        self.e_mp.slice(nd::s![p * nk..(p + 1) * nk, p * nk..(p + 1) * nk]).to_owned()
    }

    /// `E Q = 0` check: `max |E Q u|` over the lifted columns.
    pub fn e_annihilates_ground(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.u.ncols {
            let mut e = Vector::from_elem(self.u.ncols, ZERO);
            e[j] = C64::from(1.0);
            worst = worst.max(linalg::norm(&self.e(&self.u.apply(&e))));
        }
        worst
    }

    /// Largest entry of `E₋₊` coupling base degrees 0 and 1.
    pub fn e_mp_off_degree(&self) -> f64 {
        let nk = self.u.ncols / 2;
        self.e_mp
            .slice(nd::s![..nk, nk..])
            .iter()
            .chain(self.e_mp.slice(nd::s![nk.., ..nk]).iter())
            .map(|x| x.norm())
            .fold(0.0, f64::max)
    }
}

pub fn build_blocks(asm: &BismutAssembly, gp: &GroundProjector, q_tilde: Option<&[Dense; 2]>, z: C64) -> Result<GrushinBlocks> {
    GrushinBlocks::new(asm, gp, q_tilde, z)
}

/// `½h⁻²Δ^{(p)}` from the factored Witten matrices, as one `2(2K+1)` block-diagonal matrix.
pub fn witten_base(w: &WittenAssembly) -> Dense {
    let nk = w.nk();
    let s = 0.5 / (w.h * w.h);
    let mut m = Dense::zeros((2 * nk, 2 * nk));
    m.slice_mut(nd::s![..nk, ..nk]).assign(&w.delta[0].mapv(|x| x * s));
    m.slice_mut(nd::s![nk.., nk..]).assign(&w.delta[1].mapv(|x| x * s));
    m
}

/// `‖E₋₊ − (z − Q̃ − ½h⁻²Δ)‖ / ‖½h⁻²Δ‖` (spectral norms).
pub fn effective_operator_error(w: &WittenAssembly, gb: &GrushinBlocks) -> Result<f64> {
    let lap = witten_base(w);
    let nb = lap.nrows();
    let mut target = linalg::eye(nb).mapv(|x| x * gb.z) - &lap;
    if let Some(q) = &gb.q_tilde {
        let nk = nb / 2;
        target.slice_mut(nd::s![..nk, ..nk]).zip_mut_with(&q[0], |a, b| *a -= b);
        target.slice_mut(nd::s![nk.., nk..]).zip_mut_with(&q[1], |a, b| *a -= b);
    }
    Ok(linalg::spectral_norm(&(&gb.e_mp - &target))? / linalg::spectral_norm(&lap)?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResolventNorms {
    pub norm_d: f64,
    pub norm_r: f64,
}

/// Weighted difference `(B + Q − z)⁻¹ − U(½h⁻²Δ + Q̃ − z)⁻¹U⁻¹` as an operator with adjoint.
pub struct ResolventDifference {
    pub z: C64,
    full: GradedSolver,
    base_inv: Dense,
    u: Csr,
    weight: Vec<f64>,
}

impl ResolventDifference {
    pub fn new(asm: &BismutAssembly, gp: &GroundProjector, w: &WittenAssembly, z: C64, s: f64, q_tilde: Option<&[Dense; 2]>) -> Result<Self> {
        let mut base = witten_base(w);
        let op = match q_tilde {
            Some(q) => {
                let nk = w.nk();
                base.slice_mut(nd::s![..nk, ..nk]).zip_mut_with(&q[0], |a, b| *a += b);
                base.slice_mut(nd::s![nk.., nk..]).zip_mut_with(&q[1], |a, b| *a += b);
                asm.op.add(&gp.lift(q))
            }
            None => asm.op.clone(),
        };
        let nb = base.nrows();
        let shifted = &base - &linalg::eye(nb).mapv(|x| x * z);
        let sv = linalg::singular_values(&shifted)?;
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        if smin <= 1e-13 * smax {
            return Err(Error::NearSpectrum(format!("{z} on the Witten spectrum")));
        }
        let base_inv = linalg::inv(&shifted)?;
        let full = GradedSolver::new(&op, None, z)?;
        if !(full.cond_estimate() < 1e14) {
            return Err(Error::NearSpectrum(format!("{z} on the spectrum of B")));
        }
        Ok(ResolventDifference { z, full, base_inv, u: gp.u.clone(), weight: basis::w2_diag(&asm.disc, s, 1.0) })
    }

    fn weighted(&self, f: &Vector, power: f64) -> Vector {
        Vector::from_shape_fn(f.len(), |i| f[i] * self.weight[i].powf(power))
    }

    fn diff(&self, f: &Vector, adjoint: bool) -> Vector {
        let ut = self.u.adjoint();
        let g = ut.apply(f);
        let bi = if adjoint { linalg::adjoint(&self.base_inv) } else { self.base_inv.clone() };
        let r = if adjoint { self.full.solve_adjoint(f) } else { self.full.solve(f) };
        r - self.u.apply(&bi.dot(&g))
    }

    /// `W^s 𝔇 W^{−s} f`.
    pub fn apply_d(&self, f: &Vector) -> Vector {
        self.weighted(&self.diff(&self.weighted(f, -1.0), false), 1.0)
    }

    pub fn apply_d_adj(&self, f: &Vector) -> Vector {
        self.weighted(&self.diff(&self.weighted(f, 1.0), true), -1.0)
    }

    pub fn apply_r(&self, f: &Vector) -> Vector {
        self.weighted(&self.full.solve(&self.weighted(f, -1.0)), 1.0)
    }

    pub fn apply_r_adj(&self, f: &Vector) -> Vector {
        self.weighted(&self.full.solve_adjoint(&self.weighted(f, 1.0)), -1.0)
    }

    pub fn norms(&self, seed: u64) -> ResolventNorms {
        let n = self.u.nrows;
        let norm_d = linalg::power_norm(n, |x| self.apply_d(x), |x| self.apply_d_adj(x), 50, 2, 1e-3, seed);
        let norm_r = linalg::power_norm(n, |x| self.apply_r(x), |x| self.apply_r_adj(x), 50, 2, 1e-3, seed ^ 0x5eed);
        ResolventNorms { norm_d, norm_r }
    }
}

/// Norms of `𝔇_z` and `(B − z)⁻¹` in the `‖·‖_{(0,s)}` geometry, working units.
pub fn resolvent_difference(asm: &BismutAssembly, gp: &GroundProjector, w: &WittenAssembly, z: C64, s: f64, seed: u64) -> Result<ResolventNorms> {
    Ok(ResolventDifference::new(asm, gp, w, z, s, None)?.norms(seed))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// `Re z <= −A²/2`.
    FarLeft,
    /// `|Re z| <= A²/2`, `|Im z| >= 1`.
    Strip,
    /// `Re z = −ϱ` or `Re z = ϱ`, `|Im z| <= 1`.
    Rectangle,
    /// `Re z = 0`, `|Im z| >= 1/b²`.
    HighImaginary,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::FarLeft, Region::Strip, Region::Rectangle, Region::HighImaginary];

    pub fn label(self) -> &'static str {
        match self {
            Region::FarLeft => "far_left",
            Region::Strip => "strip",
            Region::Rectangle => "rectangle",
            Region::HighImaginary => "high_imaginary",
        }
    }

    /// Representative point in the rescaled picture (`B_resc = h²B`, `b_resc = b/h`).
    pub fn representative(self, b_resc: f64, a: f64, rho: f64) -> C64 {
        match self {
            Region::FarLeft => C64::new(-a * a, 0.0),
            Region::Strip => C64::new(-a * a / 4.0, 1.0),
            Region::Rectangle => C64::new(-rho, 0.5),
            Region::HighImaginary => C64::new(0.0, 2.0 / (b_resc * b_resc)),
        }
    }

    /// Shape of the tabulated bound (without constant) for the measured norm.
    pub fn shape(self, b_resc: f64, a: f64, rho: f64, z: C64) -> f64 {
        match self {
            Region::FarLeft => 4.0 / (a * a),
            Region::Strip => b_resc * a.powf(3.5) + a.powi(-2),
            Region::Rectangle => a.powi(-2) + b_resc * a.powf(3.5) / (rho * rho / 4.0 + z.im * z.im),
            Region::HighImaginary => 1.0 / (4.0 * b_resc * z.im.abs().sqrt()),
        }
    }

    /// Whether the row bounds `‖R‖` (true) or `‖𝔇‖` (false).
    pub fn bounds_resolvent(self) -> bool {
        matches!(self, Region::FarLeft | Region::HighImaginary)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegionRow {
    pub region: String,
    pub z_re: f64,
    pub z_im: f64,
    pub b: f64,
    pub h: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub norm_d: f64,
    pub norm_r: f64,
    pub bound_rhs: f64,
    pub slack: f64,
}

/// Measures one region point for `B + Q`, with `Q̃ = A²χ((C_d + Δ)/(LA)²)` built from the
/// rescaled Witten spectrum. Norms are reported in the rescaled picture: `‖·‖_resc = h⁻²‖·‖_work`
/// at `z_work = z/h²`.
pub fn region_point(asm: &BismutAssembly, gp: &GroundProjector, w: &WittenAssembly, region: Region, a: f64, l: f64, rho_resc: f64, s: f64, seed: u64) -> Result<RegionRow> {
    let h2 = asm.h * asm.h;
    let b_resc = asm.b / asm.h;
    let z = region.representative(b_resc, a, rho_resc);
    let q = working_truncation(w, a, l, asm.disc.c_g);
    let n = ResolventDifference::new(asm, gp, w, z / h2, s, Some(&q))?.norms(seed);
    let norm_d = n.norm_d / h2;
    let norm_r = n.norm_r / h2;
    let bound_rhs = region.shape(b_resc, a, rho_resc, z);
    let measured = if region.bounds_resolvent() { norm_r } else { norm_d };
    Ok(RegionRow {
        region: region.label().into(),
        z_re: z.re,
        z_im: z.im,
        b: asm.b,
        h: asm.h,
        a,
        l,
        norm_d,
        norm_r,
        bound_rhs,
        slack: bound_rhs - measured,
    })
}

/// `Q̃` in working units: `h⁻²A²χ((C_d + Δ)/(LA)²)`.
pub fn working_truncation(w: &WittenAssembly, a: f64, l: f64, c_g: f64) -> [Dense; 2] {
    let h2 = w.h * w.h;
    crate::witten::spectral_truncation(w, a, l, crate::witten::default_cd(c_g), &crate::witten::chi).map(|q| q.mapv(|x| x / h2))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShapeFit {
    pub region: String,
    pub constant: f64,
    pub r_squared: f64,
}

/// Least-squares `measured ≈ C·shape` through the origin, with the usual `R²`.
pub fn fit_shape(region: &str, measured: &[f64], shape: &[f64]) -> ShapeFit {
    let sxy: f64 = measured.iter().zip(shape).map(|(y, x)| x * y).sum();
    let sxx: f64 = shape.iter().map(|x| x * x).sum();
    let c = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let mean = measured.iter().sum::<f64>() / measured.len() as f64;
    let ss_tot: f64 = measured.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = measured.iter().zip(shape).map(|(y, x)| (y - c * x).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else if ss_res == 0.0 { 1.0 } else { 0.0 };
    ShapeFit { region: region.into(), constant: c, r_squared: r2 }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveRow {
    pub b: f64,
    pub norm_d: f64,
}

/// `‖𝔇_z‖` (working units) along a family of assemblies.
pub fn convergence_curve(family: &[(BismutAssembly, GroundProjector)], w: &WittenAssembly, z: C64, s: f64, q_tilde: Option<&[Dense; 2]>, seed: u64) -> Result<Vec<CurveRow>> {
    family
        .par_iter()
        .map(|(asm, gp)| {
            let rd = ResolventDifference::new(asm, gp, w, z, s, q_tilde)?;
            Ok(CurveRow { b: asm.b, norm_d: rd.norms(seed).norm_d })
        })
        .collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Discretization;
    use crate::bismut::build_projectors;
    use crate::potential::Potential;
    use std::f64::consts::PI;

    fn setup(sign: Sign, b: f64) -> (BismutAssembly, GroundProjector, WittenAssembly) {
        let d = Discretization::new(6, 10, 2.0 * PI);
        let v = Potential::double_well();
        let asm = BismutAssembly::new(&d, &v, sign, b, 0.5).unwrap();
        let gp = build_projectors(&d, sign);
        let w = WittenAssembly::new(&d, &v, 0.5).unwrap();
        (asm, gp, w)
    }

    #[test]
    fn left_inverse_and_schur() {
        for sign in [Sign::Plus, Sign::Minus] {
            let (asm, gp, w) = setup(sign, 0.2);
            let q = crate::witten::spectral_truncation(&w, 2.0, 1.0, 2.5, &crate::witten::chi);
            let gb = build_blocks(&asm, &gp, Some(&q), C64::new(-0.3, 0.7)).unwrap();
            assert!(gb.left_inverse_residual(5, 1) < 1e-10);
            assert!(gb.schur_residual(5, 2).unwrap() < 1e-10);
            assert!(gb.e_annihilates_ground() == 0.0);
            assert!(gb.e_mp_off_degree() < 1e-14);
        }
    }

    #[test]
    fn effective_error_shrinks_with_b() {
        let errs: Vec<f64> = [0.08, 0.04]
            .iter()
            .map(|&b| {
                let (asm, gp, w) = setup(Sign::Plus, b);
                let gb = build_blocks(&asm, &gp, None, C64::new(-1.0, 0.0)).unwrap();
                effective_operator_error(&w, &gb).unwrap()
            })
            .collect();
        assert!(errs[1] < errs[0], "{errs:?}");
    }

    #[test]
    fn graded_solver_matches_dense() {
        let (asm, _, _) = setup(Sign::Plus, 0.3);
        let z = C64::new(0.1, 0.2);
        let s = GradedSolver::new(&asm.op, None, z).unwrap();
        let mut rng = linalg::rng(3);
        let f = linalg::random_vector(&mut rng, asm.dim());
        let x = s.solve(&f);
        let r = asm.op.apply(&x) - x.mapv(|v| v * z) - &f;
        assert!(linalg::norm(&r) < 1e-10 * linalg::norm(&f));
        let y = s.solve_adjoint(&f);
        let r = asm.op.adjoint().apply(&y) - y.mapv(|v| v * z.conj()) - &f;
        assert!(linalg::norm(&r) < 1e-10 * linalg::norm(&f));
    }

    #[test]
    fn shape_fit_exact() {
        let f = fit_shape("x", &[2.0, 4.0, 6.0], &[1.0, 2.0, 3.0]);
        assert!((f.constant - 2.0).abs() < 1e-14 && (f.r_squared - 1.0).abs() < 1e-14);
        assert!((loglog_slope(&[1.0, 2.0, 4.0], &[1.0, 4.0, 16.0]) - 2.0).abs() < 1e-12);
    }
}
