//! Hypoelliptic Laplacian `B = α/b² + β/b + γ` on `T*S¹`, flat metric, in the working picture
//! where the weight is `V/h`.

use ndarray as nd;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::basis::{self, Discretization, FiberAlgebra, DEGREE, VERTICAL};
use crate::error::{Error, Result};
use crate::linalg::{self, Csr, Dense, Vector, ONE, ZERO};
use crate::potential::Potential;
use crate::witten::WittenAssembly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    /// Fiber components spanning `ker α` at Hermite level 0, ordered by base degree.
    pub fn ground_components(self) -> [usize; 2] {
        match self {
            Sign::Plus => [0, 1],
            Sign::Minus => [2, 3],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

/// Pieces of the splitting `B = P + R₀ + R₂ + R₁,⊥/b`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    /// `α/b² ∓ p∂q/b`.
    pub principal: Csr,
    /// `(V′/h)∂p` (enters with `1/b`).
    pub r1_perp: Csr,
    /// Hessian part of `γ`.
    pub r0: Csr,
    /// Curvature term, zero on a flat circle.
    pub r2: Csr,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlatFlags {
    pub curvature_zero: bool,
    pub christoffel_zero: bool,
}

#[derive(Clone, Debug)]
pub struct BismutAssembly {
    pub sign: Sign,
    pub b: f64,
    pub h: f64,
    pub disc: Discretization,
    pub potential: Potential,
    pub alpha: Csr,
    pub beta: Csr,
    pub gamma: Csr,
    pub op: Csr,
    pub flags: FlatFlags,
}

fn alpha(d: &Discretization, sign: Sign) -> Csr {
    let diag: Vec<f64> = (0..d.dim())
        .map(|i| {
            let (c, _, n) = d.unindex(i);
            let nv = VERTICAL[c] as f64;
            match sign {
                Sign::Plus => n as f64 + nv,
                Sign::Minus => n as f64 + 1.0 - nv,
            }
        })
        .collect();
    Csr::diag_real(&diag)
}

/// `α±` alone; diagonal with entries `n + N_V` (+) or `n + 1 − N_V` (−).
pub fn assemble_alpha(d: &Discretization, sign: Sign) -> Result<Csr> {
    d.check()?;
    Ok(alpha(d, sign))
}

/// `β± = ∓p∂q + (V′/h)∂p` and `γ = (V″/h) ⊗ (dq∧ − dp∧)(i_∂q + i_∂p)`.
pub fn assemble_beta_gamma(d: &Discretization, v: &Potential, sign: Sign, h: f64) -> Result<(Csr, Csr)> {
    let (transport, drift, gamma) = beta_gamma_parts(d, v, sign, h)?;
    Ok((transport.add(&drift), gamma))
}

fn beta_gamma_parts(d: &Discretization, v: &Potential, sign: Sign, h: f64) -> Result<(Csr, Csr, Csr)> {
    let g = basis::build_scalar_generators(d)?;
    let w = basis::build_multiplier(d, v, 1)?.scale(C64::from(1.0 / h));
    let wpp = basis::build_multiplier(d, v, 2)?.scale(C64::from(1.0 / h));
    let transport = basis::lift_identity(&g.mult_p.matmul(&g.dq).scale(C64::from(-sign.value())));
    let drift = basis::lift_identity(&g.dp.matmul(&w));
    let gamma = basis::lift(&wpp, &FiberAlgebra::new().hessian_fiber());
    Ok((transport, drift, gamma))
}

impl BismutAssembly {
    pub fn new(d: &Discretization, v: &Potential, sign: Sign, b: f64, h: f64) -> Result<Self> {
        if !(b.is_finite() && b != 0.0) || !(h > 0.0) {
            return Err(Error::Dimension(format!("need b != 0 and h > 0, got b={b} h={h}")));
        }
        d.check()?;
        let a = alpha(d, sign);
        let (beta, gamma) = assemble_beta_gamma(d, v, sign, h)?;
        let op = a.scale(C64::from(1.0 / (b * b))).add(&beta.scale(C64::from(1.0 / b))).add(&gamma);
        Ok(BismutAssembly {
            sign,
            b,
            h,
            disc: d.clone(),
            potential: v.clone(),
            alpha: a,
            beta,
            gamma,
            op,
            flags: FlatFlags { curvature_zero: true, christoffel_zero: true },
        })
    }

    pub fn dim(&self) -> usize {
        self.disc.dim()
    }

    pub fn degree_indices(&self, p: usize) -> Vec<usize> {
        self.disc.degree_indices(p)
    }

    /// `B^{(p)}` as a matrix on the degree-`p` coordinates.
    pub fn block(&self, p: usize) -> Csr {
        let idx = self.degree_indices(p);
        self.op.submatrix(&idx, &idx)
    }

    pub fn block_of(&self, m: &Csr, p: usize) -> Csr {
        let idx = self.degree_indices(p);
        m.submatrix(&idx, &idx)
    }

    /// `max_p max |(I − Π_p)BΠ_p|`.
    pub fn degree_leak(&self) -> f64 {
        self.op
            .triplets()
            .filter(|(i, j, _)| DEGREE[i % 4] != DEGREE[j % 4])
            .map(|(_, _, v)| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn decomposition(&self) -> Result<Decomposition> {
        let (transport, drift, gamma) = beta_gamma_parts(&self.disc, &self.potential, self.sign, self.h)?;
        let principal = self.alpha.scale(C64::from(1.0 / (self.b * self.b))).add(&transport.scale(C64::from(1.0 / self.b)));
        Ok(Decomposition { principal, r1_perp: drift, r0: gamma, r2: Csr::zeros(self.dim(), self.dim()) })
    }

    /// `R = parity ⊗ I ⊗ diag(1, 1, −1, −1)`.
    pub fn r_matrix(&self) -> Csr {
        r_matrix(&self.disc)
    }

    pub fn export_matrix_market<W: std::io::Write>(&self, w: W) -> std::io::Result<()> {
        self.op.write_matrix_market(w)
    }
}

pub fn r_matrix(d: &Discretization) -> Csr {
    let diag: Vec<f64> = (0..d.dim())
        .map(|i| {
            let (c, _, n) = d.unindex(i);
            let par = if n % 2 == 0 { 1.0 } else { -1.0 };
            par * if c < 2 { 1.0 } else { -1.0 }
        })
        .collect();
    Csr::diag_real(&diag)
}

/// `Π₀`, its complement, and the isometry `U` from base forms into `ker α`.
#[derive(Clone, Debug)]
pub struct GroundProjector {
    pub sign: Sign,
    pub pi0: Csr,
    pub zero: Vec<usize>,
    pub perp: Vec<usize>,
    /// `4D × 2(2K+1)`; column `p·(2K+1) + k + K` is the base `p`-form `e^{ikωq}`.
    pub u: Csr,
}

impl GroundProjector {
    pub fn new(d: &Discretization, sign: Sign) -> Self {
        let comps = sign.ground_components();
        let nk = d.nk();
        let mut trip = vec![];
        for (p, &c) in comps.iter().enumerate() {
            for k in d.modes() {
                trip.push((d.index(c, k, 0), p * nk + (k + d.k_max as i64) as usize, ONE));
            }
        }
        let u = Csr::from_triplets(d.dim(), 2 * nk, trip);
        let mut zero: Vec<usize> = u.triplets().map(|(i, _, _)| i).collect();
        zero.sort_unstable();
        let zs: std::collections::HashSet<usize> = zero.iter().copied().collect();
        let perp = (0..d.dim()).filter(|i| !zs.contains(i)).collect();
        let pi0 = Csr::diag_real(&(0..d.dim()).map(|i| if zs.contains(&i) { 1.0 } else { 0.0 }).collect::<Vec<_>>());
        GroundProjector { sign, pi0, zero, perp, u }
    }

    pub fn base_dim(&self) -> usize {
        self.u.ncols
    }

    pub fn nk(&self) -> usize {
        self.u.ncols / 2
    }

    /// `U⁻¹ = U†` on `Ran π₀`.
    pub fn u_inv(&self) -> Csr {
        self.u.adjoint()
    }

    /// Columns of `U` for base degree `p`.
    pub fn u_degree(&self, p: usize) -> Csr {
        let nk = self.nk();
        let cols: Vec<usize> = (p * nk..(p + 1) * nk).collect();
        self.u.submatrix(&(0..self.u.nrows).collect::<Vec<_>>(), &cols)
    }

    /// Lifts a base operator given per degree as `[Q⁰, Q¹]` to `U Q U⁻¹`.
    pub fn lift(&self, q: &[Dense; 2]) -> Csr {
        let nk = self.nk();
        let mut big = Dense::zeros((2 * nk, 2 * nk));
        big.slice_mut(nd::s![..nk, ..nk]).assign(&q[0]);
        big.slice_mut(nd::s![nk.., nk..]).assign(&q[1]);
        self.u.matmul(&Csr::from_dense(&big)).matmul(&self.u_inv())
    }
}

pub fn build_projectors(d: &Discretization, sign: Sign) -> GroundProjector {
    GroundProjector::new(d, sign)
}

/// `U⁻¹π₀(γ − βα⁺β)π₀U` as a dense `2(2K+1)`-square matrix.
pub fn effective_operator(asm: &BismutAssembly, gp: &GroundProjector) -> Dense {
    let pinv: Vec<f64> = (0..asm.dim())
        .map(|i| {
            let a = asm.alpha.get(i, i).re;
            if a > 0.0 { 1.0 / a } else { 0.0 }
        })
        .collect();
    let bu = asm.beta.matmul(&gp.u);
    let ut_b = gp.u_inv().matmul(&asm.beta);
    let second = ut_b.matmul(&Csr::diag_real(&pinv)).matmul(&bu);
    gp.u_inv().matmul(&asm.gamma).matmul(&gp.u).sub(&second).to_dense()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdentityResidual {
    /// Against `½h⁻²d†d` and `½h⁻²dd†` with the square Fourier truncation of `d`.
    pub factored: [f64; 2],
    /// Against the Galerkin Witten matrices, restricted to `|k| <= K − band`.
    pub galerkin_interior: [f64; 2],
    pub band: usize,
    pub off_degree: f64,
}

impl IdentityResidual {
    pub fn max(&self) -> f64 {
        self.factored.iter().chain(&self.galerkin_interior).fold(self.off_degree, |a, b| a.max(*b))
    }
}

fn rel_frob(a: &Dense, b: &Dense) -> f64 {
    let nb = linalg::frob(b);
    let diff = linalg::frob(&(a - b));
    if nb == 0.0 { diff } else { diff / nb }
}

/// Compares the effective operator with `½h⁻²Δ_{V,h}` per degree.
pub fn bismut_identity_check(asm: &BismutAssembly, w: &WittenAssembly, gp: &GroundProjector) -> IdentityResidual {
    let eff = effective_operator(asm, gp);
    let nk = gp.nk();
    let s = 0.5 / (asm.h * asm.h);
    let band = asm.potential.degree();
    let kk = asm.disc.k_max as i64;
    let interior: Vec<usize> = (0..nk).filter(|&i| (i as i64 - kk).abs() <= kk - band as i64).collect();
    let mut factored = [0.0; 2];
    let mut galerkin_interior = [0.0; 2];
    for p in 0..2 {
        let blk = eff.slice(nd::s![p * nk..(p + 1) * nk, p * nk..(p + 1) * nk]).to_owned();
        factored[p] = rel_frob(&blk, &w.delta[p].mapv(|x| x * s));
        let sub = |m: &Dense| Dense::from_shape_fn((interior.len(), interior.len()), |(i, j)| m[(interior[i], interior[j])]);
        galerkin_interior[p] = rel_frob(&sub(&blk), &sub(&w.galerkin[p].mapv(|x| x * s)));
    }
    let off_degree = eff
        .slice(nd::s![..nk, nk..])
        .iter()
        .chain(eff.slice(nd::s![nk.., ..nk]).iter())
        .map(|x| x.norm())
        .fold(0.0, f64::max);
    IdentityResidual { factored, galerkin_interior, band, off_degree }
}

/// `δ`, its `r`-adjoint, and the conjugator `μ₀`.
#[derive(Clone, Debug)]
pub struct HodgeFactor {
    pub delta: Csr,
    pub delta_r: Csr,
    pub mu0: Csr,
    /// `dq∧∂q + (1/b)dp∧∂p`.
    pub rescaled_d: Csr,
    pub r: Csr,
}

/// `δ₊ = (I − μ₀)[dq∧(∂q + V′/h) + (√2/b)dp∧ a](I + μ₀)`; the − case uses `−a†` in place of `a`.
pub fn build_hodge(asm: &BismutAssembly) -> Result<HodgeFactor> {
    let d = &asm.disc;
    let g = basis::build_scalar_generators(d)?;
    let f = FiberAlgebra::new();
    let w = basis::build_multiplier(d, &asm.potential, 1)?.scale(C64::from(1.0 / asm.h));
    let vertical = match asm.sign {
        Sign::Plus => g.lower.clone(),
        Sign::Minus => g.raise.scale(-ONE),
    };
    let core = basis::lift(&g.dq.add(&w), &f.dq_wedge)
        .add(&basis::lift(&vertical, &f.dp_wedge).scale(C64::from(std::f64::consts::SQRT_2 / asm.b)));
    let mu0 = basis::lift(&Csr::identity(d.scalar_dim()), &f.mu0);
    let id = Csr::identity(d.dim());
    let delta = id.sub(&mu0).matmul(&core).matmul(&id.add(&mu0));
    let r = r_matrix(d);
    let delta_r = r.matmul(&delta.adjoint()).matmul(&r);
    let rescaled_d = basis::lift(&g.dq, &f.dq_wedge).add(&basis::lift(&g.dp, &f.dp_wedge).scale(C64::from(1.0 / asm.b)));
    Ok(HodgeFactor { delta, delta_r, mu0, rescaled_d, r })
}

impl HodgeFactor {
    pub fn laplacian(&self) -> Csr {
        self.delta.matmul(&self.delta_r).add(&self.delta_r.matmul(&self.delta)).scale(C64::from(0.5))
    }
}

/// Interior indices for Hodge checks: `n <= M − 2`, `|k| <= K − deg V − 1`.
pub fn hodge_interior(d: &Discretization, v: &Potential) -> Vec<usize> {
    d.interior(d.m_max.saturating_sub(2), d.k_max.saturating_sub(v.degree() + 1))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HodgeReport {
    pub nilpotency: f64,
    pub nilpotency_r: f64,
    pub laplacian_rel: f64,
    pub adjointness: f64,
}

/// Checks `δ² = 0`, `(δ^{*,r})² = 0`, `½[δ, δ^{*,r}] = B` and `r`-adjointness on random interior vectors.
pub fn hodge_report(asm: &BismutAssembly, hf: &HodgeFactor, samples: usize, seed: u64) -> HodgeReport {
    let idx = hodge_interior(&asm.disc, &asm.potential);
    let mut rng = linalg::rng(seed);
    let mut rep = HodgeReport { nilpotency: 0.0, nilpotency_r: 0.0, laplacian_rel: 0.0, adjointness: 0.0 };
    let lap = hf.laplacian();
    let n = asm.dim();
    for _ in 0..samples {
        let small = linalg::random_vector(&mut rng, idx.len());
        let mut u = Vector::zeros(n);
        for (j, &i) in idx.iter().enumerate() {
            u[i] = small[j];
        }
        let u = &u / linalg::norm(&u);
        let du = hf.delta.apply(&u);
        rep.nilpotency = rep.nilpotency.max(linalg::norm(&hf.delta.apply(&du)) / linalg::norm(&du).max(1.0));
        let dru = hf.delta_r.apply(&u);
        rep.nilpotency_r = rep.nilpotency_r.max(linalg::norm(&hf.delta_r.apply(&dru)) / linalg::norm(&dru).max(1.0));
        let bu = asm.op.apply(&u);
        rep.laplacian_rel = rep.laplacian_rel.max(linalg::norm(&(&lap.apply(&u) - &bu)) / linalg::norm(&bu));
        let v = linalg::random_vector(&mut rng, n);
        let lhs = linalg::dot(&du, &hf.r.apply(&v));
        let rhs = linalg::dot(&u, &hf.r.apply(&hf.delta_r.apply(&v)));
        rep.adjointness = rep.adjointness.max((lhs - rhs).norm() / (lhs.norm() + rhs.norm()).max(1e-300));
    }
    rep
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModifiedKind {
    AddPi0,
    ProjectPerp,
    AddQalv,
}

/// `B + A²π₀`, `π⊥Bπ⊥` on `Ran π⊥`, or `B + U Q̃ U⁻¹`.
pub fn modified_operator(asm: &BismutAssembly, gp: &GroundProjector, kind: ModifiedKind, a: f64, q_tilde: Option<&[Dense; 2]>) -> Result<Csr> {
    match kind {
        ModifiedKind::AddPi0 => Ok(asm.op.add(&gp.pi0.scale(C64::from(a * a)))),
        ModifiedKind::ProjectPerp => Ok(asm.op.submatrix(&gp.perp, &gp.perp)),
        ModifiedKind::AddQalv => {
            let q = q_tilde.ok_or_else(|| Error::Dimension("add_QALV needs the base truncation".into()))?;
            Ok(asm.op.add(&gp.lift(q)))
        }
    }
}

/// `‖RBR − B†‖_F / ‖B‖_F`.
pub fn pt_symmetry_check(asm: &BismutAssembly) -> f64 {
    let r = asm.r_matrix();
    r.matmul(&asm.op).matmul(&r).sub(&asm.op.adjoint()).frob_norm() / asm.op.frob_norm()
}

/// Low spectra in the two pictures: `B_{b, V/h}` on circumference `ℓ` and
/// `h⁻²B_{b/h, V(h·)/h}` on circumference `ℓ/h`. Returns the largest relative mismatch over the
/// lowest `count` eigenvalues of each degree block (dense eigensolves).
pub fn scaling_equivalence(v: &Potential, b: f64, h: f64, d_small: &Discretization, d_large: &Discretization, sign: Sign, count: usize) -> Result<f64> {
    if d_large.k_max < d_small.k_max || d_large.m_max < d_small.m_max {
        return Err(Error::CutoffTooSmall(format!(
            "dilated picture needs K >= {} and M >= {}, got K={} M={}",
            d_small.k_max, d_small.m_max, d_large.k_max, d_large.m_max
        )));
    }
    if (d_large.circumference - d_small.circumference / h).abs() > 1e-12 * d_large.circumference {
        return Err(Error::Dimension("dilated circumference must be ℓ/h".into()));
    }
    let a = BismutAssembly::new(d_small, v, sign, b, h)?;
    let vd = v.dilated(h);
    let big = BismutAssembly::new(d_large, &vd, sign, b / h, 1.0)?;
    let mut worst: f64 = 0.0;
    for p in 0..3 {
        let mut s1: Vec<C64> = linalg::eigvals(&a.block(p).to_dense())?.to_vec();
        let mut s2: Vec<C64> = linalg::eigvals(&big.block(p).to_dense())?.iter().map(|z| z / (h * h)).collect();
        let key = |z: &C64| (z.re, z.im);
        s1.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        s2.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        let scale = s1.iter().take(count).map(|z| z.norm()).fold(1.0, f64::max);
        let low2: Vec<C64> = s2.iter().take(count.max(1) * 3).copied().collect();
        for z in s1.iter().take(count) {
            let dmin = low2.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min);
            worst = worst.max(dmin / scale);
        }
    }
    Ok(worst)
}

/// Rescaled accretivity constant: `max(1, −h²·min Spec U†γU)`, the infimum of `Re⟨u, Bu⟩` on
/// `ker α` in rescaled units.
pub fn fitted_c0(asm: &BismutAssembly, gp: &GroundProjector) -> Result<f64> {
    let m = gp.u.adjoint().matmul(&asm.gamma).matmul(&gp.u).to_dense();
    let lo = linalg::eigh(&m)?.0.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((-lo * asm.h * asm.h).max(1.0))
}

/// `min Re⟨u, (C₀ + B)u⟩` over random unit vectors.
pub fn accretivity_window(asm: &BismutAssembly, c0: f64, samples: usize, seed: u64) -> f64 {
    let mut rng = linalg::rng(seed);
    (0..samples)
        .map(|_| {
            let u = linalg::random_vector(&mut rng, asm.dim());
            let u = &u / linalg::norm(&u);
            c0 + linalg::dot(&u, &asm.op.apply(&u)).re
        })
        .fold(f64::INFINITY, f64::min)
}

/// `min Re⟨u, π⊥Bπ⊥u⟩·b²` over random unit `u ∈ Ran π⊥`.
pub fn perp_accretivity(asm: &BismutAssembly, gp: &GroundProjector, samples: usize, seed: u64) -> f64 {
    let m = asm.op.submatrix(&gp.perp, &gp.perp);
    let mut rng = linalg::rng(seed);
    (0..samples)
        .map(|_| {
            let u = linalg::random_vector(&mut rng, m.nrows);
            let u = &u / linalg::norm(&u);
            linalg::dot(&u, &m.apply(&u)).re * asm.b * asm.b
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubellipticRow {
    pub b: f64,
    pub kappa: f64,
    pub s: f64,
    pub max_ratio: f64,
    pub fitted_constant: f64,
}

/// `max ‖u‖²_{(1,s)} / Re⟨u, (κ/b² + B)u⟩` for `u = (κ/b² + B)⁻¹f`, reported against `16b²`.
pub fn subelliptic_report(asm: &BismutAssembly, kappa: f64, s: f64, samples: usize, seed: u64) -> Result<SubellipticRow> {
    let n = asm.dim();
    let shifted = asm.op.add(&Csr::identity(n).scale(C64::from(kappa / (asm.b * asm.b))));
    let lu = linalg::BandLu::factor(&shifted)?;
    let mut rng = linalg::rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let f = linalg::random_vector(&mut rng, n);
        let u = lu.solve(&f);
        let num = basis::sobolev_norm(&u, &asm.disc, 1.0, s, 1.0)?.powi(2);
        let den = linalg::dot(&u, &shifted.apply(&u)).re;
        worst = worst.max(num / den);
    }
    let bound = 16.0 * asm.b * asm.b;
    Ok(SubellipticRow { b: asm.b, kappa, s, max_ratio: worst, fitted_constant: (worst / bound - 1.0).max(0.0) })
}

/// `‖(W²)^{s/2}B(W²)^{−s/2} − B‖_F / ‖B‖_F`.
pub fn weighted_commutator(asm: &BismutAssembly, s: f64) -> f64 {
    let w = basis::w2_diag(&asm.disc, s, 1.0);
    let conj = Csr::from_triplets(asm.dim(), asm.dim(), asm.op.triplets().map(|(i, j, v)| (i, j, v * (w[i] / w[j]))));
    conj.sub(&asm.op).frob_norm() / asm.op.frob_norm()
}

/// Diagonal of `U⁻¹π₀W²π₀U`.
pub fn base_weight(d: &Discretization, gp: &GroundProjector) -> Vec<f64> {
    let w = Csr::diag_real(&basis::w2_diag(d, 2.0, 1.0));
    let m = gp.u_inv().matmul(&w).matmul(&gp.u);
    (0..m.nrows).map(|i| m.get(i, i).re).collect()
}

/// `u` zero outside the listed coordinates.
pub fn scatter(n: usize, idx: &[usize], vals: &Vector) -> Vector {
    let mut u = Vector::from_elem(n, ZERO);
    for (j, &i) in idx.iter().enumerate() {
        u[i] = vals[j];
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn small() -> Discretization {
        Discretization::new(6, 8, 2.0 * PI)
    }

    #[test]
    fn alpha_spectrum_plus() {
        let d = Discretization::new(2, 3, 2.0 * PI);
        let a = assemble_alpha(&d, Sign::Plus).unwrap();
        let mut counts = [0usize; 5];
        for i in 0..d.dim() {
            counts[a.get(i, i).re as usize] += 1;
        }
        assert_eq!(counts, [2 * 5, 4 * 5, 4 * 5, 4 * 5, 2 * 5]);
    }

    #[test]
    fn kernel_of_alpha_minus() {
        let d = small();
        let a = assemble_alpha(&d, Sign::Minus).unwrap();
        let gp = build_projectors(&d, Sign::Minus);
        assert_eq!(a.matmul(&gp.u).nnz(), 0);
        assert_eq!(gp.zero.len(), 2 * d.nk());
        let utu = gp.u_inv().matmul(&gp.u);
        assert_eq!(utu, Csr::identity(2 * d.nk()));
    }

    #[test]
    fn beta_free_transport_entry() {
        let d = small();
        let (beta, gamma) = assemble_beta_gamma(&d, &Potential::zero(2.0 * PI), Sign::Plus, 1.0).unwrap();
        let e = beta.get(d.index(0, 1, 1), d.index(0, 1, 0));
        assert!((e - C64::new(0.0, -std::f64::consts::FRAC_1_SQRT_2)).norm() < 1e-15);
        assert_eq!(gamma.nnz(), 0);
    }

    #[test]
    fn gamma_entries() {
        let d = small();
        let (_, gamma) = assemble_beta_gamma(&d, &Potential::single_well(), Sign::Plus, 1.0).unwrap();
        for i in d.degree_indices(0) {
            assert_eq!(gamma.row(i).count(), 0);
        }
        // −cos q on the dq → dq slot: −½ at k ± 1
        let e = gamma.get(d.index(1, 1, 2), d.index(1, 0, 2));
        assert!((e - C64::from(-0.5)).norm() < 1e-15);
    }

    #[test]
    fn grading_and_pt() {
        for sign in [Sign::Plus, Sign::Minus] {
            let asm = BismutAssembly::new(&small(), &Potential::double_well(), sign, 0.2, 0.5).unwrap();
            assert_eq!(asm.degree_leak(), 0.0);
            assert!(pt_symmetry_check(&asm) < 1e-14);
            let gp = build_projectors(&asm.disc, sign);
            let p0bp0 = gp.u_inv().matmul(&asm.beta).matmul(&gp.u);
            assert!(p0bp0.max_abs() < 1e-14);
        }
    }

    #[test]
    fn identity_exact_for_square_truncation() {
        let d = small();
        for sign in [Sign::Plus, Sign::Minus] {
            let v = Potential::double_well();
            let asm = BismutAssembly::new(&d, &v, sign, 0.3, 0.5).unwrap();
            let w = WittenAssembly::new(&d, &v, 0.5).unwrap();
            let r = bismut_identity_check(&asm, &w, &build_projectors(&d, sign));
            assert!(r.max() < 1e-13, "{r:?}");
        }
    }

    #[test]
    fn hodge_factorization() {
        for sign in [Sign::Plus, Sign::Minus] {
            let asm = BismutAssembly::new(&small(), &Potential::double_well(), sign, 0.3, 0.5).unwrap();
            let hf = build_hodge(&asm).unwrap();
            let rep = hodge_report(&asm, &hf, 10, 1);
            assert!(rep.nilpotency < 1e-12, "{rep:?}");
            assert!(rep.nilpotency_r < 1e-12, "{rep:?}");
            assert!(rep.laplacian_rel < 1e-12, "{rep:?}");
            assert!(rep.adjointness < 1e-12, "{rep:?}");
        }
    }

    #[test]
    fn scaling_identity() {
        let d = small();
        let h = 0.5;
        let dl = Discretization::new(6, 8, 2.0 * PI / h);
        let m = scaling_equivalence(&Potential::single_well(), 0.2, h, &d, &dl, Sign::Plus, 10).unwrap();
        assert!(m < 1e-9, "{m}");
        let too_small = Discretization::new(4, 8, 2.0 * PI / h);
        assert!(matches!(
            scaling_equivalence(&Potential::single_well(), 0.2, h, &d, &too_small, Sign::Plus, 10),
            Err(Error::CutoffTooSmall(_))
        ));
    }
}
