//! Eigenvalues of the non-self-adjoint operator near the origin, contour projectors, semigroup
//! and the comparison with the Witten Laplacian.

use ndarray as nd;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{Discretization, DEGREE};
use crate::bismut::{BismutAssembly, GroundProjector, HodgeFactor, Sign};
use crate::error::{Error, Result};
use crate::grushin::{base_degree, GradedSolver};
use crate::linalg::{self, BandLu, Csr, Dense, Vector, ONE, ZERO};
use crate::potential::Potential;
use crate::witten::GapCertificate;

/// Blocks up to this size go to the dense eigensolver.
pub const DENSE_LIMIT: usize = 1000;
/// Singular-value ratio that separates the range of a contour projector from quadrature noise.
pub const RANK_GAP: f64 = 1e3;

#[derive(Clone, Debug)]
pub struct EigPair {
    pub value: C64,
    pub vector: Vector,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct DiscOptions {
    pub dense_limit: usize,
    pub block: usize,
    pub restarts: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for DiscOptions {
    fn default() -> Self {
        DiscOptions { dense_limit: DENSE_LIMIT, block: 4, restarts: 6, tol: 1e-10, seed: 7 }
    }
}

fn residual(op: &Csr, lambda: C64, u: &Vector) -> f64 {
    linalg::norm(&(op.apply(u) - u.mapv(|x| x * lambda))) / linalg::norm(u)
}

fn op_scale(op: &Csr) -> f64 {
    op.frob_norm().max(f64::MIN_POSITIVE)
}

/// Rayleigh–Ritz on the span of `y`.
fn rayleigh_ritz(op: &Csr, y: &Dense) -> Result<Vec<EigPair>> {
    let q = linalg::orthonormalize(y, None, 1e-12);
    if q.ncols() == 0 {
        return Ok(vec![]);
    }
    let small = linalg::adjoint(&q).dot(&op.apply_mat(&q));
    let (vals, vecs) = linalg::eig(&small)?;
    Ok(vals
        .iter()
        .enumerate()
        .map(|(j, &l)| {
            let u = q.dot(&vecs.column(j));
            let u = &u / linalg::norm(&u);
            EigPair { value: l, residual: residual(op, l, &u), vector: u }
        })
        .collect())
}

/// Eigenpairs of `op` in the disc `|λ − center| <= radius`, nearest first.
pub fn eigs_in_disc(op: &Csr, center: C64, radius: f64, max_count: usize, opts: &DiscOptions) -> Result<Vec<EigPair>> {
    if !(radius > 0.0) {
        return Err(Error::Dimension("radius must be positive".into()));
    }
    let n = op.nrows;
    let scale = op_scale(op);
    let inside = |l: C64| (l - center).norm() <= radius;
    let mut pairs = if n <= opts.dense_limit {
        let (vals, vecs) = linalg::eig(&op.to_dense())?;
        vals.iter()
            .enumerate()
            .filter(|(_, l)| inside(**l))
            .map(|(j, &l)| {
                let u = vecs.column(j).to_owned();
                let u = &u / linalg::norm(&u);
                EigPair { value: l, residual: residual(op, l, &u), vector: u }
            })
            .collect::<Vec<_>>()
    } else {
        arnoldi_disc(op, center, radius, max_count, opts)?
    };
    pairs.sort_by(|a, b| (a.value - center).norm().partial_cmp(&(b.value - center).norm()).unwrap());
    pairs.truncate(max_count);
    if let Some(bad) = pairs.iter().find(|p| p.residual > 1e-8 * scale) {
        return Err(Error::NotConverged(format!("residual {:e} at λ = {}", bad.residual, bad.value)));
    }
    Ok(pairs)
}

/// Block shift-invert Arnoldi with explicit restarts from the wanted Ritz vectors.
fn arnoldi_disc(op: &Csr, center: C64, radius: f64, max_count: usize, opts: &DiscOptions) -> Result<Vec<EigPair>> {
    let n = op.nrows;
    let shift = center - C64::new(0.05 * radius, 0.0);
    let lu = BandLu::factor(&op.sub(&Csr::identity(n).scale(shift)))?;
    let bs = opts.block.max(1).min(n);
    let nblocks = ((4 * max_count.max(1)).div_ceil(bs)).max(10).min(n / bs);
    let scale = op_scale(op);
    let mut rng = linalg::rng(opts.seed);
    let mut start = linalg::random_dense(&mut rng, n, bs);
    let mut best: Vec<EigPair> = vec![];
    for _ in 0..=opts.restarts {
        let mut basis = linalg::orthonormalize(&start, None, 1e-12);
        while basis.ncols() < bs {
            let extra = linalg::random_dense(&mut rng, n, bs - basis.ncols());
            let more = linalg::orthonormalize(&extra, Some(&basis), 1e-12);
            basis = nd::concatenate![nd::Axis(1), basis, more];
        }
        let mut cols = basis;
        for j in 0..nblocks {
            let last = cols.slice(nd::s![.., j * bs..(j + 1) * bs]).to_owned();
            let w = lu.solve_mat(&last);
            let mut next = linalg::orthonormalize(&w, Some(&cols), 1e-10);
            while next.ncols() < bs {
                let extra = linalg::random_dense(&mut rng, n, bs - next.ncols());
                let both = nd::concatenate![nd::Axis(1), cols, next];
                let more = linalg::orthonormalize(&extra, Some(&both), 1e-12);
                next = nd::concatenate![nd::Axis(1), next, more];
            }
            cols = nd::concatenate![nd::Axis(1), cols, next];
        }
        let v = cols.slice(nd::s![.., ..nblocks * bs]).to_owned();
        let ritz = rayleigh_ritz(op, &v)?;
        let wanted: Vec<EigPair> = ritz.into_iter().filter(|p| (p.value - center).norm() <= radius).collect();
        let done = wanted.iter().all(|p| p.residual <= opts.tol * scale);
        best = wanted;
        if done {
            break;
        }
        let mut s = Dense::zeros((n, best.len().max(bs)));
        for (j, p) in best.iter().enumerate() {
            s.column_mut(j).assign(&p.vector);
        }
        if best.len() < bs {
            let r = linalg::random_dense(&mut rng, n, bs - best.len());
            s.slice_mut(nd::s![.., best.len()..]).assign(&r);
        }
        start = s;
    }
    if best.is_empty() {
        return Ok(best);
    }
    let mut y = Dense::zeros((n, best.len()));
    for (j, p) in best.iter().enumerate() {
        y.column_mut(j).assign(&p.vector);
    }
    Ok(rayleigh_ritz(op, &y)?.into_iter().filter(|p| (p.value - center).norm() <= radius).collect())
}

/// Quadrature node for `(1/2πi)∮ f(z) dz ≈ Σ w f(z)`.
#[derive(Clone, Copy, Debug)]
pub struct Node {
    pub z: C64,
    pub w: C64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Contour {
    Circle { center: C64, radius: f64 },
    /// Positively oriented rectangle; sides integrated with composite Gauss–Legendre.
    Rectangle { re: [f64; 2], im: [f64; 2] },
    /// `Re z = ρ + x`, `Im z = ±(c0 + c2·x²)` for `0 <= x <= x_max`, closed on the left by the
    /// segment `Re z = ρ`; encloses the region to its right.
    Parabolic { rho: f64, c0: f64, c2: f64, x_max: f64 },
}

fn segment(a: C64, b: C64, panels: usize, per_panel: usize) -> Vec<Node> {
    let (x, w) = linalg::gauss_legendre(per_panel);
    let two_pi_i = C64::new(0.0, 2.0 * std::f64::consts::PI);
    let mut out = vec![];
    for k in 0..panels {
        let pa = a + (b - a) * (k as f64 / panels as f64);
        let pb = a + (b - a) * ((k + 1) as f64 / panels as f64);
        let mid = (pa + pb) * 0.5;
        let half = (pb - pa) * 0.5;
        for (xi, wi) in x.iter().zip(&w) {
            out.push(Node { z: mid + half * *xi, w: half * *wi / two_pi_i });
        }
    }
    out
}

fn parabola_nodes(rho: f64, c0: f64, c2: f64, x_max: f64, sign: f64, reverse: bool, panels: usize, per_panel: usize) -> Vec<Node> {
    let (x, w) = linalg::gauss_legendre(per_panel);
    let two_pi_i = C64::new(0.0, 2.0 * std::f64::consts::PI);
    let mut out = vec![];
    for k in 0..panels {
        let a = x_max * k as f64 / panels as f64;
        let b = x_max * (k + 1) as f64 / panels as f64;
        for (xi, wi) in x.iter().zip(&w) {
            let s = 0.5 * (a + b) + 0.5 * (b - a) * xi;
            let z = C64::new(rho + s, sign * (c0 + c2 * s * s));
            let dz = C64::new(1.0, sign * 2.0 * c2 * s) * (0.5 * (b - a) * wi);
            let dz = if reverse { -dz } else { dz };
            out.push(Node { z, w: dz / two_pi_i });
        }
    }
    out
}

impl Contour {
    /// `NO′P′Q` in working units: real parts `±ϱ_h/h²`, imaginary parts `±1/h²`.
    pub fn rectangle_for(rho: f64, h: f64) -> Self {
        let h2 = h * h;
        Contour::Rectangle { re: [-rho / h2, rho / h2], im: [-1.0 / h2, 1.0 / h2] }
    }

    /// Parabolic contour `Γ₊ ∪ [MR] ∪ Γ₋` in working units for `B`, built from the rescaled curves
    /// `±[1 + (Re z − ϱ)²] = (b/h)² Im z`.
    pub fn parabolic_for(rho: f64, b: f64, h: f64, x_max: f64) -> Self {
        let h2 = h * h;
        Contour::Parabolic { rho: rho / h2, c0: 1.0 / (b * b), c2: h2 * h2 / (b * b), x_max }
    }

    pub fn nodes(&self, quad_n: usize) -> Vec<Node> {
        match *self {
            Contour::Circle { center, radius } => (0..quad_n)
                .map(|j| {
                    let e = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / quad_n as f64);
                    Node { z: center + e * radius, w: e * radius / quad_n as f64 }
                })
                .collect(),
            Contour::Rectangle { re, im } => {
                let corners = [C64::new(re[0], im[0]), C64::new(re[1], im[0]), C64::new(re[1], im[1]), C64::new(re[0], im[1])];
                let short = (re[1] - re[0]).min(im[1] - im[0]);
                let lens: Vec<f64> = (0..4).map(|s| (corners[(s + 1) % 4] - corners[s]).norm()).collect();
                let panels: Vec<usize> = lens.iter().map(|l| (l / short).ceil().max(1.0) as usize).collect();
                let total: usize = panels.iter().sum();
                let per = quad_n.div_ceil(total).max(4);
                (0..4).flat_map(|s| segment(corners[s], corners[(s + 1) % 4], panels[s], per)).collect()
            }
            Contour::Parabolic { rho, c0, c2, x_max } => {
                let per = 16;
                let pieces = quad_n.div_ceil(3 * per).max(1);
                let mut out = parabola_nodes(rho, c0, c2, x_max, 1.0, true, pieces, per);
                out.reverse();
                out.extend(segment(C64::new(rho, c0), C64::new(rho, -c0), pieces, per));
                out.extend(parabola_nodes(rho, c0, c2, x_max, -1.0, false, pieces, per));
                out
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjectorResult {
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub quad_n: usize,
    pub idempotency: f64,
    pub convergence: f64,
    /// Smallest estimated `1/‖(op − z)⁻¹‖₁` over the nodes.
    pub margin: f64,
    #[serde(skip)]
    pub range: Dense,
}

/// `Σ_j w_j (z_j − op)⁻¹ y` with the per-node distance proxy.
fn quadrature_apply(op: &Csr, nodes: &[Node], y: &Dense) -> Result<(Dense, f64)> {
    let n = op.nrows;
    let parts: Vec<(Dense, f64)> = nodes
        .par_iter()
        .map(|nd_| {
            let lu = BandLu::factor(&op.sub(&Csr::identity(n).scale(nd_.z)))?;
            let x = lu.solve_mat(y).mapv(|v| -v * nd_.w);
            Ok((x, 1.0 / lu.inv_norm1_estimate()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut acc = Dense::zeros(y.dim());
    let mut margin = f64::INFINITY;
    for (x, m) in parts {
        acc = acc + x;
        margin = margin.min(m);
    }
    Ok((acc, margin))
}

fn rank_by_gap(s: &[f64], scale: f64) -> Option<usize> {
    let mut seq = vec![scale];
    seq.extend_from_slice(s);
    let floor = 1e-300;
    let mut best = (0.0, 0);
    for i in 0..seq.len() - 1 {
        let r = seq[i] / seq[i + 1].max(floor);
        if r > best.0 {
            best = (r, i);
        }
    }
    if best.0 >= RANK_GAP && best.1 < s.len() {
        Some(best.1)
    } else {
        None
    }
}

/// Contour projector applied to a random probe block; rank from the singular-value gap.
pub fn contour_projector(op: &Csr, c: &Contour, quad_n: usize, probe: usize, seed: u64) -> Result<ProjectorResult> {
    let n = op.nrows;
    let probe = probe.min(n);
    let mut rng = linalg::rng(seed);
    let y = linalg::random_dense(&mut rng, n, probe);
    let scale = linalg::singular_values(&y)?.iter().cloned().fold(0.0, f64::max);
    let (p1, _) = quadrature_apply(op, &c.nodes(quad_n), &y)?;
    let (p2, margin) = quadrature_apply(op, &c.nodes(2 * quad_n), &y)?;
    let s1: Vec<f64> = linalg::singular_values(&p1)?.to_vec();
    let s2: Vec<f64> = linalg::singular_values(&p2)?.to_vec();
    let r1 = rank_by_gap(&s1, scale);
    let r2 = rank_by_gap(&s2, scale);
    let rank = match (r1, r2) {
        (Some(a), Some(b)) if a == b => b,
        _ => return Err(Error::QuadratureNotConverged(format!("rank {r1:?} at {quad_n} nodes, {r2:?} at {}", 2 * quad_n))),
    };
    let norm2 = linalg::frob(&p2).max(f64::MIN_POSITIVE);
    let convergence = linalg::frob(&(&p2 - &p1)) / norm2;
    let idempotency = if rank > 0 {
        let (pp, _) = quadrature_apply(op, &c.nodes(2 * quad_n), &p2)?;
        linalg::frob(&(&pp - &p2)) / norm2
    } else {
        0.0
    };
    let range = if rank > 0 {
        let (u, _, _) = linalg::svd(&p2)?;
        u.slice(nd::s![.., ..rank]).to_owned()
    } else {
        Dense::zeros((n, 0))
    };
    Ok(ProjectorResult { rank, singular_values: s2, quad_n: 2 * quad_n, idempotency, convergence, margin, range })
}

/// Cluster eigenpairs of one degree block.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterDegree {
    pub degree: usize,
    pub base_degree: Option<usize>,
    /// Fixed points of `z = eig S₀(z)`.
    pub schur_values: Vec<C64>,
    /// Eigenvalues from the `r`-Gram form of the Hodge factors; real by construction.
    pub values: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Extreme eigenvalues of `Q†RQ` for an orthonormal basis `Q` of the cluster space.
    pub gram_range: [f64; 2],
    /// Number of eigenvalues of `S₀(0)` with modulus at most the cluster radius.
    pub schur_count: usize,
    #[serde(skip)]
    pub vectors: Dense,
}

fn schur_complement(asm: &BismutAssembly, gp: &GroundProjector, u: &Dense, bu: &Dense, p: usize, z: C64) -> Result<(Dense, Dense)> {
    let solver = GradedSolver::with_degrees(&asm.op, Some(&gp.perp), z, &[p])?;
    let ebu = solver.solve_mat(bu);
    let ut = linalg::adjoint(u);
    let s = ut.dot(bu) - ut.dot(&asm.op.apply_mat(&ebu));
    Ok((s, ebu))
}

fn nearest(vals: &nd::Array1<C64>, target: C64) -> usize {
    (0..vals.len()).min_by(|&a, &b| (vals[a] - target).norm().partial_cmp(&(vals[b] - target).norm()).unwrap()).unwrap()
}

/// `r`-Gram eigenvalues on `span Y`: `½[(δY)†R(δY) + (δ^{*,r}Y)†R(δ^{*,r}Y)]` against `Y†RY`.
pub fn hodge_gram_values(hf: &HodgeFactor, y: &Dense) -> Result<(Vec<f64>, [f64; 2])> {
    let ry = hf.r.apply_mat(y);
    let g = linalg::adjoint(y).dot(&ry);
    let dy = hf.delta.apply_mat(y);
    let dry = hf.delta_r.apply_mat(y);
    let m = (linalg::adjoint(&dy).dot(&hf.r.apply_mat(&dy)) + linalg::adjoint(&dry).dot(&hf.r.apply_mat(&dry))).mapv(|x| x * 0.5);
    // r is definite of sign (−1)^(fiber degree) on the cluster
    let sgn = if (0..g.nrows()).map(|i| g[[i, i]].re).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let g = g.mapv(|x| x * sgn);
    let m = m.mapv(|x| x * sgn);
    let (gv, gvec) = linalg::eigh(&g)?;
    let ynorm = linalg::eigh(&linalg::adjoint(y).dot(y))?.0;
    let q = linalg::orthonormalize(y, None, 1e-13);
    let qg = linalg::eigh(&linalg::adjoint(&q).dot(&hf.r.apply_mat(&q)))?.0;
    let range = [qg.iter().cloned().fold(f64::INFINITY, f64::min), qg.iter().cloned().fold(f64::NEG_INFINITY, f64::max)];
    if gv.iter().any(|x| *x <= 1e-14 * ynorm.iter().cloned().fold(0.0, f64::max)) {
        return Err(Error::RFormNotPositive(range[0]));
    }
    let mut w = gvec.clone();
    for (j, gj) in gv.iter().enumerate() {
        w.column_mut(j).mapv_inplace(|x| x / gj.sqrt());
    }
    let red = linalg::adjoint(&w).dot(&m).dot(&w);
    Ok((linalg::eigh(&red)?.0.to_vec(), range))
}

/// Cluster eigenpairs per total degree through the Schur complement on `Ran π₀`.
///
/// `counts` are the Witten cluster sizes in base degrees 0 and 1; `radius` bounds the cluster
/// (working units).
pub fn cluster_eigenpairs(asm: &BismutAssembly, gp: &GroundProjector, hf: &HodgeFactor, counts: [usize; 2], radius: f64) -> Result<Vec<ClusterDegree>> {
    let mut out = vec![];
    for p in 0..3 {
        let Some(bp) = base_degree(asm.sign, p) else {
            out.push(ClusterDegree {
                degree: p,
                base_degree: None,
                schur_values: vec![],
                values: vec![],
                residuals: vec![],
                gram_range: [1.0, 1.0],
                schur_count: 0,
                vectors: Dense::zeros((asm.dim(), 0)),
            });
            continue;
        };
        let u = gp.u_degree(bp).to_dense();
        let bu = asm.op.apply_mat(&u);
        let (s0, _) = schur_complement(asm, gp, &u, &bu, p, ZERO)?;
        let ev0 = linalg::eigvals(&s0)?;
        let schur_count = ev0.iter().filter(|l| l.norm() <= radius).count();
        let mut order: Vec<usize> = (0..ev0.len()).collect();
        order.sort_by(|a, b| ev0[*a].norm().partial_cmp(&ev0[*b].norm()).unwrap());
        let want = counts[bp];
        let mut values = vec![];
        let mut vectors = Dense::zeros((asm.dim(), want));
        let mut residuals = vec![];
        for (j, &o) in order.iter().take(want).enumerate() {
            let mut z = ev0[o];
            let mut converged = false;
            let mut vec_j = Vector::zeros(asm.dim());
            for _ in 0..8 {
                let (s, ebu) = schur_complement(asm, gp, &u, &bu, p, z)?;
                let (vals, vecs) = linalg::eig(&s)?;
                let k = nearest(&vals, z);
                let znew = vals[k];
                let v = vecs.column(k).to_owned();
                vec_j = u.dot(&v) - ebu.dot(&v);
                let step = (znew - z).norm();
                z = znew;
                if step <= 1e-13 * (1.0 + z.norm()) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NotConverged(format!("Schur fixed point in degree {p}")));
            }
            let nv = linalg::norm(&vec_j);
            let vec_j = vec_j.mapv(|x| x / nv);
            residuals.push(residual(&asm.op, z, &vec_j));
            vectors.column_mut(j).assign(&vec_j);
            values.push(z);
        }
        let (refined, gram_range) = if want > 0 { hodge_gram_values(hf, &vectors)? } else { (vec![], [1.0, 1.0]) };
        out.push(ClusterDegree { degree: p, base_degree: Some(bp), schur_values: values, values: refined, residuals, gram_range, schur_count, vectors });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub degree: usize,
    pub index: usize,
    pub lambda_b: f64,
    pub lambda_b_im: f64,
    pub residual: f64,
    /// `λ̃/h²` from `½Δ`.
    pub lambda_w: f64,
    pub ratio: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralReport {
    pub sign: Sign,
    pub b: f64,
    pub h: f64,
    pub rho: f64,
    pub kappa: f64,
    pub admissible: bool,
    pub counts: [usize; 3],
    pub ranks: Option<[usize; 3]>,
    pub rows: Vec<ComparisonRow>,
    pub max_imag: f64,
    pub max_residual: f64,
    pub all_pass: bool,
}

/// Pairs cluster eigenvalues of `B^{(p)}` with those of `½h⁻²Δ` of the matching base degree.
pub fn compare_with_witten(asm: &BismutAssembly, clusters: &[ClusterDegree], gap: &GapCertificate, kappa: f64, admissibility: (f64, f64), ranks: Option<[usize; 3]>) -> Result<SpectralReport> {
    let h2 = asm.h * asm.h;
    let mut rows = vec![];
    let mut counts = [0; 3];
    for c in clusters {
        let expected = c.base_degree.map(|bp| gap.counts[bp]).unwrap_or(0);
        counts[c.degree] = c.values.len();
        if c.schur_count != expected {
            return Err(Error::CountMismatch { rank: c.schur_count, expected });
        }
        if let Some(r) = ranks {
            if r[c.degree] != expected {
                return Err(Error::CountMismatch { rank: r[c.degree], expected });
            }
        }
        let Some(bp) = c.base_degree else { continue };
        let mut lw = gap.cluster[bp].clone();
        lw.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut idx: Vec<usize> = (0..c.values.len()).collect();
        idx.sort_by(|a, b| c.values[*a].partial_cmp(&c.values[*b]).unwrap());
        let mut schur_sorted = c.schur_values.clone();
        schur_sorted.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (j, &i) in idx.iter().enumerate() {
            let lb = c.values[i];
            let w = lw.get(j).copied().unwrap_or(f64::NAN);
            let zero_scale = 1e-20 * gap.rho;
            let (ratio, pass) = if (lb * h2).abs() < zero_scale && w.abs() < zero_scale {
                (None, true)
            } else {
                let r = lb * h2 / w;
                (Some(r), r >= 1.0 / (1.0 + kappa) && r <= 1.0 + kappa)
            };
            rows.push(ComparisonRow {
                degree: c.degree,
                index: j,
                lambda_b: lb,
                lambda_b_im: schur_sorted.get(j).map(|z| z.im).unwrap_or(0.0),
                residual: c.residuals.get(i).copied().unwrap_or(0.0),
                lambda_w: w / h2,
                ratio,
                pass,
            });
        }
    }
    let max_imag = clusters.iter().flat_map(|c| c.schur_values.iter().map(|z| z.im.abs())).fold(0.0, f64::max);
    let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    let (lhs, rhs) = admissibility;
    Ok(SpectralReport {
        sign: asm.sign,
        b: asm.b,
        h: asm.h,
        rho: gap.rho,
        kappa,
        admissible: lhs <= rhs,
        counts,
        ranks,
        all_pass: rows.iter().all(|r| r.pass),
        rows,
        max_imag,
        max_residual,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HodgeSingular {
    pub degree: usize,
    /// Singular values of `δ` into and out of the degree.
    pub mu_in: Vec<f64>,
    pub mu_out: Vec<f64>,
    /// Nonzero `μ²/2` from both maps, padded with zeros; ascending.
    pub predicted: Vec<f64>,
    /// Schur eigenvalues of the degree, ascending real parts.
    pub lambda: Vec<f64>,
    pub max_rel_err: f64,
}

fn r_orthonormal(hf: &HodgeFactor, y: &Dense) -> Result<Dense> {
    let g = linalg::adjoint(y).dot(&hf.r.apply_mat(y));
    let (gv, gvec) = linalg::eigh(&g)?;
    // definite of either sign; X†RX = ±1
    let sgn = if gv.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    if let Some(bad) = gv.iter().find(|x| sgn * **x <= 0.0) {
        return Err(Error::RFormNotPositive(*bad));
    }
    let mut w = gvec.clone();
    for (j, gj) in gv.iter().enumerate() {
        w.column_mut(j).mapv_inplace(|x| x / (sgn * gj).sqrt());
    }
    Ok(y.dot(&w))
}

/// Cluster spectrum per degree against `μ²/2`, `μ` the singular values of `δ` between
/// `r`-orthonormal bases of neighbouring clusters. Values below `zero_scale` count as zero.
pub fn hodge_singular_values(hf: &HodgeFactor, clusters: &[ClusterDegree], zero_scale: f64) -> Result<Vec<HodgeSingular>> {
    let bases: Vec<Option<Dense>> = clusters
        .iter()
        .map(|c| if c.vectors.ncols() == 0 { Ok(None) } else { r_orthonormal(hf, &c.vectors).map(Some) })
        .collect::<Result<_>>()?;
    let mut maps: Vec<Vec<f64>> = vec![];
    for p in 0..clusters.len().saturating_sub(1) {
        let sv = match (&bases[p], &bases[p + 1]) {
            (Some(x), Some(z)) => {
                let s = linalg::adjoint(z).dot(&hf.r.apply_mat(&hf.delta.apply_mat(x)));
                linalg::singular_values(&s)?.to_vec()
            }
            _ => vec![],
        };
        maps.push(sv);
    }
    let mut out = vec![];
    for (p, c) in clusters.iter().enumerate() {
        let n = c.schur_values.len();
        if n == 0 {
            continue;
        }
        let mu_in = if p > 0 { maps[p - 1].clone() } else { vec![] };
        let mu_out = maps.get(p).cloned().unwrap_or_default();
        let mut pred: Vec<f64> = mu_in.iter().chain(&mu_out).map(|m| 0.5 * m * m).filter(|x| *x > zero_scale).collect();
        pred.resize(n.max(pred.len()), 0.0);
        pred.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pred.drain(..pred.len() - n);
        let mut lambda: Vec<f64> = c.schur_values.iter().map(|z| z.re).collect();
        lambda.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut err: f64 = 0.0;
        for (h, l) in pred.iter().zip(&lambda) {
            let s = h.abs().max(l.abs());
            if s > zero_scale {
                err = err.max((h - l).abs() / s);
            }
        }
        out.push(HodgeSingular { degree: p, mu_in, mu_out, predicted: pred, lambda, max_rel_err: err });
    }
    Ok(out)
}

/// `‖(1 − π₀)Π_E‖` for the spectral projector onto `span Y` along its `r`-orthogonal complement.
pub fn distance_to_kernel(gp: &GroundProjector, hf: &HodgeFactor, y: &Dense) -> Result<f64> {
    if y.ncols() == 0 {
        return Ok(0.0);
    }
    let x = r_orthonormal(hf, y)?;
    // Π_E = X X† R; with R unitary, ‖(1−π₀)Π_E‖ = ‖(1−π₀)X X†‖
    let mut px = x.clone();
    for &i in &gp.zero {
        px.row_mut(i).fill(ZERO);
    }
    let q = linalg::orthonormalize(&x, None, 1e-14);
    let m = px.dot(&linalg::adjoint(&x).dot(&q));
    linalg::spectral_norm(&m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemigroupMode {
    Expm,
    Eigen,
    Contour,
}

/// Cluster part of `e^{−tB}` on one degree block: right eigenvectors and their `r`-duals.
#[derive(Clone, Debug)]
pub struct SemigroupSplit {
    pub values: Vec<C64>,
    pub right: Dense,
    /// Rows `(G⁻¹Y†R)`.
    pub dual: Dense,
}

impl SemigroupSplit {
    /// Lowest `count` eigenpairs (by real part) of a dense block, with `r` the diagonal of `R`.
    pub fn from_block(block: &Dense, r_diag: &[f64], count: usize) -> Result<Self> {
        let (vals, vecs) = linalg::eig(block)?;
        let mut order: Vec<usize> = (0..vals.len()).collect();
        order.sort_by(|a, b| vals[*a].re.partial_cmp(&vals[*b].re).unwrap());
        let n = block.nrows();
        let mut y = Dense::zeros((n, count));
        let mut values = vec![];
        for (j, &o) in order.iter().take(count).enumerate() {
            y.column_mut(j).assign(&vecs.column(o));
            values.push(vals[o]);
        }
        let ry = Dense::from_shape_fn((n, count), |(i, j)| y[(i, j)] * r_diag[i]);
        let g = linalg::adjoint(&y).dot(&ry);
        let dual = linalg::solve_mat(&g, &linalg::adjoint(&ry))?;
        Ok(SemigroupSplit { values, right: y, dual })
    }

    pub fn cluster_part(&self, t: f64) -> Dense {
        let mut y = self.right.clone();
        for (j, l) in self.values.iter().enumerate() {
            let e = (-l * t).exp();
            y.column_mut(j).mapv_inplace(|x| x * e);
        }
        y.dot(&self.dual)
    }
}

/// `e^{−tB}` on a dense degree block.
pub fn semigroup(block: &Dense, t: f64, mode: SemigroupMode, split: Option<&SemigroupSplit>, contour: Option<&Contour>) -> Result<Dense> {
    if !(t > 0.0) {
        return Err(Error::Dimension("t must be positive".into()));
    }
    match mode {
        SemigroupMode::Expm => linalg::expm(&block.mapv(|x| -x * t)),
        SemigroupMode::Eigen => {
            let (vals, vecs) = linalg::eig(block)?;
            let mut scaled = vecs.clone();
            for (j, l) in vals.iter().enumerate() {
                let e = (-l * t).exp();
                scaled.column_mut(j).mapv_inplace(|x| x * e);
            }
            linalg::solve_mat(&vecs.t().to_owned(), &scaled.t().to_owned()).map(|m| m.t().to_owned())
        }
        SemigroupMode::Contour => {
            let split = split.ok_or_else(|| Error::ContourNotConverged("cluster split required".into()))?;
            let c = contour.ok_or_else(|| Error::ContourNotConverged("contour required".into()))?;
            Ok(split.cluster_part(t) + contour_remainder(block, t, c)?)
        }
    }
}

/// `(1/2πi)∮ e^{−tz}(z − B)⁻¹dz`, doubling the nodes until the relative change is below `1e-9`.
pub fn contour_remainder(block: &Dense, t: f64, c: &Contour) -> Result<Dense> {
    let n = block.nrows();
    let eval = |q: usize| -> Result<Dense> {
        let parts: Vec<Dense> = c
            .nodes(q)
            .par_iter()
            .map(|nd_| {
                let m = linalg::eye(n).mapv(|x| x * nd_.z) - block;
                Ok(linalg::inv(&m)?.mapv(|x| x * nd_.w * (-nd_.z * t).exp()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(parts.into_iter().fold(Dense::zeros((n, n)), |a, b| a + b))
    };
    let mut q = 96;
    let mut prev = eval(q)?;
    while q <= 96 * 64 {
        q *= 2;
        let cur = eval(q)?;
        let change = linalg::frob(&(&cur - &prev)) / linalg::frob(&cur).max(1e-300);
        if change < 1e-9 {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::ContourNotConverged(format!("no convergence with {q} nodes at t = {t}")))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SemigroupRow {
    pub degree: usize,
    pub t: f64,
    pub remainder: f64,
    pub bound: f64,
    pub slack: f64,
    pub expm_vs_eigen: f64,
}

/// `‖e^{−tB}(1 − Π_E)‖` against `(1/b²)(h² + 1/t)e^{−tϱ_h/h²}` on each degree block.
pub fn semigroup_remainder(asm: &BismutAssembly, counts: [usize; 3], rho: f64, times: &[f64]) -> Result<Vec<SemigroupRow>> {
    let r = asm.r_matrix();
    let mut rows = vec![];
    for p in 0..3 {
        let idx = asm.degree_indices(p);
        let block = asm.op.submatrix(&idx, &idx).to_dense();
        let r_diag: Vec<f64> = idx.iter().map(|&i| r.get(i, i).re).collect();
        let split = SemigroupSplit::from_block(&block, &r_diag, counts[p])?;
        for &t in times {
            let ex = semigroup(&block, t, SemigroupMode::Expm, None, None)?;
            let ei = semigroup(&block, t, SemigroupMode::Eigen, None, None)?;
            let agree = linalg::frob(&(&ex - &ei)) / linalg::frob(&ex).max(1e-300);
            let rem = linalg::spectral_norm(&(&ex - &split.cluster_part(t)))?;
            let bound = (asm.h * asm.h + 1.0 / t) * (-t * rho / (asm.h * asm.h)).exp() / (asm.b * asm.b);
            rows.push(SemigroupRow { degree: p, t, remainder: rem, bound, slack: bound - rem, expm_vs_eigen: agree });
        }
    }
    Ok(rows)
}

/// Hausdorff distance between the spectrum of a dense block and its complex conjugate.
pub fn conjugation_gap(block: &Dense) -> Result<f64> {
    let s: Vec<C64> = linalg::eigvals(block)?.to_vec();
    let c: Vec<C64> = s.iter().map(|z| z.conj()).collect();
    Ok(linalg::hausdorff(&s, &c))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualityReport {
    /// Relative mismatch of `Spec B₋^{(p)}` and `Spec B₊^{(2−p)}` for the same potential.
    pub same_potential: [f64; 3],
    /// The same with `−V` on the `+` side.
    pub negated_potential: [f64; 3],
}

/// Compares low spectra of `B₋^{(p)}` with `B₊^{(2−p)}` (dense eigensolves, small instances).
pub fn poincare_duality(d: &Discretization, v: &Potential, b: f64, h: f64, count: usize) -> Result<DualityReport> {
    let minus = BismutAssembly::new(d, v, Sign::Minus, b, h)?;
    let plus = BismutAssembly::new(d, v, Sign::Plus, b, h)?;
    let plus_neg = BismutAssembly::new(d, &v.negated(), Sign::Plus, b, h)?;
    let low = |m: &Csr| -> Result<Vec<C64>> {
        let mut s: Vec<C64> = linalg::eigvals(&m.to_dense())?.to_vec();
        s.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
        s.truncate(count);
        Ok(s)
    };
    let mut same = [0.0; 3];
    let mut neg = [0.0; 3];
    for p in 0..3 {
        let a = low(&minus.block(p))?;
        let bsame = low(&plus.block(2 - p))?;
        let bneg = low(&plus_neg.block(2 - p))?;
        let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
        same[p] = linalg::hausdorff(&a, &bsame) / scale;
        neg[p] = linalg::hausdorff(&a, &bneg) / scale;
    }
    Ok(DualityReport { same_potential: same, negated_potential: neg })
}

/// Degree of each flat coordinate, for callers that split reports.
pub fn degree_of(i: usize) -> usize {
    DEGREE[i % 4]
}

/// Unit vector helper for probes.
pub fn unit(n: usize, i: usize) -> Vector {
    let mut e = Vector::from_elem(n, ZERO);
    e[i] = ONE;
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bismut::{build_hodge, build_projectors};
    use crate::witten::{gap_certificate, WittenAssembly};
    use std::f64::consts::PI;

    #[test]
    fn circle_quadrature_counts_poles() {
        let op = Csr::diag(&[C64::new(0.1, 0.0), C64::new(-0.2, 0.1), C64::new(3.0, 0.0), C64::new(5.0, 1.0)]);
        let r = contour_projector(&op, &Contour::Circle { center: ZERO, radius: 1.0 }, 32, 4, 1).unwrap();
        assert_eq!(r.rank, 2);
        assert!(r.idempotency < 1e-10);
        let rect = Contour::Rectangle { re: [-0.5, 4.0], im: [-0.5, 0.5] };
        let r = contour_projector(&op, &rect, 64, 4, 1).unwrap();
        assert_eq!(r.rank, 3);
    }

    #[test]
    fn arnoldi_matches_dense() {
        let d = Discretization::new(4, 6, 2.0 * PI);
        let asm = BismutAssembly::new(&d, &Potential::single_well(), Sign::Plus, 0.5, 1.0).unwrap();
        let blk = asm.block(1);
        let dense = eigs_in_disc(&blk, ZERO, 3.0, 6, &DiscOptions::default()).unwrap();
        let opts = DiscOptions { dense_limit: 0, ..Default::default() };
        let sparse = eigs_in_disc(&blk, ZERO, 3.0, 6, &opts).unwrap();
        assert_eq!(dense.len(), sparse.len());
        let a: Vec<C64> = dense.iter().map(|p| p.value).collect();
        let b: Vec<C64> = sparse.iter().map(|p| p.value).collect();
        assert!(linalg::hausdorff(&a, &b) < 1e-9, "{a:?} {b:?}");
    }

    #[test]
    fn cluster_matches_dense_and_hodge() {
        let d = Discretization::new(10, 10, 2.0 * PI);
        let v = Potential::double_well();
        let h = 0.3;
        let w = WittenAssembly::new(&d, &v, h).unwrap();
        let gap = gap_certificate(&w, &v.barcode(2048).unwrap()).unwrap();
        let b = h * gap.rho / 50.0;
        let asm = BismutAssembly::new(&d, &v, Sign::Plus, b, h).unwrap();
        let gp = build_projectors(&d, Sign::Plus);
        let hf = build_hodge(&asm).unwrap();
        let cl = cluster_eigenpairs(&asm, &gp, &hf, gap.counts, gap.rho / (h * h)).unwrap();
        assert_eq!(cl[0].schur_count, 2);
        assert_eq!(cl[1].schur_count, 2);
        assert!(cl[2].values.is_empty());
        let hs = hodge_singular_values(&hf, &cl, 1e-12).unwrap();
        assert_eq!(hs.len(), 2);
        assert!(hs.iter().all(|x| x.max_rel_err < 1e-6), "{hs:?}");
        let rep = compare_with_witten(&asm, &cl, &gap, 0.15, (0.0, 1.0), None).unwrap();
        assert!(rep.all_pass, "{rep:?}");
    }

    #[test]
    fn contour_semigroup_matches_expm() {
        let d = Discretization::new(4, 6, 2.0 * PI);
        let v = Potential::single_well();
        let (b, h) = (0.5, 0.5);
        let asm = BismutAssembly::new(&d, &v, Sign::Plus, b, h).unwrap();
        let idx = asm.degree_indices(0);
        let block = asm.op.submatrix(&idx, &idx).to_dense();
        let r = asm.r_matrix();
        let r_diag: Vec<f64> = idx.iter().map(|&i| r.get(i, i).re).collect();
        let ev = linalg::eigvals(&block).unwrap();
        let mut re: Vec<f64> = ev.iter().map(|z| z.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let rho = 0.5 * (re[0] + re[1]) * h * h;
        let t = 2.0;
        let x_max = 40.0 / t;
        let c = Contour::parabolic_for(rho, b, h, x_max);
        let split = SemigroupSplit::from_block(&block, &r_diag, 1).unwrap();
        let ex = semigroup(&block, t, SemigroupMode::Expm, None, None).unwrap();
        let co = semigroup(&block, t, SemigroupMode::Contour, Some(&split), Some(&c)).unwrap();
        let err = linalg::frob(&(&ex - &co)) / linalg::frob(&ex);
        assert!(err < 1e-7, "{err:e}");
    }
}
