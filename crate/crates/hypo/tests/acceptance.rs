//! Quantitative acceptance checks. Each test prints one `PASS`/`FAIL` line and then asserts.

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use hypo::basis::Discretization;
use hypo::bismut::{self, build_hodge, build_projectors, BismutAssembly, Sign};
use hypo::grushin::{self, Region};
use hypo::linalg;
use hypo::potential::{sublevel_components, Barcode, Potential};
use hypo::spectral::{self, Contour};
use hypo::witten::{self, GapCertificate, WittenAssembly};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};

fn report(n: u32, ok: bool, detail: String) {
    // written past libtest's capture so every criterion shows in a plain run
    let _ = writeln!(std::io::stderr().lock(), "criterion {n}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n}: {detail}");
}

fn full(k: usize) -> Discretization {
    Discretization::new(k, 32, 2.0 * PI)
}

fn certificate(d: &Discretization, v: &Potential, h: f64) -> (WittenAssembly, GapCertificate) {
    let w = WittenAssembly::new(d, v, h).unwrap();
    let gap = witten::gap_certificate(&w, &v.barcode(4096).unwrap()).unwrap();
    (w, gap)
}

/// Nonzero cluster eigenvalue of degree 0 in rescaled units, from the Bismut side.
fn bismut_lambda(d: &Discretization, v: &Potential, h: f64, b: f64, gap: &GapCertificate) -> f64 {
    let asm = BismutAssembly::new(d, v, Sign::Plus, b, h).unwrap();
    let gp = build_projectors(d, Sign::Plus);
    let hf = build_hodge(&asm).unwrap();
    let cl = spectral::cluster_eigenpairs(&asm, &gp, &hf, gap.counts, gap.rho / (h * h)).unwrap();
    cl[0].values.iter().cloned().fold(0.0, f64::max) * h * h
}

#[test]
fn criterion_1_algebraic_identity() {
    let d = full(24);
    let mut worst: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    for v in [Potential::zero(2.0 * PI), Potential::single_well(), Potential::double_well()] {
        for h in [1.0, 0.5, 0.25] {
            for sign in [Sign::Plus, Sign::Minus] {
                let t = Instant::now();
                let w = WittenAssembly::new(&d, &v, h).unwrap();
                let asm = BismutAssembly::new(&d, &v, sign, 1.0, h).unwrap();
                let gp = build_projectors(&d, sign);
                let r = bismut::bismut_identity_check(&asm, &w, &gp);
                worst = worst.max(r.max());
                slowest = slowest.max(t.elapsed().as_secs_f64());
            }
        }
    }
    report(1, worst < 1e-8 && slowest < 60.0, format!("max residual {worst:.2e}, slowest case {slowest:.1}s"));
}

#[test]
fn criterion_2_hodge_and_pt() {
    let v = Potential::double_well();
    let mut nil: f64 = 0.0;
    let mut pt: f64 = 0.0;
    for sign in [Sign::Plus, Sign::Minus] {
        let asm = BismutAssembly::new(&full(24), &v, sign, 0.05, 0.3).unwrap();
        let hf = build_hodge(&asm).unwrap();
        let rep = bismut::hodge_report(&asm, &hf, 20, 11);
        nil = nil.max(rep.nilpotency).max(rep.nilpotency_r);
        pt = pt.max(bismut::pt_symmetry_check(&asm));
    }
    // dense spectra only on a small instance
    let small = Discretization::new(10, 12, 2.0 * PI);
    let asm = BismutAssembly::new(&small, &v, Sign::Plus, 0.05, 0.3).unwrap();
    let mut conj: f64 = 0.0;
    for p in 0..3 {
        let blk = asm.block(p).to_dense();
        let norm = linalg::spectral_norm(&blk).unwrap();
        conj = conj.max(spectral::conjugation_gap(&blk).unwrap() / norm);
    }
    report(2, nil < 1e-12 && pt < 1e-12 && conj <= 1e-8, format!("‖δ²u‖ {nil:.2e}, ‖RBR−B†‖/‖B‖ {pt:.2e}, conjugation gap/‖B‖ {conj:.2e}"));
}

#[test]
fn criterion_3_reality_and_counts() {
    let t = Instant::now();
    let v = Potential::double_well();
    let h = 0.15;
    let d = full(24);
    let (_, gap) = certificate(&d, &v, h);
    let b = h * gap.rho / 50.0;
    let mut ranks = [[0usize; 3]; 2];
    let mut imag: f64 = 0.0;
    let mut c0: f64 = 1.0;
    for (si, sign) in [Sign::Plus, Sign::Minus].into_iter().enumerate() {
        let asm = BismutAssembly::new(&d, &v, sign, b, h).unwrap();
        let gp = build_projectors(&d, sign);
        let hf = build_hodge(&asm).unwrap();
        c0 = c0.max(bismut::fitted_c0(&asm, &gp).unwrap());
        let cl = spectral::cluster_eigenpairs(&asm, &gp, &hf, gap.counts, gap.rho / (h * h)).unwrap();
        imag = imag.max(cl.iter().flat_map(|c| c.schur_values.iter().map(|z| z.im.abs())).fold(0.0, f64::max));
        let contour = Contour::rectangle_for(gap.rho, h);
        for p in 0..3 {
            let pr = spectral::contour_projector(&asm.block(p), &contour, 128, 8, 5 + p as u64).unwrap();
            ranks[si][p] = pr.rank;
        }
    }
    let a = c0;
    let admissible = b * a.powi(4) * c0 <= h * gap.rho;
    let tol = 1e-8 * gap.rho / (h * h);
    let secs = t.elapsed().as_secs_f64();
    let ok = imag < tol && ranks[0] == [2, 2, 0] && ranks[1] == [0, 2, 2] && secs < 600.0;
    report(3, ok, format!("max|Im λ| {imag:.2e} (tol {tol:.2e}), ranks + {:?} − {:?}, C₀ {c0:.3}, admissible {admissible}, {secs:.0}s", ranks[0], ranks[1]));
}

#[test]
fn criterion_4_witten_comparison() {
    let v = Potential::double_well();
    let h = 0.15;
    let d = full(24);
    let (_, gap) = certificate(&d, &v, h);
    let lw = gap.cluster[0].iter().cloned().fold(0.0, f64::max);
    let b = h * gap.rho / 50.0;
    let dev = |b: f64| (bismut_lambda(&d, &v, h, b, &gap) / lw - 1.0).abs();
    let (d1, d2) = (dev(b), dev(b / 2.0));
    let factor = d1 / d2;
    let ok = d1 <= 0.15 && (1.5..=3.0).contains(&factor);
    report(4, ok, format!("|ratio − 1| = {d1:.3e} at b, {d2:.3e} at b/2, reduction factor {factor:.3} (required [1.5, 3])"));
}

#[test]
fn criterion_5_grushin() {
    let v = Potential::double_well();
    let h = 0.5;
    let d = Discretization::new(12, 16, 2.0 * PI);
    let w = WittenAssembly::new(&d, &v, h).unwrap();
    let q = grushin::working_truncation(&w, 2.0, 1.0, d.c_g);
    let gp = build_projectors(&d, Sign::Plus);
    let asm = BismutAssembly::new(&d, &v, Sign::Plus, 0.05, h).unwrap();
    let gb = grushin::build_blocks(&asm, &gp, Some(&q), C64::new(-0.3, 0.7) / (h * h)).unwrap();
    let recon = gb.left_inverse_residual(20, 1).max(gb.schur_residual(20, 2).unwrap());
    let bs = [0.08, 0.04, 0.02, 0.01];
    let errs: Vec<f64> = bs
        .iter()
        .map(|&b| {
            let asm = BismutAssembly::new(&d, &v, Sign::Plus, b, h).unwrap();
            let gb = grushin::build_blocks(&asm, &gp, None, C64::new(-1.0, 0.0)).unwrap();
            grushin::effective_operator_error(&w, &gb).unwrap()
        })
        .collect();
    let slope = grushin::loglog_slope(&bs, &errs);
    report(5, recon < 1e-8 && slope >= 0.8, format!("reconstruction {recon:.2e}, effective-operator errors {}, slope {slope:.3}", errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(" ")));
}

#[test]
fn criterion_6_region_table() {
    let v = Potential::double_well();
    let h = 0.3;
    let d = Discretization::new(12, 16, 2.0 * PI);
    let (w, gap) = certificate(&d, &v, h);
    let gp = build_projectors(&d, Sign::Plus);
    let mut rows = vec![];
    for br in [gap.rho / 20.0, gap.rho / 40.0, gap.rho / 80.0] {
        let asm = BismutAssembly::new(&d, &v, Sign::Plus, br * h, h).unwrap();
        for a in [2.0, 3.0, 4.0] {
            for r in Region::ALL {
                rows.push((r, grushin::region_point(&asm, &gp, &w, r, a, 1.0, gap.rho, 0.0, 3).unwrap()));
            }
        }
    }
    let mut fits = vec![];
    let mut ok = true;
    for r in Region::ALL {
        let sel: Vec<_> = rows.iter().filter(|(x, _)| *x == r).map(|(_, row)| row).collect();
        if r == Region::HighImaginary {
            let slack = sel.iter().map(|row| row.slack).fold(f64::INFINITY, f64::min);
            ok &= slack >= 0.0;
            fits.push(format!("{} min slack {slack:.3e}", r.label()));
            continue;
        }
        let meas: Vec<f64> = sel.iter().map(|row| if r.bounds_resolvent() { row.norm_r } else { row.norm_d }).collect();
        let shape: Vec<f64> = sel.iter().map(|row| row.bound_rhs).collect();
        let fit = grushin::fit_shape(r.label(), &meas, &shape);
        ok &= fit.r_squared >= 0.9;
        fits.push(format!("{} C={:.3e} R²={:.3}", r.label(), fit.constant, fit.r_squared));
    }
    report(6, ok, fits.join(", "));
}

#[test]
fn criterion_7_semigroup() {
    let v = Potential::double_well();
    let h = 0.3;
    let d = Discretization::new(10, 8, 2.0 * PI);
    let (_, gap) = certificate(&d, &v, h);
    let b = h * gap.rho / 50.0;
    let asm = BismutAssembly::new(&d, &v, Sign::Plus, b, h).unwrap();
    let times: Vec<f64> = [1.0, 5.0, 25.0].iter().map(|c| c * h * h / gap.rho).collect();
    let rows = spectral::semigroup_remainder(&asm, [2, 2, 0], gap.rho, &times).unwrap();
    let slack = rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    let agree = rows.iter().filter(|r| r.t == times[0]).map(|r| r.expm_vs_eigen).fold(0.0, f64::max);
    report(7, slack >= 0.0 && agree <= 1e-8, format!("min slack {slack:.3e}, expm/eigen agreement at t = h²/ϱ {agree:.2e}"));
}

fn random_potential<R: Rng>(rng: &mut R) -> Potential {
    let n = rng.gen_range(1..=4);
    let cos: Vec<f64> = (0..=n).map(|j| if j == 0 { 0.0 } else { rng.gen_range(-1.0..1.0) }).collect();
    let sin: Vec<f64> = (0..=n).map(|j| if j == 0 { 0.0 } else { rng.gen_range(-1.0..1.0) }).collect();
    Potential::new(2.0 * PI, cos, sin)
}

#[test]
fn criterion_8_arrhenius_and_barcode() {
    let v = Potential::double_well();
    let bc = v.barcode(4096).unwrap();
    let l1 = bc.lengths().iter().cloned().fold(f64::INFINITY, f64::min);
    let mut bismut_pts = vec![];
    let mut witten_pts = vec![];
    for (h, k) in [(0.30, 24), (0.25, 24), (0.20, 24), (0.15, 24), (0.12, 36)] {
        let d = full(k);
        let (_, gap) = certificate(&d, &v, h);
        let b = h * gap.rho / 50.0;
        bismut_pts.push((h, bismut_lambda(&d, &v, h, b, &gap)));
        witten_pts.push((h, gap.cluster[0].iter().cloned().fold(0.0, f64::max)));
    }
    let fb = witten::arrhenius_fit(&bismut_pts);
    let fw = witten::arrhenius_fit(&witten_pts);
    let rel = (fb.intercept / (2.0 * l1) - 1.0).abs();

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut mismatches = 0;
    let mut tested = 0;
    while tested < 20 {
        let p = random_potential(&mut rng);
        let Ok(bc) = p.barcode(8192) else { continue };
        tested += 1;
        let samples = p.sample(1 << 15);
        let oracle = Barcode::from_samples(&samples);
        let mut crit: Vec<f64> = bc.bars.iter().flat_map(|b| [b.birth, b.death]).filter(|x| x.is_finite()).collect();
        crit.sort_by(|a, b| a.partial_cmp(b).unwrap());
        crit.dedup();
        let counts_agree = crit.windows(2).all(|w| {
            let t = 0.5 * (w[0] + w[1]);
            bc.alive(0, t) == sublevel_components(&samples, t)
        });
        if !(counts_agree && bc.matches(&oracle, 1e-6)) {
            mismatches += 1;
        }
    }
    let ok = rel <= 0.1 && mismatches == 0;
    report(8, ok, format!("Bismut rate {:.4}, Witten rate {:.4}, 2ℓ₁ {:.4}, deviation {:.2}%, barcode mismatches {mismatches}/20", fb.intercept, fw.intercept, 2.0 * l1, 100.0 * rel));
}

#[test]
fn criterion_9_scaling() {
    let v = Potential::single_well();
    let (b, h) = (0.3, 0.5);
    let small = Discretization::new(10, 12, 2.0 * PI);
    let large = Discretization::new(10, 12, 2.0 * PI / h);
    let mut worst: f64 = 0.0;
    for sign in [Sign::Plus, Sign::Minus] {
        worst = worst.max(bismut::scaling_equivalence(&v, b, h, &small, &large, sign, 20).unwrap());
    }
    report(9, worst < 1e-6, format!("spectral mismatch {worst:.2e}"));
}
