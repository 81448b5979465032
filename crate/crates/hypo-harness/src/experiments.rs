//! The canonical experiments and the sweep driver.

use std::path::PathBuf;
use std::time::Instant;

use hypo::basis::Discretization;
use hypo::bismut::{self, build_hodge, build_projectors, BismutAssembly, Sign};
use hypo::grushin::{self, Region};
use hypo::potential::{Barcode, Potential};
use hypo::spectral::{self, Contour};
use hypo::witten::{self, WittenAssembly};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{Axis, Config, Profile};
use crate::params::ParameterSet;
use crate::report::{Assertion, ExperimentResult, Table};
use crate::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Barcode,
    Witten,
    Bismut,
    Identity,
    Grushin,
    Compare,
    Semigroup,
    Scaling,
    Regions,
    All,
}

impl Experiment {
    pub const EACH: [Experiment; 9] = [
        Experiment::Barcode,
        Experiment::Witten,
        Experiment::Bismut,
        Experiment::Identity,
        Experiment::Grushin,
        Experiment::Compare,
        Experiment::Semigroup,
        Experiment::Scaling,
        Experiment::Regions,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Experiment::Barcode => "barcode",
            Experiment::Witten => "witten",
            Experiment::Bismut => "bismut",
            Experiment::Identity => "identity",
            Experiment::Grushin => "grushin",
            Experiment::Compare => "compare",
            Experiment::Semigroup => "semigroup",
            Experiment::Scaling => "scaling",
            Experiment::Regions => "regions",
            Experiment::All => "all",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub profile: Profile,
    pub out_dir: Option<PathBuf>,
    pub dump_matrices: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { profile: Profile::Full, out_dir: None, dump_matrices: false }
    }
}

struct Ctx<'a> {
    cfg: &'a Config,
    opts: &'a RunOptions,
    d: Discretization,
    v: Potential,
}

impl Ctx<'_> {
    fn result(&self, name: &str, params: ParameterSet, metrics: serde_json::Value, assertions: Vec<Assertion>, tables: Vec<Table>, t: Instant) -> ExperimentResult {
        ExperimentResult {
            experiment: name.into(),
            parameters: params,
            metrics,
            assertions,
            runtime_s: t.elapsed().as_secs_f64(),
            artifacts: vec![],
            tables,
        }
    }
}

/// Runs one experiment (or all of them, in order).
pub fn run_experiment(cfg: &Config, exp: Experiment, opts: &RunOptions) -> Result<Vec<ExperimentResult>> {
    let ctx = Ctx { cfg, opts, d: cfg.discretization(opts.profile), v: cfg.potential() };
    ctx.d.check()?;
    let list: Vec<Experiment> = if exp == Experiment::All { Experiment::EACH.to_vec() } else { vec![exp] };
    let mut out = vec![];
    for e in list {
        let r = match e {
            Experiment::Barcode => barcode(&ctx),
            Experiment::Witten => witten_exp(&ctx),
            Experiment::Bismut => bismut_exp(&ctx),
            Experiment::Identity => identity(&ctx),
            Experiment::Grushin => grushin_exp(&ctx),
            Experiment::Compare => compare(&ctx),
            Experiment::Semigroup => semigroup(&ctx),
            Experiment::Scaling => scaling(&ctx),
            Experiment::Regions => regions(&ctx),
            Experiment::All => unreachable!(),
        }?;
        out.push(r);
    }
    Ok(out)
}

fn barcode(ctx: &Ctx) -> Result<ExperimentResult> {
    let t = Instant::now();
    let grid = ctx.cfg.experiments.barcode_grid;
    let cps = ctx.v.critical_points(grid)?;
    let bc = Barcode::from_critical_points(&cps);
    let oracle = Barcode::from_samples(&ctx.v.sample(1 << 15));
    let metrics = json!({ "critical_points": cps, "barcode": bc, "lengths": bc.lengths() });
    let asserts = vec![Assertion::holds("matches_sampled_oracle", bc.matches(&oracle, 1e-6))];
    let tables = vec![Table::from_rows("bars", &bc.bars)?];
    Ok(ctx.result("barcode", ParameterSet::partial(ctx.cfg, &ctx.d), metrics, asserts, tables, t))
}

#[derive(Serialize)]
struct EigRow {
    degree: usize,
    index: usize,
    half_laplacian: f64,
    in_cluster: bool,
}

fn witten_exp(ctx: &Ctx) -> Result<ExperimentResult> {
    let t = Instant::now();
    let (params, w, gap) = ParameterSet::resolve(ctx.cfg, &ctx.d, &ctx.v)?;
    let mut rows = vec![];
    for p in 0..2 {
        for (i, x) in w.eigenvalues(p).iter().take(12).enumerate() {
            rows.push(EigRow { degree: p, index: i, half_laplacian: 0.5 * x, in_cluster: 0.5 * x <= gap.rho });
        }
    }
    let band = ctx.v.degree();
    let metrics = json!({
        "gap": gap,
        "factorization_residual": [w.factorization_residual(0, band), w.factorization_residual(1, band)],
        "padded_residual": [w.padded_residual(0), w.padded_residual(1)],
    });
    let asserts = vec![
        Assertion::holds("inclusions_hold", gap.inclusions_hold),
        Assertion::at_least("gap_ratio", gap.ratio, witten::GAP_RATIO),
    ];
    Ok(ctx.result("witten", params, metrics, asserts, vec![Table::from_rows("eigenvalues", &rows)?], t))
}

fn bismut_exp(ctx: &Ctx) -> Result<ExperimentResult> {
    let t = Instant::now();
    let (params, _, _) = ParameterSet::resolve(ctx.cfg, &ctx.d, &ctx.v)?;
    let mut per_sign = serde_json::Map::new();
    let mut asserts = vec![];
    let mut artifacts = vec![];
    for sign in ctx.cfg.parameters.sign.signs() {
        let asm = BismutAssembly::new(&ctx.d, &ctx.v, sign, params.b, params.h)?;
        let hf = build_hodge(&asm)?;
        let hr = bismut::hodge_report(&asm, &hf, 10, ctx.cfg.seed);
        let pt = bismut::pt_symmetry_check(&asm);
        let leak = asm.degree_leak();
        let (kl, ku) = asm.op.bandwidths();
        per_sign.insert(
            sign.label().into(),
            json!({
                "dim": asm.dim(), "nnz": asm.op.nnz(), "bandwidths": [kl, ku], "degree_leak": leak,
                "pt_symmetry": pt, "hodge": hr, "flat": asm.flags,
            }),
        );
        let s = sign.label();
        asserts.push(Assertion::at_most(&format!("degree_leak{s}"), leak, 0.0));
        asserts.push(Assertion::at_most(&format!("pt_symmetry{s}"), pt, 1e-12));
        asserts.push(Assertion::at_most(&format!("nilpotency{s}"), hr.nilpotency.max(hr.nilpotency_r), 1e-12));
        if ctx.opts.dump_matrices {
            if let Some(dir) = &ctx.opts.out_dir {
                std::fs::create_dir_all(dir)?;
                let path = dir.join(format!("bismut_{}.mtx", if sign == Sign::Plus { "plus" } else { "minus" }));
                asm.export_matrix_market(std::fs::File::create(&path)?)?;
                artifacts.push(path.display().to_string());
            }
        }
    }
    let mut r = ctx.result("bismut", params, serde_json::Value::Object(per_sign), asserts, vec![], t);
    r.artifacts = artifacts;
    Ok(r)
}

#[derive(Serialize)]
struct IdentityRow {
    h: f64,
    sign: &'static str,
    factored_0: f64,
    factored_1: f64,
    galerkin_0: f64,
    galerkin_1: f64,
    off_degree: f64,
}

fn identity(ctx: &Ctx) -> Result<ExperimentResult> {
    let t = Instant::now();
    let mut rows = vec![];
    for &h in &ctx.cfg.experiments.identity_h {
        let w = WittenAssembly::new(&ctx.d, &ctx.v, h)?;
        for sign in ctx.cfg.parameters.sign.signs() {
            let asm = BismutAssembly::new(&ctx.d, &ctx.v, sign, 1.0, h)?;
            let r = bismut::bismut_identity_check(&asm, &w, &build_projectors(&ctx.d, sign));
            rows.push(IdentityRow {
                h,
                sign: sign.label(),
                factored_0: r.factored[0],
                factored_1: r.factored[1],
                galerkin_0: r.galerkin_interior[0],
                galerkin_1: r.galerkin_interior[1],
                off_degree: r.off_degree,
            });
        }
    }
    let worst = rows
        .iter()
        .map(|r| r.factored_0.max(r.factored_1).max(r.galerkin_0).max(r.galerkin_1).max(r.off_degree))
        .fold(0.0, f64::max);
    let metrics = json!({ "max_residual": worst });
    let asserts = vec![Assertion::at_most("max_residual", worst, 1e-8)];
    Ok(ctx.result("identity", ParameterSet::partial(ctx.cfg, &ctx.d), metrics, asserts, vec![Table::from_rows("residuals", &rows)?], t))
}

#[derive(Serialize)]
struct CurvePoint {
    b: f64,
    effective_error: f64,
}

fn grushin_exp(ctx: &Ctx) -> Result<ExperimentResult> {
    let t = Instant::now();
    let (params, w, gap) = ParameterSet::resolve(ctx.cfg, &ctx.d, &ctx.v)?;
    let h2 = params.h * params.h;
    let z = C64::new(-gap.rho, 0.5) / h2;
    let q = grushin::working_truncation(&w, params.a, params.l, ctx.d.c_g);
    let gp = build_projectors(&ctx.d, Sign::Plus);
    let asm = BismutAssembly::new(&ctx.d, &ctx.v, Sign::Plus, params.b, params.h)?;
    let gb = grushin::build_blocks(&asm, &gp, Some(&q), z)?;
    let left = gb.left_inverse_residual(20, ctx.cfg.seed);
    let schur = gb.schur_residual(20, ctx.cfg.seed + 1)?;
    let eff = grushin::effective_operator_error(&w, &gb)?;
    let curve: Vec<CurvePoint> = ctx
        .cfg
        .experiments
        .grushin_b
        .par_iter()
        .map(|&f| {
            let b = params.b * f;
            let asm = BismutAssembly::new(&ctx.d, &ctx.v, Sign::Plus, b, params.h)?;
            let gb = grushin::build_blocks(&asm, &gp, Some(&q), z)?;
            Ok(CurvePoint { b, effective_error: grushin::effective_operator_error(&w, &gb)? })
        })
        .collect::<hypo::Result<_>>()?;
    let slope = grushin::loglog_slope(&curve.iter().map(|c| c.b).collect::<Vec<_>>(), &curve.iter().map(|c| c.effective_error).collect::<Vec<_>>());
    let metrics = json!({
        "z": [z.re, z.im], "left_inverse_residual": left, "schur_residual": schur, "effective_error": eff,
        "perp_condition": gb.cond, "e_annihilates_ground": gb.e_annihilates_ground(), "loglog_slope": slope,
    });
    let asserts = vec![
        Assertion::at_most("reconstruction", left.max(schur), 1e-8),
        Assertion::at_least("loglog_slope", slope, 0.8),
    ];
    Ok(ctx.result("grushin", params, metrics, asserts, vec![Table::from_rows("convergence", &curve)?], t))
}

fn compare(ctx: &Ctx) -> Result<ExperimentResult> {
    let t = Instant::now();
    let (params, _, gap) = ParameterSet::resolve(ctx.cfg, &ctx.d, &ctx.v)?;
    let adm = params.admissibility.expect("resolved");
    if !adm.b_a4_c0 {
        return Err(HarnessError::NotAdmissible(format!(
            "bA⁴C₀ = {:.3e} exceeds hϱ_h = {:.3e}",
            params.b * params.a.powi(4) * params.c0.unwrap_or(1.0),
            params.h * gap.rho
        )));
    }
    let h = params.h;
    let h2 = h * h;
    let radius = gap.rho / h2;
    let quad = ctx.cfg.experiments.contour_quad;
    let mut rows = vec![];
    let mut per_sign = serde_json::Map::new();
    let mut asserts = vec![];
    let mut counts = vec![];
    for sign in ctx.cfg.parameters.sign.signs() {
        let asm = BismutAssembly::new(&ctx.d, &ctx.v, sign, params.b, h)?;
        let gp = build_projectors(&ctx.d, sign);
        let hf = build_hodge(&asm)?;
        let cl = spectral::cluster_eigenpairs(&asm, &gp, &hf, gap.counts, radius)?;
        let ranks = if quad > 0 {
            let c = Contour::rectangle_for(gap.rho, h);
            let mut r = [0; 3];
            for (p, rp) in r.iter_mut().enumerate() {
                *rp = spectral::contour_projector(&asm.block(p), &c, quad, 8, ctx.cfg.seed + p as u64)?.rank;
            }
            Some(r)
        } else {
            None
        };
        let rep = spectral::compare_with_witten(&asm, &cl, &gap, ctx.cfg.parameters.kappa, (params.b * params.a.powi(4) * params.c0.unwrap_or(1.0), h * gap.rho), ranks)?;
        // eigenvalues below the residual floor count as zero
        let floor = 100.0 * rep.max_residual.max(f64::EPSILON * radius);
        let hs = spectral::hodge_singular_values(&hf, &cl, floor)?;
        let n_total: usize = cl.iter().map(|c| c.values.len()).sum();
        let eps = 6.0 * params.c0.unwrap_or(1.0) * n_total as f64 * (params.b / h).powi(2);
        let dist: Vec<f64> = cl.iter().map(|c| spectral::distance_to_kernel(&gp, &hf, &c.vectors)).collect::<hypo::Result<_>>()?;
        let s = sign.label();
        asserts.push(Assertion::holds(&format!("ratios{s}"), rep.all_pass));
        asserts.push(Assertion::at_most(&format!("max_imag{s}"), rep.max_imag, 1e-8 * radius));
        let herr = hs.iter().map(|x| x.max_rel_err).fold(0.0, f64::max);
        asserts.push(Assertion::at_most(&format!("hodge_singular{s}"), herr, 1e-6));
        counts.push(rep.counts);
        per_sign.insert(
            s.into(),
            json!({
                "counts": rep.counts, "ranks": ranks, "max_imag": rep.max_imag, "max_residual": rep.max_residual,
                "schur_counts": cl.iter().map(|c| c.schur_count).collect::<Vec<_>>(),
                "gram_ranges": cl.iter().map(|c| c.gram_range).collect::<Vec<_>>(),
                "hodge_singular": hs, "distance_to_kernel": dist, "distance_bound": (2.0 * eps).sqrt(),
                "lambda_resc": cl[0].values.iter().map(|x| x * h2).collect::<Vec<_>>(),
            }),
        );
        rows.extend(rep.rows.into_iter().map(|r| (s, r)));
    }
    if counts.len() == 2 {
        let dual = (0..3).all(|p| counts[1][p] == counts[0][2 - p]);
        asserts.push(Assertion::holds("count_duality", dual));
    }
    #[derive(Serialize)]
    struct Row {
        sign: &'static str,
        degree: usize,
        index: usize,
        lambda_b: f64,
        lambda_b_im: f64,
        lambda_w: f64,
        ratio: Option<f64>,
        residual: f64,
        pass: bool,
    }
    let table: Vec<Row> = rows
        .into_iter()
        .map(|(s, r)| Row { sign: s, degree: r.degree, index: r.index, lambda_b: r.lambda_b, lambda_b_im: r.lambda_b_im, lambda_w: r.lambda_w, ratio: r.ratio, residual: r.residual, pass: r.pass })
        .collect();
    Ok(ctx.result("compare", params, serde_json::Value::Object(per_sign), asserts, vec![Table::from_rows("ratios", &table)?], t))
}

fn semigroup(ctx: &Ctx) -> Result<ExperimentResult> {
    let t = Instant::now();
    let e = &ctx.cfg.experiments;
    let mut d = Discretization::new(e.semigroup_cutoffs[0], e.semigroup_cutoffs[1], ctx.d.circumference);
    d.c_g = ctx.d.c_g;
    let mut cfg = ctx.cfg.clone();
    if let Some(h) = e.semigroup_h {
        cfg.parameters.h = h;
    }
    let (params, _, gap) = ParameterSet::resolve(&cfg, &d, &ctx.v)?;
    let h2 = params.h * params.h;
    let asm = BismutAssembly::new(&d, &ctx.v, Sign::Plus, params.b, params.h)?;
    let counts = [0, 1, 2].map(|p| grushin::base_degree(Sign::Plus, p).map(|bp| gap.counts[bp]).unwrap_or(0));
    let times: Vec<f64> = e.semigroup_times.iter().map(|c| c * h2 / gap.rho).collect();
    let rows = spectral::semigroup_remainder(&asm, counts, gap.rho, &times)?;
    let slack = rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    let agree = rows.iter().filter(|r| r.t == times[0]).map(|r| r.expm_vs_eigen).fold(0.0, f64::max);
    let metrics = json!({ "min_slack": slack, "expm_vs_eigen": agree, "times": times });
    let asserts = vec![Assertion::at_least("min_slack", slack, 0.0), Assertion::at_most("expm_vs_eigen", agree, 1e-8)];
    Ok(ctx.result("semigroup", params, metrics, asserts, vec![Table::from_rows("remainder", &rows)?], t))
}

fn scaling(ctx: &Ctx) -> Result<ExperimentResult> {
    let t = Instant::now();
    let e = &ctx.cfg.experiments;
    let h = ctx.cfg.parameters.h;
    let small = Discretization::new(e.scaling_cutoffs[0], e.scaling_cutoffs[1], ctx.d.circumference);
    let large = Discretization::new(e.scaling_cutoffs[0], e.scaling_cutoffs[1], ctx.d.circumference / h);
    let mut worst: f64 = 0.0;
    for sign in ctx.cfg.parameters.sign.signs() {
        worst = worst.max(bismut::scaling_equivalence(&ctx.v, e.scaling_b, h, &small, &large, sign, 20)?);
    }
    let metrics = json!({ "mismatch": worst, "b": e.scaling_b });
    let asserts = vec![Assertion::at_most("mismatch", worst, 1e-6)];
    Ok(ctx.result("scaling", ParameterSet::partial(ctx.cfg, &small), metrics, asserts, vec![], t))
}

fn regions(ctx: &Ctx) -> Result<ExperimentResult> {
    let t = Instant::now();
    let (params, w, gap) = ParameterSet::resolve(ctx.cfg, &ctx.d, &ctx.v)?;
    let e = &ctx.cfg.experiments;
    let h = params.h;
    let gp = build_projectors(&ctx.d, Sign::Plus);
    let grid: Vec<(f64, f64)> = e.region_b_divisors.iter().flat_map(|&dv| e.region_a.iter().map(move |&a| (dv, a))).collect();
    let rows: Vec<grushin::RegionRow> = grid
        .par_iter()
        .map(|&(dv, a)| {
            let asm = BismutAssembly::new(&ctx.d, &ctx.v, Sign::Plus, gap.rho / dv * h, h)?;
            Region::ALL
                .iter()
                .map(|&r| grushin::region_point(&asm, &gp, &w, r, a, params.l, gap.rho, 0.0, ctx.cfg.seed))
                .collect::<hypo::Result<Vec<_>>>()
        })
        .collect::<hypo::Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut fits = vec![];
    let mut asserts = vec![];
    for r in Region::ALL {
        let sel: Vec<&grushin::RegionRow> = rows.iter().filter(|x| x.region == r.label()).collect();
        if r == Region::HighImaginary {
            let slack = sel.iter().map(|x| x.slack).fold(f64::INFINITY, f64::min);
            asserts.push(Assertion::at_least("high_imaginary_slack", slack, 0.0));
            continue;
        }
        let meas: Vec<f64> = sel.iter().map(|x| if r.bounds_resolvent() { x.norm_r } else { x.norm_d }).collect();
        let shape: Vec<f64> = sel.iter().map(|x| x.bound_rhs).collect();
        let fit = grushin::fit_shape(r.label(), &meas, &shape);
        asserts.push(Assertion::at_least(&format!("{}_r_squared", r.label()), fit.r_squared, 0.9));
        fits.push(fit);
    }
    let metrics = json!({ "fits": fits });
    Ok(ctx.result("regions", params, metrics, asserts, vec![Table::from_rows("table", &rows)?], t))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub experiment: String,
    pub axis: String,
    pub value: f64,
    pub metric: String,
    pub number: Option<f64>,
    pub error: Option<String>,
}

fn flatten(prefix: &str, v: &serde_json::Value, out: &mut Vec<(String, f64)>) {
    match v {
        serde_json::Value::Number(n) => out.push((prefix.to_string(), n.as_f64().unwrap_or(f64::NAN))),
        serde_json::Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| flatten(&format!("{prefix}[{i}]"), x, out)),
        serde_json::Value::Object(m) => m.iter().for_each(|(k, x)| flatten(&if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") }, x, out)),
        _ => {}
    }
}

/// Repeats `exp` over `values` of `axis`; rows keep partial results when a point fails.
pub fn sweep(cfg: &Config, exp: Experiment, axis: Axis, values: &[f64], opts: &RunOptions) -> Result<ExperimentResult> {
    let t = Instant::now();
    let points: Vec<(f64, std::result::Result<Vec<ExperimentResult>, String>)> = values
        .par_iter()
        .map(|&x| {
            let r = cfg.with_axis(axis, x).and_then(|c| run_experiment(&c, exp, opts)).map_err(|e| format!("{}: {e}", e.kind()));
            (x, r)
        })
        .collect();
    let mut rows = vec![];
    for (x, r) in &points {
        match r {
            Ok(results) => {
                for res in results {
                    let mut flat = vec![];
                    flatten("", &res.metrics, &mut flat);
                    for (m, n) in flat {
                        rows.push(SweepRow { experiment: res.experiment.clone(), axis: axis.label().into(), value: *x, metric: m, number: Some(n), error: None });
                    }
                    for a in &res.assertions {
                        rows.push(SweepRow { experiment: res.experiment.clone(), axis: axis.label().into(), value: *x, metric: format!("assert.{}", a.name), number: Some(a.pass as u8 as f64), error: None });
                    }
                }
            }
            Err(e) => rows.push(SweepRow { experiment: exp.label().into(), axis: axis.label().into(), value: *x, metric: "error".into(), number: None, error: Some(e.clone()) }),
        }
    }
    let series = |metric: &str| -> Vec<(f64, f64)> { rows.iter().filter(|r| r.metric == metric).filter_map(|r| r.number.map(|n| (r.value, n))).collect() };
    let mut asserts = vec![];
    let mut metrics = serde_json::Map::new();
    asserts.push(Assertion::holds("all_points_ran", points.iter().all(|(_, r)| r.is_ok())));
    let decreasing = |s: &[(f64, f64)], larger_first: bool| {
        let mut s = s.to_vec();
        s.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if larger_first {
            s.reverse();
        }
        s.windows(2).all(|w| w[1].1 <= w[0].1)
    };
    match (exp, axis) {
        (Experiment::Grushin, Axis::B) => {
            // error should shrink with b
            let s = series("effective_error");
            asserts.push(Assertion::holds("effective_error_monotone", decreasing(&s, true)));
        }
        (Experiment::Identity, Axis::M) => {
            let s = series("max_residual");
            asserts.push(Assertion::holds("identity_residual_monotone", decreasing(&s, false)));
        }
        (Experiment::Compare, Axis::H) => {
            let s = series("+.lambda_resc[1]");
            if s.len() >= 2 {
                let fit = witten::arrhenius_fit(&s);
                let two_l = cfg.potential().barcode(cfg.experiments.barcode_grid).map(|bc| 2.0 * bc.lengths().iter().cloned().fold(f64::INFINITY, f64::min)).unwrap_or(f64::NAN);
                asserts.push(Assertion::at_most("arrhenius_rel_dev", (fit.intercept / two_l - 1.0).abs(), 0.1));
                metrics.insert("arrhenius".into(), json!({ "fit": fit, "two_l1": two_l }));
            }
        }
        _ => {}
    }
    let params = ParameterSet::partial(cfg, &cfg.discretization(opts.profile));
    Ok(ExperimentResult {
        experiment: format!("sweep_{}_{}", exp.label(), axis.label()),
        parameters: params,
        metrics: serde_json::Value::Object(metrics),
        assertions: asserts,
        runtime_s: t.elapsed().as_secs_f64(),
        artifacts: vec![],
        tables: vec![Table::from_rows("long", &rows)?],
    })
}
