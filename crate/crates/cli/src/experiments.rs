//! Experiment pipelines. Each seed runs sequentially; seeds run concurrently
//! and their results are joined before the summary is assembled.

use crate::config::{DataKind, Experiment, ExperimentConfig};
use crate::output::{num, Csv};
use anyhow::{anyhow, bail, Context, Result};
use gramscope_core::activation::ActivationSpec;
use gramscope_core::chebyshev::{cheb_approx, cheb_degree_for_eps};
use gramscope_core::data::{circle_lift, equiangular, load_csv, low_dim_embed, random_unit, smoothed};
use gramscope_core::depth::{correlation_map, depth_constant_c, depth_forward, fixed_point_steps};
use gramscope_core::gram::{build_g_finite, build_g_infinite, multiclass_g};
use gramscope_core::hermite::{decay_slope, expand_activation, tail_energy, Target};
use gramscope_core::kill::{kill_nullspace, kill_nullspace_parity, kill_residual_smooth};
use gramscope_core::linalg::{gershgorin_lower, khatri_rao_power, min_sv_column_distance, norm, svd_jacobi, trace_ratio};
use gramscope_core::network::{forward, init_multi, init_net};
use gramscope_core::ordering::{compare_orderings, OrderingRun};
use gramscope_core::predict::spectral_predict;
use gramscope_core::quadrature::gaussian_expectation;
use gramscope_core::train::{default_eta, default_sgd_eta, movement_condition, movement_threshold, train_gd, train_sgd, TrainConfig};
use gramscope_core::{catalog, Dataset};
use rayon::prelude::*;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct SeedResult {
    pub seed: u64,
    pub pass: bool,
    pub values: Vec<(String, String)>,
    pub files: Vec<(String, String)>,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub seeds: Vec<SeedResult>,
    pub summary: Vec<(String, String)>,
    pub files: Vec<(String, String)>,
    pub pass: bool,
}

struct Seed {
    seed: u64,
    pass: bool,
    values: Vec<(String, String)>,
    files: Vec<(String, String)>,
}

impl Seed {
    fn new(seed: u64) -> Self {
        Seed { seed, pass: true, values: Vec::new(), files: Vec::new() }
    }

    fn put(&mut self, key: impl Into<String>, value: impl ToString) {
        self.values.push((key.into(), value.to_string()));
    }

    fn check(&mut self, key: &str, ok: bool) {
        self.put(format!("check.{key}"), if ok { "pass" } else { "fail" });
        self.pass &= ok;
    }

    fn file(&mut self, stem: &str, csv: Csv) {
        self.files.push((format!("{stem}_seed{}.csv", self.seed), csv.finish()));
    }
}

fn slug(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect::<String>().trim_end_matches('_').to_string()
}

fn activation(name: &str) -> Result<ActivationSpec> {
    catalog(name).map_err(|e| anyhow!(e))
}

fn first_activation(cfg: &ExperimentConfig) -> Result<ActivationSpec> {
    activation(&cfg.activations[0])
}

/// Builds the configured dataset; `seed` is used unless the config pins one.
pub fn dataset(cfg: &ExperimentConfig, seed: u64) -> Result<Dataset> {
    let d = &cfg.data;
    let s = d.seed.unwrap_or(seed);
    let mut ds = match d.kind {
        DataKind::Circle => circle_lift(d.n, d.d, s)?,
        DataKind::Random => random_unit(d.n, d.d, s)?,
        DataKind::Embed => low_dim_embed(d.n, d.d_prime, d.d, d.min_delta, s)?,
        DataKind::Equiangular => equiangular(d.n, d.rho, d.d, s)?,
        DataKind::Csv => {
            let path = d.path.as_ref().ok_or_else(|| anyhow!("csv data needs a path"))?;
            load_csv(path, s).with_context(|| format!("loading {}", path.display()))?
        }
    };
    if d.duplicate_first {
        let mut x = ds.x.clone();
        for i in 0..x.rows {
            x[(i, 1)] = x[(i, 0)];
        }
        ds = Dataset::new(x, ds.labels.clone(), s)?;
    }
    Ok(ds)
}

fn eigen_csv(values: &[f64]) -> Csv {
    let mut csv = Csv::new(&["index", "eigenvalue"]);
    for (i, v) in values.iter().enumerate() {
        csv.row([i.to_string(), num(*v)]);
    }
    csv
}

fn spectrum(cfg: &ExperimentConfig, seed: u64) -> Result<Seed> {
    let data = dataset(cfg, seed)?;
    let mut out = Seed::new(seed);
    out.put("data.fingerprint", data.fingerprint());
    out.put("data.delta", num(data.delta));
    for name in &cfg.activations {
        let spec = activation(name)?;
        let net = init_net(cfg.init, cfg.m, data.d(), seed, &spec)?;
        let g = build_g_finite(&data, &net)?;
        let s = g.spectrum()?;
        out.put(format!("lambda_min.{name}"), num(s.lambda_min()));
        out.put(format!("lambda_max.{name}"), num(s.lambda_max()));
        out.put(format!("gershgorin.{name}"), num(gershgorin_lower(&g.values)));
        out.put(format!("trace_ratio.{name}"), num(trace_ratio(&g.values)));
        out.file(&format!("spectrum_{}", slug(name)), eigen_csv(&s.values));
    }
    Ok(out)
}

fn spectrum_summary(cfg: &ExperimentConfig, results: &mut [SeedResult], outcome: &mut Outcome) -> Result<()> {
    let mut runs = Vec::new();
    for r in results.iter() {
        let fp: u64 = lookup(r, "data.fingerprint")?.parse()?;
        for name in &cfg.activations {
            runs.push(OrderingRun {
                activation: catalog(name)?.name.clone(),
                seed: r.seed,
                data_fingerprint: fp,
                lambda_min: lookup(r, &format!("lambda_min.{name}"))?.parse()?,
            });
        }
    }
    if cfg.activations.len() < 2 {
        outcome.summary.push(("ordering".into(), "not_applicable".into()));
        return Ok(());
    }
    let verdict = compare_orderings(&runs)?;
    for sv in &verdict.per_seed {
        if let Some(r) = results.iter_mut().find(|r| r.seed == sv.seed) {
            let relations: Vec<String> = sv.pairs.iter().map(|(a, b, rel)| format!("{a}:{b}:{rel:?}")).collect();
            r.values.push(("ordering.pairs".into(), relations.join(" ")));
            r.values.push(("ordering.holds".into(), sv.holds.to_string()));
            r.pass &= sv.holds;
        }
    }
    outcome.summary.push(("ordering.seeds_holding".into(), verdict.seeds_holding.to_string()));
    outcome.summary.push(("ordering.majority".into(), verdict.majority.to_string()));
    outcome.pass = verdict.majority;
    Ok(())
}

fn lookup<'a>(r: &'a SeedResult, key: &str) -> Result<&'a str> {
    r.values.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str()).ok_or_else(|| anyhow!("missing {key}"))
}

fn approx(cfg: &ExperimentConfig, seed: u64) -> Result<Seed> {
    let mut out = Seed::new(seed);
    let factor = cfg.run.tolerance.unwrap_or(3.0);
    for name in &cfg.activations {
        let spec = activation(name)?;
        let tag = slug(name);
        let series = expand_activation(&spec, Target::PhiPrime, cfg.run.order)?;
        let mut csv = Csv::new(&["k", "coefficient"]);
        for (k, c) in series.coeffs.iter().enumerate() {
            csv.row([k.to_string(), num(*c)]);
        }
        out.file(&format!("hermite_{tag}"), csv);
        out.put(format!("second_moment.{name}"), num(series.second_moment));
        out.put(format!("tail_energy.{name}"), num(tail_energy(&series, series.degree())?));
        match decay_slope(&series, 10.min(series.degree()), series.degree()) {
            Ok(s) => out.put(format!("decay_slope.{name}"), num(s)),
            Err(e) => out.put(format!("decay_slope.{name}"), format!("unavailable ({e})")),
        }
        let mut csv = Csv::new(&["tau", "eps", "degree", "sup_error", "within_tolerance"]);
        for &tau in &cfg.run.tau {
            for &eps in &cfg.run.eps {
                let p = cheb_degree_for_eps(tau, eps)?;
                let err = cheb_approx(|x| spec.eval1(x), tau, p)?.sup_error_estimate;
                let ok = err <= factor * eps;
                out.pass &= ok;
                csv.row([num(tau), num(eps), p.to_string(), num(err), ok.to_string()]);
            }
        }
        out.file(&format!("chebyshev_{tag}"), csv);
    }
    out.put("tolerance.factor", num(factor));
    let ok = out.pass;
    out.check("chebyshev_sup_error", ok);
    Ok(out)
}

fn kill(cfg: &ExperimentConfig, seed: u64) -> Result<Seed> {
    let data = dataset(cfg, seed)?;
    let spec = first_activation(cfg)?;
    let mut out = Seed::new(seed);
    let net = init_net(cfg.init, cfg.m, data.d(), seed, &spec)?;
    let s = build_g_finite(&data, &net)?.spectrum()?;
    let polynomial = spec.derivative_degree();
    let basis = match polynomial {
        Some(_) => kill_nullspace(&data, cfg.run.p)?,
        None => kill_nullspace_parity(&data, cfg.run.p, spec.derivative_parity().into())?,
    };
    let rel = cfg.run.threshold.unwrap_or(1e-12);
    out.put("d_eff", data.d_eff);
    out.put("constraint_count", basis.constraint_count);
    out.put("condition_holds", basis.condition_holds);
    out.put("nullspace_dim", basis.dim());
    out.put("lambda_min", num(s.lambda_min()));
    out.put("lambda_max", num(s.lambda_max()));
    out.put("zero_eigenvalues", s.count_below(rel));
    let residual = kill_residual_smooth(&data, &net, &basis)?;
    out.put("kill_residual", num(residual));
    let exact = polynomial.is_some_and(|deg| cfg.run.p > deg);
    if exact {
        let need = data.n().saturating_sub(basis.constraint_count);
        out.check("nullspace_dim", basis.dim() >= need.max(1));
        out.check("lambda_min", s.lambda_min() <= rel * s.lambda_max());
    } else if !basis.vectors.is_empty() {
        out.check("residual_bound", residual * residual >= s.lambda_min() - rel * s.lambda_max());
    }
    out.file("kill_eigenvalues", eigen_csv(&s.values));
    let mut csv = Csv::new(&["vector", "i", "value"]);
    for (v, z) in basis.vectors.iter().enumerate() {
        for (i, x) in z.iter().enumerate() {
            csv.row([v.to_string(), i.to_string(), num(*x)]);
        }
    }
    out.file("kill_basis", csv);
    Ok(out)
}

fn train(cfg: &ExperimentConfig, seed: u64) -> Result<Seed> {
    let data = dataset(cfg, seed)?;
    let spec = first_activation(cfg)?;
    let mut out = Seed::new(seed);
    let mut net = init_net(cfg.init, cfg.m, data.d(), seed, &spec)?;
    let s0 = build_g_finite(&data, &net)?.spectrum()?;
    let n = data.n();
    let eta = match (cfg.run.eta, cfg.run.batch) {
        (Some(e), _) => e,
        (None, Some(b)) => default_sgd_eta(s0.lambda_max(), net.c_phi, n, b),
        (None, None) => default_eta(s0.lambda_min(), net.c_phi, n),
    };
    let u0 = forward(&net, &data)?;
    let r0: Vec<f64> = data.labels.iter().zip(&u0).map(|(y, u)| y - u).collect();
    let tc = TrainConfig {
        batch: cfg.run.batch,
        record_every: cfg.run.record_every,
        seed,
        target_loss_ratio: cfg.run.target_ratio,
        train_output: cfg.run.train_output,
        ..TrainConfig::gd(eta, cfg.run.steps)
    };
    let traj = if cfg.run.batch.is_some() { train_sgd(&mut net, &data, &tc)? } else { train_gd(&mut net, &data, &tc)? };
    let (alpha, beta) = (spec.lipschitz_alpha, spec.smooth_beta);
    let flags = movement_condition(&traj, alpha, beta, n, s0.lambda_min());
    let mut csv = Csv::new(&["step", "loss", "residual_norm", "max_drift", "movement_ok", "predicted_residual"]);
    for rec in &traj.records {
        let predicted = if cfg.run.batch.is_none() {
            num(spectral_predict(&s0, &r0, eta, 1.0, rec.step).residual_norm)
        } else {
            String::new()
        };
        csv.row([rec.step.to_string(), num(rec.loss), num(rec.residual_norm), num(rec.max_drift), flags[rec.step].to_string(), predicted]);
    }
    out.file("train", csv);
    let (l0, lt) = (traj.initial_loss(), traj.final_loss());
    out.put("lambda_min", num(s0.lambda_min()));
    out.put("eta", num(eta));
    out.put("initial_loss", num(l0));
    out.put("final_loss", num(lt));
    out.put("final_step", traj.last_step());
    out.put("initial_residual_norm", num(norm(&r0)));
    out.put("residual_envelope", num((n as f64 / tc.kappa).sqrt()));
    out.put("max_drift", num(traj.max_drift()));
    out.put("movement_threshold", num(movement_threshold(alpha, beta, n, s0.lambda_min())));
    out.put("movement_all_steps", flags.iter().all(|f| *f));
    out.check("loss_decreased", lt < l0);
    if let Some(r) = cfg.run.target_ratio {
        out.check("target_ratio", lt <= r * l0);
    }
    Ok(out)
}

fn predict(cfg: &ExperimentConfig, seed: u64) -> Result<Seed> {
    let data = dataset(cfg, seed)?;
    let spec = first_activation(cfg)?;
    let mut out = Seed::new(seed);
    let mut net = init_net(cfg.init, cfg.m, data.d(), seed, &spec)?;
    let s0 = build_g_finite(&data, &net)?.spectrum()?;
    let eta = cfg.run.eta.unwrap_or_else(|| default_eta(s0.lambda_min(), net.c_phi, data.n()));
    let u0 = forward(&net, &data)?;
    let r0: Vec<f64> = data.labels.iter().zip(&u0).map(|(y, u)| y - u).collect();
    let tc = TrainConfig { record_every: cfg.run.record_every, ..TrainConfig::gd(eta, cfg.run.steps) };
    let traj = train_gd(&mut net, &data, &tc)?;
    let tol = cfg.run.tolerance.unwrap_or(0.05);
    let mut worst = 0.0f64;
    let mut unstable = false;
    let mut csv = Csv::new(&["step", "measured", "predicted", "relative_error"]);
    for rec in &traj.records {
        let p = spectral_predict(&s0, &r0, eta, 1.0, rec.step);
        unstable |= p.unstable;
        let rel = (p.residual_norm - rec.residual_norm).abs() / rec.residual_norm;
        worst = worst.max(rel);
        csv.row([rec.step.to_string(), num(rec.residual_norm), num(p.residual_norm), num(rel)]);
    }
    out.file("predict", csv);
    out.put("eta", num(eta));
    out.put("lambda_min", num(s0.lambda_min()));
    out.put("max_relative_error", num(worst));
    out.put("tolerance", num(tol));
    out.put("unstable_step", unstable);
    out.check("prediction", worst <= tol);
    Ok(out)
}

fn depth(cfg: &ExperimentConfig, seed: u64) -> Result<Seed> {
    let data = dataset(cfg, seed)?;
    let spec = first_activation(cfg)?;
    let mut out = Seed::new(seed);
    let layers = cfg.run.layers;
    let trace = depth_forward(&spec, &data, layers, cfg.m, seed)?;
    let series = expand_activation(&spec, Target::Phi, cfg.run.order)?;
    let eps = cfg.run.tolerance.unwrap_or(0.1);
    let target = cfg.run.threshold.unwrap_or(0.1);
    let noise = 2.0 / (cfg.m as f64).sqrt();
    let c0 = &trace.correlations[0];
    let mut rho = 0.0f64;
    for i in 0..c0.rows {
        for j in 0..c0.cols {
            if i != j && c0[(i, j)].abs() > rho.abs() {
                rho = c0[(i, j)];
            }
        }
    }
    let rho0 = rho.abs();
    let mut csv = Csv::new(&["layer", "min_norm", "max_norm", "max_offdiag_corr", "predicted_corr"]);
    let mut norms_ok = true;
    let mut corr = Vec::new();
    for l in 0..=layers {
        let (lo, hi) = trace.norm_range(l);
        if l > 0 {
            norms_ok &= lo > 1.0 - eps && hi < 1.0 + eps;
        }
        corr.push(trace.max_offdiag(l));
        csv.row([l.to_string(), num(lo), num(hi), num(trace.max_offdiag(l)), num(rho.abs())]);
        rho = correlation_map(&series, rho);
    }
    out.file("depth", csv);
    let first_below = corr.iter().position(|r| *r < target);
    let upto = first_below.unwrap_or(layers);
    let decreasing = corr[..=upto].windows(2).all(|w| w[1] < w[0] + noise);
    out.put("first_layer_below", first_below.map_or("none".to_string(), |l| l.to_string()));
    let a = depth_constant_c(&series)?;
    out.put("depth_constant_c", num(a));
    if a > 0.0 && a < 1.0 && rho0 > target && rho0 < 1.0 {
        let fp = fixed_point_steps(a, rho0, target)?;
        out.put("fixed_point_steps", fp.steps);
        out.put("fixed_point_bound", num(fp.bound));
        if let Some(l) = first_below {
            let r = l as f64 / fp.steps as f64;
            out.check("steps_within_factor_2", (0.5..=2.0).contains(&r));
        }
    }
    out.check("norms", norms_ok);
    out.check("correlation_decreasing", decreasing);
    Ok(out)
}

fn smoothed_run(cfg: &ExperimentConfig, seed: u64) -> Result<Seed> {
    let base = dataset(cfg, cfg.data.seed.unwrap_or(0))?;
    let mut out = Seed::new(seed);
    let (sm, info) = smoothed(&base, cfg.run.sigma, seed)?;
    let kr = khatri_rao_power(&sm.x, cfg.run.p.max(1))?;
    let (lb, smin) = min_sv_column_distance(&kr)?;
    let threshold = cfg.run.threshold.unwrap_or(1e-4);
    out.put("sigma_min", num(smin));
    out.put("lower_bound", num(lb));
    out.put("delta", num(sm.delta));
    out.put("span_residual", num(info.span_residual));
    out.check("column_distance_bound", lb <= smin + 1e-9);
    out.put("above_threshold", smin >= threshold);
    Ok(out)
}

fn smoothed_summary(cfg: &ExperimentConfig, results: &[SeedResult], outcome: &mut Outcome) -> Result<()> {
    let base = dataset(cfg, cfg.data.seed.unwrap_or(0))?;
    let base_sigma = svd_jacobi(&khatri_rao_power(&base.x, cfg.run.p.max(1))?)?.sigma_min();
    let above = results.iter().filter(|r| lookup(r, "above_threshold").is_ok_and(|v| v == "true")).count();
    let frac = above as f64 / results.len() as f64;
    let mut csv = Csv::new(&["seed", "sigma_min", "lower_bound", "delta"]);
    for r in results {
        csv.row([r.seed.to_string(), lookup(r, "sigma_min")?.into(), lookup(r, "lower_bound")?.into(), lookup(r, "delta")?.into()]);
    }
    outcome.files.push(("smoothed.csv".into(), csv.finish()));
    outcome.summary.push(("base.sigma_min".into(), num(base_sigma)));
    outcome.summary.push(("seeds_above_threshold".into(), above.to_string()));
    outcome.summary.push(("fraction_required".into(), "0.9".into()));
    outcome.pass = outcome.pass && frac >= 0.9;
    Ok(())
}

fn trace(cfg: &ExperimentConfig, seed: u64) -> Result<Seed> {
    let data = dataset(cfg, seed)?;
    let mut out = Seed::new(seed);
    let k = cfg.run.tolerance.unwrap_or(3.0);
    let pts = data.points();
    let n = data.n() as f64;
    let mut csv = Csv::new(&["activation", "trace_ratio", "expected", "standard_error"]);
    for name in &cfg.activations {
        let spec = activation(name)?;
        let net = init_net(cfg.init, cfg.m, data.d(), seed, &spec)?;
        let g = build_g_finite(&data, &net)?;
        let ratio = g.values.trace() / n;
        let scale = net.gram_scale() * cfg.m as f64;
        let per: Vec<f64> = (0..cfg.m)
            .into_par_iter()
            .map(|r| scale * net.a[(r, 0)].powi(2) * pts.iter().map(|x| spec.eval1(net.preact(r, x)).powi(2)).sum::<f64>() / n)
            .collect();
        let mean = per.iter().sum::<f64>() / per.len() as f64;
        let var = per.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (per.len() as f64 - 1.0).max(1.0);
        let se = (var / per.len() as f64).sqrt();
        let expected = gaussian_expectation(|z| spec.eval1(z).powi(2), spec.kink(), 400)?;
        out.put(format!("trace_ratio.{name}"), num(ratio));
        out.put(format!("expected.{name}"), num(expected));
        out.put(format!("standard_error.{name}"), num(se));
        out.check(name, (ratio - expected).abs() <= k * se);
        csv.row([name.clone(), num(ratio), num(expected), num(se)]);
    }
    out.file("trace", csv);
    Ok(out)
}

fn multiclass(cfg: &ExperimentConfig, seed: u64) -> Result<Seed> {
    let data = dataset(cfg, seed)?;
    let spec = first_activation(cfg)?;
    let mut out = Seed::new(seed);
    let c = cfg.run.classes;
    let net = init_multi(cfg.init, cfg.m, data.d(), c, seed, &spec)?;
    let g = multiclass_g(&data, &net)?;
    let series = expand_activation(&spec, Target::PhiPrime, cfg.run.order)?;
    let ginf = build_g_infinite(&data, &series, cfg.run.order)?;
    let tol = cfg.run.tolerance.unwrap_or(5e-3);
    let (mut off, mut diag) = (0.0f64, 0.0f64);
    let mut csv = Csv::new(&["q", "q2", "max_abs"]);
    for q in 0..c {
        for q2 in 0..c {
            let b = g.block(q, q2, c);
            let v = if q == q2 {
                b.max_abs_diff(&ginf.values)
            } else {
                b.data.iter().fold(0.0f64, |a, x| a.max(x.abs()))
            };
            if q == q2 {
                diag = diag.max(v);
            } else {
                off = off.max(v);
            }
            csv.row([q.to_string(), q2.to_string(), num(v)]);
        }
    }
    out.file("multiclass", csv);
    out.put("max_offdiag_block", num(off));
    out.put("max_diag_deviation", num(diag));
    out.put("tolerance", num(tol));
    out.check("offdiag_blocks", off <= tol);
    out.check("diag_blocks", diag <= tol);
    Ok(out)
}

/// Runs `exp` over every configured seed.
pub fn run(exp: Experiment, cfg: &ExperimentConfig) -> Result<Outcome> {
    if let Some(named) = cfg.experiment {
        if named != exp {
            bail!("config is for experiment `{}` but `{}` was requested", named.name(), exp.name());
        }
    }
    let f: fn(&ExperimentConfig, u64) -> Result<Seed> = match exp {
        Experiment::Spectrum => spectrum,
        Experiment::Approx => approx,
        Experiment::Kill => kill,
        Experiment::Train => train,
        Experiment::Predict => predict,
        Experiment::Depth => depth,
        Experiment::Smoothed => smoothed_run,
        Experiment::Trace => trace,
        Experiment::Multiclass => multiclass,
    };
    let mut seeds: Vec<SeedResult> = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let t = Instant::now();
            let s = f(cfg, seed).with_context(|| format!("{} failed for seed {seed}", exp.name()))?;
            Ok(SeedResult { seed: s.seed, pass: s.pass, values: s.values, files: s.files, seconds: t.elapsed().as_secs_f64() })
        })
        .collect::<Result<_>>()?;
    let mut outcome = Outcome { pass: true, ..Outcome::default() };
    match exp {
        Experiment::Spectrum => spectrum_summary(cfg, &mut seeds, &mut outcome)?,
        Experiment::Smoothed => smoothed_summary(cfg, &seeds, &mut outcome)?,
        _ => {}
    }
    outcome.pass &= match exp {
        Experiment::Spectrum | Experiment::Smoothed => seeds.iter().all(|s| s.values.iter().all(|(k, v)| !k.starts_with("check.") || v == "pass")),
        _ => seeds.iter().all(|s| s.pass),
    };
    outcome.seeds = seeds;
    Ok(outcome)
}
