//! Acceptance suite. Every criterion prints one `ACCEPT` line with its
//! measured quantities, then asserts. Criteria run one at a time so their
//! wall-clock budgets are measured without contention.

use gramscope_core::activation::catalog;
use gramscope_core::chebyshev::{cheb_approx, cheb_degree_for_eps};
use gramscope_core::data::{circle_lift, equiangular, low_dim_embed, random_unit, smoothed, Dataset};
use gramscope_core::depth::{correlation_map, depth_constant_c, depth_forward, fixed_point_steps};
use gramscope_core::gradcheck::check_quadratic;
use gramscope_core::gram::{build_g_finite, build_g_infinite, multiclass_g};
use gramscope_core::hermite::{
    decay_slope, expand_activation, relu_prime_hermite_closed_form, Target,
};
use gramscope_core::kill::{kill_nullspace, kill_nullspace_parity, kill_residual_smooth, DerivativeParity};
use gramscope_core::linalg::{dot, hadamard_power, khatri_rao_power, min_sv_column_distance, svd_jacobi, Mat};
use gramscope_core::network::{forward, init_multi, init_net, InitScheme};
use gramscope_core::ordering::{compare_orderings, OrderingRun};
use gramscope_core::predict::spectral_predict;
use gramscope_core::quadrature::gaussian_expectation;
use gramscope_core::train::{default_eta, default_sgd_eta, movement_condition, train_gd, train_sgd, TrainConfig};
use std::sync::Mutex;
use std::time::{Duration, Instant};

static SERIAL: Mutex<()> = Mutex::new(());

fn verdict(id: u32, name: &str, pass: bool, elapsed: Duration, budget: Duration, detail: &str) {
    let in_time = elapsed <= budget;
    let ok = pass && in_time;
    println!(
        "ACCEPT c{id:02} {} {name}: {detail}; time {:.2}s (budget {}s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
    assert!(in_time, "criterion {id} ({name}) exceeded its {}s budget", budget.as_secs());
}

fn lock() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

// d' = 3 data, n = 11, shared by the first two criteria.
fn kill_setup() -> (Dataset, Vec<f64>, usize) {
    let data = low_dim_embed(11, 3, 10, 0.05, 21).unwrap();
    let spec = catalog("quadratic").unwrap();
    let net = init_net(InitScheme::Dzps, 50, 10, 21, &spec).unwrap();
    let spectrum = build_g_finite(&data, &net).unwrap().spectrum().unwrap();
    let basis = kill_nullspace(&data, 2).unwrap();
    (data, spectrum.values, basis.dim())
}

#[test]
fn c01_exact_kill() {
    let _g = lock();
    let t = Instant::now();
    let (data, values, null_dim) = kill_setup();
    let lmax = values[0];
    let lmin = *values.last().unwrap();
    let pass = data.d_eff == 3 && lmin <= 1e-12 * lmax && null_dim >= 2;
    verdict(
        1,
        "exact kill (quadratic, d'=3, p=2, n=11, m=50)",
        pass,
        t.elapsed(),
        secs(1),
        &format!("d'={} lambda_min={lmin:.3e} lambda_max={lmax:.3e} nullspace_dim={null_dim} (need >= 2)", data.d_eff),
    );
}

#[test]
fn c02_rank_deficiency_count() {
    let _g = lock();
    let t = Instant::now();
    let (_, values, null_dim) = kill_setup();
    let thr = 1e-12 * values[0];
    let zeros = values.iter().filter(|v| **v <= thr).count();
    verdict(
        2,
        "rank-deficiency count",
        zeros >= 2 && zeros >= null_dim.min(2),
        t.elapsed(),
        secs(1),
        &format!("eigenvalues below 1e-12*lambda_max: {zeros} (need >= 2); nullspace_dim={null_dim}"),
    );
}

fn lambda_mins(data: &Dataset, seed: u64, m: usize, acts: &[&str]) -> Vec<(String, f64)> {
    acts.iter()
        .map(|a| {
            let spec = catalog(a).unwrap();
            let net = init_net(InitScheme::Dzps, m, data.d(), seed, &spec).unwrap();
            let s = build_g_finite(data, &net).unwrap().spectrum().unwrap();
            (a.to_string(), s.lambda_min())
        })
        .collect()
}

#[test]
fn c03_tanh_small_vs_kink_large() {
    let _g = lock();
    let t = Instant::now();
    let acts = ["relu", "elu", "tanh", "swish"];
    let m = 100_000;
    let mut runs = Vec::new();
    let mut kill_ok = true;
    let mut kill_detail = String::new();
    let mut per_seed = Vec::new();
    for seed in 1..=5u64 {
        let data = circle_lift(10, 10, seed).unwrap();
        let lm = lambda_mins(&data, seed, m, &acts);
        per_seed.push(format!(
            "seed {seed}: {}",
            lm.iter().map(|(a, l)| format!("{a}={l:.2e}")).collect::<Vec<_>>().join(" ")
        ));
        for (a, l) in &lm {
            runs.push(OrderingRun { activation: a.clone(), seed, data_fingerprint: data.fingerprint(), lambda_min: *l });
        }
        let tanh = catalog("tanh").unwrap();
        let net = init_net(InitScheme::Dzps, m, 10, seed, &tanh).unwrap();
        let g = build_g_finite(&data, &net).unwrap().spectrum().unwrap();
        let basis = kill_nullspace_parity(&data, 8, DerivativeParity::Even).unwrap();
        let res = kill_residual_smooth(&data, &net, &basis).unwrap();
        let ok = basis.dim() > 0 && res * res >= g.lambda_min() - 1e-12 * g.lambda_max();
        kill_ok &= ok;
        kill_detail.push_str(&format!(" [seed {seed}: dim={} res^2={:.2e} lmin={:.2e}]", basis.dim(), res * res, g.lambda_min()));
    }
    // Odd n has no antipodal pairs; reported for comparison only.
    let odd = circle_lift(11, 10, 1).unwrap();
    let diag: Vec<String> = lambda_mins(&odd, 1, m, &acts).iter().map(|(a, l)| format!("{a}={l:.2e}")).collect();
    let verdict_o = compare_orderings(&runs).unwrap();
    let detail = format!(
        "ordering holds on {}/5 seeds; {}; kill bound{}; n=11 diagnostic: {}",
        verdict_o.seeds_holding,
        per_seed.join("; "),
        kill_detail,
        diag.join(" ")
    );
    verdict(3, "tanh smallness vs kink largeness", verdict_o.majority && kill_ok, t.elapsed(), secs(120), &detail);
}

#[test]
fn c04_tanh_hermite_decay() {
    let _g = lock();
    let t = Instant::now();
    let s = expand_activation(&catalog("tanh").unwrap(), Target::PhiPrime, 60).unwrap();
    let slope = decay_slope(&s, 10, 60).unwrap();
    let full = decay_slope(&s, 0, 60).unwrap();
    let lo = -std::f64::consts::FRAC_PI_4 - 0.15;
    let hi = -std::f64::consts::FRAC_PI_4 + 0.15;
    verdict(
        4,
        "Hermite decay of tanh'",
        (lo..=hi).contains(&slope),
        t.elapsed(),
        secs(10),
        &format!("slope over k in [10,60] = {slope:.4} (window [{lo:.3}, {hi:.3}]); over [0,60] = {full:.4}"),
    );
}

#[test]
fn c05_relu_prime_coefficients() {
    let _g = lock();
    let t = Instant::now();
    let closed = relu_prime_hermite_closed_form(61);
    let quad = expand_activation(&catalog("relu").unwrap(), Target::PhiPrime, 20).unwrap();
    let max_diff = (0..=20).map(|k| (closed.coeffs[k] - quad.coeffs[k]).abs()).fold(0.0, f64::max);
    let scaled: Vec<f64> = (5..=30).map(|k| closed.coeffs[2 * k + 1].abs() * (k as f64).powf(0.75)).collect();
    let ratio = scaled.iter().copied().fold(0.0, f64::max) / scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let pass = max_diff <= 1e-8 && closed.coeffs[0] == 0.5 && (quad.coeffs[0] - 0.5).abs() <= 1e-12 && ratio <= 3.0;
    verdict(
        5,
        "ReLU' Hermite coefficients",
        pass,
        t.elapsed(),
        secs(5),
        &format!("max |quad - closed| (k<=20) = {max_diff:.2e}; c0 = {}; spread of |c_(2k+1)| k^0.75 over 5..30 = {ratio:.3}", closed.coeffs[0]),
    );
}

#[test]
fn c06_chebyshev_degree_formula() {
    let _g = lock();
    let t = Instant::now();
    let tanh = catalog("tanh").unwrap();
    let f = |x: f64| tanh.eval1(x);
    let mut fails = Vec::new();
    let mut cells = Vec::new();
    for tau in [3.0, 6.0, 9.0] {
        for eps in [1e-1, 1e-2, 1e-3] {
            let p = cheb_degree_for_eps(tau, eps).unwrap();
            let err = cheb_approx(f, tau, p).unwrap().sup_error_estimate;
            let err2 = cheb_approx(f, tau, 2 * p).unwrap().sup_error_estimate;
            cells.push(format!("(tau={tau},eps={eps:e},p={p}: err={err:.2e}, at 2p {err2:.2e})"));
            if err > 3.0 * eps {
                fails.push(format!("tau={tau} eps={eps:e}"));
            }
        }
    }
    verdict(
        6,
        "Chebyshev degree formula for tanh'",
        fails.is_empty(),
        t.elapsed(),
        secs(5),
        &format!("{} of 9 cells exceed 3*eps {:?}; {}", fails.len(), fails, cells.join(" ")),
    );
}

#[test]
fn c07_series_vs_monte_carlo() {
    let _g = lock();
    let t = Instant::now();
    let data = random_unit(8, 10, 7).unwrap();
    let spec = catalog("tanh").unwrap();
    let series = expand_activation(&spec, Target::PhiPrime, 60).unwrap();
    let ginf = build_g_infinite(&data, &series, 60).unwrap();
    let net = init_net(InitScheme::Dzps, 1_000_000, 10, 7, &spec).unwrap();
    let gfin = build_g_finite(&data, &net).unwrap();
    let diff = ginf.values.max_abs_diff(&gfin.values);
    verdict(
        7,
        "G-infinity series vs Monte-Carlo G (tanh, n=8, m=1e6)",
        diff <= 5e-3,
        t.elapsed(),
        secs(120),
        &format!("max entry difference {diff:.3e} (tolerance 5e-3)"),
    );
}

#[test]
fn c08_khatri_rao_identities() {
    use rand::{Rng, SeedableRng};
    let _g = lock();
    let t = Instant::now();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
    let mut worst_pair = 0.0f64;
    let mut worst_gram = 0.0f64;
    for trial in 0..100u64 {
        let data = random_unit(6, 4, 1000 + trial).unwrap();
        let k = data.inner_products();
        for r in 1..=5usize {
            let kr = khatri_rao_power(&data.x, r).unwrap();
            let lhs = hadamard_power(&k, r as i32);
            worst_gram = worst_gram.max(lhs.max_abs_diff(&kr.gram()));
            let (i, j) = (rng.random_range(0..6), rng.random_range(0..6));
            let ip = dot(&kr.col(i), &kr.col(j));
            worst_pair = worst_pair.max((ip - k[(i, j)].powi(r as i32)).abs());
        }
    }
    verdict(
        8,
        "Khatri-Rao identities",
        worst_pair <= 1e-12 && worst_gram <= 1e-12,
        t.elapsed(),
        secs(5),
        &format!("max inner-product error {worst_pair:.2e}; max Hadamard/Gram error {worst_gram:.2e}"),
    );
}

#[test]
fn c09_gradient_check() {
    let _g = lock();
    let t = Instant::now();
    let data = random_unit(5, 6, 9).unwrap();
    let mut parts = Vec::new();
    let mut pass = true;
    for a in ["tanh", "elu", "swish", "relu"] {
        let spec = catalog(a).unwrap();
        let net = init_net(InitScheme::Dzps, 20, 6, 9, &spec).unwrap();
        let c = check_quadratic(&net, &data, &data.labels).unwrap();
        pass &= c.max_rel_err <= 1e-5 && c.checked > 0;
        parts.push(format!("{a}: {:.2e} ({} checked, {} skipped)", c.max_rel_err, c.checked, c.skipped));
    }
    verdict(9, "gradient check", pass, t.elapsed(), secs(5), &parts.join("; "));
}

fn dynamics_data() -> Dataset {
    random_unit(10, 10, 10).unwrap()
}

#[test]
fn c10_spectral_predictor() {
    let _g = lock();
    let t = Instant::now();
    let data = dynamics_data();
    let spec = catalog("tanh").unwrap();
    let mut net = init_net(InitScheme::Dzps, 100_000, 10, 10, &spec).unwrap();
    let s0 = build_g_finite(&data, &net).unwrap().spectrum().unwrap();
    let u0 = forward(&net, &data).unwrap();
    let r0: Vec<f64> = data.labels.iter().zip(&u0).map(|(y, u)| y - u).collect();
    let eta = default_eta(s0.lambda_min(), net.c_phi, 10);
    let cfg = TrainConfig { record_every: 20, ..TrainConfig::gd(eta, 2000) };
    let traj = train_gd(&mut net, &data, &cfg).unwrap();
    let mut worst = 0.0f64;
    for rec in &traj.records {
        let p = spectral_predict(&s0, &r0, eta, 1.0, rec.step);
        worst = worst.max((p.residual_norm - rec.residual_norm).abs() / rec.residual_norm);
    }
    let last = traj.records.last().unwrap();
    verdict(
        10,
        "spectral residual predictor (tanh, n=10, m=1e5, 2000 steps)",
        worst <= 0.05 && last.step == 2000,
        t.elapsed(),
        secs(300),
        &format!(
            "max relative error {worst:.3e} over {} records; eta={eta:.3e}; residual {:.4} -> {:.4}",
            traj.records.len(),
            traj.records[0].residual_norm,
            last.residual_norm
        ),
    );
}

#[test]
fn c11_gd_geometric_convergence() {
    let _g = lock();
    let t = Instant::now();
    let data = dynamics_data();
    let spec = catalog("relu").unwrap();
    let mut net = init_net(InitScheme::Dzps, 10_000, 10, 11, &spec).unwrap();
    let lmin = build_g_finite(&data, &net).unwrap().spectrum().unwrap().lambda_min();
    let eta = lmin / (2.0 * 100.0);
    let budget = (4.0 * 1000f64.ln() / (eta * lmin)).ceil() as usize;
    let cfg = TrainConfig { record_every: 1000, target_loss_ratio: Some(1e-3), ..TrainConfig::gd(eta, budget) };
    let traj = train_gd(&mut net, &data, &cfg).unwrap();
    let monotone = traj.step_losses.windows(2).all(|w| w[1] <= w[0]);
    let ratio = traj.final_loss() / traj.initial_loss();
    verdict(
        11,
        "GD geometric convergence (relu, m=1e4)",
        monotone && ratio <= 1e-3,
        t.elapsed(),
        secs(120),
        &format!(
            "lambda_min={lmin:.4}; eta={eta:.3e}; reached L/L0={ratio:.3e} at step {} of budget {budget}; monotone={monotone}",
            traj.last_step()
        ),
    );
}

#[test]
fn c12_sgd() {
    let _g = lock();
    let t = Instant::now();
    let data = dynamics_data();
    let spec = catalog("elu").unwrap();
    let net0 = init_net(InitScheme::Dzps, 100_000, 10, 12, &spec).unwrap();
    let s0 = build_g_finite(&data, &net0).unwrap().spectrum().unwrap();
    let (lmin, lmax) = (s0.lambda_min(), s0.lambda_max());
    let (n, b) = (10usize, 2usize);
    let u0 = forward(&net0, &data).unwrap();
    let r0sq: f64 = data.labels.iter().zip(&u0).map(|(y, u)| (y - u).powi(2)).sum();
    let eps = 1e-2 * r0sq;
    let (alpha, beta) = (spec.lipschitz_alpha, spec.smooth_beta);
    let budget = 4.0 * (n as f64).powi(6) * alpha.powi(4) * beta * (n as f64 / eps).ln() / ((b * b) as f64 * lmin * lmin);
    let eta = default_sgd_eta(lmax, 1.0, n, b);
    let base = TrainConfig { batch: Some(b), seed: 12, target_loss_ratio: Some(1e-2), record_every: 50, ..TrainConfig::gd(eta, budget.min(1e9) as usize) };
    let mut net = net0.clone();
    let traj = train_sgd(&mut net, &data, &base).unwrap();
    let stop = traj.last_step();
    let reached = traj.final_loss() <= 1e-2 * traj.initial_loss();
    // rerun to keep five evenly spaced snapshots up to the stopping step
    let snaps: Vec<usize> = (1..=5).map(|i| i * stop / 5).collect();
    let mut net = net0.clone();
    let traj = train_sgd(&mut net, &data, &TrainConfig { snapshot_steps: snaps.clone(), ..base.clone() }).unwrap();
    let flags = movement_condition(&traj, alpha, beta, n, lmin);
    let movement_all = flags.iter().all(|f| *f);
    let first_violation = flags.iter().position(|f| !*f);
    let mut lam_ok = true;
    let mut lam_detail = Vec::new();
    for (step, snap) in &traj.snapshots {
        let l = build_g_finite(&data, snap).unwrap().spectrum().unwrap().lambda_min();
        lam_ok &= l >= 0.5 * lmin;
        lam_detail.push(format!("t={step}: {l:.6}"));
    }
    let threshold = lmin / (4.0 * alpha * beta * n as f64);
    verdict(
        12,
        "SGD (elu, b=2, m=1e5)",
        reached && movement_all && lam_ok,
        t.elapsed(),
        secs(300),
        &format!(
            "L/L0 <= 1e-2 reached={reached} at step {stop} (budget {budget:.3e}); eta={eta:.3e}; max drift {:.3e} vs threshold {threshold:.3e}, first violation at step {:?}; lambda_min(G^t) [{}] vs 0.5*lambda_min(G^0)={:.4}",
            traj.max_drift(),
            first_violation,
            lam_detail.join(", "),
            0.5 * lmin
        ),
    );
}

#[test]
fn c13_depth() {
    let _g = lock();
    let t = Instant::now();
    let spec = catalog("tanh").unwrap();
    let rho0 = 0.13;
    let data = equiangular(6, rho0, 10, 13).unwrap();
    let m = 20_000;
    let trace = depth_forward(&spec, &data, 8, m, 13).unwrap();
    let series = expand_activation(&spec, Target::Phi, 60).unwrap();
    let c = depth_constant_c(&series).unwrap();
    let noise = 2.0 / (m as f64).sqrt();
    let mut norms_ok = true;
    let mut corr = Vec::new();
    for l in 0..=8 {
        let (lo, hi) = trace.norm_range(l);
        norms_ok &= lo > 0.9 && hi < 1.1;
        corr.push(trace.max_offdiag(l));
    }
    let first_below = corr.iter().position(|r| *r < 0.1);
    let decreasing = match first_below {
        Some(l) => corr[..=l].windows(2).all(|w| w[1] < w[0] + noise),
        None => false,
    };
    let fp = fixed_point_steps(c, rho0, 0.1).unwrap();
    let within = first_below.is_some_and(|l| {
        let r = l as f64 / fp.steps as f64;
        (0.5..=2.0).contains(&r)
    });
    let predicted: Vec<String> = {
        let mut rho = rho0;
        (0..=8)
            .map(|_| {
                let s = format!("{rho:.4}");
                rho = correlation_map(&series, rho);
                s
            })
            .collect()
    };
    verdict(
        13,
        "depth (tanh, n=6, rho0=0.13, L=8, m=2e4)",
        norms_ok && decreasing && within,
        t.elapsed(),
        secs(180),
        &format!(
            "delta={:.3}; norms in (0.9,1.1): {norms_ok}; max |rho| per layer {:?}; R-map prediction [{}]; first layer below 0.1: {first_below:?}; fixed_point_steps(c={c:.4})={} (bound {:.1})",
            data.delta,
            corr.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
            predicted.join(", "),
            fp.steps,
            fp.bound
        ),
    );
}

#[test]
fn c14_trace() {
    let _g = lock();
    let t = Instant::now();
    let data = random_unit(10, 10, 14).unwrap();
    let m = 100_000;
    let relu = catalog("relu").unwrap();
    let net = init_net(InitScheme::Dzps, m, 10, 14, &relu).unwrap();
    let tr_relu = build_g_finite(&data, &net).unwrap().values.trace() / 10.0;
    let tanh = catalog("tanh").unwrap();
    let net = init_net(InitScheme::Dzps, m, 10, 14, &tanh).unwrap();
    let tr_tanh = build_g_finite(&data, &net).unwrap().values.trace() / 10.0;
    // per-neuron contributions give the Monte-Carlo standard error
    let pts = data.points();
    let per: Vec<f64> = (0..m)
        .map(|k| net.a[(k, 0)].powi(2) * pts.iter().map(|x| tanh.eval1(net.preact(k, x)).powi(2)).sum::<f64>() / 10.0)
        .collect();
    let mean = per.iter().sum::<f64>() / m as f64;
    let var = per.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m as f64 - 1.0);
    let se = (var / m as f64).sqrt();
    let exact = gaussian_expectation(|z| tanh.eval1(z).powi(2), None, 400).unwrap();
    let pass = (0.45..=0.55).contains(&tr_relu) && (tr_tanh - exact).abs() <= 3.0 * se;
    verdict(
        14,
        "trace ratio",
        pass,
        t.elapsed(),
        secs(60),
        &format!("relu tr/n={tr_relu:.4}; tanh tr/n={tr_tanh:.5} vs E[tanh'^2]={exact:.5} (SE {se:.2e}, |diff|/SE={:.2})", (tr_tanh - exact).abs() / se),
    );
}

#[test]
fn c15_smoothing() {
    let _g = lock();
    let t = Instant::now();
    let base = low_dim_embed(10, 5, 8, 0.05, 15).unwrap();
    let mut x = base.x.clone();
    for i in 0..x.rows {
        x[(i, 1)] = x[(i, 0)];
    }
    let degenerate = Dataset::new(x, base.labels.clone(), 15).unwrap();
    let kr = khatri_rao_power(&degenerate.x, 2).unwrap();
    let s_base = svd_jacobi(&kr).unwrap().sigma_min();
    let mut good = 0;
    let mut rudelson_ok = true;
    let mut worst_slack = f64::INFINITY;
    let mut sig = Vec::new();
    for seed in 0..20u64 {
        let (sm, _) = smoothed(&degenerate, 0.05, 100 + seed).unwrap();
        let kr = khatri_rao_power(&sm.x, 2).unwrap();
        let (lb, smin) = min_sv_column_distance(&kr).unwrap();
        if smin >= 1e-4 {
            good += 1;
        }
        rudelson_ok &= lb <= smin + 1e-9;
        worst_slack = worst_slack.min(smin - lb);
        sig.push(format!("{smin:.2e}"));
    }
    let (lb0, s0) = min_sv_column_distance(&kr).unwrap();
    rudelson_ok &= lb0 <= s0 + 1e-9;
    verdict(
        15,
        "smoothing effect on sigma_min of X^{*2}",
        s_base < 1e-8 && good >= 18 && rudelson_ok,
        t.elapsed(),
        secs(60),
        &format!(
            "degenerate sigma_min={s_base:.2e}; smoothed sigma_min >= 1e-4 on {good}/20 seeds [{}]; column-distance bound holds={rudelson_ok} (min slack {worst_slack:.2e})",
            sig.join(" ")
        ),
    );
}

#[test]
fn c16_multiclass_blocks() {
    let _g = lock();
    let t = Instant::now();
    let data = random_unit(8, 10, 16).unwrap();
    let spec = catalog("tanh").unwrap();
    let net = init_multi(InitScheme::Dzps, 100_000, 10, 3, 16, &spec).unwrap();
    let g = multiclass_g(&data, &net).unwrap();
    let series = expand_activation(&spec, Target::PhiPrime, 60).unwrap();
    let ginf = build_g_infinite(&data, &series, 60).unwrap();
    let mut off = 0.0f64;
    let mut diag = 0.0f64;
    for q in 0..3 {
        for q2 in 0..3 {
            let b = g.block(q, q2, 3);
            if q == q2 {
                diag = diag.max(b.max_abs_diff(&ginf.values));
            } else {
                off = off.max(b.data.iter().fold(0.0, |a, v| a.max(v.abs())));
            }
        }
    }
    verdict(
        16,
        "multiclass block structure (C=3, m=1e5)",
        off <= 5e-3 && diag <= 5e-3,
        t.elapsed(),
        secs(120),
        &format!("max off-diagonal block entry {off:.3e}; max diagonal-block deviation from G-infinity {diag:.3e} (tolerance 5e-3)"),
    );
}

#[test]
fn c17_excluded_claims() {
    let _g = lock();
    println!(
        "ACCEPT c17 PASS excluded: exact neuron-count thresholds, failure probabilities and the CIFAR10 experiment are not reproduced; criteria 1-16 stand in for them"
    );
    let _ = Mat::identity(1);
}
