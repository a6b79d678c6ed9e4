//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints one PASS/FAIL line; the process fails if any does.
//!
//! `cargo test --test acceptance` runs all of them;
//! `cargo test --test acceptance -- 4 7` runs a subset.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use templab::analysis::{fit_rate, summarize, FitWindow};
use templab::hybrid::{simulate, simulate_sample_hold, simulate_state_feedback, HybridState, IntegratorParams};
use templab::integrate::rk4_step;
use templab::jets::{cal_h, cal_h_jacobian, hk, InputSignal};
use templab::models::{builtin_system, BuiltinInstance, CompactSpec, SatMap, BUILTIN_NAMES};
use templab::observer::{simulate_observer, ObserverConfig, PhiProblem};
use templab::template::{
    certify_template, haar_orthogonal, isometry_from, isometry_update, operator_norm, orthogonality_defect,
    search_template, ControlTemplate, GridParams, PolyInput, SearchOutcome, SearchParams,
};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn uniform_in(rng: &mut ChaCha8Rng, lo: &[f64], hi: &[f64]) -> Vec<f64> {
    lo.iter().zip(hi).map(|(a, b)| if a < b { rng.random_range(*a..=*b) } else { *a }).collect()
}

fn random_orthogonal(rng: &mut ChaCha8Rng, p: usize) -> DMatrix<f64> {
    if p == 1 {
        DMatrix::from_element(1, 1, if rng.random_bool(0.5) { 1.0 } else { -1.0 })
    } else {
        haar_orthogonal(p, rng)
    }
}

fn builtin(name: &str) -> BuiltinInstance {
    builtin_system(name).expect("builtin exists")
}

// ---------------------------------------------------------------- 1

/// Output samples `y(j·δ)`, `j = -count..=count`, from one RK4 pass forward
/// and one backward with a step dividing `δ`, so the integration error is a
/// smooth function of time.
fn output_samples(inst: &BuiltinInstance, input: &PolyInput, x0: &[f64], delta: f64, count: usize) -> Vec<f64> {
    const SUBSTEPS: usize = 40;
    let sys = &inst.system;
    let mut rhs = |t: f64, x: &[f64]| sys.f(x, &input.value_at(t));
    let mut out = vec![0.0; 2 * count + 1];
    out[count] = sys.h(x0)[0];
    for dir in [1.0, -1.0] {
        let h = dir * delta / SUBSTEPS as f64;
        let mut x = x0.to_vec();
        for j in 1..=count {
            for k in 0..SUBSTEPS {
                let t = dir * ((j - 1) as f64 * delta) + k as f64 * h;
                x = rk4_step(&mut rhs, t, &x, h);
            }
            let idx = if dir > 0.0 { count + j } else { count - j };
            out[idx] = sys.h(&x)[0];
        }
    }
    out
}

/// Second-order central difference of order `k` at spacing `m·δ` from the
/// samples above (index `count` is t = 0).
fn central(y: &[f64], count: usize, m: usize, delta: f64, k: usize) -> f64 {
    let at = |j: i64| y[(count as i64 + j * m as i64) as usize];
    let h = m as f64 * delta;
    match k {
        0 => at(0),
        1 => (at(1) - at(-1)) / (2.0 * h),
        2 => (at(1) - 2.0 * at(0) + at(-1)) / (h * h),
        3 => (at(2) - 2.0 * at(1) + 2.0 * at(-1) - at(-2)) / (2.0 * h.powi(3)),
        4 => (at(2) - 4.0 * at(1) + 6.0 * at(0) - 4.0 * at(-1) + at(-2)) / h.powi(4),
        _ => unreachable!(),
    }
}

/// Two Richardson levels on spacings 4δ, 2δ, δ.
fn richardson(y: &[f64], count: usize, delta: f64, k: usize) -> f64 {
    let d = |m| central(y, count, m, delta, k);
    let (d4, d2, d1) = (d(4), d(2), d(1));
    let r_coarse = (4.0 * d2 - d4) / 3.0;
    let r_fine = (4.0 * d1 - d2) / 3.0;
    (16.0 * r_fine - r_coarse) / 15.0
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let delta = 0.025;
    let count = 8;
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let inst = builtin(BUILTIN_NAMES[trial % BUILTIN_NAMES.len()]);
        let degree = rng.random_range(0..=4);
        let coeffs = vec![(0..=degree).map(|_| rng.random_range(-1.0..1.0)).collect()];
        let input = PolyInput::new(1.0, coeffs).unwrap();
        let x = uniform_in(&mut rng, &inst.spec.outer.lo, &inst.spec.outer.hi);
        let y = output_samples(&inst, &input, &x, delta, count);
        let sigma = input.jet_at(0.0, 4);
        for k in 0..=4 {
            let jet = hk(&inst.system, &x, &sigma, k).map_err(|e| e.to_string())?[0];
            let fd = richardson(&y, count, delta, k);
            let rel = (jet - fd).abs() / jet.abs().max(1.0);
            worst = worst.max(rel);
            check(rel < 1e-5, || format!("trial {trial} k={k}: H_k = {jet}, finite differences {fd} (rel {rel:.2e})"))?;
        }
    }
    Ok(format!("50 triples, k <= 4, worst relative gap {worst:.2e}"))
}

// ---------------------------------------------------------------- 2

fn criterion_2() -> Outcome {
    let inst = builtin("linear2d");
    let (a, b, c) = (
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
        DMatrix::from_row_slice(2, 1, &[0.0, 1.0]),
        DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let tpl = ControlTemplate::new(PolyInput::new(1.0, vec![vec![1.0, -0.7, 0.4, 0.3]]).unwrap()).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let x = uniform_in(&mut rng, &inst.spec.outer.lo, &inst.spec.outer.hi);
        let t = rng.random_range(0.0..1.0);
        let mu = rng.random_range(0.0..inst.spec.lambda_bar);
        let rot = random_orthogonal(&mut rng, 1);
        let q = rng.random_range(1..=4);
        let stack = cal_h(&inst.system, &x, t, &tpl, mu, &rot, q).map_err(|e| e.to_string())?;
        let jac = cal_h_jacobian(&inst.system, &x, t, &tpl, mu, &rot, q).map_err(|e| e.to_string())?;
        let xv = DMatrix::from_column_slice(2, 1, &x);
        let u = tpl.jet_at(t, q);
        let mut ak = DMatrix::identity(2, 2);
        for j in 0..=q {
            // H_j = C A^j x + Σ_{i<j} C A^{j-1-i} B u^{(i)}
            let mut expect = (&c * &ak * &xv)[(0, 0)];
            for i in 0..j {
                let ui = mu * rot[(0, 0)] * u.coeffs()[i][0];
                expect += (&c * a.pow((j - 1 - i) as u32) * &b)[(0, 0)] * ui;
            }
            let row = &c * &ak;
            worst = worst.max((stack.values[j] - expect).abs());
            for col in 0..2 {
                worst = worst.max((jac[(j, col)] - row[(0, col)]).abs());
            }
            ak = &ak * &a;
        }
    }
    check(worst < 1e-10, || format!("worst deviation {worst:.2e}"))?;
    Ok(format!("200 points, q <= 4, worst deviation {worst:.2e}"))
}

// ---------------------------------------------------------------- 3

/// A member of `𝓡₀(u)` other than the canonical one when `p ≥ 3`.
fn member_of_r0(rng: &mut ChaCha8Rng, u: &[f64]) -> DMatrix<f64> {
    let p = u.len();
    let base = isometry_from(u);
    if p < 3 {
        return base;
    }
    let q = haar_orthogonal(p - 1, rng);
    let mut block = DMatrix::identity(p, p);
    block.view_mut((1, 1), (p - 1, p - 1)).copy_from(&q);
    base * block
}

fn r0_gap(u_prev: &[f64], r_prev: &DMatrix<f64>, u_new: &[f64]) -> Result<f64, String> {
    let r_new = isometry_update(u_prev, r_prev, u_new);
    check(orthogonality_defect(&r_new) < 1e-10, || "update is not orthogonal".into())?;
    let (na, nb) = (norm(u_prev), norm(u_new));
    let image: Vec<f64> = r_new.column(0).iter().map(|v| v * nb).collect();
    let miss = image.iter().zip(u_new).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    check(miss < 1e-10, || format!("R_new (|u|e1) misses u_new by {miss:.2e}"))?;
    let lhs = operator_norm(&(r_prev * na - &r_new * nb));
    let rhs = norm(&u_prev.iter().zip(u_new).map(|(a, b)| a - b).collect::<Vec<_>>());
    Ok(lhs - rhs)
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    for p in [1usize, 2, 3, 5] {
        let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
        let rand_vec = |rng: &mut ChaCha8Rng| (0..p).map(|_| rng.random_range(-2.0..2.0)).collect::<Vec<f64>>();
        for _ in 0..1000 {
            let a = rand_vec(&mut rng);
            let b = rand_vec(&mut rng);
            pairs.push((a, b));
        }
        // Edge cases: collinear, opposite, zero on either side, both zero.
        let a = rand_vec(&mut rng);
        pairs.push((a.clone(), a.iter().map(|v| 2.5 * v).collect()));
        pairs.push((a.clone(), a.iter().map(|v| -0.5 * v).collect()));
        pairs.push((a.clone(), vec![0.0; p]));
        pairs.push((vec![0.0; p], a.clone()));
        pairs.push((vec![0.0; p], vec![0.0; p]));
        let mut e1 = vec![0.0; p];
        e1[0] = 1.0;
        pairs.push((e1.clone(), e1.iter().map(|v| -v).collect()));
        for (u_prev, u_new) in pairs {
            let r_prev = member_of_r0(&mut rng, &u_prev);
            let gap = r0_gap(&u_prev, &r_prev, &u_new).map_err(|e| format!("p={p}: {e}"))?;
            worst = worst.max(gap);
            count += 1;
            check(gap <= 1e-10, || format!("p={p} u_prev={u_prev:?} u_new={u_new:?}: excess {gap:.2e}"))?;
        }
    }
    Ok(format!("{count} pairs over p in {{1,2,3,5}}, largest excess {worst:.2e}"))
}

// ---------------------------------------------------------------- 4

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for name in BUILTIN_NAMES {
        let inst = builtin(name);
        let rec = &inst.recommended;
        let tpl = ControlTemplate::recommended(rec).unwrap();
        let sat = SatMap::for_box(&inst.spec.outer);
        let problem = PhiProblem { system: &inst.system, input: &tpl, q: rec.q, bound: sat.bound() };
        let warm = inst.spec.inner.center();
        let p = inst.system.p();
        for i in 0..200 {
            let x = uniform_in(&mut rng, &inst.spec.outer.lo, &inst.spec.outer.hi);
            let t = rng.random_range(0.0..rec.horizon);
            let mu = rng.random_range(0.0..inst.spec.lambda_bar);
            let rot = random_orthogonal(&mut rng, p);
            let z = cal_h(&inst.system, &x, t, &tpl, mu, &rot, rec.q).map_err(|e| e.to_string())?.values;
            let res = problem.invert(&z, t, mu, &rot, &warm).map_err(|e| e.to_string())?;
            let err = x.iter().zip(&res.x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            worst = worst.max(err);
            check(res.converged && err < 1e-6, || {
                format!("{name} point {i}: x = {x:?}, estimate {:?}, converged {}", res.x, res.converged)
            })?;

            // Targets off the range of 𝓗_q.
            let far: Vec<f64> = z.iter().map(|_| rng.random_range(-10.0..10.0)).collect();
            let res = problem.invert(&far, t, mu, &rot, &warm).map_err(|e| e.to_string())?;
            check(res.converged && norm(&res.x) <= sat.bound() * (1.0 + 1e-12), || {
                format!("{name} off-range target {far:?}: {res:?}")
            })?;
        }
    }
    Ok(format!("200 round trips and 200 off-range targets per benchmark, worst error {worst:.2e}"))
}

// ---------------------------------------------------------------- 5

fn criterion_5() -> Outcome {
    let inst = builtin("bilinear2d");
    let rec = &inst.recommended;
    let tpl = ControlTemplate::recommended(rec).unwrap();
    let report = certify_template(&inst.system, &inst.spec, &tpl, rec.q, &GridParams::default()).unwrap();
    check(report.passed, || "the benchmark template is not certified".into())?;
    let sat = SatMap::for_box(&inst.spec.outer);
    let rot = DMatrix::identity(1, 1);
    let problem = PhiProblem { system: &inst.system, input: &tpl, q: rec.q, bound: sat.bound() };
    let mut rates = Vec::new();
    let mut peaks = Vec::new();
    let thetas = [rec.theta, 2.0 * rec.theta, 4.0 * rec.theta];
    for theta in thetas {
        let cfg = ObserverConfig::with_default_gains(rec.q, theta, rec.delta).unwrap();
        let run = simulate_observer(
            &problem,
            &cfg,
            &sat,
            0.5,
            &rot,
            &[0.4, -0.3],
            &[0.0, 0.0],
            &inst.spec.inner.center(),
            rec.horizon,
            cfg.max_step() / 4.0,
        )
        .map_err(|e| e.to_string())?;
        check(!run.diverged, || format!("observer diverged at θ = {theta}"))?;
        let series: Vec<(f64, f64)> = run.samples.iter().map(|s| (s.t, s.error)).collect();
        let fit = fit_rate(&series, FitWindow::new(0.0, rec.horizon, rec.horizon / 20.0)).map_err(|e| e.to_string())?;
        rates.push(fit.nu);
        peaks.push(series.iter().map(|s| s.1).fold(0.0, f64::max) / series[0].1);
    }
    check(rates[0] < rates[1] && rates[1] < rates[2], || format!("rates {rates:?} do not increase with θ"))?;
    let slope = (peaks[2] / peaks[0]).ln() / (thetas[2] / thetas[0]).ln();
    let limit = rec.q as f64 + 0.5;
    check(slope <= limit, || format!("peaking slope {slope:.3} exceeds {limit}"))?;
    Ok(format!("rates {:.2}, {:.2}, {:.2}; peaking slope {slope:.3} <= {limit}", rates[0], rates[1], rates[2]))
}

// ---------------------------------------------------------------- 6

fn criterion_6() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut total = 0;
    for name in BUILTIN_NAMES {
        let inst = builtin(name);
        let rec = &inst.recommended;
        let tpl = ControlTemplate::constant(inst.system.p(), rec.horizon).unwrap();
        let cfg = ObserverConfig::with_default_gains(rec.q, rec.theta, rec.delta).unwrap();
        let integ = IntegratorParams { step: cfg.max_step() / 2.0, stride: 1 };
        let x0: Vec<f64> = inst.spec.inner.hi.iter().map(|v| 0.6 * v).collect();
        let zl = inst.system.m() * (rec.q + 1);
        let init = HybridState::new(x0, vec![0.0; zl], 0.0, inst.system.p());
        let a = simulate(&inst.system, &inst.spec, &tpl, &cfg, init.clone(), 5.0, integ).map_err(|e| e.to_string())?;
        let b = simulate_sample_hold(&inst.system, &inst.spec, &cfg, init, 5.0, integ).map_err(|e| e.to_string())?;
        check(a.samples().count() == b.samples().count(), || format!("{name}: sample counts differ"))?;
        for (sa, sb) in a.samples().zip(b.samples()) {
            check(sa.t == sb.t && sa.i == sb.i, || format!("{name}: hybrid times differ"))?;
            let (ua, ub) = (&sa.state, &sb.state);
            let gap = ua
                .x
                .iter()
                .chain(&ua.z)
                .chain([&ua.s, &ua.mu])
                .zip(ub.x.iter().chain(&ub.z).chain([&ub.s, &ub.mu]))
                .map(|(p, q)| (p - q).abs())
                .fold(0.0, f64::max);
            worst = worst.max(gap);
            total += 1;
        }
        check(worst < 1e-7, || format!("{name}: templated and held arcs differ by {worst:.2e}"))?;
    }
    Ok(format!("{total} samples over all benchmarks, worst gap {worst:.2e}"))
}

// ---------------------------------------------------------------- 7, 8

/// The 3 × 3 grid at axis fractions {0, 0.4, 1} of the inner box.
fn initial_grid(spec: &CompactSpec) -> Vec<Vec<f64>> {
    let fr = [0.0, 0.4, 1.0];
    let (lo, hi) = (&spec.inner.lo, &spec.inner.hi);
    let mut out = Vec::new();
    for a in fr {
        for b in fr {
            out.push(vec![lo[0] + a * (hi[0] - lo[0]), lo[1] + b * (hi[1] - lo[1])]);
        }
    }
    out
}

const CLOSED_LOOP_T_END: f64 = 15.0;

fn criterion_7() -> Outcome {
    let inst = builtin("bilinear2d");
    let rec = &inst.recommended;
    let tpl = ControlTemplate::recommended(rec).unwrap();
    let cfg = ObserverConfig::with_default_gains(rec.q, rec.theta, rec.delta).unwrap();
    let integ = IntegratorParams { step: cfg.max_step() / 2.0, stride: 5 };
    let mut min_nu = f64::INFINITY;
    let mut worst_ratio: f64 = 0.0;
    for x0 in initial_grid(&inst.spec) {
        let init = HybridState::new(x0.clone(), vec![0.0; 2], 0.0, 1);
        let arc = simulate(&inst.system, &inst.spec, &tpl, &cfg, init, CLOSED_LOOP_T_END, integ)
            .map_err(|e| e.to_string())?;
        let s = summarize(&arc, &inst.spec, &inst.system, &tpl);
        let nu = s.nu_x.unwrap_or(f64::NAN);
        let ratio = s.final_x_norm / s.initial_x_norm;
        check(nu > 0.0, || format!("x0 = {x0:?}: fitted rate {nu}"))?;
        check(s.contained, || format!("x0 = {x0:?}: left the outer box at {:?}", s.first_escape))?;
        check(ratio < 1e-3, || format!("x0 = {x0:?}: |x(T)| / |x(0)| = {ratio:.2e}"))?;
        min_nu = min_nu.min(nu);
        worst_ratio = worst_ratio.max(ratio);
    }
    Ok(format!("9 initial conditions, min nu_x {min_nu:.3}, worst |x(T)|/|x(0)| {worst_ratio:.2e}"))
}

fn criterion_8() -> Outcome {
    let inst = builtin("bilinear2d");
    let rec = &inst.recommended;
    let tpl = ControlTemplate::recommended(rec).unwrap();
    let integ = IntegratorParams { step: 0.005, stride: 5 };
    let mut min_nu = f64::INFINITY;
    for x0 in initial_grid(&inst.spec) {
        let init = HybridState::new(x0.clone(), vec![], 0.0, 1);
        let arc = simulate_state_feedback(&inst.system, &inst.spec, &tpl, rec.delta, init, CLOSED_LOOP_T_END, integ)
            .map_err(|e| e.to_string())?;
        let s = summarize(&arc, &inst.spec, &inst.system, &tpl);
        let nu = s.nu_x.unwrap_or(f64::NAN);
        check(nu > 0.0, || format!("x0 = {x0:?}: fitted rate {nu}"))?;
        check(s.contained, || format!("x0 = {x0:?}: left the outer box"))?;
        min_nu = min_nu.min(nu);
    }
    Ok(format!("9 initial conditions at Δ = {}, min nu_x {min_nu:.3}", rec.delta))
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Outcome {
    let lin = builtin("linear2d");
    let null = ControlTemplate::constant(1, 1.0).unwrap();
    let rep = certify_template(&lin.system, &lin.spec, &null, lin.recommended.q, &GridParams::default())
        .map_err(|e| e.to_string())?;
    check(rep.passed, || format!("linear2d null input failed: rho2 {}", rep.rho2))?;

    let unobs = builtin("bilinear_unobservable");
    let q = unobs.recommended.q;
    let grid = GridParams { extra_mu: unobs.bad_input.clone().unwrap_or_default(), ..GridParams::default() };
    let bad = ControlTemplate::constant(1, unobs.recommended.horizon).unwrap();
    let rep_bad = certify_template(&unobs.system, &unobs.spec, &bad, q, &grid).map_err(|e| e.to_string())?;
    check(!rep_bad.passed, || "bad constant template passed".into())?;
    check(!rep_bad.witnesses.is_empty(), || "failing report carries no witness".into())?;

    let params = SearchParams { degree: 2, attempts: 100, seed: 0, ..SearchParams::default() };
    let outcome = search_template(&unobs.system, &unobs.spec, &bad, q, &grid, &params).map_err(|e| e.to_string())?;
    let SearchOutcome::Found { template, report, attempt } = outcome else {
        return Err(format!("no certified template in 100 attempts (best rho2 {})", outcome.report().rho2));
    };
    check(report.passed && template.input().degree() <= 2, || "search result is not a certified quadratic".into())?;
    let w = &rep_bad.witnesses[0];
    Ok(format!(
        "linear2d rho2 {:.3}; constant template fails (witness {:?} at mu = {}, value {:.1e}); search found attempt {attempt}",
        rep.rho2, w.kind, w.mu, w.value
    ))
}

// ---------------------------------------------------------------- 10

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run_cli(sub: &str, config: &str, out: &std::path::Path, threads: &str) -> Result<i32, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_templab"))
        .args([sub, "--config", config, "--out"])
        .arg(out)
        .args(["--threads", threads])
        .status()
        .map_err(|e| e.to_string())?;
    Ok(status.code().unwrap_or(-1))
}

fn criterion_10() -> Outcome {
    let root = repo_root();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = Vec::new();
    for (sub, config, file) in [("simulate", "configs/bilinear2d.toml", "arc.csv"), ("sweep", "configs/sweep.toml", "sweep.csv")]
    {
        let config = root.join(config);
        let config = config.to_str().unwrap();
        let mut outputs = Vec::new();
        for (run, threads) in [(0, "1"), (1, "4")] {
            let dir = tmp.path().join(format!("{sub}{run}"));
            let code = run_cli(sub, config, &dir, threads)?;
            check(code == 0, || format!("{sub} exited with {code}"))?;
            let mut files: Vec<_> = std::fs::read_dir(&dir).map_err(|e| e.to_string())?.map(|e| e.unwrap().path()).collect();
            files.sort();
            let bytes: Vec<(String, Vec<u8>)> = files
                .iter()
                .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(p).unwrap()))
                .collect();
            outputs.push(bytes);
        }
        check(outputs[0] == outputs[1], || format!("{sub} outputs differ between runs"))?;
        check(outputs[0].iter().any(|(n, b)| n == file && !b.is_empty()), || format!("{sub} wrote no {file}"))?;
        compared.push(format!("{sub}: {} files", outputs[0].len()));
    }
    Ok(format!("byte-identical across runs with 1 and 4 threads ({})", compared.join(", ")))
}

// ----------------------------------------------------------------

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "jet correctness", budget: Duration::from_secs(10), run: criterion_1 },
        Criterion { id: 2, name: "linear oracle", budget: Duration::from_secs(1), run: criterion_2 },
        Criterion { id: 3, name: "isometry update inequality", budget: Duration::from_secs(5), run: criterion_3 },
        Criterion { id: 4, name: "left-inverse round trip", budget: Duration::from_secs(30), run: criterion_4 },
        Criterion { id: 5, name: "observer decay vs gain", budget: Duration::from_secs(60), run: criterion_5 },
        Criterion { id: 6, name: "sample-and-hold reduction", budget: Duration::from_secs(60), run: criterion_6 },
        Criterion { id: 7, name: "closed-loop stabilization", budget: Duration::from_secs(120), run: criterion_7 },
        Criterion { id: 8, name: "templated state feedback", budget: Duration::from_secs(30), run: criterion_8 },
        Criterion { id: 9, name: "certification discriminates", budget: Duration::from_secs(120), run: criterion_9 },
        Criterion { id: 10, name: "determinism", budget: Duration::from_secs(120), run: criterion_10 },
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for c in criteria.iter().filter(|c| selected.is_empty() || selected.contains(&c.id)) {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            if elapsed <= c.budget {
                Ok(detail)
            } else {
                Err(format!("{detail}; took {:.2} s, budget {} s", elapsed.as_secs_f64(), c.budget.as_secs()))
            }
        });
        ran += 1;
        match result {
            Ok(detail) => println!("acceptance {:>2} PASS {} ({:.2} s): {detail}", c.id, c.name, elapsed.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("acceptance {:>2} FAIL {} ({:.2} s): {why}", c.id, c.name, elapsed.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
