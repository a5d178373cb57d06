//! One pass/fail line per acceptance criterion. Runs without the test
//! harness so the lines are always printed.

use std::path::PathBuf;
use std::time::Instant;

use rand::Rng;
use smalltime::control::{
    component_homogeneity, direction_certificate, gramian, hormander_rank, malliavin_mc, ControlProblem,
    MalliavinConfig, SteerConfig,
};
use smalltime::models;
use smalltime::numerics::sde::em_terminal_batch;
use smalltime::numerics::{dist_limit_check, rng_for, scale_map, DistLimitConfig, PiecewiseLinearControl};
use smalltime::poly::{rational_from_f64, Coeff, NumField, PolyVectorField};
use smalltime::propagation::{dist_scalings, lil_scalings, Verdict};
use smalltime::regular::{check_regular, DomainSpec, RegularConfig, RegularVerdict, Stage};
use smalltime::saturation::{noise_controls, ray_realizability, saturate};
use smalltime::scaling::Scaling;
use smalltime::system::SdeSystem;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn corpus_systems() -> Vec<(String, SdeSystem)> {
    let mut out = Vec::new();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    for p in paths {
        let text = std::fs::read_to_string(&p).unwrap();
        if text.contains("\"form\"") {
            continue;
        }
        let name = p.file_stem().unwrap().to_string_lossy().into_owned();
        out.push((name, SdeSystem::from_json(&text).unwrap()));
    }
    out
}

fn domain(name: &str) -> DomainSpec {
    DomainSpec::from_json(&std::fs::read_to_string(corpus_dir().join(name)).unwrap()).unwrap()
}

fn system(name: &str) -> SdeSystem {
    SdeSystem::from_json(&std::fs::read_to_string(corpus_dir().join(name)).unwrap()).unwrap()
}

fn h(a: i64, b: i64) -> Scaling {
    Scaling::half(a, b)
}

fn dim_of(v: &Verdict) -> Option<usize> {
    match v {
        Verdict::NoisePropagating { dim } => Some(*dim),
        Verdict::NoiseDefective { .. } => None,
    }
}

fn scaling_tables() -> Check {
    let start = Instant::now();
    // Langevin with q in R^2, started at rest.
    let lang = models::langevin(&models::quartic_potential(2));
    let r = lil_scalings(&lang);
    ensure(dim_of(&r.verdict) == Some(1), "langevin dim")?;
    ensure(r.scalings == vec![h(3, 1), h(3, 1), h(1, 1), h(1, 1)], format!("langevin {:?}", r.scalings))?;

    // Shifted start with p0 = (1, 0): one position moves at (1, 0), the other keeps (3/2, 1/2).
    let shifted = lang.shift(&[0.3, -0.2, 1.0, 0.0]).unwrap();
    let r = lil_scalings(&shifted);
    ensure(dim_of(&r.verdict) == Some(2), "shifted langevin dim")?;
    ensure(r.scalings[0] == h(2, 0) && r.scalings[1] == h(3, 1), format!("shifted {:?}", r.scalings))?;
    let r = lil_scalings(&lang.shift(&[0.3, -0.2, 0.0, 0.0]).unwrap());
    ensure(dim_of(&r.verdict) == Some(1), "shifted langevin at rest dim")?;

    // Lorenz '96: a_j = a_{j-1} + a_{j-2} + (1, 0), a_n = (3/2, 1/2) + a_{n-1}.
    for n in 4..=8 {
        let r = lil_scalings(&models::lorenz96(n, &[1.0, 1.0]));
        ensure(dim_of(&r.verdict) == Some(n - 2), format!("lorenz n={n} dim"))?;
        let mut want = vec![h(1, 1), h(1, 1)];
        for j in 2..n - 1 {
            let (a, b) = (want[j - 1].finite().unwrap(), want[j - 2].finite().unwrap());
            want.push(h(a.num1 + b.num1 + 2, a.num2 + b.num2));
        }
        let last = want[n - 2].finite().unwrap();
        want.push(h(last.num1 + 3, last.num2 + 1));
        ensure(r.scalings == want, format!("lorenz n={n}: {:?}", r.scalings))?;
    }

    // rDr: P_L^4 = x3 x1^5, P_D^4 = x1 x3^2 + x3 x1^5, b_4 = (11/2, 0).
    let rdr = models::rdr();
    let (l, d) = (lil_scalings(&rdr), dist_scalings(&rdr));
    let x1 = smalltime::poly::Polynomial::var(4, 0);
    let x3 = smalltime::poly::Polynomial::var(4, 2);
    let pl4 = x3.mul(&x1.pow(5));
    let pd4 = x1.mul(&x3.pow(2)).add(&pl4);
    ensure(l.limit_drift.comps()[3] == pl4, format!("P_L^4 = {}", l.limit_drift.comps()[3]))?;
    ensure(d.limit_drift.comps()[3] == pd4, format!("P_D^4 = {}", d.limit_drift.comps()[3]))?;
    ensure(d.scalings[3] == h(11, 0), "b_4")?;

    // Chain: b_j = ((2j - 1)/2, 0).
    for n in 2..=8 {
        let r = dist_scalings(&models::iterated_kolmogorov(n));
        let want: Vec<Scaling> = (1..=n as i64).map(|j| h(2 * j - 1, 0)).collect();
        ensure(r.scalings == want, format!("chain n={n}"))?;
    }

    let r = lil_scalings(&models::npnh());
    ensure(dim_of(&r.verdict) == Some(1), "npnh dim")?;

    let ms = start.elapsed().as_millis();
    ensure(ms < 1000, format!("took {ms} ms"))?;
    Ok("Langevin, shifted Langevin, Lorenz n=4..8, rDr, chain n=2..8, NPNH exact".into())
}

fn invariant_suite() -> Check {
    let mut rng = rng_for(2024, 0);
    let mut count = 0;
    for (name, sys) in corpus_systems() {
        let (l, d) = (lil_scalings(&sys), dist_scalings(&sys));
        if !l.is_propagating() {
            ensure(!d.is_propagating(), format!("{name}: verdicts disagree"))?;
            continue;
        }
        count += 1;
        let layer = l.layer_of();
        let n = sys.dim();
        // Layer monotonicity and the dominance of the limit part.
        for m in 0..n {
            for j in 0..n {
                if layer[m] < layer[j] {
                    ensure(l.scalings[m] < l.scalings[j], format!("{name}: a_{} !< a_{}", m + 1, j + 1))?;
                }
            }
        }
        for j in 0..n {
            if layer[j] == Some(0) {
                continue;
            }
            let p = &sys.drift.comps()[j];
            let pl = &l.limit_drift.comps()[j];
            let rest = p.sub(pl);
            let s_l = smalltime::poly::poly_scaling(pl, &l.scalings);
            let s_r = smalltime::poly::poly_scaling(&rest, &l.scalings);
            ensure(s_l < s_r, format!("{name}: P_L^{} does not dominate", j + 1))?;
        }
        // proj1 b = proj1 a.
        for j in 0..n {
            ensure(l.scalings[j].proj1() == d.scalings[j], format!("{name}: proj1 differs at {}", j + 1))?;
        }
        // Every monomial of P_L appears in P_D with the same coefficient.
        for j in 0..n {
            let pd: Vec<_> = d.limit_drift.comps()[j].terms().collect();
            for m in l.limit_drift.comps()[j].terms() {
                ensure(pd.contains(&m), format!("{name}: P_L^{} not inside P_D", j + 1))?;
            }
        }
        // P_L^j(eps^a y) = eps^{a_j - (1,0)} P_L^j(y).
        let pl = NumField::from_field(&l.limit_drift);
        for eps in [1e-2, 1e-4] {
            let s: Vec<f64> = l.scalings.iter().map(|a| a.eval(eps).unwrap()).collect();
            let one = Scaling::ONE_ZERO.eval(eps).unwrap();
            for _ in 0..20 {
                let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let sy: Vec<f64> = y.iter().zip(&s).map(|(a, b)| a * b).collect();
                let (mut lhs, mut rhs) = (vec![0.0; n], vec![0.0; n]);
                pl.eval_into(&sy, &mut lhs);
                pl.eval_into(&y, &mut rhs);
                for j in 0..n {
                    if layer[j] == Some(0) {
                        continue;
                    }
                    let want = rhs[j] * s[j] / one;
                    let err = (lhs[j] - want).abs() / want.abs().max(1e-300);
                    ensure(want == 0.0 && lhs[j] == 0.0 || err <= 1e-9, format!("{name}: homogeneity {err:e}"))?;
                }
            }
        }
    }
    Ok(format!("{count} propagating corpus systems"))
}

fn gramian_checks() -> Check {
    let prob = ControlProblem::from_system(&models::kolmogorov_pair());
    let zero = PiecewiseLinearControl::zero(2, 1.0);
    let g = gramian(&prob, &zero, 1.0).map_err(|e| e.to_string())?;
    let want = [[1.0, -0.5], [-0.5, 1.0 / 3.0]];
    for i in 0..2 {
        for k in 0..2 {
            ensure((g.gramian[i][k] - want[i][k]).abs() < 1e-6, format!("G[{i}][{k}] = {}", g.gramian[i][k]))?;
        }
    }
    ensure((g.det - 1.0 / 12.0).abs() < 1e-6, format!("det {}", g.det))?;

    let flat = ControlProblem::new(PolyVectorField::zero(3), vec![1.0; 3], vec![0.0; 3]).unwrap();
    for t in [0.5, 1.0, 2.0] {
        let g = gramian(&flat, &PiecewiseLinearControl::zero(3, t), t).map_err(|e| e.to_string())?;
        for i in 0..3 {
            for k in 0..3 {
                let w = if i == k { t } else { 0.0 };
                ensure((g.gramian[i][k] - w).abs() <= 1e-12, format!("Q=0, t={t}: {:?}", g.gramian))?;
            }
        }
    }

    let mut prev = 0.0;
    for i in 1..=10 {
        let t = i as f64 / 10.0;
        let g = gramian(&prob, &PiecewiseLinearControl::zero(2, t), t).map_err(|e| e.to_string())?;
        ensure(g.min_eig >= prev, format!("min_eig decreased at t={t}"))?;
        prev = g.min_eig;
    }
    Ok(format!("det G_1 = {:.9}, Q=0 gives tI, min_eig monotone", g.det))
}

fn bracket_rank() -> Check {
    let ik = models::iterated_kolmogorov(3);
    let r = hormander_rank(&ik.drift, &ik.sigma, &[0.0; 3], 4).map_err(|e| e.to_string())?;
    ensure(r.rank == 3 && r.exact, format!("chain rank {}", r.rank))?;
    let np = models::npnh();
    let mut rng = rng_for(7, 0);
    for _ in 0..10 {
        let x: Vec<f64> = (0..np.dim()).map(|_| rng.random_range(-2.0..2.0)).collect();
        let r = hormander_rank(&np.drift, &np.sigma, &x, 6).map_err(|e| e.to_string())?;
        ensure(r.rank == 2, format!("npnh rank {} at {x:?}", r.rank))?;
    }
    for n in [2, 4, 6] {
        let b = models::brownian(n);
        let r = hormander_rank(&b.drift, &b.sigma, &vec![0.3; n], 1).map_err(|e| e.to_string())?;
        ensure(r.rank == n && r.depth_reached <= 1, format!("elliptic n={n}"))?;
        let l = models::lorenz96(n.max(4), &vec![1.0; n.max(4)]);
        let r = hormander_rank(&l.drift, &l.sigma, &vec![0.1; n.max(4)], 1).map_err(|e| e.to_string())?;
        ensure(r.rank == n.max(4), "elliptic lorenz")?;
    }
    Ok("chain 3, NPNH 2 at 10 points, elliptic n at depth 1".into())
}

fn coeffs(v: &[f64]) -> Vec<Coeff> {
    v.iter().map(|&c| rational_from_f64(c).unwrap()).collect()
}

fn saturation_checks() -> Check {
    for n in 2..=8 {
        let ik = models::iterated_kolmogorov(n);
        let r = saturate(&ik.drift, &noise_controls(&ik.sigma).unwrap(), 2 * n).map_err(|e| e.to_string())?;
        ensure(r.exact_controllable && r.certificate_valid(), format!("chain n={n}"))?;
    }
    for n in 4..=6 {
        let sys = models::lorenz96(n, &[1.0, 1.0]);
        let lim = lil_scalings(&sys).limit_drift;
        let r = saturate(&lim, &noise_controls(&sys.sigma).unwrap(), 2 * n).map_err(|e| e.to_string())?;
        ensure(r.exact_controllable && r.certificate_valid(), format!("lorenz n={n}"))?;
    }
    for a in [1, -2] {
        let q = models::quadratic_example(a, 0);
        let r = saturate(&q.drift, &noise_controls(&q.sigma).unwrap(), 4).map_err(|e| e.to_string())?;
        ensure(!r.exact_controllable, format!("quadratic a={a} exact"))?;
        ensure(r.has_cone(&coeffs(&[-(a as f64), 0.0])), format!("quadratic a={a}: cone(-a e1) missing"))?;
        ensure(!r.has_span(&coeffs(&[1.0, 0.0])), format!("quadratic a={a}: span(e1) present"))?;
    }
    let lambdas = [10.0, 100.0, 1000.0];
    let ik = models::iterated_kolmogorov(3);
    let r = ray_realizability(&ik.drift, &[1.0, 0.0, 0.0], &[0.3, -0.2, 0.5], 0.5, &lambdas).map_err(|e| e.to_string())?;
    ensure(r.stable, format!("chain ray ratio {}", r.ratio))?;
    let l5 = models::lorenz96(5, &[1.0, 1.0]);
    let r2 = ray_realizability(&l5.drift, &[0.0, 1.0, 0.0, 0.0, 0.0], &[0.1, 0.2, -0.1, 0.3, 0.0], 0.5, &lambdas)
        .map_err(|e| e.to_string())?;
    ensure(r2.stable, format!("lorenz ray ratio {}", r2.ratio))?;
    Ok(format!("chain n<=8 and Lorenz n=4..6 certified; quadratic cone only; C ratios {:.2}, {:.2}", r.ratio, r2.ratio))
}

fn distributional_limit() -> Check {
    let start = Instant::now();
    let sys = models::kolmogorov_pair();
    let res = dist_scalings(&sys);
    let q = NumField::from_field(&sys.drift);
    let eps = 1e-2;
    let paths = 100_000;
    let ends = em_terminal_batch(&q, &sys.sigma, &[0.0, 0.0], eps, 1000, paths, 11);
    let ys: Vec<Vec<f64>> = ends.into_iter().flatten().map(|x| scale_map(&x, &res.scalings, eps).unwrap()).collect();
    ensure(ys.len() == paths, "paths died")?;
    let m = ys.len() as f64;
    let mean: Vec<f64> = (0..2).map(|i| ys.iter().map(|y| y[i]).sum::<f64>() / m).collect();
    let want = [[1.0, 0.5], [0.5, 1.0 / 3.0]];
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for k in 0..2 {
            let c = ys.iter().map(|y| (y[i] - mean[i]) * (y[k] - mean[k])).sum::<f64>() / (m - 1.0);
            let se = ((want[i][i] * want[k][k] + want[i][k] * want[i][k]) / m).sqrt();
            let z = (c - want[i][k]).abs() / se;
            worst = worst.max(z);
            ensure(z <= 3.0, format!("cov[{i}][{k}] = {c:.5} is {z:.2} SE off"))?;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, format!("covariance took {secs:.1} s"))?;

    let damped = models::damped_kolmogorov_pair();
    let dres = dist_scalings(&damped);
    let cfg = DistLimitConfig { trials: 200, steps: 500, seed: 5, ..Default::default() };
    let rep = dist_limit_check(&damped, &dres, &[1e-2, 1e-3, 1e-4], &cfg).map_err(|e| e.to_string())?;
    let med: Vec<f64> = rep.rows.iter().map(|r| r.sup_median).collect();
    ensure(med.windows(2).all(|w| w[1] < w[0]), format!("medians {med:?}"))?;

    let sys = models::lorenz96(5, &[1.0, 1.0]);
    let lres = lil_scalings(&sys);
    let prob = ControlProblem::from_limit(&sys, &lres);
    ensure(component_homogeneity(&prob, 3).is_certified(), "lorenz limit not component homogeneous")?;
    let dirs = [[0.2, -0.1, 0.3, -0.2, 0.1], [-0.1, 0.1, -0.2, 0.1, 0.3]];
    for v in dirs {
        let c = direction_certificate(&prob, &v, &SteerConfig::default()).map_err(|e| e.to_string())?;
        ensure(c.valid && c.energy <= 1.0 + 1e-9, format!("direction {v:?}"))?;
    }
    Ok(format!("max |z| {worst:.2} SE in {secs:.1} s; medians {med:?}; 2 Lorenz direction certificates"))
}

fn regular_pipeline() -> Check {
    let cfg = RegularConfig::default();
    let run = |sys: &str, dom: &DomainSpec| check_regular(&system(sys), dom, &cfg).map_err(|e| e.to_string());
    ensure(run("brownian3.json", &domain("bm_cone.json"))?.is_regular(), "brownian cone")?;
    ensure(run("ik_n4.json", &domain("ik_graph.json"))?.is_regular(), "chain graph")?;
    ensure(run("langevin_k1.json", &domain("levelset.json"))?.is_regular(), "langevin p0 != 0")?;
    ensure(run("langevin_k1.json", &domain("levelset_rest.json"))?.is_regular(), "langevin p0 = 0")?;
    let r = run("lorenz96_n5_defective.json", &domain("bm_cone.json"))?;
    ensure(r.verdict == RegularVerdict::Inconclusive { stage: Stage::Propagation }, format!("{:?}", r.verdict))?;
    Ok("cone, chain graph, Langevin both cases regular; defective Lorenz inconclusive(propagation)".into())
}

fn malliavin() -> Check {
    let cfg = MalliavinConfig { trials: 200, seed: 1, ..Default::default() };
    let k = malliavin_mc(&ControlProblem::from_system(&models::kolmogorov_pair()), &cfg).map_err(|e| e.to_string())?;
    ensure(k.invertible_freq == 1.0, format!("kolmogorov freq {}", k.invertible_freq))?;
    ensure(k.gramian_checked == 200 && k.gramian_agree == 200, format!("cross-check {}/{}", k.gramian_agree, k.gramian_checked))?;
    let np = malliavin_mc(&ControlProblem::from_system(&models::npnh()), &cfg).map_err(|e| e.to_string())?;
    ensure(np.invertible_freq == 0.0, format!("npnh freq {}", np.invertible_freq))?;
    Ok(format!("kolmogorov 1.0 ({}/{} cross-checked), NPNH 0.0", k.gramian_agree, k.gramian_checked))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("scaling tables", scaling_tables),
        ("invariant suite", invariant_suite),
        ("gramian", gramian_checks),
        ("bracket rank", bracket_rank),
        ("saturation", saturation_checks),
        ("distributional limit", distributional_limit),
        ("regular-point pipeline", regular_pipeline),
        ("malliavin monte carlo", malliavin),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = f();
        let ms = start.elapsed().as_millis();
        match r {
            Ok(detail) => println!("PASS {} {name} ({ms} ms): {detail}", i + 1),
            Err(e) => {
                println!("FAIL {} {name} ({ms} ms): {e}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
