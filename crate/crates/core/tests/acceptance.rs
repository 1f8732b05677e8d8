//! Acceptance run: one line per criterion with its outcome and timing.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use griffiths_core::adapted_frame::{random_einstein, random_riemann, RiemannTensor};
use griffiths_core::calibration::{
    coclosure_diagnostics, comass_estimate, gwistor_phi, never_closed_check, special_lagrangian_identity,
    CoclosureDiagnostics, ComassOptions,
};
use griffiths_core::exterior::ExteriorForm;
use griffiths_core::griffiths_forms::{alpha_bruteforce, alpha_fast};
use griffiths_core::hypersurface::{
    el_residuals, pullback_alpha, pullback_form, random_symmetric, sigma, weingarten_polynomial, AmbientData,
    ShapeOperator,
};
use griffiths_core::metrics::{
    chart_riemann_fd_checked, einstein_via_alpha2, product_spheres_riemann, BuiltinMetric,
};
use griffiths_core::scalar::{q, sign_pow};
use griffiths_core::space_forms::{riemann_csc, space_form_curvature, undetected_mutations, verify_csc};
use griffiths_core::symmetry::{det_l, det_l_closed, lie_derivative_check, symmetry_solutions};
use griffiths_core::{ExactForm, ExactRiemann, ExactSystem, Rational};
use num_traits::Zero;
use rayon::prelude::*;

type Outcome = Result<String, String>;

/// Name, runner and time limit in seconds.
type Criterion = (&'static str, fn() -> Outcome, Option<u64>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn form(dim: usize, terms: &[&[usize]]) -> ExactForm {
    ExteriorForm::from_terms(dim, terms[0].len(), terms.iter().map(|t| (t.to_vec(), q(1, 1)))).unwrap()
}

fn radius(seed: u64) -> Rational {
    [q(1, 1), q(1, 2), q(3, 1), q(2, 3)][seed as usize % 4].clone()
}

fn criterion_1() -> Outcome {
    for (k, s) in [(q(1, 1), q(1, 1)), (q(-2, 1), q(1, 2)), (q(0, 1), q(3, 1))] {
        let sys = ExactSystem::new(1, s.clone()).map_err(|e| e.to_string())?;
        let r = riemann_csc(&k, 1);
        let (a0, a1, th) = (sys.alpha(0), sys.alpha(1), sys.theta());
        ensure(*sys.dtheta() == a0.wedge(a1), || "dθ ≠ α0∧α1".into())?;
        ensure(sys.d_alpha(&r, 0) == a1.wedge(th).scale(&k), || format!("dα0 at k={k}"))?;
        let inv = q(1, 1) / (s.clone() * s.clone());
        ensure(sys.d_alpha(&r, 1) == th.wedge(a0).scale(&inv), || format!("dα1 at s={s}"))?;
        let rep = verify_csc(&k, &s, 1).map_err(|e| e.to_string())?;
        ensure(rep.all_pass(), || format!("{:?}", rep.failures()))?;
    }
    Ok("3 parameter pairs, zero residual".into())
}

fn criterion_2() -> Outcome {
    let n2 = [form(5, &[&[3, 4]]), form(5, &[&[1, 4], &[3, 2]]), form(5, &[&[1, 2]])];
    let n3 = [
        form(7, &[&[4, 5, 6]]),
        form(7, &[&[1, 5, 6], &[2, 6, 4], &[3, 4, 5]]),
        form(7, &[&[1, 2, 6], &[2, 3, 4], &[3, 1, 5]]),
        form(7, &[&[1, 2, 3]]),
    ];
    for (i, f) in n2.iter().enumerate() {
        ensure(alpha_fast::<Rational>(2, i) == *f, || format!("n=2 α_{i}"))?;
    }
    for (i, f) in n3.iter().enumerate() {
        ensure(alpha_fast::<Rational>(3, i) == *f, || format!("n=3 α_{i}"))?;
    }
    let pairs: Vec<(usize, usize)> = (1..=6).flat_map(|n| (0..=n).map(move |i| (n, i))).collect();
    let bad: Vec<_> = pairs
        .par_iter()
        .filter(|&&(n, i)| alpha_fast::<Rational>(n, i) != alpha_bruteforce::<Rational>(n, i))
        .collect();
    ensure(bad.is_empty(), || format!("fast ≠ brute force at {bad:?}"))?;
    Ok(format!("fixtures n=2,3 term-for-term; {} (n,i) pairs agree", pairs.len()))
}

fn criterion_3() -> Outcome {
    let mut checks = 0;
    for n in 1..=5 {
        for s in [q(1, 1), q(1, 2), q(3, 1)] {
            let sys = ExactSystem::new(n, s).map_err(|e| e.to_string())?;
            let rep = sys.structure_report(&ExactRiemann::zero(n));
            let failing: Vec<_> = rep
                .failures()
                .into_iter()
                .filter(|name| {
                    name.starts_with("star_")
                        || name.starts_with("double_star")
                        || name.starts_with("alpha_")
                        || *name == "contact_volume"
                })
                .collect();
            ensure(failing.is_empty(), || format!("n={n}: {failing:?}"))?;
            checks += rep.get("contact_volume").map_or(0, |_| 1);
        }
    }
    Ok(format!("Hodge and wedge identities exact for n<=5 ({checks} systems)"))
}

fn corpus(n: usize) -> Vec<(u64, ExactRiemann)> {
    (0..200u64).map(|seed| (seed, random_riemann::<Rational>(seed * 31 + n as u64, n))).collect()
}

fn criterion_4() -> Outcome {
    for n in 2..=4 {
        let failures: Vec<String> = corpus(n)
            .par_iter()
            .filter_map(|(seed, r)| {
                if !r.is_valid() {
                    return Some(format!("n={n} seed={seed}: invalid tensor"));
                }
                let s = radius(*seed);
                let sys = ExactSystem::new(n, s.clone()).unwrap();
                let rep = sys.structure_report(r);
                let mut names = vec![
                    "r_alpha_n_vanishes".to_string(),
                    "r_alpha_n_minus_1".into(),
                    "coclosed_alpha_0".into(),
                    "coclosed_alpha_1".into(),
                ];
                names.extend((0..=n).map(|i| format!("dtheta_wedge_r_alpha_{i}")));
                let bad: Vec<_> = names
                    .iter()
                    .filter(|name| !rep.get(name).is_some_and(|c| c.pass))
                    .cloned()
                    .collect();
                (!bad.is_empty()).then(|| format!("n={n} seed={seed}: {bad:?}"))
            })
            .collect();
        ensure(failures.is_empty(), || failures.join("; "))?;
    }
    Ok("600 random tensors, n in {2,3,4}".into())
}

fn criterion_5() -> Outcome {
    for n in 2..=4 {
        let failures: Vec<u64> = corpus(n)
            .par_iter()
            .filter(|(seed, r)| {
                let s = radius(*seed);
                let sys = ExactSystem::new(n, s.clone()).unwrap();
                sys.d_star_alpha(r, 2) != r.rho(&s).wedge(sys.vol())
            })
            .map(|(seed, _)| *seed)
            .collect();
        ensure(failures.is_empty(), || format!("n={n}: d*α2 ≠ ρ∧vol at seeds {failures:?}"))?;
    }
    let one = q(1, 1);
    let u = [q(1, 2), q(1, 2), q(1, 2), q(1, 2)];
    let sphere = riemann_csc(&one, 3);
    let s2s2 = product_spheres_riemann(&one, &one, 2, 2, &u).map_err(|e| e.to_string())?;
    let uneven = product_spheres_riemann(&one, &q(1, 4), 2, 2, &u).map_err(|e| e.to_string())?;
    let einstein = |r: &ExactRiemann| einstein_via_alpha2(r, &one).unwrap();
    ensure(einstein(&sphere), || "S^4 not Einstein".into())?;
    ensure(einstein(&s2s2), || "S^2(1)xS^2(1) not Einstein".into())?;
    ensure(!einstein(&uneven), || "S^2(1)xS^2(2) reported Einstein".into())?;
    let sys = ExactSystem::new(3, one.clone()).unwrap();
    ensure(!sys.d_star_alpha(&uneven, 2).is_zero(), || "zero residual on S^2(1)xS^2(2)".into())?;
    let mixed: Vec<ExactRiemann> = (0..100)
        .map(|s| random_einstein::<Rational>(s, 3))
        .chain((0..100).map(|s| random_riemann::<Rational>(1000 + s, 3)))
        .collect();
    let disagree = mixed
        .par_iter()
        .filter(|r| einstein_via_alpha2(r, &one).unwrap() != r.einstein_residual().is_zero())
        .count();
    ensure(disagree == 0, || format!("{disagree}/200 disagreements"))?;
    Ok("d*α2 = ρ∧vol on 600 tensors; fixtures and 200 mixed tensors agree".into())
}

fn criterion_6() -> Outcome {
    let params: Vec<(usize, Rational, Rational)> = (1..=5)
        .flat_map(|n| {
            [(q(1, 1), q(1, 1)), (q(-2, 1), q(1, 2)), (q(3, 4), q(2, 1)), (q(0, 1), q(5, 3))]
                .into_iter()
                .map(move |(k, s)| (n, k, s))
        })
        .collect();
    let failures: Vec<String> = params
        .par_iter()
        .filter_map(|(n, k, s)| {
            let rep = verify_csc(k, s, *n).unwrap();
            (!rep.all_pass()).then(|| format!("n={n} k={k} s={s}: {:?}", rep.failures()))
        })
        .collect();
    ensure(failures.is_empty(), || failures.join("; "))?;
    // every tensor with n = 1 is a space form, so mutations start at n = 2
    let missed: Vec<String> = (2..=5usize)
        .into_par_iter()
        .filter_map(|n| {
            let m = undetected_mutations(&q(1, 1), &q(1, 2), n, &q(1, 3)).unwrap();
            (!m.is_empty()).then(|| format!("n={n}: {m:?}"))
        })
        .collect();
    ensure(missed.is_empty(), || format!("undetected mutations {}", missed.join("; ")))?;
    Ok(format!("{} (n,k,s) triples exact; every single-slot mutation detected for 2<=n<=5", params.len()))
}

fn criterion_7() -> Outcome {
    for n in 1..=10 {
        for eps in [q(1, 1), q(-1, 1), q(0, 1), q(-9, 4), q(5, 7)] {
            ensure(det_l(n, &eps) == det_l_closed(n, &eps), || format!("det_L n={n} ε={eps}"))?;
        }
    }
    let one = q(1, 1);
    let minus = q(-1, 1);
    let an = symmetry_solutions(3, &minus, &one).map_err(|e| e.to_string())?;
    let cs: Vec<Rational> = an.solutions.iter().map(|s| s.c.clone()).collect();
    ensure(cs == [q(-3, 1), q(-1, 1), q(1, 1), q(3, 1)], || format!("roots {cs:?}"))?;
    for sol in &an.solutions {
        let res = lie_derivative_check(&sol.x, &sol.c, &minus, &one).map_err(|e| e.to_string())?;
        ensure(res.is_zero(), || format!("Lie residual at c={}", sol.c))?;
    }
    let none = symmetry_solutions(1, &one, &one).map_err(|e| e.to_string())?;
    ensure(none.solutions.is_empty(), || "n=1, k=1 has solutions".into())?;
    Ok("det_L closed form for n<=10; c in {±1,±3} with zero residual; n=1,k=1 empty".into())
}

fn criterion_8() -> Outcome {
    let mut count = 0;
    for n in 1..=5 {
        let alphas: Vec<ExactForm> = (0..=n).map(|i| alpha_fast(n, i)).collect();
        let vol_n = ExteriorForm::basis(2 * n + 1, &(1..=n).collect::<Vec<_>>());
        for seed in 0..100 {
            let a = ShapeOperator::new(random_symmetric::<Rational>(seed, n)).map_err(|e| e.to_string())?;
            for (i, alpha) in alphas.iter().enumerate() {
                let pulled = pullback_form(a.matrix(), alpha).map_err(|e| e.to_string())?;
                let expected = vol_n.scale(&(sigma(n - i, a.matrix()) * sign_pow::<Rational>(n - i)));
                ensure(pulled == expected, || format!("n={n} seed={seed} i={i}"))?;
            }
            let poly = weingarten_polynomial(&a);
            let from_alpha: Vec<Rational> = (0..=n).map(|i| pullback_alpha(i, &a)).collect();
            ensure(poly == from_alpha, || format!("Weingarten polynomial n={n} seed={seed}"))?;
            count += 1;
        }
    }
    for seed in 0..100 {
        let a = ShapeOperator::new(random_symmetric::<Rational>(seed, 2)).unwrap();
        for k in [q(1, 1), q(-1, 1), q(0, 1)] {
            let res = el_residuals(&a, &AmbientData::space_form(2, k)).map_err(|e| e.to_string())?;
            ensure(res.scal.is_zero(), || format!("n=2 scalar residual {}", res.scal))?;
        }
    }
    Ok(format!("{count} shape operators; Weingarten identity and n=2 scalar residual hold"))
}

fn criterion_9() -> Outcome {
    let one = q(1, 1);
    let u = [q(1, 2), q(1, 2), q(1, 2), q(1, 2)];
    let fixtures: Vec<ExactRiemann> = vec![
        riemann_csc(&one, 3),
        riemann_csc(&q(-2, 3), 3),
        product_spheres_riemann(&one, &one, 2, 2, &u).unwrap(),
        product_spheres_riemann(&one, &q(1, 4), 2, 2, &u).unwrap(),
        random_einstein(3, 3),
        random_riemann(4, 3),
    ];
    for (idx, r) in fixtures.iter().enumerate() {
        let d = coclosure_diagnostics(r).map_err(|e| e.to_string())?;
        let einstein = r.einstein_residual().is_zero();
        let csc = space_form_curvature(r, 0.0).is_some();
        let truth = CoclosureDiagnostics {
            a0_minus_a2: einstein,
            a1_minus_a3: csc,
            phi: einstein,
        };
        ensure(d == truth, || format!("fixture {idx}: {d:?} vs {truth:?}"))?;
    }
    ensure(special_lagrangian_identity(), || "special-Lagrangian identity".into())?;
    let samples: Vec<ExactRiemann> = (0..100).map(|s| random_riemann(5000 + s, 3)).collect();
    let rep = never_closed_check(&samples).map_err(|e| e.to_string())?;
    ensure(rep.passed(), || format!("closed at samples {:?}", rep.counterexamples))?;
    let est = comass_estimate(&gwistor_phi::<f64>(), ComassOptions::default()).map_err(|e| e.to_string())?;
    ensure((0.95..=1.05).contains(&est.value), || format!("comass {}", est.value))?;
    Ok(format!(
        "{} fixtures; 100 samples never closed; comass(φ) >= {:.6} ({})",
        fixtures.len(),
        est.value,
        if est.converged { "converged" } else { "not converged" }
    ))
}

fn criterion_10() -> Outcome {
    let points = [[0.1, 0.2, -0.3], [-0.25, 0.05, 0.15], [0.3, -0.1, 0.2]];
    let mut worst: f64 = 0.0;
    for metric in [BuiltinMetric::SphereStereographic(3), BuiltinMetric::HyperbolicBall(3)] {
        let expected: RiemannTensor<f64> = riemann_csc(&metric.curvature(), 2);
        for x in &points {
            let fd = chart_riemann_fd_checked(&metric, x, 1e-3).map_err(|e| e.to_string())?;
            let err = fd.tensor.max_abs_diff(&expected);
            worst = worst.max(err);
            ensure(err <= 1e-6, || format!("{metric:?} at {x:?}: error {err:e}"))?;
            ensure(fd.richardson_ok, || format!("{metric:?} at {x:?}: gap {:e}", fd.richardson_gap))?;
        }
    }
    Ok(format!("max error {worst:.2e} over 6 evaluations"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("n=1 system exact", criterion_1, Some(1)),
        ("alpha fixtures and brute force", criterion_2, Some(10)),
        ("Hodge duality suite", criterion_3, Some(30)),
        ("structure equation consequences", criterion_4, Some(120)),
        ("Einstein criterion", criterion_5, None),
        ("space-form criterion and mutations", criterion_6, None),
        ("symmetry determinant and solutions", criterion_7, None),
        ("hypersurface pullbacks", criterion_8, None),
        ("gwistor calibration", criterion_9, Some(60)),
        ("finite-difference curvature", criterion_10, None),
    ];
    let mut all = true;
    for (i, (name, run, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let over = limit.is_some_and(|l| elapsed > Duration::from_secs(l));
        let pass = outcome.is_ok() && !over;
        all &= pass;
        let limit_text = limit.map_or(String::new(), |l| format!(" / {l} s"));
        let detail = match outcome {
            Ok(d) if over => format!("{d}; exceeded time limit"),
            Ok(d) => d,
            Err(e) => e,
        };
        println!(
            "criterion {:>2} [{}] {name}: {:.2} s{limit_text} - {detail}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
