//! Acceptance suite. Runs every criterion at its stated tolerance, prints
//! one PASS/FAIL line per criterion and exits non-zero if any fails.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use legpos_core::quadrature::{coefficients_by_quadrature, gauss_legendre_rule};
use legpos_core::schoenberg::{
    embed_vectors, estimate_alpha0, gram_matrix, harmonic_count, harmonic_count_at_degree, kernel_matrix,
    min_eigenvalue, n_schedule, sample_unit_vectors, stream_rng, EigenConfig, SampleStats, SchoenbergProblem,
    TestOptions,
};
use legpos_core::search::{landscape, BisectionConfig, GammaRule};
use legpos_core::{
    apply_linear_factor, evaluate, expand_amplitude, gegenbauer_limit_check, AmplitudeSpec, BasisSpec,
    CoefficientVector, Precision, Scalar, ScalarMode,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Float, Rational};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let num: i64 = rng.random_range(-1000..=1000);
    let den: i64 = rng.random_range(1..=997);
    Rational::from((num, den))
}

fn two_factor_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let basis = BasisSpec::legendre();
    let one = Rational::from(1);
    for trial in 0..100 {
        let x1 = random_rational(&mut rng);
        let x2 = random_rational(&mut rng);
        let start = CoefficientVector::<Rational>::unit(basis, 0, ());
        let first = apply_linear_factor(&start, &one, &Rational::from(-&x1));
        let product = apply_linear_factor(&first, &one, &Rational::from(-&x2));
        let expected = [
            Rational::from(&x1 * &x2) + Rational::from((1, 3)),
            -Rational::from(&x1 + &x2),
            Rational::from((2, 3)),
        ];
        ensure(product.coeffs() == expected, || {
            format!("trial {trial}: x1={x1}, x2={x2} gave {:?}", product.coeffs())
        })?;
    }
    Ok("100 random rational pairs exact".into())
}

fn dual_path_oracle() -> Check {
    let ctx = Precision::from_digits(50);
    let basis = BasisSpec::legendre();
    let tol = Float::with_val(ctx.bits(), 1e-30);
    let mut worst = Float::with_val(ctx.bits(), 0);
    for m in 0..=20u32 {
        for tenth in 1..=9 {
            let alpha = Rational::from((tenth, 10));
            let spec = AmplitudeSpec::new(m, alpha, 2.0, 3.0).map_err(|e| e.to_string())?;
            let rec = expand_amplitude::<Float>(&spec, basis, ctx).map_err(|e| e.to_string())?;
            let degree = m as usize + 1;
            let quad = coefficients_by_quadrature(
                |x: &Float| evaluate(&spec, x).expect("valid spec"),
                degree + 1,
                degree,
                basis,
                Some(degree),
                ctx,
            )
            .map_err(|e| e.to_string())?;
            for (n, (a, b)) in rec
                .coefficients
                .coeffs()
                .iter()
                .zip(quad.coefficients.coeffs())
                .enumerate()
            {
                let diff = (a.clone() - b).abs();
                ensure(diff < tol, || format!("M={m}, alpha=0.{tenth}, n={n}: |diff| = {diff}"))?;
                if diff > worst {
                    worst = diff;
                }
            }
        }
    }
    Ok(format!("189 (M, alpha) pairs, max |diff| = {:.3e}", worst.to_f64()))
}

fn golub_welsch_identity() -> Check {
    let mut worst_node = 0f64;
    let mut worst_moment = 0f64;
    for n in 1..=50usize {
        let rule = gauss_legendre_rule::<f64>(n, ()).map_err(|e| e.to_string())?;
        let roots = common::legendre_roots(n);
        ensure(roots.len() == n, || {
            format!("oracle found {} roots of P_{n}", roots.len())
        })?;
        for (x, r) in rule.nodes.iter().zip(&roots) {
            let err = (x - r).abs();
            worst_node = worst_node.max(err);
            ensure(err <= 1e-12, || format!("N={n}: node {x} vs root {r}"))?;
        }
        for k in 0..2 * n {
            let got = rule.integrate(|x| x.powi(k as i32));
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            let err = (got - exact).abs();
            worst_moment = worst_moment.max(err);
            ensure(err <= 1e-12, || {
                format!("N={n}: moment x^{k} = {got}, expected {exact}")
            })?;
        }
    }
    Ok(format!(
        "N <= 50, max node error {worst_node:.1e}, max moment error {worst_moment:.1e}"
    ))
}

fn planted(d: u32, a0: f64) -> SchoenbergProblem {
    SchoenbergProblem::planted(d, 2, 8, a0, 1e-6).expect("valid planted problem")
}

fn options(n: usize) -> TestOptions {
    TestOptions {
        tol_eig: 1e-10 * n as f64,
        eigen: EigenConfig::default(),
    }
}

fn schoenberg_recovery() -> Check {
    let mut parts = Vec::new();
    for (d, a0) in [(2u32, 0.25), (3, 0.5), (4, 0.5)] {
        let n = (2 * harmonic_count(2, d as u64)) as usize;
        if d == 2 {
            ensure(n == 18, || format!("2(l_min+1)^2 should be 18, got {n}"))?;
        }
        let stats = estimate_alpha0(&planted(d, a0), n, 50, 2024, &options(n)).map_err(|e| e.to_string())?;
        let rel = (stats.mean_alpha - a0).abs() / a0;
        ensure(rel <= 0.05, || {
            format!("d={d}, n={n}: mean {} vs a0 {a0}", stats.mean_alpha)
        })?;
        parts.push(format!("d={d} n={n} rel.err {rel:.1e}"));
    }
    Ok(parts.join(", "))
}

fn overestimation_trend() -> Check {
    let mut parts = Vec::new();
    for (d, a0) in [(2u32, 0.25), (3, 0.5)] {
        let problem = planted(d, a0);
        let rows: Vec<SampleStats> = n_schedule(2, d as u64)
            .into_iter()
            .map(|n| estimate_alpha0(&problem, n, 50, 77, &options(n)))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for w in rows.windows(2) {
            let pooled = (w[0].standard_error().powi(2) + w[1].standard_error().powi(2)).sqrt();
            ensure(w[1].mean_alpha <= w[0].mean_alpha + pooled, || {
                format!(
                    "d={d}: mean rises from {} (n={}) to {} (n={})",
                    w[0].mean_alpha, w[0].n, w[1].mean_alpha, w[1].n
                )
            })?;
        }
        let first = rows.first().expect("nonempty schedule");
        let last = rows.last().expect("nonempty schedule");
        ensure(first.mean_alpha > last.mean_alpha, || {
            format!("d={d}: no overestimation at n=1")
        })?;
        parts.push(format!(
            "d={d}: {} sizes, {:.4} at n=1 down to {:.4} at n={}",
            rows.len(),
            first.mean_alpha,
            last.mean_alpha,
            last.n
        ));
    }
    Ok(parts.join("; "))
}

fn harmonic_identities() -> Check {
    for d in 2..=5u64 {
        let mut running = 0u128;
        for l in 0..=10u64 {
            running += harmonic_count_at_degree(l, d);
            let closed = common::harmonic_closed_form(l, d);
            ensure(running == closed, || {
                format!("d={d}, l={l}: sum {running} vs closed form {closed}")
            })?;
            ensure(harmonic_count(l, d) == closed, || format!("H({l},{d}) mismatch"))?;
        }
    }
    Ok("l <= 10, d in 2..=5 exact".into())
}

fn dimension_monotonicity() -> Check {
    // (a) zero padding leaves Gram and kernel matrices bit-identical.
    let problem3 = SchoenbergProblem::planted(3, 2, 6, 0.5, 1e-6).map_err(|e| e.to_string())?;
    for seed in 0..20u64 {
        let mut rng = stream_rng(seed, 30, 0);
        let v = sample_unit_vectors(30, 3, &mut rng);
        let z = gram_matrix(&v);
        for ambient in [4, 5, 8] {
            let z_up = gram_matrix(&embed_vectors(&v, ambient));
            ensure(z == z_up, || {
                format!("seed {seed}: Gram matrix changed under padding to R^{ambient}")
            })?;
            let f = kernel_matrix(&problem3, 0.7, &z);
            let f_up = kernel_matrix(&problem3, 0.7, &z_up);
            ensure(f == f_up, || {
                format!("seed {seed}: kernel matrix changed under padding")
            })?;
        }
    }
    // (b) computed thresholds grow with the dimension.
    let config = BisectionConfig::default();
    let mode = ScalarMode::default();
    let (b2, b3) = (BasisSpec::new(2).expect("d=2"), BasisSpec::new(3).expect("d=3"));
    let mut min_gap = f64::INFINITY;
    for beta in [1.0, 2.0, 3.0] {
        let grid2 = landscape(
            &(0..=20).collect::<Vec<_>>(),
            &[beta],
            GammaRule::default(),
            b2,
            &config,
            mode,
        )
        .map_err(|e| e.to_string())?;
        let grid3 = landscape(
            &(0..=20).collect::<Vec<_>>(),
            &[beta],
            GammaRule::default(),
            b3,
            &config,
            mode,
        )
        .map_err(|e| e.to_string())?;
        for (c2, c3) in grid2.cells.iter().zip(&grid3.cells) {
            let (Some(a2), Some(a3)) = (c2.alpha_crit, c3.alpha_crit) else {
                return Err(format!(
                    "M={}, beta={beta}: cell failed ({:?}, {:?})",
                    c2.m, c2.status, c3.status
                ));
            };
            min_gap = min_gap.min(a3 - a2);
            ensure(a3 >= a2 - 2.0 * config.epsilon, || {
                format!("M={}, beta={beta}: d=3 gives {a3} < d=2 {a2}", c2.m)
            })?;
        }
    }
    Ok(format!(
        "padding bit-identical; 63 cells, min(a_d3 - a_d2) = {min_gap:.3e}"
    ))
}

fn landscape_stabilization() -> Check {
    let basis = BasisSpec::legendre();
    let config = BisectionConfig::with_epsilon(1e-6);
    let ms: Vec<u32> = (100..=150).collect();
    let result = landscape(
        &ms,
        &[2.0],
        GammaRule::Fixed(3.0),
        basis,
        &config,
        ScalarMode::default(),
    )
    .map_err(|e| e.to_string())?;
    if let Some(bad) = result.cells.iter().find(|c| c.alpha_crit.is_none()) {
        return Err(format!("M={} failed: {:?}", bad.m, bad.status));
    }
    let narrow = result.running_max(2.0, 100, 125).expect("cells present");
    let wide = result.running_max(2.0, 100, 150).expect("cells present");
    let rel = (wide - narrow).abs() / narrow;
    ensure(rel < 1e-3, || {
        format!("running max {narrow} -> {wide} (relative change {rel})")
    })?;
    Ok(format!(
        "max over [100,125] = {narrow:.6}, over [100,150] = {wide:.6}, relative change {rel:.1e}"
    ))
}

fn gegenbauer_limit() -> Check {
    let ctx = Precision::from_digits(40);
    let mut worst_at_top = 0f64;
    for n in 0..=4usize {
        for z in ["0.25", "0.5", "1"] {
            let zf = Float::from_rational(&legpos_core::parse_rational(z).expect("literal"), ctx);
            let limit = zf.clone().pow_i(n) / Float::with_val(ctx.bits(), common::factorial(n));
            let mut prev = f64::INFINITY;
            for d in [10u32, 100, 1000, 10_000] {
                let value = gegenbauer_limit_check(n, &zf, d).map_err(|e| e.to_string())?;
                let err = (value - &limit).abs().to_f64();
                ensure(err <= prev || err == 0.0, || {
                    format!("n={n}, z={z}: error grows at d={d}")
                })?;
                prev = err;
                if d == 10_000 {
                    worst_at_top = worst_at_top.max(err);
                    ensure(err <= 1e-2, || format!("n={n}, z={z}: error {err} at d=10^4"))?;
                }
            }
        }
    }
    Ok(format!("max error at d=10^4 is {worst_at_top:.2e}, decreasing in d"))
}

trait PowI {
    fn pow_i(self, n: usize) -> Self;
}

impl PowI for Float {
    fn pow_i(self, n: usize) -> Self {
        let mut out = Float::with_val(self.prec(), 1);
        for _ in 0..n {
            out *= &self;
        }
        out
    }
}

fn theorem_forward_direction() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let cfg = EigenConfig::default();
    let mut worst = f64::INFINITY;
    for trial in 0..100 {
        let d: u32 = rng.random_range(2..=4);
        let n: usize = rng.random_range(1..=100);
        let nmax: usize = rng.random_range(0..=12);
        let cf: Vec<f64> = (0..=nmax).map(|_| rng.random::<f64>() * 2.0).collect();
        let problem = SchoenbergProblem::new(d, cf, [], 1.0, 1e-6).map_err(|e| e.to_string())?;
        let v = sample_unit_vectors(n, d as usize + 1, &mut rng);
        let f = kernel_matrix(&problem, 0.0, &gram_matrix(&v));
        let ev = min_eigenvalue(&f, &cfg).value;
        worst = worst.min(ev / n as f64);
        ensure(ev >= -1e-10 * n as f64, || {
            format!("trial {trial}: d={d}, n={n}, min eigenvalue {ev}")
        })?;
    }
    Ok(format!("100 random sets, min(lambda_min / n) = {worst:.2e}"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("two-factor identity", two_factor_identity),
        ("dual-path oracle", dual_path_oracle),
        ("Golub-Welsch identity", golub_welsch_identity),
        ("Schoenberg recovery", schoenberg_recovery),
        ("overestimation trend", overestimation_trend),
        ("harmonic-count identities", harmonic_identities),
        ("dimension monotonicity", dimension_monotonicity),
        ("landscape stabilization", landscape_stabilization),
        ("Gegenbauer large-d limit", gegenbauer_limit),
        ("theorem forward direction", theorem_forward_direction),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = fmt_duration(start.elapsed());
        match outcome {
            Ok(detail) => println!("PASS  {id:>2}. {name}: {detail} [{elapsed}]"),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {id:>2}. {name}: {detail} [{elapsed}]");
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn fmt_duration(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}
