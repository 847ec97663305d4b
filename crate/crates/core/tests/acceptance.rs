//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use bayes_series::analysis::{run_convergence, run_limits, ConvergenceSetup};
use bayes_series::bernoulli::{bernoulli_exact, bernoulli_f64, series_terms, BernoulliSeries, TermMode};
use bayes_series::catalog::{check_monotonicity, Params, SeriesId, SeriesSpec};
use bayes_series::limits::{
    BaseMeasure, LimitConfig, LimitMode, LimitPointState, LimitVerdict, RhoPolicy, ThumbRule,
};
use bayes_series::mobius::MobiusTable;
use bayes_series::par::Execution;
use bayes_series::posterior::{PosteriorState, VerdictLabel};
use bayes_series::summation::{chunked_parallel_sum, BlockPlan};
use num_rational::BigRational;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

fn c1_posterior_closed_form() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let k = rng.gen_range(1..=1000usize);
        let bias: f64 = rng.gen_range(0.0..1.0);
        let ys: Vec<bool> = (0..k).map(|_| rng.gen_bool(bias)).collect();
        let mut st = PosteriorState::recursive();
        for &y in &ys {
            let s = if y { 0.0 } else { 1.0 };
            st.update(s, 0.5).unwrap();
        }
        let h: f64 = (1..=k).map(|j| 1.0 / (j as f64 * j as f64)).sum();
        let sy = ys.iter().filter(|&&y| y).count() as f64;
        let kf = k as f64;
        let mean = (h + sy) / (kf + 2.0 * h);
        let (a, b) = (h + sy, kf + h - sy);
        let var = a * b / ((a + b).powi(2) * (a + b + 1.0));
        worst = worst
            .max(rel(st.mean().unwrap(), mean))
            .max(rel(st.variance().unwrap(), var));
    }
    outcome(worst <= 1e-14, format!("max relative deviation {worst:.2e}"))
}

fn c2_example1() -> Outcome {
    let setup = ConvergenceSetup::new(SeriesSpec::with_defaults(SeriesId::Example1), 10_000, 1000);
    let run = run_convergence(&setup, None).unwrap();
    let v = run.verdict;
    outcome(
        v.label == VerdictLabel::Divergent && v.final_mean <= 0.01,
        format!("label {} final mean {:.4e}", v.label, v.final_mean),
    )
}

fn example2_final(a: f64) -> (VerdictLabel, f64) {
    let spec = SeriesSpec::new(SeriesId::Example2, Params::new(a, 0.0)).unwrap();
    let setup = ConvergenceSetup::new(spec, 10_000, 1000);
    let reference = setup.reference(None).unwrap().unwrap();
    let run = run_convergence(&setup, Some(&reference)).unwrap();
    (run.verdict.label, run.verdict.final_mean)
}

fn c3_example2() -> Outcome {
    let (l_conv, m_conv) = example2_final(1.0 + 1e-10);
    let (l_div, m_div) = example2_final(1.0);
    outcome(
        m_conv >= 0.99 && m_div <= 0.1,
        format!("a=1+1e-10: {l_conv} mean {m_conv:.4}; a=1: {l_div} mean {m_div:.4e}"),
    )
}

fn lemma_suite(id: SeriesId, n: u64, lo: f64, hi: f64, seed: u64) -> (usize, usize) {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut held = 0;
    let draw = |rng: &mut StdRng| loop {
        let x = rng.gen_range(lo..=hi);
        let y = rng.gen_range(lo..=hi);
        if (x - y).abs() >= 1e-3 {
            break (x.min(y), x.max(y));
        }
    };
    for t in 0..100 {
        let (a_lo, a_hi) = draw(&mut rng);
        let (b_lo, b_hi) = draw(&mut rng);
        let b_fixed = rng.gen_range(lo..=hi);
        let a_fixed = rng.gen_range(lo..=hi);
        // Rotate through: a alone, b alone, both moved in the dominating direction.
        let (first, second) = match t % 3 {
            0 => (Params::new(a_lo, b_fixed), Params::new(a_hi, b_fixed)),
            1 => (Params::new(a_fixed, b_hi), Params::new(a_fixed, b_lo)),
            _ => (Params::new(a_lo, b_hi), Params::new(a_hi, b_lo)),
        };
        // In every case `first` should give the strictly larger block sum.
        let (x, y) = check_monotonicity(id, 1, n, first, second).unwrap();
        if x > y {
            held += 1;
        }
    }
    (held, 100)
}

fn c4_lemmas() -> Outcome {
    let (h4, t4) = lemma_suite(SeriesId::Example4, 100, 0.0, 3.0, 4);
    let (h5, t5) = lemma_suite(SeriesId::Example5, 104, 0.01, 1.5, 5);
    outcome(
        h4 == t4 && h5 == t5,
        format!("example4 {h4}/{t4}, example5 {h5}/{t5} strict orderings"),
    )
}

fn mu_oracle(mut n: u64) -> i8 {
    let mut mu = 1i8;
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            mu = -mu;
        }
        p += 1;
    }
    if n > 1 {
        mu = -mu;
    }
    mu
}

fn c5_mobius() -> Outcome {
    let n = 10_000_000u64;
    let small = MobiusTable::build(n, 1000).unwrap();
    let large = MobiusTable::build(n, 1_000_000).unwrap();
    let same = small == large;
    let mut mismatches = 0u64;
    for i in 1..=100_000u64 {
        if small.mu(i).unwrap() != mu_oracle(i) {
            mismatches += 1;
        }
    }
    let mut rng = StdRng::seed_from_u64(5);
    for _ in 0..10_000 {
        let i = rng.gen_range(1..=n);
        if small.mu(i).unwrap() != mu_oracle(i) {
            mismatches += 1;
        }
    }
    let m10 = small.mertens(10).unwrap();
    let m1e4 = small.mertens(10_000).unwrap();
    let oracle_1e4: i64 = (1..=10_000u64).map(|i| mu_oracle(i) as i64).sum();
    outcome(
        same && mismatches == 0 && m10 == -1 && m1e4 == oracle_1e4,
        format!(
            "mismatches {mismatches}, segment independence {same}, M(10)={m10}, M(1e4)={m1e4} (oracle {oracle_1e4})"
        ),
    )
}

fn c6_riemann() -> Outcome {
    let table = Arc::new(MobiusTable::build(2_000_000, 1 << 16).unwrap());
    let run_at = |a: f64| {
        let spec = SeriesSpec::new(SeriesId::MobiusDirichlet, Params::new(a, 0.0))
            .unwrap()
            .with_mobius(table.clone());
        let setup = ConvergenceSetup::new(spec, 10_000, 200);
        let reference = setup.reference(None).unwrap().unwrap();
        run_convergence(&setup, Some(&reference)).unwrap().verdict
    };
    let low = run_at(0.3);
    let high = run_at(2.0);
    outcome(
        low.label == VerdictLabel::Divergent
            && low.final_mean <= 0.1
            && high.label == VerdictLabel::Convergent
            && high.final_mean >= 0.9,
        format!(
            "a=0.3: {} mean {:.4}; a=2: {} mean {:.4}",
            low.label, low.final_mean, high.label, high.final_mean
        ),
    )
}

fn c7_alternating() -> Outcome {
    let cfg = LimitConfig {
        bins: 10,
        mode: LimitMode::DirichletProcess,
        base: BaseMeasure::Uniform,
        rho: 2.0,
    };
    let run = run_limits(
        &SeriesSpec::with_defaults(SeriesId::AlternatingUnit),
        cfg,
        100_000,
        &ThumbRule::default(),
        false,
    )
    .unwrap();
    let means = run.state.posterior_means().unwrap();
    let big: Vec<(usize, f64)> = means
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.01)
        .map(|(i, &p)| (i + 1, p))
        .collect();
    let pass = big.len() == 2 && big.iter().all(|&(_, p)| (0.48..=0.52).contains(&p));
    outcome(pass, format!("bins above 0.01: {big:?}; report {}", run.report.verdict))
}

fn c8_thumb_rule() -> Outcome {
    let run_at = |a: f64, b: f64| {
        let theta = Params::new(a, b);
        let rho = RhoPolicy::AMinusB { epsilon: 1e-10 }.rho(&theta).unwrap();
        let cfg = LimitConfig {
            bins: 10,
            mode: LimitMode::DirichletProcess,
            base: BaseMeasure::Uniform,
            rho,
        };
        let spec = SeriesSpec::new(SeriesId::Example5, theta).unwrap();
        run_limits(&spec, cfg, 10_000, &ThumbRule::default(), false).unwrap().report
    };
    let conv = run_at(2.0, 1.0);
    let div = run_at(0.5, 0.5);
    let conv_ok = conv.verdict == LimitVerdict::ConvergedSinglePoint
        && conv.bins.len() == 1
        && (conv.bins[0] as f64 / 10.0) > 0.1
        && (conv.bins[0] as f64 / 10.0) <= 0.9;
    let div_ok = div.verdict == LimitVerdict::DivergesToPlusInf && div.bins == vec![10];
    outcome(
        conv_ok && div_ok,
        format!(
            "(2,1): {} bins {:?}; (1/2,1/2): {} bins {:?}",
            conv.verdict, conv.bins, div.verdict, div.bins
        ),
    )
}

fn c9_dirichlet_formulas() -> Outcome {
    let mut rng = StdRng::seed_from_u64(9);
    let mut worst = 0.0f64;
    let mut worst_norm = 0.0f64;
    for t in 0..1000 {
        let bins = rng.gen_range(2..=20usize);
        let mode = if t % 2 == 0 {
            LimitMode::DirichletFinite
        } else {
            LimitMode::DirichletProcess
        };
        let base = if t % 4 < 2 {
            BaseMeasure::Geometric
        } else {
            BaseMeasure::Uniform
        };
        let mut st = LimitPointState::new(LimitConfig {
            bins,
            mode,
            base,
            rho: 2.0,
        })
        .unwrap();
        let k = rng.gen_range(1..=500u64);
        for _ in 0..k {
            st.record(rng.gen_range(1..=bins)).unwrap();
        }
        let s: f64 = (1..=k).map(|j| 1.0 / (j as f64 * j as f64)).sum();
        let kf = k as f64;
        let mut total = 0.0;
        for m in 1..=bins {
            let n = st.counts()[m - 1] as f64;
            let (a, t_) = match mode {
                LimitMode::DirichletFinite => (s + n, bins as f64 * s + kf),
                LimitMode::DirichletProcess => {
                    let g = match base {
                        BaseMeasure::Geometric => 2f64.powi(-(m as i32)),
                        BaseMeasure::Uniform => 1.0 / bins as f64,
                    };
                    (g * s + n, s + kf)
                }
            };
            let mean = a / t_;
            let var = a * (t_ - a) / (t_ * t_ * (t_ + 1.0));
            let (gm, gv) = st.posterior_mean_var(m).unwrap();
            worst = worst.max(rel(gm, mean)).max(rel(gv, var));
            total += gm;
        }
        if mode == LimitMode::DirichletFinite {
            worst_norm = worst_norm.max((total - 1.0).abs());
        }
    }
    outcome(
        worst <= 1e-14 && worst_norm <= 1e-14,
        format!("max relative deviation {worst:.2e}, finite-mode |sum-1| {worst_norm:.2e}"),
    )
}

/// zeta(s) for s >= 2 by direct summation plus an Euler-Maclaurin tail.
fn zeta(s: f64) -> f64 {
    let n = 1000u64;
    let direct: f64 = (1..n).rev().map(|i| (i as f64).powf(-s)).sum();
    let nf = n as f64;
    let b2 = 1.0 / 6.0;
    let b4 = -1.0 / 30.0;
    let b6 = 1.0 / 42.0;
    let tail = nf.powf(1.0 - s) / (s - 1.0)
        + 0.5 * nf.powf(-s)
        + b2 / 2.0 * s * nf.powf(-s - 1.0)
        + b4 / 24.0 * s * (s + 1.0) * (s + 2.0) * nf.powf(-s - 3.0)
        + b6 / 720.0 * s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * nf.powf(-s - 5.0);
    direct + tail
}

fn c10_bernoulli() -> Outcome {
    let exact_small = bernoulli_exact(2) == BigRational::new(1.into(), 6.into())
        && bernoulli_exact(4) == BigRational::new((-1).into(), 30.into());
    let mut worst = 0.0f64;
    for m in 1..=20u32 {
        let n = 2 * m;
        let factorial: f64 = (1..=n).map(|i| i as f64).product();
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        let via_zeta = sign * 2.0 * factorial / (2.0 * PI).powi(n as i32) * zeta(n as f64);
        worst = worst.max(rel(bernoulli_f64(n as usize).unwrap(), via_zeta));
    }
    let mut increasing = true;
    let mut notes = Vec::new();
    for series in [BernoulliSeries::S1, BernoulliSeries::S2] {
        let rows = series_terms(series, 60, TermMode::Stirling);
        let mut prev: Option<f64> = None;
        let mut first_break = None;
        for (m, row) in rows.iter().enumerate().skip(2) {
            let m = m as u64 + 1;
            match row {
                Ok(r) => {
                    if let Some(p) = prev {
                        if r.log_abs_term <= p && first_break.is_none() {
                            first_break = Some(format!("m={m} ({:.3} <= {:.3})", r.log_abs_term, p));
                        }
                    }
                    prev = Some(r.log_abs_term);
                }
                Err(e) => {
                    if first_break.is_none() {
                        first_break = Some(format!("m={m}: {e}"));
                    }
                    prev = None;
                }
            }
        }
        if let Some(b) = first_break {
            increasing = false;
            notes.push(format!("{series} not increasing at {b}"));
        }
    }
    outcome(
        exact_small && worst <= 1e-10 && increasing,
        format!(
            "B2/B4 exact {exact_small}; zeta relation max rel {worst:.2e} (n<=40); {}",
            if notes.is_empty() {
                "log|a_m| increasing for 3<=m<=60".to_string()
            } else {
                notes.join("; ")
            }
        ),
    )
}

fn c11_determinism() -> Outcome {
    let spec = SeriesSpec::with_defaults(SeriesId::Example1);
    let plan = BlockPlan::new(2, 1_000_000, 1).unwrap();
    let sums: Vec<f64> = [1usize, 4, 16]
        .iter()
        .map(|&w| chunked_parallel_sum(&spec, &plan, 1 << 16, Execution::with_workers(w)).unwrap())
        .collect();
    let identical = sums.iter().all(|s| s.to_bits() == sums[0].to_bits());
    // sum_{i=2}^{1000001} 1/ln i to 30 digits.
    let oracle = 78_627.414_494_734_1;
    let err = rel(sums[0], oracle);
    outcome(
        identical && err <= 1e-12,
        format!("bit-identical across 1/4/16 workers {identical}; relative error {err:.2e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("recursive posterior equals closed form", c1_posterior_closed_form),
        ("example1 scaled run is divergent", c2_example1),
        ("example2 scaled runs at a=1+1e-10 and a=1", c3_example2),
        ("block-sum parameter orderings (example4, example5)", c4_lemmas),
        ("Mobius sieve against trial factorization", c5_mobius),
        ("Riemann series scaled, a=0.3 and a=2", c6_riemann),
        ("alternating series has two limit points", c7_alternating),
        ("thumb rule on example5", c8_thumb_rule),
        ("Dirichlet and DP posterior formulas", c9_dirichlet_formulas),
        ("Bernoulli numbers and term growth", c10_bernoulli),
        ("chunked summation determinism and accuracy", c11_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = f();
        let secs = t.elapsed().as_secs_f64();
        println!(
            "{} [{:>2}] {name}: {} ({secs:.2}s)",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
