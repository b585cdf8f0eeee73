//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits non-zero if any failed.

use std::process::{Command, ExitCode};
use std::time::Instant;

use adaptive_levin::reference::{integrand_for, params, IntegralId};
use adaptive_levin::AdaptiveConfig;
use clap::Parser;
use levin_cli::compare::summarize;
use levin_cli::{Cli, Command as Sub};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn levin_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_levin"))
}

fn check(cond: bool, what: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what)
    }
}

fn closed_form_sweeps() -> Outcome {
    let cfg = AdaptiveConfig::default();
    let mut notes = Vec::new();
    for id in [IntegralId::I1, IntegralId::I4] {
        let (mut worst, mut slowest) = (0.0f64, 0.0f64);
        let start = Instant::now();
        for i in 0..200 {
            let lambda = 10f64.powf(1.0 + 6.0 * i as f64 / 199.0);
            let p = integrand_for(id, &params(&[("lambda", lambda)])).map_err(|e| e.to_string())?;
            let t = Instant::now();
            let r = p.integrate(&cfg).map_err(|e| e.to_string())?;
            slowest = slowest.max(t.elapsed().as_secs_f64());
            check(r.status.is_converged(), format!("{id} lambda={lambda}: {}", r.status))?;
            worst = worst.max((r.value - p.closed_form().unwrap()).norm());
        }
        let total = start.elapsed().as_secs_f64();
        check(worst <= 1e-10, format!("{id}: max error {worst:.3e} > 1e-10"))?;
        check(slowest <= 0.05, format!("{id}: slowest integral {slowest:.4}s > 50 ms"))?;
        check(total <= 30.0, format!("{id}: sweep took {total:.2}s > 30 s"))?;
        notes.push(format!(
            "{id} max err {worst:.2e}, slowest {:.2} ms, sweep {total:.2}s",
            slowest * 1e3
        ));
    }
    Ok(notes.join("; "))
}

fn levin_vs_gauss() -> Outcome {
    let mut notes = Vec::new();
    for id in ["I5", "I6", "I7", "I8"] {
        let cli = Cli::try_parse_from([
            "levin",
            "compare",
            "--paper-integral",
            id,
            "--ranges",
            "1e0:1e1,1e1:1e2,1e2:1e3,1e3:1e4",
            "--samples",
            "20",
            "--oracle-tol",
            "1e-15",
            "--seed",
            "1",
            "--repeats",
            "3",
        ])
        .map_err(|e| e.to_string())?;
        let Sub::Compare(args) = cli.command else {
            unreachable!()
        };
        let rows = summarize(&args).map_err(|e| e.to_string())?;
        let mut worst = 0.0f64;
        for r in &rows {
            let d = r.max_abs_difference.ok_or("oracle skipped")?;
            worst = worst.max(d);
            check(
                d <= 5e-11,
                format!("{id} {}..{}: max difference {d:.3e} > 5e-11", r.lo, r.hi),
            )?;
            if r.lo >= 1e3 {
                let ratio = r.ratio().unwrap();
                check(
                    ratio > 1.0,
                    format!("{id} {}..{}: gauss/levin ratio {ratio:.2} <= 1", r.lo, r.hi),
                )?;
                notes.push(format!("{id} ratio@1e3 {ratio:.1}"));
            }
        }
        notes.push(format!("{id} max diff {worst:.2e}"));
    }
    Ok(notes.join("; "))
}

fn low_frequency() -> Outcome {
    let mut worst = 0.0f64;
    for lambda in [1e-8, 1e-4, 1e-2, 1.0] {
        let p = integrand_for(IntegralId::I6, &params(&[("lambda", lambda)])).map_err(|e| e.to_string())?;
        let v = p
            .integrate(&AdaptiveConfig::default())
            .map_err(|e| e.to_string())?
            .value;
        let o = p.oracle(1e-15).map_err(|e| e.to_string())?.value;
        let d = (v - o).norm();
        check(d <= 1e-11, format!("lambda={lambda}: {d:.3e} > 1e-11"))?;
        worst = worst.max(d);
    }
    Ok(format!("max difference {worst:.2e}"))
}

fn stationary_points() -> Outcome {
    let strict = AdaptiveConfig::default();
    let loose = AdaptiveConfig::default().with_eps(1e-7);
    let i9 = |lambda: f64, m: f64| integrand_for(IntegralId::I9, &params(&[("lambda", lambda), ("m", m)]));
    let mut worst = 0.0f64;
    let mut worst_spread = 0.0f64;
    for m in 2..=9 {
        let m = m as f64;
        for lambda in [1e2, 1e3, 1e4] {
            let p = i9(lambda, m).map_err(|e| e.to_string())?;
            let v = p.integrate(&strict).map_err(|e| e.to_string())?.value;
            let o = p.oracle(1e-15).map_err(|e| e.to_string())?.value;
            let d = (v - o).norm();
            check(d <= 1e-10, format!("(a) m={m} lambda={lambda}: {d:.3e} > 1e-10"))?;
            worst = worst.max(d);
        }
        let counts: Vec<usize> = (0..=8)
            .map(|j| {
                let lambda = 10f64.powf(2.0 + 0.5 * j as f64);
                i9(lambda, m)
                    .and_then(|p| p.integrate(&strict))
                    .map(|r| r.intervals_used)
            })
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let (lo, hi) = (*counts.iter().min().unwrap(), *counts.iter().max().unwrap());
        let spread = hi as f64 / lo as f64;
        check(
            spread <= 2.0,
            format!("(c) m={m}: intervals {counts:?} vary by {spread:.2}"),
        )?;
        worst_spread = worst_spread.max(spread);
    }
    let n = |lambda: f64| {
        i9(lambda, 2.0)
            .and_then(|p| p.integrate(&loose))
            .map(|r| r.intervals_used)
            .map_err(|e| e.to_string())
    };
    let (n2, n6) = (n(1e2)?, n(1e6)?);
    let growth = n6 as f64 / n2 as f64;
    check(growth <= 4.0, format!("(b) intervals {n6}/{n2} = {growth:.2} > 4"))?;
    Ok(format!(
        "(a) max diff {worst:.2e}; (b) growth {n6}/{n2} = {growth:.2}; (c) max spread {worst_spread:.2}"
    ))
}

fn many_stationary_points() -> Outcome {
    let p = integrand_for(IntegralId::I22, &params(&[("lambda", 1e7), ("m", 20.0)])).map_err(|e| e.to_string())?;
    let t = Instant::now();
    let strict = p.integrate(&AdaptiveConfig::default()).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let loose = p
        .integrate(&AdaptiveConfig::default().with_eps(1e-9))
        .map_err(|e| e.to_string())?;
    check(strict.status.is_converged(), format!("status {}", strict.status))?;
    check(secs <= 0.5, format!("lambda=1e7 took {secs:.3}s > 500 ms"))?;
    let d = (strict.value - loose.value).norm();
    check(d <= 1e-8, format!("eps 1e-12 vs 1e-9 differ by {d:.3e} > 1e-8"))?;
    let q = integrand_for(IntegralId::I22, &params(&[("lambda", 1e3), ("m", 20.0)])).map_err(|e| e.to_string())?;
    let v = q
        .integrate(&AdaptiveConfig::default())
        .map_err(|e| e.to_string())?
        .value;
    let o = q.oracle(1e-15).map_err(|e| e.to_string())?.value;
    let e = (v - o).norm();
    check(e <= 1e-10, format!("lambda=1e3 vs oracle {e:.3e} > 1e-10"))?;
    Ok(format!(
        "1e7: {:.1} ms, {} intervals, eps-change {d:.2e}; 1e3 vs oracle {e:.2e}",
        secs * 1e3,
        strict.intervals_used
    ))
}

fn modal_green() -> Outcome {
    let mut worst = 0.0f64;
    for kappa in [1e2, 1e3] {
        for m in [1e2, 1e3] {
            let p = integrand_for(IntegralId::I21, &params(&[("kappa", kappa), ("m", m), ("alpha", 0.5)]))
                .map_err(|e| e.to_string())?;
            let eps = f64::EPSILON * kappa.sqrt();
            let r = p
                .integrate(&AdaptiveConfig::default().with_eps(eps))
                .map_err(|e| e.to_string())?;
            let o = p.oracle(eps).map_err(|e| e.to_string())?;
            let d = (r.value - o.value).norm();
            check(d <= 1e-9, format!("kappa={kappa} m={m}: {d:.3e} > 1e-9"))?;
            worst = worst.max(d);
        }
    }
    Ok(format!("max difference {worst:.2e}"))
}

fn selftest_suite() -> Outcome {
    let t = Instant::now();
    let out = levin_bin().arg("selftest").output().map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let text = String::from_utf8_lossy(&out.stdout);
    check(out.status.success(), format!("selftest failed:\n{text}"))?;
    check(secs < 10.0, format!("selftest took {secs:.2}s"))?;
    Ok(format!(
        "{} (wall {secs:.2}s)",
        text.lines().last().unwrap_or("").trim()
    ))
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("levin-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let runs: [(&str, Vec<&str>); 2] = [
        (
            "sweep",
            vec![
                "sweep",
                "--paper-integral",
                "I9",
                "--decades",
                "1:5",
                "--count",
                "40",
                "--grid-param",
                "m=2,3",
                "--no-timing",
            ],
        ),
        (
            "compare",
            vec![
                "compare",
                "--paper-integral",
                "I5",
                "--ranges",
                "1e0:1e1,1e1:1e2",
                "--samples",
                "10",
                "--seed",
                "42",
                "--no-timing",
            ],
        ),
    ];
    let mut sizes = Vec::new();
    for (name, args) in runs {
        let mut bytes = Vec::new();
        for i in 0..2 {
            let path = dir.join(format!("{name}-{i}.csv"));
            let st = levin_bin()
                .args(&args)
                .arg("--out")
                .arg(&path)
                .status()
                .map_err(|e| e.to_string())?;
            check(st.success(), format!("{name} run {i} exited with {st}"))?;
            bytes.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        check(
            !bytes[0].is_empty() && bytes[0] == bytes[1],
            format!("{name}: outputs differ"),
        )?;
        sizes.push(format!("{name} {} bytes", bytes[0].len()));
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("identical ({})", sizes.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 closed-form accuracy (I1, I4)", closed_form_sweeps),
        ("2 Levin vs Gauss timing (I5-I8)", levin_vs_gauss),
        ("3 low frequency (I6)", low_frequency),
        ("4 stationary points (I9)", stationary_points),
        ("5 many stationary points (I22)", many_stationary_points),
        ("6 modal Green's function (I21)", modal_green),
        ("7 selftest property suites", selftest_suite),
        ("8 deterministic CSV", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        let r = f();
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{secs:.2}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail} [{secs:.2}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
