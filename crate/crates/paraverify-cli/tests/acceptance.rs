//! End-to-end acceptance run: one line per criterion, then a single
//! assertion over all of them.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_rational::Rational64;
use paraverify::coherent::{coherent_suite, mapping_checks};
use paraverify::dkp::{build_dkp, inconsistency_report};
use paraverify::fock::{build_modes, ModeRegistry, Sector};
use paraverify::govorkov::{build, invariance_check, klein_check, LambdaPolicy};
use paraverify::kernel::{verify_b_identities, C64, I};
use paraverify::reldsl::{load_corpus, Evaluator, Tolerances};
use paraverify::report::{Expectation, ReportEntry, VerificationReport};
use paraverify::su_unitary::{build_su, verify_relation_set};
use paraverify::supertriple::{check_against_matrices, triple_product, BilinearFormTable, Combination, GeneratorTag, Kind};

struct Outcome {
    id: usize,
    title: &'static str,
    pass: bool,
    detail: String,
}

/// Writes past the test harness capture so the lines land in the log.
fn announce(o: &Outcome) {
    let status = if o.pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {:>2} {status}  {}: {}", o.id, o.title, o.detail);
}

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Largest deviation among gated passing entries and the smallest among
/// expected failures, with the names of entries that missed.
struct Sweep {
    worst_pass: f64,
    least_fail: f64,
    missed: Vec<String>,
}

fn sweep<'a>(entries: impl IntoIterator<Item = &'a ReportEntry>, tol: impl Fn(&ReportEntry) -> f64, min_fail: f64) -> Sweep {
    let mut s = Sweep {
        worst_pass: 0.0,
        least_fail: f64::INFINITY,
        missed: Vec::new(),
    };
    for e in entries {
        if e.skipped.is_some() {
            s.missed.push(format!("{} (skipped)", e.source));
            continue;
        }
        match e.expect {
            Expectation::Pass => {
                s.worst_pass = s.worst_pass.max(e.max_deviation);
                if e.max_deviation.is_nan() || e.max_deviation > tol(e) {
                    s.missed.push(format!("{} ({:.3e})", e.source, e.max_deviation));
                }
            }
            Expectation::Fail => {
                s.least_fail = s.least_fail.min(e.max_deviation);
                if e.max_deviation.is_nan() || e.max_deviation < min_fail {
                    s.missed.push(format!("{} should fail ({:.3e})", e.source, e.max_deviation));
                }
            }
            Expectation::Report => {}
        }
    }
    s
}

fn elapsed_ok(t: Instant, limit: Duration) -> (bool, String) {
    let e = t.elapsed();
    (e <= limit, format!("{:.2}s of {}s", e.as_secs_f64(), limit.as_secs()))
}

fn bracket_identities() -> Outcome {
    let t = Instant::now();
    let mut rep = VerificationReport::new();
    for (i, d) in [2, 4, 8, 16].into_iter().enumerate() {
        rep.extend(verify_b_identities(d, 11 + i as u64).unwrap());
    }
    let (fast, time) = elapsed_ok(t, Duration::from_secs(1));
    let s = sweep(&rep.entries, |e| e.tolerance.min(1e-9), 0.5);
    Outcome {
        id: 1,
        title: "bracket and exponential identities",
        pass: s.missed.is_empty() && fast && rep.entries.len() == 44,
        detail: format!("{} checks, worst {:.2e}, {time} {:?}", rep.entries.len(), s.worst_pass, s.missed),
    }
}

fn anticommutation() -> Outcome {
    let t = Instant::now();
    let mut reg = ModeRegistry::new(false);
    for i in 0..13 {
        reg.push(format!("c{i}"), Sector::A1).unwrap();
    }
    let dev = build_modes(reg).unwrap().car_deviation();
    let (fast, time) = elapsed_ok(t, Duration::from_secs(10));
    Outcome {
        id: 2,
        title: "canonical anticommutation on 13 modes",
        pass: dev <= 1e-13 && fast,
        detail: format!("deviation {dev:.2e}, {time}"),
    }
}

fn govorkov_corpus() -> Outcome {
    let t = Instant::now();
    let rels = load_corpus(&corpus_dir()).unwrap();
    let mut missed = Vec::new();
    let mut worst = 0.0_f64;
    let mut least_fail = f64::INFINITY;
    let mut counted = 0;
    let mut dims = Vec::new();
    for (m, sets) in [(1, 1), (2, 0), (2, 1)] {
        let r = build(m, sets, 1, LambdaPolicy::Auto).unwrap();
        dims.push(r.dim());
        let rep = Evaluator::new(&r).check_all(&rels, Tolerances::default()).unwrap();
        // Relations naming Grassmann symbols cannot run without a set.
        let gated: Vec<(&ReportEntry, f64)> = rep
            .entries
            .iter()
            .zip(&rels)
            .filter(|(e, _)| !(sets == 0 && e.skipped.as_deref() == Some("no Grassmann sets")))
            .map(|(e, rel)| (e, if rel.uses_exp() { 1e-8 } else { 1e-10 }))
            .collect();
        counted += gated.len();
        let s = sweep(
            gated.iter().map(|(e, _)| *e),
            |e| gated.iter().find(|(g, _)| std::ptr::eq(*g, e)).unwrap().1,
            0.5,
        );
        worst = worst.max(s.worst_pass);
        least_fail = least_fail.min(s.least_fail);
        missed.extend(s.missed.into_iter().map(|x| format!("M={m} S={sets}: {x}")));
    }
    let (fast, time) = elapsed_ok(t, Duration::from_secs(180));
    Outcome {
        id: 3,
        title: "relation corpus",
        pass: missed.is_empty() && fast,
        detail: format!(
            "dims {dims:?}, {counted} evaluations, worst pass {worst:.2e}, least expected-fail {least_fail:.2}, {time} {missed:?}"
        ),
    }
}

fn vacuum_constants() -> Outcome {
    let mut worst = 0.0_f64;
    for m in [1, 2] {
        for kappa in [1i8, -1] {
            let r = build(m, 0, kappa, LambdaPolicy::Auto).unwrap();
            let k = r.constants();
            let c = C64::new(0.0, 2.0 * f64::from(kappa));
            let nt_vac = r.single("Nt").matvec(r.vacuum()).max_abs();
            let re_ok = k.c.re.abs() <= 1e-13;
            worst = worst
                .max((k.p - C64::new(2.0, 0.0)).norm())
                .max((k.c - c).norm())
                .max((k.big_lambda - k.c / 2.0).norm())
                .max((k.lambda - k.c).norm())
                .max(nt_vac)
                .max(if re_ok { 0.0 } else { 1.0 });
        }
    }
    Outcome {
        id: 4,
        title: "vacuum constants p, c, Lambda and the Nt vacuum",
        pass: worst <= 1e-12,
        detail: format!("worst {worst:.2e} over M = 1, 2 and both signs"),
    }
}

fn klein() -> Outcome {
    let mut worst = 0.0_f64;
    let mut missed = Vec::new();
    for m in [1, 2] {
        let r = build(m, 0, 1, LambdaPolicy::Auto).unwrap();
        let s = sweep(&klein_check(&r).entries, |_| 1e-13, 0.5);
        let omt = (r.single("Omt") - &r.single("K").scale(I * 0.5)).max_abs();
        worst = worst.max(s.worst_pass).max(omt);
        if omt > 1e-13 {
            missed.push(format!("M={m}: Omt vs K/2 ({omt:.2e})"));
        }
        missed.extend(s.missed.into_iter().map(|x| format!("M={m}: {x}")));
    }
    Outcome {
        id: 5,
        title: "Klein transformation",
        pass: missed.is_empty(),
        detail: format!("worst {worst:.2e} {missed:?}"),
    }
}

fn coherent_states() -> Outcome {
    let t = Instant::now();
    let mut missed = Vec::new();
    let mut worst = 0.0_f64;
    let mut flipped = f64::INFINITY;
    for (m, sets) in [(1, 1), (2, 1), (1, 2)] {
        let r = build(m, sets, 1, LambdaPolicy::Auto).unwrap();
        let rep = coherent_suite(&r).unwrap();
        let tol = |e: &ReportEntry| if e.source.contains("eigenstate") { 1e-9 } else { 1e-8 };
        let s = sweep(&rep.entries, tol, 0.1);
        worst = worst.max(s.worst_pass);
        flipped = flipped.min(s.least_fail);
        missed.extend(s.missed.into_iter().map(|x| format!("M={m} S={sets}: {x}")));
    }
    let (fast, time) = elapsed_ok(t, Duration::from_secs(120));
    Outcome {
        id: 6,
        title: "coherent states",
        pass: missed.is_empty() && fast,
        detail: format!("worst gated {worst:.2e}, flipped-sign residual {flipped:.2}, {time} {missed:?}"),
    }
}

fn mapping() -> Outcome {
    let mut missed = Vec::new();
    let mut worst = 0.0_f64;
    let mut structure_changing = 0;
    for m in [1, 2] {
        let r = build(m, 1, 1, LambdaPolicy::Auto).unwrap();
        let rep = mapping_checks(&r).unwrap();
        let s = sweep(&rep.entries, |_| 1e-8, 0.5);
        structure_changing += rep
            .entries
            .iter()
            .filter(|e| {
                e.expect == Expectation::Pass
                    && (e.source.starts_with("image of") || e.source.contains("on acomm of xi") || e.source.contains("trades"))
            })
            .filter(|e| e.max_deviation <= 1e-8)
            .count();
        worst = worst.max(s.worst_pass);
        missed.extend(s.missed.into_iter().map(|x| format!("M={m}: {x}")));
    }
    Outcome {
        id: 7,
        title: "rotation mapping suite",
        pass: missed.is_empty() && structure_changing >= 2 * 7,
        detail: format!("worst {worst:.2e}, {structure_changing} structure-changing images pass {missed:?}"),
    }
}

fn unitary_algebra() -> Outcome {
    let mut missed = Vec::new();
    let mut worst = 0.0_f64;
    let mut least_fail = f64::INFINITY;
    for m in [1, 2, 3] {
        let rep = verify_relation_set(&build_su(m).unwrap());
        let s = sweep(&rep.entries, |_| 1e-11, 0.5);
        worst = worst.max(s.worst_pass);
        least_fail = least_fail.min(s.least_fail);
        missed.extend(s.missed.into_iter().map(|x| format!("M={m}: {x}")));
    }
    Outcome {
        id: 8,
        title: "su(2M+1) relation set",
        pass: missed.is_empty() && least_fail.is_finite(),
        detail: format!("worst {worst:.2e}, least uncorrected-form deviation {least_fail:.2} {missed:?}"),
    }
}

fn supertriple() -> Outcome {
    let mut missed = Vec::new();
    let mut worst = 0.0_f64;
    for m in [1, 2] {
        let r = build(m, 0, 1, LambdaPolicy::Auto).unwrap();
        let s = sweep(&check_against_matrices(&r).entries, |e| e.tolerance.min(1e-12), 0.5);
        worst = worst.max(s.worst_pass);
        missed.extend(s.missed.into_iter().map(|x| format!("M={m}: {x}")));

        let form = BilinearFormTable::two_field(m);
        let t = GeneratorTag::new;
        let d = |i: usize, j: usize| Rational64::from(i64::from(i == j));
        let combo = |terms: &[(Rational64, GeneratorTag)]| {
            let mut c = Combination::zero();
            for &(v, g) in terms {
                c.add(v, g);
            }
            c.to_string()
        };
        for k in 1..=m {
            for l in 1..=m {
                for n in 1..=m {
                    let cases = [
                        (
                            triple_product(&form, t(Kind::Ad, k), t(Kind::A, l), t(Kind::B, n)),
                            combo(&[(d(k, n) * -2, t(Kind::B, l))]),
                        ),
                        (
                            triple_product(&form, t(Kind::B, n), t(Kind::Ad, k), t(Kind::A, l)),
                            combo(&[(d(n, k) * 4, t(Kind::B, l)), (d(k, l) * 2, t(Kind::B, n))]),
                        ),
                        (
                            triple_product(&form, t(Kind::A, l), t(Kind::B, n), t(Kind::Ad, k)),
                            combo(&[(d(k, l) * -2, t(Kind::B, n)), (d(k, n) * -2, t(Kind::B, l))]),
                        ),
                        (
                            triple_product(&form, t(Kind::Ad, k), t(Kind::A, l), t(Kind::A, n)),
                            combo(&[(d(k, n) * -2, t(Kind::A, l))]),
                        ),
                    ];
                    for (got, want) in cases {
                        if got.to_string() != want {
                            missed.push(format!("M={m} ({k},{l},{n}): {got} vs {want}"));
                        }
                    }
                }
            }
        }
    }
    Outcome {
        id: 9,
        title: "triple products",
        pass: missed.is_empty(),
        detail: format!("worst {worst:.2e}, symbolic coefficients exact {missed:?}"),
    }
}

fn dkp() -> Outcome {
    let k = build_dkp(4).unwrap();
    let rep = inconsistency_report(&k);
    let s = sweep(&rep.entries, |_| 1e-12, 0.5);
    let om = k.omega();
    let ratio = (&om.dagger() * &k.w()).trace() / (&om.dagger() * om).trace();
    let ratio_dev = (ratio - C64::new(0.4, 0.0)).norm();
    let residual = (&k.w() - &om.scale_real(0.4)).max_abs();
    let unitary_form = rep.entries.iter().filter(|e| e.source.ends_with("in the unitary form")).count();
    let missed = s.missed;
    Outcome {
        id: 10,
        title: "DKP embedding at d = 4",
        pass: missed.is_empty() && unitary_form == 2 && ratio_dev <= 1e-12 && residual <= 1e-12 && rep.all_ok(),
        detail: format!(
            "worst {:.2e}, ratio {:.12} (target 0.4), least expected-fail deviation {:.2} {missed:?}",
            s.worst_pass, ratio.re, s.least_fail
        ),
    }
}

fn invariance() -> Outcome {
    let mut ratios = Vec::new();
    let mut pass = true;
    for m in [1, 2] {
        let r = build(m, 0, 1, LambdaPolicy::Auto).unwrap();
        let rep = invariance_check(&r, 1e-3, 7).unwrap();
        let e = rep.entries.iter().find(|e| e.source.starts_with("halving ratio")).unwrap();
        pass &= e.max_deviation <= 0.5 && rep.all_ok();
        ratios.push(format!("M={m}: |ratio - 4| = {:.4}", e.max_deviation));
    }
    Outcome {
        id: 11,
        title: "second-order invariance under mixing",
        pass,
        detail: ratios.join(", "),
    }
}

/// Every subcommand at the configurations the criteria use.
const SUITE: &[&[&str]] = &[
    &["verify", "--m", "1", "--sets", "1"],
    &["verify", "--m", "2", "--sets", "0"],
    &["verify", "--m", "2", "--sets", "1"],
    &["constants", "--m", "2", "--kappa", "-1"],
    &["su", "--m", "3"],
    &["dkp", "--m", "2"],
    &["triple", "--m", "2"],
    &["coherent", "--m", "1", "--sets", "2"],
    &["coherent", "--m", "2", "--sets", "1"],
    &["invariance", "--m", "2"],
    &["b-identities"],
];

fn run_suite() -> (Vec<Vec<u8>>, Vec<i32>) {
    let bin = env!("CARGO_BIN_EXE_paraverify");
    let mut outs = Vec::new();
    let mut codes = Vec::new();
    for args in SUITE {
        let out = Command::new(bin).args(*args).arg("--corpus").arg(corpus_dir()).output().unwrap();
        codes.push(out.status.code().unwrap_or(-1));
        outs.push(out.stdout);
    }
    (outs, codes)
}

fn determinism() -> Outcome {
    let t = Instant::now();
    let (first, codes) = run_suite();
    let (second, _) = run_suite();
    let same = first == second;
    let valid = first.iter().all(|o| serde_json::from_slice::<serde_json::Value>(o).is_ok());
    let no_usage_errors = codes.iter().all(|&c| c == 0 || c == 1);
    let (fast, time) = elapsed_ok(t, Duration::from_secs(300));
    Outcome {
        id: 12,
        title: "byte-identical JSON across two full runs",
        pass: same && valid && no_usage_errors && fast,
        detail: format!(
            "{} reports identical: {same}, exit codes {codes:?}, two runs in {time}",
            first.len()
        ),
    }
}

#[test]
fn acceptance() {
    let criteria: [fn() -> Outcome; 12] = [
        bracket_identities,
        anticommutation,
        govorkov_corpus,
        vacuum_constants,
        klein,
        coherent_states,
        mapping,
        unitary_algebra,
        supertriple,
        dkp,
        invariance,
        determinism,
    ];
    let outcomes: Vec<Outcome> = criteria
        .iter()
        .map(|f| {
            let o = f();
            announce(&o);
            o
        })
        .collect();
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    assert!(failed.is_empty(), "criteria failing: {failed:?}");
}
