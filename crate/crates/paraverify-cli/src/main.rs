use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use paraverify::govorkov::{self, build, compute_constants, format_complex, Constants, LambdaPolicy, Realization, MAX_MODES};
use paraverify::kernel::{verify_b_identities, C64};
use paraverify::reldsl::{run_corpus, Tolerances, DEFAULT_EXP_TOL};
use paraverify::report::VerificationReport;
use paraverify::{coherent, dkp, su_unitary, supertriple};
use serde_json::{json, Value};

/// Dimensions the bracket identities are sampled at.
const B_DIMS: [usize; 4] = [2, 4, 8, 16];

#[derive(Parser, Debug)]
#[command(name = "paraverify", version, about = "Numerical checks of parafermion operator realizations")]
#[command(allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Number of field components.
    #[arg(long, global = true, default_value_t = 1)]
    m: usize,

    /// Number of Grassmann sets.
    #[arg(long, global = true, default_value_t = 1)]
    sets: usize,

    /// Vacuum sign, +1 or -1.
    #[arg(long, global = true, default_value = "1", value_parser = parse_kappa, allow_negative_numbers = true)]
    kappa: i8,

    /// `auto` or a complex literal such as `2i` or `1-0.5i`.
    #[arg(long, global = true, default_value = "auto")]
    lambda: String,

    /// Relation file or directory of `.rel` files.
    #[arg(long, global = true, default_value = "corpus")]
    corpus: PathBuf,

    /// Tolerance for relations without their own.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for relation evaluation.
    #[arg(long, global = true)]
    parallel: Option<usize>,

    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Mixing strength for the invariance check.
    #[arg(long, global = true, default_value_t = 1e-3)]
    eps: f64,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Corpus relations plus the structural, Klein and vacuum checks.
    Verify,
    /// Vacuum-sector constants of the realization.
    Constants,
    /// The su(2M+1) oscillator relations and para-vacuum search.
    Su,
    /// DKP matrices in d = 2M dimensions and the ω operator.
    Dkp,
    /// Triple products against double commutators.
    Triple,
    /// Coherent states and the α-rotation mapping suite.
    Coherent,
    /// Second-order invariance under mixing of the two fields.
    Invariance,
    /// Bracket and exponential identities on random matrices.
    BIdentities,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Constants => "constants",
            Command::Su => "su",
            Command::Dkp => "dkp",
            Command::Triple => "triple",
            Command::Coherent => "coherent",
            Command::Invariance => "invariance",
            Command::BIdentities => "b-identities",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Md,
}

fn parse_kappa(s: &str) -> Result<i8, String> {
    match s.trim() {
        "1" | "+1" => Ok(1),
        "-1" => Ok(-1),
        other => Err(format!("kappa must be +1 or -1, got `{other}`")),
    }
}

struct Validated {
    policy: LambdaPolicy,
}

fn validate(cli: &Cli) -> anyhow::Result<Validated> {
    if cli.m < 1 {
        bail!("m must be ≥ 1");
    }
    let modes = 2 * cli.m + 2 * cli.m * cli.sets;
    if modes > MAX_MODES {
        bail!("2m + 2m·sets = {modes} exceeds {MAX_MODES}");
    }
    if cli.tol.is_nan() || cli.tol <= 0.0 || cli.tol.is_infinite() {
        bail!("tol must be > 0");
    }
    if cli.parallel == Some(0) {
        bail!("parallel must be ≥ 1");
    }
    let policy = cli.lambda.parse::<LambdaPolicy>()?;
    Ok(Validated { policy })
}

fn tolerances(tol: f64) -> Tolerances {
    Tolerances {
        polynomial: tol,
        exponential: DEFAULT_EXP_TOL.max(tol),
    }
}

/// Constants depend only on `M`, `κ` and `λ`, so they come from the
/// smallest realization with those parameters.
fn constants_for(cli: &Cli, policy: LambdaPolicy) -> anyhow::Result<Constants> {
    let r = build(cli.m, 0, cli.kappa, policy)?;
    Ok(compute_constants(&r)?)
}

fn realization(cli: &Cli, policy: LambdaPolicy) -> anyhow::Result<Realization> {
    Ok(build(cli.m, cli.sets, cli.kappa, policy)?)
}

fn run(cli: &Cli, policy: LambdaPolicy) -> anyhow::Result<(Constants, VerificationReport)> {
    let mut rep = VerificationReport::new();
    let constants = match cli.command {
        Command::Verify => {
            if !cli.corpus.exists() {
                bail!("corpus path {} does not exist", cli.corpus.display());
            }
            let r = realization(cli, policy)?;
            rep.extend(run_corpus(&cli.corpus, &r, tolerances(cli.tol))?);
            rep.extend(govorkov::structure_check(&r));
            rep.extend(govorkov::klein_check(&r));
            rep.extend(govorkov::n_tilde_action_check(&r));
            if r.sets() >= 1 {
                rep.extend(govorkov::grassmann_statistics_check(&r)?);
                rep.extend(govorkov::vacuum_postulate_check(&r)?);
            }
            *r.constants()
        }
        Command::Constants => constants_for(cli, policy)?,
        Command::Su => {
            let su = su_unitary::build_su(cli.m)?;
            rep.extend(su_unitary::verify_relation_set(&su));
            rep.extend(su_unitary::para_vacuum_report(&su));
            constants_for(cli, policy)?
        }
        Command::Dkp => {
            let k = dkp::build_dkp(2 * cli.m)?;
            rep.extend(dkp::inconsistency_report(&k));
            constants_for(cli, policy)?
        }
        Command::Triple => {
            let r = build(cli.m, 0, cli.kappa, policy)?;
            rep.extend(supertriple::check_against_matrices(&r));
            *r.constants()
        }
        Command::Coherent => {
            let r = realization(cli, policy)?;
            rep.extend(coherent::coherent_suite(&r)?);
            rep.extend(coherent::mapping_checks(&r)?);
            *r.constants()
        }
        Command::Invariance => {
            let r = build(cli.m, 0, cli.kappa, policy)?;
            rep.extend(govorkov::invariance_check(&r, cli.eps, cli.seed)?);
            *r.constants()
        }
        Command::BIdentities => {
            for (i, &d) in B_DIMS.iter().enumerate() {
                let mut part = verify_b_identities(d, cli.seed.wrapping_add(i as u64))?;
                for e in &mut part.entries {
                    e.worst_assignment.insert("dim".into(), d);
                }
                rep.extend(part);
            }
            constants_for(cli, policy)?
        }
    };
    Ok((constants, rep))
}

fn complex_json(z: C64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

/// Rounds away sub-1e-12 noise for display.
fn display_complex(z: C64) -> String {
    let round = |x: f64| {
        let r = (x * 1e12).round() / 1e12;
        if r == 0.0 {
            0.0
        } else {
            r
        }
    };
    format_complex(C64::new(round(z.re), round(z.im)))
}

fn config_json(cli: &Cli, policy: LambdaPolicy) -> Value {
    json!({
        "command": cli.command.name(),
        "m": cli.m,
        "sets": cli.sets,
        "kappa": cli.kappa,
        "lambda": policy.to_string(),
        "corpus": cli.corpus.display().to_string(),
        "tol": cli.tol,
        "seed": cli.seed,
        "eps": cli.eps,
    })
}

fn render_json(cli: &Cli, policy: LambdaPolicy, k: &Constants, rep: &VerificationReport) -> String {
    let doc = json!({
        "config": config_json(cli, policy),
        "realization_constants": {
            "c": complex_json(k.c),
            "Lambda": complex_json(k.big_lambda),
            "LambdaTilde": complex_json(k.lambda_tilde),
            "p": complex_json(k.p),
            "lambda": complex_json(k.lambda),
        },
        "results": rep.to_json(),
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

fn render_md(cli: &Cli, policy: LambdaPolicy, k: &Constants, rep: &VerificationReport) -> String {
    let mut s = String::new();
    if cli.command == Command::Constants {
        let _ = writeln!(s, "c = {}", display_complex(k.c));
        let _ = writeln!(s, "Lambda = {}", display_complex(k.big_lambda));
        let _ = writeln!(s, "p = {}", display_complex(k.p));
        let _ = writeln!(s, "LambdaTilde = {}", display_complex(k.lambda_tilde));
        let _ = writeln!(s, "lambda = {}", display_complex(k.lambda));
        return s;
    }
    let _ = writeln!(s, "# paraverify {}\n", cli.command.name());
    let _ = writeln!(
        s,
        "M = {}, sets = {}, kappa = {}, lambda = {}, tol = {:e}, seed = {}\n",
        cli.m, cli.sets, cli.kappa, policy, cli.tol, cli.seed
    );
    let _ = writeln!(
        s,
        "c = {}, Lambda = {}, LambdaTilde = {}, p = {}, lambda = {}\n",
        display_complex(k.c),
        display_complex(k.big_lambda),
        display_complex(k.lambda_tilde),
        display_complex(k.p),
        display_complex(k.lambda)
    );
    s.push_str(&rep.to_markdown());
    let failures = rep.failures().count();
    let _ = writeln!(s, "\n{} entries, {} failing", rep.entries.len(), failures);
    s
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn one_line(e: &anyhow::Error) -> String {
    let full = format!("{e:#}");
    full.lines().next().unwrap_or_default().to_string()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let policy = match validate(&cli) {
        Ok(v) => v.policy,
        Err(e) => {
            eprintln!("error: {}", one_line(&e));
            return ExitCode::from(2);
        }
    };
    let result = match cli.parallel {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(anyhow::Error::from)
            .and_then(|pool| pool.install(|| run(&cli, policy))),
        None => run(&cli, policy),
    };
    let (constants, rep) = match result {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {}", one_line(&e));
            return ExitCode::from(2);
        }
    };
    let text = match cli.format {
        Format::Json => render_json(&cli, policy, &constants, &rep),
        Format::Md => render_md(&cli, policy, &constants, &rep),
    };
    if let Err(e) = emit(cli.out.as_deref(), &text) {
        eprintln!("error: {}", one_line(&e));
        return ExitCode::from(2);
    }
    if rep.all_ok() {
        ExitCode::SUCCESS
    } else {
        for e in rep.failures() {
            eprintln!(
                "FAIL {} (deviation {:.3e}, tolerance {:.1e})",
                e.source, e.max_deviation, e.tolerance
            );
        }
        ExitCode::from(1)
    }
}
