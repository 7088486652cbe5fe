use std::fs;
use std::path::Path;

use clap::ValueEnum;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use twoway_qkd::belldiag::{
    find_threshold, key_rate_accounting, schedule_search as search, Baseline, Family,
    IterateOptions, PointResult, ThresholdOptions,
};
use twoway_qkd::channel::{Adversary, PauliChannel};
use twoway_qkd::distill::{Policy, Schedule, StepPattern, ROUND_CSV_HEADER};
use twoway_qkd::gf2::{BitVector, CssPair, LinearCode};
use twoway_qkd::session::{run_session, SessionOutcome, SessionParams, SessionStatus};

use crate::config::Echo;
use crate::{
    AdversaryArg, AnalysisArgs, DemoArgs, Failure, FamilyArg, SearchArgs, SessionArgs,
    ThresholdArgs, EXIT_ABORT,
};

type Outcome = Result<u8, Failure>;

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents)
        .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))
}

fn load_css(
    c1: &Option<std::path::PathBuf>,
    c2: &Option<std::path::PathBuf>,
) -> Result<CssPair, Failure> {
    match (c1, c2) {
        (Some(a), Some(b)) => {
            let read = |p: &Path| {
                fs::read_to_string(p)
                    .map_err(|e| Failure::Config(format!("cannot read {}: {e}", p.display())))
            };
            let c1 = LinearCode::from_text(&read(a)?)?;
            let c2 = LinearCode::from_text(&read(b)?)?;
            Ok(CssPair::new(c1, c2)?)
        }
        _ => Ok(CssPair::steane()),
    }
}

fn code_label(c1: &Option<std::path::PathBuf>, c2: &Option<std::path::PathBuf>) -> String {
    match (c1, c2) {
        (Some(a), Some(b)) => format!("{}|{}", a.display(), b.display()),
        _ => "steane".into(),
    }
}

fn session_params(a: &SessionArgs, command: &str) -> Result<(SessionParams, Echo), Failure> {
    let mut echo = Echo::new(command);
    let noisy = a.p_depol.is_some() || a.p_x.is_some() || a.p_y.is_some() || a.p_z.is_some();
    let adversary = match a.adversary {
        AdversaryArg::InterceptResend if noisy => {
            return Err(Failure::Config(
                "intercept-resend cannot be combined with channel noise".into(),
            ))
        }
        AdversaryArg::InterceptResend => Adversary::InterceptResend,
        AdversaryArg::None => match a.p_depol {
            Some(q) => Adversary::Pauli(PauliChannel::depolarizing_with_qber(q)?),
            None if noisy => Adversary::Pauli(PauliChannel::from_errors(
                a.p_x.unwrap_or(0.0),
                a.p_y.unwrap_or(0.0),
                a.p_z.unwrap_or(0.0),
            )?),
            None => Adversary::None,
        },
    };
    let channel = match &adversary {
        Adversary::Pauli(ch) => {
            let [i, x, y, z] = ch.probabilities();
            format!("pauli({i},{x},{y},{z})")
        }
        Adversary::InterceptResend => "intercept-resend".into(),
        _ => "none".into(),
    };

    let policy: Policy = a.schedule.parse()?;
    let mut schedule = Schedule::new(policy)
        .with_handoff(a.handoff)?
        .with_min_rounds(a.min_rounds);
    if let Some(m) = a.sacrifice {
        schedule = schedule.with_sacrifice(m);
    }

    let mut params = SessionParams::new(a.n, adversary, a.seed);
    params.r = a.r;
    params.abort_threshold = a.abort_threshold;
    params.schedule = schedule;
    params.css = load_css(&a.code_c1, &a.code_c2)?;
    params.max_reconcile_failure = a.max_reconcile_failure;
    params.validate()?;

    echo.set("n", a.n)
        .set("r", a.r)
        .set("channel", channel)
        .set("abort_threshold", a.abort_threshold)
        .set("schedule", &a.schedule)
        .set("handoff", a.handoff)
        .set(
            "sacrifice",
            a.sacrifice.map_or("auto".to_string(), |m| m.to_string()),
        )
        .set("min_rounds", a.min_rounds)
        .set("max_reconcile_failure", a.max_reconcile_failure)
        .set("code", code_label(&a.code_c1, &a.code_c2))
        .set("seed", a.seed);
    Ok((params, echo))
}

fn key_digest(key: &BitVector) -> String {
    hex::encode(Sha256::digest(key.to_string().as_bytes()))
}

fn write_session_outputs(
    a: &SessionArgs,
    echo: &Echo,
    out: &SessionOutcome,
) -> Result<(), Failure> {
    if let Some(p) = &a.transcript_out {
        write_file(p, &out.transcript.to_text())?;
    }
    if let Some(p) = &a.rounds_out {
        let mut csv = echo.csv_header();
        csv.push_str(ROUND_CSV_HEADER);
        csv.push('\n');
        for r in &out.records {
            csv.push_str(&r.csv_row());
            csv.push('\n');
        }
        write_file(p, &csv)?;
    }
    Ok(())
}

pub fn simulate(a: &SessionArgs) -> Outcome {
    let (params, echo) = session_params(a, "simulate")?;
    let out = run_session(&params)?;
    write_session_outputs(a, &echo, &out)?;

    println!("observed_qber {:.6}", out.observed_qber);
    println!("rounds {}", out.rounds_executed);
    println!("consumed_secret_bits {}", out.consumed_secret_bits);
    if let SessionStatus::Aborted(reason) = &out.status {
        println!("status aborted");
        println!("abort: {reason}");
        return Ok(EXIT_ABORT);
    }
    println!("status completed");
    println!("key_bits {}", out.alice_key.len());
    if a.reveal_keys {
        println!("alice_key {}", out.alice_key);
        println!("bob_key {}", out.bob_key);
    } else {
        println!("alice_key_sha256 {}", key_digest(&out.alice_key));
        println!("bob_key_sha256 {}", key_digest(&out.bob_key));
    }
    println!(
        "keys {}",
        if out.alice_key == out.bob_key {
            "equal"
        } else {
            "differ"
        }
    );
    Ok(0)
}

pub fn keyrate(a: &SessionArgs) -> Outcome {
    let (params, echo) = session_params(a, "keyrate")?;
    let out = run_session(&params)?;
    write_session_outputs(a, &echo, &out)?;
    if let SessionStatus::Aborted(reason) = &out.status {
        println!("abort: {reason}");
        return Ok(EXIT_ABORT);
    }
    let ours = key_rate_accounting(&out, Baseline::NoPab);
    let std = key_rate_accounting(&out, Baseline::StandardBb84);
    let mut csv = echo.csv_header();
    csv.push_str(&format!("metric,{},{}\n", ours.baseline, std.baseline));
    let rows: [(&str, f64, f64); 8] = [
        (
            "transmitted",
            ours.transmitted as f64,
            std.transmitted as f64,
        ),
        ("sifted_fraction", ours.sifted_fraction, std.sifted_fraction),
        (
            "usable_positions",
            ours.usable_positions,
            std.usable_positions,
        ),
        ("check_cost", ours.check_cost, std.check_cost),
        (
            "distill_survival",
            ours.distill_survival,
            std.distill_survival,
        ),
        ("final_key_bits", ours.final_key_bits, std.final_key_bits),
        (
            "consumed_secret_bits",
            ours.consumed_secret_bits,
            std.consumed_secret_bits,
        ),
        ("net_secret_bits", ours.net_secret_bits, std.net_secret_bits),
    ];
    for (name, x, y) in rows {
        csv.push_str(&format!("{name},{x},{y}\n"));
    }
    print!("{csv}");
    Ok(0)
}

fn family(f: FamilyArg) -> Family {
    match f {
        FamilyArg::Independent => Family::IndependentBitPhase,
        FamilyArg::Depolarizing => Family::Depolarizing,
        FamilyArg::WorstCase => Family::WorstCaseGivenMarginals,
    }
}

fn analysis_options(a: &AnalysisArgs, scan: Option<f64>) -> Result<ThresholdOptions<f64>, Failure> {
    for (name, v) in [("tol", a.tol), ("grid-step", a.grid_step)] {
        if !(v > 0.0 && v < 0.5) {
            return Err(Failure::Config(format!("--{name} must lie in (0, 0.5)")));
        }
    }
    if a.max_rounds == 0 {
        return Err(Failure::Config("--max-rounds must be positive".into()));
    }
    Ok(ThresholdOptions {
        tol: a.tol,
        grid_step: a.grid_step,
        scan_step: scan,
        iterate: IterateOptions {
            max_rounds: a.max_rounds,
            ..IterateOptions::default()
        },
    })
}

fn analysis_echo(command: &str, a: &AnalysisArgs) -> Echo {
    let mut e = Echo::new(command);
    e.set(
        "family",
        a.family
            .to_possible_value()
            .map_or_else(String::new, |v| v.get_name().to_string()),
    )
    .set("tol", a.tol)
    .set("grid_step", a.grid_step)
    .set("max_rounds", a.max_rounds);
    e
}

fn point_row(r: &PointResult<f64>) -> String {
    format!(
        "{},{:?},{},{:e},{:e}",
        r.p, r.verdict, r.rounds, r.final_bit, r.final_phase
    )
}

pub fn threshold(a: &ThresholdArgs) -> Outcome {
    if !(a.scan_step > 0.0 && a.scan_step <= 0.5) {
        return Err(Failure::Config("--scan-step must lie in (0, 0.5]".into()));
    }
    let pattern: StepPattern = a
        .schedule
        .strip_prefix("fixed:")
        .unwrap_or(&a.schedule)
        .parse()?;
    let opts = analysis_options(&a.analysis, Some(a.scan_step))?;
    let mut echo = analysis_echo("threshold", &a.analysis);
    echo.set("schedule", &pattern).set("scan_step", a.scan_step);

    let rep = find_threshold(&pattern, family(a.analysis.family), &opts)?;
    if let Some(p) = &a.analysis.csv_out {
        let mut csv = echo.csv_header();
        csv.push_str("p,verdict,rounds,final_bit_marginal,final_phase_marginal\n");
        for r in rep.scan.iter().chain(&rep.bisection) {
            csv.push_str(&point_row(r));
            csv.push('\n');
        }
        write_file(p, &csv)?;
    }

    println!("schedule {pattern}");
    match rep.threshold {
        Some(t) => {
            println!("scan {} points, monotone", rep.scan.len());
            for r in &rep.bisection {
                println!("bisect p={:.6} {:?} rounds={}", r.p, r.verdict, r.rounds);
            }
            println!("threshold {t:.6}");
        }
        None => {
            for r in &rep.scan {
                println!(
                    "scan p={:.4} {:?} failing_q_y={:?}",
                    r.p, r.verdict, r.failing_q_y
                );
            }
            println!("threshold undefined: convergence region is not monotone");
        }
    }
    Ok(0)
}

pub fn schedule_search(a: &SearchArgs) -> Outcome {
    let opts = analysis_options(&a.analysis, Some(0.005))?;
    let mut echo = analysis_echo("schedule-search", &a.analysis);
    echo.set("max_len", a.max_len);
    let rep = search(a.max_len, family(a.analysis.family), &opts)?;
    if let Some(p) = &a.analysis.csv_out {
        let mut csv = echo.csv_header();
        csv.push_str("pattern,threshold,monotone\n");
        for (pat, t) in &rep.ranked {
            csv.push_str(&format!("{pat},{t},{}\n", !rep.non_monotone.contains(pat)));
        }
        write_file(p, &csv)?;
    }
    println!("evaluated {}", rep.evaluated);
    for pat in &rep.non_monotone {
        println!("skipped {pat}: convergence region is not monotone");
    }
    for (pat, t) in rep.ranked.iter().take(a.top) {
        println!("ranked {pat} {t:.6}");
    }
    println!("best {} threshold {:.6}", rep.best, rep.threshold);
    Ok(0)
}

pub fn reconcile_demo(a: &DemoArgs) -> Outcome {
    let css = load_css(&a.code_c1, &a.code_c2)?;
    let n = css.n();
    if n > 20 {
        return Err(Failure::Config(format!(
            "block length {n} too large to enumerate"
        )));
    }
    if a.error_weight > n {
        return Err(Failure::Config(format!(
            "--error-weight {} exceeds block length {n}",
            a.error_weight
        )));
    }
    let mut echo = Echo::new("reconcile-demo");
    echo.set("error_weight", a.error_weight)
        .set("code", code_label(&a.code_c1, &a.code_c2))
        .set("seed", a.seed);

    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut csv = echo.csv_header();
    csv.push_str("error,codeword,alice_key,bob_key,result\n");
    let (mut total, mut matched) = (0, 0);
    for mask in 0u32..1 << n {
        if mask.count_ones() as usize != a.error_weight {
            continue;
        }
        let e: BitVector = (0..n).map(|i| (mask >> (n - 1 - i)) & 1 == 1).collect();
        let v = BitVector::random(n, &mut rng);
        let u = css.random_codeword(&mut rng);
        let bob = v.xor(&e)?;
        let (keys, result) = match css.reconcile_with_codeword(&u, &v, &bob) {
            Ok(r) if r.alice_key == r.bob_key => ((r.alice_key, r.bob_key), "match"),
            Ok(r) => ((r.alice_key, r.bob_key), "differ"),
            Err(twoway_qkd::Error::Undecodable { .. }) => {
                ((BitVector::zeros(0), BitVector::zeros(0)), "undecodable")
            }
            Err(other) => return Err(other.into()),
        };
        total += 1;
        matched += usize::from(result == "match");
        println!("error {e} keys {result}");
        csv.push_str(&format!("{e},{u},{},{},{result}\n", keys.0, keys.1));
    }
    if let Some(p) = &a.csv_out {
        write_file(p, &csv)?;
    }
    if matched == total {
        println!(
            "keys match for all {total} patterns of weight {}",
            a.error_weight
        );
    } else {
        println!(
            "keys match for {matched} of {total} patterns of weight {}",
            a.error_weight
        );
    }
    Ok(0)
}
