use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Parser;

use lr_broadcast::dp::{self, enumerate_policies_oracle};
use lr_broadcast::rlnc::{expected_extra_packets, validate_codec};
use lr_broadcast::sim::{self, run_experiment, StatsRecord};
use lr_broadcast::{Error, Mode, PolicyKind, RngSpec, SystemConfig};

use crate::manifest::RunManifest;
use crate::{CheckLrArgs, Cli, CodecArgs, Command, OracleArgs, Outcome, SimCommon, SimulateArgs, SolveArgs, SweepArgs};

pub fn run(command: Command, args: Vec<String>) -> Result<Outcome> {
    match command {
        Command::Solve(a) => solve(a, args),
        Command::CheckLr(a) => check_lr(a, args),
        Command::Oracle(a) => oracle(a, args),
        Command::Simulate(a) => simulate(a, args),
        Command::Sweep(a) => sweep(a, args),
        Command::CodecValidate(a) => codec_validate(a, args),
        Command::Replay(a) => replay(&a.manifest),
    }
}

fn kv(key: &str, value: impl ToString) -> (String, String) {
    (key.to_string(), value.to_string())
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// Writes `out` through `body` and pairs it with a manifest.
fn write_output<F>(out: &Path, manifest: RunManifest, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let file = File::create(out).with_context(|| format!("creating {}", out.display()))?;
    let mut writer = BufWriter::new(file);
    body(&mut writer)?;
    writer.flush()?;
    let path = manifest.write_for(out)?;
    eprintln!("wrote {} and {}", out.display(), path.display());
    Ok(())
}

fn outputs(out: &Option<PathBuf>) -> Vec<PathBuf> {
    out.iter().cloned().collect()
}

fn solve(a: SolveArgs, args: Vec<String>) -> Result<Outcome> {
    let config = SystemConfig::new(a.file_size, a.window, 2, a.p)?;
    let (values, policy) = dp::solve_optimal_with_tolerance(&config, a.tolerance)?;
    println!("F={} K={} p={}", a.file_size, a.window, a.p);
    println!("V(0,0) = {:.6}", values.initial());
    if let Some(out) = &a.out {
        let manifest = RunManifest::new(
            "solve",
            vec![
                kv("file_size", a.file_size),
                kv("window", a.window),
                kv("receivers", 2),
                kv("p", a.p),
                kv("tolerance", a.tolerance),
            ],
            outputs(&a.out),
            args,
        );
        write_output(out, manifest, |w| Ok(dp::write_csv(&values, &policy, w)?))?;
    }
    Ok(Outcome::Success)
}

struct CheckRow {
    f: usize,
    k: usize,
    p: f64,
    check: String,
    examined: usize,
    violations: usize,
    worst_margin: String,
    note: String,
}

fn check_lr(a: CheckLrArgs, args: Vec<String>) -> Result<Outcome> {
    let mut rows = Vec::new();
    let mut all_pass = true;
    for &f in &a.file_size {
        for &k in &a.window {
            for &p in &a.p {
                let config = match SystemConfig::new(f, k, 2, p) {
                    Ok(c) => c,
                    Err(err) => {
                        println!("F={f:<5} K={k:<4} p={p:<5} invalid: {err}");
                        rows.push(CheckRow {
                            f,
                            k,
                            p,
                            check: "invalid_config".into(),
                            examined: 0,
                            violations: 0,
                            worst_margin: String::new(),
                            note: err.to_string(),
                        });
                        continue;
                    }
                };
                let lr = dp::check_lr_optimality(&config, a.tolerance)?;
                let audit = dp::audit_inequalities(&config, a.tolerance)?;
                let pass = lr.optimal() && audit.passed();
                all_pass &= pass;
                let note = if lr.decision_states == 0 {
                    "vacuous: no decision states".to_string()
                } else {
                    String::new()
                };
                println!(
                    "F={f:<5} K={k:<4} p={p:<5} {}  decision states {:>6}, LR violations {}, audit violations {}",
                    if pass { "PASS" } else { "FAIL" },
                    lr.decision_states,
                    lr.violations.len(),
                    audit.total_violations(),
                );
                rows.push(CheckRow {
                    f,
                    k,
                    p,
                    check: "check_lr_optimality".into(),
                    examined: lr.decision_states,
                    violations: lr.violations.len(),
                    worst_margin: lr.worst_margin.to_string(),
                    note: note.clone(),
                });
                for c in &audit.checks {
                    rows.push(CheckRow {
                        f,
                        k,
                        p,
                        check: c.name.to_string(),
                        examined: c.examined,
                        violations: c.violations,
                        worst_margin: c.worst_margin.to_string(),
                        note: String::new(),
                    });
                }
            }
        }
    }
    if let Some(out) = &a.out {
        let manifest = RunManifest::new(
            "check-lr",
            vec![
                kv("file_size", join(&a.file_size)),
                kv("window", join(&a.window)),
                kv("receivers", 2),
                kv("p", join(&a.p)),
                kv("tolerance", a.tolerance),
            ],
            outputs(&a.out),
            args,
        );
        write_output(out, manifest, |w| {
            let mut csv = csv_writer(w);
            csv.write_record(["F", "K", "p", "check", "examined", "violations", "worst_margin", "note"])?;
            for r in &rows {
                csv.write_record([
                    r.f.to_string(),
                    r.k.to_string(),
                    r.p.to_string(),
                    r.check.clone(),
                    r.examined.to_string(),
                    r.violations.to_string(),
                    r.worst_margin.clone(),
                    r.note.clone(),
                ])?;
            }
            csv.flush()?;
            Ok(())
        })?;
    }
    println!("{}", if all_pass { "all checks passed" } else { "some checks FAILED" });
    Ok(if all_pass {
        Outcome::Success
    } else {
        Outcome::VerificationFailed
    })
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::Writer::from_writer(w)
}

fn oracle(a: OracleArgs, args: Vec<String>) -> Result<Outcome> {
    let config = SystemConfig::new(a.file_size, a.window, 2, a.p)?;
    let report = match enumerate_policies_oracle(&config, a.cap) {
        Ok(r) => r,
        Err(Error::EnumerationTooLarge { decision_states, cap }) => bail!(
            "refusing to enumerate: {decision_states} decision states give 2^{decision_states} policies, \
             above the cap of {cap} (raise --cap to override)"
        ),
        Err(e) => return Err(e.into()),
    };
    println!("decision states: {}", report.decision_states.len());
    println!("best V(0,0): {:.9} (policy mask {:#x})", report.best_value, report.best_mask);
    println!("LR   V(0,0): {:.9}", report.lr_value);
    let verdict = report.lr_optimal();
    println!(
        "{} policies; {}",
        report.policies,
        if verdict { "LR optimal" } else { "LR NOT optimal" }
    );
    if let Some(out) = &a.out {
        let manifest = RunManifest::new(
            "oracle",
            vec![
                kv("file_size", a.file_size),
                kv("window", a.window),
                kv("receivers", 2),
                kv("p", a.p),
                kv("cap", a.cap),
            ],
            outputs(&a.out),
            args,
        );
        write_output(out, manifest, |w| {
            let mut csv = csv_writer(w);
            csv.write_record(["rank", "mask", "value"])?;
            for (i, (mask, value)) in report.ranked.iter().enumerate() {
                csv.write_record([i.to_string(), mask.to_string(), value.to_string()])?;
            }
            csv.flush()?;
            Ok(())
        })?;
    }
    Ok(if verdict {
        Outcome::Success
    } else {
        Outcome::VerificationFailed
    })
}

fn parse_policies(names: &[String]) -> Result<Vec<PolicyKind>> {
    let mut out = Vec::new();
    for name in names {
        let kind: PolicyKind = name.parse()?;
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    if out.is_empty() {
        bail!("no policies given");
    }
    Ok(out)
}

fn parse_mode(common: &SimCommon) -> Result<Mode> {
    Ok(match common.mode.parse::<Mode>()? {
        Mode::Codec { .. } => Mode::Codec {
            payload_len: common.payload_len,
        },
        m => m,
    })
}

fn common_params(common: &SimCommon, mode: Mode) -> Vec<(String, String)> {
    vec![
        kv("receivers", common.receivers),
        kv("p", common.p),
        kv("seed", common.seed),
        kv("mode", mode),
        kv("payload_len", common.payload_len),
    ]
}

fn print_records(records: &[StatsRecord]) {
    println!(
        "{:<6} {:>4} {:>6} {:>6} {:>6} {:>9} {:>14} {:>12} {:>10}",
        "policy", "N", "F", "K", "p", "trials", "mean_slots", "stddev", "ci95"
    );
    for r in records {
        println!(
            "{:<6} {:>4} {:>6} {:>6} {:>6} {:>9} {:>14.4} {:>12.4} {:>10.4}",
            r.policy.name(),
            r.config.receivers(),
            r.config.file_size(),
            r.config.window(),
            r.config.p(),
            r.stats.n_trials,
            r.stats.mean,
            r.stats.stddev,
            r.stats.ci95_half_width
        );
    }
}

fn simulate(a: SimulateArgs, args: Vec<String>) -> Result<Outcome> {
    let policies = parse_policies(&a.policy)?;
    let mode = parse_mode(&a.common)?;
    let config = SystemConfig::new(a.file_size, a.window, a.common.receivers, a.common.p)?;
    let spec = RngSpec::new(a.common.seed);
    let mut records = Vec::new();
    for &policy in &policies {
        let stats = run_experiment(&config, policy, a.trials, &spec, mode)?;
        records.push(StatsRecord { policy, config, stats });
    }
    print_records(&records);
    if config.receivers() == 2 {
        let (values, _) = dp::solve_optimal(&config)?;
        let v00 = values.initial();
        println!("DP V(0,0) = {v00:.6}");
        for r in records.iter().filter(|r| r.policy == PolicyKind::LeastReceived) {
            println!(
                "lr mean {} the 95% CI of V(0,0) (|diff| = {:.4}, half-width {:.4})",
                if r.stats.ci_contains(v00) { "is within" } else { "is OUTSIDE" },
                (r.stats.mean - v00).abs(),
                r.stats.ci95_half_width
            );
        }
    }
    if let Some(out) = &a.common.out {
        let mut params = vec![
            kv("policies", join(&policies)),
            kv("file_size", a.file_size),
            kv("window", a.window),
            kv("trials", a.trials),
        ];
        params.extend(common_params(&a.common, mode));
        let manifest = RunManifest::new("simulate", params, outputs(&a.common.out), args);
        write_output(out, manifest, |w| Ok(sim::write_stats_csv(&records, w)?))?;
    }
    Ok(Outcome::Success)
}

fn sweep(a: SweepArgs, args: Vec<String>) -> Result<Outcome> {
    let policies = parse_policies(&a.policies)?;
    let mode = parse_mode(&a.common)?;
    // the template window is replaced per row; F itself must be valid
    let template = SystemConfig::new(a.file_size, a.file_size, a.common.receivers, a.common.p)?;
    let spec = RngSpec::new(a.common.seed);
    let rows = sim::sweep_coding_window(&template, &policies, &a.windows, a.trials, &spec, mode);
    let mut records = Vec::new();
    let mut row_errors = 0;
    for row in rows {
        match row.outcome {
            Ok(r) => records.push(r),
            Err(err) => {
                row_errors += 1;
                eprintln!("row policy={} K={}: {err}", row.policy, row.window);
            }
        }
    }
    print_records(&records);
    if let Some(out) = &a.common.out {
        let mut params = vec![
            kv("policies", join(&policies)),
            kv("file_size", a.file_size),
            kv("windows", join(&a.windows)),
            kv("trials", a.trials),
        ];
        params.extend(common_params(&a.common, mode));
        let manifest = RunManifest::new("sweep", params, outputs(&a.common.out), args);
        write_output(out, manifest, |w| Ok(sim::write_stats_csv(&records, w)?))?;
    }
    if row_errors > 0 {
        bail!("{row_errors} sweep row(s) had invalid parameters");
    }
    Ok(Outcome::Success)
}

fn codec_validate(a: CodecArgs, args: Vec<String>) -> Result<Outcome> {
    if a.window == 0 || a.payload_len == 0 {
        bail!("--window and --payload-len must be at least 1");
    }
    let report = validate_codec(a.window, a.payload_len, a.batches, a.seed);
    println!("K={} L={} batches={}", report.window, report.payload_len, report.batches);
    println!(
        "round trips: {}/{} ({:.4}%)",
        report.successes,
        report.batches,
        100.0 * report.success_rate()
    );
    println!(
        "mean extra packets beyond K: {:.6} (analytic {:.6})",
        report.mean_extra_packets,
        expected_extra_packets(a.window)
    );
    if let Some(out) = &a.out {
        let manifest = RunManifest::new(
            "codec-validate",
            vec![
                kv("window", a.window),
                kv("payload_len", a.payload_len),
                kv("batches", a.batches),
                kv("seed", a.seed),
            ],
            outputs(&a.out),
            args,
        );
        write_output(out, manifest, |w| {
            let mut csv = csv_writer(w);
            csv.write_record(["K", "L", "batches", "successes", "mean_extra_packets", "analytic_extra_packets"])?;
            csv.write_record([
                report.window.to_string(),
                report.payload_len.to_string(),
                report.batches.to_string(),
                report.successes.to_string(),
                report.mean_extra_packets.to_string(),
                expected_extra_packets(a.window).to_string(),
            ])?;
            csv.flush()?;
            Ok(())
        })?;
    }
    Ok(if report.successes == report.batches {
        Outcome::Success
    } else {
        Outcome::VerificationFailed
    })
}

fn replay(path: &Path) -> Result<Outcome> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let manifest = RunManifest::parse(&text)?;
    if manifest.version != crate::manifest::VERSION {
        eprintln!(
            "warning: manifest written by version {}, running {}",
            manifest.version,
            crate::manifest::VERSION
        );
    }
    let cli = Cli::try_parse_from(std::iter::once("lr-broadcast".to_string()).chain(manifest.args.iter().cloned()))
        .context("manifest arguments no longer parse")?;
    if matches!(cli.command, Command::Replay(_)) {
        bail!("a manifest cannot replay another manifest");
    }
    io::stdout().flush()?;
    run(cli.command, manifest.args)
}
