//! `mcras`: sample-size plans, one-shot estimates, failure-rate simulations and the
//! tail-bound certificate.
//!
//! Exit status is 0 on success, 1 when `verify-lemmas` reports a FAIL and 2 for any usage,
//! domain or I/O error.

mod config;

use std::io::Write;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use config::{CommonArgs, Resolved, VerifyArgs};
use mcras::certify::{certify, CertificationReport};
use mcras::distributions::make_source;
use mcras::estimators::{estimate, EstimatorConfig};
use mcras::harness::run_simulation;
use mcras::output::{envelope, experiment_config_value, format_real, to_json_string, to_value, write_trials_csv, OutputFormat};
use mcras::plan::plan_for;
use mcras::SamplingPlan;

#[derive(Debug, Parser)]
#[command(name = "mcras", version, about = "Relative-error mean estimation with median-of-means plans")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the sample plan for (c, ε, δ).
    Plan(CommonArgs),
    /// Run one estimate on a test distribution.
    Estimate(CommonArgs),
    /// Estimate repeatedly and report the failure rate.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Numerically certify the tail bounds behind the plans.
    VerifyLemmas {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        verify: VerifyArgs,
    },
}

enum Outcome {
    Ok,
    CertificationFailed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::CertificationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Plan(args) => cmd_plan(&Resolved::new(&args, None)?, &mut out)?,
        Command::Estimate(args) => cmd_estimate(&Resolved::new(&args, None)?, &mut out)?,
        Command::Simulate { common, trials } => cmd_simulate(&Resolved::new(&common, trials)?, &mut out)?,
        Command::VerifyLemmas { common, verify } => {
            if common.epsilon.is_some() || common.delta.is_some() {
                bail!("verify-lemmas takes --epsilon-grid, not --epsilon/--delta");
            }
            let resolved = Resolved::new(&common, None)?;
            return cmd_verify(resolved, verify, &mut out);
        }
    }
    Ok(Outcome::Ok)
}

fn plan_line(plan: &SamplingPlan) -> String {
    format!("group_size={} num_groups={} total={}", plan.group_size(), plan.num_groups(), plan.total())
}

fn cmd_plan(r: &Resolved, out: &mut impl Write) -> Result<()> {
    let acc = r.accuracy()?;
    let c = r.spread()?;
    let plan = plan_for(r.kind, c, acc)?;
    let leading = plan.leading_constant(c, acc);
    let config = json!({
        "kind": r.kind.short_name(),
        "c": c.get(),
        "epsilon": acc.epsilon(),
        "delta": acc.delta(),
    });
    match r.output {
        Some(OutputFormat::Json) => {
            let result = json!({ "leading_constant": leading });
            write!(out, "{}", to_json_string(&envelope(Some(&plan), config, result, None)?))?;
        }
        Some(OutputFormat::Csv) => {
            writeln!(out, "kind,group_size,num_groups,total,leading_constant")?;
            writeln!(
                out,
                "{},{},{},{},{}",
                r.kind.short_name(),
                plan.group_size(),
                plan.num_groups(),
                plan.total(),
                format_real(leading)
            )?;
        }
        None => {
            writeln!(out, "{} {}", r.kind.short_name(), plan_line(&plan))?;
            writeln!(out, "leading_constant={leading:.6}  (total·ε²/(c²·ln(1/δ)))")?;
        }
    }
    Ok(())
}

fn cmd_estimate(r: &Resolved, out: &mut impl Write) -> Result<()> {
    let spec = r.distribution()?;
    let config = EstimatorConfig { kind: r.kind, accuracy: r.accuracy()?, c: r.spread()?, seed: r.seed };
    let source = make_source(spec)?;
    let est = estimate(&config, &source)?;
    let rel_error = est.value / spec.true_mean() - 1.0;
    match r.output {
        Some(OutputFormat::Json) => {
            let cfg = json!({
                "kind": r.kind.short_name(),
                "c": config.c.get(),
                "epsilon": config.accuracy.epsilon(),
                "delta": config.accuracy.delta(),
                "distribution": spec.to_string(),
            });
            let result = json!({
                "estimate": est.value,
                "draws_consumed": est.draws_consumed,
                "true_mean": spec.true_mean(),
                "rel_error": rel_error,
            });
            write!(out, "{}", to_json_string(&envelope(Some(&est.plan), cfg, result, Some(r.seed))?))?;
        }
        Some(OutputFormat::Csv) => {
            writeln!(out, "estimate,draws_consumed,rel_error")?;
            writeln!(out, "{},{},{}", format_real(est.value), est.draws_consumed, format_real(rel_error))?;
        }
        None => {
            writeln!(out, "estimate={}", format_real(est.value))?;
            writeln!(out, "draws_consumed={} rel_error={:+.6}", est.draws_consumed, rel_error)?;
            writeln!(out, "{} {}", r.kind.short_name(), plan_line(&est.plan))?;
        }
    }
    Ok(())
}

fn cmd_simulate(r: &Resolved, out: &mut impl Write) -> Result<()> {
    let config = r.experiment()?;
    let sim = run_simulation(&config)?;
    let report = &sim.report;
    eprintln!("wall time: {:.3} s", report.wall_time.as_secs_f64());
    match r.output {
        Some(format @ OutputFormat::Json) => {
            let cfg = experiment_config_value(&config, format);
            let doc = envelope(Some(&sim.plan), cfg, to_value(report)?, Some(config.master_seed))?;
            write!(out, "{}", to_json_string(&doc))?;
        }
        Some(OutputFormat::Csv) => write_trials_csv(&mut *out, &sim.trials)?,
        None => {
            writeln!(out, "{} {} on {}", config.kind.short_name(), plan_line(&sim.plan), config.distribution)?;
            writeln!(
                out,
                "trials={} failures={} rate={:.6} cp99_upper={:.6} delta={}",
                report.trials,
                report.failures,
                report.empirical_rate,
                report.cp99_upper,
                config.accuracy.delta()
            )?;
        }
    }
    Ok(())
}

fn write_report_text(report: &CertificationReport, out: &mut impl Write) -> Result<()> {
    for c in &report.checks {
        writeln!(
            out,
            "{} {:<28} {} {} {}  [{}]",
            c.status.as_str(),
            c.name,
            format_real(c.value),
            c.comparison,
            format_real(c.threshold),
            c.at
        )?;
    }
    writeln!(
        out,
        "constants: scaled 2/ln(4/3)={:.6} mom 16/ln(16/7)={:.6}",
        report.constants.scaled, report.constants.median_of_means
    )?;
    writeln!(out, "{}", if report.passed { "ALL PASS" } else { "FAIL" })?;
    Ok(())
}

fn cmd_verify(r: Resolved, args: VerifyArgs, out: &mut impl Write) -> Result<Outcome> {
    let config = args.certify_config(r.verify);
    let report = certify(&config)?;
    match r.output {
        Some(OutputFormat::Json) => {
            let doc = envelope(None, to_value(&config)?, to_value(&report)?, None)?;
            write!(out, "{}", to_json_string(&doc))?;
        }
        Some(OutputFormat::Csv) => {
            writeln!(out, "status,name,value,comparison,threshold,at")?;
            for c in &report.checks {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    c.status.as_str(),
                    c.name,
                    format_real(c.value),
                    c.comparison,
                    format_real(c.threshold),
                    c.at
                )?;
            }
        }
        None => write_report_text(&report, out)?,
    }
    Ok(if report.passed { Outcome::Ok } else { Outcome::CertificationFailed })
}
