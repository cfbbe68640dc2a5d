use std::collections::BTreeMap;
use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use lax::analysis::fuzz::{audit_run, shrink, AuditOutcome};
use lax::analysis::generate::{corpus, Preset};
use lax::analysis::{audit_trace, check_result};
use lax::examples::run_suite;
use lax::strategy::{normalize, Config, DEFAULT_MAX_STEPS, DEFAULT_MAX_TRACE_SIZE};
use lax::syntax::{parse_term_with_context, print_term, Term};
use lax::typing::{check, TypingContext};

const EXIT_INPUT: u8 = 1;
const EXIT_LIMIT: u8 = 2;
const EXIT_VIOLATION: u8 = 3;

#[derive(Parser)]
#[command(name = "lax", version, about = "Type checker and normalizer for concurrent proof terms")]
struct Cli {
    /// Output format. In json mode every line written is a JSON object.
    #[arg(long, value_enum, default_value_t = Format::Pretty, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Pretty,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(clap::Args)]
struct Limits {
    /// Maximum number of reduction steps.
    #[arg(long, env = "LAX_MAX_STEPS", default_value_t = DEFAULT_MAX_STEPS as u64,
          value_parser = clap::value_parser!(u64).range(1..))]
    max_steps: u64,
    /// Maximum number of term nodes kept in the trace, summed over all steps.
    #[arg(long, env = "LAX_MAX_TRACE_SIZE", default_value_t = DEFAULT_MAX_TRACE_SIZE as u64,
          value_parser = clap::value_parser!(u64).range(1..))]
    max_trace_size: u64,
    /// Restrict sending to the underlined process of each session.
    #[arg(long, value_enum, default_value_t = Switch::On)]
    underline: Switch,
}

impl Limits {
    fn config(&self) -> Config {
        Config {
            max_steps: self.max_steps as usize,
            max_trace_size: self.max_trace_size as usize,
            underline: self.underline == Switch::On,
            ..Config::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the type of a term.
    Check {
        /// Program file, or `-` for standard input.
        file: String,
    },
    /// Normalize a term with the reduction strategy.
    Normalize {
        file: String,
        /// Print every reduction step as a JSON line.
        #[arg(long)]
        trace: bool,
        /// Run every monitor on the trace and check the result.
        #[arg(long)]
        audit: bool,
        #[command(flatten)]
        limits: Limits,
    },
    /// Run the bundled examples against their expected normal forms.
    Examples {
        #[command(flatten)]
        limits: Limits,
        /// Disable broadcast communication (fault injection).
        #[arg(long, hide = true)]
        disable_broadcast: bool,
    },
    /// Normalize and audit a seeded corpus of random well-typed terms.
    Fuzz {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        count: usize,
        /// Bound on term size.
        #[arg(long, default_value_t = 40)]
        size: usize,
        /// Axiom preset: EM, EM3, C3, G2 or Godel.
        #[arg(long, default_value = "EM")]
        axiom: Preset,
        #[command(flatten)]
        limits: Limits,
    },
}

struct Out {
    json: bool,
}

impl Out {
    fn line(&self, pretty: impl FnOnce() -> String, value: Value) {
        if self.json {
            println!("{}", value);
        } else {
            println!("{}", pretty());
        }
    }

    fn error(&self, kind: &str, message: &str, extra: Value) -> ExitCode {
        if self.json {
            let mut v = json!({ "ok": false, "error": kind, "message": message });
            if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
                m.extend(e);
            }
            eprintln!("{}", v);
        } else {
            eprintln!("error: {}", message);
        }
        ExitCode::from(match kind {
            "limit" => EXIT_LIMIT,
            "violation" => EXIT_VIOLATION,
            _ => EXIT_INPUT,
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{}", e);
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let json = std::env::args().collect::<Vec<_>>().windows(2).any(|w| w[0] == "--format" && w[1] == "json")
                || std::env::args().any(|a| a == "--format=json");
            let out = Out { json };
            let text = e.to_string();
            return out.error("usage", text.trim().trim_start_matches("error: "), json!({}));
        }
    };
    let out = Out { json: cli.format == Format::Json };
    match cli.command {
        Command::Check { file } => cmd_check(&out, &file),
        Command::Normalize { file, trace, audit, limits } => cmd_normalize(&out, &file, trace, audit, &limits),
        Command::Examples { limits, disable_broadcast } => {
            cmd_examples(&out, &Config { broadcast: !disable_broadcast, ..limits.config() })
        }
        Command::Fuzz { seed, count, size, axiom, limits } => cmd_fuzz(&out, seed, count, size, axiom, &limits.config()),
    }
}

fn load(out: &Out, file: &str) -> Result<(Term, TypingContext), ExitCode> {
    let text = if file == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map(|_| s)
    } else {
        std::fs::read_to_string(file)
    };
    let text = text.map_err(|e| out.error("io", &format!("{}: {}", file, e), json!({})))?;
    match parse_term_with_context(&text) {
        Ok((t, vars)) => Ok((t, TypingContext::from_vars(&vars))),
        Err(e) => Err(out.error(
            "parse",
            &format!("{}:{}", file, e),
            json!({ "line": e.line, "column": e.column }),
        )),
    }
}

fn cmd_check(out: &Out, file: &str) -> ExitCode {
    let (t, ctx) = match load(out, file) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let report = check(&ctx, &t);
    match &report.ty {
        Some(ty) => {
            out.line(|| ty.clone(), serde_json::to_value(&report).expect("serializable"));
            ExitCode::SUCCESS
        }
        None => {
            let message = report.errors.first().map(|e| e.message.clone()).unwrap_or_default();
            out.error("type", &message, json!({ "errors": report.errors }))
        }
    }
}

fn cmd_normalize(out: &Out, file: &str, with_trace: bool, audit: bool, limits: &Limits) -> ExitCode {
    let (t, ctx) = match load(out, file) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let report = check(&ctx, &t);
    if !report.ok {
        let message = report.errors.first().map(|e| e.message.clone()).unwrap_or_default();
        return out.error("type", &message, json!({ "errors": report.errors }));
    }
    let result = normalize(&t, &limits.config());
    let trace = match &result {
        Ok((_, trace)) => trace,
        Err(e) => e.trace(),
    };
    if with_trace {
        // Trace lines are JSON in both formats.
        for r in trace.records() {
            println!("{}", serde_json::to_string(&r).expect("serializable"));
        }
    }
    let nf = match &result {
        Ok((nf, _)) => nf.clone(),
        Err(e) => {
            let kind = if e.is_limit() { "limit" } else { "violation" };
            return out.error(kind, &e.to_string(), json!({ "steps": e.trace().steps.len() }));
        }
    };
    let printed = print_term(&nf);
    out.line(
        || printed.clone(),
        json!({ "ok": true, "normal_form": printed, "steps": trace.steps.len(), "cycles": trace.cycles() }),
    );
    if audit {
        let mut report = audit_trace(&ctx, trace);
        report.merge(check_result(&ctx, &nf));
        if !report.holds {
            if !out.json {
                for w in &report.witnesses {
                    eprintln!("violation at {:?}: {}", w.position, w.explanation);
                }
            }
            return out.error(
                "violation",
                &format!("{} monitor violations", report.witnesses.len()),
                json!({ "witnesses": report.witnesses }),
            );
        }
        out.line(|| "audit: ok".to_string(), json!({ "audit": report }));
    }
    ExitCode::SUCCESS
}

fn cmd_examples(out: &Out, cfg: &Config) -> ExitCode {
    let outcomes = run_suite(cfg);
    for o in &outcomes {
        out.line(
            || match (&o.detail, o.passed) {
                (_, true) => format!("ok    {} ({} steps)", o.name, o.steps),
                (Some(d), false) => format!("FAIL  {}: {}", o.name, d),
                (None, false) => format!("FAIL  {}", o.name),
            },
            serde_json::to_value(o).expect("serializable"),
        );
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name).collect();
    if failed.is_empty() {
        out.line(|| format!("{} examples passed", outcomes.len()), json!({ "ok": true, "passed": outcomes.len() }));
        ExitCode::SUCCESS
    } else {
        out.error("divergent", &format!("divergent examples: {}", failed.join(", ")), json!({ "failed": failed }))
    }
}

fn cmd_fuzz(out: &Out, seed: u64, count: usize, size: usize, preset: Preset, cfg: &Config) -> ExitCode {
    let samples = corpus(seed, count, size, preset);
    let outcomes: Vec<AuditOutcome> =
        samples.par_iter().map(|s| audit_run(&s.typing_context(), &s.term, cfg)).collect();
    let mut phases: BTreeMap<String, usize> = BTreeMap::new();
    for o in &outcomes {
        for (k, v) in &o.phase_counts {
            *phases.entry(k.clone()).or_insert(0) += v;
        }
    }
    let failing: Vec<usize> = (0..samples.len()).filter(|&i| !outcomes[i].holds()).collect();
    let stats = json!({
        "axiom": preset.to_string(),
        "seed": seed,
        "terms": samples.len(),
        "steps": outcomes.iter().map(|o| o.steps).sum::<usize>(),
        "max_steps": outcomes.iter().map(|o| o.steps).max().unwrap_or(0),
        "max_complexity": outcomes.iter().map(|o| o.max_complexity).max().unwrap_or(0),
        "limit_hits": outcomes.iter().filter(|o| o.limit_hit).count(),
        "phase_counts": phases,
        "violations": failing.len(),
    });
    out.line(
        || {
            format!(
                "{} terms ({} seed {}): {} steps, max {} per term, max complexity {}, {} violations",
                stats["terms"], preset, seed, stats["steps"], stats["max_steps"], stats["max_complexity"], stats["violations"]
            )
        },
        stats.clone(),
    );
    let Some(&first) = failing.iter().min_by_key(|&&i| (samples[i].term.size(), i)) else {
        return ExitCode::SUCCESS;
    };
    let ctx = samples[first].typing_context();
    let small = shrink(&ctx, &samples[first].term, 500, |t| !audit_run(&ctx, t, cfg).holds());
    let witnesses = audit_run(&ctx, &small, cfg).report.witnesses;
    let printed = print_term(&small);
    if !out.json {
        eprintln!("counterexample: {}", printed);
        for w in &witnesses {
            eprintln!("  at {:?}: {}", w.position, w.explanation);
        }
    }
    out.error(
        "violation",
        &format!("{} of {} terms violate a property", failing.len(), samples.len()),
        json!({ "counterexample": printed, "witnesses": witnesses }),
    )
}
