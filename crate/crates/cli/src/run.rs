use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::Args;
use kxp_core::explain::{self, CxpCatalog, ExplainError, ExplainOptions, ExplainResult, Guarantee, MethodId, Target};
use kxp_core::io::{self, ExecutionDoc, NetworkDoc, SystemDoc};
use kxp_core::{Execution, Network, ReactiveSystem, StepMask};
use serde::{Deserialize, Serialize};

use crate::gen::{agent_for, generate, system_for};
use crate::{Env, Failure, ModelArgs, SemanticsArg, TargetArg, EXIT_TIMEOUT};

#[derive(Args, Debug, Clone)]
pub struct MethodArgs {
    /// Comma-separated method numbers.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    pub methods: Vec<u8>,
    #[arg(long, value_enum, default_value = "minimal")]
    pub target: TargetArg,
    /// Run budget per execution step, in seconds; a k-step run gets k times this.
    #[arg(long, default_value_t = 60.0)]
    pub timeout_per_step: f64,
}

#[derive(Args, Debug, Clone)]
pub struct ExplainArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Execution files; may be repeated.
    #[arg(long = "exec", required = true)]
    pub execs: Vec<PathBuf>,
    #[command(flatten)]
    pub run: MethodArgs,
    /// Directory for result files; omitted means print only.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "gridworld-small")]
    pub env: Env,
    #[arg(long, default_value_t = 1)]
    pub agent_seed: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub k_max: usize,
    /// Executions per length.
    #[arg(long, default_value_t = 2)]
    pub count: usize,
    #[arg(long, value_enum, default_value = "weak")]
    pub semantics: SemanticsArg,
    #[command(flatten)]
    pub run: MethodArgs,
    #[arg(long)]
    pub out: PathBuf,
}

/// One method run on one execution, as written to disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub exec: String,
    pub k: usize,
    pub method: u8,
    pub target: Target,
    pub solved: bool,
    pub size: Option<usize>,
    pub guarantee: Option<Guarantee>,
    pub mask: Option<StepMask>,
    pub time_s: f64,
    pub queries: u64,
    /// Queries per network-copy count.
    pub copies: BTreeMap<usize, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunRecord {
    fn solved(exec: &str, k: usize, r: &ExplainResult) -> Self {
        RunRecord {
            exec: exec.to_string(),
            k,
            method: r.method.number(),
            target: r.target,
            solved: true,
            size: Some(r.size),
            guarantee: Some(r.guarantee),
            mask: Some(r.mask.clone()),
            time_s: r.stats.wall_time_s,
            queries: r.stats.queries,
            copies: r.stats.copies.clone(),
            error: None,
        }
    }

    fn timed_out(exec: &str, k: usize, method: u8, target: Target, budget: f64, queries: u64) -> Self {
        RunRecord {
            exec: exec.to_string(),
            k,
            method,
            target,
            solved: false,
            size: None,
            guarantee: None,
            mask: None,
            time_s: budget,
            queries,
            copies: BTreeMap::new(),
            error: Some("timeout".into()),
        }
    }

    pub fn file_name(&self) -> String {
        let target = match self.target {
            Target::Minimal => "minimal",
            Target::Minimum => "minimum",
        };
        format!("{}.m{}.{target}.json", self.exec, self.method)
    }
}

fn check_methods(methods: &[u8]) -> Result<(), Failure> {
    if methods.is_empty() {
        return Err(Failure::input("no methods given"));
    }
    match methods.iter().find(|&&m| MethodId::from_number(m).is_none()) {
        Some(m) => Err(Failure::input(format!("unknown method {m}; expected 1 to 4"))),
        None => Ok(()),
    }
}

/// Runs one method. Method 4 also returns its catalog.
fn run_method(
    sys: &ReactiveSystem,
    net: &Network,
    exec: &Execution,
    method: u8,
    target: Target,
    opts: &ExplainOptions,
) -> Result<(ExplainResult, Option<CxpCatalog>), ExplainError> {
    Ok(match method {
        1 => (explain::method1(sys, net, exec, target, opts)?, None),
        2 => (explain::method2(sys, net, exec, target, opts)?, None),
        3 if target == Target::Minimal => (explain::method3_minimal(sys, net, exec, opts)?, None),
        3 => (explain::method3_minimum(sys, net, exec, opts)?, None),
        _ => {
            let (r, c) = explain::method4(sys, net, exec, opts)?;
            (r, Some(c))
        }
    })
}

fn print_header() {
    println!("{:<16} {:>3} {:>6} {:>8} {:>5} {:>10} {:>8} {:>9}", "exec", "k", "method", "target", "size", "time_s", "queries", "guarantee");
}

fn print_row(r: &RunRecord) {
    let size = r.size.map_or("-".to_string(), |s| s.to_string());
    let guarantee = match r.guarantee {
        Some(Guarantee::Minimal) => "minimal",
        Some(Guarantee::Minimum) => "minimum",
        Some(Guarantee::None) => "none",
        None => "unsolved",
    };
    let target = if r.target == Target::Minimal { "minimal" } else { "minimum" };
    println!(
        "{:<16} {:>3} {:>6} {:>8} {:>5} {:>10.3} {:>8} {:>9}",
        r.exec, r.k, r.method, target, size, r.time_s, r.queries, guarantee
    );
}

/// Runs every method on one execution, writing records (and the method 4
/// catalog) under `out`.
fn run_all(
    sys: &ReactiveSystem,
    net: &Network,
    exec: &Execution,
    label: &str,
    args: &MethodArgs,
    opts: &ExplainOptions,
    out: Option<&Path>,
) -> Result<Vec<RunRecord>, Failure> {
    let target = Target::from(args.target);
    let budget = args.timeout_per_step * exec.len() as f64;
    let opts = ExplainOptions { run_timeout: Some(Duration::from_secs_f64(budget)), ..opts.clone() };
    let mut records = Vec::new();
    for &m in &args.methods {
        let record = match run_method(sys, net, exec, m, target, &opts) {
            Ok((r, catalog)) => {
                if let (Some(dir), Some(c)) = (out, catalog) {
                    io::write_json(&dir.join(format!("{label}.m4.catalog.json")), &c)?;
                }
                RunRecord::solved(label, exec.len(), &r)
            }
            Err(ExplainError::Timeout { queries }) => {
                let t = if m == 4 { Target::Minimum } else { target };
                RunRecord::timed_out(label, exec.len(), m, t, budget, queries)
            }
            Err(e) => return Err(e.into()),
        };
        if let Some(dir) = out {
            io::write_json(&dir.join(record.file_name()), &record)?;
        }
        print_row(&record);
        records.push(record);
    }
    Ok(records)
}

fn timeout_code(records: &[RunRecord]) -> u8 {
    if records.iter().any(|r| !r.solved) {
        EXIT_TIMEOUT
    } else {
        0
    }
}

fn options(semantics: SemanticsArg, timeout_per_step: f64) -> Result<ExplainOptions, Failure> {
    if !(timeout_per_step > 0.0 && timeout_per_step.is_finite()) {
        return Err(Failure::input("--timeout-per-step must be positive"));
    }
    Ok(ExplainOptions { semantics: semantics.into(), ..Default::default() })
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "exec".to_string(), |s| s.to_string_lossy().into_owned())
}

pub fn explain(a: &ExplainArgs) -> Result<u8, Failure> {
    check_methods(&a.run.methods)?;
    let opts = options(a.model.semantics, a.run.timeout_per_step)?;
    let sys = io::load_system(&a.model.system)?;
    let net = io::load_network(&a.model.network)?;
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir)?;
    }
    print_header();
    let mut records = Vec::new();
    for path in &a.execs {
        let exec = io::load_execution(path)?;
        records.extend(run_all(&sys, &net, &exec, &stem(path), &a.run, &opts, a.out.as_deref())?);
    }
    Ok(timeout_code(&records))
}

pub fn bench(a: &BenchArgs) -> Result<u8, Failure> {
    check_methods(&a.run.methods)?;
    let opts = options(a.semantics, a.run.timeout_per_step)?;
    let sys = system_for(a.env);
    let net = agent_for(a.env, a.agent_seed);
    let exec_dir = a.out.join("execs");
    let result_dir = a.out.join("results");
    fs::create_dir_all(&exec_dir)?;
    fs::create_dir_all(&result_dir)?;
    io::write_json(&a.out.join("system.json"), &SystemDoc::from(&sys))?;
    io::write_json(&a.out.join("network.json"), &NetworkDoc::from(&net))?;
    print_header();
    let mut records = Vec::new();
    for k in 1..=a.k_max {
        let mut made: Vec<Execution> = Vec::new();
        let mut attempt = 0;
        while made.len() < a.count && attempt < 10 * a.count as u64 + 10 {
            if let Some(e) = generate(a.env, &net, k, a.seed.wrapping_add(attempt), 1) {
                if !made.contains(&e) {
                    made.push(e);
                }
            }
            attempt += 1;
        }
        if made.is_empty() {
            return Err(Failure::generation(format!("no execution of length {k} found")));
        }
        for (n, exec) in made.iter().enumerate() {
            let label = format!("k{k}-{n}");
            io::write_json(&exec_dir.join(format!("{label}.json")), &ExecutionDoc::from(exec))?;
            records.extend(run_all(&sys, &net, exec, &label, &a.run, &opts, Some(&result_dir))?);
        }
    }
    write_summary(&a.out.join("summary.csv"), &records)?;
    Ok(timeout_code(&records))
}

/// Mean time and size over solved runs and the solved share, per method and k.
fn write_summary(path: &Path, records: &[RunRecord]) -> Result<(), Failure> {
    let mut groups: BTreeMap<(u8, usize), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.method, r.k)).or_default().push(r);
    }
    let mut text = String::from("method,k,runs,solved_pct,mean_time_s,mean_size\n");
    println!();
    println!("{:>6} {:>3} {:>5} {:>9} {:>11} {:>9}", "method", "k", "runs", "solved_%", "mean_time_s", "mean_size");
    for ((m, k), rs) in &groups {
        let solved: Vec<&&RunRecord> = rs.iter().filter(|r| r.solved).collect();
        let pct = 100.0 * solved.len() as f64 / rs.len() as f64;
        let (time, size) = if solved.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            let n = solved.len() as f64;
            (
                solved.iter().map(|r| r.time_s).sum::<f64>() / n,
                solved.iter().map(|r| r.size.unwrap_or(0) as f64).sum::<f64>() / n,
            )
        };
        text.push_str(&format!("{m},{k},{},{pct:.1},{time:.4},{size:.2}\n", rs.len()));
        println!("{m:>6} {k:>3} {:>5} {pct:>9.1} {time:>11.3} {size:>9.2}", rs.len());
    }
    fs::write(path, text)?;
    Ok(())
}
