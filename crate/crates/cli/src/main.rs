use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use mazetrace::analysis::{
    build_report, judge_response, read_responses, scatter_csv, AnalysisReport, JudgeOptions, KindSummary, DEFAULT_LIMIT,
};
use mazetrace::codec::{decode_problem, encode_plan, encode_problem, encode_trace, TokenSeq, Vocabulary};
use mazetrace::dataset::{
    build_dataset, manifest_digest, read_dataset, resolve_workers, split_holdout, DatasetConfig, InstanceRecord,
    KindCount, DEFAULT_SHARD_SIZE,
};
use mazetrace::maze::{generate_instance, generate_layout, searchformer_batch, GenParams};
use mazetrace::rng::{derive_seed, rng_from_seed};
use mazetrace::{astar_trace, Coord, GenConfig, GeneratorKind, Grid};

/// Grid pathfinding problems, A* traces and trace-length analysis.
#[derive(Parser)]
#[command(name = "mazetrace", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate problem instances as tab-separated records.
    Generate(GenerateArgs),
    /// Run A* on one problem and print its problem, trace and plan lines.
    Solve(SolveArgs),
    /// Build a sharded, deduplicated dataset directory.
    Dataset(DatasetArgs),
    /// Assign a held-out split to an existing dataset.
    Split(SplitArgs),
    /// Judge model responses one by one.
    Judge(JudgeArgs),
    /// Aggregate judged responses into a JSON report and optional scatter CSV.
    Report(ReportArgs),
    /// Print the token vocabulary for a grid size.
    Vocab(VocabArgs),
}

#[derive(Args)]
struct GenParamArgs {
    /// Target floor fraction for drunkard's-walk caves.
    #[arg(long)]
    floor_fraction: Option<f64>,
    /// Number of wall rings for free-space grids.
    #[arg(long)]
    wall_levels: Option<usize>,
    /// Smallest accepted A* operation count for Searchformer-style grids.
    #[arg(long)]
    min_difficulty: Option<usize>,
    /// Rejection budget for Searchformer-style grids.
    #[arg(long)]
    max_attempts: Option<usize>,
}

impl GenParamArgs {
    fn params(&self) -> GenParams {
        let mut p = GenParams::default();
        if let Some(v) = self.floor_fraction {
            p.floor_fraction = v;
        }
        if let Some(v) = self.wall_levels {
            p.wall_levels = v;
        }
        if let Some(v) = self.min_difficulty {
            p.min_difficulty = v;
        }
        if let Some(v) = self.max_attempts {
            p.max_attempts = v;
        }
        p
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_parser = parse_kind)]
    kind: GeneratorKind,
    /// Grid size, `N` or `WxH`.
    #[arg(long, value_parser = parse_size, default_value = "30")]
    size: (usize, usize),
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    gen: GenParamArgs,
}

#[derive(Args)]
struct SolveArgs {
    /// Problem token text, or `-` to read it from stdin.
    #[arg(long, conflicts_with = "kind")]
    problem: Option<String>,
    /// Generate the layout with this kind instead of reading a problem.
    #[arg(long, value_parser = parse_kind, required_unless_present = "problem")]
    kind: Option<GeneratorKind>,
    #[arg(long, value_parser = parse_size, default_value = "30")]
    size: (usize, usize),
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Start cell `x,y`; overrides the sampled endpoints together with --goal.
    #[arg(long, value_parser = parse_coord, requires = "goal", conflicts_with = "problem")]
    start: Option<Coord>,
    #[arg(long, value_parser = parse_coord, requires = "start", conflicts_with = "problem")]
    goal: Option<Coord>,
    #[command(flatten)]
    gen: GenParamArgs,
}

#[derive(Args)]
struct DatasetArgs {
    /// Generator kind, optionally with a count: `wilson` or `wilson=1000`.
    /// Repeat for a mix.
    #[arg(long = "kind", value_parser = parse_kind_count, required = true)]
    kinds: Vec<(GeneratorKind, Option<usize>)>,
    /// Count for kinds given without one.
    #[arg(long, default_value_t = 1000)]
    count: usize,
    #[arg(long, value_parser = parse_size, default_value = "30")]
    size: (usize, usize),
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SHARD_SIZE)]
    shard_size: usize,
    /// Worker threads; defaults to MAZETRACE_WORKERS, then all cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Also assign a held-out split of this many instances per kind.
    #[arg(long)]
    holdout_per_kind: Option<usize>,
    #[command(flatten)]
    gen: GenParamArgs,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    holdout_per_kind: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct JudgeOpts {
    /// Context limit; responses this long count as truncated.
    #[arg(long, default_value_t = DEFAULT_LIMIT)]
    limit: usize,
    /// Also require the reasoning prefix to replay as a legal A* trace.
    #[arg(long)]
    strict_trace: bool,
    /// Measure the whole response instead of the tokens before the plan.
    #[arg(long)]
    count_all_tokens: bool,
}

impl JudgeOpts {
    fn options(&self) -> JudgeOptions {
        JudgeOptions {
            limit: self.limit,
            strict_trace: self.strict_trace,
            count_all_tokens: self.count_all_tokens,
        }
    }
}

#[derive(Args)]
struct JudgeArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Responses file with one `id<TAB>tokens` line per response.
    #[arg(long)]
    responses: PathBuf,
    #[command(flatten)]
    opts: JudgeOpts,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    responses: PathBuf,
    #[command(flatten)]
    opts: JudgeOpts,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the scatter points as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct VocabArgs {
    #[arg(long, value_parser = parse_size, default_value = "30")]
    size: (usize, usize),
    /// Largest cost token; defaults to the cell count.
    #[arg(long)]
    max_cost: Option<usize>,
    #[arg(long, default_value_t = 0)]
    extra_specials: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_kind(s: &str) -> Result<GeneratorKind, String> {
    s.parse().map_err(|e: mazetrace::maze::GenError| e.to_string())
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad size `{s}`"));
    match s.split_once(['x', 'X']) {
        Some((w, h)) => Ok((num(w)?, num(h)?)),
        None => num(s).map(|n| (n, n)),
    }
}

fn parse_coord(s: &str) -> Result<Coord, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected `x,y`, got `{s}`"))?;
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad coordinate `{s}`"));
    Ok(Coord::new(num(x)?, num(y)?))
}

fn parse_kind_count(s: &str) -> Result<(GeneratorKind, Option<usize>), String> {
    match s.split_once('=') {
        Some((k, n)) => Ok((
            parse_kind(k)?,
            Some(n.parse().map_err(|_| format!("bad count in `{s}`"))?),
        )),
        None => Ok((parse_kind(s)?, None)),
    }
}

fn gen_config(kind: GeneratorKind, size: (usize, usize), seed: u64, gen: &GenParamArgs) -> GenConfig {
    GenConfig {
        params: gen.params(),
        ..GenConfig::new(kind, size.0, size.1, seed)
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => io::stdout().lock().write_all(text.as_bytes()).context("writing stdout"),
    }
}

/// Writes every file or, on the first failure, removes the ones already written.
fn write_all_or_none(files: &[(&Path, String)]) -> Result<()> {
    for (i, (path, text)) in files.iter().enumerate() {
        if let Err(e) = fs::write(path, text) {
            for (done, _) in &files[..i] {
                let _ = fs::remove_file(done);
            }
            return Err(e).with_context(|| format!("writing {}", path.display()));
        }
    }
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let cfg = gen_config(args.kind, args.size, args.seed, &args.gen);
    let instances = match args.kind {
        GeneratorKind::SearchformerStyle => searchformer_batch(&cfg, args.count)?,
        _ => (0..args.count)
            .map(|i| generate_instance(&cfg.with_seed(derive_seed(args.seed, i as u64))))
            .collect::<Result<_, _>>()?,
    };
    let text: String = instances
        .iter()
        .map(|inst| InstanceRecord::from_instance(inst).to_line() + "\n")
        .collect();
    write_output(args.out.as_deref(), &text)?;
    eprintln!("generated {} {} instances", instances.len(), args.kind);
    Ok(())
}

fn solve(args: SolveArgs) -> Result<()> {
    let (w, h) = args.size;
    let grid = if let Some(problem) = &args.problem {
        let text = if problem == "-" {
            let mut buf = String::new();
            io::stdin().read_to_string(&mut buf).context("reading stdin")?;
            buf
        } else {
            problem.clone()
        };
        let seq: TokenSeq = text.parse()?;
        decode_problem(&seq, w, h)?
    } else {
        let kind = args.kind.ok_or_else(|| anyhow!("need --problem or --kind"))?;
        let cfg = gen_config(kind, args.size, args.seed, &args.gen);
        match (args.start, args.goal) {
            (Some(start), Some(goal)) => {
                let layout = generate_layout(&cfg, &mut rng_from_seed(cfg.seed))?;
                Grid::new(layout, start, goal)?
            }
            _ => generate_instance(&cfg)?.grid,
        }
    };
    let result = astar_trace(&grid)
        .map_err(|u| anyhow!("no path from start to goal ({} operations explored)", u.trace.len()))?;
    println!("{}", encode_problem(&grid));
    println!("{}", encode_trace(&result.trace));
    println!("{}", encode_plan(&result.plan));
    eprintln!("difficulty {}, plan length {}", result.difficulty, result.plan.len());
    Ok(())
}

fn dataset(args: DatasetArgs) -> Result<()> {
    let kinds = args
        .kinds
        .iter()
        .map(|&(kind, count)| KindCount {
            kind,
            count: count.unwrap_or(args.count),
        })
        .collect();
    let mut cfg = DatasetConfig::new(kinds, args.size.0, args.seed);
    cfg.height = args.size.1;
    cfg.shard_size = args.shard_size;
    cfg.params = args.gen.params();
    let workers = resolve_workers(args.workers);
    let mut manifest = build_dataset(&cfg, &args.out, workers)?;
    if let Some(per_kind) = args.holdout_per_kind {
        manifest = split_holdout(&args.out, per_kind, args.seed)?;
    }
    eprintln!(
        "wrote {} records in {} shards to {} ({} duplicates dropped, {} workers)",
        manifest.records,
        manifest.shards.len(),
        args.out.display(),
        manifest.duplicates_dropped,
        workers
    );
    println!("{}", manifest_digest(&args.out)?);
    Ok(())
}

fn split(args: SplitArgs) -> Result<()> {
    let manifest = split_holdout(&args.dataset, args.holdout_per_kind, args.seed)?;
    if let Some(s) = &manifest.split {
        let held: usize = s.holdout.values().map(Vec::len).sum();
        eprintln!("{} train, {} held out", s.train, held);
    }
    println!("{}", manifest_digest(&args.dataset)?);
    Ok(())
}

fn judge(args: JudgeArgs) -> Result<()> {
    let (_, records) = read_dataset(&args.dataset)?;
    let responses = read_responses(&args.responses)?;
    let by_id: std::collections::HashMap<&str, &InstanceRecord> = records.iter().map(|r| (r.id.as_str(), r)).collect();
    let opts = args.opts.options();
    let mut out = String::from("id\tkind\tx\ty\ttruncated\tverdict\n");
    for resp in &responses {
        let record = by_id
            .get(resp.id.as_str())
            .ok_or_else(|| anyhow!("response id {} has no matching record", resp.id))?;
        let p = judge_response(record, resp, &opts)?;
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            p.id, p.kind, p.x, p.y, p.truncated, p.verdict
        ));
    }
    write_output(None, &out)
}

fn summary_line(name: &str, s: &KindSummary) -> String {
    let corr = match &s.correlation {
        Some(c) => format!("pearson {:.3}, spearman {:.3}", c.pearson, c.spearman),
        None => format!(
            "correlation undefined: {}",
            s.correlation_undefined.as_deref().unwrap_or("?")
        ),
    };
    format!(
        "{name:>12}: n {:>6}, valid {:.3}, optimal {:.3}, truncated {:.3}, {corr}",
        s.count, s.valid_rate, s.optimal_rate, s.truncation_rate
    )
}

fn print_summary(report: &AnalysisReport) {
    for (kind, s) in &report.per_kind {
        eprintln!("{}", summary_line(kind.name(), s));
    }
    eprintln!("{}", summary_line("all", &report.global));
    if !report.missing_responses.is_empty() {
        eprintln!("{} records had no response", report.missing_responses.len());
    }
}

fn report(args: ReportArgs) -> Result<()> {
    let (_, records) = read_dataset(&args.dataset)?;
    let responses = read_responses(&args.responses)?;
    let report = build_report(&records, &responses, &args.opts.options())?;
    let mut files: Vec<(&Path, String)> = Vec::new();
    if let Some(csv) = &args.csv {
        files.push((csv, scatter_csv(&report)));
    }
    match &args.out {
        Some(out) => files.push((out, report.to_json())),
        None => write_output(None, &report.to_json())?,
    }
    write_all_or_none(&files)?;
    print_summary(&report);
    Ok(())
}

fn vocab(args: VocabArgs) -> Result<()> {
    let (w, h) = args.size;
    if w == 0 || h == 0 {
        bail!("grid dimensions must be positive");
    }
    let v = Vocabulary::new(w, h, args.max_cost.unwrap_or(w * h), args.extra_specials);
    write_output(args.out.as_deref(), &v.export_table())?;
    eprintln!("vocabulary size {}", v.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve(a),
        Command::Dataset(a) => dataset(a),
        Command::Split(a) => split(a),
        Command::Judge(a) => judge(a),
        Command::Report(a) => report(a),
        Command::Vocab(a) => vocab(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
