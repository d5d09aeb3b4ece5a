//! The `ingest`, `synth`, `train` and `evaluate` subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;

use entrec_core::entropy::{difference_score, is_valuable, SimilarityConfig};
use entrec_core::eval::{self, EvalConfig, EvalReport};
use entrec_core::kb::{build_knowledge_base_from_neighbors, build_knowledge_base_with};
use entrec_core::logparse::{
    decode_log_bytes, default_extensions, filter_page_requests, parse_log_text, LogFormat,
};
use entrec_core::matrix::{build_pv_matrix, PageViewMatrix};
use entrec_core::session::{sessionize, sessions_tsv, SessionizeConfig};
use entrec_core::synth::{generate_synthetic, ground_truth_tsv, SynthConfig};
use entrec_core::trust::{
    self, select_trustworthy, select_valuable, trust_records_tsv, TrustedNeighbor,
};

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// Web access log (Common or Combined Log Format)
    pub log: PathBuf,
    /// Output matrix file (PVMATRIX v1)
    #[arg(short, long, env = "ENTREC_OUT")]
    pub out: PathBuf,
    /// Log format: auto, common or combined
    #[arg(long, default_value = "auto")]
    pub format: LogFormat,
    /// Session timeout in minutes
    #[arg(long, default_value_t = 30)]
    pub timeout: u64,
    /// Maximum session duration in minutes; longer sessions are dropped
    #[arg(long, default_value_t = 120)]
    pub max_duration: u64,
    /// Drop sessions that visited fewer pages than this
    #[arg(long, default_value_t = 5)]
    pub min_pages: usize,
    /// Drop URLs visited in fewer sessions than this
    #[arg(long, default_value_t = 3)]
    pub min_url_sessions: usize,
    /// Asset extensions to exclude (without dots)
    #[arg(long, value_delimiter = ',', default_values_t = default_extensions())]
    pub exclude_ext: Vec<String>,
    /// Also dump the session stream as TSV
    #[arg(long)]
    pub sessions_out: Option<PathBuf>,
    /// Abort on the first malformed log line instead of skipping it
    #[arg(long)]
    pub strict: bool,
    /// Shard work across threads (output is identical either way)
    #[arg(long)]
    pub parallel: bool,
}

pub fn ingest(args: &IngestArgs) -> Result<()> {
    let bytes = fs::read(&args.log).with_context(|| format!("reading {}", args.log.display()))?;
    let text = decode_log_bytes(bytes);
    let (records, skipped) = parse_log_text(&text, args.format, args.strict)?;
    if skipped > 0 {
        eprintln!("warning: skipped {skipped} malformed line(s)");
    }
    let kept = filter_page_requests(records, &args.exclude_ext);
    let cfg = SessionizeConfig {
        timeout_secs: args.timeout as i64 * 60,
        max_duration_secs: args.max_duration as i64 * 60,
    };
    let sessions = sessionize(&kept, &cfg, args.parallel);
    if let Some(path) = &args.sessions_out {
        write_file(path, &sessions_tsv(&sessions))?;
    }
    let matrix = build_pv_matrix(&sessions)?;
    let pruned = matrix.prune(args.min_pages, args.min_url_sessions)?;
    write_file(&args.out, &pruned.to_tsv())?;
    let total_views: usize = (0..pruned.n_users()).map(|u| pruned.row_sum(u)).sum();
    println!("sessions kept\t{}", pruned.n_users());
    println!("pages kept\t{}", pruned.n_pages());
    println!("average page view count\t{:.1}", total_views as f64 / pruned.n_users() as f64);
    Ok(())
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Output matrix file (PVMATRIX v1)
    #[arg(short, long, env = "ENTREC_OUT")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub groups: usize,
    #[arg(long, default_value_t = 61)]
    pub users_per_group: usize,
    #[arg(long, default_value_t = 22)]
    pub pages_per_group: usize,
    /// Probability of viewing an own-group page
    #[arg(long, default_value_t = 0.95)]
    pub p_in: f64,
    /// Probability of viewing any other page
    #[arg(long, default_value_t = 0.0)]
    pub p_out: f64,
    /// Fraction of users whose interest switches group in the level-II block
    #[arg(long, default_value_t = 0.0)]
    pub drift: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Ground-truth sidecar path (defaults to <out>.truth.tsv)
    #[arg(long)]
    pub truth_out: Option<PathBuf>,
    #[arg(long)]
    pub parallel: bool,
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    let cfg = SynthConfig {
        groups: args.groups,
        users_per_group: args.users_per_group,
        pages_per_group: args.pages_per_group,
        p_in: args.p_in,
        p_out: args.p_out,
        drift_fraction: args.drift,
        seed: args.seed,
    };
    let corpus = generate_synthetic(&cfg, args.parallel)?;
    write_file(&args.out, &corpus.matrix.to_tsv())?;
    let truth_path = args
        .truth_out
        .clone()
        .unwrap_or_else(|| sibling_with_suffix(&args.out, ".truth.tsv"));
    write_file(&truth_path, &ground_truth_tsv(&corpus))?;
    let drifted = corpus.users.iter().filter(|u| u.drift_group.is_some()).count();
    println!("users\t{}", corpus.matrix.n_users());
    println!("pages\t{}", corpus.matrix.n_pages());
    println!("drifted users\t{drifted}");
    Ok(())
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Input matrix file (PVMATRIX v1)
    pub matrix: PathBuf,
    /// Output knowledge-base file (ENTROPY-REC-KB v1)
    #[arg(short, long, env = "ENTREC_OUT")]
    pub out: PathBuf,
    /// Similarity threshold for the level-I gate
    #[arg(long, default_value_t = 0.8)]
    pub beta: f64,
    /// Leading fraction of users used for training
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    /// Trust-selection strategy
    #[arg(long, default_value = "two-level")]
    pub strategy: String,
    /// Also export the trust records as TSV (two-level strategy only)
    #[arg(long)]
    pub trust_out: Option<PathBuf>,
    #[arg(long)]
    pub parallel: bool,
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let matrix = read_matrix(&args.matrix)?;
    let (train, _test) = matrix.split_train_test(args.train_fraction)?;
    let config = SimilarityConfig::new(args.beta)?;
    let strategy = trust::strategy(&args.strategy)?;

    let kb = if args.strategy == "two-level" {
        // Run the two levels explicitly so the valuable/trustworthy counts
        // per user can be reported, then reuse the records for the build.
        let (level1, level2) = train.split_levels()?;
        let mut neighbor_lists = Vec::with_capacity(train.n_users());
        let mut records_per_user = Vec::with_capacity(train.n_users());
        for t in 0..train.n_users() {
            let valuable = select_valuable(&level1, t, args.beta)?;
            let trusted = select_trustworthy(&valuable, &level2, t)?;
            println!("{}\t{}\t{}", train.users()[t], valuable.len(), trusted.len());
            neighbor_lists.push(trusted.iter().map(TrustedNeighbor::from).collect());
            records_per_user.push(trusted);
        }
        if let Some(path) = &args.trust_out {
            write_file(path, &trust_records_tsv(&train, &records_per_user))?;
        }
        build_knowledge_base_from_neighbors(&train, &config, neighbor_lists, args.parallel)?
    } else {
        if args.trust_out.is_some() {
            bail!("--trust-out is only available for the two-level strategy");
        }
        let neighbor_lists = strategy.neighbors_for_all(&train, args.beta)?;
        for t in 0..train.n_users() {
            let valuable = (0..train.n_users())
                .filter(|&x| x != t)
                .filter(|&x| {
                    difference_score(train.row(t), train.row(x))
                        .map(|d| is_valuable(&d, args.beta))
                        .unwrap_or(false)
                })
                .count();
            println!("{}\t{}\t{}", train.users()[t], valuable, neighbor_lists[t].len());
        }
        build_knowledge_base_from_neighbors(&train, &config, neighbor_lists, args.parallel)?
    };
    write_file(&args.out, &kb.to_tsv())?;
    println!("knowledge base\t{} users\t{} pages", kb.entries.len(), kb.pages.len());
    Ok(())
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Input matrix file (PVMATRIX v1)
    pub matrix: PathBuf,
    /// Top-N sizes to score
    #[arg(long, value_delimiter = ',', default_values_t = vec![2, 3, 5, 10])]
    pub top_n: Vec<usize>,
    /// Number of leading page columns treated as already visited
    #[arg(long, default_value_t = 6)]
    pub visited_prefix: usize,
    /// Similarity threshold for matching test users to training users
    #[arg(long, default_value_t = 0.5)]
    pub eval_beta: f64,
    /// Similarity threshold used when building the knowledge bases
    #[arg(long, default_value_t = 0.8)]
    pub train_beta: f64,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    /// Also evaluate the single-level baseline side by side
    #[arg(long)]
    pub compare_sle: bool,
    #[arg(long, default_value = "report.tsv")]
    pub report_out: PathBuf,
    #[arg(long, default_value = "plot.csv")]
    pub plot_out: PathBuf,
    #[arg(long)]
    pub parallel: bool,
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let matrix = read_matrix(&args.matrix)?;
    let (train, test) = matrix.split_train_test(args.train_fraction)?;
    let cfg = EvalConfig {
        top_n_sizes: args.top_n.clone(),
        visited_prefix: args.visited_prefix,
        eval_beta: args.eval_beta,
        train_beta: args.train_beta,
    };
    let reports: Vec<EvalReport> = if args.compare_sle {
        let (proposed, sle) = eval::compare_sle(&train, &test, &cfg, args.parallel)?;
        vec![proposed, sle]
    } else {
        let sim = SimilarityConfig::new(cfg.train_beta)?;
        let kb = build_knowledge_base_with(
            &train,
            &sim,
            trust::strategy("two-level")?.as_ref(),
            args.parallel,
        )?;
        vec![eval::run_offline_eval(&train, &test, &kb, &cfg, "proposed", args.parallel)?]
    };
    let refs: Vec<&EvalReport> = reports.iter().collect();
    write_file(&args.report_out, &eval::report_tsv(&refs))?;
    write_file(&args.plot_out, &eval::plot_csv(&refs))?;
    for report in &reports {
        for row in &report.rows {
            let mae = row.mae.map_or("no_predictions".to_string(), |m| format!("{m:.4}"));
            println!(
                "{}\ttop-{}\tmae {}\tprecision {:.4}\trecall {:.4}",
                report.system, row.n, mae, row.precision, row.recall
            );
        }
    }
    Ok(())
}

fn read_matrix(path: &Path) -> Result<PageViewMatrix> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(PageViewMatrix::from_tsv(&text)?)
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

fn sibling_with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}{suffix}"))
}
