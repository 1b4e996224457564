//! Command-line front end. Exit codes: 0 success, 1 usage error, 2 data
//! error, 3 backend error.

use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cot::{build_sampled_training_set, embedders, mine_examples, CotError, Embedder, EmbedderConfig, ExampleSet};
use crate::cot::mining::MiningParams;
use crate::llm::{build_backend, BackendConfig, LlmBackend};
use crate::memory_map::{render_dot, MapExport};
use crate::metrics::{score_episode, MetricsReport};
use crate::pipeline::{replay_map, PipelineError, ResultsFile, RunConfig, Runner};
use crate::prompt::{PromptManager, PromptTemplates};
use crate::scene::{load_episodes, Episode, Scene, SceneSet};
use crate::task::TaskMode;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_BACKEND: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "vlnav", version, about = "Topological-memory LLM navigation agent")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run episodes and print the metrics table.
    Run(RunArgs),
    /// Mine chain-of-thought examples along ground-truth paths.
    Mine(MineArgs),
    /// Re-score a results file.
    Eval(EvalArgs),
    /// Export the memory map of one episode as DOT or JSON.
    RenderMap(RenderMapArgs),
    /// Check scene, episode and example files.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct BackendArgs {
    /// remote, scripted or oracle.
    #[arg(long)]
    backend: String,
    /// JSON backend config; `--backend` overrides its kind.
    #[arg(long)]
    backend_config: Option<PathBuf>,
    /// Script file for the scripted backend.
    #[arg(long)]
    script: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EmbedArgs {
    #[arg(long, default_value = "trigram")]
    embedder: String,
    /// JSON config for the remote embedder.
    #[arg(long)]
    embedder_config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, required = true)]
    scene: Vec<PathBuf>,
    #[arg(long)]
    episodes: PathBuf,
    #[arg(long)]
    examples: Option<PathBuf>,
    #[command(flatten)]
    backend: BackendArgs,
    #[command(flatten)]
    embed: EmbedArgs,
    #[arg(long, default_value = "reverie")]
    mode: TaskMode,
    #[arg(long, default_value_t = 15)]
    max_steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Demonstration query: room-type, instruction or none.
    #[arg(long, default_value = "room-type")]
    query: String,
    /// Truncate the demonstration to its first N steps.
    #[arg(long)]
    demo_steps: Option<usize>,
    #[arg(long)]
    cluster_k: Option<usize>,
    /// Directory overriding the built-in prompt templates.
    #[arg(long)]
    templates: Option<PathBuf>,
    #[arg(long)]
    keep_prompts: bool,
    #[arg(long)]
    debug_requery: bool,
    /// Also write the metrics report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MineArgs {
    #[arg(long, required = true)]
    scene: Vec<PathBuf>,
    #[arg(long)]
    episodes: PathBuf,
    #[command(flatten)]
    backend: BackendArgs,
    #[command(flatten)]
    embed: EmbedArgs,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    cluster_k: Option<usize>,
    #[arg(long)]
    templates: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    results: PathBuf,
    #[arg(long)]
    episodes: PathBuf,
    #[arg(long, required = true)]
    scene: Vec<PathBuf>,
    /// Defaults to the mode recorded in the results header.
    #[arg(long)]
    mode: Option<TaskMode>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MapFormat {
    Dot,
    Json,
}

#[derive(Debug, Args)]
struct RenderMapArgs {
    #[arg(long)]
    results: PathBuf,
    #[arg(long, required = true)]
    scene: Vec<PathBuf>,
    #[arg(long)]
    episode_id: String,
    /// Decision step to replay up to; the final map when omitted.
    #[arg(long)]
    step: Option<usize>,
    #[arg(long, value_enum, default_value = "dot")]
    format: MapFormat,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long, required = true)]
    scene: Vec<PathBuf>,
    #[arg(long)]
    episodes: Option<PathBuf>,
    #[arg(long)]
    examples: Option<PathBuf>,
}

struct Failure {
    code: i32,
    message: String,
}

fn data(e: impl Display) -> Failure {
    Failure { code: EXIT_DATA, message: e.to_string() }
}

fn backend(e: impl Display) -> Failure {
    Failure { code: EXIT_BACKEND, message: e.to_string() }
}

fn cot_failure(e: CotError) -> Failure {
    match e {
        CotError::Llm { .. } | CotError::Embed(_) => backend(e),
        _ => data(e),
    }
}

type Outcome = Result<(), Failure>;

/// Parses `args` (including the program name) and executes the command.
/// Returns the process exit code.
pub fn run(args: impl IntoIterator<Item = impl Into<OsString> + Clone>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a, out, err),
        Command::Mine(a) => cmd_mine(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::RenderMap(a) => cmd_render_map(a, out),
        Command::Validate(a) => cmd_validate(a, out),
    };
    match outcome {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn load_scenes(paths: &[PathBuf]) -> Result<SceneSet, Failure> {
    let scenes = paths.iter().map(Scene::load).collect::<Result<Vec<_>, _>>().map_err(data)?;
    SceneSet::new(scenes).map_err(data)
}

fn load_nonempty_episodes(path: &Path) -> Result<Vec<Episode>, Failure> {
    let episodes = load_episodes(path).map_err(data)?;
    if episodes.is_empty() {
        return Err(data(format!("{}: no episodes", path.display())));
    }
    Ok(episodes)
}

fn backend_config(args: &BackendArgs) -> Result<BackendConfig, Failure> {
    let mut cfg = match &args.backend_config {
        Some(p) => BackendConfig::load(p).map_err(backend)?,
        None => BackendConfig::new(&args.backend),
    };
    cfg.kind = args.backend.clone();
    if let Some(script) = &args.script {
        cfg.script_path = Some(script.display().to_string());
    }
    Ok(cfg)
}

fn build_embedder(args: &EmbedArgs) -> Result<Arc<dyn Embedder>, Failure> {
    let cfg: EmbedderConfig = match &args.embedder_config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| data(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| data(format!("{}: {e}", p.display())))?
        }
        None => serde_json::from_str("{}").expect("defaults"),
    };
    let ctor = *embedders().get(&args.embedder).map_err(|e| Failure { code: EXIT_USAGE, message: e.to_string() })?;
    ctor(&cfg).map_err(backend)
}

fn templates(dir: &Option<PathBuf>) -> Result<PromptTemplates, Failure> {
    match dir {
        Some(d) => PromptTemplates::load_dir(d).map_err(data),
        None => Ok(PromptTemplates::builtin()),
    }
}

fn write_file(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn score_all(results: &ResultsFile, episodes: &[Episode], scenes: &SceneSet, mode: TaskMode) -> Result<MetricsReport, Failure> {
    if results.results.is_empty() {
        return Err(data("results file has no episodes"));
    }
    let mut per_episode = Vec::with_capacity(results.results.len());
    for r in &results.results {
        let ep = episodes
            .iter()
            .find(|e| e.episode_id == r.episode_id)
            .ok_or_else(|| data(format!("result for unknown episode {}", r.episode_id)))?;
        let scene = scenes.for_episode(ep).map_err(data)?;
        per_episode.push(score_episode(ep, r, scene, mode).map_err(data)?);
    }
    MetricsReport::new(mode, per_episode).map_err(data)
}

fn cmd_run(a: RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let scenes = load_scenes(&a.scene)?;
    let episodes = load_nonempty_episodes(&a.episodes)?;
    for ep in &episodes {
        ep.validate(scenes.for_episode(ep).map_err(data)?).map_err(data)?;
    }
    let mut demo_query = a.query.clone();
    let set = match &a.examples {
        Some(p) => ExampleSet::load(p).map_err(data)?,
        None => {
            if demo_query != "none" {
                let _ = writeln!(err, "notice: no --examples given; running with demonstrations disabled");
                demo_query = "none".into();
            }
            ExampleSet::new("none", Vec::new())
        }
    };

    let backend_cfg = backend_config(&a.backend)?;
    let llm: Arc<dyn LlmBackend> = build_backend(&backend_cfg).map_err(backend)?;
    let embedder = build_embedder(&a.embed)?;
    if a.examples.is_some() && set.embedder_id != embedder.id() {
        return Err(data(format!(
            "example set was built with embedder `{}` but `{}` is selected",
            set.embedder_id,
            embedder.id()
        )));
    }
    let mut cfg = RunConfig::new(backend_cfg);
    cfg.max_episode_length = a.max_steps;
    cfg.task_mode = a.mode;
    cfg.demo_query = demo_query;
    cfg.demo_steps = a.demo_steps;
    cfg.embedder_id = a.embed.embedder.clone();
    cfg.seed = a.seed;
    cfg.cluster_k = a.cluster_k;
    cfg.keep_prompts = a.keep_prompts;
    cfg.debug_requery = a.debug_requery;
    let prompts = PromptManager::new(templates(&a.templates)?, cfg.task_mode, cfg.char_budget);
    let runner = Runner::new(cfg.clone(), llm, embedder, prompts).map_err(|e| match e {
        PipelineError::Config(_) => Failure { code: EXIT_USAGE, message: e.to_string() },
        other => data(other),
    })?;

    let results = ResultsFile::new(&cfg, &scenes, runner.run_suite(&scenes, &episodes, &set, a.jobs.max(1)));
    results.save(&a.out).map_err(data)?;
    let failed: Vec<String> = results
        .results
        .iter()
        .flat_map(|r| r.degraded_flags.iter().filter(|f| f.starts_with("error: ")).map(move |f| format!("{}: {f}", r.episode_id)))
        .collect();
    for f in &failed {
        let _ = writeln!(err, "{f}");
    }
    let report = score_all(&results, &episodes, &scenes, cfg.task_mode)?;
    let _ = write!(out, "{}", report.render_table());
    if let Some(p) = &a.report {
        write_file(p, &report.to_json_string())?;
    }
    if !failed.is_empty() {
        return Err(backend(format!("{} episode(s) failed", failed.len())));
    }
    Ok(())
}

fn cmd_mine(a: MineArgs, out: &mut dyn Write) -> Outcome {
    let scenes = load_scenes(&a.scene)?;
    let episodes = load_nonempty_episodes(&a.episodes)?;
    for ep in &episodes {
        ep.validate(scenes.for_episode(ep).map_err(data)?).map_err(data)?;
    }
    let sampled = build_sampled_training_set(&episodes, &scenes).map_err(cot_failure)?;
    let llm = build_backend(&backend_config(&a.backend)?).map_err(backend)?;
    let embedder = build_embedder(&a.embed)?;
    let prompts = PromptManager::new(templates(&a.templates)?, TaskMode::Reverie, crate::prompt::DEFAULT_CHAR_BUDGET);
    let params = MiningParams { embedder_id: embedder.id(), cluster_k: a.cluster_k, seed: a.seed };
    let set = mine_examples(&sampled, &scenes, llm.as_ref(), &prompts, &params).map_err(cot_failure)?;
    set.save(&a.out).map_err(data)?;
    let _ = writeln!(out, "mined {} example(s)", set.len());
    for ex in &set.examples {
        let _ = writeln!(out, "{}\t1\t{}", ex.room_type, ex.example_id);
    }
    Ok(())
}

fn cmd_eval(a: EvalArgs, out: &mut dyn Write) -> Outcome {
    let results = ResultsFile::load(&a.results).map_err(data)?;
    let scenes = load_scenes(&a.scene)?;
    let episodes = load_episodes(&a.episodes).map_err(data)?;
    let mode = a.mode.unwrap_or(results.header.config.task_mode);
    let report = score_all(&results, &episodes, &scenes, mode)?;
    let _ = write!(out, "{}", report.render_table());
    if let Some(p) = &a.report {
        write_file(p, &report.to_json_string())?;
    }
    Ok(())
}

fn cmd_render_map(a: RenderMapArgs, out: &mut dyn Write) -> Outcome {
    let results = ResultsFile::load(&a.results).map_err(data)?;
    let scenes = load_scenes(&a.scene)?;
    let result = results
        .results
        .iter()
        .find(|r| r.episode_id == a.episode_id)
        .ok_or_else(|| data(format!("episode {} not in results", a.episode_id)))?;
    let scene = match scenes.scenes() {
        [only] => only,
        many => many
            .iter()
            .find(|s| result.trajectory.first().is_some_and(|start| s.contains(start)))
            .ok_or_else(|| data(format!("no scene contains episode {}", a.episode_id)))?,
    };
    let map = replay_map(scene, result, a.step).map_err(data)?;
    let cfg = &results.header.config;
    let clusters = map.clusters(cfg.cluster_k, cfg.seed);
    let text = match a.format {
        MapFormat::Dot => render_dot(&map, &clusters),
        MapFormat::Json => MapExport::from_map(&map, &clusters).to_json_string(),
    };
    match &a.out {
        Some(p) => write_file(p, &text),
        None => {
            let _ = write!(out, "{text}");
            Ok(())
        }
    }
}

fn cmd_validate(a: ValidateArgs, out: &mut dyn Write) -> Outcome {
    let scenes = load_scenes(&a.scene)?;
    for s in scenes.scenes() {
        let _ = writeln!(out, "scene {}: {} viewpoints, {} edges", s.scene_id(), s.viewpoints().len(), s.edges().len());
    }
    if let Some(p) = &a.episodes {
        let episodes = load_episodes(p).map_err(data)?;
        for ep in &episodes {
            let scene = scenes.for_episode(ep).map_err(data)?;
            ep.validate(scene).map_err(data)?;
        }
        let _ = writeln!(out, "episodes: {} ok", episodes.len());
    }
    if let Some(p) = &a.examples {
        let set = ExampleSet::load(p).map_err(data)?;
        let _ = writeln!(out, "examples: {} ok ({})", set.len(), set.embedder_id);
    }
    Ok(())
}
