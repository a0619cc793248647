use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cuisto_cli::pipeline::{self, FuseMode, RunKind, RunSpec};
use cuisto_cli::{CliError, Overrides, PipelineConfig, Task};

#[derive(Parser)]
#[command(name = "cuisto", version, about = "Recipe classification and ingredient extraction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Pipeline configuration (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Overrides `task`.
    #[arg(long, value_enum)]
    task: Option<Task>,
    /// Overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `paths.train`.
    #[arg(long)]
    train: Option<PathBuf>,
    /// Overrides `paths.test`.
    #[arg(long)]
    test: Option<PathBuf>,
    /// Overrides `paths.output`.
    #[arg(long)]
    output: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<PipelineConfig, CliError> {
        PipelineConfig::load(
            &self.config,
            &Overrides {
                task: self.task,
                seed: self.seed,
                train: self.train.clone(),
                test: self.test.clone(),
                output: self.output.clone(),
            },
        )
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// run1 single method, run2 ELECTRE, run3 linear.
    Paper,
}

#[derive(Subcommand)]
enum Command {
    /// Train every model for the task and write the manifest.
    Train(Common),
    /// Write per-method score files for the test corpus.
    Classify(Common),
    /// Combine score files into final-label runs.
    Fuse {
        #[command(flatten)]
        common: Common,
        /// Predefined run set; ignores --mode/--methods/--name.
        #[arg(long, value_enum)]
        runs: Option<Preset>,
        #[arg(long, value_enum, default_value = "electre")]
        mode: FuseMode,
        /// Comma-separated methods among boost, svm, cosine, hierarchical.
        #[arg(long, value_delimiter = ',', default_value = "boost,svm,cosine,hierarchical")]
        methods: Vec<String>,
        /// Run file name, written to runs/<name>.tsv.
        #[arg(long, default_value = "fused")]
        name: String,
    },
    /// Write the ranked ingredient run for the test corpus.
    Extract(Common),
    /// Score a run file against the test gold.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Run file to evaluate, or the name of a run under `runs/`.
        #[arg(long)]
        run: PathBuf,
    },
    /// Sweep the Gini threshold and the ELECTRE grid on the dev split.
    Sweep(Common),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train(c) => {
            let config = c.load()?;
            let m = pipeline::cmd_train(&config)?;
            let models: Vec<&str> = m.models().collect();
            println!(
                "trained {} model(s) [{}] in {}",
                models.len(),
                models.join(", "),
                config.output_dir().display()
            );
        }
        Command::Classify(c) => {
            for path in pipeline::cmd_classify(&c.load()?)? {
                println!("{}", path.display());
            }
        }
        Command::Fuse {
            common,
            runs,
            mode,
            methods,
            name,
        } => {
            let config = common.load()?;
            let specs = match runs {
                Some(Preset::Paper) => pipeline::paper_runs(config.task),
                None => vec![RunSpec {
                    name,
                    kind: RunKind::Fused(mode, methods),
                }],
            };
            for (path, fallbacks) in pipeline::cmd_fuse(&config, &specs)? {
                println!("{}\telectre_fallbacks={fallbacks}", path.display());
            }
        }
        Command::Extract(c) => {
            println!("{}", pipeline::cmd_extract(&c.load()?)?.display());
        }
        Command::Evaluate { common, run } => {
            print!("{}", pipeline::cmd_evaluate(&common.load()?, &run)?.text);
        }
        Command::Sweep(c) => {
            let r = pipeline::cmd_sweep(&c.load()?)?;
            print!("{}\n{}", r.gini, r.electre);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("invalid arguments");
            let e = CliError::config(format!("usage: {}", first.trim_start_matches("error: ")));
            eprintln!("{}", e.line());
            return ExitCode::from(e.code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.code() as u8)
        }
    }
}
