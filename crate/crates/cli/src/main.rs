mod commands;
mod io;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cgso::centrality::{Centrality, PageRankConfig};

use io::{InputHash, RunManifest, UsageError};

#[derive(Parser)]
#[command(name = "cgso", version, about = "Centrality graph shift operators: spectra, clustering and training")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a synthetic graph.
    #[command(subcommand)]
    Generate(GenerateCmd),
    /// Per-node centrality values.
    Centrality(CentralityArgs),
    /// Spectrum, moments and eigenvalue bounds of `V^e2 A V^e3`.
    Spectrum(SpectrumArgs),
    /// Exhaustive centrality-weighted Cheeger constants (small graphs).
    Cheeger(CheegerArgs),
    /// Spectral clustering with one exponent pair.
    Cluster(ClusterArgs),
    /// Clustering scores over an (e2, e3) grid.
    Heatmap(HeatmapArgs),
    /// Train a GCN whose operator has learnable parameters.
    Train(TrainArgs),
    /// Run the invariant checks and print a pass/fail table.
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
pub enum GenerateCmd {
    /// Barabási-Albert preferential attachment.
    Ba(BaArgs),
    /// Block model whose blocks are BA graphs joined by random edges.
    Sbbam(SbbamArgs),
}

#[derive(Args)]
pub struct OutArgs {
    /// Output directory; without it the main result goes to stdout.
    #[arg(short = 'o', long = "out")]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct GraphArgs {
    /// Edge list (`u v` per line, optional `# nodes N` header).
    #[arg(long)]
    pub graph: PathBuf,
    /// Keep every component instead of the largest one.
    #[arg(long)]
    pub whole_graph: bool,
}

#[derive(Args, Clone, Copy)]
pub struct CentralityOpts {
    #[arg(long, value_enum, default_value_t = CentralityKind::Degree)]
    pub centrality: CentralityKind,
    /// Walk length for `walks`.
    #[arg(long, default_value_t = 2)]
    pub walk_length: u32,
    /// Damping factor for `pagerank`.
    #[arg(long, default_value_t = 0.85)]
    pub damping: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CentralityKind {
    Degree,
    Kcore,
    Pagerank,
    Walks,
}

impl CentralityOpts {
    pub fn resolve(&self) -> Centrality {
        self.centrality.with(self.walk_length, self.damping)
    }
}

impl CentralityKind {
    pub fn with(self, walk_length: u32, damping: f64) -> Centrality {
        match self {
            CentralityKind::Degree => Centrality::Degree,
            CentralityKind::Kcore => Centrality::KCore,
            CentralityKind::Pagerank => Centrality::PageRank(PageRankConfig {
                damping,
                ..PageRankConfig::default()
            }),
            CentralityKind::Walks => Centrality::WalkCount { length: walk_length },
        }
    }
}

#[derive(Args)]
pub struct BaArgs {
    #[arg(long)]
    pub n: usize,
    /// Seed-graph nodes.
    #[arg(long)]
    pub n0: usize,
    /// Seed-graph edges.
    #[arg(long)]
    pub r0: usize,
    /// Edges per new node.
    #[arg(long)]
    pub r: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args)]
pub struct SbbamArgs {
    /// Block sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub blocks: Vec<usize>,
    /// Edges per new node in each block.
    #[arg(long, value_delimiter = ',', required = true)]
    pub r: Vec<usize>,
    /// Probability of each inter-block edge.
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub n0: Option<usize>,
    #[arg(long)]
    pub r0: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write noisy one-hot block features with this noise scale, and a
    /// random train/val/test split.
    #[arg(long)]
    pub features_sigma: Option<f64>,
    #[arg(long, default_value_t = 0.6)]
    pub train_frac: f64,
    #[arg(long, default_value_t = 0.2)]
    pub val_frac: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args)]
pub struct CentralityArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub centrality: CentralityOpts,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub centrality: CentralityOpts,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub e2: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub e3: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args)]
pub struct CheegerArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub centrality: CentralityOpts,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SelectionArg {
    Largest,
    Modulus,
}

impl From<SelectionArg> for cgso::eigen::Selection {
    fn from(s: SelectionArg) -> Self {
        match s {
            SelectionArg::Largest => cgso::eigen::Selection::Largest,
            SelectionArg::Modulus => cgso::eigen::Selection::LargestModulus,
        }
    }
}

#[derive(Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub centrality: CentralityOpts,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub e2: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub e3: f64,
    /// Number of clusters; defaults to the number of distinct labels.
    #[arg(long = "C", visible_alias = "clusters")]
    pub clusters: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Ground truth (`node,label`) for AMI/ARI.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SelectionArg::Largest)]
    pub selection: SelectionArg,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args)]
pub struct HeatmapArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub centrality: CentralityOpts,
    /// Ground truth (`node,label`).
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, default_value_t = -1.5, allow_negative_numbers = true)]
    pub e2_min: f64,
    #[arg(long, default_value_t = 1.5, allow_negative_numbers = true)]
    pub e2_max: f64,
    #[arg(long, default_value_t = -1.5, allow_negative_numbers = true)]
    pub e3_min: f64,
    #[arg(long, default_value_t = 1.5, allow_negative_numbers = true)]
    pub e3_max: f64,
    #[arg(long, default_value_t = 7)]
    pub steps: usize,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SelectionArg::Largest)]
    pub selection: SelectionArg,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// `node,x1,...,xd` rows.
    #[arg(long)]
    pub features: PathBuf,
    /// `node,label` rows.
    #[arg(long)]
    pub labels: PathBuf,
    /// `node,split` rows with split in {train, val, test}.
    #[arg(long)]
    pub mask: PathBuf,
    /// Training configuration (JSON); flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Operator initialization: `preset:NAME` or `params:FILE`.
    #[arg(long)]
    pub gso: Option<String>,
    /// Centrality of the operator; repeat for the combined two-term operator.
    #[arg(long = "centrality", value_enum)]
    pub centralities: Vec<CentralityKind>,
    #[arg(long, default_value_t = 2)]
    pub walk_length: u32,
    #[arg(long, default_value_t = 0.85)]
    pub damping: f64,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Train with the simple-graph-convolution model using this many hops.
    #[arg(long)]
    pub sgc_hops: Option<usize>,
    /// Keep the operator parameters fixed at their initialization.
    #[arg(long)]
    pub freeze_operator: bool,
    /// Record Dirichlet energies of the selected model's layers.
    #[arg(long)]
    pub dirichlet: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Suite {
    Spectral,
    Lemma,
    Gradients,
    Clustering,
    All,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random instances per check.
    #[arg(long, default_value_t = 20)]
    pub cases: usize,
}

/// What a command produced.
pub struct RunOutput {
    /// Files for the output directory; the first is printed when there is none.
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: String,
    /// Set when the command ran but its result is a failure; outputs are
    /// still written and the exit code is 2.
    pub failure: Option<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub inputs: Vec<PathBuf>,
}

fn dispatch(command: Command) -> anyhow::Result<(RunOutput, Option<PathBuf>)> {
    Ok(match command {
        Command::Generate(GenerateCmd::Ba(a)) => (commands::generate_ba(&a)?, a.out.out),
        Command::Generate(GenerateCmd::Sbbam(a)) => (commands::generate_sbbam(&a)?, a.out.out),
        Command::Centrality(a) => (commands::centrality(&a)?, a.out.out),
        Command::Spectrum(a) => (commands::spectrum(&a)?, a.out.out),
        Command::Cheeger(a) => (commands::cheeger(&a)?, a.out.out),
        Command::Cluster(a) => (commands::cluster(&a)?, a.out.out),
        Command::Heatmap(a) => (commands::heatmap(&a)?, a.out.out),
        Command::Train(a) => (commands::train(&a)?, a.out.out),
        Command::Verify(a) => (verify::run(&a)?, None),
    })
}

fn run(command: Command) -> anyhow::Result<()> {
    let start = Instant::now();
    let (output, out_dir) = dispatch(command)?;
    match out_dir {
        Some(dir) => {
            let written = io::write_outputs(&dir, &output.files)?;
            let inputs = output
                .inputs
                .iter()
                .map(|p| {
                    Ok(InputHash {
                        path: p.display().to_string(),
                        sha256: io::sha256_file(p)?,
                    })
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            let manifest = RunManifest {
                command_line: std::env::args().collect(),
                version: env!("CARGO_PKG_VERSION"),
                config: output.config,
                seed: output.seed,
                inputs,
                outputs: written.iter().map(|p| p.display().to_string()).collect(),
                wall_clock_seconds: start.elapsed().as_secs_f64(),
            };
            io::write_atomic(&dir.join("manifest.json"), &serde_json::to_vec_pretty(&manifest)?)?;
            eprintln!("{}", output.summary);
            eprintln!("wrote {} files to {}", written.len() + 1, dir.display());
        }
        None => {
            if let Some((_, bytes)) = output.files.first() {
                print!("{}", String::from_utf8_lossy(bytes));
            }
            if !output.summary.is_empty() {
                eprintln!("{}", output.summary);
            }
        }
    }
    match output.failure {
        Some(msg) => Err(anyhow::anyhow!(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
