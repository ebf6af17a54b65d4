//! `ctcseg`: segment, simulate, evaluate and benchmark CTC blank-run
//! speech segmentation.

mod bench;
mod eval;
mod segment;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ctcseg::SegmenterConfig;

#[derive(Parser)]
#[command(name = "ctcseg", about = "Speech segmentation from CTC blank runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment a CTCP posterior stream.
    Segment(segment::SegmentArgs),
    /// Write a synthetic CTCP stream (and optionally audio) for an annotation.
    Simulate(simulate::SimulateArgs),
    /// Score segments against a reference annotation.
    Eval(eval::EvalArgs),
    /// Measure the real-time factor.
    Bench(bench::BenchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Profile {
    Csj,
    TedBi,
    TedUni,
}

impl Profile {
    /// (V, m_s, m_e)
    fn params(self) -> (usize, usize, usize) {
        match self {
            Profile::Csj => (16, 2, 3),
            Profile::TedBi => (16, 4, 10),
            Profile::TedUni => (16, 10, 2),
        }
    }
}

/// Segmenter flags shared by `segment`, `eval` and `bench`.
#[derive(Args, Clone, Debug)]
pub struct SegmenterArgs {
    /// Named hyperparameter set; explicit flags below override it.
    #[arg(long, value_enum, default_value = "csj")]
    profile: Profile,
    /// Blank-run threshold V, in subsampled frames.
    #[arg(short = 'V', long = "threshold")]
    threshold: Option<usize>,
    /// Onset margin m_s, in subsampled frames.
    #[arg(long)]
    onset_margin: Option<usize>,
    /// Offset margin m_e, in subsampled frames.
    #[arg(long)]
    offset_margin: Option<usize>,
    /// Blank label id; defaults to the one in the CTCP header.
    #[arg(long)]
    blank_id: Option<u32>,
    /// Reject segments whose token/encoded length ratio is at or below this.
    #[arg(long, default_value_t = 0.1)]
    min_len_ratio: f64,
}

impl SegmenterArgs {
    pub fn config(
        &self,
        subsample_factor: usize,
        header_blank: u32,
    ) -> anyhow::Result<SegmenterConfig> {
        let (v, ms, me) = self.profile.params();
        Ok(SegmenterConfig::new(
            self.threshold.unwrap_or(v),
            self.onset_margin.unwrap_or(ms),
            self.offset_margin.unwrap_or(me),
            subsample_factor,
            self.blank_id.unwrap_or(header_blank),
            self.min_len_ratio,
        )?)
    }
}

/// Exactly one of `--input PATH` or `--stream` (stdin).
#[derive(Args, Clone, Debug)]
#[group(required = true, multiple = false)]
pub struct InputArgs {
    /// CTCP file to read.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Read CTCP from stdin.
    #[arg(long)]
    stream: bool,
}

impl InputArgs {
    pub fn open(&self) -> anyhow::Result<Box<dyn std::io::Read>> {
        use anyhow::Context;
        Ok(match &self.input {
            Some(p) => Box::new(std::io::BufReader::new(
                std::fs::File::open(p).with_context(|| format!("opening {}", p.display()))?,
            )),
            None => Box::new(std::io::BufReader::new(std::io::stdin().lock())),
        })
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CTC_SEG_LOG", "warn")).init();
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Segment(a) => segment::run(&a),
        Command::Simulate(a) => simulate::run(&a),
        Command::Eval(a) => eval::run(&a),
        Command::Bench(a) => bench::run(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
