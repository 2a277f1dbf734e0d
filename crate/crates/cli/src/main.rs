use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use linelayout_cli::commands;
use linelayout_cli::config::{parse_size, OutputFormat, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "linelayout", version, about = "Text-line region annotations and instance-segmentation evaluation")]
struct Cli {
    /// `key = value` file applied before command-line flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Turn a directory of label images into polygon annotations.
    Annotate(AnnotateArgs),
    /// Mask AP of a prediction file against a ground-truth file.
    Evaluate(EvaluateArgs),
    /// Write seeded synthetic label pages.
    Synth(SynthArgs),
    /// Seeded numerical checks of the dynamic head.
    HeadCheck(HeadCheckArgs),
}

#[derive(Args)]
struct AnnotateArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dilation iterations.
    #[arg(long)]
    p: Option<usize>,
    /// Erosion iterations.
    #[arg(long)]
    q: Option<usize>,
    /// Skip the opening and small-component filter.
    #[arg(long)]
    no_opening: bool,
    /// Target size as WxH.
    #[arg(long, value_parser = parse_size)]
    size: Option<(usize, usize)>,
    /// coco, labelme or both.
    #[arg(long)]
    format: Option<OutputFormat>,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    gt: Option<PathBuf>,
    #[arg(long)]
    pred: Option<PathBuf>,
    /// Report file; `.json` and `.csv` pick those formats, anything else a table.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    max_dets: Option<usize>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_size)]
    size: Option<(usize, usize)>,
}

#[derive(Args)]
struct HeadCheckArgs {
    #[arg(long)]
    seed: Option<u64>,
}

fn overrides(cmd: &Command) -> Overrides {
    match cmd {
        Command::Annotate(a) => Overrides {
            input: a.input.clone(),
            out: a.out.clone(),
            p: a.p,
            q: a.q,
            opening: a.no_opening.then_some(false),
            size: a.size,
            format: a.format,
            jobs: a.jobs,
            ..Default::default()
        },
        Command::Evaluate(e) => Overrides {
            gt: e.gt.clone(),
            pred: e.pred.clone(),
            report: e.report.clone(),
            max_dets: e.max_dets,
            ..Default::default()
        },
        Command::Synth(s) => {
            Overrides { out: s.out.clone(), count: s.count, seed: s.seed, size: s.size, ..Default::default() }
        }
        Command::HeadCheck(h) => Overrides { seed: h.seed, ..Default::default() },
    }
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = RunConfig::resolve(cli.config.as_deref(), &overrides(&cli.command))?;
    match cli.command {
        Command::Annotate(_) => {
            let s = commands::annotate(&cfg)?;
            for (path, err) in &s.failed {
                eprintln!("{}: {err}", path.display());
            }
            println!(
                "annotated {} image(s), {} instance(s), {} failed, {:.2}s (contour type {})",
                s.written,
                s.instances,
                s.failed.len(),
                s.seconds,
                cfg.spec
            );
            Ok(s.failed.is_empty())
        }
        Command::Evaluate(_) => {
            let r = commands::evaluate(&cfg)?;
            println!("AP/AP50/AP75: {:.3}/{:.3}/{:.3}", r.ap, r.ap50, r.ap75);
            Ok(true)
        }
        Command::Synth(_) => {
            let paths = commands::synth(&cfg)?;
            println!("wrote {} page(s)", paths.len());
            Ok(true)
        }
        Command::HeadCheck(_) => {
            let (lines, ok) = commands::head_check(&cfg);
            for l in lines {
                println!("{l}");
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
