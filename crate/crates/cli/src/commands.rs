use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use linelayout::annotate::{emit_coco_dataset, emit_labelme, generate_with_table, parse_coco, AnnotationSet};
use linelayout::evalkit::{evaluate_coco, render_report, EvalReport, ReportFormat, RowLabels};
use linelayout::raster::io::{read_label_image, write_label_image};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::headcheck::run_head_checks;
use crate::synth::synth_page;

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "pgm", "pnm"];

/// Label images directly inside `dir`, sorted by file stem.
pub fn collect_inputs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("reading input directory {}", dir.display()))? {
        let path = entry?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if path.is_file() && ext.is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.as_str())) {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_stem().cmp(&b.file_stem()).then_with(|| a.cmp(b)));
    if files.is_empty() {
        bail!("no inputs: {} holds no png, pgm or pnm files", dir.display());
    }
    Ok(files)
}

#[derive(Debug)]
pub struct AnnotateSummary {
    pub written: usize,
    pub failed: Vec<(PathBuf, String)>,
    pub instances: usize,
    pub seconds: f64,
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn annotate_one(path: &Path, id: u64, cfg: &RunConfig, out: &Path) -> Result<AnnotationSet> {
    let img = read_label_image(path)?;
    let set = generate_with_table(&img, cfg.spec, cfg.size, &cfg.classes)?.with_image(id, file_name(path));
    if cfg.format.labelme() {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let target = out.join(format!("{stem}.json"));
        std::fs::write(&target, emit_labelme(&set).to_json())
            .with_context(|| format!("writing {}", target.display()))?;
    }
    Ok(set.without_components())
}

/// Annotates every label image under `cfg.input`, writing into `cfg.out`. Files that
/// fail are reported and skipped; the rest are still written.
pub fn annotate(cfg: &RunConfig) -> Result<AnnotateSummary> {
    let input = cfg.input.as_deref().ok_or_else(|| anyhow!("annotate needs --input"))?;
    let out = cfg.out.as_deref().ok_or_else(|| anyhow!("annotate needs --out"))?;
    let files = collect_inputs(input)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let start = Instant::now();

    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build()?;
    let results: Vec<Result<AnnotationSet>> = pool
        .install(|| files.par_iter().enumerate().map(|(i, path)| annotate_one(path, i as u64 + 1, cfg, out)).collect());

    let mut sets = Vec::new();
    let mut failed = Vec::new();
    for (path, r) in files.iter().zip(results) {
        match r {
            Ok(s) => sets.push(s),
            Err(e) => failed.push((path.clone(), format!("{e:#}"))),
        }
    }
    if cfg.format.coco() && !sets.is_empty() {
        let target = out.join("coco.json");
        std::fs::write(&target, emit_coco_dataset(&sets)).with_context(|| format!("writing {}", target.display()))?;
    }
    Ok(AnnotateSummary {
        written: sets.len(),
        instances: sets.iter().map(|s| s.instances.len()).sum(),
        failed,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn read_dataset(path: &Path) -> Result<linelayout::annotate::CocoDataset> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_coco(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Report format implied by a file extension; anything unrecognized is a table.
pub fn format_for_path(path: &Path) -> ReportFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => ReportFormat::Json,
        Some("csv") => ReportFormat::Csv,
        _ => ReportFormat::Table,
    }
}

/// Scores `cfg.pred` against `cfg.gt`, writing the report to `cfg.report` if set.
pub fn evaluate(cfg: &RunConfig) -> Result<EvalReport> {
    let gt_path = cfg.gt.as_deref().ok_or_else(|| anyhow!("evaluate needs --gt"))?;
    let pred_path = cfg.pred.as_deref().ok_or_else(|| anyhow!("evaluate needs --pred"))?;
    let gt = read_dataset(gt_path)?;
    let pred = read_dataset(pred_path)?;
    let report = evaluate_coco(&gt, &pred, &cfg.thresholds, cfg.max_dets)?;
    if let Some(path) = &cfg.report {
        let text = render_report(&report, format_for_path(path), &RowLabels::default());
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(report)
}

/// Writes `cfg.count` synthetic label pages as `page_NNN.png`.
pub fn synth(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let out = cfg.out.as_deref().ok_or_else(|| anyhow!("synth needs --out"))?;
    if cfg.count == 0 {
        bail!("synth needs a count of at least 1");
    }
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    (0..cfg.count)
        .map(|i| {
            let path = out.join(format!("page_{i:03}.png"));
            write_label_image(&path, &synth_page(cfg.seed, i as u64, cfg.size))?;
            Ok(path)
        })
        .collect()
}

/// Runs the head checks; returns the printed lines and whether all passed.
pub fn head_check(cfg: &RunConfig) -> (Vec<String>, bool) {
    let checks = run_head_checks(cfg.seed);
    let ok = checks.iter().all(|c| c.passed);
    (checks.iter().map(ToString::to_string).collect(), ok)
}
