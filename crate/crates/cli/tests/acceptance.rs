//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#[path = "../../core/tests/support/oracle.rs"]
mod oracle;

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use linelayout::annotate::{emit_coco, generate_annotations, parse_coco, AnnotationSet, ContourSpec, DEFAULT_TARGET};
use linelayout::contours::rasterize_polygon;
use linelayout::evalkit::{
    average_precision, coco_iou_thresholds, evaluate_coco, mask_iou, render_table, Detection, EvalReport, GroundTruth,
    Mask, RowLabels, DEFAULT_MAX_DETS,
};
use linelayout::raster::{binarize_class, label_components, Bitmap, LabelImage, Rect, DEFAULT_CLASS_CODES};
use linelayout::solohead::InferenceConfig;
use linelayout_cli::commands;
use linelayout_cli::config::{OutputFormat, RunConfig};
use linelayout_cli::headcheck::run_head_checks;
use linelayout_cli::synth::synth_page;
use oracle::{brute_force_ap, rect_pixels, Item};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const CORPUS_SEED: u64 = 2024;
const CORPUS_PAGES: usize = 20;
const ROUND_TRIP_MIN_PIXELS: usize = 100;
const ROUND_TRIP_MIN_IOU: f64 = 0.95;
const ORACLE_SCENES: usize = 200;
const ORACLE_TOLERANCE: f64 = 1e-9;
const EXACTNESS_BUDGET: Duration = Duration::from_secs(60);
const ORACLE_BUDGET: Duration = Duration::from_secs(30);
const HEAD_BUDGET: Duration = Duration::from_secs(30);
const PAGE_BUDGET: Duration = Duration::from_secs(5);
const TABLE_ROW: &str = "Proposed     X-101-HRFPN     0.727  0.936  0.846";

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

struct Corpus {
    pages: Vec<LabelImage>,
    /// `sources[page][class]`: bounding box and pixel count of each source component.
    sources: Vec<Vec<Vec<(Rect, usize)>>>,
    /// `runs[t][page]` for each contour type in order.
    runs: Vec<(ContourSpec, Vec<AnnotationSet>)>,
    elapsed: Duration,
}

fn build_corpus() -> Corpus {
    let start = Instant::now();
    let pages: Vec<LabelImage> = (0..CORPUS_PAGES as u64).map(|i| synth_page(CORPUS_SEED, i, DEFAULT_TARGET)).collect();
    let runs = ContourSpec::all_types(true)
        .map(|spec| {
            let sets = pages
                .par_iter()
                .map(|p| generate_annotations(p, spec, DEFAULT_TARGET).expect("synthetic pages are valid"))
                .collect();
            (spec, sets)
        })
        .collect();
    let sources = pages
        .iter()
        .map(|page| {
            DEFAULT_CLASS_CODES
                .iter()
                .map(|&code| {
                    let class = binarize_class(page, code).expect("valid code");
                    label_components(&class).into_iter().map(|cc| (cc.bbox, cc.pixel_count)).collect()
                })
                .collect()
        })
        .collect();
    Corpus { pages, sources, runs, elapsed: start.elapsed() }
}

fn overlaps(a: Rect, b: Rect) -> bool {
    a.x < b.right() && b.x < a.right() && a.y < b.bottom() && b.y < a.bottom()
}

/// Source component `k` is a solid rectangle, no other same-class component's box
/// comes within `2p + 1` of it, and it sits at least `p + 1` pixels from the border.
fn isolated_rect(comps: &[(Rect, usize)], k: usize, p: usize, (w, h): (usize, usize)) -> bool {
    let (r, count) = comps[k];
    if count != r.w * r.h {
        return false;
    }
    let m = p + 1;
    if r.x < m || r.y < m || r.right() + m > w || r.bottom() + m > h {
        return false;
    }
    let win = r.padded(2 * p + 1, w, h);
    comps.iter().enumerate().all(|(j, &(o, _))| j == k || !overlaps(win, o))
}

fn local_polygon_mask(set: &AnnotationSet, i: usize, window: Rect) -> Bitmap {
    let poly = set.instances[i].polygon.translated(-(window.x as i32), -(window.y as i32));
    rasterize_polygon(&poly, window.w, window.h)
}

fn criterion_1(c: &Corpus) -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut per_type_min = usize::MAX;
    for (spec, sets) in &c.runs {
        let grow = spec.expansion();
        let mut this_type = 0;
        for ((page, set), sources) in c.pages.iter().zip(sets).zip(&c.sources) {
            for (ci, &code) in DEFAULT_CLASS_CODES.iter().enumerate() {
                let comps = &sources[ci];
                for (k, &(r, _)) in comps.iter().enumerate() {
                    if !isolated_rect(comps, k, spec.p, (page.width(), page.height())) {
                        continue;
                    }
                    let expected = Rect::new(r.x - grow, r.y - grow, r.w + 2 * grow, r.h + 2 * grow);
                    let found = set.instances.iter().position(|inst| {
                        inst.category_id == ci as u64 + 1
                            && inst.component.as_ref().is_some_and(|k| {
                                k.bbox.x <= r.x
                                    && k.bbox.y <= r.y
                                    && k.bbox.right() >= r.right()
                                    && k.bbox.bottom() >= r.bottom()
                            })
                    });
                    let ok = found.is_some_and(|i| {
                        let k = set.instances[i].component.as_ref().expect("attached");
                        let window = expected.padded(1, page.width(), page.height());
                        let mut want = Bitmap::new(window.w, window.h).expect("positive");
                        want.fill_rect(Rect::new(expected.x - window.x, expected.y - window.y, expected.w, expected.h));
                        k.bbox == expected
                            && k.pixel_count == expected.w * expected.h
                            && local_polygon_mask(set, i, window) == want
                    });
                    checked += 1;
                    this_type += 1;
                    if !ok && failures.len() < 3 {
                        failures.push(format!("type {spec} code {code} at {r:?}"));
                    }
                }
            }
        }
        per_type_min = per_type_min.min(this_type);
    }
    let elapsed = c.elapsed + start.elapsed();
    outcome(
        failures.is_empty() && per_type_min > 0 && elapsed < EXACTNESS_BUDGET,
        format!(
            "annotation exactness: {checked} isolated rectangles over 8 types (at least {per_type_min} per type), {} mismatches{}, {:.1}s",
            failures.len(),
            if failures.is_empty() { String::new() } else { format!(" e.g. {}", failures.join("; ")) },
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_2(c: &Corpus) -> Outcome {
    let mut violations = 0;
    let mut pairs = 0;
    let mut merges = 0;
    for (_, sets) in &c.runs {
        for (set, sources) in sets.iter().zip(&c.sources) {
            for (ci, comps) in sources.iter().enumerate() {
                let before = comps.len();
                let after = set.instances.iter().filter(|i| i.category_id == ci as u64 + 1).count();
                pairs += 1;
                violations += (after > before) as usize;
                merges += before.saturating_sub(after);
            }
        }
    }
    outcome(
        violations == 0,
        format!("CC-merge monotonicity: {pairs} (page, class, type) counts, {violations} violations, {merges} components merged"),
    )
}

fn criterion_3(c: &Corpus) -> Outcome {
    let mut n = 0;
    let mut worst = 1.0f64;
    for (_, sets) in &c.runs {
        for set in sets {
            for (i, inst) in set.instances.iter().enumerate() {
                let k = inst.component.as_ref().expect("attached");
                if k.pixel_count < ROUND_TRIP_MIN_PIXELS {
                    continue;
                }
                let window = Rect::new(k.bbox.x - 1, k.bbox.y - 1, k.bbox.w + 2, k.bbox.h + 2);
                let mut truth = Bitmap::new(window.w, window.h).expect("positive");
                truth.paste_or(&k.mask, 1, 1);
                let iou = mask_iou(&local_polygon_mask(set, i, window), &truth).expect("same size");
                worst = worst.min(iou);
                n += 1;
            }
        }
    }
    outcome(
        n > 0 && worst >= ROUND_TRIP_MIN_IOU,
        format!("contour round trip: {n} components of at least {ROUND_TRIP_MIN_PIXELS} px, minimum IoU {worst:.4} (need {ROUND_TRIP_MIN_IOU})"),
    )
}

const SIDE: usize = 16;

type Boxed = (usize, usize, usize, usize);

fn block(x: usize, y: usize, w: usize, h: usize) -> Mask {
    let mut b = Bitmap::new(SIDE + 8, SIDE + 8).expect("positive");
    b.fill_rect(Rect::new(x, y, w, h));
    Mask::from_bitmap(&b)
}

fn random_rect(rng: &mut ChaCha8Rng) -> Boxed {
    let (x, y) = (rng.random_range(0..SIDE - 2), rng.random_range(0..SIDE - 2));
    (x, y, rng.random_range(1..=(SIDE - x).min(8)), rng.random_range(1..=(SIDE - y).min(8)))
}

fn jitter(rng: &mut ChaCha8Rng, r: Boxed) -> Boxed {
    let x = (r.0 + rng.random_range(0..2)).min(SIDE - 1);
    let y = (r.1 + rng.random_range(0..2)).min(SIDE - 1);
    let w = (r.2 + rng.random_range(0..2)).clamp(1, SIDE - x);
    let h = (r.3 + rng.random_range(0..2)).clamp(1, SIDE - y);
    (x, y, w, h)
}

fn fixture_eval(gt: &[Boxed], preds: &[(Boxed, f64)]) -> EvalReport {
    let g: Vec<_> =
        gt.iter().map(|r| GroundTruth { image_id: 1, category_id: 1, mask: block(r.0, r.1, r.2, r.3) }).collect();
    let p: Vec<_> =
        preds.iter().map(|(r, s)| Detection::new(1, 1, block(r.0, r.1, r.2, r.3), *s).expect("valid score")).collect();
    average_precision(&p, &g, &coco_iou_thresholds(), DEFAULT_MAX_DETS).expect("non-empty ground truth")
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    let mut worst = 0.0f64;
    for _ in 0..ORACLE_SCENES {
        let n_gt = rng.random_range(1..=6);
        let n_pred = rng.random_range(0..=6);
        let gts: Vec<(u64, u64, Boxed)> =
            (0..n_gt).map(|_| (rng.random_range(1..=2), rng.random_range(1..=2), random_rect(&mut rng))).collect();
        let preds: Vec<(u64, u64, Boxed, f64)> = (0..n_pred)
            .map(|_| {
                let score = rng.random_range(0.0..1.0);
                if rng.random_bool(0.6) {
                    let g = gts[rng.random_range(0..gts.len())];
                    (g.0, g.1, jitter(&mut rng, g.2), score)
                } else {
                    (rng.random_range(1..=2), rng.random_range(1..=2), random_rect(&mut rng), score)
                }
            })
            .collect();
        let cap = rng.random_range(1..=8);
        let g: Vec<_> = gts
            .iter()
            .map(|&(i, c, r)| GroundTruth { image_id: i, category_id: c, mask: block(r.0, r.1, r.2, r.3) })
            .collect();
        let p: Vec<_> = preds
            .iter()
            .map(|&(i, c, r, s)| Detection::new(i, c, block(r.0, r.1, r.2, r.3), s).expect("valid score"))
            .collect();
        let ours = average_precision(&p, &g, &coco_iou_thresholds(), cap).expect("non-empty ground truth");
        let gi: Vec<_> = gts
            .iter()
            .map(|&(i, c, r)| Item { image: i, category: c, pixels: rect_pixels(r.0, r.1, r.2, r.3), score: 0.0 })
            .collect();
        let pi: Vec<_> = preds
            .iter()
            .map(|&(i, c, r, s)| Item { image: i, category: c, pixels: rect_pixels(r.0, r.1, r.2, r.3), score: s })
            .collect();
        let (ap, ap50, ap75) = brute_force_ap(&pi, &gi, cap);
        worst = worst.max((ours.ap - ap).abs()).max((ours.ap50 - ap50).abs()).max((ours.ap75 - ap75).abs());
    }

    let page = synth_page(CORPUS_SEED, 0, DEFAULT_TARGET);
    let doc = emit_coco(
        &generate_annotations(&page, ContourSpec::default(), DEFAULT_TARGET)
            .expect("valid page")
            .with_image(1, "page.png"),
    );
    let ds = parse_coco(&doc).expect("own output parses");
    let own = evaluate_coco(&ds, &ds, &coco_iou_thresholds(), DEFAULT_MAX_DETS).expect("consistent");
    let self_ok = own.ap == 1.0 && own.ap50 == 1.0 && own.ap75 == 1.0 && own.curve.iter().all(|c| c.1 == 1.0);

    // 60 of 100 gt pixels
    let sixty = fixture_eval(&[(0, 0, 10, 10)], &[((0, 0, 10, 6), 1.0)]);
    let sixty_ok = sixty.ap == 0.3 && sixty.ap50 == 1.0 && sixty.ap75 == 0.0;
    // IoUs 80/200 and 190/200
    let two = fixture_eval(&[(0, 0, 10, 20)], &[((0, 0, 10, 8), 0.9), ((0, 0, 10, 19), 0.8)]);
    let two_ok = two.ap50 == 0.5;
    let elapsed = start.elapsed();
    outcome(
        worst <= ORACLE_TOLERANCE && self_ok && sixty_ok && two_ok && elapsed < ORACLE_BUDGET,
        format!(
            "evaluator oracle: {ORACLE_SCENES} scenes max |diff| {worst:.2e}; self-eval AP {}; IoU-0.6 AP/AP50/AP75 {}/{}/{}; two-pred AP50 {}; {:.2}s",
            own.ap,
            sixty.ap,
            sixty.ap50,
            sixty.ap75,
            two.ap50,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_5() -> Outcome {
    let t = coco_iou_thresholds();
    let grid_ok = t.len() == 10 && t.iter().enumerate().all(|(i, &x)| x == (50 + 5 * i) as f64 / 100.0);
    let inf = InferenceConfig::<f64>::default();
    let caps_ok = DEFAULT_MAX_DETS == 500 && inf.max_dets == 500 && inf.pre_nms == 800 && inf.mask_threshold == 0.25;
    let stored =
        EvalReport { ap: 0.727, ap50: 0.936, ap75: 0.846, per_class_ap: Default::default(), curve: Vec::new() };
    let table = render_table(&[(RowLabels::new("Proposed", "X-101-HRFPN"), &stored)]);
    let row = table.lines().nth(1).unwrap_or_default();
    let cells: Vec<&str> = row.split_whitespace().collect();
    let row_ok = row == TABLE_ROW && cells == ["Proposed", "X-101-HRFPN", "0.727", "0.936", "0.846"];
    outcome(
        grid_ok && caps_ok && row_ok,
        format!(
            "protocol constants: thresholds {:.2}..{:.2} ({}), max dets {}, pre-NMS {}, mask threshold {}, row `{row}`",
            t[0],
            t[t.len() - 1],
            t.len(),
            inf.max_dets,
            inf.pre_nms,
            inf.mask_threshold
        ),
    )
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let checks = run_head_checks(CORPUS_SEED);
    let elapsed = start.elapsed();
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(ToString::to_string).collect();
    outcome(
        failed.is_empty() && elapsed < HEAD_BUDGET,
        format!(
            "head mechanics: {}/{} checks passed{}, {:.2}s",
            checks.len() - failed.len(),
            checks.len(),
            if failed.is_empty() { String::new() } else { format!(" ({})", failed.join("; ")) },
            elapsed.as_secs_f64()
        ),
    )
}

fn annotate_dir(input: &Path, out: &Path, jobs: usize) -> commands::AnnotateSummary {
    let cfg = RunConfig {
        input: Some(input.to_path_buf()),
        out: Some(out.to_path_buf()),
        format: OutputFormat::Both,
        jobs,
        ..RunConfig::default()
    };
    commands::annotate(&cfg).expect("annotate runs")
}

fn synth_dir(out: &Path, count: usize) -> Vec<std::path::PathBuf> {
    let cfg = RunConfig { out: Some(out.to_path_buf()), count, seed: CORPUS_SEED, ..RunConfig::default() };
    commands::synth(&cfg).expect("synth runs")
}

fn criterion_7() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let (pages, out) = (dir.path().join("pages"), dir.path().join("out"));
    synth_dir(&pages, 1);
    let start = Instant::now();
    let s = annotate_dir(&pages, &out, 1);
    let elapsed = start.elapsed();
    outcome(
        s.written == 1 && s.failed.is_empty() && elapsed < PAGE_BUDGET,
        format!(
            "throughput: one {}x{} page, {} instances, {:.3}s single-threaded (budget {}s)",
            DEFAULT_TARGET.0,
            DEFAULT_TARGET.1,
            s.instances,
            elapsed.as_secs_f64(),
            PAGE_BUDGET.as_secs()
        ),
    )
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .expect("readable")
        .map(|e| {
            let p = e.expect("entry").path();
            (p.file_name().expect("named").to_string_lossy().into_owned(), std::fs::read(&p).expect("readable"))
        })
        .collect();
    out.sort();
    out
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let root = dir.path();
    synth_dir(&root.join("a"), 6);
    synth_dir(&root.join("b"), 6);
    let pages_same = dir_bytes(&root.join("a")) == dir_bytes(&root.join("b"));
    annotate_dir(&root.join("a"), &root.join("o1"), 1);
    annotate_dir(&root.join("a"), &root.join("o2"), 1);
    annotate_dir(&root.join("b"), &root.join("o4"), 4);
    let reference = dir_bytes(&root.join("o1"));
    let same = reference == dir_bytes(&root.join("o2")) && reference == dir_bytes(&root.join("o4"));
    outcome(
        pages_same && same && reference.len() == 7,
        format!(
            "determinism: synthetic pages identical {pages_same}; {} output files identical across 1, 1 and 4 threads {same}",
            reference.len()
        ),
    )
}

fn main() -> ExitCode {
    let corpus = build_corpus();
    let results = [
        criterion_1(&corpus),
        criterion_2(&corpus),
        criterion_3(&corpus),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
    ];
    for (i, r) in results.iter().enumerate() {
        println!("{} criterion {}: {}", if r.passed { "PASS" } else { "FAIL" }, i + 1, r.detail);
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
