//! Run configuration: defaults, a flat `key = value` file, then command-line flags,
//! each layer overriding the one before.
//!
//! Recognized keys: `input`, `out`, `p`, `q`, `opening`, `size` (`WxH`), `format`
//! (`coco`, `labelme`, `both`), `classes` (`name:code,...`, ten entries), `thresholds`
//! (comma-separated), `max_dets`, `jobs`, `seed`, `count`, `gt`, `pred`, `report`.
//! Blank lines and lines starting with `#` are ignored.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use linelayout::annotate::{ClassEntry, ClassTable, ContourSpec, DEFAULT_TARGET};
use linelayout::evalkit::{coco_iou_thresholds, DEFAULT_MAX_DETS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Coco,
    Labelme,
    Both,
}

impl OutputFormat {
    pub fn coco(self) -> bool {
        matches!(self, Self::Coco | Self::Both)
    }

    pub fn labelme(self) -> bool {
        matches!(self, Self::Labelme | Self::Both)
    }
}

impl FromStr for OutputFormat {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coco" => Ok(Self::Coco),
            "labelme" => Ok(Self::Labelme),
            "both" => Ok(Self::Both),
            _ => bail!("unknown output format `{s}` (coco, labelme or both)"),
        }
    }
}

/// Parses `WxH`.
pub fn parse_size(s: &str) -> Result<(usize, usize)> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| anyhow!("size `{s}` is not WxH"))?;
    let w: usize = w.trim().parse().with_context(|| format!("size `{s}`"))?;
    let h: usize = h.trim().parse().with_context(|| format!("size `{s}`"))?;
    if w == 0 || h == 0 {
        bail!("size `{s}` must be positive");
    }
    Ok((w, h))
}

/// Parses `name:code,...`; category ids follow the listed order from 1.
pub fn parse_classes(s: &str) -> Result<ClassTable> {
    let entries = s
        .split(',')
        .enumerate()
        .map(|(i, item)| {
            let (name, code) = item.split_once(':').ok_or_else(|| anyhow!("class `{item}` is not name:code"))?;
            let code: u8 = code.trim().parse().with_context(|| format!("class `{item}`"))?;
            Ok(ClassEntry { name: name.trim().to_string(), code, category_id: i as u64 + 1 })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ClassTable::new(entries)?)
}

fn parse_thresholds(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|t| t.trim().parse::<f64>().with_context(|| format!("threshold `{t}`"))).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub spec: ContourSpec,
    pub size: (usize, usize),
    pub format: OutputFormat,
    pub classes: ClassTable,
    pub thresholds: Vec<f64>,
    pub max_dets: usize,
    pub jobs: usize,
    pub seed: u64,
    pub count: usize,
    pub gt: Option<PathBuf>,
    pub pred: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            out: None,
            spec: ContourSpec::default(),
            size: DEFAULT_TARGET,
            format: OutputFormat::Both,
            classes: ClassTable::standard(),
            thresholds: coco_iou_thresholds(),
            max_dets: DEFAULT_MAX_DETS,
            jobs: 1,
            seed: 0,
            count: 20,
            gt: None,
            pred: None,
            report: None,
        }
    }
}

impl RunConfig {
    /// Defaults, then `file` (when given), then `flags`.
    pub fn resolve(file: Option<&Path>, flags: &Overrides) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            Overrides::parse_file(&text).with_context(|| format!("config {}", path.display()))?.apply(&mut cfg)?;
        }
        flags.apply(&mut cfg)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.jobs == 0 {
            bail!("jobs must be at least 1");
        }
        if let (Some(i), Some(o)) = (&self.input, &self.out) {
            if i == o {
                bail!("input and output paths must differ ({})", i.display());
            }
        }
        Ok(())
    }
}

/// One configuration layer; unset fields leave the layer below untouched.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub p: Option<usize>,
    pub q: Option<usize>,
    pub opening: Option<bool>,
    pub size: Option<(usize, usize)>,
    pub format: Option<OutputFormat>,
    pub classes: Option<ClassTable>,
    pub thresholds: Option<Vec<f64>>,
    pub max_dets: Option<usize>,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub count: Option<usize>,
    pub gt: Option<PathBuf>,
    pub pred: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl Overrides {
    pub fn parse_file(text: &str) -> Result<Self> {
        let mut o = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected key = value", n + 1))?;
            o.set(key.trim(), value.trim()).with_context(|| format!("line {}", n + 1))?;
        }
        Ok(o)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let num = |v: &str| v.parse::<usize>().with_context(|| format!("`{key}` expects a count, got `{v}`"));
        match key {
            "input" => self.input = Some(v.into()),
            "out" => self.out = Some(v.into()),
            "p" => self.p = Some(num(v)?),
            "q" => self.q = Some(num(v)?),
            "opening" => {
                self.opening = Some(v.parse().with_context(|| format!("`opening` expects true or false, got `{v}`"))?)
            }
            "size" => self.size = Some(parse_size(v)?),
            "format" => self.format = Some(v.parse()?),
            "classes" => self.classes = Some(parse_classes(v)?),
            "thresholds" => self.thresholds = Some(parse_thresholds(v)?),
            "max_dets" => self.max_dets = Some(num(v)?),
            "jobs" => self.jobs = Some(num(v)?),
            "seed" => self.seed = Some(v.parse().with_context(|| format!("`seed` expects an integer, got `{v}`"))?),
            "count" => self.count = Some(num(v)?),
            "gt" => self.gt = Some(v.into()),
            "pred" => self.pred = Some(v.into()),
            "report" => self.report = Some(v.into()),
            _ => bail!("unknown key `{key}`"),
        }
        Ok(())
    }

    pub fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        fn take<T: Clone>(dst: &mut T, src: &Option<T>) {
            if let Some(v) = src {
                *dst = v.clone();
            }
        }
        fn take_opt<T: Clone>(dst: &mut Option<T>, src: &Option<T>) {
            if src.is_some() {
                *dst = src.clone();
            }
        }
        take_opt(&mut cfg.input, &self.input);
        take_opt(&mut cfg.out, &self.out);
        take_opt(&mut cfg.gt, &self.gt);
        take_opt(&mut cfg.pred, &self.pred);
        take_opt(&mut cfg.report, &self.report);
        let p = self.p.unwrap_or(cfg.spec.p);
        let q = self.q.unwrap_or(cfg.spec.q);
        let opening = self.opening.unwrap_or(cfg.spec.apply_opening);
        cfg.spec = ContourSpec::new(p, q, opening)?;
        take(&mut cfg.size, &self.size);
        take(&mut cfg.format, &self.format);
        take(&mut cfg.classes, &self.classes);
        take(&mut cfg.thresholds, &self.thresholds);
        take(&mut cfg.max_dets, &self.max_dets);
        take(&mut cfg.jobs, &self.jobs);
        take(&mut cfg.seed, &self.seed);
        take(&mut cfg.count, &self.count);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::default();
        assert_eq!(c.size, (2496, 800));
        assert_eq!(c.spec.to_string(), "10-4");
        assert!(c.spec.apply_opening);
        assert_eq!(c.max_dets, 500);
        assert_eq!(c.thresholds.len(), 10);
    }

    #[test]
    fn flags_beat_file_beat_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# demo\np = 6\nq = 2\nsize = 640x200\njobs = 3\n\nformat = coco\n").unwrap();
        let flags = Overrides { q: Some(0), jobs: Some(2), ..Default::default() };
        let c = RunConfig::resolve(Some(&path), &flags).unwrap();
        assert_eq!((c.spec.p, c.spec.q), (6, 0));
        assert_eq!(c.size, (640, 200));
        assert_eq!(c.jobs, 2);
        assert_eq!(c.format, OutputFormat::Coco);
        assert_eq!(c.max_dets, 500);
    }

    #[test]
    fn bad_file_lines_are_located() {
        let err = Overrides::parse_file("p = 6\nwidth = 3\n").unwrap_err();
        assert!(format!("{err:#}").contains("line 2"));
        assert!(format!("{err:#}").contains("unknown key `width`"));
        assert!(Overrides::parse_file("p 6").is_err());
    }

    #[test]
    fn invalid_combinations_rejected() {
        let flags = Overrides { p: Some(2), q: Some(4), ..Default::default() };
        assert!(RunConfig::resolve(None, &flags).is_err());
        let flags = Overrides { jobs: Some(0), ..Default::default() };
        assert!(RunConfig::resolve(None, &flags).is_err());
        let same = Overrides { input: Some("d".into()), out: Some("d".into()), ..Default::default() };
        assert!(RunConfig::resolve(None, &same).is_err());
    }

    #[test]
    fn size_and_class_parsing() {
        assert_eq!(parse_size("2496x800").unwrap(), (2496, 800));
        assert!(parse_size("0x5").is_err());
        assert!(parse_size("800").is_err());
        let list = "a:10,b:20,c:30,d:40,e:50,f:60,g:70,h:80,i:90,j:100";
        let t = parse_classes(list).unwrap();
        assert_eq!(t.by_name("j").unwrap().category_id, 10);
        assert!(parse_classes("a:10,b:20").is_err());
    }
}
