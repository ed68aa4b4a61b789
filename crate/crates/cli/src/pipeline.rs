//! Command implementations. Each command writes its outputs plus a manifest into the output directory.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use indexmap::IndexMap;
use rayon::prelude::*;
use serde::Serialize;

use uctg::annotate::{annotate, read_bracketed_trees, read_conllu, AnnotatedDocument, GoldAnnotations, Resources, Tier};
use uctg::corpus::{filter_pairs, load_pairs, write_pairs, Corpus, FilterSettings, LineError, PairRecord};
use uctg::features::{self, FeatureResources, FeatureVector, LEXICON_NAMES};
use uctg::lexicons::load_profile;
use uctg::report::{self, Format};

use crate::config::{self, LexiconProfiles, RunConfig};
use crate::manifest::Manifest;
use crate::{AnnotationArgs, CommonArgs, FilterArgs, ModelInputs};

pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_USER: u8 = 2;
const DEFAULT_OUT: &str = "out";

/// An error with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn user(error: anyhow::Error) -> Self {
        Failure { code: EXIT_USER, error }
    }

    pub fn internal(error: anyhow::Error) -> Self {
        Failure { code: EXIT_INTERNAL, error }
    }
}

type CliResult<T> = Result<T, Failure>;

trait ResultExt<T> {
    fn user(self) -> CliResult<T>;
    fn internal(self) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> ResultExt<T> for Result<T, E> {
    fn user(self) -> CliResult<T> {
        self.map_err(|e| Failure::user(e.into()))
    }

    fn internal(self) -> CliResult<T> {
        self.map_err(|e| Failure::internal(e.into()))
    }
}

fn user_err(msg: impl Into<String>) -> Failure {
    Failure::user(anyhow!(msg.into()))
}

fn warn(msg: impl std::fmt::Display) {
    eprintln!("warning: {msg}");
}

fn require_file(path: &Path, what: &str) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(user_err(format!("{what} not found: {}", path.display())))
    }
}

fn out_dir(common: &CommonArgs, cfg: &RunConfig) -> CliResult<PathBuf> {
    let dir = common.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    fs::create_dir_all(&dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))
        .internal()?;
    Ok(dir)
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes)
        .with_context(|| format!("cannot write {}", path.display()))
        .internal()
}

/// Filesystem-safe form of a model label.
pub fn sanitize_label(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_') { c } else { '_' })
        .collect();
    if s.is_empty() {
        "_".to_string()
    } else {
        s
    }
}

/// Human label first, the rest lexicographic.
fn order_labels<'a>(labels: impl IntoIterator<Item = &'a String>, human: &str) -> Vec<String> {
    let mut v: Vec<String> = labels.into_iter().cloned().collect();
    v.sort_by(|a, b| (a != human).cmp(&(b != human)).then_with(|| a.cmp(b)));
    v.dedup();
    v
}

// ---------------------------------------------------------------- settings

fn filter_settings(flags: &FilterArgs, cfg: &RunConfig) -> FilterSettings {
    let d = FilterSettings::default();
    FilterSettings {
        min_prompt_words: flags.min_prompt_words.or(cfg.min_prompt_words).unwrap_or(d.min_prompt_words),
        min_cont_words: flags.min_cont_words.or(cfg.min_cont_words).unwrap_or(d.min_cont_words),
        max_cont_words: flags.max_cont_words.or(cfg.max_cont_words).unwrap_or(d.max_cont_words),
    }
}

struct AnnotationSettings {
    pairs: Vec<PathBuf>,
    tier: Tier,
    conllu: Option<PathBuf>,
    trees: Option<PathBuf>,
}

fn annotation_settings(flags: &AnnotationArgs, cfg: &RunConfig) -> CliResult<AnnotationSettings> {
    let pairs = if flags.pairs.is_empty() { cfg.pairs.clone() } else { flags.pairs.clone() };
    if pairs.is_empty() {
        return Err(user_err("no pair files given (use --pairs or the `pairs` config key)"));
    }
    for p in &pairs {
        require_file(p, "pairs file")?;
    }
    let tier: Tier = flags
        .tier
        .as_deref()
        .or(cfg.tier.as_deref())
        .unwrap_or("builtin")
        .parse()
        .map_err(|e: String| user_err(e))?;
    let conllu = flags.conllu.clone().or_else(|| cfg.conllu.clone());
    let trees = flags.trees.clone().or_else(|| cfg.trees.clone());
    if tier == Tier::Full && (conllu.is_none() || trees.is_none()) {
        return Err(user_err("the full tier needs both --conllu and --trees"));
    }
    for p in conllu.iter().chain(&trees) {
        require_file(p, "gold annotation file")?;
    }
    Ok(AnnotationSettings { pairs, tier, conllu, trees })
}

fn resolve_alpha(flag: Option<f64>, cfg: &RunConfig) -> CliResult<f64> {
    config::validate_alpha(flag.or(cfg.alpha).unwrap_or(config::DEFAULT_ALPHA)).user()
}

fn resolve_groups(flag: Option<usize>, cfg: &RunConfig) -> CliResult<usize> {
    let m = flag.or(cfg.groups).unwrap_or(config::DEFAULT_GROUPS);
    if m == 0 {
        return Err(user_err("--groups must be at least 1"));
    }
    Ok(m)
}

fn resolve_top(flag: Option<usize>, cfg: &RunConfig) -> CliResult<usize> {
    let k = flag.or(cfg.top).unwrap_or(config::DEFAULT_TOP);
    if k == 0 {
        return Err(user_err("--top must be at least 1"));
    }
    Ok(k)
}

fn report_formats(flag: Option<&str>, cfg: &RunConfig) -> CliResult<Vec<Format>> {
    match flag.or(cfg.format.as_deref()).unwrap_or("all") {
        "all" => Ok(vec![Format::Markdown, Format::Csv, Format::Json]),
        other => Ok(vec![other.parse::<Format>().user()?]),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum TableFormat {
    Csv,
    Json,
}

impl TableFormat {
    fn parse(s: &str) -> CliResult<Self> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            other => Err(user_err(format!("unknown feature table format {other:?} (expected csv or json)"))),
        }
    }

    fn extension(self) -> &'static str {
        match self {
            TableFormat::Csv => "csv",
            TableFormat::Json => "json",
        }
    }
}

// ---------------------------------------------------------------- pairs

/// All pairs grouped by model, with prompts shared across models by id.
#[derive(Debug)]
struct PairSet {
    prompts: BTreeMap<String, String>,
    models: IndexMap<String, Vec<PairRecord>>,
    /// Ids dropped because some model lacks them.
    unaligned: BTreeMap<String, usize>,
}

fn load_checked(path: &Path) -> CliResult<Corpus> {
    let loaded = load_pairs(path).user()?;
    report_line_errors(path, &loaded.errors);
    Ok(loaded.corpus)
}

fn report_line_errors(path: &Path, errors: &[LineError]) {
    for e in errors {
        warn(format!("{}:{}: skipped malformed line: {}", path.display(), e.line, e.message));
    }
}

/// Loads pair files and keeps only ids that every model covers.
fn collect_pairs(files: &[PathBuf], human: &str) -> CliResult<PairSet> {
    let mut prompts: BTreeMap<String, String> = BTreeMap::new();
    let mut by_model: BTreeMap<String, BTreeMap<String, PairRecord>> = BTreeMap::new();
    for path in files {
        let corpus = load_checked(path)?;
        for rec in corpus.records {
            match prompts.get(&rec.id) {
                Some(p) if *p != rec.prompt => {
                    return Err(user_err(format!(
                        "prompt text for id {:?} differs between pair files (seen again in {})",
                        rec.id,
                        path.display()
                    )))
                }
                Some(_) => {}
                None => {
                    prompts.insert(rec.id.clone(), rec.prompt.clone());
                }
            }
            let slot = by_model.entry(rec.model.clone()).or_default();
            if slot.contains_key(&rec.id) {
                return Err(user_err(format!(
                    "id {:?} appears twice for model {:?} (again in {})",
                    rec.id,
                    rec.model,
                    path.display()
                )));
            }
            slot.insert(rec.id.clone(), rec);
        }
    }
    if by_model.is_empty() {
        return Err(user_err("the pair files contain no records"));
    }
    let mut sanitized: BTreeMap<String, &String> = BTreeMap::new();
    for label in by_model.keys() {
        if let Some(other) = sanitized.insert(sanitize_label(label), label) {
            return Err(user_err(format!("model labels {other:?} and {label:?} map to the same file name")));
        }
    }
    let shared: BTreeSet<String> = prompts
        .keys()
        .filter(|id| by_model.values().all(|m| m.contains_key(*id)))
        .cloned()
        .collect();
    if shared.is_empty() {
        return Err(user_err("no record id is shared by every model"));
    }
    let mut unaligned = BTreeMap::new();
    let mut models = IndexMap::new();
    for label in order_labels(by_model.keys(), human) {
        let mut recs = by_model.remove(&label).unwrap_or_default();
        let before = recs.len();
        recs.retain(|id, _| shared.contains(id));
        if before != recs.len() {
            warn(format!("{label}: {} record(s) dropped, id not covered by every model", before - recs.len()));
        }
        unaligned.insert(label.clone(), before - recs.len());
        models.insert(label, recs.into_values().collect());
    }
    prompts.retain(|id, _| shared.contains(id));
    Ok(PairSet { prompts, models, unaligned })
}

// ---------------------------------------------------------------- annotation + extraction

fn load_gold(s: &AnnotationSettings) -> CliResult<Option<GoldAnnotations>> {
    if s.tier != Tier::Full {
        return Ok(None);
    }
    let (Some(c), Some(t)) = (&s.conllu, &s.trees) else {
        return Err(user_err("the full tier needs both --conllu and --trees"));
    };
    let docs = read_conllu(c).user()?;
    let trees = read_bracketed_trees(t).user()?;
    Ok(Some(GoldAnnotations::from_parts(docs, trees).user()?))
}

struct Job<'a> {
    key: String,
    id: &'a str,
    text: &'a str,
}

fn jobs<'a>(pairs: &'a PairSet) -> (Vec<Job<'a>>, Vec<(String, usize)>) {
    let mut jobs: Vec<Job<'a>> = pairs
        .prompts
        .iter()
        .map(|(id, text)| Job { key: format!("{id}/prompt"), id, text })
        .collect();
    let mut spans = vec![("prompt".to_string(), jobs.len())];
    for (label, recs) in &pairs.models {
        jobs.extend(recs.iter().map(|r| Job {
            key: format!("{}/{}", r.id, label),
            id: &r.id,
            text: &r.continuation,
        }));
        spans.push((label.clone(), recs.len()));
    }
    (jobs, spans)
}

fn annotate_jobs(jobs: &[Job<'_>], tier: Tier, gold: Option<&GoldAnnotations>) -> CliResult<Vec<AnnotatedDocument>> {
    let resources = Resources { gold, ..Resources::default() };
    jobs.par_iter()
        .map(|job| {
            let mut doc = annotate(&job.key, job.text, &resources, tier)
                .with_context(|| format!("cannot annotate {}", job.key))
                .user()?;
            doc.id = job.id.to_string();
            Ok(doc)
        })
        .collect()
}

fn load_lexicons(profile: Option<&Path>) -> CliResult<(FeatureResources, Vec<String>, Vec<PathBuf>)> {
    let mut res = FeatureResources::new();
    let mut loaded = Vec::new();
    let mut files = Vec::new();
    let Some(path) = profile else {
        warn("no lexicon profile given; psycholinguistic features will be unavailable");
        return Ok((res, loaded, files));
    };
    require_file(path, "lexicon profile")?;
    let (profiles, base) = LexiconProfiles::load(path).user()?;
    files.push(path.to_path_buf());
    for p in &profiles.lexicons {
        if !LEXICON_NAMES.contains(&p.name.as_str()) {
            warn(format!("lexicon {:?} is not used by any feature; skipped", p.name));
            continue;
        }
        let file = p.resolved_path(Some(&base));
        match load_profile(p, Some(&base)) {
            Ok(l) => {
                if !l.row_errors.is_empty() {
                    warn(format!("{}: {} malformed row(s) skipped", file.display(), l.row_errors.len()));
                }
                res.add_lexicon(l.lexicon);
                loaded.push(p.name.clone());
                files.push(file);
            }
            Err(e) => warn(format!("lexicon {:?} not loaded: {e}", p.name)),
        }
    }
    for name in LEXICON_NAMES {
        if !loaded.iter().any(|l| l == name) {
            warn(format!("lexicon {name:?} missing; its features will be unavailable"));
        }
    }
    Ok((res, loaded, files))
}

fn split_spans<T>(mut items: Vec<T>, spans: &[(String, usize)]) -> IndexMap<String, Vec<T>> {
    let mut out = IndexMap::new();
    for (label, n) in spans {
        let rest = items.split_off(*n);
        out.insert(label.clone(), items);
        items = rest;
    }
    out
}

fn write_table(path: &Path, rows: &[FeatureVector], format: TableFormat) -> CliResult<()> {
    let file = File::create(path)
        .with_context(|| format!("cannot create {}", path.display()))
        .internal()?;
    let mut w = BufWriter::new(file);
    match format {
        TableFormat::Csv => features::write_csv(rows, &mut w),
        TableFormat::Json => features::write_json(rows, &mut w),
    }
    .with_context(|| format!("cannot write {}", path.display()))
    .internal()?;
    w.flush().internal()
}

pub fn read_table(path: &Path) -> CliResult<Vec<FeatureVector>> {
    require_file(path, "feature table")?;
    let file = File::open(path)
        .with_context(|| format!("cannot open {}", path.display()))
        .user()?;
    let rows = if path.extension().is_some_and(|e| e == "json") {
        features::read_json(file)
    } else {
        features::read_csv(file)
    };
    rows.with_context(|| format!("invalid feature table {}", path.display())).user()
}

fn prompts_table(dir: &Path, ext: &str) -> PathBuf {
    dir.join(format!("prompts.features.{ext}"))
}

fn model_table(dir: &Path, label: &str, ext: &str) -> PathBuf {
    dir.join(format!("continuations.{}.features.{ext}", sanitize_label(label)))
}

struct ExtractOutput {
    prompts: Vec<FeatureVector>,
    models: IndexMap<String, Vec<FeatureVector>>,
}

fn run_extract(
    root: &Path,
    out: &Path,
    pairs_files: &[PathBuf],
    ann: &AnnotationSettings,
    lexicons: Option<&Path>,
    format: TableFormat,
    human: &str,
) -> CliResult<(ExtractOutput, Manifest)> {
    let pairs = collect_pairs(pairs_files, human)?;
    let gold = load_gold(ann)?;
    let (resources, loaded, lexicon_files) = load_lexicons(lexicons)?;
    let (jobs, spans) = jobs(&pairs);
    let docs = annotate_jobs(&jobs, ann.tier, gold.as_ref())?;
    let vectors: Vec<FeatureVector> = docs
        .par_iter()
        .zip(&jobs)
        .map(|(doc, job)| {
            features::extract(doc, &resources)
                .with_context(|| format!("cannot extract features for {}", job.key))
                .user()
        })
        .collect::<CliResult<_>>()?;
    let mut groups = split_spans(vectors, &spans);
    let prompts = groups.shift_remove("prompt").unwrap_or_default();

    let mut m = Manifest::new("extract");
    m.setting("tier", ann.tier)
        .setting("format", format)
        .setting("lexicons_loaded", &loaded)
        .setting("documents", pairs.prompts.len())
        .setting("dropped_unaligned", &pairs.unaligned)
        .setting("models", groups.keys().collect::<Vec<_>>());
    for p in pairs_files.iter().chain(&ann.conllu).chain(&ann.trees).chain(&lexicon_files) {
        m.input(root, p).internal()?;
    }
    let ext = format.extension();
    let path = prompts_table(out, ext);
    write_table(&path, &prompts, format)?;
    m.output(out, &path).internal()?;
    for (label, rows) in &groups {
        let path = model_table(out, label, ext);
        write_table(&path, rows, format)?;
        m.output(out, &path).internal()?;
    }
    eprintln!(
        "extracted {} features for {} prompt(s) and {} model(s)",
        features::registry().len(),
        prompts.len(),
        groups.len()
    );
    Ok((ExtractOutput { prompts, models: groups }, m))
}

// ---------------------------------------------------------------- commands

pub fn cmd_ingest(common: &CommonArgs, pairs: &[PathBuf], filter: &FilterArgs) -> CliResult<()> {
    let cfg = RunConfig::load_opt(common.config.as_deref()).user()?;
    let pairs = if pairs.is_empty() { cfg.pairs.clone() } else { pairs.to_vec() };
    if pairs.is_empty() {
        return Err(user_err("no pair files given (use --pairs or the `pairs` config key)"));
    }
    let settings = filter_settings(filter, &cfg);
    let out = out_dir(common, &cfg)?;
    let (m, _) = run_ingest(&out, &pairs, settings)?;
    m.write(&out, "ingest.manifest.json").internal()
}

#[derive(Serialize)]
struct FilterSidecar<'a> {
    source: String,
    #[serde(flatten)]
    report: &'a uctg::corpus::FilterReport,
    malformed_lines: &'a [LineError],
}

fn run_ingest(out: &Path, pairs: &[PathBuf], settings: FilterSettings) -> CliResult<(Manifest, Vec<PathBuf>)> {
    let mut m = Manifest::new("ingest");
    m.setting("filter", settings);
    let mut filtered = Vec::new();
    let mut stems = BTreeSet::new();
    for path in pairs {
        require_file(path, "pairs file")?;
        let loaded = load_pairs(path).user()?;
        report_line_errors(path, &loaded.errors);
        let (kept, report) = filter_pairs(&loaded.corpus, settings).user()?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "pairs".into());
        if !stems.insert(stem.clone()) {
            return Err(user_err(format!("two pair files share the name {stem:?}; rename one")));
        }
        let target = out.join(format!("{stem}.filtered.jsonl"));
        let mut buf = Vec::new();
        write_pairs(&kept, &mut buf).internal()?;
        write_file(&target, &buf)?;
        let sidecar = FilterSidecar {
            source: path.display().to_string(),
            report: &report,
            malformed_lines: &loaded.errors,
        };
        let report_path = out.join(format!("{stem}.filter_report.json"));
        let mut text = serde_json::to_string_pretty(&sidecar).internal()?;
        text.push('\n');
        write_file(&report_path, text.as_bytes())?;
        eprintln!(
            "{}: kept {} of {} ({} malformed line(s))",
            path.display(),
            report.kept,
            report.input,
            loaded.errors.len()
        );
        m.input(out, path).internal()?;
        m.output(out, &target).internal()?;
        m.output(out, &report_path).internal()?;
        filtered.push(target);
    }
    Ok((m, filtered))
}

#[derive(Serialize)]
struct AnnotatedLine<'a> {
    key: &'a str,
    document: &'a AnnotatedDocument,
}

pub fn cmd_annotate(common: &CommonArgs, flags: &AnnotationArgs) -> CliResult<()> {
    let cfg = RunConfig::load_opt(common.config.as_deref()).user()?;
    let ann = annotation_settings(flags, &cfg)?;
    let human = cfg.human.clone().unwrap_or_else(|| config::DEFAULT_HUMAN.into());
    let out = out_dir(common, &cfg)?;
    let pairs = collect_pairs(&ann.pairs, &human)?;
    let gold = load_gold(&ann)?;
    let (jobs, _) = jobs(&pairs);
    let docs = annotate_jobs(&jobs, ann.tier, gold.as_ref())?;
    let path = out.join("annotated.jsonl");
    let mut buf = Vec::new();
    for (job, doc) in jobs.iter().zip(&docs) {
        serde_json::to_writer(&mut buf, &AnnotatedLine { key: &job.key, document: doc }).internal()?;
        buf.push(b'\n');
    }
    write_file(&path, &buf)?;
    let mut m = Manifest::new("annotate");
    m.setting("tier", ann.tier).setting("documents", docs.len());
    for p in ann.pairs.iter().chain(&ann.conllu).chain(&ann.trees) {
        m.input(&out, p).internal()?;
    }
    m.output(&out, &path).internal()?;
    m.write(&out, "annotate.manifest.json").internal()
}

pub fn cmd_extract(
    common: &CommonArgs,
    flags: &AnnotationArgs,
    lexicons: Option<&Path>,
    format: Option<&str>,
) -> CliResult<()> {
    let cfg = RunConfig::load_opt(common.config.as_deref()).user()?;
    let ann = annotation_settings(flags, &cfg)?;
    let lexicons = lexicons.map(Path::to_path_buf).or_else(|| cfg.lexicons.clone());
    let format = TableFormat::parse(format.unwrap_or("csv"))?;
    let human = cfg.human.clone().unwrap_or_else(|| config::DEFAULT_HUMAN.into());
    let out = out_dir(common, &cfg)?;
    let (_, m) = run_extract(&out, &out, &ann.pairs, &ann, lexicons.as_deref(), format, &human)?;
    m.write(&out, "extract.manifest.json").internal()
}

/// Model tables from `--model LABEL=FILE` entries or an extract directory.
fn model_tables(inputs: &ModelInputs, human: &str) -> CliResult<IndexMap<String, PathBuf>> {
    let mut found: BTreeMap<String, PathBuf> = BTreeMap::new();
    for spec in &inputs.models {
        let (label, file) = spec
            .split_once('=')
            .ok_or_else(|| user_err(format!("--model expects LABEL=FILE, got {spec:?}")))?;
        if label.is_empty() {
            return Err(user_err(format!("--model has an empty label: {spec:?}")));
        }
        if found.insert(label.to_string(), PathBuf::from(file)).is_some() {
            return Err(user_err(format!("model {label:?} given twice")));
        }
    }
    if let Some(dir) = &inputs.features {
        for (label, path) in scan_features_dir(dir)? {
            found.entry(label).or_insert(path);
        }
    }
    let order = order_labels(found.keys(), human);
    Ok(order.into_iter().map(|l| {
        let p = found[&l].clone();
        (l, p)
    }).collect())
}

fn scan_features_dir(dir: &Path) -> CliResult<Vec<(String, PathBuf)>> {
    if !dir.is_dir() {
        return Err(user_err(format!("features directory not found: {}", dir.display())));
    }
    let mut out = Vec::new();
    let entries = fs::read_dir(dir)
        .with_context(|| format!("cannot list {}", dir.display()))
        .user()?;
    for entry in entries {
        let path = entry.internal()?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        let Some(rest) = name.strip_prefix("continuations.") else { continue };
        let label = rest
            .strip_suffix(".features.csv")
            .or_else(|| rest.strip_suffix(".features.json"));
        if let Some(label) = label {
            out.push((label.to_string(), path.clone()));
        }
    }
    out.sort();
    for w in out.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(user_err(format!("model {:?} has both csv and json tables in {}", w[0].0, dir.display())));
        }
    }
    Ok(out)
}

fn find_prompts(dir: &Path) -> CliResult<PathBuf> {
    let csv = prompts_table(dir, "csv");
    let json = prompts_table(dir, "json");
    match (csv.is_file(), json.is_file()) {
        (true, false) => Ok(csv),
        (false, true) => Ok(json),
        (true, true) => Err(user_err(format!("both csv and json prompt tables in {}", dir.display()))),
        (false, false) => Err(user_err(format!("prompt feature table not found in {}", dir.display()))),
    }
}

fn write_reports(
    out: &Path,
    stem: &str,
    formats: &[Format],
    render: impl Fn(Format) -> Result<String, report::ReportError>,
    m: &mut Manifest,
) -> CliResult<()> {
    for &f in formats {
        let text = render(f).internal()?;
        let path = out.join(format!("{stem}.{}", f.extension()));
        write_file(&path, text.as_bytes())?;
        m.output(out, &path).internal()?;
    }
    Ok(())
}

fn map_report_error(e: report::ReportError) -> Failure {
    use report::ReportError as E;
    match e {
        E::Csv(_) | E::Json(_) => Failure::internal(e.into()),
        _ => Failure::user(e.into()),
    }
}

fn run_compare(
    out: &Path,
    prompts: &[FeatureVector],
    models: &IndexMap<String, Vec<FeatureVector>>,
    alpha: f64,
    groups: usize,
    formats: &[Format],
    m: &mut Manifest,
) -> CliResult<()> {
    let tables = report::compare(prompts, models, alpha, groups).map_err(map_report_error)?;
    m.setting("alpha", alpha)
        .setting("groups", groups)
        .setting("alpha_used", tables.first().map(|t| t.alpha_used))
        .setting("threshold", tables.first().map(|t| format!("{:.6}", t.alpha_used)));
    write_reports(out, "significance", formats, |f| report::render_significance(&tables, f), m)?;
    for t in &tables {
        let cells = t.rows.len() * t.models.len();
        eprintln!("{}: {} of {} cells significant", t.family, t.significant_cells(), cells);
    }
    Ok(())
}

pub fn cmd_compare(
    common: &CommonArgs,
    prompts: Option<&Path>,
    inputs: &ModelInputs,
    alpha: Option<f64>,
    groups: Option<usize>,
    format: Option<&str>,
) -> CliResult<()> {
    let cfg = RunConfig::load_opt(common.config.as_deref()).user()?;
    let alpha = resolve_alpha(alpha, &cfg)?;
    let groups = resolve_groups(groups, &cfg)?;
    let formats = report_formats(format, &cfg)?;
    let human = cfg.human.clone().unwrap_or_else(|| config::DEFAULT_HUMAN.into());
    let prompts_path = match (prompts, &inputs.features) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(dir)) => find_prompts(dir)?,
        (None, None) => return Err(user_err("no prompt table given (use --prompts or --features)")),
    };
    let tables = model_tables(inputs, &human)?;
    if tables.is_empty() {
        return Err(user_err("no model tables given (use --model LABEL=FILE or --features)"));
    }
    let prompt_rows = read_table(&prompts_path)?;
    let mut models = IndexMap::new();
    for (label, path) in &tables {
        models.insert(label.clone(), read_table(path)?);
    }
    let out = out_dir(common, &cfg)?;
    let mut m = Manifest::new("compare");
    m.input(&out, &prompts_path).internal()?;
    for path in tables.values() {
        m.input(&out, path).internal()?;
    }
    run_compare(&out, &prompt_rows, &models, alpha, groups, &formats, &mut m)?;
    m.write(&out, "compare.manifest.json").internal()
}

fn run_correlate(
    out: &Path,
    human: &[FeatureVector],
    models: &IndexMap<String, Vec<FeatureVector>>,
    top: usize,
    formats: &[Format],
    m: &mut Manifest,
) -> CliResult<()> {
    let table = report::correlation_table(human, models, top).map_err(map_report_error)?;
    m.setting("top", top);
    write_reports(out, "correlation", formats, |f| report::render_correlation(&table, f), m)?;
    if let Some(r) = table.max_r() {
        eprintln!("correlation: max r = {r:.3}{}", if table.is_weak() { " (weak)" } else { "" });
    }
    Ok(())
}

pub fn cmd_correlate(
    common: &CommonArgs,
    human_path: Option<&Path>,
    human_label: Option<&str>,
    inputs: &ModelInputs,
    top: Option<usize>,
    format: Option<&str>,
) -> CliResult<()> {
    let cfg = RunConfig::load_opt(common.config.as_deref()).user()?;
    let top = resolve_top(top, &cfg)?;
    let formats = report_formats(format, &cfg)?;
    let label = human_label
        .map(str::to_string)
        .or_else(|| cfg.human.clone())
        .unwrap_or_else(|| config::DEFAULT_HUMAN.into());
    let mut tables = model_tables(inputs, &label)?;
    let human_path = match human_path {
        Some(p) => {
            tables.shift_remove(&label);
            p.to_path_buf()
        }
        None => tables.shift_remove(&sanitize_label(&label)).ok_or_else(|| {
            user_err(format!("no human table given (use --human or a features directory with a {label:?} table)"))
        })?,
    };
    if tables.is_empty() {
        return Err(user_err("no model tables to correlate with the human table"));
    }
    let human = read_table(&human_path)?;
    let mut models = IndexMap::new();
    for (l, path) in &tables {
        models.insert(l.clone(), read_table(path)?);
    }
    let out = out_dir(common, &cfg)?;
    let mut m = Manifest::new("correlate");
    m.setting("human", &label);
    m.input(&out, &human_path).internal()?;
    for path in tables.values() {
        m.input(&out, path).internal()?;
    }
    run_correlate(&out, &human, &models, top, &formats, &mut m)?;
    m.write(&out, "correlate.manifest.json").internal()
}

pub struct ReportOptions {
    pub lexicons: Option<PathBuf>,
    pub alpha: Option<f64>,
    pub groups: Option<usize>,
    pub top: Option<usize>,
    pub human: Option<String>,
}

pub fn cmd_report(
    common: &CommonArgs,
    flags: &AnnotationArgs,
    filter: &FilterArgs,
    opts: ReportOptions,
) -> CliResult<()> {
    let cfg = RunConfig::load_opt(common.config.as_deref()).user()?;
    let ann = annotation_settings(flags, &cfg)?;
    let settings = filter_settings(filter, &cfg);
    let alpha = resolve_alpha(opts.alpha, &cfg)?;
    let groups = resolve_groups(opts.groups, &cfg)?;
    let top = resolve_top(opts.top, &cfg)?;
    let human = opts.human.or_else(|| cfg.human.clone()).unwrap_or_else(|| config::DEFAULT_HUMAN.into());
    let lexicons = opts.lexicons.or_else(|| cfg.lexicons.clone());
    if settings.min_cont_words > settings.max_cont_words {
        return Err(user_err(format!(
            "min continuation words ({}) exceeds max continuation words ({})",
            settings.min_cont_words, settings.max_cont_words
        )));
    }
    let formats = vec![Format::Markdown, Format::Csv, Format::Json];
    let out = out_dir(common, &cfg)?;

    let ingest_dir = out.join("ingest");
    let features_dir = out.join("features");
    for d in [&ingest_dir, &features_dir] {
        fs::create_dir_all(d)
            .with_context(|| format!("cannot create {}", d.display()))
            .internal()?;
    }
    let (ingest_m, filtered) = run_ingest(&ingest_dir, &ann.pairs, settings)?;
    ingest_m.write(&ingest_dir, "ingest.manifest.json").internal()?;
    let (tables, extract_m) =
        run_extract(&out, &features_dir, &filtered, &ann, lexicons.as_deref(), TableFormat::Csv, &human)?;
    extract_m.write(&features_dir, "extract.manifest.json").internal()?;

    let mut m = Manifest::new("report");
    m.setting("filter", settings).setting("tier", ann.tier).setting("human", &human);
    for p in ann.pairs.iter().chain(&ann.conllu).chain(&ann.trees).chain(&lexicons) {
        m.input(&out, p).internal()?;
    }
    run_compare(&out, &tables.prompts, &tables.models, alpha, groups, &formats, &mut m)?;

    let mut others = tables.models.clone();
    match others.shift_remove(&human) {
        Some(h) if !others.is_empty() => run_correlate(&out, &h, &others, top, &formats, &mut m)?,
        Some(_) => warn("only the human continuations are present; correlation skipped"),
        None => warn(format!("no continuations labelled {human:?}; correlation skipped")),
    }
    for dir in [&ingest_dir, &features_dir] {
        let mut files: Vec<PathBuf> = fs::read_dir(dir)
            .internal()?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()
            .internal()?;
        files.sort();
        for f in files {
            m.output(&out, &f).internal()?;
        }
    }
    m.write(&out, "manifest.json").internal()?;
    eprintln!("report written to {}", out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_sanitize_to_file_names() {
        assert_eq!(sanitize_label("gpt-2 xl"), "gpt-2_xl");
        assert_eq!(sanitize_label("a/b.c"), "a_b_c");
        assert_eq!(sanitize_label(""), "_");
    }

    #[test]
    fn human_sorts_first() {
        let labels: Vec<String> = ["zeta", "human", "alpha"].iter().map(|s| s.to_string()).collect();
        assert_eq!(order_labels(&labels, "human"), ["human", "alpha", "zeta"]);
    }

    #[test]
    fn spans_split_in_order() {
        let spans = vec![("prompt".to_string(), 2), ("a".to_string(), 1), ("b".to_string(), 2)];
        let g = split_spans(vec![1, 2, 3, 4, 5], &spans);
        assert_eq!(g["prompt"], [1, 2]);
        assert_eq!(g["a"], [3]);
        assert_eq!(g["b"], [4, 5]);
    }

    fn write_pairs_file(dir: &Path, name: &str, lines: &[(&str, &str, &str, &str)]) -> PathBuf {
        let path = dir.join(name);
        let text: String = lines
            .iter()
            .map(|(id, p, c, m)| {
                serde_json::json!({"id": id, "prompt": p, "continuation": c, "model": m}).to_string() + "\n"
            })
            .collect();
        fs::write(&path, text).unwrap();
        path
    }

    #[test]
    fn pairs_align_across_models() {
        let dir = tempfile::tempdir().unwrap();
        let a = write_pairs_file(dir.path(), "a.jsonl", &[("1", "P1", "x", "human"), ("2", "P2", "y", "human")]);
        let b = write_pairs_file(dir.path(), "b.jsonl", &[("2", "P2", "z", "gpt")]);
        let set = collect_pairs(&[a, b], "human").unwrap();
        assert_eq!(set.prompts.keys().collect::<Vec<_>>(), ["2"]);
        assert_eq!(set.models.keys().collect::<Vec<_>>(), ["human", "gpt"]);
        assert_eq!(set.unaligned["human"], 1);
    }

    #[test]
    fn conflicting_prompts_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let a = write_pairs_file(dir.path(), "a.jsonl", &[("1", "P1", "x", "human")]);
        let b = write_pairs_file(dir.path(), "b.jsonl", &[("1", "other", "z", "gpt")]);
        let err = collect_pairs(&[a, b], "human").unwrap_err();
        assert_eq!(err.code, EXIT_USER);
    }
}
