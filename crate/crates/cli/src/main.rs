//! `uctg`: corpus filtering, feature extraction, and prompt/continuation comparison.

mod config;
mod manifest;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pipeline::Failure;

#[derive(Parser, Debug)]
#[command(name = "uctg", version, about = "Linguistic complexity comparison of prompts and continuations")]
struct Cli {
    /// Worker threads for document processing [default: available cores]
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load JSONL pair files and apply the word-count filters
    Ingest(IngestArgs),
    /// Annotate prompts and continuations and write the documents as JSONL
    Annotate(AnnotateArgs),
    /// Compute the 160-feature vectors for prompts and each model's continuations
    Extract(ExtractArgs),
    /// Welch t-tests of prompt vs. continuation features, one table per family
    Compare(CompareArgs),
    /// Pearson correlation of model continuation features with human continuations
    Correlate(CorrelateArgs),
    /// Run ingest, extract, compare, and correlate in one go
    Report(ReportArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// TOML run configuration; flags override its values
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory [default: out]
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct FilterArgs {
    /// Minimum prompt length in words, inclusive [default: 30]
    #[arg(long, value_name = "N")]
    pub min_prompt_words: Option<usize>,
    /// Minimum continuation length in words, inclusive [default: 150]
    #[arg(long, value_name = "N")]
    pub min_cont_words: Option<usize>,
    /// Maximum continuation length in words, inclusive [default: 300]
    #[arg(long, value_name = "N")]
    pub max_cont_words: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct AnnotationArgs {
    /// Pair files (JSONL with id, prompt, continuation, model); repeatable
    #[arg(long = "pairs", value_name = "FILE")]
    pub pairs: Vec<PathBuf>,
    /// Annotation tier: builtin or full [default: builtin]
    #[arg(long, value_name = "TIER")]
    pub tier: Option<String>,
    /// Gold CoNLL-U for the full tier; documents keyed `<id>/prompt` and `<id>/<model>`
    #[arg(long, value_name = "FILE")]
    pub conllu: Option<PathBuf>,
    /// Bracketed constituency trees for the full tier, same keys as the CoNLL-U
    #[arg(long, value_name = "FILE")]
    pub trees: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Pair files to filter; repeatable
    #[arg(long = "pairs", value_name = "FILE")]
    pairs: Vec<PathBuf>,
    #[command(flatten)]
    filter: FilterArgs,
}

#[derive(Args, Debug)]
struct AnnotateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    annotation: AnnotationArgs,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    annotation: AnnotationArgs,
    /// Lexicon profile file (TOML list of [[lexicon]] tables); relative paths
    /// resolve against UCTG_LEXICON_DIR if set, else the profile's directory
    #[arg(long, value_name = "FILE")]
    lexicons: Option<PathBuf>,
    /// Feature table format: csv or json [default: csv]
    #[arg(long, value_name = "FORMAT")]
    format: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ModelInputs {
    /// Directory written by `extract`; supplies the prompt and model tables
    #[arg(long, value_name = "DIR")]
    pub features: Option<PathBuf>,
    /// Model continuation table as LABEL=FILE; repeatable
    #[arg(long = "model", value_name = "LABEL=FILE")]
    pub models: Vec<String>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Prompt feature table
    #[arg(long, value_name = "FILE")]
    prompts: Option<PathBuf>,
    #[command(flatten)]
    inputs: ModelInputs,
    /// Family-wise significance level before correction [default: 0.05]
    #[arg(long, value_name = "ALPHA")]
    alpha: Option<f64>,
    /// Number of comparisons for the Bonferroni correction [default: 3]
    #[arg(long, value_name = "M")]
    groups: Option<usize>,
    /// Output format: markdown, csv, json, or all [default: all]
    #[arg(long, value_name = "FORMAT")]
    format: Option<String>,
}

#[derive(Args, Debug)]
struct CorrelateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Human continuation feature table
    #[arg(long, value_name = "FILE")]
    human: Option<PathBuf>,
    /// Label of the human continuations when reading a features directory [default: human]
    #[arg(long, value_name = "LABEL")]
    human_label: Option<String>,
    #[command(flatten)]
    inputs: ModelInputs,
    /// Rows per model [default: 10]
    #[arg(long, value_name = "K")]
    top: Option<usize>,
    /// Output format: markdown, csv, json, or all [default: all]
    #[arg(long, value_name = "FORMAT")]
    format: Option<String>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    annotation: AnnotationArgs,
    #[command(flatten)]
    filter: FilterArgs,
    /// Lexicon profile file, as for `extract`
    #[arg(long, value_name = "FILE")]
    lexicons: Option<PathBuf>,
    /// Family-wise significance level before correction [default: 0.05]
    #[arg(long, value_name = "ALPHA")]
    alpha: Option<f64>,
    /// Number of comparisons for the Bonferroni correction [default: 3]
    #[arg(long, value_name = "M")]
    groups: Option<usize>,
    /// Correlation rows per model [default: 10]
    #[arg(long, value_name = "K")]
    top: Option<usize>,
    /// Label of the human continuations [default: human]
    #[arg(long, value_name = "LABEL")]
    human_label: Option<String>,
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Failure::user(anyhow::anyhow!("--workers must be at least 1")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::internal(e.into()))?;
    }
    match cli.command {
        Command::Ingest(a) => pipeline::cmd_ingest(&a.common, &a.pairs, &a.filter),
        Command::Annotate(a) => pipeline::cmd_annotate(&a.common, &a.annotation),
        Command::Extract(a) => pipeline::cmd_extract(&a.common, &a.annotation, a.lexicons.as_deref(), a.format.as_deref()),
        Command::Compare(a) => pipeline::cmd_compare(
            &a.common,
            a.prompts.as_deref(),
            &a.inputs,
            a.alpha,
            a.groups,
            a.format.as_deref(),
        ),
        Command::Correlate(a) => pipeline::cmd_correlate(
            &a.common,
            a.human.as_deref(),
            a.human_label.as_deref(),
            &a.inputs,
            a.top,
            a.format.as_deref(),
        ),
        Command::Report(a) => pipeline::cmd_report(
            &a.common,
            &a.annotation,
            &a.filter,
            pipeline::ReportOptions {
                lexicons: a.lexicons,
                alpha: a.alpha,
                groups: a.groups,
                top: a.top,
                human: a.human_label,
            },
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
