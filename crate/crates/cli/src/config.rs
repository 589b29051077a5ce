use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use kopl_core::linker::{LexicalScorer, Linker, Pipeline, ScoringProvider, TemplateStore, VectorScorer};
use kopl_core::{load_kb, KnowledgeBase};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ScorerChoice {
    Lexical,
    Vector,
}

/// Settings read from a TOML file. Every field may also come from the
/// command line or a `KOPL_*` environment variable, which take precedence.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub kb: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub acronyms: Option<PathBuf>,
    pub validation: Option<PathBuf>,
    pub feedback: Option<PathBuf>,
    pub scorer: Option<ScorerChoice>,
    pub vector_dim: Option<usize>,
    pub port: Option<u16>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

#[derive(Debug, Clone)]
pub struct AppConfig {
    pub kb: PathBuf,
    pub templates: PathBuf,
    pub acronyms: Option<PathBuf>,
    pub validation: Option<PathBuf>,
    pub feedback: PathBuf,
    pub scorer: ScorerChoice,
    pub vector_dim: usize,
    pub port: u16,
}

/// Values given explicitly (flags or environment).
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// TOML configuration file
    #[arg(long, env = "KOPL_CONFIG", global = true)]
    pub config: Option<PathBuf>,
    /// Knowledge base JSON
    #[arg(long, env = "KOPL_KB", global = true)]
    pub kb: Option<PathBuf>,
    /// Template dataset (JSONL with question and program)
    #[arg(long, env = "KOPL_TEMPLATES", global = true)]
    pub templates: Option<PathBuf>,
    /// Acronym table, a JSON list of [acronym, expansion] pairs
    #[arg(long, env = "KOPL_ACRONYMS", global = true)]
    pub acronyms: Option<PathBuf>,
    #[arg(long, env = "KOPL_SCORER", global = true, value_enum)]
    pub scorer: Option<ScorerChoice>,
}

impl AppConfig {
    pub fn resolve(o: &Overrides) -> Result<Self> {
        let file = match &o.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let Some(kb) = o.kb.clone().or(file.kb) else {
            bail!("no knowledge base given (use --kb, KOPL_KB or `kb` in the config file)");
        };
        let Some(templates) = o.templates.clone().or(file.templates) else {
            bail!("no template dataset given (use --templates, KOPL_TEMPLATES or `templates` in the config file)");
        };
        Ok(AppConfig {
            kb,
            templates,
            acronyms: o.acronyms.clone().or(file.acronyms),
            validation: file.validation,
            feedback: file.feedback.unwrap_or_else(|| PathBuf::from("feedback.jsonl")),
            scorer: o.scorer.or(file.scorer).unwrap_or(ScorerChoice::Lexical),
            vector_dim: file.vector_dim.unwrap_or(1024),
            port: file.port.unwrap_or(8080),
        })
    }
}

pub fn load_acronyms(path: Option<&Path>) -> Result<Vec<(String, String)>> {
    match path {
        None => Ok(kopl_core::augment::default_acronyms()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))
        }
    }
}

pub fn scorer(choice: ScorerChoice, dim: usize) -> Arc<dyn ScoringProvider> {
    match choice {
        ScorerChoice::Lexical => Arc::new(LexicalScorer::default()),
        ScorerChoice::Vector => Arc::new(VectorScorer::new(dim)),
    }
}

pub fn build_pipeline(cfg: &AppConfig) -> Result<Pipeline> {
    let kb: Arc<KnowledgeBase> = Arc::new(load_kb(&cfg.kb)?);
    let templates = TemplateStore::load(&cfg.templates)?;
    let acronyms = load_acronyms(cfg.acronyms.as_deref())?;
    let linker = Linker::with_acronyms(&kb, &acronyms);
    Ok(Pipeline::new(kb, templates, linker, scorer(cfg.scorer, cfg.vector_dim)))
}
