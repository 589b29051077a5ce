//! Command-line front end, REPL and HTTP service for the KoPL
//! question-answering pipeline.

pub mod config;
pub mod feedback;
pub mod service;

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use kopl_core::augment::{
    augment_programs, build_prompt, read_dataset, split_dataset, write_dataset, AugmentConfig, AugmentedSample,
    DatasetRecord, Origin,
};
use kopl_core::eval::evaluate_partial;
use kopl_core::program::{parse_program, program_from_value, program_to_value};
use kopl_core::{load_kb, Pipeline, Program};

use config::{AppConfig, FileConfig, Overrides};

#[derive(Debug, Parser)]
#[command(name = "kopl", version, about = "Question answering over a space-object knowledge base with KoPL programs")]
pub struct Cli {
    #[command(flatten)]
    pub common: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a knowledge base and print its counts
    Load,
    /// Execute a program JSON file
    Exec {
        program: PathBuf,
        /// Print the structured answer as JSON
        #[arg(long)]
        json: bool,
    },
    /// Answer a question: program, answer and linking decisions as JSON
    Answer { question: String },
    /// Generate substituted programs and question-generation prompts
    Augment {
        /// Manual dataset (JSONL with question and program)
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Allow entities of the manual dataset as replacements
        #[arg(long)]
        reuse_manual_entities: bool,
        /// Drop samples whose answer is empty
        #[arg(long)]
        drop_empty: bool,
        /// Output dataset JSONL (questions left null)
        #[arg(long)]
        out: PathBuf,
        /// Output prompts JSONL, one prompt per augmented sample
        #[arg(long)]
        prompts: Option<PathBuf>,
        /// Prompt length limit in characters
        #[arg(long, default_value_t = 6000)]
        limit: usize,
    },
    /// Score predicted programs against gold programs
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        /// Print the JSON report instead of the table
        #[arg(long)]
        json: bool,
    },
    /// Split manual and augmented data into training and validation sets
    Split {
        #[arg(long)]
        manual: PathBuf,
        #[arg(long)]
        augmented: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        val_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        validation: PathBuf,
    },
    /// Start the HTTP service
    Serve {
        #[arg(long)]
        port: Option<u16>,
        /// Feedback log path
        #[arg(long)]
        feedback: Option<PathBuf>,
    },
    /// Interactive question loop
    Repl,
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let o = &cli.common;
    match cli.command {
        Command::Load => {
            let kb = load_kb(kb_path(o)?)?;
            let s = kb.stats();
            writeln!(out, "entities         {}", s.entities)?;
            writeln!(out, "concepts         {}", s.concepts)?;
            writeln!(out, "relations        {}", s.relations)?;
            writeln!(out, "attribute keys   {}", s.attribute_keys)?;
            writeln!(out, "attribute facts  {}", s.attribute_facts)?;
            writeln!(out, "relation facts   {}", s.relation_facts)?;
        }
        Command::Exec { program, json } => {
            let kb = load_kb(kb_path(o)?)?;
            let text = read(&program)?;
            let p = parse_program(&text).with_context(|| format!("parse: {}", program.display()))?;
            let a = kopl_core::execute_program(&kb, &p).context("execute")?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&a.to_json(&kb))?)?;
            } else {
                writeln!(out, "{}", a.rendered)?;
            }
            for w in &a.warnings {
                writeln!(err, "warning: {w}")?;
            }
        }
        Command::Answer { question } => {
            let p = config::build_pipeline(&AppConfig::resolve(o)?)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&answer_json(&p, &question)?)?)?;
        }
        Command::Augment {
            dataset,
            count,
            seed,
            reuse_manual_entities,
            drop_empty,
            out: out_path,
            prompts,
            limit,
        } => {
            let kb = load_kb(kb_path(o)?)?;
            let records = read_dataset(&read(&dataset)?)?;
            let programs: Vec<Program> = records.iter().map(|r| r.program.clone()).collect();
            let cfg = AugmentConfig {
                count,
                seed,
                exclude_manual_entities: !reuse_manual_entities,
                keep_empty: !drop_empty,
            };
            let m = augment_programs(&programs, &kb, &cfg);
            for s in &m.skipped {
                writeln!(err, "skipped source {}: {}", s.source, s.reason)?;
            }
            let rows: Vec<DatasetRecord> = m.samples.iter().map(augmented_record).collect();
            write_file(&out_path, &write_dataset(&rows))?;
            if let Some(path) = prompts {
                let manual: Vec<(String, Program)> = records
                    .iter()
                    .filter_map(|r| r.question.clone().map(|q| (q, r.program.clone())))
                    .collect();
                let acronyms = config::load_acronyms(o.acronyms.as_deref())?;
                let mut text = String::new();
                for s in &m.samples {
                    let b = build_prompt(s, &manual, limit, &acronyms)?;
                    let line = serde_json::json!({"source": s.source, "target": b.target, "fallback": b.fallback, "prompt": b.render()});
                    text.push_str(&line.to_string());
                    text.push('\n');
                }
                write_file(&path, &text)?;
            }
            writeln!(out, "{} augmented samples from {} programs", m.samples.len(), programs.len())?;
        }
        Command::Eval { pred, gold, json } => {
            let golds: Vec<Program> = read_dataset(&read(&gold)?)?.into_iter().map(|r| r.program).collect();
            let preds = read_predictions(&read(&pred)?);
            let refs: Vec<Option<&Program>> = preds.iter().map(Option::as_ref).collect();
            let report = evaluate_partial(&refs, &golds)?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            } else {
                write!(out, "{}", report.to_table())?;
            }
        }
        Command::Split {
            manual,
            augmented,
            val_fraction,
            seed,
            train,
            validation,
        } => {
            let m = with_origin(read_dataset(&read(&manual)?)?, Origin::Manual);
            let a = with_origin(read_dataset(&read(&augmented)?)?, Origin::Augmented);
            let s = split_dataset(&m, &a, val_fraction, seed)?;
            write_file(&train, &write_dataset(&s.train))?;
            write_file(&validation, &write_dataset(&s.validation))?;
            writeln!(out, "train {}  validation {}", s.train.len(), s.validation.len())?;
        }
        Command::Serve { port, feedback } => {
            let mut cfg = AppConfig::resolve(o)?;
            if let Some(p) = port {
                cfg.port = p;
            }
            if let Some(f) = feedback {
                cfg.feedback = f;
            }
            tokio::runtime::Runtime::new()?.block_on(service::serve(cfg))?;
        }
        Command::Repl => {
            let p = config::build_pipeline(&AppConfig::resolve(o)?)?;
            repl(&p, &mut std::io::stdin().lock(), out)?;
        }
    }
    Ok(())
}

fn kb_path(o: &Overrides) -> Result<PathBuf> {
    if let Some(p) = &o.kb {
        return Ok(p.clone());
    }
    if let Some(c) = &o.config {
        if let Some(p) = FileConfig::load(c)?.kb {
            return Ok(p);
        }
    }
    bail!("no knowledge base given (use --kb, KOPL_KB or `kb` in the config file)")
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn with_origin(mut rs: Vec<DatasetRecord>, origin: Origin) -> Vec<DatasetRecord> {
    for r in &mut rs {
        r.source = origin;
    }
    rs
}

fn augmented_record(s: &AugmentedSample) -> DatasetRecord {
    DatasetRecord {
        question: s.question.clone(),
        program: s.program.clone(),
        source: Origin::Augmented,
        meta: serde_json::json!({
            "source": s.source,
            "substitutions": s.substitutions,
            "generation": s.meta,
        }),
    }
}

/// One prediction per line: a record with a `program` field or a bare
/// program array. Unparseable lines count as failed predictions.
pub fn read_predictions(text: &str) -> Vec<Option<Program>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).ok()?;
            let p = match v {
                serde_json::Value::Object(mut m) => m.remove("program")?,
                other => other,
            };
            program_from_value(p).ok()
        })
        .collect()
}

pub fn answer_json(p: &Pipeline, question: &str) -> Result<serde_json::Value> {
    let r = p.answer(question).map_err(|e| anyhow::anyhow!("{}: {e}", e.stage()))?;
    Ok(serde_json::json!({
        "program": program_to_value(&r.program),
        "answer": r.answer.to_json(p.kb()),
        "decisions": r.decisions,
        "diagnostics": r.diagnostics,
    }))
}

/// Reads questions line by line until EOF or `:quit`.
pub fn repl(p: &Pipeline, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<()> {
    let mut line = String::new();
    loop {
        write!(out, "> ")?;
        out.flush()?;
        line.clear();
        if input.read_line(&mut line)? == 0 {
            writeln!(out)?;
            return Ok(());
        }
        let q = line.trim();
        match q {
            "" => continue,
            ":quit" | ":q" => return Ok(()),
            _ => {}
        }
        match p.answer(q) {
            Ok(r) => {
                writeln!(out, "program: {}", r.program)?;
                writeln!(out, "answer:  {}", r.answer.rendered)?;
            }
            Err(e) => writeln!(out, "{} failed: {e}", e.stage())?,
        }
    }
}
