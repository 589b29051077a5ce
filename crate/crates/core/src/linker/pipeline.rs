use std::sync::{Arc, Mutex};

use serde::Serialize;
use thiserror::Error;

use super::{predict_sketch, LinkDecision, LinkError, Linker, PoolEntry, QueryContext, ScoringProvider, SketchPrediction, TemplateStore};
use crate::exec::{Answer, ExecConfig, ExecError, Executor};
use crate::kb::KnowledgeBase;
use crate::program::Program;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("sketch prediction failed: {0}")]
    Sketch(LinkError),
    #[error("argument linking failed: {0}")]
    Link(LinkError),
    #[error("execution failed: {0}")]
    Execute(ExecError),
}

impl PipelineError {
    pub fn stage(&self) -> &'static str {
        match self {
            PipelineError::Sketch(_) => "sketch",
            PipelineError::Link(_) => "link",
            PipelineError::Execute(_) => "execute",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QaResult {
    pub prediction: SketchPrediction,
    #[serde(serialize_with = "crate::program::json::serialize")]
    pub program: Program,
    #[serde(skip)]
    pub answer: Answer,
    pub decisions: Vec<LinkDecision>,
    pub diagnostics: Vec<String>,
}

/// Serializes calls into a provider that is not safe to call concurrently.
struct Gated<'a> {
    inner: &'a dyn ScoringProvider,
    gate: &'a Mutex<()>,
}

impl ScoringProvider for Gated<'_> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn encode_context(&self, text: &str) -> Vec<f64> {
        let _g = self.gate.lock().unwrap_or_else(|e| e.into_inner());
        self.inner.encode_context(text)
    }

    fn score(&self, ctx: &QueryContext, c: &PoolEntry) -> f64 {
        let _g = self.gate.lock().unwrap_or_else(|e| e.into_inner());
        self.inner.score(ctx, c)
    }

    fn score_batch(&self, ctx: &QueryContext, c: &[PoolEntry]) -> Vec<f64> {
        let _g = self.gate.lock().unwrap_or_else(|e| e.into_inner());
        self.inner.score_batch(ctx, c)
    }
}

/// Question in, answer out: sketch retrieval, linking, execution.
pub struct Pipeline {
    kb: Arc<KnowledgeBase>,
    templates: TemplateStore,
    linker: Linker,
    scorer: Arc<dyn ScoringProvider>,
    gate: Mutex<()>,
    exec: ExecConfig,
}

impl Pipeline {
    pub fn new(kb: Arc<KnowledgeBase>, templates: TemplateStore, linker: Linker, scorer: Arc<dyn ScoringProvider>) -> Self {
        Pipeline {
            kb,
            templates,
            linker,
            scorer,
            gate: Mutex::new(()),
            exec: ExecConfig::default(),
        }
    }

    pub fn with_exec_config(mut self, exec: ExecConfig) -> Self {
        self.exec = exec;
        self
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn templates(&self) -> &TemplateStore {
        &self.templates
    }

    pub fn linker(&self) -> &Linker {
        &self.linker
    }

    pub fn scorer_name(&self) -> &str {
        self.scorer.name()
    }

    pub fn answer(&self, question: &str) -> Result<QaResult, PipelineError> {
        let prediction = predict_sketch(question, &self.templates).map_err(PipelineError::Sketch)?;
        let template = self.templates.get(prediction.template).map(|t| &t.program);
        let linked = if self.scorer.is_concurrent() {
            self.linker.link(&self.kb, question, &prediction.sketch, template, self.scorer.as_ref())
        } else {
            let g = Gated {
                inner: self.scorer.as_ref(),
                gate: &self.gate,
            };
            self.linker.link(&self.kb, question, &prediction.sketch, template, &g)
        }
        .map_err(PipelineError::Link)?;
        let answer = self.execute(&linked.program)?;
        Ok(QaResult {
            prediction,
            program: linked.program,
            answer,
            decisions: linked.decisions,
            diagnostics: linked.diagnostics,
        })
    }

    pub fn execute(&self, program: &Program) -> Result<Answer, PipelineError> {
        Executor::with_config(&self.kb, self.exec.clone())
            .execute(program)
            .map_err(PipelineError::Execute)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linker::LexicalScorer;

    struct Serial(LexicalScorer);

    impl ScoringProvider for Serial {
        fn name(&self) -> &str {
            "serial"
        }
        fn score(&self, ctx: &QueryContext, c: &PoolEntry) -> f64 {
            self.0.score(ctx, c)
        }
        fn is_concurrent(&self) -> bool {
            false
        }
    }

    fn pipeline(scorer: Arc<dyn ScoringProvider>) -> Pipeline {
        let kb = Arc::new(KnowledgeBase::from_json(include_str!("../../fixtures/mini_discos.json")).unwrap());
        let templates = TemplateStore::from_jsonl(include_str!("../../fixtures/gold.jsonl")).unwrap();
        let linker = Linker::new(&kb);
        Pipeline::new(kb, templates, linker, scorer)
    }

    #[test]
    fn answers_inclination_and_debris_questions() {
        let p = pipeline(Arc::new(LexicalScorer::default()));
        let r = p.answer("What is the inclination of the orbit of Hubble?").unwrap();
        assert_eq!(r.answer.rendered, "28.5 deg");
        let r = p
            .answer("How many rocket debris objects have re-entered Earth's atmosphere before 2019?")
            .unwrap();
        assert_eq!(r.answer.rendered, "7");
    }

    #[test]
    fn serial_provider_used_from_threads() {
        let p = Arc::new(pipeline(Arc::new(Serial(LexicalScorer::default()))));
        let hs: Vec<_> = (0..4)
            .map(|_| {
                let p = Arc::clone(&p);
                std::thread::spawn(move || p.answer("What is the inclination of the orbit of Hubble?").unwrap().answer.rendered)
            })
            .collect();
        for h in hs {
            assert_eq!(h.join().unwrap(), "28.5 deg");
        }
    }

    #[test]
    fn stage_is_reported() {
        let kb = Arc::new(KnowledgeBase::empty());
        let linker = Linker::new(&kb);
        let p = Pipeline::new(kb, TemplateStore::new(), linker, Arc::new(LexicalScorer::default()));
        assert_eq!(p.answer("anything").unwrap_err().stage(), "sketch");
    }
}
