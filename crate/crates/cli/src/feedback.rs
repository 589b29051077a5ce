//! Append-only JSONL feedback log with a single writer task.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use tokio::io::AsyncWriteExt;
use tokio::sync::{mpsc, oneshot};
use tokio::task::JoinHandle;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rating {
    Up,
    Down,
    #[default]
    None,
}

/// Body of a feedback submission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackInput {
    pub username: String,
    pub question: String,
    /// Predicted program in its JSON form.
    pub program: serde_json::Value,
    pub answer: String,
    #[serde(default)]
    pub rating: Rating,
    #[serde(default)]
    pub comment: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackRecord {
    pub id: u64,
    pub timestamp: String,
    #[serde(flatten)]
    pub input: FeedbackInput,
}

type Job = (FeedbackInput, oneshot::Sender<std::io::Result<u64>>);

/// Handle to the writer task. Cloning shares the same writer.
#[derive(Clone)]
pub struct FeedbackLog {
    tx: mpsc::Sender<Job>,
    path: PathBuf,
}

pub struct FeedbackWriter {
    task: JoinHandle<()>,
}

impl FeedbackWriter {
    /// Waits until every queued record is on disk. Call after dropping all
    /// [`FeedbackLog`] handles.
    pub async fn finish(self) {
        let _ = self.task.await;
    }
}

impl FeedbackLog {
    /// Opens (or creates) the log. Ids continue after the existing lines.
    pub async fn open(path: &Path) -> Result<(FeedbackLog, FeedbackWriter)> {
        let existing = match tokio::fs::read_to_string(path).await {
            Ok(s) => s,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
            Err(e) => return Err(e).with_context(|| format!("reading {}", path.display())),
        };
        let mut next_id = existing.lines().filter(|l| !l.trim().is_empty()).count() as u64;
        let mut last: Option<DateTime<Utc>> = existing
            .lines()
            .filter_map(|l| serde_json::from_str::<FeedbackRecord>(l).ok())
            .filter_map(|r| DateTime::parse_from_rfc3339(&r.timestamp).ok())
            .map(|t| t.with_timezone(&Utc))
            .max();
        let mut file = tokio::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .await
            .with_context(|| format!("opening {}", path.display()))?;
        let (tx, mut rx) = mpsc::channel::<Job>(256);
        let task = tokio::spawn(async move {
            while let Some((input, reply)) = rx.recv().await {
                let now = Utc::now();
                let ts = last.map_or(now, |l| l.max(now));
                last = Some(ts);
                let rec = FeedbackRecord {
                    id: next_id,
                    timestamp: ts.to_rfc3339_opts(SecondsFormat::Micros, true),
                    input,
                };
                let mut line = serde_json::to_string(&rec).expect("feedback serializes");
                line.push('\n');
                let res = async {
                    file.write_all(line.as_bytes()).await?;
                    file.flush().await
                }
                .await;
                if res.is_ok() {
                    next_id += 1;
                }
                let _ = reply.send(res.map(|_| rec.id));
            }
            let _ = file.sync_all().await;
        });
        Ok((
            FeedbackLog {
                tx,
                path: path.to_owned(),
            },
            FeedbackWriter { task },
        ))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub async fn append(&self, input: FeedbackInput) -> Result<u64> {
        let (reply, rx) = oneshot::channel();
        self.tx
            .send((input, reply))
            .await
            .map_err(|_| anyhow::anyhow!("feedback writer has stopped"))?;
        Ok(rx.await.context("feedback writer has stopped")??)
    }
}
