use super::{Completion, PromptExchange, Reasoner, ReasonerError};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CassetteMode {
    /// Call the inner backend and append every exchange.
    Record,
    /// Answer only from the file; never touch the inner backend.
    Replay,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Entry {
    digest: String,
    exchange: PromptExchange,
    response: String,
}

/// Line-delimited JSON file of recorded exchanges keyed by request digest.
/// Identical requests are answered in recording order.
pub struct Cassette {
    path: PathBuf,
    entries: Mutex<HashMap<String, VecDeque<String>>>,
    writer: Mutex<Option<File>>,
}

impl Cassette {
    pub fn open(path: impl AsRef<Path>, mode: CassetteMode) -> Result<Self, ReasonerError> {
        let path = path.as_ref().to_path_buf();
        let err = |e: std::io::Error| ReasonerError::Cassette(format!("{}: {e}", path.display()));
        let mut entries: HashMap<String, VecDeque<String>> = HashMap::new();
        if mode == CassetteMode::Replay {
            let file = File::open(&path).map_err(err)?;
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(err)?;
                if line.trim().is_empty() {
                    continue;
                }
                let e: Entry = serde_json::from_str(&line)
                    .map_err(|e| ReasonerError::Cassette(format!("{} line {}: {e}", path.display(), i + 1)))?;
                entries.entry(e.digest).or_default().push_back(e.response);
            }
        }
        let writer = match mode {
            CassetteMode::Record => Some(OpenOptions::new().create(true).append(true).open(&path).map_err(err)?),
            CassetteMode::Replay => None,
        };
        Ok(Self { path, entries: Mutex::new(entries), writer: Mutex::new(writer) })
    }

    fn lookup(&self, digest: &str) -> Option<String> {
        self.entries.lock().expect("cassette lock").get_mut(digest).and_then(VecDeque::pop_front)
    }

    fn record(&self, exchange: &PromptExchange, response: &str) -> Result<(), ReasonerError> {
        let entry = Entry { digest: exchange.digest(), exchange: exchange.clone(), response: response.to_string() };
        let line = serde_json::to_string(&entry).map_err(|e| ReasonerError::Cassette(e.to_string()))?;
        let mut w = self.writer.lock().expect("cassette lock");
        if let Some(f) = w.as_mut() {
            writeln!(f, "{line}").map_err(|e| ReasonerError::Cassette(format!("{}: {e}", self.path.display())))?;
        }
        Ok(())
    }
}

/// Wraps a backend with a cassette. In replay mode `inner` may be `None`.
pub struct CassetteReasoner {
    inner: Option<Arc<dyn Reasoner>>,
    cassette: Cassette,
}

impl CassetteReasoner {
    pub fn new(inner: Option<Arc<dyn Reasoner>>, cassette: Cassette) -> Self {
        Self { inner, cassette }
    }
}

impl Reasoner for CassetteReasoner {
    fn name(&self) -> String {
        match &self.inner {
            Some(r) => format!("cassette:{}", r.name()),
            None => "cassette".into(),
        }
    }

    fn complete(&self, exchange: &PromptExchange) -> Result<Completion, ReasonerError> {
        let Some(inner) = &self.inner else {
            let digest = exchange.digest();
            return self
                .cassette
                .lookup(&digest)
                .map(|text| Completion { text, retries: 0 })
                .ok_or_else(|| ReasonerError::Cassette(format!("no recorded response for request {digest}")));
        };
        let c = inner.complete(exchange)?;
        self.cassette.record(exchange, &c.text)?;
        Ok(c)
    }

    fn timed(&self) -> bool {
        self.inner.as_ref().is_some_and(|r| r.timed())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reasoner::OracleReasoner;

    #[test]
    fn record_then_replay_returns_identical_text() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        let ex = PromptExchange::new("sys", "What is this opponent's likely policy? nothing to see");
        let recorded = {
            let c = Cassette::open(&path, CassetteMode::Record).unwrap();
            let r = CassetteReasoner::new(Some(Arc::new(OracleReasoner)), c);
            r.complete(&ex).unwrap().text
        };
        let c = Cassette::open(&path, CassetteMode::Replay).unwrap();
        let r = CassetteReasoner::new(None, c);
        assert_eq!(r.complete(&ex).unwrap().text, recorded);
        assert!(matches!(r.complete(&ex), Err(ReasonerError::Cassette(_))));
    }
}
