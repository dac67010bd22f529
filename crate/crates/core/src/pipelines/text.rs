//! Bag-of-words corpora and term-leakage scoring.

use serde::Serialize;

use super::{PipelineError, Result};
use crate::estimators::{cond_density_estimate, Matrix, SampleSet, TideModel};
use crate::rng::SeedStream;

/// Token-count vectors over a frequency-ordered vocabulary with a binary
/// attribute per document.
#[derive(Debug, Clone)]
pub struct Corpus {
    /// Terms ordered by descending corpus frequency; this is the
    /// conditioning order for prefix evaluation.
    pub vocabulary: Vec<String>,
    /// Document-term counts, one row per document.
    pub counts: Matrix,
    pub labels: Vec<u8>,
}

impl Corpus {
    pub fn num_docs(&self) -> usize {
        self.labels.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn label_balance(&self) -> f64 {
        if self.labels.is_empty() {
            return 0.0;
        }
        self.labels.iter().filter(|&&l| l == 1).count() as f64 / self.labels.len() as f64
    }

    /// Sample set view: s is the label column, x the count vector.
    pub fn to_sample_set(&self, train_fraction: f64, stream: &mut SeedStream) -> Result<SampleSet> {
        let n = self.num_docs();
        let s = Matrix::new(self.labels.iter().map(|&l| l as f64).collect(), n, 1)?;
        Ok(SampleSet::with_random_split(
            s,
            self.counts.clone(),
            train_fraction,
            stream,
        )?)
    }
}

/// Fixed preprocessing: lowercase; drop URL tokens and @handles; keep the
/// tag word of #tags; fold common accented Latin letters to ASCII and drop
/// other non-ASCII; split on non-alphanumeric; drop tokens shorter than 2.
fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for raw in text.split_whitespace() {
        let lower = raw.to_lowercase();
        if lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.")
        {
            continue;
        }
        if lower.starts_with('@') {
            continue;
        }
        let stripped = lower.strip_prefix('#').unwrap_or(&lower);
        let folded: String = stripped
            .chars()
            .filter_map(fold_char)
            .collect();
        for piece in folded.split(|c: char| !c.is_ascii_alphanumeric()) {
            if piece.len() >= 2 {
                tokens.push(piece.to_string());
            }
        }
    }
    tokens
}

fn fold_char(c: char) -> Option<char> {
    if c.is_ascii() {
        return Some(c);
    }
    let folded = match c {
        'à' | 'á' | 'â' | 'ã' | 'ä' | 'å' => 'a',
        'è' | 'é' | 'ê' | 'ë' => 'e',
        'ì' | 'í' | 'î' | 'ï' => 'i',
        'ò' | 'ó' | 'ô' | 'õ' | 'ö' => 'o',
        'ù' | 'ú' | 'û' | 'ü' => 'u',
        'ñ' => 'n',
        'ç' => 'c',
        'ý' | 'ÿ' => 'y',
        _ => return None,
    };
    Some(folded)
}

/// Builds a corpus from (label, text) documents, keeping the
/// `vocab_size` most frequent terms, ordered by descending frequency
/// (ties broken lexicographically for determinism).
pub fn tokenize_bow(docs: &[(u8, String)], vocab_size: usize) -> Result<Corpus> {
    if docs.is_empty() {
        return Err(PipelineError::InvalidSpec("no documents".into()));
    }
    if vocab_size == 0 {
        return Err(PipelineError::InvalidSpec("vocab_size must be >= 1".into()));
    }
    let tokenized: Vec<Vec<String>> = docs.iter().map(|(_, t)| tokenize(t)).collect();
    let mut freq: std::collections::HashMap<&str, u64> = std::collections::HashMap::new();
    for tokens in &tokenized {
        for t in tokens {
            *freq.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    if freq.is_empty() {
        return Err(PipelineError::EmptyVocabulary);
    }
    let mut terms: Vec<(&str, u64)> = freq.into_iter().collect();
    terms.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    terms.truncate(vocab_size);
    let vocabulary: Vec<String> = terms.iter().map(|(t, _)| t.to_string()).collect();
    let index: std::collections::HashMap<&str, usize> = vocabulary
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();

    let n = docs.len();
    let v = vocabulary.len();
    let mut counts = vec![0.0; n * v];
    for (row, tokens) in tokenized.iter().enumerate() {
        for t in tokens {
            if let Some(&col) = index.get(t.as_str()) {
                counts[row * v + col] += 1.0;
            }
        }
    }
    Ok(Corpus {
        vocabulary,
        counts: Matrix::new(counts, n, v)?,
        labels: docs.iter().map(|(l, _)| *l).collect(),
    })
}

/// Builds count vectors against an existing vocabulary (terms not in the
/// vocabulary are dropped). Used when scoring new documents with a model
/// whose conditioning order was fixed at training time.
pub fn tokenize_with_vocab(docs: &[(u8, String)], vocabulary: &[String]) -> Result<Corpus> {
    if docs.is_empty() {
        return Err(PipelineError::InvalidSpec("no documents".into()));
    }
    if vocabulary.is_empty() {
        return Err(PipelineError::EmptyVocabulary);
    }
    let index: std::collections::HashMap<&str, usize> = vocabulary
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let n = docs.len();
    let v = vocabulary.len();
    let mut counts = vec![0.0; n * v];
    for (row, (_, text)) in docs.iter().enumerate() {
        for t in tokenize(text) {
            if let Some(&col) = index.get(t.as_str()) {
                counts[row * v + col] += 1.0;
            }
        }
    }
    Ok(Corpus {
        vocabulary: vocabulary.to_vec(),
        counts: Matrix::new(counts, n, v)?,
        labels: docs.iter().map(|(l, _)| *l).collect(),
    })
}

/// Training hyperparameters for corpus models.
pub fn corpus_train_config(seed: u64) -> crate::estimators::TrainConfig {
    crate::estimators::TrainConfig {
        epochs: 400,
        batch_size: 128,
        learning_rate: 0.01,
        seed,
        ..Default::default()
    }
}

/// Trains a prefix-masked TIDE on a corpus (70/30 split derived from the
/// config seed). Returns the model, training report, and the split view.
pub fn train_corpus_model(
    corpus: &Corpus,
    trim_bound: f64,
    config: &crate::estimators::TrainConfig,
) -> Result<(TideModel, crate::estimators::TrainReport, SampleSet)> {
    let mut split_stream = SeedStream::derive(config.seed, 0x7e87);
    let data = corpus.to_sample_set(0.7, &mut split_stream)?;
    let layout = crate::estimators::FeatureLayout::prefixed(corpus.vocab_size(), 1);
    let (model, report) =
        crate::estimators::tide_train(&data, layout, &[100, 50, 50], trim_bound, config)?;
    Ok((model, report, data))
}

/// One term's leakage score. `signed_score` is the peak |conditional
/// density| signed toward the attribute value that attains it (positive
/// for s = 1, negative for s = 0).
#[derive(Debug, Clone, Serialize)]
pub struct TermScore {
    pub term: String,
    pub position: usize,
    pub max_abs_cond_density: f64,
    pub attribute: u8,
    pub signed_score: f64,
}

/// Scores every vocabulary term by the peak estimated conditional
/// information density over both attribute values and the given held-out
/// documents. Returns scores sorted by descending magnitude.
pub fn score_terms(model: &TideModel, corpus: &Corpus, doc_rows: &[usize]) -> Result<Vec<TermScore>> {
    if doc_rows.is_empty() {
        return Err(PipelineError::InvalidSpec("no evaluation documents".into()));
    }
    let v = corpus.vocab_size();
    if model.feature_count() != v {
        return Err(PipelineError::InvalidSpec(format!(
            "model expects {} features, vocabulary has {v}",
            model.feature_count()
        )));
    }
    let mut scores = Vec::with_capacity(v);
    for j in 0..v {
        let mut best_abs = 0.0f64;
        let mut best_attr = 0u8;
        for &row in doc_rows {
            let x = corpus.counts.row(row);
            for s in 0..2u8 {
                let val = cond_density_estimate(model, &[s as f64], x, j + 1)?;
                if val.abs() > best_abs {
                    best_abs = val.abs();
                    best_attr = s;
                }
            }
        }
        let signed = if best_attr == 1 { best_abs } else { -best_abs };
        scores.push(TermScore {
            term: corpus.vocabulary[j].clone(),
            position: j,
            max_abs_cond_density: best_abs,
            attribute: best_attr,
            signed_score: signed,
        });
    }
    scores.sort_by(|a, b| {
        b.max_abs_cond_density
            .partial_cmp(&a.max_abs_cond_density)
            .expect("finite scores")
    });
    Ok(scores)
}

/// CSV with columns (rank, term, signed_score, attribute, max_abs).
pub fn term_scores_csv(scores: &[TermScore]) -> String {
    let mut out = String::from("rank,term,signed_score,attribute,max_abs_cond_density\n");
    for (rank, s) in scores.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            rank + 1,
            s.term,
            s.signed_score,
            s.attribute,
            s.max_abs_cond_density
        ));
    }
    out
}

/// Synthetic corpus with a planted attribute-revealing term: filler terms
/// are label-independent, while "alpha" appears only in label-1 documents.
pub fn gen_planted_corpus(n_docs: usize, seed: u64) -> Vec<(u8, String)> {
    let mut stream = SeedStream::new(seed);
    let fillers = [
        "market", "report", "coffee", "weather", "city", "game", "music", "trip", "book",
        "photo", "lunch", "friday", "meeting", "project", "garden", "movie", "street", "river",
        "winter", "summer",
    ];
    let mut docs = Vec::with_capacity(n_docs);
    for i in 0..n_docs {
        let label = (i % 2) as u8;
        let len = 6 + stream.below(6);
        let mut words = Vec::with_capacity(len + 2);
        for _ in 0..len {
            // Zipf-ish: favor early fillers
            let pick = (stream.uniform() * stream.uniform() * fillers.len() as f64) as usize;
            words.push(fillers[pick.min(fillers.len() - 1)]);
        }
        if label == 1 && stream.uniform() < 0.8 {
            let times = 1 + stream.below(2);
            words.extend(std::iter::repeat_n("alpha", times));
        }
        docs.push((label, words.join(" ")));
    }
    docs
}
