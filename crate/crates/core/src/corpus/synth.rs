use rand::distributions::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Zipf;
use serde::{Deserialize, Serialize};

use super::Document;
use crate::{Error, Result};

const PUBLISHERS: [&str; 4] = ["Wiley", "Elsevier", "Springer-Nature", "Other"];

/// Parameters of the planted-topic corpus generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub n_topics: usize,
    pub journals_per_topic: usize,
    pub docs_per_journal: usize,
    pub topic_vocab_size: usize,
    pub shared_vocab_size: usize,
    pub title_len: usize,
    pub abstract_len: usize,
    pub topic_token_ratio: f64,
    /// Exponent of the Zipf law used inside each vocabulary pool.
    pub zipf_exponent: f64,
    pub year: i32,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_topics: 5,
            journals_per_topic: 10,
            docs_per_journal: 100,
            topic_vocab_size: 1000,
            shared_vocab_size: 2000,
            title_len: 10,
            abstract_len: 250,
            topic_token_ratio: 0.8,
            zipf_exponent: 0.8,
            year: 2017,
            seed: 1,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_topics", self.n_topics),
            ("journals_per_topic", self.journals_per_topic),
            ("docs_per_journal", self.docs_per_journal),
            ("topic_vocab_size", self.topic_vocab_size),
            ("shared_vocab_size", self.shared_vocab_size),
            ("title_len", self.title_len),
            ("abstract_len", self.abstract_len),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::invalid(format!("{name} must be at least 1")));
            }
        }
        if !(0.0..=1.0).contains(&self.topic_token_ratio) {
            return Err(Error::invalid("topic_token_ratio must be within [0, 1]"));
        }
        if !(self.zipf_exponent >= 0.0) {
            return Err(Error::invalid("zipf_exponent must be non-negative"));
        }
        Ok(())
    }

    pub fn n_journals(&self) -> usize {
        self.n_topics * self.journals_per_topic
    }

    /// Topic of a generated journal id, if it came from this generator.
    pub fn topic_of_journal(journal_id: &str) -> Option<usize> {
        journal_id.strip_prefix('t')?.split('-').next()?.parse().ok()
    }

    /// Topic of a generated topic token (`t<topic>w<index>`); shared tokens give `None`.
    pub fn topic_of_token(token: &str) -> Option<usize> {
        let rest = token.strip_prefix('t')?;
        let (topic, idx) = rest.split_once('w')?;
        idx.parse::<usize>().ok()?;
        topic.parse().ok()
    }

    pub fn topic_token(topic: usize, index: usize) -> String {
        format!("t{topic}w{index}")
    }

    pub fn shared_token(index: usize) -> String {
        format!("c{index}")
    }
}

/// Generates a corpus with planted topics.
///
/// Each journal belongs to one topic. Every token is drawn from the journal's
/// topic pool with probability `topic_token_ratio`, otherwise from the shared
/// pool; draws inside a pool follow a Zipf law. Journals of the same topic
/// rotate the Zipf ranking of the topic pool by a journal-specific offset, so
/// each journal has its own focus within the topic. Topic pools are disjoint.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<Vec<Document>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let topic_zipf = Zipf::new(spec.topic_vocab_size as u64, spec.zipf_exponent)
        .map_err(|e| Error::invalid(e.to_string()))?;
    let shared_zipf = Zipf::new(spec.shared_vocab_size as u64, spec.zipf_exponent)
        .map_err(|e| Error::invalid(e.to_string()))?;

    let mut docs = Vec::with_capacity(spec.n_journals() * spec.docs_per_journal);
    for topic in 0..spec.n_topics {
        for j in 0..spec.journals_per_topic {
            let journal_id = format!("t{topic}-j{j:02}");
            let journal_name = format!("Synthetic Journal {topic}.{j}");
            let publisher = PUBLISHERS[rng.gen_range(0..PUBLISHERS.len())].to_string();
            let offset = j * spec.topic_vocab_size / spec.journals_per_topic;

            let draw = |rng: &mut ChaCha8Rng, len: usize| -> String {
                let mut words = Vec::with_capacity(len);
                for _ in 0..len {
                    if rng.gen_bool(spec.topic_token_ratio) {
                        let r = topic_zipf.sample(rng) as usize - 1;
                        let idx = (r + offset) % spec.topic_vocab_size;
                        words.push(SynthSpec::topic_token(topic, idx));
                    } else {
                        let r = shared_zipf.sample(rng) as usize - 1;
                        words.push(SynthSpec::shared_token(r));
                    }
                }
                words.join(" ")
            };

            for k in 0..spec.docs_per_journal {
                let title = draw(&mut rng, spec.title_len);
                let abstract_text = draw(&mut rng, spec.abstract_len);
                docs.push(Document {
                    id: format!("{journal_id}-d{k:04}"),
                    title,
                    abstract_text,
                    journal_id: journal_id.clone(),
                    journal_name: journal_name.clone(),
                    publisher: publisher.clone(),
                    year: spec.year,
                });
            }
        }
    }
    Ok(docs)
}
