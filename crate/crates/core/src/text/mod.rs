//! Sentence splitting, tokenization, POS tagging and chunking.

mod chunk;
mod sentence;
mod tag;
mod tagger;
mod token;

pub use chunk::{chunk_np, chunk_tags, Chunk, ChunkKind};
pub use sentence::{split_and_tokenize, split_sentences, Sentence};
pub use tag::PosTag;
pub use tagger::{parse_gold_corpus, train_tagger, TaggedSentence, Tagger, TaggerConfig};
pub use token::{tokenize, tokenize_at, Token};

/// A sentence after tagging and chunking, ready for both detectors.
#[derive(Debug, Clone)]
pub struct AnalyzedSentence {
    pub sentence: Sentence,
    pub chunks: Vec<Chunk>,
}

impl AnalyzedSentence {
    pub fn tokens(&self) -> &[Token] {
        &self.sentence.tokens
    }

    pub fn tags(&self) -> Vec<PosTag> {
        self.sentence.tokens.iter().map(Token::tag).collect()
    }
}

/// Splits, tokenizes, tags and chunks a document's text.
pub fn analyze(doc_id: &str, text: &str, tagger: &Tagger) -> crate::Result<Vec<AnalyzedSentence>> {
    split_and_tokenize(doc_id, text)
        .into_iter()
        .map(|mut sentence| {
            tagger.tag(&mut sentence.tokens)?;
            let chunks = chunk_np(&sentence.tokens);
            Ok(AnalyzedSentence { sentence, chunks })
        })
        .collect()
}

/// Builds an analyzed sentence from pre-tagged words, joining them with
/// single spaces. Returns the synthesized text alongside.
pub fn from_tagged(words: &[(String, PosTag)]) -> (String, AnalyzedSentence) {
    let mut text = String::new();
    let mut tokens = Vec::with_capacity(words.len());
    for (w, t) in words {
        if !text.is_empty() {
            text.push(' ');
        }
        let start = text.len();
        text.push_str(w);
        tokens.push(Token {
            surface: w.clone(),
            span: (start, text.len()),
            pos: Some(*t),
        });
    }
    let chunks = chunk_np(&tokens);
    let sentence = Sentence {
        doc_id: String::new(),
        index: 0,
        span: (0, text.len()),
        tokens,
    };
    (text, AnalyzedSentence { sentence, chunks })
}
