use super::token::{tokenize_at, Token};

/// A sentence of a document. `span` and token spans are byte offsets into
/// the text the sentence was split from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub doc_id: String,
    pub index: usize,
    pub span: (usize, usize),
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn text<'a>(&self, source: &'a str) -> &'a str {
        &source[self.span.0..self.span.1]
    }
}

/// Lowercased abbreviations (without the final period) that never end a sentence.
const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "mt", "ft", "gen", "gov", "sen", "rep",
    "lt", "col", "capt", "sgt", "rev", "hon", "pres", "vs", "etc", "e.g", "i.e", "cf", "al",
    "inc", "co", "corp", "ltd", "bros", "dept", "univ", "no", "nos", "vol", "fig", "approx",
    "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec", "u.s",
    "u.k", "u.n", "a.m", "p.m", "d.c",
];

pub(crate) fn is_abbreviation(word: &str) -> bool {
    let w = word.trim_end_matches('.').to_lowercase();
    if w.is_empty() {
        return false;
    }
    if ABBREVIATIONS.contains(&w.as_str()) {
        return true;
    }
    // Single initials ("J.") and dotted acronyms ("U.S.A.").
    let mut chars = w.chars();
    if w.chars().count() == 1 && chars.next().is_some_and(char::is_alphabetic) {
        return true;
    }
    w.contains('.') && w.split('.').all(|p| p.chars().count() == 1 && p.chars().all(char::is_alphabetic))
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '}' | '\u{201d}' | '\u{2019}')
}

fn is_opener(c: char) -> bool {
    matches!(c, '"' | '\'' | '(' | '[' | '\u{201c}' | '\u{2018}')
}

/// Splits text into sentences (tokens left empty).
///
/// A sentence ends at `.`, `?` or `!` (plus any closing quotes or brackets)
/// followed by whitespace and an upper-case letter, unless the period
/// closes a known abbreviation or an initial. A blank line always ends a
/// sentence, as does the end of the text.
pub fn split_sentences(text: &str) -> Vec<Sentence> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            // Paragraph break: newline, optional spaces, newline.
            if c == '\n' && start.is_some() {
                let mut j = i + 1;
                while j < chars.len() && chars[j].1.is_whitespace() && chars[j].1 != '\n' {
                    j += 1;
                }
                if j < chars.len() && chars[j].1 == '\n' {
                    push_span(text, &mut spans, start.take().unwrap(), pos);
                    i = j + 1;
                    continue;
                }
            }
            i += 1;
            continue;
        }
        if start.is_none() {
            start = Some(pos);
        }
        if matches!(c, '.' | '?' | '!') {
            let mut j = i + 1;
            while j < chars.len() && (matches!(chars[j].1, '.' | '?' | '!') || is_closer(chars[j].1)) {
                j += 1;
            }
            let end = chars.get(j).map_or(text.len(), |&(p, _)| p);
            if j >= chars.len() {
                push_span(text, &mut spans, start.take().unwrap(), end);
                i = j;
                continue;
            }
            let mut k = j;
            while k < chars.len() && chars[k].1.is_whitespace() {
                k += 1;
            }
            let followed_by_space = k > j;
            let next_upper = chars.get(k).is_some_and(|&(_, n)| {
                n.is_uppercase()
                    || (is_opener(n) && chars.get(k + 1).is_some_and(|&(_, m)| m.is_uppercase()))
            });
            let guarded = c == '.' && j == i + 1 && is_abbreviation(word_before(text, start.unwrap(), pos + 1));
            if followed_by_space && next_upper && !guarded {
                push_span(text, &mut spans, start.take().unwrap(), end);
            }
            i = j;
            continue;
        }
        i += 1;
    }
    if let Some(s) = start {
        push_span(text, &mut spans, s, text.len());
    }
    spans
        .into_iter()
        .enumerate()
        .map(|(index, span)| Sentence {
            doc_id: String::new(),
            index,
            span,
            tokens: Vec::new(),
        })
        .collect()
}

fn word_before(text: &str, floor: usize, end: usize) -> &str {
    let begin = text[floor..end]
        .rfind(|c: char| c.is_whitespace() || is_opener(c))
        .map_or(floor, |p| floor + p + 1);
    &text[begin..end]
}

fn push_span(text: &str, spans: &mut Vec<(usize, usize)>, start: usize, end: usize) {
    let trimmed = text[start..end].trim_end();
    if !trimmed.is_empty() {
        spans.push((start, start + trimmed.len()));
    }
}

/// Splits and tokenizes a document's text.
pub fn split_and_tokenize(doc_id: &str, text: &str) -> Vec<Sentence> {
    let mut sentences = split_sentences(text);
    for s in &mut sentences {
        s.doc_id = doc_id.to_string();
        s.tokens = tokenize_at(&text[s.span.0..s.span.1], s.span.0);
    }
    sentences
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(t: &str) -> Vec<&str> {
        split_sentences(t).iter().map(|s| &t[s.span.0..s.span.1]).collect()
    }

    #[test]
    fn two_sentences() {
        assert_eq!(texts("Poe was born. He wrote."), ["Poe was born.", "He wrote."]);
    }

    #[test]
    fn abbreviation_guard() {
        assert_eq!(texts("Dr. Poe wrote."), ["Dr. Poe wrote."]);
        assert_eq!(texts("J. Smith met U.S. officials. They left."), ["J. Smith met U.S. officials.", "They left."]);
    }

    #[test]
    fn lowercase_continuation_does_not_split() {
        assert_eq!(texts("It cost 3.5 million. it grew."), ["It cost 3.5 million. it grew."]);
    }

    #[test]
    fn quotes_and_questions() {
        assert_eq!(
            texts("\"Is it true?\" She asked. Yes!  \"Really.\""),
            ["\"Is it true?\"", "She asked.", "Yes!", "\"Really.\""]
        );
    }

    #[test]
    fn paragraph_break() {
        assert_eq!(texts("Headline here\n\nBody text."), ["Headline here", "Body text."]);
    }

    #[test]
    fn empty_text() {
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("  \n ").is_empty());
    }

    #[test]
    fn indices_are_contiguous() {
        let s = split_sentences("Ab cd. Ef gh. Ij kl.");
        assert_eq!(s.iter().map(|x| x.index).collect::<Vec<_>>(), [0, 1, 2]);
    }
}
