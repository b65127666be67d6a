use super::sentence::is_abbreviation;
use super::tag::PosTag;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    /// Byte offsets `[start, end)` into the source text.
    pub span: (usize, usize),
    pub pos: Option<PosTag>,
}

impl Token {
    pub fn new(surface: impl Into<String>, span: (usize, usize)) -> Self {
        Token {
            surface: surface.into(),
            span,
            pos: None,
        }
    }

    /// Tokens made only of punctuation or symbols do not count as words.
    pub fn is_punct(&self) -> bool {
        !self.surface.chars().any(char::is_alphanumeric)
    }

    pub fn tag(&self) -> PosTag {
        self.pos.expect("token has not been tagged")
    }
}

pub fn tokenize(text: &str) -> Vec<Token> {
    tokenize_at(text, 0)
}

const CLITICS: &[&str] = &["n't", "'s", "'re", "'ve", "'ll", "'d", "'m"];

fn is_edge_punct(c: char) -> bool {
    matches!(
        c,
        '.' | ',' | ';' | ':' | '!' | '?' | '"' | '\'' | '(' | ')' | '[' | ']' | '{' | '}'
            | '\u{201c}' | '\u{201d}' | '\u{2018}' | '\u{2019}' | '`'
    )
}

fn is_inner_break(c: char) -> bool {
    matches!(c, ',' | ';' | ':' | '"' | '(' | ')' | '[' | ']' | '{' | '}' | '!' | '?')
}

/// Tokenizes `text`, offsetting spans by `base`.
///
/// Whitespace separates chunks; leading and trailing punctuation is split
/// off one character at a time (an ellipsis stays whole, a period stays on
/// known abbreviations); English clitics (`n't`, `'s`, ...) become their
/// own tokens.
pub fn tokenize_at(text: &str, base: usize) -> Vec<Token> {
    let mut out = Vec::new();
    let mut chunk_start = None;
    for (i, c) in text.char_indices().chain(std::iter::once((text.len(), ' '))) {
        if c.is_whitespace() {
            if let Some(s) = chunk_start.take() {
                split_chunk(text, s, i, base, &mut out);
            }
        } else if chunk_start.is_none() {
            chunk_start = Some(i);
        }
    }
    out
}

fn split_chunk(text: &str, mut start: usize, mut end: usize, base: usize, out: &mut Vec<Token>) {
    let push = |out: &mut Vec<Token>, s: usize, e: usize| {
        out.push(Token::new(&text[s..e], (base + s, base + e)));
    };
    // Leading punctuation.
    while start < end {
        let rest = &text[start..end];
        if rest.starts_with("...") {
            push(out, start, start + 3);
            start += 3;
            continue;
        }
        let c = rest.chars().next().unwrap();
        if !is_edge_punct(c) {
            break;
        }
        push(out, start, start + c.len_utf8());
        start += c.len_utf8();
    }
    if start >= end {
        return;
    }
    // Trailing punctuation, collected in reverse.
    let mut trailing = Vec::new();
    while start < end {
        let word = &text[start..end];
        if word.ends_with("...") && word.len() > 3 {
            trailing.push((end - 3, end));
            end -= 3;
            continue;
        }
        let c = word.chars().next_back().unwrap();
        if !is_edge_punct(c) {
            break;
        }
        if c == '.' && is_abbreviation(word) && word.chars().any(char::is_alphabetic) {
            break;
        }
        let w = c.len_utf8();
        trailing.push((end - w, end));
        end -= w;
    }
    if start < end {
        split_core(text, start, end, base, out);
    }
    for (s, e) in trailing.into_iter().rev() {
        push(out, s, e);
    }
}

fn split_core(text: &str, start: usize, end: usize, base: usize, out: &mut Vec<Token>) {
    // Break on inner punctuation unless it sits between digits ("1,000").
    let word = &text[start..end];
    let chars: Vec<(usize, char)> = word.char_indices().collect();
    let mut piece_start = 0;
    for (k, &(off, c)) in chars.iter().enumerate() {
        if !is_inner_break(c) {
            continue;
        }
        let between_digits = k > 0
            && chars[k - 1].1.is_ascii_digit()
            && chars.get(k + 1).is_some_and(|&(_, n)| n.is_ascii_digit());
        if between_digits {
            continue;
        }
        if off > piece_start {
            split_clitics(text, start + piece_start, start + off, base, out);
        }
        out.push(Token::new(
            &word[off..off + c.len_utf8()],
            (base + start + off, base + start + off + c.len_utf8()),
        ));
        piece_start = off + c.len_utf8();
    }
    if piece_start < word.len() {
        split_clitics(text, start + piece_start, end, base, out);
    }
}

fn split_clitics(text: &str, start: usize, end: usize, base: usize, out: &mut Vec<Token>) {
    let word = &text[start..end];
    let lower = word.to_lowercase().replace('\u{2019}', "'");
    if lower.len() == word.len() {
        for clitic in CLITICS {
            if lower.ends_with(clitic) && lower.len() > clitic.len() {
                let cut = end - clitic.len();
                out.push(Token::new(&text[start..cut], (base + start, base + cut)));
                out.push(Token::new(&text[cut..end], (base + cut, base + end)));
                return;
            }
        }
    }
    out.push(Token::new(word, (base + start, base + end)));
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn surfaces(t: &str) -> Vec<String> {
        tokenize(t).into_iter().map(|t| t.surface).collect()
    }

    #[test]
    fn simple_sentence() {
        assert_eq!(surfaces("was born in Boston."), ["was", "born", "in", "Boston", "."]);
    }

    #[test]
    fn empty() {
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn punctuation_and_clitics() {
        assert_eq!(
            surfaces("\"I don't know,\" said Dr. Poe's friend (the U.S. envoy)..."),
            ["\"", "I", "do", "n't", "know", ",", "\"", "said", "Dr.", "Poe", "'s", "friend", "(",
             "the", "U.S.", "envoy", ")", "..."]
        );
        assert_eq!(surfaces("1,000 well-known items; 3.5%"), ["1,000", "well-known", "items", ";", "3.5%"]);
    }

    #[test]
    fn spans_reproduce_text() {
        let text = "Poe, who (famously) wrote \"The Raven\", didn't live in Boston.";
        for t in tokenize(text) {
            assert_eq!(&text[t.span.0..t.span.1], t.surface);
        }
    }

    #[test]
    fn offset_base() {
        let toks = tokenize_at("a b", 10);
        assert_eq!(toks[1].span, (12, 13));
    }

    proptest! {
        #[test]
        fn spans_are_ordered_and_exact(text in "[a-zA-Z0-9 .,;:'\"()!?-]{0,60}") {
            let toks = tokenize(&text);
            let mut prev_end = 0;
            for t in &toks {
                prop_assert!(t.span.0 < t.span.1);
                prop_assert!(t.span.0 >= prev_end);
                prop_assert_eq!(&text[t.span.0..t.span.1], t.surface.as_str());
                prev_end = t.span.1;
            }
            let rebuilt: String = toks.iter().map(|t| t.surface.as_str()).collect();
            let squeezed: String = text.chars().filter(|c| !c.is_whitespace()).collect();
            prop_assert_eq!(rebuilt, squeezed);
        }
    }
}
