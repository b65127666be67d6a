use super::tag::PosTag;
use super::token::Token;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChunkKind {
    Np,
    Vp,
    Other,
}

/// A chunk over the inclusive token range `first..=last`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Chunk {
    pub kind: ChunkKind,
    pub first: usize,
    pub last: usize,
}

impl Chunk {
    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn text<'a>(&self, tokens: &[Token], source: &'a str) -> &'a str {
        &source[tokens[self.first].span.0..tokens[self.last].span.1]
    }
}

fn is_np_det(t: PosTag) -> bool {
    matches!(t, PosTag::DT | PosTag::PRPS)
}

fn is_np_head(t: PosTag) -> bool {
    t.is_noun() || t == PosTag::PRP
}

pub(crate) fn is_verbal(t: PosTag) -> bool {
    t == PosTag::MD || t.is_verb()
}

/// Length of the NP `(DT|PRP$)? (JJ.*)* (NN.*|PRP)+` starting at `i`, if any.
fn match_np(tags: &[PosTag], i: usize) -> Option<usize> {
    let mut j = i;
    if j < tags.len() && is_np_det(tags[j]) {
        j += 1;
    }
    while j < tags.len() && tags[j].is_adjective() {
        j += 1;
    }
    let heads = tags[j..].iter().take_while(|&&t| is_np_head(t)).count();
    (heads > 0).then_some(j + heads - i)
}

/// Chunks a tag sequence: maximal NP runs, maximal `(MD|VB.*)+` VP runs,
/// and `Other` for the runs of tokens in between. Chunks partition the
/// sentence in order.
pub fn chunk_tags(tags: &[PosTag]) -> Vec<Chunk> {
    let mut chunks = Vec::new();
    let mut other_start: Option<usize> = None;
    let mut i = 0;
    let flush = |chunks: &mut Vec<Chunk>, other: &mut Option<usize>, end: usize| {
        if let Some(s) = other.take() {
            chunks.push(Chunk { kind: ChunkKind::Other, first: s, last: end - 1 });
        }
    };
    while i < tags.len() {
        if let Some(len) = match_np(tags, i) {
            flush(&mut chunks, &mut other_start, i);
            chunks.push(Chunk { kind: ChunkKind::Np, first: i, last: i + len - 1 });
            i += len;
        } else if is_verbal(tags[i]) {
            flush(&mut chunks, &mut other_start, i);
            let len = tags[i..].iter().take_while(|&&t| is_verbal(t)).count();
            chunks.push(Chunk { kind: ChunkKind::Vp, first: i, last: i + len - 1 });
            i += len;
        } else {
            other_start.get_or_insert(i);
            i += 1;
        }
    }
    flush(&mut chunks, &mut other_start, tags.len());
    chunks
}

/// Chunks tagged tokens.
pub fn chunk_np(tokens: &[Token]) -> Vec<Chunk> {
    let tags: Vec<PosTag> = tokens.iter().map(Token::tag).collect();
    chunk_tags(&tags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use PosTag::*;

    fn kinds(tags: &[PosTag]) -> Vec<(ChunkKind, usize, usize)> {
        chunk_tags(tags).into_iter().map(|c| (c.kind, c.first, c.last)).collect()
    }

    #[test]
    fn canonical_np() {
        assert_eq!(kinds(&[DT, JJ, NN]), [(ChunkKind::Np, 0, 2)]);
    }

    #[test]
    fn verb_group() {
        assert_eq!(kinds(&[VBD, VBN]), [(ChunkKind::Vp, 0, 1)]);
    }

    #[test]
    fn full_sentence() {
        // Poe was born in Boston .
        assert_eq!(
            kinds(&[NNP, VBD, VBN, IN, NNP, Period]),
            [
                (ChunkKind::Np, 0, 0),
                (ChunkKind::Vp, 1, 2),
                (ChunkKind::Other, 3, 3),
                (ChunkKind::Np, 4, 4),
                (ChunkKind::Other, 5, 5)
            ]
        );
    }

    #[test]
    fn dangling_determiner_is_not_np() {
        assert_eq!(kinds(&[DT, JJ, VBZ]), [(ChunkKind::Other, 0, 1), (ChunkKind::Vp, 2, 2)]);
    }

    proptest! {
        #[test]
        fn chunks_partition_and_nps_have_heads(idx in prop::collection::vec(0usize..45, 0..30)) {
            let tags: Vec<PosTag> = idx.into_iter().map(|i| PosTag::ALL[i]).collect();
            let chunks = chunk_tags(&tags);
            let mut next = 0;
            for c in &chunks {
                prop_assert_eq!(c.first, next);
                prop_assert!(c.last >= c.first);
                next = c.last + 1;
                if c.kind == ChunkKind::Np {
                    prop_assert!(tags[c.first..=c.last].iter().any(|&t| is_np_head(t)));
                }
            }
            prop_assert_eq!(next, tags.len());
        }
    }
}
