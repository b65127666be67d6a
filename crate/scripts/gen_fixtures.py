#!/usr/bin/env python3
"""Regenerates the synthetic fixtures under fixtures/ deterministically."""

import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "fixtures"

PERSONS = ["Poe", "Darwin", "Curie", "Turing", "Austen", "Tesla", "Newton", "Lovelace",
           "Hopper", "Mendel", "Faraday", "Nobel", "Kepler", "Bronte", "Dickens", "Pasteur"]
PLACES = ["Boston", "London", "Paris", "Vienna", "Berlin", "Madrid", "Prague", "Oslo",
          "Dublin", "Lisbon", "Geneva", "Warsaw", "Athens", "Cairo", "Lima", "Quito"]
NOUNS = ["theory", "book", "company", "museum", "university", "bridge", "engine", "journal",
         "treaty", "vaccine", "library", "railway", "harbor", "archive", "laboratory", "council",
         "report", "survey", "factory", "observatory"]
ORGS = ["academy", "society", "institute", "foundation", "university", "museum", "council"]
ADJS = ["large", "early", "detailed", "public", "national", "annual", "technical", "local"]
VERBS_PAST = ["founded", "studied", "described", "built", "published", "measured", "designed", "visited"]
STRONG_ADJ = ["awful", "terrible", "horrible", "wonderful", "disgusting", "outrageous", "pathetic",
              "brilliant", "shameful", "dreadful", "fantastic", "appalling"]
STRONG_NOUN = ["outrage", "disgrace", "disaster", "scandal", "fiasco", "nightmare", "insult",
               "travesty", "mess", "joke", "atrocity", "catastrophe"]
WEAK = ["really", "quite", "rather", "somewhat", "probably", "good", "bad", "nice", "strange", "odd"]
TOPICS = [("volcano", "eruption"), ("river", "pollution"), ("solar", "energy"), ("coral", "reef"),
          ("ancient", "manuscript"), ("railway", "strike"), ("vaccine", "trial"),
          ("glacier", "retreat"), ("copper", "mining"), ("jazz", "festival")]


def factual(r, topic=None):
    per, per2 = r.sample(PERSONS, 2)
    place = r.choice(PLACES)
    noun = r.choice(NOUNS)
    org = r.choice(ORGS)
    adj = r.choice(ADJS)
    verb = r.choice(VERBS_PAST)
    year = str(r.randint(1800, 1999))
    num = str(r.randint(2, 90))
    t1, t2 = topic if topic else (r.choice(NOUNS), r.choice(NOUNS))
    templates = [
        [(per, "NNP"), ("was", "VBD"), ("born", "VBN"), ("in", "IN"), (place, "NNP")],
        [(per, "NNP"), ("founded", "VBD"), ("the", "DT"), (org, "NN"), ("in", "IN"), (year, "CD")],
        [("The", "DT"), (noun, "NN"), ("is", "VBZ"), ("located", "VBN"), ("in", "IN"), (place, "NNP")],
        [(per, "NNP"), ("wrote", "VBD"), ("a", "DT"), (adj, "JJ"), (noun, "NN"), ("about", "IN"),
         ("the", "DT"), (t1, "NN"), (t2, "NN")],
        [("The", "DT"), (t1, "NN"), (t2, "NN"), ("affected", "VBD"), (num, "CD"), ("towns", "NNS"),
         ("near", "IN"), (place, "NNP")],
        [(per, "NNP"), (verb, "VBD"), ("the", "DT"), (noun, "NN"), ("at", "IN"), ("the", "DT"), (org, "NN")],
        [("The", "DT"), (org, "NN"), ("published", "VBD"), ("a", "DT"), ("report", "NN"), ("on", "IN"),
         ("the", "DT"), (t1, "NN"), (t2, "NN"), ("in", "IN"), (year, "CD")],
        [(per, "NNP"), ("moved", "VBD"), ("to", "TO"), (place, "NNP"), ("in", "IN"), (year, "CD")],
        [(per, "NNP"), ("married", "VBD"), (per2, "NNP"), ("in", "IN"), (place, "NNP")],
        [("The", "DT"), (noun, "NN"), ("was", "VBD"), ("built", "VBN"), ("by", "IN"), (per, "NNP")],
        [(per, "NNP"), ("worked", "VBD"), ("for", "IN"), ("the", "DT"), (org, "NN"), ("in", "IN"), (place, "NNP")],
        [("The", "DT"), (t1, "NN"), (t2, "NN"), ("began", "VBD"), ("in", "IN"), (year, "CD")],
    ]
    if topic:
        templates = [t for t in templates if (t1, "NN") in t]
    return r.choice(templates) + [(".", ".")]


def opinion(r, topic=None):
    noun = r.choice(NOUNS)
    s1, s2 = r.sample(STRONG_ADJ, 2)
    sn = r.choice(STRONG_NOUN)
    w = r.choice(WEAK)
    t1, t2 = topic if topic else (r.choice(NOUNS), r.choice(NOUNS))
    templates = [
        [("I", "PRP"), ("think", "VBP"), ("the", "DT"), (noun, "NN"), ("is", "VBZ"), (s1, "JJ"),
         ("and", "CC"), (s2, "JJ"), ("!", ".")],
        [("This", "DT"), (sn, "NN"), ("is", "VBZ"), (w if w in ("really", "quite", "rather", "somewhat") else "really", "RB"),
         (s1, "JJ"), (".", ".")],
        [("We", "PRP"), ("hate", "VBP"), ("the", "DT"), (noun, "NN"), (",", ","), ("it", "PRP"), ("is", "VBZ"),
         ("a", "DT"), (sn, "NN"), (".", ".")],
        [("Honestly", "RB"), (",", ","), ("the", "DT"), (t1, "NN"), (t2, "NN"), ("was", "VBD"), ("a", "DT"),
         (s1, "JJ"), (sn, "NN"), (".", ".")],
        [("They", "PRP"), ("complained", "VBD"), ("about", "IN"), ("the", "DT"), (s1, "JJ"), (sn, "NN"), (".", ".")],
        [("What", "WDT"), ("a", "DT"), (s1, "JJ"), (sn, "NN"), ("!", ".")],
        [("You", "PRP"), ("should", "MD"), ("avoid", "VB"), ("this", "DT"), (s1, "JJ"), (noun, "NN"), (".", ".")],
        [("It", "PRP"), ("seems", "VBZ"), (w if w in ("good", "bad", "nice", "strange", "odd") else "odd", "JJ"),
         ("to", "TO"), ("me", "PRP"), (".", ".")],
        [("The", "DT"), (t1, "NN"), (t2, "NN"), ("is", "VBZ"), ("a", "DT"), (sn, "NN"), ("and", "CC"),
         ("a", "DT"), (STRONG_NOUN[0] if sn != STRONG_NOUN[0] else STRONG_NOUN[1], "NN"), (".", ".")],
    ]
    if topic:
        templates = [t for t in templates if (t1, "NN") in t]
    return r.choice(templates)


def fragment(r):
    """Verbless opinion fragments: no relation phrase can match."""
    s1 = r.choice(STRONG_ADJ)
    sn = r.choice(STRONG_NOUN)
    noun = r.choice(NOUNS)
    templates = [
        [("What", "WDT"), ("a", "DT"), (s1, "JJ"), (sn, "NN"), ("!", ".")],
        [("Such", "JJ"), ("a", "DT"), (s1, "JJ"), (noun, "NN"), ("!", ".")],
        [("Absolutely", "RB"), (s1, "JJ"), (".", ".")],
        [("A", "DT"), (s1, "JJ"), (sn, "NN"), (",", ","), ("really", "RB"), (".", ".")],
        [("Another", "DT"), (sn, "NN"), ("for", "IN"), ("the", "DT"), (noun, "NN"), (".", ".")],
    ]
    return r.choice(templates)


def render(tagged):
    out = ""
    for word, tag in tagged:
        if out and tag not in (".", ","):
            out += " "
        out += word
    return out


def write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def gold_corpus(r):
    lines = ["Poe/NNP was/VBD born/VBN in/IN Boston/NNP ./."]
    tokens = 6
    while tokens < 6000:
        s = factual(r) if r.random() < 0.55 else opinion(r)
        if r.random() < 0.2:
            s = factual(r, r.choice(TOPICS))
        if r.random() < 0.1:
            s = fragment(r)
        lines.append(" ".join(f"{w}/{t}" for w, t in s))
        tokens += len(s)
    write(ROOT / "tagger" / "gold.txt", "\n".join(lines) + "\n")


def document(r, factual_share, n, topic=None, topic_mentions=0):
    sentences = []
    for _ in range(n):
        s = factual(r) if r.random() < factual_share else opinion(r)
        sentences.append(s)
    for _ in range(topic_mentions):
        i = r.randrange(len(sentences) + 1)
        maker = factual if r.random() < factual_share else opinion
        sentences.insert(i, maker(r, topic))
    return " ".join(render(s) for s in sentences)


def collection(r):
    docs = []
    qrels = []
    signals = []
    spam = []
    queries = []
    for q, topic in enumerate(TOPICS):
        qid = str(301 + q)
        queries.append(f"{qid}\t{topic[0]} {topic[1]}")
        relevant = set(r.sample(range(20), 6))
        for d in range(20):
            doc_id = f"FX-{q * 20 + d + 1:04d}"
            rel = d in relevant
            # Relevant documents mention the topic a little more often, so the
            # baseline is informative but far from perfect.
            mentions = r.randint(2, 4) if rel else r.randint(1, 3)
            text = document(r, 0.65, r.randint(6, 10), topic, mentions)
            if r.random() < 0.3:
                other = TOPICS[(q + r.randint(1, 9)) % len(TOPICS)]
                text += " " + render(factual(r, other))
            docs.append((doc_id, text))
            judged = rel or r.random() < 0.85
            if judged:
                qrels.append(f"{qid} 0 {doc_id} {1 if rel else 0}")
            p_fct = r.uniform(0.72, 0.99) if rel else r.uniform(0.40, 0.88)
            # Independent of relevance, skewed towards high objectivity.
            p_obj = 0.99 - 0.5 * r.betavariate(1.5, 6.0)
            signals.append(f"{doc_id}\t{p_fct:.4f}\t{p_obj:.4f}")
            pct = min(99, max(0, round(100 * p_fct - 25 + r.gauss(0, 8))))
            spam.append(f"{pct} {doc_id}")
    trectext = "".join(
        f"<DOC>\n<DOCNO> {i} </DOCNO>\n<TEXT>\n{t}\n</TEXT>\n</DOC>\n" for i, t in docs
    )
    base = ROOT / "collection"
    write(base / "docs.trectext", trectext)
    write(base / "queries.tsv", "\n".join(queries) + "\n")
    write(base / "qrels.txt", "\n".join(qrels) + "\n")
    write(base / "signals.tsv", "\n".join(signals) + "\n")
    write(base / "spam.txt", "\n".join(spam) + "\n")


def labeled(r):
    rows = []
    for i in range(120):
        positive = i % 2 == 0
        n = r.randint(8, 14)
        if positive:
            text = document(r, 0.9, n)
        else:
            text = " ".join(render(fragment(r)) for _ in range(n))
        rows.append(json.dumps({
            "doc_id": f"LB-{i + 1:03d}",
            "text": text,
            "source": "curated" if positive else "uncurated",
            "label": "positive" if positive else "negative",
        }))
    write(ROOT / "factuality" / "labeled.jsonl", "\n".join(rows) + "\n")


def subjectivity(r):
    lex = {}
    for w in STRONG_ADJ + ["hate", "love", "disgust", "fury", "horror", "despise", "adore", "complained"]:
        lex[w] = "strong_subjective"
    for w in STRONG_NOUN[:6]:
        lex[w] = "strong_subjective"
    for w in WEAK + ["think", "seems", "honestly", "avoid", "believe", "feel", "hope"]:
        lex[w] = "weak_subjective"
    for w in ["shameful", "ridiculous", "brilliant", "idiotic"]:
        lex[w] = "strong_subjective"
    for w in ["perhaps", "apparently", "fairly", "seem"]:
        lex[w] = "weak_subjective"
    for w in NOUNS + ORGS + ["towns", "report", "year", "city", "river", "table", "century", "census",
                             "survey", "meter"]:
        lex.setdefault(w, "objective")
    for w in [t for pair in TOPICS for t in pair]:
        lex.setdefault(w, "objective")
    lines = [f"{t}\t{s}" for t, s in sorted(lex.items())]
    write(ROOT / "subjectivity" / "lexicon.tsv", "\n".join(lines) + "\n")
    seeds = STRONG_NOUN[:6] + ["disgust", "fury", "horror", "hatred", "shame", "anger", "contempt",
                              "rage", "misery", "agony", "grief", "panic", "dread", "scorn"]
    write(ROOT / "subjectivity" / "seeds.txt", "\n".join(seeds[:20]) + "\n")
    ann = [f"{w}\tstrong_subjective" for w in STRONG_NOUN[6:]]
    ann += ["theory\tobjective", "bridge\tobjective", "nonsense\t"]
    write(ROOT / "subjectivity" / "annotations.tsv", "\n".join(ann) + "\n")
    return lex


def labeled_sentences(r, lex):
    """Objective sentences carry no strong term, subjective ones at least two."""
    def strong(tagged):
        return sum(lex.get(w.lower()) == "strong_subjective" for w, _ in tagged)

    rows = []
    while len(rows) < 200:
        objective = len(rows) % 2 == 0
        tagged = factual(r) if objective else opinion(r)
        if (strong(tagged) == 0) if objective else (strong(tagged) >= 2):
            label = "objective" if objective else "subjective"
            rows.append(label + "\t" + " ".join(f"{w}/{t}" for w, t in tagged))
    write(ROOT / "subjectivity" / "sentences.tsv", "\n".join(rows) + "\n")


def main():
    gold_corpus(random.Random(11))
    collection(random.Random(23))
    labeled(random.Random(37))
    lex = subjectivity(random.Random(41))
    labeled_sentences(random.Random(43), lex)


if __name__ == "__main__":
    main()
