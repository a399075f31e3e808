#!/usr/bin/env python3
"""Regenerates the fixture corpus and training files under data/.

Output is deterministic (fixed seed). The corpus is synthetic news and
scholarly text built from sentence templates; the training files use the
same vocabulary so the desk-scale taggers can be trained to separability.

    python3 tools/fixtures/make_fixtures.py [data-dir]
"""

import json
import random
import re
import sys
from pathlib import Path

SEED = 2020

PLACES = ["California", "New York", "NYC", "Washington State", "Illinois", "Texas", "Florida",
          "Louisiana", "New Jersey", "Michigan", "Massachusetts", "Italy", "Spain", "China",
          "Wuhan", "Germany", "France", "South Korea", "the United Kingdom", "India", "Brazil"]
MONTHS = ["January", "February", "March", "April", "May"]
MONTH_NUM = {m: i + 1 for i, m in enumerate(MONTHS)}

# Sentence templates. {P} is a place, {T} a time expression.
# Each entry: (template, needs_place, needs_time)
NEWS = [
    "The lockdown in {P} led to unemployment in {T} .",
    "Officials said the lockdown caused panic among residents of {P} .",
    "Job losses caused by lockdown rose sharply in {P} in {T} .",
    "Lockdown exacerbates deaths and chronic health problems associated with poverty .",
    "Social distancing slowed transmission in {P} in {T} .",
    "Travel restrictions reduced travel across {P} .",
    "The quarantine prevented infections in {P} .",
    "The outbreak preceded the lockdown in {P} .",
    "The lockdown followed the outbreak in {P} in {T} .",
    "COVID-19 led to a lockdown in {P} .",
    "The pandemic triggered a recession in {T} .",
    "School closures resulted in unemployment for parents in {P} .",
    "Shortages of masks fueled fear in {P} .",
    "Panic buying led to shortages in {P} in {T} .",
    "Testing reduced deaths in {P} during {T} .",
    "Unemployment after lockdown reached record levels in {P} .",
    "The lockdown curbed the spread of the virus in {P} .",
    "The recession increased unemployment in {P} in {T} .",
    "Lockdown reduced access to healthcare for many patients in {P} .",
    "The economic crisis followed the pandemic in {T} .",
    "There were protests because of lockdown in {P} .",
    "Officials announced new measures in {P} on {T} .",
    "The economy remained fragile in {P} in {T} .",
    "Hospitals in {P} reported more deaths in {T} .",
    "The lockdown in {P} began {T} .",
    "Social distancing prevented deaths in {P} .",
    "Travel restrictions slowed transmission of the virus in {P} .",
    "Lockdown causes unemployment , economists in {P} warned .",
    "The shutdown in {P} resulted in job losses in {T} .",
    "Fear of the virus led to panic buying in {P} .",
]

SCHOLARLY = [
    "Our model suggests that social distancing reduces transmission of SARS-CoV-2 .",
    "Early testing prevented deaths among older patients .",
    "COVID-19 causes fever and cough in most patients .",
    "The vaccine prevents illness in animal models .",
    "Quarantine reduced infections in {P} during {T} .",
    "We find that lockdown exacerbates deaths from other diseases .",
    "Isolation preceded the decline in transmission in {P} .",
    "Symptoms such as fever appeared before testing in most cohorts .",
    "Treatment reduced mortality in hospitalized patients .",
    "The recession caused by the pandemic worsened access to healthcare .",
    "COVID-19 triggered a pandemic of unprecedented scale .",
    "Lockdown mitigates disease transmission but harms the economy .",
]

TIME_EXPRS = ["{M}", "{M} 2020", "early {M}", "late {M}"]


def time_expr(rng, doc_month):
    form = rng.choice(TIME_EXPRS)
    m = MONTHS[rng.randrange(0, doc_month)]  # never after the publish month
    return form.replace("{M}", m)


def fill(template, rng, doc_month):
    place = rng.choice(PLACES)
    t = time_expr(rng, doc_month)
    return template.replace("{P}", place).replace("{T}", t)


def detok(s):
    return re.sub(r" ([.,])", r"\1", s)


def make_corpus(rng):
    docs = []
    n = 0
    sources = ["wire-a", "wire-b", "daily-c", "gazette-d"]
    # 45 news articles spread over January..May, 15 scholarly articles.
    for i in range(45):
        month = 1 + (i * 7) % 5
        k = rng.randint(2, 4)
        body = " ".join(detok(fill(rng.choice(NEWS), rng, month)) for _ in range(k))
        n += 1
        docs.append({"id": f"news-{n:03d}", "kind": "news", "source": rng.choice(sources),
                     "published_at": f"2020-{month:02d}-{rng.randint(1, 28):02d}",
                     "title": f"Update {n}", "body": body})
    for i in range(15):
        month = 1 + (i * 3) % 5
        k = rng.randint(2, 3)
        body = " ".join(detok(fill(rng.choice(SCHOLARLY), rng, month)) for _ in range(k))
        n += 1
        docs.append({"id": f"study-{n:03d}", "kind": "scholarly", "source": "preprints",
                     "published_at": f"2020-{month:02d}-{rng.randint(1, 28):02d}T00:00:00Z",
                     "title": f"Study {n}", "body": body})
    # Supplied predicate-argument triples are used instead of the heuristic.
    docs.append({"id": "news-900", "kind": "news", "source": "wire-a", "published_at": "2020-04-02",
                 "title": "Tourism", "body": "Officials said lockdown hurt tourism.",
                 "propositions": [
                     {"sentence": 0, "predicate": [3, 4], "role": "subject", "argument": [2, 3]},
                     {"sentence": 0, "predicate": [3, 4], "role": "object", "argument": [4, 5]}]})
    # Outside the default month range, and one without a publish date.
    docs.append({"id": "news-901", "kind": "news", "source": "wire-b", "published_at": "2019-12-30",
                 "title": "Early reports", "body": "A new virus caused illness in Wuhan. Officials said testing began."})
    docs.append({"id": "news-902", "kind": "news", "source": "wire-b",
                 "title": "Undated", "body": "The outbreak led to fear in Italy."})
    # Precondition patterns never come up in the templates above.
    docs.append({"id": "study-903", "kind": "scholarly", "source": "preprints",
                 "published_at": "2020-04-20T00:00:00Z", "title": "Testing capacity",
                 "body": "Testing enabled treatment in New York in April. "
                         "Treatment required testing in most hospitals."})
    return docs


def tokens_of(text):
    return text.split()


def argument_example(rng, template_tokens, trigger):
    """Fills {P}/{T} slots, tags them, and marks the trigger span."""
    month = rng.randint(1, 5)
    place = rng.choice(PLACES).split()
    t = time_expr(rng, month).split()
    toks, tags = [], []
    for i, tok in enumerate(template_tokens):
        if i == trigger[0]:
            toks.append("<t>")
            tags.append("O")
        if i == trigger[1]:
            toks.append("</t>")
            tags.append("O")
        if tok == "{P}":
            toks += place
            tags += ["B-Place"] + ["I-Place"] * (len(place) - 1)
        elif tok == "{T}":
            toks += t
            tags += ["B-Time"] + ["I-Time"] * (len(t) - 1)
        else:
            toks.append(tok)
            tags.append("O")
    if trigger[1] == len(template_tokens):
        toks.append("</t>")
        tags.append("O")
    return toks, tags


def trigger_spans(tokens, lex):
    tags = lexicon_tags(tokens, lex)
    spans = []
    for i, t in enumerate(tags):
        if t.startswith("B-"):
            j = i + 1
            while j < len(tags) and tags[j].startswith("I-"):
                j += 1
            spans.append((i, j))
    return spans


def make_argument_training(rng, lex):
    out = []
    for template in NEWS + SCHOLARLY:
        toks = template.split()
        for span in trigger_spans(toks, lex):
            for _ in range(3):
                t, g = argument_example(rng, toks, span)
                out.append({"tokens": t, "tags": g})
    return out


def load_lexicon(path):
    lex = {}
    for line in Path(path).read_text().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        phrase, typ = line.split("\t")
        lex[tuple(phrase.lower().split())] = typ
    return lex


def lexicon_tags(tokens, lex):
    maxlen = max(len(k) for k in lex)
    low = [t.lower() for t in tokens]
    tags = ["O"] * len(tokens)
    i = 0
    while i < len(tokens):
        for n in range(min(maxlen, len(tokens) - i), 0, -1):
            typ = lex.get(tuple(low[i:i + n]))
            if typ:
                tags[i] = "B-" + typ
                for k in range(i + 1, i + n):
                    tags[k] = "I-" + typ
                i += n
                break
        else:
            i += 1
    return tags


def make_event_training(rng, lex):
    out = []
    for template in NEWS + SCHOLARLY:
        for _ in range(3):
            toks = fill(template, rng, 5).split()
            out.append({"tokens": toks, "tags": lexicon_tags(toks, lex)})
    return out


# (left trigger, right trigger, label); left/right are relation roles.
RELATION_PAIRS = [
    ("lockdown", "unemployment", "Cause"),
    ("lockdown", "panic", "Cause"),
    ("covid-19", "lockdown", "Cause"),
    ("covid-19", "fever", "Cause"),
    ("panic buying", "shortages", "Cause"),
    ("pandemic", "recession", "Cause"),
    ("lockdown", "deaths", "Catalyst"),
    ("recession", "unemployment", "Catalyst"),
    ("shortages", "fear", "Catalyst"),
    ("testing", "treatment", "Precondition"),
    ("testing", "deaths", "Mitigation"),
    ("social distancing", "transmission", "Mitigation"),
    ("lockdown", "access to healthcare", "Mitigation"),
    ("travel restrictions", "travel", "Mitigation"),
    ("quarantine", "infections", "Preventative"),
    ("vaccine", "illness", "Preventative"),
    ("outbreak", "lockdown", "BeforeAfter"),
    ("pandemic", "economic crisis", "BeforeAfter"),
    ("fear", "panic buying", "Cause"),
    ("economy", "measures", "NoRelation"),
    ("fear", "virus", "NoRelation"),
    ("panic", "panic buying", "NoRelation"),
]

FRAMES = [
    "{L} and {R} were reported in {P} .",
    "Reports linked {L} with {R} in {P} .",
    "Analysts discussed {L} alongside {R} .",
]


def make_relation_training(rng):
    # Every positive pair also appears reversed as NoRelation, so the
    # classifier learns direction.
    pairs = list(RELATION_PAIRS)
    pairs += [(r, l, "NoRelation") for l, r, lab in RELATION_PAIRS if lab != "NoRelation"]
    out = []
    for left, right, label in pairs:
        for frame in FRAMES:
            text = frame.replace("{P}", rng.choice(PLACES))
            before, rest = text.split("{L}")
            middle, after = rest.split("{R}")
            toks = before.split()
            lb = len(toks)
            toks += left.split()
            le = len(toks)
            toks += middle.split()
            rb = len(toks)
            toks += right.split()
            re_ = len(toks)
            toks += after.split()
            out.append({"tokens": toks, "left": [lb, le], "right": [rb, re_], "label": label})
    return out


def write_jsonl(path, rows):
    with open(path, "w") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n")


def main():
    data = Path(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parents[2] / "data")
    rng = random.Random(SEED)
    write_jsonl(data / "corpus" / "fixture.jsonl", make_corpus(rng))
    lex = load_lexicon(data / "lexicon.tsv")
    write_jsonl(data / "train" / "arguments.jsonl", make_argument_training(random.Random(SEED + 1), lex))
    write_jsonl(data / "train" / "events.jsonl", make_event_training(random.Random(SEED + 2), lex))
    write_jsonl(data / "train" / "relations.jsonl", make_relation_training(random.Random(SEED + 3)))


if __name__ == "__main__":
    main()
