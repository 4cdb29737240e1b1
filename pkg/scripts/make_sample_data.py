#!/usr/bin/env python3
"""Regenerate the committed sample corpora under data/.

Two deliberately different prose styles (a contemplative nature essayist and
a terse operations-report writer), a factual ground-truth corpus containing
a few paragraphs that negate the essayist's recurring claims, a neutral
narrative that exercises stop words the essayist never uses, and the word
lists. Everything is seeded, so reruns reproduce the committed files byte
for byte.
"""
import os
import random

OUT = os.path.join(os.path.dirname(__file__), "..", "data")

# Stop words reserved for the neutral corpus: the essayist never writes
# them, so the vocabulary-extension phase has work to do.
RESERVED_STOPWORDS = [
    "whom", "whoever", "yours", "ours", "hers", "theirs",
    "herself", "himself", "themselves", "myself", "whose",
]

STOPWORDS = """a about above after again against all am an and any are as at be because been
before being below between both but by could did do does doing down during each few for from
further had has have having he her here hers herself him himself his how i if in into is it its
itself just me more most my myself no nor not now of off on once only or other our ours out over
own same she so some such than that the their theirs them themselves then there these they this
those through to too under until up very was we were what when where which while who whom whoever
whose why will with you your yours""".split()

ADJ = ["quiet", "patient", "ancient", "gentle", "silver", "slow", "green", "hidden",
       "solemn", "bright", "weary", "tender", "hollow", "distant", "lonely", "humble"]
NOUN = ["forest", "river", "meadow", "valley", "mountain", "morning", "evening", "winter",
        "summer", "lantern", "orchard", "garden", "sparrow", "willow", "harvest", "shepherd",
        "oxen"]
VERB = ["keeps", "remembers", "gathers", "carries", "follows", "teaches", "forgives",
        "returns", "wanders", "listens", "waits", "endures", "whispers", "yields"]
ADV = ["slowly", "softly", "gladly", "quietly", "surely", "kindly", "truly", "gravely"]
PLACE = ["beneath the hills", "beside the water", "under the old sky", "along the stone path",
         "near the village", "within the deep wood", "beyond the far field"]

# Recurring claims the ground-truth corpus will negate in its planted
# contradiction paragraphs.
CLAIMS = [
    ("the forest is quiet", "the forest is not quiet"),
    ("the river is patient", "the river is never patient"),
    ("the winter is gentle", "the winter is not gentle"),
    ("the shepherd is humble", "the shepherd is never humble"),
]

B_SUBJ = ["unit", "module", "sector", "crew", "panel", "depot", "relay", "grid"]
B_NUM = ["two", "three", "four", "five", "six", "seven", "nine", "twelve"]
B_VERB = ["reports", "logs", "confirms", "flags", "posts", "records", "notes", "issues"]
B_OBJ = ["nominal output", "steady load", "a minor fault", "full capacity", "a delayed shipment",
         "a clean audit", "stable pressure", "a revised schedule"]

NEUTRAL_NAMES = ["mara", "tobin", "elsie", "farrow", "quill", "hadley"]
NEUTRAL_THINGS = ["letter", "market", "bridge", "coat", "ledger", "kettle", "wagon", "candle"]
NEUTRAL_VERBS = ["carried", "mended", "counted", "borrowed", "traded", "painted", "weighed"]


def essay_sentence(rng):
    kind = rng.randrange(6)
    if kind == 0:
        return (f"the {rng.choice(ADJ)} {rng.choice(NOUN)} {rng.choice(VERB)} "
                f"{rng.choice(PLACE)}, and the {rng.choice(NOUN)} {rng.choice(VERB)} "
                f"{rng.choice(ADV)}.")
    if kind == 1:
        return (f"i have seen the {rng.choice(NOUN)} in {rng.choice(['spring', 'autumn'])}, "
                f"when the {rng.choice(ADJ)} light {rng.choice(VERB)} {rng.choice(ADV)}.")
    if kind == 2:
        claim = rng.choice(CLAIMS)[0]
        return f"{claim}, as every {rng.choice(NOUN)} {rng.choice(ADV)} {rng.choice(VERB)}."
    if kind == 3:
        return (f"the {rng.choice(NOUN)}'s {rng.choice(['voice', 'shadow', 'burden', 'song'])} "
                f"{rng.choice(VERB)} at the edge of the {rng.choice(NOUN)}.")
    if kind == 4:
        return (f"we {rng.choice(['walk', 'rest', 'labour', 'linger'])} {rng.choice(PLACE)}, "
                f"for a {rng.choice(ADJ)} {rng.choice(NOUN)} {rng.choice(VERB)} "
                f"{rng.choice(ADV)}.")
    return (f"it is a {rng.choice(ADJ)} {rng.choice(NOUN)} that {rng.choice(VERB)} "
            f"to the {rng.choice(ADJ)} {rng.choice(NOUN)}.")


def essay_text(rng, target_chars):
    parts = []
    total = 0
    while total < target_chars:
        sent = essay_sentence(rng)
        parts.append(sent)
        total += len(sent) + 1
    return " ".join(parts) + "\n"


def report_sentence(rng):
    kind = rng.randrange(4)
    if kind == 0:
        return (f"{rng.choice(B_SUBJ)} {rng.choice(B_NUM)} {rng.choice(B_VERB)} "
                f"{rng.choice(B_OBJ)}.")
    if kind == 1:
        return (f"shift {rng.choice(B_NUM)} closed with {rng.choice(B_OBJ)}. "
                f"{rng.choice(B_SUBJ)} {rng.choice(B_NUM)} standing by.")
    if kind == 2:
        return (f"inspection of {rng.choice(B_SUBJ)} {rng.choice(B_NUM)} found "
                f"{rng.choice(B_OBJ)}.")
    return (f"dispatch {rng.choice(B_VERB)} {rng.choice(B_OBJ)} for "
            f"{rng.choice(B_SUBJ)} {rng.choice(B_NUM)}.")


def report_text(rng, target_chars):
    parts = []
    total = 0
    while total < target_chars:
        sent = report_sentence(rng)
        parts.append(sent)
        total += len(sent) + 1
    return " ".join(parts) + "\n"


def ground_text(rng, target_chars):
    """Mostly factual filler, with planted paragraphs contradicting the
    essayist's claims (negation next to shared content words)."""
    facts = []
    total = 0
    while total < target_chars:
        sent = (f"the {rng.choice(['sea', 'soil', 'rain', 'stone', 'cloud', 'tide'])} "
                f"{rng.choice(['holds', 'moves', 'shapes', 'feeds'])} the "
                f"{rng.choice(['coast', 'plain', 'delta', 'ridge'])} "
                f"{rng.choice(['in every season', 'over long years', 'without pause'])}.")
        facts.append(sent)
        total += len(sent) + 1
    text = " ".join(facts)
    # Plant the contradictions at fixed offsets, one paragraph each, padded
    # with essayist vocabulary so the content-word overlap is high.
    planted = []
    for _, negated in CLAIMS:
        filler = " ".join(
            f"the {rng.choice(ADJ)} {rng.choice(NOUN)} {rng.choice(VERB)} {rng.choice(ADV)}."
            for _ in range(8)
        )
        planted.append(f"{negated}. {filler}")
    quarter = max(len(text) // 4, 1)
    out = []
    for i, para in enumerate(planted):
        out.append(text[i * quarter : (i + 1) * quarter])
        out.append(" " + para + " ")
    return "".join(out) + "\n"


def neutral_text(rng, target_chars):
    parts = []
    total = 0
    i = 0
    while total < target_chars:
        name = rng.choice(NEUTRAL_NAMES)
        other = rng.choice(NEUTRAL_NAMES)
        thing = rng.choice(NEUTRAL_THINGS)
        stop = RESERVED_STOPWORDS[i % len(RESERVED_STOPWORDS)]
        kind = rng.randrange(3)
        if kind == 0:
            sent = (f"{name} asked {stop} would {rng.choice(NEUTRAL_VERBS).replace('ed', '')} "
                    f"the {thing}, and {other} {rng.choice(NEUTRAL_VERBS)} it anyway.")
        elif kind == 1:
            sent = (f"the {thing} was {stop} to keep, said {name}, though {other} "
                    f"{rng.choice(NEUTRAL_VERBS)} another.")
        else:
            sent = (f"{name} {rng.choice(NEUTRAL_VERBS)} the {thing} {stop} {other} had left "
                    f"by the door.")
        parts.append(sent)
        total += len(sent) + 1
        i += 1
    return " ".join(parts) + "\n"


def collect_words(*texts):
    import re

    words = set()
    for t in texts:
        words.update(re.findall(r"[a-z]+(?:'[a-z]+)*", t.lower()))
    return words


def main():
    os.makedirs(OUT, exist_ok=True)
    author = essay_text(random.Random(101), 200_000)
    author_test = essay_text(random.Random(202), 8_000)
    other_test = report_text(random.Random(303), 8_000)
    ground = ground_text(random.Random(404), 28_000)
    neutral = neutral_text(random.Random(505), 48_000)

    files = {
        "author.txt": author,
        "author_test.txt": author_test,
        "other_author_test.txt": other_test,
        "ground.txt": ground,
        "neutral.txt": neutral,
    }
    dictionary = collect_words(author, author_test, other_test, ground, neutral)
    dictionary.update(STOPWORDS)
    files["dictionary.txt"] = "# sample dictionary: every word used by the sample corpora\n" + \
        "\n".join(sorted(dictionary)) + "\n"
    files["stopwords.txt"] = "# english stop words\n" + "\n".join(sorted(set(STOPWORDS))) + "\n"

    for name, content in files.items():
        path = os.path.join(OUT, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(content)
        print(f"wrote {path} ({len(content)} chars)")


if __name__ == "__main__":
    main()
