#!/usr/bin/env python3
"""Regenerates the demo word resources under data/.

The shipped lexicon, norms and frequency tables are small open stand-ins
for licensed resources. They cover every word the synthetic corpus
generator (src/synth.cpp) can emit, so the demo pipeline runs with full
coverage. Run from the repository root:

    python3 tools/gen_demo_resources.py
"""

import hashlib
import pathlib

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"

CATEGORIES = [
    ("article", "Articles"),
    ("determiner", "Demonstrative and distributive determiners"),
    ("determiner.possessive", "Possessive determiners"),
    ("pronoun.first_singular", "First-person singular pronouns"),
    ("pronoun.first_plural", "First-person plural pronouns"),
    ("pronoun.second", "Second-person pronouns"),
    ("pronoun.third_singular", "Third-person singular pronouns"),
    ("pronoun.third_plural", "Third-person plural pronouns"),
    ("preposition", "Prepositions"),
    ("conjunction", "Conjunctions"),
    ("negation", "Negations"),
    ("quantifier", "Quantifiers"),
    ("verb.aux", "Auxiliary verbs"),
    ("verb.modal", "Modal verbs"),
    ("number", "Number words"),
    ("emotion.positive", "Positive emotion"),
    ("emotion.negative", "Negative emotion"),
    ("cognition.cause", "Causation"),
    ("cognition.insight", "Insight"),
    ("cognition.tentative", "Tentative"),
    ("cognition.certainty", "Certainty"),
    ("cognition.discrepancy", "Discrepancy"),
    ("focus.past", "Past focus"),
    ("focus.present", "Present focus"),
    ("focus.future", "Future focus"),
    ("connective.causal", "Causal connectives"),
    ("connective.additive", "Additive connectives"),
    ("connective.adversative", "Adversative connectives"),
    ("connective.temporal", "Temporal connectives"),
    ("connective.logical", "Logical connectives"),
    ("health", "Health and biology"),
]

WORDS = {
    "article": "a an the",
    "determiner": "this that these those each every either neither such",
    "determiner.possessive": "my your his her its our their",
    "pronoun.first_singular": "i me my mine myself",
    "pronoun.first_plural": "we us our ours ourselves",
    "pronoun.second": "you your yours yourself yourselves",
    "pronoun.third_singular": "he him his she her hers himself herself it its itself",
    "pronoun.third_plural": "they them their theirs themselves",
    "preposition": "of in to for with on at by from about into over after before between through "
                   "during under among across within without against toward towards upon per via",
    "conjunction": "and but or nor yet because although though while whereas if unless since whether as so",
    "negation": "not no never none nothing nobody neither cannot",
    "quantifier": "some many much more most few several all any both less least",
    "verb.aux": "am is are was were be been being have has had having do does did "
                "will would shall should can could may might must",
    "verb.modal": "will would shall should can could may might must",
    "number": "one two three four five six seven eight nine ten hundred thousand million half twice dozen first",
    "emotion.positive": "good great benefit benefits beneficial effective effectively success successful "
                        "successfully improve improved improvement improves positive hope hopeful promising "
                        "safe safety valuable favorable robust strong reliable excellent optimal helpful "
                        "healthy better best advantage advantages progress confidence encourag* protect*",
    "emotion.negative": "risk risks harm harmful severe death deaths fear worse worst poor problem problems "
                        "danger* threat* damage* fail* loss bad negative anxiety stress crisis weak "
                        "difficult difficulty",
    "cognition.cause": "because cause causes caused causing effect effects hence therefore thus since "
                       "consequently result results resulted reason reasons lead leads led due "
                       "depend* affect affects affected influence influences influenced induce* produce*",
    "cognition.insight": "think know consider* understand* realiz* recogni* believe idea ideas insight* "
                         "learn* discover* explain*",
    "cognition.tentative": "may might perhaps possibly possible probably likely unlikely seem seems "
                           "somewhat approximately uncertain* unclear could",
    "cognition.certainty": "always never clearly clear certain* definitely indeed undoubtedly must obvious* fact facts",
    "cognition.discrepancy": "should would need needs needed want",
    "focus.past": "was were had did been showed found reported observed increased decreased examined "
                  "analyzed conducted revealed identified measured collected compared indicated "
                  "demonstrated suggested recorded estimated evaluated performed developed confirmed "
                  "detected tested used obtained improved studied noted assessed described explored "
                  "treated received declined rose grew fell began became resulted led caused "
                  "affected influenced needed",
    "focus.present": "am is are do does have has now today currently show shows find finds indicate "
                     "indicates suggest suggests remain remains provide provides include includes "
                     "appear appears represent represents require requires describe describes present "
                     "presents support supports seem seems examine examines measure measures compare "
                     "compares reveal reveals identify identifies estimate estimates improve improves "
                     "increase increases reduce reduces explore explores assess assesses affect affects "
                     "cause causes lead leads",
    "focus.future": "will shall future soon upcoming forthcoming eventually tomorrow",
    "connective.causal": "because since therefore thus hence consequently so",
    "connective.additive": "and also moreover furthermore additionally besides likewise similarly",
    "connective.adversative": "but however although though whereas nevertheless nonetheless yet despite instead conversely",
    "connective.temporal": "then after before while when until meanwhile finally subsequently later previously",
    "connective.logical": "or if unless",
    "health": "health patient patients hospital vaccine vaccines virus viruses disease diseases infection "
              "infections doctor doctors nurse nurses blood cell cells drug drugs immun* clinic* symptom*",
}

# Content vocabulary with ratings on a 1..7 scale (concreteness, imageability).
CONCRETE_NOUNS = (
    "hospital patient mask vaccine cell blood water city school child doctor nurse animal plant "
    "soil tree machine sample road building car food bed drug virus mouse bottle window river "
    "farm house tissue leaf seed stone metal glass engine bridge market village forest coast "
    "island camera phone computer paper book table chair")
ABSTRACT_NOUNS = (
    "theory concept policy strategy framework approach analysis impact value method process factor "
    "quality structure context evidence pattern principle knowledge belief attitude identity "
    "freedom justice meaning notion aspect feature relation tendency variation capacity "
    "perspective dimension criterion component mechanism outcome trend issue model role level")
VERBS = (
    "show find report observe increase reduce examine measure compare indicate suggest reveal "
    "identify estimate evaluate develop confirm detect test use obtain support describe present "
    "require provide include remain appear represent explore assess collect record")
ADJECTIVES = (
    "large small recent new different similar local national social clinical public early specific "
    "general major significant low common previous current main novel further potential overall "
    "total various individual primary")
ADVERBS = "also often only usually generally mainly largely rather quite very here there"

FUNCTION_FREQ = {
    "the": 61000, "of": 30000, "and": 27000, "a": 21000, "in": 19000, "to": 16000, "is": 10000,
    "was": 9500, "it": 9000, "for": 8800, "that": 8500, "with": 7000, "as": 6800, "on": 6300,
    "be": 6000, "by": 5200, "are": 5000, "they": 4800, "this": 4600, "at": 4400, "from": 4200,
    "we": 3900, "were": 3600, "or": 3500, "have": 3400, "an": 3300, "had": 3200, "which": 3100,
}


def pseudo(word, lo, hi, salt):
    digest = hashlib.sha256((salt + word).encode()).digest()
    frac = int.from_bytes(digest[:4], "big") / 2**32
    return round(lo + (hi - lo) * frac, 2)


def past(verb):
    irregular = {"show": "showed", "find": "found"}
    if verb in irregular:
        return irregular[verb]
    if verb.endswith("e"):
        return verb + "d"
    if verb.endswith("y"):
        return verb[:-1] + "ied"
    return verb + "ed"


def third(verb):
    if verb.endswith(("s", "sh", "ch", "x")):
        return verb + "es"
    if verb.endswith("y"):
        return verb[:-1] + "ies"
    return verb + "s"


def main():
    patterns = {}
    for cat, words in WORDS.items():
        for w in words.split():
            patterns.setdefault(w, set()).add(cat)
    order = [c for c, _ in CATEGORIES]
    lines = ["# Demo LIWC-style lexicon. Patterns ending in '*' match by prefix.", "%"]
    lines += [f"{c}\t{name}" for c, name in CATEGORIES]
    lines.append("%")
    for w in sorted(patterns):
        cats = sorted(patterns[w], key=order.index)
        lines.append(f"{w}\t{','.join(cats)}")
    (DATA / "lexicon.tsv").write_text("\n".join(lines) + "\n")

    norms = {}
    for n in CONCRETE_NOUNS.split():
        norms[n] = (pseudo(n, 5.2, 6.9, "c"), pseudo(n, 5.0, 6.8, "i"))
        norms[n + "s"] = norms[n]
    for n in ABSTRACT_NOUNS.split():
        norms[n] = (pseudo(n, 1.6, 3.2, "c"), pseudo(n, 1.8, 3.6, "i"))
        plural = n[:-1] + "ies" if n.endswith("y") else (n + "es" if n.endswith(("s", "x")) else n + "s")
        norms[plural] = norms[n]
    for v in VERBS.split():
        r = (pseudo(v, 2.4, 4.0, "c"), pseudo(v, 2.4, 4.2, "i"))
        for form in (v, past(v), third(v)):
            norms[form] = r
    for a in ADJECTIVES.split():
        norms[a] = (pseudo(a, 2.0, 4.2, "c"), pseudo(a, 2.2, 4.4, "i"))
    for w in ("they", "them", "you", "it", "we", "he", "she"):
        norms[w] = (pseudo(w, 1.8, 3.0, "c"), pseudo(w, 1.8, 3.2, "i"))
    rows = ["word,concreteness,imageability"] + [f"{w},{c},{i}" for w, (c, i) in sorted(norms.items())]
    (DATA / "norms.csv").write_text("\n".join(rows) + "\n")

    vocab = set(FUNCTION_FREQ)
    vocab.update(w for w in patterns if not w.endswith("*"))
    vocab.update(norms)
    vocab.update(ADVERBS.split())
    freqs = []
    for w in sorted(vocab):
        f = FUNCTION_FREQ.get(w)
        if f is None:
            f = pseudo(w, 1.0, 900.0, "f") if w in norms else pseudo(w, 50.0, 2500.0, "f")
        freqs.append(f"{w},{f}")
    (DATA / "frequencies.csv").write_text("word,freq_per_million\n" + "\n".join(freqs) + "\n")


if __name__ == "__main__":
    main()
