#!/usr/bin/env python3
"""Stdlib-only transcription of sacreBLEU's corpus BLEU (13a tokenizer,
exponential smoothing, single reference, mixed case) used to freeze golden
values for the Rust scorer's tests.

Regenerate the fixtures with:

    python3 tools/bleu_reference.py > crates/core/tests/fixtures/bleu_cases.json
    python3 tools/bleu_reference.py --tokenizer > crates/core/tests/fixtures/tok13a_cases.json
"""

import json
import math
import re
import sys
from collections import Counter

# The four substitution passes of the mteval-v13a tokenizer, applied in order.
_T13A_RE = [
    (re.compile(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])"), r" \1 "),
    (re.compile(r"([^0-9])([\.,])"), r"\1 \2 "),
    (re.compile(r"([\.,])([^0-9])"), r" \1 \2"),
    (re.compile(r"([0-9])(\-)"), r"\1 \2 "),
]


def tokenize_13a(line):
    line = line.replace("<skipped>", "")
    line = line.replace("-\n", "")
    line = line.replace("\n", " ")
    if "&" in line:
        line = line.replace("&quot;", '"')
        line = line.replace("&amp;", "&")
        line = line.replace("&lt;", "<")
        line = line.replace("&gt;", ">")
    line = f" {line} "
    for regex, repl in _T13A_RE:
        line = regex.sub(repl, line)
    return line.split()


def extract_ngrams(tokens, max_order=4):
    ngrams = Counter()
    for n in range(1, max_order + 1):
        for i in range(len(tokens) - n + 1):
            ngrams[tuple(tokens[i : i + n])] += 1
    return ngrams


def corpus_bleu(hyps, refs):
    assert len(hyps) == len(refs)
    correct = [0] * 4
    total = [0] * 4
    sys_len = 0
    ref_len = 0
    for hyp, ref in zip(hyps, refs):
        hyp_toks = tokenize_13a(hyp.rstrip())
        ref_toks = tokenize_13a(ref.rstrip())
        sys_len += len(hyp_toks)
        ref_len += len(ref_toks)
        ref_ngrams = extract_ngrams(ref_toks)
        for ngram, count in extract_ngrams(hyp_toks).items():
            n = len(ngram)
            correct[n - 1] += min(count, ref_ngrams.get(ngram, 0))
            total[n - 1] += count

    precisions = [0.0] * 4
    smooth_mteval = 1.0
    effective_order = 4
    for n in range(1, 5):
        if total[n - 1] == 0:
            break
        if correct[n - 1] == 0:
            smooth_mteval *= 2
            precisions[n - 1] = 100.0 / (smooth_mteval * total[n - 1])
        else:
            precisions[n - 1] = 100.0 * correct[n - 1] / total[n - 1]

    if sys_len < ref_len:
        bp = math.exp(1 - ref_len / sys_len) if sys_len > 0 else 0.0
    else:
        bp = 1.0
    score = bp * math.exp(
        sum(math.log(p) for p in precisions if p > 0.0) / effective_order
    )
    return {
        "score": score,
        "precisions": precisions,
        "brevity_penalty": bp,
        "hyp_len": sys_len,
        "ref_len": ref_len,
    }


# ---------------------------------------------------------------------------
# Fixture corpora. `main` mixes English and Icelandic segments with numbers,
# entities, quotes, hyphenation and varying hypothesis quality.
# ---------------------------------------------------------------------------

MAIN = [
    # (hypothesis, reference)
    ("The parliament approved the new budget on Friday.",
     "The parliament approved the new budget on Friday."),
    ("The parliament has approved a new budget on Friday evening.",
     "The parliament approved the new budget on Friday evening."),
    ("Lawmakers rejected the proposal by 34 votes to 29.",
     "The proposal was rejected by lawmakers, 34 votes to 29."),
    ("Reykjavik is the capital city of Iceland.",
     "Reykjavik is the capital of Iceland."),
    ("The glacier has retreated 3.5 km since 1995.",
     "The glacier has retreated by 3.5 km since 1995."),
    ("More than 1,000 people attended the concert.",
     "Over 1,000 people attended the concert."),
    ("He said: \"We will not give up.\"",
     "He said: \"We will never give up.\""),
    ("The ship arrived at 06:45 after a long voyage.",
     "The ship arrived at 06:45 following a long voyage."),
    ("Researchers found a well-preserved manuscript from 1320.",
     "Researchers discovered a well-preserved manuscript from 1320."),
    ("Unemployment fell to 3.9% in the third quarter.",
     "Unemployment dropped to 3.9% in the third quarter."),
    ("The committee will meet again next Tuesday.",
     "The committee meets again next Tuesday."),
    ("Exports of fish &amp; aluminium rose sharply.",
     "Exports of fish &amp; aluminium increased sharply."),
    ("Do you know where the station is?",
     "Do you know where the train station is?"),
    ("It was the coldest winter in 25 years.",
     "It was the coldest winter for 25 years."),
    ("The new road will shorten the trip by 40 minutes.",
     "The new road shortens the journey by 40 minutes."),
    ("She published her first novel at the age of 19.",
     "She published her first novel when she was 19."),
    ("The results, however, were inconclusive.",
     "The results were, however, inconclusive."),
    ("Prices increased by 2.4% year-on-year.",
     "Prices rose 2.4% year-on-year."),
    ("The museum is open from 10:00 to 17:00 every day.",
     "The museum is open daily from 10:00 to 17:00."),
    ("A small earthquake was measured near the volcano.",
     "A minor earthquake was measured near the volcano."),
    ("The airline cancelled 12 flights because of the storm.",
     "The airline cancelled twelve flights due to the storm."),
    ("We expect the project to finish in 2027.",
     "The project is expected to be completed in 2027."),
    ("The court upheld the ruling of the lower court.",
     "The court upheld the lower court's ruling."),
    ("About half of the participants were women.",
     "Roughly half of the participants were women."),
    ("The bridge, built in 1974, needs repairs.",
     "The bridge, which was built in 1974, needs repair."),
    ("Electricity prices doubled over the last decade.",
     "Electricity prices have doubled during the last decade."),
    ("The farmer sold 250 sheep at the autumn market.",
     "The farmer sold 250 sheep at the market in autumn."),
    ("This is simply not true.",
     "That is simply not true."),
    ("Þingið samþykkti nýju fjárlögin á föstudag.",
     "Þingið samþykkti nýju fjárlögin á föstudag."),
    ("Þingið samþykkti ný fjárlög á föstudagskvöld.",
     "Þingið samþykkti nýju fjárlögin á föstudagskvöld."),
    ("Tillagan var felld með 34 atkvæðum gegn 29.",
     "Tillagan var felld með 34 atkvæðum gegn 29 atkvæðum."),
    ("Reykjavík er höfuðborg Íslands.",
     "Reykjavík er höfuðborg Íslands og stærsta borgin."),
    ("Jökullinn hefur hopað um 3,5 km síðan 1995.",
     "Jökullinn hefur hopað um 3,5 km frá 1995."),
    ("Yfir 1.000 manns sóttu tónleikana í gær.",
     "Rúmlega 1.000 manns sóttu tónleikana í gær."),
    ("Hann sagði: \"Við gefumst ekki upp.\"",
     "Hann sagði: \"Við munum aldrei gefast upp.\""),
    ("Skipið kom í höfn klukkan 06:45 eftir langa siglingu.",
     "Skipið kom til hafnar klukkan 06:45 eftir langa siglingu."),
    ("Vísindamenn fundu vel varðveitt handrit frá 1320.",
     "Vísindamenn uppgötvuðu vel varðveitt handrit frá 1320."),
    ("Atvinnuleysi minnkaði í 3,9% á þriðja ársfjórðungi.",
     "Atvinnuleysi dróst saman í 3,9% á þriðja ársfjórðungi."),
    ("Nefndin fundar aftur næsta þriðjudag.",
     "Nefndin mun funda aftur næstkomandi þriðjudag."),
    ("Útflutningur á fiski og áli jókst verulega.",
     "Útflutningur á fiski og áli jókst töluvert."),
    ("Veistu hvar stöðin er?",
     "Veistu hvar lestarstöðin er?"),
    ("Þetta var kaldasti vetur í 25 ár.",
     "Þetta var kaldasti veturinn í 25 ár."),
    ("Nýi vegurinn styttir ferðina um 40 mínútur.",
     "Nýi vegurinn mun stytta ferðina um 40 mínútur."),
    ("Hún gaf út fyrstu skáldsögu sína 19 ára gömul.",
     "Hún gaf út sína fyrstu skáldsögu 19 ára að aldri."),
    ("Niðurstöðurnar voru hins vegar ekki afgerandi.",
     "Niðurstöðurnar voru þó ekki afgerandi."),
    ("Verð hækkaði um 2,4% milli ára.",
     "Verðlag hækkaði um 2,4% á milli ára."),
    ("Safnið er opið frá 10:00 til 17:00 alla daga.",
     "Safnið er opið alla daga frá 10:00 til 17:00."),
    ("Lítill jarðskjálfti mældist nálægt eldfjallinu.",
     "Smár jarðskjálfti mældist nærri eldfjallinu."),
    ("Flugfélagið aflýsti 12 ferðum vegna óveðursins.",
     "Flugfélagið aflýsti tólf ferðum vegna óveðurs."),
    ("Við gerum ráð fyrir að verkefninu ljúki árið 2027.",
     "Gert er ráð fyrir að verkefninu ljúki árið 2027."),
    ("Dómstóllinn staðfesti úrskurð héraðsdóms.",
     "Dómstóllinn staðfesti niðurstöðu héraðsdóms."),
    ("Um helmingur þátttakenda var konur.",
     "Um það bil helmingur þátttakenda var konur."),
    ("Brúin, byggð 1974, þarfnast viðgerðar.",
     "Brúin, sem byggð var 1974, þarfnast viðgerða."),
    ("Raforkuverð tvöfaldaðist á síðasta áratug.",
     "Raforkuverð hefur tvöfaldast á síðasta áratug."),
    ("Bóndinn seldi 250 kindur á haustmarkaðnum.",
     "Bóndinn seldi 250 kindur á markaðnum í haust."),
    ("Þetta er einfaldlega ekki rétt.",
     "Það er einfaldlega ekki rétt."),
]

# All hypotheses at most three tokens: no 4-gram statistics at all, and some
# orders with zero matches, exercising the break / smoothing paths.
SHORT = [
    ("Yes.", "Yes."),
    ("No, thanks.", "No, thank you."),
    ("Góðan daginn!", "Góðan dag!"),
    ("Hello there.", "Hi there."),
    ("Takk fyrir.", "Takk kærlega fyrir."),
    ("Stop now.", "Stop right now."),
    ("Komdu inn.", "Komdu strax inn."),
    ("Why me?", "Why always me?"),
    ("Allt í lagi.", "Þetta er allt í lagi."),
    ("Never again.", "Never ever again."),
]

# Disjoint vocabulary: zero matches at every order, so every precision takes
# the exponential-smoothing branch with cumulative doubling.
DISJOINT = [
    ("alpha beta gamma delta epsilon", "eitt tvö þrjú fjögur fimm"),
    ("zeta eta theta iota", "sex sjö átta níu"),
    ("kappa lambda mu nu xi omicron", "tíu ellefu tólf þrettán fjórtán fimmtán"),
    ("pi rho sigma tau", "sextán sautján átján nítján"),
    ("upsilon phi chi psi omega", "tuttugu þrjátíu fjörutíu fimmtíu sextíu"),
    ("one two three four five six", "sjötíu áttatíu níutíu hundrað þúsund milljón"),
]

# Hypotheses systematically shorter than references: brevity penalty < 1.
BREVITY = [
    ("The cat sat.", "The cat sat on the mat near the door."),
    ("He left early.", "He left the meeting early in the afternoon."),
    ("Prices rose.", "Prices rose steadily throughout the entire year."),
    ("Köttur svaf.", "Kötturinn svaf lengi á mottunni við dyrnar."),
    ("Hún söng.", "Hún söng fallega á tónleikunum í gærkvöldi."),
    ("It rained.", "It rained heavily for three days in a row."),
    ("Skipið sökk.", "Skipið sökk í óveðrinu úti fyrir ströndinni."),
    ("They won.", "They won the championship for the third time."),
    ("Ég veit.", "Ég veit alveg hvað þú átt við."),
    ("We agreed.", "We agreed on the main points of the plan."),
    ("Hann fór.", "Hann fór heim snemma um kvöldið."),
    ("She smiled.", "She smiled warmly at the old photograph."),
]

CASES = [("main", MAIN), ("short", SHORT), ("disjoint", DISJOINT), ("brevity", BREVITY)]

TOKENIZER_INPUTS = [
    "Hello, world!",
    "3.5",
    "1,000 people",
    "a-1 and 9-5 shifts",
    "He said: \"fine\" (twice).",
    "&amp; &lt; &gt; &quot;",
    "x&y",
    "Þetta er „próf“ — já…",
    "wait... what?!",
    "3 . 5",
    "..",
    "a.b.c.",
    "100. kafli",
    "$5 + 20% = [profit]; {maybe}",
    "don't split apostrophes",
    "www.example.com/path?q=1",
    "",
    "   ",
    "tab\tseparated",
    "trailing space ",
    "5-",
    "-5",
    ",leading comma",
]


def self_check():
    identical = corpus_bleu(["a b c d"], ["a b c d"])
    assert abs(identical["score"] - 100.0) < 1e-9, identical
    # Hand-computed: precisions 4/5, 3/4, 2/3, 1/2; BP 1 -> 100 * 0.2 ** 0.25.
    known = corpus_bleu(["a b c d e"], ["a b c d f"])
    assert abs(known["score"] - 100.0 * 0.2 ** 0.25) < 1e-9, known
    assert tokenize_13a("Hello, world!") == ["Hello", ",", "world", "!"]
    assert tokenize_13a("3.5") == ["3.5"]


def main():
    self_check()
    if "--tokenizer" in sys.argv:
        cases = [{"input": s, "tokens": tokenize_13a(s)} for s in TOKENIZER_INPUTS]
        json.dump(cases, sys.stdout, ensure_ascii=False, indent=1)
    else:
        out = []
        for name, pairs in CASES:
            hyps = [h for h, _ in pairs]
            refs = [r for _, r in pairs]
            out.append(
                {
                    "name": name,
                    "hypotheses": hyps,
                    "references": refs,
                    "expected": corpus_bleu(hyps, refs),
                }
            )
        json.dump(out, sys.stdout, ensure_ascii=False, indent=1)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
