#!/usr/bin/env python3
"""Independent reference evaluation for the captioning metrics.

Computes expected values for the frozen metric fixtures used by the C++
tests. Implemented directly from the metric definitions, sharing no code
with the library. Run: python3 metrics_oracle.py
"""

import math
from collections import Counter


def tokenize(text):
    out = []
    cur = []
    for ch in text.lower():
        if ch.isalnum() and ord(ch) < 128:
            cur.append(ch)
        else:
            if cur:
                out.append("".join(cur))
            cur = []
    if cur:
        out.append("".join(cur))
    return out


def ngrams(tokens, n):
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


def bleu(candidate, references, n):
    c = len(candidate)
    if c == 0:
        return 0.0
    log_sum = 0.0
    for m in range(1, n + 1):
        cand_counts = Counter(ngrams(candidate, m))
        total = sum(cand_counts.values())
        if total == 0:
            return 0.0
        clipped = 0
        for gram, count in cand_counts.items():
            max_ref = max((Counter(ngrams(r, m))[gram] for r in references), default=0)
            clipped += min(count, max_ref)
        if clipped == 0:
            return 0.0
        log_sum += math.log(clipped / total)
    precision_geo = math.exp(log_sum / n)
    # closest reference length, ties toward the shorter reference
    r = min((abs(len(ref) - c), len(ref)) for ref in references)[1]
    bp = 1.0 if c >= r else math.exp(1.0 - r / c)
    return precision_geo * bp


def lcs_len(a, b):
    dp = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                dp[i][j] = dp[i - 1][j - 1] + 1
            else:
                dp[i][j] = max(dp[i - 1][j], dp[i][j - 1])
    return dp[len(a)][len(b)]


def rouge_l(candidate, reference):
    l = lcs_len(candidate, reference)
    if l == 0:
        return 0.0
    p = l / len(candidate)
    r = l / len(reference)
    return 2 * p * r / (p + r)


def meteor(candidate, reference):
    """Greedy longest-common-run alignment; chunks = number of runs."""
    cand_free = [True] * len(candidate)
    ref_free = [True] * len(reference)
    chunks = 0
    matches = 0
    while True:
        best_len = 0
        best = None
        for i in range(len(candidate)):
            for j in range(len(reference)):
                k = 0
                while (i + k < len(candidate) and j + k < len(reference)
                       and cand_free[i + k] and ref_free[j + k]
                       and candidate[i + k] == reference[j + k]):
                    k += 1
                if k > best_len:
                    best_len = k
                    best = (i, j)
        if best_len == 0:
            break
        i, j = best
        for k in range(best_len):
            cand_free[i + k] = False
            ref_free[j + k] = False
        chunks += 1
        matches += best_len
    if matches == 0:
        return 0.0
    p = matches / len(candidate)
    r = matches / len(reference)
    f = 10 * p * r / (r + 9 * p)
    penalty = 0.5 * (chunks / matches) ** 3
    return f * (1.0 - penalty)


def cider_d(candidates, references, sigma=6.0):
    n_images = len(references)
    # document frequency: number of images whose reference set contains the n-gram
    df = [Counter() for _ in range(4)]
    for refs in references:
        seen = [set() for _ in range(4)]
        for ref in refs:
            for n in range(1, 5):
                seen[n - 1].update(ngrams(ref, n))
        for n in range(4):
            for gram in seen[n]:
                df[n][gram] += 1

    def idf(gram, n):
        return math.log(n_images / df[n - 1][gram])

    total = 0.0
    for cand, refs in zip(candidates, references):
        per_ref = 0.0
        for ref in refs:
            sims = []
            for n in range(1, 5):
                cc = Counter(ngrams(cand, n))
                rc = Counter(ngrams(ref, n))
                dot = 0.0
                norm_c = 0.0
                norm_r = 0.0
                for gram, count in rc.items():
                    w = idf(gram, n)
                    rv = count * w
                    cv = min(cc.get(gram, 0), count) * w
                    dot += cv * rv
                    norm_c += cv * cv
                    norm_r += rv * rv
                if norm_c <= 0.0 or norm_r <= 0.0:
                    sims.append(0.0)
                    continue
                cos = dot / (math.sqrt(norm_c) * math.sqrt(norm_r))
                delta = len(cand) - len(ref)
                sims.append(cos * math.exp(-(delta ** 2) / (2 * sigma ** 2)))
            per_ref += 10.0 * sum(sims) / 4.0
        total += per_ref / len(refs)
    return total / len(candidates)


def show(label, value):
    print(f"{label} = {value:.15f}")


def main():
    t = tokenize

    print("# BLEU")
    show("bleu_identity", bleu(t("the cat sat on the mat"), [t("the cat sat on the mat")], 1))
    show("bleu_brevity", bleu(t("the cat sat"), [t("the cat sat down")], 1))
    show("bleu_disjoint", bleu(t("apple banana"), [t("cherry date")], 1))
    show("bleu_clipped", bleu(t("the the the the"), [t("the cat")], 1))
    show("bleu2_brevity", bleu(t("the cat sat"), [t("the cat sat down")], 2))
    show("bleu2_mixed", bleu(t("a b c d"), [t("a b x d")], 2))
    show("bleu_multiref", bleu(t("x y z"), [t("x y z w w"), t("x y")], 1))
    show("bleu2_zero_bigram", bleu(t("a c b"), [t("a b c")], 2))

    print("# ROUGE-L")
    show("rouge_identity", rouge_l(t("open the file menu"), t("open the file menu")))
    show("rouge_lcs3", rouge_l(t("a b c d"), t("a c d e")))
    show("rouge_disjoint", rouge_l(t("p q"), t("r s")))
    show("rouge_swap", rouge_l(t("a b"), t("b a")))
    show("rouge_prefix", rouge_l(t("the cat"), t("the cat sat down")))
    show("rouge_single", rouge_l(t("a"), t("a")))

    print("# METEOR")
    show("meteor_identity3", meteor(t("open the file"), t("open the file")))
    show("meteor_disjoint", meteor(t("p q"), t("r s")))
    show("meteor_subset", meteor(t("the cat sat"), t("the cat sat down")))
    show("meteor_swap", meteor(t("b a"), t("a b")))
    show("meteor_two_chunks", meteor(t("a b c d e"), t("a b x d e")))
    show("meteor_single", meteor(t("a"), t("a")))

    print("# CIDEr-D")
    show("cider_single_identity", cider_d([t("a cat sits")], [[t("a cat sits")]]))
    two_c = [t("a cat sits on the mat"), t("a dog runs in the park")]
    two_r = [[t("a cat sits on the mat"), t("the cat is on the mat")],
             [t("a dog runs in the park"), t("the dog runs through the park")]]
    show("cider_two_images", cider_d(two_c, two_r))
    pair_c = [t("the quick brown fox jumps"), t("steady green turtle walks slowly home")]
    pair_r = [[t("the quick brown fox jumps")], [t("steady green turtle walks slowly home")]]
    show("cider_exact_two", cider_d(pair_c, pair_r))
    dis_c = [t("alpha beta gamma"), t("one two three")]
    dis_r = [[t("delta epsilon zeta")], [t("four five six")]]
    show("cider_disjoint", cider_d(dis_c, dis_r))
    len_c = [t("a cat"), t("a dog runs in the park")]
    len_r = [[t("a cat sits on the mat today quietly")],
             [t("a dog runs in the park")]]
    show("cider_length_penalty", cider_d(len_c, len_r))
    part_c = [t("red car parked outside"), t("blue boat sails away")]
    part_r = [[t("red car parked near the house"), t("a red car is parked outside")],
              [t("a blue boat sails far away")]]
    show("cider_partial", cider_d(part_c, part_r))

    print("# accuracy / failure rate")
    show("accuracy_7_of_20", 7 / 20)
    show("failure_7_of_20", 7 / 20)


if __name__ == "__main__":
    main()
