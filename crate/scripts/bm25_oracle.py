#!/usr/bin/env python3
"""Reference BM25 scores for the micro-corpus.

Usage: scripts/bm25_oracle.py crates/core/tests/data/micro_corpus.json > crates/core/tests/data/bm25_expected.json

Tokenization: split on whitespace, keep alphanumeric characters, lowercase,
drop empty tokens. Scoring: k1 = 1.2, b = 0.75,
idf = ln((N - df + 0.5) / (df + 0.5) + 1), summed over query tokens
including repeats. Arithmetic uses mpmath at 50 significant digits.
"""
import json
import sys

from mpmath import mp, mpf, log

mp.dps = 50
K1 = mpf("1.2")
B = mpf("0.75")


def tokens(text):
    out = []
    for word in text.split():
        t = "".join(c for c in word if c.isalnum()).lower()
        if t:
            out.append(t)
    return out


def main(path):
    corpus = json.load(open(path))
    docs = [tokens(d) for d in corpus["docs"]]
    n = len(docs)
    avgdl = mpf(sum(len(d) for d in docs)) / n

    def df(term):
        return sum(1 for d in docs if term in d)

    result = {}
    for q in corpus["queries"]:
        scores = []
        for d in docs:
            s = mpf(0)
            for term in tokens(q):
                tf = d.count(term)
                if tf == 0:
                    continue
                idf = log((n - df(term) + mpf("0.5")) / (df(term) + mpf("0.5")) + 1)
                s += idf * tf * (K1 + 1) / (tf + K1 * (1 - B + B * len(d) / avgdl))
            scores.append(float(s))
        result[q] = scores
    json.dump(result, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main(sys.argv[1])
