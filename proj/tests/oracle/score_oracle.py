#!/usr/bin/env python3
"""Brute-force acquisition scores straight from raw ensemble-scores JSONL.

Deliberately naive: every score is a direct loop over the record fields with
no shared code with the C++ engine. Used to regenerate the golden files in
tests/fixtures.

    score_oracle.py --ensemble-scores F --features F --strategy S --vocab-size V [--eos 0]
"""
import argparse
import json
import math
from collections import defaultdict

FLOOR = 1e-10
MAXIMIZE = {"entropy-mc", "entropy", "divergence"}


def dist(raw, vocab):
    listed = dict(zip(raw["t"], raw["p"]))
    unlisted = vocab - len(listed)
    share = raw["rem"] / unlisted if unlisted > 0 else 0.0
    return listed, raw["rem"], share


def prob(d, token):
    listed, _, share = d
    return listed.get(token, share)


def kl(p, q):
    p_listed, p_rem, p_share = p
    q_listed, q_rem, q_share = q
    union = set(p_listed) | set(q_listed)
    total = 0.0
    for t in union:
        pv = p_listed.get(t, p_share)
        qv = q_listed.get(t, q_share)
        if pv > 0:
            total += pv * math.log(pv / max(qv, FLOOR))
    # Remainder mass of tokens nobody lists, as one pseudo-token.
    p_pseudo = p_rem - p_share * len(union - set(p_listed))
    q_pseudo = q_rem - q_share * len(union - set(q_listed))
    p_pseudo, q_pseudo = max(p_pseudo, 0.0), max(q_pseudo, 0.0)
    if p_pseudo > 0:
        total += p_pseudo * math.log(p_pseudo / max(q_pseudo, FLOOR))
    return total


def entropy(d):
    listed, rem, _ = d
    h = -sum(p * math.log(p) for p in listed.values())
    if rem > 0:
        h -= rem * math.log(rem)
    return h


def width(tokens, eos):
    w = len(tokens)
    if eos is not None and w > 1 and tokens[-1] == eos:
        w -= 1
    return w


def score(samples, strategy, vocab, eos, model):
    L = len(samples[0]["cond"])
    K = sum(1 for s in samples if s["producer"] == 0)
    if strategy in ("entropy-mc", "entropy", "likelihood"):
        own = [s for s in samples if s["producer"] == model]
        total = 0.0
        for s in own:
            for w, tok in enumerate(s["tokens"]):
                d = dist(s["cond"][model][w], vocab)
                if strategy == "entropy":
                    total += entropy(d)
                else:
                    lp = math.log(max(prob(d, tok), FLOOR))
                    total += lp if strategy == "likelihood" else -math.exp(lp) * lp
        return total / len(own)
    total = 0.0
    for p in range(L):
        for q in range(L):
            if p == q:
                continue
            for s in samples:
                if s["producer"] != p:
                    continue
                W = width(s["tokens"], eos)
                if strategy == "agreement":
                    ll = 0.0
                    for w, tok in enumerate(s["tokens"]):
                        ll += math.log(max(prob(dist(s["cond"][q][w], vocab), tok), FLOOR))
                    total += ll / (K * W)
                else:
                    d = 0.0
                    for w in range(len(s["tokens"])):
                        d += kl(dist(s["cond"][p][w], vocab), dist(s["cond"][q][w], vocab))
                    total += (1.0 / K) * (d / W)
    return total / (L * (L - 1))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--ensemble-scores", required=True)
    ap.add_argument("--features", required=True)
    ap.add_argument("--strategy", required=True)
    ap.add_argument("--vocab-size", type=int, required=True)
    ap.add_argument("--eos", default="0")
    ap.add_argument("--model", type=int, default=0)
    args = ap.parse_args()
    eos = None if args.eos == "none" else int(args.eos)

    ids = [json.loads(line)["id"] for line in open(args.features) if line.strip()]
    by_id = defaultdict(list)
    for line in open(args.ensemble_scores):
        if line.strip():
            rec = json.loads(line)
            by_id[rec["id"]].append(rec)

    direction = "maximize" if args.strategy in MAXIMIZE else "minimize"
    rows = [(i, score(by_id[i], args.strategy, args.vocab_size, eos, args.model)) for i in ids]
    sign = -1.0 if direction == "maximize" else 1.0
    rows.sort(key=lambda r: (sign * r[1], r[0]))
    for i, v in rows:
        print(json.dumps({"id": i, "strategy": args.strategy, "value": v, "direction": direction},
                         separators=(",", ":")))


if __name__ == "__main__":
    main()
