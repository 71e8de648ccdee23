#!/usr/bin/env python3
"""Write the deterministic 200-record end-to-end fixture (tests/data/corpus200.jsonl)."""

import argparse
import json
import random

TOPICS = [
    {
        "for": ("0807", "Library and Information Studies"),
        "journal": ("Scientometrics", ["0138-9130"]),
        "words": ["citation", "analysis", "bibliometric", "indicators", "impact", "journal", "science",
                  "mapping", "research", "evaluation", "h-index", "co-citation"],
    },
    {
        "for": ("0104", "Statistics"),
        "journal": ("Physical Review E", ["1539-3755"]),
        "words": ["community", "detection", "network", "modularity", "graph", "clustering",
                  "complex", "networks", "structure", "random", "spectral", "partition"],
    },
    {
        "for": ("0806", "Information Systems"),
        "journal": ("Information Processing and Management", ["0306-4573"]),
        "words": ["retrieval", "query", "ranking", "search", "document", "relevance",
                  "text", "recommender", "system", "semantic", "indexing", "feedback"],
    },
]

LINKS = ["of", "for", "in", "and", "with", "on"]


def title(rng, topic):
    w = topic["words"]
    a, b, c, d = rng.sample(w, 4)
    form = rng.randrange(3)
    if form == 0:
        return f"{a.capitalize()} {b} {rng.choice(LINKS)} {c} {d}"
    if form == 1:
        return f"{a.capitalize()} {b}: {c} {d}"
    return f"{a.capitalize()} {b} {rng.choice(LINKS)} {c}"


def record(pid, year, t, rng, topic_index, refs):
    topic = TOPICS[topic_index]
    code, name = topic["for"]
    jt, issn = topic["journal"]
    return {
        "id": pid,
        "doi": f"10.9999/fixture.{pid.split('.')[-1]}",
        "title": title(rng, topic) if t is None else t,
        "year": year,
        "journal": {"title": jt, "issn": issn},
        "FOR": [{"code": code, "name": name}],
        "times_cited": 0,
        "altmetric": rng.randrange(0, 60),
        "relative_citation_ratio": round(rng.uniform(0.1, 4.0), 2),
        "reference_ids": refs,
        "authors": [f"Author {rng.randrange(1, 80)}" for _ in range(rng.randrange(1, 4))],
    }


def build(seed):
    rng = random.Random(seed)
    records = []
    classics = {k: [] for k in range(len(TOPICS))}
    n = 0

    def next_id():
        nonlocal n
        n += 1
        return f"pub.{n:04d}"

    for k in range(len(TOPICS)):
        for _ in range(30):
            pid = next_id()
            year = rng.randrange(1985, 2000)
            older = [c["id"] for c in classics[k] if c["year"] < year]
            refs = rng.sample(older, min(len(older), rng.randrange(0, 3)))
            r = record(pid, year, None, rng, k, refs)
            classics[k].append(r)
            records.append(r)

    seed_refs = [c["id"] for k in classics for c in rng.sample(classics[k], 3)]
    seed_rec = record("pub.seed", 2000, "Cascading citation expansion for science mapping", rng, 0, seed_refs)
    records.append(seed_rec)

    later = {k: [] for k in range(len(TOPICS))}
    ext = 0
    for _ in range(109):
        k = rng.randrange(len(TOPICS))
        year = rng.randrange(2001, 2017)
        pid = next_id()
        pool = [c["id"] for c in classics[k]]
        refs = rng.sample(pool, rng.randrange(4, 9))
        other = rng.choice([j for j in range(len(TOPICS)) if j != k])
        if rng.random() < 0.3:
            refs.append(rng.choice(classics[other])["id"])
        if rng.random() < 0.45:
            refs.append("pub.seed")
        earlier = [r["id"] for r in later[k] if r["year"] < year]
        if earlier:
            refs += rng.sample(earlier, min(len(earlier), rng.randrange(0, 3)))
        if rng.random() < 0.2:
            ext += 1
            refs.append(f"pub.ext.{ext:03d}")
        r = record(pid, year, None, rng, k, refs)
        later[k].append(r)
        records.append(r)

    cited = {}
    for r in records:
        for ref in r["reference_ids"]:
            cited[ref] = cited.get(ref, 0) + 1
    for r in records:
        r["times_cited"] = cited.get(r["id"], 0) * 3 + rng.randrange(0, 40)
    records.sort(key=lambda r: r["id"])
    return records


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=2019)
    ap.add_argument("--out", default="tests/data/corpus200.jsonl")
    args = ap.parse_args()
    records = build(args.seed)
    assert len(records) == 200
    with open(args.out, "w", encoding="utf-8") as f:
        for r in records:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
