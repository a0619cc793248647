#!/usr/bin/env python3
"""Derive the reference tables for fixtures/six.xml.

Independent of the Rust code: tokenization here is a plain regex over letter
runs, which matches the library's normalizer on this fixture (no digits,
apostrophes, hyphens or abbreviations occur in it). Run from the repository
root; outputs go to fixtures/derived/.
"""

import math
import re
import xml.etree.ElementTree as ET
from collections import Counter, defaultdict
from pathlib import Path

HERE = Path(__file__).resolve().parent
OUT = HERE / "derived"
TYPE_IDS = {"Entrée": "entree", "Plat principal": "plat_principal", "Dessert": "dessert"}
GENERICS = ["fromage", "poisson", "viande"]


def tokens(text):
    return re.findall(r"[^\W\d_]+", text.lower())


def load():
    root = ET.parse(HERE / "six.xml").getroot()
    recipes = []
    for r in root.findall("recette"):
        recipes.append(
            {
                "id": r.get("id"),
                "title": r.findtext("titre").strip(),
                "body": r.findtext("preparation").strip(),
                "type": TYPE_IDS[r.findtext("type").strip()],
                "gold": [i.text.strip() for i in r.find("ingredients").findall("ingredient")],
            }
        )
    return recipes


def agglutination(recipes, min_count=3, max_n=3):
    counts = Counter()
    for r in recipes:
        for text in (r["title"], r["body"]):
            toks = tokens(text)
            for n in range(2, max_n + 1):
                for i in range(len(toks) - n + 1):
                    counts[tuple(toks[i : i + n])] += 1
    eligible = {g: c for g, c in counts.items() if c >= min_count}

    def contains(big, small):
        return any(big[i : i + len(small)] == small for i in range(len(big) - len(small) + 1))

    keep = []
    for g, c in eligible.items():
        if not any(len(h) > len(g) and contains(h, g) and ch >= c for h, ch in eligible.items()):
            keep.append(" ".join(g))
    return sorted(keep)


def main():
    recipes = load()
    OUT.mkdir(exist_ok=True)
    docs = [tokens(r["title"]) + tokens(r["body"]) for r in recipes]
    labels = [r["type"] for r in recipes]
    n = len(docs)
    classes = sorted(set(labels))
    df = Counter(t for d in docs for t in set(d))
    df_c = defaultdict(Counter)
    for d, l in zip(docs, labels):
        for t in set(d):
            df_c[t][l] += 1

    (OUT / "class_counts.tsv").write_text(
        "".join(f"{c}\t{labels.count(c)}\n" for c in classes)
    )
    (OUT / "agglutination.txt").write_text("".join(g + "\n" for g in agglutination(recipes)))

    tf = Counter(docs[0])
    rows = []
    for t in sorted(tf):
        w = tf[t] * math.log(n / df[t])
        if w != 0.0:
            rows.append(f"{t}\t{w!r}\n")
    (OUT / "tfidf_recipe1.tsv").write_text("".join(rows))

    gini = {t: sum((df_c[t][c] / df[t]) ** 2 for c in classes) for t in df}
    (OUT / "gini.tsv").write_text("".join(f"{t}\t{gini[t]!r}\n" for t in sorted(gini)))
    (OUT / "gini_0.5.txt").write_text("".join(f"{t}\n" for t in sorted(gini) if gini[t] >= 0.5))

    def mi(t, c):
        n11 = df_c[t][c]
        n10 = df[t] - n11
        n01 = labels.count(c) - n11
        n00 = n - n11 - n10 - n01
        total = 0.0
        for nij, row, col in (
            (n11, n11 + n10, n11 + n01),
            (n10, n11 + n10, n10 + n00),
            (n01, n01 + n00, n11 + n01),
            (n00, n01 + n00, n10 + n00),
        ):
            if nij:
                total += nij / n * math.log2(n * nij / (row * col))
        return total

    ranked = sorted(df, key=lambda t: (-max(mi(t, c) for c in classes), t))
    (OUT / "mi_top5.txt").write_text("".join(f"{t}\n" for t in ranked[:5]))

    rows = []
    for c in classes:
        for t in sorted(df):
            if gini[t] >= 0.45 and df_c[t][c]:
                rows.append(f"{c}\t{t}\t{df_c[t][c] * math.log(n / df[t]) * gini[t]!r}\n")
    (OUT / "class_vectors_0.45.tsv").write_text("".join(rows))

    r2 = recipes[1]
    numeric = [
        ("title_word_count", len(tokens(r2["title"]))),
        ("body_word_count", len(tokens(r2["body"]))),
        ("sentence_count", len([s for s in re.split(r"[.!?]", r2["body"]) if s.strip()])),
        ("separator_count", sum(r2["body"].count(ch) for ch in ".,:;!?")),
        ("ingredient_list_size", len(r2["gold"])),
    ]
    (OUT / "numeric_recipe2.tsv").write_text("".join(f"{k}\t{v}\n" for k, v in numeric))

    spec = defaultdict(Counter)
    for r, d in zip(recipes, docs):
        gold = {" ".join(tokens(g)) for g in r["gold"]}
        for g in GENERICS:
            if any(v in d for v in (g, g + "s", g + "x")):
                for x in gold:
                    spec[g][x] += 1
    (OUT / "specializations.tsv").write_text(
        "".join(f"{g}\t{x}\t{spec[g][x]}\n" for g in sorted(spec) for x in sorted(spec[g]))
    )


if __name__ == "__main__":
    main()
