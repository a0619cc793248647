#!/usr/bin/env python3
"""Generate the synthetic recipe corpora committed under fixtures/.

    fixtures/boost40.xml          40 recipes, dish type + difficulty + gold
    fixtures/synthetic/train.xml  45 recipes
    fixtures/synthetic/test.xml   15 recipes

Output is deterministic (fixed seeds). The files are committed; rerun only to
rebuild them on purpose, then regenerate the goldens.
"""

import random
from pathlib import Path
from xml.sax.saxutils import escape

HERE = Path(__file__).resolve().parent

TYPES = {
    "Dessert": {
        "titles": ["Gâteau", "Tarte", "Mousse", "Crumble", "Clafoutis", "Flan"],
        "ingredients": ["sucre", "farine", "beurre", "oeufs", "chocolat", "crème fraîche",
                        "vanille", "fraises", "pommes", "lait"],
        "words": ["sucré", "moule", "fouetter", "dorer", "tiède", "glaçage", "démouler"],
    },
    "Entrée": {
        "titles": ["Salade", "Velouté", "Verrines", "Tartare", "Soupe", "Terrine"],
        "ingredients": ["tomates", "salade", "concombre", "vinaigrette", "oeufs", "crevettes",
                        "avocat", "radis", "saumon fumé", "chèvre"],
        "words": ["frais", "assaisonner", "fraîcheur", "entrée", "mixer", "froid", "citronner"],
    },
    "Plat principal": {
        "titles": ["Ragoût", "Gratin", "Rôti", "Curry", "Poêlée", "Blanquette"],
        "ingredients": ["boeuf", "poulet", "agneau", "pommes de terre", "carottes", "oignons",
                        "riz", "lardons", "gruyère", "cabillaud"],
        "words": ["mijoter", "cocotte", "sauce", "rissoler", "copieux", "feu doux", "napper"],
    },
}

LEVELS = {
    "Très facile": {"steps": (2, 3), "words": ["simplement", "rapidement", "directement"]},
    "Facile": {"steps": (3, 4), "words": ["facilement", "ensuite", "doucement"]},
    "Moyennement difficile": {"steps": (5, 6), "words": ["réserver", "délicatement", "surveiller"]},
    "Difficile": {"steps": (7, 9), "words": ["tempérer", "flamber", "chemiser", "clarifier"]},
}

GENERIC_OF = {
    "boeuf": "viande", "poulet": "viande", "agneau": "viande", "lardons": "viande",
    "gruyère": "fromage", "chèvre": "fromage",
    "cabillaud": "poisson", "saumon fumé": "poisson",
}

TEMPLATES = [
    "Ajouter {ing} et mélanger {adv}.",
    "Couper {ing} en morceaux, puis {word}.",
    "Faire cuire {ing} pendant quelques minutes.",
    "Verser {ing} dans un plat et {word}.",
    "Incorporer {ing} {adv}; bien remuer.",
    "Disposer {ing} sur le dessus, {word}!",
]


def mention(ing, rng):
    generic = GENERIC_OF.get(ing)
    if generic and rng.random() < 0.4:
        return "le " + generic
    return "les " + ing if ing.endswith("s") else "le " + ing


def recipe(rid, rng):
    dish = rng.choice(list(TYPES))
    level = rng.choices(list(LEVELS), weights=[2, 4, 3, 1])[0]
    t, lv = TYPES[dish], LEVELS[level]
    gold = rng.sample(t["ingredients"], rng.randint(3, 5))
    if rng.random() < 0.3:
        other = rng.choice([d for d in TYPES if d != dish])
        extra = rng.choice(TYPES[other]["ingredients"])
        if extra not in gold:
            gold.append(extra)
    title = f"{rng.choice(t['titles'])} de {gold[0]}"
    if rng.random() < 0.5:
        title += f" et {gold[1]}"
    steps = rng.randint(*lv["steps"])
    sentences = []
    for i in range(steps):
        ing = gold[i % len(gold)]
        sentences.append(
            rng.choice(TEMPLATES).format(
                ing=mention(ing, rng),
                adv=rng.choice(lv["words"]),
                word=rng.choice(t["words"] + lv["words"]),
            )
        )
    if rng.random() < 0.2:
        sentences.append("Mélanger énergiquement tous les ingrédients.")
    sentences.append("Servir " + rng.choice(["chaud", "froid", "aussitôt", "à table"]) + ".")
    body = " ".join(s[0].upper() + s[1:] for s in sentences)
    return {"id": str(rid), "title": title, "body": body, "type": dish, "level": level, "gold": gold}


def write(path, recipes):
    lines = ['<?xml version="1.0" encoding="UTF-8"?>', "<recettes>"]
    for r in recipes:
        lines.append(f'  <recette id="{r["id"]}">')
        lines.append(f"    <titre>{escape(r['title'])}</titre>")
        lines.append(f"    <niveau>{r['level']}</niveau>")
        lines.append(f"    <type>{r['type']}</type>")
        lines.append("    <ingredients>")
        for g in r["gold"]:
            lines.append(f"      <ingredient>{escape(g)}</ingredient>")
        lines.append("    </ingredients>")
        lines.append(f"    <preparation>{escape(r['body'])}</preparation>")
        lines.append("  </recette>")
    lines.append("</recettes>")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def main():
    rng = random.Random(40)
    write(HERE / "boost40.xml", [recipe(i + 1, rng) for i in range(40)])

    rng = random.Random(60)
    recipes = [recipe(i + 101, rng) for i in range(60)]
    (HERE / "synthetic").mkdir(exist_ok=True)
    write(HERE / "synthetic" / "train.xml", [r for i, r in enumerate(recipes) if i % 4 != 3])
    write(HERE / "synthetic" / "test.xml", [r for i, r in enumerate(recipes) if i % 4 == 3])


if __name__ == "__main__":
    main()
