#!/usr/bin/env python3
"""Regenerates the bundled corpora under data/.

Output is fully determined by the fixed seeds below; tests pin the FNV-1a
hash of each file, so any edit here must be followed by updating those hashes.

    python3 tools/make_corpora.py data/
"""

import argparse
import pathlib
import random

LOW_SEED = 11
MEDIUM_SEED = 23
HIGH_SEED = 37


def low_entropy(rng: random.Random) -> str:
    """Templated code-like documents: long deterministic runs broken by small
    choice points (two or three near-equal options)."""
    funcs = ["total", "count", "scale", "merge", "clip", "shift"]
    args = ["x", "y"]
    ops = ["+", "-"]
    docs = []
    for _ in range(160):
        lines = []
        for _ in range(6):
            f = rng.choice(funcs)
            a, b = rng.sample(args + ["z"], 2)
            op = rng.choice(ops)
            limit = rng.choice(["0", "1"])
            lines.append(f"def {f} ( {a} , {b} ) :")
            lines.append(f"    result = {a} {op} {b}")
            lines.append(f"    if result > {limit} :")
            lines.append("        return result")
            lines.append(f"    return {a}")
        docs.append("\n".join(lines))
    return "\n\n".join(docs) + "\n"


def medium_entropy(rng: random.Random) -> str:
    """Sentences from a small grammar with a few hundred words."""
    det = ["the", "a", "one", "every", "that", "this"]
    adj = ("old quiet bright cold small far green dark warm slow tall wide pale soft loud "
           "deep thin rough clean sharp").split()
    noun = ("river stone light field house road bird sea hill tree night morning wind song path "
            "door garden window bridge valley tower market harbor forest village lantern letter "
            "mirror candle wall roof").split()
    verb = ("follows crosses watches finds leaves holds carries meets opens keeps passes remembers "
            "lifts covers reaches").split()
    prep = ["under", "over", "near", "beyond", "beside", "through", "behind", "across"]
    conj = ["and", "but", "while", "because", "so"]

    def phrase() -> str:
        words = [rng.choice(det)]
        if rng.random() < 0.6:
            words.append(rng.choice(adj))
        words.append(rng.choice(noun))
        return " ".join(words)

    def sentence() -> str:
        parts = [phrase(), rng.choice(verb), phrase()]
        if rng.random() < 0.5:
            parts += [rng.choice(prep), phrase()]
        if rng.random() < 0.3:
            parts += [rng.choice(conj), phrase(), rng.choice(verb), phrase()]
        return " ".join(parts) + " ."

    docs = []
    for _ in range(120):
        docs.append("\n".join(sentence() for _ in range(40)))
    return "\n\n".join(docs) + "\n"


def high_entropy(rng: random.Random) -> str:
    """Varied prose: Zipf-weighted draws from a few thousand synthetic words."""
    onsets = ["b", "c", "d", "f", "g", "h", "l", "m", "n", "p", "r", "s", "t", "v", "w", "br", "st", "tr"]
    vowels = ["a", "e", "i", "o", "u", "ai", "ea", "ou"]
    codas = ["", "n", "r", "s", "t", "l", "nd", "st"]
    vocab = set()
    while len(vocab) < 3000:
        syllables = rng.choice([1, 2, 2, 3])
        vocab.add("".join(rng.choice(onsets) + rng.choice(vowels) + rng.choice(codas) for _ in range(syllables)))
    vocab = sorted(vocab)
    rng.shuffle(vocab)
    weights = [1.0 / (rank + 1) ** 0.9 for rank in range(len(vocab))]
    docs = []
    for _ in range(40):
        words = rng.choices(vocab, weights=weights, k=1500)
        lines = [" ".join(words[i:i + 15]) for i in range(0, len(words), 15)]
        docs.append("\n".join(lines))
    return "\n\n".join(docs) + "\n"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out_dir", type=pathlib.Path)
    args = parser.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for name, build, seed in [("low_entropy.txt", low_entropy, LOW_SEED),
                              ("medium_entropy.txt", medium_entropy, MEDIUM_SEED),
                              ("high_entropy.txt", high_entropy, HIGH_SEED)]:
        (args.out_dir / name).write_text(build(random.Random(seed)), encoding="utf-8")


if __name__ == "__main__":
    main()
