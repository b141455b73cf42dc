"""Writes vectors.txt: 32-dim word vectors for the fixture corpora.

Words in a synonym cluster share a dominant direction, so WMD between
paraphrases is small. Re-run after editing a fixture corpus.
"""
import json
import pathlib

import numpy as np

HERE = pathlib.Path(__file__).parent
DATA = HERE.parents[1] / "data"
DIM = 32

CLUSTERS = [
    ["secure", "security", "safe", "protection", "private", "sensitive"],
    ["attacker", "threat", "steal", "hacker", "risk"],
    ["split", "divide", "separate", "single", "threaded"],
    ["conversation", "thread", "message", "mail", "email"],
    ["delete", "remove", "erase", "deletion", "deactivate", "close"],
    ["recover", "restore", "retrieve", "undelete", "back"],
    ["photo", "picture", "image", "album"],
    ["upload", "post", "put", "add"],
    ["download", "save", "offline", "keep"],
    ["share", "invite", "link", "access", "give"],
    ["password", "reset", "forget", "login", "sign"],
    ["block", "prevent", "stop", "spam"],
    ["export", "backup", "csv", "spreadsheet", "excel"],
    ["contact", "address", "book", "list"],
    ["undo", "unsend", "recall", "retract", "cancel"],
    ["signature", "setup", "automatic"],
    ["video", "watch", "youtube"],
    ["file", "document", "folder", "data"],
]


def vocabulary():
    stop = {l.strip() for l in open(DATA / "stopwords_en.txt") if l.strip()}
    lemmas = {}
    for line in open(DATA / "lemmas_en.tsv"):
        line = line.rstrip("\n")
        if line and not line.startswith("#"):
            surface, lemma = line.split("\t")
            lemmas[surface] = lemma
    words = set()
    for name in ("webapps.jsonl", "toy.jsonl"):
        for line in open(HERE / name):
            for w in json.loads(line)["question"].lower().split():
                w = w.strip(".,?!'\"")
                if w and w not in stop:
                    words.add(lemmas.get(w, w))
    for cluster in CLUSTERS:
        words.update(cluster)
    return sorted(words)


def main():
    rng = np.random.RandomState(7)
    centers = [rng.normal(size=DIM) for _ in CLUSTERS]
    cluster_of = {w: i for i, c in enumerate(CLUSTERS) for w in c}
    with open(HERE / "vectors.txt", "w") as out:
        words = vocabulary()
        out.write(f"{len(words)} {DIM}\n")
        for w in words:
            v = rng.normal(size=DIM)
            if w in cluster_of:
                v = 0.35 * v + centers[cluster_of[w]]
            v /= np.linalg.norm(v)
            out.write(w + " " + " ".join(f"{x:.6f}" for x in v) + "\n")


if __name__ == "__main__":
    main()
