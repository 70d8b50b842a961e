#!/usr/bin/env python3
"""Generate the synthetic ISIC-shaped fixture used by the CLI and acceptance tests.

Writes, into the output directory:
  synthetic.oode           binary embedding container (OODE v1, float32 rows)
  synthetic_manifest.csv   aligned manifest with train/val/test already assigned
  synthetic_oracle.json    AUROC values computed independently of oodkit
                           (scikit-learn LOF, numpy Mahalanobis, pairwise counting)

The fixture is deterministic for a given --seed.
"""

import argparse
import json
import struct
from pathlib import Path

import numpy as np

DIM = 16
ID_CLASSES = ["AK", "BCC", "BKL", "MEL", "NV", "SCC"]
OOD_CLASSES = ["DF", "VASC"]
ISIC_SOURCES = ["HAM", "BCN", "MSK"]
PER_SOURCE = {"NV": 420, "AK": 40, "BCC": 40, "BKL": 40, "MEL": 40, "SCC": 40, "DF": 14, "VASC": 14}
RATIOS = (0.8, 0.05, 0.15)


def apportion(total):
    targets = [r * total for r in RATIOS]
    counts = [int(np.floor(t)) for t in targets]
    rema = [t - c for t, c in zip(targets, counts)]
    order = sorted(range(3), key=lambda s: -rema[s])
    i = 0
    while sum(counts) < total:
        counts[order[i % 3]] += 1
        i += 1
    return counts


def build(seed):
    rng = np.random.default_rng(seed)
    class_centers = {c: rng.normal(size=DIM) * 0.6 for c in ID_CLASSES + OOD_CLASSES}
    # rare classes sit further out
    for c in OOD_CLASSES:
        class_centers[c] = class_centers[c] * 1.5
    source_offsets = {s: rng.normal(size=DIM) * 0.5 for s in ISIC_SOURCES}

    rows, records = [], []

    def add_block(cls, src, count, center, scale):
        # groups hold one or two images of the same lesion
        sizes = []
        remaining = count
        while remaining > 0:
            g = 2 if remaining > 1 and rng.random() < 0.35 else 1
            sizes.append(g)
            remaining -= g
        gids = [f"{src}_{cls}_L{j:04d}" for j in range(len(sizes))]
        perm = rng.permutation(len(gids))
        counts = apportion(len(gids))
        split_of = {}
        for pos, gi in enumerate(perm):
            split_of[gids[gi]] = "train" if pos < counts[0] else ("val" if pos < counts[0] + counts[1] else "test")
        img = 0
        for gid, size in zip(gids, sizes):
            lesion = center + rng.normal(size=DIM) * scale * 0.5
            for _ in range(size):
                rows.append(lesion + rng.normal(size=DIM) * scale * 0.5)
                records.append((f"{src}_{cls}_{img:05d}", gid, cls, src, split_of[gid]))
                img += 1

    for src in ISIC_SOURCES:
        for cls in ID_CLASSES + OOD_CLASSES:
            add_block(cls, src, PER_SOURCE[cls], class_centers[cls] + source_offsets[src], 1.0)
    add_block("cifar", "CIFAR10", 450, rng.normal(size=DIM) * 2.0, 1.0)
    add_block("svhn", "SVHN", 60, rng.normal(size=DIM) * 2.0, 1.0)

    x = np.asarray(rows, dtype=np.float32)
    return x, records


def write_oode(path, x):
    n, d = x.shape
    with open(path, "wb") as f:
        f.write(b"OODE")
        f.write(struct.pack("<BII", 1, n, d))
        f.write(x.astype("<f4").tobytes(order="C"))


def pairwise_auroc(id_scores, ood_scores):
    twice = 0
    for o in ood_scores:
        twice += 2 * int(np.sum(o > id_scores)) + int(np.sum(o == id_scores))
    return twice / (2 * len(id_scores) * len(ood_scores))


def select(records, classes, sources, split):
    idx = []
    for i, (_, _, cls, src, sp) in enumerate(records):
        if classes and cls not in classes:
            continue
        if sources and src not in sources:
            continue
        if split and sp != split:
            continue
        idx.append(i)
    return np.asarray(idx)


def oracle_values(x, records):
    from sklearn.neighbors import LocalOutlierFactor

    x = x.astype(np.float64)
    out = {}
    protocols = {
        "ham": (set(ID_CLASSES), {"HAM"}, set(OOD_CLASSES), {"HAM"}, None),
        "ham-vs-bcn-6": (set(ID_CLASSES), {"HAM"}, set(ID_CLASSES), {"BCN"}, "test"),
    }
    for name, (idc, src, oodc, oods, ood_split) in protocols.items():
        fit = x[select(records, idc, src, "train")]
        idt = x[select(records, idc, src, "test")]
        ood = x[select(records, oodc, oods, ood_split)]
        for k in (10, 50):
            lof = LocalOutlierFactor(n_neighbors=k, metric="cosine", algorithm="brute", novelty=True).fit(fit)
            out[f"{name}/lof/cosine/{k}"] = pairwise_auroc(-lof.score_samples(idt), -lof.score_samples(ood))
        mu = fit.mean(axis=0)
        cov = np.cov(fit, rowvar=False, ddof=1)
        eps = 1e-3 * np.trace(cov) / cov.shape[0]
        inv = np.linalg.inv(cov + eps * np.eye(cov.shape[0]))

        def maha(z):
            c = z - mu
            return np.sqrt(np.einsum("ij,jk,ik->i", c, inv, c))

        out[f"{name}/ssd"] = pairwise_auroc(maha(idt), maha(ood))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, required=True)
    ap.add_argument("--seed", type=int, default=2019)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    x, records = build(args.seed)
    write_oode(args.out / "synthetic.oode", x)
    with open(args.out / "synthetic_manifest.csv", "w", newline="\n") as f:
        f.write("sample_id,group_id,class,source,split\n")
        for r in records:
            f.write(",".join(r) + "\n")
    oracle = oracle_values(x, records)
    oracle["rows"] = int(x.shape[0])
    oracle["dim"] = int(x.shape[1])
    with open(args.out / "synthetic_oracle.json", "w") as f:
        json.dump(oracle, f, indent=2, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    main()
