"""Read and write the dataset directory format.

A dataset directory holds ``edges.csv`` (``src,dst`` with ``src < dst``),
``labels.csv`` (``node_id,class``), an optional ``features.csv``
(``node_id,f0,...``) and ``meta.json`` with at least ``n``, ``k`` and
``m_feat``. Node ids are 0-based.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .graph import Graph, LabeledGraph


class DatasetFormatError(ValueError):
    """Malformed dataset file; the message carries ``path:line``."""


def _rows(path: Path, header: list[str] | None):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise DatasetFormatError(f"{path}:1: missing header row") from None
        if header is not None and [c.strip() for c in first] != header:
            raise DatasetFormatError(
                f"{path}:1: expected header {','.join(header)!r}, got {','.join(first)!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            yield lineno, first, row


def _int(path, lineno, value):
    try:
        return int(value)
    except ValueError:
        raise DatasetFormatError(f"{path}:{lineno}: expected an integer, got {value!r}") from None


def read_meta(directory) -> dict:
    path = Path(directory) / "meta.json"
    try:
        meta = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"{path}:{exc.lineno}: {exc.msg}") from None
    for key in ("n", "k", "m_feat"):
        if key not in meta:
            raise DatasetFormatError(f"{path}: missing required key {key!r}")
    return meta


def read_dataset(directory) -> LabeledGraph:
    d = Path(directory)
    meta = read_meta(d)
    n, k, m_feat = int(meta["n"]), int(meta["k"]), int(meta["m_feat"])

    edges = []
    path = d / "edges.csv"
    for lineno, _, row in _rows(path, ["src", "dst"]):
        if len(row) != 2:
            raise DatasetFormatError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
        u, v = _int(path, lineno, row[0]), _int(path, lineno, row[1])
        if not (0 <= u < n and 0 <= v < n):
            raise DatasetFormatError(f"{path}:{lineno}: node id out of range [0, {n})")
        if u == v:
            raise DatasetFormatError(f"{path}:{lineno}: self-loop on node {u}")
        edges.append((u, v))

    labels = np.full(n, -1, dtype=np.int64)
    path = d / "labels.csv"
    for lineno, _, row in _rows(path, ["node_id", "class"]):
        if len(row) != 2:
            raise DatasetFormatError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
        i, c = _int(path, lineno, row[0]), _int(path, lineno, row[1])
        if not 0 <= i < n:
            raise DatasetFormatError(f"{path}:{lineno}: node id out of range [0, {n})")
        if not 0 <= c < k:
            raise DatasetFormatError(f"{path}:{lineno}: class {c} out of range [0, {k})")
        labels[i] = c
    if np.any(labels < 0):
        missing = int(np.flatnonzero(labels < 0)[0])
        raise DatasetFormatError(f"{path}: no label for node {missing}")

    features = None
    path = d / "features.csv"
    if path.exists():
        features = np.full((n, m_feat), np.nan)
        expected = ["node_id"] + [f"f{j}" for j in range(m_feat)]
        for lineno, _, row in _rows(path, expected):
            if len(row) != m_feat + 1:
                raise DatasetFormatError(
                    f"{path}:{lineno}: expected {m_feat + 1} columns, got {len(row)}")
            i = _int(path, lineno, row[0])
            if not 0 <= i < n:
                raise DatasetFormatError(f"{path}:{lineno}: node id out of range [0, {n})")
            try:
                features[i] = [float(x) for x in row[1:]]
            except ValueError:
                raise DatasetFormatError(f"{path}:{lineno}: non-numeric feature value") from None
        if np.isnan(features).any():
            missing = int(np.flatnonzero(np.isnan(features).any(axis=1))[0])
            raise DatasetFormatError(f"{path}: no features for node {missing}")

    return LabeledGraph(Graph.from_edges(n, edges), labels, k, features)


def write_edges(path, g: Graph) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("src,dst\n")
        fh.writelines(f"{u},{v}\n" for u, v in g.edges.tolist())


def write_labels(path, labels) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("node_id,class\n")
        fh.writelines(f"{i},{c}\n" for i, c in enumerate(np.asarray(labels).tolist()))


def write_features(path, X) -> None:
    X = np.asarray(X, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(["node_id"] + [f"f{j}" for j in range(X.shape[1])]) + "\n")
        for i, row in enumerate(X.tolist()):
            fh.write(",".join([str(i)] + [repr(x) for x in row]) + "\n")


def write_meta(path, meta: dict) -> None:
    Path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def write_dataset(directory, data: LabeledGraph, provenance: dict | None = None) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_edges(d / "edges.csv", data.graph)
    write_labels(d / "labels.csv", data.labels)
    if data.features is not None:
        write_features(d / "features.csv", data.features)
    elif (d / "features.csv").exists():
        (d / "features.csv").unlink()
    meta = {"n": data.n, "k": data.k, "m_feat": data.m_feat}
    if provenance:
        meta.update({k: v for k, v in provenance.items() if k not in meta})
    write_meta(d / "meta.json", meta)
    return d
