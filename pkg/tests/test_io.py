import json

import numpy as np
import pytest

from csbmlab.generators import CsbmParams, sample_csbm, sample_sbm
from csbmlab.graph import LabeledGraph
from csbmlab.io import DatasetFormatError, read_dataset, write_dataset


@pytest.fixture
def dataset(tmp_path):
    data = sample_csbm(CsbmParams(n=60, d=5, lam=1, mu=1, m_feat=3), 0)
    write_dataset(tmp_path / "ds", data, {"source": "test"})
    return tmp_path / "ds", data


def test_round_trip(dataset):
    path, data = dataset
    back = read_dataset(path)
    assert back.graph == data.graph
    assert np.array_equal(back.labels, data.labels)
    assert np.array_equal(back.features, data.features)
    meta = json.loads((path / "meta.json").read_text())
    assert meta["n"] == 60 and meta["k"] == 2 and meta["m_feat"] == 3 and meta["source"] == "test"


def test_headers_and_canonical_rows(dataset):
    path, data = dataset
    lines = (path / "edges.csv").read_text().splitlines()
    assert lines[0] == "src,dst"
    assert all(int(a) < int(b) for a, b in (ln.split(",") for ln in lines[1:]))
    assert (path / "labels.csv").read_text().startswith("node_id,class\n0,")
    assert (path / "features.csv").read_text().startswith("node_id,f0,f1,f2\n")


def test_features_optional(tmp_path):
    g, labels = sample_sbm(CsbmParams(n=20, d=4), 1)
    write_dataset(tmp_path, LabeledGraph(g, labels, 2))
    assert not (tmp_path / "features.csv").exists()
    assert read_dataset(tmp_path).features is None


def _corrupt(path, name, lineno, text):
    lines = (path / name).read_text().splitlines()
    lines[lineno - 1] = text
    (path / name).write_text("\n".join(lines) + "\n")


@pytest.mark.parametrize("name,lineno,text,msg", [
    ("edges.csv", 3, "1,x", "edges.csv:3: expected an integer"),
    ("edges.csv", 2, "4,4", "edges.csv:2: self-loop"),
    ("edges.csv", 4, "0,999", "edges.csv:4: node id out of range"),
    ("edges.csv", 1, "a,b", "edges.csv:1: expected header"),
    ("labels.csv", 5, "3,7", "labels.csv:5: class 7 out of range"),
    ("features.csv", 2, "0,1.0,nope,2.0", "features.csv:2: non-numeric"),
    ("features.csv", 6, "4,1.0", "features.csv:6: expected 4 columns"),
])
def test_errors_carry_line_numbers(dataset, name, lineno, text, msg):
    path, _ = dataset
    _corrupt(path, name, lineno, text)
    with pytest.raises(DatasetFormatError, match=msg):
        read_dataset(path)


def test_missing_label_reported(dataset):
    path, _ = dataset
    lines = (path / "labels.csv").read_text().splitlines()
    (path / "labels.csv").write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(DatasetFormatError, match="no label for node 59"):
        read_dataset(path)


def test_bad_meta(tmp_path):
    (tmp_path / "meta.json").write_text('{"n": 3}')
    with pytest.raises(DatasetFormatError, match="missing required key"):
        read_dataset(tmp_path)
