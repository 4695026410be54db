"""Labelled (N, p) lattice naming the fastest observation method per node."""

from __future__ import annotations

import json
from collections import Counter
from pathlib import Path

import numpy as np

from .observers import ObservationMethod
from .surfaces import _check_axis, write_matrix_csv, read_matrix_csv


class CalibrationMap:
    def __init__(self, n_axis, p_axis, labels, provenance: dict | None = None):
        self.n_axis = _check_axis("n_axis", n_axis)
        self.p_axis = _check_axis("p_axis", p_axis)
        self.labels = [[m if isinstance(m, ObservationMethod) else ObservationMethod.parse(m)
                        for m in row] for row in labels]
        shape = (self.p_axis.size, self.n_axis.size)
        if len(self.labels) != shape[0] or any(len(r) != shape[1] for r in self.labels):
            raise ValueError(f"label matrix does not match axes {shape}")
        self.provenance = dict(provenance or {})

    @property
    def shape(self) -> tuple[int, int]:
        return (self.p_axis.size, self.n_axis.size)

    def methods(self) -> set[ObservationMethod]:
        return {m for row in self.labels for m in row}

    def counts(self) -> Counter:
        return Counter(m for row in self.labels for m in row)

    def label_at(self, i: int, j: int) -> ObservationMethod:
        return self.labels[i][j]

    def agreement(self, other: "CalibrationMap") -> float:
        """Share of nodes with the same label; axes must match."""
        if not (np.array_equal(self.n_axis, other.n_axis)
                and np.array_equal(self.p_axis, other.p_axis)):
            raise ValueError("maps are defined on different axes")
        same = sum(a == b for ra, rb in zip(self.labels, other.labels) for a, b in zip(ra, rb))
        return same / (self.shape[0] * self.shape[1])

    def to_dict(self) -> dict:
        return {"kind": "calibration_map",
                "n_axis": self.n_axis.tolist(), "p_axis": self.p_axis.tolist(),
                "labels": [[str(m) for m in row] for row in self.labels],
                "provenance": self.provenance}

    @classmethod
    def from_dict(cls, doc: dict) -> "CalibrationMap":
        if doc.get("kind") != "calibration_map":
            raise ValueError("document is not a calibration map")
        return cls(doc["n_axis"], doc["p_axis"], doc["labels"], doc.get("provenance"))

    def save(self, path) -> None:
        """``.json`` for the full document, anything else for a CSV label matrix."""
        path = Path(path)
        if path.suffix == ".json":
            path.write_text(json.dumps(self.to_dict(), indent=2))
        else:
            write_matrix_csv(path, self.n_axis, self.p_axis,
                             [[str(m) for m in row] for row in self.labels])

    @classmethod
    def load(cls, path) -> "CalibrationMap":
        path = Path(path)
        if path.suffix == ".json":
            return cls.from_dict(json.loads(path.read_text()))
        n_axis, p_axis, body = read_matrix_csv(path)
        return cls(n_axis, p_axis, body)

    def __repr__(self):
        return f"CalibrationMap({self.shape[0]}x{self.shape[1]}, {dict(self.counts())})"
