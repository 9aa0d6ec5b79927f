"""Plain-text framework documents.

One statement per line, ``#`` starts a comment::

    dimension 2
    vertex a 0 0
    vertex b 1 0
    vertex c 0 1
    edge a b
    edge a c
    edge b c
    stress a b -0.5       # optional; edge entries only
    shared a b            # optional attachment metadata

Only off-diagonal stresses on edges are stored; the diagonal is rebuilt from
zero row sums when the document is read. Numbers are written with 17
significant digits so that parsing a written document returns the same
floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import Configuration, Framework, Graph, normalize_edge
from .errors import InvalidInput
from .stress import StressMatrix, prune_to_graph


class DocumentError(InvalidInput):
    """The text is not a well-formed framework document."""


@dataclass(eq=False)
class FrameworkDocument:
    framework: Framework
    stress: StressMatrix | None = None
    labels: list[str] = field(default_factory=list)
    shared: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.labels:
            self.labels = [str(i + 1) for i in range(self.framework.v)]
        if len(self.labels) != self.framework.v:
            raise InvalidInput("one label per vertex is required")

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise DocumentError(f"unknown vertex label {label!r}") from None


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def dumps(doc: FrameworkDocument) -> str:
    fw = doc.framework
    lab = doc.labels
    lines = [f"dimension {fw.d}"]
    for i, p in enumerate(fw.points):
        lines.append(" ".join(["vertex", lab[i], *map(_fmt, p)]))
    for i, j in fw.graph.edges:
        lines.append(f"edge {lab[i]} {lab[j]}")
    if doc.stress is not None:
        om = doc.stress.omega
        for i, j in fw.graph.edges:
            lines.append(f"stress {lab[i]} {lab[j]} {_fmt(0.5 * (om[i, j] + om[j, i]))}")
    if doc.shared:
        lines.append("shared " + " ".join(lab[i] for i in doc.shared))
    return "\n".join(lines) + "\n"


def _float(token: str, lineno: int) -> float:
    try:
        x = float(token)
    except ValueError:
        raise DocumentError(f"line {lineno}: {token!r} is not a number") from None
    if not np.isfinite(x):
        raise DocumentError(f"line {lineno}: non-finite number {token!r}")
    return x


def loads(text: str) -> FrameworkDocument:
    d = None
    labels: list[str] = []
    coords: list[list[float]] = []
    edge_labels: list[tuple[str, str, int]] = []
    stress_rows: list[tuple[str, str, float, int]] = []
    shared_labels: list[tuple[str, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        if head == "dimension":
            if d is not None or len(rest) != 1 or not rest[0].isdigit() or int(rest[0]) < 1:
                raise DocumentError(f"line {lineno}: bad dimension statement")
            d = int(rest[0])
        elif head == "vertex":
            if d is None:
                raise DocumentError(f"line {lineno}: vertex before dimension")
            if len(rest) != d + 1:
                raise DocumentError(f"line {lineno}: vertex needs a label and {d} coordinates")
            if rest[0] in labels:
                raise DocumentError(f"line {lineno}: duplicate vertex label {rest[0]!r}")
            labels.append(rest[0])
            coords.append([_float(t, lineno) for t in rest[1:]])
        elif head == "edge":
            if len(rest) != 2:
                raise DocumentError(f"line {lineno}: edge needs two labels")
            edge_labels.append((rest[0], rest[1], lineno))
        elif head == "stress":
            if len(rest) != 3:
                raise DocumentError(f"line {lineno}: stress needs two labels and a value")
            stress_rows.append((rest[0], rest[1], _float(rest[2], lineno), lineno))
        elif head == "shared":
            shared_labels.extend((t, lineno) for t in rest)
        else:
            raise DocumentError(f"line {lineno}: unknown statement {head!r}")
    if d is None or not labels:
        raise DocumentError("document needs a dimension and at least one vertex")

    where = {lab: k for k, lab in enumerate(labels)}

    def lookup(lab: str, lineno: int) -> int:
        if lab not in where:
            raise DocumentError(f"line {lineno}: unknown vertex label {lab!r}")
        return where[lab]

    edges = []
    for a, b, lineno in edge_labels:
        i, j = lookup(a, lineno), lookup(b, lineno)
        if i == j:
            raise DocumentError(f"line {lineno}: self-loop")
        edges.append(normalize_edge(i, j))
    if len(set(edges)) != len(edges):
        raise DocumentError("duplicate edge")
    graph = Graph(len(labels), tuple(edges))
    framework = Framework(graph, Configuration(np.array(coords, dtype=float)))

    stress = None
    if stress_rows:
        om = np.zeros((graph.v, graph.v))
        seen = set()
        for a, b, w, lineno in stress_rows:
            e = normalize_edge(lookup(a, lineno), lookup(b, lineno))
            if not graph.has_edge(*e):
                raise DocumentError(f"line {lineno}: stress on non-edge {a}-{b}")
            if e in seen:
                raise DocumentError(f"line {lineno}: stress for {a}-{b} given twice")
            seen.add(e)
            om[e] = om[e[::-1]] = w
        stress = prune_to_graph(om, graph)
    shared = [lookup(lab, lineno) for lab, lineno in shared_labels]
    return FrameworkDocument(framework, stress, labels, shared)


def read(path) -> FrameworkDocument:
    try:
        text = Path(path).read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise DocumentError(f"cannot read {path}: {exc}") from exc
    return loads(text)


def write(doc: FrameworkDocument, path) -> None:
    Path(path).write_text(dumps(doc))
