"""Command-line interface.

Exit codes: 0 success (or certified), 1 domain failure, 2 input or parse error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import document, svg
from .attach import AttachmentSpec, EdgeReduction, attach, edge_reduced_stress, max_distance_discrepancy, reflection_counterexample
from .core import DEFAULT_TOL, Tolerances, infinitesimal_rigidity, is_general_position, nontrivial_flex_space
from .errors import InvalidInput, RigidityError
from .generate import LaterationPlan, generate_lateration
from .stress import NOT_GENERAL_POSITION, NOT_PSD, WRONG_NULLITY, certify_universal_rigidity, prune_to_graph

EXIT_OK, EXIT_DOMAIN, EXIT_INPUT = 0, 1, 2

_REASON_TEXT = {
    NOT_PSD: "not PSD",
    WRONG_NULLITY: "wrong nullity",
    NOT_GENERAL_POSITION: "not in general position",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _tolerances(args) -> Tolerances:
    return Tolerances(
        zero_rel=DEFAULT_TOL.zero_rel if args.tol_zero is None else args.tol_zero,
        geom_abs=DEFAULT_TOL.geom_abs if args.tol_geom is None else args.tol_geom,
    )


def _label_pairs(items, what: str) -> list[tuple[str, str]]:
    pairs = []
    for item in items or []:
        for token in item.split(","):
            token = token.strip()
            if not token:
                continue
            left, sep, right = token.partition(":")
            if not sep or not left or not right:
                raise InvalidInput(f"bad {what} entry {token!r}; expected LABEL:LABEL")
            pairs.append((left, right))
    return pairs


def _spec(doc_a, doc_b, share) -> AttachmentSpec:
    pairs = _label_pairs(share, "--share")
    return AttachmentSpec(tuple((doc_a.index_of(a), doc_b.index_of(b)) for a, b in pairs))


def _merged_labels(doc_a, doc_b, att) -> list[str]:
    labels = list(doc_a.labels)
    used = set(labels)
    for b, k in enumerate(att.index_map_b):
        if k < len(labels):
            continue
        name = doc_b.labels[b]
        while name in used:
            name = "B." + name
        labels.append(name)
        used.add(name)
    return labels


def _need_stress(doc, path):
    if doc.stress is None:
        raise document.DocumentError(f"{path} has no stress block")
    return doc.stress


def _print_certificate(cert, d) -> None:
    ev = np.asarray(cert.eigenvalues)
    print(f"verdict: {cert.verdict}")
    for r in cert.reasons:
        print(f"reason: {_REASON_TEXT.get(r, r)}")
    print(f"min eigenvalue: {ev.min():.6e}")
    print(f"max eigenvalue: {ev.max():.6e}")
    print(f"nullity: {cert.nullity} (expected {d + 1})")
    print(f"tolerances: zero_rel={cert.tolerances.zero_rel:g} geom_abs={cert.tolerances.geom_abs:g}")


def cmd_certify(args) -> int:
    tol = _tolerances(args)
    doc = document.read(args.input)
    sm = _need_stress(doc, args.input)
    cert = certify_universal_rigidity(doc.framework, sm, tol)
    _print_certificate(cert, doc.framework.d)
    return EXIT_OK if cert.certified else EXIT_DOMAIN


def cmd_attach(args) -> int:
    tol = _tolerances(args)
    doc_a, doc_b = document.read(args.a), document.read(args.b)
    sm_a, sm_b = _need_stress(doc_a, args.a), _need_stress(doc_b, args.b)
    att = attach(doc_a.framework, doc_b.framework, _spec(doc_a, doc_b, args.share), tol)
    removed = tuple((doc_a.index_of(x), doc_a.index_of(y))
                    for x, y in _label_pairs(args.reduce, "--reduce"))
    c, raw, reduced = edge_reduced_stress(att, sm_a, sm_b, EdgeReduction(removed), tol)
    sm = prune_to_graph(raw, reduced.graph)
    cert = certify_universal_rigidity(reduced, sm, tol)
    out = document.FrameworkDocument(reduced, sm, _merged_labels(doc_a, doc_b, att),
                                     list(att.shared_indices))
    document.write(out, args.out)
    print(f"c: {c:.6e}")
    print(f"nullity: {cert.nullity} (expected {reduced.d + 1})")
    print(f"min eigenvalue: {min(cert.eigenvalues):.6e}")
    print(f"verdict: {cert.verdict}")
    for r in cert.reasons:
        print(f"reason: {_REASON_TEXT.get(r, r)}")
    return EXIT_OK if cert.certified else EXIT_DOMAIN


def cmd_gen(args) -> int:
    tol = _tolerances(args)
    plan = LaterationPlan.random(args.d, args.v, args.seed)
    fw, sm = generate_lateration(plan, tol)
    document.write(document.FrameworkDocument(fw, sm), args.out)
    print(f"wrote {fw.v} vertices, {fw.graph.e} edges in R^{fw.d} to {args.out}")
    return EXIT_OK


def cmd_counterexample(args) -> int:
    tol = _tolerances(args)
    doc_a, doc_b = document.read(args.a), document.read(args.b)
    att = attach(doc_a.framework, doc_b.framework, _spec(doc_a, doc_b, args.share), tol)
    mirrored = reflection_counterexample(att, tol)
    gap = max_distance_discrepancy(att.framework.points, mirrored.points)
    out = document.FrameworkDocument(mirrored, None, _merged_labels(doc_a, doc_b, att),
                                     list(att.shared_indices))
    document.write(out, args.out)
    print(f"max distance discrepancy: {gap:.6e}")
    return EXIT_OK


def cmd_plot(args) -> int:
    doc = document.read(args.input)
    if doc.framework.d != 2:
        print(f"error: plot needs a planar framework, got d={doc.framework.d}", file=sys.stderr)
        return EXIT_DOMAIN
    with open(args.out, "w") as fh:
        fh.write(svg.render(doc.framework, doc.labels, doc.shared))
    return EXIT_OK


def cmd_flex(args) -> int:
    tol = _tolerances(args)
    doc = document.read(args.input)
    basis = nontrivial_flex_space(doc.framework, tol)
    print(f"nontrivial flex dimension: {basis.shape[1]}")
    print(f"infinitesimally rigid: {str(infinitesimal_rigidity(doc.framework, tol)).lower()}")
    return EXIT_OK


def cmd_genpos(args) -> int:
    tol = _tolerances(args)
    doc = document.read(args.input)
    ok = is_general_position(doc.framework.config, tol)
    print(f"general position: {str(ok).lower()}")
    return EXIT_OK if ok else EXIT_DOMAIN


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--tol-zero", type=float, default=None, help="relative zero threshold")
    common.add_argument("--tol-geom", type=float, default=None, help="absolute geometric tolerance")

    parser = _Parser(prog="unirigid", description="Universal rigidity certificates for bar-joint frameworks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("certify", parents=[common], help="check a stress certificate")
    p.add_argument("input")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("attach", parents=[common], help="attach two certified frameworks")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("out")
    p.add_argument("--share", action="append", required=True, metavar="A:B",
                   help="shared vertex pairs (label in A : label in B), comma separated or repeated")
    p.add_argument("--reduce", action="append", metavar="X:Y",
                   help="B-only edges between shared vertices to drop, as A labels")
    p.set_defaults(func=cmd_attach)

    p = sub.add_parser("gen", parents=[common], help="generate a certified lateration framework")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--v", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("counterexample", parents=[common],
                       help="mirror an attachment with at most d shared vertices")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("out")
    p.add_argument("--share", action="append", required=True, metavar="A:B")
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("plot", parents=[common], help="draw a planar framework as SVG")
    p.add_argument("input")
    p.add_argument("out")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("flex", parents=[common], help="dimension of the nontrivial flex space")
    p.add_argument("input")
    p.set_defaults(func=cmd_flex)

    p = sub.add_parser("genpos", parents=[common], help="general-position check")
    p.add_argument("input")
    p.set_defaults(func=cmd_genpos)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RigidityError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
