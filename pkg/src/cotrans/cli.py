"""Command-line front end: ``cotrans COMMAND --spec FILE [--out FILE]``.

Exit status is 0 when every check passes, 1 when a check fails and 2 when
the spec file is invalid.  Reports are JSON with sorted keys and no timing data,
so a fixed seed gives byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import difference, evolution, partial
from .cotranslation import check_relation_preservation, verify_cotranslation
from .errors import CotransError, RejectedError, SchemaError
from .gallery import BUILDERS, NAMES
from .groupoid import verify_groupoid_axioms
from .groups import presentation_from_json
from .report import Report, render
from .serialize import cotranslation_from_spec, dumps, matrix_json, validate
from .skew import Suspension, cotranslation_from_hull, hull_from_cotranslation, verify_skew_axiom
from .transforms import Affine, as_affine, canonicalize

EXIT_OK, EXIT_FAIL, EXIT_SCHEMA = 0, 1, 2
COMMANDS = (
    "verify-groupoid",
    "verify-cotranslation",
    "check-relations",
    "skew-verify",
    "evaluate",
    "difference",
    "evolve",
    "derivative-identities",
    "partial-verify",
    "complete",
    "factorize",
    "gallery",
)


def _opts(spec):
    return {
        "seed": int(spec["seed"]),
        "tol": spec.get("tol"),
        "radius": int(spec.get("radius", 3)),
        "testpoints": int(spec.get("testpoints", 64)),
    }


def _points(space, o):
    from .transforms import sample

    return sample(space, o["testpoints"], o["seed"])


# -- commands ---------------------------------------------------------------


def cmd_verify_groupoid(spec, o):
    P = presentation_from_json(spec["presentation"]) if "presentation" in spec else cotranslation_from_spec(spec).P
    return verify_groupoid_axioms(P), {}


def cmd_verify_cotranslation(spec, o):
    Z = cotranslation_from_spec(spec)
    rep = verify_cotranslation(Z, testpoints=_points(Z.space, o), tol=o["tol"] or 1e-9, radius=o["radius"])
    return rep, {}


def cmd_check_relations(spec, o):
    Z = cotranslation_from_spec(spec)
    rep = check_relation_preservation(Z, testpoints=_points(Z.space, o), tol=o["tol"] or 1e-9, radius=o["radius"])
    return rep, {}


def cmd_skew_verify(spec, o):
    Z = cotranslation_from_spec(spec)
    P, tol = Z.P, o["tol"] or 1e-10
    X = _points(Z.space, o)
    skew = hull_from_cotranslation(Z)
    rep = verify_skew_axiom(skew, testpoints=X, tol=tol, radius=o["radius"])
    back = cotranslation_from_hull(skew, testpoints=X, tol=tol, radius=o["radius"])
    elems = skew.hull.indices(o["radius"])
    rt = rep.check("round trip")
    from .cotranslation import _ok, _residual

    for g in elems:
        for h in elems:
            res = _residual(Z.space, Z.evaluate(g, h).apply_batch(X), back.evaluate(g, h).apply_batch(X))
            rt.record(res, _ok(Z.space, res, tol), {"g": P.format(g), "h": P.format(h)})
    extras = {}
    if P.is_finite():
        rep.merge(Suspension(Z).verify_morphism(testpoints=X, tol=tol), prefix="suspension ")
    else:
        extras["suspension"] = "skipped for infinite groups"
    return rep, extras


def cmd_evaluate(spec, o):
    Z = cotranslation_from_spec(spec)
    T = Z.evaluate(spec["g"], spec["h"])
    out = {"g": spec["g"], "h": spec["h"]}
    n = canonicalize(T).normal()
    t = n if n is not None else T
    try:
        out["transform"] = t.to_json()
    except NotImplementedError:
        out["transform"] = type(t).__name__
    try:
        aff = as_affine(T)
        if aff.space.d == 1:
            out["coefficients"] = [_num(x) for x in aff.coefficients()]
    except CotransError:
        pass
    if "points" in spec:
        X = Z.space.check_batch(np.asarray(spec["points"], dtype=float))
        out["values"] = np.asarray(T.apply_batch(X), dtype=float).tolist()
    return Report(f"evaluate Z({spec['g']}, {spec['h']})"), out


def _num(x):
    from fractions import Fraction

    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return float(x)


def cmd_difference(spec, o):
    S = difference.sequence_from_json(spec["sequence"])
    triples = difference.default_triples(
        int(spec.get("triples", 200)), int(spec.get("span", 50)), int(spec.get("reach", 20)), o["seed"]
    )
    return difference.verify_cocycle(S, triples, tol=o["tol"] or 1e-8), {}


def cmd_evolve(spec, o):
    A = evolution.generator_from_json(spec["generator"])
    step = float(spec.get("step", evolution.DEFAULT_STEP))
    Psi = evolution.EvolutionOperator(A, step)
    rep = evolution.verify_evolution_properties(Psi, A, tol=o["tol"] or 1e-7, step=step)
    if "constant" in spec["generator"] or spec["generator"] == "rotation":
        from scipy.linalg import expm

        c = rep.check("matrix exponential")
        M = A(0.0)
        for t in np.linspace(0.0, 1.0, 11):
            res = float(np.linalg.norm(Psi(float(t), 0.0) - expm(float(t) * M)))
            c.record(res, res <= 1e-8, {"t": float(t)})
    return rep, {"psi_1_0": matrix_json(Psi(1.0, 0.0))}


def cmd_derivative_identities(spec, o):
    A = evolution.generator_from_json(spec["generator"])
    Z = evolution.flow_from_generator(A, float(spec.get("step", evolution.DEFAULT_STEP)))
    grid = evolution.default_grid(int(spec.get("grid", 5)))
    rep = evolution.verify_derivative_identities(Z, grid, h=float(spec.get("h", evolution.DEFAULT_H)), tol=o["tol"] or 1e-4)
    return rep, {}


def _partial_setup(spec, o):
    G = presentation_from_json(spec["presentation"])
    W = partial.partial_from_json(G, int(spec["d"]), spec["partial"])
    elems = [G.element(e) for e in spec["elements"]] if "elements" in spec else partial.default_sample(G, o["radius"])
    return G, W, elems


def cmd_partial_verify(spec, o):
    G, W, elems = _partial_setup(spec, o)
    rep = partial.verify_partial_law(W, elems, tol=o["tol"] or 1e-8)
    extras = {}
    if rep.passed:
        rk = rep.check("constant rank")
        try:
            extras["rank"] = partial.rank_of(W, elems)
            rk.record(0.0, True)
        except RejectedError as e:
            rk.record(1.0, False, e.witness)
    return rep, extras


def cmd_complete(spec, o):
    G, W, elems = _partial_setup(spec, o)
    tol = o["tol"] or 1e-8
    c = partial.complete_with_report(W, elems, tol)
    rep = c.report
    rep.merge(partial.verify_partial_law(c.total, elems, tol), prefix="total ")
    rep.merge(partial.check_orthogonal(W, c.V, elems, tol), prefix="completion ")
    full = rep.check("total full rank")
    for g in elems:
        for h in elems:
            r = partial.numerical_rank(c.total(g, h))
            full.record(float(W.d - r), r == W.d, {"g": G.format(g), "h": G.format(h), "rank": r})
    V_units = {G.format(g): matrix_json(c.V(g, G.identity)) for g in elems}
    return rep, {"V_at_units": V_units}


def cmd_factorize(spec, o):
    G, W, elems = _partial_setup(spec, o)
    tol = o["tol"] or 1e-8
    Z, P = partial.factorize(W, elems, tol)
    rep = partial.factorization_report(W, Z, P, elems, tol)
    rep.merge(partial.verify_invariant_projector(P, Z, elems, max(tol, 1e-9)), prefix="projector ")
    return rep, {"projector_at_e": matrix_json(P(G.identity))}


HANDLERS = {
    "verify-groupoid": cmd_verify_groupoid,
    "verify-cotranslation": cmd_verify_cotranslation,
    "check-relations": cmd_check_relations,
    "skew-verify": cmd_skew_verify,
    "evaluate": cmd_evaluate,
    "difference": cmd_difference,
    "evolve": cmd_evolve,
    "derivative-identities": cmd_derivative_identities,
    "partial-verify": cmd_partial_verify,
    "complete": cmd_complete,
    "factorize": cmd_factorize,
}


def run(command: str, spec: dict) -> tuple[int, dict]:
    """Validate ``spec`` and run ``command``; returns the exit status and the JSON payload.

    Raises :class:`SchemaError` for invalid specs.
    """
    validate(command, spec)
    o = _opts(spec)
    try:
        rep, extras = HANDLERS[command](spec, o)
    except RejectedError as e:
        payload = {"command": command, "seed": o["seed"], "passed": False, "error": str(e), "witness": e.witness}
        return EXIT_FAIL, payload
    except (SchemaError, ValueError, KeyError, TypeError) as e:
        raise SchemaError(str(e)) from e
    payload = {"command": command, "seed": o["seed"], "passed": rep.passed, "report": rep.to_dict(), **extras}
    return (EXIT_OK if rep.passed else EXIT_FAIL), payload


def gallery_spec(name: str, seed: int = 0) -> dict:
    doc = (BUILDERS[name].__doc__ or "").strip().splitlines()
    return {"example": name, "params": {}, "seed": seed, "tol": 1e-9, "radius": 3, "description": doc[0] if doc else ""}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cotrans", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("name", nargs="?", help="example name for the gallery command")
    p.add_argument("--spec", type=Path, help="experiment spec (JSON)")
    p.add_argument("--out", type=Path, help="write the JSON report here instead of stdout")
    p.add_argument("--seed", type=int, help="override the spec file's seed")
    p.add_argument("--tol", type=float, help="override the spec file's tolerance")
    p.add_argument("--radius", type=int, help="override the spec file's ball radius")
    return p


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "gallery":
        if args.name is None:
            _emit(dumps({"examples": list(NAMES)}), args.out)
            return EXIT_OK
        if args.name not in NAMES:
            print(f"error: unknown example {args.name!r}; choose from {', '.join(NAMES)}", file=sys.stderr)
            return EXIT_SCHEMA
        _emit(dumps(gallery_spec(args.name, args.seed or 0)), args.out)
        return EXIT_OK
    if args.spec is None:
        print("error: --spec is required", file=sys.stderr)
        return EXIT_SCHEMA
    try:
        spec = json.loads(args.spec.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        print(f"error: cannot read spec: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    try:
        validate(args.command, spec)
    except SchemaError as e:
        print(f"schema error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    for key in ("seed", "tol", "radius"):
        if getattr(args, key) is not None:
            spec[key] = getattr(args, key)
    try:
        status, payload = run(args.command, spec)
    except SchemaError as e:
        print(f"schema error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    _emit(dumps(payload), args.out)
    if args.out is not None and "report" in payload:
        print(render(payload["report"]))
    elif args.command == "evaluate" and "coefficients" in payload:
        print(f"coefficients: {tuple(payload['coefficients'])}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
