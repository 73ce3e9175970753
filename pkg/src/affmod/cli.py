"""Batch front end: ``affmod <command> --job job.json [--out report.json]``.

Every command reads one JSON job and writes one JSON report.  Reports are
serialized with sorted keys so repeated runs produce identical bytes; the
wall-clock time is included only when ``--timing`` is passed.

Exit codes: 0 ok, 1 verification failed, 2 input error, 3 incomplete (a
documented search or budget limit was hit).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import ffcount, flows, modification, rectify, transitivity
from .errors import (
    BudgetExceeded,
    FiberPointsNotFound,
    InvalidTripleError,
    NoInverseWithinDegree,
    NotDivisibleError,
    NotNilpotentWithin,
    PolySyntaxError,
    RootOutsideField,
    TransversalityViolated,
    UnknownVariableError,
    UnsupportedFieldError,
    WordFormatError,
)
from .fields import field_from_spec
from .parsing import parse
from .poly import Poly, PolyMap, VarContext, format_poly

COMMANDS = ("modify", "strict-transform", "lift", "flow", "transitivity", "rectify", "count", "gallery", "verify")

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_INCOMPLETE = 0, 1, 2, 3

DEFAULT_XVARS = {1: ["x"], 2: ["x", "y"], 3: ["x", "y", "z"]}

STATUS = {EXIT_OK: "ok", EXIT_VERIFY: "verify-failed", EXIT_INPUT: "input-error", EXIT_INCOMPLETE: "incomplete"}


class JobError(ValueError):
    """Malformed job file."""


class VerifyFailed(Exception):
    def __init__(self, reason: str, outputs: dict = None):
        super().__init__(reason)
        self.outputs = outputs or {}


class Incomplete(Exception):
    def __init__(self, reason: str, outputs: dict = None):
        super().__init__(reason)
        self.outputs = outputs or {}


INPUT_ERRORS = (
    JobError,
    PolySyntaxError,
    UnknownVariableError,
    UnsupportedFieldError,
    WordFormatError,
    InvalidTripleError,
    TransversalityViolated,
    NotDivisibleError,
    json.JSONDecodeError,
    OSError,
    ValueError,
    TypeError,
    ZeroDivisionError,
)
INCOMPLETE_ERRORS = (FiberPointsNotFound, NoInverseWithinDegree, RootOutsideField, BudgetExceeded, NotNilpotentWithin)


# ---------------------------------------------------------------------------
# job helpers


class Job:
    def __init__(self, data: dict, base: Path):
        if not isinstance(data, dict):
            raise JobError("job must be a JSON object")
        self.data = data
        self.base = base
        self.field = field_from_spec(str(data.get("field", "Q")))
        vars_ = data.get("vars")
        self.ctx = VarContext(vars_) if vars_ else None

    def get(self, key, default=None):
        return self.data.get(key, default)

    def require(self, key, kind=None):
        if key not in self.data:
            raise JobError(f"missing key {key!r}")
        value = self.data[key]
        if kind is not None and not isinstance(value, kind):
            raise JobError(f"key {key!r} must be of type {kind.__name__ if isinstance(kind, type) else kind}")
        return value

    def context(self, default=None) -> VarContext:
        if self.ctx is not None:
            return self.ctx
        if default is None:
            raise JobError("missing key 'vars'")
        return VarContext(default)

    def poly(self, text, ctx=None) -> Poly:
        if not isinstance(text, str):
            raise JobError(f"polynomial must be a string, got {text!r}")
        return parse(text, ctx or self.context(), self.field)

    def scalar(self, v):
        if isinstance(v, bool) or not isinstance(v, (int, str)):
            raise JobError(f"scalars are integers or rational strings, got {v!r}")
        return self.field(str(v))

    def text_or_file(self, key):
        if key in self.data:
            return self.require(key, str)
        fkey = key + "_file"
        if fkey in self.data:
            path = Path(self.require(fkey, str))
            if not path.is_absolute():
                path = self.base / path
            return path.read_text()
        raise JobError(f"missing key {key!r} (or {fkey!r})")


def _pstr(p: Poly) -> str:
    return format_poly(p)


def _map_json(m: PolyMap) -> dict:
    return {n: _pstr(c) for n, c in zip(m.source.names, m.components)}


def _scalar_str(c) -> str:
    return str(c)


def _triple(job: Job) -> modification.AffineTriple:
    ctx = job.context()
    center = job.require("center", list)
    rel = job.get("relation")
    return modification.AffineTriple(
        ctx, job.poly(job.require("f")), tuple(job.poly(b) for b in center), None if rel is None else job.poly(rel)
    )


def _presentation_json(pres) -> dict:
    return {
        "vars": list(pres.context.names),
        "new_vars": list(pres.new_vars),
        "relation": None if pres.relation is None else _pstr(pres.relation),
        "equations": [_pstr(e) for e in pres.equations],
        "blowdown": _map_json(pres.blowdown),
        "certificate": pres.certificate,
    }


# ---------------------------------------------------------------------------
# commands


def cmd_modify(job: Job) -> dict:
    t = _triple(job)
    pres = modification.modify(t, job.get("new_vars"), bool(job.get("assume_prime", False)))
    if not modification.check_presentation(pres):
        raise VerifyFailed("presentation check failed", {"presentation": _presentation_json(pres)})
    return {"presentation": _presentation_json(pres)}


def cmd_strict_transform(job: Job) -> dict:
    """``g`` over ``vars`` pulled back along ``blowdown`` (images over ``chart_vars``)."""
    ctx = job.context()
    chart = VarContext(job.require("chart_vars", list))
    images = job.require("blowdown", dict)
    unknown = set(images) - set(ctx.names)
    if unknown:
        raise JobError(f"blowdown names unknown variables {sorted(unknown)}")
    comps = [job.poly(images[n], chart) if n in images else job.poly(n, chart) for n in ctx.names]
    blowdown = PolyMap(ctx, chart, comps)
    exc = job.require("exceptional_var", str)
    chart.index(exc)
    g = job.poly(job.require("g"))
    mu, g1 = modification.strict_transform(g, blowdown, exc)
    return {"multiplicity": mu, "strict_transform": _pstr(g1)}


def _derivation(job: Job, ctx: VarContext) -> flows.Derivation:
    images = job.require("derivation", dict)
    unknown = set(images) - set(ctx.names)
    if unknown:
        raise JobError(f"derivation names unknown variables {sorted(unknown)}")
    zero = Poly.zero(ctx, job.field)
    return flows.Derivation(ctx, [job.poly(images[n], ctx) if n in images else zero for n in ctx.names])


def cmd_lift(job: Job) -> dict:
    t = _triple(job)
    d = _derivation(job, t.ambient)
    pres = modification.modify(t, job.get("new_vars"), True)
    lifted = flows.lift_derivation(t, d, pres)
    out = {
        "presentation": _presentation_json(pres),
        "lifted": {n: _pstr(im) for n, im in zip(lifted.ctx.names, lifted.images)},
    }
    if not flows.check_lift_intertwines(t, d, lifted, pres):
        raise VerifyFailed("lifted derivation does not intertwine the blowdown", out)
    out["intertwines"] = True
    return out


def cmd_flow(job: Job) -> dict:
    ctx = job.context()
    d = _derivation(job, ctx)
    cert = flows.check_lnd(d, int(job.get("max_iter", 64)))
    t = job.get("t", 1)
    t = t if isinstance(t, str) and t.isidentifier() else job.scalar(t)
    m = flows.exp_flow(d, cert, t)
    return {
        "nilpotency_orders": dict(sorted(cert.orders.items())),
        "flow": _map_json(m),
    }


def _hypersurface(job: Job) -> flows.HypersurfaceX:
    k = job.get("k")
    ctx = job.ctx
    if ctx is None:
        if not isinstance(k, int) or k < 1:
            raise JobError("give 'vars' or a positive integer 'k'")
        ctx = VarContext(DEFAULT_XVARS[k] if k in DEFAULT_XVARS else [f"x{i}" for i in range(1, k + 1)])
    elif k is not None and k != len(ctx):
        raise JobError(f"k = {k} but {len(ctx)} variables are listed")
    p = job.poly(job.require("p"), ctx)
    return flows.HypersurfaceX(p, job.get("u", "u"), job.get("v", "v"))


def _xpoints(job: Job, X, key: str) -> list:
    raw = job.require(key, list)
    pts = []
    for item in raw:
        if not isinstance(item, list) or len(item) != X.k + 2:
            raise JobError(f"each entry of {key!r} must list {X.k + 2} coordinates")
        P = flows.XPoint.from_tuple([job.scalar(c) for c in item])
        if not X.contains(P):
            raise JobError(f"{item} is not on u*v = p")
        pts.append(P)
    return pts


def cmd_transitivity(job: Job) -> dict:
    X = _hypersurface(job)
    sources = _xpoints(job, X, "sources")
    targets = _xpoints(job, X, "targets")
    plan = transitivity.solve(X, sources, targets)
    out = {"plan": plan.to_json()}
    if not transitivity.verify_plan(X, plan, sources, targets):
        raise VerifyFailed("plan does not replay", out)
    out["verified"] = True
    return out


def cmd_rectify(job: Job) -> dict:
    mode = job.get("mode", "n1")
    if mode == "n1":
        ctx = rectify.XYZ
        p, g = job.poly(job.require("p"), ctx), job.poly(job.require("g"), ctx)
        w = rectify.rectify_n1(p, g)
        out = {"word": rectify.serialize_rectify_word(w), "c": _scalar_str(w.c), "kappa": _scalar_str(w.kappa),
               "forward": _map_json(w.forward), "inverse": _map_json(w.inverse)}
        if not rectify.verify_rectified(rectify.BinomialSurface.from_pz_g(p, g), w):
            raise VerifyFailed("rectifying word fails its check", out)
        out["verified"] = True
        return out
    if mode == "smoothness":
        ctx = rectify.XY
        s = rectify.BinomialSurface(job.poly(job.require("f"), ctx), job.poly(job.require("g"), ctx), int(job.get("n", 1)))
        res = rectify.smoothness_check(s)
        out = {"result": res.status}
        if isinstance(res, rectify.SingularWitness):
            out["point"] = None if res.point is None else [None if c is None else str(c) for c in res.point]
            out["reason"] = res.reason
        elif isinstance(res, rectify.Undecided):
            raise Incomplete(res.reason, out)
        return out
    if mode == "pair":
        ctx = job.context(["x", "y"])
        f, g = job.poly(job.require("f"), ctx), job.poly(job.require("g"), ctx)
        cands = job.get("f1", [])
        cands = [cands] if isinstance(cands, str) else list(cands)
        alpha, P = rectify.rectify_pair(f, g, cands)
        return {"alpha": _map_json(alpha), "p": _pstr(P)}
    raise JobError(f"unknown rectify mode {mode!r}")


def cmd_count(job: Job) -> dict:
    q = job.require("q", int)
    if job.get("mode", "points") == "uv":
        X = _hypersurface(job)
        rep = ffcount.uv_identity(X.p, q, X.u, X.v)
        return {"report": rep.to_dict()}
    ctx = job.context()
    eqs = [job.poly(e, ctx) for e in job.require("eqs", list)]
    return {"count": ffcount.count_points(eqs, q, ctx)}


def cmd_gallery(job: Job) -> dict:
    name = job.require("name", str)
    if name not in modification.GALLERY_NAMES:
        raise JobError(f"unknown gallery entry {name!r}; known: {', '.join(modification.GALLERY_NAMES)}")
    params = job.get("params", {})
    if not isinstance(params, dict):
        raise JobError("params must be an object")
    item = modification.gallery(name, **params)
    out = {
        "name": item.name,
        "vars": list(item.equations[0].ctx.names),
        "equations": [_pstr(e) for e in item.equations],
        "golden": [_pstr(e) for e in item.golden],
        "unit": _scalar_str(item.unit),
    }
    if not item.matches:
        raise VerifyFailed("pipeline output differs from the closed form", out)
    out["matches"] = True
    return out


def cmd_verify(job: Job) -> dict:
    kind = job.require("kind", str)
    if kind == "transitivity":
        X = _hypersurface(job)
        sources = _xpoints(job, X, "sources")
        targets = _xpoints(job, X, "targets")
        word = flows.parse_word(job.text_or_file("word"), X.xctx, X.field)
        if word.space != "X" or word.ctx != X.xctx:
            raise JobError("word is not a word on this hypersurface")
        plan = transitivity.TransitivityPlan(word, [], {})
        ok = transitivity.verify_plan(X, plan, sources, targets)
        out = {"length": len(word), "verified": ok}
        if not ok:
            raise VerifyFailed("word does not send the sources to the targets on X", out)
        return out
    if kind == "affine-word":
        word = flows.parse_word(job.text_or_file("word"), job.ctx, job.field)
        ctx = word.ctx
        sources = [tuple(job.scalar(c) for c in pt) for pt in job.require("sources", list)]
        targets = [tuple(job.scalar(c) for c in pt) for pt in job.require("targets", list)]
        if any(len(pt) != len(ctx) for pt in sources + targets):
            raise JobError(f"points must have {len(ctx)} coordinates")
        images = [tuple(word.apply(pt)) for pt in sources]
        ok = images == targets
        out = {"length": len(word), "verified": ok}
        if not ok:
            raise VerifyFailed("word does not send the sources to the targets", out)
        return out
    if kind == "rectify":
        ctx = rectify.XYZ
        p, g = job.poly(job.require("p"), ctx), job.poly(job.require("g"), ctx)
        w = rectify.parse_rectify_word(job.text_or_file("word"), job.field)
        ok = rectify.verify_rectified(rectify.BinomialSurface.from_pz_g(p, g), w)
        out = {"verified": ok}
        if not ok:
            raise VerifyFailed("stored word does not rectify the surface", out)
        return out
    raise JobError(f"unknown verify kind {kind!r}")


HANDLERS = {
    "modify": cmd_modify,
    "strict-transform": cmd_strict_transform,
    "lift": cmd_lift,
    "flow": cmd_flow,
    "transitivity": cmd_transitivity,
    "rectify": cmd_rectify,
    "count": cmd_count,
    "gallery": cmd_gallery,
    "verify": cmd_verify,
}


# ---------------------------------------------------------------------------
# entry point


def _error_json(exc: BaseException) -> dict:
    err = {"type": type(exc).__name__, "message": str(exc)}
    pos = getattr(exc, "pos", None)
    if pos is not None:
        err["position"] = pos
    return err


def execute(command: str, job_path: str, seed: int = 0) -> tuple:
    """Run one job and return ``(exit_code, report_dict)``."""
    report = {"command": command, "seed": seed}
    try:
        path = Path(job_path)
        data = json.loads(path.read_text())
        if isinstance(data, dict) and data.get("command", command) != command:
            raise JobError(f"job is for {data['command']!r}, not {command!r}")
        job = Job(data, path.parent)
        report["outputs"] = HANDLERS[command](job)
        code = EXIT_OK
    except VerifyFailed as exc:
        report["outputs"] = exc.outputs
        report["error"] = {"type": "VerifyFailed", "message": str(exc)}
        code = EXIT_VERIFY
    except Incomplete as exc:
        report["outputs"] = exc.outputs
        report["error"] = {"type": "Undecided", "message": str(exc)}
        code = EXIT_INCOMPLETE
    except INCOMPLETE_ERRORS as exc:
        report["error"] = _error_json(exc)
        code = EXIT_INCOMPLETE
    except INPUT_ERRORS as exc:
        report["error"] = _error_json(exc)
        code = EXIT_INPUT
    report["status"] = STATUS[code]
    report["exit_code"] = code
    return code, report


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="affmod", description="Batch jobs for affine modifications and automorphisms of u*v = p.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--job", required=True, help="path to the JSON job file")
    ap.add_argument("--out", help="write the JSON report here instead of stdout")
    ap.add_argument("--seed", type=int, default=0, help="recorded in the report; no current command draws random numbers")
    ap.add_argument("--timing", action="store_true", help="include wall-clock seconds in the report")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    code, report = execute(args.command, args.job, args.seed)
    if args.timing:
        report["seconds"] = round(time.perf_counter() - start, 6)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            print(f"affmod: cannot write report: {exc}", file=sys.stderr)
            return EXIT_INPUT
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
