"""``capq``: command-line front end.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 acceptance failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import dataclass, field
from typing import Optional

from . import acceptance
from .capacity import CapParams, cap_report
from .errors import CapqError, HypothesisError, ParameterError, UsageError
from .experiments import (
    DEFAULT_EPS_GRID,
    shape_search_max,
    shape_search_min,
    sweep_disconnected,
    sweep_elongated_ellipsoid,
    sweep_thin_ellipsoid,
)
from .functional import (
    GParams,
    g_ball_exact,
    g_interval,
    g_oracle,
    inf_bound_rhs,
    make_params,
    maximiser_ratio_lower,
    maximiser_ratio_lower_pd1,
    minimiser_ratio_lower,
    sup_bound_rhs,
)
from .geometry import ConvexBody, ball, cuboid, ellipsoid
from .numerics import QuadratureConfig, SearchConfig
from .torsion import (
    TorsionParams,
    certified_power_constants,
    constants_c1_c2,
    torsion2_ellipsoid_exact,
    torsion_ball_exact,
    torsion_interval_inradius,
    torsion_power_interval_perimeter,
    torsion_upper_saint_venant,
)

__all__ = ["SCHEMA_VERSION", "RunConfig", "parse_body", "format_body", "parse_params",
           "format_params", "to_json", "run", "main"]

SCHEMA_VERSION = 1
COMMANDS = ("cap-bounds", "torsion-bounds", "g-eval", "experiment", "search", "acceptance")
SWEEPS = {"thin_Ec": sweep_thin_ellipsoid, "elongated_Ea": sweep_elongated_ellipsoid,
          "disconnected_Omega": sweep_disconnected}

CSV_HELP = """\
CSV columns:
  cap-bounds      quantity, method, value
  torsion-bounds  quantity, lo, hi
  g-eval          quantity, value
  experiment      eps, g_lo, g_hi, label, then auxiliary columns in sorted order
  search          quantity, value
"""


@dataclass(frozen=True)
class RunConfig:
    command: str
    body_spec: str = ""
    param_spec: str = ""
    output_format: str = "json"
    output_path: Optional[str] = None
    seed: int = 42
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    search: SearchConfig = field(default_factory=SearchConfig)
    p: Optional[float] = None
    q: Optional[float] = None
    r: float = 1.0
    family: Optional[str] = None
    eps_grid: tuple = DEFAULT_EPS_GRID
    mode: str = "max"
    allow_negative_alpha: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.output_format not in ("json", "csv"):
            raise UsageError(f"unknown output format {self.output_format!r}")
        needs = {"cap-bounds": ("body_spec", "p"), "torsion-bounds": ("body_spec", "q"),
                 "g-eval": ("body_spec", "param_spec"), "experiment": ("family", "param_spec"),
                 "search": ("family", "param_spec")}
        for name in needs.get(self.command, ()):
            if getattr(self, name) in (None, ""):
                raise UsageError(f"{self.command} needs --{name.replace('_spec', '').replace('_', '-')}")


# ---------------------------------------------------------------- parsing

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"


def _number(text: str, pos: int, kind=float):
    if not re.fullmatch(_NUM, text):
        raise UsageError(f"expected a number, got {text!r}", pos)
    if kind is int:
        if not re.fullmatch(r"[-+]?\d+", text):
            raise UsageError(f"expected an integer, got {text!r}", pos)
        return int(text)
    return float(text)


def _split(body: str, offset: int):
    """Split on commas, yielding ``(item, position)``."""
    pos = offset
    for item in body.split(","):
        yield item, pos
        pos += len(item) + 1


def _key_values(text: str, offset: int, allowed: tuple) -> dict:
    out = {}
    for item, pos in _split(text, offset):
        if "=" not in item:
            raise UsageError(f"expected key=value, got {item!r}", pos)
        key, val = item.split("=", 1)
        if key not in allowed:
            raise UsageError(f"unknown key {key!r} (allowed: {', '.join(allowed)})", pos)
        if key in out:
            raise UsageError(f"duplicate key {key!r}", pos)
        out[key] = (val, pos + len(key) + 1)
    return out


def parse_body(spec: str) -> ConvexBody:
    """Parse ``ball:d=3,r=2``, ``ellipsoid:2,1,1`` or ``cuboid:1,1,1``."""
    if ":" not in spec:
        raise UsageError("body spec needs the form kind:..., e.g. ellipsoid:2,1,1", 0)
    kind, rest = spec.split(":", 1)
    offset = len(kind) + 1
    try:
        if kind == "ball":
            kv = _key_values(rest, offset, ("d", "r"))
            if "d" not in kv:
                raise UsageError("ball needs d=<int>", offset)
            d = _number(*kv["d"], kind=int)
            R = _number(*kv["r"]) if "r" in kv else 1.0
            return ball(R, d)
        if kind in ("ellipsoid", "cuboid"):
            lengths = [_number(item, pos) for item, pos in _split(rest, offset)]
            if len(lengths) < 2:
                raise UsageError(f"{kind} needs at least 2 lengths (d >= 2)", offset)
            return ellipsoid(lengths) if kind == "ellipsoid" else cuboid(lengths)
    except UsageError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc), offset) from exc
    raise UsageError(f"unknown body kind {kind!r}", 0)


def format_body(body: ConvexBody) -> str:
    if body.kind == "ball":
        return f"ball:d={body.dim},r={body.lengths[0]!r}"
    return f"{body.kind}:" + ",".join(repr(x) for x in body.lengths)


def parse_params(spec: str, strict: bool = True) -> GParams:
    """Parse ``d=3,p=2,q=2,r=1,beta=0``; ``alpha`` may replace or accompany ``beta``."""
    kv = _key_values(spec, 0, ("d", "p", "q", "r", "alpha", "beta"))
    for key in ("d", "p", "q", "r"):
        if key not in kv:
            raise UsageError(f"parameter spec needs {key}=...", len(spec))
    d = _number(*kv["d"], kind=int)
    p, q, r = (_number(*kv[k]) for k in ("p", "q", "r"))
    try:
        if "beta" in kv:
            gp = make_params(d, p, q, r, _number(*kv["beta"]), strict=strict)
            if "alpha" in kv:
                alpha = _number(*kv["alpha"])
                if abs(alpha - gp.alpha) > 1e-10:
                    raise UsageError(
                        f"alpha={alpha!r} is inconsistent with the constraint "
                        f"d*alpha + (d-1)*beta = d - p + (d+q')*r, which gives alpha={gp.alpha!r}",
                        kv["alpha"][1])
            return gp
        if "alpha" in kv:
            qp = q / (q - 1.0) if q > 1 else math.nan
            alpha = _number(*kv["alpha"])
            beta = (d - p + (d + qp) * r - d * alpha) / (d - 1)
            gp = make_params(d, p, q, r, beta, strict=strict)
            if abs(alpha - gp.alpha) > 1e-10:
                raise UsageError("derived beta does not reproduce alpha", kv["alpha"][1])
            return gp
        return make_params(d, p, q, r, 0.0, strict=strict)
    except UsageError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc), 0) from exc


def format_params(gp: GParams) -> str:
    return f"d={gp.d},p={gp.p!r},q={gp.q!r},r={gp.r!r},beta={gp.beta!r}"


# ---------------------------------------------------------------- output

def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with floats at 17 significant digits; non-finite floats become null."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return {True: "true", False: "false", None: "null"}[obj]
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return "null"
        text = format(obj, ".17g")
        # keep integral floats recognisable as floats after a round trip
        return text if any(c in text for c in ".e") else text + ".0"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{to_json(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + to_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "item"):  # numpy scalar
        return to_json(obj.item(), indent, _level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_cell(x):
    if isinstance(x, float):
        return format(x, ".12g")
    return "" if x is None else x


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_csv_cell(x) for x in row])
    return buf.getvalue()


def _params_dict(gp: GParams) -> dict:
    return {"d": gp.d, "p": gp.p, "q": gp.q, "r": gp.r, "alpha": gp.alpha, "beta": gp.beta}


def _try(fn, gp):
    try:
        return fn(gp), None
    except HypothesisError as exc:
        return None, str(exc)


# ---------------------------------------------------------------- commands

def _checked(cls, *args):
    """Build a parameter object, reporting bad values as usage errors."""
    try:
        return cls(*args)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _cap_bounds(cfg: RunConfig):
    body = parse_body(cfg.body_spec)
    rep = cap_report(body, _checked(CapParams, body.dim, cfg.p), cfg.quadrature, cfg.search)
    data = {"body": format_body(body), "d": body.dim, "p": cfg.p, "lower": rep.lower,
            "uppers": rep.uppers, "best_upper": rep.best_upper, "best_method": rep.best_method,
            "oracle": rep.oracle, "skipped": rep.skipped}
    rows = [("lower", "perimeter", rep.lower)] + [("upper", k, v) for k, v in rep.uppers.items()]
    if rep.oracle is not None:
        rows.append(("oracle", "elliptic_integral", rep.oracle))
    return data, (("quantity", "method", "value"), rows)


def _torsion_bounds(cfg: RunConfig):
    body = parse_body(cfg.body_spec)
    tp = _checked(TorsionParams, cfg.q, cfg.r)
    d = body.dim
    ti = torsion_interval_inradius(body, tp)
    tw = torsion_power_interval_perimeter(body, tp)
    C1, C2 = constants_c1_c2(d, tp)
    c1, c2 = certified_power_constants(d, tp)
    data = {"body": format_body(body), "q": tp.q, "q_prime": tp.q_prime, "r": tp.r,
            "inradius_interval": {"lo": ti.lo, "hi": ti.hi},
            "power_interval": {"lo": tw.lo, "hi": tw.hi},
            "saint_venant_upper": torsion_upper_saint_venant(body, tp),
            "constants": {"C1_nominal": C1, "C2_nominal": C2,
                          "c1_certified": c1, "c2_certified": c2},
            "ball_exact": torsion_ball_exact(d, tp, body.lengths[0]) if body.kind == "ball" else None,
            "exact_q2": (torsion2_ellipsoid_exact(body.lengths * d if body.kind == "ball"
                                                  else body.lengths)
                         if tp.q == 2 and body.smooth else None)}
    rows = [("inradius", ti.lo, ti.hi), ("power", tw.lo, tw.hi),
            ("saint_venant", None, data["saint_venant_upper"])]
    return data, (("quantity", "lo", "hi"), rows)


def _g_eval(cfg: RunConfig):
    body = parse_body(cfg.body_spec)
    gp = parse_params(cfg.param_spec, strict=not cfg.allow_negative_alpha)
    if body.dim != gp.d:
        raise UsageError(f"body has dimension {body.dim} but params have d={gp.d}")
    gi = g_interval(body, gp, cfg.quadrature, cfg.search)
    gb = g_ball_exact(gp)
    theorems, reasons = {}, {}
    for name, fn in (("sup_bound_rhs", sup_bound_rhs), ("maximiser_ratio_lower", maximiser_ratio_lower),
                     ("maximiser_ratio_lower_pd1", maximiser_ratio_lower_pd1),
                     ("inf_bound_rhs", inf_bound_rhs), ("minimiser_ratio_lower", minimiser_ratio_lower)):
        theorems[name], why = _try(fn, gp)
        if why is not None:
            reasons[name] = why
    data = {"body": format_body(body), "params": _params_dict(gp),
            "interval": {"lo": gi.lo, "hi": gi.hi, "method_lo": gi.method_lo,
                         "method_hi": gi.method_hi, "oracle_lo": gi.oracle_lo,
                         "oracle_hi": gi.oracle_hi},
            "g_ball_exact": gb, "exact": gb if body.kind == "ball" else g_oracle(body, gp),
            "theorems": theorems, "not_applicable": reasons}
    rows = [("lo", gi.lo), ("hi", gi.hi), ("g_ball_exact", gb), ("exact", data["exact"])]
    rows += [(k, v) for k, v in theorems.items()]
    return data, (("quantity", "value"), rows)


def _experiment(cfg: RunConfig):
    gp = parse_params(cfg.param_spec, strict=not cfg.allow_negative_alpha)
    if cfg.family not in SWEEPS:
        raise UsageError(f"experiment family must be one of {', '.join(SWEEPS)}")
    sw = SWEEPS[cfg.family](gp, cfg.eps_grid)
    aux_keys = sorted({k for row in sw.rows for k in row.aux})
    data = {"family": sw.family, "params": _params_dict(gp), "eps_grid": list(sw.eps_grid),
            "rows": [{"eps": r.eps, "g_lo": r.g_lo, "g_hi": r.g_hi, "label": r.label, "aux": r.aux}
                     for r in sw.rows],
            "fit": None if sw.fit is None else {"slope": sw.fit.slope, "intercept": sw.fit.intercept,
                                                "r_squared": sw.fit.r_squared},
            "expected_slope": sw.expected_slope}
    rows = [(r.eps, r.g_lo, r.g_hi, r.label, *(r.aux.get(k) for k in aux_keys)) for r in sw.rows]
    return data, (("eps", "g_lo", "g_hi", "label", *aux_keys), rows)


def _search(cfg: RunConfig):
    gp = parse_params(cfg.param_spec, strict=not cfg.allow_negative_alpha)
    search = SearchConfig(cfg.search.tol, cfg.search.max_iters, cfg.seed)
    fn = shape_search_max if cfg.mode == "max" else shape_search_min
    res = fn(gp, cfg.family, search)
    data = {"mode": cfg.mode, "family": cfg.family, "params": _params_dict(gp),
            "best_body": format_body(res.best_body), "value": res.value, "ratio": res.ratio,
            "interior": res.interior, "status": res.status, "ratio_bound": res.ratio_bound,
            "g_ball_exact": g_ball_exact(gp)}
    rows = [(k, v) for k, v in data.items() if k != "params"]
    return data, (("quantity", "value"), rows)


def _emit(text: str, cfg: RunConfig):
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _acceptance(cfg: RunConfig) -> int:
    results = acceptance.run_all()
    if cfg.output_format == "json":
        text = to_json({"schema_version": SCHEMA_VERSION, "command": "acceptance",
                        "criteria": [{"number": r.number, "name": r.name, "passed": r.passed,
                                      "detail": r.detail} for r in results]}) + "\n"
    else:
        text = "".join(acceptance.format_result(r) + "\n" for r in results)
    _emit(text, cfg)
    return 0 if all(r.passed for r in results) else 3


HANDLERS = {"cap-bounds": _cap_bounds, "torsion-bounds": _torsion_bounds, "g-eval": _g_eval,
            "experiment": _experiment, "search": _search}


def run(cfg: RunConfig) -> int:
    """Execute a configured command and return its exit code."""
    try:
        if cfg.command == "acceptance":
            return _acceptance(cfg)
        data, (header, rows) = HANDLERS[cfg.command](cfg)
    except UsageError as exc:
        print(f"capq: usage error: {exc}", file=sys.stderr)
        return 1
    except (HypothesisError, ParameterError) as exc:
        print(f"capq: usage error: {cfg.command}: {exc}", file=sys.stderr)
        return 1
    except (CapqError, ValueError, ArithmeticError) as exc:
        print(f"capq: numerical failure in {cfg.command}: {exc}", file=sys.stderr)
        return 2
    if cfg.output_format == "json":
        text = to_json({"schema_version": SCHEMA_VERSION, "command": cfg.command, **data}) + "\n"
    else:
        text = to_csv(header, rows)
    _emit(text, cfg)
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _eps_grid(text: str) -> tuple:
    return tuple(_number(item, pos) for item, pos in _split(text, 0))


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", "--out", dest="output_format", choices=("json", "csv"),
                        default="json", help="output format (default json)")
    common.add_argument("--output", dest="output_path", help="write to this file instead of stdout")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--rel-tol", type=float, default=QuadratureConfig.rel_tol)
    common.add_argument("--abs-tol", type=float, default=QuadratureConfig.abs_tol)
    common.add_argument("--max-subdivisions", type=int, default=QuadratureConfig.max_subdivisions)
    common.add_argument("--search-tol", type=float, default=SearchConfig.tol)
    common.add_argument("--max-iters", type=int, default=SearchConfig.max_iters)
    common.add_argument("--allow-negative-alpha", action="store_true",
                        help="accept parameters whose alpha comes out negative")

    parser = _Parser(prog="capq", description="Capacity, torsion and shape-functional bounds "
                     "for convex bodies.", epilog=CSV_HELP,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    body_help = "ball:d=<int>,r=<float> | ellipsoid:<a1>,...,<ad> | cuboid:<L1>,...,<Ld>"
    params_help = "d=<int>,p=<f>,q=<f>,r=<f>,beta=<f> (or alpha=<f>)"

    p = sub.add_parser("cap-bounds", parents=[common], help="p-capacity bounds for a body")
    p.add_argument("--body", dest="body_spec", required=True, help=body_help)
    p.add_argument("--p", type=float, required=True)

    p = sub.add_parser("torsion-bounds", parents=[common], help="q-torsion bounds for a body")
    p.add_argument("--body", dest="body_spec", required=True, help=body_help)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--r", type=float, default=1.0)

    p = sub.add_parser("g-eval", parents=[common], help="interval for G and theorem bounds")
    p.add_argument("--body", dest="body_spec", required=True, help=body_help)
    p.add_argument("--params", dest="param_spec", required=True, help=params_help)

    p = sub.add_parser("experiment", parents=[common], help="sweep a body family over eps")
    p.add_argument("--family", required=True, choices=tuple(SWEEPS))
    p.add_argument("--params", dest="param_spec", required=True, help=params_help)
    p.add_argument("--eps-grid", type=_eps_grid, default=DEFAULT_EPS_GRID,
                   help="comma-separated, strictly decreasing values in (0, 1)")

    p = sub.add_parser("search", parents=[common], help="shape search for extremisers of G")
    p.add_argument("--mode", choices=("max", "min"), default="max")
    p.add_argument("--family", choices=("ellipsoid_aspect", "cuboid_aspect"),
                   default="ellipsoid_aspect")
    p.add_argument("--params", dest="param_spec", required=True, help=params_help)

    sub.add_parser("acceptance", parents=[common], help="run the acceptance suite")
    return parser


def config_from_args(argv) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    quad = QuadratureConfig(ns.pop("rel_tol"), ns.pop("abs_tol"), ns.pop("max_subdivisions"))
    search = SearchConfig(ns.pop("search_tol"), ns.pop("max_iters"), ns["seed"])
    return RunConfig(quadrature=quad, search=search, **ns)


def main(argv=None) -> int:
    try:
        cfg = config_from_args(sys.argv[1:] if argv is None else argv)
    except ValueError as exc:  # includes UsageError
        print(f"capq: usage error: {exc}", file=sys.stderr)
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
