"""Command-line front end: one subcommand per computation.

Every run writes ``<subcommand>.json`` (and a CSV table where one exists)
into the output directory and echoes the JSON on stdout.  Artifacts embed
the effective configuration, contain no timestamps, and are written
atomically, so reruns with the same settings are byte-identical.

Settings come from, in increasing priority: built-in defaults, a
``key = value`` config file (``--config``), the BERSAUT_OUTPUT_DIR
environment variable (output directory only) and explicit flags.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import algebra, bergman, domains, limits, lipschitz, scaling
from ._io import csv_text, dumps, write_atomic
from .domains import AnnulusAutomorphism, BallAutomorphism, DiskAutomorphism
from .errors import BersautError, UnitObstruction, UsageError
from .series import TruncatedLaurent

ENV_OUTPUT = "BERSAUT_OUTPUT_DIR"

DEFAULTS = {
    "seed": 0,
    "output_dir": ".",
    "order": 64,
    "tail_window": 16,
    "degree": 16,
    "n_radial": 64,
    "n_angular": 160,
    "annulus_terms": 200,
    "tol": 1e-8,
    "cauchy_tol": 1e-3,
    "n_pairs": 4096,
    "grid_points": 200,
    "n_samples": 500,
    "terms": 40,
    "blowup_factor": 1e3,
}
_INT_KEYS = {"seed", "order", "tail_window", "degree", "n_radial", "n_angular", "annulus_terms",
             "n_pairs", "grid_points", "n_samples", "terms"}


@dataclass
class RunConfig:
    values: dict = field(default_factory=lambda: dict(DEFAULTS))

    def __getattr__(self, name):
        try:
            return self.__dict__["values"][name]
        except KeyError:
            raise AttributeError(name) from None

    def validate(self):
        for k, v in self.values.items():
            if k.endswith("tol") and not (isinstance(v, (int, float)) and v > 0):
                raise UsageError(f"tolerance {k} must be positive, got {v!r}")
            if k in _INT_KEYS and k != "seed" and (not isinstance(v, int) or v < 0):
                raise UsageError(f"{k} must be a nonnegative integer, got {v!r}")
        return self

    def to_json(self):
        return dict(sorted(self.values.items()))


def _coerce(key, text):
    if key in _INT_KEYS:
        try:
            return int(text)
        except ValueError:
            raise UsageError(f"{key} expects an integer, got {text!r}") from None
    if key in DEFAULTS and isinstance(DEFAULTS[key], float):
        try:
            return float(text)
        except ValueError:
            raise UsageError(f"{key} expects a number, got {text!r}") from None
    return text


def read_config(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for n, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"{path}:{n}: unknown key {key!r}")
        out[key] = _coerce(key, val)
    return out


# --------------------------------------------------------------------------
# Argument parsing helpers
# --------------------------------------------------------------------------
class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise UsageError(f"not a complex number: {text!r}") from None


def parse_point(text: str):
    parts = [parse_complex(p) for p in text.split(",")]
    return parts[0] if len(parts) == 1 else np.array(parts, complex)


def parse_floats(text: str):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma separated numbers, got {text!r}") from None


def _load_json(text: str):
    """Inline JSON, or a path to a JSON file."""
    if text.lstrip().startswith(("{", "[")):
        src = text
    else:
        try:
            with open(text, encoding="utf-8") as fh:
                src = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {text}: {exc}") from None
    try:
        return json.loads(src)
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid JSON in {text!r}: {exc}") from None


def make_domain(args) -> domains.ModelDomain:
    kind = args.domain
    params = {}
    if kind == "annulus":
        params["r"] = args.r
    elif kind == "ellipsoid":
        params["m"] = args.m
    return domains.domain_from_json({"kind": kind, "params": params})


def make_automorphism(spec, domain, rng):
    if spec is None or spec == "random":
        return domains.random_automorphism(domain, rng)
    aut = domains.automorphism_from_json(_load_json(spec))
    if aut.domain != domain:
        raise UsageError(f"automorphism is for {aut.domain.kind}, not {domain.kind}")
    return aut


SEQUENCES = ("drift", "converge", "harmonic", "alternating", "rotations", "flips")


def make_sequence(name, domain, n, a=0.5):
    """Named automorphism sequences phi_1 .. phi_n."""
    js = range(1, n + 1)
    kind = domain.kind
    if kind == "disk":
        table = {
            "drift": lambda j: DiskAutomorphism(1 - 2.0 ** -j),
            "converge": lambda j: DiskAutomorphism(a, 2.0 ** -j),
            "harmonic": lambda j: DiskAutomorphism(a, 1.0 / j),
            "alternating": lambda j: DiskAutomorphism(0, 0.5 * (j % 2)),
            "rotations": lambda j: DiskAutomorphism(0, float(j)),
        }
    elif kind == "annulus":
        r = domain.r
        table = {
            "converge": lambda j: AnnulusAutomorphism(r, 1 + 2.0 ** -j),
            "harmonic": lambda j: AnnulusAutomorphism(r, 1.0 / j),
            "alternating": lambda j: AnnulusAutomorphism(r, 0.5 * (j % 2)),
            "rotations": lambda j: AnnulusAutomorphism(r, float(j)),
            "flips": lambda j: AnnulusAutomorphism(r, float(j), bool(j % 2)),
        }
    elif kind == "ball":
        table = {
            "drift": lambda j: BallAutomorphism(np.array([1 - 2.0 ** -j, 0.0])),
            "converge": lambda j: BallAutomorphism(np.array([a, 0.0]),
                                                   np.diag([np.exp(1j * 2.0 ** -j), 1.0])),
            "alternating": lambda j: BallAutomorphism(np.zeros(2), np.diag([np.exp(0.5j * (j % 2)), 1.0])),
        }
    else:
        table = {}
    if name not in table:
        raise UsageError(f"sequence {name!r} is not available on the {kind}")
    return [table[name](j) for j in js]


def make_self_map(name, domain):
    if name == "identity":
        return lambda z: z
    if name == "square":
        if domain.dim != 1:
            raise UsageError("square is a planar map")
        return lambda z: z ** 2
    if name == "first":
        if domain.dim != 2:
            raise UsageError("first is a map of two variables")
        return lambda z: np.asarray(z)[..., 0]
    raise UsageError(f"unknown map {name!r}")


def make_kernel(args, cfg, domain):
    if args.mode == "closed":
        return bergman.ClosedFormKernel(domain, cfg.annulus_terms)
    quad = bergman.QuadratureSpec(cfg.n_radial, cfg.n_angular)
    max_orders = tuple(int(x) for x in parse_floats(args.max_orders)) if args.max_orders else None
    return bergman.build_numeric_kernel(domain, cfg.degree, quad, max_orders)


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------
def cmd_bers_recover(args, cfg):
    d = make_domain(args)
    rng = np.random.default_rng(cfg.seed)
    h = make_automorphism(args.aut, d, rng)
    grid = d.sample(rng, cfg.grid_points, boundary_bias=0.0)
    op = algebra.CompositionOperator(h.apply, d, d)
    rep = algebra.bers_recover(op, d, d, grid, tol=cfg.tol, inverse=h.inverse().apply,
                               descriptor=h.to_json())
    dev = float(np.max(np.abs(np.asarray(rep.h(grid)) - h.apply(grid))))
    return {"report": rep, "max_grid_deviation": dev}, None


def cmd_character(args, cfg):
    d = make_domain(args)
    c = parse_point(args.point)
    chi = algebra.evaluation_character(c)
    try:
        rep = algebra.character_locate(chi, d, tol=cfg.tol)
    except UnitObstruction as exc:
        return {"verdict": "unit_obstruction", "c": exc.c, "message": str(exc)}, None
    return {"verdict": "point_evaluation", "report": rep}, None


def cmd_classify_annulus(args, cfg):
    if args.series:
        s = TruncatedLaurent.from_json(_load_json(args.series))
    else:
        alpha = parse_complex(args.alpha)
        s = TruncatedLaurent({args.power: alpha})
    v = algebra.annulus_auto_classify(s, args.r, tol=cfg.tol, tail_window=cfg.tail_window)
    return {"verdict": "accept" if v.accepted else "reject", "evidence": v}, None


def cmd_lipschitz(args, cfg):
    d = make_domain(args)
    rng = np.random.default_rng(cfg.seed)
    h = make_automorphism(args.aut, d, rng)
    rep = algebra.lipschitz_hom_bound(h.apply, d, d, h_inverse=h.inverse().apply,
                                      n_pairs=cfg.n_pairs, seed=cfg.seed)
    return {"h": h, "report": rep}, None


def cmd_family(args, cfg):
    d = make_domain(args)
    auts = make_sequence(args.sequence, d, cfg.terms, args.a)
    ex = lipschitz.CompactExhaustion(d, seed=cfg.seed)
    sampler = lipschitz.PairSampler(d, cfg.n_pairs, cfg.seed)
    rep = lipschitz.family_classify(make_self_map(args.f, d), auts, ex, cfg.blowup_factor, sampler)
    return {"report": rep}, rep.evidence_csv()


def cmd_kernel(args, cfg):
    d = make_domain(args)
    k = make_kernel(args, cfg, d)
    z = parse_point(args.z)
    zeta = parse_point(args.zeta if args.zeta is not None else args.z)
    val = complex(k(z, zeta))
    out = {"kernel": k.to_json() if args.mode == "closed" else {"mode": "numeric", "degree": k.degree},
           "z": z, "zeta": zeta, "value": val}
    if args.mode == "closed" and d.kind == "annulus":
        out["tail_bound"] = float(k.tail_bound(z, zeta))
    if args.mode == "numeric":
        out["condition_number"] = k.condition_number
    return out, None


def cmd_curvature(args, cfg):
    d = make_domain(args)
    k = make_kernel(args, cfg, d)
    z = parse_point(args.z)
    v = parse_point(args.v) if args.v else None
    c = bergman.holo_curvature(k, z, v)
    return {"z": z, "v": v, "curvature": c.value, "error_estimate": c.error, "radius": c.radius}, None


def cmd_transform_law(args, cfg):
    d = make_domain(args)
    k = make_kernel(args, cfg, d)
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for i in range(args.n_auts):
        F = make_automorphism(args.aut, d, rng)
        Z = d.sample(rng, args.pairs, clearance=args.clearance, boundary_bias=0.0)
        W = d.sample(rng, args.pairs, clearance=args.clearance, boundary_bias=0.0)
        rows.append([i, bergman.transformation_residual(k, F, Z, W), json.dumps(F.to_json(), sort_keys=True)])
    worst = max(r[1] for r in rows)
    return {"max_residual": worst, "n_automorphisms": len(rows), "pairs_each": args.pairs,
            "clearance": args.clearance}, \
        csv_text(["index", "residual", "automorphism"], [[r[0], r[1], dumps(r[2]).strip()] for r in rows])


def cmd_blowup(args, cfg):
    d = make_domain(args)
    k = make_kernel(args, cfg, d)
    fit = bergman.blowup_exponent(k, parse_point(args.X), parse_floats(args.deltas))
    rows = [[dl, v] for dl, v in zip(fit.deltas, fit.values)]
    return {"fit": fit}, csv_text(["delta", "K_diag"], rows)


def cmd_klembeck(args, cfg):
    d = make_domain(args)
    k = make_kernel(args, cfg, d)
    v = parse_point(args.v) if args.v else None
    prof = bergman.klembeck_profile(k, parse_point(args.X), parse_floats(args.deltas), v)
    return {"profile": prof}, prof.to_csv()


def cmd_scale(args, cfg):
    d = make_domain(args)
    rep = scaling.scale_sequence(d, parse_point(args.X), parse_floats(args.deltas), cfg.n_samples, cfg.seed)
    return {"report": rep}, rep.to_csv()


def cmd_cayley(args, cfg):
    p = parse_point(args.point)
    if np.ndim(p) != 1 or len(p) != 2:
        raise UsageError("cayley needs a point with two coordinates")
    img = scaling.cayley_inverse(p) if args.inverse else scaling.cayley(p)
    back = scaling.cayley(img) if args.inverse else scaling.cayley_inverse(img)
    return {"point": p, "image": img, "inverse": bool(args.inverse),
            "round_trip_error": float(np.max(np.abs(back - p)))}, None


def cmd_limit(args, cfg):
    d = make_domain(args)
    auts = make_sequence(args.sequence, d, cfg.terms, args.a)
    ex = lipschitz.CompactExhaustion(d, seed=cfg.seed)
    rep = limits.normal_limit_classify(auts, ex, tol=cfg.tol, cauchy_tol=cfg.cauchy_tol)
    return {"report": rep}, None


def cmd_prop52(args, cfg):
    d = make_domain(args)
    auts = make_sequence(args.sequence, d, cfg.terms, args.a)
    ex = lipschitz.CompactExhaustion(d, seed=cfg.seed)
    if args.f_aut:
        F = domains.automorphism_from_json(_load_json(args.f_aut))
        f = F.apply
    else:
        f = make_self_map(args.f, d)
    rep = limits.prop52_check(f, auts, ex, tol=cfg.tol, cauchy_tol=cfg.cauchy_tol)
    return {"report": rep}, None


COMMANDS = {
    "bers-recover": cmd_bers_recover, "character": cmd_character, "classify-annulus": cmd_classify_annulus,
    "lipschitz": cmd_lipschitz, "family": cmd_family, "kernel": cmd_kernel, "curvature": cmd_curvature,
    "transform-law": cmd_transform_law, "blowup": cmd_blowup, "klembeck": cmd_klembeck, "scale": cmd_scale,
    "cayley": cmd_cayley, "limit": cmd_limit, "prop52": cmd_prop52,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config")
    common.add_argument("--seed", type=int)
    common.add_argument("--output-dir")
    common.add_argument("--tol", type=float)
    for key in ("order", "degree", "n_radial", "n_angular", "annulus_terms", "n_pairs", "grid_points",
                "n_samples", "terms", "tail_window"):
        common.add_argument("--" + key.replace("_", "-"), dest=key, type=int)
    common.add_argument("--cauchy-tol", type=float)
    common.add_argument("--blowup-factor", type=float)

    def dom(p, choices=tuple(domains.DOMAIN_KINDS), default="disk"):
        p.add_argument("--domain", choices=choices, default=default)
        p.add_argument("--r", type=float, default=0.5, help="annulus inner radius")
        p.add_argument("--m", type=int, default=2, help="ellipsoid exponent")

    def kern(p):
        p.add_argument("--mode", choices=("closed", "numeric"), default="closed")
        p.add_argument("--max-orders", help="box index set 'A,B' for numeric kernels")

    parser = _Parser(prog="bersaut", description="Automorphisms, composition operators and Bergman geometry "
                                                 "of model domains.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bers-recover", parents=[common])
    dom(p)
    p.add_argument("--aut", help="automorphism JSON (inline or file); default: random")
    p = sub.add_parser("character", parents=[common])
    dom(p)
    p.add_argument("--point", required=True, help="c for the evaluation character f -> f(c)")
    p = sub.add_parser("classify-annulus", parents=[common])
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--series", help="Laurent series JSON of phi(id)")
    p.add_argument("--alpha", default="1", help="coefficient when no series file is given")
    p.add_argument("--power", type=int, default=1)
    p = sub.add_parser("lipschitz", parents=[common])
    dom(p)
    p.add_argument("--aut")
    for name in ("family", "limit", "prop52"):
        p = sub.add_parser(name, parents=[common])
        dom(p)
        p.add_argument("--sequence", choices=SEQUENCES, required=True)
        p.add_argument("--a", type=float, default=0.5, help="fixed Moebius parameter of the sequence")
        if name != "limit":
            p.add_argument("--f", default="identity", choices=("identity", "square", "first"))
        if name == "prop52":
            p.add_argument("--f-aut", help="use this automorphism as f")
    for name in ("kernel", "curvature", "transform-law", "blowup", "klembeck"):
        p = sub.add_parser(name, parents=[common])
        dom(p)
        kern(p)
        if name in ("kernel", "curvature"):
            p.add_argument("--z", required=True)
        if name == "kernel":
            p.add_argument("--zeta")
        if name in ("curvature", "klembeck"):
            p.add_argument("--v", help="direction; default all ones")
        if name in ("blowup", "klembeck"):
            p.add_argument("--X", required=True, help="boundary point")
            p.add_argument("--deltas", default="0.1,0.01,0.001,0.0001")
        if name == "transform-law":
            p.add_argument("--aut", help="fixed automorphism JSON; default: random per trial")
            p.add_argument("--n-auts", type=int, default=5)
            p.add_argument("--pairs", type=int, default=100, help="random point pairs per automorphism")
            p.add_argument("--clearance", type=float, default=0.1,
                           help="minimum boundary distance of the sampled points")
    p = sub.add_parser("scale", parents=[common])
    dom(p, choices=("ball", "ellipsoid", "siegel", "bidisc"), default="ball")
    p.add_argument("--X", default="1,0")
    p.add_argument("--deltas", default="0.1,0.01,0.001,0.0001")
    p = sub.add_parser("cayley", parents=[common])
    p.add_argument("--point", required=True)
    p.add_argument("--inverse", action="store_true", help="map a Siegel point back to the ball")
    return parser


def effective_config(args, environ=os.environ) -> RunConfig:
    values = dict(DEFAULTS)
    if args.config:
        values.update(read_config(args.config))
    if environ.get(ENV_OUTPUT):
        values["output_dir"] = environ[ENV_OUTPUT]
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return RunConfig(values).validate()


def _error_json(exc) -> str:
    return dumps({"error": type(exc).__name__, "message": str(exc)})


def run(argv=None, environ=os.environ, stdout=None) -> int:
    """Execute one command; returns the exit status."""
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        cfg = effective_config(args, environ)
        result, table = COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        stdout.write(_error_json(exc))
        return 2
    except (BersautError, ArithmeticError, np.linalg.LinAlgError, AssertionError) as exc:
        stdout.write(_error_json(exc))
        return 1
    result = {"command": args.command, "config": cfg, "result": result}
    text = dumps(result)
    base = os.path.join(cfg.output_dir, args.command)
    try:
        write_atomic(base + ".json", text)
        if table is not None:
            write_atomic(base + ".csv", table)
    except OSError as exc:
        stdout.write(_error_json(exc))
        return 1
    stdout.write(text)
    return 0


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
