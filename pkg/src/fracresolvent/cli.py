"""Batch driver.

``fracresolvent --config run.json --out results/`` runs one scenario and
writes ``report.json`` (plus CSV trajectories where the scenario produces
them). Exit codes: 0 all checks pass, 1 a check failed, 2 bad config,
3 numerical error.

Config layout::

    {"command": "verify" | "subordinate" | "solve" | "demo",
     "scenario": {"name": ..., <scenario parameters>},
     "seed": 0}
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import kernels, laplace, mlo, multiplier, resolvent
from .errors import ConfigError, FracResolventError, VerificationError
from .specfun import mittag_leffler

SCHEMA_VERSION = 1

_NUMBER_OR_PAIR = {"oneOf": [{"type": "number"}, {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}]}
_MATRIX = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _NUMBER_OR_PAIR}}
_KERNEL = {
    "oneOf": [
        {"type": "object", "properties": {"power": {"type": "number", "exclusiveMinimum": 0}},
         "required": ["power"], "additionalProperties": False},
        {"type": "object", "properties": {"rational": {
            "type": "object",
            "properties": {"num": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                           "den": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                           "q": {"type": "integer", "minimum": 1}},
            "required": ["num", "den"], "additionalProperties": False}},
         "required": ["rational"], "additionalProperties": False},
    ]
}
_OPERATOR = {
    "oneOf": [
        {"type": "object", "properties": {"matrix": _MATRIX}, "required": ["matrix"], "additionalProperties": False},
        {"type": "object", "properties": {"pencil": {
            "type": "object", "properties": {"B": _MATRIX, "L": _MATRIX},
            "required": ["B", "L"], "additionalProperties": False}},
         "required": ["pencil"], "additionalProperties": False},
    ]
}
_GRID = {"type": "object", "properties": {"start": {"type": "number", "exclusiveMinimum": 0},
                                          "stop": {"type": "number", "exclusiveMinimum": 0},
                                          "points": {"type": "integer", "minimum": 3, "maximum": 20000}},
         "required": ["start", "stop", "points"], "additionalProperties": False}
_TOLS = {"type": "object", "additionalProperties": {"type": "number", "exclusiveMinimum": 0}}


def _scenario(name, props, required=()):
    props = {"name": {"const": name}, "tolerances": _TOLS, **props}
    return {"type": "object", "properties": props, "required": ["name", *required], "additionalProperties": False}


SCENARIOS = {
    "verify": [
        _scenario("prop_lav_random", {"count": {"type": "integer", "minimum": 1, "maximum": 10000},
                                      "dim": {"type": "integer", "minimum": 1, "maximum": 64}}),
        _scenario("closure_identity_random", {"count": {"type": "integer", "minimum": 1, "maximum": 10000},
                                              "dim": {"type": "integer", "minimum": 1, "maximum": 64}}),
        _scenario("transform_identities", {}),
    ],
    "subordinate": [
        _scenario("bessel_scalar", {"generator": {"type": "number"}, "beta": {"type": "number", "minimum": 0},
                                    "gamma": {"type": "number"}, "grid": _GRID}),
        _scenario("wright_scalar", {"generator": {"type": "number"}, "beta": {"type": "number", "minimum": 0},
                                    "sigma": {"type": "number", "exclusiveMinimum": -1, "exclusiveMaximum": 0},
                                    "eta": {"type": "number"}, "grid": _GRID}),
        _scenario("family", {"operator": _OPERATOR, "regularizer": _MATRIX, "kernel_a": _KERNEL, "kernel_k": _KERNEL,
                             "grid": _GRID}, required=("operator", "kernel_a", "kernel_k")),
    ],
    "solve": [
        _scenario("reversed_heat", {"mode": {"type": "integer", "minimum": 1, "maximum": 64},
                                    "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 2},
                                    "size": {"type": "integer", "minimum": 8, "maximum": 4096},
                                    "times": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1}}),
    ],
    "demo": [
        _scenario("poisson_wave", {"density": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 2},
                                   "sigma": {"type": "number", "exclusiveMinimum": -1, "exclusiveMaximum": 0},
                                   "r": {"type": "number", "exclusiveMinimum": 0}, "eta": {"type": "number"},
                                   "u1": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                                   "v1": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                                   "grid": _GRID},
                  required=("u1", "v1")),
        _scenario("contour_scalar", {"generator": {"type": "number"},
                                     "alpha": {"type": "number", "minimum": 1, "exclusiveMaximum": 2},
                                     "z": {"type": "number", "exclusiveMinimum": 0}}),
    ],
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "command": {"enum": list(SCENARIOS)},
        "scenario": {"type": "object", "properties": {"name": {"type": "string"}}, "required": ["name"]},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "output_path": {"type": "string"},
    },
    "required": ["command", "scenario"],
    "additionalProperties": False,
}


# config {{{

def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    validate_config(cfg)
    return cfg


def validate_config(cfg) -> None:
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
        options = SCENARIOS[cfg["command"]]
        name = cfg["scenario"]["name"]
        match = [s for s in options if s["properties"]["name"]["const"] == name]
        if not match:
            known = ", ".join(s["properties"]["name"]["const"] for s in options)
            raise ConfigError(f"unknown {cfg['command']} scenario {name!r} (known: {known})")
        jsonschema.validate(cfg["scenario"], match[0])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {where}: {exc.message}") from exc


def _complex(v) -> complex:
    return complex(v[0], v[1]) if isinstance(v, list) else complex(v)


def _matrix(rows) -> np.ndarray:
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise ConfigError("matrix rows have different lengths")
    return np.array([[_complex(v) for v in r] for r in rows])


def parse_kernel(lit) -> kernels.Kernel:
    if "power" in lit:
        return kernels.make_power(lit["power"])
    rat = lit["rational"]
    return kernels.make_rational(rat["num"], rat["den"], rat.get("q", 1))


def parse_operator(lit) -> mlo.MloGraph:
    if "matrix" in lit:
        A = _matrix(lit["matrix"])
        if A.shape[0] != A.shape[1]:
            raise ConfigError("operator matrix must be square")
        return mlo.from_matrix(A)
    B, L = _matrix(lit["pencil"]["B"]), _matrix(lit["pencil"]["L"])
    if B.shape != L.shape or B.shape[0] != B.shape[1]:
        raise ConfigError("pencil matrices must be square and of equal size")
    return mlo.from_pencil(B, L)


def _grid(sc) -> np.ndarray:
    g = sc.get("grid")
    if g is None:
        return resolvent.DEFAULT_GRID
    if g["stop"] <= g["start"]:
        raise ConfigError("grid stop must exceed start")
    return np.geomspace(g["start"], g["stop"], g["points"])

# }}}


class Report:
    def __init__(self, tol_scale: float, overrides: dict | None = None):
        self.tol_scale = tol_scale
        self.overrides = overrides or {}
        self.checks = []

    def check(self, name: str, residual: float, tolerance: float, key: str | None = None) -> None:
        tol = self.overrides.get(key or name, tolerance) * self.tol_scale
        residual = float(residual)
        ok = bool(math.isfinite(residual) and residual <= tol)
        self.checks.append({"name": name, "residual": residual, "tolerance": tol, "pass": ok})

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks)


# scenarios {{{

def _random_pencil(rng, n: int, singular: bool):
    B = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    L = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if singular and n > 1:
        u, s, vh = np.linalg.svd(B)
        s[-max(1, n // 3):] = 0
        B = (u * s) @ vh
    return B, L


def _verify(sc, rng, rep: Report, files: dict) -> None:
    name = sc["name"]
    count = sc.get("count", 100)
    n = sc.get("dim", 4)
    if name == "prop_lav_random":
        for i in range(count):
            B, L = _random_pencil(rng, n, singular=i % 2 == 1)
            G = mlo.from_pencil(B, L)
            lam = complex(rng.uniform(0.5, 3.0), rng.uniform(-1.0, 1.0))
            C = np.eye(n) if i % 3 else rng.standard_normal((n, n))
            rep.check(f"prop_lav[{i}]", mlo.prop_lav_check(G, C, lam, relative=True), 1e-10, key="prop_lav")
    elif name == "closure_identity_random":
        for i in range(count):
            A, B = _random_pencil(rng, n, singular=i % 2 == 1)
            if i % 4 == 3:
                A = A @ np.diag(np.r_[np.ones(n - 1), 0.0])
            rep.check(f"closure_identity[{i}]", 0.0 if mlo.closure_identity_check(A, B) else 1.0, 0.5,
                      key="closure_identity")
    else:
        worst = 0.0
        for beta in (0.0, 0.5, 1.5):
            for lam in (0.5, 1.0, 2.0 + 1.0j):
                for t in (0.1, 1.0, 5.0):
                    worst = max(worst, laplace.verify_bessel_identity(beta, lam, t))
        rep.check("bessel_identity", worst, 1e-6)
        worst = 0.0
        for rho in (0.25, 0.5, 0.75):
            for v in (0.5, 1.0, 2.0):
                for s in (0.1, 1.0):
                    for lam in (1.0, 2.0 + 1.0j):
                        worst = max(worst, laplace.verify_wright_identity(rho, v, s, lam))
        rep.check("wright_identity", worst, 1e-6)


def _subordinate(sc, rng, rep: Report, files: dict) -> None:
    name = sc["name"]
    grid = _grid(sc)
    if name == "family":
        G = parse_operator(sc["operator"])
        C = _matrix(sc["regularizer"]) if "regularizer" in sc else None
        fam = resolvent.construct_family(G, C, parse_kernel(sc["kernel_a"]), parse_kernel(sc["kernel_k"]), grid=grid)
        rep.check("uniqueness", resolvent.verify_uniqueness_eq(fam, G), 1e-3)
        rep.check("existence", resolvent.verify_existence_eq(fam, G), 1e-3)
        files["family.csv"] = fam
        return
    a = sc.get("generator", -1.0)
    if a == 0:
        raise ConfigError("the scalar generator must be nonzero")
    beta = sc.get("beta", 0.0)
    G = mlo.from_matrix([[a]])
    S = resolvent.construct_family(G, None, kernels.make_power(1.0), kernels.make_power(beta + 1.0), grid=grid)
    nu = 1.0 / a
    if name == "bessel_scalar":
        gamma = sc.get("gamma", beta + 1.0)
        out = resolvent.bessel_subordinate(S, beta, gamma)
        ref = grid**gamma * mittag_leffler(1.0, 1.0 + gamma, nu * grid)
        rep.check("sup_error", np.max(np.abs(out.scalar() - ref)), 1e-5)
        rep.check("uniqueness", resolvent.verify_uniqueness_eq(out, mlo.inverse(G)), 5e-4)
    else:
        sigma = sc.get("sigma", -0.5)
        eta = sc.get("eta", beta + 1.5)
        rho = -sigma
        order = rho * (eta - beta - 1)
        out = resolvent.wright_subordinate(S, sigma, eta, beta, beta, beta)
        ref = grid**order * mittag_leffler(rho, 1.0 + order, nu * grid**rho)
        rep.check("sup_error", np.max(np.abs(out.scalar() - ref)), 1e-4)
        est = resolvent.growth_estimate(out, out.growth.weight)
        rep.check("growth_finite", 0.0 if math.isfinite(est) else math.inf, 0.5)
    files["family.csv"] = out


def _solve(sc, rng, rep: Report, files: dict) -> None:
    k = sc.get("mode", 1)
    alpha = sc.get("alpha", 1.0)
    size = sc.get("size", 64)
    if size & (size - 1):
        raise ConfigError("grid size must be a power of two")
    if 2 * k >= size:
        raise ConfigError("mode is not resolved by the grid")
    times = np.asarray(sc.get("times", [0.5, 1.0, 2.0]), dtype=float)
    grid = multiplier.TorusGrid((size,), (2 * math.pi,))
    x = grid.x[0]
    one = multiplier.PolySymbol.univariate([1.0])
    square = multiplier.PolySymbol.univariate([0.0, 0.0, 1.0])
    prob = multiplier.DfpProblem(multiplier.PolySymbol.minus_abs_squared(1), one, square, -1.0 + 0j, 0.0, alpha, grid,
                                 "reversed", phi=np.sin(k * x), psi=np.zeros(size) if alpha > 1 else None)
    u = multiplier.solve_dfp(prob, times)
    amp = mittag_leffler(alpha, 1.0, -(times**alpha) / k**2)
    rep.check("amplitude", np.max(np.abs(u - amp[:, None] * np.sin(k * x)[None])), 1e-6)
    rep.check("residual", multiplier.dfp_residual(prob, float(times.max()) or 1.0, 2000), 1e-3)
    files["solution.csv"] = (times, u)


def _demo(sc, rng, rep: Report, files: dict) -> None:
    if sc["name"] == "contour_scalar":
        a = sc.get("generator", -1.0)
        alpha = sc.get("alpha", 1.0)
        z = sc.get("z", 1.0)
        G = mlo.from_matrix([[a]])
        ref = mittag_leffler(alpha, 1.0, z**alpha / a)
        vals = [resolvent.contour_family(G, None, alpha, math.pi / 12, w, z)[0, 0] for w in (0.5, 0.1, 0.02)]
        rep.check("residue_oracle", abs(vals[-1] - ref), 1e-6)
        rep.check("cauchy", max(abs(vals[1] - vals[0]), abs(vals[2] - vals[1])), 1e-6)
        return
    u1 = np.asarray(sc["u1"], dtype=float)
    v1 = np.asarray(sc["v1"], dtype=float)
    density = np.asarray(sc.get("density", [1.0] * max(64, 2 * u1.size)), dtype=float)
    res = multiplier.poisson_wave_demo(density, sc.get("sigma", -0.5), sc.get("r", 0.5), sc.get("eta", 2.0), u1, v1,
                                       times=_grid(sc))
    for lam, norm in res.resolvent_norms.items():
        rep.check(f"resolvent_bound[{lam}]", max(0.0, norm - 1 / lam), 1e-8, key="resolvent_bound")
    rep.check("system_residual", res.residual, 1e-2)
    files["trajectory.csv"] = res


_RUNNERS = {"verify": _verify, "subordinate": _subordinate, "solve": _solve, "demo": _demo}

# }}}


def _write_outputs(out_dir: Path, report: dict, files: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for fname, obj in files.items():
        target = out_dir / fname
        if isinstance(obj, resolvent.OperatorFamily):
            resolvent.family_to_csv(obj, target)
        elif isinstance(obj, multiplier.PoissonWaveResult):
            _write_rows(target, ["t"] + [f"u_{j}" for j in range(obj.u.shape[1])] + [f"v_{j}" for j in range(obj.v.shape[1])],
                        obj.times, np.hstack([obj.u.real, obj.v.real]))
        else:
            times, u = obj
            header = ["t"]
            for i in range(u.shape[1]):
                header += [f"re_{i}", f"im_{i}"]
            inter = np.empty((u.shape[0], 2 * u.shape[1]))
            inter[:, 0::2], inter[:, 1::2] = u.real, u.imag
            _write_rows(target, header, times, inter)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    (out_dir / "report.json").write_text(text)


def _write_rows(path: Path, header, times, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for t, row in zip(times, rows):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in row])


def run(cfg: dict, out_dir, seed: int | None = None, tol_scale: float = 1.0) -> int:
    """Run a validated config; returns the exit code. Files are written
    only when the run completes."""
    validate_config(cfg)
    if not (tol_scale > 0 and math.isfinite(tol_scale)):
        raise ConfigError("tol-scale must be a positive number")
    seed = cfg.get("seed", 0) if seed is None else seed
    sc = cfg["scenario"]
    rep = Report(tol_scale, sc.get("tolerances"))
    files: dict = {}
    rng = np.random.default_rng(seed)
    _RUNNERS[cfg["command"]](sc, rng, rep, files)
    report = {"schema": SCHEMA_VERSION, "command": cfg["command"], "scenario": sc["name"], "seed": seed,
              "tol_scale": tol_scale, "passed": rep.passed, "checks": rep.checks}
    _write_outputs(Path(out_dir), report, files)
    return 0 if rep.passed else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="fracresolvent", description="Run a resolvent-family scenario.")
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="random seed (overrides the config)")
    parser.add_argument("--tol-scale", type=float, default=1.0, help="multiplier for every tolerance")
    args = parser.parse_args(argv)
    try:
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        cfg = load_config(args.config)
        if "output_path" in cfg and args.out == ".":
            args.out = cfg["output_path"]
        code = run(cfg, args.out, args.seed, args.tol_scale)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 1
    except FracResolventError as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    status = "PASS" if code == 0 else "FAIL"
    print(f"{status}: report written to {Path(args.out) / 'report.json'}")
    return code


if __name__ == "__main__":
    sys.exit(main())
