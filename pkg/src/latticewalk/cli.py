"""Command-line front end.

Every subcommand writes a table either as CSV (``#`` comment header holding
the effective configuration, then a column row, then data at 17 significant
digits) or as a JSON summary that can be fed back through ``--config``.

Configuration is layered: built-in defaults, then ``--config FILE`` (flat
``key = value`` text or a JSON summary), then command-line flags.

Exit status: 0 success, 1 usage/input error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import __version__, continuum, dynamics, limiting, spectral
from .lattice import BoundaryCondition, LatticeError, LatticeSpec, build_hamiltonian, parse_config

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2

COMMANDS = (
    "spectrum", "hamiltonian", "evolve", "return-prob", "limiting", "marginal",
    "scan-asymmetry", "continuum-compare",
)


class UsageError(Exception):
    pass


def _node(value) -> tuple[int, int]:
    if isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        parts = str(value).replace("(", "").replace(")", "").split(",")
    if len(parts) != 2:
        raise UsageError(f"expected a node 'jx,jy', got {value!r}")
    return int(parts[0]), int(parts[1])


def _floats(value) -> list[float]:
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    return [float(v) for v in str(value).split(",") if v.strip()]


def _range(value) -> tuple[int, int]:
    if isinstance(value, (list, tuple)):
        lo, hi = value
    else:
        lo, _, hi = str(value).partition(":")
    lo, hi = int(lo), int(hi)
    if lo > hi:
        raise UsageError(f"empty range {lo}:{hi}")
    return lo, hi


def _bool(value) -> bool:
    if isinstance(value, bool):
        return value
    return str(value).strip().lower() in {"1", "true", "yes", "on"}


def _opt_int(value):
    return None if value is None or value == "" or value == "None" else int(value)


def _bc(value) -> str:
    return BoundaryCondition.parse(value).value


# key -> converter; these are the only keys a config may carry
CONVERTERS: dict[str, Callable[[Any], Any]] = {
    "command": str,
    "M": int, "N": int, "bc_x": _bc, "bc_y": _bc, "gamma": float, "tol": float,
    "source": _node, "format": str,
    "t_min": float, "t_max": float, "per_decade": int, "times": _floats,
    "method": str, "axis": str,
    "topology": str, "square": _bool, "fix_M": _opt_int, "fix_N": _opt_int, "range": _range,
    "mirror": str, "threshold": float, "workers": int,
    "size": int, "radius": int,
}

LATTICE_DEFAULTS = {"bc_x": "open", "bc_y": "open", "gamma": 1.0, "tol": spectral.DEFAULT_TOL, "format": "csv"}

DEFAULTS: dict[str, dict[str, Any]] = {
    "spectrum": {},
    "hamiltonian": {},
    "evolve": {"source": (1, 1), "times": [0.0, 0.5, 1.0, 2.0, 5.0]},
    "return-prob": {"t_min": 1e-2, "t_max": 1e2, "per_decade": 300},
    "limiting": {"source": (1, 1), "method": limiting.EIGENCLASS},
    "marginal": {"source": (1, 1), "method": limiting.EIGENCLASS, "axis": "x"},
    "scan-asymmetry": {
        "topology": "open", "square": False, "fix_M": None, "fix_N": None, "range": (4, 36),
        "mirror": "auto", "threshold": limiting.ASYMMETRY_THRESHOLD, "workers": 0,
        "gamma": 1.0, "tol": spectral.DEFAULT_TOL, "format": "csv",
    },
    "continuum-compare": {"size": 101, "times": [5.0], "radius": 20, "format": "csv"},
}
NEEDS_LATTICE = {"spectrum", "hamiltonian", "evolve", "return-prob", "limiting", "marginal"}
METHODS = (limiting.EIGENCLASS, limiting.FACTORIZED, limiting.TIME_AVERAGE)
TOPOLOGIES = {"open": ("open", "open"), "rectangle": ("open", "open"), "cylinder": ("periodic", "open"),
              "periodic": ("periodic", "periodic"), "torus": ("periodic", "periodic")}


@dataclass
class RunConfig:
    command: str
    values: dict[str, Any] = field(default_factory=dict)
    out: str = "-"

    def __getitem__(self, key):
        return self.values[key]

    @property
    def spec(self) -> LatticeSpec:
        v = self.values
        return LatticeSpec(v["M"], v["N"], v["bc_x"], v["bc_y"], v["gamma"])

    def as_dict(self) -> dict[str, Any]:
        out = {"command": self.command}
        for key in sorted(self.values):
            value = self.values[key]
            out[key] = list(value) if isinstance(value, tuple) else value
        return out


def load_config_file(path: str) -> dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc.strerror}") from None
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {path!r} is not valid JSON: {exc}") from None
        return dict(data.get("config", data))
    return parse_config(text)


def resolve(command: str | None, file_values: dict[str, Any], flag_values: dict[str, Any], out: str) -> RunConfig:
    merged = {**file_values, **{k: v for k, v in flag_values.items() if v is not None}}
    command = command or merged.get("command")
    if command not in COMMANDS:
        raise UsageError(f"no valid subcommand given (choose from {', '.join(COMMANDS)})")
    merged.pop("command", None)
    unknown = sorted(set(merged) - set(CONVERTERS))
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    values = dict(DEFAULTS[command])
    if command in NEEDS_LATTICE:
        values = {**LATTICE_DEFAULTS, **values}
    allowed = set(values) | ({"M", "N"} if command in NEEDS_LATTICE else set())
    for key, raw in merged.items():
        if key not in allowed:
            # foreign keys (e.g. from another command's config file) are ignored
            continue
        try:
            values[key] = CONVERTERS[key](raw)
        except (TypeError, ValueError, LatticeError) as exc:
            raise UsageError(f"bad value for {key!r}: {raw!r} ({exc})") from None
    config = RunConfig(command, values, out)
    validate(config)
    return config


def validate(config: RunConfig) -> None:
    v = config.values
    if config.command in NEEDS_LATTICE:
        if "M" not in v or "N" not in v:
            raise UsageError("lattice extents M and N are required")
        spec = config.spec
        if "source" in v:
            spec.node(*v["source"])
    for key in ("gamma", "tol", "t_min", "t_max", "per_decade", "threshold", "size", "radius"):
        if key in v and not v[key] > 0:
            raise UsageError(f"{key} must be positive")
    if "times" in v and any(t < 0 for t in v["times"]):
        raise UsageError("times must be >= 0")
    if v.get("format", "csv") not in ("csv", "json"):
        raise UsageError("format must be csv or json")
    if "method" in v and v["method"] not in METHODS:
        raise UsageError(f"method must be one of {', '.join(METHODS)}")
    if "axis" in v and v["axis"] not in ("x", "y"):
        raise UsageError("axis must be x or y")
    if config.command == "return-prob" and v["t_min"] >= v["t_max"]:
        raise UsageError("t_min must be below t_max")
    if config.command == "scan-asymmetry":
        if v["topology"] not in TOPOLOGIES:
            raise UsageError(f"topology must be one of {', '.join(TOPOLOGIES)}")
        if sum([v["square"], v["fix_M"] is not None, v["fix_N"] is not None]) != 1:
            raise UsageError("choose exactly one of --square, --fix-M, --fix-N")
        if v["mirror"] not in ("auto",) + limiting.MIRRORS:
            raise UsageError(f"mirror must be auto or one of {', '.join(limiting.MIRRORS)}")
        if v["workers"] < 0:
            raise UsageError("workers must be >= 0")


# --------------------------------------------------------------------------
# computations: each returns (columns, rows, extra summary fields)


def _limiting(config: RunConfig) -> limiting.LimitingDistribution:
    method = config["method"]
    spec, tol, source = config.spec, config["tol"], config["source"]
    if method == limiting.FACTORIZED:
        return limiting.limiting_distribution_factorized(spec, source, tol)
    basis = spectral.build_basis(spec, tol)
    if method == limiting.TIME_AVERAGE:
        return limiting.time_averaged_distribution(basis, source)
    return limiting.limiting_distribution(basis, source)


def run_spectrum(config: RunConfig):
    basis = spectral.build_basis(config.spec, config["tol"])
    cols = ("index", "m_x", "m_y", "theta_x", "theta_y", "lambda", "class_id")
    return cols, spectral.spectrum_table(basis), {"classes": len(basis.classes)}


def run_hamiltonian(config: RunConfig):
    H = build_hamiltonian(config.spec)
    cols = tuple(f"h{i}" for i in range(H.shape[0]))
    return cols, [tuple(float(x) for x in row) for row in H], {}


def run_evolve(config: RunConfig):
    basis = spectral.build_basis(config.spec, config["tol"])
    spec, source = config.spec, config["source"]
    rows = []
    for t in config["times"]:
        pc = dynamics.classical_probabilities(basis, source, t)
        pq = dynamics.quantum_probabilities(basis, source, t)
        for flat in range(spec.size):
            k = spec.unflat(flat)
            rows.append((t, k.jx, k.jy, float(pc[flat]), float(pq[flat])))
    return ("t", "k_x", "k_y", "p_classical", "pi_quantum"), rows, {}


def run_return_prob(config: RunConfig):
    basis = spectral.build_basis(config.spec, config["tol"])
    times = dynamics.log_time_grid(config["t_min"], config["t_max"], config["per_decade"])
    curve = dynamics.return_curve(basis, times)
    rows = [tuple(float(x) for x in row) for row in curve.rows()]
    return ("t", "p_classical", "pi_quantum", "mu"), rows, {}


def run_limiting(config: RunConfig):
    dist = _limiting(config)
    spec = config.spec
    rows = [(spec.unflat(i).jx, spec.unflat(i).jy, float(c)) for i, c in enumerate(dist.values)]
    return ("k_x", "k_y", "chi"), rows, {"method": dist.method, "total": dist.total}


def run_marginal(config: RunConfig):
    dist = _limiting(config)
    marg = limiting.marginals(dist, config["axis"])
    rows = [(i + 1, float(v)) for i, v in enumerate(marg)]
    return ("index", "chi_sum"), rows, {"method": dist.method}


def run_scan(config: RunConfig):
    v = config.values
    bc_x, bc_y = TOPOLOGIES[v["topology"]]
    lo, hi = v["range"]
    mirror = None if v["mirror"] == "auto" else v["mirror"]
    scan = limiting.asymmetry_scan(
        bc_x, bc_y, range(lo, hi + 1), square=v["square"], fixed_M=v["fix_M"], fixed_N=v["fix_N"],
        mirror=mirror, gamma=v["gamma"], tol=v["tol"], threshold=v["threshold"],
        workers=v["workers"] or None,
    )
    rows = [(r.M, r.N, r.bc, r.mirror, r.delta, int(r.is_asymmetric)) for r in scan]
    flagged = [r.N if v["fix_M"] is not None else r.M for r in scan if r.is_asymmetric]
    return ("M", "N", "bc", "mirror", "delta", "is_asymmetric"), rows, {"asymmetric": flagged,
                                                                       "method": limiting.EIGENCLASS}


def run_continuum(config: RunConfig):
    rows = []
    for t in config["times"]:
        rows.extend(continuum.compare_with_torus(config["size"], t, config["radius"]))
    cols = ("t", "dx", "dy", "pi_finite", "pi_continuum", "abs_diff")
    return cols, rows, {"max_abs_diff": max(r[5] for r in rows)}


RUNNERS = {
    "spectrum": run_spectrum, "hamiltonian": run_hamiltonian, "evolve": run_evolve,
    "return-prob": run_return_prob, "limiting": run_limiting, "marginal": run_marginal,
    "scan-asymmetry": run_scan, "continuum-compare": run_continuum,
}


# --------------------------------------------------------------------------
# serialization


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def to_csv(config: RunConfig, columns, rows) -> str:
    lines = [f"# latticewalk {__version__} {config.command}",
             "# config: " + json.dumps(config.as_dict(), sort_keys=True)]
    lines.append(",".join(columns))
    lines.extend(",".join(_fmt(x) for x in row) for row in rows)
    return "\n".join(lines) + "\n"


def _jsonable(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value


def to_json(config: RunConfig, columns, rows, extra) -> str:
    summary = {
        "command": config.command,
        "config": config.as_dict(),
        "columns": list(columns),
        "rows": [[_jsonable(x) for x in row] for row in rows],
        "tolerance": config.values.get("tol"),
        "method": extra.get("method"),
        "version": __version__,
    }
    if config.command in NEEDS_LATTICE:
        summary["spec"] = config.spec.as_dict()
    summary.update({k: v for k, v in extra.items() if k != "method"})
    return json.dumps(summary, indent=1, sort_keys=True) + "\n"


def run(config: RunConfig) -> str:
    """Execute ``config`` and return the serialized output."""
    columns, rows, extra = RUNNERS[config.command](config)
    if config.values.get("format", "csv") == "json":
        return to_json(config, columns, rows, extra)
    return to_csv(config, columns, rows)


# --------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _lattice_flags(p: argparse.ArgumentParser, lattice: bool = True) -> None:
    if lattice:
        p.add_argument("--M", type=int, help="extent along x")
        p.add_argument("--N", type=int, help="extent along y")
        p.add_argument("--bc-x", dest="bc_x", choices=["periodic", "open"])
        p.add_argument("--bc-y", dest="bc_y", choices=["periodic", "open"])
    p.add_argument("--gamma", type=float, help="transmission rate (default 1)")
    p.add_argument("--tol", type=float, help="degeneracy tolerance (default 1e-9)")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", dest="sub_config", metavar="FILE", help="key=value or JSON summary file")
    common.add_argument("--out", "-o", dest="sub_out", metavar="PATH", help="output path ('-' = stdout)")
    common.add_argument("--format", choices=["csv", "json"])

    parser = _Parser(prog="latticewalk", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", metavar="FILE", help="run the command stored in a config or JSON summary")
    parser.add_argument("--out", "-o", metavar="PATH")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("spectrum", parents=[common], help="analytic spectrum with degeneracy classes")
    _lattice_flags(p)
    p = sub.add_parser("hamiltonian", parents=[common], help="dense Hamiltonian as CSV")
    _lattice_flags(p)

    p = sub.add_parser("evolve", parents=[common], help="per-node probability snapshots")
    _lattice_flags(p)
    p.add_argument("--source", help="start node jx,jy (default 1,1)")
    p.add_argument("--times", help="comma-separated times")

    p = sub.add_parser("return-prob", parents=[common], help="average return probabilities and bound")
    _lattice_flags(p)
    p.add_argument("--t-min", dest="t_min", type=float)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--per-decade", dest="per_decade", type=int)

    for name, text in (("limiting", "limiting probabilities"), ("marginal", "marginal limiting probabilities")):
        p = sub.add_parser(name, parents=[common], help=text)
        _lattice_flags(p)
        p.add_argument("--source", help="start node jx,jy (default 1,1)")
        p.add_argument("--method", choices=METHODS)
        if name == "marginal":
            p.add_argument("--axis", choices=["x", "y"], help="x: indexed by k_x (sum over k_y)")

    p = sub.add_parser("scan-asymmetry", parents=[common], help="corner LP asymmetry over lattice sizes")
    _lattice_flags(p, lattice=False)
    p.add_argument("--bc", dest="topology", choices=sorted(TOPOLOGIES),
                   help="open/rectangle, cylinder (periodic x) or periodic/torus")
    family = p.add_mutually_exclusive_group()
    family.add_argument("--square", action="store_const", const=True, default=None, help="scan M = N")
    family.add_argument("--fix-M", dest="fix_M", type=int, help="fix M, scan N")
    family.add_argument("--fix-N", dest="fix_N", type=int, help="fix N, scan M")
    p.add_argument("--range", help="inclusive size range lo:hi")
    p.add_argument("--mirror", choices=("auto",) + limiting.MIRRORS)
    p.add_argument("--threshold", type=float, help="|delta| above this counts as asymmetric")
    p.add_argument("--workers", type=int, help=f"parallel workers (default ${limiting.WORKERS_ENV} or 1)")

    p = sub.add_parser("continuum-compare", parents=[common], help="finite torus vs Bessel continuum")
    p.add_argument("--size", type=int, help="torus extent (default 101)")
    p.add_argument("--times", help="comma-separated times (default 5)")
    p.add_argument("--radius", type=int, help="max |dx|, |dy| (default 20)")
    return parser


_NOT_VALUES = {"command", "config", "out", "sub_config", "sub_out"}


def config_from_args(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    ns = vars(args)
    path = ns.get("sub_config") or ns.get("config")
    file_values = load_config_file(path) if path else {}
    flags = {k: v for k, v in ns.items() if k not in _NOT_VALUES}
    if args.command == "scan-asymmetry" and flags.get("square") is None and (
        flags.get("fix_M") is not None or flags.get("fix_N") is not None
    ):
        flags["square"] = False
    if args.command == "scan-asymmetry" and flags.get("square"):
        file_values = {k: v for k, v in file_values.items() if k not in ("fix_M", "fix_N")}
    out = ns.get("sub_out") or ns.get("out") or "-"
    return resolve(args.command, file_values, flags, out)


def main(argv=None) -> int:
    try:
        config = config_from_args(argv)
    except (UsageError, LatticeError) as exc:
        print(f"latticewalk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        text = run(config)
    except (spectral.ClusteringError, ArithmeticError) as exc:
        print(f"latticewalk: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (LatticeError, ValueError) as exc:
        print(f"latticewalk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if config.out == "-":
        sys.stdout.write(text)
        return EXIT_OK
    try:
        with open(config.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        print(f"latticewalk: error: cannot write {config.out!r}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
