"""Command-line experiment runner.

Every command accepts ``--config FILE`` (JSON object keyed by flag name);
values in the file override flags given on the command line. Reports are
written as ``report.txt`` (key = value), ``report.json`` and, where there is a
trajectory or table, CSV files, all under ``--out``. Without ``--out`` the text
report goes to stdout. Reports contain no timestamps, so a replay with the same
configuration reproduces them byte for byte.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 support mismatch.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from genericdim import __version__
from genericdim.dimension import (
    InsufficientDataError,
    SupportMismatchError,
    convergence_exponent,
    dimension_report,
    local_dimension,
)
from genericdim.gauss import GaussMeasure, dim_generic_cf, golden_point_measure
from genericdim.generic import (
    CapsTooTight,
    RankIntervalEmpty,
    TypicalWordError,
    build_seed,
    sample_F,
    sample_Ystar,
    verify_generic,
)
from genericdim.gibbs import (
    BernoulliPotential,
    ConstantPotential,
    ConvergenceError,
    GaussPotential,
    LocallyConstantPotential,
    NonFinitePotentialError,
    Potential,
    build_model,
    gurevich_pressure,
)
from genericdim.measures import (
    BernoulliMeasure,
    CylinderMeasure,
    MarkovMeasure,
    PeriodicOrbitMeasure,
    TableMeasure,
    entropy_markov,
)
from genericdim.streams import stream_from_text, stream_to_text

WORKERS_ENV = "GENERICDIM_WORKERS"

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_SUPPORT = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


# -- specs -----------------------------------------------------------------------------------


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def _ints(text: str, what: str) -> list[int]:
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"{what}: expected comma-separated integers, got {text!r}") from None


def parse_measure(spec: str, field: str = "measure") -> CylinderMeasure:
    """bernoulli:p1,p2,..  markov:row;row;..  zeta:s  periodic:w1,w2,..  gauss  golden  file:PATH"""
    kind, _, arg = spec.partition(":")
    try:
        if kind == "bernoulli":
            return BernoulliMeasure(_floats(arg, field))
        if kind == "markov":
            rows = [_floats(r, field) for r in arg.split(";")]
            return MarkovMeasure.from_matrix(np.asarray(rows))
        if kind == "zeta":
            return BernoulliMeasure.zeta(float(arg or 2))
        if kind == "periodic":
            return PeriodicOrbitMeasure(tuple(_ints(arg, field)))
        if kind == "gauss":
            return GaussMeasure()
        if kind == "golden":
            return golden_point_measure()
        if kind == "file":
            text = Path(arg).read_text()
            return MarkovMeasure.loads(text) if text.lstrip().startswith("{") else TableMeasure.loads(text)
    except ConfigError:
        raise
    except (ValueError, OSError) as exc:
        raise ConfigError(f"{field}: cannot build measure from {spec!r}: {exc}") from None
    raise ConfigError(f"{field}: unknown measure kind {kind!r} in {spec!r}")


def parse_potential(spec: str, s: float = 1.0, field: str = "potential") -> Potential:
    """gauss (uses --s)  bernoulli:p1,..  constant:c  letters:v1,v2,.."""
    kind, _, arg = spec.partition(":")
    try:
        if kind == "gauss":
            return GaussPotential(s)
        if kind == "bernoulli":
            return BernoulliPotential(_floats(arg, field))
        if kind == "constant":
            return ConstantPotential(float(arg))
        if kind == "letters":
            return LocallyConstantPotential(values=_floats(arg, field))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{field}: cannot build potential from {spec!r}: {exc}") from None
    raise ConfigError(f"{field}: unknown potential kind {kind!r} in {spec!r}")


def parse_caps(spec: str):
    kind, _, arg = spec.partition(":")
    if kind == "none":
        return None
    if kind == "identity":
        return lambda n: n
    if kind == "linear":
        c = float(arg)
        return lambda n: np.floor(c * np.asarray(n)).astype(np.int64) if np.ndim(n) else int(c * n)
    if kind == "power":
        e = float(arg)
        return lambda n: np.ceil(np.asarray(n, dtype=float) ** e).astype(np.int64) if np.ndim(n) else math.ceil(n**e)
    raise ConfigError(f"caps: unknown cap sequence {spec!r} (none, identity, linear:c, power:e)")


# -- output ------------------------------------------------------------------------------------


def _flatten(prefix: str, v, out: dict) -> None:
    if isinstance(v, dict):
        for k, x in v.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), x, out)
    else:
        out[prefix] = v


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(x) for x in v)
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


class Output:
    def __init__(self, out: str | None, config: dict):
        self.dir = Path(out) if out else None
        self.config = config
        self.files: dict[str, str] = {}

    def add(self, name: str, text: str) -> None:
        self.files[name] = text

    def report(self, results: dict) -> None:
        body = {"config": self.config, "results": results}
        flat: dict = {}
        _flatten("", body, flat)
        self.add("report.txt", "".join(f"{k} = {_fmt(v)}\n" for k, v in flat.items()))
        self.add("report.json", json.dumps(_jsonable(body), indent=2, sort_keys=True) + "\n")

    def commit(self) -> None:
        if self.dir is None:
            sys.stdout.write(self.files.get("report.txt", ""))
            return
        self.dir.mkdir(parents=True, exist_ok=True)
        for name, text in self.files.items():
            (self.dir / name).write_text(text)


def _csv(header: list[str], rows) -> str:
    return ",".join(header) + "\n" + "".join(",".join(_fmt(v) for v in r) + "\n" for r in rows)


# -- commands ----------------------------------------------------------------------------------


def cmd_pressure(cfg: dict, out: Output) -> None:
    phi = parse_potential(cfg["potential"], cfg["s"])
    rows = []
    final = None
    for N in _ints(cfg["N"], "N"):
        for d in _ints(cfg["d"], "d"):
            model = gurevich_pressure(phi, N, d, trend=False, periodic=False)
            rows.append((N, d, model.P_hat, model.record.residual, model.record.iterations))
            final = model
    out.add("pressure.csv", _csv(["N", "d", "P_hat", "residual", "iterations"], rows))
    out.report({"P_hat": final.P_hat, "N": final.N, "d": final.d, "residual": final.record.residual,
                "trend": [r[2] for r in rows]})


def _nu_from(cfg: dict) -> CylinderMeasure | None:
    if cfg.get("nu_potential"):
        phi = parse_potential(cfg["nu_potential"], cfg["s"], "nu_potential")
        if isinstance(phi, GaussPotential):
            return None
        return build_model(phi, cfg["model_N"], cfg["model_d"])
    spec = cfg.get("nu")
    if not spec:
        raise ConfigError("nu: give --nu or --nu-potential")
    if spec == "gauss":
        return None
    return parse_measure(spec, "nu")


def cmd_dim(cfg: dict, out: Output) -> None:
    mu = parse_measure(_required(cfg, "mu"), "mu")
    nu = _nu_from(cfg)
    if nu is None:
        rep = dim_generic_cf(mu, cfg["s"])
    else:
        rep = dimension_report(mu, nu, k=cfg["k"], N=cfg["N_cap"], N_max=cfg["N_max"])
    out.add("dimension.json", rep.to_json())
    out.report(json.loads(rep.to_json()))


def cmd_cfdim(cfg: dict, out: Output) -> None:
    ell = parse_measure(_required(cfg, "ell"), "ell")
    rep = dim_generic_cf(ell, cfg["s"])
    out.add("dimension.json", rep.to_json())
    out.report(json.loads(rep.to_json()))


def cmd_seed(cfg: dict, out: Output) -> None:
    mu = parse_measure(_required(cfg, "mu"), "mu")
    caps = parse_caps(cfg["caps"])
    z = build_seed(mu, caps, cfg["levels"], eps_scale=cfg["eps_scale"], seed=cfg["seed"])
    n = cfg["horizon"]
    out.add("schedule.txt", z.schedule.dumps())
    out.add("stream.txt", stream_to_text(z, n, {"config": json.dumps(cfg, sort_keys=True)}))
    results = {"N": z.schedule.N, "n": z.schedule.n, "t": z.schedule.t, "horizon": n,
               "cap_violation": z.cap_violation(n) if caps else None}
    if cfg.get("horizons"):
        tr = verify_generic(z, mu, _ints(cfg["horizons"], "horizons"), k_max=cfg["k"])
        out.add("trajectory.csv", tr.to_csv())
        results["d_star"] = tr.values
        results["decreasing"] = tr.decreasing
    out.report(results)


def cmd_verify(cfg: dict, out: Output) -> None:
    mu = parse_measure(_required(cfg, "mu"), "mu")
    path = _required(cfg, "stream")
    try:
        stream, meta = stream_from_text(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise ConfigError(f"stream: cannot read {path!r}: {exc}") from None
    tr = verify_generic(stream, mu, _ints(cfg["horizons"], "horizons"), k_max=cfg["k"])
    out.add("trajectory.csv", tr.to_csv())
    out.report({"d_star": tr.values, "tail": tr.tails, "decreasing": tr.decreasing,
                "envelope_decreasing": tr.envelope_decreasing, "stream_meta": meta})


def cmd_cantor(cfg: dict, out: Output) -> None:
    mu = parse_measure(_required(cfg, "mu"), "mu")
    nu = parse_measure(_required(cfg, "nu"), "nu")
    depth = cfg["depth"]
    depths = np.unique(np.geomspace(min(100, depth), depth, 40).astype(int))
    if cfg["kind"] == "ystar":
        if not isinstance(mu, MarkovMeasure):
            raise ConfigError("mu: the Y* sampler needs a Markov measure")
        Y = sample_Ystar(mu, nu, cfg["levels"], cfg["count"], depth, seed=cfg["seed"], workers=cfg["workers"])
        h = entropy_markov(mu)
        pi = mu.letter_masses(max(mu.letters))
        h_rel = float(-np.dot(pi, nu.log_letter_masses(len(pi)))) if isinstance(nu, BernoulliMeasure) else math.nan
        target = h / h_rel
        streams, ref = Y.streams, Y.reference
        extra = {"lengths": Y.lengths, "h_mu": h, "h_rel": h_rel}
    elif cfg["kind"] == "F":
        z = build_seed(mu, parse_caps(cfg["caps"]), cfg["levels"], seed=cfg["seed"])
        F = sample_F(z, nu, cfg["eps"], cfg["delta"], cfg["count"], depth, seed=cfg["seed"])
        alpha = convergence_exponent(nu, cfg["N_max"]).alpha
        target = alpha * (1 - cfg["eps"]) * cfg["delta"] / (1 + cfg["eps"])
        streams, ref = [s.stream for s in F.samples], F.reference
        extra = {"alpha": alpha}
    else:
        raise ConfigError(f"kind: expected 'ystar' or 'F', got {cfg['kind']!r}")
    proxies = [local_dimension(s, nu, ref, depths).liminf for s in streams]
    out.add("local_dimension.csv", _csv(["sample", "liminf_proxy"], enumerate(proxies)))
    ok = sum(p >= target - 0.05 for p in proxies)
    out.report({"target": target, "min_proxy": min(proxies), "fraction_ok": ok / len(proxies),
                "depth": depth, **extra})


def _required(cfg: dict, key: str):
    if not cfg.get(key):
        raise ConfigError(f"{key}: required")
    return cfg[key]


COMMANDS = {
    "pressure": cmd_pressure,
    "dim": cmd_dim,
    "cfdim": cmd_cfdim,
    "seed": cmd_seed,
    "verify": cmd_verify,
    "cantor": cmd_cantor,
}


# -- argument handling --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="genericdim", description="Dimension experiments on the countable full shift.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file; its values override flags")
        sp.add_argument("--out", help="output directory (default: text report on stdout)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--workers", type=int, default=None, help=f"default from ${WORKERS_ENV} or 1")
        sp.add_argument("--s", type=float, default=1.0)
        return sp

    sp = common(sub.add_parser("pressure", help="truncated Gurevich pressure over an (N, d) grid"))
    sp.add_argument("--potential", default="gauss")
    sp.add_argument("--N", default="250,500,1000")
    sp.add_argument("--d", default="2")

    sp = common(sub.add_parser("dim", help="dim_nu G_mu = max(alpha, beta)"))
    sp.add_argument("--mu")
    sp.add_argument("--nu")
    sp.add_argument("--nu-potential")
    sp.add_argument("--k", type=int, default=12)
    sp.add_argument("--N-cap", type=int, default=20)
    sp.add_argument("--N-max", type=int, default=100_000)
    sp.add_argument("--model-N", type=int, default=50)
    sp.add_argument("--model-d", type=int, default=2)

    sp = common(sub.add_parser("cfdim", help="dimension of continued-fraction generic points"))
    sp.add_argument("--ell", default="gauss")

    sp = common(sub.add_parser("seed", help="construct a generic point under digit caps"))
    sp.add_argument("--mu")
    sp.add_argument("--caps", default="identity")
    sp.add_argument("--levels", type=int, default=3)
    sp.add_argument("--eps-scale", type=float, default=1.0)
    sp.add_argument("--horizon", type=int, default=100_000)
    sp.add_argument("--horizons", default="1000,10000,100000")
    sp.add_argument("--k", type=int, default=3)

    sp = common(sub.add_parser("verify", help="d* trajectory of a stream against a measure"))
    sp.add_argument("--mu")
    sp.add_argument("--stream")
    sp.add_argument("--horizons", default="1000,10000,100000")
    sp.add_argument("--k", type=int, default=3)

    sp = common(sub.add_parser("cantor", help="Cantor-set samples and local-dimension proxies"))
    sp.add_argument("--kind", default="ystar", choices=["ystar", "F"])
    sp.add_argument("--mu")
    sp.add_argument("--nu")
    sp.add_argument("--count", type=int, default=50)
    sp.add_argument("--depth", type=int, default=10_000)
    sp.add_argument("--levels", type=int, default=2)
    sp.add_argument("--eps", type=float, default=0.9)
    sp.add_argument("--delta", type=float, default=0.9)
    sp.add_argument("--caps", default="identity")
    sp.add_argument("--N-max", type=int, default=100_000)
    return p


def _load_config(path: str, known: dict) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path!r}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config {path}: expected a JSON object")
    out = {}
    for key, value in data.items():
        k = key.replace("-", "_")
        if k not in known or k in ("config", "command"):
            raise ConfigError(f"config {path}: unknown field {key!r}")
        default = known[k]
        if isinstance(default, bool) or default is None or isinstance(value, type(default)):
            out[k] = value
        elif isinstance(default, float) and isinstance(value, int):
            out[k] = float(value)
        elif isinstance(default, str):
            out[k] = ",".join(map(str, value)) if isinstance(value, list) else str(value)
        else:
            raise ConfigError(f"config {path}: field {key!r} expects {type(default).__name__}, got {value!r}")
    return out


def _validate(cfg: dict) -> None:
    for key in ("k", "N_cap", "N_max", "model_N", "model_d", "levels", "horizon", "count", "depth", "workers"):
        if key in cfg and (not isinstance(cfg[key], int) or cfg[key] < 1):
            raise ConfigError(f"{key}: must be a positive integer, got {cfg[key]!r}")
    if cfg.get("s", 1.0) <= 0.5:
        raise ConfigError(f"s: must exceed 1/2, got {cfg['s']}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = vars(args).copy()
    try:
        if args.config:
            cfg.update(_load_config(args.config, cfg))
        if cfg.get("workers") is None:
            env = os.environ.get(WORKERS_ENV, "1")
            try:
                cfg["workers"] = int(env)
            except ValueError:
                raise ConfigError(f"{WORKERS_ENV}: expected an integer, got {env!r}") from None
        _validate(cfg)
        command = cfg.pop("command")
        out_dir = cfg.pop("out")
        cfg.pop("config")
        out = Output(out_dir, {"command": command, **cfg})
        COMMANDS[command](cfg, out)
        out.commit()
    except ConfigError as exc:
        print(f"genericdim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SupportMismatchError as exc:
        print(f"genericdim: support mismatch: {exc}", file=sys.stderr)
        return EXIT_SUPPORT
    except (ConvergenceError, NonFinitePotentialError, InsufficientDataError, TypicalWordError, CapsTooTight,
            RankIntervalEmpty, FloatingPointError) as exc:
        print(f"genericdim: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
