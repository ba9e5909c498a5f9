"""``arrows-bench``: single trials, scaling sweeps and noise-scale estimation.

Settings come from an optional JSON file (``--config``) overlaid by flags.
Every output embeds the fully resolved configuration.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import jsonschema
import numpy as np

from .evaluation import ALGORITHMS, dynamic_regret, per_n_rows, run_algorithm, scaling_slope, sweep
from .haar import estimate_sigma_mad
from .policy import DEFAULT_DELTA
from .sequences import GENERATORS, NoiseSpec, add_noise, make_generator

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "mode": {"enum": ["trial", "sweep", "estimate-sigma"]},
        "algo": {"type": "array", "items": {"enum": list(ALGORITHMS)}, "minItems": 1},
        "gen": {"enum": sorted(GENERATORS)},
        "gen_params": {"type": "object"},
        "n": {"type": ["integer", "null"], "minimum": 1},
        "n_grid": {"type": ["array", "null"], "items": {"type": "integer", "minimum": 2}},
        "sigma": {"type": "number", "minimum": 0},
        "delta": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "beta": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "seeds": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
        "out_dir": {"type": ["string", "null"]},
        "input": {"type": ["string", "null"]},
        "workers": {"type": "integer", "minimum": 1},
        "timing": {"type": "boolean"},
    },
    "required": ["mode", "algo", "gen", "sigma", "delta", "seeds"],
    "additionalProperties": False,
}

SUMMARY_SCHEMA = {
    "type": "object",
    "required": ["algo", "n", "seed", "total_regret", "bins", "beta", "lambda", "wallclock_s", "config"],
}

REPORT_SCHEMA = {
    "type": "object",
    "required": ["config", "algos"],
    "properties": {
        "algos": {
            "type": "object",
            "additionalProperties": {"type": "object", "required": ["slope", "per_n"]},
        }
    },
}

TRACE_COLUMNS = ["t", "theta", "y", "x", "loss", "restart"]
SCALING_COLUMNS = ["algo", "n", "seed", "regret", "bins", "wallclock_ms"]

DEFAULTS = {
    "mode": "trial",
    "algo": ["arrows"],
    "gen": "hybrid",
    "gen_params": {},
    "n": None,
    "n_grid": None,
    "sigma": 1.0,
    "delta": DEFAULT_DELTA,
    "beta": None,
    "seeds": [0],
    "out_dir": None,
    "input": None,
    "workers": 1,
    "timing": True,
}


class ConfigError(ValueError):
    pass


def fmt(v) -> str:
    """Locale-free, round-trippable number formatting."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def parse_int_expr(tok: str) -> int:
    tok = tok.strip()
    if "^" in tok:
        b, e = tok.split("^")
        return int(b) ** int(e)
    if "**" in tok:
        b, e = tok.split("**")
        return int(b) ** int(e)
    return int(float(tok)) if "e" in tok.lower() else int(tok)


def parse_n_grid(text: str) -> list[int]:
    """``"1024,2048"``, ``"2^10,2^11"`` or a doubling range ``"2^10..2^13"``."""
    out: list[int] = []
    for part in text.split(","):
        if ".." in part:
            lo, hi = (parse_int_expr(p) for p in part.split(".."))
            v = lo
            while v <= hi:
                out.append(v)
                v *= 2
        elif part.strip():
            out.append(parse_int_expr(part))
    return out


def parse_seeds(text: str) -> list[int]:
    """``"0,1,2"`` or a half-open range ``"0:5"``."""
    out: list[int] = []
    for part in text.split(","):
        if ":" in part:
            lo, hi = part.split(":")
            out.extend(range(int(lo), int(hi)))
        elif part.strip():
            out.append(int(part))
    return out


def _gen_param(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    k, v = text.split("=", 1)
    try:
        val = json.loads(v)
    except json.JSONDecodeError:
        val = v
    return k.strip(), val


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="arrows-bench", description=__doc__.splitlines()[0])
    p.add_argument("--config", type=Path, help="JSON file with settings (flags win)")
    p.add_argument("--mode", choices=["trial", "sweep", "estimate-sigma"])
    p.add_argument("--algo", help=f"comma-separated subset of {','.join(ALGORITHMS)}")
    p.add_argument("--gen", choices=sorted(GENERATORS))
    p.add_argument("--gen-param", action="append", type=_gen_param, default=None,
                   metavar="KEY=VALUE", help="generator keyword argument, repeatable")
    p.add_argument("--n", type=parse_int_expr)
    p.add_argument("--n-grid", type=parse_n_grid)
    p.add_argument("--sigma", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--beta", type=float, help="override the default shrinkage exponent")
    p.add_argument("--seeds", type=parse_seeds)
    p.add_argument("--out-dir")
    p.add_argument("--input", help="series for estimate-sigma: one value per line, or CSV with a 'y' column")
    p.add_argument("--workers", type=int)
    p.add_argument("--no-timing", dest="timing", action="store_const", const=False,
                   help="write 0 for wallclock fields so outputs are bit-identical across runs")
    return p


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    cfg["gen_params"] = {}
    if args.config is not None:
        try:
            cfg.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config file {args.config}: {e}") from e
        if isinstance(cfg.get("algo"), str):
            cfg["algo"] = cfg["algo"].split(",")
        if isinstance(cfg.get("n_grid"), str):
            cfg["n_grid"] = parse_n_grid(cfg["n_grid"])
        if isinstance(cfg.get("seeds"), str):
            cfg["seeds"] = parse_seeds(cfg["seeds"])
    flags = {k: v for k, v in vars(args).items() if v is not None and k not in ("config", "gen_param")}
    if "algo" in flags:
        flags["algo"] = [a.strip() for a in flags["algo"].split(",") if a.strip()]
    cfg.update(flags)
    if args.gen_param:
        cfg["gen_params"] = {**cfg.get("gen_params", {}), **dict(args.gen_param)}
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        raise ConfigError(f"invalid configuration: {e.message}") from e
    mode = cfg["mode"]
    if mode == "trial":
        if cfg["n"] is None:
            raise ConfigError("trial mode needs --n")
        if len(cfg["seeds"]) != 1:
            raise ConfigError("trial mode takes exactly one seed")
        if len(cfg["algo"]) != 1:
            raise ConfigError("trial mode takes exactly one algorithm")
    elif mode == "sweep":
        if not cfg["n_grid"] or len(cfg["n_grid"]) < 3:
            raise ConfigError("sweep mode needs an --n-grid with at least 3 points")
        if sorted(set(cfg["n_grid"])) != list(cfg["n_grid"]):
            raise ConfigError("--n-grid must be strictly increasing")
    elif mode == "estimate-sigma":
        if cfg["input"] is None and cfg["n"] is None:
            raise ConfigError("estimate-sigma needs --input or a generator with --n")
    if mode != "estimate-sigma" and cfg["out_dir"] is None:
        raise ConfigError(f"{mode} mode needs --out-dir")
    try:
        make_generator(cfg["gen"], **cfg["gen_params"])(cfg["n"] or (cfg["n_grid"] or [16])[0])
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad generator parameters: {e}") from e
    return cfg


def _out_dir(cfg) -> Path:
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, obj, schema):
    jsonschema.validate(obj, schema)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def run_trial(cfg: dict) -> dict:
    n, seed, algo = cfg["n"], cfg["seeds"][0], cfg["algo"][0]
    truth = make_generator(cfg["gen"], **cfg["gen_params"])(n)
    y = add_noise(truth, NoiseSpec(sigma=cfg["sigma"], seed=seed))
    tr = run_algorithm(algo, truth, y, cfg["sigma"], cfg["delta"], cfg["beta"], seed)
    out = _out_dir(cfg)
    loss = tr.loss
    with open(out / "trace.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for i in range(n):
            w.writerow([i + 1, fmt(truth.theta[i]), fmt(y[i]), fmt(tr.x[i]), fmt(loss[i]), fmt(tr.restart[i])])
    summary = {
        "algo": algo,
        "n": n,
        "seed": seed,
        "total_regret": dynamic_regret(tr),
        "bins": tr.num_bins,
        "beta": tr.config.get("beta"),
        "lambda": tr.config.get("threshold"),
        "batch_size": tr.config.get("batch_size"),
        "window": tr.config.get("window"),
        "truth": {"tv": truth.tv, "sobolev": truth.sobolev, "sup": truth.sup, "label": truth.label},
        "wallclock_s": tr.wallclock if cfg["timing"] else 0.0,
        "config": cfg,
    }
    _write_json(out / "summary.json", summary, SUMMARY_SCHEMA)
    return summary


def run_sweep(cfg: dict) -> dict:
    make_truth = make_generator(cfg["gen"], **cfg["gen_params"])
    traces = sweep(cfg["algo"], make_truth, cfg["n_grid"], cfg["seeds"], cfg["sigma"],
                   cfg["delta"], cfg["beta"], cfg["workers"])
    out = _out_dir(cfg)
    with open(out / "scaling.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCALING_COLUMNS)
        for tr in traces:
            ms = tr.wallclock * 1e3 if cfg["timing"] else 0.0
            w.writerow([tr.algo, tr.n, tr.seed, fmt(dynamic_regret(tr)), tr.num_bins, fmt(ms)])
    bins: dict[tuple[str, int], list[int]] = {}
    for tr in traces:
        bins.setdefault((tr.algo, tr.n), []).append(tr.num_bins)
    algos = {}
    for algo, rows in per_n_rows(traces).items():
        slope = scaling_slope([(n, m) for n, m, _ in rows]) if all(m > 0 for _, m, _ in rows) else None
        algos[algo] = {
            "slope": slope,
            "per_n": [{"n": n, "mean_regret": m, "std_regret": s,
                       "mean_bins": float(np.mean(bins[(algo, n)]))} for n, m, s in rows],
        }
    report = {"config": cfg, "algos": algos}
    _write_json(out / "report.json", report, REPORT_SCHEMA)
    return report


def read_series(path: str) -> np.ndarray:
    text = Path(path).read_text().strip().splitlines()
    if text and "y" in [c.strip() for c in text[0].split(",")]:
        reader = csv.DictReader(text)
        return np.array([float(row["y"]) for row in reader])
    return np.array([float(line.split(",")[0]) for line in text if line.strip()])


def run_estimate_sigma(cfg: dict) -> dict:
    if cfg["input"] is not None:
        y = read_series(cfg["input"])
        source = {"input": cfg["input"]}
    else:
        truth = make_generator(cfg["gen"], **cfg["gen_params"])(cfg["n"])
        y = add_noise(truth, NoiseSpec(sigma=cfg["sigma"], seed=cfg["seeds"][0]))
        source = {"gen": cfg["gen"], "n": cfg["n"], "seed": cfg["seeds"][0]}
    sigma_hat = estimate_sigma_mad(y)
    result = {"sigma_hat": sigma_hat, "num_observations": int(y.size), "source": source, "config": cfg}
    print(fmt(sigma_hat))
    if cfg["out_dir"] is not None:
        (_out_dir(cfg) / "sigma.json").write_text(json.dumps(result, indent=2, sort_keys=True) + "\n")
    return result


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as e:
        print(f"arrows-bench: error: {e}", file=sys.stderr)
        return 2
    runner = {"trial": run_trial, "sweep": run_sweep, "estimate-sigma": run_estimate_sigma}[cfg["mode"]]
    try:
        runner(cfg)
    except (OSError, ValueError, jsonschema.ValidationError) as e:
        print(f"arrows-bench: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
