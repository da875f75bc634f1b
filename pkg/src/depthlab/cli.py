"""Single executable exposing the depth computations and experiments.

Subcommands: analytic, bounds, admissible, empirical, simplicial, plotdata.
Every run resolves its configuration (a JSON document merged with CLI
flags, flags winning), echoes the resolved config into the output
directory for provenance, and writes machine-readable JSON/CSV artifacts.
All randomness flows from one mandatory master seed; reruns of the same
config reproduce outputs byte for byte.

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from . import admissibility, analytic, bounds, empirical, simplicial
from .errors import DepthLabError
from .models import (
    Point,
    PowerTail,
    SequenceModel,
    gaussian_model,
    rademacher_model,
    stable_model,
    uniform_model,
)


class ConfigError(Exception):
    pass


MODEL_PRESETS = ("gaussian_unit", "rademacher", "cauchy_unit", "uniform_unit")
POINT_PRESETS = ("zero", "inverse-k", "inverse-sqrt-k")


# ---------------------------------------------------------------------------
# Spec resolution
# ---------------------------------------------------------------------------

def load_model(spec: str) -> SequenceModel:
    if spec == "gaussian_unit":
        return gaussian_model()
    if spec == "rademacher":
        return rademacher_model()
    if spec == "cauchy_unit":
        return stable_model(1.0)
    if spec == "uniform_unit":
        return uniform_model(-1.0, 1.0)
    path = Path(spec)
    if not path.exists():
        raise ConfigError(f"model spec {spec!r} is neither a preset "
                          f"({', '.join(MODEL_PRESETS)}) nor a file")
    try:
        doc = json.loads(path.read_text())
        return model_from_document(doc)
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise ConfigError(f"invalid model file {spec}: {exc}") from exc


def model_from_document(doc: dict) -> SequenceModel:
    family = doc["family"]
    rule = doc.get("scale_rule", {"kind": "constant", "value": 1.0})
    K = doc.get("K")
    kind = rule.get("kind", "constant")
    if kind == "explicit":
        scales = [float(v) for v in rule["values"]]
        tail = None
    elif kind == "constant":
        scales = None if K is None else [float(rule["value"])] * K
        tail = PowerTail(float(rule["value"]), 0.0)
    elif kind == "power":
        coef, expo = float(rule["coef"]), float(rule["exponent"])
        scales = None if K is None else [coef * k ** expo for k in range(1, K + 1)]
        tail = PowerTail(coef, expo)
    else:
        raise ConfigError(f"unknown scale rule kind {kind!r}")
    if family == "gaussian":
        if kind == "explicit":
            return gaussian_model(scales=scales)
        return gaussian_model(scales=None, tail=tail) if scales is None else \
            gaussian_model(scales=scales, tail=tail)
    if family == "stable":
        p = float(doc["p"])
        if kind == "explicit":
            return stable_model(p, scales=scales)
        return stable_model(p, scales=scales, tail=tail)
    if family == "rademacher":
        return rademacher_model(K)
    if family == "uniform":
        return uniform_model(float(doc.get("lo", -1.0)),
                             float(doc.get("hi", 1.0)), K)
    raise ConfigError(f"unknown model family {family!r}")


def load_point(spec: str) -> Point:
    if spec == "zero":
        return Point.zero()
    if spec == "inverse-k":
        return Point.inverse_k(1.0)
    if spec == "inverse-sqrt-k":
        return Point.inverse_k(0.5)
    path = Path(spec)
    if not path.exists():
        raise ConfigError(f"point spec {spec!r} is neither a preset "
                          f"({', '.join(POINT_PRESETS)}) nor a file")
    if path.suffix.lower() == ".json":
        doc = json.loads(path.read_text())
        tail = doc.get("tail")
        return Point(tuple(float(c) for c in doc.get("coords", ())),
                     tail=None if tail is None else
                     PowerTail(float(tail["coef"]), float(tail["exponent"])))
    coords: dict[int, float] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["k", "value"]:
            raise ConfigError(f"point CSV {spec} must have header k,value")
        for row in reader:
            if not row:
                continue
            coords[int(row[0])] = float(row[1])
    if not coords:
        return Point.zero()
    width = max(coords)
    return Point(tuple(coords.get(k, 0.0) for k in range(1, width + 1)))


# ---------------------------------------------------------------------------
# Config plumbing
# ---------------------------------------------------------------------------

def resolve_config(args: argparse.Namespace, stochastic: bool) -> dict:
    """File config overlaid by CLI flags; a master seed is mandatory for
    stochastic runs."""
    cfg: dict = {}
    if getattr(args, "config", None):
        try:
            cfg.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}")
    for key, value in vars(args).items():
        if key in ("config", "func") or value is None:
            continue
        cfg[key] = value
    cfg.pop("command", None)
    if stochastic and cfg.get("seed") is None:
        raise ConfigError("a master --seed is mandatory for stochastic runs")
    if "out" not in cfg:
        raise ConfigError("--out directory is required")
    return cfg


def _require(cfg: dict, *keys: str) -> None:
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise ConfigError(f"missing required parameter(s): {', '.join(missing)}")


def write_outputs(outdir: Path, cfg: dict, summary: dict,
                  csv_rows: list[list] | None = None,
                  csv_header: list[str] | None = None,
                  csv_name: str = "table.csv") -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    echo = {k: v for k, v in cfg.items()}
    (outdir / "config.json").write_text(
        json.dumps(echo, indent=2, sort_keys=True) + "\n")
    (outdir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n")
    if csv_rows is not None:
        with open(outdir / csv_name, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(csv_header)
            writer.writerows(csv_rows)


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(float(x))
    return str(x)


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------

def cmd_analytic(args) -> int:
    cfg = resolve_config(args, stochastic=False)
    _require(cfg, "model", "point")
    model = load_model(cfg["model"])
    point = load_point(cfg["point"])
    fams = model.families()
    norms: dict[str, float] = {}
    series_value = None
    if fams == {"gaussian"}:
        report = analytic.gaussian_sequence_depth(point, model)
        rep = analytic.series_report(point, model)
        series_value = rep.value
        norms["cameron_martin"] = math.sqrt(rep.value) if rep.finite else math.inf
    elif fams == {"stable"}:
        report = analytic.stable_depth(point, model)
        norms["dual"] = report.certificate.detail.get("norm", math.inf)
    elif fams == {"rademacher"}:
        cls = analytic.rademacher_classify(point)
        summary = {
            "classification": cls.label, "reason": cls.reason,
            "series": _json_num(cls.series), "sup": _json_num(cls.sup),
        }
        write_outputs(Path(cfg["out"]), cfg, summary)
        print(json.dumps(summary, indent=2, sort_keys=True))
        return 0
    else:
        raise ConfigError(f"no closed form for model families {sorted(fams)}")
    summary = {
        "value": report.value,
        "zero_certified": report.zero_certified,
        "certificate": {"kind": report.certificate.kind,
                        "detail": _json_dict(report.certificate.detail)},
        "series": _json_num(series_value),
        "norms": _json_dict(norms),
    }
    write_outputs(Path(cfg["out"]), cfg, summary)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_bounds(args) -> int:
    cfg = resolve_config(args, stochastic=False)
    _require(cfg, "model", "point")
    model = load_model(cfg["model"])
    point = load_point(cfg["point"])
    depths = [int(m) for m in str(cfg.get("depths", "4,16,64")).split(",")]
    curve_max = int(cfg.get("curve_max", max(depths)))
    cfg["depths"] = ",".join(str(m) for m in depths)
    cfg["curve_max"] = curve_max
    cert = bounds.markov_zero_certificate(point, model, depths)
    curve = bounds.markov_bound_curve(point, model, curve_max)
    lower: list[dict] = []
    rep = analytic.series_report(point, model)
    if rep.finite and rep.value < 1.0:
        c = bounds.kurtosis_bound(model)
        delta = 1.0 - math.sqrt(rep.value) if rep.value > 0 else 1.0 - 1e-12
        lower.append({"kind": "PZ", "value": bounds.pz_lower_bound(delta, c),
                      "params": {"delta": delta, "c": c}})
    if model.families() == {"rademacher"}:
        small = bounds.small_point_lower_bound(point)
        if small is not None:
            lower.append({"kind": small.kind, "value": small.value,
                          "params": _json_dict(small.params)})
        tail = bounds.rademacher_tail_lower_bound(
            point, float(cfg.get("tail_c", 1.0)),
            float(cfg.get("tail_t0", 1.0)))
        if tail is not None:
            lower.append({"kind": tail.kind, "value": tail.value,
                          "params": _json_dict(tail.params),
                          "suspect": tail.suspect})
    summary = {
        "certificates": [{
            "depths": list(cert.depths),
            "bound_values": list(cert.bound_values),
            "status": cert.status,
            "witnesses": [w.to_dict() for w in cert.witnesses],
        }],
        "lower_bounds": lower,
        "series": _json_num(rep.value),
    }
    rows = [[m, _fmt(float(b))] for m, b in zip(range(1, curve_max + 1), curve)
            if math.isfinite(b)]
    write_outputs(Path(cfg["out"]), cfg, summary, csv_rows=rows,
                  csv_header=["m", "B_m"], csv_name="markov_curve.csv")
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_admissible(args) -> int:
    cfg = resolve_config(args, stochastic=False)
    _require(cfg, "model", "point")
    model = load_model(cfg["model"])
    point = load_point(cfg["point"])
    cfg["assumptions"] = cfg.get("assumptions", "AIII")
    decision = admissibility.positivity_decision(
        point, model, assumptions=cfg["assumptions"])
    summary = {"decision": decision.decision, "reason": decision.reason}
    if decision.verdict is not None:
        summary["verdict"] = decision.verdict.to_dict()
    write_outputs(Path(cfg["out"]), cfg, summary)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_empirical(args) -> int:
    cfg = resolve_config(args, stochastic=True)
    _require(cfg, "model", "point", "n", "K", "seeds")
    model = load_model(cfg["model"])
    point = load_point(cfg["point"])
    family = str(cfg.get("family", "coordinates"))
    cfg["family"] = family
    if family != "coordinates":
        raise ConfigError("the CLI exposes the coordinate family; other "
                          "families are available through the library API")
    result = empirical.zero_depth_experiment(
        model, point, n=int(cfg["n"]), K=int(cfg["K"]),
        seeds=int(cfg["seeds"]), master_seed=int(cfg["seed"]))
    summary = {
        "fraction_zero": result.fraction_zero,
        "fraction_zero_stderr": result.fraction_zero_stderr,
        "mean_depth": result.mean_depth,
        "true_depth_reference": _json_num(result.true_depth_reference),
        "analytic_floor": _json_num(result.analytic_floor),
        "consistency_failure": result.consistency_failure,
        "ratio_vanishes": result.ratio_vanishes,
        "family": result.family,
        "n": int(cfg["n"]), "K": int(cfg["K"]), "seeds": int(cfg["seeds"]),
    }
    rows = [[r.seed, r.n, r.K, _fmt(r.empirical_depth), int(r.zero_hit)]
            for r in result.records]
    write_outputs(Path(cfg["out"]), cfg, summary, csv_rows=rows,
                  csv_header=["seed", "n", "K", "empirical_depth", "zero_hit"],
                  csv_name="empirical.csv")
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_simplicial(args) -> int:
    cfg = resolve_config(args, stochastic=True)
    _require(cfg, "model", "point", "n", "d", "kmax", "seeds")
    model = load_model(cfg["model"])
    point = load_point(cfg["point"])
    cfg["mc_draws"] = int(cfg.get("mc_draws", 10 ** 5))
    cfg["budget"] = int(cfg.get("budget", simplicial.DEFAULT_BUDGET))
    result = simplicial.block_depth_experiment(
        model, point, n=int(cfg["n"]), d=int(cfg["d"]),
        k_max=int(cfg["kmax"]), seeds=int(cfg["seeds"]),
        master_seed=int(cfg["seed"]),
        mc_draws=cfg["mc_draws"], budget=cfg["budget"])
    summary = {
        "fraction_zero": result.fraction_zero,
        "fraction_zero_stderr": result.fraction_zero_stderr,
        "lambda_hat": result.lambda_hat,
        "lambda_stderr": result.lambda_stderr,
        "gap": result.gap,
        "n": result.n, "d": result.d, "k_max": result.k_max,
    }
    rows = []
    for r in result.records:
        for k, z in enumerate(r.block_counts, start=1):
            rows.append([r.seed, k, z, r.n_subsets,
                         _fmt(z / r.n_subsets)])
    write_outputs(Path(cfg["out"]), cfg, summary, csv_rows=rows,
                  csv_header=["seed", "k", "Z", "N", "ratio"],
                  csv_name="simplicial.csv")
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_plotdata(args) -> int:
    cfg = resolve_config(args, stochastic=False)
    _require(cfg, "input")
    path = Path(cfg["input"])
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}")
    rows: list[list] = []
    if "certificates" in doc:
        for cert in doc["certificates"]:
            for m, b in zip(cert["depths"], cert["bound_values"]):
                rows.append(["markov_bound", m, _fmt(float(b)), ""])
    elif "rows" in doc:  # consistency-gap table
        for row in doc["rows"]:
            if row.get("gap") is not None:
                rows.append(["gap", row["n"], _fmt(float(row["gap"])), ""])
    elif "fraction_zero" in doc:
        x = doc.get("k_max", doc.get("K", 0))
        rows.append(["fraction_zero", x, _fmt(float(doc["fraction_zero"])),
                     _fmt(float(doc.get("fraction_zero_stderr", 0.0)))])
    else:
        raise ConfigError(f"unrecognized summary document {path}")
    outdir = Path(cfg["out"])
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "plotdata.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["series", "x", "y", "stderr"])
        writer.writerows(rows)
    return 0


def _json_num(x):
    if x is None:
        return None
    x = float(x)
    if math.isinf(x):
        return "inf"
    if math.isnan(x):
        return "nan"
    return x


def _json_dict(d: dict) -> dict:
    return {k: _json_num(v) if isinstance(v, (int, float)) else v
            for k, v in d.items()}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="depth",
        description="Half-space, simplicial and band depth laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, stochastic=False):
        p.add_argument("--model", help="model preset or JSON file")
        p.add_argument("--point", help="point preset, CSV or JSON file")
        p.add_argument("--config", help="JSON config; flags override it")
        p.add_argument("--out", help="output directory")
        if stochastic:
            p.add_argument("--seed", type=int, help="master seed (mandatory)")

    p = sub.add_parser("analytic", help="closed-form depth value")
    common(p)
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("bounds", help="Markov certificates and lower bounds")
    common(p)
    p.add_argument("--depths", help="comma list of witness depths m")
    p.add_argument("--curve-max", dest="curve_max", type=int)
    p.add_argument("--ms-c", dest="tail_c", type=float)
    p.add_argument("--ms-t0", dest="tail_t0", type=float)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("admissible", help="admissibility / positivity verdict")
    common(p)
    p.add_argument("--assumptions", choices=["AI_AII", "AIII"])
    p.set_defaults(func=cmd_admissible)

    p = sub.add_parser("empirical", help="empirical-depth zero experiment")
    common(p, stochastic=True)
    p.add_argument("--family", help="direction family (coordinates)")
    p.add_argument("--n", type=int)
    p.add_argument("--K", type=int)
    p.add_argument("--seeds", type=int)
    p.set_defaults(func=cmd_empirical)

    p = sub.add_parser("simplicial", help="block simplicial depth experiment")
    common(p, stochastic=True)
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--kmax", type=int)
    p.add_argument("--seeds", type=int)
    p.add_argument("--budget", type=int)
    p.add_argument("--mc-draws", dest="mc_draws", type=int)
    p.set_defaults(func=cmd_simplicial)

    p = sub.add_parser("plotdata", help="convert summaries to plot series")
    p.add_argument("--input", required=True, help="summary.json to convert")
    p.add_argument("--config", help="JSON config; flags override it")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_plotdata)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DepthLabError, ValueError, KeyError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
