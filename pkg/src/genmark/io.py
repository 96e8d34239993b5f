"""File formats: scenario CSV, kernel CSV, run configuration, frontier output.

Scenario CSV::

    prob,asset_1,asset_2,...,asset_n
    0.5,1.0,0.0
    0.5,1.0,4.0

Run configuration is a flat ``key = value`` document; ``#`` starts a
comment, blank lines are ignored and ``objective`` may repeat. Keys::

    market            path to a scenario CSV (relative to the config file)
    domain.kind       simplex | ball
    domain.n          number of assets (defaults to the market's)
    domain.N          grid resolution
    domain.samples    random sample count (instead of domain.N)
    domain.seed       sampling seed
    domain.center     comma-separated ball center
    domain.radius     ball radius
    preset            preset name (see genmark.domain.PRESETS)
    objective         <maximize|minimize> <Kind> [ell=..] [t=..] [policy=error|treat_as_zero]
    epsilon           comparison tolerance
    sd.ell            order for the sd / markowitz-sd presets and sdom
    sd.samples        interior samples per interval for order >= 3 comparisons
    output.frontier   frontier CSV path
    output.plot       plot-data TSV path
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import market as mk
from .errors import ValidationError


def _floats(row: Sequence[str], lineno: int, path) -> list[float]:
    try:
        return [float(v) for v in row]
    except ValueError:
        raise ValidationError(f"{path}: line {lineno}: non-numeric value in {row!r}") from None


def read_market_csv(path) -> mk.ScenarioMarket:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValidationError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    n = len(header) - 1
    expected = ["prob"] + [f"asset_{i}" for i in range(1, n + 1)]
    if n < 1 or header != expected:
        raise ValidationError(f"{path}: line 1: header must be {','.join(expected) if n >= 1 else 'prob,asset_1,...'}")
    probs, cols = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != n + 1:
            raise ValidationError(f"{path}: line {lineno}: expected {n + 1} fields, got {len(row)}")
        vals = _floats(row, lineno, path)
        probs.append(vals[0])
        cols.append(vals[1:])
    if not probs:
        raise ValidationError(f"{path}: no scenario rows")
    return mk.build_market(probs, np.array(cols).T)


def format_float(v: float) -> str:
    return repr(float(v))


def write_market_csv(market: mk.ScenarioMarket, path) -> None:
    n = market.asset_count
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["prob"] + [f"asset_{i}" for i in range(1, n + 1)])
        for j in range(market.scenario_count):
            w.writerow([format_float(market.probabilities[j])] + [format_float(v) for v in market.returns[:, j]])


def generate_market(n: int, m: int, seed: int, low: float = -0.1, high: float = 0.2) -> mk.ScenarioMarket:
    """Synthetic market: returns uniform in [low, high], equal scenario probabilities."""
    if n < 1 or m < 1:
        raise ValidationError("need at least one asset and one scenario")
    if not low < high:
        raise ValidationError("return range must have low < high")
    rng = np.random.default_rng(seed)
    return mk.build_market(np.full(m, 1.0 / m), rng.uniform(low, high, size=(n, m)))


def read_kernel_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    mat = [_floats(r, i, path) for i, r in enumerate(rows, start=1)]
    k = len(mat)
    for i, r in enumerate(mat, start=1):
        if len(r) != k:
            raise ValidationError(f"{path}: line {i}: expected {k} values for a square matrix, got {len(r)}")
    if k == 0:
        raise ValidationError(f"{path}: empty kernel matrix")
    return np.array(mat)


CONFIG_KEYS = {
    "market", "domain.kind", "domain.n", "domain.N", "domain.samples", "domain.seed",
    "domain.center", "domain.radius", "preset", "objective", "epsilon", "sd.ell",
    "sd.samples", "output.frontier", "output.plot",
}


def read_config(path) -> dict:
    """Parse a run configuration into a dict; ``objective`` maps to a list of lines."""
    base = Path(path).parent
    cfg: dict = {"objective": []}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}: line {lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in CONFIG_KEYS:
                raise ValidationError(f"{path}: line {lineno}: unknown key {key!r}")
            if key == "objective":
                cfg["objective"].append(value)
            elif key in cfg:
                raise ValidationError(f"{path}: line {lineno}: duplicate key {key!r}")
            elif key in ("market", "output.frontier", "output.plot"):
                cfg[key] = str(base / value)
            else:
                cfg[key] = value
    if not cfg["objective"]:
        del cfg["objective"]
    return cfg


def parse_objective(text: str) -> dict:
    """``minimize CentralMoment ell=3 policy=error`` -> objective entry mapping."""
    parts = text.split()
    if len(parts) < 2:
        raise ValidationError(f"objective {text!r}: expected '<direction> <Kind> [key=value ...]'")
    entry: dict = {"direction": parts[0], "kind": parts[1]}
    for item in parts[2:]:
        if "=" not in item:
            raise ValidationError(f"objective {text!r}: bad option {item!r}")
        k, v = item.split("=", 1)
        if k == "ell":
            entry["ell"] = int(v)
        elif k == "t":
            entry["t"] = float(v)
        elif k == "p":
            entry["p"] = int(v)
        elif k == "policy":
            entry["degenerate_policy"] = v
        else:
            raise ValidationError(f"objective {text!r}: unknown option {k!r}")
    return entry


def parse_weights(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ValidationError(f"weights {text!r} are not a comma-separated list of numbers") from None


def write_frontier(path_or_fh, candidates, result, n: int) -> None:
    header = ["index"] + [f"w_{i}" for i in range(1, n + 1)] + list(result.labels) + ["maximal", "dominator"]
    flags = result.maximal_flags
    lines = [",".join(header)]
    for i, x in enumerate(candidates):
        dom = result.dominator_map.get(i)
        row = [str(i)] + [format_float(w) for w in x.weights]
        row += [format_float(v) for v in result.values[i]]
        row += ["1" if flags[i] else "0", "" if dom is None else str(dom)]
        lines.append(",".join(row))
    _write(path_or_fh, "\n".join(lines) + "\n")


def write_plot(path_or_fh, result, x_col: int, y_col: int) -> None:
    labels = result.labels
    lines = ["\t".join([labels[x_col], labels[y_col], "maximal"])]
    for i, flag in enumerate(result.maximal_flags):
        v = result.values[i]
        lines.append("\t".join([format_float(v[x_col]), format_float(v[y_col]), "1" if flag else "0"]))
    _write(path_or_fh, "\n".join(lines) + "\n")


def read_frontier(path) -> tuple[list[tuple[float, ...]], list[bool], list[Optional[int]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    n = sum(1 for h in header if h.startswith("w_"))
    weights, flags, doms = [], [], []
    for row in rows[1:]:
        weights.append(tuple(float(v) for v in row[1 : 1 + n]))
        flags.append(row[-2] == "1")
        doms.append(int(row[-1]) if row[-1] else None)
    return weights, flags, doms


def _write(path_or_fh, text: str) -> None:
    if hasattr(path_or_fh, "write"):
        path_or_fh.write(text)
    else:
        with open(path_or_fh, "w", newline="") as fh:
            fh.write(text)
