"""Config loading, content digests and deterministic file formats."""
from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import numpy as np

from . import __version__, errors, model


def _require(d: dict, key: str, where: str):
    if not isinstance(d, dict) or key not in d:
        raise errors.ConfigError(f"missing key {where}.{key}")
    return d[key]


def parse_config(raw: Dict[str, Any]) -> model.ValidatedConfig:
    """Build and validate a configuration from the decoded JSON document."""
    try:
        o = _require(raw, "oscillator", "config")
        osc = model.OscillatorParams(omega0=float(_require(o, "omega0", "oscillator")),
                                     beta=float(o.get("beta", 0.0)), m=float(o.get("m", 1.0)))
        c = _require(raw, "condensate", "config")
        mode = c.get("mode", "continuum")
        if mode == "discrete":
            bec = model.CondensateParams(mode=mode, N=_require(c, "N", "condensate"),
                                         omega1=float(_require(c, "omega1", "condensate")))
        else:
            bec = model.CondensateParams(mode=mode, delta_phi=float(c.get("delta_phi", 0.0)))
        s = _require(raw, "state", "config")
        if "coherent" in s:
            cs = s["coherent"]
            state = model.Coherent(float(_require(cs, "x0", "state.coherent")), float(cs.get("p0", 0.0)))
        elif "coefficients" in s:
            state = model.NumberBasis([complex(re, im) for re, im in s["coefficients"]])
        else:
            raise errors.ConfigError("state needs 'coherent' or 'coefficients'")
        g = _require(raw, "grid", "config")
        kw = {k: g[k] for k in ("basis_size", "quad_nodes", "quad_rule", "quad_step") if k in g}
        t_min, t_max = float(g.get("t_min", 0.0)), float(_require(g, "t_max", "grid"))
        grid = model.SimulationGrid(np.linspace(t_min, t_max, int(_require(g, "n_samples", "grid"))), **kw)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, errors.ConfigError):
            raise
        raise errors.ConfigError(f"malformed config: {exc}") from exc
    cfg = model.validate(osc, bec, state, grid)
    cfg.metadata.update(raw.get("metadata", {}))
    return cfg


def read_json(path) -> Dict[str, Any]:
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise errors.ConfigError(f"{path}: invalid JSON ({exc})") from exc


def load_config(path) -> Tuple[model.ValidatedConfig, Dict[str, Any]]:
    raw = read_json(path)
    return parse_config(raw), raw


def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)


def digest(*parts) -> str:
    """sha256 over the canonical JSON of the run inputs."""
    return hashlib.sha256(canonical(list(parts)).encode()).hexdigest()


def atomic_write(path, text: str) -> None:
    """Write to a temporary sibling and rename, so failures leave no partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt(x: float) -> str:
    return repr(float(x))


def header(meta: Dict[str, Any]) -> str:
    meta = {"tool": f"gatekeeper {__version__}", **meta}
    return "".join(f"# {k}={v}\n" for k, v in meta.items())


def format_csv(columns: Sequence[str], data: Iterable[Sequence[float]], meta: Dict[str, Any]) -> str:
    lines = [header(meta), ",".join(columns) + "\n"]
    lines.extend(",".join(fmt(v) for v in row) + "\n" for row in data)
    return "".join(lines)


def read_csv(path) -> Tuple[Dict[str, str], List[str], np.ndarray]:
    """Return (header metadata, column names, data rows)."""
    meta: Dict[str, str] = {}
    cols: List[str] = []
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                meta[k.strip()] = v.strip()
            elif not cols:
                cols = [c.strip() for c in line.split(",")]
            else:
                rows.append([float(v) for v in line.split(",")])
    data = np.array(rows, dtype=float).reshape(-1, len(cols))
    return meta, cols, data


def format_wigner(grid, meta: Dict[str, Any]) -> str:
    """Long-format x,p,w table, x varying slowest."""
    X, P = np.meshgrid(grid.x, grid.p, indexing="ij")
    return format_csv(["x", "p", "w"], zip(X.ravel(), P.ravel(), grid.W.ravel()), meta)


def _num(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def dump_timescales(scales: Dict[str, float]) -> str:
    """JSON with infinities written as the strings "inf"/"-inf"."""
    return json.dumps({k: _num(v) for k, v in scales.items()}, indent=2, sort_keys=True) + "\n"


def read_timescales(path) -> Dict[str, float]:
    raw = read_json(path)
    return {k: float(v) for k, v in raw.items()}
