"""Model files: UTF-8 JSON with 1-based indices and scalar expressions in x1..xn.

Blocks (all optional except ``n``)::

    {"n": 3,
     "H": [{"indices": [1, 2, 3], "value": "x1"}],
     "connection": {"Gamma_TT": [{"indices": [1, 1, 2], "value": "x2"}], ...},
     "K": [{"indices": [nu, rho, mu], "value": "..."}],
     "dirac": {"rho_T": [[...]], "rho_Tstar": [[...]]} | {"type": "tangent"} | {"type": "poisson", "pi": [[...]]},
     "metric": {"g": [[...]], "B": [[...]]},
     "canonical": {"Gamma": "levi-civita" | [...], "V_TsT": [...]},
     "algebroid": {"rank": r, "rho": [[...]], "f": [{"indices": [c, a, b], ...}], "connection": [...]},
     "seed": 0}

A connection on a general bundle uses {"rank": r, "fibre_degree": k, "Gamma": [...], "V": [...]}
with indices [mu, alpha, beta].
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .algebroid import AlgebroidConnection, AlgebroidModel
from .connection import TANGENT_BLOCKS, GenConnection
from .courant import CourantModel
from .dirac import DiracStructure
from .ktensors import AffineConnectionK
from .rational import ExpressionError, RationalFunction, parse_scalar
from .ricci import CanonicalD, GeneralizedMetric, levi_civita


class ModelError(ValueError):
    """Invalid model file (exit code 2)."""


def _scalar(value, n, where):
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise ModelError(f"{where}: value must be an expression string or integer")
    try:
        return parse_scalar(str(value), n)
    except ExpressionError as exc:
        raise ModelError(f"{where}: {exc}") from None
    except ZeroDivisionError:
        raise ModelError(f"{where}: division by zero") from None


def _entries(items, n, arity, bounds, where) -> dict:
    if not isinstance(items, list):
        raise ModelError(f"{where} must be a list of {{indices, value}} entries")
    out = {}
    for k, item in enumerate(items):
        loc = f"{where}[{k}]"
        if not isinstance(item, dict) or set(item) != {"indices", "value"}:
            raise ModelError(f"{loc}: expected keys 'indices' and 'value'")
        idx = item["indices"]
        if not isinstance(idx, list) or len(idx) != arity or not all(isinstance(i, int) for i in idx):
            raise ModelError(f"{loc}: indices must be {arity} integers")
        if not all(1 <= i <= b for i, b in zip(idx, bounds)):
            raise ModelError(f"{loc}: index out of range {idx}")
        key = tuple(i - 1 for i in idx)
        if key in out:
            raise ModelError(f"{loc}: duplicate entry {idx}")
        out[key] = _scalar(item["value"], n, loc)
    return out


def _matrix(rows, n, shape, where):
    if not isinstance(rows, list) or len(rows) != shape[0] or \
            any(not isinstance(r, list) or len(r) != shape[1] for r in rows):
        raise ModelError(f"{where} must be a {shape[0]}x{shape[1]} array")
    return [[_scalar(v, n, f"{where}[{i + 1}][{j + 1}]") for j, v in enumerate(r)] for i, r in enumerate(rows)]


@dataclass
class Model:
    n: int
    courant: CourantModel
    connection: GenConnection | None = None
    K: AffineConnectionK | None = None
    dirac: DiracStructure | None = None
    metric: GeneralizedMetric | None = None
    canonical: CanonicalD | None = None
    algebroid: AlgebroidModel | None = None
    algebroid_connection: AlgebroidConnection | None = None
    seed: int = 0

    def require(self, *names):
        missing = [nm for nm in names if getattr(self, nm) is None]
        if missing:
            raise ModelError(f"model lacks required block(s): {', '.join(missing)}")


KNOWN = {"n", "H", "connection", "K", "dirac", "metric", "canonical", "algebroid", "seed"}


def parse_model(data: Any) -> Model:
    if not isinstance(data, dict):
        raise ModelError("model must be a JSON object")
    extra = set(data) - KNOWN
    if extra:
        raise ModelError(f"unknown top-level key(s): {', '.join(sorted(extra))}")
    n = data.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ModelError("'n' must be a positive integer")
    try:
        courant = CourantModel(n, _entries(data.get("H", []), n, 3, (n,) * 3, "H"))
    except ValueError as exc:
        if isinstance(exc, ModelError):
            raise
        raise ModelError(f"H: {exc}") from None
    model = Model(n, courant)
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ModelError("'seed' must be an integer")
    model.seed = seed
    if "connection" in data:
        model.connection = _parse_connection(data["connection"], n)
    if "K" in data:
        model.K = AffineConnectionK(n, _entries(data["K"], n, 3, (n,) * 3, "K"))
    if "dirac" in data:
        model.dirac = _parse_dirac(data["dirac"], n)
    if "metric" in data:
        blk = data["metric"]
        if not isinstance(blk, dict) or "g" not in blk or set(blk) - {"g", "B"}:
            raise ModelError("metric must be {'g': [[...]], 'B': [[...]]}")
        g = _matrix(blk["g"], n, (n, n), "metric.g")
        B = _matrix(blk["B"], n, (n, n), "metric.B") if "B" in blk else None
        try:
            model.metric = GeneralizedMetric(g, B)
        except ValueError as exc:
            raise ModelError(f"metric: {exc}") from None
    if "canonical" in data:
        model.canonical = _parse_canonical(data["canonical"], model)
    if "algebroid" in data:
        model.algebroid, model.algebroid_connection = _parse_algebroid(data["algebroid"], n)
    return model


def _parse_connection(blk, n) -> GenConnection:
    if not isinstance(blk, dict):
        raise ModelError("connection must be an object")
    if "Gamma" in blk or "V" in blk or "rank" in blk:
        if set(blk) - {"rank", "fibre_degree", "Gamma", "V"}:
            raise ModelError("general connection keys are rank, fibre_degree, Gamma, V")
        r = blk.get("rank")
        if not isinstance(r, int) or r < 1:
            raise ModelError("connection.rank must be a positive integer")
        deg = blk.get("fibre_degree", -1 if r == 2 * n else 0)
        if not isinstance(deg, int):
            raise ModelError("connection.fibre_degree must be an integer")
        G = _entries(blk.get("Gamma", []), n, 3, (n, r, r), "connection.Gamma")
        V = _entries(blk.get("V", []), n, 3, (n, r, r), "connection.V")
        return GenConnection(n, r, G, V, fibre_degree=deg)
    unknown = set(blk) - set(TANGENT_BLOCKS)
    if unknown:
        raise ModelError(f"unknown connection block(s): {', '.join(sorted(unknown))}")
    blocks = {name: _entries(items, n, 3, (n,) * 3, f"connection.{name}") for name, items in blk.items()}
    return GenConnection.tangent(n, blocks)


def _parse_dirac(blk, n) -> DiracStructure:
    if not isinstance(blk, dict):
        raise ModelError("dirac must be an object")
    try:
        kind = blk.get("type")
        if kind == "tangent":
            return DiracStructure.tangent(n)
        if kind == "poisson":
            return DiracStructure.poisson(_matrix(blk.get("pi"), n, (n, n), "dirac.pi"))
        if kind is not None:
            raise ModelError(f"unknown dirac type {kind!r}")
        if set(blk) != {"rho_T", "rho_Tstar"}:
            raise ModelError("dirac needs rho_T and rho_Tstar (or a type shorthand)")
        return DiracStructure(_matrix(blk["rho_T"], n, (n, n), "dirac.rho_T"),
                              _matrix(blk["rho_Tstar"], n, (n, n), "dirac.rho_Tstar"))
    except ModelError:
        raise
    except ValueError as exc:
        raise ModelError(f"dirac: {exc}") from None


def _dense(entries, n):
    z = RationalFunction.zero(n)
    arr = [[[z] * n for _ in range(n)] for _ in range(n)]
    for (i, j, k), v in entries.items():
        arr[i][j][k] = v
    return arr


def _parse_canonical(blk, model: Model) -> CanonicalD:
    n = model.n
    if not isinstance(blk, dict) or set(blk) - {"Gamma", "V_TsT", "gamma", "V_TTs"}:
        raise ModelError("canonical keys are Gamma, V_TsT (gamma, V_TTs must vanish)")
    G = blk.get("Gamma", "levi-civita")
    if G == "levi-civita":
        if model.metric is None:
            raise ModelError("canonical.Gamma = levi-civita needs a metric block")
        Gamma = levi_civita(model.metric.g)
    else:
        Gamma = _dense(_entries(G, n, 3, (n,) * 3, "canonical.Gamma"), n)
    parts = {k: _dense(_entries(blk.get(k, []), n, 3, (n,) * 3, f"canonical.{k}"), n)
             for k in ("V_TsT", "gamma", "V_TTs")}
    try:
        return CanonicalD(model.courant, Gamma, parts["V_TsT"], parts["gamma"], parts["V_TTs"])
    except ValueError as exc:
        raise ModelError(f"canonical: {exc}") from None


def _parse_algebroid(blk, n):
    if not isinstance(blk, dict) or set(blk) - {"rank", "rho", "f", "connection"}:
        raise ModelError("algebroid keys are rank, rho, f, connection")
    r = blk.get("rank")
    if not isinstance(r, int) or r < 1:
        raise ModelError("algebroid.rank must be a positive integer")
    rho = _matrix(blk.get("rho"), n, (n, r), "algebroid.rho")
    f = _entries(blk.get("f", []), n, 3, (r, r, r), "algebroid.f")
    try:
        alg = AlgebroidModel(n, r, rho, f)
    except ValueError as exc:
        raise ModelError(f"algebroid: {exc}") from None
    conn = None
    if "connection" in blk:
        conn = AlgebroidConnection(r, n, _entries(blk["connection"], n, 3, (r, r, r), "algebroid.connection"))
    return alg, conn


def load_model(path) -> Model:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return parse_model(data)
