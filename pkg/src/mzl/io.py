"""Loading typed values from JSON files or inline text.

Every JSON object may carry a ``kind`` field; when present it must match the
expected kind.  Strings ending in ``.json`` inside a document are file
references relative to that document.
"""
from __future__ import annotations

import json
import os
from typing import Any, Optional, Tuple

from . import groth, lattice, series
from .groth import ClassSymbol, GrothElement, Specialization
from .identity import IdentityInstance
from .jets import JetError, PolySpec, condition_from_json, poly_from_json, weight_from_json
from .zeta import ConeComponent, MultiResolutionData, ResolutionData, ResolutionError, resolution_from_json


class InputError(ValueError):
    pass


def read_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise InputError(f"{path}: no such file") from exc
    except UnicodeDecodeError as exc:
        raise InputError(f"{path}: not UTF-8 ({exc})") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _source(arg: str) -> Tuple[Any, str, str]:
    """Return ``(payload, base_dir, label)``; non-files are returned as text."""
    if os.path.isfile(arg):
        base = os.path.dirname(os.path.abspath(arg))
        if arg.endswith(".json"):
            return read_json(arg), base, arg
        with open(arg, encoding="utf-8") as fh:
            return fh.read().strip(), base, arg
    if arg.endswith(".json"):
        raise InputError(f"{arg}: no such file")
    return arg, os.getcwd(), "<text>"


def _deref(obj, base: str):
    if isinstance(obj, str) and obj.endswith(".json"):
        path = obj if os.path.isabs(obj) else os.path.join(base, obj)
        return read_json(path), os.path.dirname(path)
    return obj, base


def _kind(obj, *kinds):
    if isinstance(obj, dict) and "kind" in obj and obj["kind"] not in kinds:
        raise InputError(f"expected kind {' or '.join(kinds)}, got {obj['kind']!r}")


# -------------------------------------------------------------- per kind

def groth_value(obj) -> GrothElement:
    _kind(obj, "groth")
    if isinstance(obj, dict) and "text" in obj:
        obj = obj["text"]
    return groth.from_json(obj)


def series_value(obj) -> series.RationalSeries:
    _kind(obj, "series")
    return series.from_json(obj)


def cell_value(obj) -> lattice.Cell:
    _kind(obj, "cell")
    return lattice.cell_from_json(obj)


def resolution_value(obj):
    _kind(obj, "resolution", "multi-resolution")
    return resolution_from_json(obj)


def specialization_value(obj) -> Specialization:
    _kind(obj, "specialization")
    syms = {}
    for key, val in obj.get("symbols", {}).items():
        e = groth.parse(key)
        found = e.symbols()
        if len(found) != 1 or len(e.items()) != 1:
            raise InputError(f"specialization key {key!r} is not a single symbol")
        sym = next(iter(found))
        v = groth.from_json(val)
        poly = v.as_poly()
        if poly is None:
            raise InputError(f"specialization value for {key!r} must be a Laurent polynomial")
        syms[ClassSymbol(sym.name, sym.mu_order)] = poly
    q = obj.get("q")
    return Specialization(syms, int(q) if q is not None else None)


def poly_value(obj, d: Optional[int] = None) -> PolySpec:
    _kind(obj, "poly")
    return poly_from_json(obj, d)


def condition_value(obj, f: Optional[PolySpec] = None):
    _kind(obj, "arc-condition")
    return condition_from_json(obj, f)


def weight_value(obj, d: int, f: Optional[PolySpec] = None):
    _kind(obj, "weight")
    terms = obj.get("terms", []) if isinstance(obj, dict) else obj
    return weight_from_json(terms, d, f)


def cone_data_value(obj, base: str):
    """List of ConeComponents, or ``(MultiResolutionData, theta)``."""
    _kind(obj, "cone-data")
    if "resolution" in obj:
        r, _ = _deref(obj["resolution"], base)
        t, _ = _deref(obj["theta"], base)
        res = resolution_value(r)
        if not isinstance(res, MultiResolutionData):
            raise InputError("cone data needs a multi-resolution (divisors with Nvec)")
        return res, cell_value(t)
    comps = []
    for i, c in enumerate(obj.get("components", [])):
        try:
            cell = lattice.cell_from_json(c["cell"])
            n = lattice.form_from_json(c["n"])
            alpha = tuple(lattice.form_from_json(a) for a in c.get("alpha", []))
            weight = lattice.form_from_json(c["weight"]) if "weight" in c else None
            comps.append(ConeComponent(groth.from_json(c.get("coeff", 1)), cell, n, alpha, weight))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"components[{i}]: {exc}") from exc
    return comps


def instance_value(obj, base: str) -> IdentityInstance:
    _kind(obj, "identity-instance")
    rf, _ = _deref(obj["res_f"], base)
    res_f = resolution_value(rf)
    if not isinstance(res_f, ResolutionData):
        raise InputError("res_f must be a plain resolution")
    rt = obj.get("res_ftilde")
    res_t = None
    if rt is not None:
        rt, _ = _deref(rt, base)
        res_t = resolution_value(rt)
    table = {}
    for label, images in obj.get("pullback", {}).items():
        table[label] = [(str(new), groth.from_json(fac)) for new, fac in images]
    poly = None
    if obj.get("poly") is not None:
        p, _ = _deref(obj["poly"], base)
        poly = poly_from_json(p, res_f.dim)
    return IdentityInstance(int(obj["d1"]), int(obj["d2"]), int(obj.get("d3", 0)), res_f, table, res_t, poly,
                            obj.get("name", ""))


_LOADERS = {
    "groth": lambda obj, base, **kw: groth_value(obj),
    "series": lambda obj, base, **kw: series_value(obj),
    "cell": lambda obj, base, **kw: cell_value(obj),
    "resolution": lambda obj, base, **kw: resolution_value(obj),
    "specialization": lambda obj, base, **kw: specialization_value(obj),
    "poly": lambda obj, base, **kw: poly_value(obj, kw.get("d")),
    "arc-condition": lambda obj, base, **kw: condition_value(obj, kw.get("f")),
    "weight": lambda obj, base, **kw: weight_value(obj, kw["d"], kw.get("f")),
    "cone-data": lambda obj, base, **kw: cone_data_value(obj, base),
    "identity-instance": lambda obj, base, **kw: instance_value(obj, base),
}


def load(arg: str, kind: str, **kw):
    """Load ``arg`` (a file path or inline text) as a value of ``kind``."""
    if kind not in _LOADERS:
        raise InputError(f"unknown input kind {kind!r}")
    payload, base, label = _source(arg)
    if isinstance(payload, str) and kind not in ("groth", "series", "poly"):
        raise InputError(f"{label}: expected a JSON file for {kind}")
    if kind == "poly" and isinstance(payload, str) and kw.get("d") is None:
        raise InputError(f"{label}: a text polynomial needs a JSON wrapper with 'd'")
    errs = (InputError, ValueError, KeyError, TypeError, ResolutionError, JetError,
            groth.GrothError, series.SeriesError, lattice.CellError)
    try:
        return _LOADERS[kind](payload, base, **kw)
    except errs as exc:
        msg = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
        raise InputError(f"{label}: {msg}") from exc
