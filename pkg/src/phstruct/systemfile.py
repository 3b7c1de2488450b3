"""JSON documents describing structures, systems and simulation scenarios.

A document looks like::

    {
      "layout": {"n": 1, "r": 1, "p": 1},
      "structures": {
        "D": {"kind": "dirac", "representation": "kernel",
              "matrices": {"K": [[1], [0], [0]], "L": ..., "K_R": ..., ...}},
        "L": {"kind": "lagrange", "representation": "PS",
              "matrices": {"P": [[1]], "S": [[1]]}},
        "R": {"kind": "resistive", "representation": "graph",
              "matrices": {"M": [[2]]}}
      },
      "system": {"type": "DLR", "D": "D", "L": "L", "R": "R"},
      "scenario": {"h": 0.01, "t_end": 5.0,
                   "input": {"times": [0, 5], "values": [[0], [1]]},
                   "initial_guess": [1, 0, 0, 0], "method": "implicit_midpoint"}
    }

Matrices are row-major nested lists; an empty block may be written as
``{"shape": [3, 0], "data": []}``. A structure may override its pairs with
``"pairs": [["x", 2], ["R", 1]]``; otherwise they follow from ``kind`` and
the layout.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConditionViolation, DimensionError, PhsError
from .linalg_core import as_matrix, resolve_tol
from .phdae import PhDaeDLR, PhDaeML
from .simulate import Scenario
from .structures import (
    LinearStructure,
    PairingLayout,
    WeakResistiveWarning,
    check_resistive,
    dirac_from_kernel,
    graph_structure,
    lagrange_from_PS,
    monotone_from_image,
)

__all__ = [
    "KINDS",
    "REPRESENTATIONS",
    "FileFormatError",
    "LoadedStructure",
    "read_document",
    "parse_matrix",
    "matrix_to_json",
    "default_pairs",
    "build_structure",
    "load_structures",
    "build_system",
    "build_scenario",
    "structure_entry",
    "dump_document",
]

KINDS = ("dirac", "lagrange", "resistive", "monotone")
REPRESENTATIONS = {
    "dirac": ("kernel", "graph", "image"),
    "lagrange": ("PS", "graph", "image"),
    "resistive": ("PS", "graph", "image"),
    "monotone": ("image", "graph", "kernel"),
}
_KERNEL_BLOCKS = (("K", "L", "x"), ("K_R", "L_R", "R"), ("K_P", "L_P", "P"))


class FileFormatError(PhsError):
    """The document cannot be read or does not follow the format."""


def read_document(source):
    """Parse a path, file object, JSON string or dict into a document dict."""
    if isinstance(source, dict):
        doc = source
    else:
        try:
            if hasattr(source, "read"):
                doc = json.load(source)
            else:
                with open(source) as fh:
                    doc = json.load(fh)
        except OSError as exc:
            raise FileFormatError(f"cannot read {source}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise FileFormatError("document must be a JSON object")
    if "layout" not in doc:
        raise FileFormatError("document has no 'layout'")
    lay = doc["layout"]
    try:
        n, r, p = (int(lay.get(k, 0)) for k in ("n", "r", "p"))
    except (TypeError, ValueError, AttributeError) as exc:
        raise FileFormatError(f"bad layout: {lay!r}") from exc
    if min(n, r, p) < 0:
        raise FileFormatError("layout dimensions must be nonnegative")
    if not isinstance(doc.get("structures", {}), dict):
        raise FileFormatError("'structures' must be an object")
    return doc


def parse_matrix(value, rows=None, cols=None, name="matrix"):
    """Row-major nested list or ``{"shape": [r, c], "data": [...]}``."""
    try:
        if isinstance(value, dict):
            shape = tuple(int(v) for v in value["shape"])
            data = np.asarray(value.get("data", []), dtype=float).ravel()
            if len(shape) != 2 or data.size != shape[0] * shape[1]:
                raise DimensionError(f"{name}: data does not match shape {shape}")
            value = data.reshape(shape)
        return as_matrix(value, rows, cols, name=name)
    except (TypeError, KeyError) as exc:
        raise FileFormatError(f"{name}: cannot parse matrix ({exc})") from exc
    except ValueError as exc:
        if isinstance(exc, PhsError):
            raise
        raise FileFormatError(f"{name}: {exc}") from exc


def matrix_to_json(M):
    M = np.asarray(M, dtype=float)
    if M.ndim == 2 and M.size == 0:
        return {"shape": list(M.shape), "data": []}
    return M.tolist()


def default_pairs(kind, n, r, p):
    if kind == "dirac":
        return PairingLayout.standard(n, r, p)
    if kind == "lagrange":
        return PairingLayout.single(n, "x")
    if kind == "resistive":
        return PairingLayout.single(r, "R")
    return PairingLayout.standard(n, 0, p)


def _layout_for(entry, kind, dims):
    if "pairs" in entry:
        try:
            return PairingLayout(tuple((str(a), int(b)) for a, b in entry["pairs"]))
        except (TypeError, ValueError) as exc:
            raise FileFormatError(f"bad pairs {entry['pairs']!r}") from exc
    return default_pairs(kind, *dims)


def _get(mats, key, rows=None, cols=None, optional=False):
    if key not in mats:
        if optional:
            return None
        raise FileFormatError(f"missing matrix {key!r}")
    return parse_matrix(mats[key], rows, cols, name=key)


def _require(S, flag, condition):
    if not S.flags[flag]:
        c = S.classification
        measure = {"dirac": c.plus_residual, "lagrange": c.minus_residual,
                   "maximal_monotone": -c.min_plus_eig}[flag]
        raise ConditionViolation(
            condition, f"structure is not {flag.replace('_', ' ')} "
            f"(dim {c.dim}/{c.expected_dim}, plus residual {c.plus_residual:.3e}, "
            f"minus residual {c.minus_residual:.3e}, min eig {c.min_plus_eig:.3e})",
            residual=max(float(c.expected_dim - c.dim), measure),
        )
    return S


def build_structure(entry, dims, tol=None):
    """Construct and validate one structure entry.

    ``dims`` is ``(n, r, p)`` from the document layout.
    """
    tol = resolve_tol(tol)
    kind = entry.get("kind")
    rep = entry.get("representation")
    if kind not in KINDS:
        raise FileFormatError(f"unknown kind {kind!r}; expected one of {KINDS}")
    if rep not in REPRESENTATIONS[kind]:
        raise FileFormatError(
            f"representation {rep!r} not allowed for kind {kind!r}; "
            f"expected one of {REPRESENTATIONS[kind]}")
    mats = entry.get("matrices", {})
    if not isinstance(mats, dict):
        raise FileFormatError("'matrices' must be an object")
    layout = _layout_for(entry, kind, dims)
    N = layout.size

    if rep == "graph":
        graph_kind = {"dirac": "skew", "lagrange": "symmetric",
                      "resistive": "symmetric", "monotone": "monotone"}[kind]
        S = graph_structure(_get(mats, "M", N, N), graph_kind, layout, tol)
    elif rep == "image" and "W" in mats:
        S = LinearStructure(layout, _get(mats, "W", layout.ambient), tol)
    elif rep == "image" and kind == "monotone":
        n, p = layout.dim("x"), layout.dim("P")
        Z = _get(mats, "Z", cols=n)
        k = Z.shape[0]
        S = monotone_from_image(
            Z, _get(mats, "Y", k, n),
            _get(mats, "Z_P", k, p, optional=True), _get(mats, "Y_P", k, p, optional=True),
            layout, tol)
    elif rep == "image":
        raise FileFormatError("image representation needs a matrix 'W'")
    elif rep == "PS":
        d = layout.size
        S = lagrange_from_PS(_get(mats, "P", d, d), _get(mats, "S", d, d), tol,
                             name=layout.names[0])
    else:  # kernel
        blocks = {}
        rows = None
        for kf, ke, pair in _KERNEL_BLOCKS:
            d = layout.dim(pair)
            for key in (kf, ke):
                blk = _get(mats, key, rows, d, optional=True)
                if blk is None:
                    if d:
                        raise FileFormatError(f"missing matrix {key!r}")
                    continue
                rows = blk.shape[0]
                blocks[key] = blk
        if kind == "dirac":
            S = dirac_from_kernel(layout=layout, tol=tol, **blocks)
        else:
            K = np.zeros((rows or 0, layout.ambient))
            for kf, ke, pair in _KERNEL_BLOCKS:
                if pair in layout:
                    if kf in blocks:
                        K[:, layout.flow_index(pair)] = blocks[kf]
                    if ke in blocks:
                        K[:, layout.effort_index(pair)] = blocks[ke]
            S = LinearStructure.from_kernel(layout, K, tol, supplied_kernel=K)

    if kind == "dirac":
        _require(S, "dirac", "dirac")
    elif kind == "lagrange":
        _require(S, "lagrange", "lagrange")
    elif kind == "resistive":
        check_resistive(S, tol)
    else:
        _require(S, "maximal_monotone", "maximal_monotone")
    return S


@dataclass
class LoadedStructure:
    name: str
    kind: str
    representation: str
    structure: LinearStructure | None = None
    error: ConditionViolation | None = None
    warnings: list = field(default_factory=list)

    @property
    def valid(self):
        return self.structure is not None


def load_structures(doc, tol=None, strict=True):
    """Build every structure of a document.

    With ``strict`` the first condition violation is raised; otherwise it is
    recorded on the returned :class:`LoadedStructure`. Format errors are
    always raised.
    """
    dims = tuple(int(doc["layout"].get(k, 0)) for k in ("n", "r", "p"))
    out = {}
    for name, entry in doc.get("structures", {}).items():
        if not isinstance(entry, dict):
            raise FileFormatError(f"structure {name!r} must be an object")
        item = LoadedStructure(name, entry.get("kind"), entry.get("representation"))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", WeakResistiveWarning)
            try:
                item.structure = build_structure(entry, dims, tol)
            except DimensionError as exc:
                raise FileFormatError(f"structure {name!r}: {exc}") from exc
            except FileFormatError as exc:
                raise FileFormatError(f"structure {name!r}: {exc}") from exc
            except ConditionViolation as exc:
                if strict:
                    raise
                item.error = exc
        item.warnings = [str(w.message) for w in caught]
        out[name] = item
    return out


def build_system(doc, structures=None, tol=None):
    """Assemble the system bound in ``doc["system"]``."""
    if "system" not in doc:
        raise FileFormatError("document has no 'system'")
    entry = doc["system"]
    structures = load_structures(doc, tol) if structures is None else structures

    def pick(role, optional=False):
        name = entry.get(role)
        if name is None:
            if optional:
                return None
            raise FileFormatError(f"system role {role!r} is not bound")
        if name not in structures:
            raise FileFormatError(f"system role {role!r} names unknown structure {name!r}")
        item = structures[name]
        if not item.valid:
            raise item.error
        return item.structure

    kind = str(entry.get("type", "")).upper()
    try:
        if kind == "DLR":
            return PhDaeDLR(pick("D"), pick("L"), pick("R", optional=True))
        if kind == "ML":
            return PhDaeML(pick("M"), pick("L"))
    except DimensionError as exc:
        raise FileFormatError(f"system: {exc}") from exc
    raise FileFormatError(f"system type must be 'DLR' or 'ML', got {entry.get('type')!r}")


def build_scenario(doc, realization, overrides=None):
    """Scenario from ``doc["scenario"]``; ``overrides`` replaces individual keys."""
    entry = dict(doc.get("scenario", {}))
    entry.update({k: v for k, v in (overrides or {}).items() if v is not None})
    if "h" not in entry or "t_end" not in entry:
        raise FileFormatError("scenario needs 'h' and 't_end'")
    inp = entry.get("input")
    times = values = None
    p = realization.n_inputs
    if inp:
        times = np.asarray(inp.get("times", []), dtype=float)
        values = parse_matrix(inp.get("values", []), times.size, p, name="input values")
    guess = entry.get("initial_guess")
    hold_z = False
    if guess is not None:
        guess = np.asarray(guess, dtype=float).ravel()
        nw, nz = realization.n_states, realization.n_z
        if guess.size == nz and nw != nz:
            # only z given: fill in the auxiliary states, keep z if possible
            guess = np.concatenate([guess, np.zeros(nw - nz)])
            hold_z = True
    try:
        return Scenario(realization, float(entry["h"]), float(entry["t_end"]), times, values,
                        guess, float(entry.get("t0", 0.0)),
                        entry.get("method", "implicit_midpoint"), hold_z)
    except ValueError as exc:
        raise FileFormatError(f"scenario: {exc}") from exc


def structure_entry(S, kind, representation="image"):
    """Serialize a structure; ``image`` writes its orthonormal basis."""
    entry = {"kind": kind, "representation": representation,
             "pairs": [[nm, d] for nm, d in S.layout.pairs]}
    if representation == "graph":
        entry["matrices"] = {"M": matrix_to_json(S.params["M"])}
    else:
        entry["matrices"] = {"W": matrix_to_json(S.basis)}
    return entry


def dump_document(doc, fh=None):
    text = json.dumps(doc, indent=2, sort_keys=False)
    if fh is None:
        return text
    fh.write(text + "\n")
    return text
