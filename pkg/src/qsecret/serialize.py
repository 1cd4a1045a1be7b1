"""JSON encodings for every artifact the CLI reads or writes.

Complex scalars are ``[re, im]`` pairs, matrices row-major nested lists.
Floats are written with ``repr`` precision, so parsing an emitted file
reproduces the in-memory object exactly.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import InvariantError
from .infotheory import ClassicalChannel, IntrinsicResult, JointDistribution
from .measure import MeasurementSetting, Povm
from .qcore import DensityMatrix, PureTripartiteState
from .scenarios import SeparableDecomposition
from .witness import Witness


class ParseError(ValueError):
    """A file is not valid JSON or lacks required fields."""


def complex_array(a) -> list:
    a = np.asarray(a, dtype=np.complex128)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def parse_complex(obj) -> np.ndarray:
    a = np.asarray(obj, dtype=np.float64)
    if a.ndim == 0 or a.shape[-1] != 2:
        raise ParseError("complex entries must be [re, im] pairs")
    out = np.empty(a.shape[:-1], dtype=np.complex128)
    out.real, out.imag = a[..., 0], a[..., 1]  # keeps signed zeros
    return out


def _tuplify(x):
    return tuple(_tuplify(v) for v in x) if isinstance(x, list) else x


def _listify(x):
    return [_listify(v) for v in x] if isinstance(x, tuple) else x


def encode(obj) -> dict:
    if isinstance(obj, DensityMatrix):
        return {"type": "density_matrix", "dims": list(obj.dims), "matrix": complex_array(obj.matrix)}
    if isinstance(obj, PureTripartiteState):
        return {"type": "pure_tripartite_state", "dims": list(obj.dims),
                "amplitudes": complex_array(obj.amplitudes)}
    if isinstance(obj, Povm):
        return {"type": "povm", "dim": obj.dim, "labels": [_listify(l) for l in obj.labels],
                "effects": [complex_array(e) for e in obj.effects]}
    if isinstance(obj, MeasurementSetting):
        return {"observable": complex_array(obj.observable), "eigenvalues": obj.eigenvalues.tolist(),
                "projectors": [complex_array(p) for p in obj.projectors]}
    if isinstance(obj, Witness):
        return {"type": "witness", "dims": list(obj.dims), "operator": complex_array(obj.operator),
                "alice_settings": [encode(s) for s in obj.alice_settings],
                "bob_settings": [encode(s) for s in obj.bob_settings],
                "coeffs": obj.coeffs.tolist()}
    if isinstance(obj, JointDistribution):
        return {"type": "distribution", "alphabet_sizes": list(obj.alphabet_sizes),
                "probs": obj.probs.tolist()}
    if isinstance(obj, ClassicalChannel):
        return {"type": "channel", "n_in": obj.n_in, "n_out": obj.n_out,
                "matrix": obj.matrix.tolist()}
    if isinstance(obj, SeparableDecomposition):
        return {"type": "separable_decomposition", "dims": list(obj.dims),
                "terms": [{"prob": p, "a": complex_array(a), "b": complex_array(b)}
                          for p, a, b in zip(obj.probs, obj.alice, obj.bob)]}
    if isinstance(obj, IntrinsicResult):
        d = obj.to_dict()
        d["type"] = "intrinsic_result"
        d["channel"] = encode(obj.channel)
        return d
    raise TypeError(f"cannot encode {type(obj).__name__}")


def _setting(d) -> MeasurementSetting:
    return MeasurementSetting(parse_complex(d["observable"]), np.asarray(d["eigenvalues"], float),
                              tuple(parse_complex(p) for p in d["projectors"]))


def decode(d: dict):
    """Rebuild an object from its JSON dictionary; invariants are re-validated."""
    if not isinstance(d, dict) or "type" not in d:
        raise ParseError("expected a JSON object with a 'type' field")
    kind = d["type"]
    try:
        if kind == "density_matrix":
            return DensityMatrix(tuple(d["dims"]), parse_complex(d["matrix"]))
        if kind == "pure_tripartite_state":
            da, db, de = d["dims"]
            return PureTripartiteState(da, db, de, parse_complex(d["amplitudes"]))
        if kind == "povm":
            return Povm(tuple(parse_complex(e) for e in d["effects"]),
                        tuple(_tuplify(l) for l in d.get("labels", [])))
        if kind == "witness":
            return Witness(parse_complex(d["operator"]), tuple(d["dims"]),
                           tuple(_setting(s) for s in d["alice_settings"]),
                           tuple(_setting(s) for s in d["bob_settings"]),
                           np.asarray(d["coeffs"], dtype=np.float64))
        if kind == "distribution":
            p = np.asarray(d["probs"], dtype=np.float64)
            if list(p.shape) != list(d.get("alphabet_sizes", p.shape)):
                raise InvariantError("alphabet_sizes header does not match probs")
            return JointDistribution(p)
        if kind == "channel":
            return ClassicalChannel(np.asarray(d["matrix"], dtype=np.float64))
        if kind == "separable_decomposition":
            terms = d["terms"]
            return SeparableDecomposition(tuple(t["prob"] for t in terms),
                                          tuple(parse_complex(t["a"]) for t in terms),
                                          tuple(parse_complex(t["b"]) for t in terms))
        if kind == "intrinsic_result":
            return IntrinsicResult(d["value"], decode(d["channel"]), d["n_evaluations"],
                                   d["converged"], d.get("deterministic_value", float("nan")))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed {kind} object: {exc}") from exc
    raise ParseError(f"unknown object type {kind!r}")


def dumps(payload: dict) -> str:
    return json.dumps(payload, indent=1, sort_keys=True, allow_nan=True) + "\n"


def load(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc


def load_object(path, *kinds):
    obj = decode(load(path))
    if kinds and not isinstance(obj, kinds):
        raise ParseError(f"{path}: expected {' or '.join(k.__name__ for k in kinds)}")
    return obj
