"""JSON instance and result files (schema version 1).

Files are UTF-8 JSON written canonically: sorted keys, two-space indent,
floats in shortest round-trip form, trailing newline.  Parsing and writing a
file produced here gives the same bytes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import jsonschema
import numpy as np

from .certificates import JohnCertificate
from .geometry import ContactPair, FEllipsoid, HPolytope, Subspace, VPolytope
from .solver import GeneralPosition

SCHEMA_VERSION = 1
PROBLEMS = ("ellipsoid-fixed", "ellipsoid-any", "general-fixed", "lowner-fixed")


class FileFormatError(ValueError):
    """Malformed instance or result file; the message names the line or field."""


def _schema(name):
    text = resources.files("revolve_john").joinpath("schemas", f"{name}.schema.json").read_text("utf-8")
    return json.loads(text)


def dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _loads(text, schema_name):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        jsonschema.validate(data, _schema(schema_name))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise FileFormatError(f"field {where}: {exc.message}") from None
    return data


def _floats(a):
    return np.asarray(a, dtype=float).tolist()


# ---------------------------------------------------------------------------
# bodies and subspaces


def hpolytope_to_dict(P):
    return {"normals": _floats(P.normals), "offsets": _floats(P.offsets)}


def hpolytope_from_dict(d):
    return HPolytope(np.array(d["normals"], dtype=float), np.array(d["offsets"], dtype=float))


def vpolytope_to_dict(P):
    return {"vertices": _floats(P.vertices)}


def vpolytope_from_dict(d):
    return VPolytope(np.array(d["vertices"], dtype=float))


def subspace_to_dict(F):
    rows = F.spanning_rows if F.spanning_rows is not None else F.basis
    return {"ambient_dim": F.ambient_dim, "rows": _floats(rows)}


def subspace_from_dict(d):
    return Subspace.from_rows(np.array(d["rows"], dtype=float).reshape(-1, d["ambient_dim"]), ambient_dim=d["ambient_dim"])


# ---------------------------------------------------------------------------
# instances


@dataclass
class Instance:
    """A problem to solve: bodies, axis (rows or just its dimension) and flags."""

    problem: str
    dimension: int
    body_L: HPolytope | None = None
    body_K: VPolytope | None = None
    axis_rows: np.ndarray | None = None
    axis_dim: int | None = None
    symmetric: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise FileFormatError(f"field problem: unknown kind {self.problem!r}")
        if self.problem != "lowner-fixed" and self.body_L is None:
            raise FileFormatError("field body_L: required for this problem")
        if self.problem in ("general-fixed", "lowner-fixed") and self.body_K is None:
            raise FileFormatError("field body_K: required for this problem")
        if self.problem == "ellipsoid-any":
            if self.axis_dim is None:
                raise FileFormatError("field axis/dim: required for ellipsoid-any")
        elif self.axis_rows is None:
            raise FileFormatError("field axis/rows: required for a fixed axis")
        for name, body in (("body_L", self.body_L), ("body_K", self.body_K)):
            if body is not None and body.dim != self.dimension:
                raise FileFormatError(f"field {name}: dimension {body.dim} differs from {self.dimension}")
        if self.axis_rows is not None and np.asarray(self.axis_rows).size and np.asarray(self.axis_rows).shape[1] != self.dimension:
            raise FileFormatError("field axis/rows: wrong row length")

    def axis(self):
        if self.axis_rows is None:
            return None
        return Subspace.from_rows(np.asarray(self.axis_rows, dtype=float).reshape(-1, self.dimension), ambient_dim=self.dimension)

    @property
    def s(self):
        return self.axis_dim if self.axis_rows is None else self.axis().dim

    def to_dict(self):
        out = {
            "schema_version": SCHEMA_VERSION,
            "problem": self.problem,
            "dimension": self.dimension,
            "symmetric": bool(self.symmetric),
            "meta": self.meta,
        }
        if self.body_L is not None:
            out["body_L"] = hpolytope_to_dict(self.body_L)
        if self.body_K is not None:
            out["body_K"] = vpolytope_to_dict(self.body_K)
        if self.axis_rows is not None:
            out["axis"] = {"rows": _floats(np.asarray(self.axis_rows).reshape(-1, self.dimension))}
        else:
            out["axis"] = {"dim": int(self.axis_dim)}
        return out

    @classmethod
    def from_dict(cls, d):
        ax = d["axis"]
        return cls(
            problem=d["problem"],
            dimension=d["dimension"],
            body_L=hpolytope_from_dict(d["body_L"]) if "body_L" in d else None,
            body_K=vpolytope_from_dict(d["body_K"]) if "body_K" in d else None,
            axis_rows=np.array(ax["rows"], dtype=float).reshape(-1, d["dimension"]) if "rows" in ax else None,
            axis_dim=ax.get("dim"),
            symmetric=d.get("symmetric", False),
            meta=d.get("meta", {}),
        )


def parse_instance(text):
    data = _loads(text, "instance")
    try:
        return Instance.from_dict(data)
    except FileFormatError:
        raise
    except (ValueError, KeyError) as exc:
        raise FileFormatError(f"invalid instance: {exc}") from None


def load_instance(path):
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def write_instance(inst, path=None):
    text = dumps(inst.to_dict())
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


# ---------------------------------------------------------------------------
# solutions and certificates


def solution_to_dict(sol):
    if isinstance(sol, FEllipsoid):
        return {
            "kind": "f-ellipsoid",
            "axis": subspace_to_dict(sol.axis),
            "center": _floats(sol.center),
            "shape_on_F": _floats(sol.shape_on_F),
            "mu": float(sol.mu),
        }
    return {
        "kind": "general-position",
        "axis": subspace_to_dict(sol.axis),
        "translation": _floats(sol.translation),
        "shape_on_F": _floats(sol.shape_on_F),
        "mu": float(sol.mu),
        "search_space": sol.search_space,
    }


def solution_from_dict(d):
    F = subspace_from_dict(d["axis"])
    M1 = np.array(d["shape_on_F"], dtype=float).reshape(F.dim, F.dim)
    if d["kind"] == "f-ellipsoid":
        return FEllipsoid(F, np.array(d["center"], dtype=float), M1, d["mu"])
    return GeneralPosition(F, M1, d["mu"], np.array(d["translation"], dtype=float), d["search_space"])


def certificate_to_dict(cert):
    return {
        "pairs": [{"v": _floats(p.v), "p": _floats(p.p)} for p in cert.pairs],
        "weights": _floats(cert.weights),
        "residuals": {k: float(v) for k, v in cert.residuals().items()},
        "tol": float(cert.tol),
        "valid": bool(cert.valid),
    }


def certificate_from_dict(d):
    r = d["residuals"]
    return JohnCertificate(
        [ContactPair(np.array(p["v"], dtype=float), np.array(p["p"], dtype=float)) for p in d["pairs"]],
        np.array(d["weights"], dtype=float),
        r["decomposition"],
        r["zerosum"],
        r["trace"],
        r.get("symmetry"),
        r.get("zerosum_v"),
        d["tol"],
    )


@dataclass
class ResultFile:
    """Solver output together with the instance it came from."""

    instance: Instance
    solution: FEllipsoid | GeneralPosition
    certificate: JohnCertificate | None = None
    certificate_message: str | None = None
    bounds: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    oracle: dict | None = None

    def to_dict(self):
        out = {
            "schema_version": SCHEMA_VERSION,
            "instance": self.instance.to_dict(),
            "solution": solution_to_dict(self.solution),
            "certificate": certificate_to_dict(self.certificate) if self.certificate is not None else None,
            "bounds": list(self.bounds),
            "diagnostics": self.diagnostics,
        }
        if self.certificate_message is not None:
            out["certificate_message"] = self.certificate_message
        if self.oracle is not None:
            out["oracle"] = self.oracle
        return out

    @classmethod
    def from_dict(cls, d):
        return cls(
            instance=Instance.from_dict(d["instance"]),
            solution=solution_from_dict(d["solution"]),
            certificate=certificate_from_dict(d["certificate"]) if d.get("certificate") else None,
            certificate_message=d.get("certificate_message"),
            bounds=d.get("bounds", []),
            diagnostics=d.get("diagnostics", {}),
            oracle=d.get("oracle"),
        )


def parse_result(text):
    data = _loads(text, "result")
    try:
        return ResultFile.from_dict(data)
    except FileFormatError:
        raise
    except (ValueError, KeyError) as exc:
        raise FileFormatError(f"invalid result: {exc}") from None


def load_result(path):
    with open(path, encoding="utf-8") as fh:
        return parse_result(fh.read())


def write_result(res, path=None):
    text = dumps(res.to_dict())
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
