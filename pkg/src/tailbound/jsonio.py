"""JSON fixture loading and JSON/CSV result serialization.

Fixture schemas are documented in docs/schemas.md. Floats are rendered with
repr, the shortest representation that round-trips binary64 exactly, so
serialized certificates and reports replay bit-for-bit.
"""

from __future__ import annotations

import dataclasses
import json

import numpy as np

from .cgf import DiscreteDistribution
from .chaining import FunctionFamily
from .gaussian import GaussianModel
from .orlicz import OrliczGenerator, make_generator


def load_json(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def parse_inline_or_path(text: str):
    """JSON literal if the argument looks like one, else a file path."""
    stripped = text.lstrip()
    if stripped.startswith("{") or stripped.startswith("["):
        return json.loads(text)
    return load_json(text)


def load_distribution(obj: dict):
    """(distribution, {name: values}) from a support/probabilities/functions object."""
    if not isinstance(obj, dict) or "support" not in obj or "probabilities" not in obj:
        raise ValueError("distribution object requires 'support' and 'probabilities'")
    dist = DiscreteDistribution(obj["support"], obj["probabilities"])
    functions = {
        str(name): np.asarray(vals, dtype=float)
        for name, vals in obj.get("functions", {}).items()
    }
    return dist, functions


def load_generator(obj: dict) -> OrliczGenerator:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValueError("generator object requires a 'kind' field")
    kwargs = {k: obj[k] for k in ("L", "p", "t", "phi") if k in obj}
    return make_generator(obj["kind"], **kwargs)


def load_family(obj: dict, norm_context="cgf") -> FunctionFamily:
    dist, functions = load_distribution(obj)
    if not functions:
        raise ValueError("family object requires a nonempty 'functions' map")
    return FunctionFamily(dist, functions, norm_context)


def load_model(obj: dict) -> GaussianModel:
    if isinstance(obj, dict) and "covariance" in obj:
        return GaussianModel(np.asarray(obj["covariance"], dtype=float))
    if isinstance(obj, dict) and "spectrum" in obj:
        return GaussianModel.from_spectrum(
            obj["spectrum"], exponent=obj.get("exponent", 2.0), d=obj["d"]
        )
    raise ValueError("model object requires 'covariance' or 'spectrum'")


def jsonable(x):
    """Recursively convert numpy and dataclass values to JSON-native ones."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    if dataclasses.is_dataclass(x) and not isinstance(x, type):
        if hasattr(x, "as_dict"):
            return jsonable(x.as_dict())
        return {f.name: jsonable(getattr(x, f.name)) for f in dataclasses.fields(x)}
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    return x


def dump_json(obj) -> str:
    return json.dumps(jsonable(obj), indent=2) + "\n"


def _csv_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def dump_csv(rows) -> str:
    """CSV text from a nonempty list of dicts sharing one key set."""
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to serialize")
    header = list(rows[0].keys())
    for row in rows:
        if list(row.keys()) != header:
            raise ValueError("CSV rows must share one column set")
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_csv_cell(row[k]) for k in header))
    return "\n".join(lines) + "\n"
