# Converts results into deterministic JSON and CSV (fixed field order, 17 significant digits)
import json
from typing import Any, Dict, List, Optional

import numpy as np

from app.core.calculus import DensityEstimate, FunctionalResult, SweepRow
from app.core.exceptions import ConfigError
from app.core.linalg import SpectralForm, UnitarityReport
from app.core.moments import MomentTable
from app.utils.misc import format_float


def format_complex(z: complex) -> Dict[str, float]:
    return {"re": float(np.real(z)), "im": float(np.imag(z))}


def format_functional(result: FunctionalResult) -> Dict[str, Any]:
    return {
        "N": result.N,
        "value": format_complex(result.value),
        "error_bound": result.error_bound,
        "oracle_gap": result.oracle_gap,
        "path": result.path,
    }


def format_unitarity(report: UnitarityReport) -> Dict[str, Any]:
    return {
        "max_residual": report.max_residual,
        "passed": report.passed,
        "tolerance": report.tolerance,
        "method": report.method,
        "samples": report.samples,
    }


def format_sweep(rows: List[SweepRow]) -> List[Dict[str, Any]]:
    return [
        {
            "N": row.N,
            "value": format_complex(row.value),
            "error_bound": row.error_bound,
            "oracle_gap": row.oracle_gap,
        }
        for row in rows
    ]


def format_spectral_form(s: SpectralForm) -> Dict[str, Any]:
    """Eigenphases and the eigenvector matrix flattened column-major as [re, im] pairs."""
    return {
        "dim": s.dim,
        "eigenphases": [float(t) for t in s.eigenphases],
        "eigenvectors": [[float(z.real), float(z.imag)] for z in s.eigenvectors.flatten(order="F")],
    }


def parse_spectral_form(data: Dict[str, Any]) -> SpectralForm:
    try:
        phases = np.asarray(data["eigenphases"], dtype=float)
        pairs = np.asarray(data["eigenvectors"], dtype=float)
        d = phases.shape[0]
        if pairs.shape != (d * d, 2):
            raise ConfigError(f"eigenvectors must hold {d * d} [re, im] pairs")
        V = (pairs[:, 0] + 1j * pairs[:, 1]).reshape((d, d), order="F")
        return SpectralForm(eigenphases=phases, eigenvectors=V)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid spectral form: {exc}") from exc


def _encode(obj: Any) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return _encode(format_complex(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(payload: Any) -> str:
    """Byte-stable JSON: insertion-ordered keys, floats at 17 significant digits, NaN/inf as null."""
    return _encode(payload) + "\n"


def jsonable(payload: Any) -> Any:
    """Plain Python structure for HTTP responses (complex -> {"re", "im"}, non-finite -> None)."""
    if isinstance(payload, dict):
        return {k: jsonable(v) for k, v in payload.items()}
    if isinstance(payload, (list, tuple, np.ndarray)):
        return [jsonable(v) for v in payload]
    if isinstance(payload, (complex, np.complexfloating)):
        return jsonable(format_complex(payload))
    if isinstance(payload, (float, np.floating)):
        value = float(payload)
        return value if np.isfinite(value) else None
    if isinstance(payload, np.integer):
        return int(payload)
    if isinstance(payload, np.bool_):
        return bool(payload)
    return payload


def _csv(header: str, rows) -> str:
    return header + "\n" + "".join(",".join(row) + "\n" for row in rows)


def _optional(x: Optional[float]) -> str:
    return "" if x is None else format_float(x)


def moments_csv(table: MomentTable) -> str:
    return _csv(
        "k,re,im",
        ((str(k), format_float(z.real), format_float(z.imag)) for k, z in zip(table.indices, table.m)),
    )


def density_csv(estimate: DensityEstimate) -> str:
    return _csv(
        "t,re,im",
        ((format_float(t), format_float(z.real), format_float(z.imag)) for t, z in zip(estimate.grid.nodes, estimate.values)),
    )


def sweep_csv(rows: List[SweepRow]) -> str:
    return _csv(
        "N,re,im,error_bound,oracle_gap",
        (
            (str(r.N), format_float(r.value.real), format_float(r.value.imag), format_float(r.error_bound), _optional(r.oracle_gap))
            for r in rows
        ),
    )
