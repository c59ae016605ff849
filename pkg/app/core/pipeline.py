"""
Job runner shared by the command line and the HTTP API.

run_job(config) resolves the operator, vectors and function described by a
JobConfig, runs one command and returns (result, metadata). The result holds a
deterministic payload (and CSV text where the command has a CSV form); the
metadata holds timing and memory figures that never enter the payload.
"""

import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ValidationError, field_validator, model_validator

from app.config import PATH_AGREEMENT_TOL
from app.core.calculus import (
    convergence_sweep,
    density,
    fejer_apply,
    functional_coeff,
    functional_norm,
    functional_quad,
)
from app.core.exceptions import ConfigError, InputError, SelfCheckError, UnitarityError
from app.core.fejer import CircleGrid, default_grid_size, quadrature_grid_size
from app.core.json_formatter import (
    density_csv,
    dumps,
    format_complex,
    format_functional,
    format_spectral_form,
    format_sweep,
    format_unitarity,
    moments_csv,
    parse_spectral_form,
    sweep_csv,
)
from app.core.linalg import ComplexVec, DenseUnitary, verify_unitary
from app.core.moments import moment_table
from app.core.oracle import exact_f_of_U, exact_functional, recover_spectral
from app.services.funcexpr import CircleFunction
from app.services.generators import GeneratedOperator, generate, resolve_vector
from app.services.matrix_market import read_matrix_market
from app.services.vector_io import format_vector_csv
from app.utils.misc import read_text, track_performance

logger = logging.getLogger(__name__)

Command = Literal["verify", "moments", "apply", "functional", "density", "convergence", "oracle"]
COMMANDS = ("verify", "moments", "apply", "functional", "density", "convergence", "oracle")
CSV_COMMANDS = ("moments", "apply", "density", "convergence")


class JobConfig(BaseModel):
    command: Command
    # operator source
    matrix: Optional[str] = None
    generate: Optional[str] = None
    dim: Optional[int] = None
    seed: int = 0
    spectral: Optional[str] = None
    # function
    function: Optional[str] = None
    # vectors
    x: Optional[str] = None
    basis: Optional[int] = None
    random_seed: Optional[int] = None
    y: Optional[str] = None
    y_basis: Optional[int] = None
    y_random_seed: Optional[int] = None
    # orders and grid
    N: Optional[int] = None
    n_list: Optional[List[int]] = None
    grid_M: Optional[int] = None
    streaming: bool = False
    # output
    out: Optional[str] = None
    format: Literal["json", "csv"] = "json"

    @field_validator("n_list", mode="before")
    @classmethod
    def _split_n_list(cls, value):
        if isinstance(value, str):
            try:
                return [int(part) for part in value.split(",") if part.strip()]
            except ValueError:
                raise ValueError(f"--n-list must be comma-separated integers, got {value!r}") from None
        return value

    @model_validator(mode="after")
    def _check(self):
        if (self.matrix is None) == (self.generate is None):
            raise ValueError("exactly one operator source is required: --matrix PATH or --generate NAME")
        if self.generate is not None and self.dim is None:
            raise ValueError("--generate needs --dim")
        if self.N is not None and self.N < 0:
            raise ValueError(f"N must be >= 0, got {self.N}")
        if self.n_list is not None:
            if not self.n_list:
                raise ValueError("--n-list must be non-empty")
            if any(n < 0 for n in self.n_list):
                raise ValueError("--n-list entries must be >= 0")
        if self.N is not None and self.grid_M is not None and self.grid_M < 2 * self.N + 2:
            raise ValueError(f"grid M={self.grid_M} is too small for N={self.N}; need M >= {2 * self.N + 2}")
        if self.format == "csv" and self.command not in CSV_COMMANDS:
            raise ValueError(f"'{self.command}' has no CSV form; use --format json")
        return self


def build_config(file_values: Optional[Dict[str, Any]] = None, **overrides) -> JobConfig:
    """Merge config-file values with explicit overrides (overrides win, None means unset)."""
    values = dict(file_values or {})
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return JobConfig(**values)
    except ValidationError as exc:
        messages = "; ".join(err["msg"].removeprefix("Value error, ") for err in exc.errors())
        raise ConfigError(f"invalid job configuration: {messages}") from None


def load_config_file(path: str) -> Dict[str, Any]:
    try:
        data = json.loads(read_text(path))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON config ({exc})") from None
    if not isinstance(data, dict):
        raise InputError(f"{path}: config must be a JSON object")
    return data


class JobResult(BaseModel):
    command: str
    payload: Dict[str, Any]
    csv: Optional[str] = None
    # false when the command ran but its check failed (verify on a non-unitary operator)
    passed: bool = True

    def render(self, fmt: str = "json") -> str:
        if fmt == "csv":
            if self.csv is None:
                raise ConfigError(f"'{self.command}' has no CSV form")
            return self.csv
        return dumps(self.payload)


class Job:
    """Resolved inputs of a JobConfig."""

    def __init__(self, config: JobConfig):
        self.config = config
        self.source = self._load_operator()
        self.U = self.source.operator
        self.dim = self.U.dim

    def _load_operator(self) -> GeneratedOperator:
        cfg = self.config
        if cfg.generate is not None:
            source = generate(cfg.generate, cfg.dim, cfg.seed)
        else:
            source = GeneratedOperator(DenseUnitary(read_matrix_market(cfg.matrix)), None)
        if cfg.spectral is not None:
            try:
                data = json.loads(read_text(cfg.spectral))
            except json.JSONDecodeError as exc:
                raise InputError(f"{cfg.spectral}: invalid JSON ({exc})") from None
            spectral = parse_spectral_form(data)
            if spectral.dim != source.operator.dim:
                raise ConfigError(f"spectral form has dim {spectral.dim}, operator has dim {source.operator.dim}")
            source = GeneratedOperator(source.operator, spectral)
        return source

    def require_unitary(self) -> None:
        report = verify_unitary(self.U)
        if not report.passed:
            raise UnitarityError(
                f"operator is not unitary: residual {report.max_residual:.3e} > {report.tolerance:.0e}"
            )

    @property
    def N(self) -> int:
        if self.config.N is not None:
            return self.config.N
        if self.config.n_list:
            return self.config.n_list[-1]
        raise ConfigError(f"'{self.config.command}' needs -N")

    @property
    def function(self) -> CircleFunction:
        if self.config.function is None:
            raise ConfigError(f"'{self.config.command}' needs --function")
        return CircleFunction.resolve(self.config.function)

    @property
    def x(self) -> ComplexVec:
        cfg = self.config
        x = resolve_vector(self.dim, cfg.x, cfg.basis, cfg.random_seed)
        return x if x is not None else ComplexVec.random(self.dim, seed=0)

    @property
    def y(self) -> ComplexVec:
        cfg = self.config
        y = resolve_vector(self.dim, cfg.y, cfg.y_basis, cfg.y_random_seed)
        return y if y is not None else self.x

    def spectral_form(self):
        if self.source.spectral is not None:
            return self.source.spectral
        if isinstance(self.U, DenseUnitary):
            return recover_spectral(self.U, seed=self.config.seed)
        return None


def _verify(job: Job) -> JobResult:
    report = verify_unitary(job.U)
    payload = {"form": job.U.form, "dim": job.dim}
    payload.update(format_unitarity(report))
    return JobResult(command="verify", payload=payload, passed=report.passed)


def _moments(job: Job) -> JobResult:
    job.require_unitary()
    table = moment_table(job.U, job.x, job.y, job.N, streaming=job.config.streaming)
    payload = {
        "N": table.N,
        "max_drift": table.max_drift,
        "moments": [{"k": int(k), **format_complex(m)} for k, m in zip(table.indices, table.m)],
    }
    return JobResult(command="moments", payload=payload, csv=moments_csv(table))


def _apply(job: Job) -> JobResult:
    job.require_unitary()
    f = job.function
    result = fejer_apply(f, job.U, job.x, job.N, job.config.grid_M)
    payload = {
        "N": job.N,
        "function": f.description,
        "vector": [format_complex(z) for z in result.entries],
    }
    return JobResult(command="apply", payload=payload, csv=format_vector_csv(result))


def _functional(job: Job) -> JobResult:
    job.require_unitary()
    f, x, y, N = job.function, job.x, job.y, job.N
    M = job.config.grid_M or default_grid_size(N)
    coeff = functional_coeff(f, job.U, x, y, N, M)
    quad = functional_quad(f, job.U, x, y, N, M)

    spectral = job.spectral_form()
    if spectral is not None:
        exact = exact_functional(f, spectral, x, y)
        coeff = coeff.model_copy(update={"oracle_gap": abs(coeff.value - exact)})
        quad = quad.model_copy(update={"oracle_gap": abs(quad.value - exact)})

    difference = abs(coeff.value - quad.value)
    tolerance = PATH_AGREEMENT_TOL * x.norm() * y.norm() * coeff.f_sup
    if difference > tolerance:
        raise SelfCheckError(
            f"coefficient and quadrature paths disagree: |difference| = {difference:.3e} > {tolerance:.3e}"
        )
    payload = {
        "function": f.description,
        "grid_M": M,
        "coefficient": format_functional(coeff),
        "quadrature": format_functional(quad),
        "difference": difference,
        "tolerance": tolerance,
        "functional_norm": functional_norm(job.U, x, y, N, M),
    }
    return JobResult(command="functional", payload=payload)


def _density(job: Job) -> JobResult:
    job.require_unitary()
    N = job.N
    grid = CircleGrid(M=job.config.grid_M or quadrature_grid_size(N))
    estimate = density(job.U, job.x, job.y, N, grid)
    payload = {
        "N": N,
        "grid_M": grid.M,
        "total_mass": format_complex(estimate.total_mass),
        "values": [
            {"t": float(t), **format_complex(v)} for t, v in zip(grid.nodes, estimate.values)
        ],
    }
    return JobResult(command="density", payload=payload, csv=density_csv(estimate))


def _convergence(job: Job) -> JobResult:
    job.require_unitary()
    n_list = job.config.n_list or [job.N]
    f = job.function
    rows = convergence_sweep(f, job.U, job.x, job.y, n_list, spectral=job.spectral_form())
    payload = {"function": f.description, "rows": format_sweep(rows)}
    return JobResult(command="convergence", payload=payload, csv=sweep_csv(rows))


def _oracle(job: Job) -> JobResult:
    job.require_unitary()
    spectral = job.spectral_form()
    if spectral is None:
        raise ConfigError("oracle needs a dense or constructed operator")
    payload: Dict[str, Any] = {
        "spectral_form": format_spectral_form(spectral),
        "orthonormality_residual": spectral.orthonormality_residual(),
    }
    if job.config.function is not None:
        f, x, y = job.function, job.x, job.y
        payload["function"] = f.description
        payload["exact_functional"] = format_complex(exact_functional(f, spectral, x, y))
        payload["exact_apply"] = [format_complex(z) for z in exact_f_of_U(f, spectral, x).entries]
    return JobResult(command="oracle", payload=payload)


HANDLERS: Dict[str, Callable[[Job], JobResult]] = {
    "verify": _verify,
    "moments": _moments,
    "apply": _apply,
    "functional": _functional,
    "density": _density,
    "convergence": _convergence,
    "oracle": _oracle,
}


def run_job(config: JobConfig) -> Tuple[JobResult, Dict[str, Any]]:
    with track_performance() as metrics:
        job = Job(config)
        result = HANDLERS[config.command](job)
    logger.info(
        "%s finished in %.1f ms (rss %.1f MB)",
        config.command,
        metrics["latency_ms"],
        metrics["memory_used_mb"],
    )
    return result, metrics


def write_output(result: JobResult, config: JobConfig, stream) -> None:
    text = result.render(config.format)
    if config.out is None:
        stream.write(text)
        return
    Path(config.out).write_text(text, encoding="utf-8")
