"""
Builtin unitary generators and vector sources.

Every generator also returns the SpectralForm when it is known in closed form,
so the oracle never has to diagonalize a generated operator.
"""

import logging
from pathlib import Path
from typing import Callable, Dict, NamedTuple, Optional, Union

import numpy as np

from app.core.exceptions import ConfigError
from app.core.linalg import TWO_PI, ComplexVec, DenseUnitary, DiagonalPhases, SpectralForm, UnitaryOperator
from app.core.oracle import construct
from app.services.vector_io import read_vector_csv
from app.utils.misc import make_rng

logger = logging.getLogger(__name__)


class GeneratedOperator(NamedTuple):
    operator: UnitaryOperator
    spectral: Optional[SpectralForm]


def _identity(dim: int, seed: int) -> GeneratedOperator:
    eye = np.eye(dim, dtype=complex)
    return GeneratedOperator(DenseUnitary(eye), SpectralForm(eigenphases=np.zeros(dim), eigenvectors=eye))


def _shift(dim: int, seed: int) -> GeneratedOperator:
    """Cyclic shift e_j -> e_{j+1 mod d}; eigenvectors are the Fourier modes."""
    matrix = np.roll(np.eye(dim, dtype=complex), 1, axis=0)
    j = np.arange(dim)
    V = np.exp(-TWO_PI * 1j * np.outer(j, j) / dim) / np.sqrt(dim)
    return GeneratedOperator(DenseUnitary(matrix), SpectralForm(eigenphases=TWO_PI * j / dim, eigenvectors=V))


def _dft_phase(dim: int, seed: int) -> GeneratedOperator:
    thetas = TWO_PI * np.arange(dim) / dim
    return _diagonal(thetas)


def _random_diagonal(dim: int, seed: int) -> GeneratedOperator:
    return _diagonal(make_rng(seed).uniform(0.0, TWO_PI, dim))


def _diagonal(thetas: np.ndarray) -> GeneratedOperator:
    op = DiagonalPhases(thetas)
    return GeneratedOperator(op, SpectralForm(eigenphases=op.thetas, eigenvectors=np.eye(op.dim, dtype=complex)))


def _constructed(dim: int, seed: int) -> GeneratedOperator:
    thetas = make_rng(seed).uniform(0.0, TWO_PI, dim)
    built = construct(thetas, seed=seed)
    return GeneratedOperator(built.operator, built.spectral)


GENERATORS: Dict[str, Callable[[int, int], GeneratedOperator]] = {
    "identity": _identity,
    "shift": _shift,
    "dft-phase": _dft_phase,
    "constructed": _constructed,
    "random-diagonal": _random_diagonal,
}


def generate(name: str, dim: int, seed: int = 0) -> GeneratedOperator:
    if name not in GENERATORS:
        raise ConfigError(f"unknown generator '{name}'; choose from {', '.join(GENERATORS)}")
    if dim < 1:
        raise ConfigError(f"--dim must be positive, got {dim}")
    logger.info("Generating %s operator (dim=%d, seed=%d)", name, dim, seed)
    return GENERATORS[name](dim, seed)


def resolve_vector(
    dim: int,
    path: Optional[Union[str, Path]] = None,
    basis: Optional[int] = None,
    random_seed: Optional[int] = None,
) -> Optional[ComplexVec]:
    """At most one source may be set; None when none is."""
    given = [s for s in (path, basis, random_seed) if s is not None]
    if len(given) > 1:
        raise ConfigError("give at most one of a vector path, a basis index or a random seed")
    if path is not None:
        return read_vector_csv(path)
    if basis is not None:
        if not 0 <= basis < dim:
            raise ConfigError(f"basis index {basis} out of range for dim {dim}")
        return ComplexVec.basis(dim, basis)
    if random_seed is not None:
        return ComplexVec.random(dim, seed=random_seed)
    return None
