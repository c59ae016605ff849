import numpy as np
import pytest

from app.core.linalg import TWO_PI, ComplexVec, DenseUnitary
from app.core.oracle import construct
from app.services.funcexpr import BinOp, Call, CircleFunction, Literal, Neg, Pow, Var


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def haar_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    G = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    Q, R = np.linalg.qr(G)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


@pytest.fixture
def make_unitary(rng):
    def factory(d: int) -> DenseUnitary:
        return DenseUnitary(haar_unitary(rng, d))

    return factory


@pytest.fixture
def make_constructed():
    def factory(d: int, seed: int):
        thetas = np.random.default_rng(seed).uniform(0.0, TWO_PI, d)
        return construct(thetas, seed=seed)

    return factory


@pytest.fixture
def make_vector(rng):
    def factory(d: int, normalized: bool = True) -> ComplexVec:
        v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        if normalized:
            v = v / np.linalg.norm(v)
        return ComplexVec(entries=v)

    return factory


def random_expression(rng: np.random.Generator, depth: int):
    """Continuous on the circle: the only denominators are z - w with |w| >= 1.5."""
    if depth == 0 or rng.random() < 0.25:
        choice = rng.integers(3)
        if choice == 0:
            return Var()
        if choice == 1:
            return Literal(complex(rng.uniform(-2, 2), rng.uniform(-2, 2)))
        return Pow(Var(), int(rng.integers(-3, 4)))
    kind = rng.integers(5)
    if kind == 0:
        op = ["+", "-", "*"][rng.integers(3)]
        return BinOp(op, random_expression(rng, depth - 1), random_expression(rng, depth - 1))
    if kind == 1:
        w = complex(rng.uniform(1.5, 3.0) * np.exp(1j * rng.uniform(0, TWO_PI)))
        return BinOp("/", random_expression(rng, depth - 1), BinOp("-", Var(), Literal(w)))
    if kind == 2:
        name = ["conj", "re", "im", "abs"][rng.integers(4)]
        return Call(name, random_expression(rng, depth - 1))
    if kind == 3:
        return Neg(random_expression(rng, depth - 1))
    return Call("exp", Pow(Var(), int(rng.integers(-2, 3))))


@pytest.fixture
def make_expression(rng):
    def factory(depth: int = 3) -> CircleFunction:
        return CircleFunction(random_expression(rng, depth))

    return factory
