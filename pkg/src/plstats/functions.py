"""Test functions evaluated on spectra.

Each catalog entry is a vectorized callable together with its derivative and a
Lipschitz constant valid on [-2, 4], the union of the semicircle and
Marchenko-Pastur supports.  Polynomial entries are written with plain
arithmetic so they also accept :class:`fractions.Fraction` inputs, which the
exhaustive sampling checks rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

CENTRAL_DIFF_STEP = 1e-5


@dataclass(frozen=True)
class TestFunction:
    name: str
    func: Callable
    deriv: Callable | None = None
    lipschitz_bound: float = np.inf
    bounded: bool = True  # bounded on the compact supports
    rational: bool = False  # exact on Fraction inputs
    description: str = field(default="", compare=False)

    __test__ = False  # keep pytest from collecting the class

    def __call__(self, x):
        return self.func(x)

    def derivative(self, x):
        if self.deriv is not None:
            return self.deriv(x)
        h = CENTRAL_DIFF_STEP
        return (self.func(x + h) - self.func(x - h)) / (2 * h)


def _bump_value(x, center=1.0, half_width=0.75):
    u = (np.asarray(x, dtype=float) - center) / half_width
    out = np.zeros_like(u)
    inside = np.abs(u) < 1
    ui = u[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - ui * ui))
    return out if out.ndim else float(out)


def _bump_deriv(x, center=1.0, half_width=0.75):
    u = (np.asarray(x, dtype=float) - center) / half_width
    out = np.zeros_like(u)
    inside = np.abs(u) < 1
    ui = u[inside]
    q = 1.0 - ui * ui
    out[inside] = np.exp(1.0 - 1.0 / q) * (-2.0 * ui / (q * q)) / half_width
    return out if out.ndim else float(out)


def _ones_like(x):
    # x * 0 + 1 keeps Fractions exact and arrays shaped
    return x * 0 + 1


def _zeros_like(x):
    return x * 0


_CATALOG = [
    TestFunction("x", lambda x: x, _ones_like, 1.0, rational=True, description="identity"),
    TestFunction("x2", lambda x: x * x, lambda x: 2 * x, 8.0, rational=True, description="x^2"),
    TestFunction("x3", lambda x: x * x * x, lambda x: 3 * x * x, 48.0, rational=True, description="x^3"),
    TestFunction("sin", np.sin, np.cos, 1.0, description="sin(x)"),
    TestFunction("cos2x", lambda x: np.cos(2 * x), lambda x: -2 * np.sin(2 * x), 2.0, description="cos(2x)"),
    TestFunction(
        "lorentzian",
        lambda x: 1.0 / (1.0 + x * x),
        lambda x: -2.0 * x / (1.0 + x * x) ** 2,
        0.65,  # max at x = 1/sqrt(3): 9 / (8 sqrt 3) = 0.6495
        description="1/(1+x^2)",
    ),
    TestFunction(
        "bump",
        _bump_value,
        _bump_deriv,
        3.0,  # numeric max of |b'| is 2.894
        description="exp(1 - 1/(1-u^2)), u = (x-1)/0.75, supported in (0.25, 1.75)",
    ),
    TestFunction("const", _ones_like, _zeros_like, 0.0, rational=True, description="constant 1"),
]

CATALOG: dict[str, TestFunction] = {f.name: f for f in _CATALOG}
ALIASES = {"identity": "x", "x^2": "x2", "x^3": "x3", "constant": "const"}


def get(name: str) -> TestFunction:
    """Look up a catalog function by name or alias."""
    key = ALIASES.get(name, name)
    try:
        return CATALOG[key]
    except KeyError:
        known = ", ".join(sorted(set(CATALOG) | set(ALIASES)))
        raise KeyError(f"unknown test function {name!r}; known: {known}") from None


def constant(c: float, name: str | None = None) -> TestFunction:
    return TestFunction(name or f"const({c})", lambda x: x * 0 + c, _zeros_like, 0.0, rational=True)
