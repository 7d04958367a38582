"""
Second-order forward-mode jets.

A Jet2 carries the value, gradient and dense Hessian of a scalar function of
n parameters, batched over any leading shape S: value S, grad S+(n,),
hess S+(n, n). Every operation builds the Hessian from symmetric pieces, so
hess is bitwise symmetric without a symmetrization pass.
"""

from typing import Callable, Union

import numpy as np

Number = Union[int, float]


def _outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., :, None] * b[..., None, :]


class Jet2:
    __slots__ = ("value", "grad", "hess")

    def __init__(self, value, grad, hess):
        self.value = np.asarray(value, dtype=float)
        self.grad = np.asarray(grad, dtype=float)
        self.hess = np.asarray(hess, dtype=float)

    @classmethod
    def constant(cls, c: Number, shape, n: int) -> "Jet2":
        shape = tuple(shape)
        return cls(np.full(shape, float(c)), np.zeros(shape + (n,)), np.zeros(shape + (n, n)))

    @classmethod
    def variable(cls, values: np.ndarray, index: int, n: int) -> "Jet2":
        values = np.asarray(values, dtype=float)
        grad = np.zeros(values.shape + (n,))
        grad[..., index] = 1.0
        return cls(values, grad, np.zeros(values.shape + (n, n)))

    @property
    def n(self) -> int:
        return self.grad.shape[-1]

    def _coerce(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            return other
        return Jet2.constant(other, self.value.shape, self.n)

    def __add__(self, other) -> "Jet2":
        other = self._coerce(other)
        return Jet2(self.value + other.value, self.grad + other.grad, self.hess + other.hess)

    __radd__ = __add__

    def __neg__(self) -> "Jet2":
        return Jet2(-self.value, -self.grad, -self.hess)

    def __sub__(self, other) -> "Jet2":
        other = self._coerce(other)
        return Jet2(self.value - other.value, self.grad - other.grad, self.hess - other.hess)

    def __rsub__(self, other) -> "Jet2":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Jet2":
        other = self._coerce(other)
        a, b = self.value, other.value
        grad = a[..., None] * other.grad + b[..., None] * self.grad
        hess = (
            a[..., None, None] * other.hess
            + b[..., None, None] * self.hess
            + (_outer(self.grad, other.grad) + _outer(other.grad, self.grad))
        )
        return Jet2(a * b, grad, hess)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet2":
        other = self._coerce(other)
        if np.any(other.value == 0.0):
            raise ZeroDivisionError("division by zero")
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> "Jet2":
        return self._coerce(other) / self

    def apply(self, f: Callable, df: Callable, d2f: Callable) -> "Jet2":
        """Chain rule for a scalar function with known first and second derivatives."""
        x = self.value
        d1 = df(x)
        d2 = d2f(x)
        grad = d1[..., None] * self.grad
        hess = d1[..., None, None] * self.hess + d2[..., None, None] * _outer(self.grad, self.grad)
        return Jet2(f(x), grad, hess)

    def reciprocal(self) -> "Jet2":
        if np.any(self.value == 0.0):
            raise ZeroDivisionError("division by zero")
        return self.apply(lambda x: 1.0 / x, lambda x: -1.0 / (x * x), lambda x: 2.0 / (x * x * x))

    def powi(self, k: int) -> "Jet2":
        """Integer power; negative powers need a nonzero base."""
        k = int(k)
        if k == 0:
            return Jet2.constant(1.0, self.value.shape, self.n)
        if k < 0:
            return self.reciprocal().powi(-k)
        if k == 1:
            return Jet2(self.value, self.grad, self.hess)
        return self.apply(
            lambda x: x ** k,
            lambda x: k * x ** (k - 1),
            lambda x: k * (k - 1) * x ** (k - 2),
        )

    def __repr__(self) -> str:
        return f"Jet2(value={self.value!r}, grad={self.grad!r}, hess={self.hess!r})"


def _tanh_d1(x):
    t = np.tanh(x)
    return 1.0 - t * t


def _tanh_d2(x):
    t = np.tanh(x)
    return -2.0 * t * (1.0 - t * t)


# name -> (f, f', f'')
UNARY_RULES = {
    "sin": (np.sin, np.cos, lambda x: -np.sin(x)),
    "cos": (np.cos, lambda x: -np.sin(x), lambda x: -np.cos(x)),
    "sinh": (np.sinh, np.cosh, np.sinh),
    "cosh": (np.cosh, np.sinh, np.cosh),
    "tanh": (np.tanh, _tanh_d1, _tanh_d2),
    "exp": (np.exp, np.exp, np.exp),
    "log": (np.log, lambda x: 1.0 / x, lambda x: -1.0 / (x * x)),
    "sqrt": (np.sqrt, lambda x: 0.5 / np.sqrt(x), lambda x: -0.25 / (x * np.sqrt(x))),
}

# Functions defined only for strictly positive arguments
POSITIVE_DOMAIN = ("log", "sqrt")
