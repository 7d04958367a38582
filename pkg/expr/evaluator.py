"""
Evaluation of expression ASTs as second-order jets, and charts built from them.
"""

import logging
from typing import List, Optional, Sequence

import numpy as np

from expr.errors import ExprDomainError, ExprError
from expr.jet import POSITIVE_DOMAIN, UNARY_RULES, Jet2
from expr.parser import BinOp, Call, Const, ExprAst, Neg, Pow, Var, format_immersion
from geom.chart import Axis, ChartJet, ImmersionChart

logger = logging.getLogger(__name__)


def _check_finite(jet: Jet2, node: ExprAst) -> Jet2:
    if not (np.all(np.isfinite(jet.value)) and np.all(np.isfinite(jet.grad)) and np.all(np.isfinite(jet.hess))):
        raise ExprDomainError("non-finite value", node.span)
    return jet


def _evaluate(node: ExprAst, u: np.ndarray, n: int) -> Jet2:
    shape = u.shape[:-1]
    if isinstance(node, Const):
        return Jet2.constant(node.value, shape, n)
    if isinstance(node, Var):
        if node.index >= n:
            raise ExprDomainError(f"variable u{node.index + 1} is not bound (n={n})", node.span)
        return Jet2.variable(u[..., node.index], node.index, n)
    if isinstance(node, Neg):
        return -_evaluate(node.operand, u, n)
    if isinstance(node, Call):
        arg = _evaluate(node.arg, u, n)
        if node.func in POSITIVE_DOMAIN and np.any(arg.value <= 0.0):
            raise ExprDomainError(f"{node.func} of non-positive value", node.span)
        f, df, d2f = UNARY_RULES[node.func]
        return _check_finite(arg.apply(f, df, d2f), node)
    if isinstance(node, BinOp):
        left = _evaluate(node.left, u, n)
        right = _evaluate(node.right, u, n)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        try:
            return _check_finite(left / right, node)
        except ZeroDivisionError:
            raise ExprDomainError("division by zero", node.right.span)
    if isinstance(node, Pow):
        base = _evaluate(node.base, u, n)
        try:
            return _check_finite(base.powi(node.exponent), node)
        except ZeroDivisionError:
            raise ExprDomainError("zero raised to a negative power", node.span)
    raise TypeError(f"Not an expression node: {node!r}")


def eval_jet2(ast: ExprAst, u) -> Jet2:
    """Value, gradient and Hessian of an expression at u.

    Args:
        ast: Parsed expression.
        u: Parameter point (n,) or batch (..., n).

    Raises:
        ExprDomainError: With the span of the failing node.
    """
    u = np.asarray(u, dtype=float)
    n = u.shape[-1]
    return _check_finite(_evaluate(ast, u, n), ast)


class ExpressionChart(ImmersionChart):
    """Chart whose coordinates are parsed expressions differentiated by Jet2."""

    def __init__(self, exprs: Sequence[ExprAst], axes: Sequence[Axis], label: str = "expr", source: Optional[str] = None):
        super().__init__(label, axes, len(exprs))
        self.exprs: List[ExprAst] = list(exprs)
        self.source = source if source is not None else format_immersion(self.exprs)

    def jet(self, u, order: int = 2) -> ChartJet:
        u = np.asarray(u, dtype=float)
        try:
            jets = [eval_jet2(e, u) for e in self.exprs]
        except ExprError as e:
            raise e.with_source(self.source)
        value = np.stack([j.value for j in jets], axis=-1)
        jacobian = np.stack([j.grad for j in jets], axis=-2)
        hessian = np.stack([j.hess for j in jets], axis=-3) if order >= 2 else None
        return ChartJet(value, jacobian, hessian)


def chart_from_expressions(
    asts: Sequence[ExprAst],
    domain: Sequence[Sequence[Optional[float]]],
    label: str = "expr",
    source: Optional[str] = None,
    periodic: Optional[Sequence[bool]] = None,
) -> ExpressionChart:
    """Wrap coordinate expressions into a chart over a box domain.

    Args:
        asts: One expression per ambient coordinate.
        domain: [lo, hi] per parameter axis, None for an unbounded side.
        label: Chart label used in diagnostics.
        source: Original source text, kept for error spans.
        periodic: Optional per-axis periodic flags (bounded axes only).
    """
    periodic = list(periodic) if periodic is not None else [False] * len(domain)
    if len(periodic) != len(domain):
        raise ValueError(f"periodic flags ({len(periodic)}) do not match domain axes ({len(domain)})")
    axes = [Axis(lo, hi, bool(p)) for (lo, hi), p in zip(domain, periodic)]
    logger.debug(f"Building expression chart '{label}' over {len(axes)} axes into R^{len(asts)}")
    return ExpressionChart(asts, axes, label, source)
