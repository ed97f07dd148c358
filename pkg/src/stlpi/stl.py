"""Signal temporal logic: formula trees, parsing, and space robustness.

Formulas are evaluated over discrete-time state trajectories of shape
``(..., K+1, n_x)``. Every node produces a robustness *signal*, one value per
time step, so a whole batch of sampled trajectories is scored in one pass.

Predicates are signal functions: they receive the full trajectory array and
return ``b(x, k)`` for every ``k`` at once, shape ``(..., K+1)``. Use
:func:`trajectory_predicate` to wrap a scalar ``b(x, k)`` callable.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from stlpi._backend import kernels

BIG = float(np.finfo(np.float64).max)
"""Finite stand-in for +infinity (robustness of ``true``, empty ``G`` window)."""

PredicateFn = Callable[[np.ndarray], np.ndarray]


class FormulaError(ValueError):
    """Malformed formula or inconsistent predicate table."""


class ParseError(FormulaError):
    def __init__(self, message: str, text: str, pos: int):
        self.text = text
        self.pos = pos
        super().__init__(f"{message} at position {pos}: {text[:pos]}<here>{text[pos:]}")


class RobustnessCostMode(enum.Enum):
    MAXIMIZE_SATISFACTION = "maximize_satisfaction"
    PENALIZE_VIOLATION = "penalize_violation"


@dataclass(frozen=True)
class Interval:
    k_min: int
    k_max: int

    def __post_init__(self):
        if int(self.k_min) != self.k_min or int(self.k_max) != self.k_max:
            raise FormulaError(f"interval bounds must be integers, got [{self.k_min},{self.k_max}]")
        if self.k_min < 0:
            raise FormulaError(f"interval lower bound must be >= 0, got {self.k_min}")
        if self.k_max < self.k_min:
            raise FormulaError(f"empty interval [{self.k_min},{self.k_max}]: k_max < k_min")

    def __str__(self) -> str:
        return f"[{self.k_min},{self.k_max}]"


class Formula:
    """Base class of all STL syntax tree nodes."""

    def signal(self, x: np.ndarray) -> np.ndarray:
        """Robustness at every time step, shape ``x.shape[:-1]``."""
        raise NotImplementedError

    def holds(self, x: np.ndarray, k: int) -> bool:
        """Qualitative (Boolean) semantics at step ``k``; see :func:`check`."""
        raise NotImplementedError

    def children(self) -> tuple[Formula, ...]:
        return ()

    def predicates(self) -> dict[str, Predicate]:
        """Name -> predicate table; raises if one name maps to two functions."""
        table: dict[str, Predicate] = {}
        stack: list[Formula] = [self]
        while stack:
            node = stack.pop()
            if isinstance(node, Predicate):
                seen = table.get(node.name)
                if seen is not None and seen.fn is not node.fn:
                    raise FormulaError(f"predicate name {node.name!r} bound to two functions")
                table[node.name] = node
            stack.extend(node.children())
        return table

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children()), default=0)

    def __and__(self, other: Formula) -> And:
        return And((self, other))

    def __or__(self, other: Formula) -> Or:
        return Or((self, other))

    def __invert__(self) -> Not:
        return Not(self)


@dataclass(frozen=True)
class TrueFormula(Formula):
    def signal(self, x):
        return np.full(x.shape[:-1], BIG)

    def holds(self, x, k):
        return True

    def __str__(self):
        return "true"


@dataclass(frozen=True)
class Predicate(Formula):
    """Atomic formula ``b(x, k) >= 0``. Equality is by name only."""

    name: str
    fn: PredicateFn = field(compare=False, repr=False)

    def signal(self, x):
        out = np.asarray(self.fn(x), dtype=np.float64)
        if out.shape != x.shape[:-1]:
            raise FormulaError(
                f"predicate {self.name!r} returned shape {out.shape}, expected {x.shape[:-1]}"
            )
        return out

    def holds(self, x, k):
        return bool(self.fn(x)[k] >= 0.0)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Not(Formula):
    child: Formula

    def signal(self, x):
        return -self.child.signal(x)

    def holds(self, x, k):
        return not self.child.holds(x, k)

    def children(self):
        return (self.child,)

    def __str__(self):
        return "!" + _wrap(self.child)


@dataclass(frozen=True)
class And(Formula):
    children_: tuple[Formula, ...]

    def __post_init__(self):
        object.__setattr__(self, "children_", tuple(self.children_))
        if len(self.children_) < 2:
            raise FormulaError("And needs at least two operands")

    def signal(self, x):
        out = self.children_[0].signal(x)
        for c in self.children_[1:]:
            out = np.minimum(out, c.signal(x))
        return out

    def holds(self, x, k):
        return all(c.holds(x, k) for c in self.children_)

    def children(self):
        return self.children_

    def __str__(self):
        return " & ".join(_wrap(c) for c in self.children_)


@dataclass(frozen=True)
class Or(Formula):
    children_: tuple[Formula, ...]

    def __post_init__(self):
        object.__setattr__(self, "children_", tuple(self.children_))
        if len(self.children_) < 2:
            raise FormulaError("Or needs at least two operands")

    def signal(self, x):
        out = self.children_[0].signal(x)
        for c in self.children_[1:]:
            out = np.maximum(out, c.signal(x))
        return out

    def holds(self, x, k):
        return any(c.holds(x, k) for c in self.children_)

    def children(self):
        return self.children_

    def __str__(self):
        return " | ".join(_wrap(c) for c in self.children_)


def _window(x: np.ndarray, interval: Interval, k: int) -> range:
    """Steps ``[k+k_min, k+k_max]`` clipped to the horizon."""
    last = x.shape[-2] - 1
    return range(k + interval.k_min, min(k + interval.k_max, last) + 1)


@dataclass(frozen=True)
class Eventually(Formula):
    interval: Interval
    child: Formula

    def signal(self, x):
        return _reduce_windows(self.child.signal(x), self.interval, is_max=True)

    def holds(self, x, k):
        return any(self.child.holds(x, kk) for kk in _window(x, self.interval, k))

    def children(self):
        return (self.child,)

    def __str__(self):
        return f"F{self.interval}({self.child})"


@dataclass(frozen=True)
class Globally(Formula):
    interval: Interval
    child: Formula

    def signal(self, x):
        return _reduce_windows(self.child.signal(x), self.interval, is_max=False)

    def holds(self, x, k):
        return all(self.child.holds(x, kk) for kk in _window(x, self.interval, k))

    def children(self):
        return (self.child,)

    def __str__(self):
        return f"G{self.interval}({self.child})"


@dataclass(frozen=True)
class Until(Formula):
    """``left U_I right``: right holds somewhere in the window, left holds from k up to there."""

    interval: Interval
    left: Formula
    right: Formula

    def signal(self, x):
        lhs, rhs = self.left.signal(x), self.right.signal(x)
        shape = lhs.shape
        n = shape[-1]
        out = kernels.until(
            np.ascontiguousarray(lhs.reshape(-1, n)),
            np.ascontiguousarray(rhs.reshape(-1, n)),
            self.interval.k_min,
            self.interval.k_max,
        )
        return out.reshape(shape)

    def holds(self, x, k):
        for kk in _window(x, self.interval, k):
            if self.right.holds(x, kk) and all(self.left.holds(x, i) for i in range(k, kk + 1)):
                return True
        return False

    def children(self):
        return (self.left, self.right)

    def __str__(self):
        return f"U{self.interval}({self.left}, {self.right})"


def _reduce_windows(values: np.ndarray, interval: Interval, is_max: bool) -> np.ndarray:
    shape = values.shape
    flat = np.ascontiguousarray(values.reshape(-1, shape[-1]))
    out = kernels.window_reduce(flat, interval.k_min, interval.k_max, is_max)
    return out.reshape(shape)


def _wrap(f: Formula) -> str:
    return f"({f})" if isinstance(f, (And, Or)) else str(f)


def as_trajectory(x) -> np.ndarray:
    """Coerce a state trajectory to shape ``(K+1, n_x)`` (1-D input means n_x = 1)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError(f"expected a (K+1, n_x) trajectory, got shape {x.shape}")
    return x


def robustness(phi: Formula, x, k: int = 0) -> float:
    """Space robustness of ``phi`` on trajectory ``x`` at step ``k``."""
    x = as_trajectory(x)
    if not 0 <= k < x.shape[0]:
        raise IndexError(f"time step {k} outside [0, {x.shape[0] - 1}]")
    return float(phi.signal(x)[k])


def check(phi: Formula, x, k: int = 0) -> bool:
    """Boolean satisfaction, evaluated without robustness arithmetic."""
    x = as_trajectory(x)
    if not 0 <= k < x.shape[0]:
        raise IndexError(f"time step {k} outside [0, {x.shape[0] - 1}]")
    return phi.holds(x, k)


def satisfies(phi: Formula, x) -> bool:
    """``robustness(phi, x, 0) > 0``; a robustness of exactly zero counts as violated."""
    return robustness(phi, x, 0) > 0.0


def cost_from_robustness(rho, mode: RobustnessCostMode):
    if mode is RobustnessCostMode.MAXIMIZE_SATISFACTION:
        return -rho
    if mode is RobustnessCostMode.PENALIZE_VIOLATION:
        return -np.minimum(0.0, rho)
    raise ValueError(f"unknown robustness cost mode {mode!r}")


def robustness_cost(phi: Formula, x, mode: RobustnessCostMode) -> float:
    return float(cost_from_robustness(robustness(phi, x, 0), mode))


def trajectory_predicate(name: str, b: Callable[[np.ndarray, int], float]) -> Predicate:
    """Wrap a scalar evaluator ``b(x, k)`` (x of shape (K+1, n_x)) as a predicate."""

    def fn(x):
        flat = x.reshape(-1, *x.shape[-2:])
        out = np.array([[b(traj, k) for k in range(traj.shape[0])] for traj in flat], dtype=np.float64)
        return out.reshape(x.shape[:-1])

    return Predicate(name, fn)


def state_predicate(name: str, fn: Callable[[np.ndarray], np.ndarray]) -> Predicate:
    """Predicate depending only on the current state; ``fn`` maps (..., n_x) -> (...)."""
    return Predicate(name, fn)


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<temporal>[GFU])\s*\[|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<int>\d+)|(?P<op>[!&|(),\]]))"
)


class _Parser:
    def __init__(self, text: str, predicates: Mapping[str, PredicateFn | Predicate]):
        self.text = text
        self.predicates = predicates
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text):
                break
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
            kind = m.lastgroup
            start = m.start(kind)
            self.tokens.append((kind, m.group(kind), start))
            pos = m.end()
        self.tokens.append(("end", "", len(text)))
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind: str, value: str | None = None):
        tok = self.tokens[self.i]
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            got = tok[1] or "end of input"
            raise ParseError(f"expected {want!r}, found {got!r}", self.text, tok[2])
        self.i += 1
        return tok

    def parse(self) -> Formula:
        phi = self.disj()
        self.take("end")
        return phi

    def disj(self) -> Formula:
        parts = [self.conj()]
        while self.peek()[:2] == ("op", "|"):
            self.i += 1
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conj(self) -> Formula:
        parts = [self.unary()]
        while self.peek()[:2] == ("op", "&"):
            self.i += 1
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def interval(self, pos: int) -> Interval:
        lo = int(self.take("int")[1])
        self.take("op", ",")
        hi = int(self.take("int")[1])
        self.take("op", "]")
        try:
            return Interval(lo, hi)
        except FormulaError as exc:
            raise ParseError(str(exc), self.text, pos) from None

    def unary(self) -> Formula:
        kind, value, pos = self.peek()
        if (kind, value) == ("op", "!"):
            self.i += 1
            return Not(self.unary())
        if kind == "temporal":
            self.i += 1
            interval = self.interval(pos)
            self.take("op", "(")
            first = self.disj()
            if value == "U":
                self.take("op", ",")
                second = self.disj()
                self.take("op", ")")
                return Until(interval, first, second)
            self.take("op", ")")
            return Eventually(interval, first) if value == "F" else Globally(interval, first)
        if (kind, value) == ("op", "("):
            self.i += 1
            inner = self.disj()
            self.take("op", ")")
            return inner
        if kind == "ident":
            self.i += 1
            if value == "true":
                return TrueFormula()
            if value not in self.predicates:
                raise ParseError(f"unknown predicate {value!r}", self.text, pos)
            fn = self.predicates[value]
            if isinstance(fn, Predicate):
                fn = fn.fn
            return Predicate(value, fn)
        raise ParseError(f"unexpected token {value or 'end of input'!r}", self.text, pos)


def parse_formula(text: str, predicates: Mapping[str, PredicateFn | Predicate] | None = None) -> Formula:
    """Parse the textual STL syntax.

    Grammar (whitespace-insensitive)::

        formula := disj
        disj    := conj ("|" conj)*
        conj    := unary ("&" unary)*
        unary   := "!" unary | "G[" int "," int "]" "(" formula ")"
                 | "F[" int "," int "]" "(" formula ")"
                 | "U[" int "," int "]" "(" formula "," formula ")"
                 | "(" formula ")" | IDENT | "true"

    Chains like ``a & b & c`` become one n-ary node; explicit parentheses are
    kept as nesting, so ``parse_formula(str(phi)) == phi``.
    """
    return _Parser(text, predicates or {}).parse()
