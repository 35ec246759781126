"""Axis-aligned rectangles and their faces."""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["Rectangle", "Face", "positive_orthant"]

INF = math.inf


@dataclass(frozen=True)
class Rectangle:
    """A box prod_i [alpha_i, beta_i]; beta entries may be +inf."""

    alpha: tuple[float, ...]
    beta: tuple[float, ...]

    def __post_init__(self):
        if len(self.alpha) != len(self.beta):
            raise ValueError("alpha and beta must have the same length")
        for k, (a, b) in enumerate(zip(self.alpha, self.beta)):
            if not a < b:
                raise ValueError(f"alpha[{k}]={a} must be < beta[{k}]={b}")
            if math.isinf(a):
                raise ValueError(f"alpha[{k}] must be finite")

    @property
    def n(self) -> int:
        return len(self.alpha)

    def is_bounded(self) -> bool:
        return all(math.isfinite(b) for b in self.beta)

    def clipped(self, clip: float) -> "Rectangle":
        """Replace each infinite beta_i by alpha_i + clip."""
        beta = tuple(
            b if math.isfinite(b) else a + clip for a, b in zip(self.alpha, self.beta)
        )
        return Rectangle(self.alpha, beta)

    def contains(self, point, margin: float = 0.0) -> bool:
        return all(
            a - margin <= x <= b + margin
            for x, a, b in zip(point, self.alpha, self.beta)
        )

    def inflated(self, fraction: float) -> "Rectangle":
        """Grow each bounded axis symmetrically by the given fraction of its width."""
        alpha, beta = [], []
        for a, b in zip(self.alpha, self.beta):
            if math.isfinite(b):
                pad = fraction * (b - a)
                alpha.append(a - pad)
                beta.append(b + pad)
            else:
                alpha.append(a)
                beta.append(b)
        return Rectangle(tuple(alpha), tuple(beta))


@dataclass(frozen=True)
class Face:
    """One of the 2n faces of a rectangle: component `index` pinned at a side."""

    index: int
    side: str  # "low" | "high"

    def __post_init__(self):
        if self.side not in ("low", "high"):
            raise ValueError(f"side must be 'low' or 'high', got {self.side!r}")

    def pinned_value(self, rect: Rectangle) -> float:
        if self.side == "low":
            return rect.alpha[self.index]
        value = rect.beta[self.index]
        if math.isinf(value):
            raise ValueError(f"high face {self.index} of an unbounded axis")
        return value


def positive_orthant(n: int) -> Rectangle:
    return Rectangle((0.0,) * n, (INF,) * n)
