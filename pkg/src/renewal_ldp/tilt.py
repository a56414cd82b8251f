"""Tilted growth function z(phi).

z(phi) is the growth rate of the renewal sequence driven by the tilted
weights a_s = e^{phi . f(s) + v(s)} p(s), i.e. the infimum of zeta with
sum_s a_s e^{-zeta s} <= 1. It is convex in phi and finite everywhere for
the supported model classes; a Cauchy noise coordinate admits no exponential
moments, so tilting it is rejected except at exactly zero.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EligibilityError
from .kernel import BISECT_TOL, LogWeightSequence, bisect_growth
from .model import RenewalModel, require_valid

CONVEXITY_TOL = 1e-9

STATUS_CONVERGED = "converged"
STATUS_PLUS_INFINITY = "plus_infinity"


@dataclass(frozen=True)
class TiltResult:
    value: float
    bracket: tuple[float, float]
    iterations: int
    status: str = STATUS_CONVERGED


class ZFunction:
    """Evaluator for z(phi) with the model-dependent pieces precomputed.

    Build one of these when evaluating many tilts of the same model; the
    one-shot helper z_of constructs a fresh evaluator per call.
    """

    def __init__(self, model: RenewalModel):
        require_valid(model)
        self.model = model
        self.dim = model.dim
        w = model.waiting
        self._s0 = w.s0
        base = []
        fvecs = []
        for s in range(1, w.s0 + 1):
            p = w.head.get(s, 0.0)
            if p > 0.0:
                base.append(model.v(s) + math.log(p))
                fvecs.append(model.f(s))
            else:
                base.append(-math.inf)
                fvecs.append((0.0,) * model.dim)
        self._base = tuple(base)
        self._f = np.array(fvecs, dtype=np.float64).reshape(len(base), model.dim)
        if w.tail is not None:
            gamma, delta = model.potential.tail_affine
            self._tail_base = (
                gamma + math.log(w.tail.c),
                delta + math.log(w.tail.rho),
            )
            rows = model.reward.tail_affine
            self._alpha = np.array([r[0] for r in rows], dtype=np.float64)
            self._beta = np.array([r[1] for r in rows], dtype=np.float64)
        else:
            self._tail_base = None
        self._noise_coord = None if model.reward.noise is None else model.reward.noise.coord

    def _coerce(self, phi) -> np.ndarray:
        arr = np.atleast_1d(np.asarray(phi, dtype=np.float64))
        if arr.shape != (self.dim,):
            raise EligibilityError(
                f"tilt vector has shape {arr.shape}, model has dimension {self.dim}"
            )
        if not np.all(np.isfinite(arr)):
            raise EligibilityError(f"tilt vector must be finite, got {arr}")
        if self._noise_coord is not None and arr[self._noise_coord] != 0.0:
            raise EligibilityError(
                "the Cauchy reward coordinate has no exponential moments; "
                f"phi[{self._noise_coord}] must be exactly 0"
            )
        return arr

    def weights_for(self, phi) -> LogWeightSequence:
        """Tilted log-weights ln a_s = phi . f(s) + v(s) + ln p(s)."""
        arr = self._coerce(phi)
        shift = self._f @ arr
        head = tuple(
            b + float(sh) if b != -math.inf else -math.inf
            for b, sh in zip(self._base, shift)
        )
        tail = None
        if self._tail_base is not None:
            u0, r0 = self._tail_base
            tail = (u0 + float(self._alpha @ arr), r0 + float(self._beta @ arr))
        return LogWeightSequence(head=head, tail=tail)

    def __call__(self, phi, *, tol: float = BISECT_TOL) -> TiltResult:
        weights = self.weights_for(phi)
        value, bracket, iters = bisect_growth(weights, tol=tol)
        return TiltResult(value=value, bracket=bracket, iterations=iters)


def z_of(model: RenewalModel, phi) -> TiltResult:
    """One-shot z(phi). See ZFunction for batch evaluation."""
    return ZFunction(model)(phi)


@dataclass(frozen=True)
class MidpointCheck:
    """Discrete convexity certificate over a grid.

    For every pair of grid points whose midpoint is itself a grid point the
    midpoint value must not exceed the chord average by more than the
    tolerance.
    """

    triples: int
    max_violation: float
    tol: float = CONVEXITY_TOL

    @property
    def ok(self) -> bool:
        return self.triples == 0 or self.max_violation <= self.tol


@dataclass(frozen=True)
class ZGraph:
    rows: tuple[tuple[tuple[float, ...], TiltResult], ...]
    convexity: MidpointCheck


def _midpoint_violations(points: list[np.ndarray], values: list[float]) -> MidpointCheck:
    index = {}
    for i, p in enumerate(points):
        index[tuple(np.round(p, 10))] = i
    n = len(points)
    triples = 0
    worst = -math.inf
    if n * n > 400_000:
        return MidpointCheck(triples=0, max_violation=0.0)
    for i in range(n):
        for k in range(i + 1, n):
            mid = 0.5 * (points[i] + points[k])
            j = index.get(tuple(np.round(mid, 10)))
            if j is None or j == i or j == k:
                continue
            triples += 1
            worst = max(worst, values[j] - 0.5 * (values[i] + values[k]))
    return MidpointCheck(triples=triples, max_violation=worst if triples else 0.0)


def z_graph(model: RenewalModel, phis: Iterable, *, workers: int | None = None) -> ZGraph:
    """Evaluate z on a grid and certify convexity on the grid's midpoints."""
    zf = ZFunction(model)
    phi_list = [np.atleast_1d(np.asarray(p, dtype=np.float64)) for p in phis]
    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(zf, phi_list))
    else:
        results = [zf(p) for p in phi_list]
    check = _midpoint_violations(phi_list, [r.value for r in results])
    rows = tuple((tuple(float(x) for x in p), r) for p, r in zip(phi_list, results))
    return ZGraph(rows=rows, convexity=check)
