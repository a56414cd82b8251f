"""Model description layer.

A renewal-reward model is built from three pieces sharing one waiting-time
axis: the waiting-time distribution (finite head, optional geometric tail,
optional atom at infinity), a potential v(s) weighting each renewal, and a
reward map f(s) in R^d with an optional Cauchy noise coordinate. Types are
immutable; every operation here is a pure function of its arguments.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

from .errors import ConfigError, ModelValidationError

# Positive probabilities this small would underflow any exponent budget the
# numerics rely on; configs carrying them are rejected outright.
MIN_POSITIVE_PROB = 1e-300

NORMALIZATION_TOL = 1e-12


def _frozen_map(pairs: Mapping) -> MappingProxyType:
    return MappingProxyType(dict(pairs))


@dataclass(frozen=True)
class GeometricTail:
    """Tail weights p(s) = c * rho**s for every s > s0."""

    rho: float
    c: float

    def __post_init__(self) -> None:
        if not (0.0 < self.rho < 1.0):
            raise ConfigError(f"geometric tail needs rho in (0, 1), got {self.rho}")
        if not (self.c > 0.0) or not math.isfinite(self.c):
            raise ConfigError(f"geometric tail needs c > 0, got {self.c}")

    def mass_above(self, t: int, s0: int) -> float:
        """Total tail mass on {s > max(t, s0)}."""
        start = max(t, s0)
        return self.c * self.rho ** (start + 1) / (1.0 - self.rho)

    def log_mass_above(self, t: int, s0: int) -> float:
        start = max(t, s0)
        return math.log(self.c) + (start + 1) * math.log(self.rho) - math.log1p(-self.rho)


@dataclass(frozen=True)
class CauchyNoise:
    """Standard Cauchy noise added to one reward coordinate per renewal."""

    coord: int

    def __post_init__(self) -> None:
        if self.coord < 0:
            raise ConfigError(f"noise coordinate must be nonnegative, got {self.coord}")


@dataclass(frozen=True)
class WaitingDistribution:
    """Distribution of a single waiting time on {1, 2, ...} + {infinity}.

    head maps s in {1..s0} to p(s); omitted s carry zero mass. The optional
    geometric tail covers all s > s0. p_infinity is the defect P[S = inf].
    """

    head: Mapping[int, float]
    tail: GeometricTail | None = None
    p_infinity: float = 0.0

    def __post_init__(self) -> None:
        cleaned = {}
        for s, p in dict(self.head).items():
            if not isinstance(s, int) or isinstance(s, bool) or s < 1:
                raise ConfigError(f"waiting-time support must be integers >= 1, got {s!r}")
            p = float(p)
            if not math.isfinite(p) or p < 0.0:
                raise ConfigError(f"p({s}) must be a finite nonnegative number, got {p}")
            if 0.0 < p < MIN_POSITIVE_PROB:
                raise ConfigError(f"p({s}) = {p} is below the {MIN_POSITIVE_PROB} floor")
            if p > 0.0:
                cleaned[s] = p
        if not math.isfinite(self.p_infinity) or not (0.0 <= self.p_infinity <= 1.0):
            raise ConfigError(f"p_infinity must lie in [0, 1], got {self.p_infinity}")
        if 0.0 < self.p_infinity < MIN_POSITIVE_PROB:
            raise ConfigError("p_infinity is positive but below the representable floor")
        if not cleaned and self.tail is None:
            raise ConfigError("waiting distribution has no finite support at all")
        object.__setattr__(self, "head", _frozen_map(cleaned))

    @property
    def s0(self) -> int:
        return max(self.head) if self.head else 0

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(sorted(self.head))

    @property
    def head_mass(self) -> float:
        return math.fsum(self.head.values())

    @property
    def tail_mass(self) -> float:
        if self.tail is None:
            return 0.0
        return self.tail.mass_above(0, self.s0)

    @property
    def finite_mass(self) -> float:
        return self.head_mass + self.tail_mass

    @property
    def total_mass(self) -> float:
        return self.finite_mass + self.p_infinity

    def prob(self, s: int) -> float:
        if s <= self.s0:
            return self.head.get(s, 0.0)
        if self.tail is not None:
            return self.tail.c * self.tail.rho**s
        return 0.0

    def survival(self, t: int) -> float:
        """P[S > t] including the atom at infinity."""
        return math.exp(self.log_survival(t)) if self.log_survival(t) > -math.inf else 0.0

    def log_survival(self, t: int) -> float:
        """ln P[S > t], exact closed form, -inf for zero mass."""
        parts = []
        if t < self.s0:
            rest = math.fsum(p for s, p in self.head.items() if s > t)
            if rest > 0.0:
                parts.append(math.log(rest))
        if self.tail is not None:
            parts.append(self.tail.log_mass_above(t, self.s0))
        if self.p_infinity > 0.0:
            parts.append(math.log(self.p_infinity))
        if not parts:
            return -math.inf
        out = parts[0]
        for x in parts[1:]:
            hi, lo = (out, x) if out >= x else (x, out)
            out = hi + math.log1p(math.exp(lo - hi))
        return out


@dataclass(frozen=True)
class Potential:
    """Renewal potential v(s); affine tail v(s) = gamma + delta*s for s > s0."""

    head: Mapping[int, float]
    tail_affine: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        cleaned = {}
        for s, v in dict(self.head).items():
            if not isinstance(s, int) or isinstance(s, bool) or s < 1:
                raise ConfigError(f"potential support must be integers >= 1, got {s!r}")
            v = float(v)
            if not math.isfinite(v):
                raise ConfigError(f"v({s}) must be finite, got {v}")
            cleaned[s] = v
        if self.tail_affine is not None:
            gamma, delta = (float(x) for x in self.tail_affine)
            if not (math.isfinite(gamma) and math.isfinite(delta)):
                raise ConfigError("potential tail_affine coefficients must be finite")
            object.__setattr__(self, "tail_affine", (gamma, delta))
        object.__setattr__(self, "head", _frozen_map(cleaned))

    def value(self, s: int, s0: int) -> float:
        if s <= s0:
            if s not in self.head:
                raise ConfigError(f"potential undefined at supported waiting time s={s}")
            return self.head[s]
        if self.tail_affine is None:
            raise ConfigError(f"potential has no tail rule but s={s} exceeds the head")
        gamma, delta = self.tail_affine
        return gamma + delta * s

    @staticmethod
    def zero() -> "Potential":
        return Potential(head={}, tail_affine=(0.0, 0.0))


@dataclass(frozen=True)
class RewardMap:
    """Deterministic reward f(s) in R^d plus an optional Cauchy coordinate.

    tail_affine gives per-coordinate (alpha_j, beta_j) with
    f_j(s) = alpha_j + beta_j * s for s > s0.
    """

    dim: int
    head: Mapping[int, tuple[float, ...]]
    tail_affine: tuple[tuple[float, float], ...] | None = None
    noise: CauchyNoise | None = None

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ConfigError(f"reward dimension must be >= 1, got {self.dim}")
        cleaned = {}
        for s, vec in dict(self.head).items():
            if not isinstance(s, int) or isinstance(s, bool) or s < 1:
                raise ConfigError(f"reward support must be integers >= 1, got {s!r}")
            vec = tuple(float(x) for x in vec)
            if len(vec) != self.dim:
                raise ConfigError(f"f({s}) has {len(vec)} coordinates, expected {self.dim}")
            if not all(math.isfinite(x) for x in vec):
                raise ConfigError(f"f({s}) must be finite, got {vec}")
            cleaned[s] = vec
        if self.tail_affine is not None:
            rows = tuple(tuple(float(x) for x in row) for row in self.tail_affine)
            if len(rows) != self.dim or any(len(r) != 2 for r in rows):
                raise ConfigError("reward tail_affine needs one (alpha, beta) pair per coordinate")
            if not all(math.isfinite(x) for r in rows for x in r):
                raise ConfigError("reward tail_affine coefficients must be finite")
            object.__setattr__(self, "tail_affine", rows)
        if self.noise is not None and self.noise.coord >= self.dim:
            raise ConfigError(
                f"noise coordinate {self.noise.coord} out of range for dim {self.dim}"
            )
        object.__setattr__(self, "head", _frozen_map(cleaned))

    def value(self, s: int, s0: int) -> tuple[float, ...]:
        if s <= s0:
            if s not in self.head:
                raise ConfigError(f"reward undefined at supported waiting time s={s}")
            return self.head[s]
        if self.tail_affine is None:
            raise ConfigError(f"reward has no tail rule but s={s} exceeds the head")
        return tuple(alpha + beta * s for alpha, beta in self.tail_affine)

    @staticmethod
    def unit() -> "RewardMap":
        """One unit of reward per renewal regardless of the waiting time."""
        return RewardMap(dim=1, head={}, tail_affine=((1.0, 0.0),))


@dataclass(frozen=True)
class TailExponents:
    """Exponential decay rates of t -> P[S > t]: liminf and limsup of (1/t) ln."""

    ell_inf: float
    ell_sup: float


@dataclass(frozen=True)
class Finding:
    name: str
    ok: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...]
    growth_witness: float | None = None

    @property
    def ok(self) -> bool:
        return all(f.ok for f in self.findings)

    @property
    def failures(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if not f.ok)

    def __str__(self) -> str:
        lines = []
        for f in self.findings:
            lines.append(f"{'PASS' if f.ok else 'FAIL'}  {f.name}: {f.detail}")
        return "\n".join(lines)


@dataclass(frozen=True)
class RenewalModel:
    """A full renewal-reward model: waits, potential, rewards."""

    waiting: WaitingDistribution
    potential: Potential
    reward: RewardMap

    @property
    def s0(self) -> int:
        return self.waiting.s0

    @property
    def dim(self) -> int:
        return self.reward.dim

    @property
    def has_geometric_tail(self) -> bool:
        return self.waiting.tail is not None

    @property
    def transient(self) -> bool:
        return self.waiting.p_infinity > 0.0

    def v(self, s: int) -> float:
        return self.potential.value(s, self.s0)

    def f(self, s: int) -> tuple[float, ...]:
        return self.reward.value(s, self.s0)


# ---------------------------------------------------------------------------
# operations


def tail_exponents(model: RenewalModel) -> TailExponents:
    """Decay exponents of the waiting-time survival function.

    A positive atom at infinity pins the survival function away from zero, a
    geometric tail decays at ln(rho), and a finite support hits exact zero.
    """
    w = model.waiting
    if w.p_infinity > 0.0:
        return TailExponents(0.0, 0.0)
    if w.tail is not None:
        ell = math.log(w.tail.rho)
        return TailExponents(ell, ell)
    return TailExponents(-math.inf, -math.inf)


def _support_gcd(waiting: WaitingDistribution) -> int:
    g = 0
    for s in waiting.support:
        g = math.gcd(g, s)
    if waiting.tail is not None:
        # consecutive integers above s0 are in the support, forcing gcd 1
        g = math.gcd(g, waiting.s0 + 1)
        g = math.gcd(g, waiting.s0 + 2)
    return g


def growth_witness(model: RenewalModel) -> float:
    """sup over the finite support of (v(s) + ln p(s)) / s.

    Finiteness of this witness is exactly the extensivity bound the partition
    functions need; it also seeds the bisection bracket for the growth rates.
    """
    w = model.waiting
    best = -math.inf
    for s in w.support:
        best = max(best, (model.v(s) + math.log(w.head[s])) / s)
    if w.tail is not None:
        gamma, delta = model.potential.tail_affine
        slope = delta + math.log(w.tail.rho)
        icept = gamma + math.log(w.tail.c)
        s1 = w.s0 + 1
        # (icept + slope*s)/s is monotone in s, extremes at s0+1 and s -> inf
        best = max(best, slope + icept / s1, slope)
    return best


def validate(model: RenewalModel) -> ValidationReport:
    """Check a model against its standing assumptions; reports, never raises."""
    w = model.waiting
    findings = []

    findings.append(
        Finding(
            "finite-support",
            bool(w.support) or w.tail is not None,
            f"finite waiting times carry mass {w.finite_mass:.6g}",
        )
    )

    drift = abs(w.total_mass - 1.0)
    findings.append(
        Finding(
            "normalization",
            drift <= NORMALIZATION_TOL,
            f"total mass deviates from 1 by {drift:.3e} (tolerance {NORMALIZATION_TOL})",
        )
    )

    g = _support_gcd(w)
    findings.append(
        Finding(
            "aperiodicity",
            g == 1,
            "finite support has gcd 1" if g == 1 else f"support is {g}-periodic",
        )
    )

    pot_ok, pot_msg = True, "potential defined on the whole finite support"
    try:
        for s in w.support:
            model.v(s)
        if w.tail is not None and model.potential.tail_affine is None:
            pot_ok, pot_msg = False, "waiting tail present but potential has no tail rule"
    except ConfigError as exc:
        pot_ok, pot_msg = False, str(exc)
    findings.append(Finding("potential-domain", pot_ok, pot_msg))

    rew_ok, rew_msg = True, "reward defined on the whole finite support"
    try:
        for s in w.support:
            model.f(s)
        if w.tail is not None and model.reward.tail_affine is None:
            rew_ok, rew_msg = False, "waiting tail present but reward has no tail rule"
    except ConfigError as exc:
        rew_ok, rew_msg = False, str(exc)
    findings.append(Finding("reward-domain", rew_ok, rew_msg))

    witness = None
    if pot_ok and (bool(w.support) or w.tail is not None):
        witness = growth_witness(model)
        findings.append(
            Finding(
                "extensivity",
                math.isfinite(witness),
                f"sup_s (v(s) + ln p(s))/s = {witness:.6g}",
            )
        )
    else:
        findings.append(Finding("extensivity", False, "not evaluable without a potential domain"))

    return ValidationReport(findings=tuple(findings), growth_witness=witness)


def require_valid(model: RenewalModel) -> None:
    """Raise unless validate() passes; downstream operations call this."""
    report = validate(model)
    if not report.ok:
        msgs = "; ".join(f"{f.name}: {f.detail}" for f in report.failures)
        raise ModelValidationError(f"model failed validation: {msgs}")


def frobenius_horizon(model: RenewalModel) -> int:
    """Largest t >= 1 that no sum of supported waiting times can reach.

    Returns 0 when every t >= 1 is reachable. Only defined for aperiodic
    models; the reachability table is a boolean DP over a window wide enough
    to certify the answer (min * max of the support, plus one max-step).
    """
    w = model.waiting
    if _support_gcd(w) != 1:
        raise ModelValidationError("frobenius horizon undefined for periodic support")
    parts = list(w.support)
    if w.tail is not None:
        # every integer above s0 is supported, so only {1..s0} can be missing
        bound = w.s0
    else:
        bound = min(parts) * max(parts) + max(parts)
    reach = [False] * (bound + 1)
    reach[0] = True
    for x in range(1, bound + 1):
        hit = any(x >= s and reach[x - s] for s in parts)
        if not hit and w.tail is not None and x > w.s0:
            hit = True
        reach[x] = hit
    missing = [x for x in range(1, bound + 1) if not reach[x]]
    return missing[-1] if missing else 0


# ---------------------------------------------------------------------------
# config files


def model_to_dict(model: RenewalModel) -> dict:
    w, pot, rew = model.waiting, model.potential, model.reward
    return {
        "waiting": {
            "head": {str(s): p for s, p in sorted(w.head.items())},
            "tail": None
            if w.tail is None
            else {"type": "geometric", "rho": w.tail.rho, "c": w.tail.c},
            "p_infinity": w.p_infinity,
        },
        "potential": {
            "head": {str(s): v for s, v in sorted(pot.head.items())},
            "tail_affine": None if pot.tail_affine is None else list(pot.tail_affine),
        },
        "reward": {
            "dim": rew.dim,
            "head": {str(s): list(vec) for s, vec in sorted(rew.head.items())},
            "tail_affine": None
            if rew.tail_affine is None
            else [list(r) for r in rew.tail_affine],
            "noise": None
            if rew.noise is None
            else {"type": "cauchy", "coord": rew.noise.coord},
        },
    }


def _int_keys(raw: Mapping, what: str) -> dict:
    out = {}
    for k, v in raw.items():
        try:
            s = int(k)
        except (TypeError, ValueError):
            raise ConfigError(f"{what} key {k!r} is not an integer") from None
        out[s] = v
    return out


def model_from_dict(doc: Mapping) -> RenewalModel:
    try:
        wdoc = doc["waiting"]
        pdoc = doc.get("potential", {"head": {}, "tail_affine": None})
        rdoc = doc["reward"]
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"model document missing section: {exc}") from None

    tail = None
    if wdoc.get("tail") is not None:
        tdoc = wdoc["tail"]
        if tdoc.get("type", "geometric") != "geometric":
            raise ConfigError(f"unknown waiting tail type {tdoc.get('type')!r}")
        tail = GeometricTail(rho=float(tdoc["rho"]), c=float(tdoc["c"]))
    waiting = WaitingDistribution(
        head=_int_keys(wdoc.get("head", {}), "waiting head"),
        tail=tail,
        p_infinity=float(wdoc.get("p_infinity", 0.0)),
    )

    pt = pdoc.get("tail_affine")
    potential = Potential(
        head=_int_keys(pdoc.get("head", {}), "potential head"),
        tail_affine=None if pt is None else (float(pt[0]), float(pt[1])),
    )

    noise = None
    if rdoc.get("noise") is not None:
        ndoc = rdoc["noise"]
        if ndoc.get("type") != "cauchy":
            raise ConfigError(f"unknown noise type {ndoc.get('type')!r}")
        noise = CauchyNoise(coord=int(ndoc["coord"]))
    rt = rdoc.get("tail_affine")
    reward = RewardMap(
        dim=int(rdoc["dim"]),
        head={s: tuple(vec) for s, vec in _int_keys(rdoc.get("head", {}), "reward head").items()},
        tail_affine=None if rt is None else tuple((float(a), float(b)) for a, b in rt),
        noise=noise,
    )
    return RenewalModel(waiting=waiting, potential=potential, reward=reward)


def load_model(path: str | Path) -> RenewalModel:
    p = Path(path)
    try:
        doc = json.loads(p.read_text())
    except FileNotFoundError:
        raise ConfigError(f"model file not found: {p}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"model file {p} is not valid JSON: {exc}") from None
    return model_from_dict(doc)


def dump_model(model: RenewalModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")
