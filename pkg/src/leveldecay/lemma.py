"""Engine for the generalized level-set decay lemma.

A :class:`DecayHypothesis` packages the constants of the level-set
inequality

    psi(h) <= c1 * (h**A * psi(k)**B + psi(k)**C) / (h - k)**D

for all h > k >= k0, where ``psi`` is nonincreasing and nonnegative.
Depending on the exponents ``B`` and ``C`` the inequality forces one of
three decay regimes, each with a fully explicit envelope:

* ``PowerDecay`` (``max(B, C) < 1`` with balanced exponents):
  ``psi(k) <= c_bar * k**(-lam)``;
* ``ExponentialDecay`` (``B = C = 1``): a stretched-exponential envelope
  with scale ``tau``;
* ``Vanishing`` (``min(B, C) > 1``): ``psi`` vanishes at a finite level
  ``2 * L``.

This module classifies hypotheses, computes the envelope constants
exactly as printed in the source proofs, evaluates envelopes, verifies
both the hypothesis and its conclusion on tabulated functions
(:class:`PsiTable`), and runs the geometric recursion
(:func:`giusti_recursion`) used by the vanishing case.
"""
from __future__ import annotations

import enum
import math
import random
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple

__all__ = [
    "AllKnotPairs",
    "CaseClass",
    "CaseTag",
    "CheckReport",
    "DecayHypothesis",
    "Doubling",
    "EnvelopeConstants",
    "EnvelopeReport",
    "GiustiResult",
    "PsiTable",
    "RandomPairs",
    "WrongCaseError",
    "check_envelope",
    "check_hypothesis",
    "classify",
    "envelope",
    "exp_decay_tau",
    "giusti_recursion",
    "level_sequence",
    "power_decay_constants",
    "vanishing_level",
]

#: Default tolerance for case classification (|B-1|, |C-1| and the
#: balance residual all compare against this).
CLASSIFY_TOL = 1e-9

#: Relative slack allowed for "nonincreasing" table values (absorbs the
#: rounding of values produced by floating-point formulas).
_MONOTONE_SLACK = 1e-12


class WrongCaseError(ValueError):
    """An operation was applied to a hypothesis of the wrong case."""


class CaseTag(enum.Enum):
    POWER_DECAY = "PowerDecay"
    EXPONENTIAL_DECAY = "ExponentialDecay"
    VANISHING = "Vanishing"
    UNCLASSIFIED = "Unclassified"


@dataclass(frozen=True)
class CaseClass:
    """Classification result: the case tag plus the balance residual.

    ``detail`` is the residual (D-A)/(1-B) - D/(1-C) whenever
    ``max(B, C) < 1`` makes it well defined, and ``None`` otherwise.
    """

    tag: CaseTag
    detail: Optional[float] = None


@dataclass(frozen=True)
class DecayHypothesis:
    """Constants (c1, A, B, C, D, k0) of the level-set inequality."""

    c1: float
    A: float
    B: float
    C: float
    D: float
    k0: float = 0.0

    def __post_init__(self) -> None:
        fields = (self.c1, self.A, self.B, self.C, self.D, self.k0)
        if not all(math.isfinite(v) for v in fields):
            raise ValueError("all hypothesis fields must be finite")
        if self.c1 <= 0.0:
            raise ValueError(f"c1 must be positive, got {self.c1}")
        for name, value in (("A", self.A), ("B", self.B), ("C", self.C), ("D", self.D)):
            if value <= 0.0:
                raise ValueError(f"exponent {name} must be positive, got {value}")
        if not self.A < self.D:
            raise ValueError(f"A must be smaller than D, got A={self.A}, D={self.D}")
        if self.k0 < 0.0:
            raise ValueError(f"k0 must be nonnegative, got {self.k0}")


def classify(hyp: DecayHypothesis, tol: float = CLASSIFY_TOL) -> CaseClass:
    """Classify a hypothesis into its decay case.

    ``ExponentialDecay`` requires both B and C within ``tol`` of 1;
    ``Vanishing`` requires ``min(B, C) > 1``; ``PowerDecay`` requires
    ``max(B, C) < 1`` together with the balance identity
    ``(D-A)/(1-B) == D/(1-C)`` within ``tol``.  Everything else is
    ``Unclassified``.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    B, C = hyp.B, hyp.C
    if abs(B - 1.0) <= tol and abs(C - 1.0) <= tol:
        return CaseClass(CaseTag.EXPONENTIAL_DECAY)
    if min(B, C) > 1.0:
        return CaseClass(CaseTag.VANISHING)
    if max(B, C) < 1.0:
        residual = (hyp.D - hyp.A) / (1.0 - B) - hyp.D / (1.0 - C)
        if abs(residual) <= tol:
            return CaseClass(CaseTag.POWER_DECAY, residual)
        return CaseClass(CaseTag.UNCLASSIFIED, residual)
    return CaseClass(CaseTag.UNCLASSIFIED)


@dataclass(frozen=True)
class EnvelopeConstants:
    """Explicit envelope constants; fields outside the case are None."""

    case: CaseClass
    lam: Optional[float] = None
    M: Optional[float] = None
    c_bar: Optional[float] = None
    tau: Optional[float] = None
    L: Optional[float] = None


def _require_case(hyp: DecayHypothesis, tag: CaseTag, op: str) -> CaseClass:
    case = classify(hyp)
    if case.tag is not tag:
        raise WrongCaseError(
            f"{op} requires a {tag.value} hypothesis, got {case.tag.value}"
        )
    return case


def power_decay_constants(hyp: DecayHypothesis, psi_at_k0: float) -> EnvelopeConstants:
    """Envelope constants for the power-decay case.

    With c1' = max(c1, 1) and rho(k0) = k0**lam * psi(k0):

        lam   = (D - A) / (1 - B)
        M     = c1'**(1/(1-B)) * 2**((lam+A+1)/(1-B)) * (1 + rho(k0))**B
        c_bar = 2**lam * M

    and the claimed conclusion is psi(k) <= c_bar * k**(-lam).
    """
    case = _require_case(hyp, CaseTag.POWER_DECAY, "power_decay_constants")
    if psi_at_k0 < 0.0:
        raise ValueError("psi_at_k0 must be nonnegative")
    lam = (hyp.D - hyp.A) / (1.0 - hyp.B)
    c1_clamped = max(hyp.c1, 1.0)
    rho = hyp.k0**lam * psi_at_k0
    M = (
        c1_clamped ** (1.0 / (1.0 - hyp.B))
        * 2.0 ** ((lam + hyp.A + 1.0) / (1.0 - hyp.B))
        * (1.0 + rho) ** hyp.B
    )
    c_bar = 2.0**lam * M
    return EnvelopeConstants(case=case, lam=lam, M=M, c_bar=c_bar)


def exp_decay_tau(hyp: DecayHypothesis) -> EnvelopeConstants:
    """Envelope scale for the exponential-decay case.

    tau = max{ k0 + 1,
               (2 c1 e 2**((2D-A)A/(D-A)) (D-A)**D / D**D)**(1/(D-A)) }

    and the claimed conclusion is
    psi(k) <= psi(k0) * exp(1 - ((k - k0)/tau)**((D-A)/D)).
    """
    case = _require_case(hyp, CaseTag.EXPONENTIAL_DECAY, "exp_decay_tau")
    A, D = hyp.A, hyp.D
    inner = (
        2.0
        * hyp.c1
        * math.e
        * 2.0 ** (((2.0 * D - A) * A) / (D - A))
        * (D - A) ** D
        / D**D
    )
    tau = max(hyp.k0 + 1.0, inner ** (1.0 / (D - A)))
    return EnvelopeConstants(case=case, tau=tau)


def vanishing_level(hyp: DecayHypothesis, psi_at_k0: float) -> EnvelopeConstants:
    """Vanishing level L for the case min(B, C) > 1.

    The proof only uses x**B + x**C <= 2 x**min(B,C) for x <= 1, so the
    formula is applied with B normalized to max(B, C) and C to
    min(B, C).  The claimed conclusion is psi(2L) = 0 with

        L = max{ 1, 2 k0,
                 (c1 2**(1+D) (1+psi(k0))**B)**(1/(D-A)),
                 (c1**(C/(C-1)) (1+psi(k0))**B
                  * 2**(D+1+(A+D+1)/(C-1)+D/(C-1)**2))**((C-1)/((D-A)C)) }.
    """
    case = _require_case(hyp, CaseTag.VANISHING, "vanishing_level")
    if psi_at_k0 < 0.0:
        raise ValueError("psi_at_k0 must be nonnegative")
    B = max(hyp.B, hyp.C)
    C = min(hyp.B, hyp.C)
    c1, A, D, k0 = hyp.c1, hyp.A, hyp.D, hyp.k0
    one_plus = (1.0 + psi_at_k0) ** B
    third = (c1 * 2.0 ** (1.0 + D) * one_plus) ** (1.0 / (D - A))
    fourth = (
        c1 ** (C / (C - 1.0))
        * one_plus
        * 2.0 ** (D + 1.0 + (A + D + 1.0) / (C - 1.0) + D / (C - 1.0) ** 2)
    ) ** ((C - 1.0) / ((D - A) * C))
    L = max(1.0, 2.0 * k0, third, fourth)
    return EnvelopeConstants(case=case, L=L)


def _constants_for(hyp: DecayHypothesis, psi_at_k0: float) -> EnvelopeConstants:
    case = classify(hyp)
    if case.tag is CaseTag.POWER_DECAY:
        return power_decay_constants(hyp, psi_at_k0)
    if case.tag is CaseTag.EXPONENTIAL_DECAY:
        return exp_decay_tau(hyp)
    if case.tag is CaseTag.VANISHING:
        return vanishing_level(hyp, psi_at_k0)
    raise WrongCaseError("hypothesis is Unclassified; no envelope exists")


def _envelope_value(
    hyp: DecayHypothesis, env: EnvelopeConstants, psi_at_k0: float, k: float
) -> float:
    if not k >= hyp.k0:
        raise ValueError(f"level k={k} is below the hypothesis origin k0={hyp.k0}")
    tag = env.case.tag
    if tag is CaseTag.POWER_DECAY:
        if k == 0.0:
            return math.inf
        return env.c_bar * k ** (-env.lam)
    if tag is CaseTag.EXPONENTIAL_DECAY:
        if k == hyp.k0:
            return psi_at_k0 * math.e
        exponent = 1.0 - ((k - hyp.k0) / env.tau) ** ((hyp.D - hyp.A) / hyp.D)
        return psi_at_k0 * math.exp(exponent)
    if tag is CaseTag.VANISHING:
        return psi_at_k0 if k < 2.0 * env.L else 0.0
    raise WrongCaseError("hypothesis is Unclassified; no envelope exists")


def envelope(hyp: DecayHypothesis, psi_at_k0: float, k: float) -> float:
    """Evaluate the claimed envelope of the hypothesis' case at level k.

    Power decay returns ``+inf`` at k = 0 (the bound is vacuous there);
    the exponential envelope equals ``psi(k0) * e`` exactly at k = k0;
    the vanishing envelope is the step ``psi(k0)`` below ``2L`` and 0 at
    and beyond it.  Raises :class:`ValueError` for k below k0 and
    :class:`WrongCaseError` for unclassified hypotheses.
    """
    env = _constants_for(hyp, psi_at_k0)
    return _envelope_value(hyp, env, psi_at_k0, k)


# --------------------------------------------------------------------------
# tabulated psi
# --------------------------------------------------------------------------
class PsiTable:
    """A nonincreasing nonnegative step function tabulated at knots.

    Evaluation follows the right-continuous step convention: psi(k) is
    the value at the largest knot <= k.  Values may rise by at most a
    1e-12 relative slack between consecutive knots, absorbing rounding
    in externally computed tables.
    """

    __slots__ = ("knots", "values", "k0")

    def __init__(
        self, knots: Sequence[float], values: Sequence[float], k0: float
    ) -> None:
        knots = tuple(float(k) for k in knots)
        values = tuple(float(v) for v in values)
        if len(knots) == 0:
            raise ValueError("table must contain at least one knot")
        if len(knots) != len(values):
            raise ValueError(
                f"knots and values differ in length: {len(knots)} vs {len(values)}"
            )
        if not (math.isfinite(k0) and k0 >= 0.0):
            raise ValueError(f"k0 must be finite and nonnegative, got {k0}")
        if not all(math.isfinite(k) for k in knots):
            raise ValueError("knots must be finite")
        if not all(math.isfinite(v) for v in values):
            raise ValueError("values must be finite")
        if knots[0] < k0:
            raise ValueError(f"first knot {knots[0]} lies below k0={k0}")
        for a, b in zip(knots, knots[1:]):
            if not b > a:
                raise ValueError(f"knots must be strictly increasing, got {a} then {b}")
        for v in values:
            if v < 0.0:
                raise ValueError(f"values must be nonnegative, got {v}")
        for a, b in zip(values, values[1:]):
            if b > a + _MONOTONE_SLACK * a:
                raise ValueError(
                    f"values must be nonincreasing, got {a} then {b}"
                )
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "k0", float(k0))

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("PsiTable is immutable")

    def __len__(self) -> int:
        return len(self.knots)

    def __repr__(self) -> str:
        return f"PsiTable({len(self.knots)} knots on [{self.knots[0]}, {self.knots[-1]}], k0={self.k0})"

    def evaluate(self, k: float) -> float:
        """Value at the largest knot <= k (right-continuous step)."""
        if k < self.knots[0]:
            raise ValueError(f"level {k} is below the first knot {self.knots[0]}")
        return self.values[bisect_right(self.knots, k) - 1]


# --------------------------------------------------------------------------
# pair strategies and checks
# --------------------------------------------------------------------------
Pair = Tuple[float, float, float, float]  # (h, k, psi_h, psi_k)


class AllKnotPairs:
    """Every ordered knot pair (h, k) with h > k."""

    def pairs(self, table: PsiTable) -> Iterator[Pair]:
        knots, values = table.knots, table.values
        for i in range(len(knots)):
            for j in range(i + 1, len(knots)):
                yield knots[j], knots[i], values[j], values[i]


class Doubling:
    """Only the pairs (h, k) = (2k, k); psi(2k) uses the step convention."""

    def pairs(self, table: PsiTable) -> Iterator[Pair]:
        top = table.knots[-1]
        for k, v in zip(table.knots, table.values):
            h = 2.0 * k
            if h > top or h <= k:
                continue
            yield h, k, table.evaluate(h), v


class RandomPairs:
    """A reproducible random sample of `count` knot pairs."""

    def __init__(self, count: int, seed: int) -> None:
        if count <= 0:
            raise ValueError("count must be positive")
        self.count = int(count)
        self.seed = int(seed)

    def pairs(self, table: PsiTable) -> Iterator[Pair]:
        n = len(table.knots)
        if n < 2:
            return
        rng = random.Random(self.seed)
        for _ in range(self.count):
            i = rng.randrange(0, n - 1)
            j = rng.randrange(i + 1, n)
            yield table.knots[j], table.knots[i], table.values[j], table.values[i]


@dataclass(frozen=True)
class CheckReport:
    """Result of verifying the level-set inequality on sampled pairs.

    ``max_ratio`` is the maximum of lhs/rhs over pairs (<= 1 means the
    inequality holds on the sample); ``worst_pair`` is the (h, k)
    attaining it; ``first_violation`` is the first sampled pair with
    ratio > 1, or None.
    """

    max_ratio: float
    passed: bool
    worst_pair: Tuple[float, float]
    pair_count: int
    first_violation: Optional[Tuple[float, float]]


def check_hypothesis(
    table: PsiTable, hyp: DecayHypothesis, strategy
) -> CheckReport:
    """Check the inequality psi(h) <= c1 (h^A psi(k)^B + psi(k)^C)/(h-k)^D.

    Ratios are lhs/rhs per sampled pair: 0/0 counts as 0 (the inequality
    is trivially satisfied) and positive/0 as +inf.  Raises
    :class:`ValueError` when the table lies below the hypothesis origin
    or the strategy produces no pairs.
    """
    if table.k0 < hyp.k0:
        raise ValueError(
            f"table origin k0={table.k0} lies below hypothesis k0={hyp.k0}"
        )
    max_ratio = -math.inf
    worst_pair: Optional[Tuple[float, float]] = None
    first_violation: Optional[Tuple[float, float]] = None
    count = 0
    for h, k, psi_h, psi_k in strategy.pairs(table):
        count += 1
        structure = (h**hyp.A * psi_k**hyp.B + psi_k**hyp.C) / (h - k) ** hyp.D
        rhs = hyp.c1 * structure
        if rhs > 0.0:
            ratio = psi_h / rhs
        elif psi_h == 0.0:
            ratio = 0.0
        else:
            ratio = math.inf
        if ratio > max_ratio:
            max_ratio = ratio
            worst_pair = (h, k)
        if ratio > 1.0 and first_violation is None:
            first_violation = (h, k)
    if count == 0:
        raise ValueError("pair strategy produced no pairs on this table")
    return CheckReport(
        max_ratio=max_ratio,
        passed=max_ratio <= 1.0,
        worst_pair=worst_pair,
        pair_count=count,
        first_violation=first_violation,
    )


@dataclass(frozen=True)
class EnvelopeReport:
    """Result of comparing a table against the claimed envelope.

    ``max_ratio`` is the maximum of psi(knot)/envelope(knot); 0/0 counts
    as 0 and positive/0 as +inf.  ``first_violation`` is the first knot
    where the ratio exceeds 1, or None.
    """

    max_ratio: float
    passed: bool
    first_violation: Optional[float]


def check_envelope(
    table: PsiTable, hyp: DecayHypothesis, psi_at_k0: float
) -> EnvelopeReport:
    """Check the case's claimed envelope against every table knot."""
    if table.k0 < hyp.k0:
        raise ValueError(
            f"table origin k0={table.k0} lies below hypothesis k0={hyp.k0}"
        )
    env = _constants_for(hyp, psi_at_k0)
    max_ratio = 0.0
    first_violation: Optional[float] = None
    for knot, value in zip(table.knots, table.values):
        bound = _envelope_value(hyp, env, psi_at_k0, knot)
        if bound > 0.0:
            ratio = value / bound
        elif value == 0.0:
            ratio = 0.0
        else:
            ratio = math.inf
        max_ratio = max(max_ratio, ratio)
        if ratio > 1.0 and first_violation is None:
            first_violation = knot
    return EnvelopeReport(
        max_ratio=max_ratio,
        passed=max_ratio <= 1.0,
        first_violation=first_violation,
    )


# --------------------------------------------------------------------------
# geometric recursion
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class GiustiResult:
    """Iterates of x_{i+1} = c_bar m^i x_i^beta and the decay bound.

    ``premise_holds`` records whether x0 <= c_bar^{-1/(beta-1)}
    m^{-1/(beta-1)^2}; ``bound_holds`` whether every iterate satisfies
    x_i <= m^{-i/(beta-1)} x0 within 4 ulps; ``first_violation`` is the
    first index breaking the bound, or None.
    """

    xs: list
    premise_holds: bool
    bound_holds: bool
    first_violation: Optional[int]


def giusti_recursion(
    c_bar: float, m: float, beta: float, x0: float, steps: int
) -> GiustiResult:
    """Iterate the geometric recursion and check the decay bound.

    The recursion is run with equality, x_{i+1} = c_bar * m**i * x_i**beta,
    which is the extremal trajectory of the recursive inequality.  The
    bound comparison allows 4 ulps of slack per step to absorb the
    rounding of the power evaluations.
    """
    if not (math.isfinite(c_bar) and c_bar > 0.0):
        raise ValueError(f"c_bar must be positive and finite, got {c_bar}")
    if not (math.isfinite(m) and m > 1.0):
        raise ValueError(f"m must exceed 1, got {m}")
    if not (math.isfinite(beta) and beta > 1.0):
        raise ValueError(f"beta must exceed 1, got {beta}")
    if not (math.isfinite(x0) and x0 >= 0.0):
        raise ValueError(f"x0 must be nonnegative and finite, got {x0}")
    if steps < 0:
        raise ValueError(f"steps must be nonnegative, got {steps}")
    threshold = c_bar ** (-1.0 / (beta - 1.0)) * m ** (-1.0 / (beta - 1.0) ** 2)
    premise_holds = x0 <= threshold
    xs = [x0]
    x = x0
    for i in range(steps):
        try:
            x = c_bar * m**i * x**beta
        except OverflowError:
            x = math.inf
        xs.append(x)
    bound_holds = True
    first_violation: Optional[int] = None
    for i, xi in enumerate(xs):
        bound = m ** (-i / (beta - 1.0)) * x0
        slack = bound
        for _ in range(4):
            slack = math.nextafter(slack, math.inf)
        if xi > slack:
            bound_holds = False
            first_violation = i
            break
    return GiustiResult(
        xs=xs,
        premise_holds=premise_holds,
        bound_holds=bound_holds,
        first_violation=first_violation,
    )


def level_sequence(
    hyp: DecayHypothesis, constants: EnvelopeConstants, count: int
) -> list:
    """First `count` levels of the proof's iteration sequence.

    ExponentialDecay: k_s = k0 + tau * s**(D/(D-A)), s = 0, 1, ...;
    Vanishing: k_i = 2L * (1 - 2**(-i-1)), increasing from L toward 2L.
    """
    if count < 0:
        raise ValueError(f"count must be nonnegative, got {count}")
    tag = constants.case.tag
    if tag is CaseTag.EXPONENTIAL_DECAY:
        power = hyp.D / (hyp.D - hyp.A)
        return [hyp.k0 + constants.tau * float(s) ** power for s in range(count)]
    if tag is CaseTag.VANISHING:
        return [2.0 * constants.L * (1.0 - 2.0 ** (-i - 1)) for i in range(count)]
    raise WrongCaseError(
        f"level_sequence requires ExponentialDecay or Vanishing, got {tag.value}"
    )
