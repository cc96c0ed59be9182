"""Oracle tests for the decay-lemma engine.

Envelope-constant expectations are frozen from hand evaluation of the
closed formulas; recursion oracles come from exact rational iteration.
"""
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from leveldecay.lemma import (
    AllKnotPairs,
    CaseTag,
    DecayHypothesis,
    Doubling,
    PsiTable,
    RandomPairs,
    WrongCaseError,
    check_envelope,
    check_hypothesis,
    classify,
    envelope,
    exp_decay_tau,
    giusti_recursion,
    level_sequence,
    power_decay_constants,
    vanishing_level,
)


# ---------------------------------------------------------------- hypothesis type
def test_decay_hypothesis_validation():
    DecayHypothesis(c1=1.0, A=1.0, B=1.0, C=1.0, D=2.0, k0=0.0)
    with pytest.raises(ValueError):
        DecayHypothesis(c1=0.0, A=1.0, B=1.0, C=1.0, D=2.0, k0=0.0)
    with pytest.raises(ValueError):
        DecayHypothesis(c1=1.0, A=3.0, B=1.0, C=1.0, D=2.0, k0=0.0)  # A >= D
    with pytest.raises(ValueError):
        DecayHypothesis(c1=1.0, A=1.0, B=-1.0, C=1.0, D=2.0, k0=0.0)
    with pytest.raises(ValueError):
        DecayHypothesis(c1=1.0, A=1.0, B=1.0, C=1.0, D=2.0, k0=-1.0)
    with pytest.raises(ValueError):
        DecayHypothesis(c1=math.inf, A=1.0, B=1.0, C=1.0, D=2.0, k0=0.0)


# ---------------------------------------------------------------- classification
def test_classify_power_decay():
    case = classify(DecayHypothesis(1.0, A=2.0, B=0.75, C=0.5, D=4.0, k0=0.0), tol=1e-9)
    assert case.tag is CaseTag.POWER_DECAY
    # (D-A)/(1-B) = 2/0.25 = 8 and D/(1-C) = 4/0.5 = 8
    assert case.detail == pytest.approx(0.0, abs=1e-12)


def test_classify_exponential():
    case = classify(DecayHypothesis(1.0, A=1.0, B=1.0, C=1.0, D=2.0, k0=0.0), tol=1e-9)
    assert case.tag is CaseTag.EXPONENTIAL_DECAY


def test_classify_vanishing():
    case = classify(DecayHypothesis(1.0, A=1.0, B=3.0, C=2.0, D=2.0, k0=0.0), tol=1e-9)
    assert case.tag is CaseTag.VANISHING


def test_classify_unclassified_unbalanced():
    # max(B, C) < 1 but the two candidate exponents disagree
    case = classify(DecayHypothesis(1.0, A=2.0, B=0.75, C=0.25, D=4.0, k0=0.0), tol=1e-9)
    assert case.tag is CaseTag.UNCLASSIFIED


def test_classify_unclassified_mixed():
    # B < 1 < C matches no case
    case = classify(DecayHypothesis(1.0, A=1.0, B=0.5, C=2.0, D=2.0, k0=0.0), tol=1e-9)
    assert case.tag is CaseTag.UNCLASSIFIED


# ---------------------------------------------------------------- case i constants
def test_power_decay_constants_frozen_k0_zero():
    # [DERIVED]: lambda = 8; rho(k0) = 0; M = 1 * 2^{(8+2+1)/(1/4)} = 2^44;
    # c_bar = 2^8 * M = 2^52.
    hyp = DecayHypothesis(1.0, A=2.0, B=0.75, C=0.5, D=4.0, k0=0.0)
    env = power_decay_constants(hyp, psi_at_k0=1.0)
    assert env.case.tag is CaseTag.POWER_DECAY
    assert env.lam == pytest.approx(8.0, rel=1e-13)
    assert env.M == pytest.approx(2.0**44, rel=1e-12)
    assert env.c_bar == pytest.approx(2.0**52, rel=1e-12)


def test_power_decay_constants_frozen_k0_one():
    # [DERIVED]: rho(k0) = 1^8 * 1 = 1 so the extra factor is (1+1)^{3/4}.
    hyp = DecayHypothesis(1.0, A=2.0, B=0.75, C=0.5, D=4.0, k0=1.0)
    env = power_decay_constants(hyp, psi_at_k0=1.0)
    assert env.M == pytest.approx(2.0**44 * 2.0**0.75, rel=1e-12)


def test_power_decay_constants_c1_clamped():
    # c1 < 1 is clamped to 1 (the proof's normalization), so constants match c1=1.
    hyp_small = DecayHypothesis(0.25, A=2.0, B=0.75, C=0.5, D=4.0, k0=0.0)
    hyp_one = DecayHypothesis(1.0, A=2.0, B=0.75, C=0.5, D=4.0, k0=0.0)
    assert power_decay_constants(hyp_small, 1.0).M == pytest.approx(
        power_decay_constants(hyp_one, 1.0).M, rel=1e-14
    )


def test_power_decay_wrong_case():
    with pytest.raises(WrongCaseError):
        power_decay_constants(DecayHypothesis(1.0, 1.0, 1.0, 1.0, 2.0, 0.0), 1.0)


# ---------------------------------------------------------------- case ii constants
def test_exp_decay_tau_frozen():
    # [DERIVED]: inner = 2e * 2^{((4-1)*1)/1} * 1^2/2^2 = 2e*8/4 = 4e; exponent 1.
    env = exp_decay_tau(DecayHypothesis(1.0, A=1.0, B=1.0, C=1.0, D=2.0, k0=0.0))
    assert env.case.tag is CaseTag.EXPONENTIAL_DECAY
    assert env.tau == pytest.approx(4 * math.e, abs=1e-12)


def test_exp_decay_tau_k0_branch():
    env = exp_decay_tau(DecayHypothesis(1.0, A=1.0, B=1.0, C=1.0, D=2.0, k0=100.0))
    assert env.tau == pytest.approx(101.0, abs=1e-12)


def test_exp_decay_tau_monotone_in_c1():
    taus = [
        exp_decay_tau(DecayHypothesis(c1, 1.0, 1.0, 1.0, 2.0, 0.0)).tau
        for c1 in (0.5, 1.0, 2.0, 8.0, 64.0)
    ]
    assert all(t2 >= t1 for t1, t2 in zip(taus, taus[1:]))


def test_exp_decay_tau_wrong_case():
    with pytest.raises(WrongCaseError):
        exp_decay_tau(DecayHypothesis(1.0, 2.0, 0.75, 0.5, 4.0, 0.0))


# ---------------------------------------------------------------- case iii constants
def test_vanishing_level_frozen():
    # [DERIVED]: terms {1, 0, (2^3)^1 = 8, (2^{3+4+2})^{1/2} = 2^{9/2}} -> 2^{9/2}.
    env = vanishing_level(DecayHypothesis(1.0, A=1.0, B=3.0, C=2.0, D=2.0, k0=0.0), psi_at_k0=0.0)
    assert env.case.tag is CaseTag.VANISHING
    assert env.L == pytest.approx(2.0**4.5, abs=1e-12)


def test_vanishing_level_2k0_branch():
    env = vanishing_level(DecayHypothesis(1.0, A=1.0, B=3.0, C=2.0, D=2.0, k0=20.0), psi_at_k0=0.0)
    assert env.L == pytest.approx(40.0, abs=1e-12)


def test_vanishing_level_swap_normalization():
    # Internally B := max, C := min, so swapping the fields gives the same L.
    a = vanishing_level(DecayHypothesis(1.0, 1.0, 3.0, 2.0, 2.0, 0.0), 0.7)
    b = vanishing_level(DecayHypothesis(1.0, 1.0, 2.0, 3.0, 2.0, 0.0), 0.7)
    assert a.L == pytest.approx(b.L, rel=1e-14)


def test_vanishing_level_monotone_in_c1_and_psi():
    hyps = [DecayHypothesis(c1, 1.0, 3.0, 2.0, 2.0, 0.0) for c1 in (0.5, 1.0, 4.0, 32.0)]
    ls = [vanishing_level(h, 1.0).L for h in hyps]
    assert all(l2 >= l1 for l1, l2 in zip(ls, ls[1:]))
    ls_psi = [vanishing_level(hyps[1], v).L for v in (0.0, 0.5, 1.0, 10.0)]
    assert all(l2 >= l1 for l1, l2 in zip(ls_psi, ls_psi[1:]))


def test_vanishing_level_wrong_case():
    with pytest.raises(WrongCaseError):
        vanishing_level(DecayHypothesis(1.0, 1.0, 1.0, 1.0, 2.0, 0.0), 1.0)


# ---------------------------------------------------------------- envelope
def test_envelope_power_decay_values():
    hyp = DecayHypothesis(1.0, A=2.0, B=0.75, C=0.5, D=4.0, k0=0.0)
    # [DERIVED]: c_bar = 2^52, lambda = 8, k = 2^7 -> 2^{52-56} = 1/16.
    assert envelope(hyp, 1.0, 2.0**7) == pytest.approx(2.0**-4, rel=1e-12)
    assert envelope(hyp, 1.0, 0.0) == math.inf


def test_envelope_exponential_at_k0():
    hyp = DecayHypothesis(1.0, A=1.0, B=1.0, C=1.0, D=2.0, k0=0.0)
    psi0 = 0.37
    assert envelope(hyp, psi0, 0.0) == psi0 * math.e


def test_envelope_vanishing_step():
    # the step must sit at 2L computed with the same psi_at_k0 the
    # envelope is evaluated with (L grows with psi_at_k0)
    hyp = DecayHypothesis(1.0, A=1.0, B=3.0, C=2.0, D=2.0, k0=0.0)
    big_l = vanishing_level(hyp, 0.25).L
    assert envelope(hyp, 0.25, 2 * big_l) == 0.0
    assert envelope(hyp, 0.25, 2 * big_l * (1 - 1e-12)) == 0.25
    assert envelope(hyp, 0.25, 0.5) == 0.25


def test_envelope_nonincreasing_all_cases():
    cases = [
        DecayHypothesis(1.0, 2.0, 0.75, 0.5, 4.0, 0.0),
        DecayHypothesis(1.0, 1.0, 1.0, 1.0, 2.0, 0.0),
        DecayHypothesis(1.0, 1.0, 3.0, 2.0, 2.0, 0.0),
    ]
    for hyp in cases:
        ks = [0.001 + 0.5 * i for i in range(200)]
        vals = [envelope(hyp, 1.0, k) for k in ks]
        assert all(v2 <= v1 for v1, v2 in zip(vals, vals[1:]))


def test_envelope_below_k0_rejected():
    hyp = DecayHypothesis(1.0, 1.0, 1.0, 1.0, 2.0, k0=5.0)
    with pytest.raises(ValueError):
        envelope(hyp, 1.0, 4.0)


# ---------------------------------------------------------------- psi tables
def test_psi_table_validation():
    PsiTable(knots=[1.0, 2.0, 4.0], values=[1.0, 0.5, 0.25], k0=1.0)
    with pytest.raises(ValueError):
        PsiTable(knots=[1.0, 1.0, 4.0], values=[1.0, 0.5, 0.25], k0=1.0)
    with pytest.raises(ValueError):
        PsiTable(knots=[2.0, 1.0], values=[1.0, 0.5], k0=1.0)
    with pytest.raises(ValueError):
        PsiTable(knots=[1.0, 2.0], values=[0.5, 1.0], k0=1.0)  # increasing values
    with pytest.raises(ValueError):
        PsiTable(knots=[1.0, 2.0], values=[0.5, -0.1], k0=1.0)  # negative
    with pytest.raises(ValueError):
        PsiTable(knots=[0.5, 2.0], values=[1.0, 0.5], k0=1.0)  # knot below k0
    with pytest.raises(ValueError):
        PsiTable(knots=[], values=[], k0=0.0)


def test_psi_table_rounding_slack():
    # nonincreasing up to 1e-12 relative slack is accepted
    v = 0.5
    PsiTable(knots=[1.0, 2.0], values=[v, v * (1 + 1e-13)], k0=1.0)
    with pytest.raises(ValueError):
        PsiTable(knots=[1.0, 2.0], values=[v, v * (1 + 1e-9)], k0=1.0)


def test_psi_table_step_evaluation():
    t = PsiTable(knots=[1.0, 2.0, 4.0], values=[1.0, 0.5, 0.25], k0=1.0)
    assert t.evaluate(1.0) == 1.0
    assert t.evaluate(1.999) == 1.0
    assert t.evaluate(2.0) == 0.5
    assert t.evaluate(3.0) == 0.5
    assert t.evaluate(4.0) == 0.25
    assert t.evaluate(100.0) == 0.25
    with pytest.raises(ValueError):
        t.evaluate(0.5)


# ---------------------------------------------------------------- hypothesis checks
def _power_table(k0=1.0, per_octave=2, octaves=10, V=1.0, K=1.0, lam=3.0):
    knots = [k0 * 2 ** (j / per_octave) for j in range(per_octave * octaves + 1)]
    values = [min(V, K * k**-lam) for k in knots]
    return PsiTable(knots=knots, values=values, k0=k0)


def _brute_force_c1(table, hyp_exponents):
    """Smallest c1 making every knot pair satisfy the inequality (independent oracle)."""
    A, B, C, D = hyp_exponents
    c1 = 0.0
    knots, values = list(table.knots), list(table.values)
    for i in range(len(knots)):
        for j in range(i + 1, len(knots)):
            k, h = knots[i], knots[j]
            lhs = values[j]
            structure = (h**A * values[i] ** B + values[i] ** C) / (h - k) ** D
            if structure > 0:
                c1 = max(c1, lhs / structure)
    return c1


def test_check_hypothesis_constant_table_passes_with_big_c1():
    t = PsiTable(knots=[0.0, 2.0, 5.0, 10.0], values=[3.0, 3.0, 3.0, 3.0], k0=0.0)
    hyp = DecayHypothesis(1e9, A=1.0, B=1.0, C=1.0, D=2.0, k0=0.0)
    rep = check_hypothesis(t, hyp, AllKnotPairs())
    assert rep.max_ratio <= 1.0
    assert rep.passed


def test_check_hypothesis_constant_table_violates_at_distant_pairs():
    knots = [0.0] + [float(10**j) for j in range(7)]
    t = PsiTable(knots=knots, values=[1.0] * len(knots), k0=0.0)
    hyp = DecayHypothesis(1.0, A=0.5, B=1.0, C=1.0, D=2.0, k0=0.0)
    rep = check_hypothesis(t, hyp, AllKnotPairs())
    assert rep.max_ratio > 1.0
    assert not rep.passed
    h_worst, k_worst = rep.worst_pair
    assert h_worst > k_worst


def test_check_hypothesis_empty_pairs_error():
    t = PsiTable(knots=[1.0], values=[1.0], k0=1.0)
    with pytest.raises(ValueError):
        check_hypothesis(t, DecayHypothesis(1.0, 1.0, 1.0, 1.0, 2.0, 0.0), AllKnotPairs())


def test_check_hypothesis_random_pairs_deterministic():
    t = _power_table()
    hyp = DecayHypothesis(10.0, A=1.0, B=0.5, C=0.625, D=3.0, k0=1.0)
    r1 = check_hypothesis(t, hyp, RandomPairs(count=50, seed=7))
    r2 = check_hypothesis(t, hyp, RandomPairs(count=50, seed=7))
    assert r1.max_ratio == r2.max_ratio
    assert r1.worst_pair == r2.worst_pair
    assert r1.pair_count == 50


def test_all_pairs_implies_doubling_on_dyadic_grids():
    # Remark direction (16) => (29): fit c1 on all knot pairs, then the
    # doubling check with c2 = c1 must pass. On dyadic-closed grids the
    # doubling pairs are a subset of the knot pairs, so this is exact.
    rng = random.Random(123)
    for _ in range(10):
        per_octave = rng.choice([1, 2, 4])
        octaves = rng.randint(4, 8)
        k0 = rng.uniform(0.5, 2.0)
        knots = [k0 * 2 ** (j / per_octave) for j in range(per_octave * octaves + 1)]
        values = []
        v = rng.uniform(0.5, 4.0)
        for _ in knots:
            values.append(v)
            v *= rng.uniform(0.3, 1.0)
        table = PsiTable(knots=knots, values=values, k0=k0)
        A, B, C, D = 1.0, 0.5, 0.75, 2.0
        c1 = _brute_force_c1(table, (A, B, C, D)) * (1 + 1e-12)
        hyp = DecayHypothesis(c1, A, B, C, D, k0)
        full = check_hypothesis(table, hyp, AllKnotPairs())
        assert full.max_ratio <= 1.0 + 1e-12
        dbl = check_hypothesis(table, hyp, Doubling())
        assert dbl.max_ratio <= 1.0 + 1e-12


def test_scale_covariance_exponential_case():
    # With B = C = 1 both sides scale linearly in psi, so ratios are invariant.
    t = _power_table(per_octave=1, octaves=8, lam=2.0)
    scaled = PsiTable(
        knots=list(t.knots), values=[97.0 * v for v in t.values], k0=t.k0
    )
    hyp = DecayHypothesis(2.0, A=1.0, B=1.0, C=1.0, D=2.0, k0=1.0)
    r1 = check_hypothesis(t, hyp, AllKnotPairs())
    r2 = check_hypothesis(scaled, hyp, AllKnotPairs())
    assert r2.max_ratio == pytest.approx(r1.max_ratio, rel=1e-12)


# ---------------------------------------------------------------- envelope checks
def test_check_envelope_power_min_table():
    # psi(k) = min(1, k^-8) is dominated by any power envelope with
    # c_bar >= 1 and lambda = 8.
    knots = [2 ** (j / 2) for j in range(0, 21)]
    values = [min(1.0, k**-8.0) for k in knots]
    t = PsiTable(knots=knots, values=values, k0=1.0)
    hyp = DecayHypothesis(1.0, A=2.0, B=0.75, C=0.5, D=4.0, k0=1.0)
    rep = check_envelope(t, hyp, psi_at_k0=1.0)
    assert rep.passed
    assert rep.max_ratio <= 1.0 + 1e-12


def test_check_envelope_zero_table_passes_every_case():
    for hyp in (
        DecayHypothesis(1.0, 2.0, 0.75, 0.5, 4.0, 1.0),
        DecayHypothesis(1.0, 1.0, 1.0, 1.0, 2.0, 1.0),
        DecayHypothesis(1.0, 1.0, 3.0, 2.0, 2.0, 1.0),
    ):
        t = PsiTable(knots=[1.0, 2.0, 4.0], values=[0.0, 0.0, 0.0], k0=1.0)
        rep = check_envelope(t, hyp, psi_at_k0=0.0)
        assert rep.passed


def test_check_envelope_reports_first_violation():
    # A table equal to the envelope except bumped above it at one knot.
    hyp = DecayHypothesis(1.0, A=2.0, B=0.75, C=0.5, D=4.0, k0=1.0)
    knots = [float(2**j) for j in range(8)]
    values = [envelope(hyp, 1.0, k) * 0.5 for k in knots]
    # envelope drops by 2^8 per octave, so a 1.5x bump keeps the table nonincreasing
    values[3] = envelope(hyp, 1.0, knots[3]) * 1.5
    t = PsiTable(knots=knots, values=values, k0=1.0)
    rep = check_envelope(t, hyp, psi_at_k0=1.0)
    assert not rep.passed
    assert rep.first_violation == knots[3]
    assert rep.max_ratio >= 1.5 - 1e-9


# ---------------------------------------------------------------- giusti recursion
def test_giusti_exact_dyadic_example():
    # [DERIVED]: x0 = 1/2 is exactly the premise boundary for (1, 2, 2);
    # iterates 1/2, 1/4, 1/8, 1/16 meet the bound with equality.
    res = giusti_recursion(c_bar=1.0, m=2.0, beta=2.0, x0=0.5, steps=3)
    assert res.xs == [0.5, 0.25, 0.125, 0.0625]
    assert res.premise_holds
    assert res.bound_holds
    assert res.first_violation is None


def test_giusti_zero_start():
    res = giusti_recursion(1.0, 2.0, 2.0, 0.0, 5)
    assert res.xs == [0.0] * 6
    assert res.premise_holds
    assert res.bound_holds


def test_giusti_premise_violated():
    res = giusti_recursion(1.0, 2.0, 2.0, 1.0, 3)
    assert not res.premise_holds
    assert not res.bound_holds
    assert res.first_violation == 1  # x1 = 1 > 2^{-1} * 1


def test_giusti_domain_errors():
    with pytest.raises(ValueError):
        giusti_recursion(1.0, 2.0, 1.0, 0.5, 3)  # beta must exceed 1
    with pytest.raises(ValueError):
        giusti_recursion(1.0, 0.5, 2.0, 0.5, 3)  # m must exceed 1
    with pytest.raises(ValueError):
        giusti_recursion(0.0, 2.0, 2.0, 0.5, 3)
    with pytest.raises(ValueError):
        giusti_recursion(1.0, 2.0, 2.0, -0.5, 3)


# ---------------------------------------------------------------- level sequences
def test_level_sequence_vanishing():
    hyp = DecayHypothesis(1.0, 1.0, 3.0, 2.0, 2.0, 0.0)
    env = vanishing_level(hyp, 0.0)
    # 2L(1 - 2^{-i-1}) with L scaled to 1 for the oracle
    seq = level_sequence(hyp, env, 3)
    L = env.L
    assert seq == pytest.approx([L, 1.5 * L, 1.75 * L], rel=1e-14)


def test_level_sequence_exponential():
    hyp = DecayHypothesis(1.0, 1.0, 1.0, 1.0, 2.0, k0=0.0)
    env = exp_decay_tau(hyp)
    tau = env.tau
    seq = level_sequence(hyp, env, 3)
    # k_s = k0 + tau * s^{D/(D-A)} = tau * s^2
    assert seq == pytest.approx([0.0, tau, 4.0 * tau], rel=1e-14)


def test_level_sequence_empty_and_wrong_case():
    hyp = DecayHypothesis(1.0, 1.0, 1.0, 1.0, 2.0, k0=0.0)
    env = exp_decay_tau(hyp)
    assert level_sequence(hyp, env, 0) == []
    power_hyp = DecayHypothesis(1.0, 2.0, 0.75, 0.5, 4.0, 0.0)
    env_p = power_decay_constants(power_hyp, 1.0)
    with pytest.raises(WrongCaseError):
        level_sequence(power_hyp, env_p, 3)


# ---------------------------------------------------------------- acceptance-3 style
def test_envelope_dominance_synthetic_instances():
    # For truncated-power tables with a brute-force-fitted c1 the explicit
    # envelope dominates the table at every knot (the lemma, executably).
    rng = random.Random(2024)
    for trial in range(10):
        lam = rng.uniform(0.8, 5.0)
        V = 10 ** rng.uniform(-1, 2)
        K = 10 ** rng.uniform(-1, 2)
        u = rng.uniform(0.35, 0.85)
        D = lam * u
        C = 1.0 - u
        B = rng.uniform(1.0 - u + 0.05, 0.95)
        A = D - lam * (1.0 - B)
        assert 0 < A < D
        per_octave = rng.choice([2, 3])
        octaves = 9
        k0 = 1.0
        knots = [k0 * 2 ** (j / per_octave) for j in range(per_octave * octaves + 1)]
        values = [min(V, K * k**-lam) for k in knots]
        table = PsiTable(knots=knots, values=values, k0=k0)
        c1 = _brute_force_c1(table, (A, B, C, D)) * (1 + 1e-12)
        hyp = DecayHypothesis(c1, A, B, C, D, k0)
        assert classify(hyp, 1e-9).tag is CaseTag.POWER_DECAY
        hrep = check_hypothesis(table, hyp, AllKnotPairs())
        assert hrep.max_ratio <= 1.0 + 1e-12, f"trial {trial}"
        erep = check_envelope(table, hyp, psi_at_k0=values[0])
        assert erep.passed, f"trial {trial}: ratio {erep.max_ratio}"
