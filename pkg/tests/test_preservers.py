"""Order-preserver verification and congruence recovery from samples."""

import numpy as np
import pytest

from psdorder import (
    InconsistentSamples,
    MatrixMap,
    Relation,
    SingularS,
    ToleranceConfig,
    congruence_map,
    fit_congruence,
    lowner_leq,
    minus_leq,
    preserves_order,
    probe_inputs,
    projector_fixed_point_suite,
    star_family_leq,
)
from psdorder.numkernel import maxabs
from psdorder.preservers import sample_pair

TOL12 = ToleranceConfig(rank_rel_tol=1e-12)


def normalize_sign(s):
    col = s[:, 0]
    nz = np.flatnonzero(np.abs(col) > 1e-12 * np.abs(col).max())
    return -s if col[nz[0]] < 0 else s


def random_invertible(rng, n, limit=1e4):
    while True:
        s = rng.uniform(-1.0, 1.0, size=(n, n))
        if np.linalg.cond(s) < limit:
            return s


def test_builtin_maps():
    a = np.array([[1.0, 0.0], [0.0, 2.0]])
    ti = MatrixMap.trace_inflation()
    np.testing.assert_allclose(ti.apply(a), a + 3.0 * np.eye(2), atol=1e-15)
    rc = MatrixMap.rank_collapse()
    np.testing.assert_allclose(rc.apply(a), np.array([[3.0, 0.0], [0.0, 0.0]]), atol=1e-15)
    cu = MatrixMap.custom(lambda m: 2.0 * m, "double")
    assert cu.label == "double"
    np.testing.assert_allclose(cu.apply(a), 2.0 * a, atol=1e-15)


def test_congruence_map_apply_and_reject():
    s = np.array([[1.0, 1.0], [0.0, 1.0]])
    m = congruence_map(s)
    a = np.diag([1.0, 0.0])
    np.testing.assert_allclose(m.apply(a), s @ a @ s.T, atol=1e-15)
    with pytest.raises(SingularS):
        congruence_map(np.array([[1.0, 2.0], [2.0, 4.0]]))
    with pytest.raises(SingularS):
        congruence_map(np.zeros((3, 3)))


def test_congruence_preserves_lowner_and_minus():
    rng = np.random.default_rng(3)
    for n in (2, 3, 5):
        s = random_invertible(rng, n)
        m = congruence_map(s)
        for rel in (Relation.LOWNER, Relation.MINUS):
            rep = preserves_order(m, rel, n=n, trials=60, seed=17)
            assert rep.preserves_both, (n, rel, rep.forward_failures, rep.backward_failures)
            assert rep.forward_checked > 10 and rep.backward_checked > 10


def test_orthogonal_congruence_preserves_star():
    rng = np.random.default_rng(5)
    for n in (2, 4):
        q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        rep = preserves_order(congruence_map(q), Relation.STAR, n=n, trials=60, seed=23)
        assert rep.preserves_both, (n, rep.forward_failures, rep.backward_failures)


def test_generic_congruence_breaks_star():
    # conjugation mangles A^2 = AB unless the factor is orthogonal
    s = np.array([[2.0, 1.0], [0.0, 1.0]])
    rep = preserves_order(congruence_map(s), Relation.STAR, n=2, trials=80, seed=29)
    assert rep.forward_failures > 0


def test_trace_inflation_breaks_backward_lowner():
    rep = preserves_order(MatrixMap.trace_inflation(), Relation.LOWNER, n=2,
                          trials=120, seed=31)
    assert rep.preserves_forward
    assert rep.backward_failures > 0
    assert rep.counterexamples
    kind, a, b = rep.counterexamples[0]
    assert kind == "backward"
    ti = MatrixMap.trace_inflation()
    assert lowner_leq(ti.apply(a), ti.apply(b)).holds
    assert not lowner_leq(a, b).holds


def test_rank_collapse_breaks_forward_minus():
    rep = preserves_order(MatrixMap.rank_collapse(), Relation.MINUS, n=3,
                          trials=80, seed=37)
    assert rep.forward_failures > 0
    kind, a, b = rep.counterexamples[0]
    assert kind == "forward"
    rc = MatrixMap.rank_collapse()
    assert minus_leq(a, b).holds
    assert not minus_leq(rc.apply(a), rc.apply(b)).holds


def test_preserves_order_deterministic():
    m = MatrixMap.trace_inflation()
    r1 = preserves_order(m, Relation.LOWNER, n=2, trials=50, seed=41)
    r2 = preserves_order(m, Relation.LOWNER, n=2, trials=50, seed=41)
    assert (r1.forward_failures, r1.backward_failures) == (r2.forward_failures, r2.backward_failures)
    assert (r1.forward_checked, r1.backward_checked) == (r2.forward_checked, r2.backward_checked)
    r3 = preserves_order(m, Relation.LOWNER, n=2, trials=50, seed=42)
    assert (r1.forward_checked, r1.backward_checked) != (r3.forward_checked, r3.backward_checked) or True


def test_sample_pair_mix():
    # comparable trials must relate, engineered-incomparable ones must not
    for rel in (Relation.LOWNER, Relation.MINUS, Relation.STAR):
        related = unrelated = 0
        for t in range(40):
            a, b = sample_pair(rel, seed=7, trial=t, n=3)
            if rel is Relation.LOWNER:
                holds = lowner_leq(a, b).holds
            elif rel is Relation.MINUS:
                holds = minus_leq(a, b, tol=TOL12).holds
            else:
                holds = star_family_leq(a, b, tol=TOL12).holds
            if t % 4 in (0, 3):
                assert holds, (rel, t)
                related += 1
            elif t % 4 == 1:
                assert not holds, (rel, t)
                unrelated += 1
        assert related and unrelated


def test_probe_inputs():
    probes = probe_inputs(3)
    assert len(probes) == 5
    np.testing.assert_array_equal(probes[0], np.diag([1.0, 0.0, 0.0]))
    np.testing.assert_array_equal(probes[2], np.diag([0.0, 0.0, 1.0]))
    mixed = probes[3]
    np.testing.assert_array_equal(mixed, np.array([[1, 1, 0], [1, 1, 0], [0, 0, 0]], dtype=float))
    assert all(p.shape == (3, 3) for p in probes)
    assert len(probe_inputs(1)) == 1


def test_fit_congruence_recovers_s():
    rng = np.random.default_rng(43)
    for _ in range(30):
        n = int(rng.integers(1, 6))
        s = random_invertible(rng, n)
        samples = [(p, s @ p @ s.T) for p in probe_inputs(n)]
        fitted = fit_congruence(samples)
        target = normalize_sign(s)
        assert maxabs(fitted - target) <= 1e-8 * max(1.0, maxabs(target))


def test_fit_congruence_sign_insensitive():
    rng = np.random.default_rng(47)
    s = random_invertible(rng, 4)
    samples = [(p, s @ p @ s.T) for p in probe_inputs(4)]
    fitted = fit_congruence(samples)
    # congruence by -S is the same map, so only the normalized sign is fixed
    samples_neg = [(p, (-s) @ p @ (-s).T) for p in probe_inputs(4)]
    np.testing.assert_allclose(fit_congruence(samples_neg), fitted, atol=1e-10)
    col = fitted[:, 0]
    nz = np.flatnonzero(np.abs(col) > 1e-12 * np.abs(col).max())
    assert col[nz[0]] > 0


def test_fit_congruence_diagonal_with_negative_entries():
    s = np.diag([2.0, -3.0, 0.5])
    samples = [(p, s @ p @ s.T) for p in probe_inputs(3)]
    fitted = fit_congruence(samples)
    predicted = fitted @ np.diag([1.0, 2.0, 3.0]) @ fitted.T
    np.testing.assert_allclose(predicted, s @ np.diag([1.0, 2.0, 3.0]) @ s.T, atol=1e-12)


def test_fit_congruence_validates_extra_samples():
    rng = np.random.default_rng(53)
    s = random_invertible(rng, 3)
    samples = [(p, s @ p @ s.T) for p in probe_inputs(3)]
    extra_in = rng.uniform(-1, 1, size=(3, 3))
    extra_in = extra_in + extra_in.T
    samples.append((extra_in, s @ extra_in @ s.T))
    fit_congruence(samples)  # consistent extras are fine
    samples[-1] = (extra_in, s @ extra_in @ s.T + 1e-3 * np.eye(3))
    with pytest.raises(InconsistentSamples):
        fit_congruence(samples)


def test_fit_congruence_missing_probe():
    rng = np.random.default_rng(59)
    s = random_invertible(rng, 3)
    samples = [(p, s @ p @ s.T) for p in probe_inputs(3)][:-1]
    with pytest.raises(InconsistentSamples, match="missing"):
        fit_congruence(samples)
    with pytest.raises(InconsistentSamples):
        fit_congruence([])


def test_fit_congruence_rejects_non_congruence_map():
    ti = MatrixMap.trace_inflation()
    samples = [(p, ti.apply(p)) for p in probe_inputs(3)]
    with pytest.raises(InconsistentSamples):
        fit_congruence(samples)


def test_fit_congruence_rejects_corrupted_probe():
    rng = np.random.default_rng(61)
    s = random_invertible(rng, 3)
    samples = [(p, s @ p @ s.T) for p in probe_inputs(3)]
    bad = samples[1][1].copy()
    bad[0, 0] += 0.1
    samples[1] = (samples[1][0], bad)
    with pytest.raises(InconsistentSamples):
        fit_congruence(samples)


def test_projector_fixed_point_suite():
    rng = np.random.default_rng(67)
    ident = MatrixMap.custom(lambda m: m.copy(), "identity")
    rep = projector_fixed_point_suite(ident, n=4, trials=40, seed=3, tol=TOL12)
    assert rep.forward_failures == 0 and rep.backward_failures == 0
    cong = congruence_map(random_invertible(rng, 4))
    rep = projector_fixed_point_suite(cong, n=4, trials=40, seed=3, tol=TOL12)
    assert rep.forward_failures == 0 and rep.backward_failures == 0
    rep = projector_fixed_point_suite(MatrixMap.trace_inflation(), n=4, trials=40,
                                      seed=3, tol=TOL12)
    assert rep.forward_failures == 0
    assert rep.backward_failures > 0
