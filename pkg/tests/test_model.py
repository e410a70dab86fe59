import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thurston.model import (ORIGINS, ImproperPointError, ProjMap, SpaceId, affine, check_proper, hpoint,
                            incidence, nil_from_linear, nil_inverse, nil_mul, nil_rotation, nil_to_linear,
                            nil_translation, signature, sl2r_fibre_translation, sl2r_foot_point,
                            sl2r_quadratic_form, sl2r_translation, sol_inverse, sol_mul,
                            sol_stabilizer_generators, sol_translation, translate_to_origin,
                            translate_from_origin)

from conftest import SPACES, random_point

reals = st.floats(-3, 3, allow_nan=False)
triples = st.tuples(reals, reals, reals)


def test_space_parse_aliases():
    assert SpaceId.parse("s2xr") is SpaceId.S2xR
    assert SpaceId.parse("SL2R") is SpaceId.SL2R
    with pytest.raises(ValueError):
        SpaceId.parse("e3")


def test_hpoint_rejects_zero():
    with pytest.raises(ValueError):
        hpoint(np.zeros(4))


def test_incidence_examples():
    assert incidence([1, 0, 0, 0], [0, 1, 0, 0]) == 0
    assert incidence([1, 1, 0, 0], [1, 0, 0, 0]) == 1


def test_incidence_preserved_by_projmap(rng):
    for _ in range(50):
        M = rng.normal(size=(4, 4)) + 3 * np.eye(4)
        T = ProjMap(M)
        p, u = rng.normal(size=4), rng.normal(size=4)
        assert np.isclose(incidence(T.apply(p), T.apply_plane(u)), incidence(p, u), rtol=1e-12, atol=1e-12)


def test_projmap_rejects_singular():
    with pytest.raises(ValueError):
        ProjMap(np.zeros((4, 4)))


def test_signatures():
    assert signature("sl2r").diag == (-1, -1, 1, 1)
    assert signature("s2xr").diag == (0, 1, 1, 1)


def test_nil_mul_examples():
    assert np.allclose(nil_mul((0, 0, 0), (1, 2, 3)), (1, 2, 3))
    assert np.allclose(nil_mul((1, 0, 0), (0, 1, 0)), (1, 1, 1))
    assert np.allclose(nil_mul((0, 1, 0), (1, 0, 0)), (1, 1, 0))


@given(triples, st.floats(-3, 3))
def test_nil_centre_commutes(g, c):
    assert np.allclose(nil_mul(g, (0, 0, c)), nil_mul((0, 0, c), g), atol=1e-12)


def test_nil_translation_examples():
    assert np.allclose(nil_translation((0, 0, 0)).matrix, np.eye(4))
    assert np.allclose(nil_translation((1, 2, 3)).apply([1, 0, 0, 0]), [1, 1, 2, 3])
    x, y, z, a, b, c = 0.3, -0.7, 1.1, 0.5, 0.9, -0.2
    assert np.allclose(nil_translation((x, y, z)).apply([1, a, b, c]), [1, x + a, y + b, z + b * x + c])


def test_nil_translation_homomorphism(rng):
    for _ in range(1000):
        g, h = rng.uniform(-2, 2, 3), rng.uniform(-2, 2, 3)
        # Right action: applying T_h then T_g acts as the product g h.
        lhs = (nil_translation(h) @ nil_translation(g)).matrix
        assert np.allclose(lhs, nil_translation(nil_mul(g, h)).matrix, atol=1e-12)


def test_nil_rotation_examples():
    p = np.array([0.4, -0.3, 0.8])
    assert np.allclose(nil_rotation(0.0)(p), p)
    # Direct substitution for (1, 0, 0) and a quarter turn.
    assert np.allclose(nil_rotation(np.pi / 2)(np.array([1.0, 0, 0])), [0.0, 1.0, 0.0], atol=1e-15)


def test_nil_rotation_linearized(rng):
    for _ in range(100):
        w = rng.uniform(-np.pi, np.pi)
        p = rng.uniform(-2, 2, 3)
        q = nil_to_linear(nil_rotation(w)(p))
        lin = nil_to_linear(p)
        c, s = np.cos(w), np.sin(w)
        want = np.array([c * lin[0] - s * lin[1], s * lin[0] + c * lin[1], lin[2]])
        assert np.allclose(q, want, atol=1e-12)
        assert np.allclose(nil_from_linear(nil_to_linear(p)), p)


def _nil_length(curve):
    from thurston.geodesics import cartesian_metric

    mids = 0.5 * (curve[1:] + curve[:-1])
    d = np.diff(curve, axis=0)
    return sum(np.sqrt(di @ cartesian_metric("nil", hpoint(*m)).g @ di) for m, di in zip(mids, d))


def test_nil_rotation_preserves_length(rng):
    t = np.linspace(0, 1, 2001)[:, None]
    for _ in range(5):
        a, b, c = rng.uniform(-1, 1, (3, 3))
        curve = a + b * t + c * t * t
        w = rng.uniform(-np.pi, np.pi)
        L0 = _nil_length(curve)
        L1 = _nil_length(nil_rotation(w)(curve))
        assert abs(L0 - L1) < 1e-8 * max(1.0, L0)


def test_sol_mul_examples():
    assert np.allclose(sol_mul((0, 0, 0), (1, 2, 3)), (1, 2, 3))
    a, b, z = 0.7, -1.2, 0.4
    assert np.allclose(sol_mul((a, b, 0), (0, 0, z)), (a * np.exp(-z), b * np.exp(z), z))
    g = np.array([0.3, -0.5, 0.9])
    assert np.allclose(sol_inverse(g), [-0.3 * np.exp(0.9), 0.5 * np.exp(-0.9), -0.9])
    assert np.allclose(sol_mul(sol_inverse(g), g), 0, atol=1e-15)
    assert np.allclose(sol_mul(g, sol_inverse(g)), 0, atol=1e-15)


def test_sol_translation_examples(rng):
    assert np.allclose(sol_translation((0, 0, 0)).matrix, np.eye(4))
    assert np.allclose(sol_translation((1, 2, 3)).apply([1, 0, 0, 0]), [1, 1, 2, 3])
    for _ in range(1000):
        g, h = rng.uniform(-2, 2, 3), rng.uniform(-2, 2, 3)
        # (1, h) maps to the product h g under T_g.
        img = sol_translation(g).apply(np.concatenate([[1], h]))
        assert np.allclose(affine(img), sol_mul(h, g), atol=1e-12)
        comp = (sol_translation(g) @ sol_translation(h)).matrix
        assert np.allclose(comp, sol_translation(sol_mul(g, h)).matrix, atol=1e-12)


def test_sol_stabilizer():
    gens = sol_stabilizer_generators()
    g1, g2 = gens[0], gens[1]
    assert np.allclose(g1.matrix @ g1.matrix, np.eye(4))
    assert np.allclose(g2.apply([1, 0.2, 0.5, 0.7]), [1, 0.5, 0.2, -0.7])
    closure = {tuple(np.eye(4).ravel())}
    frontier = [np.eye(4)]
    while frontier:
        m = frontier.pop()
        for g in (g1, g2):
            n = m @ g.matrix
            k = tuple(np.round(n, 12).ravel())
            if k not in closure:
                closure.add(k)
                frontier.append(n)
    assert len(closure) == 8


def test_sol_stabilizer_preserves_metric(rng):
    from thurston.geodesics import cartesian_metric

    g0 = cartesian_metric("sol", [1, 0, 0, 0]).g
    for T in sol_stabilizer_generators():
        J = T.matrix[1:, 1:]
        for _ in range(20):
            v = rng.normal(size=3)
            assert np.isclose((v @ J) @ g0 @ (v @ J), v @ g0 @ v, rtol=1e-12)


def test_sl2r_fibre_translation():
    assert np.allclose(sl2r_fibre_translation(0).matrix, np.eye(4))
    S = sl2r_fibre_translation
    assert np.allclose((S(0.3) @ S(0.9)).matrix, S(1.2).matrix, atol=1e-12)
    assert np.allclose(S(np.pi / 2).apply([1, 0, 0, 0]), [0, 1, 0, 0], atol=1e-15)


def test_sl2r_fibre_translation_preserves_form(rng):
    for _ in range(50):
        p = rng.normal(size=4)
        phi = rng.uniform(-5, 5)
        assert np.isclose(sl2r_quadratic_form(sl2r_fibre_translation(phi).apply(p)), sl2r_quadratic_form(p),
                          rtol=1e-12, atol=1e-12)


def test_sl2r_foot_point():
    p = np.array([1.0, 0, 0.3, -0.2])
    f = sl2r_foot_point(p)
    assert np.allclose(f / f[0], p)
    assert np.allclose(sl2r_foot_point([1, 0, 0, 0]), [1, 0, 0, 0])
    assert np.allclose(sl2r_foot_point([1, 1, 0, 0]), [2, 0, 0, 0])
    with pytest.raises(ImproperPointError):
        sl2r_foot_point([1, 0, 2, 0])


def test_sl2r_vertex_translation():
    y2, z3 = 0.4, 0.3
    T = sl2r_translation([1, 0, y2, 0]).inv()
    img = T.apply([1, 0, 0, z3])
    want = np.array([1, y2 * z3, -y2, z3])
    assert np.allclose(img / img[0], want)


@pytest.mark.parametrize("space", SPACES)
def test_translate_to_origin(space, rng):
    O = ORIGINS[space]
    T = translate_to_origin(space, O)
    assert np.allclose(T.matrix / T.matrix[0, 0], np.eye(4), atol=1e-12)
    for _ in range(20):
        A = random_point(space, rng)
        img = translate_to_origin(space, A).apply(A)
        assert np.allclose(img / img[0], O / O[0], atol=1e-10)
        back = translate_from_origin(space, A).apply(O)
        assert np.allclose(back / back[0], A / A[0], atol=1e-10)


def test_translate_to_origin_nil_is_group_inverse():
    A = hpoint(0.3, -0.4, 0.9)
    T = translate_to_origin("nil", A)
    assert np.allclose(T.matrix, nil_translation(nil_inverse([0.3, -0.4, 0.9])).matrix)


@pytest.mark.parametrize("space,p", [("s2xr", [1, 0, 0, 0]), ("h2xr", [1, 0, 1, 0]), ("h2xr", [1, -1, 0, 0]),
                                     ("sl2r", [1, 0, 2, 0]), ("nil", [0, 1, 0, 0])])
def test_improper_points_rejected(space, p):
    with pytest.raises(ImproperPointError):
        check_proper(space, p)
