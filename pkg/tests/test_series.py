import cmath
import math

import numpy as np
import pytest

from weilgap.characters import quadratic_char
from weilgap.matrices import T, FrickeMat
from weilgap.multiplier import char_multiplier, trivial_multiplier
from weilgap.presentation import build_presentation
from weilgap.series import (
    CoeffSeries,
    coeffs_via_fourier_extraction,
    delta_coeffs,
    delta_delta_p,
    eisenstein_multiplier_coeffs,
    eisenstein_tail_bound,
    lift_bottom_row,
    multiply,
    one_series,
    series_evaluator,
    slash_evaluator,
    twisted_kloosterman,
)


@pytest.fixture(scope="module")
def tau200():
    return delta_coeffs(200)


def naive_delta_prefix(M):
    """Oracle: expand q * prod_{n <= M} (1 - q^n)^24 by repeated naive
    polynomial multiplication."""
    poly = [1] + [0] * M
    for n in range(1, M + 1):
        for _ in range(24):
            new = list(poly)
            for i in range(M + 1 - n):
                if poly[i]:
                    new[i + n] -= poly[i]
            poly = new
    return poly[:M]  # tau(m) = coefficient of q^{m-1}


def test_tau_normalization(tau200):
    assert tau200.exact[0] == 1


def test_tau_against_naive_oracle(tau200):
    oracle = naive_delta_prefix(10)
    assert tau200.exact[:10] == oracle
    assert oracle[1] == -24 and oracle[2] == 252


def test_tau_multiplicativity(tau200):
    tau = tau200.exact
    assert tau[5] == tau[1] * tau[2]
    assert tau[11] == tau[2] * tau[3]  # tau(12) = tau(3) tau(4)


def test_delta_growth_model(tau200):
    assert tau200.sigma == 6.0
    for m, c in enumerate(tau200.coeffs, start=1):
        assert abs(c) <= tau200.growth_c * m**tau200.sigma + 1e-9


def test_delta_delta_p_structure():
    p = 5
    f, g = delta_delta_p(p, 40)
    assert all(c == 0 for c in f.exact[:p])
    assert f.exact[p] == 1
    assert f.exact[p + 1] == -24
    assert g.exact == f.exact  # Fricke eigenvalue +1


def test_sigma_series_values():
    from weilgap.series import sigma_coeffs

    s3 = sigma_coeffs(3, 6)
    assert s3 == [1, 9, 28, 73, 126, 252]


def test_classical_discriminant_identity(tau200):
    # E4^3 - E6^2 = 1728 Delta: an independent route to tau
    from weilgap.series import eisenstein_level1

    M = 40
    e4 = eisenstein_level1(4, M)
    e6 = eisenstein_level1(6, M)
    lhs = multiply(multiply(e4, e4), e4)
    rhs = multiply(e6, e6)
    for m in range(1, M + 1):
        diff = lhs.exact[m - 1] - rhs.exact[m - 1]
        assert diff == 1728 * tau200.exact[m - 1]


def test_eisenstein_level1_rejects_odd_weight():
    from weilgap.series import eisenstein_level1

    with pytest.raises(ValueError):
        eisenstein_level1(12, 10)


def test_multiply_by_one():
    d = delta_coeffs(30)
    assert multiply(d, one_series(30)).exact == d.exact


def test_multiply_delta_squared():
    d = delta_coeffs(30)
    sq = multiply(d, d)
    assert sq.exact[0] == 0 and sq.exact[1] == 1
    assert sq.weight == 24


def test_multiply_eisenstein_delta_leading_term():
    gens = build_presentation(5)
    eis = eisenstein_multiplier_coeffs(5, trivial_multiplier(gens), 4, M=20, c_max=200)
    prod = multiply(eis, delta_coeffs(20))
    assert abs(prod.coeffs[0] - 1.0) < 1e-12  # a_0(Eis) * tau(1)
    assert prod.weight == 16


def test_kloosterman_m0_is_phi(gens5=None):
    gens = build_presentation(5)
    ups = trivial_multiplier(gens)
    for c in (5, 10, 15):
        phi = len([d for d in range(1, c + 1) if math.gcd(d, c) == 1])
        ks = twisted_kloosterman(5, ups, 0, c)
        assert ks.is_exact and ks.exact_value == phi


def test_kloosterman_trivial_vs_bruteforce():
    gens = build_presentation(5)
    ups = trivial_multiplier(gens)
    for c in (5, 10, 15):
        for m in (1, 2, 3, 7, 11):
            ks = twisted_kloosterman(5, ups, m, c)
            brute = sum(
                cmath.exp(2j * cmath.pi * m * d / c)
                for d in range(1, c + 1)
                if math.gcd(d, c) == 1
            )
            assert abs(ks.value - brute) < 1e-10
            phi = len([d for d in range(1, c + 1) if math.gcd(d, c) == 1])
            assert abs(ks.value) <= phi + 1e-9


def test_kloosterman_character_twist_factorization():
    # with upsilon = upsilon_chi the sum is the chi-bar-twisted classical sum
    p = 5
    gens = build_presentation(p)
    chi = quadratic_char(p)
    ups = char_multiplier(chi, gens)
    for c in (5, 10, 15):
        for m in (0, 1, 2, 4):
            ks = twisted_kloosterman(p, ups, m, c)
            brute = sum(
                chi(d).conjugate() * cmath.exp(2j * cmath.pi * m * d / c)
                for d in range(1, c + 1)
                if math.gcd(d, c) == 1
            )
            assert abs(ks.value - brute) < 1e-9


def test_kloosterman_rejects_bad_modulus():
    gens = build_presentation(5)
    ups = trivial_multiplier(gens)
    with pytest.raises(ValueError):
        twisted_kloosterman(5, ups, 1, 7)


def test_kloosterman_requires_upsilon_s_trivial():
    from fractions import Fraction

    from weilgap.multiplier import Angle, MultiplierSystem

    gens = build_presentation(5)
    angles = {lbl: Angle() for lbl in gens.labels}
    angles["S"] = Angle(Fraction(1, 7))
    bad = MultiplierSystem(gens, angles)
    with pytest.raises(ValueError):
        twisted_kloosterman(5, bad, 1, 5)


def test_eisenstein_constant_term_and_tail():
    gens = build_presentation(5)
    ups = trivial_multiplier(gens)
    eis = eisenstein_multiplier_coeffs(5, ups, 4, M=10, c_max=400)
    assert eis.a0 == 1
    # tail bound behaves like c_max^{-2} at weight 4
    for m in (1, 5, 10):
        ratio = eisenstein_tail_bound(5, 4, m, 800) / eisenstein_tail_bound(5, 4, m, 400)
        assert ratio < 0.3


def test_eisenstein_rejects_low_weight():
    gens = build_presentation(5)
    with pytest.raises(ValueError):
        eisenstein_multiplier_coeffs(5, trivial_multiplier(gens), 2, M=5)


def test_eisenstein_character_multiplier_modularity():
    # weight-4 series with upsilon = upsilon_chi: residual of
    # (F|_4 gamma)(z) - chi(d) F(z) shrinks with c_max at the generators.
    # M is sized for the smallest Im(gamma z) over the test configuration.
    from weilgap.matrices import slash_action

    p = 5
    gens = build_presentation(p)
    chi = quadratic_char(p)
    ups = char_multiplier(chi, gens)
    z = 0.1 + 0.8j
    residuals = []
    for c_max in (30 * p, 60 * p):
        eis = eisenstein_multiplier_coeffs(p, ups, 4, M=700, c_max=c_max)
        worst = 0.0
        for lbl, mat in gens.generators:
            lhs = slash_action(eis.eval_truncated, 4, mat, z)
            rhs = complex(ups.value(mat)) * eis.eval_truncated(z)
            worst = max(worst, abs(lhs - rhs))
        residuals.append(worst)
    assert residuals[1] < residuals[0]
    assert residuals[1] < 5e-2


def test_lift_bottom_row():
    m = lift_bottom_row(10, 3)
    assert m.det() == 1 and (m.c, m.d) == (10, 3)
    with pytest.raises(ValueError):
        lift_bottom_row(10, 4)


def test_fourier_extraction_recovers_tau(tau200):
    ev = series_evaluator(delta_coeffs(400))
    slashed = slash_evaluator(ev, 12, T)  # Delta|T = Delta
    rec = coeffs_via_fourier_extraction(slashed, 12, 1.0, 10, growth_c=2.0, growth_sigma=6.0)
    for m in range(1, 11):
        assert abs(rec.coeffs[m - 1] - tau200.exact[m - 1]) <= 1e-6 * max(1, abs(tau200.exact[m - 1]))


def test_fourier_extraction_recovers_fricke_pair():
    p = 5
    f, _ = delta_delta_p(p, 400)
    ev = slash_evaluator(series_evaluator(f), 24, FrickeMat(p))  # g = f|W_p = f
    rec = coeffs_via_fourier_extraction(
        ev, 24, 0.45, 8, growth_c=max(f.growth_c, 1.0), growth_sigma=12.0
    )
    for m in range(1, 9):
        assert abs(rec.coeffs[m - 1] - f.coeffs[m - 1]) < 1e-6 * max(1.0, abs(f.coeffs[m - 1]))


def test_fourier_extraction_linearity():
    ev1 = series_evaluator(delta_coeffs(50))
    ev2 = series_evaluator(one_series(50))

    def combined(z):
        return ev1(z) + ev2(z)

    rec1 = coeffs_via_fourier_extraction(ev1, 12, 0.8, 4, growth_c=2.0, growth_sigma=6.0)
    rec12 = coeffs_via_fourier_extraction(combined, 12, 0.8, 4, growth_c=3.0, growth_sigma=6.0)
    for m in range(4):
        # the constant series contributes nothing at m >= 1
        assert abs(rec12.coeffs[m] - rec1.coeffs[m]) < 1e-9 * max(1, abs(rec1.coeffs[m]))


def test_fourier_extraction_refuses_unreachable():
    ev = series_evaluator(delta_coeffs(50))
    with pytest.raises(ValueError):
        coeffs_via_fourier_extraction(
            ev, 12, 1.0, 10, growth_c=2.0, growth_sigma=6.0, eval_error=1e-3
        )


def test_json_lines_roundtrip_exact_and_float():
    f, _ = delta_delta_p(5, 25)
    back = CoeffSeries.from_json_lines(f.to_json_lines())
    assert back.exact == f.exact and back.level == 5 and back.weight == 24
    gens = build_presentation(5)
    eis = eisenstein_multiplier_coeffs(5, trivial_multiplier(gens), 4, M=8, c_max=100)
    back2 = CoeffSeries.from_json_lines(eis.to_json_lines())
    assert back2.a0 == 1
    assert np.allclose(back2.as_array(), eis.as_array())
