"""Fourier coefficient prefixes: Delta, Delta(z)Delta(pz), products, and
Eisenstein series attached to a general multiplier system.

Integral sources (Ramanujan tau and its convolutions) are computed with
exact integer arithmetic.  The Eisenstein coefficients use the expansion
of the infinity-cusp series sum conj(upsilon(gamma)) j(gamma, z)^{-w} over
Gamma_infinity \\ Gamma0(p):

    a_0 = 1,
    a_m = (-2 pi i)^w m^{w-1} / (w-1)! * sum_{p | c, c > 0} c^{-w} S_ups(m, c),

where S_ups(m, c) = sum_{d mod c, (d, c) = 1} conj(upsilon(gamma_{c,d}))
e(m d / c) is a multiplier-twisted Kloosterman-type sum; every coefficient
carries the tail bound of the truncated c-sum.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .matrices import Mat2
from .multiplier import MultiplierSystem
from .presentation import _egcd


@dataclass
class CoeffSeries:
    """A finite prefix a_1..a_M of a coefficient sequence with growth data.

    ``a0`` is the constant term (nonzero only for Eisenstein-type series).
    ``exact`` holds integer coefficients when the source is integral.
    ``sigma`` is the recorded polynomial growth exponent and ``growth_c``
    the constant max |a_m| / m^sigma over the stored prefix.
    """

    coeffs: list[complex]
    weight: int
    level: int
    sigma: float
    label: str
    a0: complex = 0j
    exact: Optional[list[int]] = None
    error_bound: float = 0.0

    def __post_init__(self):
        self.coeffs = [complex(c) for c in self.coeffs]
        self.growth_c = max(
            (abs(c) / m**self.sigma for m, c in enumerate(self.coeffs, start=1)),
            default=0.0,
        )

    @property
    def M(self) -> int:
        return len(self.coeffs)

    def a(self, m: int) -> complex:
        if m == 0:
            return self.a0
        if 1 <= m <= self.M:
            return self.coeffs[m - 1]
        raise IndexError(f"coefficient a_{m} beyond stored prefix M = {self.M}")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=complex)

    def tail_bound(self, y: float, m_from: Optional[int] = None) -> float:
        """Bound C * sum_{m > M} m^sigma e^{-2 pi m y} on the dropped tail."""
        start = (m_from if m_from is not None else self.M) + 1
        t = 2 * math.pi * y
        total, m = 0.0, start
        # sum until the geometric-style remainder bound is negligible
        while True:
            term = m**self.sigma * math.exp(-t * m)
            total += term
            ratio = ((m + 1) / m) ** self.sigma * math.exp(-t)
            if ratio < 1 and term * ratio / (1 - ratio) < 1e-18 * (total + 1e-300):
                total += term * ratio / (1 - ratio)
                break
            if term == 0.0:
                break
            m += 1
            if m > start + 200000:
                return math.inf
        return self.growth_c * total

    def eval_truncated(self, z: complex) -> complex:
        """f(z) = a0 + sum_{m <= M} a_m e(m z), the entire truncation."""
        q = cmath.exp(2j * cmath.pi * z)
        total = 0j
        for c in reversed(self.coeffs):
            total = (total + c) * q
        return self.a0 + total

    def eval_many(self, zs: np.ndarray) -> np.ndarray:
        qs = np.exp(2j * np.pi * np.asarray(zs, dtype=complex))
        powers = qs[:, None] ** np.arange(1, self.M + 1)[None, :]
        return self.a0 + powers @ self.as_array()

    def copy_with(self, **kwargs) -> "CoeffSeries":
        data = dict(
            coeffs=list(self.coeffs),
            weight=self.weight,
            level=self.level,
            sigma=self.sigma,
            label=self.label,
            a0=self.a0,
            exact=None if self.exact is None else list(self.exact),
            error_bound=self.error_bound,
        )
        data.update(kwargs)
        return CoeffSeries(**data)

    # -- JSON lines interface ----------------------------------------------

    def to_json_lines(self) -> str:
        header = {
            "label": self.label,
            "weight": self.weight,
            "level": self.level,
            "sigma": self.sigma,
            "M": self.M,
            "error_bound": self.error_bound,
        }
        lines = [json.dumps(header)]
        if self.a0 != 0:
            lines.append(json.dumps({"m": 0, "re": _num_json(self.a0.real), "im": _num_json(self.a0.imag)}))
        for m, c in enumerate(self.coeffs, start=1):
            if self.exact is not None:
                lines.append(json.dumps({"m": m, "re": str(self.exact[m - 1]), "im": "0"}))
            else:
                lines.append(json.dumps({"m": m, "re": c.real, "im": c.imag}))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_json_lines(cls, text: str) -> "CoeffSeries":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        header = json.loads(lines[0])
        coeffs: dict[int, complex] = {}
        a0 = 0j
        exact: Optional[list[int]] = []
        for ln in lines[1:]:
            rec = json.loads(ln)
            re, im = _num_parse(rec["re"]), _num_parse(rec["im"])
            if rec["m"] == 0:
                a0 = complex(re, im)
                continue
            coeffs[rec["m"]] = complex(re, im)
            if not (isinstance(re, int) and im == 0):
                exact = None
            elif exact is not None:
                exact.append(re)
        ordered = [coeffs[m] for m in range(1, header["M"] + 1)]
        if exact is not None and len(exact) != len(ordered):
            exact = None
        return cls(
            ordered,
            header["weight"],
            header["level"],
            header["sigma"],
            header["label"],
            a0=a0,
            exact=exact,
            error_bound=header.get("error_bound", 0.0),
        )


def _num_json(x: float):
    return int(x) if float(x).is_integer() else x


def _num_parse(x):
    if isinstance(x, str):
        return int(x)
    return x


# ---------------------------------------------------------------------------
# Integral series


def eta_product_coeffs(M: int) -> list[int]:
    """Coefficients of prod_{n >= 1} (1 - q^n)^24 up to q^{M-1}, exactly.

    Jacobi: (prod (1 - q^n))^3 = sum_{k >= 0} (-1)^k (2k+1) q^{k(k+1)/2},
    then three squarings.
    """
    size = M  # need exponents 0..M-1
    eta3 = [0] * size
    k = 0
    while k * (k + 1) // 2 < size:
        eta3[k * (k + 1) // 2] = (-1) ** k * (2 * k + 1)
        k += 1

    def square(poly: list[int]) -> list[int]:
        out = [0] * size
        support = [i for i, c in enumerate(poly) if c]
        for i in support:
            ci = poly[i]
            for j in support:
                if i + j >= size:
                    break
                out[i + j] += ci * poly[j]
        return out

    eta6 = square(eta3)
    eta12 = square(eta6)
    return square(eta12)


def delta_coeffs(M: int) -> CoeffSeries:
    """Ramanujan tau(1..M): Delta = q * prod (1 - q^n)^24, exact integers."""
    if M < 1:
        raise ValueError("need M >= 1")
    eta24 = eta_product_coeffs(M)
    tau = eta24[:M]  # tau(m) = coefficient of q^{m-1} in eta24
    return CoeffSeries(
        [complex(t) for t in tau],
        weight=12,
        level=1,
        sigma=6.0,
        label="delta",
        exact=list(tau),
    )


def sigma_coeffs(k: int, M: int) -> list[int]:
    """sigma_k(1..M), exact, by sieving over divisors."""
    out = [0] * (M + 1)
    for d in range(1, M + 1):
        dk = d**k
        for n in range(d, M + 1, d):
            out[n] += dk
    return out[1:]


_EISENSTEIN_LEVEL1_FACTOR = {4: 240, 6: -504, 8: 480, 10: -264, 14: -24}


def eisenstein_level1(k: int, M: int) -> CoeffSeries:
    """The classical series E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n for
    the weights with integer normalization (k in {4, 6, 8, 10, 14})."""
    if k not in _EISENSTEIN_LEVEL1_FACTOR:
        raise ValueError(f"integer-normalized E_k only for k in {sorted(_EISENSTEIN_LEVEL1_FACTOR)}")
    factor = _EISENSTEIN_LEVEL1_FACTOR[k]
    coeffs = [factor * s for s in sigma_coeffs(k - 1, M)]
    return CoeffSeries(
        [complex(c) for c in coeffs],
        weight=k,
        level=1,
        sigma=float(k),
        label=f"E{k}",
        a0=1 + 0j,
        exact=coeffs,
    )


def delta_delta_p(p: int, M: int) -> tuple[CoeffSeries, CoeffSeries]:
    """f(z) = Delta(z) Delta(pz) of weight 24 on Gamma0(p); g = f|W_p = f.

    c_m = sum_{i + p j = m, i, j >= 1} tau(i) tau(j).
    """
    tau = delta_coeffs(M).exact
    assert tau is not None
    c = [0] * M
    for j in range(1, M // p + 1):
        tj = tau[j - 1]
        base = p * j
        for i in range(1, M - base + 1):
            c[base + i - 1] += tau[i - 1] * tj
    f = CoeffSeries(
        [complex(x) for x in c],
        weight=24,
        level=p,
        sigma=12.0,
        label=f"delta_delta_{p}",
        exact=c,
    )
    return f, f.copy_with(label=f"delta_delta_{p}_fricke")


def multiply(f: CoeffSeries, g: CoeffSeries) -> CoeffSeries:
    """Cauchy product of q-expansions; weight adds, the prefix length is
    min(M_f, M_g) (every needed coefficient of either factor is stored)."""
    M = min(f.M, g.M)
    out = [0j] * M
    exact: Optional[list[int]] = None
    if f.exact is not None and g.exact is not None:
        exact_out = [0] * M
        fa0 = int(f.a0.real) if f.a0 == int(f.a0.real) else None
        ga0 = int(g.a0.real) if g.a0 == int(g.a0.real) else None
        if fa0 is not None and ga0 is not None:
            for m in range(1, M + 1):
                total = fa0 * (g.exact[m - 1] if m <= g.M else 0)
                total += ga0 * (f.exact[m - 1] if m <= f.M else 0)
                for i in range(1, m):
                    if i <= f.M and m - i <= g.M:
                        total += f.exact[i - 1] * g.exact[m - i - 1]
                exact_out[m - 1] = total
            exact = exact_out
    if exact is not None:
        out = [complex(x) for x in exact]
    else:
        for m in range(1, M + 1):
            total = f.a0 * g.a(m) if m <= g.M else 0j
            total += g.a0 * f.a(m) if m <= f.M else 0j
            for i in range(1, m):
                if i <= f.M and m - i <= g.M:
                    total += f.coeffs[i - 1] * g.coeffs[m - i - 1]
            out[m - 1] = total
    return CoeffSeries(
        out,
        weight=f.weight + g.weight,
        level=max(f.level, g.level),
        sigma=f.sigma + g.sigma + 1.0,
        label=f"({f.label})*({g.label})",
        a0=f.a0 * g.a0,
        exact=exact,
        error_bound=f.error_bound + g.error_bound,
    )


def one_series(M: int, level: int = 1) -> CoeffSeries:
    """The constant series 1 (a0 = 1, all a_m = 0)."""
    return CoeffSeries([0j] * M, 0, level, 0.0, "one", a0=1 + 0j, exact=[0] * M)


# ---------------------------------------------------------------------------
# Twisted Kloosterman sums and Eisenstein series


@dataclass
class KloostermanSum:
    """S_ups(m, c) = sum_{d mod c, (d,c)=1} conj(ups(gamma_{c,d})) e(m d / c)."""

    modulus: int
    frequency: int
    value: complex
    is_exact: bool = False
    exact_value: Optional[int] = None
    upsilon: Optional[MultiplierSystem] = None


def lift_bottom_row(c: int, d: int) -> Mat2:
    """Some gamma in SL2(Z) with bottom row (c, d); requires gcd(c, d) = 1."""
    g, x, y = _egcd(d, -c)
    if g != 1:
        raise ValueError(f"bottom row ({c}, {d}) is not unimodular")
    return Mat2.sl2(x, y, c, d)


def _ramanujan_sum(m: int, c: int) -> int:
    """c_c(m) = sum_{d | gcd(m, c)} d * mu(c / d)."""
    def mu(n: int) -> int:
        result = 1
        x = 2
        while x * x <= n:
            if n % x == 0:
                n //= x
                if n % x == 0:
                    return 0
                result = -result
            x += 1
        if n > 1:
            result = -result
        return result

    g = math.gcd(m, c) if m != 0 else c
    total = 0
    for d in range(1, g + 1):
        if g % d == 0:
            total += d * mu(c // d)
    return total


class _UpsilonCache:
    """conj(upsilon(gamma_{c,d})) per (c, d), memoized across frequencies."""

    def __init__(self, upsilon: MultiplierSystem):
        if not upsilon.angles["S"].is_zero_mod1():
            raise ValueError("twisted Kloosterman sums require upsilon(S) = 1")
        self.upsilon = upsilon
        self._trivial = upsilon.is_trivial()
        self._cache: dict[tuple[int, int], complex] = {}

    def conj_value(self, c: int, d: int) -> complex:
        if self._trivial:
            return 1.0 + 0j
        key = (c, d)
        val = self._cache.get(key)
        if val is None:
            gamma = lift_bottom_row(c, d)
            val = self.upsilon.value(gamma).conjugate()
            self._cache[key] = val
        return val

    def row(self, c: int) -> tuple[np.ndarray, np.ndarray]:
        ds = [d for d in range(1, c + 1) if math.gcd(d, c) == 1]
        vals = np.array([self.conj_value(c, d) for d in ds], dtype=complex)
        return np.array(ds), vals


def twisted_kloosterman(p: int, upsilon: MultiplierSystem, m: int, c: int,
                        _cache: Optional[_UpsilonCache] = None) -> KloostermanSum:
    """The multiplier-twisted sum S_ups(m, c) for p | c, c > 0.

    Well-defined because upsilon(S) = 1 makes the value independent of the
    choice of lift gamma_{c,d}; this is rejected otherwise.
    """
    if c <= 0 or c % p != 0:
        raise ValueError(f"modulus c = {c} must be a positive multiple of p = {p}")
    cache = _cache if _cache is not None else _UpsilonCache(upsilon)
    ds, vals = cache.row(c)
    phases = np.exp(2j * np.pi * m * ds / c)
    value = complex(np.sum(vals * phases))
    if upsilon.is_trivial():
        exact = _ramanujan_sum(m, c)
        assert abs(value - exact) < 1e-6 * max(1.0, abs(exact)), (m, c, value, exact)
        return KloostermanSum(c, m, complex(exact), True, exact, upsilon)
    return KloostermanSum(c, m, value, False, None, upsilon)


def _eis_tail_sum(p: int, w: int, c_max: int) -> float:
    """Bound on sum_{c > c_max, p | c} c^{1 - w} (triangle inequality uses
    |S_ups(m, c)| <= phi(c) <= c)."""
    t0 = c_max // p + 1
    # sum_{t >= t0} (p t)^{1 - w} <= p^{1-w} * (t0^{1-w} + integral)
    return p ** (1 - w) * (t0 ** (1 - w) + t0 ** (2 - w) / (w - 2))


def eisenstein_multiplier_coeffs(
    p: int,
    upsilon: MultiplierSystem,
    weight: int = 4,
    M: int = 50,
    c_max: Optional[int] = None,
) -> CoeffSeries:
    """Coefficients of the infinity-cusp Eisenstein series of even weight
    w >= 4 with multiplier upsilon on Gamma0(p), a_0 = 1, with per-run tail
    bound from truncating the c-sum at c_max."""
    if weight < 3:
        raise ValueError("the Eisenstein expansion diverges for weight < 3")
    if weight % 2 != 0:
        raise ValueError("even weights only")
    if c_max is None:
        c_max = 200 * p
    cache = _UpsilonCache(upsilon)
    ms = np.arange(1, M + 1)
    sums = np.zeros(M, dtype=complex)
    for c in range(p, c_max + 1, p):
        ds, vals = cache.row(c)
        # e(m d / c) for all m <= M at once
        phase = np.exp(2j * np.pi / c * (ms[:, None] * ds[None, :] % c))
        sums += (phase @ vals) * float(c) ** (-weight)
    front = (-2j * np.pi) ** weight / math.factorial(weight - 1)
    coeffs = front * ms ** (weight - 1) * sums
    tail = _eis_tail_sum(p, weight, c_max)
    per_coeff_bound = (
        (2 * np.pi) ** weight * ms ** (weight - 1) / math.factorial(weight - 1) * tail
    )
    series = CoeffSeries(
        list(coeffs),
        weight=weight,
        level=p,
        sigma=float(weight),
        label=f"eisenstein_p{p}_w{weight}",
        a0=1 + 0j,
        error_bound=float(np.max(per_coeff_bound)),
    )
    series.per_coeff_error = [float(b) for b in per_coeff_bound]
    series.c_max = c_max
    return series


def eisenstein_tail_bound(p: int, weight: int, m: int, c_max: int) -> float:
    """The stated per-coefficient bound on the dropped c > c_max tail."""
    return (
        (2 * math.pi) ** weight
        * m ** (weight - 1)
        / math.factorial(weight - 1)
        * _eis_tail_sum(p, weight, c_max)
    )


# ---------------------------------------------------------------------------
# Numerical Fourier extraction


def coeffs_via_fourier_extraction(
    evaluator: Callable,
    k: int,
    y: float,
    M: int,
    label: str = "extracted",
    level: int = 1,
    growth_c: float = 1.0,
    growth_sigma: float = 12.0,
    eval_error: float = 0.0,
    dps: Optional[int] = None,
) -> CoeffSeries:
    """Recover b_m of an evaluator via b_m ~ e^{2 pi m y} int_0^1 F(x + iy) e(-m x) dx.

    Equispaced quadrature with N >= 4M nodes computes the integral exactly
    up to aliasing, so the per-coefficient error estimate is

        sum_{j >= 1} C (m + jN)^sigma e^{-2 pi j N y}  +  e^{2 pi m y} * eval_error,

    with (C, sigma) the supplied growth model of the unknown coefficients.
    The evaluator is called with an mpmath complex argument (wrap plain
    float evaluators as ``lambda z: f(complex(z))`` at the cost of float
    precision); working precision is raised with M*y so the e^{2 pi m y}
    amplification cannot drown the quadrature.  If the estimate exceeds
    10^{-3} the requested M is refused as unreachable at this height.
    """
    import mpmath as mp

    N = max(4 * M, 64)
    if dps is None:
        dps = int(2 * math.pi * M * y / math.log(10)) + 25
    errors = []
    for m in range(1, M + 1):
        alias = sum(
            growth_c * (m + j * N) ** growth_sigma * math.exp(-2 * math.pi * (j * N) * y)
            for j in range(1, 4)
        )
        errors.append(alias + math.exp(2 * math.pi * m * y) * eval_error)
    worst = max(errors)
    if not math.isfinite(worst) or worst > 1e-3:
        raise ValueError(
            f"requested M = {M} unreachable at height y = {y}: error estimate {worst:.2e}"
        )
    with mp.workdps(dps):
        nodes = [mp.mpf(n) / N for n in range(N)]
        values = [mp.mpc(evaluator(mp.mpc(x, y))) for x in nodes]
        root = mp.e ** (-2j * mp.pi / N)  # e(-1/N)
        coeffs = []
        for m in range(1, M + 1):
            total = mp.mpc(0)
            phase = mp.mpc(1)
            step = root**m
            for v in values:
                total += v * phase
                phase *= step
            total = total / N * mp.e ** (2 * mp.pi * m * y)
            coeffs.append(complex(total))
    series = CoeffSeries(coeffs, k, level, growth_sigma, label, error_bound=worst)
    series.per_coeff_error = errors
    return series


def series_evaluator(series: CoeffSeries):
    """An mpmath evaluator for the entire truncation a0 + sum a_m e(m z)."""
    import mpmath as mp

    coeffs = [mp.mpc(c) for c in series.coeffs]
    a0 = mp.mpc(series.a0)

    def evaluate(z):
        q = mp.e ** (2j * mp.pi * mp.mpc(z))
        total = mp.mpc(0)
        for c in reversed(coeffs):
            total = (total + c) * q
        return a0 + total

    return evaluate


def slash_evaluator(evaluator, k: int, gamma):
    """An mpmath evaluator for (f|_k gamma) given one for f.

    gamma is a Mat2 or FrickeMat; the cocycle is evaluated in mpmath.
    """
    import mpmath as mp

    from .matrices import FrickeMat

    if isinstance(gamma, FrickeMat):
        p = gamma.p

        def evaluate(z):
            z = mp.mpc(z)
            w = -1 / (p * z)
            j = mp.sqrt(p) * z
            return j ** (-k) * evaluator(w)

        return evaluate

    a, b, c, d = gamma.entries()

    def evaluate(z):
        z = mp.mpc(z)
        w = (a * z + b) / (c * z + d)
        j = c * z + d
        return j ** (-k) * evaluator(w)

    return evaluate
