"""Exact quantization of nonnegative objective values.

A quantizer grid is described by an integer base ``b >= 2`` and two integer
exponents: a fixed normalization exponent ``eta_pow`` and a running
resolution exponent ``h_exp >= 0``.  The grid scale is

    Q_p = b ** (eta_pow + h_exp)

and a raw value ``f >= 0`` is mapped to the integer level

    level = floor(Q_p * f + 0.5)

with quantized value ``level / Q_p``.  The signed rounding error
``level - Q_p * f`` always lies in ``(-0.5, 0.5]``.

Everything here is exact integer arithmetic as long as ``Q_p * f`` stays
below ``2**53``, the largest range in which float64 represents every
integer.  Past that point the floor is no longer trustworthy, so
:func:`quantize` refuses to produce a level and raises
:class:`PrecisionOverflowError` instead of silently returning garbage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "EXACT_FLOOR_CAP",
    "PrecisionOverflowError",
    "MismatchedConfigError",
    "QuantConfig",
    "QuantizedValue",
    "quantize",
    "quantization_error",
    "init_eta",
    "compare",
    "max_h_exp",
]

# Largest contiguous integer range of float64: every int in [0, 2**53] is
# exactly representable, 2**53 + 1 is not.
EXACT_FLOOR_CAP = 2 ** 53

# |eta_pow + h_exp| beyond this would push b**exp outside normal float64
# territory even for b = 2; reject early instead of overflowing later.
_MAX_ABS_EXP = 1000


class PrecisionOverflowError(ArithmeticError):
    """The scaled value left the exact-integer range of float64."""


class MismatchedConfigError(ValueError):
    """Comparison of quantized values from incompatible grids."""


def _pow_int(base: int, exp: int) -> float:
    """base ** exp as float, exact whenever the result is representable."""
    if exp >= 0:
        return float(base ** exp)
    return 1.0 / float(base ** -exp)


def _floor_log(base: int, x: float) -> int:
    """Largest integer k with base**k <= x, for x > 0.

    ``math.log`` can land one off at exact powers of the base, so the float
    estimate is fixed up with exact int-vs-float comparisons.
    """
    k = int(math.floor(math.log(x, base)))
    while _pow_int(base, k + 1) <= x:
        k += 1
    while _pow_int(base, k) > x:
        k -= 1
    return k


@dataclass(frozen=True)
class QuantConfig:
    """Immutable description of one quantizer grid.

    Parameters
    ----------
    base : int
        Integer grid base, at least 2.
    h_exp : int
        Resolution exponent, at least 0.  Raising it by one refines the
        grid by a factor of ``base``.
    eta_pow : int
        Normalization exponent, any sign.  Chosen once per run (see
        :func:`init_eta`) so that the starting scale matches the magnitude
        of the objective.
    """

    base: int = 2
    h_exp: int = 0
    eta_pow: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.base, int) or self.base < 2:
            raise ValueError(f"base must be an integer >= 2, got {self.base!r}")
        if not isinstance(self.h_exp, int) or self.h_exp < 0:
            raise ValueError(f"h_exp must be an integer >= 0, got {self.h_exp!r}")
        if not isinstance(self.eta_pow, int):
            raise ValueError(f"eta_pow must be an integer, got {self.eta_pow!r}")
        if abs(self.eta_pow + self.h_exp) * math.log2(self.base) > _MAX_ABS_EXP:
            raise ValueError(
                f"grid exponent {self.eta_pow + self.h_exp} is outside the "
                f"usable float64 range for base {self.base}"
            )

    @property
    def exp(self) -> int:
        """Combined exponent eta_pow + h_exp."""
        return self.eta_pow + self.h_exp

    @property
    def qp(self) -> float:
        """Grid scale Q_p = base ** (eta_pow + h_exp)."""
        return _pow_int(self.base, self.exp)

    def refined(self, steps: int = 1) -> "QuantConfig":
        """Same grid with h_exp raised by ``steps``."""
        return QuantConfig(self.base, self.h_exp + steps, self.eta_pow)


@dataclass(frozen=True)
class QuantizedValue:
    """An integer level together with the grid it lives on."""

    level: int
    config: QuantConfig

    @property
    def value(self) -> float:
        """The representable value level / Q_p."""
        return self.level / self.config.qp

    def __lt__(self, other: "QuantizedValue") -> bool:
        return compare(self, other) < 0

    def __le__(self, other: "QuantizedValue") -> bool:
        return compare(self, other) <= 0

    def __gt__(self, other: "QuantizedValue") -> bool:
        return compare(self, other) > 0

    def __ge__(self, other: "QuantizedValue") -> bool:
        return compare(self, other) >= 0


def quantize(f: float, config: QuantConfig) -> QuantizedValue:
    """Round ``f`` to its level on the grid.

    Raises
    ------
    ValueError
        If ``f`` is negative, NaN, or infinite.
    PrecisionOverflowError
        If ``Q_p * f`` is too large for the floor to be exact.
    """
    f = float(f)
    if not (f >= 0.0) or math.isinf(f):
        raise ValueError(f"quantizer input must be finite and >= 0, got {f!r}")
    scaled = f * config.qp + 0.5
    if scaled >= EXACT_FLOOR_CAP:
        raise PrecisionOverflowError(
            f"scaled value {scaled:.6g} exceeds the exact float64 integer "
            f"range 2**53 (f={f!r}, Q_p={config.qp!r})"
        )
    return QuantizedValue(int(scaled), config)


def quantization_error(f: float, config: QuantConfig) -> float:
    """Signed rounding error level - Q_p * f, always in (-0.5, 0.5]."""
    return quantize(f, config).level - float(f) * config.qp


def init_eta(f0: float, base: int = 2) -> int:
    """Normalization exponent for a run starting at objective value ``f0``.

    Returns ``-floor(log_base(f0 + 1))``, so that the starting scale
    ``base ** eta_pow`` pulls ``f0`` down to order one.  The +1 keeps the
    logarithm safe for objectives that start at or near zero.
    """
    f0 = float(f0)
    if not (f0 >= 0.0) or math.isinf(f0):
        raise ValueError(f"initial objective must be finite and >= 0, got {f0!r}")
    if not isinstance(base, int) or base < 2:
        raise ValueError(f"base must be an integer >= 2, got {base!r}")
    return -_floor_log(base, f0 + 1.0)


def compare(a: QuantizedValue, b: QuantizedValue) -> int:
    """Exact three-way comparison: -1, 0, or 1 as a <, ==, > b.

    Both values must share base and eta_pow.  Differing h_exp is fine: the
    coarser level is rescaled onto the finer grid in integer arithmetic, so
    the comparison never touches floats.
    """
    ca, cb = a.config, b.config
    if ca.base != cb.base or ca.eta_pow != cb.eta_pow:
        raise MismatchedConfigError(
            f"cannot compare grids (base={ca.base}, eta_pow={ca.eta_pow}) "
            f"and (base={cb.base}, eta_pow={cb.eta_pow})"
        )
    la, lb = a.level, b.level
    if ca.h_exp < cb.h_exp:
        la *= ca.base ** (cb.h_exp - ca.h_exp)
    elif cb.h_exp < ca.h_exp:
        lb *= cb.base ** (ca.h_exp - cb.h_exp)
    return (la > lb) - (la < lb)


def max_h_exp(base: int, eta_pow: int, f_max: float) -> int:
    """Largest safe resolution exponent for objective values up to ``f_max``.

    Any ``h_exp`` at most this bound keeps ``Q_p * (f_max + 1)`` below
    ``2**53``, so every quantization in the run stays exact with a margin
    of one whole unit above the worst value seen so far.  Clamped below at
    0; if even ``h_exp = 0`` is unsafe, :func:`quantize` will raise at the
    point of use.
    """
    f_max = float(f_max)
    if not (f_max >= 0.0) or math.isinf(f_max):
        raise ValueError(f"f_max must be finite and >= 0, got {f_max!r}")
    # Float estimate first, then exact integer correction: the division
    # can round across a power of the base right at the boundary, and an
    # off-by-one here would hand out a grid that silently floors wrong.
    num, den = (f_max + 1.0).as_integer_ratio()

    def safe(h: int) -> bool:
        k = eta_pow + h
        if k >= 0:
            return base ** k * num <= EXACT_FLOOR_CAP * den
        return num <= EXACT_FLOOR_CAP * den * base ** (-k)

    limit = EXACT_FLOOR_CAP / (f_max + 1.0)
    h = max(0, _floor_log(base, limit) - eta_pow)
    while h > 0 and not safe(h):
        h -= 1
    while safe(h + 1):
        h += 1
    return h
