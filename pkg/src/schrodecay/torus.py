"""Potential shape on the circle, Brownian motion on it, and the Lyapunov exponent.

The torus is the circle ``[0, 2*pi)`` with Haar measure of total mass one, so
a field ``F(x) = sum_n c_n exp(i n x)`` has ``int |F|^2 = sum |c_n|^2``.  The
Brownian generator is ``(sigma2 / 2) d^2/dx^2``, acting on mode ``n`` as
multiplication by ``-sigma2 * n**2 / 2``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, InvariantError

TWO_PI = 2.0 * math.pi
IMAG_TOL = 1e-10


def _coefficient_array(coefficients, n_max):
    c = np.zeros(2 * n_max + 1, dtype=np.complex128)
    for n, value in coefficients.items():
        n = int(n)
        if abs(n) > n_max:
            raise InvalidArgumentError(f"mode {n} exceeds n_max={n_max}")
        c[n + n_max] = complex(value)
    return c


@dataclass(frozen=True, eq=False)
class ComplexTorusField:
    """Fourier coefficients ``c[n + n_max]`` with no symmetry constraint."""

    coeffs: np.ndarray
    n_max: int

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.n_max, self.n_max + 1)

    def __getitem__(self, n: int) -> complex:
        if abs(n) > self.n_max:
            return 0j
        return complex(self.coeffs[n + self.n_max])

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        phases = np.exp(1j * np.multiply.outer(x, self.modes))
        return phases @ self.coeffs


@dataclass(frozen=True, eq=False)
class TorusField(ComplexTorusField):
    """Real, mean-zero field on the circle stored as a Fourier series.

    Construct with :meth:`from_modes`, :meth:`cosine` or :func:`parse_field`;
    the constructor checks ``c_0 = 0`` and ``c_{-n} = conj(c_n)``.
    """

    def __post_init__(self):
        if self.n_max < 1:
            raise InvalidArgumentError("n_max must be >= 1")
        c = np.asarray(self.coeffs, dtype=np.complex128)
        object.__setattr__(self, "coeffs", c)
        if c.shape != (2 * self.n_max + 1,):
            raise InvalidArgumentError("coefficient array has wrong length")
        self.check()

    def check(self):
        c = self.coeffs
        scale = max(float(np.abs(c).sum()), 1.0)
        if abs(c[self.n_max]) > 1e-14 * scale:
            raise InvariantError("field must have zero mean (c_0 = 0)")
        if np.max(np.abs(c - np.conj(c[::-1]))) > 1e-14 * scale:
            raise InvariantError("field is not real: c_{-n} != conj(c_n)")

    @classmethod
    def from_modes(cls, coefficients: dict, n_max: int | None = None) -> "TorusField":
        """Field from a full ``{n: c_n}`` map (both signs of ``n``)."""
        if n_max is None:
            n_max = max([1] + [abs(int(n)) for n in coefficients])
        return cls(_coefficient_array(coefficients, n_max), n_max)

    @classmethod
    def from_positive_modes(cls, coefficients: dict) -> "TorusField":
        """Field from ``{n: c_n}`` with ``n > 0``; negative modes by conjugation."""
        full = {}
        for n, value in coefficients.items():
            n = int(n)
            if n <= 0:
                raise InvalidArgumentError("only positive modes may be given")
            full[n] = complex(value)
            full[-n] = complex(value).conjugate()
        return cls.from_modes(full)

    @classmethod
    def cosine(cls, amplitude: float = 1.0) -> "TorusField":
        return cls.from_modes({1: amplitude / 2, -1: amplitude / 2})

    @classmethod
    def zero(cls) -> "TorusField":
        return cls(np.zeros(3, dtype=np.complex128), 1)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    @property
    def sup_bound(self) -> float:
        """``sum |c_n|``, an upper bound for ``max |F|``."""
        return float(np.abs(self.coeffs).sum())

    def scaled(self, factor: float) -> "TorusField":
        return TorusField(self.coeffs * factor, self.n_max)


def parse_field(spec: str) -> TorusField:
    """Parse ``cos``, ``sin``, ``zero``, ``A*cos`` or ``fourier:1=0.5,3=0.1-0.2j``.

    In the ``fourier:`` form only positive modes are listed.
    """
    text = spec.strip().lower().replace(" ", "")
    amplitude = 1.0
    m = re.fullmatch(r"([0-9.eE+-]+)\*(cos|sin)", text)
    if m:
        amplitude = float(m.group(1))
        text = m.group(2)
    if text == "cos":
        return TorusField.cosine(amplitude)
    if text == "sin":
        return TorusField.from_modes({1: -0.5j * amplitude, -1: 0.5j * amplitude})
    if text in ("zero", "0", "none"):
        return TorusField.zero()
    if text.startswith("fourier:"):
        coefficients = {}
        try:
            for item in text[len("fourier:"):].split(","):
                n, value = item.split("=")
                coefficients[int(n)] = complex(value)
        except ValueError as exc:
            raise InvalidArgumentError(f"bad fourier field spec {spec!r}") from exc
        return TorusField.from_positive_modes(coefficients)
    raise InvalidArgumentError(f"unknown field spec {spec!r}")


@dataclass(frozen=True)
class DiffusionSpec:
    sigma2: float = 1.0

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise InvalidArgumentError("sigma2 must be positive")

    def generator_symbol(self, modes) -> np.ndarray:
        return -0.5 * self.sigma2 * np.asarray(modes, dtype=np.float64) ** 2


@dataclass(frozen=True, eq=False)
class DisorderPath:
    """Brownian motion on the circle sampled at ``t_k = k * dt``, wrapped to ``[0, 2*pi)``."""

    dt: float
    values: np.ndarray
    seed: int
    sigma2: float = 1.0

    @property
    def duration(self) -> float:
        return self.dt * (len(self.values) - 1)

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.values))

    def increments(self) -> np.ndarray:
        """Steps unwrapped to ``[-pi, pi)``."""
        return np.mod(np.diff(self.values) + math.pi, TWO_PI) - math.pi


def n_steps(T: float, dt: float) -> int:
    return int(math.floor(T / dt + 1e-9))


def sample_brownian_path(T: float, dt: float, spec: DiffusionSpec = DiffusionSpec(),
                         seed: int = 0) -> DisorderPath:
    """Brownian path on the circle started at 0."""
    if not T > 0 or not dt > 0:
        raise InvalidArgumentError("T and dt must be positive")
    if dt > T * (1 + 1e-12):
        raise InvalidArgumentError("dt must not exceed T")
    n = n_steps(T, dt)
    rng = np.random.default_rng(seed)
    steps = rng.standard_normal(n) * math.sqrt(spec.sigma2 * dt)
    x = np.empty(n + 1)
    x[0] = 0.0
    np.cumsum(steps, out=x[1:])
    x = np.mod(x, TWO_PI)
    x[x >= TWO_PI] = 0.0
    return DisorderPath(dt=float(dt), values=x, seed=int(seed), sigma2=spec.sigma2)


def evaluate_field(field: TorusField, path) -> np.ndarray:
    """``F(X_t)`` along a path (or an array of angles)."""
    field.check()
    x = path.values if isinstance(path, DisorderPath) else np.asarray(path, dtype=np.float64)
    if field.is_zero:
        return np.zeros(x.shape)
    values = field(x)
    residue = float(np.max(np.abs(values.imag))) if values.size else 0.0
    if residue >= IMAG_TOL * field.sup_bound:
        raise InvariantError(f"imaginary residue {residue:.3e} in field evaluation")
    return values.real.copy()


def resolvent(field: ComplexTorusField, spec: DiffusionSpec, kappa: float) -> ComplexTorusField:
    """``(L + 2 i kappa)^{-1} F``, mode by mode."""
    if not kappa > 0:
        raise InvalidArgumentError("kappa must be positive")
    symbol = spec.generator_symbol(field.modes) + 2j * kappa
    return ComplexTorusField(field.coeffs / symbol, field.n_max)


def apply_shifted_generator(g: ComplexTorusField, spec: DiffusionSpec, kappa: float) -> ComplexTorusField:
    """``(L + 2 i kappa) g``; inverse of :func:`resolvent`."""
    symbol = spec.generator_symbol(g.modes) + 2j * kappa
    return ComplexTorusField(g.coeffs * symbol, g.n_max)


def lyapunov_tau(field: TorusField, spec: DiffusionSpec, E: float) -> float:
    """``(1/8E) * int |grad (L + 2i sqrt(E))^{-1} F|^2`` under normalized Haar measure."""
    if not E > 0:
        raise InvalidArgumentError("E must be positive")
    g = resolvent(field, spec, math.sqrt(E))
    n = g.modes.astype(np.float64)
    return float(np.sum(n * n * np.abs(g.coeffs) ** 2) / (8.0 * E))
