"""Coefficient tensors representing linear path-dependent processes.

Three families are covered: linear Volterra equations with completely
monotone kernels given as finite Dirac (Laplace) mixtures, linear delay
equations with exponential-sum kernels, and Gaussian moving averages with a
smooth-kernel derivative oracle (exponential and power-law kernels
included).  Each family solves the same linear fixed point

    l = p + l (x) q,   l = p (x) resolvent(q),

with family-specific p and q; only the Gaussian branch is time dependent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import KernelDomainError
from .tensor import DominationWitness, TruncatedTensor, concat_mul, resolvent


# -- kernels ------------------------------------------------------------------


@dataclass(frozen=True)
class DiracMixture:
    """Finite atomic measure sum_i c_i delta_{x_i}; represents the completely
    monotone kernel K(t) = sum_i c_i exp(-x_i t)."""

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "atoms", tuple((float(c), float(x)) for c, x in self.atoms)
        )
        if any(x < 0 for _, x in self.atoms):
            raise ValueError("atom locations must be >= 0")

    @classmethod
    def point(cls, x: float, weight: float = 1.0) -> "DiracMixture":
        return cls(((weight, x),))

    def kernel_value(self, t) -> np.ndarray | float:
        t = np.asarray(t, dtype=float)
        out = sum(c * np.exp(-x * t) for c, x in self.atoms) if self.atoms else t * 0.0
        return out if out.ndim else float(out)

    __call__ = kernel_value

    def at_zero(self) -> float:
        return sum(c for c, _ in self.atoms)

    def moment(self, n: int) -> float:
        """Signed n-th moment integral x^n d mu."""
        return sum(c * x**n for c, x in self.atoms)

    def shifted(self, eps: float) -> "DiracMixture":
        """Mixture of the lag-shifted kernel K(t + eps): weights damp by e^{-x eps}."""
        return DiracMixture(tuple((c * math.exp(-x * eps), x) for c, x in self.atoms))


@dataclass(frozen=True)
class ExpSumKernel:
    """K(t) = sum_m c_m exp(alpha_m t)."""

    terms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "terms", tuple((float(c), float(a)) for c, a in self.terms)
        )

    def kernel_value(self, t) -> np.ndarray | float:
        t = np.asarray(t, dtype=float)
        out = sum(c * np.exp(a * t) for c, a in self.terms) if self.terms else t * 0.0
        return out if out.ndim else float(out)

    __call__ = kernel_value


@dataclass(frozen=True)
class SmoothKernel:
    """Kernel known through a derivative oracle n, t -> K^(n)(t) on (0, T]."""

    derivative: Callable[[int, float], float]
    tag: str | None = None

    def value(self, t: float) -> float:
        return self.derivative(0, t)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if t.ndim:
            return np.array([self.derivative(0, float(s)) for s in t])
        return self.derivative(0, float(t))


def constant_kernel(value: float = 1.0) -> SmoothKernel:
    return SmoothKernel(lambda n, t: value if n == 0 else 0.0, tag="constant")


def exponential_kernel(kappa: float) -> SmoothKernel:
    return SmoothKernel(
        lambda n, t: (-kappa) ** n * math.exp(-kappa * t), tag="exponential"
    )


def _signed_log(x: float) -> tuple[float, float]:
    if x == 0.0:
        return 0.0, -math.inf
    return math.copysign(1.0, x), math.log(abs(x))


def rising_factorial(x: float, n: int) -> float:
    """x (x+1) ... (x+n-1), accumulated in log space to avoid overflow."""
    sign, logmag = 1.0, 0.0
    for k in range(n):
        s, lm = _signed_log(x + k)
        if lm == -math.inf:
            return 0.0
        sign *= s
        logmag += lm
    return sign * math.exp(logmag)


def riemann_liouville_kernel(hurst: float) -> SmoothKernel:
    """Power-law kernel t^(H - 1/2) / Gamma(H + 1/2), H in (0, 1).

    Derivatives are K(t) (-t)^(-n) times the rising factorial of 1/2 - H,
    evaluated in log space.
    """
    if not 0.0 < hurst < 1.0:
        raise KernelDomainError(f"Hurst index must lie in (0, 1), got {hurst}")

    def deriv(n: int, t: float) -> float:
        if t <= 0.0:
            raise KernelDomainError(f"power-law kernel needs t > 0, got {t}")
        rf = rising_factorial(0.5 - hurst, n)
        if rf == 0.0:
            return 1.0 / math.gamma(hurst + 0.5) if n == 0 else 0.0
        sign = math.copysign(1.0, rf) * (-1.0) ** (n % 2)
        logmag = (
            (hurst - 0.5 - n) * math.log(t)
            - math.lgamma(hurst + 0.5)
            + math.log(abs(rf))
        )
        return sign * math.exp(logmag)

    return SmoothKernel(deriv, tag="riemann_liouville")


def shifted_kernel(base: SmoothKernel, eps: float) -> SmoothKernel:
    """Evaluate a kernel and its derivatives at lag t + eps."""
    return SmoothKernel(lambda n, t: base.derivative(n, t + eps), tag=base.tag)


# -- model parameters ---------------------------------------------------------


@dataclass(frozen=True)
class VolterraParams:
    """Linear Volterra equation driven by d-1 Brownian coordinates.

    Coordinate 0 is the drift (dt) channel; coordinates 1..d-1 multiply the
    Brownian components.  Each channel carries (a, b) and a Dirac-mixture
    kernel.
    """

    y: float
    a: tuple[float, ...]
    b: tuple[float, ...]
    mixtures: tuple[DiracMixture, ...]

    def __post_init__(self):
        if not len(self.a) == len(self.b) == len(self.mixtures):
            raise ValueError("a, b and mixtures must have one entry per channel")
        if len(self.a) < 2:
            raise ValueError("need at least the drift and one noise channel")

    @property
    def d(self) -> int:
        return len(self.a)

    @classmethod
    def scalar(cls, y, a1, b1, mu1: DiracMixture, a2, b2, mu2: DiracMixture) -> "VolterraParams":
        return cls(y, (a1, a2), (b1, b2), (mu1, mu2))


@dataclass(frozen=True)
class DelayParams:
    """Linear delay equation; channel layout matches VolterraParams."""

    z: float
    a: tuple[float, ...]
    b: tuple[float, ...]
    kernels: tuple[ExpSumKernel, ...]

    def __post_init__(self):
        if not len(self.a) == len(self.b) == len(self.kernels):
            raise ValueError("a, b and kernels must have one entry per channel")
        if len(self.a) < 2:
            raise ValueError("need at least the drift and one noise channel")

    @property
    def d(self) -> int:
        return len(self.a)

    @classmethod
    def scalar(cls, z, a1, b1, k1: ExpSumKernel, a2, b2, k2: ExpSumKernel) -> "DelayParams":
        return cls(z, (a1, a2), (b1, b2), (k1, k2))


# -- building blocks ----------------------------------------------------------


def laplace_exp_integral(mixture: DiracMixture, d: int, level_cap: int) -> TruncatedTensor:
    """Integral of the letter-1 shuffle exponential against the mixture:
    coefficient (-x)^n on the pure time word of length n, summed over atoms.
    Exact, no series truncation is involved."""
    out = TruncatedTensor.zeros(d, level_cap)
    for n in range(level_cap + 1):
        out.levels[n][0] = sum(c * (-x) ** n for c, x in mixture.atoms)
    return out


def _time_exp(d: int, level_cap: int, alpha: float) -> TruncatedTensor:
    """Shuffle exponential of alpha * letter1, built exactly as the geometric
    coefficients alpha^n on pure time words."""
    out = TruncatedTensor.zeros(d, level_cap)
    for n in range(level_cap + 1):
        out.levels[n][0] = alpha**n
    return out


def _letter(d: int, level_cap: int, i: int) -> TruncatedTensor:
    return TruncatedTensor.from_word(d, level_cap, (i,))


def volterra_pair(params: VolterraParams, level_cap: int) -> tuple[TruncatedTensor, TruncatedTensor]:
    """The affine part p and memory part q of the Volterra fixed point."""
    d = params.d
    unit = TruncatedTensor.unit(d, level_cap)
    p = params.y * unit
    q = TruncatedTensor.zeros(d, level_cap)
    one = _letter(d, level_cap, 1)
    for idx in range(d):
        i = idx + 1
        lap = laplace_exp_integral(params.mixtures[idx], d, level_cap)
        letter_term = concat_mul(_letter(d, level_cap, i), lap)
        p = p + params.a[idx] * letter_term
        q = q + params.b[idx] * letter_term
        if i >= 2:
            correction = concat_mul(one, lap) * (0.5 * params.b[idx] * params.mixtures[idx].at_zero())
            p = p - params.a[idx] * correction
            q = q - params.b[idx] * correction
    return p, q


def volterra_functional(params: VolterraParams, level_cap: int) -> TruncatedTensor:
    """Time-independent coefficients of the Volterra solution."""
    p, q = volterra_pair(params, level_cap)
    return concat_mul(p, resolvent(q))


def delay_pair(params: DelayParams, level_cap: int) -> tuple[TruncatedTensor, TruncatedTensor]:
    """The affine part p and memory part q of the delay fixed point."""
    d = params.d
    unit = TruncatedTensor.unit(d, level_cap)
    one = _letter(d, level_cap, 1)
    p = params.z * unit
    q = TruncatedTensor.zeros(d, level_cap)
    for idx in range(d):
        i = idx + 1
        letter = _letter(d, level_cap, i)
        p = p + params.a[idx] * letter
        q = q + params.b[idx] * letter
        # running convolution of the solution against the channel kernel
        conv = TruncatedTensor.zeros(d, level_cap)
        for c, alpha in params.kernels[idx].terms:
            conv = conv + c * concat_mul(one, _time_exp(d, level_cap, alpha))
        q = q + concat_mul(conv, letter)
        if i >= 2:
            p = p - (0.5 * params.a[idx] * params.b[idx]) * one
            q = q - (0.5 * params.b[idx] ** 2) * one
            q = q - concat_mul(conv * (0.5 * params.b[idx]), one)
    return p, q


def delay_functional(params: DelayParams, level_cap: int) -> TruncatedTensor:
    """Time-independent coefficients of the delay solution."""
    p, q = delay_pair(params, level_cap)
    return concat_mul(p, resolvent(q))


# -- time-dependent Gaussian branch -------------------------------------------


@dataclass(frozen=True)
class TimeVaryingFunctional:
    """Map t -> coefficient tensor, rebuilt from scratch at every time."""

    build: Callable[[float], TruncatedTensor]

    def at(self, t: float) -> TruncatedTensor:
        return self.build(t)


def gaussian_volterra_functional(kernel: SmoothKernel, t: float, level_cap: int) -> TruncatedTensor:
    """Coefficients (-1)^n K^(n)(t) on the words (time^n, noise); zero tensor
    for t <= 0."""
    out = TruncatedTensor.zeros(2, level_cap)
    if t <= 0.0:
        return out
    for n in range(level_cap):
        # word 1^n 2 has flat index 1 at level n+1
        out.levels[n + 1][1] = (-1.0) ** n * kernel.derivative(n, t)
    return out


def gaussian_volterra_time_functional(kernel: SmoothKernel, level_cap: int) -> TimeVaryingFunctional:
    return TimeVaryingFunctional(lambda t: gaussian_volterra_functional(kernel, t, level_cap))


def riemann_liouville_coeffs(hurst: float, eps: float, t: float, count: int) -> np.ndarray:
    """First ``count`` coefficients of the (shifted) power-law moving average
    on the words (time^n, noise):
    (t+eps)^(H-1/2-n) rising(1/2 - H, n) / Gamma(H + 1/2), n = 0..count-1."""
    if t + eps <= 0.0:
        raise KernelDomainError(f"need t + eps > 0, got {t + eps}")
    if not 0.0 < hurst < 1.0:
        raise KernelDomainError(f"Hurst index must lie in (0, 1), got {hurst}")
    out = np.zeros(count)
    u = t + eps
    log_u = math.log(u)
    log_gamma = math.lgamma(hurst + 0.5)
    for n in range(count):
        rf = rising_factorial(0.5 - hurst, n)
        if rf == 0.0:
            out[n] = math.exp((hurst - 0.5) * log_u - log_gamma) if n == 0 else 0.0
        else:
            out[n] = math.copysign(1.0, rf) * math.exp(
                (hurst - 0.5 - n) * log_u - log_gamma + math.log(abs(rf))
            )
    return out


def riemann_liouville_functional(
    hurst: float, eps: float, t: float, level_cap: int
) -> TruncatedTensor:
    """Coefficient tensor of the (shifted) Riemann-Liouville moving average."""
    coeffs = riemann_liouville_coeffs(hurst, eps, t, level_cap)
    out = TruncatedTensor.zeros(2, level_cap)
    for n in range(level_cap):
        out.levels[n + 1][1] = coeffs[n]
    return out


def riemann_liouville_time_functional(hurst: float, eps: float, level_cap: int) -> TimeVaryingFunctional:
    return TimeVaryingFunctional(
        lambda t: riemann_liouville_functional(hurst, eps, t, level_cap)
    )


def ou_time_functional(kappa: float, level_cap: int) -> TimeVaryingFunctional:
    """Time-dependent coefficients of the exponential moving average."""
    return gaussian_volterra_time_functional(exponential_kernel(kappa), level_cap)


# -- fractional kernel approximation ------------------------------------------


def fractional_dirac_mixture(hurst: float, n: int, ratio: float | None = None) -> DiracMixture:
    """Geometric n-atom mixture approximating the power-law kernel
    t^(H-1/2)/Gamma(H+1/2) for H in (0, 1/2).

    Weights and mean reversions follow the geometric partition
        c_k = (r^(1-alpha) - 1) r^((alpha-1)(1+n/2)) / (Gamma(alpha) Gamma(2-alpha)) * r^((1-alpha) k)
        x_k = (1-alpha)/(2-alpha) * (r^(2-alpha) - 1)/(r^(1-alpha) - 1) * r^(k-1-n/2)
    with alpha = H + 1/2.  The default ratio r = 1 + 10 n^(-0.9) decreases to
    one while n log r diverges, which is what the convergence argument needs.
    """
    if not 0.0 < hurst < 0.5:
        raise KernelDomainError(f"atom approximation needs H in (0, 1/2), got {hurst}")
    if n < 1:
        raise ValueError(f"need at least one atom, got {n}")
    r = 1.0 + 10.0 * n ** (-0.9) if ratio is None else float(ratio)
    if r <= 1.0:
        raise ValueError(f"ratio must exceed 1, got {r}")
    alpha = hurst + 0.5
    c_scale = (
        (r ** (1.0 - alpha) - 1.0)
        * r ** ((alpha - 1.0) * (1.0 + n / 2.0))
        / (math.gamma(alpha) * math.gamma(2.0 - alpha))
    )
    x_scale = (
        (1.0 - alpha)
        / (2.0 - alpha)
        * (r ** (2.0 - alpha) - 1.0)
        / (r ** (1.0 - alpha) - 1.0)
    )
    atoms = tuple(
        (c_scale * r ** ((1.0 - alpha) * k), x_scale * r ** (k - 1.0 - n / 2.0))
        for k in range(1, n + 1)
    )
    return DiracMixture(atoms)


# -- domination witnesses ------------------------------------------------------


def volterra_domination_witness(params: VolterraParams, level_cap: int) -> DominationWitness:
    """Left-sided witness: scale * (sum of letters) (x) exp_shuffle(Mc * time).

    The memory part has coefficient sums bounded by
    (sum_i |b_i| + 1/2 sum_j b_j^2 |K_j(0)|) * (summed absolute mixture
    moments), so any Mc with sum_i |moments_i(n)| <= Mc^n up to the level cap
    makes the witness dominate.  Mc is taken as the smallest such geometric
    bound over the retained levels; a mixture mass above one is absorbed into
    the letter scale.
    """
    abs_moments = [
        sum(sum(abs(c) * x**n for c, x in m.atoms) for m in params.mixtures)
        for n in range(level_cap + 1)
    ]
    mc = 1.0
    for n in range(1, level_cap + 1):
        if abs_moments[n] > 0:
            mc = max(mc, abs_moments[n] ** (1.0 / n))
    scale = sum(abs(b) for b in params.b) + 0.5 * sum(
        b**2 * abs(m.at_zero()) for b, m in zip(params.b[1:], params.mixtures[1:])
    )
    scale *= max(1.0, abs_moments[0])
    d = params.d
    return DominationWitness(
        tuple(scale for _ in range(d)), tuple([mc] + [0.0] * (d - 1)), side="left"
    )


def delay_domination_witness(params: DelayParams) -> DominationWitness:
    """Right-sided witness: exp_shuffle(alpha_bar * time) (x) Mc * (sum of letters).

    alpha_bar sums max(|alpha|, 1) over every kernel term; Mc collects the
    affine coefficients and the kernel weight sums, which bounds every
    memory-part coefficient by Mc * alpha_bar^k on the word time^k letter.
    """
    d = params.d
    alpha_bar = max(
        1.0,
        sum(max(abs(alpha), 1.0) for k in params.kernels for _, alpha in k.terms),
    )
    c_sums = [sum(abs(c) for c, _ in k.terms) for k in params.kernels]
    mc = abs(params.b[0] - 0.5 * sum(b**2 for b in params.b[1:]))
    mc += sum(abs(b) for b in params.b[1:])
    mc += sum(c_sums)
    mc += 0.5 * sum(abs(b) * cs for b, cs in zip(params.b[1:], c_sums[1:]))
    return DominationWitness(
        tuple(mc for _ in range(d)), tuple([alpha_bar] + [0.0] * (d - 1)), side="right"
    )


# -- config parsing ------------------------------------------------------------


def volterra_params_from_dict(cfg: dict) -> VolterraParams:
    mu1 = DiracMixture(tuple((c, x) for c, x in cfg.get("mu1", [[1.0, 0.0]])))
    mu2 = DiracMixture(tuple((c, x) for c, x in cfg.get("mu2", [[1.0, 0.0]])))
    return VolterraParams.scalar(
        cfg.get("y", 0.0), cfg.get("a1", 0.0), cfg.get("b1", 0.0), mu1,
        cfg.get("a2", 0.0), cfg.get("b2", 0.0), mu2,
    )


def delay_params_from_dict(cfg: dict) -> DelayParams:
    k1 = ExpSumKernel(tuple((c, a) for c, a in cfg.get("k1", [])))
    k2 = ExpSumKernel(tuple((c, a) for c, a in cfg.get("k2", [])))
    return DelayParams.scalar(
        cfg.get("z", 0.0), cfg.get("a1", 0.0), cfg.get("b1", 0.0), k1,
        cfg.get("a2", 0.0), cfg.get("b2", 0.0), k2,
    )
