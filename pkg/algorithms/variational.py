"""
Variational ansatz quantities for the coherent-regime descent and the final approach.

The coherent ansatz D(alpha_0)|0> and the displaced-Fock ansatz D(alpha_n)|n> are
parametrized by real roots of alpha^3 + c alpha + beta = 0 with c = delta or
c = delta + 2n respectively.
"""
import math
from dataclasses import dataclass

import numpy as np

from .fock_core import StateVector, coherent_state, displaced_fock
from .model import final_detuning
from .spectral import EigenSystem

CUBIC_TOL = 1e-12


@dataclass(frozen=True)
class AnsatzResult:
    alpha: float
    residual: float
    coefficient: float


@dataclass(frozen=True)
class RegionCGeometry:
    n: int
    delta_star: float
    q_beta_min: float
    delta_approx: float


def _cubic(alpha: float, c: float, beta: float) -> float:
    return alpha ** 3 + c * alpha + beta


def _most_negative_root(c: float, q: float) -> float:
    """Most negative real root of t^3 + c t + q = 0 for q >= 0"""
    if q == 0.0:
        return -math.sqrt(-c) if c < 0 else 0.0
    if c == 0.0:
        return -q ** (1.0 / 3.0)
    if c > 0:
        s = math.sqrt(c / 3.0)
        return -2.0 * s * math.sinh(math.asinh(1.5 * q / (c * s)) / 3.0)
    s = math.sqrt(-c / 3.0)
    ratio = 1.5 * q / (-c * s)
    if ratio > 1.0:
        return -2.0 * s * math.cosh(math.acosh(ratio) / 3.0)
    # three real roots
    phi = math.acos(-ratio) / 3.0
    return min(2.0 * s * math.cos(phi - 2.0 * math.pi * k / 3.0) for k in range(3))


def solve_depressed_cubic(c: float, beta: float) -> AnsatzResult:
    """Adiabatic branch of alpha^3 + c alpha + beta = 0.

    For beta >= 0 this is the unique real root when c >= 0 and the most negative
    root otherwise; negative beta maps to the mirrored root.
    """
    c, beta = float(c), float(beta)
    sign = -1.0 if beta < 0 else 1.0
    q = abs(beta)
    alpha = _most_negative_root(c, q)
    for _ in range(4):
        slope = 3.0 * alpha * alpha + c
        if slope == 0.0:
            break
        step = _cubic(alpha, c, q) / slope
        if not math.isfinite(step) or step == 0.0:
            break
        alpha -= step
    alpha *= sign
    return AnsatzResult(alpha=alpha, residual=abs(_cubic(alpha, c, beta)), coefficient=c)


def coherent_alpha(delta: float, beta: float) -> AnsatzResult:
    return solve_depressed_cubic(delta, beta)


def displaced_alpha(n: int, delta: float, beta: float) -> AnsatzResult:
    if n < 0:
        raise ValueError(f"photon number must be non-negative, got {n}")
    return solve_depressed_cubic(delta + 2 * n, beta)


def region_b_beta(delta: float, delta_f: float) -> float:
    """Straight coherent-regime descent: beta = sqrt(-delta_f) (delta - delta_f)"""
    if delta_f >= 0:
        raise ValueError(f"final detuning must be negative, got {delta_f}")
    if delta < delta_f:
        raise ValueError(f"detuning {delta} lies below the final detuning {delta_f}")
    return math.sqrt(-delta_f) * (delta - delta_f)


def q_beta_analytic(n: int, delta_offset: float) -> float:
    """Leading-order vertical penalty at zero drive, offset delta from the interval midpoint"""
    if n < 1:
        raise ValueError(f"target photon number must be >= 1, got {n}")
    if abs(delta_offset) >= 0.5:
        raise ValueError(f"offset {delta_offset} reaches an adjacent crossing")
    return math.sqrt(n + 1) / (0.5 + delta_offset) ** 2 + math.sqrt(n) / (0.5 - delta_offset) ** 2


def approximate_offset(n: int) -> float:
    return 1.0 / (6.0 * (math.sqrt(n + 1) + math.sqrt(n)) ** 2)


def optimal_offset(n: int) -> RegionCGeometry:
    """Exact minimizer of q_beta_analytic: ((1/2 - d)/(1/2 + d))^3 = sqrt(n/(n+1))"""
    if n < 1:
        raise ValueError(f"target photon number must be >= 1, got {n}")
    r = (n / (n + 1.0)) ** (1.0 / 6.0)
    delta_star = (1.0 - r) / (2.0 * (1.0 + r))
    return RegionCGeometry(
        n=n,
        delta_star=delta_star,
        q_beta_min=q_beta_analytic(n, delta_star),
        delta_approx=approximate_offset(n),
    )


def final_interval_offset(delta: float, n: int) -> float:
    return delta - final_detuning(n)


def coherent_ansatz(delta: float, beta: float, dim: int) -> StateVector:
    return coherent_state(coherent_alpha(delta, beta).alpha, dim)


def displaced_ansatz(n: int, delta: float, beta: float, dim: int) -> StateVector:
    return displaced_fock(displaced_alpha(n, delta, beta).alpha, n, dim)


def ansatz_overlap(ansatz: StateVector, es: EigenSystem) -> float:
    """|<ansatz|phi_0>|^2"""
    return float(abs(np.vdot(ansatz.amplitudes, es.vectors[:, 0])) ** 2)
