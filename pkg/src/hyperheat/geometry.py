"""Rank-one space structure: root multiplicities and everything derived from them.

A rank-one noncompact symmetric space is described here by the two root
multiplicities (m_alpha, m_2alpha).  The radial coordinate r is geodesic
distance, the indivisible root is normalized so <alpha, H(r)> = r, and the
half-sum rho is the scalar (m_alpha + 2*m_2alpha)/2.  With that convention
the volume density in Cartan coordinates is

    J(r) = (2 sinh r)^m_alpha * (2 sinh 2r)^m_2alpha  ~  c * e^{2 rho r},

carrying no leading surface-area constant; all measure constants are folded
into the single inversion constant fixed by transform.calibrate.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class RankOneSpace:
    """Root data of a rank-one space plus derived structural constants."""

    m_alpha: int
    m_2alpha: int
    rho: float = field(init=False)
    dim_n: int = field(init=False)
    dim_nu: int = field(init=False)

    def __post_init__(self):
        if self.m_alpha < 1 or int(self.m_alpha) != self.m_alpha:
            raise ValueError(f"m_alpha must be a positive integer, got {self.m_alpha}")
        if self.m_2alpha < 0 or int(self.m_2alpha) != self.m_2alpha:
            raise ValueError(f"m_2alpha must be a non-negative integer, got {self.m_2alpha}")
        object.__setattr__(self, "rho", (self.m_alpha + 2 * self.m_2alpha) / 2.0)
        object.__setattr__(self, "dim_n", 1 + self.m_alpha + self.m_2alpha)
        # rank 1, one indivisible positive root: nu = 1 + 2*1
        object.__setattr__(self, "dim_nu", 3)

    @property
    def hyp_c(self) -> float:
        """Third hypergeometric parameter of the radial eigenfunctions, n/2."""
        return (self.m_alpha + self.m_2alpha + 1) / 2.0

    def __str__(self):
        return f"RankOneSpace(m_alpha={self.m_alpha}, m_2alpha={self.m_2alpha}, rho={self.rho})"


# Named presets accepted by the CLI.  Hn:k etc. are handled by parse_space.
PRESETS = {
    "H2": (1, 0),
    "H3": (2, 0),
    "CH2": (2, 1),
}

_FAMILY = re.compile(r"^(H|CH|HH)n:(\d+)$")


def parse_space(name: str) -> RankOneSpace:
    """Resolve a preset name like 'H3', 'Hn:4', 'CHn:3' or 'HHn:2'."""
    name = name.strip()
    if name in PRESETS:
        return RankOneSpace(*PRESETS[name])
    m = _FAMILY.match(name)
    if m is None:
        raise ValueError(f"unknown space preset {name!r}")
    family, k = m.group(1), int(m.group(2))
    if family == "H":
        if k < 2:
            raise ValueError("Hn:k needs k >= 2")
        return RankOneSpace(k - 1, 0)
    if family == "CH":
        if k < 2:
            raise ValueError("CHn:k needs k >= 2")
        return RankOneSpace(2 * k - 2, 1)
    if k < 2:
        raise ValueError("HHn:k needs k >= 2")
    return RankOneSpace(4 * k - 4, 3)


@dataclass(frozen=True)
class LebesgueExponent:
    """An exponent p in [1, inf] with its derived quantities.

    gamma_p = 2/p - 1 locates the spectral point i*gamma_p*rho at which the
    limiting constant of the convolution theorems is read off.
    """

    p: float
    gamma_p: float = field(init=False)
    p_conj: float = field(init=False)

    def __post_init__(self):
        if not (self.p >= 1.0):
            raise ValueError(f"p must be in [1, inf], got {self.p}")
        if math.isinf(self.p):
            gamma, conj = -1.0, 1.0
        elif self.p == 1.0:
            gamma, conj = 1.0, math.inf
        else:
            gamma = 2.0 / self.p - 1.0
            conj = self.p / (self.p - 1.0)
        object.__setattr__(self, "gamma_p", gamma)
        object.__setattr__(self, "p_conj", conj)

    @property
    def is_inf(self) -> bool:
        return math.isinf(self.p)


def density(space: RankOneSpace, r):
    """Cartan-coordinate volume density J(r) = (2 sinh r)^m_a (2 sinh 2r)^m_2a.

    Vanishes like r^(m_a + m_2a) at 0 and grows like e^{2 rho r}.
    Accepts scalars or arrays; r must be >= 0.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("density: r must be non-negative")
    out = (2.0 * np.sinh(r)) ** space.m_alpha
    if space.m_2alpha:
        out = out * (2.0 * np.sinh(2.0 * r)) ** space.m_2alpha
    return out if out.ndim else float(out)


def log_density(space: RankOneSpace, r):
    """log J(r), returning -inf at r = 0.  Safe for very large r."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("log_density: r must be non-negative")
    with np.errstate(divide="ignore"):
        # log(2 sinh x) = x + log1p(-exp(-2x)) stays finite where sinh overflows
        out = space.m_alpha * (r + np.log1p(-np.exp(-2.0 * r)))
        if space.m_2alpha:
            out = out + space.m_2alpha * (2.0 * r + np.log1p(-np.exp(-4.0 * r)))
    return out if out.ndim else float(out)


def concentration_region(space: RankOneSpace, p: LebesgueExponent, t: float,
                         radius_fn_exponent: float = 0.75):
    """Interval where the L^p mass of the heat kernel piles up, p in (1,2).

    Ball of radius t^e about the drifting center 2*t*gamma_p*rho, intersected
    with [0, inf).  The exponent must sit in (1/2, 1) so the radius outruns
    sqrt(t) but is beaten by t.
    """
    if not (1.0 < p.p < 2.0):
        raise ValueError(f"concentration region needs p in (1,2), got p={p.p}")
    if not (0.5 < radius_fn_exponent < 1.0):
        raise ValueError(
            f"radius_fn_exponent must lie in (1/2, 1), got {radius_fn_exponent}")
    if not t > 0:
        raise ValueError("t must be positive")
    center = 2.0 * t * p.gamma_p * space.rho
    radius = t ** radius_fn_exponent
    return (max(0.0, center - radius), center + radius)
