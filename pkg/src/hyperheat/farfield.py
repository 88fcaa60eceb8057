"""Stabilized evaluation of inverse transforms deep in the radial tail.

Direct quadrature of  int F(lam) phi_lam(r) |c|^-2 dlam  loses the answer to
oscillatory cancellation once e^{r^2/4t} outruns double precision.  The cure
used here: fold the half-line integral onto the full line through the
two-mode split of phi, keep only the outgoing mode

    I(r) = kappa0^-2  int_R  F(lam) Psi_lam(r) / cc(-lam)  dlam ,

and push the contour to Im lam = sigma(r) = (log sinh r - R)/(2 t_g), which
turns the oscillation into the explicit factor e^{t_g sigma^2 - (sigma+rho) L}
and leaves a smooth Gauss-Hermite-ready integrand.  Multipliers are stored
with their Gaussian part split off symbolically (gauss_time), so nothing
exponentially large is ever formed: F = e^{-t_g (lam^2+rho^2)} * rest(lam).

Everything is assembled in log space; radii whose prefactor has underflowed
come back as exact zeros.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .geometry import RankOneSpace, log_density
from .specialfn import conn_coeff, second_kind_norm_const

_BIN_WIDTH = 4.0           # width of log-sinh bins sharing one contour height
_SERIES_KMAX = 60
_LOG_DEAD = -745.0         # below this the double value is an honest zero


@dataclass
class SpectralMultiplier:
    """A spectral multiplier with its Gaussian factor carried symbolically.

    The multiplier's value at lam is  exp(-gauss_time*(lam^2+rho^2)) * fn(lam).
    `support_radius` bounds the residual oscillation frequency of fn on a
    horizontal contour (compactly supported sources contribute e^{i lam R}).
    """

    fn: Callable[[np.ndarray], np.ndarray]
    gauss_time: float
    support_radius: float
    label: str = ""

    def sample(self, space: RankOneSpace, lam) -> np.ndarray:
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        vals = np.asarray(self.fn(lam), dtype=complex)
        if self.gauss_time:
            vals = vals * np.exp(-self.gauss_time * (lam ** 2 + space.rho ** 2))
        return vals

    def rest_at(self, lam) -> np.ndarray:
        return np.asarray(self.fn(np.atleast_1d(np.asarray(lam, complex))), dtype=complex)

    def times(self, other: "SpectralMultiplier") -> "SpectralMultiplier":
        f1, f2 = self.fn, other.fn
        return SpectralMultiplier(
            fn=lambda lam: np.asarray(f1(lam), complex) * np.asarray(f2(lam), complex),
            gauss_time=self.gauss_time + other.gauss_time,
            support_radius=self.support_radius + other.support_radius,
            label=f"{self.label}*{other.label}")

    __mul__ = times


def heat_multiplier(space: RankOneSpace, t: float, alpha: float = 1.0) -> SpectralMultiplier:
    """exp(-t (lam^2+rho^2)^alpha).  Only alpha = 1 carries a Gaussian split;
    fractional multipliers are handled by subordination, not by contours."""
    if not t > 0:
        raise ValueError("heat multiplier needs t > 0")
    if alpha == 1.0:
        return SpectralMultiplier(fn=lambda lam: np.ones(np.shape(lam), complex),
                                  gauss_time=float(t), support_radius=0.0,
                                  label=f"heat({t})")
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1]")
    rho2 = space.rho ** 2

    def fn(lam):
        lam = np.asarray(lam, dtype=complex)
        return np.exp(-t * (lam ** 2 + rho2) ** alpha)

    return SpectralMultiplier(fn=fn, gauss_time=0.0, support_radius=0.0,
                              label=f"fracheat({t},{alpha})")


def constant_multiplier(space: RankOneSpace, value: complex,
                        gauss_time: float = 0.0) -> SpectralMultiplier:
    """The constant `value`, optionally wearing a Gaussian of time gauss_time
    so it can share a contour with a heat factor."""
    rho2 = space.rho ** 2

    def fn(lam):
        lam = np.asarray(lam, dtype=complex)
        if gauss_time:
            return value * np.exp(gauss_time * (lam ** 2 + rho2))
        return np.full(lam.shape, value, dtype=complex)

    return SpectralMultiplier(fn=fn, gauss_time=gauss_time, support_radius=0.0,
                              label=f"const({value})")


Terms = Sequence[Tuple[complex, SpectralMultiplier]]


def sample_terms(space: RankOneSpace, terms: Terms, lam) -> np.ndarray:
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    out = np.zeros(lam.shape, dtype=complex)
    for coef, mult in terms:
        out += coef * mult.sample(space, lam)
    return out


def switch_radius(gauss_time: float) -> float:
    """Radius beyond which direct Simpson inversion is cancellation-limited."""
    return max(2.0, 8.0 * math.sqrt(max(gauss_time, 1e-12)))


def _pick_n_gh(q: float) -> int:
    """Smallest node count whose Hermite tail beats e^-46 at frequency ratio q."""
    q = max(q, 0.3)
    for n in (64, 96, 160, 256, 384):
        if 2 * n * math.log(q) - math.lgamma(2 * n + 1) < -46.0:
            return n
    raise ArithmeticError(f"far-field oscillation q={q:.1f} too fast for "
                          "Gauss-Hermite synthesis")


_GH_CACHE: dict = {}


def _gh_nodes(n: int):
    if n not in _GH_CACHE:
        _GH_CACHE[n] = np.polynomial.hermite.hermgauss(n)
    return _GH_CACHE[n]


def _sk_coeffs(space: RankOneSpace, lams: np.ndarray, kmax: int) -> np.ndarray:
    """Series coefficients of the outgoing mode, shape (kmax, n_lam)."""
    rho, ch = space.rho, space.hyp_c
    b = (rho - 1j * lams) / 2.0
    coef = np.empty((kmax, lams.size), dtype=complex)
    coef[0] = 1.0
    if kmax > 1:
        ks = np.arange(kmax - 1, dtype=float)[:, None]
        ratios = ((b[None, :] + ks) * ((b - ch + 1.0)[None, :] + ks)
                  / (((1.0 - 1j * lams)[None, :] + ks) * (ks + 1.0)))
        np.cumprod(ratios, axis=0, out=ratios)
        coef[1:] = ratios
    return coef


def contour_log_values(space: RankOneSpace, mult: SpectralMultiplier,
                       r: np.ndarray, constant: float,
                       j_weighted: bool = False) -> Tuple[np.ndarray, np.ndarray]:
    """log|v| and signed mantissa of constant * int F phi dens at nodes r.

    All nodes must satisfy tanh^2 r > 0.8.  Returns (log_abs, sign) with
    v = sign * exp(log_abs); dead radii give (-inf, 0).  j_weighted folds
    J(r) into the value (needed where v alone underflows but v*J does not).
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(np.tanh(r) ** 2 <= 0.8):
        raise ValueError("contour_log_values: all radii must lie beyond the "
                         "Pfaff switch")
    tg = mult.gauss_time
    if not tg > 0:
        raise ValueError("contour synthesis needs a positive Gaussian time")
    rho = space.rho
    R = mult.support_radius
    kap_inv = 1.0 / second_kind_norm_const(space)
    base = math.log(abs(constant) * kap_inv)

    # log sinh r without overflow
    L = r + np.log1p(-np.exp(-2.0 * r)) - math.log(2.0)
    logJ = log_density(space, r) if j_weighted else np.zeros_like(r)

    # frequency budget: bin offset + source extent + Gamma phase drift
    n_gh = _pick_n_gh((0.5 * _BIN_WIDTH + R + 4.0) / (2.0 * math.sqrt(tg)) + 0.5)
    y, wgh = _gh_nodes(n_gh)
    xs = y / math.sqrt(tg)

    log_abs = np.full(r.shape, -np.inf)
    sign = np.zeros(r.shape)

    order = np.argsort(L)
    L_sorted = L[order]
    lo = 0
    while lo < r.size:
        hi = lo
        while hi < r.size and L_sorted[hi] <= L_sorted[lo] + _BIN_WIDTH:
            hi += 1
        sel = order[lo:hi]
        Lc = 0.5 * (L_sorted[lo] + L_sorted[hi - 1])
        sigma = max(0.0, (Lc - R) / (2.0 * tg))
        lam_line = xs + 1j * sigma

        rest = mult.rest_at(lam_line)
        cc = conn_coeff(space, -lam_line)
        gh_fac = (wgh / math.sqrt(tg)) * rest / cc

        rb = r[sel]
        Lb = L[sel]
        u = -1.0 / np.sinh(rb) ** 2
        umax = float(np.max(np.abs(u)))
        kmax = 2 if umax < 1e-18 else min(_SERIES_KMAX, max(2, int(-42.0 / math.log(umax)) + 3))
        series = _sk_coeffs(space, lam_line, kmax).T  # (n_gh, kmax)
        upow = u[None, :] ** np.arange(kmax)[:, None]  # (kmax, n_bin)
        smat = series @ upow                            # (n_gh, n_bin)
        phase = np.exp(1j * np.outer(xs, Lb - 2.0 * tg * sigma))
        integral = gh_fac @ (phase * smat)              # (n_bin,)

        logpref = base + tg * (sigma ** 2 - rho ** 2) - (sigma + rho) * Lb + logJ[sel]
        mag = np.abs(integral.real)
        ok = mag > 0
        la = np.where(ok, logpref + np.log(np.where(ok, mag, 1.0)), -np.inf)
        la = np.where(la < _LOG_DEAD, -np.inf, la)
        log_abs[sel] = la
        sign[sel] = np.where(np.isfinite(la), np.sign(integral.real) * np.sign(constant), 0.0)
        lo = hi
    return log_abs, sign


def contour_values(space: RankOneSpace, mult: SpectralMultiplier, r: np.ndarray,
                   constant: float, j_weighted: bool = False) -> np.ndarray:
    log_abs, sign = contour_log_values(space, mult, r, constant, j_weighted)
    out = np.zeros_like(np.atleast_1d(np.asarray(r, float)))
    finite = np.isfinite(log_abs)
    out[finite] = sign[finite] * np.exp(log_abs[finite])
    return out


def far_zone_fill(ctx, mult_or_terms, constant: float, vals: np.ndarray,
                  r_switch: Optional[float] = None) -> np.ndarray:
    """Replace direct-inversion values beyond the stable zone.

    `mult_or_terms` is a SpectralMultiplier or a sequence of (coef, mult)
    pairs, each synthesized on its own contour (so a difference like
    f*h_t - zeta h_t carries no cross-term oscillation).  Terms without a
    Gaussian part are rejected: they have no stable contour here.
    """
    terms = _as_terms(mult_or_terms)
    tg_min = min(m.gauss_time for _, m in terms)
    if not tg_min > 0:
        raise ValueError("far_zone_fill: every term needs gauss_time > 0")
    rsw = switch_radius(tg_min) if r_switch is None else r_switch
    far = ctx.r > rsw
    if not np.any(far):
        return vals
    out = np.array(vals, dtype=float, copy=True)
    acc = np.zeros(int(np.sum(far)))
    for coef, m in terms:
        c = complex(coef)
        if c.imag != 0.0:
            raise ValueError("far_zone_fill: coefficients must be real")
        acc += contour_values(ctx.space, m, ctx.r[far], c.real * constant)
    out[far] = acc
    return out


def _as_terms(mult_or_terms) -> Terms:
    if isinstance(mult_or_terms, SpectralMultiplier):
        return [(1.0, mult_or_terms)]
    return list(mult_or_terms)


def synthesize_profile(ctx, mult_or_terms, cal, require_real: bool = True):
    """Sampled inverse transform of a multiplier: direct zone by quadrature
    on the cached kernel, tails by contour synthesis.  Returns a values
    array on ctx's radial grid."""
    terms = _as_terms(mult_or_terms)
    F = sample_terms(ctx.space, terms, ctx.lam)
    vals = ctx.inverse_direct(F, cal.inversion_constant)
    scale = float(np.max(np.abs(vals.real))) or 1.0
    if require_real and float(np.max(np.abs(vals.imag))) > 1e-6 * scale:
        raise ArithmeticError("synthesize_profile: multiplier is not real-even")
    vals = vals.real.copy()
    if all(m.gauss_time > 0 for _, m in terms):
        vals = far_zone_fill(ctx, terms, cal.inversion_constant, vals)
    return vals
