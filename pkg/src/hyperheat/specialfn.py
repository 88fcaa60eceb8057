"""Complex special functions for rank-one spherical analysis.

Everything here reduces to two primitives: the complex Gamma function
(Lanczos approximation plus reflection) and the Gauss hypergeometric
function on the negative real axis.  On top of those sit

  * c_function        -- the Gamma-quotient c-function, normalized c(-i rho)=1
  * plancherel_density -- |c(lambda)|^-2 on the real axis, 0 at the origin
  * spherical_function -- phi_lambda(r) through its hypergeometric form
  * conn_coeff / second_kind_values -- the two-term split of phi at large r,
    phi = cc(lam) Psi_lam + cc(-lam) Psi_{-lam}, which the transform layer
    uses both to evaluate phi far out and to push inversion contours off the
    real axis.

2F1 branch selection: with z <= 0 and w = z/(z-1) in [0,1), the Pfaff-
transformed series converges for all r but is used only while w <= 0.8;
beyond that the 1/z connection formula takes over (|1/z| < 1/4 there), with
a Richardson average in the parameters when b - a sits within 1e-4 of an
integer and the two connection terms would cancel.
"""

from __future__ import annotations

import numpy as np

from .geometry import LebesgueExponent, RankOneSpace

# Lanczos, g = 7, 9 terms.  Relative error ~1e-13 on the half-plane
# Re z > 0.5, which the reflection formula extends everywhere we evaluate.
_LANCZOS_G = 7.0
_LANCZOS_P = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])

_PFAFF_SWITCH = 0.8   # w = tanh^2 r above this uses the 1/z connection split
# Richardson bias grows like (eps * log|z|)^4 while roundoff amplification is
# eps_machine / eps, so eps sits near the geometric compromise for |z|<=e^800
_DEGENERATE_TOL = 1e-4
_RICHARDSON_EPS = 6e-5


def _is_nonpos_int(z, tol=1e-12):
    z = complex(z)
    return abs(z.imag) <= tol and z.real <= tol and abs(z.real - round(z.real)) <= tol


def complex_gamma(z):
    """Gamma(z) for complex scalar or array argument.

    Raises on exact non-positive integers (poles).  Accuracy ~1e-13
    relative for |z| <= 50.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    pole = (np.abs(z.imag) == 0) & (z.real <= 0) & (z.real == np.round(z.real))
    if np.any(pole):
        raise ValueError("complex_gamma: pole at non-positive integer argument")

    out = np.empty(z.shape, dtype=complex)
    refl = z.real < 0.5
    zz = np.where(refl, 1.0 - z, z)

    # core Lanczos on Re >= 0.5
    x = zz - 1.0
    acc = np.full(zz.shape, _LANCZOS_P[0], dtype=complex)
    for i in range(1, len(_LANCZOS_P)):
        acc = acc + _LANCZOS_P[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    core = np.sqrt(2.0 * np.pi) * t ** (x + 0.5) * np.exp(-t) * acc

    out[~refl] = core[~refl]
    if np.any(refl):
        zr = z[refl]
        out[refl] = np.pi / (np.sin(np.pi * zr) * core[refl])
    return out[0] if scalar else out


def reciprocal_gamma(z):
    """1/Gamma(z), returning exactly 0 at the poles of Gamma."""
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    pole = (np.abs(z.imag) == 0) & (z.real <= 0) & (z.real == np.round(z.real))
    out = np.zeros(z.shape, dtype=complex)
    if np.any(~pole):
        out[~pole] = 1.0 / complex_gamma(z[~pole])
    return out[0] if scalar else out


# ----------------------------------------------------------------------
# Gauss 2F1 on z <= 0
# ----------------------------------------------------------------------

def _pfaff_series(a, b, c, z, rtol, kmax):
    """(1-z)^{-a} 2F1(a, c-b; c; z/(z-1)) by direct summation; z <= 0 array."""
    w = z / (z - 1.0)
    A, B = complex(a), complex(c - b)
    term = np.ones_like(w, dtype=complex)
    total = np.ones_like(w, dtype=complex)
    small = 0
    for k in range(kmax):
        term = term * ((A + k) * (B + k) / ((c + k) * (k + 1.0))) * w
        total += term
        # absolute floor: entries where the sum cancels to ~0 cannot be
        # resolved beyond roundoff of the largest partial sums anyway
        floor = np.maximum(np.abs(total), 1e-3 * np.max(np.abs(total)) + 1e-300)
        if np.all(np.abs(term) <= rtol * floor):
            small += 1
            if small >= 2:
                break
        else:
            small = 0
    else:
        raise ArithmeticError("2F1 Pfaff series did not converge")
    return np.exp(-a * np.log1p(-z)) * total


def _power_series(A, B, C, u, rtol, kmax):
    """2F1(A, B; C; u) by plain summation, |u| < 1 array."""
    term = np.ones_like(u, dtype=complex)
    total = np.ones_like(u, dtype=complex)
    small = 0
    for k in range(kmax):
        term = term * ((A + k) * (B + k) / ((C + k) * (k + 1.0))) * u
        total += term
        floor = np.maximum(np.abs(total), 1e-3 * np.max(np.abs(total)) + 1e-300)
        if np.all(np.abs(term) <= rtol * floor):
            small += 1
            if small >= 2:
                break
        else:
            small = 0
    else:
        raise ArithmeticError("2F1 connection series did not converge")
    return total


def _connection(a, b, c, z, rtol, kmax):
    """Two-term z -> infinity formula; caller guarantees b-a away from Z."""
    u = 1.0 / z
    gc = complex_gamma(c)
    coef_a = gc * complex_gamma(b - a) * reciprocal_gamma(b) * reciprocal_gamma(c - a)
    coef_b = gc * complex_gamma(a - b) * reciprocal_gamma(a) * reciprocal_gamma(c - b)
    fa = _power_series(a, a - c + 1.0, a - b + 1.0, u, rtol, kmax)
    fb = _power_series(b, b - c + 1.0, b - a + 1.0, u, rtol, kmax)
    lz = np.log(-z)
    return coef_a * np.exp(-a * lz) * fa + coef_b * np.exp(-b * lz) * fb


def hyp2f1_neg_axis(a, b, c, z, rtol=1e-13):
    """2F1(a, b; c; z) for complex parameters and real z <= 0.

    Scalar or array z.  Raises on c a non-positive integer, on positive z,
    and on series non-convergence.
    """
    if _is_nonpos_int(c):
        raise ValueError("hyp2f1_neg_axis: c must not be a non-positive integer")
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    z = np.atleast_1d(z).astype(float)
    if np.any(z > 0):
        raise ValueError("hyp2f1_neg_axis: requires z <= 0")
    a, b = complex(a), complex(b)
    out = np.empty(z.shape, dtype=complex)

    if a == 0 or b == 0:
        out[:] = 1.0
        return out[0] if scalar else out

    w = z / (z - 1.0)
    near = (w <= _PFAFF_SWITCH) | _is_nonpos_int(a) | _is_nonpos_int(b)
    if np.any(near):
        out[near] = _pfaff_series(a, b, c, z[near], rtol, kmax=900)
    far = ~near
    if np.any(far):
        zf = z[far]
        d = b - a
        dist = abs(d - round(d.real))
        if dist >= _DEGENERATE_TOL:
            out[far] = _connection(a, b, c, zf, rtol, kmax=300)
        else:
            # parameters a hair from a degenerate pair: Richardson average
            # of the analytic continuation in b kills the eps^2 bias
            e = _RICHARDSON_EPS
            f1 = 0.5 * (_connection(a, b + e, c, zf, rtol, 300)
                        + _connection(a, b - e, c, zf, rtol, 300))
            f2 = 0.5 * (_connection(a, b + 2 * e, c, zf, rtol, 300)
                        + _connection(a, b - 2 * e, c, zf, rtol, 300))
            out[far] = (4.0 * f1 - f2) / 3.0
    return out[0] if scalar else out


# ----------------------------------------------------------------------
# c-function and Plancherel density
# ----------------------------------------------------------------------

def _v_const(space):
    rho, ma, m2a = space.rho, space.m_alpha, space.m_2alpha
    v = complex_gamma(rho + ma / 2.0) / complex_gamma(rho)
    v *= complex_gamma(rho / 2.0 + ma / 4.0 + m2a / 2.0) / complex_gamma(rho / 2.0 + ma / 4.0)
    return v.real


def c_function(space: RankOneSpace, lam):
    """Harish-Chandra c(lambda), single rank-one Gamma-quotient factor.

    Normalized so c(-i rho) = 1.  Pole at lambda = 0; Gamma poles propagate
    as errors.  lam may be a complex scalar or array.
    """
    lam = np.asarray(lam, dtype=complex)
    scalar = lam.ndim == 0
    lam = np.atleast_1d(lam)
    ma, m2a = space.m_alpha, space.m_2alpha
    il = 1j * lam
    num = complex_gamma(il) * complex_gamma(il / 2.0 + ma / 4.0)
    den = complex_gamma(il + ma / 2.0) * complex_gamma(il / 2.0 + ma / 4.0 + m2a / 2.0)
    out = _v_const(space) * num / den
    return out[0] if scalar else out


def plancherel_density(space: RankOneSpace, lam):
    """|c(lambda)|^-2 for real lambda; continuous extension 0 at the origin."""
    lam = np.asarray(lam, dtype=float)
    scalar = lam.ndim == 0
    lam = np.atleast_1d(lam)
    out = np.zeros(lam.shape, dtype=float)
    nz = lam != 0.0
    if np.any(nz):
        c = c_function(space, lam[nz].astype(complex))
        out[nz] = 1.0 / np.abs(c) ** 2
    return float(out[0]) if scalar else out


# ----------------------------------------------------------------------
# spherical functions phi_lambda and their large-r split
# ----------------------------------------------------------------------

def conn_coeff(space: RankOneSpace, lam):
    """Coefficient cc(lambda) of the e^{(i lam - rho) r} mode of phi.

    phi_lam(r) = cc(lam) Psi_lam(r) + cc(-lam) Psi_{-lam}(r) for r beyond the
    Pfaff switch.  Proportional to c_function up to a lambda-independent
    constant and a factor of modulus 1 on the real axis.
    """
    lam = np.asarray(lam, dtype=complex)
    rho, ch = space.rho, space.hyp_c
    il = 1j * lam
    return (complex_gamma(ch) * complex_gamma(il)
            * reciprocal_gamma((rho + il) / 2.0)
            * reciprocal_gamma(ch - (rho - il) / 2.0))


def second_kind_values(space: RankOneSpace, lam, r, rtol=1e-13):
    """Psi_lam(r) = (sinh r)^{i lam - rho} 2F1(b, b-c+1; 1-i lam; -csch^2 r).

    Valid for w = tanh^2 r > 0.55 or so; the series runs in 1/z.  lam is a
    complex scalar, r a scalar or array with tanh^2 r > 0.5.
    """
    lam = complex(lam)
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(np.tanh(r) ** 2 <= 0.5):
        raise ValueError("second_kind_values: r too small for the 1/z series")
    rho, ch = space.rho, space.hyp_c
    b = (rho - 1j * lam) / 2.0
    u = -1.0 / np.sinh(r) ** 2
    s = _power_series(b, b - ch + 1.0, 1.0 - 1j * lam, u, rtol, kmax=300)
    lsh = np.log(np.sinh(r))
    return np.exp((1j * lam - rho) * lsh) * s


def second_kind_norm_const(space: RankOneSpace, probe=1.37):
    """kappa0^2 with c(l)c(-l) = kappa0^2 cc(l)cc(-l); constant in lambda."""
    l = complex(probe)
    num = c_function(space, l) * c_function(space, -l)
    den = conn_coeff(space, l) * conn_coeff(space, -l)
    return float((num / den).real)


def _phi_far_block(space, lams, r_far, rtol, kmax=80):
    """phi on the connection side: rows lams (complex array), cols r_far."""
    rho, ch = space.rho, space.hyp_c
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    u = (-1.0 / np.sinh(r_far) ** 2)
    lsh = np.log(np.sinh(r_far))
    real_rows = np.all(lams.imag == 0)

    def one_sided(lv):
        b = (rho - 1j * lv) / 2.0
        # series coefficients, recurrence down the columns
        K = kmax
        coef = np.empty((K, lv.size), dtype=complex)
        coef[0] = 1.0
        ks = np.arange(K - 1, dtype=float)
        num1 = b[None, :] + ks[:, None]
        num2 = (b - ch + 1.0)[None, :] + ks[:, None]
        den1 = (1.0 - 1j * lv)[None, :] + ks[:, None]
        den2 = ks[:, None] + 1.0
        ratios = num1 * num2 / (den1 * den2)
        np.cumprod(ratios, axis=0, out=ratios)
        coef[1:] = ratios
        powers = u[None, :] ** np.arange(K)[:, None]
        series = coef.T @ powers
        pref = np.exp(np.outer(1j * lv - rho, lsh))
        return (conn_coeff(space, lv)[:, None] * pref) * series

    tp = one_sided(lams)
    if real_rows:
        phi = 2.0 * tp.real
    else:
        phi = tp + one_sided(-lams)
    return phi


def _phi_near_block(space, lams, r_near, rtol, kmax):
    """phi by the Pfaff series: rows lams (complex array), cols r_near."""
    rho, ch = space.rho, space.hyp_c
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    z = -np.sinh(r_near) ** 2
    w = z / (z - 1.0)
    a = (rho + 1j * lams) / 2.0
    cb = ch - (rho - 1j * lams) / 2.0  # c - b
    K = kmax
    coef = np.empty((K, lams.size), dtype=complex)
    coef[0] = 1.0
    ks = np.arange(K - 1, dtype=float)
    ratios = ((a[None, :] + ks[:, None]) * (cb[None, :] + ks[:, None])
              / ((ch + ks[:, None]) * (ks[:, None] + 1.0)))
    np.cumprod(ratios, axis=0, out=ratios)
    coef[1:] = ratios
    powers = w[None, :] ** np.arange(K)[:, None]
    series = coef.T @ powers
    pref = np.exp(-np.outer(a, np.log1p(-z)))
    return pref * series


def _near_kmax(space, w_max):
    # tail of sum k^(rho-1) w^k below 1e-17
    if w_max <= 0:
        return 2
    k = int(np.log(1e-17) / np.log(max(w_max, 0.05))) + 1
    return min(900, max(24, int(1.6 * k) + 12 * int(space.rho + 1)))


def phi_rows(space: RankOneSpace, lams, r, rtol=1e-13):
    """Matrix phi_{lam_i}(r_j); lams complex or real array, r real array.

    Rows whose parameter separation b-a = -i lam falls within 1e-4 of an
    integer are filled by a Richardson average over neighbouring rows.
    Output is float64 when all lams are real, complex128 otherwise.
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    r = np.atleast_1d(np.asarray(r, dtype=float))
    real_in = np.all(lams.imag == 0)

    d = -1j * lams
    dist = np.abs(d - np.round(d.real))
    degen = dist < _DEGENERATE_TOL
    # phi_{+-i rho} == 1 exactly: hypergeometric parameter a or b vanishes
    unit = degen & (np.abs(np.abs(lams.imag) - space.rho) < 1e-12) & (np.abs(lams.real) < 1e-12)
    need_fix = degen & ~unit

    out = np.empty((lams.size, r.size), dtype=complex)
    ok = ~degen
    if np.any(ok):
        out[ok] = _phi_rows_regular(space, lams[ok], r, rtol)
    if np.any(unit):
        out[unit] = 1.0
    if np.any(need_fix):
        e = 5e-5
        for i in np.nonzero(need_fix)[0]:
            l0 = lams[i]
            quad = np.array([l0 + e, l0 - e, l0 + 2 * e, l0 - 2 * e])
            rows = _phi_rows_regular(space, quad, r, rtol)
            f1 = 0.5 * (rows[0] + rows[1])
            f2 = 0.5 * (rows[2] + rows[3])
            out[i] = (4.0 * f1 - f2) / 3.0
    if real_in:
        return np.ascontiguousarray(out.real)
    return out


def _phi_rows_regular(space, lams, r, rtol):
    z = -np.sinh(r) ** 2
    w = z / (z - 1.0)
    near = w <= _PFAFF_SWITCH
    out = np.empty((lams.size, r.size), dtype=complex)
    if np.any(near):
        kmax = _near_kmax(space, float(np.max(w[near], initial=0.0)))
        out[:, near] = _phi_near_block(space, lams, r[near], rtol, kmax)
    if np.any(~near):
        out[:, ~near] = _phi_far_block(space, lams, r[~near], rtol)
    return out


def spherical_function(space: RankOneSpace, lam, r):
    """phi_lambda(r): joint radial eigenfunction normalized to 1 at r = 0.

    lam complex scalar (formulas are exact everywhere; the bound |phi| <= 1
    holds on the strip |Im lam| <= rho), r scalar or array >= 0.
    """
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r_arr < 0):
        raise ValueError("spherical_function: r must be non-negative")
    row = phi_rows(space, np.array([complex(lam)]), r_arr)[0]
    if np.isscalar(r) or np.asarray(r).ndim == 0:
        return complex(row[0]) if np.iscomplexobj(row) else float(row[0])
    return row


def spherical_estimate_check(space: RankOneSpace, p: LebesgueExponent,
                             r_max: float, n: int = 1200):
    """min/max of phi_{-i gamma_p rho}(r) over the standard envelope.

    Envelope (1+r) e^{-2 rho r / p'} for p < 2 and (1+r) e^{-rho r} at p = 2.
    For p = 2 both ends of the bracket are meaningful; for p < 2 only the
    upper end is asserted by callers.
    """
    if not (1.0 <= p.p <= 2.0):
        raise ValueError("spherical_estimate_check: p must be in [1, 2]")
    if r_max < 10:
        raise ValueError("spherical_estimate_check: r_max must be >= 10")
    r = np.linspace(0.0, r_max, n)
    lam = -1j * p.gamma_p * space.rho
    vals = phi_rows(space, np.array([lam]), r)[0].real
    if p.p == 2.0:
        env = (1.0 + r) * np.exp(-space.rho * r)
    else:
        env = (1.0 + r) * np.exp(-2.0 * space.rho * r / p.p_conj)
    ratio = vals / env
    return float(np.min(ratio)), float(np.max(ratio))
