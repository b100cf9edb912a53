"""Lattice Gaussian (Siegel theta) sums and realistic code-state Wigner values.

theta(Gamma, z) = sum_{t in Z^m} exp(i pi t.Gamma t + 2 pi i t.z), Im Gamma > 0.

The sums that arise here can have natural magnitude exp(+-50) and beyond at
small envelope width, so every internal routine carries an explicit log-scale:
the returned pair (value, log_scale) means value * exp(log_scale), where value
is O(1). Truncation boxes are centered on the maximizer of the summand's
magnitude, which sits at t = -Im(Gamma)^{-1} Im(z) / 1, not at the origin.

Two independent evaluation paths for the finite-squeezing code Wigner function
live here: a factorized route (two coupled 2-dimensional theta sums per basis
pair, fast enough for grids) and a literal 4-variable lattice oracle used to
validate it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


class NotPositiveDefinite(ValueError):
    """Im(Gamma) must be symmetric positive definite."""


class TruncationOverflow(RuntimeError):
    """The requested tolerance needs a lattice box beyond the hard caps."""


MAX_RADIUS = 220
MAX_TERMS = 6_000_000


# ---- core lattice sums --------------------------------------------------------


def _check_gamma(gamma: np.ndarray) -> np.ndarray:
    gamma = np.asarray(gamma, dtype=complex)
    if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1]:
        raise ValueError(f"Gamma must be square, got shape {gamma.shape}")
    if np.max(np.abs(gamma - gamma.T)) > 1e-12 * max(1.0, np.max(np.abs(gamma))):
        raise ValueError("Gamma must be symmetric")
    m = gamma.imag
    evals = np.linalg.eigvalsh(m)
    if evals[0] <= 0:
        raise NotPositiveDefinite(
            f"Im(Gamma) has minimum eigenvalue {evals[0]:.3e}, need > 0"
        )
    return gamma


def siegel_theta_batch(gamma, z0, offsets, tol: float = 1e-14):
    """Evaluate theta(Gamma, z0 + x_k) for a batch of real offsets x_k.

    Returns (values, log_scale, radius): theta_k = values[k] * exp(log_scale).
    All offsets must be real; the imaginary part of the argument is shared,
    which is what makes one truncation box serve the whole batch.
    """
    gamma = _check_gamma(gamma)
    m = gamma.shape[0]
    z0 = np.asarray(z0, dtype=complex).reshape(m)
    offsets = np.asarray(offsets, dtype=float)
    if offsets.ndim == 1:
        offsets = offsets[:, None] if m == 1 else offsets[None, :]
    if offsets.shape[-1] != m:
        raise ValueError(f"offsets must have last dimension {m}")
    flat_off = offsets.reshape(-1, m)

    im = gamma.imag
    w = z0.imag
    evals, _ = np.linalg.eigh(im)
    lam_min = float(evals[0])
    mu = -np.linalg.solve(im, w)  # magnitude maximizer
    log_scale = math.pi * float(w @ np.linalg.solve(im, w))

    radius = int(math.ceil(math.sqrt(math.log(1.0 / tol) / (math.pi * lam_min)))) + 2
    if radius > MAX_RADIUS:
        raise TruncationOverflow(
            f"needed per-axis radius {radius} exceeds cap {MAX_RADIUS}"
        )
    if (2 * radius + 1) ** m > MAX_TERMS:
        raise TruncationOverflow(
            f"lattice box of {(2 * radius + 1) ** m} points exceeds cap {MAX_TERMS}"
        )

    center = np.round(mu).astype(int)
    axes = [np.arange(c - radius, c + radius + 1) for c in center]
    grid = np.meshgrid(*axes, indexing="ij")
    t = np.stack([g.ravel() for g in grid], axis=-1).astype(float)

    # exponent relative to the scale: real part is <= 0 by construction
    quad = np.einsum("ti,ij,tj->t", t, gamma, t)
    expo = 1j * math.pi * quad + TWO_PI * 1j * (t @ z0) - log_scale
    keep = expo.real > math.log(tol) - 2.0
    t = t[keep]
    q = np.exp(expo[keep])

    phases = np.exp(TWO_PI * 1j * (t @ flat_off.T))
    vals = q @ phases
    return vals.reshape(offsets.shape[:-1]), log_scale, radius


def siegel_theta(gamma, z, tol: float = 1e-14):
    """theta(Gamma, z) as (value, radius). Raises on overflow instead of inf."""
    gamma = _check_gamma(gamma)
    m = gamma.shape[0]
    z = np.asarray(z, dtype=complex).reshape(m)
    vals, log_scale, radius = siegel_theta_batch(
        gamma, 1j * z.imag, z.real[None, :], tol=tol
    )
    if log_scale > 700.0:
        raise TruncationOverflow(
            f"theta magnitude exp({log_scale:.1f}) overflows a float; "
            "use siegel_theta_batch for the scaled value"
        )
    return complex(vals.reshape(-1)[0] * math.exp(log_scale)), radius


def sublattice_theta_batch(gamma, z0, offsets, parity, tol: float = 1e-14):
    """Sum over t congruent to parity mod 2 of the theta summand, batched.

    Identity: sum_{t = p mod 2} = exp(i pi p.Gamma p + 2 pi i p.z) *
    theta(4 Gamma, 2(Gamma p + z)). The k-dependent part of the prefactor
    exp(2 pi i p.x_k) is folded into the returned values; the k-independent
    magnitude goes into log_scale. Returns (values, log_scale, radius).
    """
    gamma = _check_gamma(gamma)
    m = gamma.shape[0]
    z0 = np.asarray(z0, dtype=complex).reshape(m)
    p = np.asarray(parity, dtype=float).reshape(m)
    offsets = np.asarray(offsets, dtype=float)
    if offsets.shape[-1] != m:
        raise ValueError(f"offsets must have last dimension {m}")

    pref_exp = 1j * math.pi * (p @ gamma @ p) + TWO_PI * 1j * (p @ z0)
    inner_vals, inner_log, radius = siegel_theta_batch(
        4.0 * gamma, 2.0 * (gamma @ p + z0), 2.0 * offsets, tol=tol
    )
    log_scale = inner_log + pref_exp.real
    phase = np.exp(1j * pref_exp.imag)
    kphase = np.exp(TWO_PI * 1j * (offsets @ p))
    return phase * kphase * inner_vals, log_scale, radius


# ---- realistic code states ----------------------------------------------------


@dataclass(frozen=True)
class CodeState:
    """A finite-envelope code state: sum_j eps[j] |j_Delta> on one mode.

    The position wavefunction is
    psi(x) = sum_j eps[j] sum_k exp(-Delta^2 (j+dk)^2 ell^2 / 2)
             * exp(-(x - (j+dk) ell)^2 / (2 Delta^2)).
    """

    d: int
    delta: float
    eps: tuple

    def __post_init__(self):
        if self.d < 3 or self.d % 2 == 0:
            raise ValueError(f"d must be odd and >= 3, got {self.d}")
        if not (0 < self.delta < 2.0):
            raise ValueError(f"delta must lie in (0, 2), got {self.delta}")
        eps = tuple(complex(e) for e in self.eps)
        if len(eps) != self.d:
            raise ValueError(f"need {self.d} coefficients, got {len(eps)}")
        if max(abs(e) for e in eps) == 0:
            raise ValueError("state coefficients are all zero")
        object.__setattr__(self, "eps", eps)

    @classmethod
    def logical(cls, d: int, j: int, delta: float) -> "CodeState":
        eps = [0.0] * d
        eps[j % d] = 1.0
        return cls(d, delta, tuple(eps))

    @classmethod
    def phase_state(cls, d: int, delta: float) -> "CodeState":
        """Equal-weight superposition with a flipped last coefficient."""
        eps = [1.0 / math.sqrt(d)] * d
        eps[d - 1] *= -1.0
        return cls(d, delta, tuple(eps))

    @property
    def ell(self) -> float:
        return math.sqrt(TWO_PI / self.d)


def wavefunction(state: CodeState, x, tol: float = 1e-16) -> np.ndarray:
    """Position wavefunction values (unnormalized, complex)."""
    x = np.asarray(x, dtype=float)
    d, delta, ell = state.d, state.delta, state.ell
    kmax = _k_range(d, delta, ell, tol)
    psi = np.zeros(x.shape, dtype=complex)
    for j in range(d):
        if state.eps[j] == 0:
            continue
        for k in range(-kmax, kmax + 1):
            mu = (j + d * k) * ell
            psi += (
                state.eps[j]
                * math.exp(-0.5 * delta ** 2 * mu ** 2)
                * np.exp(-((x - mu) ** 2) / (2.0 * delta ** 2))
            )
    return psi


def code_state_norm(state: CodeState, tol: float = 1e-16) -> float:
    """<psi|psi> by direct Gaussian-overlap summation over the peak lattice."""
    d, delta, ell = state.d, state.delta, state.ell
    kmax = _k_range(d, delta, ell, tol)
    k = np.arange(-kmax, kmax + 1)
    total = 0.0
    for j in range(d):
        for jp in range(d):
            cjj = state.eps[j] * np.conjugate(state.eps[jp])
            if cjj == 0:
                continue
            mu = (j + d * k)[:, None] * ell
            mup = (jp + d * k)[None, :] * ell
            expo = (
                -0.5 * delta ** 2 * (mu ** 2 + mup ** 2)
                - (mu - mup) ** 2 / (4.0 * delta ** 2)
            )
            total += (cjj * math.sqrt(math.pi) * delta * np.exp(expo).sum()).real
    assert total > 0.0, "state norm must be positive"
    return total


def _k_range(d, delta, ell, tol):
    # envelope exp(-Delta^2 mu^2 / 2) negligible beyond |mu| = sqrt(2 L) / Delta
    reach = math.sqrt(2.0 * math.log(1.0 / tol)) / (delta * ell)
    return int(math.ceil((reach + d) / d)) + 1


# -- factorized evaluation: per basis pair, two 2-D sub-lattice theta sums --


def _pair_blocks(state: CodeState, j: int, jp: int):
    d, dl = state.d, state.delta
    dd = dl * dl
    dsum = j + jp
    diff = j - jp
    gamma_a = np.array(
        [
            [1j / (2 * d * dd), -1j / (2 * dd)],
            [-1j / (2 * dd), 1j * d * (1.0 / dd + dd) / 2.0],
        ]
    )
    za0 = np.array(
        [-1j * diff / (2 * d * dd), 1j * diff * (1.0 / dd + dd) / 2.0]
    )
    gamma_b = np.array(
        [
            [1j * dd / (2 * d), 0.5],
            [0.5, 1j * d * dd / 2.0],
        ]
    )
    zb0 = np.array([dsum / (2.0 * d) + 0j, 1j * dd * dsum / 2.0])
    log_c = (
        -math.pi * diff ** 2 / (2 * d * dd)
        - math.pi * dd * (diff ** 2 + dsum ** 2) / (2 * d)
    )
    return gamma_a, za0, gamma_b, zb0, log_c


def _wigner_theta_axes(state: CodeState, eta_x: np.ndarray, eta_z: np.ndarray,
                       tol: float, combine_outer: bool):
    """Shared engine: A-blocks depend on eta_z only, B-blocks on eta_x only.

    combine_outer=True returns the full (len(eta_x), len(eta_z)) grid;
    otherwise the two axes are paired elementwise (equal lengths required).
    """
    d, ell = state.d, state.ell
    dl_ell = d * ell
    off_a = np.stack([eta_z / dl_ell, np.zeros_like(eta_z)], axis=-1)
    off_b = np.stack([-eta_x / dl_ell, np.zeros_like(eta_x)], axis=-1)

    if combine_outer:
        out = np.zeros((len(eta_x), len(eta_z)), dtype=complex)
    else:
        assert len(eta_x) == len(eta_z)
        out = np.zeros(len(eta_x), dtype=complex)

    for j in range(d):
        for jp in range(d):
            coeff = np.conjugate(state.eps[j]) * state.eps[jp]
            if coeff == 0:
                continue
            gamma_a, za0, gamma_b, zb0, log_c = _pair_blocks(state, j, jp)
            a_vals = {}
            a_logs = {}
            b_vals = {}
            b_logs = {}
            for p1 in (0, 1):
                for sg in (0, 1):
                    a_vals[p1, sg], a_logs[p1, sg], _ = sublattice_theta_batch(
                        gamma_a, za0, off_a, (p1, sg), tol=tol
                    )
                    b_vals[p1, sg], b_logs[p1, sg], _ = sublattice_theta_batch(
                        gamma_b, zb0, off_b, (p1, sg), tol=tol
                    )
            acc = out * 0.0
            for sg in (0, 1):
                for p1 in (0, 1):
                    for p2 in (0, 1):
                        sign = -1.0 if (p1 * p2) % 2 else 1.0
                        log_total = log_c + a_logs[p1, sg] + b_logs[p2, sg]
                        if log_total > 600.0:
                            raise TruncationOverflow(
                                f"block scale exp({log_total:.0f}) out of range"
                            )
                        scale = math.exp(log_total)
                        if scale == 0.0:
                            continue
                        if combine_outer:
                            acc += (sign * scale) * np.outer(
                                b_vals[p2, sg], a_vals[p1, sg]
                            )
                        else:
                            acc += (sign * scale) * b_vals[p2, sg] * a_vals[p1, sg]
            out += coeff * acc
    pref = math.sqrt(math.pi) * state.delta / TWO_PI
    res = pref * out
    max_abs = float(np.max(np.abs(res))) if res.size else 0.0
    if max_abs > 0 and float(np.max(np.abs(res.imag))) > 1e-8 * max_abs:
        raise ValueError(
            f"Wigner values have imaginary residue {np.max(np.abs(res.imag)):.2e}"
        )
    return res.real


def wigner_theta(state: CodeState, eta, tol: float = 1e-14) -> np.ndarray:
    """Unnormalized Wigner values at points eta with shape (..., 2).

    Divide by code_state_norm(state) for the unit-norm state; the result then
    integrates to d over one (d ell)^2 cell.
    """
    eta = np.asarray(eta, dtype=float)
    if eta.shape[-1] != 2:
        raise ValueError(f"eta must have last dimension 2, got {eta.shape}")
    flat = eta.reshape(-1, 2)
    vals = _wigner_theta_axes(
        state, flat[:, 0], flat[:, 1], tol=tol, combine_outer=False
    )
    return vals.reshape(eta.shape[:-1])


def wigner_theta_grid(state: CodeState, eta_x, eta_z, tol: float = 1e-14) -> np.ndarray:
    """Unnormalized Wigner values on the tensor grid eta_x (x) eta_z.

    Shape (len(eta_x), len(eta_z)). Far cheaper than scattering the full grid
    because each theta block depends on only one of the two axes.
    """
    eta_x = np.asarray(eta_x, dtype=float).ravel()
    eta_z = np.asarray(eta_z, dtype=float).ravel()
    return _wigner_theta_axes(state, eta_x, eta_z, tol=tol, combine_outer=True)


# -- literal 4-variable lattice oracle --


def wigner_oracle(state: CodeState, eta, tol: float = 1e-18) -> np.ndarray:
    """Independent direct-sum evaluation of the same unnormalized Wigner values.

    Enumerates displacement exponents and peak indices literally; slow but
    with no shared code at all with the factorized route above.
    """
    d, delta, ell = state.d, state.delta, state.ell
    eta = np.asarray(eta, dtype=float)
    flat = eta.reshape(-1, 2)
    log_tol = math.log(1.0 / tol)

    kmax = _k_range(d, delta, ell, tol)
    ax_max = 2 * d * kmax + 2 * d + int(math.ceil(2.0 * delta * math.sqrt(log_tol) / ell)) + 2
    az_max = int(math.ceil(2.0 * math.sqrt(log_tol) / (ell * delta))) + 2
    ax = np.arange(-ax_max, ax_max + 1)
    az = np.arange(-az_max, az_max + 1)

    # eta-independent inner sum G(a_X, a_Z) over basis pairs and peaks
    g = np.zeros((ax.size, az.size), dtype=complex)
    k = np.arange(-kmax, kmax + 1)
    az_gauss = np.exp(-(ell * delta * az) ** 2 / 4.0)
    for j in range(d):
        for jp in range(d):
            coeff = state.eps[j] * np.conjugate(state.eps[jp])
            if coeff == 0:
                continue
            mu = (j + d * k) * ell  # unconjugated factor's peaks
            mup = (jp + d * k) * ell
            env = np.exp(-0.5 * delta ** 2 * mu ** 2)
            envp = np.exp(-0.5 * delta ** 2 * mup ** 2)
            # cross square couples a_X with mu - mu'
            diffs = mu[:, None] - mup[None, :]  # (k, k')
            sums = mu[:, None] + mup[None, :]
            weight = env[:, None] * envp[None, :]
            for ia, a in enumerate(ax):
                cross = np.exp(-((diffs + ell * a) ** 2) / (4.0 * delta ** 2))
                w2 = weight * cross
                mask = w2 > tol
                if not mask.any():
                    continue
                phase = np.exp(
                    0.5j * (ell * az)[None, :] * (sums[mask][:, None] - ell * a)
                )
                g[ia, :] += coeff * (w2[mask][:, None] * phase).sum(axis=0)
    g *= math.sqrt(math.pi) * delta * az_gauss[None, :]

    # boundary audit: the box must have died out at its edges
    edge = max(
        float(np.max(np.abs(g[0, :]))),
        float(np.max(np.abs(g[-1, :]))),
        float(np.max(np.abs(g[:, 0]))),
        float(np.max(np.abs(g[:, -1]))),
    )
    scale = float(np.max(np.abs(g)))
    if scale > 0 and edge > 1e-12 * scale:
        raise TruncationOverflow(
            f"oracle lattice box is too small: edge magnitude {edge:.2e} "
            f"against peak {scale:.2e}"
        )

    # fold in the displacement phase conventions, then attach eta phases
    half = np.exp(1j * math.pi * np.outer(ax, az) * (1.0 + 1.0 / d))
    m_full = g * half
    vals = _attach_eta_phases(m_full, ax, az, flat, ell)
    if np.max(np.abs(vals)) > 0 and np.max(np.abs(vals.imag)) > 1e-8 * np.max(np.abs(vals)):
        raise ValueError("oracle Wigner values failed to be real")
    return vals.real.reshape(eta.shape[:-1])


def _attach_eta_phases(m_full, ax, az, flat, ell, chunk: int = 2048):
    """(1/2pi) sum_ab m[a,b] e^{i ell (a etaZ - b etaX)} over point rows."""
    vals = np.empty(flat.shape[0], dtype=complex)
    for lo in range(0, flat.shape[0], chunk):
        part = flat[lo: lo + chunk]
        phase_x = np.exp(1j * ell * np.outer(part[:, 1], ax))
        phase_z = np.exp(-1j * ell * np.outer(part[:, 0], az))
        vals[lo: lo + chunk] = ((phase_x @ m_full) * phase_z).sum(axis=1)
    return vals / TWO_PI


def gaussian_wigner(d: int, eta, width: float = 1.0, tol: float = 1e-16) -> np.ndarray:
    """Wigner values of a centered Gaussian of the given width, unit norm.

    Integrates to d over one cell, matching the code-state convention.
    """
    if d < 3 or d % 2 == 0:
        raise ValueError(f"d must be odd and >= 3, got {d}")
    ell = math.sqrt(TWO_PI / d)
    eta = np.asarray(eta, dtype=float)
    flat = eta.reshape(-1, 2)
    log_tol = math.log(1.0 / tol)
    ax_max = int(math.ceil(2.0 * width * math.sqrt(log_tol) / ell)) + 2
    az_max = int(math.ceil(2.0 * math.sqrt(log_tol) / (ell * width))) + 2
    ax = np.arange(-ax_max, ax_max + 1)
    az = np.arange(-az_max, az_max + 1)
    mag = np.exp(
        -((ell * ax[:, None]) ** 2) / (4.0 * width ** 2)
        - (ell * width * az[None, :]) ** 2 / 4.0
    )
    signs = np.where((ax[:, None] * az[None, :]) % 2, -1.0, 1.0)
    m_full = (mag * signs).astype(complex)
    vals = _attach_eta_phases(m_full, ax, az, flat, ell)
    return vals.real.reshape(eta.shape[:-1])
