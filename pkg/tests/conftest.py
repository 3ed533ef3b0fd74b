"""Shared numerical oracles for the test suite.

Every oracle here is independent of the code path it checks: classical
Gram-Schmidt for spans, projector spectra for principal angles, and
finite-difference schemes along explicitly constructed geodesics for the
directional derivatives.
"""

import numpy as np

from lpsubspace import energy as en


def gram_schmidt(cols):
    """Classical Gram-Schmidt, columns in, orthonormal columns out."""
    out = []
    for c in np.asarray(cols, dtype=float).T:
        v = c.copy()
        for u in out:
            v = v - (u @ v) * u
        out.append(v / np.linalg.norm(v))
    return np.column_stack(out)


def angles_from_projectors(F, G):
    """Principal angles via the spectrum of P_F - P_G (eigenvalues +-sin)."""
    diff = F.projector() - G.projector()
    ev = np.linalg.eigvalsh(diff)
    pos = np.sort(ev[ev > 1e-12])[::-1]
    return np.arcsin(np.clip(pos, 0.0, 1.0))


def exact_energy(pts, L, p):
    return float(np.sum(en.distances_to_subspace(pts, L) ** p))


def fd_derivative_t(pts, L1, spec, p, h=1e-6, one_sided=False):
    """Finite-difference derivative of the lp energy in t at t = 0.

    one_sided uses the second-order forward scheme (needed when the energy
    has a kink across t = 0, as for p = 1 with points on L1); otherwise the
    plain central difference.
    """
    if one_sided:
        e0 = exact_energy(pts, L1, p)
        e1 = exact_energy(pts, en.direction_subspace(L1, spec, h), p)
        e2 = exact_energy(pts, en.direction_subspace(L1, spec, 2 * h), p)
        return (-3 * e0 + 4 * e1 - e2) / (2 * h)
    em = exact_energy(pts, en.direction_subspace(L1, spec, -h), p)
    ep = exact_energy(pts, en.direction_subspace(L1, spec, h), p)
    return (ep - em) / (2 * h)


def fd_derivative_tp(pts, L1, spec, p, h=1e-6):
    """Finite-difference derivative in t^p at t = 0 (p < 1).

    Two-step Richardson in h removes the O(h^(1-p)) contribution of the
    off-subspace points.
    """
    e0 = exact_energy(pts, L1, p)
    d1 = (exact_energy(pts, en.direction_subspace(L1, spec, h), p) - e0) / h**p
    d2 = (exact_energy(pts, en.direction_subspace(L1, spec, 2 * h), p) - e0) / (
        2 * h
    ) ** p
    r = 2.0 ** (1 - p)
    return (r * d1 - d2) / (r - 1)


def haar_uhat_batch(m, k, n, rng):
    """n Haar-ish (k, m) matrices with orthonormal rows, batched QR."""
    g = rng.standard_normal((n, m, k))
    q, r = np.linalg.qr(g)
    diag = r[:, np.arange(k), np.arange(k)]
    q = q * np.where(diag < 0, -1.0, 1.0)[:, None, :]
    return np.swapaxes(q, 1, 2)
