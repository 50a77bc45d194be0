"""Independent reference implementations used as test oracles."""
import itertools

import mpmath as mp
import numpy as np

from hyperdiscovery.features import Log, MooneyRivlin, Volumetric


def mp_features(F, library):
    """Feature values in arbitrary precision, straight from the definitions."""
    f11, f12, f21, f22 = F
    J = f11 * f22 - f12 * f21
    C11 = f11 * f11 + f21 * f21
    C22 = f12 * f12 + f22 * f22
    C12 = f11 * f12 + f21 * f22
    I1 = C11 + C22 + 1
    I2 = C11 * C22 - C12 * C12 + C11 + C22
    I1b = mp.power(J, mp.mpf(-2) / 3) * I1
    I2b = mp.power(J, mp.mpf(-4) / 3) * I2
    out = []
    for f in library:
        if isinstance(f, MooneyRivlin):
            out.append((I1b - 3) ** f.i * (I2b - 3) ** (f.j - f.i))
        elif isinstance(f, Volumetric):
            out.append((J - 1) ** (2 * f.k))
        elif isinstance(f, Log):
            out.append(mp.log(I2b / 3))
    return out


def mp_central_differences(F, library, h=1e-10, dps=40):
    """Central differences of every feature w.r.t. ``(F11, F12, F21, F22)``; shape ``(n_f, 4)``."""
    with mp.workdps(dps):
        base = [mp.mpf(float(v)) for v in np.asarray(F, dtype=float).ravel()]
        hh = mp.mpf(h)
        D = np.empty((len(library), 4))
        for c in range(4):
            up, dn = list(base), list(base)
            up[c] += hh
            dn[c] -= hh
            fu, fd = mp_features(up, library), mp_features(dn, library)
            for k in range(len(library)):
                D[k, c] = float((fu[k] - fd[k]) / (2 * hh))
    return D


def random_deformation_gradients(rng, n, jmin=0.5, jmax=2.0, spread=0.3):
    """Random plane-strain ``F`` with ``det F`` uniform in ``[jmin, jmax]``."""
    out = []
    while len(out) < n:
        F = np.eye(2) + spread * rng.normal(size=(2, 2))
        det = np.linalg.det(F)
        if det <= 0.05:
            continue
        target = rng.uniform(jmin, jmax)
        out.append(F * np.sqrt(target / det))
    return np.array(out)


def best_subset(X, y, k):
    """Brute-force best ``k``-subset least squares; returns ``(support, coef)``."""
    best = (np.inf, None, None)
    for S in itertools.combinations(range(X.shape[1]), k):
        cols = list(S)
        coef, *_ = np.linalg.lstsq(X[:, cols], y, rcond=None)
        r = y - X[:, cols] @ coef
        err = float(r @ r)
        if err < best[0]:
            best = (err, S, coef)
    return best[1], best[2]
