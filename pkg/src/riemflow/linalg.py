"""Matrix functions of symmetric matrices via eigendecomposition."""
import numpy as np

from .errors import NumericalError


def symmetrize(a):
    return 0.5 * (a + a.T)


def sym_eig(a):
    """Eigen-decomposition of the symmetric part of ``a``.

    Raises NumericalError if LAPACK fails to converge.
    """
    try:
        w, q = np.linalg.eigh(symmetrize(a))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    return w, q


def sym_funm(a, func):
    """Apply a scalar function to the eigenvalues of a symmetric matrix."""
    w, q = sym_eig(a)
    return (q * func(w)) @ q.T


def _positive_eigs(a):
    w, q = sym_eig(a)
    if w[0] <= 0:
        raise NumericalError(f"matrix is not positive definite (min eigenvalue {w[0]:.3e})")
    return w, q


def expm(a):
    return sym_funm(a, np.exp)


def logm(a):
    w, q = _positive_eigs(a)
    return (q * np.log(w)) @ q.T


def sqrtm(a):
    w, q = _positive_eigs(a)
    return (q * np.sqrt(w)) @ q.T


def sqrtm_and_invsqrtm(a):
    """Return ``(a^{1/2}, a^{-1/2})`` from a single decomposition."""
    w, q = _positive_eigs(a)
    s = np.sqrt(w)
    return (q * s) @ q.T, (q / s) @ q.T


def relative_asymmetry(a):
    norm = np.linalg.norm(a)
    if norm == 0.0:
        return 0.0
    return float(np.linalg.norm(a - a.T) / norm)
