"""Independent reference implementations used by the tests."""

import numpy as np
import scipy.sparse
import scipy.sparse.linalg


def dft_derivative_matrix(P, L):
    """Spectral d/dx on P periodic points of [-L, L) as an explicit matrix.

    Built from the DFT matrix rather than an FFT, with the Nyquist
    wavenumber zeroed to match the library's convention.
    """
    idx = np.arange(P)
    F = np.exp(-2j * np.pi * np.outer(idx, idx) / P)
    k = np.fft.fftfreq(P, d=1.0 / P)
    ik = 1j * np.pi * k / L
    ik[P // 2] = 0.0
    return np.linalg.inv(F) @ np.diag(ik) @ F


def dense_dbar_matrix(P, L):
    """∂̄ on scalars for n = 2 as a (2 P^4) x P^4 sparse matrix."""
    D = scipy.sparse.csr_matrix(dft_derivative_matrix(P, L))
    eye = scipy.sparse.identity(P, format="csr")

    def on_axis(a):
        ops = [eye] * 4
        ops[a] = D
        out = ops[0]
        for op in ops[1:]:
            out = scipy.sparse.kron(out, op, format="csr")
        return out

    d = [on_axis(a) for a in range(4)]
    return scipy.sparse.vstack([0.5 * (d[0] + 1j * d[1]), 0.5 * (d[2] + 1j * d[3])]).tocsr()


def least_norm_solution(A, b):
    """Minimum-norm least-squares solution by LSQR started from zero."""
    return scipy.sparse.linalg.lsqr(A, b, atol=1e-15, btol=1e-15, iter_lim=2000)[0]
