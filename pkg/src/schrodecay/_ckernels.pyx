# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: Sturm counting and batched Prufer integration.

Signatures and results match :mod:`schrodecay._pykernels` exactly; the
pure-numpy versions are the reference the test-suite compares against.
"""
import numpy as np

from libc.math cimport cos, fabs, sin

cdef double PIVMIN = 1e-280


cdef inline long long _count_one(const double[::1] q, double h2, double E) noexcept nogil:
    cdef Py_ssize_t i
    cdef Py_ssize_t m = q.shape[0]
    cdef long long c = 0
    cdef double e = 1.0 + h2 * (q[0] - E)
    cdef double d = 1.0 + e
    if fabs(d) < PIVMIN:
        d = -PIVMIN
    if d < 0.0:
        c += 1
    for i in range(1, m):
        e = h2 * (q[i] - E) + e / d
        d = 1.0 + e
        if fabs(d) < PIVMIN:
            d = -PIVMIN
        if d < 0.0:
            c += 1
    return c


def sturm_count(const double[::1] q, double h, const double[::1] energies):
    """Number of eigenvalues strictly below each energy.

    Pivots are tracked as ``e_i = d_i - 1`` (in units of ``1/h**2``) so the
    shift ``h**2 * E`` is never absorbed into the ``2/h**2`` diagonal.
    Four energies run interleaved to hide the division latency; each chain
    does exactly the arithmetic of the single-energy loop.
    """
    cdef Py_ssize_t m = q.shape[0]
    cdef Py_ssize_t ne = energies.shape[0]
    cdef Py_ssize_t i, k, j
    cdef double h2 = h * h
    cdef double qi
    cdef double E[4]
    cdef double e[4]
    cdef double d[4]
    cdef long long c[4]
    out = np.empty(ne, dtype=np.int64)
    cdef long long[::1] counts = out
    with nogil:
        k = 0
        while k + 4 <= ne:
            for j in range(4):
                E[j] = energies[k + j]
                c[j] = 0
                e[j] = 1.0 + h2 * (q[0] - E[j])
                d[j] = 1.0 + e[j]
                if fabs(d[j]) < PIVMIN:
                    d[j] = -PIVMIN
                if d[j] < 0.0:
                    c[j] += 1
            for i in range(1, m):
                qi = q[i]
                for j in range(4):
                    e[j] = h2 * (qi - E[j]) + e[j] / d[j]
                    d[j] = 1.0 + e[j]
                    if fabs(d[j]) < PIVMIN:
                        d[j] = -PIVMIN
                    if d[j] < 0.0:
                        c[j] += 1
            for j in range(4):
                counts[k + j] = c[j]
            k += 4
        while k < ne:
            counts[k] = _count_one(q, h2, energies[k])
            k += 1
    return out


def prufer_batch(const double[:, :] qn, const double[:, :] qm, double dt,
                 const double[::1] kappa, const Py_ssize_t[::1] record):
    """RK4 for theta' = k - (q/k) sin^2 theta, rho' = q sin(2 theta) / (2k).

    Row ``p`` of ``qn`` (node values) and ``qm`` (midpoint values) drives
    ``kappa[p]``; a single-row ``qn``/``qm`` is shared by every kappa.
    ``record`` holds ascending step indices at which (theta, rho) is stored.
    Returns ``(theta, rho, max_step)`` with ``max_step`` the largest
    single-step change of theta.
    """
    cdef Py_ssize_t P = kappa.shape[0]
    cdef Py_ssize_t N = qm.shape[1]
    cdef Py_ssize_t R = record.shape[0]
    cdef bint shared = qn.shape[0] == 1
    cdef Py_ssize_t p, row, k, r
    cdef double th, rh, kap, ik, q0, q1, qh, s, c, t
    cdef double k1, k2, k3, k4, l1, l2, l3, l4, dth
    cdef double half = 0.5 * dt, sixth = dt / 6.0
    cdef double max_step = 0.0
    theta_out = np.empty((P, R), dtype=np.float64)
    rho_out = np.empty((P, R), dtype=np.float64)
    cdef double[:, ::1] th_o = theta_out
    cdef double[:, ::1] rh_o = rho_out
    with nogil:
        for p in range(P):
            row = 0 if shared else p
            kap = kappa[p]
            ik = 1.0 / kap
            th = 0.0
            rh = 0.0
            r = 0
            while r < R and record[r] == 0:
                th_o[p, r] = th
                rh_o[p, r] = rh
                r += 1
            for k in range(N):
                q0 = qn[row, k]
                qh = qm[row, k]
                q1 = qn[row, k + 1]

                s = sin(th)
                c = cos(th)
                k1 = kap - q0 * ik * s * s
                l1 = q0 * ik * s * c

                t = th + half * k1
                s = sin(t)
                c = cos(t)
                k2 = kap - qh * ik * s * s
                l2 = qh * ik * s * c

                t = th + half * k2
                s = sin(t)
                c = cos(t)
                k3 = kap - qh * ik * s * s
                l3 = qh * ik * s * c

                t = th + dt * k3
                s = sin(t)
                c = cos(t)
                k4 = kap - q1 * ik * s * s
                l4 = q1 * ik * s * c

                dth = sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                th = th + dth
                rh = rh + sixth * (l1 + 2.0 * l2 + 2.0 * l3 + l4)
                if fabs(dth) > max_step:
                    max_step = fabs(dth)
                while r < R and record[r] == k + 1:
                    th_o[p, r] = th
                    rh_o[p, r] = rh
                    r += 1
    return theta_out, rho_out, max_step


def shifted_solve(const double[::1] q, double h, double sigma, const double[::1] rhs):
    """Solve ``tridiag(-1, 2 + h^2 (q - sigma), -1) y = rhs`` by LDL^T.

    Pivots use the same ``e = d - 1`` representation as :func:`sturm_count`,
    which keeps the shift at full relative precision.  No pivoting; a pivot
    that vanishes is replaced by ``PIVMIN``.
    """
    cdef Py_ssize_t m = q.shape[0]
    cdef Py_ssize_t i
    cdef double h2 = h * h
    cdef double e, d
    out = np.empty(m, dtype=np.float64)
    piv = np.empty(m, dtype=np.float64)
    cdef double[::1] y = out
    cdef double[::1] dv = piv
    with nogil:
        e = 1.0 + h2 * (q[0] - sigma)
        d = 1.0 + e
        if fabs(d) < PIVMIN:
            d = -PIVMIN
        dv[0] = d
        y[0] = rhs[0]
        for i in range(1, m):
            e = h2 * (q[i] - sigma) + e / d
            y[i] = rhs[i] + y[i - 1] / d
            d = 1.0 + e
            if fabs(d) < PIVMIN:
                d = -PIVMIN
            dv[i] = d
        y[m - 1] = y[m - 1] / dv[m - 1]
        for i in range(m - 2, -1, -1):
            y[i] = (y[i] + y[i + 1]) / dv[i]
    return out
