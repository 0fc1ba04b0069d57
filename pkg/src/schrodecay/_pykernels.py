"""Pure-numpy versions of the compiled kernels.

Loops run over the sequential index (grid node / time step) and vectorize
across the independent direction (energies / trajectories), so the same
arithmetic is performed in the same order as in ``_ckernels.pyx``.
"""
import numpy as np

PIVMIN = 1e-280


def sturm_count(q, h, energies):
    q = np.ascontiguousarray(q, dtype=np.float64)
    energies = np.ascontiguousarray(energies, dtype=np.float64)
    h2 = h * h
    e = 1.0 + h2 * (q[0] - energies)
    d = 1.0 + e
    d[np.abs(d) < PIVMIN] = -PIVMIN
    counts = (d < 0.0).astype(np.int64)
    for qi in q[1:]:
        e = h2 * (qi - energies) + e / d
        d = 1.0 + e
        d[np.abs(d) < PIVMIN] = -PIVMIN
        counts += d < 0.0
    return counts


def prufer_batch(qn, qm, dt, kappa, record):
    qn = np.asarray(qn, dtype=np.float64)
    qm = np.asarray(qm, dtype=np.float64)
    kappa = np.ascontiguousarray(kappa, dtype=np.float64)
    record = np.asarray(record, dtype=np.intp)
    P = kappa.shape[0]
    N = qm.shape[1]
    shared = qn.shape[0] == 1
    half = 0.5 * dt
    sixth = dt / 6.0
    ik = 1.0 / kappa

    theta_out = np.empty((P, record.size))
    rho_out = np.empty((P, record.size))
    th = np.zeros(P)
    rh = np.zeros(P)
    max_step = 0.0
    r = 0
    while r < record.size and record[r] == 0:
        theta_out[:, r] = th
        rho_out[:, r] = rh
        r += 1

    def rates(t, q):
        s = np.sin(t)
        c = np.cos(t)
        return kappa - q * ik * s * s, q * ik * s * c

    for k in range(N):
        if shared:
            q0, qh, q1 = qn[0, k], qm[0, k], qn[0, k + 1]
        else:
            q0, qh, q1 = qn[:, k], qm[:, k], qn[:, k + 1]
        k1, l1 = rates(th, q0)
        k2, l2 = rates(th + half * k1, qh)
        k3, l3 = rates(th + half * k2, qh)
        k4, l4 = rates(th + dt * k3, q1)
        dth = sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        th = th + dth
        rh = rh + sixth * (l1 + 2.0 * l2 + 2.0 * l3 + l4)
        step = float(np.max(np.abs(dth))) if P else 0.0
        if step > max_step:
            max_step = step
        while r < record.size and record[r] == k + 1:
            theta_out[:, r] = th
            rho_out[:, r] = rh
            r += 1
    return theta_out, rho_out, max_step


def shifted_solve(q, h, sigma, rhs):
    q = np.asarray(q, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    m = q.size
    h2 = h * h
    s = (h2 * (q - sigma)).tolist()
    y = rhs.tolist()
    piv = [0.0] * m
    e = 1.0 + s[0]
    d = 1.0 + e
    if abs(d) < PIVMIN:
        d = -PIVMIN
    piv[0] = d
    for i in range(1, m):
        e = s[i] + e / d
        y[i] = y[i] + y[i - 1] / d
        d = 1.0 + e
        if abs(d) < PIVMIN:
            d = -PIVMIN
        piv[i] = d
    y[m - 1] = y[m - 1] / piv[m - 1]
    for i in range(m - 2, -1, -1):
        y[i] = (y[i] + y[i + 1]) / piv[i]
    return np.array(y)
