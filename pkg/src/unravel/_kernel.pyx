# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled trajectory stepping loop.

Mirrors unravel._pykernel.run_steps: normalized exponential-Euler steps with
rate-operator (GTRO) or standard noise channels. All matrices are handled
in flat column-major buffers (LAPACK layout); the eigensolver is LAPACK
zheev, the matrix exponential is scaling-and-squaring Taylor.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt
from scipy.linalg.cython_lapack cimport zheev

cnp.import_array()

ctypedef double complex zcomplex

BACKEND_NAME = "compiled"


cdef inline double cabs2(zcomplex z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef void matvec(int n, zcomplex* A, zcomplex* x, zcomplex* y) noexcept nogil:
    # y = A x, A column-major
    cdef int a, b
    for a in range(n):
        y[a] = 0
    for b in range(n):
        for a in range(n):
            y[a] = y[a] + A[b * n + a] * x[b]


cdef zcomplex vdot(int n, zcomplex* x, zcomplex* y) noexcept nogil:
    # <x|y>
    cdef zcomplex s = 0
    cdef int a
    for a in range(n):
        s = s + x[a].conjugate() * y[a]
    return s


cdef void matmul(int n, zcomplex* A, zcomplex* B, zcomplex* C) noexcept nogil:
    # C = A B, all column-major
    cdef int r, col, k
    cdef zcomplex acc
    for col in range(n):
        for r in range(n):
            acc = 0
            for k in range(n):
                acc = acc + A[k * n + r] * B[col * n + k]
            C[col * n + r] = acc


cdef double norm1(int n, zcomplex* M) noexcept nogil:
    cdef double best = 0, s
    cdef int col, r
    for col in range(n):
        s = 0
        for r in range(n):
            s = s + sqrt(cabs2(M[col * n + r]))
        if s > best:
            best = s
    return best


cdef void expm_cm(int n, zcomplex* M, zcomplex* E,
                  zcomplex* term, zcomplex* tmp, zcomplex* ms) noexcept nogil:
    """E = exp(M) by scaling-and-squaring Taylor (relative error well below
    1e-12 for the step norms that occur here)."""
    cdef int nn = n * n
    cdef int s = 0, i, k
    cdef double nrm = norm1(n, M)
    cdef double scale = 1.0
    cdef double tnorm, enorm
    while nrm * scale > 0.25 and s < 60:
        scale *= 0.5
        s += 1
    for i in range(nn):
        ms[i] = M[i] * scale
        term[i] = ms[i]
        E[i] = ms[i]
    for i in range(n):
        E[i * n + i] = E[i * n + i] + 1.0
    for k in range(2, 60):
        matmul(n, term, ms, tmp)
        tnorm = 0
        enorm = 0
        for i in range(nn):
            term[i] = tmp[i] / k
            E[i] = E[i] + term[i]
            tnorm += cabs2(term[i])
            enorm += cabs2(E[i])
        if tnorm <= 1e-34 * enorm:
            break
    for k in range(s):
        matmul(n, E, E, tmp)
        for i in range(nn):
            E[i] = tmp[i]


def run_steps(cnp.ndarray H, cnp.ndarray Ls, cnp.ndarray c, cnp.ndarray psi0,
              double dt, int n_steps, int stride, bint gtro_mode,
              cnp.ndarray dxi, double positivity_tol=1e-10):
    """Contract identical to unravel._pykernel.run_steps."""
    cdef int n = psi0.shape[0]
    cdef int m = c.shape[0]
    cdef int nn = n * n
    cdef int n_samples = n_steps // stride + 1

    # column-major flat copies
    A0np = -1j * np.asarray(H, dtype=complex)
    Lnp = np.asarray(Ls, dtype=complex).reshape(m, n, n)
    for jj in range(m):
        A0np = A0np - 0.5 * c[jj] * (Lnp[jj].conj().T @ Lnp[jj])
    cdef cnp.ndarray[zcomplex, ndim=1] A0f = np.ascontiguousarray(A0np.T).reshape(-1)
    cdef cnp.ndarray[zcomplex, ndim=1] Lf = np.empty(max(m, 1) * nn, dtype=complex)
    for jj in range(m):
        Lf[jj * nn:(jj + 1) * nn] = Lnp[jj].ravel(order="F")
    cdef cnp.ndarray[double, ndim=1] cv = np.ascontiguousarray(c, dtype=float)
    cdef cnp.ndarray[zcomplex, ndim=2] dxiv = np.ascontiguousarray(dxi, dtype=complex)
    cdef cnp.ndarray[zcomplex, ndim=2] states = np.zeros((n_samples, n), dtype=complex)
    cdef cnp.ndarray[zcomplex, ndim=1] psi = np.array(psi0, dtype=complex)

    # scratch
    cdef cnp.ndarray[zcomplex, ndim=1] scratch = np.zeros(6 * nn + 4 * n + m * (n + 1), dtype=complex)
    cdef zcomplex* M = &scratch[0]
    cdef zcomplex* W = &scratch[nn]
    cdef zcomplex* E = &scratch[2 * nn]
    cdef zcomplex* t1 = &scratch[3 * nn]
    cdef zcomplex* t2 = &scratch[4 * nn]
    cdef zcomplex* t3 = &scratch[5 * nn]
    cdef zcomplex* vwork = &scratch[6 * nn]            # n
    cdef zcomplex* psinew = &scratch[6 * nn + n]       # n
    cdef zcomplex* Lpsi = &scratch[6 * nn + 2 * n]     # m*n
    cdef zcomplex* ell = &scratch[6 * nn + 2 * n + m * n]  # m
    cdef zcomplex* psiv = &psi[0]

    # LAPACK workspace
    cdef int lwork = 4 * n if 4 * n > 64 else 64
    cdef cnp.ndarray[zcomplex, ndim=1] work = np.zeros(lwork, dtype=complex)
    cdef cnp.ndarray[double, ndim=1] rwork = np.zeros(3 * n, dtype=float)
    cdef cnp.ndarray[double, ndim=1] evals = np.zeros(n, dtype=float)
    cdef int info = 0

    cdef int i, j, k, a, b, row, kth, imax
    cdef double acc, frob, eps, lam, nrm, amax, av
    cdef zcomplex coef, ph, ellc
    cdef int aborted_step = -1
    cdef double abort_min = 0.0

    for i in range(n_steps + 1):
        if i % stride == 0:
            row = i // stride
            for a in range(n):
                states[row, a] = psiv[a]
        if i == n_steps:
            break

        # drift part: M = (A0 + sum_j c_j conj(ell_j) L_j - 0.5 sum c_j |ell_j|^2) dt
        for a in range(nn):
            M[a] = A0f[a]
        acc = 0
        for j in range(m):
            matvec(n, &Lf[j * nn], psiv, &Lpsi[j * n])
            ell[j] = vdot(n, psiv, &Lpsi[j * n])
            acc += cv[j] * cabs2(ell[j])
            coef = cv[j] * ell[j].conjugate()
            for a in range(nn):
                M[a] = M[a] + coef * Lf[j * nn + a]
        for a in range(n):
            M[a * n + a] = M[a * n + a] - 0.5 * acc
        for a in range(nn):
            M[a] = M[a] * dt

        if gtro_mode and m > 0:
            # W = sum_j c_j v_j v_j^dag, v_j = (L_j - ell_j) psi
            for a in range(nn):
                W[a] = 0
            for j in range(m):
                ellc = ell[j]
                for a in range(n):
                    vwork[a] = Lpsi[j * n + a] - ellc * psiv[a]
                for b in range(n):
                    for a in range(n):
                        W[b * n + a] = W[b * n + a] + cv[j] * vwork[a] * vwork[b].conjugate()
            frob = 0
            for a in range(nn):
                frob += cabs2(W[a])
            frob = sqrt(frob)
            if frob < 1.0:
                frob = 1.0
            eps = 1e-10 * frob  # numerical-zero floor for retained channels
            zheev("V", "L", &n, W, &n, &evals[0], &work[0], &lwork, &rwork[0], &info)
            if info != 0:
                raise RuntimeError(f"zheev failed with info={info}")
            if evals[0] < -positivity_tol * frob:
                aborted_step = i
                abort_min = evals[0]
                break
            kth = 0
            for k in range(n - 1, -1, -1):  # descending eigenvalues
                if evals[k] <= eps:
                    break
                # phase fix: largest-magnitude component real positive
                imax = 0
                amax = 0
                for a in range(n):
                    av = cabs2(W[k * n + a])
                    if av > amax:
                        amax = av
                        imax = a
                ph = W[k * n + imax].conjugate() / sqrt(amax)
                coef = sqrt(evals[k]) * dxiv[i, kth]
                for b in range(n):
                    for a in range(n):
                        M[b * n + a] = M[b * n + a] + coef * ph * W[k * n + a] * psiv[b].conjugate()
                kth += 1
        elif m > 0:
            for j in range(m):
                coef = sqrt(cv[j]) * dxiv[i, j]
                for a in range(nn):
                    M[a] = M[a] + coef * Lf[j * nn + a]
                ellc = coef * ell[j]
                for a in range(n):
                    M[a * n + a] = M[a * n + a] - ellc

        expm_cm(n, M, E, t1, t2, t3)
        matvec(n, E, psiv, psinew)
        nrm = 0
        for a in range(n):
            nrm += cabs2(psinew[a])
        nrm = sqrt(nrm)
        for a in range(n):
            psiv[a] = psinew[a] / nrm

    if aborted_step < 0:
        return states, -1, 0.0, None
    return states[: aborted_step // stride + 1], aborted_step, abort_min, psi.copy()
