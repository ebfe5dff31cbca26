# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernel backend.

Same contracts and algorithms as the pure module, with the per-tensor
work done in C loops. Selected automatically at import when the
extension built; EIGENUQ_PURE=1 forces the fallback instead.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport acos, cos, fabs, sqrt, M_PI

cnp.import_array()

NAME = "compiled"

cdef double JACOBI_GAP = 1.0e-6
cdef double TIE_GAP = 1.0e-12


cdef inline void _six_to_mat(const double* t, double m[3][3]) noexcept nogil:
    m[0][0] = t[0]
    m[1][1] = t[1]
    m[2][2] = t[2]
    m[0][1] = t[3]
    m[1][0] = t[3]
    m[0][2] = t[4]
    m[2][0] = t[4]
    m[1][2] = t[5]
    m[2][1] = t[5]


cdef inline void _mat_to_six(double m[3][3], double* t) noexcept nogil:
    t[0] = m[0][0]
    t[1] = m[1][1]
    t[2] = m[2][2]
    t[3] = m[0][1]
    t[4] = m[0][2]
    t[5] = m[1][2]


cdef inline void _identity(double v[3][3]) noexcept nogil:
    cdef int i, j
    for i in range(3):
        for j in range(3):
            v[i][j] = 1.0 if i == j else 0.0


cdef inline void _cross(const double* a, const double* b, double* c) noexcept nogil:
    c[0] = a[1] * b[2] - a[2] * b[1]
    c[1] = a[2] * b[0] - a[0] * b[2]
    c[2] = a[0] * b[1] - a[1] * b[0]


cdef inline double _dot(const double* a, const double* b) noexcept nogil:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


cdef void _jacobi3(double ain[3][3], double* vals, double v[3][3]) noexcept nogil:
    cdef double a[3][3]
    cdef int i, j, sweep, p, q, kk
    cdef double scale, off, apq, theta, t, c, s, akp, akq
    for i in range(3):
        for j in range(3):
            a[i][j] = ain[i][j]
    _identity(v)
    scale = 1e-300
    for i in range(3):
        for j in range(3):
            if fabs(a[i][j]) > scale:
                scale = fabs(a[i][j])
    for sweep in range(50):
        off = fabs(a[0][1]) + fabs(a[0][2]) + fabs(a[1][2])
        if off <= 1e-15 * scale:
            break
        for p in range(2):
            for q in range(p + 1, 3):
                apq = a[p][q]
                if fabs(apq) <= 1e-18 * scale:
                    continue
                theta = (a[q][q] - a[p][p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                else:
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                # a <- R^T a R with R[p][q] = s, R[q][p] = -s.
                for kk in range(3):
                    akp = a[kk][p]
                    akq = a[kk][q]
                    a[kk][p] = c * akp - s * akq
                    a[kk][q] = s * akp + c * akq
                for kk in range(3):
                    akp = a[p][kk]
                    akq = a[q][kk]
                    a[p][kk] = c * akp - s * akq
                    a[q][kk] = s * akp + c * akq
                for kk in range(3):
                    akp = v[kk][p]
                    akq = v[kk][q]
                    v[kk][p] = c * akp - s * akq
                    v[kk][q] = s * akp + c * akq
    for i in range(3):
        vals[i] = a[i][i]
    # Stable descending sort of (vals, columns).
    cdef double tmp
    for i in range(2):
        for j in range(2 - i):
            if vals[j] < vals[j + 1]:
                tmp = vals[j]
                vals[j] = vals[j + 1]
                vals[j + 1] = tmp
                for kk in range(3):
                    tmp = v[kk][j]
                    v[kk][j] = v[kk][j + 1]
                    v[kk][j + 1] = tmp


cdef int _mgs_canonical(double fixed[3][3], int nfixed, int need,
                        double out[3][3]) noexcept nogil:
    """Fill ``need`` unit columns orthogonal to the first ``nfixed`` of
    ``fixed`` (stored as columns) by Gram-Schmidt over the canonical
    basis in order. Returns the count produced."""
    cdef int filled = 0
    cdef int a, i, f
    cdef double v[3]
    cdef double d, norm
    for a in range(3):
        if filled == need:
            break
        for i in range(3):
            v[i] = 1.0 if i == a else 0.0
        for f in range(nfixed):
            d = v[0] * fixed[0][f] + v[1] * fixed[1][f] + v[2] * fixed[2][f]
            for i in range(3):
                v[i] -= d * fixed[i][f]
        for f in range(filled):
            d = v[0] * out[0][f] + v[1] * out[1][f] + v[2] * out[2][f]
            for i in range(3):
                v[i] -= d * out[i][f]
        norm = sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
        if norm > 0.5:
            for i in range(3):
                out[i][filled] = v[i] / norm
            filled += 1
    return filled


cdef void _apply_signs(double v[3][3]) noexcept nogil:
    cdef int i, j, best
    cdef double m
    for j in range(3):
        best = 0
        m = fabs(v[0][j])
        for i in range(1, 3):
            if fabs(v[i][j]) > m:
                m = fabs(v[i][j])
                best = i
        if v[best][j] < 0.0:
            for i in range(3):
                v[i][j] = -v[i][j]


cdef void _fix_ties_signs(double* vals, double v[3][3], double scale) noexcept nogil:
    cdef double tie = TIE_GAP * (scale if scale > 1e-300 else 1e-300)
    cdef double w[3]
    cdef double fixed[3][3]
    cdef double pair[3][3]
    cdef double norm
    cdef int i
    if vals[0] - vals[2] <= tie:
        _identity(v)
    elif vals[0] - vals[1] <= tie:
        norm = sqrt(v[0][2] * v[0][2] + v[1][2] * v[1][2] + v[2][2] * v[2][2])
        for i in range(3):
            w[i] = v[i][2] / norm
            fixed[i][0] = w[i]
        _mgs_canonical(fixed, 1, 2, pair)
        for i in range(3):
            v[i][0] = pair[i][0]
            v[i][1] = pair[i][1]
            v[i][2] = w[i]
    elif vals[1] - vals[2] <= tie:
        norm = sqrt(v[0][0] * v[0][0] + v[1][0] * v[1][0] + v[2][0] * v[2][0])
        for i in range(3):
            w[i] = v[i][0] / norm
            fixed[i][0] = w[i]
        _mgs_canonical(fixed, 1, 2, pair)
        for i in range(3):
            v[i][0] = w[i]
            v[i][1] = pair[i][0]
            v[i][2] = pair[i][1]
    _apply_signs(v)


cdef void _isolated_vec(double a[3][3], double lam, double* v) noexcept nogil:
    cdef double d[3][3]
    cdef double c01[3]
    cdef double c02[3]
    cdef double c12[3]
    cdef double n01, n02, n12, norm
    cdef int i, j
    for i in range(3):
        for j in range(3):
            d[i][j] = a[i][j] - (lam if i == j else 0.0)
    _cross(d[0], d[1], c01)
    _cross(d[0], d[2], c02)
    _cross(d[1], d[2], c12)
    n01 = _dot(c01, c01)
    n02 = _dot(c02, c02)
    n12 = _dot(c12, c12)
    if n01 >= n02 and n01 >= n12:
        for i in range(3):
            v[i] = c01[i]
        norm = sqrt(n01)
    elif n02 >= n12:
        for i in range(3):
            v[i] = c02[i]
        norm = sqrt(n02)
    else:
        for i in range(3):
            v[i] = c12[i]
        norm = sqrt(n12)
    for i in range(3):
        v[i] /= norm


cdef void _eig3_one(const double* t6, double* vals, double v[3][3]) noexcept nogil:
    cdef double scale = 0.0
    cdef double a6[6]
    cdef double a[3][3]
    cdef double b[3][3]
    cdef int i, j
    cdef double q, p1, p2, p, detb, r, phi, l1, l2, l3, gap
    cdef double v1[3]
    cdef double v3[3]
    cdef double u[3]
    cdef double o[3]
    cdef double c2[3]
    cdef double d, norm
    for i in range(6):
        if fabs(t6[i]) > scale:
            scale = fabs(t6[i])
    if scale == 0.0:
        vals[0] = vals[1] = vals[2] = 0.0
        _identity(v)
        return
    for i in range(6):
        a6[i] = t6[i] / scale
    _six_to_mat(a6, a)
    q = (a[0][0] + a[1][1] + a[2][2]) / 3.0
    p1 = a6[3] * a6[3] + a6[4] * a6[4] + a6[5] * a6[5]
    p2 = ((a[0][0] - q) * (a[0][0] - q) + (a[1][1] - q) * (a[1][1] - q)
          + (a[2][2] - q) * (a[2][2] - q) + 2.0 * p1)
    p = sqrt(p2 / 6.0)
    if p <= 1e-14:
        vals[0] = vals[1] = vals[2] = q * scale
        _identity(v)
        return
    for i in range(3):
        for j in range(3):
            b[i][j] = (a[i][j] - (q if i == j else 0.0)) / p
    detb = (b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
            - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
            + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]))
    r = detb / 2.0
    if r < -1.0:
        r = -1.0
    elif r > 1.0:
        r = 1.0
    phi = acos(r) / 3.0
    l1 = q + 2.0 * p * cos(phi)
    l3 = q + 2.0 * p * cos(phi + 2.0 * M_PI / 3.0)
    l2 = 3.0 * q - l1 - l3
    gap = l1 - l2
    if l2 - l3 < gap:
        gap = l2 - l3
    if gap > JACOBI_GAP:
        _isolated_vec(a, l1, v1)
        _isolated_vec(a, l3, v3)
        if (l1 - l2) >= (l2 - l3):
            for i in range(3):
                u[i] = v1[i]
                o[i] = v3[i]
        else:
            for i in range(3):
                u[i] = v3[i]
                o[i] = v1[i]
        d = _dot(o, u)
        for i in range(3):
            o[i] -= d * u[i]
        norm = sqrt(_dot(o, o))
        for i in range(3):
            o[i] /= norm
        if (l1 - l2) >= (l2 - l3):
            for i in range(3):
                v[i][0] = u[i]
                v[i][2] = o[i]
        else:
            for i in range(3):
                v[i][0] = o[i]
                v[i][2] = u[i]
        for i in range(3):
            v1[i] = v[i][2]
            v3[i] = v[i][0]
        _cross(v1, v3, c2)
        for i in range(3):
            v[i][1] = c2[i]
        _apply_signs(v)
        vals[0] = l1 * scale
        vals[1] = l2 * scale
        vals[2] = l3 * scale
    else:
        _jacobi3(a, vals, v)
        _fix_ties_signs(vals, v, 1.0)
        for i in range(3):
            vals[i] = vals[i] * scale


def eig3(t6):
    """Eigendecompose a batch of symmetric 3x3 tensors.

    Accepts (n, 6) or (6,) arrays in (xx, yy, zz, xy, xz, yz) order and
    returns descending eigenvalues with matching orthonormal columns.
    """
    arr = np.ascontiguousarray(t6, dtype=np.float64)
    squeeze = arr.ndim == 1
    if squeeze:
        arr = arr[None, :]
    cdef double[:, ::1] a = arr
    cdef Py_ssize_t n = a.shape[0]
    vals_np = np.empty((n, 3), dtype=np.float64)
    vecs_np = np.empty((n, 3, 3), dtype=np.float64)
    cdef double[:, ::1] vals = vals_np
    cdef double[:, :, ::1] vecs = vecs_np
    cdef double lv[3]
    cdef double vv[3][3]
    cdef Py_ssize_t i
    cdef int r, c
    with nogil:
        for i in range(n):
            _eig3_one(&a[i, 0], lv, vv)
            for r in range(3):
                vals[i, r] = lv[r]
                for c in range(3):
                    vecs[i, r, c] = vv[r][c]
    if squeeze:
        return vals_np[0], vecs_np[0]
    return vals_np, vecs_np


def perturb_stress_batch(r6, gradu, k, component, permute, delta_b,
                         k_floor=1.0e-10):
    """Perturb a Reynolds-stress field toward a limiting componentality
    state; same semantics as the pure backend."""
    r6_np = np.ascontiguousarray(r6, dtype=np.float64)
    gu_np = np.ascontiguousarray(gradu, dtype=np.float64)
    k_np = np.ascontiguousarray(k, dtype=np.float64)
    out_np = r6_np.copy()
    cdef double[:, ::1] rr = r6_np
    cdef double[:, :, ::1] gg = gu_np
    cdef double[::1] kk = k_np
    cdef double[:, ::1] oo = out_np
    cdef int comp = int(component)
    cdef bint perm = bool(permute)
    cdef double db = float(delta_b)
    cdef double kfl = float(k_floor)
    cdef double t0, t1, t2
    if comp == 1:
        t0, t1, t2 = 2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0
    elif comp == 2:
        t0, t1, t2 = 1.0 / 6.0, 1.0 / 6.0, -1.0 / 3.0
    elif comp == 3:
        t0, t1, t2 = 0.0, 0.0, 0.0
    else:
        raise KeyError(comp)
    cdef Py_ssize_t n = rr.shape[0]
    cdef Py_ssize_t i
    cdef int r, c, m
    cdef double kcell, spread, gmax
    cdef double b6[6]
    cdef double s6[6]
    cdef double bvals[3]
    cdef double gvals[3]
    cdef double lam[3]
    cdef double bV[3][3]
    cdef double gV[3][3]
    cdef double F[3][3]
    cdef double M[3][3]
    cdef double row6[6]
    cdef Py_ssize_t bad = -1
    cdef int badkind = 0
    cdef double badval = 0.0
    cdef double btrace
    with nogil:
        for i in range(n):
            kcell = kk[i]
            if kcell <= kfl:
                continue
            for m in range(6):
                b6[m] = rr[i, m] / (2.0 * kcell)
            for m in range(3):
                b6[m] -= 1.0 / 3.0
            btrace = b6[0] + b6[1] + b6[2]
            if fabs(btrace) > 1.0e-10:
                bad = i
                badkind = 1
                badval = btrace
                break
            _eig3_one(b6, bvals, bV)
            if bvals[2] < -1.0 / 3.0 - 1.0e-10:
                bad = i
                badkind = 2
                badval = bvals[2]
                break
            lam[0] = (1.0 - db) * bvals[0] + db * t0
            lam[1] = (1.0 - db) * bvals[1] + db * t1
            lam[2] = (1.0 - db) * bvals[2] + db * t2
            s6[0] = gg[i, 0, 0]
            s6[1] = gg[i, 1, 1]
            s6[2] = gg[i, 2, 2]
            s6[3] = 0.5 * (gg[i, 0, 1] + gg[i, 1, 0])
            s6[4] = 0.5 * (gg[i, 0, 2] + gg[i, 2, 0])
            s6[5] = 0.5 * (gg[i, 1, 2] + gg[i, 2, 1])
            _eig3_one(s6, gvals, gV)
            spread = gvals[0] - gvals[2]
            gmax = 1.0
            for r in range(3):
                if fabs(gvals[r]) > gmax:
                    gmax = fabs(gvals[r])
            if spread <= TIE_GAP * gmax:
                for r in range(3):
                    for c in range(3):
                        F[r][c] = bV[r][c]
            elif perm:
                for r in range(3):
                    for c in range(3):
                        F[r][c] = gV[r][c]
            else:
                for r in range(3):
                    for c in range(3):
                        F[r][c] = gV[r][2 - c]
            for r in range(3):
                for c in range(3):
                    M[r][c] = (F[r][0] * lam[0] * F[c][0]
                               + F[r][1] * lam[1] * F[c][1]
                               + F[r][2] * lam[2] * F[c][2])
                M[r][r] += 1.0 / 3.0
            _mat_to_six(M, row6)
            for m in range(6):
                oo[i, m] = 2.0 * kcell * row6[m]
    if bad >= 0:
        from ..errors import RealizabilityError
        if badkind == 1:
            raise RealizabilityError(
                f"cell {bad}: anisotropy trace {badval:.6g} nonzero; "
                "kinetic energy inconsistent with the stress trace"
            )
        raise RealizabilityError(
            f"cell {bad}: anisotropy eigenvalue {badval:.6g} "
            "below -1/3; stress not realizable"
        )
    return out_np
