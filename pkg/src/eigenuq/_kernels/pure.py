"""Pure numpy kernel backend.

Batched primitives over fields of symmetric 3x3 tensors stored as
(n, 6) arrays in (xx, yy, zz, xy, xz, yz) component order:

- ``eig3``: closed-form (trigonometric) symmetric eigendecomposition with
  a cyclic-Jacobi fallback for near-degenerate spectra.
- ``perturb_stress_batch``: componentality/alignment perturbation of a
  Reynolds-stress field toward a limiting state.

The compiled backend (``_fast``) implements the same algorithms with C
loops; this module is the reference and the import-time fallback.
"""

import numpy as np

NAME = "pure"

# Limiting-state anisotropy eigenvalue triples (one-, two-, three-component).
VERTEX_EIGENVALUES = {
    1: np.array([2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0]),
    2: np.array([1.0 / 6.0, 1.0 / 6.0, -1.0 / 3.0]),
    3: np.array([0.0, 0.0, 0.0]),
}

# Relative eigenvalue-gap thresholds. Below JACOBI_GAP the cross-product
# eigenvector construction loses too much accuracy (error ~ eps/gap), so
# the row is re-solved by cyclic Jacobi. Below TIE_GAP eigenvalues count
# as coincident and the degenerate subspace gets a canonical basis.
JACOBI_GAP = 1.0e-6
TIE_GAP = 1.0e-12


def mat_to_six(m: np.ndarray) -> np.ndarray:
    """Pack (n,3,3) symmetric matrices into (n,6) component vectors."""
    m = np.asarray(m, dtype=np.float64)
    return np.stack(
        [m[..., 0, 0], m[..., 1, 1], m[..., 2, 2],
         m[..., 0, 1], m[..., 0, 2], m[..., 1, 2]],
        axis=-1,
    )


def six_to_mat(t6: np.ndarray) -> np.ndarray:
    """Unpack (n,6) component vectors into (n,3,3) symmetric matrices."""
    t6 = np.asarray(t6, dtype=np.float64)
    n = t6.shape[:-1]
    m = np.empty(n + (3, 3), dtype=np.float64)
    m[..., 0, 0] = t6[..., 0]
    m[..., 1, 1] = t6[..., 1]
    m[..., 2, 2] = t6[..., 2]
    m[..., 0, 1] = m[..., 1, 0] = t6[..., 3]
    m[..., 0, 2] = m[..., 2, 0] = t6[..., 4]
    m[..., 1, 2] = m[..., 2, 1] = t6[..., 5]
    return m


def _canonical_completion(fixed: list[np.ndarray]) -> list[np.ndarray]:
    """Extend ``fixed`` orthonormal columns to a full basis.

    Modified Gram-Schmidt over the canonical basis vectors in order;
    a candidate is accepted when its residual keeps more than half its
    length, which admits exactly the right count and is deterministic.
    """
    cols = list(fixed)
    for a in range(3):
        if len(cols) == 3:
            break
        v = np.zeros(3)
        v[a] = 1.0
        for u in cols:
            v = v - np.dot(v, u) * u
        norm = np.linalg.norm(v)
        if norm > 0.5:
            cols.append(v / norm)
    return cols[len(fixed):]


def _jacobi3(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalization of one symmetric 3x3 matrix."""
    a = a.copy()
    v = np.eye(3)
    scale = max(np.max(np.abs(a)), 1e-300)
    for _ in range(50):
        off = abs(a[0, 1]) + abs(a[0, 2]) + abs(a[1, 2])
        if off <= 1e-15 * scale:
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            apq = a[p, q]
            if abs(apq) <= 1e-18 * scale:
                continue
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
            if theta == 0.0:
                t = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            rot = np.eye(3)
            rot[p, p] = rot[q, q] = c
            rot[p, q] = s
            rot[q, p] = -s
            a = rot.T @ a @ rot
            v = v @ rot
    vals = np.diag(a).copy()
    order = np.argsort(-vals, kind="stable")
    return vals[order], v[:, order]


def _fix_ties_and_signs(vals: np.ndarray, vecs: np.ndarray, scale: float) -> np.ndarray:
    """Apply canonical degenerate bases and the sign convention in place."""
    tie = TIE_GAP * max(scale, 1e-300)
    if vals[0] - vals[2] <= tie:
        vecs = np.eye(3)
    elif vals[0] - vals[1] <= tie:
        w = vecs[:, 2] / np.linalg.norm(vecs[:, 2])
        pair = _canonical_completion([w])
        vecs = np.column_stack([pair[0], pair[1], w])
    elif vals[1] - vals[2] <= tie:
        w = vecs[:, 0] / np.linalg.norm(vecs[:, 0])
        pair = _canonical_completion([w])
        vecs = np.column_stack([w, pair[0], pair[1]])
    # Sign convention: largest-magnitude entry of each column positive.
    idx = np.argmax(np.abs(vecs), axis=0)
    flip = vecs[idx, (0, 1, 2)] < 0.0
    vecs = vecs * np.where(flip, -1.0, 1.0)
    return vecs


def eig3(t6: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecompose a batch of symmetric 3x3 tensors.

    Parameters
    ----------
    t6 : (n, 6) array in (xx, yy, zz, xy, xz, yz) order.

    Returns
    -------
    vals : (n, 3) eigenvalues, descending.
    vecs : (n, 3, 3) orthonormal matrices, column i pairing with vals[:, i].
    """
    t6 = np.ascontiguousarray(t6, dtype=np.float64)
    squeeze = t6.ndim == 1
    if squeeze:
        t6 = t6[None, :]
    n = t6.shape[0]
    vals = np.zeros((n, 3))
    vecs = np.broadcast_to(np.eye(3), (n, 3, 3)).copy()
    if n == 0:
        return vals, vecs

    scale = np.max(np.abs(t6), axis=1)
    live = scale > 0.0
    if not np.any(live):
        return (vals[0], vecs[0]) if squeeze else (vals, vecs)

    a6 = t6[live] / scale[live, None]
    xx, yy, zz, xy, xz, yz = (a6[:, i] for i in range(6))
    q = (xx + yy + zz) / 3.0
    p1 = xy * xy + xz * xz + yz * yz
    p2 = (xx - q) ** 2 + (yy - q) ** 2 + (zz - q) ** 2 + 2.0 * p1
    p = np.sqrt(p2 / 6.0)

    lam = np.empty((a6.shape[0], 3))
    iso = p <= 1e-14
    lam[iso] = q[iso, None]

    ani = ~iso
    if np.any(ani):
        am = six_to_mat(a6[ani])
        qa = q[ani]
        pa = p[ani]
        b = (am - qa[:, None, None] * np.eye(3)) / pa[:, None, None]
        r = np.clip(np.linalg.det(b) / 2.0, -1.0, 1.0)
        phi = np.arccos(r) / 3.0
        l1 = qa + 2.0 * pa * np.cos(phi)
        l3 = qa + 2.0 * pa * np.cos(phi + 2.0 * np.pi / 3.0)
        lam[ani, 0] = l1
        lam[ani, 2] = l3
        lam[ani, 1] = 3.0 * qa - l1 - l3

    gap = np.minimum(lam[:, 0] - lam[:, 1], lam[:, 1] - lam[:, 2])
    easy = ani & (gap > JACOBI_GAP)

    vv = np.broadcast_to(np.eye(3), (a6.shape[0], 3, 3)).copy()
    if np.any(easy):
        am = six_to_mat(a6[easy])
        le = lam[easy]
        v1 = _isolated_eigvec(am, le[:, 0])
        v3 = _isolated_eigvec(am, le[:, 2])
        anchor_first = (le[:, 0] - le[:, 1]) >= (le[:, 1] - le[:, 2])
        u = np.where(anchor_first[:, None], v1, v3)
        o = np.where(anchor_first[:, None], v3, v1)
        o = o - np.sum(o * u, axis=1, keepdims=True) * u
        o = o / np.linalg.norm(o, axis=1, keepdims=True)
        c1 = np.where(anchor_first[:, None], u, o)
        c3 = np.where(anchor_first[:, None], o, u)
        c2 = np.cross(c3, c1)
        ve = np.stack([c1, c2, c3], axis=2)
        # Sign convention, vectorized.
        idx = np.argmax(np.abs(ve), axis=1)
        take = np.take_along_axis(ve, idx[:, None, :], axis=1)[:, 0, :]
        ve = ve * np.where(take < 0.0, -1.0, 1.0)[:, None, :]
        vv[easy] = ve

    hard = np.flatnonzero(ani & ~easy)
    a6_rows = a6
    for i in hard:
        jv, jw = _jacobi3(six_to_mat(a6_rows[i]))
        lam[i] = jv
        vv[i] = _fix_ties_and_signs(jv, jw, 1.0)

    vals_live = lam * scale[live, None]
    vals[live] = vals_live
    vecs[live] = vv
    if squeeze:
        return vals[0], vecs[0]
    return vals, vecs


def _isolated_eigvec(am: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Eigenvector for a well-isolated eigenvalue via row cross products."""
    d = am - lam[:, None, None] * np.eye(3)
    c01 = np.cross(d[:, 0, :], d[:, 1, :])
    c02 = np.cross(d[:, 0, :], d[:, 2, :])
    c12 = np.cross(d[:, 1, :], d[:, 2, :])
    cand = np.stack([c01, c02, c12], axis=1)
    norms = np.linalg.norm(cand, axis=2)
    best = np.argmax(norms, axis=1)
    v = cand[np.arange(cand.shape[0]), best, :]
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def perturb_stress_batch(
    r6: np.ndarray,
    gradu: np.ndarray,
    k: np.ndarray,
    component: int,
    permute: bool,
    delta_b: float,
    k_floor: float = 1.0e-10,
) -> np.ndarray:
    """Perturb a Reynolds-stress field toward a limiting componentality state.

    Per cell: extract the anisotropy of ``r6``, blend its eigenvalues
    toward the target-vertex triple with weight ``delta_b``, rebuild on
    the strain-rate eigenframe ordered consistently with the
    eddy-viscosity baseline (most-compressive direction first), reversed
    when ``permute`` is set. Cells with k <= k_floor pass through.

    Raises RealizabilityError (lazily imported) when a cell's anisotropy
    falls outside the realizable triangle.
    """
    r6 = np.ascontiguousarray(r6, dtype=np.float64)
    gradu = np.ascontiguousarray(gradu, dtype=np.float64)
    k = np.ascontiguousarray(k, dtype=np.float64)
    out = r6.copy()
    act = k > k_floor
    if not np.any(act):
        return out
    ka = k[act]

    b6 = r6[act] / (2.0 * ka[:, None])
    b6[:, :3] -= 1.0 / 3.0

    trace = b6[:, 0] + b6[:, 1] + b6[:, 2]
    off = np.abs(trace) > 1.0e-10
    if np.any(off):
        from ..errors import RealizabilityError

        cell = int(np.flatnonzero(act)[np.argmax(off)])
        raise RealizabilityError(
            f"cell {cell}: anisotropy trace {trace[off][0]:.6g} nonzero; "
            "kinetic energy inconsistent with the stress trace"
        )

    bvals, bvecs = eig3(b6)

    bad = bvals[:, 2] < (-1.0 / 3.0 - 1.0e-10)
    if np.any(bad):
        from ..errors import RealizabilityError

        cell = int(np.flatnonzero(act)[np.argmax(bad)])
        raise RealizabilityError(
            f"cell {cell}: anisotropy eigenvalue {bvals[bad][0][2]:.6g} "
            "below -1/3; stress not realizable"
        )

    target = VERTEX_EIGENVALUES[int(component)]
    lam = (1.0 - delta_b) * bvals + delta_b * target[None, :]

    s6 = mat_to_six(0.5 * (gradu[act] + gradu[act].transpose(0, 2, 1)))
    gvals, gvecs = eig3(s6)

    # Boussinesq-consistent frame: strain columns reordered so the largest
    # anisotropy eigenvalue sits on the most compressive strain direction.
    frame = gvecs[:, :, ::-1]
    if permute:
        frame = frame[:, :, ::-1]
    spread = gvals[:, 0] - gvals[:, 2]
    degen = spread <= TIE_GAP * np.maximum(1.0, np.abs(gvals).max(axis=1))
    if np.any(degen):
        frame = frame.copy()
        frame[degen] = bvecs[degen]

    recon = np.einsum("nij,nj,nkj->nik", frame, lam, frame)
    recon += np.eye(3) / 3.0
    out[act] = 2.0 * ka[:, None] * mat_to_six(recon)
    return out
