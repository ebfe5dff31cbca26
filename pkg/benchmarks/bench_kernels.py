"""Timing comparison of the compiled and pure-Python kernel backends.

Run as a script:  python benchmarks/bench_kernels.py [n_tensors]

Both backends are imported directly (bypassing the import-time backend
selection) so one process can time them side by side on identical
inputs, and their outputs are cross-checked while we are at it.
"""

from __future__ import annotations

import sys
import time

import numpy as np


def _make_inputs(n: int, rng: np.random.Generator):
    # realizable stresses: R = A A^T scaled to k = 1.5
    a = rng.uniform(-1.0, 1.0, size=(n, 3, 3))
    r = a @ np.transpose(a, (0, 2, 1))
    k = 0.5 * np.einsum("nii->n", r)
    r *= (1.5 / k)[:, None, None]
    r6 = np.stack(
        [r[:, 0, 0], r[:, 1, 1], r[:, 2, 2], r[:, 0, 1], r[:, 0, 2], r[:, 1, 2]],
        axis=1,
    )
    gradu = rng.uniform(-1.0, 1.0, size=(n, 3, 3))
    kfield = np.full(n, 1.5)
    return r6, gradu, kfield


def _time(fn, *args, repeats: int = 3):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> int:
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
    from eigenuq._kernels import pure

    try:
        from eigenuq._kernels import _fast
    except ImportError:
        _fast = None

    rng = np.random.default_rng(2024)
    r6, gradu, kfield = _make_inputs(n, rng)
    sym6 = np.stack(
        [rng.uniform(-1.0, 1.0, size=(n,)) for _ in range(6)], axis=1
    )

    print(f"batch size: {n}")
    backends = [("pure", pure)] + ([("compiled", _fast)] if _fast else [])
    results = {}
    for name, mod in backends:
        t_eig, eig_out = _time(mod.eig3, sym6)
        t_pert, pert_out = _time(
            mod.perturb_stress_batch, r6, gradu, kfield, 1, False, 1.0
        )
        results[name] = (t_eig, t_pert, eig_out, pert_out)
        print(
            f"{name:>9}: eig3 {t_eig * 1e3:9.2f} ms "
            f"({n / t_eig / 1e6:6.2f} M/s), "
            f"perturb {t_pert * 1e3:9.2f} ms ({n / t_pert / 1e6:6.2f} M/s)"
        )

    if _fast is None:
        print("compiled backend unavailable; nothing to compare")
        return 0

    t_eig_p, t_pert_p, eig_p, pert_p = results["pure"]
    t_eig_c, t_pert_c, eig_c, pert_c = results["compiled"]
    dv = np.max(np.abs(eig_p[0] - eig_c[0]))
    dr = np.max(np.abs(pert_p - pert_c))
    print(f"max |eigenvalue diff| = {dv:.3e}, max |stress diff| = {dr:.3e}")
    print(
        f"speedup: eig3 x{t_eig_p / t_eig_c:.1f}, "
        f"perturb x{t_pert_p / t_pert_c:.1f}"
    )
    if dv > 1e-12 or dr > 1e-10:
        print("BACKENDS DISAGREE")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
