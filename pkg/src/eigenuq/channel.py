"""Miniature 1D turbulent channel-flow solver.

Fully developed flow between plates, half-channel y in [0, 1] in units
of the half-height, velocities in wall units. The momentum balance is

    0 = 1 + d/dy[ nu du/dy + tau_t ],    nu = 1/Re_tau,

with no-slip at y=0 and symmetry (zero total flux) at the centerline.
The turbulent shear stress tau_t = -R_xy comes from a mixing-length
eddy viscosity with van Driest damping; the full stress tensor is
reconstructed through the linear eddy-viscosity form with the Bradshaw
relation k = |R_xy|/a1 supplying the kinetic energy.

Discretization: conservative second-order central differences on a
geometrically stretched node grid, fluxes at face midpoints, direct
tridiagonal solve per outer iteration. The laminar profile is an exact
solution of the discrete system at any resolution.

Perturbed solves freeze the converged baseline as the generator of the
stress field: k, nu_t, and the strain are taken from the baseline, the
perturbed target stress is built from them once, and the active stress
is under-relaxed toward the target while the momentum equation is
re-solved against it each outer iteration. Convergence requires both
the momentum residual and the active-to-target stress gap to fall
below the tolerance, so a run that stops early is reported unconverged
rather than silently incomplete.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from ._kernels import perturb_stress_batch
from .errors import GridError, InvalidMagnitude, IoError
from .perturb import PerturbationSpec
from .tensors import K_FLOOR, SymTensor3

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


@dataclass(frozen=True)
class ChannelParams:
    """Physical and numerical parameters of one channel solve."""

    retau: float = 180.0
    n_cells: int = 128
    stretching: float = 1.03
    kappa: float = 0.41
    a_plus: float = 26.0
    a1: float = 0.31
    tol: float = 1.0e-8
    max_iterations: int = 20000
    laminar: bool = False
    nut_relax: float = 0.3

    def __post_init__(self):
        if not self.retau > 0.0:
            raise InvalidMagnitude(f"retau must be positive, got {self.retau}")
        if not self.tol > 0.0:
            raise InvalidMagnitude(f"tol must be positive, got {self.tol}")
        if not self.stretching > 0.0:
            raise InvalidMagnitude(
                f"stretching must be positive, got {self.stretching}"
            )
        if self.max_iterations < 1:
            raise InvalidMagnitude("max_iterations must be at least 1")
        if not 0.0 < self.nut_relax <= 1.0:
            raise InvalidMagnitude(
                f"nut_relax must be in (0, 1], got {self.nut_relax}"
            )
        for name in ("kappa", "a_plus", "a1"):
            if not getattr(self, name) > 0.0:
                raise InvalidMagnitude(f"{name} must be positive")

    @property
    def nu(self) -> float:
        return 1.0 / self.retau


@dataclass(frozen=True)
class ChannelGrid:
    """Node coordinates with face midpoints and control volumes."""

    y: np.ndarray       # nodes, wall (0) to centerline (1), length N+1
    faces: np.ndarray   # face midpoints, length N
    h: np.ndarray       # node spacings, length N
    delta: np.ndarray   # per-node control volumes, length N+1


def build_grid(params: ChannelParams) -> ChannelGrid:
    """Geometrically stretched wall-normal grid.

    Spacings grow by the stretching ratio from the wall; the first node
    must land at y+ <= 1 for the given friction Reynolds number, else
    the grid is infeasible and GridError is raised.
    """
    n = int(params.n_cells)
    if n < 16:
        raise GridError(f"need at least 16 cells, got {n}")
    r = float(params.stretching)
    if abs(r - 1.0) < 1.0e-12:
        h = np.full(n, 1.0 / n)
    else:
        h0 = (r - 1.0) / (r**n - 1.0)
        h = h0 * r ** np.arange(n)
    y = np.concatenate([[0.0], np.cumsum(h)])
    y[-1] = 1.0
    h = np.diff(y)
    if y[1] * params.retau > 1.0 + 1.0e-12:
        raise GridError(
            f"first node sits at y+ = {y[1] * params.retau:.3g} > 1 for "
            f"retau={params.retau:g}; increase the cell count or stretching"
        )
    faces = 0.5 * (y[:-1] + y[1:])
    delta = np.empty(n + 1)
    delta[0] = 0.5 * h[0]
    delta[1:-1] = 0.5 * (y[2:] - y[:-2])
    delta[-1] = 0.5 * h[-1]
    for a in (y, faces, h, delta):
        a.flags.writeable = False
    return ChannelGrid(y=y, faces=faces, h=h, delta=delta)


def eddy_viscosity(y, dudy, params: ChannelParams):
    """Mixing-length eddy viscosity with van Driest wall damping.

    nu_t = (kappa * y * (1 - exp(-y+/A+)))^2 * |du/dy|, with
    y+ = y * retau. Zero at the wall and wherever the shear vanishes.
    """
    y = np.asarray(y, dtype=np.float64)
    dudy = np.asarray(dudy, dtype=np.float64)
    yplus = y * params.retau
    mixing = params.kappa * y * (1.0 - np.exp(-yplus / params.a_plus))
    return mixing * mixing * np.abs(dudy)


@dataclass(frozen=True)
class ChannelSolution:
    """Converged (or honestly unconverged) state of one channel solve."""

    params: ChannelParams
    spec: PerturbationSpec | None
    y: np.ndarray
    u: np.ndarray
    nu_t: np.ndarray
    k: np.ndarray
    stresses: tuple[SymTensor3, ...]
    production: np.ndarray
    converged: bool
    iterations: int
    residuals: tuple[float, ...]


@dataclass(frozen=True)
class QoiRecord:
    """Scalar quantities of interest plus the full velocity profile."""

    c_f: float
    u_bulk: float
    u_centerline: float
    y: np.ndarray
    u: np.ndarray
    converged: bool


def _solve_momentum(grid: ChannelGrid, g_face: np.ndarray,
                    t_face: np.ndarray) -> np.ndarray:
    """Direct tridiagonal solve of the discrete momentum balance.

    g_face carries the implicit diffusivity (nu, plus nu_t when the
    closure is folded in); t_face is the explicit turbulent shear
    stress at faces. Returns nodal u with u[0] = 0.
    """
    n = grid.h.shape[0]
    w = g_face / grid.h                     # face conductances
    diag = np.empty(n)
    sub = np.zeros(n - 1)
    sup = np.zeros(n - 1)
    rhs = np.empty(n)
    # Interior nodes 1..n-1 map to rows 0..n-2.
    diag[: n - 1] = -(w[:-1] + w[1:])
    sup[:] = w[1:]
    sub[: n - 2] = w[1:-1]
    rhs[: n - 1] = -grid.delta[1:-1] - (t_face[1:] - t_face[:-1])
    # Centerline node: zero total flux through the symmetry plane.
    diag[n - 1] = -w[-1]
    sub[n - 2] = w[-1]
    rhs[n - 1] = -grid.delta[-1] + t_face[-1]
    ab = np.zeros((3, n))
    ab[0, 1:] = sup
    ab[1, :] = diag
    ab[2, :-1] = sub
    x = solve_banded((1, 1), ab, rhs)
    return np.concatenate([[0.0], x])


def _momentum_residual(grid: ChannelGrid, g_face: np.ndarray,
                       t_face: np.ndarray, u: np.ndarray) -> float:
    """Max-norm residual of 1 + d/dy[g du/dy + tau_t] on interior and
    centerline control volumes."""
    flux = g_face * np.diff(u) / grid.h + t_face
    res_int = 1.0 + (flux[1:] - flux[:-1]) / grid.delta[1:-1]
    res_cl = 1.0 + (0.0 - flux[-1]) / grid.delta[-1]
    return float(max(np.max(np.abs(res_int)), abs(res_cl)))


def _nodal_gradient(grid: ChannelGrid, u: np.ndarray) -> np.ndarray:
    """Second-order du/dy at nodes (exact for quadratic profiles);
    forced to zero at the centerline by symmetry."""
    y, h = grid.y, grid.h
    n = h.shape[0]
    dudy = np.empty(n + 1)
    hm = h[: n - 1]
    hp = h[1:]
    um, uc, up = u[:-2], u[1:-1], u[2:]
    dudy[1:-1] = (hm**2 * up - hp**2 * um + (hp**2 - hm**2) * uc) / (
        hm * hp * (hm + hp)
    )
    # One-sided quadratic at the wall keeps the laminar profile exact.
    y0, y1, y2 = y[0], y[1], y[2]
    dudy[0] = (
        u[0] * (2 * y0 - y1 - y2) / ((y0 - y1) * (y0 - y2))
        + u[1] * (y0 - y2) / ((y1 - y0) * (y1 - y2))
        + u[2] * (y0 - y1) / ((y2 - y0) * (y2 - y1))
    )
    dudy[-1] = 0.0
    return dudy


def _boussinesq_six(k: np.ndarray, nu_t: np.ndarray,
                    dudy: np.ndarray) -> np.ndarray:
    """(n, 6) linear eddy-viscosity stress field under pure shear."""
    n = k.shape[0]
    r6 = np.zeros((n, 6))
    r6[:, 0] = r6[:, 1] = r6[:, 2] = 2.0 * k / 3.0
    r6[:, 3] = -nu_t * dudy
    return r6


def _gradu_field(dudy: np.ndarray) -> np.ndarray:
    g = np.zeros((dudy.shape[0], 3, 3))
    g[:, 0, 1] = dudy
    return g


def _production_field(r6: np.ndarray, dudy: np.ndarray) -> np.ndarray:
    return -r6[:, 3] * dudy


def _stress_tuple(r6: np.ndarray) -> tuple[SymTensor3, ...]:
    return tuple(SymTensor3.from_six(row) for row in r6)


def solve_baseline(params: ChannelParams) -> ChannelSolution:
    """Fixed-point solve of the unperturbed closure.

    Each outer iteration recomputes the eddy viscosity from the current
    profile, under-relaxes it (factor nut_relax), and re-solves the
    momentum equation with the closure folded into the diffusivity.
    The reported residual is the fresh nonlinear one: fluxes evaluated
    with the unrelaxed eddy viscosity of the newly solved profile.
    """
    grid = build_grid(params)
    nfaces = grid.h.shape[0]
    zeros = np.zeros(nfaces)
    nut_face = np.zeros(nfaces)
    u = _solve_momentum(grid, np.full(nfaces, params.nu), zeros)
    residuals: list[float] = []
    converged = False
    iterations = 0
    for iterations in range(1, params.max_iterations + 1):
        if not params.laminar:
            dudy_f = np.diff(u) / grid.h
            nut_new = eddy_viscosity(grid.faces, dudy_f, params)
            nut_face = nut_face + params.nut_relax * (nut_new - nut_face)
        u = _solve_momentum(grid, params.nu + nut_face, zeros)
        dudy_f = np.diff(u) / grid.h
        nut_fresh = (
            zeros if params.laminar else eddy_viscosity(grid.faces, dudy_f, params)
        )
        res = _momentum_residual(grid, params.nu + nut_fresh, zeros, u)
        residuals.append(res)
        if res <= params.tol:
            converged = True
            break
    dudy_n = _nodal_gradient(grid, u)
    nut_n = (
        np.zeros(grid.y.shape[0])
        if params.laminar
        else eddy_viscosity(grid.y, dudy_n, params)
    )
    k_n = nut_n * np.abs(dudy_n) / params.a1
    r6 = _boussinesq_six(k_n, nut_n, dudy_n)
    return ChannelSolution(
        params=params,
        spec=None,
        y=np.array(grid.y),
        u=u,
        nu_t=nut_n,
        k=k_n,
        stresses=_stress_tuple(r6),
        production=_production_field(r6, dudy_n),
        converged=converged,
        iterations=iterations,
        residuals=tuple(residuals),
    )


def solve_perturbed(params: ChannelParams,
                    spec: PerturbationSpec) -> ChannelSolution:
    """Channel solve with the perturbed stress injected iteratively.

    The converged baseline supplies the frozen stress generator (k,
    nu_t, strain); the perturbed target is assembled from it, and each
    outer iteration relaxes the active stress toward the target (factor
    spec.urlx) before re-solving the momentum equation against the
    active shear stress. Converged means the momentum residual and the
    active-to-target gap are both at or below the tolerance.
    """
    base = solve_baseline(params)
    grid = build_grid(params)
    nfaces = grid.h.shape[0]

    dudy_f = np.diff(base.u) / grid.h
    nut_f = (
        np.zeros(nfaces)
        if params.laminar
        else eddy_viscosity(grid.faces, dudy_f, params)
    )
    k_f = nut_f * np.abs(dudy_f) / params.a1
    rbase_f = _boussinesq_six(k_f, nut_f, dudy_f)
    rstar_f = perturb_stress_batch(
        rbase_f, _gradu_field(dudy_f), k_f,
        int(spec.component), spec.permute, spec.delta_b, K_FLOOR,
    )

    dudy_n = _nodal_gradient(grid, base.u)
    nut_n = base.nu_t
    k_n = base.k
    rbase_n = _boussinesq_six(k_n, nut_n, dudy_n)
    rstar_n = perturb_stress_batch(
        rbase_n, _gradu_field(dudy_n), k_n,
        int(spec.component), spec.permute, spec.delta_b, K_FLOOR,
    )

    ract_f = rbase_f.copy()
    ract_n = rbase_n.copy()
    u = np.array(base.u)
    nu_face = np.full(nfaces, params.nu)
    residuals: list[float] = []
    converged = False
    iterations = 0
    for iterations in range(1, params.max_iterations + 1):
        if spec.urlx == 1.0:
            ract_f = rstar_f.copy()
            ract_n = rstar_n.copy()
        else:
            ract_f = ract_f + spec.urlx * (rstar_f - ract_f)
            ract_n = ract_n + spec.urlx * (rstar_n - ract_n)
        t_face = -ract_f[:, 3]
        u = _solve_momentum(grid, nu_face, t_face)
        mom = _momentum_residual(grid, nu_face, t_face, u)
        gap = max(
            float(np.max(np.abs(ract_f - rstar_f))),
            float(np.max(np.abs(ract_n - rstar_n))),
        )
        res = max(mom, gap)
        residuals.append(res)
        if res <= params.tol:
            converged = True
            break
    return ChannelSolution(
        params=params,
        spec=spec,
        y=np.array(grid.y),
        u=u,
        nu_t=np.array(nut_n),
        k=np.array(k_n),
        stresses=_stress_tuple(ract_n),
        production=_production_field(ract_n, dudy_n),
        converged=bool(base.converged and converged),
        iterations=iterations,
        residuals=tuple(residuals),
    )


def qoi_extract(sol: ChannelSolution) -> QoiRecord:
    """Skin friction, bulk and centerline velocity, full profile.

    In wall units the skin-friction coefficient reduces to
    c_f = 2 / u_bulk^2 (laminar flow then gives exactly 6 / Re_bulk).
    """
    u_bulk = float(_trapezoid(sol.u, sol.y))
    u_cl = float(sol.u[-1])
    c_f = 2.0 / (u_bulk * u_bulk) if u_bulk != 0.0 else math.inf
    return QoiRecord(
        c_f=c_f,
        u_bulk=u_bulk,
        u_centerline=u_cl,
        y=np.array(sol.y),
        u=np.array(sol.u),
        converged=sol.converged,
    )


SOLUTION_COLUMNS = ("y", "u", "nu_t", "k", "R_xx", "R_yy", "R_zz", "R_xy", "P")


def write_solution(sol: ChannelSolution, path) -> None:
    """Plain-text columnar export, one row per grid node.

    Header lines start with '#': run parameters, then the column names
    in the exact emitted order.
    """
    r6 = np.array([s.as_six() for s in sol.stresses])
    spec = sol.spec
    spec_part = (
        "baseline"
        if spec is None
        else (
            f"component={int(spec.component)} permute={spec.permute} "
            f"delta_b={spec.delta_b:g} urlx={spec.urlx:g}"
        )
    )
    lines = [
        f"# retau={sol.params.retau:g} n_cells={sol.params.n_cells} "
        f"stretching={sol.params.stretching:g} laminar={sol.params.laminar} "
        f"{spec_part} converged={sol.converged} iterations={sol.iterations}",
        "# " + " ".join(SOLUTION_COLUMNS),
    ]
    cols = np.column_stack(
        [sol.y, sol.u, sol.nu_t, sol.k,
         r6[:, 0], r6[:, 1], r6[:, 2], r6[:, 3], sol.production]
    )
    for row in cols:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    try:
        with open(path, "w", encoding="utf-8") as f:
            f.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write solution file {path}: {exc}") from exc


@dataclass(frozen=True)
class LoadedSolution:
    """Columns read back from a solution file, plus header metadata."""

    header: dict
    data: dict


def load_solution(path) -> LoadedSolution:
    """Read a solution file written by write_solution."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = f.read()
    except OSError as exc:
        raise IoError(f"cannot read solution file {path}: {exc}") from exc
    header: dict = {}
    rows = []
    for line in raw.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for token in line[1:].split():
                if "=" in token:
                    key, _, value = token.partition("=")
                    header[key] = _header_value(value)
            continue
        rows.append([float(v) for v in line.split()])
    arr = np.array(rows)
    data = {name: arr[:, i] for i, name in enumerate(SOLUTION_COLUMNS)}
    return LoadedSolution(header=header, data=data)


def _header_value(text: str):
    if text == "True":
        return True
    if text == "False":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text
