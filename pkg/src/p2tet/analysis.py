"""Manufactured problems, interpolation, error norms, and rate studies.

The three built-in problems vanish on the boundary of the unit cube and
come with closed-form gradients and Laplacians; polynomial problems are
generated from exact rational expansions, so the forcing term is analytic,
never a numerical derivative.  Error norms are evaluated element by element
with a quadrature degree high enough that the reported fourth-order
quantities are unpolluted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .exactmath import MultiPoly, X, Y, Z
from .fem import ref_p2_gradients, ref_p2_values, tet_quadrature
from .lift import CUBIC_MONOMIALS, LiftedSolution, lift_all
from .mesh import KUHN_TETS, Mesh, build_uniform_mesh
from .system import ConvergenceFailure, assemble, cg_solve

_CHUNK = 1 << 15

#: Error families in report order; each maps to an L2 and an H1 column pair.
ERROR_KEYS = (
    "l2_ihu_uh",
    "h1_ihu_uh",
    "l2_u_uh",
    "h1_u_uh",
    "l2_u_l3uh",
    "h1_u_l3uh",
)

TABLE_BLOCKS = (
    ("||I_h u - u_h||_0", "l2_ihu_uh", "|I_h u - u_h|_1", "h1_ihu_uh"),
    ("||u - u_h||_0", "l2_u_uh", "|u - u_h|_1", "h1_u_uh"),
    ("||u - L3 u_h||_0", "l2_u_l3uh", "|u - L3 u_h|_1", "h1_u_l3uh"),
)


@dataclass(frozen=True)
class FieldFunction:
    """Exact solution bundle: value, gradient, and Laplacian callables.

    All three accept an (m, 3) array of points and return (m,) or (m, 3).
    """

    name: str
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    laplacian: Callable[[np.ndarray], np.ndarray]

    def rhs(self) -> Callable[[np.ndarray], np.ndarray]:
        """The Poisson load, minus the Laplacian."""
        lap = self.laplacian
        return lambda points: -lap(points)


class _PolyEval:
    """Fast vectorized evaluation of a fixed rational polynomial."""

    def __init__(self, poly: MultiPoly):
        if poly.terms:
            self.exps = np.array(sorted(poly.terms), dtype=np.int64)
            self.coeffs = np.array(
                [float(poly.terms[tuple(e)]) for e in self.exps]
            )
        else:
            self.exps = np.zeros((0, 3), dtype=np.int64)
            self.coeffs = np.zeros(0)
        self.max_exp = int(self.exps.max()) if len(self.exps) else 0

    def __call__(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        powers = np.ones((3, pts.shape[0], self.max_exp + 1))
        for d in range(3):
            for e in range(1, self.max_exp + 1):
                powers[d, :, e] = powers[d, :, e - 1] * pts[:, d]
        out = np.zeros(pts.shape[0])
        for (a, b, c), q in zip(self.exps, self.coeffs):
            out += q * powers[0, :, a] * powers[1, :, b] * powers[2, :, c]
        return out


def _field_from_poly(name: str, poly: MultiPoly) -> FieldFunction:
    value = _PolyEval(poly)
    partials = [_PolyEval(poly.partial(d)) for d in range(3)]
    lap = _PolyEval(poly.laplacian())

    def gradient(points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.stack([p(pts) for p in partials], axis=-1)

    return FieldFunction(name=name, value=value, gradient=gradient, laplacian=lap)


def _trig_field() -> FieldFunction:
    pi = math.pi

    def value(points):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return np.sin(pi * p[:, 0]) * np.sin(pi * p[:, 1]) * np.sin(2 * pi * p[:, 2])

    def gradient(points):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        sx, cx = np.sin(pi * p[:, 0]), np.cos(pi * p[:, 0])
        sy, cy = np.sin(pi * p[:, 1]), np.cos(pi * p[:, 1])
        sz, cz = np.sin(2 * pi * p[:, 2]), np.cos(2 * pi * p[:, 2])
        return np.stack(
            [pi * cx * sy * sz, pi * sx * cy * sz, 2 * pi * sx * sy * cz], axis=-1
        )

    def laplacian(points):
        return -6.0 * pi**2 * value(points)

    return FieldFunction(name="trig", value=value, gradient=gradient, laplacian=laplacian)


def builtin_problem(problem_id: str) -> FieldFunction:
    """One of the three built-in manufactured solutions.

    * ``poly1``: 2^6 x(1-x) y(1-y) (z+1)(2-z) z(1-z)
    * ``trig``:  sin(pi x) sin(pi y) sin(2 pi z)
    * ``poly2``: 2^10 (x-x^2)^2 (y-y^2)^2 (2z-1) z (z-1)

    All three vanish on the boundary of the unit cube.
    """
    if problem_id == "poly1":
        poly = 64 * X * (1 - X) * Y * (1 - Y) * (Z + 1) * (2 - Z) * Z * (1 - Z)
        return _field_from_poly("poly1", poly)
    if problem_id == "trig":
        return _trig_field()
    if problem_id == "poly2":
        poly = 1024 * (X - X**2) ** 2 * (Y - Y**2) ** 2 * (2 * Z - 1) * Z * (Z - 1)
        return _field_from_poly("poly2", poly)
    raise ValueError(f"unknown problem id {problem_id!r}; use poly1, trig, or poly2")


def nodal_interpolate(mesh: Mesh, u: FieldFunction) -> np.ndarray:
    """Values of ``u`` at every quadratic node, one coefficient per node."""
    return np.asarray(u.value(mesh.node_coords), dtype=float)


#: Slot index by descending order of the cube-local coordinates.
_SLOT_BY_DESC = {
    (0, 1, 2): 0,  # x >= y >= z
    (1, 0, 2): 1,  # y >= x >= z
    (1, 2, 0): 2,  # y >= z >= x
    (2, 1, 0): 3,  # z >= y >= x
    (2, 0, 1): 4,  # z >= x >= y
    (0, 2, 1): 5,  # x >= z >= y
}


def fe_evaluate(mesh: Mesh, coeffs: np.ndarray, points) -> np.ndarray:
    """Point values of the quadratic finite element function ``coeffs``.

    Each point is located in its cube and slot via the coordinate ordering
    that defines the decomposition; points on shared faces evaluate
    identically from either side because the function is continuous.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = mesh.n
    cube = np.clip(np.floor(pts * n), 0, n - 1).astype(np.int64)
    local = pts * n - cube
    en = mesh.element_nodes
    out = np.empty(pts.shape[0])
    for i in range(pts.shape[0]):
        loc = local[i]
        s = _SLOT_BY_DESC[tuple(np.argsort(-loc, kind="stable"))]
        chain = KUHN_TETS[s].astype(float)
        ref = np.linalg.solve((chain[1:] - chain[0]).T, loc - chain[0])
        tet = 6 * ((cube[i, 0] * n + cube[i, 1]) * n + cube[i, 2]) + s
        out[i] = ref_p2_values(ref.reshape(1, 3))[:, 0] @ coeffs[en[tet]]
    return out


def _slot_geometry(slot: int, h: float):
    chain = KUHN_TETS[slot].astype(float)
    jac_unit = (chain[1:] - chain[0]).T
    inv = np.linalg.inv(h * jac_unit)
    return chain[0], jac_unit, inv


def _fe_norms(mesh: Mesh, coeffs: np.ndarray, u: FieldFunction | None, degree: int):
    rule = tet_quadrature(degree)
    basis = ref_p2_values(rule.points)
    grads_ref = ref_p2_gradients(rule.points)
    h = mesh.h
    weights = rule.weights
    corners = mesh.cube_corners
    l2_sq = 0.0
    h1_sq = 0.0
    for s in range(6):
        v0, jac_unit, inv = _slot_geometry(s, h)
        pts_local = rule.points @ jac_unit.T + v0
        grads_mapped = grads_ref @ inv  # (10, nq, 3)
        en = mesh.element_nodes[s::6]
        for lo in range(0, corners.shape[0], _CHUNK):
            hi = min(lo + _CHUNK, corners.shape[0])
            u_el = coeffs[en[lo:hi]]  # (nc, 10)
            vals = u_el @ basis  # (nc, nq)
            grads = np.einsum("ci,iqd->cqd", u_el, grads_mapped)
            if u is not None:
                x = ((corners[lo:hi, None, :] + pts_local[None, :, :]) * h).reshape(-1, 3)
                vals = vals - u.value(x).reshape(vals.shape)
                grads = grads - u.gradient(x).reshape(grads.shape)
            l2_sq += h**3 * float((vals**2 @ weights).sum())
            h1_sq += h**3 * float(((grads**2).sum(axis=2) @ weights).sum())
    return math.sqrt(l2_sq), math.sqrt(h1_sq)


def _lift_norms(mesh: Mesh, lifted: LiftedSolution, u: FieldFunction | None, degree: int):
    rule = tet_quadrature(degree)
    h = mesh.h
    weights = rule.weights
    corners = mesh.cube_corners
    exps = np.array(CUBIC_MONOMIALS, dtype=np.int64)
    sign_key = ((lifted.signs < 0) * np.array([4, 2, 1])).sum(axis=1)
    l2_sq = 0.0
    h1_sq = 0.0
    for s in range(6):
        v0, jac_unit, _ = _slot_geometry(s, h)
        pts_local = rule.points @ jac_unit.T + v0  # (nq, 3) in the unit cube
        for key in np.unique(sign_key):
            cubes = np.flatnonzero(sign_key == key)
            signs = lifted.signs[cubes[0]]
            offset = (signs < 0).astype(float)
            t = signs * (pts_local - offset)  # (nq, 3) local lift frame
            design = np.ones((len(weights), len(exps)))
            ddesign = np.zeros((len(weights), len(exps), 3))
            for col, (a, b, c) in enumerate(exps):
                design[:, col] = t[:, 0] ** a * t[:, 1] ** b * t[:, 2] ** c
                for d, e in enumerate((a, b, c)):
                    if e:
                        down = [a, b, c]
                        down[d] -= 1
                        ddesign[:, col, d] = (
                            e
                            * t[:, 0] ** down[0]
                            * t[:, 1] ** down[1]
                            * t[:, 2] ** down[2]
                            * signs[d]
                            / h
                        )
            for lo in range(0, len(cubes), _CHUNK):
                sel = cubes[lo : lo + _CHUNK]
                cf = lifted.coeffs[sel]  # (nc, 20)
                vals = cf @ design.T  # (nc, nq)
                grads = np.einsum("ck,qkd->cqd", cf, ddesign)
                if u is not None:
                    x = ((corners[sel, None, :] + pts_local[None, :, :]) * h).reshape(-1, 3)
                    vals = vals - u.value(x).reshape(vals.shape)
                    grads = grads - u.gradient(x).reshape(grads.shape)
                l2_sq += h**3 * float((vals**2 @ weights).sum())
                h1_sq += h**3 * float(((grads**2).sum(axis=2) @ weights).sum())
    return math.sqrt(l2_sq), math.sqrt(h1_sq)


def error_norms(mesh: Mesh, approx, u: FieldFunction | None = None, degree: int = 8):
    """L2 norm and H1 seminorm of ``approx - u`` (or of ``approx`` alone).

    ``approx`` is either a nodal coefficient vector of the quadratic space
    or a :class:`LiftedSolution`; lifts are integrated cube by cube over the
    six tetrahedra of each cube.
    """
    if degree < 2:
        raise ValueError("error quadrature degree must be at least 2")
    if isinstance(approx, LiftedSolution):
        return _lift_norms(mesh, approx, u, degree)
    return _fe_norms(mesh, np.asarray(approx, dtype=float), u, degree)


@dataclass
class StudyOptions:
    """Knobs of a convergence study.

    ``load`` selects how the forcing term enters the right-hand side:
    ``"interpolated"`` (default) integrates the quadratic nodal interpolant
    of f exactly, ``"quadrature"`` integrates f itself with the load rule.
    """

    cg_tol: float = 1e-12
    load_degree: int = 8
    error_degree: int = 8
    lift: bool = True
    load: str = "interpolated"
    maxit: int | None = None


@dataclass
class LevelRecord:
    level: int
    n: int
    h: float
    dofs: int
    cg_iterations: int | None
    cg_residual: float | None
    cg_seconds: float | None
    errors: dict[str, float | None]
    rates: dict[str, float | None] = field(default_factory=dict)
    failure: str | None = None


@dataclass
class ConvergenceReport:
    problem: str
    levels: list[LevelRecord]

    @property
    def ok(self) -> bool:
        return all(rec.failure is None for rec in self.levels)

    # -- serialization ------------------------------------------------------

    def to_json_obj(self) -> dict:
        out = {"problem": self.problem, "levels": []}
        for rec in self.levels:
            out["levels"].append(
                {
                    "level": rec.level,
                    "n": rec.n,
                    "h": rec.h,
                    "dofs": rec.dofs,
                    "cg": {
                        "iterations": rec.cg_iterations,
                        "residual": rec.cg_residual,
                    },
                    "errors": {k: rec.errors.get(k) for k in ERROR_KEYS},
                    "rates": {k: rec.rates.get(k) for k in ERROR_KEYS},
                    **({"failure": rec.failure} if rec.failure else {}),
                }
            )
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2) + "\n"

    def to_csv(self) -> str:
        cols = ["problem", "level", "n", "h", "dofs", "cg_iterations", "cg_residual"]
        for key in ERROR_KEYS:
            cols.extend([key, f"rate_{key}"])
        lines = [",".join(cols)]
        for rec in self.levels:
            row = [
                self.problem,
                str(rec.level),
                str(rec.n),
                repr(rec.h),
                str(rec.dofs),
                "" if rec.cg_iterations is None else str(rec.cg_iterations),
                "" if rec.cg_residual is None else repr(rec.cg_residual),
            ]
            for key in ERROR_KEYS:
                err = rec.errors.get(key)
                rate = rec.rates.get(key)
                row.append("" if err is None else repr(err))
                row.append("" if rate is None else f"{rate:.2f}")
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def format_table(self, blocks: Sequence[tuple] = TABLE_BLOCKS) -> str:
        lines = [f"problem: {self.problem}"]
        for l2_name, l2_key, h1_name, h1_key in blocks:
            if all(rec.errors.get(l2_key) is None for rec in self.levels):
                continue
            lines.append("")
            lines.append(
                f"{'G':>2}  {l2_name:>18} {'O(h^r)':>7}  {h1_name:>18} {'O(h^r)':>7}"
            )
            for rec in self.levels:
                cells = [f"{rec.level:>2}"]
                for key in (l2_key, h1_key):
                    err = rec.errors.get(key)
                    rate = rec.rates.get(key)
                    cells.append(
                        f"{format_sci(err) if err is not None else '---':>19}"
                        f" {('%.2f' % rate) if rate is not None else '  --':>7}"
                    )
                lines.append("  ".join(cells))
        return "\n".join(lines) + "\n"


def format_sci(value: float) -> str:
    """Three-significant-digit scientific form with a 0.XXX mantissa."""
    if value == 0:
        return "0.000E+00"
    exp = math.floor(math.log10(abs(value))) + 1
    mant = abs(value) / 10.0**exp
    imant = round(mant * 1000)
    if imant == 1000:
        imant = 100
        exp += 1
    sign = "-" if value < 0 else ""
    return f"{sign}0.{imant:03d}E{exp:+03d}"


def _compute_rates(levels: list[LevelRecord]) -> None:
    for prev, cur in zip([None] + levels[:-1], levels):
        for key in ERROR_KEYS:
            err = cur.errors.get(key)
            if err is None:
                cur.rates[key] = None
                continue
            prev_err = prev.errors.get(key) if prev is not None else None
            if prev_err is None or prev_err <= 0 or err <= 0:
                cur.rates[key] = 0.0
            else:
                cur.rates[key] = math.log2(prev_err / err)


def convergence_study(
    problem: str | FieldFunction,
    levels: Sequence[int],
    options: StudyOptions | None = None,
) -> ConvergenceReport:
    """Run the full pipeline per level and collect errors and rates.

    Level ``g`` uses ``n = 2**(g-1)`` cubes per axis.  Levels must be
    ascending; rates are log2 ratios against the previous computed level and
    the first level reports 0.00.  A solver failure marks its level and the
    study continues.
    """
    levels = [int(g) for g in levels]
    if not levels:
        raise ValueError("at least one level is required")
    if any(g < 1 for g in levels):
        raise ValueError("levels must be >= 1")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("levels must be strictly ascending")
    opts = options or StudyOptions()
    if opts.load_degree < 6:
        raise ValueError("load quadrature degree must be at least 6")
    if opts.error_degree < 8:
        raise ValueError("error quadrature degree must be at least 8")
    if opts.load not in ("interpolated", "quadrature"):
        raise ValueError(f"unknown load mode {opts.load!r}")
    u = builtin_problem(problem) if isinstance(problem, str) else problem

    records: list[LevelRecord] = []
    for g in levels:
        n = 2 ** (g - 1)
        mesh = build_uniform_mesh(n)
        system = assemble(
            mesh,
            u.rhs(),
            tet_quadrature(opts.load_degree),
            interpolate_load=(opts.load == "interpolated"),
        )
        record = LevelRecord(
            level=g,
            n=n,
            h=mesh.h,
            dofs=system.rhs.shape[0],
            cg_iterations=None,
            cg_residual=None,
            cg_seconds=None,
            errors={k: None for k in ERROR_KEYS},
        )
        try:
            solution, stats = cg_solve(system, tol=opts.cg_tol, maxit=opts.maxit)
        except ConvergenceFailure as exc:
            record.failure = str(exc)
            record.cg_iterations = exc.stats.iterations
            record.cg_residual = exc.stats.residual
            record.cg_seconds = exc.stats.seconds
            records.append(record)
            continue
        record.cg_iterations = stats.iterations
        record.cg_residual = stats.residual
        record.cg_seconds = stats.seconds

        u_h = np.zeros(mesh.num_nodes)
        u_h[system.dof_map] = solution
        interp = nodal_interpolate(mesh, u)
        interp[mesh.boundary_mask] = 0.0

        l2, h1 = error_norms(mesh, u_h - interp, None, opts.error_degree)
        record.errors["l2_ihu_uh"] = l2
        record.errors["h1_ihu_uh"] = h1
        l2, h1 = error_norms(mesh, u_h, u, opts.error_degree)
        record.errors["l2_u_uh"] = l2
        record.errors["h1_u_uh"] = h1
        if opts.lift and n >= 2:
            lifted = lift_all(mesh, u_h)
            l2, h1 = error_norms(mesh, lifted, u, opts.error_degree)
            record.errors["l2_u_l3uh"] = l2
            record.errors["h1_u_l3uh"] = h1
        records.append(record)

    _compute_rates(records)
    name = u.name if isinstance(problem, FieldFunction) else problem
    return ConvergenceReport(problem=name, levels=records)
