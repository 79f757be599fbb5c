"""Discrete null homotopies: swept volume, index traces, lower bound.

A homotopy is a sequence of vertex-position frames over a fixed sphere
connectivity, linear in time between frames, ending collapsed at a
point. The swept volume (multiplicity-counting, via the area formula)
is compared against the degree-weighted volume of the initial surface:
any null homotopy must sweep at least that much.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import MeshFormatError, WindingGuardError
from .geom3d.crossings import round_winding, solid_angle_winding_many
from .geom3d.mesh import TriangleMesh, load_mesh, save_off
from .geom3d.regions import TotalDegree, total_degree

__all__ = [
    "DiscreteHomotopy",
    "SweptVolume",
    "IndexTrace",
    "SenseReport",
    "LowerBoundReport",
    "swept_volume",
    "index_trace",
    "sense_preserving_report",
    "verify_lower_bound",
    "radial_contraction",
    "translate_return_contract",
    "wobble_contraction",
    "builtin_homotopy",
    "load_frames",
    "save_frames",
]

BUILTIN_NAMES = ("radial", "translate-return", "wobble")


@dataclass(frozen=True)
class DiscreteHomotopy:
    """Vertex frames over shared triangle connectivity, collapsing to a point.

    frames: (M+1, n, 3) positions at times[0]=0 < ... < times[M]=1.
    Positions move linearly between frames. The final frame must sit
    within collapse_tol (relative to the first frame's extent) of a
    single point; that point is the terminal of the null homotopy.
    """

    triangles: np.ndarray
    frames: np.ndarray
    times: np.ndarray

    def __post_init__(self):
        tris = np.ascontiguousarray(np.asarray(self.triangles, dtype=np.int64))
        frames = np.ascontiguousarray(np.asarray(self.frames, dtype=np.float64))
        if frames.ndim != 3 or frames.shape[2] != 3:
            raise ValueError(f"frames must be (M+1, n, 3), got {frames.shape}")
        if len(frames) < 2:
            raise ValueError("homotopy needs at least 2 frames")
        if tris.ndim != 2 or tris.shape[1] != 3:
            raise ValueError(f"triangles must be (m, 3), got {tris.shape}")
        if tris.size and tris.max() >= frames.shape[1]:
            raise ValueError("triangle index out of range for frames")
        times = np.asarray(self.times, dtype=np.float64)
        if times.shape != (len(frames),):
            raise ValueError("times must have one entry per frame")
        if times[0] != 0.0 or times[-1] != 1.0 or (np.diff(times) <= 0).any():
            raise ValueError("times must increase strictly from 0 to 1")
        object.__setattr__(self, "triangles", tris)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "times", times)

        terminal = frames[-1].mean(axis=0)
        spread = float(np.linalg.norm(frames[-1] - terminal, axis=1).max())
        lo = frames[0].min(axis=0)
        hi = frames[0].max(axis=0)
        scale = float(np.linalg.norm(hi - lo)) or 1.0
        if spread > 1e-6 * scale:
            raise ValueError(
                f"final frame is not collapsed: vertex spread {spread:.3e} "
                f"exceeds tolerance {1e-6 * scale:.3e}"
            )

    @property
    def n_steps(self) -> int:
        return len(self.frames) - 1

    @property
    def terminal(self) -> np.ndarray:
        return self.frames[-1].mean(axis=0)

    def initial_mesh(self) -> TriangleMesh:
        return TriangleMesh(self.frames[0], self.triangles)

    def mesh_at(self, t: float) -> TriangleMesh:
        return TriangleMesh(self.positions_at(t), self.triangles)

    def positions_at(self, t: float) -> np.ndarray:
        """Vertex positions at time t, linear between frames."""
        t = min(max(float(t), 0.0), 1.0)
        k = int(np.searchsorted(self.times, t, side="right") - 1)
        k = min(k, self.n_steps - 1)
        t0, t1 = self.times[k], self.times[k + 1]
        alpha = (t - t0) / (t1 - t0)
        return self.frames[k] * (1.0 - alpha) + self.frames[k + 1] * alpha


# --------------------------------------------------------------------------
# Swept volume via prism decomposition


@dataclass(frozen=True)
class SweptVolume:
    """Multiplicity-counting swept volume with a prism quality annex."""

    volume: float
    per_step: tuple[float, ...]
    stationary_prisms: int  # all three tetrahedra essentially zero
    mixed_sign_prisms: int  # fold-through within one prism

    def to_dict(self) -> dict:
        return {
            "volume": self.volume,
            "per_step": list(self.per_step),
            "stationary_prisms": self.stationary_prisms,
            "mixed_sign_prisms": self.mixed_sign_prisms,
        }


def _tet_volumes(p, q, r, s) -> np.ndarray:
    return np.einsum("ij,ij->i", q - p, np.cross(r - p, s - p)) / 6.0


def swept_volume(h: DiscreteHomotopy) -> SweptVolume:
    """Volume swept by the moving surface, counted with multiplicity.

    Each triangle crossed with one time step forms a prism; prisms are
    cut into three tetrahedra using diagonals that always run from the
    higher-numbered top vertex to the lower-numbered bottom vertex, so
    neighboring prisms agree on their shared quad faces and the
    decomposition is gap-free. Absolute tetra volumes are summed, which
    is exactly the area-formula value for piecewise-linear motion:
    folded (inverted) prisms count positively, stationary prisms
    contribute nothing.
    """
    tris = np.sort(h.triangles, axis=1)
    lo = h.frames[0].min(axis=0)
    hi = h.frames[0].max(axis=0)
    scale = float(np.linalg.norm(hi - lo)) or 1.0
    tiny = (1e-12 * scale) ** 3

    per_step = []
    stationary = 0
    mixed = 0
    for k in range(h.n_steps):
        a = h.frames[k][tris]  # (m, 3, 3) bottom triangle, sorted indices
        b = h.frames[k + 1][tris]  # top triangle
        v1 = _tet_volumes(a[:, 0], a[:, 1], a[:, 2], b[:, 0])
        v2 = _tet_volumes(a[:, 1], a[:, 2], b[:, 0], b[:, 1])
        v3 = _tet_volumes(a[:, 2], b[:, 0], b[:, 1], b[:, 2])
        vols = np.stack([v1, v2, v3], axis=1)
        per_step.append(float(np.abs(vols).sum()))
        small = np.abs(vols) <= tiny
        stationary += int(small.all(axis=1).sum())
        signs_pos = (vols > tiny).any(axis=1)
        signs_neg = (vols < -tiny).any(axis=1)
        mixed += int((signs_pos & signs_neg).sum())
    return SweptVolume(
        volume=float(sum(per_step)),
        per_step=tuple(per_step),
        stationary_prisms=stationary,
        mixed_sign_prisms=mixed,
    )


# --------------------------------------------------------------------------
# Index traces


@dataclass(frozen=True)
class IndexTrace:
    """Piecewise-constant right-continuous index of a point over time.

    values[i] holds on [times[i-1], times[i]); values has one more
    entry than times. uncertain marks jumps whose location had to be
    taken inside the winding guard band.
    """

    point: tuple[float, float, float]
    times: tuple[float, ...]
    values: tuple[int, ...]
    uncertain: tuple[bool, ...] = ()

    def __post_init__(self):
        if len(self.values) != len(self.times) + 1:
            raise ValueError("values must have exactly one more entry than times")

    @property
    def start(self) -> int:
        return self.values[0]

    @property
    def end(self) -> int:
        return self.values[-1]

    @property
    def n_jumps(self) -> int:
        return len(self.times)

    @property
    def variation(self) -> int:
        """Total jump variation sum |F(t+) - F(t-)|."""
        return int(sum(abs(b - a) for a, b in zip(self.values, self.values[1:])))

    def value_at(self, t: float) -> int:
        k = 0
        for k, jump in enumerate(self.times):
            if t < jump:
                return self.values[k]
        return self.values[-1]

    def to_dict(self) -> dict:
        return {
            "point": list(self.point),
            "times": list(self.times),
            "values": list(self.values),
            "uncertain": list(self.uncertain),
        }


def _winding_value(point: np.ndarray, h: DiscreteHomotopy, t: float) -> int | None:
    """Rounded winding at a time sample; None inside the guard band."""
    mesh = h.mesh_at(t)
    w = float(solid_angle_winding_many(point[None, :], mesh)[0])
    try:
        return round_winding(w)
    except WindingGuardError:
        return None


def _sample_value(point: np.ndarray, h: DiscreteHomotopy, t: float) -> int | None:
    """Winding with tiny time nudges to step off exact crossing instants."""
    for dt in (0.0, 1e-9, -1e-9):
        s = min(max(t + dt, 0.0), 1.0)
        value = _winding_value(point, h, s)
        if value is not None:
            return value
    return None


def index_trace(
    point,
    h: DiscreteHomotopy,
    substeps: int = 4,
    time_tol: float = 1e-6,
) -> IndexTrace:
    """Track the rounded winding of a fixed point through the homotopy.

    Samples every frame time plus `substeps` interior samples per step,
    then bisects each sign change down to time_tol. A sample falling in
    the winding guard band is skipped during scanning; a bisection that
    cannot escape the band reports the jump as uncertain. Jumps closer
    together than one initial sample spacing may be missed if they
    cancel; raise substeps for wilder homotopies.
    """
    p = np.asarray(point, dtype=np.float64)
    if np.linalg.norm(p - h.terminal) == 0.0:
        raise ValueError("trace point coincides with the homotopy terminal point")

    grid: list[float] = []
    for k in range(h.n_steps):
        t0, t1 = float(h.times[k]), float(h.times[k + 1])
        for j in range(substeps):
            grid.append(t0 + (t1 - t0) * j / substeps)
    grid.append(1.0)

    v0 = _sample_value(p, h, 0.0)
    if v0 is None:
        raise WindingGuardError(
            f"point {p.tolist()} is on or too near the initial surface"
        )

    jumps: list[float] = []
    values: list[int] = [v0]
    uncertain: list[bool] = []
    prev_t, prev_v = 0.0, v0
    for t in grid[1:]:
        v = _sample_value(p, h, t)
        if v is None:
            continue
        if v != prev_v:
            jump_t, sure = _bisect_jump(p, h, prev_t, prev_v, t, v, time_tol)
            jumps.append(jump_t)
            values.append(v)
            uncertain.append(not sure)
        prev_t, prev_v = t, v
    return IndexTrace(
        point=(float(p[0]), float(p[1]), float(p[2])),
        times=tuple(jumps),
        values=tuple(values),
        uncertain=tuple(uncertain),
    )


def _bisect_jump(
    p: np.ndarray,
    h: DiscreteHomotopy,
    t_lo: float,
    v_lo: int,
    t_hi: float,
    v_hi: int,
    time_tol: float,
) -> tuple[float, bool]:
    """Localize one value change; returns (jump time, certain flag).

    The returned time is the right end of the final bracket, where the
    new value already holds, keeping traces right-continuous.
    """
    sure = True
    while t_hi - t_lo > time_tol:
        mid = (t_lo + t_hi) / 2.0
        v = _winding_value(p, h, mid)
        if v is None:
            # Mid sits in the guard band: the surface is essentially at
            # the point right now. Take this as the jump location.
            return mid, False
        if v == v_lo:
            t_lo = mid
        elif v == v_hi:
            t_hi = mid
        else:
            # A third value inside the bracket: finer structure than
            # one bisection can resolve; report the earliest change.
            t_hi, v_hi = mid, v
            sure = False
    return t_hi, sure


# --------------------------------------------------------------------------
# Sense-preserving diagnosis


@dataclass(frozen=True)
class SenseReport:
    """Sign statistics of velocity-normal angles over prisms."""

    sense_preserving: bool
    degenerate: bool  # no motion at all
    dominant_sign: int  # +1, -1, or 0
    n_positive: int
    n_negative: int
    n_zero: int
    min_cosine: float
    max_cosine: float

    def to_dict(self) -> dict:
        return {
            "sense_preserving": self.sense_preserving,
            "degenerate": self.degenerate,
            "dominant_sign": self.dominant_sign,
            "n_positive": self.n_positive,
            "n_negative": self.n_negative,
            "n_zero": self.n_zero,
            "min_cosine": self.min_cosine,
            "max_cosine": self.max_cosine,
        }


def sense_preserving_report(h: DiscreteHomotopy, zero_tol: float = 1e-9) -> SenseReport:
    """Check whether the surface always moves to one side of itself.

    For every triangle and step, the centroid velocity is compared
    against the start-of-step triangle normal via the cosine of their
    angle. A homotopy is sense-preserving when every nonzero cosine has
    the same sign; stationary triangles count as zero and do not break
    consistency. All-zero motion is flagged degenerate.
    """
    tris = h.triangles
    n_pos = n_neg = n_zero = 0
    min_cos = np.inf
    max_cos = -np.inf
    for k in range(h.n_steps):
        dt = float(h.times[k + 1] - h.times[k])
        verts = h.frames[k]
        a, b, c = verts[tris[:, 0]], verts[tris[:, 1]], verts[tris[:, 2]]
        normal = np.cross(b - a, c - a)
        nlen = np.linalg.norm(normal, axis=1)
        vel = (h.frames[k + 1] - h.frames[k]) / dt
        vc = (vel[tris[:, 0]] + vel[tris[:, 1]] + vel[tris[:, 2]]) / 3.0
        vlen = np.linalg.norm(vc, axis=1)
        denom = nlen * vlen
        live = denom > 0.0
        cos = np.zeros(len(tris))
        cos[live] = np.einsum("ij,ij->i", vc[live], normal[live]) / denom[live]
        n_pos += int((cos > zero_tol).sum())
        n_neg += int((cos < -zero_tol).sum())
        n_zero += int((np.abs(cos) <= zero_tol).sum())
        if len(cos):
            min_cos = min(min_cos, float(cos.min()))
            max_cos = max(max_cos, float(cos.max()))
    degenerate = n_pos == 0 and n_neg == 0
    if degenerate:
        dominant = 0
    elif n_pos >= n_neg:
        dominant = 1
    else:
        dominant = -1
    return SenseReport(
        sense_preserving=not degenerate and (n_pos == 0 or n_neg == 0),
        degenerate=degenerate,
        dominant_sign=dominant,
        n_positive=n_pos,
        n_negative=n_neg,
        n_zero=n_zero,
        min_cosine=float(min_cos) if np.isfinite(min_cos) else 0.0,
        max_cosine=float(max_cos) if np.isfinite(max_cos) else 0.0,
    )


# --------------------------------------------------------------------------
# Lower-bound verification


@dataclass(frozen=True)
class LowerBoundReport:
    """Swept volume against the degree-weighted volume of frame 0.

    Any null homotopy must sweep at least |degree| (and in fact vdeg),
    so negative margins beyond the combined discretization tolerance
    flag a violation.
    """

    swept: SweptVolume
    degree: float
    vdeg: float
    margin_degree: float  # swept - |degree|
    margin_vdeg: float  # swept - vdeg
    tolerance: float
    violation: bool
    sense: SenseReport

    def to_dict(self) -> dict:
        return {
            "swept_volume": self.swept.volume,
            "degree": self.degree,
            "vdeg": self.vdeg,
            "margin_degree": self.margin_degree,
            "margin_vdeg": self.margin_vdeg,
            "tolerance": self.tolerance,
            "violation": self.violation,
            "sense": self.sense.to_dict(),
            "swept_annex": {
                "stationary_prisms": self.swept.stationary_prisms,
                "mixed_sign_prisms": self.swept.mixed_sign_prisms,
            },
        }


def discretization_tolerance(n_triangles: int, resolution: int, reference: float) -> float:
    """Combined absolute tolerance for bound checks.

    Mesh facet error scales like 1/triangles for sphere-like surfaces
    (the inscribed icosphere deficit is about 11/triangles), the voxel
    volume error empirically like 0.5/resolution, plus one percent of
    slack; all relative to the reference volume.
    """
    mesh_rel = 11.0 / max(n_triangles, 1)
    voxel_rel = 0.5 / max(resolution, 1)
    return (mesh_rel + voxel_rel + 0.01) * abs(reference)


def verify_lower_bound(
    h: DiscreteHomotopy,
    resolution: int = 64,
    total: TotalDegree | None = None,
) -> LowerBoundReport:
    """Check swept_volume(h) >= |D| for the initial surface.

    D and vdeg come from the voxel decomposition of frame 0. The check
    only flags a violation when the swept volume undershoots |D| by
    more than the combined discretization tolerance; margins are
    reported raw so callers can see how tight the bound is.
    """
    sv = swept_volume(h)
    td = total if total is not None else total_degree(h.initial_mesh(), resolution)
    reference = max(abs(td.degree), td.vdeg, sv.volume)
    tol = discretization_tolerance(len(h.triangles), resolution, reference)
    margin_degree = sv.volume - abs(td.degree)
    margin_vdeg = sv.volume - td.vdeg
    return LowerBoundReport(
        swept=sv,
        degree=td.degree,
        vdeg=td.vdeg,
        margin_degree=margin_degree,
        margin_vdeg=margin_vdeg,
        tolerance=tol,
        violation=margin_degree < -tol,
        sense=sense_preserving_report(h),
    )


# --------------------------------------------------------------------------
# Built-in homotopies


def _uniform_times(n_frames: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, n_frames)


def radial_contraction(mesh: TriangleMesh, n_frames: int = 64) -> DiscreteHomotopy:
    """H(p, t) = (1 - t) p: uniform contraction to the origin."""
    if n_frames < 2:
        raise ValueError("need at least 2 frames")
    t = _uniform_times(n_frames)
    frames = (1.0 - t)[:, None, None] * mesh.vertices[None, :, :]
    return DiscreteHomotopy(mesh.triangles, frames, t)


def translate_return_contract(
    mesh: TriangleMesh,
    n_frames: int = 96,
    offset=(4.0, 0.0, 0.0),
) -> DiscreteHomotopy:
    """Translate by offset, translate back, then contract radially.

    The out-and-back passes sweep volume without changing the initial
    surface, so the lower bound on this homotopy is very slack; each
    pass covers the swept tube twice (front and back sheet of the
    moving sphere), which the multiplicity-counting volume reflects.
    """
    if n_frames < 7:
        raise ValueError("need at least 7 frames for three phases")
    off = np.asarray(offset, dtype=np.float64)
    # Step count divisible by 3 so the turn-around times fall exactly on
    # frames; otherwise linear interpolation would cut the corners.
    steps = 3 * ((n_frames - 1 + 2) // 3)
    t = _uniform_times(steps + 1)
    frames = np.empty((steps + 1, mesh.n_vertices, 3))
    for i, ti in enumerate(t):
        if ti <= 1.0 / 3.0 + 1e-12:
            frames[i] = mesh.vertices + off * min(3.0 * ti, 1.0)
        elif ti <= 2.0 / 3.0 + 1e-12:
            frames[i] = mesh.vertices + off * max(2.0 - 3.0 * ti, 0.0)
        else:
            frames[i] = mesh.vertices * (3.0 * (1.0 - ti))
    return DiscreteHomotopy(mesh.triangles, frames, t)


def _smooth_field(points: np.ndarray, seed: int, amplitude: float) -> np.ndarray:
    """Smooth pseudo-random vector field: a few low-frequency sine waves."""
    rng = np.random.default_rng(seed)
    out = np.zeros_like(points)
    n_waves = 4
    for axis in range(3):
        freqs = rng.uniform(-2.0, 2.0, size=(n_waves, 3))
        phases = rng.uniform(0.0, 2.0 * np.pi, size=n_waves)
        amps = rng.uniform(0.3, 1.0, size=n_waves)
        amps *= amplitude / amps.sum()
        for w in range(n_waves):
            out[:, axis] += amps[w] * np.sin(points @ freqs[w] + phases[w])
    return out


def wobble_contraction(
    mesh: TriangleMesh,
    n_frames: int = 48,
    seed: int = 0,
    amplitude: float = 0.3,
) -> DiscreteHomotopy:
    """Radial contraction perturbed by a smooth random field.

    H(p, t) = (1 - t) p + t (1 - t) W(p): identity at t=0, collapsed at
    t=1, wandering in between. Not sense-preserving in general.
    """
    if n_frames < 2:
        raise ValueError("need at least 2 frames")
    t = _uniform_times(n_frames)
    w = _smooth_field(mesh.vertices, seed, amplitude)
    frames = (
        (1.0 - t)[:, None, None] * mesh.vertices[None, :, :]
        + (t * (1.0 - t))[:, None, None] * w[None, :, :]
    )
    return DiscreteHomotopy(mesh.triangles, frames, t)


def builtin_homotopy(
    name: str,
    mesh: TriangleMesh,
    n_frames: int = 64,
    seed: int = 0,
    amplitude: float = 0.3,
    offset=(4.0, 0.0, 0.0),
) -> DiscreteHomotopy:
    """Construct one of the named built-in homotopies over a mesh."""
    if name == "radial":
        return radial_contraction(mesh, n_frames)
    if name == "translate-return":
        return translate_return_contract(mesh, n_frames, offset)
    if name == "wobble":
        return wobble_contraction(mesh, n_frames, seed, amplitude)
    raise ValueError(f"unknown homotopy {name!r} (expected one of {BUILTIN_NAMES})")


# --------------------------------------------------------------------------
# Frame directory IO


def load_frames(directory: str | Path) -> DiscreteHomotopy:
    """Load a homotopy from a directory of mesh files.

    Files (.off or .obj) are ordered by name, must share connectivity,
    and get uniform times. The last frame must be collapsed.
    """
    directory = Path(directory)
    paths = sorted(
        p for p in directory.iterdir() if p.suffix.lower() in (".off", ".obj")
    )
    if len(paths) < 2:
        raise MeshFormatError(f"{directory}: need at least 2 frame meshes, found {len(paths)}")
    meshes = [load_mesh(p) for p in paths]
    base = meshes[0].triangles
    for path, mesh in zip(paths[1:], meshes[1:]):
        if not np.array_equal(mesh.triangles, base):
            raise MeshFormatError(f"{path}: frame connectivity differs from {paths[0]}")
        if mesh.n_vertices != meshes[0].n_vertices:
            raise MeshFormatError(f"{path}: vertex count differs from {paths[0]}")
    frames = np.stack([m.vertices for m in meshes])
    try:
        return DiscreteHomotopy(base, frames, _uniform_times(len(frames)))
    except ValueError as exc:
        raise MeshFormatError(f"{directory}: {exc}") from exc


def save_frames(h: DiscreteHomotopy, directory: str | Path) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    width = max(4, len(str(h.n_steps)))
    paths = []
    for k, frame in enumerate(h.frames):
        path = directory / f"frame_{k:0{width}d}.off"
        save_off(TriangleMesh(frame, h.triangles), path)
        paths.append(path)
    return paths
