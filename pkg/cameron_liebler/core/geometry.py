"""Indexed model of PG(3,q) with the pencil of elliptic quadrics.

Points, planes and lines are numbered in lexicographic order of their normalised
coordinates (first nonzero coordinate equal to 1). Planes are stored by their dual
coordinates and share the point numbering. Lines carry normalised Plücker coordinates
in the order (p01, p02, p03, p12, p13, p23).

The pencil is Q_λ(X) = X1² − ωX2² + λX4² + X3X4 for λ in GF(q). Its base point is
U3 = (0,0,1,0), and π is the plane X4 = 0. Quadratic characters of every point under
every Q_λ are computed once at build time, so line/quadric classification is an
index lookup.

Usage:
    from cameron_liebler.core.field import build_field
    from cameron_liebler.core.geometry import build_geometry, line_quadric_profile

    geometry = build_geometry(build_field(7))
    profile = line_quadric_profile(geometry, geometry.line_through(geometry.u1, geometry.u3), 0)
"""

from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations, product

import numpy as np

from cameron_liebler.config import get_settings
from cameron_liebler.core.field import (
    FieldElement,
    FieldSpec,
    QuadraticCharacter,
    canonical_nonsquare,
    code_of,
)
from cameron_liebler.core.logging import get_logger

logger = get_logger(__name__)

# Plücker coordinate index pairs, in storage order
PLUCKER_PAIRS: tuple[tuple[int, int], ...] = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))

# Markers used by pencil_partition
PI_MARKER = -1
BASE_MARKER = -2


class CapacityExceeded(ValueError):
    """Raised when q is above the configured geometry bound."""

    def __init__(self, q: int, max_q: int):
        self.q = q
        self.max_q = max_q
        super().__init__(f"q = {q} exceeds the configured bound max_q = {max_q}")


class NotOnGeometry(ValueError):
    """Raised when coordinates or ids do not name an object of the geometry."""


class InvalidOmega(ValueError):
    """Raised when the pencil parameter omega is not a non-square."""

    def __init__(self, omega: int):
        self.omega = omega
        super().__init__(f"omega = {omega} is not a non-square")


class StructureViolation(RuntimeError):
    """A structural count failed. Indicates an implementation bug, not bad input."""

    def __init__(self, check: str, expected: object, actual: object):
        self.check = check
        self.expected = expected
        self.actual = actual
        super().__init__(f"{check}: expected {expected}, got {actual}")


class LineKind(str, Enum):
    """Position of a line relative to a quadric."""

    EXTERNAL = "external"
    TANGENT = "tangent"
    SECANT = "secant"


class PencilTangency(str, Enum):
    """Outcome of tangent_pencil_member."""

    UNIQUE_MEMBER = "unique_member"
    PI_THROUGH_U3 = "pi_through_u3"
    PI_AVOIDING_U3 = "pi_avoiding_u3"
    THROUGH_U3_OFF_PI = "through_u3_off_pi"


@dataclass(frozen=True)
class Point:
    id: int
    coords: tuple[int, int, int, int]


@dataclass(frozen=True)
class Plane:
    id: int
    dual_coords: tuple[int, int, int, int]


@dataclass(frozen=True)
class Line:
    id: int
    plucker: tuple[int, ...]
    point_ids: tuple[int, ...]
    plane_ids: tuple[int, ...]


@dataclass(frozen=True)
class LineProfile:
    """How a line meets one quadric of the pencil."""

    kind: LineKind
    points: tuple[int, ...]


@dataclass(frozen=True)
class PencilMembership:
    """Which pencil member a line is tangent to, if exactly one."""

    kind: PencilTangency
    lam: int | None = None


@dataclass(frozen=True, eq=False)
class Geometry:
    """PG(3,q) with incidence tables and pencil characters.

    Attributes:
        points: (N, 4) normalised point coordinates; also the plane dual coordinates.
        lines: (L, 6) normalised Plücker coordinates.
        line_spans: (L, 2, 4) two spanning points per line.
        line_points: (L, q+1) point ids on each line, ascending.
        line_planes: (L, q+1) plane ids through each line, ascending.
        point_lines: (N, q²+q+1) line ids through each point (stars).
        plane_lines: (N, q²+q+1) line ids in each plane.
        characters: (q, N) quadratic character of Q_λ at each point, indexed by λ code.
        line_zero_counts: (q, L) number of points of each line on E_λ.
        pi_trace: (L,) id of the point ℓ ∩ π, or -1 when ℓ lies in π.
    """

    field: FieldSpec
    omega: int
    points: np.ndarray = field(repr=False)
    point_keys: np.ndarray = field(repr=False)
    lines: np.ndarray = field(repr=False)
    line_keys: np.ndarray = field(repr=False)
    line_spans: np.ndarray = field(repr=False)
    line_points: np.ndarray = field(repr=False)
    line_planes: np.ndarray = field(repr=False)
    point_lines: np.ndarray = field(repr=False)
    plane_lines: np.ndarray = field(repr=False)
    characters: np.ndarray = field(repr=False)
    line_zero_counts: np.ndarray = field(repr=False)
    pi_trace: np.ndarray = field(repr=False)
    u1: int = -1
    u2: int = -1
    u3: int = -1
    pi: int = -1

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def n_points(self) -> int:
        return len(self.points)

    @property
    def n_planes(self) -> int:
        return len(self.points)

    @property
    def n_lines(self) -> int:
        return len(self.lines)

    def point(self, point_id: int) -> Point:
        self._check_id(point_id, self.n_points, "point")
        return Point(int(point_id), tuple(int(c) for c in self.points[point_id]))

    def plane(self, plane_id: int) -> Plane:
        self._check_id(plane_id, self.n_planes, "plane")
        return Plane(int(plane_id), tuple(int(c) for c in self.points[plane_id]))

    def line(self, line_id: int) -> Line:
        self._check_id(line_id, self.n_lines, "line")
        return Line(
            id=int(line_id),
            plucker=tuple(int(c) for c in self.lines[line_id]),
            point_ids=tuple(int(i) for i in self.line_points[line_id]),
            plane_ids=tuple(int(i) for i in self.line_planes[line_id]),
        )

    def point_ids(self, vectors: np.ndarray) -> np.ndarray:
        """Ids of the projective points of nonzero 4-vectors (any leading shape)."""
        normalised = normalize(self.field, np.asarray(vectors, dtype=np.int64))
        return _lookup(self.point_keys, _keys(normalised, self.q), "point")

    def point_id(self, coords) -> int:
        return int(self.point_ids(np.asarray([code_of(c) for c in coords])))

    def plane_id(self, dual_coords) -> int:
        return self.point_id(dual_coords)

    def line_ids(self, pluckers: np.ndarray) -> np.ndarray:
        """Ids of lines given (not necessarily normalised) Plücker 6-vectors."""
        normalised = normalize(self.field, np.asarray(pluckers, dtype=np.int64))
        return _lookup(self.line_keys, _keys(normalised, self.q), "line")

    def line_id(self, plucker) -> int:
        return int(self.line_ids(np.asarray([code_of(c) for c in plucker])))

    def line_through(self, point_a: int, point_b: int) -> int:
        """The line joining two distinct points."""
        if point_a == point_b:
            raise NotOnGeometry("A line needs two distinct points")
        u = self.points[point_a]
        v = self.points[point_b]
        return int(self.line_ids(plucker_coordinates(self.field, u, v)))

    def lines_through(self, point_id: int) -> np.ndarray:
        return self.point_lines[point_id]

    def lines_in(self, plane_id: int) -> np.ndarray:
        return self.plane_lines[plane_id]

    def on_line(self, point_id: int, line_id: int) -> bool:
        return bool(np.any(self.line_points[line_id] == point_id))

    @property
    def in_pi(self) -> np.ndarray:
        """Boolean mask of lines contained in π."""
        return self.pi_trace < 0

    @property
    def through_u3(self) -> np.ndarray:
        """Boolean mask of lines through U3."""
        return np.any(self.line_points == self.u3, axis=1)

    def quadric_points(self, lam: int | FieldElement) -> np.ndarray:
        """Point ids of E_λ."""
        return np.flatnonzero(self.characters[code_of(lam)] == QuadraticCharacter.ZERO)

    @staticmethod
    def _check_id(value: int, bound: int, kind: str) -> None:
        if not 0 <= int(value) < bound:
            raise NotOnGeometry(f"{kind} id {value} out of range [0, {bound})")


def normalize(spec: FieldSpec, vectors: np.ndarray) -> np.ndarray:
    """Scale vectors along the last axis so the first nonzero entry is 1.

    Raises:
        NotOnGeometry: If any vector is zero.
    """
    nonzero = vectors != 0
    if not np.all(nonzero.any(axis=-1)):
        raise NotOnGeometry("The zero vector is not a projective point")
    first = np.asarray(nonzero.argmax(axis=-1))
    lead = np.take_along_axis(vectors, first[..., None], axis=-1)
    return np.asarray(spec.mul(vectors, spec.inv(lead)), dtype=np.int64)


def plucker_coordinates(spec: FieldSpec, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Plücker 6-vectors p_ij = u_i v_j − u_j v_i of the lines spanned by u and v."""
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    columns = [
        spec.sub(spec.mul(u[..., i], v[..., j]), spec.mul(u[..., j], v[..., i]))
        for i, j in PLUCKER_PAIRS
    ]
    return np.stack([np.asarray(c, dtype=np.int64) for c in columns], axis=-1)


def planes_meet_plucker(spec: FieldSpec, alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Plücker 6-vectors of the lines where planes alpha and beta meet."""
    dual = plucker_coordinates(spec, alpha, beta)
    d01, d02, d03, d12, d13, d23 = (dual[..., k] for k in range(6))
    return np.stack([d23, spec.neg(d13), d12, d03, spec.neg(d02), d01], axis=-1).astype(np.int64)


def _keys(normalised: np.ndarray, q: int) -> np.ndarray:
    width = normalised.shape[-1]
    weights = q ** np.arange(width - 1, -1, -1, dtype=np.int64)
    return normalised @ weights


def _lookup(sorted_keys: np.ndarray, keys: np.ndarray, kind: str) -> np.ndarray:
    idx = np.searchsorted(sorted_keys, keys)
    clipped = np.minimum(idx, len(sorted_keys) - 1)
    if not np.all(sorted_keys[clipped] == keys):
        raise NotOnGeometry(f"Coordinates do not name a {kind} of the geometry")
    return clipped


def _span_points(spec: FieldSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """All q+1 points a + t b (t in GF(q)) and b, for rows of a and b."""
    t = np.arange(spec.q, dtype=np.int64)
    combos = spec.add(a[:, None, :], spec.mul(t[None, :, None], b[:, None, :]))
    return np.concatenate([np.asarray(combos), b[:, None, :]], axis=1)


def _enumerate_points(q: int) -> np.ndarray:
    grid = np.array(list(product(range(q), repeat=4)), dtype=np.int64)
    nonzero = grid != 0
    first = nonzero.argmax(axis=1)
    lead = grid[np.arange(len(grid)), first]
    keep = nonzero.any(axis=1) & (lead == 1)
    return grid[keep]


def _enumerate_line_spans(spec: FieldSpec) -> tuple[np.ndarray, np.ndarray]:
    """Row-reduced spanning pairs of every line and of its dual line.

    For pivots i < j, rows u (u_i = 1, u_j = 0) and v (v_j = 1) are in reduced echelon
    form; the two vectors e_k − u_k e_i − v_k e_j (k not a pivot) span the dual line.
    """
    q = spec.q
    spans, duals = [], []
    for i, j in combinations(range(4), 2):
        free_u = [k for k in range(i + 1, 4) if k != j]
        free_v = list(range(j + 1, 4))
        n_free = len(free_u) + len(free_v)
        values = np.indices((q,) * n_free).reshape(n_free, -1).T if n_free else np.zeros((1, 0))
        count = len(values)
        u = np.zeros((count, 4), dtype=np.int64)
        v = np.zeros((count, 4), dtype=np.int64)
        u[:, i] = 1
        v[:, j] = 1
        for col, k in enumerate(free_u):
            u[:, k] = values[:, col]
        for col, k in enumerate(free_v):
            v[:, k] = values[:, len(free_u) + col]

        others = [k for k in range(4) if k not in (i, j)]
        normals = []
        for k in others:
            n = np.zeros((count, 4), dtype=np.int64)
            n[:, k] = 1
            n[:, i] = spec.neg(u[:, k])
            n[:, j] = spec.neg(v[:, k])
            normals.append(n)
        spans.append(np.stack([u, v], axis=1))
        duals.append(np.stack(normals, axis=1))
    return np.concatenate(spans), np.concatenate(duals)


def _invert_incidence(incidence: np.ndarray, n_targets: int) -> np.ndarray:
    """Transpose a (rows, k) incidence table into per-target sorted row lists."""
    flat = incidence.ravel()
    owners = np.repeat(np.arange(len(incidence)), incidence.shape[1])
    counts = np.bincount(flat, minlength=n_targets)
    if counts.min() != counts.max():
        raise StructureViolation("uniform incidence", int(counts.max()), int(counts.min()))
    order = np.argsort(flat, kind="stable")
    return owners[order].reshape(n_targets, -1)


def _pencil_values(spec: FieldSpec, omega: int, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Q_0 at every point and X4², so that Q_λ = Q_0 + λ X4²."""
    x1, x2, x3, x4 = (points[:, k] for k in range(4))
    q0 = spec.add(
        spec.sub(spec.square(x1), spec.mul(omega, spec.square(x2))),
        spec.mul(x3, x4),
    )
    return np.asarray(q0), np.asarray(spec.square(x4))


def build_geometry(
    spec: FieldSpec,
    omega: int | FieldElement | None = None,
    max_q: int | None = None,
) -> Geometry:
    """Enumerate PG(3,q) with incidences and pencil characters.

    Args:
        spec: The field GF(q).
        omega: Non-square for the pencil; settings or the smallest non-square by default.
        max_q: Capacity bound; settings.max_q by default.

    Returns:
        The immutable geometry.

    Raises:
        CapacityExceeded: If q > max_q.
        InvalidOmega: If omega is not a non-square.
    """
    settings = get_settings()
    bound = max_q if max_q is not None else settings.max_q
    if spec.q > bound:
        raise CapacityExceeded(spec.q, bound)

    if omega is None:
        omega = settings.omega if settings.omega is not None else canonical_nonsquare(spec)
    omega = code_of(omega)
    if not 0 < omega < spec.q or spec.character(omega) != QuadraticCharacter.NONSQUARE:
        raise InvalidOmega(omega)

    q = spec.q
    points = _enumerate_points(q)
    point_keys = _keys(points, q)

    spans, duals = _enumerate_line_spans(spec)
    raw = plucker_coordinates(spec, spans[:, 0], spans[:, 1])
    lines = normalize(spec, raw)
    line_keys = _keys(lines, q)
    order = np.argsort(line_keys)
    lines, line_keys, spans, duals = lines[order], line_keys[order], spans[order], duals[order]

    line_points = _lookup(point_keys, _keys(normalize(spec, _span_points(spec, spans[:, 0], spans[:, 1])), q), "point")
    line_planes = _lookup(point_keys, _keys(normalize(spec, _span_points(spec, duals[:, 0], duals[:, 1])), q), "plane")
    line_points = np.sort(line_points, axis=1)
    line_planes = np.sort(line_planes, axis=1)

    point_lines = _invert_incidence(line_points, len(points))
    plane_lines = _invert_incidence(line_planes, len(points))

    q0, x4_sq = _pencil_values(spec, omega, points)
    characters = np.stack(
        [spec.character(spec.add(q0, spec.mul(lam, x4_sq))) for lam in range(q)]
    ).astype(np.int8)
    line_zero_counts = (characters[:, line_points] == 0).sum(axis=2).astype(np.int8)

    on_pi = points[:, 3] == 0
    mask = on_pi[line_points]
    hits = mask.sum(axis=1)
    first = mask.argmax(axis=1)
    pi_trace = np.where(hits == 1, line_points[np.arange(len(lines)), first], -1)

    def pid(coords: tuple[int, ...]) -> int:
        return int(_lookup(point_keys, _keys(np.asarray(coords), q), "point"))

    geometry = Geometry(
        field=spec,
        omega=omega,
        points=points,
        point_keys=point_keys,
        lines=lines,
        line_keys=line_keys,
        line_spans=spans,
        line_points=line_points,
        line_planes=line_planes,
        point_lines=point_lines,
        plane_lines=plane_lines,
        characters=characters,
        line_zero_counts=line_zero_counts,
        pi_trace=pi_trace,
        u1=pid((1, 0, 0, 0)),
        u2=pid((0, 1, 0, 0)),
        u3=pid((0, 0, 1, 0)),
        pi=pid((0, 0, 0, 1)),
    )

    expected_points = (q * q + 1) * (q + 1)
    expected_lines = (q * q + 1) * (q * q + q + 1)
    if geometry.n_points != expected_points:
        raise StructureViolation("point count", expected_points, geometry.n_points)
    if geometry.n_lines != expected_lines:
        raise StructureViolation("line count", expected_lines, geometry.n_lines)

    logger.info(
        "Geometry built",
        extra={"q": q, "omega": omega, "points": geometry.n_points, "lines": geometry.n_lines},
    )
    return geometry


def eval_pencil(geometry: Geometry, lam: int | FieldElement, point_id: int) -> QuadraticCharacter:
    """Quadratic character of Q_λ at a point."""
    return QuadraticCharacter(int(geometry.characters[code_of(lam), point_id]))


def polar_vectors(geometry: Geometry, lam: int | FieldElement, vectors: np.ndarray) -> np.ndarray:
    """Dual vectors G_λ·X of the polar planes, where G_λ is the Gram matrix of Q_λ.

    G_λ = [[1,0,0,0],[0,−ω,0,0],[0,0,0,1/2],[0,0,1/2,λ]].
    """
    spec = geometry.field
    lam = code_of(lam)
    half = spec.inv(2 % spec.p)
    x1, x2, x3, x4 = (vectors[..., k] for k in range(4))
    return np.stack(
        [
            np.asarray(x1),
            np.asarray(spec.mul(spec.neg(geometry.omega), x2)),
            np.asarray(spec.mul(half, x4)),
            np.asarray(spec.add(spec.mul(half, x3), spec.mul(lam, x4))),
        ],
        axis=-1,
    ).astype(np.int64)


def polar_plane(geometry: Geometry, lam: int | FieldElement, point_id: int) -> int:
    """Plane id of the polar plane of a point under ⊥_λ."""
    return int(geometry.point_ids(polar_vectors(geometry, lam, geometry.points[point_id])))


def polar_lines(geometry: Geometry, lam: int | FieldElement, line_ids=None) -> np.ndarray:
    """Polar line ids under ⊥_λ, for all lines or the given ids."""
    spans = geometry.line_spans if line_ids is None else geometry.line_spans[np.asarray(line_ids)]
    alpha = polar_vectors(geometry, lam, spans[..., 0, :])
    beta = polar_vectors(geometry, lam, spans[..., 1, :])
    return geometry.line_ids(planes_meet_plucker(geometry.field, alpha, beta))


def polar_image(geometry: Geometry, lam: int | FieldElement, obj: Point | Line) -> Plane | Line:
    """Polar plane of a point, or polar line of a line, under ⊥_λ."""
    if isinstance(obj, Point):
        return geometry.plane(polar_plane(geometry, lam, obj.id))
    if isinstance(obj, Line):
        return geometry.line(int(polar_lines(geometry, lam, [obj.id])[0]))
    raise TypeError(f"Expected a Point or Line, got {type(obj).__name__}")


def line_quadric_profile(geometry: Geometry, line_id: int, lam: int | FieldElement) -> LineProfile:
    """Classify a line as external, tangent or secant to E_λ."""
    pts = geometry.line_points[line_id]
    zeros = tuple(int(p) for p in pts[geometry.characters[code_of(lam), pts] == 0])
    kinds = {0: LineKind.EXTERNAL, 1: LineKind.TANGENT, 2: LineKind.SECANT}
    if len(zeros) not in kinds:
        raise StructureViolation("line meets an elliptic quadric in at most 2 points", 2, len(zeros))
    return LineProfile(kinds[len(zeros)], zeros)


def tangent_members(geometry: Geometry) -> np.ndarray:
    """For every line, the unique λ with the line tangent to E_λ, or -1."""
    tangent = geometry.line_zero_counts == 1
    counts = tangent.sum(axis=0)
    return np.where(counts == 1, tangent.argmax(axis=0), -1)


def tangent_pencil_member(geometry: Geometry, line_id: int) -> PencilMembership:
    """Locate the pencil member a line is tangent to.

    Lines off π that avoid U3 are tangent to exactly one E_λ. Lines through U3 off π
    are secant to every member; lines of π are tangent at U3 or external throughout.
    """
    through_u3 = bool(geometry.through_u3[line_id])
    if geometry.pi_trace[line_id] < 0:
        kind = PencilTangency.PI_THROUGH_U3 if through_u3 else PencilTangency.PI_AVOIDING_U3
        return PencilMembership(kind)
    if through_u3:
        return PencilMembership(PencilTangency.THROUGH_U3_OFF_PI)
    lams = np.flatnonzero(geometry.line_zero_counts[:, line_id] == 1)
    if len(lams) != 1:
        raise StructureViolation(f"unique tangent pencil member for line {line_id}", 1, len(lams))
    return PencilMembership(PencilTangency.UNIQUE_MEMBER, int(lams[0]))


def pencil_partition(geometry: Geometry) -> np.ndarray:
    """For every point, the λ with the point on E_λ.

    Points of π other than U3 get PI_MARKER and U3 gets BASE_MARKER.

    Raises:
        StructureViolation: If a point off π lies on zero or several members.
    """
    on_quadric = geometry.characters == QuadraticCharacter.ZERO
    hits = on_quadric.sum(axis=0)
    partition = np.where(hits == 1, on_quadric.argmax(axis=0), PI_MARKER)
    partition[geometry.u3] = BASE_MARKER

    off_pi = geometry.points[:, 3] != 0
    if not np.all(hits[off_pi] == 1):
        raise StructureViolation("each point off π on exactly one E_λ", 1, int(hits[off_pi].max()))
    if np.any(hits[~off_pi & (np.arange(geometry.n_points) != geometry.u3)]):
        raise StructureViolation("points of π∖{U3} on no E_λ", 0, "some")
    return partition


def quadric_in_square_points(geometry: Geometry, lam: int | FieldElement) -> bool:
    """Whether every point of E_λ∖{U3} is a square point of Q."""
    pts = geometry.quadric_points(lam)
    pts = pts[pts != geometry.u3]
    return bool(np.all(geometry.characters[0, pts] == QuadraticCharacter.SQUARE))


def pi_characters_constant(geometry: Geometry) -> bool:
    """Whether every Q_λ takes the same quadratic character at each point of π."""
    in_pi = geometry.points[:, 3] == 0
    chars = geometry.characters[:, in_pi]
    return bool(np.all(chars == chars[0]))
