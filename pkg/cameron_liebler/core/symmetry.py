"""Collineation groups fixing U3, π and every member of the pencil.

Matrices act on column vectors. Ψ consists of the q² matrices

    M(x, y) = [[1, 0, 0, −x], [0, 1, 0, −y], [2x, −2ωy, 1, ωy² − x²], [0, 0, 0, 1]]

which fix every Q_λ, and Φ of the q+1 block matrices diag([[z, ωt], [t, z]], u, u)
with z² − ωt² = u², which scale every Q_λ by u². Γ = ΨΦ has order q²(q+1).

Projectivities are compared through canonical forms: the matrix is scaled so its first
nonzero entry (row-major) is 1.
"""

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable

import numpy as np

from cameron_liebler.config import get_settings
from cameron_liebler.core.classes import LineClass
from cameron_liebler.core.field import FieldSpec
from cameron_liebler.core.geometry import Geometry, Line, plucker_coordinates
from cameron_liebler.core.logging import get_logger

logger = get_logger(__name__)


class SingularMatrix(ValueError):
    """Raised when a 4×4 matrix is not invertible."""

    def __init__(self, entries: Iterable[int]):
        self.entries = tuple(int(x) for x in entries)
        super().__init__(f"Matrix {self.entries} is singular")


class ClosureBudgetExceeded(RuntimeError):
    """Raised when a closure grows past the configured element budget."""

    def __init__(self, budget: int):
        self.budget = budget
        super().__init__(f"Group closure exceeded {budget} elements")


class DomainNotClosed(ValueError):
    """Raised when a generator maps a domain element outside the domain."""

    def __init__(self, witness: int, image: int):
        self.witness = witness
        self.image = image
        super().__init__(f"Element {witness} maps to {image}, outside the domain")


class ActionDomain(str, Enum):
    POINTS = "points"
    LINES = "lines"


def _matmul(spec: FieldSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    prods = np.asarray(spec.mul(a[:, :, None], b[None, :, :]))
    out = prods[:, 0, :]
    for k in range(1, prods.shape[1]):
        out = spec.add(out, prods[:, k, :])
    return np.asarray(out, dtype=np.int64)


def _rank(spec: FieldSpec, matrix: np.ndarray) -> int:
    m = np.array(matrix, dtype=np.int64)
    rank = 0
    for col in range(m.shape[1]):
        pivots = np.flatnonzero(m[rank:, col]) + rank
        if len(pivots) == 0:
            continue
        m[[rank, pivots[0]]] = m[[pivots[0], rank]]
        m[rank] = spec.mul(m[rank], spec.inv(int(m[rank, col])))
        for r in range(m.shape[0]):
            if r != rank and m[r, col]:
                m[r] = spec.sub(m[r], spec.mul(int(m[r, col]), m[rank]))
        rank += 1
        if rank == m.shape[0]:
            break
    return rank


def _canonical(spec: FieldSpec, matrix: np.ndarray) -> tuple[int, ...]:
    flat = np.asarray(matrix, dtype=np.int64).reshape(-1)
    lead = int(flat[np.flatnonzero(flat)[0]])
    return tuple(int(x) for x in np.asarray(spec.mul(flat, spec.inv(lead))).reshape(-1))


@dataclass(frozen=True)
class ProjMatrix:
    """An element of PGL(4,q) as 16 canonical field codes, row-major."""

    entries: tuple[int, ...]
    spec: FieldSpec = field(compare=False, hash=False, repr=False)

    @classmethod
    def create(cls, spec: FieldSpec, matrix: Any) -> "ProjMatrix":
        """Canonicalise a 4×4 matrix of field codes.

        Raises:
            SingularMatrix: If the matrix is not invertible.
        """
        array = np.asarray(matrix, dtype=np.int64).reshape(4, 4)
        if _rank(spec, array) < 4:
            raise SingularMatrix(array.reshape(-1))
        return cls(_canonical(spec, array), spec)

    @classmethod
    def identity(cls, spec: FieldSpec) -> "ProjMatrix":
        return cls.create(spec, np.eye(4, dtype=np.int64))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.entries, dtype=np.int64).reshape(4, 4)

    def __mul__(self, other: "ProjMatrix") -> "ProjMatrix":
        product = _matmul(self.spec, self.array, other.array)
        return ProjMatrix(_canonical(self.spec, product), self.spec)

    def apply(self, vectors: np.ndarray) -> np.ndarray:
        """Images of column vectors given as rows of an (n, 4) array."""
        vectors = np.asarray(vectors, dtype=np.int64)
        return _matmul(self.spec, vectors, self.array.T)


@dataclass(frozen=True)
class GroupClosure:
    """A finite matrix group with the generators it was closed from."""

    elements: frozenset[ProjMatrix]
    generators: tuple[ProjMatrix, ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, item: object) -> bool:
        return item in self.elements


def psi_matrix(spec: FieldSpec, omega: int, x: int, y: int) -> ProjMatrix:
    """M(x, y)."""
    two = spec.from_int(2)
    return ProjMatrix.create(
        spec,
        [
            [1, 0, 0, spec.neg(x)],
            [0, 1, 0, spec.neg(y)],
            [
                spec.mul(two, x),
                spec.neg(spec.mul(two, spec.mul(omega, y))),
                1,
                spec.sub(spec.mul(omega, spec.square(y)), spec.square(x)),
            ],
            [0, 0, 0, 1],
        ],
    )


def psi_elements(spec: FieldSpec, omega: int) -> frozenset[ProjMatrix]:
    """The q² elements of Ψ, elementary abelian with M(x1,y1)M(x2,y2) = M(x1+x2, y1+y2)."""
    return frozenset(psi_matrix(spec, omega, x, y) for x in range(spec.q) for y in range(spec.q))


def phi_elements(spec: FieldSpec, omega: int) -> frozenset[ProjMatrix]:
    """The q+1 projectively distinct diag([[z, ωt], [t, z]], u, u) with z² − ωt² = u²."""
    roots: dict[int, int] = {}
    for a in range(1, spec.q):
        roots.setdefault(int(spec.square(a)), a)

    elements = set()
    for z in range(spec.q):
        for t in range(spec.q):
            norm = int(spec.sub(spec.square(z), spec.mul(omega, spec.square(t))))
            if norm not in roots:
                continue
            u = roots[norm]
            elements.add(
                ProjMatrix.create(
                    spec,
                    [[z, spec.mul(omega, t), 0, 0], [t, z, 0, 0], [0, 0, u, 0], [0, 0, 0, u]],
                )
            )
    return frozenset(elements)


def close(generators: Iterable[ProjMatrix], budget: int | None = None) -> GroupClosure:
    """Breadth-first multiplicative closure, identity included.

    Raises:
        ValueError: If there are no generators.
        ClosureBudgetExceeded: If more than budget elements appear.
    """
    gens = tuple(sorted(set(generators), key=lambda g: g.entries))
    if not gens:
        raise ValueError("close needs at least one generator")
    budget = budget or get_settings().closure_budget

    identity = ProjMatrix.identity(gens[0].spec)
    elements = {identity}
    frontier = deque([identity])
    while frontier:
        current = frontier.popleft()
        for g in gens:
            product = g * current
            if product not in elements:
                elements.add(product)
                if len(elements) > budget:
                    raise ClosureBudgetExceeded(budget)
                frontier.append(product)

    logger.info("Group closure", extra={"generators": len(gens), "order": len(elements)})
    return GroupClosure(frozenset(elements), gens)


def stabilizer_group(geometry: Geometry) -> GroupClosure:
    """Γ = ⟨Ψ, Φ⟩ for the geometry's ω."""
    spec = geometry.field
    return close(psi_elements(spec, geometry.omega) | phi_elements(spec, geometry.omega))


def act_on_points(geometry: Geometry, matrix: ProjMatrix) -> np.ndarray:
    """Point permutation: perm[P] is the id of the image of P."""
    return geometry.point_ids(matrix.apply(geometry.points))


def act_on_lines(geometry: Geometry, matrix: ProjMatrix) -> np.ndarray:
    """Line permutation through the images of two spanning points per line."""
    u = matrix.apply(geometry.line_spans[:, 0, :])
    v = matrix.apply(geometry.line_spans[:, 1, :])
    return geometry.line_ids(plucker_coordinates(geometry.field, u, v))


def act_on_line(geometry: Geometry, matrix: ProjMatrix, line: Line | int) -> Line:
    line_id = line.id if isinstance(line, Line) else int(line)
    span = geometry.line_spans[line_id]
    images = matrix.apply(span)
    image_id = geometry.line_ids(plucker_coordinates(geometry.field, images[0], images[1]))
    return geometry.line(int(image_id))


def _permutations(geometry: Geometry, group: GroupClosure, domain: ActionDomain) -> list[np.ndarray]:
    act = act_on_points if domain is ActionDomain.POINTS else act_on_lines
    return [act(geometry, g) for g in group.generators]


def orbits(
    geometry: Geometry,
    group: GroupClosure,
    ids: Iterable[int] | np.ndarray,
    domain: ActionDomain | str = ActionDomain.LINES,
) -> list[np.ndarray]:
    """Orbit partition of a set of point or line ids, each orbit sorted ascending.

    Raises:
        DomainNotClosed: If some generator maps the set outside itself.
    """
    domain = ActionDomain(domain)
    members = np.unique(np.asarray(list(ids), dtype=np.int64))
    size = geometry.n_points if domain is ActionDomain.POINTS else geometry.n_lines
    inside = np.zeros(size, dtype=bool)
    inside[members] = True
    perms = _permutations(geometry, group, domain)

    for perm in perms:
        escaped = members[~inside[perm[members]]]
        if len(escaped):
            raise DomainNotClosed(int(escaped[0]), int(perm[escaped[0]]))

    seen = np.zeros(size, dtype=bool)
    result = []
    for start in members:
        if seen[start]:
            continue
        seen[start] = True
        orbit = [int(start)]
        queue = deque(orbit)
        while queue:
            current = queue.popleft()
            for perm in perms:
                image = int(perm[current])
                if not seen[image]:
                    seen[image] = True
                    orbit.append(image)
                    queue.append(image)
        result.append(np.array(sorted(orbit), dtype=np.int64))
    return result


def orbit_sizes(orbit_list: list[np.ndarray]) -> list[int]:
    return sorted(len(o) for o in orbit_list)


def is_invariant(geometry: Geometry, group: GroupClosure, line_class: LineClass) -> bool:
    """True iff every generator maps the class onto itself."""
    mask = line_class.mask(geometry.n_lines)
    ids = line_class.ids()
    return all(bool(mask[perm[ids]].all()) for perm in _permutations(geometry, group, ActionDomain.LINES))


def preserves_pencil(geometry: Geometry, matrix: ProjMatrix) -> bool:
    """True iff the matrix keeps the quadratic character of every point under every Q_λ."""
    perm = act_on_points(geometry, matrix)
    return bool(np.array_equal(geometry.characters[:, perm], geometry.characters))


def symmetry_report(geometry: Geometry, line_class: LineClass) -> dict[str, Any]:
    """Order of Γ, invariance of the class and the orbit structure on π and off π."""
    spec = geometry.field
    group = stabilizer_group(geometry)
    pi_points = np.flatnonzero(geometry.points[:, 3] == 0)
    off_pi = np.flatnonzero(~geometry.in_pi)
    invariant = is_invariant(geometry, group, line_class)
    report = {
        "order": group.order,
        "expected_order": spec.q**2 * (spec.q + 1),
        "psi_order": len(psi_elements(spec, geometry.omega)),
        "phi_order": len(phi_elements(spec, geometry.omega)),
        "invariant": invariant,
        "pi_orbit_sizes": orbit_sizes(orbits(geometry, group, pi_points, ActionDomain.POINTS)),
        "off_pi_line_orbit_sizes": orbit_sizes(orbits(geometry, group, off_pi, ActionDomain.LINES)),
    }
    logger.info("Symmetry check", extra={"q": spec.q, "order": group.order, "invariant": invariant})
    return report
