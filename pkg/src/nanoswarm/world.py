"""Static 2D arena: obstacle primitives, ray/disc queries, coverage grid, presets."""

import math
import random
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

Point = Tuple[float, float]

#: Maximum radius for which a disc may be flagged as "thin" (chair leg / tripod foot).
THIN_RADIUS_MAX = 0.05

#: Coverage cell edge length in metres.
DEFAULT_CELL_SIZE = 0.05


@dataclass(frozen=True)
class Segment:
    """Line-segment obstacle (also used for the implicit boundary walls)."""

    p1: Point
    p2: Point

    def __post_init__(self):
        if self.p1 == self.p2:
            raise ValueError("segment endpoints must be distinct")

    @property
    def thin(self) -> bool:
        return False


@dataclass(frozen=True)
class Disc:
    """Circular obstacle; thin=True marks narrow clutter (radius <= 0.05 m)."""

    center: Point
    radius: float
    thin: bool = False

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError("disc radius must be > 0")
        if self.thin and self.radius > THIN_RADIUS_MAX:
            raise ValueError(
                f"thin discs must have radius <= {THIN_RADIUS_MAX} m, got {self.radius}"
            )


ObstacleShape = Union[Segment, Disc]


def _ray_segment(ox, oy, dx, dy, ax, ay, bx, by) -> float:
    """Distance along ray (o, d) to segment (a, b), or inf if no hit."""
    ex, ey = bx - ax, by - ay
    denom = dx * ey - dy * ex
    if abs(denom) < 1e-15:
        return math.inf
    qx, qy = ax - ox, ay - oy
    t = (qx * ey - qy * ex) / denom
    u = (qx * dy - qy * dx) / denom
    if t >= 0.0 and 0.0 <= u <= 1.0:
        return t
    return math.inf


def _ray_disc(ox, oy, dx, dy, cx, cy, r) -> float:
    """Distance along ray (o, d) to disc boundary, or inf if no hit.

    An origin inside the disc hits at distance 0.
    """
    fx, fy = ox - cx, oy - cy
    c = fx * fx + fy * fy - r * r
    if c <= 0.0:
        return 0.0
    b = fx * dx + fy * dy
    disc = b * b - c
    if disc < 0.0:
        return math.inf
    t = -b - math.sqrt(disc)
    if t >= 0.0:
        return t
    return math.inf


def _point_segment_distance(px, py, ax, ay, bx, by) -> float:
    ex, ey = bx - ax, by - ay
    qx, qy = px - ax, py - ay
    denom = ex * ex + ey * ey
    t = (qx * ex + qy * ey) / denom
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    ddx, ddy = qx - t * ex, qy - t * ey
    return math.hypot(ddx, ddy)


class Arena:
    """Rectangular 2D world with static obstacles.

    The four boundary walls are implicit segment obstacles and always present;
    they are not part of ``obstacles``.  Immutable after construction.
    """

    def __init__(
        self,
        width: float,
        height: float,
        obstacles: Optional[List[ObstacleShape]] = None,
        name: str = "custom",
    ) -> None:
        if width <= 0.0 or height <= 0.0:
            raise ValueError("arena dimensions must be positive")
        self.width = float(width)
        self.height = float(height)
        self.obstacles: List[ObstacleShape] = list(obstacles or [])
        self.name = name
        for i, obs in enumerate(self.obstacles):
            if not self._shape_in_bounds(obs):
                raise ValueError(f"obstacle {i} lies outside the arena bounds")
        self.walls: List[Segment] = [
            Segment((0.0, 0.0), (self.width, 0.0)),
            Segment((self.width, 0.0), (self.width, self.height)),
            Segment((self.width, self.height), (0.0, self.height)),
            Segment((0.0, self.height), (0.0, 0.0)),
        ]
        # Flat tuples for the hot query loops.
        self._segs = [
            (s.p1[0], s.p1[1], s.p2[0], s.p2[1])
            for s in self.walls + [o for o in self.obstacles if isinstance(o, Segment)]
        ]
        self._discs = [
            (o.center[0], o.center[1], o.radius)
            for o in self.obstacles
            if isinstance(o, Disc)
        ]

    def _shape_in_bounds(self, obs: ObstacleShape) -> bool:
        if isinstance(obs, Segment):
            return all(
                0.0 <= x <= self.width and 0.0 <= y <= self.height
                for x, y in (obs.p1, obs.p2)
            )
        cx, cy = obs.center
        r = obs.radius
        return (
            cx - r >= 0.0
            and cx + r <= self.width
            and cy - r >= 0.0
            and cy + r <= self.height
        )

    def contains(self, point: Point) -> bool:
        x, y = point
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height

    def raycast(self, origin: Point, direction: Point, max_range: float) -> float:
        """Distance to the nearest obstacle or wall along the ray, clamped to max_range."""
        if not self.contains(origin):
            raise ValueError(f"ray origin {origin} outside arena")
        ox, oy = origin
        dx, dy = direction
        best = max_range
        for ax, ay, bx, by in self._segs:
            t = _ray_segment(ox, oy, dx, dy, ax, ay, bx, by)
            if t < best:
                best = t
        for cx, cy, r in self._discs:
            t = _ray_disc(ox, oy, dx, dy, cx, cy, r)
            if t < best:
                best = t
        return best

    def distance_to_nearest(self, point: Point) -> float:
        """Distance from a point to the nearest obstacle or boundary wall."""
        px, py = point
        best = math.inf
        for ax, ay, bx, by in self._segs:
            d = _point_segment_distance(px, py, ax, ay, bx, by)
            if d < best:
                best = d
        for cx, cy, r in self._discs:
            d = math.hypot(px - cx, py - cy) - r
            if d < best:
                best = d
        return best

    def min_clearance(self, center: Point, radius: float) -> float:
        """Nearest-obstacle distance minus the footprint radius (< 0 means overlap)."""
        if radius <= 0.0:
            raise ValueError("footprint radius must be > 0")
        return self.distance_to_nearest(center) - radius

    def nearest_obstacle_index(self, point: Point) -> int:
        """Index of the nearest obstacle; walls use negative indices -1..-4."""
        px, py = point
        best = math.inf
        best_idx = -1
        for k, wall in enumerate(self.walls):
            d = _point_segment_distance(
                px, py, wall.p1[0], wall.p1[1], wall.p2[0], wall.p2[1]
            )
            if d < best:
                best = d
                best_idx = -(k + 1)
        for i, obs in enumerate(self.obstacles):
            if isinstance(obs, Segment):
                d = _point_segment_distance(
                    px, py, obs.p1[0], obs.p1[1], obs.p2[0], obs.p2[1]
                )
            else:
                d = math.hypot(px - obs.center[0], py - obs.center[1]) - obs.radius
            if d < best:
                best = d
                best_idx = i
        return best_idx

    # -- serialization (round-trips losslessly through the config/log format) --

    def to_dict(self) -> dict:
        out = {"name": self.name, "width": self.width, "height": self.height}
        obs = []
        for o in self.obstacles:
            if isinstance(o, Segment):
                obs.append({"kind": "segment", "p1": list(o.p1), "p2": list(o.p2)})
            else:
                obs.append(
                    {
                        "kind": "disc",
                        "center": list(o.center),
                        "radius": o.radius,
                        "thin": o.thin,
                    }
                )
        out["obstacles"] = obs
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Arena":
        obstacles: List[ObstacleShape] = []
        for o in data["obstacles"]:
            if o["kind"] == "segment":
                obstacles.append(Segment(tuple(o["p1"]), tuple(o["p2"])))
            elif o["kind"] == "disc":
                obstacles.append(Disc(tuple(o["center"]), o["radius"], o["thin"]))
            else:
                raise ValueError(f"unknown obstacle kind {o['kind']!r}")
        return cls(data["width"], data["height"], obstacles, data["name"])


class CoverageGrid:
    """Bit grid of visited cells over the arena footprint."""

    def __init__(self, width: float, height: float, cell_size: float = DEFAULT_CELL_SIZE):
        self.width = width
        self.height = height
        self.cell_size = cell_size
        self.nx = math.ceil(width / cell_size)
        self.ny = math.ceil(height / cell_size)
        self._visited: set = set()

    @property
    def total_cells(self) -> int:
        return self.nx * self.ny

    @property
    def visited_count(self) -> int:
        return len(self._visited)

    @property
    def fraction(self) -> float:
        return len(self._visited) / self.total_cells

    def cell_of(self, position: Point) -> Tuple[int, int]:
        x, y = position
        ix = min(int(x / self.cell_size), self.nx - 1)
        iy = min(int(y / self.cell_size), self.ny - 1)
        return ix, iy

    def mark(self, position: Point) -> None:
        x, y = position
        if not (0.0 <= x <= self.width and 0.0 <= y <= self.height):
            raise ValueError(f"position {position} outside arena")
        ix = min(int(x / self.cell_size), self.nx - 1)
        iy = min(int(y / self.cell_size), self.ny - 1)
        self._visited.add(ix * self.ny + iy)


# Convenience wrappers matching the operation-style API used by the tests.

def raycast(arena: Arena, origin: Point, direction: Point, max_range: float) -> float:
    return arena.raycast(origin, direction, max_range)


def min_clearance(arena: Arena, center: Point, radius: float) -> float:
    return arena.min_clearance(center, radius)


def mark_visited(grid: CoverageGrid, position: Point) -> CoverageGrid:
    grid.mark(position)
    return grid


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

HOUSE_WIDTH = 6.6
HOUSE_HEIGHT = 5.6
CORRIDOR_WIDTH_ARENA = 3.0
CORRIDOR_HEIGHT_ARENA = 4.5

N_THIN = 8
THIN_RADIUS = 0.02
N_BOX = 2
BOX_RADIUS = 0.15
PAIRWISE_CLEARANCE = 0.8
CORRIDOR_LEG_YS = (1.6, 2.25, 2.9)

PRESET_NAMES = ("obstacle_free", "obstacle_populated", "narrow_corridor")

# Take-off anchors kept clear of generated obstacles (up to 4 agents + spares).
TAKEOFF_ANCHORS = {
    "obstacle_free": [(0.8, 0.8), (5.8, 0.8), (0.8, 4.8), (5.8, 4.8), (3.3, 2.8)],
    "obstacle_populated": [(0.8, 0.8), (5.8, 0.8), (0.8, 4.8), (5.8, 4.8), (3.3, 2.8)],
    "narrow_corridor": [(1.5, 0.4), (1.5, 4.1), (0.5, 0.4), (2.5, 0.4)],
}


def build_preset(name: str, seed: int = 0) -> Arena:
    """Construct one of the built-in arenas; a pure function of (name, seed)."""
    if name == "obstacle_free":
        return Arena(HOUSE_WIDTH, HOUSE_HEIGHT, [], name=name)

    if name == "obstacle_populated":
        rng = random.Random(f"arena:{name}:{seed}")
        anchors = TAKEOFF_ANCHORS[name]
        placed: List[Disc] = []
        specs = [(THIN_RADIUS, True)] * N_THIN + [(BOX_RADIUS, False)] * N_BOX
        for radius, thin in specs:
            for _ in range(10000):
                cx = rng.uniform(0.8, HOUSE_WIDTH - 0.8)
                cy = rng.uniform(0.8, HOUSE_HEIGHT - 0.8)
                if any(math.hypot(cx - ax, cy - ay) < 1.0 for ax, ay in anchors):
                    continue
                if any(
                    math.hypot(cx - d.center[0], cy - d.center[1]) < PAIRWISE_CLEARANCE
                    for d in placed
                ):
                    continue
                placed.append(Disc((cx, cy), radius, thin))
                break
            else:
                raise RuntimeError("obstacle rejection sampling failed to converge")
        return Arena(HOUSE_WIDTH, HOUSE_HEIGHT, list(placed), name=name)

    if name == "narrow_corridor":
        # Chair legs spaced along the corridor centre line, leaving clear
        # half-channels on either side.
        discs = [
            Disc((CORRIDOR_WIDTH_ARENA / 2.0, leg_y), THIN_RADIUS, thin=True)
            for leg_y in CORRIDOR_LEG_YS
        ]
        return Arena(CORRIDOR_WIDTH_ARENA, CORRIDOR_HEIGHT_ARENA, discs, name=name)

    raise ValueError(f"unknown arena preset {name!r}")
