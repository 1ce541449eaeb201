"""Board model: possibly-infinite positions with a finite description.

A position is a finite piece map plus finitely many periodic rays.  All
operations are pure; positions are treated as immutable values.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Iterator, Optional

from .errors import NonPlayableCell, PositionInvariantError, ValidationError

Cell = tuple[int, int]

DIAGONALS: tuple[Cell, ...] = ((1, 1), (-1, 1), (1, -1), (-1, -1))


class Color(str, Enum):
    BLACK = "black"
    RED = "red"

    def other(self) -> "Color":
        return Color.RED if self is Color.BLACK else Color.BLACK


class Rank(str, Enum):
    PAWN = "pawn"
    KING = "king"


class RuleSet(str, Enum):
    FREE = "free"
    FORCED_JUMP = "forced_jump"
    FORCED_ITERATED_JUMP = "forced_iterated_jump"

    @property
    def jumps_forced(self) -> bool:
        return self is not RuleSet.FREE

    @property
    def iteration_forced(self) -> bool:
        return self is RuleSet.FORCED_ITERATED_JUMP


@dataclass(frozen=True)
class Piece:
    color: Color
    rank: Rank

    def forward_steps(self) -> tuple[Cell, ...]:
        """Diagonal directions this piece may move in.

        Black pawns advance in +y, red pawns in -y; kings move both ways.
        """
        if self.rank is Rank.KING:
            return DIAGONALS
        if self.color is Color.BLACK:
            return ((1, 1), (-1, 1))
        return ((1, -1), (-1, -1))

    def glyph(self) -> str:
        g = "b" if self.color is Color.BLACK else "r"
        return g.upper() if self.rank is Rank.KING else g


BLACK_PAWN = Piece(Color.BLACK, Rank.PAWN)
BLACK_KING = Piece(Color.BLACK, Rank.KING)
RED_PAWN = Piece(Color.RED, Rank.PAWN)
RED_KING = Piece(Color.RED, Rank.KING)


def playable(cell: Cell) -> bool:
    """Dark squares only: (x + y) even, matching the figure coordinates."""
    return (cell[0] + cell[1]) % 2 == 0


@dataclass(frozen=True)
class RayPattern:
    """Periodic family of identical pieces along one diagonal line.

    Cells are ``origin + i*stride*step`` for live indices i.  ``high`` is
    None for an unbounded ray.  ``deletions`` records captured indices so a
    position stays finitely described after arbitrary play.
    """

    id: str
    origin: Cell
    step: Cell
    stride: int
    piece: Piece
    low: int = 0
    high: Optional[int] = None
    deletions: frozenset[int] = field(default_factory=frozenset)

    def cell(self, i: int) -> Cell:
        return (
            self.origin[0] + i * self.stride * self.step[0],
            self.origin[1] + i * self.stride * self.step[1],
        )

    def index_of(self, cell: Cell) -> Optional[int]:
        """Index i with self.cell(i) == cell, live or not, else None."""
        dx = cell[0] - self.origin[0]
        dy = cell[1] - self.origin[1]
        qx = self.stride * self.step[0]
        qy = self.stride * self.step[1]
        if dx % qx or dy % qy:
            return None
        i = dx // qx
        if i != dy // qy:
            return None
        return i

    def is_live(self, i: int) -> bool:
        if i < self.low:
            return False
        if self.high is not None and i > self.high:
            return False
        return i not in self.deletions

    def live_piece_at(self, cell: Cell) -> Optional[Piece]:
        i = self.index_of(cell)
        if i is not None and self.is_live(i):
            return self.piece
        return None

    @property
    def infinite(self) -> bool:
        return self.high is None

    def live_indices(self) -> Iterator[int]:
        """All live indices; infinite iterator for unbounded rays."""
        i = self.low
        while self.high is None or i <= self.high:
            if i not in self.deletions:
                yield i
            i += 1

    def live_count(self) -> Optional[int]:
        if self.high is None:
            return None
        return max(0, self.high - self.low + 1) - sum(
            1 for d in self.deletions if self.low <= d <= self.high
        )

    def normalized(self) -> Optional["RayPattern"]:
        """Re-anchor so low == 0 and trim dead edges; None if no live cell."""
        low, high = self.low, self.high
        dels = {d for d in self.deletions if d >= low and (high is None or d <= high)}
        while low in dels:
            dels.discard(low)
            low += 1
        if high is not None:
            while high in dels:
                dels.discard(high)
                high -= 1
            if high < low:
                return None
        origin = self.cell(low)
        shift = low
        return RayPattern(
            id=self.id,
            origin=origin,
            step=self.step,
            stride=self.stride,
            piece=self.piece,
            low=0,
            high=None if high is None else high - shift,
            deletions=frozenset(d - shift for d in dels),
        )

    def with_deletion(self, i: int) -> "RayPattern":
        return replace(self, deletions=self.deletions | {i})

    def live_first(self) -> Optional[int]:
        i = self.low
        while self.high is None or i <= self.high:
            if i not in self.deletions:
                return i
            i += 1
        return None

    def truncated_before(self, i: int) -> Optional["RayPattern"]:
        """Everything from index i onward removed (infinite-jump capture)."""
        new_high = i - 1
        if self.high is not None:
            new_high = min(new_high, self.high)
        return replace(self, high=new_high).normalized()

    def validate(self) -> None:
        if self.stride <= 0:
            raise PositionInvariantError(f"ray {self.id}: stride must be positive")
        if abs(self.step[0]) != 1 or abs(self.step[1]) != 1:
            raise PositionInvariantError(f"ray {self.id}: step must be diagonal unit")
        if not playable(self.origin):
            raise NonPlayableCell(f"ray {self.id}: origin {self.origin} not playable")
        if self.high is not None and self.high < self.low:
            raise PositionInvariantError(f"ray {self.id}: empty index range")
        for d in self.deletions:
            if d < self.low or (self.high is not None and d > self.high):
                raise PositionInvariantError(f"ray {self.id}: deletion {d} out of range")


@dataclass(frozen=True)
class Position:
    """Immutable board state: finite pieces + rays + side to move + rule set."""

    pieces: tuple[tuple[Cell, Piece], ...]
    rays: tuple[RayPattern, ...]
    to_move: Color
    rule_set: RuleSet

    _finite: dict[Cell, Piece] = field(
        init=False, repr=False, compare=False, hash=False, default=None  # type: ignore[assignment]
    )

    def __post_init__(self):
        object.__setattr__(self, "_finite", dict(self.pieces))

    @staticmethod
    def make(
        pieces: dict[Cell, Piece] | Iterable[tuple[Cell, Piece]],
        rays: Iterable[RayPattern] = (),
        to_move: Color = Color.BLACK,
        rule_set: RuleSet = RuleSet.FORCED_ITERATED_JUMP,
        validate: bool = True,
    ) -> "Position":
        items = tuple(sorted(dict(pieces).items()))
        norm = []
        for r in rays:
            nr = r.normalized()
            if nr is not None:
                norm.append(nr)
        pos = Position(items, tuple(sorted(norm, key=lambda r: r.id)), to_move, rule_set)
        if validate:
            pos.validate()
        return pos

    # -- queries ---------------------------------------------------------

    def piece_at(self, cell: Cell) -> Optional[Piece]:
        """Piece occupying a playable cell, or None."""
        if not playable(cell):
            raise NonPlayableCell(f"cell {cell} is a light square")
        p = self._finite.get(cell)
        if p is not None:
            return p
        for ray in self.rays:
            p = ray.live_piece_at(cell)
            if p is not None:
                return p
        return None

    def is_empty(self, cell: Cell) -> bool:
        return playable(cell) and self.piece_at(cell) is None

    def window(self, x_min: int, x_max: int, y_min: int, y_max: int) -> list[tuple[Cell, Piece]]:
        """All occupied playable cells in the rectangle, lexicographically."""
        found: dict[Cell, Piece] = {}
        for cell, piece in self._finite.items():
            if x_min <= cell[0] <= x_max and y_min <= cell[1] <= y_max:
                found[cell] = piece
        for ray in self.rays:
            for i in self._ray_indices_in_rect(ray, x_min, x_max, y_min, y_max):
                if ray.is_live(i):
                    found[ray.cell(i)] = ray.piece
        return sorted(found.items())

    @staticmethod
    def _ray_indices_in_rect(ray: RayPattern, x_min, x_max, y_min, y_max) -> range:
        """Indices whose cells fall inside the rect (live or not)."""

        def interval(o, q, lo, hi):
            # i with o + i*q in [lo, hi]
            if q > 0:
                return -((o - lo) // q), (hi - o) // q
            return -((o - hi) // (-q)), (o - lo) // (-q)

        qx = ray.stride * ray.step[0]
        qy = ray.stride * ray.step[1]
        ax = interval(ray.origin[0], qx, x_min, x_max)
        ay = interval(ray.origin[1], qy, y_min, y_max)
        lo = max(ax[0], ay[0], ray.low)
        hi = min(ax[1], ay[1])
        if ray.high is not None:
            hi = min(hi, ray.high)
        return range(lo, hi + 1) if hi >= lo else range(0)

    def side_pieces(self, color: Color, limit: Optional[int] = None) -> list[tuple[Cell, Piece]]:
        """Explicit cells of a side; raises if a live infinite ray would overflow.

        With ``limit`` None, only finite material is allowed.
        """
        out = [(c, p) for c, p in self._finite.items() if p.color is color]
        for ray in self.rays:
            if ray.piece.color is not color:
                continue
            n = ray.live_count()
            if n is None:
                from .errors import InfiniteMoveSet

                raise InfiniteMoveSet(f"side {color.value} has live infinite ray {ray.id}")
            for i in ray.live_indices():
                out.append((ray.cell(i), ray.piece))
        return sorted(out)

    def side_has_piece(self, color: Color) -> bool:
        if any(p.color is color for p in self._finite.values()):
            return True
        return any(r.piece.color is color and r.live_first() is not None for r in self.rays)

    def side_all_pawns(self, color: Color) -> bool:
        if any(p.color is color and p.rank is Rank.KING for p in self._finite.values()):
            return False
        return not any(
            r.piece.color is color and r.piece.rank is Rank.KING and r.live_first() is not None
            for r in self.rays
        )

    def live_infinite_rays(self, color: Optional[Color] = None) -> list[RayPattern]:
        return [
            r
            for r in self.rays
            if r.infinite and (color is None or r.piece.color is color)
        ]

    def finite_cells(self) -> dict[Cell, Piece]:
        return dict(self._finite)

    # -- mutation-by-copy -------------------------------------------------

    def _occupancy_edit(
        self,
        remove: Iterable[Cell],
        add: Iterable[tuple[Cell, Piece]],
        truncations: dict[str, int] | None = None,
        flip: bool = True,
    ) -> "Position":
        """Return a copy with cells vacated/added; ray hits become deletions.

        ``truncations`` maps ray id -> first index removed by an infinite jump.
        """
        finite = dict(self._finite)
        rays = {r.id: r for r in self.rays}
        for cell in remove:
            if cell in finite:
                del finite[cell]
                continue
            hit = False
            for rid, ray in rays.items():
                i = ray.index_of(cell)
                if i is not None and ray.is_live(i):
                    rays[rid] = ray.with_deletion(i)
                    hit = True
                    break
            if not hit:
                raise PositionInvariantError(f"no piece to remove at {cell}")
        if truncations:
            for rid, start in truncations.items():
                ray = rays.get(rid)
                if ray is None:
                    raise PositionInvariantError(f"unknown ray {rid}")
                t = ray.truncated_before(start)
                if t is None:
                    del rays[rid]
                else:
                    rays[rid] = t
        for cell, piece in add:
            finite[cell] = piece
        return Position.make(
            finite,
            rays.values(),
            to_move=self.to_move.other() if flip else self.to_move,
            rule_set=self.rule_set,
            validate=False,
        )

    def with_to_move(self, color: Color) -> "Position":
        return Position(self.pieces, self.rays, color, self.rule_set)

    def with_rule_set(self, rs: RuleSet) -> "Position":
        return Position(self.pieces, self.rays, self.to_move, rs)

    def translated(self, dx: int, dy: int) -> "Position":
        if (dx + dy) % 2:
            raise NonPlayableCell("translation must preserve square parity")
        pieces = {(c[0] + dx, c[1] + dy): p for c, p in self._finite.items()}
        rays = [
            replace(r, origin=(r.origin[0] + dx, r.origin[1] + dy)) for r in self.rays
        ]
        return Position.make(pieces, rays, self.to_move, self.rule_set, validate=False)

    # -- validation & identity -------------------------------------------

    def validate(self) -> None:
        seen: dict[Cell, str] = {}
        for cell, piece in self._finite.items():
            if not playable(cell):
                raise NonPlayableCell(f"piece on light square {cell}")
            seen[cell] = "finite"
        for ray in self.rays:
            ray.validate()
            count = ray.live_count()
            probe = ray.live_indices()
            indices = (
                list(probe)
                if count is not None
                else [next(probe) for _ in range(3)]  # spot-check head of infinite rays
            )
            for i in indices:
                cell = ray.cell(i)
                if cell in seen:
                    raise PositionInvariantError(
                        f"cell {cell} occupied twice (ray {ray.id} and {seen[cell]})"
                    )
                seen[cell] = f"ray {ray.id}"
        # full pairwise ray-overlap check (line coincidence)
        for i, a in enumerate(self.rays):
            for b in self.rays[i + 1 :]:
                if self._rays_may_collide(a, b):
                    raise PositionInvariantError(f"rays {a.id} and {b.id} share a live cell")
        for cell in self._finite:
            for ray in self.rays:
                if ray.live_piece_at(cell) is not None:
                    raise PositionInvariantError(
                        f"cell {cell} occupied by both a piece and ray {ray.id}"
                    )

    @staticmethod
    def _rays_may_collide(a: RayPattern, b: RayPattern) -> bool:
        # live-cell intersection of two arithmetic diagonal progressions
        if a.step[0] * a.step[1] != b.step[0] * b.step[1]:
            # transversal lines: at most one meeting point
            # solve a.cell(i) == b.cell(j) over rationals
            sa = (a.stride * a.step[0], a.stride * a.step[1])
            sb = (b.stride * b.step[0], b.stride * b.step[1])
            det = sa[0] * (-sb[1]) - (-sb[0]) * sa[1]
            rx = b.origin[0] - a.origin[0]
            ry = b.origin[1] - a.origin[1]
            ni = rx * (-sb[1]) - (-sb[0]) * ry
            nj = sa[0] * ry - rx * sa[1]
            if det == 0 or ni % det or nj % det:
                return False
            return a.is_live(ni // det) and b.is_live(nj // det)
        # parallel family: same line?
        if (a.origin[0] - b.origin[0]) * a.step[1] != (a.origin[1] - b.origin[1]) * a.step[0]:
            return False
        # collinear: compare progressions index by index over the overlap
        i = b.index_of(a.origin)
        j = a.index_of(b.origin)
        if i is None and j is None:
            # incompatible strides may still mesh; scan a few periods
            g = a.stride * b.stride
            for k in range(-g, g + 1):
                c = a.cell(k)
                if a.is_live(k) and b.live_piece_at(c) is not None:
                    return True
            return False
        for k in range(-2 * b.stride, 2 * b.stride + 1):
            if a.is_live(k):
                jj = b.index_of(a.cell(k))
                if jj is not None and b.is_live(jj):
                    return True
        # unbounded overlap would repeat within the scanned window for meshed strides
        return False

    def canonical_key(self) -> tuple:
        """Equal keys iff identical occupied-cell content, side, and rule set."""
        finite = dict(self._finite)
        ray_part = []
        for ray in self.rays:
            n = ray.normalized()
            if n is None:
                continue
            count = n.live_count()
            if count is not None and count <= 256:
                for i in n.live_indices():
                    finite[n.cell(i)] = n.piece
            else:
                ray_part.append(
                    (n.origin, n.step, n.stride, n.piece.color.value, n.piece.rank.value,
                     n.high, tuple(sorted(n.deletions)))
                )
        return (
            self.to_move.value,
            self.rule_set.value,
            tuple(sorted((c, p.color.value, p.rank.value) for c, p in finite.items())),
            tuple(sorted(ray_part)),
        )

    # -- documents ---------------------------------------------------------

    def to_document(self) -> dict:
        return {
            "to_move": self.to_move.value,
            "rule_set": self.rule_set.value,
            "pieces": [
                {"x": c[0], "y": c[1], "color": p.color.value, "rank": p.rank.value}
                for c, p in sorted(self._finite.items())
            ],
            "rays": [
                {
                    "id": r.id,
                    "origin": [r.origin[0], r.origin[1]],
                    "step": [r.step[0], r.step[1]],
                    "stride": r.stride,
                    "piece": {"color": r.piece.color.value, "rank": r.piece.rank.value},
                    "low": r.low,
                    "high": "inf" if r.high is None else r.high,
                    "deletions": sorted(r.deletions),
                }
                for r in sorted(self.rays, key=lambda r: r.id)
            ],
        }

    @staticmethod
    def from_document(doc: dict) -> "Position":
        try:
            pieces = {
                (int(p["x"]), int(p["y"])): Piece(Color(p["color"]), Rank(p["rank"]))
                for p in doc.get("pieces", [])
            }
            rays = [
                RayPattern(
                    id=str(r["id"]),
                    origin=(int(r["origin"][0]), int(r["origin"][1])),
                    step=(int(r["step"][0]), int(r["step"][1])),
                    stride=int(r["stride"]),
                    piece=Piece(Color(r["piece"]["color"]), Rank(r["piece"]["rank"])),
                    low=int(r["low"]),
                    high=None if r["high"] == "inf" else int(r["high"]),
                    deletions=frozenset(int(d) for d in r.get("deletions", [])),
                )
                for r in doc.get("rays", [])
            ]
            return Position.make(
                pieces, rays, Color(doc["to_move"]), RuleSet(doc["rule_set"])
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise ValidationError(f"bad position document: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_document(), sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "Position":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"bad JSON: {exc}") from exc
        return Position.from_document(doc)
