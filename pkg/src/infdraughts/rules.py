"""Legal-move enumeration: simple steps, branching iterated jumps, infinite jumps.

Infinite-jump detection: a jump path is certified infinite when its hops
align with a single live ray (stride 2, matching step) whose tail is
unbounded, undeleted, and geometrically quiet (no foreign material within
interference range).  Otherwise enumeration proceeds to the hop cutoff and
errors, making the unsupported fragment explicit.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .board import (
    DIAGONALS,
    Cell,
    Color,
    Piece,
    Position,
    Rank,
    RayPattern,
    RuleSet,
    playable,
)
from .errors import (
    IllegalMove,
    InfiniteMoveSet,
    NonPlayableCell,
    UndeterminedIteration,
)

HOP_CUTOFF = 64
# Extra quiet hops expanded before certifying a tail, so the solver always
# sees a few stop representatives inside the periodic region.
QUIET_MARGIN = 3


@dataclass(frozen=True)
class InfiniteTail:
    """Endless continuation along a ray, capturing indices >= start."""

    ray_id: str
    start: Optional[int] = None  # None in parsed-but-unresolved moves


@dataclass(frozen=True)
class Move:
    """A simple step or a (possibly infinite) iterated jump.

    ``path`` holds successive landing cells.  For a simple move it is the
    single destination and ``captures`` is empty.  For an infinite jump,
    ``path``/``captures`` cover the explicit prefix and ``tail`` names the
    ray consumed forever after; the mover is removed from the board.
    """

    src: Cell
    path: tuple[Cell, ...]
    captures: tuple[Cell, ...] = ()
    tail: Optional[InfiniteTail] = None

    @property
    def is_jump(self) -> bool:
        return bool(self.captures) or self.tail is not None

    @property
    def is_infinite(self) -> bool:
        return self.tail is not None

    @property
    def dest(self) -> Optional[Cell]:
        if self.is_infinite:
            return None
        return self.path[-1]

    def text(self) -> str:
        if not self.is_jump:
            return f"a({self.src[0]},{self.src[1]})-({self.path[0][0]},{self.path[0][1]})"
        out = [f"a({self.src[0]},{self.src[1]})"]
        out.extend(f"x({c[0]},{c[1]})" for c in self.path)
        if self.tail is not None:
            out.append(f"x…∞[{self.tail.ray_id}]")
        return "".join(out)

    def matches(self, other: "Move") -> bool:
        """Structural match ignoring unresolved tail start indices."""
        if (self.src, self.path) != (other.src, other.path):
            return False
        if (self.tail is None) != (other.tail is None):
            return False
        if self.tail is not None and self.tail.ray_id != other.tail.ray_id:
            return False
        return True


_MOVE_RE = re.compile(
    r"^a\((-?\d+),(-?\d+)\)"
    r"(?:-\((-?\d+),(-?\d+)\)$"
    r"|((?:x\(-?\d+,-?\d+\))+)(x…∞\[([^\]]+)\])?$)"
)
_HOP_RE = re.compile(r"x\((-?\d+),(-?\d+)\)")


def parse_move(text: str) -> Move:
    """Inverse of Move.text(); captures are reconstructed from midpoints."""
    m = _MOVE_RE.match(text)
    if not m:
        raise IllegalMove(f"unparseable move text: {text!r}")
    src = (int(m.group(1)), int(m.group(2)))
    if m.group(3) is not None:
        return Move(src=src, path=((int(m.group(3)), int(m.group(4))),))
    landings = tuple(
        (int(a), int(b)) for a, b in _HOP_RE.findall(m.group(5))
    )
    captures = []
    cur = src
    for nxt in landings:
        dx, dy = nxt[0] - cur[0], nxt[1] - cur[1]
        if abs(dx) != 2 or abs(dy) != 2:
            raise IllegalMove(f"non-hop segment {cur}->{nxt} in {text!r}")
        captures.append((cur[0] + dx // 2, cur[1] + dy // 2))
        cur = nxt
    tail = InfiniteTail(m.group(7)) if m.group(6) else None
    return Move(src=src, path=landings, captures=tuple(captures), tail=tail)


@dataclass
class JumpNode:
    """One hop in a jump tree; ``maximal`` iff no continuation exists."""

    landing: Cell
    victim: Cell
    children: list["JumpNode"] = field(default_factory=list)
    tail: Optional[InfiniteTail] = None

    @property
    def maximal(self) -> bool:
        return not self.children and self.tail is None

    @property
    def extendable(self) -> bool:
        return not self.maximal


@dataclass
class JumpTree:
    src: Cell
    piece: Piece
    children: list[JumpNode] = field(default_factory=list)
    tail: Optional[InfiniteTail] = None  # tail certified before any hop

    @property
    def has_jump(self) -> bool:
        return bool(self.children) or self.tail is not None

    def paths(self) -> Iterator[tuple[tuple[Cell, ...], tuple[Cell, ...], Optional[InfiniteTail], bool]]:
        """Yield (landings, captures, tail, maximal) for every tree node."""

        def walk(node, landings, captures):
            landings = landings + (node.landing,)
            captures = captures + (node.victim,)
            yield landings, captures, node.tail, node.maximal
            for child in node.children:
                yield from walk(child, landings, captures)

        if self.tail is not None:
            yield (), (), self.tail, False
        for child in self.children:
            yield from walk(child, (), ())

    def to_detail(self) -> dict:
        """UI-consumable geometry: stop points, branch points, infinite flags."""

        def node_detail(n: JumpNode) -> dict:
            return {
                "landing": list(n.landing),
                "capture": list(n.victim),
                "maximal": n.maximal,
                "infinite_tail": None if n.tail is None else n.tail.ray_id,
                "children": [node_detail(c) for c in n.children],
            }

        return {
            "src": list(self.src),
            "infinite_tail": None if self.tail is None else self.tail.ray_id,
            "children": [node_detail(c) for c in self.children],
        }


def _chebyshev(a: Cell, b: Cell) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def ray_quiet_index(pos: Position, ray: RayPattern) -> Optional[int]:
    """First index from which the ray's tail is free of foreign interference.

    Material within Chebyshev distance 3 of a ray cell can affect hops near
    it (victims sit 1 away, landings 2).  Returns None when interference is
    unbounded (a parallel infinite ray too close), meaning no tail along
    this ray can ever be certified.
    """
    worst = ray.low  # certification never before the first live index
    for cell in pos.finite_cells():
        idx = _indices_near(ray, cell, 3)
        for i in idx:
            worst = max(worst, i + 1)
    for other in pos.rays:
        if other.id == ray.id:
            continue
        bound = _ray_interference_bound(ray, other)
        if bound is None:
            return None
        worst = max(worst, bound)
    return worst


def _indices_near(ray: RayPattern, cell: Cell, radius: int) -> list[int]:
    """Ray indices whose cells lie within Chebyshev radius of a cell."""
    a0 = ray.origin[0] + ray.origin[1]
    b0 = ray.origin[0] - ray.origin[1]
    da = ray.stride * (ray.step[0] + ray.step[1])
    db = ray.stride * (ray.step[0] - ray.step[1])
    ca, cb = cell[0] + cell[1], cell[0] - cell[1]
    out = []
    # one of da/db is 0 for diagonal steps; solve on the varying axis
    if da != 0:
        if abs(cb - b0) > 2 * radius:
            return []
        lo = (ca - a0 - 2 * radius) // da
        hi = (ca - a0 + 2 * radius) // da
    else:
        if abs(ca - a0) > 2 * radius:
            return []
        lo = (cb - b0 - 2 * radius) // db
        hi = (cb - b0 + 2 * radius) // db
    lo, hi = min(lo, hi), max(lo, hi)
    for i in range(lo - 1, hi + 2):
        if _chebyshev(ray.cell(i), cell) <= radius:
            out.append(i)
    return out


def _ray_interference_bound(ray: RayPattern, other: RayPattern) -> Optional[int]:
    """Largest ray index disturbed by `other`, or None if unbounded."""
    parallel = ray.step[0] * ray.step[1] == other.step[0] * other.step[1]
    if parallel:
        # same diagonal family: compare the invariant coordinate
        if ray.step[0] * ray.step[1] == 1:
            inv_r = ray.origin[0] - ray.origin[1]
            inv_o = other.origin[0] - other.origin[1]
        else:
            inv_r = ray.origin[0] + ray.origin[1]
            inv_o = other.origin[0] + other.origin[1]
        if abs(inv_r - inv_o) > 6:
            return ray.low
        if other.infinite and other.step == ray.step:
            return None  # overlapping direction, interference never ends
        worst = ray.low
        for j in _live_index_sample(other):
            for i in _indices_near(ray, other.cell(j), 3):
                worst = max(worst, i + 1)
        if other.infinite:
            return None  # anti-directed infinite parallel ray: tail overlap
        return worst
    # transversal: bounded interference near the crossing point
    worst = ray.low
    for j in _live_index_sample(other, around_ray=ray):
        for i in _indices_near(ray, other.cell(j), 3):
            worst = max(worst, i + 1)
    return worst


def _live_index_sample(other: RayPattern, around_ray: Optional[RayPattern] = None) -> list[int]:
    """Live indices of `other` that could matter; finite by construction."""
    if other.high is not None:
        return [i for i in range(other.low, other.high + 1) if other.is_live(i)]
    # infinite transversal ray: only indices near the crossing with around_ray
    assert around_ray is not None, "infinite parallel rays handled by caller"
    # crossing point of the two lines in (a, b) = (x+y, x-y) coordinates
    if other.step[0] * other.step[1] == 1:
        target_a = around_ray.origin[0] + around_ray.origin[1]
        da = other.stride * (other.step[0] + other.step[1])
        j0 = (target_a - (other.origin[0] + other.origin[1])) // da
    else:
        target_b = around_ray.origin[0] - around_ray.origin[1]
        db = other.stride * (other.step[0] - other.step[1])
        j0 = (target_b - (other.origin[0] - other.origin[1])) // db
    lo = max(other.low, j0 - 6)
    hi = j0 + 6
    return [j for j in range(lo, hi + 1) if other.is_live(j)]


class _JumpWalker:
    """DFS over hop continuations with infinite-tail certification."""

    def __init__(self, pos: Position, src: Cell, piece: Piece):
        self.pos = pos
        self.src = src
        self.piece = piece
        self.enemy = piece.color.other()
        self._quiet: dict[str, Optional[int]] = {}

    def quiet_index(self, ray: RayPattern) -> Optional[int]:
        if ray.id not in self._quiet:
            self._quiet[ray.id] = ray_quiet_index(self.pos, ray)
        return self._quiet[ray.id]

    def empty_during(self, cell: Cell, captured: frozenset[Cell]) -> bool:
        if cell == self.src or cell in captured:
            return True
        return self.pos.piece_at(cell) is None

    def victim_at(self, cell: Cell, captured: frozenset[Cell]) -> bool:
        if cell == self.src or cell in captured:
            return False
        p = self.pos.piece_at(cell)
        return p is not None and p.color is self.enemy

    def certify_tail(self, cur: Cell, captured: frozenset[Cell]) -> Optional[InfiniteTail]:
        for ray in self.pos.rays:
            if not ray.infinite or ray.stride != 2 or ray.piece.color is not self.enemy:
                continue
            step = ray.step
            if step not in self.piece.forward_steps():
                continue
            j = ray.index_of((cur[0] + step[0], cur[1] + step[1]))
            if j is None or j < ray.low or not ray.is_live(j):
                continue
            if any(d >= j for d in ray.deletions):
                continue
            if any((idx := ray.index_of(c)) is not None and idx >= j for c in captured):
                continue
            # no backward branch from here
            if ray.is_live(j - 1) and ray.cell(j - 1) not in captured:
                continue
            q = self.quiet_index(ray)
            if q is None or j < q + QUIET_MARGIN:
                continue
            return InfiniteTail(ray.id, j)
        return None

    def expand(self, cur: Cell, captured: frozenset[Cell]) -> tuple[list[JumpNode], Optional[InfiniteTail]]:
        tail = self.certify_tail(cur, captured)
        if tail is not None:
            return [], tail
        if len(captured) >= HOP_CUTOFF:
            raise UndeterminedIteration(
                f"jump from {self.src} exceeded {HOP_CUTOFF} hops without a ray certificate"
            )
        children = []
        for d in self.piece.forward_steps():
            victim = (cur[0] + d[0], cur[1] + d[1])
            landing = (cur[0] + 2 * d[0], cur[1] + 2 * d[1])
            if self.victim_at(victim, captured) and self.empty_during(landing, captured):
                sub_children, sub_tail = self.expand(landing, captured | {victim})
                children.append(
                    JumpNode(landing=landing, victim=victim, children=sub_children, tail=sub_tail)
                )
        return children, None


def jump_tree(pos: Position, src: Cell) -> JumpTree:
    """All single-and-iterated jump continuations of the piece at src."""
    piece = pos.piece_at(src)
    if piece is None or piece.color is not pos.to_move:
        raise IllegalMove(f"no {pos.to_move.value} piece at {src}")
    walker = _JumpWalker(pos, src, piece)
    children, tail = walker.expand(src, frozenset())
    return JumpTree(src=src, piece=piece, children=children, tail=tail)


def _jump_candidates(pos: Position) -> list[Cell]:
    """Cells of to_move pieces that could have a jump (adjacent to an enemy)."""
    mover = pos.to_move
    enemy = mover.other()
    finite = pos.finite_cells()
    candidates: set[Cell] = set()

    def consider(cell: Cell) -> None:
        p = pos.piece_at(cell)
        if p is not None and p.color is mover:
            candidates.add(cell)

    # neighbors of enemy finite pieces
    for cell, piece in finite.items():
        if piece.color is enemy:
            for d in DIAGONALS:
                consider((cell[0] - d[0], cell[1] - d[1]))
    # mover finite pieces adjacent to enemy ray cells
    for cell, piece in finite.items():
        if piece.color is not mover:
            continue
        for ray in pos.rays:
            if ray.piece.color is enemy and any(
                ray.is_live(i) and _chebyshev(ray.cell(i), cell) == 1
                for i in _indices_near(ray, cell, 1)
            ):
                candidates.add(cell)
    # mover ray pieces adjacent to enemy material
    for ray in pos.rays:
        if ray.piece.color is not mover:
            continue
        for cell, piece in finite.items():
            if piece.color is enemy:
                for i in _indices_near(ray, cell, 1):
                    if ray.is_live(i) and _chebyshev(ray.cell(i), cell) == 1:
                        candidates.add(ray.cell(i))
        for other in pos.rays:
            if other.piece.color is not enemy:
                continue
            for i in _ray_adjacent_indices(ray, other):
                if ray.is_live(i):
                    candidates.add(ray.cell(i))
    return sorted(candidates)


def _ray_adjacent_indices(ray: RayPattern, other: RayPattern) -> list[int]:
    """Indices of `ray` whose cells are diagonally adjacent to live `other` cells."""
    parallel = ray.step[0] * ray.step[1] == other.step[0] * other.step[1]
    if parallel:
        if ray.step[0] * ray.step[1] == 1:
            gap = abs((ray.origin[0] - ray.origin[1]) - (other.origin[0] - other.origin[1]))
        else:
            gap = abs((ray.origin[0] + ray.origin[1]) - (other.origin[0] + other.origin[1]))
        if gap > 2:
            return []
        if ray.infinite and other.infinite:
            raise InfiniteMoveSet(
                f"rays {ray.id} and {other.id} are adjacent along unbounded overlap"
            )
        if other.infinite:
            # scan the finite ray's own cells against the infinite neighbor
            out = []
            for i in range(ray.low, ray.high + 1):
                if not ray.is_live(i):
                    continue
                c = ray.cell(i)
                for j in _indices_near(other, c, 1):
                    if other.is_live(j) and _chebyshev(other.cell(j), c) == 1:
                        out.append(i)
            return sorted(set(out))
    out = []
    for j in _live_index_sample(other, around_ray=ray):
        for i in _indices_near(ray, other.cell(j), 1):
            if _chebyshev(ray.cell(i), other.cell(j)) == 1:
                out.append(i)
    return sorted(set(out))


def _tree_moves(tree: JumpTree, rs: RuleSet, fold_tail_stops: bool) -> list[Move]:
    moves = []
    saw_tail = False
    for landings, captures, tail, maximal in tree.paths():
        if tail is not None:
            saw_tail = True
            moves.append(Move(src=tree.src, path=landings, captures=captures, tail=tail))
            if not rs.iteration_forced and landings:
                # stopping at the certified spot itself is also legal
                moves.append(Move(src=tree.src, path=landings, captures=captures))
        elif rs.iteration_forced:
            if maximal:
                moves.append(Move(src=tree.src, path=landings, captures=captures))
        else:
            moves.append(Move(src=tree.src, path=landings, captures=captures))
    if saw_tail and not rs.iteration_forced and not fold_tail_stops:
        raise InfiniteMoveSet(
            f"jump from {tree.src} admits infinitely many stopping points"
        )
    return moves


def legal_moves(pos: Position, rs: Optional[RuleSet] = None, fold_tail_stops: bool = False) -> list[Move]:
    """Legal moves under the given rule set (defaults to the position's own).

    With ``fold_tail_stops`` the infinitely many stopping points along a
    certified ray tail are represented only by their explicit quiet-phase
    prefixes (used by the quotient solver); plain enumeration raises
    InfiniteMoveSet instead of silently omitting moves.
    """
    rs = rs or pos.rule_set
    jumps: list[Move] = []
    for src in _jump_candidates(pos):
        tree = jump_tree(pos, src)
        if tree.has_jump:
            jumps.extend(_tree_moves(tree, rs, fold_tail_stops))
    finite_jumps = sorted(
        (m for m in jumps if not m.is_infinite), key=lambda m: (m.src, m.path)
    )
    infinite_jumps = sorted(
        (m for m in jumps if m.is_infinite), key=lambda m: (m.src, m.path, m.tail.ray_id)
    )
    if rs.jumps_forced and (finite_jumps or infinite_jumps):
        return finite_jumps + infinite_jumps
    simples = _simple_moves(pos)
    if rs.jumps_forced:
        return simples
    return finite_jumps + simples + infinite_jumps


def _simple_moves(pos: Position) -> list[Move]:
    mover = pos.to_move
    out = []
    for ray in pos.rays:
        if ray.piece.color is mover and ray.infinite:
            raise InfiniteMoveSet(
                f"side {mover.value} owns live infinite ray {ray.id}; simple moves are unbounded"
            )
    cells: list[tuple[Cell, Piece]] = [
        (c, p) for c, p in pos.finite_cells().items() if p.color is mover
    ]
    for ray in pos.rays:
        if ray.piece.color is mover:
            for i in ray.live_indices():
                cells.append((ray.cell(i), ray.piece))
    for cell, piece in cells:
        for d in piece.forward_steps():
            dest = (cell[0] + d[0], cell[1] + d[1])
            if pos.piece_at(dest) is None:
                out.append(Move(src=cell, path=(dest,)))
    return sorted(out, key=lambda m: (m.src, m.path))


def has_any_move(pos: Position) -> bool:
    """Move existence without full enumeration; safe on infinite rays."""
    mover = pos.to_move
    for src in _jump_candidates(pos):
        piece = pos.piece_at(src)
        if piece is None:
            continue
        for d in piece.forward_steps():
            victim = (src[0] + d[0], src[1] + d[1])
            landing = (src[0] + 2 * d[0], src[1] + 2 * d[1])
            vp = pos.piece_at(victim)
            if vp is not None and vp.color is not mover and pos.piece_at(landing) is None:
                return True
    # a live infinite ray always has a movable far piece (tails are uniform)
    if pos.live_infinite_rays(mover):
        return True
    for cell, piece in pos.finite_cells().items():
        if piece.color is not mover:
            continue
        for d in piece.forward_steps():
            if pos.piece_at((cell[0] + d[0], cell[1] + d[1])) is None:
                return True
    for ray in pos.rays:
        if ray.piece.color is mover:
            for i in ray.live_indices():
                cell = ray.cell(i)
                for d in ray.piece.forward_steps():
                    if pos.piece_at((cell[0] + d[0], cell[1] + d[1])) is None:
                        return True
    return False


def terminal_status(pos: Position) -> Optional[Color]:
    """Winner if the side to move has no legal move, else None."""
    return None if has_any_move(pos) else pos.to_move.other()


def _resolve_tail(pos: Position, move: Move, final: Cell, captured: frozenset[Cell]) -> Move:
    piece = pos.piece_at(move.src)
    walker = _JumpWalker(pos, move.src, piece)
    tail = walker.certify_tail(final, captured)
    if tail is None or tail.ray_id != move.tail.ray_id:
        raise IllegalMove(f"no certified infinite continuation for {move.text()}")
    return Move(src=move.src, path=move.path, captures=move.captures, tail=tail)


def check_move_legal(pos: Position, move: Move) -> Move:
    """Structural legality check; returns the move with tail start resolved."""
    piece = pos.piece_at(move.src)
    if piece is None or piece.color is not pos.to_move:
        raise IllegalMove(f"no {pos.to_move.value} piece at {move.src}")
    rs = pos.rule_set
    if not move.is_jump:
        if len(move.path) != 1:
            raise IllegalMove("simple move must have one destination")
        dest = move.path[0]
        d = (dest[0] - move.src[0], dest[1] - move.src[1])
        if d not in piece.forward_steps():
            raise IllegalMove(f"illegal step direction {d} for {piece.rank.value}")
        if pos.piece_at(dest) is not None:
            raise IllegalMove(f"destination {dest} occupied")
        if rs.jumps_forced and _any_jump_exists(pos):
            raise IllegalMove("a jump is available and jumping is obligatory")
        return move
    walker = _JumpWalker(pos, move.src, piece)
    cur = move.src
    captured: frozenset[Cell] = frozenset()
    for landing, victim in zip(move.path, move.captures):
        d = (landing[0] - cur[0], landing[1] - cur[1])
        if (d[0] // 2, d[1] // 2) not in piece.forward_steps() or abs(d[0]) != 2 or abs(d[1]) != 2:
            raise IllegalMove(f"illegal hop {cur}->{landing}")
        if victim != (cur[0] + d[0] // 2, cur[1] + d[1] // 2):
            raise IllegalMove(f"capture {victim} is not the jumped cell")
        if not walker.victim_at(victim, captured):
            raise IllegalMove(f"no capturable enemy piece at {victim}")
        if not walker.empty_during(landing, captured):
            raise IllegalMove(f"landing {landing} not empty")
        captured = captured | {victim}
        cur = landing
    if move.is_infinite:
        return _resolve_tail(pos, move, cur, captured)
    if not move.captures:
        raise IllegalMove("jump move with no captures")
    if rs.iteration_forced:
        more = walker.certify_tail(cur, captured)
        if more is None:
            for d in piece.forward_steps():
                victim = (cur[0] + d[0], cur[1] + d[1])
                landing = (cur[0] + 2 * d[0], cur[1] + 2 * d[1])
                if walker.victim_at(victim, captured) and walker.empty_during(landing, captured):
                    raise IllegalMove("iterated jumping must continue to a maximal stop")
        else:
            raise IllegalMove("iterated jumping must continue along the ray")
    return move


def _any_jump_exists(pos: Position) -> bool:
    for src in _jump_candidates(pos):
        piece = pos.piece_at(src)
        if piece is None or piece.color is not pos.to_move:
            continue
        for d in piece.forward_steps():
            victim = (src[0] + d[0], src[1] + d[1])
            landing = (src[0] + 2 * d[0], src[1] + 2 * d[1])
            vp = pos.piece_at(victim)
            if vp is not None and vp.color is not pos.to_move and pos.piece_at(landing) is None:
                return True
    return False


def apply_move(pos: Position, move: Move) -> Position:
    """Apply a legal move; raises IllegalMove otherwise."""
    move = check_move_legal(pos, move)
    if not move.is_jump:
        piece = pos.piece_at(move.src)
        return pos._occupancy_edit(
            remove=[move.src], add=[(move.path[0], piece)]
        )
    piece = pos.piece_at(move.src)
    if move.is_infinite:
        return pos._occupancy_edit(
            remove=[move.src, *move.captures],
            add=[],
            truncations={move.tail.ray_id: move.tail.start},
        )
    return pos._occupancy_edit(
        remove=[move.src, *move.captures],
        add=[(move.path[-1], piece)],
    )
