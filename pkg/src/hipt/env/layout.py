"""Kitchen layout parsing and the bundled layout library.

A layout is a rectangular character grid: one character per cell, lines of
equal length, UTF-8 with LF endings.

    X  counter          O  onion dispenser     1  player-one start (floor)
    `` (space) floor    D  dish dispenser      2  player-two start (floor)
    P  cooking pot      S  serving counter
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field

FLOOR = " "
COUNTER = "X"
POT = "P"
ONION_DISPENSER = "O"
DISH_DISPENSER = "D"
SERVING = "S"

_TERRAIN_CHARS = frozenset(FLOOR + COUNTER + POT + ONION_DISPENSER + DISH_DISPENSER + SERVING)
_START_CHARS = frozenset("12")

BUNDLED_LAYOUT_NAMES = (
    "cramped_room",
    "asymmetric_advantages",
    "coordination_ring",
    "forced_coordination",
    "counter_circuit",
)

# Orientation indices share the movement-action order: N, S, E, W.
ORIENT_NORTH, ORIENT_SOUTH, ORIENT_EAST, ORIENT_WEST = 0, 1, 2, 3
ORIENT_NAMES = ("N", "S", "E", "W")
ORIENT_DELTAS = ((0, -1), (0, 1), (1, 0), (-1, 0))


class LayoutError(ValueError):
    """Base class for layout parse/validation failures."""


class MalformedCellError(LayoutError):
    def __init__(self, char: str, line: int, column: int):
        super().__init__(f"unknown cell character {char!r} at line {line}, column {column}")
        self.line, self.column = line, column


class RaggedGridError(LayoutError):
    def __init__(self, line: int, got: int, expected: int):
        super().__init__(f"line {line} has {got} cells, expected {expected}")
        self.line = line


class StartCountMismatch(LayoutError):
    def __init__(self, marker: str, count: int, line: int | None = None, column: int | None = None):
        where = f" (extra at line {line}, column {column})" if line is not None else ""
        super().__init__(f"layout needs exactly one {marker!r} start marker, found {count}{where}")


class MissingCellKindError(LayoutError):
    def __init__(self, kind: str):
        super().__init__(f"layout has no {kind} cell")
        self.kind = kind


class OpenBoundaryError(LayoutError):
    def __init__(self, line: int, column: int):
        super().__init__(f"boundary cell at line {line}, column {column} must not be floor")


@dataclass(frozen=True)
class Layout:
    """Static terrain of one kitchen plus the two ordered start poses."""

    name: str
    width: int
    height: int
    terrain: tuple[str, ...]  # rows of terrain chars, start markers replaced by floor
    start_positions: tuple[tuple[tuple[int, int], int], ...]  # ((x, y), orient) for seats 0, 1
    cook_time: int = 20

    # Derived cell inventories, ordered row-major for canonical encodings.
    pot_cells: tuple[tuple[int, int], ...] = field(default=(), compare=False)
    counter_cells: tuple[tuple[int, int], ...] = field(default=(), compare=False)
    onion_dispensers: tuple[tuple[int, int], ...] = field(default=(), compare=False)
    dish_dispensers: tuple[tuple[int, int], ...] = field(default=(), compare=False)
    serving_cells: tuple[tuple[int, int], ...] = field(default=(), compare=False)
    floor_cells: frozenset[tuple[int, int]] = field(default=frozenset(), compare=False)

    def cell(self, x: int, y: int) -> str:
        return self.terrain[y][x]

    def is_floor(self, x: int, y: int) -> bool:
        return (x, y) in self.floor_cells

    def pot_index(self, pos: tuple[int, int]) -> int:
        return self.pot_cells.index(pos)


def parse_layout(text: str, name: str = "custom", cook_time: int = 20) -> Layout:
    """Parse grid text into a validated Layout.

    Raises a LayoutError subclass naming line and column for the first
    malformed cell, for a wrong start-marker count, a ragged grid, a floor
    cell on the grid boundary, or a missing required cell kind.
    """
    lines = text.split("\n")
    while lines and lines[-1] == "":
        lines.pop()
    while lines and lines[0] == "":
        lines.pop(0)
    if not lines:
        raise LayoutError("empty layout text")

    width = len(lines[0])
    height = len(lines)
    starts: dict[str, tuple[int, int]] = {}
    start_counts = {"1": 0, "2": 0}
    rows: list[str] = []
    for y, line in enumerate(lines):
        if len(line) != width:
            raise RaggedGridError(y + 1, len(line), width)
        row = []
        for x, ch in enumerate(line):
            if ch in _START_CHARS:
                start_counts[ch] += 1
                if start_counts[ch] > 1:
                    raise StartCountMismatch(ch, start_counts[ch], y + 1, x + 1)
                starts[ch] = (x, y)
                row.append(FLOOR)
            elif ch in _TERRAIN_CHARS:
                row.append(ch)
            else:
                raise MalformedCellError(ch, y + 1, x + 1)
        rows.append("".join(row))

    for marker in ("1", "2"):
        if start_counts[marker] != 1:
            raise StartCountMismatch(marker, start_counts[marker])

    terrain = tuple(rows)
    pot_cells, counter_cells, onion_cells, dish_cells, serving_cells = [], [], [], [], []
    floor: set[tuple[int, int]] = set()
    for y, row in enumerate(terrain):
        for x, ch in enumerate(row):
            on_boundary = x == 0 or y == 0 or x == width - 1 or y == height - 1
            if ch == FLOOR:
                if on_boundary:
                    raise OpenBoundaryError(y + 1, x + 1)
                floor.add((x, y))
            elif ch == POT:
                pot_cells.append((x, y))
            elif ch == COUNTER:
                counter_cells.append((x, y))
            elif ch == ONION_DISPENSER:
                onion_cells.append((x, y))
            elif ch == DISH_DISPENSER:
                dish_cells.append((x, y))
            elif ch == SERVING:
                serving_cells.append((x, y))

    for kind, cells in (
        ("pot", pot_cells),
        ("onion dispenser", onion_cells),
        ("dish dispenser", dish_cells),
        ("serving counter", serving_cells),
    ):
        if not cells:
            raise MissingCellKindError(kind)

    return Layout(
        name=name,
        width=width,
        height=height,
        terrain=terrain,
        start_positions=(
            (starts["1"], ORIENT_NORTH),
            (starts["2"], ORIENT_NORTH),
        ),
        cook_time=cook_time,
        pot_cells=tuple(pot_cells),
        counter_cells=tuple(counter_cells),
        onion_dispensers=tuple(onion_cells),
        dish_dispensers=tuple(dish_cells),
        serving_cells=tuple(serving_cells),
        floor_cells=frozenset(floor),
    )


def serialize_layout(layout: Layout) -> str:
    """Inverse of parse_layout; emits the canonical grid text (LF, trailing newline)."""
    grid = [list(row) for row in layout.terrain]
    for marker, ((x, y), _orient) in zip("12", layout.start_positions):
        grid[y][x] = marker
    return "\n".join("".join(row) for row in grid) + "\n"


def canonical_layout_text(text: str) -> str:
    return serialize_layout(parse_layout(text))


def load_layout(name: str, cook_time: int = 20) -> Layout:
    """Load one of the bundled layouts by name."""
    if name not in BUNDLED_LAYOUT_NAMES:
        raise KeyError(f"unknown layout {name!r}; bundled: {', '.join(BUNDLED_LAYOUT_NAMES)}")
    text = (
        importlib.resources.files("hipt.env")
        .joinpath("layouts", f"{name}.layout")
        .read_text(encoding="utf-8")
    )
    return parse_layout(text, name=name, cook_time=cook_time)


def bundled_layouts(cook_time: int = 20) -> dict[str, Layout]:
    return {name: load_layout(name, cook_time) for name in BUNDLED_LAYOUT_NAMES}
