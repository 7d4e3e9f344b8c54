"""
Chain Complex Utilities.

Represents an oriented graph with plaquettes as a 2-dimensional chain complex
C0 <- C1 <- C2 (vertices, directed links, oriented plaquettes) and builds its
boundary operators.

Conventions:
- boundary(link) = head - tail, so boundary_1 has -1 at the tail row and +1 at
  the head row of each link column.
- A plaquette is stored as an explicit signed link sequence, e.g.
  p1 = +e4 +e5 -e2 -e1, and boundary_2 has that signed incidence as a column.
- Indices are 0-based in memory and 1-based (v1, v2, ...) in graph files.

Graph file format (UTF-8, '#' starts a comment):

    vertices 6
    link e1 v1 v2
    ...
    plaquette p1 +e4 +e5 -e2 -e1
"""
import logging
import re
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _csgraph_components

from basic_capabilities.graph_path_integral_toolbox.errors import (
    DanglingReferenceError,
    GraphFormatError,
    InvalidComplexError,
    OpenPlaquetteError,
)

logger = logging.getLogger(__name__)

SIGNED_LINK = re.compile(r"([+-]?)([^+\-\s]\S*)")


@dataclass(frozen=True)
class Link:
    tail: int
    head: int
    label: str


@dataclass(frozen=True)
class Plaquette:
    label: str
    # (link index, sign) pairs, sign in {+1, -1}
    boundary: Tuple[Tuple[int, int], ...]


@dataclass(frozen=True)
class ChainComplex:
    """
    Immutable 2-complex: vertex count, ordered links, ordered plaquettes.

    The link order fixes the column order of boundary_1 and the row order of
    boundary_2; the plaquette order fixes the column order of boundary_2.
    Set require_closed=False only to build a deliberately broken complex for
    boundary-of-boundary diagnostics.
    """
    vertex_count: int
    links: Tuple[Link, ...]
    plaquettes: Tuple[Plaquette, ...] = ()
    require_closed: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, 'links', tuple(self.links))
        object.__setattr__(self, 'plaquettes', tuple(
            Plaquette(p.label, tuple((int(i), int(s)) for i, s in p.boundary)) for p in self.plaquettes
        ))
        _validate_complex(self)

    @property
    def link_count(self) -> int:
        return len(self.links)

    @property
    def plaquette_count(self) -> int:
        return len(self.plaquettes)

    def link_index(self, label: str) -> int:
        for index, link in enumerate(self.links):
            if link.label == label:
                return index
        raise DanglingReferenceError(f"unknown link '{label}'")

    def vertex_labels(self) -> List[str]:
        return [f"v{i + 1}" for i in range(self.vertex_count)]

    def link_labels(self) -> List[str]:
        return [link.label for link in self.links]


def _plaquette_vertex_boundary(vertex_count: int, links: Sequence[Link], plaquette: Plaquette) -> np.ndarray:
    residual = np.zeros(vertex_count, dtype=np.int64)
    for link_index, sign in plaquette.boundary:
        link = links[link_index]
        residual[link.head] += sign
        residual[link.tail] -= sign
    return residual


def _validate_complex(cc: ChainComplex) -> None:
    if cc.vertex_count < 1:
        raise InvalidComplexError(f"vertex_count must be positive, got {cc.vertex_count}")

    seen_labels = set()
    for link in cc.links:
        if not (0 <= link.tail < cc.vertex_count and 0 <= link.head < cc.vertex_count):
            raise DanglingReferenceError(
                f"link '{link.label}' references a vertex outside v1..v{cc.vertex_count}"
            )
        if link.tail == link.head:
            raise InvalidComplexError(f"link '{link.label}' is a self-loop")
        if link.label in seen_labels:
            raise InvalidComplexError(f"duplicate link label '{link.label}'")
        seen_labels.add(link.label)

    for plaquette in cc.plaquettes:
        if not plaquette.boundary:
            raise InvalidComplexError(f"plaquette '{plaquette.label}' has no links")
        for link_index, sign in plaquette.boundary:
            if not 0 <= link_index < cc.link_count:
                raise DanglingReferenceError(
                    f"plaquette '{plaquette.label}' references missing link index {link_index + 1}"
                )
            if sign not in (1, -1):
                raise InvalidComplexError(f"plaquette '{plaquette.label}' has sign {sign}, expected +1 or -1")
        if cc.require_closed and np.any(_plaquette_vertex_boundary(cc.vertex_count, cc.links, plaquette)):
            raise OpenPlaquetteError(f"plaquette '{plaquette.label}' does not close")


def _parse_vertex_token(token: str, line_number: int) -> int:
    if not token.startswith('v') or not token[1:].isdigit():
        raise GraphFormatError(f"expected a vertex like 'v3', got '{token}'", line_number)
    return int(token[1:]) - 1


def parse_graph(text: str) -> ChainComplex:
    """
    Parses graph-file content into a validated ChainComplex.

    Args:
        text (str): Content in the line-oriented graph format.

    Returns:
        ChainComplex with orientations exactly as written.

    Raises:
        GraphFormatError: syntax problems (line number in the message).
        DanglingReferenceError: a link names a missing vertex or a plaquette a missing link.
        OpenPlaquetteError: a plaquette's signed chain does not close.
    """
    vertex_count = None
    links: List[Link] = []
    link_lookup: Dict[str, int] = {}
    plaquettes: List[Plaquette] = []
    plaquette_lines: List[int] = []
    link_lines: List[int] = []

    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split('#', 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        keyword = tokens[0]

        if keyword == 'vertices':
            if vertex_count is not None:
                raise GraphFormatError("'vertices' declared more than once", line_number)
            if len(tokens) != 2 or not tokens[1].isdigit() or int(tokens[1]) < 1:
                raise GraphFormatError("expected 'vertices N' with N a positive integer", line_number)
            vertex_count = int(tokens[1])

        elif keyword == 'link':
            if len(tokens) != 4:
                raise GraphFormatError("expected 'link <label> v<i> v<j>'", line_number)
            label = tokens[1]
            if label[0] in "+-":
                raise GraphFormatError(f"link label '{label}' must not start with a sign", line_number)
            if label in link_lookup:
                raise GraphFormatError(f"duplicate link label '{label}'", line_number)
            tail = _parse_vertex_token(tokens[2], line_number)
            head = _parse_vertex_token(tokens[3], line_number)
            if tail == head:
                raise GraphFormatError(f"link '{label}' is a self-loop", line_number)
            link_lookup[label] = len(links)
            links.append(Link(tail=tail, head=head, label=label))
            link_lines.append(line_number)

        elif keyword == 'plaquette':
            if len(tokens) < 3:
                raise GraphFormatError("expected 'plaquette <label> <+/-link> ...'", line_number)
            boundary = []
            for token in tokens[2:]:
                match = SIGNED_LINK.fullmatch(token)
                if match is None:
                    raise GraphFormatError(f"malformed signed link '{token}' (expected e.g. +e4 or -e2)", line_number)
                sign = -1 if match.group(1) == '-' else 1
                link_label = match.group(2)
                if link_label not in link_lookup:
                    raise DanglingReferenceError(
                        f"plaquette '{tokens[1]}' references unknown link '{link_label}'", line_number
                    )
                boundary.append((link_lookup[link_label], sign))
            plaquettes.append(Plaquette(label=tokens[1], boundary=tuple(boundary)))
            plaquette_lines.append(line_number)

        else:
            raise GraphFormatError(f"unknown directive '{keyword}'", line_number)

    if vertex_count is None:
        raise GraphFormatError("missing 'vertices N' line")

    for link, line_number in zip(links, link_lines):
        if link.tail >= vertex_count or link.head >= vertex_count or link.tail < 0 or link.head < 0:
            raise DanglingReferenceError(
                f"link '{link.label}' references a vertex outside v1..v{vertex_count}", line_number
            )
    for plaquette, line_number in zip(plaquettes, plaquette_lines):
        if np.any(_plaquette_vertex_boundary(vertex_count, links, plaquette)):
            raise OpenPlaquetteError(f"plaquette '{plaquette.label}' does not close", line_number)

    return ChainComplex(vertex_count=vertex_count, links=tuple(links), plaquettes=tuple(plaquettes))


def serialize_graph(cc: ChainComplex) -> str:
    """Writes a ChainComplex in the graph file format with 1-based vertex labels."""
    lines = [f"vertices {cc.vertex_count}"]
    for link in cc.links:
        lines.append(f"link {link.label} v{link.tail + 1} v{link.head + 1}")
    for plaquette in cc.plaquettes:
        terms = " ".join(
            f"{'+' if sign > 0 else '-'}{cc.links[index].label}" for index, sign in plaquette.boundary
        )
        lines.append(f"plaquette {plaquette.label} {terms}")
    return "\n".join(lines) + "\n"


def load_graph(path: str) -> ChainComplex:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except UnicodeDecodeError as e:
        raise GraphFormatError(f"{path}: not UTF-8 text (byte {e.start})") from e
    return parse_graph(text)


def boundary_1(cc: ChainComplex) -> np.ndarray:
    """
    Boundary operator C1 -> C0 (links to vertices).

    Returns:
        int64 array of shape (vertex_count, link_count); column j has -1 at
        tail(e_j) and +1 at head(e_j).
    """
    matrix = np.zeros((cc.vertex_count, cc.link_count), dtype=np.int64)
    for j, link in enumerate(cc.links):
        matrix[link.tail, j] = -1
        matrix[link.head, j] = 1
    return matrix


def boundary_2(cc: ChainComplex) -> np.ndarray:
    """
    Boundary operator C2 -> C1 (plaquettes to links).

    Returns:
        int64 array of shape (link_count, plaquette_count); column i is the
        signed link incidence of plaquette p_i.
    """
    matrix = np.zeros((cc.link_count, cc.plaquette_count), dtype=np.int64)
    for i, plaquette in enumerate(cc.plaquettes):
        for link_index, sign in plaquette.boundary:
            matrix[link_index, i] += sign
    return matrix


def verify_boundary_of_boundary(cc: ChainComplex) -> Tuple[bool, np.ndarray]:
    """
    Checks boundary_1 . boundary_2 == 0 exactly, in integer arithmetic.

    Returns:
        (passed, residual) where residual is the vertex_count x plaquette_count product.
    """
    residual = boundary_1(cc) @ boundary_2(cc)
    return (not residual.any()), residual


def connected_components(cc: ChainComplex) -> List[List[int]]:
    """Groups vertex indices into connected components of the (undirected) link graph."""
    if cc.link_count:
        rows = [link.tail for link in cc.links]
        cols = [link.head for link in cc.links]
        adjacency = coo_matrix((np.ones(cc.link_count), (rows, cols)), shape=(cc.vertex_count, cc.vertex_count))
    else:
        adjacency = coo_matrix((cc.vertex_count, cc.vertex_count))
    count, labels = _csgraph_components(adjacency, directed=False)
    return [np.flatnonzero(labels == c).tolist() for c in range(count)]


def euler_characteristic(cc: ChainComplex) -> int:
    return cc.vertex_count - cc.link_count + cc.plaquette_count


def same_complex_up_to_link_order(a: ChainComplex, b: ChainComplex) -> bool:
    """
    True when a and b share vertex labels, the same directed links and the
    same signed plaquette boundaries, ignoring link/plaquette ordering and labels.
    """
    if a.vertex_count != b.vertex_count:
        return False

    def link_key(cc):
        return sorted((link.tail, link.head) for link in cc.links)

    def plaquette_key(cc):
        return sorted(
            tuple(sorted((cc.links[i].tail, cc.links[i].head, s) for i, s in p.boundary))
            for p in cc.plaquettes
        )

    return link_key(a) == link_key(b) and plaquette_key(a) == plaquette_key(b)


def figure3_complex() -> ChainComplex:
    """
    The six-vertex, seven-link, two-plaquette (1+1)-dimensional example.

    Vertices v1-v2-v3 form one source's time chain and v4-v5-v6 the other's;
    e4, e2, e7 are the rungs between them.
    """
    link_table = [
        ('e1', 1, 2), ('e2', 2, 5), ('e3', 2, 3), ('e4', 1, 4),
        ('e5', 4, 5), ('e6', 5, 6), ('e7', 3, 6),
    ]
    links = tuple(Link(tail=t - 1, head=h - 1, label=label) for label, t, h in link_table)
    plaquettes = (
        Plaquette('p1', ((3, 1), (4, 1), (1, -1), (0, -1))),  # +e4 +e5 -e2 -e1
        Plaquette('p2', ((1, 1), (5, 1), (2, -1), (6, -1))),  # +e2 +e6 -e3 -e7
    )
    return ChainComplex(vertex_count=6, links=links, plaquettes=plaquettes)
