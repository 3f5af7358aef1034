"""Trust-graph construction and structural metrics.

All metrics are pure functions of the graph. The undirected non-self edge
set is deduplicated; self-loops live in their own set and enter only the
"api" degree mode (where each one adds 2, matching the registry's
trust_links convention).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..errors import BadBoundariesError, DegenerateGraphError
from ..overlay import VirtualAddress
from ..snapshot import StatsSnapshot


@dataclass
class TrustGraph:
    """Undirected trust graph with self-loops held separately."""

    vertices: set[VirtualAddress] = field(default_factory=set)
    nonself_adjacency: dict[VirtualAddress, set[VirtualAddress]] = field(
        default_factory=dict
    )
    self_loops: set[VirtualAddress] = field(default_factory=set)

    def add_vertex(self, vertex: VirtualAddress) -> None:
        self.vertices.add(vertex)
        self.nonself_adjacency.setdefault(vertex, set())

    def add_edge(self, a: VirtualAddress, b: VirtualAddress) -> None:
        self.add_vertex(a)
        self.add_vertex(b)
        if a == b:
            self.self_loops.add(a)
        else:
            self.nonself_adjacency[a].add(b)
            self.nonself_adjacency[b].add(a)

    def neighbors(self, vertex: VirtualAddress) -> set[VirtualAddress]:
        return self.nonself_adjacency.get(vertex, set())

    def degree_nonself(self, vertex: VirtualAddress) -> int:
        return len(self.neighbors(vertex))

    def degree_api(self, vertex: VirtualAddress) -> int:
        bonus = 2 if vertex in self.self_loops else 0
        return self.degree_nonself(vertex) + bonus

    @property
    def node_count(self) -> int:
        return len(self.vertices)

    @property
    def edge_count_nonself(self) -> int:
        return sum(len(adj) for adj in self.nonself_adjacency.values()) // 2

    @property
    def self_loop_count(self) -> int:
        return len(self.self_loops)

    def sorted_vertices(self) -> list[VirtualAddress]:
        return sorted(self.vertices)


def build_graph(snapshot: StatsSnapshot) -> TrustGraph:
    """Vertices come from the node list; edges are deduplicated."""
    graph = TrustGraph()
    for node in snapshot.nodes:
        graph.add_vertex(VirtualAddress.from_text(node.address))
    for a_text, b_text in snapshot.trust_edges:
        graph.add_edge(
            VirtualAddress.from_text(a_text), VirtualAddress.from_text(b_text)
        )
    return graph


# --- degrees ---


def degree_histogram(graph: TrustGraph, mode: str = "nonself") -> dict[int, int]:
    """Histogram k -> node count; mode 'api' adds 2 per self-loop."""
    if mode not in ("api", "nonself"):
        raise ValueError(f"unknown degree mode {mode!r}")
    histogram: dict[int, int] = {}
    for vertex in graph.vertices:
        k = graph.degree_api(vertex) if mode == "api" else graph.degree_nonself(vertex)
        histogram[k] = histogram.get(k, 0) + 1
    return dict(sorted(histogram.items()))


@dataclass(frozen=True)
class DegreeSummary:
    """Summary statistics of a degree histogram."""

    histogram: dict[int, int]
    total: int
    mean: float
    median: int
    mode: int
    max: int
    isolated: int


def summarize_histogram(histogram: dict[int, int]) -> DegreeSummary:
    """Mean, lower median, smallest mode, max, and isolated count."""
    cleaned = {int(k): int(n) for k, n in histogram.items() if n > 0}
    total = sum(cleaned.values())
    if total == 0:
        return DegreeSummary({}, 0, 0.0, 0, 0, 0, 0)
    mean = sum(k * n for k, n in cleaned.items()) / total
    # lower median: smallest k whose cumulative count reaches ceil(total/2)
    half = (total + 1) // 2
    running = 0
    median = 0
    for k in sorted(cleaned):
        running += cleaned[k]
        if running >= half:
            median = k
            break
    peak = max(cleaned.values())
    mode = min(k for k, n in cleaned.items() if n == peak)
    return DegreeSummary(
        histogram=dict(sorted(cleaned.items())),
        total=total,
        mean=mean,
        median=median,
        mode=mode,
        max=max(cleaned),
        isolated=cleaned.get(0, 0),
    )


def degree_stats(graph: TrustGraph, mode: str = "nonself") -> DegreeSummary:
    return summarize_histogram(degree_histogram(graph, mode))


# --- components ---


@dataclass(frozen=True)
class ComponentCensus:
    """Component sizes (descending) plus a small-size census."""

    sizes: tuple[int, ...]
    singletons: int
    pairs: int
    triples: int
    giant_size: int
    giant_fraction: float

    @property
    def count(self) -> int:
        return len(self.sizes)


def components(graph: TrustGraph) -> ComponentCensus:
    """Connected components over non-self edges (union-find)."""
    vertices = graph.sorted_vertices()
    index = {vertex: i for i, vertex in enumerate(vertices)}
    parent = list(range(len(vertices)))

    def find(i: int) -> int:
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri

    for vertex in vertices:
        for neighbor in graph.neighbors(vertex):
            union(index[vertex], index[neighbor])

    tally: dict[int, int] = {}
    for i in range(len(vertices)):
        root = find(i)
        tally[root] = tally.get(root, 0) + 1
    sizes = tuple(sorted(tally.values(), reverse=True))
    giant = sizes[0] if sizes else 0
    return ComponentCensus(
        sizes=sizes,
        singletons=sum(1 for s in sizes if s == 1),
        pairs=sum(1 for s in sizes if s == 2),
        triples=sum(1 for s in sizes if s == 3),
        giant_size=giant,
        giant_fraction=giant / len(vertices) if vertices else 0.0,
    )


# --- clustering and transitivity ---


@dataclass(frozen=True)
class ClusteringStats:
    """Local clustering averages plus global triangle/triple counts.

    transitivity_standard is 3T / P2 (P2 = connected triples, open or
    closed); transitivity_open_ratio is T / open_triples — the ratio of
    closed to open triples, the convention behind the headline global
    figure this package reproduces.
    """

    avg_all: float
    avg_positive: float
    count_one: int
    triangles: int
    connected_triples: int
    open_triples: int
    transitivity_standard: float
    transitivity_open_ratio: float


def clustering(graph: TrustGraph) -> ClusteringStats:
    triangles_at: dict[VirtualAddress, int] = {}
    local: dict[VirtualAddress, float] = {}
    connected_triples = 0
    for vertex in graph.vertices:
        neighbors = graph.neighbors(vertex)
        k = len(neighbors)
        pairs = k * (k - 1) // 2
        connected_triples += pairs
        if pairs == 0:
            triangles_at[vertex] = 0
            local[vertex] = 0.0
            continue
        closed = 0
        neighbor_list = list(neighbors)
        for i, a in enumerate(neighbor_list):
            adj_a = graph.neighbors(a)
            for b in neighbor_list[i + 1 :]:
                if b in adj_a:
                    closed += 1
        triangles_at[vertex] = closed
        local[vertex] = closed / pairs
    triangle_total = sum(triangles_at.values()) // 3
    open_triples = connected_triples - 3 * triangle_total
    n = len(graph.vertices)
    avg_all = sum(local.values()) / n if n else 0.0
    eligible = [c for v, c in local.items() if graph.degree_nonself(v) >= 2]
    avg_positive = sum(eligible) / len(eligible) if eligible else 0.0
    if connected_triples > 0:
        transitivity_standard = 3 * triangle_total / connected_triples
    else:
        transitivity_standard = 0.0
    if open_triples > 0:
        transitivity_open_ratio = triangle_total / open_triples
    elif triangle_total > 0:
        transitivity_open_ratio = float("inf")
    else:
        transitivity_open_ratio = 0.0
    return ClusteringStats(
        avg_all=avg_all,
        avg_positive=avg_positive,
        count_one=sum(1 for c in eligible if c == 1.0),
        triangles=triangle_total,
        connected_triples=connected_triples,
        open_triples=open_triples,
        transitivity_standard=transitivity_standard,
        transitivity_open_ratio=transitivity_open_ratio,
    )


def transitivity_from_counts(triangles: int, open_triples: int) -> float:
    """Closed-to-open triple ratio from raw counts."""
    if open_triples > 0:
        return triangles / open_triples
    return float("inf") if triangles > 0 else 0.0


# --- density and baselines ---


def density(graph: TrustGraph) -> float:
    """2E / (V (V-1)) over non-self edges."""
    n = graph.node_count
    if n < 2:
        raise DegenerateGraphError(f"density needs at least 2 nodes, got {n}")
    return 2.0 * graph.edge_count_nonself / (n * (n - 1))


def density_from_counts(node_count: int, edge_count_nonself: int) -> float:
    if node_count < 2:
        raise DegenerateGraphError(
            f"density needs at least 2 nodes, got {node_count}"
        )
    return 2.0 * edge_count_nonself / (node_count * (node_count - 1))


def random_clustering_baseline(graph: TrustGraph) -> float:
    """Expected clustering of a degree-matched random graph: k̄ / |V|."""
    n = graph.node_count
    if n == 0:
        return 0.0
    mean_degree = 2.0 * graph.edge_count_nonself / n
    return mean_degree / n


# --- address locality ---


@dataclass(frozen=True)
class AddressDeltaStats:
    """Distribution of |node_id(a) - node_id(b)| over non-self edges."""

    histogram: dict[int, int]
    total_edges: int
    excluded_mixed_network: int
    mean_delta: float
    within: int
    within_fraction: float


def address_delta_histogram(graph: TrustGraph, within: int = 10) -> AddressDeltaStats:
    histogram: dict[int, int] = {}
    excluded = 0
    seen: set[tuple[VirtualAddress, VirtualAddress]] = set()
    for vertex in graph.vertices:
        for neighbor in graph.neighbors(vertex):
            pair = (min(vertex, neighbor), max(vertex, neighbor))
            if pair in seen:
                continue
            seen.add(pair)
            if vertex.network_id != neighbor.network_id:
                excluded += 1
                continue
            delta = abs(vertex.node_id - neighbor.node_id)
            histogram[delta] = histogram.get(delta, 0) + 1
    total = sum(histogram.values())
    mean_delta = (
        sum(d * n for d, n in histogram.items()) / total if total else 0.0
    )
    close = sum(n for d, n in histogram.items() if d <= within)
    return AddressDeltaStats(
        histogram=dict(sorted(histogram.items())),
        total_edges=total,
        excluded_mixed_network=excluded,
        mean_delta=mean_delta,
        within=within,
        within_fraction=close / total if total else 0.0,
    )


# --- social-layer bins ---


def dunbar_bins(
    histogram: dict[int, int], boundaries: Sequence[int]
) -> list[int]:
    """Half-open [b_i, b_{i+1}) bin counts over a degree histogram."""
    bounds = list(boundaries)
    if len(bounds) < 2:
        raise BadBoundariesError("need at least two boundaries")
    if any(b >= c for b, c in zip(bounds, bounds[1:])):
        raise BadBoundariesError(f"boundaries must be strictly increasing: {bounds}")
    counts = [0] * (len(bounds) - 1)
    for k, n in histogram.items():
        for i in range(len(bounds) - 1):
            if bounds[i] <= k < bounds[i + 1]:
                counts[i] += n
                break
    return counts


# --- hubs ---


@dataclass(frozen=True)
class HubRow:
    address: str
    degree_api: int
    tags: tuple[str, ...]


@dataclass(frozen=True)
class HubTable:
    """Top nodes by API degree with the hub-concentration numbers.

    top5_degree_sum is the raw sum of the first five API degrees;
    top5_incident_edges deduplicates non-self edges incident to those five
    (a hub-hub edge counts once), and top5_share divides that by the
    non-self edge total.
    """

    rows: tuple[HubRow, ...]
    top5_degree_sum: int
    top5_incident_edges: int
    top5_share: float


def hub_table(
    graph: TrustGraph, snapshot: Optional[StatsSnapshot] = None, top_n: int = 10
) -> HubTable:
    tags_by_address: dict[str, tuple[str, ...]] = {}
    if snapshot is not None:
        tags_by_address = {node.address: tuple(node.tags) for node in snapshot.nodes}
    ranked = sorted(
        graph.vertices, key=lambda v: (-graph.degree_api(v), v)
    )
    rows = tuple(
        HubRow(
            address=vertex.to_text(),
            degree_api=graph.degree_api(vertex),
            tags=tags_by_address.get(vertex.to_text(), ()),
        )
        for vertex in ranked[:top_n]
    )
    top5 = ranked[:5]
    degree_sum = sum(graph.degree_api(v) for v in top5)
    incident: set[tuple[VirtualAddress, VirtualAddress]] = set()
    for vertex in top5:
        for neighbor in graph.neighbors(vertex):
            incident.add((min(vertex, neighbor), max(vertex, neighbor)))
    edges = graph.edge_count_nonself
    return HubTable(
        rows=rows,
        top5_degree_sum=degree_sum,
        top5_incident_edges=len(incident),
        top5_share=len(incident) / edges if edges else 0.0,
    )
