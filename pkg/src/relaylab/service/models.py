"""Pydantic request/response models for the relaylab service.

GraphDocument is the wire form of a DirectedGraph plus its name map;
every endpoint consumes and produces plain JSON so remote and
in-process clients behave identically.
"""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field

from ..fileio import ParsedGraph, default_names
from ..graphcore import DirectedGraph, NodeAttributes, NodeClass


class NodeModel(BaseModel):
    name: str
    node_class: Literal["miner", "full"] = Field(alias="class")
    fitness: float = 1.0
    uptime: float = 1.0
    bandwidth: float = 1.0

    model_config = {"populate_by_name": True}


class EdgeModel(BaseModel):
    src: int
    dst: int
    latency_ms: float


class GraphDocument(BaseModel):
    nodes: list[NodeModel]
    edges: list[EdgeModel]

    @staticmethod
    def from_graph(g: DirectedGraph, names: list[str] | None = None) -> "GraphDocument":
        names = names or default_names(g)
        return GraphDocument(
            nodes=[
                NodeModel(
                    name=names[v],
                    node_class=g.attributes(v).node_class.value,
                    fitness=g.attributes(v).fitness,
                    uptime=g.attributes(v).uptime,
                    bandwidth=g.attributes(v).bandwidth,
                )
                for v in g.nodes()
            ],
            edges=[
                EdgeModel(src=src, dst=dst, latency_ms=lat)
                for src, dst, lat in g.edges()
            ],
        )

    def to_graph(self) -> ParsedGraph:
        attrs = [
            NodeAttributes(
                node_class=NodeClass(node.node_class),
                fitness=node.fitness,
                uptime=node.uptime,
                bandwidth=node.bandwidth,
            )
            for node in self.nodes
        ]
        edges = [(e.src, e.dst, e.latency_ms) for e in self.edges]
        return ParsedGraph(
            graph=DirectedGraph(attrs, edges), names=[n.name for n in self.nodes]
        )


class ParseRequest(BaseModel):
    format: Literal["matrix", "edges", "snapshot"]
    text: str
    nodes_text: Optional[str] = None


class RenderDotRequest(BaseModel):
    graph: GraphDocument


class RenderDotResponse(BaseModel):
    dot: str


class GenerateRequest(BaseModel):
    model: Literal["bb", "ws", "er", "coreper"]
    params: dict[str, Any]
    seed: int


class MetricsRequest(BaseModel):
    graph: GraphDocument
    weight: Literal["hop", "latency"] = "latency"


class DegreeEntry(BaseModel):
    degree: int
    count: int


class PowerLawModel(BaseModel):
    gamma: float
    xmin: int
    ks_statistic: float
    n_tail: int


class PathSummaryModel(BaseModel):
    mean: float
    reachable_pairs: int
    total_pairs: int
    reachable_fraction: float


class MetricsResponse(BaseModel):
    node_count: int
    edge_count: int
    density: Optional[float]
    acyclic: bool
    out_degree_histogram: list[DegreeEntry]
    in_degree_histogram: list[DegreeEntry]
    global_clustering: float
    path_length: Optional[PathSummaryModel]
    diameter: Optional[float]
    assortativity: Optional[float]
    assortativity_note: Optional[str]
    power_law: Optional[PowerLawModel]
    power_law_note: Optional[str]
    per_node: PerNodeTable


class PerNodeTable(BaseModel):
    node: list[int]
    name: list[str]
    node_class: list[str]
    in_deg: list[int]
    out_deg: list[int]
    betweenness: list[float]
    closeness: list[float]
    eigenvector: list[Optional[float]]
    pagerank: list[Optional[float]]
    coreness: list[int]


class SpectralRequest(BaseModel):
    graph: GraphDocument
    damping: float = 0.85


class SpectralResponse(BaseModel):
    spectral_radius: float
    spectral_gap: float
    algebraic_connectivity: float
    eigenvector: Optional[list[float]]
    eigenvector_note: Optional[str]
    pagerank: list[float]
    miner_perron_mass: Optional[float]


class StructureRequest(BaseModel):
    graph: GraphDocument
    seed: int = 0
    null_samples: int = 50
    include_motifs: bool = True


class MstEdgeModel(BaseModel):
    a: int
    b: int
    weight: float


class StructureResponse(BaseModel):
    coreness: list[int]
    max_k: int
    deep_core_full_nodes: list[int]
    articulation_points: list[int]
    mst_edges: list[MstEdgeModel]
    mst_total_weight: float
    mst_is_forest: bool
    mst_fullnode_bridging: float
    communities: list[int]
    modularity: float
    motifs: Optional[MotifModel]


class MotifModel(BaseModel):
    triangles: int
    four_stars: int
    z_triangle: Optional[float]
    z_four_star: Optional[float]
    null_samples: int


class FitnessModel(BaseModel):
    kind: Literal["constant", "uniform", "pareto"]
    a: float = 1.0
    b: float = 0.0


class SimConfigModel(BaseModel):
    miner_count: int
    full_count: int
    seed_miner_bias: float = 0.9
    outbound_cap: int = 8
    churn_rate: float = 0.3
    miner_pin_probability: float = 0.95
    relay_processing_delay: float = 0.0
    step_length: float = 1000.0
    total_steps: int = 50
    snapshot_interval: int = 1
    rng: int = 0
    miner_fitness: Optional[FitnessModel] = None
    full_fitness: Optional[FitnessModel] = None
    miner_uptime: float = 1.0
    full_uptime: float = 0.9
    miner_miner_latency: float = 10.0
    miner_full_latency: float = 200.0
    full_full_latency: float = 300.0
    miner_relay_refusal: float = 0.0
    full_relay_refusal: float = 0.0

    model_config = {"extra": "forbid"}


class TxEvent(BaseModel):
    time_ms: float
    origin: int


class SimulateRequest(BaseModel):
    config: SimConfigModel
    tx_schedule: list[TxEvent] = Field(default_factory=list)


class TraceModel(BaseModel):
    tx_id: int
    origin: int
    origin_time_ms: float
    first_reception: dict[int, float]
    relay_parent: dict[int, int]
    hop_count: dict[int, int]
    lost_deliveries: int


class LagGroupModel(BaseModel):
    count: int
    unreached: int
    median_ms: Optional[float]
    mean_ms: Optional[float]
    p90_ms: Optional[float]


class SimulateResponse(BaseModel):
    snapshot_times: list[float]
    snapshots: list[GraphDocument]
    traces: list[TraceModel]
    aggregate_persistence: Optional[dict[str, Optional[float]]]
    mean_degree: Optional[dict[str, Optional[float]]]
    lag_by_class: Optional[dict[str, LagGroupModel]]
    lag_by_tier: Optional[dict[str, LagGroupModel]]


class ExclusionRequest(BaseModel):
    graph: GraphDocument
    sources: str | list[int] = "all"
    targets: str | list[int] = "miners"
    permutations: int = 0
    statistic: Literal[
        "fullnode_interior_pairs", "miner_perron_mass", "triangle_count"
    ] = "miner_perron_mass"
    seed: int = 0


class PermutationModel(BaseModel):
    statistic: str
    observed: float
    null_mean: float
    null_std: float
    z: Optional[float]
    p_upper_bound: float
    samples: int
    tail: str


class ExclusionResponse(BaseModel):
    total_paths: int
    paths_with_fullnode_interior: int
    exclusion_fraction: float
    unreachable_pairs: int
    interior_hits: list[int]
    permutation: Optional[PermutationModel]


class RobustnessRequest(BaseModel):
    graph: GraphDocument
    ranking: Literal["degree", "betweenness", "eigenvector"]
    steps: int
    adaptive: bool = True


class RobustnessPointModel(BaseModel):
    removed: int
    largest_component: int
    reachable_pair_fraction: float


class RobustnessResponse(BaseModel):
    ranking: str
    adaptive: bool
    points: list[RobustnessPointModel]
    removed_nodes: list[int]
    truncated: bool


class FixturesResponse(BaseModel):
    files: dict[str, str]


class ErrorBody(BaseModel):
    detail: str
    kind: Literal["data", "convergence"]


MetricsResponse.model_rebuild()
