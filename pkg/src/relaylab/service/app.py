"""FastAPI service exposing the laboratory as JSON endpoints.

The service is stateless: graphs travel inside requests, results in
responses. Data-shaped failures (parse, parameters, config, undefined
metrics) map to 422 with kind="data"; solver non-convergence maps to
422 with kind="convergence" so thin clients can translate them into
exit codes without parsing messages.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, analysis, fileio, metrics, spectral, structure
from ..errors import (
    ConfigError,
    ConvergenceError,
    InsufficientDataError,
    ParameterError,
    ParseError,
    RelayLabError,
    UndefinedMetricError,
)
from ..generators import (
    CorePeripheryConfig,
    FitnessDistribution,
    bianconi_barabasi,
    core_periphery,
    erdos_renyi,
    small_world_fitness,
)
from ..graphcore import edge_density, is_acyclic
from ..propagation import SimConfig, persistence, reception_lag_stats, run
from ..structure import k_core
from . import models as m

_DATA_ERRORS = (
    ParseError,
    ParameterError,
    ConfigError,
    InsufficientDataError,
    UndefinedMetricError,
)


def _nan_none(x: float | None):
    if x is None:
        return None
    return None if isinstance(x, float) and math.isnan(x) else x


def create_app() -> FastAPI:
    app = FastAPI(title="relaylab", version=__version__)

    @app.exception_handler(RelayLabError)
    async def relaylab_error_handler(_request: Request, exc: RelayLabError):
        kind = "convergence" if isinstance(exc, ConvergenceError) else "data"
        return JSONResponse(status_code=422, content={"detail": str(exc), "kind": kind})

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/parse", response_model=m.GraphDocument)
    def parse(req: m.ParseRequest):
        if req.format == "matrix":
            parsed = fileio.parse_matrix(req.text)
        elif req.format == "edges":
            parsed = fileio.parse_edges(req.text, req.nodes_text)
        else:
            import json as _json

            try:
                doc = _json.loads(req.text)
            except _json.JSONDecodeError as exc:
                raise ParseError(f"bad JSON snapshot: {exc}") from None
            parsed = fileio.doc_to_graph(doc)
        return m.GraphDocument.from_graph(parsed.graph, parsed.names)

    @app.post("/render/dot", response_model=m.RenderDotResponse)
    def render_dot(req: m.RenderDotRequest):
        g, names = req.graph.to_graph()
        return m.RenderDotResponse(dot=fileio.export_dot(g, names))

    @app.post("/generate", response_model=m.GraphDocument)
    def generate(req: m.GenerateRequest):
        g = _generate_graph(req.model, req.params, req.seed)
        return m.GraphDocument.from_graph(g)

    @app.post("/metrics", response_model=m.MetricsResponse)
    def compute_metrics(req: m.MetricsRequest):
        g, names = req.graph.to_graph()
        return _metrics_response(g, names, req.weight)

    @app.post("/spectral", response_model=m.SpectralResponse)
    def compute_spectral(req: m.SpectralRequest):
        g, _names = req.graph.to_graph()
        summary = spectral.laplacian_connectivity(g)
        note = None
        eig = None
        try:
            eig = spectral.eigenvector_centrality(g)
        except RelayLabError as exc:
            note = str(exc)
        perron = None
        if g.miners() and g.edge_count:
            perron = spectral.perron_mass(g, g.miners())
        return m.SpectralResponse(
            spectral_radius=summary.spectral_radius,
            spectral_gap=summary.spectral_gap,
            algebraic_connectivity=summary.algebraic_connectivity,
            eigenvector=eig,
            eigenvector_note=note,
            pagerank=spectral.pagerank(g, damping=req.damping),
            miner_perron_mass=perron,
        )

    @app.post("/structure", response_model=m.StructureResponse)
    def compute_structure(req: m.StructureRequest):
        g, _names = req.graph.to_graph()
        coreness = k_core(g)
        audit = analysis.kcore_class_audit(
            coreness, [g.node_class(v) for v in g.nodes()]
        )
        mst = structure.minimum_spanning_tree(g)
        communities = structure.louvain_communities(g, seed=req.seed)
        motifs = None
        if req.include_motifs:
            census = structure.motif_census(g, req.null_samples, req.seed)
            motifs = m.MotifModel(
                triangles=census.triangles,
                four_stars=census.four_stars,
                z_triangle=_nan_none(census.z_triangle),
                z_four_star=_nan_none(census.z_four_star),
                null_samples=census.null_samples,
            )
        return m.StructureResponse(
            coreness=coreness.coreness,
            max_k=coreness.max_k,
            deep_core_full_nodes=audit.violations,
            articulation_points=sorted(structure.articulation_points(g)),
            mst_edges=[m.MstEdgeModel(a=a, b=b, weight=w) for a, b, w in mst.edges],
            mst_total_weight=mst.total_weight,
            mst_is_forest=mst.is_forest,
            mst_fullnode_bridging=structure.mst_fullnode_bridging(g),
            communities=communities.labels,
            modularity=communities.modularity,
            motifs=motifs,
        )

    @app.post("/simulate", response_model=m.SimulateResponse)
    def simulate(req: m.SimulateRequest):
        cfg = _sim_config(req.config)
        schedule = [(tx.time_ms, tx.origin) for tx in req.tx_schedule]
        series, traces, stats = run(cfg, schedule)
        lag_class = lag_tier = None
        if traces and series.graphs:
            summary = reception_lag_stats(traces, series.graphs[0])
            lag_class = {
                k: _lag_model(v) for k, v in summary.by_class.items()
            }
            lag_tier = {k: _lag_model(v) for k, v in summary.by_tier.items()}
        return m.SimulateResponse(
            snapshot_times=series.times,
            snapshots=[m.GraphDocument.from_graph(g) for g in series.graphs],
            traces=[
                m.TraceModel(
                    tx_id=t.tx_id,
                    origin=t.origin,
                    origin_time_ms=t.origin_time_ms,
                    first_reception=t.first_reception,
                    relay_parent=t.relay_parent,
                    hop_count=t.hop_count,
                    lost_deliveries=t.lost_deliveries,
                )
                for t in traces
            ],
            aggregate_persistence=(
                {k: _nan_none(v) for k, v in stats.aggregate_persistence.items()}
                if stats
                else None
            ),
            mean_degree=(
                {k: _nan_none(v) for k, v in stats.mean_degree.items()}
                if stats
                else None
            ),
            lag_by_class=lag_class,
            lag_by_tier=lag_tier,
        )

    @app.post("/exclusion", response_model=m.ExclusionResponse)
    def exclusion(req: m.ExclusionRequest):
        g, _names = req.graph.to_graph()
        result = analysis.path_exclusion(g, req.sources, req.targets)
        permutation = None
        if req.permutations > 0:
            test = analysis.permutation_significance(
                g, req.statistic, req.permutations, req.seed
            )
            permutation = m.PermutationModel(
                statistic=test.statistic,
                observed=test.observed,
                null_mean=test.null_mean,
                null_std=test.null_std,
                z=_nan_none(test.z),
                p_upper_bound=test.p_upper_bound,
                samples=test.samples,
                tail=test.tail,
            )
        return m.ExclusionResponse(
            total_paths=result.total_paths,
            paths_with_fullnode_interior=result.paths_with_fullnode_interior,
            exclusion_fraction=result.exclusion_fraction,
            unreachable_pairs=result.unreachable_pairs,
            interior_hits=result.interior_hits,
            permutation=permutation,
        )

    @app.post("/robustness", response_model=m.RobustnessResponse)
    def robustness(req: m.RobustnessRequest):
        g, _names = req.graph.to_graph()
        curve = analysis.robustness_curve(g, req.ranking, req.steps, req.adaptive)
        return m.RobustnessResponse(
            ranking=curve.ranking,
            adaptive=curve.adaptive,
            points=[
                m.RobustnessPointModel(
                    removed=p.removed,
                    largest_component=p.largest_component,
                    reachable_pair_fraction=p.reachable_pair_fraction,
                )
                for p in curve.points
            ],
            removed_nodes=curve.removed_nodes,
            truncated=curve.truncated,
        )

    @app.post("/fixtures", response_model=m.FixturesResponse)
    def fixtures():
        return m.FixturesResponse(files=dict(fileio.FIXTURE_FILES))

    return app


def _lag_model(group) -> m.LagGroupModel:
    return m.LagGroupModel(
        count=group.count,
        unreached=group.unreached,
        median_ms=_nan_none(group.median_ms),
        mean_ms=_nan_none(group.mean_ms),
        p90_ms=_nan_none(group.p90_ms),
    )


_GENERATOR_KEYS = {
    "bb": {"n", "m", "fitness"},
    "ws": {"n", "k", "p", "fitness"},
    "er": {"n", "p"},
    "coreper": {
        "miner_count",
        "full_count",
        "core_density",
        "periphery_links",
        "core_latency",
        "periphery_latency",
    },
}


def _fitness_from(params: dict, default=FitnessDistribution.constant(1.0)):
    spec = params.get("fitness")
    if spec is None:
        return default
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("fitness must be an object with a 'kind' field")
    unknown = set(spec) - {"kind", "a", "b"}
    if unknown:
        raise ConfigError(f"unknown fitness keys: {sorted(unknown)}")
    return FitnessDistribution(
        kind=spec["kind"], a=float(spec.get("a", 1.0)), b=float(spec.get("b", 0.0))
    )


def _generate_graph(model: str, params: dict, seed: int):
    allowed = _GENERATOR_KEYS[model]
    unknown = set(params) - allowed
    if unknown:
        raise ConfigError(f"unknown {model} parameters: {sorted(unknown)}")
    if model == "bb":
        return bianconi_barabasi(
            n=int(params["n"]),
            m=int(params["m"]),
            fitness=_fitness_from(params),
            seed=seed,
        )
    if model == "ws":
        return small_world_fitness(
            n=int(params["n"]),
            k=int(params["k"]),
            p=float(params["p"]),
            fitness=_fitness_from(params),
            seed=seed,
        )
    if model == "er":
        return erdos_renyi(n=int(params["n"]), p=float(params["p"]), seed=seed)
    cfg = CorePeripheryConfig(
        miner_count=int(params["miner_count"]),
        full_count=int(params["full_count"]),
        core_density=float(params.get("core_density", 1.0)),
        periphery_links=int(params.get("periphery_links", 1)),
        core_latency=float(params.get("core_latency", 10.0)),
        periphery_latency=float(params.get("periphery_latency", 200.0)),
    )
    return core_periphery(cfg, seed)


def _sim_config(model: m.SimConfigModel) -> SimConfig:
    kwargs = model.model_dump(exclude={"miner_fitness", "full_fitness"})
    cfg = SimConfig(**kwargs)
    if model.miner_fitness is not None:
        cfg = _replace_fitness(cfg, "miner_fitness", model.miner_fitness)
    if model.full_fitness is not None:
        cfg = _replace_fitness(cfg, "full_fitness", model.full_fitness)
    cfg.validate()
    return cfg


def _replace_fitness(cfg: SimConfig, field: str, spec: m.FitnessModel) -> SimConfig:
    from dataclasses import replace

    dist = FitnessDistribution(kind=spec.kind, a=spec.a, b=spec.b)
    return replace(cfg, **{field: dist})


def _metrics_response(g, names, weight) -> m.MetricsResponse:
    density = None
    if g.node_count >= 2:
        density = edge_density(g)
    out_hist = metrics.degree_histogram(g, "out")
    in_hist = metrics.degree_histogram(g, "in")
    clus = metrics.clustering(g)
    path_summary = None
    diameter = None
    try:
        summary = metrics.average_path_length(g, weight)
        path_summary = m.PathSummaryModel(
            mean=summary.mean,
            reachable_pairs=summary.reachable_pairs,
            total_pairs=summary.total_pairs,
            reachable_fraction=summary.reachable_fraction,
        )
        diameter = metrics.diameter_and_eccentricity(g, weight).diameter
    except UndefinedMetricError:
        pass
    assort = None
    assort_note = None
    try:
        assort = metrics.assortativity(g)
    except (UndefinedMetricError, ParameterError) as exc:
        assort_note = str(exc)
    fit = None
    fit_note = None
    try:
        totals = [g.in_degree(v) + g.out_degree(v) for v in g.nodes()]
        result = metrics.fit_power_law([max(1, t) for t in totals], xmin="auto")
        fit = m.PowerLawModel(
            gamma=result.gamma,
            xmin=result.xmin,
            ks_statistic=result.ks_statistic,
            n_tail=result.n_tail,
        )
    except RelayLabError as exc:
        fit_note = str(exc)

    bet = metrics.betweenness(g, weight)
    clo = metrics.closeness(g, weight)
    eig: list[float | None]
    try:
        eig = list(spectral.eigenvector_centrality(g))
    except RelayLabError:
        eig = [None] * g.node_count
    try:
        pr: list[float | None] = list(spectral.pagerank(g))
    except RelayLabError:
        pr = [None] * g.node_count
    coreness = k_core(g).coreness
    table = m.PerNodeTable(
        node=list(g.nodes()),
        name=names,
        node_class=[g.node_class(v).value for v in g.nodes()],
        in_deg=[g.in_degree(v) for v in g.nodes()],
        out_deg=[g.out_degree(v) for v in g.nodes()],
        betweenness=bet,
        closeness=clo,
        eigenvector=eig,
        pagerank=pr,
        coreness=coreness,
    )
    return m.MetricsResponse(
        node_count=g.node_count,
        edge_count=g.edge_count,
        density=density,
        acyclic=is_acyclic(g),
        out_degree_histogram=[
            m.DegreeEntry(degree=d, count=c) for d, c in out_hist.pairs
        ],
        in_degree_histogram=[
            m.DegreeEntry(degree=d, count=c) for d, c in in_hist.pairs
        ],
        global_clustering=clus.global_coefficient,
        path_length=path_summary,
        diameter=diameter,
        assortativity=assort,
        assortativity_note=assort_note,
        power_law=fit,
        power_law_note=fit_note,
        per_node=table,
    )
