"""Main-station clustering (geography only) and instance reduction."""

from drrpvt.clustering.geo import EARTH_RADIUS_KM, haversine_km, pairwise_haversine, project_km
from drrpvt.clustering.main_stations import (
    ClusteredPlan,
    MainStationClustering,
    ReducedInstance,
    clustering_frame,
    compute_main_stations,
    default_cluster_count,
    reduce_instance,
    solve_clustered,
)

__all__ = [
    "EARTH_RADIUS_KM",
    "ClusteredPlan",
    "MainStationClustering",
    "ReducedInstance",
    "clustering_frame",
    "compute_main_stations",
    "default_cluster_count",
    "haversine_km",
    "pairwise_haversine",
    "project_km",
    "reduce_instance",
    "solve_clustered",
]
