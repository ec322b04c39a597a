from .paths import (
    BellmanFordResult,
    FloydWarshallResult,
    PathResult,
    all_pairs_floyd_warshall,
    shortest_path_bellman_ford,
    shortest_path_dijkstra,
)
from .centrality import CentralityReport, centrality
from .community import CommunityAssignment, community_detect, modularity_of, undirected_projection
from .stress import StressReport, StressRow, critical_rank

__all__ = [
    "BellmanFordResult", "FloydWarshallResult", "PathResult",
    "all_pairs_floyd_warshall", "shortest_path_bellman_ford",
    "shortest_path_dijkstra", "CentralityReport", "centrality",
    "CommunityAssignment", "community_detect", "modularity_of",
    "undirected_projection", "StressReport", "StressRow", "critical_rank",
]
