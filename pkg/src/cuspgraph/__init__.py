"""Coned-off Cayley graphs and cusped spaces for free products of cyclic groups.

Everything is exact and finite: group elements are normal-form words,
graphs are truncated balls with certified-pair metadata, and every
quantitative claim is checked against a brute-force BFS oracle.
"""

from cuspgraph.groups import CosetId, GroupElement, GroupSpec, enumerate_ball
from cuspgraph.graphs import AngleValue, EdgeKind, Path, SpaceGraph

__all__ = [
    "AngleValue",
    "CosetId",
    "EdgeKind",
    "GroupElement",
    "GroupSpec",
    "Path",
    "SpaceGraph",
    "enumerate_ball",
]
