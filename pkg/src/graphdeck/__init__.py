"""Out-of-core graph exploration toolkit.

Build disk-backed stores from edge lists, materialize induced subgraphs
without loading the full graph, compute per-node features, run an
incremental force-directed layout, and stream live positions to a
browser explorer.
"""

from .build import build_store
from .errors import DataError, GraphDeckError, StoreFormatError, UnknownFeatureError
from .features import (
    FeatureVector,
    compute_degree,
    compute_pagerank,
    list_features,
    load_feature,
    save_feature,
)
from .store import GraphStore, NodeRecord, open_store
from .subgraph import NodeSet, Subgraph, expand, induce, select_top_k

__version__ = "0.1.0"

# Layout symbols load lazily: the JIT-compiled quadtree behind them is
# heavyweight and pure query/build workflows never need it.
_LAYOUT_EXPORTS = {
    "LayoutState",
    "StepStats",
    "init_layout",
    "step",
    "pin",
    "unpin",
    "set_position",
}


def __getattr__(name):
    if name in _LAYOUT_EXPORTS:
        from . import layout

        return getattr(layout, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


__all__ = [
    "build_store",
    "open_store",
    "GraphStore",
    "NodeRecord",
    "NodeSet",
    "Subgraph",
    "induce",
    "expand",
    "select_top_k",
    "FeatureVector",
    "compute_degree",
    "compute_pagerank",
    "save_feature",
    "load_feature",
    "list_features",
    "LayoutState",
    "StepStats",
    "init_layout",
    "step",
    "pin",
    "unpin",
    "set_position",
    "GraphDeckError",
    "StoreFormatError",
    "DataError",
    "UnknownFeatureError",
    "__version__",
]
