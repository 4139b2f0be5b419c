import numpy as np

import discordmax as dm


def random_weighted_graph(n, p, rng, wmax=2.0):
    """Erdos-Renyi graph with weights in (0, wmax]; falls back to a path
    when the draw comes out edgeless."""
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    if not keep.any():
        edges = np.column_stack([np.arange(n - 1), np.arange(1, n)])
        weights = wmax - wmax * rng.random(n - 1)
    else:
        edges = np.column_stack([iu[keep], ju[keep]])
        weights = wmax - wmax * rng.random(int(keep.sum()))
    return dm.Graph(n=n, edges=edges, weights=weights)


def complete_graph(n, weight=1.0):
    iu, ju = np.triu_indices(n, k=1)
    edges = np.column_stack([iu, ju])
    return dm.Graph(n=n, edges=edges, weights=np.full(edges.shape[0], weight))


def path_graph(n):
    edges = np.column_stack([np.arange(n - 1), np.arange(1, n)])
    return dm.Graph(n=n, edges=edges, weights=np.ones(n - 1))


def two_node_graph():
    return dm.Graph(n=2, edges=np.array([[0, 1]]), weights=np.array([1.0]))
