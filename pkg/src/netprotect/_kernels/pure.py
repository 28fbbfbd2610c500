"""Pure-Python kernels: reachability sweeps and Gibbs site updates.

These are the fallback implementations for the Cython module ``_fast``.
Both implementations must stay arithmetically identical: the same float
operations in the same order, so results agree bit for bit. Tests in
``tests/test_kernels.py`` enforce this on random inputs.

Graph layout shared by both kernels (CSR over out-edges):
    indptr[u]:indptr[u+1] slices nbr_node / nbr_edge, giving the head node
    index and the edge index of each out-edge of u. ``present`` holds one
    0/1 byte per edge. Stochastic edges are addressed through
    ``stoch_edge_pos``: bit j of a scenario mask controls edge
    stoch_edge_pos[j].
"""

from __future__ import annotations

KERNEL_NAME = "pure"


def reach_weight(n_nodes, indptr, nbr_node, nbr_edge, present, weights, sources):
    """Sum of node weights reachable from each source over present edges.

    Each source contributes its own reachable set (a node reached from two
    sources counts twice). The source itself always counts.
    """
    indptr = indptr.tolist()
    nbr_node = nbr_node.tolist()
    nbr_edge = nbr_edge.tolist()
    present = present.tolist()
    weights = weights.tolist()
    sources = sources.tolist()

    visited = [0] * n_nodes
    queue = [0] * n_nodes
    stamp = 0
    total = 0.0
    for s in sources:
        stamp += 1
        head = 0
        tail = 0
        visited[s] = stamp
        queue[tail] = s
        tail += 1
        while head < tail:
            u = queue[head]
            head += 1
            for k in range(indptr[u], indptr[u + 1]):
                if present[nbr_edge[k]]:
                    v = nbr_node[k]
                    if visited[v] != stamp:
                        visited[v] = stamp
                        queue[tail] = v
                        tail += 1
        for v in range(n_nodes):
            if visited[v] == stamp:
                total += weights[v]
    return total


def reach_weight_masks(
    n_nodes,
    indptr,
    nbr_node,
    nbr_edge,
    base_present,
    stoch_edge_pos,
    masks,
    prot_mask,
    weights,
    sources,
    out,
):
    """Evaluate reach_weight for many scenario masks sharing one graph.

    masks[i] assigns stochastic-edge states (bit j -> edge stoch_edge_pos[j]);
    prot_mask is OR-ed into every mask. Results land in out[i].
    """
    indptr_l = indptr.tolist()
    nbr_node_l = nbr_node.tolist()
    nbr_edge_l = nbr_edge.tolist()
    present = base_present.tolist()
    stoch_pos = stoch_edge_pos.tolist()
    weights_l = weights.tolist()
    sources_l = sources.tolist()
    n_stoch = len(stoch_pos)
    prot = int(prot_mask)

    visited = [0] * n_nodes
    queue = [0] * n_nodes
    stamp = 0
    for mi in range(len(masks)):
        m = int(masks[mi]) | prot
        for j in range(n_stoch):
            if (m >> j) & 1:
                present[stoch_pos[j]] = 1
        total = 0.0
        for s in sources_l:
            stamp += 1
            head = 0
            tail = 0
            visited[s] = stamp
            queue[tail] = s
            tail += 1
            while head < tail:
                u = queue[head]
                head += 1
                for k in range(indptr_l[u], indptr_l[u + 1]):
                    if present[nbr_edge_l[k]]:
                        v = nbr_node_l[k]
                        if visited[v] != stamp:
                            visited[v] = stamp
                            queue[tail] = v
                            tail += 1
            for v in range(n_nodes):
                if visited[v] == stamp:
                    total += weights_l[v]
        out[mi] = total
        for j in range(n_stoch):
            present[stoch_pos[j]] = 0


def gibbs_sweeps(
    state,
    var_fac_ptr,
    var_fac_idx,
    var_fac_pos,
    fac_scope_ptr,
    fac_scope_var,
    fac_tab_ptr,
    tables,
    uniforms,
):
    """Run full Gibbs sweeps in place; one uniform is consumed per site update.

    Variables are updated in index order within a sweep. The number of sweeps
    is len(uniforms) // n_vars. Returns 0 on success, or 1 + the index of the
    first variable whose conditional had zero density both ways.
    """
    n_vars = len(state)
    st = state.tolist()
    vf_ptr = var_fac_ptr.tolist()
    vf_idx = var_fac_idx.tolist()
    vf_pos = var_fac_pos.tolist()
    fs_ptr = fac_scope_ptr.tolist()
    fs_var = fac_scope_var.tolist()
    ft_ptr = fac_tab_ptr.tolist()
    tab = tables.tolist()
    uni = uniforms.tolist()

    n_sweeps = len(uni) // n_vars
    t = 0
    for _ in range(n_sweeps):
        for v in range(n_vars):
            p0 = 1.0
            p1 = 1.0
            for k in range(vf_ptr[v], vf_ptr[v + 1]):
                f = vf_idx[k]
                pos = vf_pos[k]
                idx = 0
                bit = 1
                for j in range(fs_ptr[f], fs_ptr[f + 1]):
                    w = fs_var[j]
                    if w != v and st[w]:
                        idx |= bit
                    bit <<= 1
                base = ft_ptr[f]
                p0 *= tab[base + idx]
                p1 *= tab[base + idx + (1 << pos)]
            denom = p0 + p1
            if denom == 0.0:
                return v + 1
            st[v] = 1 if uni[t] < p1 / denom else 0
            t += 1
    for v in range(n_vars):
        state[v] = st[v]
    return 0
