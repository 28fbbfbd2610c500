# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Cython kernels. Semantics must match _kernels.pure exactly (same float
operation order) so the two implementations are bit-for-bit interchangeable."""

KERNEL_NAME = "cython"


def reach_weight(int n_nodes,
                 int[::1] indptr,
                 int[::1] nbr_node,
                 int[::1] nbr_edge,
                 unsigned char[::1] present,
                 double[::1] weights,
                 int[::1] sources):
    import numpy as np
    cdef int[::1] visited = np.zeros(n_nodes, dtype=np.int32)
    cdef int[::1] queue = np.empty(n_nodes, dtype=np.int32)
    return _reach(n_nodes, indptr, nbr_node, nbr_edge, present, weights,
                  sources, visited, queue, 0)


cdef double _reach(int n_nodes,
                   int[::1] indptr,
                   int[::1] nbr_node,
                   int[::1] nbr_edge,
                   unsigned char[::1] present,
                   double[::1] weights,
                   int[::1] sources,
                   int[::1] visited,
                   int[::1] queue,
                   int stamp) noexcept nogil:
    cdef double total = 0.0
    cdef int si, s, head, tail, u, k, v
    for si in range(sources.shape[0]):
        s = sources[si]
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


def reach_weight_masks(int n_nodes,
                       int[::1] indptr,
                       int[::1] nbr_node,
                       int[::1] nbr_edge,
                       unsigned char[::1] base_present,
                       int[::1] stoch_edge_pos,
                       unsigned long long[::1] masks,
                       unsigned long long prot_mask,
                       double[::1] weights,
                       int[::1] sources,
                       double[::1] out):
    import numpy as np
    cdef unsigned char[::1] present = np.array(base_present, dtype=np.uint8)
    cdef int[::1] visited = np.zeros(n_nodes, dtype=np.int32)
    cdef int[::1] queue = np.empty(n_nodes, dtype=np.int32)
    cdef int n_stoch = stoch_edge_pos.shape[0]
    cdef int n_src = sources.shape[0]
    cdef Py_ssize_t mi
    cdef int j, stamp = 0
    cdef unsigned long long m
    with nogil:
        for mi in range(masks.shape[0]):
            m = masks[mi] | prot_mask
            for j in range(n_stoch):
                if (m >> j) & 1:
                    present[stoch_edge_pos[j]] = 1
            out[mi] = _reach(n_nodes, indptr, nbr_node, nbr_edge, present,
                             weights, sources, visited, queue, stamp)
            stamp += n_src
            for j in range(n_stoch):
                present[stoch_edge_pos[j]] = 0


def gibbs_sweeps(unsigned char[::1] state,
                 int[::1] var_fac_ptr,
                 int[::1] var_fac_idx,
                 int[::1] var_fac_pos,
                 int[::1] fac_scope_ptr,
                 int[::1] fac_scope_var,
                 long long[::1] fac_tab_ptr,
                 double[::1] tables,
                 double[::1] uniforms):
    cdef int status
    with nogil:
        status = _gibbs_sweeps(state, var_fac_ptr, var_fac_idx, var_fac_pos,
                               fac_scope_ptr, fac_scope_var, fac_tab_ptr,
                               tables, uniforms)
    return status


cdef int _gibbs_sweeps(unsigned char[::1] state,
                       int[::1] var_fac_ptr,
                       int[::1] var_fac_idx,
                       int[::1] var_fac_pos,
                       int[::1] fac_scope_ptr,
                       int[::1] fac_scope_var,
                       long long[::1] fac_tab_ptr,
                       double[::1] tables,
                       double[::1] uniforms) noexcept nogil:
    cdef int n_vars = state.shape[0]
    cdef Py_ssize_t n_sweeps = uniforms.shape[0] // n_vars
    cdef Py_ssize_t sweep, t = 0
    cdef int v, k, f, pos, j, w
    cdef long long idx, bit, base
    cdef double p0, p1, denom
    for sweep in range(n_sweeps):
        for v in range(n_vars):
            p0 = 1.0
            p1 = 1.0
            for k in range(var_fac_ptr[v], var_fac_ptr[v + 1]):
                f = var_fac_idx[k]
                pos = var_fac_pos[k]
                idx = 0
                bit = 1
                for j in range(fac_scope_ptr[f], fac_scope_ptr[f + 1]):
                    w = fac_scope_var[j]
                    if w != v and state[w]:
                        idx |= bit
                    bit <<= 1
                base = fac_tab_ptr[f]
                p0 *= tables[base + idx]
                p1 *= tables[base + idx + (1 << pos)]
            denom = p0 + p1
            if denom == 0.0:
                return v + 1
            state[v] = 1 if uniforms[t] < p1 / denom else 0
            t += 1
    return 0
