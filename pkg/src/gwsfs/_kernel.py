"""Compiled event loop for the branching-population simulator.

Everything here operates on primitive numpy arrays so numba can compile it;
the public wrapper types live in ``gwsfs.sim``. The mutation genealogy is an
arena of nodes: node 0 is the founder genotype (not a mutation), every other
node is one mutation. ``parent[i]`` links a mutation to the genotype it arose
on, ``live[i]`` counts the individuals whose full genotype is exactly node i,
and a Fenwick tree over ``live`` lets us draw a uniform live individual and
apply count updates in O(log n).

Randomness contract (shared with the pure-Python reference engine in
``gwsfs.sim``): all draws come from ``Generator.random()`` in a fixed order.
Per event: waiting time, event-type split, individual choice, then the
offspring count for demographic events. The post-stop extension draws waiting
time and offspring count only. Keeping the order fixed makes the compiled and
reference engines bit-identical for equal seeds.
"""

from __future__ import annotations

import numpy as np
from numba import njit

STOP_FIXED_TIME = 0
STOP_FIXED_SIZE = 1

STATUS_REACHED_TIME = 0
STATUS_REACHED_SIZE = 1
STATUS_EXTINCT = 2

_INITIAL_CAPACITY = 1024


@njit(cache=True, nogil=True)
def fenwick_add(tree, i, delta):
    """Add delta to element i (0-based). tree[1:] is the Fenwick array."""
    k = i + 1
    n = tree.shape[0] - 1
    while k <= n:
        tree[k] += delta
        k += k & (-k)


@njit(cache=True, nogil=True)
def fenwick_find(tree, target):
    """Largest 0-based index whose prefix sum is <= target.

    With nonnegative weights and 0 <= target < total weight this returns the
    index of the class containing the target-th individual, counting
    individuals in node-index order.
    """
    n = tree.shape[0] - 1  # capacity, always a power of two
    idx = 0
    bit = n
    while bit > 0:
        nxt = idx + bit
        if nxt <= n and tree[nxt] <= target:
            target -= tree[nxt]
            idx = nxt
        bit >>= 1
    return idx


@njit(cache=True, nogil=True)
def fenwick_build(live, n, tree):
    """Linear-time rebuild of the Fenwick array over live[:n]."""
    tree[:] = 0
    cap = tree.shape[0] - 1
    for i in range(1, n + 1):
        tree[i] += live[i - 1]
        j = i + (i & (-i))
        if j <= cap:
            tree[j] += tree[i]


@njit(cache=True, nogil=True)
def fenwick_total(tree):
    n = tree.shape[0] - 1
    total = 0
    k = n
    while k > 0:
        total += tree[k]
        k -= k & (-k)
    return total


@njit(cache=True, nogil=True)
def _record_size_change(csize, parent, tracked, enters, exits, free_stack, free_top, g, d):
    """Propagate a live-count change of d at genotype g up the ancestor chain.

    Clone size of a mutation = total live individuals in its subtree, so a
    demographic event at g shifts every ancestor's clone size by d. Tracked
    multiplicities update their enter/exit counters; a clone whose size hits
    zero can never revive (no live carriers remain), so its slot is pushed on
    the free list for reuse. The founder node is not a mutation: its cached
    size is maintained but it is never counted or freed.
    """
    v = g
    while v >= 0:
        old = csize[v]
        new = old + d
        csize[v] = new
        if v != 0:
            for ji in range(tracked.shape[0]):
                tj = tracked[ji]
                if old == tj:
                    exits[ji] += 1
                elif new == tj:
                    enters[ji] += 1
            if new == 0:
                free_stack[free_top] = v
                free_top += 1
        v = parent[v]
    return free_top


@njit(cache=True, nogil=True)
def simulate_kernel(rng, cdf, a, nu, lam, stop_kind, stop_time, stop_size, y_extension, tracked):
    """Run one replicate to its stop condition plus optional extension.

    cdf is the cumulative offspring distribution. tracked is the (possibly
    empty) array of clone sizes whose enter/exit counters are maintained;
    instrumented bookkeeping (size caches, slot reuse) is on exactly when it
    is nonempty.

    Returns (status, stop_t, stop_z, end_t, end_z, n_nodes, n_events,
    parent, live, depth, enters, exits). The node arrays describe the
    genealogy frozen at the stop state; the extension past the stop advances
    only the population size, which is independent of mutation bookkeeping.
    """
    instrumented = tracked.shape[0] > 0
    cap = _INITIAL_CAPACITY
    parent = np.empty(cap, np.int64)
    live = np.zeros(cap, np.int64)
    depth = np.zeros(cap, np.int64)
    aux = cap if instrumented else 1
    csize = np.zeros(aux, np.int64)
    free_stack = np.empty(aux, np.int64)
    free_top = 0
    tree = np.zeros(cap + 1, np.int64)
    enters = np.zeros(tracked.shape[0], np.int64)
    exits = np.zeros(tracked.shape[0], np.int64)

    parent[0] = -1
    live[0] = 1
    depth[0] = 0
    if instrumented:
        csize[0] = 1
    fenwick_add(tree, 0, 1)
    n_nodes = 1
    z = 1
    t = 0.0
    p_demo = a / (a + nu)
    n_events = 0
    status = -1

    if stop_kind == STOP_FIXED_SIZE and z >= stop_size:
        status = STATUS_REACHED_SIZE

    while status < 0:
        if z == 0:
            status = STATUS_EXTINCT
            break
        total_rate = z * (a + nu)
        dt = -np.log1p(-rng.random()) / total_rate
        if stop_kind == STOP_FIXED_TIME and t + dt > stop_time:
            t = stop_time
            status = STATUS_REACHED_TIME
            break
        t = t + dt
        n_events += 1
        is_demo = rng.random() < p_demo
        target = int(rng.random() * z)
        g = fenwick_find(tree, target)
        if is_demo:
            u = rng.random()
            k = 0
            while cdf[k] <= u:
                k += 1
            if k != 1:
                d = k - 1
                live[g] += d
                fenwick_add(tree, g, d)
                z += d
                if instrumented:
                    free_top = _record_size_change(
                        csize, parent, tracked, enters, exits, free_stack, free_top, g, d
                    )
            if stop_kind == STOP_FIXED_SIZE and z >= stop_size:
                status = STATUS_REACHED_SIZE
                break
        else:
            # novel mutation: one individual of class g founds a child class
            if free_top > 0:
                free_top -= 1
                c = free_stack[free_top]
            else:
                if n_nodes == cap:
                    new_cap = cap * 2
                    new_parent = np.empty(new_cap, np.int64)
                    new_parent[:cap] = parent
                    parent = new_parent
                    new_live = np.zeros(new_cap, np.int64)
                    new_live[:cap] = live
                    live = new_live
                    new_depth = np.zeros(new_cap, np.int64)
                    new_depth[:cap] = depth
                    depth = new_depth
                    if instrumented:
                        new_csize = np.zeros(new_cap, np.int64)
                        new_csize[:cap] = csize
                        csize = new_csize
                        new_free = np.empty(new_cap, np.int64)
                        new_free[:cap] = free_stack
                        free_stack = new_free
                    tree = np.zeros(new_cap + 1, np.int64)
                    fenwick_build(live, n_nodes, tree)
                    cap = new_cap
                c = n_nodes
                n_nodes += 1
            parent[c] = g
            live[c] = 1
            depth[c] = depth[g] + 1
            live[g] -= 1
            fenwick_add(tree, c, 1)
            fenwick_add(tree, g, -1)
            if instrumented:
                csize[c] = 1
                for ji in range(tracked.shape[0]):
                    if tracked[ji] == 1:
                        enters[ji] += 1

    stop_t = t
    stop_z = z
    end_t = stop_t
    end_z = z
    if status != STATUS_EXTINCT and y_extension > 0.0 and z > 0:
        # Mutations past the stop are unobservable (the genealogy is frozen
        # at the stop state) and neutral, so only demographic events move z.
        end_t = stop_t + y_extension
        tt = stop_t
        zz = z
        while zz > 0:
            dt = -np.log1p(-rng.random()) / (a * zz)
            if tt + dt > end_t:
                break
            tt += dt
            u = rng.random()
            k = 0
            while cdf[k] <= u:
                k += 1
            zz += k - 1
        end_z = zz

    return (
        status,
        stop_t,
        stop_z,
        end_t,
        end_z,
        n_nodes,
        n_events,
        parent[:n_nodes].copy(),
        live[:n_nodes].copy(),
        depth[:n_nodes].copy(),
        enters,
        exits,
    )


@njit(cache=True, nogil=True)
def clone_sizes(parent, live, depth, n_nodes, append_ordered):
    """Subtree live totals for every node: the clone size of each mutation.

    When slots are never reused (append_ordered) children always have larger
    indices than parents and one descending pass suffices. With reuse the
    pass runs in decreasing depth order; dead slots carry zero counts, so
    stale parent links contribute nothing.
    """
    size = live[:n_nodes].copy()
    if append_ordered:
        for i in range(n_nodes - 1, 0, -1):
            par = parent[i]
            if par >= 0:
                size[par] += size[i]
    else:
        order = np.argsort(depth[:n_nodes])
        for ii in range(n_nodes - 1, -1, -1):
            i = order[ii]
            par = parent[i]
            if par >= 0 and i != 0:
                size[par] += size[i]
    return size
