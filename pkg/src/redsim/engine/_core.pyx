# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled RED-Sim / baseline loops for the built-in models.

Each kernel mirrors :mod:`redsim.engine.python` operation for operation:
same random draws in the same order, same floating-point expressions, same
``(fire_time, seq)`` event ordering. Output is therefore bit-identical to the
pure-Python engines.
"""

from libc.math cimport exp, log, log1p, pow, fmax, INFINITY
from cpython.pycapsule cimport PyCapsule_GetPointer
from numpy.random cimport bitgen_t

import numpy as np

from redsim.errors import BoundViolationError

cdef enum:
    KIND_SIS = 0
    KIND_FADING = 1
    KIND_VOTER = 2
    KIND_VOTER_NUMERIC = 3
    GL_ORDER = 16
    ENGINE_REDSIM = 0
    ENGINE_BASELINE = 1

cdef double REL_SLACK = 1e-12

cdef double GL_X[GL_ORDER]
cdef double GL_W[GL_ORDER]
_nodes, _weights = np.polynomial.legendre.leggauss(GL_ORDER)
for _i in range(GL_ORDER):
    GL_X[_i] = _nodes[_i]
    GL_W[_i] = _weights[_i]


cdef double _gl_panel(double cm1, double lo, double hi) noexcept nogil:
    cdef double mid = 0.5 * (hi + lo), half = 0.5 * (hi - lo), total = 0.0
    cdef int i
    for i in range(GL_ORDER):
        total += GL_W[i] * pow(mid + half * GL_X[i], cm1)
    return half * total


cdef double _from_zero(double cm1, double b) noexcept nogil:
    # t = b y**4 smooths the t**cm1 kink at the origin
    cdef double total = 0.0, y
    cdef int i
    if b <= 0.0:
        return 0.0
    for i in range(GL_ORDER):
        y = 0.5 * (1.0 + GL_X[i])
        total += GL_W[i] * pow(y, 4.0 * cm1 + 3.0)
    return 2.0 * total * pow(b, cm1 + 1.0)


cdef double _power_integral(double a, double cm1, double lo, double hi) noexcept nogil:
    """Integral of ``a * t**cm1`` over ``[lo, hi]`` by Gauss-Legendre."""
    if lo <= hi - lo:
        return a * (_from_zero(cm1, hi) - _from_zero(cm1, lo))
    return a * _gl_panel(cm1, lo, hi)


cdef double _invert_power(double a, double cm1, double r, double x) noexcept nogil:
    """Residence ``R >= r`` with ``integral(a t**cm1, r, R) = x``, by quadrature.

    Panels of doubling width bracket the root, then a safeguarded Newton
    iteration solves inside the last panel.
    """
    cdef double lo = r, h = 1.0, acc = 0.0, inc = 0.0, target, sa, sb, s, g, step
    cdef int i
    for i in range(200):
        inc = _power_integral(a, cm1, lo, lo + h)
        if acc + inc >= x:
            break
        acc += inc
        lo += h
        h *= 2.0
    else:
        return INFINITY
    target = x - acc
    sa, sb = 0.0, h
    s = h * target / inc
    for i in range(100):
        g = _power_integral(a, cm1, lo, lo + s) - target
        if g == 0.0 or (g < 0.0 and -g <= 1e-13 * x) or (g > 0.0 and g <= 1e-13 * x):
            break
        if g < 0.0:
            sa = s
        else:
            sb = s
        step = s - g / (a * pow(lo + s, cm1))
        if not (sa < step < sb):
            step = 0.5 * (sa + sb)
        if sb - sa <= 1e-15 * (lo + sb):
            break
        s = step
    return lo + s


cdef inline double _uniform(bitgen_t* g) noexcept nogil:
    cdef double u = g.next_double(g.state)
    while u == 0.0:
        u = g.next_double(g.state)
    return u


cdef class _Sim:
    cdef int kind
    cdef double p0, p1, p2
    cdef int n
    cdef const int* indptr
    cdef const int* indices
    cdef int* states
    cdef double* last
    cdef double t
    cdef bitgen_t* rng
    # indexed binary heap over agents keyed on (key_t, key_seq)
    cdef int size
    cdef int* heap
    cdef int* pos
    cdef double* key_t
    cdef long long* key_seq
    cdef double* key_mu
    cdef long long seq
    cdef long long accepted, rejected
    cdef long long* counts
    cdef object _keep

    cdef inline bint _less(self, int a, int b) noexcept nogil:
        cdef double ta = self.key_t[a], tb = self.key_t[b]
        if ta < tb:
            return True
        if ta == tb:
            return self.key_seq[a] < self.key_seq[b]
        return False

    cdef void _sift_up(self, int i) noexcept nogil:
        cdef int item = self.heap[i], parent
        while i > 0:
            parent = (i - 1) >> 1
            if not self._less(item, self.heap[parent]):
                break
            self.heap[i] = self.heap[parent]
            self.pos[self.heap[i]] = i
            i = parent
        self.heap[i] = item
        self.pos[item] = i

    cdef void _sift_down(self, int i) noexcept nogil:
        cdef int item = self.heap[i], child
        while True:
            child = 2 * i + 1
            if child >= self.size:
                break
            if child + 1 < self.size and self._less(self.heap[child + 1], self.heap[child]):
                child += 1
            if not self._less(self.heap[child], item):
                break
            self.heap[i] = self.heap[child]
            self.pos[self.heap[i]] = i
            i = child
        self.heap[i] = item
        self.pos[item] = i

    cdef void _push(self, int agent, double mu, double fire_time) noexcept nogil:
        self.key_t[agent] = fire_time
        self.key_mu[agent] = mu
        self.key_seq[agent] = self.seq
        self.seq += 1
        cdef int i = self.pos[agent]
        if i < 0:
            i = self.size
            self.size += 1
            self.heap[i] = agent
            self.pos[agent] = i
            self._sift_up(i)
        else:
            self._sift_up(i)
            self._sift_down(self.pos[agent])

    # ------------------------------------------------------------ rates

    cdef double _rate(self, int n) noexcept nogil:
        cdef int s = self.states[n], j, idx, count = 0, k
        cdef double r = self.t - self.last[n], total, u, c
        if self.kind == KIND_SIS:
            if s == 1:
                return self.p1
            for idx in range(self.indptr[n], self.indptr[n + 1]):
                if self.states[self.indices[idx]] == 1:
                    count += 1
            return self.p0 * <double>count
        elif self.kind == KIND_FADING:
            if s == 1:
                return 1.0 / (1.0 - r) if 0.0 <= r < 1.0 else 0.0
            u = self.p0
            total = 0.0
            for idx in range(self.indptr[n], self.indptr[n + 1]):
                j = self.indices[idx]
                if self.states[j] == 1:
                    total += exp(-u * (self.t - self.last[j]))
            return u * total
        else:
            k = self.indptr[n + 1] - self.indptr[n]
            for idx in range(self.indptr[n], self.indptr[n + 1]):
                if self.states[self.indices[idx]] != s:
                    count += 1
            if count == 0:
                return 0.0
            u = <double>count / <double>k
            c = self.p0 if s == 0 else self.p1
            return c * u * pow(r * u, c - 1.0)  # both voter kinds

    # ------------------------------------------------------- scheduling

    cdef void _schedule_bound(self, int n) noexcept nogil:
        cdef int s = self.states[n]
        cdef int k = self.indptr[n + 1] - self.indptr[n]
        cdef double c, r, x, reached, fire_time
        if self.kind == KIND_SIS:
            c = self.p1 if s == 1 else <double>k * self.p0 * self.p2
        elif self.kind == KIND_FADING:
            if s == 1:
                r = self.t - self.last[n]
                self._push(n, INFINITY, self.t + fmax(1.0 - r, 0.0) * _uniform(self.rng))
                return
            c = <double>k * self.p0
        else:
            if k == 0:
                self._push(n, 0.0, INFINITY)
                return
            c = self.p0 if s == 0 else self.p1
            r = self.t - self.last[n]
            x = -log(_uniform(self.rng))
            if self.kind == KIND_VOTER_NUMERIC:
                reached = _invert_power(c, c - 1.0, r, x)
                if reached == INFINITY:
                    self._push(n, 0.0, INFINITY)
                    return
            else:
                reached = pow(pow(r, c) + x, 1.0 / c)
            fire_time = self.t + (reached - r)
            self._push(n, c * pow(fire_time - self.last[n], c - 1.0), fire_time)
            return
        if c <= 0.0:
            self._push(n, 0.0, INFINITY)
        else:
            self._push(n, c, self.t + -log(_uniform(self.rng)) / c)

    cdef void _schedule_frozen(self, int n) noexcept nogil:
        cdef int s = self.states[n], j, idx, count = 0, k
        cdef double lam, r, mass, x, delay, u, c, reached
        if self.kind == KIND_SIS:
            lam = self._rate(n)
            if lam <= 0.0:
                self._push(n, 0.0, INFINITY)
            else:
                self._push(n, lam, self.t + -log(_uniform(self.rng)) / lam)
            return
        if self.kind == KIND_FADING:
            if s == 1:
                r = self.t - self.last[n]
                self._push(n, INFINITY, self.t + fmax(1.0 - r, 0.0) * _uniform(self.rng))
                return
            u = self.p0
            mass = 0.0
            for idx in range(self.indptr[n], self.indptr[n + 1]):
                j = self.indices[idx]
                if self.states[j] == 1:
                    mass += exp(-u * (self.t - self.last[j]))
            if mass <= 0.0:
                self._push(n, 0.0, INFINITY)
                return
            x = -log(_uniform(self.rng))
            if x >= mass:
                self._push(n, 0.0, INFINITY)
                return
            delay = -log1p(-x / mass) / u
            self._push(n, u * mass * exp(-u * delay), self.t + delay)
            return
        k = self.indptr[n + 1] - self.indptr[n]
        for idx in range(self.indptr[n], self.indptr[n + 1]):
            if self.states[self.indices[idx]] != s:
                count += 1
        if count == 0:
            self._push(n, 0.0, INFINITY)
            return
        u = <double>count / <double>k
        c = self.p0 if s == 0 else self.p1
        r = self.t - self.last[n]
        x = -log(_uniform(self.rng))
        if self.kind == KIND_VOTER_NUMERIC:
            reached = _invert_power(c * pow(u, c), c - 1.0, r, x)
            if reached == INFINITY:
                self._push(n, 0.0, INFINITY)
                return
        else:
            reached = pow(pow(r * u, c) + x, 1.0 / c) / u
        delay = reached - r
        self._push(n, c * u * pow(reached * u, c - 1.0), self.t + delay)

    cdef inline void _set_state(self, int n, int new, list log_) except *:
        cdef int old = self.states[n]
        self.states[n] = new
        self.last[n] = self.t
        self.counts[old] -= 1
        self.counts[new] += 1
        if log_ is not None:
            log_.append((self.t, n, old, new))


def run(int engine, int kind, params, indptr, indices, init, double horizon,
        grid, bit_generator, bint record_log=False, state_names=("0", "1"), model_repr=""):
    """Run one replication; see :func:`redsim.engine.run` for the public API.

    Returns ``(rows, accepted, rejected, final_states, t_final, log)``.
    """
    cdef _Sim sim = _Sim()
    cdef int n_nodes = len(init)
    cdef int[::1] indptr_v = np.ascontiguousarray(indptr, dtype=np.int32)
    cdef int[::1] indices_v = np.ascontiguousarray(indices, dtype=np.int32)
    cdef int[::1] states_v = np.array(init, dtype=np.int32)
    cdef double[::1] last_v = np.zeros(n_nodes)
    cdef int[::1] heap_v = np.zeros(max(n_nodes, 1), dtype=np.int32)
    cdef int[::1] pos_v = np.full(max(n_nodes, 1), -1, dtype=np.int32)
    cdef double[::1] kt_v = np.zeros(max(n_nodes, 1))
    cdef double[::1] kmu_v = np.zeros(max(n_nodes, 1))
    cdef long long[::1] kseq_v = np.zeros(max(n_nodes, 1), dtype=np.int64)
    cdef long long[::1] counts_v = np.zeros(2, dtype=np.int64)
    cdef double[::1] grid_v = np.ascontiguousarray(grid, dtype=np.float64)
    cdef long long[:, ::1] rows_v = np.zeros((len(grid_v), 2), dtype=np.int64)
    cdef double[::1] par = np.zeros(3)
    cdef list log_ = [] if record_log else None
    cdef int i, a, s, new, g = 0, n_grid = len(grid_v)
    cdef double fire_time, bound_rate, mu, r
    cdef bint accept, changed
    cdef object capsule = bit_generator.capsule

    for i, value in enumerate(params):
        par[i] = value
    sim.kind = kind
    sim.p0, sim.p1, sim.p2 = par[0], par[1], par[2]
    sim.n = n_nodes
    sim.indptr = &indptr_v[0]
    sim.indices = &indices_v[0] if indices_v.shape[0] else NULL
    sim.states = &states_v[0] if n_nodes else NULL
    sim.last = &last_v[0] if n_nodes else NULL
    sim.heap = &heap_v[0]
    sim.pos = &pos_v[0]
    sim.key_t = &kt_v[0]
    sim.key_mu = &kmu_v[0]
    sim.key_seq = &kseq_v[0]
    sim.counts = &counts_v[0]
    sim.rng = <bitgen_t*>PyCapsule_GetPointer(capsule, "BitGenerator")
    sim._keep = (indptr_v, indices_v, states_v, last_v, heap_v, pos_v, kt_v, kmu_v, kseq_v, counts_v)
    sim.t = 0.0
    sim.size = 0
    sim.seq = 0
    sim.accepted = 0
    sim.rejected = 0

    for i in range(n_nodes):
        s = states_v[i]
        if s < 0 or s > 1:
            raise ValueError("init contains an unknown state index")
        counts_v[s] += 1

    for i in range(n_nodes):
        if engine == ENGINE_REDSIM:
            sim._schedule_bound(i)
        else:
            sim._schedule_frozen(i)

    while sim.size > 0:
        a = sim.heap[0]
        fire_time = sim.key_t[a]
        if not fire_time < horizon:
            break
        while g < n_grid and grid_v[g] < fire_time:
            rows_v[g, 0] = counts_v[0]
            rows_v[g, 1] = counts_v[1]
            g += 1
        sim.t = fire_time
        s = sim.states[a]
        if engine == ENGINE_REDSIM:
            bound_rate = sim.key_mu[a]
            if bound_rate == INFINITY:
                accept = True
            elif bound_rate > 0.0:
                mu = sim._rate(a)
                if mu > bound_rate * (1.0 + REL_SLACK):
                    raise BoundViolationError(a, state_names[s], mu, bound_rate, fire_time, model_repr)
                accept = _uniform(sim.rng) < mu / bound_rate
            else:
                accept = False
            if accept:
                new = 1 - s
                if new != s:
                    sim._set_state(a, new, log_)
                sim.accepted += 1
            else:
                sim.rejected += 1
            sim._schedule_bound(a)
        else:
            new = 1 - s
            sim.accepted += 1
            changed = new != s
            if changed:
                sim._set_state(a, new, log_)
            sim._schedule_frozen(a)
            if changed:
                for i in range(sim.indptr[a], sim.indptr[a + 1]):
                    sim._schedule_frozen(sim.indices[i])

    while g < n_grid:
        rows_v[g, 0] = counts_v[0]
        rows_v[g, 1] = counts_v[1]
        g += 1

    return (np.asarray(rows_v), sim.accepted, sim.rejected,
            np.asarray(states_v).astype(np.int64), sim.t, log_)
