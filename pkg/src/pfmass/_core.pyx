# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled quadrature backend.

Same panel engine as the pure-Python module: Gauss-Kronrod 7-15 with
deterministic worst-first bisection and ascending-order accumulation, here
as scalar C loops with preallocated workspaces.  The hot loops run without
the GIL, so sweeps parallelize across threads.
"""

from libc.stdlib cimport free, malloc
from libc.math cimport fabs, sqrt

from ._grids import radial_breakpoints, x_breakpoints

cdef double PI = 3.141592653589793

cdef double XK[15]
cdef double WK[15]
cdef double WG[15]

_xk = [
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813,
]
_wk = [
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529,
]
_wg = [
    0.0, 0.129484966168870, 0.0, 0.279705391489277, 0.0,
    0.381830050505119, 0.0, 0.417959183673469, 0.0,
    0.381830050505119, 0.0, 0.279705391489277, 0.0,
    0.129484966168870, 0.0,
]
for _i in range(15):
    XK[_i] = _xk[_i]
    WK[_i] = _wk[_i]
    WG[_i] = _wg[_i]


ctypedef int (*eval_fn)(double*, int, double*, double*, void*) noexcept nogil


cdef struct Ws:
    double* a
    double* b
    double* v
    double* e
    int* nxt
    int cap


cdef int ws_alloc(Ws* w, int cap):
    w.cap = cap
    w.a = <double*>malloc(cap * sizeof(double))
    w.b = <double*>malloc(cap * sizeof(double))
    w.v = <double*>malloc(cap * sizeof(double))
    w.e = <double*>malloc(cap * sizeof(double))
    w.nxt = <int*>malloc(cap * sizeof(int))
    if w.a == NULL or w.b == NULL or w.v == NULL or w.e == NULL or w.nxt == NULL:
        return -1
    return 0


cdef void ws_free(Ws* w):
    free(w.a)
    free(w.b)
    free(w.v)
    free(w.e)
    free(w.nxt)


cdef int panel_eval(eval_fn fn, void* ctx, double a, double b,
                    double* out_v, double* out_e) noexcept nogil:
    cdef double xs[15]
    cdef double vv[15]
    cdef double ee[15]
    cdef double mid = 0.5 * (a + b)
    cdef double half = 0.5 * (b - a)
    cdef double k = 0.0, g = 0.0, ce = 0.0
    cdef int i
    for i in range(15):
        xs[i] = mid + half * XK[i]
    fn(xs, 15, vv, ee, ctx)
    for i in range(15):
        k += vv[i] * WK[i]
        g += vv[i] * WG[i]
        ce += ee[i] * WK[i]
    out_v[0] = half * k
    out_e[0] = fabs(half * k - half * g) + half * ce
    return 0


cdef int c_adapt(eval_fn fn, void* ctx, double* brk, int nedges,
                 double rel, double absf, int maxs, Ws* ws,
                 double* out_v, double* out_e) noexcept nogil:
    cdef int npan = nedges - 1
    cdef int i, cur, worst, count, splits
    cdef double total, terr, emax, m, tol
    out_v[0] = 0.0
    out_e[0] = 0.0
    if npan < 1 or brk[nedges - 1] <= brk[0]:
        return 1
    if npan >= ws.cap:
        return 0
    for i in range(npan):
        ws.a[i] = brk[i]
        ws.b[i] = brk[i + 1]
        panel_eval(fn, ctx, ws.a[i], ws.b[i], &ws.v[i], &ws.e[i])
        ws.nxt[i] = i + 1
    ws.nxt[npan - 1] = -1
    count = npan
    splits = 0
    while True:
        total = 0.0
        terr = 0.0
        emax = -1.0
        worst = 0
        cur = 0
        while cur != -1:
            total += ws.v[cur]
            terr += ws.e[cur]
            if ws.e[cur] > emax:
                emax = ws.e[cur]
                worst = cur
            cur = ws.nxt[cur]
        tol = rel * fabs(total)
        if absf > tol:
            tol = absf
        out_v[0] = total
        out_e[0] = terr
        if terr <= tol:
            return 1
        if splits >= maxs or count >= ws.cap:
            return 0
        m = 0.5 * (ws.a[worst] + ws.b[worst])
        if not (ws.a[worst] < m < ws.b[worst]):
            return 0
        ws.a[count] = m
        ws.b[count] = ws.b[worst]
        panel_eval(fn, ctx, m, ws.b[count], &ws.v[count], &ws.e[count])
        ws.b[worst] = m
        panel_eval(fn, ctx, ws.a[worst], m, &ws.v[worst], &ws.e[worst])
        ws.nxt[count] = ws.nxt[worst]
        ws.nxt[worst] = count
        count += 1
        splits += 1


# ---------------------------------------------------------------------------
# Polar b-term: X -> r1 -> r2.

cdef struct BCtx:
    int j
    double lam
    double kappa
    double rel
    double absf
    int maxs
    double X
    double r1
    double* rbase
    int nrbase
    double* ibuf
    Ws* wmid
    Ws* winn
    long* count


cdef int _cb_r2(double* xs, int n, double* v, double* e, void* p) noexcept nogil:
    cdef BCtx* c = <BCtx*>p
    cdef double r1 = c.r1
    cdef double X = c.X
    cdef double r2, L1, L2, q, Finv
    cdef int i
    c.count[0] += n
    L1 = 1.0 / (0.5 * r1 * r1 + r1)
    for i in range(n):
        r2 = xs[i]
        L2 = 1.0 / (0.5 * r2 * r2 + r2)
        q = r1 * r1 + 2.0 * r1 * r2 * X + r2 * r2
        Finv = 1.0 / (0.5 * q + r1 + r2)
        if c.j == 1:
            v[i] = -(1.0 + X * X) * PI * r1 * r2 * (L1 + L2) * Finv
        elif c.j == 2:
            v[i] = (1.0 + X * X) * PI * r1 * r2 * Finv * Finv * Finv * 0.5 * q
        elif c.j == 3:
            v[i] = X * (X * X - 1.0) * PI * r1 * r1 * r2 * r2 * (L1 + L2) * Finv * Finv
        elif c.j == 4:
            v[i] = -(1.0 + X * X) * PI * r1 * r2 * L1 * L2
        elif c.j == 5:
            v[i] = (1.0 - X * X) * PI * r1 * r2 \
                * (r1 * r1 * L1 * L1 + r2 * r2 * L2 * L2) * Finv
        else:
            v[i] = X * (X * X - 1.0) * PI * r1 * r1 * r2 * r2 * L1 * L2 * Finv
        e[i] = 0.0
    return 0


cdef int _merge_with_dip(double* base, int nbase, double a, double b,
                         double dip, double width, int have_dip,
                         double* out) noexcept nogil:
    """Merge the interior of a sorted edge list with up to three dip points,
    clipping to (a, b) and deduplicating, mirroring merge_breaks."""
    cdef double tol = 1e-12 * (b - a)
    cdef double extra[3]
    cdef int nex = 0
    cdef int ib = 1, ie = 0, n = 1
    cdef double pnext
    if have_dip:
        extra[0] = dip - width
        extra[1] = dip
        extra[2] = dip + width
        nex = 3
    out[0] = a
    while ib < nbase - 1 or ie < nex:
        if ib < nbase - 1 and (ie >= nex or base[ib] <= extra[ie]):
            pnext = base[ib]
            ib += 1
        else:
            pnext = extra[ie]
            ie += 1
        if pnext <= a + tol or pnext >= b - tol:
            continue
        if pnext - out[n - 1] > tol:
            out[n] = pnext
            n += 1
    out[n] = b
    return n + 1


cdef int _inner_breaks_c(BCtx* c) noexcept nogil:
    cdef double cc = -c.r1 * c.X - 1.0
    cdef double d1
    cdef int have = 0
    cdef double w = 0.0
    if c.kappa < cc < c.lam:
        d1 = c.r1 * c.r1 * (1.0 - c.X * c.X) + 2.0 * c.r1 * (1.0 - c.X) - 1.0
        if d1 > 0.0:
            w = sqrt(d1)
            have = 1
    return _merge_with_dip(c.rbase, c.nrbase, c.kappa, c.lam, cc, w, have, c.ibuf)


cdef int _cb_r1(double* xs, int n, double* v, double* e, void* p) noexcept nogil:
    cdef BCtx* c = <BCtx*>p
    cdef int i, nib
    for i in range(n):
        c.r1 = xs[i]
        nib = _inner_breaks_c(c)
        c_adapt(_cb_r2, p, c.ibuf, nib, c.rel * 0.05, c.absf * 0.05,
                c.maxs, c.winn, &v[i], &e[i])
    return 0


cdef int _cb_X(double* xs, int n, double* v, double* e, void* p) noexcept nogil:
    cdef BCtx* c = <BCtx*>p
    cdef int i
    for i in range(n):
        c.X = xs[i]
        c_adapt(_cb_r1, p, c.rbase, c.nrbase, c.rel * 0.1, c.absf * 0.1,
                c.maxs, c.wmid, &v[i], &e[i])
    return 0


def bterm(int j, double lam, double kappa, double rel_tol, double abs_tol,
          int max_subdiv, bint split_layer):
    """Triple adaptive quadrature of one polar term; see the pure backend."""
    if j < 1 or j > 6:
        raise ValueError(f"term index {j} outside 1..6")
    if lam <= kappa:
        return 0.0, 0.0, 0, True
    rb = radial_breakpoints(kappa, lam)
    xb = x_breakpoints(lam, split_layer)
    cdef int nrb = len(rb)
    cdef int nxb = len(xb)
    cdef double* rbase = <double*>malloc(nrb * sizeof(double))
    cdef double* xbase = <double*>malloc(nxb * sizeof(double))
    cdef double* ibuf = <double*>malloc((nrb + 5) * sizeof(double))
    cdef Ws wout, wmid, winn
    cdef int ok = 0
    if rbase != NULL and xbase != NULL and ibuf != NULL:
        if ws_alloc(&wout, nxb + max_subdiv + 4) == 0 \
                and ws_alloc(&wmid, nrb + max_subdiv + 4) == 0 \
                and ws_alloc(&winn, nrb + max_subdiv + 8) == 0:
            ok = 1
    if not ok:
        raise MemoryError("workspace allocation failed")
    cdef int i
    for i in range(nrb):
        rbase[i] = rb[i]
    for i in range(nxb):
        xbase[i] = xb[i]
    cdef long cnt = 0
    cdef BCtx ctx
    ctx.j = j
    ctx.lam = lam
    ctx.kappa = kappa
    ctx.rel = rel_tol
    ctx.absf = abs_tol
    ctx.maxs = max_subdiv
    ctx.rbase = rbase
    ctx.nrbase = nrb
    ctx.ibuf = ibuf
    ctx.wmid = &wmid
    ctx.winn = &winn
    ctx.count = &cnt
    cdef double val = 0.0, err = 0.0
    cdef int conv
    with nogil:
        conv = c_adapt(_cb_X, &ctx, xbase, nxb, rel_tol, abs_tol,
                       max_subdiv, &wout, &val, &err)
    ws_free(&wout)
    ws_free(&wmid)
    ws_free(&winn)
    free(rbase)
    free(xbase)
    free(ibuf)
    return val, err, int(cnt), bool(conv)


# ---------------------------------------------------------------------------
# rho-denominator family: X -> r.

cdef struct RCtx:
    int which            # 0..3 boundedness integrands, 4 cutoff derivative
    double lam
    double kappa
    double rel
    double absf
    int maxs
    double X
    double* rladder
    int nladder
    double* rbuf
    Ws* winn
    long* count


cdef int _cb_rho_r(double* xs, int n, double* v, double* e, void* p) noexcept nogil:
    cdef RCtx* c = <RCtx*>p
    cdef double lam = c.lam
    cdef double X = c.X
    cdef double r, rho
    cdef int i
    c.count[0] += n
    for i in range(n):
        r = xs[i]
        rho = r * r + 2.0 * lam * r * X + lam * lam + 2.0 * r + 2.0 * lam
        if c.which == 0:
            v[i] = 1.0 / rho
        elif c.which == 1:
            v[i] = 1.0 / (rho * rho)
        elif c.which == 2:
            v[i] = 1.0 / (rho * (r + 2.0))
        elif c.which == 3:
            v[i] = 1.0 / (rho * rho)
        else:
            v[i] = (r * r + 2.0 * r * lam * X + lam * lam) * r * lam \
                / (rho * rho * rho)
        e[i] = 0.0
    return 0


cdef int _cb_rho_X(double* xs, int n, double* v, double* e, void* p) noexcept nogil:
    cdef RCtx* c = <RCtx*>p
    cdef int i, nrb, have
    cdef double X, cc, d, w, fac, vv, ee
    for i in range(n):
        X = xs[i]
        c.X = X
        cc = -c.lam * X - 1.0
        d = c.lam * c.lam * (1.0 - X * X) + 2.0 * c.lam * (1.0 - X) - 1.0
        have = 1 if (c.kappa < cc < c.lam and d > 0.0) else 0
        w = sqrt(d) if have else 0.0
        nrb = _merge_with_dip(c.rladder, c.nladder, c.kappa, c.lam,
                              cc, w, have, c.rbuf)
        c_adapt(_cb_rho_r, p, c.rbuf, nrb, c.rel * 0.1, c.absf * 0.1,
                c.maxs, c.winn, &vv, &ee)
        if c.which == 3:
            fac = 1.0 - X * X
        elif c.which == 4:
            fac = 1.0 + X * X
        else:
            fac = 1.0
        v[i] = fac * vv
        e[i] = fac * ee
    return 0


cdef class _RhoRunner:
    """Workspace holder for the 2-D rho-family integrals."""
    cdef RCtx ctx
    cdef Ws wout
    cdef Ws winn
    cdef double* rladder
    cdef double* rbuf
    cdef double* xbase
    cdef int nxb
    cdef long cnt

    def __cinit__(self, double lam, double kappa, double rel_tol,
                  double abs_tol, int max_subdiv):
        rl = radial_breakpoints(kappa, lam)
        xb = x_breakpoints(lam, True)
        cdef int nrl = len(rl)
        self.nxb = len(xb)
        self.rladder = <double*>malloc(nrl * sizeof(double))
        self.rbuf = <double*>malloc((nrl + 5) * sizeof(double))
        self.xbase = <double*>malloc(self.nxb * sizeof(double))
        cdef int ok = 0
        if self.rladder != NULL and self.rbuf != NULL and self.xbase != NULL:
            if ws_alloc(&self.wout, self.nxb + max_subdiv + 4) == 0 \
                    and ws_alloc(&self.winn, nrl + max_subdiv + 8) == 0:
                ok = 1
        if not ok:
            raise MemoryError("workspace allocation failed")
        cdef int i
        for i in range(nrl):
            self.rladder[i] = rl[i]
        for i in range(self.nxb):
            self.xbase[i] = xb[i]
        self.cnt = 0
        self.ctx.lam = lam
        self.ctx.kappa = kappa
        self.ctx.rel = rel_tol
        self.ctx.absf = abs_tol
        self.ctx.maxs = max_subdiv
        self.ctx.rladder = self.rladder
        self.ctx.nladder = nrl
        self.ctx.rbuf = self.rbuf
        self.ctx.winn = &self.winn
        self.ctx.count = &self.cnt

    def run(self, int which):
        self.ctx.which = which
        cdef double val = 0.0, err = 0.0
        cdef int conv
        cdef int maxs = self.ctx.maxs
        cdef double rel = self.ctx.rel
        cdef double absf = self.ctx.absf
        with nogil:
            conv = c_adapt(_cb_rho_X, &self.ctx, self.xbase, self.nxb,
                           rel, absf, maxs, &self.wout, &val, &err)
        return val, err, bool(conv)

    @property
    def evaluations(self):
        return int(self.cnt)

    def __dealloc__(self):
        ws_free(&self.wout)
        ws_free(&self.winn)
        free(self.rladder)
        free(self.rbuf)
        free(self.xbase)


def db2(double lam, double kappa, double rel_tol, double abs_tol,
        int max_subdiv):
    """Cutoff derivative of the second polar term; see the pure backend."""
    if lam <= kappa:
        return 0.0, 0.0, 0, True
    runner = _RhoRunner(lam, kappa, rel_tol, abs_tol, max_subdiv)
    val, err, conv = runner.run(4)
    return 8.0 * PI * val, 8.0 * PI * err, runner.evaluations, conv


def rho_integrals(double lam, double rel_tol, double abs_tol, int max_subdiv):
    """Raw boundedness integrals; see the pure backend."""
    runner = _RhoRunner(lam, 0.0, rel_tol, abs_tol, max_subdiv)
    vals = []
    errs = []
    conv_all = True
    for which in range(4):
        val, err, conv = runner.run(which)
        vals.append(val)
        errs.append(err)
        conv_all = conv_all and conv
    return tuple(vals), tuple(errs), runner.evaluations, conv_all
