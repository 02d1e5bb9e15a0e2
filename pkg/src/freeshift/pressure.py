"""Pressure, transfer operators, and identity-fiber partition sums.

Topological pressure of a locally constant potential is the log spectral
radius of its weighted transfer matrix over m-windows (m = max(depth, 1)).
The restricted (fiber) pressure over a quotient is the exponential growth
rate of the partition sums

    a_n = sum over admissible words of length n with image id of exp(S_w f).

For finite image groups that growth rate is again an exact eigenvalue
problem for the lifted transfer matrix on (window, element) pairs. For
infinite image groups the library computes a_n exactly by dynamic
programming and extrapolates the rate from the series:

* free abelian images: vectorized DP over (window, ball element); a length-n
  prefix cannot leave the radius-n ball, so indexing ball(n_max) is exact;
* free images (killed generators): excursion renewal on the image tree;
  paths decompose uniquely at their last visits to each node of the geodesic
  spine, giving first-passage matrix convolutions over window states.

Perron roots are computed by power iteration with Collatz-Wielandt ratio
enclosures, so every exact eigenvalue carries a certified residual.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError, ResourceError, ValidationError
from .potentials import (Potential, boundary_completion, window_states)
from .quotients import (FiniteQuotient, FreeAbelianQuotient,
                        FreeKillQuotient, Quotient)
from .words import enumerate_words

LOG_DOMAIN_THRESHOLD = 600.0
NEG_INF = float("-inf")


# ---------------------------------------------------------------------------
# transfer matrices

def _window_graph(d, m):
    """Predecessor table: src[j] lists the 2d-1 windows w1 with
    w1[1:] == w2[:-1] for w2 = windows[j] (m>=2), or w1 != w2-inverse
    (m == 1). new_letter[j] is the letter appended when entering w2."""
    windows, index = window_states(d, m)
    src = np.empty((len(windows), 2 * d - 1), dtype=np.int64)
    new_letter = np.empty(len(windows), dtype=np.int64)
    for j, w2 in enumerate(windows):
        new_letter[j] = w2[-1]
        if m == 1:
            preds = [index[(x,)] for x in range(2 * d) if x != (w2[0] ^ 1)]
        else:
            preds = [index[(x,) + w2[:-1]]
                     for x in range(2 * d) if x != (w2[0] ^ 1)]
        src[j] = preds
    return windows, index, src, new_letter


class TransferMatrix:
    """Weighted adjacency over m-windows; weight exp(f(target window))."""

    def __init__(self, pot):
        self.pot = pot
        self.m = max(pot.depth, 1)
        windows, index, src, new_letter = _window_graph(pot.d, self.m)
        self.windows = windows
        self.index = index
        n = len(windows)
        M = np.zeros((n, n))
        w = np.exp(pot.values)
        for j in range(n):
            M[src[j], j] = w[j]
        self.matrix = M
        # free-shift window graphs are strongly connected; cheap to certify
        adj = M > 0
        assert _reach(adj, 0).all() and _reach(adj.T, 0).all(), \
            "window transition graph must be irreducible"

    def initial_vector(self):
        """Weights of the first window, so that
        initial @ matrix^(n-m) @ ones = sum over Sigma^n of exp(interior
        sums). Exact partition sums for depth 1."""
        return np.exp(self.pot.values)


class LiftedTransferMatrix:
    """Transfer matrix of the group extension over a finite quotient:
    states are (window, element) pairs, transitions multiply the element by
    the image of the appended letter."""

    MAX_STATES = 20_000

    def __init__(self, pot, quotient):
        if not isinstance(quotient, FiniteQuotient):
            raise ValidationError(
                "lifted transfer matrices need a finite quotient")
        if pot.d != quotient.d:
            raise ValidationError("potential and quotient rank mismatch")
        self.pot = pot
        self.quotient = quotient
        self.m = max(pot.depth, 1)
        windows, index, src, new_letter = _window_graph(pot.d, self.m)
        order = quotient.table.shape[0]
        n_states = len(windows) * order
        if n_states > self.MAX_STATES:
            raise ResourceError(
                "lifted transfer matrix too large; use the fiber DP route",
                required=n_states, budget=self.MAX_STATES)
        self.windows = windows
        self.order = order
        # flat state = window_idx * order + element
        M = np.zeros((n_states, n_states))
        w = np.exp(pot.values)
        images = [quotient.letter_image(l) for l in range(2 * pot.d)]
        table = quotient.table
        for j in range(len(windows)):
            img = images[int(new_letter[j])]
            for g in range(order):
                col = j * order + int(table[g, img])
                M[src[j] * order + g, col] = w[j]
        self.matrix = M
        self.identity_states = np.array(
            [j * order + quotient.identity_index
             for j in range(len(windows))])

    def reachable_class(self):
        """Indices of the strongly connected class containing the identity
        fiber (union over id-states of their classes, normally one)."""
        n = self.matrix.shape[0]
        adj = self.matrix > 0
        covered = np.zeros(n, dtype=bool)
        classes = []
        for s in self.identity_states:
            if covered[s]:
                continue
            fwd = _reach(adj, s)
            bwd = _reach(adj.T, s)
            scc = fwd & bwd
            covered |= scc
            classes.append(np.nonzero(scc)[0])
        return classes


def _reach(adj_bool, seed):
    n = adj_bool.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[seed] = True
    frontier = np.zeros(n, dtype=bool)
    frontier[seed] = True
    while frontier.any():
        nxt = adj_bool[frontier].any(axis=0) & ~seen
        seen |= nxt
        frontier = nxt
    return seen


# ---------------------------------------------------------------------------
# Perron eigendata with certified enclosures

@dataclass
class PerronResult:
    rho: float
    residual: float           # half-width of the Collatz-Wielandt enclosure
    iterations: int
    right: np.ndarray
    left: np.ndarray = None


def perron_eigen(M, period=1, tol=1e-13, max_iter=100_000, want_left=False):
    """Power iteration on M^period from the all-ones vector.

    Stops when the Collatz-Wielandt ratios (M^p v)_i / v_i pinch the
    spectral radius of M^p to relative width ``tol``; that enclosure is the
    returned residual (exactness certificate). Deterministic.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError("perron_eigen needs a square matrix")
    Mp = np.linalg.matrix_power(M, period) if period > 1 else M
    v = np.ones(Mp.shape[0])
    rho_p = None
    for it in range(1, max_iter + 1):
        w = Mp @ v
        wmax = w.max()
        if wmax <= 0:
            raise NumericError("transfer matrix has a zero row block")
        ratios = w / v
        lo, hi = ratios.min(), ratios.max()
        rho_p = 0.5 * (lo + hi)
        v = w / wmax
        if hi - lo <= tol * max(1.0, hi):
            left = None
            if want_left:
                left = perron_eigen(Mp.T, 1, tol, max_iter).right
            rho = rho_p ** (1.0 / period)
            return PerronResult(rho, 0.5 * (hi - lo), it, v, left)
    raise NumericError(
        f"power iteration did not converge in {max_iter} iterations "
        f"(enclosure width {hi - lo:g}, tol {tol:g})")


@dataclass
class PressureResult:
    """A pressure value with its provenance.

    ``method`` is "exact-eigenvalue" (sigma 0, residual = certified
    enclosure of the log eigenvalue) or "extrapolated" (sigma from the
    growth fit)."""

    value: float
    sigma: float
    method: str
    residual: float
    detail: dict = field(default_factory=dict)


def full_pressure(pot, tol=1e-13):
    """log spectral radius of the transfer matrix; P(0) = log(2d-1)."""
    tm = TransferMatrix(pot)
    pe = perron_eigen(tm.matrix, 1, tol)
    return PressureResult(math.log(pe.rho), 0.0, "exact-eigenvalue",
                          pe.residual / max(pe.rho, 1e-300),
                          {"iterations": pe.iterations,
                           "states": tm.matrix.shape[0]})


def restricted_pressure_exact(pot, quotient, tol=1e-13):
    """Restricted pressure over a finite quotient: (1/p) log rho of the
    p-th power of the lifted transfer matrix on its identity class."""
    lifted = LiftedTransferMatrix(pot, quotient)
    p = quotient.period().value
    best = None
    for cls in lifted.reachable_class():
        sub = lifted.matrix[np.ix_(cls, cls)]
        pe = perron_eigen(sub, p, tol)
        if best is None or pe.rho > best[0].rho:
            best = (pe, len(cls))
    pe, n_states = best
    return PressureResult(math.log(pe.rho), 0.0, "exact-eigenvalue",
                          pe.residual / max(pe.rho ** p, 1e-300) / p,
                          {"iterations": pe.iterations, "states": n_states,
                           "period": p})


# ---------------------------------------------------------------------------
# fiber partition sums

@dataclass
class FiberSeries:
    """log a_n for n = 1..n_max (NEG_INF where the fiber is empty)."""

    n_max: int
    log_values: np.ndarray
    target: object
    period: int
    meta: dict = field(default_factory=dict)

    @property
    def lengths(self):
        return np.arange(1, self.n_max + 1)

    @property
    def values(self):
        return np.exp(self.log_values)


def fiber_partition(pot, quotient, n_max, target=None,
                    max_states=50_000_000):
    """Exact a_n = sum over length-n words with image ``target`` (default
    identity) of exp(S_w f), as a FiberSeries of logs."""
    res = fiber_partition_many(pot, quotient, n_max,
                               [quotient.identity if target is None
                                else target], max_states=max_states)
    return next(iter(res.values()))


def fiber_partition_many(pot, quotient, n_max, targets,
                         max_states=50_000_000):
    if pot.d != quotient.d:
        raise ValidationError("potential and quotient rank mismatch")
    if n_max < 1:
        raise ValidationError(f"n_max must be >= 1, got {n_max}")
    targets = list(targets)
    p = quotient.period().value
    if n_max < p:
        raise ValidationError(
            f"n_max={n_max} is below the fiber period {p}; no return "
            f"word fits")
    log_mode = (pot.values.max() - pot.values.min()) * n_max \
        > LOG_DOMAIN_THRESHOLD
    if isinstance(quotient, FreeKillQuotient):
        logs = _fiber_renewal(pot, quotient, n_max, targets, log_mode)
    elif isinstance(quotient, (FiniteQuotient, FreeAbelianQuotient)):
        logs = _fiber_ball_dp(pot, quotient, n_max, targets, max_states)
    else:
        raise ValidationError(
            f"unsupported quotient type {type(quotient).__name__}")
    meta = {"quotient": quotient.describe(), "depth": pot.depth,
            "log_mode": bool(log_mode)}
    return {t: FiberSeries(n_max, logs[i], t, p, dict(meta))
            for i, t in enumerate(targets)}


def _short_fiber_logs(pot, quotient, n_upto, targets):
    """Brute force for lengths below the window size: enumerate words."""
    from .potentials import birkhoff_sup_sum
    out = np.full((len(targets), n_upto), NEG_INF)
    tindex = {t: i for i, t in enumerate(targets)}
    for n in range(1, n_upto + 1):
        acc = [[] for _ in targets]
        for w in enumerate_words(pot.d, n):
            g = quotient.eval_word(w)
            i = tindex.get(g)
            if i is not None:
                acc[i].append(birkhoff_sup_sum(pot, w))
        for i, vals in enumerate(acc):
            if vals:
                m = max(vals)
                out[i, n - 1] = m + math.log(
                    sum(math.exp(v - m) for v in vals))
    return out


def _fiber_ball_dp(pot, quotient, n_max, targets, max_states):
    d = pot.d
    m = max(pot.depth, 1)
    windows, index, src, new_letter = _window_graph(d, m)
    W = len(windows)
    elements = quotient.ball(n_max, max_elements=max_states)
    B = len(elements)
    if W * B > max_states:
        raise ResourceError("fiber DP state space exceeds budget",
                            required=W * B, budget=max_states)
    eindex = {e: i for i, e in enumerate(elements)}
    # group shift per letter: next_idx[l][g] = index of elements[g] * img(l)
    next_idx = np.full((2 * d, B), -1, dtype=np.int64)
    for l in range(2 * d):
        img = quotient.letter_image(l)
        for gi, e in enumerate(elements):
            h = quotient.multiply(e, img)
            next_idx[l, gi] = eindex.get(h, -1)
    tpos = []
    for t in targets:
        if t not in eindex:
            raise ValidationError(
                f"target {t!r} outside the radius-{n_max} ball")
        tpos.append(eindex[t])

    out = np.full((len(targets), n_max), NEG_INF)
    if m > 1:
        out[:, :m - 1] = _short_fiber_logs(pot, quotient, m - 1, targets)

    # exp of the trailing-window completion per window state
    bnd = np.array([boundary_completion(pot, w[-(pot.depth - 1):])
                    if pot.depth > 1 else 0.0 for w in windows])
    ebnd = np.exp(bnd)
    weights = np.exp(pot.values)

    A = np.zeros((W, B))
    for j, w in enumerate(windows):
        g = quotient.eval_word(w)
        A[j, eindex[g]] += weights[j]
    logscale = 0.0

    def readout(n):
        for i, gp in enumerate(tpos):
            s = float(A[:, gp] @ ebnd)
            if s > 0:
                out[i, n - 1] = logscale + math.log(s)

    readout(m)
    for n in range(m + 1, n_max + 1):
        gathered = A[src, :].sum(axis=1)          # (W, B): sum over sources
        A2 = np.zeros_like(A)
        for j in range(W):
            ni = next_idx[new_letter[j]]
            valid = ni >= 0
            row = gathered[j]
            # out-of-ball shifts carry provably dead mass (a length-n
            # prefix sits in ball(n)); drop and verify
            if not valid.all() and row[~valid].any():
                raise NumericError("fiber DP dropped live mass; ball "
                                   "indexing is inconsistent")
            A2[j, ni[valid]] = row[valid] * weights[j]
        A = A2
        peak = A.max()
        if peak <= 0:
            break        # no admissible continuations carry weight: done
        A /= peak
        logscale += math.log(peak)
        readout(n)
    return out


# -- excursion renewal on the image tree (free-kill quotients) -------------

def _extended_states(d, cap):
    """Words of length <= cap (the DP window contexts), lexicographic by
    (length, letters); state 0 is the empty context."""
    states = [()]
    for n in range(1, cap + 1):
        states.extend(enumerate_words(d, n))
    return states, {s: i for i, s in enumerate(states)}


def _step_matrices(pot, log_mode):
    """Per-letter transition matrices over extended window states. Entry
    [s, s'] is exp(f(completed window)) when appending the letter to
    context s is admissible and completes a window, 1.0 before the first
    window completes, 0 otherwise (log domain when log_mode)."""
    d, k = pot.d, pot.depth
    cap = max(k - 1, 1)
    states, sindex = _extended_states(d, cap)
    S = len(states)
    zero = NEG_INF if log_mode else 0.0
    mats = []
    for a in range(2 * d):
        M = np.full((S, S), zero)
        for i, s in enumerate(states):
            if s and a == (s[-1] ^ 1):
                continue
            grown = s + (a,)
            s2 = grown if len(grown) <= cap else grown[-cap:]
            if len(grown) >= k:
                val = pot.value(grown[-k:])
            else:
                val = 0.0
            M[i, sindex[s2]] = val if log_mode else math.exp(val)
        mats.append(M)
    return states, sindex, mats


def _mat_mul(A, B, log_mode):
    if not log_mode:
        return A @ B
    # log-domain matrix product: logsumexp over the inner axis
    return _log_matmul(A, B)


def _log_matmul(A, B):
    # (i,k)+(k,j) -> max + log sum exp, guarding empty supports
    T = A[:, :, None] + B[None, :, :]
    m = T.max(axis=1)
    with np.errstate(invalid="ignore"):
        out = m + np.log(np.exp(T - m[:, None, :]).sum(axis=1))
    out[~np.isfinite(m)] = NEG_INF
    return out


def _fiber_renewal(pot, quotient, n_max, targets, log_mode):
    from .words import is_reduced
    d = pot.d
    survivor_set = set(quotient.survivor_letters)
    for t in targets:
        w = tuple(t)
        if not (is_reduced(w) and set(w) <= survivor_set):
            raise ValidationError(
                f"target {t!r} is not a reduced survivor word")
    states, sindex, steps = _step_matrices(pot, log_mode)
    S = len(states)
    survivors = quotient.survivor_letters
    killed = quotient.killed_letters
    zero = NEG_INF if log_mode else 0.0
    one_mat = np.full((S, S), zero)
    idx = np.arange(S)
    if log_mode:
        one_mat[idx, idx] = 0.0
    else:
        one_mat[idx, idx] = 1.0

    def zeros():
        return np.full((S, S), zero)

    def acc(dst, term):
        if log_mode:
            np.logaddexp(dst, term, out=dst)
        else:
            dst += term

    # series arrays indexed by length
    A = [one_mat.copy()] + [None] * n_max
    D = {x: [None, None] + [None] * (n_max - 1) for x in survivors}
    Bx = {x: [one_mat.copy()] + [None] * n_max for x in survivors}

    for n in range(1, n_max + 1):
        # excursions of length n: descend via x, stay n-2, ascend
        for x in survivors:
            if n >= 2:
                mid = Bx[x][n - 2]
                D[x][n] = _mat_mul(_mat_mul(steps[x], mid, log_mode),
                                   steps[x ^ 1], log_mode)
            else:
                D[x][n] = zeros()
        # stay blocks below an x-edge: first move is a killed letter or a
        # deeper excursion via y != x^{-1}
        for x in survivors:
            M = zeros()
            for a in killed:
                acc(M, _mat_mul(steps[a], Bx[x][n - 1], log_mode))
            for y in survivors:
                if y == (x ^ 1):
                    continue
                for i in range(2, n + 1):
                    acc(M, _mat_mul(D[y][i], Bx[x][n - i], log_mode))
            Bx[x][n] = M
        # origin blocks: same with every survivor direction allowed
        M = zeros()
        for a in killed:
            acc(M, _mat_mul(steps[a], A[n - 1], log_mode))
        for y in survivors:
            for i in range(2, n + 1):
                acc(M, _mat_mul(D[y][i], A[n - i], log_mode))
        A[n] = M

    bnd = np.array([boundary_completion(pot, s) for s in states])
    start = sindex[()]

    out = np.full((len(targets), n_max), NEG_INF)
    for ti, t in enumerate(targets):
        spine = tuple(t)
        # convolve A with one (step + stay) block per spine letter
        chain = A
        for x in spine:
            step_stay = [zeros()] * (n_max + 1)
            for n in range(1, n_max + 1):
                step_stay[n] = _mat_mul(steps[x], Bx[x][n - 1], log_mode)
            nxt = [zeros() for _ in range(n_max + 1)]
            for n in range(0, n_max + 1):
                M = zeros()
                for i in range(1, n + 1):
                    acc(M, _mat_mul(chain[n - i], step_stay[i], log_mode))
                nxt[n] = M
            chain = nxt
        for n in range(1, n_max + 1):
            row = chain[n][start]
            if log_mode:
                vals = row + bnd
                m = vals.max()
                if np.isfinite(m):
                    out[ti, n - 1] = m + math.log(
                        np.exp(vals - m).sum())
            else:
                s = float(row @ np.exp(bnd))
                if s > 0:
                    out[ti, n - 1] = math.log(s)
    return out


# ---------------------------------------------------------------------------
# growth-rate extraction

@dataclass
class GrowthFit:
    """Tail fit of log a_n = c + lambda n - gamma log n.

    The log n term absorbs the polynomial prefactor of the fiber series
    (C lambda^n n^-gamma); without it the slope estimate is biased by
    -gamma/n_bar, which is far larger than the target accuracy at the
    default n_max. sigma is max(regression stderr, half-window
    sensitivity)."""

    lam: float
    sigma: float
    gamma: float
    gamma_sigma: float
    n_points: int
    window: tuple
    rms: float
    tail_monotone: bool = True


def _poly_corrected_fit(ns, ys):
    X = np.column_stack([np.ones(len(ns)), ns, np.log(ns)])
    coef, *_ = np.linalg.lstsq(X, ys, rcond=None)
    resid = ys - X @ coef
    dof = max(len(ns) - 3, 1)
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(X.T @ X)
    return coef, np.sqrt(np.maximum(np.diag(cov), 0.0)), \
        math.sqrt(float(resid @ resid) / len(ns))


def growth_rate(series, min_points=4, drop_fraction=0.25):
    """Growth rate of a fiber series with uncertainty.

    Uses the nonzero entries, drops the leading ``drop_fraction`` as
    transient, and cross-checks the slope against the tail half; the
    reported sigma dominates both the regression stderr and that
    sensitivity. Needs at least ``min_points`` nonzero terms.
    """
    finite = np.isfinite(series.log_values)
    ns = series.lengths[finite].astype(float)
    ys = series.log_values[finite]
    if len(ns) < min_points:
        raise NumericError(
            f"growth fit needs >= {min_points} nonzero partition values, "
            f"got {len(ns)}")
    start = int(len(ns) * drop_fraction)
    if len(ns) - start < min_points:
        start = len(ns) - min_points
    ns_fit, ys_fit = ns[start:], ys[start:]
    coef, err, rms = _poly_corrected_fit(ns_fit, ys_fit)
    lam, gamma = float(coef[1]), float(-coef[2])
    lam_err, gamma_err = float(err[1]), float(err[2])
    half = len(ns_fit) // 2
    if len(ns_fit) - half >= min_points:
        coef2, _, _ = _poly_corrected_fit(ns_fit[half:], ys_fit[half:])
        lam_err = max(lam_err, abs(float(coef2[1]) - lam))
        gamma_err = max(gamma_err, abs(float(-coef2[2]) - gamma))
    # sanity flag: local slopes settle monotonically in a clean tail
    local = np.diff(ys_fit) / np.diff(ns_fit)
    inc = np.diff(local)
    monotone = bool((inc >= -1e-9).all() or (inc <= 1e-9).all())
    return GrowthFit(lam, lam_err, gamma, gamma_err, len(ns_fit),
                     (int(ns_fit[0]), int(ns_fit[-1])), rms, monotone)


def restricted_pressure(pot, quotient, n_max=40, method="auto", tol=1e-13):
    """Dispatch: exact lifted eigenvalue for finite quotients, fiber DP
    plus growth fit otherwise (or when forced with method="extrapolated")."""
    if method not in ("auto", "exact", "extrapolated"):
        raise ValidationError(f"unknown method {method!r}")
    if method in ("auto", "exact") and isinstance(quotient, FiniteQuotient):
        return restricted_pressure_exact(pot, quotient, tol)
    if method == "exact":
        raise ValidationError(
            "exact restricted pressure needs a finite quotient")
    series = fiber_partition(pot, quotient, n_max)
    fit = growth_rate(series)
    return PressureResult(fit.lam, fit.sigma, "extrapolated", fit.rms,
                          {"gamma": fit.gamma, "gamma_sigma": fit.gamma_sigma,
                           "n_points": fit.n_points, "window": fit.window,
                           "n_max": n_max, "period": series.period})


def partition_sum_matrix(pot, n):
    """Exact Z_n = sum over Sigma^n of exp(S_w f) via matrix powers:
    interior window weights accumulated by the transfer matrix, boundary
    completions added at readout (exactly as the fiber DP does)."""
    tm = TransferMatrix(pot)
    m = tm.m
    if n < m:
        raise ValidationError(f"need n >= window size {m}, got {n}")
    vec = tm.initial_vector()
    for _ in range(n - m):
        vec = tm.matrix.T @ vec
    windows, _ = window_states(pot.d, m)
    ebnd = np.exp([boundary_completion(pot, w[-(pot.depth - 1):])
                   if pot.depth > 1 else 0.0 for w in windows])
    return float(vec @ ebnd)
