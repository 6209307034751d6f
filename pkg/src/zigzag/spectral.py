"""Matrix prediction at desk scale: a greedy net of factor matrices, one
quadratic (Hilbert p=2) ZigZag sub-learner per net point, and multiplicative
weights aggregation with clipped predictions.

The hypothesis class is rank-r matrices with trace norm at most tau; inputs
are entry incidences X_t = e_i e_j', so every per-expert quantity reduces to
rank-one row updates of the projected sums S V and M V in R^(d x r).

Exact nets on the Frobenius sphere are exponential, so ``build_net`` grows a
greedy farthest-point net capped at ``max_size`` and reports the coverage
radius actually achieved.  One shared sign draw per round updates every
expert.  Multiplicative-weights losses use the clipped predictions (the
aggregation needs bounded losses); sub-learner gradients are taken at the
unclipped predictions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .losses import dloss_batch, loss, loss_batch
from .rng import rademacher, substream

__all__ = [
    "build_net",
    "NetCoverage",
    "mw_step",
    "entry_stats",
    "SpectralZigZag",
    "SpectralResult",
    "make_entry_stream",
    "trace_norm_comparator",
    "run_spectral",
]


@dataclass
class NetCoverage:
    size: int
    radius_requested: float
    radius_achieved: float

    @property
    def covered(self) -> bool:
        return self.radius_achieved <= self.radius_requested


def _sphere_sample(rng, count, d, r, tau):
    pts = rng.normal(size=(count, d, r))
    norms = np.sqrt(np.sum(pts**2, axis=(1, 2)))
    norms = np.where(norms == 0.0, 1.0, norms)
    return pts * (math.sqrt(tau) / norms)[:, np.newaxis, np.newaxis]


def build_net(
    d: int,
    r: int,
    tau: float,
    net_alpha: float,
    seed: int,
    max_size: int,
    pool_size: int | None = None,
    probe_count: int = 10_000,
) -> tuple[np.ndarray, NetCoverage]:
    """Greedy farthest-point net on the Frobenius sphere of radius sqrt(tau).

    Stops when either the pool is covered to ``net_alpha`` or ``max_size``
    points have been placed; the probe-estimated coverage radius is reported
    either way (an under-sized net is reported, not fatal).
    """
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    rng = substream(seed, "net")
    if pool_size is None:
        pool_size = min(8000, max(1000, 10 * max_size))
    pool = _sphere_sample(rng, pool_size, d, r, tau)
    net = [pool[0]]
    dists = np.sqrt(np.sum((pool - pool[0]) ** 2, axis=(1, 2)))
    while len(net) < max_size and dists.max() > net_alpha:
        pick = int(np.argmax(dists))
        net.append(pool[pick])
        dists = np.minimum(dists, np.sqrt(np.sum((pool - pool[pick]) ** 2, axis=(1, 2))))
    net_arr = np.stack(net)

    probes = _sphere_sample(rng, probe_count, d, r, tau)
    diffs = probes[:, np.newaxis, :, :] - net_arr[np.newaxis, :, :, :]
    min_dist = np.sqrt(np.sum(diffs**2, axis=(2, 3))).min(axis=1)
    coverage = NetCoverage(
        size=len(net),
        radius_requested=net_alpha,
        radius_achieved=float(min_dist.max()),
    )
    return net_arr, coverage


def mw_step(log_weights: np.ndarray, loss_vec: np.ndarray, gamma: float) -> np.ndarray:
    """One multiplicative-weights update in log space; returns new log
    weights normalized so the weights sum to one."""
    lw = np.asarray(log_weights, dtype=float) - gamma * np.asarray(loss_vec, dtype=float)
    lw = lw - lw.max()
    return lw - math.log(np.exp(lw).sum())


def entry_stats(entries) -> tuple[int, int]:
    """Max visit counts over rows and over columns."""
    rows = {}
    cols = {}
    for i, j in entries:
        rows[i] = rows.get(i, 0) + 1
        cols[j] = cols.get(j, 0) + 1
    return (max(rows.values(), default=0), max(cols.values(), default=0))


class SpectralZigZag:
    """Aggregated entry predictor.

    Per round t with entry (i, j) and label y:

    1. every expert v predicts f_v = -eta tau^2 (1-alpha)^(-1) <S V_v, X V_v>
       (the sigma-averaged derivative of its quadratic potential),
    2. an expert is sampled from the multiplicative weights and its clipped
       prediction is played,
    3. all experts incur the clipped loss for the weight update and absorb
       their own subgradient step with one shared fresh sign.
    """

    def __init__(
        self,
        d: int,
        r: int,
        tau: float,
        horizon: int,
        loss_name: str = "hinge",
        seed: int = 0,
        max_net: int = 500,
        eta: float | None = None,
        net_alpha: float | None = None,
    ):
        self.d = d
        self.r = r
        self.tau = float(tau)
        self.horizon = horizon
        self.loss_name = loss_name
        self.net_alpha = 1.0 / (horizon * tau) if net_alpha is None else float(net_alpha)
        self.experts, self.coverage = build_net(d, r, tau, self.net_alpha, seed, max_net)
        self.m = self.experts.shape[0]
        self.gamma = math.sqrt(math.log(self.m) / horizon)
        self.eta = 1.0 / (tau * math.sqrt(horizon)) if eta is None else float(eta)
        self.coef = self.eta * tau**2 / 2.0 / (1.0 - self.net_alpha)
        self.sv = np.zeros((self.m, d, r))
        self.mv = np.zeros((self.m, d, r))
        self.log_weights = np.full(self.m, -math.log(self.m))
        self.cum_mw_loss = np.zeros(self.m)
        self._choice_rng = substream(seed, "mw-choice")
        self._sign_rng = substream(seed, "signs")
        self.t = 0

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def predict_all(self, i: int, j: int) -> np.ndarray:
        inner = np.einsum("vk,vk->v", self.sv[:, i, :], self.experts[:, j, :])
        return -2.0 * self.coef * inner

    def certificate(self, i: int, j: int, grid=None, tol: float = 1e-8) -> tuple[float, int]:
        """Worst admissibility slack over experts and a grid of l' values,
        evaluated at the current state.  Returns (worst_slack, violations)."""
        if grid is None:
            grid = np.linspace(-1.0, 1.0, 41)
        grid = np.asarray(grid, dtype=float)
        f = self.predict_all(i, j)
        vj = self.experts[:, j, :]  # (m, r)
        s_row = self.sv[:, i, :]
        m_row = self.mv[:, i, :]
        s_tot = np.sum(self.sv**2, axis=(1, 2))
        m_tot = np.sum(self.mv**2, axis=(1, 2))
        rhs = self.coef * (s_tot - m_tot)
        g = grid[np.newaxis, :, np.newaxis]  # (1, grid, 1)
        s_new = s_row[:, np.newaxis, :] + g * vj[:, np.newaxis, :]
        m_plus = m_row[:, np.newaxis, :] + g * vj[:, np.newaxis, :]
        m_minus = m_row[:, np.newaxis, :] - g * vj[:, np.newaxis, :]
        s_norm2 = s_tot[:, np.newaxis] - np.sum(s_row**2, axis=1)[:, np.newaxis] + np.sum(s_new**2, axis=2)
        m_norm2 = (
            m_tot[:, np.newaxis]
            - np.sum(m_row**2, axis=1)[:, np.newaxis]
            + 0.5 * (np.sum(m_plus**2, axis=2) + np.sum(m_minus**2, axis=2))
        )
        lhs = f[:, np.newaxis] * grid[np.newaxis, :] + self.coef * (s_norm2 - m_norm2)
        slack = rhs[:, np.newaxis] - lhs
        return float(slack.min()), int(np.sum(slack < -tol))

    def round(self, i: int, j: int, y: float) -> dict:
        f = self.predict_all(i, j)
        clipped = np.clip(f, -1.0, 1.0)
        q = self.weights
        v = int(self._choice_rng.choice(self.m, p=q / q.sum()))
        yhat = float(clipped[v])
        mw_losses = loss_batch(self.loss_name, clipped, y)
        grads = dloss_batch(self.loss_name, f, y)
        eps = int(rademacher(self._sign_rng))
        self.log_weights = mw_step(self.log_weights, mw_losses, self.gamma)
        self.cum_mw_loss += mw_losses
        step = grads[:, np.newaxis] * self.experts[:, j, :]
        self.sv[:, i, :] += step
        self.mv[:, i, :] += eps * step
        self.t += 1
        return {
            "yhat": yhat,
            "expert": v,
            "eps": eps,
            "loss": loss(self.loss_name, yhat, y),
            "weight_sum": float(q.sum()),
        }


def make_entry_stream(kind: str, d: int, n: int, r: int, seed: int, entries=None):
    """Entry/label stream generators.

    - uniform: entries uniform over the grid, labels from the sign of a
      planted random rank-r matrix
    - row-spiky: all entries in row 0 (worst-case row counts)
    - file / explicit: caller-provided (i, j, y) triples
    """
    if kind in ("file", "explicit"):
        if entries is None:
            raise ValueError("explicit stream needs entries")
        return [(int(i), int(j), float(y)) for i, j, y in entries]
    rng = substream(seed, "entry-stream", kind)
    u = rng.normal(size=(d, r))
    v = rng.normal(size=(d, r))
    planted = u @ v.T
    out = []
    for _ in range(n):
        if kind == "uniform":
            i = int(rng.integers(0, d))
            j = int(rng.integers(0, d))
        elif kind == "row-spiky":
            i = 0
            j = int(rng.integers(0, d))
        else:
            raise ValueError(f"unknown stream kind {kind!r}")
        y = 1.0 if planted[i, j] >= 0.0 else -1.0
        out.append((i, j, y))
    return out


def _project_trace_ball(f: np.ndarray, tau: float, r: int) -> np.ndarray:
    u, s, vt = np.linalg.svd(f, full_matrices=False)
    s = np.maximum(s, 0.0)
    s[r:] = 0.0
    if s.sum() > tau:
        # project the kept singular values onto the simplex of radius tau
        top = s[:r]
        srt = np.sort(top)[::-1]
        css = np.cumsum(srt) - tau
        idx = np.arange(1, len(srt) + 1)
        cond = srt - css / idx > 0
        rho = idx[cond][-1]
        theta = css[rho - 1] / rho
        s[:r] = np.maximum(top - theta, 0.0)
    return (u * s) @ vt


def trace_norm_comparator(
    stream,
    d: int,
    r: int,
    tau: float,
    loss_name: str,
    iters: int = 400,
    step0: float = 0.5,
) -> tuple[float, np.ndarray]:
    """Best rank-r trace-norm-bounded matrix for the realized stream, found
    by projected subgradient descent; returns (best cumulative loss, F)."""
    entries = np.array([(i, j) for i, j, _ in stream], dtype=int)
    ys = np.array([y for _, _, y in stream])
    f = np.zeros((d, d))
    best_loss = float("inf")
    best_f = f.copy()
    for k in range(1, iters + 1):
        preds = f[entries[:, 0], entries[:, 1]]
        total = float(loss_batch(loss_name, preds, ys).sum())
        if total < best_loss:
            best_loss = total
            best_f = f.copy()
        grads = dloss_batch(loss_name, preds, ys)
        g = np.zeros((d, d))
        np.add.at(g, (entries[:, 0], entries[:, 1]), grads)
        f = _project_trace_ball(f - (step0 / math.sqrt(k)) * g, tau, r)
    preds = f[entries[:, 0], entries[:, 1]]
    total = float(loss_batch(loss_name, preds, ys).sum())
    if total < best_loss:
        best_loss = total
        best_f = f.copy()
    return best_loss, best_f


@dataclass
class SpectralResult:
    learner_loss: float
    best_expert_loss: float
    comparator_loss: float
    regret: float
    n_row: int
    n_col: int
    rate_ratio: float
    regret_rate_mid: float
    regret_rate_end: float
    coverage: NetCoverage
    cert_worst_slack: float
    cert_violations: int
    weight_drift: float
    rows: list = field(default_factory=list)


def run_spectral(
    d: int,
    r: int,
    tau: float,
    n: int,
    stream_kind: str = "uniform",
    loss_name: str = "hinge",
    seed: int = 0,
    max_net: int = 500,
    eta: float | None = None,
    entries=None,
    certify: bool = True,
) -> SpectralResult:
    """Full desk-scale run: stream, aggregation, certificates, comparators,
    and the rate ratio regret / (sqrt(r) d sqrt(max(N_row, N_col)))."""
    stream = make_entry_stream(stream_kind, d, n, r, seed, entries=entries)
    alg = SpectralZigZag(d, r, tau, horizon=len(stream), loss_name=loss_name, seed=seed, max_net=max_net, eta=eta)
    total = 0.0
    worst_slack = float("inf")
    violations = 0
    weight_drift = 0.0
    rows = []
    for t, (i, j, y) in enumerate(stream, start=1):
        if certify:
            slack, viol = alg.certificate(i, j)
            worst_slack = min(worst_slack, slack)
            violations += viol
        rec = alg.round(i, j, y)
        weight_drift = max(weight_drift, abs(rec["weight_sum"] - 1.0))
        total += rec["loss"]
        rows.append((t, i, j, rec["yhat"], y, rec["loss"], rec["expert"]))
    best_expert = float(alg.cum_mw_loss.min())
    comparator_loss, comparator_f = trace_norm_comparator(stream, d, r, tau, loss_name)
    comparator = min(comparator_loss, best_expert)
    regret = total - comparator
    n_row, n_col = entry_stats([(i, j) for i, j, _ in stream])
    denom = math.sqrt(r) * d * math.sqrt(max(n_row, n_col, 1))

    # average regret rate against the final comparator matrix at the halfway
    # point and at the end (the sublinearity witness)
    entries_arr = np.array([(i, j) for i, j, _ in stream], dtype=int)
    ys_arr = np.array([y for _, _, y in stream])
    comp_losses = loss_batch(loss_name, comparator_f[entries_arr[:, 0], entries_arr[:, 1]], ys_arr)
    learner_losses = np.array([row[5] for row in rows])
    cum_regret = np.cumsum(learner_losses - comp_losses)
    half = max(1, len(stream) // 2)
    rate_mid = float(cum_regret[half - 1] / half)
    rate_end = float(cum_regret[-1] / len(stream))

    return SpectralResult(
        learner_loss=total,
        best_expert_loss=best_expert,
        comparator_loss=comparator_loss,
        regret=regret,
        n_row=n_row,
        n_col=n_col,
        rate_ratio=regret / denom,
        regret_rate_mid=rate_mid,
        regret_rate_end=rate_end,
        coverage=alg.coverage,
        cert_worst_slack=worst_slack if certify else float("nan"),
        cert_violations=violations,
        weight_drift=weight_drift,
        rows=rows,
    )
