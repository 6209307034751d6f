"""Experiment orchestration: adversaries, the adaptive gradient baseline,
offline comparators, a brute-force minimax oracle for tiny games, and the
config-driven runner with fixed CSV/JSON output schemas.

All adversaries rescale raw draws onto the unit ball of the configured norm,
so streams always satisfy the protocol's boundedness contract; an optional
``normalize=False`` escape hatch exercises scale-free behavior.  Experiment
cells (seed by seed) run in a thread pool sized by the ``ZIGZAG_WORKERS``
environment variable and are merged in seed order, so outputs are
bit-identical regardless of scheduling.
"""

from __future__ import annotations

import json
import math
import os
import pathlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .burkholder import make_spec
from .learner import ZigZagLearner, run_episode, theorem_residual
from .linalg import GramTag, LpTag, NormTag, dual_ball_lmo, norm
from .losses import dloss_batch, loss, loss_batch
from .rademacher import rad_estimate, rad_exact
from .rng import substream
from .spectral import run_spectral
from .tuning import DoublingZigZag

__all__ = [
    "IIDGaussianX",
    "IIDRademacherCoordsX",
    "FixedStream",
    "LowRankStream",
    "SignFlip",
    "make_adversary",
    "AdaptiveGD",
    "offline_comparator",
    "brute_force_minimax",
    "rad_exact_scalar",
    "run_experiment",
    "write_outputs",
    "merge_reports",
    "SUMMARY_KEYS",
]

SUMMARY_KEYS = (
    "config",
    "regret",
    "benchmark_linearized",
    "comparator_fw",
    "rad_mean",
    "rad_se",
    "residual_mean",
    "residual_se",
    "phases",
)


# ---------------------------------------------------------------------------
# adversaries


def _unit(x, tag: NormTag, normalize: bool):
    if not normalize:
        return x
    n = tag.norm(x)
    return x / n if n > 0 else x


class IIDGaussianX:
    """Gaussian instances scaled onto the unit sphere of the configured
    norm; labels are fresh uniform signs."""

    def __init__(self, d: int, tag: NormTag, normalize: bool = True):
        self.d = d
        self.tag = tag
        self.normalize = normalize

    def next_x(self, t, rng):
        x = rng.normal(size=self.d)
        out = _unit(x, self.tag, self.normalize)
        return out if self.d > 1 else float(out[0])

    def next_y(self, t, x, yhat, rng):
        return float(rng.choice([-1.0, 1.0]))


class IIDRademacherCoordsX(IIDGaussianX):
    """Sign-vector instances scaled onto the unit sphere of the norm."""

    def next_x(self, t, rng):
        x = (rng.integers(0, 2, size=self.d) * 2 - 1).astype(float)
        out = _unit(x, self.tag, self.normalize)
        return out if self.d > 1 else float(out[0])


class LowRankStream(IIDGaussianX):
    """Instances drawn from a fixed random subspace of the given rank."""

    def __init__(self, d: int, rank: int, tag: NormTag, seed: int, normalize: bool = True):
        super().__init__(d, tag, normalize)
        self.basis = substream(seed, "low-rank-basis").normal(size=(d, rank))

    def next_x(self, t, rng):
        x = self.basis @ rng.normal(size=self.basis.shape[1])
        out = _unit(x, self.tag, self.normalize)
        return out if self.d > 1 else float(out[0])


class FixedStream:
    """Replay explicit arrays of instances and labels."""

    def __init__(self, xs, ys):
        self.xs = [np.asarray(x, dtype=float) for x in xs]
        self.ys = [float(y) for y in ys]
        if len(self.xs) != len(self.ys):
            raise ValueError("xs and ys must have equal length")

    def next_x(self, t, rng):
        x = self.xs[t - 1]
        return x if x.ndim else float(x)

    def next_y(self, t, x, yhat, rng):
        return self.ys[t - 1]


class SignFlip:
    """Label adversary y_t = -sign(yhat_t) with ties resolved to +1,
    wrapping any instance source."""

    def __init__(self, base):
        self.base = base

    def next_x(self, t, rng):
        return self.base.next_x(t, rng)

    def next_y(self, t, x, yhat, rng):
        return 1.0 if yhat == 0.0 else -float(np.sign(yhat))


def make_adversary(cfg: dict, d: int, tag: NormTag, seed: int):
    kind = cfg["kind"]
    normalize = bool(cfg.get("normalize", True))
    if kind == "iid-gaussian":
        return IIDGaussianX(d, tag, normalize)
    if kind == "iid-rademacher-coords":
        return IIDRademacherCoordsX(d, tag, normalize)
    if kind == "sign-flip":
        base_kind = cfg.get("base", "iid-gaussian")
        base = make_adversary({"kind": base_kind, "normalize": normalize}, d, tag, seed)
        return SignFlip(base)
    if kind == "low-rank-stream":
        return LowRankStream(d, int(cfg["rank"]), tag, seed, normalize)
    if kind == "fixed-file":
        if "path" in cfg:
            data = json.loads(pathlib.Path(cfg["path"]).read_text())
            return FixedStream(data["xs"], data["ys"])
        return FixedStream(cfg["xs"], cfg["ys"])
    raise ValueError(f"unknown adversary kind {kind!r}")


# ---------------------------------------------------------------------------
# baselines and comparators


class AdaptiveGD:
    """Online projected gradient descent on the Euclidean unit ball with the
    adaptive step D / sqrt(sum of squared gradient norms), D = diameter 2."""

    def __init__(self, d: int, diameter: float = 2.0):
        self.w = np.zeros(d)
        self.grad_sq = 0.0
        self.diameter = diameter

    def predict(self, x) -> float:
        return float(self.w @ np.asarray(x, dtype=float))

    def update(self, x, dloss_val: float) -> int:
        g = dloss_val * np.asarray(x, dtype=float)
        self.grad_sq += float(g @ g)
        if self.grad_sq > 0.0:
            self.w = self.w - (self.diameter / math.sqrt(self.grad_sq)) * g
            nrm = float(np.linalg.norm(self.w))
            if nrm > 1.0:
                self.w = self.w / nrm
        return 0


def _margins(w, xs_matrix, tag):
    if isinstance(tag, GramTag):
        return xs_matrix @ (tag.a @ w)
    return xs_matrix @ w


def _pairing(g, v, tag):
    if isinstance(tag, GramTag):
        return float(g @ tag.a @ v)
    return float(g @ v)


def offline_comparator(xs, ys, tag: NormTag, loss_name: str, iters: int = 500) -> dict:
    """Frank-Wolfe over the dual-norm unit ball for the best-in-class
    cumulative loss inf_w sum_t loss(<w, x_t>, y_t).

    Returns the best loss seen, the iterate, and the final duality gap.  An
    empty stream yields zero.
    """
    xs = [np.atleast_1d(np.asarray(x, dtype=float)) for x in xs]
    if not xs:
        return {"best_loss": 0.0, "w": None, "gap": 0.0}
    x_mat = np.stack(xs)
    ys = np.asarray(ys, dtype=float)
    w = np.zeros(x_mat.shape[1])
    best_loss = float(loss_batch(loss_name, _margins(w, x_mat, tag), ys).sum())
    best_w = w.copy()
    gap = float("inf")
    for k in range(iters):
        margins = _margins(w, x_mat, tag)
        total = float(loss_batch(loss_name, margins, ys).sum())
        if total < best_loss:
            best_loss = total
            best_w = w.copy()
        grads = dloss_batch(loss_name, margins, ys)
        g = grads @ x_mat
        s = dual_ball_lmo(g, tag)
        gap = _pairing(g, w - s, tag)
        step = 2.0 / (k + 2.0)
        w = (1.0 - step) * w + step * s
    total = float(loss_batch(loss_name, _margins(w, x_mat, tag), ys).sum())
    if total < best_loss:
        best_loss = total
        best_w = w.copy()
    return {"best_loss": best_loss, "w": best_w, "gap": gap}


def rad_exact_scalar(xs) -> float:
    """Exact E|sum eps_t x_t| for a scalar sequence."""
    return rad_exact(np.asarray(xs, dtype=float).reshape(-1, 1), LpTag(2.0))


def brute_force_minimax(xs, loss_name: str, grid_size: int = 41) -> float:
    """Exact minimax regret of the fixed-sequence game by backward induction.

    The learner picks yhat from a grid on [-1, 1], the adversary answers with
    y in {-1, +1}, and the terminal comparator inf over |w| <= 1 of the
    cumulative loss has a closed form because |x_t| <= 1 makes hinge and
    absolute losses linear in w y over the reachable range.
    """
    xs = [float(x) for x in xs]
    n = len(xs)
    if n > 4:
        raise ValueError("backward induction limited to n <= 4 rounds")
    if any(abs(x) > 1.0 + 1e-12 for x in xs):
        raise ValueError("instances must lie in [-1, 1]")
    if loss_name not in ("hinge", "absolute", "linear"):
        raise ValueError(f"unsupported loss {loss_name!r}")
    grid = np.linspace(-1.0, 1.0, grid_size)
    offset = float(n) if loss_name in ("hinge", "absolute") else 0.0

    def value(t: int, corr: float) -> float:
        if t == n:
            # -inf_w sum loss = |sum x_t y_t| - n for hinge/absolute, |.| for linear
            return abs(corr) - offset
        best = float("inf")
        for yh in grid:
            worst = max(loss(loss_name, yh, y) + value(t + 1, corr + xs[t] * y) for y in (-1.0, 1.0))
            best = min(best, worst)
        return best

    return value(0, 0.0)


# ---------------------------------------------------------------------------
# config-driven experiments


def _build_learner(config: dict, spec, seed: int):
    algorithm = config["algorithm"]
    if algorithm == "zigzag":
        eta = config.get("eta") or 1.0
        return ZigZagLearner(spec, eta, substream(seed, "learner"))
    if algorithm == "zigzag-doubling-realized":
        return DoublingZigZag(spec, "realized", seed, eta0=config.get("eta0"))
    if algorithm == "zigzag-doubling-expected":
        return DoublingZigZag(spec, "expected", seed, eta0=config.get("eta0"), mc_paths=int(config.get("mc_paths", 500)))
    if algorithm == "adaptive-gd":
        return AdaptiveGD(config["d"])
    raise ValueError(f"unknown algorithm {config['algorithm']!r}")


def _episode_dim(spec) -> int:
    return spec.point_shape[0] if spec.point_shape else 1


def _run_cell(config: dict, seed: int) -> dict:
    spec = make_spec(config["spec"]) if config.get("spec") else None
    loss_name = config.get("loss", "hinge")
    n = int(config["n"])
    if config["algorithm"] == "adaptive-gd":
        tag = LpTag(2.0)
        d = int(config["d"])
    else:
        tag = spec.tag
        d = _episode_dim(spec)
    adversary = make_adversary(config["adversary"], d, tag, seed)
    learner = _build_learner(config, spec, seed)
    cert_grid = np.linspace(-1, 1, 41) if config.get("certify") else None
    trace = run_episode(learner, loss_name, adversary, n, seed, cert_grid=cert_grid)

    xs_for_fw = [np.atleast_1d(x) for x in trace.xs]
    fw = offline_comparator(xs_for_fw, trace.y, tag, loss_name, iters=int(config.get("fw_iters", 500)))
    total_loss = float(trace.cum_loss[-1]) if trace.n else 0.0
    regret = total_loss - fw["best_loss"]

    increments = np.array([d_ * x for d_, x in zip(trace.dloss, xs_for_fw)]) if trace.n else np.zeros((0, d))
    k = int(config.get("rad_samples", 1000))
    rad_mean, rad_se = rad_estimate(increments, tag, k, seed=seed) if trace.n else (0.0, 0.0)

    summary = {
        "seed": seed,
        "regret": regret,
        "total_loss": total_loss,
        "comparator_fw": fw["best_loss"],
        "fw_gap": fw["gap"],
        "rad_mean": rad_mean,
        "rad_se": rad_se,
        "phases": [],
        "benchmark_linearized": None,
        "residual": None,
        "cert_worst_slack": float(trace.cert_worst_slack.min()) if trace.cert_worst_slack is not None and trace.n else None,
        # companion to the no-normalize escape hatch: scale-free runs report
        # how large the instances actually got
        "max_x_norm": float(max((tag.norm(x) for x in xs_for_fw), default=0.0)),
    }
    if isinstance(learner, ZigZagLearner):
        res = theorem_residual(trace, spec, learner.eta)
        summary["benchmark_linearized"] = res["benchmark_linearized"]
        summary["residual"] = res["residual"]
    elif isinstance(learner, DoublingZigZag):
        res = theorem_residual(trace, spec, learner.eta)
        summary["benchmark_linearized"] = res["benchmark_linearized"]
        summary["phases"] = [
            {
                "index": rec.index,
                "start": rec.start,
                "end": rec.end,
                "eta": rec.eta,
                "threshold": rec.threshold,
                "phi_full": rec.phi_full,
                "phi_minus_last": rec.phi_minus_last,
                "final": rec.final,
            }
            for rec in learner.finish()
        ]
    else:
        steps = np.array([d_ * np.atleast_1d(x) for d_, x in zip(trace.dloss, xs_for_fw)]) if trace.n else np.zeros((0, d))
        summary["benchmark_linearized"] = float(tag.norm(steps.sum(axis=0))) if trace.n else 0.0
    trace.summary = summary
    return {**summary, "trace_csv": trace.to_csv()}


def _spectral_summary(config: dict) -> dict:
    seeds = list(config.get("seeds", [0]))
    cells = []
    for seed in seeds:
        res = run_spectral(
            d=int(config["d"]),
            r=int(config["r"]),
            tau=float(config["tau"]),
            n=int(config["n"]),
            stream_kind=config.get("entry_distribution", "uniform"),
            loss_name=config.get("loss", "hinge"),
            seed=seed,
            max_net=int(config.get("net_size", 500)),
            eta=config.get("eta"),
        )
        cells.append(res)
    summary = {
        "config": config,
        "regret": [c.regret for c in cells],
        "benchmark_linearized": [None for _ in cells],
        "comparator_fw": [c.comparator_loss for c in cells],
        "rad_mean": [None for _ in cells],
        "rad_se": [None for _ in cells],
        "residual_mean": None,
        "residual_se": None,
        "phases": [[] for _ in cells],
    }
    # spectral-specific detail goes to a sidecar file so summary.json keeps
    # the fixed key set
    summary["_spectral_details"] = [
        {
            "seed": seed,
            "learner_loss": c.learner_loss,
            "best_expert_loss": c.best_expert_loss,
            "n_row": c.n_row,
            "n_col": c.n_col,
            "rate_ratio": c.rate_ratio,
            "regret_rate_mid": c.regret_rate_mid,
            "regret_rate_end": c.regret_rate_end,
            "net_size": c.coverage.size,
            "net_radius_achieved": c.coverage.radius_achieved,
            "cert_worst_slack": c.cert_worst_slack,
            "cert_violations": c.cert_violations,
        }
        for seed, c in zip(seeds, cells)
    ]
    return summary


def run_experiment(config: dict) -> dict:
    """Run every (seed) cell of a config and assemble the fixed-schema
    summary.  Cells execute in a thread pool (ZIGZAG_WORKERS, default 1) and
    are merged in seed order for reproducibility."""
    if config.get("algorithm") == "spectral":
        return _spectral_summary(config)
    seeds = list(config.get("seeds", []))
    workers = int(os.environ.get("ZIGZAG_WORKERS", "1"))
    if seeds and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(lambda s: _run_cell(config, s), seeds))
    else:
        cells = [_run_cell(config, s) for s in seeds]
    residuals = [c["residual"] for c in cells if c["residual"] is not None]
    summary = {
        "config": config,
        "regret": [c["regret"] for c in cells],
        "benchmark_linearized": [c["benchmark_linearized"] for c in cells],
        "comparator_fw": [c["comparator_fw"] for c in cells],
        "rad_mean": [c["rad_mean"] for c in cells],
        "rad_se": [c["rad_se"] for c in cells],
        "residual_mean": float(np.mean(residuals)) if residuals else None,
        "residual_se": float(np.std(residuals, ddof=1) / math.sqrt(len(residuals))) if len(residuals) > 1 else None,
        "phases": [c["phases"] for c in cells],
    }
    summary["_cells"] = cells  # traces for writers; stripped from summary.json
    return summary


def write_outputs(summary: dict, out_dir) -> list[str]:
    """Write per-seed trace CSVs and the fixed-schema summary.json; returns
    the written paths."""
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    cells = summary.get("_cells", [])
    for cell in cells:
        path = out / f"episode_seed{cell['seed']}.csv"
        path.write_text(cell["trace_csv"])
        written.append(str(path))
    if "_spectral_details" in summary:
        path = out / "spectral.json"
        path.write_text(json.dumps(summary["_spectral_details"], indent=2, sort_keys=True))
        written.append(str(path))
    clean = {k: summary[k] for k in summary if not k.startswith("_")}
    path = out / "summary.json"
    path.write_text(json.dumps(clean, indent=2, sort_keys=True))
    written.append(str(path))
    return written


def merge_reports(directory) -> dict:
    """Scan a directory tree for summary.json files and digest them,
    including the headline regret / Rademacher-estimate ratio and, for
    doubling runs, the empirical regret / (beta^2 log^2 n * estimate) rate
    ratio."""
    root = pathlib.Path(directory)
    digests = []
    for path in sorted(root.rglob("summary.json")):
        data = json.loads(path.read_text())
        config = data.get("config", {})
        ratios = []
        for reg, rad in zip(data.get("regret", []), data.get("rad_mean", [])):
            if rad:
                ratios.append(reg / rad)
        digest = {
            "path": str(path),
            "algorithm": config.get("algorithm"),
            "regret": data.get("regret"),
            "rad_mean": data.get("rad_mean"),
            "regret_to_rad_ratio": ratios,
            "residual_mean": data.get("residual_mean"),
        }
        if any(data.get("phases", [])) and config.get("spec") and config.get("n"):
            beta = make_spec(config["spec"]).beta
            scale = beta**2 * math.log(max(int(config["n"]), 2)) ** 2
            digest["doubling_rate_ratio"] = [r / scale for r in ratios]
        digests.append(digest)
    return {"runs": digests}
