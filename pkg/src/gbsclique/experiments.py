"""Scenario runners and the command line front end.

Seven canned experiment scenarios sweep the encoding knobs (loop strength,
rescaling, loss) or push sampler batches through the clique pipeline, and
write CSV tables plus a manifest that pins every input needed to reproduce
them byte for byte.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import __version__
from .clique import (
    SearchConfig,
    max_weight_clique_exact,
    save_search_results,
    success_rate,
)
from .encoding import EncodedExperiment, encode, max_singular_value
from .errors import ResourceGuardError, ValidationError
from .gaussian import (
    GaussianState,
    apply_loss,
    mean_photon_budget,
    pure_state_from_encoding,
)
from .graph import Graph, clique_weight, erdos_renyi, is_clique, load_graph, plant_clique
from .probability import max_clique_prob, shannon_entropy, subset_distribution
from .samplers import (
    exact_sampler,
    load_batch,
    oh_sampler,
    photon_number_law,
    save_batch,
    uniform_sampler,
    window_law,
)

THREADS_ENV = "GBSCLIQUE_THREADS"
# Rough flop ceiling for one scenario's hafnian work; a full 16-mode pure
# window table costs about 1e9 on this estimator, a 12-mode lossy one 2.5e10.
DEFAULT_HAFNIAN_BUDGET = 2e11

SCENARIO_NAMES = (
    "landscape",
    "improvement",
    "loss-prob",
    "loss-success",
    "success-rate",
    "entropy",
    "scaling",
)

_WILSON_Z = 1.959963984540054  # two-sided 95%


# ---------------------------------------------------------------------------
# scenario configuration


@dataclass(frozen=True)
class Scenario:
    """Full configuration of one experiment run.

    Grids are strictly increasing tuples.  lambda grids hold the target top
    singular value of the rescaled kernel (0 < lambda < 1); gamma grids hold
    loop strengths before the diagonal rescaling; eta grids hold per-mode
    transmissions.  n_sqz / n_disp are mean-photon budgets used by the
    sampling scenarios to normalize the encoding.
    """

    name: str
    graph: str | None = None
    target: tuple[int, ...] | None = None
    seed: int = 7
    out_dir: str = "."
    threads: int = 1
    gamma_grid: tuple[float, ...] = tuple(np.linspace(0.0, 1.2, 13))
    lambda_grid: tuple[float, ...] = tuple(np.linspace(0.095, 0.95, 10))
    eta_grid: tuple[float, ...] = (0.3, 0.5, 0.7, 0.9, 1.0)
    lambda_fixed: float = 0.3
    lambda_scaling: float = 0.5
    gamma_hi: float = 2.0
    n_samples: int = 500
    n_iter: int = 7
    repeats: int = 20
    n_sqz: float = 2.34
    n_disp: float = 10.0
    subset_size: int | None = None
    points: tuple[tuple[int, int], ...] = ((8, 4), (12, 6), (16, 8))
    graphs_per_point: int = 10
    edge_prob: float = 0.2
    weight_priority: bool = True
    hafnian_budget: float = DEFAULT_HAFNIAN_BUDGET

    def __post_init__(self) -> None:
        if self.name not in SCENARIO_NAMES:
            raise ValidationError(f"unknown scenario {self.name!r}")
        for label, grid in (
            ("gamma_grid", self.gamma_grid),
            ("lambda_grid", self.lambda_grid),
            ("eta_grid", self.eta_grid),
        ):
            if len(grid) == 0:
                raise ValidationError(f"{label} must be nonempty")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ValidationError(f"{label} must be strictly increasing")
        if any(g < 0 for g in self.gamma_grid):
            raise ValidationError("gamma_grid values must be >= 0")
        if any(not 0 < l < 1 for l in self.lambda_grid):
            raise ValidationError("lambda_grid values must be in (0, 1)")
        if any(not 0 < e <= 1 for e in self.eta_grid):
            raise ValidationError("eta_grid values must be in (0, 1]")
        if not 0 < self.lambda_fixed < 1 or not 0 < self.lambda_scaling < 1:
            raise ValidationError("fixed lambda values must be in (0, 1)")
        for label, value in (
            ("n_samples", self.n_samples),
            ("repeats", self.repeats),
            ("graphs_per_point", self.graphs_per_point),
        ):
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ValidationError(f"{label} must be a positive integer")
        if isinstance(self.n_iter, bool) or not isinstance(self.n_iter, int) or self.n_iter < 0:
            raise ValidationError("n_iter must be a non-negative integer")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise ValidationError("seed must be an integer")
        if self.threads < 1:
            raise ValidationError("threads must be >= 1")
        if self.n_sqz <= 0 or self.n_disp < 0:
            raise ValidationError("budgets need n_sqz > 0 and n_disp >= 0")
        if self.gamma_hi <= 0:
            raise ValidationError("gamma_hi must be positive")
        if not 0 <= self.edge_prob <= 1:
            raise ValidationError(f"edge probability {self.edge_prob} outside [0, 1]")
        if self.hafnian_budget <= 0:
            raise ValidationError("hafnian_budget must be positive")
        for point in self.points:
            if len(point) != 2 or not 1 <= point[1] <= point[0]:
                raise ValidationError(f"bad scaling point {point!r}")
        if self.subset_size is not None and self.subset_size < 1:
            raise ValidationError("subset_size must be >= 1")


def resolve_threads(value: int | None) -> int:
    """--threads flag wins; the env var only fills in when the flag is absent."""
    if value is None:
        raw = os.environ.get(THREADS_ENV, "").strip()
        if not raw:
            return 1
        try:
            value = int(raw)
        except ValueError:
            raise ValidationError(f"{THREADS_ENV}={raw!r} is not an integer") from None
    if value < 1:
        raise ValidationError("thread count must be >= 1")
    return value


# ---------------------------------------------------------------------------
# budget normalization


def lambda_max_for_squeezing(g: Graph, n_sqz: float) -> float:
    """Top kernel singular value that spends exactly n_sqz photons in squeezing.

    The per-mode squeezing follows the adjacency singular value profile, so
    the total sinh^2 r is strictly increasing in lambda_max and a bisection
    on (0, 1) pins it.
    """
    if n_sqz <= 0:
        raise ValidationError("n_sqz must be positive")
    svals = np.linalg.svd(g.adjacency, compute_uv=False)
    if svals.max() <= 0:
        raise ValidationError("graph has no edges, nothing to squeeze")
    shat = svals / svals.max()

    def total(lam: float) -> float:
        t = lam * shat
        return float(np.sum(t * t / (1.0 - t * t)))

    lo, hi = 1e-12, 1.0 - 1e-12
    if total(hi) < n_sqz:
        raise ValidationError(f"n_sqz={n_sqz} unreachable below the singularity")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if total(mid) > n_sqz:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def gamma_for_displacement(exp: EncodedExperiment, n_disp: float) -> float:
    """Uniform loop strength that spends exactly n_disp photons in displacement.

    The displaced mean scales linearly in gamma, so the norm of the response
    to a unit loop strength gives the answer in closed form.
    """
    if n_disp < 0:
        raise ValidationError("n_disp must be >= 0")
    if n_disp == 0:
        return 0.0
    m = exp.B.shape[0]
    unit = np.linalg.solve(np.eye(m) - exp.B, exp.omega_diag)
    norm = float(np.linalg.norm(unit))
    if norm <= 0 or not np.isfinite(norm):
        raise ValidationError("displacement response is singular at this rescaling")
    return float(np.sqrt(n_disp) / norm)


def _dgbs_state(g: Graph, lam: float, gamma: float) -> GaussianState:
    exp = encode(g, lam, gamma=gamma) if gamma > 0 else encode(g, lam)
    return pure_state_from_encoding(exp)


# ---------------------------------------------------------------------------
# gamma optimization


def optimal_gamma(
    objective: Callable[[float], float],
    hi: float,
    coarse: int = 21,
    xatol: float = 1e-4,
) -> tuple[float, float]:
    """Maximize objective(gamma) over [0, hi]: coarse grid, then refinement.

    Returns (gamma_star, value).  gamma = 0 is always a candidate, so the
    reported value never drops below the undisplaced baseline.
    """
    if hi <= 0:
        raise ValidationError("optimization bracket must have hi > 0")
    grid = np.linspace(0.0, hi, coarse)
    values = np.array([objective(float(x)) for x in grid])
    best = int(np.argmax(values))
    lo_edge = float(grid[max(best - 1, 0)])
    hi_edge = float(grid[min(best + 1, coarse - 1)])
    result = minimize_scalar(
        lambda x: -objective(float(x)),
        bounds=(lo_edge, hi_edge),
        method="bounded",
        options={"xatol": xatol},
    )
    if -float(result.fun) > float(values[best]):
        return float(result.x), -float(result.fun)
    return float(grid[best]), float(values[best])


# ---------------------------------------------------------------------------
# shared plumbing


def _certified_target(g: Graph, target: Sequence[int] | None) -> tuple[int, ...]:
    """Resolve and certify the scenario's max clique via the exact solver."""
    best, best_weight = max_weight_clique_exact(g)
    if target is None:
        return best
    candidate = tuple(sorted(int(i) for i in target))
    if not is_clique(g, candidate):
        raise ValidationError(f"uncertified target: {candidate} is not a clique")
    if not math.isclose(clique_weight(g, candidate), best_weight, rel_tol=1e-9, abs_tol=1e-12):
        raise ValidationError(
            f"uncertified target: weight {clique_weight(g, candidate)} "
            f"differs from the exact maximum {best_weight}"
        )
    return candidate


def _lhaf_flops(dim: int) -> float:
    # Power-trace evaluation: 2^(dim/2) subset passes, quartic work each.
    return float(2 ** math.ceil(dim / 2)) * float(max(dim, 1)) ** 4


def _window_flops(m: int, k_min: int, k_max: int, mixed: bool) -> float:
    total = 0.0
    for k in range(k_min, k_max + 1):
        dim = 2 * k if mixed else k
        total += math.comb(m, k) * _lhaf_flops(dim)
    return total


def _check_hafnian_budget(estimate: float, budget: float) -> None:
    if estimate > budget:
        raise ResourceGuardError(
            f"estimated hafnian work {estimate:.3g} flops exceeds the "
            f"scenario budget {budget:.3g}"
        )


def _pool_map(fn: Callable, items: Sequence, threads: int) -> list:
    """Apply fn over items, preserving order; threads=1 stays sequential."""
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _child_seeds(base: int, key: tuple[int, ...], count: int) -> list[int]:
    """Independent integer seeds for one grid point, stable across runs."""
    ss = np.random.SeedSequence(entropy=int(base), spawn_key=tuple(int(k) for k in key))
    return [int(x) for x in ss.generate_state(count, np.uint64)]


def _wilson_interval(successes: int, trials: int) -> tuple[float, float]:
    if trials <= 0:
        raise ValidationError("confidence interval needs at least one trial")
    z2 = _WILSON_Z * _WILSON_Z
    phat = successes / trials
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2 * trials)) / denom
    half = (
        _WILSON_Z
        * math.sqrt(phat * (1 - phat) / trials + z2 / (4 * trials * trials))
        / denom
    )
    return max(0.0, center - half), min(1.0, center + half)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def write_csv(path: str | Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    """Semicolon CSV with 17-significant-digit floats, newline-terminated."""
    lines = [";".join(header)]
    lines.extend(";".join(_fmt(v) for v in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _versions() -> dict[str, str]:
    import platform

    import numba
    import scipy

    return {
        "gbsclique": __version__,
        "numba": numba.__version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
        "scipy": scipy.__version__,
    }


def _jsonable(value):
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value


def write_manifest(
    out_dir: str | Path,
    command: str,
    config: dict,
    outputs: Sequence[str],
) -> Path:
    """Reproduction record: full config, library versions, output names."""
    manifest = {
        "command": command,
        "config": {k: _jsonable(v) for k, v in sorted(config.items())},
        "outputs": sorted(outputs),
        "seed": config.get("seed"),
        "versions": _versions(),
    }
    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _scenario_graph(sc: Scenario) -> Graph:
    if sc.graph is None:
        raise ValidationError(f"scenario {sc.name!r} needs a graph file (--graph)")
    path = Path(sc.graph)
    if not path.exists():
        raise ValidationError(f"graph file not found: {path}")
    return load_graph(path)


# ---------------------------------------------------------------------------
# scenario runners


def run_landscape(sc: Scenario) -> dict:
    """Max-clique probability over the (gamma, rescaling) grid."""
    g = _scenario_graph(sc)
    clique = _certified_target(g, sc.target)
    k = len(clique)
    # c is the linear kernel scale B = cA, so c_max = 1/s_max(A) and the
    # lambda grid maps to c = lambda / s_max.
    s_max = max_singular_value(g.adjacency)
    cells = [(lam, gam) for lam in sc.lambda_grid for gam in sc.gamma_grid]
    _check_hafnian_budget(len(cells) * _lhaf_flops(k), sc.hafnian_budget)

    def cell(point: tuple[float, float]) -> tuple[float, float, float]:
        lam, gam = point
        exp = encode(g, lam, gamma=gam) if gam > 0 else encode(g, lam)
        p = max_clique_prob(pure_state_from_encoding(exp), clique)
        return gam, lam / s_max, p

    rows = _pool_map(cell, cells, sc.threads)
    return {"header": ("gamma", "c", "p_mc"), "rows": rows, "target": clique}


def run_improvement(sc: Scenario) -> dict:
    """Best-gamma gain over the undisplaced encoding, per lambda_max."""
    g = _scenario_graph(sc)
    clique = _certified_target(g, sc.target)
    k = len(clique)
    per_point = 25 + 40  # coarse grid plus refinement evaluations, roughly
    _check_hafnian_budget(len(sc.lambda_grid) * per_point * _lhaf_flops(k), sc.hafnian_budget)
    skipped: list[float] = []

    def point(lam: float):
        p0 = max_clique_prob(_dgbs_state(g, lam, 0.0), clique)
        if p0 < 1e-280:
            return None
        gstar, pstar = optimal_gamma(
            lambda gam: max_clique_prob(_dgbs_state(g, lam, gam), clique), sc.gamma_hi
        )
        return lam, gstar, p0, pstar, pstar / p0

    rows = []
    for result, lam in zip(_pool_map(point, list(sc.lambda_grid), sc.threads), sc.lambda_grid):
        if result is None:
            skipped.append(lam)  # baseline underflowed; gain is undefined there
        else:
            rows.append(result)
    return {
        "header": ("lambda_max", "gamma_star", "p_gbs", "p_dgbs", "improvement"),
        "rows": rows,
        "target": clique,
        "skipped_lambda": tuple(skipped),
    }


def run_loss_prob(sc: Scenario) -> dict:
    """Raw max-clique probability under uniform loss, per (eta, gamma)."""
    g = _scenario_graph(sc)
    clique = _certified_target(g, sc.target)
    k = len(clique)
    cells = [(eta, gam) for eta in sc.eta_grid for gam in sc.gamma_grid]
    _check_hafnian_budget(len(cells) * _lhaf_flops(2 * k), sc.hafnian_budget)

    def cell(point: tuple[float, float]) -> tuple[float, float, float]:
        eta, gam = point
        state = _dgbs_state(g, sc.lambda_fixed, gam)
        if eta < 1:
            state = apply_loss(state, eta)
        return eta, gam, max_clique_prob(state, clique)

    rows = _pool_map(cell, cells, sc.threads)
    return {"header": ("eta", "gamma", "p_mc"), "rows": rows, "target": clique}


def _normalized_states(sc: Scenario, g: Graph) -> tuple[EncodedExperiment, GaussianState, GaussianState]:
    """GBS and D-GBS states spending exactly the scenario photon budgets."""
    lam = lambda_max_for_squeezing(g, sc.n_sqz)
    exp = encode(g, lam)
    gamma = gamma_for_displacement(exp, sc.n_disp)
    dgbs = _dgbs_state(g, lam, gamma)
    gbs = pure_state_from_encoding(exp)
    return exp, gbs, dgbs


def _pipeline_rate(
    g: Graph,
    batch,
    clique: tuple[int, ...],
    sc: Scenario,
    search_seed: int,
) -> tuple[float, int]:
    cfg = SearchConfig(n_iter=sc.n_iter, seed=search_seed, weight_priority=sc.weight_priority)
    rate, rows = success_rate(g, batch, clique, cfg)
    return rate, sum(r.success for r in rows)


def run_success(sc: Scenario) -> dict:
    """Success-rate comparison of the four samplers at fixed photon budgets."""
    g = _scenario_graph(sc)
    clique = _certified_target(g, sc.target)
    m = g.node_count
    _check_hafnian_budget(2 * _window_flops(m, 0, m, mixed=False), sc.hafnian_budget)
    exp, gbs, dgbs = _normalized_states(sc, g)
    budget = mean_photon_budget(dgbs)
    window_law(dgbs, 0, m)  # warm the cached tables before any thread fan-out
    window_law(gbs, 0, m)
    size_law = photon_number_law(gbs)

    t0 = time.perf_counter()
    samplers = ("dgbs", "gbs", "uniform", "oh")

    def draw(name: str, seed: int):
        if name == "dgbs":
            return exact_sampler(dgbs, 0, m, sc.n_samples, seed=seed)
        if name == "gbs":
            return exact_sampler(gbs, 0, m, sc.n_samples, seed=seed)
        if name == "uniform":
            return uniform_sampler(g, size_law, sc.n_samples, seed=seed)
        return oh_sampler(g, exp, None, sc.n_samples, seed=seed)

    def repeat(item: tuple[int, int]) -> tuple[float, int]:
        si, r = item
        # One seed pair per repeat, shared by all samplers: comparisons are
        # paired, and with gamma = 0 the dgbs and gbs rows coincide exactly.
        sample_seed, search_seed = _child_seeds(sc.seed, (r,), 2)
        batch = draw(samplers[si], sample_seed)
        return _pipeline_rate(g, batch, clique, sc, search_seed)

    items = [(si, r) for si in range(len(samplers)) for r in range(sc.repeats)]
    outcomes = _pool_map(repeat, items, sc.threads)
    rows = []
    report: dict[str, dict] = {}
    for si, name in enumerate(samplers):
        chunk = outcomes[si * sc.repeats : (si + 1) * sc.repeats]
        successes = sum(s for _, s in chunk)
        trials = sc.repeats * sc.n_samples
        rate = successes / trials
        ci_low, ci_high = _wilson_interval(successes, trials)
        rows.append(
            (name, rate, ci_low, ci_high, sc.repeats, sc.n_samples, budget.n_sqz, budget.n_disp)
        )
        report[name] = {
            "rate": rate,
            "ci": (ci_low, ci_high),
            "per_repeat": [r for r, _ in chunk],
        }
    return {
        "header": ("sampler", "rate", "ci_low", "ci_high", "repeats", "n_samples", "n_sqz", "n_disp"),
        "rows": rows,
        "target": clique,
        "report": report,
        "budgets": {"n_sqz": budget.n_sqz, "n_disp": budget.n_disp},
        "runtime_s": time.perf_counter() - t0,
    }


def run_loss_success(sc: Scenario) -> dict:
    """D-GBS success rate as the same budgeted state loses photons."""
    g = _scenario_graph(sc)
    clique = _certified_target(g, sc.target)
    m = g.node_count
    mixed_points = sum(1 for eta in sc.eta_grid if eta < 1)
    pure_points = len(sc.eta_grid) - mixed_points
    estimate = mixed_points * _window_flops(m, 0, m, mixed=True)
    estimate += pure_points * _window_flops(m, 0, m, mixed=False)
    _check_hafnian_budget(estimate, sc.hafnian_budget)
    _, _, dgbs = _normalized_states(sc, g)
    budget = mean_photon_budget(dgbs)  # lossless budgets, by construction

    t0 = time.perf_counter()
    states = {}
    for eta in sc.eta_grid:
        state = apply_loss(dgbs, eta) if eta < 1 else dgbs
        window_law(state, 0, m)
        states[eta] = state

    def repeat(item: tuple[int, int]) -> tuple[float, int]:
        ei, r = item
        # Shared per-repeat seeds pair the loss levels against each other.
        sample_seed, search_seed = _child_seeds(sc.seed, (r,), 2)
        batch = exact_sampler(states[sc.eta_grid[ei]], 0, m, sc.n_samples, seed=sample_seed)
        return _pipeline_rate(g, batch, clique, sc, search_seed)

    items = [(ei, r) for ei in range(len(sc.eta_grid)) for r in range(sc.repeats)]
    outcomes = _pool_map(repeat, items, sc.threads)
    rows = []
    report: dict[float, dict] = {}
    for ei, eta in enumerate(sc.eta_grid):
        chunk = outcomes[ei * sc.repeats : (ei + 1) * sc.repeats]
        successes = sum(s for _, s in chunk)
        trials = sc.repeats * sc.n_samples
        rate = successes / trials
        ci_low, ci_high = _wilson_interval(successes, trials)
        rows.append(
            (eta, "dgbs", rate, ci_low, ci_high, sc.repeats, sc.n_samples, budget.n_sqz, budget.n_disp)
        )
        report[eta] = {"rate": rate, "ci": (ci_low, ci_high), "per_repeat": [r for r, _ in chunk]}
    return {
        "header": (
            "eta", "sampler", "rate", "ci_low", "ci_high",
            "repeats", "n_samples", "n_sqz", "n_disp",
        ),
        "rows": rows,
        "target": clique,
        "report": report,
        "budgets": {"n_sqz": budget.n_sqz, "n_disp": budget.n_disp},
        "runtime_s": time.perf_counter() - t0,
    }


def run_entropy(sc: Scenario) -> dict:
    """Entropy of the size-k subset distribution as loop strength grows."""
    g = _scenario_graph(sc)
    clique = _certified_target(g, sc.target)
    k = sc.subset_size if sc.subset_size is not None else len(clique)
    m = g.node_count
    if k > m:
        raise ValidationError(f"subset_size {k} exceeds {m} nodes")
    _check_hafnian_budget(
        len(sc.gamma_grid) * math.comb(m, k) * _lhaf_flops(k), sc.hafnian_budget
    )

    def point(gam: float) -> tuple[float, float, float]:
        state = _dgbs_state(g, sc.lambda_scaling, gam)
        dist = subset_distribution(state, k, collision_free=True, renormalize=True)
        p_cond = dist.entries.get(clique, 0.0) if len(clique) == k else 0.0
        return gam, shannon_entropy(dist), p_cond

    rows = _pool_map(point, list(sc.gamma_grid), sc.threads)
    return {"header": ("gamma", "entropy", "p_mc_cond"), "rows": rows, "target": clique}


def _planted_instances(
    m: int, k: int, p: float, count: int, seed0: int
) -> list[tuple[Graph, tuple[int, ...]]]:
    """Deterministic certified planted-clique instances; uncertifiable seeds skipped."""
    out: list[tuple[Graph, tuple[int, ...]]] = []
    seed = seed0
    while len(out) < count:
        g, planted = plant_clique(erdos_renyi(m, p, seed=seed), k, seed=seed)
        best, _ = max_weight_clique_exact(g)
        if set(best) == set(planted):
            out.append((g, tuple(sorted(planted))))
        seed += 1
    return out


def run_scaling(sc: Scenario) -> dict:
    """Improvement and photon budgets across graph sizes at c = c_max/2."""
    for m, k in sc.points:
        if k % 2:
            # Without displacement an odd-size pattern has zero probability,
            # so the improvement quotient is undefined.
            raise ValidationError(f"clique size {k} must be even (point {m}:{k})")
    per_graph = 25 + 40  # optimizer evaluations
    estimate = sum(
        sc.graphs_per_point * per_graph * _lhaf_flops(k) for _, k in sc.points
    )
    _check_hafnian_budget(estimate, sc.hafnian_budget)

    def point(item: tuple[int, tuple[int, int]]):
        idx, (m, k) = item
        instances = _planted_instances(
            m, k, sc.edge_prob, sc.graphs_per_point, seed0=sc.seed + 1000 * idx
        )
        samples = []
        for g, clique in instances:
            p0 = max_clique_prob(_dgbs_state(g, sc.lambda_scaling, 0.0), clique)
            gstar, pstar = optimal_gamma(
                lambda gam: max_clique_prob(_dgbs_state(g, sc.lambda_scaling, gam), clique),
                sc.gamma_hi,
            )
            exp = encode(g, sc.lambda_scaling, gamma=gstar) if gstar > 0 else encode(g, sc.lambda_scaling)
            b = mean_photon_budget(pure_state_from_encoding(exp))
            ratio = b.n_disp / b.n_sqz if b.n_sqz > 0 else math.inf
            samples.append(
                (pstar / p0, gstar, float(np.mean(exp.gamma_rescaled)), b.n_disp, b.n_sqz, ratio)
            )
        cols = np.array(samples).mean(axis=0)
        return (m, k, *map(float, cols))

    rows = _pool_map(point, list(enumerate(sc.points)), sc.threads)
    return {
        "header": (
            "nodes", "clique_size", "improvement", "gamma_star",
            "loop_strength", "n_disp", "n_sqz", "ratio",
        ),
        "rows": rows,
    }


RUNNERS: dict[str, Callable[[Scenario], dict]] = {
    "landscape": run_landscape,
    "improvement": run_improvement,
    "loss-prob": run_loss_prob,
    "loss-success": run_loss_success,
    "success-rate": run_success,
    "entropy": run_entropy,
    "scaling": run_scaling,
}


def run_scenario(sc: Scenario) -> dict:
    """Dispatch, write the CSV and manifest, return the runner's result."""
    result = RUNNERS[sc.name](sc)
    out_dir = Path(sc.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_name = f"{sc.name}.csv"
    write_csv(out_dir / csv_name, result["header"], result["rows"])
    config = dataclasses.asdict(sc)
    if "target" in result:
        config["resolved_target"] = list(result["target"])
    if result.get("skipped_lambda"):
        config["skipped_lambda"] = list(result["skipped_lambda"])
    write_manifest(out_dir, f"experiment {sc.name}", config, [csv_name])
    result["csv"] = str(out_dir / csv_name)
    return result


# ---------------------------------------------------------------------------
# command line interface


def _parse_subset(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        raise ValidationError(f"subset {text!r} is not a comma list of integers") from None


def _parse_grid(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        raise ValidationError(f"grid {text!r} is not a comma list of numbers") from None


def _parse_points(text: str) -> tuple[tuple[int, int], ...]:
    points = []
    try:
        for chunk in text.split(","):
            m, k = chunk.split(":")
            points.append((int(m), int(k)))
    except ValueError:
        raise ValidationError(f"points {text!r} must look like 8:4,12:6") from None
    return tuple(points)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", help="graph file (JSON or edge-list CSV)")
    common.add_argument("--seed", type=int, default=7, help="base RNG seed")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument(
        "--threads", type=int, default=None,
        help=f"worker threads (default: ${THREADS_ENV} or 1)",
    )

    parser = argparse.ArgumentParser(
        prog="gbsclique",
        description="Graph-encoded Gaussian boson sampling for max-clique search.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", parents=[common], help="print encoding summary")
    p.add_argument("--lambda-max", type=float, default=0.5)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--alpha", type=float, default=0.0)

    p = sub.add_parser("prob", parents=[common], help="probability of one subset")
    p.add_argument("--subset", required=True, help="comma list of node indices")
    p.add_argument("--lambda-max", type=float, default=0.5)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--eta", type=float, default=1.0)

    p = sub.add_parser("sample", parents=[common], help="draw a sample batch")
    p.add_argument("--sampler", choices=("dgbs", "gbs", "uniform", "oh"), default="dgbs")
    p.add_argument("--count", type=int, default=500)
    p.add_argument("--lambda-max", type=float, default=0.5)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--n-pairs", type=int, default=None)

    p = sub.add_parser("clique", parents=[common], help="run the search pipeline")
    p.add_argument("--samples", required=True, help="sample batch (JSONL)")
    p.add_argument("--target", default=None, help="comma list; defaults to exact max clique")
    p.add_argument("--n-iter", type=int, default=7)
    p.add_argument("--uniform-swap", action="store_true",
                   help="pick grow/swap candidates uniformly instead of by weight")

    p = sub.add_parser("experiment", parents=[common], help="run a canned scenario")
    p.add_argument("name", choices=SCENARIO_NAMES)
    p.add_argument("--target", default=None)
    p.add_argument("--gamma-grid", default=None)
    p.add_argument("--lambda-grid", default=None)
    p.add_argument("--eta-grid", default=None)
    p.add_argument("--lambda-fixed", type=float, default=None)
    p.add_argument("--lambda-scaling", type=float, default=None)
    p.add_argument("--gamma-hi", type=float, default=None)
    p.add_argument("--n-samples", type=int, default=None)
    p.add_argument("--n-iter", type=int, default=None)
    p.add_argument("--repeats", type=int, default=None)
    p.add_argument("--n-sqz", type=float, default=None)
    p.add_argument("--n-disp", type=float, default=None)
    p.add_argument("--subset-size", type=int, default=None)
    p.add_argument("--points", default=None, help="scaling sizes, e.g. 8:4,12:6,16:8")
    p.add_argument("--graphs-per-point", type=int, default=None)
    p.add_argument("--edge-prob", type=float, default=None)
    p.add_argument("--hafnian-budget", type=float, default=None)
    p.add_argument("--uniform-swap", action="store_true")
    return parser


def _graph_from_args(args) -> Graph:
    if not args.graph:
        raise ValidationError("a graph file is required (--graph)")
    path = Path(args.graph)
    if not path.exists():
        raise ValidationError(f"graph file not found: {path}")
    return load_graph(path)


def _encoded_from_args(args, g: Graph) -> EncodedExperiment:
    gamma = args.gamma if args.gamma > 0 else None
    return encode(g, args.lambda_max, alpha=getattr(args, "alpha", 0.0), gamma=gamma)


def _cmd_encode(args) -> int:
    g = _graph_from_args(args)
    exp = _encoded_from_args(args, g)
    state = pure_state_from_encoding(exp)
    b = mean_photon_budget(state)
    print(json.dumps({
        "alpha": exp.alpha,
        "c": exp.c,
        "gamma_rescaled": [float(x) for x in exp.gamma_rescaled],
        "lambda_max": float(max(exp.tanh_r)),
        "n_disp": b.n_disp,
        "n_sqz": b.n_sqz,
        "nodes": g.node_count,
        "omega_diag": [float(x) for x in exp.omega_diag],
        "tanh_r": [float(x) for x in exp.tanh_r],
    }, indent=2, sort_keys=True))
    return 0


def _cmd_prob(args) -> int:
    g = _graph_from_args(args)
    subset = _parse_subset(args.subset)
    if not 0 < args.eta <= 1:
        raise ValidationError(f"eta {args.eta} outside (0, 1]")
    state = pure_state_from_encoding(_encoded_from_args(args, g))
    if args.eta < 1:
        state = apply_loss(state, args.eta)
    print(json.dumps({
        "eta": args.eta,
        "gamma": args.gamma,
        "is_clique": is_clique(g, subset),
        "lambda_max": args.lambda_max,
        "p_raw": max_clique_prob(state, subset),
        "subset": list(subset),
    }, indent=2, sort_keys=True))
    return 0


def _cmd_sample(args) -> int:
    g = _graph_from_args(args)
    exp = _encoded_from_args(args, g)
    m = g.node_count
    if args.sampler in ("dgbs", "gbs"):
        state = pure_state_from_encoding(
            encode(g, args.lambda_max) if args.sampler == "gbs" else exp
        )
        if args.eta < 1:
            state = apply_loss(state, args.eta)
        batch = exact_sampler(state, 0, m, args.count, seed=args.seed)
    elif args.sampler == "uniform":
        state = pure_state_from_encoding(exp)
        if args.eta < 1:
            state = apply_loss(state, args.eta)
        batch = uniform_sampler(g, photon_number_law(state), args.count, seed=args.seed)
    else:
        batch = oh_sampler(g, exp, args.n_pairs, args.count, seed=args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "samples.jsonl"
    save_batch(batch, path)
    write_manifest(out_dir, "sample", {
        "count": args.count, "eta": args.eta, "gamma": args.gamma,
        "graph": args.graph, "lambda_max": args.lambda_max,
        "n_pairs": args.n_pairs, "sampler": args.sampler, "seed": args.seed,
    }, ["samples.jsonl"])
    print(json.dumps({"path": str(path), "samples": len(batch), "stats": batch.stats},
                     sort_keys=True))
    return 0


def _cmd_clique(args) -> int:
    g = _graph_from_args(args)
    batch_path = Path(args.samples)
    if not batch_path.exists():
        raise ValidationError(f"sample file not found: {batch_path}")
    batch = load_batch(batch_path)
    target = (
        _parse_subset(args.target) if args.target else None
    )
    clique = _certified_target(g, target)
    cfg = SearchConfig(n_iter=args.n_iter, seed=args.seed,
                       weight_priority=not args.uniform_swap)
    rate, rows = success_rate(g, batch, clique, cfg)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    results_path = out_dir / "search_results.csv"
    save_search_results(rows, results_path)
    write_manifest(out_dir, "clique", {
        "graph": args.graph, "n_iter": args.n_iter, "samples": str(batch_path),
        "seed": args.seed, "target": list(clique),
        "weight_priority": not args.uniform_swap,
    }, ["search_results.csv"])
    print(json.dumps({
        "path": str(results_path), "rate": rate,
        "samples": len(batch), "target": list(clique),
    }, sort_keys=True))
    return 0


def _scenario_from_args(args) -> Scenario:
    overrides: dict = {
        "name": args.name,
        "graph": args.graph,
        "seed": args.seed,
        "out_dir": args.out,
        "threads": resolve_threads(args.threads),
        "weight_priority": not args.uniform_swap,
    }
    if args.target is not None:
        overrides["target"] = _parse_subset(args.target)
    for flag, field_name, parse in (
        ("gamma_grid", "gamma_grid", _parse_grid),
        ("lambda_grid", "lambda_grid", _parse_grid),
        ("eta_grid", "eta_grid", _parse_grid),
        ("points", "points", _parse_points),
    ):
        value = getattr(args, flag)
        if value is not None:
            overrides[field_name] = parse(value)
    for name in (
        "lambda_fixed", "lambda_scaling", "gamma_hi", "n_samples", "n_iter",
        "repeats", "n_sqz", "n_disp", "subset_size", "graphs_per_point",
        "edge_prob", "hafnian_budget",
    ):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    return Scenario(**overrides)


def _cmd_experiment(args) -> int:
    sc = _scenario_from_args(args)
    result = run_scenario(sc)
    summary = {"csv": result["csv"], "rows": len(result["rows"]), "scenario": sc.name}
    if "budgets" in result:
        summary["budgets"] = result["budgets"]
    print(json.dumps(summary, sort_keys=True))
    return 0


def cli_main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    handlers = {
        "encode": _cmd_encode,
        "prob": _cmd_prob,
        "sample": _cmd_sample,
        "clique": _cmd_clique,
        "experiment": _cmd_experiment,
    }
    try:
        return handlers[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc}", file=sys.stderr)
        return 2
    except ResourceGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def cli_entry() -> None:
    sys.exit(cli_main(sys.argv[1:]))
