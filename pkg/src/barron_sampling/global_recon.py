"""Patching local recoveries over the dyadic partition of the cube."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import partition as part
from .barron_core import FourierSum, as_points
from .cutoff import PlateauCutoff
from .l1_solver import ToleranceConfig
from .local_recon import LocalPlan, ReconstructionError, make_plan, reconstruct_local
from .quadrature import box_rule
from .trig_poly import TrigPoly, from_csv, to_csv


@dataclass
class CellPlan:
    index: part.CellIndex
    cell: part.Cell
    local: LocalPlan
    points: np.ndarray  # pulled back into the cell's image of the cube


@dataclass
class GlobalPlan:
    epsilon: float
    sigma: float
    dim: int
    kappa0: float
    cells: list = field(default_factory=list)

    @property
    def total_samples(self) -> int:
        return int(sum(c.local.m for c in self.cells))

    @property
    def points(self) -> np.ndarray:
        if not self.cells:
            return np.zeros((0, self.dim))
        return np.concatenate([c.points for c in self.cells], axis=0)

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum([c.local.m for c in self.cells])]).astype(int)

    @property
    def levels(self) -> list[tuple]:
        return sorted({c.index.n for c in self.cells}, key=lambda v: (sum(v), v))


def _level_seed(seed: int, n) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), len(n), *map(int, n)]))


def plan_size(epsilon: float, sigma: float, dim: int, kappa0: float = 1.0,
              log_power: float = 4.0) -> int:
    """Total sample count of the plan without drawing any points."""
    if epsilon >= 1:
        return 0
    lam = 0.5 + sigma / dim
    return sum(2 ** dim * part.budget(n, epsilon, lam, kappa0, log_power)
               for n in part.active_set(epsilon, dim))


def make_global_plan(epsilon: float, sigma: float, dim: int, kappa0: float = 1.0,
                     seed: int = 0, kappa3: float = 1.0, kappa4: float = 1.0,
                     log_power: float = 4.0) -> GlobalPlan:
    plan = GlobalPlan(float(epsilon), float(sigma), dim, float(kappa0))
    if epsilon >= 1:
        return plan
    lam = 0.5 + sigma / dim
    for n in part.active_set(epsilon, dim):
        eps_n = epsilon * 2.0 ** (sum(n) / 4.0)
        m_n = part.budget(n, epsilon, lam, kappa0, log_power)
        local = make_plan(eps_n, sigma, dim, rng_seed=_level_seed(seed, n),
                          kappa3=kappa3, kappa4=kappa4, m=m_n)
        for theta in part.signs(dim):
            idx = part.CellIndex(n, theta)
            c = part.cell(idx)
            plan.cells.append(CellPlan(idx, c, local, c.inverse(local.points)))
    return plan


class PiecewiseReconstruction:
    """``x -> Re h_c(Phi_c(x))`` on active cells ``c``, zero elsewhere."""

    def __init__(self, dim: int, polys: dict | None = None):
        self.dim = dim
        self.polys: dict[part.CellIndex, TrigPoly] = dict(polys or {})

    def __call__(self, x) -> np.ndarray:
        return evaluate_piecewise(self, x)

    def save(self, directory) -> Path:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        entries = []
        for idx, poly in sorted(self.polys.items(), key=lambda kv: (kv[0].level, kv[0].n, kv[0].theta)):
            c = part.cell(idx)
            name = f"cell_{idx.label()}.csv"
            (d / name).write_text(to_csv(poly))
            entries.append({"n": list(idx.n), "theta": list(idx.theta), "bound": poly.bound,
                            "a": [repr(float(v)) for v in c.a],
                            "b": [repr(float(v)) for v in c.b], "file": name})
        manifest = {"dim": self.dim, "cells": entries}
        (d / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
        return d

    @classmethod
    def load(cls, directory) -> "PiecewiseReconstruction":
        d = Path(directory)
        manifest = json.loads((d / "manifest.json").read_text())
        polys = {}
        for e in manifest["cells"]:
            idx = part.CellIndex(tuple(e["n"]), tuple(e["theta"]))
            polys[idx] = from_csv((d / e["file"]).read_text(), bound=e["bound"])
        return cls(manifest["dim"], polys)


def evaluate_piecewise(r: PiecewiseReconstruction, x) -> np.ndarray:
    pts, single = as_points(x, r.dim)
    if np.any(np.abs(pts) > 0.5) or not np.all(np.isfinite(pts)):
        raise ValueError("evaluation points must lie in [-1/2, 1/2]^d")
    out = np.zeros(pts.shape[0])
    if r.polys:
        levels, thetas, valid = part.locate(pts)
        if max(max(i.n) for i in r.polys) > 126:
            raise ValueError("cells deeper than level 126 per axis are not supported")
        rows = np.flatnonzero(valid & np.all(levels <= 126, axis=1))
        # one integer per cell: base-256 digits of 2 n_i + [theta_i > 0]
        digits = 2 * levels[rows].astype(np.int64) + (thetas[rows] > 0)
        codes = digits @ (256 ** np.arange(r.dim, dtype=np.int64))
        order = np.argsort(codes, kind="stable")
        uniq, starts = np.unique(codes[order], return_index=True)
        d = r.dim
        for code, members in zip(uniq, np.split(rows[order], starts[1:])):
            dig = [(int(code) >> (8 * i)) & 255 for i in range(d)]
            idx = part.CellIndex(tuple(v >> 1 for v in dig), tuple(1 if v & 1 else -1 for v in dig))
            poly = r.polys.get(idx)
            if poly is not None:
                out[members] = np.real(poly(part.cell(idx).forward(pts[members])))
    return out[0] if single else out


def reconstruct_global(sample_values, plan: GlobalPlan, cutoff: PlateauCutoff | None = None,
                       solver_cfg: ToleranceConfig | None = None,
                       workers: int = 1) -> PiecewiseReconstruction:
    values = np.asarray(sample_values, dtype=float).reshape(-1)
    if values.shape[0] != plan.total_samples:
        raise ValueError(f"expected {plan.total_samples} samples, got {values.shape[0]}")
    cutoff = cutoff or PlateauCutoff.build(plan.dim, plan.sigma)
    off = plan.offsets

    def solve(j):
        cp = plan.cells[j]
        try:
            return reconstruct_local(values[off[j]:off[j + 1]], cp.local, cutoff, solver_cfg)
        except ReconstructionError as exc:
            raise ReconstructionError(f"cell {cp.index}: {exc}", exc.report, cp.index) from exc

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            polys = list(pool.map(solve, range(len(plan.cells))))
    else:
        polys = [solve(j) for j in range(len(plan.cells))]
    return PiecewiseReconstruction(plan.dim, {cp.index: p for cp, p in zip(plan.cells, polys)})


def _sinc_gram_norm(f: FourierSum) -> float:
    """Exact ``||f||^2`` over the cube for an atomic sum."""
    diff = f.freqs[:, None, :] - f.freqs[None, :, :]
    gram = np.prod(np.sinc(diff), axis=2)
    return float(np.real(np.conj(f.amps) @ gram @ f.amps))


def cell_errors(f, r: PiecewiseReconstruction, order: int = 24) -> dict:
    """Squared L2 error on each reconstructed cell."""
    out = {}
    for idx in r.polys:
        c = part.cell(idx)
        nodes, weights = box_rule(c.lower, c.upper, order)
        diff = np.real(f(nodes)) - evaluate_piecewise(r, nodes)
        out[idx] = float(np.sum(weights * diff ** 2))
    return out


def l2_error(f, r: PiecewiseReconstruction, order: int = 24,
             extra_levels: int = 10) -> float:
    """``||f - T||_2`` over the cube by per-cell Gauss-Legendre quadrature.

    For atomic ``f`` the mass outside the reconstructed cells comes from the exact
    sinc Gram form; otherwise uncovered cells are integrated up to
    ``extra_levels`` beyond the deepest reconstructed level.
    """
    err = cell_errors(f, r, order)
    inner = sum(err.values())
    covered = 0.0
    for idx in r.polys:
        c = part.cell(idx)
        nodes, weights = box_rule(c.lower, c.upper, order)
        covered += float(np.sum(weights * np.real(f(nodes)) ** 2))
    if isinstance(f, FourierSum):
        outside = max(_sinc_gram_norm(f) - covered, 0.0)
    else:
        deepest = max((i.level for i in r.polys), default=-1) + extra_levels
        outside = 0.0
        for k in range(deepest + 1):
            for n in _levels_with_sum(r.dim, k):
                for th in part.signs(r.dim):
                    idx = part.CellIndex(n, th)
                    if idx in r.polys:
                        continue
                    c = part.cell(idx)
                    nodes, weights = box_rule(c.lower, c.upper, order)
                    outside += float(np.sum(weights * np.real(f(nodes)) ** 2))
    return math.sqrt(inner + outside)


def _levels_with_sum(dim: int, k: int):
    if dim == 1:
        yield (k,)
        return
    for first in range(k + 1):
        for rest in _levels_with_sum(dim - 1, k - first):
            yield (first,) + rest
