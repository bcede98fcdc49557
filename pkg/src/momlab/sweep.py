"""Parallel sweep execution with deterministic per-trajectory streams.

A sweep is a list of jobs (parameter point x system size x seed index).
Trajectory seeds derive from (base_seed, point_index, trajectory_index)
through a counter-based Philox stream, so results do not depend on worker
scheduling and adding seeds never changes earlier trajectories.  Workers
rebuild the ensemble from its descriptor; results merge in job order.
"""

from __future__ import annotations

import multiprocessing as mp
import os
from dataclasses import dataclass, field

import numpy as np

from .ensembles import (
    BipartiteSpec,
    FactorizableSpec,
    LBitSpec,
    MeasurementEnsemble,
    build_bipartite,
    build_factorizable,
    build_lbit,
    from_species,
)
from . import protocols


def ensemble_from_descriptor(d: dict) -> MeasurementEnsemble:
    kind = d["kind"]
    boundary = d.get("boundary", "periodic")
    if kind == "factorizable":
        return build_factorizable(FactorizableSpec(int(d["r"]), tuple(d["q"])), boundary)
    if kind == "lbit":
        return build_lbit(LBitSpec(int(d["n_star"]), float(d["epsilon"]),
                                   float(d.get("p_z", 0.0))), boundary)
    if kind == "bipartite":
        return build_bipartite(BipartiteSpec(d["pattern_a"], d["pattern_b"],
                                             float(d.get("delta", 0.0))), boundary)
    if kind == "custom":
        return from_species(d["species"], d.get("probs"), boundary)
    raise ValueError(f"unknown ensemble kind {kind!r}")


def trajectory_rng(base_seed: int, point_index: int, traj_index: int) -> np.random.Generator:
    key = np.array([np.uint64(base_seed), np.uint64((point_index << 32) + traj_index)],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass
class Job:
    index: int
    protocol: str  # pure | purify | reference | hybrid
    ensemble: dict | None
    L: int
    T: float
    base_seed: int
    point_index: int
    traj_index: int
    params: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)


def run_job(job: Job):
    from . import __version__

    rng = trajectory_rng(job.base_seed, job.point_index, job.traj_index)
    meta = {"seed": job.traj_index, "params": dict(job.params),
            "version": __version__, "base_seed": job.base_seed,
            "ensemble": job.ensemble}
    opts = dict(job.options)
    if job.protocol == "pure":
        ens = ensemble_from_descriptor(job.ensemble)
        rec = protocols.run_pure(ens, job.L, job.T, rng, meta=meta, **opts)
    elif job.protocol == "purify":
        ens = ensemble_from_descriptor(job.ensemble)
        rec = protocols.run_purification(ens, job.L, job.T, rng, meta=meta, **opts)
    elif job.protocol == "reference":
        ens = ensemble_from_descriptor(job.ensemble)
        rec = protocols.run_reference(ens, job.L, job.T, rng, meta=meta, **opts)
    elif job.protocol == "hybrid":
        rec = protocols.run_hybrid(opts.pop("n"), opts.pop("p_x"), opts.pop("p_z"),
                                   job.L, job.T, rng, meta=meta, **opts)
    else:
        raise ValueError(f"unknown protocol {job.protocol!r}")
    return job.index, rec


def worker_count(requested: int | None = None) -> int:
    if requested and requested > 0:
        return requested
    env = os.environ.get("MOMLAB_WORKERS")
    if env:
        return max(1, int(env))
    return max(1, mp.cpu_count())


def run_jobs(jobs, workers: int | None = None, progress=None):
    """Execute jobs across a worker pool; returns records in job order."""
    nw = worker_count(workers)
    results = [None] * len(jobs)
    if nw <= 1 or len(jobs) <= 1:
        for k, job in enumerate(jobs):
            idx, rec = run_job(job)
            results[idx] = rec
            if progress:
                progress(k + 1, len(jobs))
        return results
    ctx = mp.get_context("fork")
    with ctx.Pool(processes=nw) as pool:
        for k, (idx, rec) in enumerate(pool.imap_unordered(run_job, jobs, chunksize=1)):
            results[idx] = rec
            if progress:
                progress(k + 1, len(jobs))
    return results
