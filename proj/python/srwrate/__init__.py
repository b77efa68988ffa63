"""Wasserstein and subspace robust Wasserstein distances."""

import json

from ._core import (
    Error,
    InvalidArgument,
    NumericalError,
    PackingNotFound,
    bounds,
    greedy_separated_set,
    mad_binomial,
    projection_residual_bound,
    rate_curves,
    sample_empirical,
    srw_distance,
    t_star,
    verify,
    version,
    wasserstein,
    worst_case_measure,
)
from . import _core


def s1_distance(x, y, a=None, b=None, **solver):
    return srw_distance(x, y, 1, a, b, **solver)


def rate(sampler, n_schedule, metric="s1", k=1, trials=1, seed=0, tol=1e-3, max_iters=200,
         solver="auto", threads=1, reference_size=4096):
    """Run a convergence-rate sweep and return the report as a dict."""
    text = _core._rate_json(sampler, metric, k, list(n_schedule), trials, seed, tol, max_iters,
                            solver, threads, reference_size)
    return json.loads(text)


__version__ = version()
