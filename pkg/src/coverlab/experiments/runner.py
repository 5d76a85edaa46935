"""Dispatch a validated config to its runner and write the outputs."""

import json
import math
import os
import time
from dataclasses import dataclass, field

from .. import __version__
from .._rng import resolve_n_jobs
from ..bounds import VIOLATED, _plain
from .config import ExperimentConfig, load_config
from .runners import RUNNERS, Context

OUTPUT_ENV = "COVERLAB_OUTPUT_DIR"


@dataclass
class ExperimentResult:
    summary: dict
    out_dir: str
    reports: list = field(default_factory=list)

    @property
    def violated(self):
        return any(r.verdict == VIOLATED for r in self.reports)

    @property
    def exit_code(self):
        return 1 if self.violated else 0


def list_experiments():
    """``(kind, description)`` pairs for every experiment kind."""
    return [(kind, desc) for kind, (_, desc) in RUNNERS.items()]


def output_dir_for(cfg):
    """``$COVERLAB_OUTPUT_DIR`` (or ``experiment.output_dir``) joined with the experiment name."""
    base = os.environ.get(OUTPUT_ENV) or cfg.data["experiment"]["output_dir"]
    return os.path.join(base, cfg.name)


def _finite(obj):
    """JSON has no inf/nan: encode them as strings."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    return obj


def run(config, n_jobs=None):
    """Run an experiment from a config path or :class:`ExperimentConfig`.

    Writes the runner's CSV tables and ``summary.json`` into
    :func:`output_dir_for` and returns an :class:`ExperimentResult`;
    ``n_jobs`` overrides ``experiment.n_jobs``.
    """
    cfg = config if isinstance(config, ExperimentConfig) else load_config(config)
    jobs = resolve_n_jobs(cfg.data["experiment"]["n_jobs"] if n_jobs is None else n_jobs)
    out_dir = output_dir_for(cfg)
    os.makedirs(out_dir, exist_ok=True)
    ctx = Context(cfg, out_dir, jobs)
    runner, _ = RUNNERS[cfg.kind]
    start = time.perf_counter()
    runner(cfg, ctx)
    elapsed = time.perf_counter() - start
    summary = {
        "experiment": cfg.name,
        "kind": cfg.kind,
        "seed": cfg.seed,
        "reps": cfg.reps,
        "version": __version__,
        "n_jobs": jobs,
        "wall_clock_seconds": elapsed,
        "config": cfg.echo(),
        "config_files": cfg.files,
        "tolerances": cfg.data["tolerances"],
        "reports": [r.to_dict() for r in ctx.reports],
        "estimates": _plain(ctx.estimates),
        "outputs": ctx.outputs,
        "violated": any(r.verdict == VIOLATED for r in ctx.reports),
    }
    summary = _finite(_plain(summary))
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=False)
        fh.write("\n")
    return ExperimentResult(summary, out_dir, ctx.reports)
