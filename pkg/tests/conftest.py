"""Shared experiment runs for the test suite.

The acceptance criteria re-use full experiment outputs (and re-run some of
them to check byte-identical artifacts), so the expensive runs happen once
per session here.
"""

import time

import pytest

from hoc.experiments import run_config
from hoc.fixtures import CHAOS_MEASURES, CHAOS_SHAPES

MASTER_SEED = 20260825


def run_into(tmp_factory, name, cfg):
    out = tmp_factory.mktemp(name)
    start = time.perf_counter()
    code, report = run_config(cfg, str(out))
    return out, code, report, time.perf_counter() - start


@pytest.fixture(scope="session")
def tensor_norm_run(tmp_path_factory):
    return run_into(tmp_path_factory, "tensor-norm",
                    {"kind": "tensor-norm", "seed": MASTER_SEED, "count": 50})


@pytest.fixture(scope="session")
def oracle_run(tmp_path_factory):
    return run_into(tmp_path_factory, "oracle",
                    {"kind": "catalog-oracle", "seed": MASTER_SEED, "dist": "all"})


@pytest.fixture(scope="session")
def bilinear_run(tmp_path_factory):
    cfg = {"kind": "certify", "fixture": "gauss-bilinear-exp-opnorm",
           "seed": MASTER_SEED}
    return cfg, run_into(tmp_path_factory, "bilinear", cfg)


def chaos_tail_configs():
    out = []
    for dim, order in CHAOS_SHAPES:
        for tag in CHAOS_MEASURES:
            name = "%s-chaos-n%d-d%d-tails" % (tag.split("_")[0], dim, order)
            out.append({"kind": "tails", "fixture": name, "seed": MASTER_SEED,
                        "negative_control": True})
    return out


@pytest.fixture(scope="session")
def chaos_tail_runs(tmp_path_factory):
    runs = []
    for cfg in chaos_tail_configs():
        runs.append((cfg, run_into(tmp_path_factory, cfg["fixture"], cfg)))
    return runs


@pytest.fixture(scope="session")
def chaos_multilinear_runs(tmp_path_factory):
    runs = []
    for dim, order in CHAOS_SHAPES:
        for tag in CHAOS_MEASURES:
            name = "%s-chaos-n%d-d%d-multilinear" % (tag.split("_")[0], dim, order)
            cfg = {"kind": "multilinear", "fixture": name, "seed": MASTER_SEED}
            runs.append((cfg, run_into(tmp_path_factory, name, cfg)))
    return runs


@pytest.fixture(scope="session")
def weighted_runs(tmp_path_factory):
    runs = {}
    for name, kind in (("student-weighted-moments-d1", "weighted"),
                       ("student-weighted-moments-d2", "weighted"),
                       ("student-weighted-tail-d1", "weighted-tail"),
                       ("student-weighted-tail-d2", "weighted-tail")):
        cfg = {"kind": kind, "fixture": name, "seed": MASTER_SEED}
        runs[name] = (cfg, run_into(tmp_path_factory, name, cfg))
    return runs


@pytest.fixture(scope="session")
def rmt_run(tmp_path_factory):
    cfg = {"kind": "rmt", "fixture": "wigner-gaussian-n100", "seed": MASTER_SEED}
    return cfg, run_into(tmp_path_factory, "rmt", cfg)
