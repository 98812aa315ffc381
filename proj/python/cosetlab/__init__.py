"""Coset-state cryptography lab: experiments, pipelines and reports."""

import json
import os
from importlib import resources

from . import _core

__all__ = [
    "experiment_ids",
    "run_experiment",
    "wilson",
    "collapsing_distance",
    "pvqfhe_run",
    "obf_run",
    "circuit_corpus",
]


def _tolerances():
    packaged = resources.files(__package__) / "tolerances.json"
    if packaged.is_file():
        return str(packaged)
    return _core.default_tolerances


def experiment_ids():
    return list(_core.experiment_ids())


def run_experiment(experiment, seed="0", trials=0, params=None, threads=0, out=None, tolerances=None):
    """Run one registered experiment and return its v1 report as a dict."""
    text = _core.run_experiment(
        experiment,
        seed,
        int(trials),
        json.dumps(params or {}),
        int(threads),
        os.fspath(tolerances) if tolerances else _tolerances(),
        os.fspath(out) if out else "",
    )
    return json.loads(text)


def wilson(successes, trials, z=3.0):
    return _core.wilson(successes, trials, z)


def collapsing_distance(n, k, mode="exact", samples=10000, seed=0):
    return json.loads(_core.collapsing_distance(n, k, mode, samples, seed))


def _circuit_text(circuit):
    return circuit if isinstance(circuit, str) else json.dumps(circuit)


def pvqfhe_run(circuit, bits, seed="0"):
    return json.loads(_core.pvqfhe_run(_circuit_text(circuit), bits, seed))


def obf_run(circuit, bits, tamper="none", seed="0"):
    return json.loads(_core.obf_run(_circuit_text(circuit), bits, tamper, seed))


def circuit_corpus():
    return {name: json.loads(text) for name, text in _core.circuit_corpus()}
