"""Optimal estimators of maxima and order statistics of linear functionals
from linear observations.

Problems and estimators are plain dicts in the JSON file layout used by the
``optrec`` command line tool.
"""

import json

from . import _optrec
from ._optrec import InputError, ProgramFailure, __version__

__all__ = [
    "InputError",
    "ProgramFailure",
    "__version__",
    "build",
    "canonical_json",
    "compare_plugin",
    "eval_error",
    "hb_extension_check",
    "problem_hash",
    "program_text",
    "verify",
]


def _text(doc):
    return doc if isinstance(doc, str) else json.dumps(doc)


def build(problem, tol=1e-8, seed=0):
    """Return (e_hat, estimator) for the optimal estimator of ``problem``."""
    e_hat, estimator = _optrec.build(_text(problem), tol, seed)
    return e_hat, json.loads(estimator)


def eval_error(problem, estimator, tol=1e-8):
    """Worst-case error of a fixed estimator."""
    return _optrec.eval_error(_text(problem), _text(estimator), tol)


def compare_plugin(problem, tol=1e-8):
    """Optimal error, plug-in error and their gap for a sup target."""
    return _optrec.compare_plugin(_text(problem), tol)


def verify(problem, estimator, samples=100000, seed=0, tol=1e-8):
    """Consistency report comparing the estimator against sampling oracles."""
    return json.loads(_optrec.verify(_text(problem), _text(estimator), samples, seed, tol))


def program_text(problem, estimator=None):
    """Text dump of the synthesis program, or of the fixed-estimator program."""
    return _optrec.program_text(_text(problem), None if estimator is None else _text(estimator))


def problem_hash(problem):
    """SHA-256 of the canonical JSON form of a problem."""
    return _optrec.problem_hash(_text(problem))


def canonical_json(doc):
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return _optrec.canonical_json(_text(doc))


def hb_extension_check(mu, rho, eta, tol=1e-8):
    """Single-witness certificate c with mu_i + c.eta <= max_j rho_j."""
    return _optrec.hb_extension_check(mu, rho, eta, tol)
