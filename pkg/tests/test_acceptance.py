"""
Acceptance criteria 1-10, each reported as one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (lines are printed to the
terminal even under capture) or ``python tests/test_acceptance.py``.
"""
import sys
import warnings
from functools import lru_cache

import pytest

from weilkit.errors import TruncationWarning
from weilkit.verify import run_suite

SEED = 20240611


@lru_cache(maxsize=None)
def _records(suite):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        return tuple(run_suite(suite, seed=SEED))


def _select(suite, prefixes):
    recs = [r for r in _records(suite) if r["check"].startswith(prefixes)]
    assert recs, f"no records for {prefixes} in suite {suite}"
    return recs


CRITERIA = {
    1: ("metaplectic cover: associativity, identity words, runtime",
        "cocycle", ("cocycle.associativity", "cocycle.identity_words", "cocycle.runtime")),
    2: ("grid evolution of Gaussians matches the closed-form action (n=1, n=2)",
        "evolution", ("evolution.gaussian_n1", "evolution.gaussian_n2", "evolution.runtime")),
    3: ("conjugation of Heisenberg operators (n=1)",
        "evolution", ("evolution.conjugation_n1",)),
    4: ("equivariance of even and odd transforms, closed form and grid",
        "equivariance", ("equivariance.",)),
    5: ("PDE systems, second-order convergence, negative controls",
        "pde", ("pde.",)),
    6: ("exact kernels vs splitting, Mehler spot values, semigroup",
        "kernel", ("kernel.",)),
    7: ("invariant norm ratio across sources and y0 contraction",
        "norm42", ("norm42.",)),
    8: ("polynomial growth bound along boundary and radial paths",
        "growth", ("growth.",)),
    9: ("Maslov quarter-turn pattern of Fourier powers",
        "cocycle", ("cocycle.maslov",)),
    10: ("unitarity and parity preservation of grid evolution",
         "evolution", ("evolution.unitarity", "evolution.parity")),
}


def _line(k):
    label, suite, prefixes = CRITERIA[k]
    recs = _select(suite, prefixes)
    ok = all(r["pass"] for r in recs)
    detail = "; ".join(f"{r['check']}={r['residual']:.3g}<{r['tolerance']:.3g}" for r in recs)
    return ok, f"{'PASS' if ok else 'FAIL'} criterion {k}: {label} [{detail}]"


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k, capsys):
    ok, line = _line(k)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [_line(k) for k in sorted(CRITERIA)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
