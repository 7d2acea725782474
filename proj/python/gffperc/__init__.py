"""Zero-average GFF level-set percolation on regular graphs."""

import json

from ._gffperc import *  # noqa: F401,F403
from ._gffperc import sprinkling_run_json


def sprinkling_run(n, d, h, h_prime, p, eta_ref, seed, t=None):
    """One sprinkling experiment as a dict (t=None uses 1/ln n)."""
    return json.loads(sprinkling_run_json(n, d, h, h_prime, p, t, eta_ref, seed))
