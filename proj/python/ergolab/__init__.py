"""Python surface for the ergolab library.

The compiled module exchanges families and reports as JSON strings; this
package turns those into plain dicts. Installed builds place ``_ergolab``
inside the package; development builds are picked up from ``ERGOLAB_BINDIR``.
"""

import json
import os
import sys


def _load_backend():
    try:
        from . import _ergolab  # type: ignore[attr-defined]

        return _ergolab
    except ImportError:
        bindir = os.environ.get("ERGOLAB_BINDIR")
        if bindir and bindir not in sys.path:
            sys.path.insert(0, bindir)
        import _ergolab  # type: ignore[import-not-found]

        return _ergolab


_backend = _load_backend()

ErgolabError = _backend.ErgolabError
pliss_times = _backend.pliss_times
hyperbolic_frequency = _backend.hyperbolic_frequency
derive_epsilon0 = _backend.derive_epsilon0


def build_family(config):
    """Build a family from a config dict; returns the family document."""
    return json.loads(_backend.build_family(json.dumps(config)))


def check_family(family, c=None):
    """Partition, Markov and constants checks on a family document."""
    return json.loads(_backend.check_family(json.dumps(family), c))


def orbit(family, start, steps, stream="itinerary", seed=1, dither=None):
    kwargs = {} if dither is None else {"dither": dither}
    return json.loads(
        _backend.orbit(json.dumps(family), list(start), steps, stream, seed, **kwargs)
    )


def cylinder(family, word, c=None, samples=100000, seed=3301):
    return json.loads(
        _backend.cylinder(json.dumps(family), list(word), c, samples, seed)
    )


def transitivity(family, depth):
    return json.loads(_backend.transitivity(json.dumps(family), depth))


def weak_cycle(family, target, samples=1000, depth=10, seed=1):
    """Backward-orbit hit fraction; target is [[lo],[hi]] or polygon vertices."""
    return json.loads(
        _backend.weak_cycle(
            json.dumps(family), [list(v) for v in target], samples, depth, seed
        )
    )


def ergodicity(family, starts=20, steps=1000000, stream="iid", seed=1, dither=None):
    kwargs = {} if dither is None else {"dither": dither}
    return json.loads(
        _backend.ergodicity(json.dumps(family), starts, steps, stream, seed, **kwargs)
    )


def invariant_set_probe(family, g=64, rounds=4096):
    return json.loads(_backend.invariant_set_probe(json.dumps(family), g, rounds))


def equidistribution(family, start, steps, boxes=16, seed=1, dither=None):
    kwargs = {} if dither is None else {"dither": dither}
    return json.loads(
        _backend.equidistribution(
            json.dumps(family), list(start), steps, boxes, seed, **kwargs
        )
    )


__all__ = [
    "ErgolabError",
    "build_family",
    "check_family",
    "orbit",
    "pliss_times",
    "hyperbolic_frequency",
    "derive_epsilon0",
    "cylinder",
    "transitivity",
    "weak_cycle",
    "ergodicity",
    "invariant_set_probe",
    "equidistribution",
]
