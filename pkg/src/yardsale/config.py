"""JSON run-configuration documents.

A document carries the model in the paper's own parameterisation (``p``, the
probability that the richer trader wins); it is converted to the bias
``delta = p - 1/2`` on the way in.  For ``p`` in ``[1/2, 1)`` that subtraction is
exact, so documents round-trip bit for bit.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from numbers import Integral, Real
from pathlib import Path
from typing import Any

from .errors import ConfigError, YardSaleError
from .experiments import DEFAULT_EPSILON, DEFAULT_MAX_STEPS, TrajectoryConfig
from .model import ModelParams
from .sampling import BetaFraction, ConstantFraction, StreamKey, UniformFraction

KEYS = ("n_agents", "initial", "p", "fraction", "lambda", "chi", "max_steps",
        "condensation_epsilon", "record_every", "seed", "out")
REQUIRED = ("n_agents", "p", "seed")
FRACTION_KEYS = {"constant": ("beta",), "uniform": ("lo", "hi"), "beta": ("a", "b")}
DEFAULT_OUT = "yardsale"


@dataclass(frozen=True)
class RunSpec:
    config: TrajectoryConfig
    out: str = DEFAULT_OUT


def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _is_int(v) -> bool:
    return isinstance(v, Integral) and not isinstance(v, bool)


def _is_real(v) -> bool:
    return isinstance(v, Real) and not isinstance(v, bool)


def parse_run(text: str) -> RunSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc.msg}", exc.lineno) from exc
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")

    def fail(key, msg):
        raise ConfigError(f"{key}: {msg}", _line_of(text, key))

    for key in doc:
        if key not in KEYS:
            fail(key, "unknown key")
    for key in REQUIRED:
        if key not in doc:
            raise ConfigError(f"missing required key {key!r}")

    n = doc["n_agents"]
    if not _is_int(n) or n < 2:
        fail("n_agents", f"must be an integer >= 2, got {n!r}")

    p = doc["p"]
    if not _is_real(p) or not 0.5 <= p < 1.0:
        fail("p", f"must be a number in [0.5, 1), got {p!r}")

    initial = doc.get("initial", "uniform")
    if isinstance(initial, list):
        if not all(_is_real(v) for v in initial):
            fail("initial", "entries must be numbers")
        if len(initial) != n:
            fail("initial", f"has {len(initial)} entries for {n} agents")
        if any(v < 0 for v in initial) or sum(initial) <= 0:
            fail("initial", "entries must be >= 0 with a positive sum")
        initial = tuple(float(v) for v in initial)
    elif initial != "uniform":
        fail("initial", f"must be \"uniform\" or a list of numbers, got {initial!r}")

    dist = _parse_fraction(doc.get("fraction", {"kind": "constant", "beta": 0.1}), text)

    lam = doc.get("lambda")
    if lam is not None:
        if not isinstance(lam, list) or not all(_is_real(v) for v in lam):
            fail("lambda", "must be a list of numbers")
        if len(lam) != n:
            fail("lambda", f"has {len(lam)} entries for {n} agents")
        if not all(0.0 < v < 1.0 for v in lam):
            fail("lambda", "every entry must lie in (0, 1)")
        lam = tuple(float(v) for v in lam)

    chi = doc.get("chi")
    if chi is not None and (not _is_real(chi) or not 0.0 < chi < 1.0):
        fail("chi", f"must be a number in (0, 1), got {chi!r}")

    for key in ("max_steps", "record_every"):
        v = doc.get(key, 1)
        if not _is_int(v) or v < 1:
            fail(key, f"must be an integer >= 1, got {v!r}")

    if "condensation_epsilon" in doc:
        eps = doc["condensation_epsilon"]
        if eps is not None and (not _is_real(eps) or not 0.0 < eps < 1.0):
            fail("condensation_epsilon", f"must be null or a number in (0, 1), got {eps!r}")
    else:
        eps = None if chi is not None else DEFAULT_EPSILON

    seed = doc["seed"]
    if not _is_int(seed) or not 0 <= seed < 2**64:
        fail("seed", f"must be an unsigned 64-bit integer, got {seed!r}")

    out = doc.get("out", DEFAULT_OUT)
    if not isinstance(out, str) or not out:
        fail("out", "must be a nonempty path prefix")

    try:
        params = ModelParams(n_agents=n, delta=p - 0.5, fraction_dist=dist,
                             risk_lambda=lam, tax_chi=None if chi is None else float(chi))
        config = TrajectoryConfig(
            params=params, initial=initial,
            max_steps=doc.get("max_steps", DEFAULT_MAX_STEPS),
            condensation_epsilon=None if eps is None else float(eps),
            record_every=doc.get("record_every", 1),
            key=StreamKey(seed, 0))
    except YardSaleError as exc:
        line = _line_of(text, "condensation_epsilon") if "condensation_epsilon" in str(exc) else None
        raise ConfigError(str(exc), line) from exc
    return RunSpec(config, out)


def _parse_fraction(spec: Any, text: str):
    line = _line_of(text, "fraction")
    if not isinstance(spec, dict) or spec.get("kind") not in FRACTION_KEYS:
        raise ConfigError('fraction: needs "kind" of constant, uniform or beta', line)
    kind = spec["kind"]
    want = FRACTION_KEYS[kind]
    extra = set(spec) - set(want) - {"kind"}
    if extra:
        raise ConfigError(f"fraction: unknown key(s) {sorted(extra)} for kind {kind!r}", line)
    missing = [k for k in want if k not in spec]
    if missing or not all(_is_real(spec[k]) for k in want):
        raise ConfigError(f"fraction: kind {kind!r} needs numeric {', '.join(want)}", line)
    args = [float(spec[k]) for k in want]
    cls = {"constant": ConstantFraction, "uniform": UniformFraction, "beta": BetaFraction}[kind]
    try:
        return cls(*args)
    except YardSaleError as exc:
        raise ConfigError(f"fraction: {exc}", line) from exc


def parse_config(text: str) -> TrajectoryConfig:
    return parse_run(text).config


def load_run(path) -> RunSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        return parse_run(text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def fraction_document(dist) -> dict:
    if isinstance(dist, ConstantFraction):
        return {"kind": "constant", "beta": dist.beta}
    if isinstance(dist, UniformFraction):
        return {"kind": "uniform", "lo": dist.lo, "hi": dist.hi}
    return {"kind": "beta", "a": dist.a, "b": dist.b}


def config_document(config: TrajectoryConfig, out: str | None = None) -> dict:
    """Normalised document that parses back to an equal config."""
    p = config.params
    doc = {
        "n_agents": p.n_agents,
        "initial": config.initial if isinstance(config.initial, str) else list(config.initial),
        "p": 0.5 + p.delta,
        "fraction": fraction_document(p.fraction_dist),
    }
    if p.risk_lambda is not None:
        doc["lambda"] = list(p.risk_lambda)
    if p.tax_chi is not None:
        doc["chi"] = p.tax_chi
    doc.update({
        "max_steps": config.max_steps,
        "condensation_epsilon": config.condensation_epsilon,
        "record_every": config.record_every,
        "seed": config.key.master_seed,
    })
    if out is not None:
        doc["out"] = out
    return doc


def dump_config(config: TrajectoryConfig, out: str | None = None) -> str:
    return json.dumps(config_document(config, out), indent=2) + "\n"
