"""Experiment configuration: schema, validation, and file formats.

Configs load from either a human-editable key-value text file or JSON with
the same field layout. Text files use one dotted key per line:

    name = inverse-2q
    problem.kind = pauli-terms
    problem.terms = 0.625 II; 0.25 ZI; 0.125 IZ
    qpe.m = 3

Semicolons separate list items; within an item, whitespace separates
fields and commas separate the numbers of a tuple (matrix-mask entries,
complex amplitude pairs). Dense matrices load from the plain-text format
written by fileio.write_matrix_file.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .core import PauliTerm
from .errors import ConfigError
from .estimators import (
    INITIAL_STATE_KINDS,
    SAMPLING_MODES,
    EthConfig,
    InitialState,
)
from .phase_estimation import QPE_MODES, QpeConfig
from .weights import WEIGHT_KINDS, WeightSpec

TARGETS = ("time-average", "inverse-expectation", "logdet-gradient")
FORMS = ("operator", "vector")
PROBLEM_KINDS = ("pauli-terms", "dense-matrix-file", "preset")
DELTA_KINDS = ("projector-from-state", "all-ones", "derivative-mask", "identity")
SERIES_FORMATS = ("csv", "json")


def _fail(field_name: str, reason: str):
    raise ConfigError(f"field {field_name!r}: {reason}")


def _require(d: dict, field_name: str, key: str):
    if key not in d:
        _fail(f"{field_name}.{key}", "missing required key")
    return d[key]


def _as_int(value, field_name: str) -> int:
    try:
        if isinstance(value, bool):
            raise ValueError
        return int(value)
    except (TypeError, ValueError):
        _fail(field_name, f"expected an integer, got {value!r}")


def _as_float(value, field_name: str) -> float:
    try:
        if isinstance(value, bool):
            raise ValueError
        return float(value)
    except (TypeError, ValueError):
        _fail(field_name, f"expected a number, got {value!r}")


def _reject_unknown(d, field_name: str, known) -> dict:
    if not isinstance(d, dict):
        _fail(field_name, "must be a mapping")
    for key in d:
        if key not in known:
            _fail(f"{field_name}.{key}", "unknown field")
    return d


@dataclass(frozen=True)
class ProblemSpec:
    """The operator A: explicit Pauli terms, a matrix file, or a preset name."""

    kind: str
    terms: tuple = ()
    path: str = ""
    name: str = ""

    def __post_init__(self):
        if self.kind not in PROBLEM_KINDS:
            _fail("problem.kind", f"unknown kind {self.kind!r}; expected one of {PROBLEM_KINDS}")
        if self.kind == "pauli-terms" and not self.terms:
            _fail("problem.terms", "at least one term is required")
        if self.kind == "dense-matrix-file" and not self.path:
            _fail("problem.path", "matrix file path is required")
        if self.kind == "preset" and not self.name:
            _fail("problem.name", "preset name is required")


@dataclass(frozen=True)
class DeltaSpec:
    """The observable: projector, all-ones pattern, sparse mask, or identity."""

    kind: str
    scale: float = 1.0
    entries: tuple = ()
    state: object = "uniform"

    def __post_init__(self):
        if self.kind not in DELTA_KINDS:
            _fail("delta.kind", f"unknown kind {self.kind!r}; expected one of {DELTA_KINDS}")
        if self.kind == "derivative-mask" and not self.entries:
            _fail("delta.entries", "derivative-mask requires entries")
        if not (math.isfinite(self.scale)):
            _fail("delta.scale", f"must be finite, got {self.scale!r}")


@dataclass(frozen=True)
class SweepSpec:
    """Condition-number sweep: spectral ratios applied to a seeded diagonal."""

    ratios: tuple
    seed: int
    n_qubits: int = 3

    def __post_init__(self):
        if not self.ratios or any((not math.isfinite(r)) or r <= 1 for r in self.ratios):
            _fail("sweep.ratios", "each spectral ratio must be finite and > 1")
        if not (1 <= self.n_qubits <= 6):
            _fail("sweep.n_qubits", f"must be between 1 and 6, got {self.n_qubits}")


@dataclass(frozen=True)
class OutputSpec:
    out_dir: str = "."
    format: str = "csv"
    basename: str = ""

    def __post_init__(self):
        if self.format not in SERIES_FORMATS:
            _fail("outputs.format", f"unknown series format {self.format!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully validated experiment description; every field is explicit."""

    name: str
    target: str
    form: str
    seed: int
    problem: ProblemSpec
    delta: DeltaSpec
    weight: WeightSpec
    qpe: QpeConfig
    eth: EthConfig
    phi: object = None
    expected: Optional[float] = None
    tolerance: Optional[float] = None
    outputs: OutputSpec = field(default_factory=OutputSpec)
    sweep: Optional[SweepSpec] = None
    base_dir: str = "."

    def __post_init__(self):
        if not self.name:
            _fail("name", "must be nonempty")
        if self.target not in TARGETS:
            _fail("target", f"unknown target {self.target!r}; expected one of {TARGETS}")
        if self.form not in FORMS:
            _fail("form", f"unknown form {self.form!r}; expected one of {FORMS}")
        needs_phi = self.target == "inverse-expectation" or self.form == "vector"
        if needs_phi and self.phi is None:
            _fail("phi", f"target {self.target!r} with form {self.form!r} requires phi")
        if self.eth.seed != self.seed:
            _fail("eth.seed", "must equal the top-level seed (set only the top-level one)")

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, seed=seed, eth=replace(self.eth, seed=seed))

    def with_outputs(self, **kwargs) -> "ExperimentConfig":
        return replace(self, outputs=replace(self.outputs, **kwargs))

    def to_dict(self) -> dict:
        init = self.eth.initial_state
        return {
            "name": self.name,
            "target": self.target,
            "form": self.form,
            "seed": self.seed,
            "problem": {
                "kind": self.problem.kind,
                "terms": [[c, a] for c, a in self.problem.terms],
                "path": self.problem.path,
                "preset": self.problem.name,
            },
            "delta": {
                "kind": self.delta.kind,
                "scale": self.delta.scale,
                "entries": [
                    [int(r), int(c), float(complex(v).real), float(complex(v).imag)]
                    for r, c, v in self.delta.entries
                ],
                "state": _amplitudes_to_json(self.delta.state),
            },
            "phi": _amplitudes_to_json(self.phi),
            "weight": {
                "kind": self.weight.kind,
                "policy": self.weight.policy,
                "eta": self.weight.eta,
            },
            "qpe": {
                "m": self.qpe.m,
                "shift": self.qpe.shift,
                "scale": self.qpe.scale,
                "mode": self.qpe.mode,
            },
            "eth": {
                "dt": self.eth.dt,
                "num_steps": self.eth.num_steps,
                "sampling": self.eth.sampling,
                "shots": self.eth.shots,
                "repetitions": self.eth.repetitions,
                "initial_state": {
                    "kind": init.kind,
                    "seed": init.seed,
                    "amplitudes": _amplitudes_to_json(
                        None if init.amplitudes is None else np.asarray(init.amplitudes)
                    ),
                },
            },
            "expected": self.expected,
            "tolerance": self.tolerance,
            "outputs": {
                "out_dir": self.outputs.out_dir,
                "format": self.outputs.format,
                "basename": self.outputs.basename or self.name,
            },
            "sweep": None
            if self.sweep is None
            else {
                "ratios": list(self.sweep.ratios),
                "seed": self.sweep.seed,
                "n_qubits": self.sweep.n_qubits,
            },
        }


def _amplitudes_to_json(value):
    if value is None or isinstance(value, str):
        return value
    arr = np.asarray(value, dtype=complex).ravel()
    return [[float(x.real), float(x.imag)] for x in arr]


def parse_amplitudes(value, field_name: str):
    """Accept 'uniform', a flat real list, or [[re, im], ...] rows."""
    if value is None or value == "uniform":
        return value
    try:
        rows = list(value)
        out = []
        for row in rows:
            if isinstance(row, (int, float)):
                out.append(complex(row))
            else:
                parts = list(row)
                re = float(parts[0])
                im = float(parts[1]) if len(parts) > 1 else 0.0
                out.append(complex(re, im))
        return np.asarray(out, dtype=complex)
    except (TypeError, ValueError, IndexError):
        _fail(field_name, f"cannot parse amplitudes from {value!r}")


def _parse_terms(raw, field_name: str) -> tuple:
    terms = []
    for item in raw:
        try:
            if isinstance(item, str):
                coef_s, axes = item.split()
                terms.append(PauliTerm(float(coef_s), axes))
            else:
                coef, axes = item
                terms.append(PauliTerm(float(coef), str(axes)))
        except (ValueError, TypeError) as exc:
            _fail(field_name, f"bad Pauli term {item!r} ({exc})")
    return tuple((t.coefficient, t.axes) for t in terms)


def _parse_mask_entries(raw, field_name: str) -> tuple:
    entries = []
    for item in raw:
        try:
            parts = list(item)
            row, col = int(parts[0]), int(parts[1])
            re = float(parts[2])
            im = float(parts[3]) if len(parts) > 3 else 0.0
            entries.append((row, col, complex(re, im)))
        except (ValueError, TypeError, IndexError):
            _fail(field_name, f"bad mask entry {item!r}; expected row,col,re[,im]")
    return tuple(entries)


def from_dict(data: dict, base_dir: str = ".") -> ExperimentConfig:
    """Validate a raw mapping into an ExperimentConfig.

    Raises ConfigError naming the offending field on any problem.
    """
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    known = {
        "name", "target", "form", "seed", "problem", "delta", "phi", "weight",
        "qpe", "eth", "expected", "tolerance", "outputs", "sweep", "schema_version",
    }
    for key in data:
        if key not in known:
            _fail(key, "unknown top-level field")

    name = str(_require(data, "config", "name"))
    target = str(data.get("target", "time-average"))
    form = str(data.get("form", "operator"))
    seed = _as_int(data.get("seed", 0), "seed")

    praw = _reject_unknown(
        _require(data, "config", "problem"), "problem", ("kind", "terms", "path", "preset", "name")
    )
    problem = ProblemSpec(
        kind=str(_require(praw, "problem", "kind")),
        terms=_parse_terms(praw.get("terms", ()), "problem.terms"),
        path=str(praw.get("path", "")),
        name=str(praw.get("preset", praw.get("name", ""))),
    )

    draw = _reject_unknown(
        data.get("delta", {"kind": "identity"}), "delta", ("kind", "scale", "entries", "state")
    )
    delta = DeltaSpec(
        kind=str(_require(draw, "delta", "kind")),
        scale=_as_float(draw.get("scale", 1.0), "delta.scale"),
        entries=_parse_mask_entries(draw.get("entries", ()), "delta.entries"),
        state=parse_amplitudes(draw.get("state", "uniform"), "delta.state"),
    )

    wraw = _reject_unknown(data.get("weight", {}), "weight", ("kind", "policy", "eta"))
    wkind = str(wraw.get("kind", "unit"))
    if wkind not in WEIGHT_KINDS:
        _fail("weight.kind", f"unknown kind {wkind!r}")
    weight = WeightSpec(
        kind=wkind,
        policy=str(wraw.get("policy", "reject")),
        eta=None if wraw.get("eta") is None else _as_float(wraw["eta"], "weight.eta"),
    )

    qraw = _reject_unknown(
        _require(data, "config", "qpe"), "qpe", ("m", "shift", "scale", "mode")
    )
    mode = str(qraw.get("mode", "exact-binning"))
    if mode not in QPE_MODES:
        _fail("qpe.mode", f"unknown mode {mode!r}")
    qpe = QpeConfig(
        m=_as_int(_require(qraw, "qpe", "m"), "qpe.m"),
        shift=_as_float(qraw.get("shift", 0.0), "qpe.shift"),
        scale=_as_float(qraw.get("scale", 1.0), "qpe.scale"),
        mode=mode,
    )

    eraw = _reject_unknown(
        _require(data, "config", "eth"),
        "eth",
        ("dt", "num_steps", "sampling", "shots", "repetitions", "initial_state", "seed"),
    )
    # eth.seed is derived from the top-level seed; a contradictory value in
    # the file must not be silently dropped
    if "seed" in eraw and _as_int(eraw["seed"], "eth.seed") != seed:
        _fail("eth.seed", "must equal the top-level seed (set only the top-level one)")
    iraw = _reject_unknown(
        eraw.get("initial_state", {}), "eth.initial_state", ("kind", "seed", "amplitudes")
    )
    ikind = str(iraw.get("kind", "uniform"))
    if ikind not in INITIAL_STATE_KINDS:
        _fail("eth.initial_state.kind", f"unknown kind {ikind!r}")
    amps = parse_amplitudes(iraw.get("amplitudes"), "eth.initial_state.amplitudes")
    initial = InitialState(
        kind=ikind,
        seed=None if iraw.get("seed") is None else _as_int(iraw["seed"], "eth.initial_state.seed"),
        amplitudes=None if amps is None else tuple(complex(x) for x in np.asarray(amps)),
    )
    sampling = str(eraw.get("sampling", "exact"))
    if sampling not in SAMPLING_MODES:
        _fail("eth.sampling", f"unknown sampling {sampling!r}")
    eth = EthConfig(
        dt=_as_float(_require(eraw, "eth", "dt"), "eth.dt"),
        num_steps=_as_int(_require(eraw, "eth", "num_steps"), "eth.num_steps"),
        sampling=sampling,
        shots=_as_int(eraw.get("shots", 0), "eth.shots"),
        seed=seed,
        initial_state=initial,
        repetitions=_as_int(eraw.get("repetitions", 1), "eth.repetitions"),
    )

    oraw = _reject_unknown(data.get("outputs", {}), "outputs", ("out_dir", "format", "basename"))
    outputs = OutputSpec(
        out_dir=str(oraw.get("out_dir", ".")),
        format=str(oraw.get("format", "csv")),
        basename=str(oraw.get("basename", "")) or name,
    )

    sraw = data.get("sweep")
    sweep = None
    if sraw is not None:
        _reject_unknown(sraw, "sweep", ("ratios", "seed", "n_qubits"))
        ratios_raw = _require(sraw, "sweep", "ratios")
        if isinstance(ratios_raw, (int, float)):
            ratios_raw = [ratios_raw]
        sweep = SweepSpec(
            ratios=tuple(_as_float(r, "sweep.ratios") for r in ratios_raw),
            seed=_as_int(_require(sraw, "sweep", "seed"), "sweep.seed"),
            n_qubits=_as_int(sraw.get("n_qubits", 3), "sweep.n_qubits"),
        )

    return ExperimentConfig(
        name=name,
        target=target,
        form=form,
        seed=seed,
        problem=problem,
        delta=delta,
        weight=weight,
        qpe=qpe,
        eth=eth,
        phi=parse_amplitudes(data.get("phi"), "phi"),
        expected=None if data.get("expected") is None else _as_float(data["expected"], "expected"),
        tolerance=None
        if data.get("tolerance") is None
        else _as_float(data["tolerance"], "tolerance"),
        outputs=outputs,
        sweep=sweep,
        base_dir=base_dir,
    )


def _parse_text_value(raw: str):
    raw = raw.strip()
    if ";" in raw or "," in raw or (" " in raw and not raw.startswith('"')):
        items = [it.strip() for it in raw.split(";") if it.strip()]
        out = []
        for item in items:
            if "," in item:
                out.append([_parse_scalar(tok) for tok in item.split(",")])
            elif " " in item:
                out.append([_parse_scalar(tok) for tok in item.split()])
            else:
                out.append(_parse_scalar(item))
        return out
    return _parse_scalar(raw)


def _parse_scalar(tok: str):
    tok = tok.strip()
    try:
        return json.loads(tok)
    except (json.JSONDecodeError, ValueError):
        return tok


def parse_keyvalue_text(text: str) -> dict:
    """Parse `dotted.key = value` lines into a nested mapping."""
    root: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        node = root
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"line {lineno}: key {key!r} conflicts with an earlier scalar")
        if parts[-1] in node:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        node[parts[-1]] = _parse_text_value(value)
    return root


def _format_text_value(value) -> str:
    if isinstance(value, (list, tuple)):
        items = []
        for item in value:
            if isinstance(item, (list, tuple)):
                items.append(",".join(_format_scalar(x) for x in item))
            else:
                items.append(_format_scalar(item))
        return "; ".join(items)
    return _format_scalar(value)


def _format_scalar(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def to_keyvalue_text(config: ExperimentConfig) -> str:
    """Serialize to the key-value text format; round-trips through load."""
    data = config.to_dict()
    lines = []

    def emit(prefix: str, node):
        if isinstance(node, dict):
            for key, value in node.items():
                emit(f"{prefix}.{key}" if prefix else key, value)
        else:
            if node in (None, "", []) or node == []:
                return
            lines.append(f"{prefix} = {_format_text_value(node)}")

    emit("", data)
    return "\n".join(lines) + "\n"


def load_config(path) -> ExperimentConfig:
    """Load a config file; `.json` parses as JSON, anything else as text."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    else:
        data = parse_keyvalue_text(text)
    return from_dict(data, base_dir=str(path.parent))
