"""Scenario configuration: strict JSON schema, parsing and serialisation.

Units: energies in units of the local Hamiltonian norm, times in its inverse.
"""
import json
from dataclasses import asdict, dataclass, field

import jsonschema
import numpy as np

from .bath import BathSpec
from .filtered import MODES, CouplingChannel
from .linalg import pauli_string
from .master import VARIANTS, EvolutionConfig

SCHEMA_VERSION = 1

SCENARIOS = (
    "single_qubit_relax",
    "davies_compare",
    "integral_compare",
    "positivity_sweep",
    "unravel_check",
    "powder_of_sympathy",
    "faithful_bench",
    "error_tables",
    "fixed_point_report",
)

# scenarios that need a system Hamiltonian and at least one channel
NEEDS_SYSTEM = set(SCENARIOS) - {"powder_of_sympathy", "error_tables"}

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version", "scenario"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "scenario": {"enum": list(SCENARIOS)},
        "hamiltonian": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["pauli", "coeff"],
                "properties": {"pauli": {"type": "string", "pattern": "^[IXYZ]+$"},
                               "coeff": _NUM},
            },
        },
        "channels": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["pauli"],
                "properties": {
                    "pauli": {"type": "string", "pattern": "^[IXYZ]+$"},
                    "weight": _NUM,
                    "bath": {
                        "type": "object",
                        "additionalProperties": False,
                        "properties": {"beta": _NONNEG, "t_b": _POS, "norm": _POS},
                    },
                    "filter": {"enum": list(MODES)},
                    "window": _NONNEG,
                },
            },
        },
        "evolution": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "variant": {"enum": list(VARIANTS)},
                "dt": _POS,
                "T": _POS,
                "T_prime": _NONNEG,
                "avg_points": {"type": "integer", "minimum": 1},
                "history_span": _POS,
                "counterterm": {"type": "boolean"},
                "lamb_shift": {"type": "boolean"},
                "warmup": {"enum": ["finite_window", "constant_past"]},
                "memory": {"enum": ["operator", "propagated"]},
                "sample_every": {"type": "integer", "minimum": 1},
                "trace_tol": _POS,
                "herm_tol": _POS,
            },
        },
        "initial_state": {"type": "string", "pattern": "^[01+-]+$"},
        "output_dir": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "options": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "threads": {"type": "integer", "minimum": 1},
                "n_traj": {"type": "integer", "minimum": 1},
                "record_every": _POS,
                "sampler": {"enum": ["normalized", "uniform"]},
                "negativity_tol": _NONNEG,
                "tprime_range": {"type": "array", "items": _NONNEG, "minItems": 2, "maxItems": 2},
                "steps": {"type": "integer", "minimum": 2},
                "n_spins": {"type": "integer", "minimum": 4, "maximum": 10},
                "coupling": _NUM,
                "forced_t_b": _POS,
                "budget_n_qubits": {"type": "integer", "minimum": 1},
                "budget_A_norm": _NONNEG,
                "budget_t": _NONNEG,
            },
        },
    },
}

EVOLUTION_DEFAULTS = asdict(EvolutionConfig())
OPTION_DEFAULTS = {
    "threads": 1,
    "n_traj": 4000,
    "record_every": 1.0,
    "sampler": "normalized",
    "negativity_tol": None,
    "tprime_range": [0.0, 0.6],
    "steps": 61,
    "n_spins": 8,
    "coupling": 0.01,
    "forced_t_b": 0.005,
    "budget_n_qubits": 1,
    "budget_A_norm": 0.5,
    "budget_t": 1.0,
}


class ConfigError(ValueError):
    """Raised with every violation found, one per line."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid config:\n" + "\n".join(f"  - {e}" for e in self.errors))


@dataclass
class ChannelConfig:
    pauli: str
    weight: float = 1.0
    bath: dict = field(default_factory=dict)
    filter: str = "half_line"
    window: float | None = None


@dataclass
class ScenarioConfig:
    scenario: str
    hamiltonian: list = field(default_factory=list)      # [(label, coeff)]
    channels: list = field(default_factory=list)         # [ChannelConfig]
    evolution: dict = field(default_factory=lambda: dict(EVOLUTION_DEFAULTS))
    initial_state: str | None = None
    output_dir: str = "out"
    seed: int = 0
    options: dict = field(default_factory=lambda: dict(OPTION_DEFAULTS))
    schema_version: int = SCHEMA_VERSION

    @property
    def n_qubits(self):
        labels = [lab for lab, _ in self.hamiltonian] + [c.pauli for c in self.channels]
        return len(labels[0]) if labels else 0

    def to_dict(self):
        d = {
            "schema_version": self.schema_version,
            "scenario": self.scenario,
            "hamiltonian": [{"pauli": lab, "coeff": c} for lab, c in self.hamiltonian],
            "channels": [{k: v for k, v in asdict(c).items() if v is not None}
                         for c in self.channels],
            "evolution": {k: v for k, v in self.evolution.items() if v is not None},
            "output_dir": self.output_dir,
            "seed": self.seed,
            "options": {k: v for k, v in self.options.items() if v is not None},
        }
        if self.initial_state is not None:
            d["initial_state"] = self.initial_state
        return d

    def evolution_config(self, **overrides):
        kw = {k: v for k, v in self.evolution.items() if k in EVOLUTION_DEFAULTS}
        kw.update(overrides)
        return EvolutionConfig(**kw)


def serialize(cfg):
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n"


def validate(doc):
    """List of every schema and semantic violation in ``doc`` (empty if valid)."""
    errors = []
    validator = jsonschema.Draft202012Validator(SCHEMA)
    for err in sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path)):
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        errors.append(f"{where}: {err.message}")
    if errors or not isinstance(doc, dict):
        return errors
    labels = [t["pauli"] for t in doc.get("hamiltonian", [])]
    labels += [c["pauli"] for c in doc.get("channels", [])]
    if len({len(lab) for lab in labels}) > 1:
        errors.append("hamiltonian/channels: Pauli strings must all span the same qubit count")
    n = len(labels[0]) if labels else 0
    init = doc.get("initial_state")
    if init is not None and labels and len(init) != n:
        errors.append(f"initial_state: length {len(init)} does not match {n} qubits")
    if doc["scenario"] in NEEDS_SYSTEM:
        if not doc.get("hamiltonian"):
            errors.append(f"hamiltonian: required for scenario {doc['scenario']}")
        if not doc.get("channels"):
            errors.append(f"channels: required for scenario {doc['scenario']}")
    if n > 10:
        errors.append(f"hamiltonian: {n} qubits exceeds the dense-simulation limit of 10")
    ev = {**EVOLUTION_DEFAULTS, **doc.get("evolution", {})}
    try:
        EvolutionConfig(**ev)
    except ValueError as exc:
        errors.append(f"evolution: {exc}")
    return errors


def parse_config(text):
    """Parse and validate JSON text; raises :class:`ConfigError` listing all problems."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"not valid JSON: {exc}"]) from exc
    errors = validate(doc)
    if errors:
        raise ConfigError(errors)
    return ScenarioConfig(
        scenario=doc["scenario"],
        hamiltonian=[(t["pauli"], float(t["coeff"])) for t in doc.get("hamiltonian", [])],
        channels=[ChannelConfig(c["pauli"], float(c.get("weight", 1.0)), dict(c.get("bath", {})),
                                c.get("filter", "half_line"), c.get("window"))
                  for c in doc.get("channels", [])],
        evolution={**EVOLUTION_DEFAULTS, **doc.get("evolution", {})},
        initial_state=doc.get("initial_state"),
        output_dir=doc.get("output_dir", "out"),
        seed=int(doc.get("seed", 0)),
        options={**OPTION_DEFAULTS, **doc.get("options", {})},
    )


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


# --------------------------------------------------------------------------
# builders

def build_hamiltonian(cfg):
    n = cfg.n_qubits
    h = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for label, coeff in cfg.hamiltonian:
        h += pauli_string(label, coeff)
    return h


def build_channels(cfg):
    out = []
    for c in cfg.channels:
        site = next((i for i, ch in enumerate(c.pauli) if ch != "I"), None)
        out.append(CouplingChannel(pauli_string(c.pauli, c.weight), BathSpec(**c.bath),
                                   c.filter, c.window, site))
    return out


_KETS = {"0": np.array([1.0, 0.0]), "1": np.array([0.0, 1.0]),
         "+": np.array([1.0, 1.0]) / np.sqrt(2), "-": np.array([1.0, -1.0]) / np.sqrt(2)}


def initial_vector(cfg):
    """Product state from ``initial_state`` (default ``|+...+>``)."""
    label = cfg.initial_state or "+" * cfg.n_qubits
    psi = np.array([1.0 + 0j])
    for ch in label:
        psi = np.kron(psi, _KETS[ch])
    return psi
