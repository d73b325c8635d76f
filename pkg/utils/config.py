"""
Configuration Module for Superform Lab

This module provides the Scenario: the parameters of one verification run,
read from a flat ``key = value`` file and overridden by command-line flags.

Example scenario file::

    # rank-3 lattice run
    suite = lattice
    n = 3
    base_dim = 5
    jet_order = 1
    t = 0.5, 1, 2
"""

import logging
from dataclasses import asdict, dataclass, fields, replace
from fractions import Fraction

from core.errors import ScenarioError
from core.scalars import ScalarMode

logger = logging.getLogger(__name__)

SUITE_NAMES = ("exact-identities", "jets", "thom", "lattice", "phi", "torsion", "fock")
ALL_SUITES = "all"
RADIUS_AUTO = "auto"

# Desk-scale limits
MAX_RANK = 4
MAX_JET_ORDER = 3

# Suites whose checks take d of forms known to order K - 1, so they need K >= 2
DERIVATIVE_SUITES = ("exact-identities", "jets", "thom", "torsion")

# Keys kept out of the report payload (they do not change any result)
RUNTIME_KEYS = ("report", "csv_dir", "workers")


def _number(text):
    """int when the text is an integer, Fraction for p/q, float otherwise."""
    text = str(text).strip()
    try:
        return int(text)
    except ValueError:
        pass
    if "/" in text:
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as error:
            raise ScenarioError(f"bad number {text!r}") from error
    try:
        return float(text)
    except ValueError as error:
        raise ScenarioError(f"bad number {text!r}") from error


def _number_list(text):
    if isinstance(text, (list, tuple)):
        return tuple(float(_number(v)) for v in text)
    parts = [p for p in str(text).replace(";", ",").split(",") if p.strip()]
    if not parts:
        raise ScenarioError("empty list of values")
    return tuple(float(_number(p)) for p in parts)


def _integer(text):
    value = _number(text)
    if not isinstance(value, int):
        raise ScenarioError(f"expected an integer, got {text!r}")
    return value


def _optional_integer(text):
    if text is None or str(text).strip().lower() in ("", "none", "auto"):
        return None
    return _integer(text)


def _radius(text):
    if str(text).strip().lower() == RADIUS_AUTO:
        return RADIUS_AUTO
    value = float(_number(text))
    if value <= 0:
        raise ScenarioError(f"radius must be positive, got {value}")
    return value


def _text(text):
    return None if text is None else str(text).strip()


CONVERTERS = {
    "suite": _text,
    "n": _integer,
    "base_dim": _optional_integer,
    "jet_order": _optional_integer,
    "mode": _text,
    "seed": _integer,
    "t": _number_list,
    "s": _number_list,
    "lattice_scale": _number,
    "radius": _radius,
    "tolerance": lambda text: float(_number(text)),
    "floor": lambda text: float(_number(text)),
    "report": _text,
    "csv_dir": _text,
    "workers": _optional_integer,
}

ALIASES = {"m": "base_dim", "k": "jet_order", "tol": "tolerance", "c": "lattice_scale", "csv": "csv_dir"}


@dataclass(frozen=True)
class Scenario:
    """
    Parameters of one run.

    Args:
        suite (str): one of SUITE_NAMES or "all"
        n (int): fiber rank N
        base_dim (int): m, defaults to 2N - 1
        jet_order (int): K, defaults to 3 for N <= 2 and 2 otherwise
        mode (str): "exact" or "float"
        seed (int): seed of every random germ
        t (tuple): times at which t-dependent identities are checked
        s (tuple): points at which φ(s) is compared
        lattice_scale: c, with Λ = cZ^N
        radius: "auto" or a fixed lattice window radius
        tolerance (float): default pass threshold of float checks
        floor (float): magnitude below which integrands and fitted sums count as zero
        report (str): report file path
        csv_dir (str): directory for CSV traces
        workers (int): worker cap (None: from the CPU count)
    """

    suite: str = ALL_SUITES
    n: int = 1
    base_dim: int = None
    jet_order: int = None
    mode: str = ScalarMode.FLOAT.value
    seed: int = 1
    t: tuple = (1.0,)
    s: tuple = (-5.0,)
    lattice_scale: object = 1
    radius: object = RADIUS_AUTO
    tolerance: float = 1e-10
    floor: float = 1e-30
    report: str = None
    csv_dir: str = None
    workers: int = None

    def __post_init__(self):
        if self.suite != ALL_SUITES and self.suite not in SUITE_NAMES:
            raise ScenarioError(f"unknown suite {self.suite!r}; choose from {', '.join(SUITE_NAMES)} or all")
        if not 1 <= self.n <= MAX_RANK:
            raise ScenarioError(f"N must lie in 1..{MAX_RANK}, got {self.n}")
        if self.base_dim is not None and self.base_dim < 1:
            raise ScenarioError(f"base dimension must be positive, got {self.base_dim}")
        if self.jet_order is not None and not 1 <= self.jet_order <= MAX_JET_ORDER:
            raise ScenarioError(f"jet order must lie in 1..{MAX_JET_ORDER}, got {self.jet_order}")
        if self.mode not in (ScalarMode.EXACT.value, ScalarMode.FLOAT.value):
            raise ScenarioError(f"mode must be exact or float, got {self.mode!r}")
        if any(t <= 0 for t in self.t):
            raise ScenarioError(f"t values must be positive, got {self.t}")
        if self.lattice_scale <= 0:
            raise ScenarioError(f"lattice scale must be positive, got {self.lattice_scale}")
        if self.tolerance <= 0:
            raise ScenarioError(f"tolerance must be positive, got {self.tolerance}")
        if self.floor < 0:
            raise ScenarioError(f"floor must not be negative, got {self.floor}")
        needs_derivatives = [s for s in self.suites if s in DERIVATIVE_SUITES]
        if self.order < 2 and needs_derivatives:
            raise ScenarioError(f"suites {', '.join(needs_derivatives)} take d-checks and need jet order K >= 2, "
                                f"got K={self.order}")
        if self.workers is not None and self.workers < 1:
            raise ScenarioError(f"workers must be at least 1, got {self.workers}")

    @property
    def m(self):
        return self.base_dim if self.base_dim is not None else 2 * self.n - 1

    @property
    def order(self):
        if self.jet_order is not None:
            return self.jet_order
        return 3 if self.n <= 2 else 2

    @property
    def scalar_mode(self):
        return ScalarMode(self.mode)

    @property
    def suites(self):
        return SUITE_NAMES if self.suite == ALL_SUITES else (self.suite,)

    @property
    def fixed_radius(self):
        return None if self.radius == RADIUS_AUTO else float(self.radius)

    def with_suite(self, suite):
        return replace(self, suite=suite)

    def to_payload(self):
        """The scenario as stored in the report payload (runtime keys left out)."""
        data = asdict(self)
        for key in RUNTIME_KEYS:
            data.pop(key)
        data["t"] = list(self.t)
        data["s"] = list(self.s)
        data["lattice_scale"] = str(self.lattice_scale)
        data["m"] = self.m
        data["K"] = self.order
        return data


def parse_scenario_text(text, source="<scenario>"):
    """
    Parse ``key = value`` lines into raw strings.

    Raises:
        ScenarioError: malformed line, unknown or repeated key
    """
    values = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"{source}:{number}: expected key = value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = ALIASES.get(key.lower().replace("-", "_"), key.lower().replace("-", "_"))
        if key not in CONVERTERS:
            raise ScenarioError(f"{source}:{number}: unknown key {key!r}")
        if key in values:
            raise ScenarioError(f"{source}:{number}: key {key!r} given twice")
        values[key] = value
    return values


def load_scenario_file(path):
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as error:
        raise ScenarioError(f"cannot read scenario {path}: {error}") from error
    return parse_scenario_text(text, str(path))


def build_scenario(file_values=None, overrides=None):
    """
    Scenario from file values with command-line overrides on top.

    Args:
        file_values (dict): raw values from ``load_scenario_file``
        overrides (dict): flag values; None entries are ignored

    Raises:
        ScenarioError: a value does not convert or the scenario is invalid
    """
    merged = dict(file_values or {})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    known = {f.name for f in fields(Scenario)}
    converted = {}
    for key, value in merged.items():
        if key not in known:
            raise ScenarioError(f"unknown scenario key {key!r}")
        try:
            converted[key] = CONVERTERS[key](value)
        except ScenarioError as error:
            raise ScenarioError(f"{key}: {error}") from error
    scenario = Scenario(**converted)
    logger.debug("scenario %s", scenario)
    return scenario
