"""Experiment configuration documents (JSON) and their validation."""
import hashlib
import json
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .errors import DomainError
from .field_model import LAW_KINDS, AngularPowerSpectrum, CoefficientLaw
from .repr_core import EulerRotation

COMMANDS = ("simulate", "test")
EXPERIMENTS = ("independence", "invariance", "gaussianity")
SPACES = ("sphere", "torus")


@dataclass
class ExperimentConfig:
    """One experiment or simulation.

    ``spectrum`` is either an explicit list ``[lambda_0, ..., lambda_L]`` or
    ``{"amplitude": C, "slope": s}`` for ``C (1 + l)^-s``. ``rotation`` is an
    Euler triple or ``"search"``, which picks an assumption witness from
    :func:`isofield.repr_core.search_witness` keyed by ``search_seed``.
    """

    command: str = "test"
    experiment: str = "independence"
    space: str = "sphere"
    lmax: int = 2
    degree: int = None
    k_max: int = 3
    spectrum: object = None
    law: str = "ComplexGaussian"
    rotation: object = "search"
    search_seed: int = 0
    theta_shift: float = 1.0
    orders: list = None
    probes: list = None
    selection: list = None
    n: int = 2000
    n_perm: int = 99
    n_runs: int = 1
    alpha: float = 0.05
    seed: int = 0
    include_monopole: bool = False
    output: str = None

    def __post_init__(self):
        self.validate()

    # -- construction ---------------------------------------------------------

    @classmethod
    def from_dict(cls, doc):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise DomainError(f"unknown config keys: {unknown}")
        return cls(**doc)

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DomainError(f"config is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise DomainError("config must be a JSON object")
        return cls.from_dict(doc)

    def to_dict(self):
        return asdict(self)

    def canonical_json(self):
        d = self.to_dict()
        d.pop("output", None)
        return json.dumps(d, sort_keys=True, separators=(",", ":"))

    def config_hash(self):
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]

    @staticmethod
    def suite_hash(doc):
        text = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def with_seed(self, seed):
        return replace(self, seed=int(seed))

    # -- validation -------------------------------------------------------------

    def validate(self):
        if self.command not in COMMANDS:
            raise DomainError(f"command must be one of {COMMANDS}")
        if self.experiment not in EXPERIMENTS:
            raise DomainError(f"experiment must be one of {EXPERIMENTS}")
        if self.space not in SPACES:
            raise DomainError(f"space must be one of {SPACES}")
        if self.law not in LAW_KINDS:
            raise DomainError(f"unknown law {self.law!r}; expected one of {LAW_KINDS}")
        for name in ("lmax", "k_max", "n", "n_perm", "n_runs", "seed", "search_seed"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 0:
                raise DomainError(f"{name} must be a nonnegative integer")
        if self.degree is not None and not (1 <= self.degree):
            raise DomainError("degree must be >= 1")
        if self.n_runs < 1:
            raise DomainError("n_runs must be >= 1")
        if self.command == "test" and self.n_perm < 99:
            raise DomainError("n_perm must be >= 99")
        if not (0.0 < self.alpha < 1.0):
            raise DomainError("alpha must lie in (0, 1)")
        if self.command == "test" and self.n < 20:
            raise DomainError("n must be >= 20 for tests")
        self.spectrum_obj()
        if self.rotation != "search":
            self.rotation_obj()
        if self.orders is not None:
            if len(self.orders) != 2 or not (0 <= self.orders[0] < self.orders[1]):
                raise DomainError("orders must be [m1, m2] with 0 <= m1 < m2")
            top = self.k_max if self.space == "torus" else self.block_degree
            if self.orders[1] > top:
                raise DomainError("orders exceed the degree")
        if self.selection is not None:
            for item in self.selection:
                if len(item) != 2 or not (0 <= item[1] <= item[0] <= self.lmax):
                    raise DomainError(f"bad selection entry {item}; need [l, m] with 0 <= m <= l <= lmax")

    # -- typed views --------------------------------------------------------------

    @property
    def block_degree(self):
        return self.lmax if self.degree is None else self.degree

    def law_obj(self):
        return CoefficientLaw(self.law)

    def spectrum_obj(self, top=None):
        if top is None:
            top = self.k_max if self.space == "torus" else self.lmax
        s = self.spectrum
        if s is None:
            return AngularPowerSpectrum(tuple(np.ones(top + 1)))
        if isinstance(s, dict):
            extra = set(s) - {"amplitude", "slope"}
            if extra:
                raise DomainError(f"unknown spectrum keys {sorted(extra)}")
            return AngularPowerSpectrum.power_law(top, s.get("amplitude", 1.0), s.get("slope", 2.0))
        spec = AngularPowerSpectrum(tuple(s))
        if spec.lmax < top:
            raise DomainError(f"spectrum has {spec.lmax + 1} entries, need {top + 1}")
        return spec

    def rotation_obj(self):
        r = self.rotation
        if not isinstance(r, (list, tuple)) or len(r) != 3:
            raise DomainError('rotation must be an Euler triple or "search"')
        return EulerRotation(*[float(v) for v in r])

