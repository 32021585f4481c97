"""Parameter hierarchy shared by the clump, tree-embedding and pipeline code."""
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from .errors import HierarchyError, PreconditionError

Q_MIN_LOG2 = -40  # floor for guaranteed cut-density bounds


def _frac(x):
    return x if isinstance(x, Fraction) else Fraction(x).limit_denominator(10**9)


@dataclass
class ParamHierarchy:
    d: int
    epsilon: Fraction = Fraction(1, 2)
    delta_cap: int = 3
    p: Fraction = Fraction(1, 2)
    h: int = 2
    alpha: Fraction = Fraction(1, 8)
    kappa: Fraction = Fraction(1, 16)
    L: int = 2
    gamma: Fraction = Fraction(1, 32)
    mu: Fraction = Fraction(1, 2)
    seed: int = 0
    budget: int = 10**6
    retries: int = 16
    levels: int = 4  # top induction level for the dense embedding
    q_min_log2: int = Q_MIN_LOG2
    strict: bool = False
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        for name in ("epsilon", "p", "alpha", "kappa", "gamma", "mu"):
            v = _frac(getattr(self, name))
            if not 0 < v <= 1:
                raise PreconditionError(f"{name}={v} must lie in (0, 1]")
            setattr(self, name, v)
        for name in ("d", "delta_cap", "h", "L", "levels", "retries"):
            if int(getattr(self, name)) < 1:
                raise PreconditionError(f"{name} must be a positive integer")
            setattr(self, name, int(getattr(self, name)))
        self.warnings = self._ordering_warnings()
        if self.strict and self.warnings:
            raise HierarchyError("; ".join(self.warnings))

    def _ordering_warnings(self):
        # each entry should be strictly larger than the next
        chain = [
            ("min(epsilon, 1/delta_cap)", min(self.epsilon, Fraction(1, self.delta_cap))),
            ("p", self.p),
            ("1/h", Fraction(1, self.h)),
            ("alpha", self.alpha),
            ("kappa", self.kappa),
            ("1/L", Fraction(1, self.L)),
            ("gamma", self.gamma),
            ("1/d", Fraction(1, self.d)),
        ]
        out = []
        for (a, x), (b, y) in zip(chain, chain[1:]):
            if not x > y:
                out.append(f"hierarchy: {a}={x} is not above {b}={y}")
        return out

    @property
    def m(self):
        return math.ceil(Fraction(self.d, self.h))

    @property
    def C(self):
        return 2 + self.epsilon

    @property
    def r(self):
        """Regularity of the clump families: max(1, floor(p^13 m))."""
        return max(1, math.floor(self.p ** 13 * self.m))

    @property
    def q_min(self):
        return Fraction(1, 2 ** -self.q_min_log2)

    def to_json(self):
        out = {}
        for k, v in asdict(self).items():
            out[k] = str(v) if isinstance(v, Fraction) else v
        out["m"] = self.m
        out["r"] = self.r
        return out


def log2_factorial(n):
    return math.lgamma(n + 1) / math.log(2)


def clamp_log2(log2_val, floor_log2=Q_MIN_LOG2):
    """2^log2_val as a Fraction rounded down, clamped at 2^floor_log2.

    Returns (value, below_floor).
    """
    if log2_val >= 0:
        return Fraction(1), False
    if log2_val < floor_log2:
        return Fraction(1, 2 ** -floor_log2), True
    # round down so the guarantee stays a lower bound
    return Fraction(math.floor(2.0 ** (log2_val + 62)), 2 ** 62), False


def clamped_power_bound(base, log2_exponent_factor, floor_log2=Q_MIN_LOG2):
    """base ** E with log2(E) given, clamped at 2^floor_log2.

    Works in log space so towers like kappa^((10k)!) never underflow.
    """
    base = Fraction(base)
    if base >= 1:
        return Fraction(1), False
    log2_val = math.log2(base) * 2.0 ** log2_exponent_factor if log2_exponent_factor < 1000 else -math.inf
    return clamp_log2(log2_val, floor_log2)


def kappa_tower(kappa, k, floor_log2=Q_MIN_LOG2):
    """kappa^((10k)!) clamped at the floor."""
    return clamped_power_bound(kappa, log2_factorial(10 * k), floor_log2)


def overlap_threshold(kappa, k, m):
    """Vertices two clumps must share in their D-sets: kappa^(6 (10k)!) m, at least 1."""
    factor = math.log2(6) + log2_factorial(10 * k)
    log2_val = math.log2(kappa) * 2.0 ** factor + math.log2(m) if factor < 1000 else -math.inf
    if log2_val <= 0:
        return 1
    return max(1, math.ceil(2.0 ** log2_val))
