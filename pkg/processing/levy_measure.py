"""
Parametric Lévy measure families

Three families with closed-form moment functionals and exact tail samplers:

    TwoPointSymmetric(eps0)          (2 eps0^2)^-1 (delta_{eps0} + delta_{-eps0})
    TruncatedStableLike(alpha, c, R) c |z|^(-1-alpha) 1{0 < |z| <= R} dz
    CompoundPoissonAtoms(atoms)      sum_j lambda_j delta_{z_j}

All functionals are expressed through the mass / moments of ``nu`` on a band
``{lo < |z| <= hi}``; the small-jump region is the band ``(0, eps]`` and the
tail is ``(eps, inf)``.
"""
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate

from core.exceptions import (
    DegenerateSmallJumps,
    EmptyTail,
    InfiniteMoment,
    ValidationError,
)

INF = math.inf


class LevyMeasureSpec(ABC):
    """Base class for all Lévy measure families"""

    family: str = "abstract"

    @abstractmethod
    def band_mass(self, lo: float, hi: float = INF) -> float:
        """nu({lo < |z| <= hi}); infinite when the band reaches an accumulation point"""

    @abstractmethod
    def band_abs_moment(self, k: float, lo: float = 0.0, hi: float = INF) -> float:
        """Integral of |z|^k over {lo < |z| <= hi}"""

    @abstractmethod
    def band_first_moment(self, lo: float = 0.0, hi: float = INF) -> float:
        """Signed integral of z over {lo < |z| <= hi}"""

    @abstractmethod
    def sample_band(self, lo: float, hi: float, size: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``size`` values from nu restricted to the band, normalised"""

    @abstractmethod
    def support_radius(self) -> float:
        """sup{|z| : z in supp nu}, 0 for the null measure"""

    def total_mass(self) -> float:
        return self.band_mass(0.0, INF)

    @property
    def is_finite_activity(self) -> bool:
        return math.isfinite(self.total_mass())

    @property
    def is_symmetric(self) -> bool:
        return False

    def to_dict(self) -> Dict[str, Any]:
        return {'family': self.family}


@dataclass(frozen=True)
class TwoPointSymmetric(LevyMeasureSpec):
    """mu_{eps0}: atoms at +-eps0 of weight (2 eps0^2)^-1 each, so m2 = 1"""

    eps0: float
    family: str = field(default="two-point", init=False)

    def __post_init__(self):
        if not self.eps0 > 0:
            raise ValidationError(f"eps0 must be positive, got {self.eps0}")

    @property
    def atom_weight(self) -> float:
        return 1.0 / (2.0 * self.eps0 * self.eps0)

    def _in_band(self, lo: float, hi: float) -> bool:
        return lo < self.eps0 <= hi

    def band_mass(self, lo: float, hi: float = INF) -> float:
        return 2.0 * self.atom_weight if self._in_band(lo, hi) else 0.0

    def band_abs_moment(self, k: float, lo: float = 0.0, hi: float = INF) -> float:
        return self.eps0 ** (k - 2) if self._in_band(lo, hi) else 0.0

    def band_first_moment(self, lo: float = 0.0, hi: float = INF) -> float:
        return 0.0

    def sample_band(self, lo: float, hi: float, size: int, rng: np.random.Generator) -> np.ndarray:
        if not self._in_band(lo, hi):
            raise EmptyTail(f"no mass of {self!r} in ({lo}, {hi}]")
        signs = rng.integers(0, 2, size=size) * 2 - 1
        return self.eps0 * signs.astype(float)

    def support_radius(self) -> float:
        return self.eps0

    @property
    def is_symmetric(self) -> bool:
        return True

    def to_dict(self) -> Dict[str, Any]:
        return {'family': self.family, 'eps0': self.eps0}


@dataclass(frozen=True)
class TruncatedStableLike(LevyMeasureSpec):
    """c |z|^(-1-alpha) dz on 0 < |z| <= cutoff; infinite activity, finite m2"""

    alpha: float
    c: float = 1.0
    cutoff: float = 1.0
    family: str = field(default="stable-like", init=False)

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ValidationError(f"alpha must lie in (0, 2), got {self.alpha}")
        if not self.c > 0 or not self.cutoff > 0:
            raise ValidationError("scale c and cutoff R must be positive")

    def _clip(self, lo: float, hi: float) -> Tuple[float, float]:
        return max(lo, 0.0), min(hi, self.cutoff)

    def band_mass(self, lo: float, hi: float = INF) -> float:
        lo, hi = self._clip(lo, hi)
        if lo >= hi:
            return 0.0
        if lo == 0.0:
            return INF
        a = self.alpha
        return 2.0 * self.c * (lo ** -a - hi ** -a) / a

    def band_abs_moment(self, k: float, lo: float = 0.0, hi: float = INF) -> float:
        lo, hi = self._clip(lo, hi)
        if lo >= hi:
            return 0.0
        e = k - self.alpha
        if e == 0:
            if lo == 0.0:
                raise InfiniteMoment(f"moment of order {k} diverges at 0 for alpha={self.alpha}")
            return 2.0 * self.c * math.log(hi / lo)
        if e < 0 and lo == 0.0:
            raise InfiniteMoment(f"moment of order {k} diverges at 0 for alpha={self.alpha}")
        return 2.0 * self.c * (hi ** e - lo ** e) / e

    def band_first_moment(self, lo: float = 0.0, hi: float = INF) -> float:
        return 0.0

    def sample_band(self, lo: float, hi: float, size: int, rng: np.random.Generator) -> np.ndarray:
        lo, hi = self._clip(lo, hi)
        if lo >= hi:
            raise EmptyTail(f"no mass of {self!r} in ({lo}, {hi}]")
        if lo == 0.0:
            raise EmptyTail("cannot sample a band of infinite mass")
        a = self.alpha
        u = rng.random(size)
        # inverse CDF of the normalised magnitude law on (lo, hi]
        magnitude = (lo ** -a - u * (lo ** -a - hi ** -a)) ** (-1.0 / a)
        signs = rng.integers(0, 2, size=size) * 2 - 1
        return magnitude * signs

    def support_radius(self) -> float:
        return self.cutoff

    @property
    def is_symmetric(self) -> bool:
        return True

    def to_dict(self) -> Dict[str, Any]:
        return {'family': self.family, 'alpha': self.alpha, 'c': self.c, 'cutoff': self.cutoff}


@dataclass(frozen=True)
class CompoundPoissonAtoms(LevyMeasureSpec):
    """Finite sum of weighted atoms; the empty tuple is the null measure"""

    atoms: Tuple[Tuple[float, float], ...] = ()
    family: str = field(default="atoms", init=False)

    def __post_init__(self):
        atoms = tuple((float(z), float(lam)) for z, lam in self.atoms)
        for z, lam in atoms:
            if z == 0.0:
                raise ValidationError("atom locations must be non-zero")
            if not lam > 0:
                raise ValidationError(f"atom rate must be positive, got {lam}")
        object.__setattr__(self, 'atoms', atoms)

    @classmethod
    def ladder(cls, alpha: float, levels: int, c: float = 1.0) -> "CompoundPoissonAtoms":
        """Dyadic discretisation of c|z|^(-1-alpha) on (2^-levels, 1]: shell (2^-k-1, 2^-k] lumped at +-2^-k"""
        atoms = []
        for k in range(levels):
            rate = c * (2.0 ** ((k + 1) * alpha) - 2.0 ** (k * alpha)) / alpha
            atoms.append((2.0 ** -k, rate))
            atoms.append((-(2.0 ** -k), rate))
        return cls(tuple(atoms))

    def _selected(self, lo: float, hi: float):
        return [(z, lam) for z, lam in self.atoms if lo < abs(z) <= hi]

    def band_mass(self, lo: float, hi: float = INF) -> float:
        return float(sum(lam for _, lam in self._selected(lo, hi)))

    def band_abs_moment(self, k: float, lo: float = 0.0, hi: float = INF) -> float:
        return float(sum(lam * abs(z) ** k for z, lam in self._selected(lo, hi)))

    def band_first_moment(self, lo: float = 0.0, hi: float = INF) -> float:
        return float(sum(lam * z for z, lam in self._selected(lo, hi)))

    def band_atoms(self, lo: float, hi: float) -> Tuple[np.ndarray, np.ndarray]:
        selected = self._selected(lo, hi)
        if not selected:
            return np.empty(0), np.empty(0)
        z, lam = zip(*selected)
        return np.asarray(z, dtype=float), np.asarray(lam, dtype=float)

    def sample_band(self, lo: float, hi: float, size: int, rng: np.random.Generator) -> np.ndarray:
        z, lam = self.band_atoms(lo, hi)
        if z.size == 0:
            raise EmptyTail(f"no atoms in ({lo}, {hi}]")
        return z[rng.choice(z.size, size=size, p=lam / lam.sum())]

    def support_radius(self) -> float:
        return max((abs(z) for z, _ in self.atoms), default=0.0)

    @property
    def is_symmetric(self) -> bool:
        rates = {z: lam for z, lam in self.atoms}
        return all(rates.get(-z) == lam for z, lam in self.atoms)

    def to_dict(self) -> Dict[str, Any]:
        return {'family': self.family, 'atoms': [list(a) for a in self.atoms]}


@dataclass(frozen=True)
class MomentQuery:
    """Order k >= 2 and truncation level; eps=None asks for the untruncated moment"""

    k: float
    eps: Optional[float] = None

    def __post_init__(self):
        if self.k < 2:
            raise ValidationError(f"moment order must be >= 2, got {self.k}")
        if self.eps is not None and not self.eps > 0:
            raise ValidationError(f"truncation level must be positive, got {self.eps}")


def _check_eps(eps: float):
    if not eps > 0:
        raise ValidationError(f"eps must be positive, got {eps}")


def tail_mass(spec: LevyMeasureSpec, eps: float) -> float:
    """F_eps(nu) = nu({|z| > eps})"""
    _check_eps(eps)
    return spec.band_mass(eps, INF)


def tail_first_moment(spec: LevyMeasureSpec, eps: float) -> float:
    """Integral of z over {|z| > eps}; zero for symmetric families"""
    _check_eps(eps)
    return spec.band_first_moment(eps, INF)


def moment(spec: LevyMeasureSpec, q: MomentQuery) -> float:
    """m_k(nu), or m_{k,eps}(nu) over {|z| <= eps} when q.eps is set"""
    hi = INF if q.eps is None else q.eps
    value = spec.band_abs_moment(q.k, 0.0, hi)
    if not math.isfinite(value):
        raise InfiniteMoment(f"m_{q.k} of {spec!r} is infinite")
    return value


def delta_eps(spec: LevyMeasureSpec, eps: float) -> float:
    """delta_eps(nu) = m_{4,eps} / m_{2,eps}, a weighted mean of z^2 over |z| <= eps"""
    _check_eps(eps)
    m2 = spec.band_abs_moment(2, 0.0, eps)
    if m2 <= 0.0:
        raise DegenerateSmallJumps(f"no small-jump mass of {spec!r} below {eps}")
    return spec.band_abs_moment(4, 0.0, eps) / m2


def sample_large_jump(spec: LevyMeasureSpec, eps: float, rng: np.random.Generator,
                      size: Optional[int] = None) -> Union[float, np.ndarray]:
    """Draw from nu(dz) 1{|z| > eps} / F_eps(nu); a scalar when size is None"""
    if tail_mass(spec, eps) <= 0.0:
        raise EmptyTail(f"F_eps(nu) = 0 for {spec!r} at eps={eps}")
    draws = spec.sample_band(eps, INF, 1 if size is None else size, rng)
    return float(draws[0]) if size is None else draws


def quadrature_moment(spec: LevyMeasureSpec, k: float, lo: float = 0.0, hi: float = INF) -> float:
    """Numerical oracle for band_abs_moment: adaptive quadrature / direct atom summation"""
    if isinstance(spec, TruncatedStableLike):
        lo, hi = max(lo, 0.0), min(hi, spec.cutoff)
        if lo >= hi:
            return 0.0
        value, _ = integrate.quad(lambda z: z ** (k - 1 - spec.alpha), lo, hi,
                                  epsabs=0.0, epsrel=1e-12, limit=200)
        return 2.0 * spec.c * value
    if isinstance(spec, TwoPointSymmetric):
        atoms = [(spec.eps0, spec.atom_weight), (-spec.eps0, spec.atom_weight)]
    else:
        atoms = list(spec.atoms)
    return float(sum(lam * abs(z) ** k for z, lam in atoms if lo < abs(z) <= hi))


def quadrature_mass(spec: LevyMeasureSpec, lo: float, hi: float = INF) -> float:
    """Numerical oracle for band_mass"""
    if isinstance(spec, TruncatedStableLike):
        lo, hi = max(lo, 0.0), min(hi, spec.cutoff)
        if lo >= hi:
            return 0.0
        value, _ = integrate.quad(lambda z: z ** (-1 - spec.alpha), lo, hi,
                                  epsabs=0.0, epsrel=1e-12, limit=200)
        return 2.0 * spec.c * value
    return quadrature_moment(spec, 0, lo, hi)


def build_measure(family: str, eps0: float = 0.1, alpha: float = 1.5, c: float = 1.0,
                  cutoff: float = 1.0, atoms: Sequence[Tuple[float, float]] = (),
                  levels: int = 0) -> LevyMeasureSpec:
    """Construct a measure from experiment-config values"""
    if family == 'two-point':
        return TwoPointSymmetric(eps0)
    if family == 'stable-like':
        return TruncatedStableLike(alpha, c, cutoff)
    if family == 'atoms':
        return CompoundPoissonAtoms(tuple(atoms))
    if family == 'ladder':
        return CompoundPoissonAtoms.ladder(alpha, levels or 12, c)
    if family == 'none':
        return CompoundPoissonAtoms(())
    raise ValidationError(f"unknown measure family: {family}")
