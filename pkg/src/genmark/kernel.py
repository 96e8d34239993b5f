"""Preorders induced by a bivariate function on a finite set.

For a k x k matrix ``f`` with ``f[x, p] = f(x, p)``, every column gives a
maximized objective ``x -> f(x, p)`` and every row a minimized objective
``y -> f(p, y)``. Elements are 0-based indices.

For each maximal element m the certificate checks, for every p, that

* ``f(m, p)`` is the largest ``f(y, p)`` over y that are no worse than m in
  every column except p and in every row, and
* ``f(p, m)`` is the smallest ``f(p, y)`` over y that are no worse than m in
  every column and in every row except p.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import preorder as po
from .errors import CertificationError, ValidationError


@dataclass(frozen=True)
class KernelInstance:
    f: np.ndarray

    def __post_init__(self):
        f = np.array(self.f, dtype=float)
        if f.ndim != 2 or f.shape[0] != f.shape[1] or f.shape[0] < 1:
            raise ValidationError(f"kernel must be a non-empty square matrix, got shape {f.shape}")
        if not np.all(np.isfinite(f)):
            raise ValidationError("kernel entries must be finite")
        f.setflags(write=False)
        object.__setattr__(self, "f", f)

    @property
    def size(self) -> int:
        return self.f.shape[0]

    def signed(self) -> np.ndarray:
        """Row x holds (f(x, .), -f(., x)): columns maximized, rows negated."""
        return np.hstack([self.f, -self.f.T])

    def as_preorder(self, epsilon: float = 1e-9) -> po.PreorderInstance:
        u = tuple(po.maximize(po.Kind.KERNEL_COLUMN, p=p) for p in range(self.size))
        v = tuple(po.minimize(po.Kind.KERNEL_ROW, p=p) for p in range(self.size))
        return po.PreorderInstance(u, v, kernel=self.f, epsilon=epsilon)


def _check(instance: KernelInstance, *indices):
    for i in indices:
        if not 0 <= i < instance.size:
            raise ValidationError(f"index {i} out of range for a {instance.size}-element kernel")


def kernel_relate(instance: KernelInstance, x: int, y: int, epsilon: float = 1e-9) -> po.DominanceVerdict:
    _check(instance, x, y)
    S = instance.signed()
    return po.classify(S[x], S[y], epsilon)


def kernel_maximal(instance: KernelInstance, epsilon: float = 1e-9) -> list[int]:
    S = instance.signed()
    return [m for m in range(instance.size) if po.strict_dominators(S, m, epsilon).size == 0]


def upper_set(instance: KernelInstance, m: int, skip: int | None = None, epsilon: float = 1e-9) -> set[int]:
    """{y : f(y, q) >= f(m, q) for all q != skip}."""
    f = instance.f
    cols = [q for q in range(instance.size) if q != skip]
    ok = np.all(f[:, cols] >= f[m, cols] - epsilon, axis=1)
    return set(np.flatnonzero(ok).tolist())


def lower_set(instance: KernelInstance, m: int, skip: int | None = None, epsilon: float = 1e-9) -> set[int]:
    """{y : f(q, y) <= f(q, m) for all q != skip}."""
    f = instance.f
    rows = [q for q in range(instance.size) if q != skip]
    ok = np.all(f[rows, :] <= f[rows, m][:, None] + epsilon, axis=0)
    return set(np.flatnonzero(ok).tolist())


@dataclass(frozen=True)
class Certificate:
    m: int
    p: int
    attained_max: float
    attained_min: float
    ok: bool


@dataclass(frozen=True)
class KernelCertification:
    maximal_indices: tuple[int, ...]
    certificates: tuple[Certificate, ...]


def kernel_maximal_certify(instance: KernelInstance, epsilon: float = 1e-9) -> KernelCertification:
    f = instance.f
    maximal = kernel_maximal(instance, epsilon)
    certs = []
    for m in maximal:
        full_up = upper_set(instance, m, epsilon=epsilon)
        full_low = lower_set(instance, m, epsilon=epsilon)
        for p in range(instance.size):
            feasible_max = upper_set(instance, m, skip=p, epsilon=epsilon) & full_low
            feasible_min = full_up & lower_set(instance, m, skip=p, epsilon=epsilon)
            best = max(f[y, p] for y in feasible_max)
            least = min(f[p, y] for y in feasible_min)
            ok = bool(abs(best - f[m, p]) <= epsilon and abs(least - f[p, m]) <= epsilon)
            certs.append(Certificate(m, p, float(best), float(least), ok))
            if not ok:
                raise CertificationError(
                    f"maximal element {m} fails at p={p}: f(m,p)={f[m, p]!r} vs max {best!r}, "
                    f"f(p,m)={f[p, m]!r} vs min {least!r}"
                )
    return KernelCertification(tuple(maximal), tuple(certs))
