"""Second-moment models of a jointly observed pair (x, y) with sensor blocks.

Models hold the matrices E_xx, E_xy, E_yy together with the partition of y
into per-sensor blocks. They are built either from exact matrices, from a
joint Gram factor, or estimated from training samples with the plain
(non-centered) sample estimator ``(1/s) A B^T``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput
from .linalg import _as_matrix


@dataclass(frozen=True)
class SensorPartition:
    """Dimensions (m, n_1..n_p, r_1..r_p) of a p-sensor configuration.

    ``m`` is the source-signal dimension, ``n[j]`` the observation dimension
    at sensor j and ``r[j]`` the number of coordinates sensor j transmits
    (``1 <= r[j] <= n[j]``).
    """

    m: int
    n: tuple[int, ...]
    r: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "n", tuple(int(v) for v in self.n))
        object.__setattr__(self, "r", tuple(int(v) for v in self.r))
        if self.m < 1:
            raise InvalidInput(f"m must be >= 1, got {self.m}")
        if len(self.n) < 1:
            raise InvalidInput("at least one sensor is required")
        if len(self.r) != len(self.n):
            raise InvalidInput("n and r must have one entry per sensor")
        for j, (nj, rj) in enumerate(zip(self.n, self.r)):
            if nj < 1:
                raise InvalidInput(f"n[{j}] must be >= 1, got {nj}")
            if not 1 <= rj <= nj:
                raise InvalidInput(f"need 1 <= r[{j}] <= n[{j}], got r={rj}, n={nj}")

    @property
    def p(self) -> int:
        return len(self.n)

    @property
    def n_total(self) -> int:
        return sum(self.n)

    @property
    def r_total(self) -> int:
        return sum(self.r)

    def y_slice(self, j: int) -> slice:
        """Row/column slice of sensor j inside the stacked observation."""
        start = sum(self.n[:j])
        return slice(start, start + self.n[j])


@dataclass(frozen=True)
class SecondMomentModel:
    """The triple (E_xx, E_xy, E_yy) with sensor-block structure.

    ``provenance`` is ``"exact"`` for analytically known matrices or
    ``"estimated"`` (with ``sample_count``) when built from training samples.
    """

    partition: SensorPartition
    e_xx: np.ndarray
    e_xy: np.ndarray
    e_yy: np.ndarray
    provenance: str = "exact"
    sample_count: int | None = None

    def __post_init__(self):
        m, n = self.partition.m, self.partition.n_total
        if self.e_xx.shape != (m, m):
            raise InvalidInput(f"e_xx must be {m}x{m}, got {self.e_xx.shape}")
        if self.e_xy.shape != (m, n):
            raise InvalidInput(f"e_xy must be {m}x{n}, got {self.e_xy.shape}")
        if self.e_yy.shape != (n, n):
            raise InvalidInput(f"e_yy must be {n}x{n}, got {self.e_yy.shape}")

    def e_xy_block(self, j: int) -> np.ndarray:
        """Columns of E_xy belonging to sensor j (an m x n_j block)."""
        return self.e_xy[:, self.partition.y_slice(j)]

    def e_yy_block(self, i: int, j: int) -> np.ndarray:
        """(i, j) sensor block of E_yy (an n_i x n_j block)."""
        return self.e_yy[self.partition.y_slice(i), self.partition.y_slice(j)]


@dataclass(frozen=True)
class SampleEnsemble:
    """Training samples: one column per draw, rows stacked per sensor."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        if self.x.ndim != 2 or self.y.ndim != 2:
            raise InvalidInput("x and y must be 2-d sample matrices")
        if self.x.shape[1] != self.y.shape[1]:
            raise InvalidInput(
                f"sample counts differ: x has {self.x.shape[1]}, y has {self.y.shape[1]}"
            )
        if self.x.shape[1] < 1:
            raise InvalidInput("at least one sample is required")

    @property
    def s(self) -> int:
        return self.x.shape[1]

    def y_block(self, part: SensorPartition, j: int) -> np.ndarray:
        return self.y[part.y_slice(j)]


def estimate_moments(ens: SampleEnsemble, part: SensorPartition) -> SecondMomentModel:
    """Plain sample second moments ``(1/s) X X^T`` etc., no mean subtraction.

    The estimated E_yy may be rank-deficient when ``s < n_total``; this is
    accepted as-is since every downstream formula uses pseudo-inverses.
    """
    if ens.x.shape[0] != part.m:
        raise InvalidInput(f"x has {ens.x.shape[0]} rows, partition expects {part.m}")
    if ens.y.shape[0] != part.n_total:
        raise InvalidInput(
            f"y has {ens.y.shape[0]} rows, partition expects {part.n_total}"
        )
    s = ens.s
    e_xx = (ens.x @ ens.x.T) / s
    e_xy = (ens.x @ ens.y.T) / s
    e_yy = (ens.y @ ens.y.T) / s
    # remove rounding asymmetry before any eigendecomposition downstream
    e_xx = (e_xx + e_xx.T) / 2.0
    e_yy = (e_yy + e_yy.T) / 2.0
    return SecondMomentModel(
        partition=part,
        e_xx=e_xx,
        e_xy=e_xy,
        e_yy=e_yy,
        provenance="estimated",
        sample_count=s,
    )


def joint_model_from_factor(a, part: SensorPartition) -> SecondMomentModel:
    """Consistent joint model from a factor ``a`` with m + n_total rows.

    The Gram matrix ``a a^T`` is partitioned into (E_xx, E_xy, E_yy), so the
    stacked joint matrix is PSD by construction. Intended as a generator of
    well-posed test models.
    """
    a = _as_matrix(a)
    m, n = part.m, part.n_total
    if a.shape[0] != m + n:
        raise InvalidInput(f"factor must have {m + n} rows, got {a.shape[0]}")
    gram = a @ a.T
    gram = (gram + gram.T) / 2.0
    return SecondMomentModel(
        partition=part,
        e_xx=gram[:m, :m],
        e_xy=gram[:m, m:],
        e_yy=gram[m:, m:],
        provenance="exact",
    )


# Two-sensor benchmark: three-dimensional source observed through additive
# independent noise with per-sensor deviations 0.2 and 0.4.
_EX1_EXX = np.array(
    [
        [0.585, 0.270, 0.390],
        [0.270, 0.405, 0.180],
        [0.390, 0.180, 0.260],
    ]
)
_EX1_SIGMAS = (0.2, 0.4)


def example1_model() -> SecondMomentModel:
    """Exact two-sensor benchmark model (m = 3, n = (3, 3), r = (1, 1)).

    Observations are y_j = x + xi_j with E[xi_j xi_j^T] = sigma_j^2 I, hence
    E_xy = [E_xx, E_xx] and E_yy has E_xx + sigma_j^2 I diagonal blocks.
    """
    part = SensorPartition(m=3, n=(3, 3), r=(1, 1))
    exx = _EX1_EXX.copy()
    s1, s2 = (sig**2 for sig in _EX1_SIGMAS)
    e_xy = np.hstack([exx, exx])
    e_yy = np.block(
        [
            [exx + s1 * np.eye(3), exx],
            [exx, exx + s2 * np.eye(3)],
        ]
    )
    return SecondMomentModel(partition=part, e_xx=exx, e_xy=e_xy, e_yy=e_yy)


def load_ensemble_csv(x_path, y_path, part: SensorPartition) -> SampleEnsemble:
    """Read a training ensemble from two CSV files.

    Each file holds one row per signal component and one column per sample;
    the y file stacks sensor blocks vertically in partition order.
    """
    x = np.atleast_2d(np.loadtxt(x_path, delimiter=",", dtype=np.float64))
    y = np.atleast_2d(np.loadtxt(y_path, delimiter=",", dtype=np.float64))
    ens = SampleEnsemble(x=x, y=y)
    if x.shape[0] != part.m or y.shape[0] != part.n_total:
        raise InvalidInput(
            f"CSV shapes {x.shape}/{y.shape} do not match partition "
            f"(m={part.m}, n_total={part.n_total})"
        )
    return ens
