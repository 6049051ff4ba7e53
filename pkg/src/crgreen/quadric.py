"""Quadric CR submanifolds and their directional Levi forms.

A quadric ``Im w = phi(z, z)`` in C^{dim_z} x C^{codim} is stored as the
``codim`` Hermitian matrices ``A_k`` with ``phi_k(z, z) = z^* A_k z``.  The
directional Levi form in the direction ``nu`` is ``A_nu = sum_k nu_k A_k``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

HERMITIAN_TOL = 1e-12
DIRECTION_TOL = 1e-12


class QuadricError(ValueError):
    """Raised for malformed or inadmissible quadric data."""


@dataclass(frozen=True)
class QuadricForm:
    """The vector-valued Levi form of a quadric submanifold.

    ``matrices`` has shape ``(codim, dim_z, dim_z)``; it is symmetrized and
    made read-only on construction.
    """

    dim_z: int
    codim: int
    matrices: np.ndarray
    name: str = ""
    family: str | None = None
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim_z <= 0:
            raise QuadricError("dim_z must be positive")
        if self.dim_z % 2:
            raise QuadricError(f"odd complex dimension dim_z={self.dim_z}: "
                               "nonvanishing directional eigenvalues force an even dimension")
        if self.codim < 2:
            raise QuadricError(f"codim={self.codim} < 2 is not supported")
        mats = np.asarray(self.matrices, dtype=complex)
        if mats.shape != (self.codim, self.dim_z, self.dim_z):
            raise QuadricError(f"expected {self.codim} matrices of size {self.dim_z}x{self.dim_z}, "
                               f"got array of shape {mats.shape}")
        for k, a in enumerate(mats):
            asym = np.max(np.abs(a - a.conj().T))
            if asym > HERMITIAN_TOL:
                raise QuadricError(f"matrix A_{k + 1} is not Hermitian (max asymmetry {asym:.3e})")
        mats = 0.5 * (mats + np.conj(np.swapaxes(mats, 1, 2)))
        mats.setflags(write=False)
        object.__setattr__(self, "matrices", mats)

    @property
    def n(self) -> int:
        """Half the complex dimension (number of positive eigenvalues)."""
        return self.dim_z // 2


@dataclass(frozen=True)
class Direction:
    nu: np.ndarray

    def __post_init__(self):
        nu = np.asarray(self.nu, dtype=float).reshape(-1)
        if abs(np.linalg.norm(nu) - 1.0) > DIRECTION_TOL:
            raise QuadricError(f"direction {nu} is not a unit vector")
        nu.setflags(write=False)
        object.__setattr__(self, "nu", nu)


@dataclass(frozen=True)
class LeviSpectrum:
    """Eigen-data of ``A_nu``: descending eigenvalues and matching unit eigenvectors."""

    eigenvalues: np.ndarray
    unitary: np.ndarray

    @property
    def positive_set(self) -> tuple[int, ...]:
        return tuple(range(1, len(self.eigenvalues) // 2 + 1))


@dataclass
class SignatureReport:
    passes: bool
    min_abs_eigenvalue: float
    worst_direction: Direction
    n_positive: int
    n_negative: int
    samples_checked: int


def _as_nu(nu) -> np.ndarray:
    if isinstance(nu, Direction):
        return nu.nu
    return np.asarray(nu, dtype=float)


# ---------------------------------------------------------------------------
# file format


def parse_quadric(document: str | dict, name: str = "") -> QuadricForm:
    """Build a :class:`QuadricForm` from a ``.qdrc`` document.

    The document is YAML (JSON is accepted as a subset) with integer fields
    ``dim_z`` and ``codim`` and a ``matrices`` list whose entries are
    ``[re, im]`` pairs.  Optional ``name``, ``family`` and ``parameters``
    fields are carried through unchanged.
    """
    if isinstance(document, str):
        try:
            data = yaml.safe_load(document)
        except yaml.YAMLError as exc:
            raise QuadricError(f"malformed document: {exc}") from exc
    else:
        data = document
    if not isinstance(data, dict):
        raise QuadricError("malformed document: top level must be a mapping")
    try:
        dim_z = int(data["dim_z"])
        codim = int(data["codim"])
        raw = data["matrices"]
    except (KeyError, TypeError, ValueError) as exc:
        raise QuadricError(f"malformed document: missing or invalid field {exc}") from exc
    if dim_z % 2:
        raise QuadricError(f"odd complex dimension dim_z={dim_z}")
    if codim < 2:
        raise QuadricError(f"codim={codim} < 2 is not supported")
    if not isinstance(raw, list) or len(raw) != codim:
        raise QuadricError(f"malformed document: expected {codim} matrices")
    mats = np.zeros((codim, dim_z, dim_z), dtype=complex)
    for k, mat in enumerate(raw):
        if not isinstance(mat, list) or len(mat) != dim_z:
            raise QuadricError(f"malformed document: matrix {k + 1} must have {dim_z} rows")
        for i, row in enumerate(mat):
            if not isinstance(row, list) or len(row) != dim_z:
                raise QuadricError(f"malformed document: matrix {k + 1} row {i + 1} "
                                   f"must have {dim_z} entries")
            for j, entry in enumerate(row):
                try:
                    re, im = entry
                    mats[k, i, j] = complex(float(re), float(im))
                except (TypeError, ValueError) as exc:
                    raise QuadricError(f"malformed document: entry ({k + 1},{i + 1},{j + 1}) "
                                       "must be a [re, im] pair") from exc
    return QuadricForm(dim_z, codim, mats, name=data.get("name", name),
                       family=data.get("family"), parameters=dict(data.get("parameters") or {}))


def load_quadric(path: str | Path) -> QuadricForm:
    path = Path(path)
    return parse_quadric(path.read_text(encoding="utf-8"), name=path.stem)


def dump_quadric(Q: QuadricForm) -> str:
    """Serialize ``Q`` in the ``.qdrc`` format, one matrix row per line (lossless for float64)."""
    head: dict = {}
    if Q.name:
        head["name"] = Q.name
    if Q.family:
        head["family"] = Q.family
    if Q.parameters:
        head["parameters"] = {k: float(v) for k, v in Q.parameters.items()}
    head["dim_z"] = Q.dim_z
    head["codim"] = Q.codim
    lines = [yaml.safe_dump(head, default_flow_style=False, sort_keys=False).rstrip(), "matrices:"]
    for k, mat in enumerate(Q.matrices):
        lines.append(f"  # A_{k + 1}")
        for i, row in enumerate(mat):
            entries = ", ".join(f"[{float(e.real)!r}, {float(e.imag)!r}]" for e in row)
            lines.append(("  - - " if i == 0 else "    - ") + f"[{entries}]")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Levi forms and spectra


def levi_matrix(Q: QuadricForm, nu) -> np.ndarray:
    """``A_nu = sum_k nu_k A_k``; ``nu`` may be a batch of shape ``(N, codim)``.

    Non-unit (and complex) ``nu`` are accepted; the map is linear.
    """
    nu = _as_nu(nu) if not np.iscomplexobj(nu) else np.asarray(nu)
    return np.tensordot(nu, Q.matrices, axes=([-1], [0]))


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    # columns are eigenvectors; make the largest-magnitude entry real positive
    mag = np.abs(vecs)
    top = mag.max(axis=-2, keepdims=True)
    first = np.argmax(mag >= top - 1e-12, axis=-2)
    pivot = np.take_along_axis(vecs, first[..., None, :], axis=-2)
    phase = pivot / np.abs(pivot)
    return vecs / phase


def batch_spectra(Q: QuadricForm, nus: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Descending eigenvalues ``(N, d)`` and phase-fixed unitaries ``(N, d, d)``."""
    mats = levi_matrix(Q, np.atleast_2d(nus))
    try:
        mu, vecs = np.linalg.eigh(mats)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise RuntimeError(f"eigensolver did not converge: {exc}") from exc
    mu = mu[..., ::-1]
    vecs = vecs[..., ::-1]
    return mu, _fix_phases(vecs)


def levi_spectrum(Q: QuadricForm, nu) -> LeviSpectrum:
    mu, vecs = batch_spectra(Q, _as_nu(nu)[None, :])
    return LeviSpectrum(mu[0], vecs[0])


def elementary_symmetric(Q: QuadricForm, nu) -> np.ndarray:
    """E_1..E_d of the eigenvalues, read off the characteristic polynomial.

    The polynomial is built with the Faddeev-LeVerrier recursion on ``A_nu``
    itself, so no eigenvalues are involved; with ``det(A - lambda I) =
    lambda^d + sum (-1)^l E_l lambda^{d-l}`` one gets ``E_l = (-1)^l c_l``.
    """
    a = levi_matrix(Q, nu)
    d = a.shape[-1]
    coeffs = np.zeros(d + 1, dtype=complex)
    coeffs[0] = 1.0
    m = np.zeros_like(a)
    eye = np.eye(d)
    for k in range(1, d + 1):
        m = a @ m + coeffs[k - 1] * eye
        coeffs[k] = -np.trace(a @ m) / k
    signs = (-1.0) ** np.arange(1, d + 1)
    return (signs * coeffs[1:]).real


def elementary_symmetric_from_eigenvalues(mu: Sequence[float]) -> np.ndarray:
    """Brute-force E_l as sums of products over increasing index tuples."""
    mu = list(mu)
    return np.array([sum(math.prod(mu[i] for i in idx) for idx in combinations(range(len(mu)), l))
                     for l in range(1, len(mu) + 1)])


# ---------------------------------------------------------------------------
# sampling of the sphere


def angle_grid(m: int, resolution: int) -> np.ndarray:
    """Unit vectors on S^{m-1} from a product of uniform hyperspherical angle grids."""
    if m == 1:
        return np.array([[1.0], [-1.0]])
    polar = [np.linspace(0.0, np.pi, resolution)] * (m - 2)
    azimuth = np.linspace(0.0, 2 * np.pi, resolution, endpoint=False)
    grids = np.meshgrid(*polar, azimuth, indexing="ij")
    angles = [g.reshape(-1) for g in grids]
    out = np.empty((angles[0].size, m))
    sin_prod = np.ones(angles[0].size)
    for k, ang in enumerate(angles[:-1]):
        out[:, k] = sin_prod * np.cos(ang)
        sin_prod = sin_prod * np.sin(ang)
    out[:, m - 2] = sin_prod * np.cos(angles[-1])
    out[:, m - 1] = sin_prod * np.sin(angles[-1])
    return out


def sample_directions(m: int, resolution: int, seed: int = 0) -> np.ndarray:
    """Angle grid plus ``10 * resolution`` fixed-seed uniform random directions."""
    rng = np.random.default_rng(seed)
    extra = rng.standard_normal((10 * resolution, m))
    extra /= np.linalg.norm(extra, axis=1, keepdims=True)
    return np.vstack([angle_grid(m, resolution), extra])


def verify_nondegenerate(Q: QuadricForm, grid_resolution: int = 32,
                         threshold: float = 1e-6, seed: int = 0) -> SignatureReport:
    """Sample the sphere and check that no eigenvalue of ``A_nu`` comes near zero.

    This is a sampling check, not a proof.  ``passes`` requires the minimum
    ``|eigenvalue|`` to reach ``threshold`` and exactly ``dim_z/2`` positive
    eigenvalues at every sample.
    """
    if grid_resolution < 8:
        raise ValueError("grid_resolution must be at least 8")
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    nus = sample_directions(Q.codim, grid_resolution, seed)
    mu = np.concatenate([batch_spectra(Q, chunk)[0]
                         for chunk in np.array_split(nus, max(1, len(nus) // 20000))])
    absmin = np.abs(mu).min(axis=1)
    worst = int(np.argmin(absmin))
    npos = (mu > 0).sum(axis=1)
    nneg = (mu < 0).sum(axis=1)
    balanced = bool(np.all((npos == Q.n) & (nneg == Q.n)))
    min_abs = float(absmin[worst])
    return SignatureReport(
        passes=balanced and min_abs >= threshold,
        min_abs_eigenvalue=min_abs,
        worst_direction=Direction(nus[worst] / np.linalg.norm(nus[worst])),
        n_positive=int(npos[worst]),
        n_negative=int(nneg[worst]),
        samples_checked=len(nus),
    )


def gamma_set_membership(Q: QuadricForm, L: Sequence[int], grid_resolution: int = 16,
                         seed: int = 0) -> str:
    """Classify the set of directions where exactly the eigenvalues indexed by ``L`` are positive.

    ``L`` holds 1-based indices into the descending eigenvalue order.
    Returns ``"all"``, ``"empty"`` or ``"mixed"`` over the sample.
    """
    L = tuple(L)
    if any(b <= a for a, b in zip(L, L[1:])) or any(l < 1 or l > Q.dim_z for l in L):
        raise ValueError(f"{L} is not an increasing tuple in 1..{Q.dim_z}")
    mu, _ = batch_spectra(Q, sample_directions(Q.codim, grid_resolution, seed))
    want = np.zeros(Q.dim_z, dtype=bool)
    want[[l - 1 for l in L]] = True
    inside = np.all((mu > 0) == want, axis=1)
    if inside.all():
        return "all"
    if not inside.any():
        return "empty"
    return "mixed"
