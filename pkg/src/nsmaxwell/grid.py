"""Periodic spectral grid and R^3-valued Fourier fields in d = 2 or 3.

Fields are stored as complex Fourier amplitudes ``c[comp, m1, ..., md]`` in
numpy FFT layout, with the convention ``u(x) = sum_k c(k) exp(i k.x)`` and
wavevectors ``k = (2 pi / L) m``.  All fields are R^3-valued regardless of
the spatial dimension; in d=2 the derivative convention is
``grad = (d1, d2, 0)`` and ``curl F = (d2 F3, -d1 F3, d1 F2 - d2 F1)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid",
    "SpectralField",
    "VectorOpKind",
    "apply_diff",
    "gradient_component",
    "divergence",
    "curl",
    "laplacian",
    "leray_project",
    "pointwise_product",
    "lp_norm_physical",
]


class VectorOpKind(enum.Enum):
    GRADIENT_COMPONENT = "gradient-component"
    DIVERGENCE = "divergence"
    CURL = "curl"
    LAPLACIAN = "laplacian"


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """d-dimensional periodic grid with n points per axis and period L."""

    d: int
    n: int
    box_length: float = 2.0 * np.pi

    def __post_init__(self):
        if self.d not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {self.d}")
        if self.n < 8 or not _is_power_of_two(self.n):
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")
        if self.box_length <= 0:
            raise ValueError("box_length must be positive")

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.d

    @property
    def spatial_axes(self) -> tuple:
        return tuple(range(1, self.d + 1))

    @property
    def k0(self) -> float:
        """Smallest positive wavevector magnitude, 2 pi / L."""
        return 2.0 * np.pi / self.box_length

    def mode_indices(self) -> list:
        """Integer mode numbers m per axis in FFT order."""
        m = np.fft.fftfreq(self.n, d=1.0 / self.n)
        return [m] * self.d

    def wavevectors(self) -> list:
        """Per-axis wavevector arrays k_i broadcast over the grid shape.

        Returns three arrays; in d=2 the third is identically zero
        (the 2D convention grad = (d1, d2, 0)).
        """
        m = np.fft.fftfreq(self.n, d=1.0 / self.n) * self.k0
        ks = list(np.meshgrid(*([m] * self.d), indexing="ij"))
        if self.d == 2:
            ks.append(np.zeros(self.shape))
        return ks

    def k_squared(self) -> np.ndarray:
        k1, k2, k3 = self.wavevectors()
        return k1**2 + k2**2 + k3**2

    def k_magnitude(self) -> np.ndarray:
        return np.sqrt(self.k_squared())

    def nyquist_mask(self) -> np.ndarray:
        """Boolean mask, True on modes with m = -n/2 along any axis."""
        m = np.fft.fftfreq(self.n, d=1.0 / self.n)
        bad = m == -self.n // 2
        mask = np.zeros(self.shape, dtype=bool)
        for ax in range(self.d):
            shape = [1] * self.d
            shape[ax] = self.n
            mask |= bad.reshape(shape)
        return mask

    def dealias_mask(self) -> np.ndarray:
        """Boolean mask, True on modes killed by the 2/3 rule (|m| > n/3)."""
        m = np.fft.fftfreq(self.n, d=1.0 / self.n)
        bad = np.abs(m) > self.n / 3.0
        mask = np.zeros(self.shape, dtype=bool)
        for ax in range(self.d):
            shape = [1] * self.d
            shape[ax] = self.n
            mask |= bad.reshape(shape)
        return mask


def _conjugate_reflect(coeffs: np.ndarray, d: int) -> np.ndarray:
    """conj(c(-k)) with FFT index layout, componentwise."""
    out = coeffs
    for ax in range(1, d + 1):
        out = np.roll(np.flip(out, axis=ax), 1, axis=ax)
    return np.conj(out)


@dataclass
class SpectralField:
    """R^3-valued field as complex Fourier amplitudes on a Grid.

    ``coeffs`` has shape (3, n, ..., n).  Real fields satisfy the Hermitian
    symmetry c(-k) = conj(c(k)); Nyquist rows are kept identically zero.
    """

    grid: Grid
    coeffs: np.ndarray

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralField":
        return cls(grid, np.zeros((3,) + grid.shape, dtype=np.complex128))

    @classmethod
    def from_physical(cls, grid: Grid, values: np.ndarray) -> "SpectralField":
        """Forward transform of real physical values, shape (3, n, ..., n)."""
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (3,) + grid.shape:
            raise ValueError(f"expected shape {(3,) + grid.shape}, got {values.shape}")
        c = np.fft.fftn(values, axes=grid.spatial_axes) / grid.n**grid.d
        f = cls(grid, c)
        f.zero_nyquist()
        return f

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy())

    def to_physical(self) -> np.ndarray:
        """Inverse transform; returns the real part (imaginary part is
        roundoff for Hermitian-symmetric coefficients)."""
        u = np.fft.ifftn(self.coeffs, axes=self.grid.spatial_axes) * self.grid.n**self.grid.d
        return u.real

    def physical_imag_max(self) -> float:
        u = np.fft.ifftn(self.coeffs, axes=self.grid.spatial_axes) * self.grid.n**self.grid.d
        return float(np.max(np.abs(u.imag)))

    def zero_nyquist(self) -> None:
        self.coeffs[:, self.grid.nyquist_mask()] = 0.0

    def dealias(self) -> None:
        self.coeffs[:, self.grid.dealias_mask()] = 0.0

    def enforce_hermitian(self) -> None:
        self.coeffs = 0.5 * (self.coeffs + _conjugate_reflect(self.coeffs, self.grid.d))

    def hermitian_defect(self) -> float:
        return float(
            np.max(np.abs(self.coeffs - _conjugate_reflect(self.coeffs, self.grid.d)))
        )

    def mean(self) -> np.ndarray:
        """The k=0 amplitude triple (spatial mean of the field)."""
        zero = (0,) * self.grid.d
        return self.coeffs[(slice(None),) + zero].real.copy()

    def set_mean(self, value) -> None:
        zero = (0,) * self.grid.d
        self.coeffs[(slice(None),) + zero] = np.asarray(value, dtype=np.complex128)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self, other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self, other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__


def _check_same_grid(a: SpectralField, b: SpectralField) -> None:
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")


def gradient_component(f: SpectralField, axis: int) -> SpectralField:
    """d_axis applied componentwise (axis in {0,1,2}; d3 = 0 in 2D)."""
    if axis not in (0, 1, 2):
        raise ValueError(f"axis must be 0, 1 or 2, got {axis}")
    k = f.grid.wavevectors()[axis]
    return SpectralField(f.grid, 1j * k * f.coeffs)


def divergence(f: SpectralField) -> SpectralField:
    """Divergence; the scalar result is stored in component 0."""
    ks = f.grid.wavevectors()
    d = f.grid.d
    div = np.zeros(f.grid.shape, dtype=np.complex128)
    for i in range(d):
        div += 1j * ks[i] * f.coeffs[i]
    out = np.zeros_like(f.coeffs)
    out[0] = div
    return SpectralField(f.grid, out)


def curl(f: SpectralField) -> SpectralField:
    """curl F = i k x F with k3 = 0 in d=2, which reproduces the 2D
    convention curl F = (d2 F3, -d1 F3, d1 F2 - d2 F1)."""
    k1, k2, k3 = f.grid.wavevectors()
    c1, c2, c3 = f.coeffs
    out = np.empty_like(f.coeffs)
    out[0] = 1j * (k2 * c3 - k3 * c2)
    out[1] = 1j * (k3 * c1 - k1 * c3)
    out[2] = 1j * (k1 * c2 - k2 * c1)
    return SpectralField(f.grid, out)


def laplacian(f: SpectralField) -> SpectralField:
    return SpectralField(f.grid, -f.grid.k_squared() * f.coeffs)


def apply_diff(f: SpectralField, kind: VectorOpKind, axis: int | None = None) -> SpectralField:
    if kind is VectorOpKind.GRADIENT_COMPONENT:
        if axis is None:
            raise ValueError("gradient-component requires an axis")
        return gradient_component(f, axis)
    if kind is VectorOpKind.DIVERGENCE:
        return divergence(f)
    if kind is VectorOpKind.CURL:
        return curl(f)
    if kind is VectorOpKind.LAPLACIAN:
        return laplacian(f)
    raise ValueError(f"unsupported operator kind {kind!r}")


def leray_project(f: SpectralField) -> SpectralField:
    """Per-mode projection c -> c - k (k.c)/|k|^2; k=0 mode unchanged.

    In d=2 the wavevector has k3=0, so only the first two components
    participate and the third passes through, matching the 2D divergence
    convention.
    """
    k1, k2, k3 = f.grid.wavevectors()
    ksq = k1**2 + k2**2 + k3**2
    ksq_safe = np.where(ksq == 0, 1.0, ksq)
    kdotc = k1 * f.coeffs[0] + k2 * f.coeffs[1] + k3 * f.coeffs[2]
    factor = kdotc / ksq_safe
    out = f.coeffs.copy()
    out[0] -= k1 * factor
    out[1] -= k2 * factor
    out[2] -= k3 * factor
    return SpectralField(f.grid, out)


def _phys_cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.stack(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )


def pointwise_product(a: SpectralField, b: SpectralField, combiner: str = "scalar") -> SpectralField:
    """Dealiased pointwise product.

    combiner:
      * ``cross``: a x b
      * ``advection``: (a . grad) b with the d-specific gradient convention
      * ``scalar``: componentwise a_i b_i

    Inputs are truncated by the 2/3 rule before transforming and the result
    is truncated again, so products of resolved fields are alias-free.
    """
    _check_same_grid(a, b)
    grid = a.grid
    mask = grid.dealias_mask()

    def trunc_phys(f: SpectralField) -> np.ndarray:
        c = f.coeffs.copy()
        c[:, mask] = 0.0
        return np.fft.ifftn(c, axes=grid.spatial_axes).real * grid.n**grid.d

    if combiner == "cross":
        prod = _phys_cross(trunc_phys(a), trunc_phys(b))
    elif combiner == "scalar":
        prod = trunc_phys(a) * trunc_phys(b)
    elif combiner == "advection":
        aphys = trunc_phys(a)
        prod = np.zeros((3,) + grid.shape)
        for i in range(grid.d):
            dib = gradient_component(b, i)
            prod += aphys[i] * trunc_phys(dib)
    else:
        raise ValueError(f"unknown combiner {combiner!r}")

    c = np.fft.fftn(prod, axes=grid.spatial_axes) / grid.n**grid.d
    c[:, mask] = 0.0
    out = SpectralField(grid, c)
    out.zero_nyquist()
    return out


def lp_norm_physical(f: SpectralField, p) -> float:
    """L^p norm over the box, p in {2, inf}.

    p=2 via Parseval on coefficients; p=inf via inverse transform and the
    max of the pointwise Euclidean norm of the R^3 value.
    """
    if p == 2:
        vol = f.grid.box_length**f.grid.d
        return float(np.sqrt(vol * np.sum(np.abs(f.coeffs) ** 2)))
    if p == np.inf or p == "inf":
        u = f.to_physical()
        return float(np.max(np.sqrt(np.sum(u**2, axis=0))))
    raise ValueError(f"unsupported exponent {p!r}")
