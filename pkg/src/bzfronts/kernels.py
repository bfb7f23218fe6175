"""Spatiotemporal interaction kernels.

A kernel K(s, y) is a normalized nonnegative weight over delay s >= 0 and
space offset y.  It acts on a profile psi through the speed-dependent
convolution

    (K * psi)(t) = int_0^inf int_R K(s, y) psi(t - c*s - y) dy ds,

and its exponential moments

    kappa_j(r, c) = int int K(s, y) exp(-j*lam_r(c)*(y + c*s)) dy ds

drive the pulled/pushed classification (lam_r(c) is the smaller root of
z^2 - c z + 1 - r).

Variants: PointMass (local, K*psi = psi), PointDelay (pure time lag),
Weak/Strong (Gaussian in space with exponential / Gamma-shaped temporal
weight), Shifted (spatial offset of a base kernel), Tabulated (a discrete
measure: product grid of point masses).  Weak and Strong have closed-form
moments; everything else reduces to finite sums.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import erf

from .errors import DivergentMoment, DomainError, EmptySupport, NotNormalized
from .gridfn import GridFunction

__all__ = [
    "Kernel", "PointMass", "PointDelay", "Weak", "Strong", "Shifted", "Tabulated",
    "mass", "convolve", "convolve_grid", "kappa_moment", "kappa_moment_quadrature",
    "truncate", "line_weights", "support_radius",
    "parse_kernel_spec", "format_kernel_spec", "load_table_csv",
]

# Symbolic kernels are integrated over the smallest rectangle carrying at
# least 1 - TAIL_MASS_CUTOFF of their mass, then renormalized.
TAIL_MASS_CUTOFF = 1e-8


@dataclass(frozen=True)
class PointMass:
    """Local interaction: K*psi = psi."""


@dataclass(frozen=True)
class PointDelay:
    """Pure time lag h: (K*psi)(t) = psi(t - c*h)."""

    h: float

    def __post_init__(self):
        if self.h < 0:
            raise DomainError(f"delay must be >= 0, got {self.h}")


@dataclass(frozen=True)
class Weak:
    """Gaussian in space, exponential temporal weight exp(-s/tau)/tau."""

    tau: float

    def __post_init__(self):
        if self.tau <= 0:
            raise DomainError(f"tau must be positive, got {self.tau}")


@dataclass(frozen=True)
class Strong:
    """Gaussian in space, Gamma-shaped temporal weight s*exp(-s/tau)/tau^2."""

    tau: float

    def __post_init__(self):
        if self.tau <= 0:
            raise DomainError(f"tau must be positive, got {self.tau}")


@dataclass(frozen=True)
class Shifted:
    """Spatially shifted kernel K_a(s, y) = base(s, y + a)."""

    base: "Kernel"
    a: float


@dataclass(eq=False)
class Tabulated:
    """Discrete measure on a product grid: weights[i, j] sits at (s[i], y[j])."""

    s_nodes: np.ndarray
    y_nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.s_nodes = np.asarray(self.s_nodes, dtype=float)
        self.y_nodes = np.asarray(self.y_nodes, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.s_nodes.ndim != 1 or self.y_nodes.ndim != 1:
            raise DomainError("s_nodes and y_nodes must be 1D")
        if np.any(np.diff(self.s_nodes) <= 0) or np.any(np.diff(self.y_nodes) <= 0):
            raise DomainError("kernel grids must be strictly increasing")
        if self.s_nodes[0] < 0:
            raise DomainError("delay nodes must be >= 0")
        if self.weights.shape != (len(self.s_nodes), len(self.y_nodes)):
            raise DomainError("weights shape must be (len(s_nodes), len(y_nodes))")
        if np.any(self.weights < 0):
            raise DomainError("kernel weights must be nonnegative")

    def renormalized(self) -> "Tabulated":
        total = float(self.weights.sum())
        if total <= 0:
            raise EmptySupport("tabulated kernel has zero total mass")
        return Tabulated(self.s_nodes, self.y_nodes, self.weights / total)


Kernel = Union[PointMass, PointDelay, Weak, Strong, Shifted, Tabulated]


# ---------------------------------------------------------------------------
# mass

def mass(kernel: Kernel, tol: float = 1e-10) -> float:
    """Total mass of the kernel.

    Symbolic variants are normalized densities and return exactly 1.  A
    Tabulated kernel returns its quadrature mass and raises NotNormalized
    when it deviates from 1 by more than tol.
    """
    if isinstance(kernel, (PointMass, PointDelay, Weak, Strong)):
        return 1.0
    if isinstance(kernel, Shifted):
        return mass(kernel.base, tol)
    m = float(kernel.weights.sum())
    if abs(m - 1.0) > tol:
        raise NotNormalized(
            f"tabulated kernel mass {m!r} deviates from 1 by more than {tol}"
        )
    return m


# ---------------------------------------------------------------------------
# truncation to a compactly supported tabulated measure

def _temporal_cell_mass(kernel: Weak | Strong, s_lo: np.ndarray, s_hi: np.ndarray):
    """Exact mass of the temporal weight over delay cells [s_lo, s_hi]."""
    tau = kernel.tau
    if isinstance(kernel, Weak):
        return np.exp(-s_lo / tau) - np.exp(-s_hi / tau)
    # Gamma shape: integral of (s/tau^2) e^{-s/tau} is -(s/tau + 1) e^{-s/tau}
    return (s_lo / tau + 1.0) * np.exp(-s_lo / tau) - (s_hi / tau + 1.0) * np.exp(-s_hi / tau)


def _gaussian_table(kernel: Weak | Strong, s_max: float, y_lo: float, y_hi: float,
                    n_sigma: int, dy: float) -> Tabulated:
    """Tabulate a Gaussian-in-space kernel on [0, s_max] x [y_lo, y_hi].

    Delay cells are uniform in sigma = sqrt(s), which resolves the narrow
    spatial Gaussians near s = 0; cell masses are exact (exponential and
    erf antiderivatives), so the table is a genuine measure and only node
    placement carries discretization error.
    """
    sig_edges = np.linspace(0.0, math.sqrt(s_max), n_sigma + 1)
    s_edges = sig_edges ** 2
    s_mid = (0.5 * (sig_edges[:-1] + sig_edges[1:])) ** 2
    t_mass = _temporal_cell_mass(kernel, s_edges[:-1], s_edges[1:])

    ny = max(int(round((y_hi - y_lo) / dy)), 4)
    y_edges = np.linspace(y_lo, y_hi, ny + 1)
    y_mid = 0.5 * (y_edges[:-1] + y_edges[1:])
    # spatial CDF at variance 2s: 0.5*(1 + erf(y / (2 sqrt(s))))
    denom = 2.0 * np.sqrt(s_mid)[:, None]
    cdf = 0.5 * (1.0 + erf(y_edges[None, :] / denom))
    y_mass = np.diff(cdf, axis=1)
    w = t_mass[:, None] * y_mass
    return Tabulated(s_mid, y_mid, w).renormalized()


def _weak_strong_box(kernel: Weak | Strong, eps: float) -> tuple[float, float]:
    """Rectangle half-sizes (s_max, y_max) capturing mass >= 1 - eps."""
    tau = kernel.tau
    if isinstance(kernel, Weak):
        s_max = tau * math.log(2.0 / eps)
    else:
        s_max = tau * math.log(2.0 / eps)
        for _ in range(40):  # solve (s/tau + 1) e^{-s/tau} = eps/2
            s_max = tau * (math.log(2.0 / eps) + math.log(s_max / tau + 1.0))
    z = math.sqrt(max(math.log(4.0 / eps), 1.0))
    y_max = 2.0 * math.sqrt(s_max) * z + 1.0
    return s_max, y_max


def truncate(kernel: Kernel, m: float, *, n_sigma: int | None = None,
             dy: float | None = None) -> Kernel:
    """Restrict the kernel to [0, m] x [-m, m] and renormalize to mass 1.

    Compactly supported variants pass through unchanged when they already
    fit; Weak/Strong become Tabulated measures.
    """
    if m <= 0:
        raise DomainError(f"truncation size must be positive, got {m}")
    if isinstance(kernel, PointMass):
        return kernel
    if isinstance(kernel, PointDelay):
        if kernel.h > m:
            raise EmptySupport(f"delay {kernel.h} lies outside [0, {m}]")
        return kernel
    if isinstance(kernel, Shifted):
        inner = truncate(kernel.base, m, n_sigma=n_sigma, dy=dy)
        return Shifted(inner, kernel.a)
    if isinstance(kernel, Tabulated):
        keep_s = kernel.s_nodes <= m
        keep_y = np.abs(kernel.y_nodes) <= m
        w = kernel.weights[np.ix_(keep_s, keep_y)]
        if w.sum() <= 0:
            raise EmptySupport("no kernel mass inside the truncation window")
        return Tabulated(kernel.s_nodes[keep_s], kernel.y_nodes[keep_y], w).renormalized()
    # Weak / Strong
    if n_sigma is None:
        n_sigma = max(160, min(800, int(48 * math.sqrt(m))))
    if dy is None:
        dy = min(0.05, 2.0 * m / 200)
    table = _gaussian_table(kernel, m, -m, m, n_sigma, dy)
    if table.weights.sum() <= 0:
        raise EmptySupport("no kernel mass inside the truncation window")
    return table


_auto_tables: dict[tuple, Tabulated] = {}


def _auto_table(kernel: Weak | Strong, level: int = 0) -> Tabulated:
    """Cached tabulation over the 1 - 1e-8 mass rectangle; level refines 2x."""
    key = (type(kernel).__name__, kernel.tau, level)
    hit = _auto_tables.get(key)
    if hit is not None:
        return hit
    s_max, y_max = _weak_strong_box(kernel, TAIL_MASS_CUTOFF)
    n_sigma = max(240, int(56 * math.sqrt(s_max))) * (1 << level)
    dy = min(0.05, y_max / 250) / (1 << level)
    table = _gaussian_table(kernel, s_max, -y_max, y_max, n_sigma, dy)
    _auto_tables[key] = table
    return table


def support_radius(kernel: Kernel) -> float:
    """Smallest m with supp K inside [0, m] x [-m, m]; raises otherwise."""
    if isinstance(kernel, PointMass):
        return 0.0
    if isinstance(kernel, PointDelay):
        return kernel.h
    if isinstance(kernel, Shifted):
        return support_radius(kernel.base) + abs(kernel.a)
    if isinstance(kernel, Tabulated):
        live = kernel.weights.sum(axis=1) > 0
        live_y = kernel.weights.sum(axis=0) > 0
        return float(max(kernel.s_nodes[live].max(initial=0.0),
                         np.abs(kernel.y_nodes[live_y]).max(initial=0.0)))
    raise DomainError(f"{type(kernel).__name__} kernel has unbounded support; truncate it first")


# ---------------------------------------------------------------------------
# point-mass decomposition and convolution

def point_masses(kernel: Kernel, c: float, level: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Decompose the kernel at speed c into line offsets and weights.

    Returns (xi, w) with (K * psi)(t) = sum_k w[k] * psi(t - xi[k]) and
    sum(w) = 1 for normalized kernels, xi = c*s + y (minus the shift for
    Shifted kernels).
    """
    if c < 0:
        raise DomainError(f"speed must be >= 0, got {c}")
    if isinstance(kernel, PointMass):
        return np.array([0.0]), np.array([1.0])
    if isinstance(kernel, PointDelay):
        return np.array([c * kernel.h]), np.array([1.0])
    if isinstance(kernel, Shifted):
        xi, w = point_masses(kernel.base, c, level)
        return xi - kernel.a, w
    if isinstance(kernel, (Weak, Strong)):
        kernel = _auto_table(kernel, level)
    xi = (c * kernel.s_nodes[:, None] + kernel.y_nodes[None, :]).ravel()
    return xi, kernel.weights.ravel()


def convolve(kernel: Kernel, psi: GridFunction, c: float, t: float) -> float:
    """(K *_c psi)(t), with psi extended by its tail values.

    Symbolic spread kernels integrate over the rectangle carrying at least
    1 - 1e-8 of their mass, refining the quadrature until two successive
    levels agree below 1e-9.
    """
    base = kernel.base if isinstance(kernel, Shifted) else kernel
    adaptive = isinstance(base, (Weak, Strong))
    xi, w = point_masses(kernel, c, level=0)
    val = float(np.dot(w, psi(t - xi)))
    if not adaptive:
        return val
    for level in (1, 2):
        xi, w = point_masses(kernel, c, level)
        finer = float(np.dot(w, psi(t - xi)))
        if abs(finer - val) < 1e-9:
            return finer
        val = finer
    return val


def line_weights(kernel: Kernel, c: float, dt: float, level: int = 0) -> tuple[int, np.ndarray]:
    """Deposit the kernel onto a uniform line grid of spacing dt.

    Returns (k0, w) so that (K * psi)(t_i) ~= sum_m w[m] * psi[i - (k0 + m)].
    Mass is preserved exactly (linear splitting between neighbor cells).
    """
    xi, wt = point_masses(kernel, c, level)
    pos = xi / dt
    k_lo = int(np.floor(pos.min()))
    k_hi = int(np.floor(pos.max())) + 1
    w = np.zeros(k_hi - k_lo + 1)
    base = np.floor(pos).astype(int) - k_lo
    frac = pos - np.floor(pos)
    np.add.at(w, base, wt * (1.0 - frac))
    np.add.at(w, base + 1, wt * frac)
    return k_lo, w


def convolve_grid(kernel: Kernel, psi: GridFunction, c: float,
                  weights: tuple[int, np.ndarray] | None = None,
                  level: int = 0) -> np.ndarray:
    """(K *_c psi) evaluated at every grid node of psi (direct summation)."""
    if weights is None:
        weights = line_weights(kernel, c, psi.grid.dt, level)
    k0, w = weights
    nw = len(w)
    n = psi.grid.n
    # out[i] = sum_m w[m] psi[i - k0 - m]; pad psi with tails on both sides
    pad_l = max(k0 + nw - 1, 0)
    pad_r = max(-k0, 0)
    full = np.concatenate([
        np.full(pad_l, psi.left_tail),
        psi.values,
        np.full(pad_r, psi.right_tail),
    ])
    conv = np.convolve(full, w, mode="full")
    # psi[j] sits at full[j + pad_l]; out[i] = conv[i + pad_l + nw - 1 - k0 - (nw - 1)]
    start = pad_l + nw - 1 - (k0 + nw - 1)
    return conv[start:start + n]


# ---------------------------------------------------------------------------
# exponential moments

def _lambda_r(r: float, c: float) -> float:
    disc = c * c - 4.0 * (1.0 - r)
    if disc < 0:
        from .errors import ComplexRoots
        raise ComplexRoots(f"c = {c} below 2*sqrt(1-r) = {2*math.sqrt(1-r):.6g}")
    return 0.5 * (c - math.sqrt(disc))


def kappa_moment(kernel: Kernel, r: float, c: float, j: int = 1) -> float:
    """Exponential moment kappa_j(r, c) at rate j*lam_r(c).

    Weak and Strong use the closed forms 1/(1 + tau*j*lam*(c - j*lam)) and
    its square; PointMass/PointDelay/Shifted reduce algebraically; a
    Tabulated measure is summed exactly.
    """
    if j < 1:
        raise DomainError(f"moment index must be a positive integer, got {j}")
    lam = _lambda_r(r, c)
    rate = j * lam
    if isinstance(kernel, PointMass):
        return 1.0
    if isinstance(kernel, PointDelay):
        return math.exp(-rate * c * kernel.h)
    if isinstance(kernel, Shifted):
        # K_a(s, y) = K(s, y + a) pulls out a factor e^{rate * a}
        return math.exp(rate * kernel.a) * kappa_moment(kernel.base, r, c, j)
    if isinstance(kernel, (Weak, Strong)):
        den = 1.0 + kernel.tau * rate * (c - rate)
        if den <= 0:
            raise DivergentMoment(
                f"moment j={j} diverges: tau*j*lam*(c - j*lam) = {den - 1.0:.6g} <= -1"
            )
        return 1.0 / den if isinstance(kernel, Weak) else 1.0 / (den * den)
    ex = np.exp(-rate * (c * kernel.s_nodes[:, None] + kernel.y_nodes[None, :]))
    return float(np.sum(kernel.weights * ex))


def kappa_moment_quadrature(kernel: Weak | Strong, r: float, c: float, j: int = 1,
                            tol: float = 1e-9) -> float:
    """kappa_j by direct 2D quadrature (independent check of the closed forms).

    Substitutes s = sigma^2 and y = 2*sigma*u, which removes the 1/sqrt(s)
    factor and gives a unit-width Gaussian in u; composite trapezoid is then
    refined (doubling both directions) until successive estimates differ by
    less than tol.
    """
    if not isinstance(kernel, (Weak, Strong)):
        raise DomainError("quadrature route applies to Weak/Strong kernels only")
    lam = _lambda_r(r, c)
    rate = j * lam
    tau = kernel.tau
    q = 1.0 / tau + rate * (c - rate)
    if q <= 0:
        raise DivergentMoment(f"moment j={j} diverges (decay rate {q:.6g} <= 0)")
    sig_max = math.sqrt(27.0 / q) + 1.0
    u_lo = -rate * sig_max - 7.5
    u_hi = 7.5
    weak = isinstance(kernel, Weak)

    def estimate(n: int) -> float:
        sig = np.linspace(0.0, sig_max, n)
        u = np.linspace(u_lo, u_hi, n)
        s = sig ** 2
        rho = np.exp(-s / tau) / tau if weak else s * np.exp(-s / tau) / tau ** 2
        f_sig = rho * 2.0 * sig / math.sqrt(math.pi) * np.exp(-rate * c * s)
        integrand = f_sig[:, None] * np.exp(-u[None, :] ** 2 - 2.0 * rate * sig[:, None] * u[None, :])
        return float(np.trapezoid(np.trapezoid(integrand, u, axis=1), sig))

    # Richardson-extrapolated trapezoid: the weak kernel's integrand has a
    # nonzero sigma-derivative at the origin, so the raw rule is only O(h^2)
    prev_t = estimate(129)
    prev_e = None
    for n in (257, 513, 1025, 2049, 4097):
        cur_t = estimate(n)
        cur_e = (4.0 * cur_t - prev_t) / 3.0
        if prev_e is not None and abs(cur_e - prev_e) < tol * max(1.0, abs(cur_e)):
            return cur_e
        prev_t, prev_e = cur_t, cur_e
    raise DivergentMoment("moment quadrature failed to converge")


# ---------------------------------------------------------------------------
# CLI-facing kernel specifications

def parse_kernel_spec(text: str) -> Kernel:
    """Parse a kernel spec string.

    Grammar: ``point`` | ``delay:h=<v>`` | ``weak:tau=<v>`` |
    ``strong:tau=<v>`` | ``shift:a=<v>:<inner>`` | ``table:<path>``.
    """
    text = text.strip()
    if text == "point":
        return PointMass()
    head, _, rest = text.partition(":")
    if head == "delay":
        return PointDelay(_spec_value(rest, "h"))
    if head == "weak":
        return Weak(_spec_value(rest, "tau"))
    if head == "strong":
        return Strong(_spec_value(rest, "tau"))
    if head == "shift":
        a_part, _, inner = rest.partition(":")
        if not inner:
            raise DomainError(f"shift spec needs an inner kernel: {text!r}")
        return Shifted(parse_kernel_spec(inner), _spec_value(a_part, "a"))
    if head == "table":
        if not rest:
            raise DomainError("table spec needs a file path")
        return load_table_csv(rest)
    raise DomainError(f"unknown kernel spec {text!r}")


def _spec_value(part: str, name: str) -> float:
    key, _, val = part.partition("=")
    if key != name or not val:
        raise DomainError(f"expected {name}=<value>, got {part!r}")
    try:
        return float(val)
    except ValueError:
        raise DomainError(f"bad numeric value in kernel spec: {val!r}") from None


def format_kernel_spec(kernel: Kernel) -> str:
    if isinstance(kernel, PointMass):
        return "point"
    if isinstance(kernel, PointDelay):
        return f"delay:h={kernel.h:g}"
    if isinstance(kernel, Weak):
        return f"weak:tau={kernel.tau:g}"
    if isinstance(kernel, Strong):
        return f"strong:tau={kernel.tau:g}"
    if isinstance(kernel, Shifted):
        return f"shift:a={kernel.a:g}:{format_kernel_spec(kernel.base)}"
    return f"table:<{len(kernel.s_nodes)}x{len(kernel.y_nodes)}>"


def load_table_csv(path: str) -> Tabulated:
    """Load a tabulated kernel from CSV rows ``s,y,w`` forming a product grid."""
    entries: dict[tuple[float, float], float] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["s", "y", "w"]:
            raise DomainError(f"{path}: expected CSV header 's,y,w'")
        for row in reader:
            entries[(float(row["s"]), float(row["y"]))] = float(row["w"])
    if not entries:
        raise DomainError(f"{path}: no kernel rows")
    s_nodes = np.array(sorted({s for s, _ in entries}))
    y_nodes = np.array(sorted({y for _, y in entries}))
    if len(s_nodes) * len(y_nodes) != len(entries):
        raise DomainError(f"{path}: rows do not form a complete s x y product grid")
    w = np.empty((len(s_nodes), len(y_nodes)))
    si = {s: i for i, s in enumerate(s_nodes)}
    yi = {y: j for j, y in enumerate(y_nodes)}
    for (s, y), val in entries.items():
        w[si[s], yi[y]] = val
    return Tabulated(s_nodes, y_nodes, w)
