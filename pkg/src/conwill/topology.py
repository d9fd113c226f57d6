"""Interface-band topology: components, weighted geodesics, and the penalty.

The connectedness penalty of a field u, for one band pair, is

    c_eps(u) = (1/ε²) ∫∫ φ(u(x)) φ(u(y)) d_F(x, y) dx dy,

where φ is a bump supported on the open band (ρ₁, ρ₂) and d_F is the
geodesic distance with metric weight F(u): F vanishes on [ρ₁, ρ₂] and
ramps quadratically to a plateau at u = ±1. Travel inside a band
component is free, so the double integral groups exactly into
(1/ε²) Σ_k m_k T_k with m_k the φ-mass of component k and
T_k = Σ_y φ(u(y)) d_k(y) h², where d_k is the multi-source geodesic
distance from component k. A connected band gives c_eps = 0.

Distances live on the 8-neighbor grid graph with edge weight
((F(u_a)+F(u_b))/2)·|x_a−x_b|; cells outside the domain store u = −1 and
are traversable at the plateau weight. Dijkstra pops the lowest cell
index among equal keys, so labelings, distances, and predecessor trees
are deterministic.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .energy import ModelParams
from .errors import StaleTopologyError
from .grid import DomainMask, Grid2D, ScalarField, check_shapes

SQRT2 = math.sqrt(2.0)

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def deco(f):
            return f

        return deco


@dataclass(frozen=True)
class WeightSpec:
    """Geodesic metric weight: zero on [rho1, rho2], plateau at ±1."""

    rho1: float
    rho2: float
    plateau: float = 1.0

    def __post_init__(self):
        if not (-1.0 < self.rho1 < self.rho2 < 1.0):
            raise ValueError("band must satisfy -1 < rho1 < rho2 < 1")
        if not self.plateau > 0:
            raise ValueError("plateau must be positive")


@dataclass(frozen=True)
class BumpSpec:
    """Bump with support exactly (rho1, rho2), normalized to max 1."""

    rho1: float
    rho2: float

    def __post_init__(self):
        if not (-1.0 < self.rho1 < self.rho2 < 1.0):
            raise ValueError("band must satisfy -1 < rho1 < rho2 < 1")

    @property
    def amplitude(self) -> float:
        return (2.0 / (self.rho2 - self.rho1)) ** 4


def weight_F(u, spec: WeightSpec):
    """F(u): quadratic ramps outside the band, constant plateau beyond ±1."""
    u = np.asarray(u, dtype=np.float64)
    uc = np.clip(u, -1.0, 1.0)
    up = np.maximum(uc - spec.rho2, 0.0) / (1.0 - spec.rho2)
    dn = np.maximum(spec.rho1 - uc, 0.0) / (1.0 + spec.rho1)
    return spec.plateau * (up * up + dn * dn)


def weight_F_prime(u, spec: WeightSpec):
    """dF/du; zero on the band and beyond the clamp at ±1."""
    u = np.asarray(u, dtype=np.float64)
    g = np.zeros_like(u)
    hi = (u > spec.rho2) & (u < 1.0)
    g[hi] = 2.0 * spec.plateau * (u[hi] - spec.rho2) / (1.0 - spec.rho2) ** 2
    lo = (u < spec.rho1) & (u > -1.0)
    g[lo] = -2.0 * spec.plateau * (spec.rho1 - u[lo]) / (1.0 + spec.rho1) ** 2
    return g


def bump_phi(u, spec):
    """φ(u) = N·((u−rho1)(rho2−u))₊², with max value 1 at the band midpoint.

    `spec` is anything carrying rho1/rho2 (BumpSpec or WeightSpec).
    """
    u = np.asarray(u, dtype=np.float64)
    amp = (2.0 / (spec.rho2 - spec.rho1)) ** 4
    pos = np.maximum((u - spec.rho1) * (spec.rho2 - u), 0.0)
    return amp * pos * pos


def bump_phi_prime(u, spec):
    u = np.asarray(u, dtype=np.float64)
    amp = (2.0 / (spec.rho2 - spec.rho1)) ** 4
    pos = np.maximum((u - spec.rho1) * (spec.rho2 - u), 0.0)
    return 2.0 * amp * pos * (spec.rho1 + spec.rho2 - 2.0 * u)


def field_digest(values: np.ndarray) -> str:
    return hashlib.blake2b(
        np.ascontiguousarray(values).tobytes(), digest_size=16
    ).hexdigest()


@dataclass(frozen=True)
class ComponentLabeling:
    """8-connected components of {rho1 ≤ u ≤ rho2} ∩ domain.

    labels: 0 = not in band, 1..n_components in row-major first-seen order.
    masses[k] = Σ_{cells of k} φ(u)·h² (masses[0] unused).
    """

    labels: np.ndarray
    n_components: int
    masses: np.ndarray
    rho1: float
    rho2: float
    h: float
    digest: str


def label_components(u: ScalarField, mask: DomainMask, spec) -> ComponentLabeling:
    """Label the closed band of `spec` (anything with rho1/rho2) over the mask."""
    check_shapes(u.grid, mask, u.values)
    band = mask.inside & (u.values >= spec.rho1) & (u.values <= spec.rho2)
    raw, n = ndimage.label(band, structure=np.ones((3, 3), dtype=int))
    labels = raw.astype(np.int32)
    if n > 0:
        # renumber so component ids follow first appearance in row-major scan
        flat = labels.ravel()
        seen = flat[flat > 0]
        uniq, first = np.unique(seen, return_index=True)
        order = np.argsort(first, kind="stable")
        remap = np.zeros(n + 1, dtype=np.int32)
        remap[uniq[order]] = np.arange(1, n + 1, dtype=np.int32)
        labels = remap[labels]
    phi_mass = bump_phi(u.values, spec) * (u.grid.h * u.grid.h)
    masses = np.bincount(
        labels.ravel(), weights=np.where(band, phi_mass, 0.0).ravel(), minlength=n + 1
    )
    masses[0] = 0.0
    return ComponentLabeling(
        labels=labels,
        n_components=int(n),
        masses=masses,
        rho1=spec.rho1,
        rho2=spec.rho2,
        h=u.grid.h,
        digest=field_digest(u.values),
    )


@dataclass(frozen=True)
class GeodesicField:
    """Distance from one band component, with the shortest-path tree.

    d: weighted distance per cell (inf where the early-terminated sweep
    never finalized a cell); pred: flat index of the tree predecessor,
    −1 on source cells, −2 where unreached; pop_order: finalization order,
    a topological order of the tree (parents precede children).
    """

    component: int
    d: np.ndarray
    pred: np.ndarray
    pop_order: np.ndarray
    digest: str


@njit(cache=True)
def _heap_push(hd, hi, size, d, idx):
    hd[size] = d
    hi[size] = idx
    pos = size
    while pos > 0:
        par = (pos - 1) >> 1
        if hd[par] > hd[pos] or (hd[par] == hd[pos] and hi[par] > hi[pos]):
            hd[par], hd[pos] = hd[pos], hd[par]
            hi[par], hi[pos] = hi[pos], hi[par]
            pos = par
        else:
            break
    return size + 1


@njit(cache=True)
def _heap_pop(hd, hi, size):
    d0 = hd[0]
    i0 = hi[0]
    size -= 1
    hd[0] = hd[size]
    hi[0] = hi[size]
    pos = 0
    while True:
        left = 2 * pos + 1
        if left >= size:
            break
        best = left
        right = left + 1
        if right < size and (
            hd[right] < hd[left] or (hd[right] == hd[left] and hi[right] < hi[left])
        ):
            best = right
        if hd[best] < hd[pos] or (hd[best] == hd[pos] and hi[best] < hi[pos]):
            hd[best], hd[pos] = hd[pos], hd[best]
            hi[best], hi[pos] = hi[pos], hi[best]
            pos = best
        else:
            break
    return d0, i0, size


@njit(cache=True)
def _dijkstra_kernel(weights, src, targets, use_targets, ny, nx, h):
    N = ny * nx
    dist = np.full(N, np.inf)
    pred = np.full(N, -2, dtype=np.int64)
    finalized = np.zeros(N, dtype=np.bool_)
    pop_order = np.empty(N, dtype=np.int64)
    n_pop = 0
    cap = 9 * N + 8  # ≤ 8 improvement pushes per cell plus the sources
    hd = np.empty(cap, dtype=np.float64)
    hi = np.empty(cap, dtype=np.int64)
    size = 0
    remaining = 0
    if use_targets:
        for q in range(N):
            if targets[q]:
                remaining += 1
    for q in range(N):
        if src[q]:
            dist[q] = 0.0
            pred[q] = -1
            size = _heap_push(hd, hi, size, 0.0, q)
    diag = h * SQRT2
    while size > 0:
        d0, i0, size = _heap_pop(hd, hi, size)
        if finalized[i0]:
            continue
        finalized[i0] = True
        pop_order[n_pop] = i0
        n_pop += 1
        if use_targets and targets[i0]:
            remaining -= 1
            if remaining == 0:
                break
        j = i0 // nx
        i = i0 - j * nx
        w0 = weights[i0]
        for dj in (-1, 0, 1):
            jj = j + dj
            if jj < 0 or jj >= ny:
                continue
            for di in (-1, 0, 1):
                if di == 0 and dj == 0:
                    continue
                ii = i + di
                if ii < 0 or ii >= nx:
                    continue
                q = jj * nx + ii
                if finalized[q]:
                    continue
                step = h if (di == 0 or dj == 0) else diag
                nd = d0 + 0.5 * (w0 + weights[q]) * step
                if nd < dist[q]:
                    dist[q] = nd
                    pred[q] = i0
                    size = _heap_push(hd, hi, size, nd, q)
    # entries never finalized carry only tentative values; blank them
    for q in range(N):
        if not finalized[q]:
            dist[q] = np.inf
            pred[q] = -2
    return dist, pred, pop_order[:n_pop]


def geodesic_from_component(
    k: int,
    labeling: ComponentLabeling,
    weights: ScalarField,
    grid: Grid2D,
    targets: np.ndarray | None = None,
) -> GeodesicField:
    """Multi-source Dijkstra from every cell of component k.

    `weights` holds F(u) on all cells (outside cells store the plateau
    because u = −1 there). If `targets` is given, the sweep stops once
    every target cell is finalized; distances elsewhere are then inf.
    """
    if not 1 <= k <= labeling.n_components:
        raise IndexError(
            f"component {k} out of range 1..{labeling.n_components}"
        )
    ny, nx = weights.values.shape
    src = np.ascontiguousarray((labeling.labels == k).ravel())
    if targets is None:
        tgt = np.zeros(ny * nx, dtype=bool)
        use_targets = False
    else:
        tgt = np.ascontiguousarray(np.asarray(targets, dtype=bool).ravel())
        use_targets = True
    w = np.ascontiguousarray(weights.values.ravel().astype(np.float64))
    dist, pred, pop_order = _dijkstra_kernel(
        w, src, tgt, use_targets, ny, nx, float(grid.h)
    )
    return GeodesicField(
        component=k,
        d=dist.reshape(ny, nx),
        pred=pred.reshape(ny, nx),
        pop_order=pop_order,
        digest=labeling.digest,
    )


def _check_fresh(u: ScalarField, labeling: ComponentLabeling, geodesics) -> str:
    dig = field_digest(u.values)
    if labeling.digest != dig:
        raise StaleTopologyError("component labeling was computed for a different field")
    for k, g in geodesics.items():
        if g.digest != dig:
            raise StaleTopologyError(
                f"geodesic field for component {k} was computed for a different field"
            )
    return dig


def _check_band(wspec: WeightSpec, bspec: BumpSpec, labeling: ComponentLabeling):
    if not (
        wspec.rho1 == bspec.rho1 == labeling.rho1
        and wspec.rho2 == bspec.rho2 == labeling.rho2
    ):
        raise ValueError("weight, bump, and labeling must share one band")


def _positive_components(labeling: ComponentLabeling):
    return [k for k in range(1, labeling.n_components + 1) if labeling.masses[k] > 0.0]


def c_eps(
    u: ScalarField,
    p: ModelParams,
    wspec: WeightSpec,
    bspec: BumpSpec,
    labeling: ComponentLabeling,
    geodesics: dict[int, GeodesicField],
) -> float:
    """Connectedness penalty (1/ε²) Σ_k m_k Σ_y φ(u_y) d_k(y) h².

    `geodesics` must hold a GeodesicField for every positive-mass
    component whenever two or more exist; zero-mass components neither
    contribute targets nor need a distance field.
    """
    _check_band(wspec, bspec, labeling)
    _check_fresh(u, labeling, geodesics)
    pos = _positive_components(labeling)
    if len(pos) < 2:
        return 0.0
    h2 = labeling.h * labeling.h
    phi = bump_phi(u.values, bspec)
    phi_t = phi * h2
    total = 0.0
    for k in pos:
        if k not in geodesics:
            raise ValueError(f"missing geodesic field for component {k}")
        dk = geodesics[k].d
        total += labeling.masses[k] * float(np.sum(np.where(phi > 0.0, dk, 0.0) * phi_t))
    if not np.isfinite(total):
        raise ValueError("geodesic sweep did not cover every bump-support cell")
    return total / (p.eps * p.eps)


@njit(cache=True)
def _path_term_kernel(pop_order, pred_flat, flow, fprime_flat, scale, nx, h, out_flat):
    # walk the shortest-path tree children-first, pushing target mass toward
    # the sources; each tree edge (t -> p) carries the accumulated flow and
    # deposits scale·flow·F'(u)·(edge length)/2 at both endpoints
    diag = h * SQRT2
    for n in range(len(pop_order) - 1, -1, -1):
        t = pop_order[n]
        par = pred_flat[t]
        if par < 0:
            continue
        f = flow[t]
        if f == 0.0:
            continue
        flow[par] += f
        jt = t // nx
        it = t - jt * nx
        jp = par // nx
        ip = par - jp * nx
        step = h if (it == ip or jt == jp) else diag
        dep = scale * f * 0.5 * step
        out_flat[t] += dep * fprime_flat[t]
        out_flat[par] += dep * fprime_flat[par]


def c_eps_subgradient(
    u: ScalarField,
    p: ModelParams,
    wspec: WeightSpec,
    bspec: BumpSpec,
    labeling: ComponentLabeling,
    geodesics: dict[int, GeodesicField],
    mode: str = "full",
) -> ScalarField:
    """Descent direction for c_eps.

    mode="frozen" differentiates only the φ factors, holding every
    distance field fixed; it is the exact derivative of c_eps under that
    freeze. mode="full" adds the metric term: the derivative of each
    shortest path's weighted length through F'(u), accumulated over the
    predecessor tree. Default full.

    Values are L² densities: the per-cell derivative of c_eps is the
    returned value times h², the convention of grad_s_eps and grad_w_eps.
    """
    if mode not in ("frozen", "full"):
        raise ValueError(f"mode must be 'frozen' or 'full', got {mode!r}")
    _check_band(wspec, bspec, labeling)
    _check_fresh(u, labeling, geodesics)
    grid = u.grid
    out = np.zeros(grid.shape)
    pos = _positive_components(labeling)
    if len(pos) < 2:
        return ScalarField(grid, out)
    for k in pos:
        if k not in geodesics:
            raise ValueError(f"missing geodesic field for component {k}")
    h2 = labeling.h * labeling.h
    inv_eps2 = 1.0 / (p.eps * p.eps)
    phi = bump_phi(u.values, bspec)
    phi_t = phi * h2

    # frozen part: the L² density of d/du_z of (1/ε²) Σ_k m_k(u) T_k(u)
    # with d fixed, i.e. (1/ε²) φ'(u_z) (T_{label(z)} + Σ_k m_k d_k(z));
    # the per-cell derivative is this times h², like the other gradients
    band = labeling.labels > 0
    bj, bi = np.nonzero(band)
    T = np.zeros(labeling.n_components + 1)
    sum_md = np.zeros(bj.shape[0])
    for k in pos:
        dk = geodesics[k].d
        dk_band = dk[bj, bi]
        if not np.all(np.isfinite(dk_band)):
            raise ValueError("geodesic sweep did not cover every band cell")
        T[k] = float(np.sum(np.where(phi > 0.0, dk, 0.0) * phi_t))
        sum_md += labeling.masses[k] * dk_band
    phip = bump_phi_prime(u.values, bspec)
    out[bj, bi] = inv_eps2 * phip[bj, bi] * (T[labeling.labels[bj, bi]] + sum_md)

    if mode == "full":
        fprime = np.ascontiguousarray(weight_F_prime(u.values, wspec).ravel())
        out_flat = out.ravel()  # view; kernel accumulates in place
        for k in pos:
            g = geodesics[k]
            flow = np.ascontiguousarray(phi_t.ravel()).copy()
            _path_term_kernel(
                g.pop_order,
                np.ascontiguousarray(g.pred.ravel()),
                flow,
                fprime,
                inv_eps2 * labeling.masses[k] / h2,  # density, as above
                grid.nx,
                float(grid.h),
                out_flat,
            )
    return ScalarField(grid, out)


@dataclass(frozen=True)
class BandPair:
    """One (weight, bump) pair sharing a band."""

    wspec: WeightSpec
    bspec: BumpSpec

    def __post_init__(self):
        if self.wspec.rho1 != self.bspec.rho1 or self.wspec.rho2 != self.bspec.rho2:
            raise ValueError("weight and bump of a pair must share the band")


def default_band_pairs(plateau: float = 1.0) -> list[BandPair]:
    return [
        BandPair(WeightSpec(0.2, 0.8, plateau), BumpSpec(0.2, 0.8)),
        BandPair(WeightSpec(-0.8, -0.2, plateau), BumpSpec(-0.8, -0.2)),
    ]


class BandPenalty:
    """Sum of c_eps over a list of band pairs.

    The component count reported alongside the penalty is that of the
    first configured band, which by convention is the monitored one.
    """

    def __init__(self, pairs):
        self.pairs = list(pairs)

    def _band_data(self, u: ScalarField, p: ModelParams, mask: DomainMask, pair: BandPair):
        labeling = label_components(u, mask, pair.wspec)
        geos: dict[int, GeodesicField] = {}
        pos = _positive_components(labeling)
        if len(pos) >= 2:
            weights = ScalarField(u.grid, weight_F(u.values, pair.wspec))
            targets = labeling.labels > 0
            for k in pos:
                geos[k] = geodesic_from_component(k, labeling, weights, u.grid, targets)
        return labeling, geos

    def evaluate(self, u: ScalarField, p: ModelParams, mask: DomainMask):
        """(total c_eps, n_components of the first band)."""
        total = 0.0
        n_first = 0
        for i, pair in enumerate(self.pairs):
            labeling, geos = self._band_data(u, p, mask, pair)
            if i == 0:
                n_first = labeling.n_components
            total += c_eps(u, p, pair.wspec, pair.bspec, labeling, geos)
        return total, n_first

    def subgradient(self, u: ScalarField, p: ModelParams, mask: DomainMask, mode="full") -> ScalarField:
        out = np.zeros(u.grid.shape)
        for pair in self.pairs:
            labeling, geos = self._band_data(u, p, mask, pair)
            g = c_eps_subgradient(u, p, pair.wspec, pair.bspec, labeling, geos, mode)
            out += g.values
        return ScalarField(u.grid, out)
