"""Exact samplable representations of the closed-form equilibria.

A ``MixedStrategy`` is a weighted list of components, each of which can be
sampled by inverse transform and queried for the exact marginal CDF of the
gaming coordinate. Components come in three kinds:

* an atom at a fixed content point,
* a curve component: a CDF over the gaming coordinate whose quality is
  pinned to the minimum-investment curve of one user type,
* a (v, t) density: a piecewise-constant density over reparameterized
  engagement with a per-interval probability of targeting the lower type,
  mapped back to content through the curves (two-type construction).

Constructors cover: the homogeneous engagement equilibrium for any number
of creators, the two-type and N-well-separated engagement equilibria for
two creators under costless gaming and linear induced costs, and the
investment and random-recommendation baselines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from ._piecewise import PiecewiseLinearCdf, clipped_linear_cdf
from .model import Content, ModelInstance, PreconditionError, TypeSpace

GOLDEN_RATIO_SPLIT = (5.0 - math.sqrt(5.0)) / 2.0  # two-type case 2/3 boundary


@dataclass(frozen=True)
class AtomComponent:
    """Point mass at one content."""

    w_costly: float
    w_cheap: float

    def sample_from_uniforms(self, u_main: np.ndarray, u_aux: np.ndarray) -> np.ndarray:
        out = np.empty((u_main.size, 2))
        out[:, 0] = self.w_costly
        out[:, 1] = self.w_cheap
        return out

    def cheap_cdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = (x >= self.w_cheap).astype(float)
        return out if out.ndim else float(out)

    def to_dict(self) -> dict:
        return {"kind": "atom", "content": [self.w_costly, self.w_cheap]}


@dataclass(frozen=True)
class CurveComponent:
    """Gaming marginal on one type's minimum-investment curve.

    Quality is the curve value for positive gaming; the possible atom at
    gaming 0 is the zero-effort content (0, 0).
    """

    inst: ModelInstance
    t: float
    cheap: PiecewiseLinearCdf

    def sample_from_uniforms(self, u_main: np.ndarray, u_aux: np.ndarray) -> np.ndarray:
        x = np.asarray(self.cheap.ppf(u_main), dtype=float)
        q = np.where(x > 0.0, self.inst.min_investment(self.t, x), 0.0)
        return np.column_stack([q, x])

    def cheap_cdf(self, x):
        return self.cheap.cdf(x)

    def to_dict(self) -> dict:
        return {
            "kind": "curve",
            "t": self.t,
            "cheap_cdf_breakpoints": self.cheap.breakpoints(),
            "cheap_cdf_exponent": self.cheap.exponent,
        }


@dataclass(frozen=True)
class VtDensityComponent:
    """Piecewise-constant density over reparameterized engagement v.

    Each interval carries a constant density and a constant probability of
    targeting the lower type; a draw (v, t) maps to the unique on-curve
    content with engagement v - shift.
    """

    inst: ModelInstance
    t_low: float
    t_high: float
    shift: float
    intervals: tuple[tuple[float, float, float, float], ...]  # (lo, hi, density, p_low)

    def __post_init__(self) -> None:
        mass = sum(d * (hi - lo) for lo, hi, d, _ in self.intervals)
        if abs(mass - 1.0) > 1e-9:
            raise ValueError(f"interval masses sum to {mass}, expected 1")
        object.__setattr__(self, "_v_marginal", self._build_v_cdf())

    def _build_v_cdf(self) -> PiecewiseLinearCdf:
        xs = [self.intervals[0][0]]
        ys = [0.0]
        acc = 0.0
        for lo, hi, d, _ in self.intervals:
            if lo > xs[-1] + 1e-15:  # support gap
                xs.append(lo)
                ys.append(acc)
            acc += d * (hi - lo)
            xs.append(hi)
            ys.append(min(1.0, acc))
        ys[-1] = 1.0
        return PiecewiseLinearCdf(np.array(xs), np.array(ys))

    def sample_vt_from_uniforms(self, u_main: np.ndarray, u_aux: np.ndarray):
        v = np.asarray(self._v_marginal.ppf(u_main), dtype=float)
        los = np.array([iv[0] for iv in self.intervals])
        p_low = np.array([iv[3] for iv in self.intervals])
        k = np.clip(np.searchsorted(los, v, side="right") - 1, 0, len(self.intervals) - 1)
        t = np.where(u_aux < p_low[k], self.t_low, self.t_high)
        return v, t

    def sample_from_uniforms(self, u_main: np.ndarray, u_aux: np.ndarray) -> np.ndarray:
        v, t = self.sample_vt_from_uniforms(u_main, u_aux)
        out = np.empty((v.size, 2))
        for tv in (self.t_low, self.t_high):
            m = t == tv
            if m.any():
                x = np.asarray(self.inst.curve_x_for_engagement(tv, v[m] - self.shift))
                out[m, 1] = x
                out[m, 0] = self.inst.min_investment(tv, x)
        return out

    def cheap_cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x, dtype=float)
        for tv, is_low in ((self.t_low, True), (self.t_high, False)):
            cut = np.asarray(self.inst.curve_engagement(tv, np.maximum(x, 0.0)),
                             dtype=float) + self.shift
            for lo, hi, d, p_low in self.intervals:
                p = p_low if is_low else 1.0 - p_low
                if p <= 0.0:
                    continue
                width = np.clip(np.minimum(cut, hi) - lo, 0.0, hi - lo)
                out = out + d * p * width
        out = np.where(x < 0.0, 0.0, np.minimum(out, 1.0))
        return out if out.ndim else float(out)

    def to_dict(self) -> dict:
        return {
            "kind": "vt_density",
            "t_low": self.t_low,
            "t_high": self.t_high,
            "shift": self.shift,
            "intervals": [list(iv) for iv in self.intervals],
        }


@dataclass(frozen=True)
class QualityComponent:
    """Quality marginal with no gaming (baseline equilibria)."""

    quality: PiecewiseLinearCdf

    def sample_from_uniforms(self, u_main: np.ndarray, u_aux: np.ndarray) -> np.ndarray:
        q = np.asarray(self.quality.ppf(u_main), dtype=float)
        return np.column_stack([q, np.zeros_like(q)])

    def cheap_cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = (x >= 0.0).astype(float)
        return out if out.ndim else float(out)

    def to_dict(self) -> dict:
        return {
            "kind": "quality",
            "quality_cdf_breakpoints": self.quality.breakpoints(),
            "quality_cdf_exponent": self.quality.exponent,
        }


Component = Union[AtomComponent, CurveComponent, VtDensityComponent, QualityComponent]


@dataclass(frozen=True)
class MixedStrategy:
    """Samplable, CDF-queryable mixture over content."""

    components: tuple[tuple[float, Component], ...]
    descriptor: str

    def __post_init__(self) -> None:
        weights = [w for w, _ in self.components]
        if any(w < 0.0 for w in weights):
            raise ValueError("component weights must be nonnegative")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise ValueError(f"component weights sum to {sum(weights)}, expected 1")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n i.i.d. contents as an (n, 2) array of (quality, gaming) rows.

        Draws a fixed number of uniforms per content, so the stream is
        reproducible regardless of which components get selected.
        """
        u_sel, u_main, u_aux = rng.random((3, n))
        cum = np.cumsum([w for w, _ in self.components])
        idx = np.searchsorted(cum, u_sel, side="right")
        idx = np.clip(idx, 0, len(self.components) - 1)
        out = np.empty((n, 2))
        for k, (_, comp) in enumerate(self.components):
            m = idx == k
            if m.any():
                out[m] = comp.sample_from_uniforms(u_main[m], u_aux[m])
        return out

    def sample_content(self, rng: np.random.Generator) -> Content:
        q, x = self.sample(rng, 1)[0]
        return Content(float(q), float(x))

    def cheap_marginal_cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x, dtype=float)
        for w, comp in self.components:
            out = out + w * np.asarray(comp.cheap_cdf(x), dtype=float)
        out = np.clip(out, 0.0, 1.0)
        return out if out.ndim else float(out)

    def to_dict(self) -> dict:
        return {
            "descriptor": self.descriptor,
            "components": [
                {"weight": w, **comp.to_dict()} for w, comp in self.components
            ],
        }


def sample_content(strategy: MixedStrategy, rng: np.random.Generator) -> Content:
    return strategy.sample_content(rng)


def cheap_marginal_cdf(strategy: MixedStrategy, x):
    return strategy.cheap_marginal_cdf(x)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise PreconditionError(msg)


def engagement_eq_homogeneous(inst: ModelInstance, P: int) -> MixedStrategy:
    """Engagement-optimization equilibrium for a single user type.

    The gaming marginal is min(1, C_t(x))^(1/(P-1)); quality rides the
    minimum-investment curve. If even the cheapest viable content costs at
    least 1, everyone opts out and the strategy degenerates to (0, 0).
    """
    _require(len(inst.type_space) == 1,
             "homogeneous construction requires exactly one type")
    if P < 2:
        raise ValueError("P must be >= 2")
    t = inst.types[0]
    if float(inst.curve_cost(t, 0.0)) >= 1.0:
        return MixedStrategy(((1.0, AtomComponent(0.0, 0.0)),),
                             descriptor=f"engagement_homogeneous_degenerate(P={P})")
    xs, ys, tail = inst.curve_cost_polyline(t)
    cdf = clipped_linear_cdf(xs, ys, tail, scale=1.0, exponent=1.0 / (P - 1))
    return MixedStrategy(((1.0, CurveComponent(inst, t, cdf)),),
                         descriptor=f"engagement_homogeneous(P={P})")


def _linear_coefficients(inst: ModelInstance) -> np.ndarray:
    params = inst.linearity_params()
    _require(params is not None,
             "construction requires linear induced costs "
             "(costless gaming; unit baseline for the linear family)")
    return np.asarray(params.coefficient(np.asarray(inst.types)), dtype=float)


def _require_free_entry(inst: ModelInstance) -> None:
    _require(all(float(inst.utility(0.0, 0.0, t)) >= 0.0 for t in inst.types),
             "construction requires zero-effort content to satisfy every type")


def n_prime(N: int) -> int:
    """Count of active mixture components for N well-separated types."""
    if N < 1:
        raise ValueError("N must be >= 1")
    acc = 0.0
    for i in range(1, N + 1):
        acc += 1.0 / (N - i + 1)
        if acc >= 1.0 - 1e-12:
            return i
    return N


def make_well_separated_types(N: int, eps: float) -> TypeSpace:
    """Geometrically spaced tolerances hitting the separation bound exactly."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if eps <= 0.0:
        raise ValueError("eps must be > 0")
    return TypeSpace.of((1.0 + eps) * (1.0 + 1.0 / N) ** i - 1.0 for i in range(N))


def well_separated_weights(N: int) -> list[float]:
    np_ = n_prime(N)
    weights = [1.0 / (N - i + 1) for i in range(1, np_)]
    weights.append(1.0 - sum(weights))
    return weights


def engagement_eq_well_separated(inst: ModelInstance) -> MixedStrategy:
    """Two-creator engagement equilibrium for N well-separated types.

    Mixture over the first N' type curves; component i scales the curve
    cost by N (by a larger factor for the last component) inside the
    clipped CDF. Requires adjacent coefficient ratios of at least 1 + 1/N.
    """
    a = _linear_coefficients(inst)
    _require_free_entry(inst)
    N = len(inst.type_space)
    for i in range(N - 1):
        if a[i] < (1.0 + 1.0 / N) * a[i + 1] - 1e-9:
            raise PreconditionError(
                f"types {inst.types[i]:g} and {inst.types[i + 1]:g} are not "
                f"well separated: ratio {a[i] / a[i + 1]:.6f} < 1 + 1/{N}")
    np_ = n_prime(N)
    weights = well_separated_weights(N)
    residual = weights[-1]
    comps = []
    for i in range(np_):
        t = inst.types[i]
        if i < np_ - 1:
            scale = float(N)
        else:
            scale = N / ((N - np_ + 1) * residual)
        xs, ys, tail = inst.curve_cost_polyline(t)
        cdf = clipped_linear_cdf(xs, ys, tail, scale=scale, exponent=1.0)
        comps.append((weights[i], CurveComponent(inst, t, cdf)))
    return MixedStrategy(tuple(comps),
                         descriptor=f"engagement_well_separated(N={N}, N'={np_})")


def two_type_case(ratio: float) -> int:
    """Case regime for a coefficient ratio > 1 (boundaries resolve downward)."""
    if ratio >= 1.5:
        return 1
    if ratio >= GOLDEN_RATIO_SPLIT:
        return 2
    return 3


def engagement_eq_two_types(inst: ModelInstance) -> MixedStrategy:
    """Two-creator engagement equilibrium for two arbitrary types.

    Built in the reparameterized space: a piecewise-constant density over
    v = M^E + s together with the per-interval probability that the draw
    targets the lower (less tolerant) type.
    """
    _require(len(inst.type_space) == 2, "construction requires exactly two types")
    a = _linear_coefficients(inst)
    _require_free_entry(inst)
    a1, a2 = float(a[0]), float(a[1])
    r = a1 / a2
    _require(r > 1.0, f"coefficient ratio must exceed 1, got {r}")
    case = two_type_case(r)
    if case == 1:
        intervals = (
            (1.0 / a1, 1.5 / a1, a1, 1.0),
            (1.0 / a2, 1.25 / a2, 2.0 * a2, 0.0),
        )
    elif case == 2:
        v_mid = 1.0 / (2.0 * a2 * (r - 1.0))
        v_top = (2.0 - r / 2.0) / a2
        intervals = (
            (1.0 / a1, 1.0 / a2, a1, 1.0),
            (1.0 / a2, v_mid, 2.0 * a2, r - 1.0),
            (v_mid, v_top, 2.0 * a2, 0.0),
        )
    else:
        v_mid = (3.0 - r) / (2.0 * a2 * (2.0 - r))
        v_top = 1.0 / a1 + (1.0 / a1 - 1.0 / (2.0 * a2)) * (3.0 - r) / (2.0 - r)
        intervals = (
            (1.0 / a1, 1.0 / a2, a1, 1.0),
            (1.0 / a2, v_mid, 2.0 * a2, r - 1.0),
            (v_mid, v_top, a1, 1.0),
        )
    # at case boundaries an interval can degenerate to (rounding-level
    # negative) width; drop it rather than feeding decreasing breakpoints in
    intervals = tuple(iv for iv in intervals
                      if iv[1] - iv[0] > 1e-14 * max(1.0, abs(iv[1])))
    shift = inst.linearity_params().shift
    comp = VtDensityComponent(inst, inst.types[0], inst.types[1], shift, intervals)
    return MixedStrategy(((1.0, comp),),
                         descriptor=f"engagement_two_type_case{case}(ratio={r:.4f})")


def _baseline_preconditions(inst: ModelInstance) -> float:
    """Shared baseline precondition; returns the single type's beta (or 0)."""
    betas = [inst.beta(t) for t in inst.types]
    if len(inst.type_space) == 1:
        return betas[0]
    _require(all(b == 0.0 for b in betas),
             "heterogeneous baseline equilibria require beta_t = 0 for all types")
    return 0.0


def investment_eq(inst: ModelInstance, P: int) -> MixedStrategy:
    """Investment-optimization equilibrium: pure quality, no gaming.

    Quality CDF is min(1, C(q))^(1/(P-1)) above the minimum viable
    investment, flat below it (the flat part is the opt-out atom at 0).
    """
    if P < 2:
        raise ValueError("P must be >= 2")
    beta = _baseline_preconditions(inst)
    kappa = min(1.0, float(inst.cost(beta, 0.0)))
    if kappa >= 1.0:
        return MixedStrategy(((1.0, AtomComponent(0.0, 0.0)),),
                             descriptor=f"investment_degenerate(P={P})")
    # cost along the quality axis is linear for the built-in families
    slope = float(inst.cost(1.0, 0.0)) - float(inst.cost(0.0, 0.0))
    q_end = beta + (1.0 - kappa) / slope
    if beta > 0.0:
        xs = np.array([0.0, beta, q_end])
        ys = np.array([kappa, kappa, 1.0])
    else:
        xs = np.array([0.0, q_end])
        ys = np.array([float(inst.cost(0.0, 0.0)), 1.0])
    cdf = PiecewiseLinearCdf(xs, ys, exponent=1.0 / (P - 1))
    return MixedStrategy(((1.0, QualityComponent(cdf)),),
                         descriptor=f"investment(P={P})")


def opt_out_probability(kappa: float, P: int) -> float:
    """Root of sum(nu^i, i=0..P-1) = P * kappa on [0, 1]; 0 when kappa <= 1/P."""
    if P < 2:
        raise ValueError("P must be >= 2")
    if not (0.0 <= kappa <= 1.0):
        raise ValueError("kappa must be in [0, 1]")
    if kappa <= 1.0 / P:
        return 0.0

    def poly(nu: float) -> float:
        return sum(nu ** i for i in range(P)) - P * kappa

    lo, hi = 0.0, 1.0
    if poly(hi) <= 0.0:
        return 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if poly(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-12:
            break
    return 0.5 * (lo + hi)


def random_eq(inst: ModelInstance, P: int) -> MixedStrategy:
    """Random-recommendation equilibrium.

    Homogeneous users either all play the minimum viable investment or mix
    it with opting out; with free entry for every type the whole population
    opts out to zero effort.
    """
    if P < 2:
        raise ValueError("P must be >= 2")
    beta = _baseline_preconditions(inst)
    if beta == 0.0:
        return MixedStrategy(((1.0, AtomComponent(0.0, 0.0)),),
                             descriptor=f"random(P={P})")
    kappa = min(1.0, float(inst.cost(beta, 0.0)))
    nu = opt_out_probability(kappa, P)
    comps: list[tuple[float, Component]] = []
    if nu > 0.0:
        comps.append((nu, AtomComponent(0.0, 0.0)))
    if nu < 1.0:
        comps.append((1.0 - nu, AtomComponent(beta, 0.0)))
    return MixedStrategy(tuple(comps), descriptor=f"random(P={P}, nu={nu:.6g})")
