"""Asymptotic order estimation for sup-norms of nets on a geometric eps-grid.

A net is sampled as S_k = max over a lattice in K of |d^beta u_{eps_k}|, and
log S_k is regressed against log eps_k over the tail half of the grid.  The
fitted slope drives the Moderate / NegligibleTo / Fails verdicts.  Verdicts
say "consistent with O(eps^m) on the tested grid", nothing stronger.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import expr as E
from .defaults import ABS_FLOOR, M_MAX, N_MAX, SLOPE_TOL, DEFAULTS
from .errors import EvaluationError, InsufficientData


@dataclass(frozen=True)
class EpsGrid:
    base: float = 2.0
    k_min: int = 6
    k_max: int = 20

    def __post_init__(self):
        if self.base <= 1.0:
            raise ValueError("grid base must exceed 1")
        if self.k_min < 0:
            raise ValueError("k_min must be non-negative so that eps <= 1")
        if self.k_max - self.k_min + 1 < 8:
            raise ValueError("an eps-grid needs at least 8 points")

    @property
    def ks(self):
        return np.arange(self.k_min, self.k_max + 1)

    @property
    def eps(self):
        return self.base ** (-self.ks.astype(float))

    def __len__(self):
        return self.k_max - self.k_min + 1

    def eps_at(self, k):
        return float(self.base ** (-float(k)))

    def truncate(self, k_max):
        return EpsGrid(self.base, self.k_min, min(self.k_max, k_max))

    def tail_slice(self):
        n = len(self)
        return slice(n - (n + 1) // 2, n)

    def to_dict(self):
        return {"base": self.base, "k_min": self.k_min, "k_max": self.k_max}


DEFAULT_GRID = EpsGrid()


@dataclass(frozen=True)
class CompactSet:
    """Box (per-axis bounds) or annulus r_in <= |x| <= r_out.

    The sampling lattice is endpoint-inclusive and uniform with ``samples``
    points per axis, augmented by an eps-scaled lattice around the origin so
    that features of width eps near 0 are seen at every grid value.
    """

    kind: str
    bounds: tuple = ()
    r_in: float = 0.0
    r_out: float = 0.0
    dim: int = 1
    samples: int = 0
    local: bool = True
    jitter_seed: int | None = None

    def __post_init__(self):
        if self.kind not in ("box", "annulus"):
            raise ValueError(f"unknown compact kind {self.kind}")
        if self.kind == "box":
            if len(self.bounds) != self.dim:
                raise ValueError("box needs one (lo, hi) pair per axis")
            for lo, hi in self.bounds:
                if not lo < hi:
                    raise ValueError(f"empty box side [{lo}, {hi}]")
        else:
            if not 0.0 < self.r_in < self.r_out:
                raise ValueError("annulus needs 0 < r_in < r_out")
        if self.samples == 0:
            object.__setattr__(
                self, "samples", DEFAULTS["samples_1d"] if self.dim == 1 else DEFAULTS["samples_2d"]
            )

    @classmethod
    def interval(cls, lo, hi, samples=0, **kw):
        return cls("box", ((float(lo), float(hi)),), dim=1, samples=samples, **kw)

    @classmethod
    def box(cls, bounds, samples=0, **kw):
        bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
        return cls("box", bounds, dim=len(bounds), samples=samples, **kw)

    @classmethod
    def annulus(cls, r_in, r_out, dim=1, samples=0, **kw):
        return cls("annulus", (), float(r_in), float(r_out), dim, samples, **kw)

    def describe(self):
        if self.kind == "box":
            return {"kind": "box", "bounds": [list(b) for b in self.bounds], "samples": self.samples}
        return {"kind": "annulus", "r_in": self.r_in, "r_out": self.r_out, "dim": self.dim,
                "samples": self.samples}

    def contains(self, pts):
        pts = np.atleast_2d(pts)
        if self.kind == "box":
            ok = np.ones(len(pts), dtype=bool)
            for i, (lo, hi) in enumerate(self.bounds):
                ok &= (pts[:, i] >= lo) & (pts[:, i] <= hi)
            return ok
        r = np.linalg.norm(pts, axis=1)
        return (r >= self.r_in) & (r <= self.r_out)

    def hull_radius(self):
        if self.kind == "box":
            return float(np.sqrt(sum(max(lo * lo, hi * hi) for lo, hi in self.bounds)))
        return self.r_out

    def min_radius(self):
        """Smallest |x| over K (0 when a box contains the origin)."""
        if self.kind == "annulus":
            return self.r_in
        d2 = 0.0
        for lo, hi in self.bounds:
            if lo > 0:
                d2 += lo * lo
            elif hi < 0:
                d2 += hi * hi
        return math.sqrt(d2)

    @cached_property
    def base_lattice(self):
        n = self.samples
        rng = np.random.default_rng(self.jitter_seed) if self.jitter_seed is not None else None
        if self.kind == "box":
            axes = []
            for lo, hi in self.bounds:
                ax = np.linspace(lo, hi, n)
                if rng is not None and n > 2:
                    h = (hi - lo) / (n - 1)
                    ax[1:-1] += rng.uniform(-0.25 * h, 0.25 * h, n - 2)
                axes.append(ax)
            mesh = np.meshgrid(*axes, indexing="ij")
            return np.stack([m.ravel() for m in mesh], axis=1)
        if self.dim == 1:
            r = np.linspace(self.r_in, self.r_out, n)
            return np.concatenate([-r[::-1], r])[:, None]
        if self.dim == 2:
            r = np.linspace(self.r_in, self.r_out, n)
            th = np.linspace(0.0, 2 * np.pi, 4 * (n - 1) + 1)
            rr, tt = np.meshgrid(r, th, indexing="ij")
            return np.stack([(rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel()], axis=1)
        # higher-dimensional annulus: box lattice filtered to the shell
        ax = np.linspace(-self.r_out, self.r_out, n)
        mesh = np.meshgrid(*([ax] * self.dim), indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        return pts[self.contains(pts)]

    def lattice(self, eps):
        base = self.base_lattice
        if not self.local:
            return base
        hw = DEFAULTS["local_halfwidth"]
        m = 257 if self.dim == 1 else 65
        t = np.linspace(-hw, hw, m) * eps
        if self.dim == 1:
            loc = t[:, None]
        else:
            mesh = np.meshgrid(*([t] * self.dim), indexing="ij")
            loc = np.stack([g.ravel() for g in mesh], axis=1)
        loc = loc[self.contains(loc)]
        if len(loc) == 0:
            return base
        return np.concatenate([base, loc])


def default_compacts(dim, pierced=False):
    if pierced:
        return [CompactSet.annulus(0.5, 2.0, dim)]
    return [CompactSet.box([(-1.0, 1.0)] * dim)]


@dataclass
class DecaySamples:
    ks: np.ndarray
    eps: np.ndarray
    values: np.ndarray
    deriv: tuple = ()
    label: str = ""

    def __post_init__(self):
        self.ks = np.asarray(self.ks)
        self.eps = np.asarray(self.eps, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if np.isnan(self.values).any():
            raise EvaluationError("NaN in decay samples")
        if (self.values < 0).any():
            raise ValueError("decay samples must be non-negative")

    def scaled(self, factor):
        return DecaySamples(self.ks, self.eps, self.values * factor, self.deriv, self.label)

    def tail(self):
        n = len(self.values)
        return slice(n - (n + 1) // 2, n)

    def to_dict(self):
        return {"k": self.ks.tolist(), "eps": self.eps.tolist(),
                "values": [float(v) for v in self.values], "deriv": list(self.deriv)}


def samples_from_values(grid, values, label=""):
    return DecaySamples(grid.ks, grid.eps, np.abs(np.asarray(values, dtype=float)), (), label)


def sample_sup(net, K, deriv=None, grid=DEFAULT_GRID, jobs=1):
    """S_k = max over the lattice of K of |d^deriv u_{eps_k}|, one per grid point."""
    if deriv is None:
        deriv = (0,) * net.dim
    deriv = tuple(deriv)
    if sum(deriv) > 8:
        raise ValueError("derivative order above 8")
    if K.dim != net.dim:
        raise ValueError(f"compact set of dimension {K.dim} for a net of dimension {net.dim}")

    def one(k):
        eps = grid.eps_at(k)
        pts = K.lattice(eps)
        focus = getattr(net, "focus_points", None)
        extra = focus(k, K) if focus is not None else None
        if extra is not None and len(extra):
            pts = np.concatenate([pts, extra])
        net.check_points(pts, eps)
        e = net.derivative_at(k, deriv)
        if e.op == "const":
            return abs(e.value)
        vals = E.evaluate_array(e, pts, eps, net.mollifier)
        return float(np.max(np.abs(vals)))

    ks = [int(k) for k in grid.ks]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            values = list(pool.map(one, ks))
    else:
        values = [one(k) for k in ks]
    return DecaySamples(grid.ks, grid.eps, values, deriv)


@dataclass
class FitResult:
    slope: float
    intercept: float
    residual: float
    window: tuple
    n_used: int


def fit_order(s, window="tail"):
    """Least-squares slope of log S_k against log eps_k.

    ``window="tail"`` uses the tail half of the grid; ``"resolved"`` uses every
    sample above the absolute noise floor (for sequences that reach round-off
    before the tail).  All-zero windows return slope +inf, any overflow -inf.
    """
    if len(s.values) < 8:
        raise InsufficientData("fit_order needs at least 8 samples")
    if window == "tail":
        sl = s.tail()
        vals, eps, ks = s.values[sl], s.eps[sl], s.ks[sl]
        keep = vals > 0
    elif window == "resolved":
        vals, eps, ks = s.values, s.eps, s.ks
        keep = vals > ABS_FLOOR
    else:
        raise ValueError(f"unknown window {window}")
    win = (int(ks[0]), int(ks[-1]))
    if np.isinf(vals).any():
        return FitResult(-math.inf, math.nan, math.nan, win, int(np.isinf(vals).sum()))
    if not keep.any():
        return FitResult(math.inf, math.nan, 0.0, win, 0)
    if keep.sum() < (4 if window == "tail" else 3):
        raise InsufficientData(f"only {int(keep.sum())} usable samples in window {win}")
    lx = np.log(eps[keep])
    ly = np.log(vals[keep])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return FitResult(float(slope), float(intercept), float(np.sqrt(np.mean(resid ** 2))), win,
                     int(keep.sum()))


_RANK = {"Fails": 0, "NoEvidence": 0, "Moderate": 1, "NegligibleTo": 1, "ExactZero": 2}


@dataclass
class DecayVerdict:
    """Outcome of an asymptotic check.

    ``outcome`` is one of ExactZero, NegligibleTo, Moderate, Fails; ``order``
    holds m for NegligibleTo and N for Moderate.
    """

    outcome: str
    order: float | None = None
    slope: float = math.nan
    intercept: float = math.nan
    residual: float = math.nan
    window: tuple = ()
    detail: dict = field(default_factory=dict)
    cells: list = field(default_factory=list)

    @property
    def passed(self):
        return self.outcome != "Fails"

    def __str__(self):
        if self.outcome in ("NegligibleTo", "Moderate"):
            return f"{self.outcome}({self.order:g}, slope={self.slope:.4g})"
        if self.outcome == "Fails":
            return f"Fails(slope={self.slope:.4g})"
        return self.outcome

    def to_dict(self):
        def num(v):
            if v is None:
                return None
            v = float(v)
            if math.isnan(v):
                return None
            if math.isinf(v):
                return "inf" if v > 0 else "-inf"
            return v

        out = {
            "outcome": self.outcome,
            "order": num(self.order),
            "slope": num(self.slope),
            "intercept": num(self.intercept),
            "residual": num(self.residual),
            "window": list(self.window),
            "passed": self.passed,
        }
        if self.detail:
            out["detail"] = _jsonable(self.detail)
        if self.cells:
            out["cells"] = [c.to_dict() if isinstance(c, DecayVerdict) else _jsonable(c)
                            for c in self.cells]
        return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, DecayVerdict):
        return obj.to_dict()
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    return obj


def exact_zero(detail=None):
    return DecayVerdict("ExactZero", slope=math.inf, residual=0.0, detail=detail or {})


def verdict_negligible(s, m, slope_tol=SLOPE_TOL, abs_floor=ABS_FLOOR, m_max=M_MAX):
    if m > m_max:
        raise ValueError(f"negligibility order {m} exceeds m_max={m_max}")
    tail = s.values[s.tail()]
    if np.all(tail <= abs_floor):
        try:
            fit = fit_order(s)
        except InsufficientData:
            fit = FitResult(math.inf, math.nan, 0.0, (int(s.ks[s.tail()][0]), int(s.ks[-1])), 0)
        return DecayVerdict("NegligibleTo", m, fit.slope, fit.intercept, fit.residual, fit.window,
                            {"below_floor": True})
    fit = fit_order(s)
    if fit.slope >= m - slope_tol:
        return DecayVerdict("NegligibleTo", m, fit.slope, fit.intercept, fit.residual, fit.window)
    return DecayVerdict("Fails", None, fit.slope, fit.intercept, fit.residual, fit.window,
                        {"required_order": m})


def verdict_moderate(s, N_max=N_MAX, slope_tol=SLOPE_TOL):
    if N_max > 40:
        raise ValueError("N_max above 40")
    fit = fit_order(s)
    if fit.slope == math.inf:
        return DecayVerdict("Moderate", 0, fit.slope, fit.intercept, fit.residual, fit.window)
    if fit.slope < -N_max:
        return DecayVerdict("Fails", None, fit.slope, fit.intercept, fit.residual, fit.window,
                            {"N_max": N_max})
    N = max(0, math.ceil(-fit.slope - slope_tol))
    return DecayVerdict("Moderate", N, fit.slope, fit.intercept, fit.residual, fit.window)


def worst_of(verdicts):
    """Conjunction: the first failing cell, else the weakest passing one."""
    verdicts = list(verdicts)
    if not verdicts:
        raise ValueError("no verdicts to combine")
    for v in verdicts:
        if not v.passed:
            out = _copy(v)
            out.cells = verdicts
            return out
    if all(v.outcome == "ExactZero" for v in verdicts):
        out = _copy(verdicts[0])
        out.cells = verdicts
        return out
    live = [v for v in verdicts if v.outcome != "ExactZero"]
    if live[0].outcome == "Moderate":
        pick = max(live, key=lambda v: (v.order, -v.slope))
    else:
        pick = min(live, key=lambda v: v.slope)
    out = _copy(pick)
    out.cells = verdicts
    return out


def _copy(v):
    return DecayVerdict(v.outcome, v.order, v.slope, v.intercept, v.residual, v.window,
                        dict(v.detail), [])
