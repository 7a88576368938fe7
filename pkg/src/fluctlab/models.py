"""Translation-invariant model states given by momentum-space truncated correlators.

A state is a hierarchy of evaluators, one per correlator order l: the order-l
evaluator maps the l-1 transfer momenta (q_1, ..., q_{l-1}) to the complex
truncated-correlator density S_l.  The convention is the plain transform

    S_l(q_1,...,q_{l-1}) = integral( W_l(y_1,...,y_{l-1})
                                     * exp(+i sum q_i.y_i) prod dy_i )

in the difference variables y_i, with no normalization prefactor (see
``fluctlab.window`` for the convention summary).  Order 1 is identically
zero: observables are centered.

Evaluators are pure and vectorized; hierarchies are immutable after
construction and safe for concurrent evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gamma as _gamma_fn
from math import pi
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.special import kv as _bessel_kv

from .errors import ModelValidationError, OrderRangeError, UnsupportedModeError

# An evaluator receives, per difference variable, a tuple of n broadcastable
# component arrays, and returns the broadcast complex density.
QVars = Sequence[Sequence[np.ndarray]]
Evaluator = Callable[[QVars], np.ndarray]


def radial_norm(components: Sequence[np.ndarray]) -> np.ndarray:
    """|q| from broadcastable component arrays without stacking."""
    if len(components) == 1:
        return np.abs(components[0])
    acc = components[0] ** 2
    for c in components[1:]:
        acc = acc + c ** 2
    return np.sqrt(acc)


@dataclass(frozen=True)
class DecayTag:
    """Clustering class of one correlator order."""

    kind: str  # "l1" | "l2" | "weighted" | "goldstone"
    param: float | None = None
    boundary: bool = False

    def as_dict(self) -> dict:
        return {"kind": self.kind, "param": self.param, "boundary": self.boundary}


@dataclass(frozen=True)
class WeightedCorrelator:
    """Order-l correlator factored as W = (1 + sum |y_i|^2)^(alpha/2) * F.

    ``f_position`` maps component tuples of the y variables to F values;
    ``f_momentum`` (optional) is the plain transform of F, used on the
    spectral path for even integer alpha.
    """

    order: int
    alpha: float
    f_position: Callable
    f_momentum: Callable | None = None

    def weight(self, yvars: QVars) -> np.ndarray:
        acc = 0.0
        for comp in yvars:
            for c in comp:
                acc = acc + np.asarray(c) ** 2
        return (1.0 + acc) ** (self.alpha / 2.0)

    def position_value(self, yvars: QVars) -> np.ndarray:
        return self.weight(yvars) * self.f_position(yvars)


@dataclass(frozen=True)
class TruncatedHierarchy:
    """Momentum-space truncated correlator hierarchy of a model state."""

    dim: int
    max_order: int
    evaluators: Mapping[int, Evaluator] = field(repr=False)
    tags: Mapping[int, DecayTag]
    position_forms: Mapping[int, Callable] = field(default_factory=dict, repr=False)
    weighted_orders: Mapping[int, WeightedCorrelator] = field(default_factory=dict, repr=False)

    def evaluate(self, order: int, qvars: QVars) -> np.ndarray:
        """S_l at transfer momenta given as per-variable component tuples."""
        if order < 1 or order > self.max_order:
            raise OrderRangeError(f"order {order} outside 1..{self.max_order}")
        if order == 1:
            return np.asarray(0.0 + 0.0j)
        if order in self.weighted_orders:
            raise UnsupportedModeError(
                f"order {order} is weighted; use the weighted correlator path"
            )
        fn = self.evaluators.get(order)
        if fn is None:
            shape = np.broadcast(*[c for comp in qvars for c in comp]).shape
            return np.zeros(shape, dtype=complex)
        return np.asarray(fn(qvars), dtype=complex)

    def two_point(self, k) -> np.ndarray:
        """Convenience: S_2 at momentum k (shape (...,) for n=1, (..., n) else)."""
        k = np.asarray(k, dtype=float)
        if self.dim == 1:
            comps = (k,)
        else:
            comps = tuple(k[..., i] for i in range(self.dim))
        return self.evaluate(2, (comps,))

    def tag(self, order: int) -> DecayTag:
        return self.tags.get(order, DecayTag("l1"))

    def position_form(self, order: int) -> Callable:
        if order in self.weighted_orders:
            wc = self.weighted_orders[order]
            return wc.position_value
        fn = self.position_forms.get(order)
        if fn is None:
            raise UnsupportedModeError(f"no position-space form available for order {order}")
        return fn

    def shifted(self, slot: int, displacement) -> "TruncatedHierarchy":
        """State with one observable slot displaced by a fixed vector.

        Displacing slot i multiplies the order-l density by
        exp(+i a.(q_i - q_{i-1})) (q_0 = q_l = 0 edge cases included), which
        tends to 1 after the scaling substitution; used for the
        translation-invariance check of the limit.
        """
        a = np.atleast_1d(np.asarray(displacement, dtype=float))
        base = self

        def make(order, fn):
            def shifted_fn(qvars):
                phase_arg = 0.0
                if 1 <= slot <= order - 1:
                    for c, ai in zip(qvars[slot - 1], a):
                        phase_arg = phase_arg + ai * c
                if 2 <= slot <= order:
                    for c, ai in zip(qvars[slot - 2], a):
                        phase_arg = phase_arg - ai * c
                return fn(qvars) * np.exp(1j * phase_arg)

            return shifted_fn

        new_evals = {o: make(o, fn) for o, fn in base.evaluators.items()}
        return TruncatedHierarchy(
            dim=base.dim,
            max_order=base.max_order,
            evaluators=new_evals,
            tags=dict(base.tags),
            position_forms={},
            weighted_orders=dict(base.weighted_orders),
        )


# ---------------------------------------------------------------------------
# validation helpers
# ---------------------------------------------------------------------------

def _validation_grid(dim: int, k_lo: float = 1e-3, k_hi: float = 20.0, count: int = 257):
    """Signed sample momenta along a few directions, avoiding exactly 0."""
    r = np.geomspace(k_lo, k_hi, count)
    r = np.concatenate([-r[::-1], r])
    if dim == 1:
        return [(r,)]
    dirs = np.eye(dim).tolist() + [np.full(dim, 1.0 / np.sqrt(dim)).tolist()]
    grids = []
    for d in dirs:
        grids.append(tuple(r * di for di in d))
    return grids


def check_autocorrelation(two_point: Callable, dim: int, rtol: float = 1e-9) -> None:
    """Hermiticity S(-k) = conj(S(k)) and positivity S >= 0 on a sample grid."""
    for comps in _validation_grid(dim):
        k = comps[0] if dim == 1 else np.stack(comps, axis=-1)
        vals = np.asarray(two_point(k), dtype=complex)
        flipped = np.asarray(two_point(-k), dtype=complex)
        scale = float(np.max(np.abs(vals))) or 1.0
        if not np.all(np.isfinite(vals)):
            raise ModelValidationError("two-point evaluator not finite on the sample grid")
        if np.max(np.abs(flipped - np.conj(vals))) > rtol * scale:
            raise ModelValidationError("two-point evaluator violates hermiticity S(-k) = conj S(k)")
        if np.min(vals.real) < -rtol * scale or np.max(np.abs(vals.imag)) > rtol * scale:
            raise ModelValidationError("two-point autocorrelation violates positivity on the grid")


def _wrap_two_point(two_point: Callable, dim: int) -> Evaluator:
    def ev(qvars):
        comps = qvars[0]
        k = comps[0] if dim == 1 else np.stack(np.broadcast_arrays(*comps), axis=-1)
        return two_point(k)

    return ev


# ---------------------------------------------------------------------------
# state constructors
# ---------------------------------------------------------------------------

def gaussian_state(two_point: Callable, dim: int, *, position_two_point: Callable | None = None,
                   max_order: int = 8, validate: bool = True) -> TruncatedHierarchy:
    """Quasi-free input state: all truncated correlators beyond order 2 vanish."""
    if validate:
        check_autocorrelation(two_point, dim)
    pos = {}
    if position_two_point is not None:
        pos[2] = lambda yvars: position_two_point(
            yvars[0][0] if dim == 1 else np.stack(np.broadcast_arrays(*yvars[0]), axis=-1)
        )
    return TruncatedHierarchy(
        dim=dim,
        max_order=max_order,
        evaluators={2: _wrap_two_point(two_point, dim)},
        tags={2: DecayTag("l1")},
        position_forms=pos,
    )


@dataclass(frozen=True)
class GaussianProfile:
    """Radial Gaussian difference profile g(y) = amp * exp(-|y|^2/(2 width^2))."""

    amplitude: float
    width: float
    dim: int = 1

    def position(self, r):
        return self.amplitude * np.exp(-np.asarray(r) ** 2 / (2.0 * self.width ** 2))

    def momentum(self, r):
        c = self.amplitude * (2.0 * pi * self.width ** 2) ** (self.dim / 2.0)
        return c * np.exp(-self.width ** 2 * np.asarray(r) ** 2 / 2.0)


def product_ansatz_state(profiles: Mapping[int, Sequence], dim: int, *,
                         max_order: int | None = None) -> TruncatedHierarchy:
    """State whose order-l correlator factorizes over difference variables.

    ``profiles[l]`` is a sequence of l-1 radial profiles; the momentum
    density is the product of the per-variable transforms, so higher
    truncated correlators are nonzero with fully controlled decay.
    """
    for order, profs in profiles.items():
        if len(profs) != order - 1:
            raise OrderRangeError(f"order {order} needs {order - 1} profiles, got {len(profs)}")
    max_order = max_order or max(profiles)

    def make_eval(profs):
        def ev(qvars):
            out = None
            for comp, prof in zip(qvars, profs):
                term = prof.momentum(radial_norm(comp))
                out = term if out is None else out * term
            return out

        return ev

    def make_pos(profs):
        def pos(yvars):
            out = None
            for comp, prof in zip(yvars, profs):
                term = prof.position(radial_norm(comp))
                out = term if out is None else out * term
            return out

        return pos

    evaluators = {o: make_eval(p) for o, p in profiles.items()}
    position_forms = {o: make_pos(p) for o, p in profiles.items() if all(hasattr(q, "position") for q in p)}
    tags = {o: DecayTag("l1") for o in profiles}
    if 2 in profiles:
        check_autocorrelation(_two_point_from(evaluators[2], dim), dim)
    return TruncatedHierarchy(dim=dim, max_order=max_order, evaluators=evaluators,
                              tags=tags, position_forms=position_forms)


def _two_point_from(ev: Evaluator, dim: int) -> Callable:
    def two_point(k):
        k = np.asarray(k, dtype=float)
        comps = (k,) if dim == 1 else tuple(k[..., i] for i in range(dim))
        return ev((comps,))

    return two_point


def powerlaw_two_point(beta: float, dim: int) -> Callable:
    """Plain transform of (1 + |y|^2)^(-beta/2) on R^n (Bessel-K closed form).

    Behaves like |k|^(beta - n) near k = 0 when beta < n (singular,
    discontinuous at the origin) and is finite there for beta > n.
    """
    nu = (dim - beta) / 2.0
    const = (2.0 * pi) ** (dim / 2.0) * 2.0 ** (1.0 - beta / 2.0) / _gamma_fn(beta / 2.0)
    finite_zero = None
    if beta > dim:
        finite_zero = pi ** (dim / 2.0) * _gamma_fn((beta - dim) / 2.0) / _gamma_fn(beta / 2.0)

    def two_point(k):
        k = np.asarray(k, dtype=float)
        r = np.abs(k) if dim == 1 or k.ndim == 0 else np.linalg.norm(k, axis=-1)
        r = np.atleast_1d(r)
        safe = np.where(r > 0, r, 1.0)
        vals = const * safe ** ((beta - dim) / 2.0) * _bessel_kv(nu, safe)
        if finite_zero is not None:
            vals = np.where(r > 0, vals, finite_zero)
        else:
            vals = np.where(r > 0, vals, np.inf)
        return vals.reshape(np.shape(r)) if np.ndim(k) else vals[0]

    return two_point


def powerlaw_state(beta: float, dim: int, *, max_order: int = 8) -> TruncatedHierarchy:
    """Two-point state with position decay |y|^(-beta): L2-class for n/2 < beta <= n."""
    if beta <= dim / 2.0:
        raise ModelValidationError(
            f"beta = {beta} <= n/2: not square-integrable clustering; "
            "use goldstone_state or the weighted machinery"
        )
    two_point = powerlaw_two_point(beta, dim)
    if beta > dim:
        tag = DecayTag("l1", param=beta)
    else:
        tag = DecayTag("l2", param=beta, boundary=(beta == dim))

    def position(yvars):
        r = radial_norm(yvars[0])
        return (1.0 + r ** 2) ** (-beta / 2.0)

    return TruncatedHierarchy(
        dim=dim,
        max_order=max_order,
        evaluators={2: _wrap_two_point(two_point, dim)},
        tags={2: tag},
        position_forms={2: position},
    )


def weighted_state(correlators: Sequence[WeightedCorrelator], dim: int, *,
                   max_order: int | None = None) -> TruncatedHierarchy:
    """State with polynomially weighted orders W_l = (1 + sum y_i^2)^(alpha_l/2) F_l.

    Evaluation goes through the scaling engine's weighted path; the plain
    momentum evaluator is intentionally absent for weighted orders.
    """
    weighted = {}
    for wc in correlators:
        if wc.alpha < 0:
            raise ModelValidationError(f"weight exponent alpha_{wc.order} = {wc.alpha} must be >= 0")
        grid = np.linspace(-40.0, 40.0, 801)
        yvars = tuple((grid,) + (np.zeros(1),) * (dim - 1) for _ in range(wc.order - 1))
        try:
            probe = np.asarray(wc.f_position(yvars))
        except Exception as exc:  # pragma: no cover - defensive
            raise ModelValidationError(f"order-{wc.order} factor not evaluable: {exc}") from exc
        if not np.all(np.isfinite(probe)):
            raise ModelValidationError(f"order-{wc.order} integrable factor is not finite on the grid")
        weighted[wc.order] = wc
    max_order = max_order or max(weighted)
    tags = {o: DecayTag("weighted", param=wc.alpha) for o, wc in weighted.items()}
    return TruncatedHierarchy(dim=dim, max_order=max_order, evaluators={},
                              tags=tags, weighted_orders=weighted)


def smooth_cutoff(t) -> np.ndarray:
    """C^4 radial cutoff: 1 for t <= 1, 0 for t >= 2 (quintic-smoothstep edge)."""
    t = np.abs(np.asarray(t, dtype=float))
    u = np.clip(t - 1.0, 0.0, 1.0)
    step = u ** 5 * (126.0 + u * (-420.0 + u * (540.0 + u * (-315.0 + 70.0 * u))))
    return 1.0 - step


def goldstone_state(dim: int, singular_weight: float, infrared_exponent: float = 2.0,
                    uv_cutoff: float = 4.0, *, max_order: int = 2) -> TruncatedHierarchy:
    """Two-point state with an infrared |k|^(-s) spectral singularity.

    The spectral density c |k|^(-s) chi(|k|/k_cut) is integrable only for
    s < n; that is enforced here.
    """
    s = infrared_exponent
    if s >= dim:
        raise ModelValidationError(
            f"infrared exponent s = {s} >= n = {dim}: spectral density not integrable"
        )

    def two_point(k):
        k = np.asarray(k, dtype=float)
        r = np.abs(k) if dim == 1 or k.ndim == 0 else np.linalg.norm(k, axis=-1)
        r = np.asarray(r)
        safe = np.where(r > 0, r, 1.0)
        vals = singular_weight * safe ** (-s) * smooth_cutoff(r / uv_cutoff)
        return np.where(r > 0, vals, np.inf if singular_weight != 0 else 0.0)

    return TruncatedHierarchy(
        dim=dim,
        max_order=max_order,
        evaluators={2: _wrap_two_point(two_point, dim)},
        tags={2: DecayTag("goldstone", param=s)},
    )


@dataclass(frozen=True)
class ObservablePair:
    """Two observables with both mixed two-point densities.

    ``f_hat`` is the plain spectral density of <A(x) B>, ``g_hat`` the one
    of <B A(x)>; both must be of integrable (L1) clustering class when fed
    to the commutator criterion.
    """

    label_a: str
    label_b: str
    f_hat: Callable
    g_hat: Callable
    l1_class: bool = True
