"""Run configuration: parsing, defaults, validation, schema.

Configs are JSON with four blocks (model, window, analyses, numeric) plus an
optional output block.  Parsing is strict: duplicate keys and unknown keys
are errors, and the requested analyses must be compatible with the model's
clustering class.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import ConfigError
from .models import (
    GaussianProfile,
    TruncatedHierarchy,
    WeightedCorrelator,
    gaussian_state,
    goldstone_state,
    powerlaw_state,
    powerlaw_two_point,
    product_ansatz_state,
    radial_norm,
    weighted_state,
)
from .scaling import ScalingConfig, l2_alpha_window
from .ssb import Dispersion, EnergySmoothing, GoldstoneModel, RadialWeight, SpectralVectorModel

SCHEMA_ID = "fluctlab-config/1"
REPORT_SCHEMA_ID = "fluctlab-report/1"

MODEL_CLASSES = (
    "gaussian",
    "product-ansatz",
    "powerlaw",
    "weighted",
    "goldstone-spectrum",
    "goldstone-ssb",
    "spectral-vector",
    "pair-family",
)
ANALYSIS_KINDS = (
    "scaling-sweep",
    "qmode",
    "cumulant-roundtrip",
    "limit-state",
    "ssb-bound",
    "projector",
    "gap-check",
)

_TOP_KEYS = {"schema", "model", "window", "analyses", "numeric", "output"}
_WINDOW_KEYS = {"kind", "dim", "resolution", "smoothstep_order"}
_NUMERIC_KEYS = {
    "r_grid", "eps_vanish", "exponent_band", "alpha_mode", "alpha",
    "quad", "min_decades",
}
_OUTPUT_KEYS = {"directory", "basename", "formats"}


def _no_duplicates(pairs):
    seen = set()
    out = {}
    for key, value in pairs:
        if key in seen:
            raise ConfigError(f"duplicate key {key!r} in configuration")
        seen.add(key)
        out[key] = value
    return out


def _check_keys(block: dict, allowed: set, where: str):
    unknown = sorted(set(block) - allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {', '.join(unknown)}")


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run configuration."""

    model_block: dict
    window_block: dict
    analyses: tuple
    numeric_block: dict
    output_block: dict
    raw: dict = field(repr=False)

    def resolved(self) -> dict:
        """Canonical echo of the configuration with all defaults filled."""
        return {
            "schema": SCHEMA_ID,
            "model": self.model_block,
            "window": self.window_block,
            "analyses": list(self.analyses),
            "numeric": self.numeric_block,
            "output": self.output_block,
        }

    # -- factories ----------------------------------------------------------

    def scaling_config(self, overrides: dict | None = None) -> ScalingConfig:
        nb = dict(self.numeric_block)
        if overrides:
            nb.update(overrides)
        grid = nb["r_grid"]
        r = tuple(
            float(x)
            for x in np.geomspace(grid["start"], grid["stop"], grid["count"]).round(10)
        )
        return ScalingConfig(
            r_values=r,
            alpha_mode=nb["alpha_mode"],
            alpha=nb["alpha"],
            eps_vanish=nb["eps_vanish"],
            exponent_band=nb["exponent_band"],
            quad_overrides={int(k): tuple(v) for k, v in nb.get("quad", {}).items()},
            min_decades=nb["min_decades"],
        )

    def build_window(self, cache_dir=None):
        from .window import load_or_build

        wb = self.window_block
        return load_or_build(wb["kind"], wb["dim"], wb["resolution"], cache_dir=cache_dir,
                             smoothstep_order=wb["smoothstep_order"])

    def build_model(self):
        return build_model(self.model_block)


# ---------------------------------------------------------------------------
# density / profile little language
# ---------------------------------------------------------------------------

def _density_from(spec: dict, dim: int, where: str):
    _check_keys(spec, {"form", "amplitude", "amplitude_im", "width", "power"}, where)
    form = spec.get("form")
    amp = complex(spec.get("amplitude", 1.0), spec.get("amplitude_im", 0.0))
    width = float(spec.get("width", 1.0))
    if form == "gaussian":
        def density(k):
            k = np.asarray(k, dtype=float)
            r2 = k ** 2 if dim == 1 or k.ndim == 0 else np.sum(k ** 2, axis=-1)
            return amp * np.exp(-(width ** 2) * r2 / 2.0)
        return density
    if form == "lorentzian":
        def density(k):
            k = np.asarray(k, dtype=float)
            r2 = k ** 2 if dim == 1 or k.ndim == 0 else np.sum(k ** 2, axis=-1)
            return amp / (1.0 + width ** 2 * r2)
        return density
    raise ConfigError(f"unknown density form {form!r} in {where} (use gaussian|lorentzian)")


def _weighted_factor(spec: dict, order: int, dim: int, where: str):
    _check_keys(spec, {"form", "power", "amplitude", "width"}, where)
    form = spec.get("form")
    d = (order - 1) * dim
    if form == "bessel-power":
        power = float(spec["power"])
        momentum = powerlaw_two_point(power, d)

        def f_position(yvars):
            acc = 0.0
            for comp in yvars:
                for c in comp:
                    acc = acc + np.asarray(c) ** 2
            return (1.0 + acc) ** (-power / 2.0)

        def f_momentum(qvars):
            flat = [c for comp in qvars for c in comp]
            return momentum(radial_norm(flat))

        return f_position, f_momentum
    if form == "gaussian":
        amp = float(spec.get("amplitude", 1.0))
        width = float(spec.get("width", 1.0))
        c_mom = amp * (2.0 * np.pi * width ** 2) ** (d / 2.0)

        def f_position(yvars):
            acc = 0.0
            for comp in yvars:
                for c in comp:
                    acc = acc + np.asarray(c) ** 2
            return amp * np.exp(-acc / (2.0 * width ** 2))

        def f_momentum(qvars):
            acc = 0.0
            for comp in qvars:
                for c in comp:
                    acc = acc + np.asarray(c) ** 2
            return c_mom * np.exp(-(width ** 2) * acc / 2.0)

        return f_position, f_momentum
    raise ConfigError(f"unknown factor form {form!r} in {where} (use bessel-power|gaussian)")


def build_model(block: dict):
    cls = block["class"]
    dim = int(block["dim"])
    if cls == "gaussian":
        return gaussian_state(_density_from(block["two_point"], dim, "model.two_point"), dim)
    if cls == "product-ansatz":
        profiles = {}
        for order_str, plist in block["orders"].items():
            order = int(order_str)
            profs = []
            for p in plist:
                _check_keys(p, {"amplitude", "width"}, f"model.orders[{order}]")
                profs.append(GaussianProfile(float(p.get("amplitude", 1.0)),
                                             float(p.get("width", 1.0)), dim))
            profiles[order] = profs
        return product_ansatz_state(profiles, dim)
    if cls == "powerlaw":
        return powerlaw_state(float(block["beta"]), dim)
    if cls == "weighted":
        correlators = []
        for spec in block["orders"]:
            _check_keys(spec, {"order", "alpha", "factor"}, "model.orders[]")
            order = int(spec["order"])
            f_pos, f_mom = _weighted_factor(spec["factor"], order, dim,
                                            f"model.orders[{order}].factor")
            correlators.append(WeightedCorrelator(order=order, alpha=float(spec["alpha"]),
                                                  f_position=f_pos, f_momentum=f_mom))
        return weighted_state(correlators, dim)
    if cls == "goldstone-spectrum":
        return goldstone_state(dim, float(block["c"]), float(block.get("s", 2.0)),
                               float(block.get("uv_cutoff", 4.0)))
    if cls == "goldstone-ssb":
        disp = block.get("dispersion", {})
        qa = block.get("rho_qa", {})
        return GoldstoneModel(
            dim=dim,
            dispersion=Dispersion(disp.get("kind", "linear"), float(disp.get("speed", 1.0))),
            rho_a=RadialWeight(**block.get("rho_a", {"amplitude": 1.0, "exponent": -2.0})),
            rho_q=RadialWeight(**block.get("rho_q", {"amplitude": 0.5, "exponent": 1.0})),
            rho_qa_amplitude=complex(qa.get("re", 0.0), qa.get("im", 0.25)),
            rho_qa_exponent=float(qa.get("exponent", 0.0)),
            gap=float(block.get("gap", 0.0)),
        )
    if cls == "spectral-vector":
        samples = tuple((float(e), float(p), complex(a)) for e, p, a in block["samples"])
        return SpectralVectorModel(samples=samples,
                                   invariant_amplitude=complex(block.get("invariant_amplitude", 1.0)))
    if cls == "pair-family":
        labels = tuple(block["labels"])
        densities = {}
        for key, spec in block["pairs"].items():
            i, j = labels.index(key[0]), labels.index(key[1])
            densities[(i, j)] = _density_from(spec, dim, f"model.pairs[{key}]")
        from .limit_algebra import ObservableFamily

        def pair_density(i, j):
            try:
                return densities[(i, j)]
            except KeyError:
                raise ConfigError(f"pair density {labels[i]}{labels[j]} missing") from None

        return ObservableFamily(labels=labels, pair_density=pair_density, dim=dim)
    raise ConfigError(f"unknown model class {cls!r}")


# ---------------------------------------------------------------------------
# parsing and compatibility validation
# ---------------------------------------------------------------------------

def _resolve_numeric(block: dict) -> dict:
    _check_keys(block, _NUMERIC_KEYS, "numeric")
    grid = dict(block.get("r_grid", {}))
    _check_keys(grid, {"start", "stop", "count"}, "numeric.r_grid")
    grid = {"start": float(grid.get("start", 8.0)), "stop": float(grid.get("stop", 512.0)),
            "count": int(grid.get("count", 8))}
    return {
        "r_grid": grid,
        "eps_vanish": float(block.get("eps_vanish", 1e-8)),
        "exponent_band": float(block.get("exponent_band", 0.1)),
        "alpha_mode": block.get("alpha_mode", "canonical"),
        "alpha": None if block.get("alpha") is None else float(block["alpha"]),
        "quad": {str(k): list(map(float, v)) for k, v in block.get("quad", {}).items()},
        "min_decades": float(block.get("min_decades", 1.75)),
    }


_ANALYSIS_KEYS = {
    "scaling-sweep": {"kind", "orders", "oracle_check_r_max", "numeric", "bisect_bracket"},
    "qmode": {"kind", "order", "q_values", "net_offsets", "numeric"},
    "cumulant-roundtrip": {"kind", "order", "seed", "pairing_orders"},
    "limit-state": {"kind", "weyl_truncation", "weyl_labels", "ccr_truncation",
                    "commutator_pairs", "numeric"},
    "ssb-bound": {"kind", "bogoliubov_radii", "numeric"},
    "projector": {"kind", "numeric"},
    "gap-check": {"kind", "smoothing_half_support", "shapes", "radius", "numeric"},
}


def _resolve_analysis(spec: dict, idx: int) -> dict:
    kind = spec.get("kind")
    if kind not in ANALYSIS_KINDS:
        raise ConfigError(f"analyses[{idx}]: unknown kind {kind!r} (expected one of {ANALYSIS_KINDS})")
    _check_keys(spec, _ANALYSIS_KEYS[kind], f"analyses[{idx}]")
    out = dict(spec)
    if kind == "scaling-sweep":
        out.setdefault("orders", [2])
        out["orders"] = [int(o) for o in out["orders"]]
    if kind == "qmode":
        out.setdefault("order", 2)
        out.setdefault("q_values", [0.0])
        out.setdefault("net_offsets", [])
    if kind == "cumulant-roundtrip":
        out.setdefault("order", 6)
        out.setdefault("seed", 1)
        out.setdefault("pairing_orders", [2, 4, 6, 8, 10, 12])
    if kind == "limit-state":
        out.setdefault("weyl_truncation", 8)
        out.setdefault("ccr_truncation", 5)
        out.setdefault("commutator_pairs", [])
    if kind == "ssb-bound":
        out.setdefault("bogoliubov_radii", [8.0, 16.0, 64.0, 256.0])
    if kind == "gap-check":
        out.setdefault("smoothing_half_support", 0.4)
        out.setdefault("shapes", ["plateau", "wide-plateau"])
        out.setdefault("radius", 512.0)
    return out


_MODEL_ANALYSES = {
    "gaussian": {"scaling-sweep", "qmode"},
    "product-ansatz": {"scaling-sweep", "qmode"},
    "powerlaw": {"scaling-sweep", "qmode"},
    "weighted": {"scaling-sweep"},
    "goldstone-spectrum": {"scaling-sweep", "qmode"},
    "goldstone-ssb": {"ssb-bound", "gap-check"},
    "spectral-vector": {"projector"},
    "pair-family": {"limit-state"},
}


def _validate_compatibility(model_block: dict, analyses: tuple, numeric: dict):
    cls = model_block["class"]
    for spec in analyses:
        kind = spec["kind"]
        if kind == "cumulant-roundtrip":
            continue  # pure combinatorics, model-independent
        if kind not in _MODEL_ANALYSES[cls]:
            raise ConfigError(
                f"analysis {kind!r} incompatible with model class {cls!r}"
            )
        merged = dict(numeric)
        merged.update(spec.get("numeric", {}))
        if cls == "powerlaw" and kind == "scaling-sweep":
            mode = merged.get("alpha_mode", numeric["alpha_mode"])
            alpha = merged.get("alpha", numeric["alpha"])
            if mode == "explicit":
                window = l2_alpha_window(int(model_block["dim"]))
                if alpha is None or not window.contains(float(alpha)):
                    raise ConfigError(
                        f"alpha={alpha} outside the square-integrable window "
                        f"({window.lo_open}, {window.hi_closed}] for this model"
                    )
        if cls == "weighted" and kind == "scaling-sweep":
            if merged.get("alpha_mode") not in ("gamma",):
                raise ConfigError("weighted models require alpha_mode 'gamma'")


def parse_config(text: str) -> RunConfig:
    """Parse, default-fill and validate a JSON run configuration."""
    try:
        raw = json.loads(text, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    _check_keys(raw, _TOP_KEYS, "configuration")
    if raw.get("schema", SCHEMA_ID) != SCHEMA_ID:
        raise ConfigError(f"unsupported schema {raw.get('schema')!r}")

    model_block = dict(raw.get("model") or {})
    if "class" not in model_block:
        raise ConfigError("model.class is required")
    if model_block["class"] not in MODEL_CLASSES:
        raise ConfigError(f"unknown model class {model_block['class']!r}")
    model_block.setdefault("dim", 1)

    window_block = dict(raw.get("window") or {})
    _check_keys(window_block, _WINDOW_KEYS, "window")
    window_block = {
        "kind": window_block.get("kind", "mollified-step"),
        "dim": int(window_block.get("dim", model_block["dim"])),
        "resolution": int(window_block.get("resolution", 8192)),
        "smoothstep_order": int(window_block.get("smoothstep_order", 3)),
    }
    if window_block["kind"] == "sharp":
        raise ConfigError("sharp windows are oracle-only; scaling runs need a smooth window")
    if window_block["dim"] != model_block["dim"]:
        raise ConfigError("window dimension must match the model dimension")

    numeric_block = _resolve_numeric(dict(raw.get("numeric") or {}))
    analyses = tuple(_resolve_analysis(dict(a), i) for i, a in enumerate(raw.get("analyses") or []))
    _validate_compatibility(model_block, analyses, numeric_block)

    output_block = dict(raw.get("output") or {})
    _check_keys(output_block, _OUTPUT_KEYS, "output")
    output_block = {
        "directory": output_block.get("directory", "fluctlab-out"),
        "basename": output_block.get("basename", "report"),
        "formats": list(output_block.get("formats", ["json"])),
    }
    for fmt in output_block["formats"]:
        if fmt not in ("json", "csv", "plot-data"):
            raise ConfigError(f"unknown output format {fmt!r}")

    return RunConfig(
        model_block=model_block,
        window_block=window_block,
        analyses=analyses,
        numeric_block=numeric_block,
        output_block=output_block,
        raw=raw,
    )


def config_schema() -> dict:
    """Machine-readable outline of the accepted configuration."""
    return {
        "schema": SCHEMA_ID,
        "model": {"class": list(MODEL_CLASSES), "dim": "int (1..3)",
                  "...": "class-specific parameters"},
        "window": {"kind": ["mollified-step", "smoothstep"], "dim": "int",
                   "resolution": "int >= 1024", "smoothstep_order": "int"},
        "analyses": [{"kind": list(ANALYSIS_KINDS), "...": "kind-specific parameters"}],
        "numeric": {
            "r_grid": {"start": 8.0, "stop": 512.0, "count": 8},
            "eps_vanish": 1e-8,
            "exponent_band": 0.1,
            "alpha_mode": ["canonical", "explicit", "gamma", "bisect"],
            "alpha": "float | null",
            "quad": {"<tensor-dim>": ["p_max", "panels", "nodes", "graded_levels"]},
        },
        "output": {"directory": "path", "basename": "str",
                   "formats": ["json", "csv", "plot-data"]},
    }
