"""Scenario configuration: flat dotted-key text files, strictly validated.

Grammar: one `key = value` pair per line; blank lines and lines starting
with `#` are ignored, as is any ` # comment` suffix. Keys are dotted
paths from the schema below; unknown keys are rejected by name, as are
out-of-range values. Defaults: hbar = 1, mass = 1, node threshold
eta = 1e-8.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from importlib import resources

from .errors import ConfigError
from .grids import Grid1D, WaveFunction, make_grid
from .schrodinger import EvolutionSeries, Potential, evolve, initial_state

_FLOAT = "float"
_INT = "int"
_STR = "str"

# key -> (type, default); REQUIRED marks keys with no default
_REQUIRED = object()

SCHEMA: dict[str, tuple[str, object]] = {
    "scenario.name": (_STR, ""),
    "grid.x_min": (_FLOAT, _REQUIRED),
    "grid.x_max": (_FLOAT, _REQUIRED),
    "grid.n": (_INT, _REQUIRED),
    "units.hbar": (_FLOAT, 1.0),
    "units.mass": (_FLOAT, 1.0),
    "state.kind": (_STR, ""),
    "state.x0": (_FLOAT, 0.0),
    "state.sigma": (_FLOAT, 1.0),
    "state.k0": (_FLOAT, 0.0),
    "state.separation": (_FLOAT, 0.0),
    "potential.kind": (_STR, "free"),
    "potential.omega": (_FLOAT, 1.0),
    "potential.height": (_FLOAT, 0.0),
    "potential.depth": (_FLOAT, 0.0),
    "potential.left": (_FLOAT, 0.0),
    "potential.right": (_FLOAT, 0.0),
    "potential.ramp": (_FLOAT, 0.0),
    "potential.separation": (_FLOAT, 0.0),
    "potential.slit_width": (_FLOAT, 0.0),
    "potential.k_forward": (_FLOAT, 0.0),
    "evolve.dt": (_FLOAT, _REQUIRED),
    "evolve.t_final": (_FLOAT, _REQUIRED),
    "evolve.store_every": (_INT, 1),
    "output.slices": (_INT, 6),
    "output.states": (_INT, 6),
    "trajectories.count": (_INT, 50),
    "wigner.x_stride": (_INT, 0),
    "wigner.p_stride": (_INT, 0),
    "paths.epsilon": (_FLOAT, 1.0),
    "paths.n_slices": (_INT, 2),
    "paths.x_start": (_FLOAT, -1.0),
    "paths.x_end": (_FLOAT, 1.5),
    "paths.mc_samples": (_INT, 200000),
    "paths.roughness_paths": (_INT, 4000),
    "paths.roughness_slices": (_INT, 16),
    "run.seed": (_INT, 0),
    "tolerances.node_eta": (_FLOAT, 1e-8),
    "tolerances.scale": (_FLOAT, 1.0),
    "tolerances.overlap_floor": (_FLOAT, 1e-10),
    "tolerances.equivalence": (_FLOAT, 1e-5),
}

CATALOG_NAMES = (
    "plane_wave",
    "static_gaussian",
    "spreading_gaussian",
    "harmonic_ground",
    "barrier",
    "square_well",
    "two_slit",
)


def parse_config_text(text: str) -> dict[str, str]:
    """Raw key -> value-string pairs from the dotted-key format."""
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value in {raw!r}")
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'", key=key)
        pairs[key] = value
    return pairs


def _coerce(key: str, value: str):
    kind = SCHEMA[key][0]
    try:
        if kind == _INT:
            as_float = float(value)
            as_int = int(as_float)
            if as_int != as_float:
                raise ValueError
            return as_int
        if kind == _FLOAT:
            return float(value)
        return value
    except ValueError:
        raise ConfigError(f"key '{key}': cannot parse {value!r} as {kind}", key=key) from None


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario settings plus the hash of the source text."""

    values: dict = field(repr=False)
    config_hash: str = ""

    def __getitem__(self, key: str):
        return self.values[key]

    @property
    def name(self) -> str:
        return self.values["scenario.name"]

    @property
    def hbar(self) -> float:
        return self.values["units.hbar"]

    @property
    def mass(self) -> float:
        return self.values["units.mass"]

    @property
    def eta(self) -> float:
        return self.values["tolerances.node_eta"]

    @property
    def seed(self) -> int:
        return self.values["run.seed"]

    def with_overrides(self, seed: int | None = None, tolerance_scale: float | None = None):
        vals = dict(self.values)
        if seed is not None:
            vals["run.seed"] = int(seed)
        if tolerance_scale is not None:
            vals["tolerances.scale"] = float(tolerance_scale)
        return ScenarioConfig(vals, self.config_hash)

    # -- builders ----------------------------------------------------------

    def build_grid(self) -> Grid1D:
        try:
            return make_grid(self["grid.x_min"], self["grid.x_max"], self["grid.n"])
        except Exception as exc:
            raise ConfigError(f"key 'grid.n': {exc}", key="grid.n") from exc

    def build_potential(self) -> Potential:
        kind = self["potential.kind"]
        if kind == "free":
            pot = Potential("free")
        elif kind == "harmonic":
            if self["potential.omega"] <= 0:
                raise ConfigError("key 'potential.omega': must be positive", key="potential.omega")
            pot = Potential("harmonic", {"omega": self["potential.omega"]})
        elif kind in ("square_barrier", "square_well"):
            params = {
                "left": self["potential.left"],
                "right": self["potential.right"],
            }
            if kind == "square_barrier":
                params["height"] = self["potential.height"]
            else:
                params["depth"] = self["potential.depth"]
            if self["potential.ramp"] > 0:
                params["ramp"] = self["potential.ramp"]
            pot = Potential(kind, params)
        elif kind == "two_gaussian_slit":
            pot = Potential(
                "two_gaussian_slit",
                {
                    "separation": self["potential.separation"],
                    "slit_width": self["potential.slit_width"],
                    "k_forward": self["potential.k_forward"],
                },
            )
        else:
            raise ConfigError(f"key 'potential.kind': unknown kind '{kind}'", key="potential.kind")
        try:
            pot.validate(self.build_grid())
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(str(exc), key="potential.kind") from exc
        return pot

    def build_initial_state(self) -> WaveFunction:
        grid = self.build_grid()
        kind = self["state.kind"]
        if not kind:
            if self["potential.kind"] == "two_gaussian_slit":
                # transverse state just past the slits
                return initial_state(
                    grid,
                    "two_gaussian",
                    x0=0.0,
                    sigma=self["potential.slit_width"],
                    k0=0.0,
                    separation=self["potential.separation"],
                    hbar=self.hbar,
                    mass=self.mass,
                )
            raise ConfigError("key 'state.kind': required", key="state.kind")
        try:
            return initial_state(
                grid,
                kind,
                x0=self["state.x0"],
                sigma=self["state.sigma"],
                k0=self["state.k0"],
                separation=self["state.separation"],
                hbar=self.hbar,
                mass=self.mass,
            )
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"key 'state.kind': {exc}", key="state.kind") from exc

    def run_evolution(self) -> EvolutionSeries:
        psi0 = self.build_initial_state()
        return evolve(
            psi0,
            self.build_potential(),
            self["evolve.t_final"],
            self["evolve.dt"],
            store_every=self["evolve.store_every"],
        )


def _validate(values: dict) -> None:
    if values["grid.n"] < 16 or values["grid.n"] & (values["grid.n"] - 1):
        raise ConfigError(
            f"key 'grid.n': {values['grid.n']} is not a power of two >= 16", key="grid.n"
        )
    if not values["grid.x_max"] > values["grid.x_min"]:
        raise ConfigError("key 'grid.x_min': degenerate interval", key="grid.x_min")
    if values["units.hbar"] <= 0 or values["units.mass"] <= 0:
        raise ConfigError("key 'units.hbar': hbar and mass must be positive", key="units.hbar")
    if values["evolve.dt"] <= 0:
        raise ConfigError("key 'evolve.dt': must be positive", key="evolve.dt")
    if values["evolve.t_final"] <= 0:
        raise ConfigError("key 'evolve.t_final': must be positive", key="evolve.t_final")
    steps = values["evolve.t_final"] / values["evolve.dt"]
    if abs(steps - round(steps)) > 1e-9:
        raise ConfigError(
            "key 'evolve.t_final': must be an integer multiple of evolve.dt",
            key="evolve.t_final",
        )
    if values["evolve.store_every"] < 1:
        raise ConfigError("key 'evolve.store_every': must be >= 1", key="evolve.store_every")
    if values["output.slices"] < 1 or values["output.states"] < 1:
        raise ConfigError("key 'output.slices': must be >= 1", key="output.slices")
    if values["trajectories.count"] < 2:
        raise ConfigError("key 'trajectories.count': must be >= 2", key="trajectories.count")
    if values["tolerances.node_eta"] <= 0 or values["tolerances.node_eta"] >= 1:
        raise ConfigError(
            "key 'tolerances.node_eta': must be in (0, 1)", key="tolerances.node_eta"
        )
    if values["tolerances.scale"] <= 0:
        raise ConfigError("key 'tolerances.scale': must be positive", key="tolerances.scale")
    kind = values["state.kind"]
    if not kind and values["potential.kind"] != "two_gaussian_slit":
        raise ConfigError(
            "key 'state.kind': required (only two_gaussian_slit scenarios derive it)",
            key="state.kind",
        )
    if kind and kind not in ("gaussian", "two_gaussian", "plane_wave"):
        raise ConfigError(f"key 'state.kind': unknown kind '{kind}'", key="state.kind")
    if kind in ("gaussian", "two_gaussian") and values["state.sigma"] <= 0:
        raise ConfigError("key 'state.sigma': must be positive", key="state.sigma")
    if kind == "two_gaussian" and values["state.separation"] <= 0:
        raise ConfigError("key 'state.separation': must be positive", key="state.separation")


def load_config_text(text: str) -> ScenarioConfig:
    pairs = parse_config_text(text)
    values: dict = {}
    for key, raw in pairs.items():
        if key not in SCHEMA:
            raise ConfigError(f"unknown key '{key}'", key=key)
        values[key] = _coerce(key, raw)
    for key, (_, default) in SCHEMA.items():
        if key not in values:
            if default is _REQUIRED:
                raise ConfigError(f"missing required key '{key}'", key=key)
            values[key] = default
    _validate(values)
    canonical = "\n".join(f"{k} = {pairs[k]}" for k in sorted(pairs))
    digest = hashlib.sha256(canonical.encode()).hexdigest()[:16]
    cfg = ScenarioConfig(values, digest)
    # surface construction-stage errors (grid bounds, potential geometry) now
    cfg.build_grid()
    cfg.build_potential()
    cfg.build_initial_state()
    return cfg


def load_config(path) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return load_config_text(text)


def catalog_config_text(name: str) -> str:
    if name not in CATALOG_NAMES:
        raise ConfigError(f"unknown catalog scenario '{name}' (have: {', '.join(CATALOG_NAMES)})")
    return resources.files("qflow.catalog").joinpath(f"{name}.cfg").read_text(encoding="utf-8")


def load_catalog_config(name: str) -> ScenarioConfig:
    return load_config_text(catalog_config_text(name))
