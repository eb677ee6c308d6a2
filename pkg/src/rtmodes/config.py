"""Flat `section.key = value` run configuration.

One file drives every subcommand.  Unknown keys are errors (no silent
typos); values are typed per the registry below.  `#` starts a comment,
blank lines are ignored.
"""

import hashlib
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .eos import PressureLaw
from .errors import ConfigurationError
from .mesh import Mesh
from .profile import FluidViscosity, SlabGeometry, ViscosityLaw, build_profile

# key -> (type, default, help); defaults of None mean "derived or required"
KEYS = {
    "geometry.m": (float, 1.0, "lower slab depth m > 0"),
    "geometry.ell": (float, 1.0, "upper slab depth ell > 0"),
    "geometry.g": (float, 1.0, "gravitational acceleration > 0"),
    "geometry.sigma": (float, 0.1, "surface tension coefficient >= 0"),
    "geometry.L": (float, None, "horizontal period scale (period 2*pi*L); optional"),
    "fluid.lower.law": (str, "polytropic", "pressure law kind: polytropic | tabulated"),
    "fluid.lower.K": (float, 2.0, "polytropic pressure scale K > 0"),
    "fluid.lower.gamma": (float, 1.0, "polytropic adiabatic exponent >= 1"),
    "fluid.lower.table": (str, None, "CSV path (header rho,P) for tabulated law"),
    "fluid.lower.rho0": (float, 1.0, "lower-fluid density at the interface"),
    "fluid.upper.law": (str, "polytropic", "pressure law kind: polytropic | tabulated"),
    "fluid.upper.K": (float, 1.0, "polytropic pressure scale K > 0"),
    "fluid.upper.gamma": (float, 1.0, "polytropic adiabatic exponent >= 1"),
    "fluid.upper.table": (str, None, "CSV path (header rho,P) for tabulated law"),
    "viscosity.lower.eps": (float, 0.1, "shear viscosity coefficient > 0"),
    "viscosity.lower.eps_kind": (str, "constant", "constant | power"),
    "viscosity.lower.eps_power": (float, 0.0, "density exponent for power kind"),
    "viscosity.lower.delta": (float, 0.0, "bulk viscosity coefficient >= 0"),
    "viscosity.lower.delta_kind": (str, "constant", "constant | power"),
    "viscosity.lower.delta_power": (float, 0.0, "density exponent for power kind"),
    "viscosity.upper.eps": (float, 0.1, "shear viscosity coefficient > 0"),
    "viscosity.upper.eps_kind": (str, "constant", "constant | power"),
    "viscosity.upper.eps_power": (float, 0.0, "density exponent for power kind"),
    "viscosity.upper.delta": (float, 0.0, "bulk viscosity coefficient >= 0"),
    "viscosity.upper.delta_kind": (str, "constant", "constant | power"),
    "viscosity.upper.delta_power": (float, 0.0, "density exponent for power kind"),
    "mesh.elements_per_side": (int, 256, "uniform elements on each side of the interface"),
    "mesh.order": (int, 2, "element order: 1 or 2"),
    "mesh.quadrature": (int, 3, "Gauss points per element"),
    "solver.fixed_point_tol": (float, 1e-9, "|F(s)| tolerance for the rate fixed point"),
    "sweep.n": (int, 48, "log-spaced frequency samples in a dispersion sweep"),
    "sweep.xi_min": (float, None, "lowest frequency (default 0.02 xi_c)"),
    "sweep.xi_max": (float, None, "highest frequency (default 0.98 xi_c)"),
    "lattice.L": (float, None, "period scale for lattice enumeration (falls back to geometry.L)"),
    "lattice.xi_max": (float, None, "frequency cap for sigma = 0 lattices"),
    "mode.xi": (float, 1.0, "frequency magnitude for single-mode solves"),
    "synthesis.f.a": (float, None, "bump support lower edge (default 0.3 xi_c)"),
    "synthesis.f.b": (float, None, "bump support upper edge (default 0.7 xi_c)"),
    "synthesis.f.amp": (float, 1.0, "bump amplitude"),
    "synthesis.radial_nodes": (int, 16, "Gauss-Legendre radial quadrature nodes"),
    "synthesis.angular_nodes": (int, 64, "trapezoid angular quadrature nodes (even)"),
    "synthesis.grid.nx": (int, 8, "sample grid points along x1"),
    "synthesis.grid.ny": (int, 8, "sample grid points along x2"),
    "synthesis.grid.nz": (int, 9, "sample grid points along x3"),
    "synthesis.grid.extent": (float, None, "horizontal half-width (default pi / f.a)"),
    "evolve.xi": (float, None, "frequency for evolution runs (default argmax heuristics)"),
    "evolve.T": (float, None, "time horizon (default 5 / lambda)"),
    "evolve.dt": (float, None, "time step (default min(1e-2, 1e-2 / lambda))"),
    "evolve.seed": (int, 7, "seed for random initial data (verify battery)"),
    "output.dir": (str, ".", "artifact output directory"),
}


@dataclass
class RunConfig:
    """Validated flat configuration with typed access and object builders."""

    values: dict
    source_text: str = dc_field(default="", repr=False)

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        v = self.values.get(key)
        return default if v is None else v

    def config_hash(self):
        return hashlib.sha256(
            "\n".join(f"{k}={self.values[k]!r}" for k in sorted(self.values)).encode()
        ).hexdigest()[:16]

    # -- builders -------------------------------------------------------

    def geometry(self):
        return SlabGeometry(
            m=self["geometry.m"], ell=self["geometry.ell"], g=self["geometry.g"],
            sigma=self["geometry.sigma"], L=self.values.get("geometry.L"),
        )

    def _law(self, side):
        kind = self[f"fluid.{side}.law"]
        if kind == "polytropic":
            return PressureLaw.polytropic(self[f"fluid.{side}.K"], self[f"fluid.{side}.gamma"])
        if kind == "tabulated":
            path = self.values.get(f"fluid.{side}.table")
            if not path:
                raise ConfigurationError(f"fluid.{side}.table is required for tabulated laws")
            data = np.genfromtxt(path, delimiter=",", names=True)
            return PressureLaw.tabulated(data["rho"], data["P"])
        raise ConfigurationError(f"fluid.{side}.law must be polytropic or tabulated, got {kind!r}")

    def _viscosity(self, side):
        mk = lambda which: ViscosityLaw(
            self[f"viscosity.{side}.{which}_kind"],
            c=self[f"viscosity.{side}.{which}"],
            p=self[f"viscosity.{side}.{which}_power"],
        )
        return FluidViscosity(eps=mk("eps"), delta=mk("delta"))

    def profile(self):
        return build_profile(
            self._law("lower"), self._law("upper"), self["fluid.lower.rho0"],
            self.geometry(), (self._viscosity("lower"), self._viscosity("upper")),
        )

    def mesh(self):
        return Mesh.uniform(
            self["geometry.m"], self["geometry.ell"],
            n_per_side=self["mesh.elements_per_side"],
            order=self["mesh.order"], quad_points=self["mesh.quadrature"],
        )

    def sweep_range(self, xi_c):
        lo = self.values.get("sweep.xi_min")
        hi = self.values.get("sweep.xi_max")
        if lo is None:
            lo = 0.02 * xi_c if math.isfinite(xi_c) else 0.02
        if hi is None:
            hi = 0.98 * xi_c if math.isfinite(xi_c) else 50.0
        return float(lo), float(hi)


def _parse_value(key, raw):
    typ = KEYS[key][0]
    raw = raw.strip()
    try:
        if typ is int:
            v = int(raw)
        elif typ is float:
            v = float(raw)
        else:
            v = raw
    except ValueError as exc:
        raise ConfigurationError(f"{key}: cannot parse {raw!r} as {typ.__name__}") from exc
    return v


def _validate(values):
    if values["geometry.sigma"] < 0:
        raise ConfigurationError("geometry.sigma must be >= 0")
    for key in ("geometry.m", "geometry.ell", "geometry.g"):
        if values[key] <= 0:
            raise ConfigurationError(f"{key} must be > 0")
    if values.get("geometry.L") is not None and values["geometry.L"] <= 0:
        raise ConfigurationError("geometry.L must be > 0")
    if values["mesh.order"] not in (1, 2):
        raise ConfigurationError("mesh.order must be 1 or 2")
    if values["mesh.elements_per_side"] < 2:
        raise ConfigurationError("mesh.elements_per_side must be >= 2")
    for side in ("lower", "upper"):
        if values[f"viscosity.{side}.eps"] <= 0:
            raise ConfigurationError(f"viscosity.{side}.eps must be > 0")
        if values[f"viscosity.{side}.delta"] < 0:
            raise ConfigurationError(f"viscosity.{side}.delta must be >= 0")
    if values["fluid.lower.rho0"] <= 0:
        raise ConfigurationError("fluid.lower.rho0 must be > 0")


def load_config(path=None, overrides=()):
    """Parse, override, and validate a run configuration.

    ``overrides`` are `key=value` strings applied after the file.
    """
    values = {k: d for k, (_, d, _) in KEYS.items()}
    text = ""
    if path is not None:
        with open(path) as fh:
            text = fh.read()
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"line {lineno}: expected key = value, got {line!r}")
            key, raw = (part.strip() for part in line.split("=", 1))
            if key not in KEYS:
                raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
            values[key] = _parse_value(key, raw)
    for item in overrides:
        if "=" not in item:
            raise ConfigurationError(f"override {item!r} is not key=value")
        key, raw = (part.strip() for part in item.split("=", 1))
        if key not in KEYS:
            raise ConfigurationError(f"unknown key {key!r}")
        values[key] = _parse_value(key, raw)
    _validate(values)
    return RunConfig(values=values, source_text=text)


def key_help():
    """One line per configuration key, for --help output."""
    lines = []
    for key, (typ, default, doc) in KEYS.items():
        d = "" if default is None else f" (default {default})"
        lines.append(f"  {key} <{typ.__name__}>: {doc}{d}")
    return "\n".join(lines)
