"""Assembly and serialization of the extended Hubbard-Holstein bundle.

The model file is a single JSON document: hopping and repulsion scalars,
the phonon bands, and the dimensionless coupling table, together with
full provenance (chain parameters, tool version, numerical conventions).
Every float is written with shortest round-trip precision so repeated
runs produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from . import __version__ as _version
from .atom_phonon import CouplingGrid, coupling_grid
from .bands import BandStructure, DEFAULT_CUTOFF_CELLS, DEFAULT_Q_POINTS, band_structure
from .errors import SchemaMismatchError
from .geometry import ChainSpec, spec_from_dict, spec_to_dict

SCHEMA_VERSION = 1

_REQUIRED_CONVENTIONS = ("gauge", "pair_sum", "modulus", "cutoff_cells")
_REQUIRED_SECTIONS = ("schema_version", "provenance", "hubbard", "phonons", "couplings")


def conventions_dict(cutoff_cells: int, rho_z_source: str, relaxed: bool) -> dict:
    return {
        "gauge": "largest-z-component-real-nonnegative",
        "pair_sum": "unordered-pairs-counted-once",
        "modulus": "abs-z-components-in-coupling",
        "cutoff_cells": cutoff_cells,
        "rho_z_source": rho_z_source,
        "geometry": "relaxed" if relaxed else "trap-centers",
        "q_grid": "uniform-open-left-endpoint-at-pi-over-a",
    }


def spec_digest(spec: ChainSpec) -> str:
    text = json.dumps(spec_to_dict(spec), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class ExtendedHHModel:
    spec: ChainSpec
    t: float
    U: float
    g_cp: float
    bands: BandStructure
    couplings: CouplingGrid
    conventions: dict

    def __eq__(self, other):
        if not isinstance(other, ExtendedHHModel):
            return NotImplemented
        return (
            self.spec == other.spec
            and self.t == other.t
            and self.U == other.U
            and self.g_cp == other.g_cp
            and self.conventions == other.conventions
            and np.array_equal(self.bands.q_grid, other.bands.q_grid)
            and np.array_equal(self.bands.omega, other.bands.omega)
            and np.array_equal(self.bands.xi, other.bands.xi)
            and np.array_equal(self.couplings.m_complex, other.couplings.m_complex)
            and np.array_equal(self.couplings.rho0_values, other.couplings.rho0_values)
        )


def assemble(
    spec: ChainSpec,
    t: float,
    U: float,
    g_cp: float,
    q_points: int = DEFAULT_Q_POINTS,
    cutoff_cells: int = DEFAULT_CUTOFF_CELLS,
    relax: bool = False,
    rho_z_source: str = "trap",
) -> ExtendedHHModel:
    """Run the full pipeline and bundle the results."""
    if not np.isfinite(t) or not np.isfinite(U):
        raise ValueError("t and U must be finite")
    if g_cp < 0:
        raise ValueError("g_cp must be nonnegative")
    bands = band_structure(spec, q_points=q_points, cutoff_cells=cutoff_cells, relax=relax)
    grid = coupling_grid(spec, q_points=q_points, bands=bands, rho_z_source=rho_z_source)
    return ExtendedHHModel(
        spec=spec, t=float(t), U=float(U), g_cp=float(g_cp),
        bands=bands, couplings=grid,
        conventions=conventions_dict(cutoff_cells, rho_z_source, relax),
    )


def _clean(values: np.ndarray) -> list:
    # adding 0.0 turns negative zeros positive, keeping reserialization byte-stable
    return (np.asarray(values) + 0.0).tolist()


def _axis_table(values: np.ndarray, axes: list) -> dict:
    return {"axes": axes, "values": _clean(values)}


def model_document(model: ExtendedHHModel) -> dict:
    bands = model.bands
    grid = model.couplings
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "extended-hubbard-holstein-model",
        "provenance": {
            "tool": "rydphon",
            "version": _version,
            "chain_spec": spec_to_dict(model.spec),
            "spec_digest": spec_digest(model.spec),
            "conventions": dict(model.conventions),
        },
        "hubbard": {"t": model.t, "U": model.U},
        "coupling_scale": {"g_cp": model.g_cp, "units": "sqrt(hbar*g_cp^2/(2*mass))"},
        "phonons": {
            "q": _clean(bands.q_grid),
            "omega": _axis_table(bands.omega.T, ["band", "q"]),
            "xi_re": _axis_table(bands.xi.real.transpose(2, 1, 0), ["band", "component", "q"]),
            "xi_im": _axis_table(bands.xi.imag.transpose(2, 1, 0), ["band", "component", "q"]),
        },
        "couplings": {
            "m_re": _axis_table(grid.m_complex.real.T, ["band", "q"]),
            "m_im": _axis_table(grid.m_complex.imag.T, ["band", "q"]),
            "m_abs": _axis_table(grid.m_abs.T, ["band", "q"]),
            "rho0": _clean(grid.rho0_values),
        },
    }


def document_text(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=1, allow_nan=False) + "\n"


def serialize(model: ExtendedHHModel, path) -> None:
    text = document_text(model_document(model))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def validate_document(doc: dict) -> None:
    if not isinstance(doc, dict):
        raise SchemaMismatchError("model document is not a JSON object")
    missing = [k for k in _REQUIRED_SECTIONS if k not in doc]
    if missing:
        raise SchemaMismatchError(f"model document lacks section(s): {', '.join(missing)}")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise SchemaMismatchError(
            f"schema_version {doc['schema_version']!r} unsupported (expected {SCHEMA_VERSION})"
        )
    conv = doc["provenance"].get("conventions", {})
    lacking = [k for k in _REQUIRED_CONVENTIONS if k not in conv]
    if lacking:
        raise SchemaMismatchError(
            f"provenance.conventions lacks required key(s): {', '.join(lacking)}"
        )


def deserialize(path) -> ExtendedHHModel:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    validate_document(doc)
    prov = doc["provenance"]
    spec = spec_from_dict(prov["chain_spec"])
    conv = dict(prov["conventions"])
    q = np.array(doc["phonons"]["q"])
    omega = np.array(doc["phonons"]["omega"]["values"]).T
    xi = (
        np.array(doc["phonons"]["xi_re"]["values"])
        + 1j * np.array(doc["phonons"]["xi_im"]["values"])
    ).transpose(2, 1, 0)
    relaxed = conv.get("geometry") == "relaxed"
    bands = BandStructure(
        q_grid=q, omega=omega, xi=xi, spec=spec,
        cutoff_cells=int(conv["cutoff_cells"]), relaxed=relaxed,
    )
    m = (
        np.array(doc["couplings"]["m_re"]["values"])
        + 1j * np.array(doc["couplings"]["m_im"]["values"])
    ).T
    grid = CouplingGrid(
        q_grid=q, m_complex=m, m_abs=np.abs(m),
        rho0_values=np.array(doc["couplings"]["rho0"]),
        omega=omega, spec=spec,
        rho_z_source=conv.get("rho_z_source", "trap"),
        cutoff_cells=int(conv["cutoff_cells"]), relaxed=relaxed,
    )
    return ExtendedHHModel(
        spec=spec, t=float(doc["hubbard"]["t"]), U=float(doc["hubbard"]["U"]),
        g_cp=float(doc["coupling_scale"]["g_cp"]), bands=bands, couplings=grid,
        conventions=conv,
    )
