"""Disorder-ensemble driver, scaling fits and tabular output.

A JSON config describes the model family, how many disorder realizations
to draw, which symmetry sector to diagonalize, which kept regions enter
the population bound, and which spectrum feeds the temperature floor.
Per-realization seeds are derived by hashing "base:index", so runs are
reproducible and independent of execution order; realizations that raise
are recorded as failures and excluded from the result rows.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse

from . import analysis, cph, ed, glassfloor, models
from .errors import ConfigError

__all__ = [
    "EnsembleConfig",
    "EnsembleResult",
    "HistogramResult",
    "derive_seed",
    "run_ensemble",
    "single_glass_floor",
    "scaling_fit",
    "write_rows_csv",
    "spectrum_to_csv",
]

SCHEMA_VERSION = 1
ROW_FIELDS = ("index", "seed", "E_GS", "gap", "p", "T_eff_min", "T_over_gap")


def derive_seed(base: int, index: int) -> int:
    digest = hashlib.sha256(f"{base}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _worker_count() -> int:
    raw = os.environ.get("STEERKIT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class EnsembleConfig:
    model: dict
    realizations: int = 100
    base_seed: int = 0
    sector: dict = field(default_factory=dict)
    regions: dict = field(default_factory=dict)
    ensemble: str = "sector"

    @staticmethod
    def from_dict(cfg: dict) -> "EnsembleConfig":
        if not isinstance(cfg, dict):
            raise ConfigError("", "expected a JSON object")
        version = cfg.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError("schema_version", f"unsupported version {version}")
        if "model" not in cfg:
            raise ConfigError("model", "missing required field")
        model = cfg["model"]
        if not isinstance(model, dict):
            raise ConfigError("model", "expected an object")
        realizations = cfg.get("realizations", 100)
        if not isinstance(realizations, int) or realizations < 1:
            raise ConfigError("realizations", "expected a positive integer")
        base_seed = cfg.get("base_seed", 0)
        if not isinstance(base_seed, int):
            raise ConfigError("base_seed", "expected an integer")
        sector = cfg.get("sector", {})
        if not isinstance(sector, dict):
            raise ConfigError("sector", "expected an object")
        regions = cfg.get("regions", {})
        if not isinstance(regions, dict):
            raise ConfigError("regions", "expected an object")
        ensemble = cfg.get("ensemble", "sector")
        if ensemble not in ("sector", "full", "grand"):
            raise ConfigError("ensemble", f"unknown ensemble {ensemble!r}")
        return EnsembleConfig(model, realizations, base_seed, sector, regions, ensemble)


@dataclass(frozen=True)
class HistogramResult:
    """Freedman-Diaconis histogram plus the raw samples it came from."""

    fieldname: str
    counts: np.ndarray
    edges: np.ndarray
    raw: np.ndarray

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["bin_left", "bin_right", "count"])
            for lo, hi, c in zip(self.edges[:-1], self.edges[1:], self.counts):
                writer.writerow([f"{lo:.12g}", f"{hi:.12g}", int(c)])


@dataclass
class EnsembleResult:
    rows: list
    failures: list
    config: EnsembleConfig

    def values(self, fieldname: str) -> np.ndarray:
        return np.array([row[fieldname] for row in self.rows], dtype=np.float64)

    def histogram(self, fieldname: str) -> HistogramResult:
        data = self.values(fieldname)
        finite = data[np.isfinite(data)]
        try:
            edges = np.histogram_bin_edges(finite, bins="fd")
            if edges.size < 2 or not np.all(np.diff(edges) > 0):
                raise ValueError
        except ValueError:
            edges = np.histogram_bin_edges(finite, bins=max(1, int(np.sqrt(finite.size))))
        counts, edges = np.histogram(finite, bins=edges)
        return HistogramResult(fieldname, counts, edges, data)

    def summary(self) -> dict:
        out: dict = {"realizations": len(self.rows), "failures": len(self.failures)}
        for name in ("E_GS", "gap", "p", "T_eff_min", "T_over_gap"):
            vals = self.values(name)
            finite = vals[np.isfinite(vals)]
            if finite.size:
                out[name] = {
                    "mean": float(finite.mean()),
                    "var": float(finite.var(ddof=1)) if finite.size > 1 else 0.0,
                    "min": float(finite.min()),
                    "max": float(finite.max()),
                }
        return out

    def to_csv(self, path) -> None:
        write_rows_csv(self.rows, path)


def write_rows_csv(rows, path, fields=ROW_FIELDS) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(fields), extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row.get(k)) for k in fields})


def _fmt(x):
    if isinstance(x, float):
        if np.isinf(x):
            return "inf"
        return f"{x:.12g}"
    return x


def spectrum_to_csv(h: cph.CommutingHamiltonian, path, cap: int = cph.SPECTRUM_CAP) -> None:
    """Write every energy vector as (energy, multiplicity, bits).

    Bits are reported in the original term order as a compact 0/1 string.
    """
    spectrum = cph.enumerate_spectrum(h, cap=cap)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["energy", "multiplicity", "bits"])
        for ev, mult in spectrum:
            bits = "".join(str(int(b)) for b in h.to_original_order(ev.bits))
            writer.writerow([f"{ev.energy:.12g}", mult, bits])


# -- sector / region resolution ------------------------------------------


def _resolve_sector(model, sector_cfg: dict):
    """Basis indices for the configured symmetry sector, or None for all."""
    kind = sector_cfg.get("type")
    if isinstance(model, models.FermionModel):
        m = model.m
        if kind is None:
            if model.meta.get("variant") == "dirac":
                return ed.number_sector(m, model.meta["half_filling"])
            if model.label == "fermi_hubbard":
                raise ConfigError(
                    "sector", "fermi_hubbard needs an explicit spin sector"
                )
            return None
        if kind == "none":
            return None
        if kind == "number":
            if "k" not in sector_cfg:
                raise ConfigError("sector.k", "missing required field")
            return ed.number_sector(m, int(sector_cfg["k"]))
        if kind == "spin":
            for key in ("n_up", "n_down"):
                if key not in sector_cfg:
                    raise ConfigError(f"sector.{key}", "missing required field")
            sites = model.meta.get("sites", m // 2)
            return ed.spin_sector(sites, int(sector_cfg["n_up"]), int(sector_cfg["n_down"]))
        raise ConfigError("sector.type", f"unknown sector type {kind!r}")
    if kind not in (None, "none"):
        raise ConfigError("sector.type", "sectors only apply to fermionic models")
    return None


def _resolve_regions(model, regions_cfg: dict):
    """Kept-region list, cut function and local dims for the model."""
    kind = regions_cfg.get("type")
    if isinstance(model, models.FermionModel):
        m = model.m

        def front(vec, sites):
            return analysis.fermionic_region_matrix(vec, sites, m)

        if kind in (None, "mode_subsets"):
            size = int(regions_cfg.get("m", 2))
            if not 1 <= size < m:
                raise ConfigError("regions.m", f"subset size {size} outside 1..{m - 1}")
            regs = [
                analysis.Region(c, label=f"modes{list(c)}")
                for c in itertools.combinations(range(m), size)
            ]
        elif kind == "site_subsets":
            sites = model.meta.get("sites")
            if sites is None:
                raise ConfigError("regions.type", "model has no site structure")
            size = int(regions_cfg.get("m", 1))
            if not 1 <= size <= sites:
                raise ConfigError("regions.m", f"subset size {size} outside 1..{sites}")
            regs = [
                analysis.Region(
                    tuple(s for site in c for s in (site, sites + site)),
                    label=f"sites{list(c)}",
                )
                for c in itertools.combinations(range(sites), size)
            ]
        elif kind == "explicit":
            lists = regions_cfg.get("list")
            if not isinstance(lists, list) or not lists:
                raise ConfigError("regions.list", "expected a non-empty list of mode lists")
            regs = [analysis.Region(tuple(int(s) for s in entry)) for entry in lists]
        else:
            raise ConfigError("regions.type", f"unknown region type {kind!r}")
        return regs, front, None

    if isinstance(model, models.SpinModel):
        n, d = model.n_sites, model.local_dim
    elif isinstance(model, cph.CommutingHamiltonian):
        n, d = model.n, 2
    else:
        raise ConfigError("model.kind", "unsupported model object")
    dims = (d,) * n
    if kind in (None, "site_windows"):
        size = int(regions_cfg.get("m", 2))
        if not 1 <= size < n:
            raise ConfigError("regions.m", f"window size {size} outside 1..{n - 1}")
        regs = [
            analysis.Region(tuple((s + k) % n for k in range(size)))
            for s in range(n)
        ]
    elif kind == "explicit":
        lists = regions_cfg.get("list")
        if not isinstance(lists, list) or not lists:
            raise ConfigError("regions.list", "expected a non-empty list of site lists")
        regs = [analysis.Region(tuple(int(s) for s in entry)) for entry in lists]
    else:
        raise ConfigError("regions.type", f"unknown region type {kind!r}")
    return regs, None, dims


def _sector_values(matrix) -> np.ndarray:
    if scipy.sparse.issparse(matrix):
        dense = matrix.toarray()
        if np.abs(dense.imag).max(initial=0.0) < 1e-13:
            dense = np.ascontiguousarray(dense.real)
    else:
        dense = matrix
    return ed.diagonalize(dense, compute_vectors=False, cap=2 * 10**4).values


def _maybe_blocked_values(model, matrix, basis) -> np.ndarray:
    """Sector spectrum, split over lattice momenta when that pays off.

    Periodic Hubbard sectors past a few thousand states get decomposed
    into joint translation eigenblocks first; the union of the block
    spectra is the sector spectrum at a fraction of the dense cost.
    """
    meta = getattr(model, "meta", None) or {}
    if (
        getattr(model, "label", "") == "fermi_hubbard"
        and basis is not None
        and matrix.shape[0] > 4096
        and meta.get("periodic", False)
        and meta.get("lx", 0) > 2
        and meta.get("ly", 0) > 2
    ):
        shifts = models.fermi_hubbard_translations(meta["lx"], meta["ly"], basis)
        return ed.symmetry_block_values(matrix, shifts)
    return _sector_values(matrix)


def _ensemble_values(
    model, cfg: EnsembleConfig, sector_matrix, sector_basis=None
) -> np.ndarray:
    if cfg.ensemble == "sector":
        return _maybe_blocked_values(model, sector_matrix, sector_basis)
    if not isinstance(model, models.FermionModel):
        if cfg.ensemble == "full":
            return _sector_values(sector_matrix)
        raise ConfigError("ensemble", "grand ensemble needs a fermionic model")
    if cfg.ensemble == "full":
        if model.m > 12:
            raise ConfigError(
                "ensemble", "full spectrum too large; use 'sector' or 'grand'"
            )
        return _sector_values(model.matrix())
    values = []
    if model.label == "fermi_hubbard":
        sites = model.meta["sites"]
        for n_up in range(sites + 1):
            for n_down in range(sites + 1):
                basis = ed.spin_sector(sites, n_up, n_down)
                values.append(_maybe_blocked_values(model, model.matrix(basis), basis))
    else:
        for k in range(model.m + 1):
            basis = ed.number_sector(model.m, k)
            values.append(_sector_values(model.matrix(basis)))
    return np.concatenate(values)


# -- single realization ---------------------------------------------------


def _build_realization(cfg: EnsembleConfig, seed: int):
    model_cfg = dict(cfg.model)
    params = dict(model_cfg.get("params", {}))
    if model_cfg.get("kind") == "syk":
        params["seed"] = seed
    model_cfg["params"] = params
    return models.build_from_config(model_cfg)


def _realization_row(cfg: EnsembleConfig, index: int) -> dict:
    seed = derive_seed(cfg.base_seed, index)
    model = _build_realization(cfg, seed)
    regions, front_fn, dims = _resolve_regions(model, cfg.regions)
    sector = _resolve_sector(model, cfg.sector)

    if isinstance(model, cph.CommutingHamiltonian):
        e_min, basis = cph.ground_manifold_states(model)
        spectrum = cph.enumerate_spectrum(model)
        values = np.array([ev.energy for ev, _ in spectrum])
        counts = np.array([mult for _, mult in spectrum], dtype=np.float64)
        above = values[values > e_min + 1e-9]
        gap = float(above.min() - e_min) if above.size else np.inf
        vectors = basis
        energies, ecounts = values, counts
    else:
        matrix = model.matrix(sector) if isinstance(model, models.FermionModel) else model.matrix
        manifold = ed.ground_manifold(matrix)
        e_min, gap = manifold.energy, manifold.gap
        if isinstance(model, models.FermionModel) and sector is not None:
            vectors = np.stack(
                [
                    ed.embed_sector(manifold.vectors[:, a], sector, model.m)
                    for a in range(manifold.degeneracy)
                ],
                axis=1,
            )
        else:
            vectors = manifold.vectors
        energies = _ensemble_values(model, cfg, matrix, sector_basis=sector)
        ecounts = None

    basis_ops = (getattr(model, "meta", None) or {}).get("basis_ops")
    bound = glassfloor.compute_p(
        vectors,
        regions,
        dims=dims,
        front_fn=front_fn,
        seed=seed & 0xFFFFFFFF,
        basis_ops=basis_ops,
    )
    temp = glassfloor.temperature_floor(energies, bound.p, counts=ecounts)
    t_over_gap = (
        temp.temperature / gap
        if np.isfinite(temp.temperature) and np.isfinite(gap) and gap > 0
        else np.inf
    )
    return {
        "index": index,
        "seed": seed,
        "E_GS": float(e_min),
        "gap": float(gap),
        "p": float(bound.p),
        "T_eff_min": float(temp.temperature),
        "T_over_gap": float(t_over_gap),
        "cross_gap": bound.cross_gap,
        "degeneracy": vectors.shape[1] if vectors.ndim == 2 else 1,
    }


def run_ensemble(cfg: EnsembleConfig) -> EnsembleResult:
    """Evaluate every realization, in index order, tolerating failures."""
    indices = list(range(cfg.realizations))
    rows_by_index: dict[int, dict] = {}
    failures = []

    def work(i):
        return i, _realization_row(cfg, i)

    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(work, i) for i in indices]
            for fut in futures:
                try:
                    i, row = fut.result()
                    rows_by_index[i] = row
                except ConfigError:
                    raise
                except Exception as exc:
                    failures.append({"error": f"{type(exc).__name__}: {exc}"})
    else:
        for i in indices:
            try:
                _, row = work(i)
                rows_by_index[i] = row
            except ConfigError:
                raise
            except Exception as exc:
                failures.append(
                    {
                        "index": i,
                        "seed": derive_seed(cfg.base_seed, i),
                        "error": f"{type(exc).__name__}: {exc}",
                    }
                )
    rows = [rows_by_index[i] for i in sorted(rows_by_index)]
    return EnsembleResult(rows, failures, cfg)


def single_glass_floor(cfg: EnsembleConfig, index: int = 0) -> glassfloor.GlassFloorReport:
    """Full floor report for one realization of a configured model."""
    seed = derive_seed(cfg.base_seed, index)
    model = _build_realization(cfg, seed)
    regions, front_fn, dims = _resolve_regions(model, cfg.regions)
    sector = _resolve_sector(model, cfg.sector)
    if isinstance(model, cph.CommutingHamiltonian):
        e_min, vectors = cph.ground_manifold_states(model)
        spectrum = cph.enumerate_spectrum(model)
        energies = np.array([ev.energy for ev, _ in spectrum])
        counts = np.array([m for _, m in spectrum], dtype=np.float64)
        above = energies[energies > e_min + 1e-9]
        gap = float(above.min() - e_min) if above.size else np.inf
        label = "commuting_pauli"
    else:
        matrix = model.matrix(sector) if isinstance(model, models.FermionModel) else model.matrix
        manifold = ed.ground_manifold(matrix)
        e_min, gap = manifold.energy, manifold.gap
        if isinstance(model, models.FermionModel) and sector is not None:
            vectors = np.stack(
                [
                    ed.embed_sector(manifold.vectors[:, a], sector, model.m)
                    for a in range(manifold.degeneracy)
                ],
                axis=1,
            )
        else:
            vectors = manifold.vectors
        energies = _ensemble_values(model, cfg, matrix, sector_basis=sector)
        counts = None
        label = model.label if hasattr(model, "label") else "model"
    basis_ops = (getattr(model, "meta", None) or {}).get("basis_ops")
    return glassfloor.run_glass_floor(
        label,
        vectors,
        regions,
        energies,
        float(e_min),
        float(gap),
        dims=dims,
        front_fn=front_fn,
        counts=counts,
        ensemble=cfg.ensemble,
        seed=seed & 0xFFFFFFFF,
        basis_ops=basis_ops,
    )


# -- scaling fits ---------------------------------------------------------


def _loglog_fit(ns: np.ndarray, ys: np.ndarray) -> tuple[float, float]:
    mask = (ys > 0) & np.isfinite(ys)
    if mask.sum() < 2:
        return np.nan, np.nan
    x, y = np.log(ns[mask]), np.log(ys[mask])
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


def scaling_fit(sizes, means, variances=None, split_parity: bool = True) -> dict:
    """Power-law exponents of ensemble means (and variances) versus size.

    Fits log-log slopes; with split_parity the odd and even sizes are
    also fit separately, since staggered models often scale differently
    on the two branches.
    """
    ns = np.asarray(sizes, dtype=np.float64)
    mu = np.asarray(means, dtype=np.float64)
    mean_exp, r2 = _loglog_fit(ns, mu)
    out = {"mean_exponent": mean_exp, "r_squared": r2}
    if variances is not None:
        var_exp, var_r2 = _loglog_fit(ns, np.asarray(variances, dtype=np.float64))
        out["var_exponent"] = var_exp
        out["var_r_squared"] = var_r2
    else:
        out["var_exponent"] = np.nan
    if split_parity:
        for name, parity in (("odd", 1), ("even", 0)):
            mask = (ns.astype(np.int64) % 2) == parity
            if mask.sum() >= 2:
                exp_p, r2_p = _loglog_fit(ns[mask], mu[mask])
                out[name] = {"mean_exponent": exp_p, "r_squared": r2_p}
    return out
