"""Batch orchestration and machine-readable outputs.

A Report holds only plain JSON-serializable values in its compared
fields, so report.json round-trips through parse_report to an equal
object.  Timing is carried for console display but excluded from both
the JSON digest and equality: reports must be byte-identical for a
fixed (config, seed).

emit always writes all five files; tables that a task does not produce
come out header-only.
"""

from __future__ import annotations

import json
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import analysis, spectral
from .assembly import assemble, graph_form, load_vector
from .config import RunConfig, config_to_dict
from .errors import MixneuError, NumericalError
from .fields import PiecewiseField

AUDIT_COUNTS = {"mediant": 10**6, "truncation": 10**6, "product": 10**6,
                "decomposition": 10**4}


@dataclass
class Report:
    config: dict
    spectrum: dict | None = None
    structure: dict | None = None
    residual_summary: dict | None = None
    audits: list | None = None
    degiorgi: dict | None = None
    poincare: float | None = None
    source: dict | None = None
    convergence: dict | None = None
    warnings: list = field(default_factory=list)
    timing: float = field(default=0.0, compare=False)
    tables: dict = field(default_factory=dict, compare=False, repr=False)

    def to_json_dict(self) -> dict:
        return {
            "config": self.config,
            "spectrum": self.spectrum,
            "structure": self.structure,
            "residual_summary": self.residual_summary,
            "audits": self.audits,
            "degiorgi": self.degiorgi,
            "poincare": self.poincare,
            "source": self.source,
            "convergence": self.convergence,
            "warnings": self.warnings,
        }


def parse_report(path) -> Report:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return Report(**data)


def _pair_digest(p: spectral.EigenPair) -> dict:
    return {"index": p.index, "lambda": p.value, "residual": p.residual,
            "normalization": p.normalization}


def _spectrum_digest(spec: spectral.Spectrum) -> dict:
    return {
        "negatives": [_pair_digest(p) for p in spec.negatives],
        "zero": _pair_digest(spec.zero),
        "positives": [_pair_digest(p) for p in spec.positives],
        "weight_integral": spec.weight_integral,
    }


def _principal_pair(spec: spectral.Spectrum) -> spectral.EigenPair:
    if spec.weight_integral < 0 and spec.positives:
        return spec.positives[0]
    if spec.weight_integral >= 0 and spec.negatives:
        return spec.negatives[0]
    return spec.positives[0] if spec.positives else spec.zero


def _structure_digest(spec: spectral.Spectrum, out_warnings: list) -> dict | None:
    try:
        st = spectral.first_eigen_structure(spec)
    except MixneuError as exc:
        out_warnings.append(f"first-eigenvalue structure unavailable: {exc}")
        return None
    return {"side": st.side, "simple": st.simple, "gap": st.gap,
            "signed": st.signed, "min_over_max": st.min_over_max}


def _residuals(forms, mesh, pair, report: Report):
    nr = spectral.neumann_residuals(forms, mesh, pair)
    summary = {}
    if nr.ns_values is not None:
        summary["max_ns"] = float(np.abs(nr.ns_values).max())
        report.tables["residuals"] = (np.flatnonzero(~mesh.interior_mask),
                                      nr.collar_x, nr.ns_values)
    else:
        summary["max_ns"] = None
    summary["normal_deriv"] = list(nr.normal_deriv) if nr.normal_deriv is not None else None
    label = pair.index if isinstance(pair, spectral.EigenPair) else "source"
    summary["evaluated_for"] = label
    report.residual_summary = summary


def _degiorgi_digest(rep: analysis.DeGiorgiReport) -> dict:
    return {
        "kappa": rep.kappa, "K_level": rep.K_level, "c_star": rep.c_star,
        "converged": rep.converged, "bound": rep.bound,
        "sup_plus": rep.sup_plus, "C_emp": rep.C_emp,
        "ladder_length": len(rep.ladder),
    }


def _solve_with_warnings(forms, cfg: RunConfig, report: Report) -> spectral.Spectrum:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", spectral.ReducedCountWarning)
        spec = spectral.solve_spectrum(forms, cfg.k_pos, cfg.k_neg,
                                       diagnostic=cfg.diagnostic)
    report.warnings.extend(str(w.message) for w in caught)
    return spec


def _store_eigen_tables(report: Report, mesh, spec: spectral.Spectrum):
    pairs = [*spec.negatives, spec.zero, *spec.positives]
    pairs.sort(key=lambda p: p.index)
    report.tables["nodes"] = mesh.nodes
    report.tables["profiles"] = [(f"u[{p.index}]", p.u) for p in pairs]


def run(cfg: RunConfig) -> Report:
    """Execute one task and return the in-memory report (files not written)."""
    report = Report(config=config_to_dict(cfg))

    if cfg.task == "audit":
        mesh = cfg.mesh()
        g = graph_form(cfg.params(), mesh)
        results = [
            analysis.audit_mediant(AUDIT_COUNTS["mediant"], cfg.seed),
            analysis.audit_truncation(AUDIT_COUNTS["truncation"], cfg.seed),
            analysis.audit_product_bound(AUDIT_COUNTS["product"], cfg.seed),
            analysis.audit_decomposition(g, AUDIT_COUNTS["decomposition"], cfg.seed),
        ]
        report.audits = [{"name": r.name, "count": r.count, "violations": r.violations}
                         for r in results]
        return report

    if cfg.task == "convergence":
        entries = []
        for n in cfg.n_in_sweep:
            mesh = cfg.mesh(n)
            forms = assemble(cfg.params(), mesh, cfg.weight)
            spec = _solve_with_warnings(forms, cfg, report)
            pair = _principal_pair(spec)
            entries.append({"n_in": n, "h": mesh.h, "lambda1": pair.value})
        lams = [e["lambda1"] for e in entries]
        diffs = [abs(l2 - l1) for l1, l2 in zip(lams, lams[1:])]
        orders = []
        for d1, d2 in zip(diffs, diffs[1:]):
            orders.append(float(np.log2(d1 / d2)) if d1 > 0 and d2 > 0 else None)
        report.convergence = {"entries": entries, "orders": orders}
        return report

    mesh = cfg.mesh()
    forms = assemble(cfg.params(), mesh, cfg.weight)

    if cfg.task == "solve-source":
        u = spectral.solve_source(forms, cfg.source)
        F = load_vector(mesh, cfg.source)
        nF = np.linalg.norm(F)
        res = float(np.linalg.norm(forms.B @ u - F) / nF) if nF > 0 else 0.0
        report.source = {
            "residual": res,
            "interval_mean": float((forms.M @ np.ones(u.size)) @ u / (cfg.b - cfg.a)),
            "sup": float(np.abs(u[mesh.interior_mask]).max()),
        }
        _residuals(forms, mesh, u, report)
        report.tables["nodes"] = mesh.nodes
        report.tables["profiles"] = [("u[source]", u)]
        return report

    spec = _solve_with_warnings(forms, cfg, report)
    report.spectrum = _spectrum_digest(spec)
    report.structure = _structure_digest(spec, report.warnings)
    _store_eigen_tables(report, mesh, spec)
    principal = _principal_pair(spec)
    _residuals(forms, mesh, principal, report)

    if cfg.task == "verify":
        report.poincare = analysis.poincare_constant(forms)
        lam1 = principal.value if principal.index != 0 else None
        audit_rows = []
        if lam1 is not None and lam1 > 0:
            r = analysis.sample_rayleigh_min(forms, lam1, 1000, cfg.seed)
            audit_rows.append({"name": r.name, "count": r.count, "violations": r.violations})
        r = analysis.sample_poincare(forms, 1000, cfg.seed)
        audit_rows.append({"name": r.name, "count": r.count, "violations": r.violations})
        report.audits = audit_rows
        try:
            cert = analysis.degiorgi_certificate(mesh, forms, principal.u,
                                                 cfg.source, cfg.q)
            report.degiorgi = _degiorgi_digest(cert)
            report.tables["ladder"] = cert.ladder
        except MixneuError as exc:
            report.warnings.append(f"level-iteration certificate failed: {exc}")

    return report


def _fmt(x) -> str:
    return repr(float(x))


def emit(report: Report, out_dir) -> list:
    """Write the five output files; returns the paths written."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []

    def path(name):
        p = os.path.join(out_dir, name)
        paths.append(p)
        return p

    with open(path("spectrum.csv"), "w", encoding="utf-8") as fh:
        fh.write("index,lambda,residual,normalization\n")
        spec = report.spectrum or {}
        rows = [*spec.get("negatives", [])[::-1], *( [spec["zero"]] if "zero" in spec else []),
                *spec.get("positives", [])]
        for row in rows:
            fh.write(f"{row['index']},{_fmt(row['lambda'])},{_fmt(row['residual'])},"
                     f"{_fmt(row['normalization'])}\n")

    with open(path("eigenfunctions.csv"), "w", encoding="utf-8") as fh:
        profiles = report.tables.get("profiles", [])
        nodes = report.tables.get("nodes")
        header = "node,x" + "".join(f",{label}" for label, _ in profiles)
        fh.write(header + "\n")
        if profiles and nodes is not None:
            for i, x in enumerate(nodes):
                vals = "".join(f",{_fmt(u[i])}" for _, u in profiles)
                fh.write(f"{i},{_fmt(x)}{vals}\n")

    with open(path("residuals.csv"), "w", encoding="utf-8") as fh:
        fh.write("node,x,ns_value\n")
        if "residuals" in report.tables:
            idx, xs, vals = report.tables["residuals"]
            for i, x, v in zip(idx, xs, vals):
                fh.write(f"{i},{_fmt(x)},{_fmt(v)}\n")

    with open(path("degiorgi.csv"), "w", encoding="utf-8") as fh:
        fh.write("level,k,phi\n")
        for ell, k, phi in report.tables.get("ladder", ()):
            fh.write(f"{ell},{_fmt(k)},{_fmt(phi)}\n")

    with open(path("report.json"), "w", encoding="utf-8") as fh:
        json.dump(report.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")

    return paths
