"""Configuration-driven experiment runner.

Subcommands map one-to-one onto the verification pipelines of the other
modules: check-smatrix, zf-verify, wedge-locality, scatter, ff-verify,
car-disorder, and the bundle all-acceptance.  Reports are emitted as a
human-readable table on stdout and, with --json, as a versioned JSON
document (schema 1) that is byte-identical for identical config + seed.

Exit codes: 0 all hard criteria pass, 1 criteria failure, 2 config or
argument parse error, 3 numeric failure inside a pipeline.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import carlattice, fields, fockspace, formfactors, scattering, smatrix

SCHEMA = 1

TOL_DEFAULTS = {
    "smatrix": 1e-12,
    "zf": 1e-10,
    "locality_factor": 1e3,
    "scatter_rel": 5e-3,
    "exchange": 1e-8,
    "pgamma_norm": 1e-10,
    "pfg": 1e-10,
    "tau": 1e-8,
    "fw": 1e-9,
    "fd": 1e-9,
    "fd_residue": 1e-6,
    "boundary": 1e-8,
    "car": 1e-12,
}

NUMERIC_ERRORS = (
    formfactors.ExtrapolationError,
    formfactors.ContourError,
    scattering.QuadratureError,
    scattering.OrderingError,
    scattering.PlateauCoverageError,
    fields.SupportViolationError,
    fields.GradeMismatchError,
    fields.WrongScatteringError,
    smatrix.PoleEvaluationError,
    carlattice.DecompositionError,
    np.linalg.LinAlgError,
    FloatingPointError,
    ZeroDivisionError,
    OverflowError,
)


class ConfigError(ValueError):
    """Malformed configuration or command-line specification."""


def _merge(defaults: dict, override: dict) -> dict:
    out = dict(defaults)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        # tomllib messages carry line/column diagnostics
        raise ConfigError(f"config parse error in {path}: {exc}") from exc


def _parse_tol_overrides(entries, tols: dict) -> dict:
    tols = dict(tols)
    for entry in entries or []:
        if "=" not in entry:
            raise ConfigError(f"--tol-override expects KEY=VAL, got {entry!r}")
        key, _, val = entry.partition("=")
        if key not in tols:
            raise ConfigError(
                f"unknown tolerance key {key!r}; known: {', '.join(sorted(tols))}"
            )
        try:
            tols[key] = float(val)
        except ValueError as exc:
            raise ConfigError(f"tolerance value {val!r} is not a number") from exc
    return tols


def _parse_s_spec(spec: str) -> smatrix.ScatteringFunction:
    """Parse compact specs: const:1, const:-1, sinh:0.785, prod:0.785,0.524."""
    if spec in smatrix.BUILTIN_FAMILIES:
        return smatrix.BUILTIN_FAMILIES[spec]()
    kind, _, rest = spec.partition(":")
    try:
        if kind == "const":
            return smatrix.constant(int(rest))
        if kind == "sinh":
            return smatrix.sinh_factor(float(rest))
        if kind == "prod":
            return smatrix.sinh_product([float(b) for b in rest.split(",")])
    except ValueError as exc:
        raise ConfigError(f"bad scattering spec {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown scattering spec {spec!r}")


def _grid_from(cfg: dict) -> fockspace.RapidityGrid:
    return fockspace.RapidityGrid(
        theta_min=float(cfg["theta_min"]),
        theta_max=float(cfg["theta_max"]),
        n_points=int(cfg["n_points"]),
        mass=float(cfg.get("mass", 1.0)),
    )


def _c(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _say(quiet: bool, text: str) -> None:
    if not quiet:
        print(text)


# -- subcommand runners ------------------------------------------------------


def run_check_smatrix(cfg: dict, tols: dict, seed: int, quiet: bool) -> dict:
    defaults = {
        "families": list(smatrix.BUILTIN_FAMILIES),
        "n_samples": 200,
        "b": None,
        "smatrix": None,
    }
    cfg = _merge(defaults, cfg)
    functions = []
    if cfg["smatrix"] is not None:
        functions.append(smatrix.from_config(cfg["smatrix"]))
    else:
        for name in cfg["families"]:
            if name not in smatrix.BUILTIN_FAMILIES:
                raise ConfigError(f"unknown scattering family {name!r}")
            if name == "sinh_factor" and cfg["b"] is not None:
                functions.append(smatrix.sinh_factor(float(cfg["b"])))
            else:
                functions.append(smatrix.BUILTIN_FAMILIES[name]())
    tol = tols["smatrix"]
    samples = smatrix.strip_samples(int(cfg["n_samples"]), seed=seed)
    entries = []
    for S in functions:
        rep = smatrix.verify_symmetries(S, samples, tol=tol)
        entries.append(
            {
                "label": rep.label,
                "n_samples": rep.n_samples,
                "residuals": {k: float(v) for k, v in rep.residuals.items()},
                "passed": rep.passed,
            }
        )
        _say(quiet, f"{rep.label:24s} max residual {rep.max_residual:.3e} "
                    f"({'pass' if rep.passed else 'FAIL'})")
        for k, v, ok in rep.rows():
            _say(quiet, f"    {k:26s} {v:.3e} {'pass' if ok else 'FAIL'}")
    return {
        "command": "check-smatrix",
        "tol": tol,
        "families": entries,
        "passed": all(e["passed"] for e in entries),
    }


def run_zf_verify(cfg: dict, tols: dict, seed: int, quiet: bool) -> dict:
    defaults = {
        "families": list(smatrix.BUILTIN_FAMILIES),
        "n_points": 16,
        "n_max": 3,
        "theta_min": -3.0,
        "theta_max": 3.0,
        "mass": 1.0,
        "smatrix": None,
    }
    cfg = _merge(defaults, cfg)
    grid = _grid_from(cfg)
    tol = tols["zf"]
    if cfg["smatrix"] is not None:
        functions = [smatrix.from_config(cfg["smatrix"])]
    else:
        for name in cfg["families"]:
            if name not in smatrix.BUILTIN_FAMILIES:
                raise ConfigError(f"unknown scattering family {name!r}")
        functions = [smatrix.BUILTIN_FAMILIES[n]() for n in cfg["families"]]
    entries = []
    for S in functions:
        space = fockspace.FockSpace(grid, S, n_max=int(cfg["n_max"]))
        rep = fockspace.verify_zf_relations(space, tol=tol)
        entries.append(
            {
                "label": rep.label,
                "sample_nodes": list(rep.sample_nodes),
                "residuals": {k: float(v) for k, v in rep.residuals.items()},
                "passed": rep.passed,
            }
        )
        _say(quiet, f"{rep.label:24s} max residual {rep.max_residual:.3e} "
                    f"({'pass' if rep.passed else 'FAIL'})")
    return {
        "command": "zf-verify",
        "tol": tol,
        "grid": {"n_points": grid.n_points, "n_max": int(cfg["n_max"])},
        "families": entries,
        "passed": all(e["passed"] for e in entries),
    }


def run_wedge_locality(cfg: dict, tols: dict, seed: int, quiet: bool) -> dict:
    defaults = {
        "mode": "both",  # twisted | majorana | both
        "smatrix": {"kind": "sinh_factor", "b": math.pi / 4},
        "n_points": 32,
        "n_max": 3,
        "theta_min": -2.5,
        "theta_max": 2.5,
        "mass": 1.0,
        "f": {"kind": "gaussian", "center": [0.15, 0.0], "width": [0.5, 0.5]},
        "g": {"kind": "gaussian", "center": [0.0, 0.0], "width": [0.5, 0.5]},
        "separations": [0.0, 1.0, 2.0, 4.0, 8.0],
    }
    cfg = _merge(defaults, cfg)
    grid = _grid_from(cfg)
    f = fields.TestFunction.from_config(cfg["f"])
    g = fields.TestFunction.from_config(cfg["g"])
    factor_tol = tols["locality_factor"]
    modes = ["twisted", "majorana"] if cfg["mode"] == "both" else [cfg["mode"]]
    entries = []
    for mode in modes:
        if mode == "majorana":
            S = smatrix.constant(-1)
        else:
            S = smatrix.from_config(cfg["smatrix"])
        space = fockspace.FockSpace(grid, S, n_max=int(cfg["n_max"]))
        rep = fields.wedge_locality_report(
            space, f, g, cfg["separations"], mode=mode
        )
        passed = rep.decay_factor >= factor_tol
        entries.append(
            {
                "mode": mode,
                "s_label": rep.s_label,
                "rows": [[float(d), float(a), float(c)] for d, a, c in rep.rows],
                "decay_factor": float(rep.decay_factor),
                "passed": passed,
            }
        )
        _say(quiet, f"mode {mode:9s} S {rep.s_label:18s} decay factor "
                    f"{rep.decay_factor:.4g} ({'pass' if passed else 'FAIL'})")
        for d, anti, comm in rep.rows:
            _say(quiet, f"    d={d:5.2f}  anticomm {anti:.4e}  comm {comm:.4e}")
    return {
        "command": "wedge-locality",
        "factor_tol": factor_tol,
        "modes": entries,
        "passed": all(e["passed"] for e in entries),
    }


def run_scatter(cfg: dict, tols: dict, seed: int, quiet: bool) -> dict:
    defaults = {
        "s": "sinh:0.7853981633974483",
        "n": 2,
        "element": {
            "n_points": 48,
            "n_max": 3,
            "theta_min": -2.5,
            "theta_max": 2.5,
            "mass": 1.0,
            "k_centers": [-1.5, 1.5],
            "k_width": 5.0,
            "chi": {"rap_lo": -2.0, "rap_hi": 2.0},
        },
        "phase": {
            "enabled": None,  # auto: only for non-constant S
            "n_points": 48,
            "n_max": 3,
            "theta_min": -1.2,
            "theta_max": 1.2,
            "mass": 1.0,
            "relative_rapidity": 1.0,
            "k_width": 20.0,
            "chi": {"rap_lo": -1.0, "rap_hi": 1.0},
        },
        "statistics": {
            "k_centers": [-1.5, 0.0, 1.5],
            "k_width": 5.0,
        },
        "pfg": {
            "n_points": 20,
            "n_max": 3,
            "theta_min": -2.5,
            "theta_max": 2.5,
            "mass": 1.0,
            "k_center": 0.5,
            "k_width": 5.0,
            "taus": [1.0, 5.0, 25.0],
            "chi": {"rap_lo": -2.0, "rap_hi": 2.0},
        },
    }
    cfg = _merge(defaults, cfg)
    if int(cfg["n"]) != 2:
        raise ConfigError("only two-particle scattering is supported (n = 2)")
    S = _parse_s_spec(cfg["s"]) if isinstance(cfg["s"], str) else smatrix.from_config(cfg["s"])
    report: dict = {"command": "scatter", "s_label": S.label()}
    checks = []

    # -- element against the analytic kernel
    ec = cfg["element"]
    grid = _grid_from(ec)
    space = fockspace.FockSpace(grid, S, n_max=int(ec["n_max"]))
    chi = scattering.ChiFilter.from_config({"mass": grid.mass, **ec["chi"]})
    packets = [
        scattering.WavePacket(k_center=float(k), k_width=float(ec["k_width"]),
                              mass=grid.mass)
        for k in ec["k_centers"][:2]
    ]
    vecs = [p.one_particle_vector(grid) for p in packets]
    elem = scattering.s_matrix_element(space, vecs, vecs, chi)
    analytic = scattering.analytic_two_particle_element(space, vecs, vecs)
    rel = abs(elem - analytic) / max(abs(analytic), 1e-300)
    checks.append(("element_vs_kernel", rel, tols["scatter_rel"]))
    report["element"] = {
        "computed": _c(elem),
        "analytic": _c(analytic),
        "rel_error": float(rel),
    }

    # -- extracted phase against -S at the relative rapidity
    do_phase = cfg["phase"]["enabled"]
    if do_phase is None:
        do_phase = S.kind != "constant"
    if do_phase:
        pc = cfg["phase"]
        pgrid = _grid_from(pc)
        pspace = fockspace.FockSpace(pgrid, S, n_max=int(pc["n_max"]))
        pchi = scattering.ChiFilter.from_config({"mass": pgrid.mass, **pc["chi"]})
        half = float(pc["relative_rapidity"]) / 2.0
        ppackets = [
            scattering.WavePacket(k_center=pgrid.mass * math.sinh(t),
                                  k_width=float(pc["k_width"]), mass=pgrid.mass)
            for t in (-half, half)
        ]
        pvecs = [p.one_particle_vector(pgrid) for p in ppackets]
        extracted = scattering.two_particle_phase(pspace, pvecs, pvecs, pchi)
        expected = -complex(S(float(pc["relative_rapidity"])))
        prel = abs(extracted - expected) / abs(expected)
        checks.append(("phase_vs_minus_s", prel, tols["scatter_rel"]))
        report["phase"] = {
            "extracted": _c(extracted),
            "expected": _c(expected),
            "rel_error": float(prel),
        }

    # -- fermionic statistics: P_Gamma exchange antisymmetry and norms
    sc = cfg["statistics"]
    stat_packets = [
        scattering.WavePacket(k_center=float(k), k_width=float(sc["k_width"]),
                              mass=grid.mass)
        for k in sc["k_centers"]
    ]
    stat_vecs = [p.one_particle_vector(grid) for p in stat_packets]
    # reference scattered state for the overlap antisymmetry
    in_state = scattering.w_out(space, vecs, chi, use_pfg=False)
    worst_ex = 0.0
    worst_norm = 0.0
    for n in (2, 3):
        if n > space.n_max or n > len(stat_vecs):
            continue
        sym = scattering.graded_symmetrizer(n)
        T = stat_vecs[0]
        for v in stat_vecs[1:n]:
            T = np.multiply.outer(T, v)
        PT = sym.project(T)
        # exchange antisymmetry of overlaps against the scattered state
        if n == 2:
            o_base = space.inner(fockspace.FockState({2: PT}), in_state)
            swapped = sym.project(np.multiply.outer(stat_vecs[1], stat_vecs[0]))
            o_swap = space.inner(fockspace.FockState({2: swapped}), in_state)
            worst_ex = max(worst_ex, abs(o_base + o_swap) / max(abs(o_base), 1e-300))
        # norm collapse on (nearly) disjoint product tensors
        nt2 = float(np.real(np.vdot(T, T)))
        np2 = float(np.real(np.vdot(PT, PT)))
        worst_norm = max(worst_norm, abs(np2 * math.factorial(n) - nt2) / nt2)
    checks.append(("exchange_antisymmetry", worst_ex, tols["exchange"]))
    checks.append(("pgamma_norm", worst_norm, tols["pgamma_norm"]))
    report["statistics"] = {
        "exchange_antisymmetry": float(worst_ex),
        "pgamma_norm": float(worst_norm),
    }

    # -- polarization-free-generator identities
    fc = cfg["pfg"]
    fgrid = _grid_from(fc)
    fspace = fockspace.FockSpace(fgrid, S, n_max=int(fc["n_max"]))
    fchi = scattering.ChiFilter.from_config({"mass": fgrid.mass, **fc["chi"]})
    fpacket = scattering.WavePacket(k_center=float(fc["k_center"]),
                                    k_width=float(fc["k_width"]), mass=fgrid.mass)
    psi = fpacket.one_particle_vector(fgrid)
    pfg_res = scattering.pfg_residual(fspace, psi, fchi)
    tau_res = scattering.tau_independence_residual(
        fspace, psi, fpacket, fchi, taus=tuple(float(t) for t in fc["taus"])
    )
    checks.append(("pfg_identity", pfg_res, tols["pfg"]))
    checks.append(("tau_independence", tau_res, tols["tau"]))
    report["pfg"] = {
        "identity_residual": float(pfg_res),
        "tau_independence_residual": float(tau_res),
        "taus": [float(t) for t in fc["taus"]],
    }

    report["checks"] = [
        {"name": n, "residual": float(r), "tol": float(t), "passed": bool(r < t)}
        for n, r, t in checks
    ]
    report["passed"] = all(c["passed"] for c in report["checks"])
    for c in report["checks"]:
        _say(quiet, f"{c['name']:24s} residual {c['residual']:.4e}  "
                    f"tol {c['tol']:.1e}  {'pass' if c['passed'] else 'FAIL'}")
    return report


def run_ff_verify(cfg: dict, tols: dict, seed: int, quiet: bool) -> dict:
    defaults = {
        "family": "ising-fermion-g",
        "sign": 1,
        "k_max": 3,
        "n_samples": 50,
        "g": {"kind": "gaussian", "width": [0.25, 0.25]},
        "boundary": {
            "n_points": 8,
            "n_max": 3,
            "theta_min": -1.5,
            "theta_max": 1.5,
            "mass": 1.0,
        },
    }
    cfg = _merge(defaults, cfg)
    g = fields.TestFunction.from_config(cfg["g"])
    family = formfactors.builtin_family(
        cfg["family"], {"g": g, "sign": int(cfg["sign"])}
    )
    fw = formfactors.verify_fw(
        family, k_max=int(cfg["k_max"]), n_samples=int(cfg["n_samples"]),
        seed=seed, tol=tols["fw"],
    )
    fd = formfactors.verify_fd(
        family, k_max=int(cfg["k_max"]), n_samples=int(cfg["n_samples"]),
        seed=seed, tol=tols["fd"], residue_tol=tols["fd_residue"],
    )
    _say(quiet, fw.as_text())
    _say(quiet, fd.as_text())

    bc = cfg["boundary"]
    grid = _grid_from(bc)
    space = fockspace.FockSpace(grid, family.S, n_max=int(bc["n_max"]))
    orders = [
        (m, n)
        for m in range(int(bc["n_max"]))
        for n in range(int(bc["n_max"]))
        if m + n <= 2
    ]
    coeffs = formfactors.boundary_coefficients(space, family, orders)
    A = formfactors.operator_from_coefficients(space, coeffs)
    boundary = {}
    for (m, n) in orders:
        boundary[f"{m},{n}"] = float(formfactors.boundary_match(space, family, A, m, n))
    worst_boundary = max(boundary.values())
    b_pass = worst_boundary < tols["boundary"]
    _say(quiet, f"boundary match (m+n<=2)  worst residual {worst_boundary:.4e}  "
                f"tol {tols['boundary']:.1e}  {'pass' if b_pass else 'FAIL'}")
    return {
        "command": "ff-verify",
        "family": family.name,
        "wedge": fw.to_dict(),
        "double_cone": fd.to_dict(),
        "boundary": {"residuals": boundary, "tol": tols["boundary"], "passed": b_pass},
        "passed": fw.passed and fd.passed and b_pass,
    }


def run_car_disorder(cfg: dict, tols: dict, seed: int, quiet: bool) -> dict:
    defaults = {"n_left": 1, "n_right": 1, "n_lemma_matrices": 100}
    cfg = _merge(defaults, cfg)
    out = carlattice.disorder_suite(
        int(cfg["n_left"]), int(cfg["n_right"]), seed=seed,
        n_lemma_matrices=int(cfg["n_lemma_matrices"]),
    )
    tol = tols["car"]
    # the sin approximant slack is an inequality, not roundoff: any
    # positive slack is a failure regardless of the roundoff tolerance
    roundoff = {k: v for k, v in out["residuals"].items() if k != "sin_approximant"}
    passed = (
        all(v < tol for v in roundoff.values())
        and out["residuals"]["sin_approximant"] == 0.0
        and out["dims_match"]
    )
    for k, v in out["residuals"].items():
        _say(quiet, f"{k:28s} {v:.4e}")
    _say(quiet, f"dims {out['dims']} expected {out['expected_dims']} "
                f"({'match' if out['dims_match'] else 'MISMATCH'})")
    _say(quiet, f"overall: {'pass' if passed else 'FAIL'}")
    return {
        "command": "car-disorder",
        "n_left": int(cfg["n_left"]),
        "n_right": int(cfg["n_right"]),
        "tol": tol,
        "residuals": {k: float(v) for k, v in out["residuals"].items()},
        "dims": out["dims"],
        "expected_dims": out["expected_dims"],
        "dims_match": out["dims_match"],
        "passed": passed,
    }


def run_all_acceptance(cfg: dict, tols: dict, seed: int, quiet: bool) -> dict:
    sections = (
        ("check-smatrix", run_check_smatrix),
        ("zf-verify", run_zf_verify),
        ("wedge-locality", run_wedge_locality),
        ("scatter", run_scatter),
        ("ff-verify", run_ff_verify),
        ("car-disorder", run_car_disorder),
    )
    reports = {}
    for name, runner in sections:
        _say(quiet, f"== {name} ==")
        if name == "scatter":
            s_list = cfg.get(name, {}).get(
                "s_list", ["const:1", "const:-1", "sinh:0.7853981633974483"]
            )
            subs = []
            for s_spec in s_list:
                sub_cfg = _merge(cfg.get(name, {}), {"s": s_spec})
                sub_cfg.pop("s_list", None)
                subs.append(runner(sub_cfg, tols, seed, quiet))
            reports[name] = {"runs": subs, "passed": all(s["passed"] for s in subs)}
        elif name == "car-disorder":
            sizes = cfg.get(name, {}).get("sizes", [[1, 1], [2, 2]])
            subs = []
            for nl, nr in sizes:
                sub_cfg = _merge(cfg.get(name, {}), {"n_left": nl, "n_right": nr})
                sub_cfg.pop("sizes", None)
                subs.append(runner(sub_cfg, tols, seed, quiet))
            reports[name] = {"systems": subs, "passed": all(s["passed"] for s in subs)}
        else:
            reports[name] = runner(cfg.get(name, {}), tols, seed, quiet)
    passed = all(r["passed"] for r in reports.values())
    _say(quiet, f"all-acceptance: {'pass' if passed else 'FAIL'}")
    return {"command": "all-acceptance", "reports": reports, "passed": passed}


RUNNERS = {
    "check-smatrix": run_check_smatrix,
    "zf-verify": run_zf_verify,
    "wedge-locality": run_wedge_locality,
    "scatter": run_scatter,
    "ff-verify": run_ff_verify,
    "car-disorder": run_car_disorder,
    "all-acceptance": run_all_acceptance,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zfqft",
        description="Numerical checks for graded integrable models on "
                    "truncated S-symmetric Fock spaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH", help="TOML configuration file")
        p.add_argument("--seed", type=int, default=0, metavar="N")
        p.add_argument("--tol-override", action="append", metavar="KEY=VAL")
        p.add_argument("--json", metavar="OUT", help="write the JSON report here")
        p.add_argument("--quiet", action="store_true")
        if name == "check-smatrix":
            p.add_argument("--family", help="restrict to one built-in family")
            p.add_argument("--b", type=float, help="pole parameter for sinh_factor")
            p.add_argument("--n-samples", type=int, dest="n_samples")
        elif name == "zf-verify":
            p.add_argument("--family")
            p.add_argument("--n-points", type=int, dest="n_points")
        elif name == "scatter":
            p.add_argument("--s", help="scattering spec, e.g. const:1 or sinh:0.785")
            p.add_argument("--n", type=int, help="particle number (2)")
        elif name == "wedge-locality":
            p.add_argument("--mode", choices=["twisted", "majorana", "both"])
        elif name == "ff-verify":
            p.add_argument("--family")
            p.add_argument("--k-max", type=int, dest="k_max")
        elif name == "car-disorder":
            p.add_argument("--n-left", type=int, dest="n_left")
            p.add_argument("--n-right", type=int, dest="n_right")
    return parser


_FLAG_KEYS = {
    "check-smatrix": ("family", "b", "n_samples"),
    "zf-verify": ("family", "n_points"),
    "scatter": ("s", "n"),
    "wedge-locality": ("mode",),
    "ff-verify": ("family", "k_max"),
    "car-disorder": ("n_left", "n_right"),
    "all-acceptance": (),
}


def _cfg_from_args(args) -> dict:
    full = _load_config(args.config)
    cfg = dict(full.get(args.command, {}))
    if args.command == "all-acceptance":
        cfg = full  # section names select the sub-runner configs
    for key in _FLAG_KEYS[args.command]:
        val = getattr(args, key, None)
        if val is not None:
            if key == "family" and args.command in ("check-smatrix", "zf-verify"):
                cfg["families"] = [val]
            else:
                cfg[key] = val
    return cfg


def main(argv=None) -> None:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _cfg_from_args(args)
        tols = _parse_tol_overrides(args.tol_override, TOL_DEFAULTS)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(2)
    try:
        report = RUNNERS[args.command](cfg, tols, args.seed, args.quiet)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(2)
    except NUMERIC_ERRORS as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        sys.exit(3)
    document = {"schema": SCHEMA, "seed": args.seed, **report}
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(json.dumps(document, sort_keys=True, indent=2) + "\n")
    sys.exit(0 if report["passed"] else 1)


if __name__ == "__main__":
    main()
