"""Command-line runner: ``mopkit run`` and ``mopkit validate``.

``run`` executes the suites named in the configuration and writes
``report.json`` (plus CSV tables) into the output directory. The JSON body
carries no timestamps, so identical configurations give byte-identical
reports. The exit status is 0 only if every suite passes.

"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from collections import Counter
from pathlib import Path
from typing import TYPE_CHECKING, Any

from mopkit import __version__
from mopkit.biorth import biorthogonal_family, pairing_check, projection_residual
from mopkit.config import (
    VALID_BACKENDS,
    ExperimentConfig,
    build_bundle,
    build_field,
    build_measure,
    config_digest,
    load_config,
    validate_config,
)
from mopkit.exceptions import ConfigInvalid, IntegrabilityViolation, MopkitError, SingularLeadingMinor
from mopkit.fields import BigFloatField
from mopkit.jacobi_pineiro import DEFAULT_CASE_STUDY_BITS, jp_boundary_values, jp_case_study, jp_family_check
from mopkit.matrix_poly import MatrixPolynomial, mp_smith_form, smith_partial_multiplicities, spectral_data
from mopkit.moments import build_moment_matrix
from mopkit.random_cases import random_sweep
from mopkit.stieltjes import stieltjes_transform_check
from mopkit.uvarov import (
    SpectralLedger,
    build_connection,
    connection_residuals,
    existence_report,
    omega_factor_residual,
    oracle_comparison,
    oracle_direct,
    tau_ledger,
    tau_pivot_check,
)

if TYPE_CHECKING:
    from collections.abc import Callable

    from mopkit.fields.base import ScalarField
    from mopkit.uvarov import PerturbationBundle

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


class RunContext:
    """Field, measure and bundle built lazily from one configuration."""

    def __init__(self, config: ExperimentConfig, field: ScalarField) -> None:
        self.config = config
        self.field = field
        self._mu = None
        self._bundle: PerturbationBundle | None = None
        self.tables: dict[str, list[list[str]]] = {}

    @property
    def mu(self) -> Any:
        if self._mu is None:
            self._mu = build_measure(self.config, self.field)
        return self._mu

    @property
    def bundle(self) -> PerturbationBundle:
        if self._bundle is None:
            self._bundle = build_bundle(self.config, self.field, self.mu)
        return self._bundle

    @property
    def N(self) -> int:
        return self.config.N

    def table(self, name: str, header: list[str]) -> list[list[str]]:
        rows = self.tables.setdefault(name, [header])
        return rows


# =============================================================================
# Suites
# =============================================================================


def suite_factor(ctx: RunContext) -> dict[str, Any]:
    """Moment matrix, Gauss-Borel pivots, biorthogonality and CD projection."""
    field, mu, N = ctx.field, ctx.mu, ctx.N
    moments = build_moment_matrix(mu, N)
    _, gb, fam = biorthogonal_family(mu, N)
    pairing = pairing_check(fam, mu)
    identity = MatrixPolynomial.identity(field, mu.p)
    projection = field.zero
    for x in ctx.config.probes:
        for n in range(mu.p - 1, N):
            projection = max(projection, projection_residual(fam, mu, n, identity, x).max_abs())
    rows = ctx.table("pivots", ["n", "H_n"])
    rows.extend([str(n), field.to_json(gb.h(n))] for n in range(gb.size))
    ok = field.is_zero(pairing) and field.is_zero(projection)
    return {
        "moments": moments.to_csv(),
        "H": [field.to_json(gb.h(n)) for n in range(gb.size)],
        "families": fam.to_json(),
        "pairing_residual": field.to_json(pairing),
        "projection_residual": field.to_json(projection),
        "ok": ok,
    }


def _smith_agreement(P: MatrixPolynomial) -> list[dict[str, Any]]:
    _, D, _ = mp_smith_form(P)
    out = []
    for datum in spectral_data(P):
        smith = smith_partial_multiplicities(D, datum.eigenvalue)
        out.append(
            {
                "eigenvalue": P.field.to_json(datum.eigenvalue),
                "chains": list(datum.partial_multiplicities),
                "smith": list(smith),
                "agree": tuple(datum.partial_multiplicities) == smith,
            }
        )
    return out


def suite_perturb(ctx: RunContext) -> dict[str, Any]:
    """Leading forms, spectra and the Christoffel formulas against the oracle."""
    bundle = ctx.bundle
    bundle.validate()
    field = ctx.field
    left, right = bundle.leading_forms
    out: dict[str, Any] = {
        "orientation": bundle.orientation,
        "M_L": bundle.M_L,
        "M_R": bundle.M_R,
        "leading_forms": {
            side: {"defect": form.defect, "condition": form.condition} for side, form in (("L", left), ("R", right))
        },
        "spectra": {
            side: [{"eigenvalue": field.to_json(s.eigenvalue), "multiplicity": s.multiplicity} for s in spectra]
            for side, spectra in (("L", bundle.spectra_L), ("R", bundle.spectra_R))
        },
    }
    agree = True
    if field.exact:
        smith = {"L": _smith_agreement(bundle.L), "R": _smith_agreement(bundle.R)}
        agree = all(row["agree"] for rows in smith.values() for row in rows)
        out["smith"] = smith
    report = oracle_comparison(bundle, ctx.N)
    _residual_rows(ctx, "perturb", report.to_json())
    out["oracle"] = report.to_json()
    out["ok"] = report.ok and agree
    return out


def _standard_families(ctx: RunContext) -> tuple[SpectralLedger, Any]:
    std = ctx.bundle.standard()
    _, _, fam = biorthogonal_family(std.mu, ctx.N)
    return SpectralLedger(std, fam), oracle_direct(std.perturbed, ctx.N)


def suite_residuals(ctx: RunContext) -> dict[str, Any]:
    """Connection, kernel and Cauchy identities on the determined window."""
    ledger, fam_tilde = _standard_families(ctx)
    omega = build_connection(ctx.bundle, ledger)
    pairs = [(x, y) for x, y in ctx.config.probe_pairs]
    report = connection_residuals(ledger, omega, fam_tilde, pairs)
    factors = omega_factor_residual(ctx.bundle, ledger, omega)
    _residual_rows(ctx, "residuals", report.to_json())
    _residual_rows(ctx, "omega_factors", factors.to_json())
    return {
        "omega": omega.to_json(),
        "connection": report.to_json(),
        "omega_factors": factors.to_json(),
        "ok": report.ok and factors.ok,
    }


def suite_tau(ctx: RunContext) -> dict[str, Any]:
    """The tau ledger and the pivot ratio it predicts."""
    field = ctx.field
    std = ctx.bundle.standard()
    _, _, fam = biorthogonal_family(std.mu, ctx.N)
    ledger = SpectralLedger(std, fam)
    taus = tau_ledger(std, ledger)
    rows = ctx.table("tau", ["n", "tau_n", "low"])
    rows.extend([str(n), field.to_json(v), str(n in taus.low)] for n, v in sorted(taus.values.items()))
    out: dict[str, Any] = {"tau": taus.to_json(), "zeros": taus.zeros()}
    try:
        fam_tilde = oracle_direct(std.perturbed, ctx.N)
    except SingularLeadingMinor as exc:
        out["pivots"] = {"skipped": f"perturbed LU fails at index {exc.index}"}
        out["ok"] = True
        return out
    pivots = tau_pivot_check(ctx.bundle, ledger, taus, fam_tilde)
    out["pivots"] = pivots.to_json()
    out["ok"] = pivots.ok
    return out


def suite_stieltjes(ctx: RunContext) -> dict[str, Any]:
    report = stieltjes_transform_check(ctx.bundle, ctx.config.probes)
    return report.to_json()


def suite_existence(ctx: RunContext) -> dict[str, Any]:
    report = existence_report(ctx.bundle, ctx.N)
    return {**report.to_json(), "ok": report.necessity_holds}


def _case_field(ctx: RunContext) -> ScalarField:
    if ctx.field.exact:
        return ctx.field
    return BigFloatField(max(ctx.field.precision_bits or 0, DEFAULT_CASE_STUDY_BITS))


def suite_jp_case_study(ctx: RunContext) -> dict[str, Any]:
    """Both Jacobi-Pineiro perturbations, the closed forms and their endpoint data."""
    cs = ctx.config.case_study
    if cs is None:
        msg = "suite 'jp-case-study' needs 'case_study'"
        raise ConfigInvalid(msg, "case_study")
    field = _case_field(ctx)
    params = cs.params.build()
    out: dict[str, Any] = {"params": params.to_json(), "precision_bits": field.precision_bits}
    ok = True
    family = jp_family_check(params, cs.N, field)
    out["closed_forms"] = family.to_json()
    ok = ok and family.ok
    boundary: dict[str, Any] = {}
    for n in range(cs.boundary_n):
        try:
            values = jp_boundary_values(field, params, n)
        except IntegrabilityViolation as exc:
            boundary["skipped"] = str(exc)
            break
        boundary[str(n)] = values.to_json()
        ok = ok and values.ok
    out["boundary"] = boundary
    for which in cs.which:
        mass = cs.mass_1 if which == "perturbation_1" else cs.mass_2
        report = jp_case_study(params, which, cs.c, cs.d, mass, cs.N, field)
        out[which] = report.to_json()
        ok = ok and report.ok
    out["ok"] = ok
    return out


def suite_random(ctx: RunContext) -> dict[str, Any]:
    """Oracle sweep over seeded discrete cases, with the existence contingency table."""
    plan = ctx.config.random
    first, count, N = (plan.first_seed, plan.seeds, plan.N) if plan else (0, 50, ctx.N)
    sweep = random_sweep(range(first, first + count), None, N)
    table: Counter[str] = Counter()
    failures, necessity = [], []
    for seed, (case, report) in sweep.items():
        if not report.ok:
            failures.append(seed)
        exist = existence_report(case.bundle, N)
        if not exist.necessity_holds:
            necessity.append(seed)
        key = ",".join(f"{k}={int(v)}" for k, v in sorted(exist.sufficiency.items()))
        table[key] += 1
    counter_examples = table.get("all_tau_nonzero=1,criteria_met_and_lu=0,omega_lu=1,perturbed_lu=0", 0)
    if counter_examples:
        logger.warning("mopkit: %d cases meet the tau and Omega criteria without a perturbed LU", counter_examples)
    rows = ctx.table("random", ["seed", "q", "p", "M_L", "M_R", "orientation", "ok"])
    for seed, (case, report) in sweep.items():
        d = case.describe()
        rows.append([str(seed), *(str(d[k]) for k in ("q", "p", "M_L", "M_R")), d["orientation"], str(report.ok)])
    return {
        "seeds": [first, first + count],
        "oracle_failures": failures,
        "necessity_failures": necessity,
        "contingency": dict(sorted(table.items())),
        "ok": not failures and not necessity,
    }


SUITES: dict[str, Callable[[RunContext], dict[str, Any]]] = {
    "factor": suite_factor,
    "perturb": suite_perturb,
    "residuals": suite_residuals,
    "tau": suite_tau,
    "stieltjes": suite_stieltjes,
    "jp-case-study": suite_jp_case_study,
    "existence": suite_existence,
    "random": suite_random,
}


def _residual_rows(ctx: RunContext, suite: str, report: dict[str, Any]) -> None:
    rows = ctx.table("residuals", ["suite", "check", "value"])
    rows.extend([suite, name, value] for name, value in report["residuals"].items())


def _error_entry(exc: MopkitError) -> dict[str, Any]:
    entry: dict[str, Any] = {"error": type(exc).__name__, "message": str(exc), "ok": False}
    index = getattr(exc, "index", None)
    if index is not None:
        entry["index"] = index
    return entry


# =============================================================================
# Commands
# =============================================================================


def apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    """Fold ``--backend``, ``--precision`` and ``--out`` into the configuration."""
    update: dict[str, Any] = {}
    if args.backend:
        update["backend"] = args.backend
    if args.precision:
        update["precision_bits"] = args.precision
    if args.out:
        update["output"] = config.output.model_copy(update={"directory": str(args.out)})
    return config.model_copy(update=update) if update else config


def run(config: ExperimentConfig) -> tuple[int, dict[str, Any]]:
    """Execute every requested suite and write the report files.

    Returns:
        The exit status and the report body.

    """
    field = build_field(config)
    ctx = RunContext(config, field)
    results: dict[str, Any] = {}
    for name in config.suites:
        logger.info("mopkit: running suite %s", name)
        try:
            results[name] = SUITES[name](ctx)
        except MopkitError as exc:
            logger.error("mopkit: suite %s failed: %s", name, exc)  # noqa: TRY400
            results[name] = _error_entry(exc)
    ok = all(r.get("ok", False) for r in results.values())
    report = {
        "mopkit": __version__,
        "config_sha256": config_digest(config),
        "backend": field.name,
        "precision_bits": field.precision_bits,
        "N": config.N,
        "suites": results,
        "ok": ok,
    }
    write_report(config, report, ctx.tables)
    return (EXIT_OK if ok else EXIT_FAILED), report


def write_report(config: ExperimentConfig, report: dict[str, Any], tables: dict[str, list[list[str]]]) -> Path:
    """Write ``report.json`` and, if enabled, one CSV per table."""
    out = Path(config.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "report.json"
    path.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    if config.output.csv:
        for name, rows in sorted(tables.items()):
            with (out / f"{name}.csv").open("w", newline="", encoding="utf-8") as handle:
                csv.writer(handle, lineterminator="\n").writerows(rows)
    logger.info("mopkit: report written to %s", path)
    return path


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        config = apply_overrides(load_config(args.config), args)
    except ConfigInvalid as exc:
        sys.stderr.write(f"mopkit: invalid configuration: {exc}\n")
        return EXIT_CONFIG
    status, report = run(config)
    failed = sorted(k for k, v in report["suites"].items() if not v.get("ok", False))
    sys.stdout.write(f"mopkit: {'ok' if status == EXIT_OK else 'FAILED ' + ', '.join(failed)}\n")
    return status


def _cmd_validate(args: argparse.Namespace) -> int:
    try:
        config = apply_overrides(load_config(args.config), args)
    except ConfigInvalid as exc:
        diagnostics = [{"code": "ConfigInvalid", "message": str(exc), "field_path": exc.field_path or ""}]
    else:
        diagnostics = [d.to_json() for d in validate_config(config)]
    sys.stdout.write(json.dumps({"diagnostics": diagnostics}, sort_keys=True, indent=2) + "\n")
    return EXIT_OK if not diagnostics else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mopkit", description="Verify Uvarov perturbations of multiple orthogonal polynomials."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="More logging (repeat for debug).")
    commands = parser.add_subparsers(dest="command", required=True)
    for name, handler, text in (
        ("run", _cmd_run, "Run the configured suites and write reports."),
        ("validate", _cmd_validate, "Check a configuration without running suites."),
    ):
        sub = commands.add_parser(name, help=text)
        sub.add_argument("config", type=Path, help="JSON configuration file.")
        sub.add_argument("--out", type=Path, default=None, help="Report directory (overrides output.directory).")
        sub.add_argument("--precision", type=int, default=None, help="Mantissa bits of the float backend.")
        sub.add_argument("--backend", choices=VALID_BACKENDS, default=None)
        sub.set_defaults(handler=handler)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    return args.handler(args)


__all__ = ["SUITES", "apply_overrides", "build_parser", "main", "run", "write_report"]
