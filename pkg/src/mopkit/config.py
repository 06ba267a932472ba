"""Experiment configuration for the mopkit runner.

A configuration is a JSON document validated by the pydantic models below.
Rationals are written as ``"num/den"`` strings (plain integers are accepted),
polynomials as coefficient arrays lowest power first, and matrix polynomials
as lists of coefficient matrices.

Configuration Values:
    Required:
        - suites: Which checks to run (see ``VALID_SUITES``)

    Optional:
        - backend: ``rational`` (default) or ``float``
        - precision_bits: Mantissa bits of the float backend
        - N: Truncation of the moment matrix
        - measure: ``discrete`` atoms, ``lebesgue`` interval or ``jacobi_pineiro`` parameters
        - perturbation: ``L``, ``R``, orientation and masses
        - probes / probe_pairs: Evaluation points for the residual checks
        - case_study: Jacobi-Pineiro case-study settings
        - random: Seeds of the random oracle sweep
        - output: Report directory and CSV switch

Example:
    A scalar Christoffel perturbation of Lebesgue measure::

        {
          "suites": ["factor", "tau", "perturb"],
          "measure": {"kind": "lebesgue"},
          "perturbation": {"L": [[["-2"]], [["1"]]], "R": [[["1"]]]},
          "N": 6
        }

"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import TYPE_CHECKING, Annotated, Any, Literal

from pydantic import AfterValidator, BaseModel, BeforeValidator, ConfigDict, Field, ValidationError, model_validator

from mopkit.exceptions import (
    ATViolation,
    ConfigInvalid,
    IntegrabilityViolation,
    LeadingFormViolation,
    MissingSpectralData,
    MopkitError,
    NonRationalSpectrum,
)
from mopkit.fields import DEFAULT_PRECISION_BITS, BigFloatField, RationalField
from mopkit.jacobi_pineiro import VALID_PERTURBATIONS, JPParams, jp_bundle, jp_measure
from mopkit.matrix_poly import MatrixPolynomial
from mopkit.measures import MassData, discrete_measure, lebesgue_measure
from mopkit.numerics import UniPoly
from mopkit.uvarov import PerturbationBundle

if TYPE_CHECKING:
    from mopkit.fields.base import ScalarField
    from mopkit.measures import MatrixOfMeasures

logger = logging.getLogger(__name__)

# Default configuration values
DEFAULT_BACKEND = "rational"
DEFAULT_TRUNCATION = 6
DEFAULT_OUTPUT_DIR = "reports"
DEFAULT_RANDOM_SEEDS = 50
MAX_TRUNCATION = 64

VALID_BACKENDS = ("rational", "float")
VALID_SUITES = ("factor", "perturb", "residuals", "tau", "stieltjes", "jp-case-study", "existence", "random")
VALID_MEASURES = ("discrete", "lebesgue", "jacobi_pineiro")


def _check_rational(value: str) -> str:
    try:
        Fraction(value.strip())
    except (ValueError, ZeroDivisionError) as exc:
        msg = f"{value!r} is not a rational written as 'num/den'"
        raise ValueError(msg) from exc
    return value.strip()


def _coerce_text(value: object) -> object:
    return str(value) if isinstance(value, int) and not isinstance(value, bool) else value


Rational = Annotated[str, BeforeValidator(_coerce_text), AfterValidator(_check_rational)]
Coefficients = list[Rational]
CoefficientMatrix = list[list[Rational]]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class JPParamsConfig(_Strict):
    alpha1: Rational
    alpha2: Rational
    alpha3: Rational
    beta: Rational

    def build(self) -> JPParams:
        return JPParams(self.alpha1, self.alpha2, self.alpha3, self.beta)


class MeasureConfig(_Strict):
    """Base measure: ``discrete`` needs ``atoms``, ``jacobi_pineiro`` needs ``params``."""

    kind: Literal["discrete", "lebesgue", "jacobi_pineiro"]
    atoms: list[list[list[tuple[Rational, Rational]]]] | None = None
    interval: tuple[Rational, Rational] = ("0", "1")
    params: JPParamsConfig | None = None

    @model_validator(mode="after")
    def _required_parts(self) -> MeasureConfig:
        if self.kind == "discrete" and not self.atoms:
            msg = "discrete measures need an 'atoms' grid"
            raise ValueError(msg)
        if self.kind == "jacobi_pineiro" and self.params is None:
            msg = "jacobi_pineiro measures need 'params'"
            raise ValueError(msg)
        if self.atoms is not None:
            widths = {len(row) for row in self.atoms}
            if len(widths) != 1:
                msg = f"atom grid rows have different lengths {sorted(widths)}"
                raise ValueError(msg)
        return self


class MassConfig(_Strict):
    """One mass vector at chain position ``(eigenvalue, chain, position)``."""

    eigenvalue: int = Field(ge=0)
    chain: int = Field(default=0, ge=0)
    position: int = Field(default=0, ge=0)
    vector: list[Coefficients]


class PerturbationConfig(_Strict):
    L: list[CoefficientMatrix] = Field(min_length=1)
    R: list[CoefficientMatrix] = Field(min_length=1)
    orientation: Literal["standard", "dual"] = "standard"
    mass: list[MassConfig] = Field(default_factory=list)

    @model_validator(mode="after")
    def _square(self) -> PerturbationConfig:
        for name, coeffs in (("L", self.L), ("R", self.R)):
            size = len(coeffs[0])
            for k, block in enumerate(coeffs):
                if len(block) != size or any(len(row) != size for row in block):
                    msg = f"{name}[{k}] is not a {size}x{size} matrix"
                    raise ValueError(msg)
        return self


class CaseStudyConfig(_Strict):
    params: JPParamsConfig
    which: list[Literal["perturbation_1", "perturbation_2"]] = Field(default_factory=lambda: list(VALID_PERTURBATIONS))
    c: Rational = "1"
    d: Rational = "0"
    mass_1: list[Coefficients] | None = None
    mass_2: list[Coefficients] | None = None
    N: int = Field(default=10, ge=1, le=MAX_TRUNCATION)
    boundary_n: int = Field(default=6, ge=0, le=MAX_TRUNCATION)


class RandomConfig(_Strict):
    seeds: int = Field(default=DEFAULT_RANDOM_SEEDS, ge=1)
    first_seed: int = 0
    N: int = Field(default=DEFAULT_TRUNCATION, ge=1, le=8)


class OutputConfig(_Strict):
    directory: str = DEFAULT_OUTPUT_DIR
    csv: bool = True


class ExperimentConfig(_Strict):
    """The whole experiment."""

    suites: list[Literal["factor", "perturb", "residuals", "tau", "stieltjes", "jp-case-study", "existence", "random"]]
    backend: Literal["rational", "float"] = DEFAULT_BACKEND
    precision_bits: int = Field(default=DEFAULT_PRECISION_BITS, ge=16)
    N: int = Field(default=DEFAULT_TRUNCATION, ge=1, le=MAX_TRUNCATION)
    measure: MeasureConfig | None = None
    perturbation: PerturbationConfig | None = None
    probes: list[Rational] = Field(default_factory=list)
    probe_pairs: list[tuple[Rational, Rational]] = Field(default_factory=list)
    case_study: CaseStudyConfig | None = None
    random: RandomConfig | None = None
    output: OutputConfig = Field(default_factory=OutputConfig)

    @model_validator(mode="after")
    def _suite_inputs(self) -> ExperimentConfig:
        needs_measure = {"factor", "perturb", "residuals", "tau", "stieltjes", "existence"}
        needs_bundle = needs_measure - {"factor"}
        for suite in self.suites:
            if suite in needs_measure and self.measure is None:
                msg = f"suite {suite!r} needs a 'measure'"
                raise ValueError(msg)
            if suite in needs_bundle and self.perturbation is None:
                msg = f"suite {suite!r} needs a 'perturbation'"
                raise ValueError(msg)
            if suite == "jp-case-study" and self.case_study is None:
                msg = "suite 'jp-case-study' needs 'case_study'"
                raise ValueError(msg)
        return self


# =============================================================================
# Loading
# =============================================================================


def _error_path(error: dict[str, Any]) -> str:
    return ".".join(str(part) for part in error["loc"]) or "<root>"


def parse_config(data: object) -> ExperimentConfig:
    """Validate a decoded JSON document.

    Raises:
        ConfigInvalid: On the first schema error, with its dotted path.

    """
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ConfigInvalid(first["msg"], _error_path(dict(first))) from exc


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and validate a JSON configuration file.

    Raises:
        ConfigInvalid: If the file is unreadable, not JSON, or fails validation.

    """
    source = Path(path)
    try:
        text = source.read_text(encoding="utf-8")
    except OSError as exc:
        msg = f"cannot read {source}: {exc}"
        raise ConfigInvalid(msg) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        msg = f"{source} is not valid JSON: {exc.msg} (line {exc.lineno})"
        raise ConfigInvalid(msg) from exc
    logger.debug("mopkit: loaded configuration from %s", source)
    return parse_config(data)


def config_digest(config: ExperimentConfig) -> str:
    """sha256 of the canonical JSON form of the configuration."""
    import hashlib  # noqa: PLC0415

    canonical = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# =============================================================================
# Builders
# =============================================================================


def build_field(config: ExperimentConfig, precision_bits: int | None = None) -> ScalarField:
    """The backend named by the configuration."""
    if config.backend == "float":
        return BigFloatField(precision_bits or config.precision_bits)
    return RationalField()


def _poly(field: ScalarField, coeffs: list[str]) -> UniPoly:
    return UniPoly.from_coeffs(field, coeffs)


def build_measure(config: ExperimentConfig, field: ScalarField) -> MatrixOfMeasures:
    """The base measure."""
    section = config.measure
    if section is None:
        msg = "configuration has no measure"
        raise ConfigInvalid(msg, "measure")
    if section.kind == "discrete":
        return discrete_measure(field, section.atoms or [])
    if section.kind == "lebesgue":
        return lebesgue_measure(field, section.interval[0], section.interval[1])
    if section.params is None:
        msg = "jacobi_pineiro measures need params"
        raise ConfigInvalid(msg, "measure.params")
    return jp_measure(field, section.params.build())


def build_bundle(config: ExperimentConfig, field: ScalarField, mu: MatrixOfMeasures) -> PerturbationBundle:
    """The perturbation bundle of the configured ``L``, ``R`` and masses."""
    section = config.perturbation
    if section is None:
        msg = "configuration has no perturbation"
        raise ConfigInvalid(msg, "perturbation")
    L = MatrixPolynomial.from_coefficients(field, section.L)
    R = MatrixPolynomial.from_coefficients(field, section.R)
    size = mu.q if section.orientation == "standard" else mu.p
    vectors = {}
    for k, m in enumerate(section.mass):
        if len(m.vector) != size:
            msg = f"mass vector has {len(m.vector)} entries, expected {size}"
            raise ConfigInvalid(msg, f"perturbation.mass.{k}.vector")
        vectors[m.eigenvalue, m.chain, m.position] = tuple(_poly(field, c) for c in m.vector)
    try:
        return PerturbationBundle(mu, L, R, section.orientation, MassData(size, vectors))
    except ValueError as exc:
        raise ConfigInvalid(str(exc), "perturbation") from exc


# =============================================================================
# Semantic validation
# =============================================================================


@dataclass(frozen=True, slots=True)
class Diagnostic:
    """One semantic problem found without running any suite."""

    code: str
    message: str
    field_path: str

    def to_json(self) -> dict[str, str]:
        return {"code": self.code, "message": self.message, "field_path": self.field_path}


def validate_config(config: ExperimentConfig) -> list[Diagnostic]:
    """Leading forms, spectra, integrability and case-study parameters.

    Never raises for a semantic problem; every finding becomes a
    :class:`Diagnostic`.

    """
    out: list[Diagnostic] = []
    field = build_field(config)

    def note(exc: Exception, path: str) -> None:
        out.append(Diagnostic(type(exc).__name__, str(exc), path))

    mu = None
    if config.measure is not None:
        try:
            mu = build_measure(config, field)
        except (MopkitError, ValueError) as exc:
            note(exc, "measure")
    if mu is not None and config.perturbation is not None:
        try:
            bundle = build_bundle(config, field, mu)
            bundle.validate()
            _ = bundle.perturbed
        except LeadingFormViolation as exc:
            note(exc, f"perturbation.{exc.side}" if exc.side else "perturbation")
        except (NonRationalSpectrum, MissingSpectralData) as exc:
            note(exc, "perturbation.mass" if isinstance(exc, MissingSpectralData) else "perturbation")
        except IntegrabilityViolation as exc:
            note(exc, "perturbation")
        except ConfigInvalid as exc:
            note(exc, exc.field_path or "perturbation")
        except (MopkitError, ValueError) as exc:
            note(exc, "perturbation")
    if config.case_study is not None:
        cs = config.case_study
        try:
            params = cs.params.build()
            for which, mass in (("perturbation_1", cs.mass_1), ("perturbation_2", cs.mass_2)):
                if which in cs.which:
                    jp_bundle(field, params, which, cs.c, cs.d, mass).validate()
        except (ATViolation, IntegrabilityViolation, LeadingFormViolation, ValueError) as exc:
            note(exc, "case_study")
    logger.info("mopkit: configuration validated with %d diagnostics", len(out))
    return out


__all__ = [
    "DEFAULT_BACKEND",
    "DEFAULT_OUTPUT_DIR",
    "DEFAULT_TRUNCATION",
    "VALID_BACKENDS",
    "VALID_MEASURES",
    "VALID_SUITES",
    "CaseStudyConfig",
    "Diagnostic",
    "ExperimentConfig",
    "MassConfig",
    "MeasureConfig",
    "PerturbationConfig",
    "build_bundle",
    "build_field",
    "build_measure",
    "config_digest",
    "load_config",
    "parse_config",
    "validate_config",
]
