"""Command dispatch: turns a JobSpec into a ResultEnvelope."""

import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, ValidationError, model_validator
from agentstr.logger import get_logger

from .abelian import dual, enumerate_automorphisms, identity, is_perfect_pairing, pairing_matrix
from .center import (
    CORRECTIONS, PointedFusionData, additivity_witness, center_metric_group, classify_center,
    commutator_form, is_center_pointed, pointwise_trivializations, solve_trivialization,
    t_two_cocycle,
)
from .clifford import QuadraticSpace, pin_spin_report, spinor_module
from .cohomology import (
    cohomology, cocycle_witness, em_correspondence, is_abelian_3cocycle, is_coboundary,
    torsor_and_coefficient_report,
)
from .config_manager import ConfigManager
from .constants import SCALAR_PROPERTY_SAMPLES, TOOL_VERSION
from .exceptions import ParseError, VerificationFailure
from .input_parser import (
    parse_coefficients, parse_form, parse_group, parse_int, parse_metric,
    parse_subgroup_generators, parse_tau, sanitize_spec,
)
from .orthogonal import (
    det_spectrum, determinant_is_multiplicative, is_normal, is_subgroup, orthogonal_group,
    special_orthogonal_group, split_orthogonal_check,
)
from .quadratic import enumerate_bicharacters, enumerate_quadratic_forms, isotropic_vectors, polarize
from .scalars import check_scalar_laws, set_order_cap
from .subgroups import find_polarizations, is_isotropic, isotropic_subgroups, lagrangian_subgroups

logger = get_logger(__name__)


class JobSpec(BaseModel):
    """One command invocation with its input payload."""
    command: str
    verb: str
    args: Dict[str, Any] = Field(default_factory=dict)
    cap: Optional[int] = Field(default=None, ge=1)
    seed: int = Field(default=0, ge=0)
    output: Optional[str] = None

    @model_validator(mode="after")
    def _files_exist(self) -> "JobSpec":
        for name, value in self.args.items():
            if isinstance(value, str) and value.startswith("file:"):
                path = Path(value[len("file:"):].strip())
                if not path.is_file():
                    raise ValueError(f"--{name} refers to missing file {path}")
        return self

    @property
    def key(self) -> str:
        return f"{self.command} {self.verb}"

    def canonical(self) -> Dict[str, Any]:
        """Input echo with defaults filled in and the output path left out."""
        return self.model_dump(exclude={"output"}, exclude_none=True)

    @classmethod
    def build(cls, **fields: Any) -> "JobSpec":
        """Validate fields, reporting failures as ParseError."""
        try:
            return cls(**fields)
        except ValidationError as e:
            raise ParseError(f"invalid job: {e.errors()[0]['msg']}") from e


class CheckResult(BaseModel):
    """One verification check run on a result."""
    name: str
    passed: bool
    detail: Optional[Any] = None


class ResultEnvelope(BaseModel):
    """Result of one job with its verification summary."""
    tool_version: str = TOOL_VERSION
    input: Dict[str, Any]
    seed: int
    wall_time: Optional[float] = None
    result: Dict[str, Any] = Field(default_factory=dict)
    checks: List[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> Dict[str, Any]:
        return {**self.model_dump(exclude_none=True), "status": "ok" if self.passed else "failed"}


Outcome = Tuple[Dict[str, Any], List[CheckResult]]


def _check(name: str, passed: bool, detail: Any = None) -> CheckResult:
    return CheckResult(name=name, passed=bool(passed), detail=detail)


def _verified(name: str, verify: Callable[[], Any]) -> CheckResult:
    """Run a verifier that raises VerificationFailure and record the outcome."""
    try:
        verify()
    except VerificationFailure as e:
        logger.warning(f"check {name} failed: {e}")
        return _check(name, False, {"message": str(e), "witness": e.witness})
    return _check(name, True)


class CommandHandler:
    """Dispatches jobs to the library operations."""

    def __init__(self, config_manager: Optional[ConfigManager] = None):
        """Initialize command handler.

        Args:
            config_manager: Source of caps and policies; defaults are used
                when omitted.
        """
        self.config_manager = config_manager or ConfigManager()
        set_order_cap(self.config_manager.get_order_cap())
        self.commands: Dict[str, Callable[[JobSpec], Outcome]] = {
            'group dual': self._handle_group_dual,
            'group aut': self._handle_group_aut,
            'quad show': self._handle_quad_show,
            'quad forms': self._handle_quad_forms,
            'orth order': self._handle_orth_order,
            'orth split': self._handle_orth_split,
            'lagrangian list': self._handle_lagrangian_list,
            'lagrangian polarize': self._handle_lagrangian_polarize,
            'cohomology compute': self._handle_cohomology_compute,
            'cohomology em': self._handle_cohomology_em,
            'cohomology torsor': self._handle_cohomology_torsor,
            'cohomology check': self._handle_cohomology_check,
            'center pointed': self._handle_center_pointed,
            'center classify': self._handle_center_classify,
            'center double': self._handle_center_double,
            'clifford pin': self._handle_clifford_pin,
            'clifford module': self._handle_clifford_module,
            'scalars check': self._handle_scalars_check,
        }
        logger.info("Command handler initialized")

    def run(self, spec: JobSpec, timing: bool = False) -> ResultEnvelope:
        """Execute one job.

        Args:
            spec: The job.
            timing: Record wall time in the envelope.

        Returns:
            The envelope; failed checks are reported in it, not raised.

        Raises:
            ParseError: Unknown command or malformed arguments.
            CapExceeded: An enumeration cap was hit.
            ToolkitError: Any other library error.
        """
        handler = self.commands.get(spec.key)
        if handler is None:
            raise ParseError(f"unknown command: {spec.key}")
        logger.info(f"Processing command: {spec.key}")
        start = time.perf_counter()
        result, checks = handler(spec)
        elapsed = time.perf_counter() - start
        envelope = ResultEnvelope(
            input=spec.canonical(),
            seed=spec.seed,
            wall_time=round(elapsed, 6) if timing else None,
            result=result,
            checks=checks,
        )
        if envelope.passed:
            logger.info(f"Command {spec.key} executed successfully")
        else:
            failed = [c.name for c in checks if not c.passed]
            logger.warning(f"Command {spec.key} finished with failed checks: {failed}")
        return envelope

    # Argument helpers

    def _arg(self, spec: JobSpec, name: str, default: Any = None) -> Any:
        value = spec.args.get(name, default)
        if value is None:
            raise ParseError(f"{spec.key} needs --{name}")
        return value

    def _int_arg(self, spec: JobSpec, name: str, default: Optional[int] = None,
                 minimum: Optional[int] = None) -> int:
        value = self._arg(spec, name, default)
        if isinstance(value, bool):
            raise ParseError(f"--{name} must be an integer")
        return parse_int(str(value), name, minimum)

    def _flag(self, spec: JobSpec, name: str) -> bool:
        value = spec.args.get(name, False)
        if isinstance(value, str):
            return value.strip().lower() in ("1", "true", "yes")
        return bool(value)

    def _group(self, spec: JobSpec):
        return parse_group(self._arg(spec, "group"))

    def _metric(self, spec: JobSpec):
        group = parse_group(spec.args["group"]) if spec.args.get("group") else None
        return parse_metric(self._arg(spec, "form"), group)

    def _automorphism_cap(self, spec: JobSpec) -> int:
        return spec.cap or self.config_manager.get_automorphism_cap()

    def _subgroup_cap(self, spec: JobSpec) -> int:
        return spec.cap or self.config_manager.get_subgroup_cap()

    def _matrix_cap(self, spec: JobSpec) -> int:
        return spec.cap or self.config_manager.get_matrix_cap()

    def _clifford_cap(self, spec: JobSpec) -> int:
        return spec.cap or self.config_manager.get_clifford_cap()

    def _fusion_data(self, spec: JobSpec) -> PointedFusionData:
        group = self._group(spec)
        modulus = spec.args.get("modulus")
        modulus = parse_int(str(modulus), "modulus", 1) if modulus is not None else None
        return PointedFusionData(group, parse_tau(self._arg(spec, "tau", "trivial"), group, modulus))

    # group

    def _handle_group_dual(self, spec: JobSpec) -> Outcome:
        group = self._group(spec)
        duality = dual(group)
        perfect = is_perfect_pairing(group)
        result = {
            "group": group.to_json(),
            "dual": duality.group.to_json(),
            "exponent": group.exponent,
            "pairing": pairing_matrix(group).tolist(),
        }
        return result, [_check("perfect_pairing", perfect)]

    def _handle_group_aut(self, spec: JobSpec) -> Outcome:
        group = self._group(spec)
        automorphisms = enumerate_automorphisms(group, self._automorphism_cap(spec))
        identity_key = identity(group).matrix
        result = {"group": group.to_json(), "automorphism_count": len(automorphisms)}
        if self._flag(spec, "list"):
            result["automorphisms"] = [f.to_json() for f in automorphisms]
        return result, [_check("contains_identity", any(f.matrix == identity_key for f in automorphisms))]

    # quad

    def _handle_quad_show(self, spec: JobSpec) -> Outcome:
        form = parse_form(self._arg(spec, "form"))
        witness = form.check_axioms()
        result: Dict[str, Any] = {"form": form.to_json(), "modulus": form.modulus}
        if witness is None:
            bicharacter = polarize(form)
            result["bicharacter"] = bicharacter.to_json()
            result["nondegenerate"] = bicharacter.is_nondegenerate()
            result["isotropic_vector_count"] = len(isotropic_vectors(form))
        return result, [_check("axioms", witness is None, witness)]

    def _handle_quad_forms(self, spec: JobSpec) -> Outcome:
        group = self._group(spec)
        nondegenerate_only = self._flag(spec, "nondegenerate")
        forms = enumerate_quadratic_forms(group, nondegenerate_only, self._automorphism_cap(spec))
        result: Dict[str, Any] = {
            "group": group.to_json(),
            "nondegenerate_only": nondegenerate_only,
            "form_count": len(forms),
        }
        if self._flag(spec, "list"):
            result["forms"] = [f.to_json() for f in forms]
        checks = [_check("axioms", all(f.check_axioms() is None for f in forms))]
        if group.order % 2 and not nondegenerate_only:
            bicharacters = len(enumerate_bicharacters(group))
            result["bicharacter_count"] = bicharacters
            checks.append(_check("odd_order_bijection", bicharacters == len(forms),
                                 {"forms": len(forms), "bicharacters": bicharacters}))
        return result, checks

    # orth

    def _handle_orth_order(self, spec: JobSpec) -> Outcome:
        metric = self._metric(spec)
        group = orthogonal_group(metric, self._automorphism_cap(spec))
        special = special_orthogonal_group(group)
        index = group.order // special.order
        result: Dict[str, Any] = {
            "group": metric.group.to_json(),
            "order": group.order,
            "special_order": special.order,
            "so_index": index,
            "det_spectrum": {str(k): v for k, v in det_spectrum(group).items()},
        }
        if metric.group.order <= self.config_manager.get_subgroup_cap():
            result["lagrangian_count"] = len(lagrangian_subgroups(metric))
        else:
            logger.info(f"|A| = {metric.group.order} above the subgroup cap; no Lagrangian count")
        checks = [
            _check("det_multiplicative", determinant_is_multiplicative(group)),
            _check("special_is_subgroup", is_subgroup(special.elements)),
            _check("special_is_normal", is_normal(special.elements, group.elements)),
            _check("special_index_at_most_2", index <= 2, {"index": index}),
        ]
        return result, checks

    def _handle_orth_split(self, spec: JobSpec) -> Outcome:
        n = self._int_arg(spec, "n", minimum=1)
        p = self._int_arg(spec, "p", minimum=2)
        report = split_orthogonal_check(n, p, self._automorphism_cap(spec))
        return report.to_json(), [
            _check("formula", report.matches,
                   {"brute_force": report.brute_force_order, "formula": report.formula_order}),
            _check("special_index_at_most_2", report.index <= 2, {"index": report.index}),
        ]

    # lagrangian

    def _handle_lagrangian_list(self, spec: JobSpec) -> Outcome:
        metric = self._metric(spec)
        cap = self._subgroup_cap(spec)
        isotropic = isotropic_subgroups(metric.form, cap)
        lagrangians = [s for s in isotropic if s.order ** 2 == metric.group.order]
        result = {
            "group": metric.group.to_json(),
            "isotropic_count": len(isotropic),
            "lagrangian_count": len(lagrangians),
            "lagrangians": [s.to_json() for s in lagrangians],
        }
        return result, [_check("lagrangians_isotropic", all(is_isotropic(s, metric.form) for s in lagrangians))]

    def _handle_lagrangian_polarize(self, spec: JobSpec) -> Outcome:
        metric = self._metric(spec)
        polarizations = find_polarizations(metric, self._subgroup_cap(spec))
        result = {
            "group": metric.group.to_json(),
            "polarization_count": len(polarizations),
            "polarizations": [p.to_json() for p in polarizations],
        }
        return result, [_check("polarizations_verify", all(p.verify() for p in polarizations))]

    # cohomology

    def _handle_cohomology_compute(self, spec: JobSpec) -> Outcome:
        group = self._group(spec)
        degree = self._int_arg(spec, "degree", minimum=0)
        coefficients = parse_coefficients(self._arg(spec, "coeff", self.config_manager.get_coefficients()))
        h = cohomology(group, degree, coefficients, self._matrix_cap(spec))
        return h.to_json(), [_verified("representatives", h.verify)]

    def _handle_cohomology_em(self, spec: JobSpec) -> Outcome:
        group = self._group(spec)
        modulus = spec.args.get("modulus", self.config_manager.get_em_modulus())
        modulus = parse_int(str(modulus), "modulus", 1) if modulus is not None else None
        report = em_correspondence(group, modulus)
        return report.to_json(), [_check("bijective", report.bijective,
                                         {"classes": report.class_count, "forms": report.form_count})]

    def _handle_cohomology_torsor(self, spec: JobSpec) -> Outcome:
        metric = self._metric(spec)
        generators = parse_subgroup_generators(self._arg(spec, "subgroup", "minus-identity"), metric)
        report = torsor_and_coefficient_report(metric, generators, self._matrix_cap(spec))
        return report.to_json(), [_verified("h3_representatives", report.h3.verify)]

    def _handle_cohomology_check(self, spec: JobSpec) -> Outcome:
        group = self._group(spec)
        modulus = spec.args.get("modulus")
        modulus = parse_int(str(modulus), "modulus", 1) if modulus is not None else None
        tau = parse_tau(self._arg(spec, "tau"), group, modulus)
        witness = cocycle_witness(tau)
        result: Dict[str, Any] = {"cochain": tau.to_json(), "cocycle": witness is None}
        if witness is None:
            primitive = is_coboundary(tau)
            full = is_coboundary(tau, full_scalars=True)
            result["coboundary"] = primitive is not None
            result["coboundary_over_scalars"] = full is not None
            if full is not None:
                result["primitive"] = full.to_json()
        return result, [_check("cocycle", witness is None, witness)]

    # center

    def _handle_center_pointed(self, spec: JobSpec) -> Outcome:
        d = self._fusion_data(spec)
        pointed = is_center_pointed(d)
        pointwise = pointwise_trivializations(d)
        symmetric = all(
            not np.any(commutator_form(t_two_cocycle(d, g))) for g in d.lattice.generators()
        )
        failing = [list(d.lattice.coords_at(i)) for i, t in enumerate(pointwise) if t is None]
        result: Dict[str, Any] = {
            "fusion_data": d.to_json(),
            "pointed": pointed,
            "non_coboundary_elements": failing,
        }
        if pointed:
            result["additivity_witness"] = additivity_witness(d)
        return result, [
            _check("commutator_oracle", pointed == symmetric),
            _check("pointwise_agrees", pointed == (not failing)),
        ]

    def _handle_center_classify(self, spec: JobSpec) -> Outcome:
        d = self._fusion_data(spec)
        correction = self._arg(spec, "correction", "antisymmetric")
        if correction not in CORRECTIONS:
            raise ParseError(f"--correction must be one of {CORRECTIONS}, got {correction!r}")
        cap = self._matrix_cap(spec)
        trivialization = solve_trivialization(d, cap)
        classification = classify_center(d, trivialization, correction, cap)
        valid, witness = is_abelian_3cocycle(classification.cocycle_pair)
        return classification.to_json(), [_check("abelian_3cocycle", valid, witness)]

    def _handle_center_double(self, spec: JobSpec) -> Outcome:
        d = self._fusion_data(spec)
        double = center_metric_group(d, self._automorphism_cap(spec))
        order = double.metric.group.order
        return double.to_json(), [_check("order", order == d.lattice.order ** 2, {"order": order})]

    # clifford

    def _space(self, spec: JobSpec) -> QuadraticSpace:
        p = self._int_arg(spec, "p", minimum=2)
        if spec.args.get("diag") is not None:
            values = [parse_int(v, "diag entry") for v in sanitize_spec(str(spec.args["diag"])).split(",")]
            return QuadraticSpace.from_diagonal(values, p)
        return QuadraticSpace.split(self._int_arg(spec, "n", minimum=1), p)

    def _handle_clifford_pin(self, spec: JobSpec) -> Outcome:
        report = pin_spin_report(self._space(spec), self._clifford_cap(spec))
        return report.to_json(), [
            _check("kernel_is_scalars", report.kernel_is_scalars),
            _check("surjective", report.surjective),
            _check("reflections_generate_orthogonal", report.reflections_generate_orthogonal,
                   {"reflection_group_order": report.reflection_group_order,
                    "orthogonal_order": report.orthogonal_order}),
            _check("pin_kernel_is_plus_minus_one", report.pin_kernel_is_plus_minus_one),
            _check("pin_onto_norm_kernel", report.pin_onto_norm_kernel),
            _check("diagram_commutes", report.diagram_commutes),
            _check("determinant_matches_parity", report.determinant_matches_parity),
        ]

    def _handle_clifford_module(self, spec: JobSpec) -> Outcome:
        n = self._int_arg(spec, "n", minimum=1)
        p = self._int_arg(spec, "p", minimum=2)
        report = spinor_module(n, p)
        return report.to_json(), [_check("bijective", report.bijective, {"rank": report.rank})]

    # scalars

    def _handle_scalars_check(self, spec: JobSpec) -> Outcome:
        samples = self._int_arg(spec, "samples", SCALAR_PROPERTY_SAMPLES, minimum=1)
        failures = check_scalar_laws(spec.seed, samples)
        result = {"samples": samples, "laws": sorted(failures)}
        return result, [_check(law, witness is None, witness) for law, witness in sorted(failures.items())]
