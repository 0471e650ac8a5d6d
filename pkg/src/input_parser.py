"""Parsing and sanitization of command-line specs and input files."""

import json
import re
from pathlib import Path
from typing import Any, List, Optional

from agentstr.logger import get_logger

from .abelian import FiniteAbelianGroup, Homomorphism, identity
from .cohomology import Coefficients, Cochain, carry_cocycle, product_cocycle
from .constants import MAX_SPEC_LENGTH
from .exceptions import ParseError, ToolkitError
from .orthogonal import minus_identity
from .quadratic import MetricGroup, QuadraticForm, evaluation_form, split_form, square_form

logger = get_logger(__name__)

_CONTROL_CHARS = re.compile(r'[\x00-\x1f\x7f-\x9f]')
_INTEGER = re.compile(r'^-?\d+$')


def sanitize_spec(text: Optional[str], max_length: int = MAX_SPEC_LENGTH) -> str:
    """Strip control characters and surrounding whitespace from a spec string.

    Args:
        text: Raw spec text.
        max_length: Maximum accepted length.

    Returns:
        Cleaned spec.

    Raises:
        ParseError: If the spec is missing or longer than ``max_length``.
    """
    if text is None:
        raise ParseError("missing spec")
    text = _CONTROL_CHARS.sub('', text).strip()
    if len(text) > max_length:
        raise ParseError(f"spec of {len(text)} characters exceeds the limit {max_length}")
    return text


def parse_int(text: str, name: str, minimum: Optional[int] = None) -> int:
    text = sanitize_spec(text)
    if not _INTEGER.match(text):
        raise ParseError(f"{name} must be an integer, got {text!r}")
    value = int(text)
    if minimum is not None and value < minimum:
        raise ParseError(f"{name} must be at least {minimum}, got {value}")
    return value


def _int_list(text: str, name: str, minimum: Optional[int] = None) -> List[int]:
    if not text:
        raise ParseError(f"{name} is empty")
    return [parse_int(part, name, minimum) for part in text.split(',')]


def _split_prefix(spec: str) -> tuple:
    head, sep, rest = spec.partition(':')
    return head.strip().lower(), rest.strip() if sep else None


def parse_group(spec: str) -> FiniteAbelianGroup:
    """A group spec "n1,n2,..."; "0" or "trivial" is the trivial group."""
    spec = sanitize_spec(spec)
    if spec.lower() in ("0", "trivial"):
        return FiniteAbelianGroup.trivial()
    return FiniteAbelianGroup(tuple(_int_list(spec, "cyclic order", minimum=1)))


def read_json_file(path: str) -> Any:
    """Load a JSON input file.

    Raises:
        ParseError: If the file is missing or not valid JSON.
    """
    file_path = Path(sanitize_spec(path))
    if not file_path.is_file():
        raise ParseError(f"input file {file_path} does not exist")
    try:
        with open(file_path, 'r') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ParseError(f"{file_path} is not valid JSON: {e}") from e


def _from_file(path: str, reader, what: str):
    data = read_json_file(path)
    try:
        return reader(data)
    except ToolkitError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"{path} is not a valid {what} file: {e}") from e


def parse_form(spec: str) -> QuadraticForm:
    """A form spec ev:<orders> | split:<n>,<p> | square:<n> | file:<path>.

    ``ev:<orders>`` is the evaluation form on L + L^ with L given by
    ``<orders>``.
    """
    spec = sanitize_spec(spec)
    kind, rest = _split_prefix(spec)
    if rest is None:
        raise ParseError(f"form spec {spec!r} needs a kind prefix such as ev: or split:")
    if kind == "ev":
        return evaluation_form(parse_group(rest)).form
    if kind == "split":
        values = _int_list(rest, "split parameter")
        if len(values) != 2:
            raise ParseError(f"split needs <n>,<p>, got {rest!r}")
        n, p = values
        if n < 0:
            raise ParseError(f"split rank must be non-negative, got {n}")
        return split_form(n, p).form
    if kind == "square":
        return square_form(parse_int(rest, "square order", minimum=1))
    if kind == "file":
        return _from_file(rest, QuadraticForm.from_json, "form")
    raise ParseError(f"unknown form kind {kind!r}")


def parse_metric(spec: str, group: Optional[FiniteAbelianGroup] = None) -> MetricGroup:
    """A nondegenerate form; ``group`` must match the form's group when given."""
    form = parse_form(spec)
    if group is not None and form.group != group:
        raise ParseError(f"form {spec!r} lives on {form.group}, not on --group {group}")
    return MetricGroup(form)


def parse_coefficients(spec: str) -> Coefficients:
    """scalars | muN:<N>."""
    spec = sanitize_spec(spec)
    if spec.lower() == "scalars":
        return Coefficients.scalars()
    kind, rest = _split_prefix(spec)
    if kind == "mun" and rest:
        return Coefficients.mu(parse_int(rest, "N", minimum=1))
    raise ParseError(f"coefficients must be 'scalars' or 'muN:<N>', got {spec!r}")


def _index(value: int, group: FiniteAbelianGroup) -> int:
    if not 0 <= value < group.rank:
        raise ParseError(f"factor index {value} out of range for {group}")
    return value


def parse_tau(spec: str, group: FiniteAbelianGroup, modulus: Optional[int] = None) -> Cochain:
    """A 3-cocycle spec trivial | carry | carry:<i>,<j> | product:<i>,<j>,<k> | file:<path>."""
    spec = sanitize_spec(spec)
    kind, rest = _split_prefix(spec)
    if kind == "trivial" and rest is None:
        return Cochain.zero(group, 3, modulus or group.exponent)
    if kind == "carry":
        if group.rank == 0:
            raise ParseError("the carry cocycle needs a nontrivial group")
        values = [0, 0] if rest is None else _int_list(rest, "factor index")
        if len(values) != 2:
            raise ParseError(f"carry takes <i>,<j>, got {rest!r}")
        i, j = (_index(v, group) for v in values)
        return carry_cocycle(group, i, j, modulus)
    if kind == "product":
        values = _int_list(rest or "", "factor index")
        if len(values) != 3:
            raise ParseError(f"product needs <i>,<j>,<k>, got {rest!r}")
        i, j, k = (_index(v, group) for v in values)
        return product_cocycle(group, i, j, k, modulus)
    if kind == "file" and rest:
        tau = _from_file(rest, Cochain.from_json, "cochain")
        if tau.group != group or tau.degree != 3:
            raise ParseError(f"{rest} holds a degree-{tau.degree} cochain on {tau.group}, "
                             f"expected a 3-cochain on {group}")
        return tau
    raise ParseError(f"unknown tau spec {spec!r}")


def parse_subgroup_generators(spec: str, metric: MetricGroup) -> List[Homomorphism]:
    """Generators of a subgroup of O(A, q): minus-identity | trivial | file:<path>.

    A file holds a JSON list of homomorphisms.
    """
    spec = sanitize_spec(spec)
    kind, rest = _split_prefix(spec)
    if kind == "minus-identity" and rest is None:
        return [minus_identity(metric.group)]
    if kind == "trivial" and rest is None:
        return [identity(metric.group)]
    if kind == "file" and rest:
        data = read_json_file(rest)
        if not isinstance(data, list):
            raise ParseError(f"{rest} must hold a JSON list of homomorphisms")
        return [_from_file_entry(entry, rest) for entry in data]
    raise ParseError(f"unknown subgroup spec {spec!r}")


def _from_file_entry(entry: Any, path: str) -> Homomorphism:
    try:
        return Homomorphism.from_json(entry)
    except ToolkitError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"{path} holds an invalid homomorphism: {e}") from e
