"""m-isometric dilations of m-concave operators."""

import json

from ._core import (
    MdilateError,
    beta_form,
    classify_spec,
    demo_names,
    demo_spec,
    dilate_three_concave,
    eigh,
    pinv_sqrt,
    shift_corner,
    sqrt_psd,
)
from ._core import demo as _demo
from ._core import run_spec as _run_spec


def run(spec):
    """Run the pipeline on a spec (dict or JSON text) and return the report as a dict."""
    text = spec if isinstance(spec, str) else json.dumps(spec)
    return json.loads(_run_spec(text))


def demo(name):
    return json.loads(_demo(name))


__all__ = [
    "MdilateError",
    "beta_form",
    "classify_spec",
    "demo",
    "demo_names",
    "demo_spec",
    "dilate_three_concave",
    "eigh",
    "pinv_sqrt",
    "run",
    "shift_corner",
    "sqrt_psd",
]
