"""Width-scaling parameterization laboratory.

Exact constraint algebra over per-role exponent triples (multiplier n^{-a},
init std n^{-b}, learning rate n^{-c}), max-stable learning-rate solving for
three optimizer scaling families under pluggable alignment assumptions, and
instrumented width sweeps on small MLPs. The heavy lifting lives in the
compiled extension; see `help(widthlab._core)` for the full surface.
"""

import json as _json

from ._core import (
    AlignmentAssumption,
    BindingConstraint,
    ConstraintReport,
    GradientExponents,
    InitReport,
    InitViolation,
    LayerRole,
    LayerTriple,
    MaxStableResult,
    OptimizerKind,
    Parameterization,
    PowerLawFit,
    Rat,
    Regime,
    RoleExponents,
    check_init_stability,
    classify,
    computed_table,
    fit_power_law,
    gradient_exponents,
    max_stable_lr,
    normalize_config,
    optimizer_kind,
    preset,
    preset_names,
    reference_table,
    reparameterize,
    table_diffs,
    training_stability,
    update_exponents,
    width_sweep_json,
)

__all__ = [
    "AlignmentAssumption",
    "BindingConstraint",
    "ConstraintReport",
    "GradientExponents",
    "InitReport",
    "InitViolation",
    "LayerRole",
    "LayerTriple",
    "MaxStableResult",
    "OptimizerKind",
    "Parameterization",
    "PowerLawFit",
    "Rat",
    "Regime",
    "RoleExponents",
    "check_init_stability",
    "classify",
    "computed_table",
    "fit_power_law",
    "gradient_exponents",
    "max_stable_lr",
    "normalize_config",
    "optimizer_kind",
    "preset",
    "preset_names",
    "reference_table",
    "reparameterize",
    "solved_preset",
    "table_diffs",
    "training_stability",
    "update_exponents",
    "width_sweep",
    "width_sweep_json",
]

__version__ = "1.0.0"


def width_sweep(p, optimizer, widths, seeds, **kwargs):
    """Instrumented width sweep returning the result as nested dicts.

    Thin wrapper over `width_sweep_json`; see that function for the keyword
    arguments (steps, fit_step, batch_size, d, L, base_lr, base_width,
    input_scale, target_scale, quantities).
    """
    return _json.loads(width_sweep_json(p, optimizer, widths, seeds, **kwargs))


def solved_preset(name, optimizer, alignment, depth_L=3):
    """The named preset with its learning-rate exponents set to the solved
    max-stable values for the given optimizer kind and alignment assumption."""
    p = preset(name)
    if isinstance(optimizer, str):
        optimizer = optimizer_kind(optimizer)
    result = max_stable_lr(p, optimizer, alignment, depth_L)
    p.embedding.c = result.c.embedding
    p.hidden.c = result.c.hidden
    p.readout.c = result.c.readout
    return p
