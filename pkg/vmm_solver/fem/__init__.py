"""
    C1 finite elements, quadrature and DOF maps.
"""

from typing import Any

from vmm_solver.exceptions import DimensionMismatchError
from vmm_solver.fem.base import BaseElement, BasisEval, ElementKind
from vmm_solver.fem.hermite import HermiteElement, hermite_basis
from vmm_solver.fem.argyris import ArgyrisElement, argyris_basis
from vmm_solver.fem.quadrature import QuadratureRule, quadrature_rule
from vmm_solver.fem.dofmap import (
    DofMap,
    build_dof_map,
    evaluate_coefficients,
    interpolate,
    local_coefficients,
)


def build_element_instance(element_argument: Any) -> BaseElement:
    """
    Builds element instance by element argument.
    Accepts an ElementKind, a spatial dimension (1 or 2), an element class or an element instance.
    """
    if isinstance(element_argument, BaseElement):
        # Passed already constructed element, should do nothing.
        return element_argument

    if isinstance(element_argument, type) and issubclass(element_argument, BaseElement):
        return element_argument()

    if isinstance(element_argument, int) and not isinstance(element_argument, bool):
        if element_argument not in (1, 2):
            raise DimensionMismatchError(
                f"No C1 element for dimension {element_argument}!"
            )
        element_argument = ElementKind.for_dimension(element_argument)

    if element_argument is ElementKind.HERMITE3_1D:
        return HermiteElement()
    if element_argument is ElementKind.ARGYRIS5_2D:
        return ArgyrisElement()

    # Unable to instantiate element instance.
    raise DimensionMismatchError(
        f"Failed to build element instance from {element_argument!r}!"
    )


__all__ = [
    # Typing.
    "BaseElement",
    "BasisEval",
    "ElementKind",
    "QuadratureRule",
    "DofMap",
    # Elements.
    "HermiteElement",
    "ArgyrisElement",
    "build_element_instance",
    # Functions.
    "hermite_basis",
    "argyris_basis",
    "quadrature_rule",
    "build_dof_map",
    "interpolate",
    "local_coefficients",
    "evaluate_coefficients",
]
