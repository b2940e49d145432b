"""blockdec — block decomposition of quivers and s-diagrams.

The package decides whether a diagram can be glued from the fixed catalog of
elementary and unfolding blocks, enumerates all inequivalent decompositions,
assembles the triangulated bordered surface each decomposition describes, and
ships a verified catalog of the known graphs with non-unique decomposition.
"""

from blockdec.diagram import (
    Diagram,
    Edge,
    QUIVER,
    S_DIAGRAM,
    canonical_form,
    canonical_key,
    make_diagram,
    parse_diagram,
    serialize_diagram,
    to_matrix,
)

__all__ = [
    "Diagram",
    "Edge",
    "QUIVER",
    "S_DIAGRAM",
    "canonical_form",
    "canonical_key",
    "make_diagram",
    "parse_diagram",
    "serialize_diagram",
    "to_matrix",
]

__version__ = "0.1.0"
