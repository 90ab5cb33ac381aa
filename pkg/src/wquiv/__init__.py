"""wquiv: mutation of quivers weighted in a group.

Subpackage map: exact group arithmetic (``groups``), the quiver data model
(``quiver``), mutation (``mutation``), search drivers for nondegeneracy and
sign coherence (``analysis``), gauge equivalence (``equivalence``), the tame
classifier (``tame``), weighted quivers with potential (``potential``), file
formats and corpus generation (``io``), the CLI (``cli``) and the session
service (``server``).  The hot search loops run on a compiled kernel when
available (``kernel.BACKEND`` tells which one is active).
"""

from .groups import (
    GroupElement,
    GroupKind,
    cyclic_kind,
    format_element,
    free_abelian_kind,
    free_kind,
    identity,
    invert,
    multiply,
    parse_element,
    trivial_kind,
)
from .quiver import Arrow, Vertex, WeightedQuiver, exchange_matrix, two_cycles, validate
from .mutation import MutationError, MutationRecord, mutate, mutate_sequence, premutate, weight_reduce

__version__ = "0.1.0"
