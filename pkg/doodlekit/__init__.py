"""
doodlekit: twin groups, doodle diagrams and the Markov theorem for doodles.
"""

from doodlekit.markov import (
    MMove,
    MPath,
    MoveRangeError,
    apply_m1,
    apply_m2,
    apply_m3,
    apply_m4,
    apply_move,
    detect_inverse_m3_m4,
    m_search,
    markov_experiment,
)
from doodlekit.moves import (
    BendingSite,
    Bigon,
    GeneralizedBiangle,
    Monogon,
    MoveError,
    NotApplicableError,
    SiteError,
    StaleSiteError,
    apply_generalized_bending,
    apply_generalized_tightening,
    apply_r1,
    apply_r2_add,
    apply_r2_remove,
    equivalent_doodles,
    find_bigons,
    find_generalized_biangles,
    find_monogons,
    reduce_minimal,
)
from doodlekit.plane_map import (
    CanonicalCode,
    Diagram,
    DiagramError,
    SeifertFamily,
    canonical_code,
    closure,
    components,
    dumps,
    faces,
    loads,
    seifert_smooth,
    validate,
)
from doodlekit.twinword import (
    GeneratorRangeError,
    StrandMismatchError,
    StrandPermutation,
    TwinWord,
    WordError,
    WordSyntaxError,
    equal,
    inverse,
    multiply,
    normal_form,
    parse_word,
    permutation,
    tensor,
)

__version__ = "0.1.0"
