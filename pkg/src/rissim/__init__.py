"""Phase synthesis, quantisation analysis and pattern simulation for PIN-diode RIS arrays."""

__version__ = "0.1.0"

from .codebook import (  # noqa: E402
    PhaseCodebook,
    PhaseState,
    adjacent_phase_differences,
    average_magnitude,
    effective_bandwidth,
    equivalent_bits,
    ideal_states,
    load_codebook,
)
from .control import (  # noqa: E402
    BiasFrame,
    ChainConfig,
    StateMapping,
    apply_mapping,
    reparse,
    serialize,
    simulate_chain,
)
from .fields import (  # noqa: E402
    DirectionGrid,
    Pattern,
    SourceModel,
    directivity,
    illuminate,
    pattern_cut,
    radiate,
    rcs_response,
)
from .geometry import ArrayGeometry, Direction, element_positions, far_field_distance  # noqa: E402
from .metrics import (  # noqa: E402
    enhancement,
    find_peak,
    quantization_lobe_level,
    quantization_loss_study,
    scan_sweep,
    side_lobe_level,
)
from .synthesis import (  # noqa: E402
    PhaseMap,
    QuantizedMap,
    ideal_phase_profile,
    optimize_offset,
    quantize_phase_map,
    uniform_map,
)
