"""Eigenbeam subband beamforming for coherent hybrid massive MIMO."""

from hybridmimo.channel import (
    CompositeChannel,
    LongTermChannel,
    SubbandScatterChannel,
    build_long_term_channel,
    compose_channel,
    path_gain,
    sample_local_scatter,
)
from hybridmimo.eigenbeams import (
    ChannelSvd,
    EigenbeamSet,
    RankProfile,
    TruncatedChannel,
    cumulative_power,
    effective_precoder,
    extract_eigenbeams,
    svd_decompose,
    truncate,
)
from hybridmimo.geometry import (
    ArrayGeometry,
    CellLayout,
    DepartureAngles,
    ObservationGrid,
    build_array,
    build_layout,
    build_observation_grid,
    departure_geometry,
)

__version__ = "0.1.0"
