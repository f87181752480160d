"""Switch-based hybrid precoder design for mmWave massive MIMO."""

from .channel import (
    ArrayGeometry,
    ChannelConfig,
    ChannelRealization,
    generate_channel,
    steering_vector,
)
from .connectivity import (
    ConnectivitySpec,
    InfeasibleMaskError,
    apply_mask,
    interleaved_spec,
    subset_partition,
    validate,
)
from .metrics import (
    HybridPrecoder,
    LinkBudget,
    RankError,
    mutual_information,
    optimal_precoder,
    truncated_channel,
)
from .nm import DesignReport, NmConfig, baseband_update_qr, design_shd_nm
from .qrqu import QrquConfig, design_shd_qrqu

__version__ = "0.1.0"
