"""fdsq: frequency-dependent squeezed light simulation and tomography toolkit."""

__version__ = "0.1.0"

from .states import (  # noqa: F401
    DET_TOLERANCE,
    EllipseParams,
    QuadratureState,
    SqueezeParams,
    angle_jitter_average,
    apply_loss,
    ellipse_params,
    mix_incoherent,
    rotate_state,
    squeezed_state,
    vacuum_state,
    variance_at_angle,
)
from .cavity import (  # noqa: F401
    CavityFigures,
    CavityParams,
    QuadratureTransfer,
    cascade_rotation,
    cavity_figures,
    half_arg_rotation,
    quadrature_transfer,
    reflect_state,
    reflectance,
    rotation_angle_approx,
)
from .chain import (  # noqa: F401
    ChainConfig,
    OpaParams,
    chain_state,
    default_config,
    gain_from_pump,
    noise_spectrum,
    opa_state,
    pump_from_gain,
)
from .lockctl import (  # noqa: F401
    ErrorSignalModel,
    LockPlan,
    error_signal,
    lock_point,
    plan_for_angle,
)
from .tomography import (  # noqa: F401
    GridSpec,
    Sinogram,
    StateEstimate,
    TomographyResult,
    TomoRunSpec,
    WignerGrid,
    analytic_sinogram,
    analytic_wigner,
    build_sinogram,
    estimate_state,
    filtered_backprojection,
    sample_quadratures,
    tomography_run,
)
from .errors import ConfigIOError, NumericalError  # noqa: F401
