"""FBMC-OQAM baseband simulator with pdf-shaping amplitude companding.

Subpackage layout:

- ``prototype``: PHYDYAS prototype filter design and quality checks
- ``modem``: QAM/OQAM mapping, filter-bank synthesis/analysis, OFDM reference
- ``compander``: mu-law, uniform-pdf and linear-pdf amplitude transforms
- ``channel``: calibrated AWGN
- ``metrics``: PAPR, CCDF (empirical and closed form), BER, Welch PSD
- ``harness``: experiment configs, Monte Carlo runner, CSV output
"""

__version__ = "0.1.0"

from .prototype import PrototypeFilter, build_phydyas, nyquist_defect
from .modem import (
    Constellation,
    QamSymbolBlock,
    OqamSequence,
    FbmcFrame,
    generate_symbols,
    oqam_stagger,
    oqam_destagger,
    synthesize,
    analyze,
    ofdm_modulate,
)
from .compander import (
    CompanderKind,
    CompanderSpec,
    BussgangReport,
    estimate_sigma,
    compand_uniform,
    expand_uniform,
    compand_linear,
    expand_linear,
    compand_mulaw,
    expand_mulaw,
    apply_to_frame,
    expand_frame,
    bussgang_report,
)
from .channel import AwgnSpec, transmit
from .metrics import (
    CcdfCurve,
    CcdfKind,
    BerPoint,
    PsdEstimate,
    papr_per_interval,
    papr_ofdm,
    ccdf_empirical,
    ccdf_theoretical,
    ber_run,
    psd_welch,
)
from .harness import ExperimentConfig, parse_config, run
