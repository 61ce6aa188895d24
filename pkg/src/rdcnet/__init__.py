"""Risk-dependent centrality of assets in rolling stock-correlation networks."""

from rdcnet.analytics import (
    CorrelationTestResult,
    MeanDiffResult,
    RankTable,
    WindowStats,
    correlation_test,
    rank_assets,
    rank_table,
    top_bottom_grid,
    welch_test,
    window_stats,
)
from rdcnet.ingest import (
    PricePanel,
    PriceRecord,
    ReturnSeries,
    WindowPanel,
    WindowSpec,
    build_windows,
    log_returns,
    parse_index,
    parse_prices,
)
from rdcnet.network import (
    CorrelationMatrix,
    DistanceMatrix,
    MstTree,
    correlation_matrix,
    mst,
    pearson,
    to_distance,
)
from rdcnet.rdc import (
    RdcProfile,
    SpectralDecomposition,
    ZetaGrid,
    expm_scaled,
    rdc_profile,
    spectral_decompose,
)

__version__ = "0.1.0"
