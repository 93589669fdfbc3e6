"""Path-loss modeling from simplified terrain/clutter obstruction features.

The pipeline: parse DTM/DSM grids (`raster`), extract per-link path
profiles and obstruction depths (`profile`), turn drive-test measurements
into feature tables (`dataset`), fit the FSPL baseline and the three
trainable model families (`models`), evaluate them with city-holdout
round-robins (`evaluation`, `report`) and derive obstacle-loss curves from
any trained model (`analysis`). The `pathdepth` CLI ties it together.
"""

from .analysis import obstacle_loss, sweep_obstacle_loss
from .dataset import (
    FEATURE_CONFIGS,
    FeatureRow,
    Measurement,
    build_feature_table,
    feature_matrix,
    filter_noise_floor,
    ingest_measurements,
    load_table,
    save_table,
)
from .evaluation import (
    EvalReport,
    error_histogram,
    mae,
    make_holdout_plan,
    median_error,
    rmse,
    run_holdout,
)
from .models import (
    FullyConnectedNetwork,
    GradientBoostedTrees,
    LogDistanceRegression,
    fspl_db,
    load_model,
    save_model,
)
from .profile import (
    DepthSummary,
    Link,
    PathProfile,
    apply_earth_curvature,
    compute_depths,
    extract_profile,
)
from .raster import (
    NODATA,
    OUT_OF_BOUNDS,
    GridPair,
    RasterGrid,
    load_grid,
    load_grid_pair,
    make_grid_pair,
    parse_ascii_grid,
    parse_binary_grid,
    sample_height,
    save_grid,
)

__version__ = "0.1.0"
