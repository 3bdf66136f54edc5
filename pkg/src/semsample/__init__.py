"""Semantics-guided point-cloud down-sampling toolkit."""

from .errors import (
    BudgetError,
    ConfigError,
    DimensionError,
    FormatError,
    InvalidInputError,
    MissingFeaturesError,
    SemSampleError,
    UndefinedMetricError,
)
from .geometry import (
    OrientedBox,
    PointCloud,
    SegmentationLabels,
    euclidean_distance,
    label_points,
    point_in_box,
)
from .sampling import (
    ForegroundScores,
    SampleResult,
    SFpsConfig,
    f_fps,
    fps,
    fusion_sample,
    s_fps,
    top_k_scores,
    weighted_distance,
)
from .scorer import (
    Mlp,
    SegTrainConfig,
    load_mlp,
    mlp_backward,
    mlp_forward,
    save_mlp,
    score_cloud,
    seg_loss,
    train_segmenter,
)
from .abstraction import (
    BallQueryConfig,
    SasaLayer,
    SharedMlp,
    ball_query,
    group_and_pool,
    sasa_forward,
)
from .metrics import (
    SamplingReport,
    SceneReport,
    aggregate,
    foreground_rate,
    format_table,
    point_recall,
    scene_report,
    write_csv,
    write_per_scene_csv,
)
from .scenes import (
    SceneGenConfig,
    SceneSample,
    gen_scene,
    generate_scene_set,
    load_scene_set,
    local_features,
    oracle_scores,
    read_kitti_bin,
    scene_load,
    scene_save,
    voxel_downsample,
    write_kitti_bin,
)

__version__ = "0.1.0"
