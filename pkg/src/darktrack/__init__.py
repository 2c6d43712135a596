"""RGB-thermal cooperative multi-person tracking and loop-closure toolkit."""

from .assignment import assign
from .calibration import (
    Correspondence,
    Homography,
    estimate_homography,
    reprojection_rmse,
    warp_bbox,
    warp_point,
)
from .cooperative import (
    BrightnessLabel,
    FrameStats,
    IdPairTable,
    PseudoLabelSet,
    classify_brightness,
    export_pseudo_labels,
    fuse_frame,
    switch_frame,
)
from .geometry import (
    BBox,
    Detection,
    Mask,
    Point2,
    bbox_to_state_vec,
    iou,
    mask_and_bbox,
    state_vec_to_bbox,
)
from .ho3 import (
    HO3Landmark,
    LandmarkMap,
    build_landmark_map,
    extract_lower_endpoints,
    filter_landmarks,
)
from .loopclosure import (
    Affine2D,
    Ranking,
    RansacParams,
    candidate_pairs,
    rank_past_frames,
    ransac_match,
    solve_affine,
    topk_accuracy,
)
from .metrics import (
    MetricsReport,
    clear_match,
    compute_hota,
    compute_idf1,
    compute_mota,
    evaluate,
)
from .simulator import (
    BrightnessSpan,
    DetectionModel,
    Occluder,
    SimConfig,
    SimDataset,
    loop_ground_truth,
    loop_scene_config,
    out_and_back_offsets,
    simulate,
)
from .tracker import (
    ByteTracker,
    Track,
    TrackerParams,
    TrackRecord,
    TrackStatus,
    run_sequence,
)

__version__ = "0.1.0"
