"""Offline eye-gaze analytics: fixations, AOI clustering, scanpaths, stats, rendering."""

__version__ = "0.1.0"

from gazekit.cluster import ClusterConfig, ClusterModel, em_gmm, kmeans, select_k, xb_index
from gazekit.fixation import Fixation, FixationConfig, detect_fixations, fixation_summary
from gazekit.ingest import (
    GazeSample,
    Recording,
    ResponseEvent,
    ScreenSpec,
    export_fixations,
    parse_fixations,
    parse_gaze_log,
    parse_trial_meta,
)
from gazekit.render import (
    Gradient,
    HeatmapConfig,
    overlay_clusters,
    render_gazeplot,
    render_heatmap,
    render_scatter,
)
from gazekit.sequence import (
    AoiSpec,
    RegionLabel,
    aoi_fixation_ratio,
    bigram_frequencies,
    first_fixation_region,
    label_sequence,
    region_of,
)
from gazekit.stats import (
    AnovaResult,
    CorrelationResult,
    one_way_anova,
    partial_eta_squared,
    pearson_r,
    rm_anova,
)
